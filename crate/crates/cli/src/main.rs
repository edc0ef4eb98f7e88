//! `scuc`: solve, export, synthesize, benchmark and serve unit-commitment
//! instances.
//!
//! Exit codes: 0 success, 1 invalid input or usage, 2 solver failure,
//! 3 I/O error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use scuc_core::benchmark::{
    compare, run_trials, EnvironmentProfile, FixedDelaySolver, MipTrialSolver, TrialRecord, TrialSolver,
};
use scuc_core::formats::{
    export_mps, read_trials_csv, sidecar_path, write_plot_data, write_report_csv, write_trials_csv, BenchSidecar,
    SolutionDocument,
};
use scuc_core::instance::InstanceError;
use scuc_core::mip::{solve_mip_with, NodeEvent, SolveControl};
use scuc_core::{compile, model_stats, parse_instance, serialize_instance, synth_instance, MipStatus, SolverOptions, UcInstance};
use scuc_service::jobs::{JobService, MipJobSolver, ServiceConfig, DEFAULT_QUEUE_DEPTH};

#[derive(Parser, Debug)]
#[command(name = "scuc", version, about = "Security-constrained unit commitment toolkit")]
struct Cli {
    /// Directory for relative and default output paths.
    #[arg(long, global = true, env = "SCUC_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an instance by branch-and-bound.
    Solve(SolveArgs),
    /// Write the compiled model as free-format MPS.
    ExportMps {
        instance: PathBuf,
        #[arg(long, default_value = "model.mps")]
        out: PathBuf,
    },
    /// Generate a synthetic instance.
    Synth {
        #[arg(long)]
        gens: usize,
        #[arg(long)]
        buses: usize,
        #[arg(long)]
        lines: usize,
        #[arg(long, default_value_t = scuc_core::synth::DEFAULT_HORIZON)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "instance.json")]
        out: PathBuf,
    },
    /// Time repeated solves of one instance.
    Bench(BenchArgs),
    /// Compare trial files against a baseline environment.
    Compare {
        #[arg(long)]
        baseline: String,
        #[arg(required = true)]
        trials: Vec<PathBuf>,
        #[arg(long, default_value = "report.csv")]
        out: PathBuf,
        /// Plot data file; defaults to `<out>.plot.tsv`.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Run the HTTP job service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        workers: u16,
        #[arg(long, default_value_t = DEFAULT_QUEUE_DEPTH)]
        queue_depth: usize,
    },
}

#[derive(Args, Debug, Clone)]
struct SolverFlags {
    /// Relative optimality gap.
    #[arg(long, default_value_t = 0.005, allow_negative_numbers = true)]
    gap: f64,
    /// Time limit in seconds.
    #[arg(long, allow_negative_numbers = true)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

impl SolverFlags {
    fn options(&self, seed: u64) -> Result<SolverOptions, CliError> {
        let o = SolverOptions {
            rel_gap: self.gap,
            time_limit: self.time_limit,
            worker_count: self.workers,
            seed,
        };
        o.validate().map_err(|e| CliError::Invalid(anyhow!(e)))?;
        Ok(o)
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long, default_value = "solution.json")]
    out: PathBuf,
    /// Write the node log, one line per evaluated node.
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long)]
    env_name: String,
    /// Defaults to the preset of the same name, if any.
    #[arg(long)]
    cpus: Option<u32>,
    #[arg(long)]
    ram: Option<f64>,
    #[arg(long)]
    processor: Option<String>,
    #[arg(long)]
    no_ssd: bool,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long, default_value = "trials.csv")]
    out: PathBuf,
    /// Replace the solver by a fixed sleep of this many milliseconds.
    #[arg(long)]
    stub_delay_ms: Option<u64>,
}

#[derive(Debug)]
enum CliError {
    Invalid(anyhow::Error),
    Solver(anyhow::Error),
    Io(anyhow::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

fn io_err(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Io(e.into())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Invalid(inner) | CliError::Solver(inner) | CliError::Io(inner)) = &e;
            eprintln!("error: {inner:#}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out_dir = cli.out_dir.as_deref();
    match cli.command {
        Command::Solve(args) => solve(args, out_dir),
        Command::ExportMps { instance, out } => {
            let inst = read_instance(&instance)?;
            let model = compile(&inst).map_err(|e| CliError::Invalid(anyhow!(e)))?;
            let path = resolve(out_dir, &out);
            write_atomic(&path, export_mps(&model).as_bytes())?;
            println!("{}", model_stats(&model));
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Synth {
            gens,
            buses,
            lines,
            horizon,
            seed,
            out,
        } => {
            let inst =
                synth_instance(gens, buses, lines, horizon, seed).map_err(|e| CliError::Invalid(anyhow!(e)))?;
            let path = resolve(out_dir, &out);
            write_atomic(&path, serialize_instance(&inst).as_bytes())?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Bench(args) => bench(args, out_dir),
        Command::Compare {
            baseline,
            trials,
            out,
            plot,
        } => compare_cmd(&baseline, &trials, &resolve(out_dir, &out), plot.map(|p| resolve(out_dir, &p))),
        Command::Serve {
            port,
            host,
            workers,
            queue_depth,
        } => serve(&host, port, workers as usize, queue_depth),
    }
}

fn resolve(out_dir: Option<&Path>, path: &Path) -> PathBuf {
    match out_dir {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(io_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))
        .map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(io_err)?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(io_err)
}

fn read_instance(path: &Path) -> Result<UcInstance, CliError> {
    let text = read_text(path)?;
    parse_instance(&text).map_err(|e| {
        let mut msg = format!("{}: {e}", path.display());
        if let InstanceError::Validation(v) = &e {
            for x in v {
                msg.push_str(&format!("\n  {x}"));
            }
        }
        CliError::Invalid(anyhow!(msg))
    })
}

fn solve(args: SolveArgs, out_dir: Option<&Path>) -> Result<(), CliError> {
    let options = args.solver.options(0)?;
    let inst = read_instance(&args.instance)?;
    let t0 = Instant::now();
    let model = compile(&inst).map_err(|e| CliError::Invalid(anyhow!(e)))?;
    let compile_seconds = t0.elapsed().as_secs_f64();

    let lines = Mutex::new(Vec::new());
    let sink = |e: &NodeEvent| lines.lock().expect("lock").push(e.to_line());
    let ctl = SolveControl {
        events: args.events.is_some().then_some(&sink as _),
        ..Default::default()
    };
    let result = solve_mip_with(&model, &options, ctl).map_err(|e| CliError::Solver(anyhow!(e)))?;
    let doc = SolutionDocument::new(&inst, &model, &result, compile_seconds);
    let path = resolve(out_dir, &args.out);
    write_atomic(&path, doc.to_json().as_bytes())?;
    if let Some(ev) = &args.events {
        let mut text = lines.into_inner().expect("lock").join("\n");
        text.push('\n');
        write_atomic(&resolve(out_dir, ev), text.as_bytes())?;
    }

    println!("status      {}", result.status);
    println!("objective   {}", result.objective);
    println!("best bound  {}", result.best_bound);
    println!("gap         {}", result.rel_gap_achieved);
    println!("nodes       {}", result.nodes_explored);
    println!("seconds     {:.3} (compile {:.3})", result.solve_seconds, compile_seconds);
    println!("wrote {}", path.display());
    match result.status {
        MipStatus::OptimalWithinGap => Ok(()),
        MipStatus::TimeLimit if doc.has_schedule() => {
            log::warn!("time limit reached; solution is feasible but the gap is not closed");
            Ok(())
        }
        s => Err(CliError::Solver(anyhow!("solver finished with status {s} and no usable schedule"))),
    }
}

fn bench(args: BenchArgs, out_dir: Option<&Path>) -> Result<(), CliError> {
    let preset = EnvironmentProfile::preset(&args.env_name);
    let env = EnvironmentProfile {
        name: args.env_name.clone(),
        cpu_count: args
            .cpus
            .or(preset.as_ref().map(|p| p.cpu_count))
            .ok_or_else(|| CliError::Invalid(anyhow!("--cpus is required for environment {:?}", args.env_name)))?,
        ram_gb: args
            .ram
            .or(preset.as_ref().map(|p| p.ram_gb))
            .ok_or_else(|| CliError::Invalid(anyhow!("--ram is required for environment {:?}", args.env_name)))?,
        ssd: !args.no_ssd,
        processor: args
            .processor
            .clone()
            .or(preset.map(|p| p.processor))
            .unwrap_or_else(|| "unspecified".into()),
    };
    env.validate().map_err(|e| CliError::Invalid(anyhow!(e)))?;
    if args.trials < 1 {
        return Err(CliError::Invalid(anyhow!("--trials must be at least 1")));
    }
    let options = args.solver.options(0)?;
    let inst = read_instance(&args.instance)?;

    let mut solver: Box<dyn TrialSolver> = match args.stub_delay_ms {
        Some(ms) => Box::new(FixedDelaySolver {
            delay: Duration::from_millis(ms),
        }),
        None => Box::new(MipTrialSolver::default()),
    };
    let total = args.trials;
    let records = run_trials(&inst, &options, total, &env, solver.as_mut(), |r: &TrialRecord| {
        eprintln!(
            "trial {}/{}: {:.4} s{}",
            r.trial + 1,
            total,
            r.solve_seconds,
            r.error.as_deref().map(|e| format!(" (failed: {e})")).unwrap_or_default()
        );
    })
    .map_err(|e| CliError::Invalid(anyhow!(e)))?;

    let failed = records.iter().filter(|r| !r.succeeded()).count();
    let csv = write_trials_csv(&records).map_err(io_err)?;
    let path = resolve(out_dir, &args.out);
    write_atomic(&path, csv.as_bytes())?;
    let sidecar = BenchSidecar {
        environment: env,
        instance: inst.name.clone(),
        options,
        trials: records.len(),
        failed_trials: failed,
        stub: solver.is_stub(),
    };
    let json = serde_json::to_string_pretty(&sidecar).map_err(io_err)?;
    write_atomic(&sidecar_path(&path), json.as_bytes())?;
    println!("wrote {} ({} trials, {} failed)", path.display(), records.len(), failed);
    if failed == records.len() {
        return Err(CliError::Solver(anyhow!("every trial failed")));
    }
    if failed > 0 {
        log::warn!("{failed} of {} trials failed; the trial set is incomplete", records.len());
    }
    Ok(())
}

fn compare_cmd(baseline: &str, files: &[PathBuf], out: &Path, plot: Option<PathBuf>) -> Result<(), CliError> {
    let mut records = Vec::new();
    let mut profiles = Vec::new();
    for f in files {
        let text = read_text(f)?;
        let recs = read_trials_csv(&text)
            .with_context(|| format!("parsing {}", f.display()))
            .map_err(CliError::Invalid)?;
        records.extend(recs);
        let side = sidecar_path(f);
        if side.exists() {
            let meta: BenchSidecar = serde_json::from_str(&read_text(&side)?)
                .with_context(|| format!("parsing {}", side.display()))
                .map_err(CliError::Invalid)?;
            profiles.push(meta.environment);
        }
    }
    let report = compare(&records, baseline, &profiles).map_err(|e| CliError::Invalid(anyhow!(e)))?;
    write_atomic(out, write_report_csv(&report).map_err(io_err)?.as_bytes())?;
    let plot = plot.unwrap_or_else(|| {
        let mut s = out.as_os_str().to_owned();
        s.push(".plot.tsv");
        s.into()
    });
    write_atomic(&plot, write_plot_data(&report).as_bytes())?;

    println!("{:<16} {:>7} {:>12} {:>12} {:>9}", "env", "trials", "mean_s", "sd_s", "gain_%");
    for r in &report.rows {
        let flag = if r.incomplete() { " (incomplete)" } else { "" };
        println!(
            "{:<16} {:>7} {:>12.6} {:>12.6} {:>+9.3}{flag}",
            r.env, r.trials, r.mean_seconds, r.sd_seconds, r.percent_gain
        );
    }
    println!("wrote {} and {}", out.display(), plot.display());
    Ok(())
}

fn serve(host: &str, port: u16, workers: usize, queue_depth: usize) -> Result<(), CliError> {
    let rt = tokio::runtime::Runtime::new().map_err(io_err)?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .with_context(|| format!("binding {host}:{port}"))
            .map_err(io_err)?;
        let addr = listener.local_addr().map_err(io_err)?;
        let service = Arc::new(JobService::start(
            ServiceConfig { workers, queue_depth },
            Arc::new(MipJobSolver),
        ));
        eprintln!("listening on http://{addr} with {workers} worker(s)");
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        scuc_service::serve(listener, service, shutdown).await.map_err(io_err)
    })
}
