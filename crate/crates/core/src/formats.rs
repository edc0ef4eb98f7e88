//! Interchange formats: free-format MPS, solution documents, and the
//! benchmark CSV files.

use std::collections::HashMap;
use std::fmt::Write as _;

use chrono::{DateTime, Utc};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchmark::{ComparisonReport, EnvironmentProfile, TrialRecord};
use crate::compiler::{CompactModel, Var};
use crate::instance::UcInstance;
use crate::lp::{LpError, LpProblem};
use crate::mip::{MipResult, MipStatus, SolverOptions};

const OBJECTIVE_ROW: &str = "COST";

#[derive(Debug, Error, Clone, PartialEq)]
#[error("MPS line {line}: {msg}")]
pub struct MpsParseError {
    pub line: usize,
    pub msg: String,
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("solution document: {0}")]
    Solution(String),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// Numbers are written with 17 significant digits so they parse back to
/// the same `f64`.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Free-format MPS of the model's relaxation with the z-block wrapped in
/// integer markers. Rows and columns follow the model's own ordering.
pub fn export_mps(model: &CompactModel) -> String {
    write_mps(&model.lp_relaxation(), &model.name)
}

/// Free-format MPS of any LP problem. Columns flagged in the integrality
/// mask are wrapped in `INTORG`/`INTEND` markers.
pub fn write_mps(p: &LpProblem, name: &str) -> String {
    let mut out = String::new();
    let name = if name.trim().is_empty() { "model" } else { name };
    let _ = writeln!(out, "NAME {}", name.split_whitespace().collect::<Vec<_>>().join("_"));
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {OBJECTIVE_ROW}");
    let mut ranges = Vec::new();
    let mut rhs = Vec::new();
    for (i, &(lo, hi)) in p.row_bounds.iter().enumerate() {
        let (kind, value) = match (lo.is_finite(), hi.is_finite()) {
            (true, true) if lo == hi => ("E", lo),
            (true, true) => {
                ranges.push((i, hi - lo));
                ("L", hi)
            }
            (false, true) => ("L", hi),
            (true, false) => ("G", lo),
            (false, false) => ("N", 0.0),
        };
        if value != 0.0 {
            rhs.push((i, value));
        }
        let _ = writeln!(out, " {kind}  {}", p.row_names[i]);
    }

    out.push_str("COLUMNS\n");
    let mut in_marker = false;
    let mut markers = 0;
    for j in 0..p.n_cols() {
        if p.integrality[j] != in_marker {
            let tag = if in_marker { "INTEND" } else { "INTORG" };
            let _ = writeln!(out, "    MARKER{markers}  'MARKER'  '{tag}'");
            markers += 1;
            in_marker = p.integrality[j];
        }
        let col = &p.col_names[j];
        let mut wrote = false;
        if p.objective[j] != 0.0 {
            let _ = writeln!(out, "    {col}  {OBJECTIVE_ROW}  {}", num(p.objective[j]));
            wrote = true;
        }
        for (r, v) in p.matrix.col(j) {
            let _ = writeln!(out, "    {col}  {}  {}", p.row_names[r], num(v));
            wrote = true;
        }
        if !wrote {
            let _ = writeln!(out, "    {col}  {OBJECTIVE_ROW}  {}", num(0.0));
        }
    }
    if in_marker {
        let _ = writeln!(out, "    MARKER{markers}  'MARKER'  'INTEND'");
    }

    out.push_str("RHS\n");
    for (i, v) in rhs {
        let _ = writeln!(out, "    RHS  {}  {}", p.row_names[i], num(v));
    }
    if !ranges.is_empty() {
        out.push_str("RANGES\n");
        for (i, v) in ranges {
            let _ = writeln!(out, "    RNG  {}  {}", p.row_names[i], num(v));
        }
    }

    out.push_str("BOUNDS\n");
    for (j, &(lo, hi)) in p.col_bounds.iter().enumerate() {
        let col = &p.col_names[j];
        let mut bound = |kind: &str, v: Option<f64>| {
            let _ = match v {
                Some(v) => writeln!(out, " {kind} BND  {col}  {}", num(v)),
                None => writeln!(out, " {kind} BND  {col}"),
            };
        };
        if lo == hi {
            bound("FX", Some(lo));
        } else if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            bound("FR", None);
        } else {
            if lo == f64::NEG_INFINITY {
                bound("MI", None);
            } else if lo != 0.0 {
                bound("LO", Some(lo));
            }
            if hi.is_finite() {
                bound("UP", Some(hi));
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

/// A problem read from MPS text.
#[derive(Debug, Clone, PartialEq)]
pub struct MpsModel {
    pub name: String,
    pub problem: LpProblem,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

#[derive(Clone, Copy)]
enum RowKind {
    N,
    E,
    L,
    G,
}

/// Reads free-format MPS. Integer markers and `BV`/`LI`/`UI` bounds set
/// the integrality mask. Integer columns default to `[0, ∞)` like
/// continuous ones.
pub fn import_mps(text: &str) -> Result<MpsModel, MpsParseError> {
    let mut name = String::new();
    let mut section = Section::None;
    let mut objective_row: Option<String> = None;
    let mut rows: Vec<(String, RowKind)> = Vec::new();
    let mut row_at: HashMap<String, usize> = HashMap::new();
    let mut cols: Vec<String> = Vec::new();
    let mut col_at: HashMap<String, usize> = HashMap::new();
    let mut objective: Vec<f64> = Vec::new();
    let mut integer: Vec<bool> = Vec::new();
    let mut bounds: Vec<(f64, f64)> = Vec::new();
    let mut triplets = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut range: Vec<Option<f64>> = Vec::new();
    let mut in_marker = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |msg: String| MpsParseError { line, msg };
        let trimmed = raw.trim_end();
        if trimmed.trim().is_empty() || trimmed.starts_with('*') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if !raw.starts_with(char::is_whitespace) {
            section = match tokens[0] {
                "NAME" => {
                    name = tokens.get(1..).map(|t| t.join(" ")).unwrap_or_default();
                    Section::None
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                "OBJSENSE" => {
                    let sense = tokens.get(1).copied().unwrap_or("MIN");
                    if sense != "MIN" && sense != "MINIMIZE" {
                        return Err(err(format!("unsupported objective sense {sense}")));
                    }
                    Section::None
                }
                other => return Err(err(format!("unknown section header {other:?}"))),
            };
            continue;
        }
        let number = |s: &str| -> Result<f64, MpsParseError> {
            s.parse::<f64>()
                .ok()
                .filter(|v| !v.is_nan())
                .ok_or_else(|| err(format!("bad number {s:?}")))
        };
        let row_of = |n: &str| -> Result<Option<usize>, MpsParseError> {
            if objective_row.as_deref() == Some(n) {
                return Ok(None);
            }
            row_at
                .get(n)
                .copied()
                .map(Some)
                .ok_or_else(|| err(format!("unknown row {n:?}")))
        };
        match section {
            Section::Rows => {
                let [kind, row_name] = tokens[..] else {
                    return Err(err("ROWS entries need a type and a name".into()));
                };
                let kind = match kind {
                    "N" => RowKind::N,
                    "E" => RowKind::E,
                    "L" => RowKind::L,
                    "G" => RowKind::G,
                    k => return Err(err(format!("unknown row type {k:?}"))),
                };
                if matches!(kind, RowKind::N) && objective_row.is_none() {
                    objective_row = Some(row_name.to_string());
                    continue;
                }
                if row_at.insert(row_name.to_string(), rows.len()).is_some() {
                    return Err(err(format!("duplicate row {row_name:?}")));
                }
                rows.push((row_name.to_string(), kind));
                rhs.push(0.0);
                range.push(None);
            }
            Section::Columns => {
                if tokens.get(1) == Some(&"'MARKER'") {
                    match tokens.get(2).copied() {
                        Some("'INTORG'") => in_marker = true,
                        Some("'INTEND'") => in_marker = false,
                        other => return Err(err(format!("unknown marker {other:?}"))),
                    }
                    continue;
                }
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(err("COLUMNS entries need a column and one or two row/value pairs".into()));
                }
                let col = tokens[0];
                let j = match col_at.get(col) {
                    Some(&j) => j,
                    None => {
                        let j = cols.len();
                        col_at.insert(col.to_string(), j);
                        cols.push(col.to_string());
                        objective.push(0.0);
                        integer.push(in_marker);
                        bounds.push((0.0, f64::INFINITY));
                        j
                    }
                };
                for pair in tokens[1..].chunks(2) {
                    let v = number(pair[1])?;
                    match row_of(pair[0])? {
                        None => objective[j] += v,
                        Some(r) => triplets.push((r, j, v)),
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let pairs = match tokens.len() {
                    2 | 4 => &tokens[..],
                    3 | 5 => &tokens[1..],
                    _ => return Err(err("expected row/value pairs".into())),
                };
                for pair in pairs.chunks(2) {
                    let v = number(pair[1])?;
                    match (row_of(pair[0])?, section) {
                        (Some(r), Section::Rhs) => rhs[r] = v,
                        (Some(r), _) => range[r] = Some(v),
                        (None, Section::Rhs) if v != 0.0 => {
                            return Err(err("objective constants are not supported".into()))
                        }
                        (None, Section::Rhs) => {}
                        (None, _) => return Err(err("range on the objective row".into())),
                    }
                }
            }
            Section::Bounds => {
                let (kind, col, value) = match tokens.len() {
                    3 => (tokens[0], tokens[2], None),
                    4 => (tokens[0], tokens[2], Some(number(tokens[3])?)),
                    _ => return Err(err("BOUNDS entries need a type, set, column and value".into())),
                };
                let j = *col_at
                    .get(col)
                    .ok_or_else(|| err(format!("unknown column {col:?}")))?;
                let need = |v: Option<f64>| v.ok_or_else(|| err(format!("{kind} bound needs a value")));
                let b = &mut bounds[j];
                match kind {
                    "UP" => b.1 = need(value)?,
                    "LO" => b.0 = need(value)?,
                    "FX" => *b = (need(value)?, need(value)?),
                    "FR" => *b = (f64::NEG_INFINITY, f64::INFINITY),
                    "MI" => b.0 = f64::NEG_INFINITY,
                    "PL" => b.1 = f64::INFINITY,
                    "BV" => {
                        *b = (0.0, 1.0);
                        integer[j] = true;
                    }
                    "LI" => {
                        b.0 = need(value)?;
                        integer[j] = true;
                    }
                    "UI" => {
                        b.1 = need(value)?;
                        integer[j] = true;
                    }
                    k => return Err(err(format!("unknown bound type {k:?}"))),
                }
            }
            Section::None | Section::End => {
                return Err(err("data line outside of a section".into()));
            }
        }
    }
    if section != Section::End {
        return Err(MpsParseError {
            line: text.lines().count(),
            msg: "missing ENDATA".into(),
        });
    }

    let row_bounds: Vec<(f64, f64)> = rows
        .iter()
        .zip(rhs.iter().zip(&range))
        .map(|((_, kind), (&r, &rng))| match (kind, rng) {
            (RowKind::N, _) => (f64::NEG_INFINITY, f64::INFINITY),
            (RowKind::E, None) => (r, r),
            (RowKind::E, Some(v)) if v >= 0.0 => (r, r + v),
            (RowKind::E, Some(v)) => (r + v, r),
            (RowKind::L, None) => (f64::NEG_INFINITY, r),
            (RowKind::L, Some(v)) => (r - v.abs(), r),
            (RowKind::G, None) => (r, f64::INFINITY),
            (RowKind::G, Some(v)) => (r, r + v.abs()),
        })
        .collect();
    let row_names = rows.into_iter().map(|r| r.0).collect();
    let problem = LpProblem::new(objective, bounds, row_bounds, &triplets)
        .map_err(|e| MpsParseError {
            line: text.lines().count(),
            msg: match e {
                LpError::Invalid(m) => m,
                other => other.to_string(),
            },
        })?
        .with_integrality(integer)
        .with_names(cols, row_names);
    Ok(MpsModel { name, problem })
}

/// Schedule of one generator, one entry per period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSchedule {
    pub id: String,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub p: Vec<f64>,
    /// Segment outputs, `segments[t][k]`.
    pub segments: Vec<Vec<f64>>,
}

/// Solver output in a form that can be stored and replayed against the
/// compiled model. Non-finite bounds are written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDocument {
    pub instance: String,
    pub status: MipStatus,
    pub objective: Option<f64>,
    pub best_bound: Option<f64>,
    pub rel_gap: Option<f64>,
    pub nodes_explored: usize,
    pub compile_seconds: f64,
    pub solve_seconds: f64,
    /// Empty when there is no incumbent.
    pub generators: Vec<GeneratorSchedule>,
    /// Voltage angles of non-reference buses, by bus id.
    pub angles: IndexMap<String, Vec<f64>>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl SolutionDocument {
    pub fn new(inst: &UcInstance, model: &CompactModel, result: &MipResult, compile_seconds: f64) -> Self {
        let mut doc = SolutionDocument {
            instance: inst.name.clone(),
            status: result.status,
            objective: finite(result.objective),
            best_bound: finite(result.best_bound),
            rel_gap: finite(result.rel_gap_achieved),
            nodes_explored: result.nodes_explored,
            compile_seconds,
            solve_seconds: result.solve_seconds,
            generators: Vec::new(),
            angles: IndexMap::new(),
        };
        if result.z.len() != model.z_len() || result.y.len() != model.y_len() {
            return doc;
        }
        let index = &model.index;
        let nz = model.z_len();
        let value = |var: Var| {
            let c = index.col(var).expect("variable exists");
            if c < nz {
                result.z[c]
            } else {
                result.y[c - nz]
            }
        };
        let horizon = inst.horizon;
        for (gen, g) in inst.generators.iter().enumerate() {
            let series = |f: &dyn Fn(usize) -> Var| (0..horizon).map(|t| value(f(t))).collect();
            doc.generators.push(GeneratorSchedule {
                id: g.id.clone(),
                u: series(&|t| Var::On { gen, t }),
                v: series(&|t| Var::Startup { gen, t }),
                w: series(&|t| Var::Shutdown { gen, t }),
                p: series(&|t| Var::Power { gen, t }),
                segments: (0..horizon)
                    .map(|t| {
                        (0..index.segments_of(gen))
                            .map(|k| value(Var::Segment { gen, t, k }))
                            .collect()
                    })
                    .collect(),
            });
        }
        for (bus, b) in inst.buses.iter().enumerate() {
            if index.col(Var::Angle { bus, t: 0 }).is_some() {
                let theta = (0..horizon).map(|t| value(Var::Angle { bus, t })).collect();
                doc.angles.insert(b.id.clone(), theta);
            }
        }
        doc
    }

    pub fn has_schedule(&self) -> bool {
        !self.generators.is_empty()
    }

    /// Rebuilds `(z, y)` in the model's column order.
    pub fn to_vectors(&self, inst: &UcInstance, model: &CompactModel) -> Result<(Vec<f64>, Vec<f64>), FormatError> {
        let bad = |m: String| FormatError::Solution(m);
        if !self.has_schedule() {
            return Err(bad("document has no schedule".into()));
        }
        if self.generators.len() != inst.generators.len() {
            return Err(bad(format!(
                "{} generator schedules for {} generators",
                self.generators.len(),
                inst.generators.len()
            )));
        }
        let horizon = inst.horizon;
        let nz = model.z_len();
        let mut x = vec![0.0; nz + model.y_len()];
        let index = &model.index;
        for (gen, (g, s)) in inst.generators.iter().zip(&self.generators).enumerate() {
            if s.id != g.id {
                return Err(bad(format!("schedule {gen} is for {:?}, expected {:?}", s.id, g.id)));
            }
            let k = index.segments_of(gen);
            let shaped = [&s.u, &s.v, &s.w, &s.p].iter().all(|a| a.len() == horizon)
                && s.segments.len() == horizon
                && s.segments.iter().all(|r| r.len() == k);
            if !shaped {
                return Err(bad(format!("schedule for {:?} has the wrong shape", g.id)));
            }
            for t in 0..horizon {
                x[index.col(Var::On { gen, t }).unwrap()] = s.u[t];
                x[index.col(Var::Startup { gen, t }).unwrap()] = s.v[t];
                x[index.col(Var::Shutdown { gen, t }).unwrap()] = s.w[t];
                x[index.col(Var::Power { gen, t }).unwrap()] = s.p[t];
                for (k, &val) in s.segments[t].iter().enumerate() {
                    x[index.col(Var::Segment { gen, t, k }).unwrap()] = val;
                }
            }
        }
        for (bus, b) in inst.buses.iter().enumerate() {
            if index.col(Var::Angle { bus, t: 0 }).is_none() {
                continue;
            }
            let theta = self
                .angles
                .get(&b.id)
                .filter(|a| a.len() == horizon)
                .ok_or_else(|| bad(format!("missing angles for bus {:?}", b.id)))?;
            for (t, &val) in theta.iter().enumerate() {
                x[index.col(Var::Angle { bus, t }).unwrap()] = val;
            }
        }
        let y = x.split_off(nz);
        Ok((x, y))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TrialRow {
    env: String,
    trial: usize,
    compile_seconds: f64,
    solve_seconds: f64,
    objective: Option<f64>,
    rel_gap: Option<f64>,
    nodes: Option<usize>,
    timestamp: DateTime<Utc>,
}

/// Header `env,trial,compile_seconds,solve_seconds,objective,rel_gap,nodes,timestamp`.
/// Failed trials leave `objective` and `rel_gap` empty.
pub fn write_trials_csv(records: &[TrialRecord]) -> Result<String, FormatError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(TrialRow {
            env: r.env.clone(),
            trial: r.trial,
            compile_seconds: r.compile_seconds,
            solve_seconds: r.solve_seconds,
            objective: r.objective,
            rel_gap: r.rel_gap,
            nodes: r.nodes,
            timestamp: r.timestamp,
        })?;
    }
    if records.is_empty() {
        w.write_record(["env", "trial", "compile_seconds", "solve_seconds", "objective", "rel_gap", "nodes", "timestamp"])?;
    }
    let bytes = w.into_inner().map_err(|e| FormatError::Solution(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

pub fn read_trials_csv(text: &str) -> Result<Vec<TrialRecord>, FormatError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: TrialRow = row?;
        out.push(TrialRecord {
            error: row.objective.is_none().then(|| "failed trial".to_string()),
            env: row.env,
            trial: row.trial,
            compile_seconds: row.compile_seconds,
            solve_seconds: row.solve_seconds,
            objective: row.objective,
            rel_gap: row.rel_gap,
            nodes: row.nodes,
            timestamp: row.timestamp,
            stub: false,
        });
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct ReportCsvRow<'a> {
    env: &'a str,
    cpu: Option<u32>,
    ram_gb: Option<f64>,
    trials: usize,
    mean_s: f64,
    sd_s: f64,
    percent_gain: f64,
}

/// Header `env,cpu,ram_gb,trials,mean_s,sd_s,percent_gain`, rows in report
/// order.
pub fn write_report_csv(report: &ComparisonReport) -> Result<String, FormatError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &report.rows {
        w.serialize(ReportCsvRow {
            env: &r.env,
            cpu: r.cpu_count,
            ram_gb: r.ram_gb,
            trials: r.trials,
            mean_s: r.mean_seconds,
            sd_s: r.sd_seconds,
            percent_gain: r.percent_gain,
        })?;
    }
    let bytes = w.into_inner().map_err(|e| FormatError::Solution(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

/// Two columns, `env` and `percent_gain`, one bar per environment.
pub fn write_plot_data(report: &ComparisonReport) -> String {
    let mut s = String::from("env\tpercent_gain\n");
    for r in &report.rows {
        let _ = writeln!(s, "{}\t{}", r.env, r.percent_gain);
    }
    s
}

/// Metadata stored next to a trial CSV (`<csv>.env.json`): the declared
/// environment and the run settings that the CSV columns do not carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSidecar {
    pub environment: EnvironmentProfile,
    pub instance: String,
    pub options: SolverOptions,
    pub trials: usize,
    pub failed_trials: usize,
    pub stub: bool,
}

pub fn sidecar_path(csv_path: &std::path::Path) -> std::path::PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".env.json");
    s.into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile;
    use crate::instance::parse_instance;
    use crate::instance::tests::one_gen_doc;
    use crate::mip::solve_mip;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn markers_wrap_binaries() {
        let mut inst = parse_instance(&one_gen_doc()).unwrap();
        inst.horizon = 1;
        inst.demand = vec![vec![50.0]];
        let m = compile(&inst).unwrap();
        let text = export_mps(&m);
        let body: Vec<&str> = text.lines().collect();
        let start = body.iter().position(|l| l.contains("'INTORG'")).unwrap();
        let end = body.iter().position(|l| l.contains("'INTEND'")).unwrap();
        let cols: std::collections::BTreeSet<&str> = body[start + 1..end]
            .iter()
            .map(|l| l.split_whitespace().next().unwrap())
            .collect();
        assert_eq!(cols.len(), 3);
        assert_eq!(body.iter().filter(|l| l.contains("'MARKER'")).count(), 2);
    }

    #[test]
    fn one_e_row_per_balance() {
        let m = compile(&parse_instance(&one_gen_doc()).unwrap()).unwrap();
        let text = export_mps(&m);
        let e_balance = text
            .lines()
            .filter(|l| l.starts_with(" E  balance_"))
            .count();
        assert_eq!(e_balance, 2);
    }

    #[test]
    fn round_trip_preserves_problem() {
        let m = compile(&parse_instance(&one_gen_doc()).unwrap()).unwrap();
        let original = m.lp_relaxation();
        let back = import_mps(&export_mps(&m)).unwrap().problem;
        assert_eq!(back, original);
        let a = solve_mip(&m, &SolverOptions::default()).unwrap();
        let b = crate::mip::solve_problem(&back, &SolverOptions::default(), Default::default()).unwrap();
        assert!((a.objective - b.objective).abs() <= 1e-9);
    }

    #[test]
    fn hand_written_mps() {
        // min x + 2y  s.t. x + y ≥ 3, x ≤ 2
        let text = "NAME tiny\nROWS\n N obj\n G c1\nCOLUMNS\n x obj 1 c1 1\n y obj 2 c1 1\nRHS\n rhs c1 3\nBOUNDS\n UP bnd x 2\nENDATA\n";
        let m = import_mps(text).unwrap();
        let sol = crate::lp::solve_lp(&m.problem).unwrap();
        assert!((sol.objective - 4.0).abs() < 1e-12);
        assert_eq!(m.name, "tiny");
    }

    #[test]
    fn ranges_round_trip() {
        let p = LpProblem::new(
            vec![1.0, -1.0],
            vec![(-INF, INF), (-3.0, 7.5)],
            vec![(1.0, 4.0), (-INF, INF), (2.0, INF)],
            &[(0, 0, 1.0), (0, 1, 0.1), (1, 0, 3.0), (2, 1, 1.0)],
        )
        .unwrap();
        let back = import_mps(&write_mps(&p, "r")).unwrap().problem;
        assert_eq!(back, p);
    }

    #[test]
    fn parse_errors_cite_lines() {
        let e = import_mps("NAME x\nROWS\n N obj\nBOGUS\nENDATA\n").unwrap_err();
        assert_eq!(e.line, 4);
        let e = import_mps("NAME x\nROWS\n N obj\nCOLUMNS\n x obj abc\nENDATA\n").unwrap_err();
        assert_eq!(e.line, 5);
        let e = import_mps("NAME x\nROWS\n N obj\nCOLUMNS\n x nope 1\nENDATA\n").unwrap_err();
        assert!(e.msg.contains("nope"));
    }

    #[test]
    fn solution_document_round_trip() {
        let inst = parse_instance(&one_gen_doc()).unwrap();
        let m = compile(&inst).unwrap();
        let r = solve_mip(&m, &SolverOptions::default()).unwrap();
        let doc = SolutionDocument::new(&inst, &m, &r, 0.01);
        let back = SolutionDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        let (z, y) = back.to_vectors(&inst, &m).unwrap();
        assert_eq!((z, y), (r.z, r.y));
    }
}
