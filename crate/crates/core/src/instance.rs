//! Power-system instance types, validation and the canonical JSON document.
//!
//! Units are fixed: MW for power, hours for `period_hours`, $/MWh for segment
//! marginal costs and $ for commitment costs. Demand is nodal: one series of
//! `horizon` values per bus.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on `Σ width = p_max − p_min`.
pub const SEGMENT_SUM_TOL: f64 = 1e-6;

const UNREACHABLE: &str = "not reachable from the reference bus";

/// Number of cost segments used by the synthetic generator and the docs.
pub const DEFAULT_SEGMENTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSegment {
    /// MW.
    pub width: f64,
    /// $/MWh.
    pub marginal_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub id: String,
    pub bus: String,
    pub p_min: f64,
    pub p_max: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
    pub startup_ramp: f64,
    pub shutdown_ramp: f64,
    pub min_up: u32,
    pub min_down: u32,
    /// $ per period while committed. Includes the cost of running at `p_min`.
    pub no_load_cost: f64,
    pub startup_cost: f64,
    pub shutdown_cost: f64,
    pub segments: Vec<CostSegment>,
    pub init_on: bool,
    pub init_power: f64,
    pub init_periods_in_state: u32,
}

impl Generator {
    /// Convex piecewise-linear dispatch cost ($/h) above `p_min` at output `p`.
    /// Segments are filled in order; `p` is clamped into `[p_min, p_max]`.
    pub fn segment_cost_rate(&self, p: f64) -> f64 {
        let mut rest = (p - self.p_min).max(0.0);
        let mut cost = 0.0;
        for seg in &self.segments {
            let take = rest.min(seg.width);
            cost += take * seg.marginal_cost;
            rest -= take;
            if rest <= 0.0 {
                break;
            }
        }
        cost
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: String,
    pub is_reference: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    /// Flow (MW) per unit of angle difference.
    pub susceptance: f64,
    pub flow_limit: f64,
}

/// A unit-commitment instance. `demand[b][t]` is the MW load at bus `b`
/// (in `buses` order) in period `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct UcInstance {
    pub name: String,
    pub horizon: usize,
    pub period_hours: f64,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub generators: Vec<Generator>,
    pub demand: Vec<Vec<f64>>,
}

/// One violated invariant, located by a JSON-style field path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("validation failed: {}", join_violations(.0))]
    Validation(Vec<Violation>),
    #[error("disconnected network: buses not reachable from the reference bus: {}", .unreachable.join(", "))]
    DisconnectedNetwork { unreachable: Vec<String> },
    #[error("invalid argument: {0}")]
    Argument(String),
}

impl InstanceError {
    /// Violations carried by the error, for wire responses.
    pub fn violations(&self) -> Vec<Violation> {
        match self {
            InstanceError::Validation(v) => v.clone(),
            InstanceError::DisconnectedNetwork { unreachable } => vec![Violation::new(
                "lines",
                format!("buses not reachable from reference: {}", unreachable.join(", ")),
            )],
            InstanceError::Schema(m) => vec![Violation::new("$", m.clone())],
            InstanceError::Argument(m) => vec![Violation::new("$", m.clone())],
        }
    }
}

/// Wire form of [`UcInstance`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDocument {
    name: String,
    #[serde(rename = "horizon_T")]
    horizon: usize,
    period_hours: f64,
    buses: Vec<Bus>,
    lines: Vec<Line>,
    generators: Vec<Generator>,
    demand: IndexMap<String, Vec<f64>>,
}

/// Parses and validates a canonical instance document. Never repairs.
pub fn parse_instance(text: &str) -> Result<UcInstance, InstanceError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let doc: InstanceDocument = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            InstanceError::Schema(inner.to_string())
        } else {
            InstanceError::Schema(format!("{path}: {inner}"))
        }
    })?;
    de.end().map_err(|e| InstanceError::Schema(e.to_string()))?;
    let inst = from_document(doc)?;
    check(&inst)?;
    Ok(inst)
}

/// Serializes to the canonical document (pretty-printed, bus-ordered demand).
pub fn serialize_instance(inst: &UcInstance) -> String {
    let doc = InstanceDocument {
        name: inst.name.clone(),
        horizon: inst.horizon,
        period_hours: inst.period_hours,
        buses: inst.buses.clone(),
        lines: inst.lines.clone(),
        generators: inst.generators.clone(),
        demand: inst
            .buses
            .iter()
            .zip(&inst.demand)
            .map(|(b, row)| (b.id.clone(), row.clone()))
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("instance serializes");
    s.push('\n');
    s
}

fn from_document(doc: InstanceDocument) -> Result<UcInstance, InstanceError> {
    let mut violations = Vec::new();
    let bus_ids: HashSet<&str> = doc.buses.iter().map(|b| b.id.as_str()).collect();
    for key in doc.demand.keys() {
        if !bus_ids.contains(key.as_str()) {
            violations.push(Violation::new(format!("demand.{key}"), "unknown bus"));
        }
    }
    let mut demand = Vec::with_capacity(doc.buses.len());
    for bus in &doc.buses {
        match doc.demand.get(&bus.id) {
            Some(row) => demand.push(row.clone()),
            None => violations.push(Violation::new(
                format!("demand.{}", bus.id),
                "missing demand series for bus",
            )),
        }
    }
    if !violations.is_empty() {
        return Err(InstanceError::Validation(violations));
    }
    Ok(UcInstance {
        name: doc.name,
        horizon: doc.horizon,
        period_hours: doc.period_hours,
        buses: doc.buses,
        lines: doc.lines,
        generators: doc.generators,
        demand,
    })
}

/// Validates, splitting out connectivity failures as their own error kind.
pub fn check(inst: &UcInstance) -> Result<(), InstanceError> {
    let violations = validate_instance(inst);
    if violations.is_empty() {
        return Ok(());
    }
    if violations
        .iter()
        .all(|v| v.path == "lines" && v.message.ends_with(UNREACHABLE))
    {
        return Err(InstanceError::DisconnectedNetwork {
            unreachable: unreachable_buses(inst),
        });
    }
    Err(InstanceError::Validation(violations))
}

/// Lists every violated invariant; empty iff the instance is valid.
pub fn validate_instance(inst: &UcInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |path: String, msg: String| out.push(Violation::new(path, msg));

    if inst.horizon < 1 {
        push("horizon_T".into(), "must be at least 1".into());
    }
    if !(inst.period_hours.is_finite() && inst.period_hours > 0.0) {
        push("period_hours".into(), "must be finite and positive".into());
    }

    // buses
    if inst.buses.is_empty() {
        push("buses".into(), "at least one bus is required".into());
    }
    let mut seen = HashSet::new();
    for (i, b) in inst.buses.iter().enumerate() {
        if !seen.insert(b.id.as_str()) {
            push(format!("buses[{i}].id"), format!("duplicate bus id {:?}", b.id));
        }
    }
    let n_ref = inst.buses.iter().filter(|b| b.is_reference).count();
    if !inst.buses.is_empty() && n_ref != 1 {
        push(
            "buses".into(),
            format!("exactly one reference bus required, found {n_ref}"),
        );
    }

    // lines
    let mut line_ids = HashSet::new();
    let mut endpoints_ok = true;
    for (i, l) in inst.lines.iter().enumerate() {
        let p = format!("lines[{i}]");
        if !line_ids.insert(l.id.as_str()) {
            push(format!("{p}.id"), format!("duplicate line id {:?}", l.id));
        }
        if l.from_bus == l.to_bus {
            push(format!("{p}.to_bus"), "line endpoints must differ".into());
        }
        for (field, bus) in [("from_bus", &l.from_bus), ("to_bus", &l.to_bus)] {
            if !seen.contains(bus.as_str()) {
                endpoints_ok = false;
                push(format!("{p}.{field}"), format!("unknown bus {bus:?}"));
            }
        }
        if !(l.susceptance.is_finite() && l.susceptance > 0.0) {
            push(format!("{p}.susceptance"), "must be finite and positive".into());
        }
        if !(l.flow_limit.is_finite() && l.flow_limit > 0.0) {
            push(format!("{p}.flow_limit"), "must be finite and positive".into());
        }
    }

    // generators
    if inst.generators.is_empty() {
        push("generators".into(), "at least one generator is required".into());
    }
    let mut gen_ids = HashSet::new();
    for (i, g) in inst.generators.iter().enumerate() {
        let p = format!("generators[{i}]");
        if !gen_ids.insert(g.id.as_str()) {
            push(format!("{p}.id"), format!("duplicate generator id {:?}", g.id));
        }
        if !seen.contains(g.bus.as_str()) {
            push(format!("{p}.bus"), format!("unknown bus {:?}", g.bus));
        }
        let finite_fields = [
            ("p_min", g.p_min),
            ("p_max", g.p_max),
            ("ramp_up", g.ramp_up),
            ("ramp_down", g.ramp_down),
            ("startup_ramp", g.startup_ramp),
            ("shutdown_ramp", g.shutdown_ramp),
            ("no_load_cost", g.no_load_cost),
            ("startup_cost", g.startup_cost),
            ("shutdown_cost", g.shutdown_cost),
            ("init_power", g.init_power),
        ];
        for (name, v) in finite_fields {
            if !v.is_finite() {
                push(format!("{p}.{name}"), "must be finite".into());
            }
        }
        for (name, v) in [
            ("ramp_up", g.ramp_up),
            ("ramp_down", g.ramp_down),
            ("startup_ramp", g.startup_ramp),
            ("shutdown_ramp", g.shutdown_ramp),
        ] {
            if v < 0.0 {
                push(format!("{p}.{name}"), "must be nonnegative".into());
            }
        }
        if g.p_min < 0.0 {
            push(format!("{p}.p_min"), "must be nonnegative".into());
        }
        if g.p_min > g.p_max {
            push(format!("{p}.p_max"), "p_min exceeds p_max".into());
        }
        if g.min_up < 1 {
            push(format!("{p}.min_up"), "must be at least 1".into());
        }
        if g.min_down < 1 {
            push(format!("{p}.min_down"), "must be at least 1".into());
        }
        if g.init_periods_in_state < 1 {
            push(format!("{p}.init_periods_in_state"), "must be at least 1".into());
        }
        if g.segments.is_empty() {
            push(format!("{p}.segments"), "at least one segment is required".into());
        }
        for (k, s) in g.segments.iter().enumerate() {
            if !(s.width.is_finite() && s.width >= 0.0) {
                push(format!("{p}.segments[{k}].width"), "must be finite and nonnegative".into());
            }
            if !s.marginal_cost.is_finite() {
                push(format!("{p}.segments[{k}].marginal_cost"), "must be finite".into());
            }
        }
        let total: f64 = g.segments.iter().map(|s| s.width).sum();
        if !g.segments.is_empty() && (total - (g.p_max - g.p_min)).abs() > SEGMENT_SUM_TOL {
            push(
                format!("{p}.segments"),
                format!(
                    "generator {:?}: segment widths sum to {total}, expected p_max - p_min = {}",
                    g.id,
                    g.p_max - g.p_min
                ),
            );
        }
        if g.segments.windows(2).any(|w| w[1].marginal_cost < w[0].marginal_cost) {
            push(
                format!("{p}.segments"),
                format!("generator {:?}: marginal costs must be nondecreasing (convexity)", g.id),
            );
        }
        if g.init_on {
            if g.init_power < g.p_min || g.init_power > g.p_max {
                push(
                    format!("{p}.init_power"),
                    "initially committed unit must start within [p_min, p_max]".into(),
                );
            }
        } else if g.init_power != 0.0 {
            push(format!("{p}.init_power"), "initially offline unit must have zero output".into());
        }
    }

    // demand
    if inst.demand.len() != inst.buses.len() {
        push(
            "demand".into(),
            format!("expected {} bus rows, found {}", inst.buses.len(), inst.demand.len()),
        );
    }
    for (b, row) in inst.demand.iter().enumerate() {
        let id = inst.buses.get(b).map(|x| x.id.as_str()).unwrap_or("?");
        if row.len() != inst.horizon {
            push(
                format!("demand.{id}"),
                format!("expected {} periods, found {}", inst.horizon, row.len()),
            );
        }
        if let Some(t) = row.iter().position(|d| !(d.is_finite() && *d >= 0.0)) {
            push(format!("demand.{id}[{t}]"), "must be finite and nonnegative".into());
        }
    }

    if endpoints_ok && n_ref == 1 && inst.buses.len() > 1 {
        let unreachable = unreachable_buses(inst);
        if !unreachable.is_empty() {
            push(
                "lines".into(),
                format!("bus(es) {} {UNREACHABLE}", unreachable.join(", ")),
            );
        }
    }
    out
}

/// Buses not reachable from the reference bus via lines.
fn unreachable_buses(inst: &UcInstance) -> Vec<String> {
    let index: HashMap<&str, usize> = inst
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| (b.id.as_str(), i))
        .collect();
    let mut adj = vec![Vec::new(); inst.buses.len()];
    for l in &inst.lines {
        if let (Some(&a), Some(&b)) = (index.get(l.from_bus.as_str()), index.get(l.to_bus.as_str())) {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let Some(root) = inst.buses.iter().position(|b| b.is_reference) else {
        return Vec::new();
    };
    let mut seen = vec![false; inst.buses.len()];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(b) = queue.pop_front() {
        for &n in &adj[b] {
            if !seen[n] {
                seen[n] = true;
                queue.push_back(n);
            }
        }
    }
    inst.buses
        .iter()
        .zip(seen)
        .filter(|(_, s)| !s)
        .map(|(b, _)| b.id.clone())
        .collect()
}

impl UcInstance {
    pub fn bus_index(&self, id: &str) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn reference_bus(&self) -> Option<usize> {
        self.buses.iter().position(|b| b.is_reference)
    }

    /// System-wide demand in period `t`.
    pub fn total_demand(&self, t: usize) -> f64 {
        self.demand.iter().map(|row| row[t]).sum()
    }

    /// Number of cost segments of the widest generator.
    pub fn max_segments(&self) -> usize {
        self.generators.iter().map(|g| g.segments.len()).max().unwrap_or(0)
    }
}
