//! Seeded synthetic instances: a random spanning tree plus chords for the
//! network, generators with convex 4-segment costs, and a daily load shape.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{
    Bus, CostSegment, Generator, InstanceError, Line, UcInstance, DEFAULT_SEGMENTS,
};

/// Horizon used when the caller has no preference.
pub const DEFAULT_HORIZON: usize = 24;

/// Upper bound on total demand as a share of installed capacity.
pub const MAX_LOAD_FACTOR: f64 = 0.8;

fn round_to(x: f64, step: f64) -> f64 {
    (x / step).round() * step
}

/// Builds a valid connected instance, deterministic in `seed`.
///
/// Total demand in every period stays below `MAX_LOAD_FACTOR · Σ p_max`.
pub fn synth_instance(
    generators: usize,
    buses: usize,
    lines: usize,
    horizon: usize,
    seed: u64,
) -> Result<UcInstance, InstanceError> {
    if generators == 0 || buses == 0 || horizon == 0 {
        return Err(InstanceError::Argument(
            "generators, buses and horizon must all be at least 1".into(),
        ));
    }
    if lines + 1 < buses {
        return Err(InstanceError::Argument(format!(
            "{lines} lines cannot connect {buses} buses (need at least {})",
            buses - 1
        )));
    }
    if buses == 1 && lines > 0 {
        return Err(InstanceError::Argument(
            "a single-bus network cannot carry lines".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let bus_list: Vec<Bus> = (0..buses)
        .map(|i| Bus {
            id: format!("b{}", i + 1),
            is_reference: i == 0,
        })
        .collect();

    let mut endpoints = Vec::with_capacity(lines);
    for i in 1..buses {
        endpoints.push((rng.gen_range(0..i), i));
    }
    while endpoints.len() < lines {
        let a = rng.gen_range(0..buses);
        let b = rng.gen_range(0..buses);
        if a != b {
            endpoints.push((a.min(b), a.max(b)));
        }
    }

    let mut gens = Vec::with_capacity(generators);
    for i in 0..generators {
        let bus = if i < buses { i } else { rng.gen_range(0..buses) };
        let p_max = round_to(rng.gen_range(50.0..400.0), 0.1);
        let p_min = round_to(p_max * rng.gen_range(0.15..0.4), 0.1);
        let ramp = round_to(p_max * rng.gen_range(0.5..1.0), 0.1);
        let base_cost = round_to(rng.gen_range(10.0..40.0), 0.01);
        let step = rng.gen_range(0.05..0.25);
        let width = (p_max - p_min) / DEFAULT_SEGMENTS as f64;
        let segments = (0..DEFAULT_SEGMENTS)
            .map(|k| CostSegment {
                width,
                marginal_cost: round_to(base_cost * (1.0 + step * k as f64), 0.01),
            })
            .collect();
        let min_up = rng.gen_range(1..=4u32);
        let min_down = rng.gen_range(1..=4u32);
        let init_on = rng.gen_bool(0.6);
        let (init_power, init_periods_in_state) = if init_on {
            let p = round_to(p_min + rng.gen_range(0.0..0.5) * (p_max - p_min), 0.1);
            (p.clamp(p_min, p_max), rng.gen_range(1..=8u32))
        } else {
            (0.0, rng.gen_range(min_down..=8u32.max(min_down)))
        };
        let startup_cost = round_to(p_max * rng.gen_range(2.0..20.0), 1.0);
        gens.push(Generator {
            id: format!("g{}", i + 1),
            bus: bus_list[bus].id.clone(),
            p_min,
            p_max,
            ramp_up: ramp,
            ramp_down: ramp,
            startup_ramp: ramp.max(p_min),
            shutdown_ramp: ramp.max(p_min),
            min_up,
            min_down,
            no_load_cost: round_to(p_min * base_cost * rng.gen_range(0.8..1.2), 0.01),
            startup_cost,
            shutdown_cost: round_to(startup_cost * rng.gen_range(0.0..0.2), 1.0),
            segments,
            init_on,
            init_power,
            init_periods_in_state,
        });
    }

    let capacity: f64 = gens.iter().map(|g| g.p_max).sum();
    let mut weights: Vec<f64> = (0..buses)
        .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.1..1.0) })
        .collect();
    if weights.iter().all(|w| *w == 0.0) {
        weights[0] = 1.0;
    }
    let weight_sum: f64 = weights.iter().sum();
    let period_hours = 1.0;
    let totals: Vec<f64> = (0..horizon)
        .map(|t| {
            let hour = t as f64 * period_hours;
            let shape = 0.5 - 0.5 * (2.0 * PI * hour / 24.0).cos();
            capacity * (0.35 + 0.4 * shape)
        })
        .collect();
    let demand: Vec<Vec<f64>> = weights
        .iter()
        .map(|w| totals.iter().map(|d| round_to(d * w / weight_sum, 0.001)).collect())
        .collect();

    let peak = totals.iter().cloned().fold(0.0, f64::max);
    let line_list = endpoints
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| Line {
            id: format!("l{}", i + 1),
            from_bus: bus_list[a].id.clone(),
            to_bus: bus_list[b].id.clone(),
            susceptance: round_to(rng.gen_range(5.0..50.0), 0.01),
            flow_limit: round_to(peak * rng.gen_range(0.5..1.0), 0.1).max(1.0),
        })
        .collect();

    Ok(UcInstance {
        name: format!("synth-g{generators}-b{buses}-l{lines}-t{horizon}-s{seed}"),
        horizon,
        period_hours,
        buses: bus_list,
        lines: line_list,
        generators: gens,
        demand,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{serialize_instance, validate_instance};

    #[test]
    fn large_instance_dimensions() {
        let inst = synth_instance(210, 1908, 2522, 24, 1).unwrap();
        assert_eq!(inst.generators.len(), 210);
        assert_eq!(inst.buses.len(), 1908);
        assert_eq!(inst.lines.len(), 2522);
        assert!(validate_instance(&inst).is_empty());
    }

    #[test]
    fn minimal_instance() {
        let inst = synth_instance(1, 1, 0, 1, 0).unwrap();
        assert!(validate_instance(&inst).is_empty());
        assert_eq!(inst.horizon, 1);
    }

    #[test]
    fn deterministic_in_seed() {
        let a = serialize_instance(&synth_instance(5, 8, 10, 6, 42).unwrap());
        let b = serialize_instance(&synth_instance(5, 8, 10, 6, 42).unwrap());
        assert_eq!(a.as_bytes(), b.as_bytes());
        let c = serialize_instance(&synth_instance(5, 8, 10, 6, 43).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn too_few_lines_is_argument_error() {
        assert!(matches!(
            synth_instance(2, 5, 3, 4, 0),
            Err(InstanceError::Argument(_))
        ));
    }

    #[test]
    fn always_valid_and_load_bounded() {
        for seed in 0..100 {
            let g = 1 + (seed as usize % 7);
            let b = 1 + (seed as usize % 5);
            let l = if b == 1 { 0 } else { b - 1 + seed as usize % 3 };
            let inst = synth_instance(g, b, l, 1 + seed as usize % 24, seed).unwrap();
            assert!(validate_instance(&inst).is_empty(), "seed {seed}");
            let cap: f64 = inst.generators.iter().map(|g| g.p_max).sum();
            for t in 0..inst.horizon {
                assert!(inst.total_demand(t) <= MAX_LOAD_FACTOR * cap);
            }
        }
    }
}
