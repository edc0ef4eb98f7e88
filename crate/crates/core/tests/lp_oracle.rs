mod support;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scuc_core::lp::{solve_lp, LpStatus};
use support::{random_dense_lp, vertex_oracle};

#[test]
fn random_small_lps_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut optimal = 0;
    for case in 0..300 {
        let lp = random_dense_lp(&mut rng);
        let expected = vertex_oracle(&lp);
        let p = lp.to_problem();
        let sol = solve_lp(&p).unwrap();
        match expected {
            Some(v) => {
                assert_eq!(sol.status, LpStatus::Optimal, "case {case}: {lp:?}");
                assert!((sol.objective - v).abs() <= 1e-6 * (1.0 + v.abs()), "case {case}: {} vs {v}", sol.objective);
                let gap = (sol.objective - sol.dual_objective).abs();
                assert!(gap <= 1e-6 * (1.0 + sol.objective.abs()), "case {case}: duality gap {gap}");
                assert!(p.primal_residual(&sol.x) <= 1e-7);
                optimal += 1;
            }
            None => {
                assert_eq!(sol.status, LpStatus::Infeasible, "case {case}: {lp:?}");
                let ray = sol.farkas.as_ref().unwrap();
                assert!(p.farkas_value(ray) <= -1e-7, "case {case}: weak certificate");
            }
        }
    }
    assert!(optimal > 100, "too few feasible cases: {optimal}");
}
