use scuc_core::formats::{export_mps, import_mps};
use scuc_core::mip::{solve_problem, SolveControl};
use scuc_core::{compile, solve_mip, synth_instance, MipStatus, SolverOptions};

#[test]
fn random_models_survive_export_and_import() {
    for seed in 0..20u64 {
        let gens = 1 + (seed as usize % 4);
        let buses = 1 + (seed as usize % 3);
        let lines = if buses == 1 { 0 } else { buses };
        let horizon = 2 + (seed as usize % 3);
        let inst = synth_instance(gens, buses, lines, horizon, seed).unwrap();
        let model = compile(&inst).unwrap();
        let original = model.lp_relaxation();
        let imported = import_mps(&export_mps(&model)).unwrap().problem;

        assert_eq!(imported.matrix.nnz(), original.matrix.nnz(), "seed {seed}");
        assert_eq!(imported.matrix, original.matrix);
        assert_eq!(imported.row_bounds, original.row_bounds);
        assert_eq!(imported.col_bounds, original.col_bounds);
        assert_eq!(imported.objective, original.objective);
        assert_eq!(imported.integrality, original.integrality);
        for i in 0..original.n_rows() {
            assert_eq!(imported.row_sense(i), original.row_sense(i));
        }

        let opts = SolverOptions::default();
        let a = solve_mip(&model, &opts).unwrap();
        let b = solve_problem(&imported, &opts, SolveControl::default()).unwrap();
        assert_eq!(a.status, b.status, "seed {seed}");
        if a.status == MipStatus::OptimalWithinGap {
            assert!((a.objective - b.objective).abs() <= 1e-9, "seed {seed}");
        }
    }
}

#[test]
fn export_is_deterministic() {
    let model = compile(&synth_instance(3, 3, 3, 4, 7).unwrap()).unwrap();
    assert_eq!(export_mps(&model), export_mps(&model));
}
