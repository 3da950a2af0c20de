//! Convergence-study plumbing: time-step adequacy and artifact output.

use bfd_heat::experiments::{
    emit_artifacts, run_experiment, run_single, Case, ExperimentSpec, StepRule,
};
use bfd_heat::C_OPTIMAL;

/// Halving the default step changes the reported error by under 5%.
fn check_default_step(case: Case, n: usize) {
    let mut spec = ExperimentSpec::defaults(case);
    spec.refine_dt = false;
    for c in [0.0, C_OPTIMAL] {
        let base = run_single(&spec, c, n).unwrap();
        let mut halved = spec.clone();
        halved.step = StepRule::Fixed(base.dt / 2.0);
        let fine = run_single(&halved, c, n).unwrap();
        let change = (base.err_l2 - fine.err_l2).abs() / fine.err_l2;
        assert!(change < 0.05, "{case} c = {c} N = {n}: change {change:.3}");
    }
}

#[test]
fn default_step_periodic_1d() {
    // The GL6 default refines until settled; check the settled step.
    let spec = ExperimentSpec::defaults(Case::Periodic1D);
    for c in [0.0, C_OPTIMAL] {
        let r = run_single(&spec, c, 32).unwrap();
        assert!(r.dt_converged);
        let mut halved = spec.clone();
        halved.refine_dt = false;
        halved.step = StepRule::Fixed(r.dt / 2.0);
        let fine = run_single(&halved, c, 32).unwrap();
        assert!((r.err_l2 - fine.err_l2).abs() / fine.err_l2 < 0.05);
    }
}

#[test]
fn default_step_dirichlet_1d() {
    check_default_step(Case::Dirichlet1D, 36);
}

#[test]
fn default_step_periodic_2d() {
    let mut spec = ExperimentSpec::defaults(Case::Periodic2D);
    spec.t_final = 0.25;
    spec.refine_dt = false;
    let base = run_single(&spec, C_OPTIMAL, 12).unwrap();
    let mut halved = spec.clone();
    halved.step = StepRule::Fixed(base.dt / 2.0);
    let fine = run_single(&halved, C_OPTIMAL, 12).unwrap();
    assert!((base.err_l2 - fine.err_l2).abs() / fine.err_l2 < 0.05);
}

#[test]
fn default_step_dirichlet_2d() {
    check_default_step(Case::Dirichlet2D, 12);
}

#[test]
fn artifacts_are_reproducible() {
    let mut spec = ExperimentSpec::defaults(Case::Dirichlet1D);
    spec.n_list = vec![8, 12, 16];
    spec.c_list = vec![0.0, -0.25];
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for sub in ["a", "b"] {
        let tables = run_experiment(&spec).unwrap();
        assert_eq!(tables.len(), 2);
        assert!(tables.iter().all(|t| t.rows.len() == 3 && t.monotone()));
        let files = emit_artifacts(&tables, &dir.path().join(sub)).unwrap();
        let names: Vec<_> = files
            .iter()
            .map(|f| f.file_name().unwrap().to_owned())
            .collect();
        assert_eq!(names, ["dirichlet_1d.csv", "dirichlet_1d.svg"]);
        texts.push(
            files
                .iter()
                .map(|f| std::fs::read_to_string(f).unwrap())
                .collect::<Vec<_>>(),
        );
    }
    assert_eq!(texts[0], texts[1]);
}
