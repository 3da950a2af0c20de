//! Certification checks on the closed-form reference energy matrices and
//! the parameter choices that go with them.

use bfd_heat::dg::rational::to_f64;
use bfd_heat::dg::{certify_2d, certify_matrix, q, Certifier, FormLocation, FreeParams, ZERO_TOL};
use bfd_heat::dg::{
    reference_congruence_diagonal, reference_theta_half, reference_theta_three_halves,
};
use nalgebra::{DMatrix, SymmetricEigen};

fn c_samples() -> Vec<f64> {
    (-9..=9).map(|k| k as f64 / 10.0).collect()
}

fn eig(m: DMatrix<f64>) -> Vec<f64> {
    SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
}

#[test]
fn reference_second_interface_form_is_nsd_with_constant_null_vector() {
    for c in c_samples() {
        let m = reference_theta_three_halves(c);
        for i in 0..4 {
            assert!(m.row(i).sum().abs() < 1e-13, "c = {c}");
        }
        let ev = eig(DMatrix::from_iterator(4, 4, m.iter().copied()));
        assert!(ev.iter().all(|&l| l <= 1e-12), "c = {c}: {ev:?}");
        assert_eq!(ev.iter().filter(|l| l.abs() <= 1e-12).count(), 1, "c = {c}");
    }
}

#[test]
fn reference_congruence_diagonal_is_negative_on_the_unit_interval() {
    for c in c_samples() {
        for d in reference_congruence_diagonal(c) {
            assert!(d < 0.0, "c = {c}: {d}");
        }
    }
}

#[test]
fn reference_boundary_choice_is_indefinite_in_closed_form() {
    for c in [q(-1, 2), q(0, 1), q(1, 2)] {
        let p = FreeParams::reference_boundary(&c);
        let [c2, c3, e2, e3] = p.0.map(|v| to_f64(&v));
        let m = reference_theta_half(to_f64(&c), c2, c3, e2, e3);
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        assert!(det < 0.0, "c = {c}: det {det}");
    }
}

#[test]
fn certified_choice_passes_and_reference_boundary_fails() {
    let cert = Certifier::new().unwrap();
    for c in [q(-97, 100), q(-4, 13), q(0, 1), q(1, 2), q(97, 100)] {
        let ok = cert.report(&c).unwrap();
        assert!(ok.passes(), "c = {c}");
        assert!(ok.interior.singular() && ok.truncated.negative_definite());
        assert!(certify_2d(&ok, 4).unwrap().pass, "c = {c}");
        let bad = cert
            .report_with(
                &c,
                &FreeParams::certified_interior(&c),
                &FreeParams::reference_boundary(&c),
            )
            .unwrap();
        assert!(!bad.theta_half.non_positive, "c = {c}");
        assert!(!bad.passes());
    }
}

#[test]
fn certification_agrees_with_exact_inertia_near_zero_threshold() {
    let eps = 0.5 * ZERO_TOL;
    let m = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, eps]);
    let v = certify_matrix(FormLocation::Interior, m).unwrap();
    assert!(v.non_positive, "values below the threshold count as zero");
    assert_eq!(v.inertia, (1, 1, 0));
    let m = DMatrix::from_row_slice(2, 2, &[-2.0, 1.0, 1.0, -2.0]);
    let v = certify_matrix(FormLocation::Interior, m).unwrap();
    assert!(v.negative_definite());
}
