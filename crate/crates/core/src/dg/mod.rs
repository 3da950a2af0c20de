//! Discontinuous Galerkin reading of the block scheme and its energy
//! stability certificate.
//!
//! The scheme is rewritten as a DG weak form with sixteen flux and penalty
//! coefficients ([`weak_form`]). Four of them stay free; the energy rate then
//! splits into interface quadratic forms ([`theta`]) whose sign is
//! certified here, both with floating-point eigenvalues and with exact
//! congruence inertia.

pub mod rational;
pub mod theta;
pub mod weak_form;

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::Signed;

use crate::error::{BfdError, Result};
use crate::grid::BlockGrid2D;
use crate::operator::{spectral_abscissa, BlockOperator, BoundaryCondition, SchemeParams};

pub use rational::{q, Rational};
pub use theta::{
    boundary_theta_half, build_interior_theta, reference_congruence_diagonal,
    reference_interior_theta, reference_theta_half, reference_theta_three_halves,
    second_interface_theta, FormLocation, InterfaceForm,
};
pub use weak_form::{
    blocks_to_f64, boundary_target, dg_diffusion_target, interior_target, reconstruct_blocks,
    solve_penalty_coefficients, solve_penalty_family, FreeParams, PenaltyCoefficients,
    PenaltyFamily, COEFF_NAMES,
};

/// Relative zero threshold for eigenvalues and determinants.
pub const ZERO_TOL: f64 = 1e-10;

/// Sign analysis of one quadratic form.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub location: FormLocation,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `(n_neg, n_zero, n_pos)` from the eigenvalues with threshold
    /// `ZERO_TOL * ||M||_inf`.
    pub inertia: (usize, usize, usize),
    /// The same counts from an exact congruence, when the form is exact.
    pub exact_inertia: Option<(usize, usize, usize)>,
    /// `|det M| / ||M||_inf^n`.
    pub scaled_det: f64,
    pub non_positive: bool,
}

impl StabilityVerdict {
    pub fn negative_definite(&self) -> bool {
        self.inertia.0 == self.eigenvalues.len()
    }

    pub fn singular(&self) -> bool {
        self.scaled_det <= ZERO_TOL
    }

    pub fn min_eig(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eig(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Whether the floating-point and exact inertia agree.
    pub fn consistent(&self) -> bool {
        self.exact_inertia.is_none_or(|e| e == self.inertia)
    }
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Certifies a floating-point symmetric matrix.
pub fn certify_matrix(location: FormLocation, m: DMatrix<f64>) -> Result<StabilityVerdict> {
    let n = m.nrows();
    let norm = inf_norm(&m);
    let asym = (&m - m.transpose()).amax();
    if asym > 1e-12 * norm.max(1.0) {
        return Err(BfdError::Asymmetric(asym));
    }
    let det = m.determinant();
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let tol = ZERO_TOL * norm;
    let neg = eigenvalues.iter().filter(|&&l| l < -tol).count();
    let pos = eigenvalues.iter().filter(|&&l| l > tol).count();
    let inertia = (neg, n - neg - pos, pos);
    let scaled_det = if norm == 0.0 {
        0.0
    } else {
        det.abs() / norm.powi(n as i32)
    };
    Ok(StabilityVerdict {
        location,
        eigenvalues,
        inertia,
        exact_inertia: None,
        scaled_det,
        non_positive: pos == 0,
    })
}

/// Certifies an exact form: eigenvalues in floating point, inertia also by
/// exact congruence, and the determinant exactly.
pub fn certify(form: &InterfaceForm) -> Result<StabilityVerdict> {
    let mut v = certify_matrix(form.location, form.to_f64())?;
    v.exact_inertia = Some(rational::inertia(&form.m)?);
    let det = rational::determinant(&form.m);
    if det.is_zero() {
        v.scaled_det = 0.0;
    }
    Ok(v)
}

use num_traits::Zero;

/// Coefficient families and free-parameter choices for a certification.
#[derive(Debug, Clone)]
pub struct Certifier {
    interior: PenaltyFamily,
    boundary: PenaltyFamily,
}

/// All forms at one value of `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub c: Rational,
    pub interior: StabilityVerdict,
    pub truncated: StabilityVerdict,
    pub theta_half: StabilityVerdict,
    pub theta_three_halves: StabilityVerdict,
}

impl StabilityReport {
    pub fn c_f64(&self) -> f64 {
        rational::to_f64(&self.c)
    }

    /// Verdict per form with the requirement it is held to.
    pub fn entries(&self) -> [(&StabilityVerdict, bool); 4] {
        let i = &self.interior;
        let t = &self.truncated;
        [
            (i, i.singular() && i.non_positive && i.consistent()),
            (t, t.negative_definite() && t.consistent()),
            (
                &self.theta_half,
                self.theta_half.non_positive && self.theta_half.consistent(),
            ),
            (
                &self.theta_three_halves,
                self.theta_three_halves.non_positive && self.theta_three_halves.consistent(),
            ),
        ]
    }

    pub fn passes(&self) -> bool {
        self.entries().iter().all(|(_, ok)| *ok)
    }
}

impl Certifier {
    pub fn new() -> Result<Self> {
        Ok(Self {
            interior: solve_penalty_family(interior_target)?,
            boundary: solve_penalty_family(boundary_target)?,
        })
    }

    pub fn interior_family(&self) -> &PenaltyFamily {
        &self.interior
    }

    pub fn boundary_family(&self) -> &PenaltyFamily {
        &self.boundary
    }

    /// Builds and certifies every form for the given free parameters.
    pub fn report_with(
        &self,
        c: &Rational,
        interior: &FreeParams,
        boundary: &FreeParams,
    ) -> Result<StabilityReport> {
        let ki = self.interior.evaluate(c, interior);
        let kb = self.boundary.evaluate(c, boundary);
        let m = build_interior_theta(&ki);
        Ok(StabilityReport {
            c: c.clone(),
            truncated: certify(&m.truncated())?,
            interior: certify(&m)?,
            theta_half: certify(&boundary_theta_half(&kb))?,
            theta_three_halves: certify(&second_interface_theta(&kb, &ki))?,
        })
    }

    /// Report with the certified parameter choices.
    pub fn report(&self, c: &Rational) -> Result<StabilityReport> {
        self.report_with(
            c,
            &FreeParams::certified_interior(c),
            &FreeParams::certified_boundary(c),
        )
    }

    /// Reports on `n` equispaced rational points of `[lo, hi]`.
    pub fn scan(&self, lo: &Rational, hi: &Rational, n: usize) -> Result<Vec<StabilityReport>> {
        if n < 2 {
            return Err(BfdError::InvalidArgument(
                "a c-grid needs at least two points".into(),
            ));
        }
        let step = (hi - lo) / q(n as i64 - 1, 1);
        (0..n)
            .map(|k| self.report(&(lo + &step * q(k as i64, 1))))
            .collect()
    }
}

/// Default c-grid endpoints.
pub fn default_c_range() -> (Rational, Rational) {
    (q(-97, 100), q(97, 100))
}

/// Outcome of the two-dimensional argument at one `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict2D {
    pub c: f64,
    pub one_d_pass: bool,
    /// Largest real part of the assembled periodic operator on an
    /// `n x n` block grid over `[0, 2pi]^2`.
    pub max_re: f64,
    pub pass: bool,
}

/// The 2D energy is a sum of 1D line energies, so the 1D certificate
/// carries over; the assembled periodic operator is checked as well.
pub fn certify_2d(report: &StabilityReport, n: usize) -> Result<Verdict2D> {
    if n > 8 {
        return Err(BfdError::InvalidArgument(format!(
            "2D spectral check limited to n <= 8, got {n}"
        )));
    }
    let c = report.c_f64();
    let grid = BlockGrid2D::square(n, 0.0, 2.0 * PI)?;
    let op = BlockOperator::two_d(
        SchemeParams::new(c)?,
        &grid,
        BoundaryCondition::Periodic,
        None,
        None,
    )?;
    let max_re = spectral_abscissa(&op)?;
    let one_d_pass = report.passes();
    Ok(Verdict2D {
        c,
        one_d_pass,
        max_re,
        pass: one_d_pass && max_re <= ZERO_TOL,
    })
}

/// Writes the `c,form,min_eig,max_eig,verdict` table.
pub fn write_stability_csv<W: std::io::Write>(
    reports: &[StabilityReport],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "c,form,min_eig,max_eig,verdict")?;
    for r in reports {
        for (v, ok) in r.entries() {
            writeln!(
                w,
                "{:.6},{},{:.12e},{:.12e},{}",
                r.c_f64(),
                v.location,
                v.min_eig(),
                v.max_eig(),
                if ok { "pass" } else { "fail" }
            )?;
        }
    }
    Ok(())
}

/// Whether a rational is strictly inside `(-1, 1)`.
pub fn in_unit_interval(c: &Rational) -> bool {
    c.abs() < q(1, 1)
}
