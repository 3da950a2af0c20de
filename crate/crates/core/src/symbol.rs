//! Fourier symbol analysis of the periodic operator.
//!
//! On the two-point grid the modes `e^{i w x}` and `e^{i v x}` with
//! `v = w - N` (for `w > 0`) agree up to the factor `i` on left nodes and
//! `-i` on right nodes, so the periodic operator maps their span into
//! itself. On that span it acts as a 2x2 matrix built from the node symbols
//! `mu_1, mu_2` (stencil sums at `w`) and `sigma_1, sigma_2` (at `v`). Its
//! two eigenvalues are the symbols `Q_1` (resolved, `~ -w^2`) and `Q_2`
//! (spurious, `~ 32(c-2)/(3h^2)`).
//!
//! The 2x2 eigensolve is authoritative. [`closed_forms`] evaluates the
//! analytic expressions for comparison.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{BfdError, Result};
use crate::grid::BlockGrid1D;
use crate::operator::{left_row, right_row, BlockOperator, SchemeParams};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A resolved frequency and its spurious partner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrequencyPair {
    pub omega: i64,
    pub nu: i64,
    pub n: usize,
}

impl FrequencyPair {
    /// Pairs `omega` in `(-N/2, N/2]` with `nu = omega - N` (`omega >= 0`)
    /// or `omega + N` (`omega < 0`).
    pub fn new(omega: i64, n: usize) -> Result<Self> {
        let half = n as i64 / 2;
        if omega > half || omega <= -((n as i64 + 1) / 2) {
            return Err(BfdError::InvalidArgument(format!(
                "omega = {omega} outside (-N/2, N/2] for N = {n}"
            )));
        }
        let nu = if omega >= 0 {
            omega - n as i64
        } else {
            omega + n as i64
        };
        Ok(Self { omega, nu, n })
    }

    /// All pairs covering the spectrum of an `N`-cell operator.
    pub fn all(n: usize) -> Vec<Self> {
        let half = n as i64 / 2;
        (-((n as i64 - 1) / 2)..=half)
            .map(|w| Self::new(w, n).expect("in range"))
            .collect()
    }
}

/// Per-frequency eigen-data of the periodic operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolSet {
    pub pair: FrequencyPair,
    pub mu1: Complex64,
    pub mu2: Complex64,
    pub sigma1: Complex64,
    pub sigma2: Complex64,
    pub qhat1: Complex64,
    pub qhat2: Complex64,
    pub r1: Complex64,
    pub r2: Complex64,
    pub alpha1: Complex64,
    pub beta1: Complex64,
    pub alpha2: Complex64,
    pub beta2: Complex64,
}

/// Analytic expressions for the symbols, with `theta = 2 pi omega / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForms {
    pub qhat1: Complex64,
    pub qhat2: Complex64,
    /// Discriminant `Delta` as it appears in the eigenvalues.
    pub delta: Complex64,
    /// `Omega`, present when `c != 0` and `omega != 0`.
    pub omega_cap: Option<f64>,
    /// `Delta / (32 c sin(theta/4) cos^5(theta/4))`, the normalization of
    /// `Delta` used in `r_k`.
    pub delta_tilde: Option<Complex64>,
    pub r1: Option<Complex64>,
    pub r2: Option<Complex64>,
}

/// Low-order prediction derived from the small-`wh` expansion of `Q_1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderPrediction {
    pub c: f64,
    /// 5 when the `h^4` term vanishes, else 4.
    pub generic_order: u32,
    /// Coefficient `(4+13c)/(2880(c-2))` of `w^6 h^4` in `-(Q_1 + w^2)`.
    pub h4_coefficient: f64,
}

/// Mode amplitudes of the error after time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionPrediction {
    /// `e^{-w^2 t}[1 - (4+13c) w^6 t h^4 / (2880 (c-2))]`, consistent with
    /// the expansion of `Q_1`.
    pub low_mode: Complex64,
    /// Same with the denominator 1024 in place of 2880.
    pub low_mode_1024: Complex64,
    /// `i c (w h)^5 / (1024 (c-2))`, the spurious-mode amplitude relative to
    /// the resolved mode.
    pub high_mode: Complex64,
}

/// Node symbol `(1/(3h^2)) sum_o w_o e^{i k o h/2}` of a six-point stencil.
fn stencil_symbol(row: [f64; 6], first: i32, k: f64, h: f64) -> Complex64 {
    let s: Complex64 = row
        .iter()
        .enumerate()
        .map(|(i, &w)| Complex64::from_polar(w, k * (first + i as i32) as f64 * 0.5 * h))
        .sum();
    s / (3.0 * h * h)
}

fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr = a + d;
    let disc = ((a - d) * (a - d) / 4.0 + b * c).sqrt();
    (tr / 2.0 + disc, tr / 2.0 - disc)
}

/// Eigenvector `(alpha, beta)` of `[[a, b], [c, d]]` for eigenvalue `l`.
fn eigvec2(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
    l: Complex64,
) -> (Complex64, Complex64) {
    let v1 = (b, l - a);
    let v2 = (l - d, c);
    let n1 = v1.0.norm() + v1.1.norm();
    let n2 = v2.0.norm() + v2.1.norm();
    if n1 >= n2 {
        v1
    } else {
        v2
    }
}

/// `r = i beta / alpha` and the normalized coefficients with the phase
/// convention `alpha_1 > 0`, `beta_2 = -i |r_2| / sqrt(1 + |r_2|^2)`.
fn normalize(v: (Complex64, Complex64), first: bool) -> (Complex64, Complex64, Complex64) {
    let (alpha, beta) = v;
    if alpha.norm() == 0.0 {
        return (
            Complex64::new(f64::INFINITY, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        );
    }
    let r = I * beta / alpha;
    let s = (1.0 + r.norm_sqr()).sqrt();
    let a = if first || r.norm() == 0.0 {
        Complex64::new(1.0 / s, 0.0)
    } else {
        r.norm() / r / s
    };
    (r, a, -I * r * a)
}

/// Symbols at frequency `omega` for an `N`-cell periodic grid of length `length`.
pub fn symbols(omega: i64, n: usize, c: f64, length: f64) -> Result<SymbolSet> {
    if omega < 0 {
        let s = symbols(-omega, n, c, length)?;
        let cj = |z: Complex64| z.conj();
        let pair = FrequencyPair {
            omega,
            nu: -s.pair.nu,
            n,
        };
        return Ok(SymbolSet {
            pair,
            mu1: cj(s.mu1),
            mu2: cj(s.mu2),
            sigma1: cj(s.sigma1),
            sigma2: cj(s.sigma2),
            qhat1: cj(s.qhat1),
            qhat2: cj(s.qhat2),
            r1: cj(s.r1),
            r2: cj(s.r2),
            alpha1: cj(s.alpha1),
            beta1: cj(s.beta1),
            alpha2: cj(s.alpha2),
            beta2: cj(s.beta2),
        });
    }
    let pair = FrequencyPair::new(omega, n)?;
    let h = length / n as f64;
    let kw = 2.0 * PI * pair.omega as f64 / length;
    let kv = 2.0 * PI * pair.nu as f64 / length;
    let mu1 = stencil_symbol(left_row(c), -2, kw, h);
    let mu2 = stencil_symbol(right_row(c), -3, kw, h);
    let sigma1 = stencil_symbol(left_row(c), -2, kv, h);
    let sigma2 = stencil_symbol(right_row(c), -3, kv, h);
    // Action on coefficients (alpha, beta) of alpha e^{iwx} + beta e^{ivx}.
    let ka = (mu1 + mu2) / 2.0;
    let kb = (sigma1 - sigma2) / (2.0 * I);
    let kc = (mu2 - mu1) / (2.0 * I);
    let kd = (sigma1 + sigma2) / 2.0;
    let (l1, l2) = eig2(ka, kb, kc, kd);
    let (qhat1, qhat2) = if l1.re >= l2.re { (l1, l2) } else { (l2, l1) };
    let (r1, alpha1, beta1) = normalize(eigvec2(ka, kb, kc, kd, qhat1), true);
    let (r2, alpha2, beta2) = normalize(eigvec2(ka, kb, kc, kd, qhat2), false);
    Ok(SymbolSet {
        pair,
        mu1,
        mu2,
        sigma1,
        sigma2,
        qhat1,
        qhat2,
        r1,
        r2,
        alpha1,
        beta1,
        alpha2,
        beta2,
    })
}

impl SymbolSet {
    /// Residuals of `mu_1 - sigma_1 r = Q(1 - r)` and `mu_2 + sigma_2 r = Q(1 + r)`
    /// for both eigenpairs.
    pub fn consistency_residual(&self) -> f64 {
        let row = |q: Complex64, r: Complex64| {
            let a = (self.mu1 - self.sigma1 * r - q * (1.0 - r)).norm();
            let b = (self.mu2 + self.sigma2 * r - q * (1.0 + r)).norm();
            a.max(b)
        };
        row(self.qhat1, self.r1).max(row(self.qhat2, self.r2))
    }

    /// Eigenvector `alpha e^{iwx} + beta e^{ivx}` sampled on `grid`.
    pub fn eigenvector(&self, k: usize, grid: &BlockGrid1D) -> Vec<Complex64> {
        let (alpha, beta) = if k == 1 {
            (self.alpha1, self.beta1)
        } else {
            (self.alpha2, self.beta2)
        };
        let l = grid.length();
        let kw = 2.0 * PI * self.pair.omega as f64 / l;
        let kv = 2.0 * PI * self.pair.nu as f64 / l;
        grid.project(|x| {
            let s = x - grid.a();
            alpha * Complex64::from_polar(1.0, kw * s) + beta * Complex64::from_polar(1.0, kv * s)
        })
    }
}

/// Closed-form symbol expressions at `omega > 0`.
pub fn closed_forms(omega: i64, n: usize, c: f64, length: f64) -> Result<ClosedForms> {
    FrequencyPair::new(omega, n)?;
    let h = length / n as f64;
    let th = 2.0 * PI * omega as f64 / n as f64;
    let (ct, c2t) = (th.cos(), (2.0 * th).cos());
    let rad = 4.0 * (3.0 * c - 8.0) * (5.0 * c - 8.0) * ct
        + c * (9.0 * c - 16.0) * c2t
        + c * (59.0 * c - 240.0)
        + 256.0;
    let delta = 2f64.sqrt() * Complex64::new(rad, 0.0).sqrt();
    let base = (6.0 * c - 2.0) * ct + 10.0 * c - 30.0;
    let k = 1.0 / (3.0 * h * h);
    let qhat1 = (base + delta) * k;
    let qhat2 = (base - delta) * k;
    let den = 32.0 * c * (th / 4.0).sin() * (th / 4.0).cos().powi(5);
    let (omega_cap, delta_tilde, r1, r2) = if c != 0.0 && omega > 0 {
        let om = 2.0 * (th / 2.0).cos() * (-16.0 + 7.0 * c + c * ct) / den;
        let dt = delta / den;
        (Some(om), Some(dt), Some(I * (om + dt)), Some(I * (om - dt)))
    } else {
        (None, None, None, None)
    };
    Ok(ClosedForms {
        qhat1,
        qhat2,
        delta,
        omega_cap,
        delta_tilde,
        r1,
        r2,
    })
}

pub fn order_prediction(c: f64) -> OrderPrediction {
    let h4 = (4.0 + 13.0 * c) / (2880.0 * (c - 2.0));
    OrderPrediction {
        c,
        generic_order: if h4 == 0.0 { 5 } else { 4 },
        h4_coefficient: h4,
    }
}

/// Small-`wh` prediction of the resolved and spurious mode amplitudes.
pub fn predict_error_evolution(omega: f64, c: f64, h: f64, t: f64) -> EvolutionPrediction {
    let decay = (-omega * omega * t).exp();
    let w6th4 = omega.powi(6) * t * h.powi(4);
    let low = decay * (1.0 - (4.0 + 13.0 * c) * w6th4 / (2880.0 * (c - 2.0)));
    let low1024 = decay * (1.0 - (4.0 + 13.0 * c) * w6th4 / (1024.0 * (c - 2.0)));
    let high = I * c * (omega * h).powi(5) / (1024.0 * (c - 2.0));
    EvolutionPrediction {
        low_mode: low.into(),
        low_mode_1024: low1024.into(),
        high_mode: high,
    }
}

/// Amplitudes of `exp(tQ) e^{iwx}` on the resolved and spurious modes, from
/// a dense matrix exponential on the periodic grid `[0, 2 pi]`.
pub fn measure_error_evolution(
    omega: i64,
    n: usize,
    c: f64,
    t: f64,
) -> Result<(Complex64, Complex64)> {
    let pair = FrequencyPair::new(omega, n)?;
    let grid = BlockGrid1D::new(n, 0.0, 2.0 * PI)?;
    let op = BlockOperator::periodic(SchemeParams::new(c)?, &grid)?;
    let e = (op.to_dense() * t).exp();
    let low: Vec<Complex64> = grid.project(|x| Complex64::from_polar(1.0, pair.omega as f64 * x));
    let high: Vec<Complex64> = grid.project(|x| Complex64::from_polar(1.0, pair.nu as f64 * x));
    let m = low.len();
    let v: Vec<Complex64> = (0..m)
        .map(|i| (0..m).map(|j| low[j] * e[(i, j)]).sum())
        .collect();
    let proj = |b: &[Complex64]| {
        v.iter()
            .zip(b)
            .map(|(x, y)| x * y.conj())
            .sum::<Complex64>()
            / m as f64
    };
    Ok((proj(&low), proj(&high)))
}

/// Comparison of the operator spectrum with the symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolCheck {
    /// Largest `|lambda - Q| / max(|Q|, 1)` over a nearest-neighbour matching
    /// of the two multisets.
    pub max_mismatch: f64,
    /// Largest `|Q psi - Q_k psi|_inf / |Q|_inf` over all eigenvectors.
    pub max_eigvec_residual: f64,
}

/// Symbols for every frequency pair of a periodic grid, with the pointwise
/// mismatch to the nearest operator eigenvalue.
pub fn symbol_table(params: SchemeParams, grid: &BlockGrid1D) -> Result<Vec<(SymbolSet, f64)>> {
    let n = grid.n_blocks();
    let op = BlockOperator::periodic(params, grid)?;
    let eig = crate::operator::eigenvalues(&op)?;
    FrequencyPair::all(n)
        .into_iter()
        .map(|p| {
            let s = symbols(p.omega, n, params.c, grid.length())?;
            let near = |q: Complex64| {
                eig.iter()
                    .map(|l| (l - q).norm())
                    .fold(f64::INFINITY, f64::min)
                    / q.norm().max(1.0)
            };
            Ok((s, near(s.qhat1).max(near(s.qhat2))))
        })
        .collect()
}

/// Writes a symbol table as `omega,nu,re(qhat1),im(qhat1),re(qhat2),im(qhat2),mismatch`.
pub fn write_symbol_csv<W: std::io::Write>(
    table: &[(SymbolSet, f64)],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(
        w,
        "omega,nu,re(qhat1),im(qhat1),re(qhat2),im(qhat2),mismatch"
    )?;
    for (s, m) in table {
        writeln!(
            w,
            "{},{},{:.15e},{:.15e},{:.15e},{:.15e},{:.3e}",
            s.pair.omega, s.pair.nu, s.qhat1.re, s.qhat1.im, s.qhat2.re, s.qhat2.im, m
        )?;
    }
    Ok(())
}

/// Matches the operator spectrum against `{Q_1(w)} u {Q_2(w)}` and checks
/// the symbol eigenvectors.
pub fn verify_against_operator(params: SchemeParams, grid: &BlockGrid1D) -> Result<SymbolCheck> {
    let n = grid.n_blocks();
    let op = BlockOperator::periodic(params, grid)?;
    let dense = op.to_dense();
    let mut eig = crate::operator::eigenvalues(&op)?;
    if eig.iter().any(|z| !z.re.is_finite()) {
        return Err(BfdError::Eigen("non-finite eigenvalue".into()));
    }
    let qc: DMatrix<Complex64> = dense.map(|v| Complex64::new(v, 0.0));
    let qnorm = dense
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut mismatch: f64 = 0.0;
    let mut residual: f64 = 0.0;
    for p in FrequencyPair::all(n) {
        let s = symbols(p.omega, n, params.c, grid.length())?;
        for (k, q) in [(1, s.qhat1), (2, s.qhat2)] {
            let (idx, d) = eig
                .iter()
                .enumerate()
                .map(|(i, l)| (i, (l - q).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .ok_or_else(|| BfdError::Eigen("spectrum exhausted".into()))?;
            eig.swap_remove(idx);
            mismatch = mismatch.max(d / q.norm().max(1.0));
            let psi = nalgebra::DVector::from_vec(s.eigenvector(k, grid));
            let r = &qc * &psi - &psi * q;
            residual = residual.max(r.iter().map(|z| z.norm()).fold(0.0, f64::max) / qnorm);
        }
    }
    Ok(SymbolCheck {
        max_mismatch: mismatch,
        max_eigvec_residual: residual,
    })
}
