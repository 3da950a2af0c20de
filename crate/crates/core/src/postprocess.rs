//! Final-time filters that remove the structured high-mode error.
//!
//! The block grid injects spurious content at wavenumbers `|k| > N/2` of the
//! `2N`-point node lattice. For periodic data a sharp Fourier cutoff removes
//! it. For non-periodic data the nodes are split into batches of 12 and each
//! batch is replaced by its least-squares polynomial of degree 6. In 2D both
//! filters sweep every x-line and then every y-line.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{BfdError, Result};
use crate::grid::BlockGrid2D;

pub const DEFAULT_BATCH: usize = 12;
pub const DEFAULT_DEGREE: usize = 6;

/// Which filter to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    None,
    Spectral,
    Poly,
}

impl FromStr for FilterKind {
    type Err = BfdError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Self::None),
            "spectral" => Ok(Self::Spectral),
            "poly" => Ok(Self::Poly),
            other => Err(BfdError::Config(format!(
                "unknown postprocess '{other}' (expected none, spectral or poly)"
            ))),
        }
    }
}

impl std::fmt::Display for FilterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Spectral => "spectral",
            Self::Poly => "poly",
        })
    }
}

/// Filter configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub batch_size: usize,
    pub degree: usize,
    /// Largest retained `|k|` for the spectral filter; `None` means `N/2`.
    pub cutoff: Option<usize>,
}

impl FilterSpec {
    pub fn new(kind: FilterKind) -> Self {
        Self {
            kind,
            batch_size: DEFAULT_BATCH,
            degree: DEFAULT_DEGREE,
            cutoff: None,
        }
    }

    /// Applies the filter along one line of `2N` nodes.
    pub fn apply_line(&self, u: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            FilterKind::None => Ok(u.to_vec()),
            FilterKind::Spectral => {
                let cut = self.cutoff.unwrap_or(u.len() / 4);
                filter_periodic(u, cut)
            }
            FilterKind::Poly => filter_poly_batches(u, self.batch_size, self.degree),
        }
    }
}

/// Zeroes every discrete Fourier coefficient with `|k| > cutoff` of complex
/// nodal data.
pub fn filter_periodic_complex(u: &[Complex64], cutoff: usize) -> Result<Vec<Complex64>> {
    let m = u.len();
    if m == 0 {
        return Err(BfdError::InvalidSize("empty input".into()));
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf = u.to_vec();
    planner.plan_fft_forward(m).process(&mut buf);
    for (i, v) in buf.iter_mut().enumerate() {
        let k = if i <= m / 2 { i } else { m - i };
        if k > cutoff {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let inv = 1.0 / m as f64;
    Ok(buf.into_iter().map(|v| v * inv).collect())
}

/// Spectral high-mode filter of real nodal data on a periodic line.
///
/// With `2N` nodes the default cutoff is `N/2`; pass `u.len() / 4`.
pub fn filter_periodic(u: &[f64], cutoff: usize) -> Result<Vec<f64>> {
    let z: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Ok(filter_periodic_complex(&z, cutoff)?
        .into_iter()
        .map(|v| v.re)
        .collect())
}

/// Legendre polynomials `P_0..=P_degree` at `s`.
fn legendre(s: f64, degree: usize) -> Vec<f64> {
    let mut p = vec![1.0; degree + 1];
    if degree >= 1 {
        p[1] = s;
    }
    for k in 1..degree {
        p[k + 1] = ((2 * k + 1) as f64 * s * p[k] - k as f64 * p[k - 1]) / (k + 1) as f64;
    }
    p
}

/// Orthogonal projector onto polynomials of `degree` sampled at `batch`
/// equispaced points of `[-1, 1]`.
fn batch_projector(batch: usize, degree: usize) -> DMatrix<f64> {
    let v = DMatrix::from_fn(batch, degree + 1, |i, j| {
        let s = -1.0 + 2.0 * i as f64 / (batch - 1) as f64;
        legendre(s, degree)[j]
    });
    let q = v.qr().q();
    &q * q.transpose()
}

/// Least-squares polynomial reconstruction over consecutive node batches.
///
/// When the node count is not a multiple of `batch`, the last batch is the
/// final `batch` nodes and overrides the values of the batch it overlaps.
pub fn filter_poly_batches(u: &[f64], batch: usize, degree: usize) -> Result<Vec<f64>> {
    if degree + 1 > batch {
        return Err(BfdError::InvalidArgument(format!(
            "degree {degree} needs more than {batch} points"
        )));
    }
    if u.len() < batch {
        return Err(BfdError::Unsupported(format!(
            "{} nodes, need at least {batch}",
            u.len()
        )));
    }
    let p = batch_projector(batch, degree);
    let mut out = u.to_vec();
    let mut starts: Vec<usize> = (0..u.len() / batch).map(|b| b * batch).collect();
    if !u.len().is_multiple_of(batch) {
        starts.push(u.len() - batch);
    }
    for s in starts {
        let local = &p * DVector::from_column_slice(&u[s..s + batch]);
        out[s..s + batch].copy_from_slice(local.as_slice());
    }
    Ok(out)
}

/// Applies `spec` along every x-line, then along every y-line.
pub fn filter_2d(u: &[f64], grid: &BlockGrid2D, spec: &FilterSpec) -> Result<Vec<f64>> {
    let (nx, ny) = (grid.x().node_count(), grid.y().node_count());
    if u.len() != nx * ny {
        return Err(BfdError::InvalidSize(format!(
            "{} values for a {nx}x{ny} grid",
            u.len()
        )));
    }
    let mut v = u.to_vec();
    for q in 0..ny {
        let line: Vec<f64> = (0..nx).map(|p| v[p * ny + q]).collect();
        for (p, val) in spec.apply_line(&line)?.into_iter().enumerate() {
            v[p * ny + q] = val;
        }
    }
    for p in 0..nx {
        let f = spec.apply_line(&v[p * ny..(p + 1) * ny])?;
        v[p * ny..(p + 1) * ny].copy_from_slice(&f);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BlockGrid1D;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn mode(g: &BlockGrid1D, k: i64) -> Vec<Complex64> {
        g.project(|x| Complex64::from_polar(1.0, k as f64 * x))
    }

    #[test]
    fn removes_paired_high_mode_keeps_low_mode() {
        let g = BlockGrid1D::new(8, 0.0, 2.0 * PI).unwrap();
        let hi = filter_periodic_complex(&mode(&g, 1 - 8), 4).unwrap();
        assert!(hi.iter().all(|v| v.norm() < 1e-12));
        let lo = mode(&g, 2);
        let f = filter_periodic_complex(&lo, 4).unwrap();
        assert!(f.iter().zip(&lo).all(|(a, b)| (a - b).norm() < 1e-12));
        let spec = FilterSpec::new(FilterKind::Spectral);
        let re: Vec<f64> = lo.iter().map(|v| v.re).collect();
        let out = spec.apply_line(&re).unwrap();
        assert!(out.iter().zip(&re).all(|(a, b)| (a - b).abs() < 1e-13));
    }

    #[test]
    fn poly_filter_reproduces_polynomials() {
        let g = BlockGrid1D::new(30, -1.0, 2.0).unwrap();
        let u = g.project(|x| 1.0 - 2.0 * x + 0.5 * x.powi(3) - 0.1 * x.powi(6));
        let f = filter_poly_batches(&u, 12, 6).unwrap();
        assert!(f.iter().zip(&u).all(|(a, b)| (a - b).abs() < 1e-10));
        assert!(filter_poly_batches(&u[..10], 12, 6).is_err());
    }

    #[test]
    fn poly_filter_suppresses_alternating_noise() {
        let g = BlockGrid1D::new(24, 0.0, 1.0).unwrap();
        let smooth = g.project(|x| (x.cos()).exp());
        let eps = 1e-3;
        let noisy: Vec<f64> = smooth
            .iter()
            .enumerate()
            .map(|(m, v)| v + if m % 2 == 0 { eps } else { -eps })
            .collect();
        let f = filter_poly_batches(&noisy, 12, 6).unwrap();
        // Projecting (-1)^m on 12 points onto degree 6 keeps 0.397 of its norm.
        let resid = f
            .iter()
            .zip(&smooth)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let noise = eps * (noisy.len() as f64).sqrt();
        assert!(resid < 0.42 * noise, "resid {resid}");
    }

    #[test]
    fn overlapping_last_batch() {
        let u: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let f = filter_poly_batches(&u, 12, 6).unwrap();
        let tail = filter_poly_batches(&u[18..], 12, 6).unwrap();
        assert_eq!(&f[18..], &tail[..]);
        let head = filter_poly_batches(&u[..12], 12, 6).unwrap();
        assert_eq!(&f[..12], &head[..]);
    }

    #[test]
    fn two_d_filters() {
        let g = BlockGrid2D::square(6, 0.0, 1.0).unwrap();
        let u = g.project(|x, y| (1.0 + x - x.powi(4)) * (2.0 - y * y + y.powi(6)));
        let f = filter_2d(&u, &g, &FilterSpec::new(FilterKind::Poly)).unwrap();
        assert!(f.iter().zip(&u).all(|(a, b)| (a - b).abs() < 1e-9));
        let g = BlockGrid2D::square(8, 0.0, 2.0 * PI).unwrap();
        let hh = g.project(|x, y| ((1.0 - 8.0) * x).cos() * ((2.0 - 8.0) * y).cos());
        let f = filter_2d(&hh, &g, &FilterSpec::new(FilterKind::Spectral)).unwrap();
        assert!(f.iter().all(|v| v.abs() < 1e-12));
    }

    proptest! {
        #[test]
        fn spectral_filter_is_projection(v in proptest::collection::vec(-1.0f64..1.0, 32)) {
            let f = filter_periodic(&v, 8).unwrap();
            let ff = filter_periodic(&f, 8).unwrap();
            for (a, b) in f.iter().zip(&ff) {
                prop_assert!((a - b).abs() < 1e-10);
            }
            let n2 = |x: &[f64]| x.iter().map(|t| t * t).sum::<f64>();
            prop_assert!(n2(&f) <= n2(&v) * (1.0 + 1e-12) + 1e-300);
            let mut shifted = v.clone();
            shifted.rotate_left(2);
            let fs = filter_periodic(&shifted, 8).unwrap();
            let mut fr = f.clone();
            fr.rotate_left(2);
            for (a, b) in fs.iter().zip(&fr) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn poly_filter_is_bounded_projection(v in proptest::collection::vec(-1.0f64..1.0, 48)) {
            let f = filter_poly_batches(&v, 12, 6).unwrap();
            let ff = filter_poly_batches(&f, 12, 6).unwrap();
            for (a, b) in f.iter().zip(&ff) {
                prop_assert!((a - b).abs() < 1e-10);
            }
            let n2 = |x: &[f64]| x.iter().map(|t| t * t).sum::<f64>().sqrt();
            prop_assert!(n2(&f) <= n2(&v) * (1.0 + 1e-12));
        }

        #[test]
        fn overlapped_poly_filter_norm_ratio(v in proptest::collection::vec(-1.0f64..1.0, 40)) {
            let f = filter_poly_batches(&v, 12, 6).unwrap();
            let n2 = |x: &[f64]| x.iter().map(|t| t * t).sum::<f64>().sqrt();
            prop_assert!(n2(&f) <= 2.0 * n2(&v));
        }
    }
}
