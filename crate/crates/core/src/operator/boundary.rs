//! Dirichlet boundary data for the ghost-point closure.
//!
//! The closure eliminates two ghost nodes per side using odd extrapolation
//! about the boundary corrected by the boundary value and the even
//! derivatives `u_xx`, `u_xxxx` there. Those derivatives come either from the
//! exact solution or from the PDE itself (see [`PdeDerived`]).

/// Endpoint of a 1D line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Boundary value and even normal derivatives at one boundary point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EdgeValues {
    pub g: f64,
    pub uxx: f64,
    pub uxxxx: f64,
}

/// Supplies [`EdgeValues`] along a boundary.
///
/// `transverse` is the coordinate along the boundary (ignored in 1D); the
/// derivatives are taken normal to the boundary.
pub trait BoundaryData: Send + Sync {
    fn edge(&self, side: Side, transverse: f64, t: f64) -> EdgeValues;
}

impl<F> BoundaryData for F
where
    F: Fn(Side, f64, f64) -> EdgeValues + Send + Sync,
{
    fn edge(&self, side: Side, transverse: f64, t: f64) -> EdgeValues {
        self(side, transverse, t)
    }
}

/// Boundary traces of a solution `g(s, t)` and forcing `F` needed to recover
/// the normal derivatives from `u_t = u_nn + u_ss + F`.
///
/// `n` is the normal direction and `s` the tangential one; for 1D problems
/// the tangential derivatives are zero.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PdeTraces {
    pub g: f64,
    pub g_t: f64,
    pub g_tt: f64,
    pub g_ss: f64,
    pub g_tss: f64,
    pub g_ssss: f64,
    pub f: f64,
    pub f_t: f64,
    pub f_nn: f64,
    pub f_ss: f64,
}

impl PdeTraces {
    /// `u_nn = u_t - u_ss - F`.
    pub fn uxx(&self) -> f64 {
        self.g_t - self.g_ss - self.f
    }

    /// `u_nnnn = u_tt - 2 u_tss - F_t + u_ssss + F_ss - F_nn`.
    pub fn uxxxx(&self) -> f64 {
        self.g_tt - 2.0 * self.g_tss - self.f_t + self.g_ssss + self.f_ss - self.f_nn
    }
}

/// Boundary data whose derivatives are computed from the PDE.
pub struct PdeDerived<T> {
    traces: T,
}

impl<T> PdeDerived<T>
where
    T: Fn(Side, f64, f64) -> PdeTraces + Send + Sync,
{
    pub fn new(traces: T) -> Self {
        Self { traces }
    }
}

impl<T> BoundaryData for PdeDerived<T>
where
    T: Fn(Side, f64, f64) -> PdeTraces + Send + Sync,
{
    fn edge(&self, side: Side, transverse: f64, t: f64) -> EdgeValues {
        let tr = (self.traces)(side, transverse, t);
        EdgeValues {
            g: tr.g,
            uxx: tr.uxx(),
            uxxxx: tr.uxxxx(),
        }
    }
}

/// Ghost value at signed distance `d` outside the boundary, given the
/// mirrored interior value `u_inside` at distance `d` inside:
/// `u(-d) = -u(d) + 2g + u_xx d^2 + u_xxxx d^4 / 12`.
pub fn ghost_value(edge: EdgeValues, u_inside: f64, d: f64) -> f64 {
    let d2 = d * d;
    -u_inside + 2.0 * edge.g + edge.uxx * d2 + edge.uxxxx * d2 * d2 / 12.0
}
