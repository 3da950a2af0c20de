//! Time integration of `u' = Q u + s(t) + F(t)`.
//!
//! Two methods are provided: the classical explicit fourth-order Runge-Kutta
//! scheme and the three-stage Gauss-Legendre collocation method (order 6,
//! A-stable). The Gauss-Legendre stage system
//! `(I - dt (A (x) Q)) K = R` is linear and is solved with a dense LU
//! factorization computed once per step size.

use nalgebra::{DMatrix, DVector, LU};

use crate::error::{BfdError, Result};
use crate::operator::BlockOperator;

/// Forcing term `F(t)` written into the output slice.
pub type Forcing<'a> = &'a (dyn Fn(f64, &mut [f64]) + Sync);

/// Largest `|dt * lambda|` on the negative real axis inside the RK4
/// stability region.
pub const RK4_REAL_AXIS_LIMIT: f64 = 2.785;

/// Largest stage system size the dense Gauss-Legendre solver accepts.
pub const GL6_MAX_SYSTEM: usize = 6000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Gl6,
}

impl std::str::FromStr for Method {
    type Err = BfdError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rk4" => Ok(Self::Rk4),
            "gl6" => Ok(Self::Gl6),
            other => Err(BfdError::Config(format!(
                "unknown integrator '{other}' (expected rk4 or gl6)"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Rk4 => "rk4",
            Self::Gl6 => "gl6",
        })
    }
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dt: f64,
    pub t_final: f64,
    /// Abort when `max|u|` exceeds this factor times `max(max|u0|, 1)`.
    pub growth_limit: Option<f64>,
}

impl IntegratorConfig {
    pub fn new(method: Method, dt: f64, t_final: f64) -> Self {
        Self {
            method,
            dt,
            t_final,
            growth_limit: Some(10.0),
        }
    }
}

/// Gauss-Legendre nodes, weights and coefficient matrix (3 stages).
pub fn gauss_legendre_tableau() -> ([f64; 3], [f64; 3], [[f64; 3]; 3]) {
    let s = 15f64.sqrt();
    let c = [0.5 - s / 10.0, 0.5, 0.5 + s / 10.0];
    let b = [5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0];
    let a = [
        [5.0 / 36.0, 2.0 / 9.0 - s / 15.0, 5.0 / 36.0 - s / 30.0],
        [5.0 / 36.0 + s / 24.0, 2.0 / 9.0, 5.0 / 36.0 - s / 24.0],
        [5.0 / 36.0 + s / 30.0, 2.0 / 9.0 + s / 15.0, 5.0 / 36.0],
    ];
    (c, b, a)
}

/// Spectral radius estimate `|32(c-2)/(3h^2)|` summed over directions.
pub fn spectral_radius_estimate(op: &BlockOperator) -> f64 {
    let c = op.params().c;
    let inv_h2: f64 = match (op.grid_1d(), op.grid_2d()) {
        (Some(g), _) => 1.0 / (g.h() * g.h()),
        (_, Some(g)) => 1.0 / (g.x().h() * g.x().h()) + 1.0 / (g.y().h() * g.y().h()),
        _ => 0.0,
    };
    (32.0 * (c - 2.0) / 3.0).abs() * inv_h2
}

fn rhs_into(
    op: &BlockOperator,
    forcing: Option<Forcing>,
    u: &[f64],
    t: f64,
    out: &mut [f64],
    tmp: &mut [f64],
) {
    op.apply_affine_into(u, t, out);
    if let Some(f) = forcing {
        f(t, tmp);
        out.iter_mut().zip(tmp.iter()).for_each(|(o, v)| *o += v);
    }
}

/// One classical RK4 step.
pub fn step_rk4(
    op: &BlockOperator,
    u: &[f64],
    t: f64,
    dt: f64,
    forcing: Option<Forcing>,
) -> Vec<f64> {
    let mut ws = Rk4Workspace::new(u.len());
    let mut out = u.to_vec();
    ws.step(op, &mut out, t, dt, forcing);
    out
}

struct Rk4Workspace {
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Workspace {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            stage: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    fn step(
        &mut self,
        op: &BlockOperator,
        u: &mut [f64],
        t: f64,
        dt: f64,
        forcing: Option<Forcing>,
    ) {
        let [k1, k2, k3, k4] = &mut self.k;
        rhs_into(op, forcing, u, t, k1, &mut self.tmp);
        for (s, (&x, &k)) in self.stage.iter_mut().zip(u.iter().zip(k1.iter())) {
            *s = x + 0.5 * dt * k;
        }
        rhs_into(op, forcing, &self.stage, t + 0.5 * dt, k2, &mut self.tmp);
        for (s, (&x, &k)) in self.stage.iter_mut().zip(u.iter().zip(k2.iter())) {
            *s = x + 0.5 * dt * k;
        }
        rhs_into(op, forcing, &self.stage, t + 0.5 * dt, k3, &mut self.tmp);
        for (s, (&x, &k)) in self.stage.iter_mut().zip(u.iter().zip(k3.iter())) {
            *s = x + dt * k;
        }
        rhs_into(op, forcing, &self.stage, t + dt, k4, &mut self.tmp);
        for i in 0..u.len() {
            u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

/// Gauss-Legendre stepper with the stage matrix factored for one `dt`.
pub struct Gl6Stepper {
    dt: f64,
    n: usize,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Gl6Stepper {
    pub fn new(op: &BlockOperator, dt: f64) -> Result<Self> {
        let n = op.size();
        if 3 * n > GL6_MAX_SYSTEM {
            return Err(BfdError::Unsupported(format!(
                "Gauss-Legendre stage system of size {} exceeds {GL6_MAX_SYSTEM}",
                3 * n
            )));
        }
        let (_, _, a) = gauss_legendre_tableau();
        let mut m = DMatrix::<f64>::identity(3 * n, 3 * n);
        for i in 0..3 {
            for j in 0..3 {
                let f = dt * a[i][j];
                for (r, c, v) in op.matrix().triplet_iter() {
                    m[(i * n + r, j * n + c)] -= f * v;
                }
            }
        }
        let lu = m.lu();
        if !lu.is_invertible() {
            return Err(BfdError::Singular(format!(
                "Gauss-Legendre stage matrix at dt = {dt}"
            )));
        }
        Ok(Self { dt, n, lu })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `u` from `t` to `t + dt`.
    pub fn step(
        &self,
        op: &BlockOperator,
        u: &mut [f64],
        t: f64,
        forcing: Option<Forcing>,
    ) -> Result<()> {
        let (c, b, _) = gauss_legendre_tableau();
        let n = self.n;
        let mut rhs = DVector::<f64>::zeros(3 * n);
        let mut buf = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        for i in 0..3 {
            rhs_into(op, forcing, u, t + c[i] * self.dt, &mut buf, &mut tmp);
            rhs.rows_mut(i * n, n).copy_from_slice(&buf);
        }
        let k = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| BfdError::Singular("Gauss-Legendre stage solve".into()))?;
        for i in 0..3 {
            let ki = k.rows(i * n, n);
            for (x, v) in u.iter_mut().zip(ki.iter()) {
                *x += self.dt * b[i] * v;
            }
        }
        Ok(())
    }
}

/// One Gauss-Legendre step (factors the stage matrix each call).
pub fn step_gl6(
    op: &BlockOperator,
    u: &[f64],
    t: f64,
    dt: f64,
    forcing: Option<Forcing>,
) -> Result<Vec<f64>> {
    let s = Gl6Stepper::new(op, dt)?;
    let mut out = u.to_vec();
    s.step(op, &mut out, t, forcing)?;
    Ok(out)
}

fn max_abs(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Integrates from `t = 0` to `config.t_final`.
///
/// Takes whole steps of `config.dt` and a final shortened step when
/// `t_final` is not a multiple of `dt`.
pub fn integrate(
    op: &BlockOperator,
    u0: &[f64],
    config: &IntegratorConfig,
    forcing: Option<Forcing>,
) -> Result<Vec<f64>> {
    if !(config.dt > 0.0) || !(config.t_final >= 0.0) {
        return Err(BfdError::Config(format!(
            "need dt > 0 and t_final >= 0, got {config:?}"
        )));
    }
    if u0.len() != op.size() {
        return Err(BfdError::InvalidSize(format!(
            "initial data has {} values, operator {}",
            u0.len(),
            op.size()
        )));
    }
    let whole = (config.t_final / config.dt * (1.0 + 1e-12)).floor() as usize;
    let rest = config.t_final - whole as f64 * config.dt;
    let rest = if rest > 1e-12 * config.t_final.max(1.0) {
        rest
    } else {
        0.0
    };
    let limit = config.growth_limit.map(|g| g * max_abs(u0).max(1.0));
    let check = |u: &[f64], t: f64| -> Result<()> {
        let m = max_abs(u);
        if !m.is_finite() || limit.is_some_and(|l| m > l) {
            return Err(BfdError::Unstable(format!("max|u| = {m:e} at t = {t}")));
        }
        Ok(())
    };
    let mut u = u0.to_vec();
    match config.method {
        Method::Rk4 => {
            let mut ws = Rk4Workspace::new(u.len());
            let mut t = 0.0;
            for s in 0..whole {
                ws.step(op, &mut u, t, config.dt, forcing);
                t = (s + 1) as f64 * config.dt;
                check(&u, t)?;
            }
            if rest > 0.0 {
                ws.step(op, &mut u, t, rest, forcing);
                check(&u, config.t_final)?;
            }
        }
        Method::Gl6 => {
            let stepper = Gl6Stepper::new(op, config.dt)?;
            for s in 0..whole {
                stepper.step(op, &mut u, s as f64 * config.dt, forcing)?;
                check(&u, (s + 1) as f64 * config.dt)?;
            }
            if rest > 0.0 {
                let last = Gl6Stepper::new(op, rest)?;
                last.step(op, &mut u, whole as f64 * config.dt, forcing)?;
                check(&u, config.t_final)?;
            }
        }
    }
    Ok(u)
}
