//! Manufactured-solution convergence studies and their artifacts.
//!
//! Every case uses `u = exp(cos(k (x [+ y] - t)))` on the unit interval or
//! square with the forcing `F = u_t - Δu` that makes it exact. Dirichlet
//! data comes from the exact trace, with the normal derivatives recovered
//! from the PDE.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{BfdError, Result};
use crate::grid::{BlockGrid1D, BlockGrid2D, NormKind};
use crate::operator::{
    BlockOperator, BoundaryCondition, BoundaryData, PdeDerived, PdeTraces, SchemeParams, Side,
};
use crate::postprocess::{filter_2d, FilterKind, FilterSpec};
use crate::time::{integrate, spectral_radius_estimate, IntegratorConfig, Method};
use crate::C_OPTIMAL;

/// Relative change in the error below which a halved time step is
/// considered converged.
pub const DT_TOLERANCE: f64 = 0.05;
/// Maximum number of time-step halvings during refinement.
pub const MAX_HALVINGS: usize = 6;
/// Default RK4 `dt * rho` for periodic cases, with `rho` the spectral
/// radius estimate.
pub const DEFAULT_CFL_PERIODIC: f64 = 2.0;
/// Default RK4 `dt * rho` for Dirichlet cases. Time-dependent boundary data
/// drives the stiff modes, and near the stability limit RK4 then loses
/// accuracy; halving from here changes the errors by under 1%.
pub const DEFAULT_CFL_DIRICHLET: f64 = 1.0;

/// The four shipped test problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Case {
    Periodic1D,
    Dirichlet1D,
    Periodic2D,
    Dirichlet2D,
}

impl Case {
    pub const ALL: [Case; 4] = [
        Case::Periodic1D,
        Case::Dirichlet1D,
        Case::Periodic2D,
        Case::Dirichlet2D,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Periodic1D => "periodic_1d",
            Self::Dirichlet1D => "dirichlet_1d",
            Self::Periodic2D => "periodic_2d",
            Self::Dirichlet2D => "dirichlet_2d",
        }
    }

    /// Name of the exact solution.
    pub fn exact_solution(self) -> &'static str {
        match self {
            Self::Periodic1D => "expcos_2pix_t",
            Self::Dirichlet1D => "expcos_x_t",
            Self::Periodic2D => "expcos_2pixy_t",
            Self::Dirichlet2D => "expcos_xy_t",
        }
    }

    pub fn dimension(self) -> usize {
        match self {
            Self::Periodic1D | Self::Dirichlet1D => 1,
            Self::Periodic2D | Self::Dirichlet2D => 2,
        }
    }

    pub fn boundary(self) -> BoundaryCondition {
        match self {
            Self::Periodic1D | Self::Periodic2D => BoundaryCondition::Periodic,
            Self::Dirichlet1D | Self::Dirichlet2D => BoundaryCondition::Dirichlet,
        }
    }

    pub fn default_cfl(self) -> f64 {
        match self.boundary() {
            BoundaryCondition::Periodic => DEFAULT_CFL_PERIODIC,
            BoundaryCondition::Dirichlet => DEFAULT_CFL_DIRICHLET,
        }
    }

    pub fn problem(self) -> ManufacturedProblem {
        let k = match self.boundary() {
            BoundaryCondition::Periodic => 2.0 * std::f64::consts::PI,
            BoundaryCondition::Dirichlet => 1.0,
        };
        ManufacturedProblem {
            k,
            dim: self.dimension(),
        }
    }
}

impl FromStr for Case {
    type Err = BfdError;
    fn from_str(s: &str) -> Result<Self> {
        Case::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| BfdError::Config(format!("unknown case '{s}'")))
    }
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `u = exp(cos(theta))` with `theta = k (x [+ y] - t)` on `[0, 1]^dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedProblem {
    pub k: f64,
    pub dim: usize,
}

/// `f^(j)(theta)` for `f = exp(cos)`, `j = 0..=4`.
pub fn expcos_derivatives(theta: f64) -> [f64; 5] {
    let (s, c) = theta.sin_cos();
    let f = c.exp();
    let (s2, c2) = (s * s, c * c);
    [
        f,
        -s * f,
        (s2 - c) * f,
        (3.0 * s * c + s - s2 * s) * f,
        (3.0 * c2 - 4.0 * s2 + c - 6.0 * s2 * c + s2 * s2) * f,
    ]
}

impl ManufacturedProblem {
    fn theta(&self, x: f64, y: f64, t: f64) -> f64 {
        let s = if self.dim == 2 { x + y } else { x };
        self.k * (s - t)
    }

    pub fn exact(&self, x: f64, y: f64, t: f64) -> f64 {
        self.theta(x, y, t).cos().exp()
    }

    /// `u_t`.
    pub fn u_t(&self, x: f64, y: f64, t: f64) -> f64 {
        -self.k * expcos_derivatives(self.theta(x, y, t))[1]
    }

    /// `Δu`.
    pub fn laplacian(&self, x: f64, y: f64, t: f64) -> f64 {
        self.dim as f64 * self.k * self.k * expcos_derivatives(self.theta(x, y, t))[2]
    }

    /// `F = u_t - Δu`.
    pub fn forcing(&self, x: f64, y: f64, t: f64) -> f64 {
        let d = expcos_derivatives(self.theta(x, y, t));
        let k = self.k;
        -k * d[1] - self.dim as f64 * k * k * d[2]
    }

    /// Traces on the edge `n = side`, `s = transverse`: everything the PDE
    /// needs to recover the normal derivatives.
    pub fn traces(&self, side: Side, transverse: f64, t: f64) -> PdeTraces {
        let n = match side {
            Side::Left => 0.0,
            Side::Right => 1.0,
        };
        let d = expcos_derivatives(self.theta(n, transverse, t));
        let k = self.k;
        let (k2, k3, k4) = (k * k, k * k * k, k * k * k * k);
        let dim = self.dim as f64;
        let two_d = self.dim == 2;
        // d/dt = -k d/dtheta; d/dn = d/ds = k d/dtheta.
        let f_nn = -k3 * d[3] - dim * k4 * d[4];
        PdeTraces {
            g: d[0],
            g_t: -k * d[1],
            g_tt: k2 * d[2],
            g_ss: if two_d { k2 * d[2] } else { 0.0 },
            g_tss: if two_d { -k3 * d[3] } else { 0.0 },
            g_ssss: if two_d { k4 * d[4] } else { 0.0 },
            f: -k * d[1] - dim * k2 * d[2],
            f_t: k2 * d[2] + dim * k3 * d[3],
            f_nn,
            f_ss: if two_d { f_nn } else { 0.0 },
        }
    }

    pub fn boundary_data(self) -> Arc<dyn BoundaryData> {
        Arc::new(PdeDerived::new(move |side, s, t| self.traces(side, s, t)))
    }
}

/// How the time step is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// Fixed step.
    Fixed(f64),
    /// `dt = h` for GL6, `dt = cfl / rho` for RK4.
    Default { cfl: f64 },
}

/// A convergence study for one case.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub case: Case,
    pub n_list: Vec<usize>,
    pub c_list: Vec<f64>,
    pub method: Method,
    pub step: StepRule,
    /// Halve `dt` until the reported errors change by less than
    /// [`DT_TOLERANCE`].
    pub refine_dt: bool,
    pub postprocess: FilterKind,
    pub t_final: f64,
}

impl ExperimentSpec {
    /// Defaults for each case: grid sizes, integrator and filter.
    pub fn defaults(case: Case) -> Self {
        let (n_list, method, postprocess): (Vec<usize>, _, _) = match case {
            Case::Periodic1D => (vec![16, 32, 64, 96], Method::Gl6, FilterKind::Spectral),
            Case::Dirichlet1D => (vec![24, 36, 48, 72, 84], Method::Rk4, FilterKind::Poly),
            Case::Periodic2D => (vec![50, 60, 70, 80], Method::Rk4, FilterKind::Spectral),
            Case::Dirichlet2D => (vec![24, 36, 48, 60], Method::Rk4, FilterKind::Poly),
        };
        Self {
            case,
            n_list,
            c_list: vec![0.0, -0.25, C_OPTIMAL],
            method,
            step: StepRule::Default {
                cfl: case.default_cfl(),
            },
            refine_dt: method == Method::Gl6,
            postprocess,
            t_final: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.c_list.is_empty() {
            return Err(BfdError::Config("need at least one N and one c".into()));
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n < crate::grid::MIN_BLOCKS) {
            return Err(BfdError::Config(format!(
                "N = {n} is below the minimum of {}",
                crate::grid::MIN_BLOCKS
            )));
        }
        let mut sorted = self.n_list.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(BfdError::Config(format!("N = {} is listed twice", w[0])));
        }
        if !(self.t_final > 0.0) {
            return Err(BfdError::Config(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        for &c in &self.c_list {
            SchemeParams::new(c)?;
        }
        match self.step {
            StepRule::Fixed(dt) if !(dt > 0.0) => {
                Err(BfdError::Config(format!("dt must be positive, got {dt}")))
            }
            StepRule::Default { cfl } if !(cfl > 0.0) => {
                Err(BfdError::Config(format!("cfl must be positive, got {cfl}")))
            }
            _ => Ok(()),
        }
    }
}

/// One grid size of a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub n: usize,
    pub h: f64,
    pub err_l2: f64,
    pub err_linf: f64,
    /// L2 error after the final-time filter, if one was requested.
    pub err_post: Option<f64>,
    pub dt: f64,
    /// False when refinement stopped at [`MAX_HALVINGS`] without meeting
    /// [`DT_TOLERANCE`].
    pub dt_converged: bool,
}

/// Results for one `(case, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub case: Case,
    pub c: f64,
    /// Sorted by `N`.
    pub rows: Vec<RunRecord>,
}

impl ConvergenceTable {
    /// Least-squares rate of the L2 error, when at least three rows exist.
    pub fn fitted_rate(&self) -> Option<f64> {
        let h: Vec<f64> = self.rows.iter().map(|r| r.h).collect();
        let e: Vec<f64> = self.rows.iter().map(|r| r.err_l2).collect();
        fit_rate(&h, &e).ok()
    }

    /// Least-squares rate of the filtered L2 error.
    pub fn post_rate(&self) -> Option<f64> {
        let h: Vec<f64> = self.rows.iter().map(|r| r.h).collect();
        let e: Option<Vec<f64>> = self.rows.iter().map(|r| r.err_post).collect();
        e.and_then(|e| fit_rate(&h, &e).ok())
    }

    /// Observed rate between each row and the previous one.
    pub fn pair_rates(&self) -> Vec<Option<f64>> {
        std::iter::once(None)
            .chain(
                self.rows
                    .windows(2)
                    .map(|w| Some((w[1].err_l2 / w[0].err_l2).log10() / (w[1].h / w[0].h).log10())),
            )
            .collect()
    }

    /// Whether the L2 error strictly decreases with `N`.
    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].err_l2 < w[0].err_l2)
    }
}

/// Least-squares slope of `log10 e` against `log10 h`.
pub fn fit_rate(h: &[f64], e: &[f64]) -> Result<f64> {
    if h.len() != e.len() {
        return Err(BfdError::InvalidArgument(format!(
            "{} step sizes but {} errors",
            h.len(),
            e.len()
        )));
    }
    if h.len() < 3 {
        return Err(BfdError::InvalidArgument(format!(
            "a rate fit needs at least 3 points, got {}",
            h.len()
        )));
    }
    if let Some(bad) = h.iter().chain(e).find(|v| !(**v > 0.0)) {
        return Err(BfdError::InvalidArgument(format!(
            "rate fit needs positive values, got {bad}"
        )));
    }
    let xs: Vec<f64> = h.iter().map(|v| v.log10()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.log10()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Discretisation of one case at one `(c, N)`.
struct Setup {
    op: BlockOperator,
    nodes: Vec<(f64, f64)>,
    h: f64,
    grid2d: Option<BlockGrid2D>,
    grid1d: Option<BlockGrid1D>,
}

fn setup(case: Case, c: f64, n: usize) -> Result<Setup> {
    let params = SchemeParams::new(c)?;
    let problem = case.problem();
    if case.dimension() == 1 {
        let grid = BlockGrid1D::new(n, 0.0, 1.0)?;
        let op = match case.boundary() {
            BoundaryCondition::Periodic => BlockOperator::periodic(params, &grid)?,
            BoundaryCondition::Dirichlet => {
                BlockOperator::dirichlet(params, &grid, problem.boundary_data())?
            }
        };
        Ok(Setup {
            nodes: grid.nodes().iter().map(|&x| (x, 0.0)).collect(),
            h: grid.h(),
            op,
            grid2d: None,
            grid1d: Some(grid),
        })
    } else {
        let grid = BlockGrid2D::square(n, 0.0, 1.0)?;
        let bd = (case.boundary() == BoundaryCondition::Dirichlet).then(|| problem.boundary_data());
        let op = BlockOperator::two_d(params, &grid, case.boundary(), bd.clone(), bd)?;
        let nodes = (0..grid.node_count()).map(|m| grid.node(m)).collect();
        Ok(Setup {
            nodes,
            h: grid.x().h(),
            op,
            grid2d: Some(grid),
            grid1d: None,
        })
    }
}

fn default_dt(method: Method, op: &BlockOperator, h: f64, t_final: f64, cfl: f64) -> f64 {
    let dt = match method {
        Method::Gl6 => h,
        Method::Rk4 => cfl / spectral_radius_estimate(op),
    };
    // Land exactly on t_final.
    t_final / (t_final / dt).ceil()
}

struct Errors {
    l2: f64,
    linf: f64,
    post: Option<f64>,
}

fn solve_once(
    case: Case,
    s: &Setup,
    method: Method,
    dt: f64,
    t_final: f64,
    filter: FilterKind,
) -> Result<Errors> {
    let problem = case.problem();
    let u0: Vec<f64> = s
        .nodes
        .iter()
        .map(|&(x, y)| problem.exact(x, y, 0.0))
        .collect();
    let nodes = &s.nodes;
    let forcing = move |t: f64, out: &mut [f64]| {
        for (o, &(x, y)) in out.iter_mut().zip(nodes) {
            *o = problem.forcing(x, y, t);
        }
    };
    let cfg = IntegratorConfig::new(method, dt, t_final);
    let u = integrate(&s.op, &u0, &cfg, Some(&forcing))?;
    let exact: Vec<f64> = s
        .nodes
        .iter()
        .map(|&(x, y)| problem.exact(x, y, t_final))
        .collect();
    let err: Vec<f64> = exact.iter().zip(&u).map(|(a, b)| a - b).collect();
    let norm = |e: &[f64], kind| match (&s.grid1d, &s.grid2d) {
        (Some(g), _) => g.norm(e, kind),
        (_, Some(g)) => g.norm(e, kind),
        _ => unreachable!("setup always has a grid"),
    };
    let post = match filter {
        FilterKind::None => None,
        kind => {
            let spec = FilterSpec::new(kind);
            let filtered = match &s.grid2d {
                Some(g) => filter_2d(&u, g, &spec)?,
                None => spec.apply_line(&u)?,
            };
            let e: Vec<f64> = exact.iter().zip(&filtered).map(|(a, b)| a - b).collect();
            Some(norm(&e, NormKind::L2))
        }
    };
    Ok(Errors {
        l2: norm(&err, NormKind::L2),
        linf: norm(&err, NormKind::Linf),
        post,
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= DT_TOLERANCE * b.abs()
}

/// Runs one `(c, N)` of a study.
pub fn run_single(spec: &ExperimentSpec, c: f64, n: usize) -> Result<RunRecord> {
    let s = setup(spec.case, c, n)?;
    let mut dt = match spec.step {
        StepRule::Fixed(dt) => dt,
        StepRule::Default { cfl } => default_dt(spec.method, &s.op, s.h, spec.t_final, cfl),
    };
    let mut e = solve_once(
        spec.case,
        &s,
        spec.method,
        dt,
        spec.t_final,
        spec.postprocess,
    )?;
    let mut converged = true;
    if spec.refine_dt {
        converged = false;
        for _ in 0..MAX_HALVINGS {
            let half = dt / 2.0;
            let f = solve_once(
                spec.case,
                &s,
                spec.method,
                half,
                spec.t_final,
                spec.postprocess,
            )?;
            let same = close(e.l2, f.l2)
                && match (e.post, f.post) {
                    (Some(a), Some(b)) => close(a, b),
                    _ => true,
                };
            dt = half;
            e = f;
            if same {
                converged = true;
                break;
            }
        }
    }
    Ok(RunRecord {
        n,
        h: s.h,
        err_l2: e.l2,
        err_linf: e.linf,
        err_post: e.post,
        dt,
        dt_converged: converged,
    })
}

#[cfg(feature = "parallel")]
fn map_jobs<T: Sync, R: Send>(jobs: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    jobs.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_jobs<T: Sync, R: Send>(jobs: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    jobs.iter().map(f).collect()
}

/// Runs every `(c, N)` of the study, in parallel when enabled. Tables come
/// back in the order of `c_list`, rows sorted by `N`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ConvergenceTable>> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> = (0..spec.c_list.len())
        .flat_map(|i| spec.n_list.iter().map(move |&n| (i, n)))
        .collect();
    let results = map_jobs(&jobs, |&(i, n)| run_single(spec, spec.c_list[i], n));
    let mut tables: Vec<ConvergenceTable> = spec
        .c_list
        .iter()
        .map(|&c| ConvergenceTable {
            case: spec.case,
            c,
            rows: Vec::new(),
        })
        .collect();
    for (&(i, n), r) in jobs.iter().zip(results) {
        let rec = r.map_err(|e| match e {
            BfdError::Unstable(msg) => BfdError::Unstable(format!(
                "{} c = {} N = {n}: {msg}",
                spec.case, spec.c_list[i]
            )),
            other => other,
        })?;
        tables[i].rows.push(rec);
    }
    for t in &mut tables {
        t.rows.sort_by_key(|r| r.n);
    }
    Ok(tables)
}

/// Writes the convergence CSV. The `rate` column holds the observed rate
/// against the previous row; `err_post` is empty without a filter.
pub fn write_csv<W: std::io::Write>(tables: &[ConvergenceTable], mut w: W) -> std::io::Result<()> {
    writeln!(w, "case,c,N,h,err_l2,err_linf,err_post,rate")?;
    for t in tables {
        for (r, rate) in t.rows.iter().zip(t.pair_rates()) {
            let post = r.err_post.map(|e| format!("{e:.6e}")).unwrap_or_default();
            let rate = rate.map(|v| format!("{v:.4}")).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{:.10e},{:.6e},{:.6e},{},{}",
                t.case, t.c, r.n, r.h, r.err_l2, r.err_linf, post, rate
            )?;
        }
    }
    Ok(())
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 480.0;
const MARGIN: f64 = 70.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Log-log chart of error against `h`, one polyline per table (dashed for
/// the filtered error).
pub fn render_svg(tables: &[ConvergenceTable]) -> String {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for t in tables {
        for r in &t.rows {
            pts.push((r.h.log10(), r.err_l2.log10()));
            if let Some(p) = r.err_post {
                pts.push((r.h.log10(), p.log10()));
            }
        }
    }
    let finite: Vec<(f64, f64)> = pts
        .into_iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (x0, x1) = bounds(finite.iter().map(|p| p.0));
    let (y0, y1) = bounds(finite.iter().map(|p| p.1));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (SVG_W - 2.0 * MARGIN);
    let sy = |y: f64| SVG_H - MARGIN - (y - y0) / (y1 - y0) * (SVG_H - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (l, r, t, b) = (MARGIN, SVG_W - MARGIN, MARGIN, SVG_H - MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{fx:.2}</text>"#,
            sx(fx),
            b + 18.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{fy:.2}</text>"#,
            l - 6.0,
            sy(fy) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">log10 h</text>"#,
        SVG_W / 2.0,
        SVG_H - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">log10 ||E||</text>"#,
        SVG_H / 2.0,
        SVG_H / 2.0
    );
    if let Some(first) = tables.first() {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="30" text-anchor="middle">{}</text>"#,
            SVG_W / 2.0,
            first.case
        );
    }
    for (i, tab) in tables.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let line = |vals: Vec<(f64, f64)>| {
            vals.iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let raw: Vec<(f64, f64)> = tab
            .rows
            .iter()
            .map(|r| (r.h.log10(), r.err_l2.log10()))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line(raw)
        );
        let post: Option<Vec<(f64, f64)>> = tab
            .rows
            .iter()
            .map(|r| r.err_post.map(|p| (r.h.log10(), p.log10())))
            .collect();
        if let Some(post) = post {
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2" stroke-dasharray="6 4"/>"#,
                line(post)
            );
        }
        let rate = tab
            .fitted_rate()
            .map(|r| format!(", rate {r:.2}"))
            .unwrap_or_default();
        let prate = tab
            .post_rate()
            .map(|r| format!(", filtered {r:.2}"))
            .unwrap_or_default();
        let ly = t + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
            l + 10.0,
            ly,
            l + 30.0,
            ly
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">c = {}{rate}{prate}</text>"#,
            l + 36.0,
            ly + 4.0,
            tab.c
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(0.05);
    (lo - pad, hi + pad)
}

/// Writes `<case>.csv` and `<case>.svg` for each case present, or a
/// header-only `convergence.csv` when there are no tables.
pub fn emit_artifacts(tables: &[ConvergenceTable], dir: &Path) -> Result<Vec<PathBuf>> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| BfdError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    if tables.is_empty() {
        let p = dir.join("convergence.csv");
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).map_err(io(&p))?;
        std::fs::write(&p, buf).map_err(io(&p))?;
        return Ok(vec![p]);
    }
    let mut cases: Vec<Case> = tables.iter().map(|t| t.case).collect();
    cases.sort();
    cases.dedup();
    for case in cases {
        let mine: Vec<ConvergenceTable> =
            tables.iter().filter(|t| t.case == case).cloned().collect();
        let csv = dir.join(format!("{case}.csv"));
        let mut buf = Vec::new();
        write_csv(&mine, &mut buf).map_err(io(&csv))?;
        std::fs::write(&csv, buf).map_err(io(&csv))?;
        let svg = dir.join(format!("{case}.svg"));
        std::fs::write(&svg, render_svg(&mine)).map_err(io(&svg))?;
        written.push(csv);
        written.push(svg);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_fit_recovers_powers() {
        let h = [0.1, 0.05, 0.025, 0.0125];
        let e4: Vec<f64> = h.iter().map(|v: &f64| v.powi(4)).collect();
        let e5: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powi(5)).collect();
        assert!((fit_rate(&h, &e4).unwrap() - 4.0).abs() < 1e-12);
        assert!((fit_rate(&h, &e5).unwrap() - 5.0).abs() < 1e-12);
        assert!(fit_rate(&h[..2], &e4[..2]).is_err());
        assert!(fit_rate(&h, &[1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let d = 1e-3;
        for &th in &[0.3, 1.7, -2.2] {
            let f = |x: f64| expcos_derivatives(x);
            for j in 0..4 {
                let fd = (f(th - 2.0 * d)[j] - 8.0 * f(th - d)[j] + 8.0 * f(th + d)[j]
                    - f(th + 2.0 * d)[j])
                    / (12.0 * d);
                assert!((fd - f(th)[j + 1]).abs() < 1e-9, "j = {j}");
            }
        }
    }

    #[test]
    fn forcing_closes_the_pde() {
        for case in Case::ALL {
            let p = case.problem();
            let d = 1e-4;
            for &(x, y, t) in &[(0.1, 0.7, 0.2), (0.55, 0.3, 0.9)] {
                let ut = (p.exact(x, y, t + d) - p.exact(x, y, t - d)) / (2.0 * d);
                let lap_x = (p.exact(x + d, y, t) - 2.0 * p.exact(x, y, t) + p.exact(x - d, y, t))
                    / (d * d);
                let lap_y = if p.dim == 2 {
                    (p.exact(x, y + d, t) - 2.0 * p.exact(x, y, t) + p.exact(x, y - d, t)) / (d * d)
                } else {
                    0.0
                };
                let resid = ut - lap_x - lap_y - p.forcing(x, y, t);
                assert!(resid.abs() < 1e-5 * p.k.powi(4), "{case}: {resid}");
            }
        }
    }

    #[test]
    fn pde_traces_give_exact_normal_derivatives() {
        for case in [Case::Dirichlet1D, Case::Dirichlet2D] {
            let p = case.problem();
            for side in [Side::Left, Side::Right] {
                let n = if side == Side::Left { 0.0 } else { 1.0 };
                let tr = p.traces(side, 0.4, 0.6);
                let th = p.theta(n, 0.4, 0.6);
                let d = expcos_derivatives(th);
                assert!((tr.uxx() - p.k.powi(2) * d[2]).abs() < 1e-12);
                assert!((tr.uxxxx() - p.k.powi(4) * d[4]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn small_periodic_study_is_deterministic() {
        let mut spec = ExperimentSpec::defaults(Case::Periodic1D);
        spec.n_list = vec![8, 12, 16];
        spec.c_list = vec![0.0];
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        write_csv(&a, &mut ca).unwrap();
        write_csv(&b, &mut cb).unwrap();
        assert_eq!(ca, cb);
        assert!(a[0].monotone());
        assert_eq!(render_svg(&a), render_svg(&b));
        let text = String::from_utf8(ca).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(1).unwrap().starts_with("periodic_1d,0,8,"));
    }

    #[test]
    fn empty_tables_give_header_only_csv() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "case,c,N,h,err_l2,err_linf,err_post,rate\n"
        );
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = ExperimentSpec::defaults(Case::Dirichlet1D);
        spec.n_list = vec![2];
        assert!(matches!(run_experiment(&spec), Err(BfdError::Config(_))));
        let mut spec = ExperimentSpec::defaults(Case::Dirichlet1D);
        spec.step = StepRule::Fixed(-1.0);
        assert!(spec.validate().is_err());
        let mut spec = ExperimentSpec::defaults(Case::Periodic1D);
        spec.n_list = vec![16, 8, 16];
        assert!(spec.validate().is_err());
        assert!("nonsense".parse::<Case>().is_err());
    }
}
