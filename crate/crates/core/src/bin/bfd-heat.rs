use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bfd_heat::config::{parse_list, Config};
use bfd_heat::dg::{certify_2d, default_c_range, write_stability_csv, Certifier};
use bfd_heat::experiments::{emit_artifacts, run_experiment, Case, ExperimentSpec, StepRule};
use bfd_heat::postprocess::FilterKind;
use bfd_heat::symbol::{symbol_table, verify_against_operator, write_symbol_csv};
use bfd_heat::time::Method;
use bfd_heat::{BfdError, BlockGrid1D, Result, SchemeParams, C_OPTIMAL};

/// Two-point block finite difference heat-equation suite.
#[derive(Parser)]
#[command(name = "bfd-heat", version)]
struct Cli {
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence study with CSV and SVG output.
    Run(RunArgs),
    /// Symbol table of the periodic operator.
    Symbol(SymbolArgs),
    /// Energy-stability certification over a grid of c values.
    Stability(StabilityArgs),
    /// Operator-versus-symbol and stability checks.
    Verify,
    /// Dump an operator in MatrixMarket format.
    Matrix(MatrixArgs),
}

#[derive(Args)]
struct RunArgs {
    /// periodic_1d, dirichlet_1d, periodic_2d or dirichlet_2d.
    #[arg(long)]
    case: Option<String>,
    /// Comma-separated c values.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    /// Comma-separated block counts.
    #[arg(long)]
    n: Option<String>,
    /// rk4 or gl6.
    #[arg(long)]
    integrator: Option<String>,
    /// none, spectral or poly.
    #[arg(long)]
    postprocess: Option<String>,
    /// Fixed time step (default: h for gl6, the stability bound for rk4).
    #[arg(long)]
    dt: Option<f64>,
    /// RK4 step as a multiple of the inverse spectral radius.
    #[arg(long)]
    cfl: Option<f64>,
    /// Halve dt until the errors settle (default: on for gl6).
    #[arg(long)]
    refine_dt: Option<bool>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SymbolArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Domain length.
    #[arg(long)]
    length: Option<f64>,
    /// CSV path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StabilityArgs {
    /// Number of equispaced c values in [-0.97, 0.97].
    #[arg(long)]
    c_grid: Option<usize>,
    /// CSV path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MatrixArgs {
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<Outcome> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Run(a) => run(a, &cfg),
        Command::Symbol(a) => symbol(a, &cfg),
        Command::Stability(a) => stability(a, &cfg),
        Command::Verify => verify(),
        Command::Matrix(a) => matrix(a, &cfg),
    }
}

fn pick<T: std::str::FromStr>(flag: Option<T>, cfg: &Config, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => cfg.parsed(key),
    }
}

fn pick_list<T: std::str::FromStr>(
    flag: Option<String>,
    cfg: &Config,
    key: &str,
) -> Result<Option<Vec<T>>>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(s) => parse_list(&s)
            .map(Some)
            .map_err(|e| BfdError::Config(format!("--{key}: {e}"))),
        None => cfg.list(key),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|source| BfdError::Io {
                    path: dir.to_path_buf(),
                    source,
                })?;
            }
            let f = File::create(p).map_err(|source| BfdError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn io_err(path: Option<&Path>) -> impl Fn(io::Error) -> BfdError + '_ {
    move |source| BfdError::Io {
        path: path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
        source,
    }
}

fn run(a: RunArgs, cfg: &Config) -> Result<Outcome> {
    cfg.check_keys(&[
        "case",
        "c",
        "n",
        "integrator",
        "postprocess",
        "dt",
        "cfl",
        "refine_dt",
        "t_final",
        "out",
    ])?;
    let case: Case = pick(a.case, cfg, "case")?
        .unwrap_or_else(|| "periodic_1d".into())
        .parse()?;
    let mut spec = ExperimentSpec::defaults(case);
    if let Some(c) = pick_list(a.c, cfg, "c")? {
        spec.c_list = c;
    }
    if let Some(n) = pick_list(a.n, cfg, "n")? {
        spec.n_list = n;
    }
    if let Some(m) = pick::<String>(a.integrator, cfg, "integrator")? {
        spec.method = m.parse::<Method>()?;
        spec.refine_dt = spec.method == Method::Gl6;
    }
    if let Some(p) = pick::<String>(a.postprocess, cfg, "postprocess")? {
        spec.postprocess = p.parse::<FilterKind>()?;
    }
    if let Some(cfl) = pick(a.cfl, cfg, "cfl")? {
        spec.step = StepRule::Default { cfl };
    }
    if let Some(dt) = pick(a.dt, cfg, "dt")? {
        spec.step = StepRule::Fixed(dt);
    }
    if let Some(r) = pick(a.refine_dt, cfg, "refine_dt")? {
        spec.refine_dt = r;
    }
    if let Some(t) = pick(a.t_final, cfg, "t_final")? {
        spec.t_final = t;
    }
    let out: PathBuf = pick(a.out, cfg, "out")?.unwrap_or_else(|| PathBuf::from("results"));
    let tables = run_experiment(&spec)?;
    let files = emit_artifacts(&tables, &out)?;
    let mut ok = true;
    for t in &tables {
        let rate = t
            .fitted_rate()
            .map_or_else(|| "-".into(), |r| format!("{r:.3}"));
        let post = t
            .post_rate()
            .map_or_else(|| "-".into(), |r| format!("{r:.3}"));
        let dt_ok = t.rows.iter().all(|r| r.dt_converged);
        println!(
            "{} c = {}: rate {rate}, filtered rate {post}{}{}",
            t.case,
            t.c,
            if t.monotone() {
                ""
            } else {
                ", errors not decreasing"
            },
            if dt_ok {
                ""
            } else {
                ", time step not converged"
            }
        );
        ok &= t.monotone() && dt_ok;
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(if ok { Outcome::Pass } else { Outcome::Fail })
}

fn symbol(a: SymbolArgs, cfg: &Config) -> Result<Outcome> {
    cfg.check_keys(&["n", "c", "length", "out"])?;
    let n = pick(a.n, cfg, "n")?.unwrap_or(32);
    let c = pick(a.c, cfg, "c")?.unwrap_or(C_OPTIMAL);
    let length = pick(a.length, cfg, "length")?.unwrap_or(2.0 * std::f64::consts::PI);
    let out: Option<PathBuf> = pick(a.out, cfg, "out")?;
    let grid = BlockGrid1D::new(n, 0.0, length)?;
    let table = symbol_table(SchemeParams::new(c)?, &grid)?;
    let mut w = output(out.as_deref())?;
    write_symbol_csv(&table, &mut w)
        .and_then(|_| w.flush())
        .map_err(io_err(out.as_deref()))?;
    let worst = table.iter().map(|(_, m)| *m).fold(0.0, f64::max);
    Ok(if worst <= 1e-9 {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn stability(a: StabilityArgs, cfg: &Config) -> Result<Outcome> {
    cfg.check_keys(&["c_grid", "out"])?;
    let n = pick(a.c_grid, cfg, "c_grid")?.unwrap_or(33);
    let out: Option<PathBuf> = pick(a.out, cfg, "out")?;
    let (lo, hi) = default_c_range();
    let reports = Certifier::new()?.scan(&lo, &hi, n)?;
    let mut w = output(out.as_deref())?;
    write_stability_csv(&reports, &mut w)
        .and_then(|_| w.flush())
        .map_err(io_err(out.as_deref()))?;
    let failed = reports.iter().filter(|r| !r.passes()).count();
    if failed > 0 {
        eprintln!(
            "{failed} of {} c values failed certification",
            reports.len()
        );
    }
    Ok(if failed == 0 {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn verify() -> Result<Outcome> {
    let mut ok = true;
    let mut line = |pass: bool, what: String| {
        println!("{} {what}", if pass { "PASS" } else { "FAIL" });
        ok &= pass;
    };
    for n in [8, 16, 32] {
        for c in [0.0, -0.25, C_OPTIMAL, 0.5] {
            let grid = BlockGrid1D::new(n, 0.0, 2.0 * std::f64::consts::PI)?;
            let chk = verify_against_operator(SchemeParams::new(c)?, &grid)?;
            line(
                chk.max_mismatch <= 1e-9,
                format!(
                    "symbol N = {n} c = {c:.4}: mismatch {:.2e}",
                    chk.max_mismatch
                ),
            );
        }
    }
    let cert = Certifier::new()?;
    let (lo, hi) = default_c_range();
    let reports = cert.scan(&lo, &hi, 33)?;
    let failed: Vec<f64> = reports
        .iter()
        .filter(|r| !r.passes())
        .map(|r| r.c_f64())
        .collect();
    line(
        failed.is_empty(),
        format!("energy forms on 33 c values in [-0.97, 0.97]: failures {failed:?}"),
    );
    for r in reports.iter().step_by(8) {
        let v = certify_2d(r, 6)?;
        line(
            v.pass,
            format!("2D c = {:.4}: max Re {:.2e}", v.c, v.max_re),
        );
    }
    Ok(if ok { Outcome::Pass } else { Outcome::Fail })
}

fn matrix(a: MatrixArgs, cfg: &Config) -> Result<Outcome> {
    use bfd_heat::operator::{BlockOperator, EdgeValues};
    use std::sync::Arc;
    cfg.check_keys(&["case", "n", "c", "out"])?;
    let case: Case = pick(a.case, cfg, "case")?
        .unwrap_or_else(|| "periodic_1d".into())
        .parse()?;
    let n = pick(a.n, cfg, "n")?.unwrap_or(8);
    let params = SchemeParams::new(pick(a.c, cfg, "c")?.unwrap_or(C_OPTIMAL))?;
    let out: Option<PathBuf> = pick(a.out, cfg, "out")?;
    let zero: Arc<dyn bfd_heat::operator::BoundaryData> = Arc::new(|_, _, _| EdgeValues::default());
    let op = match case {
        Case::Periodic1D => BlockOperator::periodic(params, &BlockGrid1D::new(n, 0.0, 1.0)?)?,
        Case::Dirichlet1D => {
            BlockOperator::dirichlet(params, &BlockGrid1D::new(n, 0.0, 1.0)?, zero)?
        }
        Case::Periodic2D | Case::Dirichlet2D => {
            let grid = bfd_heat::BlockGrid2D::square(n, 0.0, 1.0)?;
            let bd = (case == Case::Dirichlet2D).then_some(zero);
            BlockOperator::two_d(params, &grid, case.boundary(), bd.clone(), bd)?
        }
    };
    let mut w = output(out.as_deref())?;
    op.write_matrix_market(&mut w)
        .and_then(|_| w.flush())
        .map_err(io_err(out.as_deref()))?;
    Ok(Outcome::Pass)
}
