//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the run fails if any criterion fails. Runs without the test harness so
//! the lines are always shown.

use std::f64::consts::PI;
use std::sync::Arc;

use bfd_heat::dg::{
    blocks_to_f64, interior_target, q, reconstruct_blocks, Certifier, FreeParams, Rational,
    COEFF_NAMES,
};
use bfd_heat::experiments::{fit_rate, run_experiment, Case, ConvergenceTable, ExperimentSpec};
use bfd_heat::operator::{spectral_abscissa, truncation_error, BoundaryData, EdgeValues, Side};
use bfd_heat::postprocess::FilterKind;
use bfd_heat::symbol::{measure_error_evolution, predict_error_evolution, verify_against_operator};
use bfd_heat::{
    BlockGrid1D, BlockGrid2D, BlockOperator, BoundaryCondition, SchemeParams, C_OPTIMAL,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Criterion = (&'static str, fn() -> Outcome);

const CS: [f64; 4] = [0.0, -0.25, C_OPTIMAL, 0.5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn symbol_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [8, 16, 32] {
        for c in CS {
            let grid = BlockGrid1D::new(n, 0.0, 2.0 * PI).unwrap();
            let chk = verify_against_operator(SchemeParams::new(c).unwrap(), &grid).unwrap();
            worst = worst.max(chk.max_mismatch);
        }
    }
    outcome(
        worst <= 1e-9,
        format!("max relative mismatch {worst:.2e} (limit 1e-9)"),
    )
}

fn rates(tables: &[ConvergenceTable]) -> Vec<f64> {
    tables
        .iter()
        .map(|t| t.fitted_rate().unwrap_or(f64::NAN))
        .collect()
}

fn periodic_1d() -> Outcome {
    let spec = ExperimentSpec::defaults(Case::Periodic1D);
    assert_eq!(spec.postprocess, FilterKind::Spectral);
    let tables = run_experiment(&spec).unwrap();
    let r = rates(&tables);
    let post = tables[2].post_rate().unwrap_or(f64::NAN);
    let inside = |v: f64, lo: f64, hi: f64| (lo..=hi).contains(&v);
    let pass = inside(r[0], 3.7, 4.4)
        && inside(r[1], 3.7, 4.4)
        && inside(r[2], 4.7, 5.4)
        && inside(post, 5.6, 6.5);
    outcome(
        pass,
        format!(
            "rates c=0 {:.3}, c=-1/4 {:.3}, c=-4/13 {:.3}, filtered c=-4/13 {post:.3}",
            r[0], r[1], r[2]
        ),
    )
}

fn dirichlet_1d() -> Outcome {
    let spec = ExperimentSpec::defaults(Case::Dirichlet1D);
    let tables = run_experiment(&spec).unwrap();
    let r = rates(&tables);
    let monotone = tables.iter().all(|t| t.monotone());
    let gain = r[2] - r[0];
    let pass = monotone && r.iter().all(|&v| v >= 3.7) && gain >= 0.5;
    outcome(
        pass,
        format!(
            "monotone {monotone}, rates c=0 {:.3}, c=-1/4 {:.3}, c=-4/13 {:.3}, gain {gain:.3} (filtered c=-4/13 {:.3})",
            r[0],
            r[1],
            r[2],
            tables[2].post_rate().unwrap_or(f64::NAN)
        ),
    )
}

fn two_d() -> Outcome {
    let mut detail = Vec::new();
    let mut pass = true;
    for (case, n_list) in [
        (Case::Periodic2D, vec![16, 24, 32]),
        (Case::Dirichlet2D, vec![12, 16, 24]),
    ] {
        let mut spec = ExperimentSpec::defaults(case);
        spec.n_list = n_list;
        let tables = run_experiment(&spec).unwrap();
        let r = rates(&tables);
        let ok = r[2] > r[1] && r[1] >= r[0] && r[2] >= 4.5;
        pass &= ok;
        let mut d = format!("{case}: {:.3} / {:.3} / {:.3}", r[0], r[1], r[2]);
        if case == Case::Periodic2D {
            let post = tables[2].post_rate().unwrap_or(f64::NAN);
            pass &= post >= 5.5;
            d.push_str(&format!(", filtered {post:.3}"));
        }
        detail.push(d);
    }
    outcome(
        pass,
        format!("rates for c = 0 / -1/4 / -4/13: {}", detail.join("; ")),
    )
}

fn stability() -> Outcome {
    let cert = Certifier::new().unwrap();
    let (lo, hi) = bfd_heat::dg::default_c_range();
    let reports = cert.scan(&lo, &hi, 33).unwrap();
    let failed: Vec<f64> = reports
        .iter()
        .filter(|r| !r.passes())
        .map(|r| r.c_f64())
        .collect();
    let worst_det = reports
        .iter()
        .map(|r| r.interior.scaled_det.abs())
        .fold(0.0, f64::max);
    let worst_t = reports
        .iter()
        .map(|r| r.truncated.max_eig())
        .fold(f64::NEG_INFINITY, f64::max);
    let worst_theta = reports
        .iter()
        .map(|r| r.theta_half.max_eig().max(r.theta_three_halves.max_eig()))
        .fold(f64::NEG_INFINITY, f64::max);
    outcome(
        failed.is_empty(),
        format!(
            "33 c values: failures {failed:?}; max scaled |det M| {worst_det:.1e}, max eig M' {worst_t:.3e}, max eig boundary forms {worst_theta:.1e}"
        ),
    )
}

fn random_rational(rng: &mut StdRng, range: i64) -> Rational {
    q(rng.random_range(-range..=range), rng.random_range(1..=24))
}

fn penalty_reconstruction() -> Outcome {
    let cert = Certifier::new().unwrap();
    let fam = cert.interior_family();
    let mut rng = StdRng::seed_from_u64(20240613);
    let mut worst: f64 = 0.0;
    let mut exact = true;
    for _ in 0..5 {
        let c = q(rng.random_range(-23..=23), 24);
        let p = FreeParams([0; 4].map(|_| random_rational(&mut rng, 100)));
        let k = fam.evaluate(&c, &p);
        let got = reconstruct_blocks(&k.to_f64());
        let want = blocks_to_f64(&interior_target(&c));
        for b in 0..3 {
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((got[b][i][j] - want[b][i][j]).abs());
                }
            }
        }
        let [c2, c3, e2, e3] = p.0.clone();
        let closed_form = [
            q(7, 3),
            c2.clone(),
            c3.clone(),
            q(1, 2),
            -&c2 - q(14, 3),
            q(7, 3),
            q(-1, 2),
            -&c2 - &c3 - q(7, 3),
            (q(-8, 1) * &c - q(5, 1)) / q(18, 1),
            e2.clone(),
            e3.clone(),
            (-&c - q(1, 1)) / q(18, 1),
            -&c2 - &e2 - q(7, 3),
            (q(8, 1) * &c + q(5, 1)) / q(18, 1),
            (-&c - q(1, 1)) / q(18, 1),
            (q(5, 1) * &c - q(9, 1) * (&c2 + &c3 + &e2 + &e3) - q(13, 1)) / q(9, 1),
        ];
        for (i, v) in closed_form.iter().enumerate() {
            if k.get(COEFF_NAMES[i]) != Some(v) {
                exact = false;
            }
        }
    }
    outcome(
        worst <= 1e-12 && exact,
        format!("max block deviation {worst:.1e} (limit 1e-12); closed-form family reproduced exactly: {exact}"),
    )
}

fn fixed_edges(u: fn(f64) -> [f64; 3]) -> Arc<dyn BoundaryData> {
    Arc::new(move |side: Side, _s: f64, _t: f64| {
        let [g, uxx, uxxxx] = u(if side == Side::Left { 0.0 } else { 1.0 });
        EdgeValues { g, uxx, uxxxx }
    })
}

fn smooth(x: f64) -> [f64; 3] {
    // u = sin(2x + 1): value, second and fourth derivatives.
    let s = (2.0 * x + 1.0).sin();
    [s, -4.0 * s, 16.0 * s]
}

fn truncation_orders() -> Outcome {
    let ns = [16usize, 32, 64];
    let mut interior_slope = f64::INFINITY;
    let mut boundary_slope = f64::INFINITY;
    for c in [-0.25, C_OPTIMAL, 0.5] {
        let params = SchemeParams::new(c).unwrap();
        let (mut hs, mut ti, mut tb) = (Vec::new(), Vec::new(), Vec::new());
        for &n in &ns {
            let grid = BlockGrid1D::new(n, 0.0, 2.0 * PI).unwrap();
            let op = BlockOperator::periodic(params, &grid).unwrap();
            let te = truncation_error(&op, f64::sin, |x| -x.sin(), 0.0).unwrap();
            ti.push(te.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            let h = 1.0 / n as f64;
            let closed = BlockOperator::dirichlet(
                params,
                &BlockGrid1D::new(n, 0.0, 1.0).unwrap(),
                fixed_edges(smooth),
            )
            .unwrap();
            let te_c = truncation_error(&closed, |x| smooth(x)[0], |x| smooth(x)[1], 0.0).unwrap();
            // Interior stencil at the same nodes: the grid extended by two
            // cells on each side puts them in interior rows.
            let ext = BlockOperator::dirichlet(
                params,
                &BlockGrid1D::new(n + 4, -2.0 * h, 1.0 + 2.0 * h).unwrap(),
                fixed_edges(smooth),
            )
            .unwrap();
            let te_e = truncation_error(&ext, |x| smooth(x)[0], |x| smooth(x)[1], 0.0).unwrap();
            let m = 2 * n;
            let diff = [0, 1, m - 2, m - 1]
                .iter()
                .map(|&k| (te_c[k] - te_e[k + 4]).abs())
                .fold(0.0, f64::max);
            hs.push(h);
            tb.push(diff);
        }
        interior_slope = interior_slope.min(fit_rate(&hs, &ti).unwrap());
        boundary_slope = boundary_slope.min(fit_rate(&hs, &tb).unwrap());
    }
    let mut worst_poly: f64 = 0.0;
    let p = |x: f64| 1.0 + x - 2.0 * x * x + 0.5 * x.powi(3) - 0.3 * x.powi(4);
    let pxx = |x: f64| -4.0 + 3.0 * x - 3.6 * x * x;
    for c in CS {
        let n = 16;
        let grid = BlockGrid1D::new(n, 0.0, 1.0).unwrap();
        let op =
            BlockOperator::dirichlet(SchemeParams::new(c).unwrap(), &grid, fixed_edges(smooth))
                .unwrap();
        let te = truncation_error(&op, p, pxx, 0.0).unwrap();
        let scale = 2.0 / grid.h().powi(2);
        let interior = te[2..2 * n - 2].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        worst_poly = worst_poly.max(interior / scale);
    }
    outcome(
        interior_slope >= 2.8 && boundary_slope >= 3.8 && worst_poly <= 1e-10,
        format!(
            "interior slope {interior_slope:.3} (>= 2.8), boundary-minus-interior slope {boundary_slope:.3} (>= 3.8), quartic residual {worst_poly:.1e} x scale"
        ),
    )
}

fn error_evolution() -> Outcome {
    let (n, t) = (16usize, 1.0);
    let h = 2.0 * PI / n as f64;
    let mut worst_ratio: f64 = 0.0;
    for c in [-0.25, C_OPTIMAL, 0.5] {
        let (lo, hi) = measure_error_evolution(1, n, c, t).unwrap();
        let pred = predict_error_evolution(1.0, c, h, t).high_mode.norm();
        worst_ratio = worst_ratio.max(((hi / lo).norm() / pred - 1.0).abs());
    }
    let (_, hi0) = measure_error_evolution(1, n, 0.0, t).unwrap();
    let ns = [8usize, 16, 32];
    let hs: Vec<f64> = ns.iter().map(|&n| 2.0 * PI / n as f64).collect();
    let dev: Vec<f64> = ns
        .iter()
        .map(|&n| (measure_error_evolution(1, n, C_OPTIMAL, t).unwrap().0 - (-t).exp()).norm())
        .collect();
    let slope = fit_rate(&hs, &dev).unwrap();
    outcome(
        worst_ratio <= 0.2 && hi0.norm() <= 1e-12 && slope >= 5.5,
        format!(
            "high-mode magnitude off by {:.1}% (<= 20%), c=0 high mode {:.1e}, low-mode deviation slope at c=-4/13 {slope:.3} (>= 5.5)",
            100.0 * worst_ratio,
            hi0.norm()
        ),
    )
}

fn spectrum() -> Outcome {
    let zero: Arc<dyn BoundaryData> = Arc::new(|_: Side, _: f64, _: f64| EdgeValues::default());
    let mut worst = f64::NEG_INFINITY;
    for c in CS {
        let params = SchemeParams::new(c).unwrap();
        for n in [8, 16, 32] {
            let grid = BlockGrid1D::new(n, 0.0, 2.0 * PI).unwrap();
            let p = spectral_abscissa(&BlockOperator::periodic(params, &grid).unwrap()).unwrap();
            let d =
                spectral_abscissa(&BlockOperator::dirichlet(params, &grid, zero.clone()).unwrap())
                    .unwrap();
            // The 2D operators are Kronecker sums of these, so their spectra
            // are pairwise sums.
            worst = worst.max(p).max(d).max(2.0 * p).max(2.0 * d);
        }
        for n in [4, 8] {
            let grid = BlockGrid2D::square(n, 0.0, 2.0 * PI).unwrap();
            for bc in [BoundaryCondition::Periodic, BoundaryCondition::Dirichlet] {
                let bd = (bc == BoundaryCondition::Dirichlet).then(|| zero.clone());
                let op = BlockOperator::two_d(params, &grid, bc, bd.clone(), bd).unwrap();
                worst = worst.max(spectral_abscissa(&op).unwrap());
            }
        }
    }
    outcome(
        worst <= 1e-10,
        format!("max Re lambda {worst:.2e} (limit 1e-10)"),
    )
}

fn main() -> std::process::ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 symbol-operator equivalence", symbol_equivalence),
        ("2 convergence, 1D periodic", periodic_1d),
        ("3 convergence, 1D Dirichlet", dirichlet_1d),
        ("4 convergence, 2D", two_d),
        ("5 stability certification", stability),
        ("6 penalty reconstruction", penalty_reconstruction),
        ("7 truncation orders", truncation_orders),
        ("8 error evolution", error_evolution),
        ("9 spectrum non-positivity", spectrum),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let o = check();
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed.push(name);
        }
    }
    if failed.is_empty() {
        std::process::ExitCode::SUCCESS
    } else {
        eprintln!("failed: {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
