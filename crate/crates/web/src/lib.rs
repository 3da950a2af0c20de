//! Browser bindings for the block finite difference heat solver.
//!
//! Every entry point returns CSV text in the same layout as the command-line
//! tool, so the page only has to split lines.

use bfd_heat::dg::{default_c_range, write_stability_csv, Certifier};
use bfd_heat::experiments::{render_svg, run_experiment, write_csv, Case, ExperimentSpec};
use bfd_heat::symbol::{symbol_table, write_symbol_csv};
use bfd_heat::{BfdError, BlockGrid1D, SchemeParams};
use wasm_bindgen::prelude::*;

/// Largest block count accepted by [`symbol_csv`]; the check is a dense
/// eigensolve.
pub const MAX_SYMBOL_BLOCKS: usize = 96;
/// Largest block count accepted by [`convergence`].
pub const MAX_RUN_BLOCKS: usize = 128;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn utf8(buf: Vec<u8>) -> String {
    String::from_utf8(buf).expect("CSV writers emit UTF-8")
}

/// Symbol table of the periodic operator on `[0, 2 pi]`:
/// `omega,nu,re(qhat1),im(qhat1),re(qhat2),im(qhat2),mismatch`.
#[wasm_bindgen]
pub fn symbol_csv(n: usize, c: f64) -> Result<String, JsError> {
    if n > MAX_SYMBOL_BLOCKS {
        return Err(js_err(format!("N is limited to {MAX_SYMBOL_BLOCKS} here")));
    }
    let grid = BlockGrid1D::new(n, 0.0, 2.0 * std::f64::consts::PI).map_err(js_err)?;
    let table = symbol_table(SchemeParams::new(c).map_err(js_err)?, &grid).map_err(js_err)?;
    let mut buf = Vec::new();
    write_symbol_csv(&table, &mut buf).map_err(js_err)?;
    Ok(utf8(buf))
}

/// Energy-form certification at `points` equispaced values of `c` in
/// `[-0.97, 0.97]`: `c,form,min_eig,max_eig,verdict`.
#[wasm_bindgen]
pub fn stability_csv(points: usize) -> Result<String, JsError> {
    if !(2..=65).contains(&points) {
        return Err(js_err("use between 2 and 65 points"));
    }
    let (lo, hi) = default_c_range();
    let reports = Certifier::new()
        .and_then(|c| c.scan(&lo, &hi, points))
        .map_err(js_err)?;
    let mut buf = Vec::new();
    write_stability_csv(&reports, &mut buf).map_err(js_err)?;
    Ok(utf8(buf))
}

/// A 1D convergence study. Returns the CSV table followed by a blank line
/// and the log-log chart as SVG.
#[wasm_bindgen]
pub fn convergence(case: &str, c_list: &str, n_list: &str) -> Result<String, JsError> {
    let case: Case = case.parse().map_err(js_err)?;
    if case.dimension() != 1 {
        return Err(js_err("the browser demo runs 1D cases only"));
    }
    let mut spec = ExperimentSpec::defaults(case);
    spec.c_list = bfd_heat::config::parse_list(c_list).map_err(|e| js_err(BfdError::Config(e)))?;
    spec.n_list = bfd_heat::config::parse_list(n_list).map_err(|e| js_err(BfdError::Config(e)))?;
    if spec.n_list.iter().any(|&n| n > MAX_RUN_BLOCKS) {
        return Err(js_err(format!("N is limited to {MAX_RUN_BLOCKS} here")));
    }
    let tables = run_experiment(&spec).map_err(js_err)?;
    let mut buf = Vec::new();
    write_csv(&tables, &mut buf).map_err(js_err)?;
    Ok(format!("{}\n{}", utf8(buf), render_svg(&tables)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_rows_match_block_count() {
        let csv = symbol_csv(8, -4.0 / 13.0).unwrap();
        assert_eq!(csv.lines().count(), 9);
    }

    #[test]
    fn stability_reports_four_forms_per_c() {
        let csv = stability_csv(3).unwrap();
        assert_eq!(csv.lines().count(), 1 + 3 * 4);
        assert!(!csv.contains("fail"));
    }

    #[test]
    fn convergence_returns_table_and_chart() {
        let out = convergence("periodic_1d", "0", "8,12,16").unwrap();
        let (csv, svg) = out.split_once("\n\n").unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(svg.starts_with("<svg"));
    }
}
