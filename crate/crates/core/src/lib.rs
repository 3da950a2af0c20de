//! Two-point block finite difference (BFD) solvers for the heat equation
//! `u_t = u_xx + F` in one and two dimensions.
//!
//! Each cell of width `h` carries two nodes at `x_j ± h/4`, and each node has
//! its own six-point stencil with a free parameter `c`. The crate provides:
//!
//! - [`grid`]: block grids, projection and discrete norms.
//! - [`operator`]: periodic and Dirichlet-closed operator assembly, 2D tensor
//!   products, truncation errors and matrix-market export.
//! - [`symbol`]: per-frequency 2x2 symbol analysis and error-evolution
//!   predictions.
//! - [`dg`]: the equivalent discontinuous Galerkin weak form, penalty
//!   coefficient solve, interface energy forms and their certification.
//! - [`time`]: classical RK4 and 3-stage Gauss-Legendre integrators.
//! - [`postprocess`]: spectral high-mode filter and batched polynomial filter.
//! - [`experiments`]: manufactured problems, convergence studies and
//!   CSV/SVG artifacts.

// Index loops mirror the matrix formulas; `!(x > 0.0)` also rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dg;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod operator;
pub mod postprocess;
pub mod symbol;
pub mod time;

pub use error::{BfdError, Result};
pub use grid::{BlockGrid1D, BlockGrid2D, NormKind};
pub use operator::{BlockOperator, BoundaryCondition, SchemeParams};

/// The parameter value that cancels the `h^4` term of the resolved symbol.
pub const C_OPTIMAL: f64 = -4.0 / 13.0;
