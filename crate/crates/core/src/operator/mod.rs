//! Assembly and application of the two-point block finite difference
//! second-derivative operator.
//!
//! In the interior the left node of cell `j` uses
//! `(1/(3h^2)) [(-1+c), (16-5c), (-30+10c), (16-10c), (-1+5c), -c]` on nodes
//! `m-2..=m+3`, and the right node uses the mirrored stencil on `m-3..=m+2`.
//! Collected per cell these are the 2x2 blocks `A`, `B`, `C` coupling a cell
//! to its left neighbour, itself and its right neighbour.
//!
//! With Dirichlet conditions the two nodes of each boundary cell use closed
//! stencils obtained by eliminating ghost nodes at `h/4` and `3h/4` outside
//! the boundary. The eliminated ghosts leave an affine source built from the
//! boundary value and the boundary derivatives `u_xx`, `u_xxxx`.

mod boundary;
mod line;
mod sparse;

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix2};

pub use boundary::{ghost_value, BoundaryData, EdgeValues, PdeDerived, PdeTraces, Side};
use line::LineOperator;
pub(crate) use line::{closure_row0, closure_row1, left_row, right_row};
pub use sparse::SparseMatrix;

use crate::error::{BfdError, Result};
use crate::grid::{BlockGrid1D, BlockGrid2D, MIN_BLOCKS};

/// The free parameter of the scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub c: f64,
}

impl SchemeParams {
    pub fn new(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(BfdError::InvalidArgument(format!(
                "c must be finite, got {c}"
            )));
        }
        Ok(Self { c })
    }

    /// Whether `c` lies in the open interval where stability is certified.
    pub fn in_certified_range(&self) -> bool {
        self.c > -1.0 && self.c < 1.0
    }
}

/// Left-neighbour, self and right-neighbour coupling blocks of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockTriple {
    pub a: Matrix2<f64>,
    pub b: Matrix2<f64>,
    pub c: Matrix2<f64>,
}

impl BlockTriple {
    /// Row sums of `[A | B | C]`.
    pub fn row_sums(&self) -> [f64; 2] {
        let s = self.a + self.b + self.c;
        [s[(0, 0)] + s[(0, 1)], s[(1, 0)] + s[(1, 1)]]
    }
}

/// Unscaled interior blocks (multiply by `1/(3h^2)`).
pub(crate) fn unit_interior_blocks(c: f64) -> BlockTriple {
    BlockTriple {
        a: Matrix2::new(-1.0 + c, 16.0 - 5.0 * c, -c, -1.0 + 5.0 * c),
        b: Matrix2::new(
            -30.0 + 10.0 * c,
            16.0 - 10.0 * c,
            16.0 - 10.0 * c,
            -30.0 + 10.0 * c,
        ),
        c: Matrix2::new(-1.0 + 5.0 * c, -c, 16.0 - 5.0 * c, -1.0 + c),
    }
}

/// Interior blocks scaled by `1/(3h^2)`.
pub fn interior_blocks(params: SchemeParams, h: f64) -> Result<BlockTriple> {
    if !(h > 0.0) {
        return Err(BfdError::InvalidArgument(format!(
            "h must be positive, got {h}"
        )));
    }
    let k = 1.0 / (3.0 * h * h);
    let t = unit_interior_blocks(params.c);
    Ok(BlockTriple {
        a: t.a * k,
        b: t.b * k,
        c: t.c * k,
    })
}

/// Blocks of the first cell under the Dirichlet closure: `a` is zero, `b`
/// the closed self block and `c` the usual right-neighbour block.
pub fn left_boundary_blocks(params: SchemeParams, h: f64) -> Result<BlockTriple> {
    let mut t = interior_blocks(params, h)?;
    let (r0, _) = closure_row0(params.c);
    let (r1, _) = closure_row1(params.c);
    let k = 1.0 / (3.0 * h * h);
    t.a = Matrix2::zeros();
    t.b = Matrix2::new(r0[0], r0[1], r1[0], r1[1]) * k;
    Ok(t)
}

/// Boundary condition of a line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Periodic,
    Dirichlet,
}

impl std::fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Periodic => "periodic",
            Self::Dirichlet => "dirichlet",
        })
    }
}

#[derive(Clone)]
enum Geometry {
    OneD(BlockGrid1D),
    TwoD(BlockGrid2D),
}

/// Assembled operator `u -> Q u + s(t)`.
///
/// The sparse matrix `Q` and the affine boundary source `s(t)` are kept
/// apart so that implicit integrators can factor `Q` alone, while
/// [`BlockOperator::apply_affine`] evaluates `Q u + s(t)` in a
/// cancellation-free form.
#[derive(Clone)]
pub struct BlockOperator {
    bc: BoundaryCondition,
    params: SchemeParams,
    geometry: Geometry,
    lines: Vec<LineOperator>,
    boundary: Vec<Option<Arc<dyn BoundaryData>>>,
    matrix: SparseMatrix,
}

impl std::fmt::Debug for BlockOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlockOperator")
            .field("bc", &self.bc)
            .field("c", &self.params.c)
            .field("size", &self.size())
            .field("nnz", &self.matrix.nnz())
            .finish()
    }
}

fn check_blocks(n: usize) -> Result<()> {
    if n < MIN_BLOCKS {
        return Err(BfdError::InvalidSize(format!(
            "need at least {MIN_BLOCKS} blocks, got {n}"
        )));
    }
    Ok(())
}

fn csr_from(n: usize, triplets: &[(usize, usize, f64)]) -> SparseMatrix {
    SparseMatrix::from_triplets(n, triplets)
}

impl BlockOperator {
    /// Block-circulant periodic operator on a 1D grid.
    pub fn periodic(params: SchemeParams, grid: &BlockGrid1D) -> Result<Self> {
        check_blocks(grid.n_blocks())?;
        Self::build_1d(params, grid, BoundaryCondition::Periodic, None)
    }

    /// Dirichlet-closed operator on a 1D grid.
    pub fn dirichlet(
        params: SchemeParams,
        grid: &BlockGrid1D,
        bd: Arc<dyn BoundaryData>,
    ) -> Result<Self> {
        check_blocks(grid.n_blocks())?;
        Self::build_1d(params, grid, BoundaryCondition::Dirichlet, Some(bd))
    }

    fn build_1d(
        params: SchemeParams,
        grid: &BlockGrid1D,
        bc: BoundaryCondition,
        bd: Option<Arc<dyn BoundaryData>>,
    ) -> Result<Self> {
        let line = LineOperator::new(grid.n_blocks(), grid.h(), params, bc);
        let mut trip = Vec::new();
        line.triplets(0, 1, &mut trip);
        let matrix = csr_from(line.len(), &trip);
        Ok(Self {
            bc,
            params,
            geometry: Geometry::OneD(grid.clone()),
            lines: vec![line],
            boundary: vec![bd],
            matrix,
        })
    }

    /// Tensor-product operator `Qx (x) I + I (x) Qy` on a 2D grid.
    ///
    /// For Dirichlet conditions `bd_x` supplies data on the edges `x = a`,
    /// `x = b` (as functions of `y`) and `bd_y` on `y = a`, `y = b`. Each
    /// directional closure only touches nodes of its own grid line, so no
    /// corner ghost values are needed.
    pub fn two_d(
        params: SchemeParams,
        grid: &BlockGrid2D,
        bc: BoundaryCondition,
        bd_x: Option<Arc<dyn BoundaryData>>,
        bd_y: Option<Arc<dyn BoundaryData>>,
    ) -> Result<Self> {
        check_blocks(grid.x().n_blocks())?;
        check_blocks(grid.y().n_blocks())?;
        if bc == BoundaryCondition::Dirichlet && (bd_x.is_none() || bd_y.is_none()) {
            return Err(BfdError::Config(
                "Dirichlet 2D operator needs boundary data in both directions".into(),
            ));
        }
        let lx = LineOperator::new(grid.x().n_blocks(), grid.x().h(), params, bc);
        let ly = LineOperator::new(grid.y().n_blocks(), grid.y().h(), params, bc);
        let (nx, ny) = (lx.len(), ly.len());
        let mut trip = Vec::new();
        for q in 0..ny {
            lx.triplets(q, ny, &mut trip);
        }
        for p in 0..nx {
            ly.triplets(p * ny, 1, &mut trip);
        }
        let matrix = csr_from(nx * ny, &trip);
        Ok(Self {
            bc,
            params,
            geometry: Geometry::TwoD(grid.clone()),
            lines: vec![lx, ly],
            boundary: vec![bd_x, bd_y],
            matrix,
        })
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn params(&self) -> SchemeParams {
        self.params
    }

    pub fn dimension(&self) -> usize {
        self.lines.len()
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn grid_1d(&self) -> Option<&BlockGrid1D> {
        match &self.geometry {
            Geometry::OneD(g) => Some(g),
            Geometry::TwoD(_) => None,
        }
    }

    pub fn grid_2d(&self) -> Option<&BlockGrid2D> {
        match &self.geometry {
            Geometry::OneD(_) => None,
            Geometry::TwoD(g) => Some(g),
        }
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.size(), self.size());
        for (r, c, v) in self.matrix.triplet_iter() {
            d[(r, c)] += v;
        }
        d
    }

    /// `Q u` without the boundary source.
    pub fn matvec(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size()];
        self.matvec_into(u, &mut out);
        out
    }

    pub fn matvec_into(&self, u: &[f64], out: &mut [f64]) {
        self.matrix.matvec_into(u, out);
    }

    /// `Q u + s(t)`, evaluated row by row in difference form.
    pub fn apply_affine(&self, u: &[f64], t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.size()];
        self.apply_affine_into(u, t, &mut out);
        out
    }

    /// Writes `Q u + s(t)` into `out`.
    pub fn apply_affine_into(&self, u: &[f64], t: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let edge = |axis: usize, s: f64| {
            self.boundary[axis]
                .as_ref()
                .map(|bd| (bd.edge(Side::Left, s, t), bd.edge(Side::Right, s, t)))
        };
        match &self.geometry {
            Geometry::OneD(_) => self.lines[0].apply_affine_into(u, 0, 1, edge(0, 0.0), out),
            Geometry::TwoD(g) => {
                let ny = self.lines[1].len();
                for (q, &y) in g.y().nodes().iter().enumerate() {
                    self.lines[0].apply_affine_into(u, q, ny, edge(0, y), out);
                }
                for (p, &x) in g.x().nodes().iter().enumerate() {
                    self.lines[1].apply_affine_into(u, p * ny, 1, edge(1, x), out);
                }
            }
        }
    }

    /// The affine source `s(t)` alone.
    pub fn boundary_source(&self, t: f64) -> Vec<f64> {
        self.apply_affine(&vec![0.0; self.size()], t)
    }

    /// Matrix-market coordinate dump of `Q`.
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.size(), self.size(), self.matrix.nnz())?;
        for (r, c, v) in self.matrix.triplet_iter() {
            writeln!(w, "{} {} {:e}", r + 1, c + 1, v)?;
        }
        Ok(())
    }

    pub fn save_matrix_market(&self, path: &Path) -> Result<()> {
        let io = |source| BfdError::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = std::fs::File::create(path).map_err(io)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_matrix_market(&mut w).map_err(io)?;
        w.flush().map_err(io)
    }
}

/// `T_e = u_xx - (Q u + s)` at time `t` on a 1D operator, for an exact
/// solution `u` with second derivative `uxx`.
pub fn truncation_error(
    op: &BlockOperator,
    u: impl Fn(f64) -> f64,
    uxx: impl Fn(f64) -> f64,
    t: f64,
) -> Result<Vec<f64>> {
    let grid = op
        .grid_1d()
        .ok_or_else(|| BfdError::Unsupported("truncation_error expects a 1D operator".into()))?;
    let qu = op.apply_affine(&grid.project(&u), t);
    Ok(grid
        .nodes()
        .iter()
        .zip(qu)
        .map(|(&x, q)| uxx(x) - q)
        .collect())
}

/// Eigenvalues of a dense real matrix via a real Schur decomposition.
///
/// The QR iteration stops at a relative sub-diagonal tolerance of `1e-14`;
/// a tolerance at machine epsilon may never be met for matrices with
/// repeated eigenvalues.
pub fn dense_eigenvalues(m: DMatrix<f64>) -> Result<Vec<num_complex::Complex64>> {
    let n = m.nrows();
    let schur = nalgebra::Schur::try_new(m, 1e-14, 1000 * n.max(10))
        .ok_or_else(|| BfdError::Eigen(format!("Schur iteration did not converge (n = {n})")))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Dense eigenvalues of the operator matrix.
pub fn eigenvalues(op: &BlockOperator) -> Result<Vec<num_complex::Complex64>> {
    dense_eigenvalues(op.to_dense())
}

/// Largest real part over the spectrum.
pub fn spectral_abscissa(op: &BlockOperator) -> Result<f64> {
    Ok(eigenvalues(op)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}
