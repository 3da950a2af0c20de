//! Discontinuous Galerkin weak form whose mass-matrix inverse reproduces the
//! block stencil.
//!
//! Each cell carries the nodal basis `phi_a = 1/2 - 2s`, `phi_b = 1/2 + 2s`
//! on `s in [-1/2, 1/2]` (unit cell). The right-hand side tested against
//! `v` is
//!
//! ```text
//! -int u_x v_x
//!   + (C1 u+ + C2 u- + C3 u_x- + C4 u_x+) v        at the right interface
//!   + (D1 u+ + D2 u- + D3 u_x- + D4 u_x+) v        at the left interface
//!   + v_x (E1 u+ + E2 u- + E3 u_x- + E4 u_x+)      at the right interface
//!   + v_x (F1 u+ + F2 u- + F3 u_x- + F4 u_x+)      at the left interface
//! ```
//!
//! With the usual `h` scalings of the sixteen coefficients the system is
//! `h`-independent, so everything here is on the unit cell.

use num_traits::Zero;

use super::rational::{q, solve_square, to_f64, LinC, Rational};
use crate::error::{BfdError, Result};

/// Number of penalty coefficients.
pub const N_COEFFS: usize = 16;
/// Names in storage order.
pub const COEFF_NAMES: [&str; N_COEFFS] = [
    "C1", "C2", "C3", "C4", "D1", "D2", "D3", "D4", "E1", "E2", "E3", "E4", "F1", "F2", "F3", "F4",
];
/// Storage indices of the free parameters `C2, C3, E2, E3`.
pub const FREE_INDICES: [usize; 4] = [1, 2, 9, 10];

/// Three 2x2 blocks `(A, B, C)` acting on the left neighbour, the cell
/// itself and the right neighbour, on the unit cell.
pub type Blocks = [[[Rational; 2]; 2]; 3];

/// Values of `C2, C3, E2, E3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeParams(pub [Rational; 4]);

impl FreeParams {
    /// Interior choice used by the certification: `C2 = -7/3`,
    /// `C3 = (4c + 7)/9`, `E2 = 0`, `E3 = 1/9`.
    pub fn certified_interior(c: &Rational) -> Self {
        Self([
            q(-7, 3),
            (q(4, 1) * c + q(7, 1)) / q(9, 1),
            q(0, 1),
            q(1, 9),
        ])
    }

    /// Boundary choice used by the certification: `C2 = c/24 - 37/8`,
    /// `C3 = 665/144 - 7c/144`, `E2 = 0`, `E3 = (515c - 1789)/1152`.
    pub fn certified_boundary(c: &Rational) -> Self {
        Self([
            c / q(24, 1) - q(37, 8),
            q(665, 144) - q(7, 144) * c,
            q(0, 1),
            (q(515, 1) * c - q(1789, 1)) / q(1152, 1),
        ])
    }

    /// Interior choice from the reference closed forms: `C2 = -7`, `C3 = 25/6`,
    /// `E2 = (8c + 89)/18`, `E3 = (c - 27)/6`.
    pub fn reference_interior(c: &Rational) -> Self {
        Self([
            q(-7, 1),
            q(25, 6),
            (q(8, 1) * c + q(89, 1)) / q(18, 1),
            (c - q(27, 1)) / q(6, 1),
        ])
    }

    /// Boundary choice from the reference closed forms: `C2 = -7`, `C3 = 0`,
    /// `E2 = 0`, `E3 = 25/3 + c/6`.
    pub fn reference_boundary(c: &Rational) -> Self {
        Self([q(-7, 1), q(0, 1), q(0, 1), q(25, 3) + c / q(6, 1)])
    }
}

/// A full set of sixteen coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PenaltyCoefficients(pub [Rational; N_COEFFS]);

impl PenaltyCoefficients {
    pub fn get(&self, name: &str) -> Option<&Rational> {
        COEFF_NAMES
            .iter()
            .position(|&n| n == name)
            .map(|i| &self.0[i])
    }

    pub fn to_f64(&self) -> [f64; N_COEFFS] {
        std::array::from_fn(|i| to_f64(&self.0[i]))
    }
}

/// The solution set: each coefficient is `constant + sum_k free[k] * p_k`
/// with every entry affine in `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PenaltyFamily {
    pub constant: [LinC; N_COEFFS],
    pub free: [[LinC; 4]; N_COEFFS],
}

impl PenaltyFamily {
    pub fn evaluate(&self, c: &Rational, params: &FreeParams) -> PenaltyCoefficients {
        PenaltyCoefficients(std::array::from_fn(|i| {
            let mut v = self.constant[i].at(c);
            for (k, p) in params.0.iter().enumerate() {
                v += self.free[i][k].at(c) * p;
            }
            v
        }))
    }
}

/// Target blocks of the block stencil in the interior, unit cell.
pub fn interior_target(c: &Rational) -> Blocks {
    let l = |a: i64, b: i64| (q(a, 1) + q(b, 1) * c) / q(3, 1);
    [
        [[l(-1, 1), l(16, -5)], [l(0, -1), l(-1, 5)]],
        [[l(-30, 10), l(16, -10)], [l(16, -10), l(-30, 10)]],
        [[l(-1, 5), l(0, -1)], [l(16, -5), l(-1, 1)]],
    ]
}

/// Target blocks of the first cell next to a left Dirichlet boundary. The
/// left neighbour block is zero.
pub fn boundary_target(c: &Rational) -> Blocks {
    let l = |a: i64, b: i64| (q(a, 1) + q(b, 1) * c) / q(3, 1);
    let z = || q(0, 1);
    [
        [[z(), z()], [z(), z()]],
        [[l(-46, 15), l(17, -11)], [l(17, -15), l(-30, 11)]],
        [[l(-1, 5), l(0, -1)], [l(16, -5), l(-1, 1)]],
    ]
}

/// Blocks of the symmetric interior-penalty DG discretisation for the same
/// basis, which the weak form must also be able to represent.
pub fn dg_diffusion_target() -> Blocks {
    [
        [[q(7, 4), q(-1, 4)], [q(1, 4), q(-7, 4)]],
        [[q(-6, 1), q(6, 1)], [q(6, 1), q(-6, 1)]],
        [[q(-7, 4), q(1, 4)], [q(-1, 4), q(7, 4)]],
    ]
}

/// Mass matrix of the nodal basis on the unit cell.
pub fn mass_matrix() -> [[Rational; 2]; 2] {
    [[q(7, 12), q(-1, 12)], [q(-1, 12), q(7, 12)]]
}

type Functional = [Rational; 6];

fn functional(entries: &[(usize, Rational)]) -> Functional {
    let mut f: Functional = std::array::from_fn(|_| Rational::zero());
    for (k, v) in entries {
        f[*k] = v.clone();
    }
    f
}

/// Traces in the local unknowns `u0..u5` (two nodes in each of the left
/// neighbour, the cell and the right neighbour).
struct Traces {
    up_r: Functional,
    um_r: Functional,
    uxm_r: Functional,
    uxp_r: Functional,
    up_l: Functional,
    um_l: Functional,
    uxm_l: Functional,
    uxp_l: Functional,
    ux: Functional,
}

fn traces() -> Traces {
    // phi_a(-1/2) = 3/2, phi_b(-1/2) = -1/2, phi_a(1/2) = -1/2, phi_b(1/2) = 3/2.
    let at_left = |cell: usize| functional(&[(2 * cell, q(3, 2)), (2 * cell + 1, q(-1, 2))]);
    let at_right = |cell: usize| functional(&[(2 * cell, q(-1, 2)), (2 * cell + 1, q(3, 2))]);
    let slope = |cell: usize| functional(&[(2 * cell, q(-2, 1)), (2 * cell + 1, q(2, 1))]);
    Traces {
        up_r: at_left(2),
        um_r: at_right(1),
        uxm_r: slope(1),
        uxp_r: slope(2),
        up_l: at_left(1),
        um_l: at_right(0),
        uxm_l: slope(0),
        uxp_l: slope(1),
        ux: slope(1),
    }
}

/// Test-function data: values at the left and right edges and the slope.
fn test_functions() -> [(Rational, Rational, Rational); 2] {
    [(q(3, 2), q(-1, 2), q(-2, 1)), (q(-1, 2), q(3, 2), q(2, 1))]
}

/// The weak-form right-hand side as an affine map of the coefficients:
/// `rhs[i][k] = base[i][k] + sum_s coef[i][k][s] X_s` for test function `i`
/// and local unknown `k`.
struct Assembly {
    base: [[Rational; 6]; 2],
    coef: [[[Rational; N_COEFFS]; 6]; 2],
}

fn assemble() -> Assembly {
    let t = traces();
    let mut base: [[Rational; 6]; 2] =
        std::array::from_fn(|_| std::array::from_fn(|_| Rational::zero()));
    let mut coef: [[[Rational; N_COEFFS]; 6]; 2] =
        std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| Rational::zero())));
    let right = [&t.up_r, &t.um_r, &t.uxm_r, &t.uxp_r];
    let left = [&t.up_l, &t.um_l, &t.uxm_l, &t.uxp_l];
    for (i, (v_l, v_r, v_x)) in test_functions().iter().enumerate() {
        for k in 0..6 {
            base[i][k] = -(&t.ux[k] * v_x);
            for s in 0..4 {
                coef[i][k][s] = &right[s][k] * v_r;
                coef[i][k][4 + s] = &left[s][k] * v_l;
                coef[i][k][8 + s] = &right[s][k] * v_x;
                coef[i][k][12 + s] = &left[s][k] * v_x;
            }
        }
    }
    Assembly { base, coef }
}

/// Solves for the twelve dependent coefficients at a fixed `c`, returning
/// each as `constant + sum_k free[k] * p_k`.
fn solve_at(target: &Blocks) -> Result<([Rational; N_COEFFS], [[Rational; 4]; N_COEFFS])> {
    let asm = assemble();
    let mass = mass_matrix();
    let dependent: Vec<usize> = (0..N_COEFFS)
        .filter(|s| !FREE_INDICES.contains(s))
        .collect();
    let mut rows = Vec::with_capacity(12);
    let mut rhs = Vec::with_capacity(12);
    for i in 0..2 {
        for k in 0..6 {
            let (blk, col) = (k / 2, k % 2);
            let want = &mass[i][0] * &target[blk][0][col] + &mass[i][1] * &target[blk][1][col];
            rows.push(
                dependent
                    .iter()
                    .map(|&s| asm.coef[i][k][s].clone())
                    .collect::<Vec<_>>(),
            );
            let mut r = vec![want - &asm.base[i][k]];
            r.extend(FREE_INDICES.iter().map(|&s| -asm.coef[i][k][s].clone()));
            rhs.push(r);
        }
    }
    let sol = solve_square(&rows, &rhs).map_err(|_| {
        BfdError::NoSolution(
            "the free parameters do not determine the remaining coefficients".into(),
        )
    })?;
    let mut constant: [Rational; N_COEFFS] = std::array::from_fn(|_| Rational::zero());
    let mut free: [[Rational; 4]; N_COEFFS] =
        std::array::from_fn(|_| std::array::from_fn(|_| Rational::zero()));
    for (row, &s) in sol.iter().zip(&dependent) {
        constant[s] = row[0].clone();
        free[s].clone_from_slice(&row[1..5]);
    }
    for (k, &s) in FREE_INDICES.iter().enumerate() {
        free[s][k] = q(1, 1);
    }
    Ok((constant, free))
}

/// Solves the weak-form system for a target that depends on `c`, returning
/// the family affine in `c`. The affine form is fitted at `c = 0, 1` and
/// confirmed at further points; a target whose solution is not affine in
/// `c` is rejected.
pub fn solve_penalty_family(target: impl Fn(&Rational) -> Blocks) -> Result<PenaltyFamily> {
    let (k0, f0) = solve_at(&target(&q(0, 1)))?;
    let (k1, f1) = solve_at(&target(&q(1, 1)))?;
    let family = PenaltyFamily {
        constant: std::array::from_fn(|i| LinC::from_values(&k0[i], &k1[i])),
        free: std::array::from_fn(|i| {
            std::array::from_fn(|k| LinC::from_values(&f0[i][k], &f1[i][k]))
        }),
    };
    for c in [q(-4, 13), q(1, 2), q(-97, 100), q(7, 3)] {
        let (kc, fc) = solve_at(&target(&c))?;
        let affine = (0..N_COEFFS).all(|i| {
            family.constant[i].at(&c) == kc[i]
                && (0..4).all(|k| family.free[i][k].at(&c) == fc[i][k])
        });
        if !affine {
            return Err(BfdError::Unsupported(
                "penalty family is not affine in c".into(),
            ));
        }
    }
    Ok(family)
}

/// Solves for the coefficients at a single `c` and choice of free
/// parameters.
pub fn solve_penalty_coefficients(
    target: &Blocks,
    params: &FreeParams,
) -> Result<PenaltyCoefficients> {
    let (k, f) = solve_at(target)?;
    Ok(PenaltyCoefficients(std::array::from_fn(|i| {
        let mut v = k[i].clone();
        for (j, p) in params.0.iter().enumerate() {
            v += &f[i][j] * p;
        }
        v
    })))
}

/// Rebuilds `(A, B, C)` in floating point from the coefficients by
/// assembling the weak form and applying the inverse mass matrix.
pub fn reconstruct_blocks(coeffs: &[f64; N_COEFFS]) -> [[[f64; 2]; 2]; 3] {
    let asm = assemble();
    let mut rhs = [[0.0; 6]; 2];
    for i in 0..2 {
        for k in 0..6 {
            rhs[i][k] = to_f64(&asm.base[i][k])
                + (0..N_COEFFS)
                    .map(|s| to_f64(&asm.coef[i][k][s]) * coeffs[s])
                    .sum::<f64>();
        }
    }
    // Inverse of (1/12)[[7, -1], [-1, 7]] is (1/4)[[7, 1], [1, 7]].
    let minv = [[7.0 / 4.0, 1.0 / 4.0], [1.0 / 4.0, 7.0 / 4.0]];
    let mut out = [[[0.0; 2]; 2]; 3];
    for (blk, b) in out.iter_mut().enumerate() {
        for (i, row) in b.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = minv[i][0] * rhs[0][2 * blk + j] + minv[i][1] * rhs[1][2 * blk + j];
            }
        }
    }
    out
}

pub fn blocks_to_f64(b: &Blocks) -> [[[f64; 2]; 2]; 3] {
    std::array::from_fn(|k| std::array::from_fn(|i| std::array::from_fn(|j| to_f64(&b[k][i][j]))))
}
