//! Interface energy quadratic forms.
//!
//! Summing the weak form against the solution itself splits the discrete
//! energy rate into one quadratic form per interface. Each cell integral
//! `-int u_x^2` is shared equally between its two interfaces. Matrices are
//! given on the unit cell; the forms scale as `1/h`.

use num_traits::Zero;

use super::rational::{q, Rational};
use super::weak_form::PenaltyCoefficients;

/// Where the form lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormLocation {
    /// Generic interior interface, over `u_{j-5/4}, u_{j-3/4}, u_{j-1/4}, u_{j+1/4}`.
    Interior,
    /// The interior form with its last row and column removed.
    InteriorTruncated,
    /// The boundary edge of the first cell, over its two nodes.
    LeftBoundary,
    /// The interface between the first and second cells.
    SecondInterface,
}

impl FormLocation {
    pub fn label(self) -> &'static str {
        match self {
            Self::Interior => "interior",
            Self::InteriorTruncated => "interior_truncated",
            Self::LeftBoundary => "theta_1_2",
            Self::SecondInterface => "theta_3_2",
        }
    }
}

impl std::fmt::Display for FormLocation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A symmetric quadratic form with exact entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterfaceForm {
    pub location: FormLocation,
    pub m: Vec<Vec<Rational>>,
}

impl InterfaceForm {
    pub fn size(&self) -> usize {
        self.m.len()
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        let n = self.size();
        nalgebra::DMatrix::from_fn(n, n, |i, j| super::rational::to_f64(&self.m[i][j]))
    }

    /// Drops the last row and column.
    pub fn truncated(&self) -> Self {
        let n = self.size() - 1;
        Self {
            location: FormLocation::InteriorTruncated,
            m: self.m[..n].iter().map(|r| r[..n].to_vec()).collect(),
        }
    }
}

type Lin = [Rational; 4];

fn lin(a: [(usize, Rational); 2]) -> Lin {
    let mut l: Lin = std::array::from_fn(|_| Rational::zero());
    for (k, v) in a {
        l[k] = v;
    }
    l
}

fn combo(terms: &[(&Rational, &Lin)]) -> Lin {
    std::array::from_fn(|k| terms.iter().map(|(w, l)| *w * &l[k]).sum())
}

struct Quadratic(Vec<Vec<Rational>>);

impl Quadratic {
    fn new() -> Self {
        Self(vec![vec![Rational::zero(); 4]; 4])
    }

    /// Adds `s * (x . p)(x . r)`, symmetrised.
    fn add(&mut self, s: &Rational, p: &Lin, r: &Lin) {
        let half = s * q(1, 2);
        for i in 0..4 {
            for j in 0..4 {
                let v = &half * (&p[i] * &r[j] + &r[i] * &p[j]);
                self.0[i][j] += v;
            }
        }
    }
}

/// Traces at the interface between the left cell (nodes 0, 1) and the
/// right cell (nodes 2, 3).
struct Interface {
    up: Lin,
    um: Lin,
    uxp: Lin,
    uxm: Lin,
}

fn interface() -> Interface {
    Interface {
        up: lin([(2, q(3, 2)), (3, q(-1, 2))]),
        um: lin([(0, q(-1, 2)), (1, q(3, 2))]),
        uxp: lin([(2, q(-2, 1)), (3, q(2, 1))]),
        uxm: lin([(0, q(-2, 1)), (1, q(2, 1))]),
    }
}

/// Contribution of the left cell's right-edge terms (`C`, `E`).
fn add_minus_side(acc: &mut Quadratic, k: &PenaltyCoefficients, t: &Interface) {
    let g = |n: &str| k.get(n).expect("coefficient name");
    let flux = combo(&[
        (g("C1"), &t.up),
        (g("C2"), &t.um),
        (g("C3"), &t.uxm),
        (g("C4"), &t.uxp),
    ]);
    let pen = combo(&[
        (g("E1"), &t.up),
        (g("E2"), &t.um),
        (g("E3"), &t.uxm),
        (g("E4"), &t.uxp),
    ]);
    acc.add(&q(1, 1), &flux, &t.um);
    acc.add(&q(1, 1), &t.uxm, &pen);
}

/// Contribution of the right cell's left-edge terms (`D`, `F`).
fn add_plus_side(acc: &mut Quadratic, k: &PenaltyCoefficients, t: &Interface) {
    let g = |n: &str| k.get(n).expect("coefficient name");
    let flux = combo(&[
        (g("D1"), &t.up),
        (g("D2"), &t.um),
        (g("D3"), &t.uxm),
        (g("D4"), &t.uxp),
    ]);
    let pen = combo(&[
        (g("F1"), &t.up),
        (g("F2"), &t.um),
        (g("F3"), &t.uxm),
        (g("F4"), &t.uxp),
    ]);
    acc.add(&q(1, 1), &flux, &t.up);
    acc.add(&q(1, 1), &t.uxp, &pen);
}

/// Form at an interface whose left cell uses `left` and right cell uses
/// `right`, including half of each adjacent cell integral.
pub fn interface_theta(
    left: &PenaltyCoefficients,
    right: &PenaltyCoefficients,
    location: FormLocation,
) -> InterfaceForm {
    let t = interface();
    let mut acc = Quadratic::new();
    add_minus_side(&mut acc, left, &t);
    add_plus_side(&mut acc, right, &t);
    // Cell integrals of u_x^2 on unit cells; u_x is constant per cell.
    acc.add(&q(-1, 2), &t.uxm, &t.uxm);
    acc.add(&q(-1, 2), &t.uxp, &t.uxp);
    InterfaceForm { location, m: acc.0 }
}

/// Generic interior form for one coefficient set.
pub fn build_interior_theta(k: &PenaltyCoefficients) -> InterfaceForm {
    interface_theta(k, k, FormLocation::Interior)
}

/// Form at the second interface: the boundary cell on the left, an
/// interior cell on the right.
pub fn second_interface_theta(
    boundary: &PenaltyCoefficients,
    interior: &PenaltyCoefficients,
) -> InterfaceForm {
    interface_theta(boundary, interior, FormLocation::SecondInterface)
}

/// Form at the Dirichlet edge of the first cell, over its two nodes. Only
/// the terms in `u+` and `u_x+` survive there.
pub fn boundary_theta_half(boundary: &PenaltyCoefficients) -> InterfaceForm {
    let t = interface();
    let g = |n: &str| boundary.get(n).expect("coefficient name");
    let mut acc = Quadratic::new();
    let flux = combo(&[(g("D1"), &t.up), (g("D4"), &t.uxp)]);
    let pen = combo(&[(g("F1"), &t.up), (g("F4"), &t.uxp)]);
    acc.add(&q(1, 1), &flux, &t.up);
    acc.add(&q(1, 1), &t.uxp, &pen);
    acc.add(&q(-1, 2), &t.uxp, &t.uxp);
    InterfaceForm {
        location: FormLocation::LeftBoundary,
        m: acc.0[2..].iter().map(|r| r[2..].to_vec()).collect(),
    }
}

/// The boundary-edge form in closed form, on the unit cell.
/// The off-diagonal entry carries `216 E2`.
pub fn reference_theta_half(c: f64, c2: f64, c3: f64, e2: f64, e3: f64) -> nalgebra::Matrix2<f64> {
    let m11 = -1.0 + 8.0 * c - 57.0 * c2 - 48.0 * c3 - 84.0 * e2 - 48.0 * e3;
    let m12 = (287.0 - 40.0 * c + 189.0 * c2 + 144.0 * c3 + 216.0 * e2 + 144.0 * e3) / 3.0;
    let m22 = (-319.0 + 56.0 * c - 171.0 * c2 - 144.0 * c3 - 180.0 * e2 - 144.0 * e3) / 3.0;
    nalgebra::Matrix2::new(m11, m12, m12, m22) / 12.0
}

/// The generic interior matrix in closed form, on the unit
/// cell.
pub fn reference_interior_theta(
    c: f64,
    c2: f64,
    c3: f64,
    e2: f64,
    e3: f64,
) -> nalgebra::Matrix4<f64> {
    let m11 = 8.0 * c - 31.0;
    let m12 = (143.0 - 40.0 * c) / 3.0;
    let m13 = (40.0 * c - 3.0 * (5.0 * c2 + 4.0 * c3 + 20.0 * e2 + 16.0 * e3 - 7.0)) / 2.0;
    let m14 = (-88.0 * c + 135.0 * c2 + 108.0 * c3 + 180.0 * e2 + 144.0 * e3 + 167.0) / 6.0;
    let m22 = (56.0 * c - 277.0) / 3.0;
    let m23 = (-40.0 * c + 21.0 * c2 + 12.0 * c3 + 84.0 * e2 + 48.0 * e3 - 19.0) / 2.0;
    let m24 = (88.0 * c - 189.0 * c2 - 108.0 * c3 - 252.0 * e2 - 144.0 * e3 - 257.0) / 6.0;
    let m33 = (-80.0 * c + 9.0 * c2 + 36.0 * c3 + 36.0 * e2 + 144.0 * e3 + 10.0) / 3.0;
    let m34 = (80.0 * c - 27.0 * c2 - 72.0 * c3 - 72.0 * e2 - 144.0 * e3 + 74.0) / 3.0;
    let m44 = (-80.0 * c + 81.0 * c2 + 2.0 * (54.0 * c3 + 54.0 * e2 + 72.0 * e3 + 5.0)) / 3.0;
    nalgebra::Matrix4::new(
        m11, m12, m13, m14, //
        m12, m22, m23, m24, //
        m13, m23, m33, m34, //
        m14, m24, m34, m44,
    ) / 12.0
}

/// The second-interface matrix in closed form, on the unit
/// cell.
pub fn reference_theta_three_halves(c: f64) -> nalgebra::Matrix4<f64> {
    nalgebra::Matrix4::new(
        -93.0 - 8.0 * c,
        143.0 + 24.0 * c,
        -7.0 - 40.0 * c,
        -43.0 + 24.0 * c,
        143.0 + 24.0 * c,
        -277.0 - 40.0 * c,
        125.0 + 56.0 * c,
        9.0 - 40.0 * c,
        -7.0 - 40.0 * c,
        125.0 + 56.0 * c,
        -373.0 - 40.0 * c,
        3.0 * (85.0 + 8.0 * c),
        -43.0 + 24.0 * c,
        9.0 - 40.0 * c,
        3.0 * (85.0 + 8.0 * c),
        -221.0 - 8.0 * c,
    ) / 36.0
}

/// Diagonal of the reference congruence of the truncated interior matrix,
/// on the unit cell.
pub fn reference_congruence_diagonal(c: f64) -> [f64; 3] {
    let p = 8.0 * c - 31.0;
    let r = c * (8.0 * c + 13.0) - 166.0;
    let cubic = -357523.0 + c * (276776.0 + c * (-71424.0 + 6144.0 * c));
    [
        p / 12.0,
        -(32.0 / 9.0) * p * r / 12.0,
        -(4096.0 / 81.0) * p * r * r * cubic / 12.0,
    ]
}
