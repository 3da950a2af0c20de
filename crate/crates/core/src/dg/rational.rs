//! Exact rational helpers: values affine in `c`, linear solves and
//! congruence inertia.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{BfdError, Result};

pub type Rational = BigRational;

/// `n / d` as an exact rational.
pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite `f64`.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| BfdError::InvalidArgument(format!("{x} is not finite")))
}

/// `a + b c`, a value affine in the scheme parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinC {
    pub a: Rational,
    pub b: Rational,
}

impl LinC {
    pub fn zero() -> Self {
        Self {
            a: Rational::zero(),
            b: Rational::zero(),
        }
    }

    pub fn at(&self, c: &Rational) -> Rational {
        &self.a + &self.b * c
    }

    /// Interpolates from the values at `c = 0` and `c = 1`.
    pub fn from_values(at0: &Rational, at1: &Rational) -> Self {
        Self {
            a: at0.clone(),
            b: at1 - at0,
        }
    }
}

impl std::fmt::Display for LinC {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "({})c", self.b),
            (false, false) => write!(f, "{} + ({})c", self.a, self.b),
        }
    }
}

/// Solves `M x = R` column by column for every right-hand side in `rhs`,
/// where `M` is square. Fails if `M` is singular.
pub fn solve_square(m: &[Vec<Rational>], rhs: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let n = m.len();
    let k = rhs.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .zip(rhs)
        .map(|(row, r)| row.iter().chain(r.iter()).cloned().collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).ok_or_else(|| {
            BfdError::Singular(format!("rational system is singular at column {col}"))
        })?;
        a.swap(col, piv);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in col..n + k {
                    let d = &f * &a[col][j];
                    a[r][j] = &a[r][j] - d;
                }
            }
        }
    }
    Ok(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Counts `(negative, zero, positive)` pivots of a congruence
/// (symmetric `L D L^T` with diagonal or 2x2 pivots), which by Sylvester's
/// law of inertia equal the eigenvalue sign counts.
pub fn inertia(m: &[Vec<Rational>]) -> Result<(usize, usize, usize)> {
    let n = m.len();
    for i in 0..n {
        for j in 0..i {
            if m[i][j] != m[j][i] {
                return Err(BfdError::Asymmetric(to_f64(&(&m[i][j] - &m[j][i])).abs()));
            }
        }
    }
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let (mut neg, mut zero, mut pos) = (0, 0, 0);
    while !a.is_empty() {
        let n = a.len();
        if let Some(p) = (0..n).find(|&i| !a[i][i].is_zero()) {
            let d = a[p][p].clone();
            if d.is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            let rest: Vec<usize> = (0..n).filter(|&i| i != p).collect();
            a = rest
                .iter()
                .map(|&i| {
                    rest.iter()
                        .map(|&j| &a[i][j] - &a[i][p] * &a[p][j] / &d)
                        .collect()
                })
                .collect();
        } else if let Some((i, j)) = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| !a[i][j].is_zero())
        {
            // Zero diagonal with a nonzero off-diagonal: the 2x2 block
            // [[0, b], [b, 0]] contributes one positive and one negative.
            pos += 1;
            neg += 1;
            let b = a[i][j].clone();
            let rest: Vec<usize> = (0..n).filter(|&r| r != i && r != j).collect();
            // Inverse of [[0, b], [b, 0]] is [[0, 1/b], [1/b, 0]].
            a = rest
                .iter()
                .map(|&r| {
                    rest.iter()
                        .map(|&s| &a[r][s] - (&a[r][i] * &a[j][s] + &a[r][j] * &a[i][s]) / &b)
                        .collect()
                })
                .collect();
        } else {
            zero += n;
            a.clear();
        }
    }
    Ok((neg, zero, pos))
}

/// Exact determinant by fraction-preserving elimination.
pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if p != col {
            a.swap(col, p);
            det = -det;
        }
        let d = a[col][col].clone();
        det *= &d;
        for r in col + 1..n {
            if !a[r][col].is_zero() {
                let f = &a[r][col] / &d;
                for j in col..n {
                    let s = &f * &a[col][j];
                    a[r][j] = &a[r][j] - s;
                }
            }
        }
    }
    det
}
