//! Exact feasibility for `{λ ≥ 0 : Gλ = h}` over the rationals.
//!
//! Dense phase-one simplex with Bland's rule; infeasible systems come back
//! with a Farkas certificate.

use nalgebra::DVector;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

/// Exact value of a finite double.
pub fn to_rational(v: f64) -> Rational {
    BigRational::from_float(v).expect("finite input")
}

pub fn to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn vector(v: &DVector<f64>) -> Vec<Rational> {
    v.iter().map(|&x| to_rational(x)).collect()
}

pub fn from_int(v: i64) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    /// Nonnegative `λ` with `Gλ = h`.
    Feasible(Vec<Rational>),
    /// `w` with `wᵀG ≥ 0` and `wᵀh < 0`.
    Infeasible(Vec<Rational>),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// Decides `{λ ≥ 0 : Σ_k λ_k cols[k] = h}`. Every column must have the
/// length of `h`.
pub fn nonneg_combination(cols: &[Vec<Rational>], h: &[Rational]) -> Feasibility {
    let m = h.len();
    let k = cols.len();
    assert!(cols.iter().all(|c| c.len() == m), "column length mismatch");

    let sign: Vec<bool> = h.iter().map(|v| v.is_negative()).collect();
    let width = k + m + 1;
    let mut t: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let mut row = vec![Rational::zero(); width];
            for (j, col) in cols.iter().enumerate() {
                row[j] = if sign[i] {
                    -col[i].clone()
                } else {
                    col[i].clone()
                };
            }
            row[k + i] = Rational::one();
            row[width - 1] = h[i].abs();
            row
        })
        .collect();
    let mut basis: Vec<usize> = (k..k + m).collect();

    // reduced costs of the phase-one objective Σ artificials
    let mut cost = vec![Rational::zero(); width];
    for row in &t {
        for j in 0..k {
            cost[j] -= &row[j];
        }
        cost[width - 1] -= &row[width - 1];
    }

    while let Some(enter) = (0..k + m).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[width - 1] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((l, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // phase one is bounded below by zero, so some row always qualifies
        let (r, _) = leave.expect("bounded phase one");
        pivot(&mut t, &mut cost, r, enter);
        basis[r] = enter;
    }

    if cost[width - 1].is_zero() {
        let mut lambda = vec![Rational::zero(); k];
        for (i, &bi) in basis.iter().enumerate() {
            if bi < k {
                lambda[bi] = t[i][width - 1].clone();
            }
        }
        Feasibility::Feasible(lambda)
    } else {
        // reduced cost of artificial i is 1 − y_i
        let w = (0..m)
            .map(|i| {
                let y = Rational::one() - &cost[k + i];
                if sign[i] {
                    y
                } else {
                    -y
                }
            })
            .collect();
        Feasibility::Infeasible(w)
    }
}

fn pivot(t: &mut [Vec<Rational>], cost: &mut [Rational], r: usize, c: usize) {
    let p = t[r][c].clone();
    for v in t[r].iter_mut() {
        *v /= &p;
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r && !row[c].is_zero() {
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                *v -= &f * pv;
            }
        }
    }
    if !cost[c].is_zero() {
        let f = cost[c].clone();
        for (v, pv) in cost.iter_mut().zip(&prow) {
            *v -= &f * pv;
        }
    }
}

/// Checks a [`Feasibility`] answer against the system it claims to solve.
pub fn verify(cols: &[Vec<Rational>], h: &[Rational], answer: &Feasibility) -> bool {
    match answer {
        Feasibility::Feasible(lambda) => {
            lambda.len() == cols.len()
                && lambda.iter().all(|l| !l.is_negative())
                && (0..h.len()).all(|i| {
                    let s: Rational = cols.iter().zip(lambda).map(|(c, l)| &c[i] * l).sum();
                    s == h[i]
                })
        }
        Feasibility::Infeasible(w) => {
            let dot = |v: &[Rational]| -> Rational { v.iter().zip(w).map(|(a, b)| a * b).sum() };
            w.len() == h.len() && cols.iter().all(|c| !dot(c).is_negative()) && dot(h).is_negative()
        }
    }
}
