//! Independent oracles shared by the integration tests.
//!
//! Everything here works in exact rational arithmetic by brute-force
//! enumeration and uses nothing from the library beyond its data types.

#![allow(dead_code)]

use std::collections::BTreeSet;

use conpart_core::ConicProblem;
use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(v: f64) -> Q {
    BigRational::from_float(v).expect("finite")
}

pub fn qi(v: i64) -> Q {
    BigRational::from_integer(BigInt::from(v))
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Reduced row echelon form; returns the pivot columns.
pub fn rref(m: &mut [Vec<Q>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let lead = m[r][c].clone();
        for v in m[r].iter_mut() {
            *v /= &lead;
        }
        let prow = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

/// Basis of `{v : M v = 0}` for an `rows × cols` matrix.
pub fn nullspace(m: &[Vec<Q>], cols: usize) -> Vec<Vec<Q>> {
    let mut a = m.to_vec();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

/// The solution of `M v = h` when it exists and is unique.
pub fn solve_unique(m: &[Vec<Q>], h: &[Q], cols: usize) -> Option<Vec<Q>> {
    let mut aug: Vec<Vec<Q>> = m
        .iter()
        .zip(h)
        .map(|(row, hv)| {
            let mut r = row.clone();
            r.push(hv.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) || pivots.len() != cols {
        return None;
    }
    Some((0..cols).map(|r| aug[r][cols].clone()).collect())
}

fn subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize <= max)
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect()
}

/// Exact LP data of a problem whose blocks are all one-dimensional orthants.
pub struct ExactLp {
    pub a: Vec<Vec<Q>>,
    pub b: Vec<Q>,
    pub c: Vec<Q>,
}

impl ExactLp {
    pub fn from_problem(p: &ConicProblem) -> Self {
        assert!(p.blocks.iter().all(|k| k.dim() == 1));
        let a = p
            .a_blocks
            .iter()
            .map(|aj| aj.row(0).iter().map(|&v| q(v)).collect())
            .collect();
        let b = p.b_blocks.iter().map(|bj| q(bj[0])).collect();
        let c = p.c.iter().map(|&v| q(v)).collect();
        ExactLp { a, b, c }
    }

    fn m(&self) -> usize {
        self.a.len()
    }

    fn n(&self) -> usize {
        self.c.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldmanTucker {
    pub b: BTreeSet<usize>,
    pub n: BTreeSet<usize>,
}

/// Optimal partition of `min c·x, Ax ≥ b` and its dual
/// `max b·y, Aᵀy = c, y ≥ 0`, read off the vertices and extreme rays of
/// both optimal faces. Requires `A` of full column rank and a finite
/// optimum.
pub fn goldman_tucker(lp: &ExactLp) -> GoldmanTucker {
    let (m, n) = (lp.m(), lp.n());
    let slack = |x: &[Q], j: usize| dot(&lp.a[j], x) - &lp.b[j];

    // primal vertices: n linearly independent active rows
    let mut pverts = Vec::new();
    for s in subsets(m, n).into_iter().filter(|s| s.len() == n) {
        let rows: Vec<Vec<Q>> = s.iter().map(|&j| lp.a[j].clone()).collect();
        let rhs: Vec<Q> = s.iter().map(|&j| lp.b[j].clone()).collect();
        if let Some(x) = solve_unique(&rows, &rhs, n) {
            if (0..m).all(|j| !slack(&x, j).is_negative()) {
                pverts.push(x);
            }
        }
    }
    let pstar = pverts
        .iter()
        .map(|x| dot(&lp.c, x))
        .min()
        .expect("primal vertex");
    let popt: Vec<&Vec<Q>> = pverts.iter().filter(|x| dot(&lp.c, x) == pstar).collect();

    // extreme rays of {d : Ad ≥ 0, c·d = 0}
    let mut prays = Vec::new();
    for s in subsets(m, n.saturating_sub(1)) {
        let mut rows: Vec<Vec<Q>> = s.iter().map(|&j| lp.a[j].clone()).collect();
        rows.push(lp.c.clone());
        let null = nullspace(&rows, n);
        if null.len() != 1 {
            continue;
        }
        for sign in [1, -1] {
            let d: Vec<Q> = null[0].iter().map(|v| v * qi(sign)).collect();
            if (0..m).all(|j| !dot(&lp.a[j], &d).is_negative()) {
                prays.push(d);
            }
        }
    }

    // dual vertices: linearly independent column subsets of Aᵀ
    let at = |s: &[usize]| -> Vec<Vec<Q>> {
        (0..n)
            .map(|i| s.iter().map(|&j| lp.a[j][i].clone()).collect())
            .collect()
    };
    let mut dverts = Vec::new();
    for s in subsets(m, n) {
        if let Some(ys) = solve_unique(&at(&s), &lp.c, s.len()) {
            if ys.iter().all(|v| !v.is_negative()) {
                let mut y = vec![Q::zero(); m];
                for (k, &j) in s.iter().enumerate() {
                    y[j] = ys[k].clone();
                }
                dverts.push(y);
            }
        }
    }
    let dstar = dverts
        .iter()
        .map(|y| dot(&lp.b, y))
        .max()
        .expect("dual vertex");
    assert_eq!(pstar, dstar, "oracle: nonzero duality gap");
    let dopt: Vec<&Vec<Q>> = dverts.iter().filter(|y| dot(&lp.b, y) == dstar).collect();

    // extreme rays of {y ≥ 0 : Aᵀy = 0, b·y = 0}
    let mut drays = Vec::new();
    for s in subsets(m, m).into_iter().filter(|s| !s.is_empty()) {
        let mut rows = at(&s);
        rows.push(s.iter().map(|&j| lp.b[j].clone()).collect());
        let null = nullspace(&rows, s.len());
        if null.len() != 1 {
            continue;
        }
        let v = &null[0];
        let sign = if v[0].is_negative() { qi(-1) } else { qi(1) };
        if v.iter().all(|x| (x * &sign).is_positive()) {
            let mut y = vec![Q::zero(); m];
            for (k, &j) in s.iter().enumerate() {
                y[j] = &v[k] * &sign;
            }
            drays.push(y);
        }
    }

    let b = (0..m)
        .filter(|&j| {
            popt.iter().any(|x| slack(x, j).is_positive())
                || prays.iter().any(|d| dot(&lp.a[j], d).is_positive())
        })
        .collect();
    let nset = (0..m)
        .filter(|&j| {
            dopt.iter().any(|y| y[j].is_positive()) || drays.iter().any(|y| y[j].is_positive())
        })
        .collect();
    GoldmanTucker { b, n: nset }
}

/// For every generator `g`, whether `-g` lies in the cone spanned by all
/// generators. Carathéodory: it does iff it is a nonnegative combination of
/// some linearly independent subset.
pub fn lineality_members(generators: &[Vec<Q>]) -> Vec<bool> {
    let k = generators.len();
    let dim = generators.first().map_or(0, Vec::len);
    let mut member = vec![false; k];
    for s in subsets(k, dim) {
        let cols: Vec<Vec<Q>> = (0..dim)
            .map(|i| s.iter().map(|&c| generators[c][i].clone()).collect())
            .collect();
        for (t, g) in generators.iter().enumerate() {
            if member[t] {
                continue;
            }
            let target: Vec<Q> = g.iter().map(|v| -v.clone()).collect();
            if let Some(lambda) = solve_unique(&cols, &target, s.len()) {
                if lambda.iter().all(|l| !l.is_negative()) {
                    member[t] = true;
                }
            }
        }
    }
    member
}

/// `⟨Arw(s), Y⟩` straight from the block form `[[s₀, s̄ᵀ], [s̄, s₀ I]]`.
pub fn arrow_inner(s: &DVector<f64>, y: &DMatrix<f64>) -> f64 {
    let d = s.len();
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            let a = if i == j {
                s[0]
            } else if i == 0 {
                s[j]
            } else if j == 0 {
                s[i]
            } else {
                0.0
            };
            total += a * y[(i, j)];
        }
    }
    total
}
