//! Random instances with a known optimal pair.
//!
//! A complementary pair `(s*, y*)` is drawn block by block, then
//! `b = A x* − s*` and `c = Aᵀ y*`, so `(x*, y*)` is optimal with zero gap.

use nalgebra::{DMatrix, DVector};
use rand::seq::IndexedRandom;
use rand::Rng;

use crate::cones::{svec, ConeSpec};
use crate::model::{ConicProblem, PrimalDualPair};

/// Cone families to draw blocks from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Orthants, Lorentz cones and PSD cones.
    Mixed,
    /// Lorentz cones, including `L_0 = R_+`.
    Lorentz,
    /// Dimension-one orthants with small integer data.
    Lp,
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub family: Family,
    pub max_n: usize,
    pub max_total_dim: usize,
    pub max_blocks: usize,
}

impl Shape {
    pub fn mixed() -> Self {
        Shape {
            family: Family::Mixed,
            max_n: 8,
            max_total_dim: 14,
            max_blocks: 5,
        }
    }

    pub fn lorentz() -> Self {
        Shape {
            family: Family::Lorentz,
            max_n: 8,
            max_total_dim: 14,
            max_blocks: 5,
        }
    }

    pub fn lp() -> Self {
        Shape {
            family: Family::Lp,
            max_n: 4,
            max_total_dim: 6,
            max_blocks: 6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub problem: ConicProblem,
    /// The optimal pair the data was built from.
    pub pair: PrimalDualPair,
}

fn magnitude(rng: &mut impl Rng) -> f64 {
    rng.random_range(0.5..2.0)
}

fn draw_blocks(shape: &Shape, rng: &mut impl Rng) -> Vec<ConeSpec> {
    let mut blocks = Vec::new();
    let mut used = 0;
    let target = rng.random_range(1..=shape.max_blocks);
    while blocks.len() < target {
        let room = shape.max_total_dim - used;
        if room == 0 {
            break;
        }
        let cone = match shape.family {
            Family::Lp => ConeSpec::Orthant(1),
            Family::Lorentz => ConeSpec::Lorentz(rng.random_range(1..=room.min(5))),
            Family::Mixed => {
                let mut options = vec![ConeSpec::Orthant(rng.random_range(1..=room.min(3)))];
                options.push(ConeSpec::Lorentz(rng.random_range(1..=room.min(5))));
                if room >= 3 {
                    options.push(ConeSpec::Psd(2));
                }
                if room >= 6 {
                    options.push(ConeSpec::Psd(3));
                }
                *options.choose(rng).expect("nonempty")
            }
        };
        used += cone.dim();
        blocks.push(cone);
    }
    blocks
}

/// Complementary `(s, y)` for one block.
fn draw_pair(cone: &ConeSpec, rng: &mut impl Rng, integer: bool) -> (DVector<f64>, DVector<f64>) {
    let d = cone.dim();
    match *cone {
        ConeSpec::Orthant(_) | ConeSpec::Lorentz(1) => {
            let mut s = DVector::zeros(d);
            let mut y = DVector::zeros(d);
            for i in 0..d {
                let v = if integer {
                    rng.random_range(1..=3) as f64
                } else {
                    magnitude(rng)
                };
                match rng.random_range(0..3) {
                    0 => s[i] = v,
                    1 => y[i] = v,
                    _ => {}
                }
            }
            (s, y)
        }
        ConeSpec::Lorentz(_) => {
            let mut u: DVector<f64> = DVector::from_fn(d - 1, |_, _| rng.random_range(-1.0..1.0));
            let norm = u.norm().max(1e-3);
            u /= norm;
            let boundary = |sign: f64, scale: f64| {
                let mut v = DVector::zeros(d);
                v[0] = scale;
                v.rows_mut(1, d - 1).copy_from(&(&u * (sign * scale)));
                v
            };
            let interior = |rng: &mut dyn rand::RngCore| {
                let mut v: DVector<f64> = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
                v[0] = v.rows(1, d - 1).norm() + rng.random_range(0.5..1.5);
                v
            };
            let zero = DVector::zeros(d);
            match rng.random_range(0..6) {
                0 => (interior(rng), zero),
                1 => (zero, interior(rng)),
                2 => (zero.clone(), zero),
                3 => {
                    let (a, b) = (magnitude(rng), magnitude(rng));
                    (boundary(1.0, a), boundary(-1.0, b))
                }
                4 => (boundary(1.0, magnitude(rng)), zero),
                _ => (zero, boundary(1.0, magnitude(rng))),
            }
        }
        ConeSpec::Psd(n) => {
            let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let q = g.qr().q();
            let mut a = DVector::zeros(n);
            let mut b = DVector::zeros(n);
            for i in 0..n {
                match rng.random_range(0..3) {
                    0 => a[i] = magnitude(rng),
                    1 => b[i] = magnitude(rng),
                    _ => {}
                }
            }
            let s = &q * DMatrix::from_diagonal(&a) * q.transpose();
            let y = &q * DMatrix::from_diagonal(&b) * q.transpose();
            (svec(&s), svec(&y))
        }
    }
}

/// Random instance of the given shape with a known optimal pair and zero
/// duality gap. The constraint matrix has full column rank.
pub fn zero_gap_instance(shape: &Shape, rng: &mut impl Rng, name: &str) -> Instance {
    let integer = shape.family == Family::Lp;
    loop {
        let blocks = draw_blocks(shape, rng);
        let total: usize = blocks.iter().map(ConeSpec::dim).sum();
        let n = rng.random_range(1..=shape.max_n.min(total));
        let entry = |rng: &mut dyn rand::RngCore| {
            if integer {
                rng.random_range(-3..=3) as f64
            } else {
                rng.random_range(-1.0..1.0)
            }
        };
        let a = DMatrix::from_fn(total, n, |_, _| entry(rng));
        if a.clone().svd(false, false).singular_values.min() < 1e-3 {
            continue;
        }
        let x = DVector::from_fn(n, |_, _| entry(rng));
        let mut s = Vec::new();
        let mut y = Vec::new();
        for k in &blocks {
            let (sj, yj) = draw_pair(k, rng, integer);
            s.push(sj);
            y.push(yj);
        }
        let mut a_blocks = Vec::new();
        let mut b_blocks = Vec::new();
        let mut c = DVector::zeros(n);
        let mut off = 0;
        for (j, k) in blocks.iter().enumerate() {
            let aj = a.rows(off, k.dim()).into_owned();
            off += k.dim();
            b_blocks.push(&aj * &x - &s[j]);
            c += aj.transpose() * &y[j];
            a_blocks.push(aj);
        }
        let problem =
            ConicProblem::new(name, blocks, a_blocks, b_blocks, c).expect("consistent shapes");
        return Instance {
            problem,
            pair: PrimalDualPair::new(x, y),
        };
    }
}

/// Homogeneous feasibility problem over orthant blocks with small integer
/// rows; some rows are negated copies of others so that lineality appears.
pub fn homogeneous_orthant(
    rng: &mut impl Rng,
    max_n: usize,
    max_total_dim: usize,
    name: &str,
) -> ConicProblem {
    let n = rng.random_range(1..=max_n);
    let total = rng.random_range(1..=max_total_dim);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(total);
    while rows.len() < total {
        if !rows.is_empty() && rng.random_bool(0.3) {
            let r = rows
                .choose(rng)
                .expect("nonempty")
                .iter()
                .map(|v| -v)
                .collect();
            rows.push(r);
        } else {
            rows.push((0..n).map(|_| rng.random_range(-2..=2) as f64).collect());
        }
    }
    let mut a_blocks = Vec::new();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < total {
        let d = rng.random_range(1..=(total - i).min(3));
        let m = DMatrix::from_fn(d, n, |r, c| rows[i + r][c]);
        a_blocks.push(m);
        blocks.push(ConeSpec::Orthant(d));
        i += d;
    }
    ConicProblem::homogeneous_from(name, blocks, a_blocks).expect("consistent shapes")
}
