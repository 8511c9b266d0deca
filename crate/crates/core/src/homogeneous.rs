//! Six-partition of homogeneous polyhedral feasibility problems from the
//! lineality space of `Aᵀ K⁺`.
//!
//! Only orthant blocks are handled. Their polar is generated by unit
//! vectors, so `Aᵀ K⁺` is the cone generated by the rows of `A`, and every
//! membership question becomes an exact rational feasibility problem.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

use crate::cones::ConeSpec;
use crate::model::ConicProblem;
use crate::partition::{FourPartition, IndexSet, SixPartition};
use crate::rational::{nonneg_combination, to_f64, vector, Feasibility, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomogeneousError {
    #[error("block {block} has cone {cone}; only orthant blocks are supported")]
    UnsupportedCone { block: usize, cone: ConeSpec },
    #[error("problem is not homogeneous (b and c must vanish)")]
    NotHomogeneous,
    #[error("generated cone has no generators")]
    Empty,
}

/// Finitely generated cone with its lineality space.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedCone {
    pub generators: Vec<DVector<f64>>,
    /// Orthonormal basis of the lineality space.
    pub lineality_basis: Vec<DVector<f64>>,
    /// Per generator `g`: weights writing `-g` in the cone, or a vector
    /// separating `-g` from it.
    pub certificates: Vec<Feasibility>,
}

impl GeneratedCone {
    pub fn new(generators: Vec<DVector<f64>>) -> Result<Self, HomogeneousError> {
        if generators.is_empty() {
            return Err(HomogeneousError::Empty);
        }
        let certificates = lineality_certificates(&generators);
        let lineality_basis = orthonormal_span(
            generators
                .iter()
                .zip(&certificates)
                .filter(|(_, c)| c.is_feasible())
                .map(|(g, _)| g),
            generators[0].len(),
        );
        Ok(GeneratedCone {
            generators,
            lineality_basis,
            certificates,
        })
    }

    pub fn dim(&self) -> usize {
        self.generators[0].len()
    }

    /// Indices of generators lying in the lineality space.
    pub fn lineality_generators(&self) -> Vec<usize> {
        self.certificates
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_feasible())
            .map(|(i, _)| i)
            .collect()
    }
}

/// `{v : ±v ∈ cone}` as an orthonormal basis.
pub fn lineality(cone: &GeneratedCone) -> Vec<DVector<f64>> {
    cone.lineality_basis.clone()
}

fn lineality_certificates(generators: &[DVector<f64>]) -> Vec<Feasibility> {
    let cols: Vec<Vec<Rational>> = generators.iter().map(vector).collect();
    cols.par_iter()
        .map(|g| {
            let target: Vec<Rational> = g.iter().map(|v| -v.clone()).collect();
            nonneg_combination(&cols, &target)
        })
        .collect()
}

fn orthonormal_span<'a>(
    vectors: impl Iterator<Item = &'a DVector<f64>>,
    dim: usize,
) -> Vec<DVector<f64>> {
    let cols: Vec<DVector<f64>> = vectors.cloned().collect();
    if cols.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_columns(&cols);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors");
    let smax = svd.singular_values.max();
    let cut = smax * 1e-10 * dim.max(cols.len()) as f64;
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > cut)
        .map(|(i, _)| u.column(i).into_owned())
        .collect()
}

fn check_scope(problem: &ConicProblem) -> Result<(), HomogeneousError> {
    if !problem.homogeneous() {
        return Err(HomogeneousError::NotHomogeneous);
    }
    match problem
        .blocks
        .iter()
        .enumerate()
        .find(|(_, k)| !matches!(k, ConeSpec::Orthant(_)))
    {
        Some((block, &cone)) => Err(HomogeneousError::UnsupportedCone { block, cone }),
        None => Ok(()),
    }
}

/// Generators of `Aᵀ K⁺`: the rows of the stacked constraint matrix.
pub fn image_cone(problem: &ConicProblem) -> Result<GeneratedCone, HomogeneousError> {
    check_scope(problem)?;
    let rows = problem
        .a_blocks
        .iter()
        .flat_map(|a| a.row_iter().map(|r| r.transpose()).collect::<Vec<_>>())
        .collect();
    GeneratedCone::new(rows)
}

struct BlockData {
    rows: Vec<Vec<Rational>>,
}

fn block_rows(problem: &ConicProblem) -> Vec<BlockData> {
    problem
        .a_blocks
        .iter()
        .map(|a| BlockData {
            rows: a.row_iter().map(|r| vector(&r.transpose())).collect(),
        })
        .collect()
}

/// Columns `±l` for every lineality generator, so that the lineality space
/// is the set of their nonnegative combinations.
fn span_columns(cone: &GeneratedCone) -> Vec<Vec<Rational>> {
    cone.lineality_generators()
        .into_iter()
        .flat_map(|i| {
            let g = vector(&cone.generators[i]);
            let neg = g.iter().map(|v| -v.clone()).collect();
            [g, neg]
        })
        .collect()
}

/// `A_jᵀ(K_j⁺ \ {0}) ∩ Lin ≠ ∅`, normalized by `Σ y = 1`.
fn meets_lineality(block: &BlockData, span: &[Vec<Rational>], n: usize) -> bool {
    let one = Rational::from_integer(1.into());
    let zero = Rational::from_integer(0.into());
    let mut cols: Vec<Vec<Rational>> = block
        .rows
        .iter()
        .map(|r| {
            r.iter()
                .cloned()
                .chain(std::iter::once(one.clone()))
                .collect()
        })
        .collect();
    cols.extend(span.iter().map(|l| {
        l.iter()
            .map(|v| -v.clone())
            .chain(std::iter::once(zero.clone()))
            .collect()
    }));
    let mut h = vec![zero; n];
    h.push(one);
    nonneg_combination(&cols, &h).is_feasible()
}

/// `ri A_jᵀK_j⁺ ∩ Lin ≠ ∅`: every row weight at least one.
fn ri_meets_lineality(block: &BlockData, span: &[Vec<Rational>], n: usize) -> bool {
    let mut h = vec![Rational::from_integer(0.into()); n];
    for r in &block.rows {
        for (hi, v) in h.iter_mut().zip(r) {
            *hi -= v;
        }
    }
    let mut cols = block.rows.clone();
    cols.extend(span.iter().map(|l| l.iter().map(|v| -v.clone()).collect()));
    nonneg_combination(&cols, &h).is_feasible()
}

/// Six-partition from the dual characterization. The image cone is closed,
/// so `B = B⁰` and `N = N⁰`.
pub fn classify_six_dual(problem: &ConicProblem) -> Result<SixPartition, HomogeneousError> {
    let cone = image_cone(problem)?;
    let span = span_columns(&cone);
    let n = problem.n();
    let blocks = block_rows(problem);
    let flags: Vec<(bool, bool)> = blocks
        .par_iter()
        .map(|blk| {
            (
                !meets_lineality(blk, &span, n),
                ri_meets_lineality(blk, &span, n),
            )
        })
        .collect();
    let b: IndexSet = flags
        .iter()
        .enumerate()
        .filter(|(_, f)| f.0)
        .map(|(j, _)| j)
        .collect();
    let nn: IndexSet = flags
        .iter()
        .enumerate()
        .filter(|(_, f)| f.1)
        .map(|(j, _)| j)
        .collect();
    Ok(SixPartition::from_sets(
        problem.num_blocks(),
        b.clone(),
        nn.clone(),
        b,
        nn,
    ))
}

/// Blocks where `A_jᵀK_j⁺` meets the lineality spaces of the image cone
/// and of its closure in the same set.
pub fn r_tilde(problem: &ConicProblem) -> Result<IndexSet, HomogeneousError> {
    let cone = image_cone(problem)?;
    // polyhedral cones are closed: both lineality spaces are this one
    let closure = cone.clone();
    let span = span_columns(&cone);
    let span_closure = span_columns(&closure);
    Ok(block_rows(problem)
        .iter()
        .enumerate()
        .filter(|(_, blk)| block_meet(blk, &span) == block_meet(blk, &span_closure))
        .map(|(j, _)| j)
        .collect())
}

/// Rows of the block whose generator lies in the given lineality span,
/// which determine `A_jᵀK_j⁺ ∩ Lin` for a polyhedral block.
fn block_meet(block: &BlockData, span: &[Vec<Rational>]) -> Vec<bool> {
    block
        .rows
        .iter()
        .map(|r| nonneg_combination(span, r).is_feasible())
        .collect()
}

/// `R⁰ ⊆ R̃`.
pub fn check_r0_inclusion(
    problem: &ConicProblem,
    four: &FourPartition,
) -> Result<bool, HomogeneousError> {
    let rt = r_tilde(problem)?;
    Ok(four.r0.is_subset(&rt))
}

/// Exact weights of a feasibility answer as doubles.
pub fn weights_f64(answer: &Feasibility) -> Vec<f64> {
    match answer {
        Feasibility::Feasible(v) | Feasibility::Infeasible(v) => v.iter().map(to_f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::verify;
    use nalgebra::dmatrix;

    fn orthants(rows: &[&[f64]], dims: &[usize]) -> ConicProblem {
        let n = rows[0].len();
        let a =
            DMatrix::from_row_iterator(rows.len(), n, rows.iter().flat_map(|r| r.iter().copied()));
        let mut blocks = Vec::new();
        let mut off = 0;
        for &d in dims {
            blocks.push(a.rows(off, d).into_owned());
            off += d;
        }
        ConicProblem::homogeneous_from(
            "h",
            dims.iter().map(|&d| ConeSpec::Orthant(d)).collect(),
            blocks,
        )
        .unwrap()
    }

    #[test]
    fn identity_has_trivial_lineality() {
        let p = orthants(&[&[1.0, 0.0], &[0.0, 1.0]], &[2]);
        let cone = image_cone(&p).unwrap();
        assert_eq!(cone.generators.len(), 2);
        assert!(lineality(&cone).is_empty());
    }

    #[test]
    fn opposite_generators_span_a_line() {
        let cone = GeneratedCone::new(vec![
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![-1.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0]),
        ])
        .unwrap();
        let basis = lineality(&cone);
        assert_eq!(basis.len(), 1);
        assert!((basis[0][0].abs() - 1.0).abs() < 1e-12 && basis[0][1].abs() < 1e-12);
        assert_eq!(cone.lineality_generators(), vec![0, 1]);
    }

    #[test]
    fn certificates_verify() {
        let gens = vec![
            DVector::from_vec(vec![1.0, 2.0, 0.0]),
            DVector::from_vec(vec![-1.0, -2.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0, 1.0]),
            DVector::from_vec(vec![0.5, 0.0, -1.0]),
        ];
        let cone = GeneratedCone::new(gens.clone()).unwrap();
        let cols: Vec<_> = gens.iter().map(vector).collect();
        for (g, cert) in cols.iter().zip(&cone.certificates) {
            let neg: Vec<_> = g.iter().map(|v| -v.clone()).collect();
            assert!(verify(&cols, &neg, cert));
        }
    }

    #[test]
    fn single_orthant_row_is_b() {
        let p =
            ConicProblem::homogeneous_from("x>=0", vec![ConeSpec::Orthant(1)], vec![dmatrix![1.0]])
                .unwrap();
        let six = classify_six_dual(&p).unwrap();
        assert_eq!(six.b, IndexSet::from([0]));
        assert!(six.n.is_empty());
    }

    #[test]
    fn opposite_rows_are_n() {
        let p = ConicProblem::homogeneous_from(
            "x=0",
            vec![ConeSpec::Orthant(1), ConeSpec::Orthant(1)],
            vec![dmatrix![1.0], dmatrix![-1.0]],
        )
        .unwrap();
        let six = classify_six_dual(&p).unwrap();
        assert_eq!(six.n, IndexSet::from([0, 1]));
        assert_eq!(six.n0, IndexSet::from([0, 1]));
        assert!(six.b.is_empty());
    }

    #[test]
    fn mixed_coordinates_land_in_c() {
        // x1 = 0 forced, x2 free to be positive
        let p = orthants(&[&[1.0, 0.0], &[0.0, 1.0], &[-1.0, 0.0]], &[2, 1]);
        let six = classify_six_dual(&p).unwrap();
        assert_eq!(six.c, IndexSet::from([0]));
        assert_eq!(six.n, IndexSet::from([1]));
    }

    #[test]
    fn rejects_non_orthant() {
        let p = crate::examples::lift_counterexample();
        assert!(matches!(
            classify_six_dual(&p),
            Err(HomogeneousError::UnsupportedCone { block: 0, .. })
        ));
        assert_eq!(
            classify_six_dual(&crate::examples::trivial_lp()),
            Err(HomogeneousError::NotHomogeneous)
        );
    }

    #[test]
    fn r0_inclusion_holds() {
        let p = orthants(&[&[1.0, 0.0], &[0.0, 1.0], &[-1.0, 0.0]], &[2, 1]);
        assert_eq!(r_tilde(&p).unwrap(), IndexSet::from([0, 1]));
        let four = FourPartition::from_sets(
            2,
            IndexSet::new(),
            IndexSet::from([1]),
            IndexSet::from([0, 1]),
        );
        assert!(check_r0_inclusion(&p, &four).unwrap());
    }
}
