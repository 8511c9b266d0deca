//! Linear lifts `s ↦ M^j s` of cone blocks and the arrow embedding of
//! Lorentz cones into PSD cones.
//!
//! Arrow matrices are built with lower-right block `s₀·I_m`, which makes
//! the map linear with adjoint `(Tr Y, 2Ȳ₀)`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cones::{classify_membership, interior_point, polar, svec, ConeSpec, Membership};
use crate::model::{ConicProblem, ModelError};
use crate::partition::{
    classify, ClassifyOptions, FourPartition, PartitionError, PartitionReport, SixPartition,
};
use crate::solver::{solve, SolveOptions, SolveStatus, SolverError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiftError {
    #[error("map has {map} blocks, problem has {problem}")]
    BlockCount { map: usize, problem: usize },
    #[error("block {block}: map is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    Dimension {
        block: usize,
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("block {block}: arrow lift needs a Lorentz block, got {cone}")]
    NotLorentz { block: usize, cone: ConeSpec },
    #[error("block {block}: dual vector is not in the polar of {cone}")]
    NotInPolar { block: usize, cone: ConeSpec },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LiftKind {
    Arrow,
    General,
}

/// One block map `M^j` with its target cone.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMap {
    pub matrix: DMatrix<f64>,
    pub target: ConeSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftMap {
    pub kind: LiftKind,
    pub blocks: Vec<BlockMap>,
}

/// `[[s₀, s̄ᵀ], [s̄, s₀·I_m]]`.
pub fn arrow(s: &DVector<f64>) -> DMatrix<f64> {
    let n = s.len();
    let mut m = DMatrix::from_diagonal_element(n, n, s[0]);
    for i in 1..n {
        m[(0, i)] = s[i];
        m[(i, 0)] = s[i];
    }
    m
}

/// The arrow matrix with an unscaled identity in the lower-right block.
/// It is affine rather than linear and is kept only for comparison.
pub fn arrow_printed(s: &DVector<f64>) -> DMatrix<f64> {
    let mut m = arrow(s);
    for i in 1..s.len() {
        m[(i, i)] = 1.0;
    }
    m
}

/// `(Tr Y, 2Ȳ₀)` with `Ȳ₀` the first column of `Y` below the diagonal.
pub fn arrow_adjoint(y: &DMatrix<f64>) -> DVector<f64> {
    let n = y.nrows();
    let mut v = DVector::zeros(n);
    v[0] = y.trace();
    for i in 1..n {
        v[i] = y[(i, 0)] + y[(0, i)];
    }
    v
}

/// Matrix of `s ↦ svec(arrow(s))`.
pub fn arrow_matrix(dim: usize) -> DMatrix<f64> {
    let cols: Vec<DVector<f64>> = (0..dim)
        .map(|i| {
            let mut e = DVector::zeros(dim);
            e[i] = 1.0;
            svec(&arrow(&e))
        })
        .collect();
    DMatrix::from_columns(&cols)
}

impl LiftMap {
    pub fn general(blocks: Vec<(DMatrix<f64>, ConeSpec)>) -> Self {
        LiftMap {
            kind: LiftKind::General,
            blocks: blocks
                .into_iter()
                .map(|(matrix, target)| BlockMap { matrix, target })
                .collect(),
        }
    }

    pub fn identity(cones: &[ConeSpec]) -> Self {
        LiftMap::general(
            cones
                .iter()
                .map(|&k| (DMatrix::identity(k.dim(), k.dim()), k))
                .collect(),
        )
    }

    /// Arrow lift of every block; dimension-one orthants count as `L_0`.
    pub fn arrow(cones: &[ConeSpec]) -> Result<Self, LiftError> {
        let blocks = cones
            .iter()
            .enumerate()
            .map(|(block, &cone)| match cone {
                ConeSpec::Lorentz(d) | ConeSpec::Orthant(d @ 1) => Ok(BlockMap {
                    matrix: arrow_matrix(d),
                    target: ConeSpec::Psd(d),
                }),
                _ => Err(LiftError::NotLorentz { block, cone }),
            })
            .collect::<Result<_, _>>()?;
        Ok(LiftMap {
            kind: LiftKind::Arrow,
            blocks,
        })
    }

    pub fn check(&self, cones: &[ConeSpec]) -> Result<(), LiftError> {
        if self.blocks.len() != cones.len() {
            return Err(LiftError::BlockCount {
                map: self.blocks.len(),
                problem: cones.len(),
            });
        }
        for (block, (bm, k)) in self.blocks.iter().zip(cones).enumerate() {
            let (rows, cols) = bm.matrix.shape();
            if rows != bm.target.dim() || cols != k.dim() {
                return Err(LiftError::Dimension {
                    block,
                    rows,
                    cols,
                    expected_rows: bm.target.dim(),
                    expected_cols: k.dim(),
                });
            }
        }
        Ok(())
    }

    pub fn targets(&self) -> Vec<ConeSpec> {
        self.blocks.iter().map(|b| b.target).collect()
    }
}

/// The lifted problem with data `(M^j A^j, M^j b^j, c)` over the target cones.
pub fn lift_problem(problem: &ConicProblem, map: &LiftMap) -> Result<ConicProblem, LiftError> {
    map.check(&problem.blocks)?;
    let a = map
        .blocks
        .iter()
        .zip(&problem.a_blocks)
        .map(|(bm, a)| &bm.matrix * a)
        .collect();
    let b = map
        .blocks
        .iter()
        .zip(&problem.b_blocks)
        .map(|(bm, b)| &bm.matrix * b)
        .collect();
    Ok(ConicProblem::new(
        format!("{}_lifted", problem.name),
        map.targets(),
        a,
        b,
        problem.c.clone(),
    )?)
}

/// `y^j = (M^j)ᵀ z^j` after checking `z^j ∈ 𝒦_j⁺`.
pub fn transport_dual(
    map: &LiftMap,
    z_blocks: &[DVector<f64>],
    tol: f64,
) -> Result<Vec<DVector<f64>>, LiftError> {
    if z_blocks.len() != map.blocks.len() {
        return Err(LiftError::BlockCount {
            map: map.blocks.len(),
            problem: z_blocks.len(),
        });
    }
    map.blocks
        .iter()
        .zip(z_blocks)
        .enumerate()
        .map(|(block, (bm, z))| {
            let cone = polar(&bm.target);
            let class = classify_membership(&cone, z, tol).map_err(|_| LiftError::Dimension {
                block,
                rows: z.len(),
                cols: 1,
                expected_rows: bm.target.dim(),
                expected_cols: 1,
            })?;
            if class.class == Membership::Outside {
                return Err(LiftError::NotInPolar { block, cone });
            }
            Ok(bm.matrix.transpose() * z)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HypothesisOptions {
    pub solver: SolveOptions,
    /// Points sampled per block for the membership and boundary checks.
    pub samples: usize,
    /// Band of the sampled membership classification.
    pub membership_tol: f64,
    pub seed: u64,
}

impl Default for HypothesisOptions {
    fn default() -> Self {
        HypothesisOptions {
            solver: SolveOptions::default(),
            samples: 2000,
            membership_tol: 1e-9,
            seed: 0x11f7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub kind: LiftKind,
    pub injective: bool,
    /// `‖Mᵀz‖ ≥ γ‖z‖` on `𝒦⁺` with `γ > 10·tol`.
    pub adjoint_image_closed_via_coercivity: bool,
    /// Lower estimate of the coercivity constant.
    pub coercivity: f64,
    /// `s ∈ bd K_j ⟺ M^j s ∈ bd 𝒦_j` on every sample.
    pub boundary_preserving: bool,
    /// `s ∈ K_j ⟺ M^j s ∈ 𝒦_j` on every sample.
    pub equivalence: bool,
    /// `Mᵀz = 0`, `z ∈ 𝒦⁺` forces `z = 0`.
    pub kernel_trivial_on_polar: bool,
    /// Nonzero `z^j ∈ 𝒦_j⁺` with `(M^j)ᵀ z^j = 0`, scaled to unit max-norm.
    pub kernel_witness: Option<(usize, Vec<f64>)>,
    /// Blocks failing the sampled boundary or membership check.
    pub sample_failures: Vec<usize>,
}

impl HypothesisReport {
    /// Injective, closed adjoint image and boundary preserving.
    pub fn four_partition_hypotheses(&self) -> bool {
        self.injective && self.adjoint_image_closed_via_coercivity && self.boundary_preserving
    }
}

struct BlockHypotheses {
    injective: bool,
    coercivity: f64,
    kernel_witness: Option<DVector<f64>>,
    boundary: bool,
    equivalence: bool,
}

pub fn verify_hypotheses(
    map: &LiftMap,
    source: &[ConeSpec],
    opts: &HypothesisOptions,
) -> Result<HypothesisReport, LiftError> {
    map.check(source)?;
    let per_block: Vec<BlockHypotheses> = map
        .blocks
        .par_iter()
        .zip(source.par_iter())
        .enumerate()
        .map(|(j, (bm, k))| block_hypotheses(j, bm, k, opts))
        .collect::<Result<_, _>>()?;

    let coercivity = per_block
        .iter()
        .map(|b| b.coercivity)
        .fold(f64::INFINITY, f64::min);
    let kernel_witness = per_block.iter().enumerate().find_map(|(j, b)| {
        b.kernel_witness
            .as_ref()
            .map(|w| (j, w.iter().copied().collect()))
    });
    let sample_failures = per_block
        .iter()
        .enumerate()
        .filter(|(_, b)| !(b.boundary && b.equivalence))
        .map(|(j, _)| j)
        .collect();
    Ok(HypothesisReport {
        kind: map.kind,
        injective: per_block.iter().all(|b| b.injective),
        adjoint_image_closed_via_coercivity: coercivity > 10.0 * opts.solver.tol,
        coercivity,
        boundary_preserving: per_block.iter().all(|b| b.boundary),
        equivalence: per_block.iter().all(|b| b.equivalence),
        kernel_trivial_on_polar: kernel_witness.is_none(),
        kernel_witness,
        sample_failures,
    })
}

fn block_hypotheses(
    j: usize,
    bm: &BlockMap,
    source: &ConeSpec,
    opts: &HypothesisOptions,
) -> Result<BlockHypotheses, LiftError> {
    let m = &bm.matrix;
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = if m.ncols() == 0 {
        f64::INFINITY
    } else if m.nrows() < m.ncols() {
        0.0
    } else {
        svd.singular_values.min()
    };
    let injective = smin > 1e-10 * smax.max(1.0);

    let coercivity = coercivity_bound(bm, &opts.solver)?;
    let kernel_witness = polar_kernel_witness(bm, &opts.solver)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ ((j as u64) << 20));
    let tol = opts.membership_tol;
    let mut boundary = true;
    let mut equivalence = true;
    for i in 0..opts.samples {
        let shape = match i % 4 {
            0 => Sample::Boundary,
            3 => Sample::Any,
            _ => Sample::Interior,
        };
        let s = sample_point(source, shape, &mut rng);
        let ms = m * &s;
        let a = classify_membership(source, &s, tol)
            .expect("sample length")
            .class;
        let b = classify_membership(&bm.target, &ms, tol)
            .expect("target length")
            .class;
        if (a == Membership::Outside) != (b == Membership::Outside) {
            equivalence = false;
        }
        if a != Membership::Outside && (a == Membership::Boundary) != (b == Membership::Boundary) {
            boundary = false;
        }
    }
    Ok(BlockHypotheses {
        injective,
        coercivity,
        kernel_witness,
        boundary,
        equivalence,
    })
}

#[derive(Clone, Copy)]
enum Sample {
    Interior,
    Boundary,
    Any,
}

fn sample_point(cone: &ConeSpec, shape: Sample, rng: &mut impl Rng) -> DVector<f64> {
    let d = cone.dim();
    match (*cone, shape) {
        (_, Sample::Any) => DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0)),
        (ConeSpec::Orthant(_), Sample::Interior) => {
            DVector::from_fn(d, |_, _| rng.random_range(0.05..1.0))
        }
        (ConeSpec::Orthant(_), Sample::Boundary) => {
            let zero = rng.random_range(0..d);
            DVector::from_fn(d, |i, _| {
                if i == zero {
                    0.0
                } else {
                    rng.random_range(0.0..1.0)
                }
            })
        }
        (ConeSpec::Lorentz(_), s) => {
            let mut v = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
            let r = v.rows(1, d - 1).norm();
            v[0] = match s {
                Sample::Boundary if d > 1 => r,
                Sample::Boundary => 0.0,
                _ => r + rng.random_range(0.05..1.0),
            };
            v
        }
        (ConeSpec::Psd(n), s) => {
            let rank = match s {
                Sample::Boundary => rng.random_range(0..n),
                _ => n,
            };
            let q = DMatrix::from_fn(n, rank, |_, _| rng.random_range(-1.0..1.0));
            let mut x = &q * q.transpose();
            if !matches!(s, Sample::Boundary) {
                x += DMatrix::identity(n, n) * 0.05;
            }
            svec(&x)
        }
    }
}

/// Orthonormal basis of `ker Mᵀ` as columns.
fn left_kernel(m: &DMatrix<f64>) -> DMatrix<f64> {
    let r = m.nrows();
    if r == 0 {
        return DMatrix::zeros(0, 0);
    }
    // eigenvectors of M Mᵀ with negligible eigenvalue
    let mmt = m * m.transpose();
    let eig = mmt.clone().symmetric_eigen();
    let top = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |a, &l| a.max(l.abs()))
        .max(1.0);
    let cols: Vec<DVector<f64>> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l.abs() <= 1e-12 * top)
        .map(|(i, _)| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(r, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Maximizes `e·z` over `z = Nw ∈ 𝒦⁺`, `‖w‖ ≤ 1`, where `N` spans `ker Mᵀ`.
fn polar_kernel_witness(
    bm: &BlockMap,
    opts: &SolveOptions,
) -> Result<Option<DVector<f64>>, LiftError> {
    let nmat = left_kernel(&bm.matrix);
    let k = nmat.ncols();
    if k == 0 {
        return Ok(None);
    }
    let cone = polar(&bm.target);
    let e = interior_point(&bm.target);
    let c = -(nmat.transpose() * &e);
    let mut ball = DMatrix::zeros(k + 1, k);
    ball.view_mut((1, 0), (k, k))
        .copy_from(&DMatrix::identity(k, k));
    let mut ball_b = DVector::zeros(k + 1);
    ball_b[0] = -1.0;
    let p = ConicProblem::new(
        "polar_kernel",
        vec![cone, ConeSpec::Lorentz(k + 1)],
        vec![nmat.clone(), ball],
        vec![DVector::zeros(cone.dim()), ball_b],
        c,
    )?;
    let r = solve(&p, opts)?;
    if r.status != SolveStatus::Optimal {
        return Err(SolverError::NotOptimal(r.status).into());
    }
    if -r.optimal_value <= opts.tol.sqrt() {
        return Ok(None);
    }
    let z = &nmat * &r.pair.x;
    let scale = z.amax();
    Ok(Some(z.map(|v| {
        let t = v / scale;
        if t.abs() < 1e-6 {
            0.0
        } else {
            t
        }
    })))
}

/// `min ‖Mᵀz‖` over `z ∈ 𝒦⁺` with `e·z ≥ 1`, divided by the largest norm
/// such a normalized `z` can have.
fn coercivity_bound(bm: &BlockMap, opts: &SolveOptions) -> Result<f64, LiftError> {
    let r = bm.target.dim();
    let q = bm.matrix.ncols();
    let cone = polar(&bm.target);
    let e = interior_point(&bm.target);
    let n = r + 1;
    let mut soc = DMatrix::zeros(q + 1, n);
    soc[(0, 0)] = 1.0;
    soc.view_mut((1, 1), (q, r))
        .copy_from(&bm.matrix.transpose());
    let mut member = DMatrix::zeros(r, n);
    member
        .view_mut((0, 1), (r, r))
        .copy_from(&DMatrix::identity(r, r));
    let mut norm = DMatrix::zeros(1, n);
    norm.view_mut((0, 1), (1, r)).copy_from(&e.transpose());
    let mut c = DVector::zeros(n);
    c[0] = 1.0;
    let p = ConicProblem::new(
        "coercivity",
        vec![ConeSpec::Lorentz(q + 1), cone, ConeSpec::Orthant(1)],
        vec![soc, member, norm],
        vec![
            DVector::zeros(q + 1),
            DVector::zeros(r),
            DVector::from_element(1, 1.0),
        ],
        c,
    )?;
    let res = solve(&p, opts)?;
    if res.status != SolveStatus::Optimal {
        return Err(SolverError::NotOptimal(res.status).into());
    }
    let widest = match bm.target {
        ConeSpec::Orthant(_) | ConeSpec::Psd(_) => 1.0,
        ConeSpec::Lorentz(1) => 1.0,
        ConeSpec::Lorentz(_) => std::f64::consts::SQRT_2,
    };
    Ok(res.optimal_value.max(0.0) / widest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AssertionStatus {
    Pass,
    Fail,
    /// The gating hypothesis does not hold.
    NotAsserted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub label: char,
    pub claim: &'static str,
    pub gate: &'static str,
    pub status: AssertionStatus,
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub original: PartitionReport,
    pub lifted: PartitionReport,
    pub hypotheses: HypothesisReport,
    pub assertions: Vec<Assertion>,
}

impl ComparisonReport {
    pub fn failed(&self) -> bool {
        self.assertions
            .iter()
            .any(|a| a.status == AssertionStatus::Fail)
    }

    pub fn same_four(&self) -> bool {
        same_four(&self.original.four, &self.lifted.four)
    }

    pub fn same_six(&self) -> bool {
        same_six(&self.original.six, &self.lifted.six)
    }

    /// Blocks whose six-partition class differs between the two problems.
    pub fn six_differences(&self) -> Vec<usize> {
        let n = self.original.evidence.len();
        (0..n)
            .filter(|&j| six_class(&self.original.six, j) != six_class(&self.lifted.six, j))
            .collect()
    }
}

fn same_four(a: &FourPartition, b: &FourPartition) -> bool {
    a.b == b.b && a.n == b.n && a.r == b.r && a.t == b.t
}

fn same_six(a: &SixPartition, b: &SixPartition) -> bool {
    a.parts() == b.parts()
}

/// Name of the six-partition set holding block `j`.
pub fn six_class(six: &SixPartition, j: usize) -> &'static str {
    const NAMES: [&str; 6] = ["B", "N", "B'", "N'", "O", "C"];
    six.parts()
        .iter()
        .position(|s| s.contains(&j))
        .map_or("?", |i| NAMES[i])
}

fn assertion(
    label: char,
    claim: &'static str,
    gate: &'static str,
    gated_in: bool,
    holds: bool,
) -> Assertion {
    let status = match (gated_in, holds) {
        (false, _) => AssertionStatus::NotAsserted,
        (true, true) => AssertionStatus::Pass,
        (true, false) => AssertionStatus::Fail,
    };
    Assertion {
        label,
        claim,
        gate,
        status,
    }
}

/// Classifies `problem` and its lift and checks which partition relations
/// the lift's hypotheses guarantee.
pub fn compare_partitions(
    problem: &ConicProblem,
    map: &LiftMap,
    opts: &ClassifyOptions,
    hyp_opts: &HypothesisOptions,
) -> Result<ComparisonReport, LiftError> {
    let lifted_problem = lift_problem(problem, map)?;
    let hypotheses = verify_hypotheses(map, &problem.blocks, hyp_opts)?;
    let (original, lifted) = rayon::join(
        || classify(problem, opts),
        || classify(&lifted_problem, opts),
    );
    let (original, lifted) = (original?, lifted?);

    let (p6, m6) = (&original.six, &lifted.six);
    let r_eq_c = original.four.r == p6.c && lifted.four.r == m6.c;
    let h = &hypotheses;
    let assertions = vec![
        assertion(
            'a',
            "four-partitions coincide",
            "injective, closed adjoint image, boundary preserving",
            h.four_partition_hypotheses(),
            same_four(&original.four, &lifted.four),
        ),
        assertion(
            'b',
            "B0 of the original contains B0 of the lift",
            "closed adjoint image",
            h.adjoint_image_closed_via_coercivity,
            m6.b0.is_subset(&p6.b0),
        ),
        assertion(
            'c',
            "N0 sets coincide",
            "injective",
            h.injective,
            p6.n0 == m6.n0,
        ),
        assertion(
            'd',
            "B0 sets and six-partitions coincide",
            "injective, kernel trivial on polar",
            h.injective && h.kernel_trivial_on_polar,
            p6.b0 == m6.b0 && same_six(p6, m6),
        ),
        assertion(
            'e',
            "R and T coincide",
            "kernel trivial on polar, R = C on both problems",
            h.kernel_trivial_on_polar && r_eq_c,
            original.four.r == lifted.four.r && original.four.t == lifted.four.t,
        ),
    ];
    Ok(ComparisonReport {
        original,
        lifted,
        hypotheses,
        assertions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::numeric_rank;
    use crate::examples;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn arrow_of_axis_point() {
        assert_eq!(arrow(&dvector![1.0, 0.0]), DMatrix::identity(2, 2));
    }

    #[test]
    fn arrow_rank_on_boundary_and_interior() {
        let b = arrow(&dvector![1.0, 1.0]);
        assert_eq!(b, dmatrix![1.0, 1.0; 1.0, 1.0]);
        assert_eq!(numeric_rank(&b, 1e-9), 1);
        let i = arrow(&dvector![2.0, 1.0]);
        assert_eq!(i, dmatrix![2.0, 1.0; 1.0, 2.0]);
        assert_eq!(numeric_rank(&i, 1e-9), 2);
    }

    #[test]
    fn printed_arrow_differs_off_axis() {
        let s = dvector![3.0, 1.0, 0.0];
        assert_eq!(arrow_printed(&s)[(1, 1)], 1.0);
        assert_eq!(arrow(&s)[(1, 1)], 3.0);
        assert_eq!(
            arrow_printed(&dvector![1.0, 0.5]),
            arrow(&dvector![1.0, 0.5])
        );
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(
            arrow_adjoint(&DMatrix::identity(3, 3)),
            dvector![3.0, 0.0, 0.0]
        );
        let y = DMatrix::from_diagonal(&dvector![1.0, 0.0, 0.0]);
        assert_eq!(arrow_adjoint(&y), dvector![1.0, 0.0, 0.0]);
    }

    #[test]
    fn arrow_matrix_is_svec_of_arrow() {
        let s = dvector![2.0, -1.0, 0.5];
        let lhs = arrow_matrix(3) * &s;
        assert!((lhs - svec(&arrow(&s))).norm() < 1e-15);
        let y = dmatrix![1.0, 0.2, -0.3; 0.2, 2.0, 0.1; -0.3, 0.1, 0.5];
        let adj = arrow_matrix(3).transpose() * svec(&y);
        assert!((adj - arrow_adjoint(&y)).norm() < 1e-14);
    }

    #[test]
    fn lift_of_counterexample_matches_printed_blocks() {
        let p = examples::lift_counterexample();
        let l = lift_problem(&p, &examples::lift_counterexample_map()).unwrap();
        assert_eq!(l.a_blocks[1], dmatrix![1.0, 0.0; 1.0, 0.0]);
        assert_eq!(l.a_blocks[0], p.a_blocks[0]);
        assert_eq!(l.blocks, vec![ConeSpec::Lorentz(3), ConeSpec::Lorentz(2)]);
    }

    #[test]
    fn identity_lift_is_noop() {
        let p = examples::mixed_coarse();
        let l = lift_problem(&p, &LiftMap::identity(&p.blocks)).unwrap();
        assert_eq!(l.a_blocks, p.a_blocks);
        assert_eq!(l.b_blocks, p.b_blocks);
        assert_eq!(l.blocks, p.blocks);
    }

    #[test]
    fn arrow_lift_of_single_block() {
        let p = ConicProblem::homogeneous_from(
            "l1",
            vec![ConeSpec::Lorentz(2)],
            vec![DMatrix::identity(2, 2)],
        )
        .unwrap();
        let map = LiftMap::arrow(&p.blocks).unwrap();
        let l = lift_problem(&p, &map).unwrap();
        assert_eq!(l.blocks, vec![ConeSpec::Psd(2)]);
        assert_eq!(l.a_blocks[0].shape(), (3, 2));
        assert!(LiftMap::arrow(&[ConeSpec::Orthant(2)]).is_err());
    }

    #[test]
    fn transports_counterexample_dual() {
        let map = examples::lift_counterexample_map();
        let z = vec![dvector![1.0, 0.0, -1.0], dvector![1.0, -1.0]];
        let y = transport_dual(&map, &z, 1e-9).unwrap();
        assert_eq!(y, vec![dvector![1.0, 0.0, -1.0], dvector![0.0]]);
        let zero = transport_dual(&map, &[DVector::zeros(3), DVector::zeros(2)], 1e-9).unwrap();
        assert!(zero.iter().all(|v| v.iter().all(|&x| x == 0.0)));
        assert!(
            transport_dual(&map, &[dvector![-1.0, 0.0, 0.0], DVector::zeros(2)], 1e-9).is_err()
        );
    }

    #[test]
    fn counterexample_kernel_witness() {
        let p = examples::lift_counterexample();
        let opts = HypothesisOptions {
            samples: 200,
            ..HypothesisOptions::default()
        };
        let h = verify_hypotheses(&examples::lift_counterexample_map(), &p.blocks, &opts).unwrap();
        assert!(h.injective);
        assert!(!h.kernel_trivial_on_polar);
        let (j, w) = h.kernel_witness.clone().unwrap();
        assert_eq!(j, 1);
        assert!(
            (w[0] - 1.0).abs() < 1e-6 && (w[1] + 1.0).abs() < 1e-6,
            "{w:?}"
        );
        assert!(!h.adjoint_image_closed_via_coercivity);
        assert!(!h.boundary_preserving);
    }

    #[test]
    fn arrow_hypotheses_hold() {
        let cones = [
            ConeSpec::Lorentz(1),
            ConeSpec::Lorentz(3),
            ConeSpec::Lorentz(4),
        ];
        let map = LiftMap::arrow(&cones).unwrap();
        let opts = HypothesisOptions {
            samples: 400,
            ..HypothesisOptions::default()
        };
        let h = verify_hypotheses(&map, &cones, &opts).unwrap();
        assert!(
            h.injective && h.adjoint_image_closed_via_coercivity,
            "{h:?}"
        );
        assert!(
            h.boundary_preserving && h.equivalence && h.kernel_trivial_on_polar,
            "{h:?}"
        );
    }

    #[test]
    fn identity_hypotheses_hold() {
        let cones = [ConeSpec::Orthant(2), ConeSpec::Lorentz(3), ConeSpec::Psd(2)];
        let h = verify_hypotheses(
            &LiftMap::identity(&cones),
            &cones,
            &HypothesisOptions::default(),
        )
        .unwrap();
        assert!(
            h.injective && h.adjoint_image_closed_via_coercivity,
            "{h:?}"
        );
        assert!(
            h.boundary_preserving && h.equivalence && h.kernel_trivial_on_polar,
            "{h:?}"
        );
    }

    #[test]
    fn counterexample_partitions_change() {
        let p = examples::lift_counterexample();
        let hyp = HypothesisOptions {
            samples: 200,
            ..HypothesisOptions::default()
        };
        let r = compare_partitions(
            &p,
            &examples::lift_counterexample_map(),
            &ClassifyOptions::default(),
            &hyp,
        )
        .unwrap();
        assert_eq!(six_class(&r.original.six, 0), "C");
        assert_eq!(six_class(&r.original.six, 1), "O");
        assert!(r.original.four.r.contains(&0));
        assert_eq!(six_class(&r.lifted.six, 0), "C");
        assert_eq!(six_class(&r.lifted.six, 1), "N'");
        assert_eq!(r.six_differences(), vec![1]);
        let d = r.assertions.iter().find(|a| a.label == 'd').unwrap();
        assert_eq!(d.status, AssertionStatus::NotAsserted);
        assert!(!r.failed(), "{:?}", r.assertions);
    }

    #[test]
    fn arrow_lift_keeps_partitions_of_mixed_example() {
        let p = examples::mixed_refined();
        let map = LiftMap::arrow(&p.blocks).unwrap();
        let hyp = HypothesisOptions {
            samples: 200,
            ..HypothesisOptions::default()
        };
        let r = compare_partitions(&p, &map, &ClassifyOptions::default(), &hyp).unwrap();
        assert!(
            r.same_four() && r.same_six(),
            "{:?}\n{:?}",
            r.original.four,
            r.lifted.four
        );
        assert!(!r.failed(), "{:?}", r.assertions);
    }
}
