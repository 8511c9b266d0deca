//! Interior-point solves of `(P)/(D)` and support problems over optimal faces.
//!
//! A support problem maximizes an interiority functional of one block over
//! the primal or dual optimal face. Under zero duality gap the solution set
//! of the optimality system is the product of the two optimal faces, so
//! each side is searched on its own.

pub mod ipm;
pub(crate) mod scaling;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cones::{interior_point, polar, svec, ConeSpec};
use crate::model::{residuals, ConicProblem, ModelError, PrimalDualPair};
use ipm::{solve_cone_lp, ConeLp, IpmSettings, LpStatus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub step_fraction: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-8,
            max_iters: 200,
            step_fraction: 0.98,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.tol > 0.0) || !(self.step_fraction > 0.0 && self.step_fraction < 1.0) {
            return Err(SolverError::Options(format!(
                "tol = {}, step_fraction = {}",
                self.tol, self.step_fraction
            )));
        }
        Ok(())
    }

    fn ipm(&self) -> IpmSettings {
        IpmSettings {
            tol: self.tol,
            max_iters: self.max_iters,
            step_fraction: self.step_fraction,
            detect_infeasibility: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    NumericalFailure,
}

impl From<LpStatus> for SolveStatus {
    fn from(s: LpStatus) -> Self {
        match s {
            LpStatus::Optimal => SolveStatus::Optimal,
            LpStatus::PrimalInfeasible => SolveStatus::PrimalInfeasible,
            LpStatus::DualInfeasible => SolveStatus::DualInfeasible,
            LpStatus::NumericalFailure => SolveStatus::NumericalFailure,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub pair: PrimalDualPair,
    pub optimal_value: f64,
    pub iterations: usize,
    pub final_mu: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid options: {0}")]
    Options(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("problem is not solvable: {0:?}")]
    NotOptimal(SolveStatus),
    #[error("positive duality gap: primal {primal}, dual {dual}")]
    DualityGap { primal: f64, dual: f64 },
    #[error("support problem for block {block} ({side:?}) failed: {status:?}")]
    Support {
        block: usize,
        side: SupportSide,
        status: SolveStatus,
    },
}

/// Which functional a support problem maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SupportSide {
    PrimalInterior,
    DualInterior,
    PrimalNonzero,
    DualNonzero,
}

impl SupportSide {
    pub fn is_primal(&self) -> bool {
        matches!(
            self,
            SupportSide::PrimalInterior | SupportSide::PrimalNonzero
        )
    }
}

/// Primal or dual optimal face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Primal,
    Dual,
}

#[derive(Debug, Clone)]
pub struct SupportValue {
    pub index: usize,
    pub side: SupportSide,
    pub value: f64,
    pub witness: PrimalDualPair,
    /// False when the auxiliary solve stalled short of `tol` and the value
    /// comes from its best iterate, or when the witness misses the
    /// optimality system at `10 * tol`.
    pub converged: bool,
}

/// Solves `(P)` and `(D)` together.
///
/// A returned `Optimal` status has been checked against the residuals of
/// the optimality system at `10 * tol`.
pub fn solve(problem: &ConicProblem, opts: &SolveOptions) -> Result<SolveResult, SolverError> {
    opts.validate()?;
    problem.validate()?;
    let a = problem.stacked_a();
    let lp = ConeLp {
        c: problem.c.clone(),
        g: -&a,
        h: -problem.stacked_b(),
        a: DMatrix::zeros(0, problem.n()),
        b: DVector::zeros(0),
        cones: problem.blocks.clone(),
    };
    let sol = solve_cone_lp(&lp, &opts.ipm());
    let pair = PrimalDualPair::new(sol.x.clone(), problem.split(&sol.z));
    let mut status = SolveStatus::from(sol.status);
    let mut value = f64::NAN;
    if status == SolveStatus::Optimal {
        let pobj = problem.primal_objective(&pair.x)?;
        let dobj = problem.dual_objective(&pair.y_blocks)?;
        let r = residuals(problem, &pair)?;
        let tol = 10.0 * opts.tol;
        if (pobj - dobj).abs() > tol * (1.0 + pobj.abs()) {
            return Err(SolverError::DualityGap {
                primal: pobj,
                dual: dobj,
            });
        }
        if !r.is_solution(tol) {
            status = SolveStatus::NumericalFailure;
        }
        value = 0.5 * (pobj + dobj);
    }
    Ok(SolveResult {
        status,
        pair,
        optimal_value: value,
        iterations: sol.iterations,
        final_mu: sol.mu,
    })
}

/// Conic constraints `h - G v ∈ K` accumulated row block by row block.
struct LpBuilder {
    nvar: usize,
    g_rows: Vec<DMatrix<f64>>,
    h_rows: Vec<DVector<f64>>,
    cones: Vec<ConeSpec>,
}

impl LpBuilder {
    fn new(nvar: usize) -> Self {
        LpBuilder {
            nvar,
            g_rows: Vec::new(),
            h_rows: Vec::new(),
            cones: Vec::new(),
        }
    }

    /// Adds `m v + k ∈ cone`.
    fn push(&mut self, m: DMatrix<f64>, k: DVector<f64>, cone: ConeSpec) {
        debug_assert_eq!(m.ncols(), self.nvar);
        self.g_rows.push(-m);
        self.h_rows.push(k);
        self.cones.push(cone);
    }

    /// Adds `|v[..len]| ≤ radius`.
    fn push_ball(&mut self, len: usize, radius: f64) {
        let mut m = DMatrix::zeros(len + 1, self.nvar);
        m.view_mut((1, 0), (len, len)).fill_with_identity();
        let mut k = DVector::zeros(len + 1);
        k[0] = radius;
        self.push(m, k, ConeSpec::Lorentz(len + 1));
    }

    fn finish(self, c: DVector<f64>, a: DMatrix<f64>, b: DVector<f64>) -> ConeLp {
        let rows: usize = self.g_rows.iter().map(|g| g.nrows()).sum();
        let mut g = DMatrix::zeros(rows, self.nvar);
        let mut h = DVector::zeros(rows);
        let mut off = 0;
        for (gi, hi) in self.g_rows.iter().zip(&self.h_rows) {
            g.view_mut((off, 0), (gi.nrows(), self.nvar)).copy_from(gi);
            h.rows_mut(off, hi.len()).copy_from(hi);
            off += gi.nrows();
        }
        ConeLp {
            c,
            g,
            h,
            a,
            b,
            cones: self.cones,
        }
    }
}

/// Support problems are restricted to a ball of this many times the size
/// of the seeding solution. Only the sign of each value matters, and every
/// positive value survives the restriction by convexity of the face.
const BALL_FACTOR: f64 = 100.0;

/// Slack allowed on the objective-value constraint of a face.
fn face_slack(optimal_value: f64, tol: f64) -> f64 {
    tol * (1.0 + optimal_value.abs())
}

/// Primal face program over `(x)` or `(x, t)`; see [`support_with_functional`].
fn primal_face_lp(
    problem: &ConicProblem,
    optimal_value: f64,
    j: usize,
    functional: &DVector<f64>,
    interior: bool,
    radius: f64,
    tol: f64,
) -> ConeLp {
    let n = problem.n();
    let nvar = if interior { n + 1 } else { n };
    let mut lp = LpBuilder::new(nvar);
    for (i, ((k, a), b)) in problem
        .blocks
        .iter()
        .zip(&problem.a_blocks)
        .zip(&problem.b_blocks)
        .enumerate()
    {
        let mut m = DMatrix::zeros(a.nrows(), nvar);
        m.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        if interior && i == j {
            m.column_mut(n).copy_from(&(-functional));
        }
        lp.push(m, -b, *k);
    }
    if problem.c.iter().any(|&v| v != 0.0) {
        let mut m = DMatrix::zeros(1, nvar);
        m.view_mut((0, 0), (1, n))
            .copy_from(&(-problem.c.transpose()));
        lp.push(
            m,
            DVector::from_element(1, optimal_value + face_slack(optimal_value, tol)),
            ConeSpec::Orthant(1),
        );
    }
    lp.push_ball(n, radius);
    let mut obj = DVector::zeros(nvar);
    if interior {
        obj[n] = -1.0;
        let mut cap = DMatrix::zeros(1, nvar);
        cap[(0, n)] = -1.0;
        lp.push(cap, DVector::from_element(1, 1.0), ConeSpec::Orthant(1));
    } else {
        let row = problem.a_blocks[j].tr_mul(functional);
        obj.rows_mut(0, n).copy_from(&(-&row));
    }
    lp.finish(obj, DMatrix::zeros(0, nvar), DVector::zeros(0))
}

/// Dual counterpart: variables are the stacked `y` (and `t` when
/// `interior`), with the equality `Σ (A^j)ᵀ y^j = c`.
fn dual_face_lp(
    problem: &ConicProblem,
    optimal_value: f64,
    j: usize,
    functional: &DVector<f64>,
    interior: bool,
    radius: f64,
    tol: f64,
) -> ConeLp {
    let m = problem.total_dim();
    let nvar = if interior { m + 1 } else { m };
    let offsets = problem.offsets();
    let mut lp = LpBuilder::new(nvar);
    for (i, k) in problem.blocks.iter().enumerate() {
        let d = k.dim();
        let mut rows = DMatrix::zeros(d, nvar);
        rows.view_mut((0, offsets[i]), (d, d)).fill_with_identity();
        if interior && i == j {
            rows.column_mut(m).copy_from(&(-functional));
        }
        lp.push(rows, DVector::zeros(d), polar(k));
    }
    let b = problem.stacked_b();
    if b.iter().any(|&v| v != 0.0) {
        let mut row = DMatrix::zeros(1, nvar);
        row.view_mut((0, 0), (1, m)).copy_from(&b.transpose());
        lp.push(
            row,
            DVector::from_element(1, face_slack(optimal_value, tol) - optimal_value),
            ConeSpec::Orthant(1),
        );
    }
    let mut obj = DVector::zeros(nvar);
    lp.push_ball(m, radius);
    if interior {
        obj[m] = -1.0;
        let mut cap = DMatrix::zeros(1, nvar);
        cap[(0, m)] = -1.0;
        lp.push(cap, DVector::from_element(1, 1.0), ConeSpec::Orthant(1));
    } else {
        let d = problem.blocks[j].dim();
        obj.rows_mut(offsets[j], d).copy_from(&(-functional));
    }
    let at = problem.stacked_a().transpose();
    let mut eq = DMatrix::zeros(problem.n(), nvar);
    eq.view_mut((0, 0), (problem.n(), m)).copy_from(&at);
    lp.finish(obj, eq, problem.c.clone())
}

/// Maximizes `functional · s^j` (or `· y^j`) over the part of an optimal
/// face inside a ball around `base`; `interior` switches to `max t ≤ 1`
/// with `s^j - t·functional ∈ K_j`. Values are clamped to `[0, 1]`.
///
/// `base` supplies the complementary half of the returned witness.
pub fn support_with_functional(
    problem: &ConicProblem,
    base: &PrimalDualPair,
    optimal_value: f64,
    j: usize,
    side: Side,
    functional: &DVector<f64>,
    interior: bool,
    opts: &SolveOptions,
) -> Result<(f64, PrimalDualPair, bool), SolverError> {
    opts.validate()?;
    let support_side = match (side, interior) {
        (Side::Primal, true) => SupportSide::PrimalInterior,
        (Side::Primal, false) => SupportSide::PrimalNonzero,
        (Side::Dual, true) => SupportSide::DualInterior,
        (Side::Dual, false) => SupportSide::DualNonzero,
    };
    let lp = match side {
        Side::Primal => {
            let radius = BALL_FACTOR * (1.0 + base.x.norm());
            primal_face_lp(
                problem,
                optimal_value,
                j,
                functional,
                interior,
                radius,
                opts.tol,
            )
        }
        Side::Dual => {
            let norm = base
                .y_blocks
                .iter()
                .map(|y| y.norm_squared())
                .sum::<f64>()
                .sqrt();
            let radius = BALL_FACTOR * (1.0 + norm);
            dual_face_lp(
                problem,
                optimal_value,
                j,
                functional,
                interior,
                radius,
                opts.tol,
            )
        }
    };
    let settings = IpmSettings {
        detect_infeasibility: false,
        ..opts.ipm()
    };
    let sol = solve_cone_lp(&lp, &settings);
    let converged = sol.status == LpStatus::Optimal;
    // A support problem on a face without a Slater point may have no dual
    // optimum. The dual iterates still converge in objective, so a stalled
    // run reports its best dual bound, which over-estimates the value.
    let usable = sol.status == LpStatus::NumericalFailure && sol.dual_bound.is_finite();
    if !converged && !usable {
        return Err(SolverError::Support {
            block: j,
            side: support_side,
            status: sol.status.into(),
        });
    }
    // the primal nonzero objective drops the constant `-b^j·f`
    let offset = match (side, interior) {
        (Side::Primal, false) => -problem.b_blocks[j].dot(functional),
        _ => 0.0,
    };
    let raw = offset
        + if converged {
            -sol.primal_objective
        } else {
            -sol.dual_bound
        };
    let value = raw.clamp(0.0, 1.0);
    let witness = match side {
        Side::Primal => PrimalDualPair::new(
            sol.x.rows(0, problem.n()).into_owned(),
            base.y_blocks.clone(),
        ),
        Side::Dual => PrimalDualPair::new(
            base.x.clone(),
            problem.split(&sol.x.rows(0, problem.total_dim()).into_owned()),
        ),
    };
    // ball-scaled residuals can leave a converged witness slightly off the face
    let on_face =
        converged && residuals(problem, &witness).is_ok_and(|r| r.is_solution(10.0 * opts.tol));
    Ok((value, witness, on_face))
}

/// `max t` subject to `s^j - t e_j ∈ K_j` (or `y^j - t e_j ∈ K_j^+`) over
/// the optimal face, `t ≤ 1`.
pub fn support_interior(
    problem: &ConicProblem,
    solution: &SolveResult,
    j: usize,
    side: Side,
    opts: &SolveOptions,
) -> Result<SupportValue, SolverError> {
    let e = interior_point(&problem.blocks[j]);
    let (value, witness, converged) = support_with_functional(
        problem,
        &solution.pair,
        solution.optimal_value,
        j,
        side,
        &e,
        true,
        opts,
    )?;
    Ok(SupportValue {
        index: j,
        side: match side {
            Side::Primal => SupportSide::PrimalInterior,
            Side::Dual => SupportSide::DualInterior,
        },
        value,
        witness,
        converged,
    })
}

/// `max e_j · s^j` (or `e_j · y^j`) over the optimal face, clamped to 1.
/// Zero exactly when the block's slack (or multiplier) vanishes on the face.
pub fn support_nonzero(
    problem: &ConicProblem,
    solution: &SolveResult,
    j: usize,
    side: Side,
    opts: &SolveOptions,
) -> Result<SupportValue, SolverError> {
    let e = interior_point(&problem.blocks[j]);
    let (value, witness, converged) = support_with_functional(
        problem,
        &solution.pair,
        solution.optimal_value,
        j,
        side,
        &e,
        false,
        opts,
    )?;
    Ok(SupportValue {
        index: j,
        side: match side {
            Side::Primal => SupportSide::PrimalNonzero,
            Side::Dual => SupportSide::DualNonzero,
        },
        value,
        witness,
        converged,
    })
}

/// Face solutions maximizing a random positive-definite functional of
/// block `j`. Seeded per `(seed, j)` for reproducibility;
/// solves that fail to converge contribute no sample.
pub fn random_face_solutions(
    problem: &ConicProblem,
    solution: &SolveResult,
    j: usize,
    side: Side,
    count: usize,
    seed: u64,
    opts: &SolveOptions,
) -> Result<Vec<PrimalDualPair>, SolverError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((j as u64) << 32) ^ (side as u64));
    let cone = problem.blocks[j];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let f = random_interior_functional(&cone, &mut rng);
        match support_with_functional(
            problem,
            &solution.pair,
            solution.optimal_value,
            j,
            side,
            &f,
            false,
            opts,
        ) {
            Ok((_, w, true)) => out.push(w),
            Ok(_) | Err(SolverError::Support { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn random_interior_functional(cone: &ConeSpec, rng: &mut impl Rng) -> DVector<f64> {
    match *cone {
        ConeSpec::Orthant(n) => DVector::from_fn(n, |_, _| rng.random_range(0.5..1.5)),
        ConeSpec::Lorentz(n) => {
            let mut v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            v[0] = 0.5 + v.rows(1, n - 1).norm() * 1.5;
            v
        }
        ConeSpec::Psd(n) => {
            let q = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            svec(&(DMatrix::identity(n, n) + &q * q.transpose() * 0.5))
        }
    }
}
