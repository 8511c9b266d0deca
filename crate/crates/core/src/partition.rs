//! Four- and six-set complementarity partitions.
//!
//! Blocks are indexed from 0 in this module. Every set is decided by
//! support problems over the optimal faces; the `R⁰` test additionally
//! looks at an averaged witness pair.

use std::collections::BTreeSet;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cones::{classify_membership, in_ri_normal_cone, polar, ConeSpec, Membership};
use crate::model::{aggregate_witnesses, residuals, ConicProblem, ModelError, PrimalDualPair};
use crate::solver::{
    random_face_solutions, solve, support_interior, support_nonzero, support_with_functional, Side,
    SolveOptions, SolveResult, SolveStatus, SolverError, SupportValue,
};

pub type IndexSet = BTreeSet<usize>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("problem was not solved to optimality: {0:?}")]
    NotOptimal(SolveStatus),
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FourPartition {
    pub b: IndexSet,
    pub n: IndexSet,
    pub r: IndexSet,
    pub t: IndexSet,
    pub r0: IndexSet,
}

impl FourPartition {
    /// Builds `R = R⁰ \ (B ∪ N)` and `T = J \ (R⁰ ∪ B ∪ N)`.
    pub fn from_sets(num_blocks: usize, b: IndexSet, n: IndexSet, r0: IndexSet) -> Self {
        let bn: IndexSet = b.union(&n).copied().collect();
        let r = r0.difference(&bn).copied().collect();
        let t = (0..num_blocks)
            .filter(|j| !bn.contains(j) && !r0.contains(j))
            .collect();
        FourPartition { b, n, r, t, r0 }
    }

    pub fn parts(&self) -> [&IndexSet; 4] {
        [&self.b, &self.n, &self.r, &self.t]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SixPartition {
    pub b: IndexSet,
    pub n: IndexSet,
    pub bprime: IndexSet,
    pub nprime: IndexSet,
    pub o: IndexSet,
    pub c: IndexSet,
    pub b0: IndexSet,
    pub n0: IndexSet,
}

impl SixPartition {
    pub fn from_sets(
        num_blocks: usize,
        b: IndexSet,
        n: IndexSet,
        b0: IndexSet,
        n0: IndexSet,
    ) -> Self {
        let bprime = b0
            .iter()
            .filter(|j| !n0.contains(j) && !b.contains(j))
            .copied()
            .collect();
        let nprime = n0
            .iter()
            .filter(|j| !b0.contains(j) && !n.contains(j))
            .copied()
            .collect();
        let o = b0.intersection(&n0).copied().collect();
        let c = (0..num_blocks)
            .filter(|j| !b0.contains(j) && !n0.contains(j))
            .collect();
        SixPartition {
            b,
            n,
            bprime,
            nprime,
            o,
            c,
            b0,
            n0,
        }
    }

    pub fn parts(&self) -> [&IndexSet; 6] {
        [
            &self.b,
            &self.n,
            &self.bprime,
            &self.nprime,
            &self.o,
            &self.c,
        ]
    }
}

/// The four support values of one block, plus coordinate-level values for
/// orthant blocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockEvidence {
    pub index: usize,
    pub cone: ConeSpec,
    pub primal_interior: f64,
    pub dual_interior: f64,
    pub primal_nonzero: f64,
    pub dual_nonzero: f64,
    /// `(primal, dual)` nonzero support of each coordinate.
    pub coordinates: Vec<(f64, f64)>,
    /// Whether every auxiliary solve for this block converged.
    pub converged: bool,
    pub slack_class: Membership,
    pub dual_class: Membership,
    /// Relative-interior normal-cone test on the averaged pair.
    pub ri_normal_cone: Option<bool>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelationStatus {
    Pass,
    Fail(Vec<usize>),
    NotApplicable,
}

impl RelationStatus {
    pub fn passed(&self) -> bool {
        !matches!(self, RelationStatus::Fail(_))
    }

    fn from_offenders(v: Vec<usize>) -> Self {
        if v.is_empty() {
            RelationStatus::Pass
        } else {
            RelationStatus::Fail(v)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCheck {
    /// `R ⊆ C`.
    pub r_in_c: RelationStatus,
    /// `B' ∪ N' ∪ O ⊆ T`.
    pub primes_in_t: RelationStatus,
    /// `R = C` when every block is a Lorentz cone (dimension-one orthants
    /// count as `L_0`).
    pub lorentz_r_eq_c: RelationStatus,
    /// Both partitions are disjoint covers of the block indices.
    pub covers: RelationStatus,
}

impl RelationCheck {
    pub fn all_passed(&self) -> bool {
        self.r_in_c.passed()
            && self.primes_in_t.passed()
            && self.lorentz_r_eq_c.passed()
            && self.covers.passed()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub solver: SolveOptions,
    /// Support values above this are positive. Defaults to `sqrt(tol)`.
    pub threshold: Option<f64>,
    /// Tolerance of the normal-cone test on the averaged pair.
    pub ri_tol: Option<f64>,
    /// Seed of the random face objectives used for PSD blocks.
    pub seed: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            solver: SolveOptions::default(),
            threshold: None,
            ri_tol: None,
            seed: 0x5eed,
        }
    }
}

impl ClassifyOptions {
    pub fn with_tol(tol: f64) -> Self {
        ClassifyOptions {
            solver: SolveOptions {
                tol,
                ..SolveOptions::default()
            },
            ..Self::default()
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold.unwrap_or_else(|| self.solver.tol.sqrt())
    }

    pub fn ri_tol(&self) -> f64 {
        self.ri_tol
            .unwrap_or_else(|| (1e3 * self.solver.tol).max(1e-6))
    }
}

/// Width of the band around the threshold, as a factor either side.
const UNCERTAIN_FACTOR: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct PartitionReport {
    pub name: String,
    pub four: FourPartition,
    pub six: SixPartition,
    pub evidence: Vec<BlockEvidence>,
    pub uncertain: IndexSet,
    pub relations: RelationCheck,
    pub optimal_value: f64,
    /// Solution returned by the interior-point solve.
    pub solution: PrimalDualPair,
    /// Average of every witness collected along the way.
    pub aggregate: PrimalDualPair,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy)]
enum Task {
    Interior(usize, Side),
    Nonzero(usize, Side),
    Coordinate(usize, usize, Side),
    Random(usize, Side, usize),
}

enum Outcome {
    Value(SupportValue),
    Coordinate(usize, usize, Side, f64, PrimalDualPair, bool),
    Pairs(Side, Vec<PrimalDualPair>),
}

fn run_task(
    problem: &ConicProblem,
    sol: &SolveResult,
    task: Task,
    opts: &ClassifyOptions,
) -> Result<Outcome, SolverError> {
    let so = &opts.solver;
    match task {
        Task::Interior(j, side) => support_interior(problem, sol, j, side, so).map(Outcome::Value),
        Task::Nonzero(j, side) => support_nonzero(problem, sol, j, side, so).map(Outcome::Value),
        Task::Coordinate(j, i, side) => {
            let mut e = DVector::zeros(problem.blocks[j].dim());
            e[i] = 1.0;
            let (v, w, conv) = support_with_functional(
                problem,
                &sol.pair,
                sol.optimal_value,
                j,
                side,
                &e,
                false,
                so,
            )?;
            Ok(Outcome::Coordinate(j, i, side, v, w, conv))
        }
        Task::Random(j, side, count) => {
            random_face_solutions(problem, sol, j, side, count, opts.seed, so)
                .map(|ps| Outcome::Pairs(side, ps))
        }
    }
}

/// Classifies every block of `problem`.
pub fn classify(
    problem: &ConicProblem,
    opts: &ClassifyOptions,
) -> Result<PartitionReport, PartitionError> {
    classify_with_witnesses(problem, opts, &[])
}

/// As [`classify`], with caller-supplied solution pairs added to the
/// averaged witness.
pub fn classify_with_witnesses(
    problem: &ConicProblem,
    opts: &ClassifyOptions,
    extra: &[PrimalDualPair],
) -> Result<PartitionReport, PartitionError> {
    let sol = solve(problem, &opts.solver)?;
    if sol.status != SolveStatus::Optimal {
        return Err(PartitionError::NotOptimal(sol.status));
    }
    let r = problem.num_blocks();
    let thr = opts.threshold();
    let wtol = 10.0 * opts.solver.tol;

    let mut tasks = Vec::new();
    for (j, k) in problem.blocks.iter().enumerate() {
        for side in [Side::Primal, Side::Dual] {
            tasks.push(Task::Interior(j, side));
            tasks.push(Task::Nonzero(j, side));
            match *k {
                ConeSpec::Orthant(d) if d > 1 => {
                    tasks.extend((0..d).map(|i| Task::Coordinate(j, i, side)));
                }
                ConeSpec::Psd(n) => tasks.push(Task::Random(j, side, 2 * n)),
                _ => {}
            }
        }
    }
    let results: Vec<(Task, Result<Outcome, SolverError>)> = tasks
        .par_iter()
        .map(|&t| (t, run_task(problem, &sol, t, opts)))
        .collect();
    let mut outcomes = Vec::with_capacity(results.len());
    let mut failed_interior = Vec::new();
    for (t, res) in results {
        match (t, res) {
            (_, Ok(o)) => outcomes.push(o),
            (Task::Interior(j, side), Err(e @ SolverError::Support { .. })) => {
                failed_interior.push((j, side, e))
            }
            (_, Err(e)) => return Err(e.into()),
        }
    }

    let mut evidence: Vec<BlockEvidence> = problem
        .blocks
        .iter()
        .enumerate()
        .map(|(j, k)| BlockEvidence {
            index: j,
            cone: *k,
            primal_interior: 0.0,
            dual_interior: 0.0,
            primal_nonzero: 0.0,
            dual_nonzero: 0.0,
            coordinates: vec![(0.0, 0.0); if k.is_polyhedral() { k.dim() } else { 0 }],
            converged: true,
            slack_class: Membership::Boundary,
            dual_class: Membership::Boundary,
            ri_normal_cone: None,
            notes: Vec::new(),
        })
        .collect();

    let mut primal_w = vec![sol.pair.x.clone()];
    let mut dual_w = vec![sol.pair.y_blocks.clone()];
    let mut push_witness = |side: Side, w: PrimalDualPair, converged: bool| {
        if !converged {
            return;
        }
        match side {
            Side::Primal => primal_w.push(w.x),
            Side::Dual => dual_w.push(w.y_blocks),
        }
    };
    let mut extra_pairs = Vec::new();
    for out in outcomes {
        match out {
            Outcome::Value(v) => {
                let ev = &mut evidence[v.index];
                ev.converged &= v.converged;
                let side = if v.side.is_primal() {
                    Side::Primal
                } else {
                    Side::Dual
                };
                match v.side {
                    crate::solver::SupportSide::PrimalInterior => ev.primal_interior = v.value,
                    crate::solver::SupportSide::DualInterior => ev.dual_interior = v.value,
                    crate::solver::SupportSide::PrimalNonzero => ev.primal_nonzero = v.value,
                    crate::solver::SupportSide::DualNonzero => ev.dual_nonzero = v.value,
                }
                push_witness(side, v.witness, v.converged);
            }
            Outcome::Coordinate(j, i, side, value, w, converged) => {
                let ev = &mut evidence[j];
                ev.converged &= converged;
                match side {
                    Side::Primal => ev.coordinates[i].0 = value,
                    Side::Dual => ev.coordinates[i].1 = value,
                }
                push_witness(side, w, converged);
            }
            Outcome::Pairs(side, ps) => extra_pairs.extend(ps.into_iter().map(|p| (side, p))),
        }
    }
    for (side, p) in extra_pairs {
        push_witness(side, p, true);
    }
    // a vanishing nonzero support bounds the interior support by zero
    for (j, side, e) in failed_interior {
        let ev = &mut evidence[j];
        let nonzero = match side {
            Side::Primal => ev.primal_nonzero,
            Side::Dual => ev.dual_nonzero,
        };
        if nonzero >= thr / 10.0 {
            return Err(e.into());
        }
        ev.notes
            .push(format!("{side:?} interior support failed; set to zero"));
    }
    for p in extra {
        let rep = residuals(problem, p)?;
        if let Some(reason) = rep.failure(wtol) {
            return Err(ModelError::WitnessNotSolution {
                side: "supplied",
                index: 0,
                reason,
            }
            .into());
        }
        push_witness(Side::Primal, p.clone(), true);
        push_witness(Side::Dual, p.clone(), true);
    }
    let aggregate = aggregate_witnesses(problem, &primal_w, &dual_w, wtol)?;

    let positive = |v: f64| v > thr;
    let mut uncertain = IndexSet::new();
    for ev in &mut evidence {
        let mut vals = vec![
            ev.primal_interior,
            ev.dual_interior,
            ev.primal_nonzero,
            ev.dual_nonzero,
        ];
        for &(p, d) in &ev.coordinates {
            vals.push(p);
            vals.push(d);
        }
        if vals
            .iter()
            .any(|&v| v > thr / UNCERTAIN_FACTOR && v < thr * UNCERTAIN_FACTOR)
        {
            uncertain.insert(ev.index);
            ev.notes
                .push("support value inside the threshold band".into());
        }
        if ev.cone.dim() == 1 {
            ev.coordinates = vec![(ev.primal_nonzero, ev.dual_nonzero)];
        }
    }

    let mut b = IndexSet::new();
    let mut n = IndexSet::new();
    let mut b0 = IndexSet::new();
    let mut n0 = IndexSet::new();
    for ev in &mut evidence {
        let j = ev.index;
        let (pi, di) = (positive(ev.primal_interior), positive(ev.dual_interior));
        let (pn, dn) = (positive(ev.primal_nonzero), positive(ev.dual_nonzero));
        if pi && di {
            uncertain.insert(j);
            ev.notes
                .push("interior slack and interior multiplier both reported".into());
        }
        if (pi && !pn) || (di && !dn) || (pi && dn) || (di && pn) {
            uncertain.insert(j);
            ev.notes
                .push("support values violate face inclusion".into());
        }
        if pi && (!di || ev.primal_interior >= ev.dual_interior) {
            b.insert(j);
        } else if di {
            n.insert(j);
        }
        // an interior slack forces the multiplier to vanish and vice versa
        if !dn || b.contains(&j) {
            b0.insert(j);
        }
        if !pn || n.contains(&j) {
            n0.insert(j);
        }
    }
    let six = SixPartition::from_sets(r, b.clone(), n.clone(), b0, n0);

    let ri_tol = opts.ri_tol();
    let s_agg = problem.slacks(&aggregate.x)?;
    let mut r0 = IndexSet::new();
    for ev in &mut evidence {
        let j = ev.index;
        let k = ev.cone;
        let (s, y) = (&s_agg[j], &aggregate.y_blocks[j]);
        ev.slack_class =
            classify_membership(&k, s, ri_tol).map_or(Membership::Outside, |c| c.class);
        ev.dual_class =
            classify_membership(&polar(&k), y, ri_tol).map_or(Membership::Outside, |c| c.class);
        match in_ri_normal_cone(&k, s, y, ri_tol) {
            Ok(v) => ev.ri_normal_cone = Some(v),
            Err(e) => ev
                .notes
                .push(format!("normal-cone test not applicable: {e}")),
        }
        let in_r0 = match k {
            ConeSpec::Orthant(_) | ConeSpec::Lorentz(1) => ev
                .coordinates
                .iter()
                .all(|&(p, d)| positive(p) || positive(d)),
            ConeSpec::Lorentz(_) => b.contains(&j) || n.contains(&j) || six.c.contains(&j),
            ConeSpec::Psd(_) => {
                ev.notes.push(
                    "PSD membership in R0 rests on an averaged witness of generic maximal rank"
                        .into(),
                );
                // both faces vanish on O blocks, and 0 is never in ri K⁺
                ev.ri_normal_cone == Some(true) && !six.o.contains(&j)
            }
        };
        if in_r0 {
            r0.insert(j);
        }
        if !k.is_polyhedral()
            && !matches!(k, ConeSpec::Psd(_))
            && ev.ri_normal_cone.is_some_and(|t| t != in_r0)
        {
            ev.notes
                .push("normal-cone test on the averaged pair disagrees".into());
            uncertain.insert(j);
        }
    }
    let four = FourPartition::from_sets(r, b, n, r0);
    let mut report = PartitionReport {
        name: problem.name.clone(),
        four,
        six,
        evidence,
        uncertain,
        relations: RelationCheck {
            r_in_c: RelationStatus::NotApplicable,
            primes_in_t: RelationStatus::NotApplicable,
            lorentz_r_eq_c: RelationStatus::NotApplicable,
            covers: RelationStatus::NotApplicable,
        },
        optimal_value: sol.optimal_value,
        solution: sol.pair,
        aggregate,
        threshold: thr,
    };
    report.relations = check_relations(&report, problem);
    Ok(report)
}

fn is_disjoint_cover(parts: &[&IndexSet], r: usize) -> Vec<usize> {
    (0..r)
        .filter(|j| parts.iter().filter(|p| p.contains(j)).count() != 1)
        .chain(
            parts
                .iter()
                .flat_map(|p| p.iter().copied())
                .filter(|&j| j >= r),
        )
        .collect()
}

pub fn check_relations(report: &PartitionReport, problem: &ConicProblem) -> RelationCheck {
    let r = problem.num_blocks();
    let (four, six) = (&report.four, &report.six);
    let r_in_c = four
        .r
        .iter()
        .filter(|j| !six.c.contains(j))
        .copied()
        .collect();
    let primes_in_t = six
        .bprime
        .iter()
        .chain(&six.nprime)
        .chain(&six.o)
        .filter(|j| !four.t.contains(j))
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let all_lorentz = problem
        .blocks
        .iter()
        .all(|k| matches!(k, ConeSpec::Lorentz(_) | ConeSpec::Orthant(1)));
    let lorentz_r_eq_c = if all_lorentz {
        RelationStatus::from_offenders(four.r.symmetric_difference(&six.c).copied().collect())
    } else {
        RelationStatus::NotApplicable
    };
    let mut cover = is_disjoint_cover(&four.parts(), r);
    cover.extend(is_disjoint_cover(&six.parts(), r));
    cover.sort_unstable();
    cover.dedup();
    RelationCheck {
        r_in_c: RelationStatus::from_offenders(r_in_c),
        primes_in_t: RelationStatus::from_offenders(primes_in_t),
        lorentz_r_eq_c,
        covers: RelationStatus::from_offenders(cover),
    }
}

/// `T = ∅`, equivalently `R⁰ = J`.
pub fn strict_complementarity(report: &PartitionReport) -> bool {
    report.four.t.is_empty()
}
