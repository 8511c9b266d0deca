//! Report documents printed by the subcommands. Block indices are 1-based.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use conpart_core::lifting::{six_class, AssertionStatus, ComparisonReport, HypothesisReport};
use conpart_core::partition::{BlockEvidence, RelationCheck, RelationStatus};
use conpart_core::{
    FourPartition, Membership, PartitionReport, PrimalDualPair, SixPartition, SolveResult,
    SolveStatus,
};
use serde::Serialize;

fn one_based(set: &BTreeSet<usize>) -> Vec<usize> {
    set.iter().map(|j| j + 1).collect()
}

fn list(v: &[usize]) -> String {
    let items: Vec<String> = v.iter().map(usize::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

fn num(v: f64) -> String {
    if v.abs() < 5e-13 {
        "0".into()
    } else {
        format!("{v:.6}")
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    }
}

fn tuple(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|&x| num(x)).collect();
    format!("({})", items.join(","))
}

fn vector(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|&x| num(x)).collect();
    format!("({})", items.join(", "))
}

#[derive(Debug, Serialize)]
pub struct PairOut {
    pub x: Vec<f64>,
    pub y: Vec<Vec<f64>>,
}

impl From<&PrimalDualPair> for PairOut {
    fn from(p: &PrimalDualPair) -> Self {
        PairOut {
            x: p.x.iter().copied().collect(),
            y: p.y_blocks
                .iter()
                .map(|b| b.iter().copied().collect())
                .collect(),
        }
    }
}

impl PairOut {
    fn text(&self, out: &mut String) {
        let _ = writeln!(out, "x = {}", vector(&self.x));
        for (j, y) in self.y.iter().enumerate() {
            let _ = writeln!(out, "y[{}] = {}", j + 1, vector(y));
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SolveOut {
    pub name: String,
    pub status: SolveStatus,
    pub optimal_value: f64,
    pub iterations: usize,
    pub solution: PairOut,
}

impl SolveOut {
    pub fn new(name: &str, sol: &SolveResult) -> Self {
        SolveOut {
            name: name.into(),
            status: sol.status,
            optimal_value: sol.optimal_value,
            iterations: sol.iterations,
            solution: (&sol.pair).into(),
        }
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "problem: {}", self.name);
        let _ = writeln!(out, "status: {:?}", self.status);
        let _ = writeln!(out, "optimal value: {}", num(self.optimal_value));
        let _ = writeln!(out, "iterations: {}", self.iterations);
        self.solution.text(&mut out);
        out
    }
}

#[derive(Debug, Serialize)]
pub struct FourOut {
    #[serde(rename = "B")]
    pub b: Vec<usize>,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    #[serde(rename = "R")]
    pub r: Vec<usize>,
    #[serde(rename = "T")]
    pub t: Vec<usize>,
    #[serde(rename = "R0")]
    pub r0: Vec<usize>,
}

impl From<&FourPartition> for FourOut {
    fn from(f: &FourPartition) -> Self {
        FourOut {
            b: one_based(&f.b),
            n: one_based(&f.n),
            r: one_based(&f.r),
            t: one_based(&f.t),
            r0: one_based(&f.r0),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SixOut {
    #[serde(rename = "B")]
    pub b: Vec<usize>,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    #[serde(rename = "B'")]
    pub bprime: Vec<usize>,
    #[serde(rename = "N'")]
    pub nprime: Vec<usize>,
    #[serde(rename = "O")]
    pub o: Vec<usize>,
    #[serde(rename = "C")]
    pub c: Vec<usize>,
    #[serde(rename = "B0")]
    pub b0: Vec<usize>,
    #[serde(rename = "N0")]
    pub n0: Vec<usize>,
}

impl From<&SixPartition> for SixOut {
    fn from(s: &SixPartition) -> Self {
        SixOut {
            b: one_based(&s.b),
            n: one_based(&s.n),
            bprime: one_based(&s.bprime),
            nprime: one_based(&s.nprime),
            o: one_based(&s.o),
            c: one_based(&s.c),
            b0: one_based(&s.b0),
            n0: one_based(&s.n0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusOut {
    Pass,
    Fail { blocks: Vec<usize> },
    NotApplicable,
}

impl From<&RelationStatus> for StatusOut {
    fn from(s: &RelationStatus) -> Self {
        match s {
            RelationStatus::Pass => StatusOut::Pass,
            RelationStatus::Fail(v) => StatusOut::Fail {
                blocks: v.iter().map(|j| j + 1).collect(),
            },
            RelationStatus::NotApplicable => StatusOut::NotApplicable,
        }
    }
}

impl StatusOut {
    fn text(&self) -> String {
        match self {
            StatusOut::Pass => "pass".into(),
            StatusOut::Fail { blocks } => format!("FAILED at blocks {}", list(blocks)),
            StatusOut::NotApplicable => "not applicable".into(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RelationsOut {
    pub r_in_c: StatusOut,
    pub primes_in_t: StatusOut,
    pub lorentz_r_eq_c: StatusOut,
    pub covers: StatusOut,
}

impl From<&RelationCheck> for RelationsOut {
    fn from(r: &RelationCheck) -> Self {
        RelationsOut {
            r_in_c: (&r.r_in_c).into(),
            primes_in_t: (&r.primes_in_t).into(),
            lorentz_r_eq_c: (&r.lorentz_r_eq_c).into(),
            covers: (&r.covers).into(),
        }
    }
}

impl RelationsOut {
    pub fn passed(&self) -> bool {
        [
            &self.r_in_c,
            &self.primes_in_t,
            &self.lorentz_r_eq_c,
            &self.covers,
        ]
        .iter()
        .all(|s| !matches!(s, StatusOut::Fail { .. }))
    }

    fn text(&self, out: &mut String) {
        let _ = writeln!(out, "relations:");
        let _ = writeln!(out, "  partitions cover the blocks: {}", self.covers.text());
        let _ = writeln!(out, "  R ⊆ C: {}", self.r_in_c.text());
        let _ = writeln!(out, "  B' ∪ N' ∪ O ⊆ T: {}", self.primes_in_t.text());
        let _ = writeln!(out, "  R = C: {}", self.lorentz_r_eq_c.text());
    }
}

#[derive(Debug, Serialize)]
pub struct EvidenceOut {
    pub block: usize,
    pub cone: String,
    pub primal_interior: f64,
    pub dual_interior: f64,
    pub primal_nonzero: f64,
    pub dual_nonzero: f64,
    pub converged: bool,
    pub slack_class: Membership,
    pub dual_class: Membership,
    pub ri_normal_cone: Option<bool>,
    pub notes: Vec<String>,
}

impl From<&BlockEvidence> for EvidenceOut {
    fn from(e: &BlockEvidence) -> Self {
        EvidenceOut {
            block: e.index + 1,
            cone: e.cone.to_string(),
            primal_interior: e.primal_interior,
            dual_interior: e.dual_interior,
            primal_nonzero: e.primal_nonzero,
            dual_nonzero: e.dual_nonzero,
            converged: e.converged,
            slack_class: e.slack_class,
            dual_class: e.dual_class,
            ri_normal_cone: e.ri_normal_cone,
            notes: e.notes.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PartitionOut {
    pub name: String,
    pub optimal_value: f64,
    pub four: FourOut,
    pub six: SixOut,
    pub relations: RelationsOut,
    pub uncertain: Vec<usize>,
    pub threshold: f64,
    pub solution: PairOut,
    pub aggregate: PairOut,
    pub evidence: Vec<EvidenceOut>,
}

impl From<&PartitionReport> for PartitionOut {
    fn from(r: &PartitionReport) -> Self {
        PartitionOut {
            name: r.name.clone(),
            optimal_value: r.optimal_value,
            four: (&r.four).into(),
            six: (&r.six).into(),
            relations: (&r.relations).into(),
            uncertain: one_based(&r.uncertain),
            threshold: r.threshold,
            solution: (&r.solution).into(),
            aggregate: (&r.aggregate).into(),
            evidence: r.evidence.iter().map(Into::into).collect(),
        }
    }
}

impl PartitionOut {
    fn partitions_text(&self, out: &mut String) {
        let f = &self.four;
        let _ = writeln!(
            out,
            "four-partition: B = {}  N = {}  R = {}  T = {}",
            list(&f.b),
            list(&f.n),
            list(&f.r),
            list(&f.t)
        );
        let s = &self.six;
        let _ = writeln!(
            out,
            "six-partition:  B = {}  N = {}  B' = {}  N' = {}  O = {}  C = {}",
            list(&s.b),
            list(&s.n),
            list(&s.bprime),
            list(&s.nprime),
            list(&s.o),
            list(&s.c)
        );
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "problem: {}", self.name);
        let _ = writeln!(out, "optimal value: {}", num(self.optimal_value));
        self.partitions_text(&mut out);
        let _ = writeln!(
            out,
            "R0 = {}  B0 = {}  N0 = {}",
            list(&self.four.r0),
            list(&self.six.b0),
            list(&self.six.n0)
        );
        self.relations.text(&mut out);
        if !self.uncertain.is_empty() {
            let _ = writeln!(out, "uncertain blocks: {}", list(&self.uncertain));
        }
        let _ = writeln!(out, "solution:");
        self.solution.text(&mut out);
        let _ = writeln!(out, "evidence (threshold {:.1e}):", self.threshold);
        for e in &self.evidence {
            let _ = writeln!(
                out,
                "  block {} {}: interior {:.2e}/{:.2e}  nonzero {:.2e}/{:.2e}  slack {:?}  dual {:?}{}",
                e.block,
                e.cone,
                e.primal_interior,
                e.dual_interior,
                e.primal_nonzero,
                e.dual_nonzero,
                e.slack_class,
                e.dual_class,
                if e.converged { "" } else { "  (stalled)" }
            );
            for n in &e.notes {
                let _ = writeln!(out, "    note: {n}");
            }
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct CheckOut {
    pub name: String,
    pub four: FourOut,
    pub six: SixOut,
    pub relations: RelationsOut,
    pub uncertain: Vec<usize>,
    pub passed: bool,
}

impl From<&PartitionReport> for CheckOut {
    fn from(r: &PartitionReport) -> Self {
        let relations: RelationsOut = (&r.relations).into();
        CheckOut {
            name: r.name.clone(),
            four: (&r.four).into(),
            six: (&r.six).into(),
            passed: relations.passed(),
            relations,
            uncertain: one_based(&r.uncertain),
        }
    }
}

impl CheckOut {
    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "problem: {}", self.name);
        let _ = writeln!(
            out,
            "four-partition: B = {}  N = {}  R = {}  T = {}",
            list(&self.four.b),
            list(&self.four.n),
            list(&self.four.r),
            list(&self.four.t)
        );
        self.relations.text(&mut out);
        if !self.uncertain.is_empty() {
            let _ = writeln!(out, "uncertain blocks: {}", list(&self.uncertain));
        }
        let _ = writeln!(
            out,
            "result: {}",
            if self.passed { "pass" } else { "FAILED" }
        );
        out
    }
}

#[derive(Debug, Serialize)]
pub struct KernelWitnessOut {
    pub block: usize,
    pub z: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct HypothesesOut {
    pub injective: bool,
    pub adjoint_image_closed: bool,
    pub coercivity: f64,
    pub boundary_preserving: bool,
    pub equivalence: bool,
    pub kernel_trivial_on_polar: bool,
    pub kernel_witness: Option<KernelWitnessOut>,
    pub sample_failures: Vec<usize>,
}

impl From<&HypothesisReport> for HypothesesOut {
    fn from(h: &HypothesisReport) -> Self {
        HypothesesOut {
            injective: h.injective,
            adjoint_image_closed: h.adjoint_image_closed_via_coercivity,
            coercivity: h.coercivity,
            boundary_preserving: h.boundary_preserving,
            equivalence: h.equivalence,
            kernel_trivial_on_polar: h.kernel_trivial_on_polar,
            kernel_witness: h.kernel_witness.as_ref().map(|(j, z)| KernelWitnessOut {
                block: j + 1,
                z: z.clone(),
            }),
            sample_failures: h.sample_failures.iter().map(|j| j + 1).collect(),
        }
    }
}

impl HypothesesOut {
    pub fn passed(&self) -> bool {
        self.injective
            && self.adjoint_image_closed
            && self.boundary_preserving
            && self.equivalence
            && self.kernel_trivial_on_polar
    }
}

#[derive(Debug, Serialize)]
pub struct AssertionOut {
    pub label: char,
    pub claim: String,
    pub gate: String,
    pub status: AssertionStatus,
}

#[derive(Debug, Serialize)]
pub struct LiftCheckOut {
    pub hypotheses: HypothesesOut,
    pub assertions: Vec<AssertionOut>,
    pub same_four: bool,
    pub same_six: bool,
    pub six_differences: Vec<usize>,
    pub original: PartitionOut,
    pub lifted: PartitionOut,
    pub passed: bool,
}

impl From<&ComparisonReport> for LiftCheckOut {
    fn from(c: &ComparisonReport) -> Self {
        let hypotheses: HypothesesOut = (&c.hypotheses).into();
        LiftCheckOut {
            passed: hypotheses.passed() && !c.failed(),
            hypotheses,
            assertions: c
                .assertions
                .iter()
                .map(|a| AssertionOut {
                    label: a.label,
                    claim: a.claim.into(),
                    gate: a.gate.into(),
                    status: a.status,
                })
                .collect(),
            same_four: c.same_four(),
            same_six: c.same_six(),
            six_differences: c.six_differences().iter().map(|j| j + 1).collect(),
            original: (&c.original).into(),
            lifted: (&c.lifted).into(),
        }
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAILED"
    }
}

impl LiftCheckOut {
    pub fn text(&self, six_class_of: impl Fn(bool, usize) -> String) -> String {
        let mut out = String::new();
        let h = &self.hypotheses;
        let _ = writeln!(out, "lift hypotheses:");
        let _ = writeln!(out, "  injective: {}", verdict(h.injective));
        let _ = writeln!(
            out,
            "  closed adjoint image: {} (coercivity {:.3e})",
            verdict(h.adjoint_image_closed),
            h.coercivity
        );
        let _ = writeln!(
            out,
            "  boundary preserving: {}",
            verdict(h.boundary_preserving)
        );
        let _ = writeln!(out, "  cone equivalence: {}", verdict(h.equivalence));
        match &h.kernel_witness {
            None => {
                let _ = writeln!(out, "  kernel condition: pass");
            }
            Some(w) => {
                let _ = writeln!(
                    out,
                    "  kernel condition FAILED, witness {} on block {}",
                    tuple(&w.z),
                    w.block
                );
            }
        }
        let _ = writeln!(out, "original:");
        self.original.partitions_text(&mut out);
        let _ = writeln!(out, "lifted:");
        self.lifted.partitions_text(&mut out);
        let _ = writeln!(
            out,
            "four-partitions {}",
            if self.same_four { "coincide" } else { "differ" }
        );
        if self.six_differences.is_empty() {
            let _ = writeln!(out, "six-partitions coincide");
        } else {
            let _ = writeln!(
                out,
                "six-partitions differ at block {}",
                list(&self.six_differences).trim_matches(['{', '}'])
            );
            for &j in &self.six_differences {
                let _ = writeln!(
                    out,
                    "  block {j}: {} -> {}",
                    six_class_of(false, j - 1),
                    six_class_of(true, j - 1)
                );
            }
        }
        let _ = writeln!(out, "assertions:");
        for a in &self.assertions {
            let status = match a.status {
                AssertionStatus::Pass => "pass",
                AssertionStatus::Fail => "FAILED",
                AssertionStatus::NotAsserted => "not asserted",
            };
            let _ = writeln!(
                out,
                "  ({}) {}: {} [requires {}]",
                a.label, a.claim, status, a.gate
            );
        }
        let _ = writeln!(out, "result: {}", verdict(self.passed));
        out
    }
}

/// Six-partition class name of a block in one of the compared problems.
pub fn class_lookup(c: &ComparisonReport) -> impl Fn(bool, usize) -> String + '_ {
    move |lifted, j| {
        six_class(
            if lifted {
                &c.lifted.six
            } else {
                &c.original.six
            },
            j,
        )
        .to_string()
    }
}

#[derive(Debug, Serialize)]
pub struct HomogeneousOut {
    pub name: String,
    pub dual_six: SixOut,
    pub support_six: SixOut,
    pub agrees: bool,
    pub r0_in_r_tilde: bool,
    pub passed: bool,
}

impl HomogeneousOut {
    pub fn new(name: &str, dual: &SixPartition, support: &SixPartition, r0_ok: bool) -> Self {
        let agrees = dual == support;
        HomogeneousOut {
            name: name.into(),
            dual_six: dual.into(),
            support_six: support.into(),
            agrees,
            r0_in_r_tilde: r0_ok,
            passed: agrees && r0_ok,
        }
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let six = |s: &SixOut| {
            format!(
                "B = {}  N = {}  B' = {}  N' = {}  O = {}  C = {}",
                list(&s.b),
                list(&s.n),
                list(&s.bprime),
                list(&s.nprime),
                list(&s.o),
                list(&s.c)
            )
        };
        let _ = writeln!(out, "problem: {}", self.name);
        let _ = writeln!(out, "dual characterization: {}", six(&self.dual_six));
        let _ = writeln!(out, "support problems:      {}", six(&self.support_six));
        let _ = writeln!(
            out,
            "dual characterization {}",
            if self.agrees { "agrees" } else { "DISAGREES" }
        );
        let _ = writeln!(out, "R0 ⊆ R~: {}", verdict(self.r0_in_r_tilde));
        let _ = writeln!(out, "result: {}", verdict(self.passed));
        out
    }
}
