//! Multifold conic problems and their optimality system.
//!
//! A problem is `min c·x` subject to `A^j x - b^j ∈ K_j` for every block
//! `j`, with dual `max Σ b^j·y^j` subject to `Σ (A^j)ᵀ y^j = c`,
//! `y^j ∈ K_j^+`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::cones::{margin, polar, ConeSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid cone {0}")]
    InvalidCone(ConeSpec),
    #[error("witness list is empty")]
    EmptyWitnesses,
    #[error("{side} witness {index} is not a solution: {reason}")]
    WitnessNotSolution {
        side: &'static str,
        index: usize,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    pub name: String,
    pub blocks: Vec<ConeSpec>,
    pub a_blocks: Vec<DMatrix<f64>>,
    pub b_blocks: Vec<DVector<f64>>,
    pub c: DVector<f64>,
}

impl ConicProblem {
    pub fn new(
        name: impl Into<String>,
        blocks: Vec<ConeSpec>,
        a_blocks: Vec<DMatrix<f64>>,
        b_blocks: Vec<DVector<f64>>,
        c: DVector<f64>,
    ) -> Result<Self, ModelError> {
        let p = ConicProblem {
            name: name.into(),
            blocks,
            a_blocks,
            b_blocks,
            c,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds a feasibility problem: `b = 0`, `c = 0`.
    pub fn homogeneous_from(
        name: impl Into<String>,
        blocks: Vec<ConeSpec>,
        a_blocks: Vec<DMatrix<f64>>,
    ) -> Result<Self, ModelError> {
        let n = a_blocks.first().map_or(0, |a| a.ncols());
        let b_blocks = a_blocks.iter().map(|a| DVector::zeros(a.nrows())).collect();
        Self::new(name, blocks, a_blocks, b_blocks, DVector::zeros(n))
    }

    /// Splits a stacked constraint matrix into blocks.
    pub fn from_stacked(
        name: impl Into<String>,
        blocks: Vec<ConeSpec>,
        a: &DMatrix<f64>,
        b: &DVector<f64>,
        c: DVector<f64>,
    ) -> Result<Self, ModelError> {
        let total: usize = blocks.iter().map(|k| k.dim()).sum();
        if a.nrows() != total || b.len() != total {
            return Err(ModelError::Dimension(format!(
                "stacked data has {} rows and {} offsets, cones need {total}",
                a.nrows(),
                b.len()
            )));
        }
        let mut off = 0;
        let mut a_blocks = Vec::with_capacity(blocks.len());
        let mut b_blocks = Vec::with_capacity(blocks.len());
        for k in &blocks {
            let d = k.dim();
            a_blocks.push(a.rows(off, d).into_owned());
            b_blocks.push(b.rows(off, d).into_owned());
            off += d;
        }
        Self::new(name, blocks, a_blocks, b_blocks, c)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let r = self.blocks.len();
        if self.a_blocks.len() != r || self.b_blocks.len() != r {
            return Err(ModelError::Dimension(format!(
                "{r} cones but {} matrices and {} offsets",
                self.a_blocks.len(),
                self.b_blocks.len()
            )));
        }
        let n = self.c.len();
        for (j, ((k, a), b)) in self
            .blocks
            .iter()
            .zip(&self.a_blocks)
            .zip(&self.b_blocks)
            .enumerate()
        {
            if !k.is_valid() {
                return Err(ModelError::InvalidCone(*k));
            }
            if a.nrows() != k.dim() || b.len() != k.dim() {
                return Err(ModelError::Dimension(format!(
                    "block {}: {k} needs {} rows, matrix has {} and offset {}",
                    j + 1,
                    k.dim(),
                    a.nrows(),
                    b.len()
                )));
            }
            if a.ncols() != n {
                return Err(ModelError::Dimension(format!(
                    "block {}: matrix has {} columns, objective has {n}",
                    j + 1,
                    a.ncols()
                )));
            }
        }
        Ok(())
    }

    /// Number of decision variables.
    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|k| k.dim()).sum()
    }

    /// Row offset of every block in the stacked data.
    pub fn offsets(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |acc, k| {
                let o = *acc;
                *acc += k.dim();
                Some(o)
            })
            .collect()
    }

    pub fn homogeneous(&self) -> bool {
        self.c.iter().all(|&v| v == 0.0)
            && self.b_blocks.iter().all(|b| b.iter().all(|&v| v == 0.0))
    }

    pub fn stacked_a(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.total_dim(), self.n());
        for (o, aj) in self.offsets().into_iter().zip(&self.a_blocks) {
            a.rows_mut(o, aj.nrows()).copy_from(aj);
        }
        a
    }

    pub fn stacked_b(&self) -> DVector<f64> {
        let mut b = DVector::zeros(self.total_dim());
        for (o, bj) in self.offsets().into_iter().zip(&self.b_blocks) {
            b.rows_mut(o, bj.len()).copy_from(bj);
        }
        b
    }

    /// Slacks `s^j = A^j x - b^j`.
    pub fn slacks(&self, x: &DVector<f64>) -> Result<Vec<DVector<f64>>, ModelError> {
        if x.len() != self.n() {
            return Err(ModelError::Dimension(format!(
                "x has length {}, problem has {} variables",
                x.len(),
                self.n()
            )));
        }
        Ok(self
            .a_blocks
            .iter()
            .zip(&self.b_blocks)
            .map(|(a, b)| a * x - b)
            .collect())
    }

    /// `Σ (A^j)ᵀ y^j`.
    pub fn adjoint(&self, y_blocks: &[DVector<f64>]) -> Result<DVector<f64>, ModelError> {
        self.check_y(y_blocks)?;
        let mut out = DVector::zeros(self.n());
        for (a, y) in self.a_blocks.iter().zip(y_blocks) {
            out += a.tr_mul(y);
        }
        Ok(out)
    }

    fn check_y(&self, y_blocks: &[DVector<f64>]) -> Result<(), ModelError> {
        if y_blocks.len() != self.num_blocks() {
            return Err(ModelError::Dimension(format!(
                "{} dual blocks for {} cones",
                y_blocks.len(),
                self.num_blocks()
            )));
        }
        for (j, (k, y)) in self.blocks.iter().zip(y_blocks).enumerate() {
            if y.len() != k.dim() {
                return Err(ModelError::Dimension(format!(
                    "dual block {} has length {}, {k} needs {}",
                    j + 1,
                    y.len(),
                    k.dim()
                )));
            }
        }
        Ok(())
    }

    pub fn primal_objective(&self, x: &DVector<f64>) -> Result<f64, ModelError> {
        if x.len() != self.n() {
            return Err(ModelError::Dimension(format!(
                "x has length {}, problem has {} variables",
                x.len(),
                self.n()
            )));
        }
        Ok(self.c.dot(x))
    }

    pub fn dual_objective(&self, y_blocks: &[DVector<f64>]) -> Result<f64, ModelError> {
        self.check_y(y_blocks)?;
        Ok(self
            .b_blocks
            .iter()
            .zip(y_blocks)
            .map(|(b, y)| b.dot(y))
            .sum())
    }

    /// Splits a stacked dual vector into blocks.
    pub fn split(&self, v: &DVector<f64>) -> Vec<DVector<f64>> {
        self.offsets()
            .into_iter()
            .zip(&self.blocks)
            .map(|(o, k)| v.rows(o, k.dim()).into_owned())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualPair {
    pub x: DVector<f64>,
    pub y_blocks: Vec<DVector<f64>>,
}

impl PrimalDualPair {
    pub fn new(x: DVector<f64>, y_blocks: Vec<DVector<f64>>) -> Self {
        PrimalDualPair { x, y_blocks }
    }

    pub fn zeros(problem: &ConicProblem) -> Self {
        PrimalDualPair {
            x: DVector::zeros(problem.n()),
            y_blocks: problem
                .blocks
                .iter()
                .map(|k| DVector::zeros(k.dim()))
                .collect(),
        }
    }

    pub fn slacks(&self, problem: &ConicProblem) -> Result<Vec<DVector<f64>>, ModelError> {
        problem.slacks(&self.x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub primal_cone_margins: Vec<f64>,
    pub dual_cone_margins: Vec<f64>,
    pub dual_equality_residual: f64,
    pub complementarity_gaps: Vec<f64>,
    pub duality_gap: f64,
    slack_norms: Vec<f64>,
    dual_norms: Vec<f64>,
    c_norm: f64,
}

impl ResidualReport {
    /// Every test is relative: a quantity attached to a vector `v` is
    /// compared against `tol * max(1, |v|)`.
    pub fn is_solution(&self, tol: f64) -> bool {
        let rel = |n: f64| tol * n.max(1.0);
        self.primal_cone_margins
            .iter()
            .zip(&self.slack_norms)
            .all(|(&m, &n)| m >= -rel(n))
            && self
                .dual_cone_margins
                .iter()
                .zip(&self.dual_norms)
                .all(|(&m, &n)| m >= -rel(n))
            && self.dual_equality_residual <= rel(self.c_norm)
            && self
                .complementarity_gaps
                .iter()
                .zip(self.slack_norms.iter().zip(&self.dual_norms))
                .all(|(&g, (&s, &y))| g <= rel(s * y))
    }

    /// First failed condition, for error messages.
    pub fn failure(&self, tol: f64) -> Option<String> {
        let rel = |n: f64| tol * n.max(1.0);
        for (j, (&m, &n)) in self
            .primal_cone_margins
            .iter()
            .zip(&self.slack_norms)
            .enumerate()
        {
            if m < -rel(n) {
                return Some(format!("block {} slack margin {m:.3e}", j + 1));
            }
        }
        for (j, (&m, &n)) in self
            .dual_cone_margins
            .iter()
            .zip(&self.dual_norms)
            .enumerate()
        {
            if m < -rel(n) {
                return Some(format!("block {} dual margin {m:.3e}", j + 1));
            }
        }
        if self.dual_equality_residual > rel(self.c_norm) {
            return Some(format!(
                "dual equality residual {:.3e}",
                self.dual_equality_residual
            ));
        }
        for (j, &g) in self.complementarity_gaps.iter().enumerate() {
            if g > rel(self.slack_norms[j] * self.dual_norms[j]) {
                return Some(format!("block {} complementarity gap {g:.3e}", j + 1));
            }
        }
        None
    }
}

pub fn residuals(
    problem: &ConicProblem,
    pair: &PrimalDualPair,
) -> Result<ResidualReport, ModelError> {
    let s = pair.slacks(problem)?;
    let aty = problem.adjoint(&pair.y_blocks)?;
    let primal_cone_margins = problem
        .blocks
        .iter()
        .zip(&s)
        .map(|(k, v)| margin(k, v))
        .collect();
    let dual_cone_margins = problem
        .blocks
        .iter()
        .zip(&pair.y_blocks)
        .map(|(k, v)| margin(&polar(k), v))
        .collect();
    let complementarity_gaps = s
        .iter()
        .zip(&pair.y_blocks)
        .map(|(s, y)| s.dot(y).abs())
        .collect();
    let duality_gap =
        problem.primal_objective(&pair.x)? - problem.dual_objective(&pair.y_blocks)?;
    Ok(ResidualReport {
        primal_cone_margins,
        dual_cone_margins,
        dual_equality_residual: (aty - &problem.c).norm(),
        complementarity_gaps,
        duality_gap,
        slack_norms: s.iter().map(|v| v.norm()).collect(),
        dual_norms: pair.y_blocks.iter().map(|v| v.norm()).collect(),
        c_norm: problem.c.norm(),
    })
}

/// Uniform average of solution witnesses.
///
/// Under zero duality gap the solution set of the optimality system is the
/// product of the primal and dual optimal sets, so primal and dual witnesses
/// are averaged independently. Each primal witness is validated against the
/// first dual witness and vice versa.
pub fn aggregate_witnesses(
    problem: &ConicProblem,
    primal_witnesses: &[DVector<f64>],
    dual_witnesses: &[Vec<DVector<f64>>],
    tol: f64,
) -> Result<PrimalDualPair, ModelError> {
    let (Some(x0), Some(y0)) = (primal_witnesses.first(), dual_witnesses.first()) else {
        return Err(ModelError::EmptyWitnesses);
    };
    for (i, x) in primal_witnesses.iter().enumerate() {
        let r = residuals(problem, &PrimalDualPair::new(x.clone(), y0.clone()))?;
        if let Some(reason) = r.failure(tol) {
            return Err(ModelError::WitnessNotSolution {
                side: "primal",
                index: i,
                reason,
            });
        }
    }
    for (i, y) in dual_witnesses.iter().enumerate() {
        let r = residuals(problem, &PrimalDualPair::new(x0.clone(), y.clone()))?;
        if let Some(reason) = r.failure(tol) {
            return Err(ModelError::WitnessNotSolution {
                side: "dual",
                index: i,
                reason,
            });
        }
    }
    Ok(average_unchecked(primal_witnesses, dual_witnesses))
}

pub(crate) fn average_unchecked(
    primal_witnesses: &[DVector<f64>],
    dual_witnesses: &[Vec<DVector<f64>>],
) -> PrimalDualPair {
    let np = primal_witnesses.len() as f64;
    let nd = dual_witnesses.len() as f64;
    let mut x = DVector::zeros(primal_witnesses[0].len());
    for w in primal_witnesses {
        x += w;
    }
    let mut y: Vec<DVector<f64>> = dual_witnesses[0]
        .iter()
        .map(|b| DVector::zeros(b.len()))
        .collect();
    for w in dual_witnesses {
        for (acc, b) in y.iter_mut().zip(w) {
            *acc += b;
        }
    }
    PrimalDualPair {
        x: x / np,
        y_blocks: y.into_iter().map(|b| b / nd).collect(),
    }
}
