//! JSON documents read and written by the command line.
//!
//! Orthant and Lorentz blocks give `A^j` as a list of rows and `b^j` as a
//! vector. A PSD block of order `k` gives one `k × k` coefficient matrix per
//! variable and a `k × k` offset; all of them are symmetrized on load.

use std::f64::consts::SQRT_2;
use std::fs;
use std::path::Path;

use conpart_core::cones::{smat, svec};
use conpart_core::lifting::LiftMap;
use conpart_core::{ConeSpec, ConicProblem, PrimalDualPair};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Model(#[from] conpart_core::model::ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "cone", rename_all = "lowercase", deny_unknown_fields)]
pub enum BlockSpec {
    Orthant { dim: usize },
    Lorentz { dim: usize },
    Psd { order: usize },
}

impl From<BlockSpec> for ConeSpec {
    fn from(b: BlockSpec) -> Self {
        match b {
            BlockSpec::Orthant { dim } => ConeSpec::Orthant(dim),
            BlockSpec::Lorentz { dim } => ConeSpec::Lorentz(dim),
            BlockSpec::Psd { order } => ConeSpec::Psd(order),
        }
    }
}

impl From<ConeSpec> for BlockSpec {
    fn from(k: ConeSpec) -> Self {
        match k {
            ConeSpec::Orthant(dim) => BlockSpec::Orthant { dim },
            ConeSpec::Lorentz(dim) => BlockSpec::Lorentz { dim },
            ConeSpec::Psd(order) => BlockSpec::Psd { order },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BlockMatrix {
    Rows(Vec<Vec<f64>>),
    Matrices(Vec<Vec<Vec<f64>>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BlockVector {
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    pub blocks: Vec<BlockSpec>,
    #[serde(rename = "A")]
    pub a: Vec<BlockMatrix>,
    pub b: Vec<BlockVector>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFile {
    pub x: Vec<f64>,
    pub y: Vec<BlockVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapBlock {
    /// Row-major matrix of `M^j`.
    pub matrix: Vec<Vec<f64>>,
    pub target: BlockSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub blocks: Vec<MapBlock>,
}

fn shape(msg: String) -> InputError {
    InputError::Shape(msg)
}

fn square(rows: &[Vec<f64>], order: usize, what: &str) -> Result<DMatrix<f64>, InputError> {
    if rows.len() != order || rows.iter().any(|r| r.len() != order) {
        return Err(shape(format!("{what}: expected a {order}×{order} matrix")));
    }
    Ok(DMatrix::from_fn(order, order, |i, j| rows[i][j]))
}

fn rows_matrix(rows: &[Vec<f64>], ncols: usize, what: &str) -> Result<DMatrix<f64>, InputError> {
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(shape(format!("{what}: every row needs {ncols} entries")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// `m` with `fl(m·√2) = v`, so that writing a stored off-diagonal entry and
/// reading it back reproduces it bit for bit.
fn unscale(v: f64) -> f64 {
    let m = v / SQRT_2;
    let mut cand = [
        m,
        m.next_up(),
        m.next_down(),
        m.next_up().next_up(),
        m.next_down().next_down(),
    ];
    cand.sort_by_key(|c| (c - m).abs().to_bits());
    cand.into_iter().find(|c| c * SQRT_2 == v).unwrap_or(m)
}

/// Inverse of `svec` that round-trips exactly through it.
pub fn exact_smat(v: &DVector<f64>) -> DMatrix<f64> {
    let mut m = smat(v);
    let n = m.nrows();
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            if i != j {
                let x = unscale(v[k]);
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
            k += 1;
        }
    }
    m
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn block_vector(cone: &ConeSpec, v: &BlockVector, what: &str) -> Result<DVector<f64>, InputError> {
    match (cone, v) {
        (ConeSpec::Psd(k), BlockVector::Matrix(rows)) => Ok(svec(&square(rows, *k, what)?)),
        (_, BlockVector::Vector(vals)) => {
            if vals.len() != cone.dim() {
                return Err(shape(format!(
                    "{what}: expected {} entries, found {}",
                    cone.dim(),
                    vals.len()
                )));
            }
            Ok(DVector::from_column_slice(vals))
        }
        (_, BlockVector::Matrix(_)) => Err(shape(format!(
            "{what}: a matrix is only allowed for PSD blocks"
        ))),
    }
}

impl ProblemFile {
    pub fn to_problem(&self) -> Result<ConicProblem, InputError> {
        let r = self.blocks.len();
        if self.a.len() != r || self.b.len() != r {
            return Err(shape(format!(
                "{} blocks but {} matrices and {} offsets",
                r,
                self.a.len(),
                self.b.len()
            )));
        }
        let n = self.c.len();
        let cones: Vec<ConeSpec> = self.blocks.iter().map(|&b| b.into()).collect();
        let mut a_blocks = Vec::with_capacity(r);
        let mut b_blocks = Vec::with_capacity(r);
        for (j, cone) in cones.iter().enumerate() {
            let what = format!("block {}", j + 1);
            if !cone.is_valid() {
                return Err(shape(format!("{what}: invalid cone {cone}")));
            }
            let a = match (cone, &self.a[j]) {
                (ConeSpec::Psd(k), BlockMatrix::Matrices(ms)) => {
                    if ms.len() != n {
                        return Err(shape(format!(
                            "{what}: expected {n} coefficient matrices, found {}",
                            ms.len()
                        )));
                    }
                    let cols = ms
                        .iter()
                        .map(|m| square(m, *k, &what).map(|m| svec(&m)))
                        .collect::<Result<Vec<_>, _>>()?;
                    if cols.is_empty() {
                        DMatrix::zeros(cone.dim(), 0)
                    } else {
                        DMatrix::from_columns(&cols)
                    }
                }
                (ConeSpec::Psd(_), BlockMatrix::Rows(rows)) if rows.is_empty() && n == 0 => {
                    DMatrix::zeros(cone.dim(), 0)
                }
                (ConeSpec::Psd(_), BlockMatrix::Rows(_)) => {
                    return Err(shape(format!(
                        "{what}: PSD blocks take one square matrix per variable"
                    )));
                }
                (_, BlockMatrix::Rows(rows)) => {
                    if rows.len() != cone.dim() {
                        return Err(shape(format!(
                            "{what}: expected {} rows, found {}",
                            cone.dim(),
                            rows.len()
                        )));
                    }
                    rows_matrix(rows, n, &what)?
                }
                (_, BlockMatrix::Matrices(_)) => {
                    return Err(shape(format!(
                        "{what}: square coefficient matrices are only allowed for PSD blocks"
                    )));
                }
            };
            a_blocks.push(a);
            b_blocks.push(block_vector(cone, &self.b[j], &what)?);
        }
        Ok(ConicProblem::new(
            self.name.clone(),
            cones,
            a_blocks,
            b_blocks,
            DVector::from_column_slice(&self.c),
        )?)
    }

    pub fn from_problem(p: &ConicProblem) -> Self {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for ((cone, aj), bj) in p.blocks.iter().zip(&p.a_blocks).zip(&p.b_blocks) {
            match cone {
                ConeSpec::Psd(_) => {
                    a.push(BlockMatrix::Matrices(
                        aj.column_iter()
                            .map(|col| matrix_rows(&exact_smat(&col.into_owned())))
                            .collect(),
                    ));
                    b.push(BlockVector::Matrix(matrix_rows(&exact_smat(bj))));
                }
                _ => {
                    a.push(BlockMatrix::Rows(matrix_rows(aj)));
                    b.push(BlockVector::Vector(bj.iter().copied().collect()));
                }
            }
        }
        ProblemFile {
            name: p.name.clone(),
            blocks: p.blocks.iter().map(|&k| k.into()).collect(),
            a,
            b,
            c: p.c.iter().copied().collect(),
        }
    }
}

impl PairFile {
    pub fn from_pair(pair: &PrimalDualPair) -> Self {
        PairFile {
            x: pair.x.iter().copied().collect(),
            y: pair
                .y_blocks
                .iter()
                .map(|v| BlockVector::Vector(v.iter().copied().collect()))
                .collect(),
        }
    }

    pub fn to_pair(&self, problem: &ConicProblem) -> Result<PrimalDualPair, InputError> {
        if self.x.len() != problem.n() {
            return Err(shape(format!(
                "pair: x has {} entries, problem has {} variables",
                self.x.len(),
                problem.n()
            )));
        }
        if self.y.len() != problem.num_blocks() {
            return Err(shape(format!(
                "pair: {} dual blocks for {} cone blocks",
                self.y.len(),
                problem.num_blocks()
            )));
        }
        let y = problem
            .blocks
            .iter()
            .zip(&self.y)
            .enumerate()
            .map(|(j, (k, v))| block_vector(k, v, &format!("pair block {}", j + 1)))
            .collect::<Result<_, _>>()?;
        Ok(PrimalDualPair::new(DVector::from_column_slice(&self.x), y))
    }
}

impl MapFile {
    pub fn to_map(&self, source: &[ConeSpec]) -> Result<LiftMap, InputError> {
        if self.blocks.len() != source.len() {
            return Err(shape(format!(
                "map has {} blocks, problem has {}",
                self.blocks.len(),
                source.len()
            )));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(source)
            .enumerate()
            .map(|(j, (mb, k))| {
                let target: ConeSpec = mb.target.into();
                let what = format!("map block {}", j + 1);
                if mb.matrix.len() != target.dim() {
                    return Err(shape(format!(
                        "{what}: expected {} rows, found {}",
                        target.dim(),
                        mb.matrix.len()
                    )));
                }
                Ok((rows_matrix(&mb.matrix, k.dim(), &what)?, target))
            })
            .collect::<Result<_, _>>()?;
        Ok(LiftMap::general(blocks))
    }
}

fn read<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, InputError> {
    let p = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| InputError::Read {
        path: p.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| InputError::Parse { path: p, source })
}

pub fn load_problem(path: &Path) -> Result<ConicProblem, InputError> {
    read::<ProblemFile>(path)?.to_problem()
}

pub fn load_pair(path: &Path, problem: &ConicProblem) -> Result<PrimalDualPair, InputError> {
    read::<PairFile>(path)?.to_pair(problem)
}

pub fn load_map(path: &Path, source: &[ConeSpec]) -> Result<LiftMap, InputError> {
    read::<MapFile>(path)?.to_map(source)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), InputError> {
    fs::write(path, text).map_err(|source| InputError::Write {
        path: path.display().to_string(),
        source,
    })
}

pub fn save_problem(path: &Path, problem: &ConicProblem) -> Result<(), InputError> {
    write_text(path, &to_json(&ProblemFile::from_problem(problem)))
}
