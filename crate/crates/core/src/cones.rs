//! Cone geometry for the three supported block kinds.
//!
//! Vectors live in the ambient space of the cone. PSD blocks of order `n`
//! are stored as scaled upper-triangle vectors of length `n(n+1)/2`: the
//! entries are laid out row by row, `(0,0), (0,1), .., (0,n-1), (1,1), ..`,
//! and every off-diagonal entry is multiplied by `sqrt(2)`. With this layout
//! the Euclidean inner product of two vectors equals the trace inner product
//! of the matrices they encode.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default relative tolerance for cone tests.
pub const DEFAULT_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("dimension mismatch: cone {cone} expects {expected} entries, got {got}")]
    Dimension {
        cone: ConeSpec,
        expected: usize,
        got: usize,
    },
    #[error("certificate precondition failed: {0}")]
    Certificate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeKind {
    Orthant,
    Lorentz,
    Psd,
}

/// One block of a product cone.
///
/// `Lorentz(d)` is the second-order cone in `R^d`, that is `L_{d-1}`;
/// `Lorentz(1)` is `L_0 = R_+` and behaves exactly like `Orthant(1)`.
/// `Psd(n)` is the cone of PSD matrices of order `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConeSpec {
    Orthant(usize),
    Lorentz(usize),
    Psd(usize),
}

impl ConeSpec {
    pub fn kind(&self) -> ConeKind {
        match self {
            ConeSpec::Orthant(_) => ConeKind::Orthant,
            ConeSpec::Lorentz(_) => ConeKind::Lorentz,
            ConeSpec::Psd(_) => ConeKind::Psd,
        }
    }

    /// Length of the vectors living in this cone's ambient space.
    pub fn dim(&self) -> usize {
        match *self {
            ConeSpec::Orthant(n) | ConeSpec::Lorentz(n) => n,
            ConeSpec::Psd(n) => n * (n + 1) / 2,
        }
    }

    /// Matrix order for PSD blocks.
    pub fn order(&self) -> Option<usize> {
        match *self {
            ConeSpec::Psd(n) => Some(n),
            _ => None,
        }
    }

    /// Barrier degree (rank in the Jordan-algebra sense).
    pub fn degree(&self) -> usize {
        match *self {
            ConeSpec::Orthant(n) => n,
            ConeSpec::Lorentz(_) => 1,
            ConeSpec::Psd(n) => n,
        }
    }

    /// True for cones that are polyhedral: orthants and `L_0`.
    pub fn is_polyhedral(&self) -> bool {
        matches!(self, ConeSpec::Orthant(_) | ConeSpec::Lorentz(1))
    }

    pub fn is_valid(&self) -> bool {
        match *self {
            ConeSpec::Orthant(n) | ConeSpec::Lorentz(n) | ConeSpec::Psd(n) => n >= 1,
        }
    }

    fn check_len(&self, v: &DVector<f64>) -> Result<(), ConeError> {
        if v.len() != self.dim() {
            return Err(ConeError::Dimension {
                cone: *self,
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for ConeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeSpec::Orthant(n) => write!(f, "orthant({n})"),
            ConeSpec::Lorentz(n) => write!(f, "lorentz({n})"),
            ConeSpec::Psd(n) => write!(f, "psd({n})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Interior,
    Boundary,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipClass {
    pub class: Membership,
    pub margin: f64,
}

/// Number of stored entries for a symmetric matrix of order `n`.
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Matrix order from a stored length, if the length is triangular.
pub fn order_from_svec_len(len: usize) -> Option<usize> {
    let mut n = 0;
    while svec_len(n) < len {
        n += 1;
    }
    (svec_len(n) == len).then_some(n)
}

/// Scaled upper-triangle vectorization. The input is symmetrized first.
pub fn svec(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "svec needs a square matrix");
    let mut v = DVector::zeros(svec_len(n));
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            v[k] = if i == j {
                m[(i, i)]
            } else {
                0.5 * (m[(i, j)] + m[(j, i)]) * std::f64::consts::SQRT_2
            };
            k += 1;
        }
    }
    v
}

/// Inverse of [`svec`].
pub fn smat(v: &DVector<f64>) -> DMatrix<f64> {
    let n = order_from_svec_len(v.len()).expect("length is not triangular");
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            if i == j {
                m[(i, i)] = v[k];
            } else {
                let x = v[k] / std::f64::consts::SQRT_2;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
            k += 1;
        }
    }
    m
}

fn scale(v: &DVector<f64>) -> f64 {
    v.norm().max(1.0)
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Signed interiority margin: nonnegative iff `v` is in the cone.
pub fn margin(cone: &ConeSpec, v: &DVector<f64>) -> f64 {
    match cone {
        ConeSpec::Orthant(_) => v.iter().copied().fold(f64::INFINITY, f64::min),
        ConeSpec::Lorentz(1) => v[0],
        ConeSpec::Lorentz(_) => v[0] - v.rows(1, v.len() - 1).norm(),
        ConeSpec::Psd(_) => min_eigenvalue(&smat(v)),
    }
}

pub fn classify_membership(
    cone: &ConeSpec,
    v: &DVector<f64>,
    tol: f64,
) -> Result<MembershipClass, ConeError> {
    cone.check_len(v)?;
    let m = margin(cone, v);
    let band = tol * scale(v);
    let class = if m > band {
        Membership::Interior
    } else if m < -band {
        Membership::Outside
    } else {
        Membership::Boundary
    };
    Ok(MembershipClass { class, margin: m })
}

/// Positive polar `K^+`. Every supported kind is self-dual.
pub fn polar(cone: &ConeSpec) -> ConeSpec {
    *cone
}

/// Canonical interior element: all ones, the Lorentz axis, or the identity.
pub fn interior_point(cone: &ConeSpec) -> DVector<f64> {
    match *cone {
        ConeSpec::Orthant(n) => DVector::from_element(n, 1.0),
        ConeSpec::Lorentz(n) => {
            let mut e = DVector::zeros(n);
            e[0] = 1.0;
            e
        }
        ConeSpec::Psd(n) => svec(&DMatrix::identity(n, n)),
    }
}

/// Number of eigenvalues with `|lambda| > tol * max(1, |lambda|_max)`.
pub fn numeric_rank(matrix: &DMatrix<f64>, tol: f64) -> usize {
    if matrix.nrows() == 0 {
        return 0;
    }
    let sym = (matrix + matrix.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym).eigenvalues;
    let top = eig.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let cut = tol * top.max(1.0);
    eig.iter().filter(|l| l.abs() > cut).count()
}

/// Decides `-y ∈ ri N_K(s)` for `s ∈ K`, `y ∈ K^+` with `y·s = 0`.
///
/// The normal cone is `(-K^+) ∩ s^⊥` on the boundary and `{0}` in the
/// interior, so the test reduces to a per-kind description of the
/// relative interior of `K^+ ∩ s^⊥`.
pub fn in_ri_normal_cone(
    cone: &ConeSpec,
    s: &DVector<f64>,
    y: &DVector<f64>,
    tol: f64,
) -> Result<bool, ConeError> {
    let sc = classify_membership(cone, s, tol)?;
    let yc = classify_membership(&polar(cone), y, tol)?;
    if sc.class == Membership::Outside {
        return Err(ConeError::Certificate(format!(
            "slack not in {cone} (margin {:.3e})",
            sc.margin
        )));
    }
    if yc.class == Membership::Outside {
        return Err(ConeError::Certificate(format!(
            "multiplier not in polar of {cone} (margin {:.3e})",
            yc.margin
        )));
    }
    let gap = y.dot(s);
    if gap.abs() > tol * (1.0 + y.norm() * s.norm()) {
        return Err(ConeError::Certificate(format!(
            "complementarity gap {gap:.3e} exceeds tolerance"
        )));
    }

    let s_zero = s.norm() <= tol;
    let y_zero = y.norm() <= tol;
    let ok = match *cone {
        ConeSpec::Orthant(_) | ConeSpec::Lorentz(1) => {
            let ts = tol * scale(s);
            let ty = tol * scale(y);
            s.iter()
                .zip(y.iter())
                .all(|(&si, &yi)| (si > ts) != (yi > ty))
        }
        ConeSpec::Lorentz(_) => {
            if sc.class == Membership::Interior {
                y_zero
            } else if s_zero {
                yc.class == Membership::Interior
            } else if y_zero {
                false
            } else {
                let mut reflected = s.clone();
                reflected.rows_mut(1, s.len() - 1).neg_mut();
                let r = reflected.normalize();
                let d = y.normalize();
                // K^+ ∩ s^⊥ is a single ray; the band is loose because an
                // O(tol) gap only pins the direction to O(sqrt(tol)).
                (d - r).norm() <= 10.0 * tol.sqrt()
            }
        }
        ConeSpec::Psd(n) => {
            if sc.class == Membership::Interior {
                y_zero
            } else if s_zero {
                yc.class == Membership::Interior
            } else {
                let sm = smat(s);
                let ym = smat(y);
                let ranks = numeric_rank(&sm, tol) + numeric_rank(&ym, tol);
                // ‖SY‖ ≤ sqrt(y·s · λmax(S) · λmax(Y)), so an O(tol) gap only
                // bounds the product by O(sqrt(tol)).
                let prod = (&sm * &ym).norm();
                ranks == n && prod <= 10.0 * tol.sqrt() * scale(s) * scale(y)
            }
        }
    };
    Ok(ok)
}
