//! Worked instances used as golden fixtures.

use nalgebra::{dmatrix, DMatrix, DVector};

use crate::cones::{svec, ConeSpec};
use crate::lifting::LiftMap;
use crate::model::ConicProblem;

/// Rows of the mixed orthant/Lorentz feasibility instance; `x = (0, 0, α)`
/// is its only primal solution family.
fn mixed_rows() -> DMatrix<f64> {
    dmatrix![
        0.0, 0.0, 1.0;
        1.0, 0.0, 0.0;
        0.0, 1.0, 0.0;
        0.0, 0.0, 1.0;
        0.0, -1.0, 0.0;
        1.0, 1.0, 0.0;
        0.0, 1.0, 0.0;
        0.0, 1.0, 1.0
    ]
}

/// `L_3 × R_+ × R_+^3`.
pub fn mixed_coarse() -> ConicProblem {
    let blocks = vec![
        ConeSpec::Lorentz(4),
        ConeSpec::Orthant(1),
        ConeSpec::Orthant(3),
    ];
    ConicProblem::from_stacked(
        "mixed_coarse",
        blocks,
        &mixed_rows(),
        &DVector::zeros(8),
        DVector::zeros(3),
    )
    .expect("fixture shapes")
}

/// `L_3 × R_+ × R_+ × R_+ × R_+`: the same data at finest granularity.
pub fn mixed_refined() -> ConicProblem {
    let blocks = vec![
        ConeSpec::Lorentz(4),
        ConeSpec::Orthant(1),
        ConeSpec::Orthant(1),
        ConeSpec::Orthant(1),
        ConeSpec::Orthant(1),
    ];
    ConicProblem::from_stacked(
        "mixed_refined",
        blocks,
        &mixed_rows(),
        &DVector::zeros(8),
        DVector::zeros(3),
    )
    .expect("fixture shapes")
}

/// Coefficient matrices of the single-block SDP instance: the slack is
/// `F0 + Σ x_i F_i`. The data is deliberately nonsymmetric in the (2,3)
/// and (3,2) entries and gets symmetrized by [`svec`].
pub fn sdp_example_matrices() -> (DMatrix<f64>, Vec<DMatrix<f64>>) {
    let f0 = dmatrix![0.0, 0.0, 0.0; 0.0, 0.0, 0.0; 0.0, 0.0, 1.0];
    let f1 = dmatrix![1.0, 0.0, 0.0; 0.0, 0.0, -1.0; 0.0, 0.0, 0.0];
    let f2 = dmatrix![0.0, 0.0, -1.0; 0.0, -1.0, 0.0; -1.0, 0.0, 0.0];
    let f3 = dmatrix![0.0, -1.0, 0.0; -1.0, 0.0, 0.0; 0.0, 0.0, -1.0];
    let f4 = dmatrix![0.0, 0.0, 0.0; 0.0, 0.0, 0.0; 0.0, -1.0, 0.0];
    (f0, vec![f1, f2, f3, f4])
}

/// `min x1` over a 3×3 linear matrix inequality whose unique primal
/// solution is `x = 0` and unique dual solution is `diag(1, 0, 0)`.
pub fn sdp_example() -> ConicProblem {
    let (f0, fs) = sdp_example_matrices();
    let cols: Vec<DVector<f64>> = fs.iter().map(svec).collect();
    let a = DMatrix::from_columns(&cols);
    ConicProblem::new(
        "sdp_example",
        vec![ConeSpec::Psd(3)],
        vec![a],
        vec![-svec(&f0)],
        DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]),
    )
    .expect("fixture shapes")
}

/// `L_2 × R_+` feasibility instance with `2 ∈ O`.
pub fn lift_counterexample() -> ConicProblem {
    let a = dmatrix![
        0.0, 1.0;
        1.0, 0.0;
        0.0, 1.0;
        1.0, 0.0
    ];
    ConicProblem::from_stacked(
        "lift_counterexample",
        vec![ConeSpec::Lorentz(3), ConeSpec::Orthant(1)],
        &a,
        &DVector::zeros(4),
        DVector::zeros(2),
    )
    .expect("fixture shapes")
}

/// Lift for [`lift_counterexample`]: identity on the Lorentz block and
/// `t ↦ (t, t)` into `L_1` on the orthant block.
pub fn lift_counterexample_map() -> LiftMap {
    LiftMap::general(vec![
        (DMatrix::identity(3, 3), ConeSpec::Lorentz(3)),
        (dmatrix![1.0; 1.0], ConeSpec::Lorentz(2)),
    ])
}

/// `min x s.t. x ≥ 1`.
pub fn trivial_lp() -> ConicProblem {
    ConicProblem::new(
        "trivial_lp",
        vec![ConeSpec::Orthant(1)],
        vec![dmatrix![1.0]],
        vec![DVector::from_element(1, 1.0)],
        DVector::from_element(1, 1.0),
    )
    .expect("fixture shapes")
}
