//! Homogeneous self-dual primal-dual interior-point method.
//!
//! Solves the standard-form pair
//!
//! ```text
//! minimize    cᵀx                 maximize   -hᵀz - bᵀy
//! subject to  Gx + s = h          subject to Gᵀz + Aᵀy + c = 0
//!             Ax = b                         z ∈ K
//!             s ∈ K
//! ```
//!
//! through the self-dual embedding with Nesterov–Todd scaling and a
//! Mehrotra predictor-corrector. Every KKT system is dense; problems are
//! expected to be desk sized.
//!
//! Fixed internals: start at `x = 0, y = 0, s = z = e, τ = κ = 1`; centering
//! `σ = (1 - α_aff)^3`. The merit of an iterate is the largest of its
//! scaled residuals, gap and objective mismatch. Iterations continue past
//! `tol` toward `tol²` and the best iterate is returned; it counts as
//! optimal when its merit is within `10·tol`.

use nalgebra::{DMatrix, DVector};

use super::scaling::{identity, jordan_prod, max_step, Scaling};
use crate::cones::ConeSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    NumericalFailure,
}

/// A conic program in solver standard form.
#[derive(Debug, Clone)]
pub struct ConeLp {
    pub c: DVector<f64>,
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub cones: Vec<ConeSpec>,
}

#[derive(Debug, Clone)]
pub struct ConeLpSolution {
    pub status: LpStatus,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub z: DVector<f64>,
    pub s: DVector<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    pub mu: f64,
    /// Largest scaled residual or gap of the returned iterate.
    pub residual: f64,
    /// Best dual objective seen on an iterate with dual residual below
    /// `10·tol`: a lower bound on the optimal value up to that residual.
    pub dual_bound: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct IpmSettings {
    /// Acceptance tolerance on scaled residuals and gap. Iterations continue
    /// past it towards `max(tol², 1e-14)` while progress is made.
    pub tol: f64,
    pub max_iters: usize,
    pub step_fraction: f64,
    /// Off for programs known to be feasible and bounded, where a nearly
    /// empty interior must not be mistaken for infeasibility.
    pub detect_infeasibility: bool,
}

const REG: f64 = 1e-11;
const REFINE_STEPS: usize = 4;
const DEEP_TOL: f64 = 1e-14;
/// Iterations without halving the best merit before giving up.
const STALL_ITERS: usize = 10;
/// Growth of the merit over the best one that ends the run once the best
/// iterate is near optimal; an inaccurate KKT solve shows up this way.
const DIVERGED: f64 = 1e4;
/// Best merit, as a multiple of `tol`, accepted as optimal.
const ACCEPT: f64 = 10.0;
const RESCALE_BELOW: f64 = 1e-3;

impl ConeLp {
    pub fn n(&self) -> usize {
        self.c.len()
    }

    fn m(&self) -> usize {
        self.h.len()
    }

    fn p(&self) -> usize {
        self.b.len()
    }

    fn degree(&self) -> usize {
        self.cones.iter().map(|k| k.degree()).sum()
    }
}

struct Kkt {
    mat: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
    p: usize,
}

impl Kkt {
    fn new(lp: &ConeLp, wtw: &DMatrix<f64>) -> Self {
        let (n, p, m) = (lp.n(), lp.p(), lp.m());
        let dim = n + p + m;
        let mut mat = DMatrix::zeros(dim, dim);
        mat.view_mut((0, n), (n, p)).copy_from(&lp.a.transpose());
        mat.view_mut((0, n + p), (n, m))
            .copy_from(&lp.g.transpose());
        mat.view_mut((n, 0), (p, n)).copy_from(&lp.a);
        mat.view_mut((n + p, 0), (m, n)).copy_from(&lp.g);
        mat.view_mut((n + p, n + p), (m, m)).copy_from(&(-wtw));
        let mut reg = mat.clone();
        for i in 0..n {
            reg[(i, i)] += REG;
        }
        for i in n..n + p {
            reg[(i, i)] -= REG;
        }
        Kkt {
            lu: reg.lu(),
            mat,
            n,
            p,
        }
    }

    fn solve(
        &self,
        bx: &DVector<f64>,
        by: &DVector<f64>,
        bz: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let (n, p) = (self.n, self.p);
        let mut rhs = DVector::zeros(self.mat.nrows());
        rhs.rows_mut(0, n).copy_from(bx);
        rhs.rows_mut(n, p).copy_from(by);
        rhs.rows_mut(n + p, bz.len()).copy_from(bz);
        let mut sol = self
            .lu
            .solve(&rhs)
            .unwrap_or_else(|| DVector::zeros(rhs.len()));
        let mut best_res = (&rhs - &self.mat * &sol).norm();
        for _ in 0..REFINE_STEPS {
            let r = &rhs - &self.mat * &sol;
            let Some(corr) = self.lu.solve(&r) else { break };
            let cand = &sol + corr;
            let res = (&rhs - &self.mat * &cand).norm();
            if !(res < best_res) {
                break;
            }
            best_res = res;
            sol = cand;
        }
        (
            sol.rows(0, n).into_owned(),
            sol.rows(n, p).into_owned(),
            sol.rows(n + p, bz.len()).into_owned(),
        )
    }
}

#[derive(Clone)]
struct Iterate {
    x: DVector<f64>,
    y: DVector<f64>,
    z: DVector<f64>,
    s: DVector<f64>,
    tau: f64,
    kappa: f64,
}

struct Direction {
    x: DVector<f64>,
    y: DVector<f64>,
    z: DVector<f64>,
    s: DVector<f64>,
    tau: f64,
    kappa: f64,
    /// Scaled primal and dual steps `W^{-T} ds`, `W dz`.
    s_scaled: DVector<f64>,
    z_scaled: DVector<f64>,
}

fn best_merit(best: &Option<(f64, Iterate)>) -> f64 {
    best.as_ref().map_or(f64::INFINITY, |b| b.0)
}

pub fn solve_cone_lp(lp: &ConeLp, settings: &IpmSettings) -> ConeLpSolution {
    let (n, p, m) = (lp.n(), lp.p(), lp.m());
    let e = identity(&lp.cones);
    let nu = lp.degree() as f64;
    let mut it = Iterate {
        x: DVector::zeros(n),
        y: DVector::zeros(p),
        z: e.clone(),
        s: e.clone(),
        tau: 1.0,
        kappa: 1.0,
    };
    let bnorm = lp.b.norm().max(lp.h.norm()).max(1.0);
    let cnorm = lp.c.norm().max(1.0);

    let mut status = LpStatus::NumericalFailure;
    let mut iterations = 0;
    let mut mu = (it.s.dot(&it.z) + it.tau * it.kappa) / (nu + 1.0);
    let deep = (settings.tol * settings.tol).max(DEEP_TOL);
    let mut best: Option<(f64, Iterate)> = None;
    let mut stalled = 0;
    let mut dual_bound = f64::NEG_INFINITY;

    for k in 0..=settings.max_iters {
        iterations = k;
        let rx = lp.a.tr_mul(&it.y) + lp.g.tr_mul(&it.z) + &lp.c * it.tau;
        let ry = &lp.a * &it.x - &lp.b * it.tau;
        let rz = &it.s + &lp.g * &it.x - &lp.h * it.tau;
        let cx = lp.c.dot(&it.x);
        let by_hz = lp.b.dot(&it.y) + lp.h.dot(&it.z);
        let rt = it.kappa + cx + by_hz;
        mu = (it.s.dot(&it.z) + it.tau * it.kappa) / (nu + 1.0);

        let pres = ry.norm().max(rz.norm()) / it.tau / bnorm;
        let dres = rx.norm() / it.tau / cnorm;
        let pobj = cx / it.tau;
        let dobj = -by_hz / it.tau;
        let gap = it.s.dot(&it.z) / (it.tau * it.tau);
        let scale = 1.0 + pobj.abs().min(dobj.abs());
        if dres <= ACCEPT * settings.tol && dobj > dual_bound {
            if (pobj - dobj).abs() < 0.5 * (pobj - dual_bound).abs() {
                stalled = 0;
            }
            dual_bound = dobj;
        }
        let merit = pres
            .max(dres)
            .max(gap / scale)
            .max((pobj - dobj).abs() / scale);
        if merit.is_finite() && merit < best_merit(&best) {
            if merit < 0.5 * best_merit(&best) {
                stalled = 0;
            }
            best = Some((merit, it.clone()));
        } else {
            stalled += 1;
        }
        let near = best_merit(&best) <= settings.tol.sqrt();
        if merit <= deep
            || (near && (stalled >= STALL_ITERS || merit > DIVERGED * best_merit(&best)))
        {
            break;
        }
        // infeasibility certificates, checked on the unnormalized rays
        if settings.detect_infeasibility && by_hz < 0.0 {
            let cert = (lp.a.tr_mul(&it.y) + lp.g.tr_mul(&it.z)).norm() / (-by_hz);
            if cert <= settings.tol && it.tau < settings.tol.sqrt() * it.kappa.max(1.0) {
                status = LpStatus::PrimalInfeasible;
                break;
            }
        }
        if settings.detect_infeasibility && cx < 0.0 {
            let cert = (&lp.a * &it.x).norm().max((&lp.g * &it.x + &it.s).norm()) / (-cx);
            if cert <= settings.tol && it.tau < settings.tol.sqrt() * it.kappa.max(1.0) {
                status = LpStatus::DualInfeasible;
                break;
            }
        }
        if k == settings.max_iters {
            break;
        }

        let Some(scaling) = Scaling::compute(&lp.cones, &it.s, &it.z) else {
            break;
        };
        let kkt = Kkt::new(lp, &scaling.wtw());
        let (x1, y1, z1) = kkt.solve(&(-&lp.c), &lp.b, &lp.h);
        let lambda = scaling.lambda();

        let dir_for = |sigma: f64, ds: &DVector<f64>, dkappa: f64| -> Direction {
            let eta = 1.0 - sigma;
            let lds = scaling.lambda_inv_prod(ds);
            let bz = -&rz * eta + scaling.apply_transpose(&lds);
            let (x2, y2, z2) = kkt.solve(&(-&rx * eta), &(-&ry * eta), &bz);
            let rhs_t = -rt * eta + dkappa / it.tau - lp.c.dot(&x2) - lp.b.dot(&y2) - lp.h.dot(&z2);
            let den = lp.c.dot(&x1) + lp.b.dot(&y1) + lp.h.dot(&z1) - it.kappa / it.tau;
            let dtau = rhs_t / den;
            let dx = &x2 + &x1 * dtau;
            let dy = &y2 + &y1 * dtau;
            let dz = &z2 + &z1 * dtau;
            let z_scaled = scaling.apply(&dz);
            let s_scaled = -&lds - &z_scaled;
            let dsv = scaling.apply_transpose(&s_scaled);
            let dk = (-dkappa - it.kappa * dtau) / it.tau;
            Direction {
                x: dx,
                y: dy,
                z: dz,
                s: dsv,
                tau: dtau,
                kappa: dk,
                s_scaled,
                z_scaled,
            }
        };

        let step_len = |d: &Direction| -> f64 {
            // the unscaled ratio tests guard against rounding in W when the
            // scaling is badly conditioned
            let mut a = max_step(&lp.cones, &lambda, &d.s_scaled, f64::INFINITY)
                .min(max_step(&lp.cones, &lambda, &d.z_scaled, f64::INFINITY))
                .min(max_step(&lp.cones, &it.s, &d.s, f64::INFINITY))
                .min(max_step(&lp.cones, &it.z, &d.z, f64::INFINITY));
            if d.tau < 0.0 {
                a = a.min(-it.tau / d.tau);
            }
            if d.kappa < 0.0 {
                a = a.min(-it.kappa / d.kappa);
            }
            a
        };

        // predictor
        let ds_aff = jordan_prod(&lp.cones, &lambda, &lambda);
        let aff = dir_for(0.0, &ds_aff, it.kappa * it.tau);
        let a_aff = step_len(&aff).min(1.0);
        let sigma = (1.0 - a_aff).powi(3);

        // corrector
        let ds = &ds_aff + jordan_prod(&lp.cones, &aff.s_scaled, &aff.z_scaled) - &e * (sigma * mu);
        let dkappa = it.kappa * it.tau + aff.kappa * aff.tau - sigma * mu;
        let d = dir_for(sigma, &ds, dkappa);
        let alpha = (step_len(&d) * settings.step_fraction).min(1.0);
        if !alpha.is_finite() || alpha <= 1e-14 {
            break;
        }

        it.x += &d.x * alpha;
        it.y += &d.y * alpha;
        it.z += &d.z * alpha;
        it.s += &d.s * alpha;
        it.tau += d.tau * alpha;
        it.kappa += d.kappa * alpha;
        if !(it.tau > 0.0 && it.kappa > 0.0) || !it.x.iter().all(|v| v.is_finite()) {
            break;
        }
        // The embedding is homogeneous; keep the iterate at unit scale when
        // both τ and κ shrink, as happens on problems without a Slater point.
        let scale = it.tau.max(it.kappa);
        if scale < RESCALE_BELOW {
            it.x /= scale;
            it.y /= scale;
            it.z /= scale;
            it.s /= scale;
            it.tau /= scale;
            it.kappa /= scale;
        }
    }

    let mut residual = f64::INFINITY;
    let (x, y, z, s, pobj, dobj) = match status {
        LpStatus::PrimalInfeasible => {
            let d = -(lp.b.dot(&it.y) + lp.h.dot(&it.z));
            (
                DVector::zeros(n),
                &it.y / d,
                &it.z / d,
                DVector::zeros(m),
                f64::INFINITY,
                f64::INFINITY,
            )
        }
        LpStatus::DualInfeasible => {
            let d = -lp.c.dot(&it.x);
            (
                &it.x / d,
                DVector::zeros(p),
                DVector::zeros(m),
                &it.s / d,
                f64::NEG_INFINITY,
                f64::NEG_INFINITY,
            )
        }
        _ => {
            if let Some((m, b)) = best.take() {
                residual = m;
                if m <= ACCEPT * settings.tol {
                    status = LpStatus::Optimal;
                }
                it = b;
            }
            let t = it.tau;
            let x = &it.x / t;
            let y = &it.y / t;
            let z = &it.z / t;
            let s = &it.s / t;
            let pobj = lp.c.dot(&x);
            let dobj = -lp.h.dot(&z) - lp.b.dot(&y);
            (x, y, z, s, pobj, dobj)
        }
    };
    ConeLpSolution {
        status,
        x,
        y,
        z,
        s,
        primal_objective: pobj,
        dual_objective: dobj,
        iterations,
        mu,
        residual,
        dual_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn settings() -> IpmSettings {
        IpmSettings {
            tol: 1e-9,
            max_iters: 100,
            step_fraction: 0.98,
            detect_infeasibility: true,
        }
    }

    #[test]
    fn small_lp() {
        // min -x1 - x2 s.t. x1 + 2x2 <= 4, 3x1 + x2 <= 6, x >= 0
        let lp = ConeLp {
            c: dvector![-1.0, -1.0],
            g: DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 3.0, 1.0, -1.0, 0.0, 0.0, -1.0]),
            h: dvector![4.0, 6.0, 0.0, 0.0],
            a: DMatrix::zeros(0, 2),
            b: DVector::zeros(0),
            cones: vec![ConeSpec::Orthant(4)],
        };
        let sol = solve_cone_lp(&lp, &settings());
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 1.6).abs() < 1e-7);
        assert!((sol.x[1] - 1.2).abs() < 1e-7);
        assert!((sol.primal_objective + 2.8).abs() < 1e-7);
    }

    #[test]
    fn lp_with_equality() {
        // min x1 + 2x2 s.t. x1 + x2 = 1, x >= 0
        let lp = ConeLp {
            c: dvector![1.0, 2.0],
            g: -DMatrix::identity(2, 2),
            h: DVector::zeros(2),
            a: DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            b: dvector![1.0],
            cones: vec![ConeSpec::Orthant(2)],
        };
        let sol = solve_cone_lp(&lp, &settings());
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-7 && sol.x[1].abs() < 1e-7);
    }

    #[test]
    fn socp_min_norm() {
        // distance from (1, 2) to the line x1 + x2 = 0
        let lp = ConeLp {
            c: dvector![1.0, 0.0, 0.0],
            g: DMatrix::from_row_slice(3, 3, &[-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0]),
            h: dvector![0.0, -1.0, -2.0],
            a: DMatrix::from_row_slice(1, 3, &[0.0, 1.0, 1.0]),
            b: dvector![0.0],
            cones: vec![ConeSpec::Lorentz(3)],
        };
        let sol = solve_cone_lp(&lp, &settings());
        assert_eq!(sol.status, LpStatus::Optimal);
        let expect = 3.0 / 2f64.sqrt();
        assert!(
            (sol.primal_objective - expect).abs() < 1e-7,
            "{}",
            sol.primal_objective
        );
    }

    #[test]
    fn sdp_max_eigenvalue() {
        // min t s.t. tI - M ⪰ 0 → λmax(M)
        let mm = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let msv = crate::cones::svec(&mm);
        let isv = crate::cones::svec(&DMatrix::identity(2, 2));
        let lp = ConeLp {
            c: dvector![1.0],
            g: DMatrix::from_column_slice(3, 1, (-isv).as_slice()),
            h: -msv,
            a: DMatrix::zeros(0, 1),
            b: DVector::zeros(0),
            cones: vec![ConeSpec::Psd(2)],
        };
        let sol = solve_cone_lp(&lp, &settings());
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 3.0).abs() < 1e-7);
    }

    #[test]
    fn detects_primal_infeasibility() {
        // x >= 1 and x <= 0
        let lp = ConeLp {
            c: dvector![1.0],
            g: DMatrix::from_row_slice(2, 1, &[-1.0, 1.0]),
            h: dvector![-1.0, 0.0],
            a: DMatrix::zeros(0, 1),
            b: DVector::zeros(0),
            cones: vec![ConeSpec::Orthant(2)],
        };
        assert_eq!(
            solve_cone_lp(&lp, &settings()).status,
            LpStatus::PrimalInfeasible
        );
    }

    #[test]
    fn detects_dual_infeasibility() {
        // min -x s.t. x >= 0
        let lp = ConeLp {
            c: dvector![-1.0],
            g: DMatrix::from_row_slice(1, 1, &[-1.0]),
            h: dvector![0.0],
            a: DMatrix::zeros(0, 1),
            b: DVector::zeros(0),
            cones: vec![ConeSpec::Orthant(1)],
        };
        assert_eq!(
            solve_cone_lp(&lp, &settings()).status,
            LpStatus::DualInfeasible
        );
    }
}
