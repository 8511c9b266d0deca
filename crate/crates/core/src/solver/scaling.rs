//! Nesterov–Todd scaling and Jordan-algebra helpers for the IPM.
//!
//! All operations work block by block on stacked vectors. For a block with
//! primal `s` and dual `z` strictly inside the cone, the scaling `W`
//! satisfies `W z = W^{-T} s = λ`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::cones::{smat, svec, ConeSpec};

#[derive(Debug, Clone)]
pub(crate) struct BlockScaling {
    pub cone: ConeSpec,
    pub offset: usize,
    /// Dense scaling matrix on the block's vector space.
    pub w: DMatrix<f64>,
    /// Scaled point `λ = W z`, exact diagonal for PSD blocks.
    pub lambda: DVector<f64>,
    /// Eigenvalues of the scaled point for PSD blocks.
    pub lambda_diag: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct Scaling {
    pub blocks: Vec<BlockScaling>,
    pub dim: usize,
}

fn lorentz_det(v: &DVector<f64>) -> f64 {
    let t = v.rows(1, v.len() - 1).norm();
    (v[0] - t) * (v[0] + t)
}

fn jmat(d: usize) -> DMatrix<f64> {
    let mut j = DMatrix::identity(d, d);
    for i in 1..d {
        j[(i, i)] = -1.0;
    }
    j
}

fn sqrt_factor(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let eig = SymmetricEigen::new(m.clone());
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return None;
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    Some(eig.eigenvectors * d)
}

/// Applies `X ↦ Pᵀ X P` as a dense matrix on svec space.
fn congruence_matrix(p: &DMatrix<f64>) -> DMatrix<f64> {
    let n = p.nrows();
    let d = n * (n + 1) / 2;
    let mut out = DMatrix::zeros(d, d);
    for k in 0..d {
        let mut e = DVector::zeros(d);
        e[k] = 1.0;
        let img = p.transpose() * smat(&e) * p;
        out.set_column(k, &svec(&img));
    }
    out
}

impl Scaling {
    pub fn compute(cones: &[ConeSpec], s: &DVector<f64>, z: &DVector<f64>) -> Option<Scaling> {
        let mut blocks = Vec::with_capacity(cones.len());
        let mut off = 0;
        for cone in cones {
            let d = cone.dim();
            let sb = s.rows(off, d).into_owned();
            let zb = z.rows(off, d).into_owned();
            let b = match cone {
                ConeSpec::Orthant(_) | ConeSpec::Lorentz(1) => {
                    if sb.iter().chain(zb.iter()).any(|&v| !(v > 0.0)) {
                        return None;
                    }
                    let w = sb.zip_map(&zb, |a, b| (a / b).sqrt());
                    let lambda = sb.zip_map(&zb, |a, b| (a * b).sqrt());
                    BlockScaling {
                        cone: *cone,
                        offset: off,
                        w: DMatrix::from_diagonal(&w),
                        lambda,
                        lambda_diag: Vec::new(),
                    }
                }
                ConeSpec::Lorentz(_) => {
                    let ds = lorentz_det(&sb);
                    let dz = lorentz_det(&zb);
                    if !(ds > 0.0 && dz > 0.0 && sb[0] > 0.0 && zb[0] > 0.0) {
                        return None;
                    }
                    let a = ds.sqrt();
                    let bb = dz.sqrt();
                    let beta = (a / bb).sqrt();
                    let sn = &sb / a;
                    let zn = &zb / bb;
                    let gamma = ((1.0 + sn.dot(&zn)) / 2.0).sqrt();
                    let mut wbar = &sn + jmat(d) * &zn;
                    wbar /= 2.0 * gamma;
                    let mut v = wbar.clone();
                    v[0] += 1.0;
                    v /= (2.0 * (wbar[0] + 1.0)).sqrt();
                    let w = (&v * v.transpose() * 2.0 - jmat(d)) * beta;
                    let lambda = &w * &zb;
                    BlockScaling {
                        cone: *cone,
                        offset: off,
                        w,
                        lambda,
                        lambda_diag: Vec::new(),
                    }
                }
                ConeSpec::Psd(n) => {
                    let ls = sqrt_factor(&smat(&sb))?;
                    let lz = sqrt_factor(&smat(&zb))?;
                    let svd = (lz.transpose() * &ls).svd(false, true);
                    let vt = svd.v_t?;
                    let sig = svd.singular_values;
                    if sig.iter().any(|&x| !(x > 0.0)) {
                        return None;
                    }
                    let inv_sqrt = DMatrix::from_diagonal(&sig.map(|x| 1.0 / x.sqrt()));
                    let r = &ls * vt.transpose() * &inv_sqrt;
                    let w = congruence_matrix(&r);
                    let lambda = svec(&DMatrix::from_diagonal(&sig));
                    debug_assert_eq!(*n, sig.len());
                    BlockScaling {
                        cone: *cone,
                        offset: off,
                        w,
                        lambda,
                        lambda_diag: sig.iter().copied().collect(),
                    }
                }
            };
            blocks.push(b);
            off += d;
        }
        Some(Scaling { blocks, dim: off })
    }

    /// `W v`.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        for b in &self.blocks {
            let d = b.cone.dim();
            let r = &b.w * v.rows(b.offset, d);
            out.rows_mut(b.offset, d).copy_from(&r);
        }
        out
    }

    /// `Wᵀ v`.
    pub fn apply_transpose(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        for b in &self.blocks {
            let d = b.cone.dim();
            let r = b.w.tr_mul(&v.rows(b.offset, d));
            out.rows_mut(b.offset, d).copy_from(&r);
        }
        out
    }

    /// Dense `WᵀW`.
    pub fn wtw(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for b in &self.blocks {
            let d = b.cone.dim();
            let m = b.w.tr_mul(&b.w);
            out.view_mut((b.offset, b.offset), (d, d)).copy_from(&m);
        }
        out
    }

    pub fn lambda(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        for b in &self.blocks {
            out.rows_mut(b.offset, b.cone.dim()).copy_from(&b.lambda);
        }
        out
    }

    /// Solves `λ ∘ u = d` for `u`.
    pub fn lambda_inv_prod(&self, d: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        for b in &self.blocks {
            let dim = b.cone.dim();
            let db = d.rows(b.offset, dim).into_owned();
            let u = match b.cone {
                ConeSpec::Orthant(_) | ConeSpec::Lorentz(1) => db.component_div(&b.lambda),
                ConeSpec::Lorentz(_) => {
                    let l = &b.lambda;
                    let lbar = l.rows(1, dim - 1);
                    let dbar = db.rows(1, dim - 1);
                    let det = lorentz_det(l);
                    let u0 = (l[0] * db[0] - lbar.dot(&dbar)) / det;
                    let mut u = DVector::zeros(dim);
                    u[0] = u0;
                    let ubar = (dbar - lbar * u0) / l[0];
                    u.rows_mut(1, dim - 1).copy_from(&ubar);
                    u
                }
                ConeSpec::Psd(n) => {
                    let dm = smat(&db);
                    let lam = &b.lambda_diag;
                    let um = DMatrix::from_fn(n, n, |i, j| 2.0 * dm[(i, j)] / (lam[i] + lam[j]));
                    svec(&um)
                }
            };
            out.rows_mut(b.offset, dim).copy_from(&u);
        }
        out
    }
}

/// Jordan product `u ∘ v` on stacked vectors.
pub(crate) fn jordan_prod(cones: &[ConeSpec], u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(u.len());
    let mut off = 0;
    for cone in cones {
        let d = cone.dim();
        let ub = u.rows(off, d);
        let vb = v.rows(off, d);
        match cone {
            ConeSpec::Orthant(_) | ConeSpec::Lorentz(1) => {
                out.rows_mut(off, d).copy_from(&ub.component_mul(&vb));
            }
            ConeSpec::Lorentz(_) => {
                out[off] = ub.dot(&vb);
                let bar = vb.rows(1, d - 1) * ub[0] + ub.rows(1, d - 1) * vb[0];
                out.rows_mut(off + 1, d - 1).copy_from(&bar);
            }
            ConeSpec::Psd(_) => {
                let um = smat(&ub.into_owned());
                let vm = smat(&vb.into_owned());
                let p = (&um * &vm + &vm * &um) * 0.5;
                out.rows_mut(off, d).copy_from(&svec(&p));
            }
        }
        off += d;
    }
    out
}

/// Identity element of the product cone.
pub(crate) fn identity(cones: &[ConeSpec]) -> DVector<f64> {
    let total: usize = cones.iter().map(|k| k.dim()).sum();
    let mut out = DVector::zeros(total);
    let mut off = 0;
    for cone in cones {
        let e = crate::cones::interior_point(cone);
        out.rows_mut(off, cone.dim()).copy_from(&e);
        off += cone.dim();
    }
    out
}

/// Largest `α ≥ 0` (capped at `cap`) with `x + α d` in the cone, for `x`
/// strictly interior.
pub(crate) fn max_step(cones: &[ConeSpec], x: &DVector<f64>, d: &DVector<f64>, cap: f64) -> f64 {
    let mut alpha = cap;
    let mut off = 0;
    for cone in cones {
        let dim = cone.dim();
        let xb = x.rows(off, dim).into_owned();
        let db = d.rows(off, dim).into_owned();
        let a = match cone {
            ConeSpec::Orthant(_) | ConeSpec::Lorentz(1) => xb
                .iter()
                .zip(db.iter())
                .filter(|(_, &di)| di < 0.0)
                .map(|(&xi, &di)| -xi / di)
                .fold(f64::INFINITY, f64::min),
            ConeSpec::Lorentz(_) => lorentz_step(&xb, &db),
            ConeSpec::Psd(_) => psd_step(&xb, &db),
        };
        alpha = alpha.min(a);
        off += dim;
    }
    alpha.max(0.0)
}

fn lorentz_step(x: &DVector<f64>, d: &DVector<f64>) -> f64 {
    let jd = |u: &DVector<f64>, v: &DVector<f64>| {
        u[0] * v[0] - u.rows(1, u.len() - 1).dot(&v.rows(1, v.len() - 1))
    };
    let a = jd(d, d);
    let b = jd(x, d);
    let c = lorentz_det(x);
    // f(α) = c + 2bα + aα², c > 0; the exit point is the smallest positive root
    let mut best = f64::INFINITY;
    if a.abs() <= 1e-300 {
        if b < 0.0 {
            best = -c / (2.0 * b);
        }
    } else {
        let mut disc = b * b - a * c;
        if disc < 0.0 && disc > -1e-12 * (b * b).max(a.abs() * c) {
            disc = 0.0;
        }
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let q = -(b + b.signum() * sq);
            let roots = if q != 0.0 {
                [q / a, c / q]
            } else {
                [-b / a, -b / a]
            };
            for r in roots {
                if r > 0.0 && r < best {
                    best = r;
                }
            }
        }
    }
    // the leading coordinate must stay positive as well
    if d[0] < 0.0 {
        best = best.min(-x[0] / d[0]);
    }
    best
}

fn psd_step(x: &DVector<f64>, d: &DVector<f64>) -> f64 {
    let xm = smat(x);
    let dm = smat(d);
    let eig = SymmetricEigen::new(xm);
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.max(1e-300).sqrt()));
    let p = &eig.eigenvectors * inv_sqrt;
    let m = p.transpose() * dm * &p;
    let m = (&m + m.transpose()) * 0.5;
    let lmin = SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}
