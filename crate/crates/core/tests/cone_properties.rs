use conpart_core::cones::{
    classify_membership, in_ri_normal_cone, interior_point, margin, polar, svec,
};
use conpart_core::{ConeSpec, Membership};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-7;

fn gaussian_vec(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

/// A point of the cone, normalized to unit length.
fn cone_sample(cone: &ConeSpec, rng: &mut impl Rng) -> DVector<f64> {
    let v = match *cone {
        ConeSpec::Orthant(n) => gaussian_vec(rng, n).map(f64::abs),
        ConeSpec::Lorentz(1) => DVector::from_element(1, rng.random_range(0.0..1.0)),
        ConeSpec::Lorentz(n) => {
            let u = gaussian_vec(rng, n - 1);
            let mut v = DVector::zeros(n);
            v[0] = u.norm() + rng.random_range(0.0..0.5);
            v.rows_mut(1, n - 1).copy_from(&u);
            v
        }
        ConeSpec::Psd(n) => {
            let k = rng.random_range(1..=n);
            let g = DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0));
            svec(&(&g * g.transpose()))
        }
    };
    let norm = v.norm();
    if norm > 0.0 {
        v / norm
    } else {
        interior_point(cone).normalize()
    }
}

fn all_kinds() -> Vec<ConeSpec> {
    vec![
        ConeSpec::Orthant(1),
        ConeSpec::Orthant(4),
        ConeSpec::Lorentz(1),
        ConeSpec::Lorentz(2),
        ConeSpec::Lorentz(5),
        ConeSpec::Psd(2),
        ConeSpec::Psd(3),
    ]
}

#[test]
fn interior_points_pair_positively_with_the_polar() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for cone in all_kinds() {
        let dual = polar(&cone);
        let mut seen = 0;
        while seen < 1000 {
            let v = gaussian_vec(&mut rng, cone.dim()) + interior_point(&cone) * 0.8;
            let class = classify_membership(&cone, &v, TOL).unwrap();
            if class.class != Membership::Interior {
                continue;
            }
            seen += 1;
            for _ in 0..100 {
                let w = cone_sample(&dual, &mut rng);
                assert!(v.dot(&w) > 0.0, "{cone}: v = {v}, w = {w}");
            }
        }
    }
}

#[test]
fn canonical_interior_points_classify_interior() {
    for cone in all_kinds() {
        let e = interior_point(&cone);
        let class = classify_membership(&cone, &e, TOL).unwrap();
        assert_eq!(class.class, Membership::Interior, "{cone}");
    }
}

/// Complementary pairs with `-y ∈ ri N_K(s)` by construction, together with
/// directions spanning the face `K⁺ ∩ s^⊥` around `y`.
fn ri_pair(cone: &ConeSpec, rng: &mut impl Rng) -> (DVector<f64>, DVector<f64>, Vec<DVector<f64>>) {
    match *cone {
        ConeSpec::Orthant(n) => {
            let mut s = DVector::zeros(n);
            let mut y = DVector::zeros(n);
            let mut dirs = Vec::new();
            for i in 0..n {
                if rng.random_bool(0.5) {
                    s[i] = rng.random_range(0.5..2.0);
                } else {
                    y[i] = rng.random_range(0.5..2.0);
                    let mut e = DVector::zeros(n);
                    e[i] = 1.0;
                    dirs.push(e);
                }
            }
            (s, y, dirs)
        }
        ConeSpec::Lorentz(n) => {
            let u = gaussian_vec(rng, n - 1).normalize();
            let (a, b) = (rng.random_range(0.5..2.0), rng.random_range(0.5..2.0));
            let mut s = DVector::zeros(n);
            s[0] = a;
            s.rows_mut(1, n - 1).copy_from(&(&u * a));
            let mut y = DVector::zeros(n);
            y[0] = b;
            y.rows_mut(1, n - 1).copy_from(&(&u * -b));
            let dir = y.normalize();
            (s, y, vec![dir])
        }
        ConeSpec::Psd(n) => {
            let q = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))
                .qr()
                .q();
            let k = rng.random_range(0..=n);
            let diag = |range: std::ops::Range<usize>, rng: &mut dyn rand::RngCore| {
                let mut d = DVector::zeros(n);
                for i in range {
                    d[i] = rng.random_range(0.5..2.0);
                }
                &q * DMatrix::from_diagonal(&d) * q.transpose()
            };
            let s = diag(0..k, rng);
            let y = diag(k..n, rng);
            let ker = q.columns(k, n - k).into_owned();
            let mut dirs = Vec::new();
            for i in 0..n - k {
                for j in i..n - k {
                    let mut z = DMatrix::zeros(n - k, n - k);
                    z[(i, j)] = 1.0;
                    z[(j, i)] = 1.0;
                    dirs.push(svec(&(&ker * z * ker.transpose())));
                }
            }
            (svec(&s), svec(&y), dirs)
        }
    }
}

#[test]
fn ri_normal_cone_pairs_admit_two_sided_perturbations() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for cone in [
        ConeSpec::Orthant(4),
        ConeSpec::Lorentz(3),
        ConeSpec::Lorentz(5),
        ConeSpec::Psd(2),
        ConeSpec::Psd(3),
    ] {
        for _ in 0..200 {
            let (s, y, dirs) = ri_pair(&cone, &mut rng);
            if !in_ri_normal_cone(&cone, &s, &y, TOL).unwrap() {
                panic!("{cone}: constructed pair rejected, s = {s}, y = {y}");
            }
            assert!(margin(&polar(&cone), &y) >= -TOL);
            assert!(y.dot(&s).abs() <= TOL * (1.0 + y.norm() * s.norm()));
            let eps = 10.0 * TOL;
            for z in &dirs {
                for sign in [1.0, -1.0] {
                    let p = &y + z * (sign * eps);
                    assert!(
                        margin(&polar(&cone), &p) >= -1e-12,
                        "{cone}: left the polar along {z}"
                    );
                    assert!(
                        p.dot(&s).abs() <= 1e-12 * (1.0 + s.norm()),
                        "{cone}: left s^⊥"
                    );
                }
            }
        }
    }
}

#[test]
fn lorentz_ri_normal_cone_is_every_nonzero_complement() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 2..=5 {
        let cone = ConeSpec::Lorentz(n);
        for _ in 0..200 {
            let u = gaussian_vec(&mut rng, n - 1).normalize();
            let a = rng.random_range(0.2..3.0);
            let mut s = DVector::zeros(n);
            s[0] = a;
            s.rows_mut(1, n - 1).copy_from(&(&u * a));
            let t = if rng.random_bool(0.3) {
                0.0
            } else {
                rng.random_range(0.1..3.0)
            };
            let mut y = DVector::zeros(n);
            y[0] = t;
            y.rows_mut(1, n - 1).copy_from(&(&u * -t));
            assert_eq!(
                in_ri_normal_cone(&cone, &s, &y, TOL).unwrap(),
                t > 0.0,
                "s = {s}, y = {y}"
            );
        }
    }
}

proptest! {
    #[test]
    fn orthant_test_decomposes_by_coordinate(pattern in prop::collection::vec((0u8..3, 0.1f64..3.0), 1..7)) {
        let n = pattern.len();
        let mut s = DVector::zeros(n);
        let mut y = DVector::zeros(n);
        for (i, &(kind, v)) in pattern.iter().enumerate() {
            match kind {
                0 => s[i] = v,
                1 => y[i] = v,
                _ => {}
            }
        }
        let whole = in_ri_normal_cone(&ConeSpec::Orthant(n), &s, &y, TOL).unwrap();
        let parts = (0..n).all(|i| {
            in_ri_normal_cone(&ConeSpec::Orthant(1), &DVector::from_element(1, s[i]), &DVector::from_element(1, y[i]), TOL)
                .unwrap()
        });
        prop_assert_eq!(whole, parts);
    }

    #[test]
    fn orthant_one_and_lorentz_zero_agree(s in 0.0f64..2.0, y in 0.0f64..2.0, zero_s in any::<bool>()) {
        let (s, y) = if zero_s { (0.0, y) } else { (s, 0.0) };
        let (sv, yv) = (DVector::from_element(1, s), DVector::from_element(1, y));
        prop_assert_eq!(
            classify_membership(&ConeSpec::Orthant(1), &sv, TOL).unwrap().class,
            classify_membership(&ConeSpec::Lorentz(1), &sv, TOL).unwrap().class
        );
        prop_assert_eq!(
            in_ri_normal_cone(&ConeSpec::Orthant(1), &sv, &yv, TOL).unwrap(),
            in_ri_normal_cone(&ConeSpec::Lorentz(1), &sv, &yv, TOL).unwrap()
        );
    }

    #[test]
    fn margins_are_concave(seed in any::<u64>(), kind in 0usize..7) {
        let cone = all_kinds()[kind];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gaussian_vec(&mut rng, cone.dim());
        let b = gaussian_vec(&mut rng, cone.dim());
        let mid = (&a + &b) * 0.5;
        prop_assert!(margin(&cone, &mid) >= 0.5 * (margin(&cone, &a) + margin(&cone, &b)) - 1e-12);
    }
}
