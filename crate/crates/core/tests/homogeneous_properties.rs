mod common;

use conpart_core::classify;
use conpart_core::generate::homogeneous_orthant;
use conpart_core::homogeneous::{check_r0_inclusion, classify_six_dual, image_cone, lineality};
use conpart_core::partition::ClassifyOptions;
use conpart_core::rational::Feasibility;
use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{lineality_members, q, Q};

#[test]
fn dual_characterization_agrees_with_support_problems() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let opts = ClassifyOptions::default();
    for i in 0..30 {
        let p = homogeneous_orthant(&mut rng, 6, 10, "h");
        let exact = classify_six_dual(&p).unwrap();
        let r = classify(&p, &opts).unwrap();
        assert_eq!(exact, r.six, "instance {i}");
        assert!(check_r0_inclusion(&p, &r.four).unwrap(), "instance {i}");
    }
}

#[test]
fn lineality_matches_caratheodory_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for i in 0..40 {
        let p = homogeneous_orthant(&mut rng, 5, 8, "lin");
        let cone = image_cone(&p).unwrap();
        let gens: Vec<Vec<Q>> = cone
            .generators
            .iter()
            .map(|g| g.iter().map(|&v| q(v)).collect())
            .collect();
        let oracle = lineality_members(&gens);
        let reported: Vec<bool> = cone
            .certificates
            .iter()
            .map(Feasibility::is_feasible)
            .collect();
        assert_eq!(reported, oracle, "instance {i}");

        for (t, cert) in cone.certificates.iter().enumerate() {
            let dot = |w: &[Q], g: &[Q]| -> Q { w.iter().zip(g).map(|(a, b)| a * b).sum() };
            match cert {
                Feasibility::Feasible(lambda) => {
                    assert!(lambda.iter().all(|l| !l.is_negative()));
                    for r in 0..gens[t].len() {
                        let s: Q = gens.iter().zip(lambda).map(|(g, l)| &g[r] * l).sum();
                        assert_eq!(s, -gens[t][r].clone());
                    }
                }
                Feasibility::Infeasible(w) => {
                    assert!(gens.iter().all(|g| !dot(w, g).is_negative()));
                    let neg: Vec<Q> = gens[t].iter().map(|v| -v.clone()).collect();
                    assert!(dot(w, &neg).is_negative());
                }
            }
        }

        // the basis spans exactly the member generators
        let basis = lineality(&cone);
        for (g, &member) in cone.generators.iter().zip(&oracle) {
            let off = basis
                .iter()
                .fold(g.clone(), |r, b| &r - b * b.dot(g))
                .norm();
            if member {
                assert!(off < 1e-9, "instance {i}: member generator leaves the span");
            }
        }
    }
}

#[test]
fn independent_feasible_points_are_blockwise_complementary() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let opts = ClassifyOptions::default();
    for _ in 0..20 {
        let p = homogeneous_orthant(&mut rng, 6, 10, "cross");
        let r = classify(&p, &opts).unwrap();
        let xs = [&r.solution.x, &r.aggregate.x];
        let ys = [&r.solution.y_blocks, &r.aggregate.y_blocks];
        for x in xs {
            let s = p.slacks(x).unwrap();
            for y in ys {
                for (sj, yj) in s.iter().zip(y.iter()) {
                    let term = sj.dot(yj);
                    assert!(
                        term.abs() <= 1e-6 * (1.0 + sj.norm() * yj.norm()),
                        "term {term}"
                    );
                }
            }
        }
    }
}
