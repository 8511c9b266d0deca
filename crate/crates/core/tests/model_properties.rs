use conpart_core::cones::margin;
use conpart_core::generate::{zero_gap_instance, Shape};
use conpart_core::model::{aggregate_witnesses, residuals};
use conpart_core::{solve, ConicProblem, PrimalDualPair, SolveOptions};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn with_objective(p: &ConicProblem, c: DVector<f64>) -> ConicProblem {
    ConicProblem::new(
        p.name.clone(),
        p.blocks.clone(),
        p.a_blocks.clone(),
        p.b_blocks.clone(),
        c,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gap_equals_sum_of_block_products(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = zero_gap_instance(&Shape::mixed(), &mut rng, "gap");
        let p = &inst.problem;
        // any y with Aᵀy = c, feasible or not
        let y: Vec<DVector<f64>> = p.blocks.iter().map(|k| DVector::from_fn(k.dim(), |_, _| rng.random_range(-2.0..2.0))).collect();
        let p = with_objective(p, p.adjoint(&y).unwrap());
        let x = DVector::from_fn(p.n(), |_, _| rng.random_range(-2.0..2.0));
        let pair = PrimalDualPair::new(x, y.clone());
        let s = pair.slacks(&p).unwrap();
        let direct: f64 = s.iter().zip(&y).map(|(s, y)| s.dot(y)).sum();
        let gap = residuals(&p, &pair).unwrap().duality_gap;
        prop_assert!((gap - direct).abs() <= 1e-10 * (1.0 + direct.abs()), "{gap} vs {direct}");
    }

    #[test]
    fn averaging_keeps_solutions_and_widens_supports(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = zero_gap_instance(&Shape::mixed(), &mut rng, "avg");
        let p = &inst.problem;
        let sol = solve(p, &SolveOptions::default()).unwrap();
        let xs = vec![inst.pair.x.clone(), sol.pair.x.clone()];
        let ys = vec![inst.pair.y_blocks.clone(), sol.pair.y_blocks.clone()];
        let avg = aggregate_witnesses(p, &xs, &ys, 1e-7).unwrap();
        prop_assert!(residuals(p, &avg).unwrap().is_solution(1e-7));

        let slack_sets: Vec<Vec<DVector<f64>>> = xs.iter().map(|x| p.slacks(x).unwrap()).collect();
        let s_avg = p.slacks(&avg.x).unwrap();
        for (j, k) in p.blocks.iter().enumerate() {
            let worst = slack_sets.iter().map(|s| margin(k, &s[j])).fold(f64::INFINITY, f64::min);
            prop_assert!(margin(k, &s_avg[j]) >= worst - 1e-7);
            let worst = ys.iter().map(|y| margin(k, &y[j])).fold(f64::INFINITY, f64::min);
            prop_assert!(margin(k, &avg.y_blocks[j]) >= worst - 1e-7);
        }
    }
}

#[test]
fn generated_pairs_have_zero_residuals() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for shape in [Shape::mixed(), Shape::lorentz(), Shape::lp()] {
        for _ in 0..50 {
            let inst = zero_gap_instance(&shape, &mut rng, "pair");
            let r = residuals(&inst.problem, &inst.pair).unwrap();
            assert!(r.is_solution(1e-10), "{:?}", r.failure(1e-10));
            assert!(r.duality_gap.abs() < 1e-9);
        }
    }
}

#[test]
fn aggregation_rejects_a_non_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut rejected = 0;
    for _ in 0..20 {
        let inst = zero_gap_instance(&Shape::lp(), &mut rng, "bad");
        let p = &inst.problem;
        let far = &inst.pair.x + DVector::from_element(p.n(), 5.0);
        let pair = PrimalDualPair::new(far.clone(), inst.pair.y_blocks.clone());
        if residuals(p, &pair).unwrap().is_solution(1e-7) {
            continue;
        }
        rejected += 1;
        assert!(aggregate_witnesses(
            p,
            &[inst.pair.x.clone(), far],
            &[inst.pair.y_blocks.clone()],
            1e-7
        )
        .is_err());
    }
    assert!(rejected > 0);
}
