mod common;

use cgdare::linalg::{self, max_norm, min_sym_eigenvalue, RealMatrix};
use cgdare::reduction::{self, check_closed_loop_structure, StepKind};
use cgdare::{
    dare_fixed_point_oracle, solve_regular_dare, solve_stein, PopovTriple, SteinEquation,
};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

fn regular_triple(seed: u64) -> (PopovTriple, RealMatrix) {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=3);
    let t = random_triple(&mut rng, n, m, false, false);
    let x = dare_fixed_point_oracle(&t, &RealMatrix::zeros(n, n), 20_000, &tol())
        .unwrap_or_else(|| RealMatrix::zeros(n, n));
    (t, x)
}

fn any_triple(seed: u64) -> PopovTriple {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=3);
    let (rs, as_) = (rng.gen_bool(0.5), rng.gen_bool(0.5));
    random_triple(&mut rng, n, m, rs, as_)
}

fn golden() -> Vec<PopovTriple> {
    vec![
        example1(),
        example2(),
        counterexample(),
        scalar_triple(2.0, 1.0, 3.0, 1.0),
    ]
}

fn contains_spectrum(big: &RealMatrix, small: &RealMatrix, eps: f64) -> bool {
    let outer = linalg::eigenvalues(big);
    linalg::eigenvalues(small)
        .iter()
        .all(|(re, im)| outer.iter().any(|(r2, i2)| (re - r2).hypot(im - i2) <= eps))
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn cross_elimination_is_idempotent(seed in any::<u64>()) {
        let t0 = any_triple(seed).eliminate_cross(&tol());
        let t00 = t0.eliminate_cross(&tol());
        prop_assert!(max_diff(t0.a(), t00.a()) <= 1e-12);
        prop_assert!(max_diff(t0.q(), t00.q()) <= 1e-12);
        prop_assert!(max_norm(t00.s()) == 0.0);
    }

    #[test]
    fn cross_elimination_preserves_acceptance(seed in any::<u64>(), shift in -1e-2f64..1e-2) {
        let (t, x) = regular_triple(seed);
        let t0 = t.eliminate_cross(&tol());
        let n = t.n();
        for cand in [x.clone(), &x + RealMatrix::identity(n, n) * shift] {
            prop_assert_eq!(t.accepts(&cand, &tol()).unwrap(), t0.accepts(&cand, &tol()).unwrap());
        }
    }

    #[test]
    fn orthogonal_state_change_maps_solutions(seed in any::<u64>()) {
        let (t, x) = regular_triple(seed);
        let t0 = t.eliminate_cross(&tol());
        let mut r = rng(seed ^ 0xa5a5);
        let u = random_orthogonal(&mut r, t.n());
        let moved = t0.transform_state(&u, &tol()).unwrap();
        let xu = u.transpose() * &x * &u;
        let before = t0.gdare_residual(&x, &tol()).unwrap();
        let after = moved.gdare_residual(&xu, &tol()).unwrap();
        prop_assert!((before.norm - after.norm).abs() <= 1e-8 * (1.0 + max_norm(&x)));
        prop_assert_eq!(before.kernel_ok, after.kernel_ok);
    }

    #[test]
    fn stein_solution_matches_series(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = r.gen_range(1..=5);
        let rho = r.gen_range(0.0..0.9);
        let a = with_spectral_radius(random_matrix(&mut r, k, k), rho);
        let q = random_symmetric(&mut r, k);
        let rep = solve_stein(&SteinEquation::new(a.clone(), q.clone(), &tol()).unwrap(), &tol());
        prop_assert_eq!(rep.solutions.len(), 1);
        let mut series = RealMatrix::zeros(k, k);
        let mut term = q;
        for _ in 0..1500 {
            series += &term;
            term = a.transpose() * term * &a;
        }
        prop_assert!(max_diff(rep.solutions.families()[0].base(), &series) <= 1e-6);
    }

    #[test]
    fn dare_stabilizing_solution_matches_iteration(seed in any::<u64>()) {
        let (t, x) = regular_triple(seed);
        prop_assume!(t.accepts(&x, &tol()).unwrap());
        let rep = solve_regular_dare(&t, &tol()).unwrap();
        let idx = rep.stabilizing.expect("stabilizing solution");
        let found = rep.solutions.families()[idx].base();
        prop_assert!(max_diff(found, &x) <= 1e-6 * (1.0 + max_norm(&x)));
    }

    #[test]
    fn every_step_keeps_popov_matrix_psd(seed in any::<u64>()) {
        let t = any_triple(seed);
        let chain = reduction::reduce(&t, &tol()).unwrap();
        for step in &chain.steps {
            if let Some(out) = &step.output {
                let pi = out.popov_matrix();
                let floor = -1e-8 * (1.0 + max_norm(&pi));
                prop_assert!(min_sym_eigenvalue(&pi) >= floor, "{} step", step.kind.name());
            }
        }
    }

    #[test]
    fn kernel_a0_steps_shrink_closed_loop_spectrum(seed in any::<u64>()) {
        let t = any_triple(seed);
        let solved = reduction::solve(&t, &tol());
        prop_assume!(solved.is_ok());
        let solved = solved.unwrap();
        for x in solved.solutions.samples() {
            let mut current = x;
            for step in solved.chain.kernel_steps() {
                let delta = step.project_solution(&current).unwrap();
                if step.kind == StepKind::KernelA0 {
                    prop_assert!(check_closed_loop_structure(step, &current, &delta, &tol()).unwrap());
                    let a_x = step.input.closed_loop(&current, &tol()).unwrap();
                    let a_d = step.output.as_ref().unwrap().closed_loop(&delta, &tol()).unwrap();
                    prop_assert!(contains_spectrum(&a_x, &a_d, 1e-6 * (1.0 + max_norm(&a_x))));
                }
                current = delta;
            }
        }
    }
}

#[test]
fn rank_of_rx_is_constant_over_solutions() {
    for t in golden() {
        let solved = reduction::solve(&t, &tol()).unwrap();
        let ranks: Vec<usize> = solved
            .solutions
            .samples()
            .iter()
            .map(|x| linalg::rank(&t.derived(x, &tol()).unwrap().r_x, &tol()))
            .collect();
        assert!(ranks.windows(2).all(|w| w[0] == w[1]), "{ranks:?}");
    }
}

#[test]
fn kernel_of_rx_lies_in_kernel_of_r() {
    for t in golden() {
        let solved = reduction::solve(&t, &tol()).unwrap();
        for x in solved.solutions.samples() {
            let r_x = t.derived(&x, &tol()).unwrap().r_x;
            let basis = linalg::kernel_basis(&r_x, &tol());
            assert!(max_norm(&(t.r() * &basis)) <= 1e-8);
        }
    }
}

#[test]
fn golden_kernel_a0_steps_have_block_structure() {
    for t in golden() {
        let solved = reduction::solve(&t, &tol()).unwrap();
        for x in solved.solutions.samples() {
            let deltas = solved.chain.project_through(&x).unwrap();
            let mut current = x;
            for (step, delta) in solved.chain.kernel_steps().zip(deltas) {
                if step.kind == StepKind::KernelA0 {
                    assert!(check_closed_loop_structure(step, &current, &delta, &tol()).unwrap());
                } else {
                    assert!(check_closed_loop_structure(step, &current, &delta, &tol()).is_err());
                }
                current = delta;
            }
        }
    }
}
