use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::dc::{eval_phi, DcProblem, SolverParams, Termination, TrialStepRule};
use crate::linalg::{dist, norm, norm_sq};
use crate::problems::{generate_blobs, BlobSpec, Example2dProblem, MsscProblem};
use crate::spanning::{make_d1, make_d2, make_d3};

fn ex() -> Example2dProblem {
    Example2dProblem::default()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    dist(a, b) <= tol
}

// φ for example2d written out directly, independent of the g − h split.
fn phi_hand(x: f64, y: f64) -> f64 {
    x * x + y * y + x + y - x.abs() - y.abs()
}

#[test]
fn dca_step_from_zero_one() {
    let s = dca_step(&ex(), &[0.0, 1.0]).unwrap();
    assert_eq!(s.u, vec![1.0, 2.0]);
    assert_eq!(s.y[0], 0.0);
    assert!((s.y[1] - 1.0 / 3.0).abs() < 1e-16);
    assert!((s.d[1] + 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn dca_step_fixed_point() {
    let s = dca_step(&ex(), &[-1.0, -1.0]).unwrap();
    assert_eq!(s.u, vec![-2.0, -2.0]);
    assert_eq!(s.y, vec![-1.0, -1.0]);
    assert_eq!(s.d, vec![0.0, 0.0]);
}

#[test]
fn mssc_subproblem_matches_gradient_descent_oracle() {
    let data = generate_blobs(&BlobSpec::planar(3, 40), 11).unwrap();
    let problem = MsscProblem::new(data, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u: Vec<f64> = problem.random_start(&mut rng);
    let closed = problem.solve_subproblem(&u);
    // minimize g(x) − ⟨u, x⟩ by plain gradient descent; g has curvature 2 + ρ
    let step = 1.0 / (2.0 + problem.rho());
    let mut x = vec![0.0; problem.dim()];
    for _ in 0..200 {
        let grad = problem.grad_g(&x);
        for ((xi, gi), ui) in x.iter_mut().zip(&grad).zip(&u) {
            *xi -= 0.5 * step * (gi - ui);
        }
    }
    assert!(close(&closed, &x, 1e-6), "{closed:?} vs {x:?}");
}

#[test]
fn dca_step_rejects_broken_subproblem() {
    struct Broken;
    impl DcProblem for Broken {
        fn dim(&self) -> usize {
            1
        }
        fn rho(&self) -> f64 {
            1.0
        }
        fn eval_g(&self, x: &[f64]) -> f64 {
            x[0] * x[0]
        }
        fn eval_h(&self, x: &[f64]) -> f64 {
            0.5 * x[0] * x[0]
        }
        fn grad_g(&self, x: &[f64]) -> Vec<f64> {
            vec![2.0 * x[0]]
        }
        fn subgrad_h(&self, x: &[f64]) -> Vec<f64> {
            vec![x[0]]
        }
        fn solve_subproblem(&self, u: &[f64]) -> Vec<f64> {
            vec![u[0]]
        }
    }
    assert!(matches!(
        dca_step(&Broken, &[1.0]),
        Err(crate::DcError::SubproblemResidual { .. })
    ));
    assert!(run_dca(&Broken, &[1.0], &SolverParams::default()).is_err());
}

#[test]
fn armijo_zero_trial() {
    let lam = armijo_backtrack(
        &ex(),
        &[0.0, 1.0 / 3.0],
        &[0.0, -2.0 / 3.0],
        0.0,
        1e-4,
        0.25,
    )
    .unwrap();
    assert_eq!(lam, 0.0);
}

#[test]
fn armijo_matches_direct_scan() {
    let y = [0.0, 1.0 / 3.0];
    let d = [0.0, -2.0 / 3.0];
    let (alpha, beta) = (1e-4, 0.25);
    let accepted = armijo_backtrack(&ex(), &y, &d, 10.0, alpha, beta).unwrap();

    let ok = |lam: f64| {
        phi_hand(y[0] + lam * d[0], y[1] + lam * d[1])
            <= phi_hand(y[0], y[1]) - alpha * lam * lam * norm_sq(&d)
    };
    let mut scan = 10.0;
    while !ok(scan) {
        scan *= beta;
    }
    assert_eq!(accepted, scan);
    assert!(ok(accepted));
    if accepted != 10.0 {
        assert!(!ok(accepted / beta));
    }
    // frozen from the scan above: 10 overshoots into φ ≈ 27.4, 2.5 lands at φ = −8/9
    assert_eq!(accepted, 2.5);
}

#[test]
fn trial_step_rule() {
    let mut s = SelfAdaptiveState::default();
    assert_eq!(next_trial_step(&s, 2.0, 10.0), 0.0);
    s.record(0.0, 0.0);
    assert_eq!(next_trial_step(&s, 2.0, 10.0), 10.0);
    s.record(10.0, 10.0);
    // λ̄₀ = 0 does not count as an unrestricted positive trial
    assert_eq!(next_trial_step(&s, 2.0, 10.0), 10.0);
    s.record(20.0, 20.0);
    assert_eq!(next_trial_step(&s, 2.0, 10.0), 40.0);

    let backtracked = SelfAdaptiveState {
        lambda_prev: 0.625,
        trial_prev: 10.0,
        lambda_prev2: 10.0,
        trial_prev2: 10.0,
        k: 3,
    };
    assert_eq!(next_trial_step(&backtracked, 2.0, 10.0), 0.625);
}

#[test]
fn dfo_entry_growth() {
    let params = SolverParams::default();
    let mut state = DfoState { mu: 10.0 };
    let pss = make_d1(2).unwrap();
    let (_, event) = dfo_escape(&ex(), &[0.0, -1.0], &pss, &mut state, &params).unwrap();
    assert_eq!(event.mu_tried[0], 20.0001);
}

#[test]
fn dfo_escapes_from_critical_point() {
    let params = SolverParams::default();
    let pss = make_d1(2).unwrap();
    let y = [0.0, -1.0];
    // start small enough that the first probe is at radius ≤ 1
    let mut state = DfoState { mu: 0.25 };
    let (outcome, event) = dfo_escape(&ex(), &y, &pss, &mut state, &params).unwrap();
    match outcome {
        DfoOutcome::Escaped {
            point,
            phi,
            direction_index,
            mu,
        } => {
            assert_eq!(direction_index, 1);
            assert_eq!(mu, 0.5001);
            assert_eq!(point, vec![-0.5001, -1.0]);
            let expected = mu * mu - 2.0 * mu + phi_hand(0.0, -1.0);
            assert!((phi - expected).abs() < 1e-14);
        }
        DfoOutcome::Certified => panic!("should escape"),
    }
    assert_eq!(event.mu_accepted, Some(0.5001));
    assert_eq!(state.mu, 0.5001);
}

#[test]
fn dfo_certifies_global_minimum() {
    let params = SolverParams::default();
    let pss = make_d1(2).unwrap();
    let mut state = DfoState::new(&params);
    let (outcome, event) = dfo_escape(&ex(), &[-1.0, -1.0], &pss, &mut state, &params).unwrap();
    assert_eq!(outcome, DfoOutcome::Certified);
    assert!(state.mu <= params.eps2);
    assert!(event.mu_tried.len() > 1);
    for w in event.mu_tried.windows(2) {
        assert_eq!(w[1], params.beta2 * w[0]);
    }
}

#[test]
fn dca_from_zero_one_reaches_origin() {
    let r = run_dca(&ex(), &[0.0, 1.0], &SolverParams::default()).unwrap();
    assert_eq!(r.termination, Termination::CriticalPoint);
    assert!(close(&r.final_point, &[0.0, 0.0], 1e-4));
}

#[test]
fn dca_fixed_point_stops_immediately() {
    let r = run_dca(&ex(), &[-1.0, -1.0], &SolverParams::default()).unwrap();
    assert_eq!(r.iterations.len(), 1);
    assert_eq!(r.final_point, vec![-1.0, -1.0]);
}

#[test]
fn dca_positive_quadrant_contracts_to_origin() {
    let r = run_dca(&ex(), &[0.5, 0.5], &SolverParams::default()).unwrap();
    // the componentwise map x ↦ x/3 for x > 0
    let mut oracle = [0.5_f64, 0.5];
    for rec in &r.iterations {
        assert!(close(&rec.x_k, &oracle, 1e-15));
        oracle = [oracle[0] / 3.0, oracle[1] / 3.0];
    }
    assert!(norm(&r.final_point) <= 1e-8);
}

#[test]
fn each_critical_point_is_a_dca_fixed_point() {
    for (_, p) in Example2dProblem::critical_points() {
        let r = run_dca(&ex(), &p, &SolverParams::default()).unwrap();
        assert_eq!(r.iterations.len(), 1, "{p:?}");
        assert_eq!(r.final_point, p);
    }
}

#[test]
fn sign_convention_changes_dca_limit() {
    let problem = Example2dProblem::new(0.0);
    let r = run_dca(&problem, &[0.0, 1.0], &SolverParams::default()).unwrap();
    assert!(
        close(&r.final_point, &[-1.0, 0.0], 1e-4),
        "{:?}",
        r.final_point
    );
}

#[test]
fn bdca_plus_from_zero_one() {
    let pss = make_d1(2).unwrap();
    let r = run_bdca_plus(&ex(), &[0.0, 1.0], &pss, &SolverParams::default()).unwrap();
    assert_eq!(r.termination, Termination::DStationaryCertified);
    assert!(close(&r.final_point, &[-1.0, -1.0], 1e-4));
    assert!(r.dfo_invocations >= 1);
}

#[test]
fn bdca_with_zero_trials_is_dca() {
    let params = SolverParams {
        trial_rule: TrialStepRule::Fixed(0.0),
        ..SolverParams::default()
    };
    for x0 in [[0.0, 1.0], [0.3, -0.7], [1.2, 1.4], [-1.3, 0.2]] {
        let a = run_dca(&ex(), &x0, &params).unwrap();
        let b = run_bdca(&ex(), &x0, &params).unwrap();
        assert_eq!(a.final_point, b.final_point);
        assert_eq!(a.iterations.len(), b.iterations.len());
        for (ra, rb) in a.iterations.iter().zip(&b.iterations) {
            assert_eq!(ra.x_k, rb.x_k);
            assert_eq!(ra.y_k, rb.y_k);
        }
    }
}

#[test]
fn stationarity_at_critical_points() {
    let pss = make_d1(2).unwrap();
    let at_min = check_d_stationarity(&ex(), &[-1.0, -1.0], &pss, 1e-6, 1e-7).unwrap();
    assert!(at_min.is_d_stationary);
    assert!(at_min.exact);
    assert!(at_min.dir_derivs.iter().all(|&v| v == 0.0));

    let origin = check_d_stationarity(&ex(), &[0.0, 0.0], &pss, 1e-6, 1e-7).unwrap();
    assert!(!origin.is_d_stationary);
    assert_eq!(origin.dir_derivs[1], -2.0);
    assert_eq!(origin.min_deriv, -2.0);

    let side = check_d_stationarity(&ex(), &[0.0, -1.0], &pss, 1e-6, 1e-7).unwrap();
    assert!(!side.is_d_stationary);
    assert_eq!(side.dir_derivs[1], -2.0);

    let other = check_d_stationarity(&ex(), &[-1.0, 0.0], &pss, 1e-6, 1e-7).unwrap();
    assert!(!other.is_d_stationary);
}

#[test]
fn stationarity_finite_difference_fallback() {
    struct NoExact(Example2dProblem);
    impl DcProblem for NoExact {
        fn dim(&self) -> usize {
            2
        }
        fn rho(&self) -> f64 {
            1.0
        }
        fn eval_g(&self, x: &[f64]) -> f64 {
            self.0.eval_g(x)
        }
        fn eval_h(&self, x: &[f64]) -> f64 {
            self.0.eval_h(x)
        }
        fn grad_g(&self, x: &[f64]) -> Vec<f64> {
            self.0.grad_g(x)
        }
        fn subgrad_h(&self, x: &[f64]) -> Vec<f64> {
            self.0.subgrad_h(x)
        }
        fn solve_subproblem(&self, u: &[f64]) -> Vec<f64> {
            self.0.solve_subproblem(u)
        }
    }
    let p = NoExact(ex());
    let pss = make_d1(2).unwrap();
    let r = check_d_stationarity(&p, &[0.0, 0.0], &pss, 1e-6, 1e-7).unwrap();
    assert!(!r.exact);
    assert!((r.dir_derivs[1] + 2.0).abs() < 1e-6);
    let r = check_d_stationarity(&p, &[-1.0, -1.0], &pss, 1e-6, 1e-7).unwrap();
    assert!(r.is_d_stationary);
}

#[test]
fn mssc_paired_runs_never_lose() {
    let data = generate_blobs(&BlobSpec::planar(3, 60), 9).unwrap();
    let problem = MsscProblem::new(data, 3).unwrap();
    let pss = make_d1(problem.dim()).unwrap();
    let params = SolverParams::default();
    for seed in 0..4 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x0 = problem.random_start(&mut rng);
        let dca = run_dca(&problem, &x0, &params).unwrap();
        let plus = run_bdca_plus(&problem, &x0, &pss, &params).unwrap();
        assert!(plus.final_phi <= dca.final_phi + 1e-12);
        assert_ne!(plus.termination, Termination::CriticalPoint);
    }
}

#[test]
fn other_spanning_sets_also_certify() {
    for pss in [make_d2(2).unwrap(), make_d3(2).unwrap()] {
        let r = run_bdca_plus(&ex(), &[0.4, 0.9], &pss, &SolverParams::default()).unwrap();
        assert_eq!(r.termination, Termination::DStationaryCertified);
        let rep = check_d_stationarity(&ex(), &r.final_point, &pss, 1e-4, 1e-7).unwrap();
        assert!(rep.is_d_stationary);
    }
}

#[test]
fn max_iterations_is_reported() {
    let params = SolverParams {
        max_iter: 2,
        ..SolverParams::default()
    };
    let r = run_dca(&ex(), &[0.9, 0.9], &params).unwrap();
    assert_eq!(r.termination, Termination::MaxIterations);
    assert_eq!(r.iterations.len(), 2);
    assert_eq!(r.final_phi, eval_phi(&ex(), &r.final_point).unwrap());
}

fn assert_trace_invariants<P: DcProblem>(problem: &P, r: &crate::RunResult, params: &SolverParams) {
    let rho = problem.rho();
    for rec in &r.iterations {
        let d: Vec<f64> = rec.y_k.iter().zip(&rec.x_k).map(|(a, b)| a - b).collect();
        assert_eq!(d, rec.d_k);
        let slack = 1e-9 * (1.0 + rec.phi_x.abs());
        assert!(rec.phi_y <= rec.phi_x - rho * norm_sq(&rec.d_k) + slack);
        if rec.lambda_k > 0.0 {
            let moved = crate::linalg::axpy(&rec.y_k, rec.lambda_k, &rec.d_k);
            let lhs = eval_phi(problem, &moved).unwrap();
            assert!(lhs <= rec.phi_y - params.alpha * rec.lambda_k.powi(2) * norm_sq(&rec.d_k));
            assert!(rec.lambda_k <= rec.lambda_trial);
        }
    }
    // nonincreasing up to the rounding of g − h
    for w in r.phi_sequence().windows(2) {
        assert!(
            w[1] <= w[0] + 1e-9 * (1.0 + w[0].abs()),
            "{} > {}",
            w[1],
            w[0]
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn example2d_traces_obey_invariants(x in -1.5f64..1.5, y in -1.5f64..1.5) {
        let params = SolverParams::default();
        let p = ex();
        let pss = make_d1(2).unwrap();
        for r in [
            run_dca(&p, &[x, y], &params).unwrap(),
            run_bdca(&p, &[x, y], &params).unwrap(),
            run_bdca_plus(&p, &[x, y], &pss, &params).unwrap(),
        ] {
            assert_trace_invariants(&p, &r, &params);
        }
        let plus = run_bdca_plus(&p, &[x, y], &pss, &params).unwrap();
        prop_assert_eq!(plus.termination, Termination::DStationaryCertified);
        prop_assert!(close(&plus.final_point, &[-1.0, -1.0], 1e-4));
    }

    #[test]
    fn step_sum_bounded_by_objective_drop(x in -1.5f64..1.5, y in -1.5f64..1.5) {
        let p = ex();
        let params = SolverParams::default();
        for r in [run_dca(&p, &[x, y], &params).unwrap(), run_bdca(&p, &[x, y], &params).unwrap()] {
            let steps: f64 = r.iterations.iter().map(|rec| norm_sq(&rec.d_k)).sum();
            let drop = r.iterations[0].phi_x - r.final_phi;
            prop_assert!(steps <= drop / p.rho() + 1e-9);
        }
    }
}
