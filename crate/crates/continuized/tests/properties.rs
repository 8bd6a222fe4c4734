//! Randomized checks of the algebraic and structural invariants: objective
//! envelopes, schedule identities, mixing-flow composition laws, step-engine
//! determinism, and trace CSV round-trips.

use continuized::diagnostics::lyapunov_value;
use continuized::harness::{read_trace_csv, run_experiment, Emit, ExperimentConfig, ProblemSpec};
use continuized::jumpflow::{mix_convex, mix_numeric, mix_strongly_convex, JumpClock, MixState};
use continuized::methods::{run, Method, MethodConfig};
use continuized::oracle::Objective;
use continuized::schedules::{continuized_schedule, discrete_params, nesterov_a, Regime};
use proptest::collection::vec;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Coefficients, center, and two evaluation points sharing one dimension.
fn quadratic_case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..7).prop_flat_map(|dim| {
        (
            vec(0.05..2.0f64, dim),
            vec(-2.0..2.0f64, dim),
            vec(-3.0..3.0f64, dim),
            vec(-3.0..3.0f64, dim),
        )
    })
}

fn curvature_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.2..50.0f64, 1e-3..1.0f64).prop_map(|(l, ratio)| (l * ratio, l))
}

/// A state pair (x, z) of matching dimension.
fn state_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..7).prop_flat_map(|dim| (vec(-8.0..8.0f64, dim), vec(-8.0..8.0f64, dim)))
}

fn method() -> impl Strategy<Value = Method> {
    prop_oneof![Just(Method::Gd), Just(Method::Nesterov), Just(Method::Continuized)]
}

fn run_config() -> impl Strategy<Value = MethodConfig> {
    (method(), any::<bool>(), 1e-3..0.3f64, 0u64..1_000, 5usize..200).prop_map(
        |(method, strongly, mu, seed, steps)| {
            let regime = if strongly { Regime::StronglyConvex } else { Regime::Convex };
            MethodConfig {
                method,
                regime,
                mu: if strongly { mu } else { 0.0 },
                l: 1.0,
                noise: None,
                seed,
                steps,
                start: None,
            }
        },
    )
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(ai, bi)| ai * bi).sum()
}

proptest! {
    #[test]
    fn quadratic_envelopes_hold_everywhere((coeffs, center, x, y) in quadratic_case()) {
        let obj = Objective::quadratic(coeffs, center).unwrap();
        let g = obj.grad(&x).unwrap();
        let d: Vec<f64> = y.iter().zip(&x).map(|(yi, xi)| yi - xi).collect();
        let linear = obj.value(&x) + dot(&g, &d);
        let d2 = dot(&d, &d);
        let fy = obj.value(&y);
        prop_assert!(fy <= linear + 0.5 * obj.l * d2 + 1e-9 * (1.0 + fy.abs()));
        prop_assert!(fy >= linear + 0.5 * obj.mu * d2 - 1e-9 * (1.0 + fy.abs()));
    }

    #[test]
    fn gradient_matches_central_differences((coeffs, center, x, _) in quadratic_case()) {
        let obj = Objective::quadratic(coeffs, center).unwrap();
        let g = obj.grad(&x).unwrap();
        let h = 1e-6;
        for i in 0..x.len() {
            let mut hi = x.clone();
            let mut lo = x.clone();
            hi[i] += h;
            lo[i] -= h;
            let fd = (obj.value(&hi) - obj.value(&lo)) / (2.0 * h);
            prop_assert!((g[i] - fd).abs() < 1e-6, "coordinate {i}: {} vs {}", g[i], fd);
        }
    }

    #[test]
    fn schedule_identities_hold_at_random_times(
        (mu, l) in curvature_pair(),
        t in 0.01..100.0f64,
        strongly in any::<bool>(),
    ) {
        let (regime, mu) = if strongly { (Regime::StronglyConvex, mu) } else { (Regime::Convex, 0.0) };
        let sched = continuized_schedule(regime, mu, l).unwrap();
        let (a, b) = (sched.a(t), sched.b(t));
        prop_assert!(close(sched.gamma_prime(t), (a / (2.0 * l * b)).sqrt(), 1e-10));
        prop_assert!(close(sched.eta(t), (2.0 * b / (l * a)).sqrt(), 1e-10));
        prop_assert!(close(sched.eta_prime(t), mu * (a / (2.0 * l * b)).sqrt(), 1e-10));
    }

    #[test]
    fn strongly_convex_schedule_is_time_invariant(
        (mu, l) in curvature_pair(),
        t1 in 0.01..100.0f64,
        t2 in 0.01..100.0f64,
    ) {
        let sched = continuized_schedule(Regime::StronglyConvex, mu, l).unwrap();
        prop_assert_eq!(sched.eta(t1), sched.eta(t2));
        prop_assert_eq!(sched.eta_prime(t1), sched.eta_prime(t2));
        prop_assert_eq!(sched.gamma(t1), sched.gamma(t2));
        prop_assert_eq!(sched.gamma_prime(t1), sched.gamma_prime(t2));
    }

    #[test]
    fn nesterov_sequence_dominates_quadratic_growth(k in 1usize..2000) {
        let a_k = nesterov_a(k);
        prop_assert!(nesterov_a(k + 1) > a_k);
        prop_assert!(a_k >= (k * k) as f64 / 4.0);
    }

    #[test]
    fn discrete_params_respect_their_ranges(
        (mu, l) in curvature_pair(),
        t_k in 0.0..30.0f64,
        dt in 1e-3..10.0f64,
        strongly in any::<bool>(),
    ) {
        let (regime, mu) = if strongly { (Regime::StronglyConvex, mu) } else { (Regime::Convex, 0.0) };
        let p = discrete_params(regime, mu, l, t_k, t_k + dt).unwrap();
        prop_assert!((0.0..=1.0).contains(&p.tau));
        prop_assert!((0.0..1.0).contains(&p.tau_prime));
        prop_assert!(p.gamma_step > 0.0);
        prop_assert!(p.gamma_prime_step >= 0.0);
        if strongly {
            prop_assert!(close(p.tau_prime * (1.0 - p.tau), p.tau, 1e-12));
        }
    }

    #[test]
    fn short_windows_mix_almost_nothing(
        (mu, l) in curvature_pair(),
        t_k in 0.0..30.0f64,
        dt in 1e-12..1e-6f64,
    ) {
        let q = (mu / l).sqrt();
        let t_next = t_k + dt;
        // the params only see the rounded difference of the two endpoints
        let dt_eff = t_next - t_k;
        prop_assume!(dt_eff > 0.0);
        let p = discrete_params(Regime::StronglyConvex, mu, l, t_k, t_next).unwrap();
        // a few ulps of slack: tanh and exp_m1 are faithfully, not
        // correctly, rounded and may land one ulp above the argument
        let cap = q * dt_eff * (1.0 + 4.0 * f64::EPSILON);
        prop_assert!(p.tau <= cap);
        prop_assert!(p.tau_prime <= cap);
    }

    #[test]
    fn convex_flow_composes_over_split_windows(
        (x, z) in state_pair(),
        t0 in 0.05..20.0f64,
        d1 in 0.01..10.0f64,
        d2 in 0.01..10.0f64,
    ) {
        let s = MixState { x, z };
        let (t1, t2) = (t0 + d1, t0 + d1 + d2);
        let stepped = mix_convex(&mix_convex(&s, t0, t1).unwrap(), t1, t2).unwrap();
        let direct = mix_convex(&s, t0, t2).unwrap();
        for i in 0..stepped.x.len() {
            prop_assert!(close(stepped.x[i], direct.x[i], 1e-12));
            prop_assert_eq!(stepped.z[i], direct.z[i]);
        }
    }

    #[test]
    fn strongly_convex_flow_composes_additively(
        (x, z) in state_pair(),
        (mu, l) in curvature_pair(),
        d1 in 0.01..5.0f64,
        d2 in 0.01..5.0f64,
    ) {
        let s = MixState { x, z };
        let stepped =
            mix_strongly_convex(&mix_strongly_convex(&s, mu, l, d1).unwrap(), mu, l, d2).unwrap();
        let direct = mix_strongly_convex(&s, mu, l, d1 + d2).unwrap();
        for i in 0..stepped.x.len() {
            prop_assert!(close(stepped.x[i], direct.x[i], 1e-12));
            prop_assert!(close(stepped.z[i], direct.z[i], 1e-12));
        }
    }

    #[test]
    fn mixing_outputs_interpolate_the_inputs(
        (x, z) in state_pair(),
        (mu, l) in curvature_pair(),
        dt in 0.01..10.0f64,
    ) {
        let s = MixState { x: x.clone(), z: z.clone() };
        let mixed = mix_strongly_convex(&s, mu, l, dt).unwrap();
        for i in 0..x.len() {
            let (lo, hi) = (x[i].min(z[i]), x[i].max(z[i]));
            prop_assert!(mixed.x[i] >= lo - 1e-12 && mixed.x[i] <= hi + 1e-12);
            prop_assert!(mixed.z[i] >= lo - 1e-12 && mixed.z[i] <= hi + 1e-12);
            let mid = 0.5 * (x[i] + z[i]);
            let toward_mid = (mixed.x[i] - mid).abs() <= (x[i] - mid).abs() + 1e-12;
            prop_assert!(toward_mid, "x moved away from the midpoint");
            prop_assert!(close(mixed.x[i] + mixed.z[i], x[i] + z[i], 1e-12));
        }
    }

    #[test]
    fn closed_forms_match_the_integrator(
        (x, z) in state_pair(),
        (mu, l) in curvature_pair(),
        t0 in 0.1..5.0f64,
        dt in 0.1..2.0f64,
    ) {
        let s = MixState { x, z };
        let convex = mix_convex(&s, t0, t0 + dt).unwrap();
        let convex_num =
            mix_numeric(&s, |t| 2.0 / t, |_| 0.0, t0, t0 + dt, 1e-3).unwrap();
        let q = (mu / l).sqrt();
        let strongly = mix_strongly_convex(&s, mu, l, dt).unwrap();
        let strongly_num = mix_numeric(&s, |_| q, |_| q, 0.0, dt, 1e-3).unwrap();
        for i in 0..s.x.len() {
            prop_assert!((convex.x[i] - convex_num.x[i]).abs() < 1e-8);
            prop_assert!((strongly.x[i] - strongly_num.x[i]).abs() < 1e-8);
            prop_assert!((strongly.z[i] - strongly_num.z[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn jump_clocks_replay_bitwise_per_seed(seed in 0u64..1_000_000) {
        let mut first = JumpClock::new(seed);
        let mut second = JumpClock::new(seed);
        let mut previous = 0.0;
        for _ in 0..50 {
            let t = first.next_jump();
            prop_assert_eq!(t.to_bits(), second.next_jump().to_bits());
            prop_assert!(t.is_finite() && t > previous);
            previous = t;
        }
        prop_assert_eq!(first.k, 50);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_configs_rest_at_the_minimizer(mut config in run_config()) {
        let obj = Objective::quad3(config.mu.max(1e-3), config.l).unwrap();
        config.mu = obj.mu.max(config.mu);
        config.steps = 1000;
        config.start = Some(obj.x_star.clone());
        for rec in run(&config, &obj).unwrap() {
            prop_assert!(rec.f_gap.abs() <= 1e-12);
        }
    }

    #[test]
    fn traces_are_pure_functions_of_config(config in run_config()) {
        let obj = Objective::quad3(config.mu.max(1e-3), config.l).unwrap();
        let first = run(&config, &obj).unwrap();
        let second = run(&config, &obj).unwrap();
        prop_assert_eq!(first.len(), config.steps + 1);
        prop_assert_eq!(first.len(), second.len());
        for (i, (a, b)) in first.iter().zip(&second).enumerate() {
            prop_assert_eq!(a.k, i);
            prop_assert_eq!(a.t.to_bits(), b.t.to_bits());
            prop_assert_eq!(a.f_gap.to_bits(), b.f_gap.to_bits());
            prop_assert!(a.f_gap >= -1e-12);
            if config.method == Method::Continuized {
                if i > 0 { prop_assert!(a.t > first[i - 1].t); }
            } else {
                prop_assert_eq!(a.t, i as f64);
            }
        }
    }

    #[test]
    fn potential_is_nonnegative(
        (x, z) in (vec(-6.0..6.0f64, 3), vec(-6.0..6.0f64, 3)),
        t in 0.0..50.0f64,
        strongly in any::<bool>(),
    ) {
        let obj = Objective::quad3(1e-2, 1.0).unwrap();
        let (regime, mu) = if strongly { (Regime::StronglyConvex, 1e-2) } else { (Regime::Convex, 0.0) };
        let sched = continuized_schedule(regime, mu, 1.0).unwrap();
        prop_assert!(sched.a(t) >= 0.0 && sched.b(t) >= 0.0);
        prop_assert!(lyapunov_value(t, &x, &z, &obj, &sched) >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trace_csvs_round_trip_exactly(mut config in run_config(), jobs in 1usize..3) {
        config.mu = config.mu.max(1e-3);
        config.steps = config.steps.min(120);
        let obj = Objective::quad3(config.mu, config.l).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let experiment = ExperimentConfig {
            problem: ProblemSpec::Quad3 { mu: config.mu, l: config.l },
            methods: vec![config.clone()],
            replicates: 2,
            out_dir: dir.path().to_path_buf(),
            emit: vec![Emit::Traces],
            jobs,
        };
        run_experiment(&experiment).unwrap();
        for r in 0..2u64 {
            let path = dir.path().join(config.method.to_string()).join(format!("r{r:03}.csv"));
            let rows = read_trace_csv(&path).unwrap();
            let mut reference = config.clone();
            reference.seed = config.seed + r;
            let records = run(&reference, &obj).unwrap();
            prop_assert_eq!(rows.len(), records.len());
            for (row, rec) in rows.iter().zip(&records) {
                prop_assert_eq!(row.replicate, r as usize);
                prop_assert_eq!(row.k, rec.k);
                prop_assert_eq!(row.t, rec.t);
                prop_assert_eq!(row.f_gap, rec.f_gap);
                prop_assert_eq!(row.lyap, rec.lyap);
            }
        }
    }
}
