use proptest::prelude::*;

use remote_rd::io::{parse_problem_str, to_toml, ResultBundle, RunMetadata};
use remote_rd::oracles::reference;
use remote_rd::prob::{
    conditional, conditional_mutual_information, marginal, mutual_information, DistortionMatrix,
    JointPmf, StochasticMatrix,
};
use remote_rd::region::{corollary4_rates, subset_bounds, SweepPoint};
use remote_rd::solver::{
    expected_distortion, initial_state, lagrangian, rates, solve, update_encoder, update_marginal,
    RegionStatus, SolverConfig, SolverState,
};
use remote_rd::ProblemSpec;

fn normalize(raw: &[f64]) -> Vec<f64> {
    let z: f64 = raw.iter().sum();
    raw.iter().map(|v| v / z).collect()
}

fn joint_strategy() -> impl Strategy<Value = JointPmf> {
    prop::collection::vec(1usize..=3, 2..=4).prop_flat_map(|shape| {
        let n: usize = shape.iter().product();
        prop::collection::vec(0.001f64..1.0, n)
            .prop_map(move |raw| JointPmf::new(shape.clone(), normalize(&raw)).unwrap())
    })
}

fn channel(raw: &[f64], rows: usize, cols: usize) -> StochasticMatrix {
    let rows: Vec<Vec<f64>> = raw[..rows * cols].chunks(cols).map(normalize).collect();
    StochasticMatrix::from_rows(&rows).unwrap()
}

/// Random problem with `M` in {1, 2}, small alphabets, random distortion and
/// random encoders (with induced marginals and Bayes decoder).
fn problem_strategy() -> impl Strategy<Value = (ProblemSpec, SolverState)> {
    (
        1usize..=2,
        prop::collection::vec(2usize..=3, 2),
        2usize..=3,
        2usize..=3,
        prop::collection::vec(2usize..=3, 2),
        any::<bool>(),
    )
        .prop_flat_map(|(m, xs, ny, nt, ws, sparse)| {
            let xs = xs[..m].to_vec();
            let ws = ws[..m].to_vec();
            let n = nt * xs.iter().product::<usize>() * ny;
            (
                Just((xs, ny, nt, ws)),
                prop::collection::vec(if sparse { 0.0f64..1.0 } else { 0.01f64..1.0 }, n),
                prop::collection::vec(0.0f64..2.0, nt * nt),
                prop::collection::vec(0.01f64..1.0, 2 * 9),
            )
        })
        .prop_filter_map("empty joint", |((xs, ny, nt, ws), raw, dist, enc)| {
            if raw.iter().sum::<f64>() <= 0.0 {
                return None;
            }
            let mut shape = vec![nt];
            shape.extend(&xs);
            shape.push(ny);
            let joint = JointPmf::new(shape, normalize(&raw)).ok()?;
            let d = DistortionMatrix::new(nt, nt, dist).ok()?;
            let spec = ProblemSpec::new("random", joint, d, Some(ws.clone())).ok()?;
            let encoders = (0..xs.len())
                .map(|i| channel(&enc[i * 9..], xs[i], ws[i]))
                .collect();
            let state = initial_state(&spec, encoders);
            Some((spec, state))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn marginals_commute(p in joint_strategy()) {
        let r = p.rank();
        let outer: Vec<usize> = (0..r).filter(|a| a % 2 == 0 || *a == r - 1).collect();
        let inner = vec![*outer.last().unwrap()];
        let via = marginal(&marginal(&p, &outer).unwrap(), &[outer.len() - 1]).unwrap();
        let direct = marginal(&p, &inner).unwrap();
        for (a, b) in via.probs().iter().zip(direct.probs()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn conditional_reconstructs_joint(p in joint_strategy()) {
        let r = p.rank();
        let given: Vec<usize> = (0..r - 1).collect();
        let c = conditional(&p, &[r - 1], &given).unwrap();
        let pg = marginal(&p, &given).unwrap();
        let n = c.target_len();
        for (g, &mass) in pg.probs().iter().enumerate() {
            for t in 0..n {
                prop_assert!((mass * c.row(g)[t] - p.probs()[g * n + t]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mutual_information_is_symmetric(p in joint_strategy()) {
        let ab = marginal(&p, &[0, 1]).unwrap();
        let (na, nb) = (ab.shape()[0], ab.shape()[1]);
        let ba: Vec<f64> = (0..nb)
            .flat_map(|b| (0..na).map(move |a| (a, b)))
            .map(|(a, b)| ab.probs()[a * nb + b])
            .collect();
        let ba = JointPmf::new(vec![nb, na], ba).unwrap();
        let i_ab = mutual_information(&ab).unwrap();
        prop_assert!((i_ab - mutual_information(&ba).unwrap()).abs() < 1e-12);
        let cmi = conditional_mutual_information(&p, &[0], &[1], &[]).unwrap();
        prop_assert!((cmi - i_ab).abs() < 1e-12);
        prop_assert!(i_ab >= 0.0);
    }

    #[test]
    fn operations_match_reference((spec, state) in problem_strategy(), lambda in 0.0f64..5.0) {
        let l = reference::lagrangian(&spec, &state.encoders, &state.marginals, &state.decoder, lambda);
        prop_assert!((lagrangian(&spec, &state, lambda) - l).abs() < 1e-10);
        let d = reference::expected_distortion(&spec, &state.encoders, &state.decoder);
        prop_assert!((expected_distortion(&spec, &state) - d).abs() < 1e-12);
        prop_assert_eq!(&state.decoder, &reference::bayes_decoder(&spec, &state.encoders));
        for m in 0..spec.num_sources() {
            let q = update_marginal(&spec, &state, m).channel;
            prop_assert!(q.max_abs_diff(&reference::induced_marginal(&spec, &state.encoders, m)) < 1e-12);
        }
    }

    #[test]
    fn updates_descend((spec, state) in problem_strategy(), lambda in 0.0f64..10.0) {
        let mut s = state;
        let mut prev = lagrangian(&spec, &s, lambda);
        for _ in 0..3 {
            for m in 0..spec.num_sources() {
                s.marginals[m] = update_marginal(&spec, &s, m).channel;
                let l = lagrangian(&spec, &s, lambda);
                prop_assert!(l <= prev + 1e-10, "marginal step {} -> {}", prev, l);
                prev = l;
                s.encoders[m] = update_encoder(&spec, &s, m, lambda);
                let l = lagrangian(&spec, &s, lambda);
                prop_assert!(l <= prev + 1e-10, "encoder step {} -> {}", prev, l);
                prev = l;
            }
            s.decoder = remote_rd::solver::update_decoder(&spec, &s);
            let l = lagrangian(&spec, &s, lambda);
            prop_assert!(l <= prev + 1e-10, "decoder step {} -> {}", prev, l);
            prev = l;
        }
    }

    #[test]
    fn scaling_distortion_against_lambda((spec, state) in problem_strategy(), c in 0.1f64..10.0, lambda in 0.0f64..5.0) {
        let scaled = ProblemSpec::new(
            "scaled",
            spec.joint().clone(),
            spec.distortion().scaled(c).unwrap(),
            Some(spec.aux_sizes().to_vec()),
        ).unwrap();
        for m in 0..spec.num_sources() {
            let a = update_encoder(&spec, &state, m, lambda);
            let b = update_encoder(&scaled, &state, m, lambda / c);
            prop_assert!(a.max_abs_diff(&b) < 1e-9);
        }
    }

    #[test]
    fn rate_identity_and_bound_order((spec, state) in problem_strategy()) {
        let r = rates(&spec, &state);
        let c4 = corollary4_rates(&spec, &state).unwrap();
        for (a, b) in r.iter().zip(&c4) {
            prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
        }
        let report = subset_bounds(&spec, &state).unwrap();
        for e in &report.entries {
            prop_assert!(e.inner <= e.outer + 1e-9);
            prop_assert!(e.sum_rate >= e.inner - 1e-9);
        }
    }

    #[test]
    fn relabeling_first_source_is_invariant((spec, state) in problem_strategy(), lambda in 0.0f64..5.0) {
        // swap symbols 0 and 1 of x_1 and of w_1
        let shape = spec.joint().shape().to_vec();
        let m = spec.num_sources();
        let n = shape.iter().product::<usize>();
        let strides: Vec<usize> = (0..shape.len()).map(|a| shape[a + 1..].iter().product()).collect();
        let mut probs = vec![0.0; n];
        for (flat, slot) in probs.iter_mut().enumerate() {
            let x1 = flat / strides[1] % shape[1];
            let swapped = match x1 { 0 => 1, 1 => 0, v => v };
            *slot = spec.joint().probs()[flat - x1 * strides[1] + swapped * strides[1]];
        }
        let joint = JointPmf::new(shape, probs).unwrap();
        let relabeled = ProblemSpec::new("r", joint, spec.distortion().clone(), Some(spec.aux_sizes().to_vec())).unwrap();
        let q = &state.encoders[0];
        let swap = |v: usize| match v { 0 => 1, 1 => 0, v => v };
        let rows: Vec<Vec<f64>> = (0..q.rows())
            .map(|x| (0..q.cols()).map(|w| q.get(swap(x), swap(w))).collect())
            .collect();
        let mut encoders = state.encoders.clone();
        encoders[0] = StochasticMatrix::from_rows(&rows).unwrap();
        let moved = initial_state(&relabeled, encoders);
        prop_assert!((lagrangian(&spec, &state, lambda) - lagrangian(&relabeled, &moved, lambda)).abs() < 1e-12);
        prop_assert!((expected_distortion(&spec, &state) - expected_distortion(&relabeled, &moved)).abs() < 1e-12);
        for i in 0..m {
            prop_assert!((rates(&spec, &state)[i] - rates(&relabeled, &moved)[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn problem_file_round_trip((spec, _) in problem_strategy()) {
        let text = to_toml(&spec);
        let back = parse_problem_str(&text, "round-trip").unwrap().spec;
        prop_assert_eq!(back, spec);
    }

    #[test]
    fn bundle_round_trip(lambda in 0.0f64..1e3, rates in prop::collection::vec(0.0f64..2.0, 1..3), d in 0.0f64..1.0) {
        let point = SweepPoint {
            lambda,
            rates: rates.clone(),
            distortion: d,
            lagrangian: rates.iter().sum::<f64>() + lambda * d,
            converged: true,
            iterations: 10,
            restarts: 8,
            rate_weights: None,
            error: None,
        };
        let bundle = ResultBundle {
            metadata: RunMetadata {
                tool_version: "0".into(),
                command: "sweep".into(),
                problem: "p".into(),
                seed: 7,
                config: SolverConfig::default(),
                lambda_grid: vec![lambda],
                warm_start: true,
                region_status: RegionStatus::Exact,
                wall_time_secs: 0.25,
            },
            points: vec![point],
            bounds: vec![],
            states: None,
        };
        let back = ResultBundle::from_json(&bundle.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, bundle);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn relabeling_side_information_keeps_solution((spec, _) in problem_strategy(), lambda in 0.1f64..5.0) {
        let shape = spec.joint().shape().to_vec();
        let ny = *shape.last().unwrap();
        let mut probs = spec.joint().probs().to_vec();
        for chunk in probs.chunks_mut(ny) {
            chunk.reverse();
        }
        let joint = JointPmf::new(shape, probs).unwrap();
        let flipped = ProblemSpec::new("f", joint, spec.distortion().clone(), Some(spec.aux_sizes().to_vec())).unwrap();
        let cfg = SolverConfig { restarts: 2, ..SolverConfig::default().with_lambda(lambda) };
        let a = solve(&spec, &cfg).unwrap();
        let b = solve(&flipped, &cfg).unwrap();
        prop_assert!((a.lagrangian - b.lagrangian).abs() < 1e-8);
        prop_assert!((a.distortion - b.distortion).abs() < 1e-6);
        for (x, y) in a.rates.iter().zip(&b.rates) {
            prop_assert!((x - y).abs() < 1e-6);
        }
    }
}

#[test]
fn nan_points_survive_json() {
    let text = r#"{"lambda":1.0,"rates":[null],"distortion":null,"lagrangian":null,"converged":false,"iterations":0,"restarts":0,"error":"boom"}"#;
    let p: SweepPoint = serde_json::from_str(text).unwrap();
    assert!(p.rates[0].is_nan() && p.distortion.is_nan());
    assert_eq!(p.error.as_deref(), Some("boom"));
}
