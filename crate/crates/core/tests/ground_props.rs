use cylsim_core::ground::{ClusterSize, GroundProcess};
use cylsim_core::rng::stream;
use cylsim_core::stats;
use proptest::prelude::*;

fn shipped_models() -> Vec<(&'static str, GroundProcess)> {
    vec![
        ("poisson", GroundProcess::poisson(1.0).unwrap()),
        (
            "neyman_scott",
            GroundProcess::neyman_scott(1.0 / 3.0, ClusterSize::Poisson { mean: 3.0 }, 1.0).unwrap(),
        ),
        ("neyman_scott_fixed", GroundProcess::neyman_scott(0.5, ClusterSize::Fixed { n: 2 }, 0.5).unwrap()),
        ("gauss_poisson", GroundProcess::gauss_poisson(0.5, 0.25, 1.0).unwrap()),
        ("renewal_erlang", GroundProcess::renewal_erlang(2, 2.0).unwrap()),
    ]
}

#[test]
fn halves_have_equal_mean_counts() {
    let w = 10.0;
    let n = 10_000u64;
    for (name, gp) in shipped_models() {
        let diffs: Vec<f64> = (0..n)
            .map(|i| {
                let pts = gp.sample_on_interval(w, &mut stream(31, 0, i)).unwrap();
                let left = pts.iter().filter(|p| **p < 0.0).count() as f64;
                2.0 * left - pts.len() as f64
            })
            .collect();
        let m = stats::mean(&diffs);
        let se = stats::mean_stderr(&diffs);
        assert!(m.abs() < 4.0 * se, "{name}: {m} ± {se}");
    }
}

#[test]
fn gamma2_closed_forms_match_estimates() {
    for (name, gp) in shipped_models() {
        let w = 200.0 / gp.intensity();
        let est = gp.estimate_gamma2(w, 4000, 77).unwrap();
        let want = gp.gamma2_total();
        assert!(
            (est.estimate - want).abs() < 4.0 * est.stderr,
            "{name}: {} ± {} vs {want}",
            est.estimate,
            est.stderr
        );
        assert!(!est.underpowered);
    }
}

#[test]
fn poisson_gamma2_estimator_is_centred() {
    let gp = GroundProcess::poisson(1.0).unwrap();
    let est = gp.estimate_gamma2(500.0, 10_000, 5).unwrap();
    assert!(est.estimate.abs() < 4.0 * est.stderr, "{est:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn samples_are_simple_sorted_and_inside(
        which in 0usize..5,
        m in 0.01f64..30.0,
        seed in any::<u64>(),
    ) {
        let (_, gp) = shipped_models().swap_remove(which);
        let pts = gp.sample_on_interval(m, &mut stream(seed, 0, 0)).unwrap();
        prop_assert!(pts.iter().all(|p| p.abs() < m));
        prop_assert!(pts.windows(2).all(|w| w[1] - w[0] >= 1e-12));
    }

    #[test]
    fn sampling_is_deterministic(which in 0usize..5, seed in any::<u64>(), rep in any::<u64>()) {
        let (_, gp) = shipped_models().swap_remove(which);
        let a = gp.sample_on_interval(5.0, &mut stream(seed, 1, rep)).unwrap();
        let b = gp.sample_on_interval(5.0, &mut stream(seed, 1, rep)).unwrap();
        prop_assert_eq!(a, b);
    }
}
