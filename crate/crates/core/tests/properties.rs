use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use subtrend::data::{read_dataset, write_dataset};
use subtrend::exactdist::total_variation;
use subtrend::rng::substream;
use subtrend::{
    bootstrap_test, build_frequency_table, exact_pmf, generate_null_replicate, mc_count_pmf,
    pairwise_count, permutation_pmf, power_sim, run_fixed_table_test, select_pairs, shifts,
    type1_error_sim, validate, BootstrapOptions, FrequencyTable, LocationFamily, PooledEstimates,
    ShiftConstruction, ShiftVector, SimConfig, TiePolicy, TrendDataset,
};

fn dataset_strategy() -> impl Strategy<Value = TrendDataset> {
    (2usize..6).prop_flat_map(|k| {
        let sub = proptest::collection::vec(
            prop_oneof![Just(0.0), (-50i32..50).prop_map(|v| f64::from(v) / 4.0)],
            0..6,
        );
        (
            proptest::collection::vec(sub.clone(), k),
            proptest::collection::vec(sub, k),
        )
            .prop_filter_map("both groups need data", |(a, b)| {
                let has_data = |g: &Vec<Vec<f64>>| g.iter().any(|s| !s.is_empty());
                (has_data(&a) && has_data(&b)).then(|| TrendDataset::new(a, b).unwrap())
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn validate_serialize_validate_is_idempotent(ds in dataset_strategy()) {
        let once = validate(&ds.to_records(), Some(ds.num_levels())).unwrap();
        let mut csv = Vec::new();
        write_dataset(&once, &mut csv).unwrap();
        let twice = read_dataset(csv.as_slice(), Some(ds.num_levels())).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(once.sizes_a(), ds.sizes_a());
        prop_assert_eq!(once.sizes_b(), ds.sizes_b());
    }

    #[test]
    fn positive_scaling_leaves_table_and_test_unchanged(
        ds in dataset_strategy(),
        scale in 0.01f64..100.0,
    ) {
        let scaled = TrendDataset::new(
            ds.group_a().iter().map(|s| s.iter().map(|v| v * scale).collect()).collect(),
            ds.group_b().iter().map(|s| s.iter().map(|v| v * scale).collect()).collect(),
        ).unwrap();
        let Ok(sel) = select_pairs(&ds) else { return Ok(()); };
        let table = |d: &TrendDataset| {
            build_frequency_table(d, &sel, TiePolicy::default(), &mut substream(0, 0)).unwrap()
        };
        prop_assert_eq!(table(&ds), table(&scaled));
        let opts = BootstrapOptions::new(0.05, 100, 7);
        prop_assert_eq!(bootstrap_test(&ds, &opts).unwrap(), bootstrap_test(&scaled, &opts).unwrap());
    }
}

#[test]
fn estimator_is_unbiased_for_continuous_samples() {
    let (n1, n2, p) = (5usize, 4usize, 0.7);
    let reps = 10_000u64;
    let h = ShiftVector::from_pair_probabilities(
        &[Some(p)],
        LocationFamily::Normal,
        ShiftConstruction::Cumulative,
    );
    let estimates: Vec<f64> = (0..reps)
        .map(|r| {
            let ds =
                generate_null_replicate(&h, &[n1, n2], &[1, 1], &mut substream(31, r)).unwrap();
            let c = pairwise_count(
                &ds.group_a()[0],
                &ds.group_a()[1],
                TiePolicy::default(),
                &mut substream(0, 0),
            )
            .unwrap();
            c.o / (n1 * n2) as f64
        })
        .collect();
    let mean = estimates.iter().sum::<f64>() / reps as f64;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    // band from the closed-form variance used by the unbiasedness claim
    let claimed = p * (1.0 - p) / (n1 * n2) as f64;
    let band = 3.0 * (claimed / reps as f64).sqrt();
    println!("mean {mean:.5}, observed variance {var:.5}, closed-form variance {claimed:.5}");
    assert!((mean - p).abs() <= band, "mean {mean} outside {p} ± {band}");
    // the U-statistic variance has extra covariance terms
    assert!(var > claimed);
}

#[test]
fn pooled_estimate_is_unbiased_under_null_before_clamping() {
    let sizes = [5usize, 5, 5];
    let probs = [0.4, 0.8];
    let h = ShiftVector::from_pair_probabilities(
        &probs.map(Some),
        LocationFamily::Normal,
        ShiftConstruction::Cumulative,
    );
    let reps = 10_000u64;
    let mut draws = [Vec::new(), Vec::new()];
    for r in 0..reps {
        let ds = generate_null_replicate(&h, &sizes, &sizes, &mut substream(32, r)).unwrap();
        let sel = select_pairs(&ds).unwrap();
        let t =
            build_frequency_table(&ds, &sel, TiePolicy::default(), &mut substream(0, 0)).unwrap();
        let pooled = subtrend::resampling::pool_estimates(&t);
        for (d, raw) in draws.iter_mut().zip(&pooled.raw) {
            d.push(*raw);
        }
    }
    for (d, p) in draws.iter().zip(probs) {
        let mean = d.iter().sum::<f64>() / reps as f64;
        let var = d.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        assert_abs_diff_eq!(mean, p, epsilon = 3.0 * (var / reps as f64).sqrt());
    }
}

#[test]
fn recurrence_at_half_is_symmetric() {
    for n in 1..=10 {
        let pmf = exact_pmf(n, n, 0.5).unwrap();
        let last = n * n;
        for k in 0..=last {
            assert_abs_diff_eq!(pmf.mass[k], pmf.mass[last - k], epsilon = 1e-14);
        }
        assert_abs_diff_eq!(pmf.mean(), last as f64 / 2.0, epsilon = 1e-10);
    }
}

#[test]
fn simulated_count_without_shift_matches_permutation_law() {
    let n_sims = 100_000;
    for (n1, n2) in [(3, 3), (4, 3), (2, 5)] {
        let perm = permutation_pmf(n1, n2).unwrap();
        let mc = mc_count_pmf(n1, n2, 0.0, n_sims, 17).unwrap();
        let mut stat = 0.0;
        let mut bins = 0;
        for (&c, &q) in mc.counts.iter().zip(&perm.mass) {
            let e = q * n_sims as f64;
            stat += (c as f64 - e).powi(2) / e;
            bins += 1;
        }
        let p_value = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat);
        assert!(
            p_value > 0.01,
            "({n1},{n2}): chi-square {stat:.2}, p {p_value:.4}"
        );
        assert!(total_variation(&mc.mass, &perm.mass) < 0.01);
    }
}

#[test]
fn type1_error_is_insensitive_to_location_family() {
    let err = |family| {
        let mut cfg = SimConfig::uniform(vec![0.4, 0.2, 0.3], 5, 1000, 1000, 2025);
        cfg.family = family;
        type1_error_sim(&cfg).unwrap().err
    };
    let normal = err(LocationFamily::Normal);
    let logistic = err(LocationFamily::Logistic);
    println!("normal {normal:.3}, logistic {logistic:.3}");
    assert_abs_diff_eq!(normal, logistic, epsilon = 0.02);
}

#[test]
fn quadrupled_table_has_smaller_p_on_average() {
    let small = FrequencyTable::new(
        vec![20.0, 10.0, 20.0],
        vec![15.0, 15.0, 20.0],
        vec![25; 3],
        vec![25; 3],
    )
    .unwrap();
    let large = FrequencyTable::new(
        small.o_x.iter().map(|o| o * 4.0).collect(),
        small.o_y.iter().map(|o| o * 4.0).collect(),
        vec![100; 3],
        vec![100; 3],
    )
    .unwrap();
    let mean_p = |t: &FrequencyTable, n: usize| {
        (0..20)
            .map(|seed| {
                run_fixed_table_test(
                    t,
                    &[n; 4],
                    &[n; 4],
                    &BootstrapOptions::new(0.05, 1000, seed),
                )
                .unwrap()
                .p_value
            })
            .sum::<f64>()
            / 20.0
    };
    let (p_small, p_large) = (mean_p(&small, 5), mean_p(&large, 10));
    assert!(p_large < p_small, "{p_large} vs {p_small}");
}

#[test]
fn extreme_separation_has_high_power() {
    let mut cfg = SimConfig::uniform(vec![0.9; 3], 10, 200, 500, 8);
    cfg.true_p_y = Some(vec![0.1; 3]);
    let r = power_sim(&cfg).unwrap();
    assert!(r.err > 0.9, "power {}", r.err);
}

#[test]
fn power_with_equal_trends_is_the_level() {
    let mut cfg = SimConfig::uniform(vec![0.4, 0.2, 0.3], 5, 1000, 1000, 9);
    cfg.true_p_y = Some(cfg.true_p.clone());
    let r = power_sim(&cfg).unwrap();
    assert_abs_diff_eq!(r.err, cfg.alpha, epsilon = 0.02);
}

#[test]
fn null_shift_matches_target_probability() {
    let pooled = PooledEstimates {
        pairs: vec![1, 2],
        raw: vec![0.3, 0.9],
        p_pooled: vec![0.3, 0.9],
        clamped: vec![false, false],
    };
    let h = shifts(&pooled, 3, ShiftConstruction::Cumulative);
    let draws = 50_000u64;
    let mut hits = [0u64; 2];
    for i in 0..draws {
        let ds =
            generate_null_replicate(&h, &[1, 1, 1], &[0, 0, 0], &mut substream(40, i)).unwrap();
        let g = ds.group_a();
        hits[0] += u64::from(g[0][0] < g[1][0]);
        hits[1] += u64::from(g[1][0] < g[2][0]);
    }
    for (hit, p) in hits.iter().zip([0.3, 0.9]) {
        let sigma = (p * (1.0 - p) / draws as f64).sqrt();
        assert_abs_diff_eq!(*hit as f64 / draws as f64, p, epsilon = 4.0 * sigma);
    }
}
