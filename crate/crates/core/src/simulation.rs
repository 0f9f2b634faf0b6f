//! Type-I error and power studies.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contingency::FrequencyTable;
use crate::error::{Error, Result};
use crate::resampling::{
    generate_split_replicate, run_bootstrap, run_bootstrap_from_table, BootstrapOptions,
    LocationFamily, ShiftConstruction, ShiftVector, TestResult,
};
use crate::rng::{child_seed, substream, DATA_STREAM};
use crate::ustat::TiePolicy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Number of adjacent pairs; sizes have `k + 1` entries.
    pub k: usize,
    pub sizes_x: Vec<usize>,
    pub sizes_y: Vec<usize>,
    /// Ground-truth exceedance probabilities for group x (and y under H₀).
    pub true_p: Vec<f64>,
    /// Group y probabilities for power runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_p_y: Option<Vec<f64>>,
    pub n_rep: usize,
    pub n_boot: usize,
    pub alpha: f64,
    pub seed: u64,
    #[serde(default)]
    pub family: LocationFamily,
    #[serde(default)]
    pub shift_construction: ShiftConstruction,
    #[serde(default)]
    pub keep_pvalues: bool,
}

impl SimConfig {
    /// Equal sizes `n` on all `k + 1` levels of both groups.
    pub fn uniform(true_p: Vec<f64>, n: usize, n_rep: usize, n_boot: usize, seed: u64) -> Self {
        let k = true_p.len();
        SimConfig {
            k,
            sizes_x: vec![n; k + 1],
            sizes_y: vec![n; k + 1],
            true_p,
            true_p_y: None,
            n_rep,
            n_boot,
            alpha: 0.05,
            seed,
            family: LocationFamily::default(),
            shift_construction: ShiftConstruction::default(),
            keep_pvalues: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.sizes_x.len() != self.k + 1 || self.sizes_y.len() != self.k + 1 {
            return bad(format!("sizes need k + 1 = {} entries", self.k + 1));
        }
        if self.sizes_x.iter().chain(&self.sizes_y).any(|&n| n == 0) {
            return bad("sub-sample sizes must be at least 1".into());
        }
        let probs = self.true_p.iter().chain(self.true_p_y.iter().flatten());
        if self.true_p.len() != self.k || self.true_p_y.as_ref().is_some_and(|p| p.len() != self.k)
        {
            return bad(format!("probability vectors need k = {} entries", self.k));
        }
        if let Some(p) = probs.into_iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
            return bad(format!("probability {p} outside (0, 1)"));
        }
        if self.n_rep == 0 || self.n_boot == 0 {
            return bad("n_rep and n_boot must be positive".into());
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha {} outside (0, 1]", self.alpha));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    /// Empirical rejection rate: type-I error under H₀, power otherwise.
    pub err: f64,
    pub rejections: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep_pvalues: Option<Vec<f64>>,
    pub wall_time: f64,
    pub config: SimConfig,
}

impl SimReport {
    pub fn summary(&self) -> String {
        let what = if self.config.true_p_y.is_some() {
            "power"
        } else {
            "type-I error"
        };
        format!(
            "{what} {:.4} ({} / {} rejected at alpha {}, n_boot {}, {:.1}s)",
            self.err,
            self.rejections,
            self.config.n_rep,
            self.config.alpha,
            self.config.n_boot,
            self.wall_time
        )
    }
}

/// Bootstrap test of a fully specified frequency table, as in a power table
/// row: counts, totals and the sizes behind them.
pub fn run_fixed_table_test(
    table: &FrequencyTable,
    sizes_x: &[usize],
    sizes_y: &[usize],
    opts: &BootstrapOptions,
) -> Result<TestResult> {
    crate::resampling::bootstrap_from_table(table, sizes_x, sizes_y, opts)
}

/// Like [`run_fixed_table_test`] without the `n_boot ≥ 100`, `α < 1`
/// restrictions.
pub fn run_fixed_table_test_unchecked(
    table: &FrequencyTable,
    sizes_x: &[usize],
    sizes_y: &[usize],
    opts: &BootstrapOptions,
) -> Result<TestResult> {
    run_bootstrap_from_table(table, sizes_x, sizes_y, opts)
}

/// Rejection rate under H₀: both groups share the level means built from
/// `true_p`.
pub fn type1_error_sim(config: &SimConfig) -> Result<SimReport> {
    if config.true_p_y.is_some() {
        return Err(Error::InvalidConfig(
            "type-I error runs take a single probability vector".into(),
        ));
    }
    simulate(config, None)
}

/// Rejection rate with group x driven by `true_p` and group y by `true_p_y`.
pub fn power_sim(config: &SimConfig) -> Result<SimReport> {
    if config.true_p_y.is_none() {
        return Err(Error::InvalidConfig("power runs need true_p_y".into()));
    }
    simulate(config, None)
}

/// Runs the study; `progress` is called once per finished outer replication
/// with the number finished so far.
pub fn simulate(
    config: &SimConfig,
    progress: Option<&(dyn Fn(usize) + Sync)>,
) -> Result<SimReport> {
    config.validate()?;
    let start = Instant::now();
    let to_shift = |p: &[f64]| {
        let probs: Vec<Option<f64>> = p.iter().copied().map(Some).collect();
        ShiftVector::from_pair_probabilities(&probs, config.family, config.shift_construction)
    };
    let shifts_x = to_shift(&config.true_p);
    let shifts_y = to_shift(config.true_p_y.as_deref().unwrap_or(&config.true_p));
    let done = AtomicUsize::new(0);

    let outcomes: Vec<(bool, f64)> = (0..config.n_rep as u64)
        .into_par_iter()
        .map(|r| {
            let seed = child_seed(config.seed, r);
            let mut rng = substream(seed, DATA_STREAM);
            let ds = generate_split_replicate(
                &shifts_x,
                &shifts_y,
                &config.sizes_x,
                &config.sizes_y,
                config.family,
                &mut rng,
            )?;
            let opts = BootstrapOptions {
                alpha: config.alpha,
                n_boot: config.n_boot,
                seed,
                tie_policy: TiePolicy::default(),
                shift_construction: config.shift_construction,
                keep_sample: false,
            };
            let res = run_bootstrap(&ds, &opts)?;
            if let Some(cb) = progress {
                cb(done.fetch_add(1, Ordering::Relaxed) + 1);
            }
            Ok((res.reject, res.p_value))
        })
        .collect::<Result<_>>()?;

    let rejections = outcomes.iter().filter(|(r, _)| *r).count();
    Ok(SimReport {
        err: rejections as f64 / config.n_rep as f64,
        rejections,
        rep_pvalues: config
            .keep_pvalues
            .then(|| outcomes.iter().map(|&(_, p)| p).collect()),
        wall_time: start.elapsed().as_secs_f64(),
        config: config.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SimConfig {
        SimConfig::uniform(vec![0.4, 0.2, 0.3], 5, 40, 100, seed)
    }

    #[test]
    fn alpha_one_rejects_everything() {
        let mut cfg = small(1);
        cfg.alpha = 1.0;
        let r = type1_error_sim(&cfg).unwrap();
        assert_eq!(r.err, 1.0);
    }

    #[test]
    fn single_replication_is_binary() {
        let mut cfg = small(2);
        cfg.n_rep = 1;
        let r = type1_error_sim(&cfg).unwrap();
        assert!(r.err == 0.0 || r.err == 1.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let mut cfg = small(3);
        cfg.keep_pvalues = true;
        let a = type1_error_sim(&cfg).unwrap();
        let b = type1_error_sim(&cfg).unwrap();
        assert_eq!(a.rep_pvalues, b.rep_pvalues);
        assert_eq!(a.err, b.err);
    }

    #[test]
    fn config_validation() {
        let mut cfg = small(0);
        cfg.true_p[0] = 1.0;
        assert!(type1_error_sim(&cfg).is_err());
        let mut cfg = small(0);
        cfg.sizes_x.pop();
        assert!(cfg.validate().is_err());
        let mut cfg = small(0);
        cfg.sizes_y[2] = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small(0);
        cfg.alpha = 0.0;
        assert!(cfg.validate().is_err());
        assert!(power_sim(&small(0)).is_err());
        let mut cfg = small(0);
        cfg.true_p_y = Some(vec![0.5; 3]);
        assert!(type1_error_sim(&cfg).is_err());
    }

    #[test]
    fn progress_is_reported() {
        let seen = std::sync::atomic::AtomicUsize::new(0);
        let cb = |n: usize| {
            seen.fetch_max(n, std::sync::atomic::Ordering::Relaxed);
        };
        simulate(&small(4), Some(&cb)).unwrap();
        assert_eq!(seen.into_inner(), 40);
    }
}
