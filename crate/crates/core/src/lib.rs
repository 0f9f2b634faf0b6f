//! Nonparametric two-sample comparison of sequential trends.
//!
//! Two groups are each observed at `K + 1` ordered levels (for example,
//! increasing stress). For every adjacent pair of levels the Mann-Whitney
//! count of increasing pairs summarises how the response moves; the test asks
//! whether both groups move the same way at every step. Counts from both
//! groups form a 2×2K frequency table, a chi-square type statistic measures
//! how far the rows disagree, and a parametric bootstrap under equal trends
//! supplies the critical value and p-value.
//!
//! ```
//! use subtrend::{bootstrap_test, BootstrapOptions, TrendDataset};
//!
//! let a = vec![vec![1.0, 2.0, 0.5], vec![3.0, 2.5, 4.0], vec![1.0, 0.0, 2.0]];
//! let b = vec![vec![0.8, 1.9, 1.1], vec![2.0, 3.1, 2.2], vec![1.5, 0.2, 0.9]];
//! let ds = TrendDataset::new(a, b).unwrap();
//! let result = bootstrap_test(&ds, &BootstrapOptions::new(0.05, 1000, 7)).unwrap();
//! assert!(result.p_value >= 0.0 && result.p_value <= 1.0);
//! ```

pub mod contingency;
pub mod data;
pub mod error;
pub mod exactdist;
pub mod normal;
pub mod resampling;
pub mod rng;
pub mod simulation;
pub mod ustat;

pub use contingency::{
    build_frequency_table, expected_table, m_statistic, ExpectedTable, FrequencyTable,
};
pub use data::{select_pairs, validate, PairSelection, RawRecord, TrendDataset};
pub use error::{Error, Result};
pub use exactdist::{exact_pmf, mc_count_pmf, permutation_pmf, ExactPmf};
pub use resampling::{
    bootstrap_test, generate_null_replicate, pool_estimates, shifts, BootstrapOptions,
    LocationFamily, PooledEstimates, ShiftConstruction, ShiftVector, TestResult,
};
pub use simulation::{power_sim, run_fixed_table_test, type1_error_sim, SimConfig, SimReport};
pub use ustat::{
    estimate_p, naive_paired_estimate, pairwise_count, PairCount, TieMode, TiePolicy, TieScope,
};
