//! Mann-Whitney style counts between adjacent sub-samples.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a tied comparison is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieMode {
    /// Score 0.5, the mean of a fair coin.
    #[default]
    ExpectedHalf,
    /// Score a fair Bernoulli draw.
    RandomCoin,
}

/// Which ties the [`TieMode`] applies to. Ties outside the scope score 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieScope {
    ZeroZeroPairs,
    #[default]
    AllExactTies,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TiePolicy {
    pub mode: TieMode,
    pub applies_to: TieScope,
}

impl TiePolicy {
    pub const fn new(mode: TieMode, applies_to: TieScope) -> Self {
        TiePolicy { mode, applies_to }
    }

    #[inline]
    fn covers(&self, value: f64) -> bool {
        match self.applies_to {
            TieScope::AllExactTies => true,
            TieScope::ZeroZeroPairs => value == 0.0,
        }
    }
}

impl fmt::Display for TieMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieMode::ExpectedHalf => "expected_half",
            TieMode::RandomCoin => "random_coin",
        })
    }
}

impl FromStr for TieMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expected_half" => Ok(TieMode::ExpectedHalf),
            "random_coin" => Ok(TieMode::RandomCoin),
            other => Err(Error::InvalidConfig(format!("unknown tie mode `{other}`"))),
        }
    }
}

impl fmt::Display for TieScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieScope::ZeroZeroPairs => "zero_zero_pairs",
            TieScope::AllExactTies => "all_exact_ties",
        })
    }
}

impl FromStr for TieScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero_zero_pairs" => Ok(TieScope::ZeroZeroPairs),
            "all_exact_ties" => Ok(TieScope::AllExactTies),
            other => Err(Error::InvalidConfig(format!("unknown tie scope `{other}`"))),
        }
    }
}

/// Count `O` of increasing (lower, upper) pairs out of `total = |lower|·|upper|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCount {
    pub o: f64,
    pub total: u64,
    pub p_hat: f64,
}

impl PairCount {
    pub fn new(o: f64, total: u64) -> Result<Self> {
        if total == 0 {
            return Err(Error::EmptySubsample);
        }
        if !(0.0..=total as f64).contains(&o) {
            return Err(Error::InconsistentTable(format!(
                "count {o} outside [0, {total}]"
            )));
        }
        Ok(PairCount {
            o,
            total,
            p_hat: o / total as f64,
        })
    }
}

/// Scores every (lower, upper) pair: 1 when `lower < upper`, 0 when
/// `lower > upper`, and the policy's contribution on covered ties.
///
/// `rng` is only drawn from under [`TieMode::RandomCoin`], once per covered
/// tie in row-major (lower, upper) order.
pub fn pairwise_count<R: RngCore + ?Sized>(
    lower: &[f64],
    upper: &[f64],
    policy: TiePolicy,
    rng: &mut R,
) -> Result<PairCount> {
    if lower.is_empty() || upper.is_empty() {
        return Err(Error::EmptySubsample);
    }
    let mut wins: u64 = 0;
    let mut halves: u64 = 0;
    for &x in lower {
        for &y in upper {
            match x.partial_cmp(&y) {
                Some(Ordering::Less) => wins += 1,
                Some(Ordering::Equal) if policy.covers(x) => match policy.mode {
                    TieMode::ExpectedHalf => halves += 1,
                    TieMode::RandomCoin => {
                        if rng.random::<bool>() {
                            wins += 1;
                        }
                    }
                },
                _ => {}
            }
        }
    }
    let total = (lower.len() * upper.len()) as u64;
    PairCount::new(wins as f64 + 0.5 * halves as f64, total)
}

/// `o / total`.
pub fn estimate_p(count: &PairCount) -> f64 {
    count.o / count.total as f64
}

/// Position-wise estimator for equal-size sub-samples:
/// `(1/n) Σ 1(lower_j < upper_j)`.
pub fn naive_paired_estimate(lower: &[f64], upper: &[f64]) -> Result<f64> {
    if lower.len() != upper.len() {
        return Err(Error::UnequalSizes {
            lower: lower.len(),
            upper: upper.len(),
        });
    }
    if lower.is_empty() {
        return Err(Error::EmptySubsample);
    }
    let ups = lower.iter().zip(upper).filter(|(x, y)| x < y).count();
    Ok(ups as f64 / lower.len() as f64)
}
