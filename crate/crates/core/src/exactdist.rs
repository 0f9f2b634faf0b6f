//! Distribution of a single pairwise count `O` for sub-sample sizes
//! `(n1, n2)`.
//!
//! [`exact_pmf`] evaluates the largest-observation-deletion recurrence
//! bottom-up with binomial base cases whenever either size reaches one. It is
//! implemented exactly as stated; it does not agree with the uniform
//! interleaving distribution ([`permutation_pmf`]) in general, and the two
//! oracles exist so that the gap can be measured.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resampling::LocationFamily;
use crate::rng::substream;

/// Largest `n1 + n2` accepted by [`permutation_pmf`].
pub const PERMUTATION_CAP: usize = 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactPmf {
    pub n1: usize,
    pub n2: usize,
    /// Exceedance probability parameter; `None` for parameter-free pmfs.
    pub p: Option<f64>,
    /// `mass[k] = Pr(O = k)`, `k = 0..=n1·n2`.
    pub mass: Vec<f64>,
}

impl ExactPmf {
    pub fn mean(&self) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .map(|(k, m)| k as f64 * m)
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }
}

/// Half the L1 distance between two mass vectors; shorter vectors are
/// zero-padded.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..n).map(|i| (at(a, i) - at(b, i)).abs()).sum::<f64>()
}

fn binomial_pmf(t: usize, p: f64) -> Vec<f64> {
    // C(t, s) built multiplicatively; t stays small here
    let mut out = Vec::with_capacity(t + 1);
    let mut coef = 1.0f64;
    for s in 0..=t {
        if s > 0 {
            coef = coef * (t - s + 1) as f64 / s as f64;
        }
        out.push(coef * p.powi(s as i32) * (1.0 - p).powi((t - s) as i32));
    }
    out
}

/// `Pr_{n1,n2}(O = k)` from the recurrence
/// `Pr_{a,b}(k) = a/(a+b)·Pr_{a−1,b}(k) + b/(a+b)·Pr_{a,b−1}(k − a)`
/// with `Pr_{1,t}(s) = Pr_{t,1}(s) = C(t,s) pˢ (1−p)^{t−s}`.
pub fn exact_pmf(n1: usize, n2: usize, p: f64) -> Result<ExactPmf> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidSize { n1, n2 });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    // table[a][b] holds Pr_{a+1,b+1}
    let mut table: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); n2]; n1];
    for a in 1..=n1 {
        for b in 1..=n2 {
            let mass = if a == 1 || b == 1 {
                binomial_pmf(a.max(b), p)
            } else {
                let (wa, wb) = (a as f64 / (a + b) as f64, b as f64 / (a + b) as f64);
                let left = &table[a - 2][b - 1];
                let down = &table[a - 1][b - 2];
                (0..=a * b)
                    .map(|k| {
                        let first = left.get(k).copied().unwrap_or(0.0);
                        let second = k
                            .checked_sub(a)
                            .and_then(|j| down.get(j).copied())
                            .unwrap_or(0.0);
                        wa * first + wb * second
                    })
                    .collect()
            };
            table[a - 1][b - 1] = mass;
        }
    }
    let mass = std::mem::take(&mut table[n1 - 1][n2 - 1]);
    Ok(ExactPmf {
        n1,
        n2,
        p: Some(p),
        mass,
    })
}

/// Distribution of `O` when all `C(n1+n2, n1)` interleavings of the two
/// sub-samples are equally likely, by direct enumeration.
pub fn permutation_pmf(n1: usize, n2: usize) -> Result<ExactPmf> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidSize { n1, n2 });
    }
    let total = n1 + n2;
    if total > PERMUTATION_CAP {
        return Err(Error::SizeCapExceeded {
            total,
            cap: PERMUTATION_CAP,
        });
    }
    let mut counts = vec![0u64; n1 * n2 + 1];
    let mut orderings = 0u64;
    // bit i set: position i (ascending) holds a lower-sample value
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let mut o = 0;
        let mut lowers_seen = 0;
        for i in 0..total {
            if mask >> i & 1 == 1 {
                lowers_seen += 1;
            } else {
                o += lowers_seen;
            }
        }
        counts[o] += 1;
        orderings += 1;
    }
    Ok(ExactPmf {
        n1,
        n2,
        p: None,
        mass: counts
            .into_iter()
            .map(|c| c as f64 / orderings as f64)
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPmf {
    pub n1: usize,
    pub n2: usize,
    pub shift: f64,
    pub n_sims: usize,
    pub seed: u64,
    pub counts: Vec<u64>,
    pub mass: Vec<f64>,
}

/// Monte Carlo distribution of `O` for `X ~ N(0,1)^{n1}`, `Y ~ N(h,1)^{n2}`
/// with strict counting. Simulation `i` uses stream `i` of `seed`.
pub fn mc_count_pmf(
    n1: usize,
    n2: usize,
    shift: f64,
    n_sims: usize,
    seed: u64,
) -> Result<EmpiricalPmf> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidSize { n1, n2 });
    }
    if n_sims == 0 || !shift.is_finite() {
        return Err(Error::InvalidConfig(
            "need a finite shift and at least one simulation".into(),
        ));
    }
    let family = LocationFamily::Normal;
    let draws: Vec<usize> = (0..n_sims as u64)
        .into_par_iter()
        .map_init(
            || (Vec::with_capacity(n1), Vec::with_capacity(n2)),
            |(xs, ys), i| {
                let mut rng = substream(seed, i);
                xs.clear();
                ys.clear();
                xs.extend((0..n1).map(|_| family.sample(0.0, &mut rng)));
                ys.extend((0..n2).map(|_| family.sample(shift, &mut rng)));
                xs.iter()
                    .map(|x| ys.iter().filter(|&y| x < y).count())
                    .sum()
            },
        )
        .collect();
    let mut counts = vec![0u64; n1 * n2 + 1];
    for o in draws {
        counts[o] += 1;
    }
    let mass = counts.iter().map(|&c| c as f64 / n_sims as f64).collect();
    Ok(EmpiricalPmf {
        n1,
        n2,
        shift,
        n_sims,
        seed,
        counts,
        mass,
    })
}
