//! Normal-shift null sampler and the bootstrap test built on it.
//!
//! Under equal trends each retained pair `l` has a common exceedance
//! probability, estimated by pooling both rows of the frequency table.
//! Synthetic sub-samples are drawn from unit-variance location families whose
//! means make every adjacent exceedance probability equal the pooled
//! estimate; the statistic is recomputed on each synthetic dataset to build
//! the reference distribution.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contingency::{build_frequency_table, m_statistic, FrequencyTable};
use crate::data::{select_pairs, select_pairs_by_size, PairSelection, TrendDataset};
use crate::error::{Error, Result};
use crate::normal;
use crate::rng::{open_uniform, substream, OBSERVED_STREAM};
use crate::ustat::{pairwise_count, TiePolicy};

/// Pooled per-pair exceedance probabilities, clamped away from 0 and 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledEstimates {
    pub pairs: Vec<usize>,
    /// Weighted average before clamping.
    pub raw: Vec<f64>,
    pub p_pooled: Vec<f64>,
    pub clamped: Vec<bool>,
}

/// `p̂_l = (T_x p̂_x + T_y p̂_y) / (T_x + T_y)`, clamped to
/// `[ε, 1 − ε]` with `ε = 1 / (2 (T_x + T_y))`.
pub fn pool_estimates(table: &FrequencyTable) -> PooledEstimates {
    let k = table.num_columns();
    let mut out = PooledEstimates {
        pairs: table.pairs.clone(),
        raw: Vec::with_capacity(k),
        p_pooled: Vec::with_capacity(k),
        clamped: Vec::with_capacity(k),
    };
    for l in 0..k {
        let both = (table.tot_x[l] + table.tot_y[l]) as f64;
        let raw = (table.o_x[l] + table.o_y[l]) / both;
        let eps = 1.0 / (2.0 * both);
        let p = raw.clamp(eps, 1.0 - eps);
        out.raw.push(raw);
        out.p_pooled.push(p);
        out.clamped.push(p != raw);
    }
    out
}

/// How level means are derived from per-pair probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftConstruction {
    /// `h_{i+1} = h_i + δ(p̂_i)`: every adjacent pair hits its probability.
    #[default]
    Cumulative,
    /// `h_{i+1} = δ(p̂_i)`: each mean is set from the preceding pair alone,
    /// so only pairs starting at a zero-mean level hit their probability.
    PerLevel,
}

impl fmt::Display for ShiftConstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShiftConstruction::Cumulative => "cumulative",
            ShiftConstruction::PerLevel => "per_level",
        })
    }
}

impl FromStr for ShiftConstruction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cumulative" => Ok(ShiftConstruction::Cumulative),
            "per_level" | "per-level" => Ok(ShiftConstruction::PerLevel),
            other => Err(Error::InvalidConfig(format!(
                "unknown shift construction `{other}`"
            ))),
        }
    }
}

/// Unit-scale location family used to draw synthetic sub-samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocationFamily {
    #[default]
    Normal,
    Logistic,
}

impl LocationFamily {
    /// Location difference `δ` with `Pr(X < X' + δ) = p` for i.i.d. `X, X'`.
    pub fn shift_for(self, p: f64) -> f64 {
        match self {
            LocationFamily::Normal => SQRT_2 * normal::quantile(p),
            LocationFamily::Logistic => logistic_difference_quantile(p),
        }
    }

    #[inline]
    pub fn sample<R: RngCore + ?Sized>(self, location: f64, rng: &mut R) -> f64 {
        let u = open_uniform(rng);
        match self {
            LocationFamily::Normal => location + normal::quantile(u),
            LocationFamily::Logistic => location + (u / (1.0 - u)).ln(),
        }
    }
}

impl fmt::Display for LocationFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LocationFamily::Normal => "normal",
            LocationFamily::Logistic => "logistic",
        })
    }
}

impl FromStr for LocationFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(LocationFamily::Normal),
            "logistic" => Ok(LocationFamily::Logistic),
            other => Err(Error::InvalidConfig(format!("unknown family `{other}`"))),
        }
    }
}

/// CDF of the difference of two i.i.d. standard logistic variates.
pub fn logistic_difference_cdf(d: f64) -> f64 {
    if d == 0.0 {
        return 0.5;
    }
    if d > 0.0 {
        return 1.0 - logistic_difference_cdf(-d);
    }
    let em1 = d.exp_m1();
    em1.mul_add(excess_exp(d), excess_exp(d)) / (em1 * em1)
}

/// `eᵈ − 1 − d` without cancellation near zero.
fn excess_exp(d: f64) -> f64 {
    if d.abs() >= 0.5 {
        return d.exp_m1() - d;
    }
    let (mut term, mut sum) = (d * d / 2.0, 0.0_f64);
    let mut k = 2.0;
    while term.abs() > f64::EPSILON * sum.abs() * 0.25 || sum == 0.0 {
        sum += term;
        k += 1.0;
        term *= d / k;
    }
    sum
}

fn logistic_difference_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (-1.0, 1.0);
    while logistic_difference_cdf(lo) > p {
        lo *= 2.0;
    }
    while logistic_difference_cdf(hi) < p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if logistic_difference_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Means of the `K + 1` synthetic levels; `means[0] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftVector {
    pub means: Vec<f64>,
}

impl ShiftVector {
    /// Builds level means from optional per-pair probabilities (`None` for
    /// dropped pairs, which add no shift).
    pub fn from_pair_probabilities(
        probs: &[Option<f64>],
        family: LocationFamily,
        construction: ShiftConstruction,
    ) -> Self {
        let mut means = Vec::with_capacity(probs.len() + 1);
        means.push(0.0);
        for p in probs {
            let step = p.map_or(0.0, |p| family.shift_for(p));
            let prev = *means.last().unwrap();
            means.push(match construction {
                ShiftConstruction::Cumulative => prev + step,
                ShiftConstruction::PerLevel => step,
            });
        }
        ShiftVector { means }
    }
}

/// Normal-family level means for `num_levels` levels from pooled estimates.
pub fn shifts(
    pooled: &PooledEstimates,
    num_levels: usize,
    construction: ShiftConstruction,
) -> ShiftVector {
    let mut probs = vec![None; num_levels.saturating_sub(1)];
    for (&l, &p) in pooled.pairs.iter().zip(&pooled.p_pooled) {
        probs[l - 1] = Some(p);
    }
    ShiftVector::from_pair_probabilities(&probs, LocationFamily::Normal, construction)
}

fn fill_group<R: RngCore + ?Sized>(
    means: &[f64],
    sizes: &[usize],
    family: LocationFamily,
    rng: &mut R,
    out: &mut Vec<Vec<f64>>,
) {
    out.resize_with(sizes.len(), Vec::new);
    for ((sub, &n), &mu) in out.iter_mut().zip(sizes).zip(means) {
        sub.clear();
        sub.extend((0..n).map(|_| family.sample(mu, rng)));
    }
}

/// Draws one synthetic dataset: sub-sample `i` of both groups from the
/// family centred at `means[i]`. Group A is drawn first, levels ascending.
pub fn generate_replicate<R: RngCore + ?Sized>(
    shifts: &ShiftVector,
    sizes_x: &[usize],
    sizes_y: &[usize],
    family: LocationFamily,
    rng: &mut R,
) -> Result<TrendDataset> {
    generate_split_replicate(shifts, shifts, sizes_x, sizes_y, family, rng)
}

/// As [`generate_replicate`] with separate level means per group.
pub fn generate_split_replicate<R: RngCore + ?Sized>(
    shifts_x: &ShiftVector,
    shifts_y: &ShiftVector,
    sizes_x: &[usize],
    sizes_y: &[usize],
    family: LocationFamily,
    rng: &mut R,
) -> Result<TrendDataset> {
    if sizes_x.len() != shifts_x.means.len() || sizes_y.len() != shifts_y.means.len() {
        return Err(Error::InvalidConfig(format!(
            "{} / {} level means for {} / {} level sizes",
            shifts_x.means.len(),
            shifts_y.means.len(),
            sizes_x.len(),
            sizes_y.len()
        )));
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    fill_group(&shifts_x.means, sizes_x, family, rng, &mut a);
    fill_group(&shifts_y.means, sizes_y, family, rng, &mut b);
    TrendDataset::new(a, b)
}

/// Normal-family [`generate_replicate`].
pub fn generate_null_replicate<R: RngCore + ?Sized>(
    shifts: &ShiftVector,
    sizes_x: &[usize],
    sizes_y: &[usize],
    rng: &mut R,
) -> Result<TrendDataset> {
    generate_replicate(shifts, sizes_x, sizes_y, LocationFamily::Normal, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub alpha: f64,
    pub n_boot: usize,
    pub seed: u64,
    pub tie_policy: TiePolicy,
    pub shift_construction: ShiftConstruction,
    /// Keep every replicate statistic in the result.
    pub keep_sample: bool,
}

impl BootstrapOptions {
    pub fn new(alpha: f64, n_boot: usize, seed: u64) -> Self {
        BootstrapOptions {
            alpha,
            n_boot,
            seed,
            tie_policy: TiePolicy::default(),
            shift_construction: ShiftConstruction::default(),
            keep_sample: false,
        }
    }

    fn check_public(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.n_boot < 100 {
            return Err(Error::InvalidConfig(format!(
                "n_boot must be at least 100, got {}",
                self.n_boot
            )));
        }
        Ok(())
    }

    fn check_engine(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.n_boot == 0 {
            return Err(Error::InvalidConfig("n_boot must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub m_observed: f64,
    /// `None` when `alpha = 1` (the rank is zero and everything rejects).
    pub critical_value: Option<f64>,
    pub p_value: f64,
    pub reject: bool,
    pub n_boot: usize,
    pub alpha: f64,
    pub seed: u64,
    pub tie_policy: TiePolicy,
    pub shift_construction: ShiftConstruction,
    pub table: FrequencyTable,
    pub p_hat_x: Vec<f64>,
    pub p_hat_y: Vec<f64>,
    pub p_pooled: PooledEstimates,
    pub shifts: ShiftVector,
    pub dropped_pairs: Vec<usize>,
    /// Dropped pairs where only one group lacked data.
    pub one_sided_drops: Vec<usize>,
    pub bootstrap_sample: Option<Vec<f64>>,
}

/// 1-based rank `⌈(1 − α) N⌉` of the critical order statistic, 0 when α = 1.
pub fn critical_rank(alpha: f64, n: usize) -> usize {
    // absorb representation error such as (1 - 0.95) * 1000 = 950.0000000000001
    let raw = (1.0 - alpha) * n as f64;
    ((raw - 1e-9 * raw.max(1.0)).ceil().max(0.0) as usize).min(n)
}

/// Runs the bootstrap test on raw data.
pub fn bootstrap_test(dataset: &TrendDataset, opts: &BootstrapOptions) -> Result<TestResult> {
    opts.check_public()?;
    run_bootstrap(dataset, opts)
}

pub(crate) fn run_bootstrap(dataset: &TrendDataset, opts: &BootstrapOptions) -> Result<TestResult> {
    opts.check_engine()?;
    let selection = select_pairs(dataset)?;
    let mut rng = substream(opts.seed, OBSERVED_STREAM);
    let table = build_frequency_table(dataset, &selection, opts.tie_policy, &mut rng)?;
    let design = NullDesign {
        sizes_x: dataset.sizes_a(),
        sizes_y: dataset.sizes_b(),
        selection,
    };
    bootstrap_from_parts(table, &design, opts)
}

/// Runs the bootstrap test from a fully specified frequency table and the
/// sub-sample sizes that produced it.
pub fn bootstrap_from_table(
    table: &FrequencyTable,
    sizes_x: &[usize],
    sizes_y: &[usize],
    opts: &BootstrapOptions,
) -> Result<TestResult> {
    opts.check_public()?;
    run_bootstrap_from_table(table, sizes_x, sizes_y, opts)
}

pub(crate) fn run_bootstrap_from_table(
    table: &FrequencyTable,
    sizes_x: &[usize],
    sizes_y: &[usize],
    opts: &BootstrapOptions,
) -> Result<TestResult> {
    opts.check_engine()?;
    let design = NullDesign::for_table(table, sizes_x, sizes_y)?;
    bootstrap_from_parts(table.clone(), &design, opts)
}

struct NullDesign {
    sizes_x: Vec<usize>,
    sizes_y: Vec<usize>,
    selection: PairSelection,
}

impl NullDesign {
    fn for_table(table: &FrequencyTable, sizes_x: &[usize], sizes_y: &[usize]) -> Result<Self> {
        let selection = select_pairs_by_size(sizes_x, sizes_y)?;
        if selection.included != table.pairs {
            return Err(Error::InconsistentTable(format!(
                "table columns {:?} do not match comparable pairs {:?}",
                table.pairs, selection.included
            )));
        }
        for (i, &l) in table.pairs.iter().enumerate() {
            let tx = (sizes_x[l - 1] * sizes_x[l]) as u64;
            let ty = (sizes_y[l - 1] * sizes_y[l]) as u64;
            if table.tot_x[i] != tx || table.tot_y[i] != ty {
                return Err(Error::InconsistentTable(format!(
                    "pair {l}: totals ({}, {}) but sizes imply ({tx}, {ty})",
                    table.tot_x[i], table.tot_y[i]
                )));
            }
        }
        Ok(NullDesign {
            sizes_x: sizes_x.to_vec(),
            sizes_y: sizes_y.to_vec(),
            selection,
        })
    }
}

#[derive(Default)]
struct ReplicateBuffers {
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    o_x: Vec<f64>,
    o_y: Vec<f64>,
}

// Same draw order and counting as generate_null_replicate followed by
// build_frequency_table, without the intermediate allocations.
fn replicate_statistic(
    shifts: &ShiftVector,
    design: &NullDesign,
    observed: &FrequencyTable,
    policy: TiePolicy,
    seed: u64,
    index: u64,
    buf: &mut ReplicateBuffers,
) -> Result<f64> {
    let mut rng = substream(seed, index);
    let family = LocationFamily::Normal;
    fill_group(&shifts.means, &design.sizes_x, family, &mut rng, &mut buf.x);
    fill_group(&shifts.means, &design.sizes_y, family, &mut rng, &mut buf.y);
    buf.o_x.clear();
    buf.o_y.clear();
    for &l in &design.selection.included {
        buf.o_x
            .push(pairwise_count(&buf.x[l - 1], &buf.x[l], policy, &mut rng)?.o);
    }
    for &l in &design.selection.included {
        buf.o_y
            .push(pairwise_count(&buf.y[l - 1], &buf.y[l], policy, &mut rng)?.o);
    }
    let table = FrequencyTable {
        pairs: observed.pairs.clone(),
        o_x: std::mem::take(&mut buf.o_x),
        o_y: std::mem::take(&mut buf.o_y),
        tot_x: observed.tot_x.clone(),
        tot_y: observed.tot_y.clone(),
    };
    let m = m_statistic(&table);
    buf.o_x = table.o_x;
    buf.o_y = table.o_y;
    Ok(m)
}

fn bootstrap_from_parts(
    table: FrequencyTable,
    design: &NullDesign,
    opts: &BootstrapOptions,
) -> Result<TestResult> {
    let m_observed = m_statistic(&table);
    let pooled = pool_estimates(&table);
    let shift_vec = shifts(&pooled, design.sizes_x.len(), opts.shift_construction);

    let sample: Vec<f64> = (0..opts.n_boot as u64)
        .into_par_iter()
        .map_init(ReplicateBuffers::default, |buf, t| {
            replicate_statistic(
                &shift_vec,
                design,
                &table,
                opts.tie_policy,
                opts.seed,
                t,
                buf,
            )
        })
        .collect::<Result<_>>()?;

    let exceed = sample.iter().filter(|&&m| m >= m_observed).count();
    let p_value = exceed as f64 / opts.n_boot as f64;

    let rank = critical_rank(opts.alpha, opts.n_boot);
    let critical_value = if rank == 0 {
        None
    } else {
        let mut sorted = sample.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        Some(sorted[rank - 1])
    };
    let reject = critical_value.is_none_or(|c| m_observed > c);

    Ok(TestResult {
        m_observed,
        critical_value,
        p_value,
        reject,
        n_boot: opts.n_boot,
        alpha: opts.alpha,
        seed: opts.seed,
        tie_policy: opts.tie_policy,
        shift_construction: opts.shift_construction,
        p_hat_x: table.p_hat_x(),
        p_hat_y: table.p_hat_y(),
        table,
        p_pooled: pooled,
        shifts: shift_vec,
        dropped_pairs: design.selection.dropped.clone(),
        one_sided_drops: design.selection.one_sided.clone(),
        bootstrap_sample: opts.keep_sample.then_some(sample),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contingency::build_frequency_table;

    fn row1() -> FrequencyTable {
        FrequencyTable::new(
            vec![20.0, 10.0, 20.0],
            vec![15.0, 15.0, 20.0],
            vec![25; 3],
            vec![25; 3],
        )
        .unwrap()
    }

    #[test]
    fn pooled_power_example() {
        let p = pool_estimates(&row1());
        let expected = [0.7, 0.5, 0.8];
        for (got, want) in p.p_pooled.iter().zip(expected) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!(p.clamped.iter().all(|c| !c));
    }

    #[test]
    fn pooled_equal_rows() {
        let t = FrequencyTable::new(vec![3.0], vec![6.0], vec![10], vec![20]).unwrap();
        assert!((pool_estimates(&t).p_pooled[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn pooled_clamps_boundary() {
        let t = FrequencyTable::new(vec![25.0], vec![9.0], vec![25], vec![9]).unwrap();
        let p = pool_estimates(&t);
        assert_eq!(p.raw[0], 1.0);
        assert_eq!(p.p_pooled[0], 1.0 - 1.0 / 68.0);
        assert!(p.clamped[0]);
    }

    fn pooled(ps: &[f64]) -> PooledEstimates {
        PooledEstimates {
            pairs: (1..=ps.len()).collect(),
            raw: ps.to_vec(),
            p_pooled: ps.to_vec(),
            clamped: vec![false; ps.len()],
        }
    }

    // √2·Φ⁻¹(0.7) and √2·Φ⁻¹(0.8) at mpmath precision.
    const H07: f64 = 0.741_614_317_187_115_7;
    const H08: f64 = 1.190_232_162_899_99;

    #[test]
    fn per_level_shifts() {
        let s = shifts(&pooled(&[0.5]), 2, ShiftConstruction::PerLevel);
        assert_eq!(s.means, vec![0.0, 0.0]);
        let s = shifts(&pooled(&[0.7]), 2, ShiftConstruction::PerLevel);
        assert!((s.means[1] - H07).abs() < 1e-9);
        let s = shifts(&pooled(&[0.7, 0.5, 0.8]), 4, ShiftConstruction::PerLevel);
        let want = [0.0, H07, 0.0, H08];
        for (g, w) in s.means.iter().zip(want) {
            assert!((g - w).abs() < 1e-9, "{:?}", s.means);
        }
    }

    #[test]
    fn cumulative_shifts() {
        let s = shifts(&pooled(&[0.7, 0.5, 0.8]), 4, ShiftConstruction::Cumulative);
        let want = [0.0, H07, H07, H07 + H08];
        for (g, w) in s.means.iter().zip(want) {
            assert!((g - w).abs() < 1e-9, "{:?}", s.means);
        }
    }

    #[test]
    fn dropped_pairs_add_no_shift() {
        let p = PooledEstimates {
            pairs: vec![1, 3],
            raw: vec![0.7, 0.8],
            p_pooled: vec![0.7, 0.8],
            clamped: vec![false; 2],
        };
        let s = shifts(&p, 5, ShiftConstruction::Cumulative);
        assert_eq!(s.means.len(), 5);
        assert!((s.means[2] - s.means[1]).abs() < 1e-15);
        assert!((s.means[3] - s.means[2] - H08).abs() < 1e-9);
        assert_eq!(s.means[4], s.means[3]);
    }

    #[test]
    fn logistic_difference_cdf_is_smooth_and_symmetric() {
        assert_eq!(logistic_difference_cdf(0.0), 0.5);
        for d in [1e-5, 1e-4, 1e-3, 0.3, 2.0, 8.0] {
            let sum = logistic_difference_cdf(d) + logistic_difference_cdf(-d);
            assert!((sum - 1.0).abs() < 1e-12);
        }
        // mpmath references, including both sides of the series cut-over
        let cases = [
            (-1e-6, 0.499_999_833_333_333_3),
            (-1e-4, 0.499_983_333_333_338_9),
            (-0.3, 0.450_149_519_299_473_44),
            (-0.5, 0.417_354_961_979_583_6),
            (-2.0, 0.205_513_187_733_489_6),
            (-8.0, 0.002_349_927_291_612_071_6),
            (3.0, 0.886_972_679_985_076_7),
        ];
        for (d, want) in cases {
            let got = logistic_difference_cdf(d);
            assert!((got - want).abs() < 1e-15, "d={d}: {got} vs {want}");
        }
        for p in [0.05, 0.3, 0.5, 0.7, 0.95] {
            let d = LocationFamily::Logistic.shift_for(p);
            assert!((logistic_difference_cdf(d) - p).abs() < 1e-12);
        }
    }

    #[test]
    fn replicates_are_reproducible() {
        let s = shifts(&pooled(&[0.7]), 2, ShiftConstruction::Cumulative);
        let a = generate_null_replicate(&s, &[5, 5], &[4, 0], &mut substream(3, 9)).unwrap();
        let b = generate_null_replicate(&s, &[5, 5], &[4, 0], &mut substream(3, 9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sizes_b(), vec![4, 0]);
    }

    #[test]
    fn fast_path_matches_public_path() {
        let table = row1();
        let design = NullDesign::for_table(&table, &[5; 4], &[5; 4]).unwrap();
        let s = shifts(&pool_estimates(&table), 4, ShiftConstruction::Cumulative);
        let policy = TiePolicy::default();
        let mut buf = ReplicateBuffers::default();
        for t in 0..20 {
            let fast = replicate_statistic(&s, &design, &table, policy, 77, t, &mut buf).unwrap();
            let mut rng = substream(77, t);
            let ds = generate_null_replicate(&s, &[5; 4], &[5; 4], &mut rng).unwrap();
            let rt = build_frequency_table(&ds, &design.selection, policy, &mut rng).unwrap();
            assert_eq!(fast.to_bits(), m_statistic(&rt).to_bits());
        }
    }

    #[test]
    fn critical_ranks() {
        assert_eq!(critical_rank(0.05, 1000), 950);
        assert_eq!(critical_rank(0.05, 100_000), 95_000);
        assert_eq!(critical_rank(0.05, 10), 10);
        assert_eq!(critical_rank(0.5, 3), 2);
        assert_eq!(critical_rank(1.0, 1000), 0);
    }

    #[test]
    fn table_must_match_sizes() {
        let opts = BootstrapOptions::new(0.05, 200, 1);
        assert!(bootstrap_from_table(&row1(), &[5; 4], &[5; 4], &opts).is_ok());
        assert!(matches!(
            bootstrap_from_table(&row1(), &[5, 5, 5, 4], &[5; 4], &opts),
            Err(Error::InconsistentTable(_))
        ));
        assert!(matches!(
            bootstrap_from_table(&row1(), &[5; 5], &[5; 5], &opts),
            Err(Error::InconsistentTable(_))
        ));
    }

    #[test]
    fn public_preconditions() {
        let t = row1();
        for (alpha, n_boot) in [(0.0, 1000), (1.0, 1000), (0.05, 99)] {
            let opts = BootstrapOptions::new(alpha, n_boot, 1);
            assert!(matches!(
                bootstrap_from_table(&t, &[5; 4], &[5; 4], &opts),
                Err(Error::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn p_value_counts_ties_as_exceeding() {
        let mut opts = BootstrapOptions::new(0.05, 500, 5);
        opts.keep_sample = true;
        let r = bootstrap_from_table(&row1(), &[5; 4], &[5; 4], &opts).unwrap();
        let sample = r.bootstrap_sample.as_ref().unwrap();
        let ge = sample.iter().filter(|&&m| m >= r.m_observed).count();
        assert_eq!(r.p_value, ge as f64 / 500.0);
        let mut sorted = sample.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(r.critical_value, Some(sorted[474]));
        assert_eq!(r.reject, r.m_observed > sorted[474]);
    }
}
