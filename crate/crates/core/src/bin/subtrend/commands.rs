use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use subtrend::data::read_dataset;
use subtrend::exactdist::total_variation;
use subtrend::simulation::simulate;
use subtrend::{
    bootstrap_test, exact_pmf, mc_count_pmf, permutation_pmf, run_fixed_table_test,
    BootstrapOptions, Error, FrequencyTable, LocationFamily, Result, SimConfig, TestResult,
    TiePolicy,
};

use crate::manifest::{sha256_hex, InputDigest};
use crate::{ExactArgs, PowerArgs, SampleArgs, SimArgs, TableInput, TestArgs, TieArgs};

/// Everything a command produced, before anything is written.
pub struct Run {
    pub command: &'static str,
    pub report: Vec<u8>,
    pub summary: Option<String>,
    pub config: Value,
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
    pub side_files: Vec<(PathBuf, Vec<u8>)>,
}

fn read_input(path: &Path) -> Result<(Vec<u8>, InputDigest)> {
    let bytes = fs::read(path)?;
    let digest = InputDigest {
        path: path.to_path_buf(),
        sha256: sha256_hex(&bytes),
    };
    Ok((bytes, digest))
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

fn tie_policy(args: &TieArgs) -> TiePolicy {
    TiePolicy::new(args.ties, args.tie_scope)
}

fn table_sizes(input: &TableInput, table: &FrequencyTable) -> Result<(Vec<usize>, Vec<usize>)> {
    let levels = table.pairs.last().map_or(0, |&l| l + 1);
    match input.size {
        Some(n) => Ok((vec![n; levels], vec![n; levels])),
        None if input.sizes_x.is_empty() || input.sizes_y.is_empty() => Err(Error::InvalidConfig(
            "a table needs --size or both --sizes-x and --sizes-y".into(),
        )),
        None => Ok((input.sizes_x.clone(), input.sizes_y.clone())),
    }
}

pub fn test(args: &TestArgs) -> Result<Run> {
    let boot = &args.boot;
    let opts = BootstrapOptions {
        tie_policy: tie_policy(&boot.ties),
        shift_construction: boot.shift,
        keep_sample: boot.sample.dump_boot.is_some() || boot.sample.include_sample,
        ..BootstrapOptions::new(boot.alpha, boot.nboot, boot.seed)
    };
    let (result, digest) = match (&args.data, &args.table.table) {
        (Some(path), _) => {
            let (bytes, digest) = read_input(path)?;
            let ds = read_dataset(bytes.as_slice(), args.levels)?;
            (bootstrap_test(&ds, &opts)?, digest)
        }
        (None, Some(path)) => {
            let (bytes, digest) = read_input(path)?;
            let table = FrequencyTable::read_layout(bytes.as_slice())?;
            let (sx, sy) = table_sizes(&args.table, &table)?;
            (run_fixed_table_test(&table, &sx, &sy, &opts)?, digest)
        }
        (None, None) => {
            return Err(Error::InvalidConfig(
                "one of --data or --table is required".into(),
            ))
        }
    };
    let config = serde_json::json!({ "arguments": args, "resolved": opts });
    finish_test("test", result, &boot.sample, config, vec![digest])
}

fn finish_test(
    command: &'static str,
    mut result: TestResult,
    sample: &SampleArgs,
    config: Value,
    inputs: Vec<InputDigest>,
) -> Result<Run> {
    let mut side_files = Vec::new();
    if let (Some(path), Some(values)) = (&sample.dump_boot, &result.bootstrap_sample) {
        side_files.push((path.clone(), boot_dump(values)));
    }
    if !sample.include_sample {
        result.bootstrap_sample = None;
    }
    Ok(Run {
        command,
        report: to_json(&result)?,
        summary: Some(test_summary(&result)),
        config,
        seed: Some(result.seed),
        inputs,
        side_files,
    })
}

/// Two CSV columns, sorted statistic and its empirical CDF, under a `#`
/// header that gnuplot skips.
fn boot_dump(values: &[f64]) -> Vec<u8> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out = String::from("# m_star,ecdf\n");
    for (i, m) in sorted.iter().enumerate() {
        let _ = writeln!(out, "{m},{}", (i + 1) as f64 / n);
    }
    out.into_bytes()
}

fn test_summary(r: &TestResult) -> String {
    let critical = r
        .critical_value
        .map_or_else(|| "none".to_string(), |c| format!("{c:.4}"));
    let mut s = format!(
        "M = {:.4}, critical value = {critical} (alpha {}), p-value = {} over {} replicates: {}\n",
        r.m_observed,
        r.alpha,
        r.p_value,
        r.n_boot,
        if r.reject { "reject" } else { "do not reject" }
    );
    s.push_str("pair      o_x  tot_x   p_x      o_y  tot_y   p_y    pooled");
    let t = &r.table;
    for i in 0..t.num_columns() {
        let _ = write!(
            s,
            "\n{:>4} {:>8} {:>6} {:>6.3} {:>8} {:>6} {:>6.3} {:>8.4}{}",
            t.pairs[i],
            t.o_x[i],
            t.tot_x[i],
            r.p_hat_x[i],
            t.o_y[i],
            t.tot_y[i],
            r.p_hat_y[i],
            r.p_pooled.p_pooled[i],
            if r.p_pooled.clamped[i] {
                " (clamped)"
            } else {
                ""
            }
        );
    }
    if !r.dropped_pairs.is_empty() {
        let _ = write!(s, "\ndropped pairs: {:?}", r.dropped_pairs);
        if !r.one_sided_drops.is_empty() {
            let _ = write!(s, " (only one group empty in {:?})", r.one_sided_drops);
        }
    }
    s
}

fn load_config(path: &Path) -> Result<(SimConfig, InputDigest)> {
    let (bytes, digest) = read_input(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::Malformed(format!("{} is not UTF-8", path.display())))?;
    let config = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| Error::Malformed(e.to_string()))?
    } else {
        serde_json::from_str(&text)?
    };
    Ok((config, digest))
}

fn sim_config(args: &SimArgs, p_y: &[f64]) -> Result<(SimConfig, Vec<InputDigest>)> {
    let (mut cfg, inputs) = match &args.config {
        Some(path) => {
            let (cfg, digest) = load_config(path)?;
            (cfg, vec![digest])
        }
        None => {
            if args.p.is_empty() {
                return Err(Error::InvalidConfig("--p or --config is required".into()));
            }
            if args.size.is_none() && (args.sizes_x.is_empty() || args.sizes_y.is_empty()) {
                return Err(Error::InvalidConfig(
                    "--size or both --sizes-x and --sizes-y are required".into(),
                ));
            }
            (
                SimConfig::uniform(args.p.clone(), 0, 1000, 1000, 0),
                Vec::new(),
            )
        }
    };
    if !args.p.is_empty() {
        cfg.true_p = args.p.clone();
        cfg.k = args.p.len();
    }
    if !p_y.is_empty() {
        cfg.true_p_y = Some(p_y.to_vec());
    }
    if let Some(n) = args.size {
        cfg.sizes_x = vec![n; cfg.k + 1];
        cfg.sizes_y = vec![n; cfg.k + 1];
    }
    if !args.sizes_x.is_empty() {
        cfg.sizes_x = args.sizes_x.clone();
    }
    if !args.sizes_y.is_empty() {
        cfg.sizes_y = args.sizes_y.clone();
    }
    cfg.n_rep = args.nrep.unwrap_or(cfg.n_rep);
    cfg.n_boot = args.nboot.unwrap_or(cfg.n_boot);
    cfg.alpha = args.alpha.unwrap_or(cfg.alpha);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.family = args.family.unwrap_or(cfg.family);
    cfg.shift_construction = args.shift.unwrap_or(cfg.shift_construction);
    cfg.keep_pvalues |= args.keep_pvalues;
    cfg.validate()?;
    Ok((cfg, inputs))
}

fn run_sim(
    command: &'static str,
    cfg: SimConfig,
    inputs: Vec<InputDigest>,
    progress: bool,
) -> Result<Run> {
    let total = cfg.n_rep;
    let step = (total / 20).max(1);
    let start = Instant::now();
    let lock = Mutex::new(());
    let report_progress = |done: usize| {
        if done.is_multiple_of(step) || done == total {
            let rate = done as f64 / start.elapsed().as_secs_f64().max(1e-9);
            let _guard = lock.lock();
            eprintln!("replications {done}/{total} ({rate:.1}/s)");
        }
    };
    let callback: Option<&(dyn Fn(usize) + Sync)> = if progress {
        Some(&report_progress)
    } else {
        None
    };
    let report = simulate(&cfg, callback)?;
    Ok(Run {
        command,
        report: to_json(&report)?,
        summary: Some(report.summary()),
        config: serde_json::to_value(&cfg)?,
        seed: Some(cfg.seed),
        inputs,
        side_files: Vec::new(),
    })
}

pub fn type1(args: &SimArgs) -> Result<Run> {
    let (cfg, inputs) = sim_config(args, &[])?;
    if cfg.true_p_y.is_some() {
        return Err(Error::InvalidConfig(
            "type-I error runs take a single probability vector; use `power`".into(),
        ));
    }
    run_sim("type1", cfg, inputs, args.progress)
}

pub fn power(args: &PowerArgs) -> Result<Run> {
    if let Some(path) = &args.table {
        return power_table(args, path);
    }
    let (cfg, inputs) = sim_config(&args.sim, &args.p_y)?;
    if cfg.true_p_y.is_none() {
        return Err(Error::InvalidConfig(
            "power runs need --p-y (or true_p_y)".into(),
        ));
    }
    run_sim("power", cfg, inputs, args.sim.progress)
}

fn power_table(args: &PowerArgs, path: &Path) -> Result<Run> {
    let sim = &args.sim;
    let (bytes, digest) = read_input(path)?;
    let table = FrequencyTable::read_layout(bytes.as_slice())?;
    let sizes = TableInput {
        table: Some(path.to_path_buf()),
        sizes_x: sim.sizes_x.clone(),
        sizes_y: sim.sizes_y.clone(),
        size: sim.size,
    };
    let (sx, sy) = table_sizes(&sizes, &table)?;
    let opts = BootstrapOptions {
        tie_policy: tie_policy(&args.ties),
        shift_construction: sim.shift.unwrap_or_default(),
        keep_sample: args.sample.dump_boot.is_some() || args.sample.include_sample,
        ..BootstrapOptions::new(
            sim.alpha.unwrap_or(0.05),
            sim.nboot.unwrap_or(10_000),
            sim.seed.unwrap_or(0),
        )
    };
    let result = run_fixed_table_test(&table, &sx, &sy, &opts)?;
    let config = serde_json::json!({ "arguments": args, "resolved": opts });
    finish_test("power", result, &args.sample, config, vec![digest])
}

pub fn exact(args: &ExactArgs) -> Result<Run> {
    let pmf = exact_pmf(args.n1, args.n2, args.p)?;
    let oracle: Option<(&str, Vec<f64>)> = match args.compare.as_deref() {
        Some("permutation") => Some(("permutation", permutation_pmf(args.n1, args.n2)?.mass)),
        Some("mc") => {
            let shift = args
                .shift
                .unwrap_or_else(|| LocationFamily::Normal.shift_for(args.p));
            let mc = mc_count_pmf(args.n1, args.n2, shift, args.nsims, args.seed)?;
            Some(("mc", mc.mass))
        }
        _ => None,
    };

    let mut writer = csv::Writer::from_writer(Vec::new());
    match &oracle {
        Some((name, _)) => writer.write_record(["k", "probability", name])?,
        None => writer.write_record(["k", "probability"])?,
    }
    for (k, m) in pmf.mass.iter().enumerate() {
        let mut row = vec![k.to_string(), m.to_string()];
        if let Some((_, other)) = &oracle {
            row.push(other[k].to_string());
        }
        writer.write_record(&row)?;
    }
    let mut report = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let mut summary = format!(
        "n1 = {}, n2 = {}, p = {}: total mass {}, mean {} (n1*n2*p = {})",
        args.n1,
        args.n2,
        args.p,
        pmf.total(),
        pmf.mean(),
        (args.n1 * args.n2) as f64 * args.p
    );
    if let Some((name, other)) = &oracle {
        let tv = total_variation(&pmf.mass, other);
        report.extend_from_slice(format!("# total_variation,{tv}\n").as_bytes());
        let _ = write!(summary, "; total variation to {name}: {tv}");
    }
    Ok(Run {
        command: "exact",
        report,
        summary: Some(summary),
        config: serde_json::to_value(args)?,
        seed: (args.compare.as_deref() == Some("mc")).then_some(args.seed),
        inputs: Vec::new(),
        side_files: Vec::new(),
    })
}
