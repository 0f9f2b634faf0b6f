//! The 2×2K frequency table, its expected counts under equal trends, and the
//! chi-square type discrepancy statistic `M`.

use std::io::{BufRead, BufReader, Read, Write};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::data::{PairSelection, TrendDataset};
use crate::error::{Error, Result};
use crate::ustat::{pairwise_count, TiePolicy};

/// Observed counts per retained adjacent pair. Counts are real-valued so
/// that half-scored ties fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    /// 1-based pair indices the columns refer to.
    pub pairs: Vec<usize>,
    pub o_x: Vec<f64>,
    pub o_y: Vec<f64>,
    pub tot_x: Vec<u64>,
    pub tot_y: Vec<u64>,
}

impl FrequencyTable {
    /// Table with pair indices `1..=K`.
    pub fn new(o_x: Vec<f64>, o_y: Vec<f64>, tot_x: Vec<u64>, tot_y: Vec<u64>) -> Result<Self> {
        let pairs = (1..=o_x.len()).collect();
        Self::with_pairs(pairs, o_x, o_y, tot_x, tot_y)
    }

    pub fn with_pairs(
        pairs: Vec<usize>,
        o_x: Vec<f64>,
        o_y: Vec<f64>,
        tot_x: Vec<u64>,
        tot_y: Vec<u64>,
    ) -> Result<Self> {
        let table = FrequencyTable {
            pairs,
            o_x,
            o_y,
            tot_x,
            tot_y,
        };
        table.check()?;
        Ok(table)
    }

    fn check(&self) -> Result<()> {
        let k = self.pairs.len();
        if k == 0 {
            return Err(Error::InconsistentTable("no columns".into()));
        }
        if [
            self.o_x.len(),
            self.o_y.len(),
            self.tot_x.len(),
            self.tot_y.len(),
        ]
        .iter()
        .any(|&len| len != k)
        {
            return Err(Error::InconsistentTable("column lengths differ".into()));
        }
        for l in 0..k {
            for (o, tot, row) in [
                (self.o_x[l], self.tot_x[l], "x"),
                (self.o_y[l], self.tot_y[l], "y"),
            ] {
                if tot == 0 {
                    return Err(Error::InconsistentTable(format!(
                        "row {row}, pair {}: zero total",
                        self.pairs[l]
                    )));
                }
                if !o.is_finite() || o < 0.0 || o > tot as f64 {
                    return Err(Error::InconsistentTable(format!(
                        "row {row}, pair {}: count {o} outside [0, {tot}]",
                        self.pairs[l]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_columns(&self) -> usize {
        self.pairs.len()
    }

    /// `N_tot`, the grand total of both rows.
    pub fn n_tot(&self) -> u64 {
        self.tot_x.iter().sum::<u64>() + self.tot_y.iter().sum::<u64>()
    }

    /// `R_x`, the share of the grand total in the x row.
    pub fn r_x(&self) -> f64 {
        self.tot_x.iter().sum::<u64>() as f64 / self.n_tot() as f64
    }

    pub fn p_hat_x(&self) -> Vec<f64> {
        self.o_x
            .iter()
            .zip(&self.tot_x)
            .map(|(&o, &t)| o / t as f64)
            .collect()
    }

    pub fn p_hat_y(&self) -> Vec<f64> {
        self.o_y
            .iter()
            .zip(&self.tot_y)
            .map(|(&o, &t)| o / t as f64)
            .collect()
    }

    /// Rows in the display layout `O_1, T_1 - O_1, O_2, T_2 - O_2, ...`.
    pub fn layout_rows(&self) -> [Vec<f64>; 2] {
        let row = |o: &[f64], t: &[u64]| {
            o.iter()
                .zip(t)
                .flat_map(|(&o, &t)| [o, t as f64 - o])
                .collect::<Vec<_>>()
        };
        [row(&self.o_x, &self.tot_x), row(&self.o_y, &self.tot_y)]
    }

    /// Parses the two-row layout written by [`FrequencyTable::write_layout`].
    /// Each row may start with a text label; blank lines and `#` comments are
    /// skipped.
    pub fn read_layout<R: Read>(reader: R) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for line in BufReader::new(reader).lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.first().is_some_and(|f| f.parse::<f64>().is_err()) {
                fields.remove(0);
            }
            let values = fields
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::Malformed(format!("bad table cell `{f}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(values);
        }
        if rows.len() != 2 {
            return Err(Error::Malformed(format!(
                "expected 2 table rows, found {}",
                rows.len()
            )));
        }
        if rows[0].len() != rows[1].len() || rows[0].is_empty() || !rows[0].len().is_multiple_of(2)
        {
            return Err(Error::Malformed(
                "table rows need the same even number of cells".into(),
            ));
        }
        let split = |row: &[f64]| -> Result<(Vec<f64>, Vec<u64>)> {
            let mut o = Vec::new();
            let mut t = Vec::new();
            for cell in row.chunks(2) {
                let total = cell[0] + cell[1];
                if total.fract() != 0.0 || total <= 0.0 {
                    return Err(Error::InconsistentTable(format!(
                        "column total {total} is not a positive integer"
                    )));
                }
                o.push(cell[0]);
                t.push(total as u64);
            }
            Ok((o, t))
        };
        let (o_x, tot_x) = split(&rows[0])?;
        let (o_y, tot_y) = split(&rows[1])?;
        FrequencyTable::new(o_x, o_y, tot_x, tot_y)
    }

    pub fn write_layout<W: Write>(&self, mut writer: W) -> Result<()> {
        for (label, row) in ["x", "y"].iter().zip(self.layout_rows()) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(writer, "{label},{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Counts each retained adjacent pair in both groups. With a random tie
/// policy, all x-row pairs draw from `rng` before the y row.
pub fn build_frequency_table<R: RngCore + ?Sized>(
    dataset: &TrendDataset,
    selection: &PairSelection,
    policy: TiePolicy,
    rng: &mut R,
) -> Result<FrequencyTable> {
    let count_row = |group: &[Vec<f64>], rng: &mut R| -> Result<(Vec<f64>, Vec<u64>)> {
        let mut o = Vec::with_capacity(selection.included.len());
        let mut t = Vec::with_capacity(selection.included.len());
        for &l in &selection.included {
            let c = pairwise_count(&group[l - 1], &group[l], policy, rng)?;
            o.push(c.o);
            t.push(c.total);
        }
        Ok((o, t))
    };
    let (o_x, tot_x) = count_row(dataset.group_a(), rng)?;
    let (o_y, tot_y) = count_row(dataset.group_b(), rng)?;
    FrequencyTable::with_pairs(selection.included.clone(), o_x, o_y, tot_x, tot_y)
}

/// Expected counts under equal trends. `c_x`/`c_y` are the complement cells
/// (second cell of each column pair).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedTable {
    pub r_x: f64,
    pub e_x: Vec<f64>,
    pub e_y: Vec<f64>,
    pub c_x: Vec<f64>,
    pub c_y: Vec<f64>,
}

pub fn expected_table(table: &FrequencyTable) -> ExpectedTable {
    let r_x = table.r_x();
    let k = table.num_columns();
    let mut out = ExpectedTable {
        r_x,
        e_x: Vec::with_capacity(k),
        e_y: Vec::with_capacity(k),
        c_x: Vec::with_capacity(k),
        c_y: Vec::with_capacity(k),
    };
    for l in 0..k {
        let col = table.o_x[l] + table.o_y[l];
        let both = (table.tot_x[l] + table.tot_y[l]) as f64;
        let e_x = col * r_x;
        let e_y = col * (1.0 - r_x);
        out.e_x.push(e_x);
        out.e_y.push(e_y);
        out.c_x.push(r_x * both - e_x);
        out.c_y.push((1.0 - r_x) * both - e_y);
    }
    out
}

// 0/0 := 0, decided on the denominator alone.
#[inline]
fn cell(observed: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        0.0
    } else {
        let d = observed - expected;
        d * d / expected
    }
}

/// The discrepancy statistic: a Pearson-type sum over all `4K` cells of the
/// observed and expected tables.
pub fn m_statistic(table: &FrequencyTable) -> f64 {
    let exp = expected_table(table);
    (0..table.num_columns())
        .map(|l| {
            let rest_x = table.tot_x[l] as f64 - table.o_x[l];
            let rest_y = table.tot_y[l] as f64 - table.o_y[l];
            cell(table.o_x[l], exp.e_x[l])
                + cell(rest_x, exp.c_x[l])
                + cell(table.o_y[l], exp.e_y[l])
                + cell(rest_y, exp.c_y[l])
        })
        .sum()
}
