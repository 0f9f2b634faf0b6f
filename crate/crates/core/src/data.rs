//! Two-group datasets of ordered sub-samples, CSV ingestion and the
//! adjacent-pair selection rule for missing sub-samples.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One measurement as it appears in the input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub group: String,
    pub level: i64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    pub group_a: String,
    pub group_b: String,
}

impl Default for Labels {
    fn default() -> Self {
        Labels {
            group_a: "A".to_owned(),
            group_b: "B".to_owned(),
        }
    }
}

/// Two groups of `K + 1` ordered sub-samples. Sub-sample `i` (0-based here,
/// level `i + 1` in files) may be empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendDataset {
    group_a: Vec<Vec<f64>>,
    group_b: Vec<Vec<f64>>,
    labels: Labels,
}

impl TrendDataset {
    pub fn new(group_a: Vec<Vec<f64>>, group_b: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_labels(group_a, group_b, Labels::default())
    }

    pub fn with_labels(
        group_a: Vec<Vec<f64>>,
        group_b: Vec<Vec<f64>>,
        labels: Labels,
    ) -> Result<Self> {
        if group_a.len() != group_b.len() {
            return Err(Error::LevelCountMismatch {
                a: group_a.len(),
                b: group_b.len(),
            });
        }
        if group_a.len() < 2 {
            return Err(Error::TooFewLevels);
        }
        for (name, group) in [(&labels.group_a, &group_a), (&labels.group_b, &group_b)] {
            for (i, sub) in group.iter().enumerate() {
                if let Some(&value) = sub.iter().find(|v| !v.is_finite()) {
                    return Err(Error::NonFinite {
                        group: name.clone(),
                        level: i + 1,
                        value,
                    });
                }
            }
        }
        Ok(TrendDataset {
            group_a,
            group_b,
            labels,
        })
    }

    pub fn group_a(&self) -> &[Vec<f64>] {
        &self.group_a
    }

    pub fn group_b(&self) -> &[Vec<f64>] {
        &self.group_b
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    /// Number of levels, `K + 1`.
    pub fn num_levels(&self) -> usize {
        self.group_a.len()
    }

    /// Number of adjacent pairs, `K`.
    pub fn num_pairs(&self) -> usize {
        self.group_a.len() - 1
    }

    pub fn sizes_a(&self) -> Vec<usize> {
        self.group_a.iter().map(Vec::len).collect()
    }

    pub fn sizes_b(&self) -> Vec<usize> {
        self.group_b.iter().map(Vec::len).collect()
    }

    /// Flattens back into file records, group A first, levels ascending.
    pub fn to_records(&self) -> Vec<RawRecord> {
        let mut out = Vec::new();
        for (name, group) in [
            (&self.labels.group_a, &self.group_a),
            (&self.labels.group_b, &self.group_b),
        ] {
            for (i, sub) in group.iter().enumerate() {
                out.extend(sub.iter().map(|&value| RawRecord {
                    group: name.clone(),
                    level: i as i64 + 1,
                    value,
                }));
            }
        }
        out
    }
}

/// Builds a dataset from file records.
///
/// Groups are ordered by first appearance. Level `l` maps to position `l`, so
/// levels with no records in a group are empty sub-samples. The number of
/// levels is `levels` when given, otherwise the largest level present.
pub fn validate(records: &[RawRecord], levels: Option<usize>) -> Result<TrendDataset> {
    let mut names: Vec<&str> = Vec::new();
    for r in records {
        if !names.contains(&r.group.as_str()) {
            names.push(&r.group);
        }
    }
    if names.len() != 2 {
        return Err(Error::GroupCount { found: names.len() });
    }
    let max_seen = records.iter().map(|r| r.level).max().unwrap_or(0);
    let n_levels = levels.unwrap_or(max_seen.max(0) as usize);
    if n_levels < 2 {
        return Err(Error::TooFewLevels);
    }
    if let Some(r) = records
        .iter()
        .find(|r| r.level < 1 || r.level as usize > n_levels)
    {
        return Err(Error::LevelOutOfRange {
            level: r.level,
            max: n_levels,
        });
    }

    let mut groups = [vec![Vec::new(); n_levels], vec![Vec::new(); n_levels]];
    for r in records {
        let g = if r.group == names[0] { 0 } else { 1 };
        groups[g][r.level as usize - 1].push(r.value);
    }
    let [group_a, group_b] = groups;
    TrendDataset::with_labels(
        group_a,
        group_b,
        Labels {
            group_a: names[0].to_owned(),
            group_b: names[1].to_owned(),
        },
    )
}

/// Reads `group,level,value` records. A header row is required; columns may
/// appear in any order and extra columns are ignored.
pub fn read_records<R: Read>(reader: R) -> Result<Vec<RawRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Malformed(format!("missing column `{name}`")))
    };
    let (gi, li, vi) = (column("group")?, column("level")?, column("value")?);

    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let group = field(gi).to_owned();
        if group.is_empty() {
            return Err(Error::Malformed(format!("line {line}: empty group")));
        }
        let level = field(li)
            .parse::<i64>()
            .map_err(|_| Error::Malformed(format!("line {line}: bad level `{}`", field(li))))?;
        let value = field(vi)
            .parse::<f64>()
            .map_err(|_| Error::Malformed(format!("line {line}: bad value `{}`", field(vi))))?;
        out.push(RawRecord {
            group,
            level,
            value,
        });
    }
    Ok(out)
}

pub fn read_dataset<R: Read>(reader: R, levels: Option<usize>) -> Result<TrendDataset> {
    validate(&read_records(reader)?, levels)
}

pub fn write_dataset<W: Write>(dataset: &TrendDataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for r in dataset.to_records() {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Adjacent pairs (1-based, pair `l` joins levels `l` and `l + 1`) kept for
/// analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSelection {
    pub included: Vec<usize>,
    pub dropped: Vec<usize>,
    /// Dropped pairs where one group still had data on both levels.
    pub one_sided: Vec<usize>,
}

/// Keeps pair `l` iff both groups have data on both of its levels.
pub fn select_pairs(dataset: &TrendDataset) -> Result<PairSelection> {
    select_pairs_by_size(&dataset.sizes_a(), &dataset.sizes_b())
}

pub fn select_pairs_by_size(sizes_a: &[usize], sizes_b: &[usize]) -> Result<PairSelection> {
    if sizes_a.len() != sizes_b.len() {
        return Err(Error::LevelCountMismatch {
            a: sizes_a.len(),
            b: sizes_b.len(),
        });
    }
    if sizes_a.len() < 2 {
        return Err(Error::TooFewLevels);
    }
    let mut sel = PairSelection {
        included: Vec::new(),
        dropped: Vec::new(),
        one_sided: Vec::new(),
    };
    for l in 1..sizes_a.len() {
        let a = sizes_a[l - 1] * sizes_a[l] > 0;
        let b = sizes_b[l - 1] * sizes_b[l] > 0;
        if a && b {
            sel.included.push(l);
        } else {
            sel.dropped.push(l);
            if a || b {
                sel.one_sided.push(l);
            }
        }
    }
    if sel.included.is_empty() {
        return Err(Error::NoComparablePairs);
    }
    Ok(sel)
}
