use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::config::AlgId;
use super::trial::TrialRecord;

/// Mean, sample standard deviation and 95% half-width `1.96 std / sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub ci95: f64,
    pub count: usize,
}

impl Stats {
    /// Summed in slice order, so the result is reproducible bit for bit.
    pub fn of(xs: &[f64]) -> Option<Stats> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        // Equal samples would otherwise pick up rounding noise in the mean.
        let mean = if xs.iter().all(|&x| x == xs[0]) {
            xs[0]
        } else {
            xs.iter().sum::<f64>() / n
        };
        let std = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Stats {
            mean,
            std,
            ci95: 1.96 * std / n.sqrt(),
            count: xs.len(),
        })
    }

    /// Median of a copy of `xs`; the mean of the middle pair for even counts.
    pub fn median(xs: &[f64]) -> Option<f64> {
        if xs.is_empty() {
            return None;
        }
        let mut v = xs.to_vec();
        v.sort_by(f64::total_cmp);
        let k = v.len() / 2;
        Some(if v.len() % 2 == 1 {
            v[k]
        } else {
            (v[k - 1] + v[k]) / 2.0
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    Cgr,
    Opt,
}

/// Ratio statistics of one algorithm on one shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub shape: String,
    pub algorithm: AlgId,
    pub baseline: Baseline,
    pub mean: f64,
    pub std: f64,
    pub ci95: f64,
    pub count: usize,
    /// Trials of this shape where the algorithm did not finish.
    pub failures: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rows: Vec<SummaryRow>,
}

impl SweepSummary {
    pub fn get(&self, shape: &str, algorithm: AlgId, baseline: Baseline) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.shape == shape && r.algorithm == algorithm && r.baseline == baseline)
    }

    /// Shapes in order of first appearance.
    pub fn shapes(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.shape) {
                out.push(r.shape.clone());
            }
        }
        out
    }
}

/// Groups records by shape (first appearance order) and algorithm, and
/// summarizes the ratios against CGR and OPT where present.
pub fn summarize(records: &[TrialRecord]) -> Result<SweepSummary> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut shapes: Vec<&str> = Vec::new();
    for r in records {
        if !shapes.contains(&r.shape.as_str()) {
            shapes.push(&r.shape);
        }
    }
    let mut rows = Vec::new();
    for shape in shapes {
        let group: Vec<&TrialRecord> = records.iter().filter(|r| r.shape == shape).collect();
        for alg in AlgId::ALL {
            let results: Vec<_> = group.iter().filter_map(|r| r.result(alg)).collect();
            if results.is_empty() {
                continue;
            }
            let failures = results.iter().filter(|r| !r.is_ok()).count();
            for baseline in [Baseline::Cgr, Baseline::Opt] {
                let ratios: Vec<f64> = results
                    .iter()
                    .filter_map(|r| match baseline {
                        Baseline::Cgr => r.ratio_cgr,
                        Baseline::Opt => r.ratio_opt,
                    })
                    .collect();
                if let Some(s) = Stats::of(&ratios) {
                    rows.push(SummaryRow {
                        shape: shape.to_string(),
                        algorithm: alg,
                        baseline,
                        mean: s.mean,
                        std: s.std,
                        ci95: s.ci95,
                        count: s.count,
                        failures,
                    });
                }
            }
        }
    }
    Ok(SweepSummary { rows })
}
