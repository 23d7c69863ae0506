use std::path::Path;

use serde::Serialize;

use crate::{Result, TOL};

use super::config::AlgId;
use super::trial::TrialRecord;

/// Problems found in one record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordIssue {
    /// 1-based position of the record in its file.
    pub index: usize,
    pub shape: String,
    pub trial: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checked: usize,
    pub issues: Vec<RecordIssue>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Rebuilds the trial's environment and checks every successful result:
/// exclusivity, `G` recomputation within `1e-9`, ratio consistency and a
/// non-decreasing potential trace.
pub fn validate_record(rec: &TrialRecord, base: Option<&Path>) -> Result<Vec<String>> {
    let mut problems = Vec::new();
    let cfg = &rec.config;
    if cfg.seed != rec.seed
        || cfg.trial != rec.trial
        || cfg.agents != rec.agents
        || cfg.label() != rec.shape
    {
        problems.push("header disagrees with embedded config".to_string());
    }
    let inst = cfg.instance(base)?;
    let m = inst.node_count();
    if m != rec.nodes {
        problems.push(format!("node count {} but environment has {m}", rec.nodes));
        return Ok(problems);
    }
    match cfg.initial(m) {
        Ok(init) if init.positions() == rec.initial => {}
        _ => problems.push("initial allocation does not match the seed".to_string()),
    }
    let base_g = |alg: AlgId| rec.objective(alg).filter(|&g| g > 0.0);
    for r in rec.results.iter().filter(|r| r.is_ok()) {
        let name = r.alg.name();
        if r.positions.len() != rec.agents {
            problems.push(format!(
                "{name}: {} positions for {} agents",
                r.positions.len(),
                rec.agents
            ));
            continue;
        }
        let mut seen = vec![false; m];
        let mut exclusive = true;
        for &x in &r.positions {
            if x >= m || seen[x] {
                exclusive = false;
                break;
            }
            seen[x] = true;
        }
        if !exclusive {
            problems.push(format!("{name}: allocation is not exclusive"));
            continue;
        }
        let g = inst.objective(&r.positions)?;
        match r.g {
            Some(stored) if (stored - g).abs() <= TOL => {}
            Some(stored) => problems.push(format!("{name}: stored G {stored} but recomputed {g}")),
            None => problems.push(format!("{name}: missing G")),
        }
        for (ratio, denom, label) in [
            (r.ratio_cgr, base_g(AlgId::Cgr), "cgr"),
            (r.ratio_opt, base_g(AlgId::Opt), "opt"),
        ] {
            match (ratio, denom) {
                (Some(q), Some(d)) if (q - g / d).abs() <= TOL => {}
                (None, None) => {}
                _ => problems.push(format!("{name}: ratio against {label} is inconsistent")),
            }
        }
        if let Some(trace) = &r.phi_trace {
            if let Some(t) = trace.windows(2).position(|w| w[1] < w[0] - TOL) {
                problems.push(format!(
                    "{name}: potential decreases at iteration {}",
                    t + 1
                ));
            }
        }
    }
    Ok(problems)
}

pub fn validate_records(records: &[TrialRecord], base: Option<&Path>) -> ValidationReport {
    let mut report = ValidationReport {
        checked: records.len(),
        issues: Vec::new(),
    };
    for (k, rec) in records.iter().enumerate() {
        let messages = match validate_record(rec, base) {
            Ok(p) => p,
            Err(e) => vec![format!("cannot rebuild environment: {e}")],
        };
        for message in messages {
            report.issues.push(RecordIssue {
                index: k + 1,
                shape: rec.shape.clone(),
                trial: rec.trial,
                message,
            });
        }
    }
    report
}
