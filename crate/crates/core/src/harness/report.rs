use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{Error, Result};

use super::config::AlgId;
use super::stats::{Baseline, SweepSummary};
use super::trial::TrialRecord;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for row in rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

#[derive(Serialize)]
struct RatioRow<'a> {
    shape: &'a str,
    trial: u64,
    seed: u64,
    algorithm: AlgId,
    status: &'a str,
    g: Option<f64>,
    ratio_cgr: Option<f64>,
    ratio_opt: Option<f64>,
    iterations: u64,
    messages: Option<u64>,
    wallclock: f64,
}

#[derive(Serialize)]
struct TraceRow {
    t: usize,
    phi: f64,
}

#[derive(Serialize)]
struct BenchmarkRow {
    shape: String,
    sota_mean: Option<f64>,
    sota_std: Option<f64>,
    vvp_mean: Option<f64>,
    vvp_std: Option<f64>,
    nbo_mean: Option<f64>,
    nbo_std: Option<f64>,
    trials: usize,
}

/// Files written by [`write_report`].
#[derive(Debug, Clone)]
pub struct ReportFiles {
    pub summary: PathBuf,
    pub benchmark: PathBuf,
    pub ratios: PathBuf,
    pub traces: Vec<PathBuf>,
    pub markdown: PathBuf,
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
}

/// Writes `summary.csv`, `benchmark.csv`, `ratios.csv`, one `traces/*.csv` per
/// NBO potential trace, and `report.md` into `out_dir`.
pub fn write_report(
    records: &[TrialRecord],
    summary: &SweepSummary,
    out_dir: &Path,
) -> Result<ReportFiles> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let summary_path = out_dir.join("summary.csv");
    write_csv(&summary_path, &summary.rows)?;

    let ratios_path = out_dir.join("ratios.csv");
    write_csv(
        &ratios_path,
        records.iter().flat_map(|rec| {
            rec.results.iter().map(move |r| RatioRow {
                shape: &rec.shape,
                trial: rec.trial,
                seed: rec.seed,
                algorithm: r.alg,
                status: &r.status,
                g: r.g,
                ratio_cgr: r.ratio_cgr,
                ratio_opt: r.ratio_opt,
                iterations: r.iterations,
                messages: r.messages,
                wallclock: r.wallclock,
            })
        }),
    )?;

    let table: Vec<BenchmarkRow> = summary
        .shapes()
        .into_iter()
        .map(|shape| {
            let get = |alg| summary.get(&shape, alg, Baseline::Cgr);
            let trials = records.iter().filter(|r| r.shape == shape).count();
            BenchmarkRow {
                sota_mean: get(AlgId::Sota).map(|r| r.mean),
                sota_std: get(AlgId::Sota).map(|r| r.std),
                vvp_mean: get(AlgId::Vvp).map(|r| r.mean),
                vvp_std: get(AlgId::Vvp).map(|r| r.std),
                nbo_mean: get(AlgId::Nbo).map(|r| r.mean),
                nbo_std: get(AlgId::Nbo).map(|r| r.std),
                shape,
                trials,
            }
        })
        .collect();
    let benchmark_path = out_dir.join("benchmark.csv");
    write_csv(&benchmark_path, &table)?;

    let trace_dir = out_dir.join("traces");
    std::fs::create_dir_all(&trace_dir).map_err(io_err(&trace_dir))?;
    let mut traces = Vec::new();
    for rec in records {
        for r in &rec.results {
            if let Some(trace) = &r.phi_trace {
                let path = trace_dir.join(format!("{}_{}_{}.csv", rec.shape, rec.trial, r.alg));
                write_csv(
                    &path,
                    trace
                        .iter()
                        .enumerate()
                        .map(|(t, &phi)| TraceRow { t, phi }),
                )?;
                traces.push(path);
            }
        }
    }

    let mut md = String::new();
    let _ = writeln!(md, "# Coverage sweep report\n");
    let _ = writeln!(md, "{} trial records.\n", records.len());
    let _ = writeln!(md, "## Efficiency ratio against CGR (mean ± std)\n");
    let _ = writeln!(md, "| shape | SOTA | VVP | NBO | trials |");
    let _ = writeln!(md, "|---|---|---|---|---|");
    for row in &table {
        let cell = |m: Option<f64>, s: Option<f64>| match (m, s) {
            (Some(m), Some(s)) => format!("{m:.3} ± {s:.3}"),
            _ => "-".to_string(),
        };
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {} |",
            row.shape,
            cell(row.sota_mean, row.sota_std),
            cell(row.vvp_mean, row.vvp_std),
            cell(row.nbo_mean, row.nbo_std),
            row.trials
        );
    }
    let opt_rows: Vec<_> = summary
        .rows
        .iter()
        .filter(|r| r.baseline == Baseline::Opt)
        .collect();
    if !opt_rows.is_empty() {
        let _ = writeln!(md, "\n## Efficiency ratio against OPT\n");
        let _ = writeln!(md, "| shape | algorithm | mean | std | ci95 | n |");
        let _ = writeln!(md, "|---|---|---|---|---|---|");
        for r in opt_rows {
            let _ = writeln!(
                md,
                "| {} | {} | {:.3} | {:.3} | {:.3} | {} |",
                r.shape, r.algorithm, r.mean, r.std, r.ci95, r.count
            );
        }
    }
    let failed: Vec<_> = summary.rows.iter().filter(|r| r.failures > 0).collect();
    if !failed.is_empty() {
        let _ = writeln!(md, "\n## Failures\n");
        for r in failed {
            if r.baseline == Baseline::Cgr
                || summary.get(&r.shape, r.algorithm, Baseline::Cgr).is_none()
            {
                let _ = writeln!(
                    md,
                    "- {} / {}: {} trials did not finish",
                    r.shape, r.algorithm, r.failures
                );
            }
        }
    }
    let kinds: Vec<&str> = {
        let mut v: Vec<&str> = records.iter().map(|r| r.config.shape.kind()).collect();
        v.dedup();
        v
    };
    let _ = writeln!(md, "\n## Notes\n");
    if kinds
        .iter()
        .any(|k| matches!(*k, "bridge" | "indoor" | "lattice3d"))
    {
        let _ = writeln!(
            md,
            "- Bridge, indoor and 3D layouts are hand-authored approximations."
        );
    }
    let _ = writeln!(
        md,
        "- Shape sizes and team sizes are desk-scale defaults; see the embedded config of each record."
    );
    let _ = writeln!(
        md,
        "- Mean NBO ratio against CGR: {}.",
        fmt_opt(
            summary
                .rows
                .iter()
                .filter(|r| r.algorithm == AlgId::Nbo && r.baseline == Baseline::Cgr)
                .map(|r| r.mean)
                .reduce(f64::min)
        )
    );
    let md_path = out_dir.join("report.md");
    std::fs::write(&md_path, md).map_err(io_err(&md_path))?;

    Ok(ReportFiles {
        summary: summary_path,
        benchmark: benchmark_path,
        ratios: ratios_path,
        traces,
        markdown: md_path,
    })
}
