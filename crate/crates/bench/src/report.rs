//! Aggregate tables over run records, written as plot-ready CSV.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::experiment::RunRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupBy {
    Map,
    K,
}

impl FromStr for GroupBy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "map" => Ok(GroupBy::Map),
            "k" => Ok(GroupBy::K),
            other => Err(format!("unknown grouping `{other}` (expected map or k)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FailRateRow {
    pub map: usize,
    pub variant: String,
    pub runs: usize,
    pub failures: usize,
    pub fail_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionsRow {
    pub map: usize,
    pub variant: String,
    /// Cells where every variant succeeded.
    pub cells: usize,
    pub mean_total_actions: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeRow {
    pub k: usize,
    pub variant: String,
    pub samples: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdditionRow {
    pub variant: String,
    pub half_k: usize,
    pub half_mean_ms: Option<f64>,
    pub half_median_ms: Option<f64>,
    pub full_k: usize,
    pub full_mean_ms: Option<f64>,
    pub full_median_ms: Option<f64>,
}

/// Variant names in order of first appearance.
pub fn variants(records: &[RunRecord]) -> Vec<String> {
    let mut seen = Vec::new();
    for r in records {
        if !seen.contains(&r.variant) {
            seen.push(r.variant.clone());
        }
    }
    seen
}

fn maps(records: &[RunRecord]) -> BTreeSet<usize> {
    records.iter().map(|r| r.map).collect()
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    })
}

pub fn fail_rates(records: &[RunRecord]) -> Vec<FailRateRow> {
    let mut rows = Vec::new();
    for map in maps(records) {
        for variant in variants(records) {
            let runs: Vec<_> = records
                .iter()
                .filter(|r| r.map == map && r.variant == variant)
                .collect();
            if runs.is_empty() {
                continue;
            }
            let failures = runs.iter().filter(|r| !r.succeeded()).count();
            rows.push(FailRateRow {
                map,
                variant,
                runs: runs.len(),
                failures,
                fail_rate: failures as f64 / runs.len() as f64,
            });
        }
    }
    rows
}

/// (assignment, seed) cells of `map` in which every variant succeeded.
fn mutual_cells(records: &[RunRecord], map: usize, variants: &[String]) -> BTreeSet<(usize, u64)> {
    let mut ok: BTreeMap<(usize, u64), BTreeSet<&str>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.map == map) {
        let entry = ok.entry((r.assignment, r.seed)).or_default();
        if r.succeeded() {
            entry.insert(&r.variant);
        }
    }
    ok.into_iter()
        .filter(|(_, v)| variants.iter().all(|name| v.contains(name.as_str())))
        .map(|(cell, _)| cell)
        .collect()
}

pub fn mean_total_actions(records: &[RunRecord]) -> Vec<ActionsRow> {
    let names = variants(records);
    let mut rows = Vec::new();
    for map in maps(records) {
        let cells = mutual_cells(records, map, &names);
        for variant in &names {
            let totals: Vec<f64> = records
                .iter()
                .filter(|r| {
                    r.map == map && &r.variant == variant && cells.contains(&(r.assignment, r.seed))
                })
                .filter_map(|r| r.total_actions.map(|t| t as f64))
                .collect();
            rows.push(ActionsRow {
                map,
                variant: variant.clone(),
                cells: totals.len(),
                mean_total_actions: mean(&totals),
            });
        }
    }
    rows
}

/// Mean over all maps of mutually successful runs, per variant.
pub fn overall_mean_total_actions(records: &[RunRecord]) -> BTreeMap<String, Option<f64>> {
    let names = variants(records);
    let mut totals: BTreeMap<String, Vec<f64>> =
        names.iter().map(|n| (n.clone(), Vec::new())).collect();
    for map in maps(records) {
        let cells = mutual_cells(records, map, &names);
        for r in records
            .iter()
            .filter(|r| r.map == map && cells.contains(&(r.assignment, r.seed)))
        {
            if let Some(t) = r.total_actions {
                totals
                    .get_mut(&r.variant)
                    .expect("known variant")
                    .push(t as f64);
            }
        }
    }
    totals.into_iter().map(|(k, v)| (k, mean(&v))).collect()
}

/// Failures over runs, per variant, all maps together.
pub fn overall_fail_rate(records: &[RunRecord]) -> BTreeMap<String, f64> {
    variants(records)
        .into_iter()
        .map(|name| {
            let runs: Vec<_> = records.iter().filter(|r| r.variant == name).collect();
            let failed = runs.iter().filter(|r| !r.succeeded()).count();
            (name, failed as f64 / runs.len() as f64)
        })
        .collect()
}

fn addition_times(records: &[RunRecord], variant: &str, k: usize) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.variant == variant)
        .filter_map(|r| r.times_ms.get(k - 1).copied())
        .collect()
}

pub fn time_to_plan(records: &[RunRecord]) -> Vec<TimeRow> {
    let max_k = records.iter().map(|r| r.times_ms.len()).max().unwrap_or(0);
    let mut rows = Vec::new();
    for k in 1..=max_k {
        for variant in variants(records) {
            let times = addition_times(records, &variant, k);
            if let (Some(mean_ms), Some(median_ms)) = (mean(&times), median(&times)) {
                rows.push(TimeRow {
                    k,
                    variant,
                    samples: times.len(),
                    mean_ms,
                    median_ms,
                });
            }
        }
    }
    rows
}

/// Least-squares slope of mean time-to-plan against k for one variant.
pub fn time_slope(rows: &[TimeRow], variant: &str) -> Option<f64> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.variant == variant)
        .map(|r| (r.k as f64, r.mean_ms))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Time of the middle and the last addition per variant.
pub fn addition_table(records: &[RunRecord], fleet: usize) -> Vec<AdditionRow> {
    let half_k = (fleet / 2).max(1);
    variants(records)
        .into_iter()
        .map(|variant| {
            let half = addition_times(records, &variant, half_k);
            let full = addition_times(records, &variant, fleet);
            AdditionRow {
                half_mean_ms: mean(&half),
                half_median_ms: median(&half),
                full_mean_ms: mean(&full),
                full_median_ms: median(&full),
                variant,
                half_k,
                full_k: fleet,
            }
        })
        .collect()
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

pub fn write_fail_rates<W: Write>(rows: &[FailRateRow], mut out: W) -> io::Result<()> {
    writeln!(out, "map,variant,runs,failures,fail_rate")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:.4}",
            r.map, r.variant, r.runs, r.failures, r.fail_rate
        )?;
    }
    Ok(())
}

pub fn write_total_actions<W: Write>(rows: &[ActionsRow], mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "# means over (assignment, seed) cells where every listed variant succeeded on that map; failed runs excluded"
    )?;
    writeln!(out, "map,variant,cells,mean_total_actions")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.map,
            r.variant,
            r.cells,
            cell(r.mean_total_actions)
        )?;
    }
    Ok(())
}

pub fn write_time_to_plan<W: Write>(rows: &[TimeRow], mut out: W) -> io::Result<()> {
    writeln!(out, "k,variant,samples,mean_ms,median_ms")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.4},{:.4}",
            r.k, r.variant, r.samples, r.mean_ms, r.median_ms
        )?;
    }
    Ok(())
}

pub fn write_addition_table<W: Write>(rows: &[AdditionRow], mut out: W) -> io::Result<()> {
    let Some(first) = rows.first() else {
        return writeln!(out, "variant");
    };
    let (h, f) = (first.half_k, first.full_k);
    writeln!(
        out,
        "variant,k{h}_mean_ms,k{h}_median_ms,k{f}_mean_ms,k{f}_median_ms"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.variant,
            cell(r.half_mean_ms),
            cell(r.half_median_ms),
            cell(r.full_mean_ms),
            cell(r.full_median_ms)
        )?;
    }
    Ok(())
}

/// Writes the tables for `group_by` into `dir` and returns their paths.
///
/// By map: `fail_rate.csv`, `total_actions.csv`. By k: `time_to_plan.csv`
/// and `addition_times.csv` for the middle and last robot.
pub fn write_report(
    records: &[RunRecord],
    group_by: GroupBy,
    dir: &Path,
) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut create = |name: &str| -> io::Result<io::BufWriter<fs::File>> {
        let path = dir.join(name);
        let file = fs::File::create(&path)?;
        written.push(path);
        Ok(io::BufWriter::new(file))
    };
    match group_by {
        GroupBy::Map => {
            write_fail_rates(&fail_rates(records), create("fail_rate.csv")?)?;
            write_total_actions(&mean_total_actions(records), create("total_actions.csv")?)?;
        }
        GroupBy::K => {
            write_time_to_plan(&time_to_plan(records), create("time_to_plan.csv")?)?;
            let fleet = records.iter().map(|r| r.times_ms.len()).max().unwrap_or(0);
            write_addition_table(
                &addition_table(records, fleet),
                create("addition_times.csv")?,
            )?;
        }
    }
    Ok(written)
}
