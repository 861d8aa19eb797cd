//! CSV and JSON writers for run and sweep results. Floats are written with
//! `{}`, the shortest representation that reads back to the same value.

use super::run::{DayMetrics, RunReport};
use super::sweep::SweepRow;
use crate::error::Result;
use serde::Serialize;
use std::path::Path;

/// `step,plant,p_set,q_set,p_real,mpp,bill` in kW / currency.
pub fn write_timeseries(path: impl AsRef<Path>, report: &RunReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["step", "plant", "p_set", "q_set", "p_real", "mpp", "bill"])?;
    for r in report.ledger.records() {
        w.write_record([
            r.step.to_string(),
            report.plant_ids[r.plant].to_string(),
            r.p_set.to_string(),
            r.q_set.to_string(),
            r.p_real.to_string(),
            r.mpp.to_string(),
            r.bill_real.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `step,bus,v_ac,v_pred` in p.u.
pub fn write_voltages(path: impl AsRef<Path>, report: &RunReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["step", "bus", "v_ac", "v_pred"])?;
    for s in &report.steps {
        for (i, (ac, pred)) in s.v_ac.iter().zip(&s.v_pred).enumerate() {
            w.write_record([s.step.to_string(), report.bus_ids[i].to_string(), ac.to_string(), pred.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One metrics table row: which run and the values at one day boundary.
pub struct MetricsRow<'a> {
    pub variant: &'a str,
    pub w: f64,
    pub m: &'a DayMetrics,
}

/// `day,variant,w,curtail_pct,jfi,gini`.
pub fn write_metrics<'a>(path: impl AsRef<Path>, rows: impl IntoIterator<Item = MetricsRow<'a>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["day", "variant", "w", "curtail_pct", "jfi", "gini"])?;
    for r in rows {
        w.write_record([
            r.m.day.to_string(),
            r.variant.to_string(),
            r.w.to_string(),
            r.m.curtail_pct.to_string(),
            r.m.jfi.to_string(),
            r.m.gini.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run_metrics_rows(report: &RunReport) -> impl Iterator<Item = MetricsRow<'_>> {
    report.day_metrics.iter().map(|m| MetricsRow { variant: &report.label, w: report.config.w, m })
}

pub fn sweep_metrics_rows(rows: &[SweepRow]) -> impl Iterator<Item = MetricsRow<'_>> {
    rows.iter()
        .flat_map(|r| r.day_metrics.iter().map(move |m| MetricsRow { variant: r.variant.label(), w: r.w, m }))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(f, value)?;
    Ok(())
}

/// Writes `timeseries.csv`, `voltages.csv`, `metrics.csv` and `report.json`
/// for one run into `dir`.
pub fn write_run_outputs<E: Serialize>(dir: impl AsRef<Path>, report: &RunReport, echo: &E) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    write_timeseries(dir.join("timeseries.csv"), report)?;
    write_voltages(dir.join("voltages.csv"), report)?;
    write_metrics(dir.join("metrics.csv"), run_metrics_rows(report))?;
    #[derive(Serialize)]
    struct Doc<'a, E> {
        config: &'a E,
        summary: &'a RunReport,
    }
    write_json(dir.join("report.json"), &Doc { config: echo, summary: report })
}

/// Writes `metrics.csv` and `report.json` for a sweep into `dir`.
pub fn write_sweep_outputs<E: Serialize>(dir: impl AsRef<Path>, rows: &[SweepRow], echo: &E) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    write_metrics(dir.join("metrics.csv"), sweep_metrics_rows(rows))?;
    #[derive(Serialize)]
    struct Doc<'a, E> {
        config: &'a E,
        rows: &'a [SweepRow],
    }
    write_json(dir.join("report.json"), &Doc { config: echo, rows })
}
