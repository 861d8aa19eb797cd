use super::profiles::Profiles;
use super::run::{run_simulation, DayMetrics, SimOptions};
use crate::dispatch::{DispatchConfig, Variant};
use crate::error::{Error, Result};
use crate::grid::Network;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub variant: Variant,
    pub w: f64,
    pub day_metrics: Vec<DayMetrics>,
    pub ac_within_slack: f64,
    /// Set when this run failed; the sweep carries on.
    pub error: Option<String>,
}

impl SweepRow {
    pub fn last(&self) -> Option<&DayMetrics> {
        self.day_metrics.last()
    }
}

/// One full simulation per `(variant, w)` pair, run in parallel. Rows come
/// back sorted by `w`, then by variant.
pub fn pareto_sweep(
    net: &Network,
    cfg_base: &DispatchConfig,
    profiles: &Profiles,
    opts: &SimOptions,
    variants: &[Variant],
    weights: &[f64],
) -> Result<Vec<SweepRow>> {
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
        return Err(Error::Config(format!("sweep weights must be finite and >= 0, got {w}")));
    }
    let mut jobs: Vec<(Variant, f64)> =
        variants.iter().flat_map(|&v| weights.iter().map(move |&w| (v, w))).collect();
    jobs.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    jobs.dedup();
    let rows = jobs
        .par_iter()
        .map(|&(variant, w)| {
            let cfg = cfg_base.clone().with_variant(variant, w);
            let label = format!("{variant}");
            match run_simulation(net, &cfg, profiles, opts, &label) {
                Ok(r) => SweepRow {
                    variant,
                    w,
                    day_metrics: r.day_metrics,
                    ac_within_slack: r.ac_within_slack,
                    error: None,
                },
                Err(e) => SweepRow { variant, w, day_metrics: Vec::new(), ac_within_slack: 0.0, error: Some(e.to_string()) },
            }
        })
        .collect();
    Ok(rows)
}
