//! CSV writers. Every file starts with a header row; units are part of the
//! column names.

use std::io::Write;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::Trace;
use crate::error::Result;
use crate::metrics::MetricsReport;

pub const TRACE_COLUMNS: [&str; 13] = [
    "interval",
    "start_min",
    "base_price_usd_per_mwh",
    "clearing_price_usd_per_mwh",
    "base_demand_kw",
    "cleared_demand_kw",
    "constrained",
    "dispatched_count",
    "avg_demand_kw",
    "on_fraction",
    "bid_mean_usd_per_mwh",
    "bid_max_usd_per_mwh",
    "bid_digest",
];

pub const STEP_COLUMNS: [&str; 7] = [
    "step",
    "time_min",
    "power_kw",
    "on_fraction",
    "theta_mean_c",
    "theta_min_c",
    "theta_max_c",
];

const METRIC_COLUMNS: [&str; 8] = [
    "interval",
    "start_min",
    "sync_index",
    "dispersion_c",
    "price_divergence_usd_per_mwh",
    "feeder_hit",
    "window_peak_to_peak_kw",
    "window_dominant_period_min",
];

/// One row per market interval.
pub fn write_trace_csv<W: Write>(trace: &Trace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for r in &trace.intervals {
        w.write_record([
            r.index.to_string(),
            r.start_min.to_string(),
            r.base_price.to_string(),
            r.clearing_price.to_string(),
            r.base_demand.to_string(),
            r.cleared_demand.to_string(),
            u8::from(r.constrained).to_string(),
            r.dispatched.to_string(),
            r.avg_demand.to_string(),
            r.on_fraction.to_string(),
            r.bid_mean.to_string(),
            r.bid_max.to_string(),
            r.bid_digest.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Every `decimate`-th physics step.
pub fn write_steps_csv<W: Write>(trace: &Trace, decimate: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STEP_COLUMNS)?;
    for s in trace.steps.iter().step_by(decimate.max(1)) {
        w.write_record([
            s.index.to_string(),
            s.time_min.to_string(),
            s.power.to_string(),
            s.on_fraction.to_string(),
            s.theta_mean.to_string(),
            s.theta_min.to_string(),
            s.theta_max.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per market interval; window columns describe the window starting
/// at that interval and are empty where no window starts.
pub fn write_metrics_csv<W: Write>(report: &MetricsReport, out: W) -> Result<()> {
    let groups = report.intervals.first().map_or(0, |m| m.group_sync.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = METRIC_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((0..groups).map(|g| format!("group{g}_sync_index")));
    w.write_record(&header)?;
    for m in &report.intervals {
        let window = report.windows.iter().find(|w| w.start_index == m.index);
        let mut row = vec![
            m.index.to_string(),
            m.start_min.to_string(),
            m.sync_index.to_string(),
            m.dispersion.to_string(),
            m.price_divergence.to_string(),
            u8::from(m.feeder_hit).to_string(),
            window
                .map(|w| w.peak_to_peak.to_string())
                .unwrap_or_default(),
            window
                .and_then(|w| w.dominant_period_min)
                .map(|p| p.to_string())
                .unwrap_or_default(),
        ];
        row.extend(m.group_sync.iter().map(|g| g.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Sorted ids of `count` loads chosen without replacement.
pub fn sample_tcls(population: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    let mut ids = sample(&mut rng, population, count.min(population)).into_vec();
    ids.sort_unstable();
    ids
}

/// Bid price per interval for a sample of loads, one column per load.
pub fn write_bids_sample_csv<W: Write>(trace: &Trace, ids: &[usize], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["interval".to_string(), "start_min".to_string()];
    header.extend(ids.iter().map(|id| format!("tcl{id}_bid_usd_per_mwh")));
    w.write_record(&header)?;
    for (r, prices) in trace.intervals.iter().zip(&trace.bid_prices) {
        let mut row = vec![r.index.to_string(), r.start_min.to_string()];
        row.extend(ids.iter().map(|&id| prices[id].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
