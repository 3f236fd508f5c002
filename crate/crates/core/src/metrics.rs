//! Synchronization and oscillation statistics.
//!
//! Each load's position on its thermostat cycle is mapped to a phase: cooling
//! from θ^max to θ^min covers [0, π), warming back covers [π, 2π). The
//! synchronization index is the magnitude of the mean unit phasor, 1 when all
//! loads sit at the same point of the cycle. Demand oscillations are measured
//! per sliding window by peak-to-peak amplitude and the period of the largest
//! non-DC DFT bin.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::engine::{Snapshot, Trace};
use crate::population::TclParams;

/// Phase in `[0, 2π)` of a load on its hysteresis cycle.
pub fn cycle_phase(theta: f64, m: bool, params: &TclParams) -> f64 {
    let x = ((theta - params.theta_min()) / params.deadband).clamp(0.0, 1.0);
    if m {
        PI * (1.0 - x)
    } else {
        PI * (1.0 + x)
    }
}

fn order_parameter<'a>(members: impl Iterator<Item = (f64, bool, &'a TclParams)>) -> f64 {
    let (mut re, mut im, mut n) = (0.0, 0.0, 0usize);
    for (theta, m, p) in members {
        let phi = cycle_phase(theta, m, p);
        re += phi.cos();
        im += phi.sin();
        n += 1;
    }
    if n == 0 {
        return 0.0;
    }
    (re / n as f64).hypot(im / n as f64).min(1.0)
}

/// Order parameter of the whole snapshot; 0 for an empty population.
pub fn sync_index(snapshot: &Snapshot, params: &[TclParams]) -> f64 {
    order_parameter(
        snapshot
            .theta
            .iter()
            .zip(&snapshot.m)
            .zip(params)
            .map(|((&t, &m), p)| (t, m, p)),
    )
}

/// Order parameter restricted to loads of one subgroup.
pub fn group_sync_index(snapshot: &Snapshot, params: &[TclParams], group: usize) -> f64 {
    order_parameter(
        snapshot
            .theta
            .iter()
            .zip(&snapshot.m)
            .zip(params)
            .filter(|(_, p)| p.group == group)
            .map(|((&t, &m), p)| (t, m, p)),
    )
}

/// Standard deviation of θ − θ^s across the population, °C.
pub fn temperature_dispersion(snapshot: &Snapshot, params: &[TclParams]) -> f64 {
    let n = snapshot.theta.len();
    if n == 0 {
        return 0.0;
    }
    let dev: Vec<f64> = snapshot
        .theta
        .iter()
        .zip(params)
        .map(|(t, p)| t - p.setpoint)
        .collect();
    let mean = dev.iter().sum::<f64>() / n as f64;
    (dev.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    /// kW.
    pub peak_to_peak: f64,
    /// `None` when the window carries no oscillation.
    pub dominant_period_min: Option<f64>,
}

/// Peak-to-peak amplitude and dominant period of a demand window sampled every
/// `sample_min` minutes. Windows shorter than 4 samples get no period.
pub fn demand_oscillation(series: &[f64], sample_min: f64) -> Oscillation {
    let (lo, hi) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let peak_to_peak = if series.is_empty() { 0.0 } else { hi - lo };
    Oscillation {
        peak_to_peak,
        dominant_period_min: dominant_period(series, sample_min),
    }
}

fn dominant_period(series: &[f64], sample_min: f64) -> Option<f64> {
    let n = series.len();
    if n < 4 {
        return None;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = series
        .iter()
        .map(|&x| Complex::new(x - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let scale = series.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    let floor = 1e-9 * scale * n as f64;
    let mut best: Option<(usize, f64)> = None;
    for (k, c) in buf.iter().enumerate().take(n / 2 + 1).skip(1) {
        let mag = c.norm();
        if mag > floor && best.is_none_or(|(_, m)| mag > m * (1.0 + 1e-9)) {
            best = Some((k, mag));
        }
    }
    best.map(|(k, _)| n as f64 * sample_min / k as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsConfig {
    /// Sliding window length in market intervals.
    pub window_intervals: usize,
    /// Window stride in market intervals.
    pub stride_intervals: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            window_intervals: 24,
            stride_intervals: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalMetrics {
    pub index: usize,
    pub start_min: f64,
    pub sync_index: f64,
    /// Per-subgroup order parameters; empty without subgroups.
    pub group_sync: Vec<f64>,
    /// °C.
    pub dispersion: f64,
    /// Clearing minus base price, $/MWh.
    pub price_divergence: f64,
    pub feeder_hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowMetrics {
    pub start_index: usize,
    pub start_min: f64,
    pub end_min: f64,
    pub peak_to_peak: f64,
    pub dominant_period_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub intervals: Vec<IntervalMetrics>,
    pub windows: Vec<WindowMetrics>,
    /// Intervals in which the feeder limit forced the price up.
    pub feeder_hits: usize,
    pub max_sync_index: f64,
    pub max_peak_to_peak: f64,
}

impl MetricsReport {
    pub fn compute(trace: &Trace, config: &MetricsConfig) -> Self {
        let groups = if trace.groups() > 1 {
            trace.groups()
        } else {
            0
        };
        let intervals: Vec<IntervalMetrics> = trace
            .intervals
            .iter()
            .zip(&trace.snapshots)
            .map(|(r, snap)| IntervalMetrics {
                index: r.index,
                start_min: r.start_min,
                sync_index: sync_index(snap, &trace.params),
                group_sync: (0..groups)
                    .map(|g| group_sync_index(snap, &trace.params, g))
                    .collect(),
                dispersion: temperature_dispersion(snap, &trace.params),
                price_divergence: r.clearing_price - r.base_price,
                feeder_hit: r.constrained,
            })
            .collect();

        let demand = trace.avg_demand();
        let dt = trace.interval_min();
        let window = config.window_intervals.max(1).min(demand.len().max(1));
        let stride = config.stride_intervals.max(1);
        let windows: Vec<WindowMetrics> = if demand.is_empty() {
            Vec::new()
        } else {
            (0..=demand.len() - window)
                .step_by(stride)
                .map(|start| {
                    let osc = demand_oscillation(&demand[start..start + window], dt);
                    WindowMetrics {
                        start_index: start,
                        start_min: start as f64 * dt,
                        end_min: (start + window) as f64 * dt,
                        peak_to_peak: osc.peak_to_peak,
                        dominant_period_min: osc.dominant_period_min,
                    }
                })
                .collect()
        };

        MetricsReport {
            feeder_hits: intervals.iter().filter(|m| m.feeder_hit).count(),
            max_sync_index: intervals.iter().map(|m| m.sync_index).fold(0.0, f64::max),
            max_peak_to_peak: windows.iter().map(|w| w.peak_to_peak).fold(0.0, f64::max),
            intervals,
            windows,
        }
    }
}
