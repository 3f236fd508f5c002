//! Temperature-to-price bidding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::{TclParams, TclState};

/// One load's offer for the coming market interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bid {
    pub tcl_id: usize,
    /// $/MWh.
    pub price: f64,
    /// Average power if dispatched for the whole interval, kW.
    pub quantity: f64,
}

/// Number of whole physics steps in `span_s`, or `None` if it is not a multiple of `step_s`.
pub(crate) fn whole_steps(span_s: f64, step_s: f64) -> Option<usize> {
    if !(span_s >= 0.0 && step_s > 0.0 && span_s.is_finite()) {
        return None;
    }
    let n = (span_s / step_s).round();
    ((n * step_s - span_s).abs() <= 1e-9 * span_s.max(step_s)).then_some(n as usize)
}

/// Temperature predicted `lookahead_s` ahead by iterating the noise-free
/// dynamics with the current `m·v` held fixed.
pub fn temperature_for_bidding(
    state: TclState,
    params: &TclParams,
    theta_ambient: f64,
    lookahead_s: f64,
    step_s: f64,
) -> Result<f64> {
    let steps = whole_steps(lookahead_s, step_s).ok_or_else(|| {
        Error::Config(format!(
            "bidding lookahead {lookahead_s} s is not a non-negative multiple of the {step_s} s step"
        ))
    })?;
    Ok(predict(
        state,
        params.coefficients(step_s).decay,
        params.temperature_gain(),
        theta_ambient,
        steps,
    ))
}

pub(crate) fn predict(
    state: TclState,
    decay: f64,
    gain: f64,
    theta_ambient: f64,
    steps: usize,
) -> f64 {
    let target = if state.consuming() {
        theta_ambient - gain
    } else {
        theta_ambient
    };
    let mut theta = state.theta;
    for _ in 0..steps {
        theta = decay * theta + (1.0 - decay) * target;
    }
    theta
}

/// Piecewise-linear bid curve: zero below θ^min, `p_cap` above θ^max, slope
/// γ1 above and γ2 below the set-point, clamped to `[0, p_cap]`.
pub fn make_bid(theta_bid: f64, params: &TclParams) -> Bid {
    Bid {
        tcl_id: params.id,
        price: bid_price(theta_bid, params),
        quantity: params.electrical_power(),
    }
}

fn bid_price(theta: f64, p: &TclParams) -> f64 {
    let raw = if theta < p.theta_min() {
        0.0
    } else if theta > p.theta_max() {
        p.p_cap
    } else if theta >= p.setpoint {
        p.p0 + p.gamma1 * (theta - p.setpoint)
    } else {
        // Falls as the room cools; the curve is non-decreasing in θ.
        p.p0 - p.gamma2 * (p.setpoint - theta)
    };
    raw.clamp(0.0, p.p_cap)
}
