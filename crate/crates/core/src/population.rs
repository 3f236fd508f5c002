//! Thermal physics of the load population.
//!
//! Each load is a first-order thermal mass driven toward ambient when idle and
//! toward `ambient - P·R` while cooling. A hysteresis thermostat (`m`) and the
//! market dispatch flag (`v`) must both be set for a load to cool and draw power.

use serde::{Deserialize, Serialize};

use crate::bidding::Bid;
use crate::error::{Error, Result};
use crate::power::ExactKw;

const SECONDS_PER_HOUR: f64 = 3600.0;

/// Physical and bidding parameters of one air-conditioning load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TclParams {
    pub id: usize,
    /// Subgroup label; zero when the population has no subgroups.
    pub group: usize,
    /// Thermal capacitance, kWh/°C.
    pub capacitance: f64,
    /// Thermal resistance, °C/kW.
    pub resistance: f64,
    /// Thermal transfer rate while cooling, kW.
    pub power: f64,
    /// Coefficient of performance.
    pub cop: f64,
    /// Set-point, °C.
    pub setpoint: f64,
    /// Full deadband width, °C.
    pub deadband: f64,
    /// Bid price at the set-point, $/MWh.
    pub p0: f64,
    /// Maximum bid price, $/MWh.
    pub p_cap: f64,
    /// Bid slope above the set-point, $/MWh per °C.
    pub gamma1: f64,
    /// Bid slope below the set-point, $/MWh per °C.
    pub gamma2: f64,
    /// Standard deviation of the per-step temperature noise, °C.
    pub noise_std: f64,
}

impl TclParams {
    /// Typical residential air conditioner with a 10–50 $/MWh bid curve.
    pub fn reference(id: usize) -> Self {
        Self {
            id,
            group: 0,
            capacitance: 10.0,
            resistance: 2.0,
            power: 14.0,
            cop: 2.5,
            setpoint: 20.0,
            deadband: 0.5,
            p0: 30.0,
            p_cap: 50.0,
            gamma1: 80.0,
            gamma2: 80.0,
            noise_std: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::InvalidParams {
                id: self.id,
                reason,
            })
        };
        let positive = [
            ("capacitance", self.capacitance),
            ("resistance", self.resistance),
            ("power", self.power),
            ("cop", self.cop),
            ("deadband", self.deadband),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return fail(format!("{name} must be positive and finite, got {value}"));
            }
        }
        if !self.setpoint.is_finite() {
            return fail(format!("setpoint must be finite, got {}", self.setpoint));
        }
        if !(self.p0 >= 0.0 && self.p0 <= self.p_cap && self.p_cap.is_finite()) {
            return fail(format!(
                "bid prices must satisfy 0 <= p0 <= p_cap, got p0={} p_cap={}",
                self.p0, self.p_cap
            ));
        }
        for (name, value) in [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("noise_std", self.noise_std),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return fail(format!("{name} must be non-negative, got {value}"));
            }
        }
        if self.temperature_gain() <= self.deadband {
            return fail(format!(
                "temperature gain P·R = {} °C cannot traverse deadband {} °C",
                self.temperature_gain(),
                self.deadband
            ));
        }
        Ok(())
    }

    pub fn theta_min(&self) -> f64 {
        self.setpoint - self.deadband / 2.0
    }

    pub fn theta_max(&self) -> f64 {
        self.setpoint + self.deadband / 2.0
    }

    /// θ^g = P·R, the steady-state temperature drop produced by cooling.
    pub fn temperature_gain(&self) -> f64 {
        self.power * self.resistance
    }

    /// a = exp(-h / (C·R)) for a step of `step_s` seconds.
    pub fn decay(&self, step_s: f64) -> f64 {
        (-step_s / (self.capacitance * self.resistance * SECONDS_PER_HOUR)).exp()
    }

    /// Electrical draw while cooling, kW.
    pub fn electrical_power(&self) -> f64 {
        self.power / self.cop
    }

    /// Long-run on-fraction of the free-running thermostat.
    pub fn natural_duty(&self, theta_ambient: f64) -> f64 {
        ((theta_ambient - self.setpoint) / self.temperature_gain()).clamp(0.0, 1.0)
    }

    pub fn coefficients(&self, step_s: f64) -> StepCoefficients {
        StepCoefficients {
            decay: self.decay(step_s),
            gain: self.temperature_gain(),
            theta_min: self.theta_min(),
            theta_max: self.theta_max(),
        }
    }
}

/// Per-load constants of the discretized dynamics for a fixed step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCoefficients {
    pub decay: f64,
    pub gain: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl StepCoefficients {
    pub fn hysteresis(&self, state: TclState) -> TclState {
        let m = if state.theta < self.theta_min {
            false
        } else if state.theta > self.theta_max {
            true
        } else {
            state.m
        };
        TclState { m, ..state }
    }

    pub fn advance(&self, state: TclState, theta_ambient: f64, noise: f64) -> TclState {
        let cooling = if state.m && state.v { self.gain } else { 0.0 };
        let theta =
            self.decay * state.theta + (1.0 - self.decay) * (theta_ambient - cooling) + noise;
        TclState { theta, ..state }
    }
}

/// Evolving state of one load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TclState {
    /// Indoor temperature, °C.
    pub theta: f64,
    /// Thermostat switch.
    pub m: bool,
    /// Market dispatch decision; persists for a whole market interval.
    pub v: bool,
}

impl TclState {
    pub fn new(theta: f64, m: bool, v: bool) -> Self {
        Self { theta, m, v }
    }

    /// True when the load is both switched on and dispatched.
    pub fn consuming(&self) -> bool {
        self.m && self.v
    }
}

/// Thermostat update: switch off below θ^min, on above θ^max, hold otherwise.
pub fn hysteresis_update(state: TclState, params: &TclParams) -> TclState {
    let m = if state.theta < params.theta_min() {
        false
    } else if state.theta > params.theta_max() {
        true
    } else {
        state.m
    };
    TclState { m, ..state }
}

/// One step of θ' = a·θ + (1−a)·(θ^a − m·v·θ^g) + w.
pub fn thermal_step(
    state: TclState,
    params: &TclParams,
    theta_ambient: f64,
    step_s: f64,
    noise: f64,
) -> TclState {
    params
        .coefficients(step_s)
        .advance(state, theta_ambient, noise)
}

/// A population of loads sharing one ambient temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub params: Vec<TclParams>,
    pub states: Vec<TclState>,
    pub theta_ambient: f64,
    pub rng_seed: u64,
}

impl Population {
    pub fn new(
        params: Vec<TclParams>,
        states: Vec<TclState>,
        theta_ambient: f64,
        rng_seed: u64,
    ) -> Result<Self> {
        if params.len() != states.len() {
            return Err(Error::Config(format!(
                "{} parameter sets but {} states",
                params.len(),
                states.len()
            )));
        }
        for p in &params {
            p.validate()?;
            if theta_ambient.is_nan() || theta_ambient <= p.setpoint {
                return Err(Error::InvalidParams {
                    id: p.id,
                    reason: format!(
                        "ambient {theta_ambient} °C must exceed the set-point {} °C of a cooling load",
                        p.setpoint
                    ),
                });
            }
        }
        Ok(Self {
            params,
            states,
            theta_ambient,
            rng_seed,
        })
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Σ P/η over all loads, the power drawn if every load cooled at once.
    pub fn capacity(&self) -> f64 {
        self.params
            .iter()
            .map(|p| ExactKw::from_kw(p.electrical_power()))
            .sum::<ExactKw>()
            .kw()
    }

    pub(crate) fn exact_power(&self) -> ExactKw {
        self.params
            .iter()
            .zip(&self.states)
            .filter(|(_, s)| s.consuming())
            .map(|(p, _)| ExactKw::from_kw(p.electrical_power()))
            .sum()
    }

    pub fn on_count(&self) -> usize {
        self.states.iter().filter(|s| s.consuming()).count()
    }
}

/// Σ m·v·P/η, kW.
pub fn aggregate_power(population: &Population) -> f64 {
    population.exact_power().kw()
}

/// Sets each load's dispatch flag to `bid >= clearing_price`.
pub fn apply_dispatch(
    population: &mut Population,
    clearing_price: f64,
    bids: &[Bid],
) -> Result<()> {
    if bids.len() != population.len() {
        return Err(Error::Misaligned(format!(
            "{} bids for {} loads",
            bids.len(),
            population.len()
        )));
    }
    for (i, ((params, state), bid)) in population
        .params
        .iter()
        .zip(population.states.iter_mut())
        .zip(bids)
        .enumerate()
    {
        if bid.tcl_id != params.id {
            return Err(Error::Misaligned(format!(
                "position {i} holds a bid from TCL {} but TCL {}",
                bid.tcl_id, params.id
            )));
        }
        state.v = bid.price >= clearing_price;
    }
    Ok(())
}
