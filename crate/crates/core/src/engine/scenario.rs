//! Scenario configuration.
//!
//! Scenarios are written as TOML. Every field has a default, so a file only
//! needs to state what differs from the reference case study.

use serde::{Deserialize, Serialize};

use super::signal::{whole_multiple, PriceSignal};
use crate::error::{Error, Result, Violation};

/// A parameter drawn uniformly from `value ± (rel_spread·|value| + abs_spread)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamDist {
    pub value: f64,
    pub rel_spread: f64,
    pub abs_spread: f64,
}

impl Default for ParamDist {
    fn default() -> Self {
        Self::fixed(0.0)
    }
}

impl ParamDist {
    pub const fn fixed(value: f64) -> Self {
        Self {
            value,
            rel_spread: 0.0,
            abs_spread: 0.0,
        }
    }

    pub const fn relative(value: f64, rel_spread: f64) -> Self {
        Self {
            value,
            rel_spread,
            abs_spread: 0.0,
        }
    }

    pub const fn absolute(value: f64, abs_spread: f64) -> Self {
        Self {
            value,
            rel_spread: 0.0,
            abs_spread,
        }
    }

    pub fn half_width(&self) -> f64 {
        self.rel_spread * self.value.abs() + self.abs_spread
    }

    pub fn min(&self) -> f64 {
        self.value - self.half_width()
    }

    pub fn max(&self) -> f64 {
        self.value + self.half_width()
    }

    /// Maps `u ∈ [-1, 1]` onto the support.
    pub fn at(&self, u: f64) -> f64 {
        self.value + u * self.half_width()
    }

    fn check(&self, field: &str, positive: bool, out: &mut Vec<Violation>) {
        if !self.value.is_finite() {
            out.push(Violation::new(field, "value must be finite"));
            return;
        }
        if !(self.rel_spread >= 0.0 && self.abs_spread >= 0.0)
            || !(self.rel_spread.is_finite() && self.abs_spread.is_finite())
        {
            out.push(Violation::new(
                field,
                "spreads must be non-negative and finite",
            ));
            return;
        }
        if positive && self.min() <= 0.0 {
            out.push(Violation::new(
                field,
                format!(
                    "support [{}, {}] must stay positive",
                    self.min(),
                    self.max()
                ),
            ));
        } else if !positive && self.min() < 0.0 {
            out.push(Violation::new(
                field,
                format!(
                    "support [{}, {}] must stay non-negative",
                    self.min(),
                    self.max()
                ),
            ));
        }
    }
}

/// Offer policy shared by the population (or one subgroup).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BidCurveSpec {
    pub p0: ParamDist,
    pub p_cap: ParamDist,
    pub gamma1: ParamDist,
    pub gamma2: ParamDist,
    /// p0 and p_cap are confined to this range, $/MWh.
    pub price_range: [f64; 2],
}

impl Default for BidCurveSpec {
    fn default() -> Self {
        Self {
            p0: ParamDist::fixed(30.0),
            p_cap: ParamDist::fixed(50.0),
            gamma1: ParamDist::relative(70.0, 1.0 / 7.0),
            gamma2: ParamDist::relative(70.0, 1.0 / 7.0),
            price_range: [10.0, 50.0],
        }
    }
}

/// A block of loads sharing a near-identical bid curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubgroupSpec {
    /// Relative share of the population.
    pub weight: f64,
    pub p0: f64,
    pub p_cap: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Relative within-group spread applied to all four bid parameters.
    pub spread: f64,
}

impl Default for SubgroupSpec {
    fn default() -> Self {
        Self {
            weight: 1.0,
            p0: 30.0,
            p_cap: 50.0,
            gamma1: 70.0,
            gamma2: 70.0,
            spread: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationSpec {
    pub count: usize,
    /// Ambient temperature, °C.
    pub ambient: f64,
    /// kWh/°C.
    pub capacitance: ParamDist,
    /// °C/kW.
    pub resistance: ParamDist,
    /// Thermal power while cooling, kW.
    pub power: ParamDist,
    pub cop: ParamDist,
    /// °C; a non-zero spread gives heterogeneous set-points.
    pub setpoint: ParamDist,
    /// °C.
    pub deadband: ParamDist,
    /// Per-step temperature noise standard deviation, °C.
    pub noise_std: f64,
    pub bids: BidCurveSpec,
    /// When non-empty, bid curves come from these groups instead of `bids`
    /// (except `price_range`).
    pub subgroups: Vec<SubgroupSpec>,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        Self {
            count: 1000,
            ambient: 32.0,
            capacitance: ParamDist::relative(10.0, 0.1),
            resistance: ParamDist::fixed(2.0),
            power: ParamDist::fixed(14.0),
            cop: ParamDist::fixed(2.5),
            setpoint: ParamDist::fixed(20.0),
            deadband: ParamDist::fixed(0.5),
            noise_std: 0.0,
            bids: BidCurveSpec::default(),
            subgroups: Vec::new(),
        }
    }
}

impl PopulationSpec {
    pub(crate) fn violations(&self, out: &mut Vec<Violation>) {
        if self.count == 0 {
            out.push(Violation::new(
                "population.count",
                "population must not be empty",
            ));
        }
        self.capacitance.check("population.capacitance", true, out);
        self.resistance.check("population.resistance", true, out);
        self.power.check("population.power", true, out);
        self.cop.check("population.cop", true, out);
        self.deadband.check("population.deadband", true, out);
        if !self.setpoint.value.is_finite()
            || self.setpoint.half_width().is_nan()
            || self.setpoint.half_width() < 0.0
        {
            out.push(Violation::new(
                "population.setpoint",
                "set-point must be finite with non-negative spread",
            ));
        }
        if !(self.ambient.is_finite() && self.ambient > self.setpoint.max()) {
            out.push(Violation::new(
                "population.ambient",
                format!(
                    "ambient {} °C must exceed every set-point (up to {} °C) for cooling loads",
                    self.ambient,
                    self.setpoint.max()
                ),
            ));
        }
        if self.power.min() * self.resistance.min() <= self.deadband.max() {
            out.push(Violation::new(
                "population.power",
                "temperature gain P·R must exceed the deadband for every load",
            ));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            out.push(Violation::new(
                "population.noise_std",
                "must be non-negative",
            ));
        }
        let [lo, hi] = self.bids.price_range;
        if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
            out.push(Violation::new(
                "population.bids.price_range",
                format!("need 0 <= low <= high, got [{lo}, {hi}]"),
            ));
        }
        self.bids.p0.check("population.bids.p0", false, out);
        self.bids.p_cap.check("population.bids.p_cap", false, out);
        self.bids.gamma1.check("population.bids.gamma1", false, out);
        self.bids.gamma2.check("population.bids.gamma2", false, out);
        if !self.subgroups.is_empty() && self.subgroups.len() > self.count {
            out.push(Violation::new(
                "population.subgroups",
                format!(
                    "{} subgroups for {} loads",
                    self.subgroups.len(),
                    self.count
                ),
            ));
        }
        for (i, g) in self.subgroups.iter().enumerate() {
            let field = format!("population.subgroups[{i}]");
            if !(g.weight.is_finite() && g.weight > 0.0) {
                out.push(Violation::new(
                    format!("{field}.weight"),
                    "must be positive",
                ));
            }
            let values = [g.p0, g.p_cap, g.gamma1, g.gamma2, g.spread];
            if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || g.spread >= 1.0 {
                out.push(Violation::new(
                    field,
                    "bid parameters must be non-negative and spread below 1",
                ));
            }
        }
    }
}

/// Feeder capacity, either absolute or as a fraction of Σ P/η.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeederSpec {
    pub fraction: f64,
    /// Overrides `fraction` when set, kW.
    pub limit_kw: Option<f64>,
}

impl Default for FeederSpec {
    fn default() -> Self {
        Self {
            fraction: 0.7,
            limit_kw: None,
        }
    }
}

impl FeederSpec {
    pub fn resolve(&self, capacity: f64) -> f64 {
        self.limit_kw.unwrap_or(self.fraction * capacity)
    }
}

/// Full experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub horizon_min: f64,
    /// Physics step h, s.
    pub step_s: f64,
    pub market_interval_s: f64,
    /// Bidding temperature prediction horizon, s.
    pub lookahead_s: f64,
    /// Price increment above the top bid when no bid group fits, $/MWh.
    pub price_tick: f64,
    pub feeder: FeederSpec,
    pub population: PopulationSpec,
    pub price: PriceSignal,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            seed: 1,
            horizon_min: 1440.0,
            step_s: 10.0,
            market_interval_s: 300.0,
            lookahead_s: 150.0,
            price_tick: crate::market::DEFAULT_PRICE_TICK,
            feeder: FeederSpec::default(),
            population: PopulationSpec::default(),
            price: PriceSignal::default(),
        }
    }
}

impl Scenario {
    /// Parses a TOML scenario. Unknown keys are rejected.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|span| line_column(text, span.start))
                .unwrap_or((0, 0));
            Error::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn interval_min(&self) -> f64 {
        self.market_interval_s / 60.0
    }

    pub fn steps_per_interval(&self) -> usize {
        (self.market_interval_s / self.step_s).round() as usize
    }

    pub fn intervals(&self) -> usize {
        (self.horizon_min * 60.0 / self.market_interval_s).round() as usize
    }

    /// Every violated invariant, not just the first.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let step_ok = self.step_s.is_finite() && self.step_s > 0.0;
        let interval_ok = self.market_interval_s.is_finite() && self.market_interval_s > 0.0;
        if !step_ok {
            out.push(Violation::new(
                "step_s",
                format!("must be positive, got {}", self.step_s),
            ));
        }
        if !interval_ok {
            out.push(Violation::new(
                "market_interval_s",
                format!("must be positive, got {}", self.market_interval_s),
            ));
        } else if step_ok && !whole_multiple(self.market_interval_s, self.step_s) {
            out.push(Violation::new(
                "market_interval_s",
                format!(
                    "{} s is not a whole number of {} s physics steps",
                    self.market_interval_s, self.step_s
                ),
            ));
        }
        if !(self.horizon_min.is_finite() && self.horizon_min > 0.0) {
            out.push(Violation::new(
                "horizon_min",
                format!("must be positive, got {}", self.horizon_min),
            ));
        } else if interval_ok && !whole_multiple(self.horizon_min * 60.0, self.market_interval_s) {
            out.push(Violation::new(
                "horizon_min",
                format!(
                    "{} min is not a whole number of {} s market intervals",
                    self.horizon_min, self.market_interval_s
                ),
            ));
        }
        if step_ok && !(self.lookahead_s >= 0.0 && whole_multiple(self.lookahead_s, self.step_s)) {
            out.push(Violation::new(
                "lookahead_s",
                format!(
                    "{} s is not a non-negative multiple of the {} s step",
                    self.lookahead_s, self.step_s
                ),
            ));
        }
        if !(self.price_tick.is_finite() && self.price_tick > 0.0) {
            out.push(Violation::new("price_tick", "must be positive"));
        }
        match self.feeder.limit_kw {
            Some(limit) if !(limit.is_finite() && limit > 0.0) => out.push(Violation::new(
                "feeder.limit_kw",
                format!("feeder limit must be positive, got {limit}"),
            )),
            None if !(self.feeder.fraction.is_finite() && self.feeder.fraction > 0.0) => {
                out.push(Violation::new(
                    "feeder.fraction",
                    format!("must be positive, got {}", self.feeder.fraction),
                ))
            }
            _ => {}
        }
        self.population.violations(&mut out);
        if interval_ok {
            out.extend(self.price.violations(self.interval_min(), self.intervals()));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(v))
        }
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}
