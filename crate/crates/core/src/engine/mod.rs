//! The multi-rate closed loop: market clearing every interval, thermal physics
//! every step in between.

mod generate;
mod scenario;
mod signal;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use generate::generate_population;
pub use scenario::{BidCurveSpec, FeederSpec, ParamDist, PopulationSpec, Scenario, SubgroupSpec};
pub use signal::{price_signal_value, PriceSignal, PriceStep};

use crate::bidding::{self, make_bid, Bid};
use crate::error::Result;
use crate::market::{build_demand_curve, ClearingRule};
use crate::population::{apply_dispatch, Population, StepCoefficients, TclParams};
use crate::power::ExactKw;

/// Market outcome and realized demand for one interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub index: usize,
    pub start_min: f64,
    pub base_price: f64,
    pub clearing_price: f64,
    pub base_demand: f64,
    pub cleared_demand: f64,
    pub constrained: bool,
    /// Loads with `v = 1` for this interval.
    pub dispatched: usize,
    /// Mean realized aggregate power over the interval's physics steps, kW.
    pub avg_demand: f64,
    pub on_fraction: f64,
    pub bid_mean: f64,
    pub bid_max: f64,
    /// Leading 8 bytes of SHA-256 over the bid list, hex.
    pub bid_digest: String,
}

/// Aggregate observables over one physics step `[t, t + h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub index: usize,
    pub time_min: f64,
    /// kW.
    pub power: f64,
    pub on_fraction: f64,
    pub theta_mean: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

/// Population temperatures and thermostat states at a market boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub theta: Vec<f64>,
    pub m: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub name: String,
    pub seed: u64,
    pub step_s: f64,
    pub interval_s: f64,
    pub steps_per_interval: usize,
    pub feeder_limit: f64,
    /// Σ P/η, kW.
    pub capacity: f64,
    pub theta_ambient: f64,
    pub params: Vec<TclParams>,
    pub intervals: Vec<IntervalRecord>,
    pub steps: Vec<StepRecord>,
    /// State at each interval's bidding time.
    pub snapshots: Vec<Snapshot>,
    /// Bid price of every load in every interval, $/MWh.
    pub bid_prices: Vec<Vec<f64>>,
}

impl Trace {
    pub fn interval_min(&self) -> f64 {
        self.interval_s / 60.0
    }

    /// 5-minute (one market interval) average demand series, kW.
    pub fn avg_demand(&self) -> Vec<f64> {
        self.intervals.iter().map(|r| r.avg_demand).collect()
    }

    pub fn groups(&self) -> usize {
        self.params.iter().map(|p| p.group + 1).max().unwrap_or(0)
    }
}

/// Validates the scenario, generates its population and runs the closed loop.
pub fn run(scenario: &Scenario) -> Result<Trace> {
    scenario.validate()?;
    let population = generate_population(&scenario.population, scenario.seed)?;
    run_with_population(scenario, population)
}

/// Runs the closed loop from an explicit initial population.
pub fn run_with_population(scenario: &Scenario, mut population: Population) -> Result<Trace> {
    scenario.validate()?;
    let capacity = population.capacity();
    let feeder_limit = scenario.feeder.resolve(capacity);
    let rule = ClearingRule {
        feeder_limit,
        price_tick: scenario.price_tick,
    };
    let h = scenario.step_s;
    let steps_per_interval = scenario.steps_per_interval();
    let lookahead_steps = (scenario.lookahead_s / h).round() as usize;
    let intervals = scenario.intervals();
    let interval_min = scenario.interval_min();
    let ambient = population.theta_ambient;
    let n = population.len();

    let coefficients: Vec<StepCoefficients> = population
        .params
        .iter()
        .map(|p| p.coefficients(h))
        .collect();
    let draws: Vec<ExactKw> = population
        .params
        .iter()
        .map(|p| ExactKw::from_kw(p.electrical_power()))
        .collect();
    let noise_std: Vec<f64> = population.params.iter().map(|p| p.noise_std).collect();
    let noisy = noise_std.iter().any(|&s| s > 0.0);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    noise_rng.set_stream(1);

    let mut trace = Trace {
        name: scenario.name.clone(),
        seed: scenario.seed,
        step_s: h,
        interval_s: scenario.market_interval_s,
        steps_per_interval,
        feeder_limit,
        capacity,
        theta_ambient: ambient,
        params: population.params.clone(),
        intervals: Vec::with_capacity(intervals),
        steps: Vec::with_capacity(intervals * steps_per_interval),
        snapshots: Vec::with_capacity(intervals),
        bid_prices: Vec::with_capacity(intervals),
    };
    let mut bids: Vec<Bid> = Vec::with_capacity(n);
    let mut noise = vec![0.0; n];

    for k in 0..intervals {
        trace.snapshots.push(Snapshot {
            theta: population.states.iter().map(|s| s.theta).collect(),
            m: population.states.iter().map(|s| s.m).collect(),
        });

        bids.clear();
        for ((p, s), c) in population
            .params
            .iter()
            .zip(&population.states)
            .zip(&coefficients)
        {
            let theta_bid = bidding::predict(*s, c.decay, c.gain, ambient, lookahead_steps);
            bids.push(make_bid(theta_bid, p));
        }
        let base_price = scenario.price.value(k, interval_min);
        let curve = build_demand_curve(&bids)?;
        let cleared = rule.clear(&curve, base_price)?;
        apply_dispatch(&mut population, cleared.clearing_price, &bids)?;
        let dispatched = population.states.iter().filter(|s| s.v).count();

        let mut energy = ExactKw::ZERO;
        let mut on_steps = 0usize;
        for j in 0..steps_per_interval {
            if noisy {
                for (w, &std) in noise.iter_mut().zip(&noise_std) {
                    let z: f64 = StandardNormal.sample(&mut noise_rng);
                    *w = std * z;
                }
            }
            let mut power = ExactKw::ZERO;
            let mut on = 0usize;
            let (mut sum, mut lo, mut hi) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
            for (i, state) in population.states.iter_mut().enumerate() {
                let c = &coefficients[i];
                sum += state.theta;
                lo = lo.min(state.theta);
                hi = hi.max(state.theta);
                let switched = c.hysteresis(*state);
                if switched.consuming() {
                    power += draws[i];
                    on += 1;
                }
                *state = c.advance(switched, ambient, noise[i]);
            }
            energy += power;
            on_steps += on;
            let index = k * steps_per_interval + j;
            trace.steps.push(StepRecord {
                index,
                time_min: index as f64 * h / 60.0,
                power: power.kw(),
                on_fraction: on as f64 / n.max(1) as f64,
                theta_mean: sum / n.max(1) as f64,
                theta_min: lo,
                theta_max: hi,
            });
        }

        let prices: Vec<f64> = bids.iter().map(|b| b.price).collect();
        trace.intervals.push(IntervalRecord {
            index: k,
            start_min: k as f64 * interval_min,
            base_price,
            clearing_price: cleared.clearing_price,
            base_demand: cleared.base_demand,
            cleared_demand: cleared.cleared_demand,
            constrained: cleared.constrained,
            dispatched,
            avg_demand: energy.mean_of(steps_per_interval).kw(),
            on_fraction: on_steps as f64 / (n.max(1) * steps_per_interval) as f64,
            bid_mean: prices.iter().sum::<f64>() / n.max(1) as f64,
            bid_max: prices.iter().copied().fold(0.0, f64::max),
            bid_digest: digest(&bids),
        });
        trace.bid_prices.push(prices);
    }
    Ok(trace)
}

fn digest(bids: &[Bid]) -> String {
    let mut hasher = Sha256::new();
    for b in bids {
        hasher.update((b.tcl_id as u64).to_le_bytes());
        hasher.update(b.price.to_bits().to_le_bytes());
        hasher.update(b.quantity.to_bits().to_le_bytes());
    }
    hasher.finalize()[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
