//! Built-in case-study scenarios.

use crate::engine::{ParamDist, PriceSignal, PriceStep, Scenario, SubgroupSpec};

pub const BUILTIN_NAMES: [&str; 5] = [
    "stepprice",
    "stepprice-hetset",
    "fluctuating",
    "pulsetrain",
    "subgroups",
];

/// Ambient temperature of the step-schedule case study, °C.
pub const HOT_DAY_AMBIENT: f64 = 38.0;

/// Bid slope of the step-schedule loads, $/MWh per °C, spread ±5%.
pub const HOT_DAY_SLOPE: f64 = 55.0;

fn base(name: &str, price: PriceSignal) -> Scenario {
    Scenario {
        name: name.into(),
        price,
        ..Scenario::default()
    }
}

/// 42 $/MWh for 6 h, 20 $/MWh for 6 h, then 9 $/MWh, on a hot day.
pub fn step_price() -> Scenario {
    let mut s = base(
        "stepprice",
        PriceSignal::Step {
            steps: vec![
                PriceStep {
                    at_min: 0.0,
                    price: 42.0,
                },
                PriceStep {
                    at_min: 360.0,
                    price: 20.0,
                },
                PriceStep {
                    at_min: 720.0,
                    price: 9.0,
                },
            ],
        },
    );
    s.population.ambient = HOT_DAY_AMBIENT;
    s.population.bids.gamma1 = ParamDist::relative(HOT_DAY_SLOPE, 0.05);
    s.population.bids.gamma2 = ParamDist::relative(HOT_DAY_SLOPE, 0.05);
    // bids use the measured temperature
    s.lookahead_s = 0.0;
    s
}

/// The step schedule with set-points spread over 19–21 °C.
pub fn step_price_heterogeneous_setpoints() -> Scenario {
    let mut s = step_price();
    s.name = "stepprice-hetset".into();
    s.population.setpoint = ParamDist::absolute(20.0, 1.0);
    s
}

/// Base price redrawn between 20 and 30 $/MWh every interval.
pub fn fluctuating() -> Scenario {
    let s = base("fluctuating", PriceSignal::default());
    let prices = fluctuating_series(s.intervals(), 20.0, 30.0, 0x5eed);
    Scenario {
        price: PriceSignal::Series {
            prices,
            repeat: false,
        },
        ..s
    }
}

/// 24 $/MWh for 4 h alternating with 14 $/MWh for 4 h.
pub fn pulse_train() -> Scenario {
    base(
        "pulsetrain",
        PriceSignal::Square {
            low: 14.0,
            high: 24.0,
            period_min: 480.0,
            start_high: true,
        },
    )
}

/// Four subgroups, each with its own identical bid curve, offset by 10 $/MWh.
pub fn subgroups() -> Scenario {
    let mut s = step_price();
    s.name = "subgroups".into();
    s.population.ambient = 30.0;
    s.population.capacitance = ParamDist::relative(10.0, 0.05);
    s.population.subgroups = [15.0, 25.0, 35.0, 45.0]
        .into_iter()
        .map(|p0| SubgroupSpec {
            p0,
            gamma1: 50.0,
            gamma2: 50.0,
            ..SubgroupSpec::default()
        })
        .collect();
    s
}

pub fn builtin(name: &str) -> Option<Scenario> {
    match name {
        "stepprice" => Some(step_price()),
        "stepprice-hetset" => Some(step_price_heterogeneous_setpoints()),
        "fluctuating" => Some(fluctuating()),
        "pulsetrain" => Some(pulse_train()),
        "subgroups" => Some(subgroups()),
        _ => None,
    }
}

pub fn all() -> Vec<Scenario> {
    BUILTIN_NAMES.iter().filter_map(|n| builtin(n)).collect()
}

/// Uniform prices on a 0.5 $/MWh grid from a fixed seed.
pub fn fluctuating_series(len: usize, low: f64, high: f64, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let steps = ((high - low) * 2.0).round() as u32;
    (0..len)
        .map(|_| low + 0.5 * rng.random_range(0..=steps) as f64)
        .collect()
}
