use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenario::PopulationSpec;
use crate::error::{Error, Result};
use crate::population::{Population, TclParams, TclState};

/// Draws a heterogeneous population and its initial state.
///
/// Every load consumes the same number of random draws regardless of the
/// configured spreads, so changing one width never reshuffles another
/// parameter. Initial temperatures are uniform over each deadband, the
/// thermostat is on with the natural duty-cycle probability, and all loads
/// start dispatched.
pub fn generate_population(spec: &PopulationSpec, seed: u64) -> Result<Population> {
    let mut violations = Vec::new();
    spec.violations(&mut violations);
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups = group_bounds(spec);
    let [lo, hi] = spec.bids.price_range;
    let mut params = Vec::with_capacity(spec.count);
    let mut states = Vec::with_capacity(spec.count);

    for id in 0..spec.count {
        let mut u = [0.0; 10];
        for x in &mut u {
            *x = rng.random_range(-1.0..=1.0);
        }
        let group = groups.iter().position(|&end| id < end).unwrap_or(0);
        let (p0, p_cap, gamma1, gamma2) = match spec.subgroups.get(group) {
            Some(g) => {
                let jitter = |v: f64, u: f64| v * (1.0 + g.spread * u);
                (
                    jitter(g.p0, u[6]),
                    jitter(g.p_cap, u[7]),
                    jitter(g.gamma1, u[8]),
                    jitter(g.gamma2, u[9]),
                )
            }
            None => (
                spec.bids.p0.at(u[6]),
                spec.bids.p_cap.at(u[7]),
                spec.bids.gamma1.at(u[8]),
                spec.bids.gamma2.at(u[9]),
            ),
        };
        let p_cap = p_cap.clamp(lo, hi);
        let p = TclParams {
            id,
            group,
            capacitance: spec.capacitance.at(u[0]),
            resistance: spec.resistance.at(u[1]),
            power: spec.power.at(u[2]),
            cop: spec.cop.at(u[3]),
            setpoint: spec.setpoint.at(u[4]),
            deadband: spec.deadband.at(u[5]),
            p0: p0.clamp(lo, hi).min(p_cap),
            p_cap,
            gamma1: gamma1.max(0.0),
            gamma2: gamma2.max(0.0),
            noise_std: spec.noise_std,
        };
        let position: f64 = rng.random();
        let on = rng.random_bool(p.natural_duty(spec.ambient));
        states.push(TclState::new(
            p.theta_min() + position * p.deadband,
            on,
            true,
        ));
        params.push(p);
    }
    Population::new(params, states, spec.ambient, seed)
}

/// Exclusive end index of each subgroup's contiguous block.
fn group_bounds(spec: &PopulationSpec) -> Vec<usize> {
    let total: f64 = spec.subgroups.iter().map(|g| g.weight).sum();
    let mut acc = 0.0;
    let mut bounds: Vec<usize> = spec
        .subgroups
        .iter()
        .map(|g| {
            acc += g.weight;
            (acc / total * spec.count as f64).round() as usize
        })
        .collect();
    if let Some(last) = bounds.last_mut() {
        *last = spec.count;
    }
    bounds
}
