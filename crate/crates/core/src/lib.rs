//! Transactive coordination of a population of thermostatically controlled
//! loads (TCLs).
//!
//! Each market interval every load converts its (predicted) temperature into a
//! price bid, a feeder coordinator clears the aggregate demand curve against a
//! broadcast base price and a feeder capacity limit, and loads whose bids clear
//! are allowed to follow their thermostat until the next interval. Between
//! clearings the loads evolve under first-order thermal dynamics with a
//! hysteresis thermostat.
//!
//! Module map:
//!
//! * [`population`]: thermal state, hysteresis switching, dispatch, aggregate power.
//! * [`bidding`]: temperature prediction and the temperature-to-price bid curve.
//! * [`market`]: aggregate demand curve and feeder-constrained clearing.
//! * [`engine`]: scenarios, price signals, population generation and the
//!   multi-rate closed loop.
//! * [`metrics`]: synchronization and oscillation statistics over a trace.
//! * [`output`]: CSV writers for traces and metrics.
//! * [`scenarios`]: the built-in case-study configurations.

pub mod bidding;
pub mod engine;
pub mod error;
pub mod market;
pub mod metrics;
pub mod output;
pub mod population;
pub mod power;
pub mod scenarios;

pub use bidding::{make_bid, temperature_for_bidding, Bid};
pub use engine::{
    generate_population, price_signal_value, run, IntervalRecord, PriceSignal, Scenario, Snapshot,
    StepRecord, Trace,
};
pub use error::{Error, Result, Violation};
pub use market::{build_demand_curve, clear, ClearingResult, ClearingRule, DemandCurve};
pub use metrics::{demand_oscillation, sync_index, MetricsConfig, MetricsReport, Oscillation};
pub use population::{
    aggregate_power, apply_dispatch, hysteresis_update, thermal_step, Population, TclParams,
    TclState,
};
