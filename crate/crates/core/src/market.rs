//! Aggregate demand curve and feeder-constrained clearing.
//!
//! The coordinator sorts anonymous bids into a descending price ladder. If the
//! demand at the base price fits under the feeder limit the market clears at
//! the base price; otherwise the price rises to the lowest ladder price whose
//! cumulative demand fits. Loads then self-dispatch when `bid >= price`, so an
//! equal-price group is either fully accepted or fully excluded.

use serde::{Deserialize, Serialize};

use crate::bidding::Bid;
use crate::error::{Error, Result};
use crate::power::ExactKw;

/// Price increment used when even the highest-priced bid group exceeds the limit.
pub const DEFAULT_PRICE_TICK: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    /// $/MWh.
    pub price: f64,
    /// Total quantity of bids at or above `price`, kW.
    pub cumulative: f64,
}

/// Price-descending step function `demand(p) = Σ quantity of bids with price >= p`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DemandCurve {
    breakpoints: Vec<Breakpoint>,
    exact: Vec<ExactKw>,
}

impl DemandCurve {
    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    pub fn max_price(&self) -> Option<f64> {
        self.breakpoints.first().map(|b| b.price)
    }

    pub fn total(&self) -> f64 {
        self.exact.last().copied().unwrap_or_default().kw()
    }

    /// Number of breakpoints with price >= `price`.
    fn accepted(&self, price: f64) -> usize {
        self.breakpoints.partition_point(|b| b.price >= price)
    }

    fn exact_demand(&self, price: f64) -> ExactKw {
        match self.accepted(price) {
            0 => ExactKw::ZERO,
            n => self.exact[n - 1],
        }
    }

    pub fn demand(&self, price: f64) -> f64 {
        self.exact_demand(price).kw()
    }
}

/// Gathers bids into the aggregate demand curve, merging equal prices.
pub fn build_demand_curve(bids: &[Bid]) -> Result<DemandCurve> {
    for (index, bid) in bids.iter().enumerate() {
        if !(bid.price.is_finite() && bid.price >= 0.0) {
            return Err(Error::InvalidBid {
                index,
                reason: format!("price must be non-negative, got {}", bid.price),
            });
        }
        if !(bid.quantity.is_finite() && bid.quantity > 0.0) {
            return Err(Error::InvalidBid {
                index,
                reason: format!("quantity must be positive, got {}", bid.quantity),
            });
        }
    }
    let mut sorted: Vec<(f64, ExactKw)> = bids
        .iter()
        .map(|b| (b.price, ExactKw::from_kw(b.quantity)))
        .collect();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut curve = DemandCurve::default();
    let mut running = ExactKw::ZERO;
    for (price, quantity) in sorted {
        running += quantity;
        if curve.breakpoints.last().map(|b| b.price) == Some(price) {
            *curve.exact.last_mut().expect("parallel vectors") = running;
            curve.breakpoints.last_mut().expect("non-empty").cumulative = running.kw();
        } else {
            curve.exact.push(running);
            curve.breakpoints.push(Breakpoint {
                price,
                cumulative: running.kw(),
            });
        }
    }
    Ok(curve)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClearingResult {
    pub base_price: f64,
    pub clearing_price: f64,
    /// Quantity of bids priced at or above the clearing price, kW.
    pub cleared_demand: f64,
    /// Demand at the base price, kW.
    pub base_demand: f64,
    /// True when the feeder limit forced the price above the base price.
    pub constrained: bool,
}

/// Feeder-side clearing parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClearingRule {
    /// kW.
    pub feeder_limit: f64,
    /// $/MWh.
    pub price_tick: f64,
}

impl ClearingRule {
    pub fn new(feeder_limit: f64) -> Self {
        Self {
            feeder_limit,
            price_tick: DEFAULT_PRICE_TICK,
        }
    }

    pub fn clear(&self, curve: &DemandCurve, base_price: f64) -> Result<ClearingResult> {
        if !(self.feeder_limit.is_finite() && self.feeder_limit > 0.0) {
            return Err(Error::Market(format!(
                "feeder limit must be positive, got {}",
                self.feeder_limit
            )));
        }
        if !(base_price.is_finite() && base_price >= 0.0) {
            return Err(Error::Market(format!(
                "base price must be non-negative, got {base_price}"
            )));
        }
        if !(self.price_tick.is_finite() && self.price_tick > 0.0) {
            return Err(Error::Market(format!(
                "price tick must be positive, got {}",
                self.price_tick
            )));
        }

        let limit = ExactKw::from_kw(self.feeder_limit);
        let base_demand = curve.exact_demand(base_price);
        if base_demand <= limit {
            return Ok(ClearingResult {
                base_price,
                clearing_price: base_price,
                cleared_demand: base_demand.kw(),
                base_demand: base_demand.kw(),
                constrained: false,
            });
        }

        // Cumulative demand grows down the ladder, so the feasible breakpoints
        // form a prefix; the last of them carries the lowest feasible price.
        let feasible = curve.exact.partition_point(|&d| d <= limit);
        let (clearing_price, cleared) = match feasible {
            0 => (
                curve.max_price().unwrap_or(base_price) + self.price_tick,
                ExactKw::ZERO,
            ),
            n => (curve.breakpoints[n - 1].price, curve.exact[n - 1]),
        };
        Ok(ClearingResult {
            base_price,
            clearing_price,
            cleared_demand: cleared.kw(),
            base_demand: base_demand.kw(),
            constrained: true,
        })
    }
}

/// Clears with the default price tick.
pub fn clear(curve: &DemandCurve, base_price: f64, feeder_limit: f64) -> Result<ClearingResult> {
    ClearingRule::new(feeder_limit).clear(curve, base_price)
}
