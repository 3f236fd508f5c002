use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Minute at which a step schedule switches to `price`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceStep {
    pub at_min: f64,
    pub price: f64,
}

/// Base price broadcast by the coordinator, $/MWh per market interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriceSignal {
    Constant {
        price: f64,
    },
    /// Piecewise constant; each step holds until the next one starts.
    Step {
        steps: Vec<PriceStep>,
    },
    /// Alternates every half period, starting low unless `start_high`.
    Square {
        low: f64,
        high: f64,
        period_min: f64,
        #[serde(default)]
        start_high: bool,
    },
    /// One price per market interval, optionally cycled.
    Series {
        prices: Vec<f64>,
        #[serde(default)]
        repeat: bool,
    },
}

impl Default for PriceSignal {
    fn default() -> Self {
        PriceSignal::Constant { price: 30.0 }
    }
}

const EPS: f64 = 1e-9;

fn is_multiple(span: f64, unit: f64) -> bool {
    if !(span.is_finite() && unit > 0.0) {
        return false;
    }
    let n = (span / unit).round();
    (n * unit - span).abs() <= EPS * span.abs().max(unit)
}

impl PriceSignal {
    /// Base price for interval `index`; `interval_min` is the market interval length.
    pub fn value(&self, index: usize, interval_min: f64) -> f64 {
        let t = index as f64 * interval_min;
        match self {
            PriceSignal::Constant { price } => *price,
            PriceSignal::Step { steps } => steps
                .iter()
                .take_while(|s| s.at_min <= t + EPS)
                .last()
                .or(steps.first())
                .map_or(0.0, |s| s.price),
            PriceSignal::Square {
                low,
                high,
                period_min,
                start_high,
            } => {
                let half = (t / (period_min / 2.0) + EPS).floor() as u64;
                let first_half = half.is_multiple_of(2);
                if first_half != *start_high {
                    *low
                } else {
                    *high
                }
            }
            PriceSignal::Series { prices, repeat } => {
                if *repeat {
                    prices[index % prices.len()]
                } else {
                    prices[index.min(prices.len() - 1)]
                }
            }
        }
    }

    pub(crate) fn violations(&self, interval_min: f64, intervals: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut price_ok = |field: &str, p: f64| {
            if !(p.is_finite() && p >= 0.0) {
                out.push(Violation::new(
                    field,
                    format!("price must be non-negative, got {p}"),
                ));
            }
        };
        match self {
            PriceSignal::Constant { price } => price_ok("price.price", *price),
            PriceSignal::Step { steps } => {
                for (i, s) in steps.iter().enumerate() {
                    price_ok(&format!("price.steps[{i}].price"), s.price);
                }
                if steps.first().map(|s| s.at_min) != Some(0.0) {
                    out.push(Violation::new(
                        "price.steps",
                        "first step must start at minute 0",
                    ));
                }
                if steps.windows(2).any(|w| w[1].at_min <= w[0].at_min) {
                    out.push(Violation::new(
                        "price.steps",
                        "step times must be strictly increasing",
                    ));
                }
                for (i, s) in steps.iter().enumerate() {
                    if interval_min > 0.0 && !is_multiple(s.at_min, interval_min) {
                        out.push(Violation::new(
                            format!("price.steps[{i}].at_min"),
                            format!(
                                "{} min is not on a {interval_min} min market boundary",
                                s.at_min
                            ),
                        ));
                    }
                }
            }
            PriceSignal::Square {
                low,
                high,
                period_min,
                ..
            } => {
                price_ok("price.low", *low);
                price_ok("price.high", *high);
                if interval_min > 0.0
                    && !(*period_min > 0.0 && is_multiple(period_min / 2.0, interval_min))
                {
                    out.push(Violation::new(
                        "price.period_min",
                        format!("half period of {period_min} min must be a positive multiple of the {interval_min} min market interval"),
                    ));
                }
            }
            PriceSignal::Series { prices, repeat } => {
                for (i, &p) in prices.iter().enumerate() {
                    price_ok(&format!("price.prices[{i}]"), p);
                }
                if prices.is_empty() {
                    out.push(Violation::new("price.prices", "series is empty"));
                } else if !repeat && prices.len() < intervals {
                    out.push(Violation::new(
                        "price.prices",
                        format!("{} prices for {intervals} market intervals", prices.len()),
                    ));
                }
            }
        }
        out
    }
}

/// Base price for interval `index` of a horizon with `intervals` intervals.
pub fn price_signal_value(
    signal: &PriceSignal,
    index: usize,
    interval_min: f64,
    intervals: usize,
) -> Result<f64> {
    if index >= intervals {
        return Err(Error::OutOfHorizon {
            index,
            len: intervals,
        });
    }
    Ok(signal.value(index, interval_min))
}

pub(crate) fn whole_multiple(span: f64, unit: f64) -> bool {
    is_multiple(span, unit)
}
