//! Exact power accounting.
//!
//! Quantities are summed in a 2^-60 kW fixed-point grid held in an `i128`, so
//! every sum is independent of summation order and a subset never sums to more
//! than its superset. Feeder comparisons are made on this grid.

use std::iter::Sum;
use std::ops::{Add, AddAssign};

const SCALE: f64 = (1u64 << 60) as f64;

/// Power in fixed-point kW.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactKw(i128);

impl ExactKw {
    pub const ZERO: ExactKw = ExactKw(0);

    /// Truncates toward zero; values at or above 2^-8 kW are represented exactly.
    pub fn from_kw(kw: f64) -> Self {
        ExactKw((kw * SCALE) as i128)
    }

    pub fn kw(self) -> f64 {
        self.0 as f64 / SCALE
    }

    /// Floor of the mean of `count` accumulated samples.
    pub fn mean_of(self, count: usize) -> Self {
        if count == 0 {
            return ExactKw::ZERO;
        }
        ExactKw(self.0.div_euclid(count as i128))
    }
}

impl Add for ExactKw {
    type Output = ExactKw;
    fn add(self, rhs: ExactKw) -> ExactKw {
        ExactKw(self.0 + rhs.0)
    }
}

impl AddAssign for ExactKw {
    fn add_assign(&mut self, rhs: ExactKw) {
        self.0 += rhs.0;
    }
}

impl Sum for ExactKw {
    fn sum<I: Iterator<Item = ExactKw>>(iter: I) -> ExactKw {
        iter.fold(ExactKw::ZERO, Add::add)
    }
}

/// Order-independent sum of kW values.
pub fn exact_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values
        .into_iter()
        .map(ExactKw::from_kw)
        .sum::<ExactKw>()
        .kw()
}
