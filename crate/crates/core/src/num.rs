//! Scalar abstractions.
//!
//! Engines carry their thresholds in a floating type ([`Real`]); validators and
//! oracles can run the same checks over exact rationals ([`Threshold`]).

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Exact rational used by oracles and exact validators.
pub type Rational = Ratio<i64>;

/// Anything a degree can be compared against.
///
/// Degrees are integers, so a comparison `deg > alpha * d` is exact whenever the
/// threshold type is (floats compare exactly against small integers).
pub trait Threshold: Copy + PartialOrd + Debug + Send + Sync + 'static {
    fn zero_value() -> Self;
    fn from_count(c: usize) -> Self;
    fn product(self, other: Self) -> Self;
    fn as_f64(self) -> f64;
}

impl Threshold for f64 {
    fn zero_value() -> Self {
        0.0
    }
    fn from_count(c: usize) -> Self {
        c as f64
    }
    fn product(self, other: Self) -> Self {
        self * other
    }
    fn as_f64(self) -> f64 {
        self
    }
}

impl Threshold for f32 {
    fn zero_value() -> Self {
        0.0
    }
    fn from_count(c: usize) -> Self {
        c as f32
    }
    fn product(self, other: Self) -> Self {
        self * other
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Threshold for Rational {
    fn zero_value() -> Self {
        Ratio::from_integer(0)
    }
    fn from_count(c: usize) -> Self {
        Ratio::from_integer(c as i64)
    }
    fn product(self, other: Self) -> Self {
        self * other
    }
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

/// Floating scalar the engines are generic over (`f32` or `f64`).
pub trait Real: Float + FromPrimitive + Threshold + Display + Default {
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite constant")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `ceil(log_{base}(x))` computed in `f64`, clamped at zero.
pub fn ceil_log(base: f64, x: f64) -> usize {
    if x <= 1.0 {
        return 0;
    }
    let v = x.ln() / base.ln();
    // Guard against 1e-15 noise pushing an exact power up a notch.
    let r = v.round();
    if (v - r).abs() < 1e-9 {
        r as usize
    } else {
        v.ceil() as usize
    }
}

/// Density of `edges` over `nodes` as an exact rational; zero for empty sets.
pub fn density(edges: usize, nodes: usize) -> Rational {
    if nodes == 0 {
        Ratio::from_integer(0)
    } else {
        Ratio::new(edges as i64, nodes as i64)
    }
}
