//! Log-domain arithmetic over the extended reals.
//!
//! A [`LogValue`] stores `ln(x)` for a nonnegative quantity `x`. The value
//! zero is represented by `-inf` and is a regular member of the type: it
//! annihilates products and is the identity of sums.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Div, Mul, MulAssign};

/// Logarithm of a nonnegative real. Never NaN, never `+inf`.
#[derive(Clone, Copy, PartialEq)]
pub struct LogValue(f64);

impl LogValue {
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    pub const ONE: LogValue = LogValue(0.0);

    /// Wraps a logarithm. Panics on NaN or `+inf`, which have no linear-domain meaning here.
    pub fn from_ln(ln: f64) -> Self {
        assert!(
            !ln.is_nan() && ln != f64::INFINITY,
            "log value must be finite or -inf, got {ln}"
        );
        LogValue(ln)
    }

    /// `ln(x)` for `x >= 0`.
    pub fn from_linear(x: f64) -> Self {
        assert!(x >= 0.0 && x.is_finite(), "linear value must be finite and nonnegative, got {x}");
        LogValue(x.ln())
    }

    /// `ln(1 - p)` for a probability `p`, accurate near `p = 0`.
    pub fn complement_of(p: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&p));
        if p >= 1.0 {
            LogValue::ZERO
        } else {
            LogValue((-p).ln_1p())
        }
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    /// Negated logarithm; `+inf` for zero.
    pub fn neg_ln(self) -> f64 {
        -self.0
    }

    pub fn exp(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl fmt::Debug for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogValue({})", self.0)
    }
}

impl Eq for LogValue {}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LogValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: LogValue) -> LogValue {
        // -inf + finite stays -inf; +inf is excluded by construction.
        LogValue(self.0 + rhs.0)
    }
}

impl MulAssign for LogValue {
    fn mul_assign(&mut self, rhs: LogValue) {
        *self = *self * rhs;
    }
}

impl Div for LogValue {
    type Output = LogValue;
    /// Panics when dividing by zero.
    fn div(self, rhs: LogValue) -> LogValue {
        assert!(!rhs.is_zero(), "division by log-zero");
        LogValue(self.0 - rhs.0)
    }
}

impl Product for LogValue {
    fn product<I: Iterator<Item = LogValue>>(iter: I) -> LogValue {
        iter.fold(LogValue::ONE, |acc, v| acc * v)
    }
}

impl Sum for LogValue {
    fn sum<I: Iterator<Item = LogValue>>(iter: I) -> LogValue {
        let mut acc = LogSumExp::new();
        for v in iter {
            acc.add(v);
        }
        acc.value()
    }
}

/// Streaming log-sum-exp. The result depends only on the sequence of inputs.
#[derive(Clone, Copy, Debug)]
pub struct LogSumExp {
    max: f64,
    scaled_sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            scaled_sum: 0.0,
        }
    }

    pub fn add(&mut self, v: LogValue) {
        let x = v.0;
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled_sum += (x - self.max).exp();
        } else {
            self.scaled_sum = self.scaled_sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> LogValue {
        if self.max == f64::NEG_INFINITY {
            LogValue::ZERO
        } else {
            LogValue(self.max + self.scaled_sum.ln())
        }
    }
}

/// Log-sum-exp over a slice of raw logarithms.
pub fn log_sum_exp(values: &[LogValue]) -> LogValue {
    values.iter().copied().sum()
}
