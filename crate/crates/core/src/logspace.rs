//! Log-space numbers for quantities far outside the double range.
//!
//! The widths of the complex neighbourhoods are of order `exp(-1e17)` even for
//! the mildest parameters, and for `|a1|` close to 2 even their logarithms
//! overflow. [`LogValue`] therefore has a second level that stores
//! `ln(-ln q)` once `-ln q` is too large to be held directly.
//! [`LogLogValue`] stores double exponentials through the log of their loglog.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Above this, `exp(s)` is close enough to the double limit that
/// `NegLogLog(s)` is preferred over `Log(-exp(s))`.
const SWITCH: f64 = 700.0;

/// Relative size below which an additive correction is dropped.
pub const NEGLIGIBLE: f64 = 1e-15;

/// A non-negative real stored through its logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogValue {
    Zero,
    /// `q = exp(l)`.
    Log(f64),
    /// `q = exp(-exp(s))`, used for `s > 700`.
    NegLogLog(f64),
}

impl LogValue {
    pub const ONE: LogValue = LogValue::Log(0.0);

    pub fn from_f64(q: f64) -> Self {
        assert!(q >= 0.0 && !q.is_nan(), "LogValue needs a non-negative number, got {q}");
        if q == 0.0 {
            LogValue::Zero
        } else {
            LogValue::Log(q.ln())
        }
    }

    /// `exp(l)`; `l = -inf` is zero.
    pub fn from_ln(l: f64) -> Self {
        assert!(!l.is_nan() && l != f64::INFINITY, "bad log magnitude {l}");
        if l == f64::NEG_INFINITY {
            LogValue::Zero
        } else {
            LogValue::Log(l)
        }
    }

    /// `exp(-exp(s))`.
    pub fn exp_neg_exp(s: f64) -> Self {
        assert!(!s.is_nan(), "bad loglog magnitude");
        if s == f64::INFINITY {
            LogValue::Zero
        } else if s > SWITCH {
            LogValue::NegLogLog(s)
        } else {
            LogValue::Log(-s.exp())
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, LogValue::Zero)
    }

    /// Natural log; `-inf` for zero or when the magnitude overflows.
    pub fn ln(&self) -> f64 {
        match *self {
            LogValue::Zero => f64::NEG_INFINITY,
            LogValue::Log(l) => l,
            LogValue::NegLogLog(s) => -s.exp(),
        }
    }

    /// `ln(-ln q)` for `0 < q < 1`, finite even when `ln q` is not.
    pub fn ln_neg_ln(&self) -> Option<f64> {
        match *self {
            LogValue::Log(l) if l < 0.0 => Some((-l).ln()),
            LogValue::NegLogLog(s) => Some(s),
            _ => None,
        }
    }

    /// Materialize; underflows to 0 and overflows to infinity.
    pub fn to_f64(&self) -> f64 {
        self.ln().exp()
    }

    fn canonical(self) -> Self {
        match self {
            LogValue::Log(l) if l < -SWITCH.exp() => LogValue::NegLogLog((-l).ln()),
            LogValue::NegLogLog(s) if s <= SWITCH => LogValue::Log(-s.exp()),
            other => other,
        }
    }

    pub fn mul(self, other: Self) -> Self {
        use LogValue::*;
        match (self, other) {
            (Zero, _) | (_, Zero) => Zero,
            (Log(a), Log(b)) => {
                let l = a + b;
                if l == f64::NEG_INFINITY {
                    // Both very negative but finite: stay finite one level up.
                    NegLogLog(log_add_exp((-a).ln(), (-b).ln()))
                } else {
                    Log(l).canonical()
                }
            }
            (Log(l), NegLogLog(s)) | (NegLogLog(s), Log(l)) => {
                // ln q = -e^s + l = -e^s (1 - l e^{-s})
                let corr = -l * (-s).exp();
                NegLogLog(s + corr.ln_1p()).canonical()
            }
            (NegLogLog(a), NegLogLog(b)) => NegLogLog(log_add_exp(a, b)),
        }
    }

    /// `self / other`; `other` must be a plain `Log` value.
    pub fn div(self, other: Self) -> Self {
        match other {
            LogValue::Log(l) => self.mul(LogValue::Log(-l)),
            LogValue::Zero => panic!("division by zero LogValue"),
            LogValue::NegLogLog(_) => panic!("reciprocal of a sub-underflow LogValue is not representable"),
        }
    }

    /// `q^k` for `k > 0`, or any real `k` on plain `Log` values.
    pub fn powf(self, k: f64) -> Self {
        match self {
            LogValue::Zero => {
                assert!(k > 0.0, "0^{k}");
                LogValue::Zero
            }
            LogValue::Log(l) => {
                let p = l * k;
                if p == f64::NEG_INFINITY {
                    LogValue::NegLogLog((-l).ln() + k.ln())
                } else {
                    LogValue::Log(p).canonical()
                }
            }
            LogValue::NegLogLog(s) => {
                assert!(k > 0.0, "negative power of a sub-underflow LogValue");
                LogValue::NegLogLog(s + k.ln()).canonical()
            }
        }
    }

    pub fn sqrt(self) -> Self {
        match self {
            // Halving is exact in binary floating point.
            LogValue::Log(l) => LogValue::Log(l * 0.5),
            other => other.powf(0.5),
        }
    }

    pub fn square(self) -> Self {
        match self {
            LogValue::Log(l) => LogValue::Log(l * 2.0).canonical(),
            other => other.powf(2.0),
        }
    }

    /// `self + other` through log-sum-exp.
    pub fn add(self, other: Self) -> Self {
        use LogValue::*;
        match (self, other) {
            (Zero, x) | (x, Zero) => x,
            (NegLogLog(a), NegLogLog(b)) => {
                // Relative gap exp(e^max - e^min) is either astronomically small or
                // the two coincide to the last bit; the smaller s dominates.
                NegLogLog(a.min(b))
            }
            _ => {
                let (a, b) = (self.ln(), other.ln());
                let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
                if hi == f64::NEG_INFINITY {
                    // One side is NegLogLog with overflowing magnitude, the other finite.
                    return if self > other { self } else { other };
                }
                Log(hi + (lo - hi).exp().ln_1p()).canonical()
            }
        }
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        use LogValue::*;
        match (*self, *other) {
            (Zero, Zero) => Ordering::Equal,
            (Zero, _) => Ordering::Less,
            (_, Zero) => Ordering::Greater,
            (Log(a), Log(b)) => a.total_cmp(&b),
            (NegLogLog(a), NegLogLog(b)) => b.total_cmp(&a),
            (NegLogLog(s), Log(l)) => {
                if l >= 0.0 {
                    Ordering::Less
                } else {
                    (-l).ln().total_cmp(&s)
                }
            }
            (Log(_), NegLogLog(_)) => other.total_cmp(self).reverse(),
        }
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LogValue::Zero => write!(f, "0"),
            LogValue::Log(l) if l.abs() < 690.0 => write!(f, "{:.6e}", l.exp()),
            LogValue::Log(l) => write!(f, "exp({l:.6e})"),
            LogValue::NegLogLog(s) => write!(f, "exp(-exp({s:.6}))"),
        }
    }
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// A quantity `q = exp(exp(v))` with `v > 0` held as a [`LogValue`].
///
/// The stored number is `ln v = ln ln ln q`, which stays finite for every
/// admissible parameter set.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogLogValue {
    /// `v = ln ln q`.
    pub loglog: LogValue,
}

impl LogLogValue {
    pub fn from_loglog(v: f64) -> Self {
        assert!(v > 0.0, "LogLogValue needs ln ln q > 0, got {v}");
        Self { loglog: LogValue::from_f64(v) }
    }

    /// From `ln ln ln q`.
    pub fn from_ln_loglog(w: f64) -> Self {
        Self { loglog: LogValue::from_ln(w) }
    }

    /// `ln ln q`; infinite when it overflows.
    pub fn loglog(&self) -> f64 {
        self.loglog.to_f64()
    }

    /// `ln ln ln q`.
    pub fn ln_loglog(&self) -> f64 {
        self.loglog.ln()
    }

    /// Whether an integer count `k` satisfies `k <= q`.
    pub fn admits_count(&self, k: u64) -> bool {
        // q > e always, so 0, 1 and 2 are admitted without computing anything.
        if k <= 2 {
            return true;
        }
        let llk = (k as f64).ln().ln();
        LogValue::from_f64(llk) <= self.loglog
    }
}

impl fmt::Display for LogLogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp(exp({}))", self.loglog)
    }
}
