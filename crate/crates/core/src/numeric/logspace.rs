//! Signed log-magnitude arithmetic.
//!
//! Products of factorials and determinants of factorial-valued matrices span
//! hundreds of decimal orders; everything in the exact-formula modules is
//! carried as `(ln |v|, sign(v))` and only exponentiated at the very end.

use std::ops::{Div, Mul};

use libm::lgamma as ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    log_magnitude: f64,
    sign: i8,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        log_magnitude: f64::NEG_INFINITY,
        sign: 0,
    };
    pub const ONE: LogValue = LogValue {
        log_magnitude: 0.0,
        sign: 1,
    };

    /// Builds a value from its log-magnitude and sign. A zero sign, or a
    /// log-magnitude of -inf, yields the canonical zero.
    pub fn new(log_magnitude: f64, sign: i8) -> Self {
        if sign == 0 || log_magnitude == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        LogValue {
            log_magnitude,
            sign: sign.signum(),
        }
    }

    pub fn positive(log_magnitude: f64) -> Self {
        Self::new(log_magnitude, 1)
    }

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            LogValue {
                log_magnitude: v.abs().ln(),
                sign: if v > 0.0 { 1 } else { -1 },
            }
        }
    }

    pub fn log_magnitude(&self) -> f64 {
        self.log_magnitude
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn value(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_magnitude.exp(),
        }
    }

    pub fn recip(self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero LogValue");
        LogValue {
            log_magnitude: -self.log_magnitude,
            sign: self.sign,
        }
    }

    pub fn powi(self, k: i32) -> Self {
        if k == 0 {
            return Self::ONE;
        }
        if self.is_zero() {
            return Self::ZERO;
        }
        let sign = if self.sign < 0 && k % 2 != 0 { -1 } else { 1 };
        LogValue {
            log_magnitude: self.log_magnitude * f64::from(k),
            sign,
        }
    }
}

impl Mul for LogValue {
    type Output = LogValue;

    fn mul(self, rhs: LogValue) -> LogValue {
        if self.is_zero() || rhs.is_zero() {
            return LogValue::ZERO;
        }
        LogValue {
            log_magnitude: self.log_magnitude + rhs.log_magnitude,
            sign: self.sign * rhs.sign,
        }
    }
}

impl Div for LogValue {
    type Output = LogValue;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: LogValue) -> LogValue {
        self * rhs.recip()
    }
}

/// `ln k!` through the log-gamma function.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        0.0
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// `ln k!` for a signed argument; negative arguments have no factorial and
/// return `None` (the corresponding Poisson weight is zero).
pub fn ln_factorial_signed(k: i64) -> Option<f64> {
    (k >= 0).then(|| ln_factorial(k as u64))
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Log of the Poisson weight `e^{-t} t^m / m!` without the exponential factor,
/// i.e. `m ln t - ln m!`. Returns `None` for negative `m`.
pub fn ln_poisson_monomial(t: f64, m: i64) -> Option<f64> {
    let lf = ln_factorial_signed(m)?;
    if m == 0 {
        return Some(0.0);
    }
    Some(m as f64 * t.ln() - lf)
}
