//! Complex numbers stored as `(ln |z|, arg z)` for products of large powers.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LogPolar {
    pub ln_abs: f64,
    pub arg: f64,
}

impl LogPolar {
    pub const ONE: Self = Self { ln_abs: 0.0, arg: 0.0 };
    pub const ZERO: Self = Self { ln_abs: f64::NEG_INFINITY, arg: 0.0 };

    pub fn from_real(x: f64) -> Self {
        if x == 0.0 {
            return Self::ZERO;
        }
        Self { ln_abs: x.abs().ln(), arg: if x < 0.0 { std::f64::consts::PI } else { 0.0 } }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.norm() == 0.0 {
            return Self::ZERO;
        }
        Self { ln_abs: z.norm().ln(), arg: z.arg() }
    }

    pub fn is_zero(self) -> bool {
        self.ln_abs == f64::NEG_INFINITY
    }

    /// `self^k` with `0^0 = 1`.
    pub fn powi(self, k: usize) -> Self {
        if k == 0 {
            return Self::ONE;
        }
        if self.is_zero() {
            return Self::ZERO;
        }
        Self { ln_abs: k as f64 * self.ln_abs, arg: k as f64 * self.arg }
    }

    pub fn mul(self, other: Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        Self { ln_abs: self.ln_abs + other.ln_abs, arg: self.arg + other.arg }
    }

    /// `self · e^{-ln_ref}` as an ordinary complex number.
    pub fn scaled(self, ln_ref: f64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar((self.ln_abs - ln_ref).exp(), self.arg)
    }
}

/// `ln(e^x + e^y)` with `ln 0 = -∞` handled.
pub(crate) fn ln_add_exp(x: f64, y: f64) -> f64 {
    let hi = x.max(y);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((x - hi).exp() + (y - hi).exp()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_power_conventions() {
        assert_eq!(LogPolar::ZERO.powi(0), LogPolar::ONE);
        assert!(LogPolar::ZERO.powi(3).is_zero());
        let z = LogPolar::from_complex(Complex64::new(0.6, -0.8)).powi(5);
        let direct = Complex64::new(0.6, -0.8).powi(5);
        assert!((z.scaled(0.0) - direct).norm() < 1e-15);
        let neg = LogPolar::from_real(-2.0).powi(3).scaled(0.0);
        assert!((neg - Complex64::new(-8.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn log_sum() {
        assert!((ln_add_exp(2f64.ln(), 3f64.ln()) - 5f64.ln()).abs() < 1e-15);
        assert_eq!(ln_add_exp(f64::NEG_INFINITY, 1.0), 1.0);
        assert_eq!(ln_add_exp(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
    }
}
