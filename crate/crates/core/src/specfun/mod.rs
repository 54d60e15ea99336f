//! Special functions: Gamma, confluent hypergeometric functions, Laguerre
//! polynomials, Bessel functions of real and complex argument and the
//! Laguerre Poisson kernel.

mod bessel;
mod gamma;
mod hypergeometric;
mod laguerre;
mod poisson;

pub use bessel::{
    bessel_i, bessel_i_integral, bessel_i_ladder, bessel_i_series, bessel_j, BESSEL_I_Z_CAP,
};
pub use gamma::{binomial, gamma, ln_factorial_ratio, ln_gamma, pochhammer, recip_gamma};
pub use hypergeometric::{kummer_m, tricomi_u};
pub use laguerre::{laguerre, laguerre_all, p_poly, p_poly_series};
pub use poisson::poisson_laguerre_rhs;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Truncation policy for power series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    max_terms: usize,
    rel_tol: f64,
}

impl SeriesControl {
    pub const MAX_TERMS: usize = 10_000;
    pub const MIN_REL_TOL: f64 = 1e-15;

    pub fn new(max_terms: usize, rel_tol: f64) -> Result<Self> {
        if max_terms == 0 || max_terms > Self::MAX_TERMS {
            return Err(Error::invalid(format!(
                "max_terms must lie in 1..={}, got {max_terms}",
                Self::MAX_TERMS
            )));
        }
        if !(rel_tol >= Self::MIN_REL_TOL) || !rel_tol.is_finite() {
            return Err(Error::invalid(format!(
                "rel_tol must be at least {:e}, got {rel_tol:e}",
                Self::MIN_REL_TOL
            )));
        }
        Ok(SeriesControl { max_terms, rel_tol })
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            max_terms: 5000,
            rel_tol: 1e-14,
        }
    }
}

/// Kahan-compensated accumulator for complex terms. Also tracks the sum of
/// term magnitudes, which measures cancellation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Compensated {
    sum: Complex64,
    carry: Complex64,
    abs_sum: f64,
}

impl Compensated {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add(&mut self, x: Complex64) {
        self.abs_sum += x.norm();
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> Complex64 {
        self.sum
    }

    /// Ratio of the summed magnitudes to the magnitude of the sum.
    pub(crate) fn condition(&self) -> f64 {
        let v = self.sum.norm();
        if v == 0.0 {
            if self.abs_sum == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            self.abs_sum / v
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn control_bounds() {
        assert!(SeriesControl::new(0, 1e-10).is_err());
        assert!(SeriesControl::new(10_001, 1e-10).is_err());
        assert!(SeriesControl::new(100, 1e-16).is_err());
        assert!(SeriesControl::new(100, 1e-15).is_ok());
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut acc = Compensated::new();
        let mut naive = Complex64::new(0.0, 0.0);
        let big = Complex64::new(1.0, 0.0);
        acc.add(big);
        naive += big;
        for _ in 0..10_000 {
            let t = Complex64::new(1e-16, 0.0);
            acc.add(t);
            naive += t;
        }
        assert!((acc.value().re - (1.0 + 1e-12)).abs() < 1e-15);
        assert_eq!(naive.re, 1.0);
    }
}
