//! Closed form of the Laguerre Poisson kernel
//! `sum_m e^{-cm} m!/Gamma(m+nu+1) L^nu_m(a) L^nu_m(b)`.

use num_complex::Complex64;

use super::bessel::{ascending_i, bessel_i};
use super::SeriesControl;
use crate::error::{Error, Result};

pub fn poisson_laguerre_rhs(c: Complex64, a: f64, b: f64, nu: f64) -> Result<Complex64> {
    if !(c.re > 0.0) {
        return Err(Error::domain(format!("Poisson kernel requires Re c > 0, got {c}")));
    }
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::domain(format!("Poisson kernel requires a, b > 0, got {a}, {b}")));
    }
    if !(nu > -1.0) {
        return Err(Error::domain(format!("Poisson kernel requires nu > -1, got {nu}")));
    }
    let q = (-c).exp();
    let one_minus = 1.0 - q;
    let arg = (-c * 0.5).exp() * (2.0 * (a * b).sqrt()) / one_minus;
    let ctl = SeriesControl::default();
    let i = if nu >= 0.0 {
        bessel_i(nu, arg, ctl)?
    } else {
        ascending_i(nu, arg, ctl)?
    };
    let pref = (c * (0.5 * nu)).exp() / ((a * b).powf(0.5 * nu) * one_minus);
    Ok(pref * (-(a + b) * q / one_minus).exp() * i)
}
