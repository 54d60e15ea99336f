use std::f64::consts::PI;

use num_complex::Complex64;

use super::{bracket_at_origin, branch_data, BranchData, Construction, KernelQuery, KernelValue, MIN_TOL};
use crate::error::{Error, Result};
use crate::model::FieldParams;
use crate::numerics::{integrate_cosh_weighted, Estimate};

/// `h(s) + h(-s)` with `h(s) = e^{-alpha s} / (1 + e^{-s + i theta})`, for
/// `theta` in `[-pi, pi]`.
///
/// Equals `(cosh((1-alpha)s) + e^{-i theta} cosh(alpha s)) / (cosh s + cos theta)`,
/// written so that nothing cancels near `theta = +-pi`, `s = 0`. At exactly
/// `+-pi` the pole pair pinches the real axis and the principal value is
/// returned.
pub fn diffractive_integrand(s: Complex64, theta: f64, alpha: f64) -> Complex64 {
    if s.re.abs() > 20.0 {
        // the integrand is even; scale numerator and denominator by 2e^{-s}
        let s = if s.re < 0.0 { -s } else { s };
        let e = |a: f64| (-a * s).exp();
        let num = e(alpha) + e(2.0 - alpha) + Complex64::from_polar(1.0, -theta) * (e(1.0 - alpha) + e(1.0 + alpha));
        let den = 1.0 + e(2.0) + 2.0 * theta.cos() * e(1.0);
        return num / den;
    }
    let sh = (0.5 * s).sinh();
    if theta.abs() == PI {
        if sh == Complex64::new(0.0, 0.0) {
            return Complex64::new(1.0 - 2.0 * alpha, 0.0);
        }
        return ((0.5 - alpha) * s).sinh() / sh;
    }
    let (sn, c) = (0.5 * theta).sin_cos();
    let ca = (alpha * s).cosh();
    let num = 2.0 * sh * ((0.5 - alpha) * s).sinh() + Complex64::new(2.0 * c * c, -2.0 * c * sn) * ca;
    num / (2.0 * (c * c + sh * sh))
}

/// `S_max = ln(1/tol) / min(alpha, 1 - alpha) + 5`.
fn s_max(alpha: f64, tol: f64) -> f64 {
    (1.0 / tol).ln() / alpha.min(1.0 - alpha) + 5.0
}

/// `int_R e^{-z cosh s} e^{-alpha s} / (1 + e^{-s + i theta}) ds` with its
/// error estimate.
pub fn diffractive_estimate(z: Complex64, theta: f64, params: &FieldParams, tol: f64) -> Result<Estimate> {
    if !(tol >= MIN_TOL) {
        return Err(Error::invalid(format!("tolerance {tol:e} below {MIN_TOL:e}")));
    }
    let alpha = params.alpha();
    if alpha == 0.0 {
        return Err(Error::domain("the diffractive integral diverges at alpha = 0"));
    }
    let red = branch_data(theta, params).theta;
    if z == Complex64::new(0.0, 0.0) {
        // int_0^inf x^{alpha-1} / (1 + x e^{i theta}) dx
        let v = if red.abs() == PI {
            Complex64::new((PI * alpha).cos(), 0.0)
        } else {
            Complex64::from_polar(1.0, -alpha * red)
        };
        return Ok(Estimate { value: v * PI / (PI * alpha).sin(), err: 0.0 });
    }
    let decay = alpha.min(1.0 - alpha);
    integrate_cosh_weighted(z, |s| diffractive_integrand(s, red, alpha), decay, tol, s_max(alpha, tol))
}

/// The diffractive integral, without the `sin(pi alpha)/pi` factor.
pub fn diffractive_term(z: Complex64, theta: f64, params: &FieldParams, tol: f64) -> Result<Complex64> {
    diffractive_estimate(z, theta, params, tol).map(|e| e.value)
}

/// The bracket `e^{z cos theta} e^{-i alpha theta} chi - (sin pi alpha / pi) D`
/// on the reduced phase. On the edge the geometric term carries `chi / 2`,
/// matching the principal value taken by `D` there.
pub(super) fn closed_bracket(z: Complex64, br: &BranchData, params: &FieldParams, tol: f64) -> Result<Estimate> {
    let alpha = params.alpha();
    let chi = if br.on_edge() { 0.5 * br.chi } else { br.chi };
    let geometric = (z * br.theta.cos()).exp() * Complex64::from_polar(1.0, -alpha * br.theta) * chi;
    if alpha == 0.0 {
        return Ok(Estimate { value: geometric, err: 1e-16 });
    }
    let d = diffractive_estimate(z, br.theta, params, tol)?;
    let w = (PI * alpha).sin() / PI;
    Ok(Estimate {
        value: geometric - w * d.value,
        err: w * d.err + 1e-16,
    })
}

pub fn kernel_closed(q: &KernelQuery, params: &FieldParams) -> Result<KernelValue> {
    q.validate(params)?;
    let pref = q.prefactor(params);
    let z = q.z(params);
    if z == Complex64::new(0.0, 0.0) {
        return KernelValue::new(pref * bracket_at_origin(params), Construction::Closed, 1e-16 * pref.norm());
    }
    let br = branch_data(q.phase(params), params);
    let b = closed_bracket(z, &br, params, q.tol())?;
    KernelValue::new(pref * b.value, Construction::Closed, pref.norm() * b.err)
}
