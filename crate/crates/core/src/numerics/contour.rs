//! Integrals of the form `int_0^inf e^{-z cosh s} g(s) ds` with `Re z >= 0`.
//!
//! For complex `z = |z| e^{i psi}` the real half-line is replaced by the path
//! `s(u) = u - i (psi/2) tanh u`, along which `Re(z cosh s)` grows without
//! bound, so the integrand decays double-exponentially instead of oscillating.
//! The deformation is valid for any `g` analytic in the sector swept between
//! the real axis and the path.

use num_complex::Complex64;

use super::adaptive::{Estimate, Integrator};
use crate::error::{Error, Result};

/// The deformed path for a given argument.
#[derive(Debug, Clone, Copy)]
pub struct CoshContour {
    half_psi: f64,
}

impl CoshContour {
    pub fn for_argument(z: Complex64) -> Result<Self> {
        if z.re < -1e-14 * z.norm() {
            return Err(Error::domain(format!("contour needs Re z >= 0, got {z}")));
        }
        let psi = if z.norm() == 0.0 { 0.0 } else { z.im.atan2(z.re.max(0.0)) };
        Ok(CoshContour { half_psi: 0.5 * psi })
    }

    /// Point `s(u)` and derivative `s'(u)`.
    pub fn point(&self, u: f64) -> (Complex64, Complex64) {
        let t = u.tanh();
        let s = Complex64::new(u, -self.half_psi * t);
        let ds = Complex64::new(1.0, -self.half_psi * (1.0 - t * t));
        (s, ds)
    }
}

/// `int_0^inf e^{-z cosh s} g(s) ds` along the deformed path.
///
/// `decay` is a lower bound for the exponential decay rate of `|g|` along the
/// path; it only controls how far the truncation search may go, which is at
/// most `u_cap`. The returned error includes the truncated tail.
pub fn integrate_cosh_weighted<G>(z: Complex64, g: G, decay: f64, tol: f64, u_cap: f64) -> Result<Estimate>
where
    G: Fn(Complex64) -> Complex64,
{
    let path = CoshContour::for_argument(z)?;
    let f = |u: f64| {
        let (s, ds) = path.point(u);
        let e = (-z * s.cosh()).exp();
        if e == Complex64::new(0.0, 0.0) {
            e
        } else {
            e * g(s) * ds
        }
    };
    let env = |u: f64| f(u).norm();

    let cap = u_cap.max(2.0);
    let mut u = 1.0;
    let mut cur = env(u);
    let mut tail = f64::INFINITY;
    let mut end = cap;
    while u < cap {
        let step = (0.25 * u).max(0.5);
        let next_u = (u + step).min(cap);
        let next = env(next_u);
        if next == 0.0 {
            end = next_u;
            tail = 0.0;
            break;
        }
        if next < cur {
            let slope = ((cur / next).ln() / (next_u - u)).max(decay.max(0.0));
            let t = next / slope;
            if t <= 1e-3 * tol {
                end = next_u;
                tail = t;
                break;
            }
        }
        u = next_u;
        cur = next;
    }
    if !tail.is_finite() {
        let last = env(cap);
        tail = if decay > 0.0 { last / decay } else { f64::INFINITY };
        end = cap;
    }
    let integrator = Integrator::new(0.5 * tol, 0.0).with_max_subdivisions(4000);
    let head = integrator.integrate(f, 0.0, 1.0f64.min(end))?;
    let rest = if end > 1.0 {
        integrator.integrate(f, 1.0, end)?
    } else {
        Estimate { value: Complex64::new(0.0, 0.0), err: 0.0 }
    };
    let value = head.value + rest.value;
    let err = head.err + rest.err + tail;
    if err > 10.0 * tol {
        return Err(Error::accuracy("contour integral truncation", value, err));
    }
    Ok(Estimate { value, err })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_and_imaginary_arguments() {
        // K_nu(z) = int_0^inf e^{-z cosh s} cosh(nu s) ds
        let nu: f64 = 0.5;
        for &z in &[Complex64::new(1.3, 0.0), Complex64::new(0.0, 2.0), Complex64::new(0.7, -1.9)] {
            let e = integrate_cosh_weighted(z, |s| (s * nu).cosh(), 0.0, 1e-12, 60.0).unwrap();
            // K_{1/2}(z) = sqrt(pi/(2z)) e^{-z}
            let expect = (std::f64::consts::PI / (2.0 * z)).sqrt() * (-z).exp();
            assert!((e.value - expect).norm() < 1e-11, "z={z}: {} vs {expect}", e.value);
        }
    }

    #[test]
    fn rejects_left_half_plane() {
        assert!(integrate_cosh_weighted(Complex64::new(-1.0, 0.1), |_| Complex64::new(1.0, 0.0), 0.0, 1e-10, 50.0).is_err());
    }
}
