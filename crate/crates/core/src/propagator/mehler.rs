use std::f64::consts::PI;

use num_complex::Complex64;

use super::SIN_GUARD;
use crate::error::{Error, Result};
use crate::model::PolarPoint;

/// Kernel of `e^{-itH}` for the pure uniform field:
/// `b0 / (4 pi i sin tau) * exp{(i b0 / 4)(cot(tau) |x - y|^2 + 2 x ^ y)}`, `tau = t b0`.
pub fn mehler_kernel(t: f64, x: PolarPoint, y: PolarPoint, b0: f64) -> Result<Complex64> {
    if !(b0 > 0.0) {
        return Err(Error::invalid(format!("b0 must be positive, got {b0}")));
    }
    let tau = t * b0;
    let (s, c) = tau.sin_cos();
    if s.abs() < SIN_GUARD {
        return Err(Error::domain(format!("t = {t} is within the singular-time guard")));
    }
    let (a, b) = (x.to_cartesian(), y.to_cartesian());
    let dist2 = (a.x1 - b.x1).powi(2) + (a.x2 - b.x2).powi(2);
    let wedge = a.x1 * b.x2 - a.x2 * b.x1;
    let phase = 0.25 * b0 * (c / s * dist2 + 2.0 * wedge);
    Ok(Complex64::new(0.0, -b0 / (4.0 * PI * s)) * Complex64::from_polar(1.0, phase))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(r: f64, th: f64) -> PolarPoint {
        PolarPoint { r, theta: th }
    }

    #[test]
    fn magnitude_and_origin() {
        for &(t, b0) in &[(0.3, 1.0), (1.1, 0.5), (-0.4, 2.0)] {
            let m = mehler_kernel(t, pt(1.2, 0.4), pt(0.3, -2.0), b0).unwrap();
            let s: f64 = (t * b0).sin();
            assert!((m.norm() - b0 / (4.0 * PI * s.abs())).abs() < 1e-14);
            let o = mehler_kernel(t, pt(0.0, 0.0), pt(0.0, 0.0), b0).unwrap();
            assert!((o - Complex64::new(0.0, -b0 / (4.0 * PI * s))).norm() < 1e-15);
        }
        assert!(mehler_kernel(PI, pt(1.0, 0.0), pt(1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn weak_field_limit_is_free_kernel() {
        // e^{it Delta}(x, y) = e^{i |x-y|^2 / (4t)} / (4 pi i t)
        let (t, b0) = (0.7, 1e-4);
        let (x, y) = (pt(1.0, 0.3), pt(1.8, 2.1));
        let m = mehler_kernel(t, x, y, b0).unwrap();
        let (a, b) = (x.to_cartesian(), y.to_cartesian());
        let d2 = (a.x1 - b.x1).powi(2) + (a.x2 - b.x2).powi(2);
        let free = Complex64::from_polar(1.0, d2 / (4.0 * t)) / Complex64::new(0.0, 4.0 * PI * t);
        assert!((m - free).norm() < 1e-3 * free.norm());
    }
}
