//! Physical parameters, points in the plane, the vector potential and a
//! finite-difference application of the Hamiltonian on a single partial wave.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest radius (in units of `1/sqrt(b0)`) at which the Hamiltonian is applied.
pub const R_MIN: f64 = 1e-6;

/// Flux `alpha` and field strength `b0` of the Hamiltonian.
///
/// `alpha` must lie in `[0, 1)` and `b0` must be strictly positive. The value
/// `alpha = 0` is the reference (pure uniform field) mode, for which the
/// diffractive part of the kernel vanishes identically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    alpha: f64,
    b0: f64,
}

impl FieldParams {
    pub fn new(alpha: f64, b0: f64) -> Result<Self> {
        if !alpha.is_finite() || !(0.0..1.0).contains(&alpha) {
            return Err(Error::invalid(format!("alpha must lie in [0, 1), got {alpha}")));
        }
        if !b0.is_finite() || b0 <= 0.0 {
            return Err(Error::invalid(format!("b0 must be positive, got {b0}")));
        }
        Ok(FieldParams { alpha, b0 })
    }

    /// The `alpha = 0` reference configuration.
    pub fn reference(b0: f64) -> Result<Self> {
        Self::new(0.0, b0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn is_reference(&self) -> bool {
        self.alpha == 0.0
    }

    /// `|k + alpha|`, the Bessel order of the k-th partial wave.
    pub fn alpha_k(&self, k: i64) -> f64 {
        (k as f64 + self.alpha).abs()
    }
}

/// A point in polar coordinates. The angle is any real number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 || !theta.is_finite() {
            return Err(Error::domain(format!("invalid polar point ({r}, {theta})")));
        }
        Ok(PolarPoint { r, theta })
    }

    pub fn to_cartesian(self) -> CartesianPoint {
        CartesianPoint {
            x1: self.r * self.theta.cos(),
            x2: self.r * self.theta.sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianPoint {
    pub x1: f64,
    pub x2: f64,
}

impl CartesianPoint {
    pub fn new(x1: f64, x2: f64) -> Self {
        CartesianPoint { x1, x2 }
    }

    pub fn norm(&self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn to_polar(self) -> PolarPoint {
        PolarPoint {
            r: self.norm(),
            theta: self.x2.atan2(self.x1),
        }
    }
}

/// Vector potential `alpha (-x2, x1)/|x|^2 + (b0/2)(-x2, x1)` for arbitrary
/// real `alpha` and `b0`.
pub fn vector_potential_raw(p: CartesianPoint, alpha: f64, b0: f64) -> Result<(f64, f64)> {
    let r2 = p.x1 * p.x1 + p.x2 * p.x2;
    if r2 == 0.0 {
        return Err(Error::domain("vector potential is singular at the origin"));
    }
    let s = alpha / r2 + 0.5 * b0;
    Ok((-p.x2 * s, p.x1 * s))
}

pub fn vector_potential(p: CartesianPoint, params: &FieldParams) -> Result<(f64, f64)> {
    vector_potential_raw(p, params.alpha, params.b0)
}

/// Maximum of the central-difference divergence of the vector potential over
/// the sample points. The exact value is zero.
pub fn divergence_check(params: &FieldParams, points: &[CartesianPoint], h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::invalid(format!("step must be positive, got {h}")));
    }
    let mut worst = 0.0f64;
    for p in points {
        if p.norm() <= 2.0 * h {
            return Err(Error::domain(format!(
                "point ({}, {}) is within 2h of the origin",
                p.x1, p.x2
            )));
        }
        let a = |x1: f64, x2: f64| vector_potential(CartesianPoint::new(x1, x2), params);
        let (ap, _) = a(p.x1 + h, p.x2)?;
        let (am, _) = a(p.x1 - h, p.x2)?;
        let (_, bp) = a(p.x1, p.x2 + h)?;
        let (_, bm) = a(p.x1, p.x2 - h)?;
        let div = (ap - am) / (2.0 * h) + (bp - bm) / (2.0 * h);
        worst = worst.max(div.abs());
    }
    Ok(worst)
}

/// Applies `-d^2/dr^2 - (1/r) d/dr + r^-2 (k + alpha + b0 r^2/2)^2` to the
/// samples `g` of the k-th partial wave taken on the uniform grid `radii`.
///
/// Derivatives use five-point central stencils. The result has one entry per
/// interior radius, i.e. for `radii[2..n-2]`.
pub fn apply_hamiltonian(
    g: &[Complex64],
    k: i64,
    params: &FieldParams,
    radii: &[f64],
) -> Result<Vec<Complex64>> {
    let n = radii.len();
    if n < 5 {
        return Err(Error::invalid(format!("need at least 5 stencil points, got {n}")));
    }
    if g.len() != n {
        return Err(Error::invalid(format!(
            "{} samples for {} radii",
            g.len(),
            n
        )));
    }
    let r_min = R_MIN / params.b0.sqrt();
    if radii[0] <= 0.0 {
        return Err(Error::domain(format!("non-positive radius {}", radii[0])));
    }
    if radii[0] < r_min {
        return Err(Error::domain(format!(
            "radius {} is below the guard {r_min}",
            radii[0]
        )));
    }
    let h = (radii[n - 1] - radii[0]) / (n - 1) as f64;
    for (i, w) in radii.windows(2).enumerate() {
        let d = w[1] - w[0];
        if d <= 0.0 {
            return Err(Error::invalid("radii must be strictly increasing"));
        }
        if (d - h).abs() > 1e-9 * h.max(radii[i + 1].abs()) {
            return Err(Error::invalid("radii must be uniformly spaced"));
        }
    }
    let c = k as f64 + params.alpha;
    let out = (2..n - 2)
        .map(|i| {
            let r = radii[i];
            let d1 = (g[i - 2] - g[i - 1] * 8.0 + g[i + 1] * 8.0 - g[i + 2]) / (12.0 * h);
            let d2 = (-g[i - 2] + g[i - 1] * 16.0 - g[i] * 30.0 + g[i + 1] * 16.0 - g[i + 2])
                / (12.0 * h * h);
            let v = (c + 0.5 * params.b0 * r * r) / r;
            -d2 - d1 / r + g[i] * (v * v)
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(FieldParams::new(0.5, 1.0).is_ok());
        assert!(FieldParams::new(1.0, 1.0).is_err());
        assert!(FieldParams::new(-0.1, 1.0).is_err());
        assert!(FieldParams::new(0.5, 0.0).is_err());
        assert!(FieldParams::reference(2.0).unwrap().is_reference());
    }

    #[test]
    fn potential_examples() {
        let (a, b) = vector_potential_raw(CartesianPoint::new(1.0, 0.0), 1.0, 0.0).unwrap();
        assert!((a - 0.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
        let p = FieldParams::reference(2.0).unwrap();
        let (a, b) = vector_potential(CartesianPoint::new(0.0, 1.0), &p).unwrap();
        assert!((a + 1.0).abs() < 1e-15 && b.abs() < 1e-15);
        let p = FieldParams::new(0.5, 1.0).unwrap();
        let (a, b) = vector_potential(CartesianPoint::new(3.0, 4.0), &p).unwrap();
        assert!((a + 2.08).abs() < 1e-14 && (b - 1.56).abs() < 1e-14);
        assert!(vector_potential(CartesianPoint::new(0.0, 0.0), &p).is_err());
    }

    #[test]
    fn divergence_vanishes() {
        let circle: Vec<_> = (0..16)
            .map(|j| PolarPoint { r: 1.0, theta: j as f64 * 0.4 }.to_cartesian())
            .collect();
        for &(a, b) in &[(0.3, 1.0), (0.9, 5.0), (0.0, 2.0)] {
            let p = FieldParams::new(a, b).unwrap();
            assert!(divergence_check(&p, &circle, 1e-4).unwrap() < 1e-6);
        }
        let p = FieldParams::new(0.5, 1.0).unwrap();
        assert!(divergence_check(&p, &[CartesianPoint::new(1.0, 1.0)], 1e-3).unwrap() < 1e-5);
        let p = FieldParams::new(0.9, 5.0).unwrap();
        assert!(divergence_check(&p, &[CartesianPoint::new(0.1, 0.0)], 1e-5).unwrap() < 1e-3);
        assert!(divergence_check(&p, &[CartesianPoint::new(1e-5, 0.0)], 1e-5).is_err());
    }

    #[test]
    fn divergence_converges_quadratically() {
        let p = FieldParams::new(0.7, 3.0).unwrap();
        let pts = [CartesianPoint::new(0.3, 0.2)];
        let e1 = divergence_check(&p, &pts, 1e-2).unwrap();
        let e2 = divergence_check(&p, &pts, 5e-3).unwrap();
        assert!(e1 / e2 > 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn hamiltonian_of_zero_and_linearity() {
        let p = FieldParams::new(0.4, 1.0).unwrap();
        let radii: Vec<f64> = (0..40).map(|i| 0.1 + 0.01 * i as f64).collect();
        let zero = vec![Complex64::new(0.0, 0.0); radii.len()];
        let hz = apply_hamiltonian(&zero, 1, &p, &radii).unwrap();
        assert_eq!(hz.len(), radii.len() - 4);
        assert!(hz.iter().all(|v| v.norm() == 0.0));

        let g1: Vec<_> = radii.iter().map(|r| Complex64::new(r.sin(), r * r)).collect();
        let g2: Vec<_> = radii.iter().map(|r| Complex64::new((-r).exp(), 0.3)).collect();
        let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
        let mix: Vec<_> = g1.iter().zip(&g2).map(|(x, y)| a * x + b * y).collect();
        let h1 = apply_hamiltonian(&g1, 1, &p, &radii).unwrap();
        let h2 = apply_hamiltonian(&g2, 1, &p, &radii).unwrap();
        let hm = apply_hamiltonian(&mix, 1, &p, &radii).unwrap();
        for i in 0..hm.len() {
            let d = hm[i] - (a * h1[i] + b * h2[i]);
            assert!(d.norm() <= 1e-12 * hm[i].norm().max(1.0));
        }
    }

    #[test]
    fn hamiltonian_guards() {
        let p = FieldParams::new(0.4, 1.0).unwrap();
        let g = vec![Complex64::new(1.0, 0.0); 4];
        assert!(apply_hamiltonian(&g, 0, &p, &[0.1, 0.2, 0.3, 0.4]).is_err());
        let g = vec![Complex64::new(1.0, 0.0); 5];
        assert!(matches!(
            apply_hamiltonian(&g, 0, &p, &[0.0, 0.1, 0.2, 0.3, 0.4]),
            Err(Error::Domain(_))
        ));
        assert!(apply_hamiltonian(&g, 0, &p, &[0.1, 0.2, 0.35, 0.4, 0.5]).is_err());
    }
}
