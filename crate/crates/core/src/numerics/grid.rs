//! Radial rules in the variable `s = b0 r^2 / 2` and polar product grids.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::rules::{gauss_laguerre, gauss_legendre};
use crate::error::{Error, Result};
use crate::model::PolarPoint;

/// How a radial rule was built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RadialKind {
    /// Gauss-Laguerre nodes; exact for `s^nu e^{-s}` times polynomials.
    Laguerre { nu: f64 },
    /// Graded Gauss-Legendre head on `[0, split]` (nodes `split * u^power`)
    /// followed by a shifted Gauss-Laguerre tail.
    Graded {
        head: usize,
        split: f64,
        tail: usize,
        power: u32,
    },
    /// Trapezoid rule on uniformly spaced radii. Low order; meant for
    /// sampling grids.
    UniformRadius { r_max: f64, count: usize },
}

/// Nodes and weights for `int_0^inf g(s) ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kind: RadialKind,
}

impl RadialRule {
    /// Gauss-Laguerre rule for integrands behaving like `s^nu e^{-s}`.
    pub fn laguerre(n: usize, nu: f64) -> Result<Self> {
        let rule = gauss_laguerre(n, nu)?;
        let weights = rule
            .nodes()
            .iter()
            .zip(rule.log_weights())
            .map(|(&x, lw)| (lw + x - nu * x.ln()).exp())
            .collect();
        Ok(RadialRule {
            nodes: rule.nodes().to_vec(),
            weights,
            kind: RadialKind::Laguerre { nu },
        })
    }

    /// Graded rule that resolves algebraic behaviour `s^a` at the origin for
    /// any `a > -1` and exponential decay at infinity.
    pub fn graded(head: usize, split: f64, tail: usize, power: u32) -> Result<Self> {
        if !(split > 0.0) || power == 0 {
            return Err(Error::invalid("graded rule needs split > 0 and power >= 1"));
        }
        let gl = gauss_legendre(head)?;
        let q = power as f64;
        let mut nodes = Vec::with_capacity(head + tail);
        let mut weights = Vec::with_capacity(head + tail);
        for (&x, &w) in gl.nodes().iter().zip(gl.weights()) {
            let u = 0.5 * (x + 1.0);
            nodes.push(split * u.powi(power as i32));
            weights.push(0.5 * w * split * q * u.powi(power as i32 - 1));
        }
        if tail > 0 {
            let lag = gauss_laguerre(tail, 0.0)?;
            for (&x, &lw) in lag.nodes().iter().zip(lag.log_weights()) {
                nodes.push(split + x);
                weights.push((lw + x).exp());
            }
        }
        Ok(RadialRule {
            nodes,
            weights,
            kind: RadialKind::Graded {
                head,
                split,
                tail,
                power,
            },
        })
    }

    /// Default graded rule used for data grids.
    pub fn standard() -> Self {
        Self::graded(40, 4.0, 80, 6).expect("standard radial rule parameters are valid")
    }

    /// Uniform radii `r_max * i / count`, `i = 1..=count`, with trapezoid
    /// weights in `r` converted to the `s` variable.
    pub fn uniform_radius(b0: f64, r_max: f64, count: usize) -> Result<Self> {
        if !(r_max > 0.0) || count == 0 || !(b0 > 0.0) {
            return Err(Error::invalid("uniform radial rule needs r_max > 0, count >= 1, b0 > 0"));
        }
        let h = r_max / count as f64;
        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for i in 1..=count {
            let r = h * i as f64;
            let wr = if i == count { 0.5 * h } else { h };
            nodes.push(0.5 * b0 * r * r);
            weights.push(wr * b0 * r);
        }
        Ok(RadialRule {
            nodes,
            weights,
            kind: RadialKind::UniformRadius { r_max, count },
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> RadialKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Product grid of rings (radial rule mapped through `r = sqrt(2 s / b0)`)
/// and `n_theta` uniform angles `theta_j = 2 pi j / n_theta`.
///
/// Nodes are stored ring by ring. An optional origin ring with zero weight
/// lets maximum norms see `r = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    b0: f64,
    radial: RadialRule,
    n_theta: usize,
    radii: Vec<f64>,
    ring_weights: Vec<f64>,
    origin: bool,
}

impl PolarGrid {
    pub const DEFAULT_ANGLES: usize = 256;

    pub fn new(b0: f64, radial: RadialRule, n_theta: usize, include_origin: bool) -> Result<Self> {
        if n_theta < 8 {
            return Err(Error::invalid(format!("need at least 8 angles, got {n_theta}")));
        }
        if !(b0 > 0.0) {
            return Err(Error::invalid(format!("b0 must be positive, got {b0}")));
        }
        let dtheta = 2.0 * PI / n_theta as f64;
        let mut radii = Vec::with_capacity(radial.len() + 1);
        let mut ring_weights = Vec::with_capacity(radial.len() + 1);
        if include_origin {
            radii.push(0.0);
            ring_weights.push(0.0);
        }
        for (&s, &w) in radial.nodes().iter().zip(radial.weights()) {
            radii.push((2.0 * s / b0).sqrt());
            ring_weights.push(w / b0 * dtheta);
        }
        Ok(PolarGrid {
            b0,
            radial,
            n_theta,
            radii,
            ring_weights,
            origin: include_origin,
        })
    }

    /// Standard graded grid with the default angular count.
    pub fn standard(b0: f64) -> Result<Self> {
        Self::new(b0, RadialRule::standard(), Self::DEFAULT_ANGLES, false)
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn radial_rule(&self) -> &RadialRule {
        &self.radial
    }

    pub fn angular_count(&self) -> usize {
        self.n_theta
    }

    pub fn has_origin(&self) -> bool {
        self.origin
    }

    pub fn ring_count(&self) -> usize {
        self.radii.len()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Area weight of each node on ring `i` (including the Jacobian).
    pub fn ring_weight(&self, ring: usize) -> f64 {
        self.ring_weights[ring]
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta as f64
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn index(&self, ring: usize, j: usize) -> usize {
        ring * self.n_theta + j
    }

    pub fn node(&self, i: usize) -> PolarPoint {
        let ring = i / self.n_theta;
        let j = i % self.n_theta;
        PolarPoint {
            r: self.radii[ring],
            theta: self.theta(j),
        }
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.ring_weights[i / self.n_theta]
    }

    pub fn nodes(&self) -> impl Iterator<Item = PolarPoint> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.weight(i))
    }

    /// True when both grids place nodes at the same angles.
    pub fn same_angles(&self, other: &PolarGrid) -> bool {
        self.n_theta == other.n_theta
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_of_gaussians() {
        for &b0 in &[0.5, 1.0, 2.0] {
            let grid = PolarGrid::new(b0, RadialRule::standard(), 16, false).unwrap();
            let total: f64 = grid
                .nodes()
                .zip(grid.weights())
                .map(|(p, w)| w * (-p.r * p.r).exp())
                .sum();
            assert!((total / PI - 1.0).abs() < 1e-12, "b0={b0}");
            let wide: f64 = grid
                .nodes()
                .zip(grid.weights())
                .map(|(p, w)| w * (-0.25 * b0 * p.r * p.r).exp() * (1.0 + p.r))
                .sum();
            let a = 0.25 * b0;
            let exact = PI / a + 2.0 * PI * PI.sqrt() / (4.0 * a.powf(1.5));
            assert!((wide / exact - 1.0).abs() < 1e-8, "b0={b0}: {wide} vs {exact}");
        }
    }

    #[test]
    fn graded_handles_algebraic_origin() {
        let rule = RadialRule::standard();
        for &a in &[0.0, 0.2, 0.5, 1.3, 4.7] {
            let v: f64 = rule
                .nodes()
                .iter()
                .zip(rule.weights())
                .map(|(s, w)| w * s.powf(a) * (-s).exp())
                .sum();
            let exact = crate::specfun::gamma(a + 1.0);
            assert!((v / exact - 1.0).abs() < 1e-12, "a={a}");
        }
    }

    #[test]
    fn laguerre_radial_weights() {
        let rule = RadialRule::laguerre(30, 0.7).unwrap();
        let v: f64 = rule
            .nodes()
            .iter()
            .zip(rule.weights())
            .map(|(s, w)| w * s.powf(0.7) * (-s).exp() * s * s)
            .sum();
        assert!((v / crate::specfun::gamma(3.7) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_layout() {
        let grid = PolarGrid::new(1.0, RadialRule::graded(4, 1.0, 4, 4).unwrap(), 8, true).unwrap();
        assert_eq!(grid.ring_count(), 9);
        assert_eq!(grid.len(), 72);
        assert_eq!(grid.node(0).r, 0.0);
        assert_eq!(grid.weight(3), 0.0);
        let p = grid.node(grid.index(2, 3));
        assert!((p.theta - 3.0 * PI / 4.0).abs() < 1e-15);
        assert!(PolarGrid::new(1.0, RadialRule::standard(), 7, false).is_err());
    }

    #[test]
    fn uniform_radius_rule() {
        let rule = RadialRule::uniform_radius(2.0, 10.0, 2000).unwrap();
        let grid = PolarGrid::new(2.0, rule, 8, true).unwrap();
        let total: f64 = grid
            .nodes()
            .zip(grid.weights())
            .map(|(p, w)| w * (-p.r * p.r).exp())
            .sum();
        assert!((total / PI - 1.0).abs() < 1e-5);
    }
}
