//! Kernel of `e^{-itH}` by three independent constructions, plus the
//! uniform-field (Mehler) reference kernel.
//!
//! All constructions share the prefactor
//! `b0 e^{-i tau alpha} / (4 pi i sin tau) * e^{i b0 (r1^2 + r2^2) cot(tau) / 4}`
//! with `tau = t b0`, and differ in how they evaluate the angular sum
//! `sum_k e^{ik theta} I_{alpha_k}(z)`, `z = b0 r1 r2 / (2i sin tau)`,
//! `theta = theta1 - theta2 - tau`.

mod branch;
mod closed;
mod covering;
mod mehler;
mod partial_wave;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FieldParams, PolarPoint};

pub use branch::{branch_data, sheet_weight, BranchData};
pub use closed::{diffractive_estimate, diffractive_integrand, diffractive_term, kernel_closed};
pub use covering::{kernel_covering, partial_fraction_closed, partial_fraction_sum, partial_fraction_truncated};
pub use mehler::mehler_kernel;
pub use partial_wave::{bessel_tail_bound, kernel_partial_wave, suggested_k_max};

pub(crate) use partial_wave::partial_wave_ladders;

/// Queries with `|sin(t b0)|` below this are rejected.
pub const SIN_GUARD: f64 = 1e-6;
/// Smallest accepted kernel tolerance.
pub const MIN_TOL: f64 = 1e-12;
/// Default `|z|` limit for the partial-wave sum.
pub const DEFAULT_Z_CAP: f64 = 40.0;

/// A time and a pair of points at which to evaluate the kernel, with
/// truncation and tolerance controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuery {
    t: f64,
    x: PolarPoint,
    y: PolarPoint,
    tol: f64,
    k_max: Option<u32>,
    j_window: u32,
    z_cap: f64,
}

impl KernelQuery {
    /// Defaults: `tol = 1e-10`, `k_max` chosen from the Bessel tail bound,
    /// `j_window = 64`, `z_cap = 40`.
    pub fn new(t: f64, x: PolarPoint, y: PolarPoint, params: &FieldParams) -> Result<Self> {
        let q = KernelQuery {
            t,
            x,
            y,
            tol: 1e-10,
            k_max: None,
            j_window: 64,
            z_cap: DEFAULT_Z_CAP,
        };
        q.validate(params)?;
        Ok(q)
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol >= MIN_TOL) || !tol.is_finite() {
            return Err(Error::invalid(format!("kernel tolerance {tol:e} below {MIN_TOL:e}")));
        }
        self.tol = tol;
        Ok(self)
    }

    pub fn with_k_max(mut self, k_max: u32) -> Result<Self> {
        if k_max < 1 {
            return Err(Error::invalid("k_max must be at least 1"));
        }
        self.k_max = Some(k_max);
        Ok(self)
    }

    pub fn with_j_window(mut self, j_window: u32) -> Result<Self> {
        if j_window < 1 {
            return Err(Error::invalid("j_window must be at least 1"));
        }
        self.j_window = j_window;
        Ok(self)
    }

    /// Raises or lowers the `|z|` limit of the partial-wave sum (at most 80).
    pub fn with_z_cap(mut self, z_cap: f64) -> Result<Self> {
        if !(z_cap > 0.0 && z_cap <= crate::specfun::BESSEL_I_Z_CAP) {
            return Err(Error::invalid(format!("z_cap {z_cap} outside (0, 80]")));
        }
        self.z_cap = z_cap;
        Ok(self)
    }

    pub fn validate(&self, params: &FieldParams) -> Result<()> {
        if !self.t.is_finite() {
            return Err(Error::invalid("time must be finite"));
        }
        let s = (self.t * params.b0()).sin();
        if s.abs() < SIN_GUARD {
            return Err(Error::domain(format!(
                "t = {} is within the singular-time guard (|sin t b0| = {:e})",
                self.t,
                s.abs()
            )));
        }
        if !(self.tol >= MIN_TOL) {
            return Err(Error::invalid(format!("kernel tolerance {:e} below {MIN_TOL:e}", self.tol)));
        }
        Ok(())
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn x(&self) -> PolarPoint {
        self.x
    }

    pub fn y(&self) -> PolarPoint {
        self.y
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn j_window(&self) -> u32 {
        self.j_window
    }

    pub fn z_cap(&self) -> f64 {
        self.z_cap
    }

    /// Explicit truncation, or the smallest one whose tail bound meets `tol`.
    pub fn k_max(&self, params: &FieldParams) -> u32 {
        self.k_max
            .unwrap_or_else(|| suggested_k_max(self.z(params).norm(), params, 0.1 * self.tol))
    }

    /// `z = b0 r1 r2 / (2i sin tau)`.
    pub fn z(&self, params: &FieldParams) -> Complex64 {
        bessel_argument(self.t, self.x.r, self.y.r, params)
    }

    /// `theta1 - theta2 - t b0`, unreduced.
    pub fn phase(&self, params: &FieldParams) -> f64 {
        self.x.theta - self.y.theta - self.t * params.b0()
    }

    /// The common prefactor of every construction.
    pub fn prefactor(&self, params: &FieldParams) -> Complex64 {
        radial_prefactor(self.t, self.x.r, self.y.r, params)
    }
}

/// The prefactor as a function of the two radii.
pub fn radial_prefactor(t: f64, r1: f64, r2: f64, params: &FieldParams) -> Complex64 {
    let b0 = params.b0();
    let tau = t * b0;
    let (s, c) = tau.sin_cos();
    let front = Complex64::new(0.0, -b0 / (4.0 * PI * s));
    let phase = -tau * params.alpha() + b0 * (r1 * r1 + r2 * r2) * c / (4.0 * s);
    front * Complex64::from_polar(1.0, phase)
}

/// `z = b0 r1 r2 / (2i sin(t b0))`.
pub fn bessel_argument(t: f64, r1: f64, r2: f64, params: &FieldParams) -> Complex64 {
    let s = (t * params.b0()).sin();
    Complex64::new(0.0, -params.b0() * r1 * r2 / (2.0 * s))
}

/// `|prefactor| = b0 / (4 pi |sin t b0|)`.
pub fn prefactor_magnitude(t: f64, params: &FieldParams) -> f64 {
    params.b0() / (4.0 * PI * (t * params.b0()).sin().abs())
}

/// Which formula produced a kernel value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Closed,
    PartialWave,
    Covering,
    Mehler,
}

impl Construction {
    /// The three constructions valid for any flux.
    pub const CROSS_CHECKED: [Construction; 3] =
        [Construction::Closed, Construction::PartialWave, Construction::Covering];

    pub fn name(&self) -> &'static str {
        match self {
            Construction::Closed => "closed",
            Construction::PartialWave => "partial_wave",
            Construction::Covering => "covering",
            Construction::Mehler => "mehler",
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" => Ok(Construction::Closed),
            "partial_wave" => Ok(Construction::PartialWave),
            "covering" => Ok(Construction::Covering),
            "mehler" => Ok(Construction::Mehler),
            other => Err(Error::invalid(format!("unknown construction {other:?}"))),
        }
    }
}

/// A kernel value with its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: Complex64,
    pub construction: Construction,
    pub err_est: f64,
}

impl KernelValue {
    fn new(value: Complex64, construction: Construction, err_est: f64) -> Result<Self> {
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::accuracy(
                format!("{construction} kernel"),
                value,
                f64::INFINITY,
            ));
        }
        Ok(KernelValue {
            value,
            construction,
            err_est: err_est.max(0.0),
        })
    }
}

/// Evaluates one construction. `Mehler` is only accepted for `alpha = 0`.
pub fn kernel(construction: Construction, q: &KernelQuery, params: &FieldParams) -> Result<KernelValue> {
    match construction {
        Construction::Closed => kernel_closed(q, params),
        Construction::PartialWave => kernel_partial_wave(q, params),
        Construction::Covering => kernel_covering(q, params),
        Construction::Mehler => {
            if !params.is_reference() {
                return Err(Error::Unsupported(
                    "the Mehler kernel describes alpha = 0 only".into(),
                ));
            }
            let v = mehler_kernel(q.t, q.x, q.y, params.b0())?;
            KernelValue::new(v, Construction::Mehler, 1e-15 * v.norm())
        }
    }
}

/// The standard query battery for one flux: `t` in `{0.2, 0.7, 1.2}/b0`,
/// `r1, r2` in `{0.5, 1, 2}`, angles drawn uniformly from `[-pi, pi)` with a
/// seeded generator. 27 queries.
pub fn standard_battery(params: &FieldParams, seed: u64) -> Result<Vec<KernelQuery>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(27);
    for &t in &[0.2, 0.7, 1.2] {
        for &r1 in &[0.5, 1.0, 2.0] {
            for &r2 in &[0.5, 1.0, 2.0] {
                let x = PolarPoint { r: r1, theta: rng.gen_range(-PI..PI) };
                let y = PolarPoint { r: r2, theta: rng.gen_range(-PI..PI) };
                out.push(KernelQuery::new(t / params.b0(), x, y, params)?);
            }
        }
    }
    Ok(out)
}

/// Evaluates many queries in parallel; results keep the input order.
pub fn kernel_batch(
    construction: Construction,
    queries: &[KernelQuery],
    params: &FieldParams,
) -> Vec<Result<KernelValue>> {
    queries.par_iter().map(|q| kernel(construction, q, params)).collect()
}

/// The angular sum at `r1 r2 = 0`: only `I_0(0) = 1` survives, which needs `alpha_0 = 0`.
fn bracket_at_origin(params: &FieldParams) -> Complex64 {
    if params.is_reference() {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(r: f64, th: f64) -> PolarPoint {
        PolarPoint { r, theta: th }
    }

    #[test]
    fn query_validation() {
        let p = FieldParams::new(0.5, 1.0).unwrap();
        assert!(KernelQuery::new(PI, pt(1.0, 0.0), pt(1.0, 0.0), &p).is_err());
        assert!(KernelQuery::new(1e-7, pt(1.0, 0.0), pt(1.0, 0.0), &p).is_err());
        let q = KernelQuery::new(0.4, pt(1.0, 0.0), pt(1.0, 0.0), &p).unwrap();
        assert!(q.with_tol(1e-13).is_err());
        assert!(q.with_k_max(0).is_err());
        assert!(q.with_j_window(0).is_err());
        assert!(q.with_z_cap(100.0).is_err());
        assert!(q.with_tol(1e-12).is_ok());
    }

    #[test]
    fn prefactor_magnitude_is_periodic() {
        let p = FieldParams::new(0.3, 2.0).unwrap();
        for &t in &[0.1, 0.37, 0.9] {
            let a = KernelQuery::new(t, pt(0.7, 0.1), pt(1.3, -0.4), &p).unwrap();
            let b = KernelQuery::new(t + PI / 2.0, pt(0.7, 0.1), pt(1.3, -0.4), &p).unwrap();
            let ma = a.prefactor(&p).norm() * (t * 2.0f64).sin().abs();
            let mb = b.prefactor(&p).norm() * ((t + PI / 2.0) * 2.0f64).sin().abs();
            assert!((ma - mb).abs() < 1e-14);
            assert!((a.prefactor(&p).norm() - prefactor_magnitude(t, &p)).abs() < 1e-13);
        }
    }

    #[test]
    fn construction_names_round_trip() {
        for c in [Construction::Closed, Construction::PartialWave, Construction::Covering, Construction::Mehler] {
            assert_eq!(c.name().parse::<Construction>().unwrap(), c);
        }
        assert!("other".parse::<Construction>().is_err());
    }

    #[test]
    fn reference_query_agreement() {
        let p = FieldParams::new(0.5, 1.0).unwrap();
        let q = KernelQuery::new(0.4, pt(1.0, 0.3), pt(1.5, -0.2), &p).unwrap();
        let c = kernel_closed(&q, &p).unwrap();
        let w = kernel_partial_wave(&q, &p).unwrap();
        let v = kernel_covering(&q, &p).unwrap();
        assert!((c.value - w.value).norm() < 1e-6);
        assert!((c.value - v.value).norm() < 1e-6);
    }

    #[test]
    fn three_constructions_agree_on_battery() {
        for &(a, b0) in &[(0.25, 1.0), (0.5, 2.0), (0.8, 0.5)] {
            let p = FieldParams::new(a, b0).unwrap();
            for q in standard_battery(&p, 7).unwrap() {
                let scale = prefactor_magnitude(q.t(), &p);
                let vals: Vec<KernelValue> = Construction::CROSS_CHECKED
                    .iter()
                    .map(|&c| kernel(c, &q, &p).unwrap())
                    .collect();
                for i in 0..3 {
                    for j in 0..i {
                        let d = (vals[i].value - vals[j].value).norm() / scale;
                        assert!(d < 1e-8, "alpha {a}: {:?} {d:e}", q);
                    }
                }
            }
        }
    }

    #[test]
    fn near_zero_flux_matches_mehler() {
        let p = FieldParams::new(1e-6, 1.0).unwrap();
        for &(t, x, y) in &[(0.3, pt(1.0, 0.2), pt(0.7, 2.0)), (1.9, pt(2.0, -1.0), pt(0.4, 0.5))] {
            let q = KernelQuery::new(t, x, y, &p).unwrap();
            let c = kernel_closed(&q, &p).unwrap();
            let m = mehler_kernel(t, x, y, 1.0).unwrap();
            assert!((c.value - m).norm() < 1e-4 * m.norm());
        }
    }

    #[test]
    fn edge_phase_is_continuous_for_all_constructions() {
        let p = FieldParams::new(0.3, 1.0).unwrap();
        let t = 0.5;
        // theta1 - theta2 - t = pi exactly, and just off it on both sides
        let base = PI + t;
        for c in Construction::CROSS_CHECKED {
            let vals: Vec<Complex64> = [base, base - 1e-8, base + 1e-8]
                .iter()
                .map(|&th| kernel(c, &KernelQuery::new(t, pt(1.0, th), pt(1.2, 0.0), &p).unwrap(), &p).unwrap().value)
                .collect();
            assert!((vals[0] - vals[1]).norm() < 1e-6 && (vals[0] - vals[2]).norm() < 1e-6, "{c}: {vals:?}");
        }
    }

    #[test]
    fn mehler_needs_zero_flux() {
        let p = FieldParams::new(0.5, 1.0).unwrap();
        let q = KernelQuery::new(0.4, pt(1.0, 0.0), pt(1.0, 0.0), &p).unwrap();
        assert!(matches!(kernel(Construction::Mehler, &q, &p), Err(Error::Unsupported(_))));
    }
}
