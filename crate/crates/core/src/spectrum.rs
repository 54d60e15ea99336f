//! Eigenvalues, eigenfunctions and multiplicities of the Hamiltonian, and the
//! expansion of data in the orthonormal eigenbasis.
//!
//! In polar coordinates the eigenfunctions are
//! `V_{k,m} = r^{alpha_k} e^{-b0 r^2/4} P_{k,m}(b0 r^2/2) e^{ik theta}` with
//! eigenvalue `(2m + 1 + alpha_k) b0 + (k + alpha) b0`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{apply_hamiltonian, FieldParams, PolarPoint};
use crate::numerics::PolarGrid;
use crate::specfun::{binomial, laguerre_all, ln_gamma, p_poly};

/// Angular momentum `k` and radial quantum number `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub k: i64,
    pub m: u32,
}

impl ModeIndex {
    pub fn new(k: i64, m: u32) -> Self {
        ModeIndex { k, m }
    }

    pub fn alpha_k(&self, params: &FieldParams) -> f64 {
        params.alpha_k(self.k)
    }

    /// `(1 + alpha_k) b0 + (k + alpha) b0`, the eigenvalue of the `m = 0` mode.
    pub fn beta_k(&self, params: &FieldParams) -> f64 {
        let b0 = params.b0();
        (1.0 + self.alpha_k(params)) * b0 + (self.k as f64 + params.alpha()) * b0
    }
}

pub fn eigenvalue(mode: ModeIndex, params: &FieldParams) -> f64 {
    let b0 = params.b0();
    (2.0 * mode.m as f64 + 1.0 + mode.alpha_k(params)) * b0 + (mode.k as f64 + params.alpha()) * b0
}

/// `||V_{k,m}||^2 = pi (2/b0)^{alpha_k+1} Gamma(1+alpha_k) / binom(m+alpha_k, m)`.
pub fn norm_sq(mode: ModeIndex, params: &FieldParams) -> f64 {
    ln_norm_sq(mode, params).exp()
}

fn ln_norm_sq(mode: ModeIndex, params: &FieldParams) -> f64 {
    let ak = mode.alpha_k(params);
    PI.ln() + (ak + 1.0) * (2.0 / params.b0()).ln() + ln_gamma(1.0 + ak) - binomial(mode.m, ak).ln()
}

/// Radial factor `r^{alpha_k} e^{-b0 r^2/4} P_{k,m}(b0 r^2/2)`.
pub fn radial_part(mode: ModeIndex, params: &FieldParams, r: f64) -> f64 {
    let ak = mode.alpha_k(params);
    let s = 0.5 * params.b0() * r * r;
    let env = if r == 0.0 {
        if ak == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (ak * r.ln() - 0.5 * s).exp()
    };
    env * p_poly(mode.k, mode.m, params, s)
}

/// Radial factor of the unit-normalized eigenfunction.
pub fn normalized_radial_part(mode: ModeIndex, params: &FieldParams, r: f64) -> f64 {
    radial_part(mode, params, r) * (-0.5 * ln_norm_sq(mode, params)).exp()
}

/// `V_{k,m}(r, theta)`.
pub fn eigenfunction(mode: ModeIndex, params: &FieldParams, p: PolarPoint) -> Complex64 {
    radial_part(mode, params, p.r) * angular(mode.k, p.theta)
}

/// `V_{k,m} / ||V_{k,m}||`.
pub fn normalized_eigenfunction(mode: ModeIndex, params: &FieldParams, p: PolarPoint) -> Complex64 {
    normalized_radial_part(mode, params, p.r) * angular(mode.k, p.theta)
}

fn angular(k: i64, theta: f64) -> Complex64 {
    let t = theta.rem_euclid(2.0 * PI);
    Complex64::from_polar(1.0, k as f64 * t)
}

/// `[Vtilde_{k,0}(r), ..., Vtilde_{k,m_max}(r)]` radial factors, from one
/// Laguerre recurrence.
fn normalized_radial_ladder(k: i64, m_max: u32, params: &FieldParams, r: f64) -> Vec<f64> {
    let ak = params.alpha_k(k);
    let s = 0.5 * params.b0() * r * r;
    let lag = laguerre_all(m_max, ak, s);
    let base = PI.ln() + (ak + 1.0) * (2.0 / params.b0()).ln() + ln_gamma(1.0 + ak);
    let log_env = if r == 0.0 {
        if ak == 0.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        ak * r.ln() - 0.5 * s
    };
    let mut bin = 1.0;
    lag.iter()
        .enumerate()
        .map(|(m, l)| {
            if m > 0 {
                bin *= (ak + m as f64) / m as f64;
            }
            // P = L / binom and ||V||^2 carries 1/binom, so Vtilde = L / sqrt(binom) * ...
            (log_env - 0.5 * base).exp() * l / bin.sqrt()
        })
        .collect()
}

/// Degeneracy of an eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Multiplicity {
    Finite(u64),
    /// Levels `(2m+1) b0` are shared by every `k < 0`.
    Infinite,
}

impl Multiplicity {
    pub fn is_positive(&self) -> bool {
        !matches!(self, Multiplicity::Finite(0))
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Finite(n) => write!(f, "{n}"),
            Multiplicity::Infinite => write!(f, "inf"),
        }
    }
}

const INTEGRALITY_TOL: f64 = 1e-9;

fn is_natural(x: f64) -> bool {
    x > -INTEGRALITY_TOL && (x - x.round()).abs() <= INTEGRALITY_TOL
}

/// Number of angular momenta `j` for which `lambda` is an eigenvalue, i.e.
/// for which `(lambda - (j+alpha) b0)/(2 b0) - (|j+alpha|+1)/2` is a
/// non-negative integer.
///
/// The scan covers `|j| <= j_window` and is extended until no larger `j`
/// can qualify. For `j < 0` the expression does not depend on `j`, so a
/// qualifying negative `j` makes the level infinitely degenerate.
pub fn multiplicity(lambda: f64, params: &FieldParams, j_window: u64) -> Multiplicity {
    let b0 = params.b0();
    let alpha = params.alpha();
    let n_of = |j: i64| {
        let a = j as f64 + alpha;
        (lambda - a * b0) / (2.0 * b0) - (a.abs() + 1.0) / 2.0
    };
    if n_of(-1) > -INTEGRALITY_TOL && is_natural(n_of(-1)) {
        return Multiplicity::Infinite;
    }
    // for j >= 0 the expression decreases by one per step
    let mut window = j_window as i64;
    while n_of(window + 1) >= -INTEGRALITY_TOL {
        window *= 2;
        window += 1;
    }
    let count = (0..=window).filter(|&j| is_natural(n_of(j))).count();
    Multiplicity::Finite(count as u64)
}

/// Samples of a complex function on a polar grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Arc<PolarGrid>,
    values: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Arc<PolarGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid("wave function values must be finite"));
        }
        Ok(WaveFunction { grid, values })
    }

    pub fn from_fn<F: Fn(PolarPoint) -> Complex64>(grid: Arc<PolarGrid>, f: F) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    pub fn shared_grid(&self) -> Arc<PolarGrid> {
        Arc::clone(&self.grid)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `a * self + b * other` on the same grid.
    pub fn combine(&self, a: Complex64, other: &WaveFunction, b: Complex64) -> Result<Self> {
        if self.grid.as_ref() != other.grid.as_ref() {
            return Err(Error::invalid("wave functions live on different grids"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::new(Arc::clone(&self.grid), values)
    }

    pub fn scale(&self, a: Complex64) -> Self {
        WaveFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    /// `sum_i |u_i|^2 w_i`.
    pub fn norm_sq(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, w)| v.norm_sqr() * w)
            .sum()
    }
}

fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / n as f64))
        .collect()
}

/// `f_k(r) = (1/2pi) int f(r, theta) e^{-ik theta} d theta` on every ring, by
/// the trapezoid rule in angle.
pub fn project_partial_wave(f: &WaveFunction, k: i64) -> Result<Vec<Complex64>> {
    Ok(partial_waves(f, k.unsigned_abs(), Some(k))?.remove(0))
}

/// Partial waves for `k` in `-k_max..=k_max` (or only `only`), indexed
/// `[k + k_max][ring]`.
pub(crate) fn partial_waves(f: &WaveFunction, k_max: u64, only: Option<i64>) -> Result<Vec<Vec<Complex64>>> {
    let grid = f.grid();
    let n = grid.angular_count();
    if n as u64 <= 2 * k_max {
        return Err(Error::invalid(format!(
            "{n} angles cannot resolve |k| = {k_max} without aliasing"
        )));
    }
    let tw = twiddles(n);
    let ks: Vec<i64> = match only {
        Some(k) => vec![k],
        None => (-(k_max as i64)..=k_max as i64).collect(),
    };
    let inv = 1.0 / n as f64;
    let out = ks
        .par_iter()
        .map(|&k| {
            let km = k.rem_euclid(n as i64) as usize;
            (0..grid.ring_count())
                .map(|ring| {
                    let row = &f.values()[ring * n..(ring + 1) * n];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, v) in row.iter().enumerate() {
                        acc += v * tw[(km * j) % n];
                    }
                    acc * inv
                })
                .collect()
        })
        .collect();
    Ok(out)
}

/// How stored coefficients relate to the eigenfunctions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Coefficients against `V_{k,m} / ||V_{k,m}||`.
    UnitEigenfunctions,
}

/// Coefficients `c_{k,m}` for `|k| <= k_max`, `m <= m_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients {
    params: FieldParams,
    k_max: u32,
    m_max: u32,
    table: Vec<Complex64>,
    normalization: Normalization,
}

impl SpectralCoefficients {
    pub fn zeros(params: FieldParams, k_max: u32, m_max: u32) -> Self {
        let len = (2 * k_max as usize + 1) * (m_max as usize + 1);
        SpectralCoefficients {
            params,
            k_max,
            m_max,
            table: vec![Complex64::new(0.0, 0.0); len],
            normalization: Normalization::UnitEigenfunctions,
        }
    }

    /// Builds the table from explicit entries; modes outside the truncation
    /// are rejected.
    pub fn from_modes(
        params: FieldParams,
        k_max: u32,
        m_max: u32,
        entries: &[(ModeIndex, Complex64)],
    ) -> Result<Self> {
        let mut c = Self::zeros(params, k_max, m_max);
        for &(mode, v) in entries {
            let i = c
                .slot(mode)
                .ok_or_else(|| Error::invalid(format!("mode {mode:?} outside the truncation")))?;
            c.table[i] += v;
        }
        Ok(c)
    }

    pub fn from_fn<F: Fn(ModeIndex) -> Complex64>(params: FieldParams, k_max: u32, m_max: u32, f: F) -> Self {
        let mut c = Self::zeros(params, k_max, m_max);
        for (i, mode) in c.modes().enumerate().collect::<Vec<_>>() {
            c.table[i] = f(mode);
        }
        c
    }

    fn slot(&self, mode: ModeIndex) -> Option<usize> {
        if mode.k.unsigned_abs() > self.k_max as u64 || mode.m > self.m_max {
            return None;
        }
        let row = (mode.k + self.k_max as i64) as usize;
        Some(row * (self.m_max as usize + 1) + mode.m as usize)
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Coefficient of a mode; zero outside the truncation.
    pub fn get(&self, mode: ModeIndex) -> Complex64 {
        self.slot(mode).map_or(Complex64::new(0.0, 0.0), |i| self.table[i])
    }

    /// Modes in table order (k ascending, then m ascending).
    pub fn modes(&self) -> impl Iterator<Item = ModeIndex> + '_ {
        let k_max = self.k_max as i64;
        let m_max = self.m_max;
        (-k_max..=k_max).flat_map(move |k| (0..=m_max).map(move |m| ModeIndex::new(k, m)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, Complex64)> + '_ {
        self.modes().zip(self.table.iter().copied())
    }

    pub fn values(&self) -> &[Complex64] {
        &self.table
    }

    pub fn norm_sq(&self) -> f64 {
        self.table.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Applies `c_{k,m} -> g(mode) c_{k,m}`.
    pub fn map_modes<F: Fn(ModeIndex, Complex64) -> Complex64>(&self, g: F) -> Self {
        let table = self.iter().map(|(mode, c)| g(mode, c)).collect();
        SpectralCoefficients {
            table,
            ..self.clone()
        }
    }

    /// Largest `|c - d|` over the union of both truncations.
    pub fn max_difference(&self, other: &SpectralCoefficients) -> f64 {
        let k_max = self.k_max.max(other.k_max) as i64;
        let m_max = self.m_max.max(other.m_max);
        let mut worst = 0.0f64;
        for k in -k_max..=k_max {
            for m in 0..=m_max {
                let mode = ModeIndex::new(k, m);
                worst = worst.max((self.get(mode) - other.get(mode)).norm());
            }
        }
        worst
    }

    /// CSV table with columns `k,m,re_c,im_c`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,m,re_c,im_c\n");
        for (mode, c) in self.iter() {
            s.push_str(&format!("{},{},{:.16e},{:.16e}\n", mode.k, mode.m, c.re, c.im));
        }
        s
    }
}

/// Coefficients of `f` against the unit-normalized eigenfunctions.
///
/// Angular projection uses the grid's uniform angles; the radial integral
/// uses the grid's radial rule in `s = b0 r^2 / 2`.
pub fn expand(f: &WaveFunction, k_max: u32, m_max: u32, params: &FieldParams) -> Result<SpectralCoefficients> {
    let grid = f.grid();
    if (grid.b0() - params.b0()).abs() > 1e-14 * params.b0() {
        return Err(Error::invalid("grid and parameters use different b0"));
    }
    let waves = partial_waves(f, k_max as u64, None)?;
    let radii = grid.radii().to_vec();
    let area: Vec<f64> = (0..grid.ring_count())
        .map(|ring| grid.ring_weight(ring) * grid.angular_count() as f64)
        .collect();
    let rows: Vec<Vec<Complex64>> = (-(k_max as i64)..=k_max as i64)
        .into_par_iter()
        .map(|k| {
            let fk = &waves[(k + k_max as i64) as usize];
            let mut row = vec![Complex64::new(0.0, 0.0); m_max as usize + 1];
            for (ring, &r) in radii.iter().enumerate() {
                if area[ring] == 0.0 || fk[ring] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let v = normalized_radial_ladder(k, m_max, params, r);
                let fw = fk[ring] * area[ring];
                for (c, vm) in row.iter_mut().zip(&v) {
                    *c += fw * *vm;
                }
            }
            row
        })
        .collect();
    let mut coeffs = SpectralCoefficients::zeros(*params, k_max, m_max);
    coeffs.table = rows.into_iter().flatten().collect();
    let total = f.norm_sq();
    let captured = coeffs.norm_sq();
    if captured > total * (1.0 + 1e-8) + 1e-300 {
        return Err(Error::accuracy(
            "expand: coefficients exceed the data norm, radial rule too coarse",
            Complex64::new(captured, 0.0),
            captured / total - 1.0,
        ));
    }
    Ok(coeffs)
}

/// `sum_{k,m} c_{k,m} Vtilde_{k,m}(p)`.
pub fn reconstruct(coeffs: &SpectralCoefficients, p: PolarPoint) -> Complex64 {
    let k_max = coeffs.k_max as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in -k_max..=k_max {
        let v = normalized_radial_ladder(k, coeffs.m_max, &coeffs.params, p.r);
        let mut radial = Complex64::new(0.0, 0.0);
        for (m, vm) in v.iter().enumerate() {
            radial += coeffs.get(ModeIndex::new(k, m as u32)) * *vm;
        }
        acc += radial * angular(k, p.theta);
    }
    acc
}

/// Reconstruction at every node of a grid.
pub fn reconstruct_on(coeffs: &SpectralCoefficients, grid: Arc<PolarGrid>) -> Result<WaveFunction> {
    let n = grid.angular_count();
    let k_max = coeffs.k_max as i64;
    let tw = twiddles(n);
    let rings: Vec<Vec<Complex64>> = grid
        .radii()
        .par_iter()
        .map(|&r| {
            let radial: Vec<Complex64> = (-k_max..=k_max)
                .map(|k| {
                    let v = normalized_radial_ladder(k, coeffs.m_max, &coeffs.params, r);
                    v.iter()
                        .enumerate()
                        .map(|(m, vm)| coeffs.get(ModeIndex::new(k, m as u32)) * *vm)
                        .sum()
                })
                .collect();
            (0..n)
                .map(|j| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (i, fk) in radial.iter().enumerate() {
                        let k = i as i64 - k_max;
                        // e^{ik theta_j} = conj(e^{-2 pi i k j / n})
                        let idx = ((k * j as i64).rem_euclid(n as i64)) as usize;
                        acc += fk * tw[idx].conj();
                    }
                    acc
                })
                .collect()
        })
        .collect();
    WaveFunction::new(grid, rings.into_iter().flatten().collect())
}

/// Gram matrix `int V_a conj(V_b)` of the (unnormalized) eigenfunctions on a grid.
pub fn gram_matrix(modes: &[ModeIndex], params: &FieldParams, grid: &PolarGrid) -> Vec<Vec<Complex64>> {
    let n = grid.angular_count();
    let samples: Vec<Vec<Complex64>> = modes
        .par_iter()
        .map(|&mode| {
            (0..grid.ring_count())
                .flat_map(|ring| {
                    let r = grid.radii()[ring];
                    let radial = radial_part(mode, params, r);
                    (0..n).map(move |j| radial * angular(mode.k, 2.0 * PI * j as f64 / n as f64))
                })
                .collect()
        })
        .collect();
    let weights: Vec<f64> = grid.weights().collect();
    samples
        .par_iter()
        .map(|a| {
            samples
                .iter()
                .map(|b| {
                    a.iter()
                        .zip(b)
                        .zip(&weights)
                        .map(|((x, y), w)| x * y.conj() * *w)
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Relative residual `||(H - lambda) V|| / ||V||` of the radial part of a mode
/// on the uniform grid of `intervals + 1` radii spanning `[0.05, 6]/sqrt(b0)`.
/// Norms are discrete `L^2(r dr)` norms over the interior radii.
pub fn eigen_residual(mode: ModeIndex, params: &FieldParams, intervals: usize) -> Result<f64> {
    let scale = 1.0 / params.b0().sqrt();
    let (a, b) = (0.05 * scale, 6.0 * scale);
    let h = (b - a) / intervals as f64;
    let radii: Vec<f64> = (0..=intervals).map(|i| a + h * i as f64).collect();
    let g: Vec<Complex64> = radii
        .iter()
        .map(|&r| Complex64::new(radial_part(mode, params, r), 0.0))
        .collect();
    let hg = apply_hamiltonian(&g, mode.k, params, &radii)?;
    let lambda = eigenvalue(mode, params);
    let mut res = 0.0;
    let mut norm = 0.0;
    for (i, v) in hg.iter().enumerate() {
        let r = radii[i + 2];
        let gi = g[i + 2];
        res += (v - gi * lambda).norm_sqr() * r;
        norm += gi.norm_sqr() * r;
    }
    Ok((res / norm).sqrt())
}
