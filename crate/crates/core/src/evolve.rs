//! Time evolution by spectral phases and by kernel quadrature, `L^p` norms,
//! and numerical checks of the dispersive and Strichartz bounds.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FieldParams, PolarPoint};
use crate::numerics::{gauss_legendre, Integrator, PolarGrid, RadialRule};
use crate::propagator::{
    bessel_argument, diffractive_integrand, kernel, partial_wave_ladders, radial_prefactor, suggested_k_max,
    bessel_tail_bound, Construction, KernelQuery, DEFAULT_Z_CAP, MIN_TOL,
};
use crate::spectrum::{eigenvalue, expand, reconstruct_on, SpectralCoefficients, WaveFunction};

/// Exponents `(q, p)` with `2/q = 2(1/2 - 1/p)`, `p < inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePair {
    q: f64,
    p: f64,
}

impl AdmissiblePair {
    /// `q = f64::INFINITY` is allowed.
    pub fn new(q: f64, p: f64) -> Result<Self> {
        if !(q >= 2.0) || !(p >= 2.0) || !p.is_finite() {
            return Err(Error::invalid(format!("({q}, {p}) needs q in [2, inf], p in [2, inf)")));
        }
        let lhs = 1.0 / q;
        let rhs = 0.5 - 1.0 / p;
        if (lhs - rhs).abs() > 1e-12 {
            return Err(Error::invalid(format!("({q}, {p}) is not admissible: 2/q != 2(1/2 - 1/p)")));
        }
        Ok(AdmissiblePair { q, p })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// Sup-norm decay over a list of times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub times: Vec<f64>,
    pub sup_norms: Vec<f64>,
    /// `||u(t)||_inf |sin t b0| / ||f||_1`.
    pub ratios: Vec<f64>,
    pub c_emp: f64,
}

impl DecayReport {
    /// `max / min` over the ratios.
    pub fn spread(&self) -> f64 {
        let max = self.ratios.iter().cloned().fold(0.0, f64::max);
        let min = self.ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }
}

/// Controls for kernel-quadrature evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorOptions {
    pub tol: f64,
    /// Fixed partial-wave truncation; `None` picks it from the tail bound.
    pub k_max: Option<u32>,
    pub j_window: u32,
    pub z_cap: f64,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        PropagatorOptions {
            tol: 1e-10,
            k_max: None,
            j_window: 64,
            z_cap: DEFAULT_Z_CAP,
        }
    }
}

impl PropagatorOptions {
    fn query(&self, t: f64, x: PolarPoint, y: PolarPoint, params: &FieldParams) -> Result<KernelQuery> {
        let mut q = KernelQuery::new(t, x, y, params)?
            .with_tol(self.tol)?
            .with_j_window(self.j_window)?
            .with_z_cap(self.z_cap)?;
        if let Some(k) = self.k_max {
            q = q.with_k_max(k)?;
        }
        Ok(q)
    }
}

/// Multiplies every coefficient by `e^{-it lambda_{k,m}}`.
pub fn evolve_spectral(coeffs: &SpectralCoefficients, t: f64) -> SpectralCoefficients {
    let params = *coeffs.params();
    coeffs.map_modes(|mode, c| c * Complex64::from_polar(1.0, -t * eigenvalue(mode, &params)))
}

/// `(sum |u_i|^p w_i)^{1/p}`, or `max |u_i|` for `p = inf`.
pub fn lp_norm(u: &WaveFunction, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("L^p norm needs p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(u.values().iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    let s: f64 = u
        .values()
        .iter()
        .zip(u.grid().weights())
        .map(|(v, w)| v.norm().powf(p) * w)
        .sum();
    Ok(s.powf(1.0 / p))
}

/// Rings of `f` that carry non-negligible data.
fn active_rings(f: &WaveFunction) -> Vec<usize> {
    let grid = f.grid();
    let n = grid.angular_count();
    let peak = f.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    (0..grid.ring_count())
        .filter(|&ring| {
            grid.ring_weight(ring) > 0.0
                && f.values()[ring * n..(ring + 1) * n].iter().any(|v| v.norm() > 1e-16 * peak)
        })
        .collect()
}

/// Refuses data that has not decayed at the edge of its grid.
fn check_concentrated(f: &WaveFunction) -> Result<()> {
    let grid = f.grid();
    let n = grid.angular_count();
    let peak = f.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let last = grid.ring_count() - 1;
    let edge = f.values()[last * n..].iter().map(|v| v.norm()).fold(0.0, f64::max);
    if edge > 1e-6 * peak {
        return Err(Error::accuracy(
            "kernel quadrature: data has not decayed on its grid",
            Complex64::new(edge, 0.0),
            edge / peak,
        ));
    }
    Ok(())
}

/// `u(t, x_i) = sum_j K(t, x_i, y_j) f(y_j) w_j` with default options.
pub fn apply_propagator(
    f: &WaveFunction,
    t: f64,
    construction: Construction,
    out_grid: Arc<PolarGrid>,
    params: &FieldParams,
) -> Result<WaveFunction> {
    apply_propagator_with(f, t, construction, out_grid, params, &PropagatorOptions::default())
}

/// As [`apply_propagator`], with explicit kernel controls.
///
/// The partial-wave route sums the angular quadrature in closed form: the
/// kernel depends on the angles only through `e^{ik(theta1 - theta2)}`, so
/// the `y`-angle sum reduces to discrete Fourier coefficients of `f` on each
/// ring. The other constructions evaluate the kernel pointwise, once per
/// (ring, ring, angle difference) when both grids share their angles.
pub fn apply_propagator_with(
    f: &WaveFunction,
    t: f64,
    construction: Construction,
    out_grid: Arc<PolarGrid>,
    params: &FieldParams,
    opts: &PropagatorOptions,
) -> Result<WaveFunction> {
    if !(opts.tol >= MIN_TOL) {
        return Err(Error::invalid(format!("kernel tolerance {:e} below {MIN_TOL:e}", opts.tol)));
    }
    // validates the time once
    opts.query(t, PolarPoint { r: 0.0, theta: 0.0 }, PolarPoint { r: 0.0, theta: 0.0 }, params)?;
    check_concentrated(f)?;
    let values = match construction {
        Construction::PartialWave => apply_partial_wave(f, t, &out_grid, params, opts)?,
        _ => apply_pointwise(f, t, construction, &out_grid, params, opts)?,
    };
    WaveFunction::new(out_grid, values)
}

fn apply_partial_wave(
    f: &WaveFunction,
    t: f64,
    out: &PolarGrid,
    params: &FieldParams,
    opts: &PropagatorOptions,
) -> Result<Vec<Complex64>> {
    let grid = f.grid();
    let ny = grid.angular_count();
    let rings = active_rings(f);
    let r_in: Vec<f64> = rings.iter().map(|&i| grid.radii()[i]).collect();
    let r_in_max = r_in.iter().cloned().fold(0.0, f64::max);
    let r_out_max = out.radii().iter().cloned().fold(0.0, f64::max);
    let z_max = bessel_argument(t, r_out_max, r_in_max, params).norm();
    if z_max > opts.z_cap {
        return Err(Error::range(format!(
            "|z| reaches {z_max:.3}, above the partial-wave limit {}; shrink the output grid or raise z_cap",
            opts.z_cap
        )));
    }
    // modes beyond the angular band of f are zero for resolved data, so the
    // kernel sum stops there even when its own tail is longer
    let band = (ny as i64 - 1) / 2;
    let k_top = (opts
        .k_max
        .unwrap_or_else(|| suggested_k_max(z_max, params, 0.1 * opts.tol)) as i64)
        .min(band);
    // fhat[ring][k + k_top] = (1/ny) sum_j e^{-ik theta_j} f(r, theta_j)
    let tw: Vec<Complex64> = (0..ny)
        .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / ny as f64))
        .collect();
    let fhat: Vec<Vec<Complex64>> = rings
        .par_iter()
        .map(|&ring| {
            let row = &f.values()[ring * ny..(ring + 1) * ny];
            (-k_top..=k_top)
                .map(|k| {
                    let km = k.rem_euclid(ny as i64) as usize;
                    let acc: Complex64 = row.iter().enumerate().map(|(j, v)| v * tw[(km * j) % ny]).sum();
                    acc / ny as f64
                })
                .collect()
        })
        .collect();
    let f_peak = fhat.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    let f_edge = fhat.iter().map(|row| row[0].norm().max(row[row.len() - 1].norm())).fold(0.0, f64::max);
    if k_top == band && f_edge > 1e-10 * f_peak {
        return Err(Error::accuracy(
            "kernel quadrature: angular grid does not resolve the data",
            Complex64::new(f_edge, 0.0),
            f_edge / f_peak,
        ));
    }
    let area: Vec<f64> = rings.iter().map(|&i| grid.ring_weight(i) * ny as f64).collect();
    let tau = t * params.b0();
    let alpha = params.alpha();
    let nx = out.angular_count();
    let per_ring: Vec<Result<Vec<Complex64>>> = out
        .radii()
        .par_iter()
        .map(|&r1| {
            let mut a = vec![Complex64::new(0.0, 0.0); 2 * k_top as usize + 1];
            for (idx, &r2) in r_in.iter().enumerate() {
                let z = bessel_argument(t, r1, r2, params);
                let wanted = opts
                    .k_max
                    .unwrap_or_else(|| suggested_k_max(z.norm(), params, 0.1 * opts.tol));
                let k_here = wanted.min(k_top as u32).max(1);
                let tail = bessel_tail_bound(k_here as f64 + 1.0 + alpha, z)
                    + bessel_tail_bound(k_here as f64 + 1.0 - alpha, z);
                if k_here == wanted && tail > opts.tol {
                    return Err(Error::accuracy(
                        format!("partial-wave tail at k_max = {k_here}; increase k_max"),
                        Complex64::new(0.0, 0.0),
                        tail,
                    ));
                }
                let (up, down) = partial_wave_ladders(z, k_here, params)?;
                let c = radial_prefactor(t, r1, r2, params) * area[idx];
                let fr = &fhat[idx];
                for (k, v) in up.iter().enumerate() {
                    let slot = (k as i64 + k_top) as usize;
                    a[slot] += c * v * fr[slot];
                }
                for (n, v) in down.iter().enumerate() {
                    let slot = (k_top - 1 - n as i64) as usize;
                    a[slot] += c * v * fr[slot];
                }
            }
            Ok((0..nx)
                .map(|i| {
                    let phase = out.theta(i) - tau;
                    let e = Complex64::from_polar(1.0, phase);
                    let mut w = Complex64::from_polar(1.0, -(k_top as f64) * phase);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for v in &a {
                        acc += w * v;
                        w *= e;
                    }
                    acc
                })
                .collect())
        })
        .collect();
    let mut values = Vec::with_capacity(out.len());
    for ring in per_ring {
        values.extend(ring?);
    }
    Ok(values)
}

fn apply_pointwise(
    f: &WaveFunction,
    t: f64,
    construction: Construction,
    out: &PolarGrid,
    params: &FieldParams,
    opts: &PropagatorOptions,
) -> Result<Vec<Complex64>> {
    let grid = f.grid();
    let ny = grid.angular_count();
    let nx = out.angular_count();
    let rings = active_rings(f);
    let eval = |x: PolarPoint, y: PolarPoint| -> Result<Complex64> {
        Ok(kernel(construction, &opts.query(t, x, y, params)?, params)?.value)
    };
    if out.same_angles(grid) {
        // K depends on theta1 - theta2 only: tabulate per angle difference
        let n = nx;
        let per_ring: Vec<Result<Vec<Complex64>>> = out
            .radii()
            .par_iter()
            .map(|&r1| {
                let mut row = vec![Complex64::new(0.0, 0.0); n];
                for &ring in &rings {
                    let r2 = grid.radii()[ring];
                    let w = grid.ring_weight(ring);
                    let table: Vec<Complex64> = (0..n)
                        .map(|d| eval(PolarPoint { r: r1, theta: out.theta(d) }, PolarPoint { r: r2, theta: 0.0 }))
                        .collect::<Result<_>>()?;
                    let fr = &f.values()[ring * n..(ring + 1) * n];
                    for (i, acc) in row.iter_mut().enumerate() {
                        let mut s = Complex64::new(0.0, 0.0);
                        for (j, v) in fr.iter().enumerate() {
                            s += table[(i + n - j) % n] * v;
                        }
                        *acc += s * w;
                    }
                }
                Ok(row)
            })
            .collect();
        let mut values = Vec::with_capacity(out.len());
        for ring in per_ring {
            values.extend(ring?);
        }
        return Ok(values);
    }
    let points: Vec<PolarPoint> = out.nodes().collect();
    points
        .par_iter()
        .map(|&x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &ring in &rings {
                let w = grid.ring_weight(ring);
                for j in 0..ny {
                    let v = f.values()[ring * ny + j];
                    if v != Complex64::new(0.0, 0.0) {
                        acc += eval(x, grid.node(ring * ny + j))? * v * w;
                    }
                }
            }
            Ok(acc)
        })
        .collect()
}

/// Sampling grid for `u(t)`: uniform radii up to the largest radius the
/// partial-wave sum supports, origin included.
fn sampling_grid(t: f64, r_in_max: f64, params: &FieldParams, z_cap: f64, rings: usize, angles: usize) -> Result<Arc<PolarGrid>> {
    let sin = (t * params.b0()).sin().abs();
    let r_max = 0.95 * z_cap * 2.0 * sin / (params.b0() * r_in_max.max(1e-300));
    let radial = RadialRule::uniform_radius(params.b0(), r_max, rings)?;
    Ok(Arc::new(PolarGrid::new(params.b0(), radial, angles, true)?))
}

/// Ratios `||u(t)||_inf |sin t b0| / ||f||_1` by kernel quadrature with
/// default sampling (64 rings, 64 angles).
pub fn dispersive_scan(f: &WaveFunction, times: &[f64], params: &FieldParams) -> Result<DecayReport> {
    dispersive_scan_with(f, times, params, &PropagatorOptions::default(), 64, 64)
}

/// As [`dispersive_scan`], with explicit kernel controls and sampling size.
/// The sup norm is taken over the sampling grid, so it is a lower estimate
/// of the true maximum.
pub fn dispersive_scan_with(
    f: &WaveFunction,
    times: &[f64],
    params: &FieldParams,
    opts: &PropagatorOptions,
    rings: usize,
    angles: usize,
) -> Result<DecayReport> {
    let fields = dispersive_fields(f, times, params, opts, rings, angles)?;
    decay_report(f, times, &fields, params)
}

/// `u(t)` on the sampling grid of each time, by partial-wave kernel quadrature.
pub fn dispersive_fields(
    f: &WaveFunction,
    times: &[f64],
    params: &FieldParams,
    opts: &PropagatorOptions,
    rings: usize,
    angles: usize,
) -> Result<Vec<WaveFunction>> {
    if times.is_empty() {
        return Err(Error::invalid("dispersive scan needs at least one time"));
    }
    let r_in_max = active_rings(f)
        .iter()
        .map(|&i| f.grid().radii()[i])
        .fold(0.0, f64::max);
    times
        .iter()
        .map(|&t| {
            let out = sampling_grid(t, r_in_max, params, opts.z_cap, rings, angles)?;
            apply_propagator_with(f, t, Construction::PartialWave, out, params, opts)
        })
        .collect()
}

/// Decay ratios of already propagated fields `u[i] = u(times[i])`.
pub fn decay_report(f: &WaveFunction, times: &[f64], u: &[WaveFunction], params: &FieldParams) -> Result<DecayReport> {
    if times.len() != u.len() {
        return Err(Error::invalid("one field per time is required"));
    }
    let l1 = lp_norm(f, 1.0)?;
    if !(l1 > 0.0) {
        return Err(Error::invalid("initial data must be nonzero"));
    }
    let mut sup_norms = Vec::with_capacity(times.len());
    let mut ratios = Vec::with_capacity(times.len());
    for (&t, ut) in times.iter().zip(u) {
        let sup = lp_norm(ut, f64::INFINITY)?;
        sup_norms.push(sup);
        ratios.push(sup * (t * params.b0()).sin().abs() / l1);
    }
    let c_emp = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(DecayReport {
        times: times.to_vec(),
        sup_norms,
        ratios,
        c_emp,
    })
}

/// Truncation used when data is evolved spectrally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub k_max: u32,
    pub m_max: u32,
}

impl SpectralOptions {
    /// `k_max = min(32, (n_theta - 1) / 2)`, `m_max = 64`.
    pub fn for_grid(grid: &PolarGrid) -> Self {
        SpectralOptions {
            k_max: 32.min((grid.angular_count() as u32 - 1) / 2),
            m_max: 64,
        }
    }
}

/// `(int_0^T ||u(t)||_p^q dt)^{1/q}` with default truncation.
pub fn strichartz_norm(f: &WaveFunction, pair: AdmissiblePair, t_end: f64, n_t: usize, params: &FieldParams) -> Result<f64> {
    strichartz_norm_with(f, pair, t_end, n_t, params, SpectralOptions::for_grid(f.grid()))
}

/// As [`strichartz_norm`], with explicit truncation.
///
/// `u(t)` is the spectral evolution of the projection of `f` onto the
/// truncated eigenbasis, reconstructed on the grid of `f`. Time quadrature
/// is composite 8-point Gauss-Legendre with `ceil(n_t / 8)` panels;
/// `q = inf` takes the maximum over the nodes and `t = 0`.
pub fn strichartz_norm_with(
    f: &WaveFunction,
    pair: AdmissiblePair,
    t_end: f64,
    n_t: usize,
    params: &FieldParams,
    trunc: SpectralOptions,
) -> Result<f64> {
    let limit = PI / (2.0 * params.b0());
    if !(t_end > 0.0 && t_end < limit) {
        return Err(Error::invalid(format!("T = {t_end} must lie in (0, pi/(2 b0)) = (0, {limit})")));
    }
    if n_t < 8 {
        return Err(Error::invalid("Strichartz quadrature needs n_t >= 8"));
    }
    let coeffs = expand(f, trunc.k_max, trunc.m_max, params)?;
    let grid = f.shared_grid();
    let norm_at = |t: f64| -> Result<f64> {
        let u = reconstruct_on(&evolve_spectral(&coeffs, t), Arc::clone(&grid))?;
        lp_norm(&u, pair.p())
    };
    let gl = gauss_legendre(8)?;
    let panels = n_t.div_ceil(8);
    let h = t_end / panels as f64;
    let mut nodes = Vec::with_capacity(8 * panels);
    for p in 0..panels {
        for (&x, &w) in gl.nodes().iter().zip(gl.weights()) {
            nodes.push((h * (p as f64 + 0.5 * (x + 1.0)), 0.5 * h * w));
        }
    }
    if pair.q().is_infinite() {
        let mut best = norm_at(0.0)?;
        for &(t, _) in &nodes {
            best = best.max(norm_at(t)?);
        }
        return Ok(best);
    }
    let mut acc = 0.0;
    for &(t, w) in &nodes {
        acc += w * norm_at(t)?.powf(pair.q());
    }
    Ok(acc.powf(1.0 / pair.q()))
}

/// `int_0^inf |e^{-alpha s}/(1 + e^{-s+i theta}) + e^{alpha s}/(1 + e^{s+i theta})| ds`.
pub fn diffractive_abs_integral(theta: f64, params: &FieldParams, tol: f64) -> Result<f64> {
    let alpha = params.alpha();
    if !(alpha > 0.0) {
        return Err(Error::domain("the diffractive integrand needs alpha > 0"));
    }
    let red = crate::propagator::branch_data(theta, params).theta;
    let integrand = |s: f64| Complex64::new(diffractive_integrand(Complex64::new(s, 0.0), red, alpha).norm(), 0.0);
    integrate_half_line(integrand, tol)
}

fn integrate_half_line<F: Fn(f64) -> Complex64>(g: F, tol: f64) -> Result<f64> {
    let integrator = Integrator::new(tol, tol).with_max_subdivisions(4000);
    // the near-edge peak sits at s = 0; split so it is resolved first
    let head = integrator.integrate(&g, 0.0, 1.0)?;
    let tail = integrator.integrate(&g, 1.0, f64::INFINITY)?;
    Ok(head.value.re + tail.value.re)
}

/// Maximum of [`diffractive_abs_integral`] over a grid of phases.
pub fn diffractive_bound_scan(params: &FieldParams, theta_grid: &[f64]) -> Result<f64> {
    if theta_grid.is_empty() {
        return Err(Error::invalid("theta grid is empty"));
    }
    let vals: Vec<Result<f64>> = theta_grid
        .par_iter()
        .map(|&th| diffractive_abs_integral(th, params, 1e-10))
        .collect();
    let mut best = 0.0f64;
    for v in vals {
        best = best.max(v?);
    }
    Ok(best)
}

/// The three pieces of the folded integrand over `cosh s + cos theta`:
/// `2c^2 cosh(alpha s)`, `2 c sn cosh(alpha s)` and
/// `cosh((1-alpha)s) - cosh(alpha s)`, where `c = cos(theta/2)`,
/// `sn = sin(theta/2)`. Returns the integral of the modulus of each.
pub fn diffractive_pieces(theta: f64, params: &FieldParams) -> Result<[f64; 3]> {
    let alpha = params.alpha();
    let (sn, c) = (0.5 * theta).sin_cos();
    // every piece and the denominator are scaled by 2e^{-s}, which keeps
    // large s finite; e(b) = 2 e^{-s} cosh(b s)
    let e = |b: f64, s: f64| (-(1.0 - b) * s).exp() + (-(1.0 + b) * s).exp();
    let den = move |s: f64| {
        if s < 20.0 {
            2.0 * (c * c + (0.5 * s).sinh().powi(2)) * 2.0 * (-s).exp()
        } else {
            4.0 * c * c * (-s).exp() + (1.0 - (-s).exp()).powi(2)
        }
    };
    let piece = |num: &dyn Fn(f64) -> f64| {
        integrate_half_line(
            |s| {
                let d = den(s);
                Complex64::new(if d == 0.0 { 0.0 } else { (num(s) / d).abs() }, 0.0)
            },
            1e-10,
        )
    };
    let p1 = piece(&|s| 2.0 * c * c * e(alpha, s))?;
    let p2 = piece(&|s| 2.0 * c * sn * e(alpha, s))?;
    let p3 = piece(&|s| {
        if s < 20.0 {
            2.0 * (0.5 * s).sinh() * ((0.5 - alpha) * s).sinh() * 2.0 * (-s).exp()
        } else {
            e(1.0 - alpha, s) - e(alpha, s)
        }
    })?;
    Ok([p1, p2, p3])
}
