use num_complex::Complex64;

use super::{bracket_at_origin, Construction, KernelQuery, KernelValue};
use crate::error::{Error, Result};
use crate::model::FieldParams;
use crate::specfun::{bessel_i_ladder, ln_gamma, SeriesControl};

/// Bound on `sum_{nu in {nu0, nu0 + 1, ...}} |I_nu(z)|` from
/// `|I_nu(z)| <= (|z|/2)^nu e^{|Re z|} / Gamma(nu + 1)`, with the terms
/// summed as a geometric series once their ratio drops below one.
pub fn bessel_tail_bound(nu0: f64, z: Complex64) -> f64 {
    let half = 0.5 * z.norm();
    if half == 0.0 {
        return if nu0 == 0.0 { 1.0 } else { 0.0 };
    }
    let ratio = half / (nu0 + 1.0);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    let lead = (nu0 * half.ln() + z.re.abs() - ln_gamma(nu0 + 1.0)).exp();
    lead / (1.0 - ratio)
}

/// Smallest `K` for which both omitted tails (`k > K` and `k < -K`) are
/// bounded by `tol`.
pub fn suggested_k_max(z_abs: f64, params: &FieldParams, tol: f64) -> u32 {
    let alpha = params.alpha();
    let z = Complex64::new(0.0, z_abs);
    let mut k = 1u32;
    while k < 1000 {
        let pos = bessel_tail_bound(k as f64 + 1.0 + alpha, z);
        let neg = bessel_tail_bound(k as f64 + 1.0 - alpha, z);
        if pos + neg <= tol {
            break;
        }
        k += 1;
    }
    k
}

/// `I_{alpha_k}(z)` for `k = 0..=K` and for `k = -1, ..., -K`.
pub(crate) fn partial_wave_ladders(z: Complex64, k_max: u32, params: &FieldParams) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let alpha = params.alpha();
    let ctl = SeriesControl::default();
    let kk = k_max as usize;
    // k >= 0 has order k + alpha; k = -1 - n has order n + 1 - alpha
    let up = bessel_i_ladder(alpha, kk, z, ctl)?;
    let down = bessel_i_ladder(1.0 - alpha, kk - 1, z, ctl)?;
    Ok((up, down))
}

/// `sum_{|k| <= K} e^{ik theta} I_{alpha_k}(z)` with the tail bound of the
/// omitted orders as error.
pub(super) fn partial_wave_bracket(z: Complex64, theta: f64, k_max: u32, params: &FieldParams) -> Result<(Complex64, f64)> {
    let (up, down) = partial_wave_ladders(z, k_max, params)?;
    let e = Complex64::from_polar(1.0, theta);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut w = Complex64::new(1.0, 0.0);
    for v in &up {
        sum += w * v;
        w *= e;
    }
    let ec = e.conj();
    let mut w = ec;
    for v in &down {
        sum += w * v;
        w *= ec;
    }
    let alpha = params.alpha();
    let tail = bessel_tail_bound(k_max as f64 + 1.0 + alpha, z) + bessel_tail_bound(k_max as f64 + 1.0 - alpha, z);
    Ok((sum, tail + 1e-16 * up.iter().chain(&down).map(|v| v.norm()).sum::<f64>()))
}

pub fn kernel_partial_wave(q: &KernelQuery, params: &FieldParams) -> Result<KernelValue> {
    q.validate(params)?;
    let pref = q.prefactor(params);
    let z = q.z(params);
    if z.norm() > q.z_cap() {
        return Err(Error::range(format!(
            "|z| = {:.3} exceeds the partial-wave limit {}",
            z.norm(),
            q.z_cap()
        )));
    }
    if z == Complex64::new(0.0, 0.0) {
        return KernelValue::new(pref * bracket_at_origin(params), Construction::PartialWave, 0.0);
    }
    let k_max = q.k_max(params);
    let (sum, err) = partial_wave_bracket(z, q.phase(params), k_max, params)?;
    if err > q.tol() {
        return Err(Error::accuracy(
            format!("partial-wave tail at k_max = {k_max}; increase k_max"),
            pref * sum,
            pref.norm() * err,
        ));
    }
    KernelValue::new(pref * sum, Construction::PartialWave, pref.norm() * err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PolarPoint;
    use crate::specfun::bessel_i;

    fn pt(r: f64, th: f64) -> PolarPoint {
        PolarPoint { r, theta: th }
    }

    #[test]
    fn tail_bound_dominates() {
        let z = Complex64::new(0.0, 7.0);
        for &nu in &[8.25, 12.75, 20.5] {
            let direct: f64 = (0..60)
                .map(|j| bessel_i(nu + j as f64, z, SeriesControl::default()).unwrap().norm())
                .sum();
            assert!(direct <= bessel_tail_bound(nu, z));
        }
        assert!(bessel_tail_bound(2.0, z).is_infinite());
    }

    #[test]
    fn alpha_zero_sum_is_exponential() {
        // sum_k e^{ik theta} I_|k|(z) = e^{z cos theta}
        let p = FieldParams::new(0.0, 1.0).unwrap();
        let z = Complex64::new(0.0, -3.2);
        let (s, err) = partial_wave_bracket(z, 0.9, 40, &p).unwrap();
        assert!((s - (z * 0.9f64.cos()).exp()).norm() < 1e-13);
        assert!(err < 1e-13);
    }

    #[test]
    fn half_flux_reflection() {
        // at alpha = 1/2, k -> -(k+1) preserves alpha_k: S(theta) = e^{-i theta} S(-theta)
        let p = FieldParams::new(0.5, 1.0).unwrap();
        let z = Complex64::new(0.0, 2.4);
        for &th in &[0.3, -1.7, 2.9] {
            let (a, _) = partial_wave_bracket(z, th, 30, &p).unwrap();
            let (b, _) = partial_wave_bracket(z, -th, 30, &p).unwrap();
            assert!((a - Complex64::from_polar(1.0, -th) * b).norm() < 1e-13);
        }
    }

    #[test]
    fn truncation_converges() {
        let p = FieldParams::new(0.5, 1.0).unwrap();
        let q = KernelQuery::new(0.4, pt(1.0, 0.3), pt(1.5, -0.2), &p).unwrap();
        let a = kernel_partial_wave(&q.with_k_max(24).unwrap(), &p).unwrap();
        let b = kernel_partial_wave(&q.with_k_max(48).unwrap(), &p).unwrap();
        assert!((a.value - b.value).norm() < 1e-10);
        assert!(kernel_partial_wave(&q.with_k_max(2).unwrap(), &p).unwrap_err().is_accuracy());
    }

    #[test]
    fn unitarity_symmetry() {
        let p = FieldParams::new(0.3, 1.3).unwrap();
        for &(t, x, y) in &[(0.4, pt(1.0, 0.3), pt(1.5, -0.2)), (1.7, pt(0.4, 2.0), pt(2.0, 1.0))] {
            let a = kernel_partial_wave(&KernelQuery::new(t, x, y, &p).unwrap(), &p).unwrap();
            let b = kernel_partial_wave(&KernelQuery::new(-t, y, x, &p).unwrap(), &p).unwrap();
            assert!((a.value - b.value.conj()).norm() < 1e-12 * a.value.norm());
        }
    }

    #[test]
    fn rejects_large_argument() {
        let p = FieldParams::new(0.5, 1.0).unwrap();
        let q = KernelQuery::new(0.01, pt(3.0, 0.0), pt(3.0, 0.0), &p).unwrap();
        assert!(matches!(kernel_partial_wave(&q, &p), Err(Error::OutOfRange(_))));
    }
}
