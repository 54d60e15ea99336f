//! Bessel functions: `J_nu(x)` for real argument and `I_nu(z)` for complex
//! argument, the latter by ascending series or by the integral
//! representation along a deformed contour.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::ln_gamma;
use super::{Compensated, SeriesControl};
use crate::error::{Error, Result};
use crate::numerics::{integrate_cosh_weighted, Integrator};

/// Largest `|z|` accepted by [`bessel_i`].
pub const BESSEL_I_Z_CAP: f64 = 80.0;

const SERIES_RADIUS: f64 = 10.0;

fn check_order(nu: f64) -> Result<()> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::domain(format!("order must be non-negative, got {nu}")));
    }
    Ok(())
}

/// Shared ascending series `(z/2)^nu / Gamma(nu+1) * sum_k (s z^2/4)^k / (k! (nu+1)_k)`
/// with `s = -1` for `J` and `s = +1` for `I`. Returns the value and an
/// estimate of its relative error.
///
/// The sum is taken in double precision first. When cancellation would eat
/// the tolerance it is redone in double-double, which pushes the usable
/// condition number up by about sixteen orders.
fn ascending(nu: f64, z: Complex64, sign: f64, ctl: SeriesControl) -> Result<(Complex64, f64)> {
    if z == Complex64::new(0.0, 0.0) {
        let v = if nu == 0.0 { 1.0 } else { 0.0 };
        return Ok((Complex64::new(v, 0.0), f64::EPSILON));
    }
    let lead = ((z * 0.5).ln() * nu - ln_gamma(nu + 1.0)).exp();
    let q = z * z * (0.25 * sign);
    let mut acc = Compensated::new();
    let mut term = Complex64::new(1.0, 0.0);
    acc.add(term);
    let qabs = q.norm();
    let mut terms = None;
    for k in 1..=ctl.max_terms() {
        let kf = k as f64;
        term *= q / (kf * (nu + kf));
        acc.add(term);
        let t = term.norm();
        if t == 0.0
            || (kf * (kf + nu) > qabs && t <= 0.25 * ctl.rel_tol() * acc.value().norm().max(f64::MIN_POSITIVE))
        {
            terms = Some(k);
            break;
        }
    }
    let Some(n) = terms else {
        return Err(Error::accuracy(
            "bessel series",
            lead * acc.value(),
            term.norm() / acc.value().norm(),
        ));
    };
    let cond = acc.condition();
    let err = 8.0 * f64::EPSILON * cond;
    if err <= ctl.rel_tol() || !cond.is_finite() {
        return Ok((lead * acc.value(), err));
    }
    let (sum, dd_cond) = ascending_dd(nu, z, sign, n);
    let dd_err = 8.0 * f64::EPSILON + (n as f64 + 8.0) * DD_EPSILON * dd_cond;
    Ok((lead * sum, dd_err))
}

const DD_EPSILON: f64 = 1.232_595_164_407_831e-32; // 2^-106

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
    }

    fn quick(a: f64, b: f64) -> Self {
        let s = a + b;
        Dd { hi: s, lo: b - (s - a) }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Self::two_sum(self.hi, o.hi);
        let t = Self::two_sum(self.lo, o.lo);
        let u = Self::quick(s.hi, s.lo + t.hi);
        Self::quick(u.hi, u.lo + t.lo)
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Self::quick(p, e + (self.hi * o.lo + self.lo * o.hi))
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.add(o.mul(Dd::new(q1)).neg());
        let q2 = r.hi / o.hi;
        let r = r.add(o.mul(Dd::new(q2)).neg());
        let q3 = r.hi / o.hi;
        Self::quick(q1, q2).add(Dd::new(q3))
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// The sum of [`ascending`] over `n` terms in double-double arithmetic.
fn ascending_dd(nu: f64, z: Complex64, sign: f64, n: usize) -> (Complex64, f64) {
    let (x, y) = (Dd::new(z.re), Dd::new(z.im));
    let qr = x.mul(x).add(y.mul(y).neg()).mul(Dd::new(0.25 * sign));
    let qi = x.mul(y).mul(Dd::new(0.5 * sign));
    let (mut tr, mut ti) = (Dd::new(1.0), Dd::new(0.0));
    let (mut sr, mut si) = (tr, ti);
    let mut abs_sum = 1.0;
    for k in 1..=n {
        let kf = k as f64;
        let d = Dd::two_sum(kf, nu).mul(Dd::new(kf));
        let nr = tr.mul(qr).add(ti.mul(qi).neg());
        let ni = tr.mul(qi).add(ti.mul(qr));
        tr = nr.div(d);
        ti = ni.div(d);
        sr = sr.add(tr);
        si = si.add(ti);
        abs_sum += tr.hi.hypot(ti.hi);
    }
    let sum = Complex64::new(sr.value(), si.value());
    let norm = sum.norm();
    let cond = if norm > 0.0 { abs_sum / norm } else { f64::INFINITY };
    (sum, cond)
}

/// Ascending series for `I_nu(z)` valid for any order `nu > -1`.
pub(super) fn ascending_i(nu: f64, z: Complex64, ctl: SeriesControl) -> Result<Complex64> {
    Ok(ascending(nu, z, 1.0, ctl)?.0)
}

/// `J_nu(x)` by ascending series. Fails with an accuracy error
/// when cancellation would exceed `ctl.rel_tol`.
pub fn bessel_j(nu: f64, x: f64, ctl: SeriesControl) -> Result<f64> {
    check_order(nu)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("bessel_j requires x >= 0, got {x}")));
    }
    let (v, err) = ascending(nu, Complex64::new(x, 0.0), -1.0, ctl)?;
    if !(err <= ctl.rel_tol()) {
        return Err(Error::accuracy("bessel_j series cancellation", v, err));
    }
    Ok(v.re)
}

/// `I_nu(z)` by ascending series. Fails with an accuracy error when
/// cancellation would exceed `ctl.rel_tol`.
pub fn bessel_i_series(nu: f64, z: Complex64, ctl: SeriesControl) -> Result<Complex64> {
    check_order(nu)?;
    let (v, err) = ascending(nu, z, 1.0, ctl)?;
    if !(err <= ctl.rel_tol()) {
        return Err(Error::accuracy("bessel_i series cancellation", v, err));
    }
    Ok(v)
}

/// `I_nu(z)` from
/// `(1/pi) int_0^pi e^{z cos s} cos(nu s) ds - (sin(nu pi)/pi) int_0^inf e^{-z cosh s - nu s} ds`.
///
/// The error is relative to `|I_nu(z)|` except close to its zeros, where it is
/// bounded by `1e-14 e^{Re z}` instead.
///
/// The representation is used for `Re z >= 0`, where the second integral is
/// taken along a path on which `Re(z cosh s)` grows. Other arguments are
/// reflected through `I_nu(-z) = e^{-+ i pi nu} I_nu(z)`.
pub fn bessel_i_integral(nu: f64, z: Complex64, ctl: SeriesControl) -> Result<Complex64> {
    check_order(nu)?;
    if z.re < 0.0 {
        let phase = if z.im < 0.0 { -PI * nu } else { PI * nu };
        return Ok(Complex64::from_polar(1.0, phase) * bessel_i_integral(nu, -z, ctl)?);
    }
    let rel = ctl.rel_tol().max(1e-14);
    let scale = z.re.exp();
    // near zeros of I_nu only an absolute accuracy relative to e^{Re z} is attainable
    let floor = 1e-15 * scale;
    let integrator = Integrator::new(floor, rel).with_max_subdivisions(4000);
    let first = integrator.integrate(|s: f64| (z * s.cos()).exp() * (nu * s).cos(), 0.0, PI)?;
    let mut value = first.value / PI;
    let mut err = first.err / PI;
    let sin_nu = (nu * PI).sin();
    if sin_nu.abs() > 1e-300 {
        // absolute tolerance in units of the largest possible term size
        let tol = (0.1 * rel * value.norm()).max(floor);
        let second = integrate_cosh_weighted(z, |s| (-s * nu).exp(), nu.max(0.5), tol, 200.0)?;
        value -= second.value * (sin_nu / PI);
        err += second.err * sin_nu.abs() / PI;
    }
    if err > (10.0 * rel * value.norm()).max(10.0 * floor) {
        return Err(Error::accuracy("bessel_i integral representation", value, err));
    }
    Ok(value)
}

/// `I_nu(z)` for `nu >= 0` and `|z| <= BESSEL_I_Z_CAP`.
///
/// The ascending series is used for `|z| <= 10` and beyond whenever its
/// cancellation stays inside the tolerance budget; otherwise the integral
/// representation is used.
pub fn bessel_i(nu: f64, z: Complex64, ctl: SeriesControl) -> Result<Complex64> {
    check_order(nu)?;
    let r = z.norm();
    if !(r <= BESSEL_I_Z_CAP) {
        return Err(Error::range(format!(
            "|z| = {r} exceeds the supported cap {BESSEL_I_Z_CAP}"
        )));
    }
    let (v, err) = ascending(nu, z, 1.0, ctl)?;
    if r <= SERIES_RADIUS || err <= ctl.rel_tol() {
        return Ok(v);
    }
    bessel_i_integral(nu, z, ctl)
}

/// `[I_{nu0}(z), I_{nu0+1}(z), ..., I_{nu0+n}(z)]` by backward recurrence,
/// normalized against a directly computed low order.
pub fn bessel_i_ladder(nu0: f64, n: usize, z: Complex64, ctl: SeriesControl) -> Result<Vec<Complex64>> {
    check_order(nu0)?;
    let zero = Complex64::new(0.0, 0.0);
    if z == zero {
        let mut out = vec![zero; n + 1];
        if nu0 == 0.0 {
            out[0] = Complex64::new(1.0, 0.0);
        }
        return Ok(out);
    }
    let r = z.norm();
    let top = n.max(r.ceil() as usize) + 40 + (2.0 * r.sqrt()).ceil() as usize;
    let mut vals = vec![zero; n + 1];
    let mut next = zero;
    let mut cur = Complex64::new(1e-20, 0.0);
    let inv_z = 1.0 / z;
    for j in (0..top).rev() {
        // I_{nu+j} = (2(nu+j+1)/z) I_{nu+j+1} + I_{nu+j+2}
        let prev = inv_z * (2.0 * (nu0 + j as f64 + 1.0)) * cur + next;
        next = cur;
        cur = prev;
        if j <= n {
            vals[j] = cur;
        }
        if cur.norm() > 1e100 {
            let s = 1e-100;
            cur *= s;
            next *= s;
            for v in vals.iter_mut().skip(j) {
                *v *= s;
            }
        }
    }
    // bring the unnormalized values to unit size so complex division is safe
    let peak = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak > 0.0 {
        for v in vals.iter_mut() {
            *v /= peak;
        }
    }
    let exact0 = bessel_i(nu0, z, ctl)?;
    let (anchor, exact) = if n >= 1 {
        let exact1 = bessel_i(nu0 + 1.0, z, ctl)?;
        if exact1.norm() * vals[0].norm() > exact0.norm() * vals[1].norm() {
            (1, exact1)
        } else {
            (0, exact0)
        }
    } else {
        (0, exact0)
    };
    if vals[anchor] == zero {
        return Err(Error::accuracy("bessel_i ladder normalization", exact, f64::INFINITY));
    }
    let scale = exact / vals[anchor];
    for v in vals.iter_mut() {
        *v *= scale;
    }
    vals[anchor] = exact;
    if anchor == 1 {
        vals[0] = exact0;
    }
    Ok(vals)
}
