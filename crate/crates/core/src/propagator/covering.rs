//! Sum over the sheets of the universal cover. Each sheet `j` contributes a
//! geometric term when its phase `theta + 2 pi j` lies in `[-pi, pi]` and a
//! diffractive term built from `1/((theta + 2 pi j) +- pi + is)`.

use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::{bracket_at_origin, branch_data, sheet_weight, Construction, KernelQuery, KernelValue};
use crate::error::{Error, Result};
use crate::model::FieldParams;
use crate::numerics::{integrate_cosh_weighted, Estimate};

const TWO_PI: f64 = 2.0 * PI;

/// `i e^{i alpha sigma} / (e^{i sigma} - 1)`, the value of
/// `sum_j e^{-2 pi i alpha j} / (sigma + 2 pi j)` for `alpha` in `(0, 1)`.
pub fn partial_fraction_closed(sigma: Complex64, alpha: f64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    if sigma.im >= 0.0 {
        i * (i * alpha * sigma).exp() / ((i * sigma).exp() - 1.0)
    } else {
        i * (i * (alpha - 1.0) * sigma).exp() / (1.0 - (-i * sigma).exp())
    }
}

/// Plain symmetric truncation `sum_{|j| <= window}`. Its error decays only
/// like `1/window`.
pub fn partial_fraction_truncated(sigma: Complex64, alpha: f64, window: u32) -> Complex64 {
    let w = Complex64::from_polar(1.0, -TWO_PI * alpha);
    let j_max = window as i64;
    (-j_max..=j_max)
        .map(|j| w.powi(j as i32) / (sigma + TWO_PI * j as f64))
        .sum()
}

/// `sum_{i >= 0} w^i / (c + h i)` by the Euler transform
/// `sum_p w^p / (1-w)^{p+1} Delta^p b_0`, stopped at the smallest term.
fn euler_tail(c: Complex64, h: f64, w: Complex64) -> (Complex64, f64) {
    let one_minus = 1.0 - w;
    let ratio = w / one_minus;
    let mut t = 1.0 / (one_minus * c);
    let mut sum = t;
    let mut last = t.norm();
    for p in 0..60 {
        let q = (p + 1) as f64;
        let next = t * ratio * (-q * h) / (c + q * h);
        let size = next.norm();
        if size >= last {
            break;
        }
        sum += next;
        t = next;
        last = size;
        if size <= 1e-17 * sum.norm() {
            break;
        }
    }
    (sum, last)
}

/// Full lattice sum: the window `|j| <= window` summed directly, the two
/// tails by the Euler transform. Returns the value and the size of the
/// last tail term used.
pub fn partial_fraction_sum(sigma: Complex64, alpha: f64, window: u32) -> Result<Estimate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("lattice sum needs alpha in (0, 1), got {alpha}")));
    }
    let w = Complex64::from_polar(1.0, -TWO_PI * alpha);
    let head = partial_fraction_truncated(sigma, alpha, window);
    let (v, e) = tails(sigma, w, window);
    Ok(Estimate { value: head + v, err: e })
}

fn tails(sigma: Complex64, w: Complex64, window: u32) -> (Complex64, f64) {
    let n = window as f64 + 1.0;
    let lead = w.powi(window as i32 + 1);
    let (pos, ep) = euler_tail(sigma + TWO_PI * n, TWO_PI, w);
    let (neg, en) = euler_tail(sigma - TWO_PI * n, -TWO_PI, w.conj());
    (lead * pos + lead.conj() * neg, ep + en)
}

/// `S(b + is) + S(b - is)` for real `b` and complex `s`. Each pair of lattice
/// terms is combined as `2a / (a^2 + s^2)`, which is exact at `a = 0`.
fn folded_lattice(b: f64, s: Complex64, w: Complex64, window: u32, worst: &Cell<f64>) -> Complex64 {
    let s2 = s * s;
    let j_max = window as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut wp = w.powi(-(window as i32));
    for j in -j_max..=j_max {
        let a = b + TWO_PI * j as f64;
        if a != 0.0 {
            acc += wp * (2.0 * a) / (a * a + s2);
        }
        wp *= w;
    }
    let i = Complex64::new(0.0, 1.0);
    let (up, e1) = tails(b + i * s, w, window);
    let (dn, e2) = tails(b - i * s, w, window);
    worst.set(worst.get().max(e1 + e2));
    acc + up + dn
}

/// Geometric plus diffractive sheet contributions, in units of the prefactor.
pub(super) fn covering_bracket(z: Complex64, theta: f64, params: &FieldParams, window: u32, tol: f64) -> Result<Estimate> {
    let alpha = params.alpha();
    let red = branch_data(theta, params).theta;
    let j_max = window as i64;
    let mut geometric = Complex64::new(0.0, 0.0);
    for j in -j_max..=j_max {
        let phi = red + TWO_PI * j as f64;
        let wt = sheet_weight(phi);
        if wt > 0.0 {
            geometric += wt * (z * phi.cos()).exp() * Complex64::from_polar(1.0, -alpha * phi);
        }
    }
    if alpha == 0.0 {
        return Ok(Estimate { value: geometric, err: 1e-16 });
    }
    let w = Complex64::from_polar(1.0, -TWO_PI * alpha);
    let worst = Cell::new(0.0f64);
    let g = |s: Complex64| folded_lattice(red + PI, s, w, window, &worst) - folded_lattice(red - PI, s, w, window, &worst);
    let decay = alpha.min(1.0 - alpha);
    let cap = (1.0 / tol).ln() / decay + 5.0;
    let d = integrate_cosh_weighted(z, g, decay, tol, cap)?;
    let tail_err = worst.get();
    if tail_err > tol {
        return Err(Error::accuracy(
            "covering lattice tail; alpha too close to 0 or 1 for the sheet window",
            d.value,
            tail_err,
        ));
    }
    let diffractive = -Complex64::from_polar(1.0, -alpha * red) * d.value / TWO_PI;
    Ok(Estimate {
        value: geometric + diffractive,
        err: (d.err + 10.0 * tail_err) / TWO_PI + 1e-16,
    })
}

pub fn kernel_covering(q: &KernelQuery, params: &FieldParams) -> Result<KernelValue> {
    q.validate(params)?;
    if q.j_window() < 2 {
        return Err(Error::invalid("the covering sum needs j_window >= 2"));
    }
    let pref = q.prefactor(params);
    let z = q.z(params);
    if z == Complex64::new(0.0, 0.0) {
        return KernelValue::new(pref * bracket_at_origin(params), Construction::Covering, 0.0);
    }
    let b = covering_bracket(z, q.phase(params), params, q.j_window(), q.tol())?;
    KernelValue::new(pref * b.value, Construction::Covering, pref.norm() * b.err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_identity() {
        let sigma = Complex64::new(1.0, 0.5);
        let closed = partial_fraction_closed(sigma, 0.3);
        let acc = partial_fraction_sum(sigma, 0.3, 2000).unwrap();
        assert!((acc.value - closed).norm() < 1e-6);
        assert!((acc.value - closed).norm() < 1e-13);
        for &(s, a) in &[(Complex64::new(-2.0, 3.0), 0.5), (Complex64::new(0.4, -7.0), 0.8), (Complex64::new(3.0, 0.0), 0.25)] {
            let v = partial_fraction_sum(s, a, 16).unwrap();
            let c = partial_fraction_closed(s, a);
            assert!((v.value - c).norm() < 1e-13 * c.norm().max(1.0), "{s} {a}");
        }
    }

    #[test]
    fn plain_truncation_error_is_first_order() {
        let sigma = Complex64::new(1.0, 0.5);
        let closed = partial_fraction_closed(sigma, 0.3);
        let e1 = (partial_fraction_truncated(sigma, 0.3, 500) - closed).norm();
        let e2 = (partial_fraction_truncated(sigma, 0.3, 2000) - closed).norm();
        assert!(e2 < e1 && e2 > 1e-6 && e2 < 1e-4, "{e1} {e2}");
    }

    #[test]
    fn only_one_sheet_is_geometric() {
        let p = FieldParams::new(0.4, 1.0).unwrap();
        for &th in &[0.2, 3.0, -2.5, 7.0] {
            let red = branch_data(th, &p).theta;
            let inside: Vec<i64> = (-8..=8).filter(|&j| sheet_weight(red + TWO_PI * j as f64) > 0.0).collect();
            assert_eq!(inside, vec![0]);
        }
        let inside = (-8..=8).filter(|&j| sheet_weight(PI + TWO_PI * j as f64) > 0.0).count();
        assert_eq!(inside, 2);
    }
}
