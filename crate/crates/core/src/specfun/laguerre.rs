//! Generalized Laguerre polynomials and the radial polynomials `P_{k,m}`.

use super::gamma::binomial;
use super::Compensated;
use crate::model::FieldParams;
use num_complex::Complex64;

/// `L^nu_m(x)` by the three-term recurrence in `m`.
pub fn laguerre(m: u32, nu: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = 1.0 + nu - x;
    for j in 1..m {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + nu - x) * cur - (jf + nu) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `[L^nu_0(x), ..., L^nu_{m_max}(x)]`.
pub fn laguerre_all(m_max: u32, nu: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(m_max as usize + 1);
    out.push(1.0);
    if m_max == 0 {
        return out;
    }
    out.push(1.0 + nu - x);
    for j in 1..m_max as usize {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + nu - x) * out[j] - (jf + nu) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// `P_{k,m}(r) = M(-m, 1 + alpha_k, r)`, evaluated as
/// `L^{alpha_k}_m(r) / binom(m + alpha_k, m)`.
pub fn p_poly(k: i64, m: u32, params: &FieldParams, r: f64) -> f64 {
    let nu = params.alpha_k(k);
    laguerre(m, nu, r) / binomial(m, nu)
}

/// `P_{k,m}(r)` by its defining finite sum. Loses accuracy to cancellation for
/// large `m r`; [`p_poly`] is the production route.
pub fn p_poly_series(k: i64, m: u32, params: &FieldParams, r: f64) -> f64 {
    let nu = params.alpha_k(k);
    let mut acc = Compensated::new();
    let mut term = 1.0;
    acc.add(Complex64::new(term, 0.0));
    for n in 0..m {
        let nf = n as f64;
        term *= (nf - m as f64) / ((1.0 + nu + nf) * (nf + 1.0)) * r;
        acc.add(Complex64::new(term, 0.0));
    }
    acc.value().re
}
