//! Globally adaptive Gauss-Kronrod (7, 15) integration of complex-valued
//! integrands over finite or semi-infinite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// An integral value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub err: f64,
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).norm())
}

/// Adaptive integrator with absolute and relative tolerances and a budget
/// on the number of panels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
}

impl Integrator {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Integrator {
            abs_tol,
            rel_tol,
            max_subdivisions: 2000,
        }
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n.max(1);
        self
    }

    /// Integrates `f` over `[a, b]`. `b = +inf` is handled by the map
    /// `x = a + t/(1-t)`.
    pub fn integrate<F: Fn(f64) -> Complex64>(&self, f: F, a: f64, b: f64) -> Result<Estimate> {
        if a.is_nan() || b.is_nan() || a.is_infinite() {
            return Err(Error::invalid(format!("bad integration interval [{a}, {b}]")));
        }
        if b == f64::INFINITY {
            let g = |t: f64| {
                let u = 1.0 - t;
                f(a + t / u) * (1.0 / (u * u))
            };
            return self.finite(&g, 0.0, 1.0);
        }
        if b == a {
            return Ok(Estimate {
                value: Complex64::new(0.0, 0.0),
                err: 0.0,
            });
        }
        if b < a {
            let e = self.finite(&f, b, a)?;
            return Ok(Estimate {
                value: -e.value,
                err: e.err,
            });
        }
        self.finite(&f, a, b)
    }

    fn finite<F: Fn(f64) -> Complex64>(&self, f: &F, a: f64, b: f64) -> Result<Estimate> {
        let (v, e) = kronrod(f, a, b);
        let mut heap = BinaryHeap::new();
        heap.push(Panel { a, b, value: v, err: e });
        let mut total = v;
        let mut total_err = e;
        let mut panels = 1;
        loop {
            let target = self.abs_tol.max(self.rel_tol * total.norm());
            if total_err <= target {
                break;
            }
            if panels >= self.max_subdivisions {
                return Err(Error::accuracy(
                    "adaptive quadrature budget exhausted",
                    resum(&heap),
                    total_err,
                ));
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) {
                heap.push(worst);
                return Err(Error::accuracy(
                    "adaptive quadrature hit machine resolution",
                    resum(&heap),
                    total_err,
                ));
            }
            let (v1, e1) = kronrod(f, worst.a, mid);
            let (v2, e2) = kronrod(f, mid, worst.b);
            total += v1 + v2 - worst.value;
            total_err += e1 + e2 - worst.err;
            heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
            heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
            panels += 1;
            if total_err < 0.0 || panels % 64 == 0 {
                total_err = heap.iter().map(|p| p.err).sum();
            }
        }
        let err = heap.iter().map(|p| p.err).sum();
        let value = resum(&heap);
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::accuracy("non-finite integrand", value, f64::INFINITY));
        }
        Ok(Estimate { value, err })
    }
}

fn resum(heap: &BinaryHeap<Panel>) -> Complex64 {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    panels.iter().map(|p| p.value).sum()
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol >= 1e-13`.
/// `b` may be `f64::INFINITY`.
pub fn integrate_adaptive<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, tol: f64) -> Result<Estimate> {
    if !(tol >= 1e-13) {
        return Err(Error::invalid(format!("tolerance must be at least 1e-13, got {tol:e}")));
    }
    Integrator::new(tol, 0.0).integrate(f, a, b)
}
