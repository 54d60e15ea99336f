//! Gamma function, its logarithm and Pochhammer symbols.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    // x is the shifted argument (original minus one)
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Gamma function for real arguments. Returns infinity at the poles.
pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if is_nonpositive_integer(x) {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    if x == x.floor() && x <= 23.0 {
        let mut f = 1.0;
        let mut i = 2.0;
        while i < x {
            f *= i;
            i += 1.0;
        }
        return f;
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    let y = x - 1.0;
    let t = y + LANCZOS_G + 0.5;
    // split the power to postpone overflow near the top of the range
    let p = t.powf(0.5 * (y + 0.5));
    (2.0 * PI).sqrt() * p * (p * (-t).exp()) * lanczos_sum(y)
}

/// `1/Gamma(x)`, which is entire: zero at the non-positive integers.
pub fn recip_gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x > 171.0 {
        return (-ln_gamma(x)).exp();
    }
    1.0 / gamma(x)
}

/// `ln |Gamma(x)|`.
pub fn ln_gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return (PI / (PI * x).sin().abs()).ln() - ln_gamma(1.0 - x);
    }
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let y = x - 1.0;
    let t = y + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (y + 0.5) * t.ln() - t + lanczos_sum(y).ln()
}

/// Rising factorial `(a)_n = a (a+1) ... (a+n-1)`.
pub fn pochhammer(a: f64, n: u32) -> f64 {
    let mut p = 1.0;
    for j in 0..n {
        p *= a + j as f64;
    }
    p
}

/// `binom(m + nu, m) = (nu+1)_m / m!`.
pub fn binomial(m: u32, nu: f64) -> f64 {
    let mut b = 1.0;
    for j in 1..=m {
        b *= (nu + j as f64) / j as f64;
    }
    b
}

/// `ln Gamma(m + 1) - ln Gamma(m + nu + 1)`, accurate for large `m`.
pub fn ln_factorial_ratio(m: u32, nu: f64) -> f64 {
    ln_gamma(m as f64 + 1.0) - ln_gamma(m as f64 + nu + 1.0)
}
