//! Gauss-Legendre and generalized Gauss-Laguerre rules.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::specfun::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleKind {
    /// Unit weight on `[-1, 1]`.
    Legendre,
    /// Weight `x^nu e^{-x}` on `(0, inf)`.
    Laguerre { nu: f64 },
}

/// A fixed quadrature rule. Nodes are strictly increasing.
///
/// Laguerre weights for the outermost nodes of large rules can fall below the
/// smallest positive double; `log_weights` keeps them exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    kind: RuleKind,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_i w_i f(x_i)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, w)| w * f(x)).sum()
    }
}

/// Legendre polynomial `P_n(x)` and `P_{n-1}(x)`.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 1..n {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// `n`-point Gauss-Legendre rule on `[-1, 1]`, for `1 <= n <= 512`.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if n == 0 || n > 512 {
        return Err(Error::invalid(format!("Gauss-Legendre size must lie in 1..=512, got {n}")));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n / 2 {
        // i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, q) = legendre_pair(n, x);
            let dp = nf * (x * p - q) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (p, q) = legendre_pair(n, x);
        let dp = nf * (x * p - q) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        let (_, q) = legendre_pair(n, 0.0);
        let dp = nf * q;
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (dp * dp);
    }
    let log_weights = weights.iter().map(|w| w.ln()).collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        log_weights,
        kind: RuleKind::Legendre,
    })
}

/// `L^nu_n(x)` and `L^nu_{n-1}(x)` as mantissas times `e^{log_scale}`.
fn laguerre_scaled(n: usize, nu: f64, x: f64) -> (f64, f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = 1.0 + nu - x;
    let mut log_scale = 0.0;
    if n == 0 {
        return (1.0, 0.0, 0.0);
    }
    for j in 1..n {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0 + nu - x) * p1 - (jf + nu) * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
        if p1.abs() > 1e150 {
            p0 *= 1e-150;
            p1 *= 1e-150;
            log_scale += 150.0 * std::f64::consts::LN_10;
        }
    }
    (p1, p0, log_scale)
}

/// `n`-point generalized Gauss-Laguerre rule for the weight `x^nu e^{-x}`,
/// for `1 <= n <= 256` and `nu > -1`.
///
/// Nodes come from the eigenvalues of the Jacobi matrix and are polished by
/// Newton iteration on the scaled three-term recurrence.
pub fn gauss_laguerre(n: usize, nu: f64) -> Result<QuadratureRule> {
    if n == 0 || n > 256 {
        return Err(Error::invalid(format!("Gauss-Laguerre size must lie in 1..=256, got {n}")));
    }
    if !(nu > -1.0) || !nu.is_finite() {
        return Err(Error::invalid(format!("Gauss-Laguerre needs nu > -1, got {nu}")));
    }
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * i as f64 + 1.0 + nu
        } else if i + 1 == j || j + 1 == i {
            let k = i.max(j) as f64;
            (k * (k + nu)).sqrt()
        } else {
            0.0
        }
    });
    let mut guess: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    guess.sort_by(f64::total_cmp);

    let nf = n as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut log_weights = Vec::with_capacity(n);
    for &x0 in &guess {
        let mut x = x0.max(f64::MIN_POSITIVE);
        for _ in 0..50 {
            let (p, q, _) = laguerre_scaled(n, nu, x);
            // x L_n' = n L_n - (n + nu) L_{n-1}
            let dx = x * p / (nf * p - (nf + nu) * q);
            let next = x - dx;
            x = if next > 0.0 { next } else { 0.5 * x };
            if dx.abs() <= 4.0 * f64::EPSILON * x {
                break;
            }
        }
        let (_, q, log_scale) = laguerre_scaled(n, nu, x);
        let lw = ln_gamma(nf + nu + 1.0) - ln_gamma(nf + 1.0) + x.ln()
            - 2.0 * (nf + nu).ln()
            - 2.0 * (q.abs().ln() + log_scale);
        nodes.push(x);
        log_weights.push(lw);
    }
    for w in nodes.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::accuracy(
                "gauss_laguerre node separation",
                num_complex::Complex64::new(w[0], w[1]),
                f64::INFINITY,
            ));
        }
    }
    let weights = log_weights.iter().map(|lw| lw.exp()).collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        log_weights,
        kind: RuleKind::Laguerre { nu },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma;

    #[test]
    fn legendre_basics() {
        let r = gauss_legendre(1).unwrap();
        assert_eq!(r.nodes(), &[0.0]);
        assert!((r.weights()[0] - 2.0).abs() < 1e-15);
        let r = gauss_legendre(5).unwrap();
        assert!((r.integrate(|x| x.powi(8)) - 2.0 / 9.0).abs() < 1e-13);
        assert!(gauss_legendre(0).is_err() && gauss_legendre(513).is_err());
    }

    #[test]
    fn legendre_mapped_arctan() {
        let r = gauss_legendre(64).unwrap();
        let v = 0.5 * r.integrate(|x| {
            let t = 0.5 * (x + 1.0);
            1.0 / (1.0 + t * t)
        });
        assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-14);
    }

    #[test]
    fn legendre_structure() {
        for &n in &[2usize, 7, 64, 255, 512] {
            let r = gauss_legendre(n).unwrap();
            let sum: f64 = r.weights().iter().sum();
            assert!((sum - 2.0).abs() < 1e-12, "n={n}");
            for i in 0..n {
                assert_eq!(r.nodes()[i], -r.nodes()[n - 1 - i]);
                assert!(r.weights()[i] > 0.0);
            }
            assert!(r.nodes().windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn laguerre_basics() {
        let r = gauss_laguerre(12, 0.0).unwrap();
        assert!((r.weights().iter().sum::<f64>() - 1.0).abs() < 1e-13);
        let r = gauss_laguerre(2, 0.0).unwrap();
        assert!((r.integrate(|x| x.powi(3)) - 6.0).abs() < 1e-12);
        assert!(gauss_laguerre(3, -1.0).is_err());
        assert!(gauss_laguerre(257, 0.0).is_err());
    }

    #[test]
    fn laguerre_exactness() {
        for &nu in &[-0.5, 0.0, 0.3, 1.8, 5.25] {
            for &n in &[5usize, 20, 60] {
                let r = gauss_laguerre(n, nu).unwrap();
                let mass: f64 = r.weights().iter().sum();
                assert!((mass / gamma(nu + 1.0) - 1.0).abs() < 1e-12, "nu={nu} n={n}");
                assert!(r.weights().iter().all(|&w| w > 0.0));
                for d in [1usize, 7, (2 * n - 1).min(30)] {
                    // int x^d x^nu e^-x = Gamma(nu + d + 1)
                    let v = r.integrate(|x| x.powi(d as i32));
                    let exact = gamma(nu + d as f64 + 1.0);
                    assert!((v / exact - 1.0).abs() < 1e-12, "nu={nu} n={n} d={d}");
                }
            }
        }
    }

    #[test]
    fn large_laguerre_rule() {
        let r = gauss_laguerre(256, 0.4).unwrap();
        assert!(r.nodes().windows(2).all(|w| w[1] > w[0]));
        let mass: f64 = r.weights().iter().sum();
        assert!((mass / gamma(1.4) - 1.0).abs() < 1e-12);
        let v: f64 = r
            .nodes()
            .iter()
            .zip(r.log_weights())
            .map(|(x, lw)| (lw + 5.0 * x.ln()).exp())
            .sum();
        assert!((v / gamma(6.4) - 1.0).abs() < 1e-11);
    }
}
