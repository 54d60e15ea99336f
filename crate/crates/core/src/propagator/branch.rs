use std::f64::consts::PI;

use num_complex::Complex64;

use crate::model::FieldParams;

const EDGE_TOL: f64 = 1e-12;

/// Reduction of the phase `theta` to `[-pi, pi]` and the branch weight of the
/// geometric term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchData {
    /// `theta + 2 j0 pi`, in `[-pi, pi]`.
    pub theta: f64,
    pub j0: i64,
    /// 1 inside, `e^{-+ 2 pi i alpha} + 1` at `-+pi`.
    pub chi: Complex64,
}

impl BranchData {
    /// True when the reduced phase sits on `+-pi`.
    pub fn on_edge(&self) -> bool {
        self.theta.abs() == PI
    }
}

pub fn branch_data(theta: f64, params: &FieldParams) -> BranchData {
    // ties go toward zero so that theta = +-pi keeps j0 = 0
    let x = -theta / (2.0 * PI);
    let mut j0 = if (x - x.trunc()).abs() == 0.5 { x.trunc() } else { x.round() } as i64;
    let mut red = theta + 2.0 * PI * j0 as f64;
    if red > PI + EDGE_TOL {
        j0 -= 1;
        red -= 2.0 * PI;
    } else if red < -PI - EDGE_TOL {
        j0 += 1;
        red += 2.0 * PI;
    }
    let one = Complex64::new(1.0, 0.0);
    let alpha = params.alpha();
    if (red - PI).abs() <= EDGE_TOL {
        BranchData {
            theta: PI,
            j0,
            chi: one + Complex64::from_polar(1.0, 2.0 * PI * alpha),
        }
    } else if (red + PI).abs() <= EDGE_TOL {
        BranchData {
            theta: -PI,
            j0,
            chi: one + Complex64::from_polar(1.0, -2.0 * PI * alpha),
        }
    } else {
        BranchData { theta: red, j0, chi: one }
    }
}

/// Weight of a covering sheet with phase `phi`: 1 inside `(-pi, pi)`,
/// one half on the edges, 0 outside.
pub fn sheet_weight(phi: f64) -> f64 {
    let d = phi.abs() - PI;
    if d.abs() <= EDGE_TOL {
        0.5
    } else if d < 0.0 {
        1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_cases() {
        let p = FieldParams::new(0.3, 1.0).unwrap();
        let b = branch_data(0.0, &p);
        assert_eq!((b.theta, b.j0, b.chi), (0.0, 0, Complex64::new(1.0, 0.0)));
        let b = branch_data(PI, &p);
        assert_eq!(b.j0, 0);
        assert!(b.on_edge());
        assert!((b.chi - (Complex64::from_polar(1.0, 2.0 * PI * 0.3) + 1.0)).norm() < 1e-15);
        let b = branch_data(-PI, &p);
        assert!((b.chi - (Complex64::from_polar(1.0, -2.0 * PI * 0.3) + 1.0)).norm() < 1e-15);
        let b = branch_data(2.5 * PI, &p);
        assert_eq!(b.j0, -1);
        assert!((b.theta - 0.5 * PI).abs() < 1e-14);
        assert_eq!(b.chi, Complex64::new(1.0, 0.0));
        for i in -200..=200 {
            let th = 0.173 * i as f64;
            let b = branch_data(th, &p);
            assert!(b.theta.abs() <= PI);
            assert!((th + 2.0 * PI * b.j0 as f64 - b.theta).abs() < 1e-12);
        }
    }

    #[test]
    fn sheet_weights() {
        assert_eq!(sheet_weight(0.3), 1.0);
        assert_eq!(sheet_weight(-PI), 0.5);
        assert_eq!(sheet_weight(PI + 1e-3), 0.0);
        assert_eq!(sheet_weight(5.0), 0.0);
    }
}
