//! Quadrature rules, adaptive integration and polar grids.

mod adaptive;
mod contour;
mod grid;
mod rules;

pub use adaptive::{integrate_adaptive, Estimate, Integrator};
pub use contour::{integrate_cosh_weighted, CoshContour};
pub use grid::{PolarGrid, RadialKind, RadialRule};
pub use rules::{gauss_laguerre, gauss_legendre, QuadratureRule, RuleKind};
