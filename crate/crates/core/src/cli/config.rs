//! Run manifests: one JSON file, every field optional, plus flag overrides.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::evolve::{AdmissiblePair, PropagatorOptions};
use crate::model::FieldParams;
use crate::numerics::{PolarGrid, RadialRule};
use crate::propagator::Construction;

use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    pub b0: f64,
    /// Spectral truncation `|k| <= k_max`.
    pub k_max: u32,
    /// Spectral truncation `m <= m_max`.
    pub m_max: u32,
    /// Covering-space lattice window.
    pub j_window: u32,
    /// Target tolerance of kernel evaluations. When given explicitly it also
    /// caps the accuracy bounds used by `verify`.
    pub tol: Option<f64>,
    /// Largest `|z|` the partial-wave sum is asked to handle.
    pub z_cap: f64,
    pub grid: GridConfig,
    pub times: Vec<f64>,
    pub out: PathBuf,
    pub seed: u64,
    /// Index range for `spectrum`; defaults to `|k| <= k_max`, `m <= m_max`.
    pub spectrum: Option<SpectrumRange>,
    pub initial_data: InitialData,
    pub kernel: KernelConfig,
    pub strichartz: StrichartzConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: 0.5,
            b0: 1.0,
            k_max: 32,
            m_max: 64,
            j_window: 64,
            tol: None,
            z_cap: 40.0,
            grid: GridConfig::default(),
            times: vec![0.2, 0.5, 0.9, 1.3, 2.0, 2.8],
            out: PathBuf::from("out"),
            seed: 0,
            spectrum: None,
            initial_data: InitialData::default(),
            kernel: KernelConfig::default(),
            strichartz: StrichartzConfig::default(),
        }
    }
}

pub const DEFAULT_TOL: f64 = 1e-10;

impl RunConfig {
    pub fn params(&self) -> Result<FieldParams, CliError> {
        FieldParams::new(self.alpha, self.b0).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }

    pub fn propagator_options(&self) -> PropagatorOptions {
        PropagatorOptions {
            tol: self.tol(),
            k_max: None,
            j_window: self.j_window,
            z_cap: self.z_cap,
        }
    }

    pub fn spectrum_range(&self) -> SpectrumRange {
        self.spectrum.unwrap_or(SpectrumRange {
            k_min: -(self.k_max as i64),
            k_max: self.k_max as i64,
            m_max: self.m_max,
        })
    }

    pub fn data_grid(&self) -> Result<Arc<PolarGrid>, CliError> {
        let g = &self.grid;
        let radial = RadialRule::graded(g.n_head, g.s_split, g.n_tail, g.power).map_err(usage)?;
        Ok(Arc::new(PolarGrid::new(self.b0, radial, g.n_theta, false).map_err(usage)?))
    }

    /// Checks that do not need any numerics.
    pub fn validate(&self) -> Result<(), CliError> {
        self.params()?;
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(CliError::Usage(format!("tol must be positive, got {t}")));
            }
        }
        if !(self.z_cap > 0.0) {
            return Err(CliError::Usage(format!("z_cap must be positive, got {}", self.z_cap)));
        }
        if self.times.iter().any(|t| !t.is_finite()) {
            return Err(CliError::Usage("times must be finite".into()));
        }
        for pair in &self.strichartz.pairs {
            pair.admissible()?;
        }
        Ok(())
    }
}

fn usage(e: crate::Error) -> CliError {
    CliError::Usage(e.to_string())
}

/// Graded radial rule in `s = b0 r^2 / 2` and the angular count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n_head: usize,
    pub s_split: f64,
    pub n_tail: usize,
    pub power: u32,
    pub n_theta: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n_head: 40,
            s_split: 4.0,
            n_tail: 80,
            power: 6,
            n_theta: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumRange {
    pub k_min: i64,
    pub k_max: i64,
    pub m_max: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `exp(-|x - center|^2 / (2 sigma^2))`.
    Gaussian {
        sigma: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    /// One unit-normalized eigenfunction.
    SingleMode { k: i64, m: u32 },
    /// Samples in the snapshot schema `r,theta,re,im`.
    Csv { path: PathBuf },
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Gaussian {
            sigma: 0.4,
            center: [0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuerySpec {
    pub t: f64,
    pub r1: f64,
    pub th1: f64,
    pub r2: f64,
    pub th2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    /// Explicit queries; the seeded standard battery is used when absent.
    pub queries: Option<Vec<QuerySpec>>,
    pub constructions: Vec<Construction>,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            queries: None,
            constructions: Construction::CROSS_CHECKED.to_vec(),
        }
    }
}

/// A Lebesgue exponent: a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Finite(f64),
    Named(Infinity),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Infinity {
    #[serde(rename = "inf")]
    Inf,
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(v) => v,
            Exponent::Named(Infinity::Inf) => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub q: Exponent,
    pub p: Exponent,
}

impl PairSpec {
    pub fn admissible(&self) -> Result<AdmissiblePair, CliError> {
        AdmissiblePair::new(self.q.value(), self.p.value()).map_err(usage)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrichartzConfig {
    pub pairs: Vec<PairSpec>,
    /// Window end; `pi / (4 b0)` when absent.
    pub t_end: Option<f64>,
    pub n_t: usize,
}

impl Default for StrichartzConfig {
    fn default() -> Self {
        StrichartzConfig {
            pairs: vec![
                PairSpec {
                    q: Exponent::Finite(4.0),
                    p: Exponent::Finite(4.0),
                },
                PairSpec {
                    q: Exponent::Named(Infinity::Inf),
                    p: Exponent::Finite(2.0),
                },
            ],
            t_end: None,
            n_t: 16,
        }
    }
}

impl StrichartzConfig {
    pub fn t_end(&self, b0: f64) -> f64 {
        self.t_end.unwrap_or(PI / (4.0 * b0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let c: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.tol(), DEFAULT_TOL);
        assert_eq!(c.spectrum_range().k_min, -32);
    }

    #[test]
    fn full_manifest_round_trips() {
        let text = r#"{
            "alpha": 0.25, "b0": 2.0, "seed": 9, "tol": 1e-9,
            "grid": {"n_theta": 64},
            "spectrum": {"k_min": -1, "k_max": 1, "m_max": 1},
            "initial_data": {"kind": "single_mode", "k": -1, "m": 2},
            "kernel": {"queries": [{"t": 0.3, "r1": 1, "th1": 0, "r2": 2, "th2": 1}], "constructions": ["closed"]},
            "strichartz": {"pairs": [{"q": "inf", "p": 2}, {"q": 8, "p": 2.6666666666666665}], "n_t": 8}
        }"#;
        let c: RunConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.grid.n_theta, 64);
        assert_eq!(c.grid.n_head, 40);
        assert_eq!(c.initial_data, InitialData::SingleMode { k: -1, m: 2 });
        assert!(c.strichartz.pairs[0].q.value().is_infinite());
        c.validate().unwrap();
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_manifests() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"alhpa": 0.5}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"alpha": 1.5}"#).unwrap();
        assert!(matches!(c.validate(), Err(CliError::Usage(_))));
        let c: RunConfig = serde_json::from_str(r#"{"strichartz": {"pairs": [{"q": 3, "p": 4}]}}"#).unwrap();
        assert!(c.validate().is_err());
    }
}
