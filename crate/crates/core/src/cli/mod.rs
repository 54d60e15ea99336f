//! The `abprop` command line: `spectrum`, `kernel`, `evolve` and `verify`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O
//! error, 4 numerical-accuracy failure.

pub mod config;
pub mod io;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::checks::{render_table, verify, VerifyOptions};
use crate::evolve::{decay_report, dispersive_fields, evolve_spectral, lp_norm, strichartz_norm, DecayReport};
use crate::model::{FieldParams, PolarPoint};
use crate::propagator::{kernel, prefactor_magnitude, standard_battery, Construction, KernelQuery};
use crate::spectrum::{
    eigenvalue, expand, multiplicity, norm_sq, normalized_eigenfunction, reconstruct_on, ModeIndex,
    SpectralCoefficients, WaveFunction,
};

use config::{InitialData, RunConfig};
use io::{ensure_dir, num, out_path, snapshot_name, wavefunction_table, write_file, Table};

/// Rings and angles of the sampling grid used for kernel-route snapshots.
const SAMPLE_RINGS: usize = 64;
const SAMPLE_ANGLES: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Data { path: PathBuf, msg: String },
    #[error(transparent)]
    Numerics(#[from] crate::Error),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Data { .. } => 3,
            CliError::Numerics(e) => match e {
                crate::Error::Accuracy { .. } | crate::Error::OutOfRange(_) => 4,
                _ => 2,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "abprop", version, about = "Aharonov-Bohm propagator in a uniform magnetic field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues, norms and multiplicities over an index range.
    Spectrum(Common),
    /// Kernel values from every configured construction.
    Kernel(Common),
    /// Time evolution, decay ratios, Strichartz norms and snapshots.
    Evolve(Common),
    /// Runs the invariant battery and prints a pass/fail table.
    Verify(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run manifest; every field is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    b0: Option<f64>,
    #[arg(long)]
    kmax: Option<u32>,
    #[arg(long)]
    mmax: Option<u32>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => {
                let text = io::read_file(path)?;
                serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(v) = self.b0 {
            c.b0 = v;
        }
        if let Some(v) = self.kmax {
            c.k_max = v;
            if let Some(r) = c.spectrum.as_mut() {
                r.k_min = -(v as i64);
                r.k_max = v as i64;
            }
        }
        if let Some(v) = self.mmax {
            c.m_max = v;
            if let Some(r) = c.spectrum.as_mut() {
                r.m_max = v;
            }
        }
        if self.tol.is_some() {
            c.tol = self.tol;
        }
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Spectrum(c) => c.load().and_then(|cfg| cmd_spectrum(&cfg)),
        Command::Kernel(c) => c.load().and_then(|cfg| cmd_kernel(&cfg)),
        Command::Evolve(c) => c.load().and_then(|cfg| cmd_evolve(&cfg)),
        Command::Verify(c) => c.load().and_then(|cfg| cmd_verify(&cfg)),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("abprop: error: {e}");
            e.exit_code()
        }
    }
}

fn summary(command: &str, cfg: &RunConfig, deviations: Value, extra: Value) -> Value {
    json!({
        "command": command,
        "config": cfg,
        "versions": { "abprop": env!("CARGO_PKG_VERSION"), "summary_schema": 1 },
        "max_deviations": deviations,
        "results": extra,
    })
}

fn write_summary(dir: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("summary values serialize");
    text.push('\n');
    write_file(&out_path(dir, "summary.json"), text.as_bytes())
}

/// `spectrum.csv`: `k,m,lambda,norm_sq,multiplicity`.
pub fn cmd_spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.params()?;
    let range = cfg.spectrum_range();
    ensure_dir(&cfg.out)?;
    let mut table = Table::new(&["k", "m", "lambda", "norm_sq", "multiplicity"]);
    let mut rows = 0usize;
    for k in range.k_min..=range.k_max {
        for m in 0..=range.m_max {
            let mode = ModeIndex::new(k, m);
            let lambda = eigenvalue(mode, &params);
            let mult = multiplicity(lambda, &params, cfg.j_window as u64);
            table.row([k.to_string(), m.to_string(), num(lambda), num(norm_sq(mode, &params)), mult.to_string()]);
            rows += 1;
        }
    }
    table.write(&out_path(&cfg.out, "spectrum.csv"))?;
    write_summary(&cfg.out, &summary("spectrum", cfg, json!({}), json!({ "rows": rows })))
}

fn kernel_queries(cfg: &RunConfig, params: &FieldParams) -> Result<Vec<(f64, PolarPoint, PolarPoint)>, CliError> {
    Ok(match &cfg.kernel.queries {
        Some(list) => list
            .iter()
            .map(|q| (q.t, PolarPoint { r: q.r1, theta: q.th1 }, PolarPoint { r: q.r2, theta: q.th2 }))
            .collect(),
        None => standard_battery(params, cfg.seed)?
            .into_iter()
            .map(|q| (q.t(), q.x(), q.y()))
            .collect(),
    })
}

fn build_query(cfg: &RunConfig, params: &FieldParams, t: f64, x: PolarPoint, y: PolarPoint) -> crate::Result<KernelQuery> {
    KernelQuery::new(t, x, y, params)?
        .with_tol(cfg.tol())?
        .with_j_window(cfg.j_window)?
        .with_z_cap(cfg.z_cap)
}

/// `kernel.csv`: `t,r1,th1,r2,th2,construction,re,im,err_est,status`.
/// Failed evaluations keep their row with a status label; the command only
/// fails when no row succeeds.
pub fn cmd_kernel(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.params()?;
    let queries = kernel_queries(cfg, &params)?;
    ensure_dir(&cfg.out)?;
    let constructions = &cfg.kernel.constructions;
    let mut table = Table::new(&["t", "r1", "th1", "r2", "th2", "construction", "re", "im", "err_est", "status"]);
    let mut ok_rows = 0usize;
    let mut failed_rows = 0usize;
    let mut max_cross = 0.0f64;
    let mut compared = 0usize;
    let mut first_error: Option<crate::Error> = None;
    let results: Vec<Vec<crate::Result<crate::propagator::KernelValue>>> = {
        use rayon::prelude::*;
        queries
            .par_iter()
            .map(|&(t, x, y)| match build_query(cfg, &params, t, x, y) {
                Ok(q) => constructions.iter().map(|&c| kernel(c, &q, &params)).collect(),
                Err(e) => constructions.iter().map(|_| Err(e.clone())).collect(),
            })
            .collect()
    };
    for (&(t, x, y), row) in queries.iter().zip(&results) {
        let mut cross: Vec<Complex64> = Vec::new();
        for (&c, res) in constructions.iter().zip(row) {
            let prefix = [num(t), num(x.r), num(x.theta), num(y.r), num(y.theta), c.name().to_string()];
            match res {
                Ok(v) => {
                    ok_rows += 1;
                    if Construction::CROSS_CHECKED.contains(&c) {
                        cross.push(v.value);
                    }
                    table.row(prefix.into_iter().chain([num(v.value.re), num(v.value.im), num(v.err_est), "ok".into()]));
                }
                Err(e) => {
                    failed_rows += 1;
                    first_error.get_or_insert_with(|| e.clone());
                    let nan = num(f64::NAN);
                    table.row(prefix.into_iter().chain([nan.clone(), nan.clone(), nan, e.kind().to_string()]));
                }
            }
        }
        if cross.len() >= 2 {
            let scale = prefactor_magnitude(t, &params);
            for i in 0..cross.len() {
                for j in i + 1..cross.len() {
                    max_cross = max_cross.max((cross[i] - cross[j]).norm() / scale);
                }
            }
            compared += 1;
        }
    }
    table.write(&out_path(&cfg.out, "kernel.csv"))?;
    write_summary(
        &cfg.out,
        &summary(
            "kernel",
            cfg,
            json!({ "cross_construction_scaled": max_cross }),
            json!({ "queries": queries.len(), "compared_queries": compared, "ok_rows": ok_rows, "failed_rows": failed_rows }),
        ),
    )?;
    if ok_rows == 0 {
        if let Some(e) = first_error {
            return Err(e.into());
        }
    }
    Ok(())
}

/// Initial data on its grid and, for single modes, exact coefficients.
fn initial_data(cfg: &RunConfig, params: &FieldParams) -> Result<(WaveFunction, Option<SpectralCoefficients>), CliError> {
    let grid = cfg.data_grid()?;
    match &cfg.initial_data {
        InitialData::Gaussian { sigma, center } => {
            if !(*sigma > 0.0) {
                return Err(CliError::Usage(format!("gaussian sigma must be positive, got {sigma}")));
            }
            let w = 1.0 / (2.0 * sigma * sigma);
            let (cx, cy) = (center[0], center[1]);
            let f = WaveFunction::from_fn(grid, |p| {
                let q = p.to_cartesian();
                let d2 = (q.x1 - cx).powi(2) + (q.x2 - cy).powi(2);
                Complex64::new((-d2 * w).exp(), 0.0)
            })?;
            Ok((f, None))
        }
        InitialData::SingleMode { k, m } => {
            let mode = ModeIndex::new(*k, *m);
            let c = SpectralCoefficients::from_modes(*params, k.unsigned_abs() as u32, *m, &[(mode, Complex64::new(1.0, 0.0))])?;
            let f = WaveFunction::from_fn(grid, |p| normalized_eigenfunction(mode, params, p))?;
            Ok((f, Some(c)))
        }
        InitialData::Csv { path } => Ok((io::read_wavefunction(path, &grid)?, None)),
    }
}

fn decay_table(r: &DecayReport) -> Table {
    let mut t = Table::new(&["t", "sup_norm", "ratio"]);
    for i in 0..r.times.len() {
        t.row([num(r.times[i]), num(r.sup_norms[i]), num(r.ratios[i])]);
    }
    t
}

/// `decay.csv`, `strichartz.csv`, `coefficients.csv`, one snapshot per time
/// and `summary.json`.
///
/// Single modes evolve spectrally on the data grid. Other data are propagated
/// by partial-wave kernel quadrature onto sampling grids sized for each time.
pub fn cmd_evolve(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.params()?;
    if cfg.times.is_empty() {
        return Err(CliError::Usage("evolve needs at least one time".into()));
    }
    let (f, exact) = initial_data(cfg, &params)?;
    ensure_dir(&cfg.out)?;

    let k_cap = ((f.grid().angular_count() as u32).saturating_sub(1)) / 2;
    let coeffs = match &exact {
        Some(c) => c.clone(),
        None => expand(&f, cfg.k_max.min(k_cap), cfg.m_max, &params)?,
    };
    write_file(&out_path(&cfg.out, "coefficients.csv"), coeffs.to_csv().as_bytes())?;

    let fields: Vec<WaveFunction> = match &exact {
        Some(c) => cfg
            .times
            .iter()
            .map(|&t| reconstruct_on(&evolve_spectral(c, t), f.shared_grid()))
            .collect::<crate::Result<_>>()?,
        None => dispersive_fields(&f, &cfg.times, &params, &cfg.propagator_options(), SAMPLE_RINGS, SAMPLE_ANGLES)?,
    };
    let report = decay_report(&f, &cfg.times, &fields, &params)?;
    decay_table(&report).write(&out_path(&cfg.out, "decay.csv"))?;
    for (&t, u) in cfg.times.iter().zip(&fields) {
        wavefunction_table(u).write(&out_path(&cfg.out, &snapshot_name(t)))?;
    }

    let t_end = cfg.strichartz.t_end(params.b0());
    let mut st = Table::new(&["q", "p", "T", "value"]);
    let mut st_json = Vec::new();
    for spec in &cfg.strichartz.pairs {
        let pair = spec.admissible()?;
        let v = strichartz_norm(&f, pair, t_end, cfg.strichartz.n_t, &params)?;
        st.row([num(pair.q()), num(pair.p()), num(t_end), num(v)]);
        st_json.push(json!({ "q": num(pair.q()), "p": num(pair.p()), "value": v }));
    }
    st.write(&out_path(&cfg.out, "strichartz.csv"))?;

    let data_norm_sq = f.norm_sq();
    let proj = coeffs.norm_sq();
    let l2 = lp_norm(&f, 2.0)?;
    write_summary(
        &cfg.out,
        &summary(
            "evolve",
            cfg,
            json!({ "projection_defect": (1.0 - proj / data_norm_sq).abs() }),
            json!({
                "data_norm_sq": data_norm_sq,
                "projected_norm_sq": proj,
                "l2_norm": l2,
                "c_emp": report.c_emp,
                "ratio_spread": report.spread(),
                "strichartz": st_json,
                "strichartz_route": "spectral_projection",
                "route": if exact.is_some() { "spectral" } else { "partial_wave_kernel" },
            }),
        ),
    )
}

/// Prints the check table; fails with exit code 1 when any check fails.
pub fn cmd_verify(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.params()?;
    let checks = verify(&VerifyOptions {
        params,
        seed: cfg.seed,
        tighten: cfg.tol,
    });
    print!("{}", render_table(&checks));
    ensure_dir(&cfg.out)?;
    let worst = checks
        .iter()
        .map(|c| (c.name.clone(), json!(c.value)))
        .collect::<serde_json::Map<_, _>>();
    write_summary(&cfg.out, &summary("verify", cfg, Value::Object(worst), json!({ "checks": checks })))?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        println!("all {} checks passed", checks.len());
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "{} of {} checks failed: {}",
            failed.len(),
            checks.len(),
            failed.join(", ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Verification("x".into()).exit_code(), 1);
        let io = CliError::Io {
            path: "p".into(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "gone"),
        };
        assert_eq!(io.exit_code(), 3);
        let acc = CliError::from(crate::Error::Accuracy {
            context: "c".into(),
            value: Complex64::new(0.0, 0.0),
            estimate: 1.0,
        });
        assert_eq!(acc.exit_code(), 4);
        assert_eq!(CliError::from(crate::Error::Domain("d".into())).exit_code(), 2);
    }

    #[test]
    fn parse_errors_are_usage_errors() {
        assert_eq!(run(["abprop"]), 2);
        assert_eq!(run(["abprop", "spectrum", "--alpha"]), 2);
        assert_eq!(run(["abprop", "explode"]), 2);
        assert_eq!(run(["abprop", "--help"]), 0);
    }

    #[test]
    fn flags_override_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"alpha": 0.3, "spectrum": {"k_min": -4, "k_max": 4, "m_max": 2}}"#).unwrap();
        let common = Common {
            config: Some(path),
            alpha: Some(0.6),
            b0: None,
            kmax: Some(1),
            mmax: None,
            tol: Some(1e-9),
            out: None,
            seed: Some(3),
        };
        let c = common.load().unwrap();
        assert_eq!(c.alpha, 0.6);
        assert_eq!(c.spectrum_range().k_min, -1);
        assert_eq!(c.spectrum_range().m_max, 2);
        assert_eq!(c.tol, Some(1e-9));
        assert_eq!(c.seed, 3);
    }
}
