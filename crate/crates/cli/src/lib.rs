//! Config-driven experiment runner: simulate or load measurements, recover
//! the sparse expansion, write a JSON report.

pub mod config;
pub mod io;
pub mod report;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gop_core::recovery::recover_with;
use gop_core::sampling::{legendre_kernels, Measurements, Scheme};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use config::{ExperimentConfig, NoiseSpec};
use report::{ErrorSummary, Report, SchemeSummary, Status, SCHEMA_VERSION};

pub const DEFAULT_KERNEL_SAMPLES: usize = 401;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("recovery failed: {0}")]
    Recovery(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Recovery(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Command-line overrides for one run.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Report,
    pub report_path: PathBuf,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        match self.report.status {
            Status::Ok => 0,
            Status::RecoveryFailed => 3,
        }
    }
}

/// Adds complex Gaussian noise with `E|n|² = sigma²` in scheme order.
pub fn add_noise(meas: &mut Measurements, ids: &[String], sigma: f64, seed: u64) {
    if sigma == 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma / std::f64::consts::SQRT_2).expect("sigma validated");
    for id in ids {
        let n = Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        if let Some(v) = meas.get(id) {
            meas.insert(id.clone(), v + n);
        }
    }
}

/// Noisy forward simulation of the ground truth.
pub fn simulate(cfg: &ExperimentConfig, scheme: &Scheme, seed: u64) -> Result<Measurements, CliError> {
    let truth = cfg
        .build_truth(scheme.family())?
        .ok_or_else(|| CliError::Config("truth: simulation needs ground-truth terms".into()))?;
    let mut meas = scheme
        .simulate(&truth)
        .map_err(|e| CliError::Config(format!("truth: cannot simulate measurements: {e}")))?;
    if let NoiseSpec::Gaussian { sigma } = cfg.noise {
        add_noise(&mut meas, scheme.measurement_ids(), sigma, seed);
    }
    Ok(meas)
}

/// Rows in scheme order, failing on a missing id.
pub fn measurement_rows(scheme: &Scheme, meas: &Measurements) -> Result<Vec<(String, Complex64)>, CliError> {
    scheme
        .measurement_ids()
        .iter()
        .map(|id| {
            meas.get(id)
                .map(|v| (id.clone(), v))
                .ok_or_else(|| CliError::Config(format!("measurements: missing id `{id}`")))
        })
        .collect()
}

fn load_measurements(cfg: &ExperimentConfig, scheme: &Scheme, config_dir: Option<&Path>, seed: u64) -> Result<Measurements, CliError> {
    match cfg.measurement_path(config_dir) {
        Some(path) => {
            let file = File::open(&path).map_err(|e| CliError::Config(format!("measurements.csv: {}: {e}", path.display())))?;
            io::read_measurements(file)
        }
        None => simulate(cfg, scheme, seed),
    }
}

/// `foo.report.json` / `foo.json` -> `foo`
fn companion_base(report: &Path) -> PathBuf {
    let name = report.file_name().and_then(|s| s.to_str()).unwrap_or("report");
    let stem = name.strip_suffix(".json").unwrap_or(name);
    let stem = stem.strip_suffix(".report").unwrap_or(stem);
    report.with_file_name(stem)
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

/// Report path: `--out`, then `output.report` (relative to the config),
/// then `<name>.report.json` in the working directory.
pub fn report_path(cfg: &ExperimentConfig, config_dir: Option<&Path>, opts: &RunOptions) -> PathBuf {
    if let Some(p) = &opts.out {
        return p.clone();
    }
    if let Some(r) = &cfg.output.report {
        let p = PathBuf::from(r);
        return match config_dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p,
        };
    }
    PathBuf::from(format!("{}.report.json", cfg.name))
}

fn write_file(path: &Path, write: impl FnOnce(BufWriter<File>) -> Result<(), CliError>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    write(BufWriter::new(file))
}

/// Runs one experiment and writes its report. A recovery failure still
/// writes the report; it shows up in the outcome's status.
pub fn run(cfg: &ExperimentConfig, config_dir: Option<&Path>, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    let seed = opts.seed.unwrap_or(cfg.seed);
    let family = cfg.build_family()?;
    let scheme = cfg.build_scheme(&family)?;
    let truth = cfg.build_truth(&family)?;
    let meas = load_measurements(cfg, &scheme, config_dir, seed)?;
    let rows = measurement_rows(&scheme, &meas)?;

    let path = report_path(cfg, config_dir, opts);
    let base = companion_base(&path);
    let meas_path = with_suffix(&base, ".measurements.csv");
    write_file(&meas_path, |w| io::write_measurements(w, &rows))?;

    let kernel_path = match cfg.kernel_params().filter(|_| cfg.output.kernel_curves) {
        Some(params) => {
            let kernels = legendre_kernels(params, cfg.m, 2 * cfg.m)
                .map_err(|e| CliError::Config(format!("scheme: {e}")))?;
            let p = with_suffix(&base, ".kernels.csv");
            let samples = cfg.output.kernel_samples.unwrap_or(DEFAULT_KERNEL_SAMPLES);
            write_file(&p, |w| io::write_kernel_curves(w, &kernels, samples))?;
            Some(p)
        }
        None => None,
    };

    let (status, error, recovery) = match recover_with(&scheme, &meas, &cfg.recovery.options()) {
        Ok(r) => (Status::Ok, None, Some(r)),
        Err(e) => (Status::RecoveryFailed, Some(CliError::Recovery(e.to_string()).to_string()), None),
    };
    let errors = match (&truth, &recovery) {
        (Some(t), Some(r)) => Some(ErrorSummary::compare(t, r)),
        _ => None,
    };
    let report = Report {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        seed,
        status,
        error,
        scheme: SchemeSummary::of(&scheme),
        recovery,
        errors,
        measurements_csv: Some(meas_path.display().to_string()),
        kernel_curves_csv: kernel_path.map(|p| p.display().to_string()),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let json = report.to_json();
    write_file(&path, |mut w| {
        use std::io::Write;
        w.write_all(json.as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .and_then(|_| w.flush())
            .map_err(|e| io_err(&path, e))
    })?;
    Ok(RunOutcome { report, report_path: path })
}

/// Loads a config file and runs it; relative paths resolve against the
/// config's directory.
pub fn run_file(config: &Path, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let cfg = ExperimentConfig::load(config)?;
    run(&cfg, config.parent(), opts)
}

/// One line per run for the terminal.
pub fn summary_line(outcome: &RunOutcome) -> String {
    let r = &outcome.report;
    let name = &r.config.name;
    match (&r.recovery, &r.errors) {
        (Some(rec), Some(err)) => format!(
            "{name}: ok, M={}, residual {:.2e}, max |dlambda| {}, max |dc| {} -> {}",
            rec.eigenvalues.len(),
            rec.residual_norm,
            fmt_opt(err.max_lambda_unrounded_error),
            fmt_opt(err.max_coeff_error),
            outcome.report_path.display()
        ),
        (Some(rec), None) => format!(
            "{name}: ok, M={}, residual {:.2e} -> {}",
            rec.eigenvalues.len(),
            rec.residual_norm,
            outcome.report_path.display()
        ),
        (None, _) => format!(
            "{name}: {} -> {}",
            r.error.as_deref().unwrap_or("recovery failed"),
            outcome.report_path.display()
        ),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "unmatched".to_string(), |x| format!("{x:.2e}"))
}

/// Result of one config in a batch.
#[derive(Debug)]
pub struct BatchEntry {
    pub config: PathBuf,
    pub result: Result<RunOutcome, CliError>,
}

impl BatchEntry {
    pub fn exit_code(&self) -> i32 {
        match &self.result {
            Ok(o) => o.exit_code(),
            Err(e) => e.exit_code(),
        }
    }
}

/// Runs every `*.toml` in `dir` concurrently, reports going to
/// `<out_dir>/<stem>.report.json`. Entries come back sorted by path.
pub fn batch(dir: &Path, out_dir: &Path, seed: Option<u64>) -> Result<Vec<BatchEntry>, CliError> {
    let mut configs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "toml"))
        .collect();
    configs.sort();
    if configs.is_empty() {
        return Err(CliError::Config(format!("{}: no *.toml configs", dir.display())));
    }
    let entries = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| {
                s.spawn(move || {
                    let stem = c.file_stem().and_then(|x| x.to_str()).unwrap_or("config");
                    let opts = RunOptions {
                        out: Some(out_dir.join(format!("{stem}.report.json"))),
                        seed,
                    };
                    run_file(c, &opts)
                })
            })
            .collect();
        configs
            .iter()
            .zip(handles)
            .map(|(c, h)| BatchEntry {
                config: c.clone(),
                result: h.join().unwrap_or_else(|_| Err(CliError::Recovery("worker panicked".into()))),
            })
            .collect()
    });
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn companion_names() {
        assert_eq!(companion_base(Path::new("out/a.report.json")), PathBuf::from("out/a"));
        assert_eq!(companion_base(Path::new("b.json")), PathBuf::from("b"));
        assert_eq!(companion_base(Path::new("c")), PathBuf::from("c"));
    }

    #[test]
    fn noise_has_requested_power() {
        let ids: Vec<String> = (0..4000).map(|i| format!("m{i}")).collect();
        let mut meas: Measurements = ids.iter().map(|id| (id.clone(), Complex64::new(0.0, 0.0))).collect();
        add_noise(&mut meas, &ids, 0.5, 3);
        let power = meas.iter().map(|(_, v)| v.norm_sqr()).sum::<f64>() / ids.len() as f64;
        assert!((power - 0.25).abs() < 0.02, "{power}");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config(String::new()).exit_code(), 2);
        assert_eq!(CliError::Recovery(String::new()).exit_code(), 3);
        assert_eq!(CliError::Io(String::new()).exit_code(), 1);
    }
}
