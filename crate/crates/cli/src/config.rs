//! Command-line flags, the flat TOML config file, and their merge.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::presets;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed config {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("invalid value for {key}: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error("unknown preset {0:?} (known: {1})")]
    UnknownPreset(String, String),
    #[error("give either g or preset, not both")]
    Conflict,
    #[error("experiment {0} needs couplings: pass --g or --preset")]
    MissingCouplings(Experiment),
}

#[derive(Debug, Parser)]
#[command(name = "heun", version, about = "Spectral experiments for elliptic Calogero-Moser operators")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Eigenvalues of H(g) in the comparison basis.
    Spectrum(SharedArgs),
    /// Singular values of the integral operator I(g).
    Svd(SharedArgs),
    /// Spectra across the 24-element orbit of g.
    Orbit(SharedArgs),
    /// All closed-form spectra.
    SpecialCases(SharedArgs),
    /// Checks for couplings with s_g = 0.
    RankOne(SharedArgs),
    /// Ordering of singular values and signs of the couplings mu_m.
    TauProbe(SharedArgs),
}

impl Verb {
    pub fn split(self) -> (Experiment, SharedArgs) {
        match self {
            Verb::Spectrum(a) => (Experiment::Spectrum, a),
            Verb::Svd(a) => (Experiment::Svd, a),
            Verb::Orbit(a) => (Experiment::Orbit, a),
            Verb::SpecialCases(a) => (Experiment::SpecialCases, a),
            Verb::RankOne(a) => (Experiment::RankOne, a),
            Verb::TauProbe(a) => (Experiment::TauProbe, a),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct SharedArgs {
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Couplings as g0,g1,g2,g3.
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<String>,
    #[arg(long)]
    pub preset: Option<String>,
    /// Galerkin basis size M.
    #[arg(long)]
    pub basis_size: Option<usize>,
    /// Quadrature size N.
    #[arg(long)]
    pub quad_size: Option<usize>,
    /// Truncation precision of the elliptic series.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Relative tolerance for PASS/FAIL decisions.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of random coupling samples, where the experiment draws them.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum,
    Svd,
    Orbit,
    SpecialCases,
    RankOne,
    TauProbe,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Spectrum => "spectrum",
            Self::Svd => "svd",
            Self::Orbit => "orbit",
            Self::SpecialCases => "special-cases",
            Self::RankOne => "rank-one",
            Self::TauProbe => "tau-probe",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum GSpec {
    Text(String),
    List(Vec<f64>),
}

/// Keys accepted in the config file; all optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    r: Option<f64>,
    alpha: Option<f64>,
    g: Option<GSpec>,
    preset: Option<String>,
    basis_size: Option<usize>,
    quad_size: Option<usize>,
    eps: Option<f64>,
    tol: Option<f64>,
    seed: Option<u64>,
    samples: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

/// A validated experiment description, echoed verbatim in reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub r: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub basis_size: usize,
    pub quad_size: usize,
    pub tolerance: f64,
    pub g: Option<[f64; 4]>,
    pub preset: Option<String>,
    pub seed: u64,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl ExperimentConfig {
    /// Defaults for `experiment` with no couplings.
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            r: 1.0,
            alpha: 1.0,
            epsilon: 1e-15,
            basis_size: 48,
            quad_size: 48,
            tolerance: 1e-8,
            g: None,
            preset: None,
            seed: 0,
            samples: None,
            out: None,
            format: Format::Json,
        }
    }

    pub fn with_g(mut self, g: [f64; 4]) -> Self {
        self.g = Some(g);
        self
    }

    pub fn couplings(&self) -> Result<[f64; 4], ConfigError> {
        self.g.ok_or(ConfigError::MissingCouplings(self.experiment))
    }
}

pub fn parse_g(text: &str) -> Result<[f64; 4], ConfigError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let invalid = |reason: String| ConfigError::Invalid { key: "g", reason };
    if parts.len() != 4 {
        return Err(invalid(format!("expected 4 comma-separated numbers, got {:?}", text)));
    }
    let mut g = [0.0; 4];
    for (slot, p) in g.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| invalid(format!("{p:?} is not a number")))?;
    }
    Ok(g)
}

fn g_from_spec(spec: GSpec) -> Result<[f64; 4], ConfigError> {
    match spec {
        GSpec::Text(t) => parse_g(&t),
        GSpec::List(v) => v.try_into().map_err(|v: Vec<f64>| ConfigError::Invalid {
            key: "g",
            reason: format!("expected 4 entries, got {}", v.len()),
        }),
    }
}

fn read_file(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_owned(),
        source,
    })?;
    toml::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.to_owned(),
        source,
    })
}

/// Couplings from one layer; `g` and `preset` are exclusive within a layer.
type Chosen = Option<([f64; 4], Option<String>)>;

fn layer_couplings(g: Option<[f64; 4]>, preset: Option<String>) -> Result<Chosen, ConfigError> {
    match (g, preset) {
        (Some(_), Some(_)) => Err(ConfigError::Conflict),
        (Some(g), None) => Ok(Some((g, None))),
        (None, Some(name)) => {
            let p = presets::find(&name).ok_or_else(|| {
                let known: Vec<&str> = presets::PRESETS.iter().map(|p| p.name).collect();
                ConfigError::UnknownPreset(name.clone(), known.join(", "))
            })?;
            Ok(Some((p.g, Some(name))))
        }
        (None, None) => Ok(None),
    }
}

/// Merge flags over the config file over defaults, then validate.
pub fn resolve(experiment: Experiment, args: SharedArgs) -> Result<ExperimentConfig, ConfigError> {
    let file = match &args.config {
        Some(path) => read_file(path)?,
        None => FileConfig::default(),
    };
    let mut cfg = ExperimentConfig::new(experiment);
    cfg.r = args.r.or(file.r).unwrap_or(cfg.r);
    cfg.alpha = args.alpha.or(file.alpha).unwrap_or(cfg.alpha);
    cfg.epsilon = args.eps.or(file.eps).unwrap_or(cfg.epsilon);
    cfg.tolerance = args.tol.or(file.tol).unwrap_or(cfg.tolerance);
    cfg.basis_size = args.basis_size.or(file.basis_size).unwrap_or(cfg.basis_size);
    cfg.quad_size = args.quad_size.or(file.quad_size).unwrap_or(cfg.quad_size);
    cfg.seed = args.seed.or(file.seed).unwrap_or(cfg.seed);
    cfg.samples = args.samples.or(file.samples);
    cfg.out = args.out.or(file.out);
    cfg.format = args.format.or(file.format).unwrap_or_default();

    let flag_g = args.g.as_deref().map(parse_g).transpose()?;
    let file_g = file.g.map(g_from_spec).transpose()?;
    let chosen = match layer_couplings(flag_g, args.preset)? {
        Some(c) => Some(c),
        None => layer_couplings(file_g, file.preset)?,
    };
    if let Some((g, preset)) = chosen {
        cfg.g = Some(g);
        cfg.preset = preset;
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn positive(key: &'static str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::Invalid {
            key,
            reason: format!("must be a positive number, got {v}"),
        })
    }
}

pub fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    positive("r", cfg.r)?;
    positive("alpha", cfg.alpha)?;
    positive("eps", cfg.epsilon)?;
    positive("tol", cfg.tolerance)?;
    if cfg.r * cfg.alpha < 0.05 {
        return Err(ConfigError::Invalid {
            key: "alpha",
            reason: format!("r*alpha = {} is below 0.05; the series converge too slowly", cfg.r * cfg.alpha),
        });
    }
    for (key, v) in [("basis-size", cfg.basis_size), ("quad-size", cfg.quad_size)] {
        if !(2..=2000).contains(&v) {
            return Err(ConfigError::Invalid {
                key,
                reason: format!("must lie in 2..=2000, got {v}"),
            });
        }
    }
    if let Some(g) = cfg.g {
        if g.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::Invalid {
                key: "g",
                reason: "entries must be finite".into(),
            });
        }
    }
    if cfg.samples == Some(0) {
        return Err(ConfigError::Invalid {
            key: "samples",
            reason: "must be at least 1".into(),
        });
    }
    let needs_g = matches!(cfg.experiment, Experiment::Spectrum | Experiment::Svd | Experiment::Orbit);
    if needs_g && cfg.g.is_none() {
        return Err(ConfigError::MissingCouplings(cfg.experiment));
    }
    Ok(())
}
