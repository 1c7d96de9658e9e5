//! Run configuration: defaults, overridden by a flat key=value config file,
//! overridden in turn by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};

use blipsim::{ParamsError, SystemParams};

#[derive(Debug)]
pub enum ConfigError {
    Io(PathBuf, std::io::Error),
    Line {
        path: PathBuf,
        line: usize,
        message: String,
    },
    Params(ParamsError),
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(path, e) => write!(f, "cannot read {}: {e}", path.display()),
            ConfigError::Line {
                path,
                line,
                message,
            } => write!(f, "{}:{line}: {message}", path.display()),
            ConfigError::Params(e) => write!(f, "invalid physical parameters: {e}"),
            ConfigError::Invalid(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Optional values collected from flags; `None` falls through to the config
/// file and then to the defaults.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct CommonArgs {
    /// Spontaneous decay rate Γ.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Transition angular frequency ω₀.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega0: Option<f64>,
    /// Ground-state amplitude α (real); default √(1 − β²).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Initial excited population |β|².
    #[arg(long, global = true)]
    pub beta_sq: Option<f64>,
    /// Evolution span (simulation time units).
    #[arg(long, global = true)]
    pub t_end: Option<f64>,
    /// Radial cell width of grid runs.
    #[arg(long, global = true)]
    pub dr: Option<f64>,
    /// Time step of grid runs; default Δr/c (CFL = 1).
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Random seed for trajectory ensembles.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for emitted files.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Flat key=value configuration file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Norm-drift budget of grid runs.
    #[arg(long, global = true)]
    pub norm_budget: Option<f64>,
}

/// Fully resolved run configuration. Everything is in natural units with
/// c = 1: times in 1/Γ₀-free simulation units, lengths in light-travel
/// units.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: SystemParams,
    pub gamma: f64,
    pub omega0: f64,
    pub alpha: f64,
    pub beta_sq: f64,
    pub t_end: f64,
    pub dr: f64,
    pub dt: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub norm_budget: f64,
}

impl Resolved {
    /// JSON fragment for the metadata sidecars: enough to re-run the
    /// command (the output directory itself is deliberately excluded).
    pub fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "gamma": self.gamma,
            "omega0": self.omega0,
            "alpha": self.alpha,
            "beta_sq": self.beta_sq,
            "c": 1.0,
            "t_end": self.t_end,
            "dr": self.dr,
            "dt": self.dt,
            "seed": self.seed,
            "norm_budget": self.norm_budget,
        })
    }
}

#[derive(Debug, Clone, Default)]
struct FileConfig {
    gamma: Option<f64>,
    omega0: Option<f64>,
    alpha: Option<f64>,
    beta_sq: Option<f64>,
    t_end: Option<f64>,
    dr: Option<f64>,
    dt: Option<f64>,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
    norm_budget: Option<f64>,
}

fn parse_file(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
    let mut cfg = FileConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Line {
            path: path.to_path_buf(),
            line: line_no,
            message: format!("expected key=value, found {line:?}"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad_value = |msg: String| ConfigError::Line {
            path: path.to_path_buf(),
            line: line_no,
            message: msg,
        };
        let parse_f64 = |value: &str| {
            value
                .parse::<f64>()
                .map_err(|e| bad_value(format!("field {key}: {e}")))
        };
        match key {
            "gamma" => cfg.gamma = Some(parse_f64(value)?),
            "omega0" => cfg.omega0 = Some(parse_f64(value)?),
            "alpha" => cfg.alpha = Some(parse_f64(value)?),
            "beta_sq" => cfg.beta_sq = Some(parse_f64(value)?),
            "t_end" => cfg.t_end = Some(parse_f64(value)?),
            "dr" => cfg.dr = Some(parse_f64(value)?),
            "dt" => cfg.dt = Some(parse_f64(value)?),
            "norm_budget" => cfg.norm_budget = Some(parse_f64(value)?),
            "seed" => {
                cfg.seed = Some(
                    value
                        .parse::<u64>()
                        .map_err(|e| bad_value(format!("field seed: {e}")))?,
                )
            }
            "out_dir" => cfg.out_dir = Some(PathBuf::from(value)),
            other => {
                return Err(ConfigError::Line {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: format!("unknown field {other:?}"),
                })
            }
        }
    }
    Ok(cfg)
}

pub fn resolve(args: &CommonArgs) -> Result<Resolved, ConfigError> {
    let file = match &args.config {
        Some(path) => parse_file(path)?,
        None => FileConfig::default(),
    };

    let gamma = args.gamma.or(file.gamma).unwrap_or(1.0);
    let omega0 = args.omega0.or(file.omega0).unwrap_or(10.0);
    let beta_sq = args.beta_sq.or(file.beta_sq).unwrap_or(1.0);
    if !(0.0..=1.0).contains(&beta_sq) {
        return Err(ConfigError::Invalid(format!(
            "beta_sq must lie in [0, 1], got {beta_sq}"
        )));
    }
    let alpha = args
        .alpha
        .or(file.alpha)
        .unwrap_or_else(|| (1.0 - beta_sq).max(0.0).sqrt());
    let t_end = args.t_end.or(file.t_end).unwrap_or(5.0);
    let dr = args.dr.or(file.dr).unwrap_or(2e-4);
    let dt = args.dt.or(file.dt).unwrap_or(dr);
    let seed = args.seed.or(file.seed).unwrap_or(1);
    let out_dir = args
        .out_dir
        .clone()
        .or(file.out_dir)
        .unwrap_or_else(|| PathBuf::from("."));
    let norm_budget = args.norm_budget.or(file.norm_budget).unwrap_or(1e-4);

    let params = SystemParams::superposition(omega0, gamma, alpha, beta_sq.sqrt())
        .map_err(ConfigError::Params)?;

    Ok(Resolved {
        params,
        gamma,
        omega0,
        alpha,
        beta_sq,
        t_end,
        dr,
        dt,
        seed,
        out_dir,
        norm_budget,
    })
}
