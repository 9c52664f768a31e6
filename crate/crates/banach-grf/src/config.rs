//! Flat `key = value` run configuration with `#` comments. Unknown keys
//! are rejected; command-line flags override file values.

use crate::error::{GrfError, Result};
use std::path::Path;

/// Configuration shared by the command-line subcommands. Every field has
/// a conservative default; a config file and then explicit flags override
/// them in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kernel: String,
    pub dim: usize,
    pub k_max: u32,
    /// Hoelder renormalisation exponent for the basis.
    pub alpha: f64,
    /// Regularity-sweep exponents.
    pub gammas: Vec<f64>,
    pub seed: u64,
    pub n_samples: u64,
    pub grid_resolution: u32,
    pub pivot_tol: f64,
    pub norm_mode: String,
    /// Energy cutoff epsilon; 0 keeps every decomposition term.
    pub energy_cutoff: f64,
    pub out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kernel: "exp-alpha:0.5".into(),
            dim: 1,
            k_max: 4,
            alpha: 0.5,
            gammas: vec![0.4, 0.6],
            seed: 0,
            n_samples: 1,
            grid_resolution: 8,
            pivot_tol: crate::decomp::DEFAULT_PIVOT_TOL_REL,
            norm_mode: "coefficient-euclidean".into(),
            energy_cutoff: 0.0,
            out: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| {
        GrfError::InvalidArgument(format!("config key `{key}`: cannot parse `{value}`"))
    })
}

impl RunConfig {
    /// Apply a single `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "kernel" => self.kernel = v.to_string(),
            "dim" => self.dim = parse_num(key, v)?,
            "k_max" => self.k_max = parse_num(key, v)?,
            "alpha" => self.alpha = parse_num(key, v)?,
            "gammas" => {
                self.gammas = v
                    .split(',')
                    .map(|t| parse_num::<f64>(key, t))
                    .collect::<Result<_>>()?
            }
            "seed" => self.seed = parse_num(key, v)?,
            "n_samples" => self.n_samples = parse_num(key, v)?,
            "grid_resolution" => self.grid_resolution = parse_num(key, v)?,
            "pivot_tol" => self.pivot_tol = parse_num(key, v)?,
            "norm_mode" => self.norm_mode = v.to_string(),
            "energy_cutoff" => self.energy_cutoff = parse_num(key, v)?,
            "out" => self.out = Some(v.to_string()),
            other => {
                return Err(GrfError::InvalidArgument(format!(
                    "unknown config key `{other}`"
                )))
            }
        }
        Ok(())
    }

    /// Parse a flat config file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let text = std::fs::read_to_string(path)?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                GrfError::InvalidArgument(format!(
                    "config line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                ))
            })?;
            cfg.set(key.trim(), value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Check numeric ranges.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(GrfError::InvalidArgument("dim must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(GrfError::InvalidArgument(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        for &g in &self.gammas {
            if !(g > 0.0 && g < 1.0) {
                return Err(GrfError::InvalidArgument(format!(
                    "gamma values must lie in (0, 1), got {g}"
                )));
            }
        }
        if self.pivot_tol <= 0.0 {
            return Err(GrfError::InvalidArgument(
                "pivot_tol must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.energy_cutoff) {
            return Err(GrfError::InvalidArgument(
                "energy_cutoff must lie in [0, 1)".into(),
            ));
        }
        crate::decomp::NormMode::parse(&self.norm_mode)?;
        Ok(())
    }
}

/// Format a float with 17 significant digits, enough for a lossless
/// decimal round-trip of any 64-bit float.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
