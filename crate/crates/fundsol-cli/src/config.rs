//! Flat `key = value` run configuration.

use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Environment variable naming the configuration file.
pub const CONFIG_ENV: &str = "FUNDSOL_CONFIG";
/// File looked up in the working directory when neither a flag nor the variable is set.
pub const DEFAULT_CONFIG_FILE: &str = "fundsol.conf";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Real part of the inversion line.
    pub abscissa: f64,
    /// Truncation height of line integrals.
    pub half_height: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Cache of `B` samples, loaded before and saved after a run when set.
    pub cache_path: Option<PathBuf>,
    pub threads: usize,
    /// Base directory for relative output paths.
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            abscissa: fundsol::lambda::ABSCISSA,
            half_height: fundsol::lambda::HEIGHT,
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            cache_path: None,
            threads: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            output_dir: PathBuf::from("."),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    v.parse().map_err(|_| CliError::Config(format!("`{key}` expects a number, got `{v}`")))
}

impl RunConfig {
    /// Parse a configuration file body; keys not given keep their defaults.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let mut seen = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`, got `{raw}`", n + 1)))?;
            if seen.contains(&key) {
                return Err(CliError::Config(format!("line {}: `{key}` given twice", n + 1)));
            }
            seen.push(key);
            match key {
                "abscissa" => cfg.abscissa = parse_f64(key, value)?,
                "half_height" => cfg.half_height = parse_f64(key, value)?,
                "rel_tol" => cfg.rel_tol = parse_f64(key, value)?,
                "abs_tol" => cfg.abs_tol = parse_f64(key, value)?,
                "cache_path" => cfg.cache_path = (!value.is_empty()).then(|| PathBuf::from(value)),
                "threads" => {
                    cfg.threads = value.parse().map_err(|_| CliError::Config(format!("`threads` expects a count, got `{value}`")))?
                }
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                _ => return Err(CliError::Config(format!("line {}: unknown key `{key}`", n + 1))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!("`{name}` must be positive and finite, got {v}")))
            }
        };
        positive("abscissa", self.abscissa)?;
        positive("half_height", self.half_height)?;
        positive("rel_tol", self.rel_tol)?;
        positive("abs_tol", self.abs_tol)?;
        if self.threads == 0 {
            return Err(CliError::Config("`threads` must be at least 1".into()));
        }
        Ok(())
    }

    /// Load from `explicit`, else the file named by [`CONFIG_ENV`], else [`DEFAULT_CONFIG_FILE`] if present.
    pub fn load(explicit: Option<&Path>) -> Result<Self, CliError> {
        let named = explicit.map(Path::to_path_buf).or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        let path = match named {
            Some(p) => p,
            None => {
                let p = PathBuf::from(DEFAULT_CONFIG_FILE);
                if !p.exists() {
                    return Ok(RunConfig::default());
                }
                p
            }
        };
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The file body that [`RunConfig::parse`] reads back to `self`.
    pub fn to_text(&self) -> String {
        let cache = self.cache_path.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        format!(
            "abscissa = {:?}\nhalf_height = {:?}\nrel_tol = {:?}\nabs_tol = {:?}\ncache_path = {cache}\nthreads = {}\noutput_dir = {}\n",
            self.abscissa,
            self.half_height,
            self.rel_tol,
            self.abs_tol,
            self.threads,
            self.output_dir.display()
        )
    }

    /// `path` if absolute, otherwise relative to the output directory.
    pub fn output_path(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.output_dir.join(path)
        }
    }
}
