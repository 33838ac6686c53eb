//! Sweep configuration files: `key = value` lines, `#` comments.

use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    L1,
    Alg1,
    Alg2L1,
    Alg2L2,
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "l1" => Ok(Self::L1),
            "alg1" => Ok(Self::Alg1),
            "alg2-l1" => Ok(Self::Alg2L1),
            "alg2-l2" => Ok(Self::Alg2L2),
            _ => Err(format!("unknown algorithm `{s}` (expected l1, alg1, alg2-l1 or alg2-l2)")),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::L1 => "l1",
            Self::Alg1 => "alg1",
            Self::Alg2L1 => "alg2-l1",
            Self::Alg2L2 => "alg2-l2",
        })
    }
}

/// How graph columns are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// `d` distinct rows per column.
    Distinct,
    /// `d` independent draws, duplicates merged into heavier edges.
    Repetition,
}

impl FromStr for Sampling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "distinct" => Ok(Self::Distinct),
            "repetition" => Ok(Self::Repetition),
            _ => Err(format!("unknown sampling `{s}` (expected distinct or repetition)")),
        }
    }
}

impl fmt::Display for Sampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Distinct => "distinct",
            Self::Repetition => "repetition",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    /// Zero means the unperturbed adjacency matrix.
    pub epsilon1: f64,
    pub sparsity_grid: Vec<usize>,
    pub trials_per_point: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub noise_snr_grid: Option<Vec<f64>>,
    pub sampling: Sampling,
    /// Wall-clock timing makes output non-reproducible, so it is opt-in.
    pub record_timing: bool,
    /// Worker threads; `MINEXP_WORKERS` overrides it.
    pub workers: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n: 200,
            m: 100,
            d: 3,
            epsilon1: 0.1,
            sparsity_grid: (0..=40).step_by(5).collect(),
            trials_per_point: 100,
            seed: 1,
            algorithm: Algorithm::L1,
            noise_snr_grid: None,
            sampling: Sampling::Distinct,
            record_timing: false,
            workers: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("config line {line}: {msg}")]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

fn value<T: FromStr>(v: &str, line: usize, key: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    v.parse().map_err(|e| ConfigError { line, msg: format!("{key}: {e}") })
}

/// `a, b, c` or an inclusive range `start:step:end`.
fn usize_list(v: &str, line: usize, key: &str) -> Result<Vec<usize>, ConfigError> {
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let (a, s, b): (usize, usize, usize) =
            (value(parts[0], line, key)?, value(parts[1], line, key)?, value(parts[2], line, key)?);
        if s == 0 {
            return Err(ConfigError { line, msg: format!("{key}: zero step") });
        }
        return Ok((a..=b).step_by(s).collect());
    }
    v.split(',').map(|t| value(t.trim(), line, key)).collect()
}

/// SNR values in dB; `inf` means noiseless.
fn snr_list(v: &str, line: usize) -> Result<Vec<f64>, ConfigError> {
    v.split(',')
        .map(|t| match t.trim() {
            "inf" => Ok(f64::INFINITY),
            t => value(t, line, "noise_snr_grid"),
        })
        .collect()
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, v) = body
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| ConfigError { line, msg: format!("expected `key = value`, found `{body}`") })?;
            match key {
                "n" => cfg.n = value(v, line, key)?,
                "m" => cfg.m = value(v, line, key)?,
                "d" => cfg.d = value(v, line, key)?,
                "epsilon1" => cfg.epsilon1 = value(v, line, key)?,
                "sparsity_grid" => cfg.sparsity_grid = usize_list(v, line, key)?,
                "trials_per_point" => cfg.trials_per_point = value(v, line, key)?,
                "seed" => cfg.seed = value(v, line, key)?,
                "algorithm" => cfg.algorithm = value(v, line, key)?,
                "noise_snr_grid" => cfg.noise_snr_grid = Some(snr_list(v, line)?),
                "sampling" => cfg.sampling = value(v, line, key)?,
                "record_timing" => cfg.record_timing = value(v, line, key)?,
                "workers" => cfg.workers = Some(value(v, line, key)?),
                _ => return Err(ConfigError { line, msg: format!("unknown key `{key}`") }),
            }
        }
        cfg.validate().map_err(|msg| ConfigError { line: 0, msg })?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n == 0 || self.m == 0 || self.d == 0 || self.d > self.m {
            return Err(format!("need n, m ≥ 1 and 1 ≤ d ≤ m (n = {}, m = {}, d = {})", self.n, self.m, self.d));
        }
        if !(0.0..1.0).contains(&self.epsilon1) {
            return Err(format!("epsilon1 = {} outside [0, 1)", self.epsilon1));
        }
        if let Some(&k) = self.sparsity_grid.iter().find(|&&k| k > self.n) {
            return Err(format!("sparsity {k} exceeds n = {}", self.n));
        }
        if self.trials_per_point == 0 {
            return Err("trials_per_point must be at least 1".into());
        }
        if self.workers == Some(0) {
            return Err("workers must be at least 1".into());
        }
        Ok(())
    }

    /// The configuration as `# key = value` lines, re-parseable after
    /// stripping the `# ` prefix.
    pub fn comment_block(&self) -> String {
        let mut lines = vec![
            format!("n = {}", self.n),
            format!("m = {}", self.m),
            format!("d = {}", self.d),
            format!("epsilon1 = {}", self.epsilon1),
            format!("sparsity_grid = {}", join(&self.sparsity_grid)),
            format!("trials_per_point = {}", self.trials_per_point),
            format!("seed = {}", self.seed),
            format!("algorithm = {}", self.algorithm),
        ];
        if let Some(grid) = &self.noise_snr_grid {
            lines.push(format!("noise_snr_grid = {}", join(grid)));
        }
        lines.push(format!("sampling = {}", self.sampling));
        lines.push(format!("record_timing = {}", self.record_timing));
        lines.into_iter().map(|l| format!("# {l}\n")).collect()
    }
}
