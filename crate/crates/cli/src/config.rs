//! Sweep configuration: a flat key-value file mirroring the config fields,
//! with CLI flags taking precedence over file values.
//!
//! File format: one `key = value` per line, `#` comments, blank lines
//! ignored. Grids are comma-separated. Example:
//!
//! ```text
//! alpha_grid = 1.2, 1.5, 2.0
//! z_grid = 1.0, 1.2
//! dim_a = 2
//! dim_b = 3
//! trials_per_cell = 50
//! channel_kind = partial_trace
//! seed = 42
//! regularization_eps = 0.05
//! output_path = sweep.csv
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::{CliError, CliResult};

/// Which channel family a sweep trial draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    PartialTrace,
    RandomCptp,
    Unitary,
}

impl ChannelKind {
    pub fn token(&self) -> &'static str {
        match self {
            ChannelKind::PartialTrace => "partial_trace",
            ChannelKind::RandomCptp => "random_cptp",
            ChannelKind::Unitary => "unitary",
        }
    }
}

impl FromStr for ChannelKind {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "partial_trace" => Ok(ChannelKind::PartialTrace),
            "random_cptp" => Ok(ChannelKind::RandomCptp),
            "unitary" => Ok(ChannelKind::Unitary),
            other => Err(CliError::Parse(format!(
                "unknown channel kind {other:?}; expected partial_trace | random_cptp | unitary"
            ))),
        }
    }
}

/// Fully-resolved sweep configuration.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub alpha_grid: Vec<f64>,
    pub z_grid: Vec<f64>,
    pub dims: (usize, usize),
    pub trials_per_cell: u64,
    pub channel_kind: ChannelKind,
    pub seed: u64,
    pub regularization_eps: f64,
    pub output_path: PathBuf,
    pub summary_path: PathBuf,
    pub workers: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.alpha_grid.is_empty() || self.z_grid.is_empty() {
            return Err(CliError::InvalidParams("alpha and z grids must be nonempty".into()));
        }
        if self.trials_per_cell == 0 {
            return Err(CliError::InvalidParams("trials_per_cell must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.regularization_eps) {
            return Err(CliError::InvalidParams(format!(
                "regularization_eps must lie in [0, 1), got {}",
                self.regularization_eps
            )));
        }
        if self.dims.0 == 0 || self.dims.1 == 0 {
            return Err(CliError::InvalidParams("dimensions must be positive".into()));
        }
        if self.workers == 0 {
            return Err(CliError::InvalidParams("workers must be at least 1".into()));
        }
        for &alpha in &self.alpha_grid {
            if !(alpha > 0.0) || alpha == 1.0 {
                return Err(CliError::InvalidParams(format!(
                    "alpha grid values must be positive and different from 1, got {alpha}"
                )));
            }
        }
        for &z in &self.z_grid {
            if !(z > 0.0) {
                return Err(CliError::InvalidParams(format!(
                    "z grid values must be positive, got {z}"
                )));
            }
        }
        Ok(())
    }
}

/// Unresolved config fields; file values fill whatever the CLI left unset.
#[derive(Debug, Clone, Default)]
pub struct PartialSweepConfig {
    pub alpha_grid: Option<Vec<f64>>,
    pub z_grid: Option<Vec<f64>>,
    pub dim_a: Option<usize>,
    pub dim_b: Option<usize>,
    pub trials_per_cell: Option<u64>,
    pub channel_kind: Option<ChannelKind>,
    pub seed: Option<u64>,
    pub regularization_eps: Option<f64>,
    pub output_path: Option<PathBuf>,
    pub summary_path: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl PartialSweepConfig {
    /// Fills unset fields of `self` from `fallback`.
    pub fn or(self, fallback: PartialSweepConfig) -> Self {
        Self {
            alpha_grid: self.alpha_grid.or(fallback.alpha_grid),
            z_grid: self.z_grid.or(fallback.z_grid),
            dim_a: self.dim_a.or(fallback.dim_a),
            dim_b: self.dim_b.or(fallback.dim_b),
            trials_per_cell: self.trials_per_cell.or(fallback.trials_per_cell),
            channel_kind: self.channel_kind.or(fallback.channel_kind),
            seed: self.seed.or(fallback.seed),
            regularization_eps: self.regularization_eps.or(fallback.regularization_eps),
            output_path: self.output_path.or(fallback.output_path),
            summary_path: self.summary_path.or(fallback.summary_path),
            workers: self.workers.or(fallback.workers),
        }
    }

    pub fn resolve(self, default_seed: u64) -> CliResult<SweepConfig> {
        let output_path = self
            .output_path
            .ok_or_else(|| CliError::InvalidParams("output_path is required".into()))?;
        let summary_path = self.summary_path.unwrap_or_else(|| {
            let mut os = output_path.clone().into_os_string();
            os.push(".summary.json");
            PathBuf::from(os)
        });
        let config = SweepConfig {
            alpha_grid: self
                .alpha_grid
                .ok_or_else(|| CliError::InvalidParams("alpha_grid is required".into()))?,
            z_grid: self
                .z_grid
                .ok_or_else(|| CliError::InvalidParams("z_grid is required".into()))?,
            dims: (self.dim_a.unwrap_or(2), self.dim_b.unwrap_or(2)),
            trials_per_cell: self.trials_per_cell.unwrap_or(10),
            channel_kind: self.channel_kind.unwrap_or(ChannelKind::PartialTrace),
            seed: self.seed.unwrap_or(default_seed),
            regularization_eps: self.regularization_eps.unwrap_or(0.05),
            output_path,
            summary_path,
            workers: self.workers.unwrap_or(1),
        };
        config.validate()?;
        Ok(config)
    }
}

pub fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| CliError::Parse(format!("bad grid value {t:?}: {e}")))
        })
        .collect()
}

/// Parses the flat key-value config file.
pub fn parse_config_file(text: &str) -> CliResult<PartialSweepConfig> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Parse(format!("line {}: expected key = value, got {raw:?}", lineno + 1))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }

    let mut cfg = PartialSweepConfig::default();
    for (key, value) in map {
        match key.as_str() {
            "alpha_grid" => cfg.alpha_grid = Some(parse_grid(&value)?),
            "z_grid" => cfg.z_grid = Some(parse_grid(&value)?),
            "dim_a" => cfg.dim_a = Some(parse_num(&key, &value)?),
            "dim_b" => cfg.dim_b = Some(parse_num(&key, &value)?),
            "trials_per_cell" => cfg.trials_per_cell = Some(parse_num(&key, &value)?),
            "channel_kind" => cfg.channel_kind = Some(value.parse()?),
            "seed" => cfg.seed = Some(parse_num(&key, &value)?),
            "regularization_eps" => cfg.regularization_eps = Some(parse_num(&key, &value)?),
            "output_path" => cfg.output_path = Some(PathBuf::from(value)),
            "summary_path" => cfg.summary_path = Some(PathBuf::from(value)),
            "workers" => cfg.workers = Some(parse_num(&key, &value)?),
            other => {
                return Err(CliError::Parse(format!("unknown config key {other:?}")));
            }
        }
    }
    Ok(cfg)
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| CliError::Parse(format!("bad value for {key}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_file() {
        let text = "\
# comment
alpha_grid = 1.2, 1.5
z_grid = 1.0
dim_a = 2
dim_b = 3
trials_per_cell = 5
channel_kind = random_cptp
seed = 9
regularization_eps = 0.1
output_path = out.csv
workers = 2
";
        let cfg = parse_config_file(text).unwrap().resolve(0).unwrap();
        assert_eq!(cfg.alpha_grid, vec![1.2, 1.5]);
        assert_eq!(cfg.dims, (2, 3));
        assert_eq!(cfg.channel_kind, ChannelKind::RandomCptp);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.workers, 2);
        assert_eq!(cfg.summary_path, PathBuf::from("out.csv.summary.json"));
    }

    #[test]
    fn cli_overrides_file() {
        let file = parse_config_file("alpha_grid = 1.5\nz_grid = 1.0\noutput_path = a.csv\nseed = 1\n").unwrap();
        let cli = PartialSweepConfig {
            seed: Some(77),
            ..Default::default()
        };
        let cfg = cli.or(file).resolve(0).unwrap();
        assert_eq!(cfg.seed, 77);
        assert_eq!(cfg.alpha_grid, vec![1.5]);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(parse_config_file("nonsense").is_err());
        assert!(parse_config_file("mystery_key = 1").is_err());
        let cfg = parse_config_file("alpha_grid = 1.0\nz_grid = 1.0\noutput_path = x.csv\n").unwrap();
        assert!(matches!(cfg.resolve(0), Err(CliError::InvalidParams(_))));
        let cfg = parse_config_file("alpha_grid = 1.5\nz_grid = 1.0\noutput_path = x.csv\nregularization_eps = 1.0\n")
            .unwrap();
        assert!(matches!(cfg.resolve(0), Err(CliError::InvalidParams(_))));
    }
}
