//! Config precedence: flags, then the config file, then defaults.

use std::path::Path;

use clap::Args;
use mpc_emst::{AlgorithmConfig, OracleMode, SpannerStrategy};
use serde::Deserialize;

use crate::error::CliError;

/// Keys accepted in a TOML config file; all optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileSettings {
    pub alpha: Option<u64>,
    pub beta: Option<f64>,
    pub h: Option<u32>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub strategy: Option<SpannerStrategy>,
    pub strict_memory: Option<bool>,
    pub machine_mem: Option<u64>,
    pub snap_level: Option<f64>,
    pub jl_dim: Option<usize>,
    pub oracle: Option<bool>,
}

impl FileSettings {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Default, Clone, Args)]
pub struct AlgorithmFlags {
    /// Checkpoint ratio alpha (a power of 2 of the form 2^(2^g)).
    #[arg(long)]
    pub alpha: Option<u64>,
    /// Level-to-cell ratio beta.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Leader-compression rounds per stage.
    #[arg(long)]
    pub h: Option<u32>,
    /// Spanner density knob in (0, 1).
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// exact-threshold, cell-leader or sampled-leader.
    #[arg(long)]
    pub strategy: Option<SpannerStrategy>,
    /// Record bulk operands whose records do not fit on one machine.
    #[arg(long)]
    pub strict_memory: bool,
    /// Words per machine for strict mode.
    #[arg(long)]
    pub machine_mem: Option<u64>,
    /// Side of the snapping grid after scaling.
    #[arg(long)]
    pub snap_level: Option<f64>,
    /// Project to this many dimensions first.
    #[arg(long)]
    pub jl_dim: Option<usize>,
    /// Always run the exact oracle.
    #[arg(long, overrides_with = "no_oracle")]
    pub oracle: bool,
    /// Never run the exact oracle.
    #[arg(long, overrides_with = "oracle")]
    pub no_oracle: bool,
    /// TOML file with any of the settings above.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
}

impl AlgorithmFlags {
    pub fn resolve(&self, d: usize) -> Result<(AlgorithmConfig, OracleMode), CliError> {
        let file = match &self.config {
            Some(path) => FileSettings::load(path)?,
            None => FileSettings::default(),
        };
        let mut cfg = AlgorithmConfig::for_dim(d);
        macro_rules! layer {
            ($field:ident, $flag:expr, $file:expr) => {
                if let Some(v) = $flag.or($file) {
                    cfg.$field = v;
                }
            };
        }
        layer!(alpha, self.alpha, file.alpha);
        layer!(beta, self.beta, file.beta);
        layer!(h, self.h, file.h);
        layer!(epsilon, self.epsilon, file.epsilon);
        layer!(seed, self.seed, file.seed);
        layer!(strategy, self.strategy, file.strategy);
        layer!(machine_memory_s, self.machine_mem, file.machine_mem);
        layer!(snap_level, self.snap_level, file.snap_level);
        if let Some(k) = self.jl_dim.or(file.jl_dim) {
            cfg.jl_dim = Some(k);
        }
        cfg.strict_memory = self.strict_memory || file.strict_memory.unwrap_or(false);
        cfg.validate(d)?;
        let oracle = if self.oracle {
            OracleMode::On
        } else if self.no_oracle {
            OracleMode::Off
        } else {
            match file.oracle {
                Some(true) => OracleMode::On,
                Some(false) => OracleMode::Off,
                None => OracleMode::Auto,
            }
        };
        Ok((cfg, oracle))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "h = 3\nseed = 9\nstrategy = \"exact-threshold\"\noracle = false").unwrap();
        let flags = AlgorithmFlags { h: Some(4), config: Some(f.path().to_path_buf()), ..Default::default() };
        let (cfg, oracle) = flags.resolve(2).unwrap();
        assert_eq!((cfg.h, cfg.seed, cfg.strategy), (4, 9, SpannerStrategy::ExactThreshold));
        assert_eq!(cfg.alpha, AlgorithmConfig::for_dim(2).alpha);
        assert_eq!(oracle, OracleMode::Off);
        let flags = AlgorithmFlags { oracle: true, ..flags };
        assert_eq!(flags.resolve(2).unwrap().1, OracleMode::On);
    }

    #[test]
    fn unknown_file_keys_are_usage_errors() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "gamma = 1").unwrap();
        let flags = AlgorithmFlags { config: Some(f.path().to_path_buf()), ..Default::default() };
        assert_eq!(flags.resolve(2).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        let flags = AlgorithmFlags { alpha: Some(12), ..Default::default() };
        assert_eq!(flags.resolve(2).unwrap_err().exit_code(), 2);
    }
}
