//! Flat `key=value` experiment configuration.
//!
//! Recognized keys: `grid_size`, `goal_cell`, `reward_small`, `reward_large`,
//! `gamma`, `alpha`, `ucb_c`, `episodes`, `horizon`, `rate_bits`, `ratios`,
//! `schemes`, `seeds`, `smooth_window`. Lists are comma-separated; `#` starts
//! a comment. `ratios` is an alternative spelling of the rate sweep in terms
//! of compression ratios `a:b`, resolved against the grid's observation
//! entropy.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::aggregation::{entropy, uniform_non_goal};
use crate::gridworld::{GridSpec, Obs};
use crate::qcore::TrainConfig;
use crate::schemes::SchemeKind;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub grid_size: u16,
    pub goal_cell: u16,
    pub reward_small: f64,
    pub reward_large: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub ucb_c: f64,
    pub episodes: usize,
    pub horizon: usize,
    pub rate_bits: Vec<u32>,
    pub schemes: Vec<SchemeKind>,
    pub seeds: Vec<u64>,
    pub smooth_window: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            grid_size: 8,
            goal_cell: 22,
            reward_small: 1.0,
            reward_large: 10.0,
            gamma: 0.9,
            alpha: 0.07,
            ucb_c: 12.5,
            episodes: 200_000,
            horizon: 100,
            rate_bits: vec![2],
            schemes: vec![SchemeKind::Saic],
            seeds: vec![1],
            smooth_window: 20_000,
        }
    }
}

fn parse_scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| Error::Config(format!("key `{key}`: cannot parse `{value}`: {e}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value.split(',').map(|t| parse_scalar(key, t.trim())).collect()
}

impl ExperimentConfig {
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut ratios: Option<Vec<(u32, u32)>> = None;
        let mut saw_rates = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got `{line}`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key == "ratios" {
                ratios = Some(
                    value
                        .split(',')
                        .map(|t| {
                            let t = t.trim();
                            let (a, b) = t.split_once(':').ok_or_else(|| {
                                Error::Config(format!("ratio `{t}` is not of the form a:b"))
                            })?;
                            Ok((parse_scalar::<u32>("ratios", a)?, parse_scalar::<u32>("ratios", b)?))
                        })
                        .collect::<Result<Vec<_>>>()?,
                );
            } else {
                if key == "rate_bits" {
                    saw_rates = true;
                }
                cfg.apply_override(key, value)?;
            }
        }
        if let Some(ratios) = ratios {
            if saw_rates {
                return Err(Error::Config(
                    "give either `rate_bits` or `ratios`, not both".into(),
                ));
            }
            cfg.rate_bits = cfg.resolve_ratios(&ratios)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path.as_ref())?)
    }

    /// Set one key from its textual form; used for CLI overrides.
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "grid_size" => self.grid_size = parse_scalar(key, value)?,
            "goal_cell" => self.goal_cell = parse_scalar(key, value)?,
            "reward_small" => self.reward_small = parse_scalar(key, value)?,
            "reward_large" => self.reward_large = parse_scalar(key, value)?,
            "gamma" => self.gamma = parse_scalar(key, value)?,
            "alpha" => self.alpha = parse_scalar(key, value)?,
            "ucb_c" => self.ucb_c = parse_scalar(key, value)?,
            "episodes" => self.episodes = parse_scalar(key, value)?,
            "horizon" => self.horizon = parse_scalar(key, value)?,
            "rate_bits" => self.rate_bits = parse_list(key, value)?,
            "schemes" => self.schemes = parse_list(key, value)?,
            "seeds" => self.seeds = parse_list(key, value)?,
            "smooth_window" => self.smooth_window = parse_scalar(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Map compression ratios `a:b` to channel rates against this grid's
    /// observation entropy: rate = b * ceil(H(obs)) / a, which must divide
    /// exactly.
    fn resolve_ratios(&self, ratios: &[(u32, u32)]) -> Result<Vec<u32>> {
        let spec = self.grid_spec()?;
        let h_obs = entropy(&uniform_non_goal(&spec))?;
        let obs_bits = (h_obs - 1e-9).ceil() as u32;
        ratios
            .iter()
            .map(|&(a, b)| {
                if a == 0 || b == 0 {
                    return Err(Error::Config(format!("degenerate ratio {a}:{b}")));
                }
                let scaled = b * obs_bits;
                if scaled % a != 0 {
                    return Err(Error::Config(format!(
                        "ratio {a}:{b} does not divide the {obs_bits}-bit observation entropy"
                    )));
                }
                Ok(scaled / a)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.grid_spec()?;
        self.train_config(self.seeds.first().copied().unwrap_or(0))?;
        if self.rate_bits.is_empty() {
            return Err(Error::Config("empty rate list".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("empty scheme list".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("empty seed list".into()));
        }
        if self.smooth_window < 1 {
            return Err(Error::Config("smooth_window must be >= 1".into()));
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid_size, Obs(self.goal_cell), self.reward_small, self.reward_large)
    }

    pub fn train_config(&self, seed: u64) -> Result<TrainConfig> {
        TrainConfig::new(self.gamma, self.alpha, self.ucb_c, self.episodes, self.horizon, seed)
    }

    /// Canonical text form: fixed key order, comma-joined lists.
    pub fn canonical_text(&self) -> String {
        fn join<T: std::fmt::Display>(xs: &[T]) -> String {
            xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        format!(
            "grid_size={}\ngoal_cell={}\nreward_small={}\nreward_large={}\ngamma={}\nalpha={}\n\
             ucb_c={}\nepisodes={}\nhorizon={}\nrate_bits={}\nschemes={}\nseeds={}\nsmooth_window={}\n",
            self.grid_size,
            self.goal_cell,
            self.reward_small,
            self.reward_large,
            self.gamma,
            self.alpha,
            self.ucb_c,
            self.episodes,
            self.horizon,
            join(&self.rate_bits),
            join(&self.schemes),
            join(&self.seeds),
            self.smooth_window,
        )
    }
}

/// Short hash of a config's canonical text, for run-directory names.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let digest = Sha256::digest(cfg.canonical_text().as_bytes());
    digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_lists() {
        let cfg = ExperimentConfig::parse_str(
            "# a comment\n\
             grid_size = 8\n\
             goal_cell = 21   # the other goal preset\n\
             episodes = 1000\n\
             rate_bits = 1,2,3\n\
             schemes = saic,cic\n\
             seeds = 1,2,3\n",
        )
        .unwrap();
        assert_eq!(cfg.grid_size, 8);
        assert_eq!(cfg.goal_cell, 21);
        assert_eq!(cfg.rate_bits, vec![1, 2, 3]);
        assert_eq!(cfg.schemes, vec![SchemeKind::Saic, SchemeKind::Cic]);
        assert_eq!(cfg.seeds, vec![1, 2, 3]);
    }

    #[test]
    fn ratios_resolve_against_observation_entropy() {
        // 8x8 grid: ceil(H) = 6 bits, so 3:1 -> 2 bits, 6:1 -> 1, 1:1 -> 6.
        let cfg = ExperimentConfig::parse_str("grid_size = 8\nratios = 6:1,3:1,2:1,3:2,6:5,1:1\n")
            .unwrap();
        assert_eq!(cfg.rate_bits, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn rejects_conflicting_and_unknown_keys() {
        assert!(ExperimentConfig::parse_str("rate_bits=2\nratios=3:1\n").is_err());
        assert!(ExperimentConfig::parse_str("no_such_key=1\n").is_err());
        assert!(ExperimentConfig::parse_str("schemes=telepathy\n").is_err());
        assert!(ExperimentConfig::parse_str("grid_size\n").is_err());
    }

    #[test]
    fn hash_is_stable_and_key_sensitive() {
        let a = ExperimentConfig::default();
        let mut b = ExperimentConfig::default();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.seeds = vec![2];
        assert_ne!(config_hash(&a), config_hash(&b));
    }
}
