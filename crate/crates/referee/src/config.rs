use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use telepathy_core::games::play::{default_sampler, InputSampler, UniformSampler};
use telepathy_core::games::{GameKind, GameSpec, Role};

use crate::error::{RefereeError, Result};

fn default_equal_probability() -> f64 {
    0.5
}

fn default_timeout_ms() -> u64 {
    5_000
}

fn default_connect_timeout_ms() -> u64 {
    30_000
}

/// How round inputs are drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SamplerConfig {
    /// The game's default sampler; for Deutsch-Jozsa, `x = y` with this probability.
    Promise {
        #[serde(default = "default_equal_probability")]
        equal_probability: f64,
    },
    /// Independent uniform inputs, which may break the promise.
    Uniform,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig::Promise {
            equal_probability: default_equal_probability(),
        }
    }
}

/// Everything that determines a session. The seed fixes the input sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub game: GameKind,
    pub rounds: u64,
    pub seed: u64,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_path: Option<PathBuf>,
    /// Per-round wait for both players.
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    /// Wait for both players to connect and say hello.
    #[serde(default = "default_connect_timeout_ms")]
    pub connect_timeout_ms: u64,
}

impl SessionConfig {
    pub fn new(game: GameKind, rounds: u64, seed: u64) -> Self {
        SessionConfig {
            game,
            rounds,
            seed,
            sampler: SamplerConfig::default(),
            log_path: None,
            timeout_ms: default_timeout_ms(),
            connect_timeout_ms: default_connect_timeout_ms(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.game.validate()?;
        if self.timeout_ms == 0 {
            return Err(RefereeError::Config("timeout_ms must be positive".into()));
        }
        self.sampler()?;
        Ok(())
    }

    pub fn sampler(&self) -> Result<Box<dyn InputSampler>> {
        Ok(match self.sampler {
            SamplerConfig::Promise { equal_probability } => {
                default_sampler(&self.game, equal_probability)?
            }
            SamplerConfig::Uniform => Box::new(UniformSampler {
                n: self.game.input_len(Role::Alice),
            }),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SessionConfig =
            serde_json::from_str(text).map_err(|e| RefereeError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
