//! Training configuration assembly: defaults, then config file, then CLI
//! flags, highest precedence last.
//!
//! The config file is flat `key = value` text (also `key=value`; `#` starts
//! a comment). Keys are exactly the CLI flag names without the leading
//! dashes. Unknown keys are rejected rather than ignored.

use std::path::Path;

use anyhow::{Context, Result};
use clap::Args;
use trefree_core::objectives::ObjectiveKind;
use trefree_core::trainer::TrainConfig;

use crate::UsageError;

/// Optional overrides shared by `train` and `compare`.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Environment name: pointmass|pendulum|chain[:n]
    #[arg(long)]
    pub env: Option<String>,
    /// TREFree conservativeness margin
    #[arg(long)]
    pub delta: Option<f64>,
    /// PPO clip range
    #[arg(long)]
    pub eps_clip: Option<f64>,
    /// Ratio-deviation clip range
    #[arg(long)]
    pub lambda: Option<f64>,
    /// TRPO trust region (mean KL)
    #[arg(long)]
    pub trpo_kl: Option<f64>,
    /// Critic loss coefficient
    #[arg(long)]
    pub value_coef: Option<f64>,
    /// Entropy bonus coefficient
    #[arg(long)]
    pub entropy_coef: Option<f64>,
    /// Root seed; all subsystem streams derive from it
    #[arg(long)]
    pub seed: Option<u64>,
    /// Total environment steps
    #[arg(long)]
    pub total_steps: Option<usize>,
    /// Number of rollout actors (N)
    #[arg(long)]
    pub n_actors: Option<usize>,
    /// Steps collected per actor per iteration
    #[arg(long)]
    pub steps_per_actor: Option<usize>,
    /// Optimization epochs per iteration (K)
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Minibatch size (M)
    #[arg(long)]
    pub minibatch_size: Option<usize>,
    /// Discount factor
    #[arg(long)]
    pub gamma: Option<f64>,
    /// GAE lambda
    #[arg(long)]
    pub gae_lambda: Option<f64>,
    /// Initial learning rate
    #[arg(long)]
    pub lr_start: Option<f64>,
    /// Final learning rate
    #[arg(long)]
    pub lr_end: Option<f64>,
    /// Normalize observations by running mean/std
    #[arg(long)]
    pub normalize_obs: Option<bool>,
    /// Normalize rewards by the running return std
    #[arg(long)]
    pub normalize_rew: Option<bool>,
    /// Normalize advantages within each training batch
    #[arg(long)]
    pub normalize_adv: Option<bool>,
    /// Hidden layer width
    #[arg(long)]
    pub hidden_dim: Option<usize>,
}

/// `objective` lives outside [`Overrides`] because `compare` supplies its
/// own list; this carries it for `train`.
#[derive(Debug, Clone, Default)]
pub struct FullOverrides {
    pub objective: Option<String>,
    pub base: Overrides,
}

macro_rules! take_higher {
    ($lower:expr, $higher:expr, $($field:ident),+ $(,)?) => {
        $(if $higher.$field.is_some() {
            $lower.$field = $higher.$field.clone();
        })+
    };
}

impl FullOverrides {
    /// Parse a config file into overrides.
    pub fn from_file(path: &Path) -> Result<FullOverrides> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let mut out = FullOverrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                UsageError::new(format!(
                    "{}:{}: expected key = value, got '{raw}'",
                    path.display(),
                    lineno + 1
                ))
            })?;
            out.set(key.trim(), value.trim()).map_err(|e| {
                UsageError::new(format!("{}:{}: {e}", path.display(), lineno + 1))
            })?;
        }
        Ok(out)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| {
                anyhow::anyhow!("bad value '{value}' for key '{key}'")
            })
        }
        match key {
            "env" => self.base.env = Some(value.to_string()),
            "objective" => self.objective = Some(value.to_string()),
            "delta" => self.base.delta = Some(parse(key, value)?),
            "eps-clip" => self.base.eps_clip = Some(parse(key, value)?),
            "lambda" => self.base.lambda = Some(parse(key, value)?),
            "trpo-kl" => self.base.trpo_kl = Some(parse(key, value)?),
            "value-coef" => self.base.value_coef = Some(parse(key, value)?),
            "entropy-coef" => self.base.entropy_coef = Some(parse(key, value)?),
            "seed" => self.base.seed = Some(parse(key, value)?),
            "total-steps" => self.base.total_steps = Some(parse(key, value)?),
            "n-actors" => self.base.n_actors = Some(parse(key, value)?),
            "steps-per-actor" => self.base.steps_per_actor = Some(parse(key, value)?),
            "epochs" => self.base.epochs = Some(parse(key, value)?),
            "minibatch-size" => self.base.minibatch_size = Some(parse(key, value)?),
            "gamma" => self.base.gamma = Some(parse(key, value)?),
            "gae-lambda" => self.base.gae_lambda = Some(parse(key, value)?),
            "lr-start" => self.base.lr_start = Some(parse(key, value)?),
            "lr-end" => self.base.lr_end = Some(parse(key, value)?),
            "normalize-obs" => self.base.normalize_obs = Some(parse(key, value)?),
            "normalize-rew" => self.base.normalize_rew = Some(parse(key, value)?),
            "normalize-adv" => self.base.normalize_adv = Some(parse(key, value)?),
            "hidden-dim" => self.base.hidden_dim = Some(parse(key, value)?),
            other => anyhow::bail!("unknown config key '{other}'"),
        }
        Ok(())
    }

    /// Overlay `higher` on `self` (higher precedence wins).
    pub fn merged_with(mut self, higher: FullOverrides) -> FullOverrides {
        if higher.objective.is_some() {
            self.objective = higher.objective;
        }
        let lower = &mut self.base;
        let higher = &higher.base;
        take_higher!(
            lower, higher, env, delta, eps_clip, lambda, trpo_kl, value_coef, entropy_coef,
            seed, total_steps, n_actors, steps_per_actor, epochs, minibatch_size, gamma,
            gae_lambda, lr_start, lr_end, normalize_obs, normalize_rew, normalize_adv,
            hidden_dim,
        );
        self
    }

    /// Produce a validated [`TrainConfig`].
    pub fn build(&self) -> Result<TrainConfig> {
        let mut config = TrainConfig::default();
        if let Some(objective) = &self.objective {
            config.objective.kind =
                ObjectiveKind::parse(objective).map_err(|e| UsageError::new(e.to_string()))?;
        }
        let o = &self.base;
        macro_rules! apply {
            ($($target:expr => $field:ident),+ $(,)?) => {
                $(if let Some(v) = o.$field.clone() {
                    $target = v;
                })+
            };
        }
        apply!(
            config.env_name => env,
            config.objective.delta => delta,
            config.objective.eps_clip => eps_clip,
            config.objective.lambda => lambda,
            config.objective.trpo_kl => trpo_kl,
            config.objective.value_coef => value_coef,
            config.objective.entropy_coef => entropy_coef,
            config.seed => seed,
            config.total_steps => total_steps,
            config.n_actors => n_actors,
            config.steps_per_actor => steps_per_actor,
            config.epochs => epochs,
            config.minibatch_size => minibatch_size,
            config.gamma => gamma,
            config.gae_lambda => gae_lambda,
            config.lr_start => lr_start,
            config.lr_end => lr_end,
            config.normalize_obs => normalize_obs,
            config.normalize_rew => normalize_rew,
            config.normalize_adv => normalize_adv,
            config.hidden_dim => hidden_dim,
        );
        config
            .validate()
            .map_err(|e| UsageError::new(e.to_string()))?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn file_then_flags_precedence() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "# a comment\nobjective = ppo\nseed = 3\ntotal-steps = 4096").unwrap();
        let from_file = FullOverrides::from_file(file.path()).unwrap();
        let cli = FullOverrides {
            objective: None,
            base: Overrides { seed: Some(9), ..Overrides::default() },
        };
        let config = from_file.merged_with(cli).build().unwrap();
        assert_eq!(config.objective.kind, ObjectiveKind::PpoClip);
        assert_eq!(config.seed, 9);
        assert_eq!(config.total_steps, 4096);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "learning-rate = 0.1").unwrap();
        assert!(FullOverrides::from_file(file.path()).is_err());
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        let bad = FullOverrides {
            objective: Some("sarsa".into()),
            base: Overrides::default(),
        };
        let err = bad.build().unwrap_err();
        assert!(err.is::<UsageError>());
        let bad = FullOverrides {
            objective: None,
            base: Overrides { gamma: Some(1.5), ..Overrides::default() },
        };
        assert!(bad.build().unwrap_err().is::<UsageError>());
    }
}
