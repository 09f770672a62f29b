//! Run configuration: TOML schema, resolution against builtin environments,
//! and the echoed (fully materialized) form written into the output directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envs::{load_grid, maps, GridError, GridSpec};
use crate::intrinsic::{
    build_laplacian_rewards, build_random_rewards, IntrinsicError, IntrinsicRewardSet,
};
use crate::irpo::IrpoConfig;
use crate::numerics::MlpSpec;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Invalid(String),
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Env(#[from] GridError),
    #[error(transparent)]
    Intrinsic(#[from] IntrinsicError),
}

/// Which training agent to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgentKind {
    #[serde(rename = "irpo")]
    Irpo,
    #[serde(rename = "vanilla")]
    Vanilla,
    #[serde(rename = "is-irpo")]
    IsIrpo,
    #[serde(rename = "reward-sum")]
    RewardSum,
    #[serde(rename = "hrl")]
    Hrl,
    #[serde(rename = "blend-abrupt")]
    BlendAbrupt,
    #[serde(rename = "blend-exponential")]
    BlendExponential,
    #[serde(rename = "blend-linear")]
    BlendLinear,
}

impl AgentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AgentKind::Irpo => "irpo",
            AgentKind::Vanilla => "vanilla",
            AgentKind::IsIrpo => "is-irpo",
            AgentKind::RewardSum => "reward-sum",
            AgentKind::Hrl => "hrl",
            AgentKind::BlendAbrupt => "blend-abrupt",
            AgentKind::BlendExponential => "blend-exponential",
            AgentKind::BlendLinear => "blend-linear",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvSection {
    pub name: String,
    /// Optional map file; overrides the builtin layout.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntrinsicKind {
    Laplacian,
    Random,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntrinsicSection {
    #[serde(default = "default_intrinsic_kind")]
    pub kind: IntrinsicKind,
    /// Seed for the random-network rewards; defaults to the run seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_intrinsic_kind() -> IntrinsicKind {
    IntrinsicKind::Laplacian
}

impl Default for IntrinsicSection {
    fn default() -> Self {
        Self {
            kind: IntrinsicKind::Laplacian,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IrpoSection {
    /// Number of intrinsic rewards; defaults per environment.
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "K")]
    pub k: Option<usize>,
    #[serde(default = "d_n", rename = "N")]
    pub n: usize,
    #[serde(default = "d_eta")]
    pub eta: f64,
    #[serde(default = "d_delta_kl")]
    pub delta_kl: f64,
    #[serde(default = "d_tau_floor")]
    pub tau_floor: f64,
    #[serde(default = "d_episodes_per_update")]
    pub episodes_per_update: usize,
    #[serde(default = "d_final_episodes")]
    pub final_episodes: usize,
    #[serde(default = "d_cg_iters")]
    pub cg_iters: usize,
    #[serde(default = "d_cg_damping")]
    pub cg_damping: f64,
    #[serde(default = "d_fisher_max_states")]
    pub fisher_max_states: usize,
}

fn d_n() -> usize {
    5
}
fn d_eta() -> f64 {
    1e-2
}
fn d_delta_kl() -> f64 {
    1e-3
}
fn d_tau_floor() -> f64 {
    0.05
}
fn d_episodes_per_update() -> usize {
    8
}
fn d_final_episodes() -> usize {
    16
}
fn d_cg_iters() -> usize {
    10
}
fn d_cg_damping() -> f64 {
    1e-2
}
fn d_fisher_max_states() -> usize {
    1024
}

impl Default for IrpoSection {
    fn default() -> Self {
        Self {
            k: None,
            n: d_n(),
            eta: d_eta(),
            delta_kl: d_delta_kl(),
            tau_floor: d_tau_floor(),
            episodes_per_update: d_episodes_per_update(),
            final_episodes: d_final_episodes(),
            cg_iters: d_cg_iters(),
            cg_damping: d_cg_damping(),
            fisher_max_states: d_fisher_max_states(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticSection {
    #[serde(default = "d_lambda")]
    pub lambda: f64,
    #[serde(default = "d_critic_lr")]
    pub lr: f64,
    #[serde(default = "d_critic_epochs")]
    pub epochs: usize,
}

fn d_lambda() -> f64 {
    0.95
}
fn d_critic_lr() -> f64 {
    1e-3
}
fn d_critic_epochs() -> usize {
    3
}

impl Default for CriticSection {
    fn default() -> Self {
        Self {
            lambda: d_lambda(),
            lr: d_critic_lr(),
            epochs: d_critic_epochs(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetSection {
    pub samples: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalSection {
    #[serde(default = "d_eval_episodes")]
    pub episodes: usize,
    /// Samples between evaluations (0 = every iteration).
    #[serde(default)]
    pub interval: u64,
}

fn d_eval_episodes() -> usize {
    20
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            episodes: d_eval_episodes(),
            interval: 0,
        }
    }
}

/// Baseline-specific knobs (ignored by the core agent).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineSection {
    /// Trust-region threshold for vanilla-style agents.
    #[serde(default = "d_baseline_delta_kl")]
    pub delta_kl: f64,
    #[serde(default = "d_episodes_per_iter")]
    pub episodes_per_iter: usize,
    /// Intrinsic bonus coefficient for the reward-sum agent.
    #[serde(default = "d_bonus_scale")]
    pub bonus_scale: f64,
    /// Pretraining budget per subpolicy for the option-based agent.
    #[serde(default = "d_pretrain_samples")]
    pub pretrain_samples: u64,
    /// Maximum primitive steps per option execution.
    #[serde(default = "d_option_horizon")]
    pub option_horizon: usize,
    /// Iterations over which linear/exponential blending ramps up.
    #[serde(default = "d_blend_ramp")]
    pub blend_ramp_iters: u64,
}

fn d_baseline_delta_kl() -> f64 {
    1e-2
}
fn d_episodes_per_iter() -> usize {
    64
}
fn d_bonus_scale() -> f64 {
    0.1
}
fn d_pretrain_samples() -> u64 {
    50_000
}
fn d_option_horizon() -> usize {
    10
}
fn d_blend_ramp() -> u64 {
    20
}

impl Default for BaselineSection {
    fn default() -> Self {
        Self {
            delta_kl: d_baseline_delta_kl(),
            episodes_per_iter: d_episodes_per_iter(),
            bonus_scale: d_bonus_scale(),
            pretrain_samples: d_pretrain_samples(),
            option_horizon: d_option_horizon(),
            blend_ramp_iters: d_blend_ramp(),
        }
    }
}

/// The full run configuration as read from (and echoed to) TOML.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub agent: AgentKind,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub env: EnvSection,
    #[serde(default)]
    pub intrinsic: IntrinsicSection,
    #[serde(default)]
    pub irpo: IrpoSection,
    #[serde(default)]
    pub critic: CriticSection,
    pub budget: BudgetSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub baseline: BaselineSection,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Parses TOML; syntax and type errors keep toml's line/column context.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Builds the environment: builtin by name, optionally overridden by an
    /// explicit map file, horizon, or discount.
    pub fn build_env(&self) -> Result<GridSpec, ConfigError> {
        let builtin = maps::builtin(&self.env.name);
        let (map_text, default_horizon, default_gamma) = match (&self.env.map, builtin) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                let b = builtin.map(|b| (b.horizon, b.gamma)).unwrap_or((100, 0.99));
                (text, b.0, b.1)
            }
            (None, Some(b)) => (b.map_text.to_string(), b.horizon, b.gamma),
            (None, None) => {
                return Err(ConfigError::Invalid(format!(
                    "env.name '{}' is not builtin and no env.map was given",
                    self.env.name
                )))
            }
        };
        let horizon = self.env.horizon.unwrap_or(default_horizon);
        let gamma = self.env.gamma.unwrap_or(default_gamma);
        Ok(load_grid(&map_text, horizon, gamma)?)
    }

    /// Number of intrinsic rewards: explicit, or the environment default.
    pub fn intrinsic_count(&self) -> Result<usize, ConfigError> {
        if let Some(k) = self.irpo.k {
            if k == 0 {
                return Err(ConfigError::Invalid("irpo.K must be >= 1".into()));
            }
            return Ok(k);
        }
        maps::builtin(&self.env.name)
            .map(|b| b.num_intrinsic)
            .ok_or_else(|| {
                ConfigError::Invalid(
                    "irpo.K must be set explicitly for non-builtin environments".into(),
                )
            })
    }

    pub fn build_intrinsic(&self, env: &GridSpec) -> Result<IntrinsicRewardSet, ConfigError> {
        let k = self.intrinsic_count()?;
        let set = match self.intrinsic.kind {
            IntrinsicKind::Laplacian => build_laplacian_rewards(env, k)?,
            IntrinsicKind::Random => {
                build_random_rewards(env, k, self.intrinsic.seed.unwrap_or(self.seed))?
            }
        };
        Ok(set)
    }

    /// The actor architecture: hidden (64, 64), tanh, 4 action logits.
    pub fn policy_spec(&self) -> MlpSpec {
        MlpSpec::new(4, &[64, 64], 4)
    }

    pub fn irpo_config(&self) -> IrpoConfig {
        IrpoConfig {
            n_updates: self.irpo.n,
            eta: self.irpo.eta,
            delta_kl: self.irpo.delta_kl,
            tau_floor: self.irpo.tau_floor,
            episodes_per_update: self.irpo.episodes_per_update,
            final_episodes: self.irpo.final_episodes,
            critic_lr: self.critic.lr,
            critic_epochs: self.critic.epochs,
            lambda: self.critic.lambda,
            cg_iters: self.irpo.cg_iters,
            cg_damping: self.irpo.cg_damping,
            fisher_max_states: self.irpo.fisher_max_states,
        }
    }

    /// Validates ranges that the type system cannot express.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.irpo.n < 1 {
            return Err(ConfigError::Invalid("irpo.N must be >= 1".into()));
        }
        if !(0.0 < self.irpo.tau_floor && self.irpo.tau_floor <= 1.0) {
            return Err(ConfigError::Invalid(format!(
                "irpo.tau_floor must be in (0, 1], got {}",
                self.irpo.tau_floor
            )));
        }
        if self.irpo.delta_kl <= 0.0 || self.baseline.delta_kl <= 0.0 {
            return Err(ConfigError::Invalid("delta_kl must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.critic.lambda) {
            return Err(ConfigError::Invalid(format!(
                "critic.lambda must be in [0, 1], got {}",
                self.critic.lambda
            )));
        }
        if self.critic.lr <= 0.0 {
            return Err(ConfigError::Invalid("critic.lr must be positive".into()));
        }
        if self.eval.episodes == 0 {
            return Err(ConfigError::Invalid("eval.episodes must be >= 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
agent = "irpo"
seed = 0
out_dir = "/tmp/run"

[env]
name = "fourrooms"

[budget]
samples = 1000
"#;

    #[test]
    fn minimal_config_resolves_with_table_defaults() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.irpo.n, 5);
        assert_eq!(cfg.irpo.eta, 1e-2);
        assert_eq!(cfg.irpo.delta_kl, 1e-3);
        assert_eq!(cfg.critic.lambda, 0.95);
        assert_eq!(cfg.critic.lr, 1e-3);
        assert_eq!(cfg.intrinsic_count().unwrap(), 4);
        let env = cfg.build_env().unwrap();
        assert_eq!(env.horizon, 100);
    }

    #[test]
    fn echo_round_trips() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        let echoed = cfg.to_toml();
        let back = RunConfig::from_toml(&echoed).unwrap();
        assert_eq!(back.seed, cfg.seed);
        assert_eq!(back.irpo.n, cfg.irpo.n);
        assert_eq!(back.agent, cfg.agent);
    }

    #[test]
    fn parse_errors_carry_location() {
        let bad = "agent = \"irpo\"\nseed = \"not a number\"\n";
        let err = RunConfig::from_toml(bad).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn unknown_env_without_map_is_invalid() {
        let text = MINIMAL.replace("fourrooms", "nowhere");
        let cfg = RunConfig::from_toml(&text).unwrap();
        assert!(matches!(cfg.build_env(), Err(ConfigError::Invalid(_))));
    }
}
