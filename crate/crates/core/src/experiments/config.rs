use serde::{Deserialize, Serialize};

use crate::datagen::RewardMode;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    DepOnN,
    DepOnK,
    CoverageCheck,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::DepOnN => "dep_on_n",
            ExperimentKind::DepOnK => "dep_on_k",
            ExperimentKind::CoverageCheck => "coverage_check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Prb,
    Mle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Prb => "prb",
            Method::Mle => "mle",
        }
    }
}

/// How the attraction gap `ε` depends on capacity `K` and per-item sample size `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum EpsilonRule {
    /// `ε = value`.
    Constant { value: f64 },
    /// `ε = value / √n`.
    InvSqrtN { value: f64 },
    /// `ε = value / √(K n)`.
    InvSqrtKn { value: f64 },
    /// One `ε` per entry of `n_list`.
    Explicit { values: Vec<f64> },
}

impl EpsilonRule {
    pub fn epsilon(&self, capacity: usize, n: usize, n_index: usize) -> f64 {
        match self {
            EpsilonRule::Constant { value } => *value,
            EpsilonRule::InvSqrtN { value } => value / (n as f64).sqrt(),
            EpsilonRule::InvSqrtKn { value } => value / ((capacity * n) as f64).sqrt(),
            EpsilonRule::Explicit { values } => values[n_index],
        }
    }
}

/// Which anchor items the randomized design offers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservedBlock {
    /// Every `ℓ ∈ [4K]` anchors `n` assortments.
    #[default]
    FourK,
    /// Only `ℓ ∈ [2K]`; items `2K+1..=4K` are never offered.
    TwoK,
}

impl ObservedBlock {
    pub fn size(self, capacity: usize) -> usize {
        match self {
            ObservedBlock::FourK => 4 * capacity,
            ObservedBlock::TwoK => 2 * capacity,
        }
    }
}

fn default_replications() -> usize {
    50
}

/// Declarative description of one simulation study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n_items: usize,
    pub capacity_list: Vec<usize>,
    /// Assortments anchored on each observed item.
    pub n_list: Vec<usize>,
    pub reward_mode: RewardMode,
    pub epsilon_rule: EpsilonRule,
    pub methods: Vec<Method>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    pub delta: f64,
    pub master_seed: u64,
    pub output_path: String,
    #[serde(default)]
    pub observed_block: ObservedBlock,
    /// Use `delta / n_items` in the confidence bound so it covers all items at once.
    #[serde(default)]
    pub union_bound: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.replications == 0 {
            return fail("replications must be at least 1".into());
        }
        if self.capacity_list.is_empty() || self.n_list.is_empty() {
            return fail("capacity_list and n_list must be non-empty".into());
        }
        if self.capacity_list.contains(&0) || self.n_list.contains(&0) {
            return fail("capacities and sample sizes must be positive".into());
        }
        if self.methods.is_empty() {
            return fail("at least one method is required".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return fail(format!("delta must lie in (0,1), got {}", self.delta));
        }
        match &self.epsilon_rule {
            EpsilonRule::Explicit { values } if values.len() != self.n_list.len() => {
                return fail(format!(
                    "explicit epsilon needs one value per n ({} given, {} expected)",
                    values.len(),
                    self.n_list.len()
                ))
            }
            EpsilonRule::Explicit { values } if values.iter().any(|e| !(*e > 0.0)) => {
                return fail("explicit epsilon values must be positive".into())
            }
            EpsilonRule::Constant { value }
            | EpsilonRule::InvSqrtN { value }
            | EpsilonRule::InvSqrtKn { value }
                if !(*value > 0.0) =>
            {
                return fail(format!("epsilon scale must be positive, got {value}"))
            }
            _ => {}
        }
        Ok(())
    }

    /// The `delta` actually handed to the confidence bound.
    pub fn effective_delta(&self) -> f64 {
        if self.union_bound {
            self.delta / self.n_items as f64
        } else {
            self.delta
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }
}
