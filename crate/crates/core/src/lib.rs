//! Offline assortment optimization under the multinomial logit model.
//!
//! The crate estimates item attractions from logged `(assortment, choice)`
//! pairs and picks a revenue-maximizing assortment of at most `K` items.
//! The main estimator, pessimistic rank-breaking (PRB), reduces every
//! record to item-vs-no-purchase comparisons and plugs per-item lower
//! confidence bounds into an exact optimizer. A maximum-likelihood
//! baseline, hard-instance generators and a seeded experiment runner are
//! included for comparisons.
//!
//! ```
//! use mnl_offline::{prb, Assortment, ChoiceRecord, OfflineDataset};
//!
//! let offered = Assortment::new(vec![1, 2]).unwrap();
//! let records = (0..400)
//!     .map(|k| ChoiceRecord::new(offered.clone(), [0, 1, 0, 2][k % 4]).unwrap())
//!     .collect();
//! let data = OfflineDataset::new(records);
//! let chosen = prb(&data, &[1.0, 0.4], 1, 0.05).unwrap();
//! assert_eq!(chosen.assortment.items(), &[1]);
//! ```

// Validation is written as `!(x > 0.0)` so that NaN fails it too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
mod error;
pub mod estimator;
pub mod experiments;
pub mod mle;
pub mod mnl;
pub mod optimizer;

pub use datagen::{
    kl_between_instances, make_experiment_instance, make_fixed_lb_design, make_hard_instance,
    make_randomized_design, sample_dataset, AssortmentDesign, DesignKind, HardInstanceSpec,
    RewardMode,
};
pub use error::{Error, Result};
pub use estimator::{count_pairwise, lcb_estimates, prb_estimate, EstimatedValues, PairwiseCounts};
pub use experiments::{run_experiment, ExperimentConfig, ResultRow};
pub use mle::{gradient, log_likelihood, mle_assortment, mle_fit, MleConfig, MleResult};
pub use mnl::{
    choice_probability, coverage, expected_revenue, sample_choice, suboptimality, Assortment,
    ChoiceRecord, CoverageStats, MnlInstance, OfflineDataset, NO_PURCHASE,
};
pub use optimizer::{brute_force_optimize, optimize, prb, OptimizeResult};
