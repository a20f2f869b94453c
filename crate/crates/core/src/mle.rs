//! Non-pessimistic maximum-likelihood baseline.
//!
//! Utilities are parameterized as `v = exp(θ)` with the no-purchase
//! utility pinned at `θ₀ = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::mnl::{OfflineDataset, NO_PURCHASE};
use crate::optimizer::{optimize, OptimizeResult, DEFAULT_TOL};

/// Halvings tried before an ascent step is abandoned.
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MleConfig {
    pub max_iterations: usize,
    pub step_size: f64,
    /// Stop once the coverage-scaled gradient max-norm falls below this.
    pub grad_tol: f64,
    /// Starting point; all zeros when `None`.
    pub theta_init: Option<Vec<f64>>,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            step_size: 1.0,
            grad_tol: 1e-6,
            theta_init: None,
        }
    }
}

impl MleConfig {
    fn validate(&self, n_items: usize) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(domain("max_iterations must be at least 1"));
        }
        if !(self.step_size > 0.0) || !(self.grad_tol > 0.0) {
            return Err(domain("step_size and grad_tol must be positive"));
        }
        if let Some(init) = &self.theta_init {
            if init.len() != n_items {
                return Err(domain(format!(
                    "theta_init has {} entries, expected {n_items}",
                    init.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub theta: Vec<f64>,
    pub v_hat: Vec<f64>,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations_used: usize,
}

fn check_len(dataset: &OfflineDataset, theta: &[f64]) -> Result<()> {
    let max = dataset.max_item();
    if max > theta.len() {
        return Err(domain(format!(
            "dataset references item {max} but theta has {} entries",
            theta.len()
        )));
    }
    Ok(())
}

/// Log-likelihood and (optionally) its gradient in one pass.
fn evaluate(dataset: &OfflineDataset, theta: &[f64], grad: Option<&mut [f64]>) -> f64 {
    let weights: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
    let mut ll = 0.0;
    match grad {
        Some(grad) => {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for record in &dataset.records {
                let items = record.assortment.items();
                let denom = 1.0 + items.iter().map(|&i| weights[i - 1]).sum::<f64>();
                for &i in items {
                    grad[i - 1] -= weights[i - 1] / denom;
                }
                if record.choice != NO_PURCHASE {
                    grad[record.choice - 1] += 1.0;
                    ll += theta[record.choice - 1];
                }
                ll -= denom.ln();
            }
        }
        None => {
            for record in &dataset.records {
                let items = record.assortment.items();
                let denom = 1.0 + items.iter().map(|&i| weights[i - 1]).sum::<f64>();
                if record.choice != NO_PURCHASE {
                    ll += theta[record.choice - 1];
                }
                ll -= denom.ln();
            }
        }
    }
    ll
}

/// `Σ_t log p_{i_t}(S_t; exp(θ))`.
pub fn log_likelihood(dataset: &OfflineDataset, theta: &[f64]) -> Result<f64> {
    check_len(dataset, theta)?;
    Ok(evaluate(dataset, theta, None))
}

/// `∂ℓ/∂θ_j = Σ_t [1{i_t = j} - 1{j ∈ S_t} p_j(S_t)]`.
pub fn gradient(dataset: &OfflineDataset, theta: &[f64]) -> Result<Vec<f64>> {
    check_len(dataset, theta)?;
    let mut grad = vec![0.0; theta.len()];
    evaluate(dataset, theta, Some(&mut grad));
    Ok(grad)
}

/// Gradient ascent on `ℓ(θ)` with step halving.
///
/// Each coordinate's step is divided by the number of records offering that
/// item, which equalizes curvature between well- and poorly-covered items.
/// Unobserved items have zero gradient and keep their initial value.
pub fn mle_fit(dataset: &OfflineDataset, n_items: usize, config: &MleConfig) -> Result<MleResult> {
    config.validate(n_items)?;
    let mut theta = config
        .theta_init
        .clone()
        .unwrap_or_else(|| vec![0.0; n_items]);
    check_len(dataset, &theta)?;

    let mut coverage = vec![0u64; n_items];
    for record in &dataset.records {
        for &i in record.assortment.items() {
            coverage[i - 1] += 1;
        }
    }
    let scale: Vec<f64> = coverage.iter().map(|&c| 1.0 / c.max(1) as f64).collect();

    let mut grad = vec![0.0; n_items];
    let mut ll = evaluate(dataset, &theta, Some(&mut grad));
    let mut candidate = vec![0.0; n_items];
    let mut candidate_grad = vec![0.0; n_items];
    let mut iterations_used = 0;
    let scaled_norm = |g: &[f64]| {
        g.iter()
            .zip(&scale)
            .map(|(g, s)| (g * s).abs())
            .fold(0.0_f64, f64::max)
    };

    let mut converged = scaled_norm(&grad) < config.grad_tol;
    while !converged && iterations_used < config.max_iterations {
        let mut step = config.step_size;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            for j in 0..n_items {
                candidate[j] = theta[j] + step * grad[j] * scale[j];
            }
            let candidate_ll = evaluate(dataset, &candidate, Some(&mut candidate_grad));
            if candidate_ll >= ll {
                std::mem::swap(&mut theta, &mut candidate);
                std::mem::swap(&mut grad, &mut candidate_grad);
                ll = candidate_ll;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        iterations_used += 1;
        converged = scaled_norm(&grad) < config.grad_tol;
    }

    let v_hat = theta.iter().map(|t| t.exp()).collect();
    Ok(MleResult {
        theta,
        v_hat,
        log_likelihood: ll,
        converged,
        iterations_used,
    })
}

/// Plug-in assortment: fit `v̂` by maximum likelihood, then optimize it
/// against the supplied rewards.
pub fn mle_assortment(
    dataset: &OfflineDataset,
    rewards: &[f64],
    capacity: usize,
    config: &MleConfig,
) -> Result<OptimizeResult> {
    let fit = mle_fit(dataset, rewards.len(), config)?;
    optimize(&fit.v_hat, rewards, capacity, DEFAULT_TOL)
}
