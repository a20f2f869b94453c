//! Rank-breaking counts and the pessimistic attraction estimator.
//!
//! Every record is broken into the pairwise comparison "item `j` vs.
//! no-purchase" for each offered `j`: the comparison is informative only
//! when the customer picked `j` or nothing. Within that sub-sample `j`
//! beats the no-purchase option with probability `v_j / (1 + v_j)`, so a
//! binomial lower confidence bound on that probability maps to a lower
//! bound on `v_j`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::mnl::{ChoiceRecord, OfflineDataset, NO_PURCHASE};

/// Upper clamp applied to `p^LCB` before the odds transform.
const P_LCB_CEILING: f64 = 1.0 - 1e-12;

/// Per-item rank-breaking counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairwiseCounts {
    /// Records offering `j` whose choice was `j` or no-purchase.
    pub tau_j0: Vec<u64>,
    /// Records whose choice was `j`.
    pub tau_j: Vec<u64>,
}

impl PairwiseCounts {
    pub fn zeros(n_items: usize) -> Self {
        Self {
            tau_j0: vec![0; n_items],
            tau_j: vec![0; n_items],
        }
    }

    pub fn n_items(&self) -> usize {
        self.tau_j0.len()
    }

    /// Adds one record to the counts.
    pub fn observe(&mut self, record: &ChoiceRecord) -> Result<()> {
        record.assortment.validate(self.n_items())?;
        if record.choice == NO_PURCHASE {
            for &j in record.assortment.items() {
                self.tau_j0[j - 1] += 1;
            }
        } else {
            self.tau_j0[record.choice - 1] += 1;
            self.tau_j[record.choice - 1] += 1;
        }
        Ok(())
    }

    /// Adds counts gathered from a disjoint shard of records.
    pub fn merge(&mut self, other: &PairwiseCounts) {
        for (a, b) in self.tau_j0.iter_mut().zip(&other.tau_j0) {
            *a += b;
        }
        for (a, b) in self.tau_j.iter_mut().zip(&other.tau_j) {
            *a += b;
        }
    }
}

/// Counts `τ_{j0}` and `τ_j` in a single pass over the dataset.
pub fn count_pairwise(dataset: &OfflineDataset, n_items: usize) -> Result<PairwiseCounts> {
    let mut counts = PairwiseCounts::zeros(n_items);
    for record in &dataset.records {
        counts.observe(record)?;
    }
    Ok(counts)
}

/// Output of the pessimistic estimator. Index `j - 1` holds item `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatedValues {
    pub delta: f64,
    /// Empirical win rate against no-purchase; `None` when `τ_{j0} = 0`.
    pub p_hat: Vec<Option<f64>>,
    pub p_lcb: Vec<f64>,
    pub v_lcb: Vec<f64>,
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("delta must lie in (0,1), got {delta}")))
    }
}

/// Lower confidence bound on the win probability of one item against no-purchase.
///
/// Returns 0 when the item was never compared (`tau_j0 == 0`).
pub fn pairwise_lcb(tau_j: u64, tau_j0: u64, delta: f64) -> f64 {
    if tau_j0 == 0 {
        return 0.0;
    }
    let trials = tau_j0 as f64;
    let p_hat = tau_j as f64 / trials;
    let log_term = (1.0 / delta).ln();
    let lcb = p_hat - (2.0 * p_hat * (1.0 - p_hat) * log_term / trials).sqrt() - log_term / trials;
    lcb.max(0.0)
}

/// Turns rank-breaking counts into `p̂`, `p^LCB` and `v^LCB = p^LCB / (1 - p^LCB)`.
///
/// `delta` enters as `log(1/delta)`; pass `delta / n_items` for a bound that
/// holds simultaneously over all items.
pub fn lcb_estimates(counts: &PairwiseCounts, delta: f64) -> Result<EstimatedValues> {
    check_delta(delta)?;
    let n = counts.n_items();
    let mut p_hat = Vec::with_capacity(n);
    let mut p_lcb = Vec::with_capacity(n);
    let mut v_lcb = Vec::with_capacity(n);
    for (&tau_j0, &tau_j) in counts.tau_j0.iter().zip(&counts.tau_j) {
        if tau_j > tau_j0 {
            return Err(domain(format!(
                "inconsistent counts: tau_j = {tau_j} exceeds tau_j0 = {tau_j0}"
            )));
        }
        p_hat.push((tau_j0 > 0).then(|| tau_j as f64 / tau_j0 as f64));
        let p = pairwise_lcb(tau_j, tau_j0, delta).min(P_LCB_CEILING);
        p_lcb.push(p);
        v_lcb.push(p / (1.0 - p));
    }
    Ok(EstimatedValues {
        delta,
        p_hat,
        p_lcb,
        v_lcb,
    })
}

/// Counting followed by the LCB transform.
pub fn prb_estimate(dataset: &OfflineDataset, n_items: usize, delta: f64) -> Result<EstimatedValues> {
    check_delta(delta)?;
    let counts = count_pairwise(dataset, n_items)?;
    lcb_estimates(&counts, delta)
}
