//! Hard instances, observed-assortment designs and dataset sampling.
//!
//! Items split into three blocks: `K` optimal items with attraction
//! `1/K + ε`, the rest of `[4K]` as competitive items at `1/K`, and the
//! items beyond `4K` as decoys. With non-uniform rewards the decoys are
//! attractive (`v = 1`) but worthless (`r = 0`); with uniform rewards they
//! look exactly like competitive items.

use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::mnl::{
    choice_probability_with, sample_choice_with, Assortment, ChoiceRecord, MnlInstance,
    OfflineDataset, NO_PURCHASE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    Uniform,
    NonUniform,
}

impl RewardMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RewardMode::Uniform => "uniform",
            RewardMode::NonUniform => "non_uniform",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardInstanceSpec {
    pub n_items: usize,
    pub capacity: usize,
    pub epsilon: f64,
    pub reward_mode: RewardMode,
    /// The optimal block; `{1, …, K}` when `None`.
    pub n_opt: Option<Assortment>,
}

impl HardInstanceSpec {
    pub fn new(n_items: usize, capacity: usize, epsilon: f64, reward_mode: RewardMode) -> Self {
        Self {
            n_items,
            capacity,
            epsilon,
            reward_mode,
            n_opt: None,
        }
    }

    pub fn with_n_opt(mut self, n_opt: Assortment) -> Self {
        self.n_opt = Some(n_opt);
        self
    }

    pub fn optimal_block(&self) -> Assortment {
        self.n_opt
            .clone()
            .unwrap_or_else(|| Assortment((1..=self.capacity).collect()))
    }

    fn check(&self) -> Result<()> {
        let k = self.capacity;
        if k == 0 {
            return Err(domain("capacity must be at least 1"));
        }
        if self.n_items < 4 * k {
            return Err(domain(format!(
                "hard instances need at least 4K = {} items, got {}",
                4 * k,
                self.n_items
            )));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(domain(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        let n_opt = self.optimal_block();
        if n_opt.len() != k {
            return Err(domain(format!(
                "optimal block must hold exactly K = {k} items, got {}",
                n_opt.len()
            )));
        }
        n_opt.validate(4 * k)
    }
}

fn build(spec: &HardInstanceSpec) -> Result<MnlInstance> {
    spec.check()?;
    let k = spec.capacity;
    let base = 1.0 / k as f64;
    let n_opt = spec.optimal_block();
    let mut attractions = Vec::with_capacity(spec.n_items);
    let mut rewards = Vec::with_capacity(spec.n_items);
    for i in 1..=spec.n_items {
        let in_block = i <= 4 * k;
        let (v, r) = if n_opt.contains(i) {
            (base + spec.epsilon, 1.0)
        } else {
            match spec.reward_mode {
                RewardMode::Uniform => (base, 1.0),
                RewardMode::NonUniform if in_block => (base, 1.0),
                RewardMode::NonUniform => (1.0, 0.0),
            }
        };
        attractions.push(v);
        rewards.push(r);
    }
    MnlInstance::new(k, attractions, rewards, None)
}

/// Lower-bound instance; requires `ε < 1/(4K)`.
pub fn make_hard_instance(spec: &HardInstanceSpec) -> Result<MnlInstance> {
    let bound = 1.0 / (4.0 * spec.capacity.max(1) as f64);
    if !(spec.epsilon < bound) {
        return Err(domain(format!(
            "epsilon {} must be below 1/(4K) = {bound}",
            spec.epsilon
        )));
    }
    build(spec)
}

/// Same parameter layout as [`make_hard_instance`] but accepts any positive
/// gap, as the simulation studies use `ε` up to `1/(4K)` and beyond.
pub fn make_experiment_instance(spec: &HardInstanceSpec) -> Result<MnlInstance> {
    build(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignKind {
    FixedLb,
    RandomizedExp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssortmentDesign {
    pub assortments: Vec<Assortment>,
    pub kind: DesignKind,
}

impl AssortmentDesign {
    pub fn len(&self) -> usize {
        self.assortments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assortments.is_empty()
    }

    /// One JSON array of ids per line.
    pub fn write_jsonl<W: Write>(&self, mut writer: W) -> Result<()> {
        for s in &self.assortments {
            serde_json::to_writer(&mut writer, s)?;
            writer.write_all(b"\n")?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(reader: R, kind: DesignKind) -> Result<Self> {
        let mut assortments = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let s: Assortment = serde_json::from_str(&line)
                .map_err(|e| domain(format!("design line {}: {e}", lineno + 1)))?;
            assortments.push(s);
        }
        Ok(Self { assortments, kind })
    }
}

/// `S₁^(ℓ) = {ℓ, 4K+1, …, 5K-1}`: item `ℓ` alongside the first `K-1` decoys.
pub fn fixed_lb_assortment(capacity: usize, ell: usize) -> Assortment {
    let mut items = Vec::with_capacity(capacity);
    items.push(ell);
    items.extend(4 * capacity + 1..5 * capacity);
    Assortment(items)
}

/// `4K·n_min` assortments; the `i`-th is `{⌈i/n_min⌉, 4K+1, …, 5K-1}`.
pub fn make_fixed_lb_design(n_items: usize, capacity: usize, n_min: usize) -> Result<AssortmentDesign> {
    if capacity == 0 || n_items < 5 * capacity {
        return Err(domain(format!(
            "fixed design needs N >= 5K, got N = {n_items}, K = {capacity}"
        )));
    }
    if n_min == 0 {
        return Err(domain("n_min must be at least 1"));
    }
    let assortments = (1..=4 * capacity)
        .flat_map(|ell| std::iter::repeat_n(fixed_lb_assortment(capacity, ell), n_min))
        .collect();
    Ok(AssortmentDesign {
        assortments,
        kind: DesignKind::FixedLb,
    })
}

/// For each `ℓ ∈ [4K]`, `reps` assortments `{ℓ} ∪ M` where `M` is a uniform
/// `(K-1)`-subset of `[N] \ [4K]`. Ordered by `ℓ`, then repetition.
pub fn make_randomized_design<R: Rng + ?Sized>(
    n_items: usize,
    capacity: usize,
    reps: usize,
    rng: &mut R,
) -> Result<AssortmentDesign> {
    make_randomized_design_over(n_items, capacity, 4 * capacity, reps, rng)
}

/// [`make_randomized_design`] with the anchored items restricted to
/// `ℓ ∈ [observed]`; items in `observed+1..=4K` are then never offered.
pub fn make_randomized_design_over<R: Rng + ?Sized>(
    n_items: usize,
    capacity: usize,
    observed: usize,
    reps: usize,
    rng: &mut R,
) -> Result<AssortmentDesign> {
    let block = 4 * capacity;
    if capacity == 0 || n_items < block || n_items - block < capacity - 1 {
        return Err(domain(format!(
            "randomized design needs N - 4K >= K - 1, got N = {n_items}, K = {capacity}"
        )));
    }
    if observed == 0 || observed > block {
        return Err(domain(format!(
            "anchored block must lie in 1..={block}, got {observed}"
        )));
    }
    let filler_count = capacity - 1;
    let mut pool: Vec<usize> = (block + 1..=n_items).collect();
    let mut assortments = Vec::with_capacity(observed * reps);
    for ell in 1..=observed {
        for _ in 0..reps {
            for i in 0..filler_count {
                let j = rng.gen_range(i..pool.len());
                pool.swap(i, j);
            }
            let mut items = Vec::with_capacity(capacity);
            items.push(ell);
            items.extend_from_slice(&pool[..filler_count]);
            items[1..].sort_unstable();
            assortments.push(Assortment(items));
        }
    }
    Ok(AssortmentDesign {
        assortments,
        kind: DesignKind::RandomizedExp,
    })
}

/// One independent MNL draw per assortment, in design order.
pub fn sample_dataset<R: Rng + ?Sized>(
    instance: &MnlInstance,
    design: &AssortmentDesign,
    rng: &mut R,
) -> Result<OfflineDataset> {
    design
        .assortments
        .iter()
        .map(|s| {
            s.validate(instance.n_items())?;
            let choice = sample_choice_with(instance.attractions(), s.items(), rng);
            Ok(ChoiceRecord {
                assortment: s.clone(),
                choice,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(OfflineDataset::new)
}

/// Exact `D(Q_a(S) ‖ Q_b(S)) = Σ_{j∈S₊} p_j log(p_j / q_j)` between the choice
/// distributions induced on `s`. Infinite when `q_j = 0 < p_j` for some `j`.
pub fn kl_between_instances(v_a: &[f64], v_b: &[f64], s: &Assortment) -> Result<f64> {
    let mut kl = 0.0;
    for item in std::iter::once(NO_PURCHASE).chain(s.items().iter().copied()) {
        let p = choice_probability_with(v_a, s, item)?;
        let q = choice_probability_with(v_b, s, item)?;
        if p == 0.0 {
            continue;
        }
        if q == 0.0 {
            return Ok(f64::INFINITY);
        }
        kl += p * (p / q).ln();
    }
    Ok(kl.max(0.0))
}
