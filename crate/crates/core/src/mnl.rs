//! Ground-truth multinomial logit model.
//!
//! Items are identified by 1-based ids; id `0` is the no-purchase option,
//! whose attraction is fixed at 1 and never stored. Attraction and reward
//! vectors are dense and indexed by `id - 1`.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Id of the no-purchase option.
pub const NO_PURCHASE: usize = 0;

/// A set of offered items, stored as a strictly increasing list of ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Assortment(pub(crate) Vec<usize>);

impl Assortment {
    /// Builds an assortment from ids that are already strictly increasing.
    pub fn new(items: Vec<usize>) -> Result<Self> {
        if items.first() == Some(&NO_PURCHASE) {
            return Err(domain("assortments cannot contain the no-purchase id 0"));
        }
        if items.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain(format!(
                "assortment ids must be strictly increasing, got {items:?}"
            )));
        }
        Ok(Self(items))
    }

    /// Sorts the ids first; duplicates are still rejected.
    pub fn from_unsorted(mut items: Vec<usize>) -> Result<Self> {
        items.sort_unstable();
        Self::new(items)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn items(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: usize) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    /// Checks every id against the item universe `1..=n_items`.
    pub fn validate(&self, n_items: usize) -> Result<()> {
        match self.0.last() {
            Some(&max) if max > n_items => Err(domain(format!(
                "item {max} is outside the universe 1..={n_items}"
            ))),
            _ => Ok(()),
        }
    }

    /// Symmetric-difference cardinality `|A ∪ B| - |A ∩ B|`.
    pub fn symmetric_difference(&self, other: &Assortment) -> usize {
        let common = self.intersection_size(other);
        self.len() + other.len() - 2 * common
    }

    pub fn intersection_size(&self, other: &Assortment) -> usize {
        self.0.iter().filter(|i| other.contains(**i)).count()
    }
}

impl TryFrom<Vec<usize>> for Assortment {
    type Error = Error;

    fn try_from(items: Vec<usize>) -> Result<Self> {
        Self::new(items)
    }
}

impl From<Assortment> for Vec<usize> {
    fn from(s: Assortment) -> Self {
        s.0
    }
}

impl fmt::Display for Assortment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Deserialize)]
struct RawInstance {
    n_items: usize,
    capacity: usize,
    attractions: Vec<f64>,
    rewards: Vec<f64>,
    v_max: f64,
}

/// Ground-truth problem: attraction and reward per item plus the capacity `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct MnlInstance {
    n_items: usize,
    capacity: usize,
    attractions: Vec<f64>,
    rewards: Vec<f64>,
    v_max: f64,
}

impl MnlInstance {
    /// `v_max` defaults to the largest attraction when `None`.
    pub fn new(
        capacity: usize,
        attractions: Vec<f64>,
        rewards: Vec<f64>,
        v_max: Option<f64>,
    ) -> Result<Self> {
        let n_items = attractions.len();
        let largest = attractions.iter().copied().fold(0.0_f64, f64::max);
        Self::validated(RawInstance {
            n_items,
            capacity,
            attractions,
            rewards,
            v_max: v_max.unwrap_or(largest),
        })
    }

    fn validated(raw: RawInstance) -> Result<Self> {
        let RawInstance {
            n_items,
            capacity,
            attractions,
            rewards,
            v_max,
        } = raw;
        if n_items == 0 {
            return Err(domain("an instance needs at least one item"));
        }
        if attractions.len() != n_items || rewards.len() != n_items {
            return Err(domain(format!(
                "expected {n_items} attractions and rewards, got {} and {}",
                attractions.len(),
                rewards.len()
            )));
        }
        if capacity == 0 || capacity > n_items {
            return Err(domain(format!(
                "capacity must lie in 1..={n_items}, got {capacity}"
            )));
        }
        check_attractions(&attractions)?;
        if let Some((i, r)) = rewards
            .iter()
            .enumerate()
            .find(|(_, r)| !(0.0..=1.0).contains(*r))
        {
            return Err(domain(format!("reward of item {} is {r}, outside [0,1]", i + 1)));
        }
        let largest = attractions.iter().copied().fold(0.0_f64, f64::max);
        if !(v_max >= largest) || !v_max.is_finite() {
            return Err(domain(format!(
                "v_max {v_max} is below the largest attraction {largest}"
            )));
        }
        Ok(Self {
            n_items,
            capacity,
            attractions,
            rewards,
            v_max,
        })
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn attractions(&self) -> &[f64] {
        &self.attractions
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    /// Attraction of `item`; the no-purchase option has attraction 1.
    pub fn attraction(&self, item: usize) -> f64 {
        if item == NO_PURCHASE {
            1.0
        } else {
            self.attractions[item - 1]
        }
    }

    /// Same rewards and capacity, different attraction vector.
    pub fn with_attractions(&self, attractions: Vec<f64>) -> Result<Self> {
        Self::new(self.capacity, attractions, self.rewards.clone(), None)
    }
}

impl TryFrom<RawInstance> for MnlInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        Self::validated(raw)
    }
}

pub(crate) fn check_attractions(attractions: &[f64]) -> Result<()> {
    match attractions
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
    {
        Some((i, v)) => Err(domain(format!(
            "attraction of item {} is {v}; attractions must be finite and non-negative",
            i + 1
        ))),
        None => Ok(()),
    }
}

fn check_ids(s: &Assortment, len: usize) -> Result<()> {
    s.validate(len)
}

/// One observed customer: the offered assortment and the chosen id (0 = no purchase).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceRecord {
    pub assortment: Assortment,
    pub choice: usize,
}

impl ChoiceRecord {
    pub fn new(assortment: Assortment, choice: usize) -> Result<Self> {
        let record = Self { assortment, choice };
        record.check_choice()?;
        Ok(record)
    }

    fn check_choice(&self) -> Result<()> {
        if self.choice != NO_PURCHASE && !self.assortment.contains(self.choice) {
            return Err(domain(format!(
                "choice {} is not in assortment {}",
                self.choice, self.assortment
            )));
        }
        Ok(())
    }

    pub fn validate(&self, n_items: usize) -> Result<()> {
        self.assortment.validate(n_items)?;
        self.check_choice()
    }
}

/// The full observational input: an ordered list of choice records.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OfflineDataset {
    pub records: Vec<ChoiceRecord>,
}

impl OfflineDataset {
    pub fn new(records: Vec<ChoiceRecord>) -> Self {
        Self { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn validate(&self, n_items: usize) -> Result<()> {
        self.records.iter().try_for_each(|r| r.validate(n_items))
    }

    /// Largest item id referenced by any assortment, or 0 for an empty dataset.
    pub fn max_item(&self) -> usize {
        self.records
            .iter()
            .filter_map(|r| r.assortment.items().last().copied())
            .max()
            .unwrap_or(0)
    }

    /// Reads one JSON record per line; blank lines are skipped.
    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self> {
        let mut records = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: ChoiceRecord = serde_json::from_str(&line).map_err(|e| {
                domain(format!("dataset line {}: {e}", lineno + 1))
            })?;
            record
                .check_choice()
                .map_err(|e| domain(format!("dataset line {}: {e}", lineno + 1)))?;
            records.push(record);
        }
        Ok(Self { records })
    }

    pub fn write_jsonl<W: Write>(&self, mut writer: W) -> Result<()> {
        for record in &self.records {
            serde_json::to_writer(&mut writer, record)?;
            writer.write_all(b"\n")?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Per-item coverage counts `n_i` of a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageStats {
    pub item_counts: Vec<u64>,
    exact_counts: HashMap<Assortment, u64>,
}

impl CoverageStats {
    /// `n_i` for a 1-based item id.
    pub fn count(&self, item: usize) -> u64 {
        self.item_counts[item - 1]
    }

    /// `min_{i∈S} n_i`; `None` for the empty set.
    pub fn min_over_set(&self, s: &Assortment) -> Option<u64> {
        s.items().iter().map(|&i| self.count(i)).min()
    }

    /// Number of records whose assortment equals `s` exactly.
    pub fn exact_count(&self, s: &Assortment) -> u64 {
        self.exact_counts.get(s).copied().unwrap_or(0)
    }
}

/// Counts, per item, how many records offered it.
pub fn coverage(dataset: &OfflineDataset, n_items: usize) -> Result<CoverageStats> {
    let mut item_counts = vec![0u64; n_items];
    let mut exact_counts = HashMap::new();
    for record in &dataset.records {
        check_ids(&record.assortment, n_items)?;
        for &i in record.assortment.items() {
            item_counts[i - 1] += 1;
        }
        *exact_counts.entry(record.assortment.clone()).or_insert(0) += 1;
    }
    Ok(CoverageStats {
        item_counts,
        exact_counts,
    })
}

fn attraction_sum(attractions: &[f64], s: &Assortment) -> f64 {
    s.items().iter().map(|&i| attractions[i - 1]).sum()
}

/// MNL choice probability `v_i / (1 + Σ_{j∈S} v_j)` computed from a raw attraction vector.
pub fn choice_probability_with(attractions: &[f64], s: &Assortment, item: usize) -> Result<f64> {
    check_ids(s, attractions.len())?;
    if item > attractions.len() {
        return Err(domain(format!(
            "item {item} is outside the universe 0..={}",
            attractions.len()
        )));
    }
    let denom = 1.0 + attraction_sum(attractions, s);
    Ok(if item == NO_PURCHASE {
        1.0 / denom
    } else if s.contains(item) {
        attractions[item - 1] / denom
    } else {
        0.0
    })
}

/// Probability that a customer offered `s` chooses `item` (0 = no purchase).
pub fn choice_probability(instance: &MnlInstance, s: &Assortment, item: usize) -> Result<f64> {
    choice_probability_with(instance.attractions(), s, item)
}

/// Expected revenue `Σ_{i∈S} r_i v_i / (1 + Σ_{j∈S} v_j)`; zero for the empty set.
pub fn expected_revenue(attractions: &[f64], rewards: &[f64], s: &Assortment) -> Result<f64> {
    check_ids(s, attractions.len().min(rewards.len()))?;
    let mut num = 0.0;
    let mut denom = 1.0;
    for &i in s.items() {
        let v = attractions[i - 1];
        if !(v >= 0.0) {
            return Err(domain(format!("attraction of item {i} is negative ({v})")));
        }
        num += rewards[i - 1] * v;
        denom += v;
    }
    Ok(num / denom)
}

/// Revenue shortfall `R(S*) - R(S)` under the instance's true parameters.
pub fn suboptimality(instance: &MnlInstance, s: &Assortment, s_star: &Assortment) -> Result<f64> {
    let best = expected_revenue(instance.attractions(), instance.rewards(), s_star)?;
    let got = expected_revenue(instance.attractions(), instance.rewards(), s)?;
    Ok(best - got)
}

/// Draws one choice from `s ∪ {0}` with MNL probabilities.
pub fn sample_choice<R: Rng + ?Sized>(instance: &MnlInstance, s: &Assortment, rng: &mut R) -> usize {
    sample_choice_with(instance.attractions(), s.items(), rng)
}

pub(crate) fn sample_choice_with<R: Rng + ?Sized>(
    attractions: &[f64],
    items: &[usize],
    rng: &mut R,
) -> usize {
    let total: f64 = items.iter().map(|&i| attractions[i - 1]).sum();
    let u = rng.gen::<f64>() * (1.0 + total);
    let mut acc = 0.0;
    for &i in items {
        acc += attractions[i - 1];
        if u < acc {
            return i;
        }
    }
    NO_PURCHASE
}
