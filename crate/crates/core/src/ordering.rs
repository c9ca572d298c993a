//! Data model for repeated orderings: full orderings of a fixed item set,
//! partial draws from a (possibly varying) universe, and shrinking series.
//!
//! Items are always stored by index into a canonical item list. The
//! canonical order is numeric when every label parses as an integer and
//! lexicographic otherwise; every place that iterates over items (cascade
//! order, ranking enumeration, report output) uses it.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Absolute tolerance for the mean-zero / unit-norm checks on user scores.
pub const SCORE_TOLERANCE: f64 = 1e-9;

/// Label of a single item.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ItemId(String);

impl ItemId {
    pub fn new(label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        let trimmed = label.trim();
        if trimmed.is_empty() {
            return Err(Error::InvalidInput("empty item label".into()));
        }
        Ok(ItemId(trimmed.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Sorts labels into the canonical order used throughout the crate.
pub fn canonical_sort(items: &mut [ItemId]) {
    let numeric: Option<Vec<i64>> = items.iter().map(|i| i.0.parse::<i64>().ok()).collect();
    match numeric {
        Some(_) => items.sort_by_key(|i| i.0.parse::<i64>().unwrap()),
        None => items.sort_by(|a, b| a.0.cmp(&b.0)),
    }
}

/// Labels `1..=k`, already in canonical order.
pub fn numbered_items(k: usize) -> Arc<[ItemId]> {
    (1..=k).map(|i| ItemId(i.to_string())).collect()
}

/// One ordering: item indices listed in position order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ItemOrdering(pub Vec<usize>);

impl ItemOrdering {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 1-based position of every item, indexed by item.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (p, &item) in self.0.iter().enumerate() {
            pos[item] = p + 1;
        }
        pos
    }
}

/// N full orderings of the same K items.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingSet {
    items: Arc<[ItemId]>,
    /// Row-major N x K: `flat[i * k + p]` is the item at position `p + 1` of ordering `i`.
    flat: Vec<usize>,
    agent_ids: Option<Vec<String>>,
}

impl OrderingSet {
    /// Builds a set from rows of labels. The item list is taken from the
    /// first row and put in canonical order. Errors carry 1-based row and
    /// column numbers within `rows`.
    pub fn from_labels<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::InvalidInput("no orderings".into()))?;
        let mut items = Vec::with_capacity(first.len());
        let mut seen = HashSet::new();
        for (col, cell) in first.iter().enumerate() {
            let cell = cell.as_ref().trim();
            if cell.is_empty() {
                return Err(Error::MissingItem {
                    row: 1,
                    column: col + 1,
                });
            }
            if !seen.insert(cell.to_string()) {
                return Err(Error::DuplicateItem {
                    row: 1,
                    column: col + 1,
                    item: cell.to_string(),
                });
            }
            items.push(ItemId(cell.to_string()));
        }
        canonical_sort(&mut items);
        Self::from_labels_with_items(items.into(), rows)
    }

    /// Like [`OrderingSet::from_labels`] with the study's item list fixed up front.
    pub fn from_labels_with_items<S: AsRef<str>>(
        items: Arc<[ItemId]>,
        rows: &[Vec<S>],
    ) -> Result<Self> {
        let k = items.len();
        if k < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 items, got {k}")));
        }
        if rows.is_empty() {
            return Err(Error::InvalidInput("no orderings".into()));
        }
        let index: HashMap<&str, usize> =
            items.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut flat = Vec::with_capacity(rows.len() * k);
        let mut seen = vec![usize::MAX; k];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::RaggedRow {
                    row: r + 1,
                    expected: k,
                    found: row.len(),
                });
            }
            for (col, cell) in row.iter().enumerate() {
                let label = cell.as_ref().trim();
                if label.is_empty() {
                    return Err(Error::MissingItem {
                        row: r + 1,
                        column: col + 1,
                    });
                }
                let &item = index.get(label).ok_or_else(|| Error::UnknownItem {
                    row: r + 1,
                    column: col + 1,
                    item: label.to_string(),
                })?;
                if seen[item] == r {
                    return Err(Error::DuplicateItem {
                        row: r + 1,
                        column: col + 1,
                        item: label.to_string(),
                    });
                }
                seen[item] = r;
                flat.push(item);
            }
        }
        Ok(OrderingSet {
            items,
            flat,
            agent_ids: None,
        })
    }

    /// Builds a set over items labelled `1..=k` from index rows.
    pub fn from_indices(k: usize, rows: &[Vec<usize>]) -> Result<Self> {
        let labels: Vec<Vec<String>> = rows
            .iter()
            .map(|r| r.iter().map(|&i| (i + 1).to_string()).collect())
            .collect();
        Self::from_labels_with_items(numbered_items(k), &labels)
    }

    /// Assembles a set from a validated flat buffer. Used on hot paths
    /// (null simulation) where every row is known to be a permutation.
    pub(crate) fn from_flat_unchecked(items: Arc<[ItemId]>, flat: Vec<usize>) -> Self {
        debug_assert!(!items.is_empty() && flat.len() % items.len() == 0);
        OrderingSet {
            items,
            flat,
            agent_ids: None,
        }
    }

    pub fn with_agent_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.n() {
            return Err(Error::InvalidInput(format!(
                "{} agent ids for {} orderings",
                ids.len(),
                self.n()
            )));
        }
        self.agent_ids = Some(ids);
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.items.len()
    }

    pub fn n(&self) -> usize {
        self.flat.len() / self.items.len()
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub(crate) fn shared_items(&self) -> Arc<[ItemId]> {
        Arc::clone(&self.items)
    }

    pub fn agent_ids(&self) -> Option<&[String]> {
        self.agent_ids.as_deref()
    }

    pub fn item_index(&self, item: &ItemId) -> Option<usize> {
        self.items.iter().position(|i| i == item)
    }

    /// Item indices of ordering `i`, in position order.
    pub fn ordering(&self, i: usize) -> &[usize] {
        let k = self.k();
        &self.flat[i * k..(i + 1) * k]
    }

    pub fn orderings(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.flat.chunks_exact(self.k())
    }

    pub(crate) fn flat(&self) -> &[usize] {
        &self.flat
    }

    /// Sum of 1-based positions of each item over all orderings.
    pub fn rank_sums(&self) -> Vec<u64> {
        rank_sums(self.k(), &self.flat)
    }

    /// Concatenation of two sets over the same items.
    pub fn concat(&self, other: &OrderingSet) -> Result<OrderingSet> {
        if self.items != other.items {
            return Err(Error::InvalidInput("item sets differ".into()));
        }
        let mut flat = self.flat.clone();
        flat.extend_from_slice(&other.flat);
        Ok(OrderingSet::from_flat_unchecked(self.shared_items(), flat))
    }
}

pub(crate) fn rank_sums(k: usize, flat: &[usize]) -> Vec<u64> {
    let mut sums = vec![0u64; k];
    for row in flat.chunks_exact(k) {
        for (p, &item) in row.iter().enumerate() {
            sums[item] += (p + 1) as u64;
        }
    }
    sums
}

/// Item-by-position counts plus the sparse tally of whole permutations.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossTab {
    /// `counts[k][p]`: times item `k` sits at position `p + 1`.
    pub counts: Vec<Vec<u64>>,
    /// Observed permutations (item indices in position order) and how often each occurs.
    pub perm_counts: BTreeMap<Vec<usize>, u64>,
    pub n: u64,
}

impl CrossTab {
    pub fn k(&self) -> usize {
        self.counts.len()
    }

    /// Σ_p p·C_{k,p} for every item.
    pub fn rank_sums(&self) -> Vec<u64> {
        self.counts
            .iter()
            .map(|row| row.iter().enumerate().map(|(p, &c)| (p as u64 + 1) * c).sum())
            .collect()
    }
}

pub fn cross_tabulate(set: &OrderingSet) -> CrossTab {
    let k = set.k();
    let mut counts = vec![vec![0u64; k]; k];
    let mut perm_counts = BTreeMap::new();
    for row in set.orderings() {
        for (p, &item) in row.iter().enumerate() {
            counts[item][p] += 1;
        }
        *perm_counts.entry(row.to_vec()).or_insert(0) += 1;
    }
    CrossTab {
        counts,
        perm_counts,
        n: set.n() as u64,
    }
}

/// Deletes `item` from every ordering, closing up the gap.
pub fn remove_item(set: &OrderingSet, item: &ItemId) -> Result<OrderingSet> {
    let gone = set
        .item_index(item)
        .ok_or_else(|| Error::UnknownItemId(item.to_string()))?;
    Ok(remove_index(set, gone))
}

pub(crate) fn remove_index(set: &OrderingSet, gone: usize) -> OrderingSet {
    let items: Arc<[ItemId]> = set
        .items
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != gone)
        .map(|(_, id)| id.clone())
        .collect();
    let flat = set
        .flat
        .iter()
        .filter(|&&i| i != gone)
        .map(|&i| if i > gone { i - 1 } else { i })
        .collect();
    OrderingSet::from_flat_unchecked(items, flat)
}

/// Ordered partition of the items; earlier tiers are preferred, items
/// within a tier are tied.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PreferenceRanking {
    tiers: Vec<Vec<usize>>,
    k: usize,
}

impl PreferenceRanking {
    pub fn new(k: usize, tiers: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; k];
        for tier in &tiers {
            if tier.is_empty() {
                return Err(Error::InvalidRanking("empty tier".into()));
            }
            for &item in tier {
                if item >= k {
                    return Err(Error::InvalidRanking(format!(
                        "item index {item} out of range for {k} items"
                    )));
                }
                if std::mem::replace(&mut seen[item], true) {
                    return Err(Error::InvalidRanking(format!(
                        "item index {item} listed twice"
                    )));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidRanking(format!(
                "item index {missing} is not ranked"
            )));
        }
        Ok(PreferenceRanking { tiers, k })
    }

    /// Strict ranking following the given item sequence.
    pub fn strict(order: &[usize]) -> Result<Self> {
        Self::new(order.len(), order.iter().map(|&i| vec![i]).collect())
    }

    /// Parses `A,B>C>D,E`: `>` separates tiers, `,` joins tied items.
    pub fn parse(text: &str, items: &[ItemId]) -> Result<Self> {
        let mut tiers = Vec::new();
        for tier_text in text.split('>') {
            let mut tier = Vec::new();
            for label in tier_text.split(',') {
                let label = label.trim();
                if label.is_empty() {
                    return Err(Error::InvalidRanking(format!("empty label in `{text}`")));
                }
                let idx = items
                    .iter()
                    .position(|i| i.as_str() == label)
                    .ok_or_else(|| Error::InvalidRanking(format!("unknown item `{label}`")))?;
                tier.push(idx);
            }
            tiers.push(tier);
        }
        Self::new(items.len(), tiers)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn tiers(&self) -> &[Vec<usize>] {
        &self.tiers
    }

    pub fn is_strict(&self) -> bool {
        self.tiers.iter().all(|t| t.len() == 1)
    }

    /// Tier index of every item.
    pub fn tier_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for (t, tier) in self.tiers.iter().enumerate() {
            for &item in tier {
                out[item] = t;
            }
        }
        out
    }

    /// Rank of every item with ties given the average of the ranks they span.
    pub fn tie_averaged_ranks(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.k];
        let mut before = 0usize;
        for tier in &self.tiers {
            let avg = before as f64 + (tier.len() as f64 + 1.0) / 2.0;
            for &item in tier {
                out[item] = avg;
            }
            before += tier.len();
        }
        out
    }

    /// Renders the ranking with the given labels, e.g. `A,B>C`.
    pub fn display_with(&self, items: &[ItemId]) -> String {
        self.tiers
            .iter()
            .map(|t| {
                t.iter()
                    .map(|&i| items[i].as_str())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(">")
    }
}

/// Scores with mean zero and unit sum of squares.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    scores: Vec<f64>,
}

impl ScoreVector {
    /// Accepts scores that are already admissible to within [`SCORE_TOLERANCE`].
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.len() < 2 || scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::NotAdmissible {
                mean: f64::NAN,
                sum_sq: f64::NAN,
            });
        }
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let sum_sq = scores.iter().map(|s| s * s).sum::<f64>();
        if mean.abs() > SCORE_TOLERANCE || (sum_sq - 1.0).abs() > SCORE_TOLERANCE {
            return Err(Error::NotAdmissible { mean, sum_sq });
        }
        Ok(ScoreVector { scores })
    }

    /// Demeans and scales `raw` to unit norm. Fails on a constant vector.
    pub fn from_raw(raw: &[f64]) -> Result<Self> {
        let scores = normalize(raw).ok_or_else(|| {
            Error::InvalidInput("constant score vector cannot be normalized".into())
        })?;
        Ok(ScoreVector { scores })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

pub(crate) fn normalize(raw: &[f64]) -> Option<Vec<f64>> {
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    let centered: Vec<f64> = raw.iter().map(|r| r - mean).collect();
    let norm = centered.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(norm > 1e-12 * (1.0 + mean.abs())) {
        return None;
    }
    Some(centered.into_iter().map(|c| c / norm).collect())
}

/// Scaled, demeaned tie-averaged ranks: the preferred end gets negative scores.
pub fn scores_from_ranking(ranking: &PreferenceRanking) -> Result<ScoreVector> {
    let ranks = ranking.tie_averaged_ranks();
    normalize(&ranks)
        .map(|scores| ScoreVector { scores })
        .ok_or_else(|| Error::InvalidRanking("all items tied; no admissible scores".into()))
}

/// Draws of `d` distinct balls, each from its own universe `1..=universe`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialDrawSet {
    draws: Vec<Draw>,
    draw_len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Draw {
    pub universe: usize,
    /// Ball numbers (1-based) in the order drawn.
    pub balls: Vec<usize>,
}

impl PartialDrawSet {
    /// Errors carry 1-based draw number and 1-based position.
    pub fn new(draws: Vec<Draw>) -> Result<Self> {
        let draw_len = draws
            .first()
            .map(|d| d.balls.len())
            .ok_or_else(|| Error::InvalidInput("no draws".into()))?;
        if draw_len == 0 {
            return Err(Error::InvalidInput("empty draw".into()));
        }
        for (r, draw) in draws.iter().enumerate() {
            if draw.balls.len() != draw_len {
                return Err(Error::RaggedRow {
                    row: r + 1,
                    expected: draw_len,
                    found: draw.balls.len(),
                });
            }
            if draw.universe < draw_len {
                return Err(Error::BadCell {
                    row: r + 1,
                    column: 0,
                    message: format!(
                        "universe of {} balls cannot supply {draw_len} draws",
                        draw.universe
                    ),
                });
            }
            for (p, &ball) in draw.balls.iter().enumerate() {
                if ball == 0 || ball > draw.universe {
                    return Err(Error::UnknownItem {
                        row: r + 1,
                        column: p + 1,
                        item: ball.to_string(),
                    });
                }
                if draw.balls[..p].contains(&ball) {
                    return Err(Error::DuplicateItem {
                        row: r + 1,
                        column: p + 1,
                        item: ball.to_string(),
                    });
                }
            }
        }
        Ok(PartialDrawSet { draws, draw_len })
    }

    pub fn draws(&self) -> &[Draw] {
        &self.draws
    }

    pub fn draw_len(&self) -> usize {
        self.draw_len
    }

    pub fn n(&self) -> usize {
        self.draws.len()
    }

    /// Largest universe across draws; balls are numbered `1..=max_universe`.
    pub fn max_universe(&self) -> usize {
        self.draws.iter().map(|d| d.universe).max().unwrap_or(0)
    }
}

/// Rounds over a shrinking item set; each round drops exactly one item.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkingSeries {
    items: Arc<[ItemId]>,
    rounds: Vec<Vec<usize>>,
}

impl ShrinkingSeries {
    /// The first row fixes the item set. Errors carry 1-based row and column.
    pub fn from_labels<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::InvalidInput("no rounds".into()))?;
        let mut items = Vec::with_capacity(first.len());
        for (col, cell) in first.iter().enumerate() {
            let label = cell.as_ref().trim();
            if label.is_empty() {
                return Err(Error::MissingItem {
                    row: 1,
                    column: col + 1,
                });
            }
            let id = ItemId(label.to_string());
            if items.contains(&id) {
                return Err(Error::DuplicateItem {
                    row: 1,
                    column: col + 1,
                    item: label.to_string(),
                });
            }
            items.push(id);
        }
        canonical_sort(&mut items);
        let items: Arc<[ItemId]> = items.into();
        let index: HashMap<&str, usize> =
            items.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut rounds = Vec::with_capacity(rows.len());
        for (r, row) in rows.iter().enumerate() {
            let mut round = Vec::with_capacity(row.len());
            for (col, cell) in row.iter().enumerate() {
                let label = cell.as_ref().trim();
                if label.is_empty() {
                    return Err(Error::MissingItem {
                        row: r + 1,
                        column: col + 1,
                    });
                }
                let &item = index.get(label).ok_or_else(|| Error::UnknownItem {
                    row: r + 1,
                    column: col + 1,
                    item: label.to_string(),
                })?;
                if round.contains(&item) {
                    return Err(Error::DuplicateItem {
                        row: r + 1,
                        column: col + 1,
                        item: label.to_string(),
                    });
                }
                round.push(item);
            }
            rounds.push(round);
        }
        Self::new(items, rounds)
    }

    pub fn new(items: Arc<[ItemId]>, rounds: Vec<Vec<usize>>) -> Result<Self> {
        if rounds.is_empty() {
            return Err(Error::InvalidInput("no rounds".into()));
        }
        let k = items.len();
        let mut previous: Option<Vec<bool>> = None;
        for (r, round) in rounds.iter().enumerate() {
            let mut present = vec![false; k];
            for (p, &item) in round.iter().enumerate() {
                if item >= k || present[item] {
                    return Err(Error::DuplicateItem {
                        row: r + 1,
                        column: p + 1,
                        item: item.to_string(),
                    });
                }
                present[item] = true;
            }
            if round.len() < 2 {
                return Err(Error::InvalidInput(format!(
                    "round {} has fewer than two items",
                    r + 1
                )));
            }
            match &previous {
                None if round.len() != k => {
                    return Err(Error::RaggedRow {
                        row: r + 1,
                        expected: k,
                        found: round.len(),
                    })
                }
                Some(prev) => {
                    let subset = present.iter().zip(prev).all(|(&now, &before)| !now || before);
                    let prev_len = prev.iter().filter(|&&b| b).count();
                    if !subset || round.len() + 1 != prev_len {
                        return Err(Error::NonNestedRound { row: r + 1 });
                    }
                }
                None => {}
            }
            previous = Some(present);
        }
        Ok(ShrinkingSeries { items, rounds })
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn k(&self) -> usize {
        self.items.len()
    }

    /// Item indices of each round in position order.
    pub fn rounds(&self) -> &[Vec<usize>] {
        &self.rounds
    }
}
