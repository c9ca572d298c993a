//! Untargeted tests that only look at the item-by-position cross-tab:
//! Max LC (free and strict) and the mean-rank-difference Rank Test.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mc::{mc_pvalue, uniform_rows, McConfig};
use crate::ordering::{rank_sums, CrossTab, OrderingSet, PreferenceRanking, ScoreVector};
use crate::targeted::concordance_scale;
use crate::result::TestResult;

/// Default ceiling on the number of preference rankings enumerated.
pub const DEFAULT_STRICT_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxLcMode {
    /// Any admissible score vector; the optimum is closed form.
    Free,
    /// Only scores derived from some preference ranking (ties allowed).
    Strict { cap: u128 },
}

impl MaxLcMode {
    pub fn strict() -> Self {
        MaxLcMode::Strict {
            cap: DEFAULT_STRICT_CAP,
        }
    }
}

/// 2α_k − N(K+1): twice the centred rank sum, kept in integers.
fn doubled_centred(rank_sums: &[u64], n: usize) -> Vec<i128> {
    let k = rank_sums.len() as i128;
    rank_sums
        .iter()
        .map(|&a| 2 * a as i128 - n as i128 * (k + 1))
        .collect()
}

/// Score vector maximizing L: proportional to α_k − N(K+1)/2.
pub fn optimal_score_vector(tab: &CrossTab) -> Result<ScoreVector> {
    let centred = doubled_centred(&tab.rank_sums(), tab.n as usize);
    if centred.iter().all(|&c| c == 0) {
        return Err(Error::DegenerateScores);
    }
    let raw: Vec<f64> = centred.iter().map(|&c| c as f64).collect();
    ScoreVector::from_raw(&raw)
}

/// L* over all admissible scores, i.e. ‖α − N(K+1)/2‖ / √(N·K(K+1)/12).
pub fn free_max_concordance(rank_sums: &[u64], n: usize) -> f64 {
    let sq: i128 = doubled_centred(rank_sums, n).iter().map(|c| c * c).sum();
    (sq as f64).sqrt() / 2.0 / concordance_scale(n, rank_sums.len())
}

/// Σ_{k=1..K} k!·S(K, k): number of preference rankings with ties allowed.
pub fn ranking_count(k: usize, allow_ties: bool) -> u128 {
    if !allow_ties {
        return (1..=k as u128).try_fold(1u128, |acc, x| acc.checked_mul(x)).unwrap_or(u128::MAX);
    }
    // ordered Bell numbers: a(n) = Σ_{j=1..n} C(n, j)·a(n−j)
    let mut a = vec![1u128];
    for m in 1..=k {
        let mut total = 0u128;
        let mut binom = 1u128;
        for j in 1..=m {
            binom = binom * (m - j + 1) as u128 / j as u128;
            total = total.saturating_add(binom.saturating_mul(a[m - j]));
        }
        a.push(total);
    }
    a[k]
}

/// Every preference ranking of `k` items, without duplicates.
///
/// Rankings come grouped by number of tiers (1, 2, ..., K); within a group
/// the tier-assignment vectors (tier index of item 0, item 1, ...) are in
/// lexicographic order. Strict rankings are the K! permutations in
/// lexicographic order.
pub fn enumerate_preference_rankings(
    k: usize,
    allow_ties: bool,
    cap: u128,
) -> Result<Vec<PreferenceRanking>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need K >= 2, got {k}")));
    }
    let count = ranking_count(k, allow_ties);
    if count > cap {
        return Err(Error::CapExceeded {
            what: format!("enumerating preference rankings of {k} items"),
            count,
            cap,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    if allow_ties {
        let mut assign = vec![0usize; k];
        let mut used = Vec::new();
        for tiers in 1..=k {
            used.clear();
            used.resize(tiers, 0usize);
            surjections(0, tiers, &mut assign, &mut used, &mut out);
        }
    } else {
        let mut perm: Vec<usize> = (0..k).collect();
        loop {
            out.push(PreferenceRanking::strict(&perm)?);
            if !next_permutation(&mut perm) {
                break;
            }
        }
    }
    Ok(out)
}

fn surjections(
    pos: usize,
    tiers: usize,
    assign: &mut [usize],
    used: &mut [usize],
    out: &mut Vec<PreferenceRanking>,
) {
    let k = assign.len();
    if pos == k {
        let mut groups = vec![Vec::new(); tiers];
        for (item, &t) in assign.iter().enumerate() {
            groups[t].push(item);
        }
        out.push(PreferenceRanking::new(k, groups).expect("surjective assignment"));
        return;
    }
    let uncovered = used.iter().filter(|&&u| u == 0).count();
    for t in 0..tiers {
        // the remaining items must still be able to fill every empty tier
        let still_uncovered = uncovered - usize::from(used[t] == 0);
        if still_uncovered > k - pos - 1 {
            continue;
        }
        assign[pos] = t;
        used[t] += 1;
        surjections(pos + 1, tiers, assign, used, out);
        used[t] -= 1;
    }
}

/// Lexicographic successor; false once `perm` is the last permutation.
pub(crate) fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = perm.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = perm.iter().rposition(|&x| x > perm[i]).unwrap();
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}

/// Score vectors of every usable ranking, flattened row by row. The
/// all-tied ranking has no admissible scores and is left out.
#[derive(Debug, Clone)]
pub struct RankingScoreTable {
    k: usize,
    scores: Arc<[f64]>,
}

impl RankingScoreTable {
    pub fn new(k: usize, cap: u128) -> Result<Self> {
        let rankings = enumerate_preference_rankings(k, true, cap)?;
        let mut scores = Vec::with_capacity(rankings.len() * k);
        for r in rankings.iter().filter(|r| r.tiers().len() > 1) {
            scores.extend_from_slice(crate::ordering::scores_from_ranking(r)?.as_slice());
        }
        Ok(RankingScoreTable {
            k,
            scores: scores.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.scores.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Largest L over the table.
    pub fn max_concordance(&self, rank_sums: &[u64], n: usize) -> f64 {
        let alpha: Vec<f64> = rank_sums.iter().map(|&a| a as f64).collect();
        let best = self
            .scores
            .chunks_exact(self.k)
            .map(|s| s.iter().zip(&alpha).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        best / concordance_scale(n, self.k)
    }
}

/// Rank Test statistic: Σ over unordered item pairs of the absolute
/// difference in mean rank, divided by K(K+1)/2.
pub fn rank_statistic_from_sums(rank_sums: &[u64], n: usize) -> f64 {
    let k = rank_sums.len();
    let mut total: u64 = 0;
    for j in 0..k {
        for l in j + 1..k {
            total += rank_sums[j].abs_diff(rank_sums[l]);
        }
    }
    total as f64 / n as f64 / (k * (k + 1) / 2) as f64
}

pub fn rank_statistic(set: &OrderingSet) -> f64 {
    rank_statistic_from_sums(&set.rank_sums(), set.n())
}

pub fn max_lc_statistic(set: &OrderingSet, mode: MaxLcMode) -> Result<f64> {
    match mode {
        MaxLcMode::Free => Ok(free_max_concordance(&set.rank_sums(), set.n())),
        MaxLcMode::Strict { cap } => {
            Ok(RankingScoreTable::new(set.k(), cap)?.max_concordance(&set.rank_sums(), set.n()))
        }
    }
}

pub fn max_lc_test(set: &OrderingSet, mode: MaxLcMode, mc: &McConfig) -> Result<TestResult> {
    let (k, n) = (set.k(), set.n());
    let (name, observed, pv) = match mode {
        MaxLcMode::Free => {
            let observed = free_max_concordance(&set.rank_sums(), n);
            let pv = mc_pvalue(
                observed,
                |rng| free_max_concordance(&rank_sums(k, &uniform_rows(k, n, rng)), n),
                mc,
            );
            ("max-lc-free", observed, pv)
        }
        MaxLcMode::Strict { cap } => {
            let table = RankingScoreTable::new(k, cap)?;
            let observed = table.max_concordance(&set.rank_sums(), n);
            let pv = mc_pvalue(
                observed,
                |rng| table.max_concordance(&rank_sums(k, &uniform_rows(k, n, rng)), n),
                mc,
            );
            ("max-lc-strict", observed, pv)
        }
    };
    Ok(TestResult::monte_carlo(
        name,
        observed,
        None,
        pv.p_value,
        mc.reps,
        mc.master_seed,
    ))
}

pub fn rank_test(set: &OrderingSet, mc: &McConfig) -> TestResult {
    let (k, n) = (set.k(), set.n());
    let observed = rank_statistic(set);
    let pv = mc_pvalue(
        observed,
        |rng| rank_statistic_from_sums(&rank_sums(k, &uniform_rows(k, n, rng)), n),
        mc,
    );
    TestResult::monte_carlo("rank", observed, None, pv.p_value, mc.reps, mc.master_seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordering::cross_tabulate;

    fn labels(rows: &[&str]) -> OrderingSet {
        let rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| r.chars().map(|c| c.to_string()).collect())
            .collect();
        OrderingSet::from_labels(&rows).unwrap()
    }

    #[test]
    fn optimal_scores_hand_example() {
        let tab = cross_tabulate(&labels(&["ABC", "ACB"]));
        assert_eq!(tab.rank_sums(), vec![2, 5, 5]);
        let s = optimal_score_vector(&tab).unwrap();
        let r6 = 6f64.sqrt();
        for (a, b) in s.as_slice().iter().zip([-2.0 / r6, 1.0 / r6, 1.0 / r6]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn balanced_tab_is_degenerate() {
        let tab = cross_tabulate(&labels(&["ABC", "BCA", "CAB"]));
        assert!(matches!(
            optimal_score_vector(&tab),
            Err(Error::DegenerateScores)
        ));
        assert_eq!(free_max_concordance(&tab.rank_sums(), 3), 0.0);
    }

    #[test]
    fn ranking_counts() {
        assert_eq!(ranking_count(3, true), 13);
        assert_eq!(ranking_count(4, true), 75);
        assert_eq!(ranking_count(6, true), 4683);
        assert_eq!(ranking_count(5, false), 120);
        assert_eq!(enumerate_preference_rankings(3, true, 100).unwrap().len(), 13);
        assert_eq!(enumerate_preference_rankings(4, true, 100).unwrap().len(), 75);
        assert_eq!(enumerate_preference_rankings(4, false, 100).unwrap().len(), 24);
    }

    #[test]
    fn enumeration_is_duplicate_free() {
        let all = enumerate_preference_rankings(5, true, 10_000).unwrap();
        let unique: std::collections::HashSet<_> = all.iter().map(|r| r.tier_of()).collect();
        assert_eq!(unique.len(), all.len());
        assert_eq!(all.len(), 541);
    }

    #[test]
    fn enumeration_respects_cap() {
        assert!(matches!(
            enumerate_preference_rankings(6, true, 4682),
            Err(Error::CapExceeded { count: 4683, .. })
        ));
    }

    #[test]
    fn rank_statistic_hand_examples() {
        assert!((rank_statistic(&labels(&["ABC", "ACB"])) - 0.5).abs() < 1e-15);
        let same = labels(&["BCA", "BCA", "BCA", "BCA"]);
        assert!((rank_statistic(&same) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn free_dominates_strict() {
        let set = labels(&["ABCD", "BACD", "DCBA", "ACBD", "ABDC"]);
        let free = max_lc_statistic(&set, MaxLcMode::Free).unwrap();
        let strict = max_lc_statistic(&set, MaxLcMode::strict()).unwrap();
        assert!(free >= strict - 1e-12);
        assert!(strict > 0.0);
    }

    #[test]
    fn free_statistic_equals_lc_at_optimum() {
        let set = labels(&["ABCD", "BACD", "DCBA", "ACBD", "ABDC"]);
        let s = optimal_score_vector(&cross_tabulate(&set)).unwrap();
        let lc = crate::targeted::lc_statistic(&set, &s).unwrap();
        let free = max_lc_statistic(&set, MaxLcMode::Free).unwrap();
        assert!((lc - free).abs() < 1e-10);
    }
}
