//! Tests that need the preference criterion up front: linear concordance
//! against a fixed score vector, and the count of fully compatible orderings.

use crate::dist::{binomial_sf, ln_gamma, normal_sf};
use crate::error::{Error, Result};
use crate::ordering::{OrderingSet, PreferenceRanking, ScoreVector};
use crate::result::TestResult;

/// √(N·K(K+1)/12), the null standard deviation of Σ_i Σ_k s_k π_ik.
pub(crate) fn concordance_scale(n: usize, k: usize) -> f64 {
    (n as f64 * k as f64 * (k as f64 + 1.0) / 12.0).sqrt()
}

/// L = Σ_k s_k α_k / √(N·K(K+1)/12), where α_k is item k's rank sum.
pub fn concordance(rank_sums: &[u64], n: usize, scores: &[f64]) -> f64 {
    let dot: f64 = rank_sums
        .iter()
        .zip(scores)
        .map(|(&a, &s)| a as f64 * s)
        .sum();
    dot / concordance_scale(n, rank_sums.len())
}

pub fn lc_statistic(set: &OrderingSet, scores: &ScoreVector) -> Result<f64> {
    if scores.len() != set.k() {
        return Err(Error::DimensionMismatch {
            expected: set.k(),
            found: scores.len(),
        });
    }
    Ok(concordance(&set.rank_sums(), set.n(), scores.as_slice()))
}

/// Linear concordance test with a one-sided upper normal tail. Negative
/// scores mark preferred items, so placing them early pushes L up.
pub fn lc_test(set: &OrderingSet, scores: &ScoreVector) -> Result<TestResult> {
    let l = lc_statistic(set, scores)?;
    Ok(TestResult::analytic("lc", l, None, normal_sf(l))
        .with_warning("one-sided p-value: upper normal tail (excess concordance)"))
}

/// Ordering is fully compatible iff tier indices never decrease along positions.
pub fn is_compatible(ordering: &[usize], tier_of: &[usize]) -> bool {
    ordering
        .windows(2)
        .all(|w| tier_of[w[0]] <= tier_of[w[1]])
}

/// Null probability that a uniform ordering is fully compatible:
/// Π_t |tier_t|! / K!.
pub fn compatibility_probability(ranking: &PreferenceRanking) -> f64 {
    let ln_num: f64 = ranking
        .tiers()
        .iter()
        .map(|t| ln_gamma(t.len() as f64 + 1.0))
        .sum();
    (ln_num - ln_gamma(ranking.k() as f64 + 1.0)).exp().min(1.0)
}

pub fn compatible_count(set: &OrderingSet, ranking: &PreferenceRanking) -> Result<u64> {
    if ranking.k() != set.k() {
        return Err(Error::DimensionMismatch {
            expected: set.k(),
            found: ranking.k(),
        });
    }
    let tier_of = ranking.tier_of();
    Ok(set.orderings().filter(|o| is_compatible(o, &tier_of)).count() as u64)
}

/// Upper binomial tail of the number of fully compatible orderings.
pub fn rank_compatibility_test(
    set: &OrderingSet,
    ranking: &PreferenceRanking,
) -> Result<TestResult> {
    let observed = compatible_count(set, ranking)?;
    let q = if ranking.tiers().len() == 1 {
        1.0
    } else {
        compatibility_probability(ranking)
    };
    let p = binomial_sf(set.n() as u64, q, observed);
    Ok(TestResult::analytic("rank-compat", observed as f64, None, p))
}
