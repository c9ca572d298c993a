//! Disaggregated tests on whole orderings: Equality of Permutations and
//! Cascading Chi-Squared.

use crate::dist::{binomial_sf, chi_squared_sf};
use crate::error::{Error, Result};
use crate::mc::{mc_pvalue, uniform_rows, McConfig};
use crate::ordering::OrderingSet;
use crate::result::TestResult;

/// Largest K for which permutations are indexed (20! < 2^64).
pub const MAX_PERMUTATION_K: usize = 20;

pub fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

/// Lexicographic rank of a permutation of `0..k` (Lehmer code).
pub fn permutation_rank(perm: &[usize]) -> u64 {
    let k = perm.len();
    let mut rank = 0u64;
    let mut used: u32 = 0;
    for (i, &x) in perm.iter().enumerate() {
        let smaller_unused = (0..x).filter(|&y| used & (1 << y) == 0).count() as u64;
        rank += smaller_unused * factorial(k - 1 - i);
        used |= 1 << x;
    }
    rank
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EqPermsOptions {
    /// Run even when N/K! < 2.
    pub force: bool,
    /// Replace the chi-squared tail with a Monte Carlo p-value.
    pub mc: Option<McConfig>,
}

/// t^E = Σ_p (C_p − N/K!)² / (N/K!) over all K! permutations, with the
/// unobserved ones contributing N/K! each.
pub fn equality_statistic(k: usize, flat: &[usize]) -> f64 {
    let n = flat.len() / k;
    let mut ranks: Vec<u64> = flat.chunks_exact(k).map(permutation_rank).collect();
    ranks.sort_unstable();
    let cells = factorial(k) as f64;
    let expected = n as f64 / cells;
    let mut sum = 0.0;
    let mut distinct = 0u64;
    for run in ranks.chunk_by(|a, b| a == b) {
        let d = run.len() as f64 - expected;
        sum += d * d;
        distinct += 1;
    }
    sum / expected + (cells - distinct as f64) * expected
}

fn check_permutation_k(k: usize) -> Result<()> {
    if k > MAX_PERMUTATION_K {
        return Err(Error::Infeasible(format!(
            "permutation counting supports K <= {MAX_PERMUTATION_K}, got {k}"
        )));
    }
    Ok(())
}

pub fn equality_of_permutations_test(
    set: &OrderingSet,
    opts: &EqPermsOptions,
) -> Result<TestResult> {
    let (k, n) = (set.k(), set.n());
    if k < 2 {
        return Err(Error::Infeasible("need at least 2 items".into()));
    }
    if k == 2 {
        return Ok(two_item_binomial(set));
    }
    check_permutation_k(k)?;
    let cells = factorial(k);
    let ratio = n as f64 / cells as f64;
    let mut warnings = Vec::new();
    if ratio < 2.0 {
        if !opts.force {
            return Err(Error::TooFewOrderings { ratio });
        }
        warnings.push(format!("forced run with N/K! = {ratio:.3} < 2"));
    } else if ratio < 5.0 {
        warnings.push(format!(
            "small expected counts: N/K! = {ratio:.3} < 5 (accepted for N/K! >= 2)"
        ));
    }
    let observed = equality_statistic(k, set.flat());
    let df = cells - 1;
    let mut result = match &opts.mc {
        None => TestResult::analytic("eq-perms", observed, Some(df), chi_squared_sf(df as f64, observed)),
        Some(mc) => {
            let pv = mc_pvalue(observed, |rng| equality_statistic(k, &uniform_rows(k, n, rng)), mc);
            TestResult::monte_carlo("eq-perms", observed, Some(df), pv.p_value, mc.reps, mc.master_seed)
        }
    };
    result.warnings = warnings;
    Ok(result)
}

/// K = 2: exact two-sided binomial test of equal proportions. The
/// statistic is how often the first canonical item is listed first.
fn two_item_binomial(set: &OrderingSet) -> TestResult {
    let n = set.n() as u64;
    let first = set.orderings().filter(|o| o[0] == 0).count() as u64;
    let extreme = first.max(n - first);
    let p = (2.0 * binomial_sf(n, 0.5, extreme)).min(1.0);
    TestResult::analytic("eq-perms", first as f64, None, p)
        .with_warning("K = 2: exact two-sided binomial test of equal proportions")
}

/// Processing order for the cascade: a permutation of item indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeOrder(Vec<usize>);

impl CascadeOrder {
    /// Items in canonical order.
    pub fn canonical(k: usize) -> Self {
        CascadeOrder((0..k).collect())
    }

    pub fn new(order: Vec<usize>, k: usize) -> Result<Self> {
        let mut seen = vec![false; k];
        if order.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: order.len(),
            });
        }
        for &i in &order {
            if i >= k || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidInput(format!(
                    "cascade order must list each of the {k} items once"
                )));
            }
        }
        Ok(CascadeOrder(order))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// Stage statistics t^k, one per item except the last (whose stage is
/// identically zero).
pub fn cascade_stages(k: usize, flat: &[usize], order: &[usize]) -> Vec<f64> {
    let n = flat.len() / k;
    let mut removed = vec![false; k];
    let mut stages = Vec::with_capacity(k.saturating_sub(1));
    let mut counts = vec![0u64; k];
    for (stage, &item) in order.iter().take(k.saturating_sub(1)).enumerate() {
        let live = k - stage;
        counts[..live].iter_mut().for_each(|c| *c = 0);
        for row in flat.chunks_exact(k) {
            let mut pos = 0;
            for &x in row {
                if x == item {
                    break;
                }
                if !removed[x] {
                    pos += 1;
                }
            }
            counts[pos] += 1;
        }
        let expected = n as f64 / live as f64;
        let t: f64 = counts[..live]
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d
            })
            .sum::<f64>()
            / expected;
        stages.push(t);
        removed[item] = true;
    }
    stages
}

pub fn cascade_statistic(k: usize, flat: &[usize], order: &[usize]) -> f64 {
    cascade_stages(k, flat, order).iter().sum()
}

/// Sum of the stage statistics, referred to χ²(K(K−1)/2) unless `mc` is given.
pub fn cascading_chi_squared_test(
    set: &OrderingSet,
    order: &CascadeOrder,
    mc: Option<&McConfig>,
) -> Result<TestResult> {
    let (k, n) = (set.k(), set.n());
    if k < 3 {
        return Err(Error::Infeasible(format!(
            "cascading chi-squared needs K >= 3, got {k}"
        )));
    }
    if order.as_slice().len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: order.as_slice().len(),
        });
    }
    let order = order.as_slice();
    let observed = cascade_statistic(k, set.flat(), order);
    let df = (k * (k - 1) / 2) as u64;
    Ok(match mc {
        None => TestResult::analytic("cascade", observed, Some(df), chi_squared_sf(df as f64, observed)),
        Some(mc) => {
            let pv = mc_pvalue(
                observed,
                |rng| cascade_statistic(k, &uniform_rows(k, n, rng), order),
                mc,
            );
            TestResult::monte_carlo("cascade", observed, Some(df), pv.p_value, mc.reps, mc.master_seed)
        }
    })
}
