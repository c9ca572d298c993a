//! Tests for data that is not fully blocked: partial draws (a fixed number
//! of balls ordered from a larger universe) and shrinking series (one
//! item leaves per round), plus the KS meta-test for a batch of p-values.

use rand::Rng;

use crate::aggregate::next_permutation;
use crate::dist::{chi_squared_sf, kolmogorov_sf};
use crate::error::{Error, Result};
use crate::mc::{mc_pvalue, shuffle, McConfig};
use crate::ordering::{Draw, PartialDrawSet, ShrinkingSeries};
use crate::result::TestResult;

/// Per-position chi-squared statistics for partial draws.
///
/// At position p the expected count of ball b is Σ_i 1/(K_i − p + 1) over
/// the draws whose universe holds b and that have not yet drawn b.
pub fn positionwise_stages(draws: &[Draw], draw_len: usize) -> Vec<f64> {
    let max_u = draws.iter().map(|d| d.universe).max().unwrap_or(0);
    // draws per universe size
    let mut per_universe = vec![0u64; max_u + 1];
    for d in draws {
        per_universe[d.universe] += 1;
    }
    let mut observed = vec![0u64; max_u + 1];
    let mut expected = vec![0f64; max_u + 1];
    let mut stages = Vec::with_capacity(draw_len);
    for p in 0..draw_len {
        // E_b before removing already-drawn balls: Σ_{u >= b} count_u / (u − p)
        let mut acc = 0.0;
        for b in (1..=max_u).rev() {
            if per_universe[b] > 0 {
                acc += per_universe[b] as f64 / (b - p) as f64;
            }
            expected[b] = acc;
        }
        observed.iter_mut().for_each(|o| *o = 0);
        for d in draws {
            let w = 1.0 / (d.universe - p) as f64;
            for &gone in &d.balls[..p] {
                expected[gone] -= w;
            }
            observed[d.balls[p]] += 1;
        }
        let stat: f64 = (1..=max_u)
            .filter(|&b| expected[b] > 1e-12)
            .map(|b| {
                let diff = observed[b] as f64 - expected[b];
                diff * diff / expected[b]
            })
            .sum();
        stages.push(stat);
    }
    stages
}

pub fn positionwise_statistic(draws: &PartialDrawSet) -> f64 {
    positionwise_stages(draws.draws(), draws.draw_len()).iter().sum()
}

/// `len` distinct balls drawn in sequence, uniformly, from `1..=universe`.
fn sequential_sample<R: Rng + ?Sized>(universe: usize, len: usize, rng: &mut R) -> Vec<usize> {
    if 2 * len > universe {
        let mut all: Vec<usize> = (1..=universe).collect();
        shuffle(&mut all, rng);
        all.truncate(len);
        return all;
    }
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let b = rng.gen_range(1..=universe);
        if !out.contains(&b) {
            out.push(b);
        }
    }
    out
}

/// Resamples every draw within its own universe.
fn null_draws<R: Rng + ?Sized>(draws: &[Draw], len: usize, rng: &mut R) -> Vec<Draw> {
    draws
        .iter()
        .map(|d| Draw {
            universe: d.universe,
            balls: sequential_sample(d.universe, len, rng),
        })
        .collect()
}

/// Position-by-position cascade for partial draws, Monte Carlo p-value.
pub fn positionwise_cascading_test(draws: &PartialDrawSet, mc: &McConfig) -> TestResult {
    let len = draws.draw_len();
    let observed = positionwise_statistic(draws);
    let pv = mc_pvalue(
        observed,
        |rng| {
            positionwise_stages(&null_draws(draws.draws(), len, rng), len)
                .iter()
                .sum()
        },
        mc,
    );
    TestResult::monte_carlo("positionwise", observed, None, pv.p_value, mc.reps, mc.master_seed)
}

/// Chi-squared test on how often each ball is drawn, ignoring order. The
/// expected count of ball b is Σ d/K_i over draws whose universe holds b.
pub fn frequency_test(draws: &PartialDrawSet) -> TestResult {
    let max_u = draws.max_universe();
    let d = draws.draw_len() as f64;
    let mut observed = vec![0u64; max_u + 1];
    let mut expected = vec![0f64; max_u + 1];
    for draw in draws.draws() {
        let w = d / draw.universe as f64;
        for e in &mut expected[1..=draw.universe] {
            *e += w;
        }
        for &b in &draw.balls {
            observed[b] += 1;
        }
    }
    let balls = (1..=max_u).filter(|&b| expected[b] > 0.0).count();
    let stat: f64 = (1..=max_u)
        .filter(|&b| expected[b] > 0.0)
        .map(|b| {
            let diff = observed[b] as f64 - expected[b];
            diff * diff / expected[b]
        })
        .sum();
    let df = (balls - 1) as u64;
    TestResult::analytic("frequency", stat, Some(df), chi_squared_sf(df as f64, stat))
}

pub const DEFAULT_SHRINK_MAX_K: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShrinkSpec {
    /// Largest initial item count searched exhaustively.
    pub max_k: usize,
}

impl Default for ShrinkSpec {
    fn default() -> Self {
        ShrinkSpec {
            max_k: DEFAULT_SHRINK_MAX_K,
        }
    }
}

/// Per-round constants for the mean-concordance search.
struct RoundShape {
    /// Position (1-based) of each item in the round, 0 when absent.
    position: Vec<u32>,
    size: usize,
    offset: f64,
    scale: f64,
}

fn round_shapes(k: usize, rounds: &[Vec<usize>]) -> Vec<RoundShape> {
    rounds
        .iter()
        .map(|round| {
            let m = round.len() as f64;
            let mut position = vec![0u32; k];
            for (p, &item) in round.iter().enumerate() {
                position[item] = p as u32 + 1;
            }
            // L = (Σ rank·π − m(m+1)²/4) / (‖rank − (m+1)/2‖ · √(m(m+1)/12))
            let norm = (m * (m * m - 1.0) / 12.0).sqrt();
            RoundShape {
                position,
                size: round.len(),
                offset: m * (m + 1.0) * (m + 1.0) / 4.0,
                scale: norm * (m * (m + 1.0) / 12.0).sqrt(),
            }
        })
        .collect()
}

/// Mean over rounds of the concordance between `preference` (item indices,
/// most preferred first, restricted to each round's survivors) and the
/// round's ordering.
fn mean_concordance(preference: &[usize], shapes: &[RoundShape]) -> f64 {
    let mut total = 0.0;
    for shape in shapes {
        let mut rank = 0u64;
        let mut dot = 0u64;
        for &item in preference {
            let pos = shape.position[item];
            if pos != 0 {
                rank += 1;
                dot += rank * pos as u64;
            }
        }
        debug_assert_eq!(rank as usize, shape.size);
        total += (dot as f64 - shape.offset) / shape.scale;
    }
    total / shapes.len() as f64
}

/// Largest season-mean concordance over every strict preference order.
pub fn shrinking_statistic(k: usize, rounds: &[Vec<usize>]) -> f64 {
    let shapes = round_shapes(k, rounds);
    let mut preference: Vec<usize> = (0..k).collect();
    let mut best = f64::NEG_INFINITY;
    loop {
        best = best.max(mean_concordance(&preference, &shapes));
        if !next_permutation(&mut preference) {
            break;
        }
    }
    best
}

pub fn shrinking_max_lc_test(
    series: &ShrinkingSeries,
    spec: &ShrinkSpec,
    mc: &McConfig,
) -> Result<TestResult> {
    if spec.max_k < 2 {
        return Err(Error::InvalidParameter("max_k must be at least 2".into()));
    }
    let k = series.k();
    if k > spec.max_k {
        return Err(Error::CapExceeded {
            what: format!("exhaustive search over strict orders of {k} items"),
            count: (1..=k as u128).product(),
            cap: (1..=spec.max_k as u128).product(),
        });
    }
    let observed = shrinking_statistic(k, series.rounds());
    let pv = mc_pvalue(
        observed,
        |rng| {
            let rounds: Vec<Vec<usize>> = series
                .rounds()
                .iter()
                .map(|r| {
                    let mut r = r.clone();
                    shuffle(&mut r, rng);
                    r
                })
                .collect();
            shrinking_statistic(k, &rounds)
        },
        mc,
    );
    Ok(TestResult::monte_carlo(
        "shrink-max-lc",
        observed,
        None,
        pv.p_value,
        mc.reps,
        mc.master_seed,
    ))
}

/// One-sample Kolmogorov-Smirnov distance from Uniform(0, 1).
pub fn ks_statistic(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let above = (i as f64 + 1.0) / n - x;
            let below = x - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

pub fn ks_uniformity_test(p_values: &[f64]) -> Result<TestResult> {
    if p_values.len() < 2 {
        return Err(Error::InvalidInput(
            "KS uniformity test needs at least 2 values".into(),
        ));
    }
    if let Some(bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidInput(format!("{bad} is not in [0, 1]")));
    }
    let d = ks_statistic(p_values);
    Ok(TestResult::analytic(
        "ks",
        d,
        None,
        kolmogorov_sf(p_values.len(), d),
    ))
}
