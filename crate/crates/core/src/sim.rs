//! Biased-ordering generators and the power/size study harness.
//!
//! Orderings are built one position at a time. Among the items still
//! unplaced, item i is picked with probability proportional to
//! δ^|v_a − v_i|, where item values are v_i = 1..K and the agent value v_a
//! depends on the preference type. With v_a = 0 this reduces to the
//! relative-probability rule P_{j+m}/P_j = δ^m.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::aggregate::{free_max_concordance, rank_statistic_from_sums, RankingScoreTable};
use crate::dist::{binomial_sf, chi_squared_sf, normal_sf};
use crate::error::{Error, Result};
use crate::mc::{derive_seed, null_statistics, replication_rng, uniform_rows, McConfig, TIE_TOLERANCE};
use crate::ordering::{
    numbered_items, rank_sums, scores_from_ranking, ItemOrdering, OrderingSet, PreferenceRanking,
};
use crate::permutation::{cascade_statistic, equality_statistic, factorial, MAX_PERMUTATION_K};
use crate::targeted::{compatibility_probability, concordance, is_compatible};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PreferenceType {
    /// Every agent shares the ranking 1 > 2 > ... > K (v_a = 0).
    Unidirectional,
    /// Agents prefer one end or the other with equal odds (v_a ∈ {0, K+1}).
    Bidirectional,
    /// Agents sit on a continuum, v_a ~ U(0, K+1), preferring nearby items.
    Multidirectional,
}

impl PreferenceType {
    pub fn name(&self) -> &'static str {
        match self {
            PreferenceType::Unidirectional => "unidirectional",
            PreferenceType::Bidirectional => "bidirectional",
            PreferenceType::Multidirectional => "multidirectional",
        }
    }

    fn index(&self) -> u64 {
        match self {
            PreferenceType::Unidirectional => 0,
            PreferenceType::Bidirectional => 1,
            PreferenceType::Multidirectional => 2,
        }
    }
}

impl fmt::Display for PreferenceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PreferenceType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unidirectional" | "uni" => Ok(PreferenceType::Unidirectional),
            "bidirectional" | "bi" => Ok(PreferenceType::Bidirectional),
            "multidirectional" | "multi" => Ok(PreferenceType::Multidirectional),
            other => Err(Error::InvalidParameter(format!(
                "unknown preference type `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    pub k: usize,
    pub delta: f64,
    pub preference: PreferenceType,
}

impl GeneratorConfig {
    pub fn new(k: usize, delta: f64, preference: PreferenceType) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParameter("need at least one item".into()));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1], got {delta}"
            )));
        }
        Ok(GeneratorConfig {
            k,
            delta,
            preference,
        })
    }
}

/// Selection probabilities over `remaining` (item indices) for an agent at
/// `agent_value`; item i has value i + 1.
pub fn selection_probabilities(remaining: &[usize], agent_value: f64, delta: f64) -> Vec<f64> {
    let distance = |i: usize| (agent_value - (i + 1) as f64).abs();
    let nearest = remaining
        .iter()
        .map(|&i| distance(i))
        .fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = remaining
        .iter()
        .map(|&i| delta.powf(distance(i) - nearest))
        .collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

fn pick<R: Rng + ?Sized>(probabilities: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probabilities.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probabilities.len() - 1
}

/// Sequential selection where, among the remaining items, item j+m is
/// chosen δ^m times as often as item j.
pub fn generate_delta_ordering<R: Rng + ?Sized>(k: usize, delta: f64, rng: &mut R) -> ItemOrdering {
    let mut remaining: Vec<usize> = (0..k).collect();
    let mut out = Vec::with_capacity(k);
    let mut weights = Vec::with_capacity(k);
    while !remaining.is_empty() {
        let lowest = remaining[0];
        weights.clear();
        weights.extend(remaining.iter().map(|&j| delta.powi((j - lowest) as i32)));
        let total: f64 = weights.iter().sum();
        let u = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = remaining.len() - 1;
        for (slot, &w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                chosen = slot;
                break;
            }
        }
        out.push(remaining.remove(chosen));
    }
    ItemOrdering(out)
}

fn agent_value<R: Rng + ?Sized>(cfg: &GeneratorConfig, rng: &mut R) -> f64 {
    let top = (cfg.k + 1) as f64;
    match cfg.preference {
        PreferenceType::Unidirectional => 0.0,
        PreferenceType::Bidirectional => {
            if rng.gen::<bool>() {
                0.0
            } else {
                top
            }
        }
        PreferenceType::Multidirectional => rng.gen::<f64>() * top,
    }
}

/// One ordering from the agent-value model.
pub fn generate_general_ordering<R: Rng + ?Sized>(cfg: &GeneratorConfig, rng: &mut R) -> ItemOrdering {
    let v = agent_value(cfg, rng);
    let mut remaining: Vec<usize> = (0..cfg.k).collect();
    let mut out = Vec::with_capacity(cfg.k);
    while !remaining.is_empty() {
        let probs = selection_probabilities(&remaining, v, cfg.delta);
        out.push(remaining.remove(pick(&probs, rng)));
    }
    ItemOrdering(out)
}

/// `n` orderings over items labelled `1..=k`.
pub fn generate_set<R: Rng + ?Sized>(cfg: &GeneratorConfig, n: usize, rng: &mut R) -> OrderingSet {
    let mut flat = Vec::with_capacity(cfg.k * n);
    for _ in 0..n {
        flat.extend(generate_general_ordering(cfg, rng).0);
    }
    OrderingSet::from_flat_unchecked(numbered_items(cfg.k), flat)
}

/// Tests on fully blocked data that the power harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestKind {
    Lc,
    RankCompat,
    MaxLcFree,
    MaxLcStrict,
    Rank,
    EqPerms,
    Cascade,
}

impl TestKind {
    pub const ALL: [TestKind; 7] = [
        TestKind::Lc,
        TestKind::RankCompat,
        TestKind::MaxLcFree,
        TestKind::MaxLcStrict,
        TestKind::Rank,
        TestKind::EqPerms,
        TestKind::Cascade,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TestKind::Lc => "lc",
            TestKind::RankCompat => "rank-compat",
            TestKind::MaxLcFree => "max-lc-free",
            TestKind::MaxLcStrict => "max-lc-strict",
            TestKind::Rank => "rank",
            TestKind::EqPerms => "eq-perms",
            TestKind::Cascade => "cascade",
        }
    }

    pub fn uses_monte_carlo(&self) -> bool {
        matches!(self, TestKind::MaxLcFree | TestKind::MaxLcStrict | TestKind::Rank)
    }

    fn index(&self) -> u64 {
        TestKind::ALL.iter().position(|t| t == self).unwrap() as u64
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestKind::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown test `{s}`")))
    }
}

/// A sorted null sample with the (1 + r)/(1 + m) p-value estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDistribution {
    sorted: Vec<f64>,
}

impl NullDistribution {
    pub fn new(mut samples: Vec<f64>) -> Self {
        samples.sort_by(f64::total_cmp);
        NullDistribution { sorted: samples }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn p_value(&self, observed: f64) -> f64 {
        let cut = observed - TIE_TOLERANCE * observed.abs().max(1.0);
        let below = self.sorted.partition_point(|&x| x < cut);
        (1 + self.sorted.len() - below) as f64 / (1 + self.sorted.len()) as f64
    }
}

/// A test made ready for repeated use on sets of a fixed (K, N): null
/// distributions sampled, ranking tables enumerated, targets fixed.
pub struct PreparedTest {
    kind: TestKind,
    k: usize,
    null: Option<NullDistribution>,
    table: Option<RankingScoreTable>,
    target_scores: Vec<f64>,
    target_ranking: Option<PreferenceRanking>,
}

/// The targeted tests use the generator's own preference order, item 1 first.
pub fn generator_ranking(k: usize) -> Result<PreferenceRanking> {
    PreferenceRanking::strict(&(0..k).collect::<Vec<_>>())
}

impl PreparedTest {
    /// Fails with an infeasibility error when the test cannot run at (K, N).
    pub fn new(kind: TestKind, k: usize, n: usize, mc: &McConfig, strict_cap: u128) -> Result<Self> {
        Self::with_target(kind, k, n, mc, strict_cap, generator_ranking(k)?)
    }

    pub fn with_target(
        kind: TestKind,
        k: usize,
        n: usize,
        mc: &McConfig,
        strict_cap: u128,
        target: PreferenceRanking,
    ) -> Result<Self> {
        if k < 2 || n < 1 {
            return Err(Error::Infeasible(format!("K = {k}, N = {n} is too small")));
        }
        match kind {
            TestKind::EqPerms if k > 2 => {
                if k > MAX_PERMUTATION_K {
                    return Err(Error::Infeasible(format!("K = {k} too large for eq-perms")));
                }
                let ratio = n as f64 / factorial(k) as f64;
                if ratio < 2.0 {
                    return Err(Error::TooFewOrderings { ratio });
                }
            }
            TestKind::Cascade if k < 3 => {
                return Err(Error::Infeasible("cascade needs K >= 3".into()));
            }
            _ => {}
        }
        let table = match kind {
            TestKind::MaxLcStrict => Some(RankingScoreTable::new(k, strict_cap)?),
            _ => None,
        };
        let target_scores = if target.tiers().len() > 1 {
            scores_from_ranking(&target)?.as_slice().to_vec()
        } else {
            vec![0.0; k]
        };
        let mut prepared = PreparedTest {
            kind,
            k,
            null: None,
            table,
            target_scores,
            target_ranking: Some(target),
        };
        if kind.uses_monte_carlo() {
            let null_cfg = McConfig {
                master_seed: derive_seed(mc.master_seed, (kind.index() << 48) ^ ((k as u64) << 32) ^ n as u64),
                ..*mc
            };
            let samples = null_statistics(&null_cfg, |rng| {
                prepared.statistic_of_rows(&uniform_rows(k, n, rng))
            });
            prepared.null = Some(NullDistribution::new(samples));
        }
        Ok(prepared)
    }

    pub fn kind(&self) -> TestKind {
        self.kind
    }

    fn statistic_of_rows(&self, flat: &[usize]) -> f64 {
        let k = self.k;
        let n = flat.len() / k;
        match self.kind {
            TestKind::Lc => concordance(&rank_sums(k, flat), n, &self.target_scores),
            TestKind::RankCompat => {
                let tier_of = self.target_ranking.as_ref().unwrap().tier_of();
                flat.chunks_exact(k).filter(|o| is_compatible(o, &tier_of)).count() as f64
            }
            TestKind::MaxLcFree => free_max_concordance(&rank_sums(k, flat), n),
            TestKind::MaxLcStrict => self
                .table
                .as_ref()
                .unwrap()
                .max_concordance(&rank_sums(k, flat), n),
            TestKind::Rank => rank_statistic_from_sums(&rank_sums(k, flat), n),
            TestKind::EqPerms if k == 2 => flat.chunks_exact(2).filter(|o| o[0] == 0).count() as f64,
            TestKind::EqPerms => equality_statistic(k, flat),
            TestKind::Cascade => cascade_statistic(k, flat, &(0..k).collect::<Vec<_>>()),
        }
    }

    pub fn statistic(&self, set: &OrderingSet) -> f64 {
        self.statistic_of_rows(set.flat())
    }

    pub fn p_value(&self, set: &OrderingSet) -> f64 {
        let k = self.k;
        let n = set.n();
        let stat = self.statistic(set);
        match self.kind {
            TestKind::Lc => normal_sf(stat),
            TestKind::RankCompat => {
                let ranking = self.target_ranking.as_ref().unwrap();
                let q = if ranking.tiers().len() == 1 {
                    1.0
                } else {
                    compatibility_probability(ranking)
                };
                binomial_sf(n as u64, q, stat as u64)
            }
            TestKind::EqPerms if k == 2 => {
                let first = stat as u64;
                let extreme = first.max(n as u64 - first);
                (2.0 * binomial_sf(n as u64, 0.5, extreme)).min(1.0)
            }
            TestKind::EqPerms => chi_squared_sf((factorial(k) - 1) as f64, stat),
            TestKind::Cascade => chi_squared_sf((k * (k - 1) / 2) as f64, stat),
            TestKind::MaxLcFree | TestKind::MaxLcStrict | TestKind::Rank => {
                self.null.as_ref().unwrap().p_value(stat)
            }
        }
    }
}

/// Grid and settings for a power or size study.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerStudySpec {
    pub tests: Vec<TestKind>,
    pub ks: Vec<usize>,
    pub ns: Vec<usize>,
    pub deltas: Vec<f64>,
    pub preferences: Vec<PreferenceType>,
    pub reps: usize,
    pub alphas: Vec<f64>,
    /// Replications behind each Monte Carlo null distribution.
    pub mc_reps: usize,
    pub seed: u64,
    pub strict_cap: u128,
    pub workers: Option<usize>,
}

impl Default for PowerStudySpec {
    fn default() -> Self {
        PowerStudySpec {
            tests: TestKind::ALL.to_vec(),
            ks: vec![4],
            ns: vec![250],
            deltas: vec![0.8],
            preferences: vec![PreferenceType::Unidirectional],
            reps: 1000,
            alphas: vec![0.05],
            mc_reps: crate::mc::DEFAULT_MC_REPS,
            seed: 0,
            strict_cap: crate::aggregate::DEFAULT_STRICT_CAP,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerRow {
    pub test: TestKind,
    pub k: usize,
    pub n: usize,
    pub delta: f64,
    pub preference: PreferenceType,
    pub alpha: f64,
    /// `None` when the cell is infeasible.
    pub power: Option<f64>,
    pub stderr: Option<f64>,
    pub reps: usize,
    pub note: Option<String>,
}

fn cell_seed(master: u64, k: usize, n: usize, delta: f64, preference: PreferenceType) -> u64 {
    let s = derive_seed(master, k as u64);
    let s = derive_seed(s, n as u64);
    let s = derive_seed(s, delta.to_bits());
    derive_seed(s, preference.index())
}

pub fn run_power_study(spec: &PowerStudySpec) -> Result<Vec<PowerRow>> {
    if spec.reps == 0 {
        return Err(Error::InvalidParameter("replications must be >= 1".into()));
    }
    for &d in &spec.deltas {
        GeneratorConfig::new(2, d, PreferenceType::Unidirectional)?;
    }
    if let Some(a) = spec.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::InvalidParameter(format!("alpha {a} outside [0, 1]")));
    }
    let mc = McConfig {
        reps: spec.mc_reps.max(1),
        master_seed: spec.seed,
        workers: spec.workers,
    };
    let mut rows = Vec::new();
    for &k in &spec.ks {
        for &n in &spec.ns {
            let prepared: Vec<(TestKind, Result<PreparedTest>)> = spec
                .tests
                .iter()
                .map(|&t| (t, PreparedTest::new(t, k, n, &mc, spec.strict_cap)))
                .collect();
            let ready: Vec<&PreparedTest> = prepared
                .iter()
                .filter_map(|(_, p)| p.as_ref().ok())
                .collect();
            for &pref in &spec.preferences {
                for &delta in &spec.deltas {
                    let cfg = GeneratorConfig::new(k, delta, pref)?;
                    let seed = cell_seed(spec.seed, k, n, delta, pref);
                    let pvals = simulate_cell(&ready, &cfg, n, spec.reps, seed, spec.workers);
                    let mut next = 0;
                    for (kind, prep) in &prepared {
                        match prep {
                            Ok(_) => {
                                let ps = &pvals[next];
                                next += 1;
                                for &alpha in &spec.alphas {
                                    let hits = ps.iter().filter(|&&p| p <= alpha).count();
                                    let power = hits as f64 / spec.reps as f64;
                                    rows.push(PowerRow {
                                        test: *kind,
                                        k,
                                        n,
                                        delta,
                                        preference: pref,
                                        alpha,
                                        power: Some(power),
                                        stderr: Some((power * (1.0 - power) / spec.reps as f64).sqrt()),
                                        reps: spec.reps,
                                        note: None,
                                    });
                                }
                            }
                            Err(e) => {
                                for &alpha in &spec.alphas {
                                    rows.push(PowerRow {
                                        test: *kind,
                                        k,
                                        n,
                                        delta,
                                        preference: pref,
                                        alpha,
                                        power: None,
                                        stderr: None,
                                        reps: 0,
                                        note: Some(e.to_string()),
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Per-replication p-values of every test in one (K, N, δ, type) cell. The
/// same simulated sets feed every test, so comparisons between tests are
/// paired.
pub fn simulate_cell(
    tests: &[&PreparedTest],
    cfg: &GeneratorConfig,
    n: usize,
    reps: usize,
    seed: u64,
    workers: Option<usize>,
) -> Vec<Vec<f64>> {
    let run = |r: usize| {
        let mut rng = replication_rng(seed, r as u64);
        let set = generate_set(cfg, n, &mut rng);
        tests.iter().map(|t| t.p_value(&set)).collect::<Vec<f64>>()
    };
    let per_rep: Vec<Vec<f64>> = match workers {
        Some(1) => (0..reps).map(run).collect(),
        _ => (0..reps).into_par_iter().map(run).collect(),
    };
    (0..tests.len())
        .map(|t| per_rep.iter().map(|ps| ps[t]).collect())
        .collect()
}

pub const POWER_TABLE_HEADER: &str = "test,K,N,delta,preference_type,alpha,power,stderr,reps";

/// Writes rows as comma-separated text; infeasible cells show `NA`.
pub fn write_power_table<W: Write>(rows: &[PowerRow], mut out: W) -> Result<()> {
    writeln!(out, "{POWER_TABLE_HEADER}")?;
    for r in rows {
        let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"));
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.test,
            r.k,
            r.n,
            r.delta,
            r.preference,
            r.alpha,
            fmt(r.power),
            fmt(r.stderr),
            r.reps
        )?;
    }
    Ok(())
}
