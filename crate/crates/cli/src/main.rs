use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use orderaudit::aggregate::DEFAULT_STRICT_CAP;
use orderaudit::io::write_full;
use orderaudit::mc::{null_statistics, replication_rng, uniform_set, DEFAULT_MC_REPS};
use orderaudit::ordering::numbered_items;
use orderaudit::sim::{generate_set, write_power_table, PreparedTest};
use orderaudit::{
    cascading_chi_squared_test, emit_report, equality_of_permutations_test, frequency_test,
    ks_uniformity_test, lc_test, max_lc_test, parse_orderings, positionwise_cascading_test,
    rank_compatibility_test, rank_test, render_report, run_power_study, shrinking_max_lc_test,
    CascadeOrder, EqPermsOptions, GeneratorConfig, Input, InputFormat, MaxLcMode, McConfig,
    OrderingSet, PowerStudySpec, PreferenceRanking, PreferenceType, ScoreVector, ShrinkSpec,
    TestKind, TestResult,
};

#[derive(Parser)]
#[command(name = "orderaudit", version, about = "Tests whether repeated orderings were uniformly randomized")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one test on a data file and print the report.
    Test(TestArgs),
    /// Simulate orderings from the biased-selection model.
    Generate(GenerateArgs),
    /// Estimate rejection rates over a grid of settings.
    Power(PowerArgs),
    /// Sample a test statistic under uniform randomization.
    NullDist(NullDistArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Lc,
    RankCompat,
    MaxLcFree,
    MaxLcStrict,
    Rank,
    EqPerms,
    Cascade,
    Positionwise,
    ShrinkMaxLc,
    Frequency,
    Ks,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Full,
    Partial,
    Shrinking,
}

impl From<Format> for InputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Full => InputFormat::Full,
            Format::Partial => InputFormat::Partial,
            Format::Shrinking => InputFormat::Shrinking,
        }
    }
}

#[derive(Args)]
struct McArgs {
    /// Monte Carlo replications.
    #[arg(long, default_value_t = DEFAULT_MC_REPS)]
    mc_reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
}

impl McArgs {
    fn config(&self) -> Result<McConfig> {
        let mut cfg = McConfig::new(self.mc_reps, self.seed)?;
        if let Some(w) = self.workers {
            if w == 0 {
                bail!(orderaudit::Error::InvalidParameter("--workers must be >= 1".into()));
            }
            cfg = cfg.with_workers(w);
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct TestArgs {
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long)]
    input: PathBuf,
    /// Defaults to the layout the method expects.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Score vector, either `A=-1,B=0,C=1` or values in canonical item order.
    #[arg(long, allow_hyphen_values = true)]
    scores: Option<String>,
    /// Preference ranking such as `A>B,C>D` (`,` ties items).
    #[arg(long)]
    ranking: Option<String>,
    #[command(flatten)]
    mc: McArgs,
    /// Use Monte Carlo p-values for eq-perms and cascade.
    #[arg(long)]
    mc_pvalue: bool,
    /// Run eq-perms even when expected counts are very small.
    #[arg(long)]
    force: bool,
    /// Print a reject/retain line for this significance level.
    #[arg(long)]
    alpha: Option<f64>,
    /// Largest K searched by shrink-max-lc.
    #[arg(long, default_value_t = orderaudit::adapted::DEFAULT_SHRINK_MAX_K)]
    max_k: usize,
    /// Most rankings max-lc-strict may enumerate.
    #[arg(long, default_value_t = DEFAULT_STRICT_CAP)]
    strict_cap: u128,
    /// Item processing order for cascade, e.g. `C,A,B`.
    #[arg(long)]
    cascade_order: Option<String>,
    /// Also write the report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value = "unidirectional")]
    preference: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PowerArgs {
    #[arg(long, value_delimiter = ',', default_value = "lc,rank-compat,max-lc-free,max-lc-strict,rank,eq-perms,cascade")]
    tests: Vec<String>,
    #[arg(long = "k", value_delimiter = ',', default_value = "4")]
    ks: Vec<usize>,
    #[arg(long = "n", value_delimiter = ',', default_value = "250")]
    ns: Vec<usize>,
    #[arg(long = "delta", value_delimiter = ',', default_value = "0.8")]
    deltas: Vec<f64>,
    #[arg(long = "preference", value_delimiter = ',', default_value = "unidirectional")]
    preferences: Vec<String>,
    #[arg(long = "alpha", value_delimiter = ',', default_value = "0.05")]
    alphas: Vec<f64>,
    /// Simulated data sets per cell.
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 2000)]
    mc_reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_STRICT_CAP)]
    strict_cap: u128,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NullDistArgs {
    /// One of lc, rank-compat, max-lc-free, max-lc-strict, rank, eq-perms, cascade.
    #[arg(long)]
    method: String,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    mc: McArgs,
    #[arg(long, default_value_t = DEFAULT_STRICT_CAP)]
    strict_cap: u128,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn full_set(input: Input) -> Result<OrderingSet> {
    match input {
        Input::Full(set) => Ok(set),
        _ => bail!(orderaudit::Error::InvalidInput(
            "this method needs full orderings (--format full)".into()
        )),
    }
}

fn parse_scores(text: &str, set: &OrderingSet) -> Result<ScoreVector> {
    let k = set.k();
    let mut raw = vec![f64::NAN; k];
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let value = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| anyhow!(orderaudit::Error::InvalidParameter(format!("bad score `{s}`"))))
    };
    if parts.iter().any(|p| p.contains('=')) {
        for part in &parts {
            let (label, v) = part.split_once('=').ok_or_else(|| {
                anyhow!(orderaudit::Error::InvalidParameter(format!("expected label=value, got `{part}`")))
            })?;
            let idx = set
                .items()
                .iter()
                .position(|i| i.as_str() == label.trim())
                .ok_or_else(|| anyhow!(orderaudit::Error::UnknownItemId(label.trim().to_string())))?;
            raw[idx] = value(v.trim())?;
        }
        if raw.iter().any(|v| v.is_nan()) {
            bail!(orderaudit::Error::InvalidParameter("every item needs a score".into()));
        }
    } else {
        if parts.len() != k {
            bail!(orderaudit::Error::DimensionMismatch {
                expected: k,
                found: parts.len()
            });
        }
        for (slot, part) in raw.iter_mut().zip(&parts) {
            *slot = value(part)?;
        }
    }
    Ok(ScoreVector::from_raw(&raw)?)
}

fn read_p_values(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(orderaudit::Error::from)?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => bail!(orderaudit::Error::BadCell {
                row: i + 1,
                column: 1,
                message: format!("`{line}` is not a number"),
            }),
        }
    }
    Ok(values)
}

fn run_test(args: &TestArgs) -> Result<TestResult> {
    let mc = args.mc.config()?;
    if let Method::Ks = args.method {
        return Ok(ks_uniformity_test(&read_p_values(&args.input)?)?);
    }
    let format = args.format.map(InputFormat::from).unwrap_or(match args.method {
        Method::Positionwise | Method::Frequency => InputFormat::Partial,
        Method::ShrinkMaxLc => InputFormat::Shrinking,
        _ => InputFormat::Full,
    });
    let input = parse_orderings(&args.input, format)?;
    let result = match args.method {
        Method::Lc => {
            let set = full_set(input)?;
            let scores = match (&args.scores, &args.ranking) {
                (Some(s), _) => parse_scores(s, &set)?,
                (None, Some(r)) => orderaudit::scores_from_ranking(&PreferenceRanking::parse(r, set.items())?)?,
                (None, None) => bail!(orderaudit::Error::InvalidParameter(
                    "lc needs --scores or --ranking".into()
                )),
            };
            lc_test(&set, &scores)?
        }
        Method::RankCompat => {
            let set = full_set(input)?;
            let text = args.ranking.as_deref().ok_or_else(|| {
                anyhow!(orderaudit::Error::InvalidParameter("rank-compat needs --ranking".into()))
            })?;
            rank_compatibility_test(&set, &PreferenceRanking::parse(text, set.items())?)?
        }
        Method::MaxLcFree => max_lc_test(&full_set(input)?, MaxLcMode::Free, &mc)?,
        Method::MaxLcStrict => max_lc_test(
            &full_set(input)?,
            MaxLcMode::Strict { cap: args.strict_cap },
            &mc,
        )?,
        Method::Rank => rank_test(&full_set(input)?, &mc),
        Method::EqPerms => {
            let opts = EqPermsOptions {
                force: args.force,
                mc: args.mc_pvalue.then_some(mc),
            };
            equality_of_permutations_test(&full_set(input)?, &opts)?
        }
        Method::Cascade => {
            let set = full_set(input)?;
            let order = match &args.cascade_order {
                Some(text) => {
                    let idx = text
                        .split(',')
                        .map(|label| {
                            set.items()
                                .iter()
                                .position(|i| i.as_str() == label.trim())
                                .ok_or_else(|| anyhow!(orderaudit::Error::UnknownItemId(label.trim().to_string())))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    CascadeOrder::new(idx, set.k())?
                }
                None => CascadeOrder::canonical(set.k()),
            };
            cascading_chi_squared_test(&set, &order, args.mc_pvalue.then_some(&mc))?
        }
        Method::Positionwise | Method::Frequency => {
            let Input::Partial(draws) = input else {
                bail!(orderaudit::Error::InvalidInput(
                    "this method needs partial draws (--format partial)".into()
                ));
            };
            if let Method::Frequency = args.method {
                frequency_test(&draws)
            } else {
                positionwise_cascading_test(&draws, &mc)
            }
        }
        Method::ShrinkMaxLc => {
            let Input::Shrinking(series) = input else {
                bail!(orderaudit::Error::InvalidInput(
                    "shrink-max-lc needs a shrinking series (--format shrinking)".into()
                ));
            };
            shrinking_max_lc_test(&series, &ShrinkSpec { max_k: args.max_k }, &mc)?
        }
        Method::Ks => unreachable!(),
    };
    Ok(result)
}

fn cmd_test(args: TestArgs) -> Result<()> {
    if let Some(a) = args.alpha {
        if !(0.0..=1.0).contains(&a) {
            bail!(orderaudit::Error::InvalidParameter(format!("alpha {a} outside [0, 1]")));
        }
    }
    let result = run_test(&args)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    print!("{}", render_report(&result));
    if let Some(path) = &args.out {
        emit_report(&result, path)?;
    }
    if let Some(a) = args.alpha {
        let verdict = if result.rejects_at(a) { "reject" } else { "do not reject" };
        eprintln!("{verdict} uniform randomization at alpha = {a}");
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let pref: PreferenceType = args.preference.parse()?;
    let cfg = GeneratorConfig::new(args.k, args.delta, pref)?;
    let mut rng = replication_rng(args.seed, 0);
    let set = generate_set(&cfg, args.n, &mut rng);
    let mut out = output(args.out.as_deref())?;
    write_full(&set, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_power(args: PowerArgs) -> Result<()> {
    let spec = PowerStudySpec {
        tests: args
            .tests
            .iter()
            .map(|t| t.parse::<TestKind>())
            .collect::<orderaudit::Result<_>>()?,
        ks: args.ks,
        ns: args.ns,
        deltas: args.deltas,
        preferences: args
            .preferences
            .iter()
            .map(|p| p.parse::<PreferenceType>())
            .collect::<orderaudit::Result<_>>()?,
        reps: args.reps,
        alphas: args.alphas,
        mc_reps: args.mc_reps,
        seed: args.seed,
        strict_cap: args.strict_cap,
        workers: args.workers,
    };
    if spec.mc_reps == 0 {
        bail!(orderaudit::Error::InvalidParameter("--mc-reps must be >= 1".into()));
    }
    let rows = run_power_study(&spec)?;
    for r in rows.iter().filter(|r| r.note.is_some()) {
        eprintln!(
            "note: {} at K = {}, N = {} not run: {}",
            r.test,
            r.k,
            r.n,
            r.note.as_deref().unwrap_or_default()
        );
    }
    let mut out = output(args.out.as_deref())?;
    write_power_table(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_null_dist(args: NullDistArgs) -> Result<()> {
    let kind: TestKind = args.method.parse()?;
    let mc = args.mc.config()?;
    // the prepared test's own null sample is not needed here
    let prep = PreparedTest::new(kind, args.k, args.n, &McConfig::new(1, args.mc.seed)?, args.strict_cap)?;
    let items = numbered_items(args.k);
    let samples = null_statistics(&mc, |rng| prep.statistic(&uniform_set(&items, args.n, rng)));
    let mut out = output(args.out.as_deref())?;
    writeln!(out, "statistic")?;
    for s in samples {
        writeln!(out, "{s:.17e}")?;
    }
    out.flush()?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<orderaudit::Error>() {
        Some(e) if e.is_infeasible() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Power(a) => cmd_power(a),
        Command::NullDist(a) => cmd_null_dist(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
