//! Command-line front end.
//!
//! Subcommands compose into a batch workflow: parse corpus files, compute
//! metrics, aggregate, render reports. Machine-readable results go to
//! stdout; optional file artifacts go to `--out-dir` (or `$VPEVAL_OUT_DIR`).
//!
//! Exit codes: 0 success, 1 input error, 2 computational domain error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use vpeval::attack::{
    generate_population, population_to_pool, run_attack, AnonymizationPolicy, Assignment,
    PopulationConfig, Strategy,
};
use vpeval::corpus;
use vpeval::metrics::tradeoff::TradeoffError;
use vpeval::pitch::{corpus_pitch_correlation, extract_f0, pitch_correlation, PitchConfig};
use vpeval::report::{
    putr_sweep, render_csv, render_markdown, render_svg, EvalReport, MetricRow, ReportMeta,
    SweepPoint, DEFAULT_LAMBDA_GRID,
};
use vpeval::selection::{
    build_pool, pseudo_xvector, select_random, select_random_gender_preserving, Direction, Gender,
    SelectionParams, SpeakerPool,
};
use vpeval::{compute_eer, compute_putr, compute_wer, TradeoffInputs};

#[derive(Parser)]
#[command(name = "vpeval", version, about = "Speech-privacy evaluation toolkit")]
struct Cli {
    /// Directory for file artifacts (default: $VPEVAL_OUT_DIR, else none)
    #[arg(long, global = true, env = "VPEVAL_OUT_DIR")]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equal error rate from a trials file and a score file
    Eer {
        #[arg(long)]
        trials: PathBuf,
        #[arg(long)]
        scores: PathBuf,
    },
    /// Corpus word error rate from reference and hypothesis transcripts
    Wer {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        hyp: PathBuf,
        /// Strip leading/trailing punctuation from tokens
        #[arg(long)]
        strip_punct: bool,
    },
    /// Pitch correlation between original and anonymized audio
    PitchCorr(PitchCorrArgs),
    /// Privacy-to-utility trade-off; rates are percent values
    Putr(PutrArgs),
    /// Build a speaker pool from utterance embeddings
    Pool {
        #[arg(long)]
        embeddings: PathBuf,
    },
    /// Select an anonymization target from a pool
    Select(SelectArgs),
    /// Run the semi-informed attack simulation on a synthetic population
    Simulate(SimulateArgs),
    /// Aggregate per-subset values and render markdown/CSV/SVG reports
    Report(ReportArgs),
}

#[derive(Args)]
struct PitchCorrArgs {
    /// Original WAV (paired with --anon)
    #[arg(long, requires = "anon", conflicts_with = "pairs")]
    orig: Option<PathBuf>,
    /// Anonymized WAV
    #[arg(long)]
    anon: Option<PathBuf>,
    /// Manifest of pairs: `utt_id<TAB>orig.wav<TAB>anon.wav` per line
    #[arg(long)]
    pairs: Option<PathBuf>,
}

#[derive(Args)]
struct PutrArgs {
    /// Original WER in percent
    #[arg(long)]
    wer0: f64,
    /// Anonymized WER in percent
    #[arg(long)]
    wer1: f64,
    /// Original EER in percent
    #[arg(long)]
    eer0: f64,
    /// Anonymized EER in percent
    #[arg(long)]
    eer1: f64,
    /// Comma-separated lambda grid
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LAMBDA_GRID)]
    lambda_grid: Vec<f64>,
    /// Trial count backing the EER; zero rates are clamped to 1/(2N)
    #[arg(long)]
    num_trials: Option<usize>,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    pool: PathBuf,
    #[arg(long)]
    source_id: String,
    #[arg(long, value_enum, default_value_t = StrategyArg::Random)]
    strategy: StrategyArg,
    /// Needed for gender-preserving selection
    #[arg(long)]
    source_gender: Option<String>,
    /// Source embedding as whitespace-separated floats (pseudo strategy);
    /// defaults to the pool entry of --source-id
    #[arg(long)]
    source_vector: Option<String>,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    m: usize,
    #[arg(long, value_enum, default_value_t = DirectionArg::Closest)]
    direction: DirectionArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 20)]
    speakers: usize,
    #[arg(long, default_value_t = 10)]
    utts: usize,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma_b: f64,
    #[arg(long, default_value_t = 0.1)]
    sigma_w: f64,
    /// Speakers in the disjoint target pool
    #[arg(long, default_value_t = 40)]
    pool_speakers: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::Random)]
    strategy: StrategyArg,
    #[arg(long, value_enum, default_value_t = AssignmentArg::PerUtterance)]
    assignment: AssignmentArg,
    /// Leakage coefficient: 0 = full replacement, 1 = identity
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 10_000)]
    num_trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    m: usize,
}

#[derive(Args)]
struct ReportArgs {
    /// Per-subset metric values: `subset gender system value` per line
    #[arg(long)]
    values: Option<PathBuf>,
    /// Subset weights: `name gender weight` per line (default: the
    /// standard six-subset weights)
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Metric name used as the table heading
    #[arg(long, default_value = "EER[%]")]
    metric_name: String,
    /// Sweep systems: `name wer1 eer1` per line, rates in percent
    #[arg(long)]
    systems: Option<PathBuf>,
    /// Baseline rates "wer0,eer0" in percent
    #[arg(long, value_delimiter = ',')]
    baseline: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LAMBDA_GRID)]
    lambda_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values = ["markdown", "csv", "svg"])]
    format: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed timestamp for reproducible output (default: current time)
    #[arg(long)]
    timestamp: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Identity,
    Random,
    Gender,
    Pseudo,
}

#[derive(Clone, Copy, ValueEnum)]
enum AssignmentArg {
    PerUtterance,
    PerSpeaker,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Closest,
    Farthest,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Closest => Direction::Closest,
            DirectionArg::Farthest => Direction::Farthest,
        }
    }
}

enum CliError {
    Input(String),
    Domain(String),
}

impl CliError {
    fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }
    fn domain(e: impl std::fmt::Display) -> Self {
        CliError::Domain(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn write_artifact(out_dir: &Option<PathBuf>, name: &str, content: &str) -> Result<(), CliError> {
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(CliError::input)?;
        std::fs::write(dir.join(name), content).map_err(CliError::input)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Eer { trials, scores } => {
            let trial_list = corpus::parse_trials(&trials).map_err(CliError::input)?;
            let scored = corpus::parse_scores(&scores, &trial_list).map_err(CliError::input)?;
            let result = compute_eer(&scored).map_err(CliError::domain)?;
            println!("eer {:.6}", result.eer);
            println!("eer_percent {:.2}", result.eer * 100.0);
            let mut sweep_csv = String::from("threshold,far,frr\n");
            for p in &result.sweep {
                sweep_csv.push_str(&format!("{},{},{}\n", p.threshold, p.far, p.frr));
            }
            write_artifact(&cli.out_dir, "eer_sweep.csv", &sweep_csv)?;
        }
        Command::Wer {
            reference,
            hyp,
            strip_punct,
        } => {
            let joined = corpus::parse_transcripts(&reference, &hyp).map_err(CliError::input)?;
            let pairs: Vec<_> = joined
                .pairs
                .into_iter()
                .map(|p| vpeval::TranscriptPair {
                    utt_id: p.utt_id,
                    reference: retokenize(&p.reference, strip_punct),
                    hypothesis: retokenize(&p.hypothesis, strip_punct),
                })
                .collect();
            let result = compute_wer(&pairs).map_err(CliError::domain)?;
            println!("wer {:.6}", result.wer);
            println!("wer_percent {:.2}", result.wer * 100.0);
            println!(
                "sub {} ins {} del {} ref_tokens {} missing_hyp {}",
                result.total.substitutions,
                result.total.insertions,
                result.total.deletions,
                result.total.reference_tokens,
                joined.missing_hypotheses
            );
        }
        Command::PitchCorr(args) => run_pitch_corr(args)?,
        Command::Putr(args) => {
            let floor = args.num_trials.map(|n| 1.0 / (2.0 * n as f64));
            let wer0 = percent_rate("wer0", args.wer0, floor)?;
            let wer1 = percent_rate("wer1", args.wer1, floor)?;
            let eer0 = percent_rate("eer0", args.eer0, floor)?;
            let eer1 = percent_rate("eer1", args.eer1, floor)?;
            for lambda in args.lambda_grid {
                let v = compute_putr(TradeoffInputs {
                    wer0,
                    wer1,
                    eer0,
                    eer1,
                    lambda,
                })
                .map_err(CliError::domain)?;
                println!("lambda {lambda} putr {v:.4}");
            }
        }
        Command::Pool { embeddings } => {
            let items = corpus::parse_embeddings(&embeddings).map_err(CliError::input)?;
            let pool = build_pool(&items).map_err(CliError::domain)?;
            let out: Vec<_> = pool
                .entries
                .iter()
                .map(|e| (e.speaker_id.clone(), e.gender, e.vector.clone()))
                .collect();
            print!("{}", corpus::write_embeddings(&out));
        }
        Command::Select(args) => run_select(args)?,
        Command::Simulate(args) => run_simulate(args, &cli.out_dir)?,
        Command::Report(args) => run_report(args, &cli.out_dir)?,
    }
    Ok(())
}

fn retokenize(tokens: &[String], strip_punct: bool) -> Vec<String> {
    vpeval::metrics::wer::tokenize(&tokens.join(" "), strip_punct)
}

/// Converts a percent value to a fraction, clamping zero rates to the
/// 1/(2N) floor when a trial count is available.
fn percent_rate(name: &str, percent: f64, floor: Option<f64>) -> Result<f64, CliError> {
    let fraction = percent / 100.0;
    if fraction > 0.0 {
        return Ok(fraction);
    }
    match floor {
        Some(f) => {
            eprintln!("warning: {name} = {percent}% clamped to {f} (1/(2*num_trials))");
            Ok(f)
        }
        None => Err(CliError::Input(format!(
            "{name} = {percent}% is outside (0, 100]; pass --num-trials to clamp zero rates"
        ))),
    }
}

fn run_pitch_corr(args: PitchCorrArgs) -> Result<(), CliError> {
    let config = PitchConfig::default();
    match (args.orig, args.anon, args.pairs) {
        (Some(orig), Some(anon), None) => {
            let a = corpus::read_wav(&orig).map_err(CliError::input)?;
            let b = corpus::read_wav(&anon).map_err(CliError::input)?;
            let ca = extract_f0(&a.audio, &config).map_err(CliError::domain)?;
            let cb = extract_f0(&b.audio, &config).map_err(CliError::domain)?;
            let rho = pitch_correlation(&ca, &cb).map_err(CliError::domain)?;
            println!("rho_f0 {rho:.4}");
        }
        (None, None, Some(pairs_path)) => {
            let manifest =
                std::fs::read_to_string(&pairs_path).map_err(CliError::input)?;
            let mut pairs = Vec::new();
            for (i, line) in manifest.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() != 3 {
                    return Err(CliError::Input(format!(
                        "{}:{}: expected `utt_id<TAB>orig<TAB>anon`",
                        pairs_path.display(),
                        i + 1
                    )));
                }
                let orig = corpus::read_wav(Path::new(fields[1])).map_err(CliError::input)?;
                let anon = corpus::read_wav(Path::new(fields[2])).map_err(CliError::input)?;
                pairs.push((orig.audio, anon.audio));
            }
            let (mean, undefined) =
                corpus_pitch_correlation(&pairs, &config).map_err(CliError::domain)?;
            println!("mean_rho_f0 {mean:.4}");
            println!("undefined_pairs {undefined}");
        }
        _ => {
            return Err(CliError::Input(
                "pass either --orig and --anon, or --pairs".into(),
            ))
        }
    }
    Ok(())
}

fn load_pool(path: &Path) -> Result<SpeakerPool, CliError> {
    let items = corpus::parse_embeddings(path).map_err(CliError::input)?;
    build_pool(&items).map_err(CliError::domain)
}

fn run_select(args: SelectArgs) -> Result<(), CliError> {
    let pool = load_pool(&args.pool)?;
    match args.strategy {
        StrategyArg::Identity => {
            return Err(CliError::Input("identity is not a selection strategy".into()))
        }
        StrategyArg::Random => {
            let t = select_random(&pool, &args.source_id, args.seed).map_err(CliError::domain)?;
            println!("{}\t{}\t{}", t.speaker_id, t.gender.as_str(), join_vec(&t.vector));
        }
        StrategyArg::Gender => {
            let gender = args
                .source_gender
                .as_deref()
                .and_then(Gender::parse)
                .ok_or_else(|| {
                    CliError::Input("--source-gender F|M required for gender strategy".into())
                })?;
            let t = select_random_gender_preserving(&pool, &args.source_id, gender, args.seed)
                .map_err(CliError::domain)?;
            println!("{}\t{}\t{}", t.speaker_id, t.gender.as_str(), join_vec(&t.vector));
        }
        StrategyArg::Pseudo => {
            let source = match &args.source_vector {
                Some(text) => text
                    .split_whitespace()
                    .map(|v| v.parse::<f64>().map_err(CliError::input))
                    .collect::<Result<Vec<f64>, _>>()?,
                None => pool
                    .entries
                    .iter()
                    .find(|e| e.speaker_id == args.source_id)
                    .map(|e| e.vector.clone())
                    .ok_or_else(|| {
                        CliError::Input(format!("'{}' not in pool; pass --source-vector", args.source_id))
                    })?,
            };
            let params = SelectionParams {
                n_closest: args.n,
                m_sampled: args.m,
                direction: args.direction.into(),
                seed: args.seed,
            };
            let v = pseudo_xvector(&pool, &source, &params).map_err(CliError::domain)?;
            println!("pseudo\tU\t{}", join_vec(&v));
        }
    }
    Ok(())
}

fn join_vec(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn run_simulate(args: SimulateArgs, out_dir: &Option<PathBuf>) -> Result<(), CliError> {
    let population = generate_population(&PopulationConfig {
        num_speakers: args.speakers,
        utts_per_speaker: args.utts,
        dim: args.dim,
        between_spread: args.sigma_b,
        within_spread: args.sigma_w,
        seed: args.seed,
    })
    .map_err(CliError::input)?;
    let pool_population = generate_population(&PopulationConfig {
        num_speakers: args.pool_speakers,
        utts_per_speaker: args.utts,
        dim: args.dim,
        between_spread: args.sigma_b,
        within_spread: args.sigma_w,
        seed: args.seed.wrapping_add(0x9e3779b9),
    })
    .map_err(CliError::input)?;
    let pool = population_to_pool(&pool_population).map_err(CliError::domain)?;

    let strategy = match args.strategy {
        StrategyArg::Identity => Strategy::Identity,
        StrategyArg::Random => Strategy::Random,
        StrategyArg::Gender => Strategy::GenderPreserving,
        StrategyArg::Pseudo => Strategy::PseudoXvector(SelectionParams {
            n_closest: args.n,
            m_sampled: args.m,
            direction: Direction::Closest,
            seed: 0,
        }),
    };
    let policy = AnonymizationPolicy {
        strategy,
        assignment: match args.assignment {
            AssignmentArg::PerUtterance => Assignment::PerUtterance,
            AssignmentArg::PerSpeaker => Assignment::PerSpeaker,
        },
        leakage: args.alpha,
    };
    let outcome = run_attack(&population, &pool, &policy, &policy, args.num_trials, args.seed)
        .map_err(CliError::domain)?;
    println!("eer {:.6}", outcome.eer);
    println!("eer_percent {:.2}", outcome.eer * 100.0);

    // same formats as the real scoring path, so both pipelines share it
    let trials: Vec<corpus::VerificationTrial> = outcome
        .trials
        .iter()
        .map(|t| corpus::VerificationTrial {
            enroll_id: t.enroll_id.clone(),
            test_id: t.test_id.clone(),
            label: t.label,
        })
        .collect();
    write_artifact(out_dir, "sim_trials.txt", &corpus::write_trials(&trials))?;
    write_artifact(out_dir, "sim_scores.txt", &corpus::write_scores(&outcome.trials))?;
    Ok(())
}

fn run_report(args: ReportArgs, out_dir: &Option<PathBuf>) -> Result<(), CliError> {
    let mut report = EvalReport {
        metric_name: args.metric_name.clone(),
        meta: ReportMeta {
            seed: args.seed,
            timestamp: args.timestamp.clone().unwrap_or_else(now_stamp),
        },
        ..EvalReport::default()
    };

    if let Some(values_path) = &args.values {
        let weights = match &args.weights {
            Some(p) => corpus::parse_weights(p).map_err(CliError::input)?,
            None => corpus::default_weights(),
        };
        let content = std::fs::read_to_string(values_path).map_err(CliError::input)?;
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(CliError::Input(format!(
                    "{}:{}: expected `subset gender system value`",
                    values_path.display(),
                    i + 1
                )));
            }
            let gender = Gender::parse(f[1]).ok_or_else(|| {
                CliError::Input(format!("{}:{}: unknown gender '{}'", values_path.display(), i + 1, f[1]))
            })?;
            let weight = weights
                .iter()
                .find(|w| w.name == f[0] && (w.gender == gender || w.gender == Gender::Unknown))
                .map(|w| w.weight)
                .ok_or_else(|| {
                    CliError::Input(format!("no weight for subset '{}' gender '{}'", f[0], f[1]))
                })?;
            report.rows.push(MetricRow {
                subset: f[0].into(),
                gender,
                weight,
                system: f[2].into(),
                value: f[3].parse().map_err(CliError::input)?,
            });
        }
        report.compute_aggregates().map_err(CliError::domain)?;
    }

    if let Some(systems_path) = &args.systems {
        let baseline = args.baseline.as_ref().filter(|b| b.len() == 2).ok_or_else(|| {
            CliError::Input("--baseline wer0,eer0 (percent) required with --systems".into())
        })?;
        let content = std::fs::read_to_string(systems_path).map_err(CliError::input)?;
        let mut systems = Vec::new();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(CliError::Input(format!(
                    "{}:{}: expected `name wer1 eer1`",
                    systems_path.display(),
                    i + 1
                )));
            }
            let wer1: f64 = f[1].parse().map_err(CliError::input)?;
            let eer1: f64 = f[2].parse().map_err(CliError::input)?;
            systems.push((f[0].to_string(), wer1 / 100.0, eer1 / 100.0));
        }
        report.putr_sweep = putr_sweep(
            &systems,
            (baseline[0] / 100.0, baseline[1] / 100.0),
            &args.lambda_grid,
        )
        .map_err(|e: TradeoffError| CliError::domain(e))?;
    }

    report.validate().map_err(CliError::domain)?;
    let markdown = render_markdown(&report);
    if args.format.iter().any(|f| f == "markdown") {
        print!("{markdown}");
        write_artifact(out_dir, "report.md", &markdown)?;
    }
    if args.format.iter().any(|f| f == "csv") {
        write_artifact(out_dir, "report.csv", &render_csv(&report))?;
    }
    if args.format.iter().any(|f| f == "svg") {
        if let Some(svg) = render_svg(&report.putr_sweep) {
            write_artifact(out_dir, "putr_sweep.svg", &svg)?;
        }
    }
    print_sweep(&report.putr_sweep);
    Ok(())
}

fn print_sweep(sweep: &[SweepPoint]) {
    for p in sweep {
        println!("sweep {} lambda {} putr {:.4}", p.system, p.lambda, p.putr);
    }
}

fn now_stamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}
