//! The `sentrade` command line.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::backtest::{run_backtest, train_params};
use crate::config::{params_file, Config};
use crate::error::{Error, Result};
use crate::io;
use crate::pipeline::window_diagnostics;
use crate::sessions::{build_sessions, compute_returns, parse_buckets, parse_ticks, session_prices, MarketCalendar, SessionSeries};
use crate::synth::{CountModel, ScenarioKind, SyntheticScenario};

#[derive(Debug, Parser)]
#[command(name = "sentrade", version, about = "Adaptive sentiment-driven return prediction and backtesting")]
pub struct Cli {
    /// Configuration file (`key = value` lines)
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Maximum worker threads
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a day/night session series from prices and sentiment buckets
    Aggregate(AggregateArgs),
    /// Grid-search beta and gamma on the training span
    Train(TrainArgs),
    /// Run the strategy over the evaluation span
    Backtest(BacktestArgs),
    /// Generate a synthetic session series
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// `timestamp,price` CSV
    #[arg(long, value_name = "PATH")]
    pub prices: PathBuf,
    /// `bucket_start,positive,negative,neutral` CSV
    #[arg(long, value_name = "PATH")]
    pub sentiment: PathBuf,
    /// Market calendar file
    #[arg(long, value_name = "PATH")]
    pub calendar: PathBuf,
    /// Brand recorded in the output; defaults to the sentiment file stem
    #[arg(long)]
    pub brand: Option<String>,
    #[arg(long, value_name = "PREFIX")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Sessions CSV
    #[arg(long, value_name = "PATH")]
    pub sessions: PathBuf,
    #[arg(long, value_name = "PREFIX")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BacktestArgs {
    /// Sessions CSV
    #[arg(long, value_name = "PATH")]
    pub sessions: PathBuf,
    /// Params file from `train`; without it (and without beta/gamma in the
    /// config) the parameters are trained first
    #[arg(long, value_name = "PATH")]
    pub params: Option<PathBuf>,
    #[arg(long, value_name = "PREFIX")]
    pub out: PathBuf,
    /// Also write every fitted candidate to `PREFIX.models.csv`
    #[arg(long)]
    pub models: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kind {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Counts {
    Poisson,
    Constant,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Number of sessions
    #[arg(long, short = 'n', default_value_t = 200)]
    pub sessions: usize,
    /// Overrides the config seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sentiment loading (kind B)
    #[arg(long)]
    pub signal: Option<f64>,
    /// Standard deviation of the return noise
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a2: Option<f64>,
    #[arg(long, value_enum)]
    pub counts: Option<Counts>,
    #[arg(long, value_name = "PREFIX")]
    pub out: PathBuf,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::from(e).in_file(path))
}

fn output(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let run = || -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        body(&mut w)?;
        w.flush()?;
        Ok(())
    };
    run().map_err(|e| e.in_file(path))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn load_series(path: &Path) -> Result<SessionSeries> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("series");
    io::read_sessions(open(path)?, stem).map_err(|e| e.in_file(path))
}

fn aggregate(cfg: &Config, args: &AggregateArgs) -> Result<()> {
    let calendar = MarketCalendar::parse(&read_text(&args.calendar)?).map_err(|e| e.in_file(&args.calendar))?;
    let ticks = parse_ticks(open(&args.prices)?).map_err(|e| e.in_file(&args.prices))?;
    let buckets = parse_buckets(open(&args.sentiment)?).map_err(|e| e.in_file(&args.sentiment))?;
    let daily = session_prices(&ticks, &calendar, cfg.offset_minutes);
    let built = build_sessions(&daily.days, &buckets)?;
    let brand = args
        .brand
        .clone()
        .unwrap_or_else(|| args.sentiment.file_stem().and_then(|s| s.to_str()).unwrap_or("brand").to_string());
    let series = compute_returns(brand, built.sessions)?;
    for w in daily.warnings.iter().chain(&built.warnings) {
        eprintln!("warning: {w}");
    }
    eprintln!("{} sessions from {} trading days", series.len(), daily.days.len());
    write_file(&output(&args.out, ".sessions.csv"), |w| io::write_sessions(w, &series, &[]))
}

fn train(cfg: &Config, args: &TrainArgs) -> Result<()> {
    let series = load_series(&args.sessions)?;
    let started = Instant::now();
    let result = train_params(&series, &cfg.backtest(), &cfg.grid()?)?;
    eprintln!("trained {} grid points in {:.2?}", result.grid.len(), started.elapsed());
    write_file(&output(&args.out, ".training.csv"), |w| io::write_training(w, &result.grid))?;
    write_file(&output(&args.out, ".params"), |w| Ok(w.write_all(params_file(result.beta, result.gamma).as_bytes())?))?;
    println!("beta = {}", result.beta);
    println!("gamma = {}", result.gamma);
    println!("train_return = {}", result.train_return);
    Ok(())
}

fn backtest(cfg: &Config, args: &BacktestArgs) -> Result<()> {
    let mut cfg = cfg.clone();
    if let Some(path) = &args.params {
        cfg.apply_params(&read_text(path)?).map_err(|e| e.in_file(path))?;
    }
    let series = load_series(&args.sessions)?;
    let bt = cfg.backtest();
    let started = Instant::now();
    let (training, eval) = run_backtest(&series, &bt, cfg.params(), &cfg.grid()?)?;
    let elapsed = started.elapsed();
    let fitted = series.len() - bt.pipeline.warmup();
    eprintln!("pipeline ran in {elapsed:.2?} ({:.2?} per session)", elapsed / fitted.max(1) as u32);
    if let Some(t) = &training {
        write_file(&output(&args.out, ".training.csv"), |w| io::write_training(w, &t.grid))?;
        write_file(&output(&args.out, ".params"), |w| Ok(w.write_all(params_file(t.beta, t.gamma).as_bytes())?))?;
    }
    write_file(&output(&args.out, ".predictions.csv"), |w| io::write_predictions(w, &eval.records))?;
    write_file(&output(&args.out, ".report.csv"), |w| io::write_report(w, &eval.ledger))?;
    if args.models {
        let fits = window_diagnostics(&series, &bt.pipeline, eval.span.clone())?;
        write_file(&output(&args.out, ".models.csv"), |w| io::write_models(w, &fits))?;
    }
    let l = &eval.ledger;
    println!("beta = {}", eval.params.beta);
    println!("gamma = {}", eval.params.gamma);
    println!("sessions = {}..{}", eval.span.start, eval.span.end);
    println!("trades = {}", l.n_trades);
    println!("hit_rate = {}", l.hit_rate.map_or_else(|| "na".to_string(), |h| h.to_string()));
    println!("cum_strategy = {}", l.final_strategy());
    println!("cum_benchmark = {}", l.final_benchmark());
    println!("cum_optimal = {}", l.final_optimal());
    Ok(())
}

fn synth(cfg: &Config, args: &SynthArgs) -> Result<()> {
    let kind = match args.kind {
        Kind::A => ScenarioKind::Autoregressive,
        Kind::B => ScenarioKind::SentimentDriven,
        Kind::C => ScenarioKind::Noise,
    };
    let mut sc = SyntheticScenario::new(kind, args.sessions, args.seed.unwrap_or(cfg.seed));
    if let Some(v) = args.signal {
        sc.signal_strength = v;
    }
    if let Some(v) = args.noise {
        sc.noise_sigma = v;
    }
    if let Some(v) = args.a1 {
        sc.a1 = v;
    }
    if let Some(v) = args.a2 {
        sc.a2 = v;
    }
    if let Some(c) = args.counts {
        sc.counts = match c {
            Counts::Poisson => CountModel::Poisson,
            Counts::Constant => CountModel::Constant,
        };
    }
    let series = sc.generate()?;
    eprintln!("{} sessions generated", series.len());
    write_file(&output(&args.out, ".sessions.csv"), |w| io::write_sessions(w, &series, &sc.describe()))
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => Config::parse(&read_text(path)?).map_err(|e| e.in_file(path))?,
        None => Config::default(),
    };
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.into())
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("--threads: {e}")))?;
    }
    match &cli.command {
        Command::Aggregate(a) => aggregate(&cfg, a),
        Command::Train(a) => train(&cfg, a),
        Command::Backtest(a) => backtest(&cfg, a),
        Command::Synth(a) => synth(&cfg, a),
    }
}

/// Parse `args`, run, and return the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
