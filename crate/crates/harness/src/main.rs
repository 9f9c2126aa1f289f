use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use turnbench::endpoint::{EndpointConfig, RemotePlayer};
use turnbench::human::HumanPlayer;
use turnbench::report::{self, ReportFormat};
use turnbench::runner::{run_dataset, PlayerKind, RunSpec, RunSummary};
use turnbench::{serve, store};
use turnbench_core::metrics::{Annotator, HeuristicAnnotator, RecordedAnnotator};
use turnbench_core::oracles::{calibrate, oracle_player, render_calibration, Certifier};
use turnbench_core::protocol::{play, Player};
use turnbench_core::{DatasetManifest, Difficulty, Registry, TaskOptions, Transcript, DEFAULT_MAX_TURNS};

#[derive(Parser)]
#[command(name = "turnbench", version, about = "Multi-turn reasoning games: generate datasets, run players, score transcripts")]
struct Cli {
    /// Serve the JSON-lines session protocol on stdin/stdout
    #[arg(long)]
    serve_stdio: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlayerArg {
    Remote,
    Oracle,
    Human,
}

impl From<PlayerArg> for PlayerKind {
    fn from(p: PlayerArg) -> Self {
        match p {
            PlayerArg::Remote => PlayerKind::Remote,
            PlayerArg::Oracle => PlayerKind::Oracle,
            PlayerArg::Human => PlayerKind::Human,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnnotatorArg {
    /// Keyword tagger over player messages
    Heuristic,
    /// Counts already stored on each turn
    Recorded,
}

#[derive(Subcommand)]
enum Command {
    /// Generate and certify a dataset
    Gen {
        /// Manifest JSON; defaults to the standard 8 tasks x 3 levels x 30
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Base seed when no manifest is given
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instances per task and level, overriding the manifest
        #[arg(long)]
        per_level: Option<u32>,
        /// Accept any well-formed instance without running the oracles
        #[arg(long)]
        skip_certify: bool,
        /// Monte-Carlo games per adversarial instance
        #[arg(long, default_value_t = 200)]
        replays: u32,
    },
    /// Oracle solve rate and turn usage per size parameter
    Calibrate {
        #[arg(long)]
        task: String,
        /// Comma-separated sizes, e.g. "6,9,12"
        #[arg(long)]
        params: String,
        #[arg(long, default_value_t = 10)]
        trials: u32,
        #[arg(long, value_enum, default_value = "table")]
        format: FormatArg,
    },
    /// Play every dataset instance and store transcripts
    Run {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum)]
        player: PlayerArg,
        /// Endpoint config JSON (remote player); the key is read from the
        /// environment variable it names, TURNBENCH_API_KEY by default
        #[arg(long)]
        endpoint: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Run directory; defaults to <dataset>/runs/<player>
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip instances that already have a transcript
        #[arg(long)]
        resume: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_TURNS)]
        max_turns: u32,
    },
    /// Compute metrics for a run directory
    Eval {
        #[arg(long)]
        results: PathBuf,
        /// Second run for pairwise efficiency
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: FormatArg,
        #[arg(long, value_enum, default_value = "heuristic")]
        annotator: AnnotatorArg,
    },
    /// Play a single generated instance interactively
    Play {
        #[arg(long)]
        task: String,
        #[arg(long)]
        difficulty: Difficulty,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "human")]
        player: PlayerArg,
        #[arg(long)]
        endpoint: Option<PathBuf>,
        /// Write the transcript here
        #[arg(long)]
        transcript: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_TURNS)]
        max_turns: u32,
    },
}

fn parse_sizes(text: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u32>().with_context(|| format!("bad size `{s}`")))
        .collect()
}

fn print_summary(summary: &RunSummary) {
    eprintln!(
        "{} instances: {} run, {} skipped, {} solved, {} player failures",
        summary.total,
        summary.completed,
        summary.skipped,
        summary.solved,
        summary.failures.len()
    );
}

fn cmd_gen(
    manifest: Option<PathBuf>,
    out: PathBuf,
    seed: u64,
    per_level: Option<u32>,
    skip_certify: bool,
    replays: u32,
) -> Result<()> {
    let mut manifest = match manifest {
        Some(path) => {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<DatasetManifest>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => DatasetManifest::standard(seed),
    };
    if let Some(n) = per_level {
        manifest.per_level_count = n;
    }
    let certifier = Certifier { replays, ..Certifier::default() };
    let summary = store::generate_to(&out, &manifest, (!skip_certify).then_some(&certifier))?;
    eprintln!(
        "wrote {} instances to {} ({} rejected candidates, {:.1}s)",
        summary.instances,
        out.display(),
        summary.retries,
        summary.elapsed.as_secs_f64()
    );
    Ok(())
}

fn cmd_calibrate(task: &str, params: &str, trials: u32, format: FormatArg) -> Result<()> {
    let registry = Registry::standard(&TaskOptions::default())?;
    let rows = calibrate(&registry, task, &parse_sizes(params)?, trials)?;
    match format {
        FormatArg::Json => println!("{}", serde_json::to_string_pretty(&rows)?),
        FormatArg::Table => print!("{}", render_calibration(&rows)),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    dataset: PathBuf,
    player: PlayerArg,
    endpoint: Option<PathBuf>,
    parallel: usize,
    out: Option<PathBuf>,
    resume: bool,
    max_turns: u32,
) -> Result<()> {
    if parallel == 0 {
        bail!("--parallel must be at least 1");
    }
    let kind = PlayerKind::from(player);
    let endpoint = endpoint.map(|p| EndpointConfig::load(&p)).transpose()?;
    let out = out.unwrap_or_else(|| {
        let name = match kind {
            PlayerKind::Remote => endpoint.as_ref().map_or("remote".to_string(), |e| e.model.replace('/', "_")),
            PlayerKind::Oracle => "oracle".to_string(),
            PlayerKind::Human => "human".to_string(),
        };
        dataset.join("runs").join(name)
    });
    let spec = RunSpec { endpoint, parallel, resume, max_turns, ..RunSpec::new(dataset, kind, &out) };
    let progress = |t: &Transcript, s: &RunSummary| {
        eprintln!("[{}/{}] {} {:?} in {} turns", s.completed + s.skipped, s.total, t.instance_id, t.final_status, t.turns.len());
    };
    let summary = run_dataset(&spec, Some(&progress))?;
    print_summary(&summary);
    eprintln!("transcripts in {}", store::transcript_dir(&out).display());
    Ok(())
}

fn cmd_eval(results: PathBuf, baseline: Option<PathBuf>, format: FormatArg, annotator: AnnotatorArg) -> Result<()> {
    let annotator: Box<dyn Annotator> = match annotator {
        AnnotatorArg::Heuristic => Box::new(HeuristicAnnotator::new()),
        AnnotatorArg::Recorded => Box::new(RecordedAnnotator),
    };
    let evaluation = report::evaluate(&results, baseline.as_deref(), annotator.as_ref())?;
    let format = match format {
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Table => ReportFormat::Table,
    };
    print!("{}", report::render(&evaluation, format));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_play(
    task: &str,
    difficulty: Difficulty,
    seed: u64,
    player: PlayerArg,
    endpoint: Option<PathBuf>,
    transcript: Option<PathBuf>,
    max_turns: u32,
) -> Result<()> {
    let registry = Registry::standard(&TaskOptions::default())?;
    let def = registry.lookup(task)?;
    let mut instance = def.generate(difficulty, seed)?;
    instance.instance_id = format!("{task}-{difficulty}-s{seed}");
    let mut player: Box<dyn Player> = match player {
        PlayerArg::Human => Box::new(HumanPlayer::new(io::stdin().lock(), io::stdout())),
        PlayerArg::Oracle => Box::new(oracle_player(&instance)?),
        PlayerArg::Remote => {
            let path = endpoint.context("--player remote needs --endpoint")?;
            Box::new(RemotePlayer::from_env(EndpointConfig::load(&path)?))
        }
    };
    let t = play(def.as_ref(), &instance, player.as_mut(), max_turns);
    if let Some(last) = t.turns.last() {
        println!("{}", last.feedback);
    }
    println!("{:?} after {} turns", t.final_status, t.turns.len());
    if let Some(path) = transcript {
        store::atomic_write(&path, (serde_json::to_string_pretty(&t)? + "\n").as_bytes())?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    if cli.serve_stdio {
        let registry = Registry::standard(&TaskOptions::default())?;
        serve::serve(&registry, io::stdin().lock(), io::stdout().lock())?;
        return Ok(());
    }
    let Some(command) = cli.command else {
        bail!("no command given; see --help");
    };
    match command {
        Command::Gen { manifest, out, seed, per_level, skip_certify, replays } => {
            cmd_gen(manifest, out, seed, per_level, skip_certify, replays)
        }
        Command::Calibrate { task, params, trials, format } => cmd_calibrate(&task, &params, trials, format),
        Command::Run { dataset, player, endpoint, parallel, out, resume, max_turns } => {
            cmd_run(dataset, player, endpoint, parallel, out, resume, max_turns)
        }
        Command::Eval { results, baseline, format, annotator } => cmd_eval(results, baseline, format, annotator),
        Command::Play { task, difficulty, seed, player, endpoint, transcript, max_turns } => {
            cmd_play(&task, difficulty, seed, player, endpoint, transcript, max_turns)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
