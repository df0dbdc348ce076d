use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gridworld_core::env::{Env, EnvConfig, HeadlessEnv};
use gridworld_core::harness::{self, EvalOptions, RandomAgent};
use gridworld_core::synth::{generate_synthetic_tasks, Profile};
use gridworld_core::tasks::{load_tasks_with_warnings, save_tasks, Task};

#[derive(Parser)]
#[command(name = "gridworld", version, about = "Voxel building gridworld: benchmark, evaluate, replay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure steps per second under random actions.
    Bench(BenchArgs),
    /// Evaluate an agent and write a score report.
    Run(RunArgs),
    /// Re-run logged actions and write the resulting score report.
    Replay(ReplayArgs),
    /// Write a synthetic task file.
    GenTasks(GenArgs),
    /// Render one first-person frame to a PPM file.
    RenderFrame(FrameArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Backend {
    /// Software renderer compiled in (honors --render).
    Renderer,
    /// No renderer at all.
    None,
}

#[derive(Args)]
struct TaskSource {
    /// Task JSON file. Without it, synthetic tasks are generated.
    #[arg(long)]
    tasks: Option<PathBuf>,
    /// Synthetic profile: flat, tall, diagonal, flying, tricky.
    #[arg(long, default_value = "flat")]
    profile: String,
    /// Number of synthetic tasks.
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Segments per synthetic task.
    #[arg(long, default_value_t = 1)]
    segments: usize,
    /// Seed for synthetic tasks.
    #[arg(long, default_value_t = 0)]
    task_seed: u64,
}

#[derive(Args)]
struct EnvArgs {
    /// Environment config JSON file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's render flag.
    #[arg(long, value_enum)]
    render: Option<OnOff>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    source: TaskSource,
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long, default_value_t = 200_000)]
    steps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "renderer")]
    backend: Backend,
    /// Report time spent per step phase (adds overhead).
    #[arg(long)]
    phases: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: TaskSource,
    #[command(flatten)]
    env: EnvArgs,
    /// random, heuristic or noop.
    #[arg(long, default_value = "heuristic")]
    agent: String,
    #[arg(long, default_value_t = 1)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Write one action log per episode into this directory.
    #[arg(long)]
    log_dir: Option<PathBuf>,
    /// Write the score report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    source: TaskSource,
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long)]
    log_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "flat")]
    profile: String,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    segments: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FrameArgs {
    #[command(flatten)]
    source: TaskSource,
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long, default_value_t = 0)]
    task_index: usize,
    /// Start at this segment, with its context placed.
    #[arg(long, default_value_t = 0)]
    segment: usize,
    /// Random steps taken before the frame is captured.
    #[arg(long, default_value_t = 0)]
    steps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "frame.ppm")]
    out: PathBuf,
}

fn parse_profile(name: &str) -> Result<Profile> {
    Profile::parse(name).with_context(|| format!("unknown profile {name:?}"))
}

fn load_source(src: &TaskSource) -> Result<Vec<Arc<Task>>> {
    let tasks = match &src.tasks {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let (tasks, warnings) =
                load_tasks_with_warnings(&text).with_context(|| format!("loading {}", path.display()))?;
            for w in warnings {
                eprintln!("warning: task {}: {}", w.task, w.message);
            }
            tasks
        }
        None => generate_synthetic_tasks(src.task_seed, src.count, parse_profile(&src.profile)?, src.segments),
    };
    if tasks.is_empty() {
        bail!("no tasks");
    }
    Ok(tasks.into_iter().map(Arc::new).collect())
}

fn load_config(args: &EnvArgs) -> Result<EnvConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            EnvConfig::from_json(&text).with_context(|| format!("loading {}", path.display()))?
        }
        None => EnvConfig::default(),
    };
    if let Some(r) = args.render {
        cfg.render = r == OnOff::On;
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn bench(a: BenchArgs) -> Result<()> {
    let tasks = load_source(&a.source)?;
    let cfg = load_config(&a.env)?;
    let report = match a.backend {
        Backend::Renderer => harness::bench(&mut Env::new(cfg)?, &tasks, a.steps, a.seed, a.phases)?,
        Backend::None => harness::bench(&mut HeadlessEnv::headless(cfg)?, &tasks, a.steps, a.seed, a.phases)?,
    };
    eprintln!("{:.0} steps/s over {} steps ({:.2} s)", report.sps, report.steps, report.seconds);
    emit(a.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))
}

fn run(a: RunArgs) -> Result<()> {
    let tasks = load_source(&a.source)?;
    let cfg = load_config(&a.env)?;
    let opts = EvalOptions { episodes: a.episodes, seed: a.seed, workers: a.workers, record: a.log_dir.is_some() };
    let (report, logs) = harness::run_eval(&cfg, &tasks, &a.agent, &opts)?;
    if let Some(dir) = &a.log_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for log in &logs {
            harness::write_log(&dir.join(log.file_name()), log)?;
        }
    }
    eprintln!(
        "{} episodes, mean F1 {:.4}, fully completed {:.1}%",
        report.episodes.len(),
        report.all.mean_f1,
        100.0 * report.full_completion_rate()
    );
    emit(a.out.as_deref(), &report.to_json())
}

fn replay(a: ReplayArgs) -> Result<()> {
    let tasks = load_source(&a.source)?;
    let cfg = load_config(&a.env)?;
    let logs = harness::read_log_dir(&a.log_dir)?;
    if logs.is_empty() {
        bail!("no .jsonl logs in {}", a.log_dir.display());
    }
    let report = harness::replay_logs(&cfg, &tasks, &logs, a.workers)?;
    emit(a.out.as_deref(), &report.to_json())
}

fn gen_tasks(a: GenArgs) -> Result<()> {
    let tasks = generate_synthetic_tasks(a.seed, a.count, parse_profile(&a.profile)?, a.segments);
    emit(a.out.as_deref(), &save_tasks(&tasks))
}

fn render_frame(a: FrameArgs) -> Result<()> {
    let tasks = load_source(&a.source)?;
    let task = tasks.get(a.task_index).with_context(|| format!("task index {} out of range", a.task_index))?;
    let mut cfg = load_config(&a.env)?;
    cfg.render = true;
    let clamp = cfg.physics.camera_clamp;
    let mut env = Env::new(cfg)?;
    env.seed(a.seed);
    env.reset_at(task.clone(), a.segment)?;
    let mut agent = RandomAgent::new(a.seed);
    for _ in 0..a.steps {
        if env.step(agent.sample(clamp))?.done {
            break;
        }
    }
    let frame = env.frame().context("renderer produced no frame")?;
    fs::write(&a.out, frame.to_ppm()).with_context(|| format!("writing {}", a.out.display()))?;
    eprintln!("wrote {}", a.out.display());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Bench(a) => bench(a),
        Command::Run(a) => run(a),
        Command::Replay(a) => replay(a),
        Command::GenTasks(a) => gen_tasks(a),
        Command::RenderFrame(a) => render_frame(a),
    }
}
