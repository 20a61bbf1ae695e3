use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use z2sim::experiments::{self, load_config, validate, ExperimentConfig, RunManifest, Severity};
use z2sim::models::{resource_count, LatticeGraph};

#[derive(Parser)]
#[command(name = "z2sim", version, about = "Run Z2 lattice gauge theory experiment presets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset; a single list-valued axis is swept.
    Run(RunArgs),
    /// Sweep the one list-valued axis of a config.
    Sweep(RunArgs),
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Count qubits and oscillators needed for an edge-list graph.
    Resources { edge_list: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweep points.
    #[arg(long)]
    workers: Option<usize>,
}

fn out_dir(args: &RunArgs, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(out) = &args.out {
        return out.clone();
    }
    match (&cfg.output.dir, &cfg.base_dir) {
        (Some(dir), Some(base)) if dir.is_relative() => base.join(dir),
        (Some(dir), _) => dir.clone(),
        (None, _) => Path::new("z2sim-out").join(cfg.preset.name()),
    }
}

fn report(manifest: &RunManifest, out: &Path) {
    println!("{} `{}` finished in {:.2} s -> {}", manifest.command, manifest.config.preset.name(), manifest.wall_time_s, out.display());
    if let Some(summary) = &manifest.summary_file {
        println!("  summary: {summary} ({} points)", manifest.points.len());
    } else if let Some(point) = manifest.points.first() {
        for (k, v) in &point.derived {
            println!("  {k} = {v}");
        }
    }
    for p in &manifest.points {
        for w in &p.warnings {
            eprintln!("warning: {w}");
        }
    }
}

type Runner = fn(&ExperimentConfig, &Path, Option<usize>) -> z2sim::Result<RunManifest>;

fn run(args: &RunArgs, runner: Runner) -> z2sim::Result<()> {
    let mut cfg = load_config(&args.config)?;
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    let out = out_dir(args, &cfg);
    let manifest = runner(&cfg, &out, args.workers)?;
    report(&manifest, &out);
    Ok(())
}

fn execute(cli: Cli) -> Result<ExitCode, z2sim::Error> {
    match cli.command {
        Command::Run(args) => run(&args, experiments::run)?,
        Command::Sweep(args) => run(&args, experiments::sweep)?,
        Command::Validate { config } => {
            let findings = match load_config(&config) {
                Ok(cfg) => validate(&cfg),
                Err(e) => {
                    let text = std::fs::read_to_string(&config).map_err(|io| z2sim::Error::Io(format!("{}: {io}", config.display())))?;
                    let findings = experiments::validate_text(&text);
                    if findings.is_empty() {
                        return Err(e);
                    }
                    findings
                }
            };
            if findings.is_empty() {
                println!("ok: {}", config.display());
            }
            for f in &findings {
                println!("{f}");
            }
            if findings.iter().any(|f| f.severity == Severity::Error) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Resources { edge_list } => {
            let text = std::fs::read_to_string(&edge_list)
                .map_err(|e| z2sim::Error::Io(format!("{}: {e}", edge_list.display())))?;
            let graph = LatticeGraph::parse_edge_list(&text)?;
            let count = resource_count(&graph);
            println!("{}", serde_json::to_string(&count).expect("plain struct"));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
