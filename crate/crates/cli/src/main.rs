use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use wankelmut::analysis::{posthoc_suite, PosthocConfig};
use wankelmut::controllers::MoveMode;
use wankelmut::fitness::EpisodeTrace;
use wankelmut::genome::Genome;
use wankelmut::render::write_svg;
use wankelmut::scenario::{catalog, find_scenario, run_scenario, RunOptions, ScenarioSpec};

#[derive(Parser)]
#[command(
    name = "wankelmut",
    version,
    about = "Gradient-switching benchmark runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every evolution of a named scenario and write its artifacts.
    Run {
        /// Scenario name (see `list`). Optional when --config is given.
        scenario: Option<String>,
        /// Output root; the scenario gets its own sub-directory.
        #[arg(long, env = "WANKELMUT_OUT", default_value = "wankelmut-out")]
        out: PathBuf,
        /// Base seed; run k uses seed + k.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
        /// Runs executed in parallel.
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
        /// JSON file with scenario fields; they override the named scenario.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long)]
        population: Option<usize>,
        /// Suppress per-run progress lines.
        #[arg(long)]
        quiet: bool,
    },
    /// Print the scenario catalog.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Run the post-hoc reactivity suite on a genome file.
    Posthoc {
        genome: PathBuf,
        /// Size of the world the genome was evolved in.
        #[arg(long, default_value_t = 40)]
        cells: usize,
        #[arg(long)]
        with_rest: bool,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Draw a trace CSV as an SVG trajectory.
    Render {
        trace: PathBuf,
        /// Output file; defaults to the trace path with an .svg extension.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Only draw the first N steps.
        #[arg(long)]
        window: Option<usize>,
    },
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn resolve_spec(scenario: Option<&str>, config: Option<&Path>) -> Result<ScenarioSpec> {
    let base = match scenario {
        Some(name) => serde_json::to_value(find_scenario(name)?)?,
        None if config.is_some() => serde_json::to_value(ScenarioSpec::default())?,
        None => bail!("name a scenario or pass --config (see `wankelmut list`)"),
    };
    let mut merged = base;
    if let Some(path) = config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let overrides: serde_json::Value = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        let Some(fields) = overrides.as_object() else {
            bail!("config {} must hold a JSON object", path.display());
        };
        let target = merged
            .as_object_mut()
            .expect("spec serialises to an object");
        for (k, v) in fields {
            target.insert(k.clone(), v.clone());
        }
    }
    Ok(serde_json::from_value(merged)?)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            scenario,
            out,
            seed,
            runs,
            workers,
            config,
            generations,
            population,
            quiet,
        } => {
            let mut spec = resolve_spec(scenario.as_deref(), config.as_deref())?;
            if let Some(s) = seed {
                spec.base_seed = s;
            }
            if let Some(r) = runs {
                spec.runs = r;
            }
            if let Some(g) = generations {
                spec.generations = g;
            }
            if let Some(p) = population {
                spec.population = p;
            }
            let result = run_scenario(
                &spec,
                &RunOptions {
                    out_root: out,
                    workers,
                    verbose: !quiet,
                },
            )?;
            println!("scenario {} -> {}", spec.name, result.dir.display());
            println!("reference max fitness {}", result.reference);
            for r in &result.runs {
                match (&r.best_fitness, &r.classification, &r.error) {
                    (Some(f), Some(c), _) => {
                        println!("run {:3} seed {:5} best {f} {c}", r.run, r.seed)
                    }
                    (_, _, Some(e)) => println!("run {:3} seed {:5} error: {e}", r.run, r.seed),
                    _ => {}
                }
            }
            let failed = result.runs.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                bail!("{failed} of {} runs failed", result.runs.len());
            }
        }
        Command::List { json } => {
            let specs = catalog();
            if json {
                println!("{}", serde_json::to_string_pretty(&specs)?);
            } else {
                for s in specs {
                    println!(
                        "{:28} {:5} {:17} {:6} T={:3} N={} pop={} gens={} runs={}{}",
                        s.name,
                        s.substrate.to_string(),
                        s.regime.to_string(),
                        s.scheme.name(),
                        s.steps,
                        s.cells,
                        s.population,
                        s.generations,
                        s.runs,
                        s.seed_file
                            .map(|f| format!(" seed={f}"))
                            .unwrap_or_default()
                    );
                }
            }
        }
        Command::Posthoc {
            genome,
            cells,
            with_rest,
            json,
        } => {
            let g = Genome::read(&genome)?;
            let cfg = PosthocConfig {
                cells,
                move_mode: if with_rest {
                    MoveMode::WithRest
                } else {
                    MoveMode::AlwaysMove
                },
                ..PosthocConfig::default()
            };
            let report = posthoc_suite(&g, &cfg)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                for t in &report.tests {
                    println!(
                        "{:16} start {:3} switches {:3} {}",
                        t.name,
                        t.start,
                        t.switches,
                        if t.passed { "pass" } else { "fail" }
                    );
                }
                println!("classification {}", report.classification);
            }
        }
        Command::Render { trace, out, window } => {
            let file = std::fs::File::open(&trace)
                .with_context(|| format!("opening {}", trace.display()))?;
            let tr = EpisodeTrace::read_csv(file)
                .with_context(|| format!("reading {}", trace.display()))?;
            let out = out.unwrap_or_else(|| trace.with_extension("svg"));
            write_svg(&tr, window, &out)?;
            println!("{}", out.display());
        }
    }
    Ok(())
}
