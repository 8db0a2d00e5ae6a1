//! Named experiment setups and the batch runner that turns one into a
//! directory of logs, genomes, traces, figures and reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    posthoc_suite, reference_max_fitness, write_summary_csv, Classification, PosthocConfig,
    ReactivityReport,
};
use crate::controllers::{CtrnnSettings, MoveMode};
use crate::error::{io_err, Error, Result};
use crate::evolution::{
    init_population, run_evolution_from, seed_population, EvolutionLog, GaConfig,
};
use crate::fitness::{run_episode, EvalConfig, Regime, Scheme};
use crate::genome::{handcoded_ann, Genome, Substrate};
use crate::render::{write_svg, FIGURE_WINDOW};
use crate::world::{Orientation, DEFAULT_CELLS, DEFAULT_STEEPNESS};

/// `seed_file` value that refers to the bundled hand-coded ANN.
pub const HANDCODED_SEED: &str = "@handcoded-ann";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioSpec {
    pub name: String,
    pub description: String,
    pub substrate: Substrate,
    pub regime: Regime,
    pub scheme: Scheme,
    pub steps: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub population: usize,
    pub generations: usize,
    pub cells: usize,
    pub start: Option<usize>,
    pub move_mode: MoveMode,
    pub seed_file: Option<String>,
    pub ctrnn_wide_init: bool,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            description: String::new(),
            substrate: Substrate::Ann,
            regime: Regime::Switch,
            scheme: Scheme::DoubleMin,
            steps: 250,
            runs: 30,
            base_seed: 1,
            population: 150,
            generations: 300,
            cells: DEFAULT_CELLS,
            start: None,
            move_mode: MoveMode::AlwaysMove,
            seed_file: None,
            ctrnn_wide_init: false,
        }
    }
}

impl ScenarioSpec {
    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            cells: self.cells,
            steepness: DEFAULT_STEEPNESS,
            start: self.start,
            steps: self.steps,
            move_mode: self.move_mode,
            scheme: self.scheme,
            weights: self.regime.weights(),
        }
    }

    pub fn seed_for(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }

    pub fn ga_config(&self, run: usize) -> GaConfig {
        GaConfig {
            population_size: self.population,
            generations: self.generations,
            substrate: self.substrate,
            ctrnn_wide_init: self.ctrnn_wide_init,
            seed: self.seed_for(run),
            eval: self.eval_config(),
            ..GaConfig::default()
        }
    }

    pub fn posthoc_config(&self) -> PosthocConfig {
        PosthocConfig {
            cells: self.cells,
            move_mode: self.move_mode,
            ctrnn: CtrnnSettings::default(),
            ..PosthocConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("a scenario needs at least one run".into()));
        }
        self.ga_config(0).validate()
    }

    pub fn seed_genome(&self) -> Result<Option<Genome>> {
        match self.seed_file.as_deref() {
            None => Ok(None),
            Some(HANDCODED_SEED) => Ok(Some(Genome::Ann(handcoded_ann()))),
            Some(path) => Genome::read(path).map(Some),
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn entry(
    name: &str,
    description: &str,
    substrate: Substrate,
    regime: Regime,
    scheme: Scheme,
) -> ScenarioSpec {
    ScenarioSpec {
        name: name.into(),
        description: description.into(),
        substrate,
        regime,
        scheme,
        ..ScenarioSpec::default()
    }
}

/// Every named experiment.
pub fn catalog() -> Vec<ScenarioSpec> {
    let mut out = Vec::new();
    let short = |r: Regime| match r {
        Regime::Switch => "switch",
        Regime::Cumulative => "cumulative",
        Regime::InstantSwitch => "instswitch",
        Regime::CumulativeSwitch => "cumswitch",
    };
    for substrate in [Substrate::Ann, Substrate::Ctrnn] {
        out.push(entry(
            &format!("switch-single-{substrate}"),
            "switch reward, evaluated in the normal world only",
            substrate,
            Regime::Switch,
            Scheme::SingleNormal,
        ));
        out.push(entry(
            &format!("switch-mean-{substrate}"),
            "switch reward, mean over normal and flipped worlds",
            substrate,
            Regime::Switch,
            Scheme::DoubleMean,
        ));
        for regime in Regime::ALL {
            out.push(entry(
                &format!("{}-min-{substrate}", short(regime)),
                &format!("{regime} reward, minimum over normal and flipped worlds"),
                substrate,
                regime,
                Scheme::DoubleMin,
            ));
        }
        out.push(ScenarioSpec {
            steps: 56,
            ..entry(
                &format!("cumswitch-min-{substrate}-56"),
                "cumulative-switch reward, minimum over both worlds, 56-step episodes",
                substrate,
                Regime::CumulativeSwitch,
                Scheme::DoubleMin,
            )
        });
    }
    for regime in Regime::ALL {
        out.push(ScenarioSpec {
            seed_file: Some(HANDCODED_SEED.into()),
            ..entry(
                &format!("seeded-handcoded-{}", short(regime)),
                &format!("{regime} reward, population seeded from the hand-coded ANN"),
                Substrate::Ann,
                regime,
                Scheme::DoubleMin,
            )
        });
    }
    out
}

pub fn find_scenario(name: &str) -> Result<ScenarioSpec> {
    catalog()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_root: PathBuf,
    pub workers: usize,
    /// Print one line per finished run to stderr.
    pub verbose: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub run: usize,
    pub seed: u64,
    pub best_fitness: Option<f64>,
    pub classification: Option<Classification>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub dir: PathBuf,
    pub reference: f64,
    pub runs: Vec<RunOutcome>,
    /// Best-of-generation curves of successful runs, in run order.
    pub curves: Vec<Vec<f64>>,
}

/// Quartile summary of one generation across runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub min: f64,
    pub max: f64,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Quartiles by linear interpolation, whiskers at the most extreme samples
/// within 1.5 IQR of the box.
pub fn box_stats(values: &[f64]) -> BoxStats {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q1 = quantile(&v, 0.25);
    let q3 = quantile(&v, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    BoxStats {
        q1,
        median: quantile(&v, 0.5),
        q3,
        whisker_low: *v.iter().find(|&&x| x >= lo_fence).unwrap_or(&v[0]),
        whisker_high: *v
            .iter()
            .rev()
            .find(|&&x| x <= hi_fence)
            .unwrap_or(&v[v.len() - 1]),
        min: v[0],
        max: v[v.len() - 1],
    }
}

pub fn write_pooled_csv(path: &Path, curves: &[Vec<f64>]) -> Result<()> {
    let mut s = String::from("generation,q1,median,q3,whisker_low,whisker_high,min,max\n");
    let gens = curves.iter().map(Vec::len).min().unwrap_or(0);
    for g in 0..gens {
        let column: Vec<f64> = curves.iter().map(|c| c[g]).collect();
        let b = box_stats(&column);
        s.push_str(&format!(
            "{g},{:?},{:?},{:?},{:?},{:?},{:?},{:?}\n",
            b.q1, b.median, b.q3, b.whisker_low, b.whisker_high, b.min, b.max
        ));
    }
    fs::write(path, s).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

struct RunArtifacts {
    log: EvolutionLog,
    report: ReactivityReport,
}

fn run_one(spec: &ScenarioSpec, run: usize, dir: &Path) -> Result<RunArtifacts> {
    let started = Instant::now();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let cfg = spec.ga_config(run);
    let population = match spec.seed_genome()? {
        Some(g) => seed_population(&g, &cfg)?,
        None => init_population(&cfg),
    };
    let log = run_evolution_from(&cfg, population, |_| {})?;

    log.save_csv(dir.join("log.csv"))?;
    log.best_genome.write(dir.join("best.genome"))?;

    let eval = spec.eval_config();
    let normal = eval.env(Orientation::Normal)?;
    let flipped = normal.mirrored();
    let start = eval.start_cell();
    for (label, env, s) in [
        ("normal", &normal, start),
        ("flipped", &flipped, flipped.mirror_cell(start)),
    ] {
        let mut controller = log.best_genome.decode(cfg.ctrnn)?;
        // A non-finite output leaves no trace to draw; the posthoc report
        // still records the failure.
        if let Ok(trace) = run_episode(&mut controller, env, eval.steps, s, eval.move_mode) {
            let csv_path = dir.join(format!("trace-{label}.csv"));
            let mut buf = Vec::new();
            trace.write_csv(&mut buf).map_err(io_err(&csv_path))?;
            fs::write(&csv_path, buf).map_err(io_err(&csv_path))?;
            write_svg(
                &trace,
                Some(FIGURE_WINDOW),
                dir.join(format!("trajectory-{label}.svg")),
            )?;
        }
    }

    let report = posthoc_suite(&log.best_genome, &spec.posthoc_config())?;
    write_json(&dir.join("posthoc.json"), &report)?;

    let manifest = serde_json::json!({
        "scenario": spec,
        "run": run,
        "seed": cfg.seed,
        "config": cfg,
        "version": env!("CARGO_PKG_VERSION"),
        "best_fitness": log.best_fitness,
        "classification": report.classification,
        "wall_clock_seconds": started.elapsed().as_secs_f64(),
        "generation_seconds": log.generations.iter().map(|g| g.wall_clock).collect::<Vec<_>>(),
    });
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(RunArtifacts { log, report })
}

pub fn run_dir(root: &Path, run: usize) -> PathBuf {
    root.join(format!("run-{run:03}"))
}

/// Executes every run of `spec` under `opts.out_root/<name>`.
///
/// Runs go in parallel on `opts.workers` threads. A failing run is recorded
/// in its outcome (and an `error.txt`) and the others continue; an
/// unwritable output root fails immediately.
pub fn run_scenario(spec: &ScenarioSpec, opts: &RunOptions) -> Result<ScenarioResult> {
    spec.validate()?;
    // Check the seed genome up front so a bad path fails fast.
    if let Some(g) = spec.seed_genome()? {
        seed_population(&g, &spec.ga_config(0))?;
    }
    let dir = opts.out_root.join(&spec.name);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    write_json(&dir.join("scenario.json"), spec)?;

    let reference = reference_max_fitness(&spec.eval_config())?;
    write_json(
        &dir.join("reference.json"),
        &serde_json::json!({ "scenario": spec.name, "reference_max_fitness": reference }),
    )?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<(RunOutcome, Option<RunArtifacts>)> = pool.install(|| {
        (0..spec.runs)
            .into_par_iter()
            .map(|run| {
                let rd = run_dir(&dir, run);
                let seed = spec.seed_for(run);
                let res = run_one(spec, run, &rd);
                if opts.verbose {
                    match &res {
                        Ok(a) => eprintln!(
                            "{} run {run}: best {} ({})",
                            spec.name, a.log.best_fitness, a.report.classification
                        ),
                        Err(e) => eprintln!("{} run {run}: failed: {e}", spec.name),
                    }
                }
                match res {
                    Ok(a) => (
                        RunOutcome {
                            run,
                            seed,
                            best_fitness: Some(a.log.best_fitness),
                            classification: Some(a.report.classification),
                            error: None,
                        },
                        Some(a),
                    ),
                    Err(e) => {
                        let _ = fs::create_dir_all(&rd);
                        let _ = fs::write(rd.join("error.txt"), format!("{e}\n"));
                        (
                            RunOutcome {
                                run,
                                seed,
                                best_fitness: None,
                                classification: None,
                                error: Some(e.to_string()),
                            },
                            None,
                        )
                    }
                }
            })
            .collect()
    });

    let curves: Vec<Vec<f64>> = results
        .iter()
        .filter_map(|(_, a)| a.as_ref().map(|a| a.log.best_curve()))
        .collect();
    write_pooled_csv(&dir.join("pooled.csv"), &curves)?;

    let summary_path = dir.join("posthoc-summary.csv");
    let rows: Vec<(usize, Option<&ReactivityReport>)> = results
        .iter()
        .map(|(o, a)| (o.run, a.as_ref().map(|a| &a.report)))
        .collect();
    let mut buf = Vec::new();
    write_summary_csv(&mut buf, &rows).map_err(io_err(&summary_path))?;
    fs::write(&summary_path, buf).map_err(io_err(&summary_path))?;

    Ok(ScenarioResult {
        dir,
        reference,
        runs: results.into_iter().map(|(o, _)| o).collect(),
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_complete_and_unique() {
        let c = catalog();
        assert!(c.len() >= 11);
        let mut names: Vec<&str> = c.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), c.len());
        for s in &c {
            assert_eq!((s.population, s.generations), (150, 300));
            s.validate().unwrap();
        }
        let short = find_scenario("cumswitch-min-ctrnn-56").unwrap();
        assert_eq!(short.steps, 56);
        assert_eq!(short.regime, Regime::CumulativeSwitch);
        assert_eq!(short.substrate, Substrate::Ctrnn);
        let single = find_scenario("switch-single-ann").unwrap();
        assert_eq!(single.scheme, Scheme::SingleNormal);
        let seeded = find_scenario("seeded-handcoded-switch").unwrap();
        assert!(seeded.seed_genome().unwrap().is_some());
        assert!(matches!(
            find_scenario("nope"),
            Err(Error::UnknownScenario(_))
        ));
    }

    #[test]
    fn spec_json_fills_defaults() {
        let s: ScenarioSpec = serde_json::from_str(
            r#"{"name":"x","substrate":"ctrnn","regime":"cumulative","runs":3}"#,
        )
        .unwrap();
        assert_eq!(s.runs, 3);
        assert_eq!(s.generations, 300);
        assert_eq!(s.scheme, Scheme::DoubleMin);
        let back: ScenarioSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn box_stats_example() {
        let b = box_stats(&[1.0, 2.0, 3.0, 4.0, 100.0]);
        assert_eq!((b.q1, b.median, b.q3), (2.0, 3.0, 4.0));
        assert_eq!(b.whisker_high, 4.0);
        assert_eq!(b.whisker_low, 1.0);
        assert_eq!(b.max, 100.0);
        let one = box_stats(&[5.0]);
        assert_eq!((one.q1, one.q3, one.whisker_low), (5.0, 5.0, 5.0));
    }
}
