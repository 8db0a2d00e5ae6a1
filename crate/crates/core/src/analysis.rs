//! Post-hoc reactivity tests, solution classification and the reference
//! fitness of the hand-coded controller.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::controllers::{Controller, CtrnnSettings, HandCodedController, MoveMode};
use crate::error::Result;
use crate::fitness::{evaluate, run_episode, EpisodeTrace, EvalConfig};
use crate::genome::Genome;
use crate::world::{EnvSpec, Environment, Orientation, Profile, DEFAULT_STEEPNESS, THETA_MAX};

/// Score of the hand-coded controller under `eval`: the best a reactive
/// controller can be expected to reach.
pub fn reference_max_fitness(eval: &EvalConfig) -> Result<f64> {
    Ok(evaluate(&mut HandCodedController::default(), eval)?.score)
}

/// Replays a fixed list of outputs, then holds still.
struct Replay {
    outputs: Vec<f64>,
    t: usize,
}

impl Controller for Replay {
    fn reset(&mut self) {
        self.t = 0;
    }

    fn act(&mut self, _: f64, _: f64) -> f64 {
        let o = self.outputs.get(self.t).copied().unwrap_or(0.0);
        self.t += 1;
        o
    }
}

/// The best cell that never triggers a switch: highest quality strictly
/// below the upper threshold.
pub fn parking_cell(env: &Environment) -> usize {
    env.quality()
        .iter()
        .enumerate()
        .filter(|(_, &q)| q < THETA_MAX)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Trajectory that walks straight to [`parking_cell`] and stays there.
pub fn parking_oracle(env: &Environment, steps: usize, start: usize) -> EpisodeTrace {
    let target = parking_cell(env);
    let outputs = (0..steps)
        .map(|t| {
            let here = if start < target {
                (start + t).min(target)
            } else {
                start.saturating_sub(t).max(target)
            };
            match here.cmp(&target) {
                std::cmp::Ordering::Less => -1.0,
                std::cmp::Ordering::Greater => 1.0,
                std::cmp::Ordering::Equal => 0.0,
            }
        })
        .collect();
    let mut replay = Replay { outputs, t: 0 };
    run_episode(&mut replay, env, steps, start, MoveMode::WithRest).expect("finite outputs")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Reactive,
    Partial,
    PreProgrammed,
    Failed,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Reactive => "reactive",
            Classification::Partial => "partial",
            Classification::PreProgrammed => "pre-programmed",
            Classification::Failed => "failed",
        })
    }
}

/// Settings for the post-hoc suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PosthocConfig {
    /// Size of the world the controller was evolved in.
    pub cells: usize,
    pub steps: usize,
    pub move_mode: MoveMode,
    pub ctrnn: CtrnnSettings,
    /// Correct switches needed to pass a test.
    pub min_switches: u32,
    /// How far past the centre of the bell world the agent may stray.
    pub centre_slack: usize,
    pub rescaled_cells: Vec<usize>,
}

impl Default for PosthocConfig {
    fn default() -> Self {
        Self {
            cells: crate::world::DEFAULT_CELLS,
            steps: 250,
            move_mode: MoveMode::AlwaysMove,
            ctrnn: CtrnnSettings::default(),
            min_switches: 2,
            centre_slack: 2,
            rescaled_cells: vec![24, 80],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosthocTest {
    pub name: String,
    pub env: EnvSpec,
    pub start: usize,
    pub switches: u32,
    pub passed: bool,
    pub positions: Vec<usize>,
    pub switch_times: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactivityReport {
    pub flipped_pass: bool,
    pub gaussian_left_pass: bool,
    pub gaussian_right_pass: bool,
    pub rescaled_pass: bool,
    /// Delta sequences in the normal and flipped worlds are identical.
    pub sensor_independent: bool,
    pub classification: Classification,
    /// The evolved-world episode comes first; it is a reference, not a test.
    pub tests: Vec<PosthocTest>,
}

impl ReactivityReport {
    pub fn passes(&self) -> usize {
        [
            self.flipped_pass,
            self.gaussian_left_pass,
            self.gaussian_right_pass,
            self.rescaled_pass,
        ]
        .into_iter()
        .filter(|&p| p)
        .count()
    }

    pub fn test(&self, name: &str) -> Option<&PosthocTest> {
        self.tests.iter().find(|t| t.name == name)
    }
}

fn episode<C: Controller + ?Sized>(
    controller: &mut C,
    env: &Environment,
    start: usize,
    cfg: &PosthocConfig,
) -> Option<EpisodeTrace> {
    run_episode(controller, env, cfg.steps, start, cfg.move_mode).ok()
}

fn record(
    name: &str,
    env: &Environment,
    start: usize,
    trace: &Option<EpisodeTrace>,
    passed: bool,
) -> PosthocTest {
    PosthocTest {
        name: name.to_string(),
        env: env.spec(),
        start,
        switches: trace.as_ref().map_or(0, |t| t.r_switch),
        passed,
        positions: trace
            .as_ref()
            .map_or_else(Vec::new, |t| t.positions.clone()),
        switch_times: trace
            .as_ref()
            .map_or_else(Vec::new, |t| t.switch_times.clone()),
    }
}

/// Runs every post-hoc test on `controller`, resetting it before each.
///
/// * flipped: mirrored erf world, started on the mirror of the centre;
/// * bell, left and right: a Gaussian world of `2N` cells started at either
///   end, passing only if the agent keeps oscillating in its own half;
/// * rescaled: erf worlds of other sizes, started from their centres.
pub fn posthoc_controller<C: Controller + ?Sized>(
    controller: &mut C,
    cfg: &PosthocConfig,
) -> Result<ReactivityReport> {
    let enough =
        |t: &Option<EpisodeTrace>| t.as_ref().is_some_and(|t| t.r_switch >= cfg.min_switches);
    let mut tests = Vec::new();

    let normal = Environment::erf(cfg.cells, Orientation::Normal)?;
    let start = normal.centre();
    let normal_trace = episode(controller, &normal, start, cfg);
    tests.push(record(
        "normal",
        &normal,
        start,
        &normal_trace,
        enough(&normal_trace),
    ));

    let flipped = normal.mirrored();
    let flipped_start = flipped.mirror_cell(start);
    let flipped_trace = episode(controller, &flipped, flipped_start, cfg);
    let flipped_pass = enough(&flipped_trace);
    tests.push(record(
        "flipped",
        &flipped,
        flipped_start,
        &flipped_trace,
        flipped_pass,
    ));

    let bell_cells = 2 * cfg.cells;
    let bell = Environment::new(
        bell_cells,
        Profile::Gaussian,
        Orientation::Normal,
        DEFAULT_STEEPNESS,
    )?;
    let half = bell_cells / 2;
    let left_trace = episode(controller, &bell, 0, cfg);
    let gaussian_left_pass = enough(&left_trace)
        && left_trace
            .as_ref()
            .is_some_and(|t| t.positions.iter().all(|&p| p < half + cfg.centre_slack));
    tests.push(record(
        "gaussian-left",
        &bell,
        0,
        &left_trace,
        gaussian_left_pass,
    ));

    let right_start = bell_cells - 1;
    let right_trace = episode(controller, &bell, right_start, cfg);
    let gaussian_right_pass = enough(&right_trace)
        && right_trace
            .as_ref()
            .is_some_and(|t| t.positions.iter().all(|&p| p + cfg.centre_slack >= half));
    tests.push(record(
        "gaussian-right",
        &bell,
        right_start,
        &right_trace,
        gaussian_right_pass,
    ));

    let mut rescaled_pass = true;
    for &n in &cfg.rescaled_cells {
        let env = Environment::erf(n, Orientation::Normal)?;
        let trace = episode(controller, &env, env.centre(), cfg);
        let pass = enough(&trace);
        rescaled_pass &= pass;
        tests.push(record(
            &format!("rescaled-{n}"),
            &env,
            env.centre(),
            &trace,
            pass,
        ));
    }

    let sensor_independent = match (&normal_trace, &flipped_trace) {
        (Some(a), Some(b)) => a.deltas == b.deltas,
        _ => false,
    };

    let mut report = ReactivityReport {
        flipped_pass,
        gaussian_left_pass,
        gaussian_right_pass,
        rescaled_pass,
        sensor_independent,
        classification: Classification::Failed,
        tests,
    };
    report.classification = if sensor_independent {
        Classification::PreProgrammed
    } else {
        match report.passes() {
            4 => Classification::Reactive,
            0 => Classification::Failed,
            _ => Classification::Partial,
        }
    };
    Ok(report)
}

pub fn posthoc_suite(genome: &Genome, cfg: &PosthocConfig) -> Result<ReactivityReport> {
    let mut controller = genome.decode(cfg.ctrnn)?;
    posthoc_controller(&mut controller, cfg)
}

/// One row per run: `run,classification,flipped,gaussian_left,gaussian_right,rescaled`.
pub fn write_summary_csv<W: Write>(
    mut out: W,
    reports: &[(usize, Option<&ReactivityReport>)],
) -> std::io::Result<()> {
    writeln!(
        out,
        "run,classification,flipped,gaussian_left,gaussian_right,rescaled,normal_switches,flipped_switches"
    )?;
    for (run, report) in reports {
        match report {
            Some(r) => {
                let sw = |name: &str| r.test(name).map_or(0, |t| t.switches);
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    run,
                    r.classification,
                    u8::from(r.flipped_pass),
                    u8::from(r.gaussian_left_pass),
                    u8::from(r.gaussian_right_pass),
                    u8::from(r.rescaled_pass),
                    sw("normal"),
                    sw("flipped")
                )?;
            }
            None => writeln!(out, "{run},error,,,,,,")?,
        }
    }
    Ok(())
}
