//! Episode execution, reward components and fitness aggregation.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::controllers::{output_to_delta, Controller, MoveMode};
use crate::error::{Error, Result};
use crate::world::{format_sig, EnvSpec, Environment, JudgeState, Mode, Orientation, Profile};

/// Score assigned to an episode whose controller produced a non-finite
/// output.
pub const WORST_FITNESS: f64 = -1.0e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessWeights {
    pub switch: f64,
    pub cumulative: f64,
    pub instant: f64,
}

impl FitnessWeights {
    pub const fn new(switch: f64, cumulative: f64, instant: f64) -> Self {
        Self {
            switch,
            cumulative,
            instant,
        }
    }

    pub fn scaled(self, a: f64) -> Self {
        Self::new(self.switch * a, self.cumulative * a, self.instant * a)
    }
}

/// The four named weightings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Switch,
    Cumulative,
    InstantSwitch,
    CumulativeSwitch,
}

impl Regime {
    pub const ALL: [Regime; 4] = [
        Regime::Switch,
        Regime::Cumulative,
        Regime::InstantSwitch,
        Regime::CumulativeSwitch,
    ];

    pub fn weights(self) -> FitnessWeights {
        match self {
            Regime::Switch => FitnessWeights::new(1.0, 0.0, 0.0),
            Regime::Cumulative => FitnessWeights::new(0.0, 1.0, 0.0),
            Regime::InstantSwitch => FitnessWeights::new(100.0, 0.0, 0.01),
            Regime::CumulativeSwitch => FitnessWeights::new(100.0, 0.01, 0.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Switch => "switch",
            Regime::Cumulative => "cumulative",
            Regime::InstantSwitch => "instant-switch",
            Regime::CumulativeSwitch => "cumulative-switch",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which environments a genome is scored in and how the scores combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    SingleNormal,
    DoubleMin,
    DoubleMean,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::SingleNormal => "single",
            Scheme::DoubleMin => "min",
            Scheme::DoubleMean => "mean",
        }
    }
}

/// Everything needed to score a controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub cells: usize,
    pub steepness: f64,
    /// Start cell in the normal world; the flipped episode starts on the
    /// mirrored cell. `None` means the centre cell.
    pub start: Option<usize>,
    pub steps: usize,
    pub move_mode: MoveMode,
    pub scheme: Scheme,
    pub weights: FitnessWeights,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            cells: crate::world::DEFAULT_CELLS,
            steepness: crate::world::DEFAULT_STEEPNESS,
            start: None,
            steps: 250,
            move_mode: MoveMode::AlwaysMove,
            scheme: Scheme::DoubleMin,
            weights: Regime::Switch.weights(),
        }
    }
}

impl EvalConfig {
    pub fn env(&self, orientation: Orientation) -> Result<Environment> {
        Environment::new(self.cells, Profile::Erf, orientation, self.steepness)
    }

    pub fn start_cell(&self) -> usize {
        self.start.unwrap_or(self.cells / 2)
    }

    pub fn validate(&self) -> Result<()> {
        let env = self.env(Orientation::Normal)?;
        env.check_cell(self.start_cell())
    }
}

/// Per-step record of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub env: EnvSpec,
    pub steps: usize,
    /// `P(0) ..= P(T)`.
    pub positions: Vec<usize>,
    /// Judge mode after arriving at each position.
    pub modes: Vec<Mode>,
    /// Sensor readings at each position.
    pub sensors: Vec<(f64, f64)>,
    /// Cell steps taken, `T` entries.
    pub deltas: Vec<i32>,
    /// Times `t` at which arriving at `P(t)` completed a correct switch.
    pub switch_times: Vec<usize>,
    pub r_switch: u32,
    pub r_cum: f64,
    pub r_ins: f64,
}

impl EpisodeTrace {
    pub fn switched_at(&self, t: usize) -> bool {
        self.switch_times.binary_search(&t).is_ok()
    }

    /// Same episode cut to its first `steps` steps, rewards recomputed.
    pub fn truncated(&self, steps: usize, env: &Environment) -> Self {
        let steps = steps.min(self.steps);
        let positions = self.positions[..=steps].to_vec();
        let modes = self.modes[..=steps].to_vec();
        let r_cum = positions
            .iter()
            .zip(&modes)
            .map(|(&p, m)| env.quality_at(p) * m.sign())
            .sum();
        let switch_times: Vec<usize> = self
            .switch_times
            .iter()
            .copied()
            .filter(|&t| t <= steps)
            .collect();
        Self {
            env: self.env,
            steps,
            r_switch: switch_times.len() as u32,
            r_ins: env.quality_at(positions[steps]) * modes[steps].sign(),
            positions,
            modes,
            sensors: self.sensors[..=steps].to_vec(),
            deltas: self.deltas[..steps].to_vec(),
            switch_times,
            r_cum,
        }
    }

    /// CSV with columns `t,P,s_l,s_r,mode,switched`, preceded by a comment
    /// line describing the environment.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# cells={} profile={} orientation={} steepness={:?}",
            self.env.cells, self.env.profile, self.env.orientation, self.env.steepness
        )?;
        writeln!(out, "t,P,s_l,s_r,mode,switched")?;
        for t in 0..=self.steps {
            let (l, r) = self.sensors[t];
            writeln!(
                out,
                "{},{},{},{},{},{}",
                t,
                self.positions[t],
                format_sig(l, 9),
                format_sig(r, 9),
                self.modes[t],
                u8::from(self.switched_at(t))
            )?;
        }
        Ok(())
    }

    /// Reads the CSV written by [`write_csv`](Self::write_csv) and rebuilds
    /// the trace against the described environment.
    pub fn read_csv<R: Read>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input
            .read_to_string(&mut text)
            .map_err(|e| Error::TraceFormat(e.to_string()))?;
        let header = text
            .lines()
            .next()
            .filter(|l| l.starts_with('#'))
            .ok_or_else(|| Error::TraceFormat("missing environment comment".into()))?;
        let env = parse_env_comment(header)?.build()?;

        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut positions = Vec::new();
        let mut modes = Vec::new();
        let mut switch_times = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            let field = |i: usize| {
                record
                    .get(i)
                    .ok_or_else(|| Error::TraceFormat(format!("row {row}: missing column {i}")))
            };
            let t: usize = field(0)?
                .parse()
                .map_err(|_| Error::TraceFormat(format!("row {row}: bad t")))?;
            if t != row {
                return Err(Error::TraceFormat(format!("row {row}: expected t={row}")));
            }
            let p: usize = field(1)?
                .parse()
                .map_err(|_| Error::TraceFormat(format!("row {row}: bad position")))?;
            env.check_cell(p).map_err(|_| {
                Error::TraceFormat(format!("row {row}: position {p} outside world"))
            })?;
            modes.push(match field(4)? {
                "up" => Mode::Uphill,
                "down" => Mode::Downhill,
                m => return Err(Error::TraceFormat(format!("row {row}: bad mode `{m}`"))),
            });
            if field(5)? == "1" {
                switch_times.push(t);
            }
            positions.push(p);
        }
        if positions.is_empty() {
            return Err(Error::TraceFormat("no rows".into()));
        }
        let steps = positions.len() - 1;
        let deltas = positions
            .windows(2)
            .map(|w| w[1] as i32 - w[0] as i32)
            .collect();
        let sensors = positions.iter().map(|&p| env.sense(p)).collect();
        let r_cum = positions
            .iter()
            .zip(&modes)
            .map(|(&p, m)| env.quality_at(p) * m.sign())
            .sum();
        Ok(Self {
            env: env.spec(),
            steps,
            r_switch: switch_times.len() as u32,
            r_ins: env.quality_at(positions[steps]) * modes[steps].sign(),
            positions,
            modes,
            sensors,
            deltas,
            switch_times,
            r_cum,
        })
    }
}

fn parse_env_comment(line: &str) -> Result<EnvSpec> {
    let mut cells = None;
    let mut profile = None;
    let mut orientation = None;
    let mut steepness = None;
    for kv in line.trim_start_matches('#').split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::TraceFormat(format!("bad field `{kv}`")))?;
        let bad = || Error::TraceFormat(format!("bad value for {k}: `{v}`"));
        match k {
            "cells" => cells = Some(v.parse().map_err(|_| bad())?),
            "profile" => {
                profile = Some(match v {
                    "erf" => Profile::Erf,
                    "gaussian" => Profile::Gaussian,
                    "linear" => Profile::Linear,
                    _ => return Err(bad()),
                })
            }
            "orientation" => {
                orientation = Some(match v {
                    "normal" => Orientation::Normal,
                    "flipped" => Orientation::Flipped,
                    _ => return Err(bad()),
                })
            }
            "steepness" => steepness = Some(v.parse().map_err(|_| bad())?),
            _ => {}
        }
    }
    let missing = |what: &str| Error::TraceFormat(format!("environment comment lacks {what}"));
    Ok(EnvSpec {
        cells: cells.ok_or_else(|| missing("cells"))?,
        profile: profile.ok_or_else(|| missing("profile"))?,
        orientation: orientation.ok_or_else(|| missing("orientation"))?,
        steepness: steepness.ok_or_else(|| missing("steepness"))?,
    })
}

/// Returned when a controller emits NaN or an infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonFiniteOutput {
    pub t: usize,
}

impl fmt::Display for NonFiniteOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "controller produced a non-finite output at t={}", self.t)
    }
}

/// Runs `steps` world steps. The controller is reset first.
///
/// Per step: sense, act, move, then the judge sees the quality of the new
/// cell. Rewards count `t = 0` with the start cell and the initial uphill
/// mode.
pub fn run_episode<C: Controller + ?Sized>(
    controller: &mut C,
    env: &Environment,
    steps: usize,
    start: usize,
    move_mode: MoveMode,
) -> std::result::Result<EpisodeTrace, NonFiniteOutput> {
    assert!(start < env.cells(), "start cell outside the world");
    controller.reset();
    let mut judge = JudgeState::default();
    let mut pos = start;

    let mut positions = Vec::with_capacity(steps + 1);
    let mut modes = Vec::with_capacity(steps + 1);
    let mut sensors = Vec::with_capacity(steps + 1);
    let mut deltas = Vec::with_capacity(steps);
    let mut switch_times = Vec::new();

    positions.push(pos);
    modes.push(judge.mode);
    let mut r_cum = env.quality_at(pos) * judge.mode.sign();

    for t in 0..steps {
        let (left, right) = env.sense(pos);
        sensors.push((left, right));
        let out = controller.act(left, right);
        if !out.is_finite() {
            return Err(NonFiniteOutput { t });
        }
        let delta = output_to_delta(out, move_mode);
        pos = env.step(pos, delta).expect("delta is within one cell");
        let (next, switched) = judge.update(env.quality_at(pos));
        judge = next;
        if switched {
            switch_times.push(t + 1);
        }
        deltas.push(delta);
        positions.push(pos);
        modes.push(judge.mode);
        r_cum += env.quality_at(pos) * judge.mode.sign();
    }
    sensors.push(env.sense(pos));

    Ok(EpisodeTrace {
        env: env.spec(),
        steps,
        r_switch: judge.switch_count,
        r_ins: env.quality_at(pos) * judge.mode.sign(),
        positions,
        modes,
        sensors,
        deltas,
        switch_times,
        r_cum,
    })
}

pub fn fitness(trace: &EpisodeTrace, w: FitnessWeights) -> f64 {
    w.switch * trace.r_switch as f64 + w.cumulative * trace.r_cum + w.instant * trace.r_ins
}

/// Score and the traces behind it.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub score: f64,
    /// Normal-world episode first, then the flipped one for double schemes.
    /// `None` marks an episode that failed with a non-finite output.
    pub traces: Vec<Option<EpisodeTrace>>,
}

pub fn aggregate(scheme: Scheme, scores: &[f64]) -> f64 {
    match scheme {
        Scheme::SingleNormal => scores[0],
        Scheme::DoubleMin => scores.iter().copied().fold(f64::INFINITY, f64::min),
        Scheme::DoubleMean => scores.iter().sum::<f64>() / scores.len() as f64,
    }
}

/// Scores `controller` under `cfg`. The controller is reset before each
/// episode. A failed episode scores [`WORST_FITNESS`].
pub fn evaluate<C: Controller + ?Sized>(
    controller: &mut C,
    cfg: &EvalConfig,
) -> Result<Evaluation> {
    let normal = cfg.env(Orientation::Normal)?;
    let start = cfg.start_cell();
    normal.check_cell(start)?;
    let mut runs = vec![(normal, start)];
    if cfg.scheme != Scheme::SingleNormal {
        let flipped = runs[0].0.mirrored();
        let mirrored_start = flipped.mirror_cell(start);
        runs.push((flipped, mirrored_start));
    }
    let mut scores = Vec::with_capacity(runs.len());
    let mut traces = Vec::with_capacity(runs.len());
    for (env, start) in &runs {
        match run_episode(controller, env, cfg.steps, *start, cfg.move_mode) {
            Ok(trace) => {
                scores.push(fitness(&trace, cfg.weights));
                traces.push(Some(trace));
            }
            Err(_) => {
                scores.push(WORST_FITNESS);
                traces.push(None);
            }
        }
    }
    Ok(Evaluation {
        score: aggregate(cfg.scheme, &scores),
        traces,
    })
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Regime::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown regime `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::{DriftController, HandCodedController, ZigzagController};

    struct Still;

    impl Controller for Still {
        fn reset(&mut self) {}
        fn act(&mut self, _: f64, _: f64) -> f64 {
            0.0
        }
    }

    struct Broken;

    impl Controller for Broken {
        fn reset(&mut self) {}
        fn act(&mut self, _: f64, _: f64) -> f64 {
            f64::NAN
        }
    }

    fn world() -> Environment {
        Environment::erf(40, Orientation::Normal).unwrap()
    }

    #[test]
    fn zero_length_episode() {
        let env = world();
        let tr = run_episode(
            &mut HandCodedController::default(),
            &env,
            0,
            25,
            MoveMode::AlwaysMove,
        )
        .unwrap();
        assert_eq!(tr.r_switch, 0);
        assert_eq!(tr.r_cum, env.quality_at(25));
        assert_eq!(tr.r_ins, env.quality_at(25));
        assert_eq!(tr.positions, vec![25]);
        assert!(tr.deltas.is_empty());
    }

    #[test]
    fn stationary_agent_at_centre_collects_nothing() {
        let tr = run_episode(&mut Still, &world(), 100, 20, MoveMode::WithRest).unwrap();
        assert_eq!(tr.r_cum, 0.0);
        assert!(tr.positions.iter().all(|&p| p == 20));
    }

    #[test]
    fn trace_invariants_hold() {
        let env = world();
        let tr = run_episode(
            &mut HandCodedController::default(),
            &env,
            250,
            20,
            MoveMode::AlwaysMove,
        )
        .unwrap();
        assert_eq!(tr.positions.len(), 251);
        assert_eq!(tr.r_switch as usize, tr.switch_times.len());
        assert!(tr.positions.windows(2).all(|w| w[0].abs_diff(w[1]) <= 1));
        let cum: f64 = tr
            .positions
            .iter()
            .zip(&tr.modes)
            .map(|(&p, m)| env.quality_at(p) * m.sign())
            .sum();
        assert!((cum - tr.r_cum).abs() < 1e-12);
        assert_eq!(
            tr.r_ins,
            env.quality_at(tr.positions[250]) * tr.modes[250].sign()
        );
    }

    #[test]
    fn fitness_arithmetic() {
        let mut tr = run_episode(&mut Still, &world(), 0, 20, MoveMode::WithRest).unwrap();
        tr.r_switch = 9;
        assert_eq!(fitness(&tr, Regime::Switch.weights()), 9.0);
        tr.r_switch = 1;
        tr.r_ins = 0.5;
        tr.r_cum = 3.0;
        assert!((fitness(&tr, Regime::InstantSwitch.weights()) - 100.005).abs() < 1e-12);
        assert!((fitness(&tr, Regime::CumulativeSwitch.weights()) - 100.03).abs() < 1e-12);
    }

    #[test]
    fn aggregation() {
        assert_eq!(aggregate(Scheme::DoubleMean, &[10.0, 2.0]), 6.0);
        assert_eq!(aggregate(Scheme::DoubleMin, &[10.0, 2.0]), 2.0);
        assert_eq!(aggregate(Scheme::SingleNormal, &[10.0]), 10.0);
    }

    #[test]
    fn non_finite_output_scores_worst() {
        let err = run_episode(&mut Broken, &world(), 10, 20, MoveMode::AlwaysMove).unwrap_err();
        assert_eq!(err.t, 0);
        let ev = evaluate(&mut Broken, &EvalConfig::default()).unwrap();
        assert_eq!(ev.score, WORST_FITNESS);
        assert!(ev.traces.iter().all(Option::is_none));
    }

    #[test]
    fn handcoded_double_traces_mirror() {
        let ev = evaluate(&mut HandCodedController::default(), &EvalConfig::default()).unwrap();
        let a = ev.traces[0].as_ref().unwrap();
        let b = ev.traces[1].as_ref().unwrap();
        assert!(a
            .positions
            .iter()
            .zip(&b.positions)
            .all(|(x, y)| x + y == 39));
        assert_eq!(a.r_switch, b.r_switch);
        assert_eq!(ev.score, a.r_switch as f64);
    }

    #[test]
    fn blind_drift_scores_in_one_world_only() {
        let cfg = EvalConfig::default();
        let min = evaluate(&mut DriftController::default(), &cfg).unwrap();
        let mean = evaluate(
            &mut DriftController::default(),
            &EvalConfig {
                scheme: Scheme::DoubleMean,
                ..cfg
            },
        )
        .unwrap();
        let normal = min.traces[0].as_ref().unwrap().r_switch;
        let flipped = min.traces[1].as_ref().unwrap().r_switch;
        assert_eq!((normal, flipped), (1, 0));
        assert_eq!(min.score, 0.0);
        assert_eq!(mean.score, 0.5);
    }

    #[test]
    fn tuned_zigzag_loses_first_leg_when_mirrored() {
        let cfg = EvalConfig::default();
        let mut z = ZigzagController::tuned_for(&world());
        let ev = evaluate(&mut z, &cfg).unwrap();
        let normal = ev.traces[0].as_ref().unwrap().r_switch;
        let flipped = ev.traces[1].as_ref().unwrap().r_switch;
        assert_eq!((normal, flipped), (9, 8));
        assert_eq!(ev.score, 8.0);
    }

    #[test]
    fn linear_in_weights() {
        let tr = run_episode(
            &mut HandCodedController::default(),
            &world(),
            250,
            20,
            MoveMode::AlwaysMove,
        )
        .unwrap();
        for regime in Regime::ALL {
            let w = regime.weights();
            for a in [0.0, 0.5, 3.0] {
                let lhs = fitness(&tr, w.scaled(a));
                let rhs = a * fitness(&tr, w);
                assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let env = world();
        let tr = run_episode(
            &mut HandCodedController::default(),
            &env,
            60,
            20,
            MoveMode::AlwaysMove,
        )
        .unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let back = EpisodeTrace::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.positions, tr.positions);
        assert_eq!(back.modes, tr.modes);
        assert_eq!(back.switch_times, tr.switch_times);
        assert_eq!(back.deltas, tr.deltas);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap() == "t,P,s_l,s_r,mode,switched");
    }

    #[test]
    fn truncation_recomputes_rewards() {
        let env = world();
        let tr = run_episode(
            &mut HandCodedController::default(),
            &env,
            250,
            20,
            MoveMode::AlwaysMove,
        )
        .unwrap();
        let short = tr.truncated(56, &env);
        let direct = run_episode(
            &mut HandCodedController::default(),
            &env,
            56,
            20,
            MoveMode::AlwaysMove,
        )
        .unwrap();
        assert_eq!(short.positions, direct.positions);
        assert_eq!(short.r_switch, direct.r_switch);
        assert!((short.r_cum - direct.r_cum).abs() < 1e-12);
    }
}
