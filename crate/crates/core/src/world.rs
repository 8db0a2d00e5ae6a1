//! The one-dimensional cellular world.
//!
//! An [`Environment`] is a fixed quality profile over `N` cells. The agent
//! occupies one cell, reads the quality of its two neighbours and moves by at
//! most one cell per time step. The [`JudgeState`] automaton is task-side
//! bookkeeping the controller never sees: it tracks whether the agent should
//! currently be climbing or descending and counts correct switches.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default switching thresholds on cell quality.
pub const THETA_MAX: f64 = 0.95;
pub const THETA_MIN: f64 = -0.95;

/// Default world size.
pub const DEFAULT_CELLS: usize = 40;
/// Default gradient steepness.
pub const DEFAULT_STEEPNESS: f64 = 4.0;

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Gauss error function.
///
/// Uses the Maclaurin series for `|x| <= 2.5` and a continued fraction for
/// the complementary function beyond. Accurate to well below `1e-12` on
/// `[-6, 6]`. Odd symmetry is exact: the value is computed on `|x|` and
/// negated.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let a = x.abs();
    let value = if a <= 2.5 {
        erf_series(a)
    } else {
        1.0 - erfc_fraction(a)
    };
    if x < 0.0 {
        -value
    } else {
        value
    }
}

fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..200 {
        term *= -x2 / n as f64;
        let contrib = term / (2 * n + 1) as f64;
        sum += contrib;
        if contrib.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    FRAC_2_SQRT_PI * sum
}

// erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
fn erfc_fraction(x: f64) -> f64 {
    if x > 27.0 {
        return 0.0;
    }
    let mut f = x;
    for k in (1..=80).rev() {
        f = x + (k as f64 * 0.5) / f;
    }
    (-x * x).exp() / (std::f64::consts::PI.sqrt() * f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Quality increases with the cell index (maximum on the right).
    Normal,
    /// Mirror image of `Normal`.
    Flipped,
}

impl Orientation {
    pub fn opposite(self) -> Self {
        match self {
            Orientation::Normal => Orientation::Flipped,
            Orientation::Flipped => Orientation::Normal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Erf,
    Gaussian,
    Linear,
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Erf => "erf",
            Profile::Gaussian => "gaussian",
            Profile::Linear => "linear",
        })
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Normal => "normal",
            Orientation::Flipped => "flipped",
        })
    }
}

/// Parameters that fully determine an [`Environment`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub cells: usize,
    pub profile: Profile,
    pub orientation: Orientation,
    pub steepness: f64,
}

impl EnvSpec {
    pub fn erf(cells: usize, orientation: Orientation) -> Self {
        Self {
            cells,
            profile: Profile::Erf,
            orientation,
            steepness: DEFAULT_STEEPNESS,
        }
    }

    pub fn build(&self) -> Result<Environment> {
        Environment::new(self.cells, self.profile, self.orientation, self.steepness)
    }
}

/// Immutable quality field over `N` cells, each value in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    spec: EnvSpec,
    quality: Vec<f64>,
}

impl Environment {
    pub fn new(
        cells: usize,
        profile: Profile,
        orientation: Orientation,
        steepness: f64,
    ) -> Result<Self> {
        if cells < 4 {
            return Err(Error::TooFewCells(cells));
        }
        if !(steepness > 0.0 && steepness.is_finite()) {
            return Err(Error::BadSteepness(steepness));
        }
        let n = cells as f64;
        let mut quality: Vec<f64> = match profile {
            Profile::Erf => (0..cells)
                .map(|i| erf(steepness * (i as f64 - n / 2.0) / n))
                .collect(),
            Profile::Gaussian => {
                // Centred between the two middle cells so both halves are
                // mirror images, then stretched onto [-1, 1].
                let centre = (n - 1.0) / 2.0;
                let raw: Vec<f64> = (0..cells)
                    .map(|i| {
                        let u = steepness * (i as f64 - centre) / n;
                        2.0 * (-u * u).exp() - 1.0
                    })
                    .collect();
                let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let span = hi - lo;
                raw.into_iter()
                    .map(|r| {
                        if span > 0.0 {
                            (-1.0 + 2.0 * (r - lo) / span).clamp(-1.0, 1.0)
                        } else {
                            r
                        }
                    })
                    .collect()
            }
            Profile::Linear => (0..cells)
                .map(|i| 2.0 * i as f64 / (n - 1.0) - 1.0)
                .collect(),
        };
        if orientation == Orientation::Flipped {
            quality.reverse();
        }
        Ok(Self {
            spec: EnvSpec {
                cells,
                profile,
                orientation,
                steepness,
            },
            quality,
        })
    }

    /// The default erf world of the benchmark.
    pub fn erf(cells: usize, orientation: Orientation) -> Result<Self> {
        Self::new(cells, Profile::Erf, orientation, DEFAULT_STEEPNESS)
    }

    pub fn spec(&self) -> EnvSpec {
        self.spec
    }

    pub fn cells(&self) -> usize {
        self.quality.len()
    }

    pub fn orientation(&self) -> Orientation {
        self.spec.orientation
    }

    pub fn profile(&self) -> Profile {
        self.spec.profile
    }

    pub fn quality(&self) -> &[f64] {
        &self.quality
    }

    pub fn quality_at(&self, cell: usize) -> f64 {
        self.quality[cell]
    }

    /// Same world with the opposite orientation.
    pub fn mirrored(&self) -> Self {
        let mut quality = self.quality.clone();
        quality.reverse();
        Self {
            spec: EnvSpec {
                orientation: self.spec.orientation.opposite(),
                ..self.spec
            },
            quality,
        }
    }

    /// The cell that corresponds to `cell` in the mirrored world.
    pub fn mirror_cell(&self, cell: usize) -> usize {
        self.cells() - 1 - cell
    }

    /// Default start: the centre cell `floor(N/2)`.
    pub fn centre(&self) -> usize {
        self.cells() / 2
    }

    pub fn check_cell(&self, cell: usize) -> Result<()> {
        if cell < self.cells() {
            Ok(())
        } else {
            Err(Error::BadStart {
                start: cell,
                cells: self.cells(),
            })
        }
    }

    /// Left and right sensor readings at `cell`. At a wall the missing
    /// neighbour is replaced by the agent's own cell.
    pub fn sense(&self, cell: usize) -> (f64, f64) {
        let last = self.cells() - 1;
        let left = if cell > 0 {
            self.quality[cell - 1]
        } else {
            self.quality[cell]
        };
        let right = if cell < last {
            self.quality[cell + 1]
        } else {
            self.quality[cell]
        };
        (left, right)
    }

    /// Moves by `delta` and clamps to the world.
    pub fn step(&self, cell: usize, delta: i32) -> Result<usize> {
        if delta.abs() > 1 {
            return Err(Error::BadDelta(delta));
        }
        let last = self.cells() as i64 - 1;
        Ok((cell as i64 + delta as i64).clamp(0, last) as usize)
    }

    /// One row per cell: `index,quality` with 9 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index,quality")?;
        for (i, q) in self.quality.iter().enumerate() {
            writeln!(out, "{},{}", i, format_sig(*q, 9))?;
        }
        Ok(())
    }
}

/// Formats `x` with `digits` significant digits in plain decimal notation.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{}", if x == 0.0 { 0.0 } else { x });
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).clamp(0, 30) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.starts_with("-0") && s.trim_start_matches(['-', '0', '.']).is_empty() {
        s[1..].to_string()
    } else {
        s
    }
}

/// Behavioural mode the judge expects from the agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Uphill,
    Downhill,
}

impl Mode {
    pub fn sign(self) -> f64 {
        match self {
            Mode::Uphill => 1.0,
            Mode::Downhill => -1.0,
        }
    }

    pub fn toggled(self) -> Self {
        match self {
            Mode::Uphill => Mode::Downhill,
            Mode::Downhill => Mode::Uphill,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Uphill => "up",
            Mode::Downhill => "down",
        })
    }
}

/// Task-side automaton that defines and counts correct switches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JudgeState {
    pub mode: Mode,
    pub theta_max: f64,
    pub theta_min: f64,
    pub switch_count: u32,
}

impl Default for JudgeState {
    fn default() -> Self {
        Self::new(THETA_MAX, THETA_MIN)
    }
}

impl JudgeState {
    pub fn new(theta_max: f64, theta_min: f64) -> Self {
        assert!(theta_min < theta_max, "theta_min must be below theta_max");
        Self {
            mode: Mode::Uphill,
            theta_max,
            theta_min,
            switch_count: 0,
        }
    }

    /// Feeds the quality of the cell the agent just arrived at. Thresholds
    /// are inclusive.
    pub fn update(self, quality: f64) -> (Self, bool) {
        let switched = match self.mode {
            Mode::Uphill => quality >= self.theta_max,
            Mode::Downhill => quality <= self.theta_min,
        };
        if switched {
            (
                Self {
                    mode: self.mode.toggled(),
                    switch_count: self.switch_count + 1,
                    ..self
                },
                true,
            )
        } else {
            (self, false)
        }
    }
}
