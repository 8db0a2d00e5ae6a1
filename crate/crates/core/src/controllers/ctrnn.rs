//! Continuous-time recurrent neural network.
//!
//! `tau_i dy_i/dt = -y_i + sum_j w_ji * sigma(g_j (y_j + theta_j)) + I_i`,
//! integrated with forward Euler. Sensors are injected as external input at
//! nodes 0 and 1; the last node drives the motor.

use serde::{Deserialize, Serialize};

use super::Controller;
use crate::error::{Error, Result};

pub const CTRNN_NODES: usize = 11;
pub const CTRNN_GENES: usize = CTRNN_NODES * CTRNN_NODES + 2 * CTRNN_NODES;

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Euler step size and sub-steps per world step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CtrnnSettings {
    pub step: f64,
    pub inner_steps: u32,
}

impl Default for CtrnnSettings {
    fn default() -> Self {
        Self {
            step: 0.2,
            inner_steps: 5,
        }
    }
}

impl CtrnnSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::BadStep(self.step));
        }
        if self.inner_steps == 0 {
            return Err(Error::NoInnerSteps);
        }
        Ok(())
    }
}

/// Center-crossing biases: `theta_i = -(sum_j w_ji) / 2`.
///
/// `weights` is square and target-major: `weights[i * n + j]` is the weight
/// from node `j` into node `i`.
pub fn center_crossing_theta(weights: &[f64]) -> Vec<f64> {
    let n = (weights.len() as f64).sqrt().round() as usize;
    assert_eq!(n * n, weights.len(), "weight matrix must be square");
    weights
        .chunks(n)
        .map(|incoming| -0.5 * incoming.iter().sum::<f64>())
        .collect()
}

/// Eleven-node genome: 121 weights (target-major), 11 biases, 11 time
/// constants. Gains are fixed at 1 and not part of the genome.
#[derive(Debug, Clone, PartialEq)]
pub struct CtrnnGenome {
    pub weights: Vec<f64>,
    pub theta: Vec<f64>,
    pub tau: Vec<f64>,
}

impl CtrnnGenome {
    pub fn new(weights: Vec<f64>, theta: Vec<f64>, tau: Vec<f64>) -> Result<Self> {
        let g = Self {
            weights,
            theta,
            tau,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn from_genes(genes: &[f64]) -> Result<Self> {
        if genes.len() != CTRNN_GENES {
            return Err(Error::GeneCount {
                substrate: "ctrnn",
                expected: CTRNN_GENES,
                actual: genes.len(),
            });
        }
        let w = CTRNN_NODES * CTRNN_NODES;
        Self::new(
            genes[..w].to_vec(),
            genes[w..w + CTRNN_NODES].to_vec(),
            genes[w + CTRNN_NODES..].to_vec(),
        )
    }

    pub fn to_genes(&self) -> Vec<f64> {
        let mut genes = Vec::with_capacity(CTRNN_GENES);
        genes.extend_from_slice(&self.weights);
        genes.extend_from_slice(&self.theta);
        genes.extend_from_slice(&self.tau);
        genes
    }

    pub fn validate(&self) -> Result<()> {
        let total = self.weights.len() + self.theta.len() + self.tau.len();
        if self.weights.len() != CTRNN_NODES * CTRNN_NODES
            || self.theta.len() != CTRNN_NODES
            || self.tau.len() != CTRNN_NODES
        {
            return Err(Error::GeneCount {
                substrate: "ctrnn",
                expected: CTRNN_GENES,
                actual: total,
            });
        }
        if let Some(i) = self
            .weights
            .iter()
            .chain(&self.theta)
            .chain(&self.tau)
            .position(|g| !g.is_finite())
        {
            return Err(Error::NonFiniteGene(i));
        }
        if let Some((node, &value)) = self.tau.iter().enumerate().find(|(_, &t)| t <= 0.0) {
            return Err(Error::BadTau { node, value });
        }
        Ok(())
    }

    pub fn decode(&self, settings: CtrnnSettings) -> Result<Ctrnn> {
        self.validate()?;
        Ctrnn::new(
            CTRNN_NODES,
            self.weights.clone(),
            self.theta.clone(),
            self.tau.clone(),
            settings,
        )
    }
}

/// A CTRNN of any size. Nodes 0 and 1 receive the sensors (when present) and
/// the last node is the motor.
#[derive(Debug, Clone)]
pub struct Ctrnn {
    nodes: usize,
    weights: Vec<f64>,
    theta: Vec<f64>,
    tau: Vec<f64>,
    gain: Vec<f64>,
    settings: CtrnnSettings,
    y: Vec<f64>,
    fired: Vec<f64>,
}

impl Ctrnn {
    pub fn new(
        nodes: usize,
        weights: Vec<f64>,
        theta: Vec<f64>,
        tau: Vec<f64>,
        settings: CtrnnSettings,
    ) -> Result<Self> {
        settings.validate()?;
        if weights.len() != nodes * nodes || theta.len() != nodes || tau.len() != nodes {
            return Err(Error::GeneCount {
                substrate: "ctrnn",
                expected: nodes * nodes + 2 * nodes,
                actual: weights.len() + theta.len() + tau.len(),
            });
        }
        if let Some((node, &value)) = tau
            .iter()
            .enumerate()
            .find(|(_, &t)| t.is_nan() || t <= 0.0)
        {
            return Err(Error::BadTau { node, value });
        }
        Ok(Self {
            nodes,
            weights,
            theta,
            tau,
            gain: vec![1.0; nodes],
            settings,
            y: vec![0.0; nodes],
            fired: vec![0.0; nodes],
        })
    }

    pub fn state(&self) -> &[f64] {
        &self.y
    }

    /// Integrates one world step with the given external input vector.
    pub fn integrate(&mut self, input: &[f64]) {
        let n = self.nodes;
        let h = self.settings.step;
        for _ in 0..self.settings.inner_steps {
            for j in 0..n {
                self.fired[j] = logistic(self.gain[j] * (self.y[j] + self.theta[j]));
            }
            for i in 0..n {
                let row = &self.weights[i * n..(i + 1) * n];
                let drive: f64 = row.iter().zip(&self.fired).map(|(w, s)| w * s).sum();
                let ext = input.get(i).copied().unwrap_or(0.0);
                self.y[i] += h / self.tau[i] * (-self.y[i] + drive + ext);
            }
        }
    }

    /// Motor output in `(-1, 1)`.
    pub fn output(&self) -> f64 {
        let o = self.nodes - 1;
        2.0 * logistic(self.gain[o] * (self.y[o] + self.theta[o])) - 1.0
    }
}

impl Controller for Ctrnn {
    fn reset(&mut self) {
        self.y.iter_mut().for_each(|y| *y = 0.0);
    }

    fn act(&mut self, left: f64, right: f64) -> f64 {
        self.integrate(&[left, right]);
        self.output()
    }
}
