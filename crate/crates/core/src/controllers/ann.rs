//! Layered recurrent network with topology 2-3-3-2-1.
//!
//! The second hidden layer carries a self-loop on every node and links
//! between neighbouring nodes; those recurrent links read the previous time
//! step's activations while all feed-forward links read the current step.
//!
//! Gene layout (41 genes):
//!
//! | genes  | meaning                                              |
//! |--------|------------------------------------------------------|
//! | 0..6   | input -> hidden 1, target-major (`h1[k] <- in[j]`)   |
//! | 6..15  | hidden 1 -> hidden 2, target-major                   |
//! | 15..21 | hidden 2 -> hidden 3, target-major                   |
//! | 21..23 | hidden 3 -> output                                   |
//! | 23..26 | hidden 2 self-loops                                  |
//! | 26..30 | hidden 2 lateral: 0<-1, 1<-0, 1<-2, 2<-1             |
//! | 30..41 | biases: in0, in1, h1[0..3], h2[0..3], h3[0..2], out  |
//!
//! Input neurons pass their sensor value through unchanged, so their two
//! biases are carried in the genome but never read.

use super::Controller;
use crate::error::{Error, Result};

pub const ANN_NEURONS: usize = 11;
pub const ANN_CONNECTIONS: usize = 30;
pub const ANN_GENES: usize = ANN_CONNECTIONS + ANN_NEURONS;

const IN_H1: usize = 0;
const H1_H2: usize = 6;
const H2_H3: usize = 15;
const H3_OUT: usize = 21;
const SELF_LOOPS: usize = 23;
const LATERAL: usize = 26;
const BIAS_H1: usize = 32;
const BIAS_H2: usize = 35;
const BIAS_H3: usize = 38;
const BIAS_OUT: usize = 40;

// Largest magnitude strictly inside the activation's open range.
const HALF_OPEN: f64 = 0.499_999_999_999_999_94;

/// `1 / (1 + exp(-20 x)) - 0.5`, kept inside the open range `(-0.5, 0.5)`
/// when `f64` rounding would otherwise saturate it.
pub fn activation(x: f64) -> f64 {
    (1.0 / (1.0 + (-20.0 * x).exp()) - 0.5).clamp(-HALF_OPEN, HALF_OPEN)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnGenome {
    genes: Vec<f64>,
}

impl AnnGenome {
    pub fn new(genes: Vec<f64>) -> Result<Self> {
        if genes.len() != ANN_GENES {
            return Err(Error::GeneCount {
                substrate: "ann",
                expected: ANN_GENES,
                actual: genes.len(),
            });
        }
        if let Some(i) = genes.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGene(i));
        }
        Ok(Self { genes })
    }

    pub fn zeros() -> Self {
        Self {
            genes: vec![0.0; ANN_GENES],
        }
    }

    pub fn genes(&self) -> &[f64] {
        &self.genes
    }

    pub(crate) fn genes_mut(&mut self) -> &mut [f64] {
        &mut self.genes
    }

    pub fn connection_weights(&self) -> &[f64] {
        &self.genes[..ANN_CONNECTIONS]
    }

    pub fn biases(&self) -> &[f64] {
        &self.genes[ANN_CONNECTIONS..]
    }

    pub fn decode(&self) -> AnnController {
        AnnController {
            genes: self.genes.clone(),
            hidden2: [0.0; 3],
            activations: [0.0; ANN_NEURONS],
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnnController {
    genes: Vec<f64>,
    hidden2: [f64; 3],
    activations: [f64; ANN_NEURONS],
}

impl AnnController {
    /// Activations from the most recent step: inputs, hidden layers, output.
    pub fn activations(&self) -> &[f64; ANN_NEURONS] {
        &self.activations
    }
}

impl Controller for AnnController {
    fn reset(&mut self) {
        self.hidden2 = [0.0; 3];
        self.activations = [0.0; ANN_NEURONS];
    }

    fn act(&mut self, left: f64, right: f64) -> f64 {
        let g = &self.genes;
        let input = [left, right];

        let mut h1 = [0.0; 3];
        for (k, h) in h1.iter_mut().enumerate() {
            let w = &g[IN_H1 + 2 * k..IN_H1 + 2 * k + 2];
            *h = activation(w[0] * input[0] + w[1] * input[1] + g[BIAS_H1 + k]);
        }

        let prev = self.hidden2;
        let lateral = [
            g[LATERAL] * prev[1],
            g[LATERAL + 1] * prev[0] + g[LATERAL + 2] * prev[2],
            g[LATERAL + 3] * prev[1],
        ];
        let mut h2 = [0.0; 3];
        for (k, h) in h2.iter_mut().enumerate() {
            let w = &g[H1_H2 + 3 * k..H1_H2 + 3 * k + 3];
            let net = w[0] * h1[0]
                + w[1] * h1[1]
                + w[2] * h1[2]
                + g[SELF_LOOPS + k] * prev[k]
                + lateral[k]
                + g[BIAS_H2 + k];
            *h = activation(net);
        }

        let mut h3 = [0.0; 2];
        for (k, h) in h3.iter_mut().enumerate() {
            let w = &g[H2_H3 + 3 * k..H2_H3 + 3 * k + 3];
            *h = activation(w[0] * h2[0] + w[1] * h2[1] + w[2] * h2[2] + g[BIAS_H3 + k]);
        }

        let out = activation(g[H3_OUT] * h3[0] + g[H3_OUT + 1] * h3[1] + g[BIAS_OUT]);

        self.hidden2 = h2;
        self.activations = [
            left, right, h1[0], h1[1], h1[2], h2[0], h2[1], h2[2], h3[0], h3[1], out,
        ];
        out
    }
}
