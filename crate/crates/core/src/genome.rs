//! Substrate-tagged genomes and the plain-text genome file format.
//!
//! ```text
//! ann 41
//! 0.125
//! -3.5
//! ...
//! ```
//!
//! One header line naming the substrate and gene count, then one gene per
//! line in shortest round-trip decimal form.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::controllers::{
    AnnGenome, Controller, CtrnnGenome, CtrnnSettings, ANN_GENES, CTRNN_GENES,
};
use crate::error::{io_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Substrate {
    Ann,
    Ctrnn,
}

impl Substrate {
    pub fn name(self) -> &'static str {
        match self {
            Substrate::Ann => "ann",
            Substrate::Ctrnn => "ctrnn",
        }
    }

    pub fn gene_count(self) -> usize {
        match self {
            Substrate::Ann => ANN_GENES,
            Substrate::Ctrnn => CTRNN_GENES,
        }
    }
}

impl fmt::Display for Substrate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Substrate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ann" => Ok(Substrate::Ann),
            "ctrnn" => Ok(Substrate::Ctrnn),
            other => Err(Error::GenomeFormat(format!("unknown substrate `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Genome {
    Ann(AnnGenome),
    Ctrnn(CtrnnGenome),
}

impl Genome {
    pub fn substrate(&self) -> Substrate {
        match self {
            Genome::Ann(_) => Substrate::Ann,
            Genome::Ctrnn(_) => Substrate::Ctrnn,
        }
    }

    pub fn genes(&self) -> Vec<f64> {
        match self {
            Genome::Ann(g) => g.genes().to_vec(),
            Genome::Ctrnn(g) => g.to_genes(),
        }
    }

    pub fn from_genes(substrate: Substrate, genes: Vec<f64>) -> Result<Self> {
        match substrate {
            Substrate::Ann => AnnGenome::new(genes).map(Genome::Ann),
            Substrate::Ctrnn => CtrnnGenome::from_genes(&genes).map(Genome::Ctrnn),
        }
    }

    /// Builds a fresh controller. `ctrnn` is ignored for ANN genomes.
    pub fn decode(&self, ctrnn: CtrnnSettings) -> Result<Box<dyn Controller>> {
        Ok(match self {
            Genome::Ann(g) => Box::new(g.decode()),
            Genome::Ctrnn(g) => Box::new(g.decode(ctrnn)?),
        })
    }

    pub fn to_text(&self) -> String {
        let genes = self.genes();
        let mut s = format!("{} {}\n", self.substrate(), genes.len());
        for g in genes {
            s.push_str(&format!("{g:?}\n"));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::GenomeFormat("empty file".into()))?;
        let mut parts = header.split_whitespace();
        let substrate: Substrate = parts
            .next()
            .ok_or_else(|| Error::GenomeFormat("missing header".into()))?
            .parse()?;
        let declared: usize = parts
            .next()
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| Error::GenomeFormat(format!("bad header `{header}`")))?;
        let genes = lines
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|_| Error::GenomeFormat(format!("bad gene `{l}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if genes.len() != declared {
            return Err(Error::GenomeFormat(format!(
                "header declares {declared} genes but file holds {}",
                genes.len()
            )));
        }
        if declared != substrate.gene_count() {
            return Err(Error::GeneCount {
                substrate: substrate.name(),
                expected: substrate.gene_count(),
                actual: declared,
            });
        }
        Self::from_genes(substrate, genes)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(io_err(path))
    }
}

/// A weight set for the 2-3-3-2-1 network that reproduces the reference
/// controller: a sensor-difference detector feeding an XOR with a
/// set/reset latch.
pub const HANDCODED_ANN: &str = include_str!("../data/handcoded_ann.genome");

pub fn handcoded_ann() -> AnnGenome {
    match Genome::parse(HANDCODED_ANN).expect("bundled genome parses") {
        Genome::Ann(g) => g,
        Genome::Ctrnn(_) => unreachable!("bundled genome is an ANN"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_mismatch_names_counts() {
        let mut text = String::from("ann 40\n");
        for _ in 0..40 {
            text.push_str("0.5\n");
        }
        let err = Genome::parse(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("41") && msg.contains("40"), "{msg}");
    }

    #[test]
    fn rejects_count_disagreement() {
        assert!(Genome::parse("ann 41\n1.0\n").is_err());
        assert!(Genome::parse("").is_err());
        assert!(Genome::parse("neat 3\n1\n2\n3\n").is_err());
        assert!(Genome::parse("ann 41\nabc\n").is_err());
    }

    #[test]
    fn bundled_handcoded_genome_loads() {
        let g = handcoded_ann();
        assert_eq!(g.genes().len(), 41);
    }

    proptest! {
        #[test]
        fn text_round_trip_is_exact(genes in prop::collection::vec(-1e6f64..1e6, 41)) {
            let g = Genome::from_genes(Substrate::Ann, genes).unwrap();
            let back = Genome::parse(&g.to_text()).unwrap();
            prop_assert_eq!(back, g);
        }
    }
}
