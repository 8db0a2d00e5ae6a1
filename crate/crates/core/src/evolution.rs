//! Generational GA: fitness-proportionate selection, elitism, mutation only.
//!
//! Every random draw comes from a ChaCha stream keyed by
//! `(purpose, generation, individual)`, so a run is fully determined by its
//! seed regardless of how evaluation is spread over threads.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::distributions::{Distribution, Uniform, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controllers::{
    center_crossing_theta, AnnGenome, CtrnnGenome, CtrnnSettings, ANN_GENES, CTRNN_NODES,
};
use crate::error::{io_err, Error, Result};
use crate::fitness::{evaluate, EvalConfig, WORST_FITNESS};
use crate::genome::{Genome, Substrate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub elitism: usize,
    pub substrate: Substrate,
    pub ann_mutation_rate: f64,
    pub ann_mutation_range: f64,
    pub ann_init_range: f64,
    pub ctrnn_weight_mutation_rate: f64,
    pub ctrnn_weight_mutation_range: f64,
    pub ctrnn_theta_mutation_range: f64,
    pub ctrnn_tau_mutation_range: f64,
    pub ctrnn_tau_floor: f64,
    /// Draw initial CTRNN weights from `(-15, 15)` instead of `(-0.5, 0.5)`.
    pub ctrnn_wide_init: bool,
    pub ctrnn_tau_init: (f64, f64),
    pub ctrnn: CtrnnSettings,
    pub seed: u64,
    pub eval: EvalConfig,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 150,
            generations: 300,
            elitism: 1,
            substrate: Substrate::Ann,
            ann_mutation_rate: 0.3,
            ann_mutation_range: 0.4,
            ann_init_range: 0.5,
            ctrnn_weight_mutation_rate: 0.1,
            ctrnn_weight_mutation_range: 0.4,
            ctrnn_theta_mutation_range: 0.4,
            ctrnn_tau_mutation_range: 0.1,
            ctrnn_tau_floor: 0.05,
            ctrnn_wide_init: false,
            ctrnn_tau_init: (0.9, 5.9),
            ctrnn: CtrnnSettings::default(),
            seed: 0,
            eval: EvalConfig::default(),
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.population_size < 2 {
            return bad(format!("population size {} < 2", self.population_size));
        }
        if self.elitism >= self.population_size {
            return bad(format!(
                "elitism {} must be below the population size {}",
                self.elitism, self.population_size
            ));
        }
        if self.generations == 0 {
            return bad("at least one generation is required".into());
        }
        for (name, p) in [
            ("ann_mutation_rate", self.ann_mutation_rate),
            (
                "ctrnn_weight_mutation_rate",
                self.ctrnn_weight_mutation_rate,
            ),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        for (name, r) in [
            ("ann_mutation_range", self.ann_mutation_range),
            ("ann_init_range", self.ann_init_range),
            (
                "ctrnn_weight_mutation_range",
                self.ctrnn_weight_mutation_range,
            ),
            (
                "ctrnn_theta_mutation_range",
                self.ctrnn_theta_mutation_range,
            ),
            ("ctrnn_tau_mutation_range", self.ctrnn_tau_mutation_range),
        ] {
            if !(r > 0.0 && r.is_finite()) {
                return bad(format!("{name} = {r} must be positive"));
            }
        }
        let (lo, hi) = self.ctrnn_tau_init;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return bad(format!(
                "ctrnn_tau_init ({lo}, {hi}) is not a positive interval"
            ));
        }
        if self.ctrnn_tau_floor.is_nan() || self.ctrnn_tau_floor <= 0.0 {
            return bad("ctrnn_tau_floor must be positive".into());
        }
        self.ctrnn.validate()?;
        self.eval.validate()
    }

    fn ctrnn_weight_init(&self) -> f64 {
        if self.ctrnn_wide_init {
            15.0
        } else {
            0.5
        }
    }
}

const STREAM_INIT: u64 = 0;
const STREAM_BREED: u64 = 1;

/// Independent generator for one `(purpose, generation, individual)` slot.
pub fn stream_rng(seed: u64, purpose: u64, generation: u64, individual: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((purpose << 62) | (generation << 32) | (individual & 0xFFFF_FFFF));
    rng
}

fn random_individual<R: Rng>(config: &GaConfig, rng: &mut R) -> Genome {
    match config.substrate {
        Substrate::Ann => {
            let r = config.ann_init_range;
            let dist = Uniform::new(-r, r);
            let genes = (0..ANN_GENES).map(|_| dist.sample(rng)).collect();
            Genome::Ann(AnnGenome::new(genes).expect("uniform genes are finite"))
        }
        Substrate::Ctrnn => {
            let r = config.ctrnn_weight_init();
            let dist = Uniform::new(-r, r);
            let weights: Vec<f64> = (0..CTRNN_NODES * CTRNN_NODES)
                .map(|_| dist.sample(rng))
                .collect();
            let (lo, hi) = config.ctrnn_tau_init;
            let tau_dist = Uniform::new(lo, hi);
            let tau = (0..CTRNN_NODES).map(|_| tau_dist.sample(rng)).collect();
            let theta = center_crossing_theta(&weights);
            Genome::Ctrnn(CtrnnGenome::new(weights, theta, tau).expect("valid by construction"))
        }
    }
}

pub fn init_population(config: &GaConfig) -> Vec<Genome> {
    (0..config.population_size)
        .map(|i| {
            random_individual(
                config,
                &mut stream_rng(config.seed, STREAM_INIT, 0, i as u64),
            )
        })
        .collect()
}

/// Individual 0 is `seed` verbatim, the rest are single-mutation copies.
pub fn seed_population(seed: &Genome, config: &GaConfig) -> Result<Vec<Genome>> {
    if seed.substrate() != config.substrate {
        return Err(Error::SubstrateMismatch {
            expected: config.substrate.name(),
            found: seed.substrate().name(),
        });
    }
    let mut pop = Vec::with_capacity(config.population_size);
    pop.push(seed.clone());
    for i in 1..config.population_size {
        let mut rng = stream_rng(config.seed, STREAM_INIT, 0, i as u64);
        pop.push(mutate(seed, config, &mut rng));
    }
    Ok(pop)
}

pub fn seed_population_from_file(path: impl AsRef<Path>, config: &GaConfig) -> Result<Vec<Genome>> {
    seed_population(&Genome::read(path)?, config)
}

/// Roulette-wheel pick with probability proportional to
/// `f_i - f_min + eps`, `eps = 1e-6 * max(1, f_max - f_min)`.
///
/// Individuals carrying the [`WORST_FITNESS`] sentinel get no mass unless
/// the whole population does.
pub fn select_proportionate<R: Rng>(fitnesses: &[f64], rng: &mut R) -> usize {
    assert!(
        !fitnesses.is_empty(),
        "cannot select from an empty population"
    );
    let weights = selection_weights(fitnesses);
    WeightedIndex::new(&weights)
        .expect("selection weights are positive")
        .sample(rng)
}

/// Unnormalised roulette masses used by [`select_proportionate`].
pub fn selection_weights(fitnesses: &[f64]) -> Vec<f64> {
    let valid = |f: f64| f > WORST_FITNESS && f.is_finite();
    let (lo, hi) = fitnesses
        .iter()
        .copied()
        .filter(|&f| valid(f))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| {
            (lo.min(f), hi.max(f))
        });
    if lo > hi {
        return vec![1.0; fitnesses.len()];
    }
    let eps = 1e-6 * (hi - lo).max(1.0);
    fitnesses
        .iter()
        .map(|&f| if valid(f) { f - lo + eps } else { 0.0 })
        .collect()
}

/// Adds `U(-range, range)` to each gene independently with probability
/// `rate`.
pub fn mutate_ann<R: Rng>(g: &AnnGenome, rate: f64, range: f64, rng: &mut R) -> AnnGenome {
    let mut out = g.clone();
    let dist = Uniform::new(-range, range);
    for gene in out.genes_mut() {
        if rng.gen_bool(rate) {
            *gene += dist.sample(rng);
        }
    }
    out
}

/// Per-weight mutation with probability `config.ctrnn_weight_mutation_rate`,
/// plus exactly one bias and one time constant.
pub fn mutate_ctrnn<R: Rng>(g: &CtrnnGenome, config: &GaConfig, rng: &mut R) -> CtrnnGenome {
    let mut out = g.clone();
    let w = Uniform::new(
        -config.ctrnn_weight_mutation_range,
        config.ctrnn_weight_mutation_range,
    );
    for weight in &mut out.weights {
        if rng.gen_bool(config.ctrnn_weight_mutation_rate) {
            *weight += w.sample(rng);
        }
    }
    let i = rng.gen_range(0..out.theta.len());
    out.theta[i] +=
        rng.gen_range(-config.ctrnn_theta_mutation_range..config.ctrnn_theta_mutation_range);
    let j = rng.gen_range(0..out.tau.len());
    let d = rng.gen_range(-config.ctrnn_tau_mutation_range..config.ctrnn_tau_mutation_range);
    out.tau[j] = (out.tau[j] + d).max(config.ctrnn_tau_floor);
    out
}

pub fn mutate<R: Rng>(g: &Genome, config: &GaConfig, rng: &mut R) -> Genome {
    match g {
        Genome::Ann(a) => Genome::Ann(mutate_ann(
            a,
            config.ann_mutation_rate,
            config.ann_mutation_range,
            rng,
        )),
        Genome::Ctrnn(c) => Genome::Ctrnn(mutate_ctrnn(c, config, rng)),
    }
}

/// Scores one genome; undecodable genomes get the sentinel.
pub fn score(genome: &Genome, config: &GaConfig) -> f64 {
    let Ok(mut controller) = genome.decode(config.ctrnn) else {
        return WORST_FITNESS;
    };
    evaluate(&mut controller, &config.eval)
        .map(|e| e.score)
        .unwrap_or(WORST_FITNESS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub median: f64,
    #[serde(skip)]
    pub best_genome: Option<Genome>,
    /// Seconds spent on this generation. Not part of the reproducible output.
    pub wall_clock: f64,
}

#[derive(Debug, Clone)]
pub struct EvolutionLog {
    pub config: GaConfig,
    pub generations: Vec<GenerationRecord>,
    pub best_genome: Genome,
    pub best_fitness: f64,
}

impl EvolutionLog {
    /// `generation,best,mean,median`, one row per generation.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "generation,best,mean,median")?;
        for r in &self.generations {
            writeln!(
                out,
                "{},{:?},{:?},{:?}",
                r.generation, r.best, r.mean, r.median
            )?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write_csv(&mut buf).map_err(io_err(path))?;
        std::fs::write(path, buf).map_err(io_err(path))
    }

    pub fn best_curve(&self) -> Vec<f64> {
        self.generations.iter().map(|g| g.best).collect()
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Indices of the `k` fittest individuals, ties going to the lower index.
fn elite_indices(fitnesses: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitnesses.len()).collect();
    order.sort_by(|&a, &b| fitnesses[b].total_cmp(&fitnesses[a]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

pub fn run_evolution(config: &GaConfig) -> Result<EvolutionLog> {
    config.validate()?;
    run_evolution_from(config, init_population(config), |_| {})
}

/// Runs the GA from an explicit starting population. `on_generation` is
/// called after each generation is scored.
pub fn run_evolution_from(
    config: &GaConfig,
    mut population: Vec<Genome>,
    mut on_generation: impl FnMut(&GenerationRecord),
) -> Result<EvolutionLog> {
    config.validate()?;
    if population.len() != config.population_size {
        return Err(Error::Config(format!(
            "starting population has {} individuals, expected {}",
            population.len(),
            config.population_size
        )));
    }
    if let Some(g) = population
        .iter()
        .find(|g| g.substrate() != config.substrate)
    {
        return Err(Error::SubstrateMismatch {
            expected: config.substrate.name(),
            found: g.substrate().name(),
        });
    }

    let mut records = Vec::with_capacity(config.generations);
    let mut overall: Option<(f64, Genome)> = None;

    for generation in 0..config.generations {
        let started = Instant::now();
        let fitnesses: Vec<f64> = population.par_iter().map(|g| score(g, config)).collect();

        let elites = elite_indices(&fitnesses, config.elitism.max(1));
        let best_idx = elites[0];
        let best = fitnesses[best_idx];
        if overall.as_ref().is_none_or(|(f, _)| best > *f) {
            overall = Some((best, population[best_idx].clone()));
        }

        let next = if generation + 1 < config.generations {
            let mut next: Vec<Genome> = elites[..config.elitism]
                .iter()
                .map(|&i| population[i].clone())
                .collect();
            let children: Vec<Genome> = (config.elitism..config.population_size)
                .into_par_iter()
                .map(|slot| {
                    let mut rng =
                        stream_rng(config.seed, STREAM_BREED, generation as u64, slot as u64);
                    let parent = select_proportionate(&fitnesses, &mut rng);
                    mutate(&population[parent], config, &mut rng)
                })
                .collect();
            next.extend(children);
            Some(next)
        } else {
            None
        };

        let record = GenerationRecord {
            generation,
            best,
            mean: fitnesses.iter().sum::<f64>() / fitnesses.len() as f64,
            median: median(&fitnesses),
            best_genome: Some(population[best_idx].clone()),
            wall_clock: started.elapsed().as_secs_f64(),
        };
        on_generation(&record);
        records.push(record);
        if let Some(next) = next {
            population = next;
        }
    }

    let (best_fitness, best_genome) = overall.expect("at least one generation");
    Ok(EvolutionLog {
        config: config.clone(),
        generations: records,
        best_genome,
        best_fitness,
    })
}
