//! Generational genetic algorithm over network hyperparameters.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dataset::{Sample, Split, TrainingDataset};
use super::ensemble::Task;
use super::features::FEATURE_COUNT;
use super::mlp::{Activation, MlpSpec};
use super::model::block_data;
use super::train::{train_network, Hyperparameters, Normalizer, TargetScaling, TrainingSet};
use crate::dynamics::ModeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaError {
    #[error("budget {budget} is smaller than the population {population}")]
    BudgetTooSmall { budget: usize, population: usize },
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("invalid GA settings: {0}")]
    InvalidSettings(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub hidden_layers: usize,
    pub width: usize,
    pub log10_learning_rate: f64,
    pub batch_size: usize,
}

impl Genome {
    pub fn learning_rate(&self) -> f64 {
        10f64.powf(self.log10_learning_rate)
    }

    pub fn hidden(&self) -> Vec<usize> {
        vec![self.width; self.hidden_layers]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub hidden_layers: (usize, usize),
    pub width: (usize, usize),
    pub log10_learning_rate: (f64, f64),
    pub batch_sizes: Vec<usize>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self { hidden_layers: (1, 4), width: (8, 128), log10_learning_rate: (-4.0, -2.0), batch_sizes: vec![32, 64, 128] }
    }
}

impl SearchSpace {
    pub fn validate(&self) -> Result<(), GaError> {
        let bad = |m: &str| Err(GaError::InvalidSpace(m.into()));
        if self.hidden_layers.0 < 1 || self.hidden_layers.0 > self.hidden_layers.1 {
            return bad("hidden layers need 1 ≤ min ≤ max");
        }
        if self.width.0 < 1 || self.width.0 > self.width.1 {
            return bad("width needs 1 ≤ min ≤ max");
        }
        let (lo, hi) = self.log10_learning_rate;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return bad("learning-rate bounds must be finite with min ≤ max");
        }
        if self.batch_sizes.is_empty() || self.batch_sizes.contains(&0) {
            return bad("batch sizes must be non-empty and positive");
        }
        Ok(())
    }

    fn gene<R: Rng>(&self, index: usize, rng: &mut R) -> GeneValue {
        match index {
            0 => GeneValue::Int(rng.random_range(self.hidden_layers.0..=self.hidden_layers.1)),
            1 => GeneValue::Int(rng.random_range(self.width.0..=self.width.1)),
            2 => {
                let (lo, hi) = self.log10_learning_rate;
                GeneValue::Real(lo + (hi - lo) * rng.random::<f64>())
            }
            _ => GeneValue::Int(*self.batch_sizes.choose(rng).expect("non-empty")),
        }
    }

    pub fn random<R: Rng>(&self, rng: &mut R) -> Genome {
        let mut g = Genome { hidden_layers: 1, width: 1, log10_learning_rate: 0.0, batch_size: 1 };
        for i in 0..GENES {
            g.set(i, self.gene(i, rng));
        }
        g
    }
}

const GENES: usize = 4;

#[derive(Clone, Copy)]
enum GeneValue {
    Int(usize),
    Real(f64),
}

impl Genome {
    fn get(&self, index: usize) -> GeneValue {
        match index {
            0 => GeneValue::Int(self.hidden_layers),
            1 => GeneValue::Int(self.width),
            2 => GeneValue::Real(self.log10_learning_rate),
            _ => GeneValue::Int(self.batch_size),
        }
    }

    fn set(&mut self, index: usize, value: GeneValue) {
        match (index, value) {
            (0, GeneValue::Int(v)) => self.hidden_layers = v,
            (1, GeneValue::Int(v)) => self.width = v,
            (2, GeneValue::Real(v)) => self.log10_learning_rate = v,
            (3, GeneValue::Int(v)) => self.batch_size = v,
            _ => unreachable!("gene kinds are fixed by index"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaSettings {
    pub population: usize,
    pub tournament: usize,
    pub crossover: f64,
    pub mutation: f64,
    pub elitism: usize,
}

impl Default for GaSettings {
    fn default() -> Self {
        Self { population: 8, tournament: 3, crossover: 0.5, mutation: 0.2, elitism: 1 }
    }
}

impl GaSettings {
    fn validate(&self) -> Result<(), GaError> {
        if self.population < 2 || self.tournament < 1 || self.elitism >= self.population {
            return Err(GaError::InvalidSettings("need population ≥ 2, tournament ≥ 1, elitism < population".into()));
        }
        if !(0.0..=1.0).contains(&self.crossover) || !(0.0..=1.0).contains(&self.mutation) {
            return Err(GaError::InvalidSettings("probabilities must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub generation: usize,
    pub genome: Genome,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaResult {
    pub best: Genome,
    pub best_fitness: f64,
    /// Every fitness evaluation, in evaluation order.
    pub history: Vec<Evaluation>,
    /// Best-ever fitness after each generation.
    pub best_per_generation: Vec<f64>,
    /// The budget ran out part-way through a generation.
    pub budget_exhausted: bool,
}

fn evaluation_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0xd134_2543_de82_ef95)
}

/// Minimise `fitness` with at most `budget` evaluations. Each evaluation gets
/// a seed fixed by its position in the history, so results do not depend on
/// how evaluations are scheduled. Non-finite fitness counts as +∞.
pub fn ga_search<F>(
    space: &SearchSpace,
    settings: &GaSettings,
    budget: usize,
    seed: u64,
    fitness: F,
) -> Result<GaResult, GaError>
where
    F: Fn(&Genome, u64) -> f64 + Sync,
{
    space.validate()?;
    settings.validate()?;
    if budget < settings.population {
        return Err(GaError::BudgetTooSmall { budget, population: settings.population });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut history: Vec<Evaluation> = Vec::with_capacity(budget);
    let evaluate = |genomes: &[Genome], generation: usize, first_index: usize| -> Vec<Evaluation> {
        genomes
            .par_iter()
            .enumerate()
            .map(|(i, g)| {
                let f = fitness(g, evaluation_seed(seed, first_index + i));
                Evaluation { generation, genome: *g, fitness: if f.is_finite() { f } else { f64::INFINITY } }
            })
            .collect()
    };

    let initial: Vec<Genome> = (0..settings.population).map(|_| space.random(&mut rng)).collect();
    let mut population = evaluate(&initial, 0, 0);
    history.extend(population.iter().copied());
    let mut best = *population.iter().min_by(|a, b| a.fitness.total_cmp(&b.fitness)).expect("non-empty");
    let mut best_per_generation = vec![best.fitness];
    let mut budget_exhausted = false;

    let children_per_generation = settings.population - settings.elitism;
    let mut generation = 0;
    while history.len() < budget {
        generation += 1;
        let mut ranked = population.clone();
        ranked.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
        let mut children = Vec::with_capacity(children_per_generation);
        for _ in 0..children_per_generation {
            let a = tournament(&population, settings.tournament, &mut rng);
            let b = tournament(&population, settings.tournament, &mut rng);
            let mut child = a;
            for gene in 0..GENES {
                if rng.random::<f64>() < settings.crossover {
                    child.set(gene, b.get(gene));
                }
                if rng.random::<f64>() < settings.mutation {
                    child.set(gene, space.gene(gene, &mut rng));
                }
            }
            children.push(child);
        }
        let remaining = budget - history.len();
        if remaining < children.len() {
            children.truncate(remaining);
            budget_exhausted = true;
        }
        let evaluated = evaluate(&children, generation, history.len());
        history.extend(evaluated.iter().copied());
        population = ranked[..settings.elitism].to_vec();
        population.extend(evaluated);
        if let Some(gen_best) = population.iter().min_by(|a, b| a.fitness.total_cmp(&b.fitness)) {
            if gen_best.fitness < best.fitness {
                best = *gen_best;
            }
        }
        best_per_generation.push(best.fitness);
        if budget_exhausted {
            break;
        }
    }
    Ok(GaResult { best: best.genome, best_fitness: best.fitness, history, best_per_generation, budget_exhausted })
}

fn tournament<R: Rng>(population: &[Evaluation], k: usize, rng: &mut R) -> Genome {
    (0..k)
        .map(|_| population[rng.random_range(0..population.len())])
        .min_by(|a, b| a.fitness.total_cmp(&b.fitness))
        .expect("k ≥ 1")
        .genome
}

/// Fitness of a genome on the surrogate: best validation loss of one network
/// for `(mode, task)` after a short training run.
pub fn surrogate_fitness<'a>(
    dataset: &'a TrainingDataset,
    mode: ModeId,
    task: Task,
    activation: Activation,
    max_epochs: usize,
) -> impl Fn(&Genome, u64) -> f64 + Sync + 'a {
    let train: Vec<&Sample> = dataset.split(Split::Train).collect();
    let val: Vec<&Sample> = dataset.split(Split::Val).collect();
    let tr = block_data(&train, mode, task, true);
    let va = block_data(&val, mode, task, true);
    let normalizer = Normalizer::fit(&tr.x);
    let target = if task.is_classifier() { TargetScaling::IDENTITY } else { TargetScaling::fit(&tr.y) };
    let prepare = |d: &super::ensemble::BlockData| TrainingSet {
        x: d.x.iter().map(|x| normalizer.apply(x)).collect(),
        y: d.y.iter().map(|&y| target.forward(y)).collect(),
        w: d.w.clone(),
    };
    let (train_set, val_set) = (prepare(&tr), prepare(&va));
    move |genome, seed| {
        let spec = MlpSpec::new(FEATURE_COUNT, &genome.hidden(), activation, task.head());
        let hyper = Hyperparameters {
            learning_rate: genome.learning_rate(),
            batch_size: genome.batch_size,
            max_epochs,
            patience: max_epochs,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match train_network(&spec, &train_set, &val_set, task.loss(), &hyper, &mut rng) {
            Ok((_, report)) => report.best_val_loss,
            Err(_) => f64::INFINITY,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_below_population_is_rejected() {
        let err = ga_search(&SearchSpace::default(), &GaSettings::default(), 5, 1, |_, _| 0.0).unwrap_err();
        assert_eq!(err, GaError::BudgetTooSmall { budget: 5, population: 8 });
    }

    #[test]
    fn random_genomes_stay_in_space() {
        let space = SearchSpace::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let g = space.random(&mut rng);
            assert!((1..=4).contains(&g.hidden_layers) && (8..=128).contains(&g.width));
            assert!((-4.0..=-2.0).contains(&g.log10_learning_rate));
            assert!([32, 64, 128].contains(&g.batch_size));
        }
    }
}
