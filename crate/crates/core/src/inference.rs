//! Complementary binary experiments on a hidden apparatus: exact outcome
//! probabilities by enumeration, a seeded simulator, and Bayes updates.

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::states::{density_from_distribution, DensityMatrix, PureState, StateError};

/// Recorded in reports so that traces can be reproduced.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng";

/// Largest sample space enumerated exactly.
pub const ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error("trial count must be at least one")]
    ZeroTrials,
    #[error("apparatus lifetime must be at least one trial")]
    ZeroLifetime,
    #[error("every hypothesis assigns zero probability to the data")]
    ZeroEvidence,
    #[error("no outcome model for hypothesis '{hypothesis}' in experiment '{experiment}'")]
    MissingModel { hypothesis: String, experiment: String },
    #[error("probability {value} for hypothesis '{hypothesis}' in experiment '{experiment}' is outside [0, 1]")]
    BadProbability { hypothesis: String, experiment: String, value: Rational64 },
    #[error("apparatus '{0}' is malformed: {1}")]
    BadApparatus(String, String),
    #[error("sample space of {0} sequences exceeds the enumeration cap")]
    TooLarge(u64),
    #[error("prior has {prior} entries but the model has {model} hypotheses")]
    LengthMismatch { prior: usize, model: usize },
    #[error("unknown hypothesis '{0}'")]
    UnknownHypothesis(String),
    #[error("unknown experiment '{0}'")]
    UnknownExperiment(String),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    Replacement,
    WithoutReplacement,
}

/// `draws` ordered draws from `items` objects, of which the first `marked`
/// are marked (the one on a die, the ace in a pack).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Apparatus {
    pub sampler: Sampler,
    pub items: u32,
    pub marked: u32,
    pub draws: u32,
}

impl Apparatus {
    fn validate(&self, label: &str) -> Result<(), InferenceError> {
        let bad = |msg: &str| Err(InferenceError::BadApparatus(label.to_string(), msg.to_string()));
        if self.items == 0 || self.draws == 0 {
            return bad("items and draws must be positive");
        }
        if self.marked > self.items {
            return bad("more marked items than items");
        }
        if self.sampler == Sampler::WithoutReplacement && self.draws > self.items {
            return bad("cannot draw more items than exist without replacement");
        }
        Ok(())
    }

    fn sample_space_size(&self) -> u64 {
        match self.sampler {
            Sampler::Replacement => u64::from(self.items).saturating_pow(self.draws),
            Sampler::WithoutReplacement => {
                (0..self.draws).map(|i| u64::from(self.items - i)).fold(1u64, u64::saturating_mul)
            }
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<u32> {
        match self.sampler {
            Sampler::Replacement => (0..self.draws).map(|_| rng.random_range(0..self.items)).collect(),
            Sampler::WithoutReplacement => {
                let mut pack: Vec<u32> = (0..self.items).collect();
                let (chosen, _) = pack.partial_shuffle(rng, self.draws as usize);
                chosen.to_vec()
            }
        }
    }
}

/// What the robot reports from one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// 1 iff the first draw is marked.
    First,
    /// 1 iff any draw is marked.
    Any,
}

impl Statistic {
    pub fn evaluate(self, draws: &[u32], marked: u32) -> bool {
        match self {
            Statistic::First => draws.first().is_some_and(|&d| d < marked),
            Statistic::Any => draws.iter().any(|&d| d < marked),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub label: String,
    pub apparatus: Option<Apparatus>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub statistic: Statistic,
    /// Outcome-1 probabilities given directly, by hypothesis index.
    pub fixed: Vec<Option<Rational64>>,
}

/// Hypotheses about the hidden apparatus and the experiments that can be
/// asked of it, with an exact outcome-1 probability for every pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentModel {
    hypotheses: Vec<Hypothesis>,
    experiments: Vec<Experiment>,
    probabilities: Vec<Vec<Rational64>>,
}

impl ExperimentModel {
    pub fn new(hypotheses: Vec<Hypothesis>, experiments: Vec<Experiment>) -> Result<Self, InferenceError> {
        let mut probabilities = Vec::with_capacity(experiments.len());
        for e in &experiments {
            let mut row = Vec::with_capacity(hypotheses.len());
            for (h, hyp) in hypotheses.iter().enumerate() {
                let p = match (e.fixed.get(h).copied().flatten(), hyp.apparatus) {
                    (Some(p), _) => p,
                    (None, Some(app)) => {
                        app.validate(&hyp.label)?;
                        exact_outcome_probability(&app, e.statistic)?
                    }
                    (None, None) => {
                        return Err(InferenceError::MissingModel {
                            hypothesis: hyp.label.clone(),
                            experiment: e.name.clone(),
                        })
                    }
                };
                if p < Rational64::from_integer(0) || p > Rational64::from_integer(1) {
                    return Err(InferenceError::BadProbability {
                        hypothesis: hyp.label.clone(),
                        experiment: e.name.clone(),
                        value: p,
                    });
                }
                row.push(p);
            }
            probabilities.push(row);
        }
        Ok(ExperimentModel { hypotheses, experiments, probabilities })
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn experiments(&self) -> &[Experiment] {
        &self.experiments
    }

    pub fn hypothesis_index(&self, label: &str) -> Result<usize, InferenceError> {
        self.hypotheses
            .iter()
            .position(|h| h.label == label)
            .ok_or_else(|| InferenceError::UnknownHypothesis(label.to_string()))
    }

    pub fn experiment_index(&self, name: &str) -> Result<usize, InferenceError> {
        self.experiments
            .iter()
            .position(|e| e.name == name)
            .ok_or_else(|| InferenceError::UnknownExperiment(name.to_string()))
    }

    /// Exact probability of outcome 1.
    pub fn probability(&self, experiment: usize, hypothesis: usize) -> Rational64 {
        self.probabilities[experiment][hypothesis]
    }

    pub fn likelihoods(&self, experiment: usize) -> Vec<f64> {
        self.probabilities[experiment].iter().map(|&r| to_f64(r)).collect()
    }
}

pub fn to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Probability of outcome 1 by enumerating every ordered draw sequence.
pub fn exact_outcome_probability(app: &Apparatus, statistic: Statistic) -> Result<Rational64, InferenceError> {
    let (hits, total) = exact_outcome_count(app, statistic)?;
    Ok(Rational64::new(hits as i64, total as i64))
}

/// `(sequences reporting 1, all sequences)` before reduction.
pub fn exact_outcome_count(app: &Apparatus, statistic: Statistic) -> Result<(u64, u64), InferenceError> {
    let total = app.sample_space_size();
    if total > ENUMERATION_CAP {
        return Err(InferenceError::TooLarge(total));
    }
    let mut hits = 0u64;
    let mut seen = 0u64;
    let mut prefix = Vec::with_capacity(app.draws as usize);
    enumerate(app, &mut prefix, &mut |seq| {
        seen += 1;
        if statistic.evaluate(seq, app.marked) {
            hits += 1;
        }
    });
    Ok((hits, seen))
}

fn enumerate(app: &Apparatus, prefix: &mut Vec<u32>, visit: &mut impl FnMut(&[u32])) {
    if prefix.len() == app.draws as usize {
        visit(prefix);
        return;
    }
    for item in 0..app.items {
        if app.sampler == Sampler::WithoutReplacement && prefix.contains(&item) {
            continue;
        }
        prefix.push(item);
        enumerate(app, prefix, visit);
        prefix.pop();
    }
}

/// Simulated reports from one apparatus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub run_id: u64,
    pub experiment: String,
    pub hypothesis: String,
    pub bits: Vec<bool>,
}

impl Trace {
    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn frequency(&self) -> f64 {
        self.ones() as f64 / self.bits.len() as f64
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn trial(model: &ExperimentModel, experiment: usize, hypothesis: usize, rng: &mut ChaCha8Rng) -> bool {
    let e = &model.experiments[experiment];
    match (e.fixed.get(hypothesis).copied().flatten(), model.hypotheses[hypothesis].apparatus) {
        (None, Some(app)) => e.statistic.evaluate(&app.draw(rng), app.marked),
        _ => rng.random_bool(to_f64(model.probabilities[experiment][hypothesis])),
    }
}

/// `n` trials of one experiment on an apparatus of known type.  The random
/// stream is selected by `run_id`, so different runs under one seed are
/// independent.
pub fn simulate(
    model: &ExperimentModel,
    experiment: usize,
    hypothesis: usize,
    n: usize,
    seed: u64,
    run_id: u64,
) -> Result<Trace, InferenceError> {
    if n == 0 {
        return Err(InferenceError::ZeroTrials);
    }
    let mut rng = rng_for(seed, run_id);
    let bits = (0..n).map(|_| trial(model, experiment, hypothesis, &mut rng)).collect();
    Ok(Trace {
        run_id,
        experiment: model.experiments[experiment].name.clone(),
        hypothesis: model.hypotheses[hypothesis].label.clone(),
        bits,
    })
}

/// `n` trials split into apparatus lifetimes of `lifetime` trials.  Each
/// lifetime starts from a fresh apparatus whose type is drawn uniformly.
pub fn simulate_lifetimes(
    model: &ExperimentModel,
    experiment: usize,
    n: usize,
    lifetime: usize,
    seed: u64,
) -> Result<Vec<Trace>, InferenceError> {
    if n == 0 {
        return Err(InferenceError::ZeroTrials);
    }
    if lifetime == 0 {
        return Err(InferenceError::ZeroLifetime);
    }
    let mut traces = Vec::new();
    let mut remaining = n;
    let mut run_id = 0u64;
    while remaining > 0 {
        let len = remaining.min(lifetime);
        let mut rng = rng_for(seed, run_id);
        let hypothesis = rng.random_range(0..model.hypotheses.len());
        let bits = (0..len).map(|_| trial(model, experiment, hypothesis, &mut rng)).collect();
        traces.push(Trace {
            run_id,
            experiment: model.experiments[experiment].name.clone(),
            hypothesis: model.hypotheses[hypothesis].label.clone(),
            bits,
        });
        remaining -= len;
        run_id += 1;
    }
    Ok(traces)
}

/// `4 √(p(1 − p)/n)`.
pub fn four_sigma(p: f64, n: usize) -> f64 {
    4.0 * (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Prior,
    Updated { trials: usize, ones: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub labels: Vec<String>,
    pub probabilities: Vec<f64>,
    pub provenance: Provenance,
}

impl Posterior {
    /// The counting-measure prior.
    pub fn uniform(labels: Vec<String>) -> Self {
        let n = labels.len();
        Posterior { labels, probabilities: vec![1.0 / n as f64; n], provenance: Provenance::Prior }
    }

    pub fn mass(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.probabilities[i])
    }
}

/// Bayes' rule for i.i.d. binary data with outcome-1 probabilities `p1`,
/// computed in log space.
pub fn bayes_update(prior: &Posterior, p1: &[f64], bits: &[bool]) -> Result<Posterior, InferenceError> {
    if prior.probabilities.len() != p1.len() {
        return Err(InferenceError::LengthMismatch { prior: prior.probabilities.len(), model: p1.len() });
    }
    if bits.is_empty() {
        return Ok(prior.clone());
    }
    let ones = bits.iter().filter(|&&b| b).count();
    let zeros = bits.len() - ones;
    let log_term = |count: usize, p: f64| if count == 0 { 0.0 } else { count as f64 * p.ln() };
    let logs: Vec<f64> = prior
        .probabilities
        .iter()
        .zip(p1)
        .map(|(&pi, &p)| pi.ln() + log_term(ones, p) + log_term(zeros, 1.0 - p))
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Err(InferenceError::ZeroEvidence);
    }
    let weights: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    let (trials, prior_ones) = match prior.provenance {
        Provenance::Prior => (0, 0),
        Provenance::Updated { trials, ones } => (trials, ones),
    };
    Ok(Posterior {
        labels: prior.labels.clone(),
        probabilities: weights.iter().map(|w| w / total).collect(),
        provenance: Provenance::Updated { trials: trials + bits.len(), ones: prior_ones + ones },
    })
}

/// `Σ_k π(k) v_k v_kᴴ` for a posterior over the values of one experiment.
pub fn posterior_density_state(posterior: &[f64], states: &[PureState]) -> Result<DensityMatrix, InferenceError> {
    Ok(density_from_distribution(posterior, states)?)
}
