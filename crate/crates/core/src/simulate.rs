//! Synthetic careers driven by bandit-style venue choice.
//!
//! Each venue pays a Bernoulli reward. A strategy keeps per-venue running
//! estimates, starting from one optimistic pseudo-observation of reward 1,
//! and picks the next venue from them. Ties go to the lowest venue index.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Corpus, PublicationRecord, Quartile, ScholarMetrics, VenueType};

pub const FIRST_YEAR: i32 = 1990;
pub const CAREER_YEARS: i32 = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("{pointer}: {message}")]
    Invalid { pointer: String, message: String },
    #[error("population spec is not valid JSON at {pointer}: {message}")]
    Json { pointer: String, message: String },
}

fn invalid(pointer: impl Into<String>, message: impl Into<String>) -> SimError {
    SimError::Invalid {
        pointer: pointer.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    EpsilonGreedy,
    Softmax,
    ThompsonSampling,
    /// Adversarial: cycles through venues regardless of reward.
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_b: Option<f64>,
    pub n_venues: usize,
    pub reward_means: Vec<f64>,
    /// Overridden per career when generating a corpus.
    #[serde(default)]
    pub seed: u64,
}

impl StrategyConfig {
    pub fn epsilon_greedy(epsilon: f64, reward_means: Vec<f64>, seed: u64) -> Self {
        Self::base(StrategyKind::EpsilonGreedy, reward_means, seed)
            .with(|c| c.epsilon = Some(epsilon))
    }

    pub fn softmax(temperature: f64, reward_means: Vec<f64>, seed: u64) -> Self {
        Self::base(StrategyKind::Softmax, reward_means, seed)
            .with(|c| c.temperature = Some(temperature))
    }

    pub fn thompson(prior_a: f64, prior_b: f64, reward_means: Vec<f64>, seed: u64) -> Self {
        Self::base(StrategyKind::ThompsonSampling, reward_means, seed).with(|c| {
            c.prior_a = Some(prior_a);
            c.prior_b = Some(prior_b);
        })
    }

    pub fn round_robin(n_venues: usize, seed: u64) -> Self {
        Self::base(StrategyKind::RoundRobin, vec![0.5; n_venues], seed)
    }

    fn base(kind: StrategyKind, reward_means: Vec<f64>, seed: u64) -> Self {
        Self {
            kind,
            epsilon: None,
            temperature: None,
            prior_a: None,
            prior_b: None,
            n_venues: reward_means.len(),
            reward_means,
            seed,
        }
    }

    fn with(mut self, f: impl FnOnce(&mut Self)) -> Self {
        f(&mut self);
        self
    }

    /// Checks the config; `pointer` is the JSON pointer of this object,
    /// used as the prefix of reported paths.
    pub fn validate_at(&self, pointer: &str) -> Result<(), SimError> {
        let field = |name: &str| format!("{pointer}/{name}");
        if self.n_venues < 2 {
            return Err(invalid(field("n_venues"), "need at least 2 venues"));
        }
        if self.reward_means.len() != self.n_venues {
            return Err(invalid(
                field("reward_means"),
                format!(
                    "has {} entries, n_venues is {}",
                    self.reward_means.len(),
                    self.n_venues
                ),
            ));
        }
        if let Some(i) = self
            .reward_means
            .iter()
            .position(|m| !(0.0..=1.0).contains(m))
        {
            return Err(invalid(
                format!("{pointer}/reward_means/{i}"),
                "reward mean must lie in [0, 1]",
            ));
        }
        let require = |value: Option<f64>, name: &str, ok: fn(f64) -> bool, rule: &str| match value
        {
            None => Err(invalid(
                field(name),
                format!("required for {:?}", self.kind),
            )),
            Some(v) if !ok(v) => Err(invalid(field(name), rule.to_string())),
            Some(_) => Ok(()),
        };
        match self.kind {
            StrategyKind::EpsilonGreedy => require(
                self.epsilon,
                "epsilon",
                |v| (0.0..=1.0).contains(&v),
                "must lie in [0, 1]",
            ),
            StrategyKind::Softmax => require(
                self.temperature,
                "temperature",
                |v| v > 0.0 && v.is_finite(),
                "must be positive",
            ),
            StrategyKind::ThompsonSampling => {
                require(
                    self.prior_a,
                    "prior_a",
                    |v| v > 0.0 && v.is_finite(),
                    "must be positive",
                )?;
                require(
                    self.prior_b,
                    "prior_b",
                    |v| v > 0.0 && v.is_finite(),
                    "must be positive",
                )
            }
            StrategyKind::RoundRobin => Ok(()),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.validate_at("")
    }
}

/// One simulated decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub venue: usize,
    /// Chosen by the exploration branch (ε-greedy only).
    pub explored: bool,
    pub reward: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCareer {
    pub scholar_id: String,
    pub timeline: Vec<PublicationRecord>,
    /// Venues sharing the highest reward mean.
    pub ground_truth_top_venues: Vec<String>,
    #[serde(skip)]
    pub steps: Vec<Step>,
}

impl SyntheticCareer {
    pub fn successes(&self) -> usize {
        self.steps.iter().filter(|s| s.reward).count()
    }

    pub fn explore_fraction(&self) -> f64 {
        self.steps.iter().filter(|s| s.explored).count() as f64 / self.steps.len().max(1) as f64
    }
}

pub fn venue_id(index: usize) -> String {
    format!("v{index:03}")
}

/// Even venue indices are journals, odd ones conferences.
pub fn venue_type(index: usize) -> VenueType {
    if index.is_multiple_of(2) {
        VenueType::Journal
    } else {
        VenueType::Conference
    }
}

/// Synthetic quartile of a journal venue index.
pub fn venue_quartile(index: usize) -> Quartile {
    Quartile::ALL[(index / 2) % 4]
}

fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

struct Bandit {
    successes: Vec<f64>,
    pulls: Vec<f64>,
}

impl Bandit {
    fn new(n: usize) -> Self {
        Self {
            successes: vec![0.0; n],
            pulls: vec![0.0; n],
        }
    }

    /// Running mean with one optimistic pseudo-observation of reward 1.
    fn estimates(&self) -> Vec<f64> {
        self.successes
            .iter()
            .zip(&self.pulls)
            .map(|(s, p)| (s + 1.0) / (p + 1.0))
            .collect()
    }

    fn choose(&self, cfg: &StrategyConfig, step: usize, rng: &mut ChaCha8Rng) -> (usize, bool) {
        let n = cfg.n_venues;
        match cfg.kind {
            StrategyKind::RoundRobin => (step % n, false),
            StrategyKind::EpsilonGreedy => {
                if rng.random::<f64>() < cfg.epsilon.unwrap_or(0.0) {
                    (rng.random_range(0..n), true)
                } else {
                    (argmax_lowest(&self.estimates()), false)
                }
            }
            StrategyKind::Softmax => {
                let t = cfg.temperature.unwrap_or(1.0);
                let est = self.estimates();
                let top = est.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let weights: Vec<f64> = est.iter().map(|e| ((e - top) / t).exp()).collect();
                let mut target = rng.random::<f64>() * weights.iter().sum::<f64>();
                for (i, w) in weights.iter().enumerate() {
                    if target < *w {
                        return (i, false);
                    }
                    target -= w;
                }
                (n - 1, false)
            }
            StrategyKind::ThompsonSampling => {
                let (a, b) = (cfg.prior_a.unwrap_or(1.0), cfg.prior_b.unwrap_or(1.0));
                let draws: Vec<f64> = (0..n)
                    .map(|i| {
                        let fails = self.pulls[i] - self.successes[i];
                        Beta::new(a + self.successes[i], b + fails)
                            .expect("positive shape")
                            .sample(rng)
                    })
                    .collect();
                (argmax_lowest(&draws), false)
            }
        }
    }

    fn update(&mut self, venue: usize, reward: bool) {
        self.pulls[venue] += 1.0;
        if reward {
            self.successes[venue] += 1.0;
        }
    }
}

fn career_year(seq: usize, n_pubs: usize) -> i32 {
    FIRST_YEAR + (seq as i64 * i64::from(CAREER_YEARS) / n_pubs.max(1) as i64) as i32
}

/// Simulates `n_pubs` venue choices under `cfg`, deterministic in `cfg.seed`.
pub fn simulate_scholar(cfg: &StrategyConfig, n_pubs: usize) -> Result<SyntheticCareer, SimError> {
    simulate_named(cfg, n_pubs, "sim")
}

fn simulate_named(
    cfg: &StrategyConfig,
    n_pubs: usize,
    scholar_id: &str,
) -> Result<SyntheticCareer, SimError> {
    cfg.validate()?;
    if n_pubs == 0 {
        return Err(invalid("/n_pubs", "need at least one publication"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut bandit = Bandit::new(cfg.n_venues);
    let mut steps = Vec::with_capacity(n_pubs);
    let mut timeline = Vec::with_capacity(n_pubs);
    for seq in 0..n_pubs {
        let (venue, explored) = bandit.choose(cfg, seq, &mut rng);
        let reward = rng.random::<f64>() < cfg.reward_means[venue];
        bandit.update(venue, reward);
        steps.push(Step {
            venue,
            explored,
            reward,
        });
        timeline.push(PublicationRecord {
            scholar_id: scholar_id.to_string(),
            venue_id: venue_id(venue),
            year: career_year(seq, n_pubs),
            seq,
            venue_type: venue_type(venue),
            informal: false,
            first_author: true,
        });
    }
    let top = cfg
        .reward_means
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let ground_truth_top_venues = (0..cfg.n_venues)
        .filter(|&i| cfg.reward_means[i] == top)
        .map(venue_id)
        .collect();
    Ok(SyntheticCareer {
        scholar_id: scholar_id.to_string(),
        timeline,
        ground_truth_top_venues,
        steps,
    })
}

/// Career length distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PubCount {
    Fixed(usize),
    Uniform { min: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Population {
    pub strategy: StrategyConfig,
    pub count: usize,
    pub n_pubs: PubCount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSpec {
    #[serde(default)]
    pub seed: u64,
    pub populations: Vec<Population>,
}

impl PopulationSpec {
    /// Parses JSON, reporting the failing location as a JSON pointer.
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: Self = serde_path_to_error::deserialize(de).map_err(|e| SimError::Json {
            pointer: json_pointer(e.path()),
            message: e.inner().to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.populations.is_empty() {
            return Err(invalid("/populations", "population list is empty"));
        }
        for (i, p) in self.populations.iter().enumerate() {
            let at = format!("/populations/{i}");
            if p.count == 0 {
                return Err(invalid(format!("{at}/count"), "count must be at least 1"));
            }
            match p.n_pubs {
                PubCount::Fixed(0) => {
                    return Err(invalid(format!("{at}/n_pubs/fixed"), "must be at least 1"))
                }
                PubCount::Uniform { min, max } if min == 0 || min > max => {
                    return Err(invalid(
                        format!("{at}/n_pubs/uniform"),
                        "need 1 <= min <= max",
                    ))
                }
                _ => {}
            }
            p.strategy.validate_at(&format!("{at}/strategy"))?;
        }
        Ok(())
    }
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } | Segment::Enum { variant: key } => {
                out.push_str(&key.replace('~', "~0").replace('/', "~1"))
            }
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the career at global position `index`: `splitmix64(seed ^ splitmix64(index))`.
pub fn career_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScholarTruth {
    pub population: usize,
    pub kind: StrategyKind,
    pub seed: u64,
    pub n_pubs: usize,
    pub top_venues: Vec<String>,
    pub explore_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub scholars: BTreeMap<String, ScholarTruth>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub ground_truth: GroundTruth,
}

pub fn scholar_id(index: usize) -> String {
    format!("syn{index:05}")
}

/// Generates every population in order; scholar `i` (global index) gets
/// seed [`career_seed`]`(spec.seed, i)`.
pub fn generate_synthetic_corpus(spec: &PopulationSpec) -> Result<SyntheticCorpus, SimError> {
    spec.validate()?;
    let mut corpus = Corpus::default();
    let mut truth = GroundTruth {
        seed: spec.seed,
        scholars: BTreeMap::new(),
    };
    let mut max_venues = 0;
    let mut index = 0;
    for (p_idx, pop) in spec.populations.iter().enumerate() {
        max_venues = max_venues.max(pop.strategy.n_venues);
        for _ in 0..pop.count {
            let seed = career_seed(spec.seed, index);
            let n_pubs = match pop.n_pubs {
                PubCount::Fixed(n) => n,
                PubCount::Uniform { min, max } => {
                    ChaCha8Rng::seed_from_u64(splitmix64(seed)).random_range(min..=max)
                }
            };
            let cfg = StrategyConfig {
                seed,
                ..pop.strategy.clone()
            };
            let id = scholar_id(index);
            let career = simulate_named(&cfg, n_pubs, &id)?;
            let successes = career.successes() as u32;
            corpus.metrics.insert(
                id.clone(),
                ScholarMetrics {
                    h_index: f64::from(successes).sqrt().floor() as u32,
                    n_publications: n_pubs as u32,
                    first_pub_year: FIRST_YEAR,
                    academic_age: CAREER_YEARS as u32,
                },
            );
            truth.scholars.insert(
                id.clone(),
                ScholarTruth {
                    population: p_idx,
                    kind: cfg.kind,
                    seed,
                    n_pubs,
                    top_venues: career.ground_truth_top_venues.clone(),
                    explore_fraction: career.explore_fraction(),
                },
            );
            corpus.scholars.insert(id, career.timeline);
            index += 1;
        }
    }
    corpus.rankings = (0..max_venues)
        .step_by(2)
        .map(|i| (venue_id(i), venue_quartile(i)))
        .collect();
    Ok(SyntheticCorpus {
        corpus,
        ground_truth: truth,
    })
}
