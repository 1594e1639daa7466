//! Seeded two-phase pipeline search.
//!
//! Phase one samples structures uniformly and evaluates them at default
//! hyperparameters. Phase two repeatedly picks one of the `top_k` best
//! structures so far and evaluates a perturbation of its best assignment.

use std::collections::HashMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::metric::Metrics;
use crate::rng::{streams, SplitMix64};
use crate::search_space::{
    sha256_hex, space_hash, ComponentSpec, Configuration, ConstraintSpec, HyperparameterKind,
    Scale, SearchSpace, Value,
};
use crate::surface::{make_surface_with, ResponseSurface, SurfaceParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub n_structure: usize,
    pub n_refine: usize,
    pub top_k: usize,
    pub step_scale: f64,
}

impl SearchConfig {
    /// 24 candidates in total.
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            n_structure: 12,
            n_refine: 12,
            top_k: 3,
            step_scale: 0.2,
        }
    }

    pub fn total(&self) -> usize {
        self.n_structure + self.n_refine
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_structure < 1 {
            return Err(ConfigError::NoStructures);
        }
        if self.top_k < 1 || self.top_k > self.n_structure {
            return Err(ConfigError::TopK {
                top_k: self.top_k,
                n_structure: self.n_structure,
            });
        }
        if !(self.step_scale > 0.0 && self.step_scale <= 1.0) {
            return Err(ConfigError::StepScale(self.step_scale));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("n_structure must be at least 1")]
    NoStructures,
    #[error("top_k must be in 1..={n_structure}, got {top_k}")]
    TopK { top_k: usize, n_structure: usize },
    #[error("step_scale must be in (0, 1], got {0}")]
    StepScale(f64),
    #[error("invalid search space: {0}")]
    Space(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Structure,
    Refinement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineCandidate {
    pub seq: u64,
    pub id: String,
    pub phase: Phase,
    pub structure: IndexMap<String, String>,
    pub assignment: IndexMap<String, IndexMap<String, Value>>,
    pub metrics: Metrics,
}

impl PipelineCandidate {
    pub fn id_for(seq: u64) -> String {
        format!("P{seq}")
    }

    pub fn configuration(&self) -> Configuration {
        Configuration {
            structure: self.structure.clone(),
            assignment: self.assignment.clone(),
        }
    }

    /// Component on the last slot.
    pub fn estimator(&self) -> &str {
        self.structure
            .last()
            .map(|(_, c)| c.as_str())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Completed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSnapshot {
    pub run_id: String,
    pub space: SearchSpace,
    pub config: SearchConfig,
    pub candidates: Vec<PipelineCandidate>,
    pub status: RunStatus,
}

impl RunSnapshot {
    pub fn candidate(&self, id: &str) -> Option<&PipelineCandidate> {
        self.candidates.iter().find(|c| c.id == id)
    }

    /// Candidates with `seq > since`.
    pub fn since(&self, since: u64) -> &[PipelineCandidate] {
        let start = self.candidates.partition_point(|c| c.seq <= since);
        &self.candidates[start..]
    }
}

/// Deterministic run identifier derived from the space and config.
pub fn run_id_for(space: &SearchSpace, config: &SearchConfig) -> String {
    let config_json = serde_json::to_string(config).expect("config serializes");
    let digest = sha256_hex(format!("{}\n{config_json}", space_hash(space)).as_bytes());
    format!("run-{}", &digest[..12])
}

/// `true` iff every constrained metric is at or below its threshold.
pub fn satisfies(candidate: &PipelineCandidate, constraints: &[ConstraintSpec]) -> bool {
    constraints
        .iter()
        .all(|c| candidate.metrics.get(c.metric) <= c.threshold)
}

/// Perturbs every hyperparameter of `component`.
///
/// Numeric values move by a uniform offset in `±step_scale × range`, in the
/// log domain for log-scale reals, and are clamped to the range. Categorical
/// and boolean values are resampled uniformly with probability `step_scale`.
pub fn perturb(
    assignment: &IndexMap<String, Value>,
    component: &ComponentSpec,
    rng: &mut SplitMix64,
    step_scale: f64,
) -> IndexMap<String, Value> {
    component
        .hyperparameters
        .iter()
        .map(|hp| {
            let current = assignment.get(&hp.name).unwrap_or(&hp.default);
            let next = match (&hp.kind, current) {
                (HyperparameterKind::Integer { min, max }, Value::Int(v)) => {
                    let range = (*max - *min) as f64;
                    let offset = rng.uniform(-step_scale, step_scale) * range;
                    let moved = libm::round(*v as f64 + offset)
                        .max(*min as f64)
                        .min(*max as f64);
                    Value::Int(moved as i64)
                }
                (HyperparameterKind::Real { min, max, scale }, Value::Real(v)) => {
                    let u = rng.uniform(-step_scale, step_scale);
                    let moved = match scale {
                        Scale::Linear => v + u * (max - min),
                        Scale::Log => {
                            let (lmin, lmax) = (libm::log(*min), libm::log(*max));
                            libm::exp(libm::log(*v) + u * (lmax - lmin))
                        }
                    };
                    Value::Real(moved.max(*min).min(*max))
                }
                (HyperparameterKind::Categorical(values), _) => {
                    if rng.chance(step_scale) {
                        Value::Text(values[rng.below(values.len() as u64) as usize].clone())
                    } else {
                        current.clone()
                    }
                }
                (HyperparameterKind::Boolean, _) => {
                    if rng.chance(step_scale) {
                        Value::Bool(rng.below(2) == 1)
                    } else {
                        current.clone()
                    }
                }
                _ => current.clone(),
            };
            (hp.name.clone(), next)
        })
        .collect()
}

struct Incumbent {
    roc_auc: f64,
    seq: u64,
    config: Configuration,
}

/// Runs the search with the default surface parameters.
pub fn run_search<F>(
    space: &SearchSpace,
    config: &SearchConfig,
    sink: F,
) -> Result<RunSnapshot, ConfigError>
where
    F: FnMut(&PipelineCandidate),
{
    run_search_with(space, config, SurfaceParams::default(), sink)
}

/// Runs the search, handing each candidate to `sink` in seq order, and
/// returns the completed snapshot. The result is a pure function of the
/// inputs.
pub fn run_search_with<F>(
    space: &SearchSpace,
    config: &SearchConfig,
    params: SurfaceParams,
    mut sink: F,
) -> Result<RunSnapshot, ConfigError>
where
    F: FnMut(&PipelineCandidate),
{
    config.validate()?;
    let violations = crate::search_space::validate_space(space);
    if let Some(v) = violations.first() {
        return Err(ConfigError::Space(v.to_string()));
    }
    let surface = make_surface_with(space, config.seed, params);
    let mut structures = SplitMix64::new(config.seed, streams::STRUCTURES);
    let mut refinement = SplitMix64::new(config.seed, streams::REFINEMENT);
    let mut candidates: Vec<PipelineCandidate> = Vec::with_capacity(config.total());
    let mut incumbents: HashMap<Vec<usize>, Incumbent> = HashMap::new();

    let mut emit = |structure: Vec<usize>,
                    configuration: Configuration,
                    phase: Phase,
                    candidates: &mut Vec<PipelineCandidate>,
                    incumbents: &mut HashMap<Vec<usize>, Incumbent>| {
        let metrics = evaluate_legal(&surface, &configuration);
        let seq = candidates.len() as u64 + 1;
        let candidate = PipelineCandidate {
            seq,
            id: PipelineCandidate::id_for(seq),
            phase,
            structure: configuration.structure.clone(),
            assignment: configuration.assignment.clone(),
            metrics,
        };
        sink(&candidate);
        candidates.push(candidate);
        let better = incumbents
            .get(&structure)
            .is_none_or(|inc| metrics.roc_auc_holdout > inc.roc_auc);
        if better {
            incumbents.insert(
                structure,
                Incumbent {
                    roc_auc: metrics.roc_auc_holdout,
                    seq,
                    config: configuration,
                },
            );
        }
    };

    for _ in 0..config.n_structure {
        let structure: Vec<usize> = space
            .slots
            .iter()
            .map(|s| structures.below(s.components.len() as u64) as usize)
            .collect();
        let names: Vec<&str> = structure
            .iter()
            .zip(&space.slots)
            .map(|(&c, s)| s.components[c].name.as_str())
            .collect();
        let configuration = crate::search_space::default_configuration(space, &names)
            .expect("sampled components exist");
        emit(
            structure,
            configuration,
            Phase::Structure,
            &mut candidates,
            &mut incumbents,
        );
    }

    for _ in 0..config.n_refine {
        let mut ranked: Vec<(&Vec<usize>, &Incumbent)> = incumbents.iter().collect();
        ranked.sort_by(|a, b| {
            b.1.roc_auc
                .total_cmp(&a.1.roc_auc)
                .then(a.1.seq.cmp(&b.1.seq))
        });
        ranked.truncate(config.top_k);
        let (structure, parent) = ranked[refinement.below(ranked.len() as u64) as usize];
        let structure = structure.clone();
        let mut configuration = parent.config.clone();
        for (slot, &c) in space.slots.iter().zip(&structure) {
            let component = &slot.components[c];
            let current = configuration
                .assignment
                .get(&slot.name)
                .cloned()
                .unwrap_or_default();
            let moved = perturb(&current, component, &mut refinement, config.step_scale);
            configuration.assignment.insert(slot.name.clone(), moved);
        }
        emit(
            structure,
            configuration,
            Phase::Refinement,
            &mut candidates,
            &mut incumbents,
        );
    }

    Ok(RunSnapshot {
        run_id: run_id_for(space, config),
        space: space.clone(),
        config: *config,
        candidates,
        status: RunStatus::Completed,
    })
}

fn evaluate_legal(surface: &ResponseSurface, configuration: &Configuration) -> Metrics {
    let resolved = surface
        .space
        .resolve(configuration)
        .expect("search only emits legal configurations");
    surface.evaluate_resolved(&resolved)
}
