//! Deterministic synthetic response surface standing in for model training.
//!
//! Every parameter is drawn from the `SURFACE` stream of the run seed, so a
//! surface is a pure function of `(space, seed, params)` and evaluation is a
//! pure function of the configuration. Only `+ - * /` and `libm` are used so
//! results are bit-identical across platforms.

use crate::metric::Metrics;
use crate::rng::{mix64, streams, SplitMix64};
use crate::search_space::{
    count_structures, Configuration, HyperparameterKind, IllegalConfiguration, ResolvedStep, Role,
    SearchSpace, Value,
};

/// Lowest reachable prediction time in seconds.
pub const MIN_PREDICTION_TIME: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceParams {
    /// Upper bound of the prediction time metric, in seconds.
    pub max_prediction_time: f64,
}

impl Default for SurfaceParams {
    fn default() -> Self {
        Self {
            max_prediction_time: 10.0,
        }
    }
}

/// Hidden effect of one hyperparameter.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperparameterEffect {
    /// Location of the AUC optimum in unit coordinates (numeric kinds).
    pub optimum: f64,
    /// Height `w` of the quadratic bump `w * (1 - (x - optimum)^2)`.
    pub auc_weight: f64,
    /// AUC offset per category, each in `[0, auc_weight]` (categorical kinds).
    pub category_offsets: Vec<f64>,
    pub disparity_slope: f64,
    pub time_slope: f64,
    pub optimism_slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentEffect {
    pub auc: f64,
    pub disparity: f64,
    /// Multiplicative latency factor (estimators: base latency in seconds).
    pub time: f64,
    pub optimism: f64,
    pub hyperparameters: Vec<HyperparameterEffect>,
}

/// Base scores of one structure before hyperparameter contributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureBase {
    pub roc_auc: f64,
    pub group_disparity: f64,
    pub prediction_time: f64,
    pub optimism: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseSurface {
    pub space: SearchSpace,
    pub seed: u64,
    pub params: SurfaceParams,
    /// `[slot][component]`.
    pub components: Vec<Vec<ComponentEffect>>,
    /// AUC interaction between adjacent slots: `[slot pair][left][right]`.
    pub interactions: Vec<Vec<Vec<f64>>>,
    pub noise_seed: u64,
}

const AUC_FLOOR: f64 = 0.60;
const JITTER: f64 = 0.01;

pub fn make_surface(space: &SearchSpace, seed: u64) -> ResponseSurface {
    make_surface_with(space, seed, SurfaceParams::default())
}

pub fn make_surface_with(space: &SearchSpace, seed: u64, params: SurfaceParams) -> ResponseSurface {
    let mut rng = SplitMix64::new(seed, streams::SURFACE);
    let components = space
        .slots
        .iter()
        .map(|slot| {
            slot.components
                .iter()
                .map(|comp| {
                    let estimator = comp.role == Role::Estimator;
                    let auc = if estimator {
                        rng.uniform(0.0, 0.12)
                    } else {
                        rng.uniform(0.0, 0.05)
                    };
                    let disparity = if estimator {
                        rng.uniform(0.0, 0.25)
                    } else {
                        rng.uniform(0.0, 0.08)
                    };
                    let time = if estimator {
                        // log-uniform in [0.01, 1] seconds
                        libm::pow(10.0, rng.uniform(-2.0, 0.0))
                    } else {
                        rng.uniform(1.0, 2.0)
                    };
                    let optimism = rng.uniform(0.0, 0.015);
                    let budget = rng.uniform(0.02, 0.06);
                    let n = comp.hyperparameters.len().max(1) as f64;
                    let hyperparameters = comp
                        .hyperparameters
                        .iter()
                        .map(|hp| {
                            let auc_weight = budget / n * rng.uniform(0.5, 1.5);
                            let optimum = rng.next_f64();
                            let category_offsets = match hp.kind.categories() {
                                Some(cats) => {
                                    cats.iter().map(|_| auc_weight * rng.next_f64()).collect()
                                }
                                None => Vec::new(),
                            };
                            HyperparameterEffect {
                                optimum,
                                auc_weight,
                                category_offsets,
                                disparity_slope: rng.uniform(-0.03, 0.03),
                                time_slope: rng.uniform(0.0, 0.5),
                                optimism_slope: rng.uniform(0.0, 0.01),
                            }
                        })
                        .collect();
                    ComponentEffect {
                        auc,
                        disparity,
                        time,
                        optimism,
                        hyperparameters,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>();
    let interactions = space
        .slots
        .windows(2)
        .map(|pair| {
            (0..pair[0].components.len())
                .map(|_| {
                    (0..pair[1].components.len())
                        .map(|_| rng.uniform(-0.02, 0.02))
                        .collect()
                })
                .collect()
        })
        .collect();
    let noise_seed = rng.next_u64();
    ResponseSurface {
        space: space.clone(),
        seed,
        params,
        components,
        interactions,
        noise_seed,
    }
}

fn clamp(x: f64, lo: f64, hi: f64) -> f64 {
    x.max(lo).min(hi)
}

impl ResponseSurface {
    pub fn structure_count(&self) -> u64 {
        count_structures(&self.space)
    }

    /// Every structure as component indices per slot, in odometer order with
    /// the last slot varying fastest. Intended for small spaces.
    pub fn structures(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for slot in &self.space.slots {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..slot.components.len()).map(move |c| {
                        let mut p = prefix.clone();
                        p.push(c);
                        p
                    })
                })
                .collect();
        }
        out
    }

    fn jitter(&self, structure: &[usize]) -> f64 {
        let key = structure.iter().fold(0u64, |acc, &c| {
            mix64(acc ^ (c as u64).wrapping_add(0x51_7CC1_B727_220A))
        });
        let u = (mix64(self.noise_seed ^ key) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        JITTER * (2.0 * u - 1.0)
    }

    /// Base scores of a structure given as component indices per slot.
    pub fn structure_base(&self, structure: &[usize]) -> StructureBase {
        let mut roc_auc = AUC_FLOOR + self.jitter(structure);
        let mut group_disparity = 0.02;
        let mut estimator_time = 0.05;
        let mut time_factor = 1.0;
        let mut optimism = 0.0;
        for (slot, &c) in structure.iter().enumerate() {
            let e = &self.components[slot][c];
            roc_auc += e.auc;
            group_disparity += e.disparity;
            optimism += e.optimism;
            if self.space.slots[slot].role == Role::Estimator {
                estimator_time = e.time;
            } else {
                time_factor *= e.time;
            }
        }
        for (pair, window) in self.interactions.iter().zip(structure.windows(2)) {
            roc_auc += pair[window[0]][window[1]];
        }
        StructureBase {
            roc_auc,
            group_disparity,
            prediction_time: estimator_time * time_factor,
            optimism,
        }
    }

    pub fn evaluate(&self, config: &Configuration) -> Result<Metrics, IllegalConfiguration> {
        let resolved = self.space.resolve(config)?;
        Ok(self.evaluate_resolved(&resolved))
    }

    pub(crate) fn evaluate_resolved(&self, resolved: &[ResolvedStep<'_>]) -> Metrics {
        let structure: Vec<usize> = resolved.iter().map(|r| r.component_index).collect();
        let base = self.structure_base(&structure);
        let mut auc = base.roc_auc;
        let mut disparity = base.group_disparity;
        let mut time_scale = 1.0;
        let mut optimism = base.optimism;
        for (slot, step) in resolved.iter().enumerate() {
            let effects = &self.components[slot][step.component_index].hyperparameters;
            for ((hp, value), effect) in step
                .component
                .hyperparameters
                .iter()
                .zip(&step.values)
                .zip(effects)
            {
                let position = unit_position(&hp.kind, value);
                auc += match hp.kind.category_index(value) {
                    Some(i) => effect.category_offsets[i],
                    None => {
                        let d = position - effect.optimum;
                        effect.auc_weight * (1.0 - d * d)
                    }
                };
                disparity += effect.disparity_slope * position;
                time_scale += effect.time_slope * position;
                optimism += effect.optimism_slope * position;
            }
        }
        let roc_auc_holdout = clamp(auc, 0.5, 1.0);
        let roc_auc_train = clamp(roc_auc_holdout + optimism, roc_auc_holdout, 1.0);
        Metrics {
            group_disparity: clamp(disparity, 0.0, 1.0),
            prediction_time: clamp(
                base.prediction_time * time_scale,
                MIN_PREDICTION_TIME,
                self.params.max_prediction_time,
            ),
            roc_auc_train,
            roc_auc_holdout,
        }
    }
}

/// Unit-interval position of any hyperparameter value: numeric values by
/// their (possibly log) range, categories by `index / (k - 1)`.
fn unit_position(kind: &HyperparameterKind, value: &Value) -> f64 {
    if let Some(p) = kind.unit_position(value) {
        return p;
    }
    match (kind.category_index(value), kind.categories()) {
        (Some(i), Some(cats)) if cats.len() > 1 => i as f64 / (cats.len() - 1) as f64,
        _ => 0.0,
    }
}
