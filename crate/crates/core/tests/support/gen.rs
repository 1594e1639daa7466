//! Random but valid search spaces and snapshots.

use cpcboard_core::rng::SplitMix64;
use cpcboard_core::search_space::{
    ComponentSpec, ConstraintSpec, HyperparameterKind, HyperparameterSpec, Role, Scale,
    SearchSpace, StepSlot, Value,
};
use cpcboard_core::{run_search, validate_space, Metric, RunSnapshot, SearchConfig};

fn hyperparameter(rng: &mut SplitMix64, name: String) -> HyperparameterSpec {
    let (kind, default) = match rng.below(5) {
        0 => {
            let k = 2 + rng.below(3) as usize;
            let cats: Vec<String> = (0..k).map(|i| format!("c{i}")).collect();
            let d = cats[rng.below(k as u64) as usize].clone();
            (HyperparameterKind::Categorical(cats), Value::Text(d))
        }
        1 => (HyperparameterKind::Boolean, Value::Bool(rng.chance(0.5))),
        2 => {
            let min = rng.below(10) as i64 - 5;
            let max = min + 1 + rng.below(40) as i64;
            let d = min + rng.below((max - min + 1) as u64) as i64;
            (HyperparameterKind::Integer { min, max }, Value::Int(d))
        }
        3 => {
            let min = rng.uniform(-2.0, 1.0);
            let max = min + rng.uniform(0.1, 5.0);
            let d = rng.uniform(min, max);
            let kind = HyperparameterKind::Real {
                min,
                max,
                scale: Scale::Linear,
            };
            (kind, Value::Real(d))
        }
        _ => {
            let min = 10f64.powf(rng.uniform(-9.0, -1.0));
            let max = min * 10f64.powf(rng.uniform(0.5, 6.0));
            let kind = HyperparameterKind::Real {
                min,
                max,
                scale: Scale::Log,
            };
            (kind, Value::Real(min))
        }
    };
    HyperparameterSpec {
        name,
        kind,
        default,
    }
}

fn component(rng: &mut SplitMix64, name: String, role: Role) -> ComponentSpec {
    let n = rng.below(5) as usize;
    ComponentSpec {
        name,
        role,
        hyperparameters: (0..n)
            .map(|i| hyperparameter(rng, format!("h{i}")))
            .collect(),
    }
}

/// A valid space with 0 to 2 transformer slots sharing one component pool,
/// a final estimator slot and a random subset of constraints.
pub fn space(seed: u64) -> SearchSpace {
    let mut rng = SplitMix64::from_state(seed);
    let pool: Vec<ComponentSpec> = (0..1 + rng.below(4))
        .map(|i| component(&mut rng, format!("T{i}"), Role::Transformer))
        .collect();
    let mut slots = Vec::new();
    for s in 0..rng.below(3) {
        let mut chosen: Vec<ComponentSpec> =
            pool.iter().filter(|_| rng.chance(0.7)).cloned().collect();
        if chosen.is_empty() {
            chosen.push(pool[0].clone());
        }
        slots.push(StepSlot {
            name: format!("Transformer {}", s + 1),
            role: Role::Transformer,
            components: chosen,
        });
    }
    slots.push(StepSlot {
        name: "Estimator".into(),
        role: Role::Estimator,
        components: (0..1 + rng.below(4))
            .map(|i| component(&mut rng, format!("E{i}"), Role::Estimator))
            .collect(),
    });
    let mut constraints = Vec::new();
    if rng.chance(0.5) {
        constraints.push(ConstraintSpec {
            metric: Metric::GroupDisparity,
            threshold: rng.uniform(0.01, 0.5),
        });
    }
    if rng.chance(0.5) {
        constraints.push(ConstraintSpec {
            metric: Metric::PredictionTime,
            threshold: rng.uniform(0.01, 2.0),
        });
    }
    let space = SearchSpace { slots, constraints };
    assert!(
        validate_space(&space).is_empty(),
        "{:?}",
        validate_space(&space)
    );
    space
}

pub fn config(seed: u64) -> SearchConfig {
    let mut rng = SplitMix64::from_state(seed ^ 0xC0FF_EE00);
    let n_structure = 1 + rng.below(16) as usize;
    SearchConfig {
        seed,
        n_structure,
        n_refine: rng.below(16) as usize,
        top_k: 1 + rng.below(n_structure as u64) as usize,
        step_scale: rng.uniform(0.05, 1.0),
    }
}

/// Completed run over a random space and config.
pub fn snapshot(seed: u64) -> RunSnapshot {
    run_search(&space(seed), &config(seed), |_| {}).expect("generated inputs are valid")
}

/// Like [`snapshot`], with holdout AUC rounded to multiples of 0.05 so that
/// leaderboard ties are common.
pub fn tied_snapshot(seed: u64) -> RunSnapshot {
    let mut snap = snapshot(seed);
    for c in &mut snap.candidates {
        let m = &mut c.metrics;
        m.roc_auc_holdout = (m.roc_auc_holdout * 20.0).round() / 20.0;
        m.roc_auc_train = m.roc_auc_train.max(m.roc_auc_holdout);
    }
    snap
}
