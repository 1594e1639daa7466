mod support;

use cpcboard_core::{read_run_log, run_search, write_run_log, SearchConfig, SearchSpace};
use support::{equivalence, gen};

#[test]
fn twenty_default_runs_match_the_log_oracle() {
    let space = SearchSpace::bundled_default();
    for seed in 1..=20 {
        let snap = run_search(&space, &SearchConfig::with_seed(seed), |_| {}).unwrap();
        let (bad, checks) = equivalence::mismatches(&snap);
        assert!(checks > 100);
        assert!(bad.is_empty(), "seed {seed}: {bad:#?}");
    }
}

#[test]
fn generated_spaces_match_the_log_oracle() {
    for seed in 0..40 {
        let snap = gen::snapshot(seed);
        let (bad, _) = equivalence::mismatches(&snap);
        assert!(bad.is_empty(), "seed {seed}: {bad:#?}");
    }
}

#[test]
fn replayed_log_answers_like_the_live_snapshot() {
    for seed in [3, 17] {
        let snap = gen::snapshot(seed);
        let replayed = read_run_log(&write_run_log(&snap)).unwrap();
        assert_eq!(replayed, snap);
        let (bad, _) = equivalence::mismatches(&replayed);
        assert!(bad.is_empty(), "{bad:#?}");
    }
}
