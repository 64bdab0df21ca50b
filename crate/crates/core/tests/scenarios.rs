mod support;

use support::criteria;

fn check(outcome: criteria::Outcome) {
    if let Err(e) = outcome {
        panic!("{e}");
    }
}

#[test]
fn commit_and_reveal_runs() {
    check(criteria::commit_and_reveal());
}

#[test]
fn time_incentivization_boundary() {
    check(criteria::time_incentivization());
}

#[test]
fn rate_limitation_with_agent() {
    check(criteria::rate_limitation());
}

#[test]
fn circuit_breaker_paths() {
    check(criteria::circuit_breaker());
}

#[test]
fn casino_scenarios() {
    check(criteria::casino());
}

#[test]
fn engine_agrees_with_naive_evaluator() {
    check(criteria::oracle_agreement(300, 7));
}

#[test]
fn random_graphs_round_trip() {
    check(criteria::round_trips(300, 11));
}

#[test]
fn parser_survives_fuzzing() {
    check(criteria::parser_fuzz(2_000, 13));
}

#[test]
fn replay_is_deterministic() {
    check(criteria::determinism());
}
