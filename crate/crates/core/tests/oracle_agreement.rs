//! Sampled measurement sequences versus exact branch enumeration.

use std::collections::BTreeMap;

use ghz_qkd::harness::{
    compare_tables, oracle_table, simulate_scenario, within_binomial_band, Scenario,
};
use ghz_qkd::quantum::{
    branch_distribution, make_ghz, measure_bell, measure_computational, Amplitude, Outcome,
    PlanStep, StateVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TRIALS: u64 = 100_000;

fn sample_plan(state: &StateVector, plan: &[PlanStep], rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    let mut s = state.clone();
    let mut outcomes = Vec::new();
    for step in plan {
        s = match *step {
            PlanStep::SigmaX(q) => s.apply_sigma_x(q).unwrap(),
            PlanStep::SigmaZ(q) => s.apply_sigma_z(q).unwrap(),
            PlanStep::Cnot { control, target } => s.apply_cnot(control, target).unwrap(),
            PlanStep::CnotAncilla { control } => s.apply_cnot_ancilla(control).unwrap(),
            PlanStep::MeasureComputational(q) => {
                let r = measure_computational(&s, q, rng.random()).unwrap();
                outcomes.push(r.outcome);
                r.post_state
            }
            PlanStep::MeasureBell(a, b) => {
                let r = measure_bell(&s, a, b, rng.random()).unwrap();
                outcomes.push(r.outcome);
                r.post_state
            }
        };
    }
    outcomes
}

fn check_plan(state: &StateVector, plan: &[PlanStep], seed: u64) {
    let exact = branch_distribution(state, plan).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<Vec<Outcome>, u64> = BTreeMap::new();
    for _ in 0..TRIALS {
        *counts
            .entry(sample_plan(state, plan, &mut rng))
            .or_default() += 1;
    }
    for key in counts.keys() {
        assert!(
            exact.contains_key(key),
            "sampled an impossible branch {key:?}"
        );
    }
    for (key, &p) in &exact {
        let observed = counts.get(key).copied().unwrap_or(0) as f64 / TRIALS as f64;
        assert!(
            within_binomial_band(observed, p, TRIALS, 3.0),
            "{plan:?}: branch {key:?} observed {observed}, exact {p}"
        );
    }
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amps = (0..1 << n)
        .map(|_| Amplitude::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    StateVector::normalized(amps).unwrap()
}

#[test]
fn protocol_plans_match_enumeration() {
    let ghz = make_ghz();
    let decode = [
        PlanStep::Cnot {
            control: 2,
            target: 1,
        },
        PlanStep::MeasureBell(2, 3),
    ];
    check_plan(&ghz, &decode, 1);
    let encoded = ghz.apply_sigma_x(3).unwrap();
    check_plan(&encoded, &decode, 2);
    let intercepted = [
        PlanStep::MeasureComputational(3),
        PlanStep::Cnot {
            control: 2,
            target: 1,
        },
        PlanStep::MeasureBell(2, 3),
    ];
    check_plan(&ghz, &intercepted, 3);
    let entangled = [
        PlanStep::CnotAncilla { control: 3 },
        PlanStep::SigmaX(3),
        PlanStep::Cnot {
            control: 2,
            target: 1,
        },
        PlanStep::MeasureBell(2, 3),
        PlanStep::MeasureComputational(4),
    ];
    check_plan(&ghz, &entangled, 4);
}

#[test]
fn random_states_and_plans_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..4u64 {
        let n = rng.random_range(2..=4);
        let state = random_state(n, &mut rng);
        let a = rng.random_range(1..=n);
        let b = loop {
            let b = rng.random_range(1..=n);
            if b != a {
                break b;
            }
        };
        let other = (1..=n).find(|q| *q != a && *q != b);
        let mut plan = vec![
            PlanStep::Cnot {
                control: b,
                target: a,
            },
            PlanStep::MeasureBell(a, b),
        ];
        if let Some(q) = other {
            plan.push(PlanStep::MeasureComputational(q));
        }
        check_plan(&state, &plan, 100 + case);
    }
}

#[test]
fn every_scenario_matches_its_oracle() {
    for (i, scenario) in Scenario::ALL.into_iter().enumerate() {
        let oracle = oracle_table(scenario).unwrap();
        let empirical = simulate_scenario(scenario, TRIALS, 1_000 + i as u64).unwrap();
        for cell in compare_tables(&oracle, &empirical) {
            assert!(cell.passed, "{scenario}: {cell:?}");
        }
    }
}
