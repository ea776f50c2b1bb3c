use ghz_qkd::adversary::AttackStrategy;
use ghz_qkd::channel::Direction;
use ghz_qkd::harness::{
    failure_independence, oracle_table, run_experiment, run_rounds, run_sessions, ExperimentConfig,
    Scenario, ScenarioKind,
};

#[test]
fn failures_at_different_positions_are_independent() {
    for attack in [
        AttackStrategy::InterceptMeasure {
            direction: Direction::BobToAlice,
        },
        AttackStrategy::EntangleCnot,
    ] {
        let test = failure_independence(attack, 100_000, 17).unwrap();
        assert!(test.independent, "{attack}: {test:?}");
        let total: u64 = test.table.iter().flatten().sum();
        assert_eq!(total, 100_000);
    }
}

#[test]
fn honest_channel_never_fails() {
    let cfg = ExperimentConfig {
        n: 24,
        sessions: 2_000,
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.detection.count, 0);
    assert_eq!(report.sessions_established, 2_000);
    assert_eq!(report.key_agreement.rate, Some(1.0));
    assert_eq!(report.rounds, 2_000);
}

#[test]
fn session_gives_up_at_the_compound_rate() {
    // Per round, a 3-qubit key survives with probability 1/8.
    let cfg = ExperimentConfig {
        n: 3,
        sessions: 50_000,
        attack: AttackStrategy::EntangleCnot,
        seed: 3,
        ..ExperimentConfig::default()
    };
    let tally = run_sessions(&cfg).unwrap();
    let p = (7.0f64 / 8.0).powi(10);
    let observed = tally.terminated as f64 / tally.sessions as f64;
    let sigma = (p * (1.0 - p) / tally.sessions as f64).sqrt();
    assert!(
        (observed - p).abs() <= 3.0 * sigma,
        "observed {observed}, expected {p}"
    );
    assert_eq!(tally.established + tally.terminated, tally.sessions);
    assert_eq!(tally.verdict_matches, tally.sessions);
}

#[test]
fn intercept_on_the_outbound_leg_matches_its_oracle() {
    let cfg = ExperimentConfig {
        n: 1,
        attack: AttackStrategy::InterceptMeasure {
            direction: Direction::AliceToBob,
        },
        seed: 9,
        ..ExperimentConfig::default()
    };
    let tally = run_rounds(&cfg, 100_000).unwrap();
    let exact: f64 = (0..2u8)
        .map(|coin| {
            0.5 * oracle_table(Scenario {
                kind: ScenarioKind::InterceptAb,
                coin,
            })
            .unwrap()
            .detection_probability()
        })
        .sum();
    let observed = tally.failed_qubits as f64 / tally.decoded_qubits as f64;
    let sigma = (exact * (1.0 - exact) / tally.decoded_qubits as f64).sqrt();
    assert!(
        (observed - exact).abs() <= 3.0 * sigma,
        "observed {observed}, exact {exact}"
    );
}

#[test]
fn partial_attack_scales_detection() {
    let cfg = ExperimentConfig {
        n: 1,
        attack: AttackStrategy::EntangleCnot,
        attack_probability: 0.4,
        seed: 11,
        ..ExperimentConfig::default()
    };
    let tally = run_rounds(&cfg, 100_000).unwrap();
    let p = cfg.analytic_detection();
    assert!((p - 0.2).abs() < 1e-15);
    let observed = tally.failed_qubits as f64 / tally.decoded_qubits as f64;
    let sigma = (p * (1.0 - p) / tally.decoded_qubits as f64).sqrt();
    assert!(
        (observed - p).abs() <= 3.0 * sigma,
        "observed {observed}, expected {p}"
    );
}
