//! Exact invariants of the protocol, checked against branch enumeration,
//! plus an optional Monte-Carlo pass over every scenario.

use serde::Serialize;

use crate::error::Result;
use crate::quantum::{make_ghz, reduced_density, BellOutcome, DensityMatrix2, TOLERANCE};

use super::scenario::{compare_tables, oracle_table, simulate_scenario, Scenario, ScenarioKind};
use super::stats::mutual_information_of;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOLERANCE
}

const ATTACKS: [ScenarioKind; 3] = [
    ScenarioKind::InterceptBa,
    ScenarioKind::InterceptAb,
    ScenarioKind::Entangle,
];

/// Runs every exact check; when `samples > 0` also compares each scenario's
/// Monte-Carlo table with its oracle at 3σ.
pub fn selftest(samples: u64, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    for scenario in Scenario::ALL {
        let table = oracle_table(scenario)?;
        checks.push(Check::new(
            format!("{scenario}: probabilities sum to 1"),
            close(table.total(), 1.0),
            format!("total {:.15}", table.total()),
        ));

        let qubit1_clear = scenario.branches()?.iter().all(|b| {
            let mask = 1usize << (b.state.n_qubits() - 1);
            b.state
                .amplitudes()
                .iter()
                .enumerate()
                .all(|(i, a)| i & mask == 0 || a.norm() <= TOLERANCE)
        });
        checks.push(Check::new(
            format!("{scenario}: qubit 1 is |0> after Alice's CNOT"),
            qubit1_clear,
            "",
        ));

        if scenario.kind == ScenarioKind::Honest {
            let expected = if scenario.coin == 0 {
                BellOutcome::PhiPlus
            } else {
                BellOutcome::PsiPlus
            };
            let p = table.probability((expected, None));
            checks.push(Check::new(
                format!(
                    "{scenario}: decodes to bit {} with certainty",
                    scenario.coin
                ),
                close(p, 1.0) && table.exact.len() == 1,
                format!("P({expected}) = {p}"),
            ));
        } else {
            let detected = table.detection_probability();
            checks.push(Check::new(
                format!("{scenario}: detection probability is 1/2"),
                close(detected, 0.5),
                format!("P(minus) = {detected}"),
            ));
            let (plus, minus) = if scenario.coin == 0 {
                (BellOutcome::PhiPlus, BellOutcome::PhiMinus)
            } else {
                (BellOutcome::PsiPlus, BellOutcome::PsiMinus)
            };
            let marginal = |bell: BellOutcome| -> f64 {
                table
                    .exact
                    .iter()
                    .filter(|((b, _), _)| *b == bell)
                    .map(|(_, p)| p)
                    .sum()
            };
            checks.push(Check::new(
                format!("{scenario}: {plus} and {minus} each carry 1/2"),
                close(marginal(plus), 0.5) && close(marginal(minus), 0.5),
                format!("{plus} {}, {minus} {}", marginal(plus), marginal(minus)),
            ));
        }
    }

    for kind in ATTACKS {
        // Joint law of (Bob's coin, Eve's bit) with a fair coin.
        let mut joint = [[0.0; 2]; 2];
        for coin in 0..2u8 {
            let table = oracle_table(Scenario { kind, coin })?;
            let marginal = table.eve_marginal().unwrap_or([0.0; 2]);
            for eve in 0..2 {
                joint[coin as usize][eve] = 0.5 * marginal[eve];
            }
        }
        let mi = mutual_information_of(&joint);
        let accuracy = joint[0][0] + joint[1][1];
        let name = kind.attack().name();
        checks.push(Check::new(
            format!("{name}: Eve learns nothing about Bob's bit"),
            mi.abs() <= TOLERANCE && close(accuracy, 0.5),
            format!("mutual information {mi:e} bits, guess accuracy {accuracy}"),
        ));
    }

    let ghz = reduced_density(&make_ghz(), 3)?;
    let encoded = reduced_density(&make_ghz().apply_sigma_x(3)?, 3)?;
    let mixed = DensityMatrix2::maximally_mixed();
    checks.push(Check::new(
        "travelling qubit is maximally mixed for both key bits",
        ghz.distance(&encoded) <= TOLERANCE && ghz.distance(&mixed) <= TOLERANCE && ghz.is_valid(),
        format!("|rho0 - rho1| = {:e}", ghz.distance(&encoded)),
    ));

    if samples > 0 {
        for (i, scenario) in Scenario::ALL.into_iter().enumerate() {
            let oracle = oracle_table(scenario)?;
            let empirical = simulate_scenario(scenario, samples, seed.wrapping_add(i as u64))?;
            let cells = compare_tables(&oracle, &empirical);
            let worst = cells
                .iter()
                .filter(|c| !c.passed)
                .map(|c| format!("{} {} vs {}", c.cell, c.empirical, c.exact))
                .collect::<Vec<_>>()
                .join("; ");
            checks.push(Check::new(
                format!("{scenario}: Monte-Carlo within 3 sigma at {samples} samples"),
                cells.iter().all(|c| c.passed),
                worst,
            ));
        }
    }

    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_checks_pass() {
        let checks = selftest(0, 0).unwrap();
        assert!(checks.len() > 8 * 3 + 3);
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
    }
}
