//! Single-qubit protocol scenarios: exact tables from branch enumeration and
//! Monte-Carlo tables from the live protocol path.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{Adversary, AttackStrategy};
use crate::channel::{Channel, Direction};
use crate::error::{Error, Result};
use crate::protocol::{alice_decode_one, alice_prepare, bob_encode, session_rng};
use crate::quantum::{enumerate_branches, make_ghz, BellOutcome, Branch, Outcome, PlanStep};

use super::stats::{binomial_std_error, within_binomial_band};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioKind {
    Honest,
    InterceptBa,
    InterceptAb,
    Entangle,
}

impl ScenarioKind {
    fn prefix(self) -> &'static str {
        match self {
            ScenarioKind::Honest => "honest",
            ScenarioKind::InterceptBa => "intercept-ba",
            ScenarioKind::InterceptAb => "intercept-ab",
            ScenarioKind::Entangle => "entangle",
        }
    }

    pub fn attack(self) -> AttackStrategy {
        match self {
            ScenarioKind::Honest => AttackStrategy::None,
            ScenarioKind::InterceptBa => AttackStrategy::InterceptMeasure {
                direction: Direction::BobToAlice,
            },
            ScenarioKind::InterceptAb => AttackStrategy::InterceptMeasure {
                direction: Direction::AliceToBob,
            },
            ScenarioKind::Entangle => AttackStrategy::EntangleCnot,
        }
    }
}

/// One GHZ triple, a fixed Bob coin, and optionally Eve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub coin: u8,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = {
        use ScenarioKind::*;
        [
            Scenario {
                kind: Honest,
                coin: 0,
            },
            Scenario {
                kind: Honest,
                coin: 1,
            },
            Scenario {
                kind: InterceptBa,
                coin: 0,
            },
            Scenario {
                kind: InterceptBa,
                coin: 1,
            },
            Scenario {
                kind: InterceptAb,
                coin: 0,
            },
            Scenario {
                kind: InterceptAb,
                coin: 1,
            },
            Scenario {
                kind: Entangle,
                coin: 0,
            },
            Scenario {
                kind: Entangle,
                coin: 1,
            },
        ]
    };

    pub fn name(&self) -> String {
        format!("{}-coin{}", self.kind.prefix(), self.coin)
    }

    /// Gates and measurements in protocol order, plus where Alice's and
    /// Eve's outcomes land in the outcome sequence.
    fn plan(&self) -> (Vec<PlanStep>, usize, Option<usize>) {
        let encode = (self.coin == 1).then_some(PlanStep::SigmaX(3));
        let decode = [
            PlanStep::Cnot {
                control: 2,
                target: 1,
            },
            PlanStep::MeasureBell(2, 3),
        ];
        let mut steps = Vec::new();
        let (alice, eve) = match self.kind {
            ScenarioKind::Honest => {
                steps.extend(encode);
                steps.extend(decode);
                (0, None)
            }
            ScenarioKind::InterceptBa => {
                steps.extend(encode);
                steps.push(PlanStep::MeasureComputational(3));
                steps.extend(decode);
                (1, Some(0))
            }
            ScenarioKind::InterceptAb => {
                steps.push(PlanStep::MeasureComputational(3));
                steps.extend(encode);
                steps.extend(decode);
                (1, Some(0))
            }
            ScenarioKind::Entangle => {
                steps.extend(encode);
                steps.push(PlanStep::CnotAncilla { control: 3 });
                steps.extend(decode);
                steps.push(PlanStep::MeasureComputational(4));
                (0, Some(1))
            }
        };
        (steps, alice, eve)
    }

    /// Every exact branch of the scenario, post-states included.
    pub fn branches(&self) -> Result<Vec<Branch>> {
        Ok(enumerate_branches(&make_ghz(), &self.plan().0)?)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

impl From<Scenario> for String {
    fn from(s: Scenario) -> String {
        s.name()
    }
}

impl TryFrom<String> for Scenario {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Alice's Bell outcome paired with Eve's bit (absent without Eve).
pub type CellKey = (BellOutcome, Option<u8>);

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleTable {
    pub scenario: Scenario,
    pub cells: BTreeMap<String, f64>,
    #[serde(skip)]
    pub exact: BTreeMap<CellKey, f64>,
}

impl OracleTable {
    pub fn probability(&self, key: CellKey) -> f64 {
        self.exact.get(&key).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.exact.values().sum()
    }

    /// Probability that Alice's outcome is a minus-type Bell state.
    pub fn detection_probability(&self) -> f64 {
        self.exact
            .iter()
            .filter(|((b, _), _)| b.is_minus())
            .map(|(_, p)| p)
            .sum()
    }

    /// Marginal distribution of Eve's bit, if she has one.
    pub fn eve_marginal(&self) -> Option<[f64; 2]> {
        let mut marginal = [0.0; 2];
        let mut any = false;
        for ((_, eve), p) in &self.exact {
            if let Some(bit) = eve {
                marginal[*bit as usize] += p;
                any = true;
            }
        }
        any.then_some(marginal)
    }
}

impl fmt::Display for OracleTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario {}", self.scenario)?;
        writeln!(f, "{:<8} {:<4} {:>12}", "alice", "eve", "probability")?;
        for ((bell, eve), p) in &self.exact {
            let eve = eve.map_or_else(|| "-".to_string(), |b| b.to_string());
            writeln!(f, "{:<8} {:<4} {:>12.10}", bell.label(), eve, p)?;
        }
        write!(f, "total {:.12}", self.total())
    }
}

pub fn cell_label((bell, eve): CellKey) -> String {
    match eve {
        Some(bit) => format!("{}/eve{}", bell.label(), bit),
        None => bell.label().to_string(),
    }
}

/// Exact distribution over (Alice outcome, Eve bit) for a named scenario.
pub fn run_oracle_check(name: &str) -> Result<OracleTable> {
    oracle_table(name.parse()?)
}

pub fn oracle_table(scenario: Scenario) -> Result<OracleTable> {
    let (steps, alice_at, eve_at) = scenario.plan();
    let mut exact = BTreeMap::new();
    for branch in enumerate_branches(&make_ghz(), &steps)? {
        let Outcome::Bell(bell) = branch.outcomes[alice_at] else {
            unreachable!("Alice's step is a Bell measurement");
        };
        let eve = eve_at.map(|i| match branch.outcomes[i] {
            Outcome::Bit(b) => b,
            Outcome::Bell(_) => unreachable!("Eve measures in the computational basis"),
        });
        *exact.entry((bell, eve)).or_insert(0.0) += branch.probability;
    }
    let cells = exact.iter().map(|(k, p)| (cell_label(*k), *p)).collect();
    Ok(OracleTable {
        scenario,
        cells,
        exact,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalTable {
    pub scenario: Scenario,
    pub samples: u64,
    pub counts: BTreeMap<CellKey, u64>,
}

impl EmpiricalTable {
    pub fn frequency(&self, key: CellKey) -> f64 {
        self.counts.get(&key).copied().unwrap_or(0) as f64 / self.samples as f64
    }
}

/// Runs the scenario `samples` times through the real channel, adversary and decode code.
pub fn simulate_scenario(scenario: Scenario, samples: u64, seed: u64) -> Result<EmpiricalTable> {
    let attack = scenario.kind.attack();
    let mut rng = session_rng(seed, 0);
    let mut counts = BTreeMap::new();
    for round in 0..samples {
        let mut channel = Channel::new();
        let round = round as u32;
        let mut systems = alice_prepare(1);
        let mut eve = channel.send(
            &mut systems,
            Direction::AliceToBob,
            round,
            &attack,
            &mut rng,
        )?;
        let (_, mut systems) = bob_encode(systems, &[scenario.coin])?;
        eve.extend(channel.send(
            &mut systems,
            Direction::BobToAlice,
            round,
            &attack,
            &mut rng,
        )?);
        let (result, post) = alice_decode_one(&systems[0].state, rng.random())?;
        let mut eve_bit = eve.first().and_then(|r| r.bit);
        if !eve.is_empty() && eve_bit.is_none() {
            eve_bit = attack.readout(&post, &mut rng)?;
        }
        *counts.entry((result.bell(), eve_bit)).or_insert(0) += 1;
    }
    Ok(EmpiricalTable {
        scenario,
        samples,
        counts,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellCheck {
    pub cell: String,
    pub exact: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub passed: bool,
}

/// Cell-by-cell 3σ comparison; cells present on either side are checked.
pub fn compare_tables(oracle: &OracleTable, empirical: &EmpiricalTable) -> Vec<CellCheck> {
    let mut keys: Vec<CellKey> = oracle.exact.keys().copied().collect();
    keys.extend(
        empirical
            .counts
            .keys()
            .filter(|k| !oracle.exact.contains_key(k)),
    );
    keys.sort();
    keys.into_iter()
        .map(|key| {
            let exact = oracle.probability(key);
            let observed = empirical.frequency(key);
            CellCheck {
                cell: cell_label(key),
                exact,
                empirical: observed,
                std_error: binomial_std_error(exact, empirical.samples),
                passed: within_binomial_band(observed, exact, empirical.samples, 3.0),
            }
        })
        .collect()
}
