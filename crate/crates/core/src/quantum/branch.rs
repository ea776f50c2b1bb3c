//! Exact enumeration of measurement branches.
//!
//! Every projective step splits the current set of branches by outcome, so
//! after a plan runs each surviving branch carries its full outcome history,
//! its exact probability, and its normalized post-state. This is the ground
//! truth the Monte-Carlo statistics are checked against.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::measure::{project_bell, project_computational, Outcome};
use super::state::StateVector;
use super::QuantumError;

/// Branches whose weight falls below this are treated as impossible.
const NULL_BRANCH: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlanStep {
    SigmaX(usize),
    SigmaZ(usize),
    Cnot { control: usize, target: usize },
    CnotAncilla { control: usize },
    MeasureComputational(usize),
    MeasureBell(usize, usize),
}

impl PlanStep {
    fn is_measurement(self) -> bool {
        matches!(
            self,
            PlanStep::MeasureComputational(_) | PlanStep::MeasureBell(..)
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub outcomes: Vec<Outcome>,
    pub probability: f64,
    pub state: StateVector,
}

/// Runs `plan` on `s`, keeping every branch with nonzero weight.
pub fn enumerate_branches(s: &StateVector, plan: &[PlanStep]) -> Result<Vec<Branch>, QuantumError> {
    if !plan.iter().any(|step| step.is_measurement()) {
        return Err(QuantumError::InvalidPlan(
            "plan contains no measurement".into(),
        ));
    }
    let mut branches = vec![Branch {
        outcomes: Vec::new(),
        probability: 1.0,
        state: s.clone(),
    }];
    for (i, step) in plan.iter().enumerate() {
        let mut next = Vec::with_capacity(branches.len() * 2);
        for branch in branches {
            let invalid =
                |e: QuantumError| QuantumError::InvalidPlan(format!("step {}: {e}", i + 1));
            match *step {
                PlanStep::SigmaX(q) => next.push(Branch {
                    state: branch.state.apply_sigma_x(q).map_err(invalid)?,
                    ..branch
                }),
                PlanStep::SigmaZ(q) => next.push(Branch {
                    state: branch.state.apply_sigma_z(q).map_err(invalid)?,
                    ..branch
                }),
                PlanStep::Cnot { control, target } => next.push(Branch {
                    state: branch.state.apply_cnot(control, target).map_err(invalid)?,
                    ..branch
                }),
                PlanStep::CnotAncilla { control } => next.push(Branch {
                    state: branch.state.apply_cnot_ancilla(control).map_err(invalid)?,
                    ..branch
                }),
                PlanStep::MeasureComputational(_) | PlanStep::MeasureBell(..) => {
                    let projections = match *step {
                        PlanStep::MeasureComputational(q) => {
                            project_computational(&branch.state, q)
                        }
                        PlanStep::MeasureBell(a, b) => project_bell(&branch.state, a, b),
                        _ => unreachable!(),
                    }
                    .map_err(invalid)?;
                    let n_qubits = branch.state.n_qubits();
                    for p in projections
                        .into_iter()
                        .filter(|p| p.probability > NULL_BRANCH)
                    {
                        let record = p.collapse(n_qubits);
                        let mut outcomes = branch.outcomes.clone();
                        outcomes.push(record.outcome);
                        next.push(Branch {
                            outcomes,
                            probability: branch.probability * record.probability,
                            state: record.post_state,
                        });
                    }
                }
            }
        }
        branches = next;
    }
    Ok(branches)
}

/// Exact probability of every outcome sequence produced by `plan`.
pub fn branch_distribution(
    s: &StateVector,
    plan: &[PlanStep],
) -> Result<BTreeMap<Vec<Outcome>, f64>, QuantumError> {
    let mut dist = BTreeMap::new();
    for branch in enumerate_branches(s, plan)? {
        *dist.entry(branch.outcomes).or_insert(0.0) += branch.probability;
    }
    Ok(dist)
}
