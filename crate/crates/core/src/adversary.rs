//! Eavesdropping strategies applied at the channel tap points.
//!
//! Two attacks act on the qubit Bob sends back: measuring it in the
//! computational basis, or entangling it with a private ancilla through a
//! CNOT. A third taps the outbound qubit before Bob has encoded anything.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::channel::Direction;
use crate::error::{Error, Result};
use crate::quantum::{measure_computational, Outcome, StateVector};

/// Position of the travelling qubit inside a tripartite register.
pub const IN_FLIGHT_QUBIT: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum AttackStrategy {
    None,
    InterceptMeasure {
        direction: Direction,
    },
    /// Always taps the Bob→Alice leg.
    EntangleCnot,
}

impl AttackStrategy {
    pub const ALL: [AttackStrategy; 4] = [
        AttackStrategy::None,
        AttackStrategy::InterceptMeasure {
            direction: Direction::AliceToBob,
        },
        AttackStrategy::InterceptMeasure {
            direction: Direction::BobToAlice,
        },
        AttackStrategy::EntangleCnot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackStrategy::None => "none",
            AttackStrategy::InterceptMeasure {
                direction: Direction::AliceToBob,
            } => "intercept-ab",
            AttackStrategy::InterceptMeasure {
                direction: Direction::BobToAlice,
            } => "intercept-ba",
            AttackStrategy::EntangleCnot => "entangle-cnot",
        }
    }

    pub fn is_active(self) -> bool {
        self != AttackStrategy::None
    }

    pub fn taps(self, direction: Direction) -> bool {
        match self {
            AttackStrategy::None => false,
            AttackStrategy::InterceptMeasure { direction: d } => d == direction,
            AttackStrategy::EntangleCnot => direction == Direction::BobToAlice,
        }
    }
}

impl fmt::Display for AttackStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AttackStrategy::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::UnknownAttack(s.to_string()))
    }
}

impl From<AttackStrategy> for String {
    fn from(a: AttackStrategy) -> String {
        a.name().to_string()
    }
}

impl TryFrom<String> for AttackStrategy {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// What Eve holds about one tapped qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EveRecord {
    pub position: usize,
    /// Measured bit, or the ancilla readout once it has happened.
    pub bit: Option<u8>,
}

fn expect_tripartite(s: &StateVector) -> Result<()> {
    if s.n_qubits() != 3 {
        return Err(Error::RegisterSize {
            expected: 3,
            found: s.n_qubits(),
        });
    }
    Ok(())
}

fn outcome_bit(outcome: Outcome) -> u8 {
    match outcome {
        Outcome::Bit(b) => b,
        Outcome::Bell(_) => unreachable!("computational measurement yields a bit"),
    }
}

/// Measures the travelling qubit and forwards the collapsed register.
pub fn eve_intercept_measure(s: &StateVector, draw: f64) -> Result<(StateVector, u8)> {
    expect_tripartite(s)?;
    let record = measure_computational(s, IN_FLIGHT_QUBIT, draw)?;
    Ok((record.post_state, outcome_bit(record.outcome)))
}

/// Entangles the travelling qubit with a fresh ancilla appended as qubit 4.
pub fn eve_entangle_cnot(s: &StateVector) -> Result<StateVector> {
    expect_tripartite(s)?;
    Ok(s.apply_cnot_ancilla(IN_FLIGHT_QUBIT)?)
}

/// Computational-basis readout of Eve's ancilla (the last qubit).
pub fn eve_readout_ancilla(s: &StateVector, draw: f64) -> Result<(StateVector, u8)> {
    if s.n_qubits() != 4 {
        return Err(Error::RegisterSize {
            expected: 4,
            found: s.n_qubits(),
        });
    }
    let record = measure_computational(s, 4, draw)?;
    Ok((record.post_state, outcome_bit(record.outcome)))
}

/// Eve's guess of Bob's key bit: her own bit, taken at face value.
pub fn eve_guess_bit(record: &EveRecord, strategy: AttackStrategy) -> Option<u8> {
    if strategy.is_active() {
        record.bit
    } else {
        None
    }
}

/// An eavesdropper sitting on the channel.
pub trait Adversary {
    fn strategy(&self) -> AttackStrategy;

    /// Chance that any single qubit on a tapped leg is attacked.
    fn attack_probability(&self) -> f64 {
        1.0
    }

    fn taps(&self, direction: Direction) -> bool {
        self.strategy().taps(direction)
    }

    /// Acts on one travelling qubit. Returns the forwarded register and any bit learned on the spot.
    fn intercept(
        &self,
        direction: Direction,
        state: &StateVector,
        rng: &mut dyn RngCore,
    ) -> Result<(StateVector, Option<u8>)>;

    /// Runs after Alice's decode; lets Eve read out anything she kept.
    fn readout(&self, _state: &StateVector, _rng: &mut dyn RngCore) -> Result<Option<u8>> {
        Ok(None)
    }
}

impl Adversary for AttackStrategy {
    fn strategy(&self) -> AttackStrategy {
        *self
    }

    fn intercept(
        &self,
        direction: Direction,
        state: &StateVector,
        rng: &mut dyn RngCore,
    ) -> Result<(StateVector, Option<u8>)> {
        if !self.taps(direction) {
            return Ok((state.clone(), None));
        }
        match self {
            AttackStrategy::None => unreachable!(),
            AttackStrategy::InterceptMeasure { .. } => {
                let (forwarded, bit) = eve_intercept_measure(state, rng.random())?;
                Ok((forwarded, Some(bit)))
            }
            AttackStrategy::EntangleCnot => Ok((eve_entangle_cnot(state)?, None)),
        }
    }

    fn readout(&self, state: &StateVector, rng: &mut dyn RngCore) -> Result<Option<u8>> {
        match self {
            AttackStrategy::EntangleCnot => Ok(Some(eve_readout_ancilla(state, rng.random())?.1)),
            _ => Ok(None),
        }
    }
}

/// A strategy that only attacks a fraction of the qubits on its tapped leg.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartialAttack {
    pub strategy: AttackStrategy,
    pub probability: f64,
}

impl Adversary for PartialAttack {
    fn strategy(&self) -> AttackStrategy {
        self.strategy
    }

    fn attack_probability(&self) -> f64 {
        self.probability
    }

    fn intercept(
        &self,
        direction: Direction,
        state: &StateVector,
        rng: &mut dyn RngCore,
    ) -> Result<(StateVector, Option<u8>)> {
        self.strategy.intercept(direction, state, rng)
    }

    fn readout(&self, state: &StateVector, rng: &mut dyn RngCore) -> Result<Option<u8>> {
        self.strategy.readout(state, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{make_ghz, Amplitude};

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn superpose(labels: &[(&str, f64)]) -> StateVector {
        let n = labels[0].0.len();
        let mut amps = vec![Amplitude::new(0.0, 0.0); 1 << n];
        for (label, c) in labels {
            amps[usize::from_str_radix(label, 2).unwrap()] = Amplitude::new(*c, 0.0);
        }
        StateVector::new(amps).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for a in AttackStrategy::ALL {
            assert_eq!(a.name().parse::<AttackStrategy>().unwrap(), a);
        }
        assert!(matches!(
            "mitm".parse::<AttackStrategy>(),
            Err(Error::UnknownAttack(_))
        ));
        let json = serde_json::to_string(&AttackStrategy::EntangleCnot).unwrap();
        assert_eq!(json, "\"entangle-cnot\"");
    }

    #[test]
    fn tap_points() {
        assert!(!AttackStrategy::None.taps(Direction::AliceToBob));
        assert!(!AttackStrategy::None.taps(Direction::BobToAlice));
        assert!(AttackStrategy::EntangleCnot.taps(Direction::BobToAlice));
        assert!(!AttackStrategy::EntangleCnot.taps(Direction::AliceToBob));
        let ab: AttackStrategy = "intercept-ab".parse().unwrap();
        assert!(ab.taps(Direction::AliceToBob) && !ab.taps(Direction::BobToAlice));
    }

    #[test]
    fn intercept_on_ghz() {
        let (s, bit) = eve_intercept_measure(&make_ghz(), 0.2).unwrap();
        assert_eq!(bit, 0);
        assert!(s.approx_eq(&StateVector::ket("000").unwrap(), 1e-12));
        let (s, bit) = eve_intercept_measure(&make_ghz(), 0.7).unwrap();
        assert_eq!(bit, 1);
        assert!(s.approx_eq(&StateVector::ket("111").unwrap(), 1e-12));
    }

    #[test]
    fn intercept_on_encoded_ghz() {
        let encoded = make_ghz().apply_sigma_x(3).unwrap();
        let (s, bit) = eve_intercept_measure(&encoded, 0.7).unwrap();
        assert_eq!(bit, 1);
        assert!(s.approx_eq(&StateVector::ket("001").unwrap(), 1e-12));
        let (s, bit) = eve_intercept_measure(&encoded, 0.2).unwrap();
        assert_eq!(bit, 0);
        assert!(s.approx_eq(&StateVector::ket("110").unwrap(), 1e-12));
    }

    #[test]
    fn intercept_on_eigenstate_is_passive() {
        let basis = StateVector::ket("000").unwrap();
        for draw in [0.0, 0.5, 0.99] {
            let (s, bit) = eve_intercept_measure(&basis, draw).unwrap();
            assert_eq!(bit, 0);
            assert_eq!(s, basis);
        }
    }

    #[test]
    fn entangling_attack_states() {
        let four = eve_entangle_cnot(&make_ghz()).unwrap();
        assert!(four.approx_eq(&superpose(&[("0000", H), ("1111", H)]), 1e-12));
        let four = eve_entangle_cnot(&make_ghz().apply_sigma_x(3).unwrap()).unwrap();
        assert!(four.approx_eq(&superpose(&[("0011", H), ("1100", H)]), 1e-12));
        let four = eve_entangle_cnot(&StateVector::ket("000").unwrap()).unwrap();
        assert_eq!(four, StateVector::ket("0000").unwrap());
    }

    #[test]
    fn register_size_checked() {
        let two = StateVector::ket("00").unwrap();
        assert!(matches!(
            eve_intercept_measure(&two, 0.5),
            Err(Error::RegisterSize {
                expected: 3,
                found: 2
            })
        ));
        assert!(eve_entangle_cnot(&two).is_err());
        assert!(eve_readout_ancilla(&make_ghz(), 0.5).is_err());
    }

    #[test]
    fn guess_needs_an_active_strategy() {
        let record = EveRecord {
            position: 0,
            bit: Some(1),
        };
        assert_eq!(
            eve_guess_bit(&record, AttackStrategy::EntangleCnot),
            Some(1)
        );
        assert_eq!(eve_guess_bit(&record, AttackStrategy::None), None);
    }
}
