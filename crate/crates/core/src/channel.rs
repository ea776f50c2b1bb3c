//! Ideal quantum channel with tap points and a simulated clock.
//!
//! The joint register of each tripartite system stays one `StateVector`;
//! sending a qubit only hands the right to act on qubit 3 to the other
//! party. Every batch delivery advances the clock by one unit, so a full
//! round trip costs [`ROUND_TRIP_UNITS`].

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::adversary::{Adversary, EveRecord};
use crate::error::{Error, Result};
use crate::protocol::Tripartite;

pub const ROUND_TRIP_UNITS: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    AliceToBob,
    BobToAlice,
}

impl Direction {
    pub fn sender(self) -> Party {
        match self {
            Direction::AliceToBob => Party::Alice,
            Direction::BobToAlice => Party::Bob,
        }
    }

    pub fn receiver(self) -> Party {
        match self {
            Direction::AliceToBob => Party::Bob,
            Direction::BobToAlice => Party::Alice,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

/// One batch delivery.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelEvent {
    pub time: u64,
    pub direction: Direction,
    pub round: u32,
    pub qubits: usize,
    /// Positions Eve acted on.
    pub tapped: Vec<usize>,
}

impl ChannelEvent {
    pub fn is_tapped(&self) -> bool {
        !self.tapped.is_empty()
    }
}

#[derive(Clone, Debug, Default)]
pub struct Channel {
    clock: u64,
    events: Vec<ChannelEvent>,
}

impl Channel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn events(&self) -> &[ChannelEvent] {
        &self.events
    }

    pub fn into_events(self) -> Vec<ChannelEvent> {
        self.events
    }

    /// Lets simulated time pass with nothing on the wire.
    pub fn wait(&mut self, units: u64) {
        self.clock += units;
    }

    /// Delivery times of every batch travelling in `direction`.
    pub fn receipts(&self, direction: Direction) -> Vec<u64> {
        self.events
            .iter()
            .filter(|e| e.direction == direction)
            .map(|e| e.time)
            .collect()
    }

    /// Delivers a batch of travelling qubits, passing each through the
    /// adversary first when it taps this leg.
    pub fn send(
        &mut self,
        systems: &mut [Tripartite],
        direction: Direction,
        round: u32,
        adversary: &dyn Adversary,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<EveRecord>> {
        let sender = direction.sender();
        let taps = adversary.taps(direction);
        let probability = adversary.attack_probability();
        let mut records = Vec::new();
        for system in systems.iter_mut() {
            if system.holder != sender {
                return Err(Error::NotHolder {
                    position: system.position,
                    holder: system.holder,
                    actor: sender,
                });
            }
            // Full attacks draw nothing here so their random stream matches the honest one.
            let attacked = taps && (probability >= 1.0 || rng.random::<f64>() < probability);
            if attacked {
                let (forwarded, bit) = adversary.intercept(direction, &system.state, rng)?;
                system.state = forwarded;
                records.push(EveRecord {
                    position: system.position,
                    bit,
                });
            }
            system.holder = direction.receiver();
        }
        self.push_event(
            direction,
            round,
            systems.len(),
            records.iter().map(|r| r.position).collect(),
        );
        Ok(records)
    }

    /// Delivers `qubits` fresh qubits nobody acts on (Alice's give-up signal).
    pub fn send_signal(&mut self, qubits: usize, direction: Direction, round: u32) {
        self.push_event(direction, round, qubits, Vec::new());
    }

    fn push_event(&mut self, direction: Direction, round: u32, qubits: usize, tapped: Vec<usize>) {
        self.clock += 1;
        self.events.push(ChannelEvent {
            time: self.clock,
            direction,
            round,
            qubits,
            tapped,
        });
    }
}

/// What Bob concludes from the timing of Alice's transmissions alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BobVerdict {
    /// Still inside the waiting window after the first transmission.
    Awaiting,
    /// A resend arrived, so the previous attempt failed and a new one is running.
    Restarted,
    Established,
    Terminated,
}

/// Bob's verdict at time `now`, given the arrival times of Alice's batches.
///
/// Silence for longer than `t_c` after a receipt means the key stands; the
/// receipt numbered `max_rounds + 1` is the give-up signal.
pub fn bob_wait_verdict(now: u64, t_c: u64, receipts: &[u64], max_rounds: u32) -> BobVerdict {
    let Some(&last) = receipts.last() else {
        return BobVerdict::Awaiting;
    };
    for (i, pair) in receipts.windows(2).enumerate() {
        // Bob had already stopped waiting before the next batch arrived.
        if pair[1] - pair[0] > t_c {
            return if i >= max_rounds as usize {
                BobVerdict::Terminated
            } else {
                BobVerdict::Established
            };
        }
    }
    if receipts.len() > max_rounds as usize {
        BobVerdict::Terminated
    } else if now.saturating_sub(last) > t_c {
        BobVerdict::Established
    } else if receipts.len() > 1 {
        BobVerdict::Restarted
    } else {
        BobVerdict::Awaiting
    }
}
