//! Alice and Bob as sequential state machines.
//!
//! Alice prepares GHZ triples and ships qubit 3 of each to Bob. Bob flips
//! it or leaves it alone according to his key bit and sends it back. Alice
//! undoes the entanglement with a CNOT (control 2, target 1) and reads the
//! bit off a Bell measurement on qubits 2 and 3: `phi+` means 0, `psi+`
//! means 1, and either minus outcome exposes an eavesdropper. A failed
//! round is thrown away and retried; after `max_rounds` failures Alice
//! sends one last batch of random qubits that tells Bob to give up.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{Adversary, AttackStrategy, EveRecord, IN_FLIGHT_QUBIT};
use crate::channel::{
    bob_wait_verdict, BobVerdict, Channel, ChannelEvent, Direction, Party, ROUND_TRIP_UNITS,
};
use crate::error::{Error, Result};
use crate::quantum::{make_ghz, measure_bell, BellOutcome, Outcome, StateVector};

/// A key as a sequence of 0/1 values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct KeyString(Vec<u8>);

impl KeyString {
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::Config("key bits must be 0 or 1".into()));
        }
        Ok(Self(bits))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for KeyString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for KeyString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Config(format!("invalid key string {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Self)
    }
}

impl From<KeyString> for String {
    fn from(k: KeyString) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for KeyString {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecodeResult {
    Bit(u8),
    /// Only ever carries `PhiMinus` or `PsiMinus`.
    Fail(BellOutcome),
}

impl DecodeResult {
    pub fn from_bell(outcome: BellOutcome) -> Self {
        match outcome {
            BellOutcome::PhiPlus => DecodeResult::Bit(0),
            BellOutcome::PsiPlus => DecodeResult::Bit(1),
            minus => DecodeResult::Fail(minus),
        }
    }

    pub fn bell(self) -> BellOutcome {
        match self {
            DecodeResult::Bit(0) => BellOutcome::PhiPlus,
            DecodeResult::Bit(_) => BellOutcome::PsiPlus,
            DecodeResult::Fail(b) => b,
        }
    }

    pub fn is_fail(self) -> bool {
        matches!(self, DecodeResult::Fail(_))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodePolicy {
    /// Stop decoding at the first failed qubit of a round.
    #[default]
    AbortOnFirstFail,
    /// Decode every qubit, then decide.
    DecodeAll,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub n: usize,
    pub max_rounds: u32,
    pub t_c: u64,
    pub seed: u64,
    pub decode_policy: DecodePolicy,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            n: 16,
            max_rounds: 10,
            t_c: 10,
            seed: 0,
            decode_policy: DecodePolicy::default(),
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.max_rounds == 0 {
            return Err(Error::Config("max_rounds must be at least 1".into()));
        }
        if self.t_c < ROUND_TRIP_UNITS {
            return Err(Error::Config(format!(
                "t_c must cover one round trip ({ROUND_TRIP_UNITS} time units), got {}",
                self.t_c
            )));
        }
        Ok(())
    }

    /// Independent generator for session `index`, derived from the master seed.
    pub fn session_rng(&self, index: u64) -> ChaCha8Rng {
        session_rng(self.seed, index)
    }
}

pub fn session_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One GHZ triple. Alice always keeps qubits 1 and 2; `holder` owns qubit 3.
#[derive(Clone, Debug, PartialEq)]
pub struct Tripartite {
    pub position: usize,
    pub state: StateVector,
    pub holder: Party,
}

/// Alice's `n` fresh GHZ triples, ready to ship.
pub fn alice_prepare(n: usize) -> Vec<Tripartite> {
    (0..n)
        .map(|position| Tripartite {
            position,
            state: make_ghz(),
            holder: Party::Alice,
        })
        .collect()
}

/// Bob flips qubit 3 for every coin equal to 1; the coins are his key.
pub fn bob_encode(
    mut systems: Vec<Tripartite>,
    coins: &[u8],
) -> Result<(KeyString, Vec<Tripartite>)> {
    if coins.len() != systems.len() {
        return Err(Error::LengthMismatch {
            expected: systems.len(),
            found: coins.len(),
        });
    }
    let key = KeyString::from_bits(coins.to_vec())?;
    for (system, &coin) in systems.iter_mut().zip(coins) {
        if system.holder != Party::Bob {
            return Err(Error::NotHolder {
                position: system.position,
                holder: system.holder,
                actor: Party::Bob,
            });
        }
        if coin == 1 {
            system.state = system.state.apply_sigma_x(IN_FLIGHT_QUBIT)?;
        }
    }
    Ok((key, systems))
}

/// Alice's decode of one returned triple. Extra qubits past the third
/// belong to an eavesdropper and are left alone.
pub fn alice_decode_one(state: &StateVector, draw: f64) -> Result<(DecodeResult, StateVector)> {
    if state.n_qubits() < 3 {
        return Err(Error::RegisterSize {
            expected: 3,
            found: state.n_qubits(),
        });
    }
    let disentangled = state.apply_cnot(2, 1)?;
    let record = measure_bell(&disentangled, 2, 3, draw)?;
    let Outcome::Bell(bell) = record.outcome else {
        unreachable!("Bell measurement yields a Bell outcome");
    };
    Ok((DecodeResult::from_bell(bell), record.post_state))
}

/// Alice's view of one transmission attempt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionTranscript {
    /// 1-based attempt index; `max_rounds + 1` marks the give-up signal.
    pub round: u32,
    pub bob_key: Option<KeyString>,
    pub alice_key: Option<KeyString>,
    pub failed: bool,
    pub fail_positions: Vec<usize>,
    /// Qubits Alice actually decoded this round.
    pub decoded: usize,
    pub attack: AttackStrategy,
    pub terminal: bool,
    pub eve_records: Vec<EveRecord>,
}

impl SessionTranscript {
    fn terminal(round: u32, attack: AttackStrategy) -> Self {
        Self {
            round,
            bob_key: None,
            alice_key: None,
            failed: false,
            fail_positions: Vec::new(),
            decoded: 0,
            attack,
            terminal: true,
            eve_records: Vec::new(),
        }
    }

    /// Alice's key made it through this round.
    pub fn established(&self) -> bool {
        !self.failed && !self.terminal
    }
}

/// Prepare, ship, encode, ship back and decode one batch of `n` triples.
pub fn run_round(
    config: &ProtocolConfig,
    adversary: &dyn Adversary,
    channel: &mut Channel,
    round: u32,
    rng: &mut dyn RngCore,
) -> Result<SessionTranscript> {
    config.validate()?;
    let mut systems = alice_prepare(config.n);
    let mut eve_records =
        channel.send(&mut systems, Direction::AliceToBob, round, adversary, rng)?;

    let coins: Vec<u8> = (0..config.n)
        .map(|_| u8::from(rng.random::<bool>()))
        .collect();
    let (bob_key, mut systems) = bob_encode(systems, &coins)?;

    eve_records.extend(channel.send(&mut systems, Direction::BobToAlice, round, adversary, rng)?);

    let mut alice_bits = Vec::with_capacity(config.n);
    let mut fail_positions = Vec::new();
    let mut decoded = 0;
    for system in &mut systems {
        let (result, post) = alice_decode_one(&system.state, rng.random())?;
        system.state = post;
        decoded += 1;
        match result {
            DecodeResult::Bit(b) => alice_bits.push(b),
            DecodeResult::Fail(_) => {
                fail_positions.push(system.position);
                if config.decode_policy == DecodePolicy::AbortOnFirstFail {
                    break;
                }
            }
        }
    }

    for record in eve_records.iter_mut().filter(|r| r.bit.is_none()) {
        record.bit = adversary.readout(&systems[record.position].state, rng)?;
    }

    let failed = !fail_positions.is_empty();
    Ok(SessionTranscript {
        round,
        bob_key: Some(bob_key),
        alice_key: if failed {
            None
        } else {
            Some(KeyString(alice_bits))
        },
        failed,
        fail_positions,
        decoded,
        attack: adversary.strategy(),
        terminal: false,
        eve_records,
    })
}

/// A full key-establishment attempt: every round plus the channel log and Bob's conclusion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub rounds: Vec<SessionTranscript>,
    pub events: Vec<ChannelEvent>,
    pub verdict: BobVerdict,
    pub end_time: u64,
}

impl Session {
    pub fn last(&self) -> &SessionTranscript {
        self.rounds
            .last()
            .expect("a session runs at least one round")
    }

    pub fn established(&self) -> bool {
        self.last().established()
    }

    pub fn terminated(&self) -> bool {
        self.last().terminal
    }
}

/// Rounds until one succeeds or `max_rounds` have failed, then the give-up signal.
pub fn run_session(
    config: &ProtocolConfig,
    adversary: &dyn Adversary,
    rng: &mut dyn RngCore,
) -> Result<Session> {
    config.validate()?;
    let mut channel = Channel::new();
    let mut rounds = Vec::new();
    for round in 1..=config.max_rounds {
        let transcript = run_round(config, adversary, &mut channel, round, rng)?;
        let done = !transcript.failed;
        rounds.push(transcript);
        if done {
            break;
        }
    }

    if rounds.last().is_some_and(|t| t.failed) {
        let round = config.max_rounds + 1;
        channel.send_signal(config.n, Direction::AliceToBob, round);
        rounds.push(SessionTranscript::terminal(round, adversary.strategy()));
    } else {
        channel.wait(config.t_c + 1);
    }

    let verdict = bob_wait_verdict(
        channel.clock(),
        config.t_c,
        &channel.receipts(Direction::AliceToBob),
        config.max_rounds,
    );
    let end_time = channel.clock();
    Ok(Session {
        rounds,
        events: channel.into_events(),
        verdict,
        end_time,
    })
}

pub fn keys_agree(t: &SessionTranscript) -> Result<bool> {
    match (&t.alice_key, &t.bob_key) {
        (Some(alice), Some(bob)) => Ok(alice == bob),
        _ => Err(Error::MissingAliceKey),
    }
}
