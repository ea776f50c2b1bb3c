use std::ops::AddAssign;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{AttackStrategy, PartialAttack};
use crate::channel::{BobVerdict, Channel};
use crate::error::{Error, Result};
use crate::protocol::{
    keys_agree, run_round, run_session, DecodePolicy, ProtocolConfig, Session, SessionTranscript,
};

use super::stats::{
    chi_square_2x2, mutual_information_bits, RateEstimate, CHI_SQUARE_1DF_CRITICAL_001,
};

/// Sessions handed to one worker at a time.
const CHUNK: u64 = 2048;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub sessions: u64,
    pub attack: AttackStrategy,
    pub seed: u64,
    pub t_c: u64,
    pub max_rounds: u32,
    /// Chance that Eve attacks any given qubit on her tapped leg.
    pub attack_probability: f64,
    pub decode_policy: DecodePolicy,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let protocol = ProtocolConfig::default();
        Self {
            n: protocol.n,
            sessions: 1000,
            attack: AttackStrategy::None,
            seed: protocol.seed,
            t_c: protocol.t_c,
            max_rounds: protocol.max_rounds,
            attack_probability: 1.0,
            decode_policy: protocol.decode_policy,
        }
    }
}

impl ExperimentConfig {
    pub fn protocol(&self) -> ProtocolConfig {
        ProtocolConfig {
            n: self.n,
            max_rounds: self.max_rounds,
            t_c: self.t_c,
            seed: self.seed,
            decode_policy: self.decode_policy,
        }
    }

    pub fn adversary(&self) -> PartialAttack {
        PartialAttack {
            strategy: self.attack,
            probability: self.attack_probability,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sessions == 0 {
            return Err(Error::Config("sessions must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.attack_probability) {
            return Err(Error::Config(format!(
                "attack probability {} outside [0, 1]",
                self.attack_probability
            )));
        }
        self.protocol().validate()
    }

    /// Per-qubit chance that Alice sees a minus outcome.
    pub fn analytic_detection(&self) -> f64 {
        if self.attack.is_active() {
            0.5 * self.attack_probability
        } else {
            0.0
        }
    }

    /// Chance that a whole round of `n` qubits passes with no minus outcome.
    pub fn analytic_undetected_round(&self) -> f64 {
        (1.0 - self.analytic_detection()).powi(self.n as i32)
    }

    /// Base-10 logarithm of [`Self::analytic_undetected_round`], finite even when the value underflows.
    pub fn analytic_undetected_round_log10(&self) -> f64 {
        let d = self.analytic_detection();
        if d == 0.0 {
            0.0
        } else {
            self.n as f64 * (1.0 - d).log10()
        }
    }
}

/// Raw counts; every report figure is derived from these.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub sessions: u64,
    pub rounds: u64,
    pub undetected_rounds: u64,
    pub decoded_qubits: u64,
    pub failed_qubits: u64,
    pub established: u64,
    pub terminated: u64,
    pub agreed: u64,
    pub eve_samples: u64,
    pub eve_correct: u64,
    /// Indexed by `[bob bit][eve bit]`.
    pub eve_joint: [[u64; 2]; 2],
    pub verdict_matches: u64,
}

impl Tally {
    /// Counts one attempted round (not the give-up signal).
    pub fn add_round(&mut self, t: &SessionTranscript) {
        self.rounds += 1;
        self.decoded_qubits += t.decoded as u64;
        self.failed_qubits += t.fail_positions.len() as u64;
        if !t.failed {
            self.undetected_rounds += 1;
        }
        let Some(bob) = &t.bob_key else { return };
        for record in &t.eve_records {
            if let Some(eve) = record.bit {
                let bob = bob.bits()[record.position];
                self.eve_samples += 1;
                self.eve_correct += u64::from(eve == bob);
                self.eve_joint[bob as usize][eve as usize] += 1;
            }
        }
    }

    pub fn add_session(&mut self, s: &Session) -> Result<()> {
        self.sessions += 1;
        for t in s.rounds.iter().filter(|t| !t.terminal) {
            self.add_round(t);
        }
        let last = s.last();
        if last.established() {
            self.established += 1;
            self.agreed += u64::from(keys_agree(last)?);
        }
        if last.terminal {
            self.terminated += 1;
        }
        let bob_thinks_established = s.verdict == BobVerdict::Established;
        let bob_consistent = bob_thinks_established == last.established()
            && (s.verdict == BobVerdict::Terminated) == last.terminal;
        self.verdict_matches += u64::from(bob_consistent);
        Ok(())
    }
}

impl AddAssign for Tally {
    fn add_assign(&mut self, o: Tally) {
        self.sessions += o.sessions;
        self.rounds += o.rounds;
        self.undetected_rounds += o.undetected_rounds;
        self.decoded_qubits += o.decoded_qubits;
        self.failed_qubits += o.failed_qubits;
        self.established += o.established;
        self.terminated += o.terminated;
        self.agreed += o.agreed;
        self.eve_samples += o.eve_samples;
        self.eve_correct += o.eve_correct;
        for r in 0..2 {
            for c in 0..2 {
                self.eve_joint[r][c] += o.eve_joint[r][c];
            }
        }
        self.verdict_matches += o.verdict_matches;
    }
}

/// Splits `0..total` into fixed chunks, tallies them in parallel and sums
/// the partial tallies in chunk order.
fn chunked_tally<F>(total: u64, work: F) -> Result<Tally>
where
    F: Fn(u64, &mut Tally) -> Result<()> + Sync,
{
    let chunks = total.div_ceil(CHUNK);
    let partials = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut tally = Tally::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(total) {
                work(i, &mut tally)?;
            }
            Ok(tally)
        })
        .collect::<Result<Vec<Tally>>>()?;
    let mut sum = Tally::default();
    for partial in partials {
        sum += partial;
    }
    Ok(sum)
}

/// Full sessions, session `i` seeded from stream `i` of the master seed.
pub fn run_sessions(cfg: &ExperimentConfig) -> Result<Tally> {
    cfg.validate()?;
    let protocol = cfg.protocol();
    let adversary = cfg.adversary();
    chunked_tally(cfg.sessions, |i, tally| {
        let session = run_session(&protocol, &adversary, &mut protocol.session_rng(i))?;
        tally.add_session(&session)
    })
}

/// `rounds` independent single rounds, without retry logic.
pub fn run_rounds(cfg: &ExperimentConfig, rounds: u64) -> Result<Tally> {
    cfg.validate()?;
    let protocol = cfg.protocol();
    let adversary = cfg.adversary();
    chunked_tally(rounds, |i, tally| {
        let t = run_round(
            &protocol,
            &adversary,
            &mut Channel::new(),
            1,
            &mut protocol.session_rng(i),
        )?;
        tally.add_round(&t);
        Ok(())
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub sessions: u64,
    pub rounds: u64,
    pub sessions_established: u64,
    pub sessions_terminated: u64,
    /// Minus outcomes per decoded qubit.
    pub detection: RateEstimate,
    /// Rounds with no minus outcome, per round.
    pub undetected_round: RateEstimate,
    pub undetected_round_log10_analytic: f64,
    /// Among established sessions.
    pub key_agreement: RateEstimate,
    pub eve_guess_accuracy: RateEstimate,
    pub eve_mutual_information_bits: Option<f64>,
    /// Sessions where Bob's timing-based verdict matches Alice's outcome.
    pub verdict_agreement: RateEstimate,
}

impl ExperimentReport {
    pub fn from_tally(config: ExperimentConfig, tally: &Tally) -> Self {
        let attacked = config.attack.is_active();
        Self {
            sessions: tally.sessions,
            rounds: tally.rounds,
            sessions_established: tally.established,
            sessions_terminated: tally.terminated,
            detection: RateEstimate::new(
                tally.failed_qubits,
                tally.decoded_qubits,
                Some(config.analytic_detection()),
            ),
            undetected_round: RateEstimate::new(
                tally.undetected_rounds,
                tally.rounds,
                Some(config.analytic_undetected_round()),
            ),
            undetected_round_log10_analytic: config.analytic_undetected_round_log10(),
            key_agreement: RateEstimate::new(tally.agreed, tally.established, Some(1.0)),
            eve_guess_accuracy: RateEstimate::new(
                tally.eve_correct,
                tally.eve_samples,
                attacked.then_some(0.5),
            ),
            eve_mutual_information_bits: mutual_information_bits(&tally.eve_joint),
            verdict_agreement: RateEstimate::new(tally.verdict_matches, tally.sessions, Some(1.0)),
            config,
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let tally = run_sessions(cfg)?;
    Ok(ExperimentReport::from_tally(cfg.clone(), &tally))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceTest {
    /// Indexed by `[fail at first qubit][fail at second qubit]`.
    pub table: [[u64; 2]; 2],
    pub statistic: f64,
    pub critical: f64,
    pub independent: bool,
}

/// Chi-square test that failures at two positions of a round are independent.
/// Uses two-qubit rounds with every qubit decoded.
pub fn failure_independence(
    attack: AttackStrategy,
    rounds: u64,
    seed: u64,
) -> Result<IndependenceTest> {
    let cfg = ExperimentConfig {
        n: 2,
        attack,
        seed,
        decode_policy: DecodePolicy::DecodeAll,
        ..ExperimentConfig::default()
    };
    cfg.validate()?;
    let protocol = cfg.protocol();
    let adversary = cfg.adversary();
    let chunks = rounds.div_ceil(CHUNK);
    let partials = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut table = [[0u64; 2]; 2];
            for i in c * CHUNK..((c + 1) * CHUNK).min(rounds) {
                let t = run_round(
                    &protocol,
                    &adversary,
                    &mut Channel::new(),
                    1,
                    &mut protocol.session_rng(i),
                )?;
                let first = usize::from(t.fail_positions.contains(&0));
                let second = usize::from(t.fail_positions.contains(&1));
                table[first][second] += 1;
            }
            Ok(table)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = [[0u64; 2]; 2];
    for p in partials {
        for r in 0..2 {
            for c in 0..2 {
                table[r][c] += p[r][c];
            }
        }
    }
    let statistic = chi_square_2x2(&table);
    Ok(IndependenceTest {
        table,
        statistic,
        critical: CHI_SQUARE_1DF_CRITICAL_001,
        independent: statistic <= CHI_SQUARE_1DF_CRITICAL_001,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_references() {
        let cfg = ExperimentConfig {
            n: 1000,
            attack: AttackStrategy::EntangleCnot,
            ..ExperimentConfig::default()
        };
        assert_eq!(cfg.analytic_detection(), 0.5);
        let p = cfg.analytic_undetected_round();
        assert!((p / 9.332_636_185_032_189e-302 - 1.0).abs() < 1e-12);
        assert!((cfg.analytic_undetected_round_log10() + 301.029_995_663_981_2).abs() < 1e-9);

        let honest = ExperimentConfig::default();
        assert_eq!(honest.analytic_detection(), 0.0);
        assert_eq!(honest.analytic_undetected_round(), 1.0);
        assert_eq!(honest.analytic_undetected_round_log10(), 0.0);
    }

    #[test]
    fn config_errors() {
        let bad = |f: fn(&mut ExperimentConfig)| {
            let mut c = ExperimentConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.sessions = 0));
        assert!(bad(|c| c.n = 0));
        assert!(bad(|c| c.attack_probability = 1.5));
        assert!(bad(|c| c.t_c = 0));
        assert!(run_experiment(&ExperimentConfig {
            sessions: 0,
            ..ExperimentConfig::default()
        })
        .is_err());
    }

    #[test]
    fn honest_experiment() {
        let report = run_experiment(&ExperimentConfig {
            n: 8,
            sessions: 500,
            seed: 3,
            ..ExperimentConfig::default()
        })
        .unwrap();
        assert_eq!(report.rounds, 500);
        assert_eq!(report.detection.count, 0);
        assert_eq!(report.key_agreement.rate, Some(1.0));
        assert_eq!(report.sessions_established, 500);
        assert_eq!(report.verdict_agreement.rate, Some(1.0));
        assert_eq!(report.eve_guess_accuracy.samples, 0);
        assert_eq!(report.eve_mutual_information_bits, None);
    }

    #[test]
    fn partial_attack_scales_detection() {
        let report = run_experiment(&ExperimentConfig {
            n: 4,
            sessions: 20_000,
            attack: AttackStrategy::EntangleCnot,
            attack_probability: 0.5,
            seed: 9,
            ..ExperimentConfig::default()
        })
        .unwrap();
        assert_eq!(report.detection.analytic, Some(0.25));
        assert!(
            report.detection.agrees_within(3.0),
            "{:?}",
            report.detection
        );
        assert!(
            report.undetected_round.agrees_within(3.0),
            "{:?}",
            report.undetected_round
        );
    }

    #[test]
    fn chunking_does_not_change_totals() {
        let cfg = ExperimentConfig {
            n: 3,
            sessions: CHUNK * 2 + 17,
            attack: "intercept-ba".parse().unwrap(),
            seed: 1,
            ..ExperimentConfig::default()
        };
        let parallel = run_sessions(&cfg).unwrap();
        let mut serial = Tally::default();
        let protocol = cfg.protocol();
        for i in 0..cfg.sessions {
            let s = run_session(&protocol, &cfg.adversary(), &mut protocol.session_rng(i)).unwrap();
            serial.add_session(&s).unwrap();
        }
        assert_eq!(parallel, serial);
    }
}
