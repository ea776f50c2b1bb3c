use std::fmt;

use serde::{Deserialize, Serialize};

use super::state::{Amplitude, StateVector};
use super::QuantumError;

/// The four maximally entangled two-qubit states used as a measurement basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BellOutcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
    ];

    /// Real coefficients on `|00>, |01>, |10>, |11>` before the 1/√2 factor.
    fn coefficients(self) -> [f64; 4] {
        match self {
            BellOutcome::PhiPlus => [1.0, 0.0, 0.0, 1.0],
            BellOutcome::PhiMinus => [1.0, 0.0, 0.0, -1.0],
            BellOutcome::PsiPlus => [0.0, 1.0, 1.0, 0.0],
            BellOutcome::PsiMinus => [0.0, 1.0, -1.0, 0.0],
        }
    }

    /// True for the minus-type outcomes that never occur in an honest run.
    pub fn is_minus(self) -> bool {
        matches!(self, BellOutcome::PhiMinus | BellOutcome::PsiMinus)
    }

    /// The Bell state itself as a two-qubit register.
    pub fn state(self) -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = self
            .coefficients()
            .iter()
            .map(|&c| Amplitude::new(c * h, 0.0))
            .collect();
        StateVector::from_parts(2, amps)
    }

    pub fn label(self) -> &'static str {
        match self {
            BellOutcome::PhiPlus => "phi+",
            BellOutcome::PhiMinus => "phi-",
            BellOutcome::PsiPlus => "psi+",
            BellOutcome::PsiMinus => "psi-",
        }
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Result of a single projective measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Bit(u8),
    Bell(BellOutcome),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Bit(b) => write!(f, "{b}"),
            Outcome::Bell(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub outcome: Outcome,
    /// Born weight of `outcome` on the pre-measurement state.
    pub probability: f64,
    pub post_state: StateVector,
}

/// One branch of a projective measurement: outcome, weight and the
/// unnormalized projected amplitudes.
pub(crate) struct Projection {
    pub outcome: Outcome,
    pub probability: f64,
    amps: Vec<Amplitude>,
}

impl Projection {
    pub fn collapse(self, n_qubits: usize) -> MeasurementRecord {
        let scale = self.probability.sqrt();
        let amps = self.amps.into_iter().map(|a| a / scale).collect();
        MeasurementRecord {
            outcome: self.outcome,
            probability: self.probability,
            post_state: StateVector::from_parts(n_qubits, amps),
        }
    }
}

pub(crate) fn project_computational(
    s: &StateVector,
    q: usize,
) -> Result<Vec<Projection>, QuantumError> {
    let mask = s.mask(q)?;
    Ok([0u8, 1]
        .into_iter()
        .map(|bit| {
            let keep = |i: usize| (i & mask != 0) == (bit == 1);
            let amps: Vec<Amplitude> = s
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(i, &a)| if keep(i) { a } else { Amplitude::new(0.0, 0.0) })
                .collect();
            let probability = amps.iter().map(|a| a.norm_sqr()).sum();
            Projection {
                outcome: Outcome::Bit(bit),
                probability,
                amps,
            }
        })
        .collect())
}

pub(crate) fn project_bell(
    s: &StateVector,
    q_a: usize,
    q_b: usize,
) -> Result<Vec<Projection>, QuantumError> {
    let mask_a = s.mask(q_a)?;
    let mask_b = s.mask(q_b)?;
    if q_a == q_b {
        return Err(QuantumError::SameQubit(q_a));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // Pair index xy (x on q_a) -> bit pattern within the full basis index.
    let offsets = [0, mask_b, mask_a, mask_a | mask_b];
    let amps = s.amplitudes();

    Ok(BellOutcome::ALL
        .into_iter()
        .map(|bell| {
            let coeffs = bell.coefficients().map(|c| c * h);
            let mut projected = vec![Amplitude::new(0.0, 0.0); s.dim()];
            let mut probability = 0.0;
            for base in (0..s.dim()).filter(|i| i & (mask_a | mask_b) == 0) {
                let overlap: Amplitude = offsets
                    .iter()
                    .zip(coeffs)
                    .map(|(&off, c)| amps[base | off] * c)
                    .sum();
                probability += overlap.norm_sqr();
                for (&off, c) in offsets.iter().zip(coeffs) {
                    projected[base | off] = overlap * c;
                }
            }
            Projection {
                outcome: Outcome::Bell(bell),
                probability,
                amps: projected,
            }
        })
        .collect())
}

/// Picks the branch selected by a uniform draw in `[0, 1)`, skipping null branches.
fn sample(
    branches: Vec<Projection>,
    draw: f64,
    n_qubits: usize,
) -> Result<MeasurementRecord, QuantumError> {
    if !(0.0..1.0).contains(&draw) {
        return Err(QuantumError::InvalidDraw(draw));
    }
    let mut cumulative = 0.0;
    let mut chosen = None;
    for branch in branches.into_iter().filter(|b| b.probability > 0.0) {
        cumulative += branch.probability;
        let hit = draw < cumulative;
        chosen = Some(branch);
        if hit {
            break;
        }
    }
    // Rounding can leave the total a hair under the draw; the last live branch absorbs it.
    Ok(chosen
        .expect("normalized state has a live branch")
        .collapse(n_qubits))
}

/// Measures qubit `q` in the computational basis.
pub fn measure_computational(
    s: &StateVector,
    q: usize,
    draw: f64,
) -> Result<MeasurementRecord, QuantumError> {
    sample(project_computational(s, q)?, draw, s.n_qubits())
}

/// Measures qubits `(q_a, q_b)` in the Bell basis.
pub fn measure_bell(
    s: &StateVector,
    q_a: usize,
    q_b: usize,
    draw: f64,
) -> Result<MeasurementRecord, QuantumError> {
    sample(project_bell(s, q_a, q_b)?, draw, s.n_qubits())
}
