use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{QuantumError, MAX_QUBITS, TOLERANCE};

/// Complex probability amplitude.
pub type Amplitude = Complex64;

/// Normalized pure state of a register of 1 to 5 qubits.
///
/// Qubit 1 is the most significant bit of the basis index, so on three
/// qubits `|011>` lives at index 3. Operations never mutate a state; they
/// return a new one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Amplitude>,
}

impl StateVector {
    /// Builds a state from raw amplitudes, checking length, finiteness and norm.
    pub fn new(amps: Vec<Amplitude>) -> Result<Self, QuantumError> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QuantumError::InvalidLength(len));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(QuantumError::RegisterTooLarge(n_qubits));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QuantumError::NonFinite);
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(QuantumError::NotNormalized(norm));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Like [`StateVector::new`] but rescales the amplitudes to unit norm first.
    pub fn normalized(mut amps: Vec<Amplitude>) -> Result<Self, QuantumError> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(QuantumError::NotNormalized(norm * norm));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Self::new(amps)
    }

    /// Computational basis state `|index>` on `n_qubits` qubits.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self, QuantumError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(QuantumError::RegisterTooLarge(n_qubits));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(QuantumError::InvalidLength(index));
        }
        let mut amps = vec![Amplitude::new(0.0, 0.0); dim];
        amps[index] = Amplitude::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Parses a ket label such as `"011"` into the matching basis state.
    pub fn ket(label: &str) -> Result<Self, QuantumError> {
        let mut index = 0usize;
        for c in label.chars() {
            index = match c {
                '0' => index << 1,
                '1' => (index << 1) | 1,
                _ => return Err(QuantumError::InvalidKet(label.to_string())),
            };
        }
        if label.is_empty() {
            return Err(QuantumError::InvalidKet(label.to_string()));
        }
        Self::basis(label.len(), index)
    }

    /// Tensor product `self ⊗ other`; `self` occupies the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<Self, QuantumError> {
        let n = self.n_qubits + other.n_qubits;
        if n > MAX_QUBITS {
            return Err(QuantumError::RegisterTooLarge(n));
        }
        let mut amps = Vec::with_capacity(1 << n);
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(Self { n_qubits: n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Amplitude {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest entrywise distance to `other`, or infinity when the registers differ.
    pub fn distance(&self, other: &StateVector) -> f64 {
        if self.n_qubits != other.n_qubits {
            return f64::INFINITY;
        }
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &StateVector, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    /// Bit mask of qubit `q` (1-based) inside a basis index.
    pub(crate) fn mask(&self, q: usize) -> Result<usize, QuantumError> {
        if q == 0 || q > self.n_qubits {
            return Err(QuantumError::QubitOutOfRange {
                qubit: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(1 << (self.n_qubits - q))
    }

    /// Internal constructor for amplitudes produced by unitary or projective steps.
    pub(crate) fn from_parts(n_qubits: usize, amps: Vec<Amplitude>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        Self { n_qubits, amps }
    }

    /// Pauli X (bit flip) on qubit `q`.
    pub fn apply_sigma_x(&self, q: usize) -> Result<Self, QuantumError> {
        let mask = self.mask(q)?;
        let amps = (0..self.dim()).map(|i| self.amps[i ^ mask]).collect();
        Ok(Self::from_parts(self.n_qubits, amps))
    }

    /// Pauli Z (phase flip) on qubit `q`.
    pub fn apply_sigma_z(&self, q: usize) -> Result<Self, QuantumError> {
        let mask = self.mask(q)?;
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, &a)| if i & mask != 0 { -a } else { a })
            .collect();
        Ok(Self::from_parts(self.n_qubits, amps))
    }

    /// Flips `target` on every component whose `control` bit is set.
    pub fn apply_cnot(&self, control: usize, target: usize) -> Result<Self, QuantumError> {
        let cmask = self.mask(control)?;
        let tmask = self.mask(target)?;
        if control == target {
            return Err(QuantumError::SameQubit(control));
        }
        let amps = (0..self.dim())
            .map(|i| {
                if i & cmask != 0 {
                    self.amps[i ^ tmask]
                } else {
                    self.amps[i]
                }
            })
            .collect();
        Ok(Self::from_parts(self.n_qubits, amps))
    }

    /// Appends an ancilla `|0>` as the last qubit and applies CNOT from `control` onto it.
    pub fn apply_cnot_ancilla(&self, control: usize) -> Result<Self, QuantumError> {
        self.mask(control)?;
        if self.n_qubits + 1 > MAX_QUBITS {
            return Err(QuantumError::RegisterTooLarge(self.n_qubits + 1));
        }
        let extended = self.tensor(&StateVector::basis(1, 0)?)?;
        extended.apply_cnot(control, extended.n_qubits)
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() < TOLERANCE {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(
                f,
                "({:.6}{:+.6}i)|{:0width$b}>",
                a.re,
                a.im,
                i,
                width = self.n_qubits
            )?;
        }
        Ok(())
    }
}

/// The three-qubit GHZ state `(|000> + |111>)/√2`.
pub fn make_ghz() -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![Amplitude::new(0.0, 0.0); 8];
    amps[0] = Amplitude::new(h, 0.0);
    amps[7] = Amplitude::new(h, 0.0);
    StateVector::from_parts(3, amps)
}

pub fn apply_sigma_x(s: &StateVector, q: usize) -> Result<StateVector, QuantumError> {
    s.apply_sigma_x(q)
}

pub fn apply_cnot(
    s: &StateVector,
    control: usize,
    target: usize,
) -> Result<StateVector, QuantumError> {
    s.apply_cnot(control, target)
}

pub fn apply_cnot_ancilla(s: &StateVector, control: usize) -> Result<StateVector, QuantumError> {
    s.apply_cnot_ancilla(control)
}
