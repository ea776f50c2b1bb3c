use serde::{Deserialize, Serialize};

use super::state::{Amplitude, StateVector};
use super::{QuantumError, TOLERANCE};

/// Single-qubit density matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix2 {
    pub entries: [[Amplitude; 2]; 2],
}

impl DensityMatrix2 {
    pub fn maximally_mixed() -> Self {
        let half = Amplitude::new(0.5, 0.0);
        let zero = Amplitude::new(0.0, 0.0);
        Self {
            entries: [[half, zero], [zero, half]],
        }
    }

    pub fn trace(&self) -> Amplitude {
        self.entries[0][0] + self.entries[1][1]
    }

    /// Eigenvalues in ascending order, valid for Hermitian input.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.entries[0][0].re;
        let d = self.entries[1][1].re;
        let b = self.entries[0][1];
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - radius, mean + radius]
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self.entries[0][1] - self.entries[1][0].conj()).norm() <= tol
            && self.entries[0][0].im.abs() <= tol
            && self.entries[1][1].im.abs() <= tol
    }

    /// Hermitian, unit trace and positive semidefinite, all at `TOLERANCE`.
    pub fn is_valid(&self) -> bool {
        self.is_hermitian(TOLERANCE)
            && (self.trace() - Amplitude::new(1.0, 0.0)).norm() <= TOLERANCE
            && self.eigenvalues()[0] >= -TOLERANCE
    }

    pub fn distance(&self, other: &DensityMatrix2) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.entries[r][c] - other.entries[r][c]).norm());
            }
        }
        worst
    }
}

/// Partial trace over every qubit except `keep`.
pub fn reduced_density(s: &StateVector, keep: usize) -> Result<DensityMatrix2, QuantumError> {
    let mask = s.mask(keep)?;
    let amps = s.amplitudes();
    let mut entries = [[Amplitude::new(0.0, 0.0); 2]; 2];
    for rest in (0..s.dim()).filter(|i| i & mask == 0) {
        let pair = [amps[rest], amps[rest | mask]];
        for r in 0..2 {
            for c in 0..2 {
                entries[r][c] += pair[r] * pair[c].conj();
            }
        }
    }
    Ok(DensityMatrix2 { entries })
}
