//! Dense region-basis weight evolution (2^N masses).

use crate::circuit::Parity;
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::transfer::{check_rate, TransferLayer, WeightSchedule};

pub const MAX_EXACT_QUBITS: usize = 20;

/// Weight mass per support region: `masses[A] = Σ_{supp P = A} w(P)`,
/// indexed by the bitmask of `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionWeightVector {
    n_qubits: usize,
    masses: Vec<f64>,
    normalized: bool,
}

impl RegionWeightVector {
    /// `w_0(P) = δ_{P,1}`, the maximally mixed state.
    pub fn identity(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::param("need at least one qubit"));
        }
        if n_qubits > MAX_EXACT_QUBITS {
            return Err(Error::TooLarge { what: format!("exact weights on {n_qubits} qubits"), limit: MAX_EXACT_QUBITS });
        }
        let mut masses = vec![0.0; 1 << n_qubits];
        masses[0] = 1.0;
        Ok(Self { n_qubits, masses, normalized: true })
    }

    pub fn from_masses(n_qubits: usize, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != 1 << n_qubits {
            return Err(Error::param("mass vector length must be 2^N"));
        }
        if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::param("masses must be finite and non-negative"));
        }
        let normalized = (masses[0] - 1.0).abs() < 1e-15;
        Ok(Self { n_qubits, masses, normalized })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn apply_measurement(&mut self, p: f64) -> Result<()> {
        check_rate(p)?;
        let (a, b, c) = (p / 3.0, p, 1.0 - 2.0 * p / 3.0);
        for j in 0..self.n_qubits {
            let bit = 1 << j;
            for mask in 0..self.masses.len() {
                if mask & bit == 0 {
                    let (m0, m1) = (self.masses[mask], self.masses[mask | bit]);
                    self.masses[mask] = m0 + a * m1;
                    self.masses[mask | bit] = b * m0 + c * m1;
                }
            }
        }
        self.normalized = false;
        Ok(())
    }

    /// Applies the bond transfer on `(j, j+1)`.
    pub fn apply_bond(&mut self, j: usize) -> Result<()> {
        if j + 1 >= self.n_qubits {
            return Err(Error::InvalidBond(j, j + 1));
        }
        let (ba, bb) = (1 << j, 1 << (j + 1));
        for mask in 0..self.masses.len() {
            if mask & (ba | bb) == 0 {
                let s = self.masses[mask | ba] + self.masses[mask | bb] + self.masses[mask | ba | bb];
                self.masses[mask | ba] = 0.2 * s;
                self.masses[mask | bb] = 0.2 * s;
                self.masses[mask | ba | bb] = 0.6 * s;
            }
        }
        Ok(())
    }

    pub fn apply_unitary_layer(&mut self, parity: Parity) -> Result<()> {
        for j in (parity.offset()..self.n_qubits.saturating_sub(1)).step_by(2) {
            self.apply_bond(j)?;
        }
        Ok(())
    }

    pub fn apply(&mut self, schedule: &WeightSchedule) -> Result<()> {
        for layer in &schedule.layers {
            match *layer {
                TransferLayer::Measure(p) => self.apply_measurement(p)?,
                TransferLayer::Unitary(parity) => self.apply_unitary_layer(parity)?,
            }
        }
        Ok(())
    }

    /// Divides by `masses[∅]` (ratio of averages).
    pub fn normalize(&mut self) -> Result<()> {
        let m0 = self.masses[0];
        if !(m0 > 0.0) {
            return Err(Error::ZeroMass);
        }
        for m in &mut self.masses {
            *m /= m0;
        }
        self.normalized = true;
        Ok(())
    }

    /// `w(P)` for any `P` with support `mask`: `masses[mask] / 3^{|A|}`.
    pub fn query_weight(&self, mask: u64) -> Result<f64> {
        if !self.normalized {
            return Err(Error::Unnormalized);
        }
        if mask >> self.n_qubits != 0 {
            return Err(Error::param(format!("support mask {mask:#x} exceeds {} qubits", self.n_qubits)));
        }
        Ok(self.masses[mask as usize] / 3f64.powi(mask.count_ones() as i32))
    }

    pub fn weight_of(&self, p: &PauliString) -> Result<f64> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::LengthMismatch { left: p.n_qubits(), right: self.n_qubits });
        }
        self.query_weight(p.support_mask())
    }

    /// Weight of a consecutive support `start..start+k`.
    pub fn consecutive_weight(&self, start: usize, k: usize) -> Result<f64> {
        if start + k > self.n_qubits {
            return Err(Error::param(format!("support {start}..{} exceeds {} qubits", start + k, self.n_qubits)));
        }
        let mask = if k == 0 { 0 } else { ((1u64 << k) - 1) << start };
        self.query_weight(mask)
    }
}

/// Evolves `δ_{A,∅}` through `schedule` and normalizes.
pub fn evolve_exact(n_qubits: usize, schedule: &WeightSchedule) -> Result<RegionWeightVector> {
    let mut v = RegionWeightVector::identity(n_qubits)?;
    v.apply(schedule)?;
    v.normalize()?;
    Ok(v)
}

/// Result of a steady-state run.
#[derive(Clone, Debug)]
pub struct SteadyState<T> {
    pub weights: T,
    /// Number of unitary layers applied.
    pub depth: usize,
    pub converged: bool,
}

/// Applies double periods until the normalized masses change by less than
/// `tol` in max norm, or the depth reaches `max_depth` unitary layers.
pub fn evolve_exact_steady(n_qubits: usize, p: f64, tol: f64, max_depth: usize) -> Result<SteadyState<RegionWeightVector>> {
    let period = WeightSchedule::double_periods(1, p)?;
    let mut v = RegionWeightVector::identity(n_qubits)?;
    let mut prev = v.clone();
    let mut depth = 0;
    while depth < max_depth {
        v.apply(&period)?;
        depth += 2;
        // Rescale so the raw masses stay O(1); the normalized copy is compared.
        v.normalize()?;
        let delta = v.masses.iter().zip(&prev.masses).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if delta < tol {
            return Ok(SteadyState { weights: v, depth, converged: true });
        }
        prev = v.clone();
    }
    Ok(SteadyState { weights: v, depth, converged: false })
}
