//! Region-basis transfer matrices and layer schedules for Pauli-weight
//! dynamics.
//!
//! Weight mass is tracked per support region. A measurement layer mixes the
//! identity and non-identity sectors of each site; a random two-qubit
//! Clifford spreads any non-empty support uniformly over the 15
//! non-identity Paulis of its bond.
//!
//! Weights of the prior snapshots are built up in the order the snapshot is
//! reconstructed, i.e. reverse time order: a circuit `[M_1, U_1, …, M_L, U_L]`
//! is applied as `U_L, M_L, …, U_1, M_1`.

use crate::circuit::Parity;
use crate::error::{Error, Result};

/// `[[1, p/3], [p, 1 - 2p/3]]` acting on `(identity mass, non-identity mass)`.
pub fn meas_transfer(p: f64) -> Result<[[f64; 2]; 2]> {
    check_rate(p)?;
    Ok([[1.0, p / 3.0], [p, 1.0 - 2.0 * p / 3.0]])
}

/// Bond transfer over regions `(∅, {a}, {b}, {a,b})` (bit 0 ↔ site a).
pub fn unitary_transfer() -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    m[0][0] = 1.0;
    for col in 1..4 {
        m[1][col] = 0.2;
        m[2][col] = 0.2;
        m[3][col] = 0.6;
    }
    m
}

pub(crate) fn check_rate(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("measurement rate {p} outside [0, 1]")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TransferLayer {
    /// Measurement layer with rate `p` on every site.
    Measure(f64),
    /// Bond layer of the given parity.
    Unitary(Parity),
}

/// Transfer layers in application order (reverse circuit time).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSchedule {
    pub layers: Vec<TransferLayer>,
}

impl WeightSchedule {
    pub fn new(layers: Vec<TransferLayer>) -> Result<Self> {
        for l in &layers {
            if let TransferLayer::Measure(p) = l {
                check_rate(*p)?;
            }
        }
        Ok(Self { layers })
    }

    /// The hybrid circuit with `n_unitary_layers` periods `[M, U]`, unitary
    /// layer `l` on the parity of `l`.
    pub fn for_circuit(n_unitary_layers: usize, p: f64) -> Result<Self> {
        check_rate(p)?;
        let mut layers = Vec::with_capacity(2 * n_unitary_layers);
        for l in (1..=n_unitary_layers).rev() {
            layers.push(TransferLayer::Unitary(Parity::of_layer(l)));
            layers.push(TransferLayer::Measure(p));
        }
        Ok(Self { layers })
    }

    /// `n` repetitions of the two-layer period `[U_even, M, U_odd, M]`; the
    /// same as [`for_circuit`](Self::for_circuit) with `2n` unitary layers.
    pub fn double_periods(n: usize, p: f64) -> Result<Self> {
        Self::for_circuit(2 * n, p)
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }
}
