//! Classical shadow tomography with hybrid random Clifford circuits.
//!
//! Shadows are sampled by stabilizer simulation of brick-wall circuits
//! interleaved with random single-qubit Pauli measurements, snapshots are
//! rebuilt by running the record backwards, and Pauli weights come from a
//! Markov transfer-matrix evolution (dense or MPS).

pub mod appendix;
pub mod circuit;
pub mod clifford;
pub mod dense;
pub mod error;
pub mod estimation;
pub mod pauli;
pub mod scaling;
pub mod shadow_io;
pub mod symplectic;
pub mod tableau;
pub mod transfer;
pub mod weights_exact;
pub mod weights_mps;

pub use circuit::{
    bonds, ghz_state, reconstruct_snapshot, run_forward, sample_circuit, Circuit, CircuitLayer, InitialStateSpec,
    MeasurementEvent, Parity, ShadowRecord, ShadowSampler,
};
pub use clifford::{gate_conjugate, random_two_qubit_clifford, CliffordGate2};
pub use error::{Error, Result};
pub use pauli::{pauli_commutes, pauli_multiply, Basis, PauliString, SignedPauli};
pub use shadow_io::{read_shadows, write_shadows};
pub use tableau::{measure_pauli, project_pauli, region_purity, trace_pauli, Measurement, Projection, StabilizerTableau};
pub use transfer::{meas_transfer, unitary_transfer, TransferLayer, WeightSchedule};
pub use weights_exact::{evolve_exact, RegionWeightVector};
pub use weights_mps::{evolve_mps, MpsParams, WeightMps};
