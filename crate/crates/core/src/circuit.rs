//! Hybrid brick-wall circuits: sampling, forward execution and backward
//! snapshot reconstruction.
//!
//! A circuit with `L` unitary layers is the sequence `[M_1, U_1, …, M_L, U_L]`
//! in time order. Unitary layer `l` (counted from 1) acts on the bonds
//! `(2i-1, 2i)` in 1-based site labels when `l` is odd and on `(2i, 2i+1)`
//! when `l` is even, with open boundaries. In 0-based qubit indices the odd
//! layers use `(0,1), (2,3), …` and the even layers `(1,2), (3,4), …`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{random_two_qubit_clifford, CliffordGate2};
use crate::error::{Error, Result};
use crate::pauli::Basis;
use crate::tableau::{Projection, StabilizerTableau};

/// Bond pattern of a unitary layer, named in the 1-based site convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    /// Parity of the unitary layer with 1-based index `l`.
    pub fn of_layer(l: usize) -> Self {
        if l % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    /// Offset of the first bond's left qubit in 0-based indexing.
    pub fn offset(self) -> usize {
        match self {
            Parity::Odd => 0,
            Parity::Even => 1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Parity::Odd => Parity::Even,
            Parity::Even => Parity::Odd,
        }
    }
}

/// 0-based bonds `(a, a+1)` covered by a layer of the given parity.
pub fn bonds(n_qubits: usize, parity: Parity) -> Vec<(usize, usize)> {
    (parity.offset()..n_qubits.saturating_sub(1))
        .step_by(2)
        .map(|a| (a, a + 1))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasurementEvent {
    pub qubit: usize,
    pub basis: Basis,
    pub outcome: Option<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CircuitLayer {
    Measurement(Vec<MeasurementEvent>),
    /// `gates[i]` acts on `bonds(n, parity)[i]`.
    Unitary { parity: Parity, gates: Vec<CliffordGate2> },
}

impl CircuitLayer {
    pub fn is_measurement(&self) -> bool {
        matches!(self, CircuitLayer::Measurement(_))
    }
}

/// A circuit realization, with or without recorded outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub p: f64,
    pub layers: Vec<CircuitLayer>,
}

impl Circuit {
    pub fn n_events(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                CircuitLayer::Measurement(ev) => ev.len(),
                CircuitLayer::Unitary { .. } => 0,
            })
            .sum()
    }

    /// Checks bond coverage, qubit ranges and the `[M, U]` alternation.
    pub fn validate(&self) -> Result<()> {
        validate_layers(self.n_qubits, &self.layers)
    }
}

pub(crate) fn validate_layers(n: usize, layers: &[CircuitLayer]) -> Result<()> {
    for (i, layer) in layers.iter().enumerate() {
        if layer.is_measurement() != (i % 2 == 0) {
            return Err(Error::param(format!("layer {i}: layers must alternate measurement/unitary")));
        }
        match layer {
            CircuitLayer::Measurement(events) => {
                let mut seen = vec![false; n];
                for e in events {
                    if e.qubit >= n {
                        return Err(Error::InvalidQubit { index: e.qubit, n_qubits: n });
                    }
                    if std::mem::replace(&mut seen[e.qubit], true) {
                        return Err(Error::param(format!("layer {i}: qubit {} measured twice", e.qubit)));
                    }
                    if e.outcome.is_some_and(|b| b > 1) {
                        return Err(Error::param(format!("layer {i}: outcome must be 0 or 1")));
                    }
                }
            }
            CircuitLayer::Unitary { parity, gates } => {
                let want = bonds(n, *parity).len();
                if gates.len() != want {
                    return Err(Error::param(format!(
                        "layer {i}: {} gates for {want} bonds",
                        gates.len()
                    )));
                }
                let expected = Parity::of_layer(i / 2 + 1);
                if *parity != expected {
                    return Err(Error::param(format!("layer {i}: expected {expected} bonds")));
                }
            }
        }
    }
    Ok(())
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Odd => "odd",
            Parity::Even => "even",
        })
    }
}

/// Samples `n_unitary_layers` periods of `[measurement, unitary]`.
pub fn sample_circuit<R: Rng + ?Sized>(n_qubits: usize, n_unitary_layers: usize, p: f64, rng: &mut R) -> Result<Circuit> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("measurement rate {p} outside [0, 1]")));
    }
    if n_qubits == 0 {
        return Err(Error::param("circuit needs at least one qubit"));
    }
    let mut layers = Vec::with_capacity(2 * n_unitary_layers);
    for l in 1..=n_unitary_layers {
        let mut events = Vec::new();
        for q in 0..n_qubits {
            if rng.random::<f64>() < p {
                let basis = Basis::ALL[rng.random_range(0..3)];
                events.push(MeasurementEvent { qubit: q, basis, outcome: None });
            }
        }
        layers.push(CircuitLayer::Measurement(events));
        let parity = Parity::of_layer(l);
        let gates = bonds(n_qubits, parity).iter().map(|_| random_two_qubit_clifford(rng)).collect();
        layers.push(CircuitLayer::Unitary { parity, gates });
    }
    Ok(Circuit { n_qubits, p, layers })
}

/// Input state of a forward run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitialStateSpec {
    Ghz,
    Zero,
    Plus,
    /// The maximally mixed state; sampling with it draws from the prior ensemble.
    Mixed,
    /// Explicit signed generators such as `+XX`.
    Stabilizers(Vec<String>),
}

impl InitialStateSpec {
    pub fn tableau(&self, n: usize) -> Result<StabilizerTableau> {
        match self {
            InitialStateSpec::Ghz => StabilizerTableau::ghz(n),
            InitialStateSpec::Zero => Ok(StabilizerTableau::zero_state(n)),
            InitialStateSpec::Plus => Ok(StabilizerTableau::plus_state(n)),
            InitialStateSpec::Mixed => Ok(StabilizerTableau::maximally_mixed(n)),
            InitialStateSpec::Stabilizers(g) => {
                let t = StabilizerTableau::from_labels(n, g)?;
                if !t.is_pure() {
                    return Err(Error::param(format!("{} generators do not fix a pure state on {n} qubits", g.len())));
                }
                Ok(t)
            }
        }
    }
}

impl fmt::Display for InitialStateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialStateSpec::Ghz => f.write_str("ghz"),
            InitialStateSpec::Zero => f.write_str("zero"),
            InitialStateSpec::Plus => f.write_str("plus"),
            InitialStateSpec::Mixed => f.write_str("mixed"),
            InitialStateSpec::Stabilizers(g) => write!(f, "stabilizers:{}", g.join(",")),
        }
    }
}

impl FromStr for InitialStateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ghz" => InitialStateSpec::Ghz,
            "zero" => InitialStateSpec::Zero,
            "plus" => InitialStateSpec::Plus,
            "mixed" => InitialStateSpec::Mixed,
            _ => match s.strip_prefix("stabilizers:") {
                Some(rest) => InitialStateSpec::Stabilizers(rest.split(',').map(str::to_owned).collect()),
                None => return Err(Error::param(format!("unknown initial state {s:?}"))),
            },
        })
    }
}

/// One executed shot: the circuit realization together with its outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadowRecord {
    pub n_qubits: usize,
    pub p: f64,
    pub master_seed: u64,
    pub shot_index: u64,
    pub initial_state: String,
    pub layers: Vec<CircuitLayer>,
}

impl ShadowRecord {
    pub fn is_executed(&self) -> bool {
        self.layers.iter().all(|l| match l {
            CircuitLayer::Measurement(ev) => ev.iter().all(|e| e.outcome.is_some()),
            CircuitLayer::Unitary { .. } => true,
        })
    }

    pub fn n_events(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                CircuitLayer::Measurement(ev) => ev.len(),
                CircuitLayer::Unitary { .. } => 0,
            })
            .sum()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-shot seed: `splitmix64(master ⊕ splitmix64(shot))`.
pub fn shot_seed(master_seed: u64, shot_index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(shot_index))
}

pub fn shot_rng(master_seed: u64, shot_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(shot_seed(master_seed, shot_index))
}

/// Runs the circuit on `state` in time order, sampling every outcome by the
/// Born rule. Returns the executed layers and the final state.
pub fn run_forward<R: Rng + ?Sized>(
    state: &StabilizerTableau,
    circuit: &Circuit,
    rng: &mut R,
) -> Result<(Vec<CircuitLayer>, StabilizerTableau)> {
    if state.n_qubits() != circuit.n_qubits {
        return Err(Error::LengthMismatch { left: state.n_qubits(), right: circuit.n_qubits });
    }
    let n = circuit.n_qubits;
    let mut t = state.clone();
    let mut layers = Vec::with_capacity(circuit.layers.len());
    for layer in &circuit.layers {
        match layer {
            CircuitLayer::Measurement(events) => {
                let mut done = Vec::with_capacity(events.len());
                for e in events {
                    if e.outcome.is_some() {
                        return Err(Error::param("circuit already carries outcomes"));
                    }
                    let m = t.measure(e.qubit, e.basis, rng)?;
                    done.push(MeasurementEvent { outcome: Some(m.outcome), ..*e });
                }
                layers.push(CircuitLayer::Measurement(done));
            }
            CircuitLayer::Unitary { parity, gates } => {
                for (g, (a, b)) in gates.iter().zip(bonds(n, *parity)) {
                    t.apply_gate(g, a, b)?;
                }
                layers.push(layer.clone());
            }
        }
    }
    Ok((layers, t))
}

/// Shot generator for one experimental configuration.
#[derive(Clone, Debug)]
pub struct ShadowSampler {
    pub n_qubits: usize,
    pub n_unitary_layers: usize,
    pub p: f64,
    pub initial_state: InitialStateSpec,
}

impl ShadowSampler {
    pub fn new(n_qubits: usize, n_unitary_layers: usize, p: f64, initial_state: InitialStateSpec) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(format!("measurement rate {p} outside [0, 1]")));
        }
        if n_qubits == 0 {
            return Err(Error::param("need at least one qubit"));
        }
        initial_state.tableau(n_qubits)?;
        Ok(Self { n_qubits, n_unitary_layers, p, initial_state })
    }

    /// Deterministic in `(master_seed, shot_index)`.
    pub fn shot(&self, master_seed: u64, shot_index: u64) -> Result<ShadowRecord> {
        let mut rng = shot_rng(master_seed, shot_index);
        let circuit = sample_circuit(self.n_qubits, self.n_unitary_layers, self.p, &mut rng)?;
        let state = self.initial_state.tableau(self.n_qubits)?;
        let (layers, _) = run_forward(&state, &circuit, &mut rng)?;
        Ok(ShadowRecord {
            n_qubits: self.n_qubits,
            p: self.p,
            master_seed,
            shot_index,
            initial_state: self.initial_state.to_string(),
            layers,
        })
    }

    /// Shots `first..first+count` in index order, computed in parallel.
    pub fn shots(&self, master_seed: u64, first: u64, count: u64) -> Result<Vec<ShadowRecord>> {
        (first..first + count)
            .into_par_iter()
            .map(|i| self.shot(master_seed, i))
            .collect()
    }
}

/// Classical snapshot of a record plus the number of projections that
/// halved `Tr(K†K)`, so `p(b|𝒞) = 2^{-halvings}` for the prior ensemble.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub state: StabilizerTableau,
    pub halvings: usize,
}

/// Backward pass from the maximally mixed state: unitary layers are undone
/// by conjugation `U† · U`, measurement events become projections.
pub fn reconstruct_layers(n: usize, layers: &[CircuitLayer]) -> Result<Snapshot> {
    let mut t = StabilizerTableau::maximally_mixed(n);
    let mut halvings = 0;
    for layer in layers.iter().rev() {
        match layer {
            CircuitLayer::Measurement(events) => {
                for e in events.iter().rev() {
                    let b = e
                        .outcome
                        .ok_or_else(|| Error::param(format!("qubit {} has no recorded outcome", e.qubit)))?;
                    if t.project(e.qubit, e.basis, b)? != Projection::Unchanged {
                        halvings += 1;
                    }
                }
            }
            CircuitLayer::Unitary { parity, gates } => {
                let bonds = bonds(n, *parity);
                if bonds.len() != gates.len() {
                    return Err(Error::param("gate count does not match bond count"));
                }
                for (g, (a, b)) in gates.iter().zip(bonds) {
                    t.apply_gate_inverse(g, a, b)?;
                }
            }
        }
    }
    Ok(Snapshot { state: t, halvings })
}

/// The classical snapshot `σ_{b|𝒞} = K†K / Tr(K†K)` as a stabilizer state.
pub fn reconstruct_snapshot(record: &ShadowRecord) -> Result<StabilizerTableau> {
    Ok(reconstruct_layers(record.n_qubits, &record.layers)?.state)
}

pub fn ghz_state(n_qubits: usize) -> Result<StabilizerTableau> {
    StabilizerTableau::ghz(n_qubits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;

    #[test]
    fn bond_patterns() {
        assert_eq!(bonds(5, Parity::Odd), vec![(0, 1), (2, 3)]);
        assert_eq!(bonds(5, Parity::Even), vec![(1, 2), (3, 4)]);
        assert_eq!(bonds(4, Parity::Even), vec![(1, 2)]);
        assert!(bonds(1, Parity::Odd).is_empty());
        assert_eq!(Parity::of_layer(1), Parity::Odd);
        assert_eq!(Parity::of_layer(2), Parity::Even);
    }

    #[test]
    fn extreme_rates() {
        let mut rng = shot_rng(1, 0);
        let c = sample_circuit(6, 4, 0.0, &mut rng).unwrap();
        assert_eq!(c.n_events(), 0);
        let c = sample_circuit(6, 4, 1.0, &mut rng).unwrap();
        assert_eq!(c.n_events(), 24);
        c.validate().unwrap();
        assert!(sample_circuit(6, 4, 1.5, &mut rng).is_err());
    }

    #[test]
    fn determinism() {
        let s = ShadowSampler::new(8, 3, 0.4, InitialStateSpec::Ghz).unwrap();
        assert_eq!(s.shot(9, 17).unwrap(), s.shot(9, 17).unwrap());
        assert_ne!(s.shot(9, 17).unwrap(), s.shot(9, 18).unwrap());
        assert_ne!(shot_seed(1, 2), shot_seed(2, 1));
    }

    #[test]
    fn zero_state_first_layer() {
        let s = ShadowSampler::new(6, 2, 1.0, InitialStateSpec::Zero).unwrap();
        for i in 0..50 {
            let r = s.shot(3, i).unwrap();
            let CircuitLayer::Measurement(ev) = &r.layers[0] else { unreachable!() };
            for e in ev.iter().filter(|e| e.basis == Basis::Z) {
                assert_eq!(e.outcome, Some(0));
            }
        }
    }

    #[test]
    fn empty_record_gives_mixed_state() {
        let s = ShadowSampler::new(4, 3, 0.0, InitialStateSpec::Plus).unwrap();
        let snap = reconstruct_snapshot(&s.shot(0, 0).unwrap()).unwrap();
        assert_eq!(snap.rank(), 0);
    }

    #[test]
    fn single_layer_product_snapshot() {
        let s = ShadowSampler::new(5, 1, 1.0, InitialStateSpec::Ghz).unwrap();
        let mut rec = s.shot(4, 2).unwrap();
        rec.layers.truncate(1);
        let snap = reconstruct_snapshot(&rec).unwrap();
        assert_eq!(snap.rank(), 5);
        let CircuitLayer::Measurement(ev) = &rec.layers[0] else { unreachable!() };
        for e in ev {
            let p = PauliString::single(5, e.qubit, e.basis).unwrap();
            let sign = if e.outcome == Some(1) { -1 } else { 1 };
            assert_eq!(snap.trace_pauli(&p).unwrap(), sign);
        }
    }

    #[test]
    fn state_labels_roundtrip() {
        for s in ["ghz", "zero", "plus", "mixed", "stabilizers:+XX,-ZZ"] {
            assert_eq!(s.parse::<InitialStateSpec>().unwrap().to_string(), s);
        }
        assert!("bell".parse::<InitialStateSpec>().is_err());
        let bad: InitialStateSpec = "stabilizers:+XX".parse().unwrap();
        assert!(bad.tableau(2).is_err());
    }
}
