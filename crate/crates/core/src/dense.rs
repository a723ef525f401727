//! Brute-force density-matrix reference for a handful of qubits.
//!
//! Qubit `j` is bit `j` of the computational-basis index. Everything here is
//! written for clarity over speed and is meant to cross-check the stabilizer
//! and weight engines.

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::circuit::{bonds, Circuit, CircuitLayer, MeasurementEvent};
use crate::clifford::CliffordGate2;
use crate::error::{Error, Result};
use crate::pauli::{Basis, PauliString, SignedPauli};
use crate::tableau::StabilizerTableau;

pub const MAX_QUBITS: usize = 6;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

fn check_size(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::TooLarge { what: format!("dense oracle with {n} qubits"), limit: MAX_QUBITS });
    }
    Ok(())
}

fn single(b: Option<Basis>) -> Array2<C64> {
    let m = match b {
        None => [[ONE, ZERO], [ZERO, ONE]],
        Some(Basis::X) => [[ZERO, ONE], [ONE, ZERO]],
        Some(Basis::Y) => [[ZERO, -I], [I, ZERO]],
        Some(Basis::Z) => [[ONE, ZERO], [ZERO, -ONE]],
    };
    Array2::from_shape_fn((2, 2), |(i, j)| m[i][j])
}

/// Kronecker product `a ⊗ b` with `b` on the low-order bits.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            out.slice_mut(s![i * rb..(i + 1) * rb, j * cb..(j + 1) * cb]).assign(&(b * a[[i, j]]));
        }
    }
    out
}

/// Matrix of a Pauli string built from the literal 2×2 factors.
pub fn pauli_matrix(p: &PauliString) -> Array2<C64> {
    let mut out = Array2::from_elem((1, 1), ONE);
    for j in 0..p.n_qubits() {
        out = kron(&single(p.site(j)), &out);
    }
    out
}

pub fn signed_pauli_matrix(p: &SignedPauli) -> Array2<C64> {
    pauli_matrix(p.pauli()) * I.powu(p.phase() as u32)
}

/// `Tr(P m)` using `P|j⟩ = i^{#Y} (-1)^{|j ∧ z|} |j ⊕ x⟩`.
pub fn pauli_trace(p: &PauliString, m: &Array2<C64>) -> C64 {
    let n = p.n_qubits();
    let (mut x, mut z, mut n_y) = (0usize, 0usize, 0u32);
    for j in 0..n {
        x |= (p.x(j) as usize) << j;
        z |= (p.z(j) as usize) << j;
        n_y += (p.x(j) && p.z(j)) as u32;
    }
    let phase = I.powu(n_y);
    (0..1usize << n)
        .map(|j| {
            let sign = if (j & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m[[j, j ^ x]] * sign
        })
        .sum::<C64>()
        * phase
}

/// Pauli on `n` qubits from its index `x_mask | z_mask << n`.
pub fn pauli_from_index(n: usize, idx: usize) -> PauliString {
    let mut p = PauliString::identity(n);
    for j in 0..n {
        p.set(j, (idx >> j) & 1 == 1, (idx >> (n + j)) & 1 == 1);
    }
    p
}

pub fn identity(dim: usize) -> Array2<C64> {
    Array2::from_diag_elem(dim, ONE)
}

/// `M†`.
pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|c| c.conj())
}

pub fn trace(m: &Array2<C64>) -> C64 {
    m.diag().sum()
}

/// 4×4 unitary of a gate, fixed up to a global phase.
///
/// Forward images `V_k = U G_k U†` determine `U`: its first column spans the
/// joint +1 eigenspace of `V(Z⊗I)` and `V(I⊗Z)`, and column `|ab⟩` is
/// `V(X⊗I)^a V(I⊗X)^b` applied to it.
pub fn gate_unitary(g: &CliffordGate2) -> Array2<C64> {
    let fwd = |label: &str| {
        let p: SignedPauli = label.parse().expect("literal");
        signed_pauli_matrix(&g.conjugate_forward(&p, (0, 1)).expect("two-qubit bond"))
    };
    let (xa, za, xb, zb) = (fwd("+XI"), fwd("+ZI"), fwd("+IX"), fwd("+IZ"));
    let id = identity(4);
    let proj = (&id + &za).dot(&(&id + &zb)) * C64::new(0.25, 0.0);
    let col = (0..4)
        .map(|j| proj.column(j).to_owned())
        .max_by(|a, b| norm(a.iter()).total_cmp(&norm(b.iter())))
        .expect("four columns");
    let psi = &col / C64::new(norm(col.iter()), 0.0);
    let mut u = Array2::zeros((4, 4));
    for a in 0..2 {
        for b in 0..2 {
            let mut v = psi.clone();
            if a == 1 {
                v = xa.dot(&v);
            }
            if b == 1 {
                v = xb.dot(&v);
            }
            u.column_mut(a + 2 * b).assign(&v);
        }
    }
    u
}

fn norm<'a>(it: impl Iterator<Item = &'a C64>) -> f64 {
    it.map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Embeds a 4×4 operator on qubits `(a, b)` (a ↔ low bit of the 4×4 index).
pub fn embed_two_qubit(n: usize, op: &Array2<C64>, a: usize, b: usize) -> Array2<C64> {
    let dim = 1usize << n;
    let mut out = Array2::zeros((dim, dim));
    let mask = (1 << a) | (1 << b);
    for col in 0..dim {
        let c_local = ((col >> a) & 1) | (((col >> b) & 1) << 1);
        let rest = col & !mask;
        for r_local in 0..4 {
            let row = rest | ((r_local & 1) << a) | (((r_local >> 1) & 1) << b);
            out[[row, col]] = op[[r_local, c_local]];
        }
    }
    out
}

/// Projector `(1 + (-1)^outcome P)/2` for a single-site Pauli.
pub fn projector(n: usize, site: usize, basis: Basis, outcome: u8) -> Array2<C64> {
    let p = pauli_matrix(&PauliString::single(n, site, basis).expect("site in range"));
    let sign = if outcome == 1 { -0.5 } else { 0.5 };
    (identity(1 << n) * C64::new(0.5, 0.0)) + p * C64::new(sign, 0.0)
}

/// A density matrix on at most [`MAX_QUBITS`] qubits.
#[derive(Clone, Debug)]
pub struct DenseState {
    pub n_qubits: usize,
    pub matrix: Array2<C64>,
}

impl DenseState {
    pub fn new(n_qubits: usize, matrix: Array2<C64>) -> Result<Self> {
        check_size(n_qubits)?;
        let dim = 1 << n_qubits;
        if matrix.dim() != (dim, dim) {
            return Err(Error::param("density matrix has the wrong shape"));
        }
        let herm = (&matrix - &dagger(&matrix)).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if herm > 1e-12 || (trace(&matrix) - ONE).norm() > 1e-12 {
            return Err(Error::param("density matrix must be Hermitian with unit trace"));
        }
        Ok(Self { n_qubits, matrix })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_size(n)?;
        Ok(Self { n_qubits: n, matrix: identity(1 << n) / C64::new((1 << n) as f64, 0.0) })
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn pure(n: usize, amps: &[C64]) -> Result<Self> {
        check_size(n)?;
        if amps.len() != 1 << n {
            return Err(Error::param("state vector has the wrong length"));
        }
        let dim = amps.len();
        let m = Array2::from_shape_fn((dim, dim), |(i, j)| amps[i] * amps[j].conj());
        Self::new(n, m)
    }

    /// `2^{-N} ∏_i (1 + g_i)`.
    pub fn from_tableau(t: &StabilizerTableau) -> Result<Self> {
        let n = t.n_qubits();
        check_size(n)?;
        let dim = 1 << n;
        let mut m = identity(dim);
        for g in t.generators() {
            m = m.dot(&(identity(dim) + signed_pauli_matrix(g)));
        }
        Ok(Self { n_qubits: n, matrix: m / C64::new(dim as f64, 0.0) })
    }

    /// `Tr(Pρ)` (real for Hermitian ρ).
    pub fn expectation(&self, p: &PauliString) -> f64 {
        pauli_trace(p, &self.matrix).re
    }

    /// Reduced density matrix on `region` (sorted order defines bit order).
    pub fn reduced(&self, region: &[usize]) -> Array2<C64> {
        let n = self.n_qubits;
        let keep = region.len();
        let others: Vec<usize> = (0..n).filter(|q| !region.contains(q)).collect();
        let compose = |a: usize, e: usize| {
            let mut idx = 0;
            for (k, &q) in region.iter().enumerate() {
                idx |= ((a >> k) & 1) << q;
            }
            for (k, &q) in others.iter().enumerate() {
                idx |= ((e >> k) & 1) << q;
            }
            idx
        };
        let mut out = Array2::zeros((1 << keep, 1 << keep));
        for i in 0..1 << keep {
            for j in 0..1 << keep {
                out[[i, j]] = (0..1 << others.len())
                    .map(|e| self.matrix[[compose(i, e), compose(j, e)]])
                    .sum();
            }
        }
        out
    }

    /// `Tr(ρ_A²)` via an explicit partial trace.
    pub fn region_purity(&self, region: &[usize]) -> f64 {
        let r = self.reduced(region);
        trace(&r.dot(&r)).re
    }
}

/// Kraus operator `K_{b|𝒞}` of an executed layer list, in time order.
pub fn kraus_operator(n: usize, layers: &[CircuitLayer]) -> Result<Array2<C64>> {
    check_size(n)?;
    let mut k = identity(1 << n);
    for layer in layers {
        match layer {
            CircuitLayer::Measurement(events) => {
                for e in events {
                    let b = e.outcome.ok_or_else(|| Error::param("missing outcome"))?;
                    k = projector(n, e.qubit, e.basis, b).dot(&k);
                }
            }
            CircuitLayer::Unitary { parity, gates } => {
                for (g, (a, b)) in gates.iter().zip(bonds(n, *parity)) {
                    k = embed_two_qubit(n, &gate_unitary(g), a, b).dot(&k);
                }
            }
        }
    }
    Ok(k)
}

/// Result of running a fixed record through the dense channel.
#[derive(Clone, Debug)]
pub struct ChannelOutput {
    /// `p(b|ρ,𝒞) = Tr(K ρ K†)`.
    pub probability: f64,
    /// `σ = K†K / Tr(K†K)`.
    pub snapshot: Array2<C64>,
    /// `p(b|𝒞) = Tr(K†K) / 2^N`, the prior probability.
    pub prior_probability: f64,
}

pub fn channel_apply(rho: &DenseState, layers: &[CircuitLayer]) -> Result<ChannelOutput> {
    let n = rho.n_qubits;
    let k = kraus_operator(n, layers)?;
    let kd = dagger(&k);
    let probability = trace(&k.dot(&rho.matrix).dot(&kd)).re;
    let kk = kd.dot(&k);
    let norm = trace(&kk).re;
    if norm < 1e-12 {
        return Err(Error::Contradiction { pauli: "record".into() });
    }
    Ok(ChannelOutput {
        probability,
        snapshot: kk / C64::new(norm, 0.0),
        prior_probability: norm / (1u64 << n) as f64,
    })
}

/// All `2^E` outcome assignments of a circuit's measurement events.
pub fn enumerate_outcomes(circuit: &Circuit) -> Vec<Vec<CircuitLayer>> {
    let e = circuit.n_events();
    (0..1usize << e)
        .map(|bits| {
            let mut k = 0;
            circuit
                .layers
                .iter()
                .map(|l| match l {
                    CircuitLayer::Measurement(ev) => CircuitLayer::Measurement(
                        ev.iter()
                            .map(|ev| {
                                let b = ((bits >> k) & 1) as u8;
                                k += 1;
                                MeasurementEvent { outcome: Some(b), ..*ev }
                            })
                            .collect(),
                    ),
                    u => u.clone(),
                })
                .collect()
        })
        .collect()
}

/// Samples outcomes for `circuit` on `rho` by the dense Born rule and
/// returns the executed layers with the final snapshot.
pub fn sample_dense<R: Rng + ?Sized>(
    rho: &DenseState,
    circuit: &Circuit,
    rng: &mut R,
) -> Result<(Vec<CircuitLayer>, Array2<C64>)> {
    let n = rho.n_qubits;
    let mut state = rho.matrix.clone();
    let mut k = identity(1 << n);
    let mut layers = Vec::with_capacity(circuit.layers.len());
    for layer in &circuit.layers {
        match layer {
            CircuitLayer::Measurement(events) => {
                let mut done = Vec::with_capacity(events.len());
                for e in events {
                    let p0 = projector(n, e.qubit, e.basis, 0);
                    let prob0 = trace(&p0.dot(&state)).re;
                    let b = (rng.random::<f64>() >= prob0) as u8;
                    let proj = if b == 0 { p0 } else { projector(n, e.qubit, e.basis, 1) };
                    let pb = if b == 0 { prob0 } else { 1.0 - prob0 };
                    state = proj.dot(&state).dot(&proj) / C64::new(pb, 0.0);
                    k = proj.dot(&k);
                    done.push(MeasurementEvent { outcome: Some(b), ..*e });
                }
                layers.push(CircuitLayer::Measurement(done));
            }
            CircuitLayer::Unitary { parity, gates } => {
                for (g, (a, b)) in gates.iter().zip(bonds(n, *parity)) {
                    let u = embed_two_qubit(n, &gate_unitary(g), a, b);
                    state = u.dot(&state).dot(&dagger(&u));
                    k = u.dot(&k);
                }
                layers.push(layer.clone());
            }
        }
    }
    let kk = dagger(&k).dot(&k);
    let norm = trace(&kk).re;
    Ok((layers, kk / C64::new(norm, 0.0)))
}

/// Monte-Carlo Pauli weights of the prior ensemble, per Pauli index.
#[derive(Clone, Debug)]
pub struct McWeights {
    pub n_qubits: usize,
    pub shots: usize,
    /// Mean of `Tr(Pσ)²`, indexed by [`pauli_from_index`] order.
    pub mean: Vec<f64>,
    /// Standard error of each mean.
    pub std_error: Vec<f64>,
}

impl McWeights {
    pub fn weight(&self, p: &PauliString) -> f64 {
        self.mean[pauli_index(p)]
    }

    /// Average weight of the Paulis with support exactly `mask`.
    pub fn weight_by_support(&self, mask: u64) -> (f64, f64) {
        let n = self.n_qubits;
        let idx: Vec<usize> = (0..1usize << (2 * n))
            .filter(|&i| ((i | (i >> n)) & ((1 << n) - 1)) as u64 == mask)
            .collect();
        let k = idx.len() as f64;
        let mean = idx.iter().map(|&i| self.mean[i]).sum::<f64>() / k;
        let se = idx.iter().map(|&i| self.std_error[i].powi(2)).sum::<f64>().sqrt() / k;
        (mean, se)
    }
}

pub fn pauli_index(p: &PauliString) -> usize {
    let n = p.n_qubits();
    (0..n).map(|j| (p.x(j) as usize) << j | (p.z(j) as usize) << (n + j)).sum()
}

/// `E_prior Tr(Pσ)²` for every Pauli, sampling circuits of `n_layers`
/// periods and outcomes on the maximally mixed input, all densely.
pub fn mc_pauli_weight<R: Rng + ?Sized>(
    n: usize,
    n_layers: usize,
    p: f64,
    shots: usize,
    rng: &mut R,
) -> Result<McWeights> {
    check_size(n)?;
    let rho = DenseState::maximally_mixed(n)?;
    let n_paulis = 1usize << (2 * n);
    let paulis: Vec<PauliString> = (0..n_paulis).map(|i| pauli_from_index(n, i)).collect();
    let mut sum = vec![0.0; n_paulis];
    let mut sum_sq = vec![0.0; n_paulis];
    for _ in 0..shots {
        let circuit = crate::circuit::sample_circuit(n, n_layers, p, rng)?;
        let (_, sigma) = sample_dense(&rho, &circuit, rng)?;
        for (i, q) in paulis.iter().enumerate() {
            let t = pauli_trace(q, &sigma).re;
            let t2 = t * t;
            sum[i] += t2;
            sum_sq[i] += t2 * t2;
        }
    }
    let m = shots as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let std_error = mean
        .iter()
        .zip(&sum_sq)
        .map(|(mu, s2)| ((s2 / m - mu * mu).max(0.0) / (m - 1.0).max(1.0)).sqrt())
        .collect();
    Ok(McWeights { n_qubits: n, shots, mean, std_error })
}

/// Monte-Carlo check that the measurement channel is diagonal in the Pauli
/// basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelReport {
    pub n_qubits: usize,
    pub shots: usize,
    /// Largest `|E Tr(Pσ)Tr(P'σ)|` over `P ≠ P'`.
    pub max_offdiag: f64,
    /// Largest off-diagonal `|mean| / std_error` among entries with spread.
    pub max_offdiag_z: f64,
    /// Off-diagonal entries with nonzero spread (the ones `max_offdiag_z` ranges over).
    pub offdiag_tested: usize,
    /// Off-diagonal entries that are nonzero in every sample (never noise).
    pub rigid_offdiag: usize,
    /// Largest `|E Tr(Pσ)² - w(P)|` against the Markov weights.
    pub max_diag_dev: f64,
    /// The same deviation in units of the Monte-Carlo error.
    pub max_diag_z: f64,
}

/// Estimates `M̂[P, P'] = E Tr(Pσ)Tr(P'σ)` over `shots` prior snapshots of
/// circuits with `n_layers` periods. Snapshots are stabilizer states, so
/// only members of each stabilizer group contribute.
pub fn verify_measurement_channel(n: usize, n_layers: usize, p: f64, shots: usize, seed: u64) -> Result<ChannelReport> {
    const MAX_CHANNEL_QUBITS: usize = 4;
    if n > MAX_CHANNEL_QUBITS {
        return Err(Error::TooLarge { what: format!("channel check on {n} qubits"), limit: MAX_CHANNEL_QUBITS });
    }
    if shots < 2 {
        return Err(Error::param("need at least two shots"));
    }
    let sampler =
        crate::circuit::ShadowSampler::new(n, n_layers, p, crate::circuit::InitialStateSpec::Mixed)?;
    let d = 1usize << (2 * n);
    let mut sum = vec![0.0; d * d];
    let mut sum_sq = vec![0.0; d * d];
    for i in 0..shots as u64 {
        let sigma = crate::circuit::reconstruct_snapshot(&sampler.shot(seed, i)?)?;
        let group: Vec<(usize, f64)> = sigma
            .stabilizer_group()?
            .iter()
            .map(|g| (pauli_index(g.pauli()), if g.is_negative() { -1.0 } else { 1.0 }))
            .collect();
        for &(a, sa) in &group {
            for &(b, sb) in &group {
                let v = sa * sb;
                sum[a * d + b] += v;
                sum_sq[a * d + b] += v * v;
            }
        }
    }
    let m = shots as f64;
    let weights = crate::weights_exact::evolve_exact(n, &crate::transfer::WeightSchedule::for_circuit(n_layers, p)?)?;
    let mut report = ChannelReport {
        n_qubits: n,
        shots,
        max_offdiag: 0.0,
        max_offdiag_z: 0.0,
        offdiag_tested: 0,
        rigid_offdiag: 0,
        max_diag_dev: 0.0,
        max_diag_z: 0.0,
    };
    for a in 0..d {
        for b in 0..d {
            let mean = sum[a * d + b] / m;
            let var = (sum_sq[a * d + b] / m - mean * mean).max(0.0);
            let se = (var / (m - 1.0)).sqrt();
            if a == b {
                let w = weights.weight_of(&pauli_from_index(n, a))?;
                let dev = (mean - w).abs();
                report.max_diag_dev = report.max_diag_dev.max(dev);
                if se > 0.0 {
                    report.max_diag_z = report.max_diag_z.max(dev / se);
                }
            } else {
                report.max_offdiag = report.max_offdiag.max(mean.abs());
                if se > 0.0 {
                    report.offdiag_tested += 1;
                    report.max_offdiag_z = report.max_offdiag_z.max(mean.abs() / se);
                } else if mean != 0.0 {
                    report.rigid_offdiag += 1;
                }
            }
        }
    }
    Ok(report)
}

/// Worst deviations seen by [`check_record_identities`].
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub n_qubits: usize,
    pub records: usize,
    /// `max |σ_dense - σ_stabilizer|` entrywise.
    pub snapshot: f64,
    /// `max |Tr(σρ) - p(b|ρ,𝒞) / (2^N p(b|𝒞))|`.
    pub bayes: f64,
    /// `max |p(b|𝒞) - 2^{-halvings}|`.
    pub prior: f64,
    /// `max |Σ_b p(b|ρ,𝒞) - 1|` over the circuits of the records.
    pub completeness: f64,
}

/// Samples records on random stabilizer inputs and checks them against the
/// dense channel: snapshot agreement, the Bayes identity, the prior
/// probability and completeness of the outcome distribution.
pub fn check_record_identities(n: usize, n_layers: usize, p: f64, records: usize, seed: u64) -> Result<IdentityReport> {
    check_size(n)?;
    // Completeness enumerates up to 2^(n·layers) outcome strings.
    const MAX_EVENTS: usize = 16;
    if n * n_layers > MAX_EVENTS {
        return Err(Error::TooLarge { what: format!("outcome enumeration over {} events", n * n_layers), limit: MAX_EVENTS });
    }
    let mut rng = crate::circuit::shot_rng(seed, u64::MAX);
    let mut rep = IdentityReport { n_qubits: n, records, snapshot: 0.0, bayes: 0.0, prior: 0.0, completeness: 0.0 };
    for i in 0..records as u64 {
        let rho_t = crate::symplectic::random_stabilizer_state(n, &mut rng)?;
        let labels = rho_t.generators().iter().map(|g| g.to_string()).collect();
        let spec = crate::circuit::InitialStateSpec::Stabilizers(labels);
        let rec = crate::circuit::ShadowSampler::new(n, n_layers, p, spec)?.shot(seed, i)?;
        let rho = DenseState::from_tableau(&rho_t)?;
        let out = channel_apply(&rho, &rec.layers)?;
        let sn = crate::circuit::reconstruct_layers(n, &rec.layers)?;
        let stab = DenseState::from_tableau(&sn.state)?;
        let dev = (&out.snapshot - &stab.matrix).iter().map(|c| c.norm()).fold(0.0, f64::max);
        rep.snapshot = rep.snapshot.max(dev);
        rep.prior = rep.prior.max((out.prior_probability - (-(sn.halvings as f64)).exp2()).abs());
        let lhs = trace(&out.snapshot.dot(&rho.matrix)).re;
        let rhs = out.probability / (out.prior_probability * (1u64 << n) as f64);
        rep.bayes = rep.bayes.max((lhs - rhs).abs());
        let circuit = Circuit { n_qubits: n, p, layers: rec.layers.clone() };
        let mut total = 0.0;
        for ls in enumerate_outcomes(&circuit) {
            total += match channel_apply(&rho, &ls) {
                Ok(o) => o.probability,
                Err(Error::Contradiction { .. }) => 0.0,
                Err(e) => return Err(e),
            };
        }
        rep.completeness = rep.completeness.max((total - 1.0).abs());
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Array2<C64>, b: &Array2<C64>) -> bool {
        (a - b).iter().all(|c| c.norm() < 1e-12)
    }

    #[test]
    fn pauli_matrices_match_trace_formula() {
        for idx in 0..256 {
            let p = pauli_from_index(4, idx);
            assert_eq!(pauli_index(&p), idx);
            let m = pauli_matrix(&p);
            for jdx in [0, 7, 100, 255] {
                let q = pauli_matrix(&pauli_from_index(4, jdx));
                assert!((pauli_trace(&p, &q) - trace(&m.dot(&q))).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn qubit_zero_is_low_bit() {
        let z0 = pauli_matrix(&"ZI".parse().unwrap());
        assert_eq!(z0[[1, 1]], -ONE);
        assert_eq!(z0[[2, 2]], ONE);
    }

    #[test]
    fn named_gate_unitaries() {
        let cnot = gate_unitary(&CliffordGate2::cnot(0));
        // Up to phase, CNOT with control on the low bit swaps |01⟩ ↔ |11⟩ (indices 1, 3).
        let phase = cnot[[0, 0]];
        let expect = Array2::from_shape_fn((4, 4), |(i, j)| {
            let img = if j & 1 == 1 { j ^ 2 } else { j };
            if i == img {
                phase
            } else {
                ZERO
            }
        });
        assert!(close(&cnot, &expect));
        let u = gate_unitary(&CliffordGate2::hadamard(1));
        assert!(close(&u.dot(&dagger(&u)), &identity(4)));
    }

    #[test]
    fn purity_of_ghz() {
        let ghz = DenseState::from_tableau(&StabilizerTableau::ghz(2).unwrap()).unwrap();
        assert!((ghz.region_purity(&[0]) - 0.5).abs() < 1e-12);
        assert!((ghz.region_purity(&[0, 1]) - 1.0).abs() < 1e-12);
    }
}
