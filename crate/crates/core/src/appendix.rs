//! Solvable toy ensembles, the Ising-model weight ansatz, and the
//! entanglement-feature transform.

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::shot_seed;
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::symplectic::{in_span, random_stabilizer_strings, random_symplectic};

/// Closed-form weight and base of a toy ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToyValue {
    pub weight: f64,
    pub beta: f64,
}

/// Products of random `n`-qubit stabilizer states: `w = (2ⁿ+1)^{-m}`,
/// `β = (2ⁿ+1)^{1/n}`.
pub fn toy_area(n: usize, m: usize) -> Result<ToyValue> {
    if n == 0 || m == 0 {
        return Err(Error::param("block size and block count must be positive"));
    }
    let d = (n as f64).exp2();
    // (2ⁿ-1)/(4ⁿ-1) written without cancellation.
    let per_block = 1.0 / (d + 1.0);
    Ok(ToyValue { weight: per_block.powi(m as i32), beta: (d + 1.0).powf(1.0 / n as f64) })
}

/// `ε`, `q`, `r` of the block code with `n`-qubit blocks on `N` qubits.
fn volume_params(n: usize, total: usize) -> Result<(f64, f64, f64)> {
    if n < 2 {
        return Err(Error::param("the code-rate model needs blocks of at least 2 qubits (q = 0 at n = 1)"));
    }
    if total == 0 || !total.is_multiple_of(n) {
        return Err(Error::param(format!("{total} qubits do not split into blocks of {n}")));
    }
    let four = 4f64.powi(n as i32) - 1.0;
    let half = ((n - 1) as f64).exp2();
    let eps = 1.0 / (((total / n) as f64).exp2() + 1.0);
    Ok((eps, (half - 1.0) / four, (4.0 * half - 1.0) / four))
}

/// Volume-law code model: `w = q^m + ε(r^m - q^m)` and the base at code
/// rate `f = 1/n`.
pub fn toy_volume(n: usize, m: usize, total: usize) -> Result<ToyValue> {
    if m == 0 {
        return Err(Error::param("block count must be positive"));
    }
    let (eps, q, r) = volume_params(n, total)?;
    let weight = q.powi(m as i32) + eps * (r.powi(m as i32) - q.powi(m as i32));
    Ok(ToyValue { weight, beta: volume_beta(1.0 / n as f64)? })
}

/// `log β(f) = f · log((4^{1/f} - 1)/(2^{1/f-1} - 1))`.
pub fn volume_beta(f: f64) -> Result<f64> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::param(format!("code rate {f} outside (0, 1)")));
    }
    let inv = 1.0 / f;
    // ln(4^x - 1) - ln(2^(x-1) - 1), arranged to stay finite for large x.
    let ln_ratio = (inv + 1.0) * std::f64::consts::LN_2 + (-(-2.0 * inv).exp2()).ln_1p() - (-(1.0 - inv).exp2()).ln_1p();
    Ok((f * ln_ratio).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToyPhase {
    Area,
    Volume,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockToySpec {
    pub block_size: usize,
    pub blocks_covered: usize,
    pub phase: ToyPhase,
    /// Physical qubits; only the volume model uses it.
    pub total_qubits: usize,
}

impl BlockToySpec {
    pub fn area(n: usize, m: usize) -> Self {
        Self { block_size: n, blocks_covered: m, phase: ToyPhase::Area, total_qubits: n * m }
    }

    pub fn volume(n: usize, m: usize, total: usize) -> Self {
        Self { block_size: n, blocks_covered: m, phase: ToyPhase::Volume, total_qubits: total }
    }

    pub fn closed_form(&self) -> Result<ToyValue> {
        match self.phase {
            ToyPhase::Area => toy_area(self.block_size, self.blocks_covered),
            ToyPhase::Volume => toy_volume(self.block_size, self.blocks_covered, self.total_qubits),
        }
    }

    /// Fewer than four blocks makes `N ≫ n` a poor description.
    pub fn few_blocks(&self) -> bool {
        self.phase == ToyPhase::Volume && self.total_qubits / self.block_size.max(1) < 4
    }

    fn validate(&self) -> Result<()> {
        let (n, m) = (self.block_size, self.blocks_covered);
        if n == 0 || m == 0 {
            return Err(Error::param("block size and block count must be positive"));
        }
        if self.phase == ToyPhase::Volume {
            volume_params(n, self.total_qubits)?;
        }
        if self.phase == ToyPhase::Volume && n * m > self.total_qubits {
            return Err(Error::param(format!("{m} blocks of {n} exceed {} qubits", self.total_qubits)));
        }
        Ok(())
    }

    /// `Z` on every site of the first `m` blocks.
    pub fn probe(&self) -> Result<PauliString> {
        let n_sites = match self.phase {
            ToyPhase::Area => self.block_size * self.blocks_covered,
            ToyPhase::Volume => self.total_qubits,
        };
        PauliString::on_sites(n_sites, 0..self.block_size * self.blocks_covered, crate::pauli::Basis::Z)
    }
}

/// Unsigned stabilizer generators of one toy snapshot.
fn toy_snapshot(spec: &BlockToySpec, rng: &mut ChaCha8Rng) -> Vec<PauliString> {
    let n = spec.block_size;
    match spec.phase {
        ToyPhase::Area => {
            let total = n * spec.blocks_covered;
            (0..spec.blocks_covered)
                .flat_map(|b| random_stabilizer_strings(n, rng).into_iter().map(move |g| embed(&g, total, b * n)))
                .collect()
        }
        ToyPhase::Volume => {
            let total = spec.total_qubits;
            let n_blocks = total / n;
            let mut gens = Vec::with_capacity(total);
            let mut logical = Vec::with_capacity(n_blocks);
            for b in 0..n_blocks {
                // Local qubit 0 carries the logical; the rest are syndromes.
                let frame = random_symplectic(n, rng);
                for (_, z) in &frame[1..] {
                    gens.push(embed(z, total, b * n));
                }
                logical.push((embed(&frame[0].0, total, b * n), embed(&frame[0].1, total, b * n)));
            }
            // A random stabilizer state on the logical qubits.
            for g in random_stabilizer_strings(n_blocks, rng) {
                let mut s = PauliString::identity(total);
                for (b, (lx, lz)) in logical.iter().enumerate() {
                    if g.x(b) {
                        s.xor_assign(lx);
                    }
                    if g.z(b) {
                        s.xor_assign(lz);
                    }
                }
                gens.push(s);
            }
            gens
        }
    }
}

fn embed(p: &PauliString, total: usize, offset: usize) -> PauliString {
    let mut out = PauliString::identity(total);
    for i in 0..p.n_qubits() {
        out.set(offset + i, p.x(i), p.z(i));
    }
    out
}

/// Monte-Carlo estimate `(mean, std_error)` of `E Tr(Pσ)²` for the probe of
/// [`BlockToySpec::probe`]; shot `i` uses the stream of `(seed, i)`.
pub fn toy_monte_carlo(spec: &BlockToySpec, shots: usize, seed: u64) -> Result<(f64, f64)> {
    spec.validate()?;
    if shots < 2 {
        return Err(Error::param("need at least two shots"));
    }
    let probe = spec.probe()?;
    let hits = (0..shots as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(shot_seed(seed, i));
            in_span(&toy_snapshot(spec, &mut rng), &probe).map(usize::from)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let m = shots as f64;
    let mean = hits as f64 / m;
    Ok((mean, (mean * (1.0 - mean) / (m - 1.0)).sqrt()))
}

/// Largest chain handled by the dense eigensolver.
pub const MAX_TFIM_SITES: usize = 12;

/// Default symmetry-breaking field.
pub const TFIM_TILT: f64 = 1e-6;

/// Ground state of `H = -J Σ Z_i Z_{i+1} - h Σ X_i - tilt Σ Z_i` (open
/// chain, `J = 1`) in the computational basis, bit `i` ↔ site `i`, with
/// non-negative amplitudes.
pub fn tfim_ground_state(n_sites: usize, h_over_j: f64, tilt: f64) -> Result<Vec<f64>> {
    if n_sites == 0 {
        return Err(Error::param("need at least one site"));
    }
    if n_sites > MAX_TFIM_SITES {
        return Err(Error::TooLarge { what: format!("TFIM on {n_sites} sites"), limit: MAX_TFIM_SITES });
    }
    if !(h_over_j >= 0.0 && h_over_j.is_finite()) {
        return Err(Error::param(format!("field ratio {h_over_j} must be finite and non-negative")));
    }
    let dim = 1usize << n_sites;
    let mut h = Array2::<f64>::zeros((dim, dim));
    for s in 0..dim {
        let z = |i: usize| if (s >> i) & 1 == 0 { 1.0 } else { -1.0 };
        let mut diag = 0.0;
        for i in 0..n_sites - 1 {
            diag -= z(i) * z(i + 1);
        }
        for i in 0..n_sites {
            diag -= tilt * z(i);
            h[[s ^ (1 << i), s]] -= h_over_j;
        }
        h[[s, s]] = diag;
    }
    let (_, vecs) = h.eigh(UPLO::Lower).map_err(|e| Error::Linalg(e.to_string()))?;
    let mut psi: Vec<f64> = vecs.column(0).to_vec();
    // Perron–Frobenius: the ground state of this stoquastic H has one sign.
    if psi.iter().sum::<f64>() < 0.0 {
        psi.iter_mut().for_each(|a| *a = -*a);
    }
    Ok(psi)
}

/// Ansatz weight `⟨0|∏(2θ_{i∉P} + X_i)|Ψ⟩ / ⟨0|∏(2 + X_i)|Ψ⟩`: configurations
/// with every support site flipped, counted with `2^{#unflipped sites}`.
pub fn statmech_pauli_weight(psi: &[f64], support: &[usize]) -> Result<f64> {
    let n = psi.len().trailing_zeros() as usize;
    if psi.len() != 1 << n || n == 0 {
        return Err(Error::param("state length must be a power of two"));
    }
    let mut mask = 0usize;
    for &i in support {
        if i >= n {
            return Err(Error::InvalidQubit { index: i, n_qubits: n });
        }
        mask |= 1 << i;
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (s, &a) in psi.iter().enumerate() {
        let f = a * ((n - s.count_ones() as usize) as f64).exp2();
        den += f;
        if s & mask == mask {
            // Sites in the support contribute X (weight 1) instead of 2θ.
            num += f / ((mask & !s).count_ones() as f64).exp2();
        }
    }
    if den == 0.0 {
        return Err(Error::ZeroMass);
    }
    Ok(num / den)
}

/// Weights of centered consecutive supports `k = 1..=k_max`.
pub fn statmech_curve(psi: &[f64], k_max: usize) -> Result<Vec<(usize, f64)>> {
    let n = psi.len().trailing_zeros() as usize;
    if k_max > n {
        return Err(Error::param(format!("k_max = {k_max} exceeds {n} sites")));
    }
    (1..=k_max)
        .map(|k| {
            let s0 = (n - k) / 2;
            let sites: Vec<usize> = (s0..s0 + k).collect();
            Ok((k, statmech_pauli_weight(psi, &sites)?))
        })
        .collect()
}

/// `(1 + 2 coth(c p), 3 e^{-c'(1-p)})`: the bases near `p → 0` and `p → 1`.
pub fn perturbative_betas(c: f64, c_prime: f64, p: f64) -> Result<(f64, f64)> {
    if !(c > 0.0 && c_prime > 0.0) {
        return Err(Error::param("coefficients must be positive"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::param(format!("rate {p} outside (0, 1]")));
    }
    Ok((1.0 + 2.0 / (c * p).tanh(), 3.0 * (-c_prime * (1.0 - p)).exp()))
}

/// Region purities `W(A) = Tr σ_A²`, indexed by region bitmask.
#[derive(Clone, Debug, PartialEq)]
pub struct EntanglementFeature {
    pub n_qubits: usize,
    pub values: Vec<f64>,
}

impl EntanglementFeature {
    pub fn new(n_qubits: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 1 << n_qubits {
            return Err(Error::param(format!("need 2^{n_qubits} region values, got {}", values.len())));
        }
        Ok(Self { n_qubits, values })
    }
}

/// Sum over subsets: `out[A] = Σ_{B⊆A} f[B]`.
fn subset_sum(f: &mut [f64], n: usize) {
    for j in 0..n {
        let bit = 1 << j;
        for a in 0..f.len() {
            if a & bit != 0 {
                f[a] += f[a ^ bit];
            }
        }
    }
}

/// Per-Pauli weights `w_A = (-1/3)^{|A|} Σ_{B⊆A} (-2)^{|B|} W(B)`.
pub fn ef_transform(features: &EntanglementFeature) -> Vec<f64> {
    let n = features.n_qubits;
    let mut f: Vec<f64> = features
        .values
        .iter()
        .enumerate()
        .map(|(b, w)| (-2f64).powi(b.count_ones() as i32) * w)
        .collect();
    subset_sum(&mut f, n);
    f.iter().enumerate().map(|(a, s)| (-1.0 / 3.0f64).powi(a.count_ones() as i32) * s).collect()
}

/// `W(A) = 2^{-|A|} Σ_{B⊆A} 3^{|B|} w_B`.
pub fn ef_inverse(n_qubits: usize, weights: &[f64]) -> Result<EntanglementFeature> {
    if weights.len() != 1 << n_qubits {
        return Err(Error::param(format!("need 2^{n_qubits} region weights, got {}", weights.len())));
    }
    let mut f: Vec<f64> = weights.iter().enumerate().map(|(b, w)| 3f64.powi(b.count_ones() as i32) * w).collect();
    subset_sum(&mut f, n_qubits);
    let values = f.iter().enumerate().map(|(a, s)| s / (a.count_ones() as f64).exp2()).collect();
    EntanglementFeature::new(n_qubits, values)
}
