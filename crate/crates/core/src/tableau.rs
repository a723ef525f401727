//! Mixed-rank stabilizer states stored as signed commuting generators.
//!
//! `σ = 2^{-N} Σ_{g ∈ ⟨generators⟩} g`. There are no destabilizers: ranks
//! move freely between 0 (maximally mixed) and N (pure), and membership
//! questions are answered by Gaussian elimination over GF(2).

use rand::Rng;

use crate::clifford::CliffordGate2;
use crate::error::{Error, Result};
use crate::pauli::{Basis, PauliString, SignedPauli};

/// What a projection did to the generator set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    /// An anticommuting generator was replaced by the projected Pauli.
    Replaced,
    /// The Pauli commuted with everything and was outside the group.
    Added,
    /// The Pauli (with this sign) was already stabilized.
    Unchanged,
}

impl Projection {
    /// `Tr(ΠσΠ) / Tr(σ)` for the projector `Π = (1 ± P)/2`.
    pub fn probability(self) -> f64 {
        match self {
            Projection::Unchanged => 1.0,
            _ => 0.5,
        }
    }
}

/// Outcome of a Born-rule measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Measurement {
    pub outcome: u8,
    /// True when the outcome was fixed by the state (probability 1).
    pub deterministic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    gens: Vec<SignedPauli>,
}

/// Row-echelon copy of a generator set, reusable for many membership queries.
#[derive(Clone, Debug)]
pub struct Echelon {
    rows: Vec<SignedPauli>,
    pivots: Vec<usize>,
}

#[inline]
fn get_bit(p: &PauliString, col: usize) -> bool {
    let n = p.n_qubits();
    if col < n {
        p.x(col)
    } else {
        p.z(col - n)
    }
}

impl Echelon {
    pub fn new(gens: &[SignedPauli]) -> Self {
        let mut rows: Vec<SignedPauli> = gens.to_vec();
        let mut pivots = Vec::with_capacity(rows.len());
        let n = rows.first().map_or(0, |r| r.n_qubits());
        let mut rank = 0;
        for col in 0..2 * n {
            if rank == rows.len() {
                break;
            }
            let Some(r) = (rank..rows.len()).find(|&r| get_bit(&rows[r].pauli, col)) else {
                continue;
            };
            rows.swap(rank, r);
            let (head, tail) = rows.split_at_mut(rank + 1);
            let pivot = &head[rank];
            for row in tail.iter_mut() {
                if get_bit(&row.pauli, col) {
                    row.mul_assign(pivot);
                }
            }
            pivots.push(col);
            rank += 1;
        }
        rows.truncate(rank);
        Self { rows, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `p` by the echelon rows. Returns the phase `i^φ` with
    /// `(product of used rows) = i^φ p` when `p` lies in the group, else `None`.
    pub fn solve(&self, p: &PauliString) -> Option<u8> {
        let mut acc = SignedPauli::new(0, p.clone());
        for (row, &col) in self.rows.iter().zip(&self.pivots) {
            if get_bit(&acc.pauli, col) {
                acc.mul_assign(row);
            }
        }
        acc.pauli.is_identity().then_some(acc.phase)
    }

    /// `Tr(Pσ)` assuming `p` commutes with every generator (not checked).
    pub fn trace_commuting(&self, p: &PauliString) -> i8 {
        sign_of(self.solve(p))
    }
}

/// GF(2) rank of a set of Pauli strings (phases ignored).
pub(crate) fn gf2_rank(strings: &[PauliString]) -> usize {
    let mut rows: Vec<Vec<u64>> = strings
        .iter()
        .map(|p| p.x_words().iter().chain(p.z_words()).copied().collect())
        .collect();
    let bits = rows.first().map_or(0, |r| r.len() * 64);
    let mut rank = 0;
    for col in 0..bits {
        if rank == rows.len() {
            break;
        }
        let (w, b) = (col / 64, col % 64);
        let Some(r) = (rank..rows.len()).find(|&r| (rows[r][w] >> b) & 1 == 1) else {
            continue;
        };
        rows.swap(rank, r);
        let pivot = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            if (row[w] >> b) & 1 == 1 {
                for (a, p) in row.iter_mut().zip(&pivot) {
                    *a ^= p;
                }
            }
        }
        rank += 1;
    }
    rank
}

impl StabilizerTableau {
    /// The maximally mixed state (no generators).
    pub fn maximally_mixed(n: usize) -> Self {
        Self { n, gens: Vec::new() }
    }

    /// Validates and wraps a generator list.
    pub fn from_generators(n: usize, gens: Vec<SignedPauli>) -> Result<Self> {
        for g in &gens {
            if g.n_qubits() != n {
                return Err(Error::LengthMismatch { left: g.n_qubits(), right: n });
            }
            if !g.is_hermitian() {
                return Err(Error::param(format!("generator {g} is not Hermitian")));
            }
            if g.pauli().is_identity() {
                return Err(Error::param("identity is not a valid generator"));
            }
        }
        for (i, g) in gens.iter().enumerate() {
            for h in &gens[i + 1..] {
                if !g.pauli.commutes_unchecked(&h.pauli) {
                    return Err(Error::param(format!("generators {g} and {h} anticommute")));
                }
            }
        }
        let strings: Vec<PauliString> = gens.iter().map(|g| g.pauli.clone()).collect();
        if gf2_rank(&strings) != gens.len() {
            return Err(Error::param("generators are not independent"));
        }
        Ok(Self { n, gens })
    }

    /// Parses generators like `["+XX", "+ZZ"]`.
    pub fn from_labels<S: AsRef<str>>(n: usize, labels: &[S]) -> Result<Self> {
        let gens = labels.iter().map(|s| s.as_ref().parse()).collect::<Result<Vec<SignedPauli>>>()?;
        Self::from_generators(n, gens)
    }

    fn product(n: usize, basis: Basis) -> Self {
        let gens = (0..n)
            .map(|i| SignedPauli::new(0, PauliString::single(n, i, basis).expect("in range")))
            .collect();
        Self { n, gens }
    }

    /// `|0…0⟩`.
    pub fn zero_state(n: usize) -> Self {
        Self::product(n, Basis::Z)
    }

    /// `|+…+⟩`.
    pub fn plus_state(n: usize) -> Self {
        Self::product(n, Basis::X)
    }

    /// `(|0…0⟩ + |1…1⟩)/√2`: generators `X^{⊗N}` and `Z_i Z_{i+1}`.
    pub fn ghz(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("GHZ state needs at least one qubit"));
        }
        let mut gens = vec![SignedPauli::new(0, PauliString::on_sites(n, 0..n, Basis::X)?)];
        for i in 0..n - 1 {
            gens.push(SignedPauli::new(0, PauliString::on_sites(n, [i, i + 1], Basis::Z)?));
        }
        Ok(Self { n, gens })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn is_pure(&self) -> bool {
        self.gens.len() == self.n
    }

    pub fn generators(&self) -> &[SignedPauli] {
        &self.gens
    }

    pub fn echelon(&self) -> Echelon {
        Echelon::new(&self.gens)
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n {
            return Err(Error::InvalidQubit { index: site, n_qubits: self.n });
        }
        Ok(())
    }

    /// `Tr(Pσ) ∈ {-1, 0, +1}`.
    pub fn trace_pauli(&self, p: &PauliString) -> Result<i8> {
        if p.n_qubits() != self.n {
            return Err(Error::LengthMismatch { left: p.n_qubits(), right: self.n });
        }
        if self.gens.iter().any(|g| !g.pauli.commutes_unchecked(p)) {
            return Ok(0);
        }
        Ok(sign_of(self.echelon().solve(p)))
    }

    /// `Tr(Pσ)` for many Paulis, sharing one elimination.
    pub fn trace_many(&self, ps: &[PauliString]) -> Result<Vec<i8>> {
        let ech = self.echelon();
        ps.iter()
            .map(|p| {
                if p.n_qubits() != self.n {
                    return Err(Error::LengthMismatch { left: p.n_qubits(), right: self.n });
                }
                Ok(ech.trace_commuting(p))
            })
            .collect()
    }

    /// All `2^rank` signed elements of the stabilizer group, identity first.
    pub fn stabilizer_group(&self) -> Result<Vec<SignedPauli>> {
        const MAX_RANK: usize = 24;
        if self.gens.len() > MAX_RANK {
            return Err(Error::TooLarge { what: format!("stabilizer group of rank {}", self.gens.len()), limit: MAX_RANK });
        }
        let mut out = Vec::with_capacity(1 << self.gens.len());
        out.push(SignedPauli::identity(self.n));
        for g in &self.gens {
            for i in 0..out.len() {
                let mut e = out[i].clone();
                e.mul_assign(g);
                out.push(e);
            }
        }
        Ok(out)
    }

    /// Forward evolution `σ ← U σ U†` with the gate on `(a, b)`.
    pub fn apply_gate(&mut self, g: &CliffordGate2, a: usize, b: usize) -> Result<()> {
        self.check_bond(a, b)?;
        for row in &mut self.gens {
            g.schrodinger_in_place(row, a, b);
        }
        Ok(())
    }

    /// Backward evolution `σ ← U† σ U` with the gate on `(a, b)`.
    pub fn apply_gate_inverse(&mut self, g: &CliffordGate2, a: usize, b: usize) -> Result<()> {
        self.check_bond(a, b)?;
        for row in &mut self.gens {
            g.heisenberg_in_place(row, a, b);
        }
        Ok(())
    }

    fn check_bond(&self, a: usize, b: usize) -> Result<()> {
        if a >= self.n || b >= self.n || a == b {
            return Err(Error::InvalidBond(a, b));
        }
        Ok(())
    }

    /// Index of the first generator anticommuting with `p`, after folding
    /// it into every other anticommuting generator.
    fn absorb_anticommuting(&mut self, p: &PauliString) -> Option<usize> {
        let k = self.gens.iter().position(|g| !g.pauli.commutes_unchecked(p))?;
        let (head, tail) = self.gens.split_at_mut(k);
        let (pivot, tail) = tail.split_first_mut().expect("k is in range");
        for g in head.iter_mut().chain(tail.iter_mut()) {
            if !g.pauli.commutes_unchecked(p) {
                g.mul_assign(pivot);
            }
        }
        Some(k)
    }

    /// Born-rule measurement of a Hermitian Pauli observable.
    pub fn measure_observable<R: Rng + ?Sized>(&mut self, p: &PauliString, rng: &mut R) -> Result<Measurement> {
        if p.n_qubits() != self.n {
            return Err(Error::LengthMismatch { left: p.n_qubits(), right: self.n });
        }
        if let Some(k) = self.absorb_anticommuting(p) {
            let outcome = rng.random::<bool>() as u8;
            self.gens[k] = SignedPauli::hermitian(p.clone(), outcome == 1);
            return Ok(Measurement { outcome, deterministic: false });
        }
        match self.echelon().solve(p) {
            Some(phase) => Ok(Measurement { outcome: (phase == 2) as u8, deterministic: true }),
            None => {
                let outcome = rng.random::<bool>() as u8;
                self.gens.push(SignedPauli::hermitian(p.clone(), outcome == 1));
                Ok(Measurement { outcome, deterministic: false })
            }
        }
    }

    /// Applies `(1 + (-1)^outcome P)/2` and renormalizes.
    pub fn project_observable(&mut self, p: &PauliString, outcome: u8) -> Result<Projection> {
        if p.n_qubits() != self.n {
            return Err(Error::LengthMismatch { left: p.n_qubits(), right: self.n });
        }
        let negative = outcome & 1 == 1;
        if let Some(k) = self.absorb_anticommuting(p) {
            self.gens[k] = SignedPauli::hermitian(p.clone(), negative);
            return Ok(Projection::Replaced);
        }
        match self.echelon().solve(p) {
            Some(phase) if (phase == 2) == negative => Ok(Projection::Unchanged),
            Some(_) => Err(Error::Contradiction {
                pauli: SignedPauli::hermitian(p.clone(), negative).to_string(),
            }),
            None => {
                self.gens.push(SignedPauli::hermitian(p.clone(), negative));
                Ok(Projection::Added)
            }
        }
    }

    /// Measures a single-qubit Pauli.
    pub fn measure<R: Rng + ?Sized>(&mut self, site: usize, basis: Basis, rng: &mut R) -> Result<Measurement> {
        self.check_site(site)?;
        let p = PauliString::single(self.n, site, basis)?;
        self.measure_observable(&p, rng)
    }

    /// Projects a single qubit onto the `outcome` eigenspace of `basis`.
    pub fn project(&mut self, site: usize, basis: Basis, outcome: u8) -> Result<Projection> {
        self.check_site(site)?;
        let p = PauliString::single(self.n, site, basis)?;
        self.project_observable(&p, outcome)
    }

    /// `log2 Tr(σ_A²)`, always an integer for stabilizer states.
    pub fn region_purity_log2(&self, region: &[usize]) -> Result<i64> {
        let mut inside = vec![false; self.n];
        for &q in region {
            self.check_site(q)?;
            inside[q] = true;
        }
        let size_a = inside.iter().filter(|&&b| b).count();
        let complement: Vec<usize> = (0..self.n).filter(|&i| !inside[i]).collect();
        let restricted: Vec<PauliString> = self.gens.iter().map(|g| g.pauli.restrict(&complement)).collect();
        let kernel = self.gens.len() - gf2_rank(&restricted);
        Ok(kernel as i64 - size_a as i64)
    }

    /// `Tr(σ_A²) = 2^{-|A|} · #{g ∈ group : supp g ⊆ A}`.
    pub fn region_purity(&self, region: &[usize]) -> Result<f64> {
        Ok((self.region_purity_log2(region)? as f64).exp2())
    }
}

fn sign_of(phase: Option<u8>) -> i8 {
    match phase {
        Some(0) => 1,
        Some(2) => -1,
        Some(_) => unreachable!("commuting Hermitian generators give real signs"),
        None => 0,
    }
}

/// Free-function forms of the tableau operations.
pub fn trace_pauli(t: &StabilizerTableau, p: &PauliString) -> Result<i8> {
    t.trace_pauli(p)
}

pub fn measure_pauli<R: Rng + ?Sized>(
    t: &mut StabilizerTableau,
    site: usize,
    basis: Basis,
    rng: &mut R,
) -> Result<u8> {
    Ok(t.measure(site, basis, rng)?.outcome)
}

pub fn project_pauli(t: &mut StabilizerTableau, site: usize, basis: Basis, outcome: u8) -> Result<Projection> {
    t.project(site, basis, outcome)
}

pub fn region_purity(t: &StabilizerTableau, region: &[usize]) -> Result<f64> {
    t.region_purity(region)
}
