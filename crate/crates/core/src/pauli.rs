//! Pauli operators in the symplectic (x, z) bit representation.
//!
//! A [`SignedPauli`] is `i^phase · σ_0 ⊗ σ_1 ⊗ … ⊗ σ_{N-1}` where each
//! factor is the *Hermitian* single-qubit Pauli selected by `(x_j, z_j)`:
//! `(0,0)=I`, `(1,0)=X`, `(0,1)=Z`, `(1,1)=Y`. Hermitian operators therefore
//! carry phase 0 (`+`) or 2 (`-`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-qubit measurement basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    /// The (x, z) bits of this Pauli.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Basis::X => (true, false),
            Basis::Y => (true, true),
            Basis::Z => (false, true),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Basis::X => 'X',
            Basis::Y => 'Y',
            Basis::Z => 'Z',
        }
    }
}

#[inline]
fn words(n: usize) -> usize {
    n.div_ceil(64)
}

/// An unsigned N-qubit Pauli string.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            x: vec![0; words(n)],
            z: vec![0; words(n)],
        }
    }

    /// A single-site Pauli `basis` on `site`.
    pub fn single(n: usize, site: usize, basis: Basis) -> Result<Self> {
        if site >= n {
            return Err(Error::InvalidQubit { index: site, n_qubits: n });
        }
        let mut p = Self::identity(n);
        let (x, z) = basis.bits();
        p.set(site, x, z);
        Ok(p)
    }

    /// `Z ⊗ Z ⊗ …` (or any basis) on the listed sites.
    pub fn on_sites(n: usize, sites: impl IntoIterator<Item = usize>, basis: Basis) -> Result<Self> {
        let mut p = Self::identity(n);
        let (x, z) = basis.bits();
        for s in sites {
            if s >= n {
                return Err(Error::InvalidQubit { index: s, n_qubits: n });
            }
            p.set(s, x, z);
        }
        Ok(p)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn x(&self, i: usize) -> bool {
        (self.x[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn z(&self, i: usize) -> bool {
        (self.z[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, x: bool, z: bool) {
        let (w, b) = (i >> 6, i & 63);
        self.x[w] = (self.x[w] & !(1 << b)) | ((x as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((z as u64) << b);
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.x(i) || self.z(i)).collect()
    }

    /// Support as a bitmask (bit `i` ↔ qubit `i`); requires N ≤ 64.
    pub fn support_mask(&self) -> u64 {
        assert!(self.n <= 64, "support_mask needs at most 64 qubits");
        if self.n == 0 {
            0
        } else {
            self.x[0] | self.z[0]
        }
    }

    /// The single-site factor at `i`, `None` for identity.
    pub fn site(&self, i: usize) -> Option<Basis> {
        match (self.x(i), self.z(i)) {
            (false, false) => None,
            (true, false) => Some(Basis::X),
            (true, true) => Some(Basis::Y),
            (false, true) => Some(Basis::Z),
        }
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::LengthMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    /// Symplectic inner product parity; `true` iff the operators commute.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.commutes_unchecked(other))
    }

    #[inline]
    pub(crate) fn commutes_unchecked(&self, other: &Self) -> bool {
        let mut acc = 0u32;
        for w in 0..self.x.len() {
            acc ^= ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones();
        }
        acc & 1 == 0
    }

    /// `self ← self · other` on the bit level, returning the phase
    /// exponent (mod 4) picked up relative to the Hermitian representatives.
    #[inline]
    pub(crate) fn mul_assign_phase(&mut self, other: &Self) -> u8 {
        let mut acc: i64 = 0;
        for w in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[w], self.z[w], other.x[w], other.z[w]);
            let (x3, z3) = (x1 ^ x2, z1 ^ z2);
            acc += (x1 & z1).count_ones() as i64 + (x2 & z2).count_ones() as i64
                + 2 * (z1 & x2).count_ones() as i64
                - (x3 & z3).count_ones() as i64;
            self.x[w] = x3;
            self.z[w] = z3;
        }
        acc.rem_euclid(4) as u8
    }

    /// Bitwise product ignoring phases (GF(2) vector addition).
    #[inline]
    pub(crate) fn xor_assign(&mut self, other: &Self) {
        for w in 0..self.x.len() {
            self.x[w] ^= other.x[w];
            self.z[w] ^= other.z[w];
        }
    }

    /// Restriction to a sorted list of sites, re-indexed from 0.
    pub fn restrict(&self, sites: &[usize]) -> PauliString {
        let mut out = PauliString::identity(sites.len());
        for (j, &s) in sites.iter().enumerate() {
            out.set(j, self.x(s), self.z(s));
        }
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let c = self.site(i).map_or('I', Basis::letter);
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s.chars().count();
        let mut p = PauliString::identity(n);
        for (i, c) in s.chars().enumerate() {
            let (x, z) = match c {
                'I' | '_' => (false, false),
                'X' => (true, false),
                'Y' => (true, true),
                'Z' => (false, true),
                _ => return Err(Error::param(format!("bad Pauli letter {c:?} in {s:?}"))),
            };
            p.set(i, x, z);
        }
        Ok(p)
    }
}

/// A Pauli string with a fourth-root-of-unity phase `i^phase`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SignedPauli {
    pub(crate) phase: u8,
    pub(crate) pauli: PauliString,
}

impl SignedPauli {
    pub fn new(phase: u8, pauli: PauliString) -> Self {
        Self { phase: phase & 3, pauli }
    }

    /// `(-1)^negative · pauli`.
    pub fn hermitian(pauli: PauliString, negative: bool) -> Self {
        Self::new(if negative { 2 } else { 0 }, pauli)
    }

    pub fn identity(n: usize) -> Self {
        Self::new(0, PauliString::identity(n))
    }

    /// Power of `i` in front of the Hermitian string.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn pauli(&self) -> &PauliString {
        &self.pauli
    }

    pub fn into_pauli(self) -> PauliString {
        self.pauli
    }

    pub fn n_qubits(&self) -> usize {
        self.pauli.n
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase & 1 == 0
    }

    /// True for phase `-1`.
    pub fn is_negative(&self) -> bool {
        self.phase == 2
    }

    /// +1 / -1 for Hermitian operators.
    pub fn sign(&self) -> i8 {
        debug_assert!(self.is_hermitian());
        if self.phase == 2 {
            -1
        } else {
            1
        }
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) & 3;
    }

    /// Group product `self · other` with exact phase.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.pauli.check_len(&other.pauli)?;
        let mut out = self.clone();
        out.mul_assign(other);
        Ok(out)
    }

    #[inline]
    pub(crate) fn mul_assign(&mut self, other: &Self) {
        let extra = self.pauli.mul_assign_phase(&other.pauli);
        self.phase = (self.phase + other.phase + extra) & 3;
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.pauli.commutes(&other.pauli)
    }
}

impl fmt::Display for SignedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.pauli)
    }
}

impl fmt::Debug for SignedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignedPauli({self})")
    }
}

impl FromStr for SignedPauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (phase, rest) = if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else {
            (0, s)
        };
        Ok(SignedPauli::new(phase, rest.parse()?))
    }
}

/// True iff `p` and `q` commute.
pub fn pauli_commutes(p: &PauliString, q: &PauliString) -> Result<bool> {
    p.commutes(q)
}

/// Pauli group product with exact phase tracking.
pub fn pauli_multiply(p: &SignedPauli, q: &SignedPauli) -> Result<SignedPauli> {
    p.multiply(q)
}
