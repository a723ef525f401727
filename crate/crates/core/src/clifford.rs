//! Two-qubit Clifford gates stored by their Pauli images.
//!
//! A gate is determined (up to a global phase) by the Heisenberg images
//! `U† P U` of the four generators `X⊗I, Z⊗I, I⊗X, I⊗Z`. From those we
//! precompute a 16-entry table for the forward map and one for its inverse,
//! so conjugating a tableau row costs a single lookup per bond.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, SignedPauli};

/// Compact 2-qubit Pauli: bits `x_a, z_a, x_b, z_b` in positions 0..4,
/// with phase `i^phase` in front of the Hermitian string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct P2 {
    pub(crate) bits: u8,
    pub(crate) phase: u8,
}

const X_MASK: u8 = 0b0101;

impl P2 {
    const IDENTITY: P2 = P2 { bits: 0, phase: 0 };

    fn xs(self) -> u8 {
        self.bits & X_MASK
    }

    fn zs(self) -> u8 {
        (self.bits >> 1) & X_MASK
    }

    fn mul(self, o: P2) -> P2 {
        let (x1, z1, x2, z2) = (self.xs(), self.zs(), o.xs(), o.zs());
        let (x3, z3) = (x1 ^ x2, z1 ^ z2);
        let acc = (x1 & z1).count_ones() as i32 + (x2 & z2).count_ones() as i32
            + 2 * (z1 & x2).count_ones() as i32
            - (x3 & z3).count_ones() as i32;
        P2 {
            bits: self.bits ^ o.bits,
            phase: ((self.phase as i32 + o.phase as i32 + acc).rem_euclid(4)) as u8,
        }
    }

    fn commutes(self, o: P2) -> bool {
        ((self.xs() & o.zs()) ^ (self.zs() & o.xs())).count_ones().is_multiple_of(2)
    }

    fn to_signed(self) -> SignedPauli {
        let mut p = PauliString::identity(2);
        p.set(0, self.bits & 1 != 0, self.bits & 2 != 0);
        p.set(1, self.bits & 4 != 0, self.bits & 8 != 0);
        SignedPauli::new(self.phase, p)
    }

    fn from_signed(p: &SignedPauli) -> Result<P2> {
        if p.n_qubits() != 2 {
            return Err(Error::LengthMismatch { left: p.n_qubits(), right: 2 });
        }
        let q = p.pauli();
        let bits = q.x(0) as u8 | (q.z(0) as u8) << 1 | (q.x(1) as u8) << 2 | (q.z(1) as u8) << 3;
        Ok(P2 { bits, phase: p.phase() })
    }
}

/// Generators in table order: X⊗I, Z⊗I, I⊗X, I⊗Z.
const GENERATORS: [u8; 4] = [0b0001, 0b0010, 0b0100, 0b1000];

/// A two-qubit Clifford gate modulo global phase.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CliffordGate2 {
    images: [P2; 4],
    heis: [P2; 16],
    schr: [P2; 16],
}

impl CliffordGate2 {
    fn from_p2(images: [P2; 4]) -> Result<Self> {
        for (i, img) in images.iter().enumerate() {
            if img.phase & 1 == 1 {
                return Err(Error::param(format!("gate image {i} is not Hermitian")));
            }
            for (j, other) in images.iter().enumerate().skip(i + 1) {
                // Only the (X_a, Z_a) and (X_b, Z_b) pairs anticommute.
                let want = !((i == 0 && j == 1) || (i == 2 && j == 3));
                if img.commutes(*other) != want {
                    return Err(Error::param("gate images violate the symplectic condition"));
                }
            }
        }
        let mut heis = [P2::IDENTITY; 16];
        for (idx, slot) in heis.iter_mut().enumerate() {
            // P = i^{#Y} · X_a^x Z_a^z X_b^x Z_b^z, since Y = iXZ.
            let idx = idx as u8;
            let n_y = (idx & (idx >> 1) & X_MASK).count_ones() as u8;
            let mut acc = P2 { bits: 0, phase: n_y & 3 };
            for (g, img) in GENERATORS.iter().zip(&images) {
                if idx & g != 0 {
                    acc = acc.mul(*img);
                }
            }
            *slot = acc;
        }
        let mut schr = [P2::IDENTITY; 16];
        let mut seen = [false; 16];
        for (idx, img) in heis.iter().enumerate() {
            // U† P U = i^t Q  ⇒  U Q U† = i^{-t} P.
            let q = img.bits as usize;
            if seen[q] {
                return Err(Error::param("gate images do not generate the Pauli group"));
            }
            seen[q] = true;
            schr[q] = P2 { bits: idx as u8, phase: (4 - img.phase) & 3 };
        }
        Ok(Self { images, heis, schr })
    }

    /// Builds a gate from the Heisenberg images `U†(X⊗I)U, U†(Z⊗I)U,
    /// U†(I⊗X)U, U†(I⊗Z)U`.
    pub fn from_images(images: [SignedPauli; 4]) -> Result<Self> {
        let mut p2 = [P2::IDENTITY; 4];
        for (slot, img) in p2.iter_mut().zip(&images) {
            *slot = P2::from_signed(img)?;
        }
        Self::from_p2(p2)
    }

    pub fn identity() -> Self {
        Self::from_p2(GENERATORS.map(|bits| P2 { bits, phase: 0 })).expect("identity is valid")
    }

    fn named(images: [&str; 4]) -> Self {
        let images = images.map(|s| s.parse::<SignedPauli>().expect("valid literal"));
        Self::from_images(images).expect("named gate is a Clifford")
    }

    /// Hadamard on qubit `q` (0 or 1) of the pair.
    pub fn hadamard(q: usize) -> Self {
        match q {
            0 => Self::named(["+ZI", "+XI", "+IX", "+IZ"]),
            _ => Self::named(["+XI", "+ZI", "+IZ", "+IX"]),
        }
    }

    /// Phase gate `S = diag(1, i)` on qubit `q`; `S† X S = -Y`.
    pub fn phase_s(q: usize) -> Self {
        match q {
            0 => Self::named(["-YI", "+ZI", "+IX", "+IZ"]),
            _ => Self::named(["+XI", "+ZI", "-IY", "+IZ"]),
        }
    }

    /// CNOT with the given control (0 or 1) of the pair.
    pub fn cnot(control: usize) -> Self {
        match control {
            0 => Self::named(["+XX", "+ZI", "+IX", "+ZZ"]),
            _ => Self::named(["+XI", "+ZZ", "+XX", "+IZ"]),
        }
    }

    pub fn swap() -> Self {
        Self::named(["+IX", "+IZ", "+XI", "+ZI"])
    }

    /// The stored images as 2-qubit signed Paulis.
    pub fn images(&self) -> [SignedPauli; 4] {
        self.images.map(P2::to_signed)
    }

    /// Image strings such as `"+XZ"`, in generator order.
    pub fn image_labels(&self) -> [String; 4] {
        self.images.map(|p| p.to_signed().to_string())
    }

    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        if labels.len() != 4 {
            return Err(Error::param(format!("expected 4 gate images, got {}", labels.len())));
        }
        let mut images = Vec::with_capacity(4);
        for l in labels {
            let l = l.as_ref();
            let p: SignedPauli = l.parse()?;
            if p.n_qubits() != 2 || !(l.starts_with('+') || l.starts_with('-')) {
                return Err(Error::param(format!("bad gate image {l:?}")));
            }
            images.push(p);
        }
        Self::from_images(images.try_into().expect("length checked"))
    }

    /// The inverse gate `U†`.
    pub fn inverse(&self) -> Self {
        let images = GENERATORS.map(|g| self.schr[g as usize]);
        Self::from_p2(images).expect("inverse of a Clifford is a Clifford")
    }

    /// The gate `next · self` (apply `self` first, then `next`).
    pub fn then(&self, next: &Self) -> Self {
        // (V U)† P (V U) = U† (V† P V) U.
        let images = GENERATORS.map(|g| {
            let mid = next.heis[g as usize];
            let out = self.heis[mid.bits as usize];
            P2 { bits: out.bits, phase: (out.phase + mid.phase) & 3 }
        });
        Self::from_p2(images).expect("product of Cliffords is a Clifford")
    }

    #[inline]
    fn apply_table(table: &[P2; 16], p: &mut SignedPauli, a: usize, b: usize) {
        let q = &mut p.pauli;
        let idx = q.x(a) as usize | (q.z(a) as usize) << 1 | (q.x(b) as usize) << 2 | (q.z(b) as usize) << 3;
        let img = table[idx];
        q.set(a, img.bits & 1 != 0, img.bits & 2 != 0);
        q.set(b, img.bits & 4 != 0, img.bits & 8 != 0);
        p.phase = (p.phase + img.phase) & 3;
    }

    /// In place `p ← U† p U` on bond `(a, b)`; indices are not checked.
    #[inline]
    pub(crate) fn heisenberg_in_place(&self, p: &mut SignedPauli, a: usize, b: usize) {
        Self::apply_table(&self.heis, p, a, b);
    }

    /// In place `p ← U p U†` on bond `(a, b)`; indices are not checked.
    #[inline]
    pub(crate) fn schrodinger_in_place(&self, p: &mut SignedPauli, a: usize, b: usize) {
        Self::apply_table(&self.schr, p, a, b);
    }

    fn check_bond(n: usize, bond: (usize, usize)) -> Result<()> {
        if bond.0 >= n || bond.1 >= n || bond.0 == bond.1 {
            return Err(Error::InvalidBond(bond.0, bond.1));
        }
        Ok(())
    }

    /// `U† p U` with the gate acting on `bond` (first index ↔ the gate's
    /// qubit 0).
    pub fn conjugate(&self, p: &SignedPauli, bond: (usize, usize)) -> Result<SignedPauli> {
        Self::check_bond(p.n_qubits(), bond)?;
        let mut out = p.clone();
        self.heisenberg_in_place(&mut out, bond.0, bond.1);
        Ok(out)
    }

    /// `U p U†`, the image under forward (Schrödinger) evolution.
    pub fn conjugate_forward(&self, p: &SignedPauli, bond: (usize, usize)) -> Result<SignedPauli> {
        Self::check_bond(p.n_qubits(), bond)?;
        let mut out = p.clone();
        self.schrodinger_in_place(&mut out, bond.0, bond.1);
        Ok(out)
    }
}

impl fmt::Debug for CliffordGate2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.image_labels();
        write!(f, "CliffordGate2[{a} {b} {c} {d}]")
    }
}

/// `U† P U` on the given bond.
pub fn gate_conjugate(g: &CliffordGate2, p: &SignedPauli, bond: (usize, usize)) -> Result<SignedPauli> {
    g.conjugate(p, bond)
}

fn random_sign<R: Rng + ?Sized>(rng: &mut R) -> u8 {
    if rng.random::<bool>() {
        2
    } else {
        0
    }
}

/// Uniform sample from the 11520 two-qubit Cliffords modulo phase.
///
/// Images are drawn one generator at a time among the signed Paulis that
/// satisfy the commutation constraints with the images already chosen:
/// 30 · 16 · 6 · 4 = 11520 equally likely outcomes.
pub fn random_two_qubit_clifford<R: Rng + ?Sized>(rng: &mut R) -> CliffordGate2 {
    let xa = P2 { bits: rng.random_range(1..16u8), phase: random_sign(rng) };

    let anti: Vec<u8> = (1..16u8).filter(|&b| !xa.commutes(P2 { bits: b, phase: 0 })).collect();
    debug_assert_eq!(anti.len(), 8);
    let za = P2 { bits: anti[rng.random_range(0..anti.len())], phase: random_sign(rng) };

    let comm: Vec<u8> = (1..16u8)
        .filter(|&b| {
            let q = P2 { bits: b, phase: 0 };
            xa.commutes(q) && za.commutes(q)
        })
        .collect();
    debug_assert_eq!(comm.len(), 3);
    let xb = P2 { bits: comm[rng.random_range(0..comm.len())], phase: random_sign(rng) };

    let rest: Vec<u8> = comm
        .iter()
        .copied()
        .filter(|&b| !xb.commutes(P2 { bits: b, phase: 0 }))
        .collect();
    debug_assert_eq!(rest.len(), 2);
    let zb = P2 { bits: rest[rng.random_range(0..rest.len())], phase: random_sign(rng) };

    CliffordGate2::from_p2([xa, za, xb, zb]).expect("sampled images are symplectic")
}
