//! Uniform sampling of n-qubit Clifford frames over GF(2).
//!
//! Images of `(X_i, Z_i)` are drawn one pair at a time: a uniform nonzero
//! vector `u` in the current symplectic subspace, then a uniform `v` in it
//! with `ω(u, v) = 1`, then recursion on the symplectic complement of the
//! pair. Counting choices gives `2^{n²} ∏ (4^j - 1) = |Sp(2n, 2)|`, one per
//! group element, so the result is exactly uniform.

use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, SignedPauli};
use crate::tableau::StabilizerTableau;

#[inline]
fn omega(a: &PauliString, b: &PauliString) -> bool {
    !a.commutes_unchecked(b)
}

fn combine<R: Rng + ?Sized>(n: usize, basis: &[PauliString], rng: &mut R) -> PauliString {
    let mut out = PauliString::identity(n);
    for b in basis {
        if rng.random::<bool>() {
            out.xor_assign(b);
        }
    }
    out
}

/// Images `(U†X_iU, U†Z_iU)` of a uniformly random symplectic map, as
/// unsigned strings.
pub fn random_symplectic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<(PauliString, PauliString)> {
    // Flat symplectic basis: [a_1, b_1, a_2, b_2, ...].
    let mut basis: Vec<PauliString> = (0..n)
        .flat_map(|i| {
            let mut x = PauliString::identity(n);
            x.set(i, true, false);
            let mut z = PauliString::identity(n);
            z.set(i, false, true);
            [x, z]
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u = loop {
            let u = combine(n, &basis, rng);
            if !u.is_identity() {
                break u;
            }
        };
        let v = loop {
            let v = combine(n, &basis, rng);
            if omega(&u, &v) {
                break v;
            }
        };
        // Project the remaining basis onto the complement of span(u, v),
        // then re-pair it.
        let mut pool: Vec<PauliString> = basis
            .drain(..)
            .map(|mut t| {
                let (tu, tv) = (omega(&t, &u), omega(&t, &v));
                if tv {
                    t.xor_assign(&u);
                }
                if tu {
                    t.xor_assign(&v);
                }
                t
            })
            .filter(|t| !t.is_identity())
            .collect();
        while let Some(a) = pool.pop() {
            let Some(j) = pool.iter().position(|t| omega(&a, t)) else {
                // `a` is a dependent combination that vanished in the span.
                continue;
            };
            let b = pool.swap_remove(j);
            for t in pool.iter_mut() {
                let (ta, tb) = (omega(t, &a), omega(t, &b));
                if tb {
                    t.xor_assign(&a);
                }
                if ta {
                    t.xor_assign(&b);
                }
            }
            pool.retain(|t| !t.is_identity());
            basis.push(a);
            basis.push(b);
        }
        out.push((u, v));
    }
    out
}

/// Unsigned generators of a uniformly random pure stabilizer state on `n`
/// qubits (images of `Z_i` under a random Clifford).
pub fn random_stabilizer_strings<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<PauliString> {
    random_symplectic(n, rng).into_iter().map(|(_, z)| z).collect()
}

/// A uniformly random pure stabilizer state with random signs.
pub fn random_stabilizer_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<StabilizerTableau> {
    let gens = random_stabilizer_strings(n, rng)
        .into_iter()
        .map(|g| SignedPauli::hermitian(g, rng.random::<bool>()))
        .collect();
    StabilizerTableau::from_generators(n, gens)
}

/// Whether `p` lies in the GF(2) span of `gens` (so `Tr(Pσ)² = 1` for the
/// stabilizer state they generate, whatever the signs).
pub fn in_span(gens: &[PauliString], p: &PauliString) -> Result<bool> {
    if let Some(g) = gens.iter().find(|g| g.n_qubits() != p.n_qubits()) {
        return Err(Error::LengthMismatch { left: g.n_qubits(), right: p.n_qubits() });
    }
    let n = p.n_qubits();
    let mut rows: Vec<PauliString> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let bit = |q: &PauliString, c: usize| if c < n { q.x(c) } else { q.z(c - n) };
    for g in gens {
        let mut r = g.clone();
        for (row, &c) in rows.iter().zip(&pivots) {
            if bit(&r, c) {
                r.xor_assign(row);
            }
        }
        if let Some(c) = (0..2 * n).find(|&c| bit(&r, c)) {
            for (row, _) in rows.iter_mut().zip(&pivots).filter(|(row, _)| bit(row, c)) {
                row.xor_assign(&r);
            }
            rows.push(r);
            pivots.push(c);
        }
    }
    let mut acc = p.clone();
    for (row, &c) in rows.iter().zip(&pivots) {
        if bit(&acc, c) {
            acc.xor_assign(row);
        }
    }
    Ok(acc.is_identity())
}
