//! Cross-checks against independent references: dense matrices, a
//! Pauli-level weight chain, brute-force enumeration and Monte Carlo.

use std::collections::HashMap;

use hyshadow::appendix::{ef_inverse, ef_transform, statmech_curve, statmech_pauli_weight, tfim_ground_state, EntanglementFeature};
use hyshadow::circuit::reconstruct_layers;
use hyshadow::dense::{
    dagger, gate_unitary, kron, pauli_from_index, pauli_matrix, pauli_trace, signed_pauli_matrix, DenseState,
};
use hyshadow::estimation::McPriorWeights;
use hyshadow::scaling::{fit_beta_delta, shadow_norm_curve, DepthParams};
use hyshadow::symplectic::random_stabilizer_state;
use hyshadow::*;
use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn close(a: &Array2<C64>, b: &Array2<C64>, tol: f64) -> bool {
    (a - b).iter().all(|c| c.norm() < tol)
}

fn chi_square_p_value(counts: &[usize], expected: f64) -> f64 {
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    ChiSquared::new((counts.len() - 1) as f64).unwrap().sf(stat)
}

/// Signed two-qubit Pauli from an index in `0..64`: sign bit, then 4^2 letters.
fn signed_two_qubit(i: usize) -> SignedPauli {
    SignedPauli::hermitian(pauli_from_index(2, i % 16), (16..32).contains(&i))
}

#[test]
fn clifford_sampler_is_uniform_over_all_classes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draws = 1_152_000;
    let mut counts: HashMap<[String; 4], usize> = HashMap::new();
    for _ in 0..draws {
        *counts.entry(random_two_qubit_clifford(&mut rng).image_labels()).or_default() += 1;
    }
    assert_eq!(counts.len(), 11520);
    let c: Vec<usize> = counts.into_values().collect();
    let p = chi_square_p_value(&c, draws as f64 / 11520.0);
    assert!(p > 1e-4, "chi-square p-value {p}");
}

#[test]
fn clifford_images_spread_uniformly() {
    // Any non-identity Pauli maps to each of the 15 non-identity Paulis
    // equally often; the bond transfer rests on this.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let draws = 150_000;
    for label in ["+XI", "+YZ", "+IZ"] {
        let p: SignedPauli = label.parse().unwrap();
        let mut counts = [0usize; 16];
        for _ in 0..draws {
            let img = random_two_qubit_clifford(&mut rng).conjugate_forward(&p, (0, 1)).unwrap();
            counts[hyshadow::dense::pauli_index(img.pauli())] += 1;
        }
        assert_eq!(counts[0], 0);
        let pv = chi_square_p_value(&counts[1..], draws as f64 / 15.0);
        assert!(pv > 1e-4, "{label}: p-value {pv}");
    }
}

#[test]
fn random_gates_match_their_unitaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let g = random_two_qubit_clifford(&mut rng);
        let u = gate_unitary(&g);
        assert!(close(&u.dot(&dagger(&u)), &hyshadow::dense::identity(4), 1e-12));
        let i = rng.random_range(0..64);
        let p = signed_two_qubit(i);
        let m = signed_pauli_matrix(&p);
        let back = signed_pauli_matrix(&g.conjugate(&p, (0, 1)).unwrap());
        let fwd = signed_pauli_matrix(&g.conjugate_forward(&p, (0, 1)).unwrap());
        assert!(close(&back, &dagger(&u).dot(&m).dot(&u), 1e-12));
        assert!(close(&fwd, &u.dot(&m).dot(&dagger(&u)), 1e-12));
        // Reversed bond: the gate's qubit 0 sits on the high bit.
        let swap = gate_unitary(&CliffordGate2::swap());
        let rev = signed_pauli_matrix(&g.conjugate(&p, (1, 0)).unwrap());
        let u_rev = swap.dot(&u).dot(&swap);
        assert!(close(&rev, &dagger(&u_rev).dot(&m).dot(&u_rev), 1e-12));
        let h = g.inverse().then(&g);
        assert_eq!(h.image_labels(), CliffordGate2::identity().image_labels());
    }
}

/// Weight chain on all `4^N` Pauli strings. A measurement site keeps
/// identity and, with probability `p/3` per basis, exchanges weight between
/// identity and that basis letter; a bond spreads any non-identity Pauli
/// evenly over the 15 non-identity ones.
fn pauli_chain(n: usize, schedule: &WeightSchedule) -> Vec<f64> {
    let d = 1usize << (2 * n);
    let letter = |i: usize, j: usize| ((i >> j) & 1) | (((i >> (n + j)) & 1) << 1);
    let with_letter = |i: usize, j: usize, l: usize| (i & !(1 << j) & !(1 << (n + j))) | ((l & 1) << j) | ((l >> 1) << (n + j));
    let mut w = vec![0.0; d];
    w[0] = 1.0;
    for layer in &schedule.layers {
        match *layer {
            TransferLayer::Measure(p) => {
                for j in 0..n {
                    let mut next = vec![0.0; d];
                    for (i, &x) in w.iter().enumerate() {
                        if letter(i, j) == 0 {
                            next[i] += x;
                            for l in 1..4 {
                                next[with_letter(i, j, l)] += p / 3.0 * x;
                            }
                        } else {
                            next[i] += (1.0 - 2.0 * p / 3.0) * x;
                            next[with_letter(i, j, 0)] += p / 3.0 * x;
                        }
                    }
                    w = next;
                }
            }
            TransferLayer::Unitary(parity) => {
                for (a, b) in bonds(n, parity) {
                    let mut next = vec![0.0; d];
                    for (i, &x) in w.iter().enumerate() {
                        if letter(i, a) == 0 && letter(i, b) == 0 {
                            next[i] += x;
                            continue;
                        }
                        for la in 0..4 {
                            for lb in 0..4 {
                                if la + lb > 0 {
                                    next[with_letter(with_letter(i, a, la), b, lb)] += x / 15.0;
                                }
                            }
                        }
                    }
                    w = next;
                }
            }
        }
    }
    let w0 = w[0];
    w.iter().map(|x| x / w0).collect()
}

#[test]
fn region_engine_matches_pauli_level_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in [2, 3] {
        for _ in 0..20 {
            let layers = (0..rng.random_range(1..8))
                .map(|_| {
                    if rng.random_bool(0.5) {
                        TransferLayer::Measure(rng.random_range(0.0..=1.0))
                    } else {
                        TransferLayer::Unitary(if rng.random_bool(0.5) { Parity::Odd } else { Parity::Even })
                    }
                })
                .collect();
            let s = WeightSchedule::new(layers).unwrap();
            let reference = pauli_chain(n, &s);
            let exact = evolve_exact(n, &s).unwrap();
            for (i, &r) in reference.iter().enumerate() {
                let w = exact.weight_of(&pauli_from_index(n, i)).unwrap();
                assert!((w - r).abs() < 1e-12, "n={n} {:?}: {w} vs {r}", pauli_from_index(n, i));
            }
        }
    }
}

#[test]
fn sampled_prior_matches_two_qubit_closed_form() {
    // In time: no measurement, a gate, a measurement layer at rate p.
    let zz: PauliString = "ZZ".parse().unwrap();
    for (p, seed) in [(0.2, 10u64), (0.5, 11), (1.0, 12)] {
        let shots = 200_000u64;
        let hits: usize = (0..shots)
            .into_par_iter()
            .map(|i| {
                let mut rng = hyshadow::circuit::shot_rng(seed, i);
                let mut events = Vec::new();
                for q in 0..2 {
                    if rng.random_bool(p) {
                        events.push(MeasurementEvent { qubit: q, basis: Basis::ALL[rng.random_range(0..3)], outcome: None });
                    }
                }
                let circuit = Circuit {
                    n_qubits: 2,
                    p,
                    layers: vec![
                        CircuitLayer::Measurement(vec![]),
                        CircuitLayer::Unitary { parity: Parity::Odd, gates: vec![random_two_qubit_clifford(&mut rng)] },
                        CircuitLayer::Measurement(events),
                        CircuitLayer::Unitary { parity: Parity::Even, gates: vec![] },
                    ],
                };
                let (executed, _) = run_forward(&StabilizerTableau::maximally_mixed(2), &circuit, &mut rng).unwrap();
                let sigma = reconstruct_layers(2, &executed).unwrap().state;
                sigma.trace_pauli(&zz).unwrap().unsigned_abs() as usize
            })
            .sum();
        let w = (2.0 * p + p * p) / 15.0;
        let mean = hits as f64 / shots as f64;
        let se = (w * (1.0 - w) / shots as f64).sqrt();
        assert!((mean - w).abs() < 4.0 * se, "p={p}: {mean} vs {w}");
        let s = WeightSchedule::new(vec![TransferLayer::Measure(p), TransferLayer::Unitary(Parity::Odd)]).unwrap();
        assert!((evolve_exact(2, &s).unwrap().weight_of(&zz).unwrap() - w).abs() < 1e-15);
    }
}

#[test]
fn single_layer_prior_weights_are_products() {
    // One period [M, U]: the snapshot is a product of single-site
    // projections, so w(P) = (p/3)^{|P|} exactly.
    let (n, p) = (3, 0.7);
    let mc = McPriorWeights::sample_all(n, 1, p, 200_000, 13).unwrap();
    let exact = evolve_exact(n, &WeightSchedule::for_circuit(1, p).unwrap()).unwrap();
    for i in 1..1usize << (2 * n) {
        let q = pauli_from_index(n, i);
        let w = exact.weight_of(&q).unwrap();
        assert!((w - (p / 3.0).powi(q.weight() as i32)).abs() < 1e-15);
        let se = (w * (1.0 - w) / 200_000.0).sqrt().max(1e-9);
        let got = hyshadow::estimation::WeightProvider::weight(&mc, &q).unwrap();
        assert!((got - w).abs() < 4.5 * se, "{q}: {got} vs {w}");
    }
}

#[test]
fn entanglement_features_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=5 {
        for trial in 0..6 {
            // Pure states, and mixed snapshots from prior records.
            let sigma = if trial % 2 == 0 {
                random_stabilizer_state(n, &mut rng).unwrap()
            } else {
                let rec = ShadowSampler::new(n, 2, 0.4, InitialStateSpec::Mixed).unwrap().shot(6, trial).unwrap();
                reconstruct_snapshot(&rec).unwrap()
            };
            let dense = DenseState::from_tableau(&sigma).unwrap();
            let regions = 1usize << n;
            let purities: Vec<f64> = (0..regions)
                .map(|a| {
                    let sites: Vec<usize> = (0..n).filter(|j| a >> j & 1 == 1).collect();
                    if sites.is_empty() {
                        1.0
                    } else {
                        dense.region_purity(&sites)
                    }
                })
                .collect();
            // Mean of Tr(Pσ)² over Paulis with exact support A.
            let mut by_support = vec![0.0; regions];
            for i in 0..1usize << (2 * n) {
                let q = pauli_from_index(n, i);
                by_support[q.support_mask() as usize] += pauli_trace(&q, &dense.matrix).norm_sqr();
            }
            for (a, v) in by_support.iter_mut().enumerate() {
                *v /= 3f64.powi(a.count_ones() as i32);
            }
            let w = ef_transform(&EntanglementFeature::new(n, purities.clone()).unwrap());
            for a in 0..regions {
                assert!((w[a] - by_support[a]).abs() < 1e-12, "n={n} A={a:b}: {} vs {}", w[a], by_support[a]);
                let sites: Vec<usize> = (0..n).filter(|j| a >> j & 1 == 1).collect();
                if !sites.is_empty() {
                    assert!((sigma.region_purity(&sites).unwrap() - purities[a]).abs() < 1e-12);
                }
            }
            let back = ef_inverse(n, &w).unwrap();
            assert!(back.values.iter().zip(&purities).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }
}

#[test]
fn statmech_weight_matches_operator_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 4;
    let theta2 = Array2::from_shape_fn((2, 2), |(i, j)| C64::new(if i == 0 && j == 0 { 2.0 } else { 0.0 }, 0.0));
    let x = pauli_matrix(&"X".parse().unwrap());
    for _ in 0..10 {
        let psi: Vec<f64> = (0..1 << n).map(|_| rng.random_range(0.0..1.0)).collect();
        let zero_bra = |op: &Array2<C64>| -> f64 { (0..1 << n).map(|s| op[[0, s]].re * psi[s]).sum() };
        let mask: usize = rng.random_range(1..1 << n);
        // Site j on the low bits: build the product with site 0 last in the kron.
        let mut num = Array2::from_elem((1, 1), C64::new(1.0, 0.0));
        let mut den = num.clone();
        for j in (0..n).rev() {
            let f = &theta2 + &x;
            num = kron(&num, if mask >> j & 1 == 1 { &x } else { &f });
            den = kron(&den, &f);
        }
        let sites: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
        let w = statmech_pauli_weight(&psi, &sites).unwrap();
        assert!((w - zero_bra(&num) / zero_bra(&den)).abs() < 1e-12);
    }
}

#[test]
fn statmech_limits_and_monotonicity() {
    for n in [4, 6, 8] {
        // Large field: the product |+…+⟩ gives 3^-k.
        let psi = tfim_ground_state(n, 1e4, 0.0).unwrap();
        for (k, w) in statmech_curve(&psi, n).unwrap() {
            assert!((w * 3f64.powi(k as i32) - 1.0).abs() < 1e-3, "n={n} k={k}");
        }
        for h in [0.3, 1.0, 3.0] {
            let c = statmech_curve(&tfim_ground_state(n, h, 1e-6).unwrap(), n).unwrap();
            assert!(c.windows(2).all(|p| p[1].1 < p[0].1 && p[1].1 > 0.0), "n={n} h={h}");
        }
    }
}

#[test]
fn statmech_weight_against_field() {
    // Rises from 0 in the ordered phase. Short strings approach 3^-k from
    // below; from k = 3 on the weight overshoots 3^-k and relaxes back from
    // above, as a base 3e^{-2J/9h} < 3 implies.
    let n = 8;
    let grid: Vec<f64> = (0..20).map(|i| 0.05 * 1.4f64.powi(i)).collect();
    let curves: Vec<Vec<(usize, f64)>> =
        grid.iter().map(|&h| statmech_curve(&tfim_ground_state(n, h, 1e-6).unwrap(), 4).unwrap()).collect();
    for k in 1..=4 {
        let page = 3f64.powi(-(k as i32));
        let ws: Vec<f64> = curves.iter().map(|c| c[k - 1].1).collect();
        assert!(ws[0] < 0.05 * page, "k={k}: {ws:?}");
        let peak = ws.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(ws[..=peak].windows(2).all(|w| w[1] > w[0]), "k={k}: {ws:?}");
        if k <= 2 {
            assert_eq!(peak, ws.len() - 1, "k={k}: {ws:?}");
            assert!(ws.iter().all(|&w| w < page));
        } else {
            assert!(ws[peak] > page && ws[peak..].windows(2).all(|w| w[1] < w[0]), "k={k}: {ws:?}");
        }
        assert!((ws[ws.len() - 1] / page - 1.0).abs() < 0.05);
    }
}

#[test]
fn mps_matches_exact_on_deep_circuits() {
    let params = MpsParams { chi_max: 64, trunc_tol: 0.0 };
    for (n, depth, p) in [(10, 20, 0.15), (10, 40, 0.5), (12, 24, 0.05), (12, 48, 0.9)] {
        let s = WeightSchedule::for_circuit(depth, p).unwrap();
        let exact = evolve_exact(n, &s).unwrap();
        let mps = evolve_mps(n, &s, params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(depth as u64);
        for _ in 0..200 {
            let mask: u64 = rng.random_range(1..1 << n);
            let support: Vec<bool> = (0..n).map(|j| mask >> j & 1 == 1).collect();
            let a = exact.query_weight(mask).unwrap();
            let b = mps.query_support(&support).unwrap();
            assert!((a - b).abs() < 1e-10 && ((a.ln() - b.ln()).abs() < 1e-6), "n={n} p={p} mask={mask:b}: {a} vs {b}");
        }
    }
}

#[test]
fn mps_weights_stay_in_unit_interval() {
    let n = 32;
    for p in [0.05, 0.2, 0.6, 1.0] {
        let mps = evolve_mps(n, &WeightSchedule::for_circuit(64, p).unwrap(), MpsParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let support: Vec<bool> = (0..n).map(|_| rng.random_bool(0.2)).collect();
            let w = mps.query_support(&support).unwrap();
            assert!((0.0..=1.0 + 1e-12).contains(&w), "p={p}: {w}");
        }
        for k in 1..=n {
            let w = mps.query_consecutive_weight(0, k).unwrap();
            assert!(w > 0.0 && w <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn norm_curves_converge_in_bond_dimension() {
    let depth = DepthParams { tol: 1e-8, max_depth: Some(64) };
    for p in [0.15, 0.5] {
        let lo = shadow_norm_curve(32, p, 24, MpsParams { chi_max: 64, trunc_tol: 1e-12 }, depth).unwrap();
        let hi = shadow_norm_curve(32, p, 24, MpsParams { chi_max: 128, trunc_tol: 1e-12 }, depth).unwrap();
        for ((k, a), (_, b)) in lo.points.iter().zip(&hi.points) {
            assert!((a - b).abs() < 1e-3 * b.abs().max(1.0), "p={p} k={k}: {a} vs {b}");
        }
        // ln‖P‖² grows with the string length.
        assert!(hi.points.windows(2).all(|w| w[1].1 > w[0].1));
    }
}

#[test]
fn full_measurement_curve_fits_beta_three() {
    let curve = shadow_norm_curve(48, 1.0, 40, MpsParams::default(), DepthParams::default()).unwrap();
    assert!(curve.converged);
    let fit = fit_beta_delta(&curve, (8, 40)).unwrap();
    assert!((fit.beta - 3.0).abs() < 1e-8, "{fit:?}");
    assert!(fit.delta.abs() < 1e-6);
    assert!(fit.rms < 1e-8);
}
