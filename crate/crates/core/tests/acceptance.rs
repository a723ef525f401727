//! Acceptance criteria, one verdict line each.
//!
//! Run with `cargo test -p hyshadow --test acceptance`. Criteria listed in
//! `KNOWN_FAILURES` are reported as FAIL but do not fail the run; any other
//! failure exits nonzero.

use std::time::Instant;

use hyshadow::appendix::{
    perturbative_betas, statmech_curve, tfim_ground_state, toy_area, toy_monte_carlo, volume_beta, BlockToySpec,
    TFIM_TILT,
};
use hyshadow::dense::{channel_apply, enumerate_outcomes, verify_measurement_channel, DenseState};
use hyshadow::estimation::{circuit_weights, empirical_shadow_norm, ghz_demo, z_string, McPriorWeights, WeightProvider};
use hyshadow::scaling::{fit_beta_delta, parse_grid, sweep_and_minimize, DepthParams, NormCurve};
use hyshadow::symplectic::random_stabilizer_state;
use hyshadow::weights_mps::{evolve_mps, MpsParams};
use hyshadow::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

/// Criteria that fail for documented reasons (see the decision notes).
const KNOWN_FAILURES: &[u32] = &[5, 7];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn c1_ghz_demo() -> Verdict {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for row in ghz_demo(12, 3, p, &[1, 2, 4, 6], 50_000, 7, 10).unwrap() {
            let dev = (row.estimate.value - row.expected).abs();
            let z = if row.estimate.std_error > 0.0 { dev / row.estimate.std_error } else if dev == 0.0 { 0.0 } else { f64::INFINITY };
            println!(
                "    p={p} k={} w={:.3e} estimate={:+.4} ± {:.4} (expected {})",
                row.k, row.weight, row.estimate.value, row.estimate.std_error, row.expected
            );
            worst = worst.max(z);
            ok &= z <= 3.0;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(ok && secs < 600.0, format!("max |dev|/se = {worst:.2} (≤ 3), {secs:.1} s (< 600 s)"))
}

fn c2_shadow_norm() -> Verdict {
    let mut ok = true;
    let mut ratios = Vec::new();
    for p in [0.3, 0.6, 0.9] {
        let prior = ShadowSampler::new(12, 3, p, InitialStateSpec::Mixed).unwrap().shots(11, 0, 100_000).unwrap();
        let w = circuit_weights(12, 3, p).unwrap();
        for k in [1, 2, 4] {
            let z = z_string(12, k).unwrap();
            let norm = empirical_shadow_norm(&prior, &z, w.as_ref()).unwrap();
            let r = norm.value * w.weight(&z).unwrap();
            ok &= (0.8..=1.25).contains(&r);
            ratios.push(format!("p={p},k={k}:{r:.3}"));
        }
    }
    verdict(ok, format!("E P_σ² · w in [0.8, 1.25]: {}", ratios.join(" ")))
}

fn c3_exact_limits() -> Verdict {
    let mut dev: f64 = 0.0;
    let exact = evolve_exact(10, &WeightSchedule::for_circuit(40, 1.0).unwrap()).unwrap();
    for s in 0..10 {
        for k in 1..=10 - s {
            dev = dev.max((exact.consecutive_weight(s, k).unwrap() - 3f64.powi(-(k as i32))).abs());
        }
    }
    let mps = evolve_mps(32, &WeightSchedule::for_circuit(128, 1.0).unwrap(), MpsParams::default()).unwrap();
    for s in [0, 5, 13] {
        for k in 1..=12 {
            let w = mps.query_consecutive_weight(s, k).unwrap();
            dev = dev.max((w - 3f64.powi(-(k as i32))).abs());
        }
    }
    let mut two: f64 = 0.0;
    let zz: PauliString = "ZZ".parse().unwrap();
    for i in 0..=10 {
        let p = i as f64 / 10.0;
        let s = WeightSchedule::new(vec![TransferLayer::Measure(p), TransferLayer::Unitary(Parity::Odd)]).unwrap();
        let w = evolve_exact(2, &s).unwrap().weight_of(&zz).unwrap();
        two = two.max((w - (2.0 * p + p * p) / 15.0).abs());
    }
    let s = WeightSchedule::new(vec![TransferLayer::Measure(1.0), TransferLayer::Unitary(Parity::Odd)]).unwrap();
    let page = (evolve_exact(2, &s).unwrap().weight_of(&zz).unwrap() - 0.2).abs();
    verdict(
        dev < 1e-8 && two < 1e-12 && page < 1e-12,
        format!("deep p=1 max |w - 3^-k| = {dev:.1e} (< 1e-8); two-qubit max dev = {two:.1e}, Page dev = {page:.1e} (< 1e-12)"),
    )
}

fn c4_engine_equivalence() -> Verdict {
    let n = 12;
    let params = MpsParams { chi_max: 64, trunc_tol: 0.0 };
    let mut dev: f64 = 0.0;
    for i in 0..=10 {
        let p = i as f64 / 10.0;
        let s = WeightSchedule::for_circuit(4 * n, p).unwrap();
        let exact = evolve_exact(n, &s).unwrap();
        let mps = evolve_mps(n, &s, params).unwrap();
        for start in 0..n {
            for k in 1..=n - start {
                let a = exact.consecutive_weight(start, k).unwrap();
                let b = mps.query_consecutive_weight(start, k).unwrap();
                dev = dev.max((a - b).abs());
            }
        }
    }
    verdict(dev < 1e-8, format!("max |Δw| = {dev:.2e} over 11 rates and all consecutive supports, chi 64, no truncation tolerance (< 1e-8)"))
}

fn c5_scaling() -> Verdict {
    let t = Instant::now();
    let grid = parse_grid("0.05:0.95:0.05").unwrap();
    let params = MpsParams { chi_max: 128, trunc_tol: 1e-12 };
    let rep = sweep_and_minimize(&grid, 64, (8, 48), params, DepthParams::default()).unwrap();
    let secs = t.elapsed().as_secs_f64();
    for r in &rep.rows {
        println!(
            "    p={:.3} beta={:.4} delta={:+.3} rms={:.1e} depth={} converged={}",
            r.p, r.fit.beta, r.fit.delta, r.fit.rms, r.curve.depth, r.curve.converged
        );
    }
    for w in &rep.warnings {
        println!("    warning: {w}");
    }
    let beta_at = |p: f64| rep.rows.iter().find(|r| (r.p - p).abs() < 1e-9).unwrap().fit.beta;
    let i_min = rep
        .rows
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.fit.beta.total_cmp(&b.1.fit.beta))
        .unwrap()
        .0;
    let interior = i_min > 0 && i_min + 1 < rep.rows.len() && (0.08..=0.30).contains(&rep.p_star);
    let b_ok = (rep.beta_min - 2.23).abs() <= 0.10;
    let d_ok = (rep.fit_at_min.delta - 0.33).abs() <= 0.15;
    let hi = beta_at(0.95);
    let hi_ok = (2.85..=3.0).contains(&hi);
    let lo = beta_at(0.05);
    let lo_ok = lo > rep.beta_min + 0.3;

    // Reported only: the Markov weights against sampled prior weights at p*.
    let p_star = rep.p_star;
    let mc = McPriorWeights::sample_all(8, 8, p_star, 100_000, 21).unwrap();
    let ex = evolve_exact(8, &WeightSchedule::for_circuit(8, p_star).unwrap()).unwrap();
    let ratios: Vec<String> = (1..=4)
        .map(|k| {
            let z = z_string(8, k).unwrap();
            format!("k={k}:{:.3}", ex.weight_of(&z).unwrap() / mc.weight(&z).unwrap())
        })
        .collect();
    println!("    Markov/sampled weight ratio at p*, N=8, 8 layers: {}", ratios.join(" "));

    // Reported only: the same sweep with a shallower depth cap.
    let shallow = sweep_and_minimize(&grid, 64, (8, 48), params, DepthParams { tol: 1e-8, max_depth: Some(32) }).unwrap();
    println!(
        "    depth cap 32 (N/2): p* = {:.3}, beta_min = {:.4}, delta = {:.3}",
        shallow.p_star, shallow.beta_min, shallow.fit_at_min.delta
    );

    verdict(
        interior && b_ok && d_ok && hi_ok && lo_ok && secs < 3600.0,
        format!(
            "p* = {:.3} interior={interior}; beta_min = {:.4} (2.23 ± 0.10: {b_ok}); delta = {:.3} (0.33 ± 0.15: {d_ok}); \
             beta(0.95) = {hi:.4} ({hi_ok}); beta(0.05) = {lo:.4} > beta_min + 0.3 ({lo_ok}); {secs:.0} s",
            rep.p_star, rep.beta_min, rep.fit_at_min.delta
        ),
    )
}

fn c6_toys() -> Verdict {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut specs: Vec<BlockToySpec> = Vec::new();
    for n in 1..=3 {
        for m in 1..=3 {
            specs.push(BlockToySpec::area(n, m));
        }
    }
    for n in [2, 3] {
        for m in [1, 2] {
            specs.push(BlockToySpec::volume(n, m, 12));
        }
    }
    for (i, s) in specs.iter().enumerate() {
        let w = s.closed_form().unwrap().weight;
        let (mc, se) = toy_monte_carlo(s, 100_000, 100 + i as u64).unwrap();
        let z = (mc - w).abs() / se;
        worst = worst.max(z);
        ok &= z <= 3.0;
    }
    let b1 = toy_area(1, 1).unwrap().beta;
    let b20 = toy_area(20, 1).unwrap().beta;
    let bv: Vec<f64> = [0.1, 0.01, 0.001].iter().map(|&f| volume_beta(f).unwrap()).collect();
    let limits = b1 == 3.0 && (b20 / 2.0 - 1.0).abs() < 0.01 && bv.windows(2).all(|w| w[1] < w[0]) && (bv[2] - 2.0).abs() < 0.01;
    verdict(
        ok && limits,
        format!(
            "max |MC - closed form|/σ = {worst:.2} over {} cases (≤ 3); beta_area(1) = {b1}, beta_area(20) = {b20:.4}, \
             beta_volume(f = 0.1, 0.01, 0.001) = {:.4}, {:.4}, {:.4}",
            specs.len(),
            bv[0],
            bv[1],
            bv[2]
        ),
    )
}

fn c7_statmech() -> Verdict {
    let n = 12;
    let ratio_line = |h: f64, beta: f64| -> (bool, String) {
        let psi = tfim_ground_state(n, h, TFIM_TILT).unwrap();
        let curve = statmech_curve(&psi, 4).unwrap();
        let r: Vec<f64> = curve.iter().map(|&(k, w)| w * beta.powi(k as i32)).collect();
        let ok = r.iter().all(|x| (x - 1.0).abs() <= 0.05);
        (ok, r.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", "))
    };
    let (ok_lo, lo) = ratio_line(0.2, 1.0 + 2.0 / (0.2f64 / 4.0).tanh());
    let (ok_hi, hi) = ratio_line(5.0, 3.0 * (-2.0f64 / 45.0).exp());
    let psi = tfim_ground_state(n, 1.0, TFIM_TILT).unwrap();
    let curve = NormCurve {
        p: f64::NAN,
        n_qubits: n,
        points: statmech_curve(&psi, 10).unwrap().into_iter().map(|(k, w)| (k, -w.ln())).collect(),
        chi_max: 0,
        trunc_tol: 0.0,
        depth: 0,
        converged: true,
        discarded_max: 0.0,
    };
    let beta = fit_beta_delta(&curve, (2, 10)).unwrap().beta;
    let mid_ok = (2.0..=3.0).contains(&beta);
    // Sanity of the closed forms used above.
    let (bv, ba) = perturbative_betas(1.0, 1.0, 1.0).unwrap();
    assert!(ba == 3.0 && bv > 3.0);
    verdict(
        ok_lo && ok_hi && mid_ok,
        format!("w·β^k for k=1..4 at h/J=0.2: [{lo}]; at h/J=5: [{hi}] (each within 5% of 1); fitted beta at h/J=1: {beta:.3} (in [2, 3])"),
    )
}

fn c8_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let (mut snap, mut bayes, mut complete, mut halving): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..1000u64 {
        let n = 1 + (i % 3) as usize;
        let layers = rng.random_range(1..=3);
        let p = rng.random_range(0.0..=1.0);
        let rho_t = random_stabilizer_state(n, &mut rng).unwrap();
        let labels = rho_t.generators().iter().map(|g| g.to_string()).collect();
        let rec = ShadowSampler::new(n, layers, p, InitialStateSpec::Stabilizers(labels)).unwrap().shot(9, i).unwrap();
        let rho = DenseState::from_tableau(&rho_t).unwrap();
        let out = channel_apply(&rho, &rec.layers).unwrap();
        let sn = hyshadow::circuit::reconstruct_layers(n, &rec.layers).unwrap();
        let stab = DenseState::from_tableau(&sn.state).unwrap();
        snap = snap.max((&out.snapshot - &stab.matrix).iter().map(|c| c.norm()).fold(0.0, f64::max));
        halving = halving.max((out.prior_probability - (-(sn.halvings as f64)).exp2()).abs());
        let lhs = hyshadow::dense::trace(&out.snapshot.dot(&rho.matrix)).re;
        let rhs = out.probability / (out.prior_probability * (1u64 << n) as f64);
        bayes = bayes.max((lhs - rhs).abs());
        let circuit = Circuit {
            n_qubits: n,
            p,
            layers: rec
                .layers
                .iter()
                .map(|l| match l {
                    CircuitLayer::Measurement(ev) => {
                        CircuitLayer::Measurement(ev.iter().map(|e| MeasurementEvent { outcome: None, ..*e }).collect())
                    }
                    u => u.clone(),
                })
                .collect(),
        };
        let total: f64 = enumerate_outcomes(&circuit)
            .iter()
            .map(|ls| match channel_apply(&rho, ls) {
                Ok(o) => o.probability,
                Err(Error::Contradiction { .. }) => 0.0,
                Err(e) => panic!("{e}"),
            })
            .sum();
        complete = complete.max((total - 1.0).abs());
    }
    let exact_ok = snap < 1e-12 && bayes < 1e-12 && complete < 1e-12 && halving < 1e-12;

    // Off-diagonals: the 4σ single-entry false-alarm rate, shared across all
    // entries tested.
    let normal = Normal::new(0.0, 1.0).unwrap();
    let alpha = 2.0 * (1.0 - normal.cdf(4.0));
    let mut diag_ok = true;
    let mut lines = Vec::new();
    for (n, layers, p) in [(2, 2, 0.5), (3, 2, 0.4), (4, 3, 0.3)] {
        let r = verify_measurement_channel(n, layers, p, 100_000, 44).unwrap();
        let z_star = normal.inverse_cdf(1.0 - alpha / (2.0 * r.offdiag_tested.max(1) as f64));
        diag_ok &= r.rigid_offdiag == 0 && r.max_offdiag_z <= z_star;
        lines.push(format!("N={n}: max z {:.2} of {} entries (≤ {:.2})", r.max_offdiag_z, r.offdiag_tested, z_star));
    }
    verdict(
        exact_ok && diag_ok,
        format!(
            "snapshot {snap:.1e}, Bayes {bayes:.1e}, completeness {complete:.1e}, prior 2^-h {halving:.1e} (< 1e-12); off-diagonal {}",
            lines.join("; ")
        ),
    )
}

fn c9_unbiasedness() -> Verdict {
    let (n, layers, p, shots) = (3usize, 2usize, 0.6, 1_000_000u64);
    let weights = McPriorWeights::sample_all(n, layers, p, shots as usize, 901).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(902);
    let mut worst: f64 = 0.0;
    let n_paulis = 1usize << (2 * n);
    for state in 0..3u64 {
        let rho_t = random_stabilizer_state(n, &mut rng).unwrap();
        let rho = DenseState::from_tableau(&rho_t).unwrap();
        let labels = rho_t.generators().iter().map(|g| g.to_string()).collect();
        let sampler = ShadowSampler::new(n, layers, p, InitialStateSpec::Stabilizers(labels)).unwrap();
        // Σ Tr(Pσ) and Σ Tr(Pσ)² per Pauli over the posterior records.
        let (sum, sum_sq) = (0..shots)
            .into_par_iter()
            .map(|i| {
                let sigma = reconstruct_snapshot(&sampler.shot(903 + state, i).unwrap()).unwrap();
                sigma.stabilizer_group().unwrap()
            })
            .fold(
                || (vec![0.0; n_paulis], vec![0.0; n_paulis]),
                |(mut s, mut s2), group| {
                    for g in group {
                        let i = hyshadow::dense::pauli_index(g.pauli());
                        s[i] += if g.is_negative() { -1.0 } else { 1.0 };
                        s2[i] += 1.0;
                    }
                    (s, s2)
                },
            )
            .reduce(
                || (vec![0.0; n_paulis], vec![0.0; n_paulis]),
                |(mut a, mut a2), (b, b2)| {
                    for i in 0..n_paulis {
                        a[i] += b[i];
                        a2[i] += b2[i];
                    }
                    (a, a2)
                },
            );
        let m = shots as f64;
        for i in 1..n_paulis {
            let q = hyshadow::dense::pauli_from_index(n, i);
            let w = weights.weight(&q).unwrap();
            let w_se = weights.std_error(&q).unwrap();
            let mean_t = sum[i] / m;
            let se_t = ((sum_sq[i] / m - mean_t * mean_t).max(0.0) / (m - 1.0)).sqrt();
            let estimate = mean_t / w;
            // Error of the ratio, including the sampled weight.
            let se = ((se_t / w).powi(2) + (estimate * w_se / w).powi(2)).sqrt();
            let truth = rho.expectation(&q);
            let z = if se > 0.0 { (estimate - truth).abs() / se } else { (estimate - truth).abs() * 1e12 };
            worst = worst.max(z);
        }
    }
    verdict(worst <= 4.0, format!("max |estimate - Tr(Pρ)|/σ = {worst:.2} over 3 states × 63 Paulis (≤ 4)"))
}

type Criterion = (u32, &'static str, fn() -> Verdict);

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "GHZ demonstration", c1_ghz_demo),
        (2, "shadow-norm consistency", c2_shadow_norm),
        (3, "exact limits", c3_exact_limits),
        (4, "engine equivalence", c4_engine_equivalence),
        (5, "scaling reproduction", c5_scaling),
        (6, "toy models", c6_toys),
        (7, "stat-mech oracle", c7_statmech),
        (8, "oracle identities", c8_oracles),
        (9, "estimator unbiasedness", c9_unbiasedness),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let v = run();
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (v.pass, known) {
            (true, false) => "PASS",
            (true, true) => "PASS (listed as a known failure)",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {id} [{name}]: {tag}: {} [{:.1} s]", v.detail, t.elapsed().as_secs_f64());
        if !v.pass && !known {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
