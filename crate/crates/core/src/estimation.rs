//! Observable estimation from shadow records with inverse-weight estimators.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{reconstruct_snapshot, InitialStateSpec, ShadowRecord, ShadowSampler};
use crate::dense::{pauli_from_index, pauli_index, McWeights};
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::tableau::StabilizerTableau;
use crate::transfer::WeightSchedule;
use crate::weights_exact::{evolve_exact, RegionWeightVector, MAX_EXACT_QUBITS};
use crate::weights_mps::{evolve_mps, MpsParams, WeightMps};

/// Weights at or below this make an observable unreachable.
pub const EPS_W: f64 = 1e-12;

pub const DEFAULT_BATCHES: usize = 10;

/// Source of prior-snapshot Pauli weights `w(P)`.
pub trait WeightProvider: Sync {
    fn n_qubits(&self) -> usize;
    fn weight(&self, p: &PauliString) -> Result<f64>;
}

impl WeightProvider for RegionWeightVector {
    fn n_qubits(&self) -> usize {
        RegionWeightVector::n_qubits(self)
    }

    fn weight(&self, p: &PauliString) -> Result<f64> {
        self.weight_of(p)
    }
}

impl WeightProvider for WeightMps {
    fn n_qubits(&self) -> usize {
        WeightMps::n_qubits(self)
    }

    fn weight(&self, p: &PauliString) -> Result<f64> {
        self.weight_of(p)
    }
}

impl WeightProvider for McWeights {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn weight(&self, p: &PauliString) -> Result<f64> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::LengthMismatch { left: p.n_qubits(), right: self.n_qubits });
        }
        Ok(McWeights::weight(self, p))
    }
}

/// Monte-Carlo prior weights `E Tr(Pσ)²` from stabilizer sampling of the
/// circuit ensemble on the maximally mixed input.
#[derive(Clone, Debug)]
pub struct McPriorWeights {
    n_qubits: usize,
    shots: usize,
    index: HashMap<PauliString, usize>,
    mean: Vec<f64>,
    std_error: Vec<f64>,
}

impl McPriorWeights {
    /// Weights of the listed Paulis.
    pub fn sample(
        n_qubits: usize,
        n_unitary_layers: usize,
        p: f64,
        paulis: &[PauliString],
        shots: usize,
        seed: u64,
    ) -> Result<Self> {
        let sampler = ShadowSampler::new(n_qubits, n_unitary_layers, p, InitialStateSpec::Mixed)?;
        for q in paulis {
            if q.n_qubits() != n_qubits {
                return Err(Error::LengthMismatch { left: q.n_qubits(), right: n_qubits });
            }
        }
        let (sum, sum_sq) = (0..shots as u64)
            .into_par_iter()
            .map(|i| -> Result<Vec<f64>> {
                let sigma = reconstruct_snapshot(&sampler.shot(seed, i)?)?;
                Ok(sigma.trace_many(paulis)?.into_iter().map(|t| (t * t) as f64).collect())
            })
            .try_fold(
                || (vec![0.0; paulis.len()], vec![0.0; paulis.len()]),
                |(mut s, mut s2), v| {
                    let v = v?;
                    for (i, x) in v.into_iter().enumerate() {
                        s[i] += x;
                        s2[i] += x * x;
                    }
                    Ok::<_, Error>((s, s2))
                },
            )
            .try_reduce(
                || (vec![0.0; paulis.len()], vec![0.0; paulis.len()]),
                |(mut a, mut a2), (b, b2)| {
                    for i in 0..a.len() {
                        a[i] += b[i];
                        a2[i] += b2[i];
                    }
                    Ok((a, a2))
                },
            )?;
        let index = paulis.iter().cloned().enumerate().map(|(i, q)| (q, i)).collect();
        let (mean, std_error) = moments(&sum, &sum_sq, shots);
        Ok(Self { n_qubits, shots, index, mean, std_error })
    }

    /// Weights of all `4^N` Paulis (`N ≤ 8`), counting stabilizer-group
    /// members of each snapshot.
    pub fn sample_all(n_qubits: usize, n_unitary_layers: usize, p: f64, shots: usize, seed: u64) -> Result<Self> {
        const MAX_ALL: usize = 8;
        if n_qubits > MAX_ALL {
            return Err(Error::TooLarge { what: format!("all-Pauli weights on {n_qubits} qubits"), limit: MAX_ALL });
        }
        let sampler = ShadowSampler::new(n_qubits, n_unitary_layers, p, InitialStateSpec::Mixed)?;
        let n_paulis = 1usize << (2 * n_qubits);
        let counts = (0..shots as u64)
            .into_par_iter()
            .map(|i| -> Result<Vec<usize>> {
                let sigma = reconstruct_snapshot(&sampler.shot(seed, i)?)?;
                Ok(sigma.stabilizer_group()?.iter().map(|g| pauli_index(g.pauli())).collect())
            })
            .try_fold(
                || vec![0.0; n_paulis],
                |mut acc, idx| {
                    for i in idx? {
                        acc[i] += 1.0;
                    }
                    Ok::<_, Error>(acc)
                },
            )
            .try_reduce(
                || vec![0.0; n_paulis],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    Ok(a)
                },
            )?;
        // Tr(Pσ)² is 0 or 1, so the sum of squares equals the sum.
        let (mean, std_error) = moments(&counts, &counts, shots);
        let index = (0..n_paulis).map(|i| (pauli_from_index(n_qubits, i), i)).collect();
        Ok(Self { n_qubits, shots, index, mean, std_error })
    }

    pub fn shots(&self) -> usize {
        self.shots
    }

    pub fn std_error(&self, p: &PauliString) -> Option<f64> {
        self.index.get(p).map(|&i| self.std_error[i])
    }
}

fn moments(sum: &[f64], sum_sq: &[f64], shots: usize) -> (Vec<f64>, Vec<f64>) {
    let m = shots.max(1) as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let se = mean
        .iter()
        .zip(sum_sq)
        .map(|(mu, s2)| ((s2 / m - mu * mu).max(0.0) / (m - 1.0).max(1.0)).sqrt())
        .collect();
    (mean, se)
}

impl WeightProvider for McPriorWeights {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn weight(&self, p: &PauliString) -> Result<f64> {
        self.index
            .get(p)
            .map(|&i| self.mean[i])
            .ok_or_else(|| Error::param(format!("no Monte-Carlo weight sampled for {p}")))
    }
}

/// Markov-dynamics weights for the sampled circuit shape: dense for
/// `N ≤ 20`, MPS beyond.
pub fn circuit_weights(n_qubits: usize, n_unitary_layers: usize, p: f64) -> Result<Box<dyn WeightProvider>> {
    let schedule = WeightSchedule::for_circuit(n_unitary_layers, p)?;
    if n_qubits <= MAX_EXACT_QUBITS {
        Ok(Box::new(evolve_exact(n_qubits, &schedule)?))
    } else {
        Ok(Box::new(evolve_mps(n_qubits, &schedule, MpsParams::default())?))
    }
}

/// `O = Σ o_P P` over distinct Paulis.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSpec {
    terms: Vec<(f64, PauliString)>,
}

impl ObservableSpec {
    pub fn new(terms: Vec<(f64, PauliString)>) -> Result<Self> {
        let n = terms.first().map(|t| t.1.n_qubits()).ok_or_else(|| Error::param("empty observable"))?;
        let mut seen = std::collections::HashSet::new();
        for (c, p) in &terms {
            if !c.is_finite() {
                return Err(Error::param(format!("coefficient of {p} is not finite")));
            }
            if p.n_qubits() != n {
                return Err(Error::LengthMismatch { left: p.n_qubits(), right: n });
            }
            if !seen.insert(p.clone()) {
                return Err(Error::param(format!("repeated term {p}")));
            }
        }
        Ok(Self { terms })
    }

    pub fn pauli(p: PauliString) -> Self {
        Self { terms: vec![(1.0, p)] }
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn n_qubits(&self) -> usize {
        self.terms[0].1.n_qubits()
    }

    pub fn label(&self) -> String {
        match &self.terms[..] {
            [(c, p)] if *c == 1.0 => p.to_string(),
            t => t.iter().map(|(c, p)| format!("{c}*{p}")).collect::<Vec<_>>().join("+"),
        }
    }

    /// Weights of every term, rejecting unreachable ones.
    pub fn weights(&self, provider: &dyn WeightProvider) -> Result<Vec<f64>> {
        if provider.n_qubits() != self.n_qubits() {
            return Err(Error::LengthMismatch { left: provider.n_qubits(), right: self.n_qubits() });
        }
        self.terms
            .iter()
            .map(|(c, p)| {
                if p.is_identity() {
                    return Ok(1.0);
                }
                let w = provider.weight(p)?;
                if *c != 0.0 && w <= EPS_W {
                    return Err(Error::Incomplete { pauli: p.to_string(), weight: w });
                }
                Ok(w)
            })
            .collect()
    }

    fn evaluate(&self, sigma: &StabilizerTableau, weights: &[f64]) -> Result<f64> {
        let paulis: Vec<PauliString> = self.terms.iter().map(|t| t.1.clone()).collect();
        let traces = sigma.trace_many(&paulis)?;
        Ok(self
            .terms
            .iter()
            .zip(traces)
            .zip(weights)
            .filter(|((t, _), _)| t.0 != 0.0)
            .map(|(((c, _), tr), w)| c * tr as f64 / w)
            .sum())
    }
}

/// `O_σ = Σ o_P Tr(Pσ)/w(P)`.
pub fn single_shot_estimate(sigma: &StabilizerTableau, obs: &ObservableSpec, weights: &dyn WeightProvider) -> Result<f64> {
    let w = obs.weights(weights)?;
    obs.evaluate(sigma, &w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    Mean,
    MedianOfMeans,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub n_batches: usize,
    pub method: EstimateMethod,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Plain sample mean with its standard error.
pub fn mean_report(values: &[f64]) -> Result<EstimateReport> {
    if values.is_empty() {
        return Err(Error::param("no samples"));
    }
    let (mean, sd) = mean_sd(values);
    Ok(EstimateReport {
        value: mean,
        std_error: sd / (values.len() as f64).sqrt(),
        n_samples: values.len(),
        n_batches: 1,
        method: EstimateMethod::Mean,
    })
}

/// Median of `n_batches` contiguous batch means. The error is the
/// large-sample spread of a median, `√(π/2)·sd(batch means)/√B`.
pub fn median_of_means(values: &[f64], n_batches: usize) -> Result<EstimateReport> {
    if n_batches == 0 || n_batches > values.len() {
        return Err(Error::param(format!("{n_batches} batches for {} samples", values.len())));
    }
    if n_batches == 1 {
        return mean_report(values);
    }
    let n = values.len();
    let mut means: Vec<f64> = (0..n_batches)
        .map(|b| {
            let (lo, hi) = (b * n / n_batches, (b + 1) * n / n_batches);
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    let (_, sd) = mean_sd(&means);
    means.sort_by(f64::total_cmp);
    let mid = n_batches / 2;
    let value = if n_batches % 2 == 1 { means[mid] } else { 0.5 * (means[mid - 1] + means[mid]) };
    Ok(EstimateReport {
        value,
        std_error: (std::f64::consts::FRAC_PI_2).sqrt() * sd / (n_batches as f64).sqrt(),
        n_samples: n,
        n_batches,
        method: EstimateMethod::MedianOfMeans,
    })
}

fn snapshots(records: &[ShadowRecord]) -> Result<Vec<StabilizerTableau>> {
    records.par_iter().map(reconstruct_snapshot).collect()
}

/// Single-shot values of several observables over the same records.
pub fn single_shot_values(
    records: &[ShadowRecord],
    observables: &[ObservableSpec],
    weights: &dyn WeightProvider,
) -> Result<Vec<Vec<f64>>> {
    let ws = observables.iter().map(|o| o.weights(weights)).collect::<Result<Vec<_>>>()?;
    let per_record: Vec<Vec<f64>> = records
        .par_iter()
        .map(|r| {
            let sigma = reconstruct_snapshot(r)?;
            observables.iter().zip(&ws).map(|(o, w)| o.evaluate(&sigma, w)).collect()
        })
        .collect::<Result<_>>()?;
    Ok((0..observables.len()).map(|j| per_record.iter().map(|v| v[j]).collect()).collect())
}

pub fn estimate_observable(
    records: &[ShadowRecord],
    obs: &ObservableSpec,
    weights: &dyn WeightProvider,
    n_batches: usize,
) -> Result<EstimateReport> {
    if records.is_empty() {
        return Err(Error::param("no shadow records"));
    }
    let values = single_shot_values(records, std::slice::from_ref(obs), weights)?.remove(0);
    median_of_means(&values, n_batches)
}

/// `E (Tr(Pσ)/w(P))²` over prior records, to compare with `1/w(P)`.
pub fn empirical_shadow_norm(prior: &[ShadowRecord], p: &PauliString, weights: &dyn WeightProvider) -> Result<EstimateReport> {
    if prior.is_empty() {
        return Err(Error::param("no shadow records"));
    }
    if let Some(r) = prior.iter().find(|r| r.initial_state != InitialStateSpec::Mixed.to_string()) {
        return Err(Error::param(format!("record {} was not sampled on the maximally mixed input", r.shot_index)));
    }
    let w = ObservableSpec::pauli(p.clone()).weights(weights)?[0];
    let values: Vec<f64> = snapshots(prior)?
        .par_iter()
        .map(|s| s.trace_pauli(p).map(|t| (t * t) as f64 / (w * w)))
        .collect::<Result<_>>()?;
    mean_report(&values)
}

/// `E Tr(Pσ) / Tr(Pρ)` over posterior records on a known `ρ`: an estimate
/// of the prior weight that needs no post-selection.
pub fn benchmark_weight_from_known_state(records: &[ShadowRecord], p: &PauliString, tr_p_rho: f64) -> Result<EstimateReport> {
    if tr_p_rho == 0.0 || !tr_p_rho.is_finite() {
        return Err(Error::param(format!("Tr(Pρ) = {tr_p_rho} cannot be divided by")));
    }
    if records.is_empty() {
        return Err(Error::param("no shadow records"));
    }
    let values: Vec<f64> = snapshots(records)?
        .par_iter()
        .map(|s| s.trace_pauli(p).map(|t| t as f64 / tr_p_rho))
        .collect::<Result<_>>()?;
    mean_report(&values)
}

/// `Z^{⊗k}` on qubits `0..k`.
pub fn z_string(n: usize, k: usize) -> Result<PauliString> {
    PauliString::on_sites(n, 0..k, crate::pauli::Basis::Z)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GhzDemoRow {
    pub p: f64,
    pub k: usize,
    pub weight: f64,
    pub expected: f64,
    pub estimate: EstimateReport,
}

/// GHZ benchmark: `⟨Z^{⊗k}⟩` from `shots` records at rate `p`, with
/// weights from the Markov dynamics of the same circuit shape.
pub fn ghz_demo(
    n: usize,
    n_unitary_layers: usize,
    p: f64,
    ks: &[usize],
    shots: usize,
    seed: u64,
    n_batches: usize,
) -> Result<Vec<GhzDemoRow>> {
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > n) {
        return Err(Error::param(format!("k = {k} must lie in 1..={n}")));
    }
    let sampler = ShadowSampler::new(n, n_unitary_layers, p, InitialStateSpec::Ghz)?;
    let records = sampler.shots(seed, 0, shots as u64)?;
    let weights = circuit_weights(n, n_unitary_layers, p)?;
    let obs: Vec<ObservableSpec> = ks.iter().map(|&k| z_string(n, k).map(ObservableSpec::pauli)).collect::<Result<_>>()?;
    let values = single_shot_values(&records, &obs, weights.as_ref())?;
    ks.iter()
        .zip(&obs)
        .zip(values)
        .map(|((&k, o), v)| {
            Ok(GhzDemoRow {
                p,
                k,
                weight: weights.weight(&o.terms()[0].1)?,
                expected: if k % 2 == 0 { 1.0 } else { 0.0 },
                estimate: median_of_means(&v, n_batches)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::TransferLayer;

    #[test]
    fn zz_snapshot_arithmetic() {
        let sigma = StabilizerTableau::from_labels(2, &["+ZZ", "+XX"]).unwrap();
        let s = WeightSchedule::new(vec![TransferLayer::Measure(1.0), TransferLayer::Unitary(crate::Parity::Odd)]).unwrap();
        let w = evolve_exact(2, &s).unwrap();
        let obs = ObservableSpec::pauli("ZZ".parse().unwrap());
        assert!((single_shot_estimate(&sigma, &obs, &w).unwrap() - 5.0).abs() < 1e-12);
        let obs = ObservableSpec::pauli("ZI".parse().unwrap());
        assert_eq!(single_shot_estimate(&sigma, &obs, &w).unwrap(), 0.0);
    }

    #[test]
    fn incompleteness() {
        let w = evolve_exact(2, &WeightSchedule::for_circuit(2, 0.0).unwrap()).unwrap();
        let obs = ObservableSpec::pauli("ZZ".parse().unwrap());
        let err = single_shot_estimate(&StabilizerTableau::zero_state(2), &obs, &w).unwrap_err();
        assert!(matches!(err, Error::Incomplete { .. }));
    }

    #[test]
    fn median_of_means_basics() {
        let r = median_of_means(&[2.5; 40], 10).unwrap();
        assert_eq!((r.value, r.std_error, r.n_batches), (2.5, 0.0, 10));
        let v: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let r = median_of_means(&v, 3).unwrap();
        assert_eq!(r.value, 14.5);
        assert!(median_of_means(&v, 31).is_err());
        assert_eq!(median_of_means(&v, 1).unwrap().method, EstimateMethod::Mean);
    }

    #[test]
    fn observable_validation() {
        let z: PauliString = "ZI".parse().unwrap();
        assert!(ObservableSpec::new(vec![(1.0, z.clone()), (2.0, z.clone())]).is_err());
        assert!(ObservableSpec::new(vec![(f64::NAN, z)]).is_err());
        assert!(ObservableSpec::new(vec![]).is_err());
    }
}
