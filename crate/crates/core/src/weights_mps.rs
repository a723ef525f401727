//! Matrix-product-state weight evolution for long chains.
//!
//! Each site carries a two-dimensional region index (identity / non-identity).
//! Tensors are kept in mixed-canonical form around `center`; measurement
//! layers are single-site and are stored as pending 2×2 factors that get
//! folded into the next two-site update touching the site, so they never
//! spoil the canonical form. Two-site updates are truncated by SVD.
//!
//! Internally the non-identity component is stored as `mass / c` per site
//! with `c = √3`, which keeps the vector entries of size comparable to the
//! per-Pauli weights `w̄(A) = 3^{|A|/2} w(P)`.

use ndarray::{s, Array2, Array3, ArrayView2};
use ndarray_linalg::{JobSvd, QR, SVDDC};

use crate::circuit::Parity;
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::transfer::{check_rate, meas_transfer, unitary_transfer, TransferLayer, WeightSchedule};
use crate::weights_exact::{RegionWeightVector, SteadyState, MAX_EXACT_QUBITS};

type Mat2 = [[f64; 2]; 2];

/// Physical-index gauge: internal component = mass / GAUGE on each
/// non-identity site.
const GAUGE: f64 = 1.732_050_807_568_877_2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MpsParams {
    pub chi_max: usize,
    /// Largest discarded fraction of squared singular-value mass per update.
    pub trunc_tol: f64,
}

impl Default for MpsParams {
    fn default() -> Self {
        Self { chi_max: 128, trunc_tol: 1e-12 }
    }
}

impl MpsParams {
    pub fn validate(&self) -> Result<()> {
        if self.chi_max < 1 {
            return Err(Error::param("chi_max must be at least 1"));
        }
        if !(self.trunc_tol >= 0.0 && self.trunc_tol < 1.0) {
            return Err(Error::param(format!("trunc_tol {} outside [0, 1)", self.trunc_tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct WeightMps {
    n: usize,
    tensors: Vec<Array3<f64>>,
    pending: Vec<Option<Mat2>>,
    center: usize,
    log_scale: f64,
    params: MpsParams,
    normalized: bool,
    sweep_right: bool,
    discarded_total: f64,
    discarded_max: f64,
}

fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn to_gauge(m: Mat2) -> Mat2 {
    [[m[0][0], m[0][1] * GAUGE], [m[1][0] / GAUGE, m[1][1]]]
}

fn linalg(e: ndarray_linalg::error::LinalgError) -> Error {
    Error::Linalg(e.to_string())
}

impl WeightMps {
    /// `w_0 = δ_{A,∅}` as a bond-dimension-1 product state.
    pub fn identity(n_qubits: usize, params: MpsParams) -> Result<Self> {
        params.validate()?;
        if n_qubits < 2 {
            return Err(Error::param("the MPS engine needs at least two qubits"));
        }
        let site = Array3::from_shape_vec((1, 2, 1), vec![1.0, 0.0]).expect("shape");
        Ok(Self {
            n: n_qubits,
            tensors: vec![site; n_qubits],
            pending: vec![None; n_qubits],
            center: 0,
            log_scale: 0.0,
            params,
            normalized: true,
            sweep_right: true,
            discarded_total: 0.0,
            discarded_max: 0.0,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> MpsParams {
        self.params
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors.iter().skip(1).map(|t| t.dim().0).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn canonical_center(&self) -> usize {
        self.center
    }

    /// Sum of discarded squared-singular-value fractions over all updates.
    pub fn discarded_total(&self) -> f64 {
        self.discarded_total
    }

    /// Largest discarded fraction of any single update.
    pub fn discarded_max(&self) -> f64 {
        self.discarded_max
    }

    /// Multiplies the represented vector by `factor > 0`.
    pub fn scale(&mut self, factor: f64) -> Result<()> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::param("scale factor must be positive"));
        }
        self.log_scale += factor.ln();
        self.normalized = false;
        Ok(())
    }

    pub fn apply_measurement(&mut self, p: f64) -> Result<()> {
        let m = to_gauge(meas_transfer(p)?);
        for slot in &mut self.pending {
            *slot = Some(match slot {
                Some(prev) => mat2_mul(&m, prev),
                None => m,
            });
        }
        self.normalized = false;
        Ok(())
    }

    pub fn apply_unitary_layer(&mut self, parity: Parity) -> Result<()> {
        let mut bonds: Vec<usize> = (parity.offset()..self.n - 1).step_by(2).collect();
        if !self.sweep_right {
            bonds.reverse();
        }
        for j in bonds {
            self.apply_bond(j)?;
        }
        self.sweep_right = !self.sweep_right;
        self.normalized = false;
        Ok(())
    }

    pub fn apply(&mut self, schedule: &WeightSchedule) -> Result<()> {
        for layer in &schedule.layers {
            match *layer {
                TransferLayer::Measure(p) => self.apply_measurement(p)?,
                TransferLayer::Unitary(parity) => self.apply_unitary_layer(parity)?,
            }
        }
        Ok(())
    }

    fn move_center(&mut self, target: usize) -> Result<()> {
        while self.center < target {
            let i = self.center;
            let (l, _, r) = self.tensors[i].dim();
            let m = self.tensors[i].to_shape((l * 2, r)).expect("contiguous").to_owned();
            let (q, rr) = m.qr().map_err(linalg)?;
            let k = q.ncols();
            self.tensors[i] = q.into_shape_with_order((l, 2, k)).expect("shape");
            let next = &self.tensors[i + 1];
            let (nl, _, nr) = next.dim();
            let nm = next.to_shape((nl, 2 * nr)).expect("contiguous");
            self.tensors[i + 1] = rr.dot(&nm).into_shape_with_order((k, 2, nr)).expect("shape");
            self.center += 1;
        }
        while self.center > target {
            let i = self.center;
            let (l, _, r) = self.tensors[i].dim();
            let m = self.tensors[i].to_shape((l, 2 * r)).expect("contiguous").to_owned();
            let (q, rr) = m.t().qr().map_err(linalg)?;
            let k = q.ncols();
            self.tensors[i] = q.t().as_standard_layout().into_owned().into_shape_with_order((k, 2, r)).expect("shape");
            let prev = &self.tensors[i - 1];
            let (pl, _, pr) = prev.dim();
            let pm = prev.to_shape((pl * 2, pr)).expect("contiguous");
            self.tensors[i - 1] = pm.dot(&rr.t()).into_shape_with_order((pl, 2, k)).expect("shape");
            self.center -= 1;
        }
        Ok(())
    }

    /// Two-site update on `(j, j+1)` with pending factors folded in.
    fn apply_bond(&mut self, j: usize) -> Result<()> {
        let right = self.sweep_right;
        self.move_center(if right { j } else { j + 1 })?;

        // Gate in the internal gauge: G'[i][k] = G[i][k] · c^{|k| - |i|}.
        let g = unitary_transfer();
        let pa = self.pending[j].take().unwrap_or([[1.0, 0.0], [0.0, 1.0]]);
        let pb = self.pending[j + 1].take().unwrap_or([[1.0, 0.0], [0.0, 1.0]]);
        let mut full = [[0.0; 4]; 4];
        for (i, row) in full.iter_mut().enumerate() {
            for (k, slot) in row.iter_mut().enumerate() {
                *slot = (0..4)
                    .map(|m: usize| {
                        let gauge = GAUGE.powi(m.count_ones() as i32 - i.count_ones() as i32);
                        g[i][m] * gauge * pa[m & 1][k & 1] * pb[m >> 1][k >> 1]
                    })
                    .sum();
            }
        }

        let a = &self.tensors[j];
        let b = &self.tensors[j + 1];
        let (l, _, mid) = a.dim();
        let r = b.dim().2;
        let theta = a
            .to_shape((l * 2, mid))
            .expect("contiguous")
            .dot(&b.to_shape((mid, 2 * r)).expect("contiguous"));
        let theta = theta.into_shape_with_order((l, 2, 2, r)).expect("shape");
        // Row index (left, s_j), column index (s_{j+1}, right).
        let mut out = Array2::<f64>::zeros((l * 2, 2 * r));
        for sa in 0..2 {
            for sb in 0..2 {
                let i = sa + 2 * sb;
                let mut block = out.slice_mut(s![sa..; 2, sb * r..(sb + 1) * r]);
                for ka in 0..2 {
                    for kb in 0..2 {
                        let c = full[i][ka + 2 * kb];
                        if c != 0.0 {
                            block.scaled_add(c, &theta.slice(s![.., ka, kb, ..]));
                        }
                    }
                }
            }
        }
        let (u, sv, vt) = self.truncated_svd(out.view())?;
        let k = sv.len();
        let norm = sv.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::ZeroMass);
        }
        self.log_scale += norm.ln();
        let sv: Vec<f64> = sv.iter().map(|x| x / norm).collect();
        if right {
            self.tensors[j] = u.into_shape_with_order((l, 2, k)).expect("shape");
            let mut sv_vt = vt;
            for (mut row, s) in sv_vt.rows_mut().into_iter().zip(&sv) {
                row *= *s;
            }
            self.tensors[j + 1] = sv_vt.into_shape_with_order((k, 2, r)).expect("shape");
            self.center = j + 1;
        } else {
            let mut u_s = u;
            for (mut col, s) in u_s.columns_mut().into_iter().zip(&sv) {
                col *= *s;
            }
            self.tensors[j] = u_s.into_shape_with_order((l, 2, k)).expect("shape");
            self.tensors[j + 1] = vt.into_shape_with_order((k, 2, r)).expect("shape");
            self.center = j;
        }
        Ok(())
    }

    fn truncated_svd(&mut self, m: ArrayView2<f64>) -> Result<(Array2<f64>, Vec<f64>, Array2<f64>)> {
        let (u, sv, vt) = m.svddc(JobSvd::Some).map_err(linalg)?;
        let (u, vt) = (u.expect("requested U"), vt.expect("requested VT"));
        let total: f64 = sv.iter().map(|x| x * x).sum();
        let mut keep = sv.len().min(self.params.chi_max);
        // Drop exact zeros, then trim the tail while it stays within tolerance.
        while keep > 1 && sv[keep - 1] <= f64::MIN_POSITIVE {
            keep -= 1;
        }
        let tail = |k: usize| sv.iter().skip(k).map(|x| x * x).sum::<f64>();
        while keep > 1 && tail(keep - 1) <= self.params.trunc_tol * total {
            keep -= 1;
        }
        let discarded = if total > 0.0 { tail(keep) / total } else { 0.0 };
        self.discarded_total += discarded;
        self.discarded_max = self.discarded_max.max(discarded);
        let u = u.slice(s![.., ..keep]).as_standard_layout().into_owned();
        let vt = vt.slice(s![..keep, ..]).as_standard_layout().into_owned();
        Ok((u, sv.iter().take(keep).copied().collect(), vt))
    }

    /// `ln` of the contraction with per-site row selectors (mass convention),
    /// and its sign.
    fn contract(&self, selectors: &[[f64; 2]]) -> (f64, f64) {
        let mut v = vec![1.0];
        let mut log = self.log_scale;
        for (j, sel) in selectors.iter().enumerate() {
            let mut sel = [sel[0], sel[1] * GAUGE];
            if let Some(p) = &self.pending[j] {
                sel = [sel[0] * p[0][0] + sel[1] * p[1][0], sel[0] * p[0][1] + sel[1] * p[1][1]];
            }
            let t = &self.tensors[j];
            let (l, _, r) = t.dim();
            let mut next = vec![0.0; r];
            for a in 0..l {
                if v[a] == 0.0 {
                    continue;
                }
                for s in 0..2 {
                    let c = v[a] * sel[s];
                    if c != 0.0 {
                        for (b, x) in next.iter_mut().enumerate() {
                            *x += c * t[[a, s, b]];
                        }
                    }
                }
            }
            let scale = next.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if scale == 0.0 {
                return (f64::NEG_INFINITY, 0.0);
            }
            log += scale.ln();
            v = next.into_iter().map(|x| x / scale).collect();
        }
        (log + v[0].abs().ln(), v[0].signum())
    }

    fn support_selectors(&self, support: &[bool]) -> Vec<[f64; 2]> {
        support
            .iter()
            .map(|&inside| if inside { [0.0, 1.0 / 3.0] } else { [1.0, 0.0] })
            .collect()
    }

    /// `ln masses[∅]` of the unnormalized vector.
    pub fn log_identity_mass(&self) -> f64 {
        self.contract(&vec![[1.0, 0.0]; self.n]).0
    }

    /// Rescales so the identity-sector contraction equals 1.
    pub fn normalize(&mut self) -> Result<()> {
        let (log, sign) = self.contract(&vec![[1.0, 0.0]; self.n]);
        if !(sign > 0.0 && log.is_finite()) {
            return Err(Error::ZeroMass);
        }
        self.log_scale -= log;
        self.normalized = true;
        Ok(())
    }

    /// `ln w(P)` for a Pauli with the given support pattern; errors if the
    /// contraction is not positive.
    pub fn query_log_weight(&self, support: &[bool]) -> Result<f64> {
        if !self.normalized {
            return Err(Error::Unnormalized);
        }
        if support.len() != self.n {
            return Err(Error::LengthMismatch { left: support.len(), right: self.n });
        }
        let (log, sign) = self.contract(&self.support_selectors(support));
        if sign > 0.0 {
            Ok(log)
        } else {
            Err(Error::Incomplete { pauli: support_label(support), weight: if sign < 0.0 { -log.exp() } else { 0.0 } })
        }
    }

    /// `w(P)` for a support pattern (may be slightly negative from truncation).
    pub fn query_support(&self, support: &[bool]) -> Result<f64> {
        if !self.normalized {
            return Err(Error::Unnormalized);
        }
        if support.len() != self.n {
            return Err(Error::LengthMismatch { left: support.len(), right: self.n });
        }
        let (log, sign) = self.contract(&self.support_selectors(support));
        Ok(sign * log.exp())
    }

    pub fn query_consecutive_weight(&self, start: usize, k: usize) -> Result<f64> {
        self.query_support(&consecutive(self.n, start, k)?)
    }

    pub fn query_consecutive_log_weight(&self, start: usize, k: usize) -> Result<f64> {
        self.query_log_weight(&consecutive(self.n, start, k)?)
    }

    pub fn weight_of(&self, p: &PauliString) -> Result<f64> {
        let support: Vec<bool> = (0..p.n_qubits()).map(|i| p.site(i).is_some()).collect();
        self.query_support(&support)
    }

    /// Full mass vector; only for `N ≤ 20`.
    pub fn to_dense(&self) -> Result<RegionWeightVector> {
        if self.n > MAX_EXACT_QUBITS {
            return Err(Error::TooLarge { what: format!("dense conversion of {} sites", self.n), limit: MAX_EXACT_QUBITS });
        }
        // rows: region index over the sites so far; columns: open bond.
        let mut acc = Array2::<f64>::ones((1, 1));
        for j in 0..self.n {
            let t = &self.tensors[j];
            let (l, _, r) = t.dim();
            let p = self.pending[j].unwrap_or([[1.0, 0.0], [0.0, 1.0]]);
            let mut next = Array2::<f64>::zeros((acc.nrows() * 2, r));
            for s in 0..2 {
                // Σ_{s'} p[s][s'] A[:, s', :] with the gauge undone on the output index.
                let mut local = Array2::<f64>::zeros((l, r));
                for s2 in 0..2 {
                    local.scaled_add(p[s][s2], &t.slice(s![.., s2, ..]));
                }
                if s == 1 {
                    local *= GAUGE;
                }
                let rows = acc.nrows();
                next.slice_mut(s![s * rows..(s + 1) * rows, ..]).assign(&acc.dot(&local));
            }
            acc = next;
        }
        // Row index currently has site j as its most significant bit at step j,
        // i.e. site j ↔ bit j of the region mask.
        let scale = self.log_scale.exp();
        let masses: Vec<f64> = acc.column(0).iter().map(|x| (x * scale).max(0.0)).collect();
        let mut v = RegionWeightVector::from_masses(self.n, masses)?;
        if self.normalized {
            v.normalize()?;
        }
        Ok(v)
    }
}

fn consecutive(n: usize, start: usize, k: usize) -> Result<Vec<bool>> {
    if start + k > n {
        return Err(Error::param(format!("support {start}..{} exceeds {n} sites", start + k)));
    }
    Ok((0..n).map(|i| i >= start && i < start + k).collect())
}

fn support_label(support: &[bool]) -> String {
    support.iter().map(|&b| if b { '*' } else { 'I' }).collect()
}

/// `init → apply(schedule) → normalize`.
pub fn evolve_mps(n_qubits: usize, schedule: &WeightSchedule, params: MpsParams) -> Result<WeightMps> {
    let mut m = WeightMps::identity(n_qubits, params)?;
    m.apply(schedule)?;
    m.normalize()?;
    Ok(m)
}

/// Applies double periods until `ln w` at every probe `(start, k)` changes
/// by less than `tol`, or the depth reaches `max_depth` unitary layers.
pub fn evolve_mps_steady(
    n_qubits: usize,
    p: f64,
    params: MpsParams,
    probes: &[(usize, usize)],
    tol: f64,
    max_depth: usize,
) -> Result<SteadyState<WeightMps>> {
    check_rate(p)?;
    let period = WeightSchedule::double_periods(1, p)?;
    let mut m = WeightMps::identity(n_qubits, params)?;
    let mut prev: Option<Vec<f64>> = None;
    let mut depth = 0;
    while depth < max_depth {
        m.apply(&period)?;
        depth += 2;
        m.normalize()?;
        let now = probes
            .iter()
            .map(|&(s, k)| m.query_consecutive_log_weight(s, k))
            .collect::<Result<Vec<f64>>>();
        // Weights can be exactly zero early on (p = 0); keep evolving.
        let Ok(now) = now else {
            prev = None;
            continue;
        };
        if let Some(prev) = &prev {
            let delta = now.iter().zip(prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if delta < tol {
                return Ok(SteadyState { weights: m, depth, converged: true });
            }
        }
        prev = Some(now);
    }
    Ok(SteadyState { weights: m, depth, converged: false })
}
