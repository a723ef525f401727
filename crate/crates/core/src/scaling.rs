//! Shadow-norm scaling: `‖P‖² = 1/w(P) ≃ β^k k^{2Δ}` for consecutive Pauli
//! strings, fitted across measurement rates.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Inverse, SVD};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::weights_exact::{evolve_exact_steady, RegionWeightVector};
use crate::weights_mps::{evolve_mps_steady, MpsParams, WeightMps};

/// Convergence controls for steady-state weight evolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepthParams {
    /// Stop once `ln w` at the probes moves less than this per double period.
    pub tol: f64,
    /// Cap in unitary layers; `None` means `4N`.
    pub max_depth: Option<usize>,
}

impl Default for DepthParams {
    fn default() -> Self {
        Self { tol: 1e-8, max_depth: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormCurve {
    pub p: f64,
    pub n_qubits: usize,
    /// `(k, ln ‖P‖²)` with `k` increasing.
    pub points: Vec<(usize, f64)>,
    pub chi_max: usize,
    pub trunc_tol: f64,
    pub depth: usize,
    pub converged: bool,
    pub discarded_max: f64,
}

/// The two central placements of a length-`k` string on `n` sites.
pub fn central_starts(n: usize, k: usize) -> Vec<usize> {
    let s0 = (n - k) / 2;
    if s0 + 1 + k <= n && k > 0 {
        vec![s0, s0 + 1]
    } else {
        vec![s0]
    }
}

fn probes(n: usize, k_max: usize) -> Vec<(usize, usize)> {
    (1..=k_max).flat_map(|k| central_starts(n, k).into_iter().map(move |s| (s, k))).collect()
}

/// `ln ‖P‖²` at size `k`: minus the mean of `ln w` over the central placements,
/// which averages out the brick-wall alignment.
fn curve_points(n: usize, k_max: usize, mut log_w: impl FnMut(usize, usize) -> Result<f64>) -> Result<Vec<(usize, f64)>> {
    (1..=k_max)
        .map(|k| {
            let starts = central_starts(n, k);
            let mut acc = 0.0;
            for &s in &starts {
                acc += log_w(s, k)?;
            }
            Ok((k, -acc / starts.len() as f64))
        })
        .collect()
}

/// Steady-state MPS weights at rate `p`, returning the engine for reuse.
pub fn steady_mps(n: usize, p: f64, k_max: usize, params: MpsParams, depth: DepthParams) -> Result<(WeightMps, usize, bool)> {
    if k_max > n || k_max == 0 {
        return Err(Error::param(format!("k_max = {k_max} must lie in 1..={n}")));
    }
    let max_depth = depth.max_depth.unwrap_or(4 * n);
    let st = evolve_mps_steady(n, p, params, &probes(n, k_max), depth.tol, max_depth)?;
    Ok((st.weights, st.depth, st.converged))
}

pub fn shadow_norm_curve(n: usize, p: f64, k_max: usize, params: MpsParams, depth: DepthParams) -> Result<NormCurve> {
    let (m, d, converged) = steady_mps(n, p, k_max, params, depth)?;
    let points = curve_points(n, k_max, |s, k| m.query_consecutive_log_weight(s, k))?;
    Ok(NormCurve {
        p,
        n_qubits: n,
        points,
        chi_max: params.chi_max,
        trunc_tol: params.trunc_tol,
        depth: d,
        converged,
        discarded_max: m.discarded_max(),
    })
}

/// The same curve from the dense engine (`N ≤ 20`), for cross-checks.
pub fn shadow_norm_curve_exact(n: usize, p: f64, k_max: usize, tol: f64, max_depth: usize) -> Result<NormCurve> {
    if k_max > n || k_max == 0 {
        return Err(Error::param(format!("k_max = {k_max} must lie in 1..={n}")));
    }
    let st = evolve_exact_steady(n, p, tol, max_depth)?;
    let v: &RegionWeightVector = &st.weights;
    let points = curve_points(n, k_max, |s, k| {
        let w = v.consecutive_weight(s, k)?;
        if w > 0.0 {
            Ok(w.ln())
        } else {
            Err(Error::Incomplete { pauli: format!("{s}..{}", s + k), weight: w })
        }
    })?;
    Ok(NormCurve {
        p,
        n_qubits: n,
        points,
        chi_max: 0,
        trunc_tol: 0.0,
        depth: st.depth,
        converged: st.converged,
        discarded_max: 0.0,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub beta: f64,
    pub delta: f64,
    pub intercept: f64,
    /// Covariance of `(ln β, 2Δ, intercept)`.
    pub covariance: [[f64; 3]; 3],
    pub k_range: (usize, usize),
    pub n_points: usize,
    /// Root-mean-square residual in `ln ‖P‖²`.
    pub rms: f64,
}

impl FitResult {
    pub fn beta_std(&self) -> f64 {
        self.beta * self.covariance[0][0].sqrt()
    }

    pub fn delta_std(&self) -> f64 {
        self.covariance[1][1].sqrt() / 2.0
    }
}

/// Least squares of `ln ‖P‖²` on `(k, ln k, 1)` over `k_min ≤ k ≤ k_max`.
pub fn fit_beta_delta(curve: &NormCurve, k_range: (usize, usize)) -> Result<FitResult> {
    let (k_min, k_max) = k_range;
    if k_min < 1 || k_max <= k_min {
        return Err(Error::param(format!("invalid k range {k_min}..={k_max}")));
    }
    let pts: Vec<(usize, f64)> = curve.points.iter().copied().filter(|&(k, _)| k >= k_min && k <= k_max).collect();
    if pts.len() < 4 {
        return Err(Error::RankDeficient(format!("{} points in k range {k_min}..={k_max}", pts.len())));
    }
    let m = pts.len();
    let a = Array2::from_shape_fn((m, 3), |(i, j)| {
        let k = pts[i].0 as f64;
        [k, k.ln(), 1.0][j]
    });
    let y = Array1::from_iter(pts.iter().map(|p| p.1));
    let (_, sv, _) = a.svd(false, false).map_err(|e| Error::Linalg(e.to_string()))?;
    if sv[2] <= 1e-10 * sv[0] {
        return Err(Error::RankDeficient("design matrix is singular".into()));
    }
    let ata_inv = a.t().dot(&a).inv().map_err(|e| Error::Linalg(e.to_string()))?;
    let coef = ata_inv.dot(&a.t().dot(&y));
    let resid = &y - &a.dot(&coef);
    let rss = resid.dot(&resid);
    let sigma2 = if m > 3 { rss / (m - 3) as f64 } else { 0.0 };
    let mut covariance = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            covariance[i][j] = sigma2 * ata_inv[[i, j]];
        }
    }
    Ok(FitResult {
        beta: coef[0].exp(),
        delta: coef[1] / 2.0,
        intercept: coef[2],
        covariance,
        k_range,
        n_points: m,
        rms: (rss / m as f64).sqrt(),
    })
}

/// Default fit window `[8, min(48, N-8)]`.
pub fn default_k_range(n: usize) -> (usize, usize) {
    (8, 48.min(n.saturating_sub(8)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub fit: FitResult,
    pub curve: NormCurve,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    /// Coarse grid and refinement points, sorted by `p`.
    pub rows: Vec<SweepRow>,
    pub p_star: f64,
    pub beta_min: f64,
    /// Fit at `p_star` (its `delta` is the reported Δ).
    pub fit_at_min: FitResult,
    /// Local minima of `β` along the sorted rows.
    pub local_minima: usize,
    pub warnings: Vec<String>,
}

/// Rates from `start:stop:step` or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::param(format!("bad rate grid {spec:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    if spec.contains(':') {
        let parts: Vec<f64> = spec.split(':').map(num).collect::<Result<_>>()?;
        let [start, stop, step] = parts[..] else { return Err(bad()) };
        if !(step > 0.0 && stop >= start) {
            return Err(bad());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| round12(start + i as f64 * step)).collect())
    } else {
        spec.split(',').map(num).collect()
    }
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

fn evaluate(n: usize, p: f64, k_range: (usize, usize), params: MpsParams, depth: DepthParams) -> Result<SweepRow> {
    let curve = shadow_norm_curve(n, p, k_range.1, params, depth)?;
    let fit = fit_beta_delta(&curve, k_range)?;
    Ok(SweepRow { p, fit, curve })
}

/// Evaluates `β(p)` on the grid plus five refinement points around the
/// coarse minimum, then locates the minimum with a local quadratic fit.
pub fn sweep_and_minimize(
    p_grid: &[f64],
    n: usize,
    k_range: (usize, usize),
    params: MpsParams,
    depth: DepthParams,
) -> Result<SweepReport> {
    if p_grid.len() < 5 {
        return Err(Error::param("the rate grid needs at least 5 points"));
    }
    if p_grid.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
        return Err(Error::param("grid rates must lie in (0, 1]"));
    }
    let mut grid = p_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut rows: Vec<SweepRow> =
        grid.par_iter().map(|&p| evaluate(n, p, k_range, params, depth)).collect::<Result<_>>()?;

    let i_min = argmin(&rows);
    let step = grid
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let p0 = rows[i_min].p;
    let refine: Vec<f64> = [-0.4, -0.2, 0.2, 0.4]
        .iter()
        .map(|f| round12(p0 + f * step))
        .filter(|&p| p > 0.0 && p <= 1.0 && !grid.iter().any(|&g| (g - p).abs() < 1e-9))
        .collect();
    let extra: Vec<SweepRow> =
        refine.par_iter().map(|&p| evaluate(n, p, k_range, params, depth)).collect::<Result<_>>()?;
    rows.extend(extra);
    rows.sort_by(|a, b| a.p.total_cmp(&b.p));

    let mut warnings = Vec::new();
    let i_min = argmin(&rows);
    let local_minima = (0..rows.len())
        .filter(|&i| {
            let b = rows[i].fit.beta;
            (i == 0 || rows[i - 1].fit.beta > b) && (i + 1 == rows.len() || rows[i + 1].fit.beta > b)
        })
        .count();
    if local_minima > 1 {
        warnings.push(format!("beta(p) has {local_minima} local minima"));
    }
    if i_min == 0 || i_min + 1 == rows.len() {
        warnings.push("minimum sits on the edge of the grid".into());
    }

    let window: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| (r.p - rows[i_min].p).abs() <= step + 1e-9)
        .map(|r| (r.p, r.fit.beta))
        .collect();
    let (mut p_star, mut beta_min) = (rows[i_min].p, rows[i_min].fit.beta);
    match quadratic_vertex(&window) {
        Some((pv, bv)) if (pv - rows[i_min].p).abs() <= step => {
            p_star = round12(pv);
            beta_min = bv;
        }
        _ => warnings.push("quadratic fit near the minimum is not convex; using the grid minimum".into()),
    }
    let fit_at_min = match rows.iter().find(|r| (r.p - p_star).abs() < 1e-12) {
        Some(r) => r.fit.clone(),
        None => evaluate(n, p_star, k_range, params, depth)?.fit,
    };
    Ok(SweepReport { rows, p_star, beta_min, fit_at_min, local_minima, warnings })
}

fn argmin(rows: &[SweepRow]) -> usize {
    rows.iter()
        .enumerate()
        .min_by(|a, b| a.1.fit.beta.total_cmp(&b.1.fit.beta))
        .map(|(i, _)| i)
        .expect("non-empty")
}

/// Least-squares parabola through `(x, y)`; returns its vertex if convex.
fn quadratic_vertex(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 3 {
        return None;
    }
    let x0 = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let a = Array2::from_shape_fn((pts.len(), 3), |(i, j)| (pts[i].0 - x0).powi(j as i32));
    let y = Array1::from_iter(pts.iter().map(|p| p.1));
    let coef = a.t().dot(&a).inv().ok()?.dot(&a.t().dot(&y));
    let (c, b, q) = (coef[0], coef[1], coef[2]);
    if !(q > 0.0) {
        return None;
    }
    let xv = -b / (2.0 * q);
    Some((xv + x0, c + b * xv + q * xv * xv))
}
