//! Diagnostics over the assembled objects: residuals of the smoothed
//! eigenvalue and landscape equations, kernel comparisons, Agmon distances
//! with decay envelopes, and peak-based localization scoring.

use crate::eigen::EigenPair;
use crate::error::{invalid, Result};
use crate::grid::Grid1D;
use crate::kernel::KernelSpec;
use crate::landscape::LandscapeSolution;
use crate::operator::assemble_from_values;
use crate::potential::Potential;
use crate::regularize::{
    convolve_at, regularized_potential, sample_gaussian, sample_kernel, BoundaryPolicy,
};
use rayon::prelude::*;

/// Nodes closer than this many widths sqrt(t) to a wall are excluded from
/// residual norms: there the convolution sees the boundary fold rather
/// than the free-space kernel.
pub const WINDOW_MARGIN_WIDTHS: f64 = 5.0;

/// Default peak prominence, as a fraction of the field's range.
pub const DEFAULT_PROMINENCE_FRACTION: f64 = 0.1;

/// One residual measurement at a single smoothing time.
#[derive(Debug, Clone, Copy)]
pub struct ResidualEntry {
    pub t: f64,
    /// sup |R| over the interior window.
    pub sup_window: f64,
    /// sup |R * field| over the window: the diagnostic that stays local
    /// when the state does.
    pub weighted: f64,
    /// sup |R - (V_t - V) * field| over all nodes. Exact algebra makes
    /// this the solver residual, independent of t.
    pub identity_gap: f64,
}

/// A residual sweep over decreasing smoothing times on a common window.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub ts: Vec<f64>,
    pub sup_norms: Vec<f64>,
    pub weighted_norms: Vec<f64>,
    pub identity_gaps: Vec<f64>,
    /// Least-squares slope of log sup_norm against log t.
    pub slope: f64,
    /// Interior mask shared by every entry (margin from the largest t).
    pub window: Vec<bool>,
}

/// Mask of nodes at boundary distance >= margin.
pub fn interior_window(grid: &Grid1D, margin: f64) -> Vec<bool> {
    (0..grid.n())
        .map(|i| grid.boundary_distance(i) >= margin)
        .collect()
}

fn residual_entry(
    v: &Potential,
    t: f64,
    policy: BoundaryPolicy,
    field: &[f64],
    rhs: &[f64],
    window: &[bool],
) -> Result<ResidualEntry> {
    let grid = v.grid();
    let vt = regularized_potential(v, t, policy)?;
    let op_t = assemble_from_values(grid, vt.values())?;
    let applied = op_t.apply(field)?;
    let mut sup_window = 0.0f64;
    let mut weighted = 0.0f64;
    let mut identity_gap = 0.0f64;
    for i in 0..grid.n() {
        let r = applied[i] - rhs[i];
        let predicted = (vt.values()[i] - v.values()[i]) * field[i];
        identity_gap = identity_gap.max((r - predicted).abs());
        if window[i] {
            sup_window = sup_window.max(r.abs());
            weighted = weighted.max((r * field[i]).abs());
        }
    }
    Ok(ResidualEntry {
        t,
        sup_window,
        weighted,
        identity_gap,
    })
}

/// Residual of the smoothed eigenvalue equation,
/// R = -D_h phi + V_t phi - lambda phi, measured on the window at
/// boundary distance >= 5 sqrt(t). The identity R = (V_t - V) phi holds
/// up to the eigensolver's own residual.
pub fn eigenpair_residual(
    pair: &EigenPair,
    v: &Potential,
    t: f64,
    policy: BoundaryPolicy,
) -> Result<ResidualEntry> {
    let grid = v.grid();
    check_field(grid, &pair.phi)?;
    let window = nonempty_window(grid, t)?;
    let rhs: Vec<f64> = pair.phi.iter().map(|p| pair.lambda * p).collect();
    residual_entry(v, t, policy, &pair.phi, &rhs, &window)
}

/// Residual of the smoothed landscape equation,
/// R = -D_h u + V_t u - f, with identity R = (V_t - V) u.
pub fn landscape_residual(
    sol: &LandscapeSolution,
    v: &Potential,
    t: f64,
    policy: BoundaryPolicy,
) -> Result<ResidualEntry> {
    let grid = v.grid();
    check_field(grid, sol.values())?;
    let window = nonempty_window(grid, t)?;
    residual_entry(v, t, policy, sol.values(), sol.rhs(), &window)
}

/// Sweep [`eigenpair_residual`] over strictly decreasing times, all
/// measured on the window of the largest t so the norms are comparable.
pub fn eigenpair_residual_sweep(
    pair: &EigenPair,
    v: &Potential,
    ts: &[f64],
    policy: BoundaryPolicy,
) -> Result<ResidualReport> {
    let rhs: Vec<f64> = pair.phi.iter().map(|p| pair.lambda * p).collect();
    residual_sweep(v, ts, policy, &pair.phi, &rhs)
}

/// Sweep [`landscape_residual`] over strictly decreasing times.
pub fn landscape_residual_sweep(
    sol: &LandscapeSolution,
    v: &Potential,
    ts: &[f64],
    policy: BoundaryPolicy,
) -> Result<ResidualReport> {
    residual_sweep(v, ts, policy, sol.values(), sol.rhs())
}

fn residual_sweep(
    v: &Potential,
    ts: &[f64],
    policy: BoundaryPolicy,
    field: &[f64],
    rhs: &[f64],
) -> Result<ResidualReport> {
    let grid = v.grid();
    check_field(grid, field)?;
    if ts.len() < 2 {
        return Err(invalid("sweep needs at least two times"));
    }
    if !ts.windows(2).all(|w| w[0] > w[1]) {
        return Err(invalid("sweep times must be strictly decreasing"));
    }
    let window = nonempty_window(grid, ts[0])?;
    let entries: Vec<ResidualEntry> = ts
        .par_iter()
        .map(|&t| residual_entry(v, t, policy, field, rhs, &window))
        .collect::<Result<_>>()?;
    let sup_norms: Vec<f64> = entries.iter().map(|e| e.sup_window).collect();
    let slope = log_log_slope(ts, &sup_norms)?;
    Ok(ResidualReport {
        ts: ts.to_vec(),
        sup_norms,
        weighted_norms: entries.iter().map(|e| e.weighted).collect(),
        identity_gaps: entries.iter().map(|e| e.identity_gap).collect(),
        slope,
        window,
    })
}

fn check_field(grid: &Grid1D, field: &[f64]) -> Result<()> {
    if field.len() != grid.n() {
        return Err(invalid(format!(
            "field length {} does not match grid of {}",
            field.len(),
            grid.n()
        )));
    }
    Ok(())
}

fn nonempty_window(grid: &Grid1D, t: f64) -> Result<Vec<bool>> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid(format!(
            "smoothing time must be nonnegative, got {t}"
        )));
    }
    let window = interior_window(grid, WINDOW_MARGIN_WIDTHS * t.sqrt());
    if window.iter().any(|&w| w) {
        Ok(window)
    } else {
        Err(invalid(format!(
            "no interior nodes at distance {} from the walls",
            5.0 * t.sqrt()
        )))
    }
}

/// Ordinary least-squares slope of log y against log x. Demands at least
/// five samples spanning a decade in x so one noisy point cannot carry
/// the fit.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(invalid("slope fit needs matching sample lengths"));
    }
    if xs.len() < 5 {
        return Err(invalid(format!(
            "slope fit needs at least 5 points, got {}",
            xs.len()
        )));
    }
    if xs
        .iter()
        .chain(ys.iter())
        .any(|&v| !(v.is_finite() && v > 0.0))
    {
        return Err(invalid("slope fit needs positive finite samples"));
    }
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    if hi / lo < 10.0 {
        return Err(invalid(format!(
            "slope fit needs a decade of x, got ratio {}",
            hi / lo
        )));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    Ok(num / den)
}

/// (V*k_t)(x_node) - (V*g_t)(x_node): the gap between the averaged heat
/// kernel and the plain Gaussian of the same t. Both kernels have unit
/// mass and vanishing odd moments, so the gap is driven by the second
/// moments (t against 2t) and scales like t V'' for smooth V.
pub fn kernel_gaussian_gap(
    v: &Potential,
    node: usize,
    t: f64,
    policy: BoundaryPolicy,
) -> Result<f64> {
    let h = v.grid().h();
    let spec = KernelSpec::new(1, t)?;
    let kt = sample_kernel(&spec, h)?;
    let gt = sample_gaussian(t, h)?;
    let a = convolve_at(v.values(), &kt, policy, node)?;
    let b = convolve_at(v.values(), &gt, policy, node)?;
    Ok(a - b)
}

/// Agmon distance between two nodes: the trapezoidal integral of
/// sqrt((w - lambda)_+) along the segment, the minimizing path in 1-D.
pub fn agmon_distance(grid: &Grid1D, w: &[f64], lambda: f64, r0: usize, r: usize) -> Result<f64> {
    check_field(grid, w)?;
    if r0 >= grid.n() || r >= grid.n() {
        return Err(invalid("Agmon endpoints out of range"));
    }
    let (a, b) = if r0 <= r { (r0, r) } else { (r, r0) };
    let s = |i: usize| (w[i] - lambda).max(0.0).sqrt();
    let mut acc = 0.0;
    for i in a..b {
        acc += 0.5 * (s(i) + s(i + 1));
    }
    Ok(grid.h() * acc)
}

/// Agmon distance from `r0` to every node, by cumulative trapezoid in
/// each direction (so profile[i] == agmon_distance(.., r0, i) exactly).
pub fn agmon_profile(grid: &Grid1D, w: &[f64], lambda: f64, r0: usize) -> Result<Vec<f64>> {
    check_field(grid, w)?;
    if r0 >= grid.n() {
        return Err(invalid("Agmon origin out of range"));
    }
    let n = grid.n();
    let h = grid.h();
    let s: Vec<f64> = w.iter().map(|&wi| (wi - lambda).max(0.0).sqrt()).collect();
    let mut rho = vec![0.0; n];
    for i in (0..r0).rev() {
        rho[i] = rho[i + 1] + h * 0.5 * (s[i] + s[i + 1]);
    }
    for i in r0 + 1..n {
        rho[i] = rho[i - 1] + h * 0.5 * (s[i - 1] + s[i]);
    }
    Ok(rho)
}

/// Fit of the decay envelope |phi(r)| <= exp(C - rho(r0, r)).
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeReport {
    /// Smallest offset C satisfying the bound on the eligible nodes.
    pub offset: f64,
    /// Nodes entering the fit: |phi| > 1e-12 ||phi||_inf.
    pub eligible: usize,
    /// Nodes above the fitted envelope (zero by construction; kept as a
    /// consistency counter).
    pub violations: usize,
}

/// Fit the smallest C with log|phi| <= -rho + C over the nodes where phi
/// is numerically alive. `r0` should be the argmax of |phi| so rho(r0)=0
/// anchors the envelope at the peak.
pub fn decay_envelope_check(
    grid: &Grid1D,
    phi: &[f64],
    w: &[f64],
    lambda: f64,
    r0: usize,
) -> Result<EnvelopeReport> {
    check_field(grid, phi)?;
    let rho = agmon_profile(grid, w, lambda, r0)?;
    let sup = phi.iter().fold(0.0f64, |a, &p| a.max(p.abs()));
    if sup == 0.0 {
        return Err(invalid("cannot fit an envelope to the zero field"));
    }
    let cutoff = 1e-12 * sup;
    let mut offset = f64::NEG_INFINITY;
    let mut eligible = 0;
    for (p, r) in phi.iter().zip(&rho) {
        if p.abs() > cutoff {
            eligible += 1;
            offset = offset.max(p.abs().ln() + r);
        }
    }
    let violations = phi
        .iter()
        .zip(&rho)
        .filter(|(p, _)| p.abs() > cutoff)
        .filter(|(p, r)| p.abs().ln() > offset - *r + 1e-12)
        .count();
    Ok(EnvelopeReport {
        offset,
        eligible,
        violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumMode {
    Maxima,
    Minima,
}

/// Local extrema that clear a prominence threshold, sorted by node index.
#[derive(Debug, Clone)]
pub struct PeakSet {
    pub indices: Vec<usize>,
    pub prominences: Vec<f64>,
    pub threshold: f64,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Indices reordered by descending prominence.
    pub fn by_prominence(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.indices.len()).collect();
        order.sort_by(|&a, &b| {
            self.prominences[b]
                .partial_cmp(&self.prominences[a])
                .unwrap()
                .then(self.indices[a].cmp(&self.indices[b]))
        });
        order.iter().map(|&k| self.indices[k]).collect()
    }
}

/// Local extrema of `field` with prominence >= `prominence`. Prominence
/// is the drop from the extremum to the higher of the two base saddles,
/// each found by walking outward to the first strictly higher terrain
/// (or the array edge). Equal-value plateaus count once, at their
/// midpoint; runs touching an array edge are not extrema.
pub fn detect_peaks(field: &[f64], mode: ExtremumMode, prominence: f64) -> Result<PeakSet> {
    if prominence.is_nan() || prominence <= 0.0 {
        return Err(invalid(format!(
            "prominence must be positive, got {prominence}"
        )));
    }
    let oriented: Vec<f64> = match mode {
        ExtremumMode::Maxima => field.to_vec(),
        ExtremumMode::Minima => field.iter().map(|v| -v).collect(),
    };
    if oriented.iter().any(|v| !v.is_finite()) {
        return Err(invalid("peak detection needs finite samples"));
    }
    let n = oriented.len();
    let mut indices = Vec::new();
    let mut prominences = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && oriented[j + 1] == oriented[i] {
            j += 1;
        }
        // plateau [i, j]; only interior runs flanked by lower terrain peak
        if i > 0 && j + 1 < n && oriented[i - 1] < oriented[i] && oriented[j + 1] < oriented[i] {
            let height = oriented[i];
            let walk = |mut k: i64, step: i64| -> f64 {
                let mut base = height;
                while (0..n as i64).contains(&k) && oriented[k as usize] <= height {
                    base = base.min(oriented[k as usize]);
                    k += step;
                }
                base
            };
            let left = walk(i as i64 - 1, -1);
            let right = walk(j as i64 + 1, 1);
            let prom = height - left.max(right);
            if prom >= prominence {
                indices.push((i + j) / 2);
                prominences.push(prom);
            }
        }
        i = j + 1;
    }
    Ok(PeakSet {
        indices,
        prominences,
        threshold: prominence,
    })
}

/// Threshold for [`detect_peaks`] at a fraction of the field's range,
/// floored at a subnormal so constant fields simply yield no extrema.
pub fn prominence_from_range(field: &[f64], fraction: f64) -> f64 {
    let lo = field.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = field.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (fraction * (hi - lo)).max(f64::MIN_POSITIVE)
}

/// Scorecard: how well the landscape peaks and the smoothed-potential
/// valleys predict where the low eigenfunctions put their mass.
#[derive(Debug, Clone)]
pub struct LocalizationReport {
    /// argmax |phi| per eigenpair, in input order.
    pub eigen_nodes: Vec<usize>,
    /// Node distance to the nearest landscape peak (usize::MAX if none).
    pub peak_distance: Vec<usize>,
    /// Node distance to the nearest potential valley.
    pub valley_distance: Vec<usize>,
    pub peak_matches: usize,
    pub valley_matches: usize,
    pub peaks: PeakSet,
    pub valleys: PeakSet,
    pub tolerance: usize,
}

/// For each eigenpair, locate argmax |phi| and measure node distances to
/// the prominent peaks of `u` and valleys of `w` (a potential field: the
/// smoothed V_t or the raw V). A predictor scores a match when its
/// nearest feature lies within `tolerance` nodes.
pub fn localization_match(
    pairs: &[EigenPair],
    u: &[f64],
    w: &[f64],
    tolerance: usize,
) -> Result<LocalizationReport> {
    if pairs.is_empty() {
        return Err(invalid("need at least one eigenpair to score"));
    }
    if u.len() != w.len() || pairs.iter().any(|p| p.phi.len() != u.len()) {
        return Err(invalid("localization fields must share the grid"));
    }
    let peaks = detect_peaks(
        u,
        ExtremumMode::Maxima,
        prominence_from_range(u, DEFAULT_PROMINENCE_FRACTION),
    )?;
    let valleys = detect_peaks(
        w,
        ExtremumMode::Minima,
        prominence_from_range(w, DEFAULT_PROMINENCE_FRACTION),
    )?;
    let eigen_nodes: Vec<usize> = pairs.iter().map(|p| argmax_abs(&p.phi)).collect();
    let dist_to = |set: &PeakSet, node: usize| -> usize {
        set.indices
            .iter()
            .map(|&i| node.abs_diff(i))
            .min()
            .unwrap_or(usize::MAX)
    };
    let peak_distance: Vec<usize> = eigen_nodes.iter().map(|&e| dist_to(&peaks, e)).collect();
    let valley_distance: Vec<usize> = eigen_nodes.iter().map(|&e| dist_to(&valleys, e)).collect();
    let peak_matches = peak_distance.iter().filter(|&&d| d <= tolerance).count();
    let valley_matches = valley_distance.iter().filter(|&&d| d <= tolerance).count();
    Ok(LocalizationReport {
        eigen_nodes,
        peak_distance,
        valley_distance,
        peak_matches,
        valley_matches,
        peaks,
        valleys,
        tolerance,
    })
}

fn argmax_abs(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}

/// Largest violation of the pointwise bound |phi| <= lambda u ||phi||_inf
/// (positive return = bound broken by that much). The bound is exact
/// algebra in the discrete system, so anything beyond solver roundoff is
/// a defect.
pub fn landscape_bound_violation(pair: &EigenPair, u: &[f64]) -> Result<f64> {
    if pair.phi.len() != u.len() {
        return Err(invalid("eigenvector and landscape must share the grid"));
    }
    let sup = pair.phi.iter().fold(0.0f64, |a, &p| a.max(p.abs()));
    let mut worst = f64::NEG_INFINITY;
    for (p, &ui) in pair.phi.iter().zip(u) {
        worst = worst.max(p.abs() - pair.lambda * ui * sup);
    }
    Ok(worst)
}
