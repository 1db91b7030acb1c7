//! Feynman-Kac Monte Carlo: killed Brownian paths and the path-integral
//! functionals that cross-check the deterministic pipeline.
//!
//! Paths use the Euler scheme with increment variance 2 dt per substep
//! (the transition density here is exp(-|x-y|^2/4s)/(4 pi s)^{d/2}, whose
//! variance is 2s) and are absorbed when a substep endpoint leaves (0, 1).
//! Every path owns a counter-based stream keyed by its index, and all
//! reductions are pairwise, so every estimate is bit-reproducible for a
//! given (x, t, m, N, seed) regardless of thread count.

use crate::error::{invalid, Result};
use crate::potential::Potential;
use crate::regularize::{regularized_potential, BoundaryPolicy};
use crate::rng::Stream;
use rayon::prelude::*;

pub const DEFAULT_SUBSTEPS: usize = 64;
pub const DEFAULT_PATHS: usize = 100_000;

/// Sentinel in `absorbed_at` for paths that survive the whole horizon.
const SURVIVED: u32 = u32::MAX;

/// An ensemble of N discretized Brownian paths from a common start point,
/// with per-path absorption bookkeeping. Positions are stored for every
/// substep (frozen at the exit value after absorption).
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    start: f64,
    horizon: f64,
    substeps: usize,
    count: usize,
    seed: u64,
    positions: Vec<f64>, // count rows of (substeps + 1) positions
    absorbed_at: Vec<u32>,
}

impl PathEnsemble {
    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn position(&self, path: usize, step: usize) -> f64 {
        self.row(path)[step]
    }

    /// First substep whose endpoint fell outside (0, 1), if any.
    pub fn absorbed_at(&self, path: usize) -> Option<usize> {
        match self.absorbed_at[path] {
            SURVIVED => None,
            j => Some(j as usize),
        }
    }

    pub fn survived(&self, path: usize) -> bool {
        self.absorbed_at[path] == SURVIVED
    }

    pub fn survivor_count(&self) -> usize {
        self.absorbed_at.iter().filter(|&&a| a == SURVIVED).count()
    }

    fn row(&self, path: usize) -> &[f64] {
        let w = self.substeps + 1;
        &self.positions[path * w..(path + 1) * w]
    }

    /// Number of substeps the path lived through, for left-point sums.
    fn steps_alive(&self, path: usize) -> usize {
        match self.absorbed_at[path] {
            SURVIVED => self.substeps,
            j => j as usize,
        }
    }

    /// Left-point Riemann sums of int_0^{t and tau} V(path(s)) ds, one per
    /// path, with V read at the nearest grid node. The bias of the rule is
    /// O(t/m) per unit of ||V||_inf; no smoothness of V is assumed.
    pub fn integrate_potential(&self, v: &Potential) -> Vec<f64> {
        let dt = self.horizon / self.substeps as f64;
        let grid = v.grid();
        let vals = v.values();
        (0..self.count)
            .into_par_iter()
            .map(|p| {
                let row = self.row(p);
                let alive = self.steps_alive(p);
                let mut acc = 0.0;
                for &pos in &row[..alive] {
                    acc += vals[grid.nearest_node(pos)];
                }
                dt * acc
            })
            .collect()
    }
}

/// Simulate `count` paths from coordinate `x` over horizon `t` in `m`
/// substeps. Deterministic in (x, t, m, count, seed); thread count only
/// affects wall time.
pub fn sample_paths(x: f64, t: f64, m: usize, count: usize, seed: u64) -> Result<PathEnsemble> {
    if !(x.is_finite() && x > 0.0 && x < 1.0) {
        return Err(invalid(format!(
            "start point must be interior to (0,1), got {x}"
        )));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid(format!("horizon must be positive, got {t}")));
    }
    if m < 8 {
        return Err(invalid(format!("need at least 8 substeps, got {m}")));
    }
    if count == 0 {
        return Err(invalid("need at least one path"));
    }
    let dt = t / m as f64;
    let scale = (2.0 * dt).sqrt();
    let width = m + 1;
    let mut positions = vec![0.0f64; count * width];
    let mut absorbed_at = vec![SURVIVED; count];
    positions
        .par_chunks_mut(width)
        .zip(absorbed_at.par_iter_mut())
        .enumerate()
        .for_each(|(p, (row, absorbed))| {
            let mut stream = Stream::for_unit(seed, p as u64);
            row[0] = x;
            for j in 1..=m {
                let next = row[j - 1] + scale * stream.standard_normal();
                row[j] = next;
                if next <= 0.0 || next >= 1.0 {
                    *absorbed = j as u32;
                    for slot in row.iter_mut().skip(j + 1) {
                        *slot = next;
                    }
                    break;
                }
            }
        });
    Ok(PathEnsemble {
        start: x,
        horizon: t,
        substeps: m,
        count,
        seed,
        positions,
        absorbed_at,
    })
}

/// A Monte Carlo mean with its standard error. Sums are pairwise, so the
/// estimate does not depend on reduction order.
#[derive(Debug, Clone, Copy)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// Paths that contributed a live sample (survivors for killed endpoint
    /// functionals, all paths for path integrals).
    pub n_effective: usize,
}

impl MCEstimate {
    fn from_values(values: &[f64], n_effective: usize) -> MCEstimate {
        let n = values.len();
        let mean = pairwise_sum(values) / n as f64;
        let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = if n > 1 {
            pairwise_sum(&sq) / (n as f64 - 1.0)
        } else {
            0.0
        };
        let stderr = (var / n as f64).sqrt();
        MCEstimate {
            mean,
            stderr,
            n_effective,
        }
    }
}

fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Outcome of the reproducing-formula check
/// phi(x) = e^{lambda t} E[ phi(path(t)) exp(-int_0^t V) ].
#[derive(Debug, Clone)]
pub struct FkCheck {
    /// e^{lambda t}-scaled Monte Carlo estimate of the right-hand side.
    pub estimate: MCEstimate,
    /// phi at the start point (linear interpolation, zero past the walls).
    pub target: f64,
    /// Discretization allowance (t/m) ||V||_inf |phi(x)| added to the
    /// three-sigma band.
    pub allowance: f64,
    pub passes: bool,
}

pub fn fk_reproducing_check(
    phi: &[f64],
    lambda: f64,
    v: &Potential,
    ensemble: &PathEnsemble,
) -> Result<FkCheck> {
    let grid = v.grid();
    if phi.len() != grid.n() {
        return Err(invalid(format!(
            "eigenvector length {} does not match grid of {}",
            phi.len(),
            grid.n()
        )));
    }
    let t = ensemble.horizon();
    let m = ensemble.substeps();
    let growth = (lambda * t).exp();
    let integrals = ensemble.integrate_potential(v);
    let values: Vec<f64> = (0..ensemble.count())
        .map(|p| {
            if ensemble.survived(p) {
                let end = ensemble.position(p, m);
                growth * interp_zero(grid, phi, end) * (-integrals[p]).exp()
            } else {
                0.0
            }
        })
        .collect();
    let estimate = MCEstimate::from_values(&values, ensemble.survivor_count());
    let target = interp_zero(grid, phi, ensemble.start());
    let allowance = (t / m as f64) * v.sup() * target.abs();
    let passes = (estimate.mean - target).abs() <= 3.0 * estimate.stderr + allowance;
    Ok(FkCheck {
        estimate,
        target,
        allowance,
        passes,
    })
}

/// Monte Carlo estimate of the path-averaged potential
/// (1/t) int_0^{t and tau} V(path(s)) ds; its expectation is (V*k_t)(x)
/// up to boundary terms that are exponentially small for interior starts.
pub fn avg_potential_mc(v: &Potential, ensemble: &PathEnsemble) -> MCEstimate {
    let t = ensemble.horizon();
    let values: Vec<f64> = ensemble
        .integrate_potential(v)
        .iter()
        .map(|i| i / t)
        .collect();
    MCEstimate::from_values(&values, ensemble.count())
}

/// Monte Carlo estimate of the squared path integral
/// E ( int_0^{t and tau} V(path(s)) ds )^2, the stochastic counterpart of
/// [`crate::regularize::second_order_term`].
pub fn second_moment_mc(v: &Potential, ensemble: &PathEnsemble) -> MCEstimate {
    let values: Vec<f64> = ensemble
        .integrate_potential(v)
        .iter()
        .map(|i| i * i)
        .collect();
    MCEstimate::from_values(&values, ensemble.count())
}

/// Exponential-moment bound: if alpha = t sup_x (V*k_t)(x) < 1 then
/// sup_x E exp(int_0^t V) <= 1/(1 - alpha) (Khasminskii's lemma). The
/// Monte Carlo side integrates V up to absorption, which only lowers it,
/// so the bound applies unchanged.
#[derive(Debug, Clone)]
pub struct KhasminskiiReport {
    pub alpha: f64,
    /// 1/(1 - alpha) when the lemma applies.
    pub bound: Option<f64>,
    pub mc_sup: f64,
    /// Standard error of the estimate that attained `mc_sup`.
    pub stderr_at_sup: f64,
    /// None when alpha >= 1 (lemma precondition unmet).
    pub passes: Option<bool>,
}

#[allow(clippy::too_many_arguments)]
pub fn khasminskii_check(
    v: &Potential,
    t: f64,
    nodes: &[usize],
    m: usize,
    count: usize,
    seed: u64,
    policy: BoundaryPolicy,
) -> Result<KhasminskiiReport> {
    if nodes.is_empty() {
        return Err(invalid("need at least one sample node"));
    }
    let grid = v.grid();
    let vt = regularized_potential(v, t, policy)?;
    let sup_vt = vt.values().iter().fold(0.0f64, |a, &x| a.max(x));
    let alpha = t * sup_vt;
    if alpha >= 1.0 {
        return Ok(KhasminskiiReport {
            alpha,
            bound: None,
            mc_sup: f64::NAN,
            stderr_at_sup: f64::NAN,
            passes: None,
        });
    }
    let bound = 1.0 / (1.0 - alpha);
    let mut mc_sup = f64::NEG_INFINITY;
    let mut stderr_at_sup = 0.0;
    for (k, &node) in nodes.iter().enumerate() {
        if node >= grid.n() {
            return Err(invalid(format!("node {node} out of range")));
        }
        let x = grid.x(node);
        let sub_seed = Stream::for_unit(seed, k as u64).next_u64();
        let ensemble = sample_paths(x, t, m, count, sub_seed)?;
        let values: Vec<f64> = ensemble
            .integrate_potential(v)
            .iter()
            .map(|i| i.exp())
            .collect();
        let est = MCEstimate::from_values(&values, ensemble.count());
        if est.mean > mc_sup {
            mc_sup = est.mean;
            stderr_at_sup = est.stderr;
        }
    }
    let passes = Some(mc_sup <= bound + 3.0 * stderr_at_sup);
    Ok(KhasminskiiReport {
        alpha,
        bound: Some(bound),
        mc_sup,
        stderr_at_sup,
        passes,
    })
}

/// Linear interpolation of a node field at coordinate `x`, reading 0 at
/// and beyond the boundary points.
fn interp_zero(grid: &crate::grid::Grid1D, values: &[f64], x: f64) -> f64 {
    let n = grid.n() as i64;
    let u = x * (n as f64 + 1.0) - 1.0; // fractional slot index
    let i0 = u.floor();
    let frac = u - i0;
    let i0 = i0 as i64;
    let at = |i: i64| -> f64 {
        if (0..n).contains(&i) {
            values[i as usize]
        } else {
            0.0
        }
    };
    (1.0 - frac) * at(i0) + frac * at(i0 + 1)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // reference digits kept as computed
mod tests {
    use super::*;
    use crate::eigen::lowest_eigenpairs;
    use crate::grid::Grid1D;
    use crate::operator::assemble_hamiltonian;
    use crate::potential::{gen_piecewise_potential, Potential};

    #[test]
    fn displacement_moments_match_the_diffusion() {
        let t = 1e-4;
        let e = sample_paths(0.5, t, 16, 20_000, 3).unwrap();
        // central start, tiny horizon: nothing reaches a wall
        assert_eq!(e.survivor_count(), e.count());
        let disp: Vec<f64> = (0..e.count()).map(|p| e.position(p, 16) - 0.5).collect();
        let d = MCEstimate::from_values(&disp, e.count());
        assert!(d.mean.abs() <= 3.0 * d.stderr, "drifting mean {}", d.mean);
        let sq: Vec<f64> = disp.iter().map(|x| x * x).collect();
        let s = MCEstimate::from_values(&sq, e.count());
        assert!(
            (s.mean - 2.0 * t).abs() <= 3.0 * s.stderr,
            "msd {} vs 2t {}",
            s.mean,
            2.0 * t
        );
    }

    #[test]
    fn paths_are_deterministic_and_thread_independent() {
        let a = sample_paths(0.3, 1e-3, 16, 500, 9).unwrap();
        let b = sample_paths(0.3, 1e-3, 16, 500, 9).unwrap();
        assert_eq!(a.positions, b.positions);
        assert_ne!(
            a.positions,
            sample_paths(0.3, 1e-3, 16, 500, 10).unwrap().positions
        );

        let p1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let p4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let one = p1.install(|| sample_paths(0.3, 1e-3, 16, 500, 9).unwrap());
        let four = p4.install(|| sample_paths(0.3, 1e-3, 16, 500, 9).unwrap());
        assert_eq!(one.positions, four.positions);
        assert_eq!(one.absorbed_at, four.absorbed_at);
    }

    #[test]
    fn constant_potential_average_is_exact() {
        // power-of-two horizon and substep count keep every operation
        // exact, so each surviving path carries the value c with zero
        // variance.
        let grid = Grid1D::new(99).unwrap();
        let c = 37.5;
        let t = 2.0f64.powi(-13);
        let v = Potential::new(grid, vec![c; 99], "const").unwrap();
        let e = sample_paths(0.5, t, 64, 2_000, 4).unwrap();
        assert_eq!(e.survivor_count(), e.count());
        let est = avg_potential_mc(&v, &e);
        assert_eq!(est.mean, c);
        assert_eq!(est.stderr, 0.0);
        let sq = second_moment_mc(&v, &e);
        assert_eq!(sq.mean, (c * t) * (c * t));
    }

    #[test]
    fn absorbed_paths_stop_accumulating() {
        // Start one spacing from the wall with a huge horizon: essentially
        // every path is absorbed early and the frozen tail must not keep
        // adding potential.
        let grid = Grid1D::new(99).unwrap();
        let v = Potential::new(grid.clone(), vec![1.0; 99], "one").unwrap();
        let t = 0.5;
        let e = sample_paths(grid.x(0), t, 64, 2_000, 5).unwrap();
        assert!(e.survivor_count() < e.count() / 10);
        for (p, &i) in e.integrate_potential(&v).iter().enumerate() {
            let alive = e.absorbed_at(p).unwrap_or(64) as f64;
            let expect = alive * (t / 64.0);
            assert!((i - expect).abs() < 1e-12, "path {p}");
        }
    }

    #[test]
    fn sine_ground_state_reproduces_itself() {
        let n = 999;
        let grid = Grid1D::new(n).unwrap();
        let v = Potential::new(grid.clone(), vec![0.0; n], "zero").unwrap();
        let h = assemble_hamiltonian(&grid, &v).unwrap();
        let pair = &lowest_eigenpairs(&h, 1).unwrap()[0];
        let t = 0.01;
        let e = sample_paths(0.5, t, 64, 20_000, 77).unwrap();
        let check = fk_reproducing_check(&pair.phi, pair.lambda, &v, &e).unwrap();
        assert!(
            check.passes,
            "estimate {} vs target {}",
            check.estimate.mean, check.target
        );
        assert!((check.target - 1.0).abs() < 1e-9); // phi peaks at the start

        // the raw endpoint average is the heat decay e^{-lambda t}
        let raw: Vec<f64> = (0..e.count())
            .map(|p| {
                if e.survived(p) {
                    interp_zero(&grid, &pair.phi, e.position(p, 64))
                } else {
                    0.0
                }
            })
            .collect();
        let raw = MCEstimate::from_values(&raw, e.survivor_count());
        let decay = 0.9060180557889230; // e^{-pi^2/100}
        assert!(
            (raw.mean - decay).abs() <= 3.0 * raw.stderr + 1e-4,
            "endpoint mean {} vs {decay}",
            raw.mean
        );
    }

    #[test]
    fn constant_potential_factorizes_in_the_fk_weight() {
        let n = 499;
        let grid = Grid1D::new(n).unwrap();
        let c = 200.0;
        let zero = Potential::new(grid.clone(), vec![0.0; n], "zero").unwrap();
        let cv = Potential::new(grid.clone(), vec![c; n], "const").unwrap();
        let h = assemble_hamiltonian(&grid, &cv).unwrap();
        let pair = &lowest_eigenpairs(&h, 1).unwrap()[0];
        let e = sample_paths(0.5, 0.005, 64, 10_000, 6).unwrap();
        let shifted = fk_reproducing_check(&pair.phi, pair.lambda, &cv, &e).unwrap();
        assert!(shifted.passes);
        // same eigenvector under V = 0 with the shifted eigenvalue
        let base = fk_reproducing_check(&pair.phi, pair.lambda - c, &zero, &e).unwrap();
        assert!(base.passes);
        let rel = (shifted.estimate.mean - base.estimate.mean).abs()
            / base.estimate.mean.abs().max(1e-300);
        assert!(rel < 1e-12, "factorization broke: {rel}");
    }

    #[test]
    fn khasminskii_constant_case() {
        let grid = Grid1D::new(99).unwrap();
        let v = Potential::new(grid, vec![10.0; 99], "const").unwrap();
        let r = khasminskii_check(
            &v,
            0.05,
            &[20, 49, 80],
            64,
            5_000,
            12,
            BoundaryPolicy::Reflect,
        )
        .unwrap();
        assert!((r.alpha - 0.5).abs() < 1e-12);
        let bound = r.bound.unwrap();
        assert!((bound - 2.0).abs() < 1e-12);
        // scalar form of the lemma for constant V: e^{alpha} <= 1/(1-alpha)
        assert!(r.alpha.exp() <= bound);
        assert_eq!(r.passes, Some(true));
        assert!(r.mc_sup <= r.alpha.exp() + 3.0 * r.stderr_at_sup);
    }

    #[test]
    fn khasminskii_reports_unmet_precondition() {
        let grid = Grid1D::new(99).unwrap();
        let v = Potential::new(grid, vec![1000.0; 99], "hot").unwrap();
        let r = khasminskii_check(&v, 0.01, &[49], 64, 1_000, 1, BoundaryPolicy::Reflect).unwrap();
        assert!(r.alpha >= 1.0);
        assert!(r.bound.is_none());
        assert!(r.passes.is_none());
    }

    #[test]
    fn stderr_scales_like_inverse_sqrt_n() {
        let grid = Grid1D::new(299).unwrap();
        let v = gen_piecewise_potential(&grid, 10, 1e4, 8).unwrap();
        let mut pts = Vec::new();
        for &n in &[1_000usize, 10_000, 100_000] {
            let e = sample_paths(0.5, 1e-4, 16, n, 21).unwrap();
            let est = avg_potential_mc(&v, &e);
            pts.push(((n as f64).ln(), est.stderr.ln()));
        }
        let mid = |p: &[(f64, f64)]| -> f64 {
            // least-squares slope through three points
            let mx = p.iter().map(|q| q.0).sum::<f64>() / 3.0;
            let my = p.iter().map(|q| q.1).sum::<f64>() / 3.0;
            let num: f64 = p.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
            let den: f64 = p.iter().map(|q| (q.0 - mx) * (q.0 - mx)).sum();
            num / den
        };
        let slope = mid(&pts);
        assert!((slope + 0.5).abs() < 0.1, "stderr slope {slope}");
    }

    #[test]
    fn halving_the_substep_changes_little() {
        let grid = Grid1D::new(299).unwrap();
        let v = gen_piecewise_potential(&grid, 10, 1e4, 8).unwrap();
        let coarse = avg_potential_mc(&v, &sample_paths(0.5, 1e-3, 32, 40_000, 31).unwrap());
        let fine = avg_potential_mc(&v, &sample_paths(0.5, 1e-3, 64, 40_000, 31).unwrap());
        let band = 3.0 * (coarse.stderr + fine.stderr);
        assert!(
            (coarse.mean - fine.mean).abs() <= band,
            "substep bias {} exceeds {band}",
            (coarse.mean - fine.mean).abs()
        );
    }

    #[test]
    fn validates_inputs() {
        assert!(sample_paths(0.0, 1e-3, 16, 10, 0).is_err());
        assert!(sample_paths(1.0, 1e-3, 16, 10, 0).is_err());
        assert!(sample_paths(0.5, 0.0, 16, 10, 0).is_err());
        assert!(sample_paths(0.5, 1e-3, 7, 10, 0).is_err());
        assert!(sample_paths(0.5, 1e-3, 16, 0, 0).is_err());
        let grid = Grid1D::new(9).unwrap();
        let v = Potential::new(grid, vec![0.0; 9], "zero").unwrap();
        let e = sample_paths(0.5, 1e-3, 16, 10, 0).unwrap();
        assert!(fk_reproducing_check(&[1.0; 5], 1.0, &v, &e).is_err());
        assert!(khasminskii_check(&v, 1e-3, &[], 16, 10, 0, BoundaryPolicy::Reflect).is_err());
    }

    #[test]
    fn interpolation_is_linear_with_zero_walls() {
        let grid = Grid1D::new(4).unwrap(); // h = 0.2
        let vals = [1.0, 3.0, 2.0, 4.0];
        assert!((interp_zero(&grid, &vals, 0.2) - 1.0).abs() < 1e-15);
        assert!((interp_zero(&grid, &vals, 0.3) - 2.0).abs() < 1e-12);
        assert!((interp_zero(&grid, &vals, 0.1) - 0.5).abs() < 1e-12);
        assert!((interp_zero(&grid, &vals, 0.9) - 2.0).abs() < 1e-12);
        assert_eq!(interp_zero(&grid, &vals, 0.0), 0.0);
    }
}
