//! Node-sampled nonnegative potentials and seeded generators.
//!
//! The disorder model is the classic Anderson-style one: the unit interval
//! is split into M equal blocks and each block gets an independent height
//! uniform on [0, vmax]. Heights come from the counter-based generator in
//! [`crate::rng`], one stream per block, so the field is reproducible
//! bit-for-bit from (seed, M, vmax, n) alone regardless of thread count.

use crate::error::{invalid, Result};
use crate::grid::Grid1D;
use crate::rng::Stream;

/// A potential V >= 0 sampled at the interior nodes, together with the grid
/// it lives on and a human-readable note on where it came from.
#[derive(Debug, Clone)]
pub struct Potential {
    grid: Grid1D,
    values: Vec<f64>,
    provenance: String,
}

impl Potential {
    pub fn new(grid: Grid1D, values: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(invalid(format!(
                "potential has {} values for a grid of {} nodes",
                values.len(),
                grid.n()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(invalid(format!(
                "potential values must be finite and >= 0, found {bad}"
            )));
        }
        Ok(Potential {
            grid,
            values,
            provenance: provenance.into(),
        })
    }

    /// Sample a closed-form profile at the nodes.
    pub fn from_fn(
        grid: Grid1D,
        f: impl Fn(f64) -> f64,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let values = (0..grid.n()).map(|i| f(grid.x(i))).collect();
        Potential::new(grid, values, provenance)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &v| a.max(v))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Piecewise-constant random potential: M equal index blocks (the last
/// absorbs the remainder when M does not divide n), each with an
/// independent height uniform on [0, vmax].
pub fn gen_piecewise_potential(
    grid: &Grid1D,
    intervals: usize,
    vmax: f64,
    seed: u64,
) -> Result<Potential> {
    let n = grid.n();
    if intervals == 0 || intervals > n {
        return Err(invalid(format!(
            "interval count must be in 1..={n}, got {intervals}"
        )));
    }
    if !(vmax.is_finite() && vmax >= 0.0) {
        return Err(invalid(format!("vmax must be finite and >= 0, got {vmax}")));
    }
    let base = n / intervals;
    let mut values = vec![0.0; n];
    for b in 0..intervals {
        let height = vmax * Stream::for_unit(seed, b as u64).uniform();
        let lo = b * base;
        let hi = if b + 1 == intervals {
            n
        } else {
            (b + 1) * base
        };
        values[lo..hi].fill(height);
    }
    Potential::new(
        grid.clone(),
        values,
        format!("piecewise(seed={seed}, intervals={intervals}, vmax={vmax})"),
    )
}

/// Slowly modulated random right-hand side for the generalized landscape
/// equation: f_k = (1 + k'/2000) (2 + cos(k')/50) U_k with U_k uniform on
/// [0, 1] and k' the 1-based node index rescaled as if the grid had 3000
/// nodes. Clamped below so f stays strictly positive.
pub fn gen_modulated_rhs(grid: &Grid1D, seed: u64) -> Vec<f64> {
    let n = grid.n();
    (0..n)
        .map(|i| {
            let kp = (i as f64 + 1.0) * 3000.0 / n as f64;
            let draw = Stream::for_unit(seed, i as u64).uniform();
            (modulation(kp) * draw).max(RHS_FLOOR)
        })
        .collect()
}

/// Smallest admissible right-hand-side value; keeps f > 0 when a uniform
/// draw comes out at (or rounds to) zero.
pub const RHS_FLOOR: f64 = 1e-12;

fn modulation(kp: f64) -> f64 {
    (1.0 + kp / 2000.0) * (2.0 + kp.cos() / 50.0)
}
