//! Discrete Hamiltonian -Δ_h + V on the interior grid.
//!
//! Dirichlet conditions are built into the stencil: the rows for the first
//! and last interior node simply drop the neighbor that would sit on the
//! boundary, which is the same as extending every vector by zeros.

use crate::error::{invalid, Result};
use crate::grid::Grid1D;
use crate::potential::Potential;

/// Symmetric tridiagonal matrix with a stored grid spacing. For the
/// Hamiltonian the diagonal is 2/h^2 + V_i and every off-diagonal entry is
/// -1/h^2, but the eigensolver and the landscape solver accept any
/// symmetric tridiagonal shape.
#[derive(Debug, Clone)]
pub struct TridiagonalOperator {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    h: f64,
}

impl TridiagonalOperator {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>, h: f64) -> Result<Self> {
        if diag.is_empty() {
            return Err(invalid("operator needs at least one row"));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(invalid(format!(
                "off-diagonal length {} does not fit diagonal length {}",
                offdiag.len(),
                diag.len()
            )));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(invalid(format!("grid spacing must be positive, got {h}")));
        }
        if diag.iter().chain(offdiag.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("operator entries must be finite"));
        }
        Ok(TridiagonalOperator { diag, offdiag, h })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Matrix-vector product with zero extension past both ends.
    pub fn apply(&self, w: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if w.len() != n {
            return Err(invalid(format!(
                "vector length {} does not match n={n}",
                w.len()
            )));
        }
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * w[i];
            if i > 0 {
                s += self.offdiag[i - 1] * w[i - 1];
            }
            if i + 1 < n {
                s += self.offdiag[i] * w[i + 1];
            }
            out[i] = s;
        }
        Ok(out)
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.offdiag[i - 1].abs();
            }
            if i + 1 < n {
                r += self.offdiag[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// <Hw, w> / <w, w>, the discrete quadratic form of the operator.
    pub fn rayleigh_quotient(&self, w: &[f64]) -> Result<f64> {
        let hw = self.apply(w)?;
        let num: f64 = hw.iter().zip(w).map(|(a, b)| a * b).sum();
        let den: f64 = w.iter().map(|x| x * x).sum();
        if den == 0.0 {
            return Err(invalid("Rayleigh quotient of the zero vector"));
        }
        Ok(num / den)
    }
}

/// H = tridiag(-1/h^2, 2/h^2 + V_i, -1/h^2) on the potential's grid.
pub fn assemble_hamiltonian(grid: &Grid1D, v: &Potential) -> Result<TridiagonalOperator> {
    if v.grid() != grid {
        return Err(invalid("potential was sampled on a different grid"));
    }
    assemble_from_values(grid, v.values())
}

/// Same assembly from a bare field vector; used when the potential has
/// already been processed (smoothed, truncated) into a plain slice.
pub fn assemble_from_values(grid: &Grid1D, values: &[f64]) -> Result<TridiagonalOperator> {
    let n = grid.n();
    if values.len() != n {
        return Err(invalid(format!(
            "field has {} values for a grid of {n} nodes",
            values.len()
        )));
    }
    let h = grid.h();
    let inv_h2 = 1.0 / (h * h);
    let diag = values.iter().map(|&vi| 2.0 * inv_h2 + vi).collect();
    let offdiag = vec![-inv_h2; n - 1];
    TridiagonalOperator::new(diag, offdiag, h)
}
