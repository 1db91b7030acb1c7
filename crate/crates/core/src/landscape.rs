//! The landscape function u solving (-Δ + V) u = f, and the effective
//! potentials built from it.
//!
//! With V >= 0 and f > 0 the Hamiltonian is an irreducibly diagonally
//! dominant M-matrix, so the Thomas algorithm is stable without pivoting
//! and the discrete maximum principle guarantees u > 0 at every interior
//! node. Peaks of u (equivalently valleys of 1/u) mark where low
//! eigenfunctions concentrate; see Filoche and Mayboroda, PNAS 109 (2012).

use crate::error::{invalid, numerical, Result};
use crate::kernel::KernelSpec;
use crate::operator::TridiagonalOperator;
use crate::regularize::{convolve, sample_kernel, BoundaryPolicy, DiscreteKernel};

/// A solved landscape system: the solution values, the right-hand side it
/// was solved against, and the sup-norm residual measured after the solve.
#[derive(Debug, Clone)]
pub struct LandscapeSolution {
    values: Vec<f64>,
    rhs: Vec<f64>,
    residual: f64,
    h: f64,
}

impl LandscapeSolution {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// ||H u - f||_inf recorded at solve time.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn h(&self) -> f64 {
        self.h
    }
}

/// Solve H u = f by elimination, with one pass of iterative refinement.
/// The refinement costs one extra O(n) sweep and pulls the residual from
/// the eps * ||H|| * ||u|| level down to the eps * ||f|| level, which the
/// identity diagnostics downstream rely on.
pub fn solve_landscape(op: &TridiagonalOperator, f: &[f64]) -> Result<LandscapeSolution> {
    let n = op.n();
    if f.len() != n {
        return Err(invalid(format!(
            "rhs length {} does not match n={n}",
            f.len()
        )));
    }
    if let Some(bad) = f.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(invalid(format!(
            "rhs must be strictly positive, found {bad}"
        )));
    }
    let factors = ThomasFactors::new(op)?;
    let mut u = factors.solve(f);

    // one refinement pass: solve H d = f - H u and add the correction
    let hu = op.apply(&u)?;
    let r: Vec<f64> = f.iter().zip(&hu).map(|(fi, hi)| fi - hi).collect();
    let d = factors.solve(&r);
    for (ui, di) in u.iter_mut().zip(&d) {
        *ui += di;
    }

    if let Some((i, &bad)) = u
        .iter()
        .enumerate()
        .find(|(_, x)| !(x.is_finite() && **x > 0.0))
    {
        return Err(numerical(format!(
            "landscape solution not positive at node {i} ({bad}); operator is not an M-matrix"
        )));
    }

    let hu = op.apply(&u)?;
    let residual = f
        .iter()
        .zip(&hu)
        .fold(0.0f64, |a, (fi, hi)| a.max((fi - hi).abs()));
    Ok(LandscapeSolution {
        values: u,
        rhs: f.to_vec(),
        residual,
        h: op.h(),
    })
}

/// LU factors of a tridiagonal system without pivoting; valid for the
/// diagonally dominant operators this crate assembles.
struct ThomasFactors {
    diag: Vec<f64>,  // pivots after elimination
    lower: Vec<f64>, // multipliers
    upper: Vec<f64>, // unchanged superdiagonal
}

impl ThomasFactors {
    fn new(op: &TridiagonalOperator) -> Result<ThomasFactors> {
        let n = op.n();
        let mut diag = op.diag().to_vec();
        let upper = op.offdiag().to_vec();
        let mut lower = vec![0.0; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if diag[i] == 0.0 {
                return Err(numerical(format!("zero pivot at row {i}")));
            }
            let m = op.offdiag()[i] / diag[i];
            lower[i] = m;
            diag[i + 1] -= m * upper[i];
        }
        if diag[n - 1] == 0.0 {
            return Err(numerical(format!("zero pivot at row {}", n - 1)));
        }
        Ok(ThomasFactors { diag, lower, upper })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut x = b.to_vec();
        for i in 0..n - 1 {
            x[i + 1] -= self.lower[i] * x[i];
        }
        x[n - 1] /= self.diag[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.upper[i] * x[i + 1]) / self.diag[i];
        }
        x
    }
}

/// The classical effective potential 1/u, pointwise.
pub fn inverse_landscape(u: &LandscapeSolution) -> Result<Vec<f64>> {
    reciprocal(u.values())
}

fn reciprocal(values: &[f64]) -> Result<Vec<f64>> {
    if let Some((i, &bad)) = values
        .iter()
        .enumerate()
        .find(|(_, x)| x.is_nan() || **x <= 0.0)
    {
        return Err(numerical(format!(
            "cannot invert nonpositive value {bad} at node {i}"
        )));
    }
    Ok(values.iter().map(|x| 1.0 / x).collect())
}

/// The generalized effective potential (f * k_t) / v for a landscape
/// solution v of H v = f. For constant f under the reflecting policy the
/// convolution returns f itself and the result reduces to 1/u.
pub fn generalized_effective_potential(
    v: &LandscapeSolution,
    t: f64,
    policy: BoundaryPolicy,
) -> Result<Vec<f64>> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid(format!(
            "smoothing time must be finite and >= 0, got {t}"
        )));
    }
    let h = v.h();
    let kernel = if t == 0.0 || 10.0 * t.sqrt() < h {
        DiscreteKernel::identity(t, h)
    } else {
        sample_kernel(&KernelSpec::new(1, t)?, h)?
    };
    let fk = convolve(v.rhs(), &kernel, policy)?;
    let inv_v = reciprocal(v.values())?;
    Ok(fk.iter().zip(&inv_v).map(|(a, b)| a * b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::operator::assemble_hamiltonian;
    use crate::potential::{gen_modulated_rhs, gen_piecewise_potential, Potential};

    fn hamiltonian(n: usize, v: Vec<f64>) -> (Grid1D, TridiagonalOperator) {
        let grid = Grid1D::new(n).unwrap();
        let pot = Potential::new(grid.clone(), v, "test").unwrap();
        let op = assemble_hamiltonian(&grid, &pot).unwrap();
        (grid, op)
    }

    #[test]
    fn free_landscape_is_the_parabola() {
        // -u'' = 1 with zero ends has u = x(1-x)/2, and the second
        // difference is exact on quadratics, so the discrete solution hits
        // the nodes of the parabola up to roundoff.
        let n = 999;
        let (grid, op) = hamiltonian(n, vec![0.0; n]);
        let u = solve_landscape(&op, &vec![1.0; n]).unwrap();
        for i in 0..n {
            let x = grid.x(i);
            let exact = 0.5 * x * (1.0 - x);
            assert!((u.values()[i] - exact).abs() < 1e-13 * 0.125);
        }
        assert!((u.values()[499] - 0.125).abs() < 1e-14);
    }

    #[test]
    fn strong_potential_limit_is_one_over_v() {
        let n = 99;
        let c = 1e8;
        let (_, op) = hamiltonian(n, vec![c; n]);
        let u = solve_landscape(&op, &vec![1.0; n]).unwrap();
        assert!((u.values()[49] * c - 1.0).abs() < 1e-3);
    }

    #[test]
    fn solve_is_linear_in_the_rhs() {
        let n = 300;
        let grid = Grid1D::new(n).unwrap();
        let pot = gen_piecewise_potential(&grid, 10, 1e4, 3).unwrap();
        let op = assemble_hamiltonian(&grid, &pot).unwrap();
        let f1 = gen_modulated_rhs(&grid, 1);
        let f2 = gen_modulated_rhs(&grid, 2);
        let sum: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| a + b).collect();
        let u1 = solve_landscape(&op, &f1).unwrap();
        let u2 = solve_landscape(&op, &f2).unwrap();
        let us = solve_landscape(&op, &sum).unwrap();
        let scale = us.values().iter().fold(0.0f64, |a, &x| a.max(x));
        for i in 0..n {
            assert!((u1.values()[i] + u2.values()[i] - us.values()[i]).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn positivity_across_a_seeded_ensemble() {
        let grid = Grid1D::new(300).unwrap();
        let f = vec![1.0; 300];
        for seed in 0..1000 {
            let v = gen_piecewise_potential(&grid, 10, 1e5, seed).unwrap();
            let op = assemble_hamiltonian(&grid, &v).unwrap();
            let u = solve_landscape(&op, &f).unwrap();
            assert!(u.values().iter().all(|&x| x > 0.0), "seed {seed}");
        }
    }

    #[test]
    fn residual_is_at_the_rounding_floor() {
        let n = 3000;
        let grid = Grid1D::new(n).unwrap();
        let v = gen_piecewise_potential(&grid, 20, 1e5, 7).unwrap();
        let op = assemble_hamiltonian(&grid, &v).unwrap();
        let f = gen_modulated_rhs(&grid, 8);
        let u = solve_landscape(&op, &f).unwrap();
        let fsup = f.iter().fold(0.0f64, |a, &x| a.max(x));
        assert!(
            u.residual() <= 2e-10 * fsup,
            "residual {} too large",
            u.residual()
        );
    }

    #[test]
    fn rejects_bad_rhs() {
        let n = 10;
        let (_, op) = hamiltonian(n, vec![0.0; n]);
        assert!(solve_landscape(&op, &[1.0; 9]).is_err());
        let mut f = vec![1.0; n];
        f[4] = 0.0;
        assert!(solve_landscape(&op, &f).is_err());
        f[4] = -1.0;
        assert!(solve_landscape(&op, &f).is_err());
    }

    #[test]
    fn reciprocal_basics() {
        let n = 9;
        let (_, op) = hamiltonian(n, vec![0.0; n]);
        let u = solve_landscape(&op, &vec![1.0; n]).unwrap();
        let w = inverse_landscape(&u).unwrap();
        for (wi, ui) in w.iter().zip(u.values()) {
            assert_eq!(*wi, 1.0 / ui);
        }
        // order reversal
        for i in 0..n {
            for j in 0..n {
                if u.values()[i] >= u.values()[j] {
                    assert!(w[i] <= w[j]);
                }
            }
        }
    }

    #[test]
    fn constant_rhs_recovers_the_classical_effective_potential() {
        let n = 500;
        let grid = Grid1D::new(n).unwrap();
        let pot = gen_piecewise_potential(&grid, 10, 1e5, 11).unwrap();
        let op = assemble_hamiltonian(&grid, &pot).unwrap();
        let u = solve_landscape(&op, &vec![1.0; n]).unwrap();
        let classical = inverse_landscape(&u).unwrap();
        let general = generalized_effective_potential(&u, 1e-3, BoundaryPolicy::Reflect).unwrap();
        let scale = classical.iter().fold(0.0f64, |a, &x| a.max(x));
        for i in 0..n {
            assert!((general[i] - classical[i]).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn rescaling_the_rhs_leaves_the_effective_potential_alone() {
        let n = 400;
        let grid = Grid1D::new(n).unwrap();
        let pot = gen_piecewise_potential(&grid, 8, 1e4, 13).unwrap();
        let op = assemble_hamiltonian(&grid, &pot).unwrap();
        let f = gen_modulated_rhs(&grid, 4);
        let f2: Vec<f64> = f.iter().map(|x| 2.0 * x).collect();
        let v1 = solve_landscape(&op, &f).unwrap();
        let v2 = solve_landscape(&op, &f2).unwrap();
        let g1 = generalized_effective_potential(&v1, 1e-3, BoundaryPolicy::Reflect).unwrap();
        let g2 = generalized_effective_potential(&v2, 1e-3, BoundaryPolicy::Reflect).unwrap();
        let scale = g1.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        for i in 0..n {
            assert!((g1[i] - g2[i]).abs() <= 1e-10 * scale);
        }
    }
}
