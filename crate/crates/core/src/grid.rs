//! Uniform interior grid on the unit interval.
//!
//! The domain is (0, 1) with Dirichlet data at both ends. Only interior
//! nodes are stored: slot `i` (0-based) holds the node at x = (i+1) h with
//! h = 1/(n+1), so the boundary points 0 and 1 are the virtual slots -1
//! and n. All field vectors in this crate (potentials, eigenvectors,
//! landscape solutions) live on this indexing.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    n: usize,
    h: f64,
}

impl Grid1D {
    /// A grid with `n` interior nodes. Three is the smallest interior count
    /// for which the second-difference stencil has an off-diagonal row.
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(invalid(format!(
                "grid needs at least 3 interior nodes, got {n}"
            )));
        }
        Ok(Grid1D {
            n,
            h: 1.0 / (n as f64 + 1.0),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Coordinate of storage slot `i`. Computed as a fresh division so the
    /// node set is exactly monotone and the right boundary ((n+1)th slot)
    /// would land on 1.0 exactly.
    pub fn x(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        (i as f64 + 1.0) / (self.n as f64 + 1.0)
    }

    /// All node coordinates in slot order.
    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Slot of the interior node nearest to `x`, clamped to the ends; the
    /// boundary points therefore map to slots 0 and n-1.
    pub fn nearest_node(&self, x: f64) -> usize {
        let raw = (x * (self.n as f64 + 1.0)).round() as i64 - 1;
        raw.clamp(0, self.n as i64 - 1) as usize
    }

    /// Distance from slot `i` to the closer of the two boundary points.
    pub fn boundary_distance(&self, i: usize) -> f64 {
        let x = self.x(i);
        x.min(1.0 - x)
    }
}
