use std::f64::consts::PI;

use crate::error::{QdynError, Result};
use crate::units::HBAR;

/// Uniform one-dimensional grid `x_i = min + i * step`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    min: f64,
    step: f64,
}

impl Grid1D {
    pub fn new(n: usize, min: f64, step: f64) -> Result<Self> {
        if n < 3 {
            return Err(QdynError::InvalidGrid(format!("need at least 3 points, got {n}")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(QdynError::InvalidGrid(format!("spacing must be positive, got {step}")));
        }
        if !min.is_finite() {
            return Err(QdynError::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self { n, min, step })
    }

    /// Grid with `n` points whose node `n / 2` sits at the origin.
    pub fn centered(n: usize, step: f64) -> Result<Self> {
        Self::new(n, -((n / 2) as f64) * step, step)
    }

    /// Grid spanning `[min, max]` inclusive with `n` points.
    pub fn spanning(n: usize, min: f64, max: f64) -> Result<Self> {
        if n < 3 || !(max > min) {
            return Err(QdynError::InvalidGrid(format!("bad span [{min}, {max}] with {n} points")));
        }
        Self::new(n, min, (max - min) / (n - 1) as f64)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn min(&self) -> f64 {
        self.min
    }

    #[inline]
    pub fn step(&self) -> f64 {
        self.step
    }

    #[inline]
    pub fn max(&self) -> f64 {
        self.point(self.n - 1)
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Cell index `i` and fractional offset `f ∈ [0, 1)` such that
    /// `x = x_i + f * step` with both `i` and `i + 1` on the grid.
    #[inline]
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let u = (x - self.min) / self.step;
        if !(u >= 0.0) {
            return None;
        }
        let i = u.floor();
        if i + 1.0 >= self.n as f64 {
            // the last node itself belongs to the final cell
            if u == (self.n - 1) as f64 {
                return Some((self.n - 2, 1.0));
            }
            return None;
        }
        Some((i as usize, u - i))
    }

    /// Index of the node nearest to `x`, if inside the half-cell padded range.
    #[inline]
    pub fn nearest(&self, x: f64) -> Option<usize> {
        let u = ((x - self.min) / self.step).round();
        (u >= 0.0 && u < self.n as f64).then_some(u as usize)
    }

    /// Momentum grid conjugate to this coordinate grid under the discrete
    /// Fourier transform: `p ∈ [−πħ/Δq, πħ/Δq)`, `Δp = 2πħ/(NΔq)`.
    pub fn fourier_dual(&self) -> Grid1D {
        let dp = 2.0 * PI * HBAR / (self.n as f64 * self.step);
        Grid1D { n: self.n, min: -PI * HBAR / self.step, step: dp }
    }

    /// Trapezoid weights; the end points carry half weight.
    pub fn trapezoid_weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            0.5 * self.step
        } else {
            self.step
        }
    }

    pub fn same_as(&self, other: &Grid1D) -> bool {
        self.n == other.n
            && (self.min - other.min).abs() <= 1e-12 * self.step
            && (self.step - other.step).abs() <= 1e-12 * self.step
    }
}

/// Tensor-product grid over coordinate and momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceGrid {
    pub q: Grid1D,
    pub p: Grid1D,
}

impl PhaseSpaceGrid {
    pub fn new(q: Grid1D, p: Grid1D) -> Self {
        Self { q, p }
    }

    /// Symmetric grid with `nq × np` nodes around the origin.
    pub fn centered(nq: usize, dq: f64, np: usize, dp: f64) -> Result<Self> {
        Ok(Self { q: Grid1D::centered(nq, dq)?, p: Grid1D::centered(np, dp)? })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.q.n() * self.p.n()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.q.step() * self.p.step()
    }

    /// Row-major index with `q` as the slow axis.
    #[inline]
    pub fn index(&self, iq: usize, ip: usize) -> usize {
        iq * self.p.n() + ip
    }

    pub fn same_as(&self, other: &PhaseSpaceGrid) -> bool {
        self.q.same_as(&other.q) && self.p.same_as(&other.p)
    }
}
