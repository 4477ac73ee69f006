use num_complex::Complex64;

use crate::error::{QdynError, Result};
use crate::grid::{Grid1D, PhaseSpaceGrid};

/// Complex amplitude `ψ(q_i)` on a coordinate grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: Grid1D,
    pub amp: Vec<Complex64>,
}

impl WaveField {
    pub fn new(grid: Grid1D, amp: Vec<Complex64>) -> Result<Self> {
        if amp.len() != grid.n() {
            return Err(QdynError::GridMismatch(format!(
                "{} amplitudes for {} grid points",
                amp.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, amp })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self { grid, amp: vec![Complex64::new(0.0, 0.0); grid.n()] }
    }

    /// `Σ|ψ_i|²·Δq`.
    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.step()
    }

    pub fn density(&self) -> Vec<f64> {
        self.amp.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩ = Σ conj(ψ_i)·φ_i·Δq`.
    pub fn inner(&self, other: &WaveField) -> Complex64 {
        self.amp.iter().zip(&other.amp).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.grid.step()
    }

    pub fn normalize(&mut self) {
        let s = self.norm_sqr().sqrt();
        if s > 0.0 {
            self.amp.iter_mut().for_each(|a| *a /= s);
        }
    }

    /// Largest modulus at the two outermost grid points.
    pub fn edge_amplitude(&self) -> f64 {
        self.amp[0].norm().max(self.amp[self.amp.len() - 1].norm())
    }

    pub fn check_boundary(&self, threshold: f64) -> Result<()> {
        let amplitude = self.edge_amplitude();
        if amplitude > threshold || !amplitude.is_finite() {
            return Err(QdynError::BoundaryLeak { amplitude, threshold });
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.amp.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

/// Real weight per node of a phase-space grid, stored row-major with `q` as
/// the slow axis. Values are densities, so `Σ w·Δq·Δp` is the total weight.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceField {
    pub grid: PhaseSpaceGrid,
    pub values: Vec<f64>,
}

impl PhaseSpaceField {
    pub fn zeros(grid: PhaseSpaceGrid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: PhaseSpaceGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for iq in 0..grid.q.n() {
            let q = grid.q.point(iq);
            for ip in 0..grid.p.n() {
                values.push(f(q, grid.p.point(ip)));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn get(&self, iq: usize, ip: usize) -> f64 {
        self.values[self.grid.index(iq, ip)]
    }

    pub fn row(&self, iq: usize) -> &[f64] {
        let np = self.grid.p.n();
        &self.values[iq * np..(iq + 1) * np]
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn abs_integral(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Coordinate density `∫W dp` on the q axis.
    pub fn q_marginal(&self) -> Vec<f64> {
        let dp = self.grid.p.step();
        (0..self.grid.q.n()).map(|iq| self.row(iq).iter().sum::<f64>() * dp).collect()
    }

    /// Momentum density `∫W dq` on the p axis.
    pub fn p_marginal(&self) -> Vec<f64> {
        let np = self.grid.p.n();
        let dq = self.grid.q.step();
        let mut out = vec![0.0; np];
        for row in self.values.chunks_exact(np) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out.iter_mut().for_each(|o| *o *= dq);
        out
    }

    /// `Σ|a − b|·Δq·Δp`.
    pub fn l1_distance(&self, other: &PhaseSpaceField) -> Result<f64> {
        if !self.grid.same_as(&other.grid) {
            return Err(QdynError::GridMismatch("phase-space grids differ".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum::<f64>()
            * self.grid.cell_area())
    }
}
