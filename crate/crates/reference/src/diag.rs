//! Full diagonalization of the discrete Hamiltonian.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qdyn_core::units::HBAR;
use qdyn_core::{Grid1D, Hamiltonian, Kinetic, Potential, QdynError, Result, WaveField};

pub const DEFAULT_SIZE_CAP: usize = 512;

/// Eigenpairs of the discrete Hamiltonian, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct DiagOracle {
    grid: Grid1D,
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns (discrete, unit Euclidean norm).
    pub eigenvectors: DMatrix<f64>,
}

impl DiagOracle {
    pub fn new(potential: &Potential, grid: &Grid1D, kinetic: Kinetic) -> Result<Self> {
        Self::with_cap(potential, grid, kinetic, DEFAULT_SIZE_CAP)
    }

    pub fn with_cap(potential: &Potential, grid: &Grid1D, kinetic: Kinetic, cap: usize) -> Result<Self> {
        let n = grid.n();
        if n > cap {
            return Err(QdynError::SizeCap { n, cap });
        }
        let h = Hamiltonian::new(potential, grid, kinetic)?;
        let eig = DMatrix::from_row_slice(n, n, &h.to_dense()).symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(Self { grid: *grid, eigenvalues, eigenvectors })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Coefficients `⟨n|ψ⟩` in the eigenbasis.
    pub fn project(&self, field: &WaveField) -> Vec<Complex64> {
        let re = DVector::from_iterator(field.amp.len(), field.amp.iter().map(|a| a.re));
        let im = DVector::from_iterator(field.amp.len(), field.amp.iter().map(|a| a.im));
        let cr = self.eigenvectors.tr_mul(&re);
        let ci = self.eigenvectors.tr_mul(&im);
        cr.iter().zip(ci.iter()).map(|(&r, &i)| Complex64::new(r, i)).collect()
    }

    /// `Σ_n e^{−iE_n t/ħ}|n⟩⟨n|ψ⟩`.
    pub fn propagate(&self, field: &WaveField, t: f64) -> Result<WaveField> {
        if !field.grid.same_as(&self.grid) {
            return Err(QdynError::GridMismatch("field and oracle grids differ".into()));
        }
        let coeffs = self.project(field);
        let n = coeffs.len();
        let rotated: Vec<Complex64> = coeffs
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, &e)| c * Complex64::from_polar(1.0, -e * t / HBAR))
            .collect();
        let re = self.eigenvectors.clone() * DVector::from_iterator(n, rotated.iter().map(|c| c.re));
        let im = self.eigenvectors.clone() * DVector::from_iterator(n, rotated.iter().map(|c| c.im));
        WaveField::new(self.grid, re.iter().zip(im.iter()).map(|(&r, &i)| Complex64::new(r, i)).collect())
    }

    /// Energy expectation `Σ|⟨n|ψ⟩|²E_n / Σ|⟨n|ψ⟩|²`.
    pub fn energy(&self, field: &WaveField) -> f64 {
        let c = self.project(field);
        let w: f64 = c.iter().map(|x| x.norm_sqr()).sum();
        c.iter().zip(&self.eigenvalues).map(|(x, e)| x.norm_sqr() * e).sum::<f64>() / w
    }
}

pub fn diag_propagate(field: &WaveField, oracle: &DiagOracle, t: f64) -> Result<WaveField> {
    oracle.propagate(field, t)
}
