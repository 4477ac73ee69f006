//! Crank–Nicolson (Cayley) propagator for the three-point Hamiltonian.

use num_complex::Complex64;
use qdyn_core::units::{HBAR, MASS};
use qdyn_core::{Grid1D, Potential, QdynError, Result, WaveField};

const PIVOT_FLOOR: f64 = 1e-300;

/// Solves `(1 + iHΔt/2ħ)ψ' = (1 − iHΔt/2ħ)ψ` each step.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    grid: Grid1D,
    dt: f64,
    /// Diagonal of `H`.
    diag: Vec<f64>,
    /// Off-diagonal of `H` (constant for the three-point stencil).
    off: f64,
}

impl CrankNicolson {
    pub fn new(potential: &Potential, grid: &Grid1D, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(QdynError::InvalidParameter { name: "dt", reason: format!("{dt} must be positive") });
        }
        potential.check_domain(grid)?;
        let c = HBAR * HBAR / (2.0 * MASS * grid.step() * grid.step());
        let diag = potential.sample(grid).into_iter().map(|v| 2.0 * c + v).collect();
        Ok(Self { grid: *grid, dt, diag, off: -c })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step_in_place(&self, field: &mut WaveField, work: &mut Vec<Complex64>) -> Result<()> {
        if !field.grid.same_as(&self.grid) {
            return Err(QdynError::GridMismatch("field and propagator grids differ".into()));
        }
        let n = field.amp.len();
        let h = Complex64::new(0.0, self.dt / (2.0 * HBAR));
        let psi = &mut field.amp;

        // right-hand side (1 − iHΔt/2)ψ, built in place with a running left neighbour
        let mut left = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let right = if i + 1 < n { psi[i + 1] } else { Complex64::new(0.0, 0.0) };
            let hpsi = psi[i] * self.diag[i] + (left + right) * self.off;
            left = psi[i];
            psi[i] -= h * hpsi;
        }

        // Thomas algorithm for the complex symmetric tridiagonal system
        let sub = h * self.off;
        work.resize(n, Complex64::new(0.0, 0.0));
        let mut denom = Complex64::new(1.0, 0.0) + h * self.diag[0];
        if denom.norm() < PIVOT_FLOOR {
            return Err(QdynError::Instability("vanishing pivot in tridiagonal solve".into()));
        }
        work[0] = sub / denom;
        psi[0] /= denom;
        for i in 1..n {
            denom = Complex64::new(1.0, 0.0) + h * self.diag[i] - sub * work[i - 1];
            if denom.norm() < PIVOT_FLOOR {
                return Err(QdynError::Instability("vanishing pivot in tridiagonal solve".into()));
            }
            work[i] = sub / denom;
            let prev = psi[i - 1];
            psi[i] = (psi[i] - sub * prev) / denom;
        }
        for i in (0..n - 1).rev() {
            let next = psi[i + 1];
            psi[i] -= work[i] * next;
        }
        if !field.is_finite() {
            return Err(QdynError::NonFinite("Crank-Nicolson step".into()));
        }
        Ok(())
    }
}

pub fn crank_nicolson_step(field: &WaveField, potential: &Potential, dt: f64) -> Result<WaveField> {
    let cn = CrankNicolson::new(potential, &field.grid, dt)?;
    let mut out = field.clone();
    cn.step_in_place(&mut out, &mut Vec::new())?;
    Ok(out)
}

pub fn crank_nicolson_propagate(field: &WaveField, cn: &CrankNicolson, steps: usize) -> Result<WaveField> {
    let mut out = field.clone();
    let mut work = Vec::new();
    for _ in 0..steps {
        cn.step_in_place(&mut out, &mut work)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qdyn_core::{apply_hamiltonian, init_wavefunction, GaussianPacket};

    #[test]
    fn solves_the_cayley_system() {
        let g = Grid1D::centered(200, 0.2).unwrap();
        let v = Potential::well();
        let psi = init_wavefunction(&GaussianPacket::default(), &g).unwrap();
        let dt = 0.3;
        let out = crank_nicolson_step(&psi, &v, dt).unwrap();
        // residual of (1 + iHΔt/2)ψ' − (1 − iHΔt/2)ψ
        let ho = apply_hamiltonian(&out, &v).unwrap();
        let hp = apply_hamiltonian(&psi, &v).unwrap();
        let ih = Complex64::new(0.0, dt / 2.0);
        let res = (0..200)
            .map(|i| (out.amp[i] + ih * ho.amp[i] - psi.amp[i] + ih * hp.amp[i]).norm())
            .fold(0.0, f64::max);
        assert!(res < 1e-13, "{res}");
    }

    #[test]
    fn small_step_is_near_identity() {
        let g = Grid1D::centered(200, 0.2).unwrap();
        let psi = init_wavefunction(&GaussianPacket::default(), &g).unwrap();
        for dt in [1e-3, 1e-4] {
            let out = crank_nicolson_step(&psi, &Potential::barrier(), dt).unwrap();
            let d = out.amp.iter().zip(&psi.amp).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(d < 50.0 * dt, "{d}");
        }
    }
}
