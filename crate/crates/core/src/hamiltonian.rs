//! Discrete Hamiltonian `H = p²/2m + V(q)` on a uniform grid with Dirichlet
//! ghost points outside the grid.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{QdynError, Result};
use crate::exec::Execution;
use crate::field::WaveField;
use crate::grid::Grid1D;
use crate::potential::Potential;
use crate::units::{HBAR, MASS};

const MVM_CHUNK: usize = 1 << 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kinetic {
    /// Three-point central second difference.
    #[default]
    ThreePoint,
    /// Exact `p²/2m` on the discrete Fourier momentum grid.
    Spectral,
}

impl Kinetic {
    pub fn name(self) -> &'static str {
        match self {
            Kinetic::ThreePoint => "threepoint",
            Kinetic::Spectral => "spectral",
        }
    }
}

impl fmt::Display for Kinetic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kinetic {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "threepoint" => Ok(Kinetic::ThreePoint),
            "spectral" => Ok(Kinetic::Spectral),
            _ => Err(format!("unknown kinetic discretization `{s}`")),
        }
    }
}

#[derive(Clone)]
struct SpectralPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `p_j²/2m / N` in FFT order.
    energies: Vec<f64>,
}

/// Matrix-free Hamiltonian with the potential pre-sampled on the grid.
#[derive(Clone)]
pub struct Hamiltonian {
    grid: Grid1D,
    potential: Vec<f64>,
    kinetic: Kinetic,
    spectral: Option<SpectralPlan>,
    exec: Execution,
}

impl fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hamiltonian")
            .field("grid", &self.grid)
            .field("kinetic", &self.kinetic)
            .field("exec", &self.exec)
            .finish_non_exhaustive()
    }
}

impl Hamiltonian {
    pub fn new(potential: &Potential, grid: &Grid1D, kinetic: Kinetic) -> Result<Self> {
        potential.check_domain(grid)?;
        let values = potential.sample(grid);
        if values.iter().any(|v| !v.is_finite()) {
            return Err(QdynError::NonFinite("potential on grid".into()));
        }
        Ok(Self::from_values(*grid, values, kinetic))
    }

    pub fn from_values(grid: Grid1D, potential: Vec<f64>, kinetic: Kinetic) -> Self {
        let spectral = (kinetic == Kinetic::Spectral).then(|| {
            let n = grid.n();
            let mut planner = FftPlanner::new();
            let pg = grid.fourier_dual();
            SpectralPlan {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
                energies: (0..n)
                    .map(|j| {
                        let p = pg.point(j);
                        p * p / (2.0 * MASS) / n as f64
                    })
                    .collect(),
            }
        });
        Self { grid, potential, kinetic, spectral, exec: Execution::default() }
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn kinetic(&self) -> Kinetic {
        self.kinetic
    }

    pub fn potential_values(&self) -> &[f64] {
        &self.potential
    }

    /// Coupling `ħ²/(2m·Δq²)` of the three-point stencil.
    #[inline]
    fn hopping(&self) -> f64 {
        HBAR * HBAR / (2.0 * MASS * self.grid.step() * self.grid.step())
    }

    /// `out = H·psi`.
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(psi.len(), self.grid.n());
        debug_assert_eq!(out.len(), self.grid.n());
        match self.kinetic {
            Kinetic::ThreePoint => {
                let c = self.hopping();
                let v = &self.potential;
                let n = psi.len();
                self.exec.for_each_chunk_mut(out, MVM_CHUNK, |off, slice| {
                    for (k, o) in slice.iter_mut().enumerate() {
                        let i = off + k;
                        let left = if i > 0 { psi[i - 1] } else { Complex64::new(0.0, 0.0) };
                        let right = if i + 1 < n { psi[i + 1] } else { Complex64::new(0.0, 0.0) };
                        *o = (psi[i] * 2.0 - left - right) * c + psi[i] * v[i];
                    }
                });
            }
            Kinetic::Spectral => {
                let plan = self.spectral.as_ref().expect("spectral plan");
                for (k, (o, p)) in out.iter_mut().zip(psi).enumerate() {
                    *o = if k % 2 == 0 { *p } else { -*p };
                }
                plan.forward.process(out);
                for (o, e) in out.iter_mut().zip(&plan.energies) {
                    *o *= *e;
                }
                plan.inverse.process(out);
                for (k, (o, (p, v))) in out.iter_mut().zip(psi.iter().zip(&self.potential)).enumerate() {
                    let t = if k % 2 == 0 { *o } else { -*o };
                    *o = t + p * v;
                }
            }
        }
    }

    pub fn apply_field(&self, field: &WaveField) -> WaveField {
        let mut out = WaveField::zeros(field.grid);
        self.apply(&field.amp, &mut out.amp);
        out
    }

    /// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩` (real part).
    pub fn energy(&self, field: &WaveField) -> f64 {
        let h = self.apply_field(field);
        field.inner(&h).re / field.norm_sqr()
    }

    /// Rigorous spectral enclosure: Gershgorin discs for the stencil, exact
    /// kinetic range plus potential range (Weyl) for the spectral operator.
    pub fn bounds(&self) -> (f64, f64) {
        let v = &self.potential;
        let n = v.len();
        match self.kinetic {
            Kinetic::ThreePoint => {
                let c = self.hopping();
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for (i, &vi) in v.iter().enumerate() {
                    let radius = if i == 0 || i + 1 == n { c } else { 2.0 * c };
                    lo = lo.min(vi + 2.0 * c - radius);
                    hi = hi.max(vi + 2.0 * c + radius);
                }
                (lo, hi)
            }
            Kinetic::Spectral => {
                let (vmin, vmax) = v
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
                let pmax = self.grid.fourier_dual().min();
                (vmin, vmax + pmax * pmax / (2.0 * MASS))
            }
        }
    }

    /// Bounds refined by power iteration on the shifted operators. The
    /// result is clamped inside the rigorous bounds and widened by the final
    /// residual, so it is near-tight rather than rigorous.
    pub fn tightened_bounds(&self, iterations: usize) -> (f64, f64) {
        let (lo, hi) = self.bounds();
        let top = self.extreme_eigenvalue(lo, 1.0, iterations);
        let bottom = self.extreme_eigenvalue(hi, -1.0, iterations);
        (bottom.max(lo), top.min(hi))
    }

    fn extreme_eigenvalue(&self, shift: f64, sign: f64, iterations: usize) -> f64 {
        let n = self.grid.n();
        let mut x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + 0.37 * ((i * 7919) % 101) as f64 / 101.0, 0.0))
            .collect();
        let mut hx = vec![Complex64::new(0.0, 0.0); n];
        let mut theta = 0.0;
        let mut residual = f64::INFINITY;
        for _ in 0..iterations.max(1) {
            let nx = x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            x.iter_mut().for_each(|a| *a /= nx);
            self.apply(&x, &mut hx);
            theta = x.iter().zip(&hx).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
            residual = x.iter().zip(&hx).map(|(a, b)| (b - a * theta).norm_sqr()).sum::<f64>().sqrt();
            // iterate with sign·(H − shift), which is positive semidefinite
            for (a, b) in x.iter_mut().zip(&hx) {
                *a = (b - *a * shift) * sign;
            }
        }
        theta + sign * residual
    }

    /// Dense real symmetric matrix in row-major order.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.grid.n();
        let mut m = vec![0.0; n * n];
        match self.kinetic {
            Kinetic::ThreePoint => {
                let c = self.hopping();
                for i in 0..n {
                    m[i * n + i] = 2.0 * c;
                    if i + 1 < n {
                        m[i * n + i + 1] = -c;
                        m[(i + 1) * n + i] = -c;
                    }
                }
            }
            Kinetic::Spectral => {
                let pg = self.grid.fourier_dual();
                let dq = self.grid.step();
                // T_kl depends on k − l only
                let row: Vec<f64> = (0..n)
                    .map(|d| {
                        (0..n)
                            .map(|j| {
                                let p = pg.point(j);
                                (p * d as f64 * dq).cos() * p * p / (2.0 * MASS)
                            })
                            .sum::<f64>()
                            / n as f64
                    })
                    .collect();
                for k in 0..n {
                    for l in 0..n {
                        m[k * n + l] = row[k.abs_diff(l)];
                    }
                }
            }
        }
        for i in 0..n {
            m[i * n + i] += self.potential[i];
        }
        m
    }
}

/// One application of the three-point Hamiltonian to `field`.
pub fn apply_hamiltonian(field: &WaveField, potential: &Potential) -> Result<WaveField> {
    let h = Hamiltonian::new(potential, &field.grid, Kinetic::ThreePoint)?;
    Ok(h.apply_field(field))
}

/// Gershgorin enclosure of the three-point Hamiltonian spectrum.
pub fn spectral_bounds(potential: &Potential, grid: &Grid1D) -> Result<(f64, f64)> {
    Ok(Hamiltonian::new(potential, grid, Kinetic::ThreePoint)?.bounds())
}
