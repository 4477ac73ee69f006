//! Linearized semiclassical propagator.
//!
//! Around every grid point the potential is replaced by its tangent line,
//! for which the propagator is known in closed form. Each source point is
//! launched along every momentum of the discrete Fourier grid, the resulting
//! complex amplitudes are collected on the momentum grid and the wave
//! function is rebuilt by an inverse discrete Fourier sum.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use qdyn_core::units::{HBAR, MASS};
use qdyn_core::{Execution, Grid1D, Potential, QdynError, Result, WaveField};
use rustfft::{Fft, FftPlanner};

const SOURCE_CHUNK: usize = 64;

/// Largest admissible time step for a cell of slope `s`: the fastest
/// trajectory `|p0| = πħ/Δq` must stay within half a cell.
pub fn courant_bound(slope: f64, dq: f64) -> f64 {
    let x = slope.abs() * dq.powi(3) * MASS / (PI * PI * HBAR * HBAR);
    // (πħ/|s|Δq)(√(1+x) − 1) rewritten without cancellation; s = 0 gives mΔq²/2πħ
    MASS * dq * dq / (PI * HBAR) / ((1.0 + x).sqrt() + 1.0)
}

/// Minimum of [`courant_bound`] over all grid points.
pub fn courant_dt(potential: &Potential, grid: &Grid1D) -> Result<f64> {
    potential.check_domain(grid)?;
    Ok((0..grid.n())
        .map(|i| courant_bound(potential.slope(grid.point(i)), grid.step()))
        .fold(f64::INFINITY, f64::min))
}

/// Constant-force trajectory: returns `(q, p)` after `dt`.
#[inline]
pub fn linear_trajectory(q0: f64, p0: f64, slope: f64, dt: f64) -> (f64, f64) {
    (q0 + p0 * dt / MASS - slope * dt * dt / (2.0 * MASS), p0 - slope * dt)
}

/// Classical action of the constant-force path and the propagator prefactor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearAction {
    /// `S/ħ` in radians.
    pub phase: f64,
    /// `√(m/(2πiħΔt))` with `arg √i = π/4`.
    pub prefactor: Complex64,
    pub q_final: f64,
    pub p_final: f64,
}

/// Action `m(q−q0)²/2Δt − (sΔt/2)(q+q0) − s²Δt³/24m` along the trajectory
/// launched from `(q0, p0)` in the potential `s·q`.
pub fn linprop_action_phase(q0: f64, p0: f64, slope: f64, dt: f64) -> Result<LinearAction> {
    if !(dt > 0.0) {
        return Err(QdynError::InvalidParameter { name: "dt", reason: "propagator prefactor is singular at dt = 0".into() });
    }
    let (q, p) = linear_trajectory(q0, p0, slope, dt);
    let d = q - q0;
    let action = MASS * d * d / (2.0 * dt) - 0.5 * slope * dt * (q + q0) - slope * slope * dt.powi(3) / (24.0 * MASS);
    let modulus = (MASS / (2.0 * PI * HBAR * dt)).sqrt();
    Ok(LinearAction {
        phase: action / HBAR,
        prefactor: Complex64::from_polar(modulus, -PI / 4.0),
        q_final: q,
        p_final: p,
    })
}

/// Initial momenta assigned to each source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Launch {
    /// `p0 = p̌_j + sΔt`, so every trajectory ends exactly on a grid momentum.
    #[default]
    Commensurate,
    /// `p0 = p̌_j`; final momenta are off-grid and go through the shape function.
    GridMomenta,
}

/// Momentum-space shape function for depositing off-grid final momenta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Shape {
    #[default]
    NearestGridPoint,
    CloudInCell,
}

impl FromStr for Shape {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ngp" => Ok(Shape::NearestGridPoint),
            "cic" => Ok(Shape::CloudInCell),
            _ => Err(format!("unknown shape `{s}`")),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::NearestGridPoint => "ngp",
            Shape::CloudInCell => "cic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinPropOptions {
    pub launch: Launch,
    pub shape: Shape,
    /// Sources with `|ψ| <` this value are skipped; 0 keeps every source.
    pub inclusion_threshold: f64,
    pub exec: Execution,
}

impl Default for LinPropOptions {
    fn default() -> Self {
        Self { launch: Launch::default(), shape: Shape::default(), inclusion_threshold: 0.0, exec: Execution::default() }
    }
}

#[derive(Clone)]
pub struct LinPropPlan {
    pub grid: Grid1D,
    pub pgrid: Grid1D,
    pub dt: f64,
    pub courant: f64,
    /// `dV/dq` at each grid point.
    pub slopes: Vec<f64>,
    /// `V(q_i) − s_i·q_i`, the constant term of each tangent line.
    pub offsets: Vec<f64>,
    pub options: LinPropOptions,
    inverse: Arc<dyn Fft<f64>>,
    /// Per-momentum factor applied before the inverse transform.
    pre_phase: Vec<Complex64>,
    /// Per-coordinate factor applied after the inverse transform.
    post_phase: Vec<Complex64>,
}

impl fmt::Debug for LinPropPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinPropPlan")
            .field("grid", &self.grid)
            .field("dt", &self.dt)
            .field("courant", &self.courant)
            .field("options", &self.options)
            .finish_non_exhaustive()
    }
}

impl LinPropPlan {
    pub fn new(potential: &Potential, grid: &Grid1D, dt: f64, options: LinPropOptions) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(QdynError::InvalidParameter { name: "dt", reason: format!("{dt} must be positive") });
        }
        let courant = courant_dt(potential, grid)?;
        if dt > courant {
            return Err(QdynError::CourantViolation { dt, max: courant });
        }
        let n = grid.n();
        let slopes: Vec<f64> = (0..n).map(|i| potential.slope(grid.point(i))).collect();
        let offsets = (0..n).map(|i| potential.value(grid.point(i)) - slopes[i] * grid.point(i)).collect();
        let pgrid = grid.fourier_dual();
        let (qmin, dq) = (grid.min(), grid.step());
        let (pmin, dp) = (pgrid.min(), pgrid.step());
        let measure = dp / (2.0 * PI * HBAR).sqrt();
        let pre_phase = (0..n).map(|j| Complex64::from_polar(1.0, qmin * j as f64 * dp / HBAR)).collect();
        let post_phase = (0..n)
            .map(|k| Complex64::from_polar(measure, (qmin * pmin + k as f64 * dq * pmin) / HBAR))
            .collect();
        let inverse = FftPlanner::new().plan_fft_inverse(n);
        Ok(Self { grid: *grid, pgrid, dt, courant, slopes, offsets, options, inverse, pre_phase, post_phase })
    }

    /// Largest time step not exceeding `dt_max` that divides `t` into whole steps.
    pub fn commensurate_dt(t: f64, dt_max: f64) -> (usize, f64) {
        let steps = (t / dt_max).ceil().max(1.0) as usize;
        (steps, t / steps as f64)
    }

    #[inline]
    fn include(&self, amp: Complex64) -> bool {
        self.options.inclusion_threshold <= 0.0 || amp.norm() >= self.options.inclusion_threshold
    }

    /// Momentum-space amplitudes `ψ(p̌_j, t+Δt)` via the closed-form phase
    /// `−p q_i − p²Δt/2m − V_iΔt − s_i pΔt²/2m − s_i²Δt³/6m` (commensurate launch).
    fn momentum_amplitudes_fast(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.n();
        let (dt, dq) = (self.dt, self.grid.step());
        let (pmin, dp) = (self.pgrid.min(), self.pgrid.step());
        let weight = dq / (2.0 * PI * HBAR).sqrt();
        let parts = self.options.exec.map_chunks(n, SOURCE_CHUNK, |range| {
            let mut acc = vec![Complex64::new(0.0, 0.0); n];
            for i in range {
                if !self.include(psi[i]) {
                    continue;
                }
                let s = self.slopes[i];
                let shifted = self.grid.point(i) + s * dt * dt / (2.0 * MASS);
                let constant = self.offsets[i] * dt + s * self.grid.point(i) * dt + s * s * dt.powi(3) / (6.0 * MASS);
                let mut z = psi[i] * weight * Complex64::from_polar(1.0, -(constant + pmin * shifted) / HBAR);
                let rot = Complex64::from_polar(1.0, -dp * shifted / HBAR);
                for a in acc.iter_mut() {
                    *a += z;
                    z *= rot;
                }
            }
            acc
        });
        let mut total = merge(parts, n);
        for (j, a) in total.iter_mut().enumerate() {
            let p = pmin + j as f64 * dp;
            *a *= Complex64::from_polar(1.0, -p * p * dt / (2.0 * MASS * HBAR));
        }
        total
    }

    /// Generic path: launch every trajectory, evaluate its action and deposit
    /// the amplitude with the shape function.
    fn momentum_amplitudes_general(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.n();
        let dt = self.dt;
        let weight = self.grid.step() / (2.0 * PI * HBAR).sqrt();
        let parts = self.options.exec.map_chunks(n, SOURCE_CHUNK, |range| {
            let mut acc = vec![Complex64::new(0.0, 0.0); n];
            for i in range {
                if !self.include(psi[i]) {
                    continue;
                }
                let (q0, s) = (self.grid.point(i), self.slopes[i]);
                for j in 0..n {
                    let p0 = match self.options.launch {
                        Launch::Commensurate => self.pgrid.point(j) + s * dt,
                        Launch::GridMomenta => self.pgrid.point(j),
                    };
                    let path = linprop_action_phase(q0, p0, s, dt).expect("dt > 0 checked at plan time");
                    let phase = path.phase - (self.offsets[i] * dt + path.p_final * path.q_final) / HBAR;
                    let amp = psi[i] * weight * Complex64::from_polar(1.0, phase);
                    self.deposit(&mut acc, path.p_final, amp);
                }
            }
            acc
        });
        merge(parts, n)
    }

    fn deposit(&self, acc: &mut [Complex64], p: f64, amp: Complex64) {
        let n = acc.len() as i64;
        let u = (p - self.pgrid.min()) / self.pgrid.step();
        // momenta outside the Fourier window alias periodically
        let wrap = |k: i64| k.rem_euclid(n) as usize;
        match self.options.shape {
            Shape::NearestGridPoint => acc[wrap(u.round() as i64)] += amp,
            Shape::CloudInCell => {
                let k = u.floor();
                let f = u - k;
                acc[wrap(k as i64)] += amp * (1.0 - f);
                acc[wrap(k as i64 + 1)] += amp * f;
            }
        }
    }

    pub fn momentum_amplitudes(&self, psi: &[Complex64]) -> Vec<Complex64> {
        match self.options.launch {
            Launch::Commensurate => self.momentum_amplitudes_fast(psi),
            Launch::GridMomenta => self.momentum_amplitudes_general(psi),
        }
    }

    /// `ψ(q̌_k) = Σ_j Δp/√(2πħ)·e^{i q̌_k p̌_j/ħ}·ψ(p̌_j)`.
    pub fn reconstruct(&self, mut momentum: Vec<Complex64>) -> Vec<Complex64> {
        for (a, f) in momentum.iter_mut().zip(&self.pre_phase) {
            *a *= f;
        }
        self.inverse.process(&mut momentum);
        for (a, f) in momentum.iter_mut().zip(&self.post_phase) {
            *a *= f;
        }
        momentum
    }

    pub fn step(&self, field: &WaveField) -> Result<WaveField> {
        if !field.grid.same_as(&self.grid) {
            return Err(QdynError::GridMismatch("field and plan grids differ".into()));
        }
        let out = WaveField::new(self.grid, self.reconstruct(self.momentum_amplitudes(&field.amp)))?;
        if !out.is_finite() {
            return Err(QdynError::NonFinite("linearized propagator step".into()));
        }
        Ok(out)
    }

    #[doc(hidden)]
    pub fn step_general(&self, field: &WaveField) -> WaveField {
        WaveField { grid: self.grid, amp: self.reconstruct(self.momentum_amplitudes_general(&field.amp)) }
    }
}

fn merge(parts: Vec<Vec<Complex64>>, n: usize) -> Vec<Complex64> {
    let mut it = parts.into_iter();
    let mut total = it.next().unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); n]);
    for part in it {
        for (t, p) in total.iter_mut().zip(&part) {
            *t += p;
        }
    }
    total
}

/// One step of the linearized propagator; no renormalization is applied.
pub fn linprop_step(field: &WaveField, plan: &LinPropPlan) -> Result<WaveField> {
    plan.step(field)
}

pub fn linprop_propagate(field: &WaveField, plan: &LinPropPlan, steps: usize) -> Result<WaveField> {
    let mut out = field.clone();
    for _ in 0..steps {
        out = plan.step(&out)?;
    }
    Ok(out)
}
