//! Chebyshev expansion of the short-time propagator `exp(−iHΔt/ħ)`.

use num_complex::Complex64;
use qdyn_core::units::HBAR;
use qdyn_core::{Execution, Grid1D, Hamiltonian, Kinetic, Potential, QdynError, Result, WaveField};

use crate::bessel::truncation_order;

pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_CUTOFF: f64 = 1e-16;

/// How the spectral interval of `H` is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralBounds {
    /// Gershgorin discs (three-point) or kinetic plus potential range (spectral).
    Rigorous,
    /// Power-iteration refinement with the given number of iterations.
    Tightened(usize),
    Explicit { min: f64, max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevOptions {
    pub alpha: f64,
    pub cutoff: f64,
    pub kinetic: Kinetic,
    pub bounds: SpectralBounds,
    /// Edge amplitude that aborts a step; `None` disables the check.
    pub leak_threshold: Option<f64>,
    pub exec: Execution,
}

impl Default for ChebyshevOptions {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            cutoff: DEFAULT_CUTOFF,
            kinetic: Kinetic::ThreePoint,
            bounds: SpectralBounds::Rigorous,
            leak_threshold: None,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChebyshevPlan {
    /// Spectral half-width including the safety margin.
    pub a: f64,
    /// Spectral center.
    pub b: f64,
    pub alpha: f64,
    pub dt: f64,
    pub cutoff: f64,
    /// Expansion order `M`.
    pub order: usize,
    /// `J_k(a·Δt/ħ)` for `k = 0..=M`.
    pub bessel: Vec<f64>,
    pub leak_threshold: Option<f64>,
    hamiltonian: Hamiltonian,
}

/// Plan with default options.
pub fn plan_chebyshev(potential: &Potential, grid: &Grid1D, dt: f64, cutoff: f64) -> Result<ChebyshevPlan> {
    plan_chebyshev_with(potential, grid, dt, &ChebyshevOptions { cutoff, ..Default::default() })
}

pub fn plan_chebyshev_with(
    potential: &Potential,
    grid: &Grid1D,
    dt: f64,
    opts: &ChebyshevOptions,
) -> Result<ChebyshevPlan> {
    let h = Hamiltonian::new(potential, grid, opts.kinetic)?.with_execution(opts.exec);
    ChebyshevPlan::new(h, dt, opts)
}

impl ChebyshevPlan {
    pub fn new(hamiltonian: Hamiltonian, dt: f64, opts: &ChebyshevOptions) -> Result<Self> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(QdynError::InvalidParameter { name: "dt", reason: format!("{dt} must be non-negative") });
        }
        if !(opts.cutoff > 0.0 && opts.cutoff <= 1e-8) {
            return Err(QdynError::InvalidParameter {
                name: "cutoff",
                reason: format!("{} not in (0, 1e-8]", opts.cutoff),
            });
        }
        if !(opts.alpha >= 0.0) {
            return Err(QdynError::InvalidParameter { name: "alpha", reason: "must be non-negative".into() });
        }
        let (lo, hi) = match opts.bounds {
            SpectralBounds::Rigorous => hamiltonian.bounds(),
            SpectralBounds::Tightened(iters) => hamiltonian.tightened_bounds(iters),
            SpectralBounds::Explicit { min, max } => (min, max),
        };
        if !(hi > lo) {
            return Err(QdynError::InvalidParameter { name: "bounds", reason: format!("empty interval [{lo}, {hi}]") });
        }
        let b = 0.5 * (hi + lo);
        let a = 0.5 * (hi - lo) * (1.0 + opts.alpha);
        let (order, bessel) = truncation_order(a * dt / HBAR, opts.cutoff)?;
        Ok(Self {
            a,
            b,
            alpha: opts.alpha,
            dt,
            cutoff: opts.cutoff,
            order,
            bessel,
            leak_threshold: opts.leak_threshold,
            hamiltonian,
        })
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    /// Expansion coefficients `c_k = (−i)^k·J_k(a·Δt/ħ)`.
    pub fn coefficients(&self) -> Vec<Complex64> {
        self.bessel.iter().enumerate().map(|(k, &j)| minus_i_pow(k) * j).collect()
    }

    /// Advances `field` by one time step in place.
    pub fn step_in_place(&self, field: &mut WaveField, scratch: &mut Scratch) -> Result<()> {
        if !field.grid.same_as(self.hamiltonian.grid()) {
            return Err(QdynError::GridMismatch("field and plan grids differ".into()));
        }
        let n = field.amp.len();
        scratch.resize(n);
        let Scratch { prev, cur, next, acc } = scratch;
        let (a, b) = (self.a, self.b);

        // v0 = ψ, v1 = H̃ψ
        prev.copy_from_slice(&field.amp);
        self.hamiltonian.apply(prev, cur);
        for (c, p) in cur.iter_mut().zip(prev.iter()) {
            *c = (*c - p * b) / a;
        }
        for (s, p) in acc.iter_mut().zip(prev.iter()) {
            *s = p * self.bessel[0];
        }
        if self.order >= 1 {
            let c1 = minus_i_pow(1) * (2.0 * self.bessel[1]);
            for (s, c) in acc.iter_mut().zip(cur.iter()) {
                *s += c * c1;
            }
        }
        for k in 2..=self.order {
            // v_k = 2H̃v_{k−1} − v_{k−2}
            self.hamiltonian.apply(cur, next);
            let ck = minus_i_pow(k) * (2.0 * self.bessel[k]);
            for ((nx, c), (p, s)) in next.iter_mut().zip(cur.iter()).zip(prev.iter().zip(acc.iter_mut())) {
                *nx = (*nx - c * b) * (2.0 / a) - p;
                *s += *nx * ck;
            }
            std::mem::swap(prev, cur);
            std::mem::swap(cur, next);
        }
        let phase = Complex64::from_polar(1.0, -b * self.dt / HBAR);
        for (f, s) in field.amp.iter_mut().zip(acc.iter()) {
            *f = s * phase;
        }
        if !field.is_finite() {
            return Err(QdynError::NonFinite("Chebyshev step".into()));
        }
        if let Some(threshold) = self.leak_threshold {
            field.check_boundary(threshold)?;
        }
        Ok(())
    }
}

#[inline]
fn minus_i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// Work buffers reused across steps.
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    prev: Vec<Complex64>,
    cur: Vec<Complex64>,
    next: Vec<Complex64>,
    acc: Vec<Complex64>,
}

impl Scratch {
    fn resize(&mut self, n: usize) {
        for v in [&mut self.prev, &mut self.cur, &mut self.next, &mut self.acc] {
            v.resize(n, Complex64::new(0.0, 0.0));
        }
    }
}

/// One Chebyshev step returning a new field.
pub fn chebyshev_step(field: &WaveField, plan: &ChebyshevPlan) -> Result<WaveField> {
    let mut out = field.clone();
    plan.step_in_place(&mut out, &mut Scratch::default())?;
    Ok(out)
}

/// Propagates through `steps` steps.
pub fn chebyshev_propagate(field: &WaveField, plan: &ChebyshevPlan, steps: usize) -> Result<WaveField> {
    let mut out = field.clone();
    let mut scratch = Scratch::default();
    for _ in 0..steps {
        plan.step_in_place(&mut out, &mut scratch)?;
    }
    Ok(out)
}
