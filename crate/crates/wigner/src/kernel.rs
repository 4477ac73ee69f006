//! Momentum-jump weighting function of the Wigner–Moyal integral equation.
//!
//! The classical force is carried by the trajectories, so only the part of
//! the potential beyond its quadratic background produces jumps:
//! `ω(s,q) = (2/πħ²)∫V_rem(q−q')·sin(2sq'/ħ)dq' + F_rem(q)·δ'_σ(s)`.
//! For a quadratic potential both terms vanish identically.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use qdyn_core::units::HBAR;
use qdyn_core::{Execution, Grid1D, PhaseSpaceGrid, Potential, QdynError, Result};

/// Default quadrature cutoffs `|q'| ≤ q_cut` for the benchmark potentials.
pub const DEFAULT_Q_CUT: [f64; 4] = [30.0, 30.0, 30.0, 10.0];
/// Upper bound on the quadrature node spacing.
pub const MAX_QUADRATURE_STEP: f64 = 0.04;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelOptions {
    pub q_cut: f64,
    /// Largest jump; defaults to (and is clipped at) `(N_p − 1)·Δp`.
    pub s_max: Option<f64>,
    /// Width of the regularized δ; defaults to `Δp`.
    pub sigma_delta: Option<f64>,
    /// Jump lattice spacing; defaults to `0.1·Δp`.
    pub ds: Option<f64>,
    pub exec: Execution,
}

impl KernelOptions {
    pub fn new(q_cut: f64) -> Self {
        Self { q_cut, s_max: None, sigma_delta: None, ds: None, exec: Execution::default() }
    }
}

/// Tabulated `ω(s, q̌_k)` together with its projection onto momentum-grid
/// offsets.
#[derive(Debug, Clone)]
pub struct JumpKernel {
    pub grid: PhaseSpaceGrid,
    /// Symmetric jump lattice `s_m = m·Δs`, `m = −M..=M`.
    pub s: Vec<f64>,
    pub ds: f64,
    pub sigma_delta: f64,
    pub q_cut: f64,
    /// Requested `s_max` if it had to be clipped to the grid.
    pub clipped_s_max: Option<f64>,
    /// `ω(s_m, q̌_k)` stored `m`-major.
    omega: Vec<f64>,
    /// Row `k` holds `K_k[d] = Σ_m Λ(d − s_m/Δp)·ω(s_m, q̌_k)·Δs` for
    /// `d = −(N_p−1)..=N_p−1`, Λ the linear hat.
    offsets: Vec<f64>,
}

/// Regularized `dδ/ds` of a normalized Gaussian of width `σ`.
#[inline]
pub fn delta_prime(s: f64, sigma: f64) -> f64 {
    -s / ((2.0 * PI).sqrt() * sigma.powi(3)) * (-0.5 * s * s / (sigma * sigma)).exp()
}

pub fn build_jump_kernel(potential: &Potential, psg: &PhaseSpaceGrid, q_cut: f64, s_max: Option<f64>) -> Result<JumpKernel> {
    build_jump_kernel_with(potential, psg, &KernelOptions { s_max, ..KernelOptions::new(q_cut) })
}

pub fn build_jump_kernel_with(potential: &Potential, psg: &PhaseSpaceGrid, opts: &KernelOptions) -> Result<JumpKernel> {
    let dp = psg.p.step();
    let np = psg.p.n();
    let sigma = opts.sigma_delta.unwrap_or(dp);
    let ds = opts.ds.unwrap_or(0.1 * dp);
    for (name, v) in [("q_cut", opts.q_cut), ("sigma_delta", sigma), ("ds", ds)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(QdynError::InvalidParameter { name, reason: format!("{v} must be positive") });
        }
    }
    potential.check_domain(&psg.q)?;
    let reach = (np - 1) as f64 * dp;
    let requested = opts.s_max.unwrap_or(reach);
    if !(requested > 0.0) {
        return Err(QdynError::InvalidParameter { name: "s_max", reason: format!("{requested} must be positive") });
    }
    let clipped_s_max = (requested > reach * (1.0 + 1e-12)).then_some(requested);
    let s_max = requested.min(reach);
    let m = (s_max / ds).floor() as i64;
    let s: Vec<f64> = (-m..=m).map(|i| i as f64 * ds).collect();

    let omega = integral_term(potential, &psg.q, &s, opts.q_cut);
    let mut omega = omega;
    let nq = psg.q.n();
    for (is, &sv) in s.iter().enumerate() {
        let dd = delta_prime(sv, sigma);
        for k in 0..nq {
            omega[is * nq + k] += -potential.anharmonic_slope(psg.q.point(k)) * dd;
        }
    }

    let width = 2 * np - 1;
    let offsets = opts.exec.map(nq, |k| {
        let mut row = vec![0.0; width];
        for (is, &sv) in s.iter().enumerate() {
            let u = sv / dp + (np - 1) as f64;
            let j = u.floor();
            let f = u - j;
            let j = j as usize;
            let w = omega[is * nq + k] * ds;
            row[j] += w * (1.0 - f);
            if j + 1 < width {
                row[j + 1] += w * f;
            }
        }
        row
    });
    Ok(JumpKernel {
        grid: *psg,
        s,
        ds,
        sigma_delta: sigma,
        q_cut: opts.q_cut,
        clipped_s_max,
        omega,
        offsets: offsets.concat(),
    })
}

/// Trapezoid quadrature of `(2/πħ²)∫_{|q'|≤q_cut} V_rem(q−q')·sin(2sq'/ħ)dq'`.
fn integral_term(potential: &Potential, qgrid: &Grid1D, s: &[f64], q_cut: f64) -> Vec<f64> {
    let s_top = s.last().copied().unwrap_or(0.0).abs();
    // at least four nodes per period of the fastest sine
    let mut h = MAX_QUADRATURE_STEP;
    if s_top > 0.0 {
        h = h.min(PI * HBAR / (4.0 * s_top));
    }
    let intervals = (2.0 * q_cut / h).ceil() as usize;
    let h = 2.0 * q_cut / intervals as f64;
    let nodes: Vec<f64> = (0..=intervals).map(|i| -q_cut + i as f64 * h).collect();
    let wq = |i: usize| if i == 0 || i == intervals { 0.5 * h } else { h };
    let (ns, nk, nq) = (s.len(), nodes.len(), qgrid.n());
    let sines = DMatrix::from_fn(ns, nk, |a, b| (2.0 * s[a] * nodes[b] / HBAR).sin() * wq(b));
    let remainder = DMatrix::from_fn(nk, nq, |b, k| potential.anharmonic_value(qgrid.point(k) - nodes[b]));
    let prod = sines * remainder;
    let scale = 2.0 / (PI * HBAR * HBAR);
    let mut out = vec![0.0; ns * nq];
    for a in 0..ns {
        for k in 0..nq {
            out[a * nq + k] = scale * prod[(a, k)];
        }
    }
    out
}

impl JumpKernel {
    #[inline]
    pub fn omega(&self, is: usize, k: usize) -> f64 {
        self.omega[is * self.grid.q.n() + k]
    }

    /// Jump weights onto momentum offsets `d = −(N_p−1)..=N_p−1` at `q̌_k`.
    #[inline]
    pub fn offsets(&self, k: usize) -> &[f64] {
        let w = 2 * self.grid.p.n() - 1;
        &self.offsets[k * w..(k + 1) * w]
    }

    pub fn n_s(&self) -> usize {
        self.s.len()
    }

    /// `max |ω(s,q) + ω(−s,q)|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let (ns, nq) = (self.s.len(), self.grid.q.n());
        let mut worst: f64 = 0.0;
        for is in 0..ns {
            for k in 0..nq {
                worst = worst.max((self.omega(is, k) + self.omega(ns - 1 - is, k)).abs());
            }
        }
        worst
    }

    /// `max |ω|` over the table.
    pub fn max_abs(&self) -> f64 {
        self.omega.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
