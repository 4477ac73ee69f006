//! Minimum-uncertainty Gaussian initial state in wave-function, Wigner and
//! tomogram form.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{ensure, QdynError, Result};
use crate::field::{PhaseSpaceField, WaveField};
use crate::grid::{Grid1D, PhaseSpaceGrid};
use crate::units::HBAR;

/// Edge amplitude above which a grid counts as too narrow for the packet.
pub const EDGE_TOLERANCE: f64 = 1e-15;
/// Number of standard deviations the phase-space grid must cover.
pub const COVERAGE_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub q0: f64,
    pub p0: f64,
    pub sigma: f64,
}

impl Default for GaussianPacket {
    fn default() -> Self {
        Self { q0: -5.0, p0: 1.0, sigma: FRAC_1_SQRT_2 }
    }
}

/// Normal profile `exp(−(x−center)²/2width²)/√(2π width²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianProfile {
    pub center: f64,
    pub width: f64,
}

impl GaussianProfile {
    #[inline]
    pub fn density(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.width;
        (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * self.width)
    }
}

impl GaussianPacket {
    pub fn new(q0: f64, p0: f64, sigma: f64) -> Result<Self> {
        ensure(q0.is_finite() && p0.is_finite(), "packet", "center must be finite")?;
        ensure(sigma.is_finite() && sigma > 0.0, "sigma", "must be positive")?;
        Ok(Self { q0, p0, sigma })
    }

    /// Momentum width `ħ/(2σ)`.
    #[inline]
    pub fn sigma_p(&self) -> f64 {
        HBAR / (2.0 * self.sigma)
    }

    /// Continuum amplitude `(2πσ²)^(−1/4)·exp(−(q−q0)²/4σ² + i·p0·q/ħ)`.
    pub fn amplitude(&self, q: f64) -> Complex64 {
        let s2 = self.sigma * self.sigma;
        let d = q - self.q0;
        let modulus = (2.0 * PI * s2).powf(-0.25) * (-d * d / (4.0 * s2)).exp();
        Complex64::from_polar(modulus, self.p0 * q / HBAR)
    }

    /// `W0(q, p) = (1/πħ)·exp(−(q−q0)²/2σ² − 2σ²(p−p0)²/ħ²)`.
    #[inline]
    pub fn wigner(&self, q: f64, p: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        let dq = q - self.q0;
        let dp = p - self.p0;
        (-dq * dq / (2.0 * s2) - 2.0 * s2 * dp * dp / (HBAR * HBAR)).exp() / (PI * HBAR)
    }

    /// Gaussian tomogram parameters in the frame `(μ, ν)`.
    pub fn tomogram(&self, mu: f64, nu: f64) -> Result<GaussianProfile> {
        if mu == 0.0 && nu == 0.0 {
            return Err(QdynError::DegenerateFrame);
        }
        let sp = self.sigma_p();
        Ok(GaussianProfile {
            center: mu * self.q0 + nu * self.p0,
            width: (nu * nu * sp * sp + mu * mu * self.sigma * self.sigma).sqrt(),
        })
    }

    pub fn coordinate_density(&self) -> GaussianProfile {
        GaussianProfile { center: self.q0, width: self.sigma }
    }

    pub fn momentum_density(&self) -> GaussianProfile {
        GaussianProfile { center: self.p0, width: self.sigma_p() }
    }

    /// `⟨p²⟩/2m`.
    pub fn kinetic_energy(&self) -> f64 {
        let sp = self.sigma_p();
        0.5 * (self.p0 * self.p0 + sp * sp)
    }
}

/// Samples the packet on `grid` and renormalizes it discretely.
pub fn init_wavefunction(packet: &GaussianPacket, grid: &Grid1D) -> Result<WaveField> {
    let amp: Vec<Complex64> = grid.points().into_iter().map(|q| packet.amplitude(q)).collect();
    let edge = amp[0].norm().max(amp[amp.len() - 1].norm());
    if !(edge < EDGE_TOLERANCE) {
        return Err(QdynError::BoundaryLeak { amplitude: edge, threshold: EDGE_TOLERANCE });
    }
    let mut field = WaveField::new(*grid, amp)?;
    field.normalize();
    Ok(field)
}

/// Tabulates the initial Wigner function on `psg`.
pub fn init_wigner(packet: &GaussianPacket, psg: &PhaseSpaceGrid) -> Result<PhaseSpaceField> {
    let covers = |g: &Grid1D, c: f64, s: f64| {
        g.min() <= c - COVERAGE_SIGMAS * s && g.max() >= c + COVERAGE_SIGMAS * s
    };
    if !covers(&psg.q, packet.q0, packet.sigma) {
        return Err(QdynError::Coverage(format!(
            "q axis [{}, {}] does not cover q0 ± {COVERAGE_SIGMAS}σ",
            psg.q.min(),
            psg.q.max()
        )));
    }
    if !covers(&psg.p, packet.p0, packet.sigma_p()) {
        return Err(QdynError::Coverage(format!(
            "p axis [{}, {}] does not cover p0 ± {COVERAGE_SIGMAS}σ_p",
            psg.p.min(),
            psg.p.max()
        )));
    }
    Ok(PhaseSpaceField::from_fn(*psg, |q, p| packet.wigner(q, p)))
}

/// Center and width of the initial tomogram in frame `(μ, ν)`.
pub fn init_tomogram(packet: &GaussianPacket, mu: f64, nu: f64) -> Result<GaussianProfile> {
    packet.tomogram(mu, nu)
}
