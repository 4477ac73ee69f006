//! Reference-frame characteristics `(X, μ, ν)` of the tomogram in a locally
//! quadratic potential.
//!
//! With `V(x) ≈ const − κx + ½kx²` the frames obey
//! `Ẋ = κν`, `μ̇ = kν`, `ν̇ = −μ/m`, where `k = mω0²` and `κ = mω0²q_c`.
//! The solution is linear in `(X, μ, ν)`; negative `k` continues to
//! hyperbolic functions and `k → 0` to the constant-force limit.

use nalgebra::{Matrix3, Vector3};
use qdyn_core::units::MASS;
use qdyn_core::Potential;

/// Below this `|k·t²/m|` the trigonometric factors are summed as series.
const SERIES_LIMIT: f64 = 0.1;
const SERIES_TERMS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicFrameMap {
    /// `mω0²`; negative near potential maxima.
    pub stiffness: f64,
    /// `mω0²·q_c`, equal to the force at `q = 0` of the local expansion.
    pub drive: f64,
    pub dt: f64,
}

/// `C = cos ωt`, `S = sin(ωt)/ω`, `R = (1 − cos ωt)/ω²` with `ω² = k/m`,
/// continued analytically to `ω² ≤ 0`.
pub(crate) fn propagator_factors(stiffness: f64, t: f64) -> (f64, f64, f64) {
    let w2 = stiffness / MASS;
    let lam = w2 * t * t;
    if lam.abs() < SERIES_LIMIT {
        // Σ (−λ)ⁿ/(2n)!, t·Σ (−λ)ⁿ/(2n+1)!, t²·Σ (−λ)ⁿ/(2n+2)!
        let (mut c, mut s, mut r) = (0.0, 0.0, 0.0);
        let mut term = 1.0;
        for n in 0..SERIES_TERMS {
            let k = 2 * n;
            c += term;
            term /= (k + 1) as f64;
            s += term;
            term /= (k + 2) as f64;
            r += term;
            term *= -lam;
        }
        return (c, t * s, t * t * r);
    }
    let w = w2.abs().sqrt();
    let (c, s) = if w2 > 0.0 { ((w * t).cos(), (w * t).sin() / w) } else { ((w * t).cosh(), (w * t).sinh() / w) };
    (c, s, (1.0 - c) / w2)
}

impl HarmonicFrameMap {
    /// Map for `V = ½mω0²(q − q_c)²`.
    pub fn new(omega0_sq: f64, q_c: f64, dt: f64) -> Self {
        let stiffness = MASS * omega0_sq;
        Self { stiffness, drive: stiffness * q_c, dt }
    }

    /// Second-order expansion of `potential` around `q`.
    ///
    /// `k = V''(q)` and `κ = V''(q)·q − V'(q)`, so `q_c = q − V'(q)/V''(q)`;
    /// for vanishing curvature this is the constant-force map with `κ = −V'`.
    pub fn local(potential: &Potential, q: f64, dt: f64) -> Self {
        let k = potential.curvature(q);
        Self { stiffness: k, drive: k * q - potential.slope(q), dt }
    }

    pub fn omega0_sq(&self) -> f64 {
        self.stiffness / MASS
    }

    /// Center of the local expansion, undefined for zero curvature.
    pub fn q_c(&self) -> Option<f64> {
        (self.stiffness != 0.0).then(|| self.drive / self.stiffness)
    }

    pub fn with_dt(self, dt: f64) -> Self {
        Self { dt, ..self }
    }

    /// Matrix acting on column vectors `(X, μ, ν)`.
    pub fn matrix(&self) -> Matrix3<f64> {
        let (c, s, r) = propagator_factors(self.stiffness, self.dt);
        let (k, kap) = (self.stiffness, self.drive);
        Matrix3::new(
            1.0, -kap * r / MASS, kap * s, //
            0.0, c, k * s, //
            0.0, -s / MASS, c,
        )
    }

    pub fn apply(&self, z: &Vector3<f64>) -> Vector3<f64> {
        self.matrix() * z
    }
}

pub fn harmonic_frame_step(z: [f64; 3], map: &HarmonicFrameMap) -> [f64; 3] {
    let v = map.apply(&Vector3::from(z));
    [v[0], v[1], v[2]]
}
