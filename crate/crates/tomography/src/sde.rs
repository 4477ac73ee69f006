//! Markov-process view of the frame evolution: drift and diffusion moments
//! over an ensemble of local harmonic propagators, a semidefinite Cholesky
//! factor and a Stratonovich step.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use qdyn_core::{Potential, QdynError, Result};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::frame::HarmonicFrameMap;

/// Accepted negative eigenvalue of a diffusion matrix.
pub const PSD_TOLERANCE: f64 = 1e-10;
/// Relative trace shift added before factorizing.
pub const PSD_SHIFT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftDiffusion {
    /// `a^i`, first moment of the increments per unit time.
    pub a: Vector3<f64>,
    /// `b^{ij}`, second moment of the increments per unit time.
    pub b: Matrix3<f64>,
    /// Lower-triangular factor with `g·gᵀ = b + ε·I`.
    pub g: Matrix3<f64>,
    pub epsilon: f64,
    /// Drift `ψ` of the stochastic integral equation. Equal to `a` until a
    /// Stratonovich correction has been estimated.
    pub psi_drift: Vector3<f64>,
}

impl DriftDiffusion {
    /// Constant coefficients with `b = g·gᵀ`.
    pub fn constant(a: Vector3<f64>, g: Matrix3<f64>) -> Self {
        Self { a, b: g * g.transpose(), g, epsilon: 0.0, psi_drift: a }
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().chain(self.b.iter()).chain(self.g.iter()).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdFactor {
    pub g: Matrix3<f64>,
    pub epsilon: f64,
}

/// Cholesky factor of a positive semidefinite `b`, regularized by
/// `ε = max(0, −λ_min) + 10⁻¹²·tr b`.
pub fn cholesky_psd(b: &Matrix3<f64>) -> Result<PsdFactor> {
    if !b.iter().all(|v| v.is_finite()) {
        return Err(QdynError::NonFinite("diffusion matrix".into()));
    }
    let scale = b.abs().max().max(f64::MIN_POSITIVE);
    if (b - b.transpose()).abs().max() > 1e-12 * scale {
        return Err(QdynError::InvalidParameter { name: "b", reason: "not symmetric".into() });
    }
    let sym = (b + b.transpose()) * 0.5;
    let lambda_min = SymmetricEigen::new(sym).eigenvalues.min();
    if lambda_min < -PSD_TOLERANCE * scale.max(1.0) {
        return Err(QdynError::Indefinite { lambda_min });
    }
    let epsilon = (-lambda_min).max(0.0) + PSD_SHIFT * sym.trace();
    let a = sym + Matrix3::identity() * epsilon;
    let mut g = Matrix3::zeros();
    for j in 0..3 {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= g[(j, k)] * g[(j, k)];
        }
        // rounding can leave a tiny negative pivot on a zero direction
        let d = d.max(0.0).sqrt();
        g[(j, j)] = d;
        for i in j + 1..3 {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= g[(i, k)] * g[(j, k)];
            }
            g[(i, j)] = if d > 0.0 { s / d } else { 0.0 };
        }
    }
    Ok(PsdFactor { g, epsilon })
}

/// Moments of the increments `Φ_q(map_dt)·z − z` over the sampled `q`,
/// normalized by `dtau > 0`.
pub(crate) fn increment_moments(
    z: &Vector3<f64>,
    potential: &Potential,
    q_samples: &[f64],
    map_dt: f64,
    dtau: f64,
) -> Result<DriftDiffusion> {
    if q_samples.is_empty() {
        return Err(QdynError::EmptySamples);
    }
    if !(dtau > 0.0 && dtau.is_finite()) {
        return Err(QdynError::InvalidParameter { name: "dtau", reason: format!("{dtau} must be positive") });
    }
    let mut first = Vector3::zeros();
    let mut second = Matrix3::zeros();
    for &q in q_samples {
        let dz = HarmonicFrameMap::local(potential, q, map_dt).apply(z) - z;
        first += dz;
        second += dz * dz.transpose();
    }
    let n = q_samples.len() as f64;
    let a = first / (n * dtau);
    let b = second / (n * dtau);
    let f = cholesky_psd(&b)?;
    Ok(DriftDiffusion { a, b, g: f.g, epsilon: f.epsilon, psi_drift: a })
}

/// Drift and diffusion of the frame `z` when the local expansion point is
/// drawn from `q_samples`.
pub fn drift_diffusion_estimate(z: [f64; 3], potential: &Potential, q_samples: &[f64], dtau: f64) -> Result<DriftDiffusion> {
    increment_moments(&Vector3::from(z), potential, q_samples, dtau, dtau)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StochasticOptions {
    /// Antithetic noise pairs for the Stratonovich correction.
    pub inner_pairs: usize,
    /// Extra passes recomputing the midpoint with the full increment.
    pub repeats: usize,
}

impl Default for StochasticOptions {
    fn default() -> Self {
        Self { inner_pairs: 8, repeats: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticIncrement {
    pub z: Vector3<f64>,
    /// Coefficients at the final midpoint, `psi_drift` including the
    /// correction.
    pub coefficients: DriftDiffusion,
}

fn normal3<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Vector3<f64> {
    Vector3::from_fn(|_, _| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
}

/// One step `z ← z + ψ·Δτ + g(z̄)·Δξ`, `z̄ = z + Δz/2`, `Δξ ~ N(0, Δτ·I)`.
///
/// `field` returns the coefficients at a given `z`. A drift-only predictor
/// fixes the first midpoint; `ψ = a − ½Σ∂g·g` is estimated from
/// `⟨g(z + Δz_m/2)·Δξ_m⟩/Δτ` over antithetic pairs `±Δξ_m`, which is exact
/// (zero) for constant `g`. Each repeat recomputes the midpoint from the
/// previous full increment with the same noise.
pub fn stochastic_step<F, R>(z: &Vector3<f64>, field: F, dtau: f64, rng: &mut R, opts: &StochasticOptions) -> Result<StochasticIncrement>
where
    F: Fn(&Vector3<f64>) -> Result<DriftDiffusion>,
    R: Rng + ?Sized,
{
    if !(dtau > 0.0 && dtau.is_finite()) {
        return Err(QdynError::InvalidParameter { name: "dtau", reason: format!("{dtau} must be positive") });
    }
    let sq = dtau.sqrt();
    let xi = normal3(rng, sq);
    let inner: Vec<Vector3<f64>> = (0..opts.inner_pairs).map(|_| normal3(rng, sq)).collect();

    let base = field(z)?;
    let a = base.a;
    let mut psi = a;
    let mut dz = a * dtau;
    let mut coeff = base;
    for _ in 0..=opts.repeats {
        coeff = field(&(z + 0.5 * dz))?;
        let g = coeff.g;
        if !inner.is_empty() {
            let mut corr = Vector3::zeros();
            for dxi in &inner {
                for sign in [1.0, -1.0] {
                    let e = sign * dxi;
                    let gm = field(&(z + 0.5 * (psi * dtau + g * e)))?.g;
                    corr += gm * e;
                }
            }
            corr /= 2.0 * inner.len() as f64 * dtau;
            psi = a - corr;
        }
        dz = psi * dtau + g * xi;
    }
    if !dz.iter().all(|v| v.is_finite()) {
        return Err(QdynError::NonFinite("stochastic increment".into()));
    }
    coeff.psi_drift = psi;
    Ok(StochasticIncrement { z: z + dz, coefficients: coeff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn identity_factor() {
        let f = cholesky_psd(&Matrix3::identity()).unwrap();
        assert!((f.g - Matrix3::identity()).abs().max() < 1e-11);
    }

    #[test]
    fn semidefinite_diagonal() {
        let f = cholesky_psd(&Matrix3::from_diagonal(&Vector3::new(4.0, 1.0, 0.0))).unwrap();
        assert!((f.g[(0, 0)] - 2.0).abs() < 1e-11);
        assert!((f.g[(1, 1)] - 1.0).abs() < 1e-11);
        assert!(f.g[(2, 2)] > 0.0 && f.g[(2, 2)] < 1e-5);
        assert!((f.epsilon - 5e-12).abs() < 1e-20);
    }

    #[test]
    fn zero_matrix_has_zero_factor() {
        let f = cholesky_psd(&Matrix3::zeros()).unwrap();
        assert_eq!(f.g, Matrix3::zeros());
    }

    #[test]
    fn indefinite_rejected() {
        let b = Matrix3::from_diagonal(&Vector3::new(1.0, -0.1, 0.5));
        assert!(matches!(cholesky_psd(&b), Err(QdynError::Indefinite { .. })));
    }

    #[test]
    fn single_sample_is_deterministic_frame() {
        let v = Potential::barrier();
        let z = [0.4, 1.0, 0.2];
        let dtau = 0.01;
        let dd = drift_diffusion_estimate(z, &v, &[0.7], dtau).unwrap();
        let dz = HarmonicFrameMap::local(&v, 0.7, dtau).apply(&Vector3::from(z)) - Vector3::from(z);
        assert_eq!(dd.a, dz / dtau);
        assert_eq!(dd.b, dz * dz.transpose() / dtau);
    }

    #[test]
    fn two_symmetric_samples() {
        let v = Potential::barrier();
        let z = Vector3::new(0.0, 1.0, 0.5);
        let dtau = 0.02;
        let dd = drift_diffusion_estimate([0.0, 1.0, 0.5], &v, &[-1.0, 1.0], dtau).unwrap();
        let d1 = HarmonicFrameMap::local(&v, -1.0, dtau).apply(&z) - z;
        let d2 = HarmonicFrameMap::local(&v, 1.0, dtau).apply(&z) - z;
        assert!((dd.a - (d1 + d2) / (2.0 * dtau)).norm() < 1e-14);
        let spread = (d1 - d2) * (d1 - d2).transpose() / (4.0 * dtau);
        let mean = (d1 + d2) * (d1 + d2).transpose() / (4.0 * dtau);
        assert!((dd.b - (spread + mean)).abs().max() < 1e-14);
        // opposite slopes: X increments differ, so b_XX exceeds the drift part
        assert!(spread[(0, 0)] > 0.0);
    }

    #[test]
    fn empty_samples_rejected() {
        assert!(matches!(
            drift_diffusion_estimate([0.0, 1.0, 0.0], &Potential::barrier(), &[], 0.1),
            Err(QdynError::EmptySamples)
        ));
    }

    #[test]
    fn harmonic_diffusion_vanishes_with_step() {
        let v = Potential::harmonic();
        let qs = [-3.0, 0.0, 1.0, 4.0];
        let b1 = drift_diffusion_estimate([0.0, 1.0, 0.3], &v, &qs, 1e-2).unwrap().b.abs().max();
        let b2 = drift_diffusion_estimate([0.0, 1.0, 0.3], &v, &qs, 1e-4).unwrap().b.abs().max();
        assert!(b2 < 1.1e-2 * b1, "{b1} {b2}");
    }

    #[test]
    fn zero_noise_is_drift_step() {
        let a = Vector3::new(1.0, -2.0, 0.5);
        let dd = DriftDiffusion::constant(a, Matrix3::zeros());
        let run = |seed| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            stochastic_step(&Vector3::zeros(), |_| Ok(dd), 0.1, &mut rng, &StochasticOptions::default()).unwrap().z
        };
        assert_eq!(run(1), a * 0.1);
        assert_eq!(run(1), run(2));
    }

    #[test]
    fn constant_diffusion_has_no_correction() {
        let dd = DriftDiffusion::constant(Vector3::zeros(), Matrix3::identity());
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let s = stochastic_step(&Vector3::zeros(), |_| Ok(dd), 0.1, &mut rng, &StochasticOptions::default()).unwrap();
        assert_eq!(s.coefficients.psi_drift, Vector3::zeros());
    }

    #[test]
    fn stratonovich_correction_for_linear_noise() {
        // dz = z∘dW in one component: ψ = a − ½g g' = 0 − z/2
        let field = |z: &Vector3<f64>| -> Result<DriftDiffusion> {
            let g = Matrix3::from_diagonal(&Vector3::new(z[0], 0.0, 0.0));
            Ok(DriftDiffusion::constant(Vector3::zeros(), g))
        };
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let opts = StochasticOptions { inner_pairs: 4000, repeats: 0 };
        let s = stochastic_step(&Vector3::new(2.0, 0.0, 0.0), field, 1e-4, &mut rng, &opts).unwrap();
        assert!((s.coefficients.psi_drift[0] + 1.0).abs() < 0.08, "{}", s.coefficients.psi_drift[0]);
    }
}
