//! Transmission estimate from the energy ellipse of the background trap.

use qdyn_core::units::MASS;
use qdyn_core::GaussianPacket;
use statrs::distribution::{ContinuousCDF, Normal};

const THETA_NODES: usize = 4096;

/// Weight of the initial Wigner function outside the ellipse
/// `p²/2m + ½mω0²q² = V0`, the classical estimate of `N+` when the barrier
/// is treated as a hard energy threshold.
///
/// The packet factorizes into `ρ(q)·ρ(p)`, so the `p` integral is a normal
/// CDF difference; the `q` integral runs over `q = q_max·sin θ` with
/// composite Simpson, which removes the square-root endpoints.
pub fn ellipse_transmission_oracle(packet: &GaussianPacket, omega0: f64, v0: f64) -> f64 {
    if v0 <= 0.0 {
        return 1.0;
    }
    if !v0.is_finite() {
        return 0.0;
    }
    let q_max = (2.0 * v0 / (MASS * omega0 * omega0)).sqrt();
    let p_max = (2.0 * MASS * v0).sqrt();
    let rho_q = packet.coordinate_density();
    let mom = Normal::new(packet.p0, packet.sigma_p()).expect("positive momentum width");
    let integrand = |th: f64| {
        let c = th.cos();
        let pm = p_max * c;
        rho_q.density(q_max * th.sin()) * (mom.cdf(pm) - mom.cdf(-pm)) * q_max * c
    };
    let half = std::f64::consts::FRAC_PI_2;
    let h = 2.0 * half / THETA_NODES as f64;
    let mut acc = integrand(-half) + integrand(half);
    for k in 1..THETA_NODES {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * integrand(-half + k as f64 * h);
    }
    (1.0 - acc * h / 3.0).clamp(0.0, 1.0)
}
