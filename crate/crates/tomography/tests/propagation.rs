use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use qdyn_core::{Execution, GaussianPacket, Grid1D, Potential};
use qdyn_tomography::{
    cholesky_psd, drift_diffusion_estimate, stochastic_step, tomographic_evolve_characteristics,
    tomographic_evolve_stochastic, CharacteristicsOptions, DriftDiffusion, StochasticEvolveOptions, StochasticOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn gaussian(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

fn grids() -> (Grid1D, Grid1D) {
    (Grid1D::centered(800, 0.05).unwrap(), Grid1D::centered(400, 0.025).unwrap())
}

/// Exact `(⟨q⟩, var q, ⟨p⟩, var p)` in a harmonic trap centered at 0.
fn harmonic_moments(packet: &GaussianPacket, omega: f64, t: f64) -> (f64, f64, f64, f64) {
    let (c, s) = ((omega * t).cos(), (omega * t).sin());
    let (sq, sp) = (packet.sigma, packet.sigma_p());
    (
        packet.q0 * c + packet.p0 * s / omega,
        sq * sq * c * c + sp * sp * s * s / (omega * omega),
        packet.p0 * c - omega * packet.q0 * s,
        sp * sp * c * c + omega * omega * sq * sq * s * s,
    )
}

#[test]
fn harmonic_characteristics_are_exact() {
    let packet = GaussianPacket::default();
    let omega = 0.1;
    let (x, p) = grids();
    let period = 2.0 * PI / omega;
    let times: Vec<f64> = (0..=8).map(|k| k as f64 * period / 8.0).collect();
    let snaps = tomographic_evolve_characteristics(&packet, &Potential::harmonic(), &x, &p, &CharacteristicsOptions::default(), &times)
        .unwrap();
    for s in &snaps {
        let (mq, vq, mp, vp) = harmonic_moments(&packet, omega, s.t);
        let l1: f64 = (0..x.n()).map(|i| (s.coordinate[i] - gaussian(x.point(i), mq, vq)).abs() * x.step()).sum();
        assert!(l1 < 0.05, "t = {}: {l1}", s.t);
        assert_eq!(s.diverged, 0);
        let ke = 0.5 * (mp * mp + vp);
        assert!((s.kinetic_energy - ke).abs() < 1e-6, "t = {}: {} vs {ke}", s.t, s.kinetic_energy);
    }
}

#[test]
fn harmonic_kinetic_energy_has_doubled_frequency() {
    let packet = GaussianPacket::default();
    let (x, p) = grids();
    let half = PI / 0.1;
    let opts = CharacteristicsOptions { n_traj: 200, dt: 0.05, ..Default::default() };
    let s = tomographic_evolve_characteristics(&packet, &Potential::harmonic(), &x, &p, &opts, &[0.3, 0.3 + half]).unwrap();
    assert!((s[0].kinetic_energy - s[1].kinetic_energy).abs() < 1e-8);
}

#[test]
fn free_kinetic_energy_is_constant() {
    let packet = GaussianPacket::new(0.0, 1.0, 1.0).unwrap();
    let (x, p) = grids();
    let opts = CharacteristicsOptions { n_traj: 500, dt: 0.05, ..Default::default() };
    let s = tomographic_evolve_characteristics(&packet, &Potential::Free, &x, &p, &opts, &[0.0, 2.0, 5.0]).unwrap();
    for snap in &s {
        assert!((snap.kinetic_energy - packet.kinetic_energy()).abs() < 1e-8);
    }
}

#[test]
fn weights_are_positive_and_accounted() {
    let packet = GaussianPacket::default();
    let (x, p) = grids();
    let opts = CharacteristicsOptions { n_traj: 3000, dt: 0.02, ..Default::default() };
    let snaps = tomographic_evolve_characteristics(&packet, &Potential::barrier(), &x, &p, &opts, &[2.0, 6.0, 10.0]).unwrap();
    for s in &snaps {
        assert!(s.coordinate.iter().chain(&s.momentum).all(|&v| v >= 0.0));
        let lost = s.diverged as f64 / opts.n_traj as f64;
        assert!((s.retained_weight + lost - 1.0).abs() < 1e-12);
    }
}

#[test]
fn barrier_reproduces_known_failure_modes() {
    // ⟨q⟩ of the reflected part at t = 8 from the exact propagation is −2.98
    let packet = GaussianPacket::default();
    let x = Grid1D::centered(1600, 0.05).unwrap();
    let p = Grid1D::centered(400, 0.025).unwrap();
    let opts = CharacteristicsOptions { n_traj: 4000, ..Default::default() };
    let s = tomographic_evolve_characteristics(&packet, &Potential::barrier(), &x, &p, &opts, &[8.0]).unwrap().remove(0);
    assert!(s.diverged > 0);
    let (mut n, mut m) = (0.0, 0.0);
    for i in 0..x.n() {
        if x.point(i) < 0.0 {
            n += s.coordinate[i] * x.step();
            m += s.coordinate[i] * x.point(i) * x.step();
        }
    }
    assert!(m / n < -2.98 - 1.0, "{}", m / n);
}

#[test]
fn characteristics_are_deterministic() {
    let packet = GaussianPacket::default();
    let (x, p) = grids();
    let run = |exec| {
        let opts = CharacteristicsOptions { n_traj: 1500, dt: 0.05, seed: 4, exec, ..Default::default() };
        tomographic_evolve_characteristics(&packet, &Potential::barrier(), &x, &p, &opts, &[3.0, 6.0]).unwrap()
    };
    let a = run(Execution::Parallel);
    assert_eq!(a, run(Execution::Parallel));
    assert_eq!(a, run(Execution::Sequential));
}

#[test]
fn cholesky_on_random_psd_matrices() {
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    for _ in 0..1000 {
        let m = Matrix3::from_fn(|_, _| rng.random::<f64>() * 2.0 - 1.0);
        let b = m * m.transpose();
        let f = cholesky_psd(&b).unwrap();
        let err = (f.g * f.g.transpose() - b).norm();
        assert!(err <= f.epsilon * 3f64.sqrt() + 1e-12, "{err} {}", f.epsilon);
        assert_eq!(f.g[(0, 1)], 0.0);
        assert_eq!(f.g[(0, 2)], 0.0);
        assert_eq!(f.g[(1, 2)], 0.0);
    }
}

#[test]
fn unit_diffusion_moments() {
    let dtau = 0.01;
    let n = 100_000;
    let dd = DriftDiffusion::constant(Vector3::zeros(), Matrix3::identity());
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let opts = StochasticOptions::default();
    let mut sum = Vector3::zeros();
    let mut sq = Matrix3::zeros();
    for _ in 0..n {
        let dz = stochastic_step(&Vector3::zeros(), |_| Ok(dd), dtau, &mut rng, &opts).unwrap().z;
        sum += dz;
        sq += dz * dz.transpose();
    }
    let nf = n as f64;
    let mean = sum / nf;
    let cov = sq / nf - mean * mean.transpose();
    let se_mean = (dtau / nf).sqrt();
    let se_var = dtau * (2.0 / nf).sqrt();
    let se_cov = dtau / nf.sqrt();
    for i in 0..3 {
        assert!(mean[i].abs() < 3.0 * se_mean, "mean {i}: {}", mean[i]);
        for j in 0..3 {
            let (target, se) = if i == j { (dtau, se_var) } else { (0.0, se_cov) };
            assert!((cov[(i, j)] - target).abs() < 3.0 * se, "cov {i}{j}: {}", cov[(i, j)]);
        }
    }
}

#[test]
fn harmonic_diffusion_collapses() {
    let v = Potential::harmonic();
    let qs: Vec<f64> = (0..50).map(|i| -8.0 + 0.3 * i as f64).collect();
    let spread = |dtau: f64| {
        let steps = (1.0 / dtau).round() as usize;
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let opts = StochasticOptions { inner_pairs: 2, repeats: 1 };
        let ends: Vec<Vector3<f64>> = (0..200)
            .map(|_| {
                let mut z = Vector3::new(0.0, 1.0, 0.0);
                for _ in 0..steps {
                    let field = |zz: &Vector3<f64>| drift_diffusion_estimate([zz[0], zz[1], zz[2]], &v, &qs, dtau);
                    z = stochastic_step(&z, field, dtau, &mut rng, &opts).unwrap().z;
                }
                z
            })
            .collect();
        let mean = ends.iter().sum::<Vector3<f64>>() / ends.len() as f64;
        (ends.iter().map(|e| (e - mean).norm_squared()).sum::<f64>() / ends.len() as f64).sqrt()
    };
    let (coarse, fine) = (spread(0.1), spread(0.01));
    // b = O(Δτ) for a unique frame, so the endpoint spread falls like √Δτ
    let ratio = fine / coarse;
    assert!((0.2..0.45).contains(&ratio), "{coarse} {fine}");
}

#[test]
fn stochastic_mode_on_harmonic_trap() {
    let packet = GaussianPacket::default();
    let (x, p) = grids();
    let omega = 0.1;
    let opts = StochasticEvolveOptions {
        n_traj: 100,
        n_aux: 32,
        dt: 0.05,
        step: StochasticOptions { inner_pairs: 2, repeats: 1 },
        ..Default::default()
    };
    let s = tomographic_evolve_stochastic(&packet, &Potential::harmonic(), &x, &p, &opts, &[5.0]).unwrap().remove(0);
    let (mq, vq, _, _) = harmonic_moments(&packet, omega, 5.0);
    let l1: f64 = (0..x.n()).map(|i| (s.coordinate[i] - gaussian(x.point(i), mq, vq)).abs() * x.step()).sum();
    assert!(l1 < 0.05, "{l1}");
}

#[test]
fn stochastic_mode_is_deterministic() {
    let packet = GaussianPacket::default();
    let (x, p) = grids();
    let run = |exec| {
        let opts = StochasticEvolveOptions {
            n_traj: 40,
            n_aux: 16,
            dt: 0.1,
            seed: 8,
            step: StochasticOptions { inner_pairs: 2, repeats: 1 },
            exec,
            ..Default::default()
        };
        tomographic_evolve_stochastic(&packet, &Potential::barrier(), &x, &p, &opts, &[1.0, 2.0]).unwrap()
    };
    let a = run(Execution::Parallel);
    assert_eq!(a, run(Execution::Sequential));
}
