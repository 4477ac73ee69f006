//! Frame propagation as a stochastic process over the auxiliary ensemble.
//!
//! Instead of one deterministic backward map per auxiliary trajectory, each
//! stochastic trajectory carries a single frame `z` backward from the output
//! time. At every step the drift and diffusion are the increment moments of
//! `Φ_q(−Δt)` over all auxiliary positions `q` at that time.

use nalgebra::Vector3;
use qdyn_core::units::MASS;
use qdyn_core::{Execution, GaussianPacket, Grid1D, Potential, QdynError, Result};
use qdyn_wigner::{sample_initial, verlet, InitialWigner};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::characteristics::{deposit_gaussian, TomogramSnapshot, DEFAULT_WINDOW};
use crate::sde::{increment_moments, stochastic_step, StochasticOptions};

/// Offset separating the frame noise streams from the auxiliary sampling.
const NOISE_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;
const TRAJ_CHUNK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticEvolveOptions {
    pub n_traj: usize,
    pub n_aux: usize,
    /// Fixed step; output times must be multiples of it.
    pub dt: f64,
    pub seed: u64,
    pub window: f64,
    pub step: StochasticOptions,
    pub exec: Execution,
}

impl Default for StochasticEvolveOptions {
    fn default() -> Self {
        Self {
            n_traj: 400,
            n_aux: 256,
            dt: 0.02,
            seed: 1,
            window: DEFAULT_WINDOW,
            step: StochasticOptions::default(),
            exec: Execution::default(),
        }
    }
}

fn step_counts(times: &[f64], dt: f64) -> Result<Vec<usize>> {
    let mut last = 0;
    times
        .iter()
        .map(|&t| {
            let n = (t / dt).round();
            if !(t >= 0.0) || (n * dt - t).abs() > 1e-9 * t.max(1.0) || (n as usize) < last {
                return Err(QdynError::InvalidParameter {
                    name: "times",
                    reason: format!("{t} is not an ascending non-negative multiple of dt = {dt}"),
                });
            }
            last = n as usize;
            Ok(last)
        })
        .collect()
}

/// Final frame of one stochastic trajectory started from `start` at step
/// `steps` and run back to time zero, or `None` if it left the window.
#[allow(clippy::too_many_arguments)]
fn backward_frame(
    start: Vector3<f64>,
    steps: usize,
    history: &[Vec<f64>],
    potential: &Potential,
    packet: &GaussianPacket,
    opts: &StochasticEvolveOptions,
    stream: u64,
) -> Result<Option<(f64, f64)>> {
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed.wrapping_add(NOISE_SEED_OFFSET));
    rng.set_stream(stream);
    let dt = opts.dt;
    let mut z = start;
    for n in (0..steps).rev() {
        let qs = &history[n];
        let field = |zz: &Vector3<f64>| increment_moments(zz, potential, qs, -dt, dt);
        z = stochastic_step(&z, field, dt, &mut rng, &opts.step)?.z;
        if !(z.iter().all(|v| v.abs() <= opts.window)) {
            return Ok(None);
        }
    }
    let sp = packet.sigma_p();
    let center = z[1] * packet.q0 + z[2] * packet.p0 - z[0];
    let width = (z[1] * z[1] * packet.sigma * packet.sigma + z[2] * z[2] * sp * sp).sqrt();
    Ok((center.abs() <= opts.window && width <= opts.window).then_some((center, width)))
}

/// Coordinate and momentum tomograms at `times` from the stochastic scheme.
pub fn tomographic_evolve_stochastic(
    packet: &GaussianPacket,
    potential: &Potential,
    x: &Grid1D,
    p: &Grid1D,
    opts: &StochasticEvolveOptions,
    times: &[f64],
) -> Result<Vec<TomogramSnapshot>> {
    if opts.n_traj == 0 || opts.n_aux == 0 {
        return Err(QdynError::EmptySamples);
    }
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(QdynError::InvalidParameter { name: "dt", reason: format!("{} must be positive", opts.dt) });
    }
    let counts = step_counts(times, opts.dt)?;
    let total = counts.last().copied().unwrap_or(0);
    let exec = opts.exec;

    let aux = sample_initial(InitialWigner::Gaussian(packet), opts.n_aux, opts.seed, exec)?;
    let (mut q, mut pm) = (aux.q, aux.p);
    let mut history = Vec::with_capacity(total);
    for _ in 0..total {
        history.push(q.clone());
        for i in 0..q.len() {
            (q[i], pm[i]) = verlet(potential, q[i], pm[i], opts.dt, 1);
        }
    }

    let weight = 1.0 / opts.n_traj as f64;
    let (nx, np) = (x.n(), p.n());
    let mut out = Vec::with_capacity(times.len());
    for (o, (&t, &steps)) in times.iter().zip(&counts).enumerate() {
        let frames = exec.map_chunks(opts.n_traj, TRAJ_CHUNK, |r| {
            r.map(|j| {
                let stream = ((o as u64) << 33) | ((j as u64) << 1);
                let coord = backward_frame(Vector3::new(0.0, 1.0, 0.0), steps, &history, potential, packet, opts, stream)?;
                let mom = backward_frame(Vector3::new(0.0, 0.0, 1.0), steps, &history, potential, packet, opts, stream | 1)?;
                Ok((coord, mom))
            })
            .collect::<Result<Vec<_>>>()
        });
        let mut coordinate = vec![0.0; nx];
        let mut momentum = vec![0.0; np];
        let (mut diverged, mut retained, mut p2) = (0usize, 0.0, 0.0);
        for chunk in frames {
            for (coord, mom) in chunk? {
                match coord {
                    Some((c, w)) => {
                        deposit_gaussian(x, c, w, weight, &mut coordinate);
                        retained += weight;
                    }
                    None => diverged += 1,
                }
                if let Some((c, w)) = mom {
                    deposit_gaussian(p, c, w, weight, &mut momentum);
                    p2 += weight * (c * c + w * w);
                }
            }
        }
        out.push(TomogramSnapshot {
            t,
            x: *x,
            coordinate,
            p: *p,
            momentum,
            diverged,
            diverged_fraction: diverged as f64 / opts.n_traj as f64,
            retained_weight: retained,
            kinetic_energy: 0.5 * p2 / MASS,
        });
    }
    Ok(out)
}
