//! Tomogram propagation along frame characteristics.
//!
//! Every trajectory pairs an auxiliary classical point, sampled from the
//! initial Wigner function, with the accumulated backward frame map `A`.
//! Step `n` expands the potential around the auxiliary position and appends
//! `Φ_n(−Δt)` on the right, so that `A·(X, μ_r, ν_r)` is the initial-time
//! frame feeding `(X, μ_r, ν_r)` at time `t`. Since the first column of `A`
//! is `e_X`, every trajectory contributes a Gaussian in `X`.

use nalgebra::{Matrix3, Vector3};
use qdyn_core::units::MASS;
use qdyn_core::{Execution, GaussianPacket, Grid1D, Potential, QdynError, Result};
use qdyn_wigner::{sample_initial, verlet, InitialWigner};
use statrs::function::erf::erf;

use crate::frame::HarmonicFrameMap;
use crate::radon::kinetic_energy_from_tomogram;

pub const DEFAULT_TRAJECTORIES: usize = 12_000;
pub const DEFAULT_WINDOW: f64 = 1e3;
pub const DEFAULT_DT: f64 = 0.01;

const STEP_CHUNK: usize = 256;
const DEPOSIT_CHUNK: usize = 512;
/// Gaussian tails beyond this many widths are not deposited.
const TAIL_WIDTHS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicsOptions {
    pub n_traj: usize,
    /// Upper bound on the step; output intervals are split evenly.
    pub dt: f64,
    pub seed: u64,
    /// Trajectories whose coordinate-frame center or width exceeds this are
    /// flagged diverged and excluded from then on.
    pub window: f64,
    pub exec: Execution,
}

impl Default for CharacteristicsOptions {
    fn default() -> Self {
        Self { n_traj: DEFAULT_TRAJECTORIES, dt: DEFAULT_DT, seed: 1, window: DEFAULT_WINDOW, exec: Execution::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomTrajectory {
    /// Initial-time frame `A·(0, 1, 0)` reached from the coordinate frame.
    pub z: [f64; 3],
    pub weight: f64,
    /// Width of the coordinate-frame Gaussian.
    pub width: f64,
    /// Auxiliary classical point `(q, p)`.
    pub aux: (f64, f64),
    pub diverged: bool,
    /// Accumulated backward frame map.
    pub map: Matrix3<f64>,
}

impl TomTrajectory {
    /// Center and width in the frame `(μ_r, ν_r)` at the current time.
    pub fn profile(&self, packet: &GaussianPacket, mu_r: f64, nu_r: f64) -> (f64, f64) {
        let z0 = self.map * Vector3::new(0.0, mu_r, nu_r);
        let (shift, mu, nu) = (z0[0], z0[1], z0[2]);
        let sp = packet.sigma_p();
        (mu * packet.q0 + nu * packet.p0 - shift, (mu * mu * packet.sigma * packet.sigma + nu * nu * sp * sp).sqrt())
    }

    fn step(&mut self, potential: &Potential, packet: &GaussianPacket, dt: f64, window: f64) {
        if self.diverged {
            return;
        }
        let (q, p) = self.aux;
        self.map *= HarmonicFrameMap::local(potential, q, -dt).matrix();
        self.aux = verlet(potential, q, p, dt, 1);
        let (center, width) = self.profile(packet, 1.0, 0.0);
        let col = self.map.column(1);
        self.z = [col[0], col[1], col[2]];
        self.width = width;
        if !(center.abs() <= window && width <= window) {
            self.diverged = true;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomogramSnapshot {
    pub t: f64,
    /// `w̃(X, 1, 0)` on `x`.
    pub x: Grid1D,
    pub coordinate: Vec<f64>,
    /// `w̃(X, 0, 1)` on `p`.
    pub p: Grid1D,
    pub momentum: Vec<f64>,
    pub diverged: usize,
    pub diverged_fraction: f64,
    /// Weight of the trajectories still included.
    pub retained_weight: f64,
    /// `(1/2m)∫X²·w̃(X, 0, 1) dX` of the Gaussian mixture itself.
    pub kinetic_energy: f64,
}

impl TomogramSnapshot {
    /// Kinetic energy from the gridded momentum tomogram; carries the
    /// `Δp²/24` variance of the cell averages.
    pub fn gridded_kinetic_energy(&self) -> f64 {
        kinetic_energy_from_tomogram(&self.p, &self.momentum)
    }
}

/// Cell averages of `weight·N(center, width²)` added to `out`.
pub(crate) fn deposit_gaussian(grid: &Grid1D, center: f64, width: f64, weight: f64, out: &mut [f64]) {
    let h = grid.step();
    let reach = TAIL_WIDTHS * width + h;
    let lo = ((center - reach - grid.min()) / h).floor().max(0.0);
    let hi = ((center + reach - grid.min()) / h).ceil().min((grid.n() - 1) as f64);
    if lo > hi {
        return;
    }
    let s = std::f64::consts::SQRT_2 * width;
    let cdf = |x: f64| 0.5 * erf((x - center) / s);
    let (lo, hi) = (lo as usize, hi as usize);
    let mut left = cdf(grid.point(lo) - 0.5 * h);
    for (i, o) in out.iter_mut().enumerate().take(hi + 1).skip(lo) {
        let right = cdf(grid.point(i) + 0.5 * h);
        *o += weight * (right - left) / h;
        left = right;
    }
}

fn validate(opts: &CharacteristicsOptions) -> Result<()> {
    if opts.n_traj == 0 {
        return Err(QdynError::EmptySamples);
    }
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(QdynError::InvalidParameter { name: "dt", reason: format!("{} must be positive", opts.dt) });
    }
    if !(opts.window > 0.0) {
        return Err(QdynError::InvalidParameter { name: "window", reason: format!("{} must be positive", opts.window) });
    }
    Ok(())
}

/// Evenly split steps `(count, size)` covering `span` with size `≤ dt`.
pub(crate) fn split(span: f64, dt: f64) -> (usize, f64) {
    if span <= 0.0 {
        return (0, 0.0);
    }
    let n = (span / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (n, span / n as f64)
}

/// Coordinate and momentum tomograms at `times`.
pub fn tomographic_evolve_characteristics(
    packet: &GaussianPacket,
    potential: &Potential,
    x: &Grid1D,
    p: &Grid1D,
    opts: &CharacteristicsOptions,
    times: &[f64],
) -> Result<Vec<TomogramSnapshot>> {
    validate(opts)?;
    let exec = opts.exec;
    let aux = sample_initial(InitialWigner::Gaussian(packet), opts.n_traj, opts.seed, exec)?;
    let mut trajs: Vec<TomTrajectory> = (0..aux.len())
        .map(|i| TomTrajectory {
            z: [0.0, 1.0, 0.0],
            weight: aux.weight[i],
            width: packet.sigma,
            aux: (aux.q[i], aux.p[i]),
            diverged: false,
            map: Matrix3::identity(),
        })
        .collect();

    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if !(t >= now) {
            return Err(QdynError::InvalidParameter { name: "times", reason: "must be ascending and non-negative".into() });
        }
        let (steps, h) = split(t - now, opts.dt);
        if steps > 0 {
            exec.for_each_chunk_mut(&mut trajs, STEP_CHUNK, |_, chunk| {
                for tr in chunk {
                    for _ in 0..steps {
                        tr.step(potential, packet, h, opts.window);
                    }
                }
            });
        }
        now = t;
        out.push(snapshot(&trajs, packet, x, p, t, exec)?);
    }
    Ok(out)
}

fn snapshot(trajs: &[TomTrajectory], packet: &GaussianPacket, x: &Grid1D, p: &Grid1D, t: f64, exec: Execution) -> Result<TomogramSnapshot> {
    let (nx, np) = (x.n(), p.n());
    let buf = exec.accumulate(trajs.len(), DEPOSIT_CHUNK, nx + np + 3, |r, buf| {
        for tr in &trajs[r] {
            if tr.diverged {
                buf[nx + np + 1] += 1.0;
                continue;
            }
            let (cx, wx) = tr.profile(packet, 1.0, 0.0);
            deposit_gaussian(x, cx, wx, tr.weight, &mut buf[..nx]);
            let (cp, wp) = tr.profile(packet, 0.0, 1.0);
            deposit_gaussian(p, cp, wp, tr.weight, &mut buf[nx..nx + np]);
            buf[nx + np] += tr.weight;
            buf[nx + np + 2] += tr.weight * (cp * cp + wp * wp);
        }
    });
    if !buf.iter().all(|v| v.is_finite()) {
        return Err(QdynError::NonFinite(format!("tomogram at t = {t}")));
    }
    let diverged = buf[nx + np + 1] as usize;
    Ok(TomogramSnapshot {
        t,
        x: *x,
        coordinate: buf[..nx].to_vec(),
        p: *p,
        momentum: buf[nx..nx + np].to_vec(),
        diverged,
        diverged_fraction: diverged as f64 / trajs.len() as f64,
        retained_weight: buf[nx + np],
        kinetic_energy: 0.5 * buf[nx + np + 2] / MASS,
    })
}
