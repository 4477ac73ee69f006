//! Trajectory ensembles: sampling, symplectic transport and cloud-in-cell
//! deposition.

use qdyn_core::units::MASS;
use qdyn_core::{Execution, GaussianPacket, PhaseSpaceField, PhaseSpaceGrid, Potential, QdynError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

/// Particles per random stream. Stream `c` draws particles
/// `c·SAMPLE_CHUNK .. (c+1)·SAMPLE_CHUNK`, independent of thread count.
pub const SAMPLE_CHUNK: usize = 8192;

const TRANSPORT_CHUNK: usize = 4096;
const DEPOSIT_CHUNK: usize = 16_384;

/// Source distribution for [`sample_initial`].
#[derive(Debug, Clone, Copy)]
pub enum InitialWigner<'a> {
    /// Analytic Gaussian; sampled exactly.
    Gaussian(&'a GaussianPacket),
    /// Tabulated non-negative field; sampled by inverse transform per axis.
    Field(&'a PhaseSpaceField),
}

/// Structure-of-arrays particle store.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub weight: Vec<f64>,
    pub seed: u64,
}

impl TrajectoryEnsemble {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Compensated sum of the weights.
    pub fn total_weight(&self) -> f64 {
        let (mut sum, mut carry) = (0.0f64, 0.0f64);
        for &w in &self.weight {
            let t = sum + w;
            carry += if sum.abs() >= w.abs() { (sum - t) + w } else { (w - t) + sum };
            sum = t;
        }
        sum + carry
    }

    /// Weighted means `(⟨q⟩, ⟨p⟩)`.
    pub fn mean(&self) -> (f64, f64) {
        let w = self.total_weight();
        let mq = self.q.iter().zip(&self.weight).map(|(q, w)| q * w).sum::<f64>() / w;
        let mp = self.p.iter().zip(&self.weight).map(|(p, w)| p * w).sum::<f64>() / w;
        (mq, mp)
    }

    /// Weighted covariance `[[qq, qp], [qp, pp]]`.
    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let (mq, mp) = self.mean();
        let w = self.total_weight();
        let (mut cqq, mut cqp, mut cpp) = (0.0, 0.0, 0.0);
        for i in 0..self.len() {
            let (dq, dp) = (self.q[i] - mq, self.p[i] - mp);
            cqq += self.weight[i] * dq * dq;
            cqp += self.weight[i] * dq * dp;
            cpp += self.weight[i] * dp * dp;
        }
        [[cqq / w, cqp / w], [cqp / w, cpp / w]]
    }
}

fn stream(seed: u64, chunk: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Draws `n` equally weighted particles from the initial Wigner function.
pub fn sample_initial(source: InitialWigner<'_>, n: usize, seed: u64, exec: Execution) -> Result<TrajectoryEnsemble> {
    if n == 0 {
        return Err(QdynError::EmptySamples);
    }
    let chunks: Vec<Vec<(f64, f64)>> = match source {
        InitialWigner::Gaussian(packet) => {
            let nq = Normal::new(packet.q0, packet.sigma).map_err(|e| param_err("sigma", e))?;
            let np = Normal::new(packet.p0, packet.sigma_p()).map_err(|e| param_err("sigma", e))?;
            exec.map_chunks(n, SAMPLE_CHUNK, |r| {
                let mut rng = stream(seed, r.start / SAMPLE_CHUNK);
                r.map(|_| {
                    let q = nq.sample(&mut rng);
                    (q, np.sample(&mut rng))
                })
                .collect()
            })
        }
        InitialWigner::Field(field) => {
            let sampler = FieldSampler::new(field)?;
            exec.map_chunks(n, SAMPLE_CHUNK, |r| {
                let mut rng = stream(seed, r.start / SAMPLE_CHUNK);
                r.map(|_| sampler.draw(&mut rng)).collect()
            })
        }
    };
    let mut q = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    for (a, b) in chunks.into_iter().flatten() {
        q.push(a);
        p.push(b);
    }
    Ok(TrajectoryEnsemble { q, p, weight: vec![1.0 / n as f64; n], seed })
}

fn param_err(name: &'static str, e: impl std::fmt::Display) -> QdynError {
    QdynError::InvalidParameter { name, reason: e.to_string() }
}

/// Marginal CDF over q nodes and conditional CDFs over p nodes.
struct FieldSampler {
    grid: PhaseSpaceGrid,
    q_cdf: Vec<f64>,
    p_cdf: Vec<f64>,
}

impl FieldSampler {
    fn new(field: &PhaseSpaceField) -> Result<Self> {
        let min = field.min();
        if min < 0.0 {
            return Err(QdynError::NegativeDensity { value: min });
        }
        let (nq, np) = (field.grid.q.n(), field.grid.p.n());
        let mut q_cdf = Vec::with_capacity(nq);
        let mut p_cdf = Vec::with_capacity(nq * np);
        let mut total = 0.0;
        for iq in 0..nq {
            let mut row = 0.0;
            for &v in field.row(iq) {
                row += v;
                p_cdf.push(row);
            }
            total += row;
            q_cdf.push(total);
        }
        if !(total > 0.0) {
            return Err(QdynError::EmptySamples);
        }
        Ok(Self { grid: field.grid, q_cdf, p_cdf })
    }

    fn draw(&self, rng: &mut impl Rng) -> (f64, f64) {
        let np = self.grid.p.n();
        let pick = |cdf: &[f64], u: f64| {
            let target = u * cdf[cdf.len() - 1];
            cdf.partition_point(|&c| c <= target).min(cdf.len() - 1)
        };
        let iq = pick(&self.q_cdf, rng.random::<f64>());
        let ip = pick(&self.p_cdf[iq * np..(iq + 1) * np], rng.random::<f64>());
        let jitter = |g: &qdyn_core::Grid1D, i: usize, u: f64| {
            (g.point(i) + (u - 0.5) * g.step()).clamp(g.min(), g.max())
        };
        (jitter(&self.grid.q, iq, rng.random()), jitter(&self.grid.p, ip, rng.random()))
    }
}

/// Advances `(q, p)` by `steps` velocity-Verlet steps of size `dt`.
#[inline]
pub fn verlet(potential: &Potential, mut q: f64, mut p: f64, dt: f64, steps: usize) -> (f64, f64) {
    let mut f = potential.force(q);
    for _ in 0..steps {
        p += 0.5 * dt * f;
        q += dt * p / MASS;
        f = potential.force(q);
        p += 0.5 * dt * f;
    }
    (q, p)
}

/// One velocity-Verlet step for every particle; weights are unchanged.
pub fn classical_step(ens: &mut TrajectoryEnsemble, potential: &Potential, dt: f64, exec: Execution) -> Result<()> {
    advance(ens, potential, dt, 1, exec)
}

/// `steps` Verlet steps per particle, each particle integrated independently.
pub fn advance(
    ens: &mut TrajectoryEnsemble,
    potential: &Potential,
    dt: f64,
    steps: usize,
    exec: Execution,
) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(param_err("dt", format!("{dt} must be positive")));
    }
    let mut state: Vec<(f64, f64)> = ens.q.iter().copied().zip(ens.p.iter().copied()).collect();
    exec.for_each_chunk_mut(&mut state, TRANSPORT_CHUNK, |_, chunk| {
        for s in chunk.iter_mut() {
            *s = verlet(potential, s.0, s.1, dt, steps);
        }
    });
    for (i, (q, p)) in state.into_iter().enumerate() {
        ens.q[i] = q;
        ens.p[i] = p;
    }
    Ok(())
}

/// Bilinear footprint of a point on a phase-space grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    /// Row-major index of the lower-left node.
    pub base: usize,
    pub fq: f64,
    pub fp: f64,
}

impl Stencil {
    #[inline]
    pub fn locate(psg: &PhaseSpaceGrid, q: f64, p: f64) -> Option<Self> {
        let (iq, fq) = psg.q.locate(q)?;
        let (ip, fp) = psg.p.locate(p)?;
        Some(Self { base: psg.index(iq, ip), fq, fp })
    }

    #[inline]
    pub fn scatter(&self, np: usize, w: f64, buf: &mut [f64]) {
        let (fq, fp) = (self.fq, self.fp);
        buf[self.base] += w * (1.0 - fq) * (1.0 - fp);
        buf[self.base + 1] += w * (1.0 - fq) * fp;
        buf[self.base + np] += w * fq * (1.0 - fp);
        buf[self.base + np + 1] += w * fq * fp;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DepositStats {
    pub deposited: f64,
    pub dropped_weight: f64,
    pub dropped_count: usize,
}

/// Cloud-in-cell deposition; particles outside the grid are dropped and
/// counted.
pub fn deposit_cic(ens: &TrajectoryEnsemble, psg: &PhaseSpaceGrid, exec: Execution) -> (PhaseSpaceField, DepositStats) {
    let width = psg.len();
    let np = psg.p.n();
    // the trailing three slots carry the statistics through the ordered merge
    let mut buf = exec.accumulate(ens.len(), DEPOSIT_CHUNK, width + 3, |r, buf| {
        for i in r {
            let w = ens.weight[i];
            match Stencil::locate(psg, ens.q[i], ens.p[i]) {
                Some(st) => {
                    st.scatter(np, w, buf);
                    buf[width] += w;
                }
                None => {
                    buf[width + 1] += w;
                    buf[width + 2] += 1.0;
                }
            }
        }
    });
    let stats = DepositStats { deposited: buf[width], dropped_weight: buf[width + 1], dropped_count: buf[width + 2] as usize };
    buf.truncate(width);
    let area = psg.cell_area();
    buf.iter_mut().for_each(|v| *v /= area);
    (PhaseSpaceField { grid: *psg, values: buf }, stats)
}
