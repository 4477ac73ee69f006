//! Radon transform between phase-space fields and tomograms.

use std::f64::consts::PI;

use qdyn_core::units::MASS;
use qdyn_core::{Execution, Grid1D, PhaseSpaceField, PhaseSpaceGrid, QdynError, Result};

/// Frame count below which [`inverse_radon`] flags the reconstruction.
pub const MIN_FRAMES: usize = 32;

const ROW_CHUNK: usize = 4;

/// `w̃(X) = ∫∫ W(q,p)·δ(X − μq − νp) dq dp` on `x`.
///
/// The line is parametrized by the axis along which it moves slowest in
/// grid units; `W` is interpolated linearly across the other axis and
/// taken as zero outside the grid.
pub fn radon_transform(field: &PhaseSpaceField, mu: f64, nu: f64, x: &Grid1D) -> Result<Vec<f64>> {
    if mu == 0.0 && nu == 0.0 || !(mu.is_finite() && nu.is_finite()) {
        return Err(QdynError::DegenerateFrame);
    }
    let g = field.grid;
    let (qg, pg) = (g.q, g.p);
    let np = pg.n();
    let along_q = (mu * qg.step()).abs() <= (nu * pg.step()).abs();
    let out = x
        .points()
        .into_iter()
        .map(|xv| {
            if along_q {
                // p = (X − μq)/ν
                let mut acc = 0.0;
                for i in 0..qg.n() {
                    let p = (xv - mu * qg.point(i)) / nu;
                    if let Some((j, f)) = pg.locate(p) {
                        let row = &field.values[i * np..(i + 1) * np];
                        let hi = if j + 1 < np { row[j + 1] } else { 0.0 };
                        acc += qg.trapezoid_weight(i) * ((1.0 - f) * row[j] + f * hi);
                    }
                }
                acc / nu.abs()
            } else {
                let mut acc = 0.0;
                for j in 0..np {
                    let q = (xv - nu * pg.point(j)) / mu;
                    if let Some((i, f)) = qg.locate(q) {
                        let lo = field.values[i * np + j];
                        let hi = if i + 1 < qg.n() { field.values[(i + 1) * np + j] } else { 0.0 };
                        acc += pg.trapezoid_weight(j) * ((1.0 - f) * lo + f * hi);
                    }
                }
                acc / mu.abs()
            }
        })
        .collect();
    Ok(out)
}

/// `(1/2m)∫X²·w̃(X, 0, 1) dX` for a momentum-frame tomogram sampled on `x`.
pub fn kinetic_energy_from_tomogram(x: &Grid1D, values: &[f64]) -> f64 {
    let m2: f64 = (0..x.n()).map(|i| x.trapezoid_weight(i) * x.point(i).powi(2) * values[i]).sum();
    0.5 * m2 / MASS
}

/// Tomograms in the frames `(cos θ_k, sin θ_k)`, `θ_k = kπ/K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    pub x: Grid1D,
    pub n_frames: usize,
    /// Frame-major samples.
    pub values: Vec<f64>,
}

impl Sinogram {
    pub fn angle(&self, k: usize) -> f64 {
        k as f64 * PI / self.n_frames as f64
    }

    pub fn frame(&self, k: usize) -> &[f64] {
        &self.values[k * self.x.n()..(k + 1) * self.x.n()]
    }

    pub fn from_field(field: &PhaseSpaceField, n_frames: usize, x: &Grid1D, exec: Execution) -> Result<Self> {
        if n_frames < 2 {
            return Err(QdynError::InvalidParameter { name: "n_frames", reason: format!("{n_frames} < 2") });
        }
        let frames = exec.map(n_frames, |k| {
            let th = k as f64 * PI / n_frames as f64;
            radon_transform(field, th.cos(), th.sin(), x)
        });
        let values = frames.into_iter().collect::<Result<Vec<_>>>()?.concat();
        Ok(Self { x: *x, n_frames, values })
    }

    /// Builds the sinogram from a closed-form tomogram `f(X, μ, ν)`.
    pub fn from_fn(n_frames: usize, x: &Grid1D, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(n_frames * x.n());
        for k in 0..n_frames {
            let th = k as f64 * PI / n_frames as f64;
            values.extend(x.points().into_iter().map(|xv| f(xv, th.cos(), th.sin())));
        }
        Self { x: *x, n_frames, values }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub field: PhaseSpaceField,
    /// Fewer than [`MIN_FRAMES`] frames: angular sampling is likely too
    /// coarse for the grid.
    pub undersampled: bool,
}

/// Ram–Lak kernel sampled at `nτ`.
fn ram_lak(n: i64, tau: f64) -> f64 {
    if n == 0 {
        0.25 / (tau * tau)
    } else if n % 2 == 0 {
        0.0
    } else {
        -1.0 / ((n * n) as f64 * PI * PI * tau * tau)
    }
}

/// Filtered back-projection onto `psg`.
pub fn inverse_radon(sino: &Sinogram, psg: &PhaseSpaceGrid, exec: Execution) -> Result<Reconstruction> {
    let nx = sino.x.n();
    if sino.n_frames < 2 || sino.values.len() != sino.n_frames * nx {
        return Err(QdynError::InvalidParameter {
            name: "sinogram",
            reason: format!("{} frames with {} samples on {nx} points", sino.n_frames, sino.values.len()),
        });
    }
    let tau = sino.x.step();
    let kernel: Vec<f64> = (-(nx as i64 - 1)..nx as i64).map(|n| ram_lak(n, tau)).collect();
    let filtered = exec.map(sino.n_frames, |k| {
        let r = sino.frame(k);
        (0..nx)
            .map(|i| {
                // τ·Σ_j h((i − j)τ)·R(x_j)
                let base = i + nx - 1;
                tau * r.iter().enumerate().map(|(j, v)| kernel[base - j] * v).sum::<f64>()
            })
            .collect::<Vec<f64>>()
    });
    let trig: Vec<(f64, f64)> = (0..sino.n_frames).map(|k| (sino.angle(k).cos(), sino.angle(k).sin())).collect();
    let np = psg.p.n();
    let scale = PI / sino.n_frames as f64;
    let rows = exec.map_chunks(psg.q.n(), ROW_CHUNK, |r| {
        let mut out = Vec::with_capacity(r.len() * np);
        for i in r {
            let q = psg.q.point(i);
            for j in 0..np {
                let p = psg.p.point(j);
                let mut acc = 0.0;
                for (k, &(c, s)) in trig.iter().enumerate() {
                    if let Some((l, f)) = sino.x.locate(q * c + p * s) {
                        let hi = if l + 1 < nx { filtered[k][l + 1] } else { 0.0 };
                        acc += (1.0 - f) * filtered[k][l] + f * hi;
                    }
                }
                out.push(scale * acc);
            }
        }
        out
    });
    Ok(Reconstruction {
        field: PhaseSpaceField { grid: *psg, values: rows.concat() },
        undersampled: sino.n_frames < MIN_FRAMES,
    })
}
