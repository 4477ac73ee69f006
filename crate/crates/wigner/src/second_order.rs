//! Deterministic grid scheme for the second iteration of the Wigner–Moyal
//! integral equation.
//!
//! Every step the node weights are transported classically over `Δt`
//! (first-order term). In addition they are transported to the interval
//! midpoint, convolved in momentum with the jump kernel, weighted by `Δt`
//! and transported over the remaining half step. Both contributions are
//! redeposited with cloud-in-cell weights.

use qdyn_core::{Execution, PhaseSpaceField, PhaseSpaceGrid, Potential, QdynError, Result};

use crate::ensemble::{verlet, Stencil};
use crate::kernel::JumpKernel;

pub const DEFAULT_DT: f64 = 0.04;
pub const DEFAULT_BLOWUP_FACTOR: f64 = 10.0;

const NODE_CHUNK: usize = 4096;
const ROW_CHUNK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderOptions {
    pub dt: f64,
    /// Scale applied to the jump kernel; 0 reproduces pure transport.
    pub lambda: f64,
    /// Abort once `Σ|w|` exceeds this multiple of its initial value.
    pub blowup_factor: f64,
    pub exec: Execution,
}

impl Default for SecondOrderOptions {
    fn default() -> Self {
        Self { dt: DEFAULT_DT, lambda: 1.0, blowup_factor: DEFAULT_BLOWUP_FACTOR, exec: Execution::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSnapshot {
    pub t: f64,
    pub field: PhaseSpaceField,
    /// Weight transported off the grid since the start.
    pub lost_weight: f64,
}

/// Precomputed classical maps of all grid nodes.
struct TransportMap {
    stencils: Vec<Option<Stencil>>,
}

impl TransportMap {
    fn new(potential: &Potential, psg: &PhaseSpaceGrid, dt: f64, exec: Execution) -> Self {
        let np = psg.p.n();
        let stencils = exec.map(psg.len(), |idx| {
            let (q, p) = verlet(potential, psg.q.point(idx / np), psg.p.point(idx % np), dt, 1);
            Stencil::locate(psg, q, p)
        });
        Self { stencils }
    }

    /// Deposits node weights `w` (already multiplied by the cell area) and
    /// returns the density together with the weight that left the grid.
    fn push(&self, psg: &PhaseSpaceGrid, w: &[f64], exec: Execution) -> (Vec<f64>, f64) {
        let width = psg.len();
        let np = psg.p.n();
        let mut buf = exec.accumulate(w.len(), NODE_CHUNK, width + 1, |r, buf| {
            for i in r {
                if w[i] == 0.0 {
                    continue;
                }
                match &self.stencils[i] {
                    Some(st) => st.scatter(np, w[i], buf),
                    None => buf[width] += w[i],
                }
            }
        });
        let lost = buf[width];
        buf.truncate(width);
        let area = psg.cell_area();
        buf.iter_mut().for_each(|v| *v /= area);
        (buf, lost)
    }
}

/// Momentum convolution `J_k(p_j) = Σ_l W(q_k, p_l)·K_k[j − l]`.
fn jump_rate(field: &[f64], kernel: &JumpKernel, exec: Execution) -> Vec<f64> {
    let (nq, np) = (kernel.grid.q.n(), kernel.grid.p.n());
    let rows = exec.map_chunks(nq, ROW_CHUNK, |r| {
        let mut out = vec![0.0; r.len() * np];
        for (o, k) in r.enumerate() {
            let row = &field[k * np..(k + 1) * np];
            let offsets = kernel.offsets(k);
            let dst = &mut out[o * np..(o + 1) * np];
            for (l, &w) in row.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                // offsets[j − l + np − 1] for j = 0..np
                let src = &offsets[np - 1 - l..2 * np - 1 - l];
                for (d, &k) in dst.iter_mut().zip(src) {
                    *d += w * k;
                }
            }
        }
        out
    });
    rows.concat()
}

/// Propagates `initial` and returns snapshots at `times` (multiples of `dt`).
///
/// With `kernel = None` or `lambda = 0` this is the grid version of the
/// first-order (purely classical) transport.
pub fn wigner_second_order(
    initial: &PhaseSpaceField,
    potential: &Potential,
    kernel: Option<&JumpKernel>,
    opts: &SecondOrderOptions,
    times: &[f64],
) -> Result<Vec<GridSnapshot>> {
    let psg = initial.grid;
    let dt = opts.dt;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(QdynError::InvalidParameter { name: "dt", reason: format!("{dt} must be positive") });
    }
    if let Some(k) = kernel {
        if !k.grid.same_as(&psg) {
            return Err(QdynError::GridMismatch("jump kernel built on a different grid".into()));
        }
    }
    let targets = step_indices(times, dt)?;
    potential.check_domain(&psg.q)?;
    let exec = opts.exec;
    let full = TransportMap::new(potential, &psg, dt, exec);
    let half = TransportMap::new(potential, &psg, 0.5 * dt, exec);
    let jumps = kernel.filter(|_| opts.lambda != 0.0);

    let area = psg.cell_area();
    let mut field = initial.values.clone();
    let reference = initial.abs_integral();
    let mut lost = 0.0;
    let mut out = Vec::with_capacity(targets.len());
    let mut step = 0usize;
    for (&target, &t) in targets.iter().zip(times) {
        while step < target {
            let w: Vec<f64> = field.iter().map(|v| v * area).collect();
            let (mut next, lost_a) = full.push(&psg, &w, exec);
            lost += lost_a;
            if let Some(k) = jumps {
                let (mid, _) = half.push(&psg, &w, exec);
                let rate = jump_rate(&mid, k, exec);
                let jw: Vec<f64> = rate.iter().map(|r| r * opts.lambda * dt * area).collect();
                let (jump, lost_j) = half.push(&psg, &jw, exec);
                lost += lost_j;
                for (n, j) in next.iter_mut().zip(&jump) {
                    *n += j;
                }
            }
            field = next;
            step += 1;
            let total: f64 = field.iter().map(|v| v.abs()).sum::<f64>() * area;
            if !total.is_finite() || total > opts.blowup_factor * reference {
                return Err(QdynError::Instability(format!(
                    "phase-space weight Σ|w| = {total:.3e} exceeds {}× the initial {reference:.3e} at t = {:.3}",
                    opts.blowup_factor,
                    step as f64 * dt
                )));
            }
        }
        out.push(GridSnapshot { t, field: PhaseSpaceField { grid: psg, values: field.clone() }, lost_weight: lost });
    }
    Ok(out)
}

fn step_indices(times: &[f64], dt: f64) -> Result<Vec<usize>> {
    let mut last = 0usize;
    times
        .iter()
        .map(|&t| {
            let n = (t / dt).round();
            if !(t >= 0.0) || (n * dt - t).abs() > 1e-9 * t.max(1.0) {
                return Err(QdynError::InvalidParameter {
                    name: "times",
                    reason: format!("{t} is not a non-negative multiple of dt = {dt}"),
                });
            }
            let n = n as usize;
            if n < last {
                return Err(QdynError::InvalidParameter { name: "times", reason: "must be ascending".into() });
            }
            last = n;
            Ok(n)
        })
        .collect()
}
