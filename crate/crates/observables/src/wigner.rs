//! Wigner function of a wave function on a phase-space grid.

use std::f64::consts::PI;

use qdyn_core::units::HBAR;
use qdyn_core::{Complex64, Execution, PhaseSpaceField, PhaseSpaceGrid, Result, WaveField};

const ROW_CHUNK: usize = 4;

/// `ψ` at `x` by linear interpolation, zero outside the grid.
fn amplitude_at(field: &WaveField, x: f64) -> Complex64 {
    match field.grid.locate(x) {
        Some((i, f)) => {
            let hi = field.amp.get(i + 1).copied().unwrap_or_default();
            field.amp[i] * (1.0 - f) + hi * f
        }
        None => Complex64::new(0.0, 0.0),
    }
}

/// `W(q,p) = (1/2πħ)∫ e^{−ipy/ħ} ψ*(q − y/2) ψ(q + y/2) dy` with `y = 2jΔq`.
///
/// Rows whose `q` falls on a wave-grid node use the node values directly;
/// other rows interpolate `ψ` linearly. The `±j` terms are summed as
/// conjugate pairs, so the result is real by construction.
pub fn wigner_from_wavefunction(field: &WaveField, psg: &PhaseSpaceGrid, exec: Execution) -> Result<PhaseSpaceField> {
    let wg = field.grid;
    let dq = wg.step();
    let np = psg.p.n();
    let rows = exec.map_chunks(psg.q.n(), ROW_CHUNK, |r| {
        let mut out = Vec::with_capacity(r.len() * np);
        for iq in r {
            let q = psg.q.point(iq);
            let u = (q - wg.min()) / dq;
            let on_node = (u - u.round()).abs() < 1e-9 && u.round() >= 0.0 && u.round() < wg.n() as f64;
            let reach = wg.n() as i64;
            // c_j = ψ*(q − jΔq)·ψ(q + jΔq), j ≥ 0
            let mut c = Vec::new();
            for j in 0..reach {
                let x = j as f64 * dq;
                let (lo, hi) = if on_node {
                    let k = u.round() as i64;
                    let get = |m: i64| if m >= 0 && m < reach { field.amp[m as usize] } else { Complex64::new(0.0, 0.0) };
                    (get(k - j), get(k + j))
                } else {
                    (amplitude_at(field, q - x), amplitude_at(field, q + x))
                };
                if lo == Complex64::new(0.0, 0.0) && hi == Complex64::new(0.0, 0.0) && q - x < wg.min() && q + x > wg.max() {
                    break;
                }
                c.push(lo.conj() * hi);
            }
            let scale = 2.0 * dq / (2.0 * PI * HBAR);
            for ip in 0..np {
                let p = psg.p.point(ip);
                let phase = Complex64::from_polar(1.0, -2.0 * dq * p / HBAR);
                // c_{−j} = conj(c_j)
                let mut acc = c[0].re;
                let mut rot = phase;
                for cj in &c[1..] {
                    acc += 2.0 * (cj * rot).re;
                    rot *= phase;
                }
                out.push(scale * acc);
            }
        }
        out
    });
    Ok(PhaseSpaceField { grid: *psg, values: rows.concat() })
}
