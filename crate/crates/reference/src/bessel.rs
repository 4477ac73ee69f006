//! Integer-order Bessel functions of the first kind by Miller's downward
//! recurrence.

use qdyn_core::{QdynError, Result};

/// Hard cap on the expansion order searched by [`truncation_order`].
pub const ORDER_CAP: usize = 1_000_000;

const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// `J_0(x) … J_kmax(x)` for `x ≥ 0`.
///
/// The recurrence `J_{k−1} = (2k/x)·J_k − J_{k+1}` is started well above
/// both `kmax` and `x` and normalized with `J_0 + 2·Σ J_{2k} = 1`.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "argument must be finite and non-negative");
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let reach = kmax.max(x.ceil() as usize);
    let mut start = reach + 20 + (40.0 * reach as f64).sqrt() as usize;
    start += start % 2;

    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        // cur holds J_k; produce J_{k-1}
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        let km1 = k - 1;
        if km1 <= kmax {
            out[km1] = cur;
        }
        if km1 % 2 == 0 && km1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > RESCALE_ABOVE {
            cur *= RESCALE_BY;
            next *= RESCALE_BY;
            norm *= RESCALE_BY;
            out.iter_mut().skip(km1).for_each(|v| *v *= RESCALE_BY);
        }
    }
    norm += cur; // J_0
    out.iter_mut().for_each(|v| *v /= norm);
    out
}

/// Smallest `M` such that `|J_k(x)| < cutoff` for every `k > M`, together
/// with `J_0 … J_M`.
pub fn truncation_order(x: f64, cutoff: f64) -> Result<(usize, Vec<f64>)> {
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(QdynError::InvalidParameter { name: "cutoff", reason: format!("{cutoff} not in (0, 1)") });
    }
    if x == 0.0 {
        return Ok((0, vec![1.0]));
    }
    let mut kmax = (x.ceil() as usize + 32).max(64);
    loop {
        if kmax > ORDER_CAP {
            return Err(QdynError::OrderCap { cap: ORDER_CAP });
        }
        let j = bessel_j_sequence(x, kmax);
        // beyond k > x the sequence decays monotonically; require clear margin
        let tail_start = (x.ceil() as usize).min(kmax);
        let clear = j[tail_start..].iter().rposition(|v| v.abs() >= cutoff * 1e-6);
        if let Some(pos) = clear {
            if tail_start + pos + 8 >= kmax {
                kmax *= 2;
                continue;
            }
        }
        let order = j.iter().rposition(|v| v.abs() >= cutoff).unwrap_or(0);
        let mut coeffs = j;
        coeffs.truncate(order + 1);
        return Ok((order, coeffs));
    }
}
