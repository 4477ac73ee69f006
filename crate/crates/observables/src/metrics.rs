//! Error metrics between fields on a common grid.

use qdyn_core::{Grid1D, PhaseSpaceField, QdynError, Result, WaveField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldMetrics {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    /// `|⟨ψ_ref|ψ⟩|²/(‖ψ_ref‖²‖ψ‖²)`; wave fields only.
    pub fidelity: Option<f64>,
}

/// Trapezoid L1/L2 and sup norm of `candidate − reference`.
pub fn compare_densities(grid: &Grid1D, candidate: &[f64], reference: &[f64]) -> Result<FieldMetrics> {
    if candidate.len() != grid.n() || reference.len() != grid.n() {
        return Err(QdynError::GridMismatch(format!(
            "{} and {} samples on a {}-point grid",
            candidate.len(),
            reference.len(),
            grid.n()
        )));
    }
    let (mut l1, mut l2, mut linf) = (0.0, 0.0, 0.0f64);
    for (i, (a, b)) in candidate.iter().zip(reference).enumerate() {
        let d = (a - b).abs();
        let w = grid.trapezoid_weight(i);
        l1 += w * d;
        l2 += w * d * d;
        linf = linf.max(d);
    }
    Ok(FieldMetrics { l1, l2: l2.sqrt(), linf, fidelity: None })
}

/// Density metrics of `|ψ|²` plus the overlap fidelity.
pub fn compare_fields(candidate: &WaveField, reference: &WaveField) -> Result<FieldMetrics> {
    if !candidate.grid.same_as(&reference.grid) {
        return Err(QdynError::GridMismatch("wave fields live on different grids".into()));
    }
    let mut m = compare_densities(&candidate.grid, &candidate.density(), &reference.density())?;
    let overlap = reference.inner(candidate).norm_sqr();
    m.fidelity = Some(overlap / (reference.norm_sqr() * candidate.norm_sqr()));
    Ok(m)
}

/// Cell-sum metrics of two phase-space fields.
pub fn compare_phase_space(candidate: &PhaseSpaceField, reference: &PhaseSpaceField) -> Result<FieldMetrics> {
    if !candidate.grid.same_as(&reference.grid) {
        return Err(QdynError::GridMismatch("phase-space fields live on different grids".into()));
    }
    let area = candidate.grid.cell_area();
    let (mut l1, mut l2, mut linf) = (0.0, 0.0, 0.0f64);
    for (a, b) in candidate.values.iter().zip(&reference.values) {
        let d = (a - b).abs();
        l1 += d;
        l2 += d * d;
        linf = linf.max(d);
    }
    Ok(FieldMetrics { l1: l1 * area, l2: (l2 * area).sqrt(), linf, fidelity: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use qdyn_core::{init_wavefunction, Complex64, GaussianPacket};

    fn packet_field() -> WaveField {
        init_wavefunction(&GaussianPacket::default(), &Grid1D::centered(512, 0.1).unwrap()).unwrap()
    }

    #[test]
    fn identical_fields() {
        let psi = packet_field();
        let m = compare_fields(&psi, &psi).unwrap();
        assert_eq!((m.l1, m.l2, m.linf), (0.0, 0.0, 0.0));
        assert!((m.fidelity.unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn global_phase_is_invisible() {
        let psi = packet_field();
        let mut rot = psi.clone();
        let ph = Complex64::from_polar(1.0, 0.83);
        rot.amp.iter_mut().for_each(|a| *a *= ph);
        let m = compare_fields(&rot, &psi).unwrap();
        assert!(m.linf < 1e-15 && m.l1 < 1e-14);
        assert!((m.fidelity.unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn shifted_boxes() {
        // 1 on [0, 1] against 1 on [0.5, 1.5]: the difference is 1 on a set of measure 1
        let g = Grid1D::spanning(4001, -1.0, 3.0).unwrap();
        let boxed = |lo: f64, hi: f64| g.points().iter().map(|&q| if q >= lo - 1e-9 && q <= hi + 1e-9 { 1.0 } else { 0.0 }).collect::<Vec<_>>();
        let m = compare_densities(&g, &boxed(0.0, 1.0), &boxed(0.5, 1.5)).unwrap();
        assert!((m.l1 - 1.0).abs() < 2.0 * g.step(), "{}", m.l1);
        assert!((m.l2 - 1.0).abs() < 2.0 * g.step(), "{}", m.l2);
        assert_eq!(m.linf, 1.0);
    }

    #[test]
    fn mismatch_rejected() {
        let g = Grid1D::centered(10, 0.1).unwrap();
        assert!(matches!(compare_densities(&g, &[0.0; 10], &[0.0; 9]), Err(QdynError::GridMismatch(_))));
        let other = WaveField::zeros(Grid1D::centered(10, 0.2).unwrap());
        assert!(compare_fields(&packet_field(), &other).is_err());
    }
}
