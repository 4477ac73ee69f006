//! Half-axis norms and reduced first moments of coordinate densities.

use qdyn_core::Grid1D;

/// Reduced means below this partial norm are reported as undefined.
pub const DEFAULT_NORM_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialNorms {
    pub minus: f64,
    pub plus: f64,
    /// `∫min(ρ, 0)`; non-zero only for signed marginals.
    pub negative_mass: f64,
}

impl PartialNorms {
    pub fn total(&self) -> f64 {
        self.minus + self.plus
    }
}

/// Trapezoid integrals of `f` over `q < 0` and `q > 0`. The cell holding
/// the origin is split with the linear interpolant, so the two parts add up
/// to the full trapezoid sum.
pub fn half_axis_integrals(grid: &Grid1D, f: &[f64]) -> (f64, f64) {
    let h = grid.step();
    let (mut minus, mut plus) = (0.0, 0.0);
    for i in 0..grid.n().saturating_sub(1) {
        let (a, b) = (grid.point(i), grid.point(i + 1));
        let (fa, fb) = (f[i], f[i + 1]);
        let cell = 0.5 * h * (fa + fb);
        if b <= 0.0 {
            minus += cell;
        } else if a >= 0.0 {
            plus += cell;
        } else {
            let s = -a / h;
            let f0 = fa + s * (fb - fa);
            let left = 0.5 * (-a) * (fa + f0);
            minus += left;
            plus += cell - left;
        }
    }
    (minus, plus)
}

pub fn partial_norms(grid: &Grid1D, density: &[f64]) -> PartialNorms {
    let (minus, plus) = half_axis_integrals(grid, density);
    let neg: Vec<f64> = density.iter().map(|&v| v.min(0.0)).collect();
    let (nm, np) = half_axis_integrals(grid, &neg);
    PartialNorms { minus, plus, negative_mass: nm + np }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedMeans {
    pub minus: Option<f64>,
    pub plus: Option<f64>,
}

/// `⟨q⟩± = (1/N±)∫_{±q>0} q·ρ dq`, undefined when `N± ≤ floor`.
pub fn reduced_means(grid: &Grid1D, density: &[f64], floor: f64) -> ReducedMeans {
    let norms = partial_norms(grid, density);
    let moment: Vec<f64> = density.iter().enumerate().map(|(i, &v)| grid.point(i) * v).collect();
    let (mm, mp) = half_axis_integrals(grid, &moment);
    ReducedMeans {
        minus: (norms.minus > floor).then(|| mm / norms.minus),
        plus: (norms.plus > floor).then(|| mp / norms.plus),
    }
}

/// One row of the observable time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableRecord {
    pub t: f64,
    pub norm: f64,
    pub n_minus: f64,
    pub n_plus: f64,
    pub q_mean_minus: Option<f64>,
    pub q_mean_plus: Option<f64>,
    pub energy: Option<f64>,
}

impl ObservableRecord {
    pub fn from_density(t: f64, grid: &Grid1D, density: &[f64], energy: Option<f64>, floor: f64) -> Self {
        let n = partial_norms(grid, density);
        let m = reduced_means(grid, density, floor);
        Self {
            t,
            norm: n.total(),
            n_minus: n.minus,
            n_plus: n.plus,
            q_mean_minus: m.minus,
            q_mean_plus: m.plus,
            energy,
        }
    }
}
