//! Benchmark potentials with analytic slope and curvature.

use std::fmt;
use std::str::FromStr;

use crate::error::{QdynError, Result};
use crate::grid::Grid1D;
use crate::units::MASS;

pub const DEFAULT_OMEGA0: f64 = 0.1;
pub const DEFAULT_V0: f64 = 1.0;
pub const DEFAULT_A3: f64 = 0.01;
pub const DEFAULT_OMEGA4: f64 = 0.4;
pub const DEFAULT_A4: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PotentialKind {
    Barrier,
    Well,
    Quartic,
    DoubleWell,
    Harmonic,
    Free,
    Tabulated,
}

impl PotentialKind {
    pub const NAMED: [PotentialKind; 6] = [
        PotentialKind::Barrier,
        PotentialKind::Well,
        PotentialKind::Quartic,
        PotentialKind::DoubleWell,
        PotentialKind::Harmonic,
        PotentialKind::Free,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PotentialKind::Barrier => "barrier",
            PotentialKind::Well => "well",
            PotentialKind::Quartic => "quartic",
            PotentialKind::DoubleWell => "doublewell",
            PotentialKind::Harmonic => "harmonic",
            PotentialKind::Free => "free",
            PotentialKind::Tabulated => "tabulated",
        }
    }
}

impl fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PotentialKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::NAMED
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown potential `{s}`"))
    }
}

/// Potential sampled on a uniform table; values between nodes are linearly
/// interpolated, derivatives come from central differences of the table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    grid: Grid1D,
    values: Vec<f64>,
    slopes: Vec<f64>,
    curvatures: Vec<f64>,
}

impl Table {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(QdynError::GridMismatch(format!(
                "table has {} values for {} nodes",
                values.len(),
                grid.n()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(QdynError::NonFinite("potential table".into()));
        }
        let slopes = central_difference(&values, grid.step());
        let curvatures = central_difference(&slopes, grid.step());
        Ok(Self { grid, values, slopes, curvatures })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    fn interpolate(&self, data: &[f64], q: f64) -> f64 {
        match self.grid.locate(q) {
            Some((i, f)) => data[i] * (1.0 - f) + data[i + 1] * f,
            None => f64::NAN,
        }
    }
}

fn central_difference(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| match i {
            0 => (v[1] - v[0]) / h,
            _ if i == n - 1 => (v[n - 1] - v[n - 2]) / h,
            _ => (v[i + 1] - v[i - 1]) / (2.0 * h),
        })
        .collect()
}

/// `½·k·(q − center)² + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    pub stiffness: f64,
    pub center: f64,
    pub offset: f64,
}

impl Quadratic {
    pub const ZERO: Quadratic = Quadratic { stiffness: 0.0, center: 0.0, offset: 0.0 };

    #[inline]
    pub fn value(&self, q: f64) -> f64 {
        let d = q - self.center;
        0.5 * self.stiffness * d * d + self.offset
    }

    #[inline]
    pub fn slope(&self, q: f64) -> f64 {
        self.stiffness * (q - self.center)
    }
}

/// The four benchmark potentials plus harmonic, free and tabulated cases.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// `½mω0²q² + V0·exp(−q²)`
    Barrier { omega0: f64, v0: f64 },
    /// `½mω0²q² − V0·exp(−q²)`
    Well { omega0: f64, v0: f64 },
    /// `½mω0²(q² + a3·q⁴)`
    Quartic { omega0: f64, a3: f64 },
    /// `V0 + ½mω4²(−q² + a4·q⁴)`
    DoubleWell { v0: f64, omega4: f64, a4: f64 },
    /// `½mω0²(q − center)²`
    Harmonic { omega0: f64, center: f64 },
    Free,
    Tabulated(Table),
}

impl Potential {
    pub fn barrier() -> Self {
        Potential::Barrier { omega0: DEFAULT_OMEGA0, v0: DEFAULT_V0 }
    }

    pub fn well() -> Self {
        Potential::Well { omega0: DEFAULT_OMEGA0, v0: DEFAULT_V0 }
    }

    pub fn quartic() -> Self {
        Potential::Quartic { omega0: DEFAULT_OMEGA0, a3: DEFAULT_A3 }
    }

    pub fn double_well() -> Self {
        Potential::DoubleWell { v0: DEFAULT_V0, omega4: DEFAULT_OMEGA4, a4: DEFAULT_A4 }
    }

    pub fn harmonic() -> Self {
        Potential::Harmonic { omega0: DEFAULT_OMEGA0, center: 0.0 }
    }

    /// Default-parameter potential of the given kind.
    pub fn from_kind(kind: PotentialKind) -> Result<Self> {
        Ok(match kind {
            PotentialKind::Barrier => Self::barrier(),
            PotentialKind::Well => Self::well(),
            PotentialKind::Quartic => Self::quartic(),
            PotentialKind::DoubleWell => Self::double_well(),
            PotentialKind::Harmonic => Self::harmonic(),
            PotentialKind::Free => Potential::Free,
            PotentialKind::Tabulated => {
                return Err(QdynError::param("potential", "a tabulated potential needs a table"))
            }
        })
    }

    pub fn kind(&self) -> PotentialKind {
        match self {
            Potential::Barrier { .. } => PotentialKind::Barrier,
            Potential::Well { .. } => PotentialKind::Well,
            Potential::Quartic { .. } => PotentialKind::Quartic,
            Potential::DoubleWell { .. } => PotentialKind::DoubleWell,
            Potential::Harmonic { .. } => PotentialKind::Harmonic,
            Potential::Free => PotentialKind::Free,
            Potential::Tabulated(_) => PotentialKind::Tabulated,
        }
    }

    /// `V(q)`. Tabulated potentials return NaN outside their table; use
    /// [`Potential::try_value`] or [`Potential::check_domain`] to get an error.
    #[inline]
    pub fn value(&self, q: f64) -> f64 {
        let q2 = q * q;
        match *self {
            Potential::Barrier { omega0, v0 } => 0.5 * MASS * omega0 * omega0 * q2 + v0 * (-q2).exp(),
            Potential::Well { omega0, v0 } => 0.5 * MASS * omega0 * omega0 * q2 - v0 * (-q2).exp(),
            Potential::Quartic { omega0, a3 } => 0.5 * MASS * omega0 * omega0 * (q2 + a3 * q2 * q2),
            Potential::DoubleWell { v0, omega4, a4 } => {
                v0 + 0.5 * MASS * omega4 * omega4 * (-q2 + a4 * q2 * q2)
            }
            Potential::Harmonic { omega0, center } => {
                let d = q - center;
                0.5 * MASS * omega0 * omega0 * d * d
            }
            Potential::Free => 0.0,
            Potential::Tabulated(ref t) => t.interpolate(&t.values, q),
        }
    }

    /// `dV/dq = −F(q)`.
    #[inline]
    pub fn slope(&self, q: f64) -> f64 {
        let q2 = q * q;
        match *self {
            Potential::Barrier { omega0, v0 } => MASS * omega0 * omega0 * q - 2.0 * v0 * q * (-q2).exp(),
            Potential::Well { omega0, v0 } => MASS * omega0 * omega0 * q + 2.0 * v0 * q * (-q2).exp(),
            Potential::Quartic { omega0, a3 } => MASS * omega0 * omega0 * (q + 2.0 * a3 * q2 * q),
            Potential::DoubleWell { omega4, a4, .. } => {
                MASS * omega4 * omega4 * (-q + 2.0 * a4 * q2 * q)
            }
            Potential::Harmonic { omega0, center } => MASS * omega0 * omega0 * (q - center),
            Potential::Free => 0.0,
            Potential::Tabulated(ref t) => t.interpolate(&t.slopes, q),
        }
    }

    #[inline]
    pub fn force(&self, q: f64) -> f64 {
        -self.slope(q)
    }

    /// `d²V/dq²`.
    #[inline]
    pub fn curvature(&self, q: f64) -> f64 {
        let q2 = q * q;
        match *self {
            Potential::Barrier { omega0, v0 } => {
                MASS * omega0 * omega0 - 2.0 * v0 * (1.0 - 2.0 * q2) * (-q2).exp()
            }
            Potential::Well { omega0, v0 } => {
                MASS * omega0 * omega0 + 2.0 * v0 * (1.0 - 2.0 * q2) * (-q2).exp()
            }
            Potential::Quartic { omega0, a3 } => MASS * omega0 * omega0 * (1.0 + 6.0 * a3 * q2),
            Potential::DoubleWell { omega4, a4, .. } => MASS * omega4 * omega4 * (-1.0 + 6.0 * a4 * q2),
            Potential::Harmonic { omega0, .. } => MASS * omega0 * omega0,
            Potential::Free => 0.0,
            Potential::Tabulated(ref t) => t.interpolate(&t.curvatures, q),
        }
    }

    pub fn try_value(&self, q: f64) -> Result<f64> {
        if let Potential::Tabulated(t) = self {
            if t.grid.locate(q).is_none() {
                return Err(QdynError::OutOfRange { q, min: t.grid.min(), max: t.grid.max() });
            }
        }
        Ok(self.value(q))
    }

    /// Errors if any grid point lies outside a tabulated potential's table.
    pub fn check_domain(&self, grid: &Grid1D) -> Result<()> {
        self.try_value(grid.min())?;
        self.try_value(grid.max())?;
        Ok(())
    }

    pub fn sample(&self, grid: &Grid1D) -> Vec<f64> {
        (0..grid.n()).map(|i| self.value(grid.point(i))).collect()
    }

    /// Exactly quadratic part of the potential. The remainder
    /// `V − background` carries all anharmonicity.
    pub fn quadratic_background(&self) -> Quadratic {
        match *self {
            Potential::Barrier { omega0, .. }
            | Potential::Well { omega0, .. }
            | Potential::Quartic { omega0, .. } => {
                Quadratic { stiffness: MASS * omega0 * omega0, center: 0.0, offset: 0.0 }
            }
            Potential::DoubleWell { v0, omega4, .. } => {
                Quadratic { stiffness: -MASS * omega4 * omega4, center: 0.0, offset: v0 }
            }
            Potential::Harmonic { omega0, center } => {
                Quadratic { stiffness: MASS * omega0 * omega0, center, offset: 0.0 }
            }
            Potential::Free | Potential::Tabulated(_) => Quadratic::ZERO,
        }
    }

    #[inline]
    pub fn anharmonic_value(&self, q: f64) -> f64 {
        match *self {
            Potential::Barrier { v0, .. } => v0 * (-q * q).exp(),
            Potential::Well { v0, .. } => -v0 * (-q * q).exp(),
            Potential::Harmonic { .. } | Potential::Free => 0.0,
            _ => self.value(q) - self.quadratic_background().value(q),
        }
    }

    #[inline]
    pub fn anharmonic_slope(&self, q: f64) -> f64 {
        match *self {
            Potential::Harmonic { .. } | Potential::Free => 0.0,
            _ => self.slope(q) - self.quadratic_background().slope(q),
        }
    }

    /// Largest `|V|` on the grid; used for spectral bounds.
    pub fn range_on(&self, grid: &Grid1D) -> (f64, f64) {
        self.sample(grid)
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}
