//! Plain-text `key = value` run configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qdyn_core::{Grid1D, Kinetic, Potential, PotentialKind};
use qdyn_linprop::courant_dt;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Chebyshev,
    CrankNicolson,
    Diag,
    Linprop,
    Wigner1,
    Wigner2,
    TomogramChar,
    TomogramSde,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Chebyshev,
        Method::CrankNicolson,
        Method::Diag,
        Method::Linprop,
        Method::Wigner1,
        Method::Wigner2,
        Method::TomogramChar,
        Method::TomogramSde,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Chebyshev => "chebyshev",
            Method::CrankNicolson => "cranknicolson",
            Method::Diag => "diag",
            Method::Linprop => "linprop",
            Method::Wigner1 => "wigner1",
            Method::Wigner2 => "wigner2",
            Method::TomogramChar => "tomogram-char",
            Method::TomogramSde => "tomogram-sde",
        }
    }

    /// Methods that write phase-space snapshots.
    pub fn has_phase_space(self) -> bool {
        matches!(self, Method::Wigner1 | Method::Wigner2)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
            format!("unknown method `{s}` (expected one of {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preset {
    #[default]
    Paper,
    /// Roughly 100× fewer particles and coarser grids.
    Desk,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Paper => "paper",
            Preset::Desk => "desk",
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Preset::Paper),
            "desk" => Ok(Preset::Desk),
            _ => Err(format!("unknown preset `{s}` (expected paper or desk)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Preset,
    pub potential: PotentialKind,
    pub method: Method,
    pub kinetic: Kinetic,
    /// Wave-function points, phase-space points per axis, or tomogram
    /// samples per axis depending on the method.
    pub grid_n: usize,
    pub dq: f64,
    pub dp: f64,
    /// Largest time step; output intervals are split into equal steps.
    pub dt: f64,
    pub t_final: f64,
    /// Spacing of the time-series rows.
    pub snapshot_every: f64,
    /// Density and phase-space files are written every this many rows.
    pub files_every: usize,
    pub n_particles: usize,
    pub seed: u64,
    /// Jump-kernel range for `wigner2`; the grid reach when unset.
    pub s_max: Option<f64>,
    pub out_dir: PathBuf,
    pub reference: Option<Method>,
}

/// Keys in serialization order.
pub const KEYS: [&str; 16] = [
    "preset",
    "potential",
    "method",
    "kinetic",
    "grid_n",
    "dq",
    "dp",
    "dt",
    "t_final",
    "snapshot_every",
    "files_every",
    "n_particles",
    "seed",
    "s_max",
    "out_dir",
    "reference",
];

/// Where a setting came from, for error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag => f.write_str("command line"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub origin: Origin,
}

/// Splits config text into entries; `#` starts a comment.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let origin = Origin::Line(i + 1);
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::config(origin, line, "expected `key = value`"));
        };
        out.push(Entry { key: key.trim().to_string(), value: value.trim().to_string(), origin });
    }
    Ok(out)
}

/// Turns `--key value`, `--key=value` and `key=value` tokens into entries.
pub fn parse_overrides(args: &[String]) -> Result<Vec<Entry>, CliError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(tok) = it.next() {
        let (key, value) = if let Some(flag) = tok.strip_prefix("--") {
            match flag.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = it.next().ok_or_else(|| CliError::config(Origin::Flag, flag, "missing value"))?;
                    (flag.to_string(), v.clone())
                }
            }
        } else if let Some((k, v)) = tok.split_once('=') {
            (k.to_string(), v.to_string())
        } else {
            return Err(CliError::config(Origin::Flag, tok, "expected `--key value` or `key=value`"));
        };
        out.push(Entry { key: key.replace('-', "_"), value, origin: Origin::Flag });
    }
    Ok(out)
}

/// Method- and preset-dependent defaults; `dt = None` means the Courant bound.
struct Defaults {
    grid_n: usize,
    dq: f64,
    dp: f64,
    dt: Option<f64>,
    n_particles: usize,
}

fn defaults(method: Method, preset: Preset) -> Defaults {
    let desk = preset == Preset::Desk;
    let pick = |paper: f64, d: f64| if desk { d } else { paper };
    let pick_n = |paper: usize, d: usize| if desk { d } else { paper };
    match method {
        Method::Chebyshev => Defaults { grid_n: pick_n(1024, 512), dq: pick(0.08, 0.16), dp: 0.045, dt: Some(0.4), n_particles: 0 },
        Method::CrankNicolson => {
            Defaults { grid_n: pick_n(1024, 512), dq: pick(0.08, 0.16), dp: 0.045, dt: Some(pick(0.01, 0.02)), n_particles: 0 }
        }
        // dense diagonalization is capped at 512 points
        Method::Diag => Defaults { grid_n: 512, dq: 0.16, dp: 0.045, dt: Some(0.4), n_particles: 0 },
        Method::Linprop => Defaults { grid_n: pick_n(512, 256), dq: pick(0.125, 0.25), dp: 0.045, dt: None, n_particles: 0 },
        Method::Wigner1 => Defaults {
            grid_n: pick_n(400, 200),
            dq: pick(0.225, 0.45),
            dp: pick(0.045, 0.09),
            dt: Some(0.01),
            n_particles: pick_n(10_000_000, 100_000),
        },
        Method::Wigner2 => {
            Defaults { grid_n: pick_n(400, 200), dq: pick(0.225, 0.45), dp: pick(0.045, 0.09), dt: Some(0.04), n_particles: 0 }
        }
        Method::TomogramChar => Defaults {
            grid_n: pick_n(1024, 512),
            dq: pick(0.08, 0.16),
            dp: pick(0.02, 0.04),
            dt: Some(0.01),
            n_particles: pick_n(12_000, 1_200),
        },
        Method::TomogramSde => Defaults {
            grid_n: pick_n(1024, 512),
            dq: pick(0.08, 0.16),
            dp: pick(0.02, 0.04),
            dt: Some(0.02),
            n_particles: pick_n(400, 40),
        },
    }
}

fn value<T: FromStr>(e: &Entry) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    e.value.parse::<T>().map_err(|err| CliError::config(e.origin, &e.key, format!("cannot parse `{}`: {err}", e.value)))
}

fn positive(e: &Entry) -> Result<f64, CliError> {
    let v: f64 = value(e)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(CliError::config(e.origin, &e.key, format!("{v} must be positive")));
    }
    Ok(v)
}

fn positive_int<T: FromStr + PartialEq + Default>(e: &Entry) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    let v: T = value(e)?;
    if v == T::default() {
        return Err(CliError::config(e.origin, &e.key, "must be positive"));
    }
    Ok(v)
}

fn optional<T: FromStr>(e: &Entry) -> Result<Option<T>, CliError>
where
    T::Err: fmt::Display,
{
    if e.value == "none" {
        Ok(None)
    } else {
        value(e).map(Some)
    }
}

impl RunConfig {
    /// Builds a configuration from entries; later entries win.
    pub fn from_entries(entries: &[Entry]) -> Result<Self, CliError> {
        for e in entries {
            if !KEYS.contains(&e.key.as_str()) {
                return Err(CliError::config(e.origin, &e.key, "unknown key"));
            }
        }
        let last = |key: &str| entries.iter().rev().find(|e| e.key == key);
        let method_entry = last("method").ok_or_else(|| CliError::Config {
            origin: None,
            key: "method".into(),
            reason: "missing required key".into(),
        })?;
        if method_entry.value.is_empty() {
            return Err(CliError::config(method_entry.origin, "method", "must not be empty"));
        }
        let method: Method = value(method_entry)?;
        let preset: Preset = last("preset").map(value).transpose()?.unwrap_or_default();
        let d = defaults(method, preset);
        let mut cfg = RunConfig {
            preset,
            potential: PotentialKind::Barrier,
            method,
            kinetic: Kinetic::default(),
            grid_n: d.grid_n,
            dq: d.dq,
            dp: d.dp,
            dt: d.dt.unwrap_or(f64::NAN),
            t_final: 56.0,
            snapshot_every: 0.4,
            files_every: 10,
            n_particles: d.n_particles,
            seed: 1,
            s_max: None,
            out_dir: PathBuf::from("qdyn-out"),
            reference: None,
        };
        let mut dt_set = d.dt.is_some();
        for e in entries {
            match e.key.as_str() {
                "preset" | "method" => {}
                "potential" => cfg.potential = value(e)?,
                "kinetic" => cfg.kinetic = value(e)?,
                "grid_n" => cfg.grid_n = positive_int(e)?,
                "dq" => cfg.dq = positive(e)?,
                "dp" => cfg.dp = positive(e)?,
                "dt" if e.value == "courant" => dt_set = false,
                "dt" => {
                    cfg.dt = positive(e)?;
                    dt_set = true;
                }
                "t_final" => cfg.t_final = positive(e)?,
                "snapshot_every" => cfg.snapshot_every = positive(e)?,
                "files_every" => cfg.files_every = positive_int(e)?,
                "n_particles" => cfg.n_particles = value(e)?,
                "seed" => cfg.seed = value(e)?,
                "s_max" => {
                    cfg.s_max = optional(e)?;
                    if cfg.s_max.is_some_and(|v| !(v > 0.0)) {
                        return Err(CliError::config(e.origin, "s_max", "must be positive"));
                    }
                }
                "out_dir" => cfg.out_dir = PathBuf::from(&e.value),
                "reference" => cfg.reference = optional(e)?,
                _ => unreachable!("keys validated above"),
            }
        }
        if cfg.n_particles == 0 && matches!(method, Method::Wigner1 | Method::TomogramChar | Method::TomogramSde) {
            return Err(CliError::Config { origin: None, key: "n_particles".into(), reason: "must be positive".into() });
        }
        if !dt_set {
            cfg.dt = cfg.courant_dt()?;
        }
        if cfg.output_count().is_none() {
            return Err(CliError::Config {
                origin: None,
                key: "snapshot_every".into(),
                reason: format!("t_final = {} is not a multiple of {}", cfg.t_final, cfg.snapshot_every),
            });
        }
        Ok(cfg)
    }

    pub fn parse_str(text: &str) -> Result<Self, CliError> {
        Self::from_entries(&parse_entries(text)?)
    }

    /// Config file (optional), then preset, then overrides.
    pub fn load(path: Option<&Path>, preset: Option<&str>, overrides: &[String]) -> Result<Self, CliError> {
        let mut entries = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| CliError::Io { path: p.to_path_buf(), source })?;
                parse_entries(&text)?
            }
            None => Vec::new(),
        };
        if let Some(p) = preset {
            entries.push(Entry { key: "preset".into(), value: p.into(), origin: Origin::Flag });
        }
        entries.extend(parse_overrides(overrides)?);
        Self::from_entries(&entries)
    }

    /// Configuration text that parses back to `self`.
    pub fn serialize(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "none".into());
        let lines = [
            ("preset", self.preset.name().to_string()),
            ("potential", self.potential.name().to_string()),
            ("method", self.method.name().to_string()),
            ("kinetic", self.kinetic.name().to_string()),
            ("grid_n", self.grid_n.to_string()),
            ("dq", self.dq.to_string()),
            ("dp", self.dp.to_string()),
            ("dt", self.dt.to_string()),
            ("t_final", self.t_final.to_string()),
            ("snapshot_every", self.snapshot_every.to_string()),
            ("files_every", self.files_every.to_string()),
            ("n_particles", self.n_particles.to_string()),
            ("seed", self.seed.to_string()),
            ("s_max", opt(self.s_max.map(|v| v.to_string()))),
            ("out_dir", self.out_dir.display().to_string()),
            ("reference", opt(self.reference.map(|m| m.name().to_string()))),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn potential(&self) -> Result<Potential, CliError> {
        Ok(Potential::from_kind(self.potential)?)
    }

    pub fn wave_grid(&self) -> Result<Grid1D, CliError> {
        Ok(Grid1D::centered(self.grid_n, self.dq)?)
    }

    fn courant_dt(&self) -> Result<f64, CliError> {
        Ok(courant_dt(&self.potential()?, &self.wave_grid()?)?)
    }

    /// Number of output intervals, if `t_final` is a multiple of the spacing.
    pub fn output_count(&self) -> Option<usize> {
        let n = (self.t_final / self.snapshot_every).round();
        ((n * self.snapshot_every - self.t_final).abs() <= 1e-9 * self.t_final.max(1.0) && n >= 1.0).then_some(n as usize)
    }

    /// Output times including `t = 0`.
    pub fn output_times(&self) -> Vec<f64> {
        let n = self.output_count().unwrap_or(0);
        (0..=n).map(|k| k as f64 * self.snapshot_every).collect()
    }

    /// Configuration of the inline reference run: the reference method's own
    /// defaults with this run's scenario settings.
    pub fn reference_config(&self) -> Result<Option<RunConfig>, CliError> {
        let Some(m) = self.reference else { return Ok(None) };
        let shared = [
            ("method", m.name().to_string()),
            ("preset", self.preset.name().to_string()),
            ("potential", self.potential.name().to_string()),
            ("kinetic", self.kinetic.name().to_string()),
            ("t_final", self.t_final.to_string()),
            ("snapshot_every", self.snapshot_every.to_string()),
            ("files_every", self.files_every.to_string()),
            ("seed", self.seed.to_string()),
            ("out_dir", self.out_dir.join("reference").display().to_string()),
        ];
        let entries: Vec<Entry> =
            shared.into_iter().map(|(k, v)| Entry { key: k.into(), value: v, origin: Origin::Flag }).collect();
        RunConfig::from_entries(&entries).map(Some)
    }
}
