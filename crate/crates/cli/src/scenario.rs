//! Method dispatch and run outputs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use qdyn_core::units::MASS;
use qdyn_core::{
    init_wavefunction, init_wigner, Execution, GaussianPacket, Grid1D, Hamiltonian, PhaseSpaceField, PhaseSpaceGrid,
    Potential, PotentialKind, WaveField,
};
use qdyn_linprop::{linprop_propagate, LinPropOptions, LinPropPlan};
use qdyn_observables::{ObservableRecord, DEFAULT_NORM_FLOOR};
use qdyn_reference::{chebyshev_propagate, crank_nicolson_propagate, plan_chebyshev_with, ChebyshevOptions, CrankNicolson, DiagOracle};
use qdyn_tomography::{
    tomographic_evolve_characteristics, tomographic_evolve_stochastic, CharacteristicsOptions, StochasticEvolveOptions,
    TomogramSnapshot, DEFAULT_WINDOW,
};
use qdyn_wigner::{
    build_jump_kernel_with, wigner_first_order, wigner_second_order, FirstOrderOptions, KernelOptions, SecondOrderOptions,
    DEFAULT_Q_CUT,
};

use crate::compare::compare_runs;
use crate::config::{Method, RunConfig};
use crate::error::CliError;
use crate::output::{self, TextFile};

/// State at one output time.
#[derive(Debug, Clone)]
pub struct Frame {
    pub t: f64,
    pub grid: Grid1D,
    pub density: Vec<f64>,
    pub energy: Option<f64>,
    pub phase_space: Option<PhaseSpaceField>,
}

impl Frame {
    pub fn record(&self) -> ObservableRecord {
        ObservableRecord::from_density(self.t, &self.grid, &self.density, self.energy, DEFAULT_NORM_FLOOR)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub rows: usize,
    pub files: Vec<PathBuf>,
    pub wall_time: f64,
    pub warnings: Vec<String>,
    /// Method-specific diagnostics written to the metadata.
    pub notes: Vec<(String, String)>,
}

/// Equal steps `(count, size)` covering `span` with size at most `dt_max`.
pub fn even_steps(span: f64, dt_max: f64) -> (usize, f64) {
    let n = (span / dt_max * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (n, span / n as f64)
}

fn wave_frame(t: f64, psi: &WaveField, ham: &Hamiltonian) -> Frame {
    Frame { t, grid: psi.grid, density: psi.density(), energy: Some(ham.energy(psi)), phase_space: None }
}

fn phase_space_frame(t: f64, field: PhaseSpaceField, potential: &Potential) -> Frame {
    let g = field.grid;
    let mut energy = 0.0;
    for iq in 0..g.q.n() {
        let v = potential.value(g.q.point(iq));
        for (ip, w) in field.row(iq).iter().enumerate() {
            let p = g.p.point(ip);
            energy += w * (p * p / (2.0 * MASS) + v);
        }
    }
    Frame {
        t,
        grid: g.q,
        density: field.q_marginal(),
        energy: Some(energy * g.cell_area()),
        phase_space: Some(field),
    }
}

fn tomogram_frame(s: TomogramSnapshot, potential: &Potential) -> Frame {
    let x = s.x;
    let pot: f64 = (0..x.n()).map(|i| x.trapezoid_weight(i) * potential.value(x.point(i)) * s.coordinate[i]).sum();
    Frame { t: s.t, grid: x, energy: Some(s.kinetic_energy + pot), density: s.coordinate, phase_space: None }
}

fn q_cut(kind: PotentialKind) -> f64 {
    match kind {
        PotentialKind::Barrier => DEFAULT_Q_CUT[0],
        PotentialKind::Well => DEFAULT_Q_CUT[1],
        PotentialKind::Quartic => DEFAULT_Q_CUT[2],
        PotentialKind::DoubleWell => DEFAULT_Q_CUT[3],
        _ => DEFAULT_Q_CUT[0],
    }
}

/// Runs the configured method and hands every output frame to `emit`.
pub fn simulate(
    cfg: &RunConfig,
    exec: Execution,
    summary: &mut RunSummary,
    mut emit: impl FnMut(Frame) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let packet = GaussianPacket::default();
    let potential = cfg.potential()?;
    let times = cfg.output_times();
    let (steps, h) = even_steps(cfg.snapshot_every, cfg.dt);
    let psg = || PhaseSpaceGrid::centered(cfg.grid_n, cfg.dq, cfg.grid_n, cfg.dp);

    match cfg.method {
        Method::Chebyshev | Method::CrankNicolson | Method::Linprop | Method::Diag => {
            let grid = cfg.wave_grid()?;
            potential.check_domain(&grid)?;
            let psi0 = init_wavefunction(&packet, &grid)?;
            let ham = Hamiltonian::new(&potential, &grid, cfg.kinetic)?.with_execution(exec);
            emit(wave_frame(0.0, &psi0, &ham))?;
            if cfg.method == Method::Diag {
                let oracle = DiagOracle::new(&potential, &grid, cfg.kinetic)?;
                for &t in &times[1..] {
                    emit(wave_frame(t, &oracle.propagate(&psi0, t)?, &ham))?;
                }
                return Ok(());
            }
            let advance: Box<dyn Fn(&WaveField) -> qdyn_core::Result<WaveField>> = match cfg.method {
                Method::Chebyshev => {
                    let opts = ChebyshevOptions { kinetic: cfg.kinetic, exec, ..Default::default() };
                    let plan = plan_chebyshev_with(&potential, &grid, h, &opts)?;
                    summary.notes.push(("chebyshev_order".into(), plan.order.to_string()));
                    Box::new(move |psi| chebyshev_propagate(psi, &plan, steps))
                }
                Method::CrankNicolson => {
                    let cn = CrankNicolson::new(&potential, &grid, h)?;
                    Box::new(move |psi| crank_nicolson_propagate(psi, &cn, steps))
                }
                _ => {
                    let plan = LinPropPlan::new(&potential, &grid, h, LinPropOptions { exec, ..Default::default() })?;
                    summary.notes.push(("courant_dt".into(), plan.courant.to_string()));
                    Box::new(move |psi| linprop_propagate(psi, &plan, steps))
                }
            };
            summary.notes.push(("step".into(), h.to_string()));
            let mut psi = psi0;
            for &t in &times[1..] {
                psi = advance(&psi)?;
                emit(wave_frame(t, &psi, &ham))?;
            }
        }
        Method::Wigner1 => {
            let opts = FirstOrderOptions { n_particles: cfg.n_particles, dt: cfg.dt, seed: cfg.seed, exec };
            let snaps = wigner_first_order(&packet, &potential, &psg()?, &opts, &times)?;
            if let Some(last) = snaps.last() {
                summary.notes.push(("dropped_weight".into(), last.stats.dropped_weight.to_string()));
            }
            for s in snaps {
                emit(phase_space_frame(s.t, s.field, &potential))?;
            }
        }
        Method::Wigner2 => {
            let grid = psg()?;
            let kopts = KernelOptions { s_max: cfg.s_max, exec, ..KernelOptions::new(q_cut(cfg.potential)) };
            let kernel = build_jump_kernel_with(&potential, &grid, &kopts)?;
            if let Some(req) = kernel.clipped_s_max {
                summary.warnings.push(format!(
                    "jump kernel range s_max = {req} exceeds the momentum grid reach {}; clipped",
                    kernel.s.last().copied().unwrap_or(0.0)
                ));
            }
            let opts = SecondOrderOptions { dt: h, exec, ..Default::default() };
            let snaps = wigner_second_order(&init_wigner(&packet, &grid)?, &potential, Some(&kernel), &opts, &times)?;
            summary.notes.push(("step".into(), h.to_string()));
            if let Some(last) = snaps.last() {
                summary.notes.push(("lost_weight".into(), last.lost_weight.to_string()));
            }
            for s in snaps {
                emit(phase_space_frame(s.t, s.field, &potential))?;
            }
        }
        Method::TomogramChar | Method::TomogramSde => {
            let x = Grid1D::centered(cfg.grid_n, cfg.dq)?;
            let p = Grid1D::centered(cfg.grid_n, cfg.dp)?;
            let snaps = if cfg.method == Method::TomogramChar {
                let opts = CharacteristicsOptions { n_traj: cfg.n_particles, dt: cfg.dt, seed: cfg.seed, window: DEFAULT_WINDOW, exec };
                tomographic_evolve_characteristics(&packet, &potential, &x, &p, &opts, &times)?
            } else {
                let opts = StochasticEvolveOptions { n_traj: cfg.n_particles, dt: h, seed: cfg.seed, exec, ..Default::default() };
                tomographic_evolve_stochastic(&packet, &potential, &x, &p, &opts, &times)?
            };
            if let Some(last) = snaps.last() {
                summary.notes.push(("diverged_fraction".into(), last.diverged_fraction.to_string()));
            }
            for s in snaps {
                emit(tomogram_frame(s, &potential))?;
            }
        }
    }
    Ok(())
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// Runs `cfg`, writes all outputs under `cfg.out_dir` and, when a reference
/// method is configured, runs it into `out_dir/reference` and compares.
pub fn run_scenario(cfg: &RunConfig, exec: Execution) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let dir = cfg.out_dir.clone();
    create_dir(&dir)?;
    let mut summary = RunSummary { out_dir: dir.clone(), ..Default::default() };
    let times = cfg.output_times();
    let last_t = *times.last().expect("at least one output time");

    let ts_path = dir.join(output::TIMESERIES);
    let mut ts = TextFile::create(&ts_path)?;
    ts.line(output::TIMESERIES_HEADER)?;
    let mut files = vec![ts_path];
    let mut rows = 0;
    simulate(cfg, exec, &mut summary, |frame| {
        ts.line(&output::timeseries_row(&frame.record()))?;
        if rows % cfg.files_every == 0 || frame.t == last_t {
            let path = dir.join(output::density_name(frame.t));
            output::write_density(&path, &frame.grid, &frame.density)?;
            files.push(path);
            if let Some(field) = &frame.phase_space {
                let path = dir.join(output::wigner_name(frame.t));
                output::write_matrix(&path, field)?;
                files.push(path);
            }
        }
        rows += 1;
        Ok(())
    })?;
    ts.finish()?;
    summary.rows = rows;
    summary.files = files;
    summary.wall_time = start.elapsed().as_secs_f64();

    let meta_path = dir.join(output::METADATA);
    let mut meta = TextFile::create(&meta_path)?;
    meta.line(&format!("version = {}", env!("CARGO_PKG_VERSION")))?;
    for line in cfg.serialize().lines() {
        meta.line(line)?;
    }
    for (k, v) in &summary.notes {
        meta.line(&format!("{k} = {v}"))?;
    }
    meta.line(&format!("rows = {rows}"))?;
    meta.line(&format!("wall_time_s = {}", summary.wall_time))?;
    meta.finish()?;
    summary.files.push(meta_path);

    if let Some(rcfg) = cfg.reference_config()? {
        let r = run_scenario(&rcfg, exec)?;
        summary.warnings.extend(r.warnings);
        compare_runs(&dir, &rcfg.out_dir, &dir.join(output::COMPARE))?;
    }
    Ok(summary)
}
