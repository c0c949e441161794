//! Experiment drivers: convergence studies with exact or fine-run
//! references, interface-radius tracking for the shrinking-disk benchmark,
//! and energy-trace collection for long coarsening runs.

use std::sync::Arc;

use crate::error::Error;
use crate::mesh::{MeshFamily, TimeMesh};
use crate::models::{InitialCondition, ManufacturedSolution};
use crate::sav::{init_state, EnergyRecord, SavState, Scheme, SchemeConfig};
use crate::spectral::{Field, Grid};

/// How a run's error against the reference is condensed to one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMode {
    /// max over steps n >= 1 of ||phi^n - reference(t_n)||_inf.
    Max,
    /// ||phi^M - reference(T)||_inf.
    Final,
}

#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRow {
    pub m: usize,
    pub tau_max: f64,
    pub error: f64,
    /// log(e_prev/e) / log(tau_prev/tau) against the previous row.
    pub order: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    fn push(&mut self, m: usize, tau_max: f64, error: f64) {
        let order = self.rows.last().map(|p| {
            (p.error / error).ln() / (p.tau_max / tau_max).ln()
        });
        self.rows.push(ConvergenceRow { m, tau_max, error, order });
    }

    /// Assemble a report from `(m, tau_max, error)` triples computed
    /// elsewhere, filling in the pairwise observed orders.
    pub fn from_errors(triples: Vec<(usize, f64, f64)>) -> ConvergenceReport {
        let mut report = ConvergenceReport { rows: Vec::new() };
        for (m, tau_max, error) in triples {
            report.push(m, tau_max, error);
        }
        report
    }

    /// Least-squares slope of log(error) against log(tau_max) over the last
    /// `last` rows (all rows if larger).
    pub fn ls_order(&self, last: usize) -> f64 {
        let k = last.min(self.rows.len());
        assert!(k >= 2, "order fit needs at least two rows");
        let rows = &self.rows[self.rows.len() - k..];
        let xs: Vec<f64> = rows.iter().map(|r| r.tau_max.ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.error.ln()).collect();
        least_squares_slope(&xs, &ys)
    }
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert!(xs.len() == ys.len() && xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

fn max_abs_diff(a: &Field, b: &Field) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .fold(0.0, |m, (&x, &y)| m.max((x - y).abs()))
}

/// Full run of one scheme against a manufactured solution; returns the
/// condensed max-norm error.
pub fn solve_manufactured(
    sol: ManufacturedSolution,
    grid: &Arc<Grid>,
    base: &SchemeConfig,
    mesh: &TimeMesh,
    mode: ErrorMode,
) -> Result<f64, Error> {
    let mut cfg = base.clone();
    cfg.source = Some(sol);
    let phi0 = sol.phi(grid, mesh.node(0));
    let mut state = init_state(phi0, &cfg)?;
    let mut worst = 0.0f64;
    for n in 0..mesh.num_steps() {
        state.step(mesh, &cfg)?;
        if mode == ErrorMode::Max || n + 1 == mesh.num_steps() {
            let exact = sol.phi(grid, mesh.node(n + 1));
            worst = worst.max(max_abs_diff(state.phi(), &exact));
        }
    }
    Ok(worst)
}

/// Error ladder over `m_list` time meshes of one family, errors measured
/// against the exact manufactured solution.
pub fn convergence_manufactured(
    sol: ManufacturedSolution,
    grid: &Arc<Grid>,
    base: &SchemeConfig,
    t_end: f64,
    family: MeshFamily,
    m_list: &[usize],
    mode: ErrorMode,
) -> Result<ConvergenceReport, Error> {
    let mut report = ConvergenceReport { rows: Vec::new() };
    for &m in m_list {
        let mesh = TimeMesh::with_family(family, t_end, m)?;
        let error = solve_manufactured(sol, grid, base, &mesh, mode)?;
        report.push(m, mesh.tau_max(), error);
    }
    Ok(report)
}

/// Error ladder for a problem without an exact solution. The reference is a
/// fine run on the same grid: L1-CN scheme, graded mesh with exponent
/// `ref_r`, `ref_multiplier` times the largest tested M. The reference
/// trajectory is sampled at the coarse time nodes by linear interpolation
/// between its own steps, so `ErrorMode::Max` compares whole histories,
/// not just the final fields.
pub fn convergence_self_reference(
    ic: InitialCondition,
    seed: u64,
    grid: &Arc<Grid>,
    base: &SchemeConfig,
    t_end: f64,
    family: MeshFamily,
    m_list: &[usize],
    ref_r: f64,
    ref_multiplier: usize,
    mode: ErrorMode,
) -> Result<ConvergenceReport, Error> {
    assert!(!m_list.is_empty());
    let meshes = m_list
        .iter()
        .map(|&m| TimeMesh::with_family(family, t_end, m))
        .collect::<Result<Vec<_>, _>>()?;

    // Comparison instants, deduplicated. Power-of-two ladders of one family
    // share many nodes bitwise, so exact dedup already collapses most of them.
    let mut targets: Vec<f64> = Vec::new();
    for mesh in &meshes {
        match mode {
            ErrorMode::Max => targets.extend(&mesh.nodes()[1..]),
            ErrorMode::Final => targets.push(mesh.t_end()),
        }
    }
    targets.sort_by(|a, b| a.partial_cmp(b).unwrap());
    targets.dedup();

    let m_ref = ref_multiplier * m_list.iter().copied().max().unwrap();
    let mut ref_cfg = base.clone();
    ref_cfg.scheme = Scheme::L1Cn;
    ref_cfg.source = None;
    let ref_mesh = TimeMesh::graded(t_end, m_ref, ref_r)?;
    let phi0 = ic.field(grid, seed);
    let captured = capture_reference(&phi0, &ref_cfg, &ref_mesh, &targets)?;

    let mut cfg = base.clone();
    cfg.source = None;
    let mut report = ConvergenceReport { rows: Vec::new() };
    for mesh in &meshes {
        let mut state = init_state(phi0.clone(), &cfg)?;
        let mut error = 0.0f64;
        for n in 0..mesh.num_steps() {
            state.step(mesh, &cfg)?;
            let t = mesh.node(n + 1);
            if mode == ErrorMode::Final && t < mesh.t_end() {
                continue;
            }
            let k = targets
                .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
                .expect("coarse node missing from reference capture");
            error = error.max(max_abs_diff(state.phi(), &captured[k]));
        }
        report.push(mesh.num_steps(), mesh.tau_max(), error);
    }
    Ok(report)
}

/// Step the reference run and record its (linearly interpolated) state at
/// each requested instant. `targets` must be sorted ascending and lie within
/// the mesh span.
fn capture_reference(
    phi0: &Field,
    cfg: &SchemeConfig,
    mesh: &TimeMesh,
    targets: &[f64],
) -> Result<Vec<Field>, Error> {
    let mut state = init_state(phi0.clone(), cfg)?;
    let mut captured = Vec::with_capacity(targets.len());
    let mut next = 0;
    for n in 0..mesh.num_steps() {
        let (t_prev, t_cur) = (mesh.node(n), mesh.node(n + 1));
        state.step(mesh, cfg)?;
        while next < targets.len() && targets[next] <= t_cur {
            let w = (targets[next] - t_prev) / (t_cur - t_prev);
            let blend: Vec<f64> = state
                .phi_prev()
                .values()
                .iter()
                .zip(state.phi().values())
                .map(|(a, b)| a + w * (b - a))
                .collect();
            captured.push(Field::from_values(state.grid(), blend));
            next += 1;
        }
    }
    assert_eq!(next, targets.len(), "targets extend past the reference mesh");
    Ok(captured)
}

/// Energy trace plus whatever the observer collects.
pub struct TransientRun {
    /// Records at step 0 and after every step.
    pub records: Vec<EnergyRecord>,
    pub min_sigma: f64,
    pub state: SavState,
}

/// Drive a full run, recording energies and calling `observe(step, t, state)`
/// at step 0 and after each completed step.
pub fn run_transient(
    phi0: Field,
    cfg: &SchemeConfig,
    mesh: &TimeMesh,
    mut observe: impl FnMut(usize, f64, &SavState),
) -> Result<TransientRun, Error> {
    let mut state = init_state(phi0, cfg)?;
    let mut records = Vec::with_capacity(mesh.num_steps() + 1);
    records.push(state.energy_record(mesh.node(0), cfg));
    observe(0, mesh.node(0), &state);
    let mut min_sigma = f64::INFINITY;
    for n in 0..mesh.num_steps() {
        let info = state.step(mesh, cfg)?;
        min_sigma = min_sigma.min(info.sigma);
        let t = mesh.node(n + 1);
        records.push(state.energy_record(t, cfg));
        observe(n + 1, t, &state);
    }
    Ok(TransientRun { records, min_sigma, state })
}

/// Zero-level radius of a roughly radial field, measured along grid-axis
/// rays from the domain center by linear interpolation between the two
/// straddling nodes. Returns 0 once the field is nonpositive along the ray,
/// and caps at the half-width if the zero set has left the domain.
pub fn extract_radius(f: &Field) -> f64 {
    radius_on_rays(f, 1)
}

/// Mean over the four axis rays; more robust when the interface wobbles.
pub fn extract_radius_four_ray(f: &Field) -> f64 {
    radius_on_rays(f, 4)
}

fn radius_on_rays(f: &Field, rays: usize) -> f64 {
    let grid = f.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let (x0, x1, y0, y1) = grid.domain();
    let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let row = ny / 2;
    let col = nx / 2;

    let sample_x = |i: usize| (grid.x(i), f.values()[i * ny + row]);
    let sample_y = |j: usize| (grid.y(j), f.values()[col * ny + j]);

    let mut total = 0.0;
    let mut count = 0;
    let mut add = |r: f64| {
        total += r;
        count += 1;
    };

    add(ray_radius((nx / 2..nx).map(sample_x), cx, x1 - cx));
    if rays == 4 {
        add(ray_radius((0..nx / 2).rev().map(sample_x), cx, cx - x0));
        add(ray_radius((ny / 2..ny).map(sample_y), cy, y1 - cy));
        add(ray_radius((0..ny / 2).rev().map(sample_y), cy, cy - y0));
    }
    total / count as f64
}

/// Walk outward along one ray of (coordinate, value) samples; the radius is
/// the interpolated zero crossing from positive to nonpositive.
fn ray_radius(samples: impl Iterator<Item = (f64, f64)>, center: f64, cap: f64) -> f64 {
    let mut prev: Option<(f64, f64)> = None;
    for (x, v) in samples {
        match prev {
            None => {
                if v <= 0.0 {
                    return 0.0;
                }
            }
            Some((px, pv)) => {
                if v <= 0.0 {
                    let root = px + (x - px) * pv / (pv - v);
                    return (root - center).abs();
                }
            }
        }
        prev = Some((x, v));
    }
    cap
}

#[derive(Debug, Clone, Copy)]
pub struct RadiusSample {
    pub t: f64,
    pub r: f64,
    pub r_sq: f64,
}

/// Interface radius over time, in original (unscaled) units.
#[derive(Debug, Clone)]
pub struct RadiusTrace {
    pub rows: Vec<RadiusSample>,
}

impl RadiusTrace {
    /// Least-squares slope of r^2 against t over samples with t in
    /// [t_lo, t_hi] and r above `r_floor` (fitting past the disk's
    /// disappearance would drag the slope toward zero).
    pub fn fit_r_sq_slope(&self, t_lo: f64, t_hi: f64, r_floor: f64) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|s| s.t >= t_lo && s.t <= t_hi && s.r > r_floor)
            .map(|s| (s.t, s.r_sq))
            .collect();
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        least_squares_slope(&xs, &ys)
    }

    pub fn radius_at(&self, t: f64) -> f64 {
        self.rows
            .iter()
            .min_by(|a, b| (a.t - t).abs().partial_cmp(&(b.t - t).abs()).unwrap())
            .map(|s| s.r)
            .unwrap()
    }
}

/// Shrinking-disk benchmark on the unit-scaled Neumann square. The disk of
/// scaled radius r0 evolves under the L1-CN scheme on a composite mesh
/// (graded with exponent (2 - alpha)/alpha on [0, 1], uniform dt after);
/// radii are reported multiplied by `unit_scale` to undo the domain scaling.
#[derive(Debug, Clone)]
pub struct DiskBenchmark {
    pub alpha: f64,
    pub grid_n: usize,
    pub m_graded: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Interface parameter; eps2 = eps^2.
    pub eps: f64,
    pub r0: f64,
    pub unit_scale: f64,
    pub smooth_interface: bool,
    pub four_ray: bool,
    pub theta: Option<f64>,
    pub c0: f64,
    /// Startup grading exponent; `None` picks (2 - alpha) / alpha.
    pub graded_r: Option<f64>,
}

impl DiskBenchmark {
    pub fn new(alpha: f64) -> DiskBenchmark {
        DiskBenchmark {
            alpha,
            grid_n: 128,
            m_graded: 100,
            dt: 0.01,
            t_end: 40.0,
            eps: 0.0313,
            r0: 0.25,
            unit_scale: 32.0,
            smooth_interface: false,
            four_ray: false,
            theta: None,
            c0: 0.0,
            graded_r: None,
        }
    }

    pub fn grading_exponent(&self) -> f64 {
        self.graded_r.unwrap_or((2.0 - self.alpha) / self.alpha)
    }

    pub fn run(&self) -> Result<(RadiusTrace, Vec<EnergyRecord>), Error> {
        let grid = Grid::square(crate::spectral::Bc::Neumann, self.grid_n, -1.0, 1.0);
        let mesh = TimeMesh::composite(self.t_end, self.m_graded, self.grading_exponent(), self.dt)?;
        let eps2 = self.eps * self.eps;
        let mut cfg = SchemeConfig::new(Scheme::L1Cn, self.alpha, eps2);
        if let Some(theta) = self.theta {
            cfg.theta = theta;
        }
        cfg.c0 = self.c0;
        let interface = if self.smooth_interface { Some(self.eps) } else { None };
        let phi0 = InitialCondition::Disk { radius: self.r0, interface }.field(&grid, 0);

        let mut rows = Vec::with_capacity(mesh.num_steps() + 1);
        let four_ray = self.four_ray;
        let scale = self.unit_scale;
        let run = run_transient(phi0, &cfg, &mesh, |_, t, state| {
            let r = if four_ray {
                extract_radius_four_ray(state.phi())
            } else {
                extract_radius(state.phi())
            } * scale;
            rows.push(RadiusSample { t, r, r_sq: r * r });
        })?;
        Ok((RadiusTrace { rows }, run.records))
    }
}

/// Random-start coarsening run on the Neumann square: seeded uniform noise,
/// composite mesh, snapshots of the field at requested times.
#[derive(Debug, Clone)]
pub struct CoarseningRun {
    pub alpha: f64,
    pub grid_n: usize,
    pub m_graded: usize,
    pub dt: f64,
    pub t_end: f64,
    pub eps2: f64,
    pub amplitude: f64,
    pub seed: u64,
    pub snapshot_times: Vec<f64>,
    /// Startup grading exponent; `None` picks (2 - alpha) / alpha.
    pub graded_r: Option<f64>,
}

impl CoarseningRun {
    pub fn new(alpha: f64, seed: u64) -> CoarseningRun {
        CoarseningRun {
            alpha,
            grid_n: 128,
            m_graded: 100,
            dt: 0.01,
            t_end: 100.0,
            eps2: 0.001,
            amplitude: 0.05,
            seed,
            snapshot_times: vec![0.0, 2.0, 5.0, 20.0, 50.0, 80.0, 100.0],
            graded_r: None,
        }
    }

    pub fn grading_exponent(&self) -> f64 {
        self.graded_r.unwrap_or((2.0 - self.alpha) / self.alpha)
    }

    pub fn run(&self) -> Result<(Vec<EnergyRecord>, Vec<(f64, Field)>, f64), Error> {
        let grid = Grid::square(crate::spectral::Bc::Neumann, self.grid_n, -1.0, 1.0);
        let mesh = TimeMesh::composite(self.t_end, self.m_graded, self.grading_exponent(), self.dt)?;
        let cfg = SchemeConfig::new(Scheme::L1Cn, self.alpha, self.eps2);
        let phi0 = InitialCondition::RandomUniform { amplitude: self.amplitude }
            .field(&grid, self.seed);

        let mut wanted: Vec<f64> = self
            .snapshot_times
            .iter()
            .copied()
            .filter(|&t| t <= self.t_end + 1e-12)
            .collect();
        wanted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut snapshots: Vec<(f64, Field)> = Vec::new();
        let mut next = 0usize;
        let run = run_transient(phi0, &cfg, &mesh, |_, t, state| {
            while next < wanted.len() && t >= wanted[next] - 1e-12 {
                snapshots.push((t, state.phi().clone()));
                next += 1;
            }
        })?;
        Ok((run.records, snapshots, run.min_sigma))
    }
}
