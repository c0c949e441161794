//! Run configuration for the experiment binary.
//!
//! A run is described by a command, a problem preset, and overrides. The
//! same `key = value` vocabulary is accepted from a config file and from
//! command-line flags; flags win over the file, the file wins over the
//! preset. The fully resolved configuration round-trips through
//! [`RunConfig::canonical_text`], which is also what gets echoed into every
//! output file header.

use std::fmt;
use std::path::PathBuf;

use crate::error::Error;
use crate::experiments::ErrorMode;
use crate::mesh::MeshFamily;
use crate::sav::Scheme;
use crate::spectral::Bc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Converge,
    Circle,
    Coarsen,
    SingleRun,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Command::Converge => "converge",
            Command::Circle => "circle",
            Command::Coarsen => "coarsen",
            Command::SingleRun => "single-run",
        };
        write!(f, "{name}")
    }
}

/// Experiment presets. `Ex1`/`Ex2` carry manufactured solutions, `Ex3` is
/// the singular-initial-data problem measured against a fine reference run,
/// `Circle` the shrinking-interface benchmark, `Coarsen` the random-data
/// coarsening study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Ex1,
    Ex2,
    Ex3,
    Circle,
    Coarsen,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Problem::Ex1 => "ex1",
            Problem::Ex2 => "ex2",
            Problem::Ex3 => "ex3",
            Problem::Circle => "circle",
            Problem::Coarsen => "coarsen",
        };
        write!(f, "{name}")
    }
}

/// Fully resolved, validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub problem: Problem,
    pub alpha: f64,
    pub eps2: f64,
    pub theta: f64,
    pub c0: f64,
    pub scheme: Scheme,
    pub bc: Bc,
    pub grid_n: usize,
    pub mesh: MeshFamily,
    pub m: usize,
    pub t_end: f64,
    pub mu: f64,
    pub seed: u64,
    pub error_mode: ErrorMode,
    /// Replace the benchmark's sharp disk indicator by a tanh profile.
    pub smooth: bool,
    pub out: PathBuf,
    pub jobs: usize,
}

/// Pending overrides from one source (file or flags). `None` means "keep
/// whatever the lower-precedence layer chose".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub problem: Option<Problem>,
    pub alpha: Option<f64>,
    pub eps2: Option<f64>,
    pub theta: Option<f64>,
    pub c0: Option<f64>,
    pub scheme: Option<Scheme>,
    pub bc: Option<Bc>,
    pub grid_n: Option<usize>,
    pub mesh_kind: Option<MeshKind>,
    pub r: Option<f64>,
    pub dt: Option<f64>,
    pub m: Option<usize>,
    pub t_end: Option<f64>,
    pub mu: Option<f64>,
    pub seed: Option<u64>,
    pub error_mode: Option<ErrorMode>,
    pub smooth: Option<bool>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

/// Mesh family without its parameters; `r` and `dt` arrive separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    Uniform,
    Graded,
    Composite,
}

fn config_err(msg: String) -> Error {
    Error::Config(msg)
}

pub fn parse_command(s: &str) -> Result<Command, Error> {
    match s {
        "converge" => Ok(Command::Converge),
        "circle" => Ok(Command::Circle),
        "coarsen" => Ok(Command::Coarsen),
        "single-run" => Ok(Command::SingleRun),
        _ => Err(config_err(format!(
            "unknown command '{s}'; expected converge, circle, coarsen, or single-run"
        ))),
    }
}

pub fn parse_problem(s: &str) -> Result<Problem, Error> {
    match s {
        "ex1" => Ok(Problem::Ex1),
        "ex2" => Ok(Problem::Ex2),
        "ex3" => Ok(Problem::Ex3),
        "circle" => Ok(Problem::Circle),
        "coarsen" => Ok(Problem::Coarsen),
        _ => Err(config_err(format!(
            "unknown problem '{s}'; expected ex1, ex2, ex3, circle, or coarsen"
        ))),
    }
}

pub fn parse_scheme(s: &str) -> Result<Scheme, Error> {
    match s {
        "l1" => Ok(Scheme::L1),
        "l1cn" => Ok(Scheme::L1Cn),
        _ => Err(config_err(format!("unknown scheme '{s}'; expected l1 or l1cn"))),
    }
}

pub fn parse_bc(s: &str) -> Result<Bc, Error> {
    match s {
        "periodic" => Ok(Bc::Periodic),
        "neumann" => Ok(Bc::Neumann),
        _ => Err(config_err(format!("unknown bc '{s}'; expected periodic or neumann"))),
    }
}

pub fn parse_mesh_kind(s: &str) -> Result<MeshKind, Error> {
    match s {
        "uniform" => Ok(MeshKind::Uniform),
        "graded" => Ok(MeshKind::Graded),
        "composite" => Ok(MeshKind::Composite),
        _ => Err(config_err(format!(
            "unknown mesh '{s}'; expected uniform, graded, or composite"
        ))),
    }
}

pub fn parse_error_mode(s: &str) -> Result<ErrorMode, Error> {
    match s {
        "max" => Ok(ErrorMode::Max),
        "final" => Ok(ErrorMode::Final),
        _ => Err(config_err(format!("unknown error-mode '{s}'; expected max or final"))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, Error> {
    value
        .parse()
        .map_err(|_| config_err(format!("malformed value '{value}' for {key}")))
}

impl Overrides {
    /// Apply one `key = value` pair. Shared by the config-file reader and
    /// the flag layer so both speak exactly the same vocabulary.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        match key {
            "problem" => self.problem = Some(parse_problem(value)?),
            "alpha" => self.alpha = Some(parse_num(key, value)?),
            "eps2" => self.eps2 = Some(parse_num(key, value)?),
            "theta" => self.theta = Some(parse_num(key, value)?),
            "c0" => self.c0 = Some(parse_num(key, value)?),
            "scheme" => self.scheme = Some(parse_scheme(value)?),
            "bc" => self.bc = Some(parse_bc(value)?),
            "grid" => self.grid_n = Some(parse_num(key, value)?),
            "mesh" => self.mesh_kind = Some(parse_mesh_kind(value)?),
            "r" => self.r = Some(parse_num(key, value)?),
            "dt" => self.dt = Some(parse_num(key, value)?),
            "m" => self.m = Some(parse_num(key, value)?),
            "t" => self.t_end = Some(parse_num(key, value)?),
            "mu" => self.mu = Some(parse_num(key, value)?),
            "seed" => self.seed = Some(parse_num(key, value)?),
            "error_mode" => self.error_mode = Some(parse_error_mode(value)?),
            "smooth" => self.smooth = Some(parse_num(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "jobs" => self.jobs = Some(parse_num(key, value)?),
            _ => return Err(config_err(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Parse line-oriented `key = value` text. Blank lines and lines
    /// starting with '#' are skipped. The `command` key is accepted so the
    /// canonical echo of a previous run can be replayed as a config file.
    ///
    /// Output CSVs stamp `# tfac <version>` on their first line and echo the
    /// resolved configuration as `# key = value` header lines. A file opening
    /// with that stamp is read in replay mode: header lines are unwrapped and
    /// parsing stops where the data rows begin, so any output file doubles as
    /// a config file reproducing its run.
    pub fn from_file_text(text: &str) -> Result<(Overrides, Option<Command>), Error> {
        let mut ov = Overrides::default();
        let mut command = None;
        let replay = text
            .lines()
            .find(|l| !l.trim().is_empty())
            .is_some_and(|l| l.trim().starts_with("# tfac"));
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let line = if replay {
                if let Some(rest) = line.strip_prefix('#') {
                    let rest = rest.trim();
                    if !rest.contains('=') {
                        continue;
                    }
                    rest
                } else if line.contains('=') {
                    line
                } else {
                    break;
                }
            } else if line.starts_with('#') {
                continue;
            } else {
                line
            };
            let (key, value) = line.split_once('=').ok_or_else(|| {
                config_err(format!("line {}: expected 'key = value', got '{line}'", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key == "command" {
                command = Some(parse_command(value)?);
            } else {
                ov.set(key, value)?;
            }
        }
        Ok((ov, command))
    }

    fn merge_over(&self, base: &mut Overrides) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { base.$field = Some(v.clone()); })*
            };
        }
        take!(
            problem, alpha, eps2, theta, c0, scheme, bc, grid_n, mesh_kind, r, dt, m,
            t_end, mu, seed, error_mode, smooth, out, jobs
        );
    }
}

struct Preset {
    alpha: f64,
    eps2: f64,
    scheme: Scheme,
    bc: Bc,
    grid_n: usize,
    mesh_kind: MeshKind,
    r: f64,
    dt: f64,
    m: usize,
    t_end: f64,
    mu: f64,
    error_mode: ErrorMode,
}

/// Defaults reproducing the headline runs of each experiment.
fn preset(problem: Problem) -> Preset {
    match problem {
        Problem::Ex1 => Preset {
            alpha: 0.5,
            eps2: 1.0,
            scheme: Scheme::L1,
            bc: Bc::Periodic,
            grid_n: 32,
            mesh_kind: MeshKind::Uniform,
            r: 1.0,
            dt: 0.0,
            m: 256,
            t_end: 1.0,
            mu: 5.0,
            error_mode: ErrorMode::Max,
        },
        Problem::Ex2 => Preset {
            alpha: 0.9,
            eps2: 0.1,
            scheme: Scheme::L1Cn,
            bc: Bc::Neumann,
            grid_n: 32,
            mesh_kind: MeshKind::Graded,
            r: 2.0,
            dt: 0.0,
            m: 1024,
            t_end: 1.0,
            mu: 0.9,
            error_mode: ErrorMode::Max,
        },
        Problem::Ex3 => Preset {
            alpha: 0.7,
            eps2: 0.01,
            scheme: Scheme::L1Cn,
            bc: Bc::Neumann,
            grid_n: 64,
            mesh_kind: MeshKind::Graded,
            r: 1.0,
            dt: 0.0,
            m: 128,
            t_end: 0.5,
            mu: 0.9,
            error_mode: ErrorMode::Max,
        },
        Problem::Circle => Preset {
            alpha: 1.0,
            eps2: 0.0313 * 0.0313,
            scheme: Scheme::L1Cn,
            bc: Bc::Neumann,
            grid_n: 128,
            mesh_kind: MeshKind::Composite,
            r: 1.0,
            dt: 0.01,
            m: 100,
            t_end: 40.0,
            mu: 0.9,
            error_mode: ErrorMode::Final,
        },
        Problem::Coarsen => Preset {
            alpha: 1.0,
            eps2: 0.001,
            scheme: Scheme::L1Cn,
            bc: Bc::Neumann,
            grid_n: 128,
            mesh_kind: MeshKind::Composite,
            r: 1.0,
            dt: 0.01,
            m: 100,
            t_end: 100.0,
            mu: 0.9,
            error_mode: ErrorMode::Final,
        },
    }
}

/// Resolve command, optional config-file text, and flag overrides into a
/// validated `RunConfig`. Precedence: preset < file < flags.
pub fn resolve(
    command: Command,
    file: Option<&str>,
    flags: &Overrides,
) -> Result<RunConfig, Error> {
    let mut merged = Overrides::default();
    if let Some(text) = file {
        let (file_ov, _) = Overrides::from_file_text(text)?;
        file_ov.merge_over(&mut merged);
    }
    flags.merge_over(&mut merged);

    let problem = merged.problem.unwrap_or(match command {
        Command::Converge => Problem::Ex1,
        Command::Circle => Problem::Circle,
        Command::Coarsen => Problem::Coarsen,
        Command::SingleRun => Problem::Ex3,
    });
    let p = preset(problem);

    let alpha = merged.alpha.unwrap_or(p.alpha);
    let eps2 = merged.eps2.unwrap_or(p.eps2);
    let theta = merged.theta.unwrap_or(eps2);
    let c0 = merged.c0.unwrap_or(0.0);
    let mesh_kind = merged.mesh_kind.unwrap_or(p.mesh_kind);
    // Composite presets grade the startup interval by (2 - alpha) / alpha,
    // which collapses to uniform when alpha = 1.
    let r_default = if p.mesh_kind == MeshKind::Composite && merged.r.is_none() {
        (2.0 - alpha) / alpha
    } else {
        p.r
    };
    let r = merged.r.unwrap_or(r_default);
    let dt = merged.dt.unwrap_or(p.dt);
    let mesh = match mesh_kind {
        MeshKind::Uniform => MeshFamily::Uniform,
        MeshKind::Graded => MeshFamily::Graded { r },
        MeshKind::Composite => MeshFamily::Composite { r, dt },
    };

    let cfg = RunConfig {
        command,
        problem,
        alpha,
        eps2,
        theta,
        c0,
        scheme: merged.scheme.unwrap_or(p.scheme),
        bc: merged.bc.unwrap_or(p.bc),
        grid_n: merged.grid_n.unwrap_or(p.grid_n),
        mesh,
        m: merged.m.unwrap_or(p.m),
        t_end: merged.t_end.unwrap_or(p.t_end),
        mu: merged.mu.unwrap_or(p.mu),
        seed: merged.seed.unwrap_or(0),
        error_mode: merged.error_mode.unwrap_or(p.error_mode),
        smooth: merged.smooth.unwrap_or(false),
        out: merged
            .out
            .unwrap_or_else(|| PathBuf::from(format!("{problem}_{command}.csv"))),
        jobs: merged.jobs.unwrap_or(1),
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Every constraint is checked here, before any computation starts.
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(config_err(format!(
                "alpha = {} rejected; the fractional order must lie in (0, 1]",
                self.alpha
            )));
        }
        if self.eps2 <= 0.0 {
            return Err(config_err(format!("eps2 = {} rejected; must be positive", self.eps2)));
        }
        if !(0.0..=self.eps2).contains(&self.theta) {
            return Err(config_err(format!(
                "theta = {} rejected; must satisfy 0 <= theta <= eps2 = {}",
                self.theta, self.eps2
            )));
        }
        if self.c0 < 0.0 {
            return Err(config_err(format!("c0 = {} rejected; must be nonnegative", self.c0)));
        }
        match self.mesh {
            MeshFamily::Uniform => {}
            MeshFamily::Graded { r } | MeshFamily::Composite { r, .. } => {
                if r < 1.0 {
                    return Err(config_err(format!(
                        "mesh grading r = {r} rejected; must be at least 1"
                    )));
                }
            }
        }
        if let MeshFamily::Composite { dt, .. } = self.mesh {
            if dt <= 0.0 {
                return Err(config_err(format!("dt = {dt} rejected; must be positive")));
            }
        }
        if self.grid_n < 4 {
            return Err(config_err(format!(
                "grid = {} rejected; need at least 4 points per direction",
                self.grid_n
            )));
        }
        if self.m == 0 {
            return Err(config_err("m = 0 rejected; need at least one time step".into()));
        }
        if self.command == Command::Converge && (self.m < 16 || self.m % 16 != 0) {
            return Err(config_err(format!(
                "m = {} rejected for converge; the ladder runs m/16, m/8, ..., m, so m must be a multiple of 16",
                self.m
            )));
        }
        if self.t_end <= 0.0 {
            return Err(config_err(format!("t = {} rejected; must be positive", self.t_end)));
        }
        if self.mu <= 0.0 {
            return Err(config_err(format!("mu = {} rejected; must be positive", self.mu)));
        }
        if self.jobs == 0 {
            return Err(config_err("jobs = 0 rejected; need at least one worker".into()));
        }
        Ok(())
    }

    /// The refinement ladder run by the converge command.
    pub fn m_ladder(&self) -> Vec<usize> {
        (0..5).map(|k| self.m >> (4 - k)).collect()
    }

    /// Canonical `key = value` form. Parsing this text back as a config
    /// file reproduces the same resolved configuration.
    pub fn canonical_text(&self) -> String {
        let mut lines = vec![
            format!("command = {}", self.command),
            format!("problem = {}", self.problem),
            format!("alpha = {}", self.alpha),
            format!("eps2 = {}", self.eps2),
            format!("theta = {}", self.theta),
            format!("c0 = {}", self.c0),
            format!("scheme = {}", self.scheme),
            format!("bc = {}", self.bc),
            format!("grid = {}", self.grid_n),
        ];
        match self.mesh {
            MeshFamily::Uniform => lines.push("mesh = uniform".into()),
            MeshFamily::Graded { r } => {
                lines.push("mesh = graded".into());
                lines.push(format!("r = {r}"));
            }
            MeshFamily::Composite { r, dt } => {
                lines.push("mesh = composite".into());
                lines.push(format!("r = {r}"));
                lines.push(format!("dt = {dt}"));
            }
        }
        lines.push(format!("m = {}", self.m));
        lines.push(format!("t = {}", self.t_end));
        if self.problem == Problem::Ex2 {
            lines.push(format!("mu = {}", self.mu));
        }
        if matches!(self.problem, Problem::Coarsen) {
            lines.push(format!("seed = {}", self.seed));
        }
        if matches!(self.problem, Problem::Circle) {
            lines.push(format!("smooth = {}", self.smooth));
        }
        let mode = match self.error_mode {
            ErrorMode::Max => "max",
            ErrorMode::Final => "final",
        };
        lines.push(format!("error_mode = {mode}"));
        lines.push(format!("out = {}", self.out.display()));
        lines.push(format!("jobs = {}", self.jobs));
        lines.join("\n")
    }
}
