//! Time steppers for the scalar-auxiliary-variable (SAV) formulation.
//!
//! The equation D^alpha phi - eps2 Lap phi + F'(phi) = s is rewritten with
//! an auxiliary scalar R(t) = sqrt(E_theta(phi) + C0), where
//! E_theta(phi) = integral of (theta/2)|grad phi|^2 + F(phi) and
//! 0 <= theta <= eps2. The nonlinear part gamma = -theta Lap phi + F'(phi)
//! enters the discrete schemes through R/sqrt(E_theta + C0), which lets each
//! step reduce to two constant-coefficient Helmholtz solves plus a scalar
//! update, while a discrete energy stays bounded by its initial value for
//! any step size.
//!
//! Two schemes share this structure:
//! - `Scheme::L1`: backward-Euler-like, first-order accurate, history term
//!   from the L1 stencil at t_{n+1};
//! - `Scheme::L1Cn`: Crank-Nicolson-like, order 2 - alpha, kernel centered
//!   at t_{n+1/2} with an extrapolated midpoint field in the nonlinearity.
//!
//! Both degenerate to the classical integer-order schemes at alpha = 1
//! because the stencil weights collapse to the single leading one.

use std::sync::Arc;

use crate::error::Error;
use crate::mesh::{l1cn_weights, l1_weights, TimeMesh};
use crate::models::{ManufacturedSolution, Potential};
use crate::spectral::{solve_helmholtz, Field, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    L1,
    L1Cn,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::L1 => write!(f, "l1"),
            Scheme::L1Cn => write!(f, "l1cn"),
        }
    }
}

/// Everything a step needs besides the evolving state.
#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub alpha: f64,
    pub eps2: f64,
    /// Splitting parameter of the auxiliary energy, in [0, eps2].
    pub theta: f64,
    /// Constant shift keeping E_theta + c0 positive.
    pub c0: f64,
    pub potential: Potential,
    /// Manufactured forcing; evaluated at t_{n+1} (L1) or t_{n+1/2} (L1-CN).
    pub source: Option<ManufacturedSolution>,
    /// Apply the 2/3 rule to the pointwise nonlinearity inside gamma.
    pub dealias: bool,
}

impl SchemeConfig {
    /// Defaults: theta = eps2, c0 = 0, double well, no source, no dealiasing.
    pub fn new(scheme: Scheme, alpha: f64, eps2: f64) -> SchemeConfig {
        SchemeConfig {
            scheme,
            alpha,
            eps2,
            theta: eps2,
            c0: 0.0,
            potential: Potential::DoubleWell,
            source: None,
            dealias: false,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.eps2 > 0.0) {
            return Err(Error::Config(format!("eps2 must be positive, got {}", self.eps2)));
        }
        if !(self.theta >= 0.0 && self.theta <= self.eps2) {
            return Err(Error::Config(format!(
                "theta must lie in [0, eps2] = [0, {}], got {}",
                self.eps2, self.theta
            )));
        }
        if !(self.c0 >= 0.0) {
            return Err(Error::Config(format!("c0 must be nonnegative, got {}", self.c0)));
        }
        Ok(())
    }
}

/// E(phi) = integral of (eps2/2)|grad phi|^2 + F(phi). Recorded for every
/// run but not monotone in general; only the modified energy is.
pub fn original_energy(phi: &Field, cfg: &SchemeConfig) -> f64 {
    0.5 * cfg.eps2 * phi.grad_norm_sq() + phi.integrate_nodal(|u| cfg.potential.f(u))
}

/// E_theta(phi) = integral of (theta/2)|grad phi|^2 + F(phi); the quantity
/// under the auxiliary square root.
pub fn energy_theta(phi: &Field, cfg: &SchemeConfig) -> f64 {
    0.5 * cfg.theta * phi.grad_norm_sq() + phi.integrate_nodal(|u| cfg.potential.f(u))
}

/// One row of the energy trace CSV.
#[derive(Debug, Clone, Copy)]
pub struct EnergyRecord {
    pub step: usize,
    pub t: f64,
    pub e: f64,
    pub e_mod: f64,
    pub r: f64,
}

/// Per-step diagnostics surfaced to callers.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    /// The scalar sigma = (gamma, A^-1 gamma) / (2 or 4 S^2); nonnegative
    /// because A is positive definite.
    pub sigma: f64,
}

/// Evolving solver state after `n` completed steps.
pub struct SavState {
    n: usize,
    phi: Field,
    phi_prev: Field,
    r: f64,
    /// Difference quotients (phi^{k+1} - phi^k) / dt_{k+1} for k < n; the
    /// weights multiply these directly, and storing quotients instead of
    /// snapshots is algebraically identical.
    rates: Vec<Field>,
}

impl SavState {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phi(&self) -> &Field {
        &self.phi
    }

    pub fn phi_prev(&self) -> &Field {
        &self.phi_prev
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.phi.grid()
    }

    /// Discrete energy the stability theory bounds by its step-0 value:
    /// L1:    (eps2-theta)/2 |grad phi|^2 + R^2;
    /// L1-CN: (eps2-theta)/2 |grad phi|^2 + theta/4 |grad (phi - phi_prev)|^2 + R^2.
    pub fn modified_energy(&self, cfg: &SchemeConfig) -> f64 {
        let base = 0.5 * (cfg.eps2 - cfg.theta) * self.phi.grad_norm_sq() + self.r * self.r;
        match cfg.scheme {
            Scheme::L1 => base,
            Scheme::L1Cn => {
                let mut diff = self.phi.clone();
                for (d, &p) in diff.values_mut().iter_mut().zip(self.phi_prev.values()) {
                    *d -= p;
                }
                base + 0.25 * cfg.theta * diff.grad_norm_sq()
            }
        }
    }

    pub fn energy_record(&self, t: f64, cfg: &SchemeConfig) -> EnergyRecord {
        EnergyRecord {
            step: self.n,
            t,
            e: original_energy(&self.phi, cfg),
            e_mod: self.modified_energy(cfg),
            r: self.r,
        }
    }

    /// Advance from step n to n+1. The mesh supplies t_n, t_{n+1} and the
    /// stencil weights; the state must have been produced by `init_state`
    /// and stepped with this same mesh throughout.
    pub fn step(&mut self, mesh: &TimeMesh, cfg: &SchemeConfig) -> Result<StepInfo, Error> {
        let n = self.n;
        assert!(n < mesh.num_steps(), "mesh exhausted at step {n}");
        match cfg.scheme {
            Scheme::L1 => self.step_l1(mesh, cfg),
            Scheme::L1Cn => self.step_l1cn(mesh, cfg),
        }
    }

    fn step_l1(&mut self, mesh: &TimeMesh, cfg: &SchemeConfig) -> Result<StepInfo, Error> {
        let n = self.n;
        let grid = self.phi.grid().clone();
        let dt = mesh.step(n + 1);
        let weights = l1_weights(mesh, n, cfg.alpha);
        let lead = weights.values[0] / dt;

        let s2 = energy_theta(&self.phi, cfg) + cfg.c0;
        let s = positive_sqrt(s2, n, cfg.c0)?;
        let lap_phi = self.phi.laplacian();
        let gamma = self.nonlinear_part(&lap_phi, &self.phi.clone(), cfg);

        // Right side of A phi^{n+1} + ((gamma, phi^{n+1}) / 2S^2) gamma = g:
        // the explicit parts of the stencil, the lagged theta-diffusion, the
        // known half of the auxiliary update, and the forcing.
        let gamma_phi = gamma.inner(&self.phi);
        let coef = self.r / s - gamma_phi / (2.0 * s2);
        let mut g = vec![0.0; grid.len()];
        for (i, gv) in g.iter_mut().enumerate() {
            *gv = lead * self.phi.values()[i]
                - cfg.theta * lap_phi.values()[i]
                - coef * gamma.values()[i];
        }
        self.accumulate_history(&weights.values, &mut g);
        if let Some(sol) = &cfg.source {
            let src = sol.source(&grid, cfg.alpha, cfg.eps2, mesh.node(n + 1));
            for (gv, &sv) in g.iter_mut().zip(src.values()) {
                *gv += sv;
            }
        }
        let g = Field::from_values(&grid, g);

        self.finish_step(lead, cfg.eps2, &gamma, &g, 2.0 * s2, 2.0 * s, dt)
    }

    fn step_l1cn(&mut self, mesh: &TimeMesh, cfg: &SchemeConfig) -> Result<StepInfo, Error> {
        let n = self.n;
        let grid = self.phi.grid().clone();
        let dt = mesh.step(n + 1);
        let dt_prev = if n == 0 { dt } else { mesh.step(n) };
        let weights = l1cn_weights(mesh, n, cfg.alpha);
        let lead = weights.values[0] / dt;
        let kappa = 0.5 * cfg.eps2;

        // Extrapolated midpoint field; phi_prev == phi at n = 0, so the
        // first step evaluates the nonlinearity at phi^0.
        let extrap = 0.5 * dt / dt_prev;
        let mut phi_half = self.phi.clone();
        for (h, (&c, &p)) in phi_half
            .values_mut()
            .iter_mut()
            .zip(self.phi.values().iter().zip(self.phi_prev.values()))
        {
            *h = c + extrap * (c - p);
        }

        let s2 = energy_theta(&phi_half, cfg) + cfg.c0;
        let s = positive_sqrt(s2, n, cfg.c0)?;
        let lap_half = phi_half.laplacian();
        let gamma = self.nonlinear_part(&lap_half, &phi_half, cfg);

        let gamma_phi = gamma.inner(&self.phi);
        let coef = self.r / s - gamma_phi / (4.0 * s2);
        let lap_phi = self.phi.laplacian();
        let mut g = vec![0.0; grid.len()];
        for (i, gv) in g.iter_mut().enumerate() {
            *gv = lead * self.phi.values()[i]
                + kappa * lap_phi.values()[i]
                - cfg.theta * lap_half.values()[i]
                - coef * gamma.values()[i];
        }
        self.accumulate_history(&weights.values, &mut g);
        if let Some(sol) = &cfg.source {
            let t_half = 0.5 * (mesh.node(n) + mesh.node(n + 1));
            let src = sol.source(&grid, cfg.alpha, cfg.eps2, t_half);
            for (gv, &sv) in g.iter_mut().zip(src.values()) {
                *gv += sv;
            }
        }
        let g = Field::from_values(&grid, g);

        self.finish_step(lead, kappa, &gamma, &g, 4.0 * s2, 2.0 * s, dt)
    }

    /// gamma = -theta Lap phi_star + F'(phi_star) at the scheme's
    /// nonlinearity evaluation point.
    fn nonlinear_part(&self, lap: &Field, phi_star: &Field, cfg: &SchemeConfig) -> Field {
        let grid = phi_star.grid();
        let mut fp: Vec<f64> = phi_star
            .values()
            .iter()
            .map(|&u| cfg.potential.f_prime(u))
            .collect();
        if cfg.dealias {
            fp = Field::from_values(grid, fp).dealias_two_thirds().into_values();
        }
        let v: Vec<f64> = fp
            .iter()
            .zip(lap.values())
            .map(|(&p, &l)| p - cfg.theta * l)
            .collect();
        Field::from_values(grid, v)
    }

    /// g -= sum over past steps of weight_j * rate_{n-j}; weight index j
    /// addresses the interval [t_{n-j}, t_{n-j+1}].
    fn accumulate_history(&self, weights: &[f64], g: &mut [f64]) {
        let n = self.n;
        for j in 1..=n {
            let c = weights[j];
            for (gv, &rv) in g.iter_mut().zip(self.rates[n - j].values()) {
                *gv -= c * rv;
            }
        }
    }

    /// Common tail of both schemes: two Helmholtz solves, the scalar
    /// recovery of (gamma, phi^{n+1}), and the R update.
    ///
    /// denom = 2 S^2 (L1) or 4 S^2 (L1-CN); r_denom = 2 S for both.
    fn finish_step(
        &mut self,
        lead: f64,
        kappa: f64,
        gamma: &Field,
        g: &Field,
        denom: f64,
        r_denom: f64,
        dt: f64,
    ) -> Result<StepInfo, Error> {
        let grid = self.phi.grid().clone();
        let scaled: Vec<f64> = gamma.values().iter().map(|&v| -v / denom).collect();
        let phi1 = solve_helmholtz(lead, kappa, &Field::from_values(&grid, scaled));
        let phi2 = solve_helmholtz(lead, kappa, g);

        let sigma = -gamma.inner(&phi1);
        if sigma < -1e-12 {
            return Err(Error::Solver {
                step: self.n + 1,
                message: format!("sigma = {sigma} is negative; A lost positivity"),
            });
        }
        let gamma_new = gamma.inner(&phi2) / (1.0 + sigma);

        let mut phi_new = phi2;
        for (v, &p1) in phi_new.values_mut().iter_mut().zip(phi1.values()) {
            *v += gamma_new * p1;
        }

        let mut delta = phi_new.clone();
        for (d, &p) in delta.values_mut().iter_mut().zip(self.phi.values()) {
            *d -= p;
        }
        let r_new = self.r + gamma.inner(&delta) / r_denom;

        let mut rate = delta;
        for v in rate.values_mut() {
            *v /= dt;
        }
        self.rates.push(rate);
        self.phi_prev = std::mem::replace(&mut self.phi, phi_new);
        self.r = r_new;
        self.n += 1;
        Ok(StepInfo { sigma })
    }
}

fn positive_sqrt(s2: f64, step: usize, c0: f64) -> Result<f64, Error> {
    if s2 > 0.0 {
        Ok(s2.sqrt())
    } else {
        Err(Error::Solver {
            step: step + 1,
            message: format!(
                "E_theta + C0 = {s2} is not positive (C0 = {c0}); increase c0"
            ),
        })
    }
}

/// Starting state with R^0 = sqrt(E_theta(phi0) + C0) and phi^-1 := phi^0.
pub fn init_state(phi0: Field, cfg: &SchemeConfig) -> Result<SavState, Error> {
    cfg.validate()?;
    let s2 = energy_theta(&phi0, cfg) + cfg.c0;
    if !(s2 > 0.0) {
        return Err(Error::Config(format!(
            "E_theta(phi0) + C0 = {s2} must be positive; raise c0"
        )));
    }
    Ok(SavState {
        n: 0,
        phi_prev: phi0.clone(),
        phi: phi0,
        r: s2.sqrt(),
        rates: Vec::new(),
    })
}
