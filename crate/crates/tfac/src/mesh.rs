//! Time meshes and discrete fractional-derivative weight rows.
//!
//! A `TimeMesh` is a strictly increasing sequence of nodes
//! 0 = t_0 < t_1 < ... < t_M = T. Three families are provided:
//!
//! - uniform:   t_n = n T / M
//! - graded:    t_n = (n/M)^r T, clustering nodes at t = 0 for r > 1
//! - composite: graded with exponent r on [0, 1], then a constant step dt
//!              up to T
//!
//! The weight rows discretize the Caputo derivative of order alpha in (0, 1]
//! by piecewise-linear interpolation of the integrand. The backward stencil
//! evaluates at t_{n+1}:
//!
//!   D^alpha u(t_{n+1}) ~ sum_{k=0}^{n} b_{n-k} (u^{k+1} - u^k) / dt_{k+1},
//!
//!   b_{n-k} = 1/Gamma(1-alpha) * int over [t_k, t_{k+1}] of (t_{n+1}-s)^-alpha ds.
//!
//! The shifted stencil evaluates at the half node t_{n+1/2} = (t_n+t_{n+1})/2,
//! integrating the kernel (t_{n+1/2}-s)^-alpha instead; its newest interval is
//! truncated at t_{n+1/2}, which is what makes the leading weight
//! dt^{1-alpha} / (Gamma(2-alpha) 2^{1-alpha}) on a uniform mesh.
//!
//! All rows are computed from the exact antiderivative of the kernel, so every
//! node spacing goes through one code path; the classical closed forms on
//! uniform and graded meshes fall out identically (see tests). Rows depend on
//! the evaluation index n and are recomputed per step: cost O(n) per row,
//! O(M^2) per run, which is the intended direct-summation regime.
//!
//! At alpha = 1 the antiderivative exponent 1 - alpha vanishes and every
//! history weight cancels to zero while b_0 = 1, so both stencils degenerate
//! to plain difference quotients (backward Euler / Crank-Nicolson). `frac_pow`
//! evaluates 0^0 as 0 to make this limit exact.

use crate::error::Error;
use crate::special::gamma;

/// Mesh family tag, kept for reporting and config echo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshFamily {
    Uniform,
    Graded { r: f64 },
    Composite { r: f64, dt: f64 },
}

/// Strictly increasing time nodes t_0 = 0 .. t_M = T.
#[derive(Debug, Clone)]
pub struct TimeMesh {
    nodes: Vec<f64>,
    family: MeshFamily,
}

impl TimeMesh {
    /// M equal steps on [0, T].
    pub fn uniform(t_end: f64, m: usize) -> Result<Self, Error> {
        check_horizon(t_end, m)?;
        let mut nodes: Vec<f64> = (0..=m).map(|i| i as f64 * t_end / m as f64).collect();
        nodes[m] = t_end;
        Self::from_nodes(nodes, MeshFamily::Uniform)
    }

    /// Graded nodes t_n = (n/M)^r T. r = 1 reproduces the uniform mesh;
    /// r > 1 refines toward t = 0 where fractional solutions are singular.
    pub fn graded(t_end: f64, m: usize, r: f64) -> Result<Self, Error> {
        check_horizon(t_end, m)?;
        if !(r >= 1.0) {
            return Err(Error::Mesh(format!("grading exponent r must be >= 1 (got {r})")));
        }
        let nodes = (0..=m)
            .map(|i| (i as f64 / m as f64).powf(r) * t_end)
            .collect();
        Self::from_nodes(nodes, MeshFamily::Graded { r })
    }

    /// Graded mesh with M steps on [0, 1], then uniform steps dt up to T.
    /// (T - 1) / dt must be an integer.
    pub fn composite(t_end: f64, m_graded: usize, r: f64, dt: f64) -> Result<Self, Error> {
        check_horizon(t_end, m_graded)?;
        if !(t_end > 1.0) {
            return Err(Error::Mesh(format!(
                "composite mesh needs T > 1 so the uniform part is nonempty (got T = {t_end})"
            )));
        }
        if !(r >= 1.0) {
            return Err(Error::Mesh(format!("grading exponent r must be >= 1 (got {r})")));
        }
        if !(dt > 0.0) {
            return Err(Error::Mesh(format!("uniform step dt must be positive (got {dt})")));
        }
        let steps = (t_end - 1.0) / dt;
        let k = steps.round();
        if (steps - k).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::Mesh(format!(
                "(T - 1)/dt = {steps} is not an integer; adjust dt or T"
            )));
        }
        let k = k as usize;
        let mut nodes: Vec<f64> = (0..=m_graded)
            .map(|i| (i as f64 / m_graded as f64).powf(r))
            .collect();
        nodes.extend((1..=k).map(|i| 1.0 + i as f64 * dt));
        nodes[m_graded + k] = t_end;
        Self::from_nodes(nodes, MeshFamily::Composite { r, dt })
    }

    /// Dispatch on the family tag; `m` counts the graded part's steps for
    /// composite meshes and all steps otherwise.
    pub fn with_family(family: MeshFamily, t_end: f64, m: usize) -> Result<Self, Error> {
        match family {
            MeshFamily::Uniform => Self::uniform(t_end, m),
            MeshFamily::Graded { r } => Self::graded(t_end, m, r),
            MeshFamily::Composite { r, dt } => Self::composite(t_end, m, r, dt),
        }
    }

    fn from_nodes(nodes: Vec<f64>, family: MeshFamily) -> Result<Self, Error> {
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Mesh(format!(
                    "nodes must be strictly increasing (got {} then {})",
                    w[0], w[1]
                )));
            }
        }
        Ok(TimeMesh { nodes, family })
    }

    /// Number of steps M (one less than the number of nodes).
    pub fn num_steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn node(&self, n: usize) -> f64 {
        self.nodes[n]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Step dt_n = t_n - t_{n-1}, for n in 1..=M.
    pub fn step(&self, n: usize) -> f64 {
        assert!(n >= 1 && n <= self.num_steps(), "step index {n} out of range");
        self.nodes[n] - self.nodes[n - 1]
    }

    pub fn t_end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn tau_max(&self) -> f64 {
        (1..=self.num_steps())
            .map(|n| self.step(n))
            .fold(0.0, f64::max)
    }

    pub fn family(&self) -> MeshFamily {
        self.family
    }
}

fn check_horizon(t_end: f64, m: usize) -> Result<(), Error> {
    if m == 0 {
        return Err(Error::Mesh("a time mesh needs at least one step (M = 0)".into()));
    }
    if !(t_end > 0.0) {
        return Err(Error::Mesh(format!("final time T must be positive (got {t_end})")));
    }
    Ok(())
}

/// One row of convolution weights for the step from t_n to t_{n+1}.
/// `values[j]` multiplies the difference quotient over [t_{n-j}, t_{n-j+1}],
/// so j = 0 is the newest interval.
#[derive(Debug, Clone)]
pub struct WeightRow {
    pub alpha: f64,
    pub n: usize,
    pub values: Vec<f64>,
}

/// x^e with 0^0 evaluated as 0.
///
/// The weights only ever raise nonnegative kernel distances to the power
/// 1 - alpha; for every alpha < 1 the value at x = 0 is 0, so the alpha -> 1
/// limit of each weight is reproduced exactly instead of picking up the IEEE
/// pow(0, 0) = 1 convention.
#[inline]
fn frac_pow(x: f64, e: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        0.0
    } else {
        x.powf(e)
    }
}

fn check_alpha(alpha: f64) {
    assert!(
        alpha > 0.0 && alpha <= 1.0,
        "fractional order alpha must lie in (0, 1] (got {alpha})"
    );
}

/// Weights of the backward stencil at t_{n+1}.
///
/// b_j = [ (t_{n+1} - t_{n-j})^{1-alpha} - (t_{n+1} - t_{n-j+1})^{1-alpha} ] / Gamma(2-alpha).
pub fn l1_weights(mesh: &TimeMesh, n: usize, alpha: f64) -> WeightRow {
    check_alpha(alpha);
    assert!(n < mesh.num_steps(), "no step starts at node {n}");
    let e = 1.0 - alpha;
    let g = gamma(2.0 - alpha);
    let t_next = mesh.node(n + 1);
    // p[k] = (t_{n+1} - t_k)^{1-alpha}; adjacent weights share these values.
    let p: Vec<f64> = (0..=n + 1).map(|k| frac_pow(t_next - mesh.node(k), e)).collect();
    let values = (0..=n).map(|j| (p[n - j] - p[n - j + 1]) / g).collect();
    WeightRow { alpha, n, values }
}

/// Weights of the shifted stencil at t_{n+1/2} = (t_n + t_{n+1})/2.
///
/// The newest interval is integrated only up to the half node:
/// b~_0 = (dt_{n+1}/2)^{1-alpha} / Gamma(2-alpha); history weights use the
/// kernel (t_{n+1/2} - s)^{-alpha} over the full intervals [t_{n-j}, t_{n-j+1}].
pub fn l1cn_weights(mesh: &TimeMesh, n: usize, alpha: f64) -> WeightRow {
    check_alpha(alpha);
    assert!(n < mesh.num_steps(), "no step starts at node {n}");
    let e = 1.0 - alpha;
    let g = gamma(2.0 - alpha);
    let t_half = 0.5 * (mesh.node(n) + mesh.node(n + 1));
    let mut values = vec![0.0; n + 1];
    values[0] = frac_pow(0.5 * mesh.step(n + 1), e) / g;
    if n > 0 {
        let p: Vec<f64> = (0..=n).map(|k| frac_pow(t_half - mesh.node(k), e)).collect();
        for j in 1..=n {
            values[j] = (p[n - j] - p[n - j + 1]) / g;
        }
    }
    WeightRow { alpha, n, values }
}

/// Weights of the second-order reference stencil on a uniform mesh, obtained
/// by interpolating the difference quotients at interval midpoints. Used by
/// the positivity analysis of the shifted stencil, not by the solver itself.
///
/// bhat_0 = tau^{1-alpha} / Gamma(3-alpha),
/// bhat_k = tau^{1-alpha} / Gamma(3-alpha)
///          * [ (k+1)^{2-alpha} - 2 k^{2-alpha} + (k-1)^{2-alpha} ],  k >= 1.
pub fn hat_weights(n: usize, alpha: f64, tau: f64) -> WeightRow {
    check_alpha(alpha);
    assert!(tau > 0.0, "step size tau must be positive (got {tau})");
    let e2 = 2.0 - alpha;
    let scale = tau.powf(1.0 - alpha) / gamma(3.0 - alpha);
    let mut values = vec![0.0; n + 1];
    values[0] = scale;
    for k in 1..=n {
        let km = frac_pow((k - 1) as f64, e2);
        let k0 = (k as f64).powf(e2);
        let kp = ((k + 1) as f64).powf(e2);
        values[k] = scale * (kp - 2.0 * k0 + km);
    }
    WeightRow { alpha, n, values }
}
