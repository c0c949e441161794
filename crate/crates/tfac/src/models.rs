//! Problem data: the double-well potential, manufactured solutions with
//! analytic Caputo derivatives, and the initial conditions used by the
//! benchmark and coarsening runs.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::special::gamma;
use crate::spectral::{Field, Grid};

/// Bulk free-energy density F and its derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Potential {
    /// F(u) = (u^2 - 1)^2 / 4, F'(u) = u^3 - u.
    DoubleWell,
}

impl Potential {
    pub fn f(&self, u: f64) -> f64 {
        match self {
            Potential::DoubleWell => {
                let w = u * u - 1.0;
                0.25 * w * w
            }
        }
    }

    pub fn f_prime(&self, u: f64) -> f64 {
        match self {
            Potential::DoubleWell => u * (u * u - 1.0),
        }
    }
}

/// Caputo derivative of t^mu of order alpha:
/// Gamma(mu+1) / Gamma(mu+1-alpha) * t^(mu-alpha).
///
/// Valid for mu > 0 and alpha in (0, 1]; at alpha = 1 the identity
/// Gamma(mu+1) = mu Gamma(mu) reduces it to the ordinary derivative
/// mu t^(mu-1). Constants have Caputo derivative zero, so callers handle
/// additive constants themselves.
pub fn caputo_power(mu: f64, alpha: f64, t: f64) -> f64 {
    assert!(mu > 0.0, "caputo_power needs mu > 0 (got {mu})");
    assert!(
        alpha > 0.0 && alpha <= 1.0,
        "caputo_power needs alpha in (0, 1] (got {alpha})"
    );
    assert!(t >= 0.0, "caputo_power needs t >= 0 (got {t})");
    if t == 0.0 {
        // t^(mu - alpha) with mu > alpha is 0; mu = alpha would give 1.
        return if mu == alpha { gamma(mu + 1.0) / gamma(mu + 1.0 - alpha) } else { 0.0 };
    }
    gamma(mu + 1.0) / gamma(mu + 1.0 - alpha) * t.powf(mu - alpha)
}

/// Separable exact solutions phi(x, y, t) = T(t) X(x, y) where X is a
/// Laplacian eigenfunction of the grid's basis, so the Caputo derivative,
/// the Laplacian, and the matching source term are all known in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ManufacturedSolution {
    /// 0.2 t^5 sin(x) cos(y) on the periodic square (0, 2 pi)^2.
    SineCosPoly,
    /// 0.2 (t^mu + 1) cos(pi x) cos(pi y) on the Neumann square (-1, 1)^2.
    /// The temporal exponent mu controls the initial-layer strength.
    CosCosPower { mu: f64 },
}

impl ManufacturedSolution {
    fn time_value(&self, t: f64) -> f64 {
        match self {
            ManufacturedSolution::SineCosPoly => 0.2 * t.powi(5),
            ManufacturedSolution::CosCosPower { mu } => 0.2 * (t.powf(*mu) + 1.0),
        }
    }

    fn time_caputo(&self, alpha: f64, t: f64) -> f64 {
        match self {
            ManufacturedSolution::SineCosPoly => 0.2 * caputo_power(5.0, alpha, t),
            ManufacturedSolution::CosCosPower { mu } => 0.2 * caputo_power(*mu, alpha, t),
        }
    }

    fn shape(&self, x: f64, y: f64) -> f64 {
        match self {
            ManufacturedSolution::SineCosPoly => x.sin() * y.cos(),
            ManufacturedSolution::CosCosPower { .. } => {
                (std::f64::consts::PI * x).cos() * (std::f64::consts::PI * y).cos()
            }
        }
    }

    /// Eigenvalue lambda with Lap X = lambda X.
    fn shape_eigenvalue(&self) -> f64 {
        match self {
            ManufacturedSolution::SineCosPoly => -2.0,
            ManufacturedSolution::CosCosPower { .. } => {
                -2.0 * std::f64::consts::PI * std::f64::consts::PI
            }
        }
    }

    pub fn phi(&self, grid: &Arc<Grid>, t: f64) -> Field {
        let a = self.time_value(t);
        Field::from_fn(grid, |x, y| a * self.shape(x, y))
    }

    pub fn caputo(&self, grid: &Arc<Grid>, alpha: f64, t: f64) -> Field {
        let a = self.time_caputo(alpha, t);
        Field::from_fn(grid, |x, y| a * self.shape(x, y))
    }

    pub fn laplacian(&self, grid: &Arc<Grid>, t: f64) -> Field {
        let a = self.time_value(t) * self.shape_eigenvalue();
        Field::from_fn(grid, |x, y| a * self.shape(x, y))
    }

    /// Source making phi an exact solution of
    /// D^alpha phi - eps2 Lap phi + (phi^3 - phi) = s.
    pub fn source(&self, grid: &Arc<Grid>, alpha: f64, eps2: f64, t: f64) -> Field {
        let c = self.time_caputo(alpha, t);
        let v = self.time_value(t);
        let lam = self.shape_eigenvalue();
        Field::from_fn(grid, |x, y| {
            let s = self.shape(x, y);
            let phi = v * s;
            c * s - eps2 * lam * phi + (phi * phi * phi - phi)
        })
    }
}

/// Starting fields for the non-manufactured runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// cos(4 pi x) cos(4 pi y).
    CosineProduct,
    /// +1 inside the centered disk of the given radius, -1 outside. With
    /// `interface = Some(eps)` the jump is mollified to
    /// tanh((radius - r) / (sqrt(2) eps)).
    Disk { radius: f64, interface: Option<f64> },
    /// i.i.d. uniform values on [-amplitude, amplitude], seeded.
    RandomUniform { amplitude: f64 },
}

impl InitialCondition {
    /// Nodal field on the grid. The seed only matters for `RandomUniform`;
    /// nodes fill in row-major order so a given (grid, seed) pair always
    /// produces the same field.
    pub fn field(&self, grid: &Arc<Grid>, seed: u64) -> Field {
        match *self {
            InitialCondition::CosineProduct => Field::from_fn(grid, |x, y| {
                (4.0 * std::f64::consts::PI * x).cos() * (4.0 * std::f64::consts::PI * y).cos()
            }),
            InitialCondition::Disk { radius, interface } => {
                let (x0, x1, y0, y1) = grid.domain();
                let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
                Field::from_fn(grid, |x, y| {
                    disk_profile(radius, interface, x - cx, y - cy)
                })
            }
            InitialCondition::RandomUniform { amplitude } => {
                assert!(amplitude > 0.0, "random amplitude must be positive");
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let values = (0..grid.len())
                    .map(|_| rng.random_range(-amplitude..=amplitude))
                    .collect();
                Field::from_values(grid, values)
            }
        }
    }
}

/// Disk value at offset (dx, dy) from the center.
pub fn disk_profile(radius: f64, interface: Option<f64>, dx: f64, dy: f64) -> f64 {
    let r = (dx * dx + dy * dy).sqrt();
    match interface {
        None => {
            if r < radius {
                1.0
            } else {
                -1.0
            }
        }
        Some(eps) => ((radius - r) / (std::f64::consts::SQRT_2 * eps)).tanh(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Bc;
    use std::f64::consts::PI;

    #[test]
    fn double_well_derivative_and_symmetry() {
        let p = Potential::DoubleWell;
        let h = 1e-5;
        let mut x = -2.0;
        while x <= 2.0 {
            let fd = (p.f(x + h) - p.f(x - h)) / (2.0 * h);
            assert!((fd - p.f_prime(x)).abs() <= 1e-8, "x={x}: {fd}");
            assert_eq!(p.f(-x), p.f(x));
            assert_eq!(p.f_prime(-x), -p.f_prime(x));
            x += 0.37;
        }
        assert_eq!(p.f(1.0), 0.0);
        assert_eq!(p.f(0.0), 0.25);
    }

    #[test]
    fn caputo_power_closed_forms() {
        // mu = 1: t^(1-a) / Gamma(2-a).
        for &alpha in &[0.2, 0.5, 0.8] {
            for &t in &[0.3f64, 1.0, 2.7] {
                let want = t.powf(1.0 - alpha) / gamma(2.0 - alpha);
                let got = caputo_power(1.0, alpha, t);
                assert!((got - want).abs() <= 1e-14 * want, "{got} vs {want}");
            }
        }
        // mu = 5, alpha = 1/2, t = 1: Gamma(6)/Gamma(5.5) = 120 / 52.3427...
        let got = caputo_power(5.0, 0.5, 1.0);
        let want = 120.0 / gamma(5.5);
        assert!((got - want).abs() <= 1e-14);
        assert!((got - 2.292_579_895_051_2).abs() <= 1e-12, "{got}");
    }

    #[test]
    fn caputo_power_alpha_one_is_ordinary_derivative() {
        for &mu in &[0.4, 0.9, 2.0, 5.0] {
            for &t in &[0.2, 1.0, 3.0] {
                let got = caputo_power(mu, 1.0, t);
                let want = mu * t.powf(mu - 1.0);
                assert!(
                    (got - want).abs() <= 1e-12 * want.abs(),
                    "mu={mu} t={t}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn caputo_power_at_zero() {
        assert_eq!(caputo_power(5.0, 0.5, 0.0), 0.0);
        assert_eq!(caputo_power(0.4, 0.3, 0.0), 0.0);
    }

    #[test]
    fn source_vanishes_at_t_zero_for_pure_power_solution() {
        // phi ~ t^5 has phi(0) = 0 and Caputo derivative 0 at t = 0.
        let grid = Grid::square(Bc::Periodic, 16, 0.0, 2.0 * PI);
        let s = ManufacturedSolution::SineCosPoly.source(&grid, 0.5, 1.0, 0.0);
        assert!(s.max_abs() == 0.0);
    }

    #[test]
    fn manufactured_laplacian_matches_spectral_operator() {
        let grid = Grid::square(Bc::Periodic, 32, 0.0, 2.0 * PI);
        let sol = ManufacturedSolution::SineCosPoly;
        let analytic = sol.laplacian(&grid, 0.8);
        let discrete = sol.phi(&grid, 0.8).laplacian();
        for (a, d) in analytic.values().iter().zip(discrete.values()) {
            assert!((a - d).abs() <= 1e-12);
        }

        let grid = Grid::square(Bc::Neumann, 32, -1.0, 1.0);
        let sol = ManufacturedSolution::CosCosPower { mu: 0.9 };
        let analytic = sol.laplacian(&grid, 1.3);
        let discrete = sol.phi(&grid, 1.3).laplacian();
        for (a, d) in analytic.values().iter().zip(discrete.values()) {
            assert!((a - d).abs() <= 1e-10);
        }
    }

    #[test]
    fn source_satisfies_discrete_residual() {
        // s - (caputo - eps2 Lap_h phi + F'(phi)) must vanish to rounding
        // because the shapes are exact eigenfunctions of the discrete basis.
        let grid = Grid::square(Bc::Neumann, 32, -1.0, 1.0);
        let sol = ManufacturedSolution::CosCosPower { mu: 0.4 };
        let (alpha, eps2, t) = (0.5, 0.7, 0.9);
        let phi = sol.phi(&grid, t);
        let s = sol.source(&grid, alpha, eps2, t);
        let cap = sol.caputo(&grid, alpha, t);
        let lap = phi.laplacian();
        let p = Potential::DoubleWell;
        for i in 0..grid.len() {
            let residual =
                s.values()[i] - (cap.values()[i] - eps2 * lap.values()[i] + p.f_prime(phi.values()[i]));
            assert!(residual.abs() <= 1e-11, "node {i}: {residual}");
        }
    }

    #[test]
    fn cosine_product_hits_extremes() {
        let grid = Grid::square(Bc::Neumann, 64, -1.0, 1.0);
        let f = InitialCondition::CosineProduct.field(&grid, 0);
        assert!(f.max_abs() <= 1.0 + 1e-12);
        // The profile peaks at 1 on a lattice of points half a cell away
        // from the nearest midpoint nodes: max node value is cos(4 pi/64)^2.
        let peak = f.values().iter().cloned().fold(f64::MIN, f64::max);
        let want = (4.0 * PI / 64.0).cos().powi(2);
        assert!((peak - want).abs() <= 1e-12, "{peak} vs {want}");
    }

    #[test]
    fn disk_profile_values() {
        assert_eq!(disk_profile(0.25, None, 0.0, 0.0), 1.0);
        assert_eq!(disk_profile(0.25, None, 0.9, 0.9), -1.0);
        // Smooth variant crosses zero at r = radius.
        let v = disk_profile(0.25, Some(0.0313), 0.25, 0.0);
        assert!(v.abs() <= 1e-12);
        let inside = disk_profile(0.25, Some(0.0313), 0.1, 0.0);
        assert!(inside > 0.9);
    }

    #[test]
    fn disk_field_covers_expected_area() {
        let grid = Grid::square(Bc::Neumann, 128, -1.0, 1.0);
        let f = InitialCondition::Disk { radius: 0.25, interface: None }.field(&grid, 0);
        let plus = f.values().iter().filter(|&&v| v > 0.0).count();
        let frac = plus as f64 / grid.len() as f64;
        let want = PI * 0.25 * 0.25 / 4.0;
        assert!((frac - want).abs() <= 0.005, "{frac} vs {want}");
    }

    #[test]
    fn random_uniform_bounds_and_determinism() {
        let grid = Grid::square(Bc::Neumann, 32, -1.0, 1.0);
        let ic = InitialCondition::RandomUniform { amplitude: 0.05 };
        let a = ic.field(&grid, 42);
        let b = ic.field(&grid, 42);
        let c = ic.field(&grid, 43);
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
        assert!(a.values().iter().all(|v| v.abs() <= 0.05));
        // Values should spread over the interval, not cluster.
        let spread = a.values().iter().cloned().fold(f64::MIN, f64::max)
            - a.values().iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread > 0.08);
    }
}
