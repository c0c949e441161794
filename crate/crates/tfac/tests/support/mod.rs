//! Reference implementations the oracle tests compare the library against.
//! Everything here recomputes results through an independent route: adaptive
//! quadrature instead of closed-form antiderivatives, O(n^2) transform sums
//! instead of FFTs, and one dense coupled linear solve instead of the
//! split pair of Helmholtz solves.

// Each test target compiles this module separately and uses its own subset.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use tfac::mesh::{l1cn_weights, l1_weights, TimeMesh};
use tfac::sav::{Scheme, SchemeConfig};
use tfac::spectral::{Bc, Grid};

/// Integrate f over (a, b) by tanh-sinh quadrature. The integrand receives
/// (x, x - a, b - x) with both endpoint distances computed without
/// cancellation, so integrable endpoint singularities such as
/// (b - x)^(-alpha) with alpha < 1 converge at the requested tolerance.
pub fn tanh_sinh(mut f: impl FnMut(f64, f64, f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    assert!(b > a, "empty interval [{a}, {b}]");
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    // Substitution x = c + hw tanh(g), g = (pi/2) sinh(u), du-weight
    // hw (pi/2) cosh(u) / cosh^2(g). Distances follow from
    // 1 -+ tanh(g) = 2 / (e^{+-2g} + 1).
    let term = |f: &mut dyn FnMut(f64, f64, f64) -> f64, u: f64| -> f64 {
        let g = 0.5 * PI * u.sinh();
        // Past |g| ~ 350 the weight underflows along with both distances;
        // skipping avoids 0 * inf = NaN from singular endpoints.
        if g.abs() > 350.0 {
            return 0.0;
        }
        let e2g = (2.0 * g).exp();
        let db = 2.0 * hw / (e2g + 1.0);
        let da = 2.0 * hw / (1.0 / e2g + 1.0);
        let x = c + hw * g.tanh();
        let ch = g.cosh();
        let w = hw * 0.5 * PI * u.cosh() / (ch * ch);
        w * f(x, da, db)
    };

    // Base trapezoid at h = 1 over all abscissae within the cutoff.
    let mut h = 1.0;
    let mut sum = term(&mut f, 0.0);
    for k in 1..7 {
        let t = term(&mut f, k as f64) + term(&mut f, -(k as f64));
        sum += t;
        if t.abs() <= 1e-300 {
            break;
        }
    }
    let mut prev = sum;
    for level in 1..=13 {
        // New abscissae of this level: the odd multiples of the halved h.
        h *= 0.5;
        let mut k = 1;
        loop {
            let u = k as f64 * h;
            if u > 6.2 {
                break;
            }
            let t = term(&mut f, u) + term(&mut f, -u);
            sum += t;
            if t.abs() <= 1e-300 {
                break;
            }
            k += 2;
        }
        let estimate = sum * h;
        if level >= 3 && (estimate - prev).abs() <= tol * estimate.abs().max(1e-300) {
            return estimate;
        }
        prev = estimate;
    }
    prev
}

/// 1/Gamma(1-alpha) * integral over [a, b] of (t_eval - s)^(-alpha) ds,
/// the defining integral behind one convolution weight. Requires b <= t_eval;
/// the b = t_eval panel is the singular one.
pub fn kernel_panel_integral(t_eval: f64, a: f64, b: f64, alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0);
    assert!(b <= t_eval + 1e-15);
    let g1 = libm::tgamma(1.0 - alpha);
    let singular = (t_eval - b).abs() <= 1e-14 * t_eval.max(1.0);
    tanh_sinh(
        |s, _da, db| {
            // Distance to the kernel's singular point, cancellation-free when
            // it sits at the panel's right end.
            let d = if singular { db } else { t_eval - s };
            d.powf(-alpha) / g1
        },
        a,
        b,
        1e-12,
    )
}

/// Caputo derivative of t^mu by its definition
/// 1/Gamma(1-alpha) * integral over [0, t] of mu s^(mu-1) (t-s)^(-alpha) ds,
/// with possible singularities at both ends.
pub fn caputo_power_quadrature(mu: f64, alpha: f64, t: f64) -> f64 {
    assert!(mu > 0.0 && alpha > 0.0 && alpha < 1.0 && t > 0.0);
    let g1 = libm::tgamma(1.0 - alpha);
    tanh_sinh(
        |_s, da, db| mu * da.powf(mu - 1.0) * db.powf(-alpha) / g1,
        0.0,
        t,
        1e-12,
    )
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // p = P_n(x), dp = P_n'(x) via the three-term recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Coefficients of a nodal field by direct O(n^2) summation per direction,
/// matching the library's transform conventions: unnormalized forward DFT
/// on periodic grids, unnormalized DCT-II on Neumann grids.
pub struct NaiveSpectral {
    nx: usize,
    ny: usize,
    bc: Bc,
    domain: (f64, f64, f64, f64),
    /// Fourier: interleaved (re, im); cosine: re only, im zero.
    coef_re: Vec<f64>,
    coef_im: Vec<f64>,
}

impl NaiveSpectral {
    pub fn new(grid: &Arc<Grid>, values: &[f64]) -> NaiveSpectral {
        let (nx, ny) = (grid.nx(), grid.ny());
        assert_eq!(values.len(), nx * ny);
        let mut re = vec![0.0; nx * ny];
        let mut im = vec![0.0; nx * ny];
        match grid.bc() {
            Bc::Periodic => {
                for kx in 0..nx {
                    for ky in 0..ny {
                        let (mut sr, mut si) = (0.0, 0.0);
                        for i in 0..nx {
                            for j in 0..ny {
                                let ang = -2.0 * PI
                                    * (kx as f64 * i as f64 / nx as f64
                                        + ky as f64 * j as f64 / ny as f64);
                                sr += values[i * ny + j] * ang.cos();
                                si += values[i * ny + j] * ang.sin();
                            }
                        }
                        re[kx * ny + ky] = sr;
                        im[kx * ny + ky] = si;
                    }
                }
            }
            Bc::Neumann => {
                for kx in 0..nx {
                    for ky in 0..ny {
                        let mut s = 0.0;
                        for i in 0..nx {
                            for j in 0..ny {
                                s += values[i * ny + j]
                                    * (PI * kx as f64 * (2 * i + 1) as f64 / (2 * nx) as f64).cos()
                                    * (PI * ky as f64 * (2 * j + 1) as f64 / (2 * ny) as f64).cos();
                            }
                        }
                        re[kx * ny + ky] = s;
                    }
                }
            }
        }
        NaiveSpectral {
            nx,
            ny,
            bc: grid.bc(),
            domain: grid.domain(),
            coef_re: re,
            coef_im: im,
        }
    }

    pub fn coef(&self, kx: usize, ky: usize) -> (f64, f64) {
        let idx = kx * self.ny + ky;
        (self.coef_re[idx], self.coef_im[idx])
    }

    /// Evaluate the interpolant at an arbitrary point. Periodic synthesis
    /// uses signed frequencies; even grid sizes alias the Nyquist line, so
    /// callers should band-limit test data below it.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.eval_with_gradient(x, y).0
    }

    /// (value, d/dx, d/dy) of the interpolant at (x, y).
    pub fn eval_with_gradient(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let (x0, x1, y0, y1) = self.domain;
        let (lx, ly) = (x1 - x0, y1 - y0);
        let (nx, ny) = (self.nx, self.ny);
        let nn = (nx * ny) as f64;
        let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
        match self.bc {
            Bc::Periodic => {
                for kx in 0..nx {
                    let fx = signed(kx, nx) * 2.0 * PI / lx;
                    for ky in 0..ny {
                        let fy = signed(ky, ny) * 2.0 * PI / ly;
                        let (cr, ci) = self.coef(kx, ky);
                        let ang = fx * (x - x0) + fy * (y - y0);
                        // Re[(cr + i ci) e^{i ang}] and its derivatives.
                        let (c, s) = (ang.cos(), ang.sin());
                        v += cr * c - ci * s;
                        gx += -fx * (cr * s + ci * c);
                        gy += -fy * (cr * s + ci * c);
                    }
                }
                v /= nn;
                gx /= nn;
                gy /= nn;
            }
            Bc::Neumann => {
                for kx in 0..nx {
                    let fx = kx as f64 * PI / lx;
                    let ex = if kx == 0 { 1.0 } else { 2.0 };
                    for ky in 0..ny {
                        let fy = ky as f64 * PI / ly;
                        let ey = if ky == 0 { 1.0 } else { 2.0 };
                        let (c, _) = self.coef(kx, ky);
                        let amp = c * ex * ey / nn;
                        let (cx, sx) = ((fx * (x - x0)).cos(), (fx * (x - x0)).sin());
                        let (cy, sy) = ((fy * (y - y0)).cos(), (fy * (y - y0)).sin());
                        v += amp * cx * cy;
                        gx += -amp * fx * sx * cy;
                        gy += -amp * fy * cx * sy;
                    }
                }
            }
        }
        (v, gx, gy)
    }
}

fn signed(k: usize, n: usize) -> f64 {
    if 2 * k <= n {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Integral over the grid's rectangle of f(value, |grad|^2) of the
/// interpolant, by per-cell Gauss-Legendre with q points per direction.
pub fn integrate_interpolant(
    grid: &Arc<Grid>,
    values: &[f64],
    q: usize,
    f: impl Fn(f64, f64) -> f64,
) -> f64 {
    let spec = NaiveSpectral::new(grid, values);
    let (x0, x1, y0, y1) = grid.domain();
    let (nx, ny) = (grid.nx(), grid.ny());
    let hx = (x1 - x0) / nx as f64;
    let hy = (y1 - y0) / ny as f64;
    let (gn, gw) = gauss_legendre(q);
    let mut total = 0.0;
    for cx in 0..nx {
        let ax = x0 + cx as f64 * hx;
        for cy in 0..ny {
            let ay = y0 + cy as f64 * hy;
            for (xi, wi) in gn.iter().zip(&gw) {
                let x = ax + 0.5 * hx * (xi + 1.0);
                for (yj, wj) in gn.iter().zip(&gw) {
                    let y = ay + 0.5 * hy * (yj + 1.0);
                    let (v, gx, gy) = spec.eval_with_gradient(x, y);
                    total += wi * wj * f(v, gx * gx + gy * gy);
                }
            }
        }
    }
    total * 0.25 * hx * hy
}

/// Dense matrix of the grid's Laplacian, column by column through the naive
/// transform path: analyze each unit vector, scale by the analytic
/// eigenvalues, synthesize at the nodes.
pub fn dense_laplacian(grid: &Arc<Grid>) -> DMatrix<f64> {
    let lx = build_lap_1d(grid.bc(), grid.nx(), {
        let (x0, x1, _, _) = grid.domain();
        x1 - x0
    });
    let ly = build_lap_1d(grid.bc(), grid.ny(), {
        let (_, _, y0, y1) = grid.domain();
        y1 - y0
    });
    let (nx, ny) = (grid.nx(), grid.ny());
    let n = nx * ny;
    let mut lap = DMatrix::zeros(n, n);
    // Lap = Lx (x) I + I (x) Ly on row-major values[i * ny + j].
    for i in 0..nx {
        for j in 0..ny {
            let row = i * ny + j;
            for p in 0..nx {
                lap[(row, p * ny + j)] += lx[(i, p)];
            }
            for q in 0..ny {
                lap[(row, i * ny + q)] += ly[(j, q)];
            }
        }
    }
    lap
}

fn build_lap_1d(bc: Bc, n: usize, len: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    match bc {
        Bc::Periodic => {
            for col in 0..n {
                for row in 0..n {
                    let mut v = 0.0;
                    for k in 0..n {
                        let f = signed(k, n) * 2.0 * PI / len;
                        let ang = 2.0 * PI * k as f64 * (row as f64 - col as f64) / n as f64;
                        v += -(f * f) * ang.cos() / n as f64;
                    }
                    m[(row, col)] = v;
                }
            }
        }
        Bc::Neumann => {
            for col in 0..n {
                for row in 0..n {
                    let mut v = 0.0;
                    for k in 0..n {
                        let f = k as f64 * PI / len;
                        let ek = if k == 0 { 1.0 } else { 2.0 };
                        let a = (PI * k as f64 * (2 * col + 1) as f64 / (2 * n) as f64).cos();
                        let b = (PI * k as f64 * (2 * row + 1) as f64 / (2 * n) as f64).cos();
                        v += -(f * f) * ek * a * b / n as f64;
                    }
                    m[(row, col)] = v;
                }
            }
        }
    }
    m
}

pub struct DenseStep {
    pub phi_next: DVector<f64>,
    pub r_next: f64,
}

/// One SAV step as a single dense coupled linear solve in the unknowns
/// (phi^{n+1}, R^{n+1}), no splitting. `phi_hist` holds phi^0..phi^n on the
/// mesh's nodes; gamma, the auxiliary energy, and the history term are all
/// rebuilt here from scratch with the dense Laplacian.
pub fn dense_sav_step(
    lap: &DMatrix<f64>,
    cell_area: f64,
    phi_hist: &[DVector<f64>],
    r: f64,
    mesh: &TimeMesh,
    cfg: &SchemeConfig,
) -> DenseStep {
    let n = phi_hist.len() - 1;
    let phi_n = &phi_hist[n];
    let size = phi_n.len();
    let dt = mesh.step(n + 1);

    let energy_theta = |phi: &DVector<f64>| -> f64 {
        let lap_phi = lap * phi;
        let grad_sq = -cell_area * lap_phi.dot(phi);
        let well: f64 = phi.iter().map(|&u| cfg.potential.f(u)).sum();
        0.5 * cfg.theta * grad_sq + cell_area * well
    };

    // Evaluation point of the nonlinearity and the leading/implicit weights.
    let (row, lead, kappa, phi_star) = match cfg.scheme {
        Scheme::L1 => {
            let row = l1_weights(mesh, n, cfg.alpha);
            let lead = row.values[0] / dt;
            (row, lead, cfg.eps2, phi_n.clone())
        }
        Scheme::L1Cn => {
            let row = l1cn_weights(mesh, n, cfg.alpha);
            let lead = row.values[0] / dt;
            let dt_prev = if n == 0 { dt } else { mesh.step(n) };
            let prev = if n == 0 { &phi_hist[0] } else { &phi_hist[n - 1] };
            let half = phi_n + (phi_n - prev) * (0.5 * dt / dt_prev);
            (row, lead, 0.5 * cfg.eps2, half)
        }
    };

    let lap_star = lap * &phi_star;
    let gamma = DVector::from_fn(size, |i, _| {
        cfg.potential.f_prime(phi_star[i]) - cfg.theta * lap_star[i]
    });
    let s2 = energy_theta(&phi_star) + cfg.c0;
    assert!(s2 > 0.0);
    let s = s2.sqrt();

    let mut history = DVector::zeros(size);
    for j in 1..=n {
        let rate = (&phi_hist[n - j + 1] - &phi_hist[n - j]) / mesh.step(n - j + 1);
        history += rate * row.values[j];
    }

    let mut a = DMatrix::zeros(size + 1, size + 1);
    let mut rhs = DVector::zeros(size + 1);
    let lap_n = lap * phi_n;
    match cfg.scheme {
        // lead (phi' - phi) + hist - eps2 Lap phi' + theta Lap phi
        //   + gamma R'/S = 0;  R' = R + (gamma, phi' - phi) / (2S).
        Scheme::L1 => {
            for i in 0..size {
                for j in 0..size {
                    a[(i, j)] = -kappa * lap[(i, j)];
                }
                a[(i, i)] += lead;
                a[(i, size)] = gamma[i] / s;
                rhs[i] = lead * phi_n[i] - cfg.theta * lap_n[i] - history[i];
            }
        }
        // lead (phi' - phi) + hist - (eps2/2) Lap (phi' + phi)
        //   + theta Lap phi_half + gamma (R + R')/(2S) = 0; same R' update.
        Scheme::L1Cn => {
            for i in 0..size {
                for j in 0..size {
                    a[(i, j)] = -kappa * lap[(i, j)];
                }
                a[(i, i)] += lead;
                a[(i, size)] = gamma[i] / (2.0 * s);
                rhs[i] = lead * phi_n[i] + kappa * lap_n[i]
                    - cfg.theta * lap_star[i]
                    - 0.5 * r / s * gamma[i]
                    - history[i];
            }
        }
    }
    for j in 0..size {
        a[(size, j)] = -cell_area * gamma[j] / (2.0 * s);
    }
    a[(size, size)] = 1.0;
    rhs[size] = r - cell_area * gamma.dot(phi_n) / (2.0 * s);

    let sol = a.lu().solve(&rhs).expect("coupled SAV system is singular");
    DenseStep {
        phi_next: sol.rows(0, size).into_owned(),
        r_next: sol[size],
    }
}
