//! Spectral grids, transforms, and operators on rectangles.
//!
//! Two boundary conditions, two bases:
//!
//! - periodic: complex Fourier modes exp(2 pi i k (x-a)/L) sampled on the
//!   equispaced nodes x_i = a + i h, h = L/n;
//! - neumann: cosine modes cos(k pi (x-a)/L) sampled on the midpoint nodes
//!   x_i = a + (i + 1/2) h, where every mode has zero normal derivative at
//!   both walls.
//!
//! In each basis an nx-by-ny nodal field corresponds one-to-one to an
//! nx-by-ny coefficient array, so the Laplacian and the Helmholtz solve
//! (a - kappa Lap)^-1 are exact diagonal operations in coefficient space.
//! Nodal quadrature with the uniform weight h_x h_y integrates products of
//! two basis functions exactly in both bases, which keeps inner products,
//! Parseval sums, and the energy functionals mutually consistent.
//!
//! The cosine transforms are folded onto complex FFTs of length 2n (mirror
//! extension), so both bases run in O(n log n) per direction. Transform plans
//! are built once per grid and shared; each call works on its own buffers.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bc {
    Periodic,
    Neumann,
}

impl fmt::Display for Bc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bc::Periodic => write!(f, "periodic"),
            Bc::Neumann => write!(f, "neumann"),
        }
    }
}

/// Tensor grid on [x0, x1] x [y0, y1] with its transform plans, Laplacian
/// eigenvalues, and Parseval weights. Construct through `periodic` or
/// `neumann`; fields index row-major, values[i * ny + j] at (x_i, y_j).
pub struct Grid {
    nx: usize,
    ny: usize,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    bc: Bc,
    /// Laplacian eigenvalue per coefficient (all <= 0).
    eig: Vec<f64>,
    /// Maps squared coefficient magnitudes to the integral of f^2.
    parseval: Vec<f64>,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Grid {{ {}x{}, [{}, {}]x[{}, {}], {} }}",
            self.nx, self.ny, self.x0, self.x1, self.y0, self.y1, self.bc
        )
    }
}

impl Grid {
    pub fn periodic(nx: usize, ny: usize, x: (f64, f64), y: (f64, f64)) -> Arc<Grid> {
        Self::build(nx, ny, x, y, Bc::Periodic)
    }

    pub fn neumann(nx: usize, ny: usize, x: (f64, f64), y: (f64, f64)) -> Arc<Grid> {
        Self::build(nx, ny, x, y, Bc::Neumann)
    }

    /// Square grid shorthand used by the experiment drivers.
    pub fn square(bc: Bc, n: usize, lo: f64, hi: f64) -> Arc<Grid> {
        Self::build(n, n, (lo, hi), (lo, hi), bc)
    }

    fn build(nx: usize, ny: usize, x: (f64, f64), y: (f64, f64), bc: Bc) -> Arc<Grid> {
        assert!(nx >= 4 && ny >= 4, "grid must be at least 4x4 (got {nx}x{ny})");
        assert!(x.1 > x.0 && y.1 > y.0, "domain must have positive extent");
        let (lx, ly) = (x.1 - x.0, y.1 - y.0);
        let mut planner = FftPlanner::new();
        let (fx, fy) = match bc {
            Bc::Periodic => (nx, ny),
            Bc::Neumann => (2 * nx, 2 * ny),
        };
        let fwd_x = planner.plan_fft_forward(fx);
        let inv_x = planner.plan_fft_inverse(fx);
        let fwd_y = planner.plan_fft_forward(fy);
        let inv_y = planner.plan_fft_inverse(fy);

        let mut eig = vec![0.0; nx * ny];
        let mut parseval = vec![0.0; nx * ny];
        let nn = (nx * ny) as f64;
        for kx in 0..nx {
            for ky in 0..ny {
                let idx = kx * ny + ky;
                match bc {
                    Bc::Periodic => {
                        let fx = signed_freq(kx, nx) * 2.0 * PI / lx;
                        let fyv = signed_freq(ky, ny) * 2.0 * PI / ly;
                        eig[idx] = -(fx * fx + fyv * fyv);
                        parseval[idx] = lx * ly / (nn * nn);
                    }
                    Bc::Neumann => {
                        let fx = kx as f64 * PI / lx;
                        let fyv = ky as f64 * PI / ly;
                        eig[idx] = -(fx * fx + fyv * fyv);
                        let ex = if kx == 0 { 1.0 } else { 2.0 };
                        let ey = if ky == 0 { 1.0 } else { 2.0 };
                        parseval[idx] = lx * ly * ex * ey / (nn * nn);
                    }
                }
            }
        }

        Arc::new(Grid {
            nx,
            ny,
            x0: x.0,
            x1: x.1,
            y0: y.0,
            y1: y.1,
            bc,
            eig,
            parseval,
            fwd_x,
            inv_x,
            fwd_y,
            inv_y,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bc(&self) -> Bc {
        self.bc
    }

    pub fn domain(&self) -> (f64, f64, f64, f64) {
        (self.x0, self.x1, self.y0, self.y1)
    }

    /// Node abscissa. Periodic grids include the left wall and stop one step
    /// short of the right one; Neumann grids sit on cell midpoints.
    pub fn x(&self, i: usize) -> f64 {
        let h = (self.x1 - self.x0) / self.nx as f64;
        match self.bc {
            Bc::Periodic => self.x0 + i as f64 * h,
            Bc::Neumann => self.x0 + (i as f64 + 0.5) * h,
        }
    }

    pub fn y(&self, j: usize) -> f64 {
        let h = (self.y1 - self.y0) / self.ny as f64;
        match self.bc {
            Bc::Periodic => self.y0 + j as f64 * h,
            Bc::Neumann => self.y0 + (j as f64 + 0.5) * h,
        }
    }

    /// Quadrature weight of one node: h_x h_y.
    pub fn cell_area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0) / (self.nx * self.ny) as f64
    }

    pub fn same_layout(&self, other: &Grid) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.bc == other.bc
            && self.x0 == other.x0
            && self.x1 == other.x1
            && self.y0 == other.y0
            && self.y1 == other.y1
    }

    /// Forward transform to the coefficient array of the grid's basis.
    pub fn forward(&self, values: &[f64]) -> Spectrum {
        assert_eq!(values.len(), self.len());
        match self.bc {
            Bc::Periodic => Spectrum::Fourier(self.fft2(values)),
            Bc::Neumann => Spectrum::Cosine(self.dct2(values)),
        }
    }

    /// Inverse transform back to nodal values.
    pub fn inverse(&self, spec: &Spectrum) -> Vec<f64> {
        match spec {
            Spectrum::Fourier(c) => self.ifft2(c),
            Spectrum::Cosine(c) => self.idct2(c),
        }
    }

    fn fft2(&self, values: &[f64]) -> Vec<Complex<f64>> {
        let (nx, ny) = (self.nx, self.ny);
        let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        for row in buf.chunks_exact_mut(ny) {
            self.fwd_y.process(row);
        }
        let mut col = vec![Complex::new(0.0, 0.0); nx];
        for j in 0..ny {
            for i in 0..nx {
                col[i] = buf[i * ny + j];
            }
            self.fwd_x.process(&mut col);
            for i in 0..nx {
                buf[i * ny + j] = col[i];
            }
        }
        buf
    }

    fn ifft2(&self, coef: &[Complex<f64>]) -> Vec<f64> {
        let (nx, ny) = (self.nx, self.ny);
        assert_eq!(coef.len(), nx * ny);
        let mut buf = coef.to_vec();
        for row in buf.chunks_exact_mut(ny) {
            self.inv_y.process(row);
        }
        let mut col = vec![Complex::new(0.0, 0.0); nx];
        let scale = 1.0 / (nx * ny) as f64;
        let mut out = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                col[i] = buf[i * ny + j];
            }
            self.inv_x.process(&mut col);
            for i in 0..nx {
                out[i * ny + j] = col[i].re * scale;
            }
        }
        out
    }

    fn dct2(&self, values: &[f64]) -> Vec<f64> {
        let (nx, ny) = (self.nx, self.ny);
        let mut work = vec![0.0; nx * ny];
        let mut row_out = vec![0.0; ny];
        for i in 0..nx {
            dct2_1d(&self.fwd_y, &values[i * ny..(i + 1) * ny], &mut row_out);
            work[i * ny..(i + 1) * ny].copy_from_slice(&row_out);
        }
        let mut col = vec![0.0; nx];
        let mut col_out = vec![0.0; nx];
        for j in 0..ny {
            for i in 0..nx {
                col[i] = work[i * ny + j];
            }
            dct2_1d(&self.fwd_x, &col, &mut col_out);
            for i in 0..nx {
                work[i * ny + j] = col_out[i];
            }
        }
        work
    }

    fn idct2(&self, coef: &[f64]) -> Vec<f64> {
        let (nx, ny) = (self.nx, self.ny);
        assert_eq!(coef.len(), nx * ny);
        let mut work = vec![0.0; nx * ny];
        let mut row_out = vec![0.0; ny];
        for i in 0..nx {
            dct3_1d(&self.inv_y, &coef[i * ny..(i + 1) * ny], &mut row_out);
            work[i * ny..(i + 1) * ny].copy_from_slice(&row_out);
        }
        let mut col = vec![0.0; nx];
        let mut col_out = vec![0.0; nx];
        for j in 0..ny {
            for i in 0..nx {
                col[i] = work[i * ny + j];
            }
            dct3_1d(&self.inv_x, &col, &mut col_out);
            for i in 0..nx {
                work[i * ny + j] = col_out[i];
            }
        }
        work
    }
}

fn signed_freq(k: usize, n: usize) -> f64 {
    if 2 * k <= n {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Unnormalized DCT-II through a length-2n FFT of the mirror extension:
/// C_k = sum_j x_j cos(pi k (2j+1) / (2n)) = Re(exp(-i pi k/(2n)) Z_k) / 2
/// where Z = FFT([x, reverse(x)]).
fn dct2_1d(fft2n: &Arc<dyn Fft<f64>>, x: &[f64], out: &mut [f64]) {
    let n = x.len();
    let mut z: Vec<Complex<f64>> = Vec::with_capacity(2 * n);
    z.extend(x.iter().map(|&v| Complex::new(v, 0.0)));
    z.extend(x.iter().rev().map(|&v| Complex::new(v, 0.0)));
    fft2n.process(&mut z);
    for k in 0..n {
        let ang = -PI * k as f64 / (2 * n) as f64;
        let ph = Complex::new(ang.cos(), ang.sin());
        out[k] = 0.5 * (ph * z[k]).re;
    }
}

/// Inverse of `dct2_1d` (a DCT-III with matching normalization):
/// x_j = C_0/n + 2/n sum_{k>=1} C_k cos(pi k (2j+1)/(2n)), computed by
/// rebuilding the length-2n spectrum and inverse transforming.
fn dct3_1d(ifft2n: &Arc<dyn Fft<f64>>, coef: &[f64], out: &mut [f64]) {
    let n = coef.len();
    let m = 2 * n;
    let mut v = vec![Complex::new(0.0, 0.0); m];
    for k in 0..n {
        let ang = PI * k as f64 / m as f64;
        v[k] = 2.0 * coef[k] * Complex::new(ang.cos(), ang.sin());
    }
    for k in n + 1..m {
        v[k] = v[m - k].conj();
    }
    ifft2n.process(&mut v);
    let scale = 1.0 / m as f64;
    for j in 0..n {
        out[j] = v[j].re * scale;
    }
}

/// Coefficient array produced by `Grid::forward`.
pub enum Spectrum {
    Fourier(Vec<Complex<f64>>),
    Cosine(Vec<f64>),
}

impl Spectrum {
    /// Multiply coefficient idx by g(idx) in place.
    fn scale_modes(&mut self, mut g: impl FnMut(usize) -> f64) {
        match self {
            Spectrum::Fourier(c) => {
                for (idx, v) in c.iter_mut().enumerate() {
                    *v *= g(idx);
                }
            }
            Spectrum::Cosine(c) => {
                for (idx, v) in c.iter_mut().enumerate() {
                    *v *= g(idx);
                }
            }
        }
    }

    fn mag_sq(&self, idx: usize) -> f64 {
        match self {
            Spectrum::Fourier(c) => c[idx].norm_sqr(),
            Spectrum::Cosine(c) => c[idx] * c[idx],
        }
    }
}

/// Nodal scalar field bound to its grid.
#[derive(Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &Arc<Grid>) -> Field {
        Field { grid: grid.clone(), values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Field {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nx() {
            for j in 0..grid.ny() {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        Field { grid: grid.clone(), values }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Field {
        assert_eq!(values.len(), grid.len(), "field length does not match grid");
        Field { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// L2 pairing by nodal quadrature: cell_area * sum_i f_i g_i. Exact for
    /// products of two fields resolved by the basis.
    pub fn inner(&self, other: &Field) -> f64 {
        assert!(
            self.grid.same_layout(&other.grid),
            "inner product between fields on different grids"
        );
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        s * self.grid.cell_area()
    }

    pub fn norm_l2(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    /// Spectral Laplacian: transform, scale by the eigenvalues, transform back.
    pub fn laplacian(&self) -> Field {
        let mut spec = self.grid.forward(&self.values);
        let eig = &self.grid.eig;
        spec.scale_modes(|idx| eig[idx]);
        Field { grid: self.grid.clone(), values: self.grid.inverse(&spec) }
    }

    /// || grad f ||^2 = sum of (-eigenvalue) * |coefficient|^2, weighted so the
    /// sum equals the continuous integral. Identical (to rounding) to
    /// inner(-laplacian(f), f).
    pub fn grad_norm_sq(&self) -> f64 {
        let spec = self.grid.forward(&self.values);
        let mut acc = 0.0;
        for idx in 0..self.grid.len() {
            acc += -self.grid.eig[idx] * self.grid.parseval[idx] * spec.mag_sq(idx);
        }
        acc
    }

    /// Parseval sum of squared coefficients; equals inner(f, f) to rounding.
    pub fn norm_sq_spectral(&self) -> f64 {
        let spec = self.grid.forward(&self.values);
        (0..self.grid.len())
            .map(|idx| self.grid.parseval[idx] * spec.mag_sq(idx))
            .sum()
    }

    /// cell_area * sum_i f(values_i); nodal quadrature of a pointwise function.
    pub fn integrate_nodal(&self, f: impl Fn(f64) -> f64) -> f64 {
        let s: f64 = self.values.iter().map(|&v| f(v)).sum();
        s * self.grid.cell_area()
    }

    /// Zero the top third of modes in each direction (2/3 dealiasing rule).
    pub fn dealias_two_thirds(&self) -> Field {
        let mut spec = self.grid.forward(&self.values);
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let bc = self.grid.bc();
        let keep = |k: usize, n: usize| -> bool {
            match bc {
                Bc::Periodic => 3.0 * signed_freq(k, n).abs() <= n as f64,
                Bc::Neumann => 3 * k <= 2 * (n - 1),
            }
        };
        spec.scale_modes(|idx| {
            let (kx, ky) = (idx / ny, idx % ny);
            if keep(kx, nx) && keep(ky, ny) {
                1.0
            } else {
                0.0
            }
        });
        Field { grid: self.grid.clone(), values: self.grid.inverse(&spec) }
    }
}

/// Solve (a - kappa Lap) u = rhs in coefficient space. Requires a > 0 and
/// kappa >= 0 so every coefficient divisor a - kappa eig is positive.
pub fn solve_helmholtz(a: f64, kappa: f64, rhs: &Field) -> Field {
    assert!(a > 0.0, "helmholtz needs a > 0 (got {a})");
    assert!(kappa >= 0.0, "helmholtz needs kappa >= 0 (got {kappa})");
    let grid = rhs.grid().clone();
    let mut spec = grid.forward(rhs.values());
    let eig = &grid.eig;
    spec.scale_modes(|idx| 1.0 / (a - kappa * eig[idx]));
    Field { grid: grid.clone(), values: grid.inverse(&spec) }
}

/// out = sum of c_k * fields_k + base; the axpy helper the stepper leans on.
pub fn linear_combination(base: &Field, terms: &[(f64, &Field)]) -> Field {
    let mut out = base.clone();
    for &(c, f) in terms {
        assert!(out.grid.same_layout(&f.grid));
        for (o, &v) in out.values.iter_mut().zip(f.values()) {
            *o += c * v;
        }
    }
    out
}
