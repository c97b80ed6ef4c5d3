//! Stream-function solve `-(d_r^2 + (3/r) d_r + d_z^2) q = Omega` for
//! `q = psi^theta / r`, and recovery of the meridional velocity.
//!
//! A discrete Fourier transform in the periodic `z` direction diagonalises
//! the axial second difference, leaving one radial tridiagonal system per
//! axial mode. Each system is the [`radial5`](crate::grid) stencil multiplied
//! through by the row's 5D volume, which makes it symmetric and diagonally
//! dominant; the outer wall is homogeneous Dirichlet, so every mode
//! (including `k = 0`) is uniquely solvable.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{self, Boundary, Grid, Parity, ScalarField, VelocityField};
use crate::par;

/// Thomas factorisation of one radial system.
#[derive(Debug, Clone)]
struct ModeFactor {
    sub: Vec<f64>,
    upper_ratio: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl ModeFactor {
    fn new(sub: Vec<f64>, diag: &[f64], sup: &[f64]) -> Self {
        let m = diag.len();
        let mut upper_ratio = vec![0.0; m];
        let mut inv_pivot = vec![0.0; m];
        let mut prev = 0.0;
        for i in 0..m {
            let pivot = diag[i] - sub[i] * prev;
            inv_pivot[i] = 1.0 / pivot;
            prev = if i + 1 < m { sup[i] * inv_pivot[i] } else { 0.0 };
            upper_ratio[i] = prev;
        }
        Self {
            sub,
            upper_ratio,
            inv_pivot,
        }
    }

    fn solve_in_place(&self, x: &mut [Complex64]) {
        let m = x.len();
        let mut prev = Complex64::new(0.0, 0.0);
        for ((xi, &sub), &inv) in x.iter_mut().zip(&self.sub).zip(&self.inv_pivot) {
            *xi = (*xi - prev * sub) * inv;
            prev = *xi;
        }
        for i in (0..m - 1).rev() {
            let next = x[i + 1];
            x[i] -= next * self.upper_ratio[i];
        }
    }
}

/// Solution of the stream-function problem.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSolution {
    /// `q = psi^theta / r`, even in `r`, zero on the wall.
    pub psi_over_r: ScalarField,
    /// `|| -Δ5 q - Omega ||_2` over rows inside the wall.
    pub residual_norm: f64,
}

/// Reusable direct solver for one grid: FFT plans and per-mode radial
/// factorisations are built once.
pub struct StreamSolver {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    modes: Vec<ModeFactor>,
    volumes: Vec<f64>,
}

impl std::fmt::Debug for StreamSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StreamSolver").field("grid", &self.grid).finish_non_exhaustive()
    }
}

impl StreamSolver {
    pub fn new(grid: Grid) -> Self {
        let n_z = grid.n_z();
        let m = grid.n_r();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_z);
        let inverse = planner.plan_fft_inverse(n_z);

        let h2 = grid.h_r() * grid.h_r();
        let volumes: Vec<f64> = (0..m).map(|i| grid.volume5(i)).collect();
        let up: Vec<f64> = (0..m).map(|i| grid.face_r(i).powi(3) / h2).collect();
        let down: Vec<f64> = (0..m)
            .map(|i| if i == 0 { 0.0 } else { grid.face_r(i - 1).powi(3) / h2 })
            .collect();
        let sub: Vec<f64> = down.iter().map(|d| -d).collect();
        let sup: Vec<f64> = up.iter().map(|u| -u).collect();

        let hz = grid.h_z();
        let modes = par::map_range(n_z, |k| {
            let s = (PI * k as f64 / n_z as f64).sin();
            let lambda = 4.0 * s * s / (hz * hz);
            let diag: Vec<f64> = (0..m)
                .map(|i| up[i] + down[i] + lambda * volumes[i])
                .collect();
            ModeFactor::new(sub.clone(), &diag, &sup)
        });

        Self {
            grid,
            forward,
            inverse,
            modes,
            volumes,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Solves for `q` without evaluating the residual.
    pub fn solve_field(&self, omega: &ScalarField) -> Result<ScalarField> {
        self.validate(omega)?;
        let g = self.grid;
        let n_z = g.n_z();
        let m = g.n_r();

        let spectra: Vec<Vec<Complex64>> = par::map_range(m, |i| {
            let mut buf: Vec<Complex64> =
                omega.row(i).iter().map(|&v| Complex64::new(v, 0.0)).collect();
            self.forward.process(&mut buf);
            buf
        });

        let columns: Vec<Vec<Complex64>> = par::map_range(n_z, |k| {
            let mut col: Vec<Complex64> =
                (0..m).map(|i| spectra[i][k] * self.volumes[i]).collect();
            self.modes[k].solve_in_place(&mut col);
            col
        });

        let scale = 1.0 / n_z as f64;
        let mut q = ScalarField::zeros(g, Parity::Even, Boundary::DirichletZero);
        par::for_each_row(&mut q.values, n_z, |i, row| {
            if i == m {
                return;
            }
            let mut buf: Vec<Complex64> = (0..n_z).map(|k| columns[k][i]).collect();
            self.inverse.process(&mut buf);
            for (v, c) in row.iter_mut().zip(&buf) {
                *v = c.re * scale;
            }
        });
        Ok(q)
    }

    pub fn solve(&self, omega: &ScalarField) -> Result<StreamSolution> {
        let q = self.solve_field(omega)?;
        let residual_norm = residual_norm(&q, omega)?;
        Ok(StreamSolution {
            psi_over_r: q,
            residual_norm,
        })
    }

    fn validate(&self, omega: &ScalarField) -> Result<()> {
        if omega.grid() != &self.grid {
            return Err(Error::invalid("vorticity lives on a different grid than the solver"));
        }
        if omega.parity() != Parity::Even {
            return Err(Error::invalid("stream solve requires an even-parity right-hand side"));
        }
        omega.check_finite()
    }
}

/// `|| -Δ5 q - Omega ||_2` over the rows strictly inside the wall.
pub fn residual_norm(q: &ScalarField, omega: &ScalarField) -> Result<f64> {
    let g = *q.grid();
    let n = g.n_r();
    let lap = grid::laplace5d_apply(q)?;
    let res = lap.zip_map(omega, |l, w| -l - w);
    Ok(g.integrate(|i, j| {
        if i == n {
            0.0
        } else {
            let v = res.at(i, j);
            v * v
        }
    })
    .sqrt())
}

/// One-shot convenience wrapper around [`StreamSolver`].
pub fn solve_stream5d(omega: &ScalarField, grid: &Grid) -> Result<StreamSolution> {
    StreamSolver::new(*grid).solve(omega)
}

/// `u^r = -r d_z q`, `u^z = 2 q + r d_r q`.
pub fn velocity_from_q(q: &ScalarField) -> Result<VelocityField> {
    if q.parity() != Parity::Even {
        return Err(Error::invalid("psi/r must be an even-parity field"));
    }
    let u_r = grid::ddz(q).scaled(-1.0).times_r().with_boundary(Boundary::NeumannZero);
    let dr_q = grid::ddr(q).times_r();
    let u_z = q
        .zip_map(&dr_q, |a, b| 2.0 * a + b)
        .with_parity(Parity::Even)
        .with_boundary(Boundary::NeumannZero);
    VelocityField::new(u_r, u_z)
}

pub fn velocity_from_stream(sol: &StreamSolution) -> Result<VelocityField> {
    velocity_from_q(&sol.psi_over_r)
}

/// Pointwise `|∇^2 q|^2` assembled from `d_r^2 q`, `(1/r) d_r q`, `d_z^2 q`
/// and `d_rz q` (axis: `(1/r) d_r q -> d_r^2 q`).
pub fn hessian_sq(q: &ScalarField) -> Result<ScalarField> {
    let qrr = grid::d2r(q);
    let dr = grid::ddr(q);
    let qr_over_r = dr.over_r()?;
    let qzz = grid::d2z(q);
    let qrz = grid::ddz(&dr);
    let mut out = qrr.map(|v| v * v);
    for f in [&qr_over_r, &qzz, &qrz] {
        out = out.zip_map(f, |acc, v| acc + v * v);
    }
    Ok(out.with_parity(Parity::Even))
}

/// Empirical weighted Calderon-Zygmund constant at `p = 2`:
/// `|| |∇^2 q| ||_2 / || Omega ||_2`, 0 for vanishing `Omega`.
pub fn cz_operator_ratio(omega: &ScalarField, solver: &StreamSolver) -> Result<f64> {
    let denom = grid::norm_l2(omega);
    if denom == 0.0 {
        return Ok(0.0);
    }
    let q = solver.solve_field(omega)?;
    let h = hessian_sq(&q)?;
    let num = q.grid().integrate(|i, j| h.at(i, j)).sqrt();
    Ok(num / denom)
}
