//! Pointwise advection operators `-(u . ∇) f`.
//!
//! Radial neighbours beyond the axis are taken from the parity reflection;
//! beyond the wall, Dirichlet fields reflect oddly and Neumann fields evenly.

use serde::{Deserialize, Serialize};

use crate::grid::{Boundary, Parity, ScalarField, VelocityField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PiScheme {
    /// First-order upwind; monotone.
    Upwind1,
    /// Second-order MUSCL reconstruction with the minmod limiter.
    MusclMinmod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaScheme {
    Centered2,
}

/// Value at radial index `i` (possibly a ghost) and axial index `j`.
#[inline]
fn ghost(f: &ScalarField, i: isize, j: usize) -> f64 {
    let n = f.grid().n_r() as isize;
    if i < 0 {
        let v = f.at((-i) as usize, j);
        match f.parity() {
            Parity::Even => v,
            Parity::Odd => -v,
        }
    } else if i > n {
        let v = f.at((2 * n - i) as usize, j);
        match f.boundary() {
            Boundary::NeumannZero => v,
            Boundary::DirichletZero => -v,
        }
    } else {
        f.at(i as usize, j)
    }
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Upwind-biased one-sided difference along a line `m2, m1, c, p1, p2`
/// for transport speed `a`.
#[inline]
fn upwind_diff(a: f64, m1: f64, c: f64, p1: f64) -> f64 {
    if a > 0.0 {
        c - m1
    } else {
        p1 - c
    }
}

#[inline]
fn muscl_diff(a: f64, m2: f64, m1: f64, c: f64, p1: f64, p2: f64) -> f64 {
    if a > 0.0 {
        let right = c + 0.5 * minmod(p1 - c, c - m1);
        let left = m1 + 0.5 * minmod(c - m1, m1 - m2);
        right - left
    } else {
        let right = p1 - 0.5 * minmod(p2 - p1, p1 - c);
        let left = c - 0.5 * minmod(p1 - c, c - m1);
        right - left
    }
}

/// `-(u . ∇) f` at node `(i, j)` with the chosen transport scheme.
#[inline]
pub fn pi_advection_at(
    scheme: PiScheme,
    f: &ScalarField,
    u: &VelocityField,
    i: usize,
    j: usize,
) -> f64 {
    let g = f.grid();
    let ii = i as isize;
    let (jm, jp) = (g.jm(j), g.jp(j));
    let a = u.u_r.at(i, j);
    let b = u.u_z.at(i, j);
    let c = f.at(i, j);
    let (dr, dz) = match scheme {
        PiScheme::Upwind1 => {
            let dr = if a == 0.0 {
                0.0
            } else {
                upwind_diff(a, ghost(f, ii - 1, j), c, ghost(f, ii + 1, j))
            };
            let dz = upwind_diff(b, f.at(i, jm), c, f.at(i, jp));
            (dr, dz)
        }
        PiScheme::MusclMinmod => {
            let dr = if a == 0.0 {
                0.0
            } else {
                muscl_diff(
                    a,
                    ghost(f, ii - 2, j),
                    ghost(f, ii - 1, j),
                    c,
                    ghost(f, ii + 1, j),
                    ghost(f, ii + 2, j),
                )
            };
            let dz = muscl_diff(b, f.at(i, g.jm(jm)), f.at(i, jm), c, f.at(i, jp), f.at(i, g.jp(jp)));
            (dr, dz)
        }
    };
    -(a * dr / g.h_r() + b * dz / g.h_z())
}

/// `-(u . ∇) f` with second-order centered differences.
#[inline]
pub fn centered_advection_at(f: &ScalarField, u: &VelocityField, i: usize, j: usize) -> f64 {
    let g = f.grid();
    let ii = i as isize;
    let a = u.u_r.at(i, j);
    let b = u.u_z.at(i, j);
    let dr = if a == 0.0 {
        0.0
    } else {
        (ghost(f, ii + 1, j) - ghost(f, ii - 1, j)) / (2.0 * g.h_r())
    };
    let dz = (f.at(i, g.jp(j)) - f.at(i, g.jm(j))) / (2.0 * g.h_z());
    -(a * dr + b * dz)
}
