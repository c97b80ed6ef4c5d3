//! Meridional (r, z) grids, sampled axisymmetric fields and their stencils.
//!
//! Nodes sit at `r_i = i * h_r` for `i = 0..=n_r` (the axis is row 0 and the
//! outer wall `r = r_max` is row `n_r`) and at `z_j = j * h_z` for
//! `j = 0..n_z`, periodic in `z`. Values are stored radial-major: row `i`
//! holds the `n_z` axial samples at radius `r_i`.
//!
//! Norms are three-dimensional: a field `f(r, z)` is integrated against
//! `dx = 2 pi r dr dz` (trapezoid in `r`, rectangle rule in `z`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Smallest admissible number of cells in either direction.
pub const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_r: usize,
    n_z: usize,
    r_max: f64,
    z_len: f64,
    h_r: f64,
    h_z: f64,
}

impl Grid {
    pub fn new(n_r: usize, n_z: usize, r_max: f64, z_len: f64) -> Result<Self> {
        if n_r < MIN_CELLS || n_z < MIN_CELLS {
            return Err(Error::config(format!(
                "grid needs at least {MIN_CELLS} cells per direction, got n_r = {n_r}, n_z = {n_z}"
            )));
        }
        if !(r_max.is_finite() && r_max > 0.0) || !(z_len.is_finite() && z_len > 0.0) {
            return Err(Error::config(format!(
                "grid extents must be positive and finite, got r_max = {r_max}, z_len = {z_len}"
            )));
        }
        Ok(Self {
            n_r,
            n_z,
            r_max,
            z_len,
            h_r: r_max / n_r as f64,
            h_z: z_len / n_z as f64,
        })
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn z_len(&self) -> f64 {
        self.z_len
    }

    pub fn h_r(&self) -> f64 {
        self.h_r
    }

    pub fn h_z(&self) -> f64 {
        self.h_z
    }

    /// Number of radial node rows, `n_r + 1`.
    pub fn rows(&self) -> usize {
        self.n_r + 1
    }

    pub fn len(&self) -> usize {
        self.rows() * self.n_z
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.h_r
    }

    pub fn z(&self, j: usize) -> f64 {
        j as f64 * self.h_z
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_z + j
    }

    #[inline]
    pub(crate) fn jp(&self, j: usize) -> usize {
        if j + 1 == self.n_z {
            0
        } else {
            j + 1
        }
    }

    #[inline]
    pub(crate) fn jm(&self, j: usize) -> usize {
        if j == 0 {
            self.n_z - 1
        } else {
            j - 1
        }
    }

    /// Radius of the cell face between rows `i` and `i + 1`.
    #[inline]
    pub(crate) fn face_r(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h_r
    }

    /// Radial 5D control volume of row `i`, `(1/h_r) * int r^3 dr` over
    /// `[r_i - h_r/2, r_i + h_r/2] ∩ [0, inf)`. Approximately `r_i^3`.
    #[inline]
    pub fn volume5(&self, i: usize) -> f64 {
        let hi = self.face_r(i);
        let lo = if i == 0 { 0.0 } else { self.face_r(i - 1) };
        (hi.powi(4) - lo.powi(4)) / (4.0 * self.h_r)
    }

    /// Quadrature weight of node row `i` for the measure `2 pi r dr dz`.
    #[inline]
    pub fn weight3(&self, i: usize) -> f64 {
        let trap = if i == 0 || i == self.n_r { 0.5 } else { 1.0 };
        2.0 * PI * self.r(i) * self.h_r * trap * self.h_z
    }

    /// `int f dx` over the domain, with `f` sampled per node.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(usize, usize) -> f64 + Sync + Send,
    {
        let n_z = self.n_z;
        par::sum_range(self.rows(), |i| {
            let w = self.weight3(i);
            if w == 0.0 {
                return 0.0;
            }
            let row: f64 = (0..n_z).map(|j| f(i, j)).fold(0.0, |a, x| a + x);
            w * row
        })
    }
}

/// `make_grid` operation: validated grid constructor.
pub fn make_grid(n_r: usize, n_z: usize, r_max: f64, z_len: f64) -> Result<Grid> {
    Grid::new(n_r, n_z, r_max, z_len)
}

/// Behaviour of a field under reflection `r -> -r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// Condition imposed at `r = r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    DirichletZero,
    NeumannZero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    pub(crate) values: Vec<f64>,
    parity: Parity,
    boundary: Boundary,
}

impl ScalarField {
    pub fn zeros(grid: Grid, parity: Parity, boundary: Boundary) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
            parity,
            boundary,
        }
    }

    /// Samples `f(r, z)` on every node. Odd fields are pinned to zero on the
    /// axis and Dirichlet fields to zero on the outer wall.
    pub fn from_fn<F>(grid: Grid, parity: Parity, boundary: Boundary, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        let mut field = Self::zeros(grid, parity, boundary);
        let n_z = grid.n_z();
        par::for_each_row(&mut field.values, n_z, |i, row| {
            let r = grid.r(i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(r, grid.z(j));
            }
        });
        field.enforce_constraints();
        field.check_finite()?;
        Ok(field)
    }

    pub fn from_values(
        grid: Grid,
        parity: Parity,
        boundary: Boundary,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "expected {} values for a {}x{} grid, got {}",
                grid.len(),
                grid.rows(),
                grid.n_z(),
                values.len()
            )));
        }
        let field = Self {
            grid,
            values,
            parity,
            boundary,
        };
        field.check_finite()?;
        if parity == Parity::Odd && field.row(0).iter().any(|&v| v != 0.0) {
            return Err(Error::invalid("odd-parity field must vanish on the axis"));
        }
        Ok(field)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n_z = self.grid.n_z();
        &self.values[i * n_z..(i + 1) * n_z]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid("field contains NaN or infinite values"))
        }
    }

    /// Zeroes the axis row of odd fields and the wall row of Dirichlet fields.
    pub(crate) fn enforce_constraints(&mut self) {
        let n_z = self.grid.n_z();
        if self.parity == Parity::Odd {
            self.values[..n_z].fill(0.0);
        }
        if self.boundary == Boundary::DirichletZero {
            let start = self.grid.n_r() * n_z;
            self.values[start..].fill(0.0);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    /// Pointwise combination; metadata is taken from `self`.
    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            ..self.clone()
        }
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    /// Multiplies by `r`, which flips the parity.
    pub fn times_r(&self) -> Self {
        let g = self.grid;
        let mut out = Self {
            parity: self.parity.flip(),
            ..self.clone()
        };
        let n_z = g.n_z();
        par::for_each_row(&mut out.values, n_z, |i, row| {
            let r = g.r(i);
            row.iter_mut().for_each(|v| *v *= r);
        });
        out
    }

    /// Divides an odd field by `r`; on the axis the limit `f / r -> d_r f`
    /// is used.
    pub fn over_r(&self) -> Result<Self> {
        if self.parity != Parity::Odd {
            return Err(Error::invalid("division by r requires an odd-parity field"));
        }
        let g = self.grid;
        let h = g.h_r();
        let n_z = g.n_z();
        let mut out = Self {
            parity: Parity::Even,
            ..self.clone()
        };
        par::for_each_row(&mut out.values, n_z, |i, row| {
            if i == 0 {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = self.at(1, j) / h;
                }
            } else {
                let r = g.r(i);
                row.iter_mut().for_each(|v| *v /= r);
            }
        });
        Ok(out)
    }
}

/// Meridional velocity `u = u^r e_r + u^z e_z`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub u_r: ScalarField,
    pub u_z: ScalarField,
}

impl VelocityField {
    pub fn new(u_r: ScalarField, u_z: ScalarField) -> Result<Self> {
        if u_r.parity() != Parity::Odd || u_z.parity() != Parity::Even {
            return Err(Error::invalid("velocity needs odd u_r and even u_z"));
        }
        if u_r.grid() != u_z.grid() {
            return Err(Error::invalid("velocity components live on different grids"));
        }
        Ok(Self { u_r, u_z })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            u_r: ScalarField::zeros(grid, Parity::Odd, Boundary::NeumannZero),
            u_z: ScalarField::zeros(grid, Parity::Even, Boundary::NeumannZero),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.u_r.grid()
    }

    /// Largest pointwise speed `sqrt(u_r^2 + u_z^2)`.
    pub fn max_speed(&self) -> f64 {
        self.u_r
            .values()
            .iter()
            .zip(self.u_z.values())
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    pub fn is_finite(&self) -> bool {
        self.u_r.is_finite() && self.u_z.is_finite()
    }

    /// Discrete axisymmetric divergence `d_r u^r + u^r / r + d_z u^z`.
    pub fn divergence(&self) -> ScalarField {
        let dr = ddr(&self.u_r);
        let over_r = self.u_r.over_r().expect("u_r is odd");
        let dz = ddz(&self.u_z);
        dr.zip_map(&over_r, |a, b| a + b).zip_map(&dz, |a, b| a + b)
    }
}

/// `(int |f|^p dx)^(1/p)` with the 3D measure; `p = inf` gives `max |f|`.
pub fn norm_lp(f: &ScalarField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!("norm exponent must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let integral = if p == 2.0 {
        f.grid.integrate(|i, j| {
            let v = f.at(i, j);
            v * v
        })
    } else {
        f.grid.integrate(|i, j| f.at(i, j).abs().powf(p))
    };
    Ok(integral.powf(1.0 / p))
}

pub fn norm_l2(f: &ScalarField) -> f64 {
    norm_lp(f, 2.0).expect("p = 2 is valid")
}

/// Applies `op(i, j) -> value` to every node of a new field with the given
/// metadata.
fn build(grid: Grid, parity: Parity, boundary: Boundary, op: impl Fn(usize, usize) -> f64 + Sync + Send) -> ScalarField {
    let mut out = ScalarField::zeros(grid, parity, boundary);
    par::for_each_row(&mut out.values, grid.n_z(), |i, row| {
        for (j, v) in row.iter_mut().enumerate() {
            *v = op(i, j);
        }
    });
    out
}

/// Radial derivative. Centered in the interior, parity-reflected on the axis,
/// one-sided second order on the outer wall. The result has flipped parity.
pub fn ddr(f: &ScalarField) -> ScalarField {
    let g = *f.grid();
    let n = g.n_r();
    let h = g.h_r();
    let parity = f.parity();
    build(g, parity.flip(), f.boundary(), |i, j| {
        if i == 0 {
            match parity {
                Parity::Even => 0.0,
                Parity::Odd => f.at(1, j) / h,
            }
        } else if i == n {
            (3.0 * f.at(n, j) - 4.0 * f.at(n - 1, j) + f.at(n - 2, j)) / (2.0 * h)
        } else {
            (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * h)
        }
    })
}

/// Axial derivative, centered and periodic.
pub fn ddz(f: &ScalarField) -> ScalarField {
    let g = *f.grid();
    let h = g.h_z();
    build(g, f.parity(), f.boundary(), |i, j| {
        (f.at(i, g.jp(j)) - f.at(i, g.jm(j))) / (2.0 * h)
    })
}

/// Second radial derivative with the same boundary treatment as [`ddr`].
pub fn d2r(f: &ScalarField) -> ScalarField {
    let g = *f.grid();
    let n = g.n_r();
    let h2 = g.h_r() * g.h_r();
    let parity = f.parity();
    build(g, parity, f.boundary(), |i, j| {
        if i == 0 {
            match parity {
                Parity::Even => 2.0 * (f.at(1, j) - f.at(0, j)) / h2,
                Parity::Odd => 0.0,
            }
        } else if i == n {
            (2.0 * f.at(n, j) - 5.0 * f.at(n - 1, j) + 4.0 * f.at(n - 2, j) - f.at(n - 3, j)) / h2
        } else {
            (f.at(i + 1, j) - 2.0 * f.at(i, j) + f.at(i - 1, j)) / h2
        }
    })
}

/// Second axial derivative, centered and periodic.
pub fn d2z(f: &ScalarField) -> ScalarField {
    let g = *f.grid();
    let h2 = g.h_z() * g.h_z();
    build(g, f.parity(), f.boundary(), |i, j| {
        (f.at(i, g.jp(j)) - 2.0 * f.at(i, j) + f.at(i, g.jm(j))) / h2
    })
}

/// Radial part of the 5D Laplacian at row `i < n_r`, in flux form
/// `r^-3 d_r (r^3 d_r f)` over the 5D control volume of the row.
///
/// On the axis this reduces to `8 (f_1 - f_0) / h^2`, i.e. `4 d_r^2 f` with a
/// mirrored neighbour.
#[inline]
pub(crate) fn radial5(g: &Grid, i: usize, center: f64, inner: f64, outer: f64) -> f64 {
    let h = g.h_r();
    let denom = h * h * g.volume5(i);
    let up = g.face_r(i).powi(3) * (outer - center);
    if i == 0 {
        up / denom
    } else {
        let down = g.face_r(i - 1).powi(3) * (center - inner);
        (up - down) / denom
    }
}

/// Value of `(d_r^2 + (3/r) d_r + d_z^2) f` at node `(i, j)`.
#[inline]
pub(crate) fn laplace5d_at(f: &ScalarField, i: usize, j: usize) -> f64 {
    let g = f.grid();
    let n = g.n_r();
    let hz2 = g.h_z() * g.h_z();
    let c = f.at(i, j);
    let axial = (f.at(i, g.jp(j)) - 2.0 * c + f.at(i, g.jm(j))) / hz2;
    let radial = if i == n {
        let h = g.h_r();
        let d2 = (2.0 * c - 5.0 * f.at(n - 1, j) + 4.0 * f.at(n - 2, j) - f.at(n - 3, j)) / (h * h);
        let d1 = (3.0 * c - 4.0 * f.at(n - 1, j) + f.at(n - 2, j)) / (2.0 * h);
        d2 + 3.0 * d1 / g.r(n)
    } else {
        let inner = if i == 0 { c } else { f.at(i - 1, j) };
        radial5(g, i, c, inner, f.at(i + 1, j))
    };
    radial + axial
}

/// The 5D Laplacian `d_r^2 + (3/r) d_r + d_z^2` acting on an even field.
///
/// Interior and axis rows use the conservative stencil of [`radial5`]; the
/// outer wall row uses one-sided second-order differences. Quadratics in
/// `r` and `z` are reproduced exactly.
pub fn laplace5d_apply(f: &ScalarField) -> Result<ScalarField> {
    if f.parity() != Parity::Even {
        return Err(Error::invalid("the 5D Laplacian acts on even-parity fields only"));
    }
    let g = *f.grid();
    Ok(build(g, Parity::Even, f.boundary(), |i, j| laplace5d_at(f, i, j)))
}

/// `sum_i sum_j V_i f g h_r h_z`: the discrete inner product under the 5D
/// radial measure, over rows strictly inside the wall.
pub fn inner5(f: &ScalarField, g: &ScalarField) -> f64 {
    let grid = *f.grid();
    let n_z = grid.n_z();
    par::sum_range(grid.n_r(), |i| {
        let row: f64 = (0..n_z).map(|j| f.at(i, j) * g.at(i, j)).fold(0.0, |a, x| a + x);
        grid.volume5(i) * row * grid.h_r() * grid.h_z()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn even(grid: Grid, f: impl Fn(f64, f64) -> f64 + Sync + Send) -> ScalarField {
        ScalarField::from_fn(grid, Parity::Even, Boundary::NeumannZero, f).unwrap()
    }

    #[test]
    fn grid_spacings() {
        let g = make_grid(8, 8, 1.0, 1.0).unwrap();
        assert_eq!(g.h_r(), 0.125);
        assert_eq!(g.h_z(), 0.125);
        assert_eq!(g.r(0), 0.0);
        let g = make_grid(128, 128, 4.0, 8.0).unwrap();
        assert_eq!(g.h_r(), 0.03125);
        assert_eq!(g.h_z(), 0.0625);
        assert_eq!(g.rows(), 129);
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(matches!(make_grid(4, 8, 1.0, 1.0), Err(Error::Config(_))));
        assert!(matches!(make_grid(8, 7, 1.0, 1.0), Err(Error::Config(_))));
        assert!(matches!(make_grid(8, 8, 0.0, 1.0), Err(Error::Config(_))));
        assert!(matches!(make_grid(8, 8, 1.0, -2.0), Err(Error::Config(_))));
        assert!(make_grid(8, 8, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn norms_of_simple_fields() {
        let g = make_grid(16, 16, 1.0, 1.0).unwrap();
        let one = even(g, |_, _| 1.0);
        assert!((norm_lp(&one, 2.0).unwrap() - PI.sqrt()).abs() < 1e-12);
        let zero = ScalarField::zeros(g, Parity::Even, Boundary::DirichletZero);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(norm_lp(&zero, p).unwrap(), 0.0);
        }
        let r = ScalarField::from_fn(g, Parity::Odd, Boundary::NeumannZero, |r, _| r).unwrap();
        assert_eq!(norm_lp(&r, f64::INFINITY).unwrap(), 1.0);
        assert!(norm_lp(&one, 0.5).is_err());
        assert!(norm_lp(&one, f64::NAN).is_err());
    }

    #[test]
    fn derivative_of_constants_vanishes() {
        let g = make_grid(12, 10, 2.0, 3.0).unwrap();
        let zc = even(g, |r, _| (1.0 + r * r).ln());
        assert!(ddz(&zc).values().iter().all(|&v| v == 0.0));
        let rc = even(g, |_, z| (z * 2.0).sin());
        let d = ddr(&rc);
        for i in 0..g.n_r() {
            assert!(d.row(i).iter().all(|&v| v == 0.0), "row {i}");
        }
    }

    #[test]
    fn laplace5d_of_quadratics() {
        let g = make_grid(16, 32, 2.0, 4.0).unwrap();
        let r2 = even(g, |r, _| r * r);
        let l = laplace5d_apply(&r2).unwrap();
        for v in l.values() {
            assert!((v - 8.0).abs() < 1e-10, "{v}");
        }
        let z2 = even(g, |_, z| z * z);
        let l = laplace5d_apply(&z2).unwrap();
        for i in 0..g.rows() {
            for j in 2..g.n_z() - 2 {
                assert!((l.at(i, j) - 2.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn laplace5d_rejects_odd_fields() {
        let g = make_grid(8, 8, 1.0, 1.0).unwrap();
        let f = ScalarField::zeros(g, Parity::Odd, Boundary::DirichletZero);
        assert!(laplace5d_apply(&f).is_err());
    }

    /// `Δ5 [exp(-r^2) cos(k z)] = (4 r^2 - 8 - k^2) exp(-r^2) cos(k z)`,
    /// differentiated by hand from the product rule.
    fn gaussian_laplace_error(n: usize) -> f64 {
        let (r_max, z_len) = (3.0, 2.0);
        let k = 2.0 * PI / z_len;
        let g = make_grid(n, n, r_max, z_len).unwrap();
        let f = even(g, |r, z| (-r * r).exp() * (k * z).cos());
        let l = laplace5d_apply(&f).unwrap();
        let mut err: f64 = 0.0;
        for i in 0..g.n_r() {
            for j in 0..g.n_z() {
                let (r, z) = (g.r(i), g.z(j));
                let exact = (4.0 * r * r - 8.0 - k * k) * (-r * r).exp() * (k * z).cos();
                err = err.max((l.at(i, j) - exact).abs());
            }
        }
        err
    }

    #[test]
    fn laplace5d_is_second_order() {
        let e1 = gaussian_laplace_error(32);
        let e2 = gaussian_laplace_error(64);
        let ratio = e1 / e2;
        assert!((3.2..4.8).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn axis_rows_match_mirrored_full_line() {
        let g = make_grid(10, 12, 1.5, 2.0).unwrap();
        let f = even(g, |r, z| (1.0 + r * r * (z * 3.0).sin()).exp() - 0.3 * r.powi(4));
        let h = g.h_r();
        let dr = ddr(&f);
        let lap = laplace5d_apply(&f).unwrap();
        // mirrored line: f(-r_i) = f(r_i)
        let mirrored = |i: isize, j: usize| f.at(i.unsigned_abs(), j);
        for j in 0..g.n_z() {
            let centered = (mirrored(1, j) - mirrored(-1, j)) / (2.0 * h);
            assert_eq!(dr.at(0, j), centered);
            let d2 = (mirrored(1, j) - 2.0 * mirrored(0, j) + mirrored(-1, j)) / (h * h);
            let dz2 = (f.at(0, g.jp(j)) - 2.0 * f.at(0, j) + f.at(0, g.jm(j))) / g.h_z().powi(2);
            let full = 4.0 * d2 + dz2;
            assert!((lap.at(0, j) - full).abs() <= 1e-12 * full.abs().max(1.0));
            for i in 1..g.n_r() {
                let c = (mirrored(i as isize + 1, j) - mirrored(i as isize - 1, j)) / (2.0 * h);
                assert_eq!(dr.at(i, j), c);
            }
        }
    }

    #[test]
    fn odd_fields_vanish_on_axis() {
        let g = make_grid(8, 8, 1.0, 1.0).unwrap();
        let f = ScalarField::from_fn(g, Parity::Odd, Boundary::NeumannZero, |r, z| 1.0 + r + z).unwrap();
        assert!(f.row(0).iter().all(|&v| v == 0.0));
        let mut vals = vec![0.0; g.len()];
        vals[0] = 1.0;
        assert!(ScalarField::from_values(g, Parity::Odd, Boundary::NeumannZero, vals).is_err());
        let mut vals = vec![0.0; g.len()];
        vals[3] = f64::NAN;
        assert!(ScalarField::from_values(g, Parity::Even, Boundary::NeumannZero, vals).is_err());
    }

    #[test]
    fn over_r_uses_axis_limit() {
        let g = make_grid(16, 8, 1.0, 1.0).unwrap();
        let f = ScalarField::from_fn(g, Parity::Odd, Boundary::NeumannZero, |r, _| 3.0 * r).unwrap();
        let q = f.over_r().unwrap();
        assert!(q.values().iter().all(|v| (v - 3.0).abs() < 1e-12));
    }

    proptest! {
        #[test]
        fn norm_is_absolutely_homogeneous(c in -50.0f64..50.0, p in 1.0f64..6.0, seed in 0u32..1000) {
            let g = make_grid(10, 9, 1.3, 2.1).unwrap();
            let s = seed as f64;
            let f = even(g, |r, z| (s + 3.0 * r).sin() * (z + 0.1 * s).cos() + 0.2);
            let cf = f.scaled(c);
            for q in [p, 2.0, f64::INFINITY] {
                let a = norm_lp(&cf, q).unwrap();
                let b = c.abs() * norm_lp(&f, q).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
            }
        }
    }
}
