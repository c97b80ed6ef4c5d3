//! Catalog of smooth initial data for `(Pi, Omega)`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid, Parity, ScalarField};

/// A Gaussian is treated as compactly supported within this many widths.
pub const SUPPORT_WIDTHS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialName {
    Zero,
    GaussianRing,
    OpposingPair,
}

impl FromStr for InitialName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Self::Zero),
            "gaussian-ring" => Ok(Self::GaussianRing),
            "opposing-pair" => Ok(Self::OpposingPair),
            other => Err(Error::config(format!(
                "unknown initial condition {other:?} (expected zero, gaussian-ring or opposing-pair)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialParams {
    pub amplitude: f64,
    pub r0: f64,
    /// Axial center; `None` puts it at mid-period.
    pub z0: Option<f64>,
    pub sigma: f64,
    /// Axial distance between the two lobes of `opposing-pair`; defaults to
    /// `4 sigma`.
    pub separation: Option<f64>,
}

impl Default for InitialParams {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            r0: 1.0,
            z0: None,
            sigma: 0.25,
            separation: None,
        }
    }
}

/// `exp(-((r - r0)^2 + dz^2) / sigma^2)` plus its mirror image through the
/// axis, with `dz` the periodic distance to `z0`.
pub fn ring_gaussian(grid: &Grid, r0: f64, z0: f64, sigma: f64, r: f64, z: f64) -> f64 {
    let l = grid.z_len();
    let mut dz = (z - z0).rem_euclid(l);
    if dz > 0.5 * l {
        dz -= l;
    }
    let s2 = sigma * sigma;
    let a = (-((r - r0).powi(2) + dz * dz) / s2).exp();
    let b = (-((r + r0).powi(2) + dz * dz) / s2).exp();
    a + b
}

fn check_ring(grid: &Grid, p: &InitialParams) -> Result<()> {
    if !(p.sigma.is_finite() && p.sigma > 0.0) {
        return Err(Error::config(format!("sigma must be positive, got {}", p.sigma)));
    }
    if !(p.r0.is_finite() && p.r0 >= 0.0) || !p.amplitude.is_finite() {
        return Err(Error::config("r0 must be >= 0 and amplitude finite"));
    }
    if grid.r_max() - p.r0 < SUPPORT_WIDTHS * p.sigma {
        return Err(Error::config(format!(
            "initial support overlaps r_max: r0 + {SUPPORT_WIDTHS} sigma = {} > r_max = {}",
            p.r0 + SUPPORT_WIDTHS * p.sigma,
            grid.r_max()
        )));
    }
    Ok(())
}

fn dirichlet_even(grid: &Grid, f: impl Fn(f64, f64) -> f64 + Sync + Send) -> Result<ScalarField> {
    ScalarField::from_fn(*grid, Parity::Even, Boundary::DirichletZero, f)
}

/// Builds `(Pi_0, Omega_0)` for a catalog entry.
pub fn make_initial(
    name: InitialName,
    params: &InitialParams,
    grid: &Grid,
) -> Result<(ScalarField, ScalarField)> {
    let zero = ScalarField::zeros(*grid, Parity::Even, Boundary::DirichletZero);
    let z0 = params.z0.unwrap_or(0.5 * grid.z_len());
    match name {
        InitialName::Zero => Ok((zero.clone(), zero)),
        InitialName::GaussianRing => {
            check_ring(grid, params)?;
            let p = *params;
            let pi = dirichlet_even(grid, move |r, z| {
                p.amplitude * ring_gaussian(grid, p.r0, z0, p.sigma, r, z)
            })?;
            Ok((pi, zero))
        }
        InitialName::OpposingPair => {
            check_ring(grid, params)?;
            let p = *params;
            let d = p.separation.unwrap_or(4.0 * p.sigma);
            if !(d.is_finite() && d >= 0.0 && d < grid.z_len()) {
                return Err(Error::config(format!(
                    "separation must lie in [0, z_len), got {d}"
                )));
            }
            let omega = dirichlet_even(grid, move |r, z| {
                p.amplitude
                    * (ring_gaussian(grid, p.r0, z0 + 0.5 * d, p.sigma, r, z)
                        - ring_gaussian(grid, p.r0, z0 - 0.5 * d, p.sigma, r, z))
            })?;
            Ok((zero, omega))
        }
    }
}

/// Radial plateau: `level` for `r <= r_flat`, a smooth (C^inf) descent to 0
/// on `[r_flat, r_edge]`, zero beyond. Independent of `z`.
pub fn plateau(grid: &Grid, level: f64, r_flat: f64, r_edge: f64) -> Result<ScalarField> {
    if !(0.0 <= r_flat && r_flat < r_edge && r_edge < grid.r_max()) {
        return Err(Error::config("plateau needs 0 <= r_flat < r_edge < r_max"));
    }
    let bump = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    dirichlet_even(grid, move |r, _| {
        if r <= r_flat {
            level
        } else {
            let s = (r - r_flat) / (r_edge - r_flat);
            let (a, b) = (bump(1.0 - s), bump(s));
            level * a / (a + b)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(64, 64, 4.0, 4.0).unwrap()
    }

    #[test]
    fn zero_entry() {
        let (pi, om) = make_initial(InitialName::Zero, &InitialParams::default(), &grid()).unwrap();
        assert_eq!(pi.max_abs(), 0.0);
        assert_eq!(om.max_abs(), 0.0);
    }

    #[test]
    fn gaussian_ring_formula() {
        let g = grid();
        let p = InitialParams {
            amplitude: 1.0,
            r0: 1.0,
            z0: Some(0.0),
            sigma: 0.25,
            separation: None,
        };
        let (pi, om) = make_initial(InitialName::GaussianRing, &p, &g).unwrap();
        assert_eq!(om.max_abs(), 0.0);
        assert_eq!(pi.parity(), Parity::Even);
        for (i, j) in [(16, 0), (12, 3), (20, 62), (0, 0)] {
            let (r, z) = (g.r(i), g.z(j));
            let dz = if z > 2.0 { z - 4.0 } else { z };
            let expect = (-((r - 1.0).powi(2) + dz * dz) / 0.0625).exp()
                + (-((r + 1.0).powi(2) + dz * dz) / 0.0625).exp();
            assert!((pi.at(i, j) - expect).abs() < 1e-15);
        }
        assert_eq!(pi.at(16, 0), 1.0 + (-64.0f64).exp());
        assert!(pi.row(g.n_r()).iter().all(|&v| v == 0.0));
        assert!(pi.row(g.n_r() - 1).iter().all(|&v| v < 1e-50));
    }

    #[test]
    fn opposing_pair_has_zero_net_circulation() {
        let g = grid();
        let (pi, om) =
            make_initial(InitialName::OpposingPair, &InitialParams::default(), &g).unwrap();
        assert_eq!(pi.max_abs(), 0.0);
        // int Omega r dr dz by the same trapezoid/rectangle rule, written out
        let mut net = 0.0;
        let mut abs = 0.0;
        for i in 0..g.rows() {
            let w = if i == 0 || i == g.n_r() { 0.5 } else { 1.0 } * g.r(i) * g.h_r() * g.h_z();
            for j in 0..g.n_z() {
                net += w * om.at(i, j);
                abs += w * om.at(i, j).abs();
            }
        }
        assert!(abs > 0.1, "{abs}");
        assert!(net.abs() < 1e-12 * abs, "net {net} vs {abs}");
        // each lobe carries roughly A * pi sigma^2 * r0
        assert!((abs - 2.0 * PI * 0.0625).abs() < 0.05 * abs);
    }

    #[test]
    fn catalog_errors() {
        assert!("spiral".parse::<InitialName>().is_err());
        assert_eq!("gaussian-ring".parse::<InitialName>().unwrap(), InitialName::GaussianRing);
        let p = InitialParams {
            r0: 3.5,
            ..Default::default()
        };
        assert!(matches!(
            make_initial(InitialName::GaussianRing, &p, &grid()),
            Err(Error::Config(_))
        ));
        let p = InitialParams {
            sigma: 0.0,
            ..Default::default()
        };
        assert!(make_initial(InitialName::OpposingPair, &p, &grid()).is_err());
    }

    #[test]
    fn plateau_shape() {
        let g = grid();
        let f = plateau(&g, 2.0, 1.5, 3.0).unwrap();
        for j in 0..g.n_z() {
            assert_eq!(f.at(0, j), 2.0);
            assert_eq!(f.at(24, j), 2.0);
            assert_eq!(f.at(48, j), 0.0);
            assert!(f.at(36, j) > 0.0 && f.at(36, j) < 2.0);
        }
        assert!(plateau(&g, 1.0, 2.0, 1.0).is_err());
    }
}
