//! Strict JSON run configuration.
//!
//! ```json
//! {
//!   "grid":    { "n_r": 64, "n_z": 64, "r_max": 4.0, "z_len": 4.0 },
//!   "physics": { "mode": "ideal" },
//!   "schemes": { "pi_scheme": "upwind1", "omega_scheme": "centered2" },
//!   "time":    { "t_end": 1.0, "cfl_adv": 0.4, "cfl_diff": 0.2,
//!                "dt_max": 0.01, "output_every": 10 },
//!   "initial": { "name": "gaussian-ring", "params": { "sigma": 0.25 } },
//!   "output":  { "dir": "out", "snapshots": false }
//! }
//! ```
//!
//! Unknown keys anywhere are rejected. `schemes`, `output`, `verify` and the
//! step-control keys of `time` have defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::advect::{OmegaScheme, PiScheme};
use crate::error::{Error, Result};
use crate::evolve::{Mode, RunConfig};
use crate::grid::{make_grid, Grid, ScalarField};
use crate::initial::{make_initial, InitialName, InitialParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_r: usize,
    pub n_z: usize,
    pub r_max: f64,
    pub z_len: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub mode: Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemesSection {
    pub pi_scheme: PiScheme,
    pub omega_scheme: OmegaScheme,
}

impl Default for SchemesSection {
    fn default() -> Self {
        Self {
            pi_scheme: PiScheme::Upwind1,
            omega_scheme: OmegaScheme::Centered2,
        }
    }
}

fn default_cfl_adv() -> f64 {
    RunConfig::default().cfl_adv
}
fn default_cfl_diff() -> f64 {
    RunConfig::default().cfl_diff
}
fn default_dt_max() -> f64 {
    RunConfig::default().dt_max
}
fn default_output_every() -> usize {
    RunConfig::default().output_every
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: f64,
    #[serde(default = "default_cfl_adv")]
    pub cfl_adv: f64,
    #[serde(default = "default_cfl_diff")]
    pub cfl_diff: f64,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    #[serde(default = "default_output_every")]
    pub output_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub name: InitialName,
    #[serde(default)]
    pub params: InitialParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub snapshots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            snapshots: false,
        }
    }
}

/// Constants used by `verify`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// `C` in the single-run tolerance `C (dt^2 + h_r^2 + h_z^2) * scale`.
    pub tol_constant: f64,
    /// Constant multiplying the resistive enstrophy forcing bound.
    pub ineq2_constant: f64,
    /// Relative tolerance for the curl identity.
    pub curl_tolerance: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            tol_constant: 1.0,
            ineq2_constant: 1.0,
            curl_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub grid: GridSection,
    pub physics: PhysicsSection,
    #[serde(default)]
    pub schemes: SchemesSection,
    pub time: TimeSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub verify: VerifySection,
}

impl ConfigFile {
    /// Parses and validates a configuration document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid().map_err(|e| Error::config(e.to_string()))?;
        self.run_config().validate()?;
        let v = &self.verify;
        if !(v.tol_constant > 0.0 && v.ineq2_constant > 0.0 && v.curl_tolerance > 0.0) {
            return Err(Error::config("verify constants must be positive"));
        }
        make_initial(self.initial.name, &self.initial.params, &grid)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        let g = &self.grid;
        make_grid(g.n_r, g.n_z, g.r_max, g.z_len)
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            mode: self.physics.mode,
            t_end: self.time.t_end,
            cfl_adv: self.time.cfl_adv,
            cfl_diff: self.time.cfl_diff,
            dt_max: self.time.dt_max,
            pi_scheme: self.schemes.pi_scheme,
            omega_scheme: self.schemes.omega_scheme,
            output_every: self.time.output_every,
        }
    }

    pub fn initial_fields(&self) -> Result<(ScalarField, ScalarField)> {
        make_initial(self.initial.name, &self.initial.params, &self.grid()?)
    }

    /// The same problem on a grid with half the points in each direction.
    /// Records are taken four times as often in steps so that, with a
    /// diffusion-limited step, they land at the same times.
    pub fn coarsened(&self) -> Result<Self> {
        let mut c = self.clone();
        c.grid.n_r = self.grid.n_r / 2;
        c.grid.n_z = self.grid.n_z / 2;
        c.time.output_every = (self.time.output_every / 4).max(1);
        c.validate().map_err(|e| {
            Error::config(format!("the refinement pair needs a valid half-resolution grid: {e}"))
        })?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "grid": {"n_r": 16, "n_z": 16, "r_max": 4.0, "z_len": 4.0},
        "physics": {"mode": "ideal"},
        "time": {"t_end": 0.1},
        "initial": {"name": "gaussian-ring"}
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ConfigFile::from_json_str(MINIMAL).unwrap();
        assert_eq!(c.schemes, SchemesSection::default());
        assert_eq!(c.output.dir, PathBuf::from("out"));
        assert_eq!(c.run_config().output_every, 10);
        assert_eq!(c.run_config().cfl_diff, 0.2);
        assert_eq!(c.initial.params, InitialParams::default());
    }

    #[test]
    fn echo_round_trips() {
        let c = ConfigFile::from_json_str(MINIMAL).unwrap();
        let again = ConfigFile::from_json_str(&c.to_json_string()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("\"t_end\": 0.1", "\"t_end\": 0.1, \"tend\": 2");
        let err = ConfigFile::from_json_str(&bad).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("tend"), "{err}");
        let bad = MINIMAL.replace("\"physics\"", "\"extra\": {}, \"physics\"");
        assert!(ConfigFile::from_json_str(&bad).is_err());
    }

    #[test]
    fn bad_enum_is_named() {
        let bad = MINIMAL.replace("\"ideal\"", "\"idael\"");
        let err = ConfigFile::from_json_str(&bad).unwrap_err().to_string();
        assert!(err.contains("idael"), "{err}");
        let bad = MINIMAL.replace("gaussian-ring", "gaussian-rong");
        assert!(ConfigFile::from_json_str(&bad).unwrap_err().to_string().contains("gaussian-rong"));
    }

    #[test]
    fn semantic_validation() {
        for (from, to) in [
            ("\"n_r\": 16", "\"n_r\": 4"),
            ("\"t_end\": 0.1", "\"t_end\": -0.1"),
            ("\"r_max\": 4.0", "\"r_max\": 1.0"),
        ] {
            let bad = MINIMAL.replace(from, to);
            assert!(matches!(ConfigFile::from_json_str(&bad), Err(Error::Config(_))), "{to}");
        }
    }

    #[test]
    fn coarsened_pair() {
        let c = ConfigFile::from_json_str(&MINIMAL.replace("16", "32")).unwrap();
        let h = c.coarsened().unwrap();
        assert_eq!((h.grid.n_r, h.grid.n_z), (16, 16));
        assert_eq!(h.time.output_every, 2);
        assert!(ConfigFile::from_json_str(MINIMAL).unwrap().coarsened().is_ok());
        let tiny = ConfigFile::from_json_str(&MINIMAL.replace("16", "8"));
        // 8 points is valid, 4 is not
        assert!(tiny.unwrap().coarsened().is_err());
    }
}
