//! Per-record diagnostics and the checks built on them.
//!
//! Every norm uses the 3D measure `2 pi r dr dz`. The checks are pure
//! functions of record sequences. Inequality checks compare two resolutions
//! and ask the discrete violation to shrink under refinement.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evolve::{AxiState, Mode};
use crate::grid::{ddr, ddz, d2r, d2z, norm_l2, Grid, ScalarField};

/// Relative slack allowed by the maximum principle check.
pub const MAX_PRINCIPLE_REL: f64 = 1e-10;
pub const MAX_PRINCIPLE_ABS: f64 = 1e-12;
/// Relative per-interval slack for `||Pi||_2` monotonicity.
pub const MONOTONE_REL: f64 = 1e-10;
/// Residuals below `FLOOR_REL * scale` count as no violation at all.
pub const FLOOR_REL: f64 = 1e-10;
pub const ENERGY_SHRINK: f64 = 1.8;
pub const INEQ_SHRINK: f64 = 2.0;
pub const CZ_STABILITY: f64 = 0.15;

/// One row of the diagnostics time series.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub dt: f64,
    /// `1/2 ||u||_2^2`
    pub energy_kinetic: f64,
    /// `1/2 ||B^theta||_2^2`
    pub energy_magnetic: f64,
    /// `||∇u||_2^2`
    pub grad_u_sq: f64,
    pub pi_linf: f64,
    pub pi_l2: f64,
    pub grad_pi_l2: f64,
    pub omega_l2: f64,
    pub grad_omega_l2: f64,
    pub omega_theta_l2: f64,
    /// `||u^r / r||_inf`
    pub cz_lhs: f64,
    /// `||Omega||_2^(1/2) ||d_z Omega||_2^(1/2)`
    pub cz_rhs: f64,
    /// `int |∇(curl u)|^2`
    pub curl_identity_lhs: f64,
    /// `int |∇ omega^theta|^2 + |Omega|^2`
    pub curl_identity_rhs: f64,
    /// Positive part of the `Omega`-enstrophy inequality residual over the
    /// interval ending at this record (0 for the first record).
    pub ineq31_residual: f64,
    /// Largest of `|Pi|`, `|Omega|` one row inside the wall and `|u^z|` on it.
    pub boundary_leak: f64,
}

pub const CSV_COLUMNS: [&str; 17] = [
    "time",
    "dt",
    "energy_kinetic",
    "energy_magnetic",
    "grad_u_sq",
    "pi_linf",
    "pi_l2",
    "grad_pi_l2",
    "omega_l2",
    "grad_omega_l2",
    "omega_theta_l2",
    "cz_lhs",
    "cz_rhs",
    "curl_identity_lhs",
    "curl_identity_rhs",
    "ineq31_residual",
    "boundary_leak",
];

impl DiagnosticsRecord {
    pub fn to_array(&self) -> [f64; 17] {
        [
            self.time,
            self.dt,
            self.energy_kinetic,
            self.energy_magnetic,
            self.grad_u_sq,
            self.pi_linf,
            self.pi_l2,
            self.grad_pi_l2,
            self.omega_l2,
            self.grad_omega_l2,
            self.omega_theta_l2,
            self.cz_lhs,
            self.cz_rhs,
            self.curl_identity_lhs,
            self.curl_identity_rhs,
            self.ineq31_residual,
            self.boundary_leak,
        ]
    }

    pub fn from_array(a: [f64; 17]) -> Self {
        Self {
            time: a[0],
            dt: a[1],
            energy_kinetic: a[2],
            energy_magnetic: a[3],
            grad_u_sq: a[4],
            pi_linf: a[5],
            pi_l2: a[6],
            grad_pi_l2: a[7],
            omega_l2: a[8],
            grad_omega_l2: a[9],
            omega_theta_l2: a[10],
            cz_lhs: a[11],
            cz_rhs: a[12],
            curl_identity_lhs: a[13],
            curl_identity_rhs: a[14],
            ineq31_residual: a[15],
            boundary_leak: a[16],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn energy(&self) -> f64 {
        self.energy_kinetic + self.energy_magnetic
    }

    /// `cz_lhs / cz_rhs` with `0/0 = 0`.
    pub fn cz_ratio(&self) -> f64 {
        if self.cz_rhs == 0.0 {
            if self.cz_lhs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.cz_lhs / self.cz_rhs
        }
    }
}

fn sq_integral(f: &ScalarField) -> f64 {
    f.grid().integrate(|i, j| f.at(i, j).powi(2))
}

/// `||∇f||_2^2 = int (d_r f)^2 + (d_z f)^2`.
pub fn grad_sq(f: &ScalarField) -> f64 {
    sq_integral(&ddr(f)) + sq_integral(&ddz(f))
}

/// `||∇u||_2^2` from second derivatives of `q = psi^theta / r`.
pub fn grad_u_sq_from_q(q: &ScalarField) -> f64 {
    let q_r = ddr(q);
    let q_z = ddz(q);
    let q_rr = d2r(q);
    let q_zz = d2z(q);
    let q_rz = ddz(&q_r);
    let g = *q.grid();
    g.integrate(|i, j| {
        let r = g.r(i);
        let (qz, qrz) = (q_z.at(i, j), q_rz.at(i, j));
        let dr_ur = -qz - r * qrz;
        let dz_ur = -r * q_zz.at(i, j);
        let ur_over_r = -qz;
        let dr_uz = 3.0 * q_r.at(i, j) + r * q_rr.at(i, j);
        let dz_uz = 2.0 * qz + r * qrz;
        dr_ur * dr_ur + dz_ur * dz_ur + ur_over_r * ur_over_r + dr_uz * dr_uz + dz_uz * dz_uz
    })
}

/// Both sides of `int |∇(curl u)|^2 = int |∇ omega^theta|^2 + |Omega|^2`.
/// The left side differentiates the velocity built from `q`; the right side
/// uses `omega^theta = r Omega` directly.
pub fn curl_identity_sides(q: &ScalarField, omega: &ScalarField) -> Result<(f64, f64)> {
    let u = crate::poisson::velocity_from_q(q)?;
    let w = ddz(&u.u_r).zip_map(&ddr(&u.u_z), |a, b| a - b);
    let lhs = grad_sq(&w) + sq_integral(&w.over_r()?);
    let wt = omega.times_r();
    let rhs = grad_sq(&wt) + sq_integral(omega);
    Ok((lhs, rhs))
}

/// Assembles the record for `state`; `ineq31_residual` is left at 0 and
/// filled in by the caller that knows the previous record.
pub fn record(state: &AxiState, dt: f64) -> DiagnosticsRecord {
    let g = *state.grid();
    let n = g.n_r();
    let u = &state.velocity;
    let q = &state.psi_over_r;

    let energy_kinetic = 0.5 * (sq_integral(&u.u_r) + sq_integral(&u.u_z));
    let energy_magnetic = 0.5 * sq_integral(&state.b_theta());
    let omega_l2 = norm_l2(&state.omega);
    let dz_omega_l2 = sq_integral(&ddz(&state.omega)).sqrt();
    let cz_lhs = u.u_r.over_r().expect("u_r is odd").max_abs();
    let (curl_identity_lhs, curl_identity_rhs) =
        curl_identity_sides(q, &state.omega).expect("state fields are consistent");

    let mut leak = 0.0f64;
    for j in 0..g.n_z() {
        leak = leak
            .max(state.pi.at(n - 1, j).abs())
            .max(state.omega.at(n - 1, j).abs())
            .max(u.u_z.at(n, j).abs());
    }

    DiagnosticsRecord {
        time: state.time,
        dt,
        energy_kinetic,
        energy_magnetic,
        grad_u_sq: grad_u_sq_from_q(q),
        pi_linf: state.pi.max_abs(),
        pi_l2: norm_l2(&state.pi),
        grad_pi_l2: grad_sq(&state.pi).sqrt(),
        omega_l2,
        grad_omega_l2: grad_sq(&state.omega).sqrt(),
        omega_theta_l2: norm_l2(&state.omega_theta()),
        cz_lhs,
        cz_rhs: (omega_l2 * dz_omega_l2).sqrt(),
        curl_identity_lhs,
        curl_identity_rhs,
        ineq31_residual: 0.0,
        boundary_leak: leak,
    }
}

// ---------------------------------------------------------------------------
// interval residuals

fn span(a: &DiagnosticsRecord, b: &DiagnosticsRecord) -> f64 {
    b.time - a.time
}

fn trapezoid(a: f64, b: f64) -> f64 {
    0.5 * (a + b)
}

/// `Δ(E)/Δt + ||∇u||_2^2` over one interval (trapezoid in time).
pub fn energy_interval(a: &DiagnosticsRecord, b: &DiagnosticsRecord) -> f64 {
    (b.energy() - a.energy()) / span(a, b) + trapezoid(a.grad_u_sq, b.grad_u_sq)
}

/// `Δ(||Pi||_2^2)/Δt + ||∇Pi||_2^2`.
pub fn pi_l2_interval(a: &DiagnosticsRecord, b: &DiagnosticsRecord) -> f64 {
    (b.pi_l2.powi(2) - a.pi_l2.powi(2)) / span(a, b)
        + trapezoid(a.grad_pi_l2.powi(2), b.grad_pi_l2.powi(2))
}

fn enstrophy_lhs(a: &DiagnosticsRecord, b: &DiagnosticsRecord) -> f64 {
    (b.omega_l2.powi(2) - a.omega_l2.powi(2)) / span(a, b)
        + trapezoid(a.grad_omega_l2.powi(2), b.grad_omega_l2.powi(2))
}

fn ineq31_rhs(r: &DiagnosticsRecord) -> f64 {
    (r.pi_l2 * r.pi_linf).powi(2)
}

fn ineq2_rhs(r: &DiagnosticsRecord) -> f64 {
    r.pi_linf.powf(2.0 / 3.0) * r.pi_l2.powf(4.0 / 3.0) * r.grad_pi_l2.powi(2)
}

/// Positive part of `Δ(||Omega||^2)/Δt + ||∇Omega||^2 - ||Pi||_2^2 ||Pi||_inf^2`.
pub fn ineq31_interval(a: &DiagnosticsRecord, b: &DiagnosticsRecord) -> f64 {
    (enstrophy_lhs(a, b) - trapezoid(ineq31_rhs(a), ineq31_rhs(b))).max(0.0)
}

/// Positive part of
/// `Δ(||Omega||^2)/Δt + ||∇Omega||^2 - c ||Pi||_inf^(2/3) ||Pi||_2^(4/3) ||∇Pi||_2^2`.
pub fn ineq2_interval(a: &DiagnosticsRecord, b: &DiagnosticsRecord, c: f64) -> f64 {
    (enstrophy_lhs(a, b) - c * trapezoid(ineq2_rhs(a), ineq2_rhs(b))).max(0.0)
}

fn intervals<F: Fn(&DiagnosticsRecord, &DiagnosticsRecord) -> f64>(
    records: &[DiagnosticsRecord],
    f: F,
) -> Vec<f64> {
    records.windows(2).map(|w| f(&w[0], &w[1])).collect()
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

/// `C (dt^2 + h_r^2 + h_z^2) * scale`, with `dt` the largest recorded step.
pub fn tolerance(records: &[DiagnosticsRecord], grid: &Grid, c: f64, scale: f64) -> f64 {
    let dt = max_of(records.iter().map(|r| r.dt));
    c * (dt * dt + grid.h_r().powi(2) + grid.h_z().powi(2)) * scale
}

// ---------------------------------------------------------------------------
// checks

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
    /// Reported quantity without a pass/fail criterion.
    Info,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIPPED",
            CheckStatus::Info => "INFO",
        }
    }

    /// Whether this status lets a verification succeed.
    pub fn is_ok(self) -> bool {
        !matches!(self, CheckStatus::Fail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub status: CheckStatus,
    /// The measured quantity the verdict is based on.
    pub value: f64,
    /// The bound it was compared against (NaN when none applies).
    pub threshold: f64,
    pub detail: String,
}

impl CheckReport {
    fn new(name: &str, pass: bool, value: f64, threshold: f64, detail: String) -> Self {
        Self {
            name: name.to_string(),
            status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
            value,
            threshold,
            detail,
        }
    }

    pub fn passed(&self) -> bool {
        self.status.is_ok()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<16} {:<8} value={:.6e} threshold={:.6e}  {}",
            self.name,
            self.status.as_str(),
            self.value,
            self.threshold,
            self.detail
        )
    }
}

/// Records of one run together with the grid that produced them.
#[derive(Debug, Clone, Copy)]
pub struct RunRecords<'a> {
    pub grid: Grid,
    pub mode: Mode,
    pub records: &'a [DiagnosticsRecord],
}

impl<'a> RunRecords<'a> {
    pub fn new(grid: Grid, mode: Mode, records: &'a [DiagnosticsRecord]) -> Self {
        Self { grid, mode, records }
    }
}

fn need_records(run: &RunRecords<'_>, n: usize, what: &str) -> Result<()> {
    if run.records.len() < n {
        return Err(Error::invalid(format!(
            "{what} needs at least {n} records, got {}",
            run.records.len()
        )));
    }
    Ok(())
}

/// Verifies that the sequence is usable: finite entries, strictly increasing
/// time, positive steps.
pub fn check_record_sequence(records: &[DiagnosticsRecord]) -> CheckReport {
    let finite = records.iter().all(DiagnosticsRecord::is_finite);
    let increasing = records.windows(2).all(|w| w[1].time > w[0].time);
    let positive = records.iter().all(|r| r.dt > 0.0);
    CheckReport::new(
        "records",
        finite && increasing && positive,
        records.len() as f64,
        f64::NAN,
        format!("finite={finite} time-increasing={increasing} dt-positive={positive}"),
    )
}

fn energy_scale(records: &[DiagnosticsRecord]) -> f64 {
    max_of(records.iter().map(|r| r.grad_u_sq)).max(max_of(
        intervals(records, |a, b| ((b.energy() - a.energy()) / span(a, b)).abs()),
    ))
}

/// Energy balance on a single run: equality (up to `tol`) for the ideal
/// system, the dissipative inequality for the resistive one.
pub fn check_energy_law(run: &RunRecords<'_>, c: f64) -> Result<CheckReport> {
    need_records(run, 3, "the energy law check")?;
    let res = intervals(run.records, energy_interval);
    let tol = tolerance(run.records, &run.grid, c, energy_scale(run.records));
    let (value, form) = match run.mode {
        Mode::Ideal => (max_of(res.iter().map(|r| r.abs())), "|dE/dt + |∇u|^2|"),
        Mode::Resistive => (max_of(res.iter().copied()), "max(dE/dt + |∇u|^2, 0)"),
    };
    Ok(CheckReport::new(
        "energy-law",
        value <= tol,
        value,
        tol,
        format!("{form}; first-order Pi transport makes the defect O(h)"),
    ))
}

/// Shrink test: `fine <= coarse / factor`, or `fine` below the floor.
fn shrink_report(name: &str, coarse: f64, fine: f64, factor: f64, floor: f64, what: &str) -> CheckReport {
    let ratio = if fine > 0.0 { coarse / fine } else { f64::INFINITY };
    let pass = fine <= floor || ratio >= factor;
    let order = ratio.log2();
    CheckReport::new(
        name,
        pass,
        ratio,
        factor,
        format!("{what}: coarse={coarse:.6e} fine={fine:.6e} observed order={order:.2} floor={floor:.1e}"),
    )
}

/// Largest energy defect of a run: `|residual|` for the ideal system, its
/// positive part for the resistive one.
pub fn energy_defect(run: &RunRecords<'_>) -> f64 {
    let res = intervals(run.records, energy_interval);
    match run.mode {
        Mode::Ideal => max_of(res.iter().map(|v| v.abs())),
        Mode::Resistive => max_of(res.iter().copied()),
    }
}

/// The energy defect must shrink by [`ENERGY_SHRINK`] from `coarse` to
/// `fine`.
pub fn check_energy_refinement(coarse: &RunRecords<'_>, fine: &RunRecords<'_>) -> Result<CheckReport> {
    need_records(coarse, 3, "the energy law check")?;
    need_records(fine, 3, "the energy law check")?;
    let floor = FLOOR_REL * energy_scale(fine.records);
    let what = match fine.mode {
        Mode::Ideal => "max |dE/dt + |∇u|^2|",
        Mode::Resistive => "max(dE/dt + |∇u|^2, 0)",
    };
    Ok(shrink_report(
        "energy-law",
        energy_defect(coarse),
        energy_defect(fine),
        ENERGY_SHRINK,
        floor,
        what,
    ))
}

/// `||Pi(t)||_inf <= ||Pi(0)||_inf (1 + 1e-10) + 1e-12` at every record.
pub fn check_max_principle(records: &[DiagnosticsRecord]) -> CheckReport {
    let Some(first) = records.first() else {
        return CheckReport::new("max-principle", true, 0.0, 0.0, "no records".into());
    };
    let bound = first.pi_linf * (1.0 + MAX_PRINCIPLE_REL) + MAX_PRINCIPLE_ABS;
    let worst = max_of(records.iter().map(|r| r.pi_linf));
    CheckReport::new(
        "max-principle",
        worst <= bound,
        worst,
        bound,
        format!("max_t |Pi| vs |Pi_0| = {:.16e}", first.pi_linf),
    )
}

fn pi_scale(records: &[DiagnosticsRecord]) -> f64 {
    max_of(records.iter().map(|r| r.grad_pi_l2.powi(2)))
}

/// Resistive only: `||Pi||_2` nonincreasing and the `L^2` energy inequality
/// for `Pi` holds up to `tol`. For the ideal system the check is skipped and
/// the drift of `||Pi||_2` is reported.
pub fn check_pi_l2_monotone(run: &RunRecords<'_>, c: f64) -> CheckReport {
    let recs = run.records;
    if run.mode == Mode::Ideal {
        let drift = match (recs.first(), recs.last()) {
            (Some(a), Some(b)) if a.pi_l2 > 0.0 => (b.pi_l2 - a.pi_l2) / a.pi_l2,
            _ => 0.0,
        };
        return CheckReport {
            name: "pi-l2".into(),
            status: CheckStatus::Skipped,
            value: drift,
            threshold: f64::NAN,
            detail: format!("resistive only; ideal relative drift of ||Pi||_2 = {drift:.3e}"),
        };
    }
    let mut worst_rise = 0.0f64;
    let mut monotone = true;
    for w in recs.windows(2) {
        let rise = w[1].pi_l2 - w[0].pi_l2;
        if rise > MONOTONE_REL * w[0].pi_l2 {
            monotone = false;
        }
        if w[0].pi_l2 > 0.0 {
            worst_rise = worst_rise.max(rise / w[0].pi_l2);
        }
    }
    let res = max_of(intervals(recs, pi_l2_interval));
    let tol = tolerance(recs, &run.grid, c, pi_scale(recs));
    CheckReport::new(
        "pi-l2",
        monotone && res <= tol,
        res,
        tol,
        format!("monotone={monotone} worst relative rise={worst_rise:.3e}"),
    )
}

/// Positive part of the `Pi` energy residual must shrink by
/// [`INEQ_SHRINK`] under refinement (resistive runs).
pub fn check_pi_l2_refinement(coarse: &RunRecords<'_>, fine: &RunRecords<'_>) -> CheckReport {
    let m = |r: &RunRecords<'_>| max_of(intervals(r.records, pi_l2_interval));
    shrink_report(
        "pi-l2",
        m(coarse),
        m(fine),
        INEQ_SHRINK,
        FLOOR_REL * pi_scale(fine.records),
        "max(d|Pi|^2/dt + |∇Pi|^2, 0)",
    )
}

/// Supremum over the run of `cz_lhs / cz_rhs`.
pub fn cz_sup(records: &[DiagnosticsRecord]) -> f64 {
    max_of(records.iter().map(DiagnosticsRecord::cz_ratio))
}

/// The empirical constant must agree within [`CZ_STABILITY`] between runs.
pub fn check_cz_ratio(coarse: &[DiagnosticsRecord], fine: &[DiagnosticsRecord]) -> CheckReport {
    let (a, b) = (cz_sup(coarse), cz_sup(fine));
    let dev = if a == 0.0 && b == 0.0 {
        0.0
    } else if a == 0.0 {
        f64::INFINITY
    } else {
        (b / a - 1.0).abs()
    };
    CheckReport::new(
        "cz-ratio",
        dev <= CZ_STABILITY,
        dev,
        CZ_STABILITY,
        format!("sup ratio coarse={a:.6e} fine={b:.6e}"),
    )
}

fn ineq31_scale(records: &[DiagnosticsRecord]) -> f64 {
    max_of(records.iter().map(|r| ineq31_rhs(r) + r.grad_omega_l2.powi(2)))
}

fn ineq2_scale(records: &[DiagnosticsRecord], c: f64) -> f64 {
    max_of(records.iter().map(|r| c * ineq2_rhs(r) + r.grad_omega_l2.powi(2)))
}

/// Largest positive part of the enstrophy inequality with the
/// `||Pi||_2^2 ||Pi||_inf^2` forcing bound.
pub fn ineq31_max(records: &[DiagnosticsRecord]) -> f64 {
    max_of(intervals(records, ineq31_interval))
}

pub fn ineq2_max(records: &[DiagnosticsRecord], c: f64) -> f64 {
    max_of(intervals(records, |a, b| ineq2_interval(a, b, c)))
}

pub fn check_ineq31(coarse: &[DiagnosticsRecord], fine: &[DiagnosticsRecord]) -> CheckReport {
    shrink_report(
        "ineq31",
        ineq31_max(coarse),
        ineq31_max(fine),
        INEQ_SHRINK,
        FLOOR_REL * ineq31_scale(fine),
        "positive part of enstrophy residual, forcing |Pi|_2^2 |Pi|_inf^2",
    )
}

/// As [`check_ineq31`] with the resistive forcing bound
/// `c ||Pi||_inf^(2/3) ||Pi||_2^(4/3) ||∇Pi||_2^2`.
pub fn check_ineq2(coarse: &[DiagnosticsRecord], fine: &[DiagnosticsRecord], c: f64) -> CheckReport {
    shrink_report(
        "ineq2",
        ineq2_max(coarse, c),
        ineq2_max(fine, c),
        INEQ_SHRINK,
        FLOOR_REL * ineq2_scale(fine, c),
        &format!("positive part of enstrophy residual, resistive forcing bound with C={c}"),
    )
}

/// Largest relative mismatch `|lhs - rhs| / rhs` of the curl identity.
pub fn curl_identity_mismatch(records: &[DiagnosticsRecord]) -> f64 {
    max_of(records.iter().map(|r| {
        let d = (r.curl_identity_lhs - r.curl_identity_rhs).abs();
        if d == 0.0 {
            0.0
        } else {
            d / r.curl_identity_rhs.abs().max(f64::MIN_POSITIVE)
        }
    }))
}

pub fn check_curl_identity(records: &[DiagnosticsRecord], rel_tol: f64) -> CheckReport {
    let m = curl_identity_mismatch(records);
    CheckReport::new(
        "curl-identity",
        m <= rel_tol,
        m,
        rel_tol,
        "max relative mismatch over records".into(),
    )
}

/// `max_t ||Omega(t)||_2 / (1 + sqrt(t))`, reported without a verdict.
pub fn omega_growth_ratio(records: &[DiagnosticsRecord]) -> CheckReport {
    let v = max_of(records.iter().map(|r| r.omega_l2 / (1.0 + r.time.max(0.0).sqrt())));
    CheckReport {
        name: "omega-growth".into(),
        status: CheckStatus::Info,
        value: v,
        threshold: f64::NAN,
        detail: "max ||Omega||_2 / (1 + sqrt t)".into(),
    }
}

// ---------------------------------------------------------------------------
// CSV

pub fn csv_header() -> String {
    CSV_COLUMNS.join(",")
}

fn csv_row(r: &DiagnosticsRecord) -> String {
    r.to_array()
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn to_csv_string(records: &[DiagnosticsRecord]) -> String {
    let mut s = csv_header();
    s.push('\n');
    for r in records {
        s.push_str(&csv_row(r));
        s.push('\n');
    }
    s
}

pub fn write_csv(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    fs::write(path, to_csv_string(records)).map_err(|e| Error::io(path, e))
}

pub fn parse_csv(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::invalid("empty diagnostics CSV"))?;
    if header.trim() != csv_header() {
        return Err(Error::invalid(format!("unexpected diagnostics header: {header}")));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, line)| {
            let vals: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::invalid(format!("row {}: {e}", k + 1)))?;
            let arr: [f64; 17] = vals.try_into().map_err(|v: Vec<f64>| {
                Error::invalid(format!("row {}: expected 17 columns, got {}", k + 1, v.len()))
            })?;
            Ok(DiagnosticsRecord::from_array(arr))
        })
        .collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::AxiState;
    use crate::grid::{make_grid, Boundary, Parity};
    use crate::initial::{make_initial, InitialName, InitialParams};
    use crate::poisson::StreamSolver;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn state(name: InitialName, n: usize) -> AxiState {
        let g = make_grid(n, n, 4.0, 4.0).unwrap();
        let (pi, om) = make_initial(name, &InitialParams::default(), &g).unwrap();
        AxiState::new(pi, om, Mode::Ideal, 0.0, &StreamSolver::new(g)).unwrap()
    }

    #[test]
    fn zero_state_has_zero_diagnostics() {
        let r = record(&state(InitialName::Zero, 16), 0.1);
        let a = r.to_array();
        assert_eq!(a[0], 0.0);
        assert_eq!(a[1], 0.1);
        assert!(a[2..].iter().all(|&v| v == 0.0), "{a:?}");
        assert_eq!(r.cz_ratio(), 0.0);
    }

    #[test]
    fn magnetic_energy_two_ways() {
        let s = state(InitialName::GaussianRing, 64);
        let r = record(&s, 0.1);
        let g = *s.grid();
        let direct = 0.5 * g.integrate(|i, j| (g.r(i) * s.pi.at(i, j)).powi(2));
        assert!((r.energy_magnetic - direct).abs() <= 1e-12 * direct);
        // int 1/2 r^2 Pi^2 2 pi r dr dz with a Gaussian ring of width 0.25 at r0 = 1:
        // approximately 1/2 * 2 pi * r0^3 * (pi sigma^2 / 2)
        let approx = 0.5 * 2.0 * PI * (PI * 0.0625 / 2.0);
        assert!((r.energy_magnetic - approx).abs() < 0.1 * approx, "{}", r.energy_magnetic);
    }

    fn axial_q(n: usize) -> (ScalarField, ScalarField) {
        let g = make_grid(n, n, 1.0, 2.0).unwrap();
        let k = PI;
        let q = ScalarField::from_fn(g, Parity::Even, Boundary::NeumannZero, |_, z| (k * z).sin()).unwrap();
        let om =
            ScalarField::from_fn(g, Parity::Even, Boundary::NeumannZero, |_, z| k * k * (k * z).sin()).unwrap();
        (q, om)
    }

    #[test]
    fn curl_identity_for_axial_stream_is_second_order() {
        let err = |n| {
            let (q, om) = axial_q(n);
            let (l, r) = curl_identity_sides(&q, &om).unwrap();
            ((l - r) / r).abs()
        };
        let (a, b) = (err(32), err(64));
        assert!(a > 0.0);
        let ratio = a / b;
        assert!((3.2..4.8).contains(&ratio), "{a} {b}");
    }

    #[test]
    fn grad_u_matches_velocity_route() {
        // independent route: differentiate the velocity components directly
        let s = state(InitialName::OpposingPair, 64);
        let u = &s.velocity;
        let direct = sq_integral(&ddr(&u.u_r))
            + sq_integral(&ddz(&u.u_r))
            + sq_integral(&u.u_r.over_r().unwrap())
            + sq_integral(&ddr(&u.u_z))
            + sq_integral(&ddz(&u.u_z));
        let via_q = grad_u_sq_from_q(&s.psi_over_r);
        assert!(via_q > 0.0);
        assert!((direct - via_q).abs() < 0.05 * via_q, "{direct} {via_q}");
    }

    fn rec(time: f64, f: impl Fn(&mut DiagnosticsRecord)) -> DiagnosticsRecord {
        let mut r = DiagnosticsRecord {
            time,
            dt: 0.01,
            ..Default::default()
        };
        f(&mut r);
        r
    }

    #[test]
    fn interval_residuals() {
        let a = rec(0.0, |r| {
            r.energy_kinetic = 1.0;
            r.grad_u_sq = 2.0;
        });
        let b = rec(0.5, |r| {
            r.energy_kinetic = 0.0;
            r.grad_u_sq = 2.0;
        });
        assert_eq!(energy_interval(&a, &b), 0.0);
        let a = rec(0.0, |r| {
            r.omega_l2 = 1.0;
            r.pi_l2 = 1.0;
            r.pi_linf = 1.0;
        });
        let b = rec(1.0, |r| {
            r.omega_l2 = 2.0;
            r.pi_l2 = 1.0;
            r.pi_linf = 1.0;
        });
        // 3 - 1 = 2
        assert_eq!(ineq31_interval(&a, &b), 2.0);
        let c = DiagnosticsRecord { time: 2.0, ..a };
        // enstrophy falls back from 4 to 1 with no dissipation: -3 < 1
        assert_eq!(ineq31_interval(&b, &c), 0.0);
    }

    #[test]
    fn max_principle_check() {
        let ok = [rec(0.0, |r| r.pi_linf = 1.0), rec(1.0, |r| r.pi_linf = 1.0 + 1e-11)];
        assert!(check_max_principle(&ok).passed());
        let bad = [rec(0.0, |r| r.pi_linf = 1.0), rec(1.0, |r| r.pi_linf = 1.0 + 1e-6)];
        assert_eq!(check_max_principle(&bad).status, CheckStatus::Fail);
        assert!(check_max_principle(&[]).passed());
    }

    #[test]
    fn zero_run_checks_pass() {
        let g = make_grid(16, 16, 1.0, 1.0).unwrap();
        let recs: Vec<_> = (0..4).map(|k| rec(k as f64 * 0.1, |_| {})).collect();
        for mode in [Mode::Ideal, Mode::Resistive] {
            let run = RunRecords::new(g, mode, &recs);
            assert!(check_energy_law(&run, 1.0).unwrap().passed());
            assert!(check_energy_refinement(&run, &run).unwrap().passed());
            assert!(check_pi_l2_refinement(&run, &run).passed());
        }
        let res = RunRecords::new(g, Mode::Resistive, &recs);
        assert_eq!(check_pi_l2_monotone(&res, 1.0).status, CheckStatus::Pass);
        let ideal = RunRecords::new(g, Mode::Ideal, &recs);
        assert_eq!(check_pi_l2_monotone(&ideal, 1.0).status, CheckStatus::Skipped);
        assert!(check_cz_ratio(&recs, &recs).passed());
        assert_eq!(cz_sup(&recs), 0.0);
        assert!(check_ineq31(&recs, &recs).passed());
        assert!(check_ineq2(&recs, &recs, 1.0).passed());
        assert!(check_curl_identity(&recs, 0.01).passed());
        assert!(check_record_sequence(&recs).passed());
    }

    #[test]
    fn energy_law_needs_three_records() {
        let g = make_grid(16, 16, 1.0, 1.0).unwrap();
        let recs = [rec(0.0, |_| {}), rec(1.0, |_| {})];
        assert!(check_energy_law(&RunRecords::new(g, Mode::Ideal, &recs), 1.0).is_err());
    }

    #[test]
    fn shrink_criterion() {
        assert!(shrink_report("x", 1.0, 0.4, 2.0, 0.0, "").passed());
        assert!(!shrink_report("x", 1.0, 0.6, 2.0, 0.0, "").passed());
        assert!(shrink_report("x", 0.0, 1e-20, 2.0, 1e-15, "").passed());
    }

    #[test]
    fn pi_monotonicity_detects_growth() {
        let g = make_grid(16, 16, 1.0, 1.0).unwrap();
        let recs = [rec(0.0, |r| r.pi_l2 = 1.0), rec(0.1, |r| r.pi_l2 = 1.1)];
        let rep = check_pi_l2_monotone(&RunRecords::new(g, Mode::Resistive, &recs), 1.0);
        assert_eq!(rep.status, CheckStatus::Fail);
    }

    #[test]
    fn cz_stability_band() {
        let a = [rec(0.0, |r| {
            r.cz_lhs = 1.0;
            r.cz_rhs = 1.0;
        })];
        let b = [rec(0.0, |r| {
            r.cz_lhs = 1.1;
            r.cz_rhs = 1.0;
        })];
        let c = [rec(0.0, |r| {
            r.cz_lhs = 1.3;
            r.cz_rhs = 1.0;
        })];
        assert!(check_cz_ratio(&a, &b).passed());
        assert!(!check_cz_ratio(&a, &c).passed());
    }

    #[test]
    fn csv_rejects_bad_input() {
        assert!(parse_csv("").is_err());
        assert!(parse_csv("a,b\n").is_err());
        let bad = format!("{}\n1,2,3\n", csv_header());
        assert!(parse_csv(&bad).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip(vals in proptest::array::uniform17(-1e30f64..1e30)) {
            let r = DiagnosticsRecord::from_array(vals);
            let back = parse_csv(&to_csv_string(&[r, r])).unwrap();
            prop_assert_eq!(back, vec![r, r]);
        }
    }
}
