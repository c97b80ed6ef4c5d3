//! `simulate`, `verify` and `apcheck` workflows behind the command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::apweight::{self, Classification, MIN_SAMPLES};
use crate::config::ConfigFile;
use crate::diagnostics::{self, CheckReport, CheckStatus, DiagnosticsRecord, RunRecords};
use crate::error::{BlowUpReport, Error, Result};
use crate::evolve::{Mode, Simulator};
use crate::snapshot::write_axifield;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_BLOW_UP: i32 = 2;

/// Environment variable capping the worker pool; 0 or unset means automatic.
pub const THREADS_ENV: &str = "AXIMHD_THREADS";

pub const CHECK_NAMES: [&str; 7] = [
    "energy-law",
    "max-principle",
    "pi-l2",
    "cz-ratio",
    "ineq31",
    "ineq2",
    "curl-identity",
];

/// Applies [`THREADS_ENV`] to the global worker pool. Without the `parallel`
/// feature the variable is validated and otherwise ignored.
pub fn configure_threads() -> Result<usize> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            Error::config(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}"))
        })?,
        Err(_) => 0,
    };
    #[cfg(feature = "parallel")]
    {
        if n > 0 {
            // a pool may already exist when called twice in one process
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        Ok(rayon::current_num_threads())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        Ok(1)
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::BlowUp(_) => EXIT_BLOW_UP,
        _ => EXIT_CONFIG,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    BlowUp,
}

/// Contents of `run_meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunMeta {
    pub config: ConfigFile,
    pub wall_time_s: f64,
    pub termination: Termination,
    pub steps: usize,
    pub final_time: f64,
    pub records: usize,
    pub blow_up: Option<String>,
}

/// Outcome of one simulation, successful or not.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub records: Vec<DiagnosticsRecord>,
    pub meta: RunMeta,
    pub blow_up: Option<BlowUpReport>,
}

impl Simulation {
    pub fn completed(&self) -> bool {
        self.meta.termination == Termination::Completed
    }

    /// The records of a completed run, or the blow-up as an error.
    pub fn into_records(self) -> Result<Vec<DiagnosticsRecord>> {
        match self.blow_up {
            None => Ok(self.records),
            Some(rep) => Err(Error::BlowUp(rep)),
        }
    }
}

/// Runs `cfg`, keeping the records produced before a blow-up. Snapshots go
/// to `snapshot_dir` when given.
pub fn run_config(cfg: &ConfigFile, snapshot_dir: Option<&Path>) -> Result<Simulation> {
    let start = Instant::now();
    let grid = cfg.grid()?;
    let sim = Simulator::new(grid, cfg.run_config())?;
    let (pi0, omega0) = cfg.initial_fields()?;
    let init = sim.initial_state(pi0, omega0)?;

    let mut records = Vec::new();
    let mut io_error = None;
    let result = sim.run_observed(init, |step, state, rec| {
        records.push(*rec);
        if let (Some(dir), None) = (snapshot_dir, &io_error) {
            let out = write_axifield(&dir.join(format!("pi_{step}.axifield")), &state.pi)
                .and_then(|_| write_axifield(&dir.join(format!("omega_{step}.axifield")), &state.omega));
            if let Err(e) = out {
                io_error = Some(e);
            }
        }
    });
    if let Some(e) = io_error {
        return Err(e);
    }
    let (termination, steps, final_time, blow_up) = match result {
        Ok(out) => (Termination::Completed, out.steps, out.final_state.time, None),
        Err(Error::BlowUp(rep)) => (Termination::BlowUp, rep.step, rep.time, Some(rep)),
        Err(e) => return Err(e),
    };
    let meta = RunMeta {
        config: cfg.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        termination,
        steps,
        final_time,
        records: records.len(),
        blow_up: blow_up.as_ref().map(ToString::to_string),
    };
    Ok(Simulation {
        records,
        meta,
        blow_up,
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `diagnostics.csv` and `run_meta.json` for a finished simulation.
pub fn write_outputs(dir: &Path, sim: &Simulation) -> Result<()> {
    diagnostics::write_csv(&dir.join("diagnostics.csv"), &sim.records)?;
    let meta_path = dir.join("run_meta.json");
    let json = serde_json::to_string_pretty(&sim.meta).expect("run metadata serializes");
    fs::write(&meta_path, json + "\n").map_err(|e| Error::io(&meta_path, e))
}

pub fn read_run_meta(path: &Path) -> Result<RunMeta> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

/// `simulate <config>`: returns the process exit code.
pub fn cmd_simulate(config_path: &Path) -> i32 {
    match simulate(config_path) {
        Ok(sim) if sim.completed() => EXIT_OK,
        Ok(sim) => {
            eprintln!(
                "error: run aborted: {}",
                sim.meta.blow_up.as_deref().unwrap_or("blow-up")
            );
            EXIT_BLOW_UP
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn simulate(config_path: &Path) -> Result<Simulation> {
    let cfg = ConfigFile::load(config_path)?;
    let dir = cfg.output.dir.clone();
    create_dir(&dir)?;
    let snapshots = cfg.output.snapshots.then_some(dir.as_path());
    let sim = run_config(&cfg, snapshots)?;
    write_outputs(&dir, &sim)?;
    Ok(sim)
}

pub fn parse_checks(list: &str) -> Result<Vec<String>> {
    let checks: Vec<String> = list
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if checks.is_empty() {
        return Err(Error::config("no checks requested"));
    }
    if let Some(bad) = checks.iter().find(|c| !CHECK_NAMES.contains(&c.as_str())) {
        return Err(Error::config(format!(
            "unknown check {bad:?} (expected one of {})",
            CHECK_NAMES.join(", ")
        )));
    }
    Ok(checks)
}

fn needs_pair(check: &str, mode: Mode) -> bool {
    match check {
        "energy-law" | "cz-ratio" | "ineq31" => true,
        "pi-l2" | "ineq2" => mode == Mode::Resistive,
        _ => false,
    }
}

fn skipped(name: &str, why: &str) -> CheckReport {
    CheckReport {
        name: name.into(),
        status: CheckStatus::Skipped,
        value: f64::NAN,
        threshold: f64::NAN,
        detail: why.into(),
    }
}

/// Evaluates `checks` for `cfg`, running the configured grid and, when a
/// check compares resolutions, the half-resolution grid as well.
pub fn verify(cfg: &ConfigFile, checks: &[String]) -> Result<Vec<CheckReport>> {
    let mode = cfg.physics.mode;
    let fine_records = run_config(cfg, None)?.into_records()?;
    let coarse_cfg = if checks.iter().any(|c| needs_pair(c, mode)) {
        Some(cfg.coarsened()?)
    } else {
        None
    };
    let coarse_records = match &coarse_cfg {
        Some(c) => Some(run_config(c, None)?.into_records()?),
        None => None,
    };
    let fine = RunRecords::new(cfg.grid()?, mode, &fine_records);
    let coarse = match (&coarse_cfg, &coarse_records) {
        (Some(c), Some(r)) => Some(RunRecords::new(c.grid()?, mode, r)),
        _ => None,
    };
    let v = cfg.verify;
    let mut reports = vec![diagnostics::check_record_sequence(fine.records)];
    for name in checks {
        let pair = || coarse.expect("refinement pair was run");
        let rep = match name.as_str() {
            "energy-law" => diagnostics::check_energy_refinement(&pair(), &fine)?,
            "max-principle" => diagnostics::check_max_principle(fine.records),
            "pi-l2" => match mode {
                Mode::Ideal => diagnostics::check_pi_l2_monotone(&fine, v.tol_constant),
                Mode::Resistive => {
                    let single = diagnostics::check_pi_l2_monotone(&fine, v.tol_constant);
                    let refine = diagnostics::check_pi_l2_refinement(&pair(), &fine);
                    reports.push(refine);
                    single
                }
            },
            "cz-ratio" => diagnostics::check_cz_ratio(pair().records, fine.records),
            "ineq31" => diagnostics::check_ineq31(pair().records, fine.records),
            "ineq2" => match mode {
                Mode::Resistive => {
                    diagnostics::check_ineq2(pair().records, fine.records, v.ineq2_constant)
                }
                Mode::Ideal => skipped("ineq2", "resistive only"),
            },
            "curl-identity" => diagnostics::check_curl_identity(fine.records, v.curl_tolerance),
            other => return Err(Error::config(format!("unknown check {other:?}"))),
        };
        reports.push(rep);
    }
    reports.push(diagnostics::omega_growth_ratio(fine.records));
    Ok(reports)
}

pub fn print_table(out: &mut impl Write, reports: &[CheckReport]) -> std::io::Result<()> {
    writeln!(out, "{:<16} {:<8} {:>14} {:>14}  detail", "check", "status", "value", "threshold")?;
    for r in reports {
        writeln!(
            out,
            "{:<16} {:<8} {:>14.6e} {:>14.6e}  {}",
            r.name,
            r.status.as_str(),
            r.value,
            r.threshold,
            r.detail
        )?;
    }
    Ok(())
}

/// `verify <config> --checks a,b,c`: exit 0 iff no check fails.
pub fn cmd_verify(config_path: &Path, checks: &str) -> i32 {
    let outcome = ConfigFile::load(config_path).and_then(|cfg| {
        let checks = parse_checks(checks)?;
        verify(&cfg, &checks)
    });
    match outcome {
        Ok(reports) => {
            let _ = print_table(&mut std::io::stdout().lock(), &reports);
            if reports.iter().all(CheckReport::passed) {
                EXIT_OK
            } else {
                EXIT_CONFIG
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApCheckArgs {
    pub p: f64,
    pub alphas: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

pub fn parse_alpha_list(list: &str) -> Result<Vec<f64>> {
    let alphas = list
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::config(format!("alpha {s:?} is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if alphas.is_empty() {
        return Err(Error::config("no alpha values given"));
    }
    Ok(alphas)
}

/// Runs the sweep, writes `ap_report.csv`, and returns the reports plus
/// whether every classification matched the window `(-4, 4 (p - 1))`.
pub fn apcheck(args: &ApCheckArgs) -> Result<(Vec<apweight::ApReport>, bool)> {
    if args.samples < MIN_SAMPLES {
        return Err(Error::config(format!(
            "--samples must be at least {MIN_SAMPLES}, got {}",
            args.samples
        )));
    }
    if !(args.p.is_finite() && args.p > 1.0) {
        return Err(Error::config(format!("--p must exceed 1, got {}", args.p)));
    }
    let reports = apweight::ap_sweep(
        args.p,
        &args.alphas,
        &apweight::DEFAULT_T_GRID,
        args.samples,
        args.seed,
    )?;
    create_dir(&args.out_dir)?;
    apweight::write_csv(&args.out_dir.join("ap_report.csv"), &reports)?;
    let ok = reports.iter().all(|r| match r.expected() {
        Classification::Inconclusive => true,
        want => r.classification == want,
    });
    Ok((reports, ok))
}

pub fn cmd_apcheck(args: &ApCheckArgs) -> i32 {
    match apcheck(args) {
        Ok((reports, ok)) => {
            println!("{:>8} {:>6} {:>14} {:<13} trigger", "alpha", "p", "sup A(t)", "class");
            for r in &reports {
                println!(
                    "{:>8} {:>6} {:>14.6e} {:<13} {}",
                    r.alpha, r.p, r.sup_estimate, r.classification, r.trigger
                );
            }
            if ok {
                EXIT_OK
            } else {
                EXIT_CONFIG
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_lists() {
        assert_eq!(parse_checks("energy-law, ineq31").unwrap(), vec!["energy-law", "ineq31"]);
        assert!(parse_checks("").is_err());
        assert!(parse_checks("max-principal").unwrap_err().to_string().contains("max-principal"));
    }

    #[test]
    fn alpha_lists() {
        assert_eq!(parse_alpha_list("-3,-2, 0,2").unwrap(), vec![-3.0, -2.0, 0.0, 2.0]);
        assert!(parse_alpha_list("1,x").is_err());
        assert!(parse_alpha_list(" ").is_err());
    }

    #[test]
    fn pairs_only_where_needed() {
        assert!(needs_pair("ineq31", Mode::Ideal));
        assert!(!needs_pair("max-principle", Mode::Resistive));
        assert!(!needs_pair("pi-l2", Mode::Ideal));
        assert!(needs_pair("pi-l2", Mode::Resistive));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
        let rep = BlowUpReport {
            time: 0.0,
            step: 0,
            pi_linf: 0.0,
            omega_linf: 0.0,
            velocity_linf: 0.0,
        };
        assert_eq!(exit_code(&Error::BlowUp(rep)), EXIT_BLOW_UP);
    }
}
