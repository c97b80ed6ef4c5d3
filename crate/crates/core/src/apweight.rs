//! Monte-Carlo probe of the Muckenhoupt `A_p` condition for
//! `w(y) = |y'|^alpha` on `R^5 = R^4 x R` (`y'` the four "radial" variables).
//!
//! For a ball `B` of radius `R` whose center sits at distance `t R` from the
//! axis `y' = 0`,
//!
//! ```text
//! A(t) = avg_B(w) * avg_B(w^(-1/(p-1)))^(p-1)
//! ```
//!
//! Both averages are of the form `avg_B |y'|^beta`. In axial slices the ball
//! is a 4-ball of radius `rho(z)`; writing `y' = s theta` the slice integral
//! is `int s^(beta+3) 2 pi^2 F(c(s)) ds`, with `F` the fraction of `S^3`
//! inside the slice. We sample `z` uniformly and `s` with density
//! `∝ s^(beta+3)` on the slice's radial range, so the estimator only sees the
//! bounded factor `F`. Samples are stratified on a grid in `(z, s)`. The
//! weight does not depend on `z`, so only the offset from the ball center
//! enters and translation invariance along the axis is exact.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par;

/// Minimum number of samples per cell for reported runs.
pub const MIN_SAMPLES: usize = 10_000;
/// Strata per axis of the `(z, s)` stratification.
pub const STRATA: usize = 16;
/// Jump between consecutive near-axis estimates counted as growth.
pub const GROWTH_FACTOR: f64 = 10.0;
/// Probes with `t` at most this are "near the axis".
pub const NEAR_AXIS_T: f64 = 2.0;
pub const DEFAULT_T_GRID: [f64; 7] = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

const BOUNDARY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ApProbe {
    pub alpha: f64,
    pub p: f64,
    pub t_ratios: Vec<f64>,
    pub mc_samples: usize,
    pub rng_seed: u64,
    /// Ball radius; the quantity is scale invariant, so 1 unless testing that.
    pub radius: f64,
}

impl ApProbe {
    pub fn new(alpha: f64, p: f64, mc_samples: usize, rng_seed: u64) -> Result<Self> {
        let probe = Self {
            alpha,
            p,
            t_ratios: DEFAULT_T_GRID.to_vec(),
            mc_samples,
            rng_seed,
            radius: 1.0,
        };
        probe.validate()?;
        Ok(probe)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(Error::invalid(format!("p must satisfy 1 < p < inf, got {}", self.p)));
        }
        if !self.alpha.is_finite() {
            return Err(Error::invalid("alpha must be finite"));
        }
        if self.mc_samples < 2 * STRATA * STRATA {
            return Err(Error::invalid(format!(
                "need at least {} samples for the stratified estimator, got {}",
                2 * STRATA * STRATA,
                self.mc_samples
            )));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::invalid("ball radius must be positive"));
        }
        if let Some(t) = self.t_ratios.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::invalid(format!("t ratios must be finite and >= 0, got {t}")));
        }
        Ok(())
    }

    /// Conjugate exponent `q = p / (p - 1)`.
    pub fn q(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// Exponent of the dual weight `w^(-q/p) = r^(-alpha / (p - 1))`.
    pub fn dual_exponent(&self) -> f64 {
        -self.alpha / (self.p - 1.0)
    }

    /// The open window `(-4, 4 (p - 1))` of exponents giving an `A_p` weight.
    pub fn window(&self) -> (f64, f64) {
        (-4.0, 4.0 * (self.p - 1.0))
    }

    pub fn is_boundary(&self) -> bool {
        let (lo, hi) = self.window();
        (self.alpha - lo).abs() <= BOUNDARY_EPS || (self.alpha - hi).abs() <= BOUNDARY_EPS
    }
}

/// Whether `int_B |y'|^beta` diverges for a ball at ratio `t`.
///
/// A ball crossing the axis (`t < 1`) needs `beta > -4`. A ball tangent to
/// it (`t = 1`) meets the axis in one point where the volume within `|y'| < e`
/// scales as `e^(9/2)`, so it needs `beta > -9/2`. Balls with `t > 1` stay
/// away from the axis.
pub fn power_diverges(beta: f64, t: f64) -> bool {
    if t < 1.0 {
        beta <= -4.0
    } else if t == 1.0 {
        beta <= -4.5
    } else {
        false
    }
}

/// Fraction of `S^3` with first coordinate `>= c`.
fn cap_fraction(c: f64) -> f64 {
    if c <= -1.0 {
        1.0
    } else if c >= 1.0 {
        0.0
    } else {
        (c.acos() - c * (1.0 - c * c).sqrt()) / PI
    }
}

/// `int_lo^hi s^g ds` and the inverse CDF of the density `∝ s^g` on `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
struct PowerLaw {
    g: f64,
    lo: f64,
    hi: f64,
    mass: f64,
}

impl PowerLaw {
    fn new(g: f64, lo: f64, hi: f64) -> Self {
        let mass = if (g + 1.0).abs() < 1e-12 {
            (hi / lo).ln()
        } else {
            (hi.powf(g + 1.0) - lo.powf(g + 1.0)) / (g + 1.0)
        };
        Self { g, lo, hi, mass }
    }

    fn sample(&self, u: f64) -> f64 {
        let e = self.g + 1.0;
        if e.abs() < 1e-12 {
            self.lo * (self.hi / self.lo).powf(u)
        } else {
            let a = self.lo.powf(e);
            let b = self.hi.powf(e);
            (a + u * (b - a)).powf(1.0 / e).clamp(self.lo, self.hi)
        }
    }
}

/// Mean and standard error of a stratified estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McAverage {
    pub mean: f64,
    pub stderr: f64,
}

/// `avg_B |y'|^beta` over the 5D ball of radius `radius` centered at
/// distance `a` from the axis.
fn power_average(beta: f64, a: f64, radius: f64, samples: usize, rng: &mut ChaCha8Rng) -> McAverage {
    if beta == 0.0 {
        return McAverage { mean: 1.0, stderr: 0.0 };
    }
    let g = beta + 3.0;
    let ball = 8.0 * PI * PI * radius.powi(5) / 15.0;
    let k = STRATA;
    let per = samples / (k * k);
    let mut mean = 0.0;
    let mut var = 0.0;
    for sz in 0..k {
        for ss in 0..k {
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            for _ in 0..per {
                let uz = (sz as f64 + rng.random::<f64>()) / k as f64;
                let us = (ss as f64 + rng.random::<f64>()) / k as f64;
                let dz = radius * (2.0 * uz - 1.0);
                let rho = (radius * radius - dz * dz).max(0.0).sqrt();
                let lo = (a - rho).max(0.0);
                let hi = a + rho;
                let x = if hi <= lo || rho == 0.0 {
                    0.0
                } else {
                    let law = PowerLaw::new(g, lo, hi);
                    let s = law.sample(us);
                    let frac = if a == 0.0 {
                        1.0
                    } else if s == 0.0 {
                        // the axis point of a tangent slice
                        0.5
                    } else {
                        cap_fraction((s * s + a * a - rho * rho) / (2.0 * s * a))
                    };
                    2.0 * radius * 2.0 * PI * PI * frac * law.mass / ball
                };
                sum += x;
                sum2 += x * x;
            }
            let n = per as f64;
            let m = sum / n;
            let v = ((sum2 / n - m * m) * n / (n - 1.0)).max(0.0);
            mean += m;
            var += v / n;
        }
    }
    let strata = (k * k) as f64;
    McAverage {
        mean: mean / strata,
        stderr: var.sqrt() / strata,
    }
}

/// One probed ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApEstimate {
    pub t: f64,
    /// `A(t)`; infinite when flagged divergent.
    pub estimate: f64,
    pub stderr: f64,
    /// Divergence established from the integrability thresholds, without MC.
    pub divergent: bool,
}

impl ApEstimate {
    pub fn is_finite(&self) -> bool {
        !self.divergent && self.estimate.is_finite()
    }
}

fn mix(mut x: u64) -> u64 {
    // splitmix64 finalizer
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn cell_stream(alpha: f64, p: f64, t: f64, factor: u64) -> u64 {
    mix(mix(mix(alpha.to_bits()) ^ p.to_bits()) ^ t.to_bits()) ^ factor
}

fn cell_rng(probe: &ApProbe, t: f64, factor: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(probe.rng_seed);
    rng.set_stream(cell_stream(probe.alpha, probe.p, t, factor));
    rng
}

/// Estimates `A(t)` for one ball. The RNG stream depends only on the seed
/// and `(alpha, p, t)`, so results are reproducible and independent of the
/// order in which cells are evaluated.
pub fn ap_constant(probe: &ApProbe, t: f64) -> Result<ApEstimate> {
    probe.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("t must be finite and >= 0, got {t}")));
    }
    let b1 = probe.alpha;
    let b2 = probe.dual_exponent();
    if power_diverges(b1, t) || power_diverges(b2, t) {
        return Ok(ApEstimate {
            t,
            estimate: f64::INFINITY,
            stderr: f64::NAN,
            divergent: true,
        });
    }
    let a = t * probe.radius;
    let m1 = power_average(b1, a, probe.radius, probe.mc_samples, &mut cell_rng(probe, t, 1));
    let m2 = power_average(b2, a, probe.radius, probe.mc_samples, &mut cell_rng(probe, t, 2));
    let e = probe.p - 1.0;
    let estimate = m1.mean * m2.mean.powf(e);
    // delta method on log A = log m1 + (p - 1) log m2
    let rel = ((m1.stderr / m1.mean).powi(2) + (e * m2.stderr / m2.mean).powi(2)).sqrt();
    Ok(ApEstimate {
        t,
        estimate,
        stderr: estimate * rel,
        divergent: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Bounded,
    Unbounded,
    Inconclusive,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Bounded => "bounded",
            Classification::Unbounded => "unbounded",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApReport {
    pub alpha: f64,
    pub p: f64,
    pub estimates: Vec<ApEstimate>,
    /// Largest estimate over the probed ratios.
    pub sup_estimate: f64,
    pub classification: Classification,
    /// Which rule decided the classification.
    pub trigger: String,
}

impl ApReport {
    /// Whether `alpha` lies strictly inside the `A_p` window `(-4, 4(p-1))`.
    pub fn expected(&self) -> Classification {
        let (lo, hi) = (-4.0, 4.0 * (self.p - 1.0));
        if (self.alpha - lo).abs() <= BOUNDARY_EPS || (self.alpha - hi).abs() <= BOUNDARY_EPS {
            Classification::Inconclusive
        } else if self.alpha > lo && self.alpha < hi {
            Classification::Bounded
        } else {
            Classification::Unbounded
        }
    }
}

/// `|A(t) - 1|` does not grow (beyond 3 combined standard errors) along the
/// probed ratios `t > after`.
pub fn decays_towards_one(estimates: &[ApEstimate], after: f64) -> bool {
    let far: Vec<_> = estimates.iter().filter(|e| e.t > after).collect();
    far.windows(2).all(|w| {
        let slack = 3.0 * w[0].stderr.hypot(w[1].stderr);
        (w[1].estimate - 1.0).abs() <= (w[0].estimate - 1.0).abs() + slack
    })
}

fn classify(probe: &ApProbe, estimates: &[ApEstimate]) -> (Classification, String) {
    if probe.is_boundary() {
        return (
            Classification::Inconclusive,
            "alpha on the boundary of the window".into(),
        );
    }
    if let Some(e) = estimates.iter().find(|e| e.divergent) {
        return (
            Classification::Unbounded,
            format!("analytic: weight or dual weight not integrable at t = {}", e.t),
        );
    }
    let near: Vec<_> = estimates.iter().filter(|e| e.t <= NEAR_AXIS_T).collect();
    for w in near.windows(2) {
        let (a, b) = (w[0].estimate, w[1].estimate);
        if a.max(b) > GROWTH_FACTOR * a.min(b) {
            return (
                Classification::Unbounded,
                format!("empirical: estimate jumps more than {GROWTH_FACTOR}x between t = {} and t = {}", w[0].t, w[1].t),
            );
        }
    }
    if !estimates.iter().all(ApEstimate::is_finite) {
        return (Classification::Inconclusive, "non-finite estimate".into());
    }
    if !decays_towards_one(estimates, NEAR_AXIS_T) {
        return (
            Classification::Inconclusive,
            format!("no plateau for t > {NEAR_AXIS_T}"),
        );
    }
    (
        Classification::Bounded,
        format!("all estimates finite, plateau for t > {NEAR_AXIS_T}"),
    )
}

/// Probes one `(alpha, p)` over `probe.t_ratios`.
pub fn ap_report(probe: &ApProbe) -> Result<ApReport> {
    probe.validate()?;
    let estimates = par::map_range(probe.t_ratios.len(), |k| ap_constant(probe, probe.t_ratios[k]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let sup_estimate = estimates.iter().fold(0.0f64, |m, e| m.max(e.estimate));
    let (classification, trigger) = classify(probe, &estimates);
    Ok(ApReport {
        alpha: probe.alpha,
        p: probe.p,
        estimates,
        sup_estimate,
        classification,
        trigger,
    })
}

/// Probes every `alpha` in `alpha_grid` at exponent `p`.
pub fn ap_sweep(
    p: f64,
    alpha_grid: &[f64],
    t_grid: &[f64],
    mc_samples: usize,
    rng_seed: u64,
) -> Result<Vec<ApReport>> {
    let probes = alpha_grid
        .iter()
        .map(|&alpha| {
            let probe = ApProbe {
                alpha,
                p,
                t_ratios: t_grid.to_vec(),
                mc_samples,
                rng_seed,
                radius: 1.0,
            };
            probe.validate().map(|_| probe)
        })
        .collect::<Result<Vec<_>>>()?;
    par::map_range(probes.len(), |k| ap_report(&probes[k]))
        .into_iter()
        .collect()
}

pub const CSV_HEADER: &str = "alpha,p,t,estimate,stderr,classification";

pub fn to_csv_string(reports: &[ApReport]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in reports {
        for e in &r.estimates {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                r.alpha, r.p, e.t, e.estimate, e.stderr, r.classification
            ));
        }
    }
    s
}

pub fn write_csv(path: &Path, reports: &[ApReport]) -> Result<()> {
    fs::write(path, to_csv_string(reports)).map_err(|e| Error::io(path, e))
}
