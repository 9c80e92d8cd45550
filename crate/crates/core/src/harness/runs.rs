use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::fit::{fit_loglinear, local_slopes, FitReport};
use super::records::ScalingRecord;
use crate::error::{Error, Result};
use crate::exact::{dense_hamiltonian, exact_expectation, thermal_density, DEFAULT_DIM_CAP};
use crate::mps::{PurifiedMPS, SchmidtSpectrum};
use crate::observable::{pauli_window, LocalObservable};
use crate::thermal::{build_thermal_purification, converge_dt, min_bond_for_reference, BuildReport};

/// Largest error the untruncated build may show against the dense oracle.
pub const VERIFY_TOL: f64 = 1e-4;
/// Largest accepted max/min ratio of truncation errors across chain lengths.
pub const LOCALITY_RATIO_MAX: f64 = 2.0;
/// Errors below this are indistinguishable from round-off and count as zero.
pub const NOISE_FLOOR: f64 = 1e-12;
/// Smallest accepted r^2 of the tail fit.
pub const TAIL_R2_MIN: f64 = 0.9;
/// Smallest accepted fraction of strictly decreasing adjacent local exponents.
pub const TAIL_DECREASING_FRACTION: f64 = 0.8;
/// `q_min` may grow at most like `(1/eps)^this` across the whole grid.
pub const SCALING_CEILING_EXPONENT: f64 = 0.5;
/// Slack when comparing local exponents for ties.
const EXPONENT_TIE: f64 = 1e-12;

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn mpo_values(state: &PurifiedMPS, obs: &[LocalObservable]) -> Result<Vec<f64>> {
    let rho = state.trace_out_auxiliary()?;
    obs.iter().map(|o| rho.expectation(o)).collect()
}

/// One row of the verification table; `q = 0` marks the untruncated build.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub n: usize,
    pub beta: f64,
    pub dt: f64,
    pub q: usize,
    pub bond: usize,
    pub max_error: f64,
    pub max_tail_weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
}

impl VerifyReport {
    pub fn untruncated(&self) -> impl Iterator<Item = &VerifyRow> {
        self.rows.iter().filter(|r| r.q == 0)
    }

    pub fn breaches(&self) -> Vec<String> {
        self.untruncated()
            .filter(|r| !(r.max_error <= VERIFY_TOL))
            .map(|r| {
                format!(
                    "n={} beta={}: untruncated error {:.3e} exceeds {VERIFY_TOL:e}",
                    r.n, r.beta, r.max_error
                )
            })
            .collect()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>4} {:>6} {:>9} {:>5} {:>5} {:>12} {:>12}",
            "n", "beta", "dt", "q", "bond", "max_error", "tail"
        )?;
        for r in &self.rows {
            let q = if r.q == 0 {
                "full".to_string()
            } else {
                r.q.to_string()
            };
            writeln!(
                f,
                "{:>4} {:>6} {:>9.5} {:>5} {:>5} {:>12.3e} {:>12.3e}",
                r.n, r.beta, r.dt, q, r.bond, r.max_error, r.max_tail_weight
            )?;
        }
        Ok(())
    }
}

/// Compares the thermal MPO against the dense oracle for every 1- and 2-site
/// Pauli string in the window, untruncated and at each `q`.
pub fn run_verify(cfg: &RunConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &n in &cfg.n {
        let model = cfg.chain(n)?;
        let h = dense_hamiltonian(&model, DEFAULT_DIM_CAP)?;
        let obs = pauli_window(n, cfg.window)?;
        for &beta in &cfg.beta {
            let rho = thermal_density(&h, beta)?;
            let exact: Vec<f64> = obs
                .iter()
                .map(|o| exact_expectation(&rho, o))
                .collect::<Result<_>>()?;
            let converged = converge_dt(&cfg.build_config(n, beta)?, &obs, cfg.tol)?;
            let state = converged.state;
            rows.push(VerifyRow {
                n,
                beta,
                dt: converged.dt,
                q: 0,
                bond: state.max_bond(),
                max_error: max_abs_diff(&mpo_values(&state, &obs)?, &exact),
                max_tail_weight: 0.0,
            });
            for &q in &cfg.q {
                let (truncated, tail) = state.truncate_uniform(q)?;
                rows.push(VerifyRow {
                    n,
                    beta,
                    dt: converged.dt,
                    q,
                    bond: truncated.max_bond(),
                    max_error: max_abs_diff(&mpo_values(&truncated, &obs)?, &exact),
                    max_tail_weight: tail,
                });
            }
        }
    }
    Ok(VerifyReport { rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalityRow {
    pub n: usize,
    pub beta: f64,
    pub q: usize,
    pub reference_bond: usize,
    pub max_error: f64,
    pub max_tail_weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalitySummary {
    pub beta: f64,
    pub q: usize,
    /// `max / min` over chain lengths, errors floored at [`NOISE_FLOOR`].
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalityReport {
    pub rows: Vec<LocalityRow>,
    pub summaries: Vec<LocalitySummary>,
}

impl LocalityReport {
    pub fn breaches(&self) -> Vec<String> {
        self.summaries
            .iter()
            .filter(|s| !(s.ratio <= LOCALITY_RATIO_MAX))
            .map(|s| {
                format!(
                    "beta={} q={}: error ratio {:.3} exceeds {LOCALITY_RATIO_MAX}",
                    s.beta, s.q, s.ratio
                )
            })
            .collect()
    }
}

impl fmt::Display for LocalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>5} {:>6} {:>5} {:>8} {:>12} {:>12}",
            "n", "beta", "q", "ref_bond", "max_error", "tail"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>5} {:>6} {:>5} {:>8} {:>12.3e} {:>12.3e}",
                r.n, r.beta, r.q, r.reference_bond, r.max_error, r.max_tail_weight
            )?;
        }
        for s in &self.summaries {
            writeln!(
                f,
                "beta={} q={}: max/min error ratio across N = {:.4}",
                s.beta, s.q, s.ratio
            )?;
        }
        Ok(())
    }
}

/// `max / min` of errors floored at [`NOISE_FLOOR`]; 1 when all vanish.
pub fn error_ratio(errors: &[f64]) -> f64 {
    let floored: Vec<f64> = errors.iter().map(|e| e.max(NOISE_FLOOR)).collect();
    let max = floored.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = floored.iter().copied().fold(f64::INFINITY, f64::min);
    if floored.is_empty() {
        1.0
    } else {
        max / min
    }
}

/// Truncates each chain length's own reference to every `q` and compares
/// local errors in a centered window across lengths.
pub fn run_locality(cfg: &RunConfig) -> Result<LocalityReport> {
    cfg.validate()?;
    let lo = *cfg.n.iter().min().unwrap();
    let hi = *cfg.n.iter().max().unwrap();
    if hi < 4 * lo {
        return Err(Error::Config(format!(
            "N list must span a factor of 4, got {lo}..{hi}"
        )));
    }
    if let Some(chi) = cfg.chi_max {
        let qmax = *cfg.q.iter().max().unwrap();
        if chi < 4 * qmax {
            return Err(Error::Config(format!(
                "chi_max {chi} must be at least 4 q = {}",
                4 * qmax
            )));
        }
    }
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &beta in &cfg.beta {
        let mut per_q: Vec<Vec<f64>> = vec![Vec::new(); cfg.q.len()];
        for &n in &cfg.n {
            let (reference, _) = build_thermal_purification(&cfg.build_config(n, beta)?)?;
            let obs = pauli_window(n, cfg.window)?;
            let ref_values = reference.expectations(&obs)?;
            for (k, &q) in cfg.q.iter().enumerate() {
                let (truncated, tail) = reference.truncate_uniform(q)?;
                let err = max_abs_diff(&truncated.expectations(&obs)?, &ref_values);
                per_q[k].push(err);
                rows.push(LocalityRow {
                    n,
                    beta,
                    q,
                    reference_bond: reference.max_bond(),
                    max_error: err,
                    max_tail_weight: tail,
                });
            }
        }
        for (k, &q) in cfg.q.iter().enumerate() {
            summaries.push(LocalitySummary {
                beta,
                q,
                ratio: error_ratio(&per_q[k]),
            });
        }
    }
    Ok(LocalityReport { rows, summaries })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub n: usize,
    pub beta: f64,
    pub delta: f64,
    pub q: usize,
    pub tail_at_q: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailReport {
    pub n: usize,
    pub beta: f64,
    pub cut: usize,
    pub spectrum_len: usize,
    pub points: Vec<TailPoint>,
    /// `tail_sums[q]` is the weight lost by keeping `q` values, `q = 0..=len`.
    pub tail_sums: Vec<f64>,
    /// `ln Q` against `sqrt(ln(1/delta))`.
    pub sqrt_fit: Option<FitReport>,
    /// `ln Q` against `ln(1/delta)`.
    pub power_fit: Option<FitReport>,
    /// Slopes of the power-law form between adjacent grid points.
    pub local_exponents: Vec<f64>,
    pub note: Option<String>,
}

/// Fraction of adjacent pairs with `x[k+1] < x[k]` (1 when there are no pairs).
pub fn strictly_decreasing_fraction(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 1.0;
    }
    let down = x.windows(2).filter(|w| w[1] < w[0]).count();
    down as f64 / (x.len() - 1) as f64
}

impl TailReport {
    pub fn decreasing_fraction(&self) -> f64 {
        strictly_decreasing_fraction(&self.local_exponents)
    }

    pub fn breaches(&self) -> Vec<String> {
        let mut out = Vec::new();
        let label = format!("n={} beta={}", self.n, self.beta);
        match &self.sqrt_fit {
            Some(fit) if fit.r2 >= TAIL_R2_MIN => {}
            Some(fit) => out.push(format!("{label}: tail fit r2 {:.4} below {TAIL_R2_MIN}", fit.r2)),
            None => return out,
        }
        let frac = self.decreasing_fraction();
        if frac < TAIL_DECREASING_FRACTION {
            out.push(format!(
                "{label}: local exponents strictly decrease in {:.0}% of pairs (< {:.0}%)",
                100.0 * frac,
                100.0 * TAIL_DECREASING_FRACTION
            ));
        }
        out
    }
}

impl fmt::Display for TailReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "n={} beta={} cut={} spectrum length {}",
            self.n, self.beta, self.cut, self.spectrum_len
        )?;
        writeln!(f, "{:>10} {:>5} {:>12}", "delta", "Q", "tail(Q)")?;
        for p in &self.points {
            writeln!(f, "{:>10.1e} {:>5} {:>12.3e}", p.delta, p.q, p.tail_at_q)?;
        }
        if let Some(note) = &self.note {
            writeln!(f, "note: {note}")?;
        }
        if let Some(fit) = &self.sqrt_fit {
            write!(f, "{fit}")?;
        }
        if let Some(fit) = &self.power_fit {
            write!(f, "{fit}")?;
        }
        if !self.local_exponents.is_empty() {
            let e: Vec<String> = self.local_exponents.iter().map(|x| format!("{x:.4}")).collect();
            writeln!(f, "local exponents: [{}]", e.join(", "))?;
        }
        Ok(())
    }
}

/// Minimal `Q` per target `delta` and the two fits, from one Schmidt spectrum.
///
/// `chi_max` is the bond cap the spectrum was produced under; a `Q` that
/// exhausts a capped spectrum means the cap hid part of the tail.
pub fn tail_analysis(
    spectrum: &SchmidtSpectrum,
    n: usize,
    beta: f64,
    deltas: &[f64],
    chi_max: Option<usize>,
) -> Result<TailReport> {
    let tail_sums = spectrum.tail_sums();
    let mut points = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let q = spectrum.min_rank_for(delta);
        if q >= spectrum.len() && chi_max.is_some_and(|c| spectrum.len() >= c) && spectrum.len() > 1 {
            return Err(Error::SpectrumTooShort {
                delta,
                len: spectrum.len(),
            });
        }
        points.push(TailPoint {
            n,
            beta,
            delta,
            q,
            tail_at_q: spectrum.tail_weight(q),
        });
    }
    let mut report = TailReport {
        n,
        beta,
        cut: spectrum.cut,
        spectrum_len: spectrum.len(),
        points,
        tail_sums,
        sqrt_fit: None,
        power_fit: None,
        local_exponents: Vec::new(),
        note: None,
    };
    if report.points.iter().all(|p| p.q == 1) {
        report.note = Some("degenerate spectrum: one Schmidt value meets every target; fit skipped".into());
        return Ok(report);
    }
    let sqrt_pts: Vec<(f64, f64)> = report
        .points
        .iter()
        .map(|p| ((1.0 / p.delta).ln().sqrt(), (p.q as f64).ln()))
        .collect();
    let power_pts: Vec<(f64, f64)> = report
        .points
        .iter()
        .map(|p| ((1.0 / p.delta).ln(), (p.q as f64).ln()))
        .collect();
    report.sqrt_fit = Some(fit_loglinear(&sqrt_pts)?.with_form("logQ-vs-sqrtLogInvDelta"));
    report.power_fit = Some(fit_loglinear(&power_pts)?.with_form("logQ-vs-logInvDelta"));
    report.local_exponents = local_slopes(&power_pts);
    Ok(report)
}

/// Schmidt tail study at the middle cut of each reference state.
pub fn run_tail(cfg: &RunConfig) -> Result<Vec<TailReport>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for &n in &cfg.n {
        for &beta in &cfg.beta {
            let (reference, _) = build_thermal_purification(&cfg.build_config(n, beta)?)?;
            let spectrum = reference.schmidt_spectrum(n / 2)?;
            out.push(tail_analysis(&spectrum, n, beta, &cfg.delta_grid, cfg.chi_max)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub n: usize,
    pub beta: f64,
    /// `ln q_min` against `sqrt(ln(1/eps))`.
    pub sqrt_fit: Option<FitReport>,
    /// `ln q_min` against `ln(1/eps)`.
    pub power_fit: Option<FitReport>,
    /// `d ln q_min / d ln(1/eps)` between adjacent kept grid points.
    pub local_exponents: Vec<f64>,
    /// `(eps, q_min)` of the coarsest and finest kept points.
    pub span: Option<((f64, usize), (f64, usize))>,
}

impl ScalingFit {
    pub fn exponents_non_increasing(&self) -> bool {
        self.local_exponents
            .windows(2)
            .all(|w| w[1] <= w[0] + EXPONENT_TIE)
    }

    /// Whether `q_min` grows at most like `(1/eps)^SCALING_CEILING_EXPONENT`.
    pub fn within_ceiling(&self) -> bool {
        match self.span {
            Some(((e0, q0), (e1, q1))) => {
                q1 as f64 <= q0 as f64 * (e0 / e1).powf(SCALING_CEILING_EXPONENT) * (1.0 + 1e-12)
            }
            None => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingOutcome {
    pub records: Vec<ScalingRecord>,
    pub fits: Vec<ScalingFit>,
    /// Grid points skipped because the reference could not resolve them.
    pub dropped: Vec<String>,
}

impl ScalingOutcome {
    pub fn breaches(&self) -> Vec<String> {
        let mut out = Vec::new();
        for f in &self.fits {
            if !f.exponents_non_increasing() {
                out.push(format!(
                    "n={} beta={}: local exponents {:?} are not non-increasing",
                    f.n, f.beta, f.local_exponents
                ));
            }
            if !f.within_ceiling() {
                out.push(format!(
                    "n={} beta={}: q_min growth exceeds the ceiling",
                    f.n, f.beta
                ));
            }
        }
        out
    }
}

impl fmt::Display for ScalingOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>5} {:>6} {:>9} {:>6} {:>12} {:>9}",
            "n", "beta", "eps", "q_min", "tail", "time_s"
        )?;
        for r in &self.records {
            writeln!(
                f,
                "{:>5} {:>6} {:>9.1e} {:>6} {:>12.3e} {:>9.3}",
                r.n, r.beta, r.epsilon, r.q_min, r.max_tail_weight, r.wall_time_s
            )?;
        }
        for d in &self.dropped {
            writeln!(f, "dropped: {d}")?;
        }
        for fit in &self.fits {
            writeln!(f, "n={} beta={}", fit.n, fit.beta)?;
            if let Some(s) = &fit.sqrt_fit {
                write!(f, "{s}")?;
            }
            if let Some(p) = &fit.power_fit {
                write!(f, "{p}")?;
            }
            let e: Vec<String> = fit.local_exponents.iter().map(|x| format!("{x:.4}")).collect();
            writeln!(f, "local exponents: [{}]", e.join(", "))?;
        }
        Ok(())
    }
}

/// Checks that `q_min` never grows as `eps` grows within one `(n, beta)` group.
pub fn check_q_min_monotone(records: &[ScalingRecord]) -> Result<()> {
    for a in records {
        for b in records {
            if a.n == b.n && a.beta == b.beta && a.epsilon < b.epsilon && a.q_min < b.q_min {
                return Err(Error::Invariant(format!(
                    "q_min({:e}) = {} < q_min({:e}) = {} at n={} beta={}",
                    a.epsilon, a.q_min, b.epsilon, b.q_min, a.n, a.beta
                )));
            }
        }
    }
    Ok(())
}

fn scaling_fit(n: usize, beta: f64, records: &[&ScalingRecord]) -> Result<ScalingFit> {
    let mut sorted: Vec<&ScalingRecord> = records.to_vec();
    sorted.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    let power_pts: Vec<(f64, f64)> = sorted
        .iter()
        .map(|r| ((1.0 / r.epsilon).ln(), (r.q_min as f64).ln()))
        .collect();
    let sqrt_pts: Vec<(f64, f64)> = sorted
        .iter()
        .map(|r| ((1.0 / r.epsilon).ln().sqrt(), (r.q_min as f64).ln()))
        .collect();
    let enough = sorted.len() >= 3;
    Ok(ScalingFit {
        n,
        beta,
        sqrt_fit: if enough {
            Some(fit_loglinear(&sqrt_pts)?.with_form("logQ-vs-sqrtLogInvEps"))
        } else {
            None
        },
        power_fit: if enough {
            Some(fit_loglinear(&power_pts)?.with_form("logQ-vs-logInvEps"))
        } else {
            None
        },
        local_exponents: local_slopes(&power_pts),
        span: match (sorted.first(), sorted.last()) {
            (Some(a), Some(b)) if sorted.len() >= 2 => Some(((a.epsilon, a.q_min), (b.epsilon, b.q_min))),
            _ => None,
        },
    })
}

/// Searches the smallest sufficient bond dimension for every `(n, beta, eps)`.
pub fn run_scaling(cfg: &RunConfig) -> Result<ScalingOutcome> {
    cfg.validate()?;
    let mut records = Vec::new();
    let mut dropped = Vec::new();
    let mut fits = Vec::new();
    for &n in &cfg.n {
        let obs = pauli_window(n, cfg.window)?;
        for &beta in &cfg.beta {
            let (reference, report): (PurifiedMPS, BuildReport) =
                build_thermal_purification(&cfg.build_config(n, beta)?)?;
            let start_len = records.len();
            for &epsilon in &cfg.eps {
                let start = Instant::now();
                let q_min = match min_bond_for_reference(
                    &reference,
                    report.cumulative_discarded_weight,
                    &obs,
                    epsilon,
                ) {
                    Ok(q) => q,
                    Err(Error::Unreachable { floor, .. }) => {
                        dropped.push(format!(
                            "n={n} beta={beta} eps={epsilon:e}: reference floor {floor:.3e}"
                        ));
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let (_, tail) = reference.truncate_uniform(q_min)?;
                records.push(ScalingRecord {
                    n,
                    beta,
                    epsilon,
                    q_min,
                    max_tail_weight: tail,
                    wall_time_s: start.elapsed().as_secs_f64(),
                    dt: cfg.dt,
                    cumulative_discarded_weight: report.cumulative_discarded_weight,
                });
            }
            let group: Vec<&ScalingRecord> = records[start_len..].iter().collect();
            fits.push(scaling_fit(n, beta, &group)?);
        }
    }
    check_q_min_monotone(&records)?;
    Ok(ScalingOutcome {
        records,
        fits,
        dropped,
    })
}
