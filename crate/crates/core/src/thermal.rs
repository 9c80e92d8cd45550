//! Imaginary-time evolution of the infinite-temperature purification down to
//! inverse temperature `beta`, plus the two drivers built on it: step-size
//! refinement and the search for the smallest bond dimension meeting an
//! accuracy target.

use crate::error::{Error, Result};
use crate::model::{gate_layer, BondParity, ChainModel, GateLayer};
use crate::mps::PurifiedMPS;
use crate::observable::LocalObservable;

/// Imaginary-time step used when none is given.
pub const DEFAULT_DT: f64 = 0.05;
/// Per-gate relative discarded-weight cutoff used when none is given.
pub const DEFAULT_CUTOFF: f64 = 1e-20;
/// Bond cap treated as unbounded.
pub const UNBOUNDED_CHI: usize = usize::MAX;
/// Halvings [`converge_dt`] attempts before giving up.
pub const MAX_HALVINGS: usize = 8;

#[derive(Clone, Debug)]
pub struct BuildConfig {
    pub beta: f64,
    pub dt: f64,
    pub chi_max: usize,
    pub cutoff: f64,
    pub model: ChainModel,
}

impl BuildConfig {
    pub fn new(model: ChainModel, beta: f64) -> Self {
        BuildConfig {
            beta,
            dt: DEFAULT_DT,
            chi_max: UNBOUNDED_CHI,
            cutoff: DEFAULT_CUTOFF,
            model,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_chi_max(mut self, chi_max: usize) -> Self {
        self.chi_max = chi_max;
        self
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "beta must be >= 0, got {}",
                self.beta
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.chi_max < 1 {
            return Err(Error::InvalidArgument("chi_max must be at least 1".into()));
        }
        if !(self.cutoff >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cutoff must be >= 0, got {}",
                self.cutoff
            )));
        }
        Ok(())
    }

    /// Trotter step sizes covering `beta / 2`: whole steps of `dt`, then one
    /// shorter step for any remainder.
    pub fn schedule(&self) -> Vec<f64> {
        let tau = self.beta / 2.0;
        let ratio = tau / self.dt;
        let mut whole = ratio.floor();
        if ratio - whole > 1.0 - 1e-12 {
            whole += 1.0;
        }
        let mut steps = vec![self.dt; whole as usize];
        let rest = tau - whole * self.dt;
        if rest > 1e-12 * self.dt {
            steps.push(rest);
        }
        steps
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BuildReport {
    pub log_z: f64,
    pub cumulative_discarded_weight: f64,
    pub max_bond_reached: usize,
    pub step_count: usize,
}

/// Layers for a list of step sizes with adjacent odd half-layers merged:
/// `odd(h1/2) even(h1) odd((h1+h2)/2) even(h2) ... odd(hk/2)`.
fn merged_layers(model: &ChainModel, steps: &[f64]) -> Result<Vec<GateLayer>> {
    let mut cache: Vec<(BondParity, f64, GateLayer)> = Vec::new();
    let mut layer = |parity: BondParity, dt: f64| -> Result<GateLayer> {
        if let Some((_, _, l)) = cache.iter().find(|(p, t, _)| *p == parity && *t == dt) {
            return Ok(l.clone());
        }
        let l = gate_layer(model, parity, dt)?;
        cache.push((parity, dt, l.clone()));
        Ok(l)
    };
    let mut out = Vec::new();
    for (k, &h) in steps.iter().enumerate() {
        let odd = if k == 0 { h / 2.0 } else { (steps[k - 1] + h) / 2.0 };
        out.push(layer(BondParity::Odd, odd)?);
        out.push(layer(BondParity::Even, h)?);
    }
    if let Some(&last) = steps.last() {
        out.push(layer(BondParity::Odd, last / 2.0)?);
    }
    Ok(out)
}

/// Evolves the infinite-temperature purification to `beta`.
///
/// The returned state is normalized with its orthogonality center set; the
/// norm stripped along the way is kept in its log-norm, from which
/// `ln Z = 2 log_norm + n ln d`.
pub fn build_thermal_purification(cfg: &BuildConfig) -> Result<(PurifiedMPS, BuildReport)> {
    cfg.validate()?;
    let model = &cfg.model;
    let (n, d) = (model.n(), model.d());
    let mut state = PurifiedMPS::product_purification(n, d)?;
    let steps = cfg.schedule();
    let mut discarded = 0.0;
    let mut max_bond = 1;
    for layer in merged_layers(model, &steps)? {
        // Sweep away from the current center so each gate costs one QR at most.
        let forward = state.ortho_center().is_none_or(|c| 2 * c < n);
        let gates: Box<dyn Iterator<Item = _>> = if forward {
            Box::new(layer.gates.iter())
        } else {
            Box::new(layer.gates.iter().rev())
        };
        for gate in gates {
            discarded += state.apply_gate_in_place(&gate.matrix, gate.bond, cfg.chi_max, cfg.cutoff)?;
        }
        max_bond = max_bond.max(state.max_bond());
    }
    if state.ortho_center().is_none() {
        state.canonicalize_in_place(0)?;
    }
    let log_z = 2.0 * state.log_norm() + n as f64 * (d as f64).ln();
    Ok((
        state,
        BuildReport {
            log_z,
            cumulative_discarded_weight: discarded,
            max_bond_reached: max_bond,
            step_count: steps.len(),
        },
    ))
}

/// Outcome of [`converge_dt`].
#[derive(Clone, Debug)]
pub struct Converged {
    pub state: PurifiedMPS,
    pub report: BuildReport,
    pub dt: f64,
    /// Max observable change between successive step sizes, coarsest first.
    pub changes: Vec<f64>,
}

fn max_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Halves `dt` until observables move by at most `tol` between successive
/// step sizes and returns the finer build.
pub fn converge_dt(cfg: &BuildConfig, observables: &[LocalObservable], tol: f64) -> Result<Converged> {
    converge_dt_capped(cfg, observables, tol, MAX_HALVINGS)
}

pub fn converge_dt_capped(
    cfg: &BuildConfig,
    observables: &[LocalObservable],
    tol: f64,
    max_halvings: usize,
) -> Result<Converged> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be > 0, got {tol}")));
    }
    let mut cfg = cfg.clone();
    let (coarse, _) = build_thermal_purification(&cfg)?;
    let mut values = coarse.expectations(observables)?;
    let mut changes = Vec::new();
    for _ in 0..max_halvings {
        cfg.dt /= 2.0;
        let (state, report) = build_thermal_purification(&cfg)?;
        let finer_values = state.expectations(observables)?;
        let change = max_change(&values, &finer_values);
        changes.push(change);
        if change <= tol {
            return Ok(Converged {
                state,
                report,
                dt: cfg.dt,
                changes,
            });
        }
        values = finer_values;
    }
    Err(Error::DtNotConverged {
        halvings: max_halvings,
        last_change: changes.last().copied().unwrap_or(f64::NAN),
    })
}

/// Max error over `observables` of the uniform truncation of `reference` to
/// bond `q`, measured against `reference_values`.
pub fn truncation_error(
    reference: &PurifiedMPS,
    reference_values: &[f64],
    observables: &[LocalObservable],
    q: usize,
) -> Result<(f64, f64)> {
    let (truncated, tail) = reference.truncate_uniform(q)?;
    let values = truncated.expectations(observables)?;
    Ok((max_change(reference_values, &values), tail))
}

/// Smallest `q` whose uniform truncation of `reference` reproduces every
/// observable to within `epsilon`, by bisection on `[1, reference max bond]`.
///
/// `reference_discarded` is the weight the reference itself dropped while
/// being built; targets below its square root cannot be trusted.
pub fn min_bond_for_reference(
    reference: &PurifiedMPS,
    reference_discarded: f64,
    observables: &[LocalObservable],
    epsilon: f64,
) -> Result<usize> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    let floor = reference_discarded.max(0.0).sqrt();
    if epsilon < floor {
        return Err(Error::Unreachable { epsilon, floor });
    }
    let reference_values = reference.expectations(observables)?;
    let err = |q: usize| truncation_error(reference, &reference_values, observables, q).map(|e| e.0);
    let mut hi = reference.max_bond();
    let top = err(hi)?;
    if top > epsilon {
        return Err(Error::Unreachable {
            epsilon,
            floor: top.max(floor),
        });
    }
    let mut lo = 1;
    if err(lo)? <= epsilon {
        return Ok(1);
    }
    // err(lo) > epsilon >= err(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if err(mid)? <= epsilon {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Builds the reference described by `cfg` and searches it for the smallest
/// sufficient bond dimension.
pub fn min_bond_for_accuracy(
    cfg: &BuildConfig,
    observables: &[LocalObservable],
    epsilon: f64,
) -> Result<usize> {
    let (reference, report) = build_thermal_purification(cfg)?;
    min_bond_for_reference(
        &reference,
        report.cumulative_discarded_weight,
        observables,
        epsilon,
    )
}
