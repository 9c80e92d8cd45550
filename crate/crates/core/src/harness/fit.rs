use std::fmt;

use crate::error::{Error, Result};

/// Ordinary least-squares line `y = slope x + intercept`.
#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    /// Which transformed quantities were fitted, e.g. `logQ-vs-sqrtLogInvDelta`.
    pub form: String,
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination in `[0, 1]`; 1 when every residual vanishes.
    pub r2: f64,
    /// `y - fitted`, one per input point.
    pub residuals: Vec<f64>,
    pub slope_stderr: f64,
}

impl FitReport {
    pub fn with_form(mut self, form: impl Into<String>) -> Self {
        self.form = form.into();
        self
    }
}

impl fmt::Display for FitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[fit]")?;
        writeln!(f, "form = {}", self.form)?;
        writeln!(f, "slope = {:.6e}", self.slope)?;
        writeln!(f, "slope_stderr = {:.6e}", self.slope_stderr)?;
        writeln!(f, "intercept = {:.6e}", self.intercept)?;
        writeln!(f, "r2 = {:.6}", self.r2)?;
        let res: Vec<String> = self.residuals.iter().map(|r| format!("{r:.3e}")).collect();
        writeln!(f, "residuals = [{}]", res.join(", "))
    }
}

/// Least-squares line through `(x, y)` points; callers apply any log or
/// square-root transform beforehand.
pub fn fit_loglinear(points: &[(f64, f64)]) -> Result<FitReport> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "a fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let scale = points.iter().map(|p| p.0.abs()).fold(0.0, f64::max).max(1.0);
    if sxx <= (1e-12 * scale).powi(2) * n {
        return Err(Error::InvalidArgument("x values are degenerate".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = points.iter().map(|p| p.1 - (slope * p.0 + intercept)).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let y_scale = points.iter().map(|p| p.1.abs()).fold(0.0, f64::max).max(1.0);
    let r2 = if ss_res <= (1e-14 * y_scale).powi(2) * n {
        1.0
    } else if syy == 0.0 {
        0.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    let slope_stderr = (ss_res / (n - 2.0) / sxx).sqrt();
    Ok(FitReport {
        form: "linear".into(),
        slope,
        intercept,
        r2,
        residuals,
        slope_stderr,
    })
}

/// Slopes between consecutive points: `(y[k+1] - y[k]) / (x[k+1] - x[k])`.
pub fn local_slopes(points: &[(f64, f64)]) -> Vec<f64> {
    points
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect()
}
