use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{build_model, ChainModel, ModelFamily, Params};
use crate::thermal::{BuildConfig, DEFAULT_CUTOFF, DEFAULT_DT, UNBOUNDED_CHI};

/// Experiment configuration, read from a flat TOML file and/or CLI flags.
///
/// ```toml
/// model = "tfim"        # tfim | heisenberg | random-nn
/// g = 1.05              # model parameters: g, j, delta, h, d
/// N = [16, 32, 64]
/// beta = [1.0]
/// eps = [1e-2, 1e-3, 1e-4]
/// q = [32]
/// window = 8
/// dt = 0.05
/// tol = 1e-6            # dt refinement tolerance (verify)
/// chi_max = 256         # omit for unbounded
/// cutoff = 1e-20
/// seed = 7
/// out = "results.csv"
/// report = "fits.txt"
/// ```
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub model: String,
    pub g: Option<f64>,
    pub j: Option<f64>,
    pub delta: Option<f64>,
    pub h: Option<f64>,
    pub d: Option<f64>,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    pub beta: Vec<f64>,
    pub eps: Vec<f64>,
    pub q: Vec<usize>,
    /// Target tail weights for the Schmidt tail study, strictly decreasing.
    pub delta_grid: Vec<f64>,
    pub window: usize,
    pub dt: f64,
    pub tol: f64,
    pub chi_max: Option<usize>,
    pub cutoff: f64,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// Decades `1e-2, 1e-3, ..., 1e-10`.
pub fn default_delta_grid() -> Vec<f64> {
    (2..=10).map(|k| 10f64.powi(-k)).collect()
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            model: "tfim".into(),
            g: Some(1.05),
            j: None,
            delta: None,
            h: None,
            d: None,
            n: vec![8],
            beta: vec![1.0],
            eps: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            q: vec![2, 4, 8, 16],
            delta_grid: default_delta_grid(),
            window: 8,
            dt: DEFAULT_DT,
            tol: 1e-6,
            chi_max: None,
            cutoff: DEFAULT_CUTOFF,
            seed: None,
            out: None,
            report: None,
        }
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        RunConfig::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.family()?;
        if self.n.is_empty() || self.beta.is_empty() || self.eps.is_empty() || self.q.is_empty() {
            return bad("N, beta, eps and q lists must be non-empty".into());
        }
        if self.n.iter().any(|&n| n < 2) {
            return bad("every N must be at least 2".into());
        }
        if self.beta.iter().any(|&b| !(b >= 0.0) || !b.is_finite()) {
            return bad("betas must be finite and >= 0".into());
        }
        if self.eps.iter().any(|&e| !(e > 0.0)) || !strictly_decreasing(&self.eps) {
            return bad("eps must be positive and strictly decreasing (no duplicates)".into());
        }
        if self.delta_grid.len() < 3
            || self.delta_grid.iter().any(|&e| !(e > 0.0 && e < 1.0))
            || !strictly_decreasing(&self.delta_grid)
        {
            return bad("delta_grid needs >= 3 strictly decreasing values in (0, 1)".into());
        }
        if self.q.contains(&0) {
            return bad("q values must be at least 1".into());
        }
        if self.window == 0 {
            return bad("window must be at least 1".into());
        }
        if !(self.dt > 0.0) || !(self.tol > 0.0) || !(self.cutoff >= 0.0) {
            return bad("dt and tol must be > 0 and cutoff >= 0".into());
        }
        if self.chi_max == Some(0) {
            return bad("chi_max must be at least 1".into());
        }
        Ok(())
    }

    pub fn family(&self) -> Result<ModelFamily> {
        self.model.parse()
    }

    pub fn params(&self) -> Params {
        let mut p = Params::new();
        for (key, value) in [
            ("g", self.g),
            ("j", self.j),
            ("delta", self.delta),
            ("h", self.h),
            ("d", self.d),
        ] {
            if let Some(v) = value {
                p.insert(key.to_string(), v);
            }
        }
        p
    }

    pub fn chain(&self, n: usize) -> Result<ChainModel> {
        build_model(self.family()?, n, &self.params(), self.seed)
    }

    pub fn build_config(&self, n: usize, beta: f64) -> Result<BuildConfig> {
        Ok(BuildConfig::new(self.chain(n)?, beta)
            .with_dt(self.dt)
            .with_chi_max(self.chi_max.unwrap_or(UNBOUNDED_CHI))
            .with_cutoff(self.cutoff))
    }

    /// One-line description used for hashing and CSV headers.
    pub fn describe(&self) -> String {
        let params: Vec<String> = self.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!(
            "model={} {} N={:?} beta={:?} eps={:?} q={:?} window={} dt={} tol={} chi_max={} cutoff={} seed={}",
            self.model,
            params.join(" "),
            self.n,
            self.beta,
            self.eps,
            self.q,
            self.window,
            self.dt,
            self.tol,
            self.chi_max.map_or("unbounded".to_string(), |c| c.to_string()),
            self.cutoff,
            self.seed.map_or("none".to_string(), |s| s.to_string()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_toml() {
        let cfg = RunConfig::from_toml_str(
            "model = \"heisenberg\"\nN = [4, 6]\nbeta = [0.5, 1.0]\neps = [1e-2, 1e-4]\nchi_max = 64\ndelta = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.n, vec![4, 6]);
        assert_eq!(cfg.chi_max, Some(64));
        assert_eq!(cfg.params().get("delta"), Some(&0.5));
        assert_eq!(cfg.window, 8);
        assert!(cfg.chain(4).is_ok());
    }

    #[test]
    fn rejects_invalid_lists() {
        assert!(RunConfig::from_toml_str("eps = [1e-2, 1e-2]").is_err());
        assert!(RunConfig::from_toml_str("eps = [1e-3, 1e-2]").is_err());
        assert!(RunConfig::from_toml_str("beta = []").is_err());
        assert!(RunConfig::from_toml_str("beta = [-1.0]").is_err());
        assert!(RunConfig::from_toml_str("model = \"potts\"").is_err());
        assert!(RunConfig::from_toml_str("unknown_key = 3").is_err());
    }

    #[test]
    fn describe_is_stable() {
        let a = RunConfig::default();
        assert_eq!(a.describe(), RunConfig::default().describe());
        assert!(a.describe().contains("model=tfim g=1.05"));
    }
}
