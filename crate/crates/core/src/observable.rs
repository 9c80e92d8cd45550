use std::fmt;

use crate::error::{Error, Result};
use crate::model::pauli;
use crate::tensor::{spectral_norm, Tensor, HERMITIAN_TOL};

/// Widest contiguous support accepted by default.
pub const DEFAULT_MAX_SUPPORT: usize = 3;

/// What to do with an observable whose operator norm exceeds 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NormPolicy {
    /// Divide by the norm and remember the factor.
    #[default]
    Rescale,
    Reject,
}

/// A product operator `O_start (x) O_start+1 (x) ...` on contiguous sites.
#[derive(Clone, Debug)]
pub struct LocalObservable {
    start: usize,
    factors: Vec<Tensor>,
    rescaled_by: f64,
    hermitian: bool,
    label: String,
}

impl LocalObservable {
    pub fn new(start: usize, factors: Vec<Tensor>, max_support: usize, policy: NormPolicy) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument(
                "observable needs at least one factor".into(),
            ));
        }
        if factors.len() > max_support {
            return Err(Error::InvalidArgument(format!(
                "support {} exceeds the maximum {max_support}",
                factors.len()
            )));
        }
        let d = factors[0].shape().first().copied().unwrap_or(0);
        for f in &factors {
            if f.shape() != [d, d] {
                return Err(Error::DimensionMismatch(format!(
                    "observable factor of shape {:?}, expected [{d}, {d}]",
                    f.shape()
                )));
            }
        }
        // The operator norm of a tensor product is the product of the norms.
        let norm = factors
            .iter()
            .map(spectral_norm)
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .product::<f64>();
        let mut rescaled_by = 1.0;
        let mut factors = factors;
        if norm > 1.0 + 1e-12 {
            match policy {
                NormPolicy::Reject => return Err(Error::ObservableNorm { norm }),
                NormPolicy::Rescale => {
                    rescaled_by = 1.0 / norm;
                    factors[0] = factors[0].scale_real(rescaled_by);
                }
            }
        }
        let hermitian = factors.iter().all(|f| f.is_hermitian(HERMITIAN_TOL));
        let label = format!("site{start}:custom{}", factors.len());
        Ok(LocalObservable {
            start,
            factors,
            rescaled_by,
            hermitian,
            label,
        })
    }

    /// Pauli string such as `"XZ"` starting at `start`.
    pub fn pauli(start: usize, letters: &str) -> Result<Self> {
        let factors = letters.chars().map(pauli).collect::<Result<Vec<_>>>()?;
        let mut obs = LocalObservable::new(start, factors, letters.len(), NormPolicy::Reject)?;
        obs.label = format!("{}@{start}", letters.to_ascii_uppercase());
        Ok(obs)
    }

    pub fn identity(start: usize, d: usize) -> Result<Self> {
        let mut obs = LocalObservable::new(start, vec![Tensor::identity(d)], 1, NormPolicy::Reject)?;
        obs.label = format!("I@{start}");
        Ok(obs)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// First site (0-based).
    pub fn start(&self) -> usize {
        self.start
    }

    /// One past the last site.
    pub fn end(&self) -> usize {
        self.start + self.factors.len()
    }

    pub fn support(&self) -> usize {
        self.factors.len()
    }

    pub fn local_dim(&self) -> usize {
        self.factors[0].shape()[0]
    }

    /// Factors after any rescaling.
    pub fn factors(&self) -> &[Tensor] {
        &self.factors
    }

    /// Factor applied at construction to bring the norm to 1 (1 if untouched).
    pub fn rescaled_by(&self) -> f64 {
        self.rescaled_by
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dense(&self) -> Tensor {
        let mut op = Tensor::identity(1);
        for f in &self.factors {
            op = op.kron(f).expect("matrix factors");
        }
        op
    }

    pub(crate) fn check_range(&self, n: usize) -> Result<()> {
        if self.end() > n {
            return Err(Error::IndexOutOfRange {
                what: "observable site",
                index: self.end() - 1,
                lo: 0,
                hi: n - 1,
            });
        }
        Ok(())
    }
}

impl fmt::Display for LocalObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Sites `[lo, hi)` of a window of `width` sites centered on a chain of `n`.
pub fn centered_window(n: usize, width: usize) -> (usize, usize) {
    let width = width.min(n);
    let lo = (n - width) / 2;
    (lo, lo + width)
}

/// Every non-identity single-site Pauli and every nearest-neighbour
/// two-site Pauli string inside the centered window (qubit chains only).
pub fn pauli_window(n: usize, width: usize) -> Result<Vec<LocalObservable>> {
    let (lo, hi) = centered_window(n, width);
    let letters = ['X', 'Y', 'Z'];
    let mut out = Vec::new();
    for site in lo..hi {
        for a in letters {
            out.push(LocalObservable::pauli(site, &a.to_string())?);
        }
    }
    for site in lo..hi.saturating_sub(1) {
        for a in letters {
            for b in letters {
                out.push(LocalObservable::pauli(site, &format!("{a}{b}"))?);
            }
        }
    }
    Ok(out)
}
