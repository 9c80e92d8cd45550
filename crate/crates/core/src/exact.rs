//! Brute-force reference values for short chains: the Hamiltonian as a dense
//! matrix, the exact thermal state and its purification, local expectation
//! values, Schmidt spectra and `ln Z`.
//!
//! Site 0 is the slowest-varying index of every dense matrix, matching the
//! Kronecker order `O_0 (x) O_1 (x) ...`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::ChainModel;
use crate::observable::LocalObservable;
use crate::tensor::{eigh, spectral_map, svd, Tensor, C64};

/// Default cap on `d^n` (4096 = twelve qubits).
pub const DEFAULT_DIM_CAP: usize = 1 << 12;

/// `I_{d^k} (x) op (x) I_{d^(n-k-2)}`: a bond operator on sites `k, k+1`.
pub fn embed_bond_operator(op: &Tensor, k: usize, n: usize, d: usize) -> Result<Tensor> {
    if k + 2 > n {
        return Err(Error::IndexOutOfRange {
            what: "bond term",
            index: k,
            lo: 0,
            hi: n.saturating_sub(2),
        });
    }
    let left = Tensor::identity(d.pow(k as u32));
    let right = Tensor::identity(d.pow((n - k - 2) as u32));
    left.kron(op)?.kron(&right)
}

/// Dense embedding of a local observable in the full chain.
pub fn embed_local(obs: &LocalObservable, n: usize, d: usize) -> Result<Tensor> {
    obs.check_range(n)?;
    let left = Tensor::identity(d.pow(obs.start() as u32));
    let right = Tensor::identity(d.pow((n - obs.end()) as u32));
    left.kron(&obs.dense())?.kron(&right)
}

/// A dense Hamiltonian together with its (lazily computed) eigendecomposition.
#[derive(Debug)]
pub struct DenseHamiltonian {
    n: usize,
    d: usize,
    matrix: Tensor,
    eig: OnceLock<(Vec<f64>, Tensor)>,
}

impl DenseHamiltonian {
    pub fn new(n: usize, d: usize, matrix: Tensor) -> Result<Self> {
        let dim = d.pow(n as u32);
        if matrix.shape() != [dim, dim] {
            return Err(Error::DimensionMismatch(format!(
                "Hamiltonian of shape {:?} for n={n}, d={d}",
                matrix.shape()
            )));
        }
        if !matrix.is_hermitian(crate::tensor::HERMITIAN_TOL) {
            return Err(Error::NotHermitian {
                deviation: matrix.hermitian_deviation()?,
            });
        }
        Ok(DenseHamiltonian {
            n,
            d,
            matrix,
            eig: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &Tensor {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.shape()[0]
    }

    /// Ascending eigenvalues and eigenvector columns.
    pub fn eigen(&self) -> Result<&(Vec<f64>, Tensor)> {
        if let Some(e) = self.eig.get() {
            return Ok(e);
        }
        let e = eigh(&self.matrix)?;
        Ok(self.eig.get_or_init(|| e))
    }
}

pub fn dense_hamiltonian(model: &ChainModel, dim_cap: usize) -> Result<DenseHamiltonian> {
    let (n, d) = (model.n(), model.d());
    let dim = d.checked_pow(n as u32).unwrap_or(usize::MAX);
    if dim > dim_cap {
        return Err(Error::SizeCap {
            size: dim,
            cap: dim_cap,
        });
    }
    let mut h = Tensor::zeros(&[dim, dim]);
    for (k, term) in model.terms().iter().enumerate() {
        h = h.add(&embed_bond_operator(term, k, n, d)?)?;
    }
    DenseHamiltonian::new(n, d, h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DenseKind {
    /// A density matrix `rho`.
    Density,
    /// A matrix `M` with `|Psi> = sum M[p, a] |p>|a>` (physical rows, auxiliary columns).
    Purification,
}

#[derive(Clone, Debug)]
pub struct DenseState {
    pub n: usize,
    pub d: usize,
    pub kind: DenseKind,
    pub matrix: Tensor,
}

impl DenseState {
    /// The density matrix, reducing a purification if necessary.
    pub fn density(&self) -> Result<Tensor> {
        match self.kind {
            DenseKind::Density => Ok(self.matrix.clone()),
            DenseKind::Purification => self.matrix.matmul(&self.matrix.dagger()?),
        }
    }

    /// Schmidt coefficients of a purification across composite cut `cut | cut+1`.
    pub fn schmidt_values(&self, cut: usize) -> Result<Vec<f64>> {
        if self.kind != DenseKind::Purification {
            return Err(Error::InvalidArgument(
                "Schmidt values need a purification".into(),
            ));
        }
        if cut < 1 || cut >= self.n {
            return Err(Error::IndexOutOfRange {
                what: "cut",
                index: cut,
                lo: 1,
                hi: self.n - 1,
            });
        }
        let left = self.d.pow(cut as u32);
        let right = self.d.pow((self.n - cut) as u32);
        let blocks = self
            .matrix
            .clone()
            .reshape(&[left, right, left, right])?
            .permute(&[0, 2, 1, 3])?
            .reshape(&[left * left, right * right])?;
        Ok(svd(&blocks)?.s)
    }
}

/// Boltzmann weights shifted by the ground energy so none overflow.
fn boltzmann(vals: &[f64], beta: f64) -> (f64, Vec<f64>) {
    let e0 = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let w = vals.iter().map(|&l| (-beta * (l - e0)).exp()).collect();
    (e0, w)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be >= 0, got {beta}")));
    }
    Ok(())
}

/// `exp(-beta H) / Z`.
pub fn thermal_density(h: &DenseHamiltonian, beta: f64) -> Result<DenseState> {
    check_beta(beta)?;
    let (vals, vecs) = h.eigen()?;
    let (e0, w) = boltzmann(vals, beta);
    let z: f64 = w.iter().sum();
    let rho = spectral_map(vals, vecs, |l| (-beta * (l - e0)).exp() / z);
    Ok(DenseState {
        n: h.n(),
        d: h.d(),
        kind: DenseKind::Density,
        matrix: rho.add(&rho.dagger()?)?.scale_real(0.5),
    })
}

/// `exp(-beta H / 2) / sqrt(Z)`, whose vectorization purifies the thermal state.
pub fn exact_purification(h: &DenseHamiltonian, beta: f64) -> Result<DenseState> {
    check_beta(beta)?;
    let (vals, vecs) = h.eigen()?;
    let (e0, w) = boltzmann(vals, beta);
    let z: f64 = w.iter().sum();
    let m = spectral_map(vals, vecs, |l| (-beta * (l - e0) / 2.0).exp() / z.sqrt());
    Ok(DenseState {
        n: h.n(),
        d: h.d(),
        kind: DenseKind::Purification,
        matrix: m,
    })
}

/// `ln tr exp(-beta H)` by log-sum-exp over the spectrum.
pub fn exact_log_z(h: &DenseHamiltonian, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let (vals, _) = h.eigen()?;
    let (e0, w) = boltzmann(vals, beta);
    Ok(-beta * e0 + w.iter().sum::<f64>().ln())
}

/// `tr(rho O)` (or `<Psi|O (x) I|Psi>` for a purification), touching only
/// matrix entries that the local operator connects.
pub fn exact_expectation(state: &DenseState, obs: &LocalObservable) -> Result<f64> {
    let (n, d) = (state.n, state.d);
    obs.check_range(n)?;
    if obs.local_dim() != d {
        return Err(Error::DimensionMismatch("observable local dimension".into()));
    }
    let rho = state.density()?;
    let dim = rho.shape()[0];
    let op = obs.dense();
    let block = op.shape()[0];
    let stride = d.pow((n - obs.end()) as u32);
    let data = rho.data();
    let mut acc = C64::new(0.0, 0.0);
    for x in 0..dim {
        let x_loc = (x / stride) % block;
        let base = x - x_loc * stride;
        for y_loc in 0..block {
            let y = base + y_loc * stride;
            acc += data[x * dim + y] * op.get(&[y_loc, x_loc]);
        }
    }
    if obs.is_hermitian() && acc.im.abs() > 1e-12 * (1.0 + acc.re.abs()) {
        return Err(Error::ComplexExpectation(acc.im));
    }
    Ok(acc.re)
}

/// Short stable hash of a configuration description.
pub fn config_hash(config: &str) -> String {
    let digest = Sha256::digest(config.as_bytes());
    digest.iter().take(8).fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// One pinned reference value.
#[derive(Clone, Debug, PartialEq)]
pub struct Fixture {
    pub config_hash: String,
    pub observable: String,
    pub value: f64,
    pub config: String,
}

impl Fixture {
    pub fn new(config: &str, observable: &str, value: f64) -> Self {
        Fixture {
            config_hash: config_hash(config),
            observable: observable.to_string(),
            value,
            config: config.to_string(),
        }
    }
}

pub const FIXTURE_HEADER: &str = "# thermal-tn fixtures v1: hash\tobservable\tvalue\tconfig";

/// Writes tab-separated fixture records under a versioned header line.
pub fn write_fixtures<W: Write>(mut out: W, fixtures: &[Fixture]) -> Result<()> {
    writeln!(out, "{FIXTURE_HEADER}")?;
    for f in fixtures {
        writeln!(
            out,
            "{}\t{}\t{:e}\t{}",
            f.config_hash, f.observable, f.value, f.config
        )?;
    }
    Ok(())
}

pub fn read_fixtures<R: BufRead>(input: R) -> Result<Vec<Fixture>> {
    let mut out = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim_end();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.splitn(4, '\t').collect();
        if fields.len() != 4 {
            return Err(Error::Format(format!(
                "fixture line {}: expected 4 fields",
                lineno + 1
            )));
        }
        let value = fields[2]
            .parse()
            .map_err(|e| Error::Format(format!("fixture line {}: {e}", lineno + 1)))?;
        let f = Fixture {
            config_hash: fields[0].to_string(),
            observable: fields[1].to_string(),
            value,
            config: fields[3].to_string(),
        };
        if config_hash(&f.config) != f.config_hash {
            return Err(Error::Format(format!(
                "fixture line {}: hash does not match config",
                lineno + 1
            )));
        }
        out.push(f);
    }
    Ok(out)
}
