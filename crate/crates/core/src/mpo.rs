//! Matrix product operators for the physical chain.
//!
//! Each site tensor has shape `(left, d, d, right)` with the middle axes read
//! as (ket, bra): the operator is `sum A[..,p,q,..] |p><q|` over the matrix
//! unit basis.
//!
//! An operator obtained by tracing out the auxiliary legs of a purification
//! is kept in locally purified form: site tensor `i` is
//! `W[(l,l'),p,q,(r,r')] = sum_a K[l,p,a,r] conj(K[l',q,a,r'])` for the
//! purification tensor `K`, so the bond dimension is the square of the
//! purification's. `W` is only materialized on request because at the bond
//! dimensions of interest it is far larger than `K`.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::mps::transfer_left;
use crate::observable::LocalObservable;
use crate::tensor::{Tensor, C64};

/// Largest dense reconstruction (`d^n` rows) [`ThermalMPO::to_dense`] builds.
pub const DENSE_DIM_CAP: usize = 1 << 12;

#[derive(Clone, Debug)]
enum Storage {
    Explicit(Vec<Tensor>),
    /// Purification tensors `K_i` and the scalar `1 / <K|K>` folded into site 0.
    Purified {
        kets: Vec<Tensor>,
        scale: f64,
    },
}

#[derive(Clone, Debug)]
pub struct ThermalMPO {
    d: usize,
    storage: Storage,
}

fn check_chain(d: usize, tensors: &[Tensor], what: &str) -> Result<()> {
    if tensors.is_empty() {
        return Err(Error::InvalidArgument(format!("empty {what}")));
    }
    let mut left = 1;
    for (i, t) in tensors.iter().enumerate() {
        t.require_rank(4)?;
        let s = t.shape();
        if s[0] != left || s[1] != d || s[2] != d {
            return Err(Error::DimensionMismatch(format!(
                "{what} site {i} has shape {s:?}, expected [{left}, {d}, {d}, _]"
            )));
        }
        left = s[3];
    }
    if left != 1 {
        return Err(Error::DimensionMismatch("right boundary bond must be 1".into()));
    }
    Ok(())
}

impl ThermalMPO {
    pub fn from_tensors(d: usize, tensors: Vec<Tensor>) -> Result<Self> {
        check_chain(d, &tensors, "MPO")?;
        Ok(ThermalMPO {
            d,
            storage: Storage::Explicit(tensors),
        })
    }

    /// `rho = scale * tr_aux |K><K|` for purification tensors `K`.
    pub(crate) fn from_purification(d: usize, kets: Vec<Tensor>, scale: f64) -> Result<Self> {
        check_chain(d, &kets, "purification")?;
        Ok(ThermalMPO {
            d,
            storage: Storage::Purified { kets, scale },
        })
    }

    /// `(I/d)^{(x) n}`.
    pub fn maximally_mixed(n: usize, d: usize) -> Result<Self> {
        let site = Tensor::identity(d)
            .scale_real(1.0 / d as f64)
            .reshape(&[1, d, d, 1])?;
        ThermalMPO::from_tensors(d, vec![site; n])
    }

    pub fn n(&self) -> usize {
        match &self.storage {
            Storage::Explicit(t) => t.len(),
            Storage::Purified { kets, .. } => kets.len(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        let n = self.n();
        match &self.storage {
            Storage::Explicit(t) => t[..n - 1].iter().map(|t| t.shape()[3]).collect(),
            Storage::Purified { kets, .. } => kets[..n - 1].iter().map(|t| t.shape()[3].pow(2)).collect(),
        }
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Explicit site tensor `i`, shape `(left, d, d, right)`.
    pub fn site_tensor(&self, i: usize) -> Result<Tensor> {
        let n = self.n();
        if i >= n {
            return Err(Error::IndexOutOfRange {
                what: "site",
                index: i,
                lo: 0,
                hi: n - 1,
            });
        }
        match &self.storage {
            Storage::Explicit(t) => Ok(t[i].clone()),
            Storage::Purified { kets, scale } => {
                let d = self.d;
                let t = &kets[i];
                let s = t.shape();
                let (l, r) = (s[0], s[3]);
                // (l, p, a, r) -> (l, p, r, a)
                let moved = t.permute(&[0, 1, 3, 2])?;
                let m = ArrayView2::from_shape((l * d * r, d), moved.data()).expect("permuted layout");
                let w = m.dot(&m.t().mapv(|z| z.conj()));
                let w = Tensor::from_array2(w).reshape(&[l, d, r, l, d, r])?;
                // (l, p, r, l', q, r') -> (l, l', p, q, r, r')
                let w = w.permute(&[0, 3, 1, 4, 2, 5])?.reshape(&[l * l, d, d, r * r])?;
                Ok(if i == 0 { w.scale_real(*scale) } else { w })
            }
        }
    }

    /// Same operator with every site tensor stored explicitly.
    pub fn materialize(&self) -> Result<Self> {
        let tensors = (0..self.n())
            .map(|i| self.site_tensor(i))
            .collect::<Result<Vec<_>>>()?;
        ThermalMPO::from_tensors(self.d, tensors)
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.storage, Storage::Explicit(_))
    }

    fn trace_with(&self, obs: Option<&LocalObservable>) -> C64 {
        let op_at = |site: usize| {
            obs.and_then(|o| (site >= o.start() && site < o.end()).then(|| &o.factors()[site - o.start()]))
        };
        let d = self.d;
        match &self.storage {
            Storage::Explicit(tensors) => {
                let mut env = Array1::from_elem(1, C64::new(1.0, 0.0));
                for (site, t) in tensors.iter().enumerate() {
                    let s = t.shape();
                    let (l, r) = (s[0], s[3]);
                    let w = ArrayView2::from_shape((l, d * d * r), t.data()).expect("site layout");
                    let x = env.dot(&w); // (p, q, r)
                    let mut next = Array1::from_elem(r, C64::new(0.0, 0.0));
                    for p in 0..d {
                        for q in 0..d {
                            let weight = match op_at(site) {
                                Some(o) => o.data()[q * d + p],
                                None if p == q => C64::new(1.0, 0.0),
                                None => continue,
                            };
                            let base = (p * d + q) * r;
                            for b in 0..r {
                                next[b] += x[base + b] * weight;
                            }
                        }
                    }
                    env = next;
                }
                env[0]
            }
            Storage::Purified { kets, scale } => {
                let mut env = Array2::eye(1);
                for (site, k) in kets.iter().enumerate() {
                    env = transfer_left(&env, k, op_at(site));
                }
                env[[0, 0]] * *scale
            }
        }
    }

    /// `tr(rho)`.
    pub fn trace(&self) -> f64 {
        self.trace_with(None).re
    }

    /// `tr(rho O)`.
    pub fn expectation(&self, obs: &LocalObservable) -> Result<f64> {
        obs.check_range(self.n())?;
        if obs.local_dim() != self.d {
            return Err(Error::DimensionMismatch("observable local dimension".into()));
        }
        let v = self.trace_with(Some(obs));
        if obs.is_hermitian() && v.im.abs() > crate::mps::IMAG_TOL {
            return Err(Error::ComplexExpectation(v.im));
        }
        Ok(v.re)
    }

    /// Dense `d^n x d^n` matrix.
    pub fn to_dense(&self) -> Result<Tensor> {
        let d = self.d;
        let n = self.n();
        let dim = d.checked_pow(n as u32).unwrap_or(usize::MAX);
        if dim > DENSE_DIM_CAP {
            return Err(Error::SizeCap {
                size: dim,
                cap: DENSE_DIM_CAP,
            });
        }
        if let Storage::Purified { kets, scale } = &self.storage {
            // Cheaper through the purification: rho = scale * M M^dag.
            let state = crate::mps::PurifiedMPS::from_parts(d, kets.clone(), 0.0, None)?;
            let norm_sqr = state.tensor_norm_sqr();
            let m = state.to_dense()?;
            return Ok(m.matmul(&m.dagger()?)?.scale_real(scale * norm_sqr));
        }
        let first = self.site_tensor(0)?;
        let mut acc =
            Array2::from_shape_vec((d * d, first.shape()[3]), first.into_data()).expect("site layout");
        for i in 1..n {
            let t = self.site_tensor(i)?;
            let s = t.shape().to_vec();
            let m = Array2::from_shape_vec((s[0], s[1] * s[2] * s[3]), t.into_data()).expect("site layout");
            let rows = acc.nrows();
            acc = acc
                .dot(&m)
                .into_shape_with_order((rows * d * d, s[3]))
                .expect("contiguous");
        }
        // (p1, q1, ..., pn, qn) -> (p1..pn, q1..qn)
        let flat = Tensor::from_array2(acc).reshape(&vec![d; 2 * n])?;
        let perm: Vec<usize> = (0..n).map(|k| 2 * k).chain((0..n).map(|k| 2 * k + 1)).collect();
        flat.permute(&perm)?.reshape(&[dim, dim])
    }
}
