//! Purified thermal states as matrix product states over composite
//! (physical, auxiliary) sites.
//!
//! Site `i` holds a rank-4 tensor of shape `(left, d, d, right)`: the second
//! axis is the physical spin, the third its auxiliary copy. Fusing the two
//! gives the composite dimension `d^2`. Sites are 0-based; bond/cut `b`
//! (1-based, `1..n`) separates sites `b - 1` and `b`.

use ndarray::{Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mpo::ThermalMPO;
use crate::observable::LocalObservable;
use crate::tensor::{qr, svd, truncated_svd, Tensor, C64};

/// Largest dense purification (in amplitudes) [`PurifiedMPS::to_dense`] builds.
pub const DENSE_CAP: usize = 1 << 22;

/// Imaginary-part tolerance for expectation values of Hermitian observables.
pub const IMAG_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct PurifiedMPS {
    d: usize,
    tensors: Vec<Tensor>,
    log_norm: f64,
    ortho_center: Option<usize>,
}

/// Schmidt coefficients across one cut, non-increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtSpectrum {
    pub cut: usize,
    pub values: Vec<f64>,
}

impl SchmidtSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `sum_{j > q} lambda_j^2`, the weight lost by keeping `q` values.
    pub fn tail_weight(&self, q: usize) -> f64 {
        self.values.iter().skip(q).rev().map(|v| v * v).sum()
    }

    /// Tail weights for `q = 0, 1, ..., len`.
    pub fn tail_sums(&self) -> Vec<f64> {
        let mut tail = vec![0.0; self.values.len() + 1];
        for j in (0..self.values.len()).rev() {
            tail[j] = tail[j + 1] + self.values[j] * self.values[j];
        }
        tail
    }

    /// Smallest `q >= 1` whose tail weight is at most `delta`.
    pub fn min_rank_for(&self, delta: f64) -> usize {
        let tail = self.tail_sums();
        (1..tail.len())
            .find(|&q| tail[q] <= delta)
            .unwrap_or(tail.len().max(1) - 1)
            .max(1)
    }

    pub fn entropy(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v * v)
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.ln())
            .sum()
    }
}

fn dims4(t: &Tensor) -> (usize, usize, usize, usize) {
    let s = t.shape();
    (s[0], s[1], s[2], s[3])
}

/// `(left * d * d, right)` view of a site tensor.
fn as_left_matrix(t: &Tensor) -> ArrayView2<'_, C64> {
    let (l, p, a, r) = dims4(t);
    ArrayView2::from_shape((l * p * a, r), t.data()).expect("site layout")
}

/// `(left, d * d * right)` view of a site tensor.
fn as_right_matrix(t: &Tensor) -> ArrayView2<'_, C64> {
    let (l, p, a, r) = dims4(t);
    ArrayView2::from_shape((l, p * a * r), t.data()).expect("site layout")
}

fn site_from(m: Array2<C64>, l: usize, d: usize, r: usize) -> Tensor {
    Tensor::from_array2(m)
        .reshape(&[l, d, d, r])
        .expect("site reshape")
}

fn identity_env(dim: usize) -> Array2<C64> {
    Array2::eye(dim)
}

/// Applies a `d x d` operator to the physical axis of a `(rows, d, rest)` block.
fn apply_physical(x: &mut Array2<C64>, d: usize, op: &Tensor) {
    let rows = x.nrows();
    let rest = x.ncols() / d;
    let o = op.view2().expect("operator matrix");
    let mut block = x
        .view_mut()
        .into_shape_with_order((rows, d, rest))
        .expect("contiguous env");
    for mut slab in block.axis_iter_mut(Axis(0)) {
        let out = o.dot(&slab);
        slab.assign(&out);
    }
}

/// `L'[rb, rk] = sum conj(A[lb,p,a,rb]) O[p,q] A[lk,q,a,rk] L[lb,lk]`.
pub(crate) fn transfer_left(env: &Array2<C64>, a: &Tensor, op: Option<&Tensor>) -> Array2<C64> {
    let (_, d, _, _) = dims4(a);
    let mut x = env.dot(&as_right_matrix(a));
    if let Some(op) = op {
        apply_physical(&mut x, d, op);
    }
    let (l, p, aa, r) = dims4(a);
    let x = x.into_shape_with_order((l * p * aa, r)).expect("env reshape");
    as_left_matrix(a).t().mapv(|z| z.conj()).dot(&x)
}

/// `R'[lb, lk] = sum conj(A[lb,p,a,rb]) O[p,q] A[lk,q,a,rk] R[rb,rk]`.
pub(crate) fn transfer_right(env: &Array2<C64>, a: &Tensor, op: Option<&Tensor>) -> Array2<C64> {
    let (l, d, aa, r) = dims4(a);
    // y[lk, q, a, rb] = sum_rk A[lk,q,a,rk] R[rb,rk]
    let y = as_left_matrix(a).dot(&env.t());
    let mut y = y.into_shape_with_order((l, d * aa * r)).expect("env reshape");
    if let Some(op) = op {
        apply_physical(&mut y, d, op);
    }
    as_right_matrix(a).mapv(|z| z.conj()).dot(&y.t())
}

fn env_overlap(left: &Array2<C64>, right: &Array2<C64>) -> C64 {
    left.iter().zip(right.iter()).map(|(a, b)| a * b).sum()
}

impl PurifiedMPS {
    /// The exact infinite-temperature purification: every site holds the
    /// normalized maximally entangled pair `sum_j |j>|j> / sqrt(d)`.
    pub fn product_purification(n: usize, d: usize) -> Result<Self> {
        if n < 2 || d < 2 {
            return Err(Error::InvalidArgument(format!(
                "product purification needs n >= 2 and d >= 2, got n={n}, d={d}"
            )));
        }
        let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        let site = Tensor::from_fn(&[1, d, d, 1], |ix| {
            if ix[1] == ix[2] {
                amp
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Ok(PurifiedMPS {
            d,
            tensors: vec![site; n],
            log_norm: 0.0,
            ortho_center: None,
        })
    }

    /// Assembles a state from site tensors, checking shapes and bond agreement.
    pub fn from_parts(
        d: usize,
        tensors: Vec<Tensor>,
        log_norm: f64,
        ortho_center: Option<usize>,
    ) -> Result<Self> {
        let n = tensors.len();
        if n < 2 {
            return Err(Error::InvalidArgument("a state needs at least 2 sites".into()));
        }
        let mut left = 1;
        for (i, t) in tensors.iter().enumerate() {
            t.require_rank(4)?;
            let (l, p, a, _) = dims4(t);
            if l != left || p != d || a != d {
                return Err(Error::DimensionMismatch(format!(
                    "site {i} has shape {:?}, expected [{left}, {d}, {d}, _]",
                    t.shape()
                )));
            }
            left = t.shape()[3];
        }
        if left != 1 {
            return Err(Error::DimensionMismatch("right boundary bond must be 1".into()));
        }
        if let Some(c) = ortho_center {
            if c >= n {
                return Err(Error::IndexOutOfRange {
                    what: "center",
                    index: c,
                    lo: 0,
                    hi: n - 1,
                });
            }
        }
        Ok(PurifiedMPS {
            d,
            tensors,
            log_norm,
            ortho_center,
        })
    }

    /// A canonical state with uniformly random complex site tensors, for tests
    /// and benchmarks.
    pub fn random(n: usize, d: usize, max_bond: usize, seed: u64) -> Result<Self> {
        if max_bond < 1 {
            return Err(Error::InvalidArgument("max_bond must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let local = d * d;
        let bond = |cut: usize| -> usize {
            let reach = cut.min(n - cut) as u32;
            local.checked_pow(reach).unwrap_or(usize::MAX).min(max_bond)
        };
        let tensors = (0..n)
            .map(|i| {
                let l = if i == 0 { 1 } else { bond(i) };
                let r = if i + 1 == n { 1 } else { bond(i + 1) };
                Tensor::from_fn(&[l, d, d, r], |_| {
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                })
            })
            .collect();
        let mut state = PurifiedMPS::from_parts(d, tensors, 0.0, None)?;
        state.canonicalize_in_place(0)?;
        state.log_norm = 0.0;
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.tensors.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    /// Natural log of the norm factor carried outside the tensors.
    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    pub fn ortho_center(&self) -> Option<usize> {
        self.ortho_center
    }

    /// Internal bond dimensions, bond 1 first.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.n() - 1]
            .iter()
            .map(|t| t.shape()[3])
            .collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// `<psi|psi>` of the site tensors alone (excluding the log-norm factor).
    pub fn tensor_norm_sqr(&self) -> f64 {
        if let Some(c) = self.ortho_center {
            return self.tensors[c].norm().powi(2);
        }
        let mut env = identity_env(1);
        for t in &self.tensors {
            env = transfer_left(&env, t, None);
        }
        env[[0, 0]].re
    }

    fn check_cut(&self, cut: usize, what: &'static str) -> Result<()> {
        if cut < 1 || cut >= self.n() {
            return Err(Error::IndexOutOfRange {
                what,
                index: cut,
                lo: 1,
                hi: self.n() - 1,
            });
        }
        Ok(())
    }

    fn shift_center_right(&mut self, i: usize) -> Result<()> {
        let (l, d, _, _) = dims4(&self.tensors[i]);
        let (q, r) = qr(&as_left_matrix(&self.tensors[i]).to_owned())?;
        let k = q.ncols();
        self.tensors[i] = site_from(q, l, d, k);
        let next = &self.tensors[i + 1];
        let (_, _, _, rr) = dims4(next);
        let merged = r.dot(&as_right_matrix(next));
        self.tensors[i + 1] = site_from(merged, k, d, rr);
        Ok(())
    }

    fn shift_center_left(&mut self, i: usize) -> Result<()> {
        let (_, d, _, r) = dims4(&self.tensors[i]);
        let m_dag = as_right_matrix(&self.tensors[i]).t().mapv(|z| z.conj());
        let (q, rr) = qr(&m_dag)?;
        let k = q.ncols();
        let q_dag = q.t().mapv(|z| z.conj());
        self.tensors[i] = site_from(q_dag, k, d, r);
        let prev = &self.tensors[i - 1];
        let (pl, _, _, _) = dims4(prev);
        let merged = as_left_matrix(prev).dot(&rr.t().mapv(|z| z.conj()));
        self.tensors[i - 1] = site_from(merged, pl, d, k);
        Ok(())
    }

    /// Moves the orthogonality center to `center` and pulls the norm of the
    /// center tensor into the log-norm.
    pub fn canonicalize_in_place(&mut self, center: usize) -> Result<()> {
        let n = self.n();
        if center >= n {
            return Err(Error::IndexOutOfRange {
                what: "center",
                index: center,
                lo: 0,
                hi: n - 1,
            });
        }
        let (from_left, from_right) = match self.ortho_center {
            Some(c) => (c.min(center), c.max(center)),
            None => (0, n - 1),
        };
        for i in from_left..center {
            self.shift_center_right(i)?;
        }
        for i in (center + 1..=from_right).rev() {
            self.shift_center_left(i)?;
        }
        let norm = self.tensors[center].norm();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::NormCollapse(norm));
        }
        self.tensors[center] = self.tensors[center].scale_real(1.0 / norm);
        self.log_norm += norm.ln();
        self.ortho_center = Some(center);
        Ok(())
    }

    pub fn canonicalize(&self, center: usize) -> Result<Self> {
        let mut out = self.clone();
        out.canonicalize_in_place(center)?;
        Ok(out)
    }

    /// Applies a two-site gate to the physical legs on `bond` (identity on the
    /// auxiliary legs), re-splitting with at most `chi_max` singular values and
    /// relative discarded weight at most `cutoff`. Returns the discarded weight
    /// relative to the post-gate norm.
    pub fn apply_gate_in_place(
        &mut self,
        gate: &Tensor,
        bond: usize,
        chi_max: usize,
        cutoff: f64,
    ) -> Result<f64> {
        self.check_cut(bond, "bond")?;
        let d = self.d;
        if gate.shape() != [d * d, d * d] {
            return Err(Error::DimensionMismatch(format!(
                "gate of shape {:?} on a chain with d={d}",
                gate.shape()
            )));
        }
        let (i, j) = (bond - 1, bond);
        let absorb_left = self.ortho_center.is_some_and(|c| c >= j);
        self.canonicalize_in_place(if absorb_left { j } else { i })?;

        let (l, _, _, _) = dims4(&self.tensors[i]);
        let (_, _, _, r) = dims4(&self.tensors[j]);
        let theta = as_left_matrix(&self.tensors[i]).dot(&as_right_matrix(&self.tensors[j]));
        let theta = Tensor::from_array2(theta).reshape(&[l, d, d, d, d, r])?;
        // (l, p1, a1, p2, a2, r) -> (p1, p2, l, a1, a2, r)
        let moved = theta.permute(&[1, 3, 0, 2, 4, 5])?;
        let rest = moved.len() / (d * d);
        let applied = gate
            .view2()?
            .dot(&ArrayView2::from_shape((d * d, rest), moved.data()).expect("permuted layout"));
        let applied = Tensor::from_array2(applied).reshape(&[d, d, l, d, d, r])?;
        let theta = applied
            .permute(&[2, 0, 3, 1, 4, 5])?
            .reshape(&[l * d * d, d * d * r])?;

        let split = truncated_svd(&theta, chi_max, cutoff)?;
        let kept: f64 = split.s.iter().map(|x| x * x).sum();
        let norm = kept.sqrt();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::NormCollapse(norm));
        }
        self.log_norm += norm.ln();
        let k = split.rank();
        let weights: Vec<f64> = split.s.iter().map(|x| x / norm).collect();
        let mut u = split.u.to_array2()?;
        let mut v = split.vdag.to_array2()?;
        if absorb_left {
            for (mut col, &w) in u.axis_iter_mut(Axis(1)).zip(&weights) {
                col.mapv_inplace(|z| z * w);
            }
            self.ortho_center = Some(i);
        } else {
            for (mut row, &w) in v.axis_iter_mut(Axis(0)).zip(&weights) {
                row.mapv_inplace(|z| z * w);
            }
            self.ortho_center = Some(j);
        }
        self.tensors[i] = site_from(u, l, d, k);
        self.tensors[j] = site_from(v, k, d, r);
        Ok(split.discarded_weight / (kept + split.discarded_weight))
    }

    pub fn apply_gate(&self, gate: &Tensor, bond: usize, chi_max: usize, cutoff: f64) -> Result<(Self, f64)> {
        let mut out = self.clone();
        let w = out.apply_gate_in_place(gate, bond, chi_max, cutoff)?;
        Ok((out, w))
    }

    /// Schmidt coefficients of the normalized state across cut `cut | cut+1`.
    pub fn schmidt_spectrum(&self, cut: usize) -> Result<SchmidtSpectrum> {
        self.check_cut(cut, "cut")?;
        let c = self.canonicalize(cut - 1)?;
        let center = &c.tensors[cut - 1];
        let (l, d, _, r) = dims4(center);
        let m = center.clone().reshape(&[l * d * d, r])?;
        let mut values = svd(&m)?.s;
        let total: f64 = values.iter().map(|x| x * x).sum::<f64>().sqrt();
        for v in &mut values {
            *v /= total;
        }
        Ok(SchmidtSpectrum { cut, values })
    }

    /// Truncates every bond to at most `q` in one left-to-right sweep and
    /// renormalizes. Returns the discarded weight at each cut, measured on the
    /// normalized state just before that cut was truncated.
    pub fn truncate_uniform_with_weights(&self, q: usize) -> Result<(Self, Vec<f64>)> {
        if q < 1 {
            return Err(Error::InvalidArgument("q must be at least 1".into()));
        }
        let mut s = self.canonicalize(0)?;
        let d = s.d;
        let mut weights = Vec::with_capacity(s.n() - 1);
        for cut in 1..s.n() {
            let i = cut - 1;
            let (l, _, _, r) = dims4(&s.tensors[i]);
            let m = s.tensors[i].clone().reshape(&[l * d * d, r])?;
            let split = truncated_svd(&m, q, 0.0)?;
            let kept: f64 = split.s.iter().map(|x| x * x).sum();
            let total = kept + split.discarded_weight;
            weights.push(split.discarded_weight / total);
            let norm = kept.sqrt();
            let k = split.rank();
            let mut v = split.vdag.to_array2()?;
            for (mut row, &sv) in v.axis_iter_mut(Axis(0)).zip(&split.s) {
                row.mapv_inplace(|z| z * (sv / norm));
            }
            s.tensors[i] = site_from(split.u.to_array2()?, l, d, k);
            let next = &s.tensors[i + 1];
            let (_, _, _, rr) = dims4(next);
            let merged = v.dot(&as_right_matrix(next));
            s.tensors[i + 1] = site_from(merged, k, d, rr);
            s.ortho_center = Some(cut);
        }
        let last = s.n() - 1;
        let norm = s.tensors[last].norm();
        s.tensors[last] = s.tensors[last].scale_real(1.0 / norm);
        Ok((s, weights))
    }

    /// Uniform bond truncation; the second value is the largest per-cut tail weight.
    pub fn truncate_uniform(&self, q: usize) -> Result<(Self, f64)> {
        let (s, w) = self.truncate_uniform_with_weights(q)?;
        Ok((s, w.into_iter().fold(0.0, f64::max)))
    }

    fn expectation_complex(&self, obs: &LocalObservable) -> Result<C64> {
        obs.check_range(self.n())?;
        if obs.local_dim() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "observable on d={} applied to d={}",
                obs.local_dim(),
                self.d
            )));
        }
        let (lo, hi) = match self.ortho_center {
            Some(c) => (obs.start().min(c), obs.end().max(c + 1)),
            None => (0, self.n()),
        };
        let left_dim = self.tensors[lo].shape()[0];
        let right_dim = self.tensors[hi - 1].shape()[3];
        let mut num = identity_env(left_dim);
        let mut den = identity_env(left_dim);
        for site in lo..hi {
            let t = &self.tensors[site];
            let op = (site >= obs.start() && site < obs.end()).then(|| &obs.factors()[site - obs.start()]);
            num = transfer_left(&num, t, op);
            den = transfer_left(&den, t, None);
        }
        let close = identity_env(right_dim);
        Ok(env_overlap(&num, &close) / env_overlap(&den, &close))
    }

    /// `<Psi| O (x) I_aux |Psi> / <Psi|Psi>`.
    pub fn expectation(&self, obs: &LocalObservable) -> Result<f64> {
        let v = self.expectation_complex(obs)?;
        check_real(v, obs)
    }

    /// Expectation values of many observables sharing one set of environments.
    pub fn expectations(&self, obs: &[LocalObservable]) -> Result<Vec<f64>> {
        if obs.is_empty() {
            return Ok(vec![]);
        }
        for o in obs {
            o.check_range(self.n())?;
            if o.local_dim() != self.d {
                return Err(Error::DimensionMismatch("observable local dimension".into()));
            }
        }
        let lo = obs.iter().map(|o| o.start()).min().unwrap();
        let hi = obs.iter().map(|o| o.end()).max().unwrap();
        let s = self.canonicalize(lo)?;
        let mut lefts = vec![identity_env(s.tensors[lo].shape()[0])];
        for site in lo..hi {
            let next = transfer_left(lefts.last().unwrap(), &s.tensors[site], None);
            lefts.push(next);
        }
        let mut rights = vec![identity_env(s.tensors[hi - 1].shape()[3])];
        for site in (lo..hi).rev() {
            let next = transfer_right(rights.last().unwrap(), &s.tensors[site], None);
            rights.push(next);
        }
        rights.reverse(); // rights[k] closes sites lo + k ..
        let norm = env_overlap(&lefts[hi - lo], &rights[hi - lo]);
        obs.iter()
            .map(|o| {
                let mut env = lefts[o.start() - lo].clone();
                for (k, f) in o.factors().iter().enumerate() {
                    env = transfer_left(&env, &s.tensors[o.start() + k], Some(f));
                }
                check_real(env_overlap(&env, &rights[o.end() - lo]) / norm, o)
            })
            .collect()
    }

    /// Traces out the auxiliary legs: `rho = tr_aux |Psi><Psi| / <Psi|Psi>`.
    /// Bond dimensions square.
    pub fn trace_out_auxiliary(&self) -> Result<ThermalMPO> {
        ThermalMPO::from_purification(self.d, self.tensors.clone(), 1.0 / self.tensor_norm_sqr())
    }

    /// Dense `d^n x d^n` matrix `M[p, a]` with `|Psi> = sum M[p,a] |p>|a>`,
    /// normalized to unit Frobenius norm.
    pub fn to_dense(&self) -> Result<Tensor> {
        let d = self.d;
        let n = self.n();
        let size = (d * d).checked_pow(n as u32).unwrap_or(usize::MAX);
        if size > DENSE_CAP {
            return Err(Error::SizeCap { size, cap: DENSE_CAP });
        }
        let mut acc = as_left_matrix(&self.tensors[0]).to_owned();
        for t in &self.tensors[1..] {
            let rows = acc.nrows();
            let m = acc.dot(&as_right_matrix(t));
            acc = m
                .into_shape_with_order((rows * d * d, t.shape()[3]))
                .expect("contiguous");
        }
        // (p1, a1, ..., pn, an) -> (p1..pn, a1..an)
        let flat = Tensor::from_array2(acc).reshape(&vec![d; 2 * n])?;
        let perm: Vec<usize> = (0..n).map(|k| 2 * k).chain((0..n).map(|k| 2 * k + 1)).collect();
        let dim = d.pow(n as u32);
        let m = flat.permute(&perm)?.reshape(&[dim, dim])?;
        let norm = m.norm();
        Ok(m.scale_real(1.0 / norm))
    }

    /// Resets the log-norm (tensors untouched).
    pub fn with_log_norm(mut self, v: f64) -> Self {
        self.log_norm = v;
        self
    }

    /// Largest entry of `A^dag A - I` for site `site` read as a left isometry.
    pub fn left_isometry_error(&self, site: usize) -> f64 {
        let m = as_left_matrix(&self.tensors[site]);
        let g = m.t().mapv(|z| z.conj()).dot(&m);
        (&g - &Array2::<C64>::eye(g.nrows()))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `A A^dag - I` for site `site` read as a right isometry.
    pub fn right_isometry_error(&self, site: usize) -> f64 {
        let m = as_right_matrix(&self.tensors[site]);
        let g = m.dot(&m.t().mapv(|z| z.conj()));
        (&g - &Array2::<C64>::eye(g.nrows()))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

fn check_real(v: C64, obs: &LocalObservable) -> Result<f64> {
    if obs.is_hermitian() && v.im.abs() > IMAG_TOL {
        return Err(Error::ComplexExpectation(v.im));
    }
    Ok(v.re)
}
