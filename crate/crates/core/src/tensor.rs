//! Dense complex tensors and the handful of factorizations the rest of the
//! crate is built on.
//!
//! A [`Tensor`] stores its entries in row-major order: the last axis varies
//! fastest. This layout is part of the serialized state format, so it must
//! not change.

use ndarray::{Array2, ArrayView2, ShapeBuilder};
use ndarray_linalg::{Eigh, JobSvd, QR, SVD, SVDDC, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative Hermiticity tolerance accepted by [`hermitian_expm`] and [`eigh`].
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "tensor dimensions must be positive, got {shape:?}"
            )));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::ShapeData {
                shape,
                expected,
                got: data.len(),
            });
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![C64::new(0.0, 0.0); len],
        }
    }

    pub fn scalar(value: C64) -> Self {
        Tensor {
            shape: vec![],
            data: vec![value],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Tensor::zeros(&[n, n]);
        for i in 0..n {
            t.data[i * n + i] = C64::new(1.0, 0.0);
        }
        t
    }

    /// Builds a matrix from real row-major entries.
    pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Tensor::new(
            vec![rows, cols],
            entries.iter().map(|&x| C64::new(x, 0.0)).collect(),
        )
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let mut t = Tensor::zeros(shape);
        let mut idx = vec![0usize; shape.len()];
        for slot in t.data.iter_mut() {
            *slot = f(&idx);
            for ax in (0..shape.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < shape[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        t
    }

    pub fn from_array2(a: Array2<C64>) -> Self {
        let shape = vec![a.nrows(), a.ncols()];
        let data = if a.is_standard_layout() {
            a.into_raw_vec_and_offset().0
        } else {
            a.iter().copied().collect()
        };
        Tensor { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.shape.len());
        index.iter().zip(&self.shape).fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn get(&self, index: &[usize]) -> C64 {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: C64) {
        let off = self.offset(index);
        self.data[off] = value;
    }

    pub fn reshape(self, shape: &[usize]) -> Result<Self> {
        Tensor::new(shape.to_vec(), self.data)
    }

    /// Reorders axes so that axis `k` of the result is axis `perm[k]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let rank = self.rank();
        if perm.len() != rank {
            return Err(Error::DimensionMismatch(format!(
                "permutation of length {} for rank {rank}",
                perm.len()
            )));
        }
        let mut seen = vec![false; rank];
        for &p in perm {
            if p >= rank {
                return Err(Error::AxisOutOfRange { axis: p, rank });
            }
            if seen[p] {
                return Err(Error::RepeatedAxis(p));
            }
            seen[p] = true;
        }
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(self.clone());
        }
        let src_strides = strides(&self.shape);
        let new_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let steps: Vec<usize> = perm.iter().map(|&p| src_strides[p]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; rank];
        let mut src = 0usize;
        for _ in 0..self.data.len() {
            data.push(self.data[src]);
            for ax in (0..rank).rev() {
                idx[ax] += 1;
                src += steps[ax];
                if idx[ax] < new_shape[ax] {
                    break;
                }
                src -= steps[ax] * new_shape[ax];
                idx[ax] = 0;
            }
        }
        Ok(Tensor {
            shape: new_shape,
            data,
        })
    }

    pub fn conj(&self) -> Self {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn add(&self, other: &Tensor) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Tensor, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(Tensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Tensor) -> Result<f64> {
        Ok(self.sub(other)?.data.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub fn view2(&self) -> Result<ArrayView2<'_, C64>> {
        self.require_rank(2)?;
        Ok(ArrayView2::from_shape((self.shape[0], self.shape[1]), &self.data)
            .expect("row-major data matches shape"))
    }

    pub fn to_array2(&self) -> Result<Array2<C64>> {
        Ok(self.view2()?.to_owned())
    }

    pub fn require_rank(&self, rank: usize) -> Result<()> {
        if self.rank() != rank {
            return Err(Error::Rank {
                expected: rank,
                got: self.rank(),
            });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Tensor) -> Result<Self> {
        let a = self.view2()?;
        let b = other.view2()?;
        if a.ncols() != b.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "matmul {:?} x {:?}",
                self.shape, other.shape
            )));
        }
        Ok(Tensor::from_array2(a.dot(&b)))
    }

    /// Conjugate transpose of a matrix.
    pub fn dagger(&self) -> Result<Self> {
        self.require_rank(2)?;
        Ok(self.permute(&[1, 0])?.conj())
    }

    pub fn trace(&self) -> Result<C64> {
        self.require_rank(2)?;
        let n = self.shape[0].min(self.shape[1]);
        Ok((0..n).map(|i| self.data[i * self.shape[1] + i]).sum())
    }

    /// Kronecker product of two matrices, `self` on the slow index.
    pub fn kron(&self, other: &Tensor) -> Result<Self> {
        self.require_rank(2)?;
        other.require_rank(2)?;
        let (r1, c1) = (self.shape[0], self.shape[1]);
        let (r2, c2) = (other.shape[0], other.shape[1]);
        Ok(Tensor::from_fn(&[r1 * r2, c1 * c2], |ix| {
            let (i, j) = (ix[0], ix[1]);
            self.data[(i / r2) * c1 + j / c2] * other.data[(i % r2) * c2 + j % c2]
        }))
    }

    /// Frobenius distance to the conjugate transpose.
    pub fn hermitian_deviation(&self) -> Result<f64> {
        self.require_rank(2)?;
        if self.shape[0] != self.shape[1] {
            return Err(Error::DimensionMismatch(format!(
                "square matrix required, got {:?}",
                self.shape
            )));
        }
        Ok(self.sub(&self.dagger()?)?.norm())
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        match self.hermitian_deviation() {
            Ok(dev) => dev <= rel_tol * self.norm(),
            Err(_) => false,
        }
    }
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

/// Contracts `a` with `b` over the listed axis pairs. The result carries the
/// free axes of `a` in order, then the free axes of `b`.
pub fn contract(a: &Tensor, b: &Tensor, pairs: &[(usize, usize)]) -> Result<Tensor> {
    let mut used_a = vec![false; a.rank()];
    let mut used_b = vec![false; b.rank()];
    for &(ia, ib) in pairs {
        if ia >= a.rank() {
            return Err(Error::AxisOutOfRange {
                axis: ia,
                rank: a.rank(),
            });
        }
        if ib >= b.rank() {
            return Err(Error::AxisOutOfRange {
                axis: ib,
                rank: b.rank(),
            });
        }
        if used_a[ia] {
            return Err(Error::RepeatedAxis(ia));
        }
        if used_b[ib] {
            return Err(Error::RepeatedAxis(ib));
        }
        if a.shape[ia] != b.shape[ib] {
            return Err(Error::DimensionMismatch(format!(
                "axis {ia} of a has {} entries, axis {ib} of b has {}",
                a.shape[ia], b.shape[ib]
            )));
        }
        used_a[ia] = true;
        used_b[ib] = true;
    }
    let free_a: Vec<usize> = (0..a.rank()).filter(|&k| !used_a[k]).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|&k| !used_b[k]).collect();

    let perm_a: Vec<usize> = free_a.iter().copied().chain(pairs.iter().map(|p| p.0)).collect();
    let perm_b: Vec<usize> = pairs.iter().map(|p| p.1).chain(free_b.iter().copied()).collect();
    let rows: usize = free_a.iter().map(|&k| a.shape[k]).product();
    let inner: usize = pairs.iter().map(|p| a.shape[p.0]).product();
    let cols: usize = free_b.iter().map(|&k| b.shape[k]).product();

    let pa = a.permute(&perm_a)?;
    let pb = b.permute(&perm_b)?;
    let ma = ArrayView2::from_shape((rows, inner), &pa.data).expect("permuted layout");
    let mb = ArrayView2::from_shape((inner, cols), &pb.data).expect("permuted layout");
    let prod = ma.dot(&mb);

    let shape: Vec<usize> = free_a
        .iter()
        .map(|&k| a.shape[k])
        .chain(free_b.iter().map(|&k| b.shape[k]))
        .collect();
    let data = prod.into_raw_vec_and_offset().0;
    Ok(Tensor { shape, data })
}

#[derive(Clone, Debug)]
pub struct SvdResult {
    /// Isometry with orthonormal columns, shape `(rows, k)`.
    pub u: Tensor,
    /// Singular values, non-increasing.
    pub s: Vec<f64>,
    /// Co-isometry with orthonormal rows, shape `(k, cols)`.
    pub vdag: Tensor,
    /// Sum of squares of the singular values that were dropped.
    pub discarded_weight: f64,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `u * diag(s) * vdag`.
    pub fn reconstruct(&self) -> Tensor {
        let (rows, k) = (self.u.shape[0], self.u.shape[1]);
        let us = Tensor::from_fn(&[rows, k], |ix| self.u.data[ix[0] * k + ix[1]] * self.s[ix[1]]);
        us.matmul(&self.vdag).expect("factor shapes agree")
    }
}

/// Thin singular value decomposition of a matrix.
pub fn svd(m: &Tensor) -> Result<SvdResult> {
    m.require_rank(2)?;
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let a = m.view2()?;
    let (u, s, vt) = match a.svddc(JobSvd::Some) {
        Ok(parts) => parts,
        // The QR-iteration driver sometimes succeeds where divide-and-conquer does not.
        Err(_) => a
            .svd(true, true)
            .map_err(|e| Error::Linalg(format!("SVD did not converge: {e}")))
            .map(|(u, s, vt)| {
                let k = s.len();
                let u = u.map(|u| u.slice(ndarray::s![.., ..k]).to_owned());
                let vt = vt.map(|v| v.slice(ndarray::s![..k, ..]).to_owned());
                (u, s, vt)
            })?,
    };
    let u = u.ok_or_else(|| Error::Linalg("SVD returned no U".into()))?;
    let vt = vt.ok_or_else(|| Error::Linalg("SVD returned no V".into()))?;
    Ok(SvdResult {
        u: Tensor::from_array2(u),
        s: s.to_vec(),
        vdag: Tensor::from_array2(vt),
        discarded_weight: 0.0,
    })
}

/// Number of singular values kept by [`truncated_svd`], and the weight dropped.
///
/// Ties at the rank limit are cut at `max_rank` regardless of degeneracy.
pub fn truncation_rank(s: &[f64], max_rank: usize, cutoff: f64) -> (usize, f64) {
    // tail[r] = sum_{j >= r} s_j^2, accumulated from the small end.
    let mut tail = vec![0.0; s.len() + 1];
    for j in (0..s.len()).rev() {
        tail[j] = tail[j + 1] + s[j] * s[j];
    }
    let total = tail[0];
    let by_cutoff = (0..=s.len())
        .find(|&r| tail[r] <= cutoff * total)
        .unwrap_or(s.len());
    let r = by_cutoff.max(1).min(max_rank).min(s.len());
    (r, tail[r])
}

/// SVD keeping at most `max_rank` values and dropping a tail whose squared
/// weight is at most `cutoff` times the total.
pub fn truncated_svd(m: &Tensor, max_rank: usize, cutoff: f64) -> Result<SvdResult> {
    if max_rank < 1 {
        return Err(Error::InvalidArgument("max_rank must be at least 1".into()));
    }
    if !(cutoff >= 0.0) {
        return Err(Error::InvalidArgument("cutoff must be non-negative".into()));
    }
    let full = svd(m)?;
    let (r, discarded) = truncation_rank(&full.s, max_rank, cutoff);
    if r == full.rank() {
        return Ok(full);
    }
    let rows = full.u.shape[0];
    let cols = full.vdag.shape[1];
    let k = full.rank();
    let u = Tensor::from_fn(&[rows, r], |ix| full.u.data[ix[0] * k + ix[1]]);
    let vdag = Tensor::new(vec![r, cols], full.vdag.data[..r * cols].to_vec())?;
    Ok(SvdResult {
        u,
        s: full.s[..r].to_vec(),
        vdag,
        discarded_weight: discarded,
    })
}

fn check_hermitian(h: &Tensor) -> Result<()> {
    let dev = h.hermitian_deviation()?;
    if dev > HERMITIAN_TOL * h.norm() {
        return Err(Error::NotHermitian { deviation: dev });
    }
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// matrix whose columns are the matching eigenvectors.
pub fn eigh(h: &Tensor) -> Result<(Vec<f64>, Tensor)> {
    check_hermitian(h)?;
    // The LAPACK driver reads row-major input as its transpose, which for a
    // complex Hermitian matrix is the conjugate; hand it column-major data.
    let n = h.shape()[0];
    let mut a = Array2::zeros((n, n).f());
    a.assign(&h.view2()?);
    let (vals, vecs) = a
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Linalg(format!("eigh failed: {e}")))?;
    Ok((vals.to_vec(), Tensor::from_array2(vecs)))
}

/// Builds `V diag(f(lambda)) V^dagger` from an eigendecomposition.
pub fn spectral_map(vals: &[f64], vecs: &Tensor, f: impl Fn(f64) -> f64) -> Tensor {
    let n = vals.len();
    let weights: Vec<f64> = vals.iter().map(|&l| f(l)).collect();
    let vw = Tensor::from_fn(&[n, n], |ix| vecs.data[ix[0] * n + ix[1]] * weights[ix[1]]);
    let vd = vecs.dagger().expect("square");
    vw.matmul(&vd).expect("square")
}

/// `exp(t * h)` for Hermitian `h`.
pub fn hermitian_expm(h: &Tensor, t: f64) -> Result<Tensor> {
    let (vals, vecs) = eigh(h)?;
    Ok(spectral_map(&vals, &vecs, |l| (t * l).exp()))
}

/// Operator norm of a matrix (largest singular value).
pub fn spectral_norm(m: &Tensor) -> Result<f64> {
    Ok(svd(m)?.s.first().copied().unwrap_or(0.0))
}

/// Thin QR of a matrix: `m = q r` with `q` having orthonormal columns.
pub(crate) fn qr(m: &Array2<C64>) -> Result<(Array2<C64>, Array2<C64>)> {
    m.qr().map_err(|e| Error::Linalg(format!("QR failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Tensor {
        Tensor::from_fn(&[r, c], |_| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Tensor {
        let g = random_matrix(rng, n, n);
        g.add(&g.dagger().unwrap()).unwrap().scale_real(0.5)
    }

    #[test]
    fn rejects_bad_shape() {
        assert!(Tensor::new(vec![2, 2], vec![c(1.0); 3]).is_err());
        assert!(Tensor::new(vec![0, 2], vec![]).is_err());
    }

    #[test]
    fn permute_matches_index_definition() {
        let t = Tensor::from_fn(&[2, 3, 4], |ix| c((ix[0] * 100 + ix[1] * 10 + ix[2]) as f64));
        let p = t.permute(&[2, 0, 1]).unwrap();
        assert_eq!(p.shape(), &[4, 2, 3]);
        for i in 0..2 {
            for j in 0..3 {
                for k in 0..4 {
                    assert_eq!(p.get(&[k, i, j]), t.get(&[i, j, k]));
                }
            }
        }
        assert!(matches!(t.permute(&[0, 0, 1]), Err(Error::RepeatedAxis(0))));
    }

    #[test]
    fn contract_identity_with_vector() {
        let id = Tensor::identity(2);
        let v = Tensor::new(vec![2], vec![c(1.0), c(0.0)]).unwrap();
        let out = contract(&id, &v, &[(1, 0)]).unwrap();
        assert_eq!(out.shape(), &[2]);
        assert_eq!(out.data(), &[c(1.0), c(0.0)]);
    }

    #[test]
    fn contract_full_inner_product() {
        let s = 0.5f64.sqrt();
        let v = Tensor::new(vec![2], vec![c(s), C64::new(0.0, s)]).unwrap();
        let out = contract(&v.conj(), &v, &[(0, 0)]).unwrap();
        assert_eq!(out.rank(), 0);
        assert!((out.data()[0] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn contract_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_matrix(&mut rng, 3, 4);
        let b = random_matrix(&mut rng, 4, 2);
        let out = contract(&a, &b, &[(1, 0)]).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                let mut acc = c(0.0);
                for k in 0..4 {
                    acc += a.get(&[i, k]) * b.get(&[k, j]);
                }
                assert!((out.get(&[i, j]) - acc).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn contract_errors() {
        let a = Tensor::zeros(&[2, 3]);
        let b = Tensor::zeros(&[2, 3]);
        assert!(matches!(
            contract(&a, &b, &[(1, 1), (0, 1)]),
            Err(Error::RepeatedAxis(1))
        ));
        assert!(matches!(
            contract(&a, &b, &[(1, 0)]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            contract(&a, &b, &[(2, 0)]),
            Err(Error::AxisOutOfRange { .. })
        ));
    }

    #[test]
    fn contract_higher_rank_against_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = Tensor::from_fn(&[2, 3, 4], |_| C64::new(rng.random(), rng.random()));
        let b = Tensor::from_fn(&[4, 5, 2], |_| C64::new(rng.random(), rng.random()));
        let out = contract(&a, &b, &[(2, 0), (0, 2)]).unwrap();
        assert_eq!(out.shape(), &[3, 5]);
        for j in 0..3 {
            for m in 0..5 {
                let mut acc = c(0.0);
                for i in 0..2 {
                    for k in 0..4 {
                        acc += a.get(&[i, j, k]) * b.get(&[k, m, i]);
                    }
                }
                assert!((out.get(&[j, m]) - acc).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn svd_diagonal() {
        let m = Tensor::real_matrix(3, 3, &[3.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let r = svd(&m).unwrap();
        for (got, want) in r.s.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert_eq!(r.discarded_weight, 0.0);
    }

    #[test]
    fn svd_rank_one() {
        let s = 0.5f64.sqrt();
        let u = [c(s), C64::new(0.0, s)];
        let v = [c(0.6), c(0.0), c(0.8)];
        let m = Tensor::from_fn(&[2, 3], |ix| u[ix[0]] * v[ix[1]].conj() * 5.0);
        let r = svd(&m).unwrap();
        assert!((r.s[0] - 5.0).abs() < 1e-13);
        assert!(r.s[1..].iter().all(|&x| x.abs() < 1e-13));
    }

    #[test]
    fn svd_matches_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_matrix(&mut rng, 6, 4);
        let gram = m.dagger().unwrap().matmul(&m).unwrap();
        let (mut vals, _) = eigh(&gram).unwrap();
        vals.reverse();
        let r = svd(&m).unwrap();
        for (s, l) in r.s.iter().zip(vals) {
            assert!((s - l.sqrt()).abs() < 1e-12, "{s} vs {}", l.sqrt());
        }
    }

    #[test]
    fn svd_rejects_non_finite() {
        let m = Tensor::real_matrix(1, 2, &[f64::NAN, 1.0]).unwrap();
        assert!(matches!(svd(&m), Err(Error::NonFinite)));
    }

    #[test]
    fn truncated_svd_examples() {
        let m = Tensor::real_matrix(3, 3, &[3.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let r = truncated_svd(&m, 2, 0.0).unwrap();
        assert_eq!(r.s.len(), 2);
        assert!((r.s[0] - 3.0).abs() < 1e-14 && (r.s[1] - 2.0).abs() < 1e-14);
        assert!((r.discarded_weight - 1.0).abs() < 1e-14);
        assert!(truncated_svd(&m, 0, 0.0).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_matrix(&mut rng, 8, 8);
        let full = svd(&m).unwrap();
        let r = truncated_svd(&m, 3, 0.0).unwrap();
        let tail: f64 = full.s[3..].iter().map(|x| x * x).sum();
        assert!((r.discarded_weight - tail).abs() < 1e-12 * tail.max(1.0));

        let same = truncated_svd(&m, 100, 0.0).unwrap();
        assert_eq!(same.s, full.s);
        assert_eq!(same.discarded_weight, 0.0);
    }

    #[test]
    fn truncation_by_cutoff() {
        let s = [1.0, 0.1, 0.01, 0.001];
        // total = 1.010101; dropping the last two loses 1.01e-4.
        let (r, w) = truncation_rank(&s, 10, 1e-4 / 1.010101 * 1.02);
        assert_eq!(r, 2);
        assert!((w - 1.01e-4).abs() < 1e-15);
        // ties are still cut at max_rank
        let (r, w) = truncation_rank(&[1.0, 1.0, 1.0], 2, 0.0);
        assert_eq!(r, 2);
        assert_eq!(w, 1.0);
    }

    #[test]
    fn expm_zero_is_identity() {
        let z = Tensor::zeros(&[4, 4]);
        let e = hermitian_expm(&z, 3.7).unwrap();
        assert!(e.max_abs_diff(&Tensor::identity(4)).unwrap() < 1e-15);
    }

    #[test]
    fn expm_pauli_x() {
        let x = Tensor::real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let e = hermitian_expm(&x, -0.3).unwrap();
        let want = Tensor::identity(2)
            .scale_real(0.3f64.cosh())
            .sub(&x.scale_real(0.3f64.sinh()))
            .unwrap();
        assert!(e.max_abs_diff(&want).unwrap() < 1e-14);
    }

    /// Scaling-and-squaring with a truncated Taylor series.
    fn taylor_expm(a: &Tensor) -> Tensor {
        let n = a.shape()[0];
        let mut squarings = 0;
        let mut scaled = a.clone();
        while scaled.norm() > 0.5 {
            scaled = scaled.scale_real(0.5);
            squarings += 1;
        }
        let mut sum = Tensor::identity(n);
        let mut term = Tensor::identity(n);
        for k in 1..30 {
            term = term.matmul(&scaled).unwrap().scale_real(1.0 / k as f64);
            sum = sum.add(&term).unwrap();
        }
        for _ in 0..squarings {
            sum = sum.matmul(&sum).unwrap();
        }
        sum
    }

    #[test]
    fn expm_matches_taylor_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let h = random_hermitian(&mut rng, 4);
        let e = hermitian_expm(&h, -1.0).unwrap();
        let oracle = taylor_expm(&h.scale_real(-1.0));
        let diff = e.max_abs_diff(&oracle).unwrap();
        assert!(diff < 1e-10, "diff {diff:e}, norm {}", e.norm());
    }

    #[test]
    fn eigh_reconstructs_complex_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(&mut rng, 6);
        let (vals, vecs) = eigh(&h).unwrap();
        assert!(spectral_map(&vals, &vecs, |l| l).max_abs_diff(&h).unwrap() < 1e-12);
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let m = Tensor::real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(hermitian_expm(&m, 1.0), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn kron_matches_definition() {
        let x = Tensor::real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let z = Tensor::real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap();
        let k = x.kron(&z).unwrap();
        // X (x) Z: rows |00>,|01>,|10>,|11>
        let want = Tensor::real_matrix(
            4,
            4,
            &[
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, -1.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, -1.0, 0.0, 0.0,
            ],
        )
        .unwrap();
        assert_eq!(k, want);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(100))]

            #[test]
            fn svd_reconstructs(rows in 1usize..=32, cols in 1usize..=32, seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let m = random_matrix(&mut rng, rows, cols);
                let r = svd(&m).unwrap();
                let err = r.reconstruct().sub(&m).unwrap().norm();
                prop_assert!(err <= 1e-10 * m.norm());
                prop_assert!(r.s.windows(2).all(|w| w[0] >= w[1]));
                prop_assert!(r.s.iter().all(|&x| x >= 0.0));
                let k = r.rank();
                let utu = r.u.dagger().unwrap().matmul(&r.u).unwrap();
                prop_assert!(utu.max_abs_diff(&Tensor::identity(k)).unwrap() < 1e-10);
                let vvd = r.vdag.matmul(&r.vdag.dagger().unwrap()).unwrap();
                prop_assert!(vvd.max_abs_diff(&Tensor::identity(k)).unwrap() < 1e-10);
            }

            #[test]
            fn expm_inverse(n in 1usize..=6, t in -2.0f64..2.0, seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let h = random_hermitian(&mut rng, n);
                let a = hermitian_expm(&h, t).unwrap();
                let b = hermitian_expm(&h, -t).unwrap();
                let prod = a.matmul(&b).unwrap();
                prop_assert!(prod.max_abs_diff(&Tensor::identity(n)).unwrap() < 1e-9);
            }

            #[test]
            fn contract_is_linear(re in -3.0f64..3.0, im in -3.0f64..3.0, seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = Tensor::from_fn(&[3, 2, 4], |_| C64::new(rng.random(), rng.random()));
                let b = Tensor::from_fn(&[4, 3], |_| C64::new(rng.random(), rng.random()));
                let alpha = C64::new(re, im);
                let lhs = contract(&a.scale(alpha), &b, &[(2, 0)]).unwrap();
                let rhs = contract(&a, &b, &[(2, 0)]).unwrap().scale(alpha);
                let scale = rhs.norm().max(1e-300);
                prop_assert!(lhs.sub(&rhs).unwrap().norm() <= 1e-12 * scale);
            }
        }
    }
}
