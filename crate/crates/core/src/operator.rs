//! Tensor-structure bookkeeping for operators on composite spaces.
//!
//! Basis states are ordered with the row-major Kronecker convention: the
//! first factor is the most significant digit of the flat index.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SepError};
use crate::linalg::{self, CMat, ZERO};

/// Dimensions (and optional labels) of the tensor factors of a Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorSpace {
    dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl FactorSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(SepError::InvalidDimensions("no factors".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(SepError::InvalidDimensions(format!(
                "factor dimension {d} < 2"
            )));
        }
        Ok(Self { dims, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dims.len() {
            return Err(SepError::InvalidDimensions(format!(
                "{} labels for {} factors",
                labels.len(),
                self.dims.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn n_factors(&self) -> usize {
        self.dims.len()
    }

    /// Product of all factor dimensions.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Product of the dimensions of the factors in `range`.
    pub fn group_dim(&self, range: std::ops::Range<usize>) -> usize {
        self.dims[range].iter().product()
    }

    fn strides(&self) -> Vec<usize> {
        strides(&self.dims)
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

/// Numerical thresholds used throughout the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceProfile {
    /// Max entrywise |M - M^dagger| accepted on ingest.
    pub tol_herm: f64,
    /// Relative singular-value cutoff for Schmidt terms.
    pub tol_rank: f64,
    /// Commutator Frobenius-norm threshold.
    pub tol_commute: f64,
    /// Relative reconstruction residual.
    pub tol_recon: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self {
            tol_herm: 1e-10,
            tol_rank: 1e-12,
            tol_commute: 1e-8,
            tol_recon: 1e-10,
        }
    }
}

impl ToleranceProfile {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.tol_herm,
            self.tol_rank,
            self.tol_commute,
            self.tol_recon,
        ];
        if all.iter().all(|t| t.is_finite() && *t > 0.0) {
            Ok(())
        } else {
            Err(SepError::InvalidDimensions(
                "tolerances must be finite and positive".into(),
            ))
        }
    }
}

/// A Hermitian operator on a composite space split into an S-group
/// (the first `cut` factors) and an E-group (the rest).
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteOperator {
    matrix: CMat,
    space: FactorSpace,
    cut: usize,
}

impl BipartiteOperator {
    /// Validates shape, cut and Hermiticity, then symmetrizes the matrix.
    pub fn new(matrix: CMat, space: FactorSpace, cut: usize, tol_herm: f64) -> Result<Self> {
        let n = space.n_factors();
        if cut == 0 || cut >= n {
            return Err(SepError::InvalidDimensions(format!(
                "cut out of range: {cut} not in 1..{n}"
            )));
        }
        if !matrix.is_square() || matrix.nrows() != space.total_dim() {
            return Err(SepError::InvalidDimensions(format!(
                "matrix is {}x{} but factor dims multiply to {}",
                matrix.nrows(),
                matrix.ncols(),
                space.total_dim()
            )));
        }
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(SepError::InvalidDimensions(
                "non-finite matrix entry".into(),
            ));
        }
        let max_dev = linalg::hermitian_deviation(&matrix);
        if max_dev > tol_herm {
            return Err(SepError::NotHermitian { max_dev });
        }
        Ok(Self {
            matrix: linalg::symmetrize(&matrix),
            space,
            cut,
        })
    }

    /// Two-factor operator on `d_s ⊗ d_e`.
    pub fn from_pair(matrix: CMat, d_s: usize, d_e: usize, tol_herm: f64) -> Result<Self> {
        Self::new(matrix, FactorSpace::new(vec![d_s, d_e])?, 1, tol_herm)
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn space(&self) -> &FactorSpace {
        &self.space
    }

    pub fn cut(&self) -> usize {
        self.cut
    }

    pub fn d_s(&self) -> usize {
        self.space.group_dim(0..self.cut)
    }

    pub fn d_e(&self) -> usize {
        self.space.group_dim(self.cut..self.space.n_factors())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn fro_norm(&self) -> f64 {
        linalg::fro_norm(&self.matrix)
    }

    /// Same space and cut, new matrix. The matrix must already be Hermitian
    /// up to rounding; it is symmetrized.
    pub fn with_matrix(&self, matrix: CMat, tol_herm: f64) -> Result<Self> {
        Self::new(matrix, self.space.clone(), self.cut, tol_herm)
    }

    pub fn into_parts(self) -> (CMat, FactorSpace, usize) {
        (self.matrix, self.space, self.cut)
    }
}

fn check_square(op: &CMat, dim: usize, what: &str) -> Result<()> {
    if !op.is_square() || op.nrows() != dim {
        return Err(SepError::InvalidDimensions(format!(
            "{what}: expected {dim}x{dim}, got {}x{}",
            op.nrows(),
            op.ncols()
        )));
    }
    Ok(())
}

fn check_factor_set(factors: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &f in factors {
        if f >= n {
            return Err(SepError::InvalidDimensions(format!(
                "factor index {f} out of range for {n} factors"
            )));
        }
        if std::mem::replace(&mut seen[f], true) {
            return Err(SepError::InvalidDimensions(format!(
                "factor index {f} repeated"
            )));
        }
    }
    Ok(())
}

/// Tensors `op` with the identity on all factors outside `target_factors`.
///
/// `op` acts on the target factors in the order they are listed.
pub fn embed_on_factors(op: &CMat, target_factors: &[usize], space: &FactorSpace) -> Result<CMat> {
    let n = space.n_factors();
    if target_factors.is_empty() {
        return Err(SepError::InvalidDimensions("no target factors".into()));
    }
    check_factor_set(target_factors, n)?;
    let target_dims: Vec<usize> = target_factors.iter().map(|&f| space.dims()[f]).collect();
    let d_t: usize = target_dims.iter().product();
    check_square(op, d_t, "embedded operator")?;

    let rest: Vec<usize> = (0..n).filter(|f| !target_factors.contains(f)).collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&f| space.dims()[f]).collect();
    let d_r: usize = rest_dims.iter().product();
    let full_strides = space.strides();

    let offset = |t_digits: &[usize], r_digits: &[usize]| -> usize {
        let mut idx = 0;
        for (k, &f) in target_factors.iter().enumerate() {
            idx += t_digits[k] * full_strides[f];
        }
        for (k, &f) in rest.iter().enumerate() {
            idx += r_digits[k] * full_strides[f];
        }
        idx
    };

    let t_digits: Vec<Vec<usize>> = (0..d_t).map(|i| digits(i, &target_dims)).collect();
    let dim = space.total_dim();
    let mut out = CMat::zeros(dim, dim);
    for r in 0..d_r {
        let r_digits = digits(r, &rest_dims);
        let flat: Vec<usize> = t_digits.iter().map(|td| offset(td, &r_digits)).collect();
        for a in 0..d_t {
            for b in 0..d_t {
                let v = op[(a, b)];
                if v != ZERO {
                    out[(flat[a], flat[b])] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Reorders tensor factors: factor `k` of the result is factor `perm[k]` of
/// the input.
pub fn permute_factors(
    op: &CMat,
    space: &FactorSpace,
    perm: &[usize],
) -> Result<(CMat, FactorSpace)> {
    let n = space.n_factors();
    if perm.len() != n {
        return Err(SepError::InvalidPermutation(format!(
            "length {} for {n} factors",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(SepError::InvalidPermutation(format!("{perm:?}")));
        }
    }
    check_square(op, space.total_dim(), "permuted operator")?;

    let new_dims: Vec<usize> = perm.iter().map(|&p| space.dims()[p]).collect();
    let mut new_space = FactorSpace::new(new_dims.clone())?;
    if let Some(labels) = space.labels() {
        new_space = new_space.with_labels(perm.iter().map(|&p| labels[p].clone()).collect())?;
    }
    let old_strides = space.strides();
    let dim = space.total_dim();
    let map: Vec<usize> = (0..dim)
        .map(|i| {
            digits(i, &new_dims)
                .iter()
                .zip(perm)
                .map(|(&digit, &p)| digit * old_strides[p])
                .sum()
        })
        .collect();
    let out = CMat::from_fn(dim, dim, |i, j| op[(map[i], map[j])]);
    Ok((out, new_space))
}

/// Inverse of a factor permutation.
pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

/// Traces out `traced_factors`; the kept factors retain their order.
pub fn partial_trace(op: &CMat, space: &FactorSpace, traced_factors: &[usize]) -> Result<CMat> {
    let n = space.n_factors();
    if traced_factors.is_empty() {
        return Err(SepError::InvalidDimensions("nothing to trace".into()));
    }
    check_factor_set(traced_factors, n)?;
    if traced_factors.len() == n {
        return Err(SepError::InvalidDimensions(
            "cannot trace out every factor".into(),
        ));
    }
    check_square(op, space.total_dim(), "traced operator")?;

    let kept: Vec<usize> = (0..n).filter(|f| !traced_factors.contains(f)).collect();
    let kept_dims: Vec<usize> = kept.iter().map(|&f| space.dims()[f]).collect();
    let traced_dims: Vec<usize> = traced_factors.iter().map(|&f| space.dims()[f]).collect();
    let d_k: usize = kept_dims.iter().product();
    let d_t: usize = traced_dims.iter().product();
    let st = space.strides();

    let kept_off: Vec<usize> = (0..d_k)
        .map(|i| {
            digits(i, &kept_dims)
                .iter()
                .zip(&kept)
                .map(|(&d, &f)| d * st[f])
                .sum()
        })
        .collect();
    let traced_off: Vec<usize> = (0..d_t)
        .map(|i| {
            digits(i, &traced_dims)
                .iter()
                .zip(traced_factors)
                .map(|(&d, &f)| d * st[f])
                .sum()
        })
        .collect();

    let mut out = CMat::zeros(d_k, d_k);
    for a in 0..d_k {
        for b in 0..d_k {
            let mut acc = ZERO;
            for &t in &traced_off {
                acc += op[(kept_off[a] + t, kept_off[b] + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Partial trace of a two-group operator over its E-group.
pub fn trace_out_environment(op: &CMat, d_s: usize, d_e: usize) -> Result<CMat> {
    let space = FactorSpace::new(vec![d_s, d_e])?;
    partial_trace(op, &space, &[1])
}

/// Frobenius norm of `ab - ba`.
pub fn commutator_fro_norm(a: &CMat, b: &CMat) -> Result<f64> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(SepError::InvalidDimensions(format!(
            "commutator of {:?} and {:?} matrices",
            a.shape(),
            b.shape()
        )));
    }
    Ok(linalg::fro_norm(&linalg::commutator(a, b)))
}
