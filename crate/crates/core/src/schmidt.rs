//! Operator Schmidt decomposition over Hermitian operator bases, the
//! commutator-based separability verdict, pointer bases, the spectral form
//! and an independent eigenvector-based oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SepError};
use crate::jointdiag;
use crate::linalg::{self, CMat, RMat, C64, ONE, ZERO};
use crate::operator::{commutator_fro_norm, BipartiteOperator, ToleranceProfile};

/// Trace-orthonormal Hermitian basis of d x d matrices (generalized Gell-Mann).
///
/// Order: identity/√d, then for each pair j < k the symmetric and
/// antisymmetric off-diagonal elements, then the traceless diagonal ones.
/// For d = 2 this is {I, σx, σy, σz}/√2.
pub fn hermitian_basis(d: usize) -> Result<Vec<CMat>> {
    if d < 1 {
        return Err(SepError::InvalidDimensions(
            "basis dimension must be >= 1".into(),
        ));
    }
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(d * d);
    basis.push(linalg::identity(d).scale(1.0 / (d as f64).sqrt()));
    for j in 0..d {
        for k in j + 1..d {
            let mut sym = CMat::zeros(d, d);
            sym[(j, k)] = C64::new(r2, 0.0);
            sym[(k, j)] = C64::new(r2, 0.0);
            basis.push(sym);
            let mut anti = CMat::zeros(d, d);
            anti[(j, k)] = C64::new(0.0, -r2);
            anti[(k, j)] = C64::new(0.0, r2);
            basis.push(anti);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = CMat::zeros(d, d);
        for j in 0..l {
            diag[(j, j)] = C64::new(norm, 0.0);
        }
        diag[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
        basis.push(diag);
    }
    Ok(basis)
}

/// Flattens each basis element transposed, one column per element:
/// column a holds (B_a)_{ij} at row j·d + i.
fn transposed_columns(basis: &[CMat], d: usize) -> CMat {
    let mut out = CMat::zeros(d * d, basis.len());
    for (a, b) in basis.iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                out[(j * d + i, a)] = b[(i, j)];
            }
        }
    }
    out
}

/// Real coefficient matrix M_ab = tr((B_a ⊗ B_b) H) over the Hermitian bases.
pub fn coefficient_matrix(h: &CMat, d_s: usize, d_e: usize) -> Result<RMat> {
    let bs = hermitian_basis(d_s)?;
    let be = hermitian_basis(d_e)?;
    Ok(coefficient_matrix_with(h, d_s, d_e, &bs, &be))
}

pub(crate) fn coefficient_matrix_with(
    h: &CMat,
    d_s: usize,
    d_e: usize,
    bs: &[CMat],
    be: &[CMat],
) -> RMat {
    // R[(j,i),(l,k)] = H[(j,l),(i,k)], so tr((A⊗B)H) = vecᵀ(Aᵀ) R vec(Bᵀ)
    let mut r = CMat::zeros(d_s * d_s, d_e * d_e);
    for j in 0..d_s {
        for i in 0..d_s {
            for l in 0..d_e {
                for k in 0..d_e {
                    r[(j * d_s + i, l * d_e + k)] = h[(j * d_e + l, i * d_e + k)];
                }
            }
        }
    }
    let va = transposed_columns(bs, d_s);
    let vb = transposed_columns(be, d_e);
    let m = va.transpose() * r * vb;
    m.map(|z| z.re)
}

/// H = Σ_k weights[k] · s_ops[k] ⊗ e_ops[k] with trace-orthonormal Hermitian
/// factor sets.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtDecomposition {
    pub weights: Vec<f64>,
    pub s_ops: Vec<CMat>,
    pub e_ops: Vec<CMat>,
    pub d_s: usize,
    pub d_e: usize,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn reconstruct(&self) -> CMat {
        let mut out = CMat::zeros(self.d_s * self.d_e, self.d_s * self.d_e);
        for ((w, c), d) in self.weights.iter().zip(&self.s_ops).zip(&self.e_ops) {
            out += linalg::kron(c, d).scale(*w);
        }
        out
    }

    /// Max entrywise deviation of the S- and E-side Gram matrices from identity.
    pub fn gram_deviation(&self) -> (f64, f64) {
        (gram_deviation(&self.s_ops), gram_deviation(&self.e_ops))
    }
}

fn gram_deviation(ops: &[CMat]) -> f64 {
    let mut dev = 0.0_f64;
    for (k, a) in ops.iter().enumerate() {
        for (l, b) in ops.iter().enumerate() {
            let target = if k == l { ONE } else { ZERO };
            dev = dev.max((linalg::trace_inner(a, b) - target).norm());
        }
    }
    dev
}

/// Operator Schmidt decomposition of `h` across its cut.
///
/// Terms with singular value at or below `tol_rank · σ_max` are dropped. The
/// sign of each term is fixed so that the largest-magnitude coefficient of
/// the S-side factor is positive.
pub fn operator_schmidt(
    h: &BipartiteOperator,
    tols: &ToleranceProfile,
) -> Result<SchmidtDecomposition> {
    let max_dev = linalg::hermitian_deviation(h.matrix());
    if max_dev > tols.tol_herm {
        return Err(SepError::NotHermitian { max_dev });
    }
    let (d_s, d_e) = (h.d_s(), h.d_e());
    let bs = hermitian_basis(d_s)?;
    let be = hermitian_basis(d_e)?;
    let m = coefficient_matrix_with(h.matrix(), d_s, d_e, &bs, &be);
    let svd = m.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma_max = order.first().map_or(0.0, |&k| svd.singular_values[k]);

    let mut out = SchmidtDecomposition {
        weights: Vec::new(),
        s_ops: Vec::new(),
        e_ops: Vec::new(),
        d_s,
        d_e,
    };
    if sigma_max <= 0.0 {
        return Ok(out);
    }
    for k in order {
        let w = svd.singular_values[k];
        if w <= tols.tol_rank * sigma_max {
            break;
        }
        let mut ucol: Vec<f64> = u.column(k).iter().copied().collect();
        let mut vcol: Vec<f64> = v_t.row(k).iter().copied().collect();
        let pivot = ucol
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(1.0);
        if pivot < 0.0 {
            ucol.iter_mut().for_each(|x| *x = -*x);
            vcol.iter_mut().for_each(|x| *x = -*x);
        }
        out.weights.push(w);
        out.s_ops.push(combine(&bs, &ucol, d_s));
        out.e_ops.push(combine(&be, &vcol, d_e));
    }
    Ok(out)
}

fn combine(basis: &[CMat], coeffs: &[f64], d: usize) -> CMat {
    let mut acc = CMat::zeros(d, d);
    for (b, &c) in basis.iter().zip(coeffs) {
        if c != 0.0 {
            acc += b.scale(c);
        }
    }
    linalg::symmetrize(&acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Separable,
    NonSeparable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    pub verdict: Verdict,
    pub rank: usize,
    #[serde(rename = "max_comm_S")]
    pub max_comm_s: f64,
    #[serde(rename = "max_comm_E")]
    pub max_comm_e: f64,
    pub weights: Vec<f64>,
    pub tolerances: ToleranceProfile,
}

impl SeparabilityReport {
    pub fn is_separable(&self) -> bool {
        self.verdict == Verdict::Separable
    }

    pub fn max_comm(&self) -> f64 {
        self.max_comm_s.max(self.max_comm_e)
    }
}

/// Largest pairwise commutator Frobenius norm within a family.
pub fn max_pairwise_commutator(ops: &[CMat]) -> f64 {
    let mut best = 0.0_f64;
    for k in 0..ops.len() {
        for l in k + 1..ops.len() {
            let c = commutator_fro_norm(&ops[k], &ops[l]).expect("family members share a shape");
            best = best.max(c);
        }
    }
    best
}

/// Separable iff both factor families commute pairwise (norms at most
/// `tol_commute`; the factors are trace-normalized so no rescaling applies).
pub fn separability_verdict(
    sd: &SchmidtDecomposition,
    tols: &ToleranceProfile,
) -> SeparabilityReport {
    let max_comm_s = max_pairwise_commutator(&sd.s_ops);
    let max_comm_e = max_pairwise_commutator(&sd.e_ops);
    let separable =
        sd.rank() <= 1 || (max_comm_s <= tols.tol_commute && max_comm_e <= tols.tol_commute);
    SeparabilityReport {
        verdict: if separable {
            Verdict::Separable
        } else {
            Verdict::NonSeparable
        },
        rank: sd.rank(),
        max_comm_s,
        max_comm_e,
        weights: sd.weights.clone(),
        tolerances: *tols,
    }
}

/// Decomposition and verdict in one call.
pub fn analyze(
    h: &BipartiteOperator,
    tols: &ToleranceProfile,
) -> Result<(SchmidtDecomposition, SeparabilityReport)> {
    let sd = operator_schmidt(h, tols)?;
    let report = separability_verdict(&sd, tols);
    Ok((sd, report))
}

/// Product bases diagonalizing a separable operator.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerBases {
    /// Columns are the S-side pointer states.
    pub u_s: CMat,
    /// Columns are the E-side basis states.
    pub u_e: CMat,
    /// Off-diagonal Frobenius mass of (u_s ⊗ u_e)† H (u_s ⊗ u_e).
    pub residual: f64,
}

impl PointerBases {
    /// Wraps arbitrary bases, computing the residual against `h`.
    pub fn from_bases(h: &BipartiteOperator, u_s: CMat, u_e: CMat) -> Result<Self> {
        if u_s.shape() != (h.d_s(), h.d_s()) || u_e.shape() != (h.d_e(), h.d_e()) {
            return Err(SepError::InvalidDimensions(
                "basis shape does not match the cut".into(),
            ));
        }
        for u in [&u_s, &u_e] {
            let max_dev = linalg::unitary_deviation(u);
            if max_dev > 1e-8 {
                return Err(SepError::NotUnitary { max_dev });
            }
        }
        let residual = linalg::offdiag_norm(&conjugate_by_product(h.matrix(), &u_s, &u_e));
        Ok(Self { u_s, u_e, residual })
    }

    /// Largest residual accepted for `h` under `tols`.
    pub fn threshold(h: &BipartiteOperator, tols: &ToleranceProfile) -> f64 {
        tols.tol_commute * h.fro_norm()
    }
}

/// (u_s ⊗ u_e)† H (u_s ⊗ u_e)
pub fn conjugate_by_product(h: &CMat, u_s: &CMat, u_e: &CMat) -> CMat {
    let w = linalg::kron(u_s, u_e);
    w.adjoint() * h * w
}

/// Simultaneously diagonalizes both commuting factor families.
///
/// The fast path diagonalizes a seeded random combination of each family;
/// if the residual is too large, Jacobi joint diagonalization refines it.
pub fn pointer_bases(
    h: &BipartiteOperator,
    sd: &SchmidtDecomposition,
    tols: &ToleranceProfile,
    seed: u64,
) -> Result<PointerBases> {
    if !separability_verdict(sd, tols).is_separable() {
        return Err(SepError::NotSeparable);
    }
    let threshold = PointerBases::threshold(h, tols);
    let u_s = jointdiag::random_combination_basis(&sd.s_ops, sd.d_s, seed);
    let u_e = jointdiag::random_combination_basis(&sd.e_ops, sd.d_e, seed.wrapping_add(1));
    let pb = PointerBases::from_bases(h, u_s, u_e)?;
    if pb.residual <= threshold {
        return Ok(pb);
    }
    let u_s = jointdiag::jacobi_joint_diagonalize(&sd.s_ops, &pb.u_s, 200);
    let u_e = jointdiag::jacobi_joint_diagonalize(&sd.e_ops, &pb.u_e, 200);
    let pb = PointerBases::from_bases(h, u_s, u_e)?;
    if pb.residual <= threshold {
        Ok(pb)
    } else {
        Err(SepError::DiagonalizationFailed {
            residual: pb.residual,
            threshold,
        })
    }
}

/// H = Σ_{p,q} γ_pq P_p ⊗ Π_q.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralForm {
    /// gammas[p][q]
    pub gammas: Vec<Vec<f64>>,
    pub s_projectors: Vec<CMat>,
    pub e_projectors: Vec<CMat>,
    /// Pointer-basis column indices in each S block.
    pub s_blocks: Vec<Vec<usize>>,
    /// Basis column indices in each E block.
    pub e_blocks: Vec<Vec<usize>>,
}

impl SpectralForm {
    /// (p, q, γ_pq) triples in row-major order.
    pub fn pairing(&self) -> Vec<(usize, usize, f64)> {
        self.gammas
            .iter()
            .enumerate()
            .flat_map(|(p, row)| row.iter().enumerate().map(move |(q, &g)| (p, q, g)))
            .collect()
    }

    pub fn reconstruct(&self) -> CMat {
        let ds = self.s_projectors.first().map_or(0, |p| p.nrows());
        let de = self.e_projectors.first().map_or(0, |p| p.nrows());
        let mut out = CMat::zeros(ds * de, ds * de);
        for (p, ps) in self.s_projectors.iter().enumerate() {
            for (q, pe) in self.e_projectors.iter().enumerate() {
                out += linalg::kron(ps, pe).scale(self.gammas[p][q]);
            }
        }
        out
    }
}

/// Groups row indices of `table` whose rows agree entrywise within `tol`.
/// A row that matches representatives of two different groups is an error.
fn cluster_rows(table: &[Vec<f64>], tol: f64, side: &str) -> Result<Vec<Vec<usize>>> {
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, row) in table.iter().enumerate() {
        let hits: Vec<usize> = groups
            .iter()
            .enumerate()
            .filter(|(_, g)| close(&table[g[0]], row))
            .map(|(k, _)| k)
            .collect();
        match hits.as_slice() {
            [] => groups.push(vec![i]),
            [k] => groups[*k].push(i),
            _ => {
                return Err(SepError::ClusterError(format!(
                    "{side} basis vector {i} matches blocks {hits:?}"
                )))
            }
        }
    }
    for g in &groups {
        for &a in g {
            for &b in g {
                if !close(&table[a], &table[b]) {
                    return Err(SepError::ClusterError(format!(
                        "{side} block {g:?} is not internally consistent"
                    )));
                }
            }
        }
    }
    Ok(groups)
}

/// Builds the projector-sum form from pointer bases.
pub fn spectral_form(
    h: &BipartiteOperator,
    pb: &PointerBases,
    tols: &ToleranceProfile,
) -> Result<SpectralForm> {
    let threshold = PointerBases::threshold(h, tols);
    if pb.residual > threshold {
        return Err(SepError::DiagonalizationFailed {
            residual: pb.residual,
            threshold,
        });
    }
    let (d_s, d_e) = (h.d_s(), h.d_e());
    let conj = conjugate_by_product(h.matrix(), &pb.u_s, &pb.u_e);
    let diag: Vec<Vec<f64>> = (0..d_s)
        .map(|i| {
            (0..d_e)
                .map(|j| conj[(i * d_e + j, i * d_e + j)].re)
                .collect()
        })
        .collect();
    let diag_t: Vec<Vec<f64>> = (0..d_e)
        .map(|j| (0..d_s).map(|i| diag[i][j]).collect())
        .collect();
    let tol = tols.tol_commute * h.fro_norm();
    let s_blocks = cluster_rows(&diag, tol, "S")?;
    let e_blocks = cluster_rows(&diag_t, tol, "E")?;

    let block_projector = |u: &CMat, block: &[usize]| -> CMat {
        let mut p = CMat::zeros(u.nrows(), u.nrows());
        for &k in block {
            p += linalg::projector(&u.column(k).into_owned());
        }
        p
    };
    let gammas = s_blocks
        .iter()
        .map(|sb| {
            e_blocks
                .iter()
                .map(|eb| {
                    let mut acc = 0.0;
                    for &i in sb {
                        for &j in eb {
                            acc += diag[i][j];
                        }
                    }
                    acc / (sb.len() * eb.len()) as f64
                })
                .collect()
        })
        .collect();
    Ok(SpectralForm {
        gammas,
        s_projectors: s_blocks
            .iter()
            .map(|b| block_projector(&pb.u_s, b))
            .collect(),
        e_projectors: e_blocks
            .iter()
            .map(|b| block_projector(&pb.u_e, b))
            .collect(),
        s_blocks,
        e_blocks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleVerdict {
    Separable,
    NonSeparable,
    Inconclusive,
}

/// Independent check: a nondegenerate operator is separable iff each of its
/// eigenvectors is a product state.
pub fn product_eigenbasis_oracle(h: &BipartiteOperator) -> OracleVerdict {
    let (d_s, d_e) = (h.d_s(), h.d_e());
    let norm = h.fro_norm();
    let (values, vectors) = linalg::eigh(h.matrix());
    if values.windows(2).any(|w| w[1] - w[0] <= 1e-6 * norm) {
        return OracleVerdict::Inconclusive;
    }
    for col in vectors.column_iter() {
        let reshaped = CMat::from_fn(d_s, d_e, |i, j| col[i * d_e + j]);
        let s = linalg::singular_values(&reshaped);
        if s.len() > 1 && s[1] > 1e-8 * s[0] {
            return OracleVerdict::NonSeparable;
        }
    }
    OracleVerdict::Separable
}
