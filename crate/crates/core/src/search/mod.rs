//! Transformations of the S/E split: local and global conjugation, the
//! nonseparability objectives, the separating-unitary search, composite
//! Hamiltonian assembly and bipartition scans.

mod composite;
pub mod nelder_mead;
mod scan;

pub use composite::{assemble_composite, CompositeSpec, Subsystem, SubsystemRole, Term, TermKind};
pub use scan::{bipartition_scan, bipartitions, PartitionReport};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SepError};
use crate::format::MatrixFile;
use crate::jointdiag;
use crate::linalg::{self, CMat, C64};
use crate::models::rng_from_seed;
use crate::operator::{BipartiteOperator, ToleranceProfile};
use crate::schmidt::{self, coefficient_matrix_with, hermitian_basis, SeparabilityReport};
use nelder_mead::NelderMead;

const UNITARY_TOL: f64 = 1e-8;

fn check_unitary(u: &CMat, dim: usize) -> Result<()> {
    if u.shape() != (dim, dim) {
        return Err(SepError::InvalidDimensions(format!(
            "unitary is {:?}, expected {dim}x{dim}",
            u.shape()
        )));
    }
    let max_dev = linalg::unitary_deviation(u);
    if max_dev > UNITARY_TOL {
        return Err(SepError::NotUnitary { max_dev });
    }
    Ok(())
}

/// (u_s ⊗ u_e) H (u_s ⊗ u_e)†, same space and cut.
pub fn local_conjugate(h: &BipartiteOperator, u_s: &CMat, u_e: &CMat) -> Result<BipartiteOperator> {
    check_unitary(u_s, h.d_s())?;
    check_unitary(u_e, h.d_e())?;
    let w = linalg::kron(u_s, u_e);
    h.with_matrix(&w * h.matrix() * w.adjoint(), f64::INFINITY)
}

/// G H G† with the declared cut kept, so the cut now splits the new frame.
pub fn global_conjugate(h: &BipartiteOperator, g: &CMat) -> Result<BipartiteOperator> {
    check_unitary(g, h.dim())?;
    h.with_matrix(g * h.matrix() * g.adjoint(), f64::INFINITY)
}

fn sum_sq_commutators(ops: &[CMat]) -> f64 {
    let mut acc = 0.0;
    for k in 0..ops.len() {
        for l in k + 1..ops.len() {
            acc += linalg::fro_norm(&linalg::commutator(&ops[k], &ops[l])).powi(2);
        }
    }
    acc
}

/// Σ_{k<l} ‖[C_k, C_l]‖² + Σ_{k<l} ‖[D_k, D_l]‖² over the retained
/// (trace-normalized) Schmidt factors.
pub fn nonseparability_objective(h: &BipartiteOperator, tols: &ToleranceProfile) -> Result<f64> {
    let sd = schmidt::operator_schmidt(h, tols)?;
    Ok(sum_sq_commutators(&sd.s_ops) + sum_sq_commutators(&sd.e_ops))
}

/// Weight-aware commutator measure used by the search.
///
/// Same as the objective with every factor scaled by its Schmidt weight,
/// divided by ‖H‖⁴. It needs no SVD: with Y_b = Σ_a M_ab B_a (and Z_a
/// likewise on E) the weighted sums equal Σ_{b<b'} ‖[Y_b, Y_b']‖². The
/// result is smooth in H, invariant under local conjugation and scaling,
/// and zero exactly on separable operators.
#[derive(Debug, Clone)]
pub struct MeasureEvaluator {
    d_s: usize,
    d_e: usize,
    bs: Vec<CMat>,
    be: Vec<CMat>,
}

impl MeasureEvaluator {
    pub fn new(d_s: usize, d_e: usize) -> Result<Self> {
        Ok(Self {
            d_s,
            d_e,
            bs: hermitian_basis(d_s)?,
            be: hermitian_basis(d_e)?,
        })
    }

    pub fn measure(&self, h: &CMat) -> f64 {
        let norm_sq = h.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if norm_sq == 0.0 {
            return 0.0;
        }
        let m = coefficient_matrix_with(h, self.d_s, self.d_e, &self.bs, &self.be);
        // identity components commute with everything and are skipped
        let ys: Vec<CMat> = (0..self.be.len())
            .map(|b| mix(&self.bs, |a| m[(a, b)], self.d_s))
            .collect();
        let zs: Vec<CMat> = (0..self.bs.len())
            .map(|a| mix(&self.be, |b| m[(a, b)], self.d_e))
            .collect();
        (sum_sq_commutators(&ys) + sum_sq_commutators(&zs)) / (norm_sq * norm_sq)
    }
}

fn mix(basis: &[CMat], coeff: impl Fn(usize) -> f64, d: usize) -> CMat {
    let mut acc = CMat::zeros(d, d);
    for (k, b) in basis.iter().enumerate().skip(1) {
        let c = coeff(k);
        if c != 0.0 {
            acc += b.scale(c);
        }
    }
    acc
}

pub fn weighted_measure(h: &BipartiteOperator) -> Result<f64> {
    Ok(MeasureEvaluator::new(h.d_s(), h.d_e())?.measure(h.matrix()))
}

/// Family of candidate transformations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnitaryClass {
    /// G = exp(iA), A any traceless Hermitian matrix.
    FullUnitary,
    /// `depth` layers of local unitaries followed by a diagonal two-factor
    /// entangler exp(i Σ θ_ab B_a ⊗ B_b) over traceless diagonal basis
    /// elements.
    TwoFactorCircuit { depth: usize },
}

impl std::str::FromStr for UnitaryClass {
    type Err = SepError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "full" {
            return Ok(UnitaryClass::FullUnitary);
        }
        if let Some(d) = s.strip_prefix("circuit:") {
            let depth: usize = d
                .parse()
                .map_err(|_| SepError::Parse(format!("bad circuit depth {d:?}")))?;
            if depth == 0 {
                return Err(SepError::Parse("circuit depth must be >= 1".into()));
            }
            return Ok(UnitaryClass::TwoFactorCircuit { depth });
        }
        Err(SepError::Parse(format!(
            "unknown class {s:?} (expected full or circuit:<depth>)"
        )))
    }
}

impl std::fmt::Display for UnitaryClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UnitaryClass::FullUnitary => write!(f, "full"),
            UnitaryClass::TwoFactorCircuit { depth } => write!(f, "circuit:{depth}"),
        }
    }
}

/// Maps real parameter vectors to unitaries of a class.
#[derive(Debug, Clone)]
pub struct Parameterization {
    class: UnitaryClass,
    d_s: usize,
    d_e: usize,
    full_basis: Vec<CMat>,
    s_basis: Vec<CMat>,
    e_basis: Vec<CMat>,
    /// Diagonals of the traceless diagonal basis elements per side.
    s_diag: Vec<Vec<f64>>,
    e_diag: Vec<Vec<f64>>,
}

fn traceless_diagonals(basis: &[CMat], d: usize) -> Vec<Vec<f64>> {
    // the last d - 1 elements of the basis are the traceless diagonal ones
    basis[basis.len() - (d - 1)..]
        .iter()
        .map(|b| (0..d).map(|i| b[(i, i)].re).collect())
        .collect()
}

impl Parameterization {
    pub fn new(class: UnitaryClass, d_s: usize, d_e: usize) -> Result<Self> {
        let s_basis = hermitian_basis(d_s)?;
        let e_basis = hermitian_basis(d_e)?;
        let full_basis = match class {
            UnitaryClass::FullUnitary => hermitian_basis(d_s * d_e)?,
            UnitaryClass::TwoFactorCircuit { .. } => Vec::new(),
        };
        Ok(Self {
            class,
            d_s,
            d_e,
            s_diag: traceless_diagonals(&s_basis, d_s),
            e_diag: traceless_diagonals(&e_basis, d_e),
            full_basis,
            s_basis,
            e_basis,
        })
    }

    fn layer_len(&self) -> usize {
        (self.d_s * self.d_s - 1) + (self.d_e * self.d_e - 1) + (self.d_s - 1) * (self.d_e - 1)
    }

    pub fn n_params(&self) -> usize {
        match self.class {
            UnitaryClass::FullUnitary => self.full_basis.len() - 1,
            UnitaryClass::TwoFactorCircuit { depth } => depth * self.layer_len(),
        }
    }

    fn hermitian_from(basis: &[CMat], params: &[f64]) -> CMat {
        let d = basis[0].nrows();
        let mut a = CMat::zeros(d, d);
        for (b, &x) in basis[1..].iter().zip(params) {
            a += b.scale(x);
        }
        a
    }

    pub fn unitary(&self, params: &[f64]) -> CMat {
        match self.class {
            UnitaryClass::FullUnitary => {
                linalg::expm_i_hermitian(&Self::hermitian_from(&self.full_basis, params))
            }
            UnitaryClass::TwoFactorCircuit { depth } => {
                let ns = self.d_s * self.d_s - 1;
                let ne = self.d_e * self.d_e - 1;
                let dim = self.d_s * self.d_e;
                let mut g = linalg::identity(dim);
                for layer in params.chunks(self.layer_len()).take(depth) {
                    let u_s = linalg::expm_i_hermitian(&Self::hermitian_from(
                        &self.s_basis,
                        &layer[..ns],
                    ));
                    let u_e = linalg::expm_i_hermitian(&Self::hermitian_from(
                        &self.e_basis,
                        &layer[ns..ns + ne],
                    ));
                    let theta = &layer[ns + ne..];
                    let mut phases = vec![0.0; dim];
                    for (a, sd) in self.s_diag.iter().enumerate() {
                        for (b, ed) in self.e_diag.iter().enumerate() {
                            let t = theta[a * self.e_diag.len() + b];
                            for i in 0..self.d_s {
                                for j in 0..self.d_e {
                                    phases[i * self.d_e + j] += t * sd[i] * ed[j];
                                }
                            }
                        }
                    }
                    let local = linalg::kron(&u_s, &u_e);
                    let mut layer_u = local;
                    for (i, mut row) in layer_u.row_iter_mut().enumerate() {
                        row *= C64::from_polar(1.0, phases[i]);
                    }
                    g = layer_u * g;
                }
                g
            }
        }
    }
}

/// Budget and seeding for [`search_separating_unitary`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Objective evaluations allowed per restart.
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Weighted measure at or below which a candidate counts as separating.
    pub success_threshold: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            budget: 20_000,
            restarts: 10,
            seed: 0,
            success_threshold: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidateKind {
    GlobalUnitary,
    FactorPermutationAndCut,
}

/// A proposed change of S/E frame and how separable it leaves `h`.
#[derive(Debug, Clone)]
pub struct FactorizationCandidate {
    pub kind: CandidateKind,
    pub unitary: Option<CMat>,
    pub perm_and_cut: Option<(Vec<usize>, usize)>,
    /// Weighted measure of the transformed operator.
    pub measure: f64,
    pub report: SeparabilityReport,
    pub success: bool,
    pub evaluations: usize,
    /// Index of the restart that produced the candidate.
    pub restart: usize,
    pub seed: u64,
    pub transformed: BipartiteOperator,
}

#[derive(Serialize)]
struct CandidateJson<'a> {
    kind: CandidateKind,
    success: bool,
    measure: f64,
    evaluations: usize,
    restart: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    unitary: Option<MatrixFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    perm_and_cut: Option<&'a (Vec<usize>, usize)>,
    report: &'a SeparabilityReport,
    transformed: MatrixFile,
}

impl FactorizationCandidate {
    pub fn to_json_value(&self) -> serde_json::Value {
        let dims = self.transformed.space().dims().to_vec();
        let cut = self.transformed.cut();
        let json = CandidateJson {
            kind: self.kind,
            success: self.success,
            measure: self.measure,
            evaluations: self.evaluations,
            restart: self.restart,
            seed: self.seed,
            unitary: self
                .unitary
                .as_ref()
                .map(|u| MatrixFile::from_matrix(u, dims.clone(), cut)),
            perm_and_cut: self.perm_and_cut.as_ref(),
            report: &self.report,
            transformed: MatrixFile::from_operator(&self.transformed),
        };
        serde_json::to_value(json).expect("candidate serializes")
    }
}

struct RestartOutcome {
    restart: usize,
    g: CMat,
    measure: f64,
    evals: usize,
}

fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed ^ (restart as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// Direct search for a unitary G in `class` making G H G† separable.
///
/// Restarts run independently (restart 0 from the identity, the rest from
/// seeded random points); the best measure wins, ties going to the
/// earliest restart. For the full class, a successful candidate is snapped
/// onto the nearest exactly diagonal frame.
pub fn search_separating_unitary(
    h: &BipartiteOperator,
    class: UnitaryClass,
    config: &SearchConfig,
    tols: &ToleranceProfile,
) -> Result<FactorizationCandidate> {
    if config.budget == 0 {
        return Err(SepError::InvalidDimensions(
            "search budget must be >= 1".into(),
        ));
    }
    let (d_s, d_e) = (h.d_s(), h.d_e());
    let evaluator = MeasureEvaluator::new(d_s, d_e)?;
    let (_, report) = schmidt::analyze(h, tols)?;
    if report.is_separable() {
        return Ok(FactorizationCandidate {
            kind: CandidateKind::GlobalUnitary,
            unitary: Some(linalg::identity(h.dim())),
            perm_and_cut: None,
            measure: evaluator.measure(h.matrix()),
            report,
            success: true,
            evaluations: 0,
            restart: 0,
            seed: config.seed,
            transformed: h.clone(),
        });
    }

    let param = Parameterization::new(class, d_s, d_e)?;
    let n = param.n_params();
    let target = (config.success_threshold * 1e-8).max(1e-28);
    let nm = NelderMead {
        max_evals: config.budget,
        initial_step: 0.5,
        target,
        f_tol: 1e-12,
    };

    let outcomes: Vec<RestartOutcome> = (0..config.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let x0: Vec<f64> = if r == 0 {
                vec![0.0; n]
            } else {
                let mut rng = rng_from_seed(restart_seed(config.seed, r));
                (0..n)
                    .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                    .collect()
            };
            let objective = |x: &[f64]| {
                let g = param.unitary(x);
                evaluator.measure(&(&g * h.matrix() * g.adjoint()))
            };
            let min = nm.minimize(objective, &x0);
            RestartOutcome {
                restart: r,
                g: param.unitary(&min.x),
                measure: min.value,
                evals: min.evals,
            }
        })
        .collect();

    let evaluations = outcomes.iter().map(|o| o.evals).sum();
    let best = outcomes
        .into_iter()
        .min_by(|a, b| {
            a.measure
                .total_cmp(&b.measure)
                .then(a.restart.cmp(&b.restart))
        })
        .expect("at least one restart");

    let mut g = best.g;
    if class == UnitaryClass::FullUnitary && best.measure <= config.success_threshold {
        if let Some(snapped) = snap_to_diagonal_frame(h, &g, tols) {
            g = snapped;
        }
    }
    let transformed = global_conjugate(h, &g)?;
    let measure = evaluator.measure(transformed.matrix());
    let (_, report) = schmidt::analyze(&transformed, tols)?;
    Ok(FactorizationCandidate {
        kind: CandidateKind::GlobalUnitary,
        unitary: Some(g),
        perm_and_cut: None,
        success: measure <= config.success_threshold,
        measure,
        report,
        evaluations,
        restart: best.restart,
        seed: config.seed,
        transformed,
    })
}

/// Refines a nearly separating G into G' with G' H G'† exactly diagonal.
///
/// The weighted Schmidt factors of G H G† are jointly diagonalized per side,
/// which gives a product basis W in which the operator is nearly diagonal;
/// its eigenvectors are then matched to the nearest basis states.
fn snap_to_diagonal_frame(
    h: &BipartiteOperator,
    g: &CMat,
    tols: &ToleranceProfile,
) -> Option<CMat> {
    let transformed = global_conjugate(h, g).ok()?;
    let loose = ToleranceProfile {
        tol_rank: 1e-14,
        ..*tols
    };
    let sd = schmidt::operator_schmidt(&transformed, &loose).ok()?;
    let weighted = |ops: &[CMat]| -> Vec<CMat> {
        ops.iter()
            .zip(&sd.weights)
            .map(|(o, w)| o.scale(*w))
            .collect()
    };
    let s_family = weighted(&sd.s_ops);
    let e_family = weighted(&sd.e_ops);
    let u_s = jointdiag::jacobi_joint_diagonalize(
        &s_family,
        &jointdiag::random_combination_basis(&s_family, sd.d_s, 0),
        200,
    );
    let u_e = jointdiag::jacobi_joint_diagonalize(
        &e_family,
        &jointdiag::random_combination_basis(&e_family, sd.d_e, 1),
        200,
    );
    let w = linalg::kron(&u_s, &u_e);
    let near_diag = w.adjoint() * transformed.matrix() * &w;
    let (_, v) = linalg::eigh(&near_diag);

    let dim = v.nrows();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(dim * dim);
    for k in 0..dim {
        for j in 0..dim {
            pairs.push((v[(k, j)].norm_sqr(), k, j));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut slot_of = vec![usize::MAX; dim];
    let mut row_used = vec![false; dim];
    for (_, k, j) in pairs {
        if slot_of[j] == usize::MAX && !row_used[k] {
            slot_of[j] = k;
            row_used[k] = true;
        }
    }
    let mut basis = CMat::zeros(dim, dim);
    let wv = &w * &v;
    for (j, &k) in slot_of.iter().enumerate() {
        basis.set_column(k, &wv.column(j));
    }
    let snapped = basis.adjoint() * g;
    (linalg::unitary_deviation(&snapped) <= 1e-10).then_some(snapped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hadamard, identity, kron, max_abs_diff, pauli_z};
    use crate::models::{random_hermitian_pair_space, random_unitary, spin_pair, SpinPairKind};
    use crate::schmidt::{analyze, Verdict};

    #[test]
    fn local_conjugation_examples() {
        let tols = ToleranceProfile::default();
        let ising = spin_pair(SpinPairKind::IsingTransverse { field: 1.0 });
        let same = local_conjugate(&ising, &identity(2), &identity(2)).unwrap();
        assert!(max_abs_diff(same.matrix(), ising.matrix()) < 1e-15);

        let rotated = local_conjugate(&ising, &hadamard(), &hadamard()).unwrap();
        let (sd, rep) = analyze(&rotated, &tols).unwrap();
        assert_eq!(rep.verdict, Verdict::NonSeparable);
        for w in sd.weights {
            assert!((w - 2.0).abs() < 1e-12);
        }

        let zz = spin_pair(SpinPairKind::ProductZZ);
        let xz = local_conjugate(&zz, &hadamard(), &identity(2)).unwrap();
        let expected = kron(&linalg::pauli_x(), &pauli_z());
        assert!(max_abs_diff(xz.matrix(), &expected) < 1e-15);
        let (sd, rep) = analyze(&xz, &tols).unwrap();
        assert_eq!((sd.rank(), rep.verdict), (1, Verdict::Separable));
    }

    #[test]
    fn non_unitary_rejected() {
        let ising = spin_pair(SpinPairKind::Heisenberg);
        let err = local_conjugate(&ising, &identity(2).scale(1.1), &identity(2)).unwrap_err();
        assert!(matches!(err, SepError::NotUnitary { .. }));
        assert!(global_conjugate(&ising, &identity(4).scale(2.0)).is_err());
    }

    #[test]
    fn eigenbasis_conjugation_is_separable() {
        let tols = ToleranceProfile::default();
        for seed in 0..5 {
            let h = random_hermitian_pair_space(2, 3, seed).unwrap();
            let (_, v) = linalg::eigh(h.matrix());
            let diag = global_conjugate(&h, &v.adjoint()).unwrap();
            assert!(analyze(&diag, &tols).unwrap().1.is_separable());
            assert!(nonseparability_objective(&diag, &tols).unwrap() < 1e-12);
        }
    }

    #[test]
    fn planted_frame_undone_by_inverse() {
        let tols = ToleranceProfile::default();
        let mut rng = rng_from_seed(8);
        let ha = crate::models::random_hermitian(2, &mut rng);
        let hb = crate::models::random_hermitian(2, &mut rng);
        let sep = kron(&ha, &identity(2)) + kron(&identity(2), &hb);
        let g0 = random_unitary(4, &mut rng);
        let h = BipartiteOperator::from_pair(
            linalg::symmetrize(&(&g0 * &sep * g0.adjoint())),
            2,
            2,
            1e-10,
        )
        .unwrap();
        let back = global_conjugate(&h, &g0.adjoint()).unwrap();
        let (_, rep) = analyze(&back, &tols).unwrap();
        assert!(rep.is_separable());
        assert!(rep.max_comm() <= 1e-10);
    }

    #[test]
    fn objective_values() {
        let tols = ToleranceProfile::default();
        let zz = spin_pair(SpinPairKind::ProductZZ);
        assert_eq!(nonseparability_objective(&zz, &tols).unwrap(), 0.0);
        let ising = spin_pair(SpinPairKind::IsingTransverse { field: 1.0 });
        assert!((nonseparability_objective(&ising, &tols).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_measure_matches_svd_form() {
        // Σ_{k<l} w_k² w_l² ‖[C_k, C_l]‖² (both sides) / ‖H‖⁴ via the SVD
        let tols = ToleranceProfile::default();
        for seed in 0..5 {
            let h = random_hermitian_pair_space(2, 3, seed).unwrap();
            let sd = schmidt::operator_schmidt(&h, &tols).unwrap();
            let weighted = |ops: &[CMat]| -> Vec<CMat> {
                ops.iter()
                    .zip(&sd.weights)
                    .map(|(o, w)| o.scale(*w))
                    .collect()
            };
            let expected = (sum_sq_commutators(&weighted(&sd.s_ops))
                + sum_sq_commutators(&weighted(&sd.e_ops)))
                / h.fro_norm().powi(4);
            let got = weighted_measure(&h).unwrap();
            assert!(
                (got - expected).abs() < 1e-12 * expected.max(1.0),
                "{got} vs {expected}"
            );
        }
    }

    #[test]
    fn objective_invariant_under_local_conjugation() {
        let tols = ToleranceProfile::default();
        let mut rng = rng_from_seed(17);
        for seed in 0..10 {
            let h = random_hermitian_pair_space(2, 2, seed).unwrap();
            let c = local_conjugate(
                &h,
                &random_unitary(2, &mut rng),
                &random_unitary(2, &mut rng),
            )
            .unwrap();
            let a = nonseparability_objective(&h, &tols).unwrap();
            let b = nonseparability_objective(&c, &tols).unwrap();
            assert!((a - b).abs() < 1e-9);
            assert!((weighted_measure(&h).unwrap() - weighted_measure(&c).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn class_parsing() {
        assert_eq!(
            "full".parse::<UnitaryClass>().unwrap(),
            UnitaryClass::FullUnitary
        );
        assert_eq!(
            "circuit:3".parse::<UnitaryClass>().unwrap(),
            UnitaryClass::TwoFactorCircuit { depth: 3 }
        );
        assert!("circuit:0".parse::<UnitaryClass>().is_err());
        assert!("ring".parse::<UnitaryClass>().is_err());
    }

    #[test]
    fn parameterizations_are_unitary() {
        let mut rng = rng_from_seed(4);
        for class in [
            UnitaryClass::FullUnitary,
            UnitaryClass::TwoFactorCircuit { depth: 2 },
        ] {
            let p = Parameterization::new(class, 2, 3).unwrap();
            let x: Vec<f64> = (0..p.n_params())
                .map(|_| rng.random_range(-2.0..2.0))
                .collect();
            assert!(linalg::unitary_deviation(&p.unitary(&x)) < 1e-12);
            assert!(max_abs_diff(&p.unitary(&vec![0.0; p.n_params()]), &identity(6)) < 1e-14);
        }
    }

    #[test]
    fn separable_input_needs_no_search() {
        let zz = spin_pair(SpinPairKind::ProductZZ);
        let c = search_separating_unitary(
            &zz,
            UnitaryClass::FullUnitary,
            &SearchConfig::default(),
            &Default::default(),
        )
        .unwrap();
        assert!(c.success);
        assert_eq!(c.evaluations, 0);
        assert_eq!(c.unitary.unwrap(), identity(4));
    }

    #[test]
    fn ising_full_search_finds_separable_frame() {
        let tols = ToleranceProfile::default();
        let ising = spin_pair(SpinPairKind::IsingTransverse { field: 1.0 });
        let cfg = SearchConfig {
            restarts: 3,
            seed: 1,
            ..Default::default()
        };
        let c = search_separating_unitary(&ising, UnitaryClass::FullUnitary, &cfg, &tols).unwrap();
        assert!(c.success, "measure {}", c.measure);
        assert!(c.report.is_separable());
        let (a, _) = linalg::eigh(ising.matrix());
        let (b, _) = linalg::eigh(c.transformed.matrix());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn circuit_search_recovers_planted_circuit() {
        let tols = ToleranceProfile::default();
        let class = UnitaryClass::TwoFactorCircuit { depth: 1 };
        let p = Parameterization::new(class, 2, 2).unwrap();
        let mut rng = rng_from_seed(5);
        let x: Vec<f64> = (0..p.n_params())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let g0 = p.unitary(&x);
        let sep =
            kron(&linalg::pauli_x(), &identity(2)) + kron(&identity(2), &pauli_z().scale(0.7));
        let h = BipartiteOperator::from_pair(
            linalg::symmetrize(&(g0.adjoint() * &sep * &g0)),
            2,
            2,
            1e-10,
        )
        .unwrap();
        let cfg = SearchConfig {
            restarts: 4,
            seed: 2,
            ..Default::default()
        };
        let c = search_separating_unitary(&h, class, &cfg, &tols).unwrap();
        assert!(c.success, "measure {}", c.measure);
    }
}
