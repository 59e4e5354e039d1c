//! Test and demonstration Hamiltonians.
//!
//! Every constructor is a deterministic function of its parameters and seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{self, CMat, CVec, C64};
use crate::operator::{BipartiteOperator, ToleranceProfile};
use crate::schmidt::{self, hermitian_basis};
use crate::search::weighted_measure;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(gaussian(rng), gaussian(rng))
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// R's diagonal absorbed into Q.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let z = CMat::from_fn(n, n, |_, _| complex_gaussian(rng));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Exactly Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(gaussian(rng), 0.0);
        for j in i + 1..n {
            let z = complex_gaussian(rng).scale(std::f64::consts::FRAC_1_SQRT_2);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Normalized random pure state.
pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    let v = CVec::from_fn(n, |_, _| complex_gaussian(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// Random Hermitian operator on `d_s ⊗ d_e` scaled to unit Frobenius norm.
pub fn random_hermitian_pair_space(d_s: usize, d_e: usize, seed: u64) -> Result<BipartiteOperator> {
    let mut rng = rng_from_seed(seed);
    let mut m = random_hermitian(d_s * d_e, &mut rng);
    let norm = linalg::fro_norm(&m);
    m.unscale_mut(norm);
    BipartiteOperator::from_pair(m, d_s, d_e, 0.0)
}

/// Random operator diagonal in a random product basis (separable by
/// construction), unit Frobenius norm.
pub fn random_separable_pair_space(d_s: usize, d_e: usize, seed: u64) -> Result<BipartiteOperator> {
    let mut rng = rng_from_seed(seed);
    let u = linalg::kron(
        &random_unitary(d_s, &mut rng),
        &random_unitary(d_e, &mut rng),
    );
    let diag: Vec<f64> = (0..d_s * d_e).map(|_| gaussian(&mut rng)).collect();
    let mut m = &u * linalg::from_real_diagonal(&diag) * u.adjoint();
    let norm = linalg::fro_norm(&m);
    m.unscale_mut(norm);
    BipartiteOperator::from_pair(linalg::symmetrize(&m), d_s, d_e, 1e-12)
}

/// Σ_i |i⟩⟨i| ⊗ h_i with random Hermitian h_i.
///
/// With `commuting`, all h_i are diagonal in one random common basis.
pub fn measurement_model(
    d_s: usize,
    d_e: usize,
    commuting: bool,
    seed: u64,
) -> Result<BipartiteOperator> {
    let mut rng = rng_from_seed(seed);
    let common = random_unitary(d_e, &mut rng);
    let hs: Vec<CMat> = (0..d_s)
        .map(|_| {
            if commuting {
                let d: Vec<f64> = (0..d_e).map(|_| gaussian(&mut rng)).collect();
                linalg::symmetrize(&(&common * linalg::from_real_diagonal(&d) * common.adjoint()))
            } else {
                random_hermitian(d_e, &mut rng)
            }
        })
        .collect();
    measurement_model_from(&hs)
}

/// Σ_i |i⟩⟨i| ⊗ h_i for given conditional Hamiltonians.
pub fn measurement_model_from(hs: &[CMat]) -> Result<BipartiteOperator> {
    let d_s = hs.len();
    let d_e = hs.first().map_or(0, |h| h.nrows());
    let mut m = CMat::zeros(d_s * d_e, d_s * d_e);
    for (i, h) in hs.iter().enumerate() {
        m.view_mut((i * d_e, i * d_e), (d_e, d_e)).copy_from(h);
    }
    BipartiteOperator::from_pair(m, d_s, d_e, 1e-10)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpinPairKind {
    /// σx⊗σx + field·(σz⊗I + I⊗σz)
    IsingTransverse { field: f64 },
    /// Σ_a σa⊗σa
    Heisenberg,
    /// σz⊗σz
    ProductZZ,
}

pub fn spin_pair(kind: SpinPairKind) -> BipartiteOperator {
    use linalg::{identity, kron, pauli_x, pauli_y, pauli_z};
    let m = match kind {
        SpinPairKind::IsingTransverse { field } => {
            kron(&pauli_x(), &pauli_x())
                + (kron(&pauli_z(), &identity(2)) + kron(&identity(2), &pauli_z())).scale(field)
        }
        SpinPairKind::Heisenberg => {
            kron(&pauli_x(), &pauli_x())
                + kron(&pauli_y(), &pauli_y())
                + kron(&pauli_z(), &pauli_z())
        }
        SpinPairKind::ProductZZ => kron(&pauli_z(), &pauli_z()),
    };
    BipartiteOperator::from_pair(m, 2, 2, 0.0).expect("Pauli products are Hermitian")
}

/// Same operator seen in two frames: a mixed one (`h`) and the decoupled one
/// (`h_separable`), related by `h = g_true · h_separable · g_true†`.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub h: BipartiteOperator,
    pub g_true: CMat,
    pub h_separable: BipartiteOperator,
    pub h_a: CMat,
    pub h_b: CMat,
    pub seed: u64,
    pub dims: (usize, usize),
    /// Draws rejected because the mixed frame came out (nearly) separable.
    pub resamples: usize,
}

/// Mixed frames whose weighted measure falls below this are redrawn.
pub const ACCIDENTAL_SEPARABILITY: f64 = 0.01;

const MAX_RESAMPLES: usize = 64;

/// Random nondegenerate Hermitian: Gaussian matrix, then eigenvalues pushed
/// apart to a minimum gap.
fn random_nondegenerate<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let u = random_unitary(d, rng);
    let mut vals: Vec<f64> = (0..d).map(|_| gaussian(rng)).collect();
    vals.sort_by(f64::total_cmp);
    for k in 1..d {
        if vals[k] - vals[k - 1] < 0.1 {
            vals[k] = vals[k - 1] + 0.1;
        }
    }
    linalg::symmetrize(&(&u * linalg::from_real_diagonal(&vals) * u.adjoint()))
}

/// Product of non-product rotations exp(iθ·c·B_a⊗B_b) between two d-level
/// factors, with B_a, B_b traceless Hermitian basis elements.
pub fn two_site_mixer<R: Rng + ?Sized>(d: usize, rotations: usize, rng: &mut R) -> CMat {
    let basis = hermitian_basis(d).expect("d >= 2");
    let mut g = linalg::identity(d * d);
    for _ in 0..rotations {
        let a = rng.random_range(1..basis.len());
        let b = rng.random_range(1..basis.len());
        let theta: f64 = rng.random_range(0.3..1.2) * std::f64::consts::PI;
        let generator = linalg::kron(&basis[a], &basis[b]).scale(theta * d as f64 / 2.0);
        g = linalg::expm_i_hermitian(&generator) * g;
    }
    g
}

/// Finite-dimensional planted analog of a two-body problem that decouples
/// after a global change of variables: H_A⊗I + I⊗H_B mixed by a seeded
/// two-site unitary.
pub fn hydrogen_analog(d: usize, seed: u64) -> Result<PlantedInstance> {
    let tols = ToleranceProfile::default();
    let mut resamples = 0;
    loop {
        let attempt_seed =
            seed.wrapping_add((resamples as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = rng_from_seed(attempt_seed);
        let h_a = random_nondegenerate(d, &mut rng);
        let h_b = random_nondegenerate(d, &mut rng);
        let sep =
            linalg::kron(&h_a, &linalg::identity(d)) + linalg::kron(&linalg::identity(d), &h_b);
        let g_true = two_site_mixer(d, 4, &mut rng);
        let mixed = linalg::symmetrize(&(&g_true * &sep * g_true.adjoint()));
        let h = BipartiteOperator::from_pair(mixed, d, d, 1e-10)?;
        let h_separable = BipartiteOperator::from_pair(sep, d, d, 0.0)?;

        let measure = weighted_measure(&h)?;
        if measure < ACCIDENTAL_SEPARABILITY && resamples < MAX_RESAMPLES {
            resamples += 1;
            continue;
        }
        let back = g_true.adjoint() * h.matrix() * &g_true;
        let drift = linalg::max_abs_diff(&back, h_separable.matrix());
        assert!(
            drift <= 1e-12 * h_separable.fro_norm().max(1.0),
            "planted frame drift {drift:e}"
        );
        let (_, report) = schmidt::analyze(&h_separable, &tols)?;
        assert!(report.is_separable(), "decoupled frame must be separable");
        return Ok(PlantedInstance {
            h,
            g_true,
            h_separable,
            h_a,
            h_b,
            seed,
            dims: (d, d),
            resamples,
        });
    }
}
