//! Simultaneous diagonalization of commuting Hermitian families.

use nalgebra::Matrix3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, CMat, C64};

/// Eigenbasis of a random real combination of `ops`.
///
/// For an exactly commuting family the eigenspaces of a generic combination
/// are the joint eigenspaces, so the returned unitary diagonalizes every
/// member.
pub fn random_combination_basis(ops: &[CMat], dim: usize, seed: u64) -> CMat {
    if ops.is_empty() {
        return linalg::identity(dim);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut combo = CMat::zeros(dim, dim);
    for op in ops {
        let c: f64 = rng.random_range(-1.0..1.0);
        combo += op.scale(c);
    }
    linalg::eigh(&combo).1
}

/// Sum of squared off-diagonal Frobenius norms of `v^dagger A_k v`.
pub fn joint_offdiag(ops: &[CMat], v: &CMat) -> f64 {
    ops.iter()
        .map(|a| linalg::offdiag_norm(&(v.adjoint() * a * v)).powi(2))
        .sum()
}

/// Jacobi-style joint diagonalization of Hermitian matrices.
///
/// Starts from `start` and applies complex Givens rotations chosen to
/// maximize the spread of the diagonal entries over the whole family.
/// Returns the accumulated unitary.
pub fn jacobi_joint_diagonalize(ops: &[CMat], start: &CMat, max_sweeps: usize) -> CMat {
    let n = start.nrows();
    let mut v = start.clone();
    if ops.is_empty() || n < 2 {
        return v;
    }
    let mut mats: Vec<CMat> = ops.iter().map(|a| start.adjoint() * a * start).collect();
    let threshold = 1e-15;

    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let mut g = Matrix3::<f64>::zeros();
                for a in &mats {
                    let h = nalgebra::Vector3::new(
                        a[(p, p)].re - a[(q, q)].re,
                        2.0 * a[(p, q)].re,
                        -2.0 * a[(p, q)].im,
                    );
                    g += h * h.transpose();
                }
                let eig = g.symmetric_eigen();
                let top = eig.eigenvalues.imax();
                let mut w = eig.eigenvectors.column(top).into_owned();
                if w[0] < 0.0 {
                    w = -w;
                }
                // w = (cos 2θ, sin 2θ cos φ, sin 2θ sin φ)
                let c = ((1.0 + w[0]) / 2.0).sqrt();
                let s = C64::new(w[1], w[2]) / (2.0 * c);
                if s.norm() <= threshold {
                    continue;
                }
                rotated = true;
                // R = [[c, -s*], [s, c]] on rows/columns p, q
                for a in mats.iter_mut() {
                    apply_rotation(a, p, q, c, s);
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * c + vq * s;
                    v[(i, q)] = -vp * s.conj() + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    v
}

/// A <- R^dagger A R with R the (p, q) rotation [[c, -s*], [s, c]].
fn apply_rotation(a: &mut CMat, p: usize, q: usize, c: f64, s: C64) {
    let n = a.nrows();
    // columns: A R
    for i in 0..n {
        let ap = a[(i, p)];
        let aq = a[(i, q)];
        a[(i, p)] = ap * c + aq * s;
        a[(i, q)] = -ap * s.conj() + aq * c;
    }
    // rows: R^dagger (A R)
    for j in 0..n {
        let ap = a[(p, j)];
        let aq = a[(q, j)];
        a[(p, j)] = ap * c + aq * s.conj();
        a[(q, j)] = -ap * s + aq * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::random_unitary;

    fn commuting_family(n: usize, k: usize, seed: u64) -> (Vec<CMat>, CMat) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unitary(n, &mut rng);
        let ops = (0..k)
            .map(|_| {
                let d: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                &u * linalg::from_real_diagonal(&d) * u.adjoint()
            })
            .collect();
        (ops, u)
    }

    #[test]
    fn random_combination_diagonalizes_commuting_family() {
        let (ops, _) = commuting_family(5, 3, 1);
        let v = random_combination_basis(&ops, 5, 9);
        assert!(joint_offdiag(&ops, &v) < 1e-24);
    }

    #[test]
    fn jacobi_recovers_joint_basis_from_identity() {
        let (ops, _) = commuting_family(4, 3, 2);
        let v = jacobi_joint_diagonalize(&ops, &linalg::identity(4), 100);
        assert!(linalg::unitary_deviation(&v) < 1e-12);
        assert!(
            joint_offdiag(&ops, &v) < 1e-24,
            "{}",
            joint_offdiag(&ops, &v)
        );
    }

    #[test]
    fn jacobi_handles_degenerate_members() {
        // one member has a doubly degenerate eigenvalue
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(3, &mut rng);
        let a = &u * linalg::from_real_diagonal(&[1.0, 1.0, -2.0]) * u.adjoint();
        let b = &u * linalg::from_real_diagonal(&[0.5, -0.3, 0.1]) * u.adjoint();
        let ops = vec![a, b];
        let v = jacobi_joint_diagonalize(&ops, &linalg::identity(3), 100);
        assert!(joint_offdiag(&ops, &v) < 1e-24);
    }
}
