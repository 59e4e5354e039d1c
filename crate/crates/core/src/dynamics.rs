//! Exact reduced dynamics under a time-independent interaction: the
//! nondemolition check, decoherence factors and pointer-diagonal
//! conservation.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SepError};
use crate::linalg::{self, CMat, CVec, C64};
use crate::models::{random_state, rng_from_seed};
use crate::operator::{trace_out_environment, BipartiteOperator, ToleranceProfile};
use crate::schmidt::{spectral_form, PointerBases};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NondemolitionReport {
    pub max_commutator: f64,
    pub passes: bool,
}

/// Largest pairwise commutator norm within a sequence of interactions
/// sharing one factor space and cut.
pub fn nondemolition_check(
    seq: &[BipartiteOperator],
    tols: &ToleranceProfile,
) -> Result<NondemolitionReport> {
    if let Some(first) = seq.first() {
        for op in &seq[1..] {
            if op.space().dims() != first.space().dims() || op.cut() != first.cut() {
                return Err(SepError::InvalidDimensions(
                    "interaction sequence mixes factor spaces".into(),
                ));
            }
        }
    }
    let mut max_commutator = 0.0_f64;
    for (k, a) in seq.iter().enumerate() {
        for b in &seq[k + 1..] {
            max_commutator = max_commutator.max(linalg::fro_norm(&linalg::commutator(
                a.matrix(),
                b.matrix(),
            )));
        }
    }
    Ok(NondemolitionReport {
        max_commutator,
        passes: max_commutator <= tols.tol_commute,
    })
}

/// Reduced-state history in a designated S basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceTrace {
    pub times: Vec<f64>,
    /// |ρ_S,ij(t)|
    pub coherence: Vec<Vec<Vec<f64>>>,
    /// ρ_S,ii(t)
    pub diagonals: Vec<Vec<f64>>,
    /// Full reduced states, same basis.
    pub states: Vec<CMat>,
}

#[derive(Serialize)]
struct TraceRow<'a> {
    t: f64,
    diagonals: &'a [f64],
    coherence: &'a [Vec<f64>],
}

impl DecoherenceTrace {
    /// One JSON object per time: `{t, diagonals, coherence}`.
    pub fn rows_json(&self) -> serde_json::Value {
        let rows: Vec<TraceRow> = self
            .times
            .iter()
            .zip(&self.diagonals)
            .zip(&self.coherence)
            .map(|((&t, d), c)| TraceRow {
                t,
                diagonals: d,
                coherence: c,
            })
            .collect();
        serde_json::to_value(rows).expect("trace rows serialize")
    }
}

/// Evenly spaced sample times, inclusive of both ends.
pub fn linspace(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..steps)
            .map(|k| start + (stop - start) * k as f64 / (steps - 1) as f64)
            .collect(),
    }
}

fn check_density(rho: &CMat, d: usize) -> Result<()> {
    if rho.shape() != (d, d) {
        return Err(SepError::InvalidState(format!(
            "density matrix is {:?}, expected {d}x{d}",
            rho.shape()
        )));
    }
    if linalg::hermitian_deviation(rho) > 1e-10 {
        return Err(SepError::InvalidState(
            "density matrix is not Hermitian".into(),
        ));
    }
    let tr = linalg::trace(rho);
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(SepError::InvalidState(format!("trace {tr} != 1")));
    }
    let (vals, _) = linalg::eigh(rho);
    if vals.first().is_some_and(|&v| v < -1e-10) {
        return Err(SepError::InvalidState(
            "density matrix is not positive".into(),
        ));
    }
    Ok(())
}

fn check_pure(chi: &CVec, d: usize) -> Result<()> {
    if chi.len() != d {
        return Err(SepError::InvalidState(format!(
            "environment state has length {}, expected {d}",
            chi.len()
        )));
    }
    if (chi.norm() - 1.0).abs() > 1e-10 {
        return Err(SepError::InvalidState(format!(
            "environment state norm {} != 1",
            chi.norm()
        )));
    }
    Ok(())
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(SepError::InvalidState(
            "times must be finite and sorted".into(),
        ));
    }
    Ok(())
}

/// exp(-iHt) evaluated through a cached eigendecomposition.
pub struct Propagator {
    values: Vec<f64>,
    vectors: CMat,
}

impl Propagator {
    pub fn new(h: &CMat) -> Self {
        let (values, vectors) = linalg::eigh(h);
        Self { values, vectors }
    }

    pub fn unitary(&self, t: f64) -> CMat {
        linalg::evolution_from_eigh(&self.values, &self.vectors, t)
    }

    pub fn evolve(&self, rho: &CMat, t: f64) -> CMat {
        let u = self.unitary(t);
        &u * rho * u.adjoint()
    }
}

/// Evolves ρ_S(0) ⊗ |χ⟩⟨χ| exactly and traces out the environment.
///
/// `basis` (columns = S basis states) selects the frame of the reported
/// reduced states; the computational basis when `None`.
pub fn evolve_reduced(
    h: &BipartiteOperator,
    rho_s0: &CMat,
    chi_e: &CVec,
    times: &[f64],
    basis: Option<&CMat>,
) -> Result<DecoherenceTrace> {
    let (d_s, d_e) = (h.d_s(), h.d_e());
    check_density(rho_s0, d_s)?;
    check_pure(chi_e, d_e)?;
    check_times(times)?;
    if let Some(b) = basis {
        if b.shape() != (d_s, d_s) {
            return Err(SepError::InvalidDimensions(
                "S basis has the wrong shape".into(),
            ));
        }
    }
    let rho0 = linalg::kron(rho_s0, &linalg::projector(chi_e));
    let prop = Propagator::new(h.matrix());

    let mut trace = DecoherenceTrace {
        times: times.to_vec(),
        coherence: Vec::with_capacity(times.len()),
        diagonals: Vec::with_capacity(times.len()),
        states: Vec::with_capacity(times.len()),
    };
    for &t in times {
        let mut red = trace_out_environment(&prop.evolve(&rho0, t), d_s, d_e)?;
        if let Some(b) = basis {
            red = b.adjoint() * red * b;
        }
        trace
            .diagonals
            .push((0..d_s).map(|i| red[(i, i)].re).collect());
        trace.coherence.push(
            (0..d_s)
                .map(|i| (0..d_s).map(|j| red[(i, j)].norm()).collect())
                .collect(),
        );
        trace.states.push(red);
    }
    Ok(trace)
}

/// Conditional environment Hamiltonians h_i = ⟨φ_i| H |φ_i⟩ for the S
/// pointer states φ_i.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalHamiltonians {
    pub h_list: Vec<CMat>,
}

impl ConditionalHamiltonians {
    pub fn new(h_list: Vec<CMat>) -> Result<Self> {
        let d = h_list.first().map_or(0, |h| h.nrows());
        for h in &h_list {
            if h.shape() != (d, d) {
                return Err(SepError::InvalidDimensions(
                    "conditional Hamiltonians differ in shape".into(),
                ));
            }
            let max_dev = linalg::hermitian_deviation(h);
            if max_dev > 1e-10 {
                return Err(SepError::NotHermitian { max_dev });
            }
        }
        Ok(Self { h_list })
    }

    /// Extracts h_i in the S pointer basis of `pb`.
    ///
    /// Requires every S-projector of the spectral form to be rank one and
    /// Σ_i |φ_i⟩⟨φ_i| ⊗ h_i to reproduce H.
    pub fn from_pointer_bases(
        h: &BipartiteOperator,
        pb: &PointerBases,
        tols: &ToleranceProfile,
    ) -> Result<Self> {
        let sf = spectral_form(h, pb, tols)?;
        if let Some((index, block)) = sf.s_blocks.iter().enumerate().find(|(_, b)| b.len() > 1) {
            return Err(SepError::DegeneratePointerSector {
                index,
                rank: block.len(),
            });
        }
        let (d_s, d_e) = (h.d_s(), h.d_e());
        let w = linalg::kron(&pb.u_s, &linalg::identity(d_e));
        let rotated = w.adjoint() * h.matrix() * &w;
        let h_list: Vec<CMat> = (0..d_s)
            .map(|i| linalg::symmetrize(&rotated.view((i * d_e, i * d_e), (d_e, d_e)).into_owned()))
            .collect();

        let mut rebuilt = CMat::zeros(d_s * d_e, d_s * d_e);
        for (i, hi) in h_list.iter().enumerate() {
            let phi = pb.u_s.column(i).into_owned();
            rebuilt += linalg::kron(&linalg::projector(&phi), hi);
        }
        let residual = linalg::fro_norm(&(rebuilt - h.matrix()));
        let threshold = tols.tol_recon * h.fro_norm();
        if residual > threshold {
            return Err(SepError::DiagonalizationFailed {
                residual,
                threshold,
            });
        }
        Self::new(h_list)
    }
}

/// z_ij(t) = ⟨χ| e^{+i h_j t} e^{-i h_i t} |χ⟩, one matrix per time.
pub fn decoherence_factors(
    ch: &ConditionalHamiltonians,
    chi_e: &CVec,
    times: &[f64],
) -> Result<Vec<CMat>> {
    let n = ch.h_list.len();
    if let Some(h0) = ch.h_list.first() {
        check_pure(chi_e, h0.nrows())?;
    }
    check_times(times)?;
    let props: Vec<Propagator> = ch.h_list.iter().map(Propagator::new).collect();
    Ok(times
        .iter()
        .map(|&t| {
            let psi: Vec<CVec> = props.iter().map(|p| p.unitary(t) * chi_e).collect();
            CMat::from_fn(n, n, |i, j| {
                if i == j {
                    C64::new(1.0, 0.0)
                } else {
                    psi[j].dotc(&psi[i])
                }
            })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationReport {
    pub trials: usize,
    pub max_drift: f64,
    /// Per-trial maximal drift, in trial order.
    pub drifts: Vec<f64>,
    pub passes: bool,
}

/// Diagonal drift bound for a pass.
pub const CONSERVATION_TOL: f64 = 1e-8;

/// Max over trials, times and i of |ρ_S,ii(t) − ρ_S,ii(0)| in the basis
/// `u_s`, for seeded random pure product initial states.
///
/// No check is made that `u_s` is a genuine pointer basis, so this also
/// serves as a negative control with an arbitrary basis.
pub fn diagonal_drift(
    h: &BipartiteOperator,
    u_s: &CMat,
    trials: usize,
    seed: u64,
    times: &[f64],
) -> Result<ConservationReport> {
    let (d_s, d_e) = (h.d_s(), h.d_e());
    let mut rng = rng_from_seed(seed);
    let states: Vec<(CVec, CVec)> = (0..trials)
        .map(|_| (random_state(d_s, &mut rng), random_state(d_e, &mut rng)))
        .collect();
    let drifts = states
        .par_iter()
        .map(|(psi, chi)| {
            let rho = linalg::projector(psi);
            let trace = evolve_reduced(h, &rho, chi, times, Some(u_s))?;
            let start = u_s.adjoint() * &rho * u_s;
            let mut drift = 0.0_f64;
            for diag in &trace.diagonals {
                for (i, v) in diag.iter().enumerate() {
                    drift = drift.max((v - start[(i, i)].re).abs());
                }
            }
            Ok(drift)
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_drift = drifts.iter().copied().fold(0.0, f64::max);
    Ok(ConservationReport {
        trials,
        max_drift,
        drifts,
        passes: max_drift <= CONSERVATION_TOL,
    })
}

/// Checks that pointer-basis populations stay constant under `h`.
pub fn pointer_conservation_check(
    h: &BipartiteOperator,
    pb: &PointerBases,
    trials: usize,
    seed: u64,
    times: &[f64],
    tols: &ToleranceProfile,
) -> Result<ConservationReport> {
    let threshold = PointerBases::threshold(h, tols);
    if pb.residual > threshold {
        return Err(SepError::DiagonalizationFailed {
            residual: pb.residual,
            threshold,
        });
    }
    diagonal_drift(h, &pb.u_s, trials, seed, times)
}
