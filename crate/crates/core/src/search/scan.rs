//! Exhaustive scan over bipartitions of the tensor factors.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SepError};
use crate::linalg::CMat;
use crate::operator::{permute_factors, BipartiteOperator, FactorSpace, ToleranceProfile};
use crate::schmidt::{self, SeparabilityReport};

use super::{nonseparability_objective, weighted_measure};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    pub s_factors: Vec<usize>,
    pub e_factors: Vec<usize>,
    /// Factor order after regrouping (S factors first).
    pub perm: Vec<usize>,
    pub cut: usize,
    pub objective: f64,
    pub measure: f64,
    pub report: SeparabilityReport,
}

/// All splits of `n` factors into two nonempty groups, the group holding
/// factor 0 listed first. There are 2^(n-1) - 1 of them.
pub fn bipartitions(n: usize) -> Vec<Vec<usize>> {
    if n < 2 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity((1 << (n - 1)) - 1);
    for e_mask in 1usize..(1 << (n - 1)) {
        // bit k of e_mask puts factor k + 1 on the E side
        let s: Vec<usize> = std::iter::once(0)
            .chain((1..n).filter(|f| e_mask & (1 << (f - 1)) == 0))
            .collect();
        out.push(s);
    }
    out.sort();
    out
}

fn evaluate(
    h: &CMat,
    space: &FactorSpace,
    s_factors: &[usize],
    tols: &ToleranceProfile,
) -> Result<PartitionReport> {
    let n = space.n_factors();
    let e_factors: Vec<usize> = (0..n).filter(|f| !s_factors.contains(f)).collect();
    let perm: Vec<usize> = s_factors.iter().chain(&e_factors).copied().collect();
    let (m, sp) = permute_factors(h, space, &perm)?;
    let cut = s_factors.len();
    let op = BipartiteOperator::new(m, sp, cut, tols.tol_herm)?;
    let (_, report) = schmidt::analyze(&op, tols)?;
    Ok(PartitionReport {
        s_factors: s_factors.to_vec(),
        e_factors,
        perm,
        cut,
        objective: nonseparability_objective(&op, tols)?,
        measure: weighted_measure(&op)?,
        report,
    })
}

/// Runs the separability pipeline on every bipartition (or on the S-groups
/// listed in `partitions`) and returns the reports sorted by objective,
/// ties broken by the lexicographically smallest S-group.
pub fn bipartition_scan(
    h: &CMat,
    space: &FactorSpace,
    max_partitions: usize,
    partitions: Option<&[Vec<usize>]>,
    tols: &ToleranceProfile,
) -> Result<Vec<PartitionReport>> {
    let n = space.n_factors();
    if n < 2 {
        return Err(SepError::InvalidDimensions(
            "need at least two factors".into(),
        ));
    }
    let groups: Vec<Vec<usize>> = match partitions {
        Some(list) => {
            for s in list {
                let mut sorted = s.clone();
                sorted.sort();
                sorted.dedup();
                if sorted.len() != s.len()
                    || s.is_empty()
                    || s.len() >= n
                    || s.iter().any(|&f| f >= n)
                {
                    return Err(SepError::InvalidDimensions(format!("bad S-group {s:?}")));
                }
            }
            list.to_vec()
        }
        None => {
            let count = (1usize << (n - 1)) - 1;
            if count > max_partitions {
                return Err(SepError::BudgetExceeded {
                    count,
                    max: max_partitions,
                });
            }
            bipartitions(n)
        }
    };
    let mut reports = groups
        .par_iter()
        .map(|s| evaluate(h, space, s, tols))
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| {
        a.objective
            .total_cmp(&b.objective)
            .then_with(|| a.s_factors.cmp(&b.s_factors))
    });
    Ok(reports)
}
