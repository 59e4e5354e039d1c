//! Hamiltonians of several system–environment pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SepError};
use crate::linalg::{self, CMat};
use crate::operator::{embed_on_factors, FactorSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubsystemRole {
    System,
    Environment,
}

/// One tensor factor: the system or environment of pair `pair`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
    pub role: SubsystemRole,
    pub pair: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TermKind {
    /// Self-Hamiltonian of a single factor.
    Free,
    /// Couples S_i with its own E_i.
    LocalInteraction,
    /// Couples S_i with S_j, i ≠ j.
    SystemSystem,
    /// Couples E_i with E_j, i ≠ j.
    EnvironmentEnvironment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub op: CMat,
    /// Factors the operator acts on, in the operator's own factor order.
    pub factors: Vec<usize>,
    pub kind: TermKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositeSpec {
    pub subsystems: Vec<Subsystem>,
    pub terms: Vec<Term>,
}

impl CompositeSpec {
    pub fn space(&self) -> Result<FactorSpace> {
        FactorSpace::new(self.subsystems.iter().map(|s| s.dim).collect())?
            .with_labels(self.subsystems.iter().map(|s| s.label.clone()).collect())
    }

    fn check_term(&self, index: usize, term: &Term) -> Result<()> {
        let n = self.subsystems.len();
        let err = |why: String| Err(SepError::SpecError(format!("term {index}: {why}")));
        if term.factors.iter().any(|&f| f >= n) {
            return err(format!("factor out of range in {:?}", term.factors));
        }
        let subs: Vec<&Subsystem> = term.factors.iter().map(|&f| &self.subsystems[f]).collect();
        match term.kind {
            TermKind::Free => {
                if subs.len() != 1 {
                    return err(format!("free term touches {} factors", subs.len()));
                }
            }
            TermKind::LocalInteraction => {
                let ok =
                    subs.len() == 2 && subs[0].pair == subs[1].pair && subs[0].role != subs[1].role;
                if !ok {
                    return err("local interaction must couple S_i with E_i".into());
                }
            }
            TermKind::SystemSystem | TermKind::EnvironmentEnvironment => {
                let role = if term.kind == TermKind::SystemSystem {
                    SubsystemRole::System
                } else {
                    SubsystemRole::Environment
                };
                let ok = subs.len() == 2
                    && subs.iter().all(|s| s.role == role)
                    && subs[0].pair != subs[1].pair;
                if !ok {
                    return err(format!(
                        "{:?} term must couple two different pairs' {role:?} factors",
                        term.kind
                    ));
                }
            }
        }
        let dim: usize = subs.iter().map(|s| s.dim).product();
        if term.op.shape() != (dim, dim) {
            return err(format!(
                "operator is {:?}, factors need {dim}x{dim}",
                term.op.shape()
            ));
        }
        if linalg::hermitian_deviation(&term.op) > 1e-10 {
            return err("operator is not Hermitian".into());
        }
        Ok(())
    }
}

/// Sums every term embedded on its factors.
pub fn assemble_composite(spec: &CompositeSpec) -> Result<(CMat, FactorSpace)> {
    let space = spec.space()?;
    let dim = space.total_dim();
    let mut h = CMat::zeros(dim, dim);
    for (k, term) in spec.terms.iter().enumerate() {
        spec.check_term(k, term)?;
        h += embed_on_factors(&term.op, &term.factors, &space)?;
    }
    Ok((linalg::symmetrize(&h), space))
}
