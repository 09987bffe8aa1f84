use crate::arith::Nat;
use crate::decomp::Rejection;
use crate::ed1::QuadViolation;
use crate::ed2::TripleViolation;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("factorization of {n} exceeded the budget of {budget} rho steps; found {partial:?}, unfactored {unfactored:?}")]
pub struct BudgetExceeded {
    pub n: Nat,
    pub budget: u64,
    pub partial: Vec<(Nat, u32)>,
    pub unfactored: Vec<Nat>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error(transparent)]
    Rejected(#[from] Rejection),
    #[error("quadruple rejected: {0}")]
    Quad(#[from] QuadViolation),
    #[error("triple rejected: {0}")]
    Triple(#[from] TripleViolation),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
