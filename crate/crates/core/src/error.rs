use thiserror::Error;

use crate::poly::Var;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("p = {0} is not an odd prime")]
    EvenPrime(u64),
    #[error("precision must be at least 1")]
    ZeroPrecision,
    #[error("p^N = {p}^{precision} does not fit the residue width")]
    ModulusTooLarge { p: u64, precision: u32 },
    #[error("{0} is not a unit mod p")]
    NotAUnit(String),
    #[error("precision exhausted: cannot divide by p at precision 1")]
    PrecisionExhausted,
    #[error("flow verification needs precision at least 2, got {0}")]
    PrecisionTooLow(u32),
    #[error("{0} is not congruent to 1 mod p")]
    NotPrincipalUnit(String),
    #[error("arithmetic between different p-adic contexts ({left} vs {right})")]
    ContextMismatch { left: String, right: String },
    #[error("variable {0} has no binding")]
    UnboundVariable(Var),
    #[error("coefficients not all divisible by p")]
    NotDivisibleByP,
    #[error("a_i not distinct mod p: (a1-a2)(a2-a3)(a3-a1) is not a unit")]
    CoefficientsNotDistinct,
    #[error("level ({c1}, {c2}) is not a Teichmueller point")]
    NotTeichmueller { c1: String, c2: String },
    #[error("degenerate fiber: {0}")]
    DegenerateFiber(String),
    #[error("denominator {0} is divisible by p")]
    NonUnitDenominator(u64),
    #[error("unsupported degree {0}, expected 3 or 4")]
    UnsupportedDegree(usize),
    #[error("singular linear system")]
    SingularSystem,
    #[error("Phi^2 is not congruent to x^(2p) mod p")]
    NotCongruent,
    #[error("flow has no extracted roots Phi_1, Phi_2")]
    RootsUnavailable,
    #[error("no admissible level sets over F_{0}")]
    NoAdmissibleLevel(u64),
    #[error("candidate is not a prime integral mod p")]
    NotPrimeIntegral,
    #[error("flows are built on different parameters")]
    ParamsMismatch,
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
