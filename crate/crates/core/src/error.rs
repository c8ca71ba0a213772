use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EisensteinError {
    #[error("argument is divisible by the prime 1 − ω above 3")]
    DivisibleByThree,
    #[error("modulus {0} is not of the form p or 2p with p an odd prime other than 3")]
    UnsupportedModulus(u64),
    #[error("modulus is not prime")]
    NotPrime,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("precision {0} bits is below the 53-bit minimum")]
    PrecisionTooLow(u32),
    #[error("argument lies on the period lattice")]
    LatticePoint,
    #[error("residual {residual:e} exceeds tolerance {tolerance:e}; increase the precision")]
    PrecisionExhausted { residual: f64, tolerance: f64 },
    #[error("residue system modulus {reps} does not match table modulus {m}")]
    ModulusMismatch { m: u64, reps: u64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LValueError {
    #[error("p = {0} is not an odd prime congruent to 2 or 5 mod 9")]
    UnsupportedPrime(u64),
    #[error("n = {0} is not of the form 2^i p^j with i ≤ 2, 1 ≤ j ≤ 2")]
    UnsupportedShape(u64),
    #[error("no integer within {bound:e} of {value}; raise the precision")]
    Recognition { value: String, bound: f64 },
    #[error("forced zero L(C_{n}, 1) has magnitude {magnitude:e} above tolerance {tolerance:e}")]
    ForcedZeroViolation { n: u64, magnitude: f64, tolerance: f64 },
    #[error("modulus-2p normalization disagrees with the Hecke oracle: finite sum {finite}, oracle {oracle}")]
    NormalizationMismatch { finite: f64, oracle: f64 },
    #[error(transparent)]
    Eisenstein(#[from] EisensteinError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("n = {0} is not of the form 2^i p^j with p ≡ 2, 5 (mod 9)")]
    UnsupportedN(u64),
    #[error("no conductor candidate satisfies the functional equation for n = {0}")]
    ConductorUnresolved(u64),
    #[error("conductor ambiguous for n = {n}: {candidates:?}")]
    ConductorAmbiguous { n: u64, candidates: Vec<(u64, i8)> },
    #[error("root number is +1 for n = {0}; the derivative probe needs −1")]
    RootNumberPositive(u64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("p = {0} is outside the supported family (odd prime, p ≡ 2, 5 mod 9)")]
    Unsupported(u64),
    #[error("relation collection for p = {p} incomplete after {rounds} rounds (h'R'/hR = {ratio}); raise the effort")]
    NeedsMoreEffort { p: u64, rounds: usize, ratio: f64 },
    #[error("could not express the prime ideal above {q} in the factor base (p = {p})")]
    CertificationFailed { p: u64, q: u64 },
    #[error("relation failed post-verification: {0}")]
    BadRelation(String),
    #[error("regulator {0:.1} too large for an explicit fundamental unit")]
    RegulatorTooLarge(f64),
    #[error("fundamental unit search did not find a unit with log {0}")]
    UnitNotFound(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DescentError {
    #[error("p = {0} is not an odd prime congruent to 2 or 5 mod 9")]
    UnsupportedPrime(u64),
    #[error("class group is for p = {got}, expected {expected}")]
    PrimeMismatch { expected: u64, got: u64 },
    #[error("Hecke oracle root number {oracle} disagrees with the rank-one sign −1 for C_{n}")]
    SignDisagreement { n: u64, oracle: i8 },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
