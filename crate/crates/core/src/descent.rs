//! `dim Sel₂` and `dim Ш[2]` for the rank-one curve `E = C_{2pʲ}` of the
//! family, from the 2-rank `k` of `Cl(Q(∛p))` and the root number.
//!
//! `E` has the model `y² = x³ − 27p^{2j}` and its 2-torsion field is
//! `L = Q[x]/(x³ − 27p^{2j}) ≅ Q(∛p)`. The Selmer group sits between the
//! unramified quadratic extensions of `L` and the classes of `α` with
//! `(α) = I²`, which pins its dimension to `k` or `k + 1`; the root number
//! decides which.

use std::fmt;

use crate::arith::{cube_roots_mod, is_family_prime, pow_mod};
use crate::cubicfield::ClassGroupStructure;
use crate::error::DescentError;
use crate::heckeoracle::hecke_coefficients;

/// Family primes below this get the root number checked against the
/// Hecke oracle.
pub const ORACLE_CHECK_LIMIT: u64 = 200;

/// The root number of the rank-one member.
pub const RANK_ONE_SIGN: i8 = -1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Place {
    Infinite,
    Finite(u64),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinite => f.write_str("∞"),
            Place::Finite(q) => write!(f, "{q}"),
        }
    }
}

/// `j` with `C_{2pʲ}` of rank one: 1 for `p ≡ 2 (mod 9)`, 2 for `p ≡ 5`.
pub fn rank_one_exponent(p: u64) -> Result<u32, DescentError> {
    if !is_family_prime(p) {
        return Err(DescentError::UnsupportedPrime(p));
    }
    Ok(if p % 9 == 2 { 1 } else { 2 })
}

/// Number of distinct irreducible factors of `x³ − 27p^{2j}` mod `q`.
fn factor_count(p: u64, j: u32, q: u64) -> u32 {
    let a = (27 % q) * pow_mod(p % q, 2 * j as u64, q) % q;
    if a == 0 {
        return 1;
    }
    match cube_roots_mod(a, q).len() {
        0 => 1,
        1 => 2,
        _ => 3,
    }
}

/// `dim_F₂` of the image of the local Kummer map at `q`.
pub fn local_image_dimension(p: u64, j: u32, q: Place) -> u32 {
    match q {
        Place::Infinite => 0,
        Place::Finite(2) => 2,
        Place::Finite(q) => factor_count(p, j, q) - 1,
    }
}

/// `k` if `ε = (−1)^k`, else `k + 1`.
pub fn sel2_dimension(k: u32, epsilon: i8) -> u32 {
    let parity = if k.is_multiple_of(2) { 1 } else { -1 };
    if epsilon == parity {
        k
    } else {
        k + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelmerReport {
    pub p: u64,
    pub j: u32,
    /// `2pʲ`.
    pub n: u64,
    pub k: u32,
    pub epsilon: i8,
    pub sel2_dim: u32,
    pub sha2_dim: u32,
    pub sha2_nontrivial: bool,
    /// Whether the sign was compared with the Hecke oracle.
    pub oracle_checked: bool,
    /// Agreement with a tabulated `Ш[2]` dimension, when one was supplied.
    pub table_match: Option<bool>,
}

impl SelmerReport {
    /// `(Z/2)^d` for the predicted `Ш[2]`.
    pub fn predicted_group(&self) -> String {
        match self.sha2_dim {
            0 => "0".to_string(),
            1 => "Z/2".to_string(),
            d => format!("(Z/2)^{d}"),
        }
    }

    /// `k ≤ dim Sel₂ ≤ k + 1`.
    pub fn sandwich_holds(&self) -> bool {
        self.k <= self.sel2_dim && self.sel2_dim <= self.k + 1
    }

    /// `dim Sel₂` is odd when `ε = −1`.
    pub fn parity_holds(&self) -> bool {
        self.epsilon != -1 || self.sel2_dim % 2 == 1
    }

    pub fn with_table(mut self, expected_sha2_dim: u32) -> Self {
        self.table_match = Some(self.sha2_dim == expected_sha2_dim);
        self
    }
}

/// Root number of `C_n` from the oracle's functional-equation test.
pub fn oracle_root_number(n: u64) -> Result<i8, DescentError> {
    Ok(hecke_coefficients(n, 2)?.root_number)
}

pub fn sha2_report(p: u64, cl: &ClassGroupStructure) -> Result<SelmerReport, DescentError> {
    let j = rank_one_exponent(p)?;
    if cl.p != p {
        return Err(DescentError::PrimeMismatch { expected: p, got: cl.p });
    }
    let n = 2 * p.pow(j);
    let epsilon = RANK_ONE_SIGN;
    let oracle_checked = p < ORACLE_CHECK_LIMIT;
    if oracle_checked {
        let oracle = oracle_root_number(n)?;
        if oracle != epsilon {
            return Err(DescentError::SignDisagreement { n, oracle });
        }
    }
    let k = cl.two_rank;
    let sel2_dim = sel2_dimension(k, epsilon);
    // rank one and no rational torsion
    let sha2_dim = sel2_dim - 1;
    Ok(SelmerReport {
        p,
        j,
        n,
        k,
        epsilon,
        sel2_dim,
        sha2_dim,
        sha2_nontrivial: sha2_dim > 0,
        oracle_checked,
        table_match: None,
    })
}
