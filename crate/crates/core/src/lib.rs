//! Desk-scale verification of the mod-3 BSD congruences and the Ш[2] / class
//! group dictionary for the curves `Cₙ: x³ + y³ = n`, `n = 2ⁱpʲ`,
//! `p ≡ 2, 5 (mod 9)`.
//!
//! * [`eisenstein`]: `Z[ω]`, cubic residue symbols, residue systems.
//! * [`lattice`]: the period Ω of `y² = 4x³ − 1`, ℘, ζ and `𝓔₁*` on `ΩZ[ω]`.
//! * [`lvalue`]: algebraic parts of `L(Cₙ, 1)` from finite ℘-sums, congruence checks.
//! * [`heckeoracle`]: the same L-values from the Hecke character, conductor and sign.
//! * [`cubicfield`]: class groups and units of `Q(∛p)`.
//! * [`descent`]: `dim Sel₂` and `dim Ш[2]` from the 2-rank and root number.

pub mod arith;
pub mod cubicfield;
pub mod descent;
pub mod eisenstein;
pub mod error;
pub mod heckeoracle;
pub mod lattice;
pub mod lvalue;
mod special;

pub use eisenstein::{cubic_residue_symbol, symmetric_residue_system, CubicResidue, EisensteinInteger, SymmetricResidueSystem};
pub use error::{DescentError, EisensteinError, FieldError, LValueError, LatticeError, OracleError};

pub use lattice::{compute_period, eisenstein_e1star, wp_division_values, DivisionValueTable, PeriodData};
pub use heckeoracle::{hecke_coefficients, lprime_probe, lvalue_oracle, HeckeSeries, OracleValue};
pub use lvalue::{
    congruence_report, integer_recognize, isogeny_check, lvalue_2p_family, lvalue_p_family, AlgebraicLValue,
    CongruenceReport,
};
pub use cubicfield::{class_group, fundamental_unit, integral_basis, Certificate, ClassGroupStructure, Effort, PureCubicOrder};
pub use descent::{local_image_dimension, sel2_dimension, sha2_report, Place, SelmerReport};

/// Default working precision in bits.
pub const DEFAULT_PRECISION: u32 = 256;
