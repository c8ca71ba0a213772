//! One JSON object per line per family prime.
//!
//! Schema (version 1):
//!
//! | field | meaning |
//! |---|---|
//! | `schema_version` | always 1 |
//! | `p`, `family_class` | the prime and `p mod 9` (2 or 5) |
//! | `congruence` | mod-3 verdicts and algebraic parts, or `null` above the congruence cutoff |
//! | `class_group`, `class_number`, `two_rank` | invariant factors of `Cl(Q(∛p))` |
//! | `certificate`, `regulator`, `hr_ratio` | completeness level, `R`, and `h·R / (h·R)_analytic` |
//! | `j`, `epsilon`, `sel2_dim`, `sha2_dim`, `sha2_nontrivial` | descent for `C_{2pʲ}` |
//! | `seed`, `effort`, `precision_bits` | everything needed to recompute the record |
//! | `timings` | wall-clock milliseconds, or `null` (the default, keeps output reproducible) |

use std::time::Instant;

use cubesum::cubicfield::{class_group_with, ClassGroupOptions, PureCubicOrder};
use cubesum::lvalue::{congruence_report, lvalue, AlgebraicLValue, CongruenceReport};
use cubesum::{compute_period, sha2_report, Effort, LValueError, PeriodData};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Congruence checks are skipped above this prime unless asked for.
pub const DEFAULT_CONGRUENCE_MAX: u64 = 500;

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Verdict {
    pub label: String,
    pub claim: String,
    pub observed: String,
    pub pass: bool,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct AlgebraicPart {
    pub n: u64,
    pub value: String,
    pub forced_zero: bool,
    pub error_bound: f64,
}

impl From<&AlgebraicLValue> for AlgebraicPart {
    fn from(v: &AlgebraicLValue) -> Self {
        AlgebraicPart {
            n: v.n,
            value: v.algebraic_part.to_string(),
            forced_zero: v.is_forced_zero,
            error_bound: v.error_bound.to_f64(),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Congruences {
    pub all_pass: bool,
    pub verdicts: Vec<Verdict>,
    pub algebraic_parts: Vec<AlgebraicPart>,
    pub precision_bits: u32,
}

impl From<&CongruenceReport> for Congruences {
    fn from(r: &CongruenceReport) -> Self {
        Congruences {
            all_pass: r.all_pass(),
            verdicts: r
                .checks
                .iter()
                .map(|c| Verdict {
                    label: c.label.clone(),
                    claim: c.claim.clone(),
                    observed: c.observed.to_string(),
                    pass: c.pass,
                })
                .collect(),
            algebraic_parts: r.values.iter().map(AlgebraicPart::from).collect(),
            precision_bits: r.precision_bits,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Timings {
    pub class_group_ms: f64,
    pub congruence_ms: Option<f64>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub p: u64,
    pub family_class: u8,
    pub congruence: Option<Congruences>,
    pub class_group: Vec<u64>,
    pub class_number: u64,
    pub two_rank: u32,
    pub certificate: String,
    pub regulator: f64,
    pub hr_ratio: f64,
    pub j: u32,
    pub epsilon: i8,
    pub sel2_dim: u32,
    pub sha2_dim: u32,
    pub sha2_nontrivial: bool,
    pub seed: u64,
    pub effort: String,
    pub precision_bits: u32,
    pub timings: Option<Timings>,
}

impl ResultRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn from_line(line: &str) -> Result<Self, String> {
        let r: ResultRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(format!("schema_version {} (expected {SCHEMA_VERSION})", r.schema_version));
        }
        Ok(r)
    }

    /// Every verdict passed (or none were computed).
    pub fn passes(&self) -> bool {
        self.congruence.as_ref().is_none_or(|c| c.all_pass)
    }
}

#[derive(Clone, Debug)]
pub struct RecordConfig {
    pub precision_bits: u32,
    pub seed: u64,
    pub effort: Effort,
    /// Compute congruences for `p ≤ congruence_max`.
    pub congruence_max: u64,
    pub timings: bool,
}

impl Default for RecordConfig {
    fn default() -> Self {
        RecordConfig {
            precision_bits: cubesum::DEFAULT_PRECISION,
            seed: cubesum::cubicfield::DEFAULT_SEED,
            effort: Effort::Default,
            congruence_max: DEFAULT_CONGRUENCE_MAX,
            timings: false,
        }
    }
}

impl RecordConfig {
    /// Whether a cached record was produced under this configuration.
    pub fn produced(&self, r: &ResultRecord) -> bool {
        r.seed == self.seed
            && r.effort == self.effort.as_str()
            && r.precision_bits == self.precision_bits
            && r.congruence.is_some() == (r.p <= self.congruence_max)
    }
}

/// Precisions tried in turn: the base, then doubled up to 4×.
pub fn escalation_ladder(base: u32) -> [u32; 3] {
    [base, 2 * base, 4 * base]
}

fn retryable(e: &LValueError) -> bool {
    matches!(e, LValueError::Recognition { .. } | LValueError::ForcedZeroViolation { .. } | LValueError::Lattice(_))
}

/// Runs `f` at the base precision, escalating on recognition failures.
pub fn with_escalation<T>(
    base: u32,
    base_period: Option<&PeriodData>,
    mut f: impl FnMut(&PeriodData) -> Result<T, LValueError>,
) -> Result<T, CliError> {
    let mut last = None;
    for prec in escalation_ladder(base) {
        let owned;
        let period = match base_period {
            Some(pd) if pd.precision_bits == prec => pd,
            _ => {
                owned = compute_period(prec)?;
                &owned
            }
        };
        match f(period) {
            Ok(v) => return Ok(v),
            Err(e) if retryable(&e) => last = Some(e),
            Err(e) => return Err(e.into()),
        }
    }
    Err(last.expect("at least one attempt").into())
}

pub fn congruences(p: u64, precision_bits: u32, period: Option<&PeriodData>) -> Result<CongruenceReport, CliError> {
    with_escalation(precision_bits, period, |pd| congruence_report(p, pd))
}

pub fn algebraic_lvalue(p: u64, n: u64, precision_bits: u32) -> Result<AlgebraicLValue, CliError> {
    with_escalation(precision_bits, None, |pd| lvalue(p, n, pd))
}

pub fn compute_record(p: u64, cfg: &RecordConfig, period: Option<&PeriodData>) -> Result<ResultRecord, CliError> {
    let order = PureCubicOrder::new(p)?;
    let opts = ClassGroupOptions { effort: cfg.effort, seed: cfg.seed, certificate: None };
    let t0 = Instant::now();
    let cg = class_group_with(&order, &opts)?.structure;
    let class_group_ms = t0.elapsed().as_secs_f64() * 1e3;
    let selmer = sha2_report(p, &cg)?;

    let (congruence, congruence_ms) = if p <= cfg.congruence_max {
        let t1 = Instant::now();
        let report = congruences(p, cfg.precision_bits, period)?;
        (Some(Congruences::from(&report)), Some(t1.elapsed().as_secs_f64() * 1e3))
    } else {
        (None, None)
    };

    Ok(ResultRecord {
        schema_version: SCHEMA_VERSION,
        p,
        family_class: (p % 9) as u8,
        congruence,
        class_number: cg.class_number,
        two_rank: cg.two_rank,
        certificate: cg.certificate.as_str().to_string(),
        regulator: cg.regulator,
        hr_ratio: cg.hr_ratio(),
        class_group: cg.elementary_divisors,
        j: selmer.j,
        epsilon: selmer.epsilon,
        sel2_dim: selmer.sel2_dim,
        sha2_dim: selmer.sha2_dim,
        sha2_nontrivial: selmer.sha2_nontrivial,
        seed: cfg.seed,
        effort: cfg.effort.as_str().to_string(),
        precision_bits: cfg.precision_bits,
        timings: cfg.timings.then_some(Timings { class_group_ms, congruence_ms }),
    })
}
