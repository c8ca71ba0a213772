//! Arithmetic of the pure cubic field `L = Q(θ)`, `θ³ = p`.
//!
//! For `p ≡ 2, 5 (mod 9)` the ring of integers is `Z[θ]`. Class groups come
//! from a small factor base of degree-1 primes: random elements of random
//! factor-base ideals are LLL-reduced under the trace form, relations are kept
//! when their norms factor over the base, and the relation lattice is
//! reduced to elementary divisors. The relation lattice is accepted once
//! `h'·R'` matches the analytic `h·R`; every prime ideal below the
//! certification bound is separately shown to lie in the subgroup generated
//! by the base.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer};

use crate::arith::{cube_roots_mod, is_prime, mul_mod, primes_up_to};
use crate::error::FieldError;
use crate::special::e1;

type Result<T> = std::result::Result<T, FieldError>;

/// Seed used when the caller does not choose one.
pub const DEFAULT_SEED: u64 = 0x5eed_c0de;

/// Fields up to this prime are certified by running through every prime
/// ideal below the Minkowski bound.
pub const ENUMERATION_LIMIT: u64 = 2000;

const LOG_PREC: u32 = 256;

/// `Z[θ]` with `θ³ = p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PureCubicOrder {
    pub p: u64,
    /// `−27p²`.
    pub discriminant: i128,
}

/// `a + bθ + cθ²`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Element {
    pub a: Integer,
    pub b: Integer,
    pub c: Integer,
}

impl Element {
    pub fn new(a: impl Into<Integer>, b: impl Into<Integer>, c: impl Into<Integer>) -> Self {
        Element { a: a.into(), b: b.into(), c: c.into() }
    }

    pub fn one() -> Self {
        Element::new(1, 0, 0)
    }

    pub fn theta() -> Self {
        Element::new(0, 1, 0)
    }

    fn from_small(x: [i64; 3]) -> Self {
        Element::new(x[0], x[1], x[2])
    }

    pub fn neg(&self) -> Self {
        Element::new(-self.a.clone(), -self.b.clone(), -self.c.clone())
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}θ + {}θ²", self.a, self.b, self.c)
    }
}

/// Spec-facing name for the maximal order constructor.
pub fn integral_basis(p: u64) -> Result<PureCubicOrder> {
    PureCubicOrder::new(p)
}

impl PureCubicOrder {
    /// The family case: `p` an odd prime, `p ≡ 2, 5 (mod 9)`.
    pub fn new(p: u64) -> Result<Self> {
        if !crate::arith::is_family_prime(p) {
            return Err(FieldError::Unsupported(p));
        }
        Ok(Self::build(p))
    }

    /// Any prime radicand `m ≠ 3` with `m² ≢ 1 (mod 9)`, for which `Z[θ]` is
    /// still maximal. Used for fixtures outside the family such as `∛2`.
    pub fn with_prime_radicand(m: u64) -> Result<Self> {
        if !is_prime(m) || m == 3 || (m * m) % 9 == 1 {
            return Err(FieldError::Unsupported(m));
        }
        Ok(Self::build(m))
    }

    fn build(p: u64) -> Self {
        PureCubicOrder { p, discriminant: -27 * (p as i128) * (p as i128) }
    }

    pub fn abs_discriminant(&self) -> f64 {
        self.discriminant.unsigned_abs() as f64
    }

    /// `8√3·p/(3π)`.
    pub fn minkowski_bound(&self) -> f64 {
        8.0 * 3f64.sqrt() * self.p as f64 / (3.0 * std::f64::consts::PI)
    }

    /// `12·ln²|d|`, the GRH bound for generators of the class group.
    pub fn bach_bound(&self) -> f64 {
        12.0 * self.abs_discriminant().ln().powi(2)
    }

    pub fn norm(&self, x: &Element) -> Integer {
        let p = Integer::from(self.p);
        let p2 = Integer::from(&p * &p);
        let mut n = Integer::from((&x.a).pow(3u32));
        n += Integer::from((&x.b).pow(3u32)) * &p;
        n += Integer::from((&x.c).pow(3u32)) * &p2;
        n -= Integer::from(&x.a * &x.b) * &x.c * 3u32 * &p;
        n
    }

    pub fn mul(&self, x: &Element, y: &Element) -> Element {
        let p = Integer::from(self.p);
        let a = Integer::from(&x.a * &y.a) + (Integer::from(&x.b * &y.c) + Integer::from(&x.c * &y.b)) * &p;
        let b = Integer::from(&x.a * &y.b) + Integer::from(&x.b * &y.a) + Integer::from(&x.c * &y.c) * &p;
        let c = Integer::from(&x.a * &y.c) + Integer::from(&x.b * &y.b) + Integer::from(&x.c * &y.a);
        Element { a, b, c }
    }

    /// `N(x)/x`, so that `x·adjoint(x) = N(x)`.
    pub fn adjoint(&self, x: &Element) -> Element {
        let p = Integer::from(self.p);
        let a = Integer::from((&x.a).pow(2u32)) - Integer::from(&x.b * &x.c) * &p;
        let b = Integer::from((&x.c).pow(2u32)) * &p - Integer::from(&x.a * &x.b);
        let c = Integer::from((&x.b).pow(2u32)) - Integer::from(&x.a * &x.c);
        Element { a, b, c }
    }

    /// The real cube root of `p`.
    pub fn theta_real(&self, prec: u32) -> Float {
        Float::with_val(prec, self.p).cbrt()
    }

    /// Image under the real embedding.
    pub fn real_embedding(&self, x: &Element, prec: u32) -> Float {
        let t = self.theta_real(prec);
        let t2 = Float::with_val(prec, t.square_ref());
        Float::with_val(prec, &x.a) + Float::with_val(prec, &x.b * &t) + Float::with_val(prec, &x.c * &t2)
    }

    /// `ln|σ₁(x)| − ln|N(x)|/3`: zero on rationals and on θ, and equal to
    /// `ln|σ₁(u)|` on units.
    pub fn normalized_log(&self, x: &Element, prec: u32) -> Float {
        let s = self.real_embedding(x, prec).abs().ln();
        let n = Float::with_val(prec, self.norm(x).abs()).ln();
        s - n / 3u32
    }

    fn rational_prime(&self, q: u64) -> RationalPrime {
        let kind = if q == 3 {
            PrimeKind::Three
        } else if q == self.p {
            PrimeKind::Theta
        } else if q % 3 == 2 {
            PrimeKind::OneLinear(cube_roots_mod(self.p % q, q)[0])
        } else {
            let roots = cube_roots_mod(self.p % q, q);
            if roots.is_empty() {
                PrimeKind::Inert
            } else {
                PrimeKind::ThreeLinear([roots[0], roots[1], roots[2]])
            }
        };
        RationalPrime { q, kind }
    }
}

/// A prime ideal of `Z[θ]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrimeIdeal {
    /// `(3, θ − p)`; `(3) = P³`.
    Three,
    /// `(θ)`; `(p) = (θ)³`.
    Theta,
    /// `(q, θ − r)` with `r³ ≡ p (mod q)`, residue degree 1.
    Linear { q: u64, r: u64 },
    /// For `q ≡ 2 (mod 3)`, the degree-2 prime `(q)/(q, θ − r)`.
    Quadratic { q: u64 },
    /// `(q)` for `q` inert.
    Inert { q: u64 },
}

impl PrimeIdeal {
    pub fn norm(&self, p: u64) -> Integer {
        match *self {
            PrimeIdeal::Three => Integer::from(3),
            PrimeIdeal::Theta => Integer::from(p),
            PrimeIdeal::Linear { q, .. } => Integer::from(q),
            PrimeIdeal::Quadratic { q } => Integer::from(q) * q,
            PrimeIdeal::Inert { q } => Integer::from(q).pow(3u32),
        }
    }

    pub fn rational_prime(&self, p: u64) -> u64 {
        match *self {
            PrimeIdeal::Three => 3,
            PrimeIdeal::Theta => p,
            PrimeIdeal::Linear { q, .. } | PrimeIdeal::Quadratic { q } | PrimeIdeal::Inert { q } => q,
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum PrimeKind {
    Three,
    Theta,
    OneLinear(u64),
    ThreeLinear([u64; 3]),
    Inert,
}

#[derive(Clone, Copy, Debug)]
struct RationalPrime {
    q: u64,
    kind: PrimeKind,
}

/// A principal ideal `(element)` and its recorded factorization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub element: Element,
    pub factors: Vec<(PrimeIdeal, u32)>,
}

/// Root of `x³ − p` modulo `q^k`, lifted from a simple root `r` mod `q`.
fn lift_root(p: u64, q: u64, r: u64, k: u32) -> Integer {
    let target = Integer::from(q).pow(k);
    let mut m = Integer::from(q);
    let mut x = Integer::from(r);
    while m < target {
        m = Integer::from(&m * &m).min(target.clone());
        let f = Integer::from((&x).pow(3u32)) - p;
        let df = Integer::from(x.square_ref()) * 3u32;
        let inv = df.invert(&m).expect("simple root");
        x -= f * inv;
        x = x.modulo(&m);
    }
    x
}

fn eval_at(x: &Element, r: &Integer, m: &Integer) -> Integer {
    let v = Integer::from(&x.c * r) + &x.b;
    (v * r + &x.a).modulo(m)
}

fn int_valuation(n: &Integer, q: u64) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let mut n = n.clone();
    let mut v = 0;
    while n.is_divisible_u(q as u32) {
        n /= q as u32;
        v += 1;
    }
    v
}

/// `v_P(x)` for `P = (q, θ − r)` unramified, given `e = v_q(N(x)) ≥ v_P(x)`.
fn linear_valuation(p: u64, x: &Element, q: u64, r: u64, e: u32) -> u32 {
    if e == 0 {
        return 0;
    }
    let m = Integer::from(q).pow(e + 1);
    let rr = lift_root(p, q, r, e + 1);
    int_valuation(&eval_at(x, &rr, &m), q).min(e)
}

/// Re-checks, from the element alone, that its principal ideal factors
/// exactly as recorded.
pub fn verify_relation(order: &PureCubicOrder, rel: &Relation) -> Result<()> {
    let p = order.p;
    let bad = |why: String| Err(FieldError::BadRelation(format!("{}: {why}", rel.element)));
    let n = order.norm(&rel.element).abs();
    if n.is_zero() {
        return bad("zero element".into());
    }
    let mut product = Integer::from(1);
    let mut degree_by_q: HashMap<u64, u32> = HashMap::new();
    for &(ideal, e) in &rel.factors {
        if e == 0 {
            return bad(format!("zero exponent at {ideal:?}"));
        }
        product *= ideal.norm(p).pow(e);
        let q = ideal.rational_prime(p);
        let f = match ideal {
            PrimeIdeal::Quadratic { .. } => 2,
            PrimeIdeal::Inert { .. } => 3,
            _ => 1,
        };
        *degree_by_q.entry(q).or_default() += f * e;
        if let PrimeIdeal::Linear { q, r } = ideal {
            if mul_mod(mul_mod(r, r, q), r, q) != p % q {
                return bad(format!("{r} is not a cube root of p mod {q}"));
            }
            let m = Integer::from(q).pow(e + 1);
            let rr = lift_root(p, q, r, e + 1);
            if int_valuation(&eval_at(&rel.element, &rr, &m), q) != e {
                return bad(format!("valuation at ({q}, θ − {r}) is not {e}"));
            }
        }
    }
    if product != n {
        return bad(format!("norm {n} but recorded ideals multiply to {product}"));
    }
    for (&q, &deg) in &degree_by_q {
        if int_valuation(&n, q) != deg {
            return bad(format!("ideals above {q} do not account for v_{q}(N)"));
        }
    }
    Ok(())
}

/// Factors `x` over the rational primes `primes`; `None` if `N(x)` has any
/// other prime factor.
fn factor_over(order: &PureCubicOrder, primes: &[RationalPrime], x: &Element, norm: u128) -> Option<Vec<(PrimeIdeal, u32)>> {
    let mut n = norm;
    if n == 0 {
        return None;
    }
    let mut out = Vec::new();
    for rp in primes {
        if n == 1 {
            break;
        }
        let q = rp.q as u128;
        if !n.is_multiple_of(q) {
            continue;
        }
        let mut e = 0u32;
        while n.is_multiple_of(q) {
            n /= q;
            e += 1;
        }
        match rp.kind {
            PrimeKind::Three => out.push((PrimeIdeal::Three, e)),
            PrimeKind::Theta => out.push((PrimeIdeal::Theta, e)),
            PrimeKind::Inert => {
                if !e.is_multiple_of(3) {
                    return None;
                }
                out.push((PrimeIdeal::Inert { q: rp.q }, e / 3));
            }
            PrimeKind::OneLinear(r) => {
                let v = linear_valuation(order.p, x, rp.q, r, e);
                if !(e - v).is_multiple_of(2) {
                    return None;
                }
                if v > 0 {
                    out.push((PrimeIdeal::Linear { q: rp.q, r }, v));
                }
                if e > v {
                    out.push((PrimeIdeal::Quadratic { q: rp.q }, (e - v) / 2));
                }
            }
            PrimeKind::ThreeLinear(roots) => {
                let mut total = 0;
                for r in roots {
                    let v = linear_valuation(order.p, x, rp.q, r, e);
                    total += v;
                    if v > 0 {
                        out.push((PrimeIdeal::Linear { q: rp.q, r }, v));
                    }
                }
                if total != e {
                    return None;
                }
            }
        }
    }
    (n == 1).then_some(out)
}

fn small_norm(p: u64, x: [i64; 3]) -> Option<i128> {
    let p = p as i128;
    let (a, b, c) = (x[0] as i128, x[1] as i128, x[2] as i128);
    let cube = |v: i128| v.checked_mul(v)?.checked_mul(v);
    let t1 = cube(a)?;
    let t2 = cube(b)?.checked_mul(p)?;
    let t3 = cube(c)?.checked_mul(p.checked_mul(p)?)?;
    let t4 = a.checked_mul(b)?.checked_mul(c)?.checked_mul(3 * p)?;
    t1.checked_add(t2)?.checked_add(t3)?.checked_sub(t4)
}

/// Gram–Schmidt data for the diagonal form `Σ wᵢxᵢ²`.
fn gso(b: &[[i128; 3]; 3], w: [f64; 3]) -> ([[f64; 3]; 3], [f64; 3]) {
    let dot = |x: &[f64; 3], y: &[f64; 3]| (0..3).map(|i| w[i] * x[i] * y[i]).sum::<f64>();
    let bf: Vec<[f64; 3]> = b.iter().map(|v| [v[0] as f64, v[1] as f64, v[2] as f64]).collect();
    let mut star = [[0.0; 3]; 3];
    let mut mu = [[0.0; 3]; 3];
    let mut nn = [0.0; 3];
    for i in 0..3 {
        star[i] = bf[i];
        for j in 0..i {
            mu[i][j] = dot(&bf[i], &star[j]) / nn[j];
            for t in 0..3 {
                star[i][t] -= mu[i][j] * star[j][t];
            }
        }
        nn[i] = dot(&star[i], &star[i]);
    }
    (mu, nn)
}

fn lll_diagonal(b: &mut [[i128; 3]; 3], w: [f64; 3]) {
    let mut k = 1;
    for _ in 0..500 {
        if k >= 3 {
            return;
        }
        for j in (0..k).rev() {
            let (mu, _) = gso(b, w);
            let q = mu[k][j].round();
            if q != 0.0 && q.is_finite() {
                let q = q as i128;
                for t in 0..3 {
                    b[k][t] -= q * b[j][t];
                }
            }
        }
        let (mu, nn) = gso(b, w);
        if nn[k] >= (0.99 - mu[k][k - 1] * mu[k][k - 1]) * nn[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn trial_rng(seed: u64, p: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(p ^ splitmix(stream ^ splitmix(index)))))
}

/// How hard to look for relations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Effort {
    Low,
    #[default]
    Default,
    High,
}

impl Effort {
    fn base_scale(self) -> f64 {
        match self {
            Effort::Low => 0.5,
            Effort::Default => 1.0,
            Effort::High => 2.0,
        }
    }

    fn rounds(self) -> usize {
        match self {
            Effort::Low => 8,
            Effort::Default => 24,
            Effort::High => 64,
        }
    }

    fn coefficient_bound(self) -> i64 {
        match self {
            Effort::High => 2,
            _ => 1,
        }
    }

    fn certificate_tries(self) -> usize {
        match self {
            Effort::Low => 200,
            Effort::Default => 1000,
            Effort::High => 5000,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Effort::Low => "low",
            Effort::Default => "default",
            Effort::High => "high",
        }
    }
}

impl FromStr for Effort {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "low" => Ok(Effort::Low),
            "default" => Ok(Effort::Default),
            "high" => Ok(Effort::High),
            _ => Err(format!("unknown effort {s:?} (low, default, high)")),
        }
    }
}

/// How completeness of the factor base was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Certificate {
    /// Every prime ideal below the Minkowski bound lies in the subgroup
    /// generated by the factor base.
    ProvedByEnumeration,
    /// Same, up to the GRH bound `12·ln²|d|`, plus the analytic `h·R` match.
    GrhAnalytic,
}

impl Certificate {
    pub fn as_str(self) -> &'static str {
        match self {
            Certificate::ProvedByEnumeration => "proved-by-enumeration",
            Certificate::GrhAnalytic => "grh-analytic",
        }
    }
}

impl FromStr for Certificate {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "proved-by-enumeration" => Ok(Certificate::ProvedByEnumeration),
            "grh-analytic" => Ok(Certificate::GrhAnalytic),
            _ => Err(format!("unknown certificate {s:?}")),
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassGroupStructure {
    pub p: u64,
    /// Invariant factors `d₁ | d₂ | …`, all > 1.
    pub elementary_divisors: Vec<u64>,
    pub two_rank: u32,
    pub certificate: Certificate,
    pub class_number: u64,
    pub regulator: f64,
    /// `h·R` from the class number formula.
    pub analytic_hr: f64,
    pub seed: u64,
    pub effort: Effort,
    pub factor_base_bound: u64,
    /// Prime ideals up to this norm were shown to lie in the factor base's span.
    pub certified_bound: u64,
    pub relations: usize,
}

impl ClassGroupStructure {
    /// `h·R / (h·R)_analytic`.
    pub fn hr_ratio(&self) -> f64 {
        self.class_number as f64 * self.regulator / self.analytic_hr
    }
}

impl fmt::Display for ClassGroupStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.elementary_divisors.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self.elementary_divisors.iter().map(|d| format!("Z/{d}")).collect();
        f.write_str(&parts.join(" + "))
    }
}

#[derive(Clone, Debug)]
pub struct ClassGroupOptions {
    pub effort: Effort,
    pub seed: u64,
    /// Force a certificate level instead of choosing it from `p`.
    pub certificate: Option<Certificate>,
}

impl Default for ClassGroupOptions {
    fn default() -> Self {
        ClassGroupOptions { effort: Effort::Default, seed: DEFAULT_SEED, certificate: None }
    }
}

/// A class group together with the relations behind it.
#[derive(Clone, Debug)]
pub struct ClassGroupComputation {
    pub structure: ClassGroupStructure,
    /// The relation lattice.
    pub relations: Vec<Relation>,
    /// One relation per certified prime ideal outside the factor base.
    pub certificates: Vec<Relation>,
    /// Regulator to `LOG_PREC` bits.
    pub regulator: Float,
}

pub fn class_group(p: u64, effort: Effort) -> Result<ClassGroupStructure> {
    let opts = ClassGroupOptions { effort, ..Default::default() };
    Ok(class_group_with(&PureCubicOrder::new(p)?, &opts)?.structure)
}

struct FactorBase {
    primes: Vec<RationalPrime>,
    /// Degree-1 primes usable for random ideals (not above 3 or p).
    linear: Vec<(u64, u64)>,
    columns: HashMap<(u64, u64), usize>,
    three_column: Option<usize>,
    width: usize,
}

impl FactorBase {
    fn new(order: &PureCubicOrder, bound: u64) -> Self {
        let mut primes = Vec::new();
        let mut linear = Vec::new();
        let mut columns = HashMap::new();
        let mut three_column = None;
        let mut width = 0;
        for q in primes_up_to(bound) {
            let rp = order.rational_prime(q);
            match rp.kind {
                PrimeKind::Three => {
                    three_column = Some(width);
                    width += 1;
                }
                PrimeKind::OneLinear(r) => {
                    linear.push((q, r));
                    columns.insert((q, r), width);
                    width += 1;
                }
                PrimeKind::ThreeLinear(roots) => {
                    for &r in &roots {
                        linear.push((q, r));
                    }
                    for &r in &roots[..2] {
                        columns.insert((q, r), width);
                        width += 1;
                    }
                }
                PrimeKind::Theta | PrimeKind::Inert => {}
            }
            primes.push(rp);
        }
        FactorBase { primes, linear, columns, three_column, width }
    }

    /// Exponent vector modulo the principal ideals `(q)`, `(θ)`.
    fn vector(&self, factors: &[(PrimeIdeal, u32)]) -> Option<Vec<i64>> {
        let mut v = vec![0i64; self.width];
        for &(ideal, e) in factors {
            let e = e as i64;
            match ideal {
                PrimeIdeal::Three => v[self.three_column?] += e,
                PrimeIdeal::Theta | PrimeIdeal::Inert { .. } => {}
                PrimeIdeal::Linear { q, r } => match self.columns.get(&(q, r)) {
                    Some(&c) => v[c] += e,
                    None => {
                        // third prime above a split q: −(first + second)
                        let rp = self.primes.iter().find(|rp| rp.q == q)?;
                        let PrimeKind::ThreeLinear(roots) = rp.kind else { return None };
                        for r in &roots[..2] {
                            v[self.columns[&(q, *r)]] -= e;
                        }
                    }
                },
                PrimeIdeal::Quadratic { q } => {
                    let rp = self.primes.iter().find(|rp| rp.q == q)?;
                    let PrimeKind::OneLinear(r) = rp.kind else { return None };
                    v[self.columns[&(q, r)]] -= e;
                }
            }
        }
        Some(v)
    }
}

/// A random ideal `∏(qᵢ, θ − rᵢ)` of coprime norms as `(M, R)`: its elements
/// are the `a + bθ + cθ²` with `a + bR + cR² ≡ 0 (mod M)`.
fn ideal_lattice(parts: &[(u64, u64)]) -> (i128, i128) {
    let mut m: i128 = 1;
    let mut r: i128 = 0;
    for &(q, rq) in parts {
        let q = q as i128;
        // CRT: r ≡ r (mod m), r ≡ rq (mod q)
        let inv = crate::arith::inv_mod((m % q) as u64, q as u64).expect("coprime") as i128;
        let t = ((rq as i128 - r).rem_euclid(q) * inv).rem_euclid(q);
        r += m * t;
        m *= q;
    }
    (m, r.rem_euclid(m.max(1)))
}

/// Short elements of the ideal `(M, R)` under a randomly skewed trace form.
fn short_elements(order: &PureCubicOrder, m: i128, r: i128, rng: &mut ChaCha8Rng, coeff: i64) -> Vec<[i64; 3]> {
    let t2 = (order.p as f64).powf(2.0 / 3.0);
    let w = [rng.gen_range(0.5..2.0), t2 * rng.gen_range(0.5..2.0), t2 * t2 * rng.gen_range(0.5..2.0)];
    let mut b = if m == 1 {
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    } else {
        [[m, 0, 0], [-r, 1, 0], [-(r * r % m), 0, 1]]
    };
    lll_diagonal(&mut b, w);
    let mut out = Vec::new();
    let range: Vec<i64> = (-coeff..=coeff).collect();
    for &x in &range {
        for &y in &range {
            for &z in &range {
                // one of ±v
                let first = [x, y, z].into_iter().find(|&c| c != 0);
                if first.is_none_or(|c| c < 0) {
                    continue;
                }
                let mut v = [0i128; 3];
                for t in 0..3 {
                    v[t] = x as i128 * b[0][t] + y as i128 * b[1][t] + z as i128 * b[2][t];
                }
                if v.iter().all(|c| c.unsigned_abs() < (1u128 << 62)) {
                    out.push([v[0] as i64, v[1] as i64, v[2] as i64]);
                }
            }
        }
    }
    out
}

fn normalize_sign(x: [i64; 3]) -> [i64; 3] {
    match x.iter().find(|&&c| c != 0) {
        Some(&c) if c < 0 => [-x[0], -x[1], -x[2]],
        _ => x,
    }
}

fn relations_from_trial(order: &PureCubicOrder, fb: &FactorBase, seed: u64, index: u64, coeff: i64) -> Vec<Relation> {
    let mut rng = trial_rng(seed, order.p, 1, index);
    relations_from_ideal(order, fb, Vec::new(), &mut rng, coeff)
}

/// Trials whose ideal always contains `(q, θ − r)`, for a column that the
/// unrestricted search has not reached.
fn forced_trial(order: &PureCubicOrder, fb: &FactorBase, seed: u64, prime: (u64, u64), index: u64, coeff: i64) -> Vec<Relation> {
    let mut rng = trial_rng(seed, order.p, (1 << 40) + prime.0, index);
    relations_from_ideal(order, fb, vec![prime], &mut rng, coeff)
}

fn relations_from_ideal(
    order: &PureCubicOrder,
    fb: &FactorBase,
    mut parts: Vec<(u64, u64)>,
    rng: &mut ChaCha8Rng,
    coeff: i64,
) -> Vec<Relation> {
    let count = parts.len() + rng.gen_range(0..=3usize).min(fb.linear.len());
    for _ in 0..8 * count {
        if parts.len() >= count {
            break;
        }
        let &(q, r) = fb.linear.choose(rng).expect("nonempty");
        if parts.iter().all(|&(q2, _)| q2 != q) {
            parts.push((q, r));
        }
    }
    let (m, r) = ideal_lattice(&parts);
    let mut out = Vec::new();
    for x in short_elements(order, m, r, rng, coeff) {
        let Some(n) = small_norm(order.p, x) else { continue };
        let el = Element::from_small(x);
        if let Some(factors) = factor_over(order, &fb.primes, &el, n.unsigned_abs()) {
            out.push(Relation { element: el, factors });
        }
    }
    out
}

/// A relation `(x) = P·(factor base)` for the prime ideal `P = (q, θ − r)`.
fn express_prime(order: &PureCubicOrder, fb: &FactorBase, q: u64, r: u64, seed: u64, tries: usize, coeff: i64) -> Option<Relation> {
    let mut primes = fb.primes.clone();
    primes.push(order.rational_prime(q));
    let small: Vec<(u64, u64)> = fb.linear.iter().copied().take(24).collect();
    for t in 0..tries {
        let mut rng = trial_rng(seed, order.p, 2 + q, t as u64);
        let mut parts = vec![(q, r)];
        let extra = if t == 0 || small.is_empty() { 0 } else { rng.gen_range(0..=2usize) };
        for _ in 0..extra {
            let &(q2, r2) = small.choose(&mut rng).expect("nonempty");
            if parts.iter().all(|&(q3, _)| q3 != q2) {
                parts.push((q2, r2));
            }
        }
        let (m, rr) = ideal_lattice(&parts);
        for x in short_elements(order, m, rr, &mut rng, coeff) {
            let Some(n) = small_norm(order.p, x) else { continue };
            let n = n.unsigned_abs();
            if n % q as u128 != 0 || (n / q as u128).is_multiple_of(q as u128) {
                continue;
            }
            let el = Element::from_small(x);
            if let Some(factors) = factor_over(order, &primes, &el, n) {
                if factors.contains(&(PrimeIdeal::Linear { q, r }, 1)) {
                    return Some(Relation { element: el, factors });
                }
            }
        }
    }
    None
}

/// Terms `Σ b_m [e^{−x}/x + E₁(x)]`, `x = 2πm/√|d|`, of the smoothed series
/// for `h·R = √|d|·L(1, ρ)/(2π)`, where `ζ_L = ζ·L(s, ρ)`.
pub fn analytic_hr(order: &PureCubicOrder) -> f64 {
    let sqrt_d = order.abs_discriminant().sqrt();
    let step = 2.0 * std::f64::consts::PI / sqrt_d;
    let m_max = (50.0 / step).ceil() as usize + 1;
    let b = dedekind_quotient_coefficients(order.p, m_max);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (m, &bm) in b.iter().enumerate().skip(1) {
        if bm == 0 {
            continue;
        }
        let x = step * m as f64;
        let term = bm as f64 * ((-x).exp() / x + e1(x));
        let y = term - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    sum
}

/// Dirichlet coefficients of `ζ_L(s)/ζ(s)` up to `n`.
fn dedekind_quotient_coefficients(p: u64, n: usize) -> Vec<i32> {
    let mut b = vec![1i32; n + 1];
    b[0] = 0;
    for q in primes_up_to(n as u64) {
        let local = |e: u32| -> i32 {
            if q == 3 || q == p {
                0
            } else if q % 3 == 2 {
                e.is_multiple_of(2) as i32
            } else if crate::arith::pow_mod(p % q, (q - 1) / 3, q) == 1 {
                e as i32 + 1
            } else {
                [1, -1, 0][(e % 3) as usize]
            }
        };
        let mut qe = q as usize;
        let mut e = 1;
        while qe <= n {
            let f = local(e);
            // multiply every m with v_q(m) = e
            let mut k = qe;
            while k <= n {
                if !(k / qe).is_multiple_of(q as usize) {
                    b[k] *= f;
                }
                k += qe;
            }
            match qe.checked_mul(q as usize) {
                Some(v) => qe = v,
                None => break,
            }
            e += 1;
        }
    }
    b
}

struct Reduced {
    /// Pivot rows in elimination order, with their pivot column.
    pivots: Vec<(usize, Vec<Integer>)>,
    unit_logs: Vec<Float>,
    full_rank: bool,
    /// Columns without a pivot.
    missing: Vec<usize>,
}

/// Row echelon form by Euclidean pivoting, carrying the normalized logs
/// through the same row operations.
fn echelon(width: usize, rows: Vec<(Vec<i64>, Float)>) -> Reduced {
    let mut live: Vec<(Vec<Integer>, Float)> =
        rows.into_iter().map(|(v, l)| (v.into_iter().map(Integer::from).collect(), l)).collect();
    let mut pivots = Vec::new();
    let mut missing = Vec::new();
    for col in (0..width).rev() {
        loop {
            let mut idx: Vec<usize> = (0..live.len()).filter(|&i| !live[i].0[col].is_zero()).collect();
            if idx.is_empty() {
                missing.push(col);
                break;
            }
            idx.sort_by(|&i, &j| live[i].0[col].cmp_abs(&live[j].0[col]));
            let piv = idx[0];
            if idx.len() == 1 {
                let (v, _) = live.swap_remove(piv);
                pivots.push((col, v));
                break;
            }
            let (pv, pl) = live[piv].clone();
            for &i in &idx[1..] {
                let (q, _) = <(Integer, Integer)>::from(live[i].0[col].div_rem_round_ref(&pv[col]));
                let row = &mut live[i];
                for c in 0..=col {
                    if !pv[c].is_zero() {
                        row.0[c] -= Integer::from(&q * &pv[c]);
                    }
                }
                row.1 -= Float::with_val(LOG_PREC, &pl * &q);
            }
        }
    }
    let unit_logs = live.into_iter().map(|(_, l)| l).collect();
    Reduced { pivots, unit_logs, full_rank: missing.is_empty(), missing }
}

/// Greatest common real divisor of multiples of the regulator.
fn real_gcd(values: &[Float]) -> Option<Float> {
    let tol = Float::with_val(LOG_PREC, 1e-20);
    let mut g: Option<Float> = None;
    for v in values {
        let mut b = Float::with_val(LOG_PREC, v.abs_ref());
        if b < tol {
            continue;
        }
        let Some(mut a) = g.take() else {
            g = Some(b);
            continue;
        };
        while b > tol {
            let q = Float::with_val(LOG_PREC, &a / &b).round();
            let r = Float::with_val(LOG_PREC, &a - Float::with_val(LOG_PREC, &q * &b)).abs();
            a = b;
            b = r;
        }
        g = Some(a);
    }
    g
}

/// Invariant factors of `Z^k / ⟨pivot rows⟩`, with `det` the index.
fn invariant_factors(pivots: &[(usize, Vec<Integer>)], det: &Integer) -> Vec<Integer> {
    let mut rows: Vec<(usize, Vec<Integer>)> = pivots.to_vec();
    // eliminate generators with a unit pivot
    let mut i = 0;
    while i < rows.len() {
        let (c, ref v) = rows[i];
        let pivot = v[c].clone();
        if pivot.cmp_abs(&Integer::from(1)) != std::cmp::Ordering::Equal {
            i += 1;
            continue;
        }
        let (_, row) = rows.remove(i);
        for (_, other) in rows.iter_mut() {
            if other[c].is_zero() {
                continue;
            }
            let f = Integer::from(&other[c] * &pivot);
            for (t, x) in row.iter().enumerate() {
                if !x.is_zero() {
                    other[t] -= Integer::from(&f * x);
                    other[t] %= det;
                }
            }
        }
        i = 0;
    }
    let cols: Vec<usize> = {
        let mut cs: Vec<usize> = rows.iter().map(|(c, _)| *c).collect();
        cs.sort_unstable();
        cs
    };
    let m = cols.len();
    let mut a: Vec<Vec<Integer>> = rows.iter().map(|(_, v)| cols.iter().map(|&c| Integer::from(&v[c] % det)).collect()).collect();
    for t in 0..m {
        let mut row = vec![Integer::new(); m];
        row[t] = det.clone();
        a.push(row);
    }
    let mut d = smith_diagonal(a, m);
    d.retain(|x| *x != 1);
    d.sort();
    d
}

fn smith_diagonal(mut a: Vec<Vec<Integer>>, m: usize) -> Vec<Integer> {
    let nrows = a.len();
    let mut diag = Vec::new();
    for t in 0..m {
        loop {
            // smallest nonzero entry in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..nrows {
                for j in t..m {
                    if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].cmp_abs(&a[bi][bj]).is_lt()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                return diag;
            };
            a.swap(t, bi);
            for row in a.iter_mut() {
                row.swap(t, bj);
            }
            let piv = a[t][t].clone();
            let mut clean = true;
            for i in t + 1..nrows {
                if a[i][t].is_zero() {
                    continue;
                }
                let (q, _) = <(Integer, Integer)>::from(a[i][t].div_rem_floor_ref(&piv));
                for j in t..m {
                    let s = Integer::from(&q * &a[t][j]);
                    a[i][j] -= s;
                }
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..m {
                if a[t][j].is_zero() {
                    continue;
                }
                let (q, _) = <(Integer, Integer)>::from(a[t][j].div_rem_floor_ref(&piv));
                for i in t..nrows {
                    let s = Integer::from(&q * &a[i][t]);
                    a[i][j] -= s;
                }
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility of the rest by the pivot
            let bad = (t + 1..nrows).find(|&i| (t + 1..m).any(|j| !a[i][j].is_divisible(&piv)));
            match bad {
                Some(i) => {
                    for j in t..m {
                        let v = a[i][j].clone();
                        a[t][j] += v;
                    }
                }
                None => {
                    diag.push(piv.abs());
                    break;
                }
            }
        }
    }
    diag
}

/// Class group of `order` with the relations and certificates behind it.
pub fn class_group_with(order: &PureCubicOrder, opts: &ClassGroupOptions) -> Result<ClassGroupComputation> {
    let p = order.p;
    let effort = opts.effort;
    let log_d = order.abs_discriminant().ln();
    let base_bound = ((log_d * log_d * effort.base_scale()).ceil() as u64).max(30);
    let fb = FactorBase::new(order, base_bound);

    let certificate = opts.certificate.unwrap_or(if p <= ENUMERATION_LIMIT {
        Certificate::ProvedByEnumeration
    } else {
        Certificate::GrhAnalytic
    });
    let cert_bound = match certificate {
        Certificate::ProvedByEnumeration => order.minkowski_bound(),
        Certificate::GrhAnalytic => order.minkowski_bound().min(order.bach_bound()),
    }
    .floor() as u64;

    // every degree-1 prime ideal between the two bounds must lie in ⟨FB⟩
    let mut targets = Vec::new();
    for q in primes_up_to(cert_bound) {
        if q <= base_bound {
            continue;
        }
        match order.rational_prime(q).kind {
            PrimeKind::OneLinear(r) => targets.push((q, r)),
            PrimeKind::ThreeLinear(roots) => targets.extend(roots[..2].iter().map(|&r| (q, r))),
            _ => {}
        }
    }
    let coeff = effort.coefficient_bound();
    let certificates: Vec<Relation> = targets
        .par_iter()
        .map(|&(q, r)| {
            express_prime(order, &fb, q, r, opts.seed, effort.certificate_tries(), coeff)
                .ok_or(FieldError::CertificationFailed { p, q })
        })
        .collect::<Result<_>>()?;
    for rel in &certificates {
        verify_relation(order, rel)?;
    }

    let hr = analytic_hr(order);
    let mut relations: Vec<Relation> = Vec::new();
    let mut rows: Vec<(Vec<i64>, Float)> = Vec::new();
    let mut seen: HashSet<[i64; 3]> = HashSet::new();
    let mut next_trial = 0u64;
    let mut target = fb.width + 8;
    let mut last_ratio = f64::INFINITY;
    const BATCH: u64 = 16;
    let mut absorb = |batch: Vec<Vec<Relation>>, rows: &mut Vec<(Vec<i64>, Float)>| -> Result<()> {
        for rel in batch.into_iter().flatten() {
            let key = [
                rel.element.a.to_i64().expect("small"),
                rel.element.b.to_i64().expect("small"),
                rel.element.c.to_i64().expect("small"),
            ];
            if !seen.insert(normalize_sign(key)) {
                continue;
            }
            verify_relation(order, &rel)?;
            let Some(v) = fb.vector(&rel.factors) else { continue };
            let l = order.normalized_log(&rel.element, LOG_PREC);
            rows.push((v, l));
            relations.push(rel);
        }
        Ok(())
    };
    let mut forced = vec![0u64; fb.width];
    for _ in 0..effort.rounds() {
        let mut stalled = 0;
        while rows.len() < target && stalled < 64 {
            let batch: Vec<Vec<Relation>> = (next_trial..next_trial + BATCH)
                .into_par_iter()
                .map(|i| relations_from_trial(order, &fb, opts.seed, i, coeff))
                .collect();
            next_trial += BATCH;
            let before = rows.len();
            absorb(batch, &mut rows)?;
            stalled = if rows.len() == before { stalled + 1 } else { 0 };
        }

        let reduced = echelon(fb.width, rows.clone());
        if reduced.full_rank {
            if let Some(reg) = real_gcd(&reduced.unit_logs) {
                let det = reduced.pivots.iter().fold(Integer::from(1), |acc, (c, v)| acc * v[*c].clone().abs());
                let ratio = det.to_f64() * reg.to_f64() / hr;
                last_ratio = ratio;
                if ratio < 0.75 {
                    // impossible once the base generates the class group
                    return Err(FieldError::BadRelation(format!(
                        "h'R'/hR = {ratio} < 1 for p = {p}; factor base does not generate"
                    )));
                }
                if ratio < 1.5 {
                    let divisors = invariant_factors(&reduced.pivots, &det);
                    let h = det.to_u64().expect("class number fits u64");
                    let elementary_divisors: Vec<u64> = divisors.iter().map(|d| d.to_u64().expect("fits")).collect();
                    debug_assert_eq!(elementary_divisors.iter().product::<u64>(), h);
                    let two_rank = elementary_divisors.iter().filter(|d| *d % 2 == 0).count() as u32;
                    let structure = ClassGroupStructure {
                        p,
                        elementary_divisors,
                        two_rank,
                        certificate,
                        class_number: h,
                        regulator: reg.to_f64(),
                        analytic_hr: hr,
                        seed: opts.seed,
                        effort,
                        factor_base_bound: base_bound,
                        certified_bound: cert_bound,
                        relations: relations.len(),
                    };
                    return Ok(ClassGroupComputation { structure, relations, certificates, regulator: reg });
                }
            }
        }
        // columns still without a pivot get trials through their own prime
        for col in reduced.missing {
            let Some(&prime) = fb.columns.iter().find(|(_, &c)| c == col).map(|(k, _)| k) else { continue };
            let start = forced[col];
            forced[col] += BATCH;
            let batch: Vec<Vec<Relation>> = (start..start + BATCH)
                .into_par_iter()
                .map(|i| forced_trial(order, &fb, opts.seed, prime, i, coeff))
                .collect();
            absorb(batch, &mut rows)?;
        }
        target = rows.len() + (fb.width / 4).max(8);
    }
    Err(FieldError::NeedsMoreEffort { p, rounds: effort.rounds(), ratio: last_ratio })
}

/// `u > 1` generating the units modulo `±1`.
#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalUnit {
    pub p: u64,
    pub unit: Element,
    /// `ln σ₁(u)`.
    pub log: f64,
    /// Regulator the unit was checked against.
    pub regulator: f64,
    /// `ln u` matches the regulator, so `u` is fundamental.
    pub certified: bool,
}

/// Largest regulator for which an explicit unit is attempted.
pub const MAX_UNIT_REGULATOR: f64 = 2000.0;

pub fn fundamental_unit(p: u64) -> Result<FundamentalUnit> {
    let order = PureCubicOrder::new(p)?;
    let cg = class_group_with(&order, &ClassGroupOptions::default())?;
    fundamental_unit_of(&order, cg.structure.analytic_hr / cg.structure.class_number as f64)
}

/// Finds the unit whose log is `regulator` by LLL under the form
/// `e^{2R}σ₁² + e^{−R}|σ₂|²`, on which `u⁻¹` is short.
pub fn fundamental_unit_of(order: &PureCubicOrder, regulator: f64) -> Result<FundamentalUnit> {
    if !(regulator > 0.0) || regulator > MAX_UNIT_REGULATOR {
        return Err(FieldError::RegulatorTooLarge(regulator));
    }
    let prec = (3.0 * regulator * std::f64::consts::LOG2_E) as u32 + 160;
    let t = order.theta_real(prec);
    let t2 = Float::with_val(prec, t.square_ref());
    let s = [Float::with_val(prec, 1), t.clone(), t2.clone()];
    // Re(zᵢ z̄ⱼ) for z = (1, tω, t²ω²) is sᵢsⱼ·cos(2π(i−j)/3)
    let cosine = |i: usize, j: usize| if i == j { 1.0 } else { -0.5 };
    let r = Float::with_val(prec, regulator);
    let l1 = Float::with_val(prec, Float::with_val(prec, &r * 2u32).exp_ref());
    let l2 = Float::with_val(prec, (-r.clone()).exp_ref());
    let mut g: Vec<Vec<Float>> = vec![vec![Float::new(prec); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let sij = Float::with_val(prec, &s[i] * &s[j]);
            g[i][j] = Float::with_val(prec, &sij * &l1) + Float::with_val(prec, &sij * &l2) * cosine(i, j);
        }
    }
    let mut basis: Vec<Vec<Integer>> = (0..3).map(|i| (0..3).map(|j| Integer::from((i == j) as u32)).collect()).collect();
    lll_gram(&mut basis, &g, prec);

    let mut best: Option<(Element, Float)> = None;
    for x in -2i32..=2 {
        for y in -2i32..=2 {
            for z in -2i32..=2 {
                if (x, y, z) == (0, 0, 0) {
                    continue;
                }
                let mut v = [Integer::new(), Integer::new(), Integer::new()];
                for k in 0..3 {
                    v[k] = Integer::from(&basis[0][k] * x) + Integer::from(&basis[1][k] * y) + Integer::from(&basis[2][k] * z);
                }
                let [a, b, c] = v;
                let el = Element { a, b, c };
                let n = order.norm(&el);
                if n.cmp_abs(&Integer::from(1)) != std::cmp::Ordering::Equal {
                    continue;
                }
                let lg = order.real_embedding(&el, prec).abs().ln().abs();
                if lg < 1e-6 {
                    continue;
                }
                if best.as_ref().is_none_or(|(_, b)| lg < *b) {
                    best = Some((el, lg));
                }
            }
        }
    }
    let Some((mut u, _)) = best else {
        return Err(FieldError::UnitNotFound(regulator));
    };
    let sigma = order.real_embedding(&u, prec);
    if sigma.is_sign_negative() {
        u = u.neg();
    }
    if order.real_embedding(&u, prec).abs() < 1 {
        let n = order.norm(&u);
        u = order.adjoint(&u);
        if n < 0 {
            u = u.neg();
        }
    }
    let log = order.real_embedding(&u, prec).ln().to_f64();
    let certified = order.norm(&u) == 1 && ((log - regulator) / regulator).abs() < 1e-6;
    Ok(FundamentalUnit { p: order.p, unit: u, log, regulator, certified })
}

/// LLL on an integer basis under the Gram matrix `g` (coordinates in the
/// power basis), with Gram–Schmidt in `prec`-bit floats.
fn lll_gram(b: &mut [Vec<Integer>], g: &[Vec<Float>], prec: u32) {
    let n = b.len();
    let form = |x: &[Integer], y: &[Integer]| -> Float {
        let mut acc = Float::new(prec);
        for i in 0..3 {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..3 {
                if y[j].is_zero() {
                    continue;
                }
                let xy = Integer::from(&x[i] * &y[j]);
                acc += Float::with_val(prec, &g[i][j] * &xy);
            }
        }
        acc
    };
    let gso = |b: &[Vec<Integer>]| -> (Vec<Vec<Float>>, Vec<Float>) {
        let gram: Vec<Vec<Float>> = (0..n).map(|i| (0..n).map(|j| form(&b[i], &b[j])).collect()).collect();
        let mut mu = vec![vec![Float::new(prec); n]; n];
        let mut nn = vec![Float::new(prec); n];
        for i in 0..n {
            for j in 0..i {
                let mut v = gram[i][j].clone();
                for k in 0..j {
                    v -= Float::with_val(prec, &mu[i][k] * &mu[j][k]) * &nn[k];
                }
                mu[i][j] = v / &nn[j];
            }
            let mut v = gram[i][i].clone();
            for k in 0..i {
                v -= Float::with_val(prec, mu[i][k].square_ref()) * &nn[k];
            }
            nn[i] = v;
        }
        (mu, nn)
    };
    let mut k = 1;
    let mut guard = 0usize;
    while k < n && guard < 100_000 {
        guard += 1;
        for j in (0..k).rev() {
            let (mu, _) = gso(b);
            let q = mu[k][j].clone().round();
            if !q.is_zero() {
                let q = q.to_integer().expect("finite");
                for t in 0..3 {
                    let s = Integer::from(&q * &b[j][t]);
                    b[k][t] -= s;
                }
            }
        }
        let (mu, nn) = gso(b);
        let lhs = nn[k].clone();
        let mut rhs = Float::with_val(prec, 0.99) - Float::with_val(prec, mu[k][k - 1].square_ref());
        rhs *= &nn[k - 1];
        if lhs >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
}

/// Brute-force norm of `a + bθ + cθ²` as a determinant, for tests.
#[doc(hidden)]
pub fn norm_by_determinant(p: u64, a: i64, b: i64, c: i64) -> Integer {
    let p = Integer::from(p);
    let m = [
        [Integer::from(a), Integer::from(&p * c), Integer::from(&p * b)],
        [Integer::from(b), Integer::from(a), Integer::from(&p * c)],
        [Integer::from(c), Integer::from(b), Integer::from(a)],
    ];
    let mut det = Integer::new();
    for (j, sign) in [(0, 1i32), (1, -1), (2, 1)] {
        let (c1, c2) = match j {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let minor = Integer::from(&m[1][c1] * &m[2][c2]) - Integer::from(&m[1][c2] * &m[2][c1]);
        let mut term = Integer::from(&m[0][j] * &minor);
        if sign < 0 {
            term = -term;
        }
        det += term;
    }
    det
}
