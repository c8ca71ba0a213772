//! Arithmetic in the Eisenstein integers `Z[ω]`, `ω = (−1 + √−3)/2`.
//!
//! Elements are written `a + bω`. The norm is `a² − ab + b²`, and the ring is
//! Euclidean for it, which gives division with remainder, gcds and the cubic
//! residue symbol via cubic reciprocity.
//!
//! "Primary" in this crate means `≡ 1 (mod 3)`. Ireland–Rosen use `≡ 2 (mod 3)`;
//! the two conventions differ by the unit `−1`, which is a cube, so every
//! symbol value is the same under either choice.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::{Complex, Float, Integer};

use crate::error::EisensteinError;

/// An element `a + bω` of `Z[ω]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct EisensteinInteger {
    pub a: Integer,
    pub b: Integer,
}

impl EisensteinInteger {
    pub fn new(a: impl Into<Integer>, b: impl Into<Integer>) -> Self {
        EisensteinInteger { a: a.into(), b: b.into() }
    }

    pub fn zero() -> Self {
        Self::new(0, 0)
    }

    pub fn one() -> Self {
        Self::new(1, 0)
    }

    pub fn omega() -> Self {
        Self::new(0, 1)
    }

    /// `1 − ω`, the prime above 3 (norm 3).
    pub fn one_minus_omega() -> Self {
        Self::new(1, -1)
    }

    /// The six units, as successive powers of the generator `1 + ω = −ω²`.
    pub fn units() -> [EisensteinInteger; 6] {
        [
            Self::new(1, 0),
            Self::new(1, 1),
            Self::new(0, 1),
            Self::new(-1, 0),
            Self::new(-1, -1),
            Self::new(0, -1),
        ]
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn norm(&self) -> Integer {
        let ab = Integer::from(&self.a * &self.b);
        Integer::from(self.a.square_ref()) - ab + Integer::from(self.b.square_ref())
    }

    pub fn is_unit(&self) -> bool {
        self.norm() == 1
    }

    /// Complex conjugate: `conj(ω) = ω² = −1 − ω`.
    pub fn conj(&self) -> Self {
        EisensteinInteger {
            a: Integer::from(&self.a - &self.b),
            b: Integer::from(-&self.b),
        }
    }

    /// `self·ω`.
    pub fn mul_omega(&self) -> Self {
        // (a + bω)ω = aω + bω² = −b + (a − b)ω
        EisensteinInteger {
            a: Integer::from(-&self.b),
            b: Integer::from(&self.a - &self.b),
        }
    }

    /// Euclidean division rounding both coordinates of `self/d` to the nearest
    /// integer, ties toward −∞. Returns `(q, r)` with `self = q·d + r` and
    /// `norm(r) ≤ 3/4·norm(d)`.
    pub fn div_rem_nearest(&self, d: &EisensteinInteger) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero in Z[ω]");
        let n = d.norm();
        let num = self * &d.conj();
        let q = EisensteinInteger {
            a: round_half_down(&num.a, &n),
            b: round_half_down(&num.b, &n),
        };
        let r = self - &(&q * d);
        (q, r)
    }

    /// Canonical representative of `self` modulo `d` (see [`div_rem_nearest`](Self::div_rem_nearest)).
    pub fn rem_nearest(&self, d: &EisensteinInteger) -> Self {
        self.div_rem_nearest(d).1
    }

    pub fn is_divisible_by(&self, d: &EisensteinInteger) -> bool {
        if d.is_zero() {
            return self.is_zero();
        }
        let n = d.norm();
        let num = self * &d.conj();
        num.a.is_divisible(&n) && num.b.is_divisible(&n)
    }

    /// `self / d` when the division is exact.
    pub fn exact_div(&self, d: &EisensteinInteger) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        let n = d.norm();
        let num = self * &d.conj();
        if num.a.is_divisible(&n) && num.b.is_divisible(&n) {
            Some(EisensteinInteger { a: num.a.div_exact(&n), b: num.b.div_exact(&n) })
        } else {
            None
        }
    }

    /// Whether `1 − ω` divides `self`, i.e. `a + b ≡ 0 (mod 3)`.
    pub fn divisible_by_one_minus_omega(&self) -> bool {
        Integer::from(&self.a + &self.b).is_divisible_u(3)
    }

    /// `self ≡ 1 (mod 3)`.
    pub fn is_primary(&self) -> bool {
        Integer::from(&self.a - 1).is_divisible_u(3) && self.b.is_divisible_u(3)
    }

    /// The unique `(u, π)` with `u ∈ μ₆` and `π = u·self ≡ 1 (mod 3)`.
    pub fn primary_associate(&self) -> Result<(Self, Self), EisensteinError> {
        if self.divisible_by_one_minus_omega() {
            return Err(EisensteinError::DivisibleByThree);
        }
        for u in Self::units() {
            let cand = &u * self;
            if cand.is_primary() {
                return Ok((u, cand));
            }
        }
        unreachable!("μ₆ surjects onto (O/3)^×")
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// `self^e` reduced modulo `m` at every step.
    pub fn pow_mod(&self, e: &Integer, m: &EisensteinInteger) -> Self {
        let mut acc = Self::one().rem_nearest(m);
        let base = self.rem_nearest(m);
        for i in (0..e.significant_bits()).rev() {
            acc = (&acc * &acc).rem_nearest(m);
            if e.get_bit(i) {
                acc = (&acc * &base).rem_nearest(m);
            }
        }
        acc
    }

    /// Small-coordinate view, if both coordinates fit in `i64`.
    pub fn to_i64_pair(&self) -> Option<(i64, i64)> {
        Some((self.a.to_i64()?, self.b.to_i64()?))
    }

    /// Complex value `a + bω` at the given precision.
    pub fn to_complex(&self, prec: u32) -> Complex {
        let sqrt3 = Float::with_val(prec, 3).sqrt();
        let b = Float::with_val(prec, &self.b);
        let re = Float::with_val(prec, &self.a) - Float::with_val(prec, &b / 2u32);
        let im = b * sqrt3 / 2u32;
        Complex::with_val(prec, (re, im))
    }
}

fn round_half_down(x: &Integer, n: &Integer) -> Integer {
    // ceil((2x − n) / 2n) rounds x/n to nearest with ties toward −∞.
    let num = Integer::from(x * 2u32) - n;
    let den = Integer::from(n * 2u32);
    num.div_rem_ceil(den).0
}

impl fmt::Display for EisensteinInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b == 0 {
            write!(f, "{}", self.a)
        } else if self.a == 0 {
            write!(f, "{}ω", self.b)
        } else if self.b < 0 {
            write!(f, "{}{}ω", self.a, self.b)
        } else {
            write!(f, "{}+{}ω", self.a, self.b)
        }
    }
}

impl From<i64> for EisensteinInteger {
    fn from(a: i64) -> Self {
        Self::new(a, 0)
    }
}

impl<'a> Add<&'a EisensteinInteger> for &'a EisensteinInteger {
    type Output = EisensteinInteger;
    fn add(self, o: &EisensteinInteger) -> EisensteinInteger {
        EisensteinInteger { a: Integer::from(&self.a + &o.a), b: Integer::from(&self.b + &o.b) }
    }
}

impl<'a> Sub<&'a EisensteinInteger> for &'a EisensteinInteger {
    type Output = EisensteinInteger;
    fn sub(self, o: &EisensteinInteger) -> EisensteinInteger {
        EisensteinInteger { a: Integer::from(&self.a - &o.a), b: Integer::from(&self.b - &o.b) }
    }
}

impl<'a> Mul<&'a EisensteinInteger> for &'a EisensteinInteger {
    type Output = EisensteinInteger;
    fn mul(self, o: &EisensteinInteger) -> EisensteinInteger {
        // (a + bω)(c + dω) = (ac − bd) + (ad + bc − bd)ω
        let ac = Integer::from(&self.a * &o.a);
        let bd = Integer::from(&self.b * &o.b);
        let ad = Integer::from(&self.a * &o.b);
        let bc = Integer::from(&self.b * &o.a);
        EisensteinInteger { a: Integer::from(&ac - &bd), b: ad + bc - bd }
    }
}

impl Neg for &EisensteinInteger {
    type Output = EisensteinInteger;
    fn neg(self) -> EisensteinInteger {
        EisensteinInteger { a: Integer::from(-&self.a), b: Integer::from(-&self.b) }
    }
}

/// A value of the cubic residue symbol: `0` or a cube root of unity `ω^k`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum CubicResidue {
    Zero,
    /// `ω^k`, `k ∈ {0, 1, 2}`.
    Root(u8),
}

impl CubicResidue {
    pub const ONE: CubicResidue = CubicResidue::Root(0);

    pub fn omega_pow(k: i64) -> Self {
        CubicResidue::Root(k.rem_euclid(3) as u8)
    }

    pub fn exponent(self) -> Option<u8> {
        match self {
            CubicResidue::Zero => None,
            CubicResidue::Root(k) => Some(k),
        }
    }

    pub fn conj(self) -> Self {
        match self {
            CubicResidue::Zero => CubicResidue::Zero,
            CubicResidue::Root(k) => CubicResidue::Root((3 - k) % 3),
        }
    }

    pub fn pow(self, e: u32) -> Self {
        match self {
            CubicResidue::Zero if e == 0 => CubicResidue::ONE,
            CubicResidue::Zero => CubicResidue::Zero,
            CubicResidue::Root(k) => CubicResidue::omega_pow(k as i64 * e as i64),
        }
    }

    pub fn as_eisenstein(self) -> EisensteinInteger {
        match self {
            CubicResidue::Zero => EisensteinInteger::zero(),
            CubicResidue::Root(0) => EisensteinInteger::one(),
            CubicResidue::Root(1) => EisensteinInteger::omega(),
            CubicResidue::Root(_) => EisensteinInteger::new(-1, -1),
        }
    }
}

impl Mul for CubicResidue {
    type Output = CubicResidue;
    fn mul(self, o: CubicResidue) -> CubicResidue {
        match (self, o) {
            (CubicResidue::Root(x), CubicResidue::Root(y)) => CubicResidue::Root((x + y) % 3),
            _ => CubicResidue::Zero,
        }
    }
}

impl fmt::Display for CubicResidue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CubicResidue::Zero => write!(f, "0"),
            CubicResidue::Root(0) => write!(f, "1"),
            CubicResidue::Root(1) => write!(f, "ω"),
            CubicResidue::Root(_) => write!(f, "ω²"),
        }
    }
}

/// `(ω/β)₃ = ω^((Nβ − 1)/3)` for β coprime to 3.
fn omega_supplement(beta: &EisensteinInteger) -> CubicResidue {
    let n = beta.norm();
    let e = Integer::from(&n - 1) / 3u32;
    CubicResidue::omega_pow(e.mod_u(3) as i64)
}

/// `((1 − ω)/β)₃ = ω^(2m)` where `−β = (3m − 1) + 3nω` for primary β.
fn one_minus_omega_supplement(beta: &EisensteinInteger) -> CubicResidue {
    let neg_a = Integer::from(-&beta.a);
    let m = (neg_a + 1u32) / 3u32;
    CubicResidue::omega_pow(2 * m.mod_u(3) as i64)
}

/// The cubic residue symbol `(α/β)₃` for any β coprime to 3.
///
/// Multiplicative in β (Jacobi-style), so composite moduli are fine. Computed
/// by Euclidean reduction plus cubic reciprocity, never by factoring.
pub fn cubic_residue_symbol(
    alpha: &EisensteinInteger,
    beta: &EisensteinInteger,
) -> Result<CubicResidue, EisensteinError> {
    if beta.is_zero() || beta.divisible_by_one_minus_omega() {
        return Err(EisensteinError::DivisibleByThree);
    }
    let (_, mut b) = beta.primary_associate()?;
    let mut a = alpha.clone();
    let mut acc = CubicResidue::ONE;
    loop {
        if b.is_unit() {
            return Ok(acc);
        }
        a = a.rem_nearest(&b);
        if a.is_zero() {
            return Ok(CubicResidue::Zero);
        }
        let mut k = 0u32;
        while a.divisible_by_one_minus_omega() {
            a = a.exact_div(&EisensteinInteger::one_minus_omega()).expect("checked divisibility");
            k += 1;
        }
        let (unit, prim) = a.primary_associate().expect("coprime to 1 − ω");
        // a = unit⁻¹·prim; the unit's symbol is (ω/b)^j with unit⁻¹ = ±ω^j, and (−1/b) = 1.
        let j = unit_omega_exponent(&unit);
        acc = acc * omega_supplement(&b).pow(((3 - j) % 3) as u32);
        acc = acc * one_minus_omega_supplement(&b).pow(k);
        // Both primary: (prim/b) = (b/prim).
        a = b;
        b = prim;
    }
}

/// For `u = ±ω^j`, returns `j`.
fn unit_omega_exponent(u: &EisensteinInteger) -> u8 {
    let units = EisensteinInteger::units();
    let idx = units.iter().position(|x| x == u).expect("not a unit");
    // units[i] = (1+ω)^i = (−ω²)^i = (−1)^i ω^(2i)
    ((2 * idx) % 3) as u8
}

/// Independent check of the symbol for prime π: reduce `α^((Nπ−1)/3)` mod π and
/// match it against `1, ω, ω²`. Slow; used as an oracle.
pub fn cubic_symbol_by_powering(
    alpha: &EisensteinInteger,
    pi: &EisensteinInteger,
) -> Result<CubicResidue, EisensteinError> {
    if pi.divisible_by_one_minus_omega() {
        return Err(EisensteinError::DivisibleByThree);
    }
    if alpha.is_divisible_by(pi) {
        return Ok(CubicResidue::Zero);
    }
    let e = (pi.norm() - 1u32) / 3u32;
    let r = alpha.pow_mod(&e, pi);
    for k in 0..3 {
        let w = CubicResidue::Root(k).as_eisenstein();
        if (&r - &w).is_divisible_by(pi) {
            return Ok(CubicResidue::Root(k));
        }
    }
    Err(EisensteinError::NotPrime)
}

/// `(c/p)₃` for a rational prime `p ≡ 2 (mod 3)` (inert in Z[ω]) and small `c`,
/// via `c^((p²−1)/3)` in `F_p[ω] = F_{p²}`.
pub fn cubic_symbol_mod_inert(a: i64, b: i64, p: u64) -> CubicResidue {
    debug_assert!(p % 3 == 2);
    let x = a.rem_euclid(p as i64) as u64;
    let y = b.rem_euclid(p as i64) as u64;
    if x == 0 && y == 0 {
        return CubicResidue::Zero;
    }
    let e = (p as u128 * p as u128 - 1) / 3;
    let (rx, ry) = fp2_pow((x, y), e, p);
    match (rx, ry) {
        (1, 0) => CubicResidue::Root(0),
        (0, 1) => CubicResidue::Root(1),
        (u, v) if u == p - 1 && v == p - 1 => CubicResidue::Root(2),
        _ => unreachable!("power is not a cube root of unity"),
    }
}

/// `(c/2)₃`: the cube root of unity congruent to `c` mod 2.
pub fn cubic_symbol_mod_two(a: i64, b: i64) -> CubicResidue {
    match (a.rem_euclid(2), b.rem_euclid(2)) {
        (0, 0) => CubicResidue::Zero,
        (1, 0) => CubicResidue::Root(0),
        (0, 1) => CubicResidue::Root(1),
        _ => CubicResidue::Root(2),
    }
}

/// `(c / 2^i p^j)₃` by multiplicativity, for small `c` and inert `p`.
pub fn cubic_symbol_2i_pj(a: i64, b: i64, i: u32, p: u64, j: u32) -> CubicResidue {
    let two = if i == 0 { CubicResidue::ONE } else { cubic_symbol_mod_two(a, b).pow(i) };
    let odd = if j == 0 { CubicResidue::ONE } else { cubic_symbol_mod_inert(a, b, p).pow(j) };
    two * odd
}

fn fp2_mul(x: (u64, u64), y: (u64, u64), p: u64) -> (u64, u64) {
    // (a + bω)(c + dω) = (ac − bd) + (ad + bc − bd)ω
    let p128 = p as u128;
    let ac = x.0 as u128 * y.0 as u128 % p128;
    let bd = x.1 as u128 * y.1 as u128 % p128;
    let ad = x.0 as u128 * y.1 as u128 % p128;
    let bc = x.1 as u128 * y.0 as u128 % p128;
    let re = (ac + p128 - bd) % p128;
    let im = (ad + bc + p128 - bd) % p128;
    (re as u64, im as u64)
}

fn fp2_pow(mut base: (u64, u64), mut e: u128, p: u64) -> (u64, u64) {
    let mut acc = (1u64, 0u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = fp2_mul(acc, base, p);
        }
        base = fp2_mul(base, base, p);
        e >>= 1;
    }
    acc
}

/// Reps of `(O/mO)^×` for `m = p` or `m = 2p`, closed under negation.
#[derive(Clone, Debug)]
pub struct SymmetricResidueSystem {
    pub modulus: EisensteinInteger,
    pub reps: Vec<EisensteinInteger>,
    m: u64,
    p: u64,
}

impl SymmetricResidueSystem {
    /// The rational modulus `m`.
    pub fn rational_modulus(&self) -> u64 {
        self.m
    }

    /// The odd prime `p` with `m ∈ {p, 2p}`.
    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Representatives as `(a, b)` pairs.
    pub fn small_reps(&self) -> Vec<(i64, i64)> {
        self.reps.iter().map(|c| c.to_i64_pair().expect("reps are small")).collect()
    }

    /// Canonical representative of the class of `(a, b)`.
    pub fn canonical(&self, a: i64, b: i64) -> (i64, i64) {
        (canonical_coord(a, self.m as i64), canonical_coord(b, self.m as i64))
    }
}

/// Coordinate reduction into `(−m/2, m/2]` (nearest rounding, ties toward −∞).
pub fn canonical_coord(x: i64, m: i64) -> i64 {
    let q = (2 * x - m).div_euclid(2 * m) + i64::from((2 * x - m).rem_euclid(2 * m) != 0);
    x - q * m
}

/// Builds the residue system for a rational modulus `m = p` or `m = 2p`,
/// `p` an odd prime other than 3.
///
/// Representatives have both coordinates in `(−m/2, m/2]`, ordered by `b`
/// then `a`.
pub fn symmetric_residue_system(m: u64) -> Result<SymmetricResidueSystem, EisensteinError> {
    let p = if m % 2 == 1 { m } else { m / 2 };
    if p < 5 || p % 2 == 0 || !crate::arith::is_prime(p) {
        return Err(EisensteinError::UnsupportedModulus(m));
    }
    let mi = m as i64;
    let lo = -((mi - 1) / 2);
    let hi = mi / 2;
    let mut reps = Vec::with_capacity((m * m) as usize);
    for b in lo..=hi {
        for a in lo..=hi {
            let n = (a * a - a * b + b * b) as u64;
            if crate::arith::gcd(n, m) == 1 {
                reps.push(EisensteinInteger::new(a, b));
            }
        }
    }
    Ok(SymmetricResidueSystem { modulus: EisensteinInteger::new(m as i64, 0), reps, m, p })
}
