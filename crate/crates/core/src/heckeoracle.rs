//! L-values of `Cₙ: x³ + y³ = n` straight from the Hecke character
//! `ψₙ((α)) = conj((n/α)₃)·α`, `α ≡ 1 (mod 3)`, used as an independent check
//! on the finite ℘-sums in [`crate::lvalue`].
//!
//! The conductor and sign are not derived from local theory. Each candidate
//! `(N, ε)` on a small grid is tested against the functional equation in its
//! theta form `θ(1/t) = ε·t²·θ(t)`, `θ(t) = Σ aₘ·exp(−2πmt/√N)`, which is the
//! Mellin transform of `Λ(s) = ε·Λ(2 − s)`.

use rug::float::Constant;
use rug::{Assign, Float};

use crate::arith::pow_mod;
use crate::error::OracleError;
use crate::special::e1;

/// Offsets `t` at which the theta relation is tested.
pub const THETA_OFFSETS: [f64; 3] = [1.1, 1.25, 1.4];

/// Relative residual below which a candidate passes the theta test.
const THETA_TOLERANCE: f64 = 1e-7;

/// Dirichlet coefficients of `L(Cₙ, s)` with the resolved conductor and sign.
#[derive(Clone, Debug)]
pub struct HeckeSeries {
    pub n: u64,
    /// `coefficients[m] = aₘ` for `1 ≤ m ≤ X`; index 0 is unused.
    pub coefficients: Vec<i64>,
    pub conductor: u64,
    pub root_number: i8,
}

impl HeckeSeries {
    pub fn a(&self, m: usize) -> i64 {
        self.coefficients[m]
    }

    /// Largest index held.
    pub fn len(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `L(1) = (1 + ε)·Σ aₘ/m·exp(−2πm/√N)` at `prec` bits.
    pub fn central_value(&self, prec: u32) -> Result<OracleValue, OracleError> {
        let need = terms_for_bits(self.conductor, 1.0, prec + 10);
        if need > self.len() {
            let ext = hecke_series_with(self.n, need, self.conductor, self.root_number)?;
            return ext.central_value(prec);
        }
        let wprec = prec + 32;
        let pi = Float::with_val(wprec, Constant::Pi);
        let sqrt_n = Float::with_val(wprec, self.conductor).sqrt();
        let step = (-(Float::with_val(wprec, &pi * 2u32) / &sqrt_n)).exp();
        let mut pw = Float::with_val(wprec, 1);
        let mut sum = Float::with_val(wprec, 0);
        let mut abs_sum = 0f64;
        let mut t = Float::new(wprec);
        for m in 1..=need {
            pw *= &step;
            let a = self.coefficients[m];
            if a == 0 {
                continue;
            }
            t.assign(&pw * a);
            t /= m as u64;
            abs_sum += t.to_f64().abs();
            sum += &t;
        }
        let value = if self.root_number == 1 { sum * 2u32 } else { Float::with_val(wprec, 0) };
        // rounding in the running power and the sum, plus the truncated tail
        let err = 2.0 * abs_sum * (need as f64) * f64::powi(2.0, -(wprec as i32) + 2) + f64::powi(2.0, -(prec as i32) - 8);
        Ok(OracleValue {
            n: self.n,
            value: Float::with_val(prec, value),
            error: Float::with_val(53, err),
            root_number: self.root_number,
            conductor: self.conductor,
        })
    }

    /// `L′(1) = 2·Σ aₘ/m·E₁(2πm/√N)` in double precision, for `ε = −1`.
    pub fn derivative_value(&self) -> Result<OracleValue, OracleError> {
        if self.root_number != -1 {
            return Err(OracleError::RootNumberPositive(self.n));
        }
        let need = terms_for_bits(self.conductor, 1.0, 64);
        if need > self.len() {
            let ext = hecke_series_with(self.n, need, self.conductor, self.root_number)?;
            return ext.derivative_value();
        }
        let c = 2.0 * std::f64::consts::PI / (self.conductor as f64).sqrt();
        let (mut sum, mut comp, mut abs_sum) = (0f64, 0f64, 0f64);
        for m in 1..=need {
            let a = self.coefficients[m];
            if a == 0 {
                continue;
            }
            let term = 2.0 * a as f64 / m as f64 * e1(c * m as f64);
            abs_sum += term.abs();
            // Kahan
            let y = term - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
        }
        let err = abs_sum * 1e-14 + 1e-18;
        Ok(OracleValue {
            n: self.n,
            value: Float::with_val(53, sum),
            error: Float::with_val(53, err),
            root_number: -1,
            conductor: self.conductor,
        })
    }
}

/// An oracle L-value (or derivative) with its error estimate.
#[derive(Clone, Debug)]
pub struct OracleValue {
    pub n: u64,
    pub value: Float,
    /// Heuristic: rounding of the summation plus the truncated tail.
    pub error: Float,
    pub root_number: i8,
    pub conductor: u64,
}

/// Prime factors of `n` other than 2 and 3, or an error if `n` is outside
/// the supported shape (cube-free, prime to 3).
fn odd_support(n: u64) -> Result<Vec<u64>, OracleError> {
    if n == 0 || n.is_multiple_of(3) {
        return Err(OracleError::UnsupportedN(n));
    }
    let mut r = n;
    let mut out = Vec::new();
    let mut q = 2u64;
    while q * q <= r {
        if r.is_multiple_of(q) {
            let mut e = 0;
            while r.is_multiple_of(q) {
                r /= q;
                e += 1;
            }
            if e >= 3 {
                return Err(OracleError::UnsupportedN(n));
            }
            if q != 2 {
                out.push(q);
            }
        }
        q += 1;
    }
    if r > 2 {
        out.push(r);
    }
    Ok(out)
}

/// `x + yω` of norm `q` with `x + y·r ≡ 0 (mod q)`, by Lagrange reduction of
/// that index-`q` lattice under the form `x² − xy + y²`.
fn split_prime(q: u64, r: u64) -> (i64, i64) {
    let norm = |v: (i128, i128)| v.0 * v.0 - v.0 * v.1 + v.1 * v.1;
    // 2·B(u, v) for the bilinear form of the norm
    let dot2 = |u: (i128, i128), v: (i128, i128)| 2 * u.0 * v.0 - u.0 * v.1 - u.1 * v.0 + 2 * u.1 * v.1;
    let mut u = (q as i128, 0i128);
    let mut v = (-(r as i128), 1i128);
    loop {
        if norm(u) < norm(v) {
            std::mem::swap(&mut u, &mut v);
        }
        let nv = norm(v);
        // μ = round(B(u, v)/Q(v))
        let num = dot2(u, v);
        let mu = (num + nv).div_euclid(2 * nv);
        if mu == 0 {
            break;
        }
        u = (u.0 - mu * v.0, u.1 - mu * v.1);
        if norm(u) >= nv {
            break;
        }
    }
    let s = if norm(u) < norm(v) { u } else { v };
    debug_assert_eq!(norm(s), q as i128);
    (s.0 as i64, s.1 as i64)
}

fn mul_omega(x: i64, y: i64) -> (i64, i64) {
    // ω(x + yω) = −y + (x − y)ω
    (-y, x - y)
}

/// `a_q` for a prime `q ≡ 1 (mod 3)` not dividing `3n`.
fn split_trace(n: u64, q: u64) -> i64 {
    let r = crate::arith::cube_root_of_unity(q);
    let (mut x, mut y) = split_prime(q, r);
    // unit multiple ≡ 1 (mod 3); multiplying by units keeps ω ≡ r mod π
    for k in 0..6 {
        if x.rem_euclid(3) == 1 && y.rem_euclid(3) == 0 {
            break;
        }
        (x, y) = mul_omega(x, y);
        if k == 2 {
            (x, y) = (-x, -y);
        }
    }
    debug_assert!(x.rem_euclid(3) == 1 && y.rem_euclid(3) == 0);
    // (n/π)₃ ≡ n^((q−1)/3) mod π, read off through ω ≡ r
    let t = pow_mod(n % q, (q - 1) / 3, q);
    let k = if t == 1 {
        0
    } else if t == r {
        1
    } else {
        debug_assert_eq!(t, r * r % q);
        2
    };
    // ψ(π) = ω^(−k)·π = ω^(2k)·π
    for _ in 0..(2 * k) % 3 {
        (x, y) = mul_omega(x, y);
    }
    2 * x - y
}

/// `aₘ` for `1 ≤ m ≤ x` (index 0 unused). Primes dividing `3n` get 0; for
/// odd `n` the prime 2 is good and inert.
pub fn dirichlet_coefficients(n: u64, x: usize) -> Result<Vec<i64>, OracleError> {
    odd_support(n)?;
    let x = x.max(2);
    let mut spf = vec![0u32; x + 1];
    let mut a = vec![0i64; x + 1];
    a[1] = 1;
    for m in 2..=x {
        if spf[m] == 0 {
            // m is prime
            let mut j = m;
            while j <= x {
                if spf[j] == 0 {
                    spf[j] = m as u32;
                }
                j += m;
            }
        }
        let q = spf[m] as usize;
        let mut r = m;
        let mut qe = 1usize;
        while r % q == 0 {
            r /= q;
            qe *= q;
        }
        if r != 1 {
            a[m] = a[qe] * a[r];
            continue;
        }
        // prime power q^e = m
        let qu = q as u64;
        let bad = qu == 3 || n.is_multiple_of(qu);
        if bad {
            a[m] = 0;
        } else if m == q {
            a[m] = if qu % 3 == 1 { split_trace(n, qu) } else { 0 };
        } else {
            let prev = a[m / q];
            let prev2 = if m / q == q { 1 } else { a[m / q / q] };
            a[m] = a[q] * prev - (q as i64) * prev2;
        }
    }
    Ok(a)
}

/// Conductor candidates `2^a·3^b·∏q²` (`q | n`, `q ≥ 5`), ascending.
pub fn conductor_candidates(n: u64) -> Result<Vec<u64>, OracleError> {
    let odd: u64 = odd_support(n)?.iter().map(|q| q * q).product();
    let mut out = Vec::new();
    for a in 0..=8u32 {
        for b in 0..=5u32 {
            out.push(2u64.pow(a) * 3u64.pow(b) * odd);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Number of terms until `exp(−2πmt/√N) < 2^(−bits)`.
fn terms_for_bits(conductor: u64, t: f64, bits: u32) -> usize {
    let c = 2.0 * std::f64::consts::PI * t / (conductor as f64).sqrt();
    ((bits as f64 * std::f64::consts::LN_2 + 8.0) / c).ceil() as usize + 1
}

/// `θ(t) = Σ aₘ·exp(−2πmt/√N)` in double precision.
fn theta(coeffs: &[i64], conductor: u64, t: f64) -> f64 {
    let c = 2.0 * std::f64::consts::PI * t / (conductor as f64).sqrt();
    let limit = terms_for_bits(conductor, t, 60).min(coeffs.len() - 1);
    let step = (-c).exp();
    let (mut sum, mut comp) = (0f64, 0f64);
    let mut pw = 1f64;
    for m in 1..=limit {
        if m % 512 == 0 {
            pw = (-c * m as f64).exp();
        } else {
            pw *= step;
        }
        let a = coeffs[m];
        if a != 0 {
            let y = a as f64 * pw - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
        }
    }
    sum
}

/// Largest relative defect of `θ(1/t) = ε·t²·θ(t)` over `offsets`.
pub fn theta_defect(coeffs: &[i64], conductor: u64, eps: i8, offsets: &[f64]) -> f64 {
    offsets
        .iter()
        .map(|&t| {
            let lhs = theta(coeffs, conductor, 1.0 / t);
            let rhs = eps as f64 * t * t * theta(coeffs, conductor, t);
            (lhs - rhs).abs() / (lhs.abs() + rhs.abs()).max(1e-300)
        })
        .fold(0.0, f64::max)
}

/// The unique `(N, ε)` on the candidate grid passing the theta test at `offsets`.
pub fn resolve_conductor(n: u64, coeffs: &[i64], offsets: &[f64]) -> Result<(u64, i8), OracleError> {
    let cands = conductor_candidates(n)?;
    let tmin = offsets.iter().cloned().fold(f64::INFINITY, f64::min).min(1.0);
    let nmax = *cands.last().expect("nonempty grid");
    assert!(
        coeffs.len() > terms_for_bits(nmax, tmin, 60),
        "too few coefficients for the theta test"
    );
    let mut hits = Vec::new();
    for &nc in &cands {
        for eps in [1i8, -1] {
            if theta_defect(coeffs, nc, eps, offsets) < THETA_TOLERANCE {
                hits.push((nc, eps));
            }
        }
    }
    match hits.len() {
        0 => Err(OracleError::ConductorUnresolved(n)),
        1 => Ok(hits[0]),
        _ => Err(OracleError::ConductorAmbiguous { n, candidates: hits }),
    }
}

/// Coefficients needed to run the theta test over the whole grid.
fn theta_terms(n: u64) -> Result<usize, OracleError> {
    let nmax = *conductor_candidates(n)?.last().expect("nonempty grid");
    let tmin = 1.0 / THETA_OFFSETS.iter().cloned().fold(0.0, f64::max);
    Ok(terms_for_bits(nmax, tmin, 60) + 1)
}

fn hecke_series_with(n: u64, x: usize, conductor: u64, root_number: i8) -> Result<HeckeSeries, OracleError> {
    Ok(HeckeSeries { n, coefficients: dirichlet_coefficients(n, x)?, conductor, root_number })
}

/// Coefficients up to `x` together with the conductor and sign resolved by
/// the theta test.
pub fn hecke_coefficients(n: u64, x: usize) -> Result<HeckeSeries, OracleError> {
    let need = theta_terms(n)?;
    let mut coefficients = dirichlet_coefficients(n, x.max(need))?;
    let (conductor, root_number) = resolve_conductor(n, &coefficients, &THETA_OFFSETS)?;
    coefficients.truncate(x.max(2) + 1);
    Ok(HeckeSeries { n, coefficients, conductor, root_number })
}

/// `L(Cₙ, 1)` with sign and conductor, at `precision_bits`.
pub fn lvalue_oracle(n: u64, precision_bits: u32) -> Result<OracleValue, OracleError> {
    let series = hecke_coefficients(n, 2)?;
    series.central_value(precision_bits)
}

/// `L′(Cₙ, 1)` for a curve of root number −1.
pub fn lprime_probe(n: u64) -> Result<OracleValue, OracleError> {
    let series = hecke_coefficients(n, 2)?;
    series.derivative_value()
}

/// Whether `n` is cube-free and prime to 3 (the oracle's domain).
pub fn is_supported(n: u64) -> bool {
    odd_support(n).is_ok()
}
