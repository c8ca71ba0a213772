//! The period lattice `L = ΩZ[ω]` of `y² = 4x³ − 1` and the functions ℘, ℘′,
//! ζ and `𝓔₁*` on it.
//!
//! ℘ is evaluated by reducing the argument to the Voronoi cell of 0 (so
//! `|z| ≤ Ω/√3`) and summing the Laurent series for `g₂ = 0, g₃ = 1`. Only
//! the coefficients of `z^(6j−2)` are nonzero, and in the reduced cell each
//! further term shrinks by about `3⁻³`, so ~`prec/4.7` terms suffice.
//!
//! Tables of division values `℘(cΩ/m)` are filled by walking rows
//! `c, c+1, …` with the group law, re-anchored by a series evaluation every
//! [`REANCHOR_INTERVAL`] steps.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use rug::float::Constant;
use rug::ops::NegAssign;
use rug::{Assign, Complex, Float, Integer};

use crate::eisenstein::{canonical_coord, SymmetricResidueSystem};
use crate::error::LatticeError;

/// Group-law steps between direct series evaluations in a table walk.
pub const REANCHOR_INTERVAL: usize = 64;

/// Extra bits carried by the series kernel over the requested precision.
const KERNEL_GUARD_BITS: u32 = 16;

/// The period Ω and the lattice constants derived from it.
#[derive(Clone, Debug)]
pub struct PeriodData {
    pub omega: Float,
    pub precision_bits: u32,
    /// `A(L) = (ūv − uv̄)/(2πi)` for the basis `u = Ω`, `v = Ωω`.
    pub a_of_l: Float,
    /// `s₂(L) = 2ζ(Ω/2)/Ω − 2π/(√3Ω²)`; zero for this lattice.
    pub s2_of_l: Float,
    /// `ζ(Ω/2, L)`.
    pub zeta_half: Float,
    /// `(℘(Ω/3), ℘′(Ω/3))`.
    pub wp_third: (Complex, Complex),
    kernel: Arc<WpKernel>,
}

impl PeriodData {
    /// Precision of the internal series kernel.
    pub fn kernel_precision(&self) -> u32 {
        self.kernel.prec
    }

    /// ℘ and ℘′ at `z`.
    pub fn wp(&self, z: &Complex) -> Result<(Complex, Complex), LatticeError> {
        self.kernel.wp(z)
    }

    /// Weierstrass ζ at `z`.
    pub fn zeta(&self, z: &Complex) -> Result<Complex, LatticeError> {
        self.kernel.zeta(z)
    }

    /// ℘ and ℘′ at the division point `(a + bω)Ω/m`, reduced exactly.
    pub fn wp_division_point(&self, a: i64, b: i64, m: u64) -> Result<(Complex, Complex), LatticeError> {
        self.kernel.wp_division_point(a, b, m)
    }

    /// A kernel at working precision at least `prec`.
    fn kernel_at(&self, prec: u32) -> Arc<WpKernel> {
        if self.kernel.prec >= prec {
            Arc::clone(&self.kernel)
        } else {
            Arc::new(WpKernel::new(prec))
        }
    }
}

/// Computes Ω and the derived constants at `precision_bits`.
///
/// Ω is `2∫_{e₁}^∞ dx/√(4x³−1)` with `e₁ = 4^(−1/3)`, obtained from the AGM.
pub fn compute_period(precision_bits: u32) -> Result<PeriodData, LatticeError> {
    if precision_bits < 53 {
        return Err(LatticeError::PrecisionTooLow(precision_bits));
    }
    let kernel = Arc::new(WpKernel::new(precision_bits + KERNEL_GUARD_BITS));
    let prec = kernel.prec;
    let omega = kernel.omega.clone();
    let pi = Float::with_val(prec, Constant::Pi);

    let u = Complex::with_val(prec, (&omega, 0));
    let v = Complex::with_val(prec, &u * &kernel.omega_unit);
    let cross = Complex::with_val(prec, u.conj_ref()) * &v - Complex::with_val(prec, v.conj_ref()) * &u;
    // cross is purely imaginary: (ūv − uv̄)/(2πi) = Im(cross)/(2π)
    let a_of_l = Float::with_val(prec, cross.imag()) / (Float::with_val(prec, &pi * 2u32));

    let half = Complex::with_val(prec, (Float::with_val(prec, &omega / 2u32), 0));
    let zeta_half = Float::with_val(prec, kernel.zeta(&half)?.real());
    let s2_of_l = Float::with_val(prec, &zeta_half * 2u32) / &omega
        - Float::with_val(prec, &pi * 2u32) / (Float::with_val(prec, omega.square_ref()) * &kernel.sqrt3);

    let third = Complex::with_val(prec, (Float::with_val(prec, &omega / 3u32), 0));
    let wp_third = kernel.wp(&third)?;

    Ok(PeriodData {
        omega: Float::with_val(precision_bits, &omega),
        precision_bits,
        a_of_l,
        s2_of_l,
        zeta_half,
        wp_third,
        kernel,
    })
}

/// `𝓔₁*(z, L) = ζ(z) − z·s₂(L) − z̄/A(L)`.
pub fn eisenstein_e1star(period: &PeriodData, z: &Complex) -> Result<Complex, LatticeError> {
    let prec = period.kernel.prec;
    let zeta = period.kernel.zeta(z)?;
    let zs2 = Complex::with_val(prec, z * &period.s2_of_l);
    let zbar_over_a = Complex::with_val(prec, z.conj_ref()) / &period.a_of_l;
    Ok(zeta - zs2 - zbar_over_a)
}

/// One entry of a [`DivisionValueTable`].
#[derive(Clone, Debug)]
pub struct DivisionValue {
    pub c: (i64, i64),
    pub wp: Complex,
    pub dwp: Complex,
}

/// `℘(cΩ/m)` and `℘′(cΩ/m)` for every representative `c` of a residue system.
#[derive(Clone, Debug)]
pub struct DivisionValueTable {
    pub modulus: u64,
    /// Entries in the order of the residue system's representatives.
    pub entries: Vec<DivisionValue>,
    /// Largest `|℘′² − (4℘³ − 1)|` over the table.
    pub max_residual: Float,
    pub working_precision: u32,
    index: HashMap<(i64, i64), usize>,
}

impl DivisionValueTable {
    pub fn get(&self, a: i64, b: i64) -> Option<&DivisionValue> {
        self.index.get(&(a, b)).map(|&i| &self.entries[i])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Working precision used for an `m`-division table at user precision `prec`.
pub fn table_working_precision(prec: u32, m: u64) -> u32 {
    let m2 = (m as f64) * (m as f64);
    prec + 10 + m2.log2().ceil() as u32
}

/// Fills the division-value table for `reps` by group-law walks along rows.
pub fn wp_division_values(
    period: &PeriodData,
    m: u64,
    reps: &SymmetricResidueSystem,
) -> Result<DivisionValueTable, LatticeError> {
    if reps.rational_modulus() != m {
        return Err(LatticeError::ModulusMismatch { m, reps: reps.rational_modulus() });
    }
    let wprec = table_working_precision(period.precision_bits, m);
    let kernel = period.kernel_at(wprec);
    let mi = m as i64;
    let lo = -((mi - 1) / 2);
    let hi = mi / 2;
    let q0 = kernel.wp_division_point(1, 0, m)?;

    let rows: Vec<Result<Vec<DivisionValue>, LatticeError>> = (lo..=hi)
        .into_par_iter()
        .map(|b| walk_row(&kernel, m, b, lo, hi, &q0))
        .collect();
    let mut entries = Vec::with_capacity(reps.len());
    for row in rows {
        entries.extend(row?);
    }
    let small = reps.small_reps();
    assert_eq!(entries.len(), small.len(), "walk visited a different set of units");
    for (e, c) in entries.iter().zip(&small) {
        assert_eq!(e.c, *c, "walk order differs from residue-system order");
    }

    let mut max_res = 0f64;
    let mut t = Complex::new(wprec);
    let mut u = Complex::new(wprec);
    for e in &entries {
        t.assign(e.dwp.square_ref());
        u.assign(e.wp.square_ref());
        u *= &e.wp;
        u *= 4u32;
        t -= &u;
        t += 1u32;
        let r = Float::with_val(wprec, t.abs_ref()).to_f64();
        if r > max_res {
            max_res = r;
        }
    }
    let tol = f64::powi(2.0, -(period.precision_bits as i32) / 2);
    if !(max_res <= tol) {
        return Err(LatticeError::PrecisionExhausted { residual: max_res, tolerance: tol });
    }
    let index = entries.iter().enumerate().map(|(i, e)| (e.c, i)).collect();
    Ok(DivisionValueTable {
        modulus: m,
        entries,
        max_residual: Float::with_val(53, max_res),
        working_precision: wprec,
        index,
    })
}

fn walk_row(
    kernel: &WpKernel,
    m: u64,
    b: i64,
    lo: i64,
    hi: i64,
    q0: &(Complex, Complex),
) -> Result<Vec<DivisionValue>, LatticeError> {
    let prec = kernel.prec;
    let mut out = Vec::new();
    let mut x = Complex::new(prec);
    let mut y = Complex::new(prec);
    let mut have = false;
    let mut steps = 0usize;
    let mut scratch = AddScratch::new(prec);
    for a in lo..=hi {
        if a == 0 && b == 0 {
            have = false;
            continue;
        }
        // Stepping from Q₀ itself would need the doubling formula.
        let from_q0 = b == 0 && a == 2;
        if !have || steps >= REANCHOR_INTERVAL || from_q0 {
            let (px, py) = kernel.wp_division_point(a, b, m)?;
            x = px;
            y = py;
            have = true;
            steps = 0;
        } else {
            add_points(&mut x, &mut y, &q0.0, &q0.1, &mut scratch);
            steps += 1;
        }
        let n = (a * a - a * b + b * b) as u64;
        if crate::arith::gcd(n, m) == 1 {
            out.push(DivisionValue { c: (a, b), wp: x.clone(), dwp: y.clone() });
        }
    }
    Ok(out)
}

struct AddScratch {
    lam: Complex,
    t1: Complex,
    t2: Complex,
}

impl AddScratch {
    fn new(prec: u32) -> Self {
        AddScratch { lam: Complex::new(prec), t1: Complex::new(prec), t2: Complex::new(prec) }
    }
}

/// `(x, y) ← (x, y) + (qx, qy)` on `y² = 4x³ − 1`, for `x ≠ qx`.
fn add_points(x: &mut Complex, y: &mut Complex, qx: &Complex, qy: &Complex, s: &mut AddScratch) {
    s.t1.assign(&*y - qy);
    s.t2.assign(&*x - qx);
    s.lam.assign(&s.t1 / &s.t2);
    // x₃ = λ²/4 − x₁ − x₂
    s.t1.assign(s.lam.square_ref());
    s.t1 /= 4u32;
    s.t1 -= &*x;
    s.t1 -= qx;
    // y₃ = −(λ(x₃ − x₁) + y₁)
    s.t2.assign(&s.t1 - &*x);
    s.t2 *= &s.lam;
    s.t2 += &*y;
    s.t2.neg_assign();
    std::mem::swap(x, &mut s.t1);
    std::mem::swap(y, &mut s.t2);
}

/// Laurent-series evaluator for ℘ and ζ at a fixed precision.
#[derive(Debug)]
struct WpKernel {
    prec: u32,
    omega: Float,
    sqrt3: Float,
    /// ω = (−1 + √−3)/2 as a complex number.
    omega_unit: Complex,
    /// `C_j = c_{3j}`, the coefficient of `z^(6j−2)` in ℘, `j ≥ 1`.
    coeffs: Vec<Float>,
    /// `(6j − 2)·C_j` for ℘′.
    dcoeffs: Vec<Float>,
    /// `C_j/(6j − 1)` for ζ.
    zcoeffs: Vec<Float>,
    log2_coeffs: Vec<f64>,
    /// ζ(Ω/2)·2 = η(Ω).
    eta1: Complex,
}

impl WpKernel {
    fn new(prec: u32) -> Self {
        let omega = agm_period(prec);
        let sqrt3 = Float::with_val(prec, 3).sqrt();
        let half_sqrt3 = Float::with_val(prec, &sqrt3 / 2u32);
        let omega_unit = Complex::with_val(prec, (-0.5f64, half_sqrt3));

        // Terms needed at the cell's corner |z| = Ω/√3: C_j·|z|^(6j) < 2^(−prec−8).
        let rmax = omega.to_f64() / 3f64.sqrt() * (1.0 + 1e-9);
        let mut coeffs: Vec<Float> = Vec::new();
        let mut log2_coeffs = Vec::new();
        let mut j = 1usize;
        loop {
            let c = if j == 1 {
                Float::with_val(prec, 1) / 28u32
            } else {
                let mut s = Float::with_val(prec, 0);
                for i in 1..j {
                    s += Float::with_val(prec, &coeffs[i - 1] * &coeffs[j - i - 1]);
                }
                s / ((6 * j as u64 + 1) * (j as u64 - 1))
            };
            let l2 = c.to_f64().log2();
            coeffs.push(c);
            log2_coeffs.push(l2);
            if l2 + 6.0 * j as f64 * rmax.log2() < -(prec as f64) - 8.0 {
                break;
            }
            j += 1;
        }
        let dcoeffs = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| Float::with_val(prec, c * (6 * (i as u32 + 1) - 2)))
            .collect();
        let zcoeffs = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| Float::with_val(prec, c / (6 * (i as u32 + 1) - 1)))
            .collect();
        let mut k = WpKernel {
            prec,
            omega,
            sqrt3,
            omega_unit,
            coeffs,
            dcoeffs,
            zcoeffs,
            log2_coeffs,
            eta1: Complex::new(prec),
        };
        let half = Complex::with_val(prec, (Float::with_val(prec, &k.omega / 2u32), 0));
        let zh = k.zeta_reduced(&half);
        k.eta1 = zh * 2u32;
        k
    }

    /// `|r|` indistinguishable from 0 at the caller's precision (Ω ≈ 3).
    fn is_negligible(&self, r: &Complex) -> bool {
        let a = Float::with_val(64, r.abs_ref());
        let guard = (KERNEL_GUARD_BITS + 8) as i32;
        a.is_zero() || a < Float::with_val(64, Float::i_exp(1, guard - self.prec as i32))
    }

    /// Number of series terms needed at `|r|`.
    fn terms_for(&self, r: &Complex) -> usize {
        let a = Float::with_val(53, r.abs_ref()).to_f64();
        if a == 0.0 {
            return 0;
        }
        let l = a.log2();
        let target = -(self.prec as f64) - 4.0;
        for (i, &lc) in self.log2_coeffs.iter().enumerate() {
            if lc + 6.0 * (i + 1) as f64 * l < target {
                return i + 1;
            }
        }
        self.coeffs.len()
    }

    /// Horner evaluation of `Σ_{j<n} coeffs[j]·t^j`.
    fn horner(&self, coeffs: &[Float], t: &Complex, n: usize) -> Complex {
        let mut acc = Complex::with_val(self.prec, 0);
        for c in coeffs[..n].iter().rev() {
            acc *= t;
            acc += c;
        }
        acc
    }

    /// ℘, ℘′ at a point already in the Voronoi cell of 0.
    fn wp_reduced(&self, r: &Complex) -> Result<(Complex, Complex), LatticeError> {
        if self.is_negligible(r) {
            return Err(LatticeError::LatticePoint);
        }
        let prec = self.prec;
        let n = self.terms_for(r);
        let r2 = Complex::with_val(prec, r.square_ref());
        let r3 = Complex::with_val(prec, &r2 * r);
        let t = Complex::with_val(prec, r3.square_ref());
        let p = self.horner(&self.coeffs, &t, n);
        let dp = self.horner(&self.dcoeffs, &t, n);
        // ℘ = r⁻² + r⁴·P(t),  ℘′ = −2r⁻³ + r³·P′(t)
        let inv_r2 = Complex::with_val(prec, r2.recip_ref());
        let r4 = Complex::with_val(prec, r2.square_ref());
        let wp = Complex::with_val(prec, &r4 * &p) + &inv_r2;
        let inv_r3 = Complex::with_val(prec, r3.recip_ref());
        let dwp = Complex::with_val(prec, &r3 * &dp) - Complex::with_val(prec, &inv_r3 * 2u32);
        Ok((wp, dwp))
    }

    fn zeta_reduced(&self, r: &Complex) -> Complex {
        let prec = self.prec;
        let n = self.terms_for(r);
        let r2 = Complex::with_val(prec, r.square_ref());
        let r3 = Complex::with_val(prec, &r2 * r);
        let t = Complex::with_val(prec, r3.square_ref());
        let q = self.horner(&self.zcoeffs, &t, n);
        // ζ = 1/r − r⁵·Q(t)
        let r5 = Complex::with_val(prec, &r3 * &r2);
        Complex::with_val(prec, r.recip_ref()) - r5 * q
    }

    /// `z = r + (n₁ + n₂ω)Ω` with `r` in the Voronoi cell of 0.
    fn reduce(&self, z: &Complex) -> (Complex, Integer, Integer) {
        let prec = self.prec;
        // z/Ω = x + yω:  y = 2·Im/√3,  x = Re + y/2
        let zr = Float::with_val(prec, z.real() / &self.omega);
        let zi = Float::with_val(prec, z.imag() / &self.omega);
        let y = Float::with_val(prec, &zi * 2u32) / &self.sqrt3;
        let x = Float::with_val(prec, &y / 2u32) + &zr;
        let n1 = x.to_integer().unwrap_or_default();
        let n2 = y.to_integer().unwrap_or_default();
        let mut best: Option<(Float, Complex, Integer, Integer)> = None;
        for (d1, d2) in NEIGHBOURS {
            let k1 = Integer::from(&n1 + d1);
            let k2 = Integer::from(&n2 + d2);
            let w = self.lattice_point(&k1, &k2);
            let r = Complex::with_val(prec, z - &w);
            let nr = Float::with_val(prec, r.abs_ref());
            if best.as_ref().is_none_or(|b| nr < b.0) {
                best = Some((nr, r, k1, k2));
            }
        }
        let (_, r, k1, k2) = best.expect("nonempty");
        (r, k1, k2)
    }

    fn lattice_point(&self, k1: &Integer, k2: &Integer) -> Complex {
        let prec = self.prec;
        let w = Complex::with_val(prec, &self.omega_unit * Float::with_val(prec, k2));
        (w + Float::with_val(prec, k1)) * &self.omega
    }

    fn wp(&self, z: &Complex) -> Result<(Complex, Complex), LatticeError> {
        let (r, _, _) = self.reduce(z);
        self.wp_reduced(&r)
    }

    fn zeta(&self, z: &Complex) -> Result<Complex, LatticeError> {
        let (r, k1, k2) = self.reduce(z);
        if self.is_negligible(&r) {
            return Err(LatticeError::LatticePoint);
        }
        let prec = self.prec;
        // η(k₁Ω + k₂ωΩ) = k₁η(Ω) + k₂ω̄η(Ω)
        let wbar = Complex::with_val(prec, self.omega_unit.conj_ref());
        let coef = wbar * Float::with_val(prec, &k2) + Float::with_val(prec, &k1);
        let eta = Complex::with_val(prec, &coef * &self.eta1);
        Ok(self.zeta_reduced(&r) + eta)
    }

    /// ℘ at `(a + bω)Ω/m`, reducing `a + bω` modulo `m` exactly to the
    /// representative of least norm.
    fn wp_division_point(&self, a: i64, b: i64, m: u64) -> Result<(Complex, Complex), LatticeError> {
        let mi = m as i64;
        let (a0, b0) = (canonical_coord(a, mi), canonical_coord(b, mi));
        if a0 == 0 && b0 == 0 {
            return Err(LatticeError::LatticePoint);
        }
        let (mut ba, mut bb) = (a0, b0);
        let mut bn = norm_i(a0, b0);
        for (d1, d2) in NEIGHBOURS {
            let (ca, cb) = (a0 - d1 as i64 * mi, b0 - d2 as i64 * mi);
            let n = norm_i(ca, cb);
            if n < bn {
                (ba, bb, bn) = (ca, cb, n);
            }
        }
        let prec = self.prec;
        let scale = Float::with_val(prec, &self.omega / m);
        let w = Complex::with_val(prec, &self.omega_unit * bb) + ba;
        let z = w * scale;
        self.wp_reduced(&z)
    }
}

const NEIGHBOURS: [(i32, i32); 7] = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)];

fn norm_i(a: i64, b: i64) -> i128 {
    let (a, b) = (a as i128, b as i128);
    a * a - a * b + b * b
}

/// Ω by the AGM. The roots of `4x³ − 1` are `e₁ = 4^(−1/3)` and `e₁ω^{±1}`;
/// with `r = |e₁ − e₂| = √3·e₁`, `Ω = π / AGM(√r, √((r + 3e₁/2)/2))`.
fn agm_period(prec: u32) -> Float {
    let wprec = prec + 16;
    let e1 = Float::with_val(wprec, 4).cbrt().recip();
    let sqrt3 = Float::with_val(wprec, 3).sqrt();
    let r = Float::with_val(wprec, &e1 * &sqrt3);
    let a = Float::with_val(wprec, r.sqrt_ref());
    let three_half_e1 = Float::with_val(wprec, &e1 * 3u32) / 2u32;
    let b = ((r + three_half_e1) / 2u32).sqrt();
    let m = a.agm(&b);
    let pi = Float::with_val(wprec, Constant::Pi);
    Float::with_val(prec, pi / m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn period_first_digits() {
        let pd = compute_period(64).unwrap();
        let w = pd.omega.to_f64();
        assert!((w - 3.059908).abs() < 5e-7, "{w}");
        assert!(compute_period(40).is_err());
    }

    #[test]
    fn series_coefficients_start() {
        let k = WpKernel::new(64);
        assert!((k.coeffs[0].to_f64() - 1.0 / 28.0).abs() < 1e-18);
        assert!((k.coeffs[1].to_f64() - 1.0 / (13.0 * 784.0)).abs() < 1e-18);
    }
}
