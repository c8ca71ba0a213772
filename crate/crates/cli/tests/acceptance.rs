//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Criterion 10 scans every family prime below 50000 and is the
//! long one (several minutes on one core).

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use cubesum::arith::{family_primes, is_prime};
use cubesum::cubicfield::{class_group, class_group_with, verify_relation, Certificate, ClassGroupOptions, Effort};
use cubesum::descent::sha2_report;
use cubesum::eisenstein::{cubic_residue_symbol, CubicResidue, EisensteinInteger};
use cubesum::heckeoracle::{hecke_coefficients, lprime_probe, lvalue_oracle};
use cubesum::lattice::{compute_period, PeriodData};
use cubesum::lvalue::{congruence_report, isogeny_check, CongruenceReport};
use cubesum::integral_basis;
use cubesum_cli::appendix::{parse_rows, AppendixRow, EMBEDDED_ROWS};
use cubesum_cli::record::RecordConfig;
use cubesum_cli::scan::{run_scan, ScanOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::float::Constant;
use rug::{Complex, Float};

const PREC: u32 = 256;

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn period() -> &'static PeriodData {
    static PD: OnceLock<PeriodData> = OnceLock::new();
    PD.get_or_init(|| compute_period(PREC).expect("period"))
}

fn reports() -> &'static Vec<CongruenceReport> {
    static R: OnceLock<Vec<CongruenceReport>> = OnceLock::new();
    R.get_or_init(|| {
        family_primes(2, 500).into_iter().map(|p| congruence_report(p, period()).expect("congruence report")).collect()
    })
}

fn appendix() -> Vec<AppendixRow> {
    parse_rows(EMBEDDED_ROWS).expect("bundled rows parse")
}

/// `n` values whose L-value vanishes by the sign of the functional equation.
fn forced_zero_shapes(p: u64) -> [u64; 2] {
    if p % 9 == 5 {
        [2 * p * p, 4 * p]
    } else {
        [2 * p, 4 * p * p]
    }
}

fn shapes(p: u64) -> [u64; 6] {
    [p, p * p, 2 * p, 4 * p, 2 * p * p, 4 * p * p]
}

fn pow2(e: i32) -> Float {
    Float::with_val(64, Float::i_exp(1, e))
}

fn c1_period() -> Verdict {
    let t = Instant::now();
    let pd = compute_period(PREC).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let prec = PREC + 32;
    // Ω = 2·4^(−1/3)·Γ(1/6)Γ(1/2)/(3Γ(2/3))
    let g = |num: u32, den: u32| Float::with_val(prec, Float::with_val(prec, num) / den).gamma();
    let closed = Float::with_val(prec, 4).cbrt().recip() * 2u32 * g(1, 6) * g(1, 2) / (g(2, 3) * 3u32);
    let diff = Float::with_val(prec, &pd.omega - &closed).abs();
    let six = (pd.omega.to_f64() - 3.059908).abs();
    ensure(six < 5e-7, || format!("Ω = {} differs from 3.059908 by {six:e}", pd.omega.to_f64()))?;
    ensure(diff < pow2(-200), || format!("|Ω − Γ closed form| = {diff:e}"))?;
    ensure(secs < 1.0, || format!("took {secs:.2}s"))?;
    Ok(format!("|ΔΓ| = {:.1e}, {:.3}s", diff.to_f64(), secs))
}

fn c2_wp_fixtures() -> Verdict {
    let t = Instant::now();
    let pd = compute_period(PREC).map_err(|e| e.to_string())?;
    let p = pd.kernel_precision();
    let tol = pow2(-(PREC as i32) + 16);
    let sqrt3 = Float::with_val(p, 3).sqrt();
    let pi = Float::with_val(p, Constant::Pi);
    let err = |z: &Complex, re: Float| Float::with_val(64, Complex::with_val(p, z - &re).abs_ref());

    let third = Complex::with_val(p, (Float::with_val(p, &pd.omega / 3u32), 0));
    let (x, y) = pd.wp(&third).map_err(|e| e.to_string())?;
    let e_wp = err(&x, Float::with_val(p, 1));
    let e_dwp = err(&y, Float::with_val(p, -&sqrt3));
    let half = Complex::with_val(p, (Float::with_val(p, &pd.omega / 2u32), 0));
    let z = pd.zeta(&half).map_err(|e| e.to_string())?;
    let e_zeta = err(&z, Float::with_val(p, &pi / &sqrt3) / &pd.omega);
    let e_s2 = Float::with_val(64, pd.s2_of_l.abs_ref());
    let secs = t.elapsed().as_secs_f64();
    for (name, e) in [("℘(Ω/3)", &e_wp), ("℘′(Ω/3)", &e_dwp), ("ζ(Ω/2)", &e_zeta), ("s₂", &e_s2)] {
        ensure(*e < tol, || format!("{name} off by {e:e}"))?;
    }
    ensure(secs < 1.0, || format!("took {secs:.2}s"))?;
    let worst = [e_wp, e_dwp, e_zeta, e_s2].into_iter().map(|e| e.to_f64()).fold(0.0, f64::max);
    Ok(format!("worst error {worst:.1e} < 2^-240, {secs:.3}s"))
}

fn c3_congruences() -> Verdict {
    let rs = reports();
    ensure(rs.len() == 34, || format!("{} family primes below 500, expected 34 by enumeration", rs.len()))?;
    let mut worst = 0.0f64;
    for r in rs {
        ensure(r.all_pass(), || format!("p = {}: {:?}", r.p, r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>()))?;
        ensure(r.checks.iter().any(|c| c.claim.starts_with("sum ∈")), || format!("p = {}: sum congruence missing", r.p))?;
        let b = r.max_error_bound();
        ensure(b < 1e-6, || format!("p = {}: error bound {b:e}", r.p))?;
        worst = worst.max(b);
    }
    let checks: usize = rs.iter().map(|r| r.checks.len()).sum();
    Ok(format!("{} primes, {checks} verdicts, max error bound {worst:.1e}", rs.len()))
}

fn c4_forced_zeros() -> Verdict {
    let mut count = 0;
    let mut worst = 0.0f64;
    for r in reports().iter().filter(|r| r.p < 200) {
        for n in forced_zero_shapes(r.p) {
            let v = r.values.iter().find(|v| v.n == n).ok_or_else(|| format!("n = {n} missing"))?;
            let m = Float::with_val(64, v.complex_value.abs_ref()).to_f64();
            ensure(v.is_forced_zero && m < 1e-20, || format!("|L(C_{n}, 1)| = {m:e}"))?;
            worst = worst.max(m);
            count += 1;
        }
    }
    Ok(format!("{count} forced zeros, max |L| = {worst:.1e}"))
}

fn c5_oracle_equivalence() -> Verdict {
    let mut worst = 0.0f64;
    let mut count = 0;
    for r in reports().iter().filter(|r| r.p < 100) {
        for n in shapes(r.p) {
            let v = r.values.iter().find(|v| v.n == n).ok_or_else(|| format!("n = {n} missing"))?;
            let o = lvalue_oracle(n, 128).map_err(|e| format!("oracle n = {n}: {e}"))?;
            let finite = Float::with_val(128, v.complex_value.real());
            if o.root_number == -1 {
                ensure(o.value.is_zero() && finite.clone().abs() < 1e-20, || format!("n = {n}: {finite:e} vs 0"))?;
            } else {
                let rel = (Float::with_val(128, &finite - &o.value) / &o.value).abs().to_f64();
                ensure(rel < 1e-8, || format!("n = {n}: finite {finite} vs oracle {}", o.value))?;
                worst = worst.max(rel);
            }
            count += 1;
        }
    }
    Ok(format!("{count} values, max relative difference {worst:.1e}"))
}

fn c6_root_numbers() -> Verdict {
    let primes = family_primes(2, 200);
    for &p in &primes {
        let zeros = forced_zero_shapes(p);
        for n in shapes(p) {
            let eps = hecke_coefficients(n, 2).map_err(|e| format!("n = {n}: {e}"))?.root_number;
            let want = if zeros.contains(&n) { -1 } else { 1 };
            ensure(eps == want, || format!("ε(C_{n}) = {eps}, expected {want}"))?;
        }
    }
    let mut weakest = f64::INFINITY;
    for p in family_primes(2, 100) {
        let n = if p % 9 == 5 { 2 * p * p } else { 2 * p };
        let d = lprime_probe(n).map_err(|e| format!("n = {n}: {e}"))?;
        let ratio = d.value.to_f64().abs() / d.error.to_f64();
        ensure(ratio >= 1e3, || format!("L′(C_{n}, 1) = {} only {ratio:.1e}× its error", d.value.to_f64()))?;
        weakest = weakest.min(ratio);
    }
    Ok(format!("{} primes × 6 signs; smallest L′/error ratio {weakest:.1e}", primes.len()))
}

fn c7_class_groups() -> Verdict {
    let rows = appendix();
    let mut out = Vec::new();
    for p in [113u64, 443, 857, 3209, 4799] {
        let row = rows.iter().find(|r| r.p == p).ok_or_else(|| format!("no row for {p}"))?;
        let t = Instant::now();
        let c = class_group(p, Effort::Default).map_err(|e| format!("p = {p}: {e}"))?;
        let want_cert = if p <= 2000 { Certificate::ProvedByEnumeration } else { Certificate::GrhAnalytic };
        ensure(c.elementary_divisors == row.class_group, || {
            format!("p = {p}: {:?} vs table {:?}", c.elementary_divisors, row.class_group)
        })?;
        ensure(c.certificate == want_cert, || format!("p = {p}: certificate {}", c.certificate))?;
        out.push(format!("{p}: {} {:.2}s", c, t.elapsed().as_secs_f64()));
    }
    Ok(out.join("; "))
}

fn c8_sha2_dictionary() -> Verdict {
    let rows: Vec<AppendixRow> = appendix().into_iter().filter(|r| r.p < 100_000).collect();
    let mut ks = Vec::new();
    let mut residues = Vec::new();
    for row in &rows {
        let c = class_group(row.p, Effort::Default).map_err(|e| format!("p = {}: {e}", row.p))?;
        let r = sha2_report(row.p, &c).map_err(|e| format!("p = {}: {e}", row.p))?.with_table(row.sha2_dim());
        ensure(r.table_match == Some(true), || format!("p = {}: dim Ш[2] {} vs table {}", row.p, r.sha2_dim, row.sha2_dim()))?;
        ensure(r.sandwich_holds() && r.parity_holds(), || format!("p = {}: {r:?}", row.p))?;
        ks.push(r.k);
        residues.push(row.p % 9);
    }
    ensure(rows.len() >= 10, || format!("only {} rows", rows.len()))?;
    ensure(residues.contains(&2) && residues.contains(&5), || "one residue class only".into())?;
    for k in [2, 3, 4] {
        ensure(ks.contains(&k), || format!("no row with k = {k}"))?;
    }
    let count = |k| ks.iter().filter(|&&x| x == k).count();
    Ok(format!("{} rows; k = 2, 3, 4 for {}, {}, {}", rows.len(), count(2), count(3), count(4)))
}

/// `(α/π)₃` for `π = a + bω` of prime norm `ℓ`: send `ω` to the root `r` of
/// `x² + x + 1` with `a + br ≡ 0 (mod ℓ)` and raise to `(ℓ − 1)/3`.
fn symbol_oracle(alpha: (i64, i64), pi: (i64, i64)) -> CubicResidue {
    let l = (pi.0 * pi.0 - pi.0 * pi.1 + pi.1 * pi.1) as i128;
    let m = |x: i128| x.rem_euclid(l);
    let pw = |mut b: i128, mut e: i128| {
        let mut acc = 1i128;
        b = m(b);
        while e > 0 {
            if e & 1 == 1 {
                acc = m(acc * b);
            }
            b = m(b * b);
            e >>= 1;
        }
        acc
    };
    let r = m(-(pi.0 as i128) * pw(pi.1 as i128, l - 2));
    assert_eq!(m(r * r + r + 1), 0);
    let v = m(alpha.0 as i128 + alpha.1 as i128 * r);
    if v == 0 {
        return CubicResidue::Zero;
    }
    let t = pw(v, (l - 1) / 3);
    (0..3).map(|k| (k, pw(r, k as i128))).find(|&(_, w)| w == t).map(|(k, _)| CubicResidue::Root(k)).expect("cube root of unity")
}

fn c9_properties() -> Verdict {
    // cubic symbol against powering in F_ℓ
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut cases = 0;
    while cases < 200 {
        let pi = (rng.gen_range(-120i64..120), rng.gen_range(-120i64..120));
        let norm = pi.0 * pi.0 - pi.0 * pi.1 + pi.1 * pi.1;
        if norm <= 3 || !is_prime(norm as u64) {
            continue;
        }
        let alpha = (rng.gen_range(-100_000i64..100_000), rng.gen_range(-100_000i64..100_000));
        let fast = cubic_residue_symbol(&EisensteinInteger::new(alpha.0, alpha.1), &EisensteinInteger::new(pi.0, pi.1))
            .map_err(|e| e.to_string())?;
        ensure(fast == symbol_oracle(alpha, pi), || format!("({alpha:?}/{pi:?})₃ = {fast:?}"))?;
        cases += 1;
    }

    // every relation and certificate post-verifies
    let mut relations = 0;
    for p in family_primes(2, 1000).into_iter().chain([3209, 4799]) {
        let order = integral_basis(p).map_err(|e| e.to_string())?;
        let cg = class_group_with(&order, &ClassGroupOptions::default()).map_err(|e| e.to_string())?;
        for rel in cg.relations.iter().chain(&cg.certificates) {
            verify_relation(&order, rel).map_err(|e| format!("p = {p}: {e}"))?;
            relations += 1;
        }
    }

    // two scans at fixed (precision, seed, jobs) are byte-identical
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (name, jobs) in [("a", 2), ("b", 2), ("c", 1)] {
        let opts = ScanOptions {
            min: 4,
            max: 1000,
            out: dir.path().join(format!("{name}.jsonl")),
            jobs,
            config: RecordConfig { congruence_max: 30, ..RecordConfig::default() },
        };
        run_scan(&opts).map_err(|e| e.to_string())?;
        outputs.push(std::fs::read(&opts.out).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "scans at equal settings differ".into())?;
    ensure(outputs[0] == outputs[2], || "scans differ between 1 and 2 workers".into())?;

    // 3-isogeny residuals
    let mut worst = Float::with_val(64, 0);
    for (i, n) in [10u64, 50, 44, 242, 25].into_iter().enumerate() {
        let r = isogeny_check(n, 8, PREC, i as u64);
        ensure(r < pow2(-128), || format!("n = {n}: residual {r:e}"))?;
        worst.max_mut(&r);
    }
    Ok(format!(
        "200 symbols, {relations} relations verified, scans identical ({} bytes), isogeny residual ≤ {:.1e}",
        outputs[0].len(),
        worst.to_f64()
    ))
}

fn c10_scan_statistic() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let opts = ScanOptions {
        min: 4,
        max: 50_000,
        out: dir.path().join("scan.jsonl"),
        jobs: 0,
        config: RecordConfig { congruence_max: 0, ..RecordConfig::default() },
    };
    let s = run_scan(&opts).map_err(|e| e.to_string())?;
    ensure(s.errors.is_empty(), || format!("{} primes failed: {:?}", s.errors.len(), s.errors))?;
    let f2 = s.fraction(2).unwrap_or(f64::NAN);
    let f5 = s.fraction(5).unwrap_or(f64::NAN);
    let detail = format!("{} primes; k ≥ 2: {:.1}% (p ≡ 2), {:.1}% (p ≡ 5)", s.primes, 100.0 * f2, 100.0 * f5);
    ensure((f2 - 0.141).abs() <= 0.04 && (f5 - 0.125).abs() <= 0.04, || detail.clone())?;
    Ok(detail)
}

fn main() {
    let criteria: [(u8, &str, fn() -> Verdict); 10] = [
        (1, "period", c1_period),
        (2, "℘ and ζ fixtures", c2_wp_fixtures),
        (3, "congruence suite, p < 500", c3_congruences),
        (4, "forced zeros, p < 200", c4_forced_zeros),
        (5, "finite sums vs Hecke series, p < 100", c5_oracle_equivalence),
        (6, "root numbers and L′ probe", c6_root_numbers),
        (7, "class groups vs table, p ≤ 5000", c7_class_groups),
        (8, "Ш[2] dictionary", c8_sha2_dictionary),
        (9, "properties", c9_properties),
        (10, "k ≥ 2 fractions, p < 50000", c10_scan_statistic),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let t = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match verdict {
            Ok(d) => println!("PASS criterion {id:>2}: {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {id:>2}: {name}: {d} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
