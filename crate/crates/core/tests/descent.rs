use cubesum::arith::{family_primes, is_prime, primes_up_to};
use cubesum::cubicfield::class_group;
use cubesum::descent::{
    local_image_dimension, rank_one_exponent, sel2_dimension, sha2_report, Place, ORACLE_CHECK_LIMIT,
};
use cubesum::{DescentError, Effort};

/// Points of order dividing 2 on `y² = x³ − a` over `F_q`, by listing.
fn two_torsion_over_fq(a: u64, q: u64) -> u32 {
    1 + (0..q).filter(|&x| (x * x % q * x + q - a % q).is_multiple_of(q)).count() as u32
}

#[test]
fn local_dimensions() {
    for p in [5u64, 11, 443, 857] {
        let j = rank_one_exponent(p).unwrap();
        assert_eq!(local_image_dimension(p, j, Place::Infinite), 0);
        assert_eq!(local_image_dimension(p, j, Place::Finite(2)), 2);
        // totally ramified: one factor
        assert_eq!(local_image_dimension(p, j, Place::Finite(3)), 0);
        assert_eq!(local_image_dimension(p, j, Place::Finite(p)), 0);
        for q in primes_up_to(400) {
            if q == 2 || q == 3 || q == p {
                continue;
            }
            let a = 27 * cubesum::arith::pow_mod(p % q, 2 * j as u64, q) % q;
            let d = local_image_dimension(p, j, Place::Finite(q));
            // #E(Q_q)/2 = #E(F_q)[2] at good odd q
            assert_eq!(1u32 << d, two_torsion_over_fq(a, q), "p = {p}, q = {q}");
            if q % 3 == 2 {
                assert_eq!(d, 1);
            }
        }
    }
    // a prime q ≡ 1 (mod 3) over which x³ − 27·5⁴ splits completely
    let q = (7u64..)
        .filter(|&q| is_prime(q) && q % 3 == 1)
        .find(|&q| two_torsion_over_fq(27 * 625 % q, q) == 4)
        .unwrap();
    assert_eq!(local_image_dimension(5, 2, Place::Finite(q)), 2);
}

#[test]
fn selmer_dimension_formula() {
    assert_eq!(sel2_dimension(2, -1), 3);
    assert_eq!(sel2_dimension(3, -1), 3);
    assert_eq!(sel2_dimension(0, 1), 0);
    assert_eq!(sel2_dimension(0, -1), 1);
    for k in 0..12 {
        for eps in [-1i8, 1] {
            let s = sel2_dimension(k, eps);
            assert!(k <= s && s <= k + 1);
            // (−1)^dim Sel₂ = ε
            assert_eq!(if s.is_multiple_of(2) { 1 } else { -1 }, eps);
        }
    }
}

#[test]
fn family_gate_and_mismatch() {
    let cl = class_group(443, Effort::Default).unwrap();
    assert_eq!(sha2_report(13, &cl), Err(DescentError::UnsupportedPrime(13)));
    assert_eq!(sha2_report(857, &cl), Err(DescentError::PrimeMismatch { expected: 857, got: 443 }));
    assert_eq!(rank_one_exponent(443).unwrap(), 1);
    assert_eq!(rank_one_exponent(113).unwrap(), 2);
}

#[test]
fn appendix_examples() {
    // (p, Ш[2] dimension from the table)
    for (p, sha) in [(443u64, 2u32), (113, 2), (857, 2), (3209, 2), (46229, 2), (81077, 4)] {
        let cl = class_group(p, Effort::Default).unwrap();
        let r = sha2_report(p, &cl).unwrap().with_table(sha);
        assert_eq!(r.table_match, Some(true), "p = {p}: {r:?}");
        assert!(r.sha2_nontrivial);
        assert!(r.sandwich_holds() && r.parity_holds());
        assert_eq!(r.n, 2 * p.pow(r.j));
    }
    let cl = class_group(81077, Effort::Default).unwrap();
    assert_eq!(cl.elementary_divisors, vec![2, 2, 2, 2]);
    assert_eq!(sha2_report(81077, &cl).unwrap().predicted_group(), "(Z/2)^4");
}

#[test]
fn oracle_sign_agrees_below_the_check_limit() {
    let primes = family_primes(2, ORACLE_CHECK_LIMIT);
    assert!(!primes.is_empty());
    for p in primes {
        let cl = class_group(p, Effort::Default).unwrap();
        let r = sha2_report(p, &cl).unwrap();
        assert!(r.oracle_checked);
        assert_eq!(r.epsilon, -1);
        assert_eq!(r.sha2_nontrivial, r.k >= 2, "p = {p}");
    }
}
