use cubesum::arith::{family_primes, primes_up_to};
use cubesum::heckeoracle::{dirichlet_coefficients, hecke_coefficients, lprime_probe, lvalue_oracle};

/// Projective points on `x³ + y³ = n·z³` over `F_q`.
fn projective_count(n: u64, q: u64) -> u64 {
    let cube = |x: u64| x * x % q * x % q;
    let nq = n % q;
    let mut count = 0;
    // z = 1: affine points
    for x in 0..q {
        for y in 0..q {
            if (cube(x) + cube(y)) % q == nq {
                count += 1;
            }
        }
    }
    // z = 0: (x : 1 : 0) with x³ = −1
    count + (0..q).filter(|&x| (cube(x) + 1) % q == 0).count() as u64
}

#[test]
fn traces_match_point_counts() {
    for n in [1u64, 2, 4, 5, 10, 20, 25, 50, 100, 11, 22, 242, 484, 44] {
        let a = dirichlet_coefficients(n, 400).unwrap();
        for q in primes_up_to(400) {
            if q == 3 || n % q == 0 {
                continue;
            }
            let expect = q as i64 + 1 - projective_count(n, q) as i64;
            assert_eq!(a[q as usize], expect, "n = {n}, q = {q}");
        }
    }
}

#[test]
fn hasse_bound_inert_vanishing_and_multiplicativity() {
    let x = 100_000;
    for n in [10u64, 50, 242] {
        let a = dirichlet_coefficients(n, x).unwrap();
        for q in primes_up_to(x as u64) {
            let aq = a[q as usize];
            assert!((aq * aq) as u64 <= 4 * q, "Hasse at {q}");
            if q % 3 == 2 && n % q != 0 {
                assert_eq!(aq, 0);
            }
        }
        for (m1, m2) in [(7usize, 13usize), (4, 25), (49, 11), (8, 125), (13, 7 * 19)] {
            if m1 * m2 <= x {
                assert_eq!(a[m1 * m2], a[m1] * a[m2]);
            }
        }
    }
}

#[test]
fn root_numbers_follow_the_vanishing_pattern() {
    for p in family_primes(5, 60) {
        let (rank0, rank1) = if p % 9 == 5 { (2 * p, 2 * p * p) } else { (2 * p * p, 2 * p) };
        assert_eq!(hecke_coefficients(rank0, 2).unwrap().root_number, 1, "p = {p}");
        assert_eq!(hecke_coefficients(rank1, 2).unwrap().root_number, -1, "p = {p}");
    }
}

#[test]
fn oracle_values_at_five() {
    let v = lvalue_oracle(10, 128).unwrap();
    assert_eq!(v.root_number, 1);
    assert!(v.value > 0.0);
    let z = lvalue_oracle(50, 128).unwrap();
    assert_eq!(z.root_number, -1);
    assert_eq!(z.value, 0.0);
    let d = lprime_probe(50).unwrap();
    assert!(d.value.clone().abs() > d.error.clone() * 1000u32);
    assert!(lprime_probe(10).is_err());
}
