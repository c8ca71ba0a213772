//! Word-size modular arithmetic and prime helpers.

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Deterministic Miller–Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes `≤ n`, ascending (sieve of Eratosthenes).
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Odd primes `p ≡ 2, 5 (mod 9)` in `[lo, hi]`.
pub fn family_primes(lo: u64, hi: u64) -> Vec<u64> {
    primes_up_to(hi).into_iter().filter(|&p| p >= lo && is_family_prime(p)).collect()
}

pub fn is_family_prime(p: u64) -> bool {
    p > 3 && (p % 9 == 2 || p % 9 == 5) && is_prime(p)
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0 == 1).then(|| t0.rem_euclid(m as i128) as u64)
}

/// Roots of `x³ ≡ a (mod q)` for a prime `q`, ascending.
pub fn cube_roots_mod(a: u64, q: u64) -> Vec<u64> {
    let a = a % q;
    if a == 0 {
        return vec![0];
    }
    if q <= 3 {
        return (0..q).filter(|&x| mul_mod(mul_mod(x, x, q), x, q) == a).collect();
    }
    if q % 3 == 2 {
        // Cubing is a bijection; its inverse is x ↦ x^((2q−1)/3).
        return vec![pow_mod(a, (2 * q - 1) / 3, q)];
    }
    if pow_mod(a, (q - 1) / 3, q) != 1 {
        return Vec::new();
    }
    // Small fields: scan. Larger: not needed at the sizes we use.
    let mut roots: Vec<u64> = (1..q).filter(|&x| mul_mod(mul_mod(x, x, q), x, q) == a).collect();
    roots.sort_unstable();
    roots
}

/// A primitive cube root of unity mod a prime `q ≡ 1 (mod 3)`.
pub fn cube_root_of_unity(q: u64) -> u64 {
    debug_assert!(q % 3 == 1);
    (2..q).map(|g| pow_mod(g, (q - 1) / 3, q)).find(|&r| r != 1).expect("q ≡ 1 mod 3")
}

pub fn valuation(mut n: u64, q: u64) -> u32 {
    let mut v = 0;
    while n != 0 && n.is_multiple_of(q) {
        n /= q;
        v += 1;
    }
    v
}
