//! Integer utilities: valuations, primality, factorization, divisors.

use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{QuarticError, Result};

/// Trial-division bound used before Pollard–Brent.
pub const TRIAL_DIVISION_BOUND: u64 = 1_000_000;

/// Default Pollard–Brent iteration budget per composite cofactor.
pub const DEFAULT_FACTOR_EFFORT: u64 = 5_000_000;

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: u64) -> u32 {
    assert!(!n.is_zero(), "valuation of zero");
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// p-adic valuation of a nonzero i128.
pub fn valuation_i128(mut n: i128, p: u64) -> u32 {
    assert!(n != 0, "valuation of zero");
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Floor of `n / d` for `d != 0`.
pub fn fdiv(n: i128, d: i128) -> i128 {
    Integer::div_floor(&n, &d)
}

/// Ceiling of `n / d` for `d != 0`.
pub fn cdiv(n: i128, d: i128) -> i128 {
    -Integer::div_floor(&(-n), &d)
}

/// Integers `t` with `lo <= m*t <= hi`, as an inclusive range (possibly empty).
pub fn solve_linear_range(m: i128, lo: i128, hi: i128) -> (i128, i128) {
    assert!(m != 0);
    if m > 0 {
        (cdiv(lo, m), fdiv(hi, m))
    } else {
        (cdiv(-hi, -m), fdiv(-lo, -m))
    }
}

/// Largest integer `r >= 0` with `r^3 < x` (strict), for `x >= 1`.
pub fn icbrt_strict(x: u128) -> u128 {
    if x == 0 {
        return 0;
    }
    let mut r = (x as f64).cbrt() as u128 + 2;
    while r.checked_pow(3).map_or(true, |c| c >= x) {
        r -= 1;
    }
    r
}

/// Largest integer `r >= 0` with `r^2 < x` (strict), for `x >= 1`.
pub fn isqrt_strict(x: u128) -> u128 {
    if x == 0 {
        return 0;
    }
    let mut r = x.sqrt();
    while r * r >= x {
        r -= 1;
    }
    r
}

/// Exact square root if `n` is a perfect square.
pub fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let g = (a as i128).extended_gcd(&(m as i128));
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m as i128) as u64)
}

/// Legendre symbol (a/p) for odd prime p, as -1, 0, 1.
pub fn legendre(a: i128, p: u64) -> i32 {
    let r = a.rem_euclid(p as i128) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
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

/// Miller–Rabin on big integers with fixed bases (probabilistic beyond 2^64,
/// but deterministic and reproducible).
pub fn is_probable_prime_big(n: &BigUint) -> bool {
    if let Some(v) = n.to_u64() {
        return is_prime_u64(v);
    }
    let one = BigUint::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'witness: for a in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        let a = BigUint::from(a);
        let mut x = a.modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_brent_u64(n: u64, effort: u64) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    for c in 1..64u64 {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut y, m) = (2u64, 128u64);
        let (mut g, mut r, mut q) = (1u64, 1u64, 1u64);
        let mut x = y;
        let mut ys = y;
        let mut steps = 0u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += m;
            }
            r *= 2;
            steps += r;
            if steps > effort {
                return None;
            }
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return Some(g);
        }
    }
    None
}

fn pollard_brent_big(n: &BigUint, effort: u64) -> Option<BigUint> {
    let one = BigUint::one();
    for c in 1..64u32 {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let m = 128u64;
        let (mut g, mut r, mut q) = (one.clone(), 1u64, one.clone());
        let mut x = y.clone();
        let mut ys = y.clone();
        let mut steps = 0u64;
        while g == one {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == one {
                ys = y.clone();
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += m;
            }
            r *= 2;
            steps += r;
            if steps > effort {
                return None;
            }
        }
        if g == *n {
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if g > one {
                    break;
                }
            }
        }
        if g != *n {
            return Some(g);
        }
    }
    None
}

fn push_factor(out: &mut Vec<(BigUint, u32)>, p: BigUint, e: u32) {
    if let Some(entry) = out.iter_mut().find(|(q, _)| *q == p) {
        entry.1 += e;
    } else {
        out.push((p, e));
    }
}

fn split_big(n: BigUint, effort: u64, out: &mut Vec<(BigUint, u32)>) -> Result<()> {
    if n.is_one() {
        return Ok(());
    }
    if is_probable_prime_big(&n) {
        push_factor(out, n, 1);
        return Ok(());
    }
    if let Some(small) = n.to_u64() {
        let d = pollard_brent_u64(small, effort)
            .ok_or_else(|| QuarticError::FactorizationFailure(n.to_string()))?;
        split_big(BigUint::from(d), effort, out)?;
        return split_big(BigUint::from(small / d), effort, out);
    }
    let d = pollard_brent_big(&n, effort)
        .ok_or_else(|| QuarticError::FactorizationFailure(n.to_string()))?;
    let q = &n / &d;
    split_big(d, effort, out)?;
    split_big(q, effort, out)
}

/// Factor a positive integer: trial division to [`TRIAL_DIVISION_BOUND`], then
/// Pollard–Brent with the given iteration budget. Factors sorted ascending.
pub fn factor_with_effort(n: &BigUint, effort: u64) -> Result<Vec<(BigUint, u32)>> {
    assert!(!n.is_zero(), "factorization of zero");
    let mut out = Vec::new();
    let mut n = n.clone();
    let mut p = 2u64;
    while p <= TRIAL_DIVISION_BOUND {
        let pb = BigUint::from(p);
        if &pb * &pb > n {
            break;
        }
        let mut e = 0;
        while (&n % &pb).is_zero() {
            n /= &pb;
            e += 1;
        }
        if e > 0 {
            out.push((pb, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    split_big(n, effort, &mut out)?;
    out.sort();
    Ok(out)
}

pub fn factor(n: &BigUint) -> Result<Vec<(BigUint, u32)>> {
    factor_with_effort(n, DEFAULT_FACTOR_EFFORT)
}

/// Factorization of a small positive integer.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    factor(&BigUint::from(n))
        .expect("64-bit integers always factor")
        .into_iter()
        .map(|(p, e)| (p.to_u64().unwrap(), e))
        .collect()
}

/// All positive divisors of `|n|` (n ≠ 0), ascending.
pub fn positive_divisors(n: &BigInt) -> Result<Vec<BigInt>> {
    let fac = factor(n.magnitude())?;
    let mut divs = vec![BigInt::one()];
    for (p, e) in fac {
        let p = BigInt::from(p);
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for d in &divs {
            let mut q = d.clone();
            for _ in 0..=e {
                next.push(q.clone());
                q *= &p;
            }
        }
        divs = next;
    }
    divs.sort();
    Ok(divs)
}

/// Primes up to `n` inclusive by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    if n < 2 {
        return vec![];
    }
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u64).collect()
}
