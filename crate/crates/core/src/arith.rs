//! Integer primitives: primality, factorization, gcd/lcm and a
//! smallest-prime-factor sieve.

use std::fmt;

use crate::error::{Error, Result};

// Deterministic for every n < 2^64.
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

const TRIAL_BOUND: u64 = 1000;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

/// Least common multiple, failing instead of wrapping when the result does
/// not fit in 64 bits.
pub fn lcm(a: u64, b: u64) -> Result<u64> {
    if a == 0 || b == 0 {
        return Err(Error::Domain("lcm is defined for positive integers".into()));
    }
    (a / gcd(a, b)).checked_mul(b).ok_or(Error::Overflow("lcm"))
}

pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// Deterministic Miller-Rabin over the full 64-bit range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    if n < 37 * 37 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_BASES {
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

/// Prime factorization as ascending `(prime, exponent)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization {
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn one() -> Self {
        Self::default()
    }

    /// Builds from arbitrary-order pairs, merging repeated primes.
    fn from_unsorted(mut raw: Vec<(u64, u32)>) -> Self {
        raw.sort_unstable_by_key(|&(p, _)| p);
        let mut factors: Vec<(u64, u32)> = Vec::with_capacity(raw.len());
        for (p, e) in raw {
            match factors.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => factors.push((p, e)),
            }
        }
        Self { factors }
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.factors.iter().copied()
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .binary_search_by_key(&p, |&(q, _)| q)
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    /// Recomposes the factored integer, or `None` on overflow.
    pub fn value(&self) -> Option<u64> {
        self.factors.iter().try_fold(1u64, |acc, &(p, e)| {
            p.checked_pow(e).and_then(|pe| acc.checked_mul(pe))
        })
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, &(p, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " * ")?;
            }
            if e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Factors `n >= 1`: trial division by small numbers, then Pollard-Brent rho
/// on whatever composite cofactor remains. `factorize(1)` is empty.
pub fn factorize(n: u64) -> Factorization {
    assert!(n >= 1, "factorize requires n >= 1");
    let mut raw = Vec::new();
    let mut m = n;
    for p in [2u64, 3, 5] {
        push_power(&mut m, p, &mut raw);
    }
    // wheel mod 6 for the remaining trial range
    let mut d = 7u64;
    let mut step = 4u64;
    while d <= TRIAL_BOUND && d * d <= m {
        push_power(&mut m, d, &mut raw);
        d += step;
        step = 6 - step;
    }
    if m > 1 {
        if m < d * d || is_prime(m) {
            raw.push((m, 1));
        } else {
            split_large(m, &mut raw);
        }
    }
    Factorization::from_unsorted(raw)
}

/// Like [`factorize`], but reads the smallest-prime-factor table when `n`
/// lies inside it.
pub fn factorize_with(n: u64, spf: &SpfTable) -> Factorization {
    if n <= spf.limit() {
        spf.factorize(n)
    } else {
        factorize(n)
    }
}

fn push_power(m: &mut u64, p: u64, out: &mut Vec<(u64, u32)>) {
    if !(*m).is_multiple_of(p) {
        return;
    }
    let mut e = 0;
    while (*m).is_multiple_of(p) {
        *m /= p;
        e += 1;
    }
    out.push((p, e));
}

fn split_large(n: u64, out: &mut Vec<(u64, u32)>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push((n, 1));
        return;
    }
    let r = isqrt(n);
    if r * r == n {
        split_large(r, out);
        split_large(r, out);
        return;
    }
    let d = pollard_brent(n);
    split_large(d, out);
    split_large(n / d, out);
}

/// Returns a nontrivial divisor of the odd composite `n`.
fn pollard_brent(n: u64) -> u64 {
    const BATCH: u64 = 128;
    let f = |x: u64, c: u64| (mul_mod(x, x, n) + c) % n;
    for c in 1..n {
        let mut y = 2u64;
        let mut r = 1u64;
        let mut q = 1u64;
        let mut g = 1u64;
        let mut x = y;
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y, c);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y, c);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            // batch overshot; backtrack one step at a time
            loop {
                ys = f(ys, c);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!("pollard rho failed on composite {n}")
}

/// Primes `<= limit` by a plain sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Dense smallest-prime-factor table over `[2, limit]`.
#[derive(Debug, Clone)]
pub struct SpfTable {
    limit: u64,
    spf: Vec<u32>,
}

impl SpfTable {
    /// Bytes needed for a table of this limit.
    pub fn footprint(limit: u64) -> u64 {
        (limit + 1) * std::mem::size_of::<u32>() as u64
    }

    pub fn new(limit: u64) -> Result<Self> {
        Self::with_budget(limit, u64::MAX)
    }

    /// Linear sieve; fails when the table would exceed `budget` bytes.
    pub fn with_budget(limit: u64, budget: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::Domain(format!("sieve limit must be >= 2, got {limit}")));
        }
        if limit > u32::MAX as u64 {
            return Err(Error::Domain(format!("sieve limit {limit} exceeds 2^32 - 1")));
        }
        let needed = Self::footprint(limit);
        if needed > budget {
            return Err(Error::Resource { needed, budget });
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                if p > si || i * p as usize > n {
                    break;
                }
                spf[i * p as usize] = p;
            }
        }
        Ok(Self { limit, spf })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `n`, for `2 <= n <= limit`.
    pub fn get(&self, n: u64) -> u64 {
        assert!((2..=self.limit).contains(&n), "{n} outside SPF table");
        self.spf[n as usize] as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit && self.spf[n as usize] as u64 == n
    }

    pub fn factorize(&self, n: u64) -> Factorization {
        assert!(n >= 1 && n <= self.limit, "{n} outside SPF table");
        let mut m = n as usize;
        let mut factors: Vec<(u64, u32)> = Vec::new();
        while m > 1 {
            let p = self.spf[m];
            let mut e = 0;
            while m > 1 && self.spf[m] == p {
                m /= p as usize;
                e += 1;
            }
            factors.push((p as u64, e));
        }
        Factorization { factors }
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        (2..=self.limit).filter(|&n| self.spf[n as usize] as u64 == n)
    }
}
