//! The Carmichael function, its iterates, and the chain length `L(n)`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::arith::{factorize, lcm, Factorization};
use crate::error::{Error, Result};

/// Which rule to apply at powers of two.
///
/// `Standard` is the true group exponent: `λ(2^a) = 2^(a-2)` for `a >= 3`.
/// `TwoAdic` uses `λ'(2^a) = 2^(a-1)` for every `a >= 1`. Both agree on 2, 4
/// and all odd prime powers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaVariant {
    #[default]
    Standard,
    TwoAdic,
}

impl LambdaVariant {
    pub const ALL: [LambdaVariant; 2] = [LambdaVariant::Standard, LambdaVariant::TwoAdic];

    pub fn code(self) -> u8 {
        match self {
            LambdaVariant::Standard => 0,
            LambdaVariant::TwoAdic => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(LambdaVariant::Standard),
            1 => Some(LambdaVariant::TwoAdic),
            _ => None,
        }
    }
}

impl fmt::Display for LambdaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LambdaVariant::Standard => "standard",
            LambdaVariant::TwoAdic => "two-adic",
        })
    }
}

impl FromStr for LambdaVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(LambdaVariant::Standard),
            "two-adic" | "two_adic" | "twoadic" => Ok(LambdaVariant::TwoAdic),
            other => Err(Error::Domain(format!("unknown lambda variant `{other}`"))),
        }
    }
}

/// `λ(p^k)` for a prime `p` and `k >= 1`.
pub fn lambda_prime_power(p: u64, k: u32, v: LambdaVariant) -> Result<u64> {
    if k == 0 {
        return Err(Error::Domain("prime power exponent must be >= 1".into()));
    }
    if p == 2 {
        let shift = match (v, k) {
            (LambdaVariant::Standard, 1) => 0,
            (LambdaVariant::Standard, 2) => 1,
            (LambdaVariant::Standard, k) => k - 2,
            (LambdaVariant::TwoAdic, k) => k - 1,
        };
        // 2^k itself must be representable
        if k >= 64 {
            return Err(Error::Overflow("lambda_prime_power"));
        }
        return Ok(1u64 << shift);
    }
    p.checked_pow(k)
        .ok_or(Error::Overflow("lambda_prime_power"))?;
    Ok(p.pow(k - 1) * (p - 1))
}

/// `λ(n)` from a known factorization of `n`.
pub fn lambda_from_factorization(f: &Factorization, v: LambdaVariant) -> Result<u64> {
    f.iter()
        .try_fold(1u64, |acc, (p, k)| lcm(acc, lambda_prime_power(p, k, v)?))
}

/// Exponent of the unit group mod `n` (or its two-adic variant). `λ(1) = 1`.
pub fn carmichael_lambda(n: u64, v: LambdaVariant) -> Result<u64> {
    if n == 0 {
        return Err(Error::Domain("lambda is defined for n >= 1".into()));
    }
    lambda_from_factorization(&factorize(n), v)
}

/// The iterates `n, λ(n), λ(λ(n)), …, 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LambdaChain {
    values: Vec<u64>,
}

impl LambdaChain {
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Number of applications of λ, i.e. `L(n)`.
    pub fn len(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn lambda_chain(n: u64, v: LambdaVariant) -> Result<LambdaChain> {
    if n == 0 {
        return Err(Error::Domain("lambda chain is defined for n >= 1".into()));
    }
    let mut values = vec![n];
    let mut cur = n;
    while cur != 1 {
        cur = carmichael_lambda(cur, v)?;
        values.push(cur);
    }
    Ok(LambdaChain { values })
}

/// `L(n)`: least `k` with `λ_k(n) = 1`.
pub fn big_l(n: u64, v: LambdaVariant) -> Result<u32> {
    Ok(lambda_chain(n, v)?.len() as u32)
}

/// `⌊log n / log 2 + 1⌋`, i.e. the bit length of `n`.
pub fn trivial_upper_bound(n: u64) -> u32 {
    64 - n.leading_zeros()
}

/// Closed form of `L(2^a)` under the standard rule: `⌊a/2⌋ + 1`.
pub fn two_power_chain_length(a: u32) -> u32 {
    a / 2 + 1
}
