//! Named property suites, runnable from the command line at a chosen scale.

use std::fmt;

use serde::Serialize;

use crate::analysis::{
    calibrate_chain_constant, calibrate_power_constant, dickman_rho, smooth_count,
};
use crate::arith::{factorize, gcd, lcm, pow_mod, primes_up_to, SpfTable};
use crate::error::{Error, Result};
use crate::lambda::{
    big_l, carmichael_lambda, trivial_upper_bound, two_power_chain_length, LambdaVariant,
};
use crate::model::{coefficient, coefficient_max};
use crate::pratt::{build_tree, PrattMemo};
use crate::rangesieve::{sieve_heights, sieve_l, SieveConfig};

pub const SUITES: &[&str] = &[
    "factorization",
    "lambda-oracle",
    "lcm-identity",
    "trivial-bound",
    "primebreakdown",
    "powers",
    "two-powers",
    "pratt",
    "sieve-agreement",
    "small-L",
    "dickman",
    "counting-bounds",
    "coefficients",
];

#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub passed: bool,
    pub checked: u64,
    pub detail: String,
}

impl fmt::Display for SuiteOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} ({} checks) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.checked,
            self.detail
        )
    }
}

struct Tally {
    checked: u64,
    first_failure: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Self {
            checked: 0,
            first_failure: None,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.first_failure.is_none() {
            self.first_failure = Some(what());
        }
    }

    fn finish(self, name: &str, detail: String) -> SuiteOutcome {
        SuiteOutcome {
            name: name.to_string(),
            passed: self.first_failure.is_none(),
            checked: self.checked,
            detail: self.first_failure.unwrap_or(detail),
        }
    }
}

// Exponent of (Z/nZ)^* straight from the group: the lcm of element orders.
// An order is only walked out when a^e != 1 for the running exponent e.
fn group_exponent(n: u64) -> u64 {
    let mut exp = 1u64;
    for a in 2..n {
        if gcd(a, n) != 1 || pow_mod(a, exp, n) == 1 {
            continue;
        }
        let (mut x, mut ord) = (a, 1u64);
        while x != 1 {
            x = x * a % n;
            ord += 1;
        }
        exp = exp / gcd(exp, ord) * ord;
    }
    exp
}

/// `L(n)` through the factorization, `max L(p^α)` over `p^α ∥ n`.
fn l_by_prime_powers(n: u64, v: LambdaVariant) -> Result<u32> {
    factorize(n)
        .iter()
        .map(|(p, a)| big_l(p.pow(a), v))
        .try_fold(0, |acc, l| Ok(acc.max(l?)))
}

/// Runs one suite; `limit` scales the exhaustive ranges where it applies.
pub fn run_suite(name: &str, limit: u64, cfg: &SieveConfig) -> Result<SuiteOutcome> {
    use LambdaVariant::*;
    let mut t = Tally::new();
    let detail = match name {
        "factorization" => {
            let spf = SpfTable::new(limit.max(2))?;
            for n in 1..=limit {
                let f = factorize(n);
                t.check(f.value() == Some(n), || format!("factorize({n}) does not recompose"));
                if n >= 2 {
                    t.check(spf.get(n) == f.primes().next().unwrap_or(0), || {
                        format!("spf({n}) disagrees")
                    });
                }
            }
            format!("n <= {limit}")
        }
        "lambda-oracle" => {
            let top = limit.min(10_000);
            for n in 1..=top {
                t.check(carmichael_lambda(n, Standard)? == group_exponent(n), || {
                    format!("lambda({n}) differs from the group exponent")
                });
            }
            format!("n <= {top}")
        }
        "lcm-identity" => {
            let top = limit.min(2000);
            let lam: Vec<u64> = (0..=top)
                .map(|n| if n == 0 { Ok(0) } else { carmichael_lambda(n, Standard) })
                .collect::<Result<_>>()?;
            for a in 1..=top {
                for b in 1..=top {
                    let lhs = carmichael_lambda(lcm(a, b)?, Standard)?;
                    let rhs = lcm(lam[a as usize], lam[b as usize])?;
                    t.check(lhs == rhs, || format!("lambda(lcm({a},{b})) mismatch"));
                }
            }
            format!("a, b <= {top}")
        }
        "trivial-bound" => {
            let table = sieve_l(limit.max(2), Standard, cfg)?;
            for n in 2..=limit {
                t.check(table.get(n) as u32 <= trivial_upper_bound(n), || {
                    format!("L({n}) exceeds the bit length")
                });
            }
            format!("n <= {limit}")
        }
        "primebreakdown" => {
            for v in LambdaVariant::ALL {
                let table = sieve_l(limit.max(2), v, cfg)?;
                for n in 2..=limit {
                    let l = l_by_prime_powers(n, v)?;
                    t.check(l as u64 == table.get(n), || {
                        format!("L({n}) != max L(p^a) [{v}]")
                    });
                }
            }
            format!("n <= {limit}, both variants")
        }
        "powers" => {
            for p in primes_up_to(200).into_iter().skip(1) {
                let lp = big_l(p, Standard)?;
                let mut a = 1u32;
                while let Some(pa) = p.checked_pow(a).filter(|&x| x <= 1_000_000_000) {
                    t.check(big_l(pa, Standard)? == a - 1 + lp, || {
                        format!("L({p}^{a}) != {a} - 1 + L({p})")
                    });
                    a += 1;
                }
            }
            t.check(big_l(8, Standard)? == 2, || "L(8) should be 2".into());
            "odd p <= 200, p^a <= 1e9; L(8) = 2 recorded as the even exception".into()
        }
        "two-powers" => {
            for a in 1..=63u32 {
                t.check(big_l(1 << a, Standard)? == two_power_chain_length(a), || {
                    format!("L(2^{a}) != floor({a}/2) + 1")
                });
            }
            "1 <= a <= 63".into()
        }
        "pratt" => {
            let memo = PrattMemo::new();
            let l = sieve_l(limit.max(2), Standard, cfg)?;
            for p in primes_up_to(limit) {
                let tree = build_tree(p, Some(&memo))?;
                let (h, lp) = (tree.height(), l.get(p) as u32);
                t.check(h <= lp && lp > h, || format!("H({p}) = {h} vs L = {lp}"));
                t.check(lp <= tree.branch_weight() + 1, || {
                    format!("L({p}) exceeds branch weight + 1")
                });
                for b in tree.branches().into_iter().filter(|b| b.depth() > 0) {
                    let prod = b.alpha_product();
                    t.check(prod < 64 && (1u64 << prod) < p, || {
                        format!("2^prod(alpha) >= {p} on branch {:?}", b.primes)
                    });
                }
            }
            format!("primes <= {limit}")
        }
        "sieve-agreement" => {
            let h = sieve_heights(limit.max(2), cfg)?;
            let memo = PrattMemo::new();
            for v in LambdaVariant::ALL {
                let l = sieve_l(limit.max(2), v, cfg)?;
                for n in 1..=limit {
                    t.check(l.get(n) as u32 == big_l(n, v)?, || format!("sieve L({n}) [{v}]"));
                }
            }
            for p in primes_up_to(limit) {
                t.check(h.get(p) as u32 == build_tree(p, Some(&memo))?.height(), || {
                    format!("sieve H({p})")
                });
            }
            format!("n <= {limit}")
        }
        "small-L" => {
            let table = sieve_l(limit.max(2), Standard, cfg)?;
            let small: Vec<u64> = (1..=limit).filter(|&n| table.get(n) <= 2).collect();
            let expect: Vec<u64> = [1u64, 2, 3, 4, 6, 8, 12, 24]
                .into_iter()
                .filter(|&n| n <= limit)
                .collect();
            t.check(small == expect, || format!("found {small:?}"));
            format!("{{n <= {limit} : L(n) <= 2}} = {small:?}")
        }
        "dickman" => {
            let r2 = dickman_rho(2.0)?;
            t.check((r2 - (1.0 - 2f64.ln())).abs() <= 1e-8, || format!("rho(2) = {r2}"));
            let psi = smooth_count(1_000_000, 1000)? as f64;
            let ratio = psi / (1e6 * r2);
            t.check((0.7..=1.5).contains(&ratio), || format!("Psi ratio {ratio}"));
            format!("rho(2) = {r2:.12}, Psi(1e6,1e3)/(1e6 rho(2)) = {ratio:.6}")
        }
        "counting-bounds" => {
            let x = limit.clamp(10, 100_000);
            let cal = calibrate_chain_constant(&[x], &[2, 3, 5], &[1, 2, 3, 4, 5], &[1, 2, 3])?;
            t.check(cal.c <= 10.0, || format!("chain constant {}", cal.c));
            let pc = calibrate_power_constant(&[x], &[5, 10, 100], &[2, 3, 4])?;
            t.check(pc.c <= 4.0, || format!("power constant {}", pc.c));
            format!("x = {x}: chain c = {:.6}, power C = {:.6}", cal.c, pc.c)
        }
        "coefficients" => {
            let m = coefficient_max(std::f64::consts::LN_2)?;
            t.check((m.c_star - 2.0).abs() < 1e-6 && (m.f_star - 2.0 / std::f64::consts::LN_2).abs() < 1e-6, || {
                format!("max at ln 2: {m:?}")
            });
            let d3 = 3f64.ln();
            let m3 = coefficient_max(d3)?;
            t.check((m3.f_star - std::f64::consts::E).abs() < 1e-12, || format!("max at ln 3: {m3:?}"));
            for i in 1..10_000 {
                let c = std::f64::consts::E * i as f64 / 10_000.0;
                t.check(coefficient(c, d3)? < std::f64::consts::E, || format!("f({c}) >= e"));
            }
            format!("f*(ln 2) = {:.9}, f*(ln 3) = {:.12}", m.f_star, m3.f_star)
        }
        other => {
            return Err(Error::Domain(format!(
                "unknown suite `{other}`; known: {}",
                SUITES.join(", ")
            )))
        }
    };
    Ok(t.finish(name, detail))
}
