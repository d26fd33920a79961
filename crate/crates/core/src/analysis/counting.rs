//! Exact desk-scale counts, the closed-form bounds they are compared
//! against, and calibration of the free constants in those bounds.

use std::collections::HashMap;

use serde::Serialize;

use crate::arith::{is_prime, primes_up_to};
use crate::error::{Error, Result};

/// Largest `x` accepted by the exhaustive searches.
pub const SEARCH_LIMIT: u64 = 100_000_000;

fn guard(x: u64, what: &str) -> Result<()> {
    if x > SEARCH_LIMIT {
        Err(Error::SearchTooLarge(format!(
            "{what} with x = {x} exceeds the exhaustive limit {SEARCH_LIMIT}"
        )))
    } else {
        Ok(())
    }
}

/// `log log x`.
pub fn loglog(x: f64) -> f64 {
    x.ln().ln()
}

/// `Ψ(x, z)`: how many `n <= x` have every prime factor `<= z` (`n = 1`
/// included).
pub fn smooth_count(x: u64, z: u64) -> Result<u64> {
    if x == 0 {
        return Ok(0);
    }
    if z >= x {
        return Ok(x);
    }
    guard(z, "smooth_count prime table")?;
    let primes = primes_up_to(z);
    Ok(psi(x, primes.len(), &primes))
}

// Classifies n > 1 by its largest prime factor p_j: n = p_j m with m p_j-smooth.
fn psi(x: u64, k: usize, primes: &[u64]) -> u64 {
    if x == 0 {
        return 0;
    }
    if k == 0 {
        return 1;
    }
    if primes[k - 1] >= x {
        return x;
    }
    if k == 1 {
        return (64 - x.leading_zeros()) as u64;
    }
    let mut total = 1;
    for (j, &p) in primes[..k].iter().enumerate() {
        if p > x {
            break;
        }
        let rest = x / p;
        total += if p >= rest { rest } else { psi(rest, j + 1, primes) };
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecipSum {
    pub sum: f64,
    pub count: u64,
}

/// `Σ 1/p` over primes `p <= x` with `p ≡ 1 (mod m)`.
pub fn bt_recip_sum(x: u64, m: u64) -> Result<RecipSum> {
    if m < 2 {
        return Err(Error::Domain(format!("modulus must be >= 2, got {m}")));
    }
    guard(x / m, "bt_recip_sum candidates")?;
    let mut out = RecipSum { sum: 0.0, count: 0 };
    let mut p = m + 1;
    while p <= x {
        if is_prime(p) {
            out.sum += 1.0 / p as f64;
            out.count += 1;
        }
        p = match p.checked_add(m) {
            Some(next) => next,
            None => break,
        };
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainCount {
    /// Distinct `n <= x` admitting at least one chain.
    pub distinct: u64,
    /// `(n, chain)` pairs, i.e. the nested sum taken literally.
    pub with_multiplicity: u64,
}

fn prime_flags(x: u64) -> Vec<bool> {
    let mut flags = vec![false; x as usize + 1];
    for p in primes_up_to(x) {
        flags[p as usize] = true;
    }
    flags
}

/// Counts `n <= x` for which some primes satisfy
/// `q^alpha | q_{k-1} - 1`, `q_{k-1} | q_{k-2} - 1`, …, `q_1 | p - 1`, `p | n`.
/// For `k = 1` the chain is just `q^alpha | p - 1`.
pub fn chain_count(x: u64, q: u64, alpha: u32, k: u32) -> Result<ChainCount> {
    if k == 0 || alpha == 0 {
        return Err(Error::Domain("chain length and exponent must be >= 1".into()));
    }
    if !is_prime(q) {
        return Err(Error::Domain(format!("{q} is not prime")));
    }
    guard(x, "chain_count")?;
    let empty = ChainCount {
        distinct: 0,
        with_multiplicity: 0,
    };
    let modulus = match q.checked_pow(alpha) {
        Some(m) if m < x => m,
        _ => return Ok(empty),
    };
    let is_p = prime_flags(x);

    // primes reachable at the current depth, with the number of chains to each
    let mut level: HashMap<u64, u64> = HashMap::new();
    let mut cand = modulus + 1;
    while cand <= x {
        if is_p[cand as usize] {
            level.insert(cand, 1);
        }
        cand += modulus;
    }
    for _ in 1..k {
        let mut next: HashMap<u64, u64> = HashMap::new();
        for (&s, &w) in &level {
            let mut cand = s + 1;
            while cand <= x {
                if is_p[cand as usize] {
                    *next.entry(cand).or_insert(0) += w;
                }
                cand += s;
            }
        }
        level = next;
    }

    let mut hit = vec![false; x as usize + 1];
    let mut with_multiplicity = 0u64;
    for (&p, &w) in &level {
        with_multiplicity = with_multiplicity.saturating_add(w.saturating_mul(x / p));
        let mut n = p;
        while n <= x {
            hit[n as usize] = true;
            n += p;
        }
    }
    Ok(ChainCount {
        distinct: hit.iter().filter(|&&h| h).count() as u64,
        with_multiplicity,
    })
}

/// `x (c y)^k / q^alpha` with `y = log log x`.
pub fn chain_bound(x: f64, q: u64, alpha: u32, k: u32, c: f64) -> f64 {
    x * (c * loglog(x)).powi(k as i32) / (q as f64).powi(alpha as i32)
}

/// Counts `n <= x` divisible by `p^a` but not `p^(a+1)` for some prime `p > y_cut`.
pub fn power_exact_divisor_count(x: u64, y_cut: u64, a: u32) -> Result<u64> {
    if a < 2 {
        return Err(Error::Domain(format!("exponent must be >= 2, got {a}")));
    }
    guard(x, "power_exact_divisor_count")?;
    if y_cut >= x {
        return Ok(0);
    }
    let root = (x as f64).powf(1.0 / a as f64).ceil() as u64 + 1;
    let mut hit = vec![false; x as usize + 1];
    for p in primes_up_to(root).into_iter().filter(|&p| p > y_cut) {
        let Some(pa) = p.checked_pow(a).filter(|&pa| pa <= x) else {
            continue;
        };
        let mut m = pa;
        let mut cofactor = 1;
        while m <= x {
            if cofactor % p != 0 {
                hit[m as usize] = true;
            }
            m += pa;
            cofactor += 1;
        }
    }
    Ok(hit.iter().filter(|&&h| h).count() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropBound {
    /// Natural log of the bound.
    pub ln_value: f64,
    pub value: f64,
    /// Bound divided by `x`.
    pub ratio: f64,
}

/// `x (c y)^((log x)^γ + 1) / 2^(b (log x)^γ ψ - 2)`, evaluated in log space.
pub fn prop_bound_eval(x: f64, gamma: f64, b: f64, psi_value: f64, c: f64) -> Result<PropBound> {
    if !(x >= 3.0) {
        return Err(Error::Domain(format!("x must be >= 3, got {x}")));
    }
    let cy = c * loglog(x);
    if !(cy > 0.0) {
        return Err(Error::Domain(format!("c * log log x must be positive, got {cy}")));
    }
    let lx = x.ln();
    let lg = lx.powf(gamma);
    let ln_ratio = (lg + 1.0) * cy.ln() - (b * lg * psi_value - 2.0) * std::f64::consts::LN_2;
    let ln_value = lx + ln_ratio;
    Ok(PropBound {
        ln_value,
        value: ln_value.exp(),
        ratio: ln_ratio.exp(),
    })
}

/// Smallest `c` with `count <= x (c y)^k / q^alpha`.
pub fn chain_constant_needed(count: u64, x: u64, q: u64, alpha: u32, k: u32) -> f64 {
    if count == 0 {
        return 0.0;
    }
    let scaled = count as f64 * (q as f64).powi(alpha as i32) / x as f64;
    scaled.powf(1.0 / k as f64) / loglog(x as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainCalibrationRow {
    pub x: u64,
    pub q: u64,
    pub alpha: u32,
    pub k: u32,
    pub count: ChainCount,
    pub c_needed: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainCalibration {
    /// Smallest single constant that makes every row satisfy the bound.
    pub c: f64,
    pub rows: Vec<ChainCalibrationRow>,
}

pub fn calibrate_chain_constant(
    xs: &[u64],
    qs: &[u64],
    alphas: &[u32],
    ks: &[u32],
) -> Result<ChainCalibration> {
    let mut rows = Vec::new();
    for &x in xs {
        for &q in qs {
            for &alpha in alphas {
                for &k in ks {
                    let count = chain_count(x, q, alpha, k)?;
                    rows.push(ChainCalibrationRow {
                        x,
                        q,
                        alpha,
                        k,
                        count,
                        c_needed: chain_constant_needed(count.distinct, x, q, alpha, k),
                    });
                }
            }
        }
    }
    let c = rows.iter().map(|r| r.c_needed).fold(0.0, f64::max);
    Ok(ChainCalibration { c, rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerCalibrationRow {
    pub x: u64,
    pub y_cut: u64,
    pub a: u32,
    pub count: u64,
    pub c_needed: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerCalibration {
    pub c: f64,
    pub rows: Vec<PowerCalibrationRow>,
}

/// Smallest `C` with `count <= C x / Y^(a-1)` over the grid.
pub fn calibrate_power_constant(xs: &[u64], ys: &[u64], aa: &[u32]) -> Result<PowerCalibration> {
    let mut rows = Vec::new();
    for &x in xs {
        for &y_cut in ys {
            for &a in aa {
                let count = power_exact_divisor_count(x, y_cut, a)?;
                let c_needed = count as f64 * (y_cut as f64).powi(a as i32 - 1) / x as f64;
                rows.push(PowerCalibrationRow {
                    x,
                    y_cut,
                    a,
                    count,
                    c_needed,
                });
            }
        }
    }
    let c = rows.iter().map(|r| r.c_needed).fold(0.0, f64::max);
    Ok(PowerCalibration { c, rows })
}

/// Smallest `C` with `bt_recip_sum(x, m) <= C log log x / m` over the moduli.
pub fn calibrate_bt_constant(x: u64, moduli: &[u64]) -> Result<f64> {
    let y = loglog(x as f64);
    moduli.iter().try_fold(0.0f64, |acc, &m| {
        let s = bt_recip_sum(x, m)?;
        Ok(acc.max(s.sum * m as f64 / y))
    })
}
