//! Heuristic quantities for the normal order of `L(p)`: the branch
//! coefficient `f(c) = c + c ln(e/c) / D`, the chance that none of `N`
//! primes is `1 mod r^a`, expected Pratt level sizes, and the observed
//! split of `L(p) - H(p)` over the primes of a range.
//!
//! Every `log` here is natural.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::E;
use std::io::Write;

use serde::Serialize;

use crate::analysis::fmt_g;
use crate::arith::{factorize, is_prime, SpfTable};
use crate::error::{Error, Result};
use crate::rangesieve::{RangeTable, TableKind, H_SENTINEL};

pub const EXCESS_CSV_HEADER: &str = "p_bucket,mean_L_minus_H,mean_branch_excess,residual_mean,count";

/// `c + c ln(e/c) / d` for `0 < c <= e`, `d > 0`.
pub fn coefficient(c: f64, d: f64) -> Result<f64> {
    if !(c > 0.0 && c <= E) {
        return Err(Error::Domain(format!("c = {c} outside (0, e]")));
    }
    if !(d > 0.0) {
        return Err(Error::Domain(format!("denominator {d} must be positive")));
    }
    Ok(c + c * (E / c).ln() / d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientMax {
    pub c_star: f64,
    pub f_star: f64,
    /// The supremum over `(0, e]` sits at `c = e`.
    pub boundary: bool,
}

/// Maximizes `coefficient(·, d)` over `(0, e]`.
///
/// `f'(c) = 1 - ln(c) / d` vanishes at `c = e^d` and `f` is concave, so the
/// maximizer is `e^d` when that lies below `e`, otherwise `e` itself.
pub fn coefficient_max(d: f64) -> Result<CoefficientMax> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("denominator {d} must be positive")));
    }
    let critical = d.exp();
    let (c_star, boundary) = if critical < E { (critical, false) } else { (E, true) };
    Ok(CoefficientMax {
        c_star,
        f_star: coefficient(c_star, d)?,
        boundary,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientCurve {
    pub denominator: f64,
    /// `(c, f(c))` on an even grid over `(0, e]`, ending at `c = e`.
    pub samples: Vec<(f64, f64)>,
}

impl CoefficientCurve {
    pub fn sample(d: f64, points: usize) -> Result<Self> {
        let points = points.max(1);
        let samples = (1..=points)
            .map(|i| {
                let c = E * i as f64 / points as f64;
                coefficient(c, d).map(|f| (c, f))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            denominator: d,
            samples,
        })
    }
}

/// `(1 - 1/φ(r^a))^n`.
pub fn prob_no_hit(n: u64, r: u64, a: u32) -> Result<f64> {
    if !is_prime(r) {
        return Err(Error::Domain(format!("{r} is not prime")));
    }
    if a == 0 {
        return Err(Error::Domain("exponent must be >= 1".into()));
    }
    r.checked_pow(a).ok_or(Error::Overflow("prob_no_hit"))?;
    let phi = r.pow(a - 1) * (r - 1);
    if n == 0 {
        return Ok(1.0);
    }
    if phi == 1 {
        return Ok(0.0);
    }
    Ok((n as f64 * (-1.0 / phi as f64).ln_1p()).exp())
}

/// `y^n / n!`.
pub fn expected_level_size(y: f64, n: u32) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Domain(format!("y = {y} must be positive")));
    }
    if n > 170 {
        return Err(Error::Overflow("expected_level_size"));
    }
    let v = (1..=n).fold(1.0f64, |acc, i| acc * y / i as f64);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow("expected_level_size"))
    }
}

/// Mean Pratt-tree node count at each depth `0..=max_depth` over the primes
/// in `(lo, hi]`, with `level_counts` semantics (instances, not distinct).
pub fn mean_level_counts(lo: u64, hi: u64, max_depth: usize) -> Vec<f64> {
    let mut memo: HashMap<u64, Vec<u64>> = HashMap::new();
    fn counts(p: u64, depth: usize, memo: &mut HashMap<u64, Vec<u64>>) -> Vec<u64> {
        if let Some(c) = memo.get(&p) {
            return c.clone();
        }
        let mut out = vec![0u64; depth + 1];
        out[0] = 1;
        if p > 2 {
            for q in factorize(p - 1).primes() {
                let sub = counts(q, depth, memo);
                for d in 1..=depth {
                    out[d] += sub[d - 1];
                }
            }
        }
        memo.insert(p, out.clone());
        out
    }
    let mut sums = vec![0u64; max_depth + 1];
    let mut primes = 0u64;
    for p in (lo + 1..=hi).filter(|&p| is_prime(p)) {
        primes += 1;
        for (s, c) in sums.iter_mut().zip(counts(p, max_depth, &mut memo)) {
            *s += c;
        }
    }
    sums.iter().map(|&s| s as f64 / primes.max(1) as f64).collect()
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ExcessParams {
    /// When set, also track the part of the branch excess that comes from
    /// edges into primes larger than this cutoff.
    pub y_cut: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExcessBucket {
    /// Primes in `[2^bucket, 2^(bucket+1))`.
    pub bucket: u32,
    pub count: u64,
    pub mean_l_minus_h: f64,
    pub mean_branch_excess: f64,
    /// Mean of `L - H - branch_excess`.
    pub residual_mean: f64,
    pub mean_large_excess: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExcessReport {
    pub limit: u64,
    pub prime_count: u64,
    pub mean_l_minus_h: f64,
    pub histogram: BTreeMap<i64, u64>,
    pub buckets: Vec<ExcessBucket>,
}

impl ExcessReport {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{EXCESS_CSV_HEADER}")?;
        for b in &self.buckets {
            writeln!(
                w,
                "{},{},{},{},{}",
                b.bucket,
                fmt_g(b.mean_l_minus_h),
                fmt_g(b.mean_branch_excess),
                fmt_g(b.residual_mean),
                b.count
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// Largest `Σ(α - 1)` along a Pratt branch for every prime `<= limit`,
/// optionally counting only edges into primes above `y_cut`.
pub fn branch_excess_table(spf: &SpfTable, y_cut: Option<u64>) -> Vec<u8> {
    let limit = spf.limit() as usize;
    let mut excess = vec![0u8; limit + 1];
    for p in 3..=limit {
        if spf.get(p as u64) != p as u64 {
            continue;
        }
        excess[p] = spf
            .factorize(p as u64 - 1)
            .iter()
            .map(|(q, alpha)| {
                let here = match y_cut {
                    Some(y) if q <= y => 0,
                    _ => alpha - 1,
                };
                here as u8 + excess[q as usize]
            })
            .max()
            .unwrap_or(0);
    }
    excess
}

/// Splits `L(p) - H(p)` over all primes `p <= N` of the tables.
pub fn excess_report(
    l_table: &RangeTable,
    h_table: &RangeTable,
    params: ExcessParams,
) -> Result<ExcessReport> {
    l_table.require_kind(TableKind::L8)?;
    h_table.require_kind(TableKind::H8)?;
    if l_table.limit() != h_table.limit() {
        return Err(Error::LimitMismatch(l_table.limit(), h_table.limit()));
    }
    let limit = l_table.limit();
    let spf = SpfTable::new(limit)?;
    let excess = branch_excess_table(&spf, None);
    let large = params.y_cut.map(|y| branch_excess_table(&spf, Some(y)));
    let ls = l_table.narrow().expect("L8 is narrow");
    let hs = h_table.narrow().expect("H8 is narrow");

    #[derive(Default)]
    struct Acc {
        count: u64,
        diff: i64,
        excess: u64,
        residual: i64,
        large: u64,
    }
    let mut acc: BTreeMap<u32, Acc> = BTreeMap::new();
    let mut histogram = BTreeMap::new();
    let (mut total, mut total_diff) = (0u64, 0i64);
    for p in 2..=limit as usize {
        if hs[p] == H_SENTINEL {
            continue;
        }
        let diff = ls[p] as i64 - hs[p] as i64;
        let e = excess[p] as i64;
        *histogram.entry(diff).or_insert(0) += 1;
        total += 1;
        total_diff += diff;
        let a = acc.entry(63 - (p as u64).leading_zeros()).or_default();
        a.count += 1;
        a.diff += diff;
        a.excess += e as u64;
        a.residual += diff - e;
        if let Some(t) = &large {
            a.large += t[p] as u64;
        }
    }
    let buckets = acc
        .into_iter()
        .map(|(bucket, a)| {
            let n = a.count as f64;
            ExcessBucket {
                bucket,
                count: a.count,
                mean_l_minus_h: a.diff as f64 / n,
                mean_branch_excess: a.excess as f64 / n,
                residual_mean: a.residual as f64 / n,
                mean_large_excess: large.as_ref().map(|_| a.large as f64 / n),
            }
        })
        .collect();
    Ok(ExcessReport {
        limit,
        prime_count: total,
        mean_l_minus_h: if total == 0 { f64::NAN } else { total_diff as f64 / total as f64 },
        histogram,
        buckets,
    })
}
