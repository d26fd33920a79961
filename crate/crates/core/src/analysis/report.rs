//! Per-decade distribution statistics of `L(n)` and `H(p)`.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::counting::loglog;
use crate::error::{Error, Result};
use crate::rangesieve::{RangeTable, TableKind, H_SENTINEL};

pub const CSV_HEADER: &str = "x,count,mean_L,mean_L_over_y,p50,p90,p99,max_L,argmax,frac_below_c_y,frac_above_logx_gamma,mean_H_over_y,mean_L_minus_H";

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DistributionParams {
    /// Lower-bound constant: rows report the share of `n` with `L(n) < c y`.
    pub c: f64,
    /// Upper-bound exponent: rows report the share with `L(n) > (log x)^γ`.
    pub gamma: f64,
}

impl Default for DistributionParams {
    fn default() -> Self {
        Self { c: 0.9, gamma: 0.9503 }
    }
}

/// One decade `(lo, x]`; the first row starts at 1.
#[derive(Debug, Clone, Serialize)]
pub struct DecadeRow {
    pub lo: u64,
    pub x: u64,
    pub count: u64,
    /// `log log x`, NaN when `x < 3`.
    pub y: f64,
    pub mean_l: f64,
    pub mean_l_over_y: f64,
    pub p50: u32,
    pub p90: u32,
    pub p99: u32,
    pub max_l: u32,
    pub argmax: u64,
    pub frac_below_c_y: f64,
    pub frac_above_logx_gamma: f64,
    pub prime_count: u64,
    pub mean_h: f64,
    pub mean_h_over_y: f64,
    pub max_h: u32,
    pub mean_l_minus_h: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StatReport {
    pub limit: u64,
    pub params: DistributionParams,
    pub rows: Vec<DecadeRow>,
    /// Count of primes `p <= N` by `L(p) - H(p)`.
    pub excess_histogram: BTreeMap<i64, u64>,
}

impl StatReport {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.x,
                r.count,
                fmt_g(r.mean_l),
                fmt_g(r.mean_l_over_y),
                r.p50,
                r.p90,
                r.p99,
                r.max_l,
                r.argmax,
                fmt_g(r.frac_below_c_y),
                fmt_g(r.frac_above_logx_gamma),
                fmt_g(r.mean_h_over_y),
                fmt_g(r.mean_l_minus_h),
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

/// Upper ends of the report rows: `10^3, 10^4, …` up to `limit`, plus
/// `limit` itself when it is not a power of ten.
pub fn decade_bounds(limit: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut x = 1000u64;
    while x <= limit {
        out.push(x);
        match x.checked_mul(10) {
            Some(next) => x = next,
            None => break,
        }
    }
    if out.last() != Some(&limit) {
        out.push(limit);
    }
    out
}

/// Builds the report from an `L8` table and an `H8` table of equal limit.
pub fn distribution_report(
    l_table: &RangeTable,
    h_table: &RangeTable,
    params: DistributionParams,
) -> Result<StatReport> {
    l_table.require_kind(TableKind::L8)?;
    h_table.require_kind(TableKind::H8)?;
    if l_table.limit() != h_table.limit() {
        return Err(Error::LimitMismatch(l_table.limit(), h_table.limit()));
    }
    let ls = l_table.narrow().expect("L8 is narrow");
    let hs = h_table.narrow().expect("H8 is narrow");
    let limit = l_table.limit();

    let mut rows = Vec::new();
    let mut excess_histogram = BTreeMap::new();
    let mut lo = 0u64;
    for x in decade_bounds(limit) {
        let y = if x >= 3 { loglog(x as f64) } else { f64::NAN };
        let log_gamma = (x as f64).ln().powf(params.gamma);
        let below = params.c * y;

        let mut hist = [0u64; 256];
        let (mut sum_l, mut n_below, mut n_above) = (0u64, 0u64, 0u64);
        let (mut max_l, mut argmax) = (0u32, lo + 1);
        let (mut primes, mut sum_h, mut max_h, mut sum_diff) = (0u64, 0u64, 0u32, 0i64);
        for n in lo + 1..=x {
            let l = ls[n as usize];
            hist[l as usize] += 1;
            sum_l += l as u64;
            if (l as f64) < below {
                n_below += 1;
            }
            if l as f64 > log_gamma {
                n_above += 1;
            }
            if l as u32 > max_l {
                max_l = l as u32;
                argmax = n;
            }
            let h = hs[n as usize];
            if h != H_SENTINEL {
                primes += 1;
                sum_h += h as u64;
                max_h = max_h.max(h as u32);
                let diff = l as i64 - h as i64;
                sum_diff += diff;
                *excess_histogram.entry(diff).or_insert(0) += 1;
            }
        }
        let count = x - lo;
        let mean_l = sum_l as f64 / count as f64;
        let mean_h = ratio(sum_h as f64, primes);
        rows.push(DecadeRow {
            lo: lo + 1,
            x,
            count,
            y,
            mean_l,
            mean_l_over_y: mean_l / y,
            p50: quantile(&hist, count, 0.50),
            p90: quantile(&hist, count, 0.90),
            p99: quantile(&hist, count, 0.99),
            max_l,
            argmax,
            frac_below_c_y: n_below as f64 / count as f64,
            frac_above_logx_gamma: n_above as f64 / count as f64,
            prime_count: primes,
            mean_h,
            mean_h_over_y: mean_h / y,
            max_h,
            mean_l_minus_h: ratio(sum_diff as f64, primes),
        });
        lo = x;
    }
    Ok(StatReport {
        limit,
        params,
        rows,
        excess_histogram,
    })
}

fn ratio(num: f64, den: u64) -> f64 {
    if den == 0 {
        f64::NAN
    } else {
        num / den as f64
    }
}

/// Nearest-rank quantile from a value histogram.
fn quantile(hist: &[u64], count: u64, q: f64) -> u32 {
    let rank = ((q * count as f64).ceil() as u64).max(1);
    let mut seen = 0;
    for (v, &c) in hist.iter().enumerate() {
        seen += c;
        if seen >= rank {
            return v as u32;
        }
    }
    (hist.len() - 1) as u32
}

/// `printf("%g")`: six significant digits, trailing zeros dropped,
/// exponent form outside `[1e-4, 1e6)`.
pub fn fmt_g(v: f64) -> String {
    const PREC: i32 = 6;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (PREC - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..PREC).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (PREC - 1 - exp) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::LambdaVariant;
    use crate::rangesieve::{sieve_heights, sieve_l, SieveConfig};

    #[test]
    fn fmt_g_matches_printf() {
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(2.0 / 3.0), "0.666667");
        assert_eq!(fmt_g(123456.7), "123457");
        assert_eq!(fmt_g(1234567.0), "1.23457e+06");
        assert_eq!(fmt_g(0.0001), "0.0001");
        assert_eq!(fmt_g(0.00001234), "1.234e-05");
        assert_eq!(fmt_g(-2.5), "-2.5");
        assert_eq!(fmt_g(999999.7), "1e+06");
        assert_eq!(fmt_g(f64::NAN), "nan");
    }

    #[test]
    fn decades() {
        assert_eq!(decade_bounds(1000), vec![1000]);
        assert_eq!(decade_bounds(25_000), vec![1000, 10_000, 25_000]);
        assert_eq!(decade_bounds(500), vec![500]);
        assert_eq!(decade_bounds(100_000), vec![1000, 10_000, 100_000]);
    }

    #[test]
    fn report_invariants() {
        let cfg = SieveConfig::default();
        let l = sieve_l(50_000, LambdaVariant::Standard, &cfg).unwrap();
        let h = sieve_heights(50_000, &cfg).unwrap();
        let rep = distribution_report(&l, &h, DistributionParams::default()).unwrap();
        assert_eq!(rep.rows.iter().map(|r| r.count).sum::<u64>(), 50_000);
        for r in &rep.rows {
            assert!(r.p50 <= r.p90 && r.p90 <= r.p99 && r.p99 <= r.max_l);
            assert!((0.0..=1.0).contains(&r.frac_below_c_y));
            assert!((0.0..=1.0).contains(&r.frac_above_logx_gamma));
            assert_eq!(l.get(r.argmax) as u32, r.max_l);
        }
        assert!(rep.excess_histogram.keys().all(|&d| d >= 1));
        let primes: u64 = rep.rows.iter().map(|r| r.prime_count).sum();
        assert_eq!(primes, 5133);
        assert_eq!(rep.excess_histogram.values().sum::<u64>(), primes);

        let csv = rep.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn kind_and_limit_checks() {
        let cfg = SieveConfig::default();
        let l = sieve_l(1000, LambdaVariant::Standard, &cfg).unwrap();
        let h = sieve_heights(1000, &cfg).unwrap();
        let h2 = sieve_heights(2000, &cfg).unwrap();
        assert!(matches!(
            distribution_report(&h, &h, DistributionParams::default()),
            Err(Error::KindMismatch { .. })
        ));
        assert!(matches!(
            distribution_report(&l, &h2, DistributionParams::default()),
            Err(Error::LimitMismatch(..))
        ));
        assert!(distribution_report(&l, &h, DistributionParams::default()).is_ok());
    }
}
