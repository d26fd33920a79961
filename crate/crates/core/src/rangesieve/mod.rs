//! Bulk tables of `λ(n)`, `L(n)` and `H(p)` over `[1, N]`.
//!
//! All three sieves share one segmented pass: every `n` in a segment is
//! stripped of its prime factors up to `√N`, and whatever cofactor remains is
//! a single large prime. Segments are independent, so a batch of them is
//! factored in parallel; the recurrences `L(n) = 1 + L(λ(n))` and
//! `H(p) = 1 + max_{q | p-1} H(q)` only look backwards and are then filled in
//! one ascending sequential sweep. Output never depends on the worker count.

mod format;

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::arith::{gcd, isqrt, primes_up_to};
use crate::error::{Error, Result};
use crate::lambda::{lambda_prime_power, LambdaVariant};

pub use format::{read_table, read_table_from, write_table, write_table_to, MAGIC, VERSION};

/// Marks non-prime slots of an `H8` table.
pub const H_SENTINEL: u8 = 255;

pub const DEFAULT_SEGMENT: usize = 1 << 22;
pub const DEFAULT_MEM_BUDGET: u64 = 2 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Lambda64,
    L8,
    H8,
}

impl TableKind {
    pub fn code(self) -> u8 {
        match self {
            TableKind::Lambda64 => 0,
            TableKind::L8 => 1,
            TableKind::H8 => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(TableKind::Lambda64),
            1 => Some(TableKind::L8),
            2 => Some(TableKind::H8),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TableKind::Lambda64 => "lambda64",
            TableKind::L8 => "L8",
            TableKind::H8 => "H8",
        }
    }

    pub fn element_width(self) -> u64 {
        match self {
            TableKind::Lambda64 => 8,
            TableKind::L8 | TableKind::H8 => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum TableData {
    Wide(Vec<u64>),
    Narrow(Vec<u8>),
}

/// Dense per-`n` table. Slot 0 is padding; valid indices are `1..=limit`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeTable {
    kind: TableKind,
    variant: LambdaVariant,
    limit: u64,
    data: TableData,
}

impl RangeTable {
    pub(crate) fn new(kind: TableKind, variant: LambdaVariant, limit: u64, data: TableData) -> Self {
        debug_assert!(match &data {
            TableData::Wide(v) => v.len() as u64 == limit + 1,
            TableData::Narrow(v) => v.len() as u64 == limit + 1,
        });
        Self {
            kind,
            variant,
            limit,
            data,
        }
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn variant(&self) -> LambdaVariant {
        self.variant
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn get(&self, n: u64) -> u64 {
        assert!(n >= 1 && n <= self.limit, "index {n} outside table [1, {}]", self.limit);
        match &self.data {
            TableData::Wide(v) => v[n as usize],
            TableData::Narrow(v) => v[n as usize] as u64,
        }
    }

    /// Narrow payload including the padding slot at index 0.
    pub fn narrow(&self) -> Option<&[u8]> {
        match &self.data {
            TableData::Narrow(v) => Some(v),
            TableData::Wide(_) => None,
        }
    }

    /// Wide payload including the padding slot at index 0.
    pub fn wide(&self) -> Option<&[u64]> {
        match &self.data {
            TableData::Wide(v) => Some(v),
            TableData::Narrow(_) => None,
        }
    }

    pub(crate) fn data(&self) -> &TableData {
        &self.data
    }

    pub fn require_kind(&self, kind: TableKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::KindMismatch {
                expected: kind.name(),
                found: self.kind.name(),
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct SieveConfig {
    pub workers: usize,
    pub segment_size: usize,
    pub mem_budget: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            segment_size: DEFAULT_SEGMENT,
            mem_budget: DEFAULT_MEM_BUDGET,
        }
    }
}

impl SieveConfig {
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_segment_size(mut self, segment_size: usize) -> Self {
        self.segment_size = segment_size;
        self
    }

    pub fn with_mem_budget(mut self, bytes: u64) -> Self {
        self.mem_budget = bytes;
        self
    }

    fn pool(&self) -> Result<ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))
    }

    fn validate(&self, limit: u64) -> Result<()> {
        if limit < 2 {
            return Err(Error::Domain(format!("sieve limit must be >= 2, got {limit}")));
        }
        if self.workers == 0 {
            return Err(Error::Domain("worker count must be >= 1".into()));
        }
        if self.segment_size == 0 {
            return Err(Error::Domain("segment size must be >= 1".into()));
        }
        Ok(())
    }

    fn check_budget(&self, needed: u64) -> Result<()> {
        if needed > self.mem_budget {
            Err(Error::Resource {
                needed,
                budget: self.mem_budget,
            })
        } else {
            Ok(())
        }
    }

    /// Segments in flight at once, never more than needed to cover the range.
    fn batch(&self, limit: u64) -> usize {
        let segments = limit.div_ceil(self.segment_size as u64) as usize;
        self.workers.min(segments).max(1)
    }
}

/// Bytes [`sieve_lambda`] will hold at peak.
pub fn lambda_footprint(limit: u64, cfg: &SieveConfig) -> u64 {
    let seg = cfg.segment_size.min(limit as usize) as u64;
    (limit + 1) * 8 + cfg.batch(limit) as u64 * seg * 8
}

/// Bytes [`sieve_l`] will hold at peak.
pub fn l_footprint(limit: u64, cfg: &SieveConfig) -> u64 {
    let seg = cfg.segment_size.min(limit as usize) as u64;
    (limit + 1) + cfg.batch(limit) as u64 * seg * 16
}

/// Bytes [`sieve_heights`] will hold at peak.
pub fn heights_footprint(limit: u64, cfg: &SieveConfig) -> u64 {
    let seg = cfg.segment_size.min(limit as usize) as u64;
    (limit + 1) + cfg.batch(limit) as u64 * seg * 9 + isqrt(limit) + 1
}

fn segment_starts(limit: u64, seg: usize) -> Vec<u64> {
    (0..limit.div_ceil(seg as u64))
        .map(|i| 1 + i * seg as u64)
        .collect()
}

/// Primes up to `√N`, the only ones the segment pass divides out.
struct BasePrimes {
    primes: Vec<u64>,
}

impl BasePrimes {
    fn new(limit: u64) -> Self {
        Self {
            primes: primes_up_to(isqrt(limit)),
        }
    }
}

/// Fills `lam[i] = λ(lo + i)`, using `rem` as scratch.
fn lambda_segment(lo: u64, lam: &mut [u64], rem: &mut [u64], base: &BasePrimes, v: LambdaVariant) {
    let len = lam.len();
    let rem = &mut rem[..len];
    for (i, (l, r)) in lam.iter_mut().zip(rem.iter_mut()).enumerate() {
        let n = lo + i as u64;
        let tz = n.trailing_zeros();
        *r = n >> tz;
        *l = if tz == 0 {
            1
        } else {
            lambda_prime_power(2, tz, v).expect("2^k fits in u64")
        };
    }
    let hi = lo + len as u64;
    for &p in base.primes.iter().skip(1) {
        let start = lo.div_ceil(p) * p;
        if start >= hi {
            continue;
        }
        let mut j = (start - lo) as usize;
        while j < len {
            let mut r = rem[j] / p;
            let mut pk = p - 1;
            while r.is_multiple_of(p) {
                r /= p;
                pk *= p;
            }
            rem[j] = r;
            lam[j] = lcm_small(lam[j], pk);
            j += p as usize;
        }
    }
    for (l, &r) in lam.iter_mut().zip(rem.iter()) {
        if r > 1 {
            *l = lcm_small(*l, r - 1);
        }
    }
}

// λ(n) <= n so the product never overflows here.
#[inline]
fn lcm_small(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// `table[n] = λ(n)` for every `n <= limit`.
pub fn sieve_lambda(limit: u64, v: LambdaVariant, cfg: &SieveConfig) -> Result<RangeTable> {
    cfg.validate(limit)?;
    cfg.check_budget(lambda_footprint(limit, cfg))?;
    let base = BasePrimes::new(limit);
    let mut out = vec![0u64; limit as usize + 1];
    let seg = cfg.segment_size.min(limit as usize);
    cfg.pool()?.install(|| {
        out[1..]
            .par_chunks_mut(seg)
            .enumerate()
            .for_each_init(
                || vec![0u64; seg],
                |rem, (i, chunk)| {
                    let lo = 1 + (i * seg) as u64;
                    lambda_segment(lo, chunk, rem, &base, v);
                },
            );
    });
    Ok(RangeTable::new(TableKind::Lambda64, v, limit, TableData::Wide(out)))
}

/// `table[n] = L(n)` for every `n <= limit`.
pub fn sieve_l(limit: u64, v: LambdaVariant, cfg: &SieveConfig) -> Result<RangeTable> {
    cfg.validate(limit)?;
    cfg.check_budget(l_footprint(limit, cfg))?;
    let base = BasePrimes::new(limit);
    let seg = cfg.segment_size.min(limit as usize);
    let batch = cfg.batch(limit);
    let mut table = vec![0u8; limit as usize + 1];
    let mut lams: Vec<Vec<u64>> = (0..batch).map(|_| vec![0u64; seg]).collect();
    let mut rems: Vec<Vec<u64>> = (0..batch).map(|_| vec![0u64; seg]).collect();
    let pool = cfg.pool()?;
    let starts = segment_starts(limit, seg);

    for group in starts.chunks(batch) {
        pool.install(|| {
            group
                .par_iter()
                .zip(lams.par_iter_mut())
                .zip(rems.par_iter_mut())
                .for_each(|((&lo, lam), rem)| {
                    let len = seg.min((limit - lo + 1) as usize);
                    lambda_segment(lo, &mut lam[..len], rem, &base, v);
                });
        });
        for (&lo, lam) in group.iter().zip(&lams) {
            let len = seg.min((limit - lo + 1) as usize);
            for (i, &l) in lam[..len].iter().enumerate() {
                let n = lo as usize + i;
                table[n] = if n == 1 { 0 } else { 1 + table[l as usize] };
            }
        }
    }
    Ok(RangeTable::new(TableKind::L8, v, limit, TableData::Narrow(table)))
}

/// Heights for `n <= limit` from a dense smallest-prime-factor pass. Only
/// used for the base primes, so `limit` is about `√N`.
fn small_heights(limit: u64) -> Vec<u8> {
    let n = limit as usize;
    let mut h = vec![H_SENTINEL; n + 1];
    // g[m] = max H(q) over primes q | m, with g[1] = -1
    let mut g = vec![-1i32; n + 1];
    let mut spf = vec![0u32; n + 1];
    for m in 2..=n {
        if spf[m] == 0 {
            let mut j = m;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = m as u32;
                }
                j += m;
            }
        }
        let s = spf[m] as usize;
        if s == m {
            let hv = 1 + g[m - 1];
            h[m] = hv as u8;
            g[m] = hv;
        } else {
            g[m] = g[s].max(g[m / s]);
        }
    }
    h
}

/// `table[p] = H(p)` for primes `p <= limit`, [`H_SENTINEL`] elsewhere.
pub fn sieve_heights(limit: u64, cfg: &SieveConfig) -> Result<RangeTable> {
    cfg.validate(limit)?;
    cfg.check_budget(heights_footprint(limit, cfg))?;
    let base = BasePrimes::new(limit);
    let small_limit = isqrt(limit);
    let small_h = small_heights(small_limit);
    let seg = cfg.segment_size.min(limit as usize);
    let batch = cfg.batch(limit);
    let mut table = vec![H_SENTINEL; limit as usize + 1];
    // gmax holds 1 + max H over base primes dividing n, 0 if none
    let mut gmaxs: Vec<Vec<u8>> = (0..batch).map(|_| vec![0u8; seg]).collect();
    let mut cofs: Vec<Vec<u64>> = (0..batch).map(|_| vec![0u64; seg]).collect();
    let pool = cfg.pool()?;
    let starts = segment_starts(limit, seg);
    let mut g_prev: i32 = -1;

    for group in starts.chunks(batch) {
        pool.install(|| {
            group
                .par_iter()
                .zip(gmaxs.par_iter_mut())
                .zip(cofs.par_iter_mut())
                .for_each(|((&lo, gmax), cof)| {
                    let len = seg.min((limit - lo + 1) as usize);
                    height_segment(lo, &mut gmax[..len], &mut cof[..len], &base, &small_h);
                });
        });
        for ((&lo, gmax), cof) in group.iter().zip(&gmaxs).zip(&cofs) {
            let len = seg.min((limit - lo + 1) as usize);
            for i in 0..len {
                let n = lo + i as u64;
                let g = if n == 1 {
                    -1
                } else if is_segment_prime(n, cof[i], small_limit, &small_h) {
                    let h = 1 + g_prev;
                    table[n as usize] = h as u8;
                    h
                } else {
                    let from_small = gmax[i] as i32 - 1;
                    let from_large = if cof[i] > 1 {
                        table[cof[i] as usize] as i32
                    } else {
                        -1
                    };
                    from_small.max(from_large)
                };
                g_prev = g;
            }
        }
    }
    Ok(RangeTable::new(
        TableKind::H8,
        LambdaVariant::Standard,
        limit,
        TableData::Narrow(table),
    ))
}

#[inline]
fn is_segment_prime(n: u64, cof: u64, small_limit: u64, small_h: &[u8]) -> bool {
    if n <= small_limit {
        small_h[n as usize] != H_SENTINEL
    } else {
        cof == n
    }
}

fn height_segment(lo: u64, gmax: &mut [u8], cof: &mut [u64], base: &BasePrimes, small_h: &[u8]) {
    let len = gmax.len();
    for (i, (g, c)) in gmax.iter_mut().zip(cof.iter_mut()).enumerate() {
        *g = 0;
        *c = lo + i as u64;
    }
    let hi = lo + len as u64;
    for &p in &base.primes {
        let start = lo.div_ceil(p) * p;
        if start >= hi {
            continue;
        }
        let tag = small_h[p as usize] + 1;
        let mut j = (start - lo) as usize;
        while j < len {
            let mut r = cof[j] / p;
            while r.is_multiple_of(p) {
                r /= p;
            }
            cof[j] = r;
            gmax[j] = gmax[j].max(tag);
            j += p as usize;
        }
    }
}
