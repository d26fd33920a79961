//! Dickman's function: `ρ(u) = 1` on `[0, 1]` and `u ρ'(u) = -ρ(u - 1)`.
//!
//! Tabulated on knots `u_i = i h` by stepping
//! `ρ(u_i) = ρ(u_{i-1}) - ∫ ρ(t - 1) / t dt` over `[u_{i-1}, u_i]`. The
//! integral uses 4-point Gauss-Legendre with `ρ(t - 1)` read back from the
//! table through a cubic interpolant. `ρ` is only piecewise smooth (its
//! derivatives jump at the integers), so every interpolation stencil stays
//! inside one unit interval and `1/h` must be an integer.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const DEFAULT_STEP: f64 = 1.0 / 1024.0;
pub const DEFAULT_U_MAX: f64 = 20.0;

// nodes and weights on [-1, 1]
const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
    (-0.339_981_043_584_856_26, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_26, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
];

#[derive(Debug, Clone)]
pub struct RhoTable {
    per_unit: usize,
    u_max: f64,
    values: Vec<f64>,
}

impl RhoTable {
    /// `step` must be `1/m` for an integer `m >= 4`.
    pub fn new(step: f64, u_max: f64) -> Result<Self> {
        let per_unit = (1.0 / step).round();
        if !(per_unit >= 4.0 && (per_unit * step - 1.0).abs() < 1e-12) {
            return Err(Error::Domain(format!("rho step {step} is not 1/m for integer m >= 4")));
        }
        if !(u_max >= 1.0 && u_max.is_finite()) {
            return Err(Error::Domain(format!("rho range {u_max} must be >= 1")));
        }
        let per_unit = per_unit as usize;
        let knots = (u_max * per_unit as f64).ceil() as usize;
        let mut table = Self {
            per_unit,
            u_max,
            values: Vec::with_capacity(knots + 1),
        };
        table.values.resize(per_unit + 1, 1.0);
        let h = table.step();
        for i in per_unit + 1..=knots {
            let (a, b) = ((i - 1) as f64 * h, i as f64 * h);
            let integral = if i <= 2 * per_unit {
                // ρ(t - 1) = 1 here
                (b / a).ln()
            } else {
                let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
                GAUSS4
                    .iter()
                    .map(|&(x, w)| {
                        let t = mid + half * x;
                        w * table.interpolate(t - 1.0) / t
                    })
                    .sum::<f64>()
                    * half
            };
            let prev = table.values[i - 1];
            table.values.push(prev - integral);
        }
        Ok(table)
    }

    pub fn step(&self) -> f64 {
        1.0 / self.per_unit as f64
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    /// `(u_i, ρ(u_i))` for every knot.
    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = self.step();
        self.values.iter().enumerate().map(move |(i, &v)| (i as f64 * h, v))
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(0.0..=self.u_max).contains(&u) {
            return Err(Error::Domain(format!(
                "rho argument {u} outside tabulated range [0, {}]",
                self.u_max
            )));
        }
        Ok(self.interpolate(u))
    }

    fn interpolate(&self, u: f64) -> f64 {
        if u <= 1.0 {
            return 1.0;
        }
        let m = self.per_unit;
        let scaled = u * m as f64;
        // unit interval [k, k+1] holding u; an integer u belongs to the left piece
        let k = (u.ceil() as usize).saturating_sub(1);
        let lo = k * m;
        let hi = ((k + 1) * m).min(self.values.len() - 1);
        let j = (scaled.floor() as usize).saturating_sub(1).clamp(lo, hi - 3);
        let xs = [j, j + 1, j + 2, j + 3];
        let mut acc = 0.0;
        for (a, &xa) in xs.iter().enumerate() {
            let mut basis = 1.0;
            for (b, &xb) in xs.iter().enumerate() {
                if a != b {
                    basis *= (scaled - xb as f64) / (xa as f64 - xb as f64);
                }
            }
            acc += basis * self.values[xa];
        }
        acc
    }
}

fn default_table() -> &'static RhoTable {
    static TABLE: OnceLock<RhoTable> = OnceLock::new();
    TABLE.get_or_init(|| RhoTable::new(DEFAULT_STEP, DEFAULT_U_MAX).expect("default rho grid is valid"))
}

/// `ρ(u)` for `0 <= u <= 20` from the shared default table.
pub fn dickman_rho(u: f64) -> Result<f64> {
    default_table().eval(u)
}
