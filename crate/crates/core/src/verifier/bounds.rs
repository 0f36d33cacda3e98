//! Closed-form partition-function bounds for reflected defects, in log
//! domain.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;

use super::slab::DefectStats;
use crate::error::{Error, Result};

/// Relative tolerance for comparing log-domain bound values.
pub const LOG_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundCase {
    OrderDisorder,
    OrderOrder,
    BulkDisorder,
    FloorDisorder,
    Glued,
}

impl BoundCase {
    pub const ALL: [BoundCase; 5] = [
        BoundCase::OrderDisorder,
        BoundCase::OrderOrder,
        BoundCase::BulkDisorder,
        BoundCase::FloorDisorder,
        BoundCase::Glued,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            BoundCase::OrderDisorder => "od",
            BoundCase::OrderOrder => "oo",
            BoundCase::BulkDisorder => "dd",
            BoundCase::FloorDisorder => "ddb",
            BoundCase::Glued => "glued",
        }
    }

    /// Energy per column of the single low-temperature configuration used in
    /// the lower bound, as a multiple of `beta`.
    fn ordered_energy(self, l: f64) -> f64 {
        match self {
            BoundCase::OrderDisorder | BoundCase::OrderOrder => 3.0 * l,
            BoundCase::BulkDisorder => 3.0 * l - 1.0,
            BoundCase::FloorDisorder => 3.0 * l - 0.75,
            BoundCase::Glued => 3.0 * l + 1.0,
        }
    }
}

impl fmt::Display for BoundCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for BoundCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundCase::ALL
            .into_iter()
            .find(|c| c.tag() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown bound case {s:?} (od, oo, dd, ddb, glued)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundParams {
    pub q: u64,
    pub beta: f64,
    /// Exponent in `a(q) = 9 q^(-alpha')`.
    pub alpha_prime: f64,
}

/// `alpha' = alpha / 12` with the slack `alpha = 1/6` of the order-disorder
/// inequality.
pub const DEFAULT_ALPHA_PRIME: f64 = 1.0 / 72.0;

impl BoundParams {
    pub fn new(q: u64, beta: f64) -> Result<Self> {
        let p = Self {
            q,
            beta,
            alpha_prime: DEFAULT_ALPHA_PRIME,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 2 {
            return Err(Error::InvalidParams(format!("q must be >= 2, got {}", self.q)));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidParams(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if !(self.alpha_prime.is_finite() && self.alpha_prime > 0.0) {
            return Err(Error::InvalidParams(format!(
                "alpha' must be positive, got {}",
                self.alpha_prime
            )));
        }
        Ok(())
    }

    /// `ln` of the `e^beta` value where the two lower bounds swap roles:
    /// `q^(1/3)`, `q^(L/(3L-1))`, `q^(L/(3L-3/4))` or `q^(L/(3L+1))`.
    pub fn ln_threshold(&self, case: BoundCase, l: usize) -> f64 {
        let l = l as f64;
        (l / case.ordered_energy(l)) * (self.q as f64).ln()
    }

    /// Is `e^beta` at or below the case's threshold?
    pub fn is_high_temperature(&self, case: BoundCase, l: usize) -> bool {
        self.beta <= self.ln_threshold(case, l)
    }
}

/// Counts entering the bounds: raw totals over the slab.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlabCounts {
    pub n: usize,
    /// Interior planes (`L`, or `L̃` for the glued defect).
    pub l: usize,
    pub frustrated: usize,
    pub disordered: usize,
    pub chaotic: usize,
    pub free_segments: usize,
}

impl From<&DefectStats> for SlabCounts {
    fn from(s: &DefectStats) -> Self {
        Self {
            n: s.n,
            l: s.l,
            frustrated: s.frustrated,
            disordered: s.disordered,
            chaotic: s.chaotic,
            free_segments: s.free_segments,
        }
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedBound {
    pub name: &'static str,
    pub value: f64,
}

/// Upper bound on `ln Z(F^N)`: one spin per ordered component, three choices
/// along every ordered bond, `q` values per chaotic site and the ground-state
/// energy gap.
pub fn ln_upper(case: BoundCase, p: &BoundParams, c: &SlabCounts) -> f64 {
    let a = (c.n * c.n) as f64;
    let l = c.l as f64;
    let ln3 = 3f64.ln();
    let free = (c.chaotic + c.free_segments) as f64 + 2.0 * l * c.n as f64;
    let entropy = if case == BoundCase::Glued {
        l * a * ln3
    } else {
        2.0 * c.frustrated as f64 * ln3
    };
    entropy + free * (p.q as f64).ln() + p.beta * ((3.0 * l + 1.0) * a - c.disordered as f64)
}

/// Lower-bound terms on `ln Z`: zero-energy configurations (at least
/// `(q - 18)` choices per site, `None` when `q <= 18`) and one ordered
/// configuration.
pub fn ln_lower_terms(case: BoundCase, p: &BoundParams, n: usize, l: usize) -> (Option<f64>, f64) {
    let a = (n * n) as f64;
    let lf = l as f64;
    let disordered = (p.q > 18).then(|| lf * a * ((p.q - 18) as f64).ln());
    (disordered, p.beta * case.ordered_energy(lf) * a)
}

pub fn ln_lower(case: BoundCase, p: &BoundParams, n: usize, l: usize) -> f64 {
    let (d, o) = ln_lower_terms(case, p, n, l);
    log_add_exp(d.unwrap_or(f64::NEG_INFINITY), o)
}

/// `a(q) = 9 q^(-alpha')`.
pub fn a_q(q: f64, alpha_prime: f64) -> f64 {
    9.0 * q.powf(-alpha_prime)
}

/// `a(q) = sqrt(2 (3q / (q - 18))^4 q^(-3/50))` for glued pairs.
pub fn glued_a_q(q: f64) -> Result<f64> {
    if q <= 18.0 {
        return Err(Error::Domain(format!("the glued-pair constant needs q > 18, got {q}")));
    }
    Ok((2.0 * (3.0 * q / (q - 18.0)).powi(4) * q.powf(-3.0 / 50.0)).sqrt())
}

/// Exact test of `glued a(q) < 1`, i.e. `2^50 3^200 q^197 < (q - 18)^200`.
pub fn glued_a_below_one(q: &BigUint) -> bool {
    let eighteen = BigUint::from(18u32);
    if *q <= eighteen {
        return false;
    }
    let lhs = BigUint::one() << 50u32;
    let lhs = lhs * BigUint::from(3u32).pow(200) * q.pow(197);
    lhs < (q - eighteen).pow(200)
}

/// Smallest integer `q` with glued `a(q) < 1`. The left side of the exact
/// test grows more slowly than the right for every `q > 18`, so the
/// predicate is monotone and bisection applies.
pub fn glued_threshold() -> BigUint {
    let mut lo = BigUint::from(19u32);
    let mut hi = BigUint::from(64u32);
    while !glued_a_below_one(&hi) {
        lo = hi.clone();
        hi <<= 1u32;
    }
    // Invariant: predicate false at lo (or lo == 19), true at hi.
    while &hi - &lo > BigUint::one() {
        let mid: BigUint = (&lo + &hi) >> 1u32;
        if glued_a_below_one(&mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if glued_a_below_one(&lo) {
        lo
    } else {
        hi
    }
}

/// Floating-point root of `ln glued a(q) = 0`, for cross-checking.
pub fn glued_threshold_estimate() -> f64 {
    let f = |lnq: f64| {
        let q = lnq.exp();
        2f64.ln() + 4.0 * (3.0f64.ln() + lnq - (q - 18.0).ln()) - 0.06 * lnq
    };
    let (mut lo, mut hi) = (20f64.ln(), 200.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi.exp()
}

/// Chessboard estimate: `ln mu(event) <= (1/N²) Σ_c ln mu(reflected event_c)`.
pub fn chessboard_ln_bound(ln_reflected: &[f64], n: usize) -> f64 {
    ln_reflected.iter().sum::<f64>() / (n * n) as f64
}

/// Peierls bound `a^w`.
pub fn peierls_bound(a: f64, w: usize) -> f64 {
    a.powi(w as i32)
}

/// Difference per column between the two order-disorder lower bounds at
/// `e^beta = q^(1/3)`: `L ln(q / (q - 18))`. It does not shrink with `N`;
/// it vanishes only as `q` grows.
pub fn od_threshold_gap_per_column(q: u64, l: usize, n: usize) -> Result<f64> {
    let p = BoundParams::new(q, (q as f64).ln() / 3.0)?;
    match ln_lower_terms(BoundCase::OrderDisorder, &p, n, l) {
        (Some(d), o) => Ok((o - d) / (n * n) as f64),
        (None, _) => Err(Error::Domain(format!("need q > 18, got {q}"))),
    }
}

/// Named values for one case.
pub fn evaluate_bounds(case: BoundCase, p: &BoundParams, c: &SlabCounts) -> Result<Vec<NamedBound>> {
    p.validate()?;
    if case == BoundCase::Glued && p.q <= 18 {
        return Err(Error::Domain(format!("the glued-pair bounds need q > 18, got {}", p.q)));
    }
    let up = ln_upper(case, p, c);
    let (ld, lo) = ln_lower_terms(case, p, c.n, c.l);
    let low = log_add_exp(ld.unwrap_or(f64::NEG_INFINITY), lo);
    let mut ratio = up - low;
    if case == BoundCase::Glued {
        // The rotation may cost a quarter of the column bonds.
        ratio += p.beta * (c.n * c.n) as f64 / 4.0;
    }
    let mut out = vec![
        NamedBound {
            name: "ln_upper",
            value: up,
        },
        NamedBound {
            name: "ln_lower_disordered",
            value: ld.unwrap_or(f64::NEG_INFINITY),
        },
        NamedBound {
            name: "ln_lower_ordered",
            value: lo,
        },
        NamedBound {
            name: "ln_lower",
            value: low,
        },
        NamedBound {
            name: "ln_ratio",
            value: ratio,
        },
        NamedBound {
            name: "ln_ratio_per_column",
            value: ratio / (c.n * c.n) as f64,
        },
        NamedBound {
            name: "ln_beta_threshold",
            value: p.ln_threshold(case, c.l),
        },
        NamedBound {
            name: "high_temperature",
            value: p.is_high_temperature(case, c.l) as u8 as f64,
        },
        NamedBound {
            name: "a_q",
            value: a_q(p.q as f64, p.alpha_prime),
        },
    ];
    if p.q > 18 {
        out.push(NamedBound {
            name: "glued_a_q",
            value: glued_a_q(p.q as f64)?,
        });
    }
    Ok(out)
}
