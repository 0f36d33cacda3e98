//! The double-counting identity and the per-case inequalities, in exact
//! rational arithmetic normalised by N².

use super::slab::{DefectStats, Frac};
use crate::defects::DefectClass;

/// `2D - (6K + boundary term + Σ_j (|∂X_j| + |∂²X_j|))`, or `None` when the
/// stats carry no end type.
pub fn check_identity(s: &DefectStats) -> Option<i64> {
    let term = s.boundary_term()? as i64;
    Some(2 * s.disordered as i64 - 6 * s.chaotic as i64 - term - s.boundary_sum() as i64)
}

/// The same identity with the boundary term replaced by what the field
/// actually shows: disordered bonds from bare boundary-plane sites.
pub fn identity_by_incidence(s: &DefectStats) -> i64 {
    2 * s.disordered as i64 - 6 * s.chaotic as i64 - s.bare_boundary_incidences as i64 - s.boundary_sum() as i64
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub lhs: Frac,
    pub rhs: Frac,
    pub holds: bool,
}

impl InequalityCheck {
    fn at_least(name: &'static str, lhs: Frac, rhs: Frac) -> Self {
        Self {
            name,
            lhs,
            rhs,
            holds: lhs >= rhs,
        }
    }

    pub fn margin(&self) -> Frac {
        self.lhs - self.rhs
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InequalityReport {
    pub checks: Vec<InequalityCheck>,
}

impl InequalityReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn get(&self, name: &str) -> Option<&InequalityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn violations(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

fn f(n: i64) -> Frac {
    Frac::from_integer(n)
}

fn fr(a: i64, b: i64) -> Frac {
    Frac::new(a, b)
}

/// Evaluate every inequality that applies to the stats' case.
///
/// * `segments`: `2D - 6K - 6Q >= term + m/2 + 2Q` for every defect.
/// * `od_oo`: non-problematic bulk `d <= 1` and non-exceptional floor `d = 1`
///   defects, `2D - 6(K+Q) >= 2 + max(1/2, m/6)`.
/// * `od_equality`: bulk `d = 1` with `m <= 2`, and bulk `d = 0` with
///   `m <= 4` whose end cubes are not joined by ordered bonds:
///   `2D - 6(K+Q) >= 2`, with equality exactly for problematic defects.
/// * `oo_connected`: bulk `d = 0`, `m <= 4`, joined ends: `>= 3`.
/// * `dd_bulk`: `2D - 2(3L-1)/L (K+Q) >= 4 + 3/4` for `m = 1`, else
///   `>= 4 + 1/(2L)`.
/// * `dd_floor`: `2D - 6(L-1/4)/L (K+Q) >= 7/2 + 5/8` for `m = 1`, else
///   `>= 7/2 + 3/(8L)`.
/// * `height`: `L <= 2m`.
pub fn check_inequalities(s: &DefectStats) -> InequalityReport {
    let mut r = InequalityReport::default();
    let (Some(d), Some(class)) = (s.d, s.class) else {
        return r;
    };
    let a = s.area();
    let two_d = f(2) * s.d_norm();
    let k = s.k_norm();
    let q = s.q_norm();
    let m = s.m();
    let l = s.l as i64;
    let term = fr(s.boundary_term().unwrap_or(0) as i64, a);
    let gap = two_d - f(6) * (k + q);

    r.checks.push(InequalityCheck::at_least(
        "segments",
        two_d - f(6) * k - f(6) * q,
        term + m / f(2) + f(2) * q,
    ));
    r.checks.push(InequalityCheck::at_least("height", f(2) * m, f(l)));

    let bulk = !s.boundary_attached;
    let small = |cap: i64| m <= f(cap);
    if (bulk && d <= 1 && class == DefectClass::NonProblematic)
        || (!bulk && d == 1 && class != DefectClass::EProblematic)
    {
        let rhs = f(2) + std::cmp::max(fr(1, 2), m / f(6));
        r.checks.push(InequalityCheck::at_least("od_oo", gap, rhs));
    }
    let equality_case = bulk && ((d == 1 && small(2)) || (d == 0 && small(4) && !s.ends_connected));
    if equality_case {
        let holds = gap >= f(2) && ((gap == f(2)) == (class == DefectClass::Problematic));
        r.checks.push(InequalityCheck {
            name: "od_equality",
            lhs: gap,
            rhs: f(2),
            holds,
        });
    }
    if bulk && d == 0 && small(4) && s.ends_connected {
        r.checks.push(InequalityCheck::at_least("oo_connected", gap, f(3)));
    }
    if bulk && d == 2 {
        let lhs = two_d - fr(2 * (3 * l - 1), l) * (k + q);
        let bonus = if m == f(1) { fr(3, 4) } else { fr(1, 2 * l) };
        r.checks.push(InequalityCheck::at_least("dd_bulk", lhs, f(4) + bonus));
    }
    if !bulk && d == 2 {
        // 6 (L - 1/4) / L = (12 L - 3) / (2 L)
        let lhs = two_d - fr(12 * l - 3, 2 * l) * (k + q);
        let bonus = if m == f(1) { fr(5, 8) } else { fr(3, 8 * l) };
        r.checks
            .push(InequalityCheck::at_least("dd_floor", lhs, fr(7, 2) + bonus));
    }
    r
}

/// `2D - (9/2) K` and `6 - (5/2) D^b` for a single-cube floor defect with a
/// disordered top, both per column.
pub fn floor_single_cube_values(s: &DefectStats) -> (Frac, Frac) {
    (f(2) * s.d_norm() - fr(9, 2) * s.k_norm(), f(6) - fr(5, 2) * s.db_norm())
}
