//! Reflected defect patterns, their exact counts, the combinatorial
//! identity and inequalities they must satisfy, the partition-function
//! bounds built from them, and the torus identity for translation-invariant
//! subsets.

pub mod bounds;
pub mod checks;
pub mod glued;
pub mod pattern;
pub mod slab;
pub mod toy;

use std::collections::BTreeMap;

use rayon::prelude::*;

pub use checks::{check_identity, check_inequalities, InequalityCheck, InequalityReport};
pub use pattern::{enumerate_patterns, ColumnPattern};
pub use slab::{defect_stats, reflect_pattern, slab_stats, DefectStats, Frac, SlabField};

use crate::defects::DefectClass;
use crate::error::Result;

/// End types checked by the lemma suite: bulk `d = 0, 1, 2`, floor `d = 1, 2`.
pub const LEMMA_KINDS: [(u8, bool); 5] = [(0, false), (1, false), (2, false), (1, true), (2, true)];

/// Inequality names in report order.
pub const CHECK_NAMES: [&str; 7] = [
    "segments",
    "height",
    "od_oo",
    "od_equality",
    "oo_connected",
    "dd_bulk",
    "dd_floor",
];

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaRow {
    pub key: String,
    pub stats: DefectStats,
    /// Residual of the double-counting identity.
    pub residual: i64,
    pub report: InequalityReport,
}

impl LemmaRow {
    pub fn class(&self) -> DefectClass {
        self.stats.class.expect("rows come from patterns")
    }

    pub fn passes(&self) -> bool {
        self.residual == 0 && self.report.all_hold()
    }

    pub const CSV_HEADER: &'static str =
        "pattern,d,floor,class,m,L,D,K,Q,Db,identity_residual,segments,height,od_oo,od_equality,oo_connected,dd_bulk,dd_floor";

    /// One CSV line; counts are per column (divided by N²), margins are
    /// `lhs - rhs` and blank where a check does not apply.
    pub fn csv_line(&self) -> String {
        let s = &self.stats;
        let mut f = vec![
            self.key.clone(),
            s.d.map_or(String::new(), |d| d.to_string()),
            (s.boundary_attached as u8).to_string(),
            class_tag(self.class()).to_string(),
            s.m().to_string(),
            s.l.to_string(),
            s.d_norm().to_string(),
            s.k_norm().to_string(),
            s.q_norm().to_string(),
            s.db_norm().to_string(),
            self.residual.to_string(),
        ];
        for name in CHECK_NAMES {
            f.push(self.report.get(name).map_or(String::new(), |c| c.margin().to_string()));
        }
        f.join(",")
    }
}

pub fn class_tag(c: DefectClass) -> &'static str {
    match c {
        DefectClass::Problematic => "problematic",
        DefectClass::EProblematic => "e-problematic",
        DefectClass::NonProblematic => "non-problematic",
    }
}

pub fn verify_pattern(p: &ColumnPattern, n: usize) -> Result<LemmaRow> {
    let stats = defect_stats(p, n)?;
    let residual = check_identity(&stats).expect("pattern stats carry d");
    let report = check_inequalities(&stats);
    Ok(LemmaRow {
        key: p.key(),
        stats,
        residual,
        report,
    })
}

/// All admissible patterns with stacks `1..=max_stack`, every end type, in a
/// fixed order.
pub fn lemma_patterns(max_stack: usize) -> Result<Vec<ColumnPattern>> {
    let mut out = Vec::new();
    for stack in 1..=max_stack {
        for (d, floor) in LEMMA_KINDS {
            out.extend(enumerate_patterns(stack, d, floor)?);
        }
    }
    Ok(out)
}

/// Verify shard `index` of `shards` (round robin over [`lemma_patterns`]).
pub fn verify_lemmas(max_stack: usize, n: usize, shard: (usize, usize), parallel: bool) -> Result<Vec<LemmaRow>> {
    let patterns = pattern::shard(&lemma_patterns(max_stack)?, shard.0, shard.1)?;
    if parallel {
        patterns.par_iter().map(|p| verify_pattern(p, n)).collect()
    } else {
        patterns.iter().map(|p| verify_pattern(p, n)).collect()
    }
}

/// Counts over a set of rows; merging is associative and commutative.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LemmaSummary {
    pub patterns: usize,
    pub identity_failures: usize,
    pub by_class: BTreeMap<&'static str, usize>,
    /// `(applied, violated)` per inequality.
    pub checks: BTreeMap<&'static str, (usize, usize)>,
}

impl LemmaSummary {
    pub fn add(&mut self, row: &LemmaRow) {
        self.patterns += 1;
        self.identity_failures += (row.residual != 0) as usize;
        *self.by_class.entry(class_tag(row.class())).or_default() += 1;
        for c in &row.report.checks {
            let e = self.checks.entry(c.name).or_default();
            e.0 += 1;
            e.1 += (!c.holds) as usize;
        }
    }

    pub fn merge(mut self, other: &LemmaSummary) -> LemmaSummary {
        self.patterns += other.patterns;
        self.identity_failures += other.identity_failures;
        for (k, v) in &other.by_class {
            *self.by_class.entry(k).or_default() += v;
        }
        for (k, (a, b)) in &other.checks {
            let e = self.checks.entry(k).or_default();
            e.0 += a;
            e.1 += b;
        }
        self
    }

    pub fn violations(&self) -> usize {
        self.checks.values().map(|v| v.1).sum()
    }

    pub fn from_rows<'a>(rows: impl IntoIterator<Item = &'a LemmaRow>) -> Self {
        let mut s = Self::default();
        for r in rows {
            s.add(r);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::column::ColumnBonds;
    use crate::interface::CubeState;

    fn frac(a: i64, b: i64) -> Frac {
        Frac::new(a, b)
    }

    #[test]
    fn order_disorder_problematic_equality() {
        let p = ColumnPattern::template(1, 1, false).unwrap();
        let row = verify_pattern(&p, 4).unwrap();
        let s = &row.stats;
        assert_eq!(row.residual, 0);
        assert_eq!(s.free_segments, 0);
        let top = s.components.iter().find(|c| c.touches_boundary).unwrap();
        assert_eq!(top.boundary, 16);
        let eq = row.report.get("od_equality").unwrap();
        assert_eq!(eq.lhs, frac(2, 1));
        assert!(eq.holds);
        assert!(row.report.get("od_oo").is_none());
    }

    #[test]
    fn floor_single_cube_explicit_values() {
        // One frustrated floor cube under a disordered top, one ordered
        // vertical: D^b = 3/4.
        let mut b = ColumnBonds::new(2);
        b.vertical[0] = 0b0001;
        let p = ColumnPattern::from_bonds(b, 2, true).unwrap();
        assert!(p.is_admissible());
        let row = verify_pattern(&p, 4).unwrap();
        let s = &row.stats;
        assert_eq!(s.l, 1);
        assert_eq!(s.db_norm(), frac(3, 4));
        assert_eq!(s.d_norm(), frac(3, 1) + s.db_norm());
        assert_eq!(s.k_norm(), s.db_norm());
        assert_eq!(s.free_segments, 0);
        let (a, b) = checks::floor_single_cube_values(s);
        assert_eq!(a, frac(4, 1) + frac(1, 8));
        assert_eq!(a, b);
        assert_eq!(row.residual, 0);
        assert!(row.report.all_hold());
    }

    #[test]
    fn bulk_disorder_single_cube_values() {
        let mut b = ColumnBonds::new(3);
        b.vertical[1] = 0b0110;
        let p = ColumnPattern::from_bonds(b, 2, false).unwrap();
        assert_eq!(p.bonds.cube_state(1), CubeState::Frustrated);
        let s = defect_stats(&p, 4).unwrap();
        let q = s.q_norm();
        assert_eq!(q, frac(1, 2));
        assert_eq!(s.k_norm(), frac(2, 1) - frac(2, 1) * q);
        assert_eq!(s.d_norm(), frac(7, 1) - q);
        let r = check_inequalities(&s);
        let dd = r.get("dd_bulk").unwrap();
        assert_eq!(dd.lhs, frac(4, 1) + frac(3, 1) * q);
    }

    #[test]
    fn scale_consistency() {
        for p in lemma_patterns(1).unwrap() {
            let a = verify_pattern(&p, 2).unwrap();
            let b = verify_pattern(&p, 4).unwrap();
            let c = verify_pattern(&p, 8).unwrap();
            for (x, y) in [(&a, &b), (&b, &c)] {
                assert_eq!(x.stats.d_norm(), y.stats.d_norm());
                assert_eq!(x.stats.k_norm(), y.stats.k_norm());
                assert_eq!(x.stats.q_norm(), y.stats.q_norm());
                assert_eq!(x.stats.m(), y.stats.m());
                assert_eq!(x.report, y.report);
            }
        }
    }

    #[test]
    fn summary_merge_is_associative() {
        let rows = verify_lemmas(1, 2, (0, 1), false).unwrap();
        let whole = LemmaSummary::from_rows(&rows);
        let parts: Vec<LemmaSummary> = (0..3)
            .map(|i| LemmaSummary::from_rows(&verify_lemmas(1, 2, (i, 3), false).unwrap()))
            .collect();
        let left = parts[0].clone().merge(&parts[1]).merge(&parts[2]);
        let right = parts[0].clone().merge(&parts[1].clone().merge(&parts[2]));
        assert_eq!(left, whole);
        assert_eq!(right, whole);
    }

    #[test]
    fn csv_line_has_header_width() {
        let row = verify_pattern(&ColumnPattern::template(1, 1, false).unwrap(), 2).unwrap();
        assert_eq!(
            row.csv_line().split(',').count(),
            LemmaRow::CSV_HEADER.split(',').count()
        );
    }
}
