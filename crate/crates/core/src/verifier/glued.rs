//! The defect left behind by gluing two problematic defects.
//!
//! Bottom to top the glued column is an ordered cube, optionally the mirror
//! image of the upper frustrated cube of a floor defect, a layer whose
//! vertical bonds follow an arbitrary overlay `V`, a cube with disordered
//! verticals, and an ordered cube. The plane between the `V` layer and the
//! disordered verticals is disordered; the planes below the mirrored cube and
//! above the disordered verticals are ordered.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::slab::{slab_stats, DefectStats, Frac, SlabField};
use crate::column::ALL;
use crate::error::{Error, Result};

/// Bonds of the mirrored floor-defect cube, spread periodically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MirroredCube {
    /// Horizontal mask of the plane it shares with the `V` layer.
    pub upper_plane: u8,
    pub vertical: u8,
}

impl MirroredCube {
    /// Its lower plane is ordered, so it is frustrated unless fully ordered.
    pub fn is_frustrated(&self) -> bool {
        !(self.upper_plane == ALL && self.vertical == ALL)
    }

    pub fn all_frustrated() -> impl Iterator<Item = MirroredCube> {
        (0..16u8)
            .flat_map(|h| {
                (0..16u8).map(move |v| MirroredCube {
                    upper_plane: h,
                    vertical: v,
                })
            })
            .filter(|c| c.is_frustrated())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluedPair {
    pub n: usize,
    pub mirrored: Option<MirroredCube>,
    /// Ordered flags of the `V` layer, indexed by `y * n + x`.
    pub overlay: Vec<bool>,
}

impl GluedPair {
    pub fn new(n: usize, mirrored: Option<MirroredCube>, overlay: Vec<bool>) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "glued slab needs an even N >= 2, got {n}"
            )));
        }
        if overlay.len() != n * n {
            return Err(Error::InvalidParams(format!(
                "overlay has {} entries, expected {}",
                overlay.len(),
                n * n
            )));
        }
        Ok(Self { n, mirrored, overlay })
    }

    /// Interior planes `L̃` (3, or 4 with a mirrored cube).
    pub fn ltilde(&self) -> usize {
        if self.mirrored.is_some() {
            4
        } else {
            3
        }
    }

    pub fn field(&self) -> SlabField {
        let n = self.n;
        let cubes = self.ltilde() + 1;
        let mut f = SlabField::disordered(n, cubes, false).expect("validated size");
        // Ordered bottom cube.
        f.fill_plane(0, true);
        f.fill_plane(1, true);
        f.fill_layer(0, true);
        let mut v_layer = 1;
        if let Some(c) = self.mirrored {
            for y in 0..n {
                for x in 0..n {
                    f.set_hx(x, y, 2, c.upper_plane >> (y % 2) & 1 == 1);
                    f.set_hy(x, y, 2, c.upper_plane >> (2 + x % 2) & 1 == 1);
                    f.set_v(x, y, 1, c.vertical >> (x % 2 + 2 * (y % 2)) & 1 == 1);
                }
            }
            v_layer = 2;
        }
        for y in 0..n {
            for x in 0..n {
                f.set_v(x, y, v_layer, self.overlay[y * n + x]);
            }
        }
        // Plane v_layer + 1 and layer v_layer + 1 stay disordered.
        f.fill_plane(v_layer + 2, true);
        f.fill_plane(v_layer + 3, true);
        f.fill_layer(v_layer + 2, true);
        f
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluedReport {
    pub stats: DefectStats,
    /// `D - (3L̃+1)/L̃ (K + Q + 2 L̃ N)` per column.
    pub lhs: Frac,
    /// The same without the `2 L̃ N` line term.
    pub lhs_leading: Frac,
    /// `(1/4 + 1/5)`.
    pub rhs: Frac,
    pub holds: bool,
    pub holds_leading: bool,
    /// The end cubes lie in different ordered components.
    pub ends_disconnected: bool,
}

pub fn check_glued_pair(g: &GluedPair) -> GluedReport {
    let stats = slab_stats(&g.field());
    let lt = g.ltilde() as i64;
    let n = g.n as i64;
    let coef = Frac::new(3 * lt + 1, lt);
    let dn = stats.d_norm();
    let kq = stats.k_norm() + stats.q_norm();
    let line = Frac::new(2 * lt * n, n * n);
    let lhs = dn - coef * (kq + line);
    let lhs_leading = dn - coef * kq;
    let rhs = Frac::new(9, 20);
    GluedReport {
        ends_disconnected: !stats.ends_connected,
        stats,
        lhs,
        lhs_leading,
        rhs,
        holds: lhs >= rhs,
        holds_leading: lhs_leading >= rhs,
    }
}

/// Every overlay on an `n x n` layer (`n = 2` gives 16).
pub fn all_overlays(n: usize) -> Result<Vec<Vec<bool>>> {
    let cells = n * n;
    if cells > 20 {
        return Err(Error::InvalidParams(format!(
            "{cells} cells is too many overlays to list"
        )));
    }
    Ok((0..1u32 << cells)
        .map(|m| (0..cells).map(|i| m >> i & 1 == 1).collect())
        .collect())
}

/// `count` uniform random overlays.
pub fn sample_overlays(n: usize, count: usize, seed: u64) -> Vec<Vec<bool>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..n * n).map(|_| rng.random()).collect()).collect()
}

/// Side length from which the line term is absorbed at the worst overlay:
/// `(lhs_leading - rhs) N² >= 2 (3L̃+1) N`.
pub fn line_term_threshold(worst_leading_margin: Frac, ltilde: usize) -> Option<f64> {
    let margin = *worst_leading_margin.numer() as f64 / *worst_leading_margin.denom() as f64;
    (margin > 0.0).then(|| 2.0 * (3 * ltilde + 1) as f64 / margin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_overlay_counts() {
        let g = GluedPair::new(4, None, vec![false; 16]).unwrap();
        let r = check_glued_pair(&g);
        // D = plane 2 (2N²) + two disordered layers (2N²).
        assert_eq!(r.stats.disordered, 4 * 16);
        assert_eq!(r.stats.chaotic, 16);
        assert_eq!(r.stats.free_segments, 0);
        assert!(r.ends_disconnected);
        assert_eq!(r.lhs_leading, Frac::new(2, 3));
    }

    #[test]
    fn full_overlay_counts() {
        let g = GluedPair::new(4, None, vec![true; 16]).unwrap();
        let r = check_glued_pair(&g);
        assert_eq!(r.stats.disordered, 3 * 16);
        assert_eq!(r.stats.chaotic, 0);
        assert!(r.ends_disconnected);
        assert_eq!(r.lhs_leading, Frac::from_integer(3));
    }

    #[test]
    fn leading_order_value_is_linear_in_overlay() {
        // D - (10/3) K = 2/3 + (7/3) v per column, v the ordered fraction.
        for o in all_overlays(2).unwrap() {
            let v = o.iter().filter(|&&b| b).count() as i64;
            let r = check_glued_pair(&GluedPair::new(2, None, o).unwrap());
            assert_eq!(r.lhs_leading, Frac::new(2, 3) + Frac::new(7 * v, 3 * 4));
            assert!(r.ends_disconnected);
        }
    }

    #[test]
    fn mirrored_cube_layout() {
        let c = MirroredCube {
            upper_plane: 0,
            vertical: 0,
        };
        let g = GluedPair::new(2, Some(c), vec![false; 4]).unwrap();
        let f = g.field();
        assert_eq!(f.cubes(), 5);
        let r = check_glued_pair(&g);
        assert_eq!(r.lhs_leading, Frac::new(1, 2));
        assert_eq!(MirroredCube::all_frustrated().count(), 255);
    }
}
