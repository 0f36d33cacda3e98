//! Full bond fields on an `N x N` slab and the counts built on them.
//!
//! A slab has `cubes` cube layers and planes `0..=cubes`. Planes `0` and
//! `cubes` carry the boundary configurations: their horizontal bonds are not
//! inner bonds and their sites are not interior sites.

use num_rational::Ratio;
use petgraph::unionfind::UnionFind;

use super::pattern::ColumnPattern;
use crate::column::ColumnBonds;
use crate::defects::DefectClass;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SlabField {
    n: usize,
    cubes: usize,
    /// Ordered flags indexed by `(z * n + y) * n + x`. `hx` joins `x` and
    /// `x + 1`, `hy` joins `y` and `y + 1`, `v` joins `z` and `z + 1`.
    hx: Vec<bool>,
    hy: Vec<bool>,
    v: Vec<bool>,
    /// Plane 0 is the strongly disordered bottom of the box.
    pub boundary_attached: bool,
}

impl SlabField {
    /// All bonds disordered.
    pub fn disordered(n: usize, cubes: usize, boundary_attached: bool) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "slab side must be even and >= 2, got {n}"
            )));
        }
        if cubes == 0 {
            return Err(Error::InvalidParams("slab needs at least one cube layer".into()));
        }
        let plane = n * n;
        Ok(Self {
            n,
            cubes,
            hx: vec![false; plane * (cubes + 1)],
            hy: vec![false; plane * (cubes + 1)],
            v: vec![false; plane * cubes],
            boundary_attached,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cubes(&self) -> usize {
        self.cubes
    }

    /// Interior planes.
    pub fn interior_planes(&self) -> usize {
        self.cubes - 1
    }

    #[inline]
    fn idx(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.n + y) * self.n + x
    }

    pub fn hx(&self, x: usize, y: usize, z: usize) -> bool {
        self.hx[self.idx(x, y, z)]
    }

    pub fn hy(&self, x: usize, y: usize, z: usize) -> bool {
        self.hy[self.idx(x, y, z)]
    }

    pub fn v(&self, x: usize, y: usize, z: usize) -> bool {
        self.v[self.idx(x, y, z)]
    }

    pub fn set_hx(&mut self, x: usize, y: usize, z: usize, ordered: bool) {
        let i = self.idx(x, y, z);
        self.hx[i] = ordered;
    }

    pub fn set_hy(&mut self, x: usize, y: usize, z: usize, ordered: bool) {
        let i = self.idx(x, y, z);
        self.hy[i] = ordered;
    }

    pub fn set_v(&mut self, x: usize, y: usize, z: usize, ordered: bool) {
        let i = self.idx(x, y, z);
        self.v[i] = ordered;
    }

    /// Set every horizontal bond of plane `z`.
    pub fn fill_plane(&mut self, z: usize, ordered: bool) {
        let p = self.n * self.n;
        self.hx[z * p..(z + 1) * p].fill(ordered);
        self.hy[z * p..(z + 1) * p].fill(ordered);
    }

    /// Set every vertical bond of cube layer `z`.
    pub fn fill_layer(&mut self, z: usize, ordered: bool) {
        let p = self.n * self.n;
        self.v[z * p..(z + 1) * p].fill(ordered);
    }

    /// Bonds of the column above the base plaquette at `(x, y)`.
    pub fn column(&self, x: usize, y: usize) -> ColumnBonds {
        let (x1, y1) = ((x + 1) % self.n, (y + 1) % self.n);
        let bit = |b: bool, i: usize| (b as u8) << i;
        ColumnBonds {
            horizontal: (0..=self.cubes)
                .map(|z| {
                    bit(self.hx(x, y, z), 0)
                        | bit(self.hx(x, y1, z), 1)
                        | bit(self.hy(x, y, z), 2)
                        | bit(self.hy(x1, y, z), 3)
                })
                .collect(),
            vertical: (0..self.cubes)
                .map(|z| {
                    bit(self.v(x, y, z), 0)
                        | bit(self.v(x1, y, z), 1)
                        | bit(self.v(x, y1, z), 2)
                        | bit(self.v(x1, y1, z), 3)
                })
                .collect(),
        }
    }

    /// Is the field unchanged by the reflection through every site line
    /// (equivalently, does every bond depend only on coordinate parities)?
    pub fn is_reflection_invariant(&self) -> bool {
        let n = self.n;
        (0..=self.cubes).all(|z| {
            (0..n).all(|y| {
                (0..n).all(|x| {
                    self.hx(x, y, z) == self.hx(x % 2, y % 2, z)
                        && self.hy(x, y, z) == self.hy(x % 2, y % 2, z)
                        && (z == self.cubes || self.v(x, y, z) == self.v(x % 2, y % 2, z))
                })
            })
        })
    }
}

/// Spread a column pattern over the `N x N` torus by reflections through the
/// lines containing sites: a bond's state depends only on its direction, its
/// height and the parities of its coordinates.
pub fn reflect_pattern(p: &ColumnPattern, n: usize) -> Result<SlabField> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!(
            "reflection needs an even N >= 2, got {n}"
        )));
    }
    let b = &p.bonds;
    let cubes = b.cubes();
    let mut f = SlabField::disordered(n, cubes, p.boundary_attached)?;
    for z in 0..=cubes {
        for y in 0..n {
            for x in 0..n {
                let h = b.horizontal[z];
                f.set_hx(x, y, z, h >> (y % 2) & 1 == 1);
                f.set_hy(x, y, z, h >> (2 + x % 2) & 1 == 1);
                if z < cubes {
                    f.set_v(x, y, z, b.vertical[z] >> (x % 2 + 2 * (y % 2)) & 1 == 1);
                }
            }
        }
    }
    Ok(f)
}

/// One connected component of the graph of ordered inner bonds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedComponent {
    pub sites: usize,
    /// Disordered inner bonds with at least one end in the component.
    pub boundary: usize,
    /// Disordered inner bonds with both ends in the component.
    pub double_boundary: usize,
    /// All ordered bonds are vertical (the component is a vertical segment).
    pub vertical_segment: bool,
    /// Some site lies on a boundary plane.
    pub touches_boundary: bool,
}

impl OrderedComponent {
    /// Vertical segment away from both boundary planes.
    pub fn is_free_segment(&self) -> bool {
        self.vertical_segment && !self.touches_boundary
    }
}

/// Exact counts on a slab. Raw integers; `*_per_column` helpers divide by N².
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectStats {
    pub n: usize,
    /// Interior planes.
    pub l: usize,
    /// Disordered end cubes; `None` for fields not built from a pattern.
    pub d: Option<u8>,
    pub boundary_attached: bool,
    pub class: Option<DefectClass>,
    /// Frustrated cubes in the whole slab.
    pub frustrated: usize,
    /// Inner disordered bonds.
    pub disordered: usize,
    /// Interior sites whose six bonds are all disordered.
    pub chaotic: usize,
    /// Components that are vertical segments away from the boundary planes.
    pub free_segments: usize,
    /// Disordered vertical bonds touching the bottom plane.
    pub bottom_disordered: usize,
    /// Disordered vertical bonds touching the top plane.
    pub top_disordered: usize,
    pub components: Vec<OrderedComponent>,
    /// Sites on boundary planes with no ordered inner bond, counted once per
    /// incident disordered inner bond.
    pub bare_boundary_incidences: usize,
    /// Some component joins the bottom plane to the top plane.
    pub ends_connected: bool,
}

pub type Frac = Ratio<i64>;

impl DefectStats {
    pub fn area(&self) -> i64 {
        (self.n * self.n) as i64
    }

    fn per_column(&self, v: usize) -> Frac {
        Frac::new(v as i64, self.area())
    }

    /// `m`: frustrated cubes per column.
    pub fn m(&self) -> Frac {
        self.per_column(self.frustrated)
    }

    pub fn d_norm(&self) -> Frac {
        self.per_column(self.disordered)
    }

    pub fn k_norm(&self) -> Frac {
        self.per_column(self.chaotic)
    }

    pub fn q_norm(&self) -> Frac {
        self.per_column(self.free_segments)
    }

    pub fn db_norm(&self) -> Frac {
        self.per_column(self.bottom_disordered)
    }

    /// `Σ_j (|∂X_j| + |∂²X_j|)`.
    pub fn boundary_sum(&self) -> usize {
        self.components.iter().map(|c| c.boundary + c.double_boundary).sum()
    }

    /// The term standing for the boundary planes in the double-counting
    /// identity: `d N²` in the bulk, `D^b` plus `N²` for a disordered top on
    /// the bottom of the box. `None` when `d` is unknown.
    pub fn boundary_term(&self) -> Option<usize> {
        let d = self.d? as usize;
        let a = self.n * self.n;
        Some(if self.boundary_attached {
            self.bottom_disordered + if d == 2 { a } else { 0 }
        } else {
            d * a
        })
    }
}

/// Count `D`, `K`, `Q`, `D^b` and the ordered components of a slab.
pub fn slab_stats(f: &SlabField) -> DefectStats {
    let n = f.n;
    let top = f.cubes;
    let site = |x: usize, y: usize, z: usize| (z * n + y) * n + x;
    let sites = n * n * (top + 1);
    let interior = |z: usize| z != 0 && z != top;

    // Inner bonds as (a, b, ordered, vertical).
    let mut bonds = Vec::with_capacity(3 * sites);
    for z in 0..=top {
        for y in 0..n {
            for x in 0..n {
                if interior(z) {
                    bonds.push((site(x, y, z), site((x + 1) % n, y, z), f.hx(x, y, z), false));
                    bonds.push((site(x, y, z), site(x, (y + 1) % n, z), f.hy(x, y, z), false));
                }
                if z < top {
                    bonds.push((site(x, y, z), site(x, y, z + 1), f.v(x, y, z), true));
                }
            }
        }
    }

    let mut uf = UnionFind::<usize>::new(sites);
    let mut has_ordered = vec![false; sites];
    let mut all_disordered = vec![true; sites];
    for &(a, b, ordered, _) in &bonds {
        if ordered {
            uf.union(a, b);
            has_ordered[a] = true;
            has_ordered[b] = true;
            all_disordered[a] = false;
            all_disordered[b] = false;
        }
    }

    let mut comp_of = vec![usize::MAX; sites];
    let mut components: Vec<OrderedComponent> = Vec::new();
    for s in 0..sites {
        if !has_ordered[s] {
            continue;
        }
        let r = uf.find_mut(s);
        if comp_of[r] == usize::MAX {
            comp_of[r] = components.len();
            components.push(OrderedComponent {
                sites: 0,
                boundary: 0,
                double_boundary: 0,
                vertical_segment: true,
                touches_boundary: false,
            });
        }
        let c = &mut components[comp_of[r]];
        comp_of[s] = comp_of[r];
        c.sites += 1;
        if !interior(s / (n * n)) {
            c.touches_boundary = true;
        }
    }

    let mut disordered = 0;
    let mut bare_boundary_incidences = 0;
    for &(a, b, ordered, vertical) in &bonds {
        if ordered {
            if !vertical {
                components[comp_of[a]].vertical_segment = false;
            }
            continue;
        }
        disordered += 1;
        let (ca, cb) = (comp_of[a], comp_of[b]);
        if ca != usize::MAX {
            components[ca].boundary += 1;
        }
        if cb != usize::MAX && cb != ca {
            components[cb].boundary += 1;
        }
        if ca != usize::MAX && ca == cb {
            components[ca].double_boundary += 1;
        }
        for s in [a, b] {
            if comp_of[s] == usize::MAX && !interior(s / (n * n)) {
                bare_boundary_incidences += 1;
            }
        }
    }

    let chaotic = (0..sites)
        .filter(|&s| interior(s / (n * n)) && all_disordered[s])
        .count();
    let free_segments = components.iter().filter(|c| c.is_free_segment()).count();
    let count_v = |z: usize| (0..n * n).filter(|&i| !f.v[z * n * n + i]).count();

    let bottom_roots: Vec<usize> = (0..n * n).filter(|&s| has_ordered[s]).map(|s| comp_of[s]).collect();
    let ends_connected = (0..n * n)
        .map(|i| top * n * n + i)
        .filter(|&s| has_ordered[s])
        .any(|s| bottom_roots.contains(&comp_of[s]));

    let mut frustrated = 0;
    for y in 0..n {
        for x in 0..n {
            let col = f.column(x, y);
            frustrated += (0..top)
                .filter(|&k| col.cube_state(k) == crate::interface::CubeState::Frustrated)
                .count();
        }
    }

    DefectStats {
        n,
        l: f.interior_planes(),
        d: None,
        boundary_attached: f.boundary_attached,
        class: None,
        frustrated,
        disordered,
        chaotic,
        free_segments,
        bottom_disordered: count_v(0),
        top_disordered: count_v(top - 1),
        components,
        bare_boundary_incidences,
        ends_connected,
    }
}

/// Counts for a reflected column pattern, carrying its `d` and class.
pub fn defect_stats(p: &ColumnPattern, n: usize) -> Result<DefectStats> {
    let f = reflect_pattern(p, n)?;
    let mut s = slab_stats(&f);
    s.d = Some(p.d);
    s.class = Some(p.class());
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_disordered_slab() {
        let f = SlabField::disordered(4, 3, false).unwrap();
        let s = slab_stats(&f);
        assert_eq!(s.chaotic, 2 * 16);
        assert_eq!(s.free_segments, 0);
        assert!(s.components.is_empty());
        // Inner bonds: two interior planes of horizontals and three layers.
        assert_eq!(s.disordered, 2 * 32 + 3 * 16);
        assert_eq!(s.bottom_disordered, 16);
        assert_eq!(s.top_disordered, 16);
        assert_eq!(s.frustrated, 0);
    }

    #[test]
    fn odd_side_is_rejected() {
        assert!(SlabField::disordered(3, 2, false).is_err());
    }

    #[test]
    fn single_vertical_bond_orbits() {
        // One ordered vertical bond at corner (a, b) of a 1-cube column
        // becomes the bonds of one parity class.
        for corner in 0..4 {
            let mut b = ColumnBonds::new(3);
            b.vertical[1] = 1 << corner;
            let p = ColumnPattern::from_bonds(b, 2, false).unwrap();
            let f = reflect_pattern(&p, 4).unwrap();
            let ordered = (0..4)
                .flat_map(|y| (0..4).map(move |x| (x, y)))
                .filter(|&(x, y)| f.v(x, y, 1))
                .count();
            assert_eq!(ordered, 4);
            assert!(f.is_reflection_invariant());
        }
        // A horizontal bit covers half of the plane's x-bonds.
        let mut b = ColumnBonds::new(3);
        b.horizontal[1] = 0b0001;
        let f = reflect_pattern(&ColumnPattern::from_bonds(b, 2, false).unwrap(), 4).unwrap();
        let ordered = (0..4)
            .flat_map(|y| (0..4).map(move |x| (x, y)))
            .filter(|&(x, y)| f.hx(x, y, 1))
            .count();
        assert_eq!(ordered, 8);
    }

    #[test]
    fn reflection_restricts_to_source_column() {
        let mut b = ColumnBonds::new(3);
        b.horizontal[1] = 0b1010;
        b.horizontal[2] = 0b0110;
        b.vertical[1] = 0b1001;
        let p = ColumnPattern::from_bonds(b.clone(), 2, false).unwrap();
        let f = reflect_pattern(&p, 6).unwrap();
        assert_eq!(f.column(0, 0), b);
        assert!(reflect_pattern(&p, 5).is_err());
    }
}
