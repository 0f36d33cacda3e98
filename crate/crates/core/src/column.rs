//! Bond states of a single column of stacked unit cubes.
//!
//! Corners of the column are numbered `a + 2 b` for the offsets `a, b` in
//! `{0, 1}`. A horizontal plaquette stores four bits (1 = ordered): the x-bond
//! at `b = 0`, the x-bond at `b = 1`, the y-bond at `a = 0` and the y-bond at
//! `a = 1`. A vertical layer stores one bit per corner.

use crate::interface::CubeState;
use crate::lattice::{Axis, BondField};

/// Corner pairs joined by each horizontal bit.
pub const H_ENDS: [(usize, usize); 4] = [(0, 1), (2, 3), (0, 2), (1, 3)];
pub const ALL: u8 = 0b1111;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColumnBonds {
    /// One mask per plane, `cubes + 1` entries.
    pub horizontal: Vec<u8>,
    /// One mask per cube layer.
    pub vertical: Vec<u8>,
}

impl ColumnBonds {
    pub fn new(cubes: usize) -> Self {
        Self {
            horizontal: vec![0; cubes + 1],
            vertical: vec![0; cubes],
        }
    }

    pub fn cubes(&self) -> usize {
        self.vertical.len()
    }

    pub fn bond_count(&self) -> usize {
        8 * self.cubes() + 4
    }

    /// Copy the bonds of column `(x, y)` for cube layers `lo..=hi`.
    pub fn from_field(bonds: &BondField, x: usize, y: usize, lo: usize, hi: usize) -> Self {
        let spec = bonds.spec();
        let (x1, y1) = (spec.next(x), spec.next(y));
        let bit = |b: bool, i: usize| (b as u8) << i;
        let horizontal = (lo..=hi + 1)
            .map(|z| {
                bit(bonds.ordered(x, y, z, Axis::X), 0)
                    | bit(bonds.ordered(x, y1, z, Axis::X), 1)
                    | bit(bonds.ordered(x, y, z, Axis::Y), 2)
                    | bit(bonds.ordered(x1, y, z, Axis::Y), 3)
            })
            .collect();
        let vertical = (lo..=hi)
            .map(|z| {
                bit(bonds.ordered(x, y, z, Axis::Z), 0)
                    | bit(bonds.ordered(x1, y, z, Axis::Z), 1)
                    | bit(bonds.ordered(x, y1, z, Axis::Z), 2)
                    | bit(bonds.ordered(x1, y1, z, Axis::Z), 3)
            })
            .collect();
        Self { horizontal, vertical }
    }

    pub fn ordered_in_cube(&self, k: usize) -> u32 {
        self.horizontal[k].count_ones() + self.horizontal[k + 1].count_ones() + self.vertical[k].count_ones()
    }

    pub fn cube_state(&self, k: usize) -> CubeState {
        match self.ordered_in_cube(k) {
            12 => CubeState::Ordered,
            0 => CubeState::Disordered,
            _ => CubeState::Frustrated,
        }
    }

    /// Is one of the four vertical faces of cube `k` fully disordered?
    pub fn has_disordered_side(&self, k: usize) -> bool {
        // Side faces: bit of the bottom and top plaquettes plus the two
        // verticals at the ends of that bit's bond.
        H_ENDS.iter().enumerate().any(|(i, &(u, v))| {
            let h = (self.horizontal[k] | self.horizontal[k + 1]) >> i & 1;
            let vert = (self.vertical[k] >> u | self.vertical[k] >> v) & 1;
            h == 0 && vert == 0
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_states_from_masks() {
        let mut c = ColumnBonds::new(2);
        assert_eq!(c.cube_state(0), CubeState::Disordered);
        c.horizontal[1] = ALL;
        assert_eq!(c.cube_state(0), CubeState::Frustrated);
        assert!(!c.has_disordered_side(0));
        c.horizontal = vec![ALL; 3];
        c.vertical = vec![ALL, 0b0111];
        assert_eq!(c.cube_state(0), CubeState::Ordered);
        assert_eq!(c.cube_state(1), CubeState::Frustrated);
        assert_eq!(c.bond_count(), 20);
    }

    #[test]
    fn disordered_side_detection() {
        let mut c = ColumnBonds::new(1);
        c.horizontal = vec![ALL, ALL];
        c.vertical = vec![0];
        assert!(!c.has_disordered_side(0));
        // Clear the x-bond at b = 0 in both planes: corners 0 and 1 are
        // already disordered vertically.
        c.horizontal = vec![0b1110, 0b1110];
        assert!(c.has_disordered_side(0));
        c.vertical = vec![0b0001];
        assert!(!c.has_disordered_side(0));
    }
}
