//! Configurations with a planted pair of problematic defects stacked in every
//! column, used to exercise the gluing map.
//!
//! Planes are typed ordered (O) or disordered (D). Bottom to top: D up to
//! plane `a_lower + 1`, an O block on planes `a_lower + 2 ..= a_lower + 3`,
//! D up to plane `a_upper + 1`, and O from `a_upper + 2` to the top boundary.
//! O planes take values `s` or `s + 1` for a block value `s`; D spins are
//! drawn so that every bond they touch is disordered. Each column then holds
//! two three-cube defects with bottom planes `a_lower` and `a_upper`, each a
//! disordered cube, a frustrated cube with only disordered bonds, and an
//! ordered cube.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::column::ColumnBonds;
use crate::defects::{DefectClass, GlueGeometry};
use crate::error::{Error, Result};
use crate::lattice::{build_boundary, classify_bonds, is_ordered_pair, LatticeSpec, Spin, SpinConfig};
use crate::verifier::ColumnPattern;

const MAX_DRAWS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlantedPair {
    pub config: SpinConfig,
    pub a_lower: usize,
    pub a_upper: usize,
}

impl PlantedPair {
    pub fn geometry(&self, x: usize, y: usize) -> GlueGeometry {
        GlueGeometry::bulk(x, y, self.a_lower, self.a_upper)
    }
}

/// Plant a pair with the given defect bottom planes.
pub fn plant_problematic_pair(spec: LatticeSpec, a_lower: usize, a_upper: usize, seed: u64) -> Result<PlantedPair> {
    let top = spec.l() + 1;
    if a_upper < a_lower + 4 || a_upper + 3 > top {
        return Err(Error::InvalidParams(format!(
            "defects at planes {a_lower} and {a_upper} do not fit: need a_upper >= a_lower + 4 and a_upper + 3 <= {top}"
        )));
    }
    let q = spec.q();
    let n = spec.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s_lower = rng.random_range(0..q) as Spin;
    let s_top = rng.random_range(0..q) as Spin;
    let mut config = SpinConfig::with_boundary(&build_boundary(&spec, s_top)?, s_top)?;

    let block = |z: usize| -> Option<Spin> {
        if (a_lower + 2..=a_lower + 3).contains(&z) {
            Some(s_lower)
        } else if z >= a_upper + 2 {
            Some(s_top)
        } else {
            None
        }
    };
    for z in 1..top {
        if let Some(s) = block(z) {
            for y in 0..n {
                for x in 0..n {
                    let v = (s as u32 + rng.random_range(0..2)) % q;
                    config.set(x, y, z, v as Spin)?;
                }
            }
        }
    }

    // D planes in increasing z; a site must be disordered with every
    // neighbour assigned so far (the plane below, O planes above, and sites
    // of its own plane already visited).
    for z in (1..top).filter(|&z| block(z).is_none()) {
        let mut done = vec![false; n * n];
        for y in 0..n {
            for x in 0..n {
                let mut fixed = vec![config.get(x, y, z - 1)];
                if block(z + 1).is_some() || z + 1 == top {
                    fixed.push(config.get(x, y, z + 1));
                }
                for (nx, ny) in [
                    (spec.next(x), y),
                    (spec.prev(x), y),
                    (x, spec.next(y)),
                    (x, spec.prev(y)),
                ] {
                    if done[ny * n + nx] {
                        fixed.push(config.get(nx, ny, z));
                    }
                }
                let v = (0..MAX_DRAWS)
                    .map(|_| rng.random_range(0..q) as Spin)
                    .find(|&v| fixed.iter().all(|&f| !is_ordered_pair(v, f, q)))
                    .ok_or_else(|| Error::InvalidParams(format!("q = {q} too small to plant disordered planes")))?;
                config.set(x, y, z, v)?;
                done[y * n + x] = true;
            }
        }
    }
    Ok(PlantedPair {
        config,
        a_lower,
        a_upper,
    })
}

/// Plant a pair at random admissible heights.
pub fn random_planted_pair(spec: LatticeSpec, seed: u64) -> Result<PlantedPair> {
    let top = spec.l() + 1;
    if top < 7 {
        return Err(Error::InvalidParams(format!(
            "L = {} is too thin for a planted pair",
            spec.l()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let a_lower = rng.random_range(0..=top - 7);
    let a_upper = rng.random_range(a_lower + 4..=top - 3);
    plant_problematic_pair(spec, a_lower, a_upper, seed)
}

/// Class of the three-cube column pattern with bottom plane `a`, read as an
/// order-disorder defect, or `None` if the bonds are not an admissible defect.
pub fn column_defect_class(config: &SpinConfig, x: usize, y: usize, a: usize) -> Option<DefectClass> {
    let bonds = ColumnBonds::from_field(&classify_bonds(config), x, y, a, a + 2);
    let p = ColumnPattern::from_bonds(bonds, 1, false).ok()?;
    p.is_admissible().then(|| p.class())
}
