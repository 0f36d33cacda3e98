//! Per-configuration observables shared by chains, snapshot analysis and
//! experiments.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::interface::{
    decompose_surface, extract_interface, is_winding, surface_weight, Interface, SurfaceDecomposition,
};
use crate::lattice::SpinConfig;
use crate::sampler::ordered_fraction;

/// The interface of a configuration with its ceilings, walls and heights.
#[derive(Clone, Debug)]
pub struct SurfaceAnalysis {
    pub interface: Interface,
    pub decomposition: SurfaceDecomposition,
    pub weight: usize,
    /// Winding flag of every wall.
    pub winding: Vec<bool>,
}

impl SurfaceAnalysis {
    pub fn height_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for z in self.decomposition.heights.iter().flatten() {
            *h.entry(*z).or_default() += 1;
        }
        h
    }
}

pub fn analyze_surface(config: &SpinConfig) -> Result<SurfaceAnalysis> {
    let interface = extract_interface(config)?;
    let spec = *config.spec();
    let decomposition = decompose_surface(&spec, &interface.surface);
    let weight = surface_weight(&interface.surface);
    let winding = decomposition.walls.iter().map(|w| is_winding(&spec, w)).collect();
    Ok(SurfaceAnalysis {
        interface,
        decomposition,
        weight,
        winding,
    })
}

/// Fraction of columns `(x, y)` whose finite height equals that of
/// `(x + dx, y + dy)`.
pub fn height_equal_fraction(heights: &[Option<usize>], n: usize, dx: usize, dy: usize) -> f64 {
    let mut equal = 0;
    for y in 0..n {
        for x in 0..n {
            let a = heights[y * n + x];
            let b = heights[((y + dy) % n) * n + (x + dx) % n];
            if a.is_some() && a == b {
                equal += 1;
            }
        }
    }
    equal as f64 / (n * n) as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub energy: i64,
    pub ordered_fraction: f64,
    pub rigidity_fraction: f64,
    pub interface_components: usize,
    pub height_mode: Option<usize>,
    pub surface_size: usize,
    pub weight: usize,
    pub ceilings: usize,
    pub walls: usize,
    pub winding_walls: usize,
    /// Height-equality frequency for neighbouring columns.
    pub adjacent_equal: f64,
    /// Height-equality frequency for columns half the torus apart.
    pub antipodal_equal: f64,
}

impl Observation {
    pub const NAMES: [&'static str; 12] = [
        "energy",
        "ordered_fraction",
        "rigidity_fraction",
        "n_interface_components",
        "height_mode",
        "surface_size",
        "weight",
        "n_ceilings",
        "n_walls",
        "n_winding_walls",
        "height_equal_adjacent",
        "height_equal_antipodal",
    ];

    /// Values in [`Self::NAMES`] order; a missing height mode is `-1`.
    pub fn values(&self) -> [f64; 12] {
        [
            self.energy as f64,
            self.ordered_fraction,
            self.rigidity_fraction,
            self.interface_components as f64,
            self.height_mode.map_or(-1.0, |h| h as f64),
            self.surface_size as f64,
            self.weight as f64,
            self.ceilings as f64,
            self.walls as f64,
            self.winding_walls as f64,
            self.adjacent_equal,
            self.antipodal_equal,
        ]
    }
}

pub fn observe(config: &SpinConfig) -> Result<Observation> {
    let n = config.spec().n();
    let s = analyze_surface(config)?;
    let f = ordered_fraction(config);
    let d = &s.decomposition;
    Ok(Observation {
        energy: config.total_energy(),
        ordered_fraction: *f.numer() as f64 / *f.denom() as f64,
        rigidity_fraction: d.rigidity_fraction(n),
        interface_components: s.interface.interface_component_count(),
        height_mode: d.height_mode(),
        surface_size: s.interface.surface.len(),
        weight: s.weight,
        ceilings: d.ceilings.len(),
        walls: d.walls.len(),
        winding_walls: s.winding.iter().filter(|&&w| w).count(),
        adjacent_equal: height_equal_fraction(&d.heights, n, 1, 0),
        antipodal_equal: height_equal_fraction(&d.heights, n, n / 2, n / 2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_boundary, LatticeSpec};

    #[test]
    fn flat_interface_observation() {
        // Ordered interior over the disordered floor: one flat ceiling at z = 0.
        let spec = LatticeSpec::new(4, 3, 64).unwrap();
        let config = SpinConfig::with_boundary(&build_boundary(&spec, 5).unwrap(), 5).unwrap();
        let o = observe(&config).unwrap();
        assert_eq!(o.rigidity_fraction, 1.0);
        assert_eq!(o.weight, 0);
        assert_eq!(o.ceilings, 1);
        assert_eq!(o.walls, 0);
        assert_eq!(o.surface_size, 16);
        assert_eq!(o.adjacent_equal, 1.0);
        assert_eq!(o.antipodal_equal, 1.0);
        assert!(o.interface_components >= 1);
        assert_eq!(o.values().len(), Observation::NAMES.len());
    }

    #[test]
    fn equality_fraction_ignores_infinite_heights() {
        let h = vec![Some(1), Some(1), None, None];
        assert_eq!(height_equal_fraction(&h, 2, 1, 0), 0.5);
        assert_eq!(height_equal_fraction(&h, 2, 0, 1), 0.0);
    }
}
