//! Box geometry, spins, bonds and the order-disorder boundary.
//!
//! Sites live on `x, y` in the periodic range `0..n` and `z` in `0..=l+1`.
//! Planes `z = 0` and `z = l+1` are frozen boundary planes.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub type Spin = u16;

/// Largest supported number of clock states.
pub const MAX_Q: u32 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LatticeSpec {
    n: usize,
    l: usize,
    q: u32,
}

impl LatticeSpec {
    pub fn new(n: usize, l: usize, q: u32) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidSpec(format!("n must be even and >= 2, got {n}")));
        }
        if l < 1 {
            return Err(Error::InvalidSpec("l must be >= 1".into()));
        }
        if !(2..=MAX_Q).contains(&q) {
            return Err(Error::InvalidSpec(format!("q must lie in 2..={MAX_Q}, got {q}")));
        }
        Ok(Self { n, l, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of site planes, boundary planes included.
    pub fn planes(&self) -> usize {
        self.l + 2
    }

    pub fn plane_size(&self) -> usize {
        self.n * self.n
    }

    pub fn site_count(&self) -> usize {
        self.plane_size() * self.planes()
    }

    pub fn free_site_count(&self) -> usize {
        self.plane_size() * self.l
    }

    /// Number of unit cubes between plane 0 and plane l+1.
    pub fn cube_layers(&self) -> usize {
        self.l + 1
    }

    /// Bonds of the multigraph: horizontal ones in every plane plus vertical
    /// ones between consecutive planes. For n = 2 the two bonds joining the
    /// same pair of sites are both counted.
    pub fn bond_count(&self) -> usize {
        (3 * self.l + 5) * self.plane_size()
    }

    #[inline]
    pub fn site_index(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.n + y) * self.n + x
    }

    #[inline]
    pub fn site_coords(&self, i: usize) -> (usize, usize, usize) {
        let x = i % self.n;
        let y = (i / self.n) % self.n;
        (x, y, i / self.plane_size())
    }

    #[inline]
    pub fn next(&self, c: usize) -> usize {
        if c + 1 == self.n {
            0
        } else {
            c + 1
        }
    }

    #[inline]
    pub fn prev(&self, c: usize) -> usize {
        if c == 0 {
            self.n - 1
        } else {
            c - 1
        }
    }

    /// All bonds in a fixed order: plane by plane, x then y horizontals, then
    /// the verticals above the plane.
    pub fn bonds(&self) -> impl Iterator<Item = Bond> + '_ {
        let n = self.n;
        let planes = self.planes();
        (0..planes).flat_map(move |z| {
            (0..n).flat_map(move |y| {
                (0..n).flat_map(move |x| {
                    let vertical = (z + 1 < planes).then_some(Bond::new(x, y, z, Axis::Z));
                    [
                        Some(Bond::new(x, y, z, Axis::X)),
                        Some(Bond::new(x, y, z, Axis::Y)),
                        vertical,
                    ]
                    .into_iter()
                    .flatten()
                })
            })
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        self as usize
    }
}

/// The bond leaving site `(x, y, z)` in the positive `axis` direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bond {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub axis: Axis,
}

impl Bond {
    pub fn new(x: usize, y: usize, z: usize, axis: Axis) -> Self {
        Self { x, y, z, axis }
    }

    pub fn endpoints(&self, spec: &LatticeSpec) -> (usize, usize) {
        let a = spec.site_index(self.x, self.y, self.z);
        let b = match self.axis {
            Axis::X => spec.site_index(spec.next(self.x), self.y, self.z),
            Axis::Y => spec.site_index(self.x, spec.next(self.y), self.z),
            Axis::Z => spec.site_index(self.x, self.y, self.z + 1),
        };
        (a, b)
    }

    /// Dense id, unique per bond: `site * 3 + axis`.
    pub fn id(&self, spec: &LatticeSpec) -> usize {
        spec.site_index(self.x, self.y, self.z) * 3 + self.axis.index()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BondState {
    Ordered,
    Disordered,
}

/// Distance between two clock values on the cycle `Z_q`.
pub fn circular_distance(a: u32, b: u32, q: u32) -> Result<u32> {
    if q < 1 {
        return Err(Error::Domain("q must be >= 1".into()));
    }
    for v in [a, b] {
        if v >= q {
            return Err(Error::InvalidSpin { spin: v, q });
        }
    }
    Ok(dist(a as Spin, b as Spin, q))
}

#[inline]
pub(crate) fn dist(a: Spin, b: Spin, q: u32) -> u32 {
    let d = (a as u32).abs_diff(b as u32);
    d.min(q - d)
}

#[inline]
pub fn is_ordered_pair(a: Spin, b: Spin, q: u32) -> bool {
    dist(a, b, q) <= 1
}

/// Signed step from `a` to `b` when they are within distance one.
#[inline]
pub(crate) fn signed_step(a: Spin, b: Spin, q: u32) -> Option<i8> {
    let up = (b as u32 + q - a as u32) % q;
    match up {
        0 => Some(0),
        1 => Some(1),
        _ if up == q - 1 => Some(-1),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinConfig {
    spec: LatticeSpec,
    spins: Vec<Spin>,
}

impl SpinConfig {
    pub fn constant(spec: LatticeSpec, value: Spin) -> Result<Self> {
        check_spin(value, spec.q)?;
        Ok(Self {
            spec,
            spins: vec![value; spec.site_count()],
        })
    }

    pub fn from_spins(spec: LatticeSpec, spins: Vec<Spin>) -> Result<Self> {
        if spins.len() != spec.site_count() {
            return Err(Error::InvalidSpec(format!(
                "expected {} spins, got {}",
                spec.site_count(),
                spins.len()
            )));
        }
        for &s in &spins {
            check_spin(s, spec.q)?;
        }
        Ok(Self { spec, spins })
    }

    /// Constant interior `fill` with the given boundary planes.
    pub fn with_boundary(boundary: &Boundary, fill: Spin) -> Result<Self> {
        let mut config = Self::constant(boundary.spec, fill)?;
        boundary.apply(&mut config);
        Ok(config)
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub(crate) fn spins_mut(&mut self) -> &mut [Spin] {
        &mut self.spins
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> Spin {
        self.spins[self.spec.site_index(x, y, z)]
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, value: Spin) -> Result<()> {
        check_spin(value, self.spec.q)?;
        let i = self.spec.site_index(x, y, z);
        self.spins[i] = value;
        Ok(())
    }

    pub fn plane(&self, z: usize) -> &[Spin] {
        let p = self.spec.plane_size();
        &self.spins[z * p..(z + 1) * p]
    }

    /// The free spins, planes `1..=l`.
    pub fn free_spins(&self) -> &[Spin] {
        let p = self.spec.plane_size();
        &self.spins[p..p * (self.spec.l + 1)]
    }

    #[inline]
    pub fn bond_ordered(&self, bond: Bond) -> bool {
        let (a, b) = bond.endpoints(&self.spec);
        is_ordered_pair(self.spins[a], self.spins[b], self.spec.q)
    }

    pub fn bond_state(&self, bond: Bond) -> BondState {
        if self.bond_ordered(bond) {
            BondState::Ordered
        } else {
            BondState::Disordered
        }
    }

    pub fn ordered_bond_count(&self) -> usize {
        self.spec.bonds().filter(|&b| self.bond_ordered(b)).count()
    }

    /// `H = -(number of ordered bonds)`, boundary-boundary bonds included.
    pub fn total_energy(&self) -> i64 {
        -(self.ordered_bond_count() as i64)
    }

    /// Number of ordered bonds at a free site if it held `value`.
    #[inline]
    pub(crate) fn ordered_neighbours(&self, x: usize, y: usize, z: usize, value: Spin) -> u32 {
        let s = &self.spec;
        let q = s.q;
        let neighbours = [
            s.site_index(s.next(x), y, z),
            s.site_index(s.prev(x), y, z),
            s.site_index(x, s.next(y), z),
            s.site_index(x, s.prev(y), z),
            s.site_index(x, y, z + 1),
            s.site_index(x, y, z - 1),
        ];
        neighbours
            .iter()
            .filter(|&&j| is_ordered_pair(value, self.spins[j], q))
            .count() as u32
    }
}

fn check_spin(s: Spin, q: u32) -> Result<()> {
    if (s as u32) < q {
        Ok(())
    } else {
        Err(Error::InvalidSpin { spin: s as u32, q })
    }
}

/// Per-bond order flags, indexed by [`Bond::id`].
#[derive(Clone, Debug)]
pub struct BondField {
    spec: LatticeSpec,
    ordered: Vec<bool>,
}

impl BondField {
    #[inline]
    pub fn ordered(&self, x: usize, y: usize, z: usize, axis: Axis) -> bool {
        self.ordered[self.spec.site_index(x, y, z) * 3 + axis.index()]
    }

    pub fn state(&self, bond: Bond) -> BondState {
        if self.ordered(bond.x, bond.y, bond.z, bond.axis) {
            BondState::Ordered
        } else {
            BondState::Disordered
        }
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    /// (ordered, disordered) bond counts.
    pub fn counts(&self) -> (usize, usize) {
        let ordered = self
            .spec
            .bonds()
            .filter(|b| self.ordered(b.x, b.y, b.z, b.axis))
            .count();
        (ordered, self.spec.bond_count() - ordered)
    }
}

pub fn classify_bonds(config: &SpinConfig) -> BondField {
    let spec = config.spec;
    let mut ordered = vec![false; spec.site_count() * 3];
    for bond in spec.bonds() {
        ordered[bond.id(&spec)] = config.bond_ordered(bond);
    }
    BondField { spec, ordered }
}

/// Values of the 2x2 bottom tiling, indexed by `(x % 2) + 2 * (y % 2)`.
pub fn tiling_values(q: u32) -> [Spin; 4] {
    [0, (3 * q / 4) as Spin, (q / 4) as Spin, (q / 2) as Spin]
}

/// Frozen boundary planes: a periodic 2x2 tiling at the bottom and a constant
/// plane on top.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Boundary {
    spec: LatticeSpec,
    pub bottom: Vec<Spin>,
    pub top: Vec<Spin>,
}

impl Boundary {
    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn apply(&self, config: &mut SpinConfig) {
        let p = self.spec.plane_size();
        let top = self.spec.l + 1;
        config.spins[..p].copy_from_slice(&self.bottom);
        config.spins[top * p..(top + 1) * p].copy_from_slice(&self.top);
    }
}

/// Order-disorder boundary with top value `s`. Fails unless every bond of the
/// bottom plane is disordered, which holds exactly when `q >= 8`.
pub fn build_boundary(spec: &LatticeSpec, s: Spin) -> Result<Boundary> {
    let boundary = build_boundary_unchecked(spec, s)?;
    let t = tiling_values(spec.q);
    let strongly_disordered = [(0, 1), (2, 3), (0, 2), (1, 3)]
        .iter()
        .all(|&(a, b)| !is_ordered_pair(t[a], t[b], spec.q));
    if !strongly_disordered {
        return Err(Error::InvalidParams(format!(
            "q = {} leaves ordered bonds in the bottom tiling (needs q >= 8)",
            spec.q
        )));
    }
    Ok(boundary)
}

/// Same construction without the strong-disorder check, for small-q tests.
pub fn build_boundary_unchecked(spec: &LatticeSpec, s: Spin) -> Result<Boundary> {
    check_spin(s, spec.q)?;
    let t = tiling_values(spec.q);
    let n = spec.n;
    let bottom = (0..n * n).map(|i| t[(i % n) % 2 + 2 * ((i / n) % 2)]).collect();
    Ok(Boundary {
        spec: *spec,
        bottom,
        top: vec![s; n * n],
    })
}

/// Text snapshot: a header line `n l q`, then one block of `n` rows per plane
/// from `z = 0` upwards. Rows run over `y`, columns over `x`.
pub fn write_snapshot<W: Write>(config: &SpinConfig, mut w: W) -> std::io::Result<()> {
    let s = config.spec;
    writeln!(w, "{} {} {}", s.n, s.l, s.q)?;
    for z in 0..s.planes() {
        for y in 0..s.n {
            let row: Vec<String> = (0..s.n).map(|x| config.get(x, y, z).to_string()).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_snapshot<R: BufRead>(r: R) -> Result<SpinConfig> {
    let mut header: Option<LatticeSpec> = None;
    let mut spins = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<snapshot>", e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums = line
            .split_whitespace()
            .map(|t| t.parse::<u32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: lineno + 1,
                msg: e.to_string(),
            })?;
        match header {
            None => {
                if nums.len() != 3 {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: "header must be `n l q`".into(),
                    });
                }
                header = Some(LatticeSpec::new(nums[0] as usize, nums[1] as usize, nums[2])?);
            }
            Some(spec) => {
                if nums.len() != spec.n {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("expected {} values, got {}", spec.n, nums.len()),
                    });
                }
                for v in nums {
                    if v >= spec.q {
                        return Err(Error::InvalidSpin { spin: v, q: spec.q });
                    }
                    spins.push(v as Spin);
                }
            }
        }
    }
    let spec = header.ok_or(Error::Parse {
        line: 0,
        msg: "empty snapshot".into(),
    })?;
    SpinConfig::from_spins(spec, spins)
}

pub fn save_snapshot(config: &SpinConfig, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    write_snapshot(config, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_snapshot(path: &Path) -> Result<SpinConfig> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_snapshot(BufReader::new(f))
}
