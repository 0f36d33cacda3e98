//! Frustrated cubes, their connected components, the phase regions they
//! bound and the separating surface `B` with its ceilings and walls.
//!
//! Cube `(x, y, z)` spans planes `z` and `z + 1`, so layers run `0..=l`. Two
//! virtual layers close the box: a disordered one below plane 0 and an
//! ordered one above plane `l + 1`.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::lattice::{classify_bonds, Axis, BondField, LatticeSpec, SpinConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CubeState {
    Ordered,
    Disordered,
    Frustrated,
}

/// State of every unit cube, indexed `(z * n + y) * n + x`.
#[derive(Clone, Debug)]
pub struct CubeGrid {
    spec: LatticeSpec,
    states: Vec<CubeState>,
}

impl CubeGrid {
    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        let n = self.spec.n();
        (z * n + y) * n + x
    }

    #[inline]
    pub fn coords(&self, c: usize) -> (usize, usize, usize) {
        let n = self.spec.n();
        (c % n, (c / n) % n, c / (n * n))
    }

    #[inline]
    pub fn state(&self, x: usize, y: usize, z: usize) -> CubeState {
        self.states[self.index(x, y, z)]
    }

    pub fn state_at(&self, c: usize) -> CubeState {
        self.states[c]
    }

    pub fn frustrated(&self) -> Vec<usize> {
        (0..self.states.len())
            .filter(|&c| self.states[c] == CubeState::Frustrated)
            .collect()
    }
}

/// The twelve bonds of cube `(x, y, z)`.
pub fn cube_bonds(spec: &LatticeSpec, x: usize, y: usize, z: usize) -> [(usize, usize, usize, Axis); 12] {
    let (x1, y1) = (spec.next(x), spec.next(y));
    [
        (x, y, z, Axis::X),
        (x, y1, z, Axis::X),
        (x, y, z, Axis::Y),
        (x1, y, z, Axis::Y),
        (x, y, z + 1, Axis::X),
        (x, y1, z + 1, Axis::X),
        (x, y, z + 1, Axis::Y),
        (x1, y, z + 1, Axis::Y),
        (x, y, z, Axis::Z),
        (x1, y, z, Axis::Z),
        (x, y1, z, Axis::Z),
        (x1, y1, z, Axis::Z),
    ]
}

pub fn cube_states(bonds: &BondField) -> CubeGrid {
    let spec = *bonds.spec();
    let n = spec.n();
    let mut states = Vec::with_capacity(n * n * spec.cube_layers());
    for z in 0..spec.cube_layers() {
        for y in 0..n {
            for x in 0..n {
                let ordered = cube_bonds(&spec, x, y, z)
                    .iter()
                    .filter(|&&(a, b, c, axis)| bonds.ordered(a, b, c, axis))
                    .count();
                states.push(match ordered {
                    12 => CubeState::Ordered,
                    0 => CubeState::Disordered,
                    _ => CubeState::Frustrated,
                });
            }
        }
    }
    CubeGrid { spec, states }
}

pub fn frustrated_cubes(config: &SpinConfig) -> CubeGrid {
    cube_states(&classify_bonds(config))
}

/// Cube neighbours sharing at least one bond: faces and edges, not corners.
fn bond_neighbours(grid: &CubeGrid, c: usize) -> impl Iterator<Item = usize> + '_ {
    let spec = grid.spec;
    let n = spec.n() as isize;
    let layers = spec.cube_layers() as isize;
    let (x, y, z) = grid.coords(c);
    let (x, y, z) = (x as isize, y as isize, z as isize);
    (-1..=1isize).flat_map(move |dz| {
        (-1..=1isize).flat_map(move |dy| {
            (-1..=1isize).filter_map(move |dx| {
                let nonzero = (dx != 0) as u8 + (dy != 0) as u8 + (dz != 0) as u8;
                let zz = z + dz;
                if nonzero == 0 || nonzero == 3 || zz < 0 || zz >= layers {
                    return None;
                }
                let xx = (x + dx).rem_euclid(n) as usize;
                let yy = (y + dy).rem_euclid(n) as usize;
                Some(grid.index(xx, yy, zz as usize))
            })
        })
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrustrationComponent {
    /// Sorted cube indices.
    pub cubes: Vec<usize>,
    /// True when removing the component disconnects the bottom of the box
    /// from the top.
    pub interface: bool,
}

pub fn decompose_components(grid: &CubeGrid) -> Vec<FrustrationComponent> {
    let frustrated = grid.frustrated();
    let mut uf = UnionFind::<usize>::new(grid.len());
    for &c in &frustrated {
        for d in bond_neighbours(grid, c) {
            if grid.states[d] == CubeState::Frustrated {
                uf.union(c, d);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &c in &frustrated {
        groups.entry(uf.find_mut(c)).or_default().push(c);
    }
    let mut comps: Vec<FrustrationComponent> = groups
        .into_values()
        .map(|cubes| {
            let interface = separates(grid, &cubes);
            FrustrationComponent { cubes, interface }
        })
        .collect();
    comps.sort_by_key(|c| c.cubes[0]);
    comps
}

/// Does removing `cubes` cut every face path from the bottom layer to the top?
fn separates(grid: &CubeGrid, cubes: &[usize]) -> bool {
    let spec = grid.spec;
    let n = spec.n();
    let mut columns = vec![false; n * n];
    for &c in cubes {
        columns[c % (n * n)] = true;
    }
    if !columns.iter().all(|&b| b) {
        return false;
    }
    let mut blocked = vec![false; grid.len()];
    for &c in cubes {
        blocked[c] = true;
    }
    let top = spec.l();
    let mut seen = blocked.clone();
    let mut queue: VecDeque<usize> = (0..n * n).filter(|&c| !blocked[c]).collect();
    for &c in &queue {
        seen[c] = true;
    }
    while let Some(c) = queue.pop_front() {
        let (x, y, z) = grid.coords(c);
        if z == top {
            return false;
        }
        for (d, _) in face_neighbours(grid, x, y, z) {
            if let Node::Cube(d) = d {
                if !seen[d] {
                    seen[d] = true;
                    queue.push_back(d);
                }
            }
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    /// Horizontal square `[x, x+1] x [y, y+1]` in plane `z`.
    H,
    /// Vertical square in the plane `x = const`, spanning `[y, y+1] x [z, z+1]`.
    VX,
    /// Vertical square in the plane `y = const`, spanning `[x, x+1] x [z, z+1]`.
    VY,
}

/// A unit square of the dual surface, i.e. a face between two cubes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plaquette {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub orient: Orientation,
}

impl Plaquette {
    pub fn new(x: usize, y: usize, z: usize, orient: Orientation) -> Self {
        Self { x, y, z, orient }
    }

    pub fn is_horizontal(&self) -> bool {
        self.orient == Orientation::H
    }

    /// The four bonds on the plaquette boundary, as dense bond ids.
    pub fn edge_ids(&self, spec: &LatticeSpec) -> [usize; 4] {
        let (x, y, z) = (self.x, self.y, self.z);
        let id = |x: usize, y: usize, z: usize, a: Axis| spec.site_index(x, y, z) * 3 + a.index();
        match self.orient {
            Orientation::H => [
                id(x, y, z, Axis::X),
                id(x, spec.next(y), z, Axis::X),
                id(x, y, z, Axis::Y),
                id(spec.next(x), y, z, Axis::Y),
            ],
            Orientation::VX => [
                id(x, y, z, Axis::Y),
                id(x, y, z + 1, Axis::Y),
                id(x, y, z, Axis::Z),
                id(x, spec.next(y), z, Axis::Z),
            ],
            Orientation::VY => [
                id(x, y, z, Axis::X),
                id(x, y, z + 1, Axis::X),
                id(x, y, z, Axis::Z),
                id(spec.next(x), y, z, Axis::Z),
            ],
        }
    }

    /// The four corner sites, as site indices.
    pub fn vertex_ids(&self, spec: &LatticeSpec) -> [usize; 4] {
        let (x, y, z) = (self.x, self.y, self.z);
        let (x1, y1) = (spec.next(x), spec.next(y));
        let s = |x, y, z| spec.site_index(x, y, z);
        match self.orient {
            Orientation::H => [s(x, y, z), s(x1, y, z), s(x, y1, z), s(x1, y1, z)],
            Orientation::VX => [s(x, y, z), s(x, y1, z), s(x, y, z + 1), s(x, y1, z + 1)],
            Orientation::VY => [s(x, y, z), s(x1, y, z), s(x, y, z + 1), s(x1, y, z + 1)],
        }
    }

    /// Dense id over all plaquettes of the box.
    pub fn dense_id(&self, spec: &LatticeSpec) -> usize {
        let n = spec.n();
        let p = n * n;
        let base = (self.z * n + self.y) * n + self.x;
        match self.orient {
            Orientation::H => base,
            Orientation::VX => p * spec.planes() + base,
            Orientation::VY => p * spec.planes() + p * spec.cube_layers() + base,
        }
    }

    /// The two cubes on either side, lower/left first. Virtual cubes are `None`.
    pub fn cubes(&self, spec: &LatticeSpec) -> (Option<(usize, usize, usize)>, Option<(usize, usize, usize)>) {
        let (x, y, z) = (self.x, self.y, self.z);
        match self.orient {
            Orientation::H => {
                let below = (z > 0).then(|| (x, y, z - 1));
                let above = (z <= spec.l()).then_some((x, y, z));
                (below, above)
            }
            Orientation::VX => (Some((spec.prev(x), y, z)), Some((x, y, z))),
            Orientation::VY => (Some((x, spec.prev(y), z)), Some((x, y, z))),
        }
    }
}

pub fn plaquette_count(spec: &LatticeSpec) -> usize {
    let p = spec.plane_size();
    p * spec.planes() + 2 * p * spec.cube_layers()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Node {
    Cube(usize),
    Bottom,
    Top,
}

/// Face neighbours of cube `(x, y, z)` with the plaquette crossed.
fn face_neighbours(grid: &CubeGrid, x: usize, y: usize, z: usize) -> [(Node, Plaquette); 6] {
    let spec = &grid.spec;
    let below = if z == 0 {
        Node::Bottom
    } else {
        Node::Cube(grid.index(x, y, z - 1))
    };
    let above = if z == spec.l() {
        Node::Top
    } else {
        Node::Cube(grid.index(x, y, z + 1))
    };
    let (xp, xm, yp, ym) = (spec.next(x), spec.prev(x), spec.next(y), spec.prev(y));
    [
        (below, Plaquette::new(x, y, z, Orientation::H)),
        (above, Plaquette::new(x, y, z + 1, Orientation::H)),
        (
            Node::Cube(grid.index(xm, y, z)),
            Plaquette::new(x, y, z, Orientation::VX),
        ),
        (
            Node::Cube(grid.index(xp, y, z)),
            Plaquette::new(xp, y, z, Orientation::VX),
        ),
        (
            Node::Cube(grid.index(x, ym, z)),
            Plaquette::new(x, y, z, Orientation::VY),
        ),
        (
            Node::Cube(grid.index(x, yp, z)),
            Plaquette::new(x, yp, z, Orientation::VY),
        ),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    Interface,
    Ordered,
    Disordered,
}

#[derive(Clone, Debug)]
pub struct Interface {
    pub grid: CubeGrid,
    pub components: Vec<FrustrationComponent>,
    /// Phase region of every cube.
    pub regions: Vec<Region>,
    /// Boundary between the disordered region and the interface cubes.
    pub boundary: Vec<Plaquette>,
    /// The separating part of `boundary`, sorted.
    pub surface: Vec<Plaquette>,
    /// Complement components whose type had to fall back to a default.
    pub untyped_regions: usize,
}

impl Interface {
    pub fn spec(&self) -> &LatticeSpec {
        self.grid.spec()
    }

    pub fn interface_component_count(&self) -> usize {
        self.components.iter().filter(|c| c.interface).count()
    }

    pub fn region(&self, x: usize, y: usize, z: usize) -> Region {
        self.regions[self.grid.index(x, y, z)]
    }
}

pub fn extract_interface(config: &SpinConfig) -> Result<Interface> {
    let grid = frustrated_cubes(config);
    interface_from_grid(grid)
}

pub fn interface_from_grid(grid: CubeGrid) -> Result<Interface> {
    let components = decompose_components(&grid);
    let mut in_i = vec![false; grid.len()];
    for comp in components.iter().filter(|c| c.interface) {
        for &c in &comp.cubes {
            in_i[c] = true;
        }
    }
    if !in_i.iter().any(|&b| b) {
        return Err(Error::Structural("no frustrated component separates the box".into()));
    }

    // Complement components under face adjacency, with the virtual layers as
    // two extra nodes.
    let bottom = grid.len();
    let top = bottom + 1;
    let node_id = |node: Node| match node {
        Node::Cube(c) => c,
        Node::Bottom => bottom,
        Node::Top => top,
    };
    let mut uf = UnionFind::<usize>::new(grid.len() + 2);
    for c in 0..grid.len() {
        if in_i[c] {
            continue;
        }
        let (x, y, z) = grid.coords(c);
        for (d, _) in face_neighbours(&grid, x, y, z) {
            let d = node_id(d);
            if d >= bottom || !in_i[d] {
                uf.union(c, d);
            }
        }
    }
    if uf.equiv(bottom, top) {
        return Err(Error::Structural(
            "virtual layers connected through the complement".into(),
        ));
    }
    let root_bottom = uf.find_mut(bottom);
    let root_top = uf.find_mut(top);
    let mut kind: HashMap<usize, Region> = HashMap::new();
    kind.insert(root_bottom, Region::Disordered);
    kind.insert(root_top, Region::Ordered);
    let touches_i = |c: usize| {
        let (x, y, z) = grid.coords(c);
        face_neighbours(&grid, x, y, z)
            .iter()
            .any(|&(d, _)| matches!(d, Node::Cube(d) if in_i[d]))
    };
    let pure = |c: usize| match grid.states[c] {
        CubeState::Ordered => Some(Region::Ordered),
        CubeState::Disordered => Some(Region::Disordered),
        CubeState::Frustrated => None,
    };
    // First pure cube next to the interface decides; else the first pure cube.
    let mut fallback: HashMap<usize, Region> = HashMap::new();
    for c in 0..grid.len() {
        if in_i[c] {
            continue;
        }
        let r = uf.find_mut(c);
        if kind.contains_key(&r) {
            continue;
        }
        if let Some(t) = pure(c) {
            if touches_i(c) {
                kind.insert(r, t);
            } else {
                fallback.entry(r).or_insert(t);
            }
        }
    }
    let mut untyped_regions = 0;
    let mut regions = vec![Region::Interface; grid.len()];
    let mut counted = HashSet::new();
    for c in 0..grid.len() {
        if in_i[c] {
            continue;
        }
        let r = uf.find_mut(c);
        regions[c] = match kind.get(&r).or_else(|| fallback.get(&r)) {
            Some(&t) => t,
            None => {
                if counted.insert(r) {
                    untyped_regions += 1;
                }
                Region::Disordered
            }
        };
    }

    let mut boundary = Vec::new();
    for c in 0..grid.len() {
        if !in_i[c] {
            continue;
        }
        let (x, y, z) = grid.coords(c);
        for (d, p) in face_neighbours(&grid, x, y, z) {
            let disordered = match d {
                Node::Bottom => true,
                Node::Top => false,
                Node::Cube(d) => regions[d] == Region::Disordered,
            };
            if disordered {
                boundary.push(p);
            }
        }
    }
    boundary.sort();
    boundary.dedup();
    let surface = separating_part(&grid, &boundary);
    Ok(Interface {
        grid,
        components,
        regions,
        boundary,
        surface,
        untyped_regions,
    })
}

/// Edge-connected components of a plaquette set, each sorted.
pub fn edge_components(spec: &LatticeSpec, plaquettes: &[Plaquette]) -> Vec<Vec<Plaquette>> {
    let mut by_edge: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, p) in plaquettes.iter().enumerate() {
        for e in p.edge_ids(spec) {
            by_edge.entry(e).or_default().push(i);
        }
    }
    group(plaquettes, by_edge.into_values())
}

/// Components where plaquettes sharing a corner are connected.
pub fn vertex_components(spec: &LatticeSpec, plaquettes: &[Plaquette]) -> Vec<Vec<Plaquette>> {
    let mut by_vertex: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, p) in plaquettes.iter().enumerate() {
        for v in p.vertex_ids(spec) {
            by_vertex.entry(v).or_default().push(i);
        }
    }
    group(plaquettes, by_vertex.into_values())
}

fn group(plaquettes: &[Plaquette], links: impl Iterator<Item = Vec<usize>>) -> Vec<Vec<Plaquette>> {
    let mut uf = UnionFind::<usize>::new(plaquettes.len());
    for members in links {
        for w in members.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    let mut groups: HashMap<usize, Vec<Plaquette>> = HashMap::new();
    for (i, p) in plaquettes.iter().enumerate() {
        groups.entry(uf.find_mut(i)).or_default().push(*p);
    }
    let mut out: Vec<Vec<Plaquette>> = groups
        .into_values()
        .map(|mut g| {
            g.sort();
            g
        })
        .collect();
    out.sort();
    out
}

fn separating_part(grid: &CubeGrid, boundary: &[Plaquette]) -> Vec<Plaquette> {
    let spec = grid.spec;
    let mut surface = Vec::new();
    for comp in edge_components(&spec, boundary) {
        if blocks_box(grid, &comp) {
            surface.extend(comp);
        }
    }
    surface.sort();
    surface
}

/// Does the plaquette set cut every face path from the virtual bottom layer
/// to the virtual top layer?
pub fn blocks_box(grid: &CubeGrid, plaquettes: &[Plaquette]) -> bool {
    let spec = grid.spec;
    let n = spec.n();
    let mut columns = vec![false; n * n];
    for p in plaquettes.iter().filter(|p| p.is_horizontal()) {
        columns[p.y * n + p.x] = true;
    }
    if !columns.iter().all(|&b| b) {
        return false;
    }
    let mut blocked = vec![false; plaquette_count(&spec)];
    for p in plaquettes {
        blocked[p.dense_id(&spec)] = true;
    }
    let mut seen = vec![false; grid.len()];
    let mut queue = VecDeque::new();
    for y in 0..n {
        for x in 0..n {
            if !blocked[Plaquette::new(x, y, 0, Orientation::H).dense_id(&spec)] {
                let c = grid.index(x, y, 0);
                seen[c] = true;
                queue.push_back(c);
            }
        }
    }
    while let Some(c) = queue.pop_front() {
        let (x, y, z) = grid.coords(c);
        for (d, p) in face_neighbours(grid, x, y, z) {
            if blocked[p.dense_id(&spec)] {
                continue;
            }
            match d {
                Node::Top => return false,
                Node::Bottom => {}
                Node::Cube(d) => {
                    if !seen[d] {
                        seen[d] = true;
                        queue.push_back(d);
                    }
                }
            }
        }
    }
    true
}

/// Plaquettes beyond one per covered column: `|B| - |projection of horizontals|`.
pub fn surface_weight(surface: &[Plaquette]) -> usize {
    let columns: HashSet<(usize, usize)> = surface
        .iter()
        .filter(|p| p.is_horizontal())
        .map(|p| (p.x, p.y))
        .collect();
    surface.len() - columns.len()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceDecomposition {
    pub ceilings: Vec<Vec<Plaquette>>,
    pub walls: Vec<Vec<Plaquette>>,
    /// Height of the unique horizontal plaquette per column, `y * n + x`.
    pub heights: Vec<Option<usize>>,
    /// Columns under the largest ceiling.
    pub rigid: Vec<(usize, usize)>,
}

impl SurfaceDecomposition {
    pub fn rigidity_fraction(&self, n: usize) -> f64 {
        self.rigid.len() as f64 / (n * n) as f64
    }

    /// Most frequent defined height, smallest on ties.
    pub fn height_mode(&self) -> Option<usize> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for h in self.heights.iter().flatten() {
            *counts.entry(*h).or_default() += 1;
        }
        let best = counts.values().copied().max()?;
        counts.into_iter().find(|&(_, c)| c == best).map(|(h, _)| h)
    }
}

pub fn decompose_surface(spec: &LatticeSpec, surface: &[Plaquette]) -> SurfaceDecomposition {
    let n = spec.n();
    let mut per_column = vec![0usize; n * n];
    for p in surface.iter().filter(|p| p.is_horizontal()) {
        per_column[p.y * n + p.x] += 1;
    }
    let (regular, rest): (Vec<Plaquette>, Vec<Plaquette>) = surface
        .iter()
        .partition(|p| p.is_horizontal() && per_column[p.y * n + p.x] == 1);
    let mut heights = vec![None; n * n];
    for p in &regular {
        heights[p.y * n + p.x] = Some(p.z);
    }
    let ceilings = edge_components(spec, &regular);
    let walls = vertex_components(spec, &rest);
    let rigid = ceilings
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b[0].cmp(&a[0])))
        .map(|c| c.iter().map(|p| (p.x, p.y)).collect())
        .unwrap_or_default();
    SurfaceDecomposition {
        ceilings,
        walls,
        heights,
        rigid,
    }
}

/// Does the projection of `wall` onto the base torus contain a loop that
/// wraps around it?
pub fn is_winding(spec: &LatticeSpec, wall: &[Plaquette]) -> bool {
    // Directed unit edges of the base torus: (vertex, 0 for +x / 1 for +y).
    let mut edges: HashSet<(usize, usize, u8)> = HashSet::new();
    for p in wall {
        let (x, y) = (p.x, p.y);
        match p.orient {
            Orientation::H => {
                edges.insert((x, y, 0));
                edges.insert((x, spec.next(y), 0));
                edges.insert((x, y, 1));
                edges.insert((spec.next(x), y, 1));
            }
            Orientation::VX => {
                edges.insert((x, y, 1));
            }
            Orientation::VY => {
                edges.insert((x, y, 0));
            }
        }
    }
    let mut adj: HashMap<(usize, usize), Vec<((usize, usize), (i64, i64))>> = HashMap::new();
    for &(x, y, dir) in &edges {
        let (to, step) = if dir == 0 {
            ((spec.next(x), y), (1, 0))
        } else {
            ((x, spec.next(y)), (0, 1))
        };
        adj.entry((x, y)).or_default().push((to, step));
        adj.entry(to).or_default().push(((x, y), (-step.0, -step.1)));
    }
    let mut lift: HashMap<(usize, usize), (i64, i64)> = HashMap::new();
    let mut starts: Vec<_> = adj.keys().copied().collect();
    starts.sort();
    for s in starts {
        if lift.contains_key(&s) {
            continue;
        }
        lift.insert(s, (0, 0));
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let pu = lift[&u];
            for &(v, (dx, dy)) in &adj[&u] {
                let want = (pu.0 + dx, pu.1 + dy);
                match lift.get(&v) {
                    Some(&pv) if pv != want => return true,
                    Some(_) => {}
                    None => {
                        lift.insert(v, want);
                        queue.push_back(v);
                    }
                }
            }
        }
    }
    false
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::lattice::{build_boundary, Spin};

    /// Order-disorder box whose disordered phase fills planes `1..=h` and
    /// whose ordered phase sits above. Disordered planes use a staggered
    /// pattern of widely spaced values.
    pub(crate) fn flat_interface(n: usize, l: usize, q: u32, h: usize) -> SpinConfig {
        let spec = LatticeSpec::new(n, l, q).unwrap();
        let b = build_boundary(&spec, 0).unwrap();
        let mut c = SpinConfig::with_boundary(&b, 0).unwrap();
        for z in 1..=h {
            set_disordered_plane(&mut c, z);
        }
        c
    }

    /// Box whose disordered-type sites are given by `is_d`; every other free
    /// site holds the ordered value 0. Plane 0 keeps the boundary tiling.
    pub(crate) fn sites_config(n: usize, l: usize, q: u32, is_d: impl Fn(usize, usize, usize) -> bool) -> SpinConfig {
        let spec = LatticeSpec::new(n, l, q).unwrap();
        let b = build_boundary(&spec, 0).unwrap();
        let mut c = SpinConfig::with_boundary(&b, 0).unwrap();
        for z in 1..=l {
            for y in 0..n {
                for x in 0..n {
                    if is_d(x, y, z) {
                        c.set(x, y, z, disordered_value(x, y, z, q)).unwrap();
                    }
                }
            }
        }
        c
    }

    pub(crate) fn disordered_value(x: usize, y: usize, z: usize, q: u32) -> Spin {
        ((8 * ((x % 2) + 2 * (y % 2)) as u32 + 24 * z as u32 + 4 + 2 * ((x / 2 + y / 2) % 2) as u32) % q) as Spin
    }

    /// Values `8 * ((x%2) + 2 (y%2)) + 24 z + 4` plus a staggered 0/2, all
    /// congruent to 4 or 6 mod 8: pairwise far apart and far from 0 for q = 64.
    pub(crate) fn set_disordered_plane(c: &mut SpinConfig, z: usize) {
        let n = c.spec().n();
        let q = c.spec().q();
        for y in 0..n {
            for x in 0..n {
                c.set(x, y, z, disordered_value(x, y, z, q)).unwrap();
            }
        }
    }

    #[test]
    fn flat_surface_at_bottom() {
        let c = flat_interface(4, 3, 64, 0);
        let i = extract_interface(&c).unwrap();
        assert_eq!(i.surface.len(), 16);
        assert!(i.surface.iter().all(|p| p.is_horizontal() && p.z == 0));
        let d = decompose_surface(c.spec(), &i.surface);
        assert_eq!(d.ceilings.len(), 1);
        assert!(d.walls.is_empty());
        assert_eq!(d.rigid.len(), 16);
        assert_eq!(surface_weight(&i.surface), 0);
        assert_eq!(i.interface_component_count(), 1);
    }

    #[test]
    fn flat_surface_in_the_middle() {
        let c = flat_interface(4, 5, 64, 2);
        let i = extract_interface(&c).unwrap();
        // Layer 2 cubes are frustrated; the disordered layers below are pure.
        assert!(i.surface.iter().all(|p| p.is_horizontal() && p.z == 2));
        assert_eq!(i.surface.len(), 16);
        assert_eq!(i.region(0, 0, 1), Region::Disordered);
        assert_eq!(i.region(0, 0, 4), Region::Ordered);
    }

    #[test]
    fn unit_bump() {
        let mut c = flat_interface(4, 5, 64, 2);
        // Raise the disordered phase by one in column (1, 1): site plane 3
        // becomes disordered over the square of sites around that column.
        for (x, y) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            let v = (8 * ((x % 2) + 2 * (y % 2)) + 24 * 3 + 4) % 64;
            c.set(x, y, 3, v as Spin).unwrap();
        }
        let i = extract_interface(&c).unwrap();
        let d = decompose_surface(c.spec(), &i.surface);
        assert_eq!(i.surface.len(), 16 + 4);
        assert_eq!(surface_weight(&i.surface), 4);
        assert_eq!(d.ceilings.len(), 2);
        assert_eq!(d.walls.len(), 1);
        assert_eq!(d.walls[0].len(), 4);
        assert!(!is_winding(c.spec(), &d.walls[0]));
        assert_eq!(d.rigid.len(), 15);
        assert_eq!(d.heights[4 + 1], Some(3));
        assert_eq!(d.height_mode(), Some(2));
    }

    #[test]
    fn winding_detection() {
        let spec = LatticeSpec::new(4, 3, 64).unwrap();
        let ring: Vec<Plaquette> = (0..4).map(|x| Plaquette::new(x, 0, 1, Orientation::VY)).collect();
        assert!(is_winding(&spec, &ring));
        let square = vec![
            Plaquette::new(1, 1, 1, Orientation::VX),
            Plaquette::new(2, 1, 1, Orientation::VX),
            Plaquette::new(1, 1, 1, Orientation::VY),
            Plaquette::new(1, 2, 1, Orientation::VY),
        ];
        assert!(!is_winding(&spec, &square));
    }

    #[test]
    fn corner_only_cubes_are_separate_components() {
        let spec = LatticeSpec::new(4, 3, 64).unwrap();
        let mut states = vec![CubeState::Ordered; 16 * 4];
        let grid0 = CubeGrid {
            spec,
            states: states.clone(),
        };
        states[grid0.index(0, 0, 1)] = CubeState::Frustrated;
        states[grid0.index(1, 1, 2)] = CubeState::Frustrated;
        let grid = CubeGrid {
            spec,
            states: states.clone(),
        };
        assert_eq!(decompose_components(&grid).len(), 2);
        states[grid0.index(1, 0, 1)] = CubeState::Frustrated;
        let grid = CubeGrid { spec, states };
        assert_eq!(decompose_components(&grid).len(), 1);
    }
}
