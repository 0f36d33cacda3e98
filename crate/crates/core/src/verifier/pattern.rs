//! Single-column defect patterns and their exhaustive enumeration.
//!
//! A pattern is the full column of a defect slab: the stack of defect cubes
//! plus its pure end cubes. In the bulk both end cubes are present; a defect
//! on the bottom of the box has only the top one, and plane 0 is the
//! strongly disordered box boundary.

use std::ops::Range;

use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::column::{ColumnBonds, ALL, H_ENDS};
use crate::defects::DefectClass;
use crate::error::{Error, Result};
use crate::interface::CubeState;

/// Largest stack enumerated exhaustively.
pub const EXHAUSTIVE_CAP: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColumnPattern {
    /// Defect cubes between the end cubes.
    pub stack: usize,
    /// Disordered end cubes; on the box bottom the boundary counts as one.
    pub d: u8,
    pub boundary_attached: bool,
    pub bonds: ColumnBonds,
}

fn check_kind(stack: usize, d: u8, boundary_attached: bool) -> Result<()> {
    if stack == 0 {
        return Err(Error::InvalidParams("a defect stack needs at least one cube".into()));
    }
    match (boundary_attached, d) {
        (false, 0..=2) | (true, 1..=2) => Ok(()),
        _ => Err(Error::InvalidParams(format!(
            "d = {d} is not a valid end type for a {} defect",
            if boundary_attached { "boundary" } else { "bulk" }
        ))),
    }
}

impl ColumnPattern {
    /// End cubes set by `d`, stack bonds all disordered.
    pub fn template(stack: usize, d: u8, boundary_attached: bool) -> Result<Self> {
        check_kind(stack, d, boundary_attached)?;
        let cubes = stack + if boundary_attached { 1 } else { 2 };
        let mut p = Self {
            stack,
            d,
            boundary_attached,
            bonds: ColumnBonds::new(cubes),
        };
        let (bottom, top) = p.end_states();
        let fill = |ordered: bool| if ordered { ALL } else { 0 };
        if let Some(b) = bottom {
            let o = b == CubeState::Ordered;
            p.bonds.horizontal[0] = fill(o);
            p.bonds.horizontal[1] = fill(o);
            p.bonds.vertical[0] = fill(o);
        }
        let o = top == CubeState::Ordered;
        p.bonds.horizontal[cubes - 1] = fill(o);
        p.bonds.horizontal[cubes] = fill(o);
        p.bonds.vertical[cubes - 1] = fill(o);
        Ok(p)
    }

    /// Wrap an explicit column; only the shape is checked.
    pub fn from_bonds(bonds: ColumnBonds, d: u8, boundary_attached: bool) -> Result<Self> {
        let ends = if boundary_attached { 1 } else { 2 };
        if bonds.cubes() <= ends || bonds.horizontal.len() != bonds.cubes() + 1 {
            return Err(Error::InvalidParams(format!(
                "column with {} cubes has no room for a defect stack",
                bonds.cubes()
            )));
        }
        let stack = bonds.cubes() - ends;
        check_kind(stack, d, boundary_attached)?;
        Ok(Self {
            stack,
            d,
            boundary_attached,
            bonds,
        })
    }

    /// Free bits of a stack: per stack cube its vertical mask, then the
    /// plane above it unless that plane belongs to the top end cube.
    pub fn free_bits(stack: usize) -> usize {
        8 * stack - 4
    }

    pub fn from_code(stack: usize, d: u8, boundary_attached: bool, code: u64) -> Result<Self> {
        let mut p = Self::template(stack, d, boundary_attached)?;
        if Self::free_bits(stack) < 64 && code >> Self::free_bits(stack) != 0 {
            return Err(Error::InvalidParams(format!(
                "code {code:#x} has bits beyond the stack"
            )));
        }
        let first = p.first_stack_cube();
        let mut c = code;
        for j in 0..stack {
            p.bonds.vertical[first + j] = (c & 0xF) as u8;
            c >>= 4;
            if j + 1 < stack {
                p.bonds.horizontal[first + j + 1] = (c & 0xF) as u8;
                c >>= 4;
            }
        }
        Ok(p)
    }

    pub fn code(&self) -> u64 {
        let first = self.first_stack_cube();
        let mut c = 0u64;
        let mut shift = 0;
        for j in 0..self.stack {
            c |= (self.bonds.vertical[first + j] as u64) << shift;
            shift += 4;
            if j + 1 < self.stack {
                c |= (self.bonds.horizontal[first + j + 1] as u64) << shift;
                shift += 4;
            }
        }
        c
    }

    /// Stable identifier: kind, `d`, stack height and free bits.
    pub fn key(&self) -> String {
        format!(
            "{}{}-{}-{:0width$x}",
            if self.boundary_attached { 'b' } else { 'k' },
            self.d,
            self.stack,
            self.code(),
            width = Self::free_bits(self.stack).div_ceil(4)
        )
    }

    fn first_stack_cube(&self) -> usize {
        if self.boundary_attached {
            0
        } else {
            1
        }
    }

    pub fn stack_cubes(&self) -> Range<usize> {
        let f = self.first_stack_cube();
        f..f + self.stack
    }

    /// States of the (bottom, top) end cubes; no bottom cube on the box floor.
    pub fn end_states(&self) -> (Option<CubeState>, CubeState) {
        use CubeState::{Disordered as D, Ordered as O};
        match (self.boundary_attached, self.d) {
            (false, 0) => (Some(O), O),
            (false, 1) => (Some(D), O),
            (false, _) => (Some(D), D),
            (true, 1) => (None, O),
            (true, _) => (None, D),
        }
    }

    /// Frustrated cubes in the column.
    pub fn frustrated(&self) -> usize {
        self.stack_cubes()
            .filter(|&k| self.bonds.cube_state(k) == CubeState::Frustrated)
            .count()
    }

    /// Planes strictly between the two boundary planes of the slab.
    pub fn interior_planes(&self) -> usize {
        self.bonds.cubes() - 1
    }

    fn inner_bonds_disordered(&self) -> bool {
        let s = self.stack_cubes();
        let planes = s.start + 1..s.end;
        planes.clone().all(|z| self.bonds.horizontal[z] == 0) && s.clone().all(|k| self.bonds.vertical[k] == 0)
    }

    /// Could some plaquette of this run of cubes belong to the surface?
    /// Surface plaquettes are fully disordered and face a disordered cube, so
    /// the run needs a fully disordered side face or a disordered neighbour
    /// cube (the box floor counts as one).
    fn run_has_surface_candidate(&self, run: Range<usize>) -> bool {
        let b = &self.bonds;
        let below_disordered = if run.start == 0 {
            self.boundary_attached
        } else {
            b.cube_state(run.start - 1) == CubeState::Disordered
        };
        let above_disordered = run.end < b.cubes() && b.cube_state(run.end) == CubeState::Disordered;
        below_disordered || above_disordered || run.clone().any(|k| b.has_disordered_side(k))
    }

    fn frustrated_runs(&self) -> Vec<Range<usize>> {
        let mut runs = Vec::new();
        let mut start = None;
        for k in self.stack_cubes() {
            match (self.bonds.cube_state(k) == CubeState::Frustrated, start) {
                (true, None) => start = Some(k),
                (false, Some(s)) => {
                    runs.push(s..k);
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push(s..self.stack_cubes().end);
        }
        runs
    }

    /// Per-cube shape: first and last stack cubes frustrated, pure stack
    /// cubes only between frustrated ones.
    fn cubes_admissible(&self) -> bool {
        let s = self.stack_cubes();
        let f = |k| self.bonds.cube_state(k) == CubeState::Frustrated;
        f(s.start) && f(s.end - 1) && s.clone().all(|k| f(k) || (f(k - 1) && f(k + 1)))
    }

    /// Admissible defect column: per-cube shape, every frustrated run could
    /// touch the surface (otherwise the defect would split), and some spin
    /// configuration realizes the bonds.
    pub fn is_admissible(&self) -> bool {
        self.cubes_admissible()
            && self
                .frustrated_runs()
                .into_iter()
                .all(|r| self.run_has_surface_candidate(r))
            && self.is_realizable()
    }

    /// Is there a spin assignment, for large `q`, with exactly these ordered
    /// bonds? Ordered bonds need spin distance `<= 1` and disordered ones
    /// `>= 2`; distinct ordered components can sit far apart, except that two
    /// corners of the box floor carry fixed values a quarter turn or more
    /// apart and so may never share a component.
    pub fn is_realizable(&self) -> bool {
        realizable(&self.bonds, self.boundary_attached)
    }

    pub fn class(&self) -> DefectClass {
        if !self.boundary_attached {
            if self.d < 2 && self.inner_bonds_disordered() {
                return DefectClass::Problematic;
            }
            return DefectClass::NonProblematic;
        }
        let b = &self.bonds;
        let all_frustrated = self.frustrated() == self.stack;
        // The blob must be the floor plaquette alone, so no other plaquette
        // of the column may be able to join the surface.
        if self.d == 1
            && self.stack <= 2
            && all_frustrated
            && 4 - b.vertical[0].count_ones() >= 3
            && !self.stack_cubes().any(|k| b.has_disordered_side(k))
        {
            return DefectClass::EProblematic;
        }
        DefectClass::NonProblematic
    }
}

fn realizable(b: &ColumnBonds, floor: bool) -> bool {
    let planes = b.cubes() + 1;
    let site = |z: usize, c: usize| 4 * z + c;
    let n = 4 * planes;
    let mut edges: Vec<(usize, usize, bool)> = Vec::new();
    for z in 0..planes {
        for (i, &(u, v)) in H_ENDS.iter().enumerate() {
            edges.push((site(z, u), site(z, v), b.horizontal[z] >> i & 1 == 1));
        }
        if z + 1 < planes {
            for c in 0..4 {
                edges.push((site(z, c), site(z + 1, c), b.vertical[z] >> c & 1 == 1));
            }
        }
    }
    let mut uf = UnionFind::<usize>::new(n);
    for &(u, v, o) in &edges {
        if o {
            uf.union(u, v);
        }
    }
    if floor && (0..4).any(|a| (a + 1..4).any(|c| uf.equiv(site(0, a), site(0, c)))) {
        return false;
    }
    let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
    for &(u, v, o) in &edges {
        if uf.equiv(u, v) {
            adj[u].push((v, o));
            adj[v].push((u, o));
        }
    }
    let mut done = vec![false; n];
    for root in 0..n {
        if done[root] {
            continue;
        }
        // Breadth-first order along ordered bonds; each later site hangs off
        // an earlier one by an ordered bond.
        let mut order = vec![(root, usize::MAX)];
        done[root] = true;
        let mut i = 0;
        while i < order.len() {
            let u = order[i].0;
            for &(v, o) in &adj[u] {
                if o && !done[v] {
                    done[v] = true;
                    order.push((v, u));
                }
            }
            i += 1;
        }
        if order.len() > 1 && !label_component(&order, &adj) {
            return false;
        }
    }
    true
}

fn label_component(order: &[(usize, usize)], adj: &[Vec<(usize, bool)>]) -> bool {
    let mut label = vec![None::<i32>; adj.len()];
    label[order[0].0] = Some(0);
    fn go(i: usize, order: &[(usize, usize)], adj: &[Vec<(usize, bool)>], label: &mut [Option<i32>]) -> bool {
        if i == order.len() {
            return true;
        }
        let (u, parent) = order[i];
        let base = label[parent].expect("parent labelled first");
        for delta in [0, -1, 1] {
            let x = base + delta;
            let ok = adj[u].iter().all(|&(v, o)| match label[v] {
                Some(y) => {
                    let dist = (x - y).abs();
                    if o {
                        dist <= 1
                    } else {
                        dist >= 2
                    }
                }
                None => true,
            });
            if ok {
                label[u] = Some(x);
                if go(i + 1, order, adj, label) {
                    return true;
                }
                label[u] = None;
            }
        }
        false
    }
    go(1, order, adj, &mut label)
}

/// Every admissible pattern with the given stack height, end type and
/// placement, in a fixed order. Built cube by cube, discarding partial
/// columns as soon as a completed cube breaks the per-cube shape.
pub fn enumerate_patterns(stack: usize, d: u8, boundary_attached: bool) -> Result<Vec<ColumnPattern>> {
    if stack > EXHAUSTIVE_CAP {
        return Err(Error::InvalidParams(format!(
            "exhaustive enumeration is capped at {EXHAUSTIVE_CAP} stack cubes (got {stack}); use sampling"
        )));
    }
    let mut p = ColumnPattern::template(stack, d, boundary_attached)?;
    let mut out = Vec::new();
    extend(&mut p, 0, &mut out);
    Ok(out)
}

fn extend(p: &mut ColumnPattern, j: usize, out: &mut Vec<ColumnPattern>) {
    let k = p.stack_cubes().start + j;
    let last = j + 1 == p.stack;
    for v in 0..16u8 {
        p.bonds.vertical[k] = v;
        let tops: Range<u8> = if last { 0..1 } else { 0..16 };
        for h in tops {
            if !last {
                p.bonds.horizontal[k + 1] = h;
            }
            let state = p.bonds.cube_state(k);
            let frustrated = state == CubeState::Frustrated;
            if !frustrated && (j == 0 || last || p.bonds.cube_state(k - 1) != CubeState::Frustrated) {
                continue;
            }
            if last {
                if p.frustrated_runs().into_iter().all(|r| p.run_has_surface_candidate(r)) && p.is_realizable() {
                    out.push(p.clone());
                }
            } else {
                extend(p, j + 1, out);
            }
        }
    }
    p.bonds.vertical[k] = 0;
    if !last {
        p.bonds.horizontal[k + 1] = 0;
    }
}

/// Reference enumeration: every raw bit assignment, filtered.
pub fn enumerate_unpruned(stack: usize, d: u8, boundary_attached: bool) -> Result<Vec<ColumnPattern>> {
    if stack > EXHAUSTIVE_CAP {
        return Err(Error::InvalidParams(format!(
            "unpruned enumeration is capped at {EXHAUSTIVE_CAP} stack cubes"
        )));
    }
    check_kind(stack, d, boundary_attached)?;
    let mut out = Vec::new();
    for code in 0..1u64 << ColumnPattern::free_bits(stack) {
        let p = ColumnPattern::from_code(stack, d, boundary_attached, code)?;
        if p.is_admissible() {
            out.push(p);
        }
    }
    Ok(out)
}

/// Up to `count` distinct admissible patterns drawn uniformly from the raw
/// bit assignments, for stacks beyond the exhaustive cap.
pub fn sample_patterns(
    stack: usize,
    d: u8,
    boundary_attached: bool,
    count: usize,
    seed: u64,
) -> Result<Vec<ColumnPattern>> {
    check_kind(stack, d, boundary_attached)?;
    let bits = ColumnPattern::free_bits(stack);
    if bits > 64 {
        return Err(Error::InvalidParams(format!(
            "stack of {stack} cubes exceeds the 64-bit pattern code"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let attempts = count.saturating_mul(10_000);
    for _ in 0..attempts {
        if out.len() == count {
            break;
        }
        let raw: u64 = rng.random();
        let code = if bits == 64 { raw } else { raw & ((1u64 << bits) - 1) };
        if !seen.insert(code) {
            continue;
        }
        let p = ColumnPattern::from_code(stack, d, boundary_attached, code)?;
        if p.is_admissible() {
            out.push(p);
        }
    }
    Ok(out)
}

/// Patterns of shard `index` out of `shards` (round-robin by position).
pub fn shard<T: Clone>(items: &[T], index: usize, shards: usize) -> Result<Vec<T>> {
    if shards == 0 || index >= shards {
        return Err(Error::InvalidParams(format!("shard {index}/{shards} is out of range")));
    }
    Ok(items.iter().skip(index).step_by(shards).cloned().collect())
}
