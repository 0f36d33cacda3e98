//! Per-column structure of the separating surface: blobs and their signs,
//! extended defects, their classification and pairing, and the
//! rotate-and-reflect gluing map on a pair of defects.

use std::collections::{BTreeMap, HashSet};

use crate::column::{ColumnBonds, ALL};
use crate::error::{Error, Result};
use crate::interface::{edge_components, CubeState, Interface, Orientation, Plaquette, Region};
use crate::lattice::{classify_bonds, dist, signed_step, BondField, Spin, SpinConfig};

/// Surface plaquettes grouped by column `(x, y)`.
#[derive(Clone, Debug, Default)]
pub struct ColumnAssignment {
    pub columns: BTreeMap<(usize, usize), Vec<Plaquette>>,
    /// Vertical plaquettes whose non-interface side was not a pure
    /// disordered cube; they go to the interface side anyway.
    pub flagged: usize,
}

/// Horizontal plaquettes go to their own column, vertical ones to the column
/// of the adjacent interface cube.
pub fn assign_to_columns(interface: &Interface) -> ColumnAssignment {
    let spec = *interface.spec();
    let mut out = ColumnAssignment::default();
    for &p in &interface.surface {
        let column = if p.is_horizontal() {
            (p.x, p.y)
        } else {
            let (a, b) = p.cubes(&spec);
            let (a, b) = (a.expect("side cube"), b.expect("side cube"));
            let (inner, outer) = if interface.region(a.0, a.1, a.2) == Region::Interface {
                (a, b)
            } else {
                (b, a)
            };
            let outer_ok = interface.region(outer.0, outer.1, outer.2) == Region::Disordered
                && interface.grid.state(outer.0, outer.1, outer.2) == CubeState::Disordered;
            if !outer_ok || interface.region(inner.0, inner.1, inner.2) != Region::Interface {
                out.flagged += 1;
            }
            (inner.0, inner.1)
        };
        out.columns.entry(column).or_default().push(p);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlobKind {
    /// Starts with a horizontal plaquette above the disordered phase.
    Lower,
    /// Ends with a horizontal plaquette below the disordered phase.
    Upper,
    /// Both of the above.
    Both,
    /// Vertical plaquettes only.
    Vertical,
}

impl BlobKind {
    pub fn sign(self) -> i8 {
        match self {
            BlobKind::Lower => -1,
            BlobKind::Upper => 1,
            BlobKind::Both | BlobKind::Vertical => 0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BlobKind::Lower => "h-",
            BlobKind::Upper => "h+",
            BlobKind::Both => "h-+",
            BlobKind::Vertical => "v",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Blob {
    pub plaquettes: Vec<Plaquette>,
    pub kind: BlobKind,
}

impl Blob {
    pub fn sign(&self) -> i8 {
        self.kind.sign()
    }

    pub fn lowest_z(&self) -> usize {
        self.plaquettes.iter().map(|p| p.z).min().unwrap_or(0)
    }

    /// Position along the column: twice the height of the lowest horizontal
    /// plaquette, or for vertical blobs twice the top cube layer plus one,
    /// which places them inside the interface stretch they line.
    pub fn level(&self) -> usize {
        match self.plaquettes.iter().filter(|p| p.is_horizontal()).map(|p| p.z).min() {
            Some(z) => 2 * z,
            None => 2 * self.plaquettes.iter().map(|p| p.z).max().unwrap_or(0) + 1,
        }
    }
}

/// Which side of a horizontal surface plaquette holds the disordered phase.
fn disordered_below(interface: &Interface, p: &Plaquette) -> Result<bool> {
    let spec = interface.spec();
    let (below, above) = p.cubes(spec);
    let is_d = |c: Option<(usize, usize, usize)>, virtual_d: bool| match c {
        None => virtual_d,
        Some((x, y, z)) => interface.region(x, y, z) == Region::Disordered,
    };
    match (is_d(below, p.z == 0), is_d(above, false)) {
        (true, false) => Ok(true),
        (false, true) => Ok(false),
        _ => Err(Error::Structural(format!(
            "surface plaquette {p:?} is not between phases"
        ))),
    }
}

/// Split a column's plaquettes into edge-connected blobs, ordered upwards,
/// and check the sign grammar.
pub fn blobs_and_signs(interface: &Interface, x: usize, y: usize, plaquettes: &[Plaquette]) -> Result<Vec<Blob>> {
    let mut blobs = Vec::new();
    for comp in edge_components(interface.spec(), plaquettes) {
        let mut lower = 0;
        let mut upper = 0;
        for p in comp.iter().filter(|p| p.is_horizontal()) {
            if disordered_below(interface, p)? {
                lower += 1;
            } else {
                upper += 1;
            }
        }
        let kind = match (lower, upper) {
            (0, 0) => BlobKind::Vertical,
            (1, 0) => BlobKind::Lower,
            (0, 1) => BlobKind::Upper,
            (1, 1) => BlobKind::Both,
            _ => {
                return Err(Error::Grammar {
                    x,
                    y,
                    rule: format!("blob with {lower} lower and {upper} upper horizontal plaquettes"),
                })
            }
        };
        blobs.push(Blob { plaquettes: comp, kind });
    }
    blobs.sort_by_key(|b| (b.level(), b.plaquettes[0]));
    validate_grammar(&blobs, x, y)?;
    Ok(blobs)
}

pub fn validate_grammar(blobs: &[Blob], x: usize, y: usize) -> Result<()> {
    let fail = |rule: &str| {
        Err(Error::Grammar {
            x,
            y,
            rule: rule.into(),
        })
    };
    let signs: Vec<i8> = blobs.iter().map(Blob::sign).filter(|&s| s != 0).collect();
    if signs.is_empty() {
        return fail("no signed blob");
    }
    if signs.windows(2).any(|w| w[0] == w[1]) {
        return fail("signs do not alternate");
    }
    if signs[0] != -1 || signs[signs.len() - 1] != -1 {
        return fail("first and last signs must be -");
    }
    // Horizontal transitions of the column, bottom to top, with their sign.
    // An h-+ blob contributes its lowest plaquette as - and its highest as +.
    let mut transitions: Vec<(usize, i8)> = Vec::new();
    for b in blobs {
        let zs: Vec<usize> = b.plaquettes.iter().filter(|p| p.is_horizontal()).map(|p| p.z).collect();
        match b.kind {
            BlobKind::Lower => transitions.push((zs[0], -1)),
            BlobKind::Upper => transitions.push((zs[0], 1)),
            BlobKind::Both => {
                transitions.push((*zs.iter().min().unwrap(), -1));
                transitions.push((*zs.iter().max().unwrap(), 1));
            }
            BlobKind::Vertical => {}
        }
    }
    transitions.sort();
    for b in blobs.iter().filter(|b| b.kind == BlobKind::Vertical) {
        let top = b.plaquettes.iter().map(|p| p.z).max().unwrap_or(0);
        if let Some(&(_, sign)) = transitions.iter().find(|&&(z, _)| z > top) {
            if sign != 1 {
                return fail("first signed transition above a v blob must be h+");
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EndKind {
    Ordered,
    Disordered,
    /// The defect reaches the bottom plane of the box.
    BottomBoundary,
    /// The defect reaches the top plane of the box.
    TopBoundary,
}

impl EndKind {
    fn pure(state: CubeState) -> Self {
        match state {
            CubeState::Ordered => EndKind::Ordered,
            CubeState::Disordered => EndKind::Disordered,
            CubeState::Frustrated => unreachable!("end cubes are pure"),
        }
    }

    pub fn is_pure(self) -> bool {
        matches!(self, EndKind::Ordered | EndKind::Disordered)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DefectClass {
    Problematic,
    EProblematic,
    NonProblematic,
}

/// Spin differences around an ordered plaquette, each in `{-1, 0, 1}`.
pub type PlaquetteType = [i8; 4];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectRecord {
    pub x: usize,
    pub y: usize,
    /// Lowest and highest cube layers, pure end cubes included.
    pub lo: usize,
    pub hi: usize,
    pub bottom_end: EndKind,
    pub top_end: EndKind,
    /// Frozen bond states of cube layers `lo..=hi`.
    pub bonds: ColumnBonds,
    pub sign: i8,
    /// The blob signs summed outside `{-1, 0, 1}` and were clamped.
    pub sign_clamped: bool,
    pub blob_count: usize,
    pub blob_plaquettes: usize,
    /// The defect's only blob is the bottom plaquette of the box.
    pub single_bottom_blob: bool,
    pub class: DefectClass,
    pub bottom_type: Option<PlaquetteType>,
    pub top_type: Option<PlaquetteType>,
}

impl DefectRecord {
    pub fn cube_count(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn pure_count(&self) -> usize {
        (0..self.bonds.cubes())
            .filter(|&k| self.bonds.cube_state(k) != CubeState::Frustrated)
            .count()
    }

    pub fn frustrated_count(&self) -> usize {
        self.cube_count() - self.pure_count()
    }

    /// Planes `(bottom, top)` bounding the defect.
    pub fn planes(&self) -> (usize, usize) {
        (self.lo, self.hi + 1)
    }
}

/// Frustrated interface cubes of the column touching a surface plaquette,
/// grouped into vertical runs and extended to pure end cubes; overlapping
/// extensions are merged.
pub fn extract_and_extend_defects(
    interface: &Interface,
    bonds: &BondField,
    x: usize,
    y: usize,
    blobs: &[Blob],
) -> Vec<DefectRecord> {
    let spec = *interface.spec();
    let grid = &interface.grid;
    let surface: HashSet<Plaquette> = interface.surface.iter().copied().collect();
    let layers = spec.cube_layers();
    let faces = |z: usize| {
        let (xp, yp) = (spec.next(x), spec.next(y));
        [
            Plaquette::new(x, y, z, Orientation::H),
            Plaquette::new(x, y, z + 1, Orientation::H),
            Plaquette::new(x, y, z, Orientation::VX),
            Plaquette::new(xp, y, z, Orientation::VX),
            Plaquette::new(x, y, z, Orientation::VY),
            Plaquette::new(x, yp, z, Orientation::VY),
        ]
    };
    let attached: Vec<usize> = (0..layers)
        .filter(|&z| interface.region(x, y, z) == Region::Interface && faces(z).iter().any(|p| surface.contains(p)))
        .collect();

    // Extend each run of attached cubes through frustrated cubes.
    let mut spans: Vec<(usize, usize, EndKind, EndKind)> = Vec::new();
    let mut i = 0;
    while i < attached.len() {
        let mut j = i;
        while j + 1 < attached.len() && attached[j + 1] == attached[j] + 1 {
            j += 1;
        }
        let (mut lo, mut hi) = (attached[i], attached[j]);
        let bottom = loop {
            if lo == 0 {
                break EndKind::BottomBoundary;
            }
            lo -= 1;
            let s = grid.state(x, y, lo);
            if s != CubeState::Frustrated {
                break EndKind::pure(s);
            }
        };
        let top = loop {
            if hi + 1 == layers {
                break EndKind::TopBoundary;
            }
            hi += 1;
            let s = grid.state(x, y, hi);
            if s != CubeState::Frustrated {
                break EndKind::pure(s);
            }
        };
        match spans.last_mut() {
            Some(last) if last.1 >= lo => {
                last.1 = hi;
                last.3 = top;
            }
            _ => spans.push((lo, hi, bottom, top)),
        }
        i = j + 1;
    }

    let mut records: Vec<DefectRecord> = spans
        .into_iter()
        .map(|(lo, hi, bottom_end, top_end)| DefectRecord {
            x,
            y,
            lo,
            hi,
            bottom_end,
            top_end,
            bonds: ColumnBonds::from_field(bonds, x, y, lo, hi),
            sign: 0,
            sign_clamped: false,
            blob_count: 0,
            blob_plaquettes: 0,
            single_bottom_blob: false,
            class: DefectClass::NonProblematic,
            bottom_type: None,
            top_type: None,
        })
        .collect();

    // Each blob belongs to the defect holding the interface cube of its
    // first plaquette.
    let mut sums = vec![0i32; records.len()];
    for blob in blobs {
        let p = blob.plaquettes[0];
        let z = match p.cubes(&spec) {
            (Some(a), _) if p.is_horizontal() && interface.region(a.0, a.1, a.2) == Region::Interface => a.2,
            (_, Some(b)) if p.is_horizontal() => b.2,
            _ => p.z,
        };
        if let Some(k) = records.iter().position(|r| r.lo <= z && z <= r.hi) {
            sums[k] += blob.sign() as i32;
            records[k].blob_count += 1;
            records[k].blob_plaquettes += blob.plaquettes.len();
            records[k].single_bottom_blob = blob.plaquettes.len() == 1
                && p == Plaquette::new(x, y, 0, Orientation::H)
                && records[k].blob_count == 1;
        }
    }
    for (r, s) in records.iter_mut().zip(sums) {
        r.sign = s.clamp(-1, 1) as i8;
        r.sign_clamped = !(-1..=1).contains(&s);
        if r.blob_count != 1 {
            r.single_bottom_blob = false;
        }
        r.class = classify_defect(r);
    }
    records
}

pub fn classify_defect(r: &DefectRecord) -> DefectClass {
    let b = &r.bonds;
    let n = b.cubes();
    if r.bottom_end.is_pure() && r.top_end.is_pure() {
        if r.bottom_end == EndKind::Disordered && r.top_end == EndKind::Disordered {
            return DefectClass::NonProblematic;
        }
        // Bonds outside the end cubes: planes 2..=n-2 and layers 1..=n-2.
        let inner_planes = if n >= 4 { &b.horizontal[2..=n - 2] } else { &[][..] };
        let inner_layers = if n >= 3 { &b.vertical[1..=n - 2] } else { &[][..] };
        if n >= 3 && inner_planes.iter().chain(inner_layers).all(|&m| m == 0) {
            return DefectClass::Problematic;
        }
        return DefectClass::NonProblematic;
    }
    if r.bottom_end == EndKind::BottomBoundary && r.top_end == EndKind::Ordered {
        let frustrated = n - 1;
        let all_frustrated = (0..n - 1).all(|k| b.cube_state(k) == CubeState::Frustrated);
        let bottom_disordered_verticals = 4 - b.vertical[0].count_ones();
        if all_frustrated
            && (1..=2).contains(&frustrated)
            && bottom_disordered_verticals >= 3
            && r.single_bottom_blob
            && r.sign == -1
        {
            return DefectClass::EProblematic;
        }
    }
    DefectClass::NonProblematic
}

/// One side of a defect pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Member {
    Signed(usize),
    Neutral(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pairing {
    pub pairs: Vec<(Member, Member)>,
    pub unpaired: Option<usize>,
}

/// Pair signed defects outside-in and neutral ones consecutively; an odd
/// neutral defect is paired with the middle signed one.
pub fn pair_defects(signs: &[i8], neutral: usize) -> Result<Pairing> {
    if signs.len().is_multiple_of(2) {
        return Err(Error::Pairing(format!("signed list has even length {}", signs.len())));
    }
    if signs[0] != -1 || signs.windows(2).any(|w| w[0] != -w[1] || w[0] == 0) {
        return Err(Error::Pairing("signs must alternate starting with -".into()));
    }
    let k = signs.len().div_ceil(2);
    let mut pairs: Vec<(Member, Member)> = (0..k - 1)
        .map(|i| (Member::Signed(i), Member::Signed(signs.len() - 1 - i)))
        .collect();
    for j in (0..neutral / 2 * 2).step_by(2) {
        pairs.push((Member::Neutral(j), Member::Neutral(j + 1)));
    }
    let unpaired = if neutral % 2 == 1 {
        pairs.push((Member::Neutral(neutral - 1), Member::Signed(k - 1)));
        None
    } else {
        Some(k - 1)
    };
    Ok(Pairing { pairs, unpaired })
}

/// Everything the per-column analysis produces.
#[derive(Clone, Debug)]
pub struct ColumnDefects {
    pub x: usize,
    pub y: usize,
    pub blobs: Vec<Blob>,
    pub defects: Vec<DefectRecord>,
    pub pairing: Option<Pairing>,
    pub problematic_pairs: usize,
}

impl ColumnDefects {
    pub fn signed(&self) -> Vec<usize> {
        (0..self.defects.len()).filter(|&i| self.defects[i].sign != 0).collect()
    }

    pub fn neutral(&self) -> Vec<usize> {
        (0..self.defects.len()).filter(|&i| self.defects[i].sign == 0).collect()
    }

    /// Defect index behind a pairing member.
    pub fn resolve(&self, m: Member) -> usize {
        match m {
            Member::Signed(i) => self.signed()[i],
            Member::Neutral(j) => self.neutral()[j],
        }
    }

    pub fn blob_types(&self) -> String {
        self.blobs.iter().map(|b| b.kind.symbol()).collect::<Vec<_>>().join(" ")
    }
}

#[derive(Clone, Debug)]
pub struct DefectAnalysis {
    pub columns: Vec<ColumnDefects>,
    pub flagged_assignments: usize,
}

pub fn analyze_defects(config: &SpinConfig, interface: &Interface) -> Result<DefectAnalysis> {
    let bonds = classify_bonds(config);
    let assignment = assign_to_columns(interface);
    let mut columns = Vec::new();
    for (&(x, y), plaquettes) in &assignment.columns {
        let blobs = blobs_and_signs(interface, x, y, plaquettes)?;
        let defects = extract_and_extend_defects(interface, &bonds, x, y, &blobs);
        let mut col = ColumnDefects {
            x,
            y,
            blobs,
            defects,
            pairing: None,
            problematic_pairs: 0,
        };
        let signs: Vec<i8> = col.signed().iter().map(|&i| col.defects[i].sign).collect();
        if let Ok(p) = pair_defects(&signs, col.neutral().len()) {
            col.problematic_pairs = p
                .pairs
                .iter()
                .filter(|(a, b)| {
                    [*a, *b]
                        .iter()
                        .all(|&m| col.defects[col.resolve(m)].class != DefectClass::NonProblematic)
                })
                .count();
            col.pairing = Some(p);
        }
        columns.push(col);
    }
    Ok(DefectAnalysis {
        columns,
        flagged_assignments: assignment.flagged,
    })
}

/// The first of the four values within distance one of all of them.
pub fn dominant_value(spins: [Spin; 4], q: u32) -> Option<Spin> {
    spins
        .iter()
        .copied()
        .find(|&s| spins.iter().all(|&t| dist(s, t, q) <= 1))
}

/// Spins of the plaquette of column `(x, y)` in plane `z`, in corner order.
fn plaquette_spins(config: &SpinConfig, x: usize, y: usize, z: usize) -> [Spin; 4] {
    let s = config.spec();
    let (x1, y1) = (s.next(x), s.next(y));
    [
        config.get(x, y, z),
        config.get(x1, y, z),
        config.get(x, y1, z),
        config.get(x1, y1, z),
    ]
}

/// Type of an ordered plaquette: steps around the cycle of its corners.
pub fn plaquette_type(config: &SpinConfig, x: usize, y: usize, z: usize) -> Option<PlaquetteType> {
    let c = plaquette_spins(config, x, y, z);
    let q = config.spec().q();
    let cycle = [c[0], c[1], c[3], c[2]];
    let mut t = [0i8; 4];
    for i in 0..4 {
        t[i] = -signed_step(cycle[i], cycle[(i + 1) % 4], q)?;
    }
    Some(t)
}

pub fn attach_plaquette_types(config: &SpinConfig, record: &mut DefectRecord) {
    let (bottom, top) = record.planes();
    if record.bonds.horizontal[0] == ALL {
        record.bottom_type = plaquette_type(config, record.x, record.y, bottom);
    }
    if record.bonds.horizontal[record.bonds.cubes()] == ALL {
        record.top_type = plaquette_type(config, record.x, record.y, top);
    }
}

/// Where the gluing map acts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GlueGeometry {
    /// Column whose plaquettes fix the dominant values.
    pub x: usize,
    pub y: usize,
    /// Slab of planes `lo..=hi` that is rotated and reflected onto itself.
    pub lo: usize,
    pub hi: usize,
    /// Top plane of the lower defect (inside the slab).
    pub lower_top: usize,
    /// Top plane of the upper defect (above the slab).
    pub upper_top: usize,
}

impl GlueGeometry {
    /// Two bulk defects with bottom planes `a_lower < a_upper`, each three
    /// cubes tall.
    pub fn bulk(x: usize, y: usize, a_lower: usize, a_upper: usize) -> Self {
        Self {
            x,
            y,
            lo: a_lower + 2,
            hi: a_upper,
            lower_top: a_lower + 3,
            upper_top: a_upper + 3,
        }
    }

    /// A bottom-attached lower defect whose top plane is `lower_top`; the
    /// slab starts at the first free plane.
    pub fn from_bottom(x: usize, y: usize, lower_top: usize, a_upper: usize) -> Self {
        Self {
            x,
            y,
            lo: 1,
            hi: a_upper,
            lower_top,
            upper_top: a_upper + 3,
        }
    }

    #[inline]
    pub fn reflect(&self, z: usize) -> usize {
        self.lo + self.hi - z
    }

    fn validate(&self, config: &SpinConfig) -> Result<()> {
        let l = config.spec().l();
        if self.lo < 1 || self.hi > l || self.lo > self.hi {
            return Err(Error::Structural(format!(
                "slab {}..={} outside the free planes 1..={l}",
                self.lo, self.hi
            )));
        }
        if !(self.lo..=self.hi).contains(&self.lower_top) || self.upper_top <= self.hi || self.upper_top > l + 1 {
            return Err(Error::Structural("defect top planes inconsistent with the slab".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlueOutcome {
    pub config: SpinConfig,
    /// Rotation added to every slab spin.
    pub rotation: u32,
    /// `H(before) - H(after)`.
    pub energy_delta: i64,
}

fn dominant_at(config: &SpinConfig, x: usize, y: usize, z: usize) -> Result<Spin> {
    dominant_value(plaquette_spins(config, x, y, z), config.spec().q())
        .ok_or_else(|| Error::Structural(format!("plaquette at ({x}, {y}, {z}) is not ordered")))
}

fn transform_slab(config: &SpinConfig, g: &GlueGeometry, rotation: u32, rotate_first: bool) -> SpinConfig {
    let spec = *config.spec();
    let q = spec.q();
    let p = spec.plane_size();
    let mut out = config.clone();
    let src = config.spins();
    let dst = out.spins_mut();
    for z in g.lo..=g.hi {
        let from = if rotate_first { z } else { g.reflect(z) };
        let to = if rotate_first { g.reflect(z) } else { z };
        for i in 0..p {
            let v = src[from * p + i] as u32;
            dst[to * p + i] = ((v + rotation) % q) as Spin;
        }
    }
    out
}

/// Rotate the slab so the lower defect's top plaquette shares the dominant
/// value of the upper one, then reflect the slab onto itself.
pub fn glue_pair(config: &SpinConfig, g: &GlueGeometry) -> Result<GlueOutcome> {
    g.validate(config)?;
    let q = config.spec().q();
    let s_lower = dominant_at(config, g.x, g.y, g.lower_top)? as u32;
    let s_upper = dominant_at(config, g.x, g.y, g.upper_top)? as u32;
    let rotation = (s_upper + q - s_lower) % q;
    let glued = transform_slab(config, g, rotation, true);
    let energy_delta = config.total_energy() - glued.total_energy();
    Ok(GlueOutcome {
        config: glued,
        rotation,
        energy_delta,
    })
}

/// Inverse of [`glue_pair`]: reflect back, then undo the rotation.
pub fn unglue(config: &SpinConfig, g: &GlueGeometry, rotation: u32) -> Result<SpinConfig> {
    g.validate(config)?;
    let q = config.spec().q();
    Ok(transform_slab(config, g, (q - rotation % q) % q, false))
}
