//! Pre-generated object catalog and constraint queries.
//!
//! Generation walks the cross-product of symmetry, connectivity, color
//! pattern and footprint categories. Each pass synthesizes one candidate per
//! live category combination, rotating through the sizes that combination
//! admits, and keeps it when its classification realizes the combination.
//! Passes repeat until the target count is reached.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::morph::{self, Neighborhood};
use crate::object::{
    classify, in_diamond, in_ellipse, ColorCount, ColorPattern, Connectivity, Footprint, GridObject,
    ObjectConstraints, ObjectProperties, ObjectTraits, Symmetry, MAX_OBJECT_DIM,
};
use crate::rng::SeededRng;

pub const CATALOG_FORMAT_VERSION: u32 = 1;

/// Attempts per combination and pass.
const ATTEMPTS: usize = 4;
/// A combination that has failed this many consecutive passes is dropped.
const DEAD_AFTER: usize = 6;
/// Passes without a single new object before giving up.
const STALL_PASSES: usize = 3;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot reach {target} distinct objects with max_dim {max_dim} (got {reached})")]
    TargetUnreachable { target: usize, max_dim: usize, reached: usize },
    #[error("invalid catalog config: {0}")]
    InvalidConfig(String),
    #[error("no catalog object satisfies the constraints")]
    NoMatch,
    #[error("catalog entry {index} does not re-classify to its stored properties")]
    Inconsistent { index: usize },
    #[error("duplicate catalog entry {index}")]
    Duplicate { index: usize },
    #[error("unsupported catalog format version {0}")]
    Version(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogConfig {
    pub max_dim: usize,
    pub target_count: usize,
    pub seed: u64,
}

impl Default for CatalogConfig {
    fn default() -> Self {
        Self {
            max_dim: MAX_OBJECT_DIM,
            target_count: 23_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub object: GridObject,
    pub properties: ObjectProperties,
    pub traits: ObjectTraits,
}

impl CatalogEntry {
    pub fn new(object: GridObject) -> Self {
        Self {
            properties: classify(&object),
            traits: ObjectTraits::of(&object),
            object,
        }
    }

    pub fn satisfies(&self, c: &ObjectConstraints) -> bool {
        c.matches(&self.properties, &self.traits)
    }
}

/// Immutable object table with a by-size index.
#[derive(Clone, Debug)]
pub struct ObjectCatalog {
    config: CatalogConfig,
    entries: Vec<CatalogEntry>,
    by_dims: BTreeMap<(usize, usize), Vec<u32>>,
}

impl ObjectCatalog {
    /// Builds a catalog from entries, checking distinctness.
    pub fn from_entries(config: CatalogConfig, entries: Vec<CatalogEntry>) -> Result<Self, CatalogError> {
        let mut seen = HashSet::with_capacity(entries.len());
        let mut by_dims: BTreeMap<(usize, usize), Vec<u32>> = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            if !seen.insert(&e.object) {
                return Err(CatalogError::Duplicate { index: i });
            }
            by_dims.entry(e.object.dims()).or_default().push(i as u32);
        }
        Ok(Self {
            config,
            entries,
            by_dims,
        })
    }

    pub fn config(&self) -> &CatalogConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> &CatalogEntry {
        &self.entries[index]
    }

    /// Indices of every entry satisfying `c`, in catalog order.
    pub fn matching(&self, c: &ObjectConstraints) -> Vec<usize> {
        let rows = c.rows.map_or((1, usize::MAX), |r| (r.min, r.max));
        let cols = c.cols.map_or((1, usize::MAX), |r| (r.min, r.max));
        let mut out = Vec::new();
        for (&(r, col), idx) in &self.by_dims {
            if r < rows.0 || r > rows.1 || col < cols.0 || col > cols.1 {
                continue;
            }
            out.extend(idx.iter().map(|&i| i as usize).filter(|&i| self.entries[i].satisfies(c)));
        }
        out.sort_unstable();
        out
    }

    /// Uniform draw among the entries satisfying `c`.
    pub fn query(&self, c: &ObjectConstraints, rng: &mut SeededRng) -> Result<&GridObject, CatalogError> {
        let candidates = self.matching(c);
        if candidates.is_empty() {
            return Err(CatalogError::NoMatch);
        }
        Ok(&self.entries[*rng.pick(&candidates)].object)
    }

    /// SHA-256 over the canonical serialization of the entries.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for e in &self.entries {
            for row in e.object.encode_rows() {
                hasher.update(row.as_bytes());
                hasher.update(b"/");
            }
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<(), CatalogError> {
        let file = CatalogFile {
            format_version: CATALOG_FORMAT_VERSION,
            config: self.config,
            objects: self
                .entries
                .iter()
                .map(|e| CatalogRecord {
                    cells: e.object.clone(),
                    properties: e.properties,
                })
                .collect(),
        };
        serde_json::to_writer(w, &file)?;
        Ok(())
    }

    /// Loads a catalog and re-checks every stored property record.
    pub fn read_json<R: Read>(r: R) -> Result<Self, CatalogError> {
        let file: CatalogFile = serde_json::from_reader(r)?;
        if file.format_version != CATALOG_FORMAT_VERSION {
            return Err(CatalogError::Version(file.format_version));
        }
        let mut entries = Vec::with_capacity(file.objects.len());
        for (index, rec) in file.objects.into_iter().enumerate() {
            let entry = CatalogEntry::new(rec.cells);
            if entry.properties != rec.properties {
                return Err(CatalogError::Inconsistent { index });
            }
            entries.push(entry);
        }
        Self::from_entries(file.config, entries)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), CatalogError> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_json(f)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CatalogError> {
        Self::read_json(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    format_version: u32,
    config: CatalogConfig,
    objects: Vec<CatalogRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogRecord {
    cells: GridObject,
    properties: ObjectProperties,
}

/// One point of the category cross-product. `symmetry: None` asks for an
/// asymmetric object.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Combination {
    pub symmetry: Option<Symmetry>,
    pub connectivity: Connectivity,
    pub color_pattern: ColorPattern,
    pub footprint: Footprint,
}

impl Combination {
    pub fn color_count(&self) -> ColorCount {
        if self.color_pattern == ColorPattern::Uniform {
            ColorCount::Single
        } else {
            ColorCount::Multi
        }
    }

    /// Whether `p` realizes this combination.
    pub fn realized_by(&self, p: &ObjectProperties) -> bool {
        let sym_ok = match self.symmetry {
            None => p.symmetries.is_empty(),
            Some(s) => p.symmetries.contains(s),
        };
        sym_ok
            && p.connectivity == self.connectivity
            && p.color_pattern == self.color_pattern
            && p.footprint == self.footprint
    }

    /// Sizes for which this combination is not ruled out up front.
    fn admits(&self, rows: usize, cols: usize) -> bool {
        use ColorPattern::*;
        use Footprint::*;
        let square = rows == cols;
        let area = rows * cols;
        let shape_ok = match self.footprint {
            Square | Disk => square,
            Rectangle | Ellipse => !square,
            Diamond => rows >= 3 || cols >= 3,
            Freeform => area >= 3,
        };
        let sym_ok = match self.symmetry {
            Some(Symmetry::DiagonalMain | Symmetry::DiagonalAnti) => square,
            _ => true,
        };
        let conn_ok = match self.connectivity {
            Connectivity::Four => true,
            Connectivity::Eight => self.footprint == Freeform && rows >= 2 && cols >= 2,
            Connectivity::Distance => self.footprint == Freeform && (rows >= 3 || cols >= 3),
        };
        let pattern_ok = match self.color_pattern {
            Uniform => true,
            TopBottom => rows >= 2,
            LeftRight => cols >= 2,
            RowStripes => rows >= 3,
            ColumnStripes => cols >= 3,
            DiagonalStripes => rows >= 2 && cols >= 2,
            Random => area >= 2,
        };
        shape_ok && sym_ok && conn_ok && pattern_ok
    }

    /// Every combination of the category cross-product, in a fixed order.
    pub fn all() -> Vec<Combination> {
        let symmetries = std::iter::once(None).chain(Symmetry::ALL.into_iter().map(Some));
        let mut out = Vec::new();
        for symmetry in symmetries {
            for connectivity in Connectivity::ALL {
                for color_pattern in ColorPattern::ALL {
                    for footprint in Footprint::ALL {
                        out.push(Combination {
                            symmetry,
                            connectivity,
                            color_pattern,
                            footprint,
                        });
                    }
                }
            }
        }
        out
    }
}

struct Slot {
    combo: Combination,
    sizes: Vec<(usize, usize)>,
    failures: usize,
}

/// Synthesizes a catalog of at least `config.target_count` distinct objects.
pub fn generate_catalog(config: &CatalogConfig) -> Result<ObjectCatalog, CatalogError> {
    if config.max_dim == 0 || config.max_dim > MAX_OBJECT_DIM {
        return Err(CatalogError::InvalidConfig(format!(
            "max_dim {} outside 1..={MAX_OBJECT_DIM}",
            config.max_dim
        )));
    }
    if config.target_count == 0 {
        return Err(CatalogError::InvalidConfig("target_count must be at least 1".into()));
    }
    let mut rng = SeededRng::new(config.seed);
    let mut slots: Vec<Slot> = Combination::all()
        .into_iter()
        .filter_map(|combo| {
            let mut sizes: Vec<(usize, usize)> = (1..=config.max_dim)
                .flat_map(|r| (1..=config.max_dim).map(move |c| (r, c)))
                .filter(|&(r, c)| combo.admits(r, c))
                .collect();
            (!sizes.is_empty()).then(|| {
                rng.shuffle(&mut sizes);
                Slot {
                    combo,
                    sizes,
                    failures: 0,
                }
            })
        })
        .collect();
    rng.shuffle(&mut slots);

    let mut seen: HashSet<GridObject> = HashSet::new();
    let mut entries: Vec<CatalogEntry> = Vec::new();
    let mut stalled = 0;
    let mut pass = 0usize;
    while entries.len() < config.target_count {
        let before = entries.len();
        for slot in slots.iter_mut().filter(|s| s.failures < DEAD_AFTER) {
            if entries.len() >= config.target_count {
                break;
            }
            let (rows, cols) = slot.sizes[pass % slot.sizes.len()];
            let mut added = false;
            for _ in 0..ATTEMPTS {
                let Some(candidate) = synthesize(&slot.combo, rows, cols, &mut rng) else {
                    continue;
                };
                let entry = CatalogEntry::new(candidate);
                if slot.combo.realized_by(&entry.properties) && !seen.contains(&entry.object) {
                    seen.insert(entry.object.clone());
                    entries.push(entry);
                    added = true;
                    break;
                }
            }
            slot.failures = if added { 0 } else { slot.failures + 1 };
        }
        if entries.len() == before {
            stalled += 1;
            if stalled >= STALL_PASSES || slots.iter().all(|s| s.failures >= DEAD_AFTER) {
                return Err(CatalogError::TargetUnreachable {
                    target: config.target_count,
                    max_dim: config.max_dim,
                    reached: entries.len(),
                });
            }
        } else {
            stalled = 0;
        }
        pass += 1;
    }
    ObjectCatalog::from_entries(*config, entries)
}

/// One random object aimed at `combo` with a `rows x cols` bounding box.
/// The result may miss the target; callers classify and filter.
pub fn synthesize(combo: &Combination, rows: usize, cols: usize, rng: &mut SeededRng) -> Option<GridObject> {
    let mut mask = shape_mask(combo, rows, cols, rng);
    if !mask.contains(&true) {
        return None;
    }
    let mut colors = paint(combo.color_pattern, rows, cols, rng);
    if let Some(s) = combo.symmetry {
        symmetrize(&mut mask, &mut colors, rows, cols, s);
    }
    let dense: Vec<u8> = mask
        .iter()
        .zip(&colors)
        .map(|(&m, &c)| if m { c } else { 0 })
        .collect();
    let rows_vec: Vec<&[u8]> = dense.chunks(cols).collect();
    GridObject::from_rows(&rows_vec).ok()
}

fn shape_mask(combo: &Combination, rows: usize, cols: usize, rng: &mut SeededRng) -> Vec<bool> {
    let analytic = |f: fn(usize, usize, usize, usize) -> bool| -> Vec<bool> {
        (0..rows * cols).map(|i| f(i / cols, i % cols, rows, cols)).collect()
    };
    match combo.footprint {
        Footprint::Rectangle | Footprint::Square => vec![true; rows * cols],
        Footprint::Disk | Footprint::Ellipse => analytic(in_ellipse),
        Footprint::Diamond => analytic(in_diamond),
        Footprint::Freeform => match combo.connectivity {
            Connectivity::Four => match rng.below(3) {
                0 => grow_blob(rows, cols, Neighborhood::Four, rng),
                1 => dense_component(rows, cols, rng),
                _ => hollowed(rows, cols, rng),
            },
            Connectivity::Eight => {
                if rng.chance(1, 3) {
                    hollowed(rows, cols, rng)
                } else {
                    grow_blob(rows, cols, Neighborhood::Eight, rng)
                }
            }
            Connectivity::Distance => clusters(rows, cols, rng),
        },
    }
}

/// Random growth from one seed until every side of the box is touched and a
/// random fill fraction is reached. Eight-neighborhood growth favors
/// diagonal-only steps.
fn grow_blob(rows: usize, cols: usize, nb: Neighborhood, rng: &mut SeededRng) -> Vec<bool> {
    let mut mask = vec![false; rows * cols];
    let start = rng.below(rows * cols);
    mask[start] = true;
    let fill_target = (rows * cols * (30 + rng.below(50)) / 100).max(1);
    let mut count = 1;
    let touches_all = |m: &[bool]| {
        (0..cols).any(|c| m[c])
            && (0..cols).any(|c| m[(rows - 1) * cols + c])
            && (0..rows).any(|r| m[r * cols])
            && (0..rows).any(|r| m[r * cols + cols - 1])
    };
    while count < rows * cols && (count < fill_target || !touches_all(&mask)) {
        let mut frontier = Vec::new();
        let mut diagonal_only = Vec::new();
        for i in 0..rows * cols {
            if mask[i] {
                continue;
            }
            let (r, c) = ((i / cols) as i32, (i % cols) as i32);
            let set = |dr: i32, dc: i32| {
                let (nr, nc) = (r + dr, c + dc);
                nr >= 0 && nc >= 0 && nr < rows as i32 && nc < cols as i32 && mask[nr as usize * cols + nc as usize]
            };
            let edge = set(-1, 0) || set(1, 0) || set(0, -1) || set(0, 1);
            let corner = set(-1, -1) || set(-1, 1) || set(1, -1) || set(1, 1);
            if edge {
                frontier.push(i);
            } else if corner && nb == Neighborhood::Eight {
                diagonal_only.push(i);
            }
        }
        let pool = if !diagonal_only.is_empty() && (frontier.is_empty() || rng.chance(2, 3)) {
            &diagonal_only
        } else {
            &frontier
        };
        if pool.is_empty() {
            break;
        }
        mask[*rng.pick(pool)] = true;
        count += 1;
    }
    mask
}

/// Random occupancy at a random density, reduced to its largest 4-component.
fn dense_component(rows: usize, cols: usize, rng: &mut SeededRng) -> Vec<bool> {
    let density = 55 + rng.below(40) as u32;
    let mask: Vec<bool> = (0..rows * cols).map(|_| rng.chance(density, 100)).collect();
    let (labels, n) = morph::label(&mask, rows, cols, Neighborhood::Four);
    if n == 0 {
        return mask;
    }
    let mut sizes = vec![0usize; n];
    for &l in labels.iter().filter(|&&l| l != u32::MAX) {
        sizes[l as usize] += 1;
    }
    let best = (0..n).max_by_key(|&i| (sizes[i], std::cmp::Reverse(i))).unwrap() as u32;
    labels.iter().map(|&l| l == best).collect()
}

/// An analytic silhouette with some or all of its interior removed.
fn hollowed(rows: usize, cols: usize, rng: &mut SeededRng) -> Vec<bool> {
    let base: fn(usize, usize, usize, usize) -> bool = match rng.below(3) {
        0 => |_, _, _, _| true,
        1 => in_ellipse,
        _ => in_diamond,
    };
    let mut mask: Vec<bool> = (0..rows * cols).map(|i| base(i / cols, i % cols, rows, cols)).collect();
    let original = mask.clone();
    let keep_some = rng.chance(1, 2);
    for r in 1..rows.saturating_sub(1) {
        for c in 1..cols.saturating_sub(1) {
            let inner = original[r * cols + c]
                && original[(r - 1) * cols + c]
                && original[(r + 1) * cols + c]
                && original[r * cols + c - 1]
                && original[r * cols + c + 1];
            if inner && !(keep_some && rng.chance(1, 3)) {
                mask[r * cols + c] = false;
            }
        }
    }
    mask
}

/// Two or three 4-connected clusters that never touch, not even diagonally.
fn clusters(rows: usize, cols: usize, rng: &mut SeededRng) -> Vec<bool> {
    let mut owner = vec![0u8; rows * cols];
    let k = 2 + rng.below(2);
    let free_for = |owner: &[u8], i: usize, id: u8| -> bool {
        if owner[i] != 0 {
            return false;
        }
        let (r, c) = ((i / cols) as i32, (i % cols) as i32);
        for dr in -1..=1 {
            for dc in -1..=1 {
                let (nr, nc) = (r + dr, c + dc);
                if nr >= 0 && nc >= 0 && nr < rows as i32 && nc < cols as i32 {
                    let o = owner[nr as usize * cols + nc as usize];
                    if o != 0 && o != id {
                        return false;
                    }
                }
            }
        }
        true
    };
    for id in 1..=k as u8 {
        let seeds: Vec<usize> = (0..rows * cols).filter(|&i| free_for(&owner, i, id)).collect();
        if seeds.is_empty() {
            break;
        }
        let mut members = vec![*rng.pick(&seeds)];
        owner[members[0]] = id;
        let size = 1 + rng.below((rows * cols / (2 * k)).max(1));
        while members.len() < size {
            let mut frontier = Vec::new();
            for &m in &members {
                let (r, c) = (m / cols, m % cols);
                let mut push = |nr: usize, nc: usize| {
                    let j = nr * cols + nc;
                    if free_for(&owner, j, id) {
                        frontier.push(j);
                    }
                };
                if r > 0 {
                    push(r - 1, c);
                }
                if r + 1 < rows {
                    push(r + 1, c);
                }
                if c > 0 {
                    push(r, c - 1);
                }
                if c + 1 < cols {
                    push(r, c + 1);
                }
            }
            if frontier.is_empty() {
                break;
            }
            let next = *rng.pick(&frontier);
            owner[next] = id;
            members.push(next);
        }
    }
    owner.iter().map(|&o| o != 0).collect()
}

fn distinct_colors(n: usize, rng: &mut SeededRng) -> Vec<u8> {
    let mut palette: Vec<u8> = (1..=9).collect();
    rng.shuffle(&mut palette);
    palette.truncate(n);
    palette
}

/// Color for every position of the box under `pattern`.
fn paint(pattern: ColorPattern, rows: usize, cols: usize, rng: &mut SeededRng) -> Vec<u8> {
    use ColorPattern::*;
    let stripes = 2 + rng.below(2);
    let palette = distinct_colors(if pattern == Random { 2 + rng.below(3) } else { stripes }, rng);
    let width = 1 + rng.below(2);
    (0..rows * cols)
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            match pattern {
                Uniform => palette[0],
                TopBottom => palette[usize::from(r >= rows.div_ceil(2))],
                LeftRight => palette[usize::from(c >= cols.div_ceil(2))],
                RowStripes => palette[(r / width) % palette.len()],
                ColumnStripes => palette[(c / width) % palette.len()],
                DiagonalStripes => palette[(r + c) % palette.len()],
                Random => *rng.pick(&palette),
            }
        })
        .collect()
}

/// Makes mask and colors invariant under `s`; each orbit takes the state of
/// its first cell in row-major order, occupancy is the union.
fn symmetrize(mask: &mut [bool], colors: &mut [u8], rows: usize, cols: usize, s: Symmetry) {
    for r in 0..rows {
        for c in 0..cols {
            let (mr, mc) = s.map(r, c, rows, cols);
            let (i, j) = (r * cols + c, mr * cols + mc);
            if j <= i {
                continue;
            }
            let occupied = mask[i] || mask[j];
            mask[i] = occupied;
            mask[j] = occupied;
            colors[j] = colors[i];
        }
    }
}
