//! Objects, their property taxonomy, and applicability constraints.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::morph::{self, Neighborhood};

/// Largest object side produced by catalog generation.
pub const MAX_OBJECT_DIM: usize = 15;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ObjectError {
    #[error("object has no cells")]
    Empty,
    #[error("duplicate cell at ({0}, {1})")]
    DuplicateCell(i32, i32),
    #[error("object color {0} outside 1..=9")]
    ColorOutOfRange(u8),
    #[error("object rows have unequal lengths")]
    Ragged,
    #[error("bad object row encoding: {0}")]
    Encoding(String),
}

/// A set of colored cells, stored densely over its tight bounding box.
///
/// Empty positions hold `0`. The first and last rows and columns always
/// contain at least one cell.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridObject {
    rows: usize,
    cols: usize,
    cells: Vec<u8>,
}

impl GridObject {
    /// Builds an object from a dense block, trimming empty border rows/columns.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self, ObjectError> {
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut cells = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != width {
                return Err(ObjectError::Ragged);
            }
            for (c, &v) in row.iter().enumerate() {
                if v != 0 {
                    cells.push((r as i32, c as i32, v));
                }
            }
        }
        Self::from_cells(cells).map(|(o, _)| o)
    }

    /// Normalizes a cell list. Also returns the offset of the tight bounding
    /// box's top-left corner in the input coordinates.
    pub fn from_cells<I>(cells: I) -> Result<(Self, (i32, i32)), ObjectError>
    where
        I: IntoIterator<Item = (i32, i32, u8)>,
    {
        let cells: Vec<(i32, i32, u8)> = cells.into_iter().collect();
        let (mut r0, mut c0, mut r1, mut c1) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
        for &(r, c, v) in &cells {
            if !(1..=9).contains(&v) {
                return Err(ObjectError::ColorOutOfRange(v));
            }
            r0 = r0.min(r);
            c0 = c0.min(c);
            r1 = r1.max(r);
            c1 = c1.max(c);
        }
        if cells.is_empty() {
            return Err(ObjectError::Empty);
        }
        let rows = (r1 - r0 + 1) as usize;
        let cols = (c1 - c0 + 1) as usize;
        let mut dense = vec![0u8; rows * cols];
        for (r, c, v) in cells {
            let i = (r - r0) as usize * cols + (c - c0) as usize;
            if dense[i] != 0 {
                return Err(ObjectError::DuplicateCell(r, c));
            }
            dense[i] = v;
        }
        Ok((Self { rows, cols, cells: dense }, (r0, c0)))
    }

    /// Builds from a dense block known to be tight and valid.
    pub(crate) fn from_dense_unchecked(rows: usize, cols: usize, cells: Vec<u8>) -> Self {
        debug_assert_eq!(cells.len(), rows * cols);
        let obj = Self { rows, cols, cells };
        debug_assert!(obj.is_tight(), "not tight: {obj:?}");
        obj
    }

    fn is_tight(&self) -> bool {
        let row_hit = |r: usize| (0..self.cols).any(|c| self.is_set(r, c));
        let col_hit = |c: usize| (0..self.rows).any(|r| self.is_set(r, c));
        row_hit(0) && row_hit(self.rows - 1) && col_hit(0) && col_hit(self.cols - 1)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Dense row-major block, `0` where no cell.
    pub fn raw(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.cells[r * self.cols + c]
    }

    #[inline]
    pub fn is_set(&self, r: usize, c: usize) -> bool {
        self.get(r, c) != 0
    }

    /// `(row, col, color)` of every cell, row-major.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, u8)> + '_ {
        let cols = self.cols;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(move |(i, &v)| (i / cols, i % cols, v))
    }

    pub fn n_pixels(&self) -> usize {
        self.cells.iter().filter(|&&v| v != 0).count()
    }

    /// Bit `c` set for every color `c` present.
    pub fn color_mask(&self) -> u16 {
        self.cells.iter().filter(|&&v| v != 0).fold(0, |m, &v| m | 1 << v)
    }

    pub fn distinct_colors(&self) -> usize {
        self.color_mask().count_ones() as usize
    }

    /// Most frequent color; ties go to the smallest value.
    pub fn majority_color(&self) -> u8 {
        let mut counts = [0usize; 10];
        for &v in &self.cells {
            counts[v as usize] += 1;
        }
        let mut best = 1;
        for c in 2..=9 {
            if counts[c] > counts[best] {
                best = c;
            }
        }
        best as u8
    }

    /// One string per row, `0` for empty positions.
    pub fn encode_rows(&self) -> Vec<String> {
        self.cells
            .chunks(self.cols)
            .map(|row| row.iter().map(|&v| char::from(b'0' + v)).collect())
            .collect()
    }

    pub fn decode_rows(rows: &[String]) -> Result<Self, ObjectError> {
        let parsed: Vec<Vec<u8>> = rows
            .iter()
            .map(|row| {
                row.chars()
                    .map(|ch| {
                        ch.to_digit(10)
                            .map(|d| d as u8)
                            .ok_or_else(|| ObjectError::Encoding(row.clone()))
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        let obj = Self::from_rows(&parsed)?;
        if obj.rows != parsed.len() || obj.cols != parsed.first().map_or(0, Vec::len) {
            return Err(ObjectError::Encoding("rows are not tight".into()));
        }
        Ok(obj)
    }
}

impl fmt::Debug for GridObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GridObject[{}]", self.encode_rows().join("/"))
    }
}

impl Serialize for GridObject {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.encode_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridObject {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<String>::deserialize(d)?;
        GridObject::decode_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    /// Invariant under flipping rows (up-down).
    Horizontal,
    /// Invariant under flipping columns (left-right).
    Vertical,
    DiagonalMain,
    DiagonalAnti,
    /// Invariant under a half turn.
    Point,
}

impl Symmetry {
    pub const ALL: [Symmetry; 5] = [
        Symmetry::Horizontal,
        Symmetry::Vertical,
        Symmetry::DiagonalMain,
        Symmetry::DiagonalAnti,
        Symmetry::Point,
    ];

    fn bit(self) -> u8 {
        1 << self as u8
    }

    /// Image of local cell `(r, c)` in a `rows x cols` box.
    /// Diagonal reflections assume a square box.
    pub fn map(self, r: usize, c: usize, rows: usize, cols: usize) -> (usize, usize) {
        match self {
            Symmetry::Horizontal => (rows - 1 - r, c),
            Symmetry::Vertical => (r, cols - 1 - c),
            Symmetry::DiagonalMain => (c, r),
            Symmetry::DiagonalAnti => (cols - 1 - c, rows - 1 - r),
            Symmetry::Point => (rows - 1 - r, cols - 1 - c),
        }
    }

    fn needs_square(self) -> bool {
        matches!(self, Symmetry::DiagonalMain | Symmetry::DiagonalAnti)
    }
}

/// Set of symmetries, serialized as a sorted list of names.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symmetries(u8);

impl Symmetries {
    pub const NONE: Symmetries = Symmetries(0);

    pub fn contains(self, s: Symmetry) -> bool {
        self.0 & s.bit() != 0
    }

    pub fn insert(&mut self, s: Symmetry) {
        self.0 |= s.bit();
    }

    pub fn with(mut self, s: Symmetry) -> Self {
        self.insert(s);
        self
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_superset(self, other: Symmetries) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn union(self, other: Symmetries) -> Symmetries {
        Symmetries(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = Symmetry> {
        Symmetry::ALL.into_iter().filter(move |s| self.contains(*s))
    }
}

impl FromIterator<Symmetry> for Symmetries {
    fn from_iter<I: IntoIterator<Item = Symmetry>>(iter: I) -> Self {
        iter.into_iter().fold(Symmetries::NONE, Symmetries::with)
    }
}

impl fmt::Debug for Symmetries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for Symmetries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.iter().collect::<Vec<_>>().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Symmetries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Vec::<Symmetry>::deserialize(d)?.into_iter().collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    Four,
    Eight,
    Distance,
}

impl Connectivity {
    pub const ALL: [Connectivity; 3] = [Connectivity::Four, Connectivity::Eight, Connectivity::Distance];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorCount {
    Single,
    Multi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorPattern {
    Uniform,
    ColumnStripes,
    RowStripes,
    DiagonalStripes,
    TopBottom,
    LeftRight,
    Random,
}

impl ColorPattern {
    pub const ALL: [ColorPattern; 7] = [
        ColorPattern::Uniform,
        ColorPattern::ColumnStripes,
        ColorPattern::RowStripes,
        ColorPattern::DiagonalStripes,
        ColorPattern::TopBottom,
        ColorPattern::LeftRight,
        ColorPattern::Random,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Footprint {
    Rectangle,
    Square,
    Disk,
    Diamond,
    Ellipse,
    Freeform,
}

impl Footprint {
    pub const ALL: [Footprint; 6] = [
        Footprint::Rectangle,
        Footprint::Square,
        Footprint::Disk,
        Footprint::Diamond,
        Footprint::Ellipse,
        Footprint::Freeform,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObjectProperties {
    pub n_rows: usize,
    pub n_cols: usize,
    pub n_pixels: usize,
    pub symmetries: Symmetries,
    pub connectivity: Connectivity,
    pub color_count: ColorCount,
    pub color_pattern: ColorPattern,
    pub footprint: Footprint,
}

/// Derived facts that constraints need beyond [`ObjectProperties`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObjectTraits {
    pub has_hole: bool,
    pub has_interior: bool,
    pub color_mask: u16,
}

impl ObjectTraits {
    pub fn of(obj: &GridObject) -> Self {
        Self {
            has_hole: morph::hole_mask(obj).contains(&true),
            has_interior: morph::interior_mask(obj).contains(&true),
            color_mask: obj.color_mask(),
        }
    }
}

/// Whether the object equals its image under `s` (positions and colors).
pub fn has_symmetry(obj: &GridObject, s: Symmetry) -> bool {
    let (rows, cols) = obj.dims();
    if s.needs_square() && rows != cols {
        return false;
    }
    (0..rows).all(|r| {
        (0..cols).all(|c| {
            let (mr, mc) = s.map(r, c, rows, cols);
            obj.get(r, c) == obj.get(mr, mc)
        })
    })
}

pub fn classify(obj: &GridObject) -> ObjectProperties {
    let symmetries = Symmetry::ALL
        .into_iter()
        .filter(|&s| has_symmetry(obj, s))
        .collect();
    let connectivity = if morph::component_count(obj, Neighborhood::Four) == 1 {
        Connectivity::Four
    } else if morph::component_count(obj, Neighborhood::Eight) == 1 {
        Connectivity::Eight
    } else {
        Connectivity::Distance
    };
    let color_pattern = color_pattern(obj);
    ObjectProperties {
        n_rows: obj.rows(),
        n_cols: obj.cols(),
        n_pixels: obj.n_pixels(),
        symmetries,
        connectivity,
        color_count: if color_pattern == ColorPattern::Uniform {
            ColorCount::Single
        } else {
            ColorCount::Multi
        },
        color_pattern,
        footprint: footprint(obj),
    }
}

fn color_pattern(obj: &GridObject) -> ColorPattern {
    let n_colors = obj.distinct_colors();
    if n_colors == 1 {
        return ColorPattern::Uniform;
    }
    if n_colors == 2 && halves_split(obj, |r, _| r < obj.rows().div_ceil(2)) {
        return ColorPattern::TopBottom;
    }
    if n_colors == 2 && halves_split(obj, |_, c| c < obj.cols().div_ceil(2)) {
        return ColorPattern::LeftRight;
    }
    if constant_along(obj, |r, _| r) {
        ColorPattern::RowStripes
    } else if constant_along(obj, |_, c| c) {
        ColorPattern::ColumnStripes
    } else if constant_along(obj, |r, c| r + c) {
        ColorPattern::DiagonalStripes
    } else {
        ColorPattern::Random
    }
}

/// Every cell on the `first` side shares one color, every other cell
/// shares another.
fn halves_split(obj: &GridObject, first: impl Fn(usize, usize) -> bool) -> bool {
    let mut colors = [0u8; 2];
    for (r, c, v) in obj.cells() {
        let side = usize::from(!first(r, c));
        if colors[side] == 0 {
            colors[side] = v;
        } else if colors[side] != v {
            return false;
        }
    }
    colors[0] != 0 && colors[1] != 0 && colors[0] != colors[1]
}

/// Color is a function of `key(r, c)`.
fn constant_along(obj: &GridObject, key: impl Fn(usize, usize) -> usize) -> bool {
    let mut seen: HashMap<usize, u8> = HashMap::new();
    obj.cells().all(|(r, c, v)| *seen.entry(key(r, c)).or_insert(v) == v)
}

/// `((r - cr)/a)^2 + ((c - cc)/b)^2 <= 1` with semi-axes `rows/2`, `cols/2`,
/// evaluated in integers.
pub fn in_ellipse(r: usize, c: usize, rows: usize, cols: usize) -> bool {
    let (dr, dc) = (2 * r as i64 - rows as i64 + 1, 2 * c as i64 - cols as i64 + 1);
    let (rr, cc) = (rows as i64, cols as i64);
    dr * dr * cc * cc + dc * dc * rr * rr <= rr * rr * cc * cc
}

/// `|r - cr|/a + |c - cc|/b <= 1` with the same semi-axes.
pub fn in_diamond(r: usize, c: usize, rows: usize, cols: usize) -> bool {
    let (dr, dc) = (2 * r as i64 - rows as i64 + 1, 2 * c as i64 - cols as i64 + 1);
    dr.abs() * cols as i64 + dc.abs() * rows as i64 <= (rows * cols) as i64
}

fn matches_mask(obj: &GridObject, mask: fn(usize, usize, usize, usize) -> bool) -> bool {
    let (rows, cols) = obj.dims();
    (0..rows).all(|r| (0..cols).all(|c| obj.is_set(r, c) == mask(r, c, rows, cols)))
}

fn footprint(obj: &GridObject) -> Footprint {
    let (rows, cols) = obj.dims();
    if obj.n_pixels() == rows * cols {
        if rows == cols {
            Footprint::Square
        } else {
            Footprint::Rectangle
        }
    } else if matches_mask(obj, in_ellipse) {
        if rows == cols {
            Footprint::Disk
        } else {
            Footprint::Ellipse
        }
    } else if matches_mask(obj, in_diamond) {
        Footprint::Diamond
    } else {
        Footprint::Freeform
    }
}

/// Inclusive range on a size attribute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SizeRange {
    pub min: usize,
    pub max: usize,
}

impl SizeRange {
    pub fn new(min: usize, max: usize) -> Self {
        Self { min, max }
    }

    pub fn at_most(max: usize) -> Self {
        Self { min: 1, max }
    }

    pub fn at_least(min: usize) -> Self {
        Self { min, max: usize::MAX }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.min <= v && v <= self.max
    }

    fn intersect(a: Option<Self>, b: Option<Self>) -> Option<Self> {
        match (a, b) {
            (Some(a), Some(b)) => Some(Self {
                min: a.min.max(b.min),
                max: a.max.min(b.max),
            }),
            (a, b) => a.or(b),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstraintError {
    #[error("{field} range {min}..={max} is empty")]
    EmptyRange { field: &'static str, min: usize, max: usize },
}

/// Optional bounds on object properties. The default accepts everything.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectConstraints {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<SizeRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cols: Option<SizeRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pixels: Option<SizeRange>,
    /// Every listed symmetry must hold.
    #[serde(skip_serializing_if = "no_symmetries")]
    pub required_symmetries: Symmetries,
    /// At least one symmetry must hold.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub symmetric: bool,
    /// No symmetry may hold.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub asymmetric: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub connectivity: Option<Vec<Connectivity>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub color_count: Option<ColorCount>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub color_patterns: Option<Vec<ColorPattern>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub footprints: Option<Vec<Footprint>>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub requires_hole: bool,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub requires_interior: bool,
    /// Colors the object must not contain (bit per color).
    #[serde(skip_serializing_if = "is_zero")]
    pub forbidden_colors: u16,
}

fn is_zero(v: &u16) -> bool {
    *v == 0
}

fn no_symmetries(s: &Symmetries) -> bool {
    s.is_empty()
}

impl ObjectConstraints {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_unconstrained(&self) -> bool {
        *self == Self::default()
    }

    pub fn max_dims(rows: usize, cols: usize) -> Self {
        Self {
            rows: Some(SizeRange::at_most(rows)),
            cols: Some(SizeRange::at_most(cols)),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConstraintError> {
        for (field, range) in [("rows", self.rows), ("cols", self.cols), ("pixels", self.pixels)] {
            if let Some(r) = range {
                if r.min > r.max {
                    return Err(ConstraintError::EmptyRange {
                        field,
                        min: r.min,
                        max: r.max,
                    });
                }
            }
        }
        Ok(())
    }

    /// Conjunction of both constraint sets.
    pub fn and(&self, other: &ObjectConstraints) -> ObjectConstraints {
        fn both<T: PartialEq + Copy>(a: &Option<Vec<T>>, b: &Option<Vec<T>>) -> Option<Vec<T>> {
            match (a, b) {
                (Some(a), Some(b)) => Some(a.iter().copied().filter(|x| b.contains(x)).collect()),
                (a, b) => a.clone().or_else(|| b.clone()),
            }
        }
        let mut merged = ObjectConstraints {
            rows: SizeRange::intersect(self.rows, other.rows),
            cols: SizeRange::intersect(self.cols, other.cols),
            pixels: SizeRange::intersect(self.pixels, other.pixels),
            required_symmetries: self.required_symmetries.union(other.required_symmetries),
            symmetric: self.symmetric || other.symmetric,
            asymmetric: self.asymmetric || other.asymmetric,
            connectivity: both(&self.connectivity, &other.connectivity),
            color_count: self.color_count.or(other.color_count),
            color_patterns: both(&self.color_patterns, &other.color_patterns),
            footprints: both(&self.footprints, &other.footprints),
            requires_hole: self.requires_hole || other.requires_hole,
            requires_interior: self.requires_interior || other.requires_interior,
            forbidden_colors: self.forbidden_colors | other.forbidden_colors,
        };
        if matches!((self.color_count, other.color_count), (Some(a), Some(b)) if a != b) {
            // No object is both single- and multi-colored.
            merged.color_patterns = Some(Vec::new());
        }
        merged
    }

    /// Checks only the fields covered by [`ObjectProperties`].
    pub fn matches_properties(&self, p: &ObjectProperties) -> bool {
        let in_range = |r: Option<SizeRange>, v| r.is_none_or(|r| r.contains(v));
        in_range(self.rows, p.n_rows)
            && in_range(self.cols, p.n_cols)
            && in_range(self.pixels, p.n_pixels)
            && p.symmetries.is_superset(self.required_symmetries)
            && (!self.symmetric || !p.symmetries.is_empty())
            && (!self.asymmetric || p.symmetries.is_empty())
            && self.connectivity.as_ref().is_none_or(|s| s.contains(&p.connectivity))
            && self.color_count.is_none_or(|c| c == p.color_count)
            && self.color_patterns.as_ref().is_none_or(|s| s.contains(&p.color_pattern))
            && self.footprints.as_ref().is_none_or(|s| s.contains(&p.footprint))
    }

    pub fn needs_traits(&self) -> bool {
        self.requires_hole || self.requires_interior || self.forbidden_colors != 0
    }

    pub fn matches_traits(&self, t: &ObjectTraits) -> bool {
        (!self.requires_hole || t.has_hole)
            && (!self.requires_interior || t.has_interior)
            && t.color_mask & self.forbidden_colors == 0
    }

    pub fn matches(&self, p: &ObjectProperties, t: &ObjectTraits) -> bool {
        self.matches_properties(p) && self.matches_traits(t)
    }

    /// Classifies `obj` and checks everything.
    pub fn matches_object(&self, obj: &GridObject) -> bool {
        self.matches_properties(&classify(obj)) && (!self.needs_traits() || self.matches_traits(&ObjectTraits::of(obj)))
    }
}
