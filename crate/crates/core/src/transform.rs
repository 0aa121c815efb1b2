//! The atomic object transformations.
//!
//! Every transformation works in the object's local frame and reports how
//! the bounding box's top-left corner moved (`anchor_delta`). Cells keep
//! their absolute positions unless the transformation itself moves them:
//! cropping the top row yields `(+1, 0)`, extending contours `(-1, -1)`.
//! Mirrors act in place and a rotation keeps the bounding-box center fixed.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::next_color;
use crate::morph;
use crate::object::{Connectivity, GridObject, ObjectConstraints, SizeRange};

/// Default color used by the padding transformations.
pub const DEFAULT_PAD_COLOR: u8 = 5;

/// Transformation families, as grouped in the catalog of operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Translate,
    Mirror,
    Rotate,
    Crop,
    ChangeColor,
    Fill,
    Empty,
    Extend,
    Pad,
    Duplicate,
    Identity,
}

macro_rules! transformations {
    ($($variant:ident => $name:literal, $family:ident;)*) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Transformation {
            $($variant,)*
        }

        impl Transformation {
            pub fn name(self) -> &'static str {
                match self {
                    $(Transformation::$variant => $name,)*
                }
            }

            pub fn family(self) -> Family {
                match self {
                    $(Transformation::$variant => Family::$family,)*
                }
            }

            const EVERY: &'static [Transformation] = &[$(Transformation::$variant,)*];
        }
    };
}

transformations! {
    TranslateUp => "translate_up", Translate;
    TranslateDown => "translate_down", Translate;
    TranslateLeft => "translate_left", Translate;
    TranslateRight => "translate_right", Translate;
    MirrorHorizontal => "mirror_horizontal", Mirror;
    MirrorVertical => "mirror_vertical", Mirror;
    Rotate90 => "rotate_90", Rotate;
    CropTopSide => "crop_top_side", Crop;
    CropBottomSide => "crop_bottom_side", Crop;
    CropRightSide => "crop_right_side", Crop;
    CropLeftSide => "crop_left_side", Crop;
    CropContours => "crop_contours", Crop;
    ChangeColor => "change_object_color", ChangeColor;
    FillHolesSameColor => "fill_holes_same_color", Fill;
    FillHolesDifferentColor => "fill_holes_different_color", Fill;
    EmptyInside => "empty_inside", Empty;
    ExtendContoursSameColor => "extend_contours_same_color", Extend;
    ExtendContoursDifferentColor => "extend_contours_different_color", Extend;
    PadTop => "pad_top", Pad;
    PadBottom => "pad_bottom", Pad;
    PadLeft => "pad_left", Pad;
    PadRight => "pad_right", Pad;
    PadFull => "pad_full", Pad;
    DuplicateTop => "duplicate_top", Duplicate;
    DuplicateBottom => "duplicate_bottom", Duplicate;
    DuplicateLeft => "duplicate_left", Duplicate;
    DuplicateRight => "duplicate_right", Duplicate;
    DuplicateQuadruple => "duplicate_quadruple", Duplicate;
    Identity => "identity", Identity;
}

impl Transformation {
    /// Every atomic transformation, identity excluded.
    pub fn atomics() -> &'static [Transformation] {
        &Self::EVERY[..Self::EVERY.len() - 1]
    }

    pub fn is_identity(self) -> bool {
        self == Transformation::Identity
    }
}

impl fmt::Display for Transformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown transformation `{0}`")]
pub struct UnknownTransformation(pub String);

impl FromStr for Transformation {
    type Err = UnknownTransformation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "rotate90" {
            return Ok(Transformation::Rotate90);
        }
        Self::EVERY
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| UnknownTransformation(s.to_string()))
    }
}

impl Serialize for Transformation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Transformation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("{0} is not applicable to this object")]
    ConstraintViolated(Transformation),
    #[error("{0} would leave an empty object")]
    DegenerateResult(Transformation),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("step {step}: {source}")]
pub struct SequenceError {
    pub step: usize,
    #[source]
    pub source: TransformError,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SequenceBuildError {
    #[error("a transformation sequence needs at least one step")]
    Empty,
    #[error("identity is not a sequence step")]
    IdentityStep,
    #[error(transparent)]
    Unknown(#[from] UnknownTransformation),
}

/// An ordered, non-empty list of non-identity transformations.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Transformation>", into = "Vec<Transformation>")]
pub struct TransformationSequence(Vec<Transformation>);

impl TransformationSequence {
    pub fn new(steps: Vec<Transformation>) -> Result<Self, SequenceBuildError> {
        if steps.is_empty() {
            return Err(SequenceBuildError::Empty);
        }
        if steps.iter().any(|t| t.is_identity()) {
            return Err(SequenceBuildError::IdentityStep);
        }
        Ok(Self(steps))
    }

    pub fn steps(&self) -> &[Transformation] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    /// Step names joined by `-`, e.g. `mirror_horizontal-rotate_90`.
    pub fn canonical_name(&self) -> String {
        self.0.iter().map(|t| t.name()).collect::<Vec<_>>().join("-")
    }

    /// Parses a `,`- or `-`-separated list of names.
    pub fn parse(s: &str) -> Result<Self, SequenceBuildError> {
        let steps = s
            .split([',', '-'])
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(steps)
    }
}

impl TryFrom<Vec<Transformation>> for TransformationSequence {
    type Error = SequenceBuildError;
    fn try_from(v: Vec<Transformation>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<TransformationSequence> for Vec<Transformation> {
    fn from(s: TransformationSequence) -> Self {
        s.0
    }
}

impl fmt::Debug for TransformationSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.canonical_name())
    }
}

impl fmt::Display for TransformationSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformedObject {
    pub object: GridObject,
    /// Displacement of the bounding box's top-left corner.
    pub anchor_delta: (i32, i32),
}

/// When [`Transformer::apply_sequence_with`] checks applicability.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepCheck {
    /// Every step's constraints must hold on the object it receives.
    EachStep,
    /// Constraints are the caller's business (checked once on the
    /// starting object); only empty results are rejected.
    Skip,
}

/// Applies transformations under a fixed parameterization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transformer {
    pub pad_color: u8,
}

impl Default for Transformer {
    fn default() -> Self {
        Self {
            pad_color: DEFAULT_PAD_COLOR,
        }
    }
}

impl Transformer {
    pub fn with_pad_color(pad_color: u8) -> Self {
        assert!((1..=9).contains(&pad_color), "pad color {pad_color} outside 1..=9");
        Self { pad_color }
    }

    /// Object properties under which `t` is applicable and non-degenerate.
    pub fn constraints_of(&self, t: Transformation) -> ObjectConstraints {
        use Transformation::*;
        let mut c = ObjectConstraints::none();
        match t {
            CropTopSide | CropBottomSide => c.rows = Some(SizeRange::at_least(2)),
            CropLeftSide | CropRightSide => c.cols = Some(SizeRange::at_least(2)),
            CropContours => c.requires_interior = true,
            FillHolesSameColor | FillHolesDifferentColor => {
                c.connectivity = Some(vec![Connectivity::Four, Connectivity::Eight]);
                c.requires_hole = true;
            }
            EmptyInside => {
                c.rows = Some(SizeRange::at_least(3));
                c.cols = Some(SizeRange::at_least(3));
                c.requires_interior = true;
            }
            PadTop | PadBottom | PadLeft | PadRight | PadFull => c.forbidden_colors = 1 << self.pad_color,
            _ => {}
        }
        c
    }

    /// Conjunction of the constraints of every step.
    pub fn sequence_constraints(&self, steps: &[Transformation]) -> ObjectConstraints {
        steps
            .iter()
            .fold(ObjectConstraints::none(), |acc, &t| acc.and(&self.constraints_of(t)))
    }

    pub fn is_applicable(&self, t: Transformation, obj: &GridObject) -> bool {
        self.constraints_of(t).matches_object(obj)
    }

    pub fn apply(&self, t: Transformation, obj: &GridObject) -> Result<TransformedObject, TransformError> {
        if !self.is_applicable(t, obj) {
            return Err(TransformError::ConstraintViolated(t));
        }
        self.apply_unchecked(t, obj)
    }

    /// Applies `t` without the applicability check.
    pub fn apply_unchecked(&self, t: Transformation, obj: &GridObject) -> Result<TransformedObject, TransformError> {
        use Transformation::*;
        let (rows, cols) = (obj.rows() as i32, obj.cols() as i32);
        let same = |object: GridObject, delta| Ok(TransformedObject { object, anchor_delta: delta });
        match t {
            Identity => same(obj.clone(), (0, 0)),
            TranslateUp => same(obj.clone(), (-1, 0)),
            TranslateDown => same(obj.clone(), (1, 0)),
            TranslateLeft => same(obj.clone(), (0, -1)),
            TranslateRight => same(obj.clone(), (0, 1)),
            MirrorHorizontal => same(remap(obj, obj.dims(), |r, c| (obj.rows() - 1 - r, c)), (0, 0)),
            MirrorVertical => same(remap(obj, obj.dims(), |r, c| (r, obj.cols() - 1 - c)), (0, 0)),
            Rotate90 => {
                // Counter-clockwise: old (r, c) lands on (cols-1-c, r).
                let (r_old, c_old) = obj.dims();
                let rotated = remap(obj, (c_old, r_old), |r, c| (c, c_old - 1 - r));
                // Keep the center fixed; half-cell offsets truncate toward zero
                // so that four turns return to the starting anchor.
                let shift = (rows - cols) / 2;
                same(rotated, (shift, -shift))
            }
            CropTopSide => rebuild(t, cells_of(obj).filter(|&(r, _, _)| r >= 1)),
            CropBottomSide => rebuild(t, cells_of(obj).filter(|&(r, _, _)| r <= rows - 2)),
            CropLeftSide => rebuild(t, cells_of(obj).filter(|&(_, c, _)| c >= 1)),
            CropRightSide => rebuild(t, cells_of(obj).filter(|&(_, c, _)| c <= cols - 2)),
            CropContours => {
                let interior = morph::interior_mask(obj);
                rebuild(t, cells_of(obj).filter(|&(r, c, _)| interior[(r * cols + c) as usize]))
            }
            ChangeColor => {
                let cells = obj.raw().iter().map(|&v| if v == 0 { 0 } else { next_color(v) }).collect();
                same(GridObject::from_dense_unchecked(obj.rows(), obj.cols(), cells), (0, 0))
            }
            FillHolesSameColor | FillHolesDifferentColor => {
                let mut color = obj.majority_color();
                if t == FillHolesDifferentColor {
                    color = next_color(color);
                }
                let holes = morph::hole_mask(obj);
                let cells = obj
                    .raw()
                    .iter()
                    .zip(&holes)
                    .map(|(&v, &hole)| if hole { color } else { v })
                    .collect();
                same(GridObject::from_dense_unchecked(obj.rows(), obj.cols(), cells), (0, 0))
            }
            EmptyInside => {
                let interior = morph::interior_mask(obj);
                rebuild(t, cells_of(obj).filter(|&(r, c, _)| !interior[(r * cols + c) as usize]))
            }
            ExtendContoursSameColor | ExtendContoursDifferentColor => {
                let different = next_color(obj.majority_color());
                let occupied = |r: i32, c: i32| r >= 0 && c >= 0 && r < rows && c < cols && obj.is_set(r as usize, c as usize);
                let mut cells: Vec<(i32, i32, u8)> = cells_of(obj).collect();
                for r in -1..=rows {
                    for c in -1..=cols {
                        if occupied(r, c) {
                            continue;
                        }
                        // Every object cell next to a free cell is a contour cell.
                        let nearest = [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
                            .into_iter()
                            .filter(|&(nr, nc)| occupied(nr, nc))
                            .map(|(nr, nc)| obj.get(nr as usize, nc as usize))
                            .min();
                        if let Some(color) = nearest {
                            let color = if t == ExtendContoursSameColor { color } else { different };
                            cells.push((r, c, color));
                        }
                    }
                }
                rebuild(t, cells.into_iter())
            }
            PadTop => rebuild(t, cells_of(obj).chain((0..cols).map(|c| (-1, c, self.pad_color)))),
            PadBottom => rebuild(t, cells_of(obj).chain((0..cols).map(|c| (rows, c, self.pad_color)))),
            PadLeft => rebuild(t, cells_of(obj).chain((0..rows).map(|r| (r, -1, self.pad_color)))),
            PadRight => rebuild(t, cells_of(obj).chain((0..rows).map(|r| (r, cols, self.pad_color)))),
            PadFull => {
                let p = self.pad_color;
                let frame = (-1..=cols)
                    .flat_map(move |c| [(-1, c, p), (rows, c, p)])
                    .chain((0..rows).flat_map(move |r| [(r, -1, p), (r, cols, p)]));
                rebuild(t, cells_of(obj).chain(frame))
            }
            DuplicateTop => rebuild(t, copies(obj, &[(0, 0), (-rows, 0)])),
            DuplicateBottom => rebuild(t, copies(obj, &[(0, 0), (rows, 0)])),
            DuplicateLeft => rebuild(t, copies(obj, &[(0, 0), (0, -cols)])),
            DuplicateRight => rebuild(t, copies(obj, &[(0, 0), (0, cols)])),
            DuplicateQuadruple => rebuild(t, copies(obj, &[(0, 0), (-rows, 0), (0, -cols), (-rows, -cols)])),
        }
    }

    pub fn apply_sequence(&self, steps: &[Transformation], obj: &GridObject) -> Result<TransformedObject, SequenceError> {
        self.apply_sequence_with(steps, obj, StepCheck::EachStep)
    }

    /// Left fold of `apply`; anchor deltas add up.
    pub fn apply_sequence_with(
        &self,
        steps: &[Transformation],
        obj: &GridObject,
        check: StepCheck,
    ) -> Result<TransformedObject, SequenceError> {
        let mut current = TransformedObject {
            object: obj.clone(),
            anchor_delta: (0, 0),
        };
        for (step, &t) in steps.iter().enumerate() {
            let next = match check {
                StepCheck::EachStep => self.apply(t, &current.object),
                StepCheck::Skip => self.apply_unchecked(t, &current.object),
            }
            .map_err(|source| SequenceError { step, source })?;
            current = TransformedObject {
                object: next.object,
                anchor_delta: (
                    current.anchor_delta.0 + next.anchor_delta.0,
                    current.anchor_delta.1 + next.anchor_delta.1,
                ),
            };
        }
        Ok(current)
    }
}

/// Upper bound on the bounding box after `t`.
pub fn dims_bound(t: Transformation, rows: usize, cols: usize) -> (usize, usize) {
    use Transformation::*;
    let shrink = |n: usize, by: usize| n.saturating_sub(by).max(1);
    match t {
        Rotate90 => (cols, rows),
        CropTopSide | CropBottomSide => (shrink(rows, 1), cols),
        CropLeftSide | CropRightSide => (rows, shrink(cols, 1)),
        CropContours => (shrink(rows, 2), shrink(cols, 2)),
        ExtendContoursSameColor | ExtendContoursDifferentColor | PadFull => (rows + 2, cols + 2),
        PadTop | PadBottom => (rows + 1, cols),
        PadLeft | PadRight => (rows, cols + 1),
        DuplicateTop | DuplicateBottom => (2 * rows, cols),
        DuplicateLeft | DuplicateRight => (rows, 2 * cols),
        DuplicateQuadruple => (2 * rows, 2 * cols),
        _ => (rows, cols),
    }
}

/// Largest bounding box an object of the given size can reach at any point
/// while `steps` are applied.
pub fn sequence_envelope(steps: &[Transformation], rows: usize, cols: usize) -> (usize, usize) {
    let mut cur = (rows, cols);
    let mut max = cur;
    for &t in steps {
        cur = dims_bound(t, cur.0, cur.1);
        max = (max.0.max(cur.0), max.1.max(cur.1));
    }
    max
}

fn cells_of(obj: &GridObject) -> impl Iterator<Item = (i32, i32, u8)> + '_ {
    obj.cells().map(|(r, c, v)| (r as i32, c as i32, v))
}

fn copies<'a>(obj: &'a GridObject, offsets: &'a [(i32, i32)]) -> impl Iterator<Item = (i32, i32, u8)> + 'a {
    offsets
        .iter()
        .flat_map(move |&(dr, dc)| cells_of(obj).map(move |(r, c, v)| (r + dr, c + dc, v)))
}

/// Dense remap where output `(r, c)` reads input `source(r, c)`.
fn remap(obj: &GridObject, dims: (usize, usize), source: impl Fn(usize, usize) -> (usize, usize)) -> GridObject {
    let mut cells = Vec::with_capacity(dims.0 * dims.1);
    for r in 0..dims.0 {
        for c in 0..dims.1 {
            let (sr, sc) = source(r, c);
            cells.push(obj.get(sr, sc));
        }
    }
    GridObject::from_dense_unchecked(dims.0, dims.1, cells)
}

fn rebuild(
    t: Transformation,
    cells: impl Iterator<Item = (i32, i32, u8)>,
) -> Result<TransformedObject, TransformError> {
    match GridObject::from_cells(cells) {
        Ok((object, anchor_delta)) => Ok(TransformedObject { object, anchor_delta }),
        Err(_) => Err(TransformError::DegenerateResult(t)),
    }
}
