//! Dense color grids and the object placement rules.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::object::GridObject;

/// Largest allowed grid side.
pub const MAX_GRID_DIM: usize = 30;

pub const BACKGROUND: u8 = 0;

/// A cell color in `0..=9`; `0` is background.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Color(u8);

impl Color {
    pub const BACKGROUND: Color = Color(0);

    pub fn new(value: u8) -> Result<Self, GridError> {
        if value <= 9 {
            Ok(Color(value))
        } else {
            Err(GridError::ColorOutOfRange(value))
        }
    }

    /// An object color, i.e. in `1..=9`.
    pub fn object(value: u8) -> Result<Self, GridError> {
        if (1..=9).contains(&value) {
            Ok(Color(value))
        } else {
            Err(GridError::ColorOutOfRange(value))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn is_background(self) -> bool {
        self.0 == BACKGROUND
    }

    /// The `c mod 9 + 1` successor used by color-changing transforms.
    pub fn next_object_color(self) -> Color {
        Color(next_color(self.0))
    }
}

impl TryFrom<u8> for Color {
    type Error = GridError;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Color::new(v)
    }
}

impl From<Color> for u8 {
    fn from(c: Color) -> u8 {
        c.0
    }
}

/// `c mod 9 + 1` on raw values.
#[inline]
pub fn next_color(c: u8) -> u8 {
    c % 9 + 1
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("grid dimensions {rows}x{cols} outside 1..={MAX_GRID_DIM}")]
    DimensionOutOfRange { rows: usize, cols: usize },
    #[error("color value {0} outside the palette")]
    ColorOutOfRange(u8),
    #[error("grid rows have unequal lengths")]
    Ragged,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum PlacementError {
    #[error("object leaves the grid")]
    OutOfBounds,
    #[error("object overlaps an occupied cell at ({row}, {col})")]
    Overlap { row: usize, col: usize },
    #[error("object touches an occupied cell at ({row}, {col})")]
    TouchViolation { row: usize, col: usize },
}

/// Row-major grid of color values.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    rows: usize,
    cols: usize,
    cells: Vec<u8>,
}

impl Grid {
    /// An all-background grid.
    pub fn new(rows: usize, cols: usize) -> Result<Self, GridError> {
        check_dims(rows, cols)?;
        Ok(Self {
            rows,
            cols,
            cells: vec![BACKGROUND; rows * cols],
        })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, GridError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        check_dims(n_rows, n_cols)?;
        let mut cells = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            if row.len() != n_cols {
                return Err(GridError::Ragged);
            }
            for &v in row {
                Color::new(v)?;
                cells.push(v);
            }
        }
        Ok(Self {
            rows: n_rows,
            cols: n_cols,
            cells,
        })
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.cells.chunks(self.cols).map(<[u8]>::to_vec).collect()
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

    /// Row-major cell values.
    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, color: Color) {
        self.cells[row * self.cols + col] = color.value();
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&v| v != BACKGROUND).count()
    }

    /// Tight bounding box over non-background cells.
    pub fn occupied_bbox(&self) -> Option<BBox> {
        let mut bbox: Option<BBox> = None;
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) == BACKGROUND {
                    continue;
                }
                bbox = Some(match bbox {
                    None => BBox {
                        row_min: r,
                        col_min: c,
                        row_max: r,
                        col_max: c,
                    },
                    Some(b) => BBox {
                        row_min: b.row_min.min(r),
                        col_min: b.col_min.min(c),
                        row_max: b.row_max.max(r),
                        col_max: b.col_max.max(c),
                    },
                });
            }
        }
        bbox
    }

    /// Returns a copy of the grid with `placed` written into it.
    pub fn place_object(&self, placed: &PlacedObject, mode: PlacementMode) -> Result<Grid, PlacementError> {
        let mut out = self.clone();
        out.place_in_place(placed, mode)?;
        Ok(out)
    }

    /// Checks legality, then writes. On error the grid is untouched.
    pub fn place_in_place(&mut self, placed: &PlacedObject, mode: PlacementMode) -> Result<(), PlacementError> {
        self.check_placement(&placed.object, placed.anchor, mode)?;
        let (ar, ac) = (placed.anchor.row, placed.anchor.col);
        for (r, c, color) in placed.object.cells() {
            self.cells[(ar + r) * self.cols + ac + c] = color;
        }
        Ok(())
    }

    pub fn check_placement(&self, object: &GridObject, anchor: Anchor, mode: PlacementMode) -> Result<(), PlacementError> {
        if anchor.row + object.rows() > self.rows || anchor.col + object.cols() > self.cols {
            return Err(PlacementError::OutOfBounds);
        }
        for (r, c, _) in object.cells() {
            let (gr, gc) = (anchor.row + r, anchor.col + c);
            if self.get(gr, gc) != BACKGROUND {
                return Err(PlacementError::Overlap { row: gr, col: gc });
            }
        }
        if mode == PlacementMode::Initial {
            for (r, c, _) in object.cells() {
                let (gr, gc) = (anchor.row + r, anchor.col + c);
                for nr in gr.saturating_sub(1)..=(gr + 1).min(self.rows - 1) {
                    for nc in gc.saturating_sub(1)..=(gc + 1).min(self.cols - 1) {
                        if self.get(nr, nc) != BACKGROUND {
                            return Err(PlacementError::TouchViolation { row: nr, col: nc });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Clears the cells covered by `placed`.
    pub fn erase(&mut self, placed: &PlacedObject) {
        let (ar, ac) = (placed.anchor.row, placed.anchor.col);
        for (r, c, _) in placed.object.cells() {
            self.cells[(ar + r) * self.cols + ac + c] = BACKGROUND;
        }
    }

    /// Row-major bytes prefixed by the dimensions; a canonical key.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.cells.len() + 2);
        out.push(self.rows as u8);
        out.push(self.cols as u8);
        out.extend_from_slice(&self.cells);
        out
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Grid {}x{}", self.rows, self.cols)?;
        for row in self.cells.chunks(self.cols) {
            for &v in row {
                write!(f, "{}", if v == 0 { '.' } else { char::from(b'0' + v) })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn check_dims(rows: usize, cols: usize) -> Result<(), GridError> {
    if (1..=MAX_GRID_DIM).contains(&rows) && (1..=MAX_GRID_DIM).contains(&cols) {
        Ok(())
    } else {
        Err(GridError::DimensionOutOfRange { rows, cols })
    }
}

/// Inclusive bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BBox {
    pub row_min: usize,
    pub col_min: usize,
    pub row_max: usize,
    pub col_max: usize,
}

/// Top-left corner of an object's bounding box within a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Anchor {
    pub row: usize,
    pub col: usize,
}

impl Anchor {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    /// `None` when the shift would leave the non-negative quadrant.
    pub fn shifted(self, delta: (i32, i32)) -> Option<Anchor> {
        let row = self.row as i64 + i64::from(delta.0);
        let col = self.col as i64 + i64::from(delta.1);
        (row >= 0 && col >= 0).then(|| Anchor::new(row as usize, col as usize))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlacedObject {
    pub object: GridObject,
    pub anchor: Anchor,
}

impl PlacedObject {
    pub fn new(object: GridObject, anchor: Anchor) -> Self {
        Self { object, anchor }
    }

    /// Absolute `(row, col)` positions of the object's cells.
    pub fn absolute_cells(&self) -> impl Iterator<Item = (usize, usize, u8)> + '_ {
        self.object
            .cells()
            .map(move |(r, c, v)| (self.anchor.row + r, self.anchor.col + c, v))
    }
}

/// `Initial` forbids overlap and any contact (8-neighborhood);
/// `PostTransform` forbids overlap only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlacementMode {
    Initial,
    PostTransform,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dot(color: u8) -> GridObject {
        GridObject::from_rows(&[&[color]]).unwrap()
    }

    #[test]
    fn new_grid_bounds() {
        let g = Grid::new(3, 3).unwrap();
        assert_eq!(g.cells(), &[0; 9]);
        assert_eq!(Grid::new(1, 1).unwrap().cells(), &[0]);
        assert_eq!(
            Grid::new(31, 5),
            Err(GridError::DimensionOutOfRange { rows: 31, cols: 5 })
        );
        assert!(Grid::new(0, 5).is_err());
        assert!(Grid::new(30, 30).is_ok());
    }

    #[test]
    fn place_single_cell() {
        let g = Grid::new(3, 3).unwrap();
        let out = g
            .place_object(&PlacedObject::new(dot(4), Anchor::new(0, 0)), PlacementMode::Initial)
            .unwrap();
        assert_eq!(out.get(0, 0), 4);
        assert_eq!(out.occupied_count(), 1);
        assert_eq!(g.occupied_count(), 0, "input must not change");
    }

    #[test]
    fn diagonal_contact_is_touch_only_initially() {
        let g = Grid::new(3, 3)
            .unwrap()
            .place_object(&PlacedObject::new(dot(1), Anchor::new(0, 0)), PlacementMode::Initial)
            .unwrap();
        let second = PlacedObject::new(dot(2), Anchor::new(1, 1));
        assert_eq!(
            g.place_object(&second, PlacementMode::Initial),
            Err(PlacementError::TouchViolation { row: 0, col: 0 })
        );
        let ok = g.place_object(&second, PlacementMode::PostTransform).unwrap();
        assert_eq!(ok.get(1, 1), 2);
    }

    #[test]
    fn overlap_and_bounds() {
        let g = Grid::new(3, 3)
            .unwrap()
            .place_object(&PlacedObject::new(dot(1), Anchor::new(1, 1)), PlacementMode::Initial)
            .unwrap();
        let same = PlacedObject::new(dot(2), Anchor::new(1, 1));
        assert_eq!(
            g.place_object(&same, PlacementMode::PostTransform),
            Err(PlacementError::Overlap { row: 1, col: 1 })
        );
        let bar = GridObject::from_rows(&[&[3, 3]]).unwrap();
        assert_eq!(
            g.place_object(&PlacedObject::new(bar, Anchor::new(0, 2)), PlacementMode::PostTransform),
            Err(PlacementError::OutOfBounds)
        );
    }

    #[test]
    fn containment_is_excluded_by_touch_rule() {
        // A ring with a free cell inside: nothing may be placed in the hole.
        let ring = GridObject::from_rows(&[&[1, 1, 1], &[1, 0, 1], &[1, 1, 1]]).unwrap();
        let g = Grid::new(5, 5)
            .unwrap()
            .place_object(&PlacedObject::new(ring, Anchor::new(1, 1)), PlacementMode::Initial)
            .unwrap();
        let inner = PlacedObject::new(dot(2), Anchor::new(2, 2));
        assert!(matches!(
            g.place_object(&inner, PlacementMode::Initial),
            Err(PlacementError::TouchViolation { .. })
        ));
    }

    #[test]
    fn bbox_examples() {
        let mut g = Grid::new(4, 4).unwrap();
        assert_eq!(g.occupied_bbox(), None);
        g.set(2, 3, Color::new(1).unwrap());
        assert_eq!(
            g.occupied_bbox(),
            Some(BBox { row_min: 2, col_min: 3, row_max: 2, col_max: 3 })
        );
        let mut g = Grid::new(4, 4).unwrap();
        g.set(0, 0, Color::new(1).unwrap());
        g.set(3, 1, Color::new(1).unwrap());
        assert_eq!(
            g.occupied_bbox(),
            Some(BBox { row_min: 0, col_min: 0, row_max: 3, col_max: 1 })
        );
    }

    #[test]
    fn erase_restores_background() {
        let obj = GridObject::from_rows(&[&[1, 2], &[0, 3]]).unwrap();
        let placed = PlacedObject::new(obj, Anchor::new(1, 0));
        let mut g = Grid::new(3, 3).unwrap().place_object(&placed, PlacementMode::Initial).unwrap();
        g.erase(&placed);
        assert_eq!(g, Grid::new(3, 3).unwrap());
    }

    #[test]
    fn color_successor_cycles() {
        assert_eq!(next_color(7), 8);
        assert_eq!(next_color(9), 1);
        assert!(Color::new(10).is_err());
        assert!(Color::object(0).is_err());
    }
}
