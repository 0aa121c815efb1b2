//! Connected components, contours and holes in an object's local frame.

use crate::object::GridObject;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Neighborhood {
    Four,
    Eight,
}

const N4: [(i32, i32); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
const N8: [(i32, i32); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

impl Neighborhood {
    pub fn offsets(self) -> &'static [(i32, i32)] {
        match self {
            Neighborhood::Four => &N4,
            Neighborhood::Eight => &N8,
        }
    }
}

/// Labels the cells selected by `mask` (row-major, `rows x cols`) into
/// connected components. Returns per-cell labels (`u32::MAX` for unselected)
/// and the component count.
pub fn label(mask: &[bool], rows: usize, cols: usize, nb: Neighborhood) -> (Vec<u32>, usize) {
    let mut labels = vec![u32::MAX; mask.len()];
    let mut count = 0u32;
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || labels[start] != u32::MAX {
            continue;
        }
        labels[start] = count;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (r, c) = ((i / cols) as i32, (i % cols) as i32);
            for &(dr, dc) in nb.offsets() {
                let (nr, nc) = (r + dr, c + dc);
                if nr < 0 || nc < 0 || nr >= rows as i32 || nc >= cols as i32 {
                    continue;
                }
                let j = nr as usize * cols + nc as usize;
                if mask[j] && labels[j] == u32::MAX {
                    labels[j] = count;
                    stack.push(j);
                }
            }
        }
        count += 1;
    }
    (labels, count as usize)
}

pub fn occupancy(obj: &GridObject) -> Vec<bool> {
    obj.raw().iter().map(|&v| v != 0).collect()
}

pub fn component_count(obj: &GridObject, nb: Neighborhood) -> usize {
    label(&occupancy(obj), obj.rows(), obj.cols(), nb).1
}

/// Object cells with at least one 4-neighbor that is not an object cell
/// (cells on the bounding-box border always qualify).
pub fn contour_mask(obj: &GridObject) -> Vec<bool> {
    let (rows, cols) = (obj.rows(), obj.cols());
    let mut out = vec![false; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            if !obj.is_set(r, c) {
                continue;
            }
            out[r * cols + c] = r == 0
                || c == 0
                || r + 1 == rows
                || c + 1 == cols
                || !obj.is_set(r - 1, c)
                || !obj.is_set(r + 1, c)
                || !obj.is_set(r, c - 1)
                || !obj.is_set(r, c + 1);
        }
    }
    out
}

/// Object cells that are not contour cells.
pub fn interior_mask(obj: &GridObject) -> Vec<bool> {
    contour_mask(obj)
        .iter()
        .zip(obj.raw())
        .map(|(&contour, &v)| v != 0 && !contour)
        .collect()
}

/// Background cells inside the bounding box whose 4-connected background
/// region does not reach the bounding-box border.
pub fn hole_mask(obj: &GridObject) -> Vec<bool> {
    let (rows, cols) = (obj.rows(), obj.cols());
    let mut outside = vec![false; rows * cols];
    let mut stack: Vec<usize> = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let border = r == 0 || c == 0 || r + 1 == rows || c + 1 == cols;
            if border && !obj.is_set(r, c) {
                outside[r * cols + c] = true;
                stack.push(r * cols + c);
            }
        }
    }
    while let Some(i) = stack.pop() {
        let (r, c) = ((i / cols) as i32, (i % cols) as i32);
        for &(dr, dc) in &N4 {
            let (nr, nc) = (r + dr, c + dc);
            if nr < 0 || nc < 0 || nr >= rows as i32 || nc >= cols as i32 {
                continue;
            }
            let j = nr as usize * cols + nc as usize;
            if !outside[j] && obj.raw()[j] == 0 {
                outside[j] = true;
                stack.push(j);
            }
        }
    }
    obj.raw()
        .iter()
        .zip(&outside)
        .map(|(&v, &out)| v == 0 && !out)
        .collect()
}

pub fn hole_count_cells(obj: &GridObject) -> usize {
    hole_mask(obj).iter().filter(|&&h| h).count()
}
