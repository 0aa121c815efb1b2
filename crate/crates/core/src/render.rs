//! Grid rendering as ANSI text, binary PPM and SVG.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::grid::Grid;

/// RGB for colors 0..=9: black, blue, red, green, yellow, grey, magenta,
/// orange, sky blue, maroon.
pub const PALETTE: [[u8; 3]; 10] = [
    [0x00, 0x00, 0x00],
    [0x00, 0x74, 0xD9],
    [0xFF, 0x41, 0x36],
    [0x2E, 0xCC, 0x40],
    [0xFF, 0xDC, 0x00],
    [0xAA, 0xAA, 0xAA],
    [0xF0, 0x12, 0xBE],
    [0xFF, 0x85, 0x1B],
    [0x7F, 0xDB, 0xFF],
    [0x87, 0x0C, 0x25],
];

pub const DEFAULT_CELL_SIZE: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Ansi,
    Ppm,
    Svg,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ansi" => Ok(Format::Ansi),
            "ppm" => Ok(Format::Ppm),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format `{other}` (expected ansi, ppm or svg)")),
        }
    }
}

pub fn hex_color(v: u8) -> String {
    let [r, g, b] = PALETTE[v as usize];
    format!("#{r:02X}{g:02X}{b:02X}")
}

/// Two spaces per cell on a 24-bit background color, one line per row.
pub fn to_ansi(grid: &Grid) -> String {
    let mut out = String::new();
    for r in 0..grid.rows() {
        for c in 0..grid.cols() {
            let [red, green, blue] = PALETTE[grid.get(r, c) as usize];
            let _ = write!(out, "\x1b[48;2;{red};{green};{blue}m  ");
        }
        out.push_str("\x1b[0m\n");
    }
    out
}

/// Binary PPM with `cell` x `cell` pixels per grid cell.
pub fn to_ppm(grid: &Grid, cell: usize) -> Vec<u8> {
    let (w, h) = (grid.cols() * cell, grid.rows() * cell);
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(w * h * 3);
    for py in 0..h {
        for px in 0..w {
            out.extend_from_slice(&PALETTE[grid.get(py / cell, px / cell) as usize]);
        }
    }
    out
}

pub fn to_svg(grid: &Grid, cell: usize) -> String {
    let (w, h) = (grid.cols() * cell, grid.rows() * cell);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" shape-rendering=\"crispEdges\">\n"
    );
    for r in 0..grid.rows() {
        for c in 0..grid.cols() {
            let _ = writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"{cell}\" height=\"{cell}\" fill=\"{}\"/>",
                c * cell,
                r * cell,
                hex_color(grid.get(r, c))
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

pub fn render(grid: &Grid, format: Format, cell: usize) -> Vec<u8> {
    match format {
        Format::Ansi => to_ansi(grid).into_bytes(),
        Format::Ppm => to_ppm(grid, cell),
        Format::Svg => to_svg(grid, cell).into_bytes(),
    }
}
