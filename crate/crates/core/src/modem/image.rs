//! Black-and-white images for the fax modulator: a bitmap type, procedural
//! test charts and PBM loading.

use std::path::Path;

use rand::Rng as _;

use crate::{seed, Error, Result};

/// Row-major 1-bit image; `true` is white.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param("image", "width and height must be non-zero"));
        }
        if pixels.len() != width * height {
            return Err(Error::param(
                "image",
                format!("{} pixels for a {width}x{height} image", pixels.len()),
            ));
        }
        Ok(BinaryImage { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, white: bool) -> Result<Self> {
        Self::new(width, height, vec![white; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[bool] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    pub fn white_fraction(&self) -> f64 {
        self.pixels.iter().filter(|&&p| p).count() as f64 / self.pixels.len() as f64
    }

    /// Rows `start..start+count`, wrapping around the bottom edge.
    pub fn rows_wrapping(&self, start: usize, count: usize) -> BinaryImage {
        let mut pixels = Vec::with_capacity(count * self.width);
        for r in 0..count {
            pixels.extend_from_slice(self.row((start + r) % self.height));
        }
        BinaryImage {
            width: self.width,
            height: count,
            pixels,
        }
    }
}

/// Pixels per line of a 576-IOC chart.
pub const FAX_LINE_PIXELS: usize = 1809;
/// Rows in a full procedural page.
pub const CHART_PAGE_ROWS: usize = 1200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    Text,
    Gradient,
    Weather,
}

fn hash2(seed: u64, a: u64, b: u64) -> u64 {
    seed::derive(seed::derive(seed, a), b)
}

/// Rows `first_row..first_row+rows` of a procedural page of the given kind.
/// Pixels are pure functions of `(seed, x, y)`, so any band of the page can
/// be rendered on its own.
pub fn procedural_chart(
    kind: ChartKind,
    width: usize,
    first_row: usize,
    rows: usize,
    seed: u64,
) -> Result<BinaryImage> {
    if width == 0 || rows == 0 {
        return Err(Error::param("image", "width and rows must be non-zero"));
    }
    let mut rng = seed::rng(seed);
    let mut pixels = Vec::with_capacity(width * rows);
    match kind {
        ChartKind::Text => {
            let cell_w = rng.random_range(10..=18usize);
            let cell_h = cell_w * 3 / 2;
            let line_h = cell_h + rng.random_range(4..=cell_h / 2);
            let margin = rng.random_range(20..120usize);
            for y in first_row..first_row + rows {
                let line = y / line_h;
                let ly = y % line_h;
                for x in 0..width {
                    let mut white = true;
                    if x >= margin && ly < cell_h {
                        let cell = (x - margin) / cell_w;
                        let h = hash2(seed, line as u64, cell as u64);
                        // Short gaps between words, ragged line ends.
                        let line_len = 20 + (hash2(seed, line as u64, u64::MAX) % 100) as usize;
                        let is_space = h % 7 == 0 || cell >= line_len;
                        if !is_space {
                            let gx = ((x - margin) % cell_w) * 5 / cell_w;
                            let gy = ly * 7 / cell_h;
                            if gx < 4 && gy < 6 {
                                let bit = (h >> (8 + gy * 4 + gx)) & 1;
                                white = bit == 0;
                            }
                        }
                    }
                    pixels.push(white);
                }
            }
        }
        ChartKind::Gradient => {
            const BAYER: [[u8; 4]; 4] = [[0, 8, 2, 10], [12, 4, 14, 6], [3, 11, 1, 9], [15, 7, 13, 5]];
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let (s, c) = angle.sin_cos();
            let period = rng.random_range(300.0..1500.0);
            for y in first_row..first_row + rows {
                for x in 0..width {
                    let u = (x as f64 * c + y as f64 * s) / period;
                    let level = u.rem_euclid(1.0);
                    let threshold = (BAYER[y % 4][x % 4] as f64 + 0.5) / 16.0;
                    pixels.push(level > threshold);
                }
            }
        }
        ChartKind::Weather => {
            let n_centres = rng.random_range(3..8);
            let centres: Vec<(f64, f64, f64, f64)> = (0..n_centres)
                .map(|_| {
                    (
                        rng.random_range(0.0..width as f64),
                        rng.random_range(0.0..CHART_PAGE_ROWS as f64),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(150.0..500.0),
                    )
                })
                .collect();
            let spacing = rng.random_range(0.08..0.2);
            let grid = rng.random_range(120..240usize);
            for y in first_row..first_row + rows {
                for x in 0..width {
                    let (xf, yf) = (x as f64, y as f64);
                    let field = |xf: f64, yf: f64| -> f64 {
                        centres
                            .iter()
                            .map(|&(cx, cy, a, r)| a * (-((xf - cx).powi(2) + (yf - cy).powi(2)) / (r * r)).exp())
                            .sum()
                    };
                    let f0 = (field(xf, yf) / spacing).floor();
                    let f1 = (field(xf + 2.0, yf) / spacing).floor();
                    let f2 = (field(xf, yf + 2.0) / spacing).floor();
                    let isobar = f0 != f1 || f0 != f2;
                    let grid_line = x % grid == 0 || y % grid == 0;
                    pixels.push(!(isobar || grid_line));
                }
            }
        }
    }
    BinaryImage::new(width, rows, pixels)
}

/// Loads a PBM image (plain `P1` or raw `P4`). In PBM a set bit is black.
pub fn load_pbm(path: &Path) -> Result<BinaryImage> {
    let data = std::fs::read(path).map_err(|e| Error::file(path, e))?;
    parse_pbm(&data)
}

pub fn parse_pbm(data: &[u8]) -> Result<BinaryImage> {
    let mut pos = 0usize;
    let token = |pos: &mut usize| -> Result<String> {
        loop {
            while *pos < data.len() && data[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < data.len() && data[*pos] == b'#' {
                while *pos < data.len() && data[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < data.len() && !data[*pos].is_ascii_whitespace() && data[*pos] != b'#' {
            *pos += 1;
        }
        if start == *pos {
            return Err(Error::format(start as u64, "unexpected end of PBM header"));
        }
        Ok(String::from_utf8_lossy(&data[start..*pos]).into_owned())
    };
    let magic = token(&mut pos)?;
    let dim = |s: String, at: usize| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| Error::format(at as u64, format!("bad PBM dimension `{s}`")))
    };
    let w = dim(token(&mut pos)?, pos)?;
    let h = dim(token(&mut pos)?, pos)?;
    if w == 0 || h == 0 {
        return Err(Error::format(pos as u64, "PBM image has zero size"));
    }
    let mut pixels = Vec::with_capacity(w * h);
    match magic.as_str() {
        "P1" => {
            while pixels.len() < w * h {
                while pos < data.len() && (data[pos].is_ascii_whitespace()) {
                    pos += 1;
                }
                match data.get(pos) {
                    Some(b'0') => pixels.push(true),
                    Some(b'1') => pixels.push(false),
                    Some(_) => return Err(Error::format(pos as u64, "PBM pixel must be 0 or 1")),
                    None => return Err(Error::format(pos as u64, "truncated PBM pixel data")),
                }
                pos += 1;
            }
        }
        "P4" => {
            pos += 1;
            let stride = w.div_ceil(8);
            if data.len() < pos + stride * h {
                return Err(Error::format(data.len() as u64, "truncated PBM raster"));
            }
            for y in 0..h {
                let row = &data[pos + y * stride..pos + (y + 1) * stride];
                for x in 0..w {
                    pixels.push((row[x / 8] >> (7 - x % 8)) & 1 == 0);
                }
            }
        }
        other => return Err(Error::format(0, format!("not a PBM file (magic `{other}`)"))),
    }
    BinaryImage::new(w, h, pixels)
}
