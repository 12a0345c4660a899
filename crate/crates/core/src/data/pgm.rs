//! Tiled binary PGM (`P5`, maxval 255) rendering of basis vectors.

use std::path::Path;

use faer::MatRef;

use crate::error::{Error, Result};

/// Layout of the tile grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileLayout {
    pub tile_h: usize,
    pub tile_w: usize,
    pub cols: usize,
}

impl TileLayout {
    /// Image size for `count` tiles: tiles separated by one black pixel, no outer border.
    pub fn image_size(&self, count: usize) -> (usize, usize) {
        let cols = self.cols.min(count).max(1);
        let rows = count.div_ceil(self.cols).max(1);
        (
            rows * self.tile_h + rows - 1,
            cols * self.tile_w + cols - 1,
        )
    }
}

/// Renders each row of `basis` as one min-max normalized tile. Constant tiles
/// map to mid-gray 128.
pub fn render_pgm_grid(basis: MatRef<'_, f64>, layout: TileLayout) -> Result<Vec<u8>> {
    let TileLayout { tile_h, tile_w, cols } = layout;
    if tile_h == 0 || tile_w == 0 || cols == 0 {
        return Err(Error::usage("tile dimensions and column count must be positive"));
    }
    if basis.ncols() != tile_h * tile_w {
        return Err(Error::usage(format!(
            "basis vectors have {} entries, tile {tile_h}x{tile_w} needs {}",
            basis.ncols(),
            tile_h * tile_w
        )));
    }
    let count = basis.nrows();
    if count == 0 {
        return Err(Error::usage("no basis vectors to render"));
    }
    let (height, width) = layout.image_size(count);
    let mut pixels = vec![0u8; height * width];
    for t in 0..count {
        let vals: Vec<f64> = (0..basis.ncols()).map(|j| basis.read(t, j)).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = hi - lo;
        let (tr, tc) = (t / cols, t % cols);
        let (y0, x0) = (tr * (tile_h + 1), tc * (tile_w + 1));
        for r in 0..tile_h {
            for c in 0..tile_w {
                let v = vals[r * tile_w + c];
                let g = if range > 0.0 && range.is_finite() {
                    (255.0 * (v - lo) / range).round().clamp(0.0, 255.0) as u8
                } else {
                    128
                };
                pixels[(y0 + r) * width + x0 + c] = g;
            }
        }
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(pixels);
    Ok(out)
}

pub fn emit_pgm_grid(basis: MatRef<'_, f64>, layout: TileLayout, path: impl AsRef<Path>) -> Result<()> {
    let bytes = render_pgm_grid(basis, layout)?;
    let path = path.as_ref();
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Splits a P5 image into `(width, height, pixels)`.
pub fn parse_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PGM header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P5" || fields[3] != "255" {
        return Err(Error::Format("expected a P5 image with maxval 255".into()));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|e| Error::Format(format!("bad PGM size: {e}")));
    let (w, h) = (parse(&fields[1])?, parse(&fields[2])?);
    let body = &bytes[pos + 1..];
    if body.len() != w * h {
        return Err(Error::Format(format!("PGM body has {} bytes, expected {}", body.len(), w * h)));
    }
    Ok((w, h, body.to_vec()))
}
