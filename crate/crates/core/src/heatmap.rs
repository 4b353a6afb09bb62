//! Per-keypoint score maps and their binary file format.
//!
//! A map cell `(hx, hy)` covers crop pixels `[s·hx, s·(hx+1))` with
//! `s = crop_size / W`; its value is sampled at the cell origin, so crop pixel
//! `u` lands on heatmap coordinate `u / s`. Image coordinates add `crop_offset`.
//!
//! File layout, little-endian:
//! `"HMAP"`, version `u16 = 1`, `K u16`, `H u16`, `W u16`, `crop_size u16`,
//! `crop_offset 2×i32`, then `K·H·W` `f32` values, row-major per map.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::Vector2;

use crate::camera::Keypoints2D;
use crate::error::{Error, Result};
use crate::kinematics::NUM_KEYPOINTS;

pub const MAGIC: &[u8; 4] = b"HMAP";
pub const FORMAT_VERSION: u16 = 1;
pub const DEFAULT_SIZE: usize = 64;
pub const DEFAULT_CROP: u32 = 256;
const HEADER_LEN: usize = 4 + 2 * 5 + 4 * 2;

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapSet {
    pub num_maps: usize,
    pub height: usize,
    pub width: usize,
    /// Side of the square source crop, pixels.
    pub crop_size: u32,
    /// Top-left corner of the crop in the original image, pixels.
    pub crop_offset: [i32; 2],
    /// `num_maps · height · width` scores.
    pub data: Vec<f32>,
}

impl HeatmapSet {
    pub fn zeros(height: usize, width: usize, crop_size: u32, crop_offset: [i32; 2]) -> Self {
        Self {
            num_maps: NUM_KEYPOINTS,
            height,
            width,
            crop_size,
            crop_offset,
            data: vec![0.0; NUM_KEYPOINTS * height * width],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_maps != NUM_KEYPOINTS {
            return Err(Error::InvalidInput(format!(
                "expected {NUM_KEYPOINTS} heatmaps, found {}",
                self.num_maps
            )));
        }
        if self.height == 0 || self.width == 0 || self.crop_size == 0 {
            return Err(Error::InvalidInput("heatmap and crop sizes must be positive".into()));
        }
        if self.data.len() != self.num_maps * self.height * self.width {
            return Err(Error::InvalidInput("heatmap data length mismatch".into()));
        }
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite heatmap score".into()));
        }
        Ok(())
    }

    /// Crop pixels per heatmap cell along x and y.
    pub fn stride(&self) -> (f64, f64) {
        (
            self.crop_size as f64 / self.width as f64,
            self.crop_size as f64 / self.height as f64,
        )
    }

    pub fn map(&self, k: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.data[k * n..(k + 1) * n]
    }

    pub fn map_mut(&mut self, k: usize) -> &mut [f32] {
        let n = self.height * self.width;
        &mut self.data[k * n..(k + 1) * n]
    }

    /// Image pixel to heatmap coordinate.
    pub fn to_grid(&self, uv: &Vector2<f64>) -> Vector2<f64> {
        let (sx, sy) = self.stride();
        Vector2::new(
            (uv.x - self.crop_offset[0] as f64) / sx,
            (uv.y - self.crop_offset[1] as f64) / sy,
        )
    }

    /// Heatmap coordinate to image pixel.
    pub fn to_image(&self, g: &Vector2<f64>) -> Vector2<f64> {
        let (sx, sy) = self.stride();
        Vector2::new(
            g.x * sx + self.crop_offset[0] as f64,
            g.y * sy + self.crop_offset[1] as f64,
        )
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.validate()?;
        let dim = |v: usize, what: &str| {
            u16::try_from(v).map_err(|_| Error::InvalidInput(format!("{what} {v} does not fit in u16")))
        };
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&dim(self.num_maps, "K")?.to_le_bytes());
        out.extend_from_slice(&dim(self.height, "H")?.to_le_bytes());
        out.extend_from_slice(&dim(self.width, "W")?.to_le_bytes());
        out.extend_from_slice(&dim(self.crop_size as usize, "crop size")?.to_le_bytes());
        out.extend_from_slice(&self.crop_offset[0].to_le_bytes());
        out.extend_from_slice(&self.crop_offset[1].to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::parse("heatmap file", m);
        if bytes.len() < HEADER_LEN {
            return Err(bad("truncated header"));
        }
        if &bytes[..4] != MAGIC {
            return Err(bad("bad magic"));
        }
        let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
        let i32_at = |i: usize| i32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let version = u16_at(4);
        if version != FORMAT_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let (k, h, w, crop) = (u16_at(6) as usize, u16_at(8) as usize, u16_at(10) as usize, u16_at(12));
        let offset = [i32_at(14), i32_at(18)];
        let n = k * h * w;
        if bytes.len() != HEADER_LEN + 4 * n {
            return Err(bad(&format!(
                "expected {} data bytes, found {}",
                4 * n,
                bytes.len() - HEADER_LEN
            )));
        }
        let data = bytes[HEADER_LEN..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let set = Self {
            num_maps: k,
            height: h,
            width: w,
            crop_size: crop as u32,
            crop_offset: offset,
            data,
        };
        set.validate().map_err(|e| bad(&e.to_string()))?;
        Ok(set)
    }
}

pub fn read_heatmaps(path: impl AsRef<Path>) -> Result<HeatmapSet> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    HeatmapSet::from_bytes(&bytes)
}

pub fn write_heatmaps(path: impl AsRef<Path>, set: &HeatmapSet) -> Result<()> {
    let path = path.as_ref();
    let bytes = set.to_bytes()?;
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(&bytes))
        .map_err(|e| Error::io(path, e))
}

/// Sub-cell offset along one axis: a quarter cell toward the larger neighbour,
/// zero when the neighbours tie or are missing.
fn quarter_shift(left: Option<f32>, right: Option<f32>) -> f64 {
    match (left, right) {
        (Some(l), Some(r)) if r > l => 0.25,
        (Some(l), Some(r)) if l > r => -0.25,
        (None, Some(r)) if r > 0.0 => 0.25,
        (Some(l), None) if l > 0.0 => -0.25,
        _ => 0.0,
    }
}

/// Peak location and score of every map, in original-image pixels.
///
/// Ties go to the first cell in row-major order. A map with no variation
/// yields the map centre. Confidence is the peak value clamped to `[0, 1]`.
pub fn heatmap_argmax(h: &HeatmapSet) -> Result<Keypoints2D> {
    h.validate()?;
    let (hh, ww) = (h.height, h.width);
    let mut points = Vec::with_capacity(h.num_maps);
    let mut confidence = Vec::with_capacity(h.num_maps);
    for k in 0..h.num_maps {
        let m = h.map(k);
        let (mut best, mut peak) = (0, m[0]);
        let mut lowest = m[0];
        for (i, &v) in m.iter().enumerate() {
            if v > peak {
                best = i;
                peak = v;
            }
            lowest = lowest.min(v);
        }
        let grid = if peak == lowest {
            Vector2::new((ww as f64 - 1.0) / 2.0, (hh as f64 - 1.0) / 2.0)
        } else {
            let (y, x) = (best / ww, best % ww);
            let at = |yy: usize, xx: usize| m[yy * ww + xx];
            let dx = quarter_shift(
                (x > 0).then(|| at(y, x - 1)),
                (x + 1 < ww).then(|| at(y, x + 1)),
            );
            let dy = quarter_shift(
                (y > 0).then(|| at(y - 1, x)),
                (y + 1 < hh).then(|| at(y + 1, x)),
            );
            Vector2::new(x as f64 + dx, y as f64 + dy)
        };
        points.push(h.to_image(&grid));
        confidence.push((peak as f64).clamp(0.0, 1.0));
    }
    let visible = vec![true; points.len()];
    Keypoints2D::new(points, confidence, visible)
}

/// Add an unnormalized Gaussian blob (peak 1 at its continuous centre) to map `k`.
pub fn draw_blob(h: &mut HeatmapSet, k: usize, center_grid: Vector2<f64>, sigma: f64) {
    let ww = h.width;
    let sigma = sigma.max(1e-6);
    let inv = 1.0 / (2.0 * sigma * sigma);
    let reach = (4.0 * sigma).ceil() + 1.0;
    let (x0, x1) = ((center_grid.x - reach).floor(), (center_grid.x + reach).ceil());
    let (y0, y1) = ((center_grid.y - reach).floor(), (center_grid.y + reach).ceil());
    let clamp_x = |v: f64| v.clamp(0.0, ww as f64 - 1.0) as usize;
    let clamp_y = |v: f64| v.clamp(0.0, h.height as f64 - 1.0) as usize;
    if x1 < 0.0 || y1 < 0.0 || x0 > ww as f64 - 1.0 || y0 > h.height as f64 - 1.0 {
        return;
    }
    let (xa, xb, ya, yb) = (clamp_x(x0), clamp_x(x1), clamp_y(y0), clamp_y(y1));
    let m = h.map_mut(k);
    for y in ya..=yb {
        for x in xa..=xb {
            let d2 = (x as f64 - center_grid.x).powi(2) + (y as f64 - center_grid.y).powi(2);
            let v = (-d2 * inv).exp() as f32;
            let cell = &mut m[y * ww + x];
            *cell = cell.max(v);
        }
    }
}
