//! Feature-plane generation at output stride R: Gaussian keypoint heatmaps,
//! radar feature channels and the depth transform.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Box2D;
use crate::math;

/// Default output stride, pixels per cell.
pub const DEFAULT_STRIDE: usize = 4;
/// Default minimum corner overlap used to size keypoint Gaussians.
pub const DEFAULT_MIN_OVERLAP: f64 = 0.7;
/// Default radar feature extent relative to the 2D box size.
pub const DEFAULT_RADAR_ALPHA: f64 = 0.3;
/// Default depth normalizer, meters.
pub const DEFAULT_DEPTH_NORM: f64 = 60.0;
/// Default velocity normalizer, m/s.
pub const DEFAULT_VELOCITY_NORM: f64 = 10.0;

// exp(-x) is exactly zero in f64 for x beyond ~745; no need to visit those cells.
const GAUSSIAN_EXTENT_SIGMAS: f64 = 38.7;

/// A row-major grid of values.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::ShapeMismatch {
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub name: String,
    pub plane: Plane,
}

/// Named planes sharing one grid shape.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMapStack {
    width: usize,
    height: usize,
    stride: usize,
    channels: Vec<Channel>,
}

impl FeatureMapStack {
    pub fn new(width: usize, height: usize, stride: usize) -> Self {
        Self {
            width,
            height,
            stride,
            channels: Vec::new(),
        }
    }

    /// Grid covering an image of the given pixel size (rounded down).
    pub fn for_image(image_width: u32, image_height: u32, stride: usize) -> Self {
        Self::new(image_width as usize / stride, image_height as usize / stride, stride)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// Appends a plane, replacing any channel with the same name.
    pub fn insert(&mut self, name: impl Into<String>, plane: Plane) -> Result<()> {
        if plane.width != self.width || plane.height != self.height {
            return Err(Error::ShapeMismatch {
                expected: self.width * self.height,
                actual: plane.width * plane.height,
            });
        }
        let name = name.into();
        match self.channels.iter_mut().find(|c| c.name == name) {
            Some(c) => c.plane = plane,
            None => self.channels.push(Channel { name, plane }),
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Plane> {
        self.channels.iter().find(|c| c.name == name).map(|c| &c.plane)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Plane> {
        self.channels
            .iter_mut()
            .find(|c| c.name == name)
            .map(|c| &mut c.plane)
    }

    /// Returns the named plane, creating a zero plane if missing.
    pub fn plane_mut(&mut self, name: &str) -> &mut Plane {
        let idx = match self.channels.iter().position(|c| c.name == name) {
            Some(i) => i,
            None => {
                self.channels.push(Channel {
                    name: name.into(),
                    plane: Plane::zeros(self.width, self.height),
                });
                self.channels.len() - 1
            }
        };
        &mut self.channels[idx].plane
    }
}

/// Largest center displacement (in the units of `w`, `h`) for which a box
/// translated, shrunk or grown by that amount keeps corner IoU ≥ `min_overlap`
/// with the original. Requires `w, h > 0` and `0 < min_overlap < 1`.
pub fn gaussian_radius(w: f64, h: f64, min_overlap: f64) -> f64 {
    debug_assert!(w > 0.0 && h > 0.0);
    debug_assert!(min_overlap > 0.0 && min_overlap < 1.0);
    let o = min_overlap;
    let (s, p) = (w + h, w * h);

    // both corners shifted the same way: (w-r)(h-r) / (2wh - (w-r)(h-r)) = o
    let c1 = p * (1.0 - o) / (1.0 + o);
    let r1 = (s - math::sqrt(s * s - 4.0 * c1)) / 2.0;

    // both corners pulled inward: (w-2r)(h-2r) / wh = o
    let r2 = (2.0 * s - math::sqrt(4.0 * s * s - 16.0 * p * (1.0 - o))) / 8.0;

    // both corners pushed outward: wh / ((w+2r)(h+2r)) = o
    let b3 = 2.0 * o * s;
    let r3 = (-b3 + math::sqrt(b3 * b3 + 16.0 * o * (1.0 - o) * p)) / (8.0 * o);

    r1.min(r2).min(r3).max(0.0)
}

/// Gaussian standard deviation for a box, `max(radius, 1) / 3`.
pub fn gaussian_sigma(w: f64, h: f64, min_overlap: f64) -> f64 {
    gaussian_radius(w, h, min_overlap).max(1.0) / 3.0
}

/// Grid cell holding a pixel at the given stride.
pub fn quantize(center_px: [f64; 2], stride: usize) -> [i64; 2] {
    let r = stride as f64;
    [
        math::floor(center_px[0] / r) as i64,
        math::floor(center_px[1] / r) as i64,
    ]
}

/// Max-combines `exp(-|q - center|² / 2σ²)` into `plane`.
pub fn draw_gaussian(plane: &mut Plane, center: [i64; 2], sigma: f64) {
    let reach = math::ceil(GAUSSIAN_EXTENT_SIGMAS * sigma) as i64;
    let (w, h) = (plane.width as i64, plane.height as i64);
    let x0 = (center[0] - reach).max(0);
    let x1 = (center[0] + reach).min(w - 1);
    let y0 = (center[1] - reach).max(0);
    let y1 = (center[1] + reach).min(h - 1);
    let denom = 2.0 * sigma * sigma;
    for y in y0..=y1 {
        for x in x0..=x1 {
            let (dx, dy) = ((x - center[0]) as f64, (y - center[1]) as f64);
            let v = math::exp(-(dx * dx + dy * dy) / denom);
            let cell = &mut plane.data[(y * w + x) as usize];
            if v > *cell {
                *cell = v;
            }
        }
    }
}

/// One object for the ground-truth keypoint heatmap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatmapAnnotation {
    pub center_px: [f64; 2],
    pub class_id: usize,
    pub box2d: Box2D,
}

/// Per-class ground-truth heatmaps. Each object contributes a Gaussian
/// centered at its quantized center cell, with σ sized from its 2D box in
/// cells; overlapping contributions are max-combined.
pub fn render_gt_heatmap(
    annotations: &[HeatmapAnnotation],
    width: usize,
    height: usize,
    num_classes: usize,
    stride: usize,
    min_overlap: f64,
) -> Vec<Plane> {
    let mut planes = vec![Plane::zeros(width, height); num_classes];
    let r = stride as f64;
    for a in annotations {
        let Some(plane) = planes.get_mut(a.class_id) else {
            continue;
        };
        let sigma = gaussian_sigma(a.box2d.w / r, a.box2d.h / r, min_overlap);
        draw_gaussian(plane, quantize(a.center_px, stride), sigma);
    }
    planes
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarFeatureParams {
    pub alpha: f64,
    pub depth_norm: f64,
    pub velocity_norm: f64,
}

impl Default for RadarFeatureParams {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_RADAR_ALPHA,
            depth_norm: DEFAULT_DEPTH_NORM,
            velocity_norm: DEFAULT_VELOCITY_NORM,
        }
    }
}

/// Radar measurement attached to one associated object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarFeatureSource {
    /// Object center in pixels (placement of the rectangle).
    pub center_px: [f64; 2],
    /// Object 2D box in pixels (rectangle size).
    pub box2d: Box2D,
    pub depth: f64,
    pub velocity: [f64; 2],
}

/// Radar depth and velocity planes, in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarPlanes {
    pub depth: Plane,
    pub vx: Plane,
    pub vy: Plane,
}

/// Fills, for each source, the cells within `alpha·w` and `alpha·h` (in
/// cells) of its quantized center with `depth / M_d` and `v / M_v`
/// (velocities clamped to `[-1, 1]`). Where rectangles overlap the source
/// with the smaller depth wins; exact depth ties fall back to the smaller
/// velocity so the result does not depend on input order.
pub fn rasterize_radar_features(
    sources: &[RadarFeatureSource],
    width: usize,
    height: usize,
    stride: usize,
    params: &RadarFeatureParams,
) -> Result<RadarPlanes> {
    if !(params.alpha > 0.0 && params.depth_norm > 0.0 && params.velocity_norm > 0.0) {
        return Err(Error::InvalidParameter(
            "alpha and normalizers must be positive",
        ));
    }
    let r = stride as f64;
    let mut out = RadarPlanes {
        depth: Plane::zeros(width, height),
        vx: Plane::zeros(width, height),
        vy: Plane::zeros(width, height),
    };
    let mut owner: Vec<Option<(f64, f64, f64)>> = vec![None; width * height];
    for s in sources {
        let c = quantize(s.center_px, stride);
        let (hx, hy) = (params.alpha * s.box2d.w / r, params.alpha * s.box2d.h / r);
        let x0 = (c[0] - math::floor(hx) as i64).max(0);
        let x1 = (c[0] + math::floor(hx) as i64).min(width as i64 - 1);
        let y0 = (c[1] - math::floor(hy) as i64).max(0);
        let y1 = (c[1] + math::floor(hy) as i64).min(height as i64 - 1);
        let key = (s.depth, s.velocity[0], s.velocity[1]);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let idx = y as usize * width + x as usize;
                let wins = match owner[idx] {
                    None => true,
                    Some(cur) => lexicographic_less(key, cur),
                };
                if wins {
                    owner[idx] = Some(key);
                    out.depth.data[idx] = s.depth / params.depth_norm;
                    out.vx.data[idx] = (s.velocity[0] / params.velocity_norm).clamp(-1.0, 1.0);
                    out.vy.data[idx] = (s.velocity[1] / params.velocity_norm).clamp(-1.0, 1.0);
                }
            }
        }
    }
    Ok(out)
}

fn lexicographic_less(a: (f64, f64, f64), b: (f64, f64, f64)) -> bool {
    a.0.total_cmp(&b.0)
        .then(a.1.total_cmp(&b.1))
        .then(a.2.total_cmp(&b.2))
        .is_lt()
}

/// Maps depth in meters onto `(0, 1)`: `1 / (1 + d)`.
pub fn depth_encode(depth: f64) -> Result<f64> {
    if !(depth > 0.0) || !depth.is_finite() {
        return Err(Error::Domain {
            what: "depth_encode",
            value: depth,
        });
    }
    Ok(1.0 / (1.0 + depth))
}

/// Inverse of [`depth_encode`]: `1 / y - 1`.
pub fn depth_decode(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::Domain {
            what: "depth_decode",
            value: y,
        });
    }
    Ok(1.0 / y - 1.0)
}

/// Depth from a raw (pre-sigmoid) network output: `1 / sigmoid(x) - 1 = e^{-x}`.
pub fn depth_from_logit(x: f64) -> f64 {
    math::exp(-x)
}
