//! Bird's-eye-view PNG of a scene: ground truth in red, detections in cyan,
//! radar returns in green, ground-truth velocity arrows in red and predicted
//! velocity arrows in blue. The ego vehicle faces up; grid lines are 10 m apart.

use std::path::Path;

use image::{Rgb, RgbImage};
use imageproc::drawing::{draw_filled_circle_mut, draw_line_segment_mut};
use rcfuse_core::geometry::Box3D;
use rcfuse_core::radar::{aggregate_sweeps, AggregationConfig};

use crate::error::{Error, Result};
use crate::schema::Scene;

pub const GT_COLOR: Rgb<u8> = Rgb([255, 0, 0]);
pub const DET_COLOR: Rgb<u8> = Rgb([0, 255, 255]);
pub const RADAR_COLOR: Rgb<u8> = Rgb([0, 200, 0]);
pub const GT_VELOCITY_COLOR: Rgb<u8> = Rgb([255, 0, 0]);
pub const DET_VELOCITY_COLOR: Rgb<u8> = Rgb([0, 0, 255]);
const BACKGROUND: Rgb<u8> = Rgb([255, 255, 255]);
const GRID: Rgb<u8> = Rgb([220, 220, 220]);
const AXIS: Rgb<u8> = Rgb([120, 120, 120]);

#[derive(Debug, Clone, PartialEq)]
pub struct RenderConfig {
    /// Forward range shown, meters (bottom to top).
    pub x_range: [f64; 2],
    /// Lateral range shown, meters (right to left).
    pub y_range: [f64; 2],
    pub pixels_per_meter: f64,
    /// An arrow covers the distance traveled in this many seconds.
    pub arrow_seconds: f64,
    pub grid_spacing: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            x_range: [-5.0, 65.0],
            y_range: [-35.0, 35.0],
            pixels_per_meter: 8.0,
            arrow_seconds: 1.0,
            grid_spacing: 10.0,
        }
    }
}

struct Canvas<'a> {
    img: RgbImage,
    cfg: &'a RenderConfig,
}

impl Canvas<'_> {
    fn to_px(&self, x: f64, y: f64) -> (f32, f32) {
        let s = self.cfg.pixels_per_meter;
        (((self.cfg.y_range[1] - y) * s) as f32, ((self.cfg.x_range[1] - x) * s) as f32)
    }

    fn line(&mut self, a: [f64; 2], b: [f64; 2], color: Rgb<u8>) {
        let (pa, pb) = (self.to_px(a[0], a[1]), self.to_px(b[0], b[1]));
        draw_line_segment_mut(&mut self.img, pa, pb, color);
    }

    fn footprint(&mut self, b: &Box3D, color: Rgb<u8>) {
        let (s, c) = b.yaw.sin_cos();
        let (hw, hl) = (b.dims.w / 2.0, b.dims.l / 2.0);
        let corners: Vec<[f64; 2]> = [(hw, hl), (-hw, hl), (-hw, -hl), (hw, -hl)]
            .iter()
            .map(|&(dx, dy)| [b.center.x + c * dx - s * dy, b.center.y + s * dx + c * dy])
            .collect();
        for k in 0..4 {
            self.line(corners[k], corners[(k + 1) % 4], color);
        }
    }

    fn arrow(&mut self, b: &Box3D, color: Rgb<u8>) {
        let t = self.cfg.arrow_seconds;
        let [vx, vy] = b.velocity;
        let len = vx.hypot(vy) * t;
        if len * self.cfg.pixels_per_meter < 1.0 {
            return;
        }
        let start = [b.center.x, b.center.y];
        let tip = [b.center.x + vx * t, b.center.y + vy * t];
        self.line(start, tip, color);
        let head = (0.3 * len).min(1.0);
        let dir = vy.atan2(vx);
        for side in [-1.0, 1.0] {
            let a = dir + std::f64::consts::PI + side * 0.45;
            self.line(tip, [tip[0] + head * a.cos(), tip[1] + head * a.sin()], color);
        }
    }
}

/// Renders into memory. Deterministic for identical inputs.
pub fn render_image(scene: &Scene, detections: &[Box3D], cfg: &RenderConfig) -> RgbImage {
    let s = cfg.pixels_per_meter;
    let w = ((cfg.y_range[1] - cfg.y_range[0]) * s).round().max(1.0) as u32;
    let h = ((cfg.x_range[1] - cfg.x_range[0]) * s).round().max(1.0) as u32;
    let mut cv = Canvas {
        img: RgbImage::from_pixel(w, h, BACKGROUND),
        cfg,
    };

    let [x0, x1] = cfg.x_range;
    let [y0, y1] = cfg.y_range;
    let g = cfg.grid_spacing;
    if g > 0.0 {
        let mut x = (x0 / g).ceil() * g;
        while x <= x1 {
            cv.line([x, y0], [x, y1], if x == 0.0 { AXIS } else { GRID });
            x += g;
        }
        let mut y = (y0 / g).ceil() * g;
        while y <= y1 {
            cv.line([x0, y], [x1, y], if y == 0.0 { AXIS } else { GRID });
            y += g;
        }
    }

    let points = aggregate_sweeps(
        &scene.radar_sweeps,
        &scene.ego_pose,
        scene.timestamp,
        &AggregationConfig::default(),
    );
    for p in &points {
        let (u, v) = cv.to_px(p.position.x, p.position.y);
        draw_filled_circle_mut(&mut cv.img, (u.round() as i32, v.round() as i32), 2, RADAR_COLOR);
    }
    for b in &scene.gt_boxes {
        cv.footprint(b, GT_COLOR);
    }
    for b in detections {
        cv.footprint(b, DET_COLOR);
    }
    for b in &scene.gt_boxes {
        cv.arrow(b, GT_VELOCITY_COLOR);
    }
    for b in detections {
        cv.arrow(b, DET_VELOCITY_COLOR);
    }
    cv.img
}

pub fn render_bev(scene: &Scene, detections: &[Box3D], path: &Path, cfg: &RenderConfig) -> Result<()> {
    render_image(scene, detections, cfg)
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| match source {
            image::ImageError::IoError(e) => Error::io(path, e),
            source => Error::Image {
                path: path.to_owned(),
                source,
            },
        })
}
