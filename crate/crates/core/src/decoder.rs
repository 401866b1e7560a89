//! Detection records, heatmap peak extraction and 3D box decoding.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::features::{depth_decode, depth_encode, quantize, FeatureMapStack, Plane};
use crate::geometry::{
    decode_orientation, Box2D, Box3D, CameraModel, Dims, OrientationCode, ORIENTATION_LEN,
};

/// Default number of peaks kept per image.
pub const DEFAULT_MAX_PEAKS: usize = 100;
/// Default minimum peak score.
pub const DEFAULT_PEAK_THRESHOLD: f64 = 0.3;

/// Outputs of the image-only regression heads at an object center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimaryOutputs {
    /// Camera z-depth of the object center, meters.
    pub depth: f64,
    pub dims: Dims,
    pub orientation: OrientationCode,
    /// Sub-cell position of the center, in cells.
    pub offset: [f64; 2],
    /// 2D box width and height, pixels.
    pub size2d: [f64; 2],
}

/// Outputs recomputed after radar features are attached.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondaryOutputs {
    pub depth: f64,
    pub orientation: OrientationCode,
    pub velocity: [f64; 2],
    pub attribute_scores: Vec<f64>,
}

/// One preliminary detection and everything regressed at its center.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    /// Keypoint (projected 3D center) in pixels.
    pub center_px: [f64; 2],
    pub box2d: Box2D,
    pub class_id: usize,
    pub score: f64,
    pub primary: PrimaryOutputs,
    pub secondary: Option<SecondaryOutputs>,
    /// Attribute evidence handed to the secondary attribute head.
    pub attribute_scores: Vec<f64>,
    pub gt_box3d: Option<Box3D>,
}

impl DetectionRecord {
    pub fn new(
        center_px: [f64; 2],
        box2d: Box2D,
        class_id: usize,
        score: f64,
        primary: PrimaryOutputs,
    ) -> Self {
        Self {
            center_px,
            box2d,
            class_id,
            score,
            primary,
            secondary: None,
            attribute_scores: Vec::new(),
            gt_box3d: None,
        }
    }

    pub fn with_ground_truth(mut self, gt: Box3D) -> Self {
        self.gt_box3d = Some(gt);
        self
    }

    pub fn with_attribute_scores(mut self, scores: Vec<f64>) -> Self {
        self.attribute_scores = scores;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.score) {
            return Err(Error::InvalidParameter("detection score must lie in [0, 1]"));
        }
        if !(self.primary.depth > 0.0) {
            return Err(Error::InvalidDepth(self.primary.depth));
        }
        if !self.primary.dims.is_valid() {
            return Err(Error::InvalidBox("dimensions must be positive"));
        }
        Ok(())
    }

    /// The 3D box implied by the primary outputs at `center_px`.
    pub fn estimated_box(&self, cam: &CameraModel) -> Result<Box3D> {
        if !(self.primary.depth > 0.0) {
            return Err(Error::InvalidDepth(self.primary.depth));
        }
        let [u, v] = self.center_px;
        let center = cam.camera_to_ego(cam.unproject(u, v, self.primary.depth));
        let yaw = decode_orientation(&self.primary.orientation, cam.ray_angle(u, v));
        Box3D::new(center, self.primary.dims, yaw, self.class_id)
    }

    /// The heatmap peak this record sits on.
    pub fn peak(&self, stride: usize) -> Peak {
        let [x, y] = quantize(self.center_px, stride);
        Peak {
            cell: [x.max(0) as usize, y.max(0) as usize],
            score: self.score,
            class_id: self.class_id,
        }
    }
}

/// Cell index and sub-cell offset of a pixel at the given stride.
pub fn cell_and_offset(center_px: [f64; 2], stride: usize) -> ([usize; 2], [f64; 2]) {
    let r = stride as f64;
    let [x, y] = quantize(center_px, stride);
    (
        [x.max(0) as usize, y.max(0) as usize],
        [center_px[0] / r - x as f64, center_px[1] / r - y as f64],
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub cell: [usize; 2],
    pub score: f64,
    pub class_id: usize,
}

/// Local maxima over 3×3 windows of per-class heatmaps. A cell equal to a
/// neighbor survives only if it comes first in row-major order. Peaks below
/// `threshold` are dropped and the best `k` are returned, highest score first.
pub fn extract_peaks(heatmaps: &[Plane], k: usize, threshold: f64) -> Vec<Peak> {
    let mut peaks = Vec::new();
    for (class_id, plane) in heatmaps.iter().enumerate() {
        let (w, h) = (plane.width(), plane.height());
        for y in 0..h {
            for x in 0..w {
                let v = plane.get(x, y);
                if v < threshold || !is_local_max(plane, x, y) {
                    continue;
                }
                peaks.push(Peak {
                    cell: [x, y],
                    score: v,
                    class_id,
                });
            }
        }
    }
    peaks.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.class_id.cmp(&b.class_id))
            .then(a.cell[1].cmp(&b.cell[1]))
            .then(a.cell[0].cmp(&b.cell[0]))
    });
    peaks.truncate(k);
    peaks
}

fn is_local_max(plane: &Plane, x: usize, y: usize) -> bool {
    let v = plane.get(x, y);
    let idx = y * plane.width() + x;
    for ny in y.saturating_sub(1)..=(y + 1).min(plane.height() - 1) {
        for nx in x.saturating_sub(1)..=(x + 1).min(plane.width() - 1) {
            let n = plane.get(nx, ny);
            let nidx = ny * plane.width() + nx;
            if n > v || (n == v && nidx < idx) {
                return false;
            }
        }
    }
    true
}

/// Decodes one peak into an egocentric 3D box.
pub fn decode_box(
    peak: &Peak,
    record: &DetectionRecord,
    stride: usize,
    cam: &CameraModel,
    use_secondary: bool,
    index: usize,
) -> Result<Box3D> {
    let r = stride as f64;
    let u = (peak.cell[0] as f64 + record.primary.offset[0]) * r;
    let v = (peak.cell[1] as f64 + record.primary.offset[1]) * r;
    let secondary = match (&record.secondary, use_secondary) {
        (Some(s), true) => Some(s),
        (None, true) => return Err(Error::MissingSecondary { index }),
        (_, false) => None,
    };
    let depth = secondary.map_or(record.primary.depth, |s| s.depth);
    if !(depth > 0.0) {
        return Err(Error::InvalidDepth(depth));
    }
    let center = cam.camera_to_ego(cam.unproject(u, v, depth));
    let orientation = secondary.map_or(&record.primary.orientation, |s| &s.orientation);
    let yaw = decode_orientation(orientation, cam.ray_angle(u, v));
    let velocity = secondary.map_or([0.0, 0.0], |s| s.velocity);
    let attribute = secondary.and_then(|s| argmax(&s.attribute_scores));
    let mut b = Box3D::new(center, record.primary.dims, yaw, peak.class_id)?;
    b.velocity = velocity;
    b.attribute_id = attribute;
    b.score = peak.score;
    Ok(b)
}

pub fn decode_boxes(
    peaks: &[Peak],
    records: &[DetectionRecord],
    stride: usize,
    cam: &CameraModel,
    use_secondary: bool,
) -> Result<Vec<Box3D>> {
    if peaks.len() != records.len() {
        return Err(Error::ShapeMismatch {
            expected: peaks.len(),
            actual: records.len(),
        });
    }
    peaks
        .iter()
        .zip(records)
        .enumerate()
        .map(|(i, (p, r))| decode_box(p, r, stride, cam, use_secondary, i))
        .collect()
}

fn argmax(scores: &[f64]) -> Option<usize> {
    scores
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |best, (i, &s)| match best {
            Some((_, b)) if b >= s => best,
            _ => Some((i, s)),
        })
        .map(|(i, _)| i)
}

/// Regression channel names used by [`write_regression`] and [`gather_record`].
pub mod channels {
    pub const DEPTH: &str = "depth";
    pub const DIMS: [&str; 3] = ["dim_w", "dim_l", "dim_h"];
    pub const OFFSET: [&str; 2] = ["offset_x", "offset_y"];
    pub const SIZE2D: [&str; 2] = ["size_w", "size_h"];
    pub const ROTATION: [&str; 8] = ["rot0", "rot1", "rot2", "rot3", "rot4", "rot5", "rot6", "rot7"];
}

/// Writes a record's primary outputs at its center cell. Depth is stored
/// through [`depth_encode`].
pub fn write_regression(stack: &mut FeatureMapStack, record: &DetectionRecord) -> Result<()> {
    let ([x, y], offset) = cell_and_offset(record.center_px, stack.stride());
    if x >= stack.width() || y >= stack.height() {
        return Err(Error::InvalidParameter("record center lies outside the feature grid"));
    }
    let p = &record.primary;
    stack.plane_mut(channels::DEPTH).set(x, y, depth_encode(p.depth)?);
    for (name, v) in channels::DIMS.iter().zip(p.dims.to_array()) {
        stack.plane_mut(name).set(x, y, v);
    }
    for (name, v) in channels::OFFSET.iter().zip(offset) {
        stack.plane_mut(name).set(x, y, v);
    }
    for (name, v) in channels::SIZE2D.iter().zip(p.size2d) {
        stack.plane_mut(name).set(x, y, v);
    }
    for (name, v) in channels::ROTATION.iter().zip(p.orientation) {
        stack.plane_mut(name).set(x, y, v);
    }
    Ok(())
}

/// Reads the primary outputs at a peak back out of the regression planes.
pub fn gather_record(stack: &FeatureMapStack, peak: &Peak) -> Result<DetectionRecord> {
    let [x, y] = peak.cell;
    let read = |name: &str| -> Result<f64> {
        stack
            .get(name)
            .map(|p| p.get(x, y))
            .ok_or(Error::InvalidParameter("missing regression channel"))
    };
    let depth = depth_decode(read(channels::DEPTH)?)?;
    let dims = Dims::new(read(channels::DIMS[0])?, read(channels::DIMS[1])?, read(channels::DIMS[2])?);
    let offset = [read(channels::OFFSET[0])?, read(channels::OFFSET[1])?];
    let size2d = [read(channels::SIZE2D[0])?, read(channels::SIZE2D[1])?];
    let mut orientation = [0.0; ORIENTATION_LEN];
    for (o, name) in orientation.iter_mut().zip(channels::ROTATION) {
        *o = read(name)?;
    }
    let r = stack.stride() as f64;
    let center_px = [(x as f64 + offset[0]) * r, (y as f64 + offset[1]) * r];
    Ok(DetectionRecord::new(
        center_px,
        Box2D::new(center_px[0], center_px[1], size2d[0], size2d[1]),
        peak.class_id,
        peak.score,
        PrimaryOutputs {
            depth,
            dims,
            orientation,
            offset,
            size2d,
        },
    ))
}
