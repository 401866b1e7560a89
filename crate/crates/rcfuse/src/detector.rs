//! Stand-in for the image detector: turns ground-truth boxes into
//! preliminary detection records under a configurable noise model.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rcfuse_core::decoder::{cell_and_offset, DetectionRecord, PrimaryOutputs};
use rcfuse_core::geometry::{box3d_to_box2d, encode_orientation, Box3D, CameraModel, Dims};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative σ values are fractions of the true quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorNoise {
    /// Relative σ of the primary depth.
    pub depth_sigma: f64,
    /// σ of the keypoint and 2D box position, pixels.
    pub center_px_sigma: f64,
    /// σ of the yaw, radians.
    pub yaw_sigma: f64,
    /// Relative σ of each dimension.
    pub dims_sigma: f64,
    /// Scores are drawn uniformly from this range.
    pub score_range: [f64; 2],
    /// Probability mass the attribute evidence puts on the true attribute.
    pub attribute_confidence: f64,
}

impl Default for DetectorNoise {
    fn default() -> Self {
        Self {
            depth_sigma: 0.1,
            center_px_sigma: 0.0,
            yaw_sigma: 0.0,
            dims_sigma: 0.0,
            score_range: [0.5, 1.0],
            attribute_confidence: 0.9,
        }
    }
}

impl DetectorNoise {
    pub fn noiseless() -> Self {
        Self {
            depth_sigma: 0.0,
            center_px_sigma: 0.0,
            yaw_sigma: 0.0,
            dims_sigma: 0.0,
            score_range: [1.0, 1.0],
            attribute_confidence: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [self.depth_sigma, self.center_px_sigma, self.yaw_sigma, self.dims_sigma];
        if !sigmas.iter().all(|s| *s >= 0.0 && s.is_finite()) {
            return Err(Error::Config("detector noise σ values must be finite and non-negative".into()));
        }
        let [lo, hi] = self.score_range;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::Config("detector score_range must satisfy 0 <= lo <= hi <= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.attribute_confidence) {
            return Err(Error::Config("attribute_confidence must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

fn normal(sigma: f64) -> Normal<f64> {
    Normal::new(0.0, sigma).expect("σ validated as finite and non-negative")
}

/// Attribute evidence with `confidence` on `attribute` and the rest spread
/// evenly. Empty when the box has no attribute.
pub fn attribute_evidence(attribute: Option<usize>, num_attributes: usize, confidence: f64) -> Vec<f64> {
    match attribute {
        Some(a) if a < num_attributes => {
            let rest = if num_attributes > 1 {
                (1.0 - confidence) / (num_attributes - 1) as f64
            } else {
                0.0
            };
            (0..num_attributes).map(|k| if k == a { confidence } else { rest }).collect()
        }
        _ => Vec::new(),
    }
}

/// One preliminary detection for `gt`. The same number of random draws is
/// made whatever the noise levels, so paired runs stay aligned.
pub fn record_from_box<R: Rng>(
    gt: &Box3D,
    cam: &CameraModel,
    stride: usize,
    noise: &DetectorNoise,
    num_attributes: usize,
    rng: &mut R,
) -> Result<DetectionRecord> {
    let center_cam = cam.ego_to_camera(gt.center);
    let px = cam.project(center_cam)?;
    let gt_box2d = box3d_to_box2d(gt, cam)?;

    let pixel = normal(noise.center_px_sigma);
    let (du, dv) = (pixel.sample(rng), pixel.sample(rng));
    let depth_factor = 1.0 + normal(noise.depth_sigma).sample(rng);
    let dim_noise = normal(noise.dims_sigma);
    let dims_factor = [dim_noise.sample(rng), dim_noise.sample(rng), dim_noise.sample(rng)];
    let yaw_error = normal(noise.yaw_sigma).sample(rng);
    let unit: f64 = rng.random();

    let center_px = [px.u + du, px.v + dv];
    let mut box2d = gt_box2d;
    box2d.cx += du;
    box2d.cy += dv;
    // a depth at or behind the camera would be meaningless; keep it positive
    let depth = center_cam.z * depth_factor.max(0.1);
    let dims = Dims::new(
        gt.dims.w * (1.0 + dims_factor[0]).max(0.1),
        gt.dims.l * (1.0 + dims_factor[1]).max(0.1),
        gt.dims.h * (1.0 + dims_factor[2]).max(0.1),
    );
    let ray = cam.ray_angle(center_px[0], center_px[1]);
    let [lo, hi] = noise.score_range;
    let (_, offset) = cell_and_offset(center_px, stride);

    let primary = PrimaryOutputs {
        depth,
        dims,
        orientation: encode_orientation(gt.yaw + yaw_error, ray),
        offset,
        size2d: [box2d.w, box2d.h],
    };
    Ok(
        DetectionRecord::new(center_px, box2d, gt.class_id, lo + (hi - lo) * unit, primary)
            .with_attribute_scores(attribute_evidence(gt.attribute_id, num_attributes, noise.attribute_confidence))
            .with_ground_truth(*gt),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rcfuse_core::geometry::{Intrinsics, Vec3};

    fn cam() -> CameraModel {
        let intr = Intrinsics {
            fx: 633.0,
            fy: 633.0,
            cx: 400.0,
            cy: 225.0,
            width: 800,
            height: 450,
        };
        CameraModel::forward_facing(intr, Vec3::new(1.5, 0.0, 1.5)).unwrap()
    }

    #[test]
    fn noiseless_record_reproduces_the_box() {
        let cam = cam();
        let gt = Box3D::new(Vec3::new(25.0, -3.0, 0.8), Dims::new(1.9, 4.6, 1.6), 0.7, 0)
            .unwrap()
            .with_attribute(Some(1));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rec = record_from_box(&gt, &cam, 4, &DetectorNoise::noiseless(), 2, &mut rng).unwrap();
        let est = rec.estimated_box(&cam).unwrap();
        assert!((est.center - gt.center).norm() < 1e-9);
        assert!((est.yaw - gt.yaw).abs() < 1e-9);
        assert_eq!(rec.attribute_scores, vec![0.0, 1.0]);
        assert_eq!(rec.score, 1.0);
        let peak = rec.peak(4);
        let u = (peak.cell[0] as f64 + rec.primary.offset[0]) * 4.0;
        assert!((u - rec.center_px[0]).abs() < 1e-9);
    }

    #[test]
    fn evidence_shapes() {
        assert_eq!(attribute_evidence(None, 2, 0.9), Vec::<f64>::new());
        assert_eq!(attribute_evidence(Some(0), 2, 0.9), vec![0.9, 1.0 - 0.9]);
        assert_eq!(attribute_evidence(Some(0), 1, 0.9), vec![0.9]);
    }
}
