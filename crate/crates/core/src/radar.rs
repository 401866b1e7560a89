//! Radar returns, multi-sweep aggregation and pillar expansion.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{Pose, Vec3};
use crate::math;

/// Default aggregation window, seconds.
pub const DEFAULT_WINDOW: f64 = 0.25;
/// Default number of sweeps kept.
pub const DEFAULT_MAX_SWEEPS: usize = 3;
/// Default pillar size along (x, y, z), meters.
pub const DEFAULT_PILLAR_DIMS: [f64; 3] = [0.2, 0.2, 1.5];

// Slack on the window cutoff so ages computed by subtraction of timestamps
// are not rejected by a rounding ulp.
const AGE_SLACK: f64 = 1e-9;

/// A single radar return in the egocentric frame. `velocity` is the
/// ego-motion-compensated radial velocity split into x and y components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarPoint {
    pub position: Vec3,
    pub velocity: [f64; 2],
    pub timestamp: f64,
}

impl RadarPoint {
    pub fn new(position: Vec3, velocity: [f64; 2], timestamp: f64) -> Self {
        Self {
            position,
            velocity,
            timestamp,
        }
    }

    /// A return from a sensor that reports no elevation; placed on the ground plane.
    pub fn without_height(x: f64, y: f64, velocity: [f64; 2], timestamp: f64) -> Self {
        Self::new(Vec3::new(x, y, 0.0), velocity, timestamp)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadarSweep {
    pub points: Vec<RadarPoint>,
    /// Ego pose in the global frame at sweep time.
    pub ego_pose: Pose,
    pub timestamp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregationConfig {
    pub window: f64,
    pub max_sweeps: usize,
}

impl Default for AggregationConfig {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

/// Collects the points of the newest `max_sweeps` sweeps no older than
/// `window` (relative to `reference_time`) into the frame given by
/// `current_pose`. Positions are fully transformed; velocities are only rotated.
pub fn aggregate_sweeps(
    sweeps: &[RadarSweep],
    current_pose: &Pose,
    reference_time: f64,
    cfg: &AggregationConfig,
) -> Vec<RadarPoint> {
    let to_current = current_pose.inverse();
    let mut out = Vec::new();
    for i in select_sweeps(sweeps, reference_time, cfg) {
        let sweep = &sweeps[i];
        let t = to_current.compose(&sweep.ego_pose);
        out.extend(sweep.points.iter().map(|p| {
            let v = t.rotate_vector(Vec3::new(p.velocity[0], p.velocity[1], 0.0));
            RadarPoint::new(t.transform_point(p.position), [v.x, v.y], p.timestamp)
        }));
    }
    out
}

/// Indices of the sweeps [`aggregate_sweeps`] uses, newest first. Equal
/// timestamps keep input order.
pub fn select_sweeps(sweeps: &[RadarSweep], reference_time: f64, cfg: &AggregationConfig) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sweeps.len()).collect();
    order.sort_by(|&a, &b| sweeps[b].timestamp.total_cmp(&sweeps[a].timestamp));
    order
        .into_iter()
        .filter(|&i| reference_time - sweeps[i].timestamp <= cfg.window + AGE_SLACK)
        .take(cfg.max_sweeps)
        .collect()
}

/// Component of `velocity` along the line of sight to `position`.
pub fn radial_project(position: [f64; 2], velocity: [f64; 2]) -> Result<[f64; 2]> {
    let r = math::hypot(position[0], position[1]);
    if !(r > 0.0) {
        return Err(Error::DegeneratePosition);
    }
    let (ux, uy) = (position[0] / r, position[1] / r);
    let s = velocity[0] * ux + velocity[1] * uy;
    Ok([s * ux, s * uy])
}

/// Validated pillar size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PillarDims(Vec3);

impl PillarDims {
    pub fn new(dx: f64, dy: f64, dz: f64) -> Result<Self> {
        if [dx, dy, dz].iter().all(|d| *d > 0.0 && d.is_finite()) {
            Ok(Self(Vec3::new(dx, dy, dz)))
        } else {
            Err(Error::InvalidParameter("pillar dimensions must be positive"))
        }
    }

    pub fn size(&self) -> Vec3 {
        self.0
    }
}

impl Default for PillarDims {
    fn default() -> Self {
        let [x, y, z] = DEFAULT_PILLAR_DIMS;
        Self(Vec3::new(x, y, z))
    }
}

/// Axis-aligned box centered on a radar return.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarPillar {
    pub anchor: RadarPoint,
    pub half_extents: Vec3,
}

impl RadarPillar {
    pub fn min(&self) -> Vec3 {
        self.anchor.position - self.half_extents
    }

    pub fn max(&self) -> Vec3 {
        self.anchor.position + self.half_extents
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let (lo, hi) = (self.min(), self.max());
        [
            Vec3::new(lo.x, lo.y, lo.z),
            Vec3::new(hi.x, lo.y, lo.z),
            Vec3::new(lo.x, hi.y, lo.z),
            Vec3::new(hi.x, hi.y, lo.z),
            Vec3::new(lo.x, lo.y, hi.z),
            Vec3::new(hi.x, lo.y, hi.z),
            Vec3::new(lo.x, hi.y, hi.z),
            Vec3::new(hi.x, hi.y, hi.z),
        ]
    }
}

pub fn expand_pillars(points: &[RadarPoint], dims: PillarDims) -> Vec<RadarPillar> {
    let half = dims.size() / 2.0;
    points
        .iter()
        .map(|p| RadarPillar {
            anchor: *p,
            half_extents: half,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn sweep(t: f64, pose: Pose, pts: &[[f64; 5]]) -> RadarSweep {
        RadarSweep {
            points: pts
                .iter()
                .map(|p| RadarPoint::new(Vec3::new(p[0], p[1], p[2]), [p[3], p[4]], t))
                .collect(),
            ego_pose: pose,
            timestamp: t,
        }
    }

    #[test]
    fn three_recent_sweeps_are_kept() {
        let sweeps = vec![
            sweep(10.0, Pose::IDENTITY, &[[1.0, 0.0, 0.0, 0.0, 0.0]]),
            sweep(9.9, Pose::IDENTITY, &[[2.0, 0.0, 0.0, 0.0, 0.0]]),
            sweep(9.8, Pose::IDENTITY, &[[3.0, 0.0, 0.0, 0.0, 0.0]]),
        ];
        let out = aggregate_sweeps(&sweeps, &Pose::IDENTITY, 10.0, &AggregationConfig::default());
        assert_eq!(out.len(), 3);
        let xs: Vec<f64> = out.iter().map(|p| p.position.x).collect();
        assert_eq!(xs, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn identity_poses_concatenate() {
        let sweeps = vec![
            sweep(1.0, Pose::IDENTITY, &[[1.0, 2.0, 0.5, 0.1, 0.2], [4.0, 4.0, 0.0, 0.0, 0.0]]),
            sweep(0.9, Pose::IDENTITY, &[[5.0, 6.0, 0.0, -1.0, 0.0]]),
        ];
        let out = aggregate_sweeps(&sweeps, &Pose::IDENTITY, 1.0, &AggregationConfig::default());
        let expected: Vec<RadarPoint> = sweeps.iter().flat_map(|s| s.points.clone()).collect();
        assert_eq!(out, expected);
    }

    #[test]
    fn old_sweeps_and_excess_sweeps_are_dropped() {
        let sweeps = vec![
            sweep(1.0, Pose::IDENTITY, &[[1.0, 0.0, 0.0, 0.0, 0.0]]),
            sweep(0.7, Pose::IDENTITY, &[[2.0, 0.0, 0.0, 0.0, 0.0]]),
        ];
        let out = aggregate_sweeps(&sweeps, &Pose::IDENTITY, 1.0, &AggregationConfig::default());
        assert_eq!(out.len(), 1);

        let many: Vec<RadarSweep> = (0..5)
            .map(|k| sweep(1.0 - 0.05 * k as f64, Pose::IDENTITY, &[[k as f64, 0.0, 0.0, 0.0, 0.0]]))
            .collect();
        let out = aggregate_sweeps(&many, &Pose::IDENTITY, 1.0, &AggregationConfig::default());
        assert_eq!(out.len(), 3);
        assert!(aggregate_sweeps(&[], &Pose::IDENTITY, 1.0, &AggregationConfig::default()).is_empty());
    }

    #[test]
    fn older_sweep_moves_into_current_frame() {
        // ego drove 2 m forward between sweeps
        let old_pose = Pose::from_yaw(0.0, Vec3::new(0.0, 0.0, 0.0));
        let now_pose = Pose::from_yaw(0.0, Vec3::new(2.0, 0.0, 0.0));
        let sweeps = vec![sweep(0.9, old_pose, &[[10.0, 1.0, 0.5, 3.0, 0.0]])];
        let out = aggregate_sweeps(&sweeps, &now_pose, 1.0, &AggregationConfig::default());
        assert_abs_diff_eq!(out[0].position.x, 8.0, epsilon = 1e-12);
        // translation leaves velocity untouched
        assert_eq!(out[0].velocity, [3.0, 0.0]);

        let turned = Pose::from_yaw(PI / 2.0, Vec3::ZERO);
        let out = aggregate_sweeps(&sweeps, &turned, 1.0, &AggregationConfig::default());
        assert_abs_diff_eq!(out[0].velocity[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out[0].velocity[1], -3.0, epsilon = 1e-12);
    }

    #[test]
    fn radial_projection_examples() {
        assert_eq!(radial_project([0.0, 20.0], [0.0, -5.0]).unwrap(), [0.0, -5.0]);
        let t = radial_project([10.0, 10.0], [-3.0, 3.0]).unwrap();
        assert_abs_diff_eq!(t[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t[1], 0.0, epsilon = 1e-12);
        assert_eq!(radial_project([10.0, 0.0], [3.0, 4.0]).unwrap(), [3.0, 0.0]);
        assert_eq!(radial_project([0.0, 0.0], [1.0, 1.0]), Err(Error::DegeneratePosition));
    }

    #[test]
    fn pillar_extent() {
        let p = RadarPoint::new(Vec3::new(5.0, 2.0, 0.5), [0.0, 0.0], 0.0);
        let pillars = expand_pillars(&[p], PillarDims::default());
        let (lo, hi) = (pillars[0].min(), pillars[0].max());
        assert_abs_diff_eq!(lo.x, 4.9, epsilon = 1e-12);
        assert_abs_diff_eq!(hi.x, 5.1, epsilon = 1e-12);
        assert_abs_diff_eq!(lo.y, 1.9, epsilon = 1e-12);
        assert_abs_diff_eq!(hi.y, 2.1, epsilon = 1e-12);
        assert_abs_diff_eq!(lo.z, -0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(hi.z, 1.25, epsilon = 1e-12);
        assert!(expand_pillars(&[], PillarDims::default()).is_empty());
        assert!(PillarDims::new(0.2, 0.0, 1.5).is_err());
    }

    #[test]
    fn missing_height_sits_on_ground() {
        let p = RadarPoint::without_height(12.0, -1.0, [0.0, 0.0], 0.0);
        let pillar = expand_pillars(&[p], PillarDims::default())[0];
        assert_abs_diff_eq!(pillar.min().z, -0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(pillar.max().z, 0.75, epsilon = 1e-12);
    }

    fn arb_point() -> impl Strategy<Value = RadarPoint> {
        (-80.0..80.0f64, -80.0..80.0f64, -2.0..3.0f64, -20.0..20.0f64, -20.0..20.0f64)
            .prop_map(|(x, y, z, vx, vy)| RadarPoint::new(Vec3::new(x, y, z), [vx, vy], 0.0))
    }

    proptest! {
        #[test]
        fn radial_projection_contracts_and_is_idempotent(
            px in -100.0..100.0f64, py in -100.0..100.0f64, vx in -30.0..30.0f64, vy in -30.0..30.0f64,
        ) {
            prop_assume!(math::hypot(px, py) > 1e-3);
            let r = radial_project([px, py], [vx, vy]).unwrap();
            prop_assert!(math::hypot(r[0], r[1]) <= math::hypot(vx, vy) + 1e-12);
            let rr = radial_project([px, py], r).unwrap();
            prop_assert!((rr[0] - r[0]).abs() < 1e-12 && (rr[1] - r[1]).abs() < 1e-12);
        }

        #[test]
        fn pillars_collapse_to_anchors(points in proptest::collection::vec(arb_point(), 0..40)) {
            let pillars = expand_pillars(&points, PillarDims::default());
            let back: Vec<RadarPoint> = pillars.iter().map(|p| p.anchor).collect();
            prop_assert_eq!(back, points);
        }

        #[test]
        fn aggregation_is_frame_consistent(
            points in proptest::collection::vec(arb_point(), 1..10),
            ya in -PI..PI, yb in -PI..PI, yc in -PI..PI, tx in -30.0..30.0f64, ty in -30.0..30.0f64,
        ) {
            let sweeps = vec![
                RadarSweep { points: points.clone(), ego_pose: Pose::from_yaw(ya, Vec3::new(tx, 0.0, 0.0)), timestamp: 0.0 },
                RadarSweep { points, ego_pose: Pose::from_yaw(yb, Vec3::new(0.0, ty, 0.0)), timestamp: -0.1 },
            ];
            let frame_a = Pose::from_yaw(yc, Vec3::new(1.0, 2.0, 0.0));
            let frame_b = Pose::from_yaw(-yc, Vec3::new(tx, ty, 0.3));
            let cfg = AggregationConfig::default();
            let in_a = aggregate_sweeps(&sweeps, &frame_a, 0.0, &cfg);
            let in_b = aggregate_sweeps(&sweeps, &frame_b, 0.0, &cfg);
            let a_to_b = frame_b.inverse().compose(&frame_a);
            for (pa, pb) in in_a.iter().zip(&in_b) {
                let moved = a_to_b.transform_point(pa.position);
                prop_assert!((moved - pb.position).norm() < 1e-9);
            }
        }
    }
}
