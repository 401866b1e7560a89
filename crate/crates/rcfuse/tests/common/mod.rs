//! Test-side reference implementations shared by the integration tests and
//! the acceptance runner. Nothing here calls the association, loss or
//! heatmap code under test.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rcfuse_core::decoder::{DetectionRecord, PrimaryOutputs};
use rcfuse_core::frustum::{AssociationOptions, FrustumMode, Membership};
use rcfuse_core::geometry::{decode_orientation, Box2D, Box3D, CameraModel, Dims, Intrinsics, Pose, Vec3};
use rcfuse_core::radar::{RadarPillar, RadarPoint};

// ---------------------------------------------------------------------------
// association

/// Corners of a yaw-rotated box, built from scratch.
fn corners(center: Vec3, dims: Dims, yaw: f64) -> Vec<Vec3> {
    let (s, c) = yaw.sin_cos();
    let mut out = Vec::with_capacity(8);
    for sx in [-0.5, 0.5] {
        for sy in [-0.5, 0.5] {
            for sz in [-0.5, 0.5] {
                let (dx, dy, dz) = (sx * dims.w, sy * dims.l, sz * dims.h);
                out.push(Vec3::new(
                    center.x + c * dx - s * dy,
                    center.y + s * dx + c * dy,
                    center.z + dz,
                ));
            }
        }
    }
    out
}

fn radius(cam: &CameraModel, p_ego: Vec3) -> f64 {
    let q = cam.ego_to_camera(p_ego);
    (q.x * q.x + q.y * q.y + q.z * q.z).sqrt()
}

/// Radial gate `[near, far]` of one detection, or `None` when it cannot be built.
pub fn oracle_bounds(det: &DetectionRecord, cam: &CameraModel, delta: f64, mode: FrustumMode) -> Option<(f64, f64)> {
    let span = |cs: &[Vec3]| {
        let r: Vec<f64> = cs.iter().map(|c| radius(cam, *c)).collect();
        let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    match mode {
        FrustumMode::Train => {
            let gt = det.gt_box3d?;
            let (lo, hi) = span(&corners(gt.center, gt.dims, gt.yaw));
            Some((lo.max(1e-6), hi))
        }
        FrustumMode::Test => {
            let k = cam.intrinsics();
            let d = det.primary.depth;
            let [u, v] = det.center_px;
            let c_cam = Vec3::new((u - k.cx) / k.fx * d, (v - k.cy) / k.fy * d, d);
            let c_ego = cam.camera_to_ego(c_cam);
            let yaw = decode_orientation(&det.primary.orientation, cam.ray_angle(u, v));
            let (lo, hi) = span(&corners(c_ego, det.primary.dims, yaw));
            let rho = radius(cam, c_ego);
            let half = 0.5 * (hi - lo) * (1.0 + delta);
            Some(((rho - half).max(1e-6), rho + half))
        }
    }
}

fn in_gate(cam: &CameraModel, b: &Box2D, bounds: Option<(f64, f64)>, p_ego: Vec3) -> bool {
    let q = cam.ego_to_camera(p_ego);
    if q.z <= 0.0 {
        return false;
    }
    let k = cam.intrinsics();
    let (u, v) = (k.fx * q.x / q.z + k.cx, k.fy * q.y / q.z + k.cy);
    let inside = u >= b.cx - b.w / 2.0 && u <= b.cx + b.w / 2.0 && v >= b.cy - b.h / 2.0 && v <= b.cy + b.h / 2.0;
    let r = (q.x * q.x + q.y * q.y + q.z * q.z).sqrt();
    inside && bounds.is_none_or(|(near, far)| r >= near && r <= far)
}

/// Brute-force association: for every detection scan every pillar, test
/// the anchor and (optionally) all eight AABB corners, keep the member with
/// the smallest anchor range, first index on ties.
pub fn oracle_associate(
    dets: &[DetectionRecord],
    pillars: &[RadarPillar],
    cam: &CameraModel,
    opts: &AssociationOptions,
) -> Vec<Option<usize>> {
    dets.iter()
        .map(|det| {
            let bounds = if opts.radial_gate {
                Some(oracle_bounds(det, cam, opts.delta, opts.mode).expect("valid detection"))
            } else {
                None
            };
            let mut best: Option<(usize, f64)> = None;
            for (i, p) in pillars.iter().enumerate() {
                let a = p.anchor.position;
                let mut member = in_gate(cam, &det.box2d, bounds, a);
                if !member && opts.membership == Membership::Pillar {
                    let h = p.half_extents;
                    'outer: for sx in [-1.0, 1.0] {
                        for sy in [-1.0, 1.0] {
                            for sz in [-1.0, 1.0] {
                                let c = Vec3::new(a.x + sx * h.x, a.y + sy * h.y, a.z + sz * h.z);
                                if in_gate(cam, &det.box2d, bounds, c) {
                                    member = true;
                                    break 'outer;
                                }
                            }
                        }
                    }
                }
                if member {
                    let r = radius(cam, a);
                    if best.is_none_or(|(_, d)| r < d) {
                        best = Some((i, r));
                    }
                }
            }
            best.map(|b| b.0)
        })
        .collect()
}

pub struct RandomAssociationCase {
    pub cam: CameraModel,
    pub dets: Vec<DetectionRecord>,
    pub pillars: Vec<RadarPillar>,
    pub opts: AssociationOptions,
}

fn random_orientation(rng: &mut ChaCha8Rng) -> [f64; 8] {
    let mut o = [0.0; 8];
    for v in &mut o {
        *v = rng.random_range(-1.0..1.0);
    }
    o
}

/// Random camera, detections and pillars. About half of the pillars are
/// dropped near estimated object centers so that associations happen.
pub fn random_association_case(seed: u64, max_objects: usize, max_pillars: usize) -> RandomAssociationCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let intr = Intrinsics {
        fx: rng.random_range(400.0..900.0),
        fy: rng.random_range(400.0..900.0),
        cx: rng.random_range(350.0..450.0),
        cy: rng.random_range(200.0..250.0),
        width: 800,
        height: 450,
    };
    let mount = Vec3::new(rng.random_range(0.0..2.0), rng.random_range(-0.5..0.5), rng.random_range(1.0..2.0));
    let base = CameraModel::forward_facing(intr, mount).unwrap();
    // small extra yaw so the extrinsic is not axis-aligned
    let twist = Pose::from_yaw(rng.random_range(-0.2..0.2), Vec3::ZERO);
    let cam = CameraModel::new(intr, base.extrinsic().compose(&twist)).unwrap();

    let n_obj = rng.random_range(0..=max_objects);
    let n_pil = rng.random_range(0..=max_pillars);
    let mode = if rng.random_bool(0.5) { FrustumMode::Test } else { FrustumMode::Train };
    let opts = AssociationOptions {
        delta: rng.random_range(0.0..0.5),
        mode,
        membership: if rng.random_bool(0.5) { Membership::Pillar } else { Membership::Anchor },
        radial_gate: rng.random_bool(0.8),
    };

    let mut dets = Vec::with_capacity(n_obj);
    let mut centers = Vec::with_capacity(n_obj);
    for _ in 0..n_obj {
        let u = rng.random_range(-20.0..820.0);
        let v = rng.random_range(-20.0..470.0);
        let depth = rng.random_range(2.0..80.0);
        let dims = Dims::new(rng.random_range(0.5..3.0), rng.random_range(0.5..10.0), rng.random_range(0.5..4.0));
        let box2d = Box2D::new(u, v, rng.random_range(4.0..200.0), rng.random_range(4.0..150.0));
        let primary = PrimaryOutputs {
            depth,
            dims,
            orientation: random_orientation(&mut rng),
            offset: [0.5, 0.5],
            size2d: [box2d.w, box2d.h],
        };
        let est_cam = cam.unproject(u, v, depth);
        let center = cam.camera_to_ego(est_cam);
        let gt = Box3D::new(
            center + Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), 0.0),
            dims,
            rng.random_range(-3.1..3.1),
            0,
        )
        .unwrap();
        centers.push(center);
        dets.push(DetectionRecord::new([u, v], box2d, 0, 0.5, primary).with_ground_truth(gt));
    }
    let mut pillars = Vec::with_capacity(n_pil);
    let half = Vec3::new(
        rng.random_range(0.05..0.3),
        rng.random_range(0.05..0.3),
        rng.random_range(0.2..1.5),
    );
    for _ in 0..n_pil {
        let pos = if !centers.is_empty() && rng.random_bool(0.5) {
            let c = centers[rng.random_range(0..centers.len())];
            c + Vec3::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-1.5..1.5),
            )
        } else {
            Vec3::new(
                rng.random_range(-10.0..90.0),
                rng.random_range(-40.0..40.0),
                rng.random_range(-1.0..3.0),
            )
        };
        pillars.push(RadarPillar {
            anchor: RadarPoint::new(pos, [0.0, 0.0], 0.0),
            half_extents: half,
        });
    }
    RandomAssociationCase { cam, dets, pillars, opts }
}

// ---------------------------------------------------------------------------
// finite differences

/// Richardson-extrapolated central difference of `f` along coordinate `i`.
pub fn numeric_partial(f: &dyn Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let diff = |h: f64| {
        let mut a = x.to_vec();
        let mut b = x.to_vec();
        a[i] += h;
        b[i] -= h;
        (f(&a) - f(&b)) / (2.0 * h)
    };
    (4.0 * diff(h / 2.0) - diff(h)) / 3.0
}

/// `|a - n| / max(|a|, |n|)`, zero when both vanish.
pub fn relative_error(a: f64, n: f64) -> f64 {
    let scale = a.abs().max(n.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - n).abs() / scale
    }
}

pub struct GradientCase {
    pub pred: Vec<f64>,
    pub target: Vec<f64>,
    pub mask: Vec<bool>,
}

/// Inputs kept away from the clamp boundaries and the L1 kink, so the
/// losses are smooth on the finite-difference stencil.
pub fn random_gradient_case(rng: &mut ChaCha8Rng, heatmap: bool) -> GradientCase {
    let n = rng.random_range(1..24);
    let mut pred = Vec::with_capacity(n);
    let mut target = Vec::with_capacity(n);
    for _ in 0..n {
        let p: f64 = rng.random_range(0.05..0.95);
        let t = if heatmap {
            if rng.random_bool(0.2) {
                1.0
            } else {
                rng.random_range(0.0..0.8)
            }
        } else {
            // keep |p - t| ≥ 0.05 so neither loss sits on a kink or a zero gradient
            let mut t: f64 = rng.random_range(0.0..1.0);
            while (p - t).abs() < 0.05 {
                t = rng.random_range(0.0..1.0);
            }
            t
        };
        pred.push(p);
        target.push(t);
    }
    let mask = (0..n).map(|_| rng.random_bool(0.8)).collect();
    GradientCase { pred, target, mask }
}
