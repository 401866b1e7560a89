//! RoI frustums and radar-to-object association.
//!
//! A frustum is the 2D detection box extruded along camera rays and cut to a
//! radial interval around the object. A radar pillar belongs to a frustum
//! when its anchor or any of its 8 corners projects inside the 2D box at a
//! radial distance inside the interval. Each object takes the member pillar
//! whose anchor is radially closest to the camera.

use alloc::vec::Vec;

use crate::decoder::DetectionRecord;
use crate::error::{Error, Result};
use crate::geometry::{Box2D, CameraModel, Vec3};
use crate::radar::RadarPillar;

/// Default radial enlargement of test-time frustums.
pub const DEFAULT_DELTA: f64 = 0.2;

const MIN_RADIAL_NEAR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrustumMode {
    /// Tight frustum from the ground-truth 3D box.
    Train,
    /// Frustum from the estimated box, radially enlarged by δ.
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrustumRoI {
    pub camera: CameraModel,
    pub box2d: Box2D,
    /// Radial distances from the camera center, meters.
    pub radial_near: f64,
    pub radial_far: f64,
    pub mode: FrustumMode,
}

impl FrustumRoI {
    /// Whether a camera-frame point passes both the image gate and the radial gate.
    pub fn contains_camera_point(&self, p_cam: Vec3) -> bool {
        self.gate().admits(&self.camera, p_cam)
    }

    fn gate(&self) -> Gate {
        Gate {
            box2d: self.box2d,
            radial: Some((self.radial_near, self.radial_far)),
        }
    }
}

pub fn build_frustum(
    det: &DetectionRecord,
    cam: &CameraModel,
    delta: f64,
    mode: FrustumMode,
) -> Result<FrustumRoI> {
    if !(det.box2d.w > 0.0 && det.box2d.h > 0.0) {
        return Err(Error::DegenerateBox);
    }
    let (near, far) = match mode {
        FrustumMode::Train => {
            let gt = det.gt_box3d.as_ref().ok_or(Error::MissingGroundTruth)?;
            radial_span(&gt.corners(), cam)
        }
        FrustumMode::Test => {
            if !(delta >= 0.0 && delta.is_finite()) {
                return Err(Error::InvalidParameter("delta must be non-negative"));
            }
            let est = det.estimated_box(cam)?;
            let (lo, hi) = radial_span(&est.corners(), cam);
            let center = cam.ego_to_camera(est.center).norm();
            let half = (hi - lo) / 2.0 * (1.0 + delta);
            (center - half, center + half)
        }
    };
    Ok(FrustumRoI {
        camera: *cam,
        box2d: det.box2d,
        radial_near: near.max(MIN_RADIAL_NEAR),
        radial_far: far,
        mode,
    })
}

fn radial_span(corners: &[Vec3; 8], cam: &CameraModel) -> (f64, f64) {
    corners
        .iter()
        .map(|c| cam.ego_to_camera(*c).norm())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)))
}

/// Point-only membership: the pillar anchor alone must pass the frustum.
pub fn anchor_in_frustum(pillar: &RadarPillar, frustum: &FrustumRoI) -> bool {
    frustum.contains_camera_point(frustum.camera.ego_to_camera(pillar.anchor.position))
}

/// True when the anchor or any AABB corner of the pillar lies in the frustum.
/// Points behind the camera are skipped.
pub fn pillar_in_frustum(pillar: &RadarPillar, frustum: &FrustumRoI) -> bool {
    anchor_in_frustum(pillar, frustum)
        || pillar
            .corners()
            .iter()
            .any(|c| frustum.contains_camera_point(frustum.camera.ego_to_camera(*c)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Association {
    pub object_index: usize,
    pub pillar_index: Option<usize>,
    /// Radial distance of the matched pillar anchor.
    pub match_depth: Option<f64>,
}

/// Which parts of a pillar are tested against a frustum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Membership {
    Anchor,
    Pillar,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationOptions {
    pub delta: f64,
    pub mode: FrustumMode,
    pub membership: Membership,
    /// When false only the 2D box gates membership (plain image-box association).
    pub radial_gate: bool,
}

impl Default for AssociationOptions {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            mode: FrustumMode::Test,
            membership: Membership::Pillar,
            radial_gate: true,
        }
    }
}

pub fn associate(
    dets: &[DetectionRecord],
    pillars: &[RadarPillar],
    cam: &CameraModel,
    delta: f64,
    mode: FrustumMode,
) -> Result<Vec<Association>> {
    let opts = AssociationOptions {
        delta,
        mode,
        ..AssociationOptions::default()
    };
    associate_with(dets, pillars, cam, &opts)
}

struct Gate {
    box2d: Box2D,
    radial: Option<(f64, f64)>,
}

impl Gate {
    fn admits(&self, cam: &CameraModel, p_cam: Vec3) -> bool {
        match cam.project(p_cam) {
            Ok(px) => self.admits_projected(px.u, px.v, p_cam.norm()),
            Err(_) => false,
        }
    }

    fn admits_projected(&self, u: f64, v: f64, radial: f64) -> bool {
        let radial_ok = match self.radial {
            Some((near, far)) => radial >= near && radial <= far,
            None => true,
        };
        radial_ok && self.box2d.contains(u, v)
    }
}

// Projected test points of one pillar, computed once per call.
struct ProjectedPillar {
    anchor_radial: f64,
    points: Vec<(f64, f64, f64)>,
}

fn project_pillar(p: &RadarPillar, cam: &CameraModel, membership: Membership) -> ProjectedPillar {
    let anchor_cam = cam.ego_to_camera(p.anchor.position);
    let mut candidates: Vec<Vec3> = Vec::with_capacity(9);
    candidates.push(anchor_cam);
    if membership == Membership::Pillar {
        candidates.extend(p.corners().iter().map(|c| cam.ego_to_camera(*c)));
    }
    let points = candidates
        .into_iter()
        .filter_map(|q| cam.project(q).ok().map(|px| (px.u, px.v, q.norm())))
        .collect();
    ProjectedPillar {
        anchor_radial: anchor_cam.norm(),
        points,
    }
}

/// Associates each detection with at most one pillar. A pillar may be
/// claimed by several detections when it falls inside several frustums.
pub fn associate_with(
    dets: &[DetectionRecord],
    pillars: &[RadarPillar],
    cam: &CameraModel,
    opts: &AssociationOptions,
) -> Result<Vec<Association>> {
    let projected: Vec<ProjectedPillar> = pillars
        .iter()
        .map(|p| project_pillar(p, cam, opts.membership))
        .collect();

    dets.iter()
        .enumerate()
        .map(|(object_index, det)| {
            let gate = if opts.radial_gate {
                let f = build_frustum(det, cam, opts.delta, opts.mode)?;
                f.gate()
            } else {
                if !(det.box2d.w > 0.0 && det.box2d.h > 0.0) {
                    return Err(Error::DegenerateBox);
                }
                Gate {
                    box2d: det.box2d,
                    radial: None,
                }
            };
            let best = projected
                .iter()
                .enumerate()
                .filter(|(_, pp)| pp.points.iter().any(|&(u, v, r)| gate.admits_projected(u, v, r)))
                .fold(None::<(usize, f64)>, |best, (i, pp)| match best {
                    Some((_, d)) if d <= pp.anchor_radial => best,
                    _ => Some((i, pp.anchor_radial)),
                });
            Ok(Association {
                object_index,
                pillar_index: best.map(|b| b.0),
                match_depth: best.map(|b| b.1),
            })
        })
        .collect()
}

/// Number of pillars claimed by more than one detection.
pub fn multi_claim_count(assocs: &[Association]) -> usize {
    let mut claimed: Vec<usize> = assocs.iter().filter_map(|a| a.pillar_index).collect();
    claimed.sort_unstable();
    let mut count = 0;
    let mut i = 0;
    while i < claimed.len() {
        let mut j = i + 1;
        while j < claimed.len() && claimed[j] == claimed[i] {
            j += 1;
        }
        if j - i > 1 {
            count += 1;
        }
        i = j;
    }
    count
}
