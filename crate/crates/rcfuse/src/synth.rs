//! Seeded synthetic scenes: objects on a flat ground plane in front of a
//! forward camera, radar returns generated from the objects' motion over
//! several sweeps, clutter, and noisy preliminary detections.
//!
//! Independent random streams drive object placement, detector noise, radar
//! returns and clutter, so changing one model (say the radar z corruption)
//! leaves the rest of a scene untouched for the same seed.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rcfuse_core::geometry::{box3d_to_box2d, Box2D, Box3D, CameraModel, Dims, Intrinsics, Pose, Vec3};
use rcfuse_core::math::normalize_angle;
use rcfuse_core::radar::{radial_project, RadarPoint, RadarSweep};
use serde::{Deserialize, Serialize};

use crate::detector::{record_from_box, DetectorNoise};
use crate::error::{Error, Result};
use crate::schema::Scene;

pub const ATTRIBUTE_MOVING: usize = 0;
pub const ATTRIBUTE_PARKED: usize = 1;
pub const NUM_ATTRIBUTES: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraConfig {
    pub width: u32,
    pub height: u32,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Optical center in the egocentric frame.
    pub mount: [f64; 3],
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            width: 800,
            height: 450,
            fx: 633.0,
            fy: 633.0,
            cx: 400.0,
            cy: 225.0,
            mount: [1.5, 0.0, 1.5],
        }
    }
}

impl CameraConfig {
    pub fn camera(&self) -> Result<CameraModel> {
        let intr = Intrinsics {
            fx: self.fx,
            fy: self.fy,
            cx: self.cx,
            cy: self.cy,
            width: self.width,
            height: self.height,
        };
        Ok(CameraModel::forward_facing(intr, Vec3::from_array(self.mount))?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub name: String,
    pub weight: f64,
    /// Mean `[w, l, h]`, meters.
    pub dims: [f64; 3],
    /// Relative σ of each dimension.
    #[serde(default)]
    pub dims_jitter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObjectConfig {
    /// Inclusive range of objects attempted per scene.
    pub count: [usize; 2],
    /// Camera depth range of object centers, meters.
    pub depth_range: [f64; 2],
    pub classes: Vec<ClassSpec>,
    pub moving_fraction: f64,
    pub speed_range: [f64; 2],
    /// Largest deviation of the motion direction from the line of sight, radians.
    pub heading_jitter: f64,
    /// Keypoints stay this many pixels inside the image.
    pub pixel_margin: f64,
    /// Extra clearance between the bounding circles of two objects, meters.
    pub min_separation: f64,
    /// Fraction of objects placed in front/behind pairs that overlap in the image.
    pub occluded_pair_fraction: f64,
    /// Depth gap between the members of an occluded pair, meters.
    pub occlusion_gap: [f64; 2],
    /// Largest allowed `intersection / smaller area` between the image boxes
    /// of objects that are not pair partners. Values ≥ 1 disable the check.
    pub max_2d_overlap: f64,
    pub max_attempts: usize,
}

impl Default for ObjectConfig {
    fn default() -> Self {
        Self {
            count: [3, 12],
            depth_range: [10.0, 50.0],
            classes: vec![
                ClassSpec {
                    name: "car".into(),
                    weight: 0.6,
                    dims: [1.9, 4.6, 1.7],
                    dims_jitter: 0.05,
                },
                ClassSpec {
                    name: "pedestrian".into(),
                    weight: 0.2,
                    dims: [0.7, 0.7, 1.75],
                    dims_jitter: 0.05,
                },
                ClassSpec {
                    name: "truck".into(),
                    weight: 0.2,
                    dims: [2.5, 8.0, 3.2],
                    dims_jitter: 0.05,
                },
            ],
            moving_fraction: 0.5,
            speed_range: [1.0, 10.0],
            heading_jitter: 0.05,
            pixel_margin: 16.0,
            min_separation: 0.5,
            occluded_pair_fraction: 0.0,
            occlusion_gap: [8.0, 16.0],
            max_2d_overlap: 1.0,
            max_attempts: 200,
        }
    }
}

/// Vertical placement of radar returns. Real automotive radar measures
/// elevation poorly or not at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZMode {
    /// At the object's center height.
    Clean,
    /// Center height plus a uniform error in `±z_range`.
    Uniform,
    /// On the ground plane.
    Ground,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadarConfig {
    pub points_per_object: usize,
    /// σ of the range error along the line of sight, meters.
    pub radial_sigma: f64,
    /// σ of the cross-range error, meters.
    pub lateral_sigma: f64,
    pub z_mode: ZMode,
    pub z_range: f64,
    pub clutter_per_sweep: usize,
    /// Clutter region `[x_min, x_max, y_min, y_max]` in the sweep frame.
    pub clutter_region: [f64; 4],
    pub num_sweeps: usize,
    /// Seconds between consecutive sweeps.
    pub sweep_interval: f64,
    /// Ego forward speed, m/s.
    pub ego_speed: f64,
    /// Ego yaw rate, rad/s.
    pub ego_yaw_rate: f64,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self {
            points_per_object: 1,
            radial_sigma: 0.2,
            lateral_sigma: 0.1,
            z_mode: ZMode::Clean,
            z_range: 1.0,
            clutter_per_sweep: 5,
            clutter_region: [2.0, 60.0, -30.0, 30.0],
            num_sweeps: 3,
            sweep_interval: 0.075,
            ego_speed: 8.0,
            ego_yaw_rate: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub camera: CameraConfig,
    /// Output stride used for the detections' sub-cell offsets.
    pub stride: usize,
    pub objects: ObjectConfig,
    pub detector: DetectorNoise,
    pub radar: RadarConfig,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            camera: CameraConfig::default(),
            stride: 4,
            objects: ObjectConfig::default(),
            detector: DetectorNoise::default(),
            radar: RadarConfig::default(),
        }
    }
}

/// Text of the committed default configuration.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../configs/default.toml");

impl SynthConfig {
    /// Zero detector noise, clean single-sweep radar at object centers, no
    /// clutter and no overlap between image boxes.
    pub fn noiseless() -> Self {
        let mut cfg = Self::default();
        cfg.detector = DetectorNoise::noiseless();
        cfg.objects.max_2d_overlap = 0.0;
        cfg.objects.occluded_pair_fraction = 0.0;
        cfg.objects.count = [1, 8];
        cfg.radar = RadarConfig {
            radial_sigma: 0.0,
            lateral_sigma: 0.0,
            clutter_per_sweep: 0,
            num_sweeps: 1,
            ..RadarConfig::default()
        };
        cfg
    }

    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg = Self::from_toml(&text).map_err(|source| Error::Toml {
            path: path.to_owned(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        let o = &self.objects;
        let r = &self.radar;
        if self.stride == 0 {
            return bad("stride must be positive");
        }
        if o.count[0] > o.count[1] {
            return bad("objects.count must be an ordered range");
        }
        if !(o.depth_range[0] > 0.0 && o.depth_range[0] < o.depth_range[1]) {
            return bad("objects.depth_range must be a positive, non-empty range");
        }
        if o.classes.is_empty() || !o.classes.iter().all(|c| c.weight >= 0.0 && c.dims.iter().all(|d| *d > 0.0)) {
            return bad("objects.classes must be non-empty with non-negative weights and positive dims");
        }
        if o.classes.iter().map(|c| c.weight).sum::<f64>() <= 0.0 {
            return bad("class weights must not all be zero");
        }
        if !(0.0..=1.0).contains(&o.moving_fraction) || !(0.0..=1.0).contains(&o.occluded_pair_fraction) {
            return bad("fractions must lie in [0, 1]");
        }
        if !(0.0 <= o.speed_range[0] && o.speed_range[0] <= o.speed_range[1]) {
            return bad("objects.speed_range must be an ordered non-negative range");
        }
        if !(0.0 < o.occlusion_gap[0] && o.occlusion_gap[0] <= o.occlusion_gap[1]) {
            return bad("objects.occlusion_gap must be an ordered positive range");
        }
        let sigmas = [r.radial_sigma, r.lateral_sigma, r.z_range, o.heading_jitter, o.min_separation];
        if !sigmas.iter().all(|s| *s >= 0.0 && s.is_finite()) {
            return bad("σ values, ranges and separations must be non-negative");
        }
        if o.classes.iter().any(|c| !(c.dims_jitter >= 0.0)) {
            return bad("dims_jitter must be non-negative");
        }
        if r.num_sweeps == 0 || !(r.sweep_interval > 0.0) {
            return bad("radar needs at least one sweep and a positive interval");
        }
        if !(r.clutter_region[0] < r.clutter_region[1] && r.clutter_region[2] < r.clutter_region[3]) {
            return bad("radar.clutter_region must be non-empty");
        }
        self.detector.validate()?;
        self.camera.camera()?;
        Ok(())
    }
}

// Stream ids for the independent generators of one scene.
const STREAM_OBJECTS: u64 = 1;
const STREAM_DETECTOR: u64 = 2;
const STREAM_RADAR: u64 = 3;
const STREAM_CLUTTER: u64 = 4;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn scene_id(seed: u64) -> String {
    format!("synth-{seed:06}")
}

struct Placed {
    gt: Box3D,
    box2d: Box2D,
}

fn pick_class(rng: &mut ChaCha8Rng, classes: &[ClassSpec]) -> usize {
    let total: f64 = classes.iter().map(|c| c.weight).sum();
    let mut x = rng.random::<f64>() * total;
    for (i, c) in classes.iter().enumerate() {
        if x < c.weight {
            return i;
        }
        x -= c.weight;
    }
    classes.len() - 1
}

fn uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// A candidate object whose keypoint sits at column `u` and camera depth `depth`.
fn candidate(
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    cam: &CameraModel,
    u: f64,
    depth: f64,
) -> Result<Option<(Box3D, Box2D)>> {
    let o = &cfg.objects;
    let class_id = pick_class(rng, &o.classes);
    let spec = &o.classes[class_id];
    let jitter = Normal::new(0.0, spec.dims_jitter).map_err(|e| Error::Config(e.to_string()))?;
    let mut d = [0.0; 3];
    for (k, v) in d.iter_mut().enumerate() {
        *v = spec.dims[k] * (1.0 + jitter.sample(rng)).clamp(0.5, 1.5);
    }
    let dims = Dims::new(d[0], d[1], d[2]);
    let moving = rng.random::<f64>() < o.moving_fraction;
    let speed = uniform(rng, o.speed_range);
    let jitter_angle = (2.0 * rng.random::<f64>() - 1.0) * o.heading_jitter;
    let approaching = rng.random::<bool>();
    let parked_yaw = (2.0 * rng.random::<f64>() - 1.0) * PI;

    let intr = cam.intrinsics();
    let mount = Vec3::from_array(cfg.camera.mount);
    let x = mount.x + depth;
    let y = mount.y - (u - intr.cx) / intr.fx * depth;
    let center = Vec3::new(x, y, dims.h / 2.0);

    let (velocity, yaw, attribute) = if moving && speed > 0.0 {
        let los = y.atan2(x);
        let heading = los + jitter_angle + if approaching { PI } else { 0.0 };
        (
            [speed * heading.cos(), speed * heading.sin()],
            heading - FRAC_PI_2,
            ATTRIBUTE_MOVING,
        )
    } else {
        ([0.0, 0.0], parked_yaw, ATTRIBUTE_PARKED)
    };
    let gt = Box3D::new(center, dims, normalize_angle(yaw), class_id)?
        .with_velocity(velocity)
        .with_attribute(Some(attribute));

    // keep every corner comfortably in front of the camera
    if gt.corners().iter().any(|c| cam.ego_to_camera(*c).z < 1.0) {
        return Ok(None);
    }
    let px = cam.project(cam.ego_to_camera(center))?;
    let margin = o.pixel_margin;
    if !(px.u >= margin && px.u <= cam.width() - margin && px.v >= margin && px.v <= cam.height() - margin) {
        return Ok(None);
    }
    let box2d = box3d_to_box2d(&gt, cam)?;
    Ok(Some((gt, box2d)))
}

fn bev_radius(b: &Box3D) -> f64 {
    0.5 * b.dims.w.hypot(b.dims.l)
}

fn overlap_ratio(a: &Box2D, b: &Box2D) -> f64 {
    let smaller = a.area().min(b.area());
    if smaller > 0.0 {
        a.intersection_area(b) / smaller
    } else {
        0.0
    }
}

fn admissible(placed: &[Placed], gt: &Box3D, box2d: &Box2D, partner: Option<usize>, o: &ObjectConfig) -> bool {
    placed.iter().enumerate().all(|(i, p)| {
        let gap = (p.gt.center - gt.center).norm_bev() - bev_radius(&p.gt) - bev_radius(gt);
        if gap < o.min_separation {
            return false;
        }
        if Some(i) == partner {
            return true;
        }
        o.max_2d_overlap >= 1.0 || overlap_ratio(&p.box2d, box2d) <= o.max_2d_overlap
    })
}

fn place_objects(cfg: &SynthConfig, cam: &CameraModel, rng: &mut ChaCha8Rng) -> Result<Vec<Placed>> {
    let o = &cfg.objects;
    let n = rng.random_range(o.count[0]..=o.count[1]);
    let pairs = ((n as f64 * o.occluded_pair_fraction) / 2.0).round() as usize;
    let margin = o.pixel_margin;
    let width = cam.width();
    let mut placed: Vec<Placed> = Vec::with_capacity(n);

    for _ in 0..pairs {
        for _ in 0..o.max_attempts {
            let u = uniform(rng, [margin, width - margin]);
            let near_depth = uniform(rng, [o.depth_range[0], o.depth_range[1] - o.occlusion_gap[0]]);
            let gap = uniform(rng, o.occlusion_gap);
            let du = (2.0 * rng.random::<f64>() - 1.0) * 6.0;
            let Some((front, front_2d)) = candidate(rng, cfg, cam, u, near_depth)? else {
                continue;
            };
            let far_depth = (near_depth + gap).min(o.depth_range[1]);
            let Some((back, back_2d)) = candidate(rng, cfg, cam, (u + du).clamp(margin, width - margin), far_depth)?
            else {
                continue;
            };
            if !admissible(&placed, &front, &front_2d, None, o) {
                continue;
            }
            let idx = placed.len();
            placed.push(Placed {
                gt: front,
                box2d: front_2d,
            });
            if admissible(&placed, &back, &back_2d, Some(idx), o) {
                placed.push(Placed {
                    gt: back,
                    box2d: back_2d,
                });
                break;
            }
            placed.pop();
        }
    }
    while placed.len() < n {
        let mut added = false;
        for _ in 0..o.max_attempts {
            let u = uniform(rng, [margin, width - margin]);
            let depth = uniform(rng, o.depth_range);
            if let Some((gt, box2d)) = candidate(rng, cfg, cam, u, depth)? {
                if admissible(&placed, &gt, &box2d, None, o) {
                    placed.push(Placed {
                        gt,
                        box2d,
                    });
                    added = true;
                    break;
                }
            }
        }
        if !added {
            break;
        }
    }
    Ok(placed)
}

/// Ego pose in the global frame `tau` seconds before the scene timestamp.
fn ego_pose_at(current: &Pose, tau: f64, r: &RadarConfig) -> Pose {
    // constant speed and yaw rate, integrated along the arc backwards in time
    let w = r.ego_yaw_rate;
    let (dx, dy) = if w.abs() > 1e-12 {
        let a = -w * tau;
        (r.ego_speed * a.sin() / w, r.ego_speed * (1.0 - a.cos()) / w)
    } else {
        (-r.ego_speed * tau, 0.0)
    };
    let local = Pose::from_yaw(-w * tau, Vec3::new(dx, dy, 0.0));
    current.compose(&local)
}

fn radar_sweeps(
    cfg: &SynthConfig,
    timestamp: f64,
    ego_pose: &Pose,
    objects: &[Box3D],
    rng: &mut ChaCha8Rng,
    clutter_rng: &mut ChaCha8Rng,
) -> Result<(Vec<RadarSweep>, Vec<Vec<Option<usize>>>)> {
    let r = &cfg.radar;
    let radial = Normal::new(0.0, r.radial_sigma).map_err(|e| Error::Config(e.to_string()))?;
    let lateral = Normal::new(0.0, r.lateral_sigma).map_err(|e| Error::Config(e.to_string()))?;
    let mut sweeps = Vec::with_capacity(r.num_sweeps);
    let mut owners = Vec::with_capacity(r.num_sweeps);
    for k in 0..r.num_sweeps {
        let tau = k as f64 * r.sweep_interval;
        let t = timestamp - tau;
        let pose = ego_pose_at(ego_pose, tau, r);
        let to_sweep = pose.inverse().compose(ego_pose);
        let mut points = Vec::new();
        let mut who = Vec::new();
        for (i, obj) in objects.iter().enumerate() {
            let v_now = Vec3::new(obj.velocity[0], obj.velocity[1], 0.0);
            let center = to_sweep.transform_point(obj.center - v_now * tau);
            let v = to_sweep.rotate_vector(v_now);
            for _ in 0..r.points_per_object {
                let (e_r, e_l) = (radial.sample(rng), lateral.sample(rng));
                let u: f64 = 2.0 * rng.random::<f64>() - 1.0;
                let bearing = center.y.atan2(center.x);
                let (c, s) = (bearing.cos(), bearing.sin());
                let x = center.x + e_r * c - e_l * s;
                let y = center.y + e_r * s + e_l * c;
                let z = match r.z_mode {
                    ZMode::Clean => center.z,
                    ZMode::Uniform => center.z + u * r.z_range,
                    ZMode::Ground => 0.0,
                };
                let vel = radial_project([x, y], [v.x, v.y])?;
                points.push(RadarPoint::new(Vec3::new(x, y, z), vel, t));
                who.push(Some(i));
            }
        }
        let [x0, x1, y0, y1] = r.clutter_region;
        for _ in 0..r.clutter_per_sweep {
            let x = uniform(clutter_rng, [x0, x1]);
            let y = uniform(clutter_rng, [y0, y1]);
            let z = uniform(clutter_rng, [0.0, 1.5]);
            let v = [uniform(clutter_rng, [-1.0, 1.0]), uniform(clutter_rng, [-1.0, 1.0])];
            let vel = radial_project([x, y], v).unwrap_or([0.0, 0.0]);
            points.push(RadarPoint::new(Vec3::new(x, y, z), vel, t));
            who.push(None);
        }
        sweeps.push(RadarSweep {
            points,
            ego_pose: pose,
            timestamp: t,
        });
        owners.push(who);
    }
    Ok((sweeps, owners))
}

/// Deterministic in `(cfg, seed)`.
pub fn generate_scene(cfg: &SynthConfig, seed: u64) -> Result<Scene> {
    cfg.validate()?;
    let cam = cfg.camera.camera()?;
    let mut obj_rng = stream(seed, STREAM_OBJECTS);
    let mut det_rng = stream(seed, STREAM_DETECTOR);
    let mut radar_rng = stream(seed, STREAM_RADAR);
    let mut clutter_rng = stream(seed, STREAM_CLUTTER);

    let timestamp = seed as f64;
    let ego_pose = Pose::from_yaw(
        uniform(&mut obj_rng, [-PI, PI]),
        Vec3::new(uniform(&mut obj_rng, [-500.0, 500.0]), uniform(&mut obj_rng, [-500.0, 500.0]), 0.0),
    );
    let gt_boxes: Vec<Box3D> = place_objects(cfg, &cam, &mut obj_rng)?.into_iter().map(|p| p.gt).collect();
    let dets = gt_boxes
        .iter()
        .map(|gt| record_from_box(gt, &cam, cfg.stride, &cfg.detector, NUM_ATTRIBUTES, &mut det_rng))
        .collect::<Result<Vec<_>>>()?;
    let (radar_sweeps, radar_owners) =
        radar_sweeps(cfg, timestamp, &ego_pose, &gt_boxes, &mut radar_rng, &mut clutter_rng)?;

    Ok(Scene {
        scene_id: scene_id(seed),
        timestamp,
        ego_pose,
        camera: cam,
        radar_sweeps,
        radar_owners,
        gt_boxes,
        preliminary_dets: Some(dets),
    })
}

/// Fraction of objects that belong to an occluded pair: two objects whose
/// image boxes overlap by at least `min_overlap` of the farther one's area.
pub fn occluded_fraction(scene: &Scene, min_overlap: f64) -> f64 {
    let cam = &scene.camera;
    let boxes: Vec<(f64, Box2D)> = scene
        .gt_boxes
        .iter()
        .filter_map(|b| box3d_to_box2d(b, cam).ok().map(|b2| (cam.ego_to_camera(b.center).z, b2)))
        .collect();
    if boxes.is_empty() {
        return 0.0;
    }
    let mut member = vec![false; boxes.len()];
    for i in 0..boxes.len() {
        for j in 0..boxes.len() {
            let (di, bi) = &boxes[i];
            let (dj, bj) = &boxes[j];
            if i != j && dj < di && bi.area() > 0.0 && bi.intersection_area(bj) / bi.area() >= min_overlap {
                member[i] = true;
                member[j] = true;
            }
        }
    }
    member.iter().filter(|m| **m).count() as f64 / boxes.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn committed_default_config_matches_code() {
        let parsed = SynthConfig::from_toml(DEFAULT_CONFIG_TOML).unwrap();
        assert_eq!(parsed, SynthConfig::default());
    }

    #[test]
    fn same_seed_same_scene() {
        let cfg = SynthConfig::default();
        assert_eq!(generate_scene(&cfg, 42).unwrap(), generate_scene(&cfg, 42).unwrap());
        assert_ne!(generate_scene(&cfg, 42).unwrap(), generate_scene(&cfg, 43).unwrap());
    }

    #[test]
    fn one_point_per_object_without_clutter() {
        let mut cfg = SynthConfig::noiseless();
        cfg.radar.points_per_object = 1;
        for seed in 0..20 {
            let s = generate_scene(&cfg, seed).unwrap();
            let points: usize = s.radar_sweeps.iter().map(|sw| sw.points.len()).sum();
            assert_eq!(points, s.gt_boxes.len());
        }
    }

    #[test]
    fn noiseless_detections_are_projections() {
        let cfg = SynthConfig::noiseless();
        let s = generate_scene(&cfg, 5).unwrap();
        for (gt, rec) in s.gt_boxes.iter().zip(s.preliminary_dets.as_ref().unwrap()) {
            let est = rec.estimated_box(&s.camera).unwrap();
            assert!((est.center - gt.center).norm() < 1e-9);
            assert_eq!(rec.box2d, box3d_to_box2d(gt, &s.camera).unwrap());
        }
    }

    #[test]
    fn z_mode_changes_only_heights() {
        let clean = SynthConfig::default();
        let mut noisy = clean.clone();
        noisy.radar.z_mode = ZMode::Uniform;
        let (a, b) = (generate_scene(&clean, 9).unwrap(), generate_scene(&noisy, 9).unwrap());
        assert_eq!(a.gt_boxes, b.gt_boxes);
        for (sa, sb) in a.radar_sweeps.iter().zip(&b.radar_sweeps) {
            for (pa, pb) in sa.points.iter().zip(&sb.points) {
                assert_eq!((pa.position.x, pa.position.y), (pb.position.x, pb.position.y));
            }
        }
    }

    #[test]
    fn occluded_pairs_are_generated() {
        let mut cfg = SynthConfig::default();
        cfg.objects.occluded_pair_fraction = 0.6;
        let mean: f64 = (0..20)
            .map(|seed| occluded_fraction(&generate_scene(&cfg, seed).unwrap(), 0.25))
            .sum::<f64>()
            / 20.0;
        assert!(mean >= 0.3, "mean occluded fraction {mean}");
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = SynthConfig::default();
        cfg.radar.radial_sigma = -1.0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = SynthConfig::default();
        cfg.objects.depth_range = [30.0, 10.0];
        assert!(cfg.validate().is_err());
    }
}
