//! JSON file formats for scenes and detections, and their conversion to
//! the core types.
//!
//! Units are meters, seconds, radians and m/s throughout. Radar points are
//! `[x, y, z, vx, vy]` in the sweep's egocentric frame; four-element points
//! `[x, y, vx, vy]` come from sensors without elevation and are placed at
//! `z = 0`.

use std::fs;
use std::path::Path;

use rcfuse_core::decoder::{DetectionRecord, PrimaryOutputs, SecondaryOutputs};
use rcfuse_core::geometry::{Box2D, Box3D, CameraModel, Dims, Intrinsics, Mat3, Pose, Vec3};
use rcfuse_core::radar::{RadarPoint, RadarSweep};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scene in memory: calibration, radar, ground truth and detector output.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub scene_id: String,
    pub timestamp: f64,
    /// Ego pose in the global frame at `timestamp`.
    pub ego_pose: Pose,
    pub camera: CameraModel,
    pub radar_sweeps: Vec<RadarSweep>,
    /// Ground-truth owner of every radar point, parallel to `radar_sweeps`.
    /// `None` marks clutter or unknown provenance.
    pub radar_owners: Vec<Vec<Option<usize>>>,
    pub gt_boxes: Vec<Box3D>,
    pub preliminary_dets: Option<Vec<DetectionRecord>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseDto {
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicsDto {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraDto {
    pub intrinsics: IntrinsicsDto,
    /// Egocentric-to-camera transform.
    pub extrinsic: PoseDto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDto {
    pub timestamp: f64,
    pub ego_pose: PoseDto,
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owners: Option<Vec<Option<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDto {
    pub class: usize,
    #[serde(default)]
    pub attribute: Option<usize>,
    pub center: [f64; 3],
    /// `[w, l, h]`
    pub dims: [f64; 3],
    pub yaw: f64,
    #[serde(default)]
    pub velocity: [f64; 2],
    #[serde(default = "one")]
    pub score: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Box2dDto {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    #[serde(default)]
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimaryDto {
    pub depth: f64,
    pub dims: [f64; 3],
    pub orientation: [f64; 8],
    pub offset: [f64; 2],
    pub size2d: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondaryDto {
    pub depth: f64,
    pub orientation: [f64; 8],
    pub velocity: [f64; 2],
    #[serde(default)]
    pub attribute_scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordDto {
    pub center_px: [f64; 2],
    pub box2d: Box2dDto,
    pub class: usize,
    pub score: f64,
    pub primary: PrimaryDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary: Option<SecondaryDto>,
    #[serde(default)]
    pub attribute_scores: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_box3d: Option<BoxDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDto {
    pub scene_id: String,
    pub timestamp: f64,
    #[serde(default = "identity_pose")]
    pub ego_pose: PoseDto,
    pub camera: CameraDto,
    #[serde(default)]
    pub radar_sweeps: Vec<SweepDto>,
    #[serde(default)]
    pub gt_boxes: Vec<BoxDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preliminary_dets: Option<Vec<RecordDto>>,
}

fn identity_pose() -> PoseDto {
    PoseDto::from(&Pose::IDENTITY)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionDto {
    pub class: usize,
    pub score: f64,
    pub center: [f64; 3],
    pub dims: [f64; 3],
    pub yaw: f64,
    pub velocity: [f64; 2],
    pub attribute: Option<usize>,
}

/// Detections of one scene, as written by `run` and read by `eval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionFile {
    pub scene_id: String,
    pub detections: Vec<DetectionDto>,
}

impl From<&Pose> for PoseDto {
    fn from(p: &Pose) -> Self {
        Self {
            rotation: p.rotation().rows,
            translation: p.translation().to_array(),
        }
    }
}

impl PoseDto {
    pub fn to_pose(&self) -> Result<Pose> {
        Ok(Pose::new(
            Mat3::from_rows(self.rotation),
            Vec3::from_array(self.translation),
        )?)
    }
}

impl From<&CameraModel> for CameraDto {
    fn from(c: &CameraModel) -> Self {
        let i = c.intrinsics();
        Self {
            intrinsics: IntrinsicsDto {
                fx: i.fx,
                fy: i.fy,
                cx: i.cx,
                cy: i.cy,
                width: i.width,
                height: i.height,
            },
            extrinsic: PoseDto::from(c.extrinsic()),
        }
    }
}

impl CameraDto {
    pub fn to_camera(&self) -> Result<CameraModel> {
        let i = &self.intrinsics;
        let intr = Intrinsics {
            fx: i.fx,
            fy: i.fy,
            cx: i.cx,
            cy: i.cy,
            width: i.width,
            height: i.height,
        };
        Ok(CameraModel::new(intr, self.extrinsic.to_pose()?)?)
    }
}

impl From<&Box3D> for BoxDto {
    fn from(b: &Box3D) -> Self {
        Self {
            class: b.class_id,
            attribute: b.attribute_id,
            center: b.center.to_array(),
            dims: b.dims.to_array(),
            yaw: b.yaw,
            velocity: b.velocity,
            score: b.score,
        }
    }
}

impl BoxDto {
    pub fn to_box(&self) -> Result<Box3D> {
        let [w, l, h] = self.dims;
        if !self.velocity.iter().all(|v| v.is_finite()) {
            return Err(Error::Format("box velocity must be finite".into()));
        }
        let b = Box3D::new(Vec3::from_array(self.center), Dims::new(w, l, h), self.yaw, self.class)?
            .with_velocity(self.velocity)
            .with_attribute(self.attribute)
            .with_score(self.score);
        b.validate()?;
        Ok(b)
    }
}

impl From<&Box3D> for DetectionDto {
    fn from(b: &Box3D) -> Self {
        Self {
            class: b.class_id,
            score: b.score,
            center: b.center.to_array(),
            dims: b.dims.to_array(),
            yaw: b.yaw,
            velocity: b.velocity,
            attribute: b.attribute_id,
        }
    }
}

impl DetectionDto {
    pub fn to_box(&self) -> Result<Box3D> {
        BoxDto {
            class: self.class,
            attribute: self.attribute,
            center: self.center,
            dims: self.dims,
            yaw: self.yaw,
            velocity: self.velocity,
            score: self.score,
        }
        .to_box()
    }
}

impl From<&DetectionRecord> for RecordDto {
    fn from(r: &DetectionRecord) -> Self {
        Self {
            center_px: r.center_px,
            box2d: Box2dDto {
                cx: r.box2d.cx,
                cy: r.box2d.cy,
                w: r.box2d.w,
                h: r.box2d.h,
                clipped: r.box2d.clipped,
            },
            class: r.class_id,
            score: r.score,
            primary: PrimaryDto {
                depth: r.primary.depth,
                dims: r.primary.dims.to_array(),
                orientation: r.primary.orientation,
                offset: r.primary.offset,
                size2d: r.primary.size2d,
            },
            secondary: r.secondary.as_ref().map(|s| SecondaryDto {
                depth: s.depth,
                orientation: s.orientation,
                velocity: s.velocity,
                attribute_scores: s.attribute_scores.clone(),
            }),
            attribute_scores: r.attribute_scores.clone(),
            gt_box3d: r.gt_box3d.as_ref().map(BoxDto::from),
        }
    }
}

impl RecordDto {
    pub fn to_record(&self) -> Result<DetectionRecord> {
        let [w, l, h] = self.primary.dims;
        let mut box2d = Box2D::new(self.box2d.cx, self.box2d.cy, self.box2d.w, self.box2d.h);
        box2d.clipped = self.box2d.clipped;
        let primary = PrimaryOutputs {
            depth: self.primary.depth,
            dims: Dims::new(w, l, h),
            orientation: self.primary.orientation,
            offset: self.primary.offset,
            size2d: self.primary.size2d,
        };
        let mut r = DetectionRecord::new(self.center_px, box2d, self.class, self.score, primary)
            .with_attribute_scores(self.attribute_scores.clone());
        r.secondary = self.secondary.as_ref().map(|s| SecondaryOutputs {
            depth: s.depth,
            orientation: s.orientation,
            velocity: s.velocity,
            attribute_scores: s.attribute_scores.clone(),
        });
        if let Some(gt) = &self.gt_box3d {
            r = r.with_ground_truth(gt.to_box()?);
        }
        r.validate()?;
        Ok(r)
    }
}

impl From<&Scene> for SceneDto {
    fn from(s: &Scene) -> Self {
        let radar_sweeps = s
            .radar_sweeps
            .iter()
            .enumerate()
            .map(|(i, sw)| {
                let owners = s.radar_owners.get(i).filter(|o| o.iter().any(Option::is_some)).cloned();
                SweepDto {
                    timestamp: sw.timestamp,
                    ego_pose: PoseDto::from(&sw.ego_pose),
                    points: sw
                        .points
                        .iter()
                        .map(|p| vec![p.position.x, p.position.y, p.position.z, p.velocity[0], p.velocity[1]])
                        .collect(),
                    owners,
                }
            })
            .collect();
        Self {
            scene_id: s.scene_id.clone(),
            timestamp: s.timestamp,
            ego_pose: PoseDto::from(&s.ego_pose),
            camera: CameraDto::from(&s.camera),
            radar_sweeps,
            gt_boxes: s.gt_boxes.iter().map(BoxDto::from).collect(),
            preliminary_dets: s
                .preliminary_dets
                .as_ref()
                .map(|d| d.iter().map(RecordDto::from).collect()),
        }
    }
}

impl SceneDto {
    pub fn to_scene(&self) -> Result<Scene> {
        if !self.timestamp.is_finite() {
            return Err(Error::Format("scene timestamp must be finite".into()));
        }
        let mut radar_sweeps = Vec::with_capacity(self.radar_sweeps.len());
        let mut radar_owners = Vec::with_capacity(self.radar_sweeps.len());
        for (i, sw) in self.radar_sweeps.iter().enumerate() {
            if !(sw.timestamp <= self.timestamp) {
                return Err(Error::Format(format!(
                    "sweep {i} timestamp {} is after the scene timestamp {}",
                    sw.timestamp, self.timestamp
                )));
            }
            let points = sw
                .points
                .iter()
                .enumerate()
                .map(|(j, p)| match p.as_slice() {
                    &[x, y, z, vx, vy] => Ok(RadarPoint::new(Vec3::new(x, y, z), [vx, vy], sw.timestamp)),
                    &[x, y, vx, vy] => Ok(RadarPoint::without_height(x, y, [vx, vy], sw.timestamp)),
                    _ => Err(Error::Format(format!(
                        "sweep {i} point {j}: expected 4 or 5 values, got {}",
                        p.len()
                    ))),
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(p) = points.iter().find(|p| !p.position.is_finite()) {
                return Err(Error::Format(format!("sweep {i}: non-finite point {:?}", p.position)));
            }
            let owners = match &sw.owners {
                Some(o) if o.len() == points.len() => o.clone(),
                Some(o) => {
                    return Err(Error::Format(format!(
                        "sweep {i}: {} owners for {} points",
                        o.len(),
                        points.len()
                    )))
                }
                None => vec![None; points.len()],
            };
            radar_sweeps.push(RadarSweep {
                points,
                ego_pose: sw.ego_pose.to_pose()?,
                timestamp: sw.timestamp,
            });
            radar_owners.push(owners);
        }
        Ok(Scene {
            scene_id: self.scene_id.clone(),
            timestamp: self.timestamp,
            ego_pose: self.ego_pose.to_pose()?,
            camera: self.camera.to_camera()?,
            radar_sweeps,
            radar_owners,
            gt_boxes: self.gt_boxes.iter().map(BoxDto::to_box).collect::<Result<_>>()?,
            preliminary_dets: self
                .preliminary_dets
                .as_ref()
                .map(|d| d.iter().map(RecordDto::to_record).collect::<Result<_>>())
                .transpose()?,
        })
    }
}

impl DetectionFile {
    pub fn new(scene_id: &str, boxes: &[Box3D]) -> Self {
        Self {
            scene_id: scene_id.to_owned(),
            detections: boxes.iter().map(DetectionDto::from).collect(),
        }
    }

    pub fn boxes(&self) -> Result<Vec<Box3D>> {
        self.detections.iter().map(DetectionDto::to_box).collect()
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_owned(),
        source,
    })
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    fs::write(path, to_json(value)).map_err(|e| Error::io(path, e))
}

/// Pretty JSON with a trailing newline. Floats use the shortest text that
/// parses back to the same value.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("DTOs always serialize");
    s.push('\n');
    s
}

pub fn load_scene(path: &Path) -> Result<Scene> {
    read_json::<SceneDto>(path)?.to_scene().map_err(|e| match e {
        Error::Core(source) => Error::Format(format!("{}: {source}", path.display())),
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn save_scene(scene: &Scene, path: &Path) -> Result<()> {
    write_json(&SceneDto::from(scene), path)
}

pub fn load_detections(path: &Path) -> Result<DetectionFile> {
    read_json(path)
}

pub fn save_detections(file: &DetectionFile, path: &Path) -> Result<()> {
    write_json(file, path)
}
