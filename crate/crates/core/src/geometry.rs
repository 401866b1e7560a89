//! Coordinate frames, pinhole projection, 3D/2D boxes and the two-bin
//! orientation encoding.

use core::f64::consts::{FRAC_PI_2, PI};
use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::math::{self, normalize_angle};

/// Tolerance used when validating rotation matrices.
pub const ROTATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        math::sqrt(self.dot(self))
    }

    /// Length of the ground-plane (x, y) component.
    pub fn norm_bev(self) -> f64 {
        math::hypot(self.x, self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Row-major 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3 {
    pub rows: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub const fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Self { rows }
    }

    /// Rotation by `yaw` about the +z axis.
    pub fn rot_z(yaw: f64) -> Self {
        let (s, c) = (math::sin(yaw), math::cos(yaw));
        Self::from_rows([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn transpose(&self) -> Self {
        let r = &self.rows;
        Self::from_rows([
            [r[0][0], r[1][0], r[2][0]],
            [r[0][1], r[1][1], r[2][1]],
            [r[0][2], r[1][2], r[2][2]],
        ])
    }

    pub fn determinant(&self) -> f64 {
        let r = &self.rows;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    /// True when `Rᵀ·R = I` within `tol` entry-wise and `det R > 0`.
    pub fn is_rotation(&self, tol: f64) -> bool {
        let rtr = self.transpose() * *self;
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                let v = rtr.rows[i][j];
                if !v.is_finite() || (v - expected).abs() > tol {
                    return false;
                }
            }
        }
        self.determinant() > 0.0
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        let r = &self.rows;
        Vec3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.rows[i][k] * o.rows[k][j]).sum();
            }
        }
        Mat3::from_rows(out)
    }
}

/// Rigid transform `p ↦ R·p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    rotation: Mat3,
    translation: Vec3,
}

impl Default for Pose {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        rotation: Mat3::IDENTITY,
        translation: Vec3::ZERO,
    };

    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self> {
        if !rotation.is_rotation(ROTATION_TOLERANCE) {
            return Err(Error::InvalidRotation);
        }
        if !translation.is_finite() {
            return Err(Error::InvalidParameter("pose translation must be finite"));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Planar pose: rotation by `yaw` about +z followed by `translation`.
    pub fn from_yaw(yaw: f64, translation: Vec3) -> Self {
        Self {
            rotation: Mat3::rot_z(yaw),
            translation,
        }
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> Vec3 {
        self.translation
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// Rotation only; for directions and velocities.
    pub fn rotate_vector(&self, v: Vec3) -> Vec3 {
        self.rotation * v
    }
}

pub fn transform_point(p: Vec3, pose: &Pose) -> Vec3 {
    pose.transform_point(p)
}

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

/// A calibrated pinhole camera. `extrinsic` maps egocentric points into the
/// camera frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    intrinsics: Intrinsics,
    extrinsic: Pose,
}

/// Image-plane location of a camera-frame point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub u: f64,
    pub v: f64,
    pub depth: f64,
}

/// Rotation taking egocentric axes (x fwd, y left, z up) to camera axes
/// (x right, y down, z fwd).
pub const EGO_TO_FORWARD_CAMERA: Mat3 =
    Mat3::from_rows([[0.0, -1.0, 0.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]]);

impl CameraModel {
    pub fn new(intrinsics: Intrinsics, extrinsic: Pose) -> Result<Self> {
        let Intrinsics {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        } = intrinsics;
        if !(fx > 0.0 && fx.is_finite() && fy > 0.0 && fy.is_finite()) {
            return Err(Error::InvalidCamera("focal lengths must be positive"));
        }
        if !(cx.is_finite() && cy.is_finite()) {
            return Err(Error::InvalidCamera("principal point must be finite"));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidCamera("image size must be positive"));
        }
        if !extrinsic.rotation.is_rotation(ROTATION_TOLERANCE) {
            return Err(Error::InvalidRotation);
        }
        Ok(Self {
            intrinsics,
            extrinsic,
        })
    }

    /// Forward-looking camera whose optical center sits at `mount` in the
    /// egocentric frame.
    pub fn forward_facing(intrinsics: Intrinsics, mount: Vec3) -> Result<Self> {
        let r = EGO_TO_FORWARD_CAMERA;
        let extrinsic = Pose::new(r, -(r * mount))?;
        Self::new(intrinsics, extrinsic)
    }

    pub fn intrinsics(&self) -> &Intrinsics {
        &self.intrinsics
    }

    pub fn extrinsic(&self) -> &Pose {
        &self.extrinsic
    }

    pub fn width(&self) -> f64 {
        f64::from(self.intrinsics.width)
    }

    pub fn height(&self) -> f64 {
        f64::from(self.intrinsics.height)
    }

    pub fn ego_to_camera(&self, p: Vec3) -> Vec3 {
        self.extrinsic.transform_point(p)
    }

    pub fn camera_to_ego(&self, p: Vec3) -> Vec3 {
        self.extrinsic.inverse().transform_point(p)
    }

    pub fn project(&self, p_cam: Vec3) -> Result<Projection> {
        project_to_image(p_cam, self)
    }

    /// Camera-frame point at z-depth `depth` along the ray through `(u, v)`.
    pub fn unproject(&self, u: f64, v: f64, depth: f64) -> Vec3 {
        let k = &self.intrinsics;
        Vec3::new(
            (u - k.cx) / k.fx * depth,
            (v - k.cy) / k.fy * depth,
            depth,
        )
    }

    /// Ground-plane bearing, in the egocentric frame, of the ray through `(u, v)`.
    pub fn ray_angle(&self, u: f64, v: f64) -> f64 {
        let dir_cam = self.unproject(u, v, 1.0);
        let dir_ego = self.extrinsic.rotation.transpose() * dir_cam;
        math::atan2(dir_ego.y, dir_ego.x)
    }

    pub fn contains_pixel(&self, u: f64, v: f64) -> bool {
        u >= 0.0 && v >= 0.0 && u <= self.width() && v <= self.height()
    }
}

pub fn project_to_image(p_cam: Vec3, cam: &CameraModel) -> Result<Projection> {
    if !(p_cam.z > 0.0) {
        return Err(Error::PointBehindCamera { z: p_cam.z });
    }
    let k = &cam.intrinsics;
    Ok(Projection {
        u: k.fx * p_cam.x / p_cam.z + k.cx,
        v: k.fy * p_cam.y / p_cam.z + k.cy,
        depth: p_cam.z,
    })
}

/// Box size in meters: `w` along the box's local x, `l` along local y, `h` vertical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dims {
    pub w: f64,
    pub l: f64,
    pub h: f64,
}

impl Dims {
    pub const fn new(w: f64, l: f64, h: f64) -> Self {
        Self { w, l, h }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.w, self.l, self.h]
    }

    pub fn volume(self) -> f64 {
        self.w * self.l * self.h
    }

    pub fn is_valid(self) -> bool {
        [self.w, self.l, self.h]
            .iter()
            .all(|d| *d > 0.0 && d.is_finite())
    }
}

/// An oriented 3D box in the egocentric frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3D {
    pub center: Vec3,
    pub dims: Dims,
    /// Rotation about +z, in `(-π, π]`.
    pub yaw: f64,
    /// Ground-plane velocity (vx, vy), m/s.
    pub velocity: [f64; 2],
    pub class_id: usize,
    /// `None` when the attribute is unknown.
    pub attribute_id: Option<usize>,
    pub score: f64,
}

impl Box3D {
    pub fn new(center: Vec3, dims: Dims, yaw: f64, class_id: usize) -> Result<Self> {
        let b = Self {
            center,
            dims,
            yaw: normalize_angle(yaw),
            velocity: [0.0, 0.0],
            class_id,
            attribute_id: None,
            score: 1.0,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn with_velocity(mut self, velocity: [f64; 2]) -> Self {
        self.velocity = velocity;
        self
    }

    pub fn with_attribute(mut self, attribute_id: Option<usize>) -> Self {
        self.attribute_id = attribute_id;
        self
    }

    pub fn with_score(mut self, score: f64) -> Self {
        self.score = score;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.is_finite() {
            return Err(Error::InvalidBox("center must be finite"));
        }
        if !self.dims.is_valid() {
            return Err(Error::InvalidBox("dimensions must be positive"));
        }
        if !(self.yaw > -PI && self.yaw <= PI) {
            return Err(Error::InvalidBox("yaw must lie in (-pi, pi]"));
        }
        if !(0.0..=1.0).contains(&self.score) {
            return Err(Error::InvalidBox("score must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn corners(&self) -> [Vec3; 8] {
        box3d_corners(self)
    }
}

/// The 8 corners of the yaw-rotated cuboid. Bottom face first, then top,
/// each in counter-clockwise order seen from above.
pub fn box3d_corners(b: &Box3D) -> [Vec3; 8] {
    let (hw, hl, hh) = (b.dims.w / 2.0, b.dims.l / 2.0, b.dims.h / 2.0);
    let rot = Mat3::rot_z(b.yaw);
    let local = [
        Vec3::new(hw, hl, -hh),
        Vec3::new(-hw, hl, -hh),
        Vec3::new(-hw, -hl, -hh),
        Vec3::new(hw, -hl, -hh),
        Vec3::new(hw, hl, hh),
        Vec3::new(-hw, hl, hh),
        Vec3::new(-hw, -hl, hh),
        Vec3::new(hw, -hl, hh),
    ];
    local.map(|c| rot * c + b.center)
}

/// Axis-aligned image rectangle, center + size in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box2D {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    /// Set when the extent was cut by the image border or by corners behind the camera.
    pub clipped: bool,
}

impl Box2D {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Self {
            cx,
            cy,
            w,
            h,
            clipped: false,
        }
    }

    pub fn from_extent(left: f64, top: f64, right: f64, bottom: f64) -> Self {
        Self::new(
            (left + right) / 2.0,
            (top + bottom) / 2.0,
            right - left,
            bottom - top,
        )
    }

    pub fn left(&self) -> f64 {
        self.cx - self.w / 2.0
    }

    pub fn right(&self) -> f64 {
        self.cx + self.w / 2.0
    }

    pub fn top(&self) -> f64 {
        self.cy - self.h / 2.0
    }

    pub fn bottom(&self) -> f64 {
        self.cy + self.h / 2.0
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Inclusive containment test.
    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.left() && u <= self.right() && v >= self.top() && v <= self.bottom()
    }

    pub fn intersection_area(&self, o: &Box2D) -> f64 {
        let w = self.right().min(o.right()) - self.left().max(o.left());
        let h = self.bottom().min(o.bottom()) - self.top().max(o.top());
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    pub fn iou(&self, o: &Box2D) -> f64 {
        let inter = self.intersection_area(o);
        let union = self.area() + o.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }
}

/// Image rectangle of a box before and after clipping to the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageFootprint {
    pub unclipped: Box2D,
    pub clipped: Box2D,
}

/// Bounding rectangle of the projected corners that lie in front of the camera.
pub fn box3d_footprint(b: &Box3D, cam: &CameraModel) -> Result<ImageFootprint> {
    let mut any = false;
    let mut behind = false;
    let (mut u0, mut v0, mut u1, mut v1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in box3d_corners(b) {
        match cam.project(cam.ego_to_camera(c)) {
            Ok(p) => {
                any = true;
                u0 = u0.min(p.u);
                v0 = v0.min(p.v);
                u1 = u1.max(p.u);
                v1 = v1.max(p.v);
            }
            Err(_) => behind = true,
        }
    }
    if !any {
        return Err(Error::FullyBehindCamera);
    }
    let mut unclipped = Box2D::from_extent(u0, v0, u1, v1);
    unclipped.clipped = behind;
    let (w, h) = (cam.width(), cam.height());
    let (cu0, cv0) = (u0.clamp(0.0, w), v0.clamp(0.0, h));
    let (cu1, cv1) = (u1.clamp(0.0, w), v1.clamp(0.0, h));
    let mut clipped = Box2D::from_extent(cu0, cv0, cu1, cv1);
    clipped.clipped = behind || cu0 != u0 || cv0 != v0 || cu1 != u1 || cv1 != v1;
    Ok(ImageFootprint { unclipped, clipped })
}

/// Image-clipped 2D box of a 3D box; `clipped` records whether clipping occurred.
pub fn box3d_to_box2d(b: &Box3D, cam: &CameraModel) -> Result<Box2D> {
    box3d_footprint(b, cam).map(|f| f.clipped)
}

/// Number of scalars in an orientation encoding.
pub const ORIENTATION_LEN: usize = 8;

/// Bin centers of the two orientation bins.
pub const BIN_CENTERS: [f64; 2] = [-FRAC_PI_2, FRAC_PI_2];

/// Each bin spans its center ± this half-width, so the bins overlap by π/3.
pub const BIN_HALF_WIDTH: f64 = 2.0 * PI / 3.0;

/// Two-bin orientation code. Bin `b` occupies slots `4b..4b+4` as
/// `[out_score, in_score, sin(offset), cos(offset)]`, where the offset is the
/// observation angle relative to the bin center. Bins that do not contain
/// the angle carry a zero residual.
pub type OrientationCode = [f64; ORIENTATION_LEN];

pub fn encode_orientation(yaw: f64, ray_angle: f64) -> OrientationCode {
    let alpha = normalize_angle(yaw - ray_angle);
    let mut code = [0.0; ORIENTATION_LEN];
    for (b, center) in BIN_CENTERS.iter().enumerate() {
        let offset = normalize_angle(alpha - center);
        let slot = &mut code[4 * b..4 * b + 4];
        if offset.abs() <= BIN_HALF_WIDTH {
            slot.copy_from_slice(&[0.0, 1.0, math::sin(offset), math::cos(offset)]);
        } else {
            slot.copy_from_slice(&[1.0, 0.0, 0.0, 0.0]);
        }
    }
    code
}

/// Index of the bin with the larger `in - out` score; ties go to bin 0.
pub fn select_bin(code: &OrientationCode) -> usize {
    let score = |b: usize| code[4 * b + 1] - code[4 * b];
    if score(1) > score(0) {
        1
    } else {
        0
    }
}

pub fn decode_orientation_with_bin(code: &OrientationCode, ray_angle: f64, bin: usize) -> f64 {
    let (s, c) = (code[4 * bin + 2], code[4 * bin + 3]);
    normalize_angle(BIN_CENTERS[bin] + math::atan2(s, c) + ray_angle)
}

pub fn decode_orientation(code: &OrientationCode, ray_angle: f64) -> f64 {
    decode_orientation_with_bin(code, ray_angle, select_bin(code))
}
