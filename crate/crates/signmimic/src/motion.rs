//! Motion clips and capture ingestion.
//!
//! # Clip file schema (version 1)
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "rate": 30.0,
//!   "label": "father",
//!   "frames": [
//!     {"root_position": [0.0, 0.9, 0.0],
//!      "root_rotation": [1.0, 0.0, 0.0, 0.0],
//!      "joints": {"chest": [1.0, 0.0, 0.0, 0.0], "right_elbow": 0.7}}
//!   ]
//! }
//! ```
//!
//! Spherical joints store wxyz quaternions, revolute joints store the
//! angle. Joints absent from a frame sit at rest; names that do not exist
//! in the model are a schema error. A clip with `n` frames spans
//! `(n - 1) / rate` seconds, frame `i` at time `i / rate`.
//!
//! # Capture format
//!
//! Monocular capture export: per frame, 24 SMPL body joints as axis-angle
//! triples, optionally 15 axis-angle rotations and 21 keypoints per hand.
//! Either one JSON document with a `frames` array, or a directory of
//! `frame_*.json` files (sorted by name) with an optional `capture.json`
//! holding `{"fps": ...}`. When a hand has both keypoints and rotations,
//! rotations win; keypoints alone are treated as no rotation data for
//! that hand.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::math::{self, Vec3};
use crate::skeleton::{JointKind, JointRotation, Pose, SkeletonModel};

pub const CLIP_SCHEMA_VERSION: u32 = 1;

/// SMPL body joint order used by the capture format.
pub const SMPL_BODY_NAMES: [&str; 24] = [
    "pelvis",
    "left_hip",
    "right_hip",
    "spine1",
    "left_knee",
    "right_knee",
    "spine2",
    "left_ankle",
    "right_ankle",
    "spine3",
    "left_foot",
    "right_foot",
    "neck",
    "left_collar",
    "right_collar",
    "head",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "left_hand",
    "right_hand",
];

/// Per-hand source joint order: three segments per digit, thumb first.
pub const HAND_SOURCE_NAMES: [&str; 15] = [
    "thumb1", "thumb2", "thumb3", "index1", "index2", "index3", "middle1", "middle2", "middle3",
    "ring1", "ring2", "ring3", "pinky1", "pinky2", "pinky3",
];

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(untagged)]
pub enum JointValue {
    Angle(f64),
    Quat([f64; 4]),
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ClipFrame {
    pub root_position: [f64; 3],
    pub root_rotation: [f64; 4],
    pub joints: BTreeMap<String, JointValue>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ClipFile {
    pub schema_version: u32,
    pub rate: f64,
    pub label: String,
    pub frames: Vec<ClipFrame>,
}

#[derive(Clone, Debug)]
pub struct MotionClip {
    pub rate: f64,
    pub label: String,
    /// Aligned with the model the clip was loaded against.
    pub frames: Vec<Pose>,
    /// sha256 of the canonical serialized clip, for run manifests.
    pub source_hash: String,
}

impl MotionClip {
    pub fn from_frames(
        model: &SkeletonModel,
        rate: f64,
        label: impl Into<String>,
        frames: Vec<Pose>,
    ) -> Result<Self> {
        let label = label.into();
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::validation(format!("clip rate must be positive, got {rate}")));
        }
        if label.is_empty() {
            return Err(Error::validation("clip label must not be empty"));
        }
        if frames.is_empty() {
            return Err(Error::validation("clip needs at least one frame"));
        }
        for f in &frames {
            model.validate_pose(f).map_err(|e| Error::validation(e.to_string()))?;
        }
        let mut clip = MotionClip { rate, label, frames, source_hash: String::new() };
        clip.source_hash = hash_clip_file(&clip.to_file(model));
        Ok(clip)
    }

    pub fn load(path: impl AsRef<Path>, model: &SkeletonModel) -> Result<Self> {
        let path = path.as_ref();
        let bytes =
            std::fs::read(path).map_err(|e| Error::schema(path, format!("cannot read: {e}")))?;
        let file: ClipFile =
            serde_json::from_slice(&bytes).map_err(|e| Error::schema(path, e.to_string()))?;
        Self::from_file(file, model).map_err(|e| match e {
            Error::Validation(m) => Error::schema(path, m),
            other => other,
        })
    }

    pub fn from_file(file: ClipFile, model: &SkeletonModel) -> Result<Self> {
        if file.schema_version != CLIP_SCHEMA_VERSION {
            return Err(Error::validation(format!(
                "unsupported clip schema_version {}",
                file.schema_version
            )));
        }
        let root_joint = model.joint_of_link[model.root_link];
        let mut frames = Vec::with_capacity(file.frames.len());
        for (fi, wf) in file.frames.iter().enumerate() {
            let mut pose = model.rest_pose();
            pose.root_position =
                Vec3::new(wf.root_position[0], wf.root_position[1], wf.root_position[2]);
            pose.root_rotation = math::quat_from_wxyz(wf.root_rotation)
                .map_err(|e| Error::validation(format!("frame {fi} root: {e}")))?;
            for (name, value) in &wf.joints {
                let j = model.joint_index(name).ok_or_else(|| {
                    Error::validation(format!("frame {fi} poses unknown joint '{name}'"))
                })?;
                if Some(j) == root_joint {
                    return Err(Error::validation(format!(
                        "frame {fi}: root joint '{name}' is posed via root_rotation, not joints"
                    )));
                }
                pose.joint_rotations[j] = match (&model.joints[j].kind, value) {
                    (JointKind::Spherical, JointValue::Quat(q)) => {
                        JointRotation::Spherical(math::quat_from_wxyz(*q).map_err(|e| {
                            Error::validation(format!("frame {fi} joint '{name}': {e}"))
                        })?)
                    }
                    (JointKind::Revolute { .. }, JointValue::Angle(a)) => {
                        if !a.is_finite() {
                            return Err(Error::validation(format!(
                                "frame {fi} joint '{name}' has non-finite angle"
                            )));
                        }
                        JointRotation::Revolute(*a)
                    }
                    (JointKind::Fixed, _) => {
                        return Err(Error::validation(format!(
                            "frame {fi} poses fixed joint '{name}'"
                        )))
                    }
                    _ => {
                        return Err(Error::validation(format!(
                            "frame {fi} joint '{name}': value does not match joint kind"
                        )))
                    }
                };
            }
            frames.push(pose);
        }
        MotionClip::from_frames(model, file.rate, file.label, frames)
    }

    pub fn to_file(&self, model: &SkeletonModel) -> ClipFile {
        let root_joint = model.joint_of_link[model.root_link];
        let frames = self
            .frames
            .iter()
            .map(|pose| {
                let mut joints = BTreeMap::new();
                for (j, joint) in model.joints.iter().enumerate() {
                    if Some(j) == root_joint {
                        continue;
                    }
                    match (&joint.kind, &pose.joint_rotations[j]) {
                        (JointKind::Spherical, JointRotation::Spherical(q)) => {
                            joints.insert(
                                joint.name.clone(),
                                JointValue::Quat(math::quat_to_wxyz(q)),
                            );
                        }
                        (JointKind::Revolute { .. }, JointRotation::Revolute(a)) => {
                            joints.insert(joint.name.clone(), JointValue::Angle(*a));
                        }
                        _ => {}
                    }
                }
                ClipFrame {
                    root_position: [
                        pose.root_position.x,
                        pose.root_position.y,
                        pose.root_position.z,
                    ],
                    root_rotation: math::quat_to_wxyz(&pose.root_rotation),
                    joints,
                }
            })
            .collect();
        ClipFile {
            schema_version: CLIP_SCHEMA_VERSION,
            rate: self.rate,
            label: self.label.clone(),
            frames,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>, model: &SkeletonModel) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.to_file(model))?;
        std::fs::write(path, json.as_bytes())?;
        Ok(())
    }

    /// Clip duration in seconds: `(frames - 1) / rate`. A single-frame
    /// clip has zero duration.
    pub fn duration(&self) -> f64 {
        (self.frames.len() - 1) as f64 / self.rate
    }

    /// Pose at time `t`, slerping between neighbouring frames. `t` is
    /// clamped to `[0, duration]`; landing exactly on a frame returns it
    /// bit-identical.
    pub fn sample(&self, t: f64) -> Pose {
        let n = self.frames.len();
        if n == 1 || t <= 0.0 {
            return self.frames[0].clone();
        }
        // Times within 1e-9 of a frame snap to it, so sampling at
        // `i / rate` returns frame i bit-exactly even though the
        // division rounds.
        let mut u = t * self.rate;
        if (u - u.round()).abs() < 1e-9 {
            u = u.round();
        }
        let i = u.floor() as usize;
        if i >= n - 1 {
            return self.frames[n - 1].clone();
        }
        let f = u - i as f64;
        if f == 0.0 {
            return self.frames[i].clone();
        }
        let (a, b) = (&self.frames[i], &self.frames[i + 1]);
        let joint_rotations = a
            .joint_rotations
            .iter()
            .zip(&b.joint_rotations)
            .map(|(ra, rb)| match (ra, rb) {
                (JointRotation::Spherical(qa), JointRotation::Spherical(qb)) => {
                    JointRotation::Spherical(math::slerp(qa, qb, f))
                }
                (JointRotation::Revolute(x), JointRotation::Revolute(y)) => {
                    JointRotation::Revolute(x + (y - x) * f)
                }
                _ => JointRotation::Fixed,
            })
            .collect();
        Pose {
            root_position: a.root_position + (b.root_position - a.root_position) * f,
            root_rotation: math::slerp(&a.root_rotation, &b.root_rotation, f),
            joint_rotations,
        }
    }

    /// Normalized phase `t / duration mod 1`, so `phase_of(duration) = 0`.
    pub fn phase_of(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::contract(format!("phase_of: t must be >= 0, got {t}")));
        }
        let d = self.duration();
        if d == 0.0 {
            return Ok(0.0);
        }
        Ok((t / d).fract())
    }

    /// Uniform resampling at `new_rate`. The frame count is chosen so the
    /// sampled grid covers the full duration: the first frame is exact and
    /// the last lands on (or is clamped to) the original endpoint, so
    /// duration is preserved up to one frame interval at the new rate.
    pub fn resample(&self, model: &SkeletonModel, new_rate: f64) -> Result<MotionClip> {
        if !(new_rate > 0.0 && new_rate.is_finite()) {
            return Err(Error::contract(format!("resample rate must be positive, got {new_rate}")));
        }
        let d = self.duration();
        let n_new = (d * new_rate - 1e-9).ceil().max(0.0) as usize + 1;
        let frames: Vec<Pose> =
            (0..n_new).map(|i| self.sample(i as f64 / new_rate)).collect();
        let mut clip = MotionClip {
            rate: new_rate,
            label: self.label.clone(),
            frames,
            source_hash: String::new(),
        };
        clip.source_hash = hash_clip_file(&clip.to_file(model));
        Ok(clip)
    }
}

fn hash_clip_file(file: &ClipFile) -> String {
    let canon = serde_json::to_vec(file).expect("clip serializes");
    let mut h = Sha256::new();
    h.update(&canon);
    format!("{:x}", h.finalize())
}

/// Mirrors a pose across the sagittal plane: left and right joints swap,
/// every rotation is conjugated by the reflection, the root translation
/// flips its x component.
pub fn mirror_pose(model: &SkeletonModel, pose: &Pose) -> Pose {
    let mut out = pose.clone();
    out.root_position = math::mirror_vec(&pose.root_position);
    out.root_rotation = math::mirror_quat(&pose.root_rotation);
    for (j, joint) in model.joints.iter().enumerate() {
        let twin = if let Some(stem) = joint.name.strip_prefix("left_") {
            model.joint_index(&format!("right_{stem}"))
        } else if let Some(stem) = joint.name.strip_prefix("right_") {
            model.joint_index(&format!("left_{stem}"))
        } else {
            None
        }
        .unwrap_or(j);
        out.joint_rotations[j] = match &pose.joint_rotations[twin] {
            JointRotation::Spherical(q) => JointRotation::Spherical(math::mirror_quat(q)),
            // Axes of mirrored pairs satisfy a_L = -M a_R, so the angle
            // carries over unchanged.
            JointRotation::Revolute(a) => JointRotation::Revolute(*a),
            JointRotation::Fixed => JointRotation::Fixed,
        };
    }
    out
}

#[derive(Serialize, Deserialize, Clone, Debug, Default)]
pub struct CaptureFrame {
    pub body_rotations: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_hand_rotations: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_hand_rotations: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_hand_keypoints: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_hand_keypoints: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_translation: Option<[f64; 3]>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct SourceCapture {
    pub fps: f64,
    pub frames: Vec<CaptureFrame>,
}

#[derive(Serialize, Deserialize, Debug)]
struct CaptureMeta {
    fps: f64,
}

impl SourceCapture {
    /// Loads either a single concatenated document or a directory of
    /// per-frame exports.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let capture = if path.is_dir() {
            let mut names: Vec<_> = std::fs::read_dir(path)?
                .filter_map(|e| e.ok())
                .map(|e| e.file_name().to_string_lossy().into_owned())
                .filter(|n| n.starts_with("frame_") && n.ends_with(".json"))
                .collect();
            if names.is_empty() {
                return Err(Error::schema(path, "directory holds no frame_*.json files"));
            }
            names.sort();
            let fps = match std::fs::read(path.join("capture.json")) {
                Ok(bytes) => {
                    let meta: CaptureMeta = serde_json::from_slice(&bytes)
                        .map_err(|e| Error::schema(path.join("capture.json"), e.to_string()))?;
                    meta.fps
                }
                Err(_) => 30.0,
            };
            let mut frames = Vec::with_capacity(names.len());
            for name in names {
                let fp = path.join(&name);
                let bytes = std::fs::read(&fp)?;
                let frame: CaptureFrame = serde_json::from_slice(&bytes)
                    .map_err(|e| Error::schema(&fp, e.to_string()))?;
                frames.push(frame);
            }
            SourceCapture { fps, frames }
        } else {
            let bytes = std::fs::read(path)
                .map_err(|e| Error::schema(path, format!("cannot read: {e}")))?;
            serde_json::from_slice(&bytes).map_err(|e| Error::schema(path, e.to_string()))?
        };
        capture.validate().map_err(|e| match e {
            Error::Validation(m) => Error::schema(path, m),
            other => other,
        })?;
        Ok(capture)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json.as_bytes())?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::validation(format!("capture fps must be positive, got {}", self.fps)));
        }
        if self.frames.is_empty() {
            return Err(Error::validation("capture holds no frames"));
        }
        for (i, f) in self.frames.iter().enumerate() {
            if f.body_rotations.len() != SMPL_BODY_NAMES.len() {
                return Err(Error::validation(format!(
                    "frame {i}: {} body rotations, expected {}",
                    f.body_rotations.len(),
                    SMPL_BODY_NAMES.len()
                )));
            }
            for (side, h) in
                [("left", &f.left_hand_rotations), ("right", &f.right_hand_rotations)]
            {
                if let Some(h) = h {
                    if h.len() != HAND_SOURCE_NAMES.len() {
                        return Err(Error::validation(format!(
                            "frame {i}: {side} hand has {} rotations, expected {}",
                            h.len(),
                            HAND_SOURCE_NAMES.len()
                        )));
                    }
                }
            }
            for (side, k) in
                [("left", &f.left_hand_keypoints), ("right", &f.right_hand_keypoints)]
            {
                if let Some(k) = k {
                    if k.len() != 21 {
                        return Err(Error::validation(format!(
                            "frame {i}: {side} hand has {} keypoints, expected 21",
                            k.len()
                        )));
                    }
                }
            }
            let all = f
                .body_rotations
                .iter()
                .chain(f.left_hand_rotations.iter().flatten())
                .chain(f.right_hand_rotations.iter().flatten())
                .chain(f.left_hand_keypoints.iter().flatten())
                .chain(f.right_hand_keypoints.iter().flatten());
            if all.flat_map(|v| v.iter()).any(|x| !x.is_finite()) {
                return Err(Error::validation(format!("frame {i} contains non-finite values")));
            }
        }
        Ok(())
    }

    /// Swaps sides and conjugates every rotation by the sagittal
    /// reflection. Used by the mirroring tests; `convert` mirrors at the
    /// single-hand level instead.
    pub fn mirrored(&self) -> SourceCapture {
        let mirror_body = |rots: &Vec<[f64; 3]>| -> Vec<[f64; 3]> {
            let mut out = rots.clone();
            for (i, name) in SMPL_BODY_NAMES.iter().enumerate() {
                let twin = if let Some(stem) = name.strip_prefix("left_") {
                    SMPL_BODY_NAMES.iter().position(|n| *n == format!("right_{stem}")).unwrap()
                } else if let Some(stem) = name.strip_prefix("right_") {
                    SMPL_BODY_NAMES.iter().position(|n| *n == format!("left_{stem}")).unwrap()
                } else {
                    i
                };
                let v = Vec3::new(rots[twin][0], rots[twin][1], rots[twin][2]);
                let m = math::mirror_axis_angle(&v);
                out[i] = [m.x, m.y, m.z];
            }
            out
        };
        let mirror_hand = |rots: &Option<Vec<[f64; 3]>>| {
            rots.as_ref().map(|h| {
                h.iter()
                    .map(|v| {
                        let m = math::mirror_axis_angle(&Vec3::new(v[0], v[1], v[2]));
                        [m.x, m.y, m.z]
                    })
                    .collect()
            })
        };
        let mirror_points = |pts: &Option<Vec<[f64; 3]>>| {
            pts.as_ref().map(|k| {
                k.iter().map(|p| [-p[0], p[1], p[2]]).collect()
            })
        };
        SourceCapture {
            fps: self.fps,
            frames: self
                .frames
                .iter()
                .map(|f| CaptureFrame {
                    body_rotations: mirror_body(&f.body_rotations),
                    left_hand_rotations: mirror_hand(&f.right_hand_rotations),
                    right_hand_rotations: mirror_hand(&f.left_hand_rotations),
                    left_hand_keypoints: mirror_points(&f.right_hand_keypoints),
                    right_hand_keypoints: mirror_points(&f.left_hand_keypoints),
                    root_translation: f.root_translation.map(|t| [-t[0], t[1], t[2]]),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvertOptions {
    pub label: String,
    /// Overrides the capture's frame rate for the produced clip.
    pub fps: Option<f64>,
    /// Fill a missing left hand with the mirrored right hand.
    pub mirror_left_from_right: bool,
    /// Centered 5-frame moving average on axis-angle data before
    /// conversion.
    pub smooth: bool,
}

impl ConvertOptions {
    pub fn new(label: impl Into<String>) -> Self {
        ConvertOptions {
            label: label.into(),
            fps: None,
            mirror_left_from_right: true,
            smooth: false,
        }
    }
}

fn source_index(src: &str) -> Result<(&str, usize)> {
    let (scheme, name) = src.split_once('.').ok_or_else(|| {
        Error::validation(format!("retarget source '{src}' is not of the form scheme.name"))
    })?;
    let idx = match scheme {
        "body" => SMPL_BODY_NAMES.iter().position(|n| *n == name),
        "lhand" | "rhand" => HAND_SOURCE_NAMES.iter().position(|n| *n == name),
        _ => {
            return Err(Error::validation(format!(
                "retarget source '{src}' has unknown scheme '{scheme}'"
            )))
        }
    }
    .ok_or_else(|| Error::validation(format!("retarget source '{src}' names no capture joint")))?;
    Ok((scheme, idx))
}

/// Five-frame centered moving average, window truncated at the ends.
/// A constant signal passes through unchanged.
fn boxcar5(series: &[Vec3]) -> Vec<Vec3> {
    let n = series.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2);
            let hi = (i + 2).min(n - 1);
            let mut acc = Vec3::zeros();
            for j in lo..=hi {
                acc += series[j];
            }
            acc / (hi - lo + 1) as f64
        })
        .collect()
}

/// Retargets a capture onto the model through its `retarget_map`.
///
/// Spherical targets take the source axis-angle directly; revolute
/// targets keep only the twist about their axis. Source joints absent
/// from the map are dropped. A missing left hand is mirrored from the
/// right when requested; a frame with neither rotations nor usable data
/// for a hand leaves that hand at rest. Produced frames are clamped to
/// joint limits.
pub fn convert(
    model: &SkeletonModel,
    capture: &SourceCapture,
    opts: &ConvertOptions,
) -> Result<MotionClip> {
    capture.validate()?;
    let rate = opts.fps.unwrap_or(capture.fps);
    let root_joint = model.joint_of_link[model.root_link];

    // Resolve the map once; (source scheme, source index, target joint).
    let mut routes = Vec::new();
    for (src, dst) in &model.retarget_map {
        let (scheme, idx) = source_index(src)?;
        let j = model
            .joint_index(dst)
            .ok_or_else(|| Error::validation(format!("retarget target '{dst}' missing")))?;
        if Some(j) != root_joint
            && (model.joints[j].kind == JointKind::Fixed || model.fixed.contains(dst))
        {
            return Err(Error::validation(format!(
                "retarget_map routes '{src}' onto fixed joint '{dst}'"
            )));
        }
        routes.push((scheme, idx, j));
    }

    // Gather per-frame axis-angle series, mirroring the left hand from the
    // right where it is missing, then optionally smooth each channel.
    let n = capture.frames.len();
    let mut body: Vec<Vec<Vec3>> = vec![Vec::with_capacity(n); SMPL_BODY_NAMES.len()];
    let mut lhand: Vec<Vec<Vec3>> = vec![Vec::with_capacity(n); HAND_SOURCE_NAMES.len()];
    let mut rhand: Vec<Vec<Vec3>> = vec![Vec::with_capacity(n); HAND_SOURCE_NAMES.len()];
    let mut roots = Vec::with_capacity(n);
    for f in &capture.frames {
        for (i, r) in f.body_rotations.iter().enumerate() {
            body[i].push(Vec3::new(r[0], r[1], r[2]));
        }
        let right = f.right_hand_rotations.as_ref();
        let left = match (&f.left_hand_rotations, right, opts.mirror_left_from_right) {
            (Some(l), _, _) => Some(l.clone()),
            (None, Some(r), true) => Some(
                r.iter()
                    .map(|v| {
                        let m = math::mirror_axis_angle(&Vec3::new(v[0], v[1], v[2]));
                        [m.x, m.y, m.z]
                    })
                    .collect(),
            ),
            _ => None,
        };
        for i in 0..HAND_SOURCE_NAMES.len() {
            lhand[i].push(
                left.as_ref().map(|h| Vec3::new(h[i][0], h[i][1], h[i][2])).unwrap_or_default(),
            );
            rhand[i].push(
                right.map(|h| Vec3::new(h[i][0], h[i][1], h[i][2])).unwrap_or_default(),
            );
        }
        roots.push(
            f.root_translation.map(|t| Vec3::new(t[0], t[1], t[2])).unwrap_or_else(|| {
                model.links[model.root_link].offset
            }),
        );
    }
    if opts.smooth {
        for series in body.iter_mut().chain(lhand.iter_mut()).chain(rhand.iter_mut()) {
            *series = boxcar5(series);
        }
        roots = boxcar5(&roots);
    }

    let mut frames = Vec::with_capacity(n);
    for fi in 0..n {
        let mut pose = model.rest_pose();
        pose.root_position = roots[fi];
        for &(scheme, idx, j) in &routes {
            let aa = match scheme {
                "body" => body[idx][fi],
                "lhand" => lhand[idx][fi],
                _ => rhand[idx][fi],
            };
            if Some(j) == root_joint {
                pose.root_rotation = math::axis_angle_to_quat(&aa);
                continue;
            }
            pose.joint_rotations[j] = match &model.joints[j].kind {
                JointKind::Spherical => {
                    JointRotation::Spherical(math::axis_angle_to_quat(&aa))
                }
                JointKind::Revolute { axis } => {
                    let q = math::axis_angle_to_quat(&aa);
                    JointRotation::Revolute(math::twist_angle(&q, axis))
                }
                JointKind::Fixed => unreachable!("validated above"),
            };
        }
        model.clamp_pose(&mut pose);
        frames.push(pose);
    }
    MotionClip::from_frames(model, rate, opts.label.clone(), frames)
}
