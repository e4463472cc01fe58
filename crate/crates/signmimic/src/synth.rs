//! Deterministic generators for the bundled assets: the toy planar arm,
//! the 45-link signing character, sign clips, and synthetic captures.
//!
//! Everything here is seeded; the committed assets under `assets/` are
//! regenerated bit-identically by `examples/make_assets.rs`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::{self, Vec3};
use crate::motion::{self, CaptureFrame, ConvertOptions, MotionClip, SourceCapture};
use crate::reward::RewardConfig;
use crate::skeleton::{JointRotation, JointSpec, LinkSpec, ModelFile, Shape, SkeletonModel};

/// Bundled sign clips: gloss label and generator seed (dictionary ids of
/// the source videos).
pub const SIGN_SET: [(&str, u64); 5] = [
    ("above", 433),
    ("snow", 52861),
    ("father", 69318),
    ("mother", 69402),
    ("yes", 69546),
];

pub const TUNING_SEED: u64 = 69000;

// Calibration constants for the tuning motion. Amplitudes in radians;
// oscillations are whole numbers of cycles over the loop so the clip
// stays seamless.
const JITTER_AMP: f64 = 0.30;
const JITTER_CYCLES_MIN: u32 = 53;
const JITTER_CYCLES_MAX: u32 = 58;
const TREMOR_AMP: f64 = 0.045;
const TREMOR_CYCLES: f64 = 17.0;
const TUNING_FRAMES: usize = 121;

fn wrap01(x: f64) -> f64 {
    x - x.floor()
}

/// Cyclic C1 envelope, zero at the seam.
fn bump(phi: f64) -> f64 {
    let s = (std::f64::consts::PI * phi).sin();
    s * s
}

fn link(name: &str, parent: Option<&str>, offset: [f64; 3], mass: f64, shape: Shape) -> LinkSpec {
    LinkSpec { name: name.into(), parent: parent.map(String::from), offset, mass, shape }
}

fn spherical(name: &str, child: &str, kp: f64, kd: f64) -> JointSpec {
    JointSpec {
        name: name.into(),
        kind: "spherical".into(),
        child: child.into(),
        axis: None,
        kp: Some(kp),
        kd: Some(kd),
        limits: None,
    }
}

fn revolute(
    name: &str,
    child: &str,
    axis: [f64; 3],
    kp: f64,
    kd: f64,
    limits: [f64; 2],
) -> JointSpec {
    JointSpec {
        name: name.into(),
        kind: "revolute".into(),
        child: child.into(),
        axis: Some(axis),
        kp: Some(kp),
        kd: Some(kd),
        limits: Some(vec![limits]),
    }
}

fn fixed_joint(name: &str, child: &str) -> JointSpec {
    JointSpec {
        name: name.into(),
        kind: "fixed".into(),
        child: child.into(),
        axis: None,
        kp: None,
        kd: None,
        limits: Some(vec![]),
    }
}

/// Two-segment planar arm under gravity-free PD, deliberately overdamped
/// so zero-action tracking lags the reference and leaves headroom for a
/// learned controller.
pub fn toy_model() -> SkeletonModel {
    let spec = ModelFile {
        schema_version: 1,
        name: "toy_arm".into(),
        links: vec![
            link("base", None, [0.0, 0.0, 0.0], 5.0, Shape::Box { extents: [0.2, 0.2, 0.2] }),
            link(
                "seg1",
                Some("base"),
                [0.0, 0.0, 0.0],
                1.0,
                Shape::Capsule { radius: 0.04, length: 0.5 },
            ),
            link(
                "seg2",
                Some("seg1"),
                [0.5, 0.0, 0.0],
                1.0,
                Shape::Capsule { radius: 0.04, length: 0.5 },
            ),
            link("tip", Some("seg2"), [0.5, 0.0, 0.0], 0.05, Shape::Sphere { radius: 0.03 }),
        ],
        joints: vec![
            revolute("j1", "seg1", [0.0, 0.0, 1.0], 30.0, 12.0, [-2.5, 2.5]),
            revolute("j2", "seg2", [0.0, 0.0, 1.0], 30.0, 12.0, [-2.5, 2.5]),
            fixed_joint("j_tip", "tip"),
        ],
        fixed: vec![],
        retarget_map: BTreeMap::new(),
    };
    SkeletonModel::from_spec(spec).expect("toy model is valid")
}

/// One 2 s cycle: shoulder swings a sine, elbow folds and unfolds.
pub fn toy_clip(model: &SkeletonModel, rate: f64) -> MotionClip {
    let n = (2.0 * rate).round() as usize + 1;
    let mut frames = Vec::with_capacity(n);
    for i in 0..n - 1 {
        let phi = i as f64 / (n - 1) as f64;
        let w = 2.0 * std::f64::consts::PI * phi;
        let mut pose = model.rest_pose();
        pose.joint_rotations[0] = JointRotation::Revolute(0.6 * w.sin());
        pose.joint_rotations[1] = JointRotation::Revolute(0.45 * (1.0 - w.cos()));
        frames.push(pose);
    }
    frames.push(frames[0].clone());
    MotionClip::from_frames(model, rate, "toy_cycle", frames).expect("toy clip is valid")
}

pub fn toy_reward_config() -> RewardConfig {
    let mut cfg = RewardConfig::default();
    cfg.k_pose_body = 2.0;
    cfg.k_vel_body = 0.05;
    cfg.k_end_effector = 10.0;
    cfg.k_root = 10.0;
    cfg.body_joints = ["j1", "j2"].into_iter().map(String::from).collect();
    cfg.hand_joints.clear();
    cfg.end_effector_links = vec!["tip".into()];
    cfg
}

struct Digit {
    name: &'static str,
    base: [f64; 3],
    axis: [f64; 3],
    seg_offsets: [[f64; 3]; 2],
    seg_lengths: [f64; 3],
}

const RIGHT_DIGITS: [Digit; 5] = [
    Digit {
        name: "thumb",
        base: [0.030, -0.040, 0.012],
        axis: [0.0, 0.0, -1.0],
        seg_offsets: [[0.0, -0.036, 0.0], [0.0, -0.030, 0.0]],
        seg_lengths: [0.034, 0.028, 0.024],
    },
    Digit {
        name: "index",
        base: [0.027, -0.100, 0.0],
        axis: [-1.0, 0.0, 0.0],
        seg_offsets: [[0.0, -0.034, 0.0], [0.0, -0.026, 0.0]],
        seg_lengths: [0.032, 0.024, 0.020],
    },
    Digit {
        name: "middle",
        base: [0.009, -0.105, 0.0],
        axis: [-1.0, 0.0, 0.0],
        seg_offsets: [[0.0, -0.036, 0.0], [0.0, -0.028, 0.0]],
        seg_lengths: [0.034, 0.026, 0.022],
    },
    Digit {
        name: "ring",
        base: [-0.009, -0.100, 0.0],
        axis: [-1.0, 0.0, 0.0],
        seg_offsets: [[0.0, -0.034, 0.0], [0.0, -0.026, 0.0]],
        seg_lengths: [0.032, 0.024, 0.020],
    },
    Digit {
        name: "pinky",
        base: [-0.027, -0.090, 0.0],
        axis: [-1.0, 0.0, 0.0],
        seg_offsets: [[0.0, -0.028, 0.0], [0.0, -0.022, 0.0]],
        seg_lengths: [0.026, 0.020, 0.018],
    },
];

const PHALANX_LIMITS: [f64; 2] = [0.0, std::f64::consts::FRAC_PI_2];

/// Natural frequency target and damping ratio for the hand PD gains.
/// 60 rad/s tracks sign-speed finger curls cleanly but cannot follow
/// capture jitter above ~10 Hz, which is the regime the reward-scale
/// study needs.
const HAND_OMEGA: f64 = 60.0;
const HAND_ZETA: f64 = 0.8;

fn mirror_link(spec: &LinkSpec) -> LinkSpec {
    let flip = |n: &str| n.replace("right_", "left_");
    LinkSpec {
        name: flip(&spec.name),
        parent: spec.parent.as_deref().map(|p| {
            if p.starts_with("right_") { flip(p) } else { p.to_string() }
        }),
        offset: [-spec.offset[0], spec.offset[1], spec.offset[2]],
        mass: spec.mass,
        shape: spec.shape.clone(),
    }
}

fn mirror_joint(spec: &JointSpec) -> JointSpec {
    let flip = |n: &str| n.replace("right_", "left_");
    JointSpec {
        name: flip(&spec.name),
        kind: spec.kind.clone(),
        child: flip(&spec.child),
        // a_L = -M a_R keeps positive angles mirror-consistent.
        axis: spec.axis.map(|a| [a[0], -a[1], -a[2]]),
        kp: spec.kp,
        kd: spec.kd,
        limits: spec.limits.clone(),
    }
}

/// The signing character: 45 links, 45 joints, 44 actuated DoFs, 45 kg,
/// 1.62 m. Lower body is modeled but held fixed; a signer works from the
/// waist up.
pub fn signer_model() -> SkeletonModel {
    let mut links = vec![
        link("root", None, [0.0, 0.90, 0.0], 8.4, Shape::Box { extents: [0.26, 0.16, 0.14] }),
        link(
            "chest",
            Some("root"),
            [0.0, 0.18, 0.0],
            11.0,
            Shape::Box { extents: [0.30, 0.24, 0.16] },
        ),
        link(
            "neck_head",
            Some("chest"),
            [0.0, 0.24, 0.0],
            4.6,
            Shape::Capsule { radius: 0.09, length: 0.42 },
        ),
    ];
    let mut joints = vec![
        spherical("root", "root", 500.0, 50.0),
        spherical("chest", "chest", 1000.0, 100.0),
        spherical("neck", "neck_head", 100.0, 10.0),
    ];

    // Right side; the left is generated as its mirror image.
    let mut right_links = vec![
        link(
            "right_upper_arm",
            Some("chest"),
            [-0.20, 0.20, 0.0],
            1.7,
            Shape::Capsule { radius: 0.045, length: 0.26 },
        ),
        link(
            "right_forearm",
            Some("right_upper_arm"),
            [0.0, -0.26, 0.0],
            1.1,
            Shape::Capsule { radius: 0.04, length: 0.24 },
        ),
        link(
            "right_palm",
            Some("right_forearm"),
            [0.0, -0.24, 0.0],
            0.4,
            Shape::Box { extents: [0.08, 0.10, 0.03] },
        ),
        link(
            "right_thigh",
            Some("root"),
            [-0.09, -0.06, 0.0],
            4.2,
            Shape::Capsule { radius: 0.07, length: 0.40 },
        ),
        link(
            "right_shin",
            Some("right_thigh"),
            [0.0, -0.42, 0.0],
            2.0,
            Shape::Capsule { radius: 0.05, length: 0.40 },
        ),
        link(
            "right_foot",
            Some("right_shin"),
            [0.0, -0.42, 0.0],
            0.8,
            Shape::Box { extents: [0.09, 0.06, 0.22] },
        ),
    ];
    let mut right_joints = vec![
        spherical("right_shoulder", "right_upper_arm", 400.0, 8.0),
        revolute("right_elbow", "right_forearm", [-1.0, 0.0, 0.0], 300.0, 6.0, [0.0, 2.8]),
        fixed_joint("right_wrist", "right_palm"),
        spherical("right_hip", "right_thigh", 500.0, 50.0),
        revolute("right_knee", "right_shin", [1.0, 0.0, 0.0], 500.0, 50.0, [0.0, 2.6]),
        spherical("right_ankle", "right_foot", 400.0, 40.0),
    ];
    for d in &RIGHT_DIGITS {
        for seg in 0..3 {
            let name = format!("right_{}_{}", d.name, seg + 1);
            let parent = if seg == 0 {
                "right_palm".to_string()
            } else {
                format!("right_{}_{}", d.name, seg)
            };
            let offset = if seg == 0 { d.base } else { d.seg_offsets[seg - 1] };
            right_links.push(LinkSpec {
                name: name.clone(),
                parent: Some(parent),
                offset,
                mass: 0.02,
                shape: Shape::Capsule { radius: 0.007, length: d.seg_lengths[seg] },
            });
            // Placeholder gains; replaced below from the composite inertia.
            right_joints.push(revolute(&name, &name, d.axis, 1.0, 0.0, PHALANX_LIMITS));
        }
    }

    for l in &right_links {
        links.push(mirror_link(l));
    }
    for l in &right_links {
        links.push(l.clone());
    }
    for j in &right_joints {
        joints.push(mirror_joint(j));
    }
    for j in &right_joints {
        joints.push(j.clone());
    }

    let mut retarget_map = BTreeMap::new();
    retarget_map.insert("body.pelvis".into(), "root".into());
    retarget_map.insert("body.spine2".into(), "chest".into());
    retarget_map.insert("body.neck".into(), "neck".into());
    for side in ["left", "right"] {
        retarget_map.insert(format!("body.{side}_shoulder"), format!("{side}_shoulder"));
        retarget_map.insert(format!("body.{side}_elbow"), format!("{side}_elbow"));
        let scheme = if side == "left" { "lhand" } else { "rhand" };
        for d in &RIGHT_DIGITS {
            for seg in 0..3 {
                retarget_map
                    .insert(format!("{scheme}.{}{}", d.name, seg + 1), format!("{side}_{}_{}", d.name, seg + 1));
            }
        }
    }

    let fixed = ["root", "left_hip", "right_hip", "left_knee", "right_knee", "left_ankle", "right_ankle"]
        .into_iter()
        .map(String::from)
        .collect();

    let mut spec = ModelFile {
        schema_version: 1,
        name: "signer".into(),
        links,
        joints,
        fixed,
        retarget_map,
    };

    // Second pass: phalanx gains proportional to each joint's composite
    // inertia so every finger joint shares the same response (HAND_OMEGA,
    // HAND_ZETA) despite a 50x inertia spread along the chain.
    let probe = SkeletonModel::from_spec(spec.clone()).expect("probe model is valid");
    for js in spec.joints.iter_mut() {
        let digit = RIGHT_DIGITS.iter().any(|d| js.name.contains(&format!("_{}_", d.name)));
        if !digit {
            continue;
        }
        let j = probe.joint_index(&js.name).unwrap();
        let (base, _) = probe.dof_slice(j).unwrap();
        let inertia = probe.dof_inertia[base];
        let kp = inertia * HAND_OMEGA * HAND_OMEGA;
        js.kp = Some(kp);
        js.kd = Some(2.0 * HAND_ZETA * (kp * inertia).sqrt());
    }
    SkeletonModel::from_spec(spec).expect("signer model is valid")
}

struct GestureParams {
    lift_r: f64,
    lift_l: f64,
    tilt: f64,
    elbow0: f64,
    elbow_amp_r: f64,
    elbow_amp_l: f64,
    chest_amp: f64,
    neck_amp: f64,
    sway: f64,
    curl0: [f64; 5],
    curl_amp: [f64; 5],
    curl_phase: [f64; 5],
}

impl GestureParams {
    fn draw(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let left_scale = rng.gen_range(0.35..1.0);
        let lift_r = rng.gen_range(0.9..1.3);
        let elbow_amp_r = rng.gen_range(0.6..1.0);
        let mut curl0 = [0.0; 5];
        let mut curl_amp = [0.0; 5];
        let mut curl_phase = [0.0; 5];
        for f in 0..5 {
            curl0[f] = rng.gen_range(0.1..0.3);
            curl_amp[f] = rng.gen_range(0.2..0.9);
            curl_phase[f] = rng.gen_range(0.0..1.0);
        }
        GestureParams {
            lift_r,
            lift_l: lift_r * left_scale,
            tilt: rng.gen_range(-0.2..0.2),
            elbow0: 0.25,
            elbow_amp_r,
            elbow_amp_l: elbow_amp_r * left_scale,
            chest_amp: rng.gen_range(0.03..0.07),
            neck_amp: rng.gen_range(0.03..0.08),
            sway: rng.gen_range(0.02..0.06),
            curl0,
            curl_amp,
            curl_phase,
        }
    }

    fn shoulder(&self, phi: f64, right: bool) -> Vec3 {
        let lift = if right { self.lift_r } else { self.lift_l };
        let b = bump(phi);
        let v = Vec3::new(-lift * b, 0.08 * (2.0 * std::f64::consts::PI * phi).sin(), self.tilt * b);
        if right {
            v
        } else {
            math::mirror_axis_angle(&v)
        }
    }

    fn elbow(&self, phi: f64, right: bool) -> f64 {
        let amp = if right { self.elbow_amp_r } else { self.elbow_amp_l };
        self.elbow0 + amp * bump(phi)
    }

    fn chest(&self, phi: f64) -> Vec3 {
        let w = 2.0 * std::f64::consts::PI * phi;
        Vec3::new(self.chest_amp * w.sin(), 0.6 * self.chest_amp * w.cos(), 0.0)
    }

    fn neck(&self, phi: f64) -> Vec3 {
        let w = 2.0 * std::f64::consts::PI * phi;
        Vec3::new(0.5 * self.neck_amp * w.cos(), self.neck_amp * w.sin(), 0.0)
    }

    fn root_rotation(&self, phi: f64) -> Vec3 {
        Vec3::new(0.0, self.sway * (2.0 * std::f64::consts::PI * phi).sin(), 0.0)
    }

    fn curl(&self, phi: f64, finger: usize) -> f64 {
        (self.curl0[finger] + self.curl_amp[finger] * bump(wrap01(phi + self.curl_phase[finger])))
            .clamp(0.0, 1.5)
    }
}

/// A smooth cyclic signing gesture, 2.4 s at 30 Hz, last frame equal to
/// the first.
pub fn sign_clip(model: &SkeletonModel, label: &str, seed: u64) -> MotionClip {
    let p = GestureParams::draw(seed);
    let n = 73usize;
    let mut frames = Vec::with_capacity(n);
    for i in 0..n - 1 {
        let phi = i as f64 / (n - 1) as f64;
        let mut pose = model.rest_pose();
        pose.root_position = Vec3::new(0.0, 0.90, 0.0);
        pose.root_rotation = math::expmap_to_quat(&p.root_rotation(phi));
        let mut set_sph = |name: &str, v: Vec3| {
            let j = model.joint_index(name).expect("signer joint");
            pose.joint_rotations[j] = JointRotation::Spherical(math::expmap_to_quat(&v));
        };
        set_sph("chest", p.chest(phi));
        set_sph("neck", p.neck(phi));
        set_sph("right_shoulder", p.shoulder(phi, true));
        set_sph("left_shoulder", p.shoulder(phi, false));
        for (side, right) in [("right", true), ("left", false)] {
            let j = model.joint_index(&format!("{side}_elbow")).unwrap();
            pose.joint_rotations[j] = JointRotation::Revolute(p.elbow(phi, right));
            for (fi, d) in RIGHT_DIGITS.iter().enumerate() {
                let theta = p.curl(phi, fi);
                for seg in 1..=3 {
                    let j = model.joint_index(&format!("{side}_{}_{seg}", d.name)).unwrap();
                    // Distal segments curl slightly less.
                    let scale = 1.0 - 0.15 * (seg - 1) as f64;
                    pose.joint_rotations[j] = JointRotation::Revolute(theta * scale);
                }
            }
        }
        model.clamp_pose(&mut pose);
        frames.push(pose);
    }
    frames.push(frames[0].clone());
    MotionClip::from_frames(model, 30.0, label, frames).expect("sign clip is valid")
}

/// Synthetic monocular-capture export of a signing gesture: body
/// axis-angles plus right-hand rotations only, so conversion exercises
/// the mirror path for the left hand. Not forced cyclic.
pub fn sign_capture(model: &SkeletonModel, frames: usize, seed: u64) -> SourceCapture {
    let _ = model;
    let p = GestureParams::draw(seed);
    let idx = |name: &str| motion::SMPL_BODY_NAMES.iter().position(|n| *n == name).unwrap();
    let mut out = Vec::with_capacity(frames);
    for i in 0..frames {
        let phi = wrap01(i as f64 / 72.0);
        let mut body = vec![[0.0; 3]; motion::SMPL_BODY_NAMES.len()];
        let put = |body: &mut Vec<[f64; 3]>, name: &str, v: Vec3| {
            body[idx(name)] = [v.x, v.y, v.z];
        };
        put(&mut body, "pelvis", p.root_rotation(phi));
        put(&mut body, "spine2", p.chest(phi));
        put(&mut body, "neck", p.neck(phi));
        put(&mut body, "right_shoulder", p.shoulder(phi, true));
        put(&mut body, "left_shoulder", p.shoulder(phi, false));
        // Elbows carry a little off-axis swing so the revolute twist
        // projection actually discards something.
        let off = 0.06 * (7.0 * phi).sin();
        put(&mut body, "right_elbow", Vec3::new(-p.elbow(phi, true), off, 0.04));
        put(&mut body, "left_elbow", Vec3::new(-p.elbow(phi, false), -off, -0.04));
        let mut rhand = Vec::with_capacity(15);
        for (fi, d) in RIGHT_DIGITS.iter().enumerate() {
            for seg in 0..3 {
                let theta = p.curl(phi, fi) * (1.0 - 0.15 * seg as f64);
                let a = Vec3::new(d.axis[0], d.axis[1], d.axis[2]) * theta;
                rhand.push([a.x, a.y, a.z]);
            }
        }
        out.push(CaptureFrame {
            body_rotations: body,
            right_hand_rotations: Some(rhand),
            root_translation: Some([0.0, 0.90, 0.0]),
            ..Default::default()
        });
    }
    SourceCapture { fps: 30.0, frames: out }
}

/// The reward-scale study motion: a father-style gesture overlaid with
/// capture jitter on the fingers (13-14.5 Hz, beyond what the hand PD
/// can track) and a mild body tremor. Loops seamlessly over 4 s.
pub fn tuning_capture(seed: u64) -> SourceCapture {
    let p = GestureParams::draw(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7454);
    let idx = |name: &str| motion::SMPL_BODY_NAMES.iter().position(|n| *n == name).unwrap();
    let n = TUNING_FRAMES;
    let tau = 2.0 * std::f64::consts::PI;

    // Per-joint jitter parameters, whole cycles per loop.
    let mut jitter: Vec<(f64, f64, f64)> = Vec::with_capacity(15);
    for _ in 0..15 {
        let cycles = rng.gen_range(JITTER_CYCLES_MIN..=JITTER_CYCLES_MAX) as f64;
        let phase = rng.gen_range(0.0..tau);
        let amp = JITTER_AMP * rng.gen_range(0.85..1.15);
        jitter.push((cycles, phase, amp));
    }
    let tremor_phase: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..tau)).collect();

    let mut frames = Vec::with_capacity(n);
    for i in 0..n - 1 {
        let phi = i as f64 / (n - 1) as f64;
        let mut body = vec![[0.0; 3]; motion::SMPL_BODY_NAMES.len()];
        let put = |body: &mut Vec<[f64; 3]>, name: &str, v: Vec3| {
            body[idx(name)] = [v.x, v.y, v.z];
        };
        let trem = |k: usize| TREMOR_AMP * (tau * TREMOR_CYCLES * phi + tremor_phase[k]).sin();
        put(&mut body, "pelvis", p.root_rotation(phi));
        put(&mut body, "spine2", p.chest(phi));
        put(&mut body, "neck", p.neck(phi));
        let mut sh_r = p.shoulder(phi, true);
        sh_r.x += trem(0);
        let mut sh_l = p.shoulder(phi, false);
        sh_l.x += trem(1);
        put(&mut body, "right_shoulder", sh_r);
        put(&mut body, "left_shoulder", sh_l);
        put(&mut body, "right_elbow", Vec3::new(-(p.elbow(phi, true) + trem(2)), 0.0, 0.0));
        put(&mut body, "left_elbow", Vec3::new(-(p.elbow(phi, false) + trem(3)), 0.0, 0.0));
        let mut rhand = Vec::with_capacity(15);
        for (fi, d) in RIGHT_DIGITS.iter().enumerate() {
            for seg in 0..3 {
                let (cycles, phase, amp) = jitter[fi * 3 + seg];
                let theta = 0.35 + 0.25 * bump(wrap01(phi + p.curl_phase[fi]))
                    + amp * (tau * cycles * phi + phase).sin();
                let a = Vec3::new(d.axis[0], d.axis[1], d.axis[2]) * theta.clamp(0.05, 1.5);
                rhand.push([a.x, a.y, a.z]);
            }
        }
        frames.push(CaptureFrame {
            body_rotations: body,
            right_hand_rotations: Some(rhand),
            root_translation: Some([0.0, 0.90, 0.0]),
            ..Default::default()
        });
    }
    frames.push(frames[0].clone());
    SourceCapture { fps: 30.0, frames }
}

pub fn tuning_clip(model: &SkeletonModel) -> MotionClip {
    let capture = tuning_capture(TUNING_SEED);
    motion::convert(model, &capture, &ConvertOptions::new("tuning"))
        .expect("tuning capture converts")
}

/// Reference poses of all bundled clips, for quick visual dumps.
pub fn bundled_clips(model: &SkeletonModel) -> Vec<MotionClip> {
    let mut clips: Vec<MotionClip> =
        SIGN_SET.iter().map(|(label, seed)| sign_clip(model, label, *seed)).collect();
    clips.push(tuning_clip(model));
    clips
}
