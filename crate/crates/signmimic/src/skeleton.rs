//! Articulated rigid-body model: schema, validation, forward kinematics.
//!
//! # Model file schema (version 1)
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "name": "signer",
//!   "links": [
//!     {"name": "root", "parent": null, "offset": [0.0, 0.9, 0.0],
//!      "mass": 8.6, "shape": {"type": "box", "extents": [0.26, 0.16, 0.14]}}
//!   ],
//!   "joints": [
//!     {"name": "chest", "kind": "spherical", "child": "chest",
//!      "kp": 1000.0, "kd": 100.0},
//!     {"name": "right_elbow", "kind": "revolute", "axis": [-1.0, 0.0, 0.0],
//!      "child": "right_forearm", "kp": 300.0, "kd": 6.0,
//!      "limits": [[0.0, 2.8]]}
//!   ],
//!   "fixed": ["root", "left_hip", "..."],
//!   "retarget_map": {"body.spine2": "chest", "rhand.index1": "right_index_1"}
//! }
//! ```
//!
//! Conventions baked into the schema:
//! - `offset` is the joint position in the parent link's frame; a link's
//!   origin coincides with the joint that drives it.
//! - Links must be declared parent-before-child.
//! - Shape centers and centers of mass sit at the link origin. Capsules
//!   extend along the local y axis (bones run along y at rest).
//! - Joint limits are per degree of freedom and default to [-pi, pi].
//!   Spherical joints are limited per exponential-map coordinate.
//! - `fixed` lists joints that are held at rest and excluded from the
//!   actuated coordinate vector. A joint whose child is the root link is
//!   always treated as fixed: the root is driven kinematically.
//! - Left/right pairs (`left_*` / `right_*`) must be exact sagittal
//!   mirrors of each other.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use nalgebra::Unit;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::math::{self, Quat, Vec3};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Capsule { radius: f64, length: f64 },
    Box { extents: [f64; 3] },
    Sphere { radius: f64 },
}

impl Shape {
    /// Principal moments about the center of mass, aligned with the local
    /// axes. Diagonal because every supported shape is axis-aligned.
    pub fn principal_inertia(&self, mass: f64) -> [f64; 3] {
        match *self {
            Shape::Sphere { radius } => {
                let i = 0.4 * mass * radius * radius;
                [i, i, i]
            }
            Shape::Box { extents: [ex, ey, ez] } => [
                mass * (ey * ey + ez * ez) / 12.0,
                mass * (ex * ex + ez * ez) / 12.0,
                mass * (ex * ex + ey * ey) / 12.0,
            ],
            Shape::Capsule { radius: r, length: l } => {
                let v_cyl = std::f64::consts::PI * r * r * l;
                let v_sph = 4.0 / 3.0 * std::f64::consts::PI * r * r * r;
                let m_cyl = mass * v_cyl / (v_cyl + v_sph);
                let m_sph = mass - m_cyl;
                let axial = 0.5 * m_cyl * r * r + 0.4 * m_sph * r * r;
                let perp = m_cyl * (l * l / 12.0 + r * r / 4.0)
                    + m_sph * (0.4 * r * r + 0.25 * l * l + 0.375 * r * l);
                [perp, axial, perp]
            }
        }
    }

    fn dims_positive(&self) -> bool {
        match *self {
            Shape::Sphere { radius } => radius > 0.0 && radius.is_finite(),
            Shape::Box { extents } => extents.iter().all(|e| *e > 0.0 && e.is_finite()),
            Shape::Capsule { radius, length } => {
                radius > 0.0 && length > 0.0 && radius.is_finite() && length.is_finite()
            }
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct LinkSpec {
    pub name: String,
    pub parent: Option<String>,
    pub offset: [f64; 3],
    pub mass: f64,
    pub shape: Shape,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct JointSpec {
    pub name: String,
    pub kind: String,
    pub child: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ModelFile {
    pub schema_version: u32,
    pub name: String,
    pub links: Vec<LinkSpec>,
    pub joints: Vec<JointSpec>,
    #[serde(default)]
    pub fixed: Vec<String>,
    #[serde(default)]
    pub retarget_map: BTreeMap<String, String>,
}

#[derive(Clone, Debug)]
pub struct Link {
    pub name: String,
    pub parent: Option<usize>,
    pub offset: Vec3,
    pub mass: f64,
    pub shape: Shape,
}

#[derive(Clone, Debug, PartialEq)]
pub enum JointKind {
    Spherical,
    Revolute { axis: Unit<Vec3> },
    Fixed,
}

impl JointKind {
    pub fn dofs(&self) -> usize {
        match self {
            JointKind::Spherical => 3,
            JointKind::Revolute { .. } => 1,
            JointKind::Fixed => 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Joint {
    pub name: String,
    pub kind: JointKind,
    pub child_link: usize,
    pub kp: f64,
    pub kd: f64,
    /// One (lo, hi) pair per degree of freedom of `kind`.
    pub limits: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct SkeletonModel {
    pub name: String,
    pub links: Vec<Link>,
    pub joints: Vec<Joint>,
    pub fixed: BTreeSet<String>,
    pub retarget_map: BTreeMap<String, String>,
    pub root_link: usize,
    /// Joint driving each link; `None` only for the root link when the
    /// file declares no root joint.
    pub joint_of_link: Vec<Option<usize>>,
    /// Joint indices contributing actuated DoFs, in file order.
    pub actuated: Vec<usize>,
    /// Flat DoF base index per joint (`None` for fixed joints).
    pub dof_base: Vec<Option<usize>>,
    pub total_dofs: usize,
    pub dof_names: Vec<String>,
    pub dof_kp: Vec<f64>,
    pub dof_kd: Vec<f64>,
    pub dof_lo: Vec<f64>,
    pub dof_hi: Vec<f64>,
    /// Diagonal composite-rigid-body inertia per DoF, frozen at rest pose.
    pub dof_inertia: Vec<f64>,
    /// sha256 of the serialized model, for run manifests.
    pub source_hash: String,
    spec: ModelFile,
}

#[derive(Clone, Debug, PartialEq)]
pub enum JointRotation {
    Spherical(Quat),
    Revolute(f64),
    Fixed,
}

/// A kinematic configuration: root transform plus one rotation per joint,
/// aligned with `SkeletonModel::joints`. The entry for a root joint or a
/// member of the fixed set is carried but ignored by forward kinematics.
#[derive(Clone, Debug, PartialEq)]
pub struct Pose {
    pub root_position: Vec3,
    pub root_rotation: Quat,
    pub joint_rotations: Vec<JointRotation>,
}

#[derive(Clone, Debug)]
pub struct LinkState {
    pub position: Vec3,
    pub rotation: Quat,
}

#[derive(Clone, Debug)]
pub struct LinkKinematics {
    pub position: Vec3,
    pub rotation: Quat,
    pub linear_velocity: Vec3,
    pub angular_velocity: Vec3,
}

/// Floor for per-DoF inertia so distal fingertip joints cannot produce a
/// division by (numerically) zero in the implicit PD update.
const INERTIA_FLOOR: f64 = 1e-9;

const MIRROR_TOL: f64 = 1e-9;

impl SkeletonModel {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path)
            .map_err(|e| Error::schema(path, format!("cannot read: {e}")))?;
        let spec: ModelFile = serde_json::from_slice(&bytes)
            .map_err(|e| Error::schema(path, e.to_string()))?;
        Self::from_spec(spec)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.spec)?;
        std::fs::write(path, json.as_bytes())?;
        Ok(())
    }

    pub fn spec(&self) -> &ModelFile {
        &self.spec
    }

    pub fn from_spec(spec: ModelFile) -> Result<Self> {
        if spec.schema_version != SCHEMA_VERSION {
            return Err(Error::validation(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                spec.schema_version
            )));
        }

        let mut link_index: HashMap<String, usize> = HashMap::new();
        for (i, l) in spec.links.iter().enumerate() {
            if link_index.insert(l.name.clone(), i).is_some() {
                return Err(Error::validation(format!("duplicate link name '{}'", l.name)));
            }
        }

        let mut links = Vec::with_capacity(spec.links.len());
        let mut root_link = None;
        for (i, l) in spec.links.iter().enumerate() {
            if !l.offset.iter().all(|c| c.is_finite()) {
                return Err(Error::validation(format!("link '{}' has non-finite offset", l.name)));
            }
            if !(l.mass > 0.0 && l.mass.is_finite()) {
                return Err(Error::validation(format!("link '{}' must have positive mass", l.name)));
            }
            if !l.shape.dims_positive() {
                return Err(Error::validation(format!("link '{}' has non-positive shape dims", l.name)));
            }
            let parent = match &l.parent {
                None => {
                    if root_link.replace(i).is_some() {
                        return Err(Error::validation(
                            "multiple root links (parent = null) found",
                        ));
                    }
                    None
                }
                Some(p) => {
                    let pi = *link_index.get(p).ok_or_else(|| {
                        Error::validation(format!("link '{}' has unknown parent '{p}'", l.name))
                    })?;
                    if pi >= i {
                        return Err(Error::validation(format!(
                            "link '{}' declared before its parent '{p}'",
                            l.name
                        )));
                    }
                    Some(pi)
                }
            };
            links.push(Link {
                name: l.name.clone(),
                parent,
                offset: Vec3::new(l.offset[0], l.offset[1], l.offset[2]),
                mass: l.mass,
                shape: l.shape.clone(),
            });
        }
        let root_link =
            root_link.ok_or_else(|| Error::validation("no root link (parent = null)"))?;

        let mut joint_names = HashSet::new();
        let mut joint_of_link: Vec<Option<usize>> = vec![None; links.len()];
        let mut joints = Vec::with_capacity(spec.joints.len());
        for (j, js) in spec.joints.iter().enumerate() {
            if !joint_names.insert(js.name.clone()) {
                return Err(Error::validation(format!("duplicate joint name '{}'", js.name)));
            }
            let child_link = *link_index.get(&js.child).ok_or_else(|| {
                Error::validation(format!("joint '{}' drives unknown link '{}'", js.name, js.child))
            })?;
            if joint_of_link[child_link].replace(j).is_some() {
                return Err(Error::validation(format!(
                    "link '{}' is driven by more than one joint",
                    js.child
                )));
            }
            let kind = match js.kind.as_str() {
                "spherical" => {
                    if js.axis.is_some() {
                        return Err(Error::validation(format!(
                            "joint '{}': axis is only valid for revolute joints",
                            js.name
                        )));
                    }
                    JointKind::Spherical
                }
                "revolute" => {
                    let a = js.axis.ok_or_else(|| {
                        Error::validation(format!("revolute joint '{}' needs an axis", js.name))
                    })?;
                    let v = Vec3::new(a[0], a[1], a[2]);
                    let n = v.norm();
                    if !n.is_finite() || n < 1e-9 {
                        return Err(Error::validation(format!(
                            "joint '{}' has a degenerate axis",
                            js.name
                        )));
                    }
                    if (n - 1.0).abs() > 1e-6 {
                        return Err(Error::validation(format!(
                            "joint '{}' axis must be unit length (norm {n})",
                            js.name
                        )));
                    }
                    JointKind::Revolute { axis: Unit::new_normalize(v) }
                }
                "fixed" => {
                    if js.axis.is_some() {
                        return Err(Error::validation(format!(
                            "joint '{}': axis is only valid for revolute joints",
                            js.name
                        )));
                    }
                    JointKind::Fixed
                }
                other => {
                    return Err(Error::validation(format!(
                        "joint '{}' has unknown kind '{other}'",
                        js.name
                    )))
                }
            };
            let ndof = kind.dofs();
            let limits: Vec<(f64, f64)> = match &js.limits {
                None => vec![(-std::f64::consts::PI, std::f64::consts::PI); ndof],
                Some(ls) => {
                    if ls.len() != ndof {
                        return Err(Error::validation(format!(
                            "joint '{}' has {} limit pairs, expected {ndof}",
                            js.name,
                            ls.len()
                        )));
                    }
                    let mut out = Vec::with_capacity(ndof);
                    for pair in ls {
                        let (lo, hi) = (pair[0], pair[1]);
                        if !lo.is_finite() || !hi.is_finite() || lo > hi {
                            return Err(Error::validation(format!(
                                "joint '{}' has invalid limits [{lo}, {hi}]",
                                js.name
                            )));
                        }
                        out.push((lo, hi));
                    }
                    out
                }
            };
            joints.push(Joint {
                name: js.name.clone(),
                kind,
                child_link,
                kp: js.kp.unwrap_or(0.0),
                kd: js.kd.unwrap_or(0.0),
                limits,
            });
        }

        for (i, link) in links.iter().enumerate() {
            if i != root_link && joint_of_link[i].is_none() {
                return Err(Error::validation(format!(
                    "link '{}' has no joint driving it",
                    link.name
                )));
            }
        }

        let mut fixed: BTreeSet<String> = BTreeSet::new();
        for name in &spec.fixed {
            if !joint_names.contains(name) {
                return Err(Error::validation(format!("fixed list names unknown joint '{name}'")));
            }
            fixed.insert(name.clone());
        }
        // The root is never actuated; its joint (if any) is implicitly fixed.
        if let Some(rj) = joint_of_link[root_link] {
            fixed.insert(joints[rj].name.clone());
        }

        for (src, dst) in &spec.retarget_map {
            if !joint_names.contains(dst) {
                return Err(Error::validation(format!(
                    "retarget_map entry '{src}' targets unknown joint '{dst}'"
                )));
            }
        }

        let mut actuated = Vec::new();
        let mut dof_base = vec![None; joints.len()];
        let mut dof_names = Vec::new();
        let mut dof_kp = Vec::new();
        let mut dof_kd = Vec::new();
        let mut dof_lo = Vec::new();
        let mut dof_hi = Vec::new();
        let mut total = 0usize;
        for (j, joint) in joints.iter().enumerate() {
            let is_fixed = joint.kind == JointKind::Fixed || fixed.contains(&joint.name);
            if is_fixed {
                continue;
            }
            if !(joint.kp > 0.0 && joint.kp.is_finite()) {
                return Err(Error::validation(format!(
                    "actuated joint '{}' must have kp > 0",
                    joint.name
                )));
            }
            if !(joint.kd >= 0.0 && joint.kd.is_finite()) {
                return Err(Error::validation(format!(
                    "actuated joint '{}' must have kd >= 0",
                    joint.name
                )));
            }
            actuated.push(j);
            dof_base[j] = Some(total);
            match joint.kind {
                JointKind::Spherical => {
                    for ax in ["x", "y", "z"] {
                        dof_names.push(format!("{}.{ax}", joint.name));
                    }
                }
                JointKind::Revolute { .. } => dof_names.push(joint.name.clone()),
                JointKind::Fixed => unreachable!(),
            }
            for d in 0..joint.kind.dofs() {
                dof_kp.push(joint.kp);
                dof_kd.push(joint.kd);
                dof_lo.push(joint.limits[d].0);
                dof_hi.push(joint.limits[d].1);
            }
            total += joint.kind.dofs();
        }

        let source_hash = {
            let canon = serde_json::to_vec(&spec).expect("model spec serializes");
            let mut h = Sha256::new();
            h.update(&canon);
            format!("{:x}", h.finalize())
        };

        let mut model = SkeletonModel {
            name: spec.name.clone(),
            links,
            joints,
            fixed,
            retarget_map: spec.retarget_map.clone(),
            root_link,
            joint_of_link,
            actuated,
            dof_base,
            total_dofs: total,
            dof_names,
            dof_kp,
            dof_kd,
            dof_lo,
            dof_hi,
            dof_inertia: Vec::new(),
            source_hash,
            spec,
        };
        model.check_mirror_symmetry()?;
        model.dof_inertia = model.composite_inertia();
        Ok(model)
    }

    pub fn link_index(&self, name: &str) -> Option<usize> {
        self.links.iter().position(|l| l.name == name)
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }

    pub fn is_actuated(&self, joint: usize) -> bool {
        self.dof_base[joint].is_some()
    }

    /// Flat DoF slice (base, count) for an actuated joint.
    pub fn dof_slice(&self, joint: usize) -> Option<(usize, usize)> {
        self.dof_base[joint].map(|b| (b, self.joints[joint].kind.dofs()))
    }

    pub fn total_mass(&self) -> f64 {
        self.links.iter().map(|l| l.mass).sum()
    }

    /// World position of every link origin at the rest pose.
    fn rest_positions(&self) -> Vec<Vec3> {
        let mut out = vec![Vec3::zeros(); self.links.len()];
        for (i, link) in self.links.iter().enumerate() {
            out[i] = match link.parent {
                None => link.offset,
                Some(p) => out[p] + link.offset,
            };
        }
        out
    }

    /// Subtree mass distribution turned into one scalar inertia per DoF:
    /// for each actuated joint, sum `I_com + m d^2` over all links at or
    /// below its child, measured about the joint's rest position (about
    /// the world axis for spherical coordinates, about the joint axis for
    /// revolute joints). Frozen at rest; the PD integrator treats it as a
    /// constant diagonal mass matrix.
    fn composite_inertia(&self) -> Vec<f64> {
        let rest = self.rest_positions();
        // children[l] = links directly below l
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); self.links.len()];
        for (i, link) in self.links.iter().enumerate() {
            if let Some(p) = link.parent {
                children[p].push(i);
            }
        }
        let subtree = |start: usize| -> Vec<usize> {
            let mut stack = vec![start];
            let mut out = Vec::new();
            while let Some(l) = stack.pop() {
                out.push(l);
                stack.extend(&children[l]);
            }
            out
        };

        let mut inertia = vec![0.0; self.total_dofs];
        for &j in &self.actuated {
            let joint = &self.joints[j];
            let pivot = rest[joint.child_link];
            let base = self.dof_base[j].unwrap();
            for &l in &subtree(joint.child_link) {
                let link = &self.links[l];
                let principal = link.shape.principal_inertia(link.mass);
                let r = rest[l] - pivot;
                match &joint.kind {
                    JointKind::Spherical => {
                        let d2 = [
                            r.y * r.y + r.z * r.z,
                            r.x * r.x + r.z * r.z,
                            r.x * r.x + r.y * r.y,
                        ];
                        for k in 0..3 {
                            inertia[base + k] += principal[k] + link.mass * d2[k];
                        }
                    }
                    JointKind::Revolute { axis } => {
                        let a = axis.into_inner();
                        let i_com = principal[0] * a.x * a.x
                            + principal[1] * a.y * a.y
                            + principal[2] * a.z * a.z;
                        let perp = r - a * r.dot(&a);
                        inertia[base] += i_com + link.mass * perp.norm_squared();
                    }
                    JointKind::Fixed => unreachable!(),
                }
            }
        }
        for i in &mut inertia {
            *i = i.max(INERTIA_FLOOR);
        }
        inertia
    }

    fn check_mirror_symmetry(&self) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= MIRROR_TOL;
        for link in &self.links {
            let Some(stem) = link.name.strip_prefix("left_") else { continue };
            let twin_name = format!("right_{stem}");
            let twin = self
                .link_index(&twin_name)
                .ok_or_else(|| {
                    Error::validation(format!("link '{}' has no mirror '{twin_name}'", link.name))
                })
                .map(|i| &self.links[i])?;
            let mirrored = math::mirror_vec(&twin.offset);
            if !close(link.mass, twin.mass)
                || link.shape != twin.shape
                || (link.offset - mirrored).norm() > MIRROR_TOL
            {
                return Err(Error::validation(format!(
                    "links '{}' and '{twin_name}' are not sagittal mirrors",
                    link.name
                )));
            }
        }
        for joint in &self.joints {
            let Some(stem) = joint.name.strip_prefix("left_") else { continue };
            let twin_name = format!("right_{stem}");
            let twin = self
                .joint_index(&twin_name)
                .ok_or_else(|| {
                    Error::validation(format!("joint '{}' has no mirror '{twin_name}'", joint.name))
                })
                .map(|i| &self.joints[i])?;
            let kinds_match = match (&joint.kind, &twin.kind) {
                (JointKind::Spherical, JointKind::Spherical) => true,
                (JointKind::Fixed, JointKind::Fixed) => true,
                (JointKind::Revolute { axis: al }, JointKind::Revolute { axis: ar }) => {
                    // Positive angle on the left must mirror positive angle
                    // on the right: a_L = -M a_R.
                    (al.into_inner() - math::mirror_axis(ar).into_inner()).norm() <= MIRROR_TOL
                }
                _ => false,
            };
            if !kinds_match
                || !close(joint.kp, twin.kp)
                || !close(joint.kd, twin.kd)
                || joint.limits.len() != twin.limits.len()
                || joint
                    .limits
                    .iter()
                    .zip(&twin.limits)
                    .any(|(a, b)| !close(a.0, b.0) || !close(a.1, b.1))
                || (self.fixed.contains(&joint.name) != self.fixed.contains(&twin.name))
            {
                return Err(Error::validation(format!(
                    "joints '{}' and '{twin_name}' are not sagittal mirrors",
                    joint.name
                )));
            }
        }
        Ok(())
    }

    pub fn rest_pose(&self) -> Pose {
        let rot = |j: &Joint| match j.kind {
            JointKind::Spherical => JointRotation::Spherical(Quat::identity()),
            JointKind::Revolute { .. } => JointRotation::Revolute(0.0),
            JointKind::Fixed => JointRotation::Fixed,
        };
        Pose {
            root_position: self.links[self.root_link].offset,
            root_rotation: Quat::identity(),
            joint_rotations: self.joints.iter().map(rot).collect(),
        }
    }

    pub fn validate_pose(&self, pose: &Pose) -> Result<()> {
        if pose.joint_rotations.len() != self.joints.len() {
            return Err(Error::contract(format!(
                "pose has {} joint rotations, model has {} joints",
                pose.joint_rotations.len(),
                self.joints.len()
            )));
        }
        if !pose.root_position.iter().all(|c| c.is_finite()) {
            return Err(Error::contract("pose root position is not finite"));
        }
        for (j, (joint, rot)) in self.joints.iter().zip(&pose.joint_rotations).enumerate() {
            let ok = matches!(
                (&joint.kind, rot),
                (JointKind::Spherical, JointRotation::Spherical(_))
                    | (JointKind::Revolute { .. }, JointRotation::Revolute(_))
                    | (JointKind::Fixed, JointRotation::Fixed)
            );
            if !ok {
                return Err(Error::contract(format!(
                    "pose entry {j} does not match kind of joint '{}'",
                    joint.name
                )));
            }
            if let JointRotation::Revolute(a) = rot {
                if !a.is_finite() {
                    return Err(Error::contract(format!(
                        "pose angle for joint '{}' is not finite",
                        joint.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Clamps actuated coordinates into their limit boxes. Rotations that
    /// are already inside are left bit-identical.
    pub fn clamp_pose(&self, pose: &mut Pose) {
        for &j in &self.actuated {
            let joint = &self.joints[j];
            match (&joint.kind, &mut pose.joint_rotations[j]) {
                (JointKind::Revolute { .. }, JointRotation::Revolute(a)) => {
                    let (lo, hi) = joint.limits[0];
                    if *a < lo || *a > hi {
                        *a = a.clamp(lo, hi);
                    }
                }
                (JointKind::Spherical, JointRotation::Spherical(q)) => {
                    let v = math::quat_to_expmap(q);
                    let mut c = [v.x, v.y, v.z];
                    let mut touched = false;
                    for d in 0..3 {
                        let (lo, hi) = joint.limits[d];
                        if c[d] < lo || c[d] > hi {
                            c[d] = c[d].clamp(lo, hi);
                            touched = true;
                        }
                    }
                    if touched {
                        *q = math::expmap_to_quat(&Vec3::new(c[0], c[1], c[2]));
                    }
                }
                _ => {}
            }
        }
    }

    /// Actuated coordinates of a pose: exponential-map triples for
    /// spherical joints, angles for revolute joints. Fixed joints do not
    /// appear.
    pub fn pose_to_coords(&self, pose: &Pose) -> Vec<f64> {
        let mut q = vec![0.0; self.total_dofs];
        for &j in &self.actuated {
            let base = self.dof_base[j].unwrap();
            match &pose.joint_rotations[j] {
                JointRotation::Spherical(rot) => {
                    let v = math::quat_to_expmap(rot);
                    q[base] = v.x;
                    q[base + 1] = v.y;
                    q[base + 2] = v.z;
                }
                JointRotation::Revolute(a) => q[base] = *a,
                JointRotation::Fixed => unreachable!(),
            }
        }
        q
    }

    /// Inverse of `pose_to_coords`. Joints in the fixed set come out at
    /// rest; the root transform is supplied by the caller.
    pub fn coords_to_pose(&self, q: &[f64], root_position: Vec3, root_rotation: Quat) -> Pose {
        assert_eq!(q.len(), self.total_dofs, "coordinate vector length");
        let mut pose = self.rest_pose();
        pose.root_position = root_position;
        pose.root_rotation = root_rotation;
        for &j in &self.actuated {
            let base = self.dof_base[j].unwrap();
            pose.joint_rotations[j] = match self.joints[j].kind {
                JointKind::Spherical => JointRotation::Spherical(math::expmap_to_quat(
                    &Vec3::new(q[base], q[base + 1], q[base + 2]),
                )),
                JointKind::Revolute { .. } => JointRotation::Revolute(q[base]),
                JointKind::Fixed => unreachable!(),
            };
        }
        pose
    }

    /// World transform of every link. The root link takes the pose's root
    /// transform directly; a root joint's rotation entry is ignored.
    pub fn fk(&self, pose: &Pose) -> Vec<LinkState> {
        let mut out: Vec<LinkState> = Vec::with_capacity(self.links.len());
        for (i, link) in self.links.iter().enumerate() {
            let state = match link.parent {
                None => LinkState { position: pose.root_position, rotation: pose.root_rotation },
                Some(p) => {
                    let parent = &out[p];
                    let j = self.joint_of_link[i].expect("validated: non-root link has a joint");
                    let local = match (&self.joints[j].kind, &pose.joint_rotations[j]) {
                        (JointKind::Spherical, JointRotation::Spherical(q)) => *q,
                        (JointKind::Revolute { axis }, JointRotation::Revolute(a)) => {
                            Quat::from_axis_angle(axis, *a)
                        }
                        (JointKind::Fixed, _) => Quat::identity(),
                        _ => Quat::identity(),
                    };
                    LinkState {
                        position: parent.position + parent.rotation * link.offset,
                        rotation: parent.rotation * local,
                    }
                }
            };
            out.push(state);
        }
        out
    }

    /// Forward kinematics with velocity propagation. `qdot` holds actuated
    /// coordinate rates; for spherical joints the exponential-map rate is
    /// taken as the local angular velocity (exact for revolute joints,
    /// first-order for spherical ones; both sides of every comparison in
    /// the crate use the same convention). `root_velocity` is the
    /// kinematically driven root's (linear, angular) world velocity.
    pub fn fk_velocity(
        &self,
        pose: &Pose,
        qdot: &[f64],
        root_velocity: (Vec3, Vec3),
    ) -> Vec<LinkKinematics> {
        assert_eq!(qdot.len(), self.total_dofs, "velocity vector length");
        let mut out: Vec<LinkKinematics> = Vec::with_capacity(self.links.len());
        for (i, link) in self.links.iter().enumerate() {
            let state = match link.parent {
                None => LinkKinematics {
                    position: pose.root_position,
                    rotation: pose.root_rotation,
                    linear_velocity: root_velocity.0,
                    angular_velocity: root_velocity.1,
                },
                Some(p) => {
                    let parent = &out[p];
                    let j = self.joint_of_link[i].expect("validated: non-root link has a joint");
                    let joint = &self.joints[j];
                    let local_rot = match (&joint.kind, &pose.joint_rotations[j]) {
                        (JointKind::Spherical, JointRotation::Spherical(q)) => *q,
                        (JointKind::Revolute { axis }, JointRotation::Revolute(a)) => {
                            Quat::from_axis_angle(axis, *a)
                        }
                        _ => Quat::identity(),
                    };
                    let local_omega = match (&joint.kind, self.dof_base[j]) {
                        (JointKind::Spherical, Some(b)) => {
                            Vec3::new(qdot[b], qdot[b + 1], qdot[b + 2])
                        }
                        (JointKind::Revolute { axis }, Some(b)) => axis.into_inner() * qdot[b],
                        _ => Vec3::zeros(),
                    };
                    let arm = parent.rotation * link.offset;
                    LinkKinematics {
                        position: parent.position + arm,
                        rotation: parent.rotation * local_rot,
                        linear_velocity: parent.linear_velocity
                            + parent.angular_velocity.cross(&arm),
                        angular_velocity: parent.angular_velocity
                            + parent.rotation * local_omega,
                    }
                }
            };
            out.push(state);
        }
        out
    }
}
