//! Quaternion and small numeric helpers shared across the crate.
//!
//! Conventions: quaternions are wxyz on the wire, right-handed frames,
//! y up, z forward, x pointing to the character's left. The sagittal
//! mirror plane is x = 0.

use nalgebra::{Quaternion, Unit, UnitQuaternion, Vector3};

use crate::error::{Error, Result};

pub type Quat = UnitQuaternion<f64>;
pub type Vec3 = Vector3<f64>;

/// Unit-norm tolerance for quaternions coming from files or captures.
pub const UNIT_NORM_TOL: f64 = 1e-6;

/// Builds a unit quaternion from wire order `[w, x, y, z]`, rejecting
/// inputs whose norm deviates from 1 by more than `UNIT_NORM_TOL`.
pub fn quat_from_wxyz(q: [f64; 4]) -> Result<Quat> {
    let raw = Quaternion::new(q[0], q[1], q[2], q[3]);
    let n = raw.norm();
    if !n.is_finite() || (n - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::contract(format!(
            "quaternion [{}, {}, {}, {}] has norm {n}, expected 1 within {UNIT_NORM_TOL}",
            q[0], q[1], q[2], q[3]
        )));
    }
    Ok(UnitQuaternion::from_quaternion(raw))
}

pub fn quat_to_wxyz(q: &Quat) -> [f64; 4] {
    [q.w, q.i, q.j, q.k]
}

/// Geodesic distance on SO(3) in radians, range [0, pi]. Invariant under
/// the quaternion double cover: `d(q, -q) = 0`.
pub fn geodesic(a: &Quat, b: &Quat) -> f64 {
    // Exact-equality short circuit: optimized builds may contract the
    // conjugate product below and leave a ~1e-18 residue where algebra
    // says zero, which matters when a pinned reference must score an
    // exact unit reward.
    if a.coords == b.coords || a.coords == -b.coords {
        return 0.0;
    }
    let rel = a.inverse() * b;
    let v = (rel.i * rel.i + rel.j * rel.j + rel.k * rel.k).sqrt();
    2.0 * v.atan2(rel.w.abs())
}

/// Checked variant over raw wxyz components, for data straight off a file.
pub fn quat_geodesic(a: [f64; 4], b: [f64; 4]) -> Result<f64> {
    Ok(geodesic(&quat_from_wxyz(a)?, &quat_from_wxyz(b)?))
}

/// Shortest-path spherical interpolation. nalgebra's `slerp` does not
/// resolve the double cover itself, so flip one endpoint when needed.
pub fn slerp(a: &Quat, b: &Quat, t: f64) -> Quat {
    let dot = a.coords.dot(&b.coords);
    let b = if dot < 0.0 {
        UnitQuaternion::from_quaternion(Quaternion::from(-b.coords))
    } else {
        *b
    };
    match a.try_slerp(&b, t, 1e-12) {
        Some(q) => q,
        // Endpoints essentially identical (or opposed within tolerance
        // after the flip, which cannot happen for dot >= 0): nlerp.
        None => UnitQuaternion::from_quaternion(a.lerp(&b, t)),
    }
}

/// Exponential map coordinates (axis * angle) to quaternion.
pub fn expmap_to_quat(v: &Vec3) -> Quat {
    let theta = v.norm();
    if theta < 1e-12 {
        // sin(t/2)/t ~ 1/2 - t^2/48
        let s = 0.5 - theta * theta / 48.0;
        UnitQuaternion::from_quaternion(Quaternion::new(
            1.0 - theta * theta / 8.0,
            v.x * s,
            v.y * s,
            v.z * s,
        ))
    } else {
        let (s, c) = (0.5 * theta).sin_cos();
        let k = s / theta;
        UnitQuaternion::from_quaternion(Quaternion::new(c, v.x * k, v.y * k, v.z * k))
    }
}

/// Inverse of `expmap_to_quat`, returning the shortest representative
/// (angle in [0, pi]).
pub fn quat_to_expmap(q: &Quat) -> Vec3 {
    let (w, v) = if q.w < 0.0 {
        (-q.w, -Vec3::new(q.i, q.j, q.k))
    } else {
        (q.w, Vec3::new(q.i, q.j, q.k))
    };
    let vn = v.norm();
    let theta = 2.0 * vn.atan2(w);
    if vn < 1e-12 {
        // theta/sin(theta/2) ~ 2 + theta^2/12
        v * (2.0 + theta * theta / 12.0)
    } else {
        v * (theta / vn)
    }
}

pub fn axis_angle_to_quat(v: &Vec3) -> Quat {
    expmap_to_quat(v)
}

/// Signed twist angle of `q` about `axis`, in (-pi, pi]. This is the
/// rotation left after removing the swing component, which is what a
/// revolute joint can actually reproduce.
pub fn twist_angle(q: &Quat, axis: &Unit<Vec3>) -> f64 {
    let (w, v) = if q.w < 0.0 {
        (-q.w, -Vec3::new(q.i, q.j, q.k))
    } else {
        (q.w, Vec3::new(q.i, q.j, q.k))
    };
    let d = v.dot(axis);
    let mut t = 2.0 * d.atan2(w);
    if t > std::f64::consts::PI {
        t -= 2.0 * std::f64::consts::PI;
    } else if t <= -std::f64::consts::PI {
        t += 2.0 * std::f64::consts::PI;
    }
    t
}

/// Mirrors a point or offset across the sagittal plane (x -> -x).
pub fn mirror_vec(v: &Vec3) -> Vec3 {
    Vec3::new(-v.x, v.y, v.z)
}

/// Mirrors a rotation across the sagittal plane. For M = diag(-1, 1, 1)
/// the conjugated rotation M R M has axis -M a and the same angle, which
/// in quaternion components is (w, x, -y, -z).
pub fn mirror_quat(q: &Quat) -> Quat {
    UnitQuaternion::from_quaternion(Quaternion::new(q.w, q.i, -q.j, -q.k))
}

/// Axis-angle form of `mirror_quat`.
pub fn mirror_axis_angle(v: &Vec3) -> Vec3 {
    Vec3::new(v.x, -v.y, -v.z)
}

/// Mirror image of a joint axis: a -> -M a, so the mirrored joint's
/// positive angle produces the mirrored motion of the original.
pub fn mirror_axis(a: &Unit<Vec3>) -> Unit<Vec3> {
    Unit::new_unchecked(Vec3::new(a.x, -a.y, -a.z))
}

/// Pairwise (cascade) summation. Deterministic fixed-order reduction with
/// O(log n) error growth; used for reward aggregation and statistics so
/// results do not depend on incidental chunking anywhere else.
pub fn sum_pairwise(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        s
    } else {
        let mid = xs.len() / 2;
        sum_pairwise(&xs[..mid]) + sum_pairwise(&xs[mid..])
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        sum_pairwise(xs) / xs.len() as f64
    }
}

/// Population standard deviation around `mean`.
pub fn std_dev(xs: &[f64], mean: f64) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    (sum_pairwise(&sq) / xs.len() as f64).sqrt()
}
