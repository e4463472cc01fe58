//! Retargets a raw capture onto the signer skeleton.
//!
//!     cargo run --example convert_capture
//!
//! The bundled capture carries body and right-hand rotations only, the
//! shape monocular capture exports tend to have; conversion mirrors the
//! right hand onto the left and projects off-axis elbow rotation onto
//! the hinge.

use signmimic::motion::{convert, ConvertOptions, SourceCapture};
use signmimic::skeleton::{JointRotation, SkeletonModel};
use signmimic::Result;

fn main() -> Result<()> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/assets");
    let model = SkeletonModel::load(format!("{root}/models/signer.json"))?;
    let capture = SourceCapture::load(format!("{root}/captures/above.json"))?;
    println!(
        "capture: {} frames at {} Hz, right hand {}, left hand {}",
        capture.frames.len(),
        capture.fps,
        if capture.frames[0].right_hand_rotations.is_some() { "present" } else { "missing" },
        if capture.frames[0].left_hand_rotations.is_some() { "present" } else { "missing" },
    );

    let clip = convert(&model, &capture, &ConvertOptions::new("above_converted"))?;
    println!(
        "clip: {} frames at {} Hz, {:.2} s",
        clip.frames.len(),
        clip.rate,
        clip.duration()
    );

    // The mirrored left hand curls in lockstep with the right.
    let pose = clip.sample(1.0);
    for finger in ["index_1", "middle_1", "ring_1"] {
        let r = model.joint_index(&format!("right_{finger}")).unwrap();
        let l = model.joint_index(&format!("left_{finger}")).unwrap();
        let angle = |j: usize| match pose.joint_rotations[j] {
            JointRotation::Revolute(a) => a,
            _ => f64::NAN,
        };
        println!("  {finger:<9} right {:+.4} rad, left {:+.4} rad", angle(r), angle(l));
    }

    let out = std::env::temp_dir().join("above_converted.clip.json");
    clip.save(&out, &model)?;
    println!("saved {}", out.display());
    Ok(())
}
