//! Loads the bundled signer skeleton and walks its structure: link
//! tree, actuated joints, gains, and forward kinematics of a clip
//! frame.
//!
//!     cargo run --example inspect_model

use signmimic::motion::MotionClip;
use signmimic::skeleton::SkeletonModel;
use signmimic::Result;

fn main() -> Result<()> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/assets");
    let model = SkeletonModel::load(format!("{root}/models/signer.json"))?;
    println!(
        "model hash {}..: {} links, {} joints, {} actuated dofs",
        &model.source_hash[..12],
        model.links.len(),
        model.joints.len(),
        model.total_dofs
    );

    // Link tree, children indented under parents.
    fn walk(model: &SkeletonModel, link: usize, depth: usize) {
        let l = &model.links[link];
        let joint = model.joint_of_link[link];
        let dofs = joint.map(|j| model.joints[j].kind.dofs()).unwrap_or(0);
        let gains = joint
            .filter(|_| dofs > 0)
            .map(|j| format!("  kp {} kd {}", model.joints[j].kp, model.joints[j].kd))
            .unwrap_or_default();
        println!("{:indent$}{} ({} dof){gains}", "", l.name, dofs, indent = 2 * depth);
        for (c, child) in model.links.iter().enumerate() {
            if child.parent == Some(link) {
                walk(model, c, depth + 1);
            }
        }
    }
    walk(&model, model.root_link, 0);

    let clip = MotionClip::load(format!("{root}/clips/above.json"), &model)?;
    let pose = clip.sample(0.5);
    let states = model.fk(&pose);
    println!("\nclip '{}' at t=0.5s:", clip.label);
    for name in ["head", "right_palm", "left_palm", "right_index_3", "left_index_3"] {
        let i = model.links.iter().position(|l| l.name == name).expect("bundled link");
        let p = states[i].position;
        println!("  {name:<14} at [{:+.3}, {:+.3}, {:+.3}]", p.x, p.y, p.z);
    }
    Ok(())
}
