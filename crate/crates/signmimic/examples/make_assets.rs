//! Regenerates everything under `assets/` from the deterministic
//! generators. Committed assets must match this output bit for bit;
//! `tests/assets.rs` checks a sample of that.
//!
//!     cargo run --release --example make_assets

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use signmimic::artifacts;
use signmimic::config::{RunConfig, SweepSpec, SweepStrategy};
use signmimic::env::SignEnv;
use signmimic::motion::MotionClip;
use signmimic::retarget::{ceiling, CeilingMode, DEFAULT_CEILING_STEPS};
use signmimic::reward::{builtin_factor_sets, RewardConfig};
use signmimic::rl::EvalRow;
use signmimic::skeleton::SkeletonModel;
use signmimic::synth;
use signmimic::Result;

fn assets_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("assets")
}

fn sign_run_config(name: &str, clip: &str, reward: RewardConfig, seeds: Vec<u64>) -> RunConfig {
    RunConfig {
        schema_version: 1,
        name: name.to_string(),
        model: "../models/signer.json".into(),
        clips: vec![format!("../clips/{clip}.json").into()],
        reward,
        episode: Default::default(),
        train: Default::default(),
        eval_steps: DEFAULT_CEILING_STEPS,
        seeds,
        out: None,
        base_dir: PathBuf::new(),
    }
}

fn main() -> Result<()> {
    let root = assets_root();
    for sub in ["models", "clips", "captures", "configs", "traces"] {
        fs::create_dir_all(root.join(sub)).expect("create asset dirs");
    }

    let signer = synth::signer_model();
    signer.save(root.join("models/signer.json"))?;
    println!("models/signer.json      {} links, hash {}..", signer.links.len(), &signer.source_hash[..12]);

    let toy = synth::toy_model();
    toy.save(root.join("models/toy.json"))?;
    println!("models/toy.json         {} links, hash {}..", toy.links.len(), &toy.source_hash[..12]);

    for (label, seed) in synth::SIGN_SET {
        let clip = synth::sign_clip(&signer, label, seed);
        clip.save(root.join(format!("clips/{label}.json")), &signer)?;
        println!("clips/{label}.json      {} frames at {} Hz", clip.frames.len(), clip.rate);
    }
    let tuning = synth::tuning_clip(&signer);
    tuning.save(root.join("clips/tuning.json"), &signer)?;
    println!("clips/tuning.json       {} frames at {} Hz", tuning.frames.len(), tuning.rate);

    let toy_clip = synth::toy_clip(&toy, 30.0);
    toy_clip.save(root.join("clips/toy.json"), &toy)?;
    println!("clips/toy.json          {} frames at {} Hz", toy_clip.frames.len(), toy_clip.rate);

    // A raw capture for the convert example and CLI. The converted clip
    // is not the bundled `above` clip (that one is authored directly);
    // this exercises the mirror-fill and twist-projection paths.
    let capture = synth::sign_capture(&signer, 91, synth::SIGN_SET[0].1);
    capture.save(root.join("captures/above.json"))?;
    println!("captures/above.json     {} frames at {} Hz", capture.frames.len(), capture.fps);

    write_configs(&root)?;
    write_tuning_trace(&root, &signer, &tuning)?;
    println!("assets regenerated under {}", root.display());
    Ok(())
}

fn write_configs(root: &Path) -> Result<()> {
    let sets = builtin_factor_sets();
    let stock = RewardConfig::default();
    let final_scales = sets
        .iter()
        .find(|s| s.name == "run3")
        .expect("run3 is builtin")
        .to_reward_config(&stock);

    let seeds: Vec<u64> = (1..=10).collect();
    for (label, _) in synth::SIGN_SET {
        let mut cfg = sign_run_config(label, label, final_scales.clone(), seeds.clone());
        cfg.train.checkpoint_every = Some(50_000);
        cfg.save(root.join(format!("configs/{label}.json")))?;
    }

    // The scale study pair: same motion, stock vs final hand scales.
    let mut default_cfg =
        sign_run_config("tuning_default", "tuning", stock.clone(), vec![1]);
    default_cfg.train.checkpoint_every = Some(50_000);
    default_cfg.save(root.join("configs/tuning_default.json"))?;
    let mut final_cfg =
        sign_run_config("tuning_final", "tuning", final_scales.clone(), vec![1]);
    final_cfg.train.checkpoint_every = Some(50_000);
    final_cfg.save(root.join("configs/tuning_final.json"))?;

    // Toy arm: small net, hot learning rate, short horizon. The toy is
    // where the full pipeline runs in minutes.
    let mut toy_cfg = RunConfig {
        schema_version: 1,
        name: "toy".to_string(),
        model: "../models/toy.json".into(),
        clips: vec!["../clips/toy.json".into()],
        reward: synth::toy_reward_config(),
        episode: Default::default(),
        train: Default::default(),
        eval_steps: DEFAULT_CEILING_STEPS,
        seeds: (1..=10).collect(),
        out: None,
        base_dir: PathBuf::new(),
    };
    toy_cfg.train.learning_rate = 3e-4;
    toy_cfg.train.n_steps = 128;
    toy_cfg.train.batch_size = 128;
    toy_cfg.train.num_envs = 4;
    toy_cfg.train.hidden = vec![64, 64];
    toy_cfg.train.log_std = -1.5;
    // 390 whole updates of 128 x 4 transitions: the trainer rounds up
    // to update boundaries, and the learning check is "within 200k".
    toy_cfg.train.total_steps = 199_680;
    toy_cfg.train.checkpoint_every = Some(50_000);
    toy_cfg.save(root.join("configs/toy.json"))?;

    // The hand-scale sweep from the study: pose scale x velocity scale.
    let sweep = SweepSpec {
        schema_version: 1,
        axes: [
            ("k_pose_hand".to_string(), vec![2.0, 1.0, 0.5, 0.2]),
            ("k_vel_hand".to_string(), vec![0.1, 0.01, 0.001, 0.0001]),
        ]
        .into_iter()
        .collect(),
        strategy: SweepStrategy::Grid,
        budget_steps: None,
    };
    let text = serde_json::to_string_pretty(&sweep).expect("sweep serializes") + "\n";
    artifacts::write_string(root.join("configs/sweep_hand_scales.json"), &text)?;
    for name in ["above", "tuning_default", "tuning_final", "toy"] {
        println!("configs/{name}.json");
    }
    println!("configs/sweep_hand_scales.json");
    Ok(())
}

/// Error trace of the position-tracking bound on the tuning motion,
/// recorded under stock scales. `estimate-rewards` replays this to rank
/// scale sets without retraining.
fn write_tuning_trace(root: &Path, signer: &SkeletonModel, tuning: &MotionClip) -> Result<()> {
    let mut env = SignEnv::new(
        Arc::new(signer.clone()),
        Arc::new(tuning.clone()),
        RewardConfig::for_model(signer),
        Default::default(),
        0,
        0,
    )?;
    let rep = ceiling(&mut env, CeilingMode::PdTracked, DEFAULT_CEILING_STEPS)?;
    let rows: Vec<EvalRow> = rep
        .rows
        .iter()
        .enumerate()
        .map(|(i, b)| EvalRow { step: i + 1, breakdown: *b })
        .collect();
    artifacts::write_string(root.join("traces/tuning_errors.csv"), &artifacts::metrics_csv(&rows))?;
    println!(
        "traces/tuning_errors.csv  {} rows, stock-scale mean reward {:.3e}",
        rows.len(),
        rep.reward_mean
    );
    Ok(())
}
