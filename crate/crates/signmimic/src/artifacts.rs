//! Run artifacts: directory layout, manifests, and the CSV formats.
//!
//! Every run directory is self-describing: the manifest pins the config
//! plus content hashes of the model and clips, so re-running it
//! reproduces byte-identical curves for a fixed seed and worker count.
//! All floats are written with Rust's shortest-roundtrip formatting and
//! parse back bit-exactly.

use std::io::{BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::motion::MotionClip;
use crate::reward::{RewardBreakdown, RewardErrors};
use crate::rl::trainer::{Checkpoint, CurveRow, EvalRow, PoseRow};
use crate::skeleton::SkeletonModel;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

pub const CURVE_HEADER: &str =
    "step,reward_mean,reward_std,surrogate_loss,value_loss,kl,clip_fraction";
pub const METRICS_HEADER: &str =
    "step,r_pb,r_ph,r_vb,r_vh,r_e,r_r,total,eps_pb,eps_ph,eps_vb,eps_vh,eps_e,eps_r";

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ClipStamp {
    pub label: String,
    pub hash: String,
}

/// Pins a run directory to exact inputs. No timestamps: the manifest
/// hash must change iff a config field or an input artifact changes.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub config_hash: String,
    pub model_hash: String,
    pub clips: Vec<ClipStamp>,
    pub config: RunConfig,
}

impl Manifest {
    pub fn new(config: &RunConfig, model: &SkeletonModel, clips: &[Arc<MotionClip>]) -> Self {
        Manifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config.hash(),
            model_hash: model.source_hash.clone(),
            clips: clips
                .iter()
                .map(|c| ClipStamp { label: c.label.clone(), hash: c.source_hash.clone() })
                .collect(),
            config: config.clone(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json.as_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes =
            std::fs::read(path).map_err(|e| Error::schema(path, format!("cannot read: {e}")))?;
        let mut m: Manifest = serde_json::from_slice(&bytes)
            .map_err(|e| Error::schema(path, e.to_string()))?;
        if m.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(Error::schema(
                path,
                format!("manifest schema v{} unsupported", m.schema_version),
            ));
        }
        // Relative paths in the embedded config resolve against the run
        // directory's parent, where the original config pointed.
        m.config.base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok(m)
    }
}

/// Layout of one run directory:
///
/// ```text
/// <root>/
///   manifest.json
///   seed_<s>/checkpoint.json
///   seed_<s>/curve.csv
///   seed_<s>/eval.csv
///   seed_<s>/poses.csv        (on request)
/// ```
#[derive(Clone, Debug)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    /// Creates (or reuses) the run directory under `out_root`.
    pub fn create(out_root: impl AsRef<Path>, name: &str) -> Result<Self> {
        let root = out_root.as_ref().join(name);
        std::fs::create_dir_all(&root)?;
        Ok(RunDir { root })
    }

    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        if !root.is_dir() {
            return Err(Error::validation(format!("{} is not a run directory", root.display())));
        }
        Ok(RunDir { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn seed_dir(&self, seed: u64) -> Result<PathBuf> {
        let dir = self.root.join(format!("seed_{seed}"));
        std::fs::create_dir_all(&dir)?;
        Ok(dir)
    }

    pub fn checkpoint_path(&self, seed: u64) -> PathBuf {
        self.root.join(format!("seed_{seed}")).join("checkpoint.json")
    }

    pub fn curve_path(&self, seed: u64) -> PathBuf {
        self.root.join(format!("seed_{seed}")).join("curve.csv")
    }

    pub fn eval_path(&self, seed: u64) -> PathBuf {
        self.root.join(format!("seed_{seed}")).join("eval.csv")
    }
}

pub fn write_checkpoint(path: impl AsRef<Path>, ckpt: &Checkpoint) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer(&mut w, ckpt)?;
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let f = std::fs::File::open(path)
        .map_err(|e| Error::schema(path, format!("cannot read: {e}")))?;
    serde_json::from_reader(BufReader::new(f)).map_err(|e| Error::schema(path, e.to_string()))
}

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut s = String::from(CURVE_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.step, r.reward_mean, r.reward_std, r.surrogate_loss, r.value_loss, r.kl,
            r.clip_fraction
        ));
    }
    s
}

pub fn metrics_csv(rows: &[EvalRow]) -> String {
    let mut s = String::from(METRICS_HEADER);
    s.push('\n');
    for r in rows {
        let b = &r.breakdown;
        let e = &b.errors;
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.step,
            b.r_pose_body,
            b.r_pose_hand,
            b.r_vel_body,
            b.r_vel_hand,
            b.r_end_effector,
            b.r_root,
            b.total,
            e.pose_body,
            e.pose_hand,
            e.vel_body,
            e.vel_hand,
            e.end_effector,
            e.root
        ));
    }
    s
}

/// Parses a metrics CSV back into rows; floats round-trip bit-exactly.
pub fn parse_metrics_csv(text: &str) -> Result<Vec<EvalRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == METRICS_HEADER => {}
        other => {
            return Err(Error::validation(format!(
                "metrics CSV header mismatch: got {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 14 {
            return Err(Error::validation(format!(
                "metrics CSV line {}: {} columns, expected 14",
                ln + 2,
                cells.len()
            )));
        }
        let f = |i: usize| -> Result<f64> {
            cells[i].parse::<f64>().map_err(|e| {
                Error::validation(format!("metrics CSV line {}: {e}", ln + 2))
            })
        };
        rows.push(EvalRow {
            step: cells[0]
                .parse::<usize>()
                .map_err(|e| Error::validation(format!("metrics CSV line {}: {e}", ln + 2)))?,
            breakdown: RewardBreakdown {
                r_pose_body: f(1)?,
                r_pose_hand: f(2)?,
                r_vel_body: f(3)?,
                r_vel_hand: f(4)?,
                r_end_effector: f(5)?,
                r_root: f(6)?,
                total: f(7)?,
                errors: RewardErrors {
                    pose_body: f(8)?,
                    pose_hand: f(9)?,
                    vel_body: f(10)?,
                    vel_hand: f(11)?,
                    end_effector: f(12)?,
                    root: f(13)?,
                },
            },
        });
    }
    Ok(rows)
}

/// Pose export header + rows: root transform then every DoF coordinate,
/// columns named after the model's DoFs.
pub fn pose_csv(model: &SkeletonModel, rows: &[PoseRow]) -> String {
    let mut s = String::from("step,root_x,root_y,root_z,root_qw,root_qx,root_qy,root_qz");
    for n in &model.dof_names {
        s.push(',');
        s.push_str(n);
    }
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}",
            r.step,
            r.root_position[0],
            r.root_position[1],
            r.root_position[2],
            r.root_rotation[0],
            r.root_rotation[1],
            r.root_rotation[2],
            r.root_rotation[3]
        ));
        for q in &r.q {
            s.push(',');
            s.push_str(&format!("{q}"));
        }
        s.push('\n');
    }
    s
}

pub fn write_string(path: impl AsRef<Path>, content: &str) -> Result<()> {
    std::fs::write(path, content.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{EpisodeConfig, SignEnv};
    use crate::rl::trainer::{evaluate, TrainConfig, Trainer};
    use crate::synth;

    fn toy_env(seed: u64, stream: u64) -> Result<SignEnv> {
        let model = Arc::new(synth::toy_model());
        let clip = Arc::new(synth::toy_clip(&model, crate::env::CONTROL_RATE));
        SignEnv::new(
            model,
            clip,
            synth::toy_reward_config(),
            EpisodeConfig::default(),
            seed,
            stream,
        )
    }

    #[test]
    fn csv_headers_are_pinned() {
        // Golden headers: external tooling parses these exact strings.
        assert_eq!(
            CURVE_HEADER,
            "step,reward_mean,reward_std,surrogate_loss,value_loss,kl,clip_fraction"
        );
        assert_eq!(
            METRICS_HEADER,
            "step,r_pb,r_ph,r_vb,r_vh,r_e,r_r,total,eps_pb,eps_ph,eps_vb,eps_vh,eps_e,eps_r"
        );
    }

    #[test]
    fn metrics_csv_roundtrips_bit_exactly() {
        let t = Trainer::new(
            TrainConfig {
                n_steps: 8,
                batch_size: 8,
                num_envs: 1,
                hidden: vec![8],
                total_steps: 8,
                ..Default::default()
            },
            toy_env,
        )
        .unwrap();
        let mut env = toy_env(5, 0).unwrap();
        let report = evaluate(&t.ppo, &mut env, 40).unwrap();
        let text = metrics_csv(&report.rows);
        let parsed = parse_metrics_csv(&text).unwrap();
        assert_eq!(parsed.len(), 40);
        for (a, b) in report.rows.iter().zip(&parsed) {
            assert_eq!(a.step, b.step);
            assert_eq!(a.breakdown.total.to_bits(), b.breakdown.total.to_bits());
            assert_eq!(
                a.breakdown.errors.vel_body.to_bits(),
                b.breakdown.errors.vel_body.to_bits()
            );
        }
    }

    #[test]
    fn curve_csv_is_deterministic_bytes() {
        let mk = || {
            let mut t = Trainer::new(
                TrainConfig {
                    learning_rate: 1e-3,
                    n_steps: 16,
                    batch_size: 16,
                    n_epochs: 1,
                    num_envs: 1,
                    hidden: vec![8],
                    activation: crate::rl::Activation::Tanh,
                    total_steps: 32,
                    seed: 3,
                    ..Default::default()
                },
                toy_env,
            )
            .unwrap();
            t.run(|_, _| Ok(())).unwrap();
            curve_csv(t.curve())
        };
        let a = mk();
        let b = mk();
        assert_eq!(a, b);
        assert!(a.starts_with(CURVE_HEADER));
        assert_eq!(a.lines().count(), 3);
    }

    #[test]
    fn run_dir_layout() {
        let dir = tempfile::tempdir().unwrap();
        let run = RunDir::create(dir.path(), "demo").unwrap();
        run.seed_dir(4).unwrap();
        assert!(run.root().is_dir());
        assert_eq!(run.curve_path(4), dir.path().join("demo/seed_4/curve.csv"));
        write_string(run.curve_path(4), &curve_csv(&[])).unwrap();
        assert!(run.curve_path(4).is_file());
        let reopened = RunDir::open(run.root()).unwrap();
        assert_eq!(reopened.root(), run.root());
        assert!(RunDir::open(dir.path().join("missing")).is_err());
    }

    #[test]
    fn manifest_roundtrip_and_hash_sensitivity() {
        let dir = tempfile::tempdir().unwrap();
        let model = synth::signer_model();
        let clip = synth::sign_clip(&model, "demo", 3);
        model.save(dir.path().join("m.json")).unwrap();
        clip.save(dir.path().join("c.json"), &model).unwrap();
        let config_json = r#"{
            "schema_version": 1, "name": "r", "model": "m.json",
            "clips": ["c.json"], "seeds": [1]
        }"#;
        std::fs::write(dir.path().join("run.json"), config_json).unwrap();
        let cfg = RunConfig::load(dir.path().join("run.json")).unwrap();
        let m = cfg.load_model().unwrap();
        let clips = cfg.load_clips(&m).unwrap();
        let manifest = Manifest::new(&cfg, &m, &clips);
        assert_eq!(manifest.model_hash, m.source_hash);
        assert_eq!(manifest.clips[0].label, "demo");

        let path = dir.path().join("manifest.json");
        manifest.save(&path).unwrap();
        let loaded = Manifest::load(&path).unwrap();
        assert_eq!(loaded.config_hash, manifest.config_hash);
        assert_eq!(loaded.clips, manifest.clips);

        let mut cfg2 = cfg.clone();
        cfg2.train.seed = 99;
        let manifest2 = Manifest::new(&cfg2, &m, &clips);
        assert_ne!(manifest.config_hash, manifest2.config_hash);
    }

    #[test]
    fn checkpoint_files_roundtrip() {
        let mut t = Trainer::new(
            TrainConfig {
                n_steps: 8,
                batch_size: 8,
                num_envs: 1,
                hidden: vec![8],
                total_steps: 16,
                ..Default::default()
            },
            toy_env,
        )
        .unwrap();
        t.iterate().unwrap();
        let ckpt = t.checkpoint();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("checkpoint.json");
        write_checkpoint(&path, &ckpt).unwrap();
        let back = read_checkpoint(&path).unwrap();
        assert_eq!(back.step, ckpt.step);
        assert_eq!(back.ppo.policy.params, ckpt.ppo.policy.params);
        assert_eq!(back.sample_rng, ckpt.sample_rng);
    }

    #[test]
    fn pose_csv_names_every_dof() {
        let model = synth::toy_model();
        let rows = vec![PoseRow {
            step: 0,
            root_position: [0.0, 1.0, 0.0],
            root_rotation: [1.0, 0.0, 0.0, 0.0],
            q: vec![0.25, -0.5],
        }];
        let text = pose_csv(&model, &rows);
        let header = text.lines().next().unwrap();
        assert_eq!(header.split(',').count(), 8 + model.total_dofs);
        assert!(header.ends_with(&format!("{},{}", model.dof_names[0], model.dof_names[1])));
        assert!(text.lines().nth(1).unwrap().ends_with("0.25,-0.5"));
    }
}
