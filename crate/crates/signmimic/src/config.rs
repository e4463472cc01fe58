//! Run configuration files: one versioned JSON document describing a
//! complete training or evaluation run (model, clips, reward scales,
//! episode shape, optimizer settings, seeds).
//!
//! Relative paths inside a config resolve against the directory the
//! config file lives in, so run directories stay relocatable.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::env::EpisodeConfig;
use crate::error::{Error, Result};
use crate::motion::MotionClip;
use crate::reward::RewardConfig;
use crate::rl::TrainConfig;
use crate::skeleton::SkeletonModel;

pub const RUN_SCHEMA_VERSION: u32 = 1;

fn default_eval_steps() -> usize {
    2000
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Run name; becomes the artifact directory name.
    pub name: String,
    pub model: PathBuf,
    pub clips: Vec<PathBuf>,
    /// Joint sets may be left empty to derive them from the model
    /// (everything below a palm is a hand joint, palms are end
    /// effectors).
    #[serde(default)]
    pub reward: RewardConfig,
    #[serde(default)]
    pub episode: EpisodeConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default = "default_eval_steps")]
    pub eval_steps: usize,
    pub seeds: Vec<u64>,
    /// Output root; the `--out` flag overrides it.
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Directory of the config file, for resolving relative paths.
    /// Set on load, never serialized.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes =
            std::fs::read(path).map_err(|e| Error::schema(path, format!("cannot read: {e}")))?;
        let mut cfg: RunConfig = serde_json::from_slice(&bytes)
            .map_err(|e| Error::schema(path, e.to_string()))?;
        if cfg.schema_version != RUN_SCHEMA_VERSION {
            return Err(Error::schema(
                path,
                format!(
                    "schema_version {} unsupported (expected {RUN_SCHEMA_VERSION})",
                    cfg.schema_version
                ),
            ));
        }
        cfg.base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json.as_bytes())?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::validation("run name must not be empty"));
        }
        if self.name.contains(['/', '\\']) || self.name.contains("..") {
            return Err(Error::validation(format!(
                "run name '{}' must be a plain directory name",
                self.name
            )));
        }
        if self.clips.is_empty() {
            return Err(Error::validation("config lists no clips"));
        }
        if self.seeds.is_empty() {
            return Err(Error::validation("config lists no seeds"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(Error::validation("seeds must be distinct"));
        }
        if self.eval_steps == 0 {
            return Err(Error::validation("eval_steps must be positive"));
        }
        self.train.validate()?;
        Ok(())
    }

    /// Resolves a possibly relative path against the config location.
    pub fn resolve_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn load_model(&self) -> Result<Arc<SkeletonModel>> {
        Ok(Arc::new(SkeletonModel::load(self.resolve_path(&self.model))?))
    }

    pub fn load_clips(&self, model: &SkeletonModel) -> Result<Vec<Arc<MotionClip>>> {
        self.clips
            .iter()
            .map(|p| Ok(Arc::new(MotionClip::load(self.resolve_path(p), model)?)))
            .collect()
    }

    /// The reward config with joint sets filled in: if the file left all
    /// three sets empty, they derive from the model. Explicit sets pass
    /// through untouched (an empty hand set is legitimate for hand-less
    /// models, so only the all-empty case derives).
    pub fn reward_for(&self, model: &SkeletonModel) -> Result<RewardConfig> {
        let mut cfg = self.reward.clone();
        if cfg.body_joints.is_empty()
            && cfg.hand_joints.is_empty()
            && cfg.end_effector_links.is_empty()
        {
            let derived = RewardConfig::for_model(model);
            cfg.body_joints = derived.body_joints;
            cfg.hand_joints = derived.hand_joints;
            cfg.end_effector_links = derived.end_effector_links;
        }
        cfg.validate(model)?;
        Ok(cfg)
    }

    /// sha256 over the canonical serialized config. Changes iff any
    /// serialized field changes.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let canon = serde_json::to_vec(self).expect("run config serializes");
        let mut h = Sha256::new();
        h.update(&canon);
        format!("{:x}", h.finalize())
    }
}

/// Axis names a sweep may vary. Reward scales plus the scalar optimizer
/// knobs; everything else stays pinned by the run config.
pub const SWEEP_AXES: &[&str] = &[
    "k_pose_body",
    "k_pose_hand",
    "k_vel_body",
    "k_vel_hand",
    "k_end_effector",
    "k_root",
    "learning_rate",
    "gamma",
    "clip_ratio",
    "gae_lambda",
    "log_std",
];

/// Writes one swept value into the trial's configs.
pub fn apply_sweep_axis(
    reward: &mut RewardConfig,
    train: &mut TrainConfig,
    name: &str,
    value: f64,
) -> Result<()> {
    match name {
        "k_pose_body" => reward.k_pose_body = value,
        "k_pose_hand" => reward.k_pose_hand = value,
        "k_vel_body" => reward.k_vel_body = value,
        "k_vel_hand" => reward.k_vel_hand = value,
        "k_end_effector" => reward.k_end_effector = value,
        "k_root" => reward.k_root = value,
        "learning_rate" => train.learning_rate = value,
        "gamma" => train.gamma = value,
        "clip_ratio" => train.clip_ratio = value,
        "gae_lambda" => train.gae_lambda = value,
        "log_std" => train.log_std = value,
        other => {
            return Err(Error::validation(format!(
                "unknown sweep axis '{other}'; known axes: {}",
                SWEEP_AXES.join(", ")
            )))
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum SweepStrategy {
    /// Full cartesian product of the axes.
    Grid,
    /// `trials` draws, each picking one listed value per axis.
    Random { trials: usize },
}

impl Default for SweepStrategy {
    fn default() -> Self {
        SweepStrategy::Grid
    }
}

/// A hyperparameter sweep over a base run config. Each trial trains one
/// policy with the base config plus the axis overrides, for
/// `budget_steps` environment steps (default: half the base run).
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_sweep_version")]
    pub schema_version: u32,
    /// Axis name to candidate values. BTreeMap so expansion order never
    /// depends on file order.
    pub axes: std::collections::BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub strategy: SweepStrategy,
    #[serde(default)]
    pub budget_steps: Option<usize>,
}

fn default_sweep_version() -> u32 {
    1
}

/// Grids beyond this are almost certainly a typo.
pub const SWEEP_TRIAL_CAP: usize = 10_000;

impl SweepSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::schema(path, format!("cannot read sweep spec: {e}")))?;
        let spec: SweepSpec = serde_json::from_str(&text)
            .map_err(|e| Error::schema(path, format!("invalid sweep spec: {e}")))?;
        if spec.schema_version != default_sweep_version() {
            return Err(Error::schema(
                path,
                format!("sweep schema v{}, this build reads v1", spec.schema_version),
            ));
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::validation("sweep needs at least one axis"));
        }
        for (name, values) in &self.axes {
            if !SWEEP_AXES.contains(&name.as_str()) {
                return Err(Error::validation(format!(
                    "unknown sweep axis '{name}'; known axes: {}",
                    SWEEP_AXES.join(", ")
                )));
            }
            if values.is_empty() {
                return Err(Error::validation(format!("sweep axis '{name}' lists no values")));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::validation(format!("sweep axis '{name}' has a non-finite value")));
            }
        }
        let n = self.trial_count();
        if n == 0 || n > SWEEP_TRIAL_CAP {
            return Err(Error::validation(format!(
                "sweep expands to {n} trials; the cap is {SWEEP_TRIAL_CAP}"
            )));
        }
        if self.budget_steps == Some(0) {
            return Err(Error::validation("sweep budget_steps must be positive"));
        }
        Ok(())
    }

    pub fn trial_count(&self) -> usize {
        match self.strategy {
            SweepStrategy::Grid => {
                self.axes.values().fold(1usize, |acc, v| acc.saturating_mul(v.len()))
            }
            SweepStrategy::Random { trials } => trials,
        }
    }

    /// Expands the spec into per-trial assignments, axes in name order.
    /// Random draws come from `seed` alone, so a sweep is reproducible.
    pub fn trials(&self, seed: u64) -> Vec<Vec<(String, f64)>> {
        let names: Vec<&String> = self.axes.keys().collect();
        match self.strategy {
            SweepStrategy::Grid => {
                let lens: Vec<usize> = names.iter().map(|n| self.axes[*n].len()).collect();
                let total = self.trial_count();
                let mut out = Vec::with_capacity(total);
                let mut idx = vec![0usize; names.len()];
                for _ in 0..total {
                    out.push(
                        names
                            .iter()
                            .zip(&idx)
                            .map(|(n, &i)| ((*n).clone(), self.axes[*n][i]))
                            .collect(),
                    );
                    // Odometer increment, last axis fastest.
                    for k in (0..idx.len()).rev() {
                        idx[k] += 1;
                        if idx[k] < lens[k] {
                            break;
                        }
                        idx[k] = 0;
                    }
                }
                out
            }
            SweepStrategy::Random { trials } => {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                (0..trials)
                    .map(|_| {
                        names
                            .iter()
                            .map(|n| {
                                let vals = &self.axes[*n];
                                ((*n).clone(), vals[rng.gen_range(0..vals.len())])
                            })
                            .collect()
                    })
                    .collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn write_assets(dir: &Path) -> (PathBuf, PathBuf) {
        let model = synth::signer_model();
        let clip = synth::sign_clip(&model, "demo", 3);
        let model_path = dir.join("signer.model.json");
        let clip_path = dir.join("demo.clip.json");
        model.save(&model_path).unwrap();
        clip.save(&clip_path, &model).unwrap();
        (model_path, clip_path)
    }

    fn minimal_json() -> String {
        r#"{
            "schema_version": 1,
            "name": "demo-run",
            "model": "signer.model.json",
            "clips": ["demo.clip.json"],
            "seeds": [1, 2]
        }"#
        .to_string()
    }

    #[test]
    fn minimal_config_loads_with_defaults() {
        let dir = tempfile::tempdir().unwrap();
        write_assets(dir.path());
        let path = dir.path().join("run.json");
        std::fs::write(&path, minimal_json()).unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.eval_steps, 2000);
        assert_eq!(cfg.train.n_steps, 512);
        assert!(cfg.episode.rsi);
        assert_eq!(cfg.base_dir, dir.path());
        let model = cfg.load_model().unwrap();
        let clips = cfg.load_clips(&model).unwrap();
        assert_eq!(clips.len(), 1);
        let reward = cfg.reward_for(&model).unwrap();
        assert_eq!(reward.hand_joints.len(), 30);
    }

    #[test]
    fn unknown_fields_and_bad_versions_are_schema_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, minimal_json().replace("\"name\"", "\"nom\"")).unwrap();
        assert!(matches!(RunConfig::load(&path), Err(Error::Schema { .. })));
        std::fs::write(&path, minimal_json().replace(": 1,", ": 9,")).unwrap();
        assert!(matches!(RunConfig::load(&path), Err(Error::Schema { .. })));
    }

    #[test]
    fn validation_rejects_duplicate_seeds_and_bad_names() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, minimal_json().replace("[1, 2]", "[1, 1]")).unwrap();
        assert!(matches!(RunConfig::load(&path), Err(Error::Validation(_))));
        std::fs::write(&path, minimal_json().replace("demo-run", "../oops")).unwrap();
        assert!(matches!(RunConfig::load(&path), Err(Error::Validation(_))));
    }

    #[test]
    fn hash_changes_iff_a_field_changes() {
        let dir = tempfile::tempdir().unwrap();
        write_assets(dir.path());
        let path = dir.path().join("run.json");
        std::fs::write(&path, minimal_json()).unwrap();
        let a = RunConfig::load(&path).unwrap();
        let b = RunConfig::load(&path).unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.train.gamma = 0.99;
        assert_ne!(a.hash(), c.hash());
        // base_dir is bookkeeping, not configuration.
        let mut d = a.clone();
        d.base_dir = PathBuf::from("/elsewhere");
        assert_eq!(a.hash(), d.hash());
    }

    #[test]
    fn explicit_joint_sets_pass_through() {
        let dir = tempfile::tempdir().unwrap();
        write_assets(dir.path());
        let path = dir.path().join("run.json");
        let json = minimal_json().replace(
            "\"seeds\"",
            r#""reward": {"body_joints": ["chest"], "end_effector_links": ["right_palm"]},
               "seeds""#,
        );
        std::fs::write(&path, json).unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        let model = cfg.load_model().unwrap();
        let reward = cfg.reward_for(&model).unwrap();
        assert_eq!(reward.body_joints.len(), 1);
        assert!(reward.hand_joints.is_empty());
    }

    fn sweep_json(strategy: &str) -> String {
        format!(
            r#"{{
                "axes": {{
                    "k_pose_hand": [2.0, 0.5, 0.2],
                    "k_vel_hand": [0.1, 0.0001]
                }},
                "strategy": {strategy}
            }}"#
        )
    }

    #[test]
    fn grid_sweep_expands_the_full_product_in_axis_order() {
        let spec: SweepSpec = serde_json::from_str(&sweep_json("\"grid\"")).unwrap();
        spec.validate().unwrap();
        assert_eq!(spec.trial_count(), 6);
        let trials = spec.trials(0);
        assert_eq!(trials.len(), 6);
        // Axes iterate in name order: k_pose_hand before k_vel_hand,
        // last axis fastest.
        assert_eq!(trials[0], vec![("k_pose_hand".into(), 2.0), ("k_vel_hand".into(), 0.1)]);
        assert_eq!(trials[1], vec![("k_pose_hand".into(), 2.0), ("k_vel_hand".into(), 0.0001)]);
        assert_eq!(trials[2], vec![("k_pose_hand".into(), 0.5), ("k_vel_hand".into(), 0.1)]);
        assert_eq!(trials[5], vec![("k_pose_hand".into(), 0.2), ("k_vel_hand".into(), 0.0001)]);
    }

    #[test]
    fn random_sweep_is_reproducible_and_draws_listed_values() {
        let spec: SweepSpec =
            serde_json::from_str(&sweep_json(r#"{"random": {"trials": 9}}"#)).unwrap();
        spec.validate().unwrap();
        let a = spec.trials(42);
        let b = spec.trials(42);
        let c = spec.trials(43);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 9);
        for trial in &a {
            assert!([2.0, 0.5, 0.2].contains(&trial[0].1));
            assert!([0.1, 0.0001].contains(&trial[1].1));
        }
    }

    #[test]
    fn sweep_specs_reject_unknown_axes_and_empty_values() {
        let bad: SweepSpec =
            serde_json::from_str(r#"{"axes": {"warp_factor": [1.0]}}"#).unwrap();
        assert!(bad.validate().is_err());
        let empty: SweepSpec =
            serde_json::from_str(r#"{"axes": {"k_root": []}}"#).unwrap();
        assert!(empty.validate().is_err());
    }

    #[test]
    fn sweep_axes_write_into_the_right_config() {
        let mut reward = RewardConfig::default();
        let mut train = TrainConfig::default();
        apply_sweep_axis(&mut reward, &mut train, "k_vel_hand", 1e-4).unwrap();
        apply_sweep_axis(&mut reward, &mut train, "learning_rate", 3e-4).unwrap();
        assert_eq!(reward.k_vel_hand, 1e-4);
        assert_eq!(train.learning_rate, 3e-4);
        assert!(apply_sweep_axis(&mut reward, &mut train, "n_steps", 1.0).is_err());
    }
}
