//! Command line front end.
//!
//! Every subcommand except `convert` and `estimate-rewards` is driven
//! by a run config (`--config run.json`); the config owns the model,
//! clip, reward and optimizer settings so a run is reproducible from
//! one file. Exit codes: 0 on success, 2 for config and usage errors,
//! 3 when a numeric quantity diverges.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::artifacts::{self, Manifest, RunDir};
use crate::config::{apply_sweep_axis, RunConfig, SweepSpec};
use crate::env::SignEnv;
use crate::error::{Error, Result};
use crate::motion::{self, ConvertOptions, MotionClip, SourceCapture};
use crate::retarget::{self, CeilingMode};
use crate::reward::{self, FactorSet, RewardBreakdown, RewardConfig};
use crate::rl::{evaluate, EvalRow, TrainConfig, Trainer};
use crate::skeleton::SkeletonModel;

#[derive(Parser, Debug)]
#[command(
    name = "signmimic",
    version,
    about = "Teach a simulated signer to imitate motion clips: retarget captures, \
             measure tracking ceilings, train and evaluate policies."
)]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Restrict to one seed (train), or seed auxiliary randomness
    /// (eval env, random sweeps).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output location; a directory for train/sweep/ceiling, a file for
    /// convert/eval/estimate-rewards.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Worker threads for independent jobs (seeds, trials, clips).
    /// Does not change any numeric result.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Retarget a source capture onto a skeleton model and write a clip.
    Convert(ConvertArgs),
    /// Train one policy per seed under the run config. Resumes from
    /// existing checkpoints in the output directory.
    Train,
    /// Roll out a checkpoint with mean actions and report per-channel
    /// rewards. `kinematic` and `pd_tracked` instead of a checkpoint
    /// path evaluate the ideal-tracking bounds.
    Eval(EvalArgs),
    /// Train one short trial per axis combination and rank the results.
    Sweep(SweepArgs),
    /// Reward ceilings for every clip in the run config.
    Ceiling(CeilingArgs),
    /// Replay a recorded error trace under alternative reward scales.
    EstimateRewards(EstimateArgs),
}

#[derive(Args, Debug)]
pub struct ConvertArgs {
    /// Source capture (JSON).
    pub capture: PathBuf,
    /// Skeleton model the capture is retargeted onto.
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Clip label (default: capture file stem).
    #[arg(long)]
    pub label: Option<String>,
    /// Override the capture's frame rate stamp.
    #[arg(long)]
    pub fps: Option<f64>,
    /// Resample the converted clip to this rate.
    #[arg(long, value_name = "HZ")]
    pub resample: Option<f64>,
    /// Keep a missing left hand at rest instead of mirroring the right.
    #[arg(long)]
    pub no_mirror: bool,
    /// Smooth source rotations with a centered 5-frame average.
    #[arg(long)]
    pub smooth: bool,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Checkpoint JSON, or `kinematic` / `pd_tracked`.
    pub checkpoint: String,
    /// Clip to evaluate on (default: first clip in the config).
    #[arg(long, value_name = "PATH")]
    pub clip: Option<PathBuf>,
    /// Control steps to roll out (default: eval_steps from the config).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Also write the per-step root and joint pose trace here (CSV).
    #[arg(long, value_name = "PATH")]
    pub poses: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Sweep specification (JSON): axes, strategy, budget.
    #[arg(long, value_name = "PATH")]
    pub spec: PathBuf,
}

#[derive(Args, Debug)]
pub struct CeilingArgs {
    /// kinematic, pd_tracked, or both.
    #[arg(long, default_value = "both")]
    pub mode: String,
    /// Steps per clip (default: eval_steps from the config).
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// Error-trace CSV as written by eval or ceiling.
    #[arg(long, value_name = "PATH")]
    pub trace: PathBuf,
    /// Comma-separated builtin set names, or a JSON file of custom sets.
    #[arg(long, default_value = "default,run1,run2,run3")]
    pub factors: String,
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Convert(args) => cmd_convert(cli, args),
        Command::Train => cmd_train(cli),
        Command::Eval(args) => cmd_eval(cli, args),
        Command::Sweep(args) => cmd_sweep(cli, args),
        Command::Ceiling(args) => cmd_ceiling(cli, args),
        Command::EstimateRewards(args) => cmd_estimate(cli, args),
    }
}

fn require_config(cli: &Cli) -> Result<RunConfig> {
    match &cli.config {
        Some(p) => RunConfig::load(p),
        None => Err(Error::validation("this command needs --config <run.json>")),
    }
}

/// Output root for run artifacts: --out wins, then the config's `out`.
fn out_root(cli: &Cli, cfg: &RunConfig) -> Result<PathBuf> {
    if let Some(p) = &cli.out {
        return Ok(p.clone());
    }
    match &cfg.out {
        Some(p) => Ok(cfg.resolve_path(p)),
        None => Err(Error::validation(
            "no output location: pass --out or set \"out\" in the config",
        )),
    }
}

fn require_single_clip(clips: &[Arc<MotionClip>]) -> Result<Arc<MotionClip>> {
    if clips.len() != 1 {
        return Err(Error::validation(format!(
            "training drives one policy per clip; the config lists {} clips, keep exactly one",
            clips.len()
        )));
    }
    Ok(clips[0].clone())
}

fn slug(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Runs `f` over `jobs` on up to `threads` workers, preserving job
/// order in the results. Job i goes to worker i mod threads, so the
/// assignment is deterministic too.
fn run_jobs<T, R>(threads: usize, jobs: &[T], f: impl Fn(&T) -> Result<R> + Sync) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
{
    let n = jobs.len();
    let threads = threads.max(1).min(n.max(1));
    let f = &f;
    let mut out: Vec<Option<R>> = (0..n).map(|_| None).collect();
    std::thread::scope(|s| -> Result<()> {
        let mut handles = Vec::with_capacity(threads);
        for w in 0..threads {
            handles.push(s.spawn(move || -> Result<Vec<(usize, R)>> {
                let mut acc = Vec::new();
                let mut i = w;
                while i < n {
                    acc.push((i, f(&jobs[i])?));
                    i += threads;
                }
                Ok(acc)
            }));
        }
        for h in handles {
            let part = h.join().map_err(|_| Error::contract("worker thread panicked"))??;
            for (i, r) in part {
                out[i] = Some(r);
            }
        }
        Ok(())
    })?;
    Ok(out.into_iter().map(|o| o.expect("every job ran")).collect())
}

fn print_reward_header() {
    println!(
        "{:<12} {:<10} {:>6} {:>12} {:>9}  {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "clip", "mode", "steps", "total", "mean", "r_p,b", "r_p,h", "r_v,b", "r_v,h", "r_e", "r_r"
    );
}

fn print_reward_row(clip: &str, mode: &str, steps: usize, total: f64, mean: &RewardBreakdown) {
    println!(
        "{:<12} {:<10} {:>6} {:>12.3} {:>9.5}  {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
        clip,
        mode,
        steps,
        total,
        mean.total,
        mean.r_pose_body,
        mean.r_pose_hand,
        mean.r_vel_body,
        mean.r_vel_hand,
        mean.r_end_effector,
        mean.r_root
    );
}

fn print_error_means(mean: &RewardBreakdown) {
    let e = &mean.errors;
    println!(
        "{:<12} errors      pose_body {:.3e}  pose_hand {:.3e}  vel_body {:.3e}  vel_hand {:.3e}  ee {:.3e}  root {:.3e}",
        "", e.pose_body, e.pose_hand, e.vel_body, e.vel_hand, e.end_effector, e.root
    );
}

fn convert_out_path(capture: &Path) -> PathBuf {
    let stem = capture
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "clip".to_string());
    let stem = stem.strip_suffix(".capture").unwrap_or(&stem);
    capture.with_file_name(format!("{stem}.clip.json"))
}

fn cmd_convert(cli: &Cli, args: &ConvertArgs) -> Result<()> {
    let model = SkeletonModel::load(&args.model)?;
    let capture = SourceCapture::load(&args.capture)?;
    let label = match &args.label {
        Some(l) => l.clone(),
        None => {
            let stem = args
                .capture
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "clip".to_string());
            stem.strip_suffix(".capture").unwrap_or(&stem).to_string()
        }
    };
    let opts = ConvertOptions {
        label,
        fps: args.fps,
        mirror_left_from_right: !args.no_mirror,
        smooth: args.smooth,
    };
    let mut clip = motion::convert(&model, &capture, &opts)?;
    if let Some(hz) = args.resample {
        clip = clip.resample(&model, hz)?;
    }
    let out = cli.out.clone().unwrap_or_else(|| convert_out_path(&args.capture));
    clip.save(&out, &model)?;
    println!(
        "converted '{}': {} frames at {} Hz ({:.2} s) -> {}",
        clip.label,
        clip.frames.len(),
        clip.rate,
        clip.duration(),
        out.display()
    );
    Ok(())
}

/// Seeds to train: every config seed, or the one named by --seed if it
/// is in the config's list.
fn select_seeds(cfg: &RunConfig, restrict: Option<u64>) -> Result<Vec<u64>> {
    match restrict {
        None => Ok(cfg.seeds.clone()),
        Some(s) if cfg.seeds.contains(&s) => Ok(vec![s]),
        Some(s) => Err(Error::validation(format!(
            "--seed {s} is not in the config's seed list {:?}",
            cfg.seeds
        ))),
    }
}

fn cmd_train(cli: &Cli) -> Result<()> {
    let cfg = require_config(cli)?;
    let model = cfg.load_model()?;
    let clips = cfg.load_clips(&model)?;
    let clip = require_single_clip(&clips)?;
    let reward_cfg = cfg.reward_for(&model)?;
    let seeds = select_seeds(&cfg, cli.seed)?;
    let root = out_root(cli, &cfg)?;
    let dir = RunDir::create(&root, &cfg.name)?;

    let manifest = Manifest::new(&cfg, &model, &clips);
    if dir.manifest_path().exists() {
        let prev = Manifest::load(dir.manifest_path())?;
        if prev.config_hash != manifest.config_hash {
            return Err(Error::validation(format!(
                "{} was written by a different config (hash {}.. vs {}..); use a fresh directory",
                dir.manifest_path().display(),
                &prev.config_hash[..12],
                &manifest.config_hash[..12]
            )));
        }
    } else {
        manifest.save(dir.manifest_path())?;
    }

    println!(
        "training '{}' on clip '{}': {} steps x {} seeds -> {}",
        cfg.name,
        clip.label,
        cfg.train.total_steps,
        seeds.len(),
        dir.root().display()
    );
    run_jobs(cli.threads, &seeds, |&seed| {
        train_one_seed(&cfg, &dir, &model, &clip, &reward_cfg, seed)
    })?;
    println!("done: {} seeds trained", seeds.len());
    Ok(())
}

fn train_one_seed(
    cfg: &RunConfig,
    dir: &RunDir,
    model: &Arc<SkeletonModel>,
    clip: &Arc<MotionClip>,
    reward_cfg: &RewardConfig,
    seed: u64,
) -> Result<()> {
    dir.seed_dir(seed)?;
    let make_env = |s, stream| {
        SignEnv::new(model.clone(), clip.clone(), reward_cfg.clone(), cfg.episode.clone(), s, stream)
    };
    let ckpt_path = dir.checkpoint_path(seed);
    let mut trainer = if ckpt_path.exists() {
        let ckpt = artifacts::read_checkpoint(&ckpt_path)?;
        if ckpt.step >= ckpt.config.total_steps {
            artifacts::write_string(dir.curve_path(seed), &artifacts::curve_csv(&ckpt.curve))?;
            println!("[seed {seed}] checkpoint already finished at step {}", ckpt.step);
            return Ok(());
        }
        println!("[seed {seed}] resuming from step {}", ckpt.step);
        Trainer::from_checkpoint(ckpt, make_env)?
    } else {
        let mut tc = cfg.train.clone();
        tc.seed = seed;
        Trainer::new(tc, make_env)?
    };

    let total = trainer.config.total_steps;
    let every = trainer.config.checkpoint_every;
    let mut last_saved = trainer.step_count();
    trainer.run(|t, row| {
        println!(
            "[seed {seed}] {:>9}/{total}  reward/ep {:>10.3}  kl {:.2e}  clip {:.3}",
            row.step, row.reward_mean, row.kl, row.clip_fraction
        );
        if let Some(every) = every {
            if t.step_count() - last_saved >= every {
                artifacts::write_checkpoint(dir.checkpoint_path(seed), &t.checkpoint())?;
                artifacts::write_string(dir.curve_path(seed), &artifacts::curve_csv(t.curve()))?;
                last_saved = t.step_count();
            }
        }
        Ok(())
    })?;
    artifacts::write_checkpoint(&ckpt_path, &trainer.checkpoint())?;
    artifacts::write_string(dir.curve_path(seed), &artifacts::curve_csv(trainer.curve()))?;
    println!("[seed {seed}] finished at step {}", trainer.step_count());
    Ok(())
}

fn parse_pseudo_checkpoint(s: &str) -> Option<CeilingMode> {
    s.parse::<CeilingMode>().ok()
}

fn cmd_eval(cli: &Cli, args: &EvalArgs) -> Result<()> {
    let cfg = require_config(cli)?;
    let model = cfg.load_model()?;
    let reward_cfg = cfg.reward_for(&model)?;
    let clip = match &args.clip {
        Some(p) => Arc::new(MotionClip::load(p, &model)?),
        None => {
            let clips = cfg.load_clips(&model)?;
            clips
                .first()
                .cloned()
                .ok_or_else(|| Error::validation("the config lists no clips"))?
        }
    };
    let steps = args.steps.unwrap_or(cfg.eval_steps);
    // Evaluation is deterministic: fixed start frame, mean actions.
    let mut episode = cfg.episode.clone();
    episode.rsi = false;
    let mut env = SignEnv::new(
        model.clone(),
        clip.clone(),
        reward_cfg,
        episode,
        cli.seed.unwrap_or(0),
        0,
    )?;

    let (label, mode_name, report_rows, total, mean, poses) =
        if let Some(mode) = parse_pseudo_checkpoint(&args.checkpoint) {
            let rep = retarget::ceiling(&mut env, mode, steps)?;
            let rows: Vec<EvalRow> = rep
                .rows
                .iter()
                .enumerate()
                .map(|(i, b)| EvalRow { step: i + 1, breakdown: *b })
                .collect();
            (rep.clip, mode.to_string(), rows, rep.total_reward, rep.mean, Vec::new())
        } else {
            let ckpt = artifacts::read_checkpoint(Path::new(&args.checkpoint))?;
            let ckpt_model = ckpt.fingerprint.split(':').next().unwrap_or("");
            let env_fp = env.fingerprint();
            let env_model = env_fp.split(':').next().unwrap_or("");
            if ckpt_model != env_model {
                return Err(Error::CheckpointMismatch(format!(
                    "checkpoint was trained on model {}.., the config loads {}..",
                    &ckpt_model[..ckpt_model.len().min(12)],
                    &env_model[..env_model.len().min(12)]
                )));
            }
            if ckpt.ppo.policy.sizes[0] != env.obs_dim() {
                return Err(Error::CheckpointMismatch(format!(
                    "checkpoint observes {} dims, the environment emits {}",
                    ckpt.ppo.policy.sizes[0],
                    env.obs_dim()
                )));
            }
            let rep = evaluate(&ckpt.ppo, &mut env, steps)?;
            let mean = reward::mean_breakdown(
                &rep.rows.iter().map(|r| r.breakdown).collect::<Vec<_>>(),
            );
            (clip.label.clone(), "policy".to_string(), rep.rows, rep.total_reward, mean, rep.poses)
        };

    print_reward_header();
    print_reward_row(&label, &mode_name, steps, total, &mean);
    print_error_means(&mean);
    if let Some(out) = &cli.out {
        artifacts::write_string(out, &artifacts::metrics_csv(&report_rows))?;
        println!("wrote per-step reward trace to {}", out.display());
    }
    if let Some(path) = &args.poses {
        if poses.is_empty() {
            return Err(Error::validation(
                "--poses needs a policy checkpoint; ideal-tracking rollouts dump no poses",
            ));
        }
        artifacts::write_string(path, &artifacts::pose_csv(&model, &poses))?;
        println!("wrote pose trace to {}", path.display());
    }
    Ok(())
}

fn cmd_ceiling(cli: &Cli, args: &CeilingArgs) -> Result<()> {
    let cfg = require_config(cli)?;
    let model = cfg.load_model()?;
    let clips = cfg.load_clips(&model)?;
    let reward_cfg = cfg.reward_for(&model)?;
    let steps = args.steps.unwrap_or(cfg.eval_steps);
    let modes: Vec<CeilingMode> = match args.mode.as_str() {
        "both" => vec![CeilingMode::Kinematic, CeilingMode::PdTracked],
        m => vec![m.parse()?],
    };

    print_reward_header();
    for mode in modes {
        let reports = retarget::ceiling_batch(&model, &clips, &reward_cfg, mode, steps, cli.threads)?;
        for rep in &reports {
            print_reward_row(&rep.clip, &rep.mode.to_string(), rep.steps, rep.total_reward, &rep.mean);
        }
        if let Some(out) = &cli.out {
            std::fs::create_dir_all(out).map_err(Error::Io)?;
            for rep in &reports {
                let rows: Vec<EvalRow> = rep
                    .rows
                    .iter()
                    .enumerate()
                    .map(|(i, b)| EvalRow { step: i + 1, breakdown: *b })
                    .collect();
                let path = out.join(format!("ceiling_{}_{}.csv", slug(&rep.clip), rep.mode));
                artifacts::write_string(&path, &artifacts::metrics_csv(&rows))?;
            }
        }
    }
    if let Some(out) = &cli.out {
        println!("wrote per-step traces to {}", out.display());
    }
    Ok(())
}

struct Trial {
    index: usize,
    assignment: Vec<(String, f64)>,
    train: TrainConfig,
    reward: RewardConfig,
}

#[derive(serde::Serialize)]
struct TrialRecord {
    rank: usize,
    trial: usize,
    assignment: Vec<(String, f64)>,
    budget_steps: usize,
    final_reward_mean: f64,
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> Result<()> {
    let cfg = require_config(cli)?;
    let spec = SweepSpec::load(&args.spec)?;
    let model = cfg.load_model()?;
    let clips = cfg.load_clips(&model)?;
    let clip = require_single_clip(&clips)?;
    let base_reward = cfg.reward_for(&model)?;
    let budget = spec.budget_steps.unwrap_or((cfg.train.total_steps + 1) / 2);
    let sample_seed = cli.seed.unwrap_or(cfg.seeds[0]);
    let train_seed = cfg.seeds[0];

    // Materialize and validate every trial before training anything.
    let assignments = spec.trials(sample_seed);
    let mut trials = Vec::with_capacity(assignments.len());
    for (index, assignment) in assignments.into_iter().enumerate() {
        let mut train = cfg.train.clone();
        let mut rew = base_reward.clone();
        for (name, value) in &assignment {
            apply_sweep_axis(&mut rew, &mut train, name, *value)?;
        }
        train.total_steps = budget;
        train.seed = train_seed;
        train.validate()?;
        rew.validate(&model)?;
        trials.push(Trial { index, assignment, train, reward: rew });
    }

    let root = out_root(cli, &cfg)?;
    let dir = root.join(format!("{}_sweep", cfg.name));
    std::fs::create_dir_all(&dir).map_err(Error::Io)?;
    println!(
        "sweep '{}': {} trials x {} steps on clip '{}' (seed {train_seed}) -> {}",
        cfg.name,
        trials.len(),
        budget,
        clip.label,
        dir.display()
    );

    let outcomes = run_jobs(cli.threads, &trials, |trial| {
        let make_env = |s, stream| {
            SignEnv::new(
                model.clone(),
                clip.clone(),
                trial.reward.clone(),
                cfg.episode.clone(),
                s,
                stream,
            )
        };
        let mut trainer = Trainer::new(trial.train.clone(), make_env)?;
        trainer.run(|_, _| Ok(()))?;
        let last = trainer
            .curve()
            .last()
            .ok_or_else(|| Error::contract("sweep trial produced no updates"))?;
        let final_reward_mean = last.reward_mean;
        artifacts::write_string(
            dir.join(format!("trial_{}.curve.csv", trial.index)),
            &artifacts::curve_csv(trainer.curve()),
        )?;
        println!("[trial {}] finished: reward/ep {:.3}", trial.index, final_reward_mean);
        Ok(final_reward_mean)
    })?;

    // Rank best first; ties keep trial order.
    let mut order: Vec<usize> = (0..trials.len()).collect();
    order.sort_by(|&a, &b| {
        outcomes[b].partial_cmp(&outcomes[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });

    let axis_names: Vec<String> = spec.axes.keys().cloned().collect();
    let mut csv = String::from("rank,trial");
    for n in &axis_names {
        csv.push(',');
        csv.push_str(n);
    }
    csv.push_str(",final_reward_mean\n");
    let mut records = Vec::with_capacity(order.len());
    println!("{:<5} {:<6} {}  {:>18}", "rank", "trial", axis_names.join("  "), "final_reward_mean");
    for (rank, &i) in order.iter().enumerate() {
        let t = &trials[i];
        let values: Vec<String> = t.assignment.iter().map(|(_, v)| format!("{v}")).collect();
        println!(
            "{:<5} {:<6} {}  {:>18.6}",
            rank + 1,
            t.index,
            values.join("  "),
            outcomes[i]
        );
        csv.push_str(&format!("{},{}", rank + 1, t.index));
        for (_, v) in &t.assignment {
            csv.push_str(&format!(",{v}"));
        }
        csv.push_str(&format!(",{}\n", outcomes[i]));
        records.push(TrialRecord {
            rank: rank + 1,
            trial: t.index,
            assignment: t.assignment.clone(),
            budget_steps: budget,
            final_reward_mean: outcomes[i],
        });
    }
    artifacts::write_string(dir.join("sweep.csv"), &csv)?;
    let trials_json =
        serde_json::to_string_pretty(&records).map_err(Error::Json)? + "\n";
    artifacts::write_string(dir.join("trials.json"), &trials_json)?;
    println!("wrote {} and trials.json", dir.join("sweep.csv").display());
    Ok(())
}

/// Builtin names (comma separated) or a JSON file holding an array of
/// custom sets.
fn parse_factor_sets(arg: &str) -> Result<Vec<FactorSet>> {
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::schema(path, format!("cannot read factor sets: {e}")))?;
        let sets: Vec<FactorSet> = serde_json::from_str(&text)
            .map_err(|e| Error::schema(path, format!("invalid factor sets: {e}")))?;
        if sets.is_empty() {
            return Err(Error::schema(path, "factor set file is empty".to_string()));
        }
        return Ok(sets);
    }
    let builtin = reward::builtin_factor_sets();
    let mut out = Vec::new();
    for name in arg.split(',') {
        let name = name.trim();
        let hit = builtin.iter().find(|s| s.name == name).cloned().ok_or_else(|| {
            Error::validation(format!(
                "unknown factor set '{name}'; builtins: {} (or pass a JSON file)",
                builtin.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(", ")
            ))
        })?;
        out.push(hit);
    }
    Ok(out)
}

fn cmd_estimate(cli: &Cli, args: &EstimateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.trace)
        .map_err(|e| Error::schema(&args.trace, format!("cannot read trace: {e}")))?;
    let rows = artifacts::parse_metrics_csv(&text)?;
    let errors: Vec<_> = rows.iter().map(|r| r.breakdown.errors).collect();
    let sets = parse_factor_sets(&args.factors)?;

    let mut estimates = Vec::with_capacity(sets.len());
    for set in &sets {
        estimates.push(reward::estimate(set, &errors)?);
    }

    println!("trace {} ({} rows)", args.trace.display(), errors.len());
    println!(
        "{:<10} {:>6} {:>7} {:>8} {:>8}  {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}  {:>9} {:>9}",
        "set", "k_p,b", "k_p,h", "k_v,b", "k_v,h", "r_p,b", "r_p,h", "r_v,b", "r_v,h", "r_e",
        "r_r", "r^p*r^v", "total"
    );
    for est in &estimates {
        let s = &est.set;
        let m = &est.mean;
        println!(
            "{:<10} {:>6} {:>7} {:>8} {:>8}  {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}  {:>9.4} {:>9.4}",
            s.name,
            s.k_pose_body,
            s.k_pose_hand,
            s.k_vel_body,
            s.k_vel_hand,
            m.r_pose_body,
            m.r_pose_hand,
            m.r_vel_body,
            m.r_vel_hand,
            m.r_end_effector,
            m.r_root,
            est.pose_velocity,
            m.total
        );
    }

    if let Some(out) = &cli.out {
        let mut csv = String::from(
            "set,k_pose_body,k_pose_hand,k_vel_body,k_vel_hand,k_end_effector,k_root,\
             r_pose_body,r_pose_hand,r_vel_body,r_vel_hand,r_end_effector,r_root,\
             pose_velocity,total\n",
        );
        for est in &estimates {
            let s = &est.set;
            let m = &est.mean;
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                s.name,
                s.k_pose_body,
                s.k_pose_hand,
                s.k_vel_body,
                s.k_vel_hand,
                s.k_end_effector,
                s.k_root,
                m.r_pose_body,
                m.r_pose_hand,
                m.r_vel_body,
                m.r_vel_hand,
                m.r_end_effector,
                m.r_root,
                est.pose_velocity,
                m.total
            ));
        }
        artifacts::write_string(out, &csv)?;
        println!("wrote estimate table to {}", out.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_subcommand() {
        let cli = Cli::try_parse_from([
            "signmimic", "convert", "cap.json", "--model", "m.json", "--smooth",
        ])
        .unwrap();
        assert!(matches!(cli.command, Command::Convert(_)));

        let cli =
            Cli::try_parse_from(["signmimic", "train", "--config", "run.json", "--threads", "4"])
                .unwrap();
        assert!(matches!(cli.command, Command::Train));
        assert_eq!(cli.threads, 4);

        let cli = Cli::try_parse_from([
            "signmimic", "eval", "kinematic", "--config", "run.json", "--steps", "100",
        ])
        .unwrap();
        match &cli.command {
            Command::Eval(a) => {
                assert_eq!(a.checkpoint, "kinematic");
                assert_eq!(a.steps, Some(100));
            }
            _ => panic!("expected eval"),
        }

        let cli = Cli::try_parse_from([
            "signmimic", "sweep", "--config", "run.json", "--spec", "sweep.json",
        ])
        .unwrap();
        assert!(matches!(cli.command, Command::Sweep(_)));

        let cli = Cli::try_parse_from([
            "signmimic", "ceiling", "--config", "run.json", "--mode", "pd_tracked",
        ])
        .unwrap();
        assert!(matches!(cli.command, Command::Ceiling(_)));

        let cli = Cli::try_parse_from([
            "signmimic", "estimate-rewards", "--trace", "t.csv", "--factors", "run3",
        ])
        .unwrap();
        assert!(matches!(cli.command, Command::EstimateRewards(_)));
    }

    #[test]
    fn missing_subcommand_is_a_parse_error() {
        assert!(Cli::try_parse_from(["signmimic"]).is_err());
        assert!(Cli::try_parse_from(["signmimic", "launch"]).is_err());
    }

    #[test]
    fn pseudo_checkpoints_are_the_two_ceiling_modes() {
        assert_eq!(parse_pseudo_checkpoint("kinematic"), Some(CeilingMode::Kinematic));
        assert_eq!(parse_pseudo_checkpoint("pd_tracked"), Some(CeilingMode::PdTracked));
        assert_eq!(parse_pseudo_checkpoint("ckpt.json"), None);
    }

    #[test]
    fn convert_output_lands_next_to_the_capture() {
        let p = convert_out_path(Path::new("/data/above.capture.json"));
        assert_eq!(p, Path::new("/data/above.clip.json"));
        let p = convert_out_path(Path::new("rel/take7.json"));
        assert_eq!(p, Path::new("rel/take7.clip.json"));
    }

    #[test]
    fn builtin_factor_names_resolve_and_unknowns_do_not() {
        let sets = parse_factor_sets("run3,default").unwrap();
        assert_eq!(sets[0].name, "run3");
        assert_eq!(sets[1].name, "default");
        assert!(parse_factor_sets("run9").is_err());
    }

    #[test]
    fn job_runner_preserves_order_for_any_worker_count() {
        let jobs: Vec<usize> = (0..13).collect();
        for threads in [1, 2, 3, 8, 64] {
            let out = run_jobs(threads, &jobs, |&i| Ok(i * i)).unwrap();
            assert_eq!(out, jobs.iter().map(|i| i * i).collect::<Vec<_>>());
        }
        let err = run_jobs(4, &jobs, |&i| {
            if i == 7 {
                Err(Error::validation("boom"))
            } else {
                Ok(i)
            }
        });
        assert!(err.is_err());
    }

    #[test]
    fn seed_restriction_must_name_a_configured_seed() {
        let cfg = RunConfig {
            schema_version: 1,
            name: "t".into(),
            model: "m.json".into(),
            clips: vec!["c.json".into()],
            reward: Default::default(),
            episode: Default::default(),
            train: Default::default(),
            eval_steps: 10,
            seeds: vec![1, 2, 3],
            out: None,
            base_dir: PathBuf::new(),
        };
        assert_eq!(select_seeds(&cfg, None).unwrap(), vec![1, 2, 3]);
        assert_eq!(select_seeds(&cfg, Some(2)).unwrap(), vec![2]);
        assert!(select_seeds(&cfg, Some(9)).is_err());
    }
}
