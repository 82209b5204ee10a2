//! The `dmk` command line.
//!
//! Exit status is 0 on success, 1 when a subcommand fails, 2 on a usage error.
//! Results go to files under `--out` (or standard output where noted);
//! diagnostics go to standard error. `RUST_LOG=debug` shows per-epoch training logs.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::imaging::{ssim, ImageBuffer, SsimParams};
use crate::labels::{
    dataset_stats, load_labels, BuildingAnnotation, DamageClass, DamageLabel, DatasetManifest, ManifestEntry, SceneLabel,
};
use crate::metrics::score_dataset;
use crate::models::{
    building_samples, difference_input, end_to_end_sample, footprint_sample, run_two_step, segment_end_to_end,
    train_classifier, train_disaster_classifier, train_segmenter, BranchKind, ClassifierConfig, ClassifierModel,
    DisasterClassifier, DisasterConfig, DisasterSample, History, NetworkClassifier, SegNet, SegNetConfig, TowerConfig,
    TrainConfig,
};
use crate::raster::{polygonize, rasterize_label, CropSpec, Mask};
use crate::split::{read_id_list, stratified_split};
use crate::synth::{generate_dataset, DisasterSpec};

const DEFAULT_SEED: u64 = 42;
const MODEL_FILE: &str = "model.dmk";
const CONFIG_FILE: &str = "config.toml";
const HISTORY_FILE: &str = "history.csv";

#[derive(Debug, Parser)]
#[command(name = "dmk", version, about = "Two-step building damage assessment at desk scale")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    /// Seed for every random choice [default: 42, or the config file's seed]
    #[arg(long, global = true, env = "DMK_SEED")]
    seed: Option<u64>,
    /// Worker threads for per-scene and per-crop work
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset (images/, labels/, manifest.csv)
    Synth(SynthArgs),
    /// Damage and density statistics of a dataset, as JSON
    Stats(StatsArgs),
    /// Per-disaster train/validation split
    Split(SplitArgs),
    /// Rasterize a label file into a class mask PNG (0 background, 1-4 damage)
    Rasterize(RasterizeArgs),
    /// Trace a class mask PNG back into a label file
    Polygonize(PolygonizeArgs),
    /// SSIM of two images, printed with 6 decimals
    Ssim(SsimArgs),
    /// Train the footprint segmenter, or the end-to-end damage segmenter with --e2e
    TrainSeg(TrainSegArgs),
    /// Train the twin-tower damage classifier
    TrainCls(TrainClsArgs),
    /// Train the scene-level disaster classifier
    TrainDisaster(TrainDisasterArgs),
    /// Two-step inference: segment, polygonize, classify each building
    Infer(InferArgs),
    /// End-to-end inference from the post - pre difference
    InferE2e(InferE2eArgs),
    /// Score prediction masks against labels
    Score(ScoreArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Scenes per disaster
    #[arg(long, default_value_t = 10)]
    scenes: usize,
    /// Scene side in pixels (at least 64)
    #[arg(long, default_value_t = 64)]
    side: u32,
    /// JSON array of disaster specs; the four built-in presets when absent
    #[arg(long)]
    specs: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Report file; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    val_frac: f64,
    /// Directory for train.txt, val.txt and split.json
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RasterizeArgs {
    #[arg(long)]
    label: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PolygonizeArgs {
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Components smaller than this many pixels are dropped
    #[arg(long, default_value_t = crate::models::MIN_BUILDING_AREA)]
    min_area: usize,
    /// Scene id written to the label; the mask file stem when absent
    #[arg(long)]
    scene_id: Option<String>,
    #[arg(long, default_value = "unknown")]
    disaster: String,
}

#[derive(Debug, Args)]
struct SsimArgs {
    a: PathBuf,
    b: PathBuf,
}

/// Which manifest scenes to use for training.
#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Scene ids to train on (one per line); every scene not in --val-ids when absent
    #[arg(long)]
    train_ids: Option<PathBuf>,
    /// Scene ids to validate on after each epoch
    #[arg(long)]
    val_ids: Option<PathBuf>,
}

/// Hyperparameters; each flag overrides the config file.
#[derive(Debug, Args)]
struct TrainArgs {
    /// Model directory (model.dmk, config.toml, history.csv)
    #[arg(long)]
    out: PathBuf,
    /// TOML training config (seed, lr, batch, epochs, branch, shared_towers, patch_side)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Classifier crop side, or resized scene side for the disaster classifier
    #[arg(long)]
    patch_side: Option<usize>,
}

#[derive(Debug, Args)]
struct TrainSegArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    train: TrainArgs,
    /// Train the 5-class end-to-end model on post - pre instead of the footprint model
    #[arg(long)]
    e2e: bool,
}

#[derive(Debug, Args)]
struct TrainClsArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    train: TrainArgs,
    /// Extra input: none, disaster or ssim
    #[arg(long)]
    branch: Option<BranchKind>,
    /// Give the pre and post images their own towers
    #[arg(long)]
    separate_towers: bool,
}

#[derive(Debug, Args)]
struct TrainDisasterArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    train: TrainArgs,
}

/// Which manifest scenes to run on.
#[derive(Debug, Args)]
struct SceneArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Restrict to these scene ids (one per line)
    #[arg(long)]
    ids: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InferArgs {
    #[command(flatten)]
    scenes: SceneArgs,
    /// Footprint segmenter directory
    #[arg(long)]
    seg: PathBuf,
    /// Damage classifier directory
    #[arg(long)]
    cls: PathBuf,
    /// Disaster classifier directory, needed when the classifier has a disaster branch
    #[arg(long)]
    disaster_model: Option<PathBuf>,
    /// Take the disaster from the manifest instead of the disaster classifier
    #[arg(long)]
    oracle_disaster: bool,
    /// Crop padding as a fraction of the building's longer side
    #[arg(long, default_value_t = 0.1)]
    padding: f64,
    /// Directory for <scene_id>.png masks
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct InferE2eArgs {
    #[command(flatten)]
    scenes: SceneArgs,
    /// End-to-end model directory
    #[arg(long)]
    model: PathBuf,
    /// Directory for <scene_id>.png masks
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[command(flatten)]
    scenes: SceneArgs,
    /// Directory of <scene_id>.png prediction masks
    #[arg(long)]
    pred: PathBuf,
    /// Report file (JSON)
    #[arg(long)]
    out: PathBuf,
}

/// Parses `std::env::args`, runs the subcommand and maps the outcome to an exit code.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    ensure!(cli.jobs >= 1, "--jobs must be at least 1");
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build()?;
    let seed = cli.seed;
    pool.install(|| match cli.command {
        Command::Synth(a) => synth(a, seed.unwrap_or(DEFAULT_SEED)),
        Command::Stats(a) => stats(a),
        Command::Split(a) => split(a, seed.unwrap_or(DEFAULT_SEED)),
        Command::Rasterize(a) => rasterize(a),
        Command::Polygonize(a) => polygonize_cmd(a),
        Command::Ssim(a) => ssim_cmd(a),
        Command::TrainSeg(a) => train_seg(a, seed),
        Command::TrainCls(a) => train_cls(a, seed),
        Command::TrainDisaster(a) => train_disaster(a, seed),
        Command::Infer(a) => infer(a),
        Command::InferE2e(a) => infer_e2e(a),
        Command::Score(a) => score(a),
    })
}

/// Writes one line to standard output; a closed pipe (`dmk stats | head`) is not an error.
fn emit(line: impl std::fmt::Display) -> Result<()> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{line}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn create_parent(file: &Path) -> Result<()> {
    match file.parent() {
        Some(p) if !p.as_os_str().is_empty() => create_dir(p),
        _ => Ok(()),
    }
}

fn synth(a: SynthArgs, seed: u64) -> Result<()> {
    let specs = match &a.specs {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<Vec<DisasterSpec>>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => DisasterSpec::presets(),
    };
    let manifest = generate_dataset(&specs, a.scenes, a.side, seed, &a.out)?;
    emit(format_args!("{} scenes written to {}", manifest.len(), a.out.display()))?;
    Ok(())
}

fn stats(a: StatsArgs) -> Result<()> {
    let manifest = DatasetManifest::read(&a.manifest)?;
    let report = dataset_stats(&manifest, &load_labels(&manifest));
    for (id, err) in &report.errors {
        log::warn!("{id}: {err}");
    }
    let json = serde_json::to_string_pretty(&report)?;
    match &a.out {
        Some(path) => {
            create_parent(path)?;
            std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn split(a: SplitArgs, seed: u64) -> Result<()> {
    let manifest = DatasetManifest::read(&a.manifest)?;
    let s = stratified_split(&manifest, a.val_frac, seed)?;
    s.write(&a.out)?;
    emit(format_args!("train {} val {}", s.train.len(), s.val.len()))?;
    Ok(())
}

fn rasterize(a: RasterizeArgs) -> Result<()> {
    let raster = rasterize_label(&SceneLabel::read(&a.label)?)?;
    create_parent(&a.out)?;
    raster.mask.write_png(&a.out)?;
    Ok(())
}

fn polygonize_cmd(a: PolygonizeArgs) -> Result<()> {
    let mask = Mask::read_png(&a.mask)?;
    let scene_id = match a.scene_id {
        Some(id) => id,
        None => a.mask.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
    };
    let mut label = SceneLabel::new(scene_id, a.disaster, mask.width(), mask.height())?;
    for (i, (footprint, value)) in polygonize(&mask, a.min_area).into_iter().enumerate() {
        let class = DamageClass::from_mask_value(value).expect("polygonize returns nonzero mask values");
        label.buildings.push(BuildingAnnotation { uid: format!("p{i:04}"), footprint, label: DamageLabel::Assessed(class) });
    }
    create_parent(&a.out)?;
    label.write(&a.out)?;
    Ok(())
}

fn ssim_cmd(a: SsimArgs) -> Result<()> {
    let x = ImageBuffer::read_png(&a.a)?;
    let y = ImageBuffer::read_png(&a.b)?;
    emit(format_args!("{:.6}", ssim(&x, &y, &SsimParams::default())?))?;
    Ok(())
}

// ---------------------------------------------------------------- training

struct Scene {
    entry: ManifestEntry,
    pre: ImageBuffer,
    post: ImageBuffer,
    label: SceneLabel,
}

fn load_scene(entry: &ManifestEntry, with_label: bool) -> Result<Scene> {
    let pre = ImageBuffer::read_png(&entry.pre_image)?;
    let post = ImageBuffer::read_png(&entry.post_image)?;
    let label = if with_label {
        SceneLabel::read(&entry.label)?
    } else {
        SceneLabel::new(&entry.scene_id, &entry.disaster_name, pre.width(), pre.height())?
    };
    Ok(Scene { entry: entry.clone(), pre, post, label })
}

fn load_scenes(manifest: &DatasetManifest, with_label: bool) -> Result<Vec<Scene>> {
    manifest
        .entries
        .par_iter()
        .map(|e| load_scene(e, with_label).with_context(|| format!("scene {}", e.scene_id)))
        .collect()
}

fn read_ids(path: &Path) -> Result<Vec<String>> {
    read_id_list(path).with_context(|| format!("reading {}", path.display()))
}

fn subset(manifest: &DatasetManifest, ids: &[String], what: &Path) -> Result<DatasetManifest> {
    let sub = manifest.subset(ids);
    if sub.len() != ids.len() {
        let missing: Vec<&String> = ids.iter().filter(|id| manifest.get(id).is_none()).take(5).collect();
        bail!("{}: scene ids missing from the manifest: {missing:?}", what.display());
    }
    Ok(sub)
}

/// (train, val) scenes.
fn load_training_data(d: &DataArgs) -> Result<(Vec<Scene>, Vec<Scene>)> {
    let manifest = DatasetManifest::read(&d.manifest)?;
    let val = match &d.val_ids {
        Some(p) => subset(&manifest, &read_ids(p)?, p)?,
        None => DatasetManifest::default(),
    };
    let train = match &d.train_ids {
        Some(p) => subset(&manifest, &read_ids(p)?, p)?,
        None => {
            let held: BTreeSet<&str> = val.entries.iter().map(|e| e.scene_id.as_str()).collect();
            DatasetManifest {
                entries: manifest.entries.iter().filter(|e| !held.contains(e.scene_id.as_str())).cloned().collect(),
            }
        }
    };
    ensure!(!train.is_empty(), "no training scenes");
    Ok((load_scenes(&train, true)?, load_scenes(&val, true)?))
}

fn resolve_config(t: &TrainArgs, seed: Option<u64>, defaults: TrainConfig) -> Result<TrainConfig> {
    let mut cfg = match &t.config {
        Some(path) => TrainConfig::read(path)?,
        None => defaults,
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(v) = t.lr {
        cfg.lr = v;
    }
    if let Some(v) = t.batch {
        cfg.batch = v;
    }
    if let Some(v) = t.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = t.patch_side {
        cfg.patch_side = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Sorted disaster names of the training scenes, unless the config already lists them.
fn disaster_names(cfg: &mut TrainConfig, train: &[Scene]) {
    if cfg.disasters.is_empty() {
        let names: BTreeSet<&str> = train.iter().map(|s| s.entry.disaster_name.as_str()).collect();
        cfg.disasters = names.into_iter().map(String::from).collect();
    }
}

fn disaster_index(cfg: &TrainConfig, name: &str) -> Result<usize> {
    cfg.disasters
        .iter()
        .position(|d| d == name)
        .with_context(|| format!("disaster {name:?} is not among the model's disasters {:?}", cfg.disasters))
}

fn save_model(dir: &Path, params: &crate::autodiff::ParamStore, cfg: &TrainConfig, history: &History) -> Result<()> {
    create_dir(dir)?;
    params.save(&dir.join(MODEL_FILE))?;
    cfg.write(&dir.join(CONFIG_FILE))?;
    history.write(&dir.join(HISTORY_FILE))?;
    if let Some(last) = history.last() {
        let val = last.val_acc.map_or("-".into(), |v| format!("{v:.4}"));
        emit(format_args!(
            "epoch {}: train_loss {:.5} train_acc {:.4} val_acc {val}",
            last.epoch, last.train_loss, last.train_acc
        ))?;
    }
    Ok(())
}

fn segmenter_defaults() -> TrainConfig {
    TrainConfig { lr: 0.05, batch: 1, epochs: 40, ..TrainConfig::default() }
}

fn train_seg(a: TrainSegArgs, seed: Option<u64>) -> Result<()> {
    let cfg = resolve_config(&a.train, seed, segmenter_defaults())?;
    let (train, val) = load_training_data(&a.data)?;
    let net_cfg = if a.e2e { SegNetConfig::end_to_end() } else { SegNetConfig::footprint() };
    let sample = |s: &Scene| {
        if a.e2e {
            end_to_end_sample(&net_cfg, &s.pre, &s.post, &s.label)
        } else {
            footprint_sample(&net_cfg, &s.pre, &s.label)
        }
    };
    let train_s = train.iter().map(sample).collect::<Result<Vec<_>, _>>()?;
    let val_s = val.iter().map(sample).collect::<Result<Vec<_>, _>>()?;
    let mut model = SegNet::new(net_cfg, cfg.seed)?;
    let history = train_segmenter(&mut model, &train_s, &val_s, &cfg)?;
    save_model(&a.train.out, model.params(), &cfg, &history)
}

fn classifier_config(cfg: &TrainConfig) -> ClassifierConfig {
    ClassifierConfig {
        tower: TowerConfig::with_side(cfg.patch_side),
        branch: cfg.branch.to_branch(cfg.disasters.len()),
        shared_towers: cfg.shared_towers,
        ..ClassifierConfig::default()
    }
}

fn train_cls(a: TrainClsArgs, seed: Option<u64>) -> Result<()> {
    let mut cfg = resolve_config(&a.train, seed, TrainConfig::default())?;
    if let Some(b) = a.branch {
        cfg.branch = b;
    }
    if a.separate_towers {
        cfg.shared_towers = false;
    }
    let (train, val) = load_training_data(&a.data)?;
    disaster_names(&mut cfg, &train);
    let model_cfg = classifier_config(&cfg);
    let samples = |scenes: &[Scene]| -> Result<Vec<_>> {
        let mut out = vec![];
        for s in scenes {
            let d = disaster_index(&cfg, &s.entry.disaster_name)?;
            out.extend(building_samples(&model_cfg, &s.pre, &s.post, &s.label, Some(d), 0.1)?);
        }
        Ok(out)
    };
    let (train_s, val_s) = (samples(&train)?, samples(&val)?);
    let mut model = ClassifierModel::new(model_cfg, cfg.seed)?;
    let history = train_classifier(&mut model, &train_s, &val_s, &cfg)?;
    save_model(&a.train.out, model.params(), &cfg, &history)
}

fn train_disaster(a: TrainDisasterArgs, seed: Option<u64>) -> Result<()> {
    let cfg = resolve_config(&a.train, seed, TrainConfig { batch: 4, epochs: 100, patch_side: 16, ..TrainConfig::default() })?;
    let (train, val) = load_training_data(&a.data)?;
    let mut cfg = cfg;
    disaster_names(&mut cfg, &train);
    let model_cfg = DisasterConfig::new(cfg.patch_side, cfg.disasters.len());
    let samples = |scenes: &[Scene]| -> Result<Vec<_>> {
        scenes
            .iter()
            .map(|s| Ok(DisasterSample::new(&model_cfg, &s.pre, &s.post, disaster_index(&cfg, &s.entry.disaster_name)?)?))
            .collect()
    };
    let (train_s, val_s) = (samples(&train)?, samples(&val)?);
    let mut model = DisasterClassifier::new(model_cfg, cfg.seed)?;
    let history = train_disaster_classifier(&mut model, &train_s, &val_s, &cfg)?;
    save_model(&a.train.out, model.params(), &cfg, &history)
}

// ---------------------------------------------------------------- inference

fn load_params(dir: &Path, params: &mut crate::autodiff::ParamStore, what: &str) -> Result<()> {
    let path = dir.join(MODEL_FILE);
    params.load(&path).with_context(|| format!("{}: checkpoint does not match the {what}", path.display()))
}

fn load_segnet(dir: &Path, net_cfg: SegNetConfig, what: &str) -> Result<SegNet> {
    let cfg = TrainConfig::read(&dir.join(CONFIG_FILE))?;
    let mut model = SegNet::new(net_cfg, cfg.seed)?;
    load_params(dir, model.params_mut(), what)?;
    Ok(model)
}

fn load_classifier(dir: &Path) -> Result<(ClassifierModel, TrainConfig)> {
    let cfg = TrainConfig::read(&dir.join(CONFIG_FILE))?;
    let mut model = ClassifierModel::new(classifier_config(&cfg), cfg.seed)?;
    load_params(dir, model.params_mut(), "damage classifier")?;
    Ok((model, cfg))
}

fn load_disaster_classifier(dir: &Path) -> Result<(DisasterClassifier, TrainConfig)> {
    let cfg = TrainConfig::read(&dir.join(CONFIG_FILE))?;
    let mut model = DisasterClassifier::new(DisasterConfig::new(cfg.patch_side, cfg.disasters.len()), cfg.seed)?;
    load_params(dir, model.params_mut(), "disaster classifier")?;
    Ok((model, cfg))
}

fn scene_manifest(s: &SceneArgs) -> Result<DatasetManifest> {
    let manifest = DatasetManifest::read(&s.manifest)?;
    match &s.ids {
        Some(p) => subset(&manifest, &read_ids(p)?, p),
        None => Ok(manifest),
    }
}

fn infer(a: InferArgs) -> Result<()> {
    let segmenter = load_segnet(&a.seg, SegNetConfig::footprint(), "footprint segmenter")?;
    let (classifier, cls_cfg) = load_classifier(&a.cls)?;
    let needs_disaster = cls_cfg.branch == BranchKind::Disaster;
    let disaster_model = match (&a.disaster_model, needs_disaster && !a.oracle_disaster) {
        (Some(dir), true) => Some(load_disaster_classifier(dir)?),
        (None, true) => bail!("the classifier has a disaster branch: pass --disaster-model or --oracle-disaster"),
        _ => None,
    };
    let crop = CropSpec::new(a.padding, cls_cfg.patch_side as u32)?;
    let manifest = scene_manifest(&a.scenes)?;
    create_dir(&a.out)?;
    for entry in &manifest.entries {
        let s = load_scene(entry, false).with_context(|| format!("scene {}", entry.scene_id))?;
        let disaster = if !needs_disaster {
            None
        } else if let Some((m, dcfg)) = &disaster_model {
            let name = &dcfg.disasters[m.predict_index(&s.pre, &s.post)?];
            log::info!("{}: predicted disaster {name}", entry.scene_id);
            Some(disaster_index(&cls_cfg, name)?)
        } else {
            Some(disaster_index(&cls_cfg, &entry.disaster_name)?)
        };
        let net = NetworkClassifier::new(&classifier, disaster);
        let mask = run_two_step(&s.pre, &s.post, &segmenter, &net, &crop)?;
        mask.write_png(&a.out.join(format!("{}.png", entry.scene_id)))?;
    }
    emit(format_args!("{} masks written to {}", manifest.len(), a.out.display()))?;
    Ok(())
}

fn infer_e2e(a: InferE2eArgs) -> Result<()> {
    let model = load_segnet(&a.model, SegNetConfig::end_to_end(), "end-to-end segmenter")?;
    let manifest = scene_manifest(&a.scenes)?;
    create_dir(&a.out)?;
    for entry in &manifest.entries {
        let s = load_scene(entry, false).with_context(|| format!("scene {}", entry.scene_id))?;
        let mask = segment_end_to_end(&model, &difference_input(&s.pre, &s.post)?)?;
        mask.write_png(&a.out.join(format!("{}.png", entry.scene_id)))?;
    }
    emit(format_args!("{} masks written to {}", manifest.len(), a.out.display()))?;
    Ok(())
}

fn score(a: ScoreArgs) -> Result<()> {
    let manifest = scene_manifest(&a.scenes)?;
    let labels = load_labels(&manifest)
        .into_iter()
        .zip(&manifest.entries)
        .map(|(l, e)| l.with_context(|| format!("scene {}", e.scene_id)))
        .collect::<Result<Vec<_>>>()?;
    let preds = manifest
        .entries
        .par_iter()
        .map(|e| {
            let path = a.pred.join(format!("{}.png", e.scene_id));
            Mask::read_png(&path).map(|m| (e.scene_id.clone(), m)).with_context(|| format!("reading {}", path.display()))
        })
        .collect::<Result<_>>()?;
    let report = score_dataset(&labels, &preds)?;
    create_parent(&a.out)?;
    std::fs::write(&a.out, report.to_json()).with_context(|| format!("writing {}", a.out.display()))?;
    emit(format_args!("combined {:.5}", report.combined))?;
    Ok(())
}
