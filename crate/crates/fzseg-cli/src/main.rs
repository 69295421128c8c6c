//! `fzseg` — train, run and score the lesion segmentation pipeline.
//!
//! Subcommands: `train` fits the pixel classifier from labeled images,
//! `segment` batch-produces lesion masks, `evaluate` scores masks against
//! ground truth, `inspect` writes the per-class probability images.
//!
//! Exit codes: 0 = success, 1 = some inputs failed but the batch ran,
//! 2 = usage or configuration error.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::ConfigOverrides;
use fzseg::features::{
    extract_features_with, feature_names, load_label_map, options_for_fingerprint,
    sample_pixels, ExtractOptions,
};
use fzseg::forest::{
    cross_validate, load_model, save_model, train, DEFAULT_FEATURES_PER_SPLIT, DEFAULT_TREES,
};
use fzseg::fuzzy::{classify_image, probability_images};
use fzseg::imaging::{
    dilate, erode, load_rgb, resize_bicubic, save_gray_png, save_mask_png, save_rgb_png,
    StructuringElement,
};
use fzseg::segmentation::{segment, TraceImage};
use fzseg::{LabelMap, PixelClass, RgbImage, TrainingSet};

#[derive(Parser)]
#[command(
    name = "fzseg",
    version,
    about = "Skin lesion segmentation: fuzzy pixel classification + Otsu thresholding"
)]
struct Cli {
    /// Worker threads (0 = all available cores). 1 gives the byte-exact
    /// deterministic reference path.
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    threads: usize,

    /// More logging (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train the pixel classifier from images with label sidecars.
    Train(TrainArgs),
    /// Segment one image or a directory of images.
    Segment(SegmentArgs),
    /// Score predicted masks against ground-truth masks.
    Evaluate(EvaluateArgs),
    /// Write per-class probability images for one image or a directory.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Directory of training images (PNG/JPEG).
    #[arg(long, value_name = "DIR")]
    images: PathBuf,
    /// Directory of label sidecars: `<stem>_labels.png`, 8-bit, pixel
    /// values 1 = lesion, 2 = skin, 3 = other, 0 = unlabeled.
    #[arg(long, value_name = "DIR")]
    labels: PathBuf,
    /// Output model file.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Also run k-fold cross-validation and print the report.
    #[arg(long, value_name = "K")]
    cv: Option<usize>,
    /// Number of trees.
    #[arg(long, default_value_t = DEFAULT_TREES, value_name = "N")]
    trees: usize,
    /// Features tried per split.
    #[arg(long, default_value_t = DEFAULT_FEATURES_PER_SPLIT, value_name = "N")]
    mtry: usize,
    /// Random seed for bootstrapping and split sampling.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Add the three normalized-RGB features to the descriptor.
    #[arg(long)]
    include_rgb_norm: bool,
    /// Configuration file (key = value); only working_width matters here.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

#[derive(Args)]
struct SegmentArgs {
    /// Trained model file.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Input image or directory of images.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Output directory for `<stem>_mask.png` files.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Also write every intermediate stage to `<stem>_trace/`.
    #[arg(long)]
    trace: bool,
    /// Also write `<stem>_overlay.png` with the mask boundary drawn.
    #[arg(long)]
    overlay: bool,
    /// Configuration file (key = value).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Directory of predicted masks (`<stem>_mask.png` or `<stem>.png`).
    #[arg(long, value_name = "DIR")]
    pred: PathBuf,
    /// Directory of ground-truth masks (`<stem>_Segmentation.png`).
    #[arg(long, value_name = "DIR")]
    gt: PathBuf,
    /// Output CSV file.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct InspectArgs {
    /// Trained model file.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Input image or directory of images.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Output directory for probability images (at working resolution).
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Configuration file (key = value); only working_width matters here.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .init();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            log::error!("cannot configure {} worker threads: {e}", cli.threads);
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.cmd {
        Cmd::Train(args) => cmd_train(args),
        Cmd::Segment(args) => cmd_segment(args),
        Cmd::Evaluate(args) => cmd_evaluate(args),
        Cmd::Inspect(args) => cmd_inspect(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::from(2)
        }
    }
}

/// Collects the input image paths: a single file as-is, a directory's
/// PNG/JPEG entries sorted by name.
fn collect_inputs(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    if !path.is_dir() {
        bail!("input path {} is neither a file nor a directory", path.display());
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .with_context(|| format!("cannot read directory {}", path.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file() && is_image_file(p))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no PNG/JPEG images in {}", path.display());
    }
    Ok(files)
}

fn is_image_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("image")
        .to_string()
}

/// Label sidecars are drawn at the original resolution; when the image is
/// resized for training, the codes are carried over by nearest neighbor
/// (codes must not be interpolated).
fn resize_labels_nearest(labels: &LabelMap, w: usize, h: usize) -> fzseg::Result<LabelMap> {
    let (sw, sh) = (labels.width(), labels.height());
    let mut codes = Vec::with_capacity(w * h);
    for y in 0..h {
        let sy = (((y as f64 + 0.5) * sh as f64 / h as f64 - 0.5).round() as isize)
            .clamp(0, sh as isize - 1) as usize;
        for x in 0..w {
            let sx = (((x as f64 + 0.5) * sw as f64 / w as f64 - 0.5).round() as isize)
                .clamp(0, sw as isize - 1) as usize;
            codes.push(labels.code(sx, sy));
        }
    }
    LabelMap::new(w, h, codes)
}

fn cmd_train(args: TrainArgs) -> Result<u8> {
    let cfg = config::effective_config(args.config.as_deref(), &args.overrides)?;
    log::info!("effective config: {cfg:?}");
    if !args.images.is_dir() {
        bail!("images directory {} does not exist", args.images.display());
    }
    if !args.labels.is_dir() {
        bail!("labels directory {} does not exist", args.labels.display());
    }
    let opts = ExtractOptions {
        include_rgb_norm: args.include_rgb_norm,
    };

    let mut inputs = collect_inputs(&args.images)?;
    inputs.retain(|p| {
        let stem = file_stem(p);
        !stem.ends_with("_labels") && !stem.ends_with("_Segmentation") && !stem.ends_with("_mask")
    });
    let mut set = TrainingSet::new(feature_names(&opts));
    let mut used = 0usize;
    let started = Instant::now();
    for path in &inputs {
        let stem = file_stem(path);
        let label_path = args.labels.join(format!("{stem}_labels.png"));
        if !label_path.is_file() {
            log::warn!("{stem}: no label sidecar {}, skipped", label_path.display());
            continue;
        }
        let img = load_rgb(path)?;
        let labels = load_label_map(&label_path)?;
        if (labels.width(), labels.height()) != (img.width(), img.height()) {
            bail!(
                "{stem}: label sidecar is {}x{} but the image is {}x{}",
                labels.width(),
                labels.height(),
                img.width(),
                img.height()
            );
        }
        let (img, labels) = if img.width() == cfg.working_width {
            (img, labels)
        } else {
            let resized = resize_bicubic(&img, cfg.working_width)?;
            let labels = resize_labels_nearest(&labels, resized.width(), resized.height())?;
            (resized, labels)
        };
        let rows = sample_pixels(&img, &labels, &opts)?;
        log::info!("{stem}: {} labeled pixels", rows.len());
        for (row, class) in &rows {
            set.push_row(row, *class)?;
        }
        used += 1;
    }
    if used == 0 {
        bail!("no labeled image pairs found");
    }
    let counts = set.class_counts();
    println!(
        "sampled {} pixels from {used} images — lesion: {}, skin: {}, other: {}",
        set.len(),
        counts[PixelClass::Lesion.index()],
        counts[PixelClass::Skin.index()],
        counts[PixelClass::Other.index()]
    );
    if counts.contains(&0) {
        bail!("every class needs at least one labeled pixel");
    }

    if let Some(k) = args.cv {
        let report = cross_validate(&set, k, args.trees, args.mtry, args.seed)?;
        print!("{report}");
    }
    let model = train(&set, args.trees, args.mtry, args.seed)?;
    save_model(&model, &args.out)?;
    println!(
        "model with {} trees written to {} ({:.1} s total)",
        args.trees,
        args.out.display(),
        started.elapsed().as_secs_f64()
    );
    Ok(0)
}

/// Draws the mask boundary onto a copy of the image, 3 px wide, green.
fn boundary_overlay(img: &RgbImage, mask: &fzseg::BinaryMask) -> Result<RgbImage> {
    let se = StructuringElement::disk(1)?;
    let boundary = dilate(&mask.intersect(&erode(mask, &se).complement()), &se);
    let mut out = img.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if boundary.get(x, y) {
                out.set_pixel(x, y, [0, 255, 70]);
            }
        }
    }
    Ok(out)
}

fn write_trace(dir: &Path, result: &fzseg::SegmentationResult) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    for (i, (name, image)) in result.trace.stages.iter().enumerate() {
        let path = dir.join(format!("{i:02}_{name}.png"));
        match image {
            TraceImage::Rgb(img) => save_rgb_png(img, &path)?,
            TraceImage::Gray(img) => save_gray_png(img, &path)?,
            TraceImage::Mask(mask) => save_mask_png(mask, &path)?,
        }
    }
    let summary = format!(
        "threshold: {}\nseparability: {:.4}\nskin_color: {} {} {}\nflags: {}\n",
        result.trace.threshold,
        result.trace.separability,
        result.trace.skin_color[0],
        result.trace.skin_color[1],
        result.trace.skin_color[2],
        if result.trace.flags.is_empty() {
            "none".to_string()
        } else {
            result.trace.flags.join(" ")
        }
    );
    let path = dir.join("summary.txt");
    fs::write(&path, summary).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn cmd_segment(args: SegmentArgs) -> Result<u8> {
    let cfg = config::effective_config(args.config.as_deref(), &args.overrides)?;
    log::info!("effective config: {cfg:?}");
    let model = load_model(&args.model)
        .map_err(|e| anyhow::anyhow!("cannot load model {}: {e}", args.model.display()))?;
    let inputs = collect_inputs(&args.input)?;
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;

    let mut failures: Vec<(String, String)> = Vec::new();
    for path in &inputs {
        let stem = file_stem(path);
        let started = Instant::now();
        let outcome = (|| -> Result<Vec<String>> {
            let img = load_rgb(path)?;
            let result = segment(&img, &model, &cfg, args.trace)?;
            save_mask_png(&result.mask, &args.out_dir.join(format!("{stem}_mask.png")))?;
            if args.overlay {
                let overlay = boundary_overlay(&img, &result.mask)?;
                save_rgb_png(&overlay, &args.out_dir.join(format!("{stem}_overlay.png")))?;
            }
            if args.trace {
                write_trace(&args.out_dir.join(format!("{stem}_trace")), &result)?;
            }
            Ok(result.trace.flags)
        })();
        match outcome {
            Ok(flags) => {
                let note = if flags.is_empty() {
                    String::new()
                } else {
                    format!(" [{}]", flags.join(" "))
                };
                println!(
                    "{stem}: ok ({:.1} s){note}",
                    started.elapsed().as_secs_f64()
                );
            }
            Err(e) => {
                log::error!("{stem}: {e:#}");
                failures.push((stem, format!("{e:#}")));
            }
        }
    }
    if failures.is_empty() {
        Ok(0)
    } else {
        eprintln!("{} of {} inputs failed:", failures.len(), inputs.len());
        for (stem, msg) in &failures {
            eprintln!("  {stem}: {msg}");
        }
        Ok(1)
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<u8> {
    if !args.pred.is_dir() {
        bail!("prediction directory {} does not exist", args.pred.display());
    }
    if !args.gt.is_dir() {
        bail!("ground-truth directory {} does not exist", args.gt.display());
    }
    let started = Instant::now();
    let report = fzseg::eval::evaluate_dataset(&args.pred, &args.gt)?;
    report.write_csv(&args.out)?;
    for (stem, row) in &report.rows {
        log::info!("{stem}: {row}");
    }
    for (stem, msg) in &report.errors {
        log::warn!("{stem}: {msg}");
    }
    match &report.mean {
        Some(mean) => println!("mean over {} images: {mean}", report.rows.len()),
        None => println!("no images scored"),
    }
    println!(
        "reference (ISBI 2016 challenge): accuracy 0.934, dice 0.869, \
         jaccard 0.791, sensitivity 0.870, specificity 0.978"
    );
    println!(
        "report written to {} ({:.1} s)",
        args.out.display(),
        started.elapsed().as_secs_f64()
    );
    if report.mean.is_none() {
        bail!("nothing could be scored");
    }
    Ok(if report.errors.is_empty() { 0 } else { 1 })
}

fn cmd_inspect(args: InspectArgs) -> Result<u8> {
    let cfg = config::effective_config(args.config.as_deref(), &args.overrides)?;
    log::info!("effective config: {cfg:?}");
    let model = load_model(&args.model)
        .map_err(|e| anyhow::anyhow!("cannot load model {}: {e}", args.model.display()))?;
    let opts = options_for_fingerprint(model.fingerprint())
        .ok_or_else(|| anyhow::anyhow!("model does not match this extractor's feature set"))?;
    let inputs = collect_inputs(&args.input)?;
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;

    let mut failures = 0usize;
    for path in &inputs {
        let stem = file_stem(path);
        let outcome = (|| -> Result<()> {
            let img = load_rgb(path)?;
            let img = if img.width() == cfg.working_width {
                img
            } else {
                resize_bicubic(&img, cfg.working_width)?
            };
            let stack = extract_features_with(&img, &opts);
            let partition = classify_image(&model, &stack)?;
            let probs = probability_images(&partition);
            for (name, gray) in [
                ("prob_lesion", &probs.lesion),
                ("prob_skin", &probs.skin),
                ("prob_other", &probs.other),
            ] {
                save_gray_png(gray, &args.out_dir.join(format!("{stem}_{name}.png")))?;
            }
            save_rgb_png(
                &probs.composite,
                &args.out_dir.join(format!("{stem}_prob_composite.png")),
            )?;
            Ok(())
        })();
        if let Err(e) = outcome {
            log::error!("{stem}: {e:#}");
            failures += 1;
        } else {
            println!("{stem}: probability images written");
        }
    }
    Ok(if failures == 0 { 0 } else { 1 })
}
