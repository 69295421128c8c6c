//! Plain-text configuration files: one `key = value` per line, `#` starts
//! a comment. Keys mirror the pipeline parameter names; unknown keys are
//! rejected so typos fail loudly instead of silently using a default.

use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use fzseg::SegmentationConfig;

pub const CONFIG_KEYS: [&str; 9] = [
    "thr_other",
    "thr_skin",
    "working_width",
    "erode_radius_region",
    "median_window",
    "interior_fraction",
    "post_open_radius",
    "post_close_radius",
    "top_k_components",
];

fn parse<T>(key: &str, value: &str) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| anyhow::anyhow!("config key '{key}': cannot parse '{value}': {e}"))
}

fn apply(cfg: &mut SegmentationConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "thr_other" => cfg.thr_other = parse(key, value)?,
        "thr_skin" => cfg.thr_skin = parse(key, value)?,
        "working_width" => cfg.working_width = parse(key, value)?,
        "erode_radius_region" => cfg.erode_radius_region = parse(key, value)?,
        "median_window" => cfg.median_window = parse(key, value)?,
        "interior_fraction" => cfg.interior_fraction = parse(key, value)?,
        "post_open_radius" => cfg.post_open_radius = parse(key, value)?,
        "post_close_radius" => cfg.post_close_radius = parse(key, value)?,
        "top_k_components" => cfg.top_k_components = parse(key, value)?,
        _ => bail!(
            "unknown config key '{key}' (valid keys: {})",
            CONFIG_KEYS.join(", ")
        ),
    }
    Ok(())
}

/// Reads a config file into `cfg`. Later lines override earlier ones.
pub fn load_into(cfg: &mut SegmentationConfig, path: &Path) -> Result<()> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!(
                "{}:{}: expected 'key = value', got '{raw}'",
                path.display(),
                lineno + 1
            );
        };
        apply(cfg, key.trim(), value.trim())
            .with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
    }
    Ok(())
}

/// Pipeline parameters exposed as command-line flags. Any flag that is set
/// wins over the config file (and over the built-in default).
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ConfigOverrides {
    /// Membership level for the artifact cut (0..=1).
    #[arg(long, value_name = "ALPHA")]
    pub thr_other: Option<f64>,
    /// Membership level for the skin cut (0..=1).
    #[arg(long, value_name = "ALPHA")]
    pub thr_skin: Option<f64>,
    /// Width images are resized to before classification.
    #[arg(long, value_name = "PIXELS")]
    pub working_width: Option<usize>,
    /// Disk radius for the lesion+skin region erosions.
    #[arg(long, value_name = "PIXELS")]
    pub erode_radius_region: Option<usize>,
    /// Median blur window used by artifact inpainting (odd).
    #[arg(long, value_name = "PIXELS")]
    pub median_window: Option<usize>,
    /// Central interior disk radius as a fraction of min(w, h).
    #[arg(long, value_name = "FRACTION")]
    pub interior_fraction: Option<f64>,
    /// Disk radius of the final opening.
    #[arg(long, value_name = "PIXELS")]
    pub post_open_radius: Option<usize>,
    /// Disk radius of the final closing.
    #[arg(long, value_name = "PIXELS")]
    pub post_close_radius: Option<usize>,
    /// How many of the largest components compete for most-centered.
    #[arg(long, value_name = "N")]
    pub top_k_components: Option<usize>,
}

impl ConfigOverrides {
    fn apply(&self, cfg: &mut SegmentationConfig) {
        macro_rules! set {
            ($($field:ident),+) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })+
            };
        }
        set!(
            thr_other,
            thr_skin,
            working_width,
            erode_radius_region,
            median_window,
            interior_fraction,
            post_open_radius,
            post_close_radius,
            top_k_components
        );
    }
}

/// Builds the effective pipeline configuration: defaults, then the config
/// file (if any), then explicit flags, then validation.
pub fn effective_config(
    file: Option<&Path>,
    overrides: &ConfigOverrides,
) -> Result<SegmentationConfig> {
    let mut cfg = SegmentationConfig::default();
    if let Some(path) = file {
        load_into(&mut cfg, path)?;
    }
    overrides.apply(&mut cfg);
    cfg.validate()
        .map_err(|e| anyhow::anyhow!("invalid configuration: {e}"))?;
    Ok(cfg)
}
