//! Pipeline configuration: defaults, flat `key = value` files and overrides.

use std::path::Path;

use foveate_core::cortex::{DEFAULT_ALPHA, DEFAULT_GRID_DIMS, DEFAULT_SIGMA_GRID};
use foveate_core::dcnn::{NetworkSpec, Padding};
use foveate_core::gaze::{DEFAULT_CLASSES, DEFAULT_CROP_SIZE, DEFAULT_K_FRACTION, DEFAULT_SPLIT_FRACTIONS};
use foveate_core::retina::{DEFAULT_FOVEA_RADIUS, DEFAULT_RETINA_RADIUS_PX};

use crate::error::{CliError, Result};
use crate::formats::read_text;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub node_count: usize,
    pub fovea_radius: f64,
    pub retina_radius_px: f64,
    pub crop_size: usize,
    pub cortical_dims: (usize, usize),
    pub alpha: f64,
    pub sigma_grid: f64,
    pub k_fraction: f64,
    pub split_fractions: [f64; 3],
    pub seed: u64,
    pub subsample_factor: Option<usize>,
    pub grid_dims: Option<(usize, usize)>,
    pub allow_padding: bool,
    /// Require an explicit homography for every observation.
    pub strict_homographies: bool,
    pub write_crops: bool,
    pub classes: Vec<String>,
    pub network: NetworkSpec,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            node_count: 50_000,
            fovea_radius: DEFAULT_FOVEA_RADIUS,
            retina_radius_px: DEFAULT_RETINA_RADIUS_PX,
            crop_size: DEFAULT_CROP_SIZE,
            cortical_dims: DEFAULT_GRID_DIMS,
            alpha: DEFAULT_ALPHA,
            sigma_grid: DEFAULT_SIGMA_GRID,
            k_fraction: DEFAULT_K_FRACTION,
            split_fractions: DEFAULT_SPLIT_FRACTIONS,
            seed: 0,
            subsample_factor: None,
            grid_dims: None,
            allow_padding: false,
            strict_homographies: false,
            write_crops: true,
            classes: DEFAULT_CLASSES.iter().map(|c| c.to_string()).collect(),
            network: NetworkSpec::default(),
            batch_size: 64,
            learning_rate: 0.01,
            epochs: 10,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("invalid value {value:?} for {key}"))
}

fn parse_bool(key: &str, value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(format!("invalid boolean {value:?} for {key}")),
    }
}

/// `ROWSxCOLS`.
pub fn parse_dims(value: &str) -> std::result::Result<(usize, usize), String> {
    let (r, c) = value
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected ROWSxCOLS, got {value:?}"))?;
    let r: usize = r.trim().parse().map_err(|_| format!("invalid row count in {value:?}"))?;
    let c: usize = c.trim().parse().map_err(|_| format!("invalid column count in {value:?}"))?;
    if r == 0 || c == 0 {
        return Err(format!("dimensions must be positive, got {value:?}"));
    }
    Ok((r, c))
}

/// `ROW,COL`.
pub fn parse_point(value: &str) -> std::result::Result<[f64; 2], String> {
    let (r, c) = value
        .split_once(',')
        .ok_or_else(|| format!("expected ROW,COL, got {value:?}"))?;
    let p = [
        r.trim().parse().map_err(|_| format!("invalid row in {value:?}"))?,
        c.trim().parse().map_err(|_| format!("invalid column in {value:?}"))?,
    ];
    Ok(p)
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<Vec<T>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn optional<T>(value: &str, f: impl FnOnce(&str) -> std::result::Result<T, String>) -> std::result::Result<Option<T>, String> {
    match value {
        "" | "none" | "off" => Ok(None),
        v => f(v).map(Some),
    }
}

impl PipelineConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let value = value.trim();
        match key.trim() {
            "node_count" => self.node_count = parse(key, value)?,
            "fovea_radius" => self.fovea_radius = parse(key, value)?,
            "retina_radius_px" => self.retina_radius_px = parse(key, value)?,
            "crop_size" => self.crop_size = parse(key, value)?,
            "cortical_dims" => self.cortical_dims = parse_dims(value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "sigma_grid" => self.sigma_grid = parse(key, value)?,
            "k_fraction" => self.k_fraction = parse(key, value)?,
            "split_fractions" => {
                let v: Vec<f64> = parse_list(key, value)?;
                self.split_fractions = v
                    .try_into()
                    .map_err(|_| "split_fractions needs three values".to_string())?;
            }
            "seed" => self.seed = parse(key, value)?,
            "subsample_factor" => self.subsample_factor = optional(value, |v| parse(key, v))?,
            "grid_dims" => self.grid_dims = optional(value, parse_dims)?,
            "allow_padding" => self.allow_padding = parse_bool(key, value)?,
            "strict_homographies" => self.strict_homographies = parse_bool(key, value)?,
            "write_crops" => self.write_crops = parse_bool(key, value)?,
            "classes" => self.classes = parse_list(key, value)?,
            "conv_filters" => self.network.conv_filters = parse_list(key, value)?,
            "fc_widths" => self.network.fc_widths = parse_list(key, value)?,
            "kernel" => self.network.kernel = parse(key, value)?,
            "pool" => self.network.pool = parse(key, value)?,
            "num_classes" => self.network.num_classes = parse(key, value)?,
            "dropout_rate" => self.network.dropout_rate = parse(key, value)?,
            "padding" => {
                self.network.padding = match value {
                    "same" => Padding::Same,
                    "valid" => Padding::Valid,
                    _ => return Err(format!("padding must be same or valid, got {value:?}")),
                }
            }
            "batch_size" => self.batch_size = parse(key, value)?,
            "learning_rate" => self.learning_rate = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            other => return Err(format!("unknown setting {other:?}")),
        }
        Ok(())
    }

    /// Applies a `KEY=VALUE` override from the command line.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected KEY=VALUE, got {kv:?}")))?;
        self.set(k, v).map_err(CliError::Config)
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = read_text(path)?;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("{}:{}: expected `key = value`", path.display(), i + 1)))?;
            self.set(k, v)
                .map_err(|m| CliError::Config(format!("{}:{}: {m}", path.display(), i + 1)))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.node_count == 0 {
            return bad("node_count must be positive");
        }
        if !(self.fovea_radius > 0.0 && self.fovea_radius < 1.0) {
            return bad("fovea_radius must lie in (0, 1)");
        }
        if !(self.retina_radius_px > 0.0) || self.crop_size == 0 {
            return bad("retina radius and crop size must be positive");
        }
        if !(self.alpha > 0.0) || !(self.sigma_grid > 0.0) {
            return bad("alpha and sigma_grid must be positive");
        }
        if !(self.k_fraction > 0.0 && self.k_fraction <= 1.0) {
            return bad("k_fraction must lie in (0, 1]");
        }
        if self.subsample_factor == Some(0) {
            return bad("subsample_factor must be positive");
        }
        if self.classes.is_empty() {
            return bad("at least one class is required");
        }
        if self.batch_size == 0 || !(self.learning_rate > 0.0) {
            return bad("batch_size and learning_rate must be positive");
        }
        Ok(())
    }

    /// Size of the cortical image actually written by the pipeline.
    pub fn output_dims(&self) -> (usize, usize) {
        let (r, c) = self.grid_dims.unwrap_or(self.cortical_dims);
        match self.subsample_factor {
            Some(f) if f > 1 => (r / f, c / f),
            _ => (r, c),
        }
    }
}
