use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use foveate_cli::bench::bench_reduction;
use foveate_cli::config::{parse_dims, parse_point, PipelineConfig};
use foveate_cli::error::{CliError, Result};
use foveate_cli::formats::{
    parse_fixation_log, parse_homographies, read_checkpoint, read_cortical_weights, read_image_vector,
    read_labeled_items, read_manifest, read_tessellation, write_bytes, write_checkpoint, write_cortical_weights,
    write_image_vector, write_manifest, write_tessellation,
};
use foveate_cli::pipeline::{crop_center, run_pipeline, PipelineInputs};
use foveate_cli::png::{read_png, write_png};
use foveate_cli::train::{format_evaluation, load_split, train_model};
use foveate_cli::viz::{render_backprojection, render_cortical, render_tessellation};
use foveate_core::cortex::{grid_cortical_image, splat_cortical_image, subsample_cortical, CorticalImage, CorticalMap};
use foveate_core::dcnn::evaluate;
use foveate_core::gaze::{
    cluster_fixations, composite_fixations, extract_crop, split_dataset, CompositeMode, CropRect, LabeledItem, Split,
};
use foveate_core::retina::{compute_receptive_fields, sample, ReceptiveFields, Tessellation};
use foveate_core::Image;

#[derive(Parser)]
#[command(name = "foveate", version, about = "Foveated sampling, cortical mapping and fixation datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory that relative output paths are written under.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Override one configuration key; wins over the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Panel {
    Tessellation,
    Backprojection,
    Cortical,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a retina tessellation.
    Tessellate {
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        fovea_radius: Option<f64>,
        #[arg(short, long, default_value = "retina.txt")]
        output: PathBuf,
    },
    /// Summarize the receptive fields for an image geometry.
    Fields {
        #[arg(long)]
        tessellation: Option<PathBuf>,
        /// ROWSxCOLS; defaults to the crop size.
        #[arg(long, value_parser = parse_dims)]
        dims: Option<(usize, usize)>,
        #[arg(long, value_parser = parse_point)]
        fixation: Option<[f64; 2]>,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Sample an image into an imagevector.
    Sample {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        tessellation: Option<PathBuf>,
        #[arg(long, value_parser = parse_point)]
        fixation: Option<[f64; 2]>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(short, long, default_value = "sample.iv")]
        output: PathBuf,
    },
    /// Render an imagevector back onto pixels.
    Backproject {
        #[arg(long)]
        vector: PathBuf,
        #[arg(long)]
        tessellation: Option<PathBuf>,
        #[arg(long, value_parser = parse_dims)]
        dims: Option<(usize, usize)>,
        #[arg(long, value_parser = parse_point)]
        fixation: Option<[f64; 2]>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(short, long, default_value = "backprojection.png")]
        output: PathBuf,
    },
    /// Splat an imagevector onto the cortical grid.
    Cortical {
        #[arg(long)]
        vector: PathBuf,
        #[arg(long)]
        tessellation: Option<PathBuf>,
        #[arg(long, value_parser = parse_dims)]
        dims: Option<(usize, usize)>,
        #[arg(short, long, default_value = "cortical.png")]
        output: PathBuf,
        /// Also write the coverage weights.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Mean-pool a cortical image.
    Subsample {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        factor: Option<usize>,
        #[arg(short, long, default_value = "subsampled.png")]
        output: PathBuf,
    },
    /// Grid an imagevector onto a cortical grid of any size.
    Grid {
        #[arg(long)]
        vector: PathBuf,
        #[arg(long)]
        tessellation: Option<PathBuf>,
        #[arg(long, value_parser = parse_dims)]
        dims: Option<(usize, usize)>,
        #[arg(short, long, default_value = "gridded.png")]
        output: PathBuf,
    },
    /// Cluster the fixations of one class.
    Cluster {
        #[arg(long = "log", required = true)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        homographies: Option<PathBuf>,
        #[arg(long)]
        class: Option<String>,
    },
    /// Cut a square crop centered on a point.
    Crop {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, value_parser = parse_point)]
        center: [f64; 2],
        #[arg(long)]
        size: Option<usize>,
        /// Edge-replicate pixels outside the image.
        #[arg(long)]
        pad: bool,
        #[arg(short, long, default_value = "crop.png")]
        output: PathBuf,
    },
    /// Split `path,class_label` items into train/val/test.
    Split {
        #[arg(long)]
        items: PathBuf,
        #[arg(short, long, default_value = "manifest.csv")]
        output: PathBuf,
    },
    /// Train the classifier on a manifest's training split.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "model.fnet")]
        model: PathBuf,
        #[arg(long, default_value = "training_log.csv")]
        log: PathBuf,
    },
    /// Evaluate a checkpoint on one split of a manifest.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "test")]
        split: String,
    },
    /// Fixation logs and frames to cortical images and a manifest.
    Pipeline {
        #[arg(long = "log", required = true)]
        logs: Vec<PathBuf>,
        /// Directory the logs' image paths are relative to.
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        homographies: Option<PathBuf>,
    },
    /// Print the data-reduction ratios of the configured geometry.
    Bench,
    /// Render a panel as PNG.
    Viz {
        #[arg(value_enum)]
        what: Panel,
        #[arg(long)]
        tessellation: Option<PathBuf>,
        /// Input crop for backprojection and cortical panels.
        #[arg(long)]
        image: Option<PathBuf>,
        /// Canvas side for the tessellation panel.
        #[arg(long, default_value_t = 926)]
        size: usize,
        #[arg(short, long, default_value = "viz.png")]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &cli.config {
        cfg.merge_file(path)?;
    }
    for kv in &cli.overrides {
        cfg.apply_override(kv)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

struct Ctx {
    cfg: PipelineConfig,
    out_dir: PathBuf,
}

impl Ctx {
    fn out(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.out_dir.join(p)
        }
    }

    fn tessellation(&self, path: Option<&Path>) -> Result<Tessellation> {
        match path {
            Some(p) => read_tessellation(p),
            None => Ok(Tessellation::generate(self.cfg.node_count, self.cfg.fovea_radius)?),
        }
    }

    fn fields(
        &self,
        tess: &Tessellation,
        dims: (usize, usize),
        fixation: Option<[f64; 2]>,
        radius: Option<f64>,
    ) -> Result<ReceptiveFields> {
        let fixation = fixation.unwrap_or([crop_center(dims.0), crop_center(dims.1)]);
        Ok(compute_receptive_fields(
            tess,
            radius.unwrap_or(self.cfg.retina_radius_px),
            dims,
            fixation,
        )?)
    }

    fn crop_dims(&self) -> (usize, usize) {
        (self.cfg.crop_size, self.cfg.crop_size)
    }
}

fn check_nodes(tess: &Tessellation, nodes: usize) -> Result<()> {
    if tess.node_count() != nodes {
        return Err(CliError::Validation(format!(
            "imagevector has {nodes} nodes but the tessellation has {}",
            tess.node_count()
        )));
    }
    Ok(())
}

fn write_cortical(ctx: &Ctx, output: &Path, img: &CorticalImage, weights: Option<&Path>) -> Result<()> {
    write_png(&ctx.out(output), &img.pixels)?;
    if let Some(w) = weights {
        write_cortical_weights(&ctx.out(w), img)?;
    }
    println!("{} ({}x{}, {} covered cells)", ctx.out(output).display(), img.dims().0, img.dims().1, img.covered_cells());
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = load_config(&cli)?;
    let ctx = Ctx {
        cfg,
        out_dir: cli.out_dir.clone(),
    };
    let cfg = &ctx.cfg;
    match &cli.command {
        Command::Tessellate {
            nodes,
            fovea_radius,
            output,
        } => {
            let tess = Tessellation::generate(nodes.unwrap_or(cfg.node_count), fovea_radius.unwrap_or(cfg.fovea_radius))?;
            write_tessellation(&ctx.out(output), &tess)?;
            println!("{} nodes -> {}", tess.node_count(), ctx.out(output).display());
        }
        Command::Fields {
            tessellation,
            dims,
            fixation,
            radius,
        } => {
            let tess = ctx.tessellation(tessellation.as_deref())?;
            let fields = ctx.fields(&tess, dims.unwrap_or(ctx.crop_dims()), *fixation, *radius)?;
            let taps: usize = fields.fields.iter().map(|f| f.support.len()).sum();
            let max_sigma = fields.fields.iter().map(|f| f.sigma_px).fold(0.0, f64::max);
            println!("nodes {}", fields.len());
            println!("empty {}", fields.empty_count());
            println!("taps {taps}");
            println!("max_sigma_px {max_sigma:.4}");
        }
        Command::Sample {
            image,
            tessellation,
            fixation,
            radius,
            output,
        } => {
            let img = read_png(image)?;
            let tess = ctx.tessellation(tessellation.as_deref())?;
            let fields = ctx.fields(&tess, img.dims(), *fixation, *radius)?;
            let iv = sample(&img, &fields)?;
            write_image_vector(&ctx.out(output), &iv)?;
            println!("{} nodes x {} channels -> {}", iv.node_count(), iv.channels(), ctx.out(output).display());
        }
        Command::Backproject {
            vector,
            tessellation,
            dims,
            fixation,
            radius,
            output,
        } => {
            let iv = read_image_vector(vector)?;
            let tess = ctx.tessellation(tessellation.as_deref())?;
            check_nodes(&tess, iv.node_count())?;
            let fields = ctx.fields(&tess, dims.unwrap_or(ctx.crop_dims()), *fixation, *radius)?;
            write_png(&ctx.out(output), &render_backprojection(&iv, &fields)?)?;
        }
        Command::Cortical {
            vector,
            tessellation,
            dims,
            output,
            weights,
        } => {
            let iv = read_image_vector(vector)?;
            let tess = ctx.tessellation(tessellation.as_deref())?;
            check_nodes(&tess, iv.node_count())?;
            let map = CorticalMap::new(&tess, cfg.alpha, dims.unwrap_or(cfg.cortical_dims))?;
            let img = splat_cortical_image(&iv, &map, cfg.sigma_grid)?;
            write_cortical(&ctx, output, &img, weights.as_deref())?;
        }
        Command::Subsample {
            input,
            weights,
            factor,
            output,
        } => {
            let pixels = read_png(input)?;
            let w = read_cortical_weights(weights)?;
            if w.len() != pixels.rows() * pixels.cols() {
                return Err(CliError::Validation(format!(
                    "{} weights for a {}x{} image",
                    w.len(),
                    pixels.rows(),
                    pixels.cols()
                )));
            }
            let img = CorticalImage { pixels, weights: w };
            let out = subsample_cortical(&img, factor.or(cfg.subsample_factor).unwrap_or(2))?;
            write_cortical(&ctx, output, &out, None)?;
        }
        Command::Grid {
            vector,
            tessellation,
            dims,
            output,
        } => {
            let iv = read_image_vector(vector)?;
            let tess = ctx.tessellation(tessellation.as_deref())?;
            check_nodes(&tess, iv.node_count())?;
            let map = CorticalMap::new(&tess, cfg.alpha, cfg.cortical_dims)?;
            let target = dims.or(cfg.grid_dims).unwrap_or(cfg.cortical_dims);
            let img = grid_cortical_image(&iv, &map, cfg.sigma_grid, target)?;
            write_cortical(&ctx, output, &img, None)?;
        }
        Command::Cluster {
            logs,
            homographies,
            class,
        } => {
            let mut records = Vec::new();
            for log in logs {
                records.extend(parse_fixation_log(log, Some(&cfg.classes))?);
            }
            if let Some(c) = class {
                records.retain(|r| r.class_label == *c);
            }
            let hs = match homographies {
                Some(p) => parse_homographies(p)?,
                None => Default::default(),
            };
            let mode = if cfg.strict_homographies {
                CompositeMode::Strict
            } else {
                CompositeMode::HeadStabilized
            };
            let points = composite_fixations(&records, &hs, mode)?;
            let clusters = cluster_fixations(&points, cfg.k_fraction, cfg.seed)?;
            println!("cluster,members,centroid_row,centroid_col,hull_vertices");
            for (i, c) in clusters.iter().enumerate() {
                println!(
                    "{i},{},{:.3},{:.3},{}",
                    c.member_indices.len(),
                    c.centroid_px[0],
                    c.centroid_px[1],
                    c.hull_px.len()
                );
            }
        }
        Command::Crop {
            image,
            center,
            size,
            pad,
            output,
        } => {
            let img = read_png(image)?;
            let size = size.unwrap_or(cfg.crop_size);
            let half = (size / 2) as i64;
            let rect = CropRect {
                row0: center[0].round() as i64 - half,
                col0: center[1].round() as i64 - half,
                rows: size,
                cols: size,
            };
            let crop = extract_crop(&img, &rect, *pad || cfg.allow_padding)?;
            write_png(&ctx.out(output), &crop)?;
        }
        Command::Split { items, output } => {
            let items: Vec<LabeledItem> = read_labeled_items(items)?
                .into_iter()
                .map(|(p, l)| LabeledItem::new(p, l))
                .collect();
            let manifest = split_dataset(&items, cfg.split_fractions, cfg.seed)?;
            write_manifest(&ctx.out(output), &manifest)?;
            for class in &manifest.classes {
                let counts: Vec<String> = Split::ALL
                    .iter()
                    .map(|&s| format!("{s} {}", manifest.count(class, s)))
                    .collect();
                println!("{class}: {}", counts.join(", "));
            }
        }
        Command::Train { manifest, model, log } => {
            let entries = read_manifest(manifest)?;
            let base = manifest.parent().unwrap_or(Path::new("."));
            let train = load_split(base, &entries, Split::Train, &cfg.classes)?
                .ok_or_else(|| CliError::Validation("the manifest has no training entries".into()))?;
            let val = load_split(base, &entries, Split::Val, &cfg.classes)?;
            let outcome = train_model(cfg, &train, val.as_ref(), |r| {
                match &r.validation {
                    Some(v) => println!(
                        "epoch {} loss {:.4} train_acc {:.4} val_acc {:.4}",
                        r.train.epoch, r.train.loss, r.train.accuracy, v.accuracy
                    ),
                    None => println!("epoch {} loss {:.4} train_acc {:.4}", r.train.epoch, r.train.loss, r.train.accuracy),
                }
                false
            })?;
            write_checkpoint(&ctx.out(model), &outcome.network)?;
            write_bytes(&ctx.out(log), outcome.log.as_bytes())?;
        }
        Command::Eval { manifest, model, split } => {
            let split: Split = split.parse().map_err(|e: foveate_core::Error| CliError::Config(e.to_string()))?;
            let entries = read_manifest(manifest)?;
            let base = manifest.parent().unwrap_or(Path::new("."));
            let data = load_split(base, &entries, split, &cfg.classes)?
                .ok_or_else(|| CliError::Validation(format!("the manifest has no {split} entries")))?;
            let net = read_checkpoint(model)?;
            let e = evaluate(&net, &data, cfg.batch_size)?;
            print!("{}", format_evaluation(&e, &cfg.classes));
        }
        Command::Pipeline {
            logs,
            images,
            homographies,
        } => {
            let report = run_pipeline(
                cfg,
                &PipelineInputs {
                    fixation_logs: logs,
                    homographies: homographies.as_deref(),
                    image_dir: images,
                    out_dir: &ctx.out_dir,
                },
            )?;
            for (class, k) in &report.cluster_counts {
                println!("{class}: {k} clusters");
            }
            println!("{} manifest entries", report.manifest.entries.len());
            for f in &report.failures {
                eprintln!("error: {f}");
            }
            if !report.succeeded() {
                return Ok(1);
            }
        }
        Command::Bench => println!("{}", bench_reduction(cfg)?),
        Command::Viz {
            what,
            tessellation,
            image,
            size,
            output,
        } => {
            let tess = ctx.tessellation(tessellation.as_deref())?;
            let rendered: Image = match what {
                Panel::Tessellation => render_tessellation(&tess, *size),
                Panel::Backprojection | Panel::Cortical => {
                    let path = image
                        .as_ref()
                        .ok_or_else(|| CliError::Config("--image is required for this panel".into()))?;
                    let img = read_png(path)?;
                    let fields = ctx.fields(&tess, img.dims(), None, None)?;
                    let iv = sample(&img, &fields)?;
                    match what {
                        Panel::Backprojection => render_backprojection(&iv, &fields)?,
                        _ => render_cortical(&iv, &CorticalMap::new(&tess, cfg.alpha, cfg.cortical_dims)?, cfg.sigma_grid)?,
                    }
                }
            };
            write_png(&ctx.out(output), &rendered)?;
        }
    }
    Ok(0)
}
