use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use phosphene::axon_map::cache_key;
use phosphene::encoding::apply_encoder;
use phosphene::fixation::{mask_image, save_tensor, select_fixations, PatchGrid, Tensor};
use phosphene::harness::io::{create_dir, load_gray, save_png, write_json};
use phosphene::harness::{
    cache_path, evaluate, generate_synthetic_dataset, ratio_sweep, saliency_for, with_threads, CacheStatus,
    DatasetSpec, RunConfig, Sample, Simulation,
};
use phosphene::implant::{stimulus_from_image, Stimulus};
use phosphene::percept::{raster_to_gray, render_percept, Normalization, PerceptFrame};
use phosphene::pipeline::{downsampling_pipeline_with, fixation_pipeline_with};
use phosphene::{Error, Result};

#[derive(Parser)]
#[command(
    name = "phosphene",
    version,
    about = "Simulated prosthetic vision with salient-patch fixations"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; defaults apply to every missing field
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, 0 = all cores
    #[arg(long, global = true, env = "PHOSPHENE_THREADS")]
    threads: Option<usize>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Axon map cache management
    Axonmap {
        #[command(subcommand)]
        action: AxonmapAction,
    },
    /// Select salient patches of one image and write the masked image
    Fixate(ImageArgs),
    /// Render the percept of one stimulus
    Simulate {
        /// Image resized to the electrode grid
        #[arg(long, conflicts_with = "stimulus", required_unless_present = "stimulus")]
        image: Option<PathBuf>,
        /// JSON array of electrode amplitudes in [0, 1], row-major
        #[arg(long)]
        stimulus: Option<PathBuf>,
    },
    /// Run both pipelines on one image
    Pipeline(ImageArgs),
    /// Evaluate the configured variants on a dataset
    Eval {
        /// Also run a fixation ratio sweep, e.g. 0.05,0.1,0.25,0.5,1
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<f64>,
    },
    /// Dataset utilities
    Dataset {
        #[command(subcommand)]
        action: DatasetAction,
    },
}

#[derive(Subcommand)]
enum AxonmapAction {
    /// Build (or verify) the cached maps for the configuration
    Build,
}

#[derive(Subcommand)]
enum DatasetAction {
    /// Write the synthetic shape dataset as PNG files plus labels.csv
    Gen {
        #[arg(long)]
        n_per_class: Option<usize>,
    },
}

#[derive(Args)]
struct ImageArgs {
    #[arg(long)]
    image: PathBuf,
    /// ATNF attention tensor; proxy saliency when absent
    #[arg(long)]
    attention: Option<PathBuf>,
    /// Overrides the config fixation ratio
    #[arg(long)]
    ratio: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = common.threads {
        cfg.threads = threads;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli.common)?;
    with_threads(cfg.threads, || match cli.command {
        Command::Axonmap {
            action: AxonmapAction::Build,
        } => axonmap_build(&cfg, cli.common.out.is_some()),
        Command::Fixate(args) => fixate(&cfg, &args),
        Command::Simulate { image, stimulus } => simulate(&cfg, image.as_deref(), stimulus.as_deref()),
        Command::Pipeline(args) => pipeline(&cfg, &args),
        Command::Eval { sweep } => eval(&cfg, &sweep),
        Command::Dataset {
            action: DatasetAction::Gen { n_per_class },
        } => dataset_gen(&cfg, n_per_class),
    })?
}

fn axonmap_build(cfg: &RunConfig, out_given: bool) -> Result<()> {
    let mut cfg = cfg.clone();
    if out_given {
        cfg.cache_dir = Some(cfg.output_dir.clone());
    }
    let Some(dir) = cfg.cache_dir.clone() else {
        return Err(Error::Config(
            "axonmap build needs cache_dir in the config or --out".into(),
        ));
    };
    let sim = Simulation::from_config(&cfg)?;
    for (map, status) in [(&sim.glance_map, sim.cache[0]), (&sim.render_map, sim.cache[1])] {
        let window = map.render_window().to_f64();
        let key = cache_key(map.params(), &window, map.render_dims());
        let state = match status {
            CacheStatus::Hit => "hit",
            _ => "built",
        };
        let (rows, cols) = map.render_dims();
        println!("{state} {rows}x{cols} {}", cache_path(&dir, key).display());
    }
    Ok(())
}

fn image_sample(path: &Path) -> Result<Sample> {
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let image = load_gray(path)?;
    let px = PatchGrid::default().image_px();
    if image.dims() != (px, px) {
        return Err(Error::DimensionMismatch(format!(
            "{} is {}x{}, expected {px}x{px}",
            path.display(),
            image.rows(),
            image.cols()
        )));
    }
    Ok(Sample { id, label: 0, image })
}

fn saliency(sample: &Sample, attention: Option<&Path>, patches: &PatchGrid) -> Result<phosphene::Saliency> {
    match attention {
        Some(path) => phosphene::fixation::reduce_attention(&phosphene::fixation::load_tensor(path)?, patches),
        None => saliency_for(sample, None, patches),
    }
}

fn fixate(cfg: &RunConfig, args: &ImageArgs) -> Result<()> {
    let patches = PatchGrid::default();
    let sample = image_sample(&args.image)?;
    let sal = saliency(&sample, args.attention.as_deref(), &patches)?;
    let fix = select_fixations(&sal, args.ratio.unwrap_or(cfg.ratio))?;
    let out = &cfg.output_dir;
    create_dir(out)?;
    save_png(
        &raster_to_gray(&mask_image(&sample.image, &fix, &patches)?),
        out.join("masked.png"),
    )?;
    write_json(&fix, out.join("fixations.json"))?;
    println!("{} of {} patches selected", fix.len(), patches.n_patches());
    Ok(())
}

fn write_frame(frame: &PerceptFrame<f64>, out: &Path, stem: &str) -> Result<()> {
    save_png(
        &render_percept(frame, Normalization::GlobalMax)?,
        out.join(format!("{stem}.png")),
    )?;
    let (rows, cols) = frame.dims();
    let data = frame.intensities().data().iter().map(|&v| v as f32).collect();
    save_tensor(&Tensor::new(vec![rows, cols], data)?, out.join(format!("{stem}.atnf")))
}

fn simulate(cfg: &RunConfig, image: Option<&Path>, stimulus: Option<&Path>) -> Result<()> {
    let sim = Simulation::from_config(cfg)?;
    let stim = match (image, stimulus) {
        (Some(path), _) => {
            let img = load_gray(path)?.resize_bilinear(sim.grid.rows(), sim.grid.cols());
            stimulus_from_image(&apply_encoder(&img, &cfg.encoder)?, &sim.grid)?
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            let amps: Vec<f64> = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: expected a JSON array of numbers: {e}", path.display())))?;
            let stim = Stimulus::new(amps)?;
            stim.check_grid(&sim.grid)?;
            stim
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    let frame = sim.render_model()?.evaluate(&stim)?;
    create_dir(&cfg.output_dir)?;
    write_frame(&frame, &cfg.output_dir, "percept")?;
    println!("peak intensity {:.6}", frame.raw_max());
    Ok(())
}

fn pipeline(cfg: &RunConfig, args: &ImageArgs) -> Result<()> {
    let sim = Simulation::from_config(cfg)?;
    let sample = image_sample(&args.image)?;
    let sal = saliency(&sample, args.attention.as_deref(), &sim.patches)?;
    let ratio = args.ratio.unwrap_or(cfg.ratio);
    let glance = sim.glance_model()?;
    let fix = fixation_pipeline_with(
        &glance,
        &sample.image,
        &sal,
        ratio,
        &cfg.encoder,
        &sim.grid,
        &sim.patches,
    )?;
    let down = downsampling_pipeline_with(&sim.render_model()?, &sample.image, &cfg.encoder, &sim.grid)?;
    let out = &cfg.output_dir;
    create_dir(out)?;
    write_frame(&fix.canvas, out, "fixation")?;
    write_frame(&down, out, "downsampling")?;
    write_json(&fix.fixations, out.join("fixations.json"))?;
    println!("{} fixations; outputs in {}", fix.fixations.len(), out.display());
    Ok(())
}

fn eval(cfg: &RunConfig, sweep: &[f64]) -> Result<()> {
    let report = evaluate(cfg)?;
    for v in &report.variants {
        println!("{:<24} {:>4}/{:<4} {:.4}", v.variant, v.correct, v.total, v.accuracy);
    }
    if !sweep.is_empty() {
        let points = ratio_sweep(cfg, sweep, cfg.encoder)?;
        for p in &points {
            println!("ratio {:<6} {:>4}/{:<4} {:.4}", p.ratio, p.correct, p.total, p.accuracy);
        }
        write_json(
            &json!({ "seed": cfg.seed, "points": points }),
            cfg.output_dir.join("sweep.json"),
        )?;
    }
    Ok(())
}

fn dataset_gen(cfg: &RunConfig, n_per_class: Option<usize>) -> Result<()> {
    let n = n_per_class.unwrap_or(match cfg.dataset {
        DatasetSpec::Synthetic { n_per_class } => n_per_class,
        DatasetSpec::ImageDir { .. } => 50,
    });
    let samples = generate_synthetic_dataset(n, cfg.seed)?;
    let out = &cfg.output_dir;
    create_dir(out)?;
    let mut labels = String::from("id,label\n");
    for s in &samples {
        save_png(&raster_to_gray(&s.image), out.join(format!("{}.png", s.id)))?;
        labels.push_str(&format!("{},{}\n", s.id, s.label));
    }
    let path = out.join("labels.csv");
    std::fs::write(&path, labels).map_err(|e| Error::Io { path, source: e })?;
    println!("{} images in {}", samples.len(), out.display());
    Ok(())
}
