use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rcfuse::batch::{build_pool, list_json, run_batch};
use rcfuse::eval::{evaluate_dirs, report_json, report_table};
use rcfuse::pipeline::PipelineConfig;
use rcfuse::render::{render_bev, RenderConfig};
use rcfuse::schema::{load_detections, load_scene, save_scene};
use rcfuse::synth::{generate_scene, SynthConfig};
use rcfuse::{Error, Result};
use rcfuse_core::features::RadarFeatureParams;
use rcfuse_core::frustum::{FrustumMode, Membership};
use rcfuse_core::metrics::EvalConfig;
use rcfuse_core::radar::PillarDims;
use rayon::prelude::*;

const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "rcfuse", version, about = "Radar-camera fusion geometry toolkit")]
struct Cli {
    /// Worker threads for batch commands.
    #[arg(long, global = true, default_value_t = default_threads())]
    threads: usize,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "info")]
    log_level: log::LevelFilter,
    #[command(subcommand)]
    command: Command,
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Train,
    Test,
}

#[derive(Clone, Copy, ValueEnum)]
enum MembershipArg {
    Anchor,
    Pillar,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic scenes.
    Synth {
        /// TOML configuration; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Inclusive seed range such as `0..99`.
        #[arg(long, value_parser = parse_seeds)]
        seeds: RangeInclusive<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the fusion pipeline over a directory of scenes.
    Run {
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        delta: f64,
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        /// Pillar size `dx,dy,dz` in meters.
        #[arg(long, default_value = "0.2,0.2,1.5", value_parser = parse_pillar)]
        pillar: [f64; 3],
        #[arg(long, value_enum, default_value = "test")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "pillar")]
        membership: MembershipArg,
        /// Gate on the 2D box only.
        #[arg(long)]
        no_radial_gate: bool,
        /// Decode from the primary outputs only.
        #[arg(long)]
        no_fusion: bool,
        /// Also write `<scene>.planes.bin` feature planes.
        #[arg(long)]
        export_planes: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate detections against scene ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a bird's-eye view of a scene and its detections.
    Render {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        pred: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_seeds(s: &str) -> std::result::Result<RangeInclusive<u64>, String> {
    let (a, b) = s.split_once("..").ok_or("expected A..B")?;
    let a: u64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: u64 = b.trim_start_matches('=').trim().parse().map_err(|e| format!("{e}"))?;
    if a > b {
        return Err("empty seed range".into());
    }
    Ok(a..=b)
}

fn parse_pillar(s: &str) -> std::result::Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{e}")))
        .collect::<std::result::Result<_, _>>()?;
    <[f64; 3]>::try_from(v).map_err(|_| "expected three comma-separated values".to_string())
}

fn synth(config: Option<PathBuf>, seeds: RangeInclusive<u64>, out: PathBuf, threads: usize) -> Result<()> {
    let cfg = match config {
        Some(p) => SynthConfig::load(&p)?,
        None => SynthConfig::default(),
    };
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let seeds: Vec<u64> = seeds.collect();
    let results: Vec<Result<()>> = build_pool(threads)?.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let scene = generate_scene(&cfg, seed)?;
                save_scene(&scene, &out.join(format!("{}.json", scene.scene_id)))
            })
            .collect()
    });
    results.into_iter().collect::<Result<Vec<_>>>()?;
    log::info!("wrote {} scenes to {}", seeds.len(), out.display());
    Ok(())
}

fn run(cmd: Command, threads: usize) -> Result<()> {
    match cmd {
        Command::Synth { config, seeds, out } => synth(config, seeds, out, threads),
        Command::Run {
            scenes,
            delta,
            alpha,
            pillar,
            mode,
            membership,
            no_radial_gate,
            no_fusion,
            export_planes,
            out,
        } => {
            let mut cfg = PipelineConfig::default();
            cfg.association.delta = delta;
            cfg.association.mode = match mode {
                Mode::Train => FrustumMode::Train,
                Mode::Test => FrustumMode::Test,
            };
            cfg.association.membership = match membership {
                MembershipArg::Anchor => Membership::Anchor,
                MembershipArg::Pillar => Membership::Pillar,
            };
            cfg.association.radial_gate = !no_radial_gate;
            cfg.radar_features = RadarFeatureParams {
                alpha,
                ..RadarFeatureParams::default()
            };
            cfg.pillar = PillarDims::new(pillar[0], pillar[1], pillar[2]).map_err(|e| Error::Config(e.to_string()))?;
            cfg.fusion = !no_fusion;
            if !(delta >= 0.0 && alpha > 0.0) {
                return Err(Error::Config("delta must be non-negative and alpha positive".into()));
            }
            let inputs = list_json(&scenes)?;
            let summaries = run_batch(&inputs, &out, &cfg, threads, export_planes)?;
            let total: usize = summaries.iter().map(|s| s.diagnostics.total_objects).sum();
            let matched: usize = summaries.iter().map(|s| s.diagnostics.matched).sum();
            log::info!(
                "{} scenes, {} objects, {} associated ({:.1}%)",
                summaries.len(),
                total,
                matched,
                if total > 0 { 100.0 * matched as f64 / total as f64 } else { 0.0 }
            );
            Ok(())
        }
        Command::Eval { pred, gt, out } => {
            let report = evaluate_dirs(&pred, &gt, &EvalConfig::default())?;
            std::fs::write(&out, report_json(&report)).map_err(|e| Error::io(&out, e))?;
            print!("{}", report_table(&report));
            Ok(())
        }
        Command::Render { scene, pred, out } => {
            let scene = load_scene(&scene)?;
            let dets = match pred {
                Some(p) => load_detections(&p)?.boxes()?,
                None => Vec::new(),
            };
            render_bev(&scene, &dets, &out, &RenderConfig::default())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    env_logger::Builder::new().filter_level(cli.log_level).init();
    if cli.threads == 0 {
        log::error!("--threads must be at least 1");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli.command, cli.threads) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.category() as u8)
        }
    }
}
