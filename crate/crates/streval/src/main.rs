//! Thin command-line front door over the `streval` library: every
//! subcommand parses files, calls the corresponding library pipeline and
//! prints the result. Exit codes: 0 success, 2 input error, 3 internal
//! invariant violation.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use streval::dataset::{
    load_coco_annotations, load_prediction_log, remap, write_coco_annotations,
    write_prediction_log, CategoryTable, ClassMap, DatasetBundle,
};
use streval::offline::{evaluate_offline, EvalConfig};
use streval::postprocess::{fused_pipeline, GridOutput, LetterboxTransform, NmsConfig};
use streval::sim::{
    ground_truth_detector, simulate, sweep, Interpolation, JitterConfig, LatencyModel,
    SchedulePolicy,
};
use streval::streaming::{associate, evaluate_streaming};
use streval::types::{Detection, EvalResult};

#[derive(Parser)]
#[command(
    name = "streval",
    version,
    about = "Streaming-perception evaluation toolkit: offline and latency-aware AP, \
             detector post-processing, and real-time stream simulation"
)]
struct Cli {
    /// Output style: aligned table or line-delimited key=value records.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum OutputFormat {
    Table,
    Records,
}

#[derive(Clone, Copy, ValueEnum)]
enum InterpArg {
    Nearest,
    Linear,
}

#[derive(Args)]
struct EvalFlags {
    /// Comma-separated IoU matching thresholds (default 0.50..0.95).
    #[arg(long, value_delimiter = ',')]
    iou_thresholds: Option<Vec<f64>>,
    /// Recall sample points for AP integration.
    #[arg(long)]
    recall_points: Option<usize>,
    /// Per-frame cap on scored detections.
    #[arg(long)]
    max_dets: Option<usize>,
    /// Nominal FPS for synthesized capture times.
    #[arg(long, default_value_t = 30.0)]
    fps: f64,
}

impl EvalFlags {
    fn config(&self) -> EvalConfig {
        let mut c = EvalConfig::default();
        if let Some(t) = &self.iou_thresholds {
            c.iou_thresholds = t.clone();
        }
        if let Some(r) = self.recall_points {
            c.recall_points = r;
        }
        if let Some(m) = self.max_dets {
            c.max_detections_per_frame = m;
        }
        c
    }
}

#[derive(Subcommand)]
enum Command {
    /// Offline AP: score each frame against its own predictions.
    EvalOffline {
        /// Annotation file (COCO schema subset).
        #[arg(long)]
        annotations: PathBuf,
        /// Prediction log; each frame may appear at most once.
        #[arg(long)]
        predictions: PathBuf,
        #[command(flatten)]
        eval: EvalFlags,
    },
    /// Streaming AP: pair frames with the freshest prediction available
    /// at capture time, then score.
    EvalStreaming {
        #[arg(long)]
        annotations: PathBuf,
        /// Timestamped prediction log.
        #[arg(long)]
        log: PathBuf,
        #[command(flatten)]
        eval: EvalFlags,
    },
    /// Simulate a real-time detector over the annotated stream and score
    /// the emitted predictions.
    Simulate {
        #[arg(long)]
        annotations: PathBuf,
        /// Latency table: `width height latency_us` lines.
        #[arg(long)]
        latency_table: PathBuf,
        /// Detector input resolution, WxH.
        #[arg(long, value_parser = parse_resolution)]
        resolution: Option<(u32, u32)>,
        /// Sweep these WxH resolutions instead of one run.
        #[arg(long, value_delimiter = ',', value_parser = parse_resolution)]
        sweep: Option<Vec<(u32, u32)>>,
        /// blocking-latest or fixed-stride:K.
        #[arg(long, default_value = "blocking-latest", value_parser = parse_policy)]
        policy: SchedulePolicy,
        /// Use the built-in oracle detector (emits ground truth verbatim).
        #[arg(long)]
        oracle: bool,
        #[arg(long, value_enum, default_value_t = InterpArg::Nearest)]
        interpolation: InterpArg,
        /// Lognormal jitter sigma; omit for deterministic latency.
        #[arg(long)]
        jitter_sigma: Option<f64>,
        #[arg(long, default_value_t = 0)]
        jitter_seed: u64,
        /// Write the emitted prediction events to this log.
        #[arg(long)]
        emit_log: Option<PathBuf>,
        #[command(flatten)]
        eval: EvalFlags,
    },
    /// Decode raw head grid dumps, suppress, and map to image space.
    Decode {
        /// Grid dump files; together they must cover strides 8,16,32,64.
        #[arg(long = "grid", required = true)]
        grids: Vec<PathBuf>,
        /// Original image size, WxH.
        #[arg(long, value_parser = parse_resolution)]
        image_size: (u32, u32),
        /// Network input size, WxH.
        #[arg(long, value_parser = parse_resolution)]
        network_size: (u32, u32),
        #[arg(long, default_value_t = 0.65)]
        nms_iou: f64,
        #[arg(long, default_value_t = 0.01)]
        score_threshold: f64,
        /// Class-agnostic suppression instead of class-aware.
        #[arg(long)]
        class_agnostic: bool,
        /// Also write the detection lines to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-label annotations onto a target category table.
    Remap {
        #[arg(long)]
        annotations: PathBuf,
        /// Rule file: `source_dataset<TAB>source_class<TAB>target` lines.
        #[arg(long)]
        classmap: PathBuf,
        /// Target table: one category name per line.
        #[arg(long)]
        target_table: PathBuf,
        /// Which dataset's rules to apply.
        #[arg(long)]
        source_dataset: String,
        /// Remapped annotation file to write.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 30.0)]
        fps: f64,
    },
}

enum CliError {
    Input(String),
    Internal(String),
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Input(e.to_string())
    }
}

fn parse_resolution(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w = w.trim().parse().map_err(|_| format!("bad width {w:?}"))?;
    let h = h.trim().parse().map_err(|_| format!("bad height {h:?}"))?;
    if w == 0 || h == 0 {
        return Err("resolution must be positive".into());
    }
    Ok((w, h))
}

fn parse_policy(s: &str) -> Result<SchedulePolicy, String> {
    if s == "blocking-latest" {
        return Ok(SchedulePolicy::BlockingLatest);
    }
    if let Some(k) = s.strip_prefix("fixed-stride:") {
        let k: usize = k.parse().map_err(|_| format!("bad stride {k:?}"))?;
        if k == 0 {
            return Err("stride must be at least 1".into());
        }
        return Ok(SchedulePolicy::FixedStride(k));
    }
    Err(format!(
        "unknown policy {s:?}; expected blocking-latest or fixed-stride:K"
    ))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}

/// AP values print at three decimals; full precision stays internal.
fn eval_block(
    result: &EvalResult,
    table: &CategoryTable,
    format: OutputFormat,
) -> Result<String, CliError> {
    result
        .validate()
        .map_err(|e| CliError::Internal(format!("evaluation result violates its invariant: {e}")))?;
    let mut out = String::new();
    let fields = [
        ("ap", result.ap),
        ("ap50", result.ap50),
        ("ap75", result.ap75),
        ("ap_small", result.ap_small),
        ("ap_medium", result.ap_medium),
        ("ap_large", result.ap_large),
    ];
    match format {
        OutputFormat::Records => {
            for (name, v) in fields {
                writeln!(out, "{name}={v:.3}").unwrap();
            }
            for (cat, v) in &result.per_category_ap {
                let name = table.name_of(*cat).unwrap_or("?");
                writeln!(out, "ap_category.{name}={v:.3}").unwrap();
            }
        }
        OutputFormat::Table => {
            for (name, v) in fields {
                writeln!(out, "{:<12} {v:>8.3}", name.to_uppercase()).unwrap();
            }
            for (cat, v) in &result.per_category_ap {
                let name = table.name_of(*cat).unwrap_or("?");
                writeln!(out, "AP[{name}]{:<pad$} {v:>8.3}", "", pad = 12usize.saturating_sub(4 + name.len())).unwrap();
            }
        }
    }
    Ok(out)
}

fn load_bundle(path: &Path, fps: f64) -> Result<(Vec<streval::FrameRecord>, DatasetBundle), CliError> {
    let bundle = load_coco_annotations(path, fps)?;
    Ok((bundle.flatten(), bundle))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let format = cli.format;
    match cli.command {
        Command::EvalOffline {
            annotations,
            predictions,
            eval,
        } => {
            let (frames, bundle) = load_bundle(&annotations, eval.fps)?;
            let events = load_prediction_log(&predictions)?;
            let mut map: HashMap<i64, Vec<Detection>> = HashMap::new();
            for e in events {
                if map.insert(e.source_frame_id, e.detections).is_some() {
                    return Err(CliError::Input(format!(
                        "offline predictions list frame {} more than once",
                        e.source_frame_id
                    )));
                }
            }
            let result = evaluate_offline(&frames, &map, &eval.config())?;
            print!("{}", eval_block(&result, &bundle.category_table, format)?);
            Ok(())
        }
        Command::EvalStreaming {
            annotations,
            log,
            eval,
        } => {
            let (frames, bundle) = load_bundle(&annotations, eval.fps)?;
            let events = load_prediction_log(&log)?;
            let config = eval.config();
            let assoc = associate(&frames, &events)?;
            let result = evaluate_streaming(&frames, &events, &config)?;
            let mut out = eval_block(&result, &bundle.category_table, format)?;
            let mean = assoc.mean_staleness_us().unwrap_or(0.0).round() as i64;
            let max = assoc.max_staleness_us().unwrap_or(0);
            match format {
                OutputFormat::Records => {
                    writeln!(out, "paired_frames={}", assoc.paired_count()).unwrap();
                    writeln!(out, "staleness_mean_us={mean}").unwrap();
                    writeln!(out, "staleness_max_us={max}").unwrap();
                }
                OutputFormat::Table => {
                    writeln!(out, "{:<18} {:>8}", "paired_frames", assoc.paired_count()).unwrap();
                    writeln!(out, "{:<18} {mean:>8}", "staleness_mean_us").unwrap();
                    writeln!(out, "{:<18} {max:>8}", "staleness_max_us").unwrap();
                }
            }
            print!("{out}");
            Ok(())
        }
        Command::Simulate {
            annotations,
            latency_table,
            resolution,
            sweep: sweep_arg,
            policy,
            oracle,
            interpolation,
            jitter_sigma,
            jitter_seed,
            emit_log,
            eval,
        } => {
            if !oracle {
                return Err(CliError::Input(
                    "no detector available: pass --oracle to use the built-in \
                     ground-truth detector"
                        .into(),
                ));
            }
            let (frames, bundle) = load_bundle(&annotations, eval.fps)?;
            let interpolation = match interpolation {
                InterpArg::Nearest => Interpolation::Nearest,
                InterpArg::Linear => Interpolation::LinearPixelCount,
            };
            let jitter = jitter_sigma.map(|sigma| JitterConfig {
                sigma,
                seed: jitter_seed,
            });
            let model = LatencyModel::load(&latency_table, interpolation, jitter)?;
            let config = eval.config();

            if let Some(resolutions) = sweep_arg {
                let points = sweep(
                    &frames,
                    ground_truth_detector,
                    &model,
                    policy,
                    &resolutions,
                    &config,
                )?;
                let mut out = String::new();
                if format == OutputFormat::Table {
                    writeln!(
                        out,
                        "{:<12} {:>12} {:>14} {:>10}",
                        "resolution", "latency_us", "streaming_ap", "drop_rate"
                    )
                    .unwrap();
                }
                for p in &points {
                    p.eval.validate().map_err(|e| {
                        CliError::Internal(format!("sweep point violates invariants: {e}"))
                    })?;
                    match format {
                        OutputFormat::Records => writeln!(
                            out,
                            "resolution={}x{} latency_us={} streaming_ap={:.3} drop_rate={:.3}",
                            p.width, p.height, p.latency_us, p.eval.ap, p.drop_rate
                        )
                        .unwrap(),
                        OutputFormat::Table => writeln!(
                            out,
                            "{:<12} {:>12} {:>14.3} {:>10.3}",
                            format!("{}x{}", p.width, p.height),
                            p.latency_us,
                            p.eval.ap,
                            p.drop_rate
                        )
                        .unwrap(),
                    }
                }
                print!("{out}");
                return Ok(());
            }

            let resolution = resolution.ok_or_else(|| {
                CliError::Input("pass --resolution WxH (or --sweep) to size the detector".into())
            })?;
            let trace = simulate(&frames, ground_truth_detector, &model, policy, resolution)?;
            if let Some(path) = emit_log {
                write_prediction_log(&path, &trace.events)?;
            }
            let result = evaluate_streaming(&frames, &trace.events, &config)?;
            let latency = model.latency_for(resolution.0, resolution.1)?;
            let mut out = String::new();
            match format {
                OutputFormat::Records => {
                    writeln!(out, "latency_us={latency}").unwrap();
                    writeln!(out, "processed={}", trace.processed_frames.len()).unwrap();
                    writeln!(out, "dropped={}", trace.dropped_frames.len()).unwrap();
                    writeln!(out, "drop_rate={:.3}", trace.drop_rate()).unwrap();
                }
                OutputFormat::Table => {
                    writeln!(out, "{:<12} {latency:>8}", "latency_us").unwrap();
                    writeln!(out, "{:<12} {:>8}", "processed", trace.processed_frames.len()).unwrap();
                    writeln!(out, "{:<12} {:>8}", "dropped", trace.dropped_frames.len()).unwrap();
                    writeln!(out, "{:<12} {:>8.3}", "drop_rate", trace.drop_rate()).unwrap();
                }
            }
            out.push_str(&eval_block(&result, &bundle.category_table, format)?);
            print!("{out}");
            Ok(())
        }
        Command::Decode {
            grids,
            image_size,
            network_size,
            nms_iou,
            score_threshold,
            class_agnostic,
            out,
        } => {
            let grids: Vec<GridOutput> = grids
                .iter()
                .map(|p| GridOutput::load(p))
                .collect::<Result<_, _>>()?;
            let lt = LetterboxTransform::new(image_size, network_size)?;
            let cfg = NmsConfig {
                iou_threshold: nms_iou,
                score_threshold,
                class_aware: !class_agnostic,
            };
            let dets = fused_pipeline(&grids, &lt, &cfg)?;
            let mut text = String::new();
            for d in &dets {
                let b = d.bbox();
                writeln!(
                    text,
                    "{} {} {} {} {} {}",
                    d.category().0,
                    d.score(),
                    b.x_min(),
                    b.y_min(),
                    b.x_max(),
                    b.y_max()
                )
                .unwrap();
            }
            if let Some(path) = out {
                std::fs::write(&path, &text)
                    .map_err(|e| CliError::Input(format!("writing {}: {e}", path.display())))?;
            }
            print!("{text}");
            Ok(())
        }
        Command::Remap {
            annotations,
            classmap,
            target_table,
            source_dataset,
            out,
            fps,
        } => {
            let bundle = load_coco_annotations(&annotations, fps)?;
            let map = ClassMap::load(&classmap)?;
            let target = CategoryTable::load(&target_table)?;
            let (remapped, report) = remap(&bundle, &map, &source_dataset, &target)?;
            write_coco_annotations(&out, &remapped)?;
            let mut text = String::new();
            for rc in &report.counts {
                match format {
                    OutputFormat::Records => writeln!(
                        text,
                        "rule source_class={} target={} count={}",
                        rc.rule.source_class, rc.rule.target, rc.count
                    )
                    .unwrap(),
                    OutputFormat::Table => writeln!(
                        text,
                        "{:<24} -> {:<16} {:>8}",
                        rc.rule.source_class,
                        rc.rule.target.to_string(),
                        rc.count
                    )
                    .unwrap(),
                }
            }
            match format {
                OutputFormat::Records => {
                    writeln!(text, "objects_out={}", remapped.object_count()).unwrap()
                }
                OutputFormat::Table => {
                    writeln!(text, "{:<24}    {:<16} {:>8}", "objects written", "", remapped.object_count()).unwrap()
                }
            }
            print!("{text}");
            Ok(())
        }
    }
}
