use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use headalign_core::aligners::{align_window, AlignConfig};
use headalign_core::sim::{
    default_bank, read_recording, simulate, write_recording, Recording, ScenarioConfig, SensorSpec,
};
use neuralkit::checkpoint;
use neuralkit::windows::window_starts;
use neuralkit::{build_headingnet, make_windows, train, Model, Segment, TrainConfig, WindowMode};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::eval::{evaluate, EvalRequest, Method};
use crate::report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SensorPreset {
    /// Datasheet-grade noise and biases.
    Table3,
    NoiseFree,
}

#[derive(Debug, Parser)]
#[command(name = "headalign", version, about = "Heading alignment for moored vessels: simulate, align, train, evaluate")]
pub struct Cli {
    /// Seed for simulation, training and shuffling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Format of results printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate recordings from a scenario file or the built-in S1–S5 bank.
    Simulate {
        /// JSON scenario object or array; the built-in bank when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = SensorPreset::Table3)]
        sensors: SensorPreset,
        /// JSON sensor specification, overriding --sensors.
        #[arg(long)]
        sensor_config: Option<PathBuf>,
    },
    /// Run classical aligners over non-overlapping windows of one recording.
    Align {
        /// Recording stem, e.g. `data/S1`.
        #[arg(long)]
        recording: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "I-DVA,A-DVA,I-OBA,A-OBA")]
        methods: Vec<String>,
        #[arg(long)]
        t_align: u32,
        #[arg(long, default_value_t = 0.0)]
        start: f64,
        #[arg(long)]
        end: Option<f64>,
    },
    /// Train one HeadingNet variation.
    Train {
        #[arg(long)]
        variation: u32,
        #[arg(long)]
        data_dir: PathBuf,
        /// Recording names to train on (all in the directory by default).
        #[arg(long, value_delimiter = ',')]
        recordings: Vec<String>,
        #[arg(long, default_value_t = 0.0)]
        start: f64,
        #[arg(long)]
        end: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        weight_decay: Option<f64>,
        /// Loss scale λ.
        #[arg(long)]
        loss_scale: Option<f64>,
        #[arg(long)]
        scheduler_step: Option<usize>,
        #[arg(long)]
        batch: Option<usize>,
        /// Output checkpoint; `<out-dir>/headingnet<T>.ckpt` by default.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Score methods × alignment times and write the evaluation report.
    Evaluate {
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long, value_delimiter = ',')]
        recordings: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "I-DVA,A-DVA,I-OBA,A-OBA")]
        methods: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "10,30,60,90,120")]
        t_align: Vec<u32>,
        /// Directory holding `headingnet<T>.ckpt` files.
        #[arg(long)]
        models_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        start: f64,
        #[arg(long)]
        end: Option<f64>,
    },
    /// Render tables and plot data from an evaluation report.
    Report {
        /// `<out-dir>/eval_report.json` by default.
        #[arg(long)]
        eval: Option<PathBuf>,
    },
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Artifact {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

fn digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn non_empty(list: &[String], what: &str) -> Result<()> {
    if list.is_empty() || list.iter().any(|s| s.trim().is_empty()) {
        return Err(CliError::Usage(format!("{what} list is empty")));
    }
    Ok(())
}

/// Recordings in `dir` (stems of `*.meta.json`), sorted by name, optionally
/// restricted to `names`.
pub fn load_recordings(dir: &Path, names: &[String]) -> Result<Vec<Recording>> {
    let stems: Vec<PathBuf> = if names.is_empty() {
        let mut v: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| CliError::io(dir, e))?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().to_string_lossy().into_owned();
                name.strip_suffix(".meta.json").map(|s| dir.join(s))
            })
            .collect();
        v.sort();
        v
    } else {
        names.iter().map(|n| dir.join(n)).collect()
    };
    if stems.is_empty() {
        return Err(CliError::Usage(format!("no recordings in {}", dir.display())));
    }
    stems.iter().map(|s| read_recording(s).map_err(CliError::from)).collect()
}

fn emit<W: Write>(out: &mut W, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
}

#[derive(Serialize)]
struct SimulatedFile {
    recording: String,
    seed: u64,
    imu: String,
    aid: String,
    meta: String,
    imu_sha256: String,
    aid_sha256: String,
    meta_sha256: String,
}

fn cmd_simulate<W: Write>(
    cli: &Cli,
    config: &Option<PathBuf>,
    sensors: SensorPreset,
    sensor_config: &Option<PathBuf>,
    out: &mut W,
) -> Result<()> {
    let mut scenarios: Vec<ScenarioConfig> = match config {
        None => default_bank(cli.seed.unwrap_or(0)),
        Some(p) => {
            let v: serde_json::Value = read_json(p)?;
            let list = if v.is_array() { v } else { serde_json::Value::Array(vec![v]) };
            serde_json::from_value(list).map_err(|e| CliError::Artifact {
                path: p.clone(),
                msg: format!("invalid scenario: {e}"),
            })?
        }
    };
    if config.is_some() {
        if let Some(seed) = cli.seed {
            for (i, s) in scenarios.iter_mut().enumerate() {
                s.seed = seed.wrapping_add(i as u64);
            }
        }
    }
    let spec = match sensor_config {
        Some(p) => read_json(p)?,
        None => match sensors {
            SensorPreset::Table3 => SensorSpec::table3(),
            SensorPreset::NoiseFree => SensorSpec::noise_free(),
        },
    };
    let mut files = Vec::new();
    for s in &scenarios {
        s.validate()?;
        let rec = simulate(s, &spec)?;
        let paths = write_recording(&rec, &cli.out_dir.join(&s.name))?;
        files.push(SimulatedFile {
            recording: s.name.clone(),
            seed: s.seed,
            imu_sha256: digest(&paths.imu)?,
            aid_sha256: digest(&paths.aid)?,
            meta_sha256: digest(&paths.meta)?,
            imu: paths.imu.display().to_string(),
            aid: paths.aid.display().to_string(),
            meta: paths.meta.display().to_string(),
        });
    }
    match cli.format {
        Format::Json => emit(out, &(serde_json::to_string_pretty(&files).unwrap() + "\n")),
        Format::Csv => {
            let mut s = String::from("recording,seed,file,sha256\n");
            for f in &files {
                for (p, d) in [(&f.imu, &f.imu_sha256), (&f.aid, &f.aid_sha256), (&f.meta, &f.meta_sha256)] {
                    s.push_str(&format!("{},{},{},{}\n", f.recording, f.seed, p, d));
                }
            }
            emit(out, &s)
        }
    }
}

#[derive(Serialize)]
struct AlignRow {
    method: String,
    window_start_s: f64,
    t_align: f64,
    psi_hat_deg: f64,
    psi_gt_deg: f64,
    ae_deg: f64,
}

fn cmd_align<W: Write>(
    cli: &Cli,
    recording: &Path,
    methods: &[String],
    t_align: u32,
    start: f64,
    end: Option<f64>,
    out: &mut W,
) -> Result<()> {
    non_empty(methods, "method")?;
    let methods: Vec<Method> = methods.iter().map(|m| m.parse()).collect::<Result<_>>()?;
    let rec = read_recording(recording)?;
    let seg = Segment::new(&rec, start, end.unwrap_or_else(|| rec.duration()));
    let starts = window_starts(&seg, t_align, WindowMode::Eval)?;
    let len = rec.aid_rate() as usize * t_align as usize;
    let mut rows = Vec::new();
    for m in methods {
        let Method::Classical(am) = m else {
            return Err(CliError::Usage("align runs classical methods; use evaluate for HeadingNet".into()));
        };
        for &a in &starts {
            let (imu, aid) = rec.window_by_index(a, a + len)?;
            let e = align_window(imu, aid, am, &AlignConfig::default())?;
            rows.push(AlignRow {
                method: e.method,
                window_start_s: aid[0].t,
                t_align: e.t_align,
                psi_hat_deg: e.psi_hat.degrees(),
                psi_gt_deg: e.psi_gt.degrees(),
                ae_deg: e.ae,
            });
        }
    }
    match cli.format {
        Format::Json => emit(out, &(serde_json::to_string_pretty(&rows).unwrap() + "\n")),
        Format::Csv => {
            let mut s = String::from("method,window_start_s,t_align,psi_hat_deg,psi_gt_deg,ae_deg\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{:.3},{:.3},{:.6},{:.6},{:.6}\n",
                    r.method, r.window_start_s, r.t_align, r.psi_hat_deg, r.psi_gt_deg, r.ae_deg
                ));
            }
            emit(out, &s)
        }
    }
}

/// Reference hyperparameters for `variation`, with any flag overrides applied.
#[allow(clippy::too_many_arguments)]
pub fn effective_train_config(
    variation: u32,
    seed: u64,
    epochs: Option<usize>,
    lr: Option<f64>,
    weight_decay: Option<f64>,
    loss_scale: Option<f64>,
    scheduler_step: Option<usize>,
    batch: Option<usize>,
) -> Result<TrainConfig> {
    let mut cfg = TrainConfig::for_variation(variation, seed)?;
    if let Some(v) = epochs {
        cfg.epochs = v;
    }
    if let Some(v) = lr {
        cfg.lr = v;
    }
    if let Some(v) = weight_decay {
        cfg.weight_decay = v;
    }
    if let Some(v) = loss_scale {
        cfg.loss_scale = v;
    }
    if let Some(v) = scheduler_step {
        cfg.scheduler_step = v;
    }
    if let Some(v) = batch {
        cfg.batch = v;
    }
    Ok(cfg)
}

pub fn checkpoint_path(dir: &Path, t_align: u32) -> PathBuf {
    dir.join(format!("headingnet{t_align}.ckpt"))
}

fn cmd_evaluate<W: Write>(
    cli: &Cli,
    data_dir: &Path,
    recordings: &[String],
    methods: &[String],
    t_aligns: &[u32],
    models_dir: &Option<PathBuf>,
    start: f64,
    end: Option<f64>,
    out: &mut W,
) -> Result<()> {
    non_empty(methods, "method")?;
    let methods: Vec<Method> = methods.iter().map(|m| m.parse()).collect::<Result<_>>()?;
    let recs = load_recordings(data_dir, recordings)?;
    let mut models: BTreeMap<u32, Model> = BTreeMap::new();
    if methods.contains(&Method::Net) {
        let dir = models_dir.clone().unwrap_or_else(|| cli.out_dir.clone());
        for &t in t_aligns {
            let path = checkpoint_path(&dir, t);
            if !path.exists() {
                return Err(CliError::MissingCheckpoint { t_align: t, path });
            }
            models.insert(t, checkpoint::load(&path)?);
        }
    }
    let report = evaluate(&EvalRequest {
        recordings: &recs,
        methods: &methods,
        t_aligns,
        start,
        end,
        models: &models,
    })?;
    write_file(&cli.out_dir.join("eval_report.json"), report::report_json(&report).as_bytes())?;
    write_file(&cli.out_dir.join("eval_rows.csv"), report::rows_csv(&report).as_bytes())?;
    match cli.format {
        Format::Json => emit(out, &report::report_json(&report)),
        Format::Csv => emit(out, &report::ae_csv(&report)),
    }
}

fn cmd_report<W: Write>(cli: &Cli, eval: &Option<PathBuf>, out: &mut W) -> Result<()> {
    let path = eval.clone().unwrap_or_else(|| cli.out_dir.join("eval_report.json"));
    let r = report::load_report(&path)?;
    if r.averages.is_empty() {
        return Err(CliError::Artifact {
            path,
            msg: "report has no method rows".into(),
        });
    }
    let table = report::text_table(&r);
    write_file(&cli.out_dir.join("report.txt"), table.as_bytes())?;
    write_file(&cli.out_dir.join("ae_vs_talign.csv"), report::ae_csv(&r).as_bytes())?;
    write_file(&cli.out_dir.join("improvement.csv"), report::improvement_csv(&r).as_bytes())?;
    match cli.format {
        Format::Json => emit(out, &report::report_json(&r)),
        Format::Csv => emit(out, &table),
    }
}

/// Runs one parsed invocation, writing results to `out`.
pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<()> {
    match &cli.command {
        Command::Simulate {
            config,
            sensors,
            sensor_config,
        } => cmd_simulate(cli, config, *sensors, sensor_config, out),
        Command::Align {
            recording,
            methods,
            t_align,
            start,
            end,
        } => cmd_align(cli, recording, methods, *t_align, *start, *end, out),
        Command::Train {
            variation,
            data_dir,
            recordings,
            start,
            end,
            epochs,
            lr,
            weight_decay,
            loss_scale,
            scheduler_step,
            batch,
            checkpoint: ckpt,
        } => {
            let seed = cli.seed.ok_or(CliError::SeedRequired)?;
            let cfg = effective_train_config(
                *variation,
                seed,
                *epochs,
                *lr,
                *weight_decay,
                *loss_scale,
                *scheduler_step,
                *batch,
            )?;
            let recs = load_recordings(data_dir, recordings)?;
            let segs: Vec<Segment> = recs
                .iter()
                .map(|r| Segment::new(r, *start, end.unwrap_or_else(|| r.duration())))
                .collect();
            let windows = make_windows(&segs, *variation, WindowMode::Train, seed, None)?;
            let (model, _) = build_headingnet(*variation, seed)?;
            eprintln!(
                "training HeadingNet{variation} on {} windows: {}",
                windows.len(),
                serde_json::to_string(&cfg).unwrap()
            );
            let (model, history) = train(model, &windows, &cfg)?;
            let path = ckpt.clone().unwrap_or_else(|| checkpoint_path(&cli.out_dir, *variation));
            checkpoint::save(&model, &path)?;
            let hist_path = path.with_extension("history.csv");
            write_file(&hist_path, history.to_csv().as_bytes())?;
            match cli.format {
                Format::Json => {
                    let v = serde_json::json!({
                        "checkpoint": path.display().to_string(),
                        "history": hist_path.display().to_string(),
                        "windows": windows.len(),
                        "config": cfg,
                        "final_loss": history.epochs.last().map(|r| r.train_loss),
                    });
                    emit(out, &(serde_json::to_string_pretty(&v).unwrap() + "\n"))
                }
                Format::Csv => emit(out, &history.to_csv()),
            }
        }
        Command::Evaluate {
            data_dir,
            recordings,
            methods,
            t_align,
            models_dir,
            start,
            end,
        } => cmd_evaluate(cli, data_dir, recordings, methods, t_align, models_dir, *start, *end, out),
        Command::Report { eval } => cmd_report(cli, eval, out),
    }
}
