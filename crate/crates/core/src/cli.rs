//! Command-line front end: `synth`, `detect` and `eval`.
//!
//! Every command accepts `--config FILE` with flat `key = value` lines; flags
//! override the file and unknown keys are rejected. Each run writes a
//! manifest in the same format holding every resolved setting, so
//! `--config <manifest>` repeats the run.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cube::{ErrorMap, GroundTruth, HsiCube};
use crate::error::Error;
use crate::hsi::{
    load_envi, load_raw, read_ground_truth_csv, read_ground_truth_pgm, save_raw, synth_scene, write_ground_truth_pgm,
    write_mask_pgm, Component, SynthConfig,
};
use crate::metrics::{auc, auc_score, export_map, roc_curve};
use crate::rx::rx_detect;
use crate::trainer::{TrainConfig, Trainer};

pub const THREADS_ENV: &str = "BIGSET_THREADS";
const DEFAULT_OUT_DIR: &str = "bigset-out";

#[derive(Parser, Debug)]
#[command(name = "bigset", version, about = "Hyperspectral anomaly detection by background/anomaly separation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic scene with ground truth.
    Synth(SynthArgs),
    /// Run a detector on a cube.
    Detect(DetectArgs),
    /// Score a detection map against ground truth.
    Eval(EvalArgs),
}

#[derive(Args, Debug, Default)]
pub struct SynthArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub bands: Option<usize>,
    #[arg(long)]
    pub anomalies: Option<usize>,
    #[arg(long)]
    pub contrast: Option<f64>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Background components as comma-separated `mean:scale` pairs.
    #[arg(long)]
    pub components: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct DetectArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Cube to analyse: an ENVI `.hdr` or a raw container.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Ground truth (`.pgm` or `.csv`); enables the AUC trace.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub detector: Option<Detector>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Epochs per iteration.
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub tau_override: Option<f64>,
    #[arg(long, value_enum)]
    pub normalize: Option<Switch>,
}

#[derive(Args, Debug, Default)]
pub struct EvalArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Single-band score map (raw container or ENVI).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Where `roc.csv` goes; defaults to the directory of `--input`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Detector {
    Bigset,
    Rx,
    PlainAe,
}

impl Detector {
    pub fn as_str(self) -> &'static str {
        match self {
            Detector::Bigset => "bigset",
            Detector::Rx => "rx",
            Detector::PlainAe => "plain-ae",
        }
    }

    fn accepts(self, key: &str) -> bool {
        const AE: [&str; 5] = ["iterations", "epochs", "lr", "seed", "hidden"];
        const SEPARATION: [&str; 4] = ["lambda", "gamma", "bins", "tau_override"];
        match self {
            Detector::Bigset => true,
            Detector::PlainAe => !SEPARATION.contains(&key),
            Detector::Rx => !AE.contains(&key) && !SEPARATION.contains(&key),
        }
    }
}

impl FromStr for Detector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Detector as ValueEnum>::from_str(s, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

impl FromStr for Switch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Switch as ValueEnum>::from_str(s, false)
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(Error),
}

impl CliError {
    /// 2 usage or configuration, 3 data, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Run(Error::Config(_)) => 2,
            CliError::Run(e) if e.is_numeric() => 4,
            CliError::Run(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn flag_name(key: &str) -> String {
    format!("--{}", key.replace('_', "-"))
}

/// Parses `key = value` lines; `#` starts a comment line.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
        let key = k.trim().replace('-', "_");
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(format!("line {}: duplicate key {key}", n + 1));
        }
    }
    Ok(map)
}

/// Resolved key/value settings for one command.
struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    fn load(
        command: &str,
        config: Option<&Path>,
        flags: Vec<(&str, Option<String>)>,
        allowed: &[&str],
    ) -> CliResult<Self> {
        let mut values = match config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                parse_config(&text).map_err(|m| usage(format!("{}: {m}", path.display())))?
            }
            None => BTreeMap::new(),
        };
        if let Some(c) = values.remove("command") {
            if c != command {
                return Err(usage(format!("config file is for `{c}`, not `{command}`")));
            }
        }
        if let Some(k) = values.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(usage(format!("unknown config key `{k}` for `{command}`")));
        }
        for (key, v) in flags {
            if let Some(v) = v {
                values.insert(key.to_string(), v);
            }
        }
        Ok(Self { values })
    }

    fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| usage(format!("invalid value `{v}` for {}: {e}", flag_name(key)))))
            .transpose()
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.values.get(key).map(PathBuf::from)
    }
}

fn path_string(p: &Path) -> String {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf()).display().to_string()
}

struct Manifest {
    command: &'static str,
    entries: Vec<(&'static str, String)>,
}

impl Manifest {
    fn new(command: &'static str) -> Self {
        Self { command, entries: Vec::new() }
    }

    fn set(&mut self, key: &'static str, value: impl ToString) {
        self.entries.push((key, value.to_string()));
    }

    fn write(&self, dir: &Path, started: Instant) -> CliResult<PathBuf> {
        let mut text = format!(
            "# bigset {}\n# duration_s = {:.3}\ncommand = {}\n",
            env!("CARGO_PKG_VERSION"),
            started.elapsed().as_secs_f64(),
            self.command
        );
        for (k, v) in &self.entries {
            text.push_str(&format!("{k} = {v}\n"));
        }
        let path = dir.join(format!("{}-manifest.txt", self.command));
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e).into())
}

/// Loads an ENVI cube when given a `.hdr`, otherwise a raw container.
pub fn load_cube(path: &Path) -> crate::Result<HsiCube> {
    if !path.exists() {
        return Err(Error::io(path, std::io::Error::from(std::io::ErrorKind::NotFound)));
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("hdr") => load_envi(path),
        _ => load_raw(path),
    }
}

/// Loads PGM or CSV labels; CSV takes its dimensions from the cube.
pub fn load_ground_truth(path: &Path, height: usize, width: usize) -> crate::Result<GroundTruth> {
    let gt = match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("csv") => read_ground_truth_csv(path, height, width)?,
        _ => read_ground_truth_pgm(path)?,
    };
    if gt.height() != height || gt.width() != width {
        return Err(Error::Shape(format!(
            "ground truth {} is {}x{}, data are {height}x{width}",
            path.display(),
            gt.height(),
            gt.width()
        )));
    }
    Ok(gt)
}

fn parse_components(text: &str) -> CliResult<Vec<Component>> {
    text.split(',')
        .map(|pair| {
            let (m, s) = pair.trim().split_once(':').ok_or_else(|| usage(format!("component `{pair}` is not mean:scale")))?;
            let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| usage(format!("component `{pair}`: {e}")));
            Ok(Component { mean: parse(m)?, scale: parse(s)? })
        })
        .collect()
}

fn format_components(components: &[Component]) -> String {
    components.iter().map(|c| format!("{}:{}", c.mean, c.scale)).collect::<Vec<_>>().join(",")
}

const SYNTH_KEYS: [&str; 9] = ["out_dir", "height", "width", "bands", "anomalies", "contrast", "noise", "seed", "components"];

pub fn cmd_synth(args: &SynthArgs) -> CliResult<PathBuf> {
    let started = Instant::now();
    let s = Settings::load(
        "synth",
        args.config.as_deref(),
        vec![
            ("out_dir", args.out_dir.as_ref().map(|p| p.display().to_string())),
            ("height", args.height.map(|v| v.to_string())),
            ("width", args.width.map(|v| v.to_string())),
            ("bands", args.bands.map(|v| v.to_string())),
            ("anomalies", args.anomalies.map(|v| v.to_string())),
            ("contrast", args.contrast.map(|v| v.to_string())),
            ("noise", args.noise.map(|v| v.to_string())),
            ("seed", args.seed.map(|v| v.to_string())),
            ("components", args.components.clone()),
        ],
        &SYNTH_KEYS,
    )?;
    let d = SynthConfig::default();
    let cfg = SynthConfig {
        height: s.get_or("height", d.height)?,
        width: s.get_or("width", d.width)?,
        bands: s.get_or("bands", d.bands)?,
        anomalies: s.get_or("anomalies", d.anomalies)?,
        contrast: s.get_or("contrast", d.contrast)?,
        noise_std: s.get_or("noise", d.noise_std)?,
        seed: s.get_or("seed", d.seed)?,
        components: match s.values.get("components") {
            Some(t) => parse_components(t)?,
            None => d.components,
        },
    };
    cfg.validate()?;
    let out_dir = s.path("out_dir").unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    create_dir(&out_dir)?;

    let (cube, gt) = synth_scene(&cfg)?;
    save_raw(&cube, out_dir.join("cube.raw"))?;
    write_ground_truth_pgm(&gt, out_dir.join("gt.pgm"))?;

    let mut m = Manifest::new("synth");
    m.set("out_dir", path_string(&out_dir));
    m.set("height", cfg.height);
    m.set("width", cfg.width);
    m.set("bands", cfg.bands);
    m.set("anomalies", cfg.anomalies);
    m.set("contrast", cfg.contrast);
    m.set("noise", cfg.noise_std);
    m.set("seed", cfg.seed);
    m.set("components", format_components(&cfg.components));
    m.write(&out_dir, started)?;
    println!("scene {}x{}x{} with {} anomalous pixels written to {}", cfg.height, cfg.width, cfg.bands, gt.anomaly_count(), out_dir.display());
    Ok(out_dir)
}

const DETECT_KEYS: [&str; 15] = [
    "input", "gt", "out_dir", "detector", "normalize", "lambda", "gamma", "iterations", "epochs", "lr", "seed",
    "hidden", "bins", "tau_override", "auc_every",
];

pub fn cmd_detect(args: &DetectArgs) -> CliResult<PathBuf> {
    let started = Instant::now();
    let s = Settings::load(
        "detect",
        args.config.as_deref(),
        vec![
            ("input", args.input.as_ref().map(|p| p.display().to_string())),
            ("gt", args.gt.as_ref().map(|p| p.display().to_string())),
            ("out_dir", args.out_dir.as_ref().map(|p| p.display().to_string())),
            ("detector", args.detector.map(|d| d.as_str().to_string())),
            ("normalize", args.normalize.map(|n| if n == Switch::On { "on" } else { "off" }.to_string())),
            ("lambda", args.lambda.map(|v| v.to_string())),
            ("gamma", args.gamma.map(|v| v.to_string())),
            ("iterations", args.iterations.map(|v| v.to_string())),
            ("epochs", args.epochs.map(|v| v.to_string())),
            ("lr", args.lr.map(|v| v.to_string())),
            ("seed", args.seed.map(|v| v.to_string())),
            ("hidden", args.hidden.map(|v| v.to_string())),
            ("bins", args.bins.map(|v| v.to_string())),
            ("tau_override", args.tau_override.map(|v| v.to_string())),
        ],
        &DETECT_KEYS,
    )?;
    let detector: Detector = s.get_or("detector", Detector::Bigset)?;
    if let Some(k) = s.values.keys().find(|k| !detector.accepts(k)) {
        return Err(usage(format!("{} does not apply to the {} detector", flag_name(k), detector.as_str())));
    }
    let input = s.path("input").ok_or_else(|| usage("--input is required"))?;
    let normalize = s.get_or("normalize", Switch::On)? == Switch::On;
    let out_dir = s.path("out_dir").unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));

    let cube = load_cube(&input)?;
    let gt_path = s.path("gt");
    let gt = gt_path.as_deref().map(|p| load_ground_truth(p, cube.height(), cube.width())).transpose()?;
    create_dir(&out_dir)?;

    let mut m = Manifest::new("detect");
    m.set("detector", detector.as_str());
    m.set("input", path_string(&input));
    if let Some(p) = &gt_path {
        m.set("gt", path_string(p));
    }
    m.set("out_dir", path_string(&out_dir));
    m.set("normalize", if normalize { "on" } else { "off" });

    let detection = match detector {
        Detector::Rx => rx_detect(&if normalize { cube.normalized() } else { cube })?,
        Detector::Bigset | Detector::PlainAe => {
            let d = TrainConfig::default();
            let cfg = TrainConfig {
                lambda: s.get_or("lambda", d.lambda)?,
                gamma: s.get_or("gamma", d.gamma)?,
                iterations: s.get_or("iterations", d.iterations)?,
                epochs_per_iter: s.get_or("epochs", d.epochs_per_iter)?,
                learning_rate: s.get_or("lr", d.learning_rate)?,
                seed: s.get_or("seed", d.seed)?,
                hidden: s.get_or("hidden", d.hidden)?,
                bins: s.get_or("bins", d.bins)?,
                tau_override: s.get("tau_override")?,
                auc_every: s.get_or("auc_every", d.auc_every)?,
                normalize,
                ..d
            };
            m.set("iterations", cfg.iterations);
            m.set("epochs", cfg.epochs_per_iter);
            m.set("lr", cfg.learning_rate);
            m.set("seed", cfg.seed);
            m.set("hidden", cfg.hidden);
            m.set("auc_every", cfg.auc_every);
            let cfg = if detector == Detector::Bigset {
                m.set("lambda", cfg.lambda);
                m.set("gamma", cfg.gamma);
                m.set("bins", cfg.bins);
                if let Some(t) = cfg.tau_override {
                    m.set("tau_override", t);
                }
                cfg
            } else {
                cfg.plain()
            };
            cfg.validate()?;
            let mut trainer = Trainer::new(cfg);
            if let Some(gt) = &gt {
                trainer = trainer.with_ground_truth(gt);
            }
            let result = trainer.run(&cube)?;
            let trace = out_dir.join("trace.csv");
            fs::write(&trace, result.trace_csv()).map_err(|e| Error::io(&trace, e))?;
            if detector == Detector::Bigset {
                for (i, mask) in result.masks.iter().enumerate() {
                    write_mask_pgm(mask, out_dir.join(format!("mask_{}.pgm", i + 1)))?;
                }
                write_tau_report(&out_dir, &result)?;
            }
            result.detection
        }
    };

    save_raw(&detection.to_cube(), out_dir.join("detection.raw"))?;
    export_map(&detection, out_dir.join("detection.pgm"))?;
    m.write(&out_dir, started)?;
    match &gt {
        Some(gt) => println!("{} detection written to {}; AUC {:.4}", detector.as_str(), out_dir.display(), auc_score(&detection, gt)?),
        None => println!("{} detection written to {}", detector.as_str(), out_dir.display()),
    }
    Ok(out_dir)
}

fn write_tau_report(out_dir: &Path, result: &crate::trainer::TrainResult) -> CliResult<()> {
    let mut text = format!("tau = {}\n", result.tau);
    match &result.tau_estimate {
        Some(est) => {
            text.push_str(&format!(
                "source = estimated\ngamma = {}\nbins = {}\ncorner_bin = {}\ncorner_value = {}\nsaturated = {}\n",
                est.gamma,
                est.histogram.bin_count(),
                est.corner_bin,
                est.corner_value,
                est.is_saturated()
            ));
        }
        None => text.push_str("source = override\n"),
    }
    if let Some(last) = result.masks.last() {
        text.push_str(&format!("masked_pixels = {}\n", last.count_ones()));
    }
    let path = out_dir.join("tau.txt");
    fs::write(&path, text).map_err(|e| Error::io(&path, e).into())
}

/// Returns the AUC; prints it with four decimals.
pub fn cmd_eval(args: &EvalArgs) -> CliResult<f64> {
    let started = Instant::now();
    let s = Settings::load(
        "eval",
        args.config.as_deref(),
        vec![
            ("input", args.input.as_ref().map(|p| p.display().to_string())),
            ("gt", args.gt.as_ref().map(|p| p.display().to_string())),
            ("out_dir", args.out_dir.as_ref().map(|p| p.display().to_string())),
        ],
        &["input", "gt", "out_dir"],
    )?;
    let input = s.path("input").ok_or_else(|| usage("--input is required"))?;
    let gt_path = s.path("gt").ok_or_else(|| usage("--gt is required"))?;
    let scores = ErrorMap::from_cube(&load_cube(&input)?)?;
    let gt = load_ground_truth(&gt_path, scores.height(), scores.width())?;
    let curve = roc_curve(&scores, &gt)?;
    let value = auc(&curve);

    let out_dir = s.path("out_dir").unwrap_or_else(|| match input.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    });
    create_dir(&out_dir)?;
    curve.write_csv(out_dir.join("roc.csv"))?;
    let mut m = Manifest::new("eval");
    m.set("input", path_string(&input));
    m.set("gt", path_string(&gt_path));
    m.set("out_dir", path_string(&out_dir));
    m.write(&out_dir, started)?;
    println!("{value:.4}");
    Ok(value)
}

/// Sizes the global thread pool from `BIGSET_THREADS` when set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
        log::warn!("thread pool already initialised; ignoring {THREADS_ENV}");
    }
    Ok(())
}

pub fn run(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Synth(a) => cmd_synth(a).map(|_| ()),
        Command::Detect(a) => cmd_detect(a).map(|_| ()),
        Command::Eval(a) => cmd_eval(a).map(|_| ()),
    }
}
