//! Command-line front end. The `lmpkit` binary forwards its arguments to
//! [`run`] and exits with the returned code: 0 on success, 1 for invalid
//! input or configuration, 2 for I/O failures, 3 for internal errors.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use rayon::prelude::*;
use serde::Deserialize;

use crate::classify::{evaluate, grid_search, train, Dataset, Protocol, SvmParams, Tuning};
use crate::error::{Error, Result};
use crate::face::{build_heat_maps, FaceGeometry, RoiSpec, Sequence};
use crate::features::{extract_sequence, read_features, write_features, FeatureRow};
use crate::flow::{compute_flow, FlowParams, Frame};
use crate::lmp::{LmpConfig, PRESET_NAMES};

const FRAME_EXTENSIONS: [&str; 5] = ["png", "pgm", "pnm", "ppm", "pbm"];
const LANDMARK_EXTENSIONS: [&str; 2] = ["pts", "txt"];

#[derive(Debug, Parser)]
#[command(
    name = "lmpkit",
    version,
    about = "Local motion patterns for facial expression analysis"
)]
struct Cli {
    /// LMP configuration file (JSON); overrides --preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named LMP preset.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for fold assignment and grid search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dense optical flow between consecutive frames of a directory, as .flo files.
    Flow {
        input_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Motion feature vectors for every sequence of a manifest.
    Extract {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Append region shape features of the apex frame.
        #[arg(long)]
        geo: bool,
        /// Custom region layout (JSON).
        #[arg(long)]
        roi_spec: Option<PathBuf>,
    },
    /// Per-class motion heat maps (PNG and CSV).
    Heatmap {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a classifier on a feature table.
    Train {
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        svm: SvmArgs,
    },
    /// Cross-validated accuracy of a feature table.
    Eval {
        features: PathBuf,
        #[arg(long, value_enum, default_value_t = ProtocolArg::Kfold10)]
        protocol: ProtocolArg,
        /// Report path; the confusion matrix is written next to it as CSV.
        /// Without it the report goes to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        svm: SvmArgs,
    },
    /// Inspect LMP configurations.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
}

#[derive(Debug, Subcommand)]
enum ConfigAction {
    /// Print the resolved configuration as JSON.
    Show,
    /// List the preset names.
    Presets,
    /// Check a configuration file.
    Validate { file: PathBuf },
}

#[derive(Debug, Args)]
struct SvmArgs {
    /// Penalty C.
    #[arg(long, default_value_t = 100.0)]
    c: f64,
    /// RBF gamma (defaults to 1 / feature count).
    #[arg(long)]
    gamma: Option<f64>,
    /// Choose C and gamma by inner 3-fold grid search.
    #[arg(long)]
    grid: bool,
}

impl SvmArgs {
    fn tuning(&self, seed: u64) -> Tuning {
        if self.grid {
            Tuning::Grid { seed }
        } else {
            Tuning::Fixed(SvmParams {
                c: self.c,
                gamma: self.gamma,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ProtocolArg {
    Kfold10,
    Loso,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors are reported on standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let _ =
        env_logger::Builder::from_env(env_logger::Env::default().filter_or("LMPKIT_LOG", "warn"))
            .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lmpkit: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::InvalidInput("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(&cli))
}

fn resolve_config(cli: &Cli) -> Result<LmpConfig> {
    let cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => LmpConfig::load(path)?,
        (None, Some(name)) => LmpConfig::preset(name)?,
        (None, None) => LmpConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Flow { input_dir, out } => cmd_flow(input_dir, out),
        Command::Extract {
            manifest,
            out,
            geo,
            roi_spec,
        } => {
            let spec = match roi_spec {
                Some(p) => RoiSpec::load(p)?,
                None => RoiSpec::default(),
            };
            cmd_extract(manifest, &resolve_config(cli)?, &spec, *geo, out)
        }
        Command::Heatmap { manifest, out } => cmd_heatmap(manifest, &resolve_config(cli)?, out),
        Command::Train { features, out, svm } => cmd_train(features, &svm.tuning(cli.seed), out),
        Command::Eval {
            features,
            protocol,
            out,
            svm,
        } => {
            let protocol = match protocol {
                ProtocolArg::Kfold10 => Protocol::KFold {
                    k: 10,
                    seed: cli.seed,
                },
                ProtocolArg::Loso => Protocol::Loso,
            };
            cmd_eval(features, &protocol, &svm.tuning(cli.seed), out.as_deref())
        }
        Command::Config { action } => match action {
            ConfigAction::Show => {
                println!("{}", resolve_config(cli)?.to_json());
                Ok(())
            }
            ConfigAction::Presets => {
                for name in PRESET_NAMES {
                    println!("{name}");
                }
                Ok(())
            }
            ConfigAction::Validate { file } => {
                let cfg = LmpConfig::load(file)?;
                cfg.validate()?;
                println!("{}: ok", file.display());
                Ok(())
            }
        },
    }
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Files of `dir` with one of `extensions`, sorted by name.
pub fn list_files(dir: &Path, extensions: &[&str]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if path.is_file() && ext.is_some_and(|e| extensions.contains(&e.as_str())) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Writes the flow between each consecutive pair of frames in `input_dir`
/// as `flow_NNNNNN.flo`.
pub fn cmd_flow(input_dir: &Path, out: &Path) -> Result<()> {
    let paths = list_files(input_dir, &FRAME_EXTENSIONS)?;
    if paths.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "{} holds {} frames, need at least two",
            input_dir.display(),
            paths.len()
        )));
    }
    let frames = paths
        .par_iter()
        .map(Frame::load)
        .collect::<Result<Vec<_>>>()?;
    create_dir(out)?;
    let params = FlowParams::default();
    let flows = frames
        .par_windows(2)
        .map(|w| compute_flow(&w[0], &w[1], &params))
        .collect::<Result<Vec<_>>>()?;
    for (i, f) in flows.iter().enumerate() {
        f.save_flo(out.join(format!("flow_{i:06}.flo")))?;
    }
    info!("wrote {} flow fields to {}", flows.len(), out.display());
    Ok(())
}

/// One manifest row. Paths are relative to the manifest's directory.
/// `landmarks` is either a single file used for every frame or a directory
/// with one file per frame. `onset` and `apex` select the inclusive frame
/// range; when empty the whole sequence is used.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub frames_dir: PathBuf,
    pub landmarks: PathBuf,
    pub label: String,
    pub subject: String,
    #[serde(default)]
    pub onset: Option<usize>,
    #[serde(default)]
    pub apex: Option<usize>,
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut entries = Vec::new();
    for rec in csv::Reader::from_reader(file).deserialize() {
        let mut e: ManifestEntry = rec?;
        if let (Some(o), Some(a)) = (e.onset, e.apex) {
            if o > a {
                return Err(Error::Validation(format!(
                    "sequence {}: onset {o} after apex {a}",
                    e.id
                )));
            }
        }
        e.frames_dir = base.join(&e.frames_dir);
        e.landmarks = base.join(&e.landmarks);
        entries.push(e);
    }
    Ok(entries)
}

/// Loads the frames and landmarks of the activation range of one entry.
pub fn load_sequence(entry: &ManifestEntry) -> Result<Sequence> {
    let all = list_files(&entry.frames_dir, &FRAME_EXTENSIONS)?;
    let onset = entry.onset.unwrap_or(0);
    let apex = entry.apex.unwrap_or(all.len().saturating_sub(1));
    if apex >= all.len() {
        return Err(Error::Validation(format!(
            "sequence {}: apex {apex} beyond its {} frames",
            entry.id,
            all.len()
        )));
    }
    let frames = all[onset..=apex]
        .iter()
        .map(Frame::load)
        .collect::<Result<Vec<_>>>()?;
    let landmark_files: Vec<PathBuf> = if entry.landmarks.is_dir() {
        let files = list_files(&entry.landmarks, &LANDMARK_EXTENSIONS)?;
        if files.len() != all.len() {
            return Err(Error::Validation(format!(
                "sequence {}: {} landmark files for {} frames",
                entry.id,
                files.len(),
                all.len()
            )));
        }
        files[onset..=apex].to_vec()
    } else {
        vec![entry.landmarks.clone(); frames.len()]
    };
    let landmarks = frames
        .iter()
        .zip(&landmark_files)
        .map(|(f, p)| FaceGeometry::load_within(p, f.width(), f.height()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Sequence {
        id: entry.id.clone(),
        frames,
        landmarks,
        label: entry.label.clone(),
        subject: entry.subject.clone(),
    })
}

pub fn cmd_extract(
    manifest: &Path,
    cfg: &LmpConfig,
    roi_spec: &RoiSpec,
    geo: bool,
    out: &Path,
) -> Result<()> {
    let entries = read_manifest(manifest)?;
    let params = FlowParams::default();
    let rows = entries
        .par_iter()
        .map(|e| {
            let seq = load_sequence(e)?;
            let values = extract_sequence(&seq, cfg, &params, roi_spec, geo)?;
            info!("extracted {}", e.id);
            Ok(FeatureRow {
                id: seq.id,
                label: seq.label,
                subject: seq.subject,
                values,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_features(out, &rows)
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn cmd_heatmap(manifest: &Path, cfg: &LmpConfig, out: &Path) -> Result<()> {
    let entries = read_manifest(manifest)?;
    let sequences = entries
        .par_iter()
        .map(load_sequence)
        .collect::<Result<Vec<_>>>()?;
    let maps = build_heat_maps(&sequences, cfg, &FlowParams::default())?;
    create_dir(out)?;
    for m in &maps {
        let stem = file_stem(&m.label);
        m.save_png(out.join(format!("{stem}.png")))?;
        m.save_csv(out.join(format!("{stem}.csv")))?;
    }
    Ok(())
}

pub fn cmd_train(features: &Path, tuning: &Tuning, out: &Path) -> Result<()> {
    let data = Dataset::from_rows(read_features(features)?)?;
    let params = match tuning {
        Tuning::Fixed(p) => *p,
        Tuning::Grid { seed } => grid_search(&data.samples, *seed)?,
    };
    let mut model = train(&data.samples, &params)?;
    model.class_names = data.class_names;
    model.save(out)
}

pub fn cmd_eval(
    features: &Path,
    protocol: &Protocol,
    tuning: &Tuning,
    out: Option<&Path>,
) -> Result<()> {
    let data = Dataset::from_rows(read_features(features)?)?;
    let report = evaluate(&data, protocol, tuning)?;
    let json = report.to_json();
    match out {
        Some(path) => {
            std::fs::write(path, format!("{json}\n")).map_err(|e| Error::io(path, e))?;
            let cm = path.with_extension("confusion.csv");
            std::fs::write(&cm, report.confusion_csv()).map_err(|e| Error::io(&cm, e))?;
        }
        None => println!("{json}"),
    }
    info!(
        "accuracy {:.4} over {} samples",
        report.accuracy, report.total
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_global_flags_after_subcommand() {
        let cli = Cli::try_parse_from([
            "lmpkit",
            "eval",
            "f.csv",
            "--protocol",
            "loso",
            "--seed",
            "7",
            "--jobs",
            "2",
        ])
        .unwrap();
        assert_eq!(cli.seed, 7);
        assert_eq!(cli.jobs, Some(2));
        assert!(matches!(
            cli.command,
            Command::Eval {
                protocol: ProtocolArg::Loso,
                ..
            }
        ));
    }

    #[test]
    fn usage_errors_exit_with_one() {
        assert_eq!(run(["lmpkit", "bogus"]), 1);
        assert_eq!(run(["lmpkit", "config", "show", "--preset", "nope"]), 1);
        assert_eq!(run(["lmpkit", "config", "presets"]), 0);
    }

    #[test]
    fn file_stems_are_safe() {
        assert_eq!(file_stem("happy"), "happy");
        assert_eq!(file_stem("ck+/x y"), "ck__x_y");
    }

    #[test]
    fn manifest_paths_are_relative_to_it() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.csv");
        std::fs::write(
            &m,
            "id,frames_dir,landmarks,label,subject,onset,apex\n\
             a,seq/a,lm/a.pts,happy,s1,0,2\n\
             b,seq/b,lm/b,sad,s2,,\n",
        )
        .unwrap();
        let e = read_manifest(&m).unwrap();
        assert_eq!(e[0].frames_dir, dir.path().join("seq/a"));
        assert_eq!((e[0].onset, e[0].apex), (Some(0), Some(2)));
        assert_eq!((e[1].onset, e[1].apex), (None, None));
        std::fs::write(
            &m,
            "id,frames_dir,landmarks,label,subject,onset,apex\na,s,l,x,y,3,1\n",
        )
        .unwrap();
        assert!(matches!(read_manifest(&m), Err(Error::Validation(_))));
    }
}
