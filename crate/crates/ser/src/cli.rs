//! `ser` command line.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ser_core::classifier::{Gender, StrategyKind};
use ser_core::corpus::EmotionTokens;
use ser_core::features::{CepstralMode, FeatureConfig};
use ser_core::report::TableLayout;
use ser_core::synth::SynthSpec;
use ser_core::SvmParams;

use crate::error::SerError;
use crate::extract::{extract_file, extract_samples, features_csv};
use crate::manifest::load_manifest;
use crate::model_io::{load_model, save_model, write_atomic};
use crate::pipeline::{common_tag, compare, evaluate, select, train_model, CompareConfig, SplitConfig, SplitPart};
use crate::synth_corpus::synth_corpus;

#[derive(Debug, Parser)]
#[command(name = "ser", version, about = "Speech emotion recognition: features, SVM training and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Mfcc,
    Lpcc,
}

impl From<ModeArg> for CepstralMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Mfcc => CepstralMode::Mfcc,
            ModeArg::Lpcc => CepstralMode::Lpcc,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    /// One-against-all over the pooled training set
    Oaa,
    /// One OAA bank per speaker gender
    Gd,
}

impl From<StrategyArg> for StrategyKind {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Oaa => StrategyKind::Oaa,
            StrategyArg::Gd => StrategyKind::GenderDependent,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenderArg {
    M,
    F,
}

impl From<GenderArg> for Gender {
    fn from(g: GenderArg) -> Self {
        match g {
            GenderArg::M => Gender::M,
            GenderArg::F => Gender::F,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GendersArg {
    Both,
    M,
    F,
}

fn parse_table(text: &str) -> Result<TableLayout, String> {
    TableLayout::parse(text).ok_or_else(|| format!("unknown table `{text}` (use I, II or III)"))
}

#[derive(Debug, Clone, Args)]
struct FrameArgs {
    /// Analysis frame length in milliseconds
    #[arg(long, default_value_t = 60.0)]
    frame_ms: f64,
    /// Hop between frame starts in milliseconds
    #[arg(long, default_value_t = 30.0)]
    hop_ms: f64,
}

impl FrameArgs {
    fn config(&self, mode: CepstralMode) -> Result<FeatureConfig, SerError> {
        let cfg = FeatureConfig {
            frame_ms: self.frame_ms,
            hop_ms: self.hop_ms,
            mode,
            ..FeatureConfig::default()
        };
        cfg.validate().map_err(|e| SerError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
struct SvmArgs {
    /// SVM box constraint
    #[arg(long = "c", default_value_t = 10.0)]
    c: f64,
    /// RBF kernel width (default 1/dimension)
    #[arg(long)]
    gamma: Option<f64>,
}

impl SvmArgs {
    fn params(&self) -> Result<SvmParams, SerError> {
        let params = SvmParams {
            c: self.c,
            gamma: self.gamma,
            ..SvmParams::default()
        };
        params.validate().map_err(|e| SerError::Usage(e.to_string()))?;
        Ok(params)
    }
}

#[derive(Debug, Clone, Args)]
struct SplitArgs {
    /// Seed of the stratified train/test shuffle
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Share of each (emotion, gender) group used for training
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
}

impl SplitArgs {
    fn config(&self) -> Result<SplitConfig, SerError> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(SerError::Usage("--train-fraction must lie strictly between 0 and 1".into()));
        }
        Ok(SplitConfig {
            train_fraction: self.train_fraction,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labelled synthetic corpus with a manifest
    Synth {
        #[arg(long)]
        out: PathBuf,
        /// Utterances per (emotion, gender)
        #[arg(long, default_value_t = 25)]
        per_class: usize,
        #[arg(long, value_enum, default_value = "both")]
        genders: GendersArg,
        /// Emotions differ only in pitch, with overlapping gender offsets
        #[arg(long)]
        confounded: bool,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Write one feature row per manifest entry as CSV
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "mfcc")]
        mode: ModeArg,
        #[command(flatten)]
        frame: FrameArgs,
        /// Worker threads (default: one per CPU)
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Train a model on a manifest
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "oaa")]
        strategy: StrategyArg,
        #[arg(long, value_enum, default_value = "mfcc")]
        mode: ModeArg,
        /// Part of the seeded split to train on
        #[arg(long, value_enum, default_value = "train")]
        split: SplitPart,
        #[command(flatten)]
        frame: FrameArgs,
        #[command(flatten)]
        svm: SvmArgs,
        #[command(flatten)]
        split_args: SplitArgs,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Classify one WAV file
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        wav: PathBuf,
        /// Speaker gender; required for gender-dependent models
        #[arg(long, value_enum)]
        gender: Option<GenderArg>,
        #[command(flatten)]
        frame: FrameArgs,
    },
    /// Score a model on a manifest
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitPart,
        #[command(flatten)]
        frame: FrameArgs,
        #[command(flatten)]
        split_args: SplitArgs,
        #[arg(long)]
        jobs: Option<usize>,
        /// Also write the report here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train and score several configurations on one split and print tables
    Compare {
        #[arg(long)]
        manifest: PathBuf,
        /// Tables to emit: I (strategies), II (per dataset tag), III (MFCC vs LPCC)
        #[arg(long, value_delimiter = ',', default_value = "I,III", value_parser = parse_table)]
        tables: Vec<TableLayout>,
        /// Cepstral mode for Tables I and II
        #[arg(long, value_enum, default_value = "mfcc")]
        mode: ModeArg,
        /// Strategy for Table III
        #[arg(long, value_enum, default_value = "gd")]
        strategy: StrategyArg,
        #[command(flatten)]
        frame: FrameArgs,
        #[command(flatten)]
        svm: SvmArgs,
        #[command(flatten)]
        split_args: SplitArgs,
        #[arg(long)]
        jobs: Option<usize>,
        /// Also write all tables as CSV here
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn check_jobs(jobs: Option<usize>) -> Result<Option<usize>, SerError> {
    match jobs {
        Some(0) => Err(SerError::Usage("--jobs must be at least 1".into())),
        j => Ok(j),
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), SerError> {
    let tokens = EmotionTokens::default();
    let stdout = |out: &mut dyn Write, text: &str| {
        out.write_all(text.as_bytes())
            .map_err(|e| SerError::io("<stdout>", e))
    };
    match command {
        Command::Synth {
            out: dir,
            per_class,
            genders,
            confounded,
            seed,
        } => {
            if per_class == 0 {
                return Err(SerError::Usage("--per-class must be at least 1".into()));
            }
            let mut spec = if confounded {
                SynthSpec::gender_confounded()
            } else {
                SynthSpec::default()
            };
            spec.samples_per_cell = per_class;
            spec.seed = seed;
            spec.genders = match genders {
                GendersArg::Both => vec![Gender::M, Gender::F],
                GendersArg::M => vec![Gender::M],
                GendersArg::F => vec![Gender::F],
            };
            let manifest = synth_corpus(&spec, &dir)?;
            stdout(
                out,
                &format!(
                    "wrote {} files and {}\n",
                    manifest.dataset.len(),
                    dir.join(crate::synth_corpus::MANIFEST_NAME).display()
                ),
            )
        }
        Command::Extract {
            manifest,
            out: target,
            mode,
            frame,
            jobs,
        } => {
            let cfg = frame.config(mode.into())?;
            let jobs = check_jobs(jobs)?;
            let m = load_manifest(&manifest, &tokens)?;
            let vectors = extract_samples(&m, m.dataset.samples(), &cfg, jobs)?;
            let csv = features_csv(m.dataset.samples(), &vectors, &cfg)
                .map_err(|e| SerError::io(&target, std::io::Error::other(e.to_string())))?;
            write_atomic(&target, csv.as_bytes())?;
            stdout(out, &format!("wrote {} feature rows to {}\n", vectors.len(), target.display()))
        }
        Command::Train {
            manifest,
            model,
            strategy,
            mode,
            split,
            frame,
            svm,
            split_args,
            jobs,
        } => {
            let cfg = frame.config(mode.into())?;
            let params = svm.params()?;
            let split_cfg = split_args.config()?;
            let jobs = check_jobs(jobs)?;
            let m = load_manifest(&manifest, &tokens)?;
            let part = select(&m.dataset, split, split_cfg)?;
            let vectors = extract_samples(&m, part.samples(), &cfg, jobs)?;
            let trained = train_model(strategy.into(), part.samples(), &vectors, &cfg, &params)?;
            save_model(&model, &trained)?;
            stdout(
                out,
                &format!(
                    "trained {} {} model on {} samples, saved to {}\n",
                    trained.kind().display_name(),
                    trained.mode,
                    part.len(),
                    model.display()
                ),
            )
        }
        Command::Predict {
            model,
            wav,
            gender,
            frame,
        } => {
            // flags first, then files
            frame.config(CepstralMode::Mfcc)?;
            let trained = load_model(&model)?;
            let cfg = frame.config(trained.mode)?;
            let gender = gender.map(Gender::from);
            if trained.kind() == StrategyKind::GenderDependent && gender.is_none() {
                return Err(SerError::Usage(
                    "--gender is required for gender-dependent models".into(),
                ));
            }
            if !trained.matches_features(&cfg) {
                return Err(SerError::ConfigMismatch);
            }
            let v = extract_file(&wav, &cfg)?;
            let p = trained.predict(&v, gender)?;
            let mut text = format!("{}\n", p.label);
            for label in ser_core::EmotionLabel::ALL {
                text.push_str(&format!("  {:<6} {:>12.6}\n", label.as_str(), p.score(label)));
            }
            stdout(out, &text)
        }
        Command::Evaluate {
            model,
            manifest,
            split,
            frame,
            split_args,
            jobs,
            out: target,
        } => {
            frame.config(CepstralMode::Mfcc)?;
            let split_cfg = split_args.config()?;
            let jobs = check_jobs(jobs)?;
            let trained = load_model(&model)?;
            let cfg = frame.config(trained.mode)?;
            if !trained.matches_features(&cfg) {
                return Err(SerError::ConfigMismatch);
            }
            let m = load_manifest(&manifest, &tokens)?;
            let part = select(&m.dataset, split, split_cfg)?;
            let vectors = extract_samples(&m, part.samples(), &cfg, jobs)?;
            let report = evaluate(&trained, part.samples(), &vectors, common_tag(part.samples()))?;
            let text = report.render();
            if let Some(target) = target {
                write_atomic(&target, text.as_bytes())?;
            }
            stdout(out, &text)
        }
        Command::Compare {
            manifest,
            tables,
            mode,
            strategy,
            frame,
            svm,
            split_args,
            jobs,
            out: target,
        } => {
            let features = frame.config(mode.into())?;
            let params = svm.params()?;
            let split = split_args.config()?;
            let jobs = check_jobs(jobs)?;
            if tables.is_empty() {
                return Err(SerError::Usage("--tables needs at least one table".into()));
            }
            let m = load_manifest(&manifest, &tokens)?;
            let cfg = CompareConfig {
                features,
                params,
                split,
                strategy: strategy.into(),
                jobs,
            };
            let result = compare(&m, &tables, &cfg)?;
            if let Some(target) = target {
                write_atomic(&target, result.csv().as_bytes())?;
            }
            stdout(out, &result.text())
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().ansi().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let SerError::Usage(_) = e {
                let _ = writeln!(err, "\nFor more information, try '--help'.");
            }
            e.exit_code()
        }
    }
}
