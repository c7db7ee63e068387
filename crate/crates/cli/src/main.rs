use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use emoface::emotion::Emotion;
use emoface::pipeline::{self, DsrnSelection, RunConfig};
use emoface::synth::{write_disk_corpus, DiskCorpusSpec};

#[derive(Parser)]
#[command(name = "emoface", version, about = "Emotion-dependent facial shape animation from speech")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML, or JSON with a .json extension).
    #[arg(long)]
    config: PathBuf,
    /// Override the run seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the cross-validation fold.
    #[arg(long)]
    fold: Option<usize>,
    /// Override the work directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> emoface::Result<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(f) = self.fold {
            cfg.fold = f;
        }
        if let Some(d) = &self.out_dir {
            cfg.paths.work_dir = d.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Extract features, fit the normalizer and shape model, write the fold plan.
    Prepare(Common),
    /// Train the emotion classifier.
    TrainDern(Common),
    /// Train shape regressors: one emotion, all seven, or the combined baseline.
    TrainDsrn {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "all_combined")]
        emotion: Option<String>,
        /// Train a single regressor on every emotion's data.
        #[arg(long)]
        all_combined: bool,
    },
    /// Accuracy and shape errors on the held-out test split.
    Evaluate(Common),
    /// Animate a WAV file with the trained models.
    Animate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        wav: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        fold: Option<usize>,
        /// Where landmarks.csv, params.csv, track.json and metadata.json go.
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        render_svg: bool,
    },
    /// Write a synthetic corpus (WAV, landmark CSV, manifest) and a starter config.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        speakers: usize,
        #[arg(long, default_value_t = 2)]
        per_emotion: usize,
    },
}

/// Small networks and short schedules so the synthetic demo trains in minutes.
fn starter_config(seed: u64) -> RunConfig {
    let mut cfg = RunConfig {
        seed,
        ..RunConfig::default()
    };
    cfg.dern.arch.conv_depths = [4, 8, 8];
    cfg.dern.arch.fc_units = 32;
    cfg.dern.train.epochs = 3;
    cfg.dsrn.arch.conv_depths = [4, 8, 8, 8];
    cfg.dsrn.arch.fc_units = [64, 32];
    cfg.dsrn.train.epochs = 3;
    cfg
}

fn print_json<T: serde::Serialize>(v: &T) -> emoface::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> emoface::Result<()> {
    match cli.command {
        Command::Prepare(c) => print_json(&pipeline::cmd_prepare(&c.load()?)?),
        Command::TrainDern(c) => {
            let m = pipeline::cmd_train_dern(&c.load()?)?;
            for e in &m.epochs {
                println!("dern epoch {} train {:.6} val {:?}", e.epoch, e.train_loss, e.val_loss);
            }
            println!("wrote {}", m.path.display());
            Ok(())
        }
        Command::TrainDsrn {
            common,
            emotion,
            all_combined,
        } => {
            let which = match (emotion, all_combined) {
                (_, true) => DsrnSelection::Combined,
                (Some(e), false) => DsrnSelection::One(e.parse::<Emotion>()?),
                (None, false) => DsrnSelection::AllEmotions,
            };
            for m in pipeline::cmd_train_dsrn(&common.load()?, which)? {
                if let Some(last) = m.epochs.last() {
                    println!("{} final train {:.6} val {:?}", m.name, last.train_loss, last.val_loss);
                }
                println!("wrote {}", m.path.display());
            }
            Ok(())
        }
        Command::Evaluate(c) => print_json(&pipeline::cmd_evaluate(&c.load()?)?),
        Command::Animate {
            config,
            wav,
            seed,
            fold,
            out_dir,
            render_svg,
        } => {
            let common = Common {
                config,
                seed,
                fold,
                out_dir: None,
            };
            let meta = pipeline::cmd_animate(&common.load()?, &wav, &out_dir, render_svg)?;
            print_json(&meta)
        }
        Command::Synth {
            out_dir,
            seed,
            speakers,
            per_emotion,
        } => {
            let spec = DiskCorpusSpec {
                speakers,
                per_emotion_per_speaker: per_emotion,
                seed,
                ..DiskCorpusSpec::default()
            };
            let records = write_disk_corpus(&out_dir, &spec)?;
            let cfg_path = out_dir.join("emoface.toml");
            std::fs::write(&cfg_path, starter_config(seed).to_toml()?)
                .map_err(|e| emoface::Error::Config(format!("{}: {e}", cfg_path.display())))?;
            println!("wrote {} utterances and {}", records.len(), cfg_path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("emoface: error: {e}");
            ExitCode::FAILURE
        }
    }
}
