use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use concept_transfer::pipeline::{self, PipelineConfig, Stage};

#[derive(Parser)]
#[command(name = "ctransfer", version, about = "Concept transfer pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one stage (or `all`) of the pipeline.
    Run {
        /// synth, ingest, mine, registry, graph, features, dataset, train,
        /// evaluate, ablate, sensitivity, fields or all
        stage: String,
        #[arg(long, short)]
        config: PathBuf,
        /// Dotted-key override, e.g. `split.window=5`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Worker thread cap; overrides `threads` in the config.
        #[arg(long)]
        threads: Option<usize>,
        /// Re-run even when the stage manifest is up to date.
        #[arg(long)]
        force: bool,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let Command::Run {
        stage,
        config,
        overrides,
        threads,
        force,
    } = cli.command;
    let stage: Stage = stage.parse()?;
    let mut cfg = PipelineConfig::load(&config, &overrides)?;
    if threads.is_some() {
        cfg.threads = threads;
        cfg.validate()?;
    }
    let outcomes = pipeline::run(&cfg, stage, force).with_context(|| format!("stage {}", stage.as_str()))?;
    for o in outcomes {
        println!(
            "stage={} status={} outputs={}",
            o.stage.as_str(),
            if o.skipped { "cached" } else { "ran" },
            o.outputs.len()
        );
    }
    println!("run_dir={}", cfg.run_dir().display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = err
                .chain()
                .find_map(|e| e.downcast_ref::<concept_transfer::Error>())
                .map_or(1, pipeline::exit_code);
            let kind = match code {
                2 => "config",
                3 => "missing_artifact",
                _ => "runtime",
            };
            let reason = format!("{err:#}").replace(['\n', '\r'], " ");
            eprintln!("error kind={kind} exit={code} reason={reason}");
            ExitCode::from(code as u8)
        }
    }
}
