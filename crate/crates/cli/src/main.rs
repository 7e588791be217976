mod args;
mod commands;
mod manifest;

use clap::Parser;
use std::process::ExitCode;
use std::time::Instant;

use srrwave::config::{parse_config, RunConfig};

use args::Cli;
use commands::Artifacts;
use manifest::{Manifest, Status};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create {}: {e}", cli.out.display());
        return ExitCode::FAILURE;
    }
    let start = Instant::now();
    let mut manifest = Manifest::new(cli.command.name(), std::env::args().collect());
    let mut artifacts = Artifacts::new(&cli.out);

    let result = load(&cli).and_then(|cfg| {
        manifest.record_config(&cli, &cfg)?;
        commands::run(&cli.command, &cfg, &mut artifacts)
    });
    let status = match &result {
        Ok(summary) => {
            println!("{summary}");
            Status::Ok
        }
        Err(e) => {
            eprintln!("error: {e}");
            Status::Failed(e.to_string())
        }
    };
    manifest.finish(&cli.out, &artifacts.files, status, start.elapsed().as_secs_f64());
    if let Err(e) = manifest.write(&cli.out) {
        eprintln!("error: cannot write the manifest: {e}");
        return ExitCode::FAILURE;
    }
    if result.is_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn load(cli: &Cli) -> srrwave::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(path)?,
        None => RunConfig::default(),
    };
    cli.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}
