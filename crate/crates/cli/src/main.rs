mod args;
mod commands;
mod error;
mod manifest;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use qcpd_core::experiments::Parallelism;

use args::{Cli, Command, Format, PipelineCommand};
use commands::Output;
use error::CliError;
use manifest::RunManifest;

fn execute(command: &Command, format: Format, cli: &Cli) -> Result<(), CliError> {
    let par = Parallelism::new(cli.threads)?;
    let started = Instant::now();
    let mut out = Output { dir: &cli.out, format, written: Vec::new() };
    match command {
        Command::Trial(a) => commands::trial_cmd(a, &mut out)?,
        Command::SweepK(a) => commands::sweep_k_cmd(a, &par, &mut out)?,
        Command::SweepOverlap(a) => commands::sweep_overlap_cmd(a, &par, &mut out)?,
        Command::SweepN(a) => commands::sweep_n_cmd(a, &par, &mut out)?,
        Command::Distances(a) => commands::distances_cmd(a, &par, &mut out)?,
        Command::Pipeline(PipelineCommand::Generate(a)) => commands::generate_cmd(a, &mut out)?,
        Command::Pipeline(PipelineCommand::Postselect(a)) => commands::postselect_cmd(a, &mut out)?,
        Command::Pipeline(PipelineCommand::Run(a)) => commands::stream_run_cmd(a, &par, &mut out)?,
        Command::Replay { manifest } => {
            let m = RunManifest::read(manifest)?;
            if matches!(m.command, Command::Replay { .. }) {
                return Err(CliError::Usage("a manifest cannot record a replay".into()));
            }
            return execute(&m.command, m.format, cli);
        }
    }
    let manifest = RunManifest {
        subcommand: command.name().into(),
        command: command.clone(),
        format,
        master_seed: command.master_seed(),
        version: env!("CARGO_PKG_VERSION").into(),
        threads: par.threads(),
        outputs: out.written,
        duration_secs: started.elapsed().as_secs_f64(),
    };
    let path = RunManifest::path_for(&cli.out, command.name());
    manifest.write(&path)?;
    eprintln!(
        "wrote {} (manifest {})",
        manifest.outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "),
        path.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command, cli.format, &cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
