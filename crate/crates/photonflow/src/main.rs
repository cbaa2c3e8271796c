use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use photonflow::commands;
use photonflow::error::{code, CliError, CliResult};
use photonflow::Job;

#[derive(Parser)]
#[command(name = "photonflow", version, about = "Multi-photon pulse transfer through quantum linear systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Job configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the transfer engine.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the realization, passivity, stability and unitarity residual.
    Realize(Common),
    /// Transfer the configured pulse and write the output tensor.
    Transfer(Common),
    /// Output intensity trace as CSV.
    Intensity(Common),
    /// Output noise spectrum over the configured frequency grid as CSV.
    Spectrum(Common),
    /// Run the acceptance battery.
    Verify(Common),
}

fn run(cli: Cli) -> CliResult<()> {
    let (Command::Realize(common)
    | Command::Transfer(common)
    | Command::Intensity(common)
    | Command::Spectrum(common)
    | Command::Verify(common)) = &cli.command;
    if let Some(k) = common.threads {
        if k == 0 {
            return Err(CliError::validation("InvalidInput", "--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::validation("InvalidInput", e.to_string()))?;
    }
    let job = Job::load(&common.config)?;
    let out_dir = job.output_dir(common.out.as_deref());
    let text = match &cli.command {
        Command::Realize(_) => commands::realize_cmd(&job)?,
        Command::Transfer(_) => commands::transfer_cmd(&job, &out_dir)?,
        Command::Intensity(_) => commands::intensity_cmd(&job, &out_dir)?,
        Command::Spectrum(_) => commands::spectrum_cmd(&job, &out_dir)?,
        Command::Verify(_) => {
            let (text, ok) = commands::verify_cmd(&job)?;
            print!("{text}");
            return if ok { Ok(()) } else { Err(CliError::verify("acceptance battery failed")) };
        }
    };
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("bad arguments").trim_start_matches("error: ");
            eprintln!("{}", CliError::validation("Usage", first).line());
            return ExitCode::from(code::VALIDATION as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.code as u8)
        }
    }
}
