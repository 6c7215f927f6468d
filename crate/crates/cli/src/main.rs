use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use spv_cli::args::{Cli, Command};
use spv_cli::{cmd_render, cmd_score, cmd_study, cmd_video};

fn report_seed(seed: u64, drawn: bool) {
    if drawn {
        eprintln!("no --seed given; using seed {seed}");
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Render(args) => {
            let out = cmd_render(&args)?;
            report_seed(out.seed, out.seed_drawn);
            println!("{}", out.output.display());
            if let Some(d) = out.debug {
                println!("{}", d.display());
            }
        }
        Command::Video(args) => {
            let out = cmd_video(&args)?;
            report_seed(out.manifest.grid.seed, out.seed_drawn);
            println!(
                "{}: {} frames at {} fps",
                out.output.display(),
                out.manifest.frame_count,
                out.manifest.fps
            );
        }
        Command::Study(args) => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(cmd_study(&args))?;
        }
        Command::Score(args) => {
            let out = cmd_score(&args)?;
            print!("{}", out.report.to_text_table());
            eprintln!(
                "{} sessions scored, {} filtered out",
                out.sessions_used, out.sessions_skipped
            );
            for p in out.written {
                eprintln!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
