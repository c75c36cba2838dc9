//! `shapefit`: fit shapes and similarity transforms to signed-distance
//! samples, train the latent decoder, and run the benchmark suites.

mod commands;
mod params;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "shapefit",
    about = "Joint shape and similarity-transform estimation over latent SDF shape spaces",
    version
)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores). Results do
    /// not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the auto-decoder on a shape library (procedural by default).
    Train(commands::TrainArgs),
    /// Fit shape code and similarity transform to SDF samples.
    Fit(commands::FitArgs),
    /// Synthetic recovery benchmark over seeded scenarios.
    SynthBench(commands::SynthBenchArgs),
    /// Joint fit versus retrieve-and-register comparison suite.
    BaselineBench(commands::BaselineBenchArgs),
    /// Compact latent+matrix serialization and the compression study.
    #[command(subcommand)]
    Compress(commands::CompressCmd),
    /// Decode a latent code to a mesh.
    Extract(commands::ExtractArgs),
    /// F-score between two meshes.
    Fscore(commands::FscoreArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not configure {n} workers: {e}");
            std::process::exit(2);
        }
    }

    let result = match cli.command {
        Command::Train(args) => commands::train(args),
        Command::Fit(args) => commands::fit(args),
        Command::SynthBench(args) => commands::synth_bench(args),
        Command::BaselineBench(args) => commands::baseline_bench(args),
        Command::Compress(cmd) => commands::compress(cmd),
        Command::Extract(args) => commands::extract(args),
        Command::Fscore(args) => commands::fscore(args),
    };

    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(2);
    }
}
