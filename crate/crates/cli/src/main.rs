use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ric_cli::commands::{
    run_check, run_corrupt, run_dod, run_eval, run_gen_data, run_sample, run_train, CheckArgs,
    CorruptArgs, DodArgs, EvalArgs, GenDataArgs, SampleArgs, TrainArgs,
};

/// Generative modeling of Laman graphs via validity-preserving edit chains:
/// dataset generation, training, chain sampling, rigidity checks, and
/// evaluation. Logging level comes from the RIC_LOG environment variable
/// (error, warn, info, debug).
#[derive(Parser)]
#[command(name = "ric", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic Laman graph dataset.
    GenData(GenDataArgs),
    /// Train the reconstruction model on a dataset.
    Train(TrainArgs),
    /// Sample graphs by running corrupt/reconstruct chains.
    Sample(SampleArgs),
    /// Print a Laman verdict per input graph.
    Check(CheckArgs),
    /// Print the decomposability ratio per input graph.
    Dod(DodArgs),
    /// Emit corruption traces for input graphs.
    Corrupt(CorruptArgs),
    /// Compare samples to a reference dataset and write a report.
    Eval(EvalArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RIC_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GenData(args) => run_gen_data(args),
        Command::Train(args) => run_train(args),
        Command::Sample(args) => run_sample(args),
        Command::Check(args) => run_check(args),
        Command::Dod(args) => run_dod(args),
        Command::Corrupt(args) => run_corrupt(args),
        Command::Eval(args) => run_eval(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
