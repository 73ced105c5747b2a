//! Command-line front end for the peprk library.

mod args;
mod commands;
mod output;
mod run;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "peprk", version, about = "Pseudo-energy-preserving Runge-Kutta methods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate rooted trees with σ, γ and energy-preserving conjugates.
    Trees(commands::TreesArgs),
    /// Derive order conditions for energy preservation.
    Conditions(commands::ConditionsArgs),
    /// Compute classical and PEP order of a method.
    Check(commands::CheckArgs),
    /// Inspect the built-in methods.
    Methods {
        #[command(subcommand)]
        command: commands::MethodsCommand,
    },
    /// Integrate a Hamiltonian test problem and report errors.
    Integrate(commands::IntegrateArgs),
    /// Convergence table at the final time.
    Eoc(commands::EocArgs),
    /// Long-time Duffing run with orbit classification.
    Duffing(commands::DuffingArgs),
    /// Solitary-wave run of the BBM equation.
    Bbm(commands::BbmArgs),
    /// Search for tableaus with given stages and orders.
    Search(commands::SearchArgs),
    /// Run a named experiment and write its data files.
    Run(run::RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("PEP_RK_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: PEP_RK_THREADS ignored: {e}");
        }
    }
    let result = match cli.command {
        Command::Trees(a) => commands::trees(a).map(|_| true),
        Command::Conditions(a) => commands::conditions(a).map(|_| true),
        Command::Check(a) => commands::check(a),
        Command::Methods { command } => commands::methods(command),
        Command::Integrate(a) => commands::integrate_cmd(a).map(|_| true),
        Command::Eoc(a) => commands::eoc(a).map(|_| true),
        Command::Duffing(a) => commands::duffing(a).map(|_| true),
        Command::Bbm(a) => commands::bbm(a).map(|_| true),
        Command::Search(a) => commands::search(a).map(|_| true),
        Command::Run(a) => run::run(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
