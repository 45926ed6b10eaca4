mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "reciprocal",
    version,
    about = "Invariance sweeps and transforms on extended phase space"
)]
struct Cli {
    /// Seed for random sweeps (xoshiro256++ seeded through splitmix64).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    output: Option<Format>,

    /// Pass/fail tolerance, overriding the command default.
    #[arg(long, global = true, env = "RECIPROCAL_TOL")]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
struct Scales {
    /// Speed scale.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Force scale.
    #[arg(long, default_value_t = 1.0)]
    b: f64,
}

#[derive(Debug, Args, Clone, Copy)]
struct State {
    /// Velocity.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    v: f64,
    /// Force.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    f: f64,
    /// Power.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    r: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Group law, commutator table and automorphism sweeps.
    Wh {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 500)]
        automorphisms: usize,
        #[arg(long, default_value_t = 100)]
        perturbations: usize,
        /// Largest dimension n sampled.
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=8))]
        max_n: u64,
    },
    /// Line elements, causal class and time dilation of a displacement.
    Metric {
        #[command(flatten)]
        scales: Scales,
        #[command(flatten)]
        state: State,
        /// Displacement dt,dq,de,dp (canonical order).
        #[arg(long, allow_hyphen_values = true)]
        d: String,
    },
    /// Apply the n = 1 transformation for (v, f, r) to a displacement.
    Transform {
        #[command(flatten)]
        scales: Scales,
        #[command(flatten)]
        state: State,
        /// Displacement dt,dq,de,dp (canonical order, not t,q,p,e).
        #[arg(long, allow_hyphen_values = true)]
        d: String,
        /// Random displacements for the invariance residual.
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Sample the null cone v²/c² + f²/b² = 1 + r²/(c²b²).
    Nullcone {
        #[command(flatten)]
        scales: Scales,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        r: f64,
        #[arg(long, default_value_t = 16)]
        count: usize,
    },
    /// Contraction sweeps in b (Born to Minkowski) and c (Minkowski to Newton).
    Contract {
        #[command(flatten)]
        state: State,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, value_delimiter = ',', default_value = "1e2,1e3,1e4,1e5")]
        b_values: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1e1,1e2,1e3,1e4")]
        c_values: Vec<f64>,
        /// Displacement dt,dq,de,dp for the line-element sweeps.
        #[arg(long, allow_hyphen_values = true, default_value = "1,0.5,0.8,0.3")]
        d: String,
    },
    /// Planck scales from {c, b, hbar} or {c, G, hbar}; CODATA by default.
    Planck {
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        hbar: Option<f64>,
        #[arg(long, conflicts_with = "g")]
        b: Option<f64>,
        #[arg(long = "G", id = "g")]
        g: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        alpha_g: f64,
    },
    /// Hamiltonian flow checks.
    Hamilton {
        #[command(subcommand)]
        action: HamiltonAction,
    },
}

#[derive(Debug, Subcommand)]
enum HamiltonAction {
    /// Check that a flow Jacobian preserves ω and dt and carries Hamilton's equations.
    Verify {
        #[arg(long, value_enum, required_unless_present = "file", conflicts_with = "file")]
        system: Option<SystemArg>,
        /// JSON polynomial: {"a,b,c": k} for k pᵃ qᵇ tᶜ.
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        q: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        e: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        p: f64,
        /// Elapsed time for the symplectic check.
        #[arg(long, default_value_t = 1.0)]
        t1: f64,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        /// Finite-difference step.
        #[arg(long, default_value_t = 1e-5)]
        h: f64,
        /// Short interval for reading off the generator.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SystemArg {
    Zero,
    Free,
    Harmonic,
    Driven,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            match outcome.failure {
                None => ExitCode::SUCCESS,
                Some(msg) => {
                    eprintln!("check failed: {msg}");
                    ExitCode::from(1)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
