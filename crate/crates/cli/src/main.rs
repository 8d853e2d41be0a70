//! `voronoigram`: data generation, fitting, limit constants, sweeps and
//! rendering from the command line.
//!
//! Formats:
//! * data CSV: header `x,y,response`, one design point per row;
//! * graph text: `n m` then `m` lines `i j w` with 1-based node indices;
//! * values: numbers separated by whitespace or commas, `#` comments;
//! * fit JSON: weighting scheme, `lambda`, `theta`, `labels`, `K`,
//!   `fuse_tol`, solver diagnostics;
//! * run config JSON: every experiment setting, all optional; a run manifest
//!   is accepted wherever a config is, so a run can be repeated from it.
//!
//! Errors are reported on stderr as one JSON object
//! `{"error": {"kind", "message", "context"}}` with a nonzero exit code.

mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use commands::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "voronoigram",
    version,
    about = "Graph total variation denoising on Voronoi adjacency graphs"
)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, env = "VORONOIGRAM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GraphArg {
    /// Voronoi adjacency with facet-length weights.
    Voronoi,
    /// Voronoi adjacency with unit weights.
    VoronoiUnit,
    /// Voronoi adjacency with weights floored at c0 / sqrt(n).
    VoronoiClipped,
    /// Unit weights for pairs within --eps.
    Eps,
    /// Symmetrized k-nearest-neighbour graph with unit weights.
    Knn,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a design and noisy responses of the ball indicator; writes a data CSV.
    GenData {
        /// uniform, lowtube or hightube.
        #[arg(long)]
        model: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Signal-to-noise ratio Var(f0(X)) / sigma^2.
        #[arg(long, default_value_t = 1.0)]
        snr: f64,
        /// Write f0 itself as the response.
        #[arg(long)]
        noiseless: bool,
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Graph TV denoising of a data CSV; writes fit JSON and optionally SVG.
    Fit {
        #[arg(long, value_enum)]
        graph: GraphArg,
        #[arg(long)]
        lambda: f64,
        #[arg(long = "in")]
        input: std::path::PathBuf,
        #[arg(long)]
        out: std::path::PathBuf,
        /// Radius for --graph eps (default from the config constants).
        #[arg(long)]
        eps: Option<f64>,
        /// Neighbours for --graph knn (default from the config constants).
        #[arg(long)]
        k: Option<usize>,
        /// Clipping constant for --graph voronoi-clipped.
        #[arg(long, default_value_t = 1.0)]
        c0: f64,
        /// Run config supplying graph constants and solver options.
        #[arg(long)]
        config: Option<std::path::PathBuf>,
        #[arg(long)]
        svg: Option<std::path::PathBuf>,
    },
    /// Discrete TV of node values on a stored graph; prints JSON.
    Dtv {
        #[arg(long)]
        graph: std::path::PathBuf,
        #[arg(long)]
        values: std::path::PathBuf,
    },
    /// Limit constants c_d and sigma_eps in dimension d; prints JSON.
    Constants {
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// DTV of the truth on Voronoi, eps and kNN graphs over n and repetitions.
    SweepTv(commands::SweepArgs),
    /// Risk against degrees of freedom along the lambda grid for each estimator.
    SweepMse(commands::SweepArgs),
    /// Render a stored fit over its data as SVG.
    Render {
        #[arg(long = "in")]
        input: std::path::PathBuf,
        #[arg(long)]
        fit: std::path::PathBuf,
        #[arg(long)]
        out: std::path::PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(t) = cli.threads {
        commands::set_threads(t)?;
    }
    match cli.command {
        Command::GenData {
            model,
            n,
            seed,
            snr,
            noiseless,
            out,
        } => commands::gen_data(&model, n, seed, snr, noiseless, &out),
        Command::Fit {
            graph,
            lambda,
            input,
            out,
            eps,
            k,
            c0,
            config,
            svg,
        } => commands::fit(commands::FitArgs {
            graph,
            lambda,
            input,
            out,
            eps,
            k,
            c0,
            config,
            svg,
        }),
        Command::Dtv { graph, values } => commands::dtv(&graph, &values),
        Command::Constants { d } => commands::constants(d),
        Command::SweepTv(args) => commands::sweep_tv(&args),
        Command::SweepMse(args) => commands::sweep_mse(&args),
        Command::Render { input, fit, out } => commands::render(&input, &fit, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            commands::report(&CliError::usage(e.to_string()));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            commands::report(&CliError::from(e));
            ExitCode::FAILURE
        }
    }
}
