//! `tqm`: quantized torus maps from the command line.
//!
//! Maps and symbols are JSON, given as a file path or inline:
//! `--map '{"g":[[2,1],[3,2]],"t":[{"num":0,"den":1},{"num":0,"den":1}]}'`,
//! `--symbol '[{"m":1,"n":0,"re":0.5,"im":0},{"m":-1,"n":0,"re":0.5,"im":0}]'`.

mod commands;
mod nlist;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use tqm_core::{AffineTorusMap, FourierSymbol, QuantizationScheme};

use nlist::NList;
use output::Format;

#[derive(Parser, Debug)]
#[command(name = "tqm", version, about = "Quantized symplectic maps of the 2-torus")]
struct Cli {
    /// Output format; sweeps default to csv, structured results to json.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for randomized constructions.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,

    /// Fail (nonzero exit) when a checked residual exceeds this value.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Worker threads for N-sweeps.
    #[arg(long, env = "TQM_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Quantizability and kernel-character predicates per level.
    Check {
        #[arg(long)]
        map: String,
        #[arg(long, default_value = "1-24")]
        n_list: NList,
    },
    /// Op_N(f) as a matrix.
    Quantize {
        #[arg(long)]
        symbol: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "toeplitz")]
        scheme: QuantizationScheme,
        /// Little-endian binary matrix dump.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Quantum propagator of a map.
    Propagate {
        #[arg(long)]
        map: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Egorov residuals ||U* Op(f) U - Op(f o chi)|| over an N-sweep.
    Egorov {
        #[arg(long)]
        map: String,
        #[arg(long)]
        symbol: String,
        #[arg(long, default_value = "32,64,128,256")]
        n_list: NList,
        #[arg(long, default_value = "toeplitz")]
        scheme: QuantizationScheme,
    },
    /// Eigenphases and form factors |Tr U^l|^2.
    Spectrum {
        #[arg(long)]
        map: String,
        #[arg(long, default_value = "16")]
        n_list: NList,
        #[arg(long, default_value_t = 20)]
        ell_max: u64,
    },
    /// Truncated pair-correlation sum.
    Paircorr {
        #[arg(long)]
        map: String,
        #[arg(long)]
        n: usize,
        /// JSON array of samples fhat(l/N), l = 0, 1, ...
        #[arg(long)]
        fhat: String,
        /// Cutoff L.
        #[arg(long)]
        cutoff: usize,
        /// Include the l = 0 term.
        #[arg(long)]
        include_zero: bool,
    },
    /// Star-product coefficients B_k(f, g), or V_k(f) when --map is given.
    Starprod {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: Option<String>,
        #[arg(long)]
        map: Option<String>,
        #[arg(long, default_value_t = 2)]
        orders: usize,
        #[arg(long, default_value = "64,96,128,192,256,384")]
        n_list: NList,
        #[arg(long, default_value = "toeplitz")]
        scheme: QuantizationScheme,
    },
    /// Diagonal matrix-element statistics in the propagator eigenbasis.
    Qe {
        #[arg(long)]
        map: String,
        #[arg(long)]
        symbol: String,
        #[arg(long, default_value = "64,256")]
        n_list: NList,
        #[arg(long, default_value = "toeplitz")]
        scheme: QuantizationScheme,
    },
}

fn load_map(arg: &str) -> Result<AffineTorusMap> {
    commands::load_json(arg, "map")
}

fn load_symbol(arg: &str) -> Result<FourierSymbol> {
    commands::load_json(arg, "symbol")
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring TQM_THREADS worker pool")?;
    }
    let seed = cli.seed;
    let (report, default_format) = match &cli.command {
        Command::Check { map, n_list } => (commands::check(&load_map(map)?, n_list.levels())?, Format::Csv),
        Command::Quantize { symbol, n, scheme, dump } => {
            (commands::quantize(&load_symbol(symbol)?, *n, *scheme, dump.as_deref())?, Format::Json)
        }
        Command::Propagate { map, n, dump } => {
            (commands::propagate(&load_map(map)?, *n, seed, cli.tol, dump.as_deref())?, Format::Json)
        }
        Command::Egorov { map, symbol, n_list, scheme } => (
            commands::egorov(&load_map(map)?, &load_symbol(symbol)?, n_list.levels(), *scheme, seed, cli.tol)?,
            Format::Csv,
        ),
        Command::Spectrum { map, n_list, ell_max } => {
            (commands::spectrum(&load_map(map)?, n_list.levels(), seed, *ell_max, cli.tol)?, Format::Csv)
        }
        Command::Paircorr { map, n, fhat, cutoff, include_zero } => {
            let samples: Vec<f64> = commands::load_json(fhat, "fhat")?;
            (commands::paircorr(&load_map(map)?, *n, &samples, *cutoff, *include_zero, seed)?, Format::Json)
        }
        Command::Starprod { f, g, map, orders, n_list, scheme } => {
            let f = load_symbol(f)?;
            let report = match (g, map) {
                (Some(g), None) => commands::starprod(&f, &load_symbol(g)?, *orders, n_list.levels())?,
                (None, Some(map)) => commands::conjugation(&load_map(map)?, &f, *orders, n_list.levels(), *scheme)?,
                _ => anyhow::bail!("starprod needs exactly one of --g (B_k) or --map (V_k)"),
            };
            (report, Format::Json)
        }
        Command::Qe { map, symbol, n_list, scheme } => {
            (commands::qe(&load_map(map)?, &load_symbol(symbol)?, n_list.levels(), *scheme, seed)?, Format::Csv)
        }
    };
    report.write(cli.format.unwrap_or(default_format), cli.out.as_deref())
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
