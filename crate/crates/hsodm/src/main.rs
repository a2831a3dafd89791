use std::path::PathBuf;

use clap::{Parser, Subcommand};

use hsodm::harness::{
    load_config, run_config, run_hilbert, run_krylov_table, run_minimize, AlgoKind, HilbertConfig,
    KrylovTableConfig, MinimizeConfig, ProblemKind,
};

#[derive(Parser)]
#[command(
    name = "hsodm",
    version,
    about = "Matrix-free second-order optimization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Krylov-iteration sweep on shifted Hilbert systems.
    Hilbert {
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Comma-separated diagonal shifts.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1e-5, 1e-7, 1e-9])]
        shifts: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Aggregate CSV output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Average-Krylov-iteration table on ridge normal equations.
    KrylovTable {
        /// LIBSVM dataset; defaults to $HSODM_DATA_DIR/a4a, then to a seeded
        /// collinear synthetic stand-in.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Comma-separated ridge weights.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1e-3, 1e-4, 1e-5, 1e-6])]
        gammas: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Aggregate CSV output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Minimize a test objective, tracing every iteration.
    Minimize {
        /// One of: logistic, lsq, balancing, quartic.
        #[arg(long)]
        problem: String,
        /// LIBSVM dataset for logistic/lsq; synthetic when absent.
        #[arg(long)]
        data: Option<PathBuf>,
        /// One of: adaptive, homotopy, inewton.
        #[arg(long)]
        algo: String,
        /// Gradient-norm termination target.
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
        /// Ridge weight for logistic/lsq.
        #[arg(long, default_value_t = 1e-3)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trace CSV output path; a JSON summary lands next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run experiments described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn dispatch(cli: Cli) -> hsodm::Result<()> {
    match cli.command {
        Command::Hilbert {
            n,
            shifts,
            samples,
            seed,
            out,
        } => {
            let cfg = HilbertConfig {
                n,
                shifts,
                samples,
                seed,
            };
            let rows = run_hilbert(&cfg, Some(&out))?;
            println!("wrote {} aggregate rows to {}", rows.len(), out.display());
        }
        Command::KrylovTable {
            data,
            gammas,
            samples,
            seed,
            out,
        } => {
            let cfg = KrylovTableConfig {
                data,
                gammas,
                samples,
                seed,
            };
            let rows = run_krylov_table(&cfg, Some(&out))?;
            println!("wrote {} aggregate rows to {}", rows.len(), out.display());
        }
        Command::Minimize {
            problem,
            data,
            algo,
            eps,
            gamma,
            seed,
            out,
        } => {
            let cfg = MinimizeConfig {
                problem: ProblemKind::parse(&problem)?,
                data,
                algo: AlgoKind::parse(&algo)?,
                eps,
                gamma,
                seed,
            };
            let outcome = run_minimize(&cfg, Some(&out))?;
            println!(
                "{problem}/{algo}: status={} f={:.6e} grad_norm={:.3e} rows={} -> {}",
                outcome.status,
                outcome.final_f,
                outcome.final_grad_norm,
                outcome.trace.len(),
                out.display()
            );
        }
        Command::Run { config } => {
            let cfg = load_config(&config)?;
            let written = run_config(&cfg)?;
            for path in written {
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}
