use clap::{Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use toeplab_cli::{catalog, run_config, summary, EXIT_ERROR, EXIT_PASS};

#[derive(Parser)]
#[command(
    name = "toeplab",
    version,
    about = "Berezin-Toeplitz experiments on model Kähler geometries"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for random test points.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Directory for the report and CSV files.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// List models, symbols and experiments.
    List,
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match cli.command {
        Command::List => {
            let _ = write!(out, "{}", catalog());
            EXIT_PASS
        }
        Command::Run { config, output } => match run_config(&config, output.as_deref(), cli.seed) {
            Ok((code, report, written)) => {
                let _ = write!(out, "{}", summary(&report));
                for p in written {
                    let _ = writeln!(out, "wrote {}", p.display());
                }
                code
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_ERROR
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    }
    let code = dispatch(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code as u8)
}
