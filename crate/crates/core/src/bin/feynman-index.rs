use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use feynman_index::io::{run, Command, ExperimentConfig};

/// Overrides `--out` when set.
const OUT_ENV: &str = "FEYNMAN_INDEX_OUT";

#[derive(Parser, Debug)]
#[command(name = "feynman-index", version, about = "Run spectral, index and distribution checks from a JSON config")]
struct Cli {
    /// eta, xi, index, propagator-check, dist-check, hadamard or full-suite
    command: String,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Command::parse(&cli.command).and_then(|cmd| {
        let cfg = ExperimentConfig::load(&cli.config)?;
        let report = run(cmd, &cfg, cli.seed)?;
        let out = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or(cli.out);
        report.write(&out)?;
        Ok((report, out))
    });
    match result {
        Ok((report, out)) => {
            for c in &report.checks {
                if !c.pass {
                    eprintln!("FAIL {}", c.name);
                }
            }
            let failed = report.checks.iter().filter(|c| !c.pass).count();
            println!("{} checks, {} failed; report in {}", report.checks.len(), failed, out.display());
            if report.pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("{}: {e}", e.code());
            ExitCode::from(2)
        }
    }
}
