use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use reeb_grader::cli::{parse_config, run, OutputFormat};

/// Graded ranks of cylindrical contact homology for circle (orbi)bundles.
#[derive(Parser)]
#[command(name = "reeb-grader", version, about)]
struct Args {
    /// Config file; `-` reads from stdin.
    #[arg(long)]
    config: PathBuf,

    /// Compute past a failed well-definedness gate (result is not an
    /// invariant).
    #[arg(long)]
    override_gate: bool,

    /// Output format: table or records (overrides the config).
    #[arg(long)]
    format: Option<OutputFormat>,

    /// Write output to a file instead of stdout (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("REEB_GRADER_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: REEB_GRADER_THREADS must be a positive integer");
                return ExitCode::from(1);
            }
        }
    }

    let args = Args::parse();
    let text = if args.config.as_os_str() == "-" {
        let mut buf = String::new();
        if let Err(e) = std::io::stdin().read_to_string(&mut buf) {
            eprintln!("error: failed to read stdin: {e}");
            return ExitCode::from(1);
        }
        buf
    } else {
        match std::fs::read_to_string(&args.config) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", args.config.display());
                return ExitCode::from(1);
            }
        }
    };

    let mut config = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if args.override_gate {
        config.override_gate = true;
    }
    if let Some(f) = args.format {
        config.format = f;
    }
    if let Some(out) = args.out {
        config.out = Some(out);
    }

    let code = run(&config, &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(code as u8)
}
