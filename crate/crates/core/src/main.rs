use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use arith_euler::classical::integrate_demo;
use arith_euler::harness::{
    construct_flow_file, hasse_report, read_flow_file, resolve_out_dir, verify_flow, write_flow_file, RunConfig,
};
use arith_euler::Error;

#[derive(Parser)]
#[command(name = "arith-euler", version, about = "Arithmetic Euler flows mod p^N")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SystemArgs {
    #[arg(long, default_value_t = 5)]
    prime: u64,
    /// Comma-separated coefficients a1,a2,a3.
    #[arg(long, default_value = "0,1,2", value_parser = parse_triple_i64, allow_hyphen_values = true)]
    a: [i64; 3],
    /// Replace each a_i by the Teichmueller lift of its residue.
    #[arg(long)]
    teichmuller: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build the flow and write it as JSON.
    Construct {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 3)]
        precision: u32,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the check suite against a stored flow.
    Verify {
        file: PathBuf,
        /// Number of admissible level sets to sample.
        #[arg(long, default_value_t = 10)]
        specs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Also write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Hasse invariant facts and point-count checks.
    Hasse {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Integrate the classical flow over the reals.
    Demo {
        #[arg(long, default_value = "0,1,2", value_parser = parse_triple_f64, allow_hyphen_values = true)]
        a: [f64; 3],
        #[arg(long, default_value = "1,0.5,0.25", value_parser = parse_triple_f64, allow_hyphen_values = true)]
        x0: [f64; 3],
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Output directory for trajectory.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_triple<T: std::str::FromStr>(s: &str) -> Result<[T; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated values, got {s:?}"));
    }
    let parse = |x: &str| x.parse::<T>().map_err(|_| format!("cannot parse {x:?}"));
    Ok([parse(parts[0])?, parse(parts[1])?, parse(parts[2])?])
}

fn parse_triple_i64(s: &str) -> Result<[i64; 3], String> {
    parse_triple(s)
}

fn parse_triple_f64(s: &str) -> Result<[f64; 3], String> {
    parse_triple(s)
}

enum Failure {
    Checks,
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Construct { system, precision, out } => {
            let config = RunConfig {
                p: system.prime,
                precision,
                a: system.a,
                teichmuller: system.teichmuller,
                ..RunConfig::default()
            };
            let start = Instant::now();
            let (_, file) = construct_flow_file(&config)?;
            let dir = resolve_out_dir(out);
            std::fs::create_dir_all(&dir)?;
            let path = dir.join(format!("flow_p{}_N{}.json", config.p, config.precision));
            write_flow_file(&path, &file)?;
            eprintln!("constructed in {:.2?}", start.elapsed());
            println!("{}", path.display());
            if file.manifest.iter().all(|m| m.passed) {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
        Command::Verify {
            file,
            specs,
            seed,
            trials,
            report,
        } => {
            let flow = read_flow_file(&file)?;
            let config = RunConfig {
                p: flow.context().p(),
                precision: flow.context().precision(),
                specs,
                seed,
                trials,
                ..RunConfig::default()
            };
            let start = Instant::now();
            let result = verify_flow(&flow, &config);
            eprintln!("verified in {:.2?}", start.elapsed());
            print!("{}", result.render_text());
            if let Some(path) = report {
                let json = serde_json::to_string_pretty(&result).map_err(|e| Failure::Input(e.to_string()))?;
                std::fs::write(path, json + "\n")?;
            }
            if result.passed() {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
        Command::Hasse { system, trials, seed } => {
            let config = RunConfig {
                p: system.prime,
                precision: 1,
                a: system.a,
                teichmuller: system.teichmuller,
                trials,
                seed,
                ..RunConfig::default()
            };
            let report = hasse_report(&config)?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::Input(e.to_string()))?;
            println!("{json}");
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
        Command::Demo { a, x0, dt, steps, out } => {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Failure::Input(format!("dt must be positive, got {dt}")));
            }
            let traj = integrate_demo(a, x0, dt, steps);
            let dir = resolve_out_dir(out);
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("trajectory.csv");
            std::fs::write(&path, traj.to_csv())?;
            println!("{}", path.display());
            println!("max drift H1 {:.3e} H2 {:.3e}", traj.max_drift[0], traj.max_drift[1]);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
