//! Command-line front end: exact coefficient tables, verification suites,
//! rotation demonstrations, and single-state exchange.
//!
//! Output on stdout is deterministic for fixed flags and seed; timing goes to
//! stderr. Exit codes: 0 all passed, 1 a verification failed, 2 usage error.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use spinstat::cgc::build_table;
use spinstat::exchange::{exchange, expected_sign};
use spinstat::half_int::HalfInt;
use spinstat::rng::SplitMix64;
use spinstat::rotations::{
    exchange_by_rotation_opposite_spin, exchange_by_rotation_same_spin,
    singlet_rotation_invariance, EulerRotation, SINGLET_TOLERANCE,
};
use spinstat::spin_space::TwoParticleState;
use spinstat::suites::{exit_code, run_cgc_suite, run_exchange_suite, run_rotation_suite, SuiteResult};

#[derive(Parser)]
#[command(
    name = "spinstat",
    version,
    about = "Exact spin algebra for two identical particles: coefficient tables, exchange-sign verification, rotation demos"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Cgc,
    Exchange,
    Rotation,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DemoCase {
    Same,
    Opposite,
    Singlet,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exact coefficient table coupling two equal spins
    Table {
        /// Twice the spin of each particle
        #[arg(long)]
        two_s: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run verification suites; nonzero exit on any failure
    Verify {
        /// Largest twice-spin included in the sweep
        #[arg(long, default_value_t = 8)]
        max_two_s: u32,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Random states per spin in the exchange suite
        #[arg(long, default_value_t = 25)]
        trials: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Show the sign a rotation-implemented exchange produces, or rotate the singlet
    DemoRotation {
        /// Twice the spin of each particle
        #[arg(long)]
        two_s: u32,
        /// Twice the projection; required for --case same and --case opposite
        #[arg(long, allow_negative_numbers = true)]
        two_m: Option<i64>,
        #[arg(long, value_enum)]
        case: DemoCase,
        /// Seed for sampled Euler angles (singlet case)
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Euler angles (z-y-z); sampled from --seed when omitted
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        gamma: Option<f64>,
    },
    /// Exchange the two particles of a serialized state
    Exchange {
        /// State JSON file; standard input when omitted
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn fmt_sign(sign: i8) -> &'static str {
    if sign >= 0 {
        "+1"
    } else {
        "-1"
    }
}

fn cmd_table(two_s: u32, format: Format) -> i32 {
    let table = build_table(two_s).expect("table builds for any two_s");
    match format {
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&table.to_json_value()).expect("serializes"));
        }
        Format::Text => {
            println!(
                "# s = {} (two_s = {}), condon-shortley convention, {} entries",
                table.pair().s(),
                two_s,
                table.entry_count()
            );
            for (c, u, amp) in table.entries_desc() {
                println!("j={} m={} | m1={} m2={} : {}", c.j, c.m, u.m1, u.m2, amp);
            }
        }
    }
    0
}

fn cmd_verify(max_two_s: u32, suite: Suite, seed: u64, trials: u32, format: Format) -> i32 {
    if trials == 0 {
        eprintln!("error: --trials must be at least 1");
        return 2;
    }
    let mut results: Vec<SuiteResult> = Vec::new();
    if matches!(suite, Suite::Cgc | Suite::All) {
        results.push(run_cgc_suite(max_two_s));
    }
    if matches!(suite, Suite::Exchange | Suite::All) {
        results.push(run_exchange_suite(max_two_s, trials, seed));
    }
    if matches!(suite, Suite::Rotation | Suite::All) {
        results.push(run_rotation_suite(max_two_s, seed));
    }
    for result in &results {
        eprintln!("# {} suite finished in {} ms", result.suite, result.duration_ms);
    }
    match format {
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&results).expect("serializes"));
        }
        Format::Text => {
            for result in &results {
                let status = if result.is_pass() { "pass" } else { "FAIL" };
                println!("{}: {} cases, {} failures [{}]", result.suite, result.cases, result.failures, status);
                for detail in &result.details {
                    println!("  - {detail}");
                }
            }
        }
    }
    exit_code(&results)
}

fn cmd_demo_rotation(
    two_s: u32,
    two_m: Option<i64>,
    case: DemoCase,
    seed: u64,
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
) -> i32 {
    match case {
        DemoCase::Same | DemoCase::Opposite => {
            let Some(two_m) = two_m else {
                eprintln!("error: --two-m is required for this case");
                return 2;
            };
            let m = HalfInt::from_twice(two_m);
            let computed = match case {
                DemoCase::Same => exchange_by_rotation_same_spin(two_s, m),
                _ => exchange_by_rotation_opposite_spin(two_s, m),
            };
            let phase = match computed {
                Ok(phase) => phase,
                Err(err) => {
                    eprintln!("error: {err}");
                    return 2;
                }
            };
            let expected = expected_sign(two_s);
            println!("phase = {}, expected (-1)^{{2s}} = {}", fmt_sign(phase), fmt_sign(expected));
            i32::from(phase != expected)
        }
        DemoCase::Singlet => {
            let rotation = if alpha.is_none() && beta.is_none() && gamma.is_none() {
                EulerRotation::sample(&mut SplitMix64::new(seed))
            } else {
                EulerRotation::new(alpha.unwrap_or(0.0), beta.unwrap_or(0.0), gamma.unwrap_or(0.0))
            };
            let verdict = singlet_rotation_invariance(two_s, rotation);
            println!(
                "rotation: alpha={:.6} beta={:.6} gamma={:.6}",
                rotation.alpha, rotation.beta, rotation.gamma
            );
            let relation = if verdict.is_invariant() { "<" } else { ">=" };
            println!(
                "max deviation {:.1e} {} {:.0e}; rotation sign {}",
                verdict.max_deviation,
                relation,
                SINGLET_TOLERANCE,
                fmt_sign(verdict.rotation_sign())
            );
            i32::from(!(verdict.is_invariant() && verdict.rotation_sign() == 1))
        }
    }
}

fn cmd_exchange(input: Option<PathBuf>) -> i32 {
    let text = match input {
        Some(path) => match std::fs::read_to_string(&path) {
            Ok(text) => text,
            Err(err) => {
                eprintln!("error: cannot read {}: {err}", path.display());
                return 2;
            }
        },
        None => {
            let mut buffer = String::new();
            if let Err(err) = std::io::stdin().read_to_string(&mut buffer) {
                eprintln!("error: cannot read standard input: {err}");
                return 2;
            }
            buffer
        }
    };
    let state: TwoParticleState = match serde_json::from_str(&text) {
        Ok(state) => state,
        Err(err) => {
            eprintln!("error: invalid state document: {err}");
            return 2;
        }
    };
    let table = build_table(state.two_s()).expect("table builds for any two_s");
    match exchange(&state, &table) {
        Ok(image) => {
            println!("{}", serde_json::to_string_pretty(&image).expect("serializes"));
            0
        }
        Err(err) => {
            eprintln!("error: exchange failed: {err}");
            1
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Table { two_s, format } => cmd_table(two_s, format),
        Command::Verify { max_two_s, suite, seed, trials, format } => {
            cmd_verify(max_two_s, suite, seed, trials, format)
        }
        Command::DemoRotation { two_s, two_m, case, seed, alpha, beta, gamma } => {
            cmd_demo_rotation(two_s, two_m, case, seed, alpha, beta, gamma)
        }
        Command::Exchange { input } => cmd_exchange(input),
    };
    ExitCode::from(code as u8)
}
