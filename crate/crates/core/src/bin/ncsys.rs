//! Command-line front end: batch automorphism operations, family tables,
//! verification suites and the separation search.
//!
//! All randomness flows from `--seed`, and output ordering is canonical, so
//! runs are byte-reproducible. Exit codes: 0 success, 1 verification failure
//! or inconclusive search, 2 usage or schema error.

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ncsys::autgroup::exp_derivation;
use ncsys::error::Error;
use ncsys::ncs::verify::{ncs_suite_on, run_suite_on, Suite, SuiteGrid};
use ncsys::ncs::{separate, SeparateBudget, SeparateOutcome, VerifyReport};
use ncsys::nsym::solve_pi;
use ncsys::wire;
use ncsys::DEFAULT_SEED;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Parser)]
#[command(
    name = "ncsys",
    version,
    about = "Exact truncated-series algebra: formal automorphisms, their operator \
             families, free symmetric-function families and verification suites"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Maximum variable count of the verification grid
    #[arg(long, global = true, default_value_t = 3)]
    n: usize,

    /// Run the separation search over commutative variables
    #[arg(long, global = true)]
    commutative: bool,

    /// Displacement level for the separation search (must be >= 2)
    #[arg(long, global = true, default_value_t = 2)]
    alpha: u32,

    /// z-degree truncation bound of the verification grid
    #[arg(long, global = true, default_value_t = 6)]
    nz: u32,

    /// t-degree truncation bound of the verification grid
    #[arg(long, global = true, default_value_t = 4)]
    nt: u32,

    /// Weight truncation bound for the family tables
    #[arg(long, global = true, default_value_t = 6)]
    nw: u32,

    /// Master seed for every randomized operation
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Trials per configuration case in verification suites
    #[arg(long, global = true, default_value_t = 20)]
    trials: u32,

    /// Lift the cost guards on truncation bounds
    #[arg(long, global = true)]
    override_guards: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Invert an automorphism (JSON document in, JSON document out)
    Invert {
        /// Input path, or `-` for stdin
        #[arg(long)]
        input: PathBuf,
    },
    /// Compute the derivation logarithm of an automorphism
    Dlog {
        #[arg(long)]
        input: PathBuf,
    },
    /// Exponentiate a derivation-logarithm document back to an automorphism
    Exp {
        #[arg(long)]
        input: PathBuf,
    },
    /// Compose two automorphisms: output = input . with (input applied last)
    Compose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        with: PathBuf,
    },
    /// Print the solved family tables up to the weight bound
    Nsym {
        /// Restrict to one family
        #[arg(long, value_enum)]
        basis: Option<Basis>,
    },
    /// Run a verification suite; exit code 1 on any failing check
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Negative-control hook: perturb each system before checking
        #[arg(long, hide = true)]
        tamper: bool,
    },
    /// Search for a specialization separating a nonzero element from zero
    Separate {
        /// Element document (`{"max_weight": ..., "terms": [...]}`), or `-`
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_n: usize,
        #[arg(long, default_value_t = 200)]
        attempts: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Basis {
    S,
    Phi,
    Psi,
    Xi,
}

fn read_input(path: &PathBuf) -> Result<String, Error> {
    if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::Schema(format!("stdin: {e}")))?;
        Ok(buf)
    } else {
        fs::read_to_string(path)
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
    }
}

fn parse_json<'a, T: serde::Deserialize<'a>>(s: &'a str) -> Result<T, Error> {
    serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))
}

fn emit_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("documents serialize"));
}

fn print_vector(label: &str, v: &ncsys::series::SeriesVector) {
    for (i, comp) in v.iter().enumerate() {
        println!("{label}{} = {comp}", i + 1);
    }
}

fn print_report(report: &VerifyReport, format: Format) {
    match format {
        Format::Json => emit_json(&wire::report_to_doc(report)),
        Format::Text => {
            for entry in &report.entries {
                if entry.pass {
                    println!("PASS {}", entry.check);
                } else {
                    match &entry.counterexample {
                        Some(ce) => println!("FAIL {} [{ce}]", entry.check),
                        None => println!("FAIL {}", entry.check),
                    }
                }
            }
            let failed = report.entries.iter().filter(|e| !e.pass).count();
            println!(
                "{}: {} checks, {} failed",
                if failed == 0 { "ok" } else { "FAILED" },
                report.entries.len(),
                failed
            );
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.cmd {
        Cmd::Invert { input } => {
            let doc: wire::AutomorphismDoc = parse_json(&read_input(&input)?)?;
            let aut = wire::doc_to_automorphism(&doc)?;
            let inv = aut.invert();
            match cli.format {
                Format::Json => emit_json(&wire::automorphism_to_doc(&inv)),
                Format::Text => print_vector("F", &inv.f_vector()),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Dlog { input } => {
            let doc: wire::AutomorphismDoc = parse_json(&read_input(&input)?)?;
            let aut = wire::doc_to_automorphism(&doc)?;
            let dlog = aut.dlog();
            match cli.format {
                Format::Json => emit_json(&wire::dlog_to_doc(&dlog)),
                Format::Text => print_vector("a", dlog.coeffs()),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Exp { input } => {
            let doc: wire::DLogDoc = parse_json(&read_input(&input)?)?;
            let dlog = wire::doc_to_dlog(&doc)?;
            let aut = exp_derivation(&dlog);
            match cli.format {
                Format::Json => emit_json(&wire::automorphism_to_doc(&aut)),
                Format::Text => print_vector("F", &aut.f_vector()),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Compose { input, with } => {
            let a: wire::AutomorphismDoc = parse_json(&read_input(&input)?)?;
            let b: wire::AutomorphismDoc = parse_json(&read_input(&with)?)?;
            let composed =
                wire::doc_to_automorphism(&a)?.compose(&wire::doc_to_automorphism(&b)?)?;
            match cli.format {
                Format::Json => emit_json(&wire::automorphism_to_doc(&composed)),
                Format::Text => print_vector("F", &composed.f_vector()),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Nsym { basis } => {
            if cli.nw > 12 && !cli.override_guards {
                return Err(Error::GuardExceeded(format!(
                    "weight bound {} > 12 makes the tables large",
                    cli.nw
                )));
            }
            let pi = solve_pi(cli.nw);
            let families: Vec<(Basis, &str)> = match basis {
                Some(b) => vec![(b, basis_label(b))],
                None => vec![
                    (Basis::S, basis_label(Basis::S)),
                    (Basis::Phi, basis_label(Basis::Phi)),
                    (Basis::Psi, basis_label(Basis::Psi)),
                    (Basis::Xi, basis_label(Basis::Xi)),
                ],
            };
            match cli.format {
                Format::Text => {
                    for (family, label) in &families {
                        for m in 1..=cli.nw {
                            println!("{label}_{m} = {}", family_elem(&pi, *family, m));
                        }
                    }
                }
                Format::Json => {
                    let mut table: Vec<serde_json::Value> = Vec::new();
                    for (family, label) in &families {
                        for m in 1..=cli.nw {
                            table.push(serde_json::json!({
                                "family": label,
                                "m": m,
                                "element": wire::nsym_to_doc(&family_elem(&pi, *family, m)),
                            }));
                        }
                    }
                    emit_json(&table);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { suite, tamper } => {
            let suite: Suite = suite.parse()?;
            let grid = SuiteGrid {
                max_n: cli.n,
                max_z_degree: cli.nz,
                max_t_degree: cli.nt,
            };
            if (grid.max_n > 4 || grid.max_z_degree > 8 || grid.max_t_degree > 8)
                && !cli.override_guards
            {
                return Err(Error::GuardExceeded(
                    "verification grid beyond n=4, nz=8, nt=8".into(),
                ));
            }
            let report = if tamper {
                ncs_suite_on(cli.seed, cli.trials, true, &grid)
            } else {
                run_suite_on(suite, cli.seed, cli.trials, &grid)
            };
            print_report(&report, cli.format);
            Ok(if report.pass() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Separate { input, max_n, attempts } => {
            if cli.alpha < 2 {
                return Err(Error::AlphaTooSmall(cli.alpha));
            }
            let doc: wire::NSymDoc = parse_json(&read_input(&input)?)?;
            let p = wire::doc_to_nsym(&doc)?;
            let budget = SeparateBudget { max_n, attempts, seed: cli.seed };
            let outcome = separate(&p, &budget, cli.commutative)?;
            match cli.format {
                Format::Json => emit_json(&wire::separate_outcome_to_doc(&outcome)),
                Format::Text => match &outcome {
                    SeparateOutcome::Witness(w) => {
                        println!(
                            "witness: n = {}, attempt {} of {}",
                            w.n(),
                            w.attempts_used,
                            attempts
                        );
                        print_vector("H", w.automorphism.h());
                        println!("monomial = {}", w.monomial);
                        println!("value = {}", w.value);
                    }
                    SeparateOutcome::Exhausted { attempts } => {
                        println!("inconclusive after {attempts} attempts (not a disproof)");
                    }
                },
            }
            Ok(match outcome {
                SeparateOutcome::Witness(_) => ExitCode::SUCCESS,
                SeparateOutcome::Exhausted { .. } => ExitCode::from(1),
            })
        }
    }
}

fn basis_label(b: Basis) -> &'static str {
    match b {
        Basis::S => "S",
        Basis::Phi => "Phi",
        Basis::Psi => "Psi",
        Basis::Xi => "Xi",
    }
}

fn family_elem(pi: &ncsys::nsym::PiSystem, b: Basis, m: u32) -> ncsys::nsym::NSymElem {
    match b {
        Basis::S => pi.s_m(m),
        Basis::Phi => pi.phi_m(m),
        Basis::Psi => pi.psi_m(m),
        Basis::Xi => pi.xi_m(m),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
