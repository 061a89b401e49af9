//! `rls`: file-level access to the rigid local system toolkit.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 malformed input,
//! 3 violated mathematical precondition.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use rls_core::convolution::{
    are_conjugate, jordan_profile, lambda2, middle_convolution, project_sl4_to_so6,
    project_sp4_to_so5, sym2, tensor, twist,
};
use rls_core::corpus::{run_case, CaseReport, Fixtures, CASES};
use rls_core::isogeny::{lift_class_so6_to_sl4, spin_class};
use rls_core::katz::{realize, reduce, replay};
use rls_core::localdata::is_cohomologically_rigid;
use rls_core::{
    ConstructionPlan, FormalLocalSystem, GroupFamily, GroupSpecTag, JordanClass, MonodromyTuple,
    RootOfUnity,
};

#[derive(Parser)]
#[command(
    name = "rls",
    version,
    about = "Exact computations with rigid local systems on the punctured line"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Input file (`-` or absent: stdin) and output file (absent: stdout).
#[derive(clap::Args)]
struct Io {
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
    #[arg(long = "out", value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Map {
    #[value(name = "sp4_so5")]
    Sp4So5,
    #[value(name = "sl4_so6")]
    Sl4So6,
}

#[derive(Clone, Copy, ValueEnum)]
enum Case {
    Dwork,
    So7,
    So7bis,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Jordan profile of a tuple.
    Jordan {
        #[command(flatten)]
        io: Io,
        /// Roots of unity searched for eigenvalues (default: from the entries).
        #[arg(long)]
        order: Option<u32>,
    },
    /// Euler characteristic and rigidity verdict of a profile in a group.
    Rigidity {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        assume_irreducible: bool,
    },
    /// Middle convolution.
    Mc {
        #[command(flatten)]
        io: Io,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
    },
    /// Kummer twist, e.g. `--scalars '{"0":"-1"}'`.
    Twist {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        scalars: String,
    },
    /// Tensor product with a second tuple on the same punctures.
    Tensor {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_name = "FILE")]
        with: PathBuf,
    },
    /// Symmetric square.
    Sym2 {
        #[command(flatten)]
        io: Io,
    },
    /// Exterior square.
    Lambda2 {
        #[command(flatten)]
        io: Io,
    },
    /// Isogeny projection `Sp4 -> SO5` or `SL4 -> SO6`.
    Project {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum)]
        map: Map,
    },
    /// Katz reduction of a rigid profile; writes the plan, prints the trace.
    Reduce {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_name = "FILE")]
        plan: Option<PathBuf>,
    },
    /// Runs a construction plan on matrices.
    Replay {
        #[arg(long, value_name = "FILE")]
        plan: PathBuf,
        #[arg(long = "out", value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// A tuple with the given rigid profile.
    Realize {
        #[command(flatten)]
        io: Io,
    },
    /// Both lifts of a class: spin representation of SO5/SO7, or SO6 -> SL4.
    Spin {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        group: String,
    },
    /// Conjugating matrix between two tuples, or `none`.
    Conjugate {
        #[arg(long, value_name = "FILE")]
        a: PathBuf,
        #[arg(long, value_name = "FILE")]
        b: PathBuf,
    },
    /// Runs the bundled worked examples and checks every expected value.
    #[command(visible_alias = "verify-paper")]
    VerifyExamples {
        #[arg(long, value_enum, default_value = "all")]
        case: Case,
        #[arg(long, value_name = "DIR")]
        fixtures_dir: Option<PathBuf>,
        /// Emit the reports as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

/// A computation that ran but whose verification failed.
#[derive(Debug)]
struct Mismatch;

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("verification mismatch")
    }
}

impl std::error::Error for Mismatch {}

/// Malformed command-line or file input.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input_err(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

fn read_text(path: Option<&Path>) -> anyhow::Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p)
            .map_err(|e| input_err(format!("cannot read {}: {e}", p.display()))),
        _ => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| input_err(format!("cannot read stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn read_json<T: DeserializeOwned>(path: Option<&Path>, what: &str) -> anyhow::Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| input_err(format!("invalid {what}: {e}")))
}

fn write_text(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n"))
            .with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}")?;
            Ok(())
        }
    }
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> anyhow::Result<()> {
    write_text(path, &serde_json::to_string_pretty(value)?)
}

fn tuple(io: &Io) -> anyhow::Result<MonodromyTuple> {
    read_json(io.input.as_deref(), "tuple")
}

fn profile(io: &Io) -> anyhow::Result<FormalLocalSystem> {
    read_json(io.input.as_deref(), "profile")
}

fn root(text: &str) -> anyhow::Result<RootOfUnity> {
    text.parse()
        .map_err(|e| input_err(format!("`{text}`: {e}")))
}

fn group(text: &str) -> anyhow::Result<GroupSpecTag> {
    text.parse()
        .map_err(|e| input_err(format!("`{text}`: {e}")))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Jordan { io, order } => {
            let t = tuple(&io)?;
            write_json(io.output.as_deref(), &jordan_profile(&t, order)?)
        }
        Command::Rigidity {
            io,
            group: g,
            assume_irreducible,
        } => {
            let f = profile(&io)?;
            let g = match g {
                Some(g) => group(&g)?,
                None => f.group,
            };
            let report = is_cohomologically_rigid(&f, &g, assume_irreducible)?;
            write_json(io.output.as_deref(), &report)
        }
        Command::Mc { io, lambda } => {
            let lambda = root(&lambda)?;
            let t = tuple(&io)?;
            write_json(io.output.as_deref(), &middle_convolution(&t, lambda)?)
        }
        Command::Twist { io, scalars } => {
            let raw: BTreeMap<String, String> = serde_json::from_str(&scalars)
                .map_err(|e| input_err(format!("invalid --scalars: {e}")))?;
            let scalars = raw
                .iter()
                .map(|(k, v)| Ok((k.clone(), root(v)?)))
                .collect::<anyhow::Result<_>>()?;
            let t = tuple(&io)?;
            write_json(io.output.as_deref(), &twist(&t, &scalars)?)
        }
        Command::Tensor { io, with } => {
            let a = tuple(&io)?;
            let b: MonodromyTuple = read_json(Some(&with), "tuple")?;
            write_json(io.output.as_deref(), &tensor(&a, &b)?)
        }
        Command::Sym2 { io } => write_json(io.output.as_deref(), &sym2(&tuple(&io)?)?),
        Command::Lambda2 { io } => write_json(io.output.as_deref(), &lambda2(&tuple(&io)?)?),
        Command::Project { io, map } => {
            let t = tuple(&io)?;
            let out = match map {
                Map::Sp4So5 => project_sp4_to_so5(&t)?,
                Map::Sl4So6 => project_sl4_to_so6(&t)?,
            };
            write_json(io.output.as_deref(), &out)
        }
        Command::Reduce { io, plan } => {
            let (p, trace) = reduce(&profile(&io)?)?;
            match plan {
                Some(path) => {
                    write_json(Some(&path), &p)?;
                    write_json(io.output.as_deref(), &trace)
                }
                None => write_json(
                    io.output.as_deref(),
                    &serde_json::json!({ "plan": p, "trace": trace }),
                ),
            }
        }
        Command::Replay { plan, output } => {
            let p: ConstructionPlan = read_json(Some(&plan), "plan")?;
            write_json(output.as_deref(), &replay(&p)?)
        }
        Command::Realize { io } => write_json(io.output.as_deref(), &realize(&profile(&io)?)?),
        Command::Spin { io, group: g } => {
            let g = group(&g)?;
            let c: JordanClass = read_json(io.input.as_deref(), "class")?;
            let result = match (g.family, g.size) {
                (GroupFamily::So, 6) => lift_class_so6_to_sl4(&c)?,
                (GroupFamily::So, m) if m % 2 == 1 => spin_class(&c, (m - 1) / 2)?,
                _ => {
                    return Err(input_err(format!(
                        "spin lifts are defined for SO5, SO6 and SO7, not {g}"
                    )))
                }
            };
            write_json(io.output.as_deref(), &result)
        }
        Command::Conjugate { a, b } => {
            let a: MonodromyTuple = read_json(Some(&a), "tuple")?;
            let b: MonodromyTuple = read_json(Some(&b), "tuple")?;
            match are_conjugate(&a, &b)? {
                Some(x) => write_json(None, &x),
                None => write_text(None, "none"),
            }
        }
        Command::VerifyExamples {
            case,
            fixtures_dir,
            json,
        } => {
            let fx = match fixtures_dir {
                Some(dir) if !dir.is_dir() => {
                    return Err(input_err(format!("{} is not a directory", dir.display())))
                }
                Some(dir) => Fixtures::from_dir(dir),
                None => Fixtures::bundled(),
            };
            let names: Vec<&str> = match case {
                Case::Dwork => vec!["dwork"],
                Case::So7 => vec!["so7"],
                Case::So7bis => vec!["so7bis"],
                Case::All => CASES.to_vec(),
            };
            let reports = run_cases(&names, &fx)?;
            if json {
                write_json(None, &reports)?;
            } else {
                let text: Vec<String> = reports.iter().map(CaseReport::to_text).collect();
                write_text(None, text.join("\n").trim_end())?;
            }
            if let Some(failure) = reports
                .iter()
                .filter_map(|r| r.failure.as_ref())
                .find(|f| f.input_error)
            {
                return Err(input_err(format!(
                    "step {}: {} ({})",
                    failure.step, failure.message, failure.code
                )));
            }
            if reports.iter().any(|r| !r.passed) {
                return Err(Mismatch.into());
            }
            Ok(())
        }
    }
}

/// Runs the cases concurrently; reports come back in the requested order.
fn run_cases(names: &[&str], fx: &Fixtures) -> anyhow::Result<Vec<CaseReport>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = names
            .iter()
            .map(|n| s.spawn(move || run_case(n, fx)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .map_err(|_| anyhow!("case thread panicked"))?
                    .map_err(Into::into)
            })
            .collect()
    })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Mismatch>().is_some() {
        return 1;
    }
    if err.downcast_ref::<InputError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<rls_core::Error>() {
        Some(e) if e.is_input_error() => 2,
        Some(_) => 3,
        None => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = exit_code(&err);
            match err.downcast_ref::<rls_core::Error>() {
                Some(e) => eprintln!("error [{}]: {e}", e.code()),
                None if code != 1 => eprintln!("error: {err:#}"),
                None => eprintln!("{err}"),
            }
            ExitCode::from(code)
        }
    }
}
