//! Command-line front end.
//!
//! Exit codes: 0 success, 1 domain failure (invalid network, rejected edit,
//! differing files), 2 usage or parse failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::audit::AssessmentReport;
use crate::cost::{assessment_cost, curves_csv, ratio_curves, Case, CostQuery, Role};
use crate::diff::diff_networks;
use crate::format::{network_from_json, network_to_json};
use crate::maintenance::{apply_script, parse_script};
use crate::network::validate_with_tolerance;
use crate::network::{Network, EPSILON};
use crate::oracle::{joint_distribution_capped, DEFAULT_CAP};

/// Environment variable overriding the oracle's joint-size cap.
pub const JOINT_CAP_ENV: &str = "KBMAINT_JOINT_CAP";

/// Largest number of values a `--m-range`/`--k-range` may expand to.
pub const MAX_RANGE_LEN: usize = 10_000;

#[derive(Debug, Parser)]
#[command(name = "kbmaint", version, about = "Maintain discrete Bayesian-network knowledge bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a network file; prints one finding per line.
    Validate {
        file: PathBuf,
        /// Row-sum tolerance.
        #[arg(long, default_value_t = EPSILON)]
        tolerance: f64,
    },
    /// Apply a change script and write the result only if every op succeeds.
    Apply {
        network: PathBuf,
        script: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Also write the per-node report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Assessment counts for one special case.
    Cost(CostArgs),
    /// Ratio curves as CSV.
    Curves {
        #[arg(long)]
        case: Option<Case>,
        #[arg(long)]
        role: Option<Role>,
        #[arg(long, default_value = "1-6", value_parser = parse_value_list)]
        m_range: ValueList,
        #[arg(long, default_value = "1-10", value_parser = parse_value_list)]
        k_range: ValueList,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Structural and numeric differences between two network files.
    Diff { a: PathBuf, b: PathBuf },
    #[command(hide = true, subcommand)]
    Oracle(OracleCommand),
}

#[derive(Debug, Args)]
struct CostArgs {
    #[arg(long)]
    case: Case,
    #[arg(long)]
    role: Role,
    #[arg(long, default_value_t = 2)]
    m: u64,
    #[arg(long, default_value_t = 1)]
    k: u64,
    /// Successor outcome count; defaults to 2 for the successor role.
    #[arg(long)]
    p: Option<u64>,
    /// Conditioning-set outcome counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    radices: Vec<usize>,
}

#[derive(Debug, Subcommand)]
enum OracleCommand {
    /// Dump the full joint distribution as CSV.
    Joint { file: PathBuf },
}

#[derive(Debug, Clone)]
struct ValueList(Vec<u64>);

fn parse_value_list(s: &str) -> Result<ValueList, String> {
    parse_range(s).map(ValueList)
}

/// Parses `"3"`, `"1-6"` or `"1,2,5"` (pieces may mix: `"1-3,8"`).
pub fn parse_range(s: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for piece in s.split(',') {
        let piece = piece.trim();
        let (lo, hi) = match piece.split_once('-') {
            Some((a, b)) => (parse_u64(a)?, parse_u64(b)?),
            None => {
                let v = parse_u64(piece)?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(format!("empty range `{piece}`"));
        }
        if (hi - lo) as u128 + 1 + out.len() as u128 > MAX_RANGE_LEN as u128 {
            return Err(format!("range expands to more than {MAX_RANGE_LEN} values"));
        }
        out.extend(lo..=hi);
    }
    Ok(out)
}

fn parse_u64(s: &str) -> Result<u64, String> {
    s.trim().parse().map_err(|_| format!("`{s}` is not a non-negative integer"))
}

enum Failure {
    Domain(String),
    Usage(String),
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Network, Failure> {
    let text = read(path)?;
    network_from_json(&text).map_err(|e| match e.position() {
        Some((line, col)) => Failure::Usage(format!("{}:{line}:{col}: {e}", path.display())),
        None => Failure::Usage(format!("{}: {e}", path.display())),
    })
}

/// Writes `contents` to a temporary file next to `path`, then renames it.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io_err = |e: io::Error| Failure::Usage(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn joint_cap() -> Result<usize, Failure> {
    match std::env::var(JOINT_CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{JOINT_CAP_ENV}: `{v}` is not a positive integer"))),
        Err(_) => Ok(DEFAULT_CAP),
    }
}

/// Runs the CLI on `args` (including the program name), writing normal
/// output to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure::Domain(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, Failure> {
    let io_err = |e: io::Error| Failure::Usage(e.to_string());
    match command {
        Command::Validate { file, tolerance } => {
            let net = load(&file)?;
            let report = validate_with_tolerance(&net, tolerance);
            for f in &report.findings {
                writeln!(out, "{f}").map_err(io_err)?;
            }
            Ok(if report.is_valid() { 0 } else { 1 })
        }
        Command::Apply {
            network,
            script,
            out: out_path,
            report,
        } => {
            let net = load(&network)?;
            let text = read(&script)?;
            let ops = parse_script(&text).map_err(|e| {
                Failure::Usage(format!("{}:{}:{}: {e}", script.display(), e.line(), e.column()))
            })?;
            let transactions = apply_script(&net, &ops).map_err(|e| Failure::Domain(e.to_string()))?;
            let last = transactions.last().map(|t| &t.after).unwrap_or(&net);
            if !last.pending().is_empty() {
                let nodes: Vec<&str> = last.pending().iter().map(|p| p.successor.as_str()).collect();
                return Err(Failure::Domain(format!(
                    "script leaves successors awaiting reassessment: {}",
                    nodes.join(",")
                )));
            }
            let json = network_to_json(last).map_err(|e| Failure::Domain(e.to_string()))?;
            let aggregate = AssessmentReport::aggregate(transactions.iter().map(|t| &t.report));
            if let Some(path) = report {
                let mut body = serde_json::to_string_pretty(&aggregate).expect("report serializes");
                body.push('\n');
                write_atomic(&path, body.as_bytes())?;
            }
            write_atomic(&out_path, json.as_bytes())?;
            for note in transactions.iter().flat_map(|t| &t.notes) {
                writeln!(err, "note: {note}").map_err(io_err)?;
            }
            write!(out, "{}", aggregate.to_csv()).map_err(io_err)?;
            Ok(0)
        }
        Command::Cost(args) => {
            let p = match (args.role, args.p) {
                (Role::Successor, None) => Some(2),
                (_, p) => p,
            };
            let query = CostQuery {
                case: args.case,
                role: args.role,
                m: args.m,
                k: args.k,
                p,
                radices: args.radices,
            };
            let result = assessment_cost(&query).map_err(|e| Failure::Usage(e.to_string()))?;
            writeln!(out, "{result}").map_err(io_err)?;
            Ok(0)
        }
        Command::Curves {
            case,
            role,
            m_range,
            k_range,
            out: out_path,
        } => {
            let cases: Vec<Case> = case.map(|c| vec![c]).unwrap_or_else(|| Case::ALL.to_vec());
            let roles: Vec<Role> = role.map(|r| vec![r]).unwrap_or_else(|| Role::ALL.to_vec());
            let mut points = Vec::new();
            for &c in &cases {
                for &r in &roles {
                    points.extend(ratio_curves(c, r, &m_range.0, &k_range.0).map_err(|e| Failure::Usage(e.to_string()))?);
                }
            }
            let csv = curves_csv(&points);
            match out_path {
                Some(path) => write_atomic(&path, csv.as_bytes())?,
                None => write!(out, "{csv}").map_err(io_err)?,
            }
            Ok(0)
        }
        Command::Diff { a, b } => {
            let (na, nb) = (load(&a)?, load(&b)?);
            let d = diff_networks(&na, &nb);
            write!(out, "{d}").map_err(io_err)?;
            Ok(if d.is_identical() { 0 } else { 1 })
        }
        Command::Oracle(OracleCommand::Joint { file }) => {
            let net = load(&file)?;
            let joint = joint_distribution_capped(&net, joint_cap()?).map_err(|e| Failure::Domain(e.to_string()))?;
            writeln!(out, "{},p", joint.variables.join(",")).map_err(io_err)?;
            for (assignment, p) in joint.cells() {
                let labels: Vec<&str> = joint
                    .variables
                    .iter()
                    .zip(assignment.as_slice())
                    .map(|(v, &i)| net.variable(v).expect("joint variable").outcomes[i].as_str())
                    .collect();
                writeln!(out, "{},{p}", labels.join(",")).map_err(io_err)?;
            }
            Ok(0)
        }
    }
}

pub fn main() -> ExitCode {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let code = run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    ExitCode::from(code)
}
