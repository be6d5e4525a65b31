//! The `relphase` command line.
//!
//! Exit status is 0 when everything requested was produced and every check
//! passed, 1 when a verification or T-count comparison failed, and 2 for
//! usage errors: unknown constructions, parameters outside the validity
//! range, unreadable or malformed circuit files.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use relphase::circuit::Role;
use relphase::constructions::{self as cons, ConstructionError, ConstructionSpec, Params, REGISTRY};
use relphase::verify::{self, lowered, VerificationReport, VerifyError};
use serde_json::json;

use crate::report;
use crate::text;

#[derive(Parser, Debug)]
#[command(name = "relphase", version, about = "Relative-phase Toffoli synthesis with exact verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ParamArgs {
    /// Number of controls.
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of clean ancillas, where the construction takes them.
    #[arg(long)]
    pub m: Option<usize>,
    /// Construction variant, e.g. `relative` or `exact` for kand_terminate.
    #[arg(long)]
    pub variant: Option<String>,
}

impl ParamArgs {
    fn params(&self) -> Params {
        Params { k: self.k, m: self.m, variant: self.variant.clone() }
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write machine output here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    CircuitText,
    Json,
    Table,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a construction as a circuit file or JSON sidecar.
    Synth {
        name: String,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulate a construction and check it against its target.
    ///
    /// Without `--k`, every valid k up to `--kmax` is checked.
    Verify {
        name: String,
        #[command(flatten)]
        params: ParamArgs,
        /// Check the circuit read from standard input instead of the generated one.
        #[arg(long)]
        stdin: bool,
        #[arg(long, default_value_t = 8)]
        kmax: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare measured T-counts with their formulas.
    Tcount {
        name: Option<String>,
        #[command(flatten)]
        params: ParamArgs,
        /// Print the full T-count ledger.
        #[arg(long)]
        table: bool,
        #[arg(long, default_value_t = 8)]
        kmax: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Decide exact equality of two circuit files (`-` reads standard input).
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check the relative-phase identities used by the dirty-ancilla constructions.
    Appendix {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// List the registered constructions and the parameters they read.
    List {
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Check(String),
}

impl From<ConstructionError> for Failure {
    fn from(e: ConstructionError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Construction(c) => Failure::Usage(c.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

impl From<text::ParseError> for Failure {
    fn from(e: text::ParseError) -> Self {
        Failure::Usage(format!("malformed circuit: {}", e))
    }
}

/// Standard streams, abstracted so tests can drive the CLI in process.
pub struct Io<'a> {
    pub stdin: &'a mut dyn Read,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

struct Outcome {
    body: String,
    ok: bool,
}

fn pick_format(output: &OutputArgs, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
    let f = output.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        let names: Vec<String> =
            allowed.iter().map(|a| a.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()).collect();
        Err(Failure::Usage(format!("this subcommand supports --format {}", names.join(" or "))))
    }
}

fn json_body(v: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("json values always serialize");
    s.push('\n');
    s
}

fn needs(name: &str, param: &str) -> bool {
    REGISTRY
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, p)| p.split(", ").any(|t| t == param || t.starts_with(&format!("{} ", param))))
        .unwrap_or(false)
}

/// The construction itself, or every valid `(k, m)` up to `kmax` when `k`
/// is required but not given.
fn specs(name: &str, p: &ParamArgs, kmax: usize) -> Result<Vec<ConstructionSpec>, Failure> {
    if p.k.is_some() || !needs(name, "k") {
        return Ok(vec![cons::build(name, &p.params())?]);
    }
    let mut out = Vec::new();
    for k in 1..=kmax {
        let ms: Vec<Option<usize>> = match (p.m, needs(name, "m")) {
            (None, true) => (1..=k).map(Some).collect(),
            (m, _) => vec![m],
        };
        for m in ms {
            let q = Params { k: Some(k), m, variant: p.variant.clone() };
            match cons::build(name, &q) {
                Ok(s) => out.push(s),
                Err(ConstructionError::OutOfRange(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    if out.is_empty() {
        return Err(Failure::Usage(format!("{} has no valid k <= {}", name, kmax)));
    }
    Ok(out)
}

fn read_source(path: &PathBuf, io: &mut Io) -> Result<String, Failure> {
    let mut s = String::new();
    if path.as_os_str() == "-" {
        io.stdin.read_to_string(&mut s).map_err(|e| Failure::Usage(format!("reading standard input: {}", e)))?;
    } else {
        s = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {}", path.display(), e)))?;
    }
    Ok(s)
}

fn synth(name: &str, p: &ParamArgs, output: &OutputArgs) -> Result<Outcome, Failure> {
    let format = pick_format(output, Format::CircuitText, &[Format::CircuitText, Format::Json])?;
    let spec = cons::build(name, &p.params())?;
    let body = match format {
        Format::Json => json_body(report::spec_json(&spec)),
        _ => text::render(&spec.circuit),
    };
    Ok(Outcome { body, ok: true })
}

fn verify(name: &str, p: &ParamArgs, stdin: bool, kmax: usize, output: &OutputArgs, io: &mut Io) -> Result<Outcome, Failure> {
    let format = pick_format(output, Format::Table, &[Format::Table, Format::Json])?;
    let mut specs = if stdin { vec![cons::build(name, &p.params())?] } else { specs(name, p, kmax)? };
    if stdin {
        let mut src = String::new();
        io.stdin.read_to_string(&mut src).map_err(|e| Failure::Usage(format!("reading standard input: {}", e)))?;
        let mut c = text::parse(&src)?;
        let spec = &mut specs[0];
        if (c.n_qubits, c.n_cbits) != (spec.circuit.n_qubits, spec.circuit.n_cbits) {
            return Err(Failure::Usage(format!(
                "circuit has {} qubits and {} cbits, {} expects {} and {}",
                c.n_qubits, c.n_cbits, spec.name, spec.circuit.n_qubits, spec.circuit.n_cbits
            )));
        }
        for (role, declared) in c.io_spec.iter_mut().zip(&spec.circuit.io_spec) {
            if *role == Role::Input && *declared == Role::Target {
                *role = Role::Target;
            }
        }
        spec.circuit = c;
    }
    let mut reports: Vec<(VerificationReport, usize)> = Vec::new();
    for spec in &specs {
        reports.push((verify::check_construction(spec)?, spec.circuit.n_qubits));
    }
    let ok = reports.iter().all(|(r, _)| r.passed());
    let body = match format {
        Format::Json => json_body(report::verifications_json(&reports)),
        _ => reports.iter().map(|(r, _)| report::verification_line(r) + "\n").collect(),
    };
    Ok(Outcome { body, ok })
}

fn tcount(name: Option<&str>, p: &ParamArgs, table: bool, kmax: usize, output: &OutputArgs) -> Result<Outcome, Failure> {
    let format = pick_format(output, Format::Table, &[Format::Table, Format::Json])?;
    if table {
        if name.is_some() {
            return Err(Failure::Usage("--table takes no construction name".into()));
        }
        let rows = verify::table_ledger(kmax)?;
        let ok = report::ledger_all_match(&rows);
        let body = match format {
            Format::Json => json_body(report::ledger_json(&rows, kmax)),
            _ => report::ledger_table(&rows),
        };
        return Ok(Outcome { body, ok });
    }
    let name = name.ok_or_else(|| Failure::Usage("give a construction name or --table".into()))?;
    let specs = specs(name, p, kmax)?;
    let measured: Vec<_> = specs.iter().map(|s| lowered(&s.circuit).t_count().values()).collect();
    let matches = |s: &ConstructionSpec, m: &std::collections::BTreeSet<u64>| !s.formula.asserted || *m == s.formula.values;
    let ok = specs.iter().zip(&measured).all(|(s, m)| matches(s, m));
    let body = match format {
        Format::Json => {
            let rows: Vec<_> = specs
                .iter()
                .zip(&measured)
                .map(|(s, m)| {
                    json!({
                        "name": s.name, "k": s.k, "m": s.m, "variant": s.variant,
                        "formula_text": s.formula.text, "formula": s.formula.values,
                        "asserted": s.formula.asserted, "measured": m, "match": matches(s, m),
                    })
                })
                .collect();
            json_body(json!({ "schema": report::SCHEMA, "all_match": ok, "rows": rows }))
        }
        _ => {
            let fmt = |s: &std::collections::BTreeSet<u64>| {
                format!("{{{}}}", s.iter().map(u64::to_string).collect::<Vec<_>>().join(", "))
            };
            let cells: Vec<Vec<String>> = specs
                .iter()
                .zip(&measured)
                .map(|(s, m)| {
                    vec![
                        s.name.clone(),
                        s.variant.clone().unwrap_or_else(|| "-".into()),
                        s.k.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
                        s.m.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
                        s.formula.text.clone(),
                        fmt(&s.formula.values),
                        fmt(m),
                        match (s.formula.asserted, matches(s, m)) {
                            (false, _) => "not asserted".into(),
                            (true, true) => "yes".into(),
                            (true, false) => "NO".into(),
                        },
                    ]
                })
                .collect();
            report::aligned(&["construction", "variant", "k", "m", "formula", "expected", "measured", "match"], &cells)
        }
    };
    Ok(Outcome { body, ok })
}

fn equiv(a: &PathBuf, b: &PathBuf, output: &OutputArgs, io: &mut Io) -> Result<Outcome, Failure> {
    let format = pick_format(output, Format::Table, &[Format::Table, Format::Json])?;
    if a.as_os_str() == "-" && b.as_os_str() == "-" {
        return Err(Failure::Usage("only one circuit can come from standard input".into()));
    }
    let ca = text::parse(&read_source(a, io)?)?;
    let cb = text::parse(&read_source(b, io)?)?;
    if ca.n_qubits != cb.n_qubits {
        return Err(Failure::Usage(format!("circuits act on {} and {} qubits", ca.n_qubits, cb.n_qubits)));
    }
    let same = verify::equivalent(&ca, &cb)?;
    let body = match format {
        Format::Json => json_body(json!({ "schema": report::SCHEMA, "equivalent": same })),
        _ => format!("{}\n", if same { "equivalent" } else { "not equivalent" }),
    };
    Ok(Outcome { body, ok: same })
}

fn appendix(output: &OutputArgs) -> Result<Outcome, Failure> {
    let format = pick_format(output, Format::Table, &[Format::Table, Format::Json])?;
    let ids = verify::appendix_identities()?;
    let ok = ids.iter().all(|(_, holds)| *holds);
    let body = match format {
        Format::Json => {
            let rows: Vec<_> = ids.iter().map(|(n, h)| json!({ "identity": n, "holds": h })).collect();
            json_body(json!({ "schema": report::SCHEMA, "all_hold": ok, "identities": rows }))
        }
        _ => ids.iter().map(|(n, h)| format!("{}: {}\n", n, if *h { "holds" } else { "FAILS" })).collect(),
    };
    Ok(Outcome { body, ok })
}

fn list(output: &OutputArgs) -> Result<Outcome, Failure> {
    let format = pick_format(output, Format::Table, &[Format::Table, Format::Json])?;
    let body = match format {
        Format::Json => {
            let rows: Vec<_> = REGISTRY.iter().map(|(n, p)| json!({ "name": n, "parameters": p })).collect();
            json_body(json!({ "schema": report::SCHEMA, "constructions": rows }))
        }
        _ => {
            let cells: Vec<Vec<String>> = REGISTRY
                .iter()
                .map(|(n, p)| vec![n.to_string(), if p.is_empty() { "-".into() } else { p.to_string() }])
                .collect();
            report::aligned(&["name", "parameters"], &cells)
        }
    };
    Ok(Outcome { body, ok: true })
}

fn dispatch(cli: &Cli, io: &mut Io) -> Result<(Outcome, Option<PathBuf>), Failure> {
    Ok(match &cli.command {
        Command::Synth { name, params, output } => (synth(name, params, output)?, output.out.clone()),
        Command::Verify { name, params, stdin, kmax, output } => {
            (verify(name, params, *stdin, *kmax, output, io)?, output.out.clone())
        }
        Command::Tcount { name, params, table, kmax, output } => {
            (tcount(name.as_deref(), params, *table, *kmax, output)?, output.out.clone())
        }
        Command::Equiv { a, b, output } => (equiv(a, b, output, io)?, output.out.clone()),
        Command::Appendix { output } => (appendix(output)?, output.out.clone()),
        Command::List { output } => (list(output)?, output.out.clone()),
    })
}

/// Parse `args` (program name first), run, and return the exit status.
pub fn run<I, T>(args: I, io: &mut Io) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(io.stderr, "{}", rendered);
                return 2;
            }
            let _ = write!(io.stdout, "{}", rendered);
            return 0;
        }
    };
    match dispatch(&cli, io) {
        Ok((outcome, out)) => {
            let written = match out {
                Some(path) => std::fs::write(&path, &outcome.body).map_err(|e| format!("{}: {}", path.display(), e)),
                None => io.stdout.write_all(outcome.body.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(io.stderr, "error: {}", e);
                return 2;
            }
            if outcome.ok {
                0
            } else {
                let _ = writeln!(io.stderr, "check failed");
                1
            }
        }
        Err(Failure::Usage(m)) => {
            let _ = writeln!(io.stderr, "error: {}", m);
            2
        }
        Err(Failure::Check(m)) => {
            let _ = writeln!(io.stderr, "verification failed: {}", m);
            1
        }
    }
}
