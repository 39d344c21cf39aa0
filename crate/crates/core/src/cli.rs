//! `rdb2owl` command line.
//!
//! Exit codes: 0 success, 1 parse or I/O failure, 2 transform failure,
//! 3 scenario failure, 64 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, Utc};
use clap::{Args, Parser, Subcommand};

use crate::graph::{export_dot, export_json};
use crate::ontology::DEFAULT_IRI_BASE;
use crate::owl::{emit, EmitConfig, OwlFormat};
use crate::pipeline::{transform, PipelineError, Transformed};
use crate::runtime::{InstanceStore, SteppingClock};
use crate::scenario::{format_events, run_scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_TRANSFORM: i32 = 2;
pub const EXIT_SCENARIO: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "rdb2owl", version, about = "Compile SQL DDL into an OWL ontology")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Translate a DDL script into an ontology.
    Transform(TransformArgs),
    /// Translate, then run a scenario script against the event runtime.
    Simulate(SimulateArgs),
    /// Print the intermediate conceptual graph.
    Graph(GraphArgs),
}

#[derive(Debug, Args)]
struct OntologyArgs {
    /// DDL script.
    input: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// turtle or rdfxml; inferred from the output extension otherwise.
    #[arg(long)]
    format: Option<OwlFormat>,
    /// Namespace of generated names, ending in `#` or `/`.
    #[arg(long, env = "RDB2OWL_IRI_BASE", default_value = DEFAULT_IRI_BASE)]
    iri_base: String,
    /// Increase diagnostic output.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Args)]
struct TransformArgs {
    #[command(flatten)]
    common: OntologyArgs,
    /// Also write the conceptual graph as DOT.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: OntologyArgs,
    /// Scenario script.
    scenario: PathBuf,
    /// Write the final event log here; JSON when the name ends in `.json`.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Start the event clock at this RFC 3339 instant, one second per event.
    #[arg(long)]
    fixed_time: Option<DateTime<Utc>>,
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// DDL script.
    input: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Emit JSON instead of DOT.
    #[arg(long)]
    json: bool,
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

/// Entry point shared by the binary and the tests.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(rendered.as_bytes()) } else { stdout.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let mut io = Io { stdout, stderr };
    let result = match cli.command {
        Command::Transform(a) => cmd_transform(&a, &mut io),
        Command::Simulate(a) => cmd_simulate(&a, &mut io),
        Command::Graph(a) => cmd_graph(&a, &mut io),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(code) => code,
    }
}

struct Io<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Io<'_> {
    fn diag(&mut self, location: &str, severity: &str, message: impl std::fmt::Display) {
        let _ = writeln!(self.stderr, "{location}: {severity}: {message}");
    }

    /// Writes `text` to `path`, or to stdout when no path is given.
    fn deliver(&mut self, path: Option<&Path>, text: &str) -> Result<(), i32> {
        match path {
            Some(p) => fs::write(p, text).map_err(|e| {
                self.diag(&p.display().to_string(), "error", format!("cannot write: {e}"));
                EXIT_PARSE
            }),
            None => self.stdout.write_all(text.as_bytes()).map_err(|_| EXIT_PARSE),
        }
    }
}

fn read_input(path: &Path, io: &mut Io<'_>) -> Result<String, i32> {
    fs::read_to_string(path).map_err(|e| {
        io.diag(&path.display().to_string(), "error", format!("cannot read: {e}"));
        EXIT_PARSE
    })
}

fn load(input: &Path, iri_base: &str, verbose: u8, io: &mut Io<'_>) -> Result<Transformed, i32> {
    let source = read_input(input, io)?;
    let file = input.display().to_string();
    match transform(&source, iri_base) {
        Ok(t) => {
            for d in &t.diagnostics {
                io.diag(&format!("{file}:{}:{}", d.line, d.column), &d.severity.to_string(), &d.message);
            }
            for w in &t.type_warnings {
                io.diag(&file, "warning", w);
            }
            if verbose > 0 {
                io.diag(
                    &file,
                    "info",
                    format!(
                        "{} table(s), {} trigger(s); graph has {} node(s) and {} edge(s)",
                        t.schema.tables().len(),
                        t.schema.triggers().len(),
                        t.graph.node_count(),
                        t.graph.edge_count()
                    ),
                );
            }
            Ok(t)
        }
        Err(PipelineError::Parse(diags)) => {
            for d in &diags {
                io.diag(&format!("{file}:{}:{}", d.line, d.column), &d.severity.to_string(), &d.message);
                if verbose > 1 && !d.offending_statement.is_empty() {
                    let _ = writeln!(io.stderr, "    | {}", d.offending_statement);
                }
            }
            Err(EXIT_PARSE)
        }
        Err(e) => {
            io.diag(&file, "error", e);
            Err(EXIT_TRANSFORM)
        }
    }
}

fn resolve_format(explicit: Option<OwlFormat>, output: Option<&Path>) -> OwlFormat {
    explicit
        .or_else(|| {
            let ext = output?.extension()?.to_str()?.to_ascii_lowercase();
            match ext.as_str() {
                "owl" | "rdf" | "xml" => Some(OwlFormat::RdfXml),
                "ttl" => Some(OwlFormat::Turtle),
                _ => None,
            }
        })
        .unwrap_or_default()
}

fn emit_model(model: &crate::ontology::OntologyModel, common: &OntologyArgs, io: &mut Io<'_>) -> Result<String, i32> {
    let format = resolve_format(common.format, common.output.as_deref());
    emit(model, &EmitConfig::new(format, common.iri_base.clone())).map_err(|e| {
        io.diag(&common.input.display().to_string(), "error", e);
        EXIT_TRANSFORM
    })
}

fn cmd_transform(args: &TransformArgs, io: &mut Io<'_>) -> Result<(), i32> {
    let c = &args.common;
    let t = load(&c.input, &c.iri_base, c.verbose, io)?;
    let text = emit_model(&t.model, c, io)?;
    io.deliver(c.output.as_deref(), &text)?;
    if let Some(dot) = &args.dot {
        io.deliver(Some(dot), &export_dot(&t.graph))?;
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs, io: &mut Io<'_>) -> Result<(), i32> {
    let c = &args.common;
    let t = load(&c.input, &c.iri_base, c.verbose, io)?;
    // Catch a bad IRI base before running anything.
    emit_model(&t.model, c, io)?;
    let script = read_input(&args.scenario, io)?;
    let mut store = match args.fixed_time {
        Some(start) => InstanceStore::with_clock(t.model, Box::new(SteppingClock::new(start, Duration::seconds(1)))),
        None => InstanceStore::new(t.model),
    };
    let scenario_file = args.scenario.display().to_string();
    let dump = match run_scenario(&mut store, &script) {
        Ok(dump) => dump,
        Err(e) => {
            io.diag(&format!("{scenario_file}:{}", e.line), "error", &e.kind);
            return Err(EXIT_SCENARIO);
        }
    };
    for w in store.warnings() {
        io.diag(&scenario_file, "warning", w);
    }
    let text = emit_model(store.model(), c, io)?;
    io.deliver(c.output.as_deref(), &text)?;
    if c.output.is_some() {
        io.deliver(None, &dump)?;
    } else if !dump.is_empty() && c.verbose > 0 {
        io.diag(&scenario_file, "info", "dump-events output suppressed because the ontology goes to stdout");
    }
    if let Some(path) = &args.events {
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let body = if is_json {
            let mut s = serde_json::to_string_pretty(store.events()).expect("event records serialize");
            s.push('\n');
            s
        } else {
            format_events(store.events())
        };
        io.deliver(Some(path), &body)?;
    }
    Ok(())
}

fn cmd_graph(args: &GraphArgs, io: &mut Io<'_>) -> Result<(), i32> {
    let t = load(&args.input, DEFAULT_IRI_BASE, args.verbose, io)?;
    let text = if args.json { export_json(&t.graph) } else { export_dot(&t.graph) };
    io.deliver(args.output.as_deref(), &text)
}
