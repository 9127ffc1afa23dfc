//! The `star` command line.
//!
//! Exit codes: 0 success, 2 unreadable input or unusable address, 3 input
//! that does not parse or validate, 4 reasoning error, 5 annotation service
//! failure.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use star_core::graph::{export, graph_to_star, import_json, star_to_graph, ExportFormat};
use star_core::nl2star::{self, corenlp, AnnotatedStory};
use star_core::parser::{format_domain, parse_knowledge_only};
use star_core::reasoner::{ModelFilter, ReaderOptions};

use crate::run::{run_domain, RunError, RunOptions};
use crate::ServiceConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_REASONING: i32 = 4;
pub const EXIT_ANNOTATOR: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "star", version, about = "Read stories written in STAR, convert to and from it, or serve the web API")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Read a domain file session by session and print the comprehension model.
    Read(ReadArgs),
    /// Turn an annotated (or, with an annotator, a raw) story into STAR clauses.
    Nl2star(Nl2StarArgs),
    /// Convert between STAR rules and the knowledge graph.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Structured,
}

#[derive(Args, Debug)]
pub struct ReadArgs {
    /// Domain file, or `-` for standard input.
    pub input: PathBuf,
    #[arg(long)]
    pub universal: bool,
    #[arg(long)]
    pub acceptable: bool,
    #[arg(long)]
    pub retracted: bool,
    #[arg(long)]
    pub elaborated: bool,
    #[arg(long)]
    pub qualified: bool,
    #[arg(long)]
    pub timings: bool,
    #[arg(long)]
    pub show_story: bool,
    /// Model row filter; repeatable. One of changing-only, no-fluents,
    /// no-actions, no-constants, causal-participants-only, min-frequency=K.
    #[arg(long = "filter", value_name = "FILTER")]
    pub filters: Vec<ModelFilter>,
    /// Last time-point of the model.
    #[arg(long)]
    pub horizon: Option<u32>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: OutputFormat,
}

impl ReadArgs {
    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            reader: ReaderOptions {
                universal: self.universal,
                acceptable: self.acceptable,
                retracted: self.retracted,
                elaborated: self.elaborated,
                qualified: self.qualified,
                timings: self.timings,
                show_story: self.show_story,
                horizon: self.horizon,
                ..Default::default()
            },
            filters: self.filters.clone(),
        }
    }
}

#[derive(Args, Debug)]
pub struct Nl2StarArgs {
    /// Annotated story (JSON) or plain text, or `-` for standard input.
    pub input: PathBuf,
    /// CoreNLP server for plain-text input.
    #[arg(long, env = "STAR_ANNOTATOR_URL")]
    pub annotator: Option<String>,
    /// Print how each sentence was converted to standard error.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Subcommand, Debug)]
pub enum GraphCommand {
    /// Rules, fluents and priorities to a graph.
    Star2graph {
        input: PathBuf,
        /// json, graphml or image-manifest.
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// A graph (JSON) back to STAR rules.
    Graph2star { input: PathBuf },
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long)]
    pub listen: Option<SocketAddr>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// SQLite file, or `:memory:`.
    #[arg(long)]
    pub db: Option<String>,
    #[arg(long)]
    pub retention_days: Option<u32>,
    #[arg(long)]
    pub queue_capacity: Option<usize>,
    #[arg(long)]
    pub annotator: Option<String>,
}

impl ServeArgs {
    pub fn config(&self, base: ServiceConfig) -> ServiceConfig {
        let mut c = base;
        if let Some(v) = self.listen {
            c.listen = v;
        }
        if let Some(v) = self.workers {
            c.workers = v;
        }
        if let Some(v) = &self.db {
            c.store_path = (v != ":memory:").then(|| PathBuf::from(v));
        }
        if let Some(v) = self.retention_days {
            c.retention_days = v;
        }
        if let Some(v) = self.queue_capacity {
            c.queue_capacity = v;
        }
        if let Some(v) = &self.annotator {
            c.annotator_url = Some(v.clone());
        }
        c
    }
}

pub struct Io<'a> {
    pub stdin: &'a mut dyn Read,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

fn read_input(path: &PathBuf, io: &mut Io<'_>) -> Result<String, i32> {
    let mut text = String::new();
    let res = if path.as_os_str() == "-" {
        io.stdin.read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map(|_| text).map_err(|e| {
        let _ = writeln!(io.stderr, "star: cannot read {}: {e}", path.display());
        EXIT_INPUT
    })
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with(args: impl IntoIterator<Item = OsString>, io: &mut Io<'_>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(io.stderr, "{rendered}");
            } else {
                let _ = write!(io.stdout, "{rendered}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Read(a) => cmd_read(a, io),
        Command::Nl2star(a) => cmd_nl2star(a, io),
        Command::Graph(g) => cmd_graph(g, io),
        Command::Serve(a) => cmd_serve(a, io),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(code) => code,
    }
}

pub fn cmd_read(args: &ReadArgs, io: &mut Io<'_>) -> Result<(), i32> {
    let text = read_input(&args.input, io)?;
    let out = run_domain(&text, &args.run_options(), &mut |_| {}).map_err(|e| {
        let _ = writeln!(io.stderr, "{e}");
        match e {
            RunError::Parse(_) => EXIT_INVALID,
            RunError::Reason(_) => EXIT_REASONING,
        }
    })?;
    let written = match args.format {
        OutputFormat::Text => io.stdout.write_all(out.raw.as_bytes()),
        OutputFormat::Structured => {
            serde_json::to_writer_pretty(&mut *io.stdout, &out.reports).map_err(std::io::Error::other).and_then(|_| writeln!(io.stdout))
        }
    };
    written.map_err(|_| EXIT_INPUT)
}

fn looks_like_json(text: &str) -> bool {
    text.trim_start().starts_with('{')
}

pub fn cmd_nl2star(args: &Nl2StarArgs, io: &mut Io<'_>) -> Result<(), i32> {
    let text = read_input(&args.input, io)?;
    let story: AnnotatedStory = if looks_like_json(&text) {
        serde_json::from_str(&text).map_err(|e| {
            let _ = writeln!(io.stderr, "star: malformed annotations: {e}");
            EXIT_INVALID
        })?
    } else {
        let Some(url) = &args.annotator else {
            let _ = writeln!(io.stderr, "star: plain text needs an annotation service (--annotator URL)");
            return Err(EXIT_ANNOTATOR);
        };
        corenlp::CoreNlpClient::new(url.clone(), Duration::from_secs(30))
            .and_then(|c| c.annotate(&text))
            .map_err(|e| {
                let _ = writeln!(io.stderr, "star: {e}");
                match e {
                    corenlp::AnnotationError::EmptyText | corenlp::AnnotationError::Malformed(_) => EXIT_INVALID,
                    _ => EXIT_ANNOTATOR,
                }
            })?
    };
    let (domain, trace) = nl2star::convert(&story).map_err(|e| {
        let _ = writeln!(io.stderr, "star: {e}");
        EXIT_INVALID
    })?;
    if args.trace {
        let _ = write!(io.stderr, "{trace}");
    }
    io.stdout.write_all(format_domain(&domain).as_bytes()).map_err(|_| EXIT_INPUT)
}

pub fn cmd_graph(cmd: &GraphCommand, io: &mut Io<'_>) -> Result<(), i32> {
    match cmd {
        GraphCommand::Star2graph { input, format } => {
            let format: ExportFormat = format.parse().map_err(|e| {
                let _ = writeln!(io.stderr, "star: {e}");
                EXIT_INPUT
            })?;
            let text = read_input(input, io)?;
            let domain = parse_knowledge_only(&text).into_result().map_err(|e| {
                let _ = writeln!(io.stderr, "{e}");
                EXIT_INVALID
            })?;
            io.stdout.write_all(&export(&star_to_graph(&domain), format)).map_err(|_| EXIT_INPUT)
        }
        GraphCommand::Graph2star { input } => {
            let text = read_input(input, io)?;
            let graph = import_json(text.as_bytes()).map_err(|e| {
                let _ = writeln!(io.stderr, "star: {e}");
                EXIT_INVALID
            })?;
            match graph_to_star(&graph) {
                Ok(star) => io.stdout.write_all(star.as_bytes()).map_err(|_| EXIT_INPUT),
                Err(diags) => {
                    for d in diags {
                        let _ = writeln!(io.stderr, "{d}");
                    }
                    Err(EXIT_INVALID)
                }
            }
        }
    }
}

pub fn cmd_serve(args: &ServeArgs, io: &mut Io<'_>) -> Result<(), i32> {
    let base = ServiceConfig::from_env().map_err(|e| {
        let _ = writeln!(io.stderr, "star: {e}");
        EXIT_INPUT
    })?;
    let config = args.config(base);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| {
        let _ = writeln!(io.stderr, "star: {e}");
        EXIT_INPUT
    })?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(config.listen).await.map_err(|e| {
            let _ = writeln!(io.stderr, "star: cannot listen on {}: {e}", config.listen);
            EXIT_INPUT
        })?;
        let stop = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        crate::serve(listener, &config, stop).await.map_err(|e| {
            let _ = writeln!(io.stderr, "star: {e}");
            EXIT_INPUT
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str], stdin: &str) -> (i32, String, String) {
        let mut input = stdin.as_bytes();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut io = Io { stdin: &mut input, stdout: &mut out, stderr: &mut err };
        let code = main_with(std::iter::once("star").chain(args.iter().copied()).map(OsString::from), &mut io);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn read_from_stdin() {
        let (code, out, err) = run(&["read", "-"], "session(s(0),[],all).\nsession(s(1),[],all).\ns(1) :: a at 1.\n");
        assert_eq!(code, 0, "{err}");
        assert!(out.contains("1: < a>"));
        assert!(out.ends_with(">>> Finished reading the story!\n"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(&["read", "/no/such/file.star"], "").0, EXIT_INPUT);
        assert_eq!(run(&["read", "-"], "s(1) :: ").0, EXIT_INVALID);
        let contradictory = "session(s(0),[],all).\nsession(s(1),[],all).\ns(1) :: a at 1.\ns(1) :: -a at 1.\n";
        assert_eq!(run(&["read", "-"], contradictory).0, EXIT_REASONING);
        assert_eq!(run(&["read", "-", "--filter", "sideways"], "").0, EXIT_INPUT);
        assert_eq!(run(&["frobnicate"], "").0, EXIT_INPUT);
    }

    #[test]
    fn nl2star_needs_input() {
        let (code, _, err) = run(&["nl2star", "-"], "");
        assert_eq!(code, EXIT_ANNOTATOR);
        assert!(err.contains("annotation service"));
        assert_eq!(run(&["nl2star", "-"], "{\"blocks\": [").0, EXIT_INVALID);
        assert_eq!(run(&["nl2star", "-"], "{\"blocks\": []}").0, EXIT_INVALID);
    }

    #[test]
    fn serve_flags_override_environment() {
        let args = ServeArgs {
            listen: None,
            workers: Some(7),
            db: Some(":memory:".into()),
            retention_days: None,
            queue_capacity: None,
            annotator: None,
        };
        let c = args.config(ServiceConfig::default());
        assert_eq!((c.workers, c.store_path), (7, None));
    }
}
