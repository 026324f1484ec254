use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use graftool::corpus::{self, RunOptions};
use graftool::debug::DebugServer;
use graftool::shell::{Shell, ShellOptions};

#[derive(Parser)]
#[command(name = "graftool", version, about = "Typed graph rewriting with a batch shell")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a .grs script.
    Run {
        script: PathBuf,
        /// Send emitted text here instead of stdout until the script redirects.
        #[arg(long)]
        emit_to: Option<PathBuf>,
        /// Serve the step debugger on this port (0 picks one).
        #[arg(long)]
        debug_port: Option<u16>,
        /// Static files for the browser debugger.
        #[arg(long, requires = "debug_port")]
        ui_dir: Option<PathBuf>,
        /// Bound on iterations of `*` and `+` loops.
        #[arg(long)]
        max_iter: Option<u64>,
        /// Directory for relative output paths.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Parse and resolve a rule file, printing diagnostics.
    Check {
        rules: PathBuf,
        /// Metamodels (.ecore, .gm) the rule file refers to by `using`.
        #[arg(long = "import", value_name = "MODEL")]
        imports: Vec<PathBuf>,
    },
    /// Run the task corpus and compare against its oracles.
    TestCorpus {
        #[arg(long)]
        case: Option<String>,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Cmd::Run { script, emit_to, debug_port, ui_dir, max_iter, out_dir } => {
            let options = ShellOptions { out_dir, max_iter, emit_to, debug_all: false };
            let mut shell = Shell::new(options, Box::new(std::io::stdout()));
            if let Some(port) = debug_port {
                match DebugServer::start(port, ui_dir) {
                    Ok(server) => {
                        eprintln!("debugger listening on {}", server.local_addr());
                        shell.attach_debugger(server);
                    }
                    Err(e) => {
                        eprintln!("cannot listen on port {port}: {e}");
                        return ExitCode::from(2);
                    }
                }
            }
            if !script.is_file() {
                eprintln!("{}: no such script", script.display());
                return ExitCode::from(2);
            }
            match shell.run_file(&script) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(1)
                }
            }
        }
        Cmd::Check { rules, imports } => check(&rules, &imports),
        Cmd::TestCorpus { case, corpus: dir } => {
            let dir = dir.unwrap_or_else(corpus::default_corpus);
            let cases: Vec<_> = match &case {
                Some(name) => match corpus::case(name) {
                    Some(c) => vec![c],
                    None => {
                        eprintln!("unknown case `{name}`");
                        return ExitCode::from(2);
                    }
                },
                None => corpus::CASES.iter().collect(),
            };
            let mut failed = 0;
            for c in cases {
                match corpus::check_case(&dir, c, RunOptions::default()) {
                    Ok(_) => println!("PASS {}", c.name),
                    Err(e) => {
                        failed += 1;
                        println!("FAIL {}: {e}", c.name);
                    }
                }
            }
            if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) }
        }
    }
}

fn check(rules: &std::path::Path, imports: &[PathBuf]) -> ExitCode {
    let mut shell = Shell::new(ShellOptions::default(), Box::new(std::io::stdout()));
    let Some(name) = rules.file_name().and_then(|n| n.to_str()) else {
        eprintln!("{}: not a file", rules.display());
        return ExitCode::from(2);
    };
    if !rules.is_file() {
        eprintln!("{}: no such file", rules.display());
        return ExitCode::from(2);
    }
    let origin = rules.with_file_name("check.grs");
    let command = if imports.is_empty() {
        format!("new graph \"{name}\"")
    } else {
        let cwd = std::env::current_dir().unwrap_or_default();
        let models: Vec<String> = imports.iter().map(|p| format!("\"{}\"", cwd.join(p).display())).collect();
        format!("import {} \"{name}\"", models.join(" "))
    };
    if let Err(e) = shell.run_text(&command, &origin) {
        eprintln!("{}", e.error);
        return ExitCode::from(1);
    }
    let rs = shell.rules().expect("new graph loaded rules");
    let mut errors = 0;
    for d in rs.diagnostics() {
        if d.severity == graftool_core::rules::diag::Severity::Error {
            errors += 1;
        }
        eprintln!("{d}");
    }
    println!("{} rules, {} errors", rs.rules().count(), errors);
    if errors == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) }
}
