//! Batch runner for `.grs` scripts.
//!
//! One command per line. Relative input paths resolve against the file that
//! names them; outputs resolve against the configured output directory, or
//! the script's directory when none is set.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use graftool_core::rules::diag::Severity;
use graftool_core::sequence::{validate, DEFAULT_MAX_ITER};
use graftool_core::{
    parse_model, parse_rule_file, parse_sequence, read_native, Control, CountMode, ElementKind, EmitSink, Event, Exec,
    Graph, GraphError, Observer, RuleError, RuleSet, SeqError, SyntaxError, TypeError, TypeGraph,
};
use graftool_core::expr::Value;
use thiserror::Error;

use crate::debug::{self, DebugObserver, DebugServer};
use crate::ecore::{self, EcoreError, Metamodel};
use crate::export::{self, Format};
use crate::style::{Grouping, Setting, StyleRegistry, StyleRule};
use crate::xmi::{self, XmiError};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("unknown command `{0}`")]
    UnknownCommand(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Ecore { path: PathBuf, source: EcoreError },
    #[error("{}: {source}", path.display())]
    Xmi { path: PathBuf, source: XmiError },
    #[error("{}: {source}", path.display())]
    Model { path: PathBuf, source: TypeError },
    #[error("rule errors:\n{0}")]
    Rules(RuleError),
    #[error("{}: {source}", path.display())]
    Native { path: PathBuf, source: GraphError },
    #[error("model `{0}` named by `using` is neither imported nor found as .gm or .ecore")]
    UnknownModel(String),
    #[error("sequence syntax error at column {}: {}", .0.loc.col, .0.message)]
    Sequence(SyntaxError),
    #[error("{0}")]
    Exec(#[from] SeqError),
    #[error("{0}")]
    Graph(#[from] GraphError),
    #[error("{0}")]
    Type(#[from] TypeError),
    #[error("no graph; use `import` or `new graph` first")]
    NoGraph,
    #[error("no rules loaded")]
    NoRules,
    #[error("include cycle through {}", .0.display())]
    IncludeCycle(PathBuf),
}

/// A failed command with the script position that issued it.
#[derive(Debug, Error)]
#[error("{}:{line}: {error}", file.display())]
pub struct ShellError {
    pub file: PathBuf,
    pub line: usize,
    pub error: CommandError,
}

#[derive(Debug, Clone, Default)]
pub struct ShellOptions {
    /// Where relative output paths go. Defaults to the script's directory.
    pub out_dir: Option<PathBuf>,
    pub max_iter: Option<u64>,
    /// Initial emit target instead of the output stream.
    pub emit_to: Option<PathBuf>,
    /// Runs every `xgrs` as `debug xgrs` when a debugger is attached.
    pub debug_all: bool,
}

/// Cloneable in-memory writer for capturing shell output.
#[derive(Debug, Clone, Default)]
pub struct Captured(Arc<Mutex<Vec<u8>>>);

impl Captured {
    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.0.lock().expect("capture lock")).into_owned()
    }
}

impl Write for Captured {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.lock().expect("capture lock").extend_from_slice(buf);
        Ok(buf.len())
    }
    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

enum EmitTarget {
    Output,
    File {
        path: PathBuf,
        file: Option<BufWriter<File>>,
        error: Option<io::Error>,
    },
}

impl EmitTarget {
    fn file(path: PathBuf) -> Self {
        EmitTarget::File { path, file: None, error: None }
    }

    fn close(&mut self) -> Result<(), CommandError> {
        if let EmitTarget::File { path, file, error } = self {
            let flushed = file.take().map_or(Ok(()), |mut f| f.flush());
            if let Some(e) = error.take().map_or(flushed.err(), Some) {
                return Err(CommandError::Io { path: path.clone(), source: e });
            }
        }
        Ok(())
    }

    fn take_error(&mut self) -> Result<(), CommandError> {
        match self {
            EmitTarget::File { path, error: error @ Some(_), .. } => Err(CommandError::Io {
                path: path.clone(),
                source: error.take().expect("checked"),
            }),
            _ => Ok(()),
        }
    }
}

struct Sink<'a> {
    target: &'a mut EmitTarget,
    out: &'a mut dyn Write,
}

impl EmitSink for Sink<'_> {
    fn emit(&mut self, chunk: &str) {
        match self.target {
            EmitTarget::Output => {
                let _ = self.out.write_all(chunk.as_bytes());
            }
            EmitTarget::File { path, file, error } => {
                if error.is_some() {
                    return;
                }
                if file.is_none() {
                    match File::create(&*path) {
                        Ok(f) => *file = Some(BufWriter::new(f)),
                        Err(e) => {
                            *error = Some(e);
                            return;
                        }
                    }
                }
                if let Err(e) = file.as_mut().expect("opened").write_all(chunk.as_bytes()) {
                    *error = Some(e);
                }
            }
        }
    }
}

/// Forwards events to two observers; either may abort.
struct Tee<'a, 'b>(Option<&'a mut dyn Observer>, Option<&'b mut dyn Observer>);

impl Observer for Tee<'_, '_> {
    fn event(&mut self, event: &Event<'_>, g: &Graph) -> Control {
        let a = self.0.as_mut().map_or(Control::Continue, |o| o.event(event, g));
        let b = self.1.as_mut().map_or(Control::Continue, |o| o.event(event, g));
        if a == Control::Abort || b == Control::Abort {
            Control::Abort
        } else {
            Control::Continue
        }
    }
}

pub struct Shell {
    options: ShellOptions,
    out: Box<dyn Write + Send>,
    graph: Option<Graph>,
    rules: Option<RuleSet>,
    metamodels: Vec<Metamodel>,
    styles: StyleRegistry,
    vars: BTreeMap<String, Value>,
    emit: EmitTarget,
    debugger: Option<DebugServer>,
    observer: Option<Box<dyn Observer + Send>>,
    files: Vec<PathBuf>,
    shows: usize,
    quit: bool,
}

impl Shell {
    pub fn new(options: ShellOptions, out: Box<dyn Write + Send>) -> Shell {
        let emit = options.emit_to.clone().map_or(EmitTarget::Output, EmitTarget::file);
        Shell {
            options,
            out,
            graph: None,
            rules: None,
            metamodels: Vec::new(),
            styles: StyleRegistry::default(),
            vars: BTreeMap::new(),
            emit,
            debugger: None,
            observer: None,
            files: Vec::new(),
            shows: 0,
            quit: false,
        }
    }

    /// A shell whose output lands in the returned buffer.
    pub fn captured(options: ShellOptions) -> (Shell, Captured) {
        let buf = Captured::default();
        (Shell::new(options, Box::new(buf.clone())), buf)
    }

    pub fn attach_debugger(&mut self, server: DebugServer) {
        self.debugger = Some(server);
    }

    pub fn debugger(&mut self) -> Option<&mut DebugServer> {
        self.debugger.as_mut()
    }

    /// An observer that sees every sequence next to the debugger.
    pub fn set_observer(&mut self, observer: Box<dyn Observer + Send>) {
        self.observer = Some(observer);
    }

    pub fn take_observer(&mut self) -> Option<Box<dyn Observer + Send>> {
        self.observer.take()
    }

    pub fn graph(&self) -> Option<&Graph> {
        self.graph.as_ref()
    }

    pub fn rules(&self) -> Option<&RuleSet> {
        self.rules.as_ref()
    }

    pub fn styles(&self) -> &StyleRegistry {
        &self.styles
    }

    pub fn metamodels(&self) -> &[Metamodel] {
        &self.metamodels
    }

    pub fn vars(&self) -> &BTreeMap<String, Value> {
        &self.vars
    }

    /// Runs a script file, then closes the emit target.
    pub fn run_file(&mut self, path: &Path) -> Result<(), ShellError> {
        let r = self.include(path, 0, path);
        let closed = self.finish(path);
        r.and(closed)
    }

    /// Runs script text as if read from `origin`, then closes the emit
    /// target.
    pub fn run_text(&mut self, text: &str, origin: &Path) -> Result<(), ShellError> {
        self.files.push(origin.to_path_buf());
        let r = self.run_lines(text, origin);
        self.files.pop();
        let closed = self.finish(origin);
        r.and(closed)
    }

    fn finish(&mut self, origin: &Path) -> Result<(), ShellError> {
        let _ = self.out.flush();
        self.emit.close().map_err(|error| ShellError {
            file: origin.to_path_buf(),
            line: 0,
            error,
        })
    }

    fn include(&mut self, path: &Path, line: usize, from: &Path) -> Result<(), ShellError> {
        let at = |error| ShellError { file: from.to_path_buf(), line, error };
        let canon = path.canonicalize().unwrap_or_else(|_| path.to_path_buf());
        if self.files.iter().any(|f| f.canonicalize().unwrap_or_else(|_| f.clone()) == canon) {
            return Err(at(CommandError::IncludeCycle(path.to_path_buf())));
        }
        let text = std::fs::read_to_string(path).map_err(|source| {
            at(CommandError::Io { path: path.to_path_buf(), source })
        })?;
        self.files.push(path.to_path_buf());
        let r = self.run_lines(&text, path);
        self.files.pop();
        r
    }

    fn run_lines(&mut self, text: &str, file: &Path) -> Result<(), ShellError> {
        for (i, raw) in text.lines().enumerate() {
            if self.quit {
                break;
            }
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            self.command(line, file, i + 1).map_err(|e| match e {
                Nested::Here(error) => ShellError { file: file.to_path_buf(), line: i + 1, error },
                Nested::Inner(e) => e,
            })?;
        }
        Ok(())
    }

    fn input_path(&self, file: &Path, name: &str) -> PathBuf {
        let p = Path::new(name);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            file.parent().unwrap_or(Path::new("")).join(p)
        }
    }

    fn output_path(&self, file: &Path, name: &str) -> PathBuf {
        let p = Path::new(name);
        match &self.options.out_dir {
            _ if p.is_absolute() => p.to_path_buf(),
            Some(dir) => dir.join(p),
            None => file.parent().unwrap_or(Path::new("")).join(p),
        }
    }

    fn command(&mut self, line: &str, file: &Path, lineno: usize) -> Result<(), Nested> {
        let (head, rest) = split_word(line);
        match head {
            "xgrs" => self.xgrs(rest, self.options.debug_all).map_err(Nested::Here),
            "debug" => {
                let (sub, rest2) = split_word(rest);
                match sub {
                    "xgrs" => self.xgrs(rest2, true).map_err(Nested::Here),
                    "set" => self.debug_set(&words(rest2)?).map_err(Nested::Here),
                    _ => Err(Nested::Here(CommandError::Usage("debug xgrs <sequence> | debug set layout ...".into()))),
                }
            }
            "include" => {
                let args = words(rest)?;
                let [name] = args.as_slice() else {
                    return Err(Nested::Here(CommandError::Usage("include <file.grsi>".into())));
                };
                let path = self.input_path(file, name);
                self.include(&path, lineno, file).map_err(Nested::Inner)
            }
            _ => {
                let args = words(rest)?;
                self.simple(head, &args, file).map_err(Nested::Here)
            }
        }
    }

    fn simple(&mut self, head: &str, args: &[String], file: &Path) -> Result<(), CommandError> {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        match (head, args.as_slice()) {
            ("import", files) if !files.is_empty() => self.import(files, file),
            ("import", _) => Err(CommandError::Usage("import <model.ecore|.gm>... [<instance.xmi|.native>] [<rules.grg>]".into())),
            ("new", ["graph", files @ ..]) if !files.is_empty() => {
                if files.iter().any(|f| is_instance(f)) {
                    return Err(CommandError::Usage("new graph takes models and rules only".into()));
                }
                self.import(files, file)
            }
            ("new", _) => Err(CommandError::Usage("new graph \"<model.gm|rules.grg>\"".into())),
            ("redirect", ["emit", target]) => {
                self.emit.close()?;
                self.emit = if *target == "-" {
                    EmitTarget::Output
                } else {
                    EmitTarget::file(self.output_path(file, target))
                };
                Ok(())
            }
            ("redirect", _) => Err(CommandError::Usage("redirect emit <file>|-".into())),
            ("show", ["graph", rest @ ..]) if rest.len() <= 1 => self.show_graph(rest.first().copied(), file),
            ("show", ["num", what, rest @ ..]) => self.show_num(what, rest),
            ("show", _) => Err(CommandError::Usage("show graph [<file.dot>] | show num nodes|edges [only] [<type>]".into())),
            ("export", [target]) => {
                let path = self.output_path(file, target);
                let format = Format::from_path(&path)
                    .ok_or_else(|| CommandError::Usage("export <file.dot|.gxl|.native>".into()))?;
                let g = self.graph.as_ref().ok_or(CommandError::NoGraph)?;
                write_file(&path, &export::export(g, &self.styles, format))
            }
            ("export", _) => Err(CommandError::Usage("export <file.dot|.gxl|.native>".into())),
            ("dump", [verb, rest @ ..]) => self.dump(verb, rest),
            ("dump", _) => Err(CommandError::Usage("dump set|add node|edge [only] <type> ...".into())),
            ("echo", words) => {
                let _ = writeln!(self.out, "{}", words.join(" "));
                Ok(())
            }
            ("quit" | "exit", []) => {
                self.quit = true;
                self.emit.close()
            }
            _ => Err(CommandError::UnknownCommand(head.to_string())),
        }
    }

    fn import(&mut self, files: &[&str], script: &Path) -> Result<(), CommandError> {
        let mut metamodels = Vec::new();
        let mut graphs: Vec<(String, TypeGraph)> = Vec::new();
        let mut instance = None;
        let mut rules_path = None;
        for name in files {
            let path = self.input_path(script, name);
            match extension(name) {
                "ecore" => metamodels.push(load_ecore(&path)?),
                "gm" => graphs.push(load_gm(&path)?),
                "xmi" | "native" | "grn" if instance.is_none() => instance = Some(path),
                "grg" if rules_path.is_none() => rules_path = Some(path),
                _ => return Err(CommandError::Usage(format!("unexpected import argument `{name}`"))),
            }
        }

        let mut parsed = None;
        if let Some(path) = &rules_path {
            let src = read(path)?;
            let dir = path.parent().unwrap_or(Path::new("")).to_path_buf();
            let resolver = move |inc: &str| std::fs::read_to_string(dir.join(inc)).ok();
            let label = path.display().to_string();
            let (ast, map) = parse_rule_file(&src, &label, &resolver).map_err(CommandError::Rules)?;
            let dir = path.parent().unwrap_or(Path::new(""));
            for using in &ast.models {
                let known = metamodels.iter().any(|m: &Metamodel| &m.name == using) || graphs.iter().any(|(n, _)| n == using);
                if known {
                    continue;
                }
                let gm = dir.join(format!("{using}.gm"));
                let ecore_file = using.strip_suffix("__ecore").map(|stem| dir.join(format!("{stem}.ecore")));
                if gm.is_file() {
                    graphs.push(load_gm(&gm)?);
                } else if let Some(e) = ecore_file.filter(|e| e.is_file()) {
                    metamodels.push(load_ecore(&e)?);
                } else {
                    return Err(CommandError::UnknownModel(using.clone()));
                }
            }
            parsed = Some((ast, map));
        }

        let extra: Vec<TypeGraph> = graphs.into_iter().map(|(_, g)| g).collect();
        let model = Arc::new(ecore::merge_models(&metamodels, &extra).map_err(|source| CommandError::Ecore {
            path: PathBuf::from(files[0]),
            source,
        })?);
        let mut g = Graph::new(model.clone());
        if let Some(path) = instance {
            let text = read(&path)?;
            if extension(&path.to_string_lossy()) == "xmi" {
                xmi::import_instance(&text, &metamodels, &mut g)
                    .map_err(|source| CommandError::Xmi { path: path.clone(), source })?;
            } else {
                g = read_native(&text, model.clone()).map_err(|source| CommandError::Native { path: path.clone(), source })?;
            }
        }
        let rules = match parsed {
            Some((ast, map)) => {
                let rs = RuleSet::new(&ast, &map, model).map_err(CommandError::Rules)?;
                for d in rs.diagnostics().filter(|d| d.severity == Severity::Warning) {
                    eprintln!("{d}");
                }
                Some(rs)
            }
            None => None,
        };
        self.metamodels = metamodels;
        self.graph = Some(g);
        self.rules = rules;
        self.vars.clear();
        Ok(())
    }

    fn xgrs(&mut self, text: &str, debug: bool) -> Result<(), CommandError> {
        let seq = parse_sequence(text).map_err(CommandError::Sequence)?;
        let rules = self.rules.as_ref().ok_or(CommandError::NoRules)?;
        validate(&seq, rules)?;
        let graph = self.graph.as_mut().ok_or(CommandError::NoGraph)?;
        let Shell { styles, vars, emit, out, debugger, observer, options, .. } = self;
        let mut sink = Sink { target: emit, out: &mut **out };
        let session = match debugger.as_mut() {
            Some(server) if debug => Some(server.session()),
            _ => None,
        };
        let mut dbg = session.map(|s| DebugObserver::new(s, styles));
        let mut tee = Tee(
            dbg.as_mut().map(|d| d as &mut dyn Observer),
            observer.as_deref_mut().map(|o| o as &mut dyn Observer),
        );
        let watched = tee.0.is_some() || tee.1.is_some();
        let mut exec = Exec {
            graph,
            rules,
            vars,
            sink: &mut sink,
            observer: if watched { Some(&mut tee) } else { None },
            max_iter: options.max_iter.unwrap_or(DEFAULT_MAX_ITER),
        };
        let result = exec.run(&seq);
        drop(exec);
        drop(tee);
        if let (Err(e), Some(d)) = (&result, dbg.as_mut()) {
            d.error(&e.to_string());
        }
        self.emit.take_error()?;
        result.map(|_| ()).map_err(CommandError::Exec)
    }

    fn show_graph(&mut self, target: Option<&str>, file: &Path) -> Result<(), CommandError> {
        let g = self.graph.as_ref().ok_or(CommandError::NoGraph)?;
        self.shows += 1;
        let name = target.map_or_else(|| format!("graph{}.dot", self.shows), str::to_string);
        let path = self.output_path(file, &name);
        let format = Format::from_path(&path).unwrap_or(Format::Dot);
        write_file(&path, &export::export(g, &self.styles, format))?;
        if let Some(session) = self.debugger.as_mut().and_then(DebugServer::attached) {
            debug::send_snapshot(session, g, &self.styles);
        }
        Ok(())
    }

    fn show_num(&mut self, what: &str, rest: &[&str]) -> Result<(), CommandError> {
        let g = self.graph.as_ref().ok_or(CommandError::NoGraph)?;
        let kind = match what {
            "nodes" => ElementKind::Node,
            "edges" => ElementKind::Edge,
            _ => return Err(CommandError::Usage("show num nodes|edges [only] [<type>]".into())),
        };
        let (mode, ty) = match rest {
            [] => (CountMode::WithSubtypes, None),
            ["only", t] => (CountMode::Exact, Some(*t)),
            [t] => (CountMode::WithSubtypes, Some(*t)),
            _ => return Err(CommandError::Usage("show num nodes|edges [only] [<type>]".into())),
        };
        let ty = ty.unwrap_or(kind.root());
        g.model().resolve_kind(ty, kind)?;
        let n = g.count_elements(ty, mode)?;
        let _ = writeln!(self.out, "{n}");
        Ok(())
    }

    fn dump(&mut self, verb: &str, args: &[&str]) -> Result<(), CommandError> {
        let usage = || CommandError::Usage("dump set|add node|edge [only] <type> <setting> [<value>]".into());
        let (kind, rest) = match args {
            ["node", rest @ ..] => (ElementKind::Node, rest),
            ["edge", rest @ ..] => (ElementKind::Edge, rest),
            _ => return Err(usage()),
        };
        let (only, rest) = match rest {
            ["only", rest @ ..] => (true, rest),
            rest => (false, rest),
        };
        let [ty, rest @ ..] = rest else { return Err(usage()) };
        let g = self.graph.as_ref().ok_or(CommandError::NoGraph)?;
        let tg = g.model();
        tg.resolve_kind(ty, kind)?;
        let rule = |setting| StyleRule { kind, ty: ty.to_string(), only, setting };
        let setting = match (verb, rest) {
            ("set", ["color", v]) => Setting::Color(v.to_string()),
            ("set", ["textcolor", v]) => Setting::TextColor(v.to_string()),
            ("set", ["bordercolor", v]) => Setting::BorderColor(v.to_string()),
            ("set", ["shape", v]) => Setting::Shape(v.to_string()),
            ("set", ["linestyle", v]) => Setting::LineStyle(v.to_string()),
            ("set", ["labels", v]) => Setting::Labels(v.to_string()),
            ("add", ["infotag" | "shortinfotag", attr]) => {
                if !tg.all_attributes(ty)?.iter().any(|(name, _)| name == attr) {
                    return Err(CommandError::Usage(format!("`{ty}` has no attribute `{attr}`")));
                }
                Setting::InfoTag(attr.to_string())
            }
            ("add", ["exclude"]) => Setting::Exclude,
            ("add", ["group", "by", rest @ ..]) if kind == ElementKind::Node => {
                let rest = match rest {
                    ["hidden", rest @ ..] => rest,
                    rest => rest,
                };
                let (edge, child) = match rest {
                    ["outgoing", e] => (*e, None),
                    ["outgoing", e, c] => (*e, Some(*c)),
                    _ => return Err(usage()),
                };
                tg.resolve_kind(edge, ElementKind::Edge)?;
                if let Some(c) = child {
                    tg.resolve_kind(c, ElementKind::Node)?;
                }
                self.styles.groupings.push(Grouping {
                    parent_type: ty.to_string(),
                    edge_type: edge.to_string(),
                    child_type: child.map(str::to_string),
                });
                return Ok(());
            }
            _ => return Err(usage()),
        };
        self.styles.rules.push(rule(setting));
        Ok(())
    }

    fn debug_set(&mut self, args: &[String]) -> Result<(), CommandError> {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        match args.as_slice() {
            ["layout", "option", k, v] => {
                self.styles.layout_options.insert(k.to_string(), v.to_string());
            }
            ["layout", name] => self.styles.layout = Some(name.to_string()),
            _ => return Err(CommandError::Usage("debug set layout <name> | debug set layout option <key> <value>".into())),
        }
        Ok(())
    }
}

enum Nested {
    Here(CommandError),
    Inner(ShellError),
}

impl From<CommandError> for Nested {
    fn from(e: CommandError) -> Self {
        Nested::Here(e)
    }
}

fn is_instance(name: &str) -> bool {
    matches!(extension(name), "xmi" | "native" | "grn")
}

fn extension(name: &str) -> &str {
    Path::new(name).extension().and_then(|e| e.to_str()).unwrap_or("")
}

fn read(path: &Path) -> Result<String, CommandError> {
    std::fs::read_to_string(path).map_err(|source| CommandError::Io { path: path.to_path_buf(), source })
}

fn write_file(path: &Path, text: &str) -> Result<(), CommandError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CommandError::Io { path: dir.to_path_buf(), source })?;
    }
    std::fs::write(path, text).map_err(|source| CommandError::Io { path: path.to_path_buf(), source })
}

fn load_ecore(path: &Path) -> Result<Metamodel, CommandError> {
    let text = read(path)?;
    let mm = ecore::import_ecore(&text, &ecore::model_name(path))
        .map_err(|source| CommandError::Ecore { path: path.to_path_buf(), source })?;
    // each note once per process and metamodel, not once per import
    static SEEN: Mutex<BTreeSet<(String, String)>> = Mutex::new(BTreeSet::new());
    let mut seen = SEEN.lock().unwrap_or_else(|e| e.into_inner());
    for note in &mm.notes {
        if seen.insert((mm.name.clone(), note.clone())) {
            eprintln!("{}: note: {note}", path.display());
        }
    }
    Ok(mm)
}

fn load_gm(path: &Path) -> Result<(String, TypeGraph), CommandError> {
    let text = read(path)?;
    let tg = parse_model(&text).map_err(|source| CommandError::Model { path: path.to_path_buf(), source })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("").to_string();
    Ok((stem, tg))
}

fn split_word(line: &str) -> (&str, &str) {
    let line = line.trim_start();
    match line.find(char::is_whitespace) {
        Some(i) => (&line[..i], line[i..].trim()),
        None => (line, ""),
    }
}

/// Splits arguments on whitespace. Double quotes group words and allow
/// `\"` and `\\` escapes; an unquoted `#` starts a comment.
fn words(text: &str) -> Result<Vec<String>, Nested> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    loop {
        while chars.next_if(|c| c.is_whitespace()).is_some() {}
        let Some(&c) = chars.peek() else { break };
        if c == '#' {
            break;
        }
        let mut word = String::new();
        if c == '"' {
            chars.next();
            loop {
                match chars.next() {
                    Some('"') => break,
                    Some('\\') => match chars.next() {
                        Some(e) => word.push(e),
                        None => return Err(Nested::Here(CommandError::Usage("unterminated string".into()))),
                    },
                    Some(c) => word.push(c),
                    None => return Err(Nested::Here(CommandError::Usage("unterminated string".into()))),
                }
            }
        } else {
            while let Some(c) = chars.next_if(|c| !c.is_whitespace()) {
                word.push(c);
            }
        }
        out.push(word);
    }
    Ok(out)
}
