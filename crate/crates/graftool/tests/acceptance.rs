//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use graftool::corpus::{self, check_case, default_corpus, run_case, RunOptions, CASES};
use graftool::debug::{Command, DebugServer, ScriptedClient};
use graftool::fixtures::{GraphInstance, RelationInstance};
use graftool::shell::{Shell, ShellOptions};
use graftool_core::rules::diag::SourceMap;
use graftool_core::rules::parse_rule_text;
use graftool_core::sequence::{parse_sequence, Exec};
use graftool_core::{
    find_matches, parse_model, write_native, Control, ElementId, Event, Graph, Observer, RuleSet, TypeGraph,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed(limit: Duration, what: &str, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    f()?;
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:?}, limit {limit:?}"))
}

// ---- hello world ----

const SAFE: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 !?.,-_";

fn random_text(rng: &mut StdRng) -> String {
    let n = rng.gen_range(0..12);
    (0..n).map(|_| SAFE[rng.gen_range(0..SAFE.len())] as char).collect()
}

fn greeting(message: &str, person: &str) -> String {
    format!(
        r#"<?xml version="1.0" encoding="UTF-8"?>
<helloworldext:Greeting xmi:version="2.0" xmlns:xmi="http://www.omg.org/XMI" xmlns:helloworldext="http://helloworldext">
  <greetingMessage text="{message}"/>
  <person name="{person}"/>
</helloworldext:Greeting>
"#
    )
}

fn hello_world() -> Outcome {
    let corpus = default_corpus();
    for name in ["hello-world", "hello-world-ext", "hello-world-to-text"] {
        let case = corpus::case(name).unwrap();
        timed(Duration::from_secs(1), name, || check_case(&corpus, case, RunOptions::default()).map(drop))?;
    }
    let case = corpus::case("hello-world-to-text").unwrap();
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..5 {
        let (m, p) = (random_text(&mut rng), random_text(&mut rng));
        let opts = RunOptions { fixture: Some(greeting(&m, &p)), ..RunOptions::default() };
        timed(Duration::from_secs(1), "to-text", || {
            let o = check_case(&corpus, case, opts)?;
            ensure(o.read("result.txt")? == format!("{m}{p}"), || format!("emitted text for {m:?} + {p:?}"))
        })?;
    }
    Ok(())
}

// ---- count ----

fn count() -> Outcome {
    let corpus = default_corpus();
    let case = corpus::case("count").unwrap();
    check_case(&corpus, case, RunOptions::default())?;
    let mut rng = StdRng::seed_from_u64(3);
    for i in 0..5 {
        let inst = GraphInstance::random(&mut rng, 50);
        let opts = RunOptions { fixture: Some(inst.to_xmi()), ..RunOptions::default() };
        check_case(&corpus, case, opts).map_err(|e| format!("fixture {i} ({inst:?}): {e}"))?;
    }
    Ok(())
}

// ---- reverse ----

fn run_script(case: &str, fixture: &str, script: &str) -> Result<(Shell, tempfile::TempDir), String> {
    let case = corpus::case(case).unwrap();
    let dir = corpus::stage(&default_corpus(), case, Some(fixture))?;
    let (mut shell, _) = Shell::captured(ShellOptions::default());
    shell.run_text(script, &dir.path().join(case.name).join("s.grs")).map_err(|e| e.to_string())?;
    Ok((shell, dir))
}

fn reverse() -> Outcome {
    let corpus = default_corpus();
    let case = corpus::case("reverse").unwrap();
    let mut rng = StdRng::seed_from_u64(5);
    for i in 0..100 {
        let inst = GraphInstance::random(&mut rng, 100);
        let xmi = inst.to_xmi();
        check_case(&corpus, case, RunOptions { fixture: Some(xmi.clone()), ..RunOptions::default() })
            .map_err(|e| format!("graph {i}: {e}"))?;
        let import = "import ../models/graph.ecore graph.xmi Reverse.grg";
        let (input, _d1) = run_script("reverse", &xmi, import)?;
        let (twice, _d2) = run_script("reverse", &xmi, &format!("{import}\nxgrs [reverseEdge]\nxgrs [reverseEdge]"))?;
        let (a, b) = (write_native(input.graph().unwrap()), write_native(twice.graph().unwrap()));
        ensure(a == b, || format!("graph {i}: reversing twice changed the graph"))?;
    }
    Ok(())
}

// ---- migration ----

fn substitute(native: &str) -> String {
    native
        .replace("graph_Graph_nodes", "evolved_Graph_gcs")
        .replace("graph_Graph_edges", "evolved_Graph_gcs")
        .replace(" graph_", " evolved_")
}

fn migration() -> Outcome {
    let corpus = default_corpus();
    let evolved = corpus::case("migrate-evolved").unwrap();
    let more = corpus::case("migrate-more-evolved").unwrap();
    let mut rng = StdRng::seed_from_u64(7);
    let mut fixtures = vec![None];
    fixtures.extend((0..20).map(|_| Some(GraphInstance::random(&mut rng, 60).to_xmi())));
    for (i, fixture) in fixtures.into_iter().enumerate() {
        let opts = || RunOptions { fixture: fixture.clone(), ..RunOptions::default() };
        let o = check_case(&corpus, evolved, opts()).map_err(|e| format!("fixture {i}: {e}"))?;
        check_case(&corpus, more, opts()).map_err(|e| format!("fixture {i}: {e}"))?;
        // same ids, endpoints and attributes, only the types renamed
        let xmi = match &fixture {
            Some(x) => x.clone(),
            None => std::fs::read_to_string(corpus.join("migrate-evolved/graph.xmi")).unwrap(),
        };
        let (input, _d) = run_script(
            "migrate-evolved",
            &xmi,
            "import ../models/graph.ecore ../models/evolved.ecore graph.xmi SimpleToEvolved.grg",
        )?;
        let want = substitute(&write_native(input.graph().unwrap()));
        ensure(write_native(o.graph()) == want, || format!("fixture {i}: migration is not a pure retyping"))?;
    }
    Ok(())
}

// ---- delete ----

#[derive(Clone, Default)]
struct Audit {
    rewrites: Arc<Mutex<usize>>,
    broken: Arc<Mutex<Vec<String>>>,
}

impl Observer for Audit {
    fn event(&mut self, event: &Event<'_>, graph: &Graph) -> Control {
        if let Event::PostApply { rule, .. } = event {
            *self.rewrites.lock().unwrap() += 1;
            if let Err(e) = graph.check_consistency() {
                self.broken.lock().unwrap().push(format!("after {rule}: {e}"));
            }
        }
        Control::Continue
    }
}

fn delete() -> Outcome {
    let corpus = default_corpus();
    let mut rng = StdRng::seed_from_u64(13);
    for name in ["delete", "delete-trivial"] {
        let case = corpus::case(name).unwrap();
        let mut fixtures = vec![None];
        fixtures.extend((0..20).map(|_| Some(GraphInstance::random(&mut rng, 40).to_xmi())));
        for (i, fixture) in fixtures.into_iter().enumerate() {
            let audit = Audit::default();
            let opts = RunOptions { fixture, observer: Some(Box::new(audit.clone())), ..RunOptions::default() };
            check_case(&corpus, case, opts).map_err(|e| format!("{name} fixture {i}: {e}"))?;
            let broken = audit.broken.lock().unwrap();
            ensure(broken.is_empty(), || format!("{name} fixture {i}: {broken:?}"))?;
        }
    }
    Ok(())
}

// ---- transitive ----

fn transitive() -> Outcome {
    let corpus = default_corpus();
    let step = corpus::case("transitive").unwrap();
    let star = corpus::case("closure").unwrap();
    check_case(&corpus, step, RunOptions::default())?;
    check_case(&corpus, star, RunOptions::default())?;
    let mut rng = StdRng::seed_from_u64(17);
    for i in 0..50 {
        let density = rng.gen_range(0.02..0.3);
        let rel = RelationInstance::random(&mut rng, 20, density);
        let opts = || RunOptions { fixture: Some(rel.to_xmi()), max_iter: Some(graftool_core::sequence::DEFAULT_MAX_ITER), ..RunOptions::default() };
        check_case(&corpus, step, opts()).map_err(|e| format!("relation {i}: {e}"))?;
        // an iteration cap would fail the script, so passing means it was never hit
        check_case(&corpus, star, opts()).map_err(|e| format!("relation {i}: {e}"))?;
    }
    Ok(())
}

// ---- matcher equivalence ----

const MODEL: &str = "
node class A;
node class B;
node class C extends A, B;
edge class E;
edge class F extends E;
";
const NODE_TYPES: [&str; 4] = ["Node", "A", "B", "C"];
const EDGE_TYPES: [&str; 3] = ["Edge", "E", "F"];

#[derive(Debug, Clone)]
struct Pattern {
    nodes: Vec<usize>,
    /// (type, src, trg) over pattern nodes
    edge: Option<(usize, usize, usize)>,
    hom: bool,
}

/// Every pattern of at most three elements over the test model.
fn all_patterns() -> Vec<Pattern> {
    let mut out = Vec::new();
    let t = 0..NODE_TYPES.len();
    for a in t.clone() {
        out.push(Pattern { nodes: vec![a], edge: None, hom: false });
        for e in 0..EDGE_TYPES.len() {
            out.push(Pattern { nodes: vec![a], edge: Some((e, 0, 0)), hom: false });
        }
        for b in t.clone() {
            for hom in [false, true] {
                out.push(Pattern { nodes: vec![a, b], edge: None, hom });
                for e in 0..EDGE_TYPES.len() {
                    out.push(Pattern { nodes: vec![a, b], edge: Some((e, 0, 1)), hom });
                }
                for c in t.clone() {
                    out.push(Pattern { nodes: vec![a, b, c], edge: None, hom });
                }
            }
        }
    }
    out
}

fn pattern_text(name: &str, p: &Pattern) -> String {
    let mut s = format!("rule {name} {{\n");
    for (i, t) in p.nodes.iter().enumerate() {
        s += &format!("n{i}:{};\n", NODE_TYPES[*t]);
    }
    if let Some((t, a, b)) = p.edge {
        s += &format!("n{a} -e0:{}-> n{b};\n", EDGE_TYPES[t]);
    }
    if p.hom {
        let names: Vec<_> = (0..p.nodes.len()).map(|i| format!("n{i}")).collect();
        s += &format!("hom({});\n", names.join(", "));
    }
    s + "}\n"
}

type Binding = BTreeSet<(String, u64)>;

fn brute_force(g: &Graph, p: &Pattern) -> BTreeSet<Binding> {
    let tg = g.model();
    let nodes: Vec<ElementId> = g.nodes().collect();
    let fits = |id: ElementId, ty: &str| tg.is_subtype(g.type_name(id).unwrap(), ty).unwrap();
    // node_fit[t][i]: node i may stand for a pattern node of type t
    let node_fit: Vec<Vec<bool>> = NODE_TYPES.iter().map(|t| nodes.iter().map(|&n| fits(n, t)).collect()).collect();
    let pos = |n: ElementId| nodes.iter().position(|&x| x == n).unwrap();
    let edges: Vec<(ElementId, [bool; 3], usize, usize)> = g
        .edges()
        .map(|e| {
            let (s, t) = g.endpoints(e).unwrap();
            (e, EDGE_TYPES.map(|ty| fits(e, ty)), pos(s), pos(t))
        })
        .collect();
    let mut out = BTreeSet::new();
    let k = p.nodes.len();
    if nodes.is_empty() {
        return out;
    }
    let mut assign = vec![0usize; k];
    loop {
        let typed = assign.iter().zip(&p.nodes).all(|(&i, &t)| node_fit[t][i]);
        let injective = p.hom || (0..k).all(|i| (i + 1..k).all(|j| assign[i] != assign[j]));
        if typed && injective {
            let base: Binding = assign.iter().enumerate().map(|(i, &n)| (format!("n{i}"), nodes[n].0)).collect();
            match p.edge {
                None => {
                    out.insert(base);
                }
                Some((t, a, b)) => {
                    for &(e, fit, s, d) in &edges {
                        if fit[t] && s == assign[a] && d == assign[b] {
                            let mut with = base.clone();
                            with.insert(("e0".into(), e.0));
                            out.insert(with);
                        }
                    }
                }
            }
        }
        // odometer over node assignments
        let mut i = 0;
        while i < k {
            assign[i] += 1;
            if assign[i] < nodes.len() {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
        if i == k {
            return out;
        }
    }
}

fn multichoose(n: usize, k: usize) -> usize {
    // C(n + k - 1, k)
    (0..k).fold(1usize, |acc, i| acc * (n + i) / (i + 1))
}

/// Host graphs grouped by (node count, edge count) with at most eight
/// elements in total. Small classes are enumerated completely, larger ones
/// by a fixed seeded sample.
fn host_graphs(model: &Arc<TypeGraph>) -> (Vec<Graph>, usize) {
    const EXHAUSTIVE_LIMIT: usize = 2000;
    const SAMPLES: usize = 150;
    let mut out = vec![Graph::new(model.clone())];
    let mut exhaustive = 1;
    let mut rng = StdRng::seed_from_u64(19);
    for n in 1..=8usize {
        for m in 0..=8 - n {
            let options = EDGE_TYPES.len() * n * n;
            let size = 4usize.pow(n as u32).saturating_mul(multichoose(options, m));
            let build = |types: &[usize], edges: &[usize]| {
                let mut g = Graph::new(model.clone());
                let ids: Vec<_> = types.iter().map(|&t| g.add_node(NODE_TYPES[t]).unwrap()).collect();
                for &o in edges {
                    let (t, s, d) = (o / (n * n), (o / n) % n, o % n);
                    g.add_edge(EDGE_TYPES[t], ids[s], ids[d]).unwrap();
                }
                g
            };
            if size <= EXHAUSTIVE_LIMIT {
                exhaustive += size;
                for code in 0..4usize.pow(n as u32) {
                    let types: Vec<usize> = (0..n).map(|i| code / 4usize.pow(i as u32) % 4).collect();
                    // non-decreasing edge option sequences are the multisets
                    let mut edges = vec![0usize; m];
                    loop {
                        out.push(build(&types, &edges));
                        let Some(i) = (0..m).rev().find(|&i| edges[i] + 1 < options) else { break };
                        edges[i] += 1;
                        for j in i + 1..m {
                            edges[j] = edges[i];
                        }
                    }
                }
            } else {
                for _ in 0..SAMPLES {
                    let types: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
                    let edges: Vec<usize> = (0..m).map(|_| rng.gen_range(0..options)).collect();
                    out.push(build(&types, &edges));
                }
            }
        }
    }
    (out, exhaustive)
}

fn matcher_equivalence() -> Outcome {
    timed(Duration::from_secs(60), "matcher suite", || {
        let model = Arc::new(parse_model(MODEL).map_err(|e| e.to_string())?);
        let patterns = all_patterns();
        let text: String = patterns.iter().enumerate().map(|(i, p)| pattern_text(&format!("p{i}"), p)).collect();
        let ast = parse_rule_text(&text).map_err(|e| e.to_string())?;
        let rs = RuleSet::new(&ast, &SourceMap::default(), model.clone()).map_err(|e| format!("{e:?}"))?;
        let (graphs, exhaustive) = host_graphs(&model);
        let mut checks = 0usize;
        for g in &graphs {
            for (i, p) in patterns.iter().enumerate() {
                let rule = rs.rule(&format!("p{i}")).unwrap();
                let found: BTreeSet<Binding> = find_matches(g, rule, &[], None)
                    .map_err(|e| e.to_string())?
                    .iter()
                    .map(|m| m.named_bindings(rule).into_iter().map(|(n, id)| (n, id.0)).collect())
                    .collect();
                let want = brute_force(g, p);
                ensure(found == want, || {
                    format!("pattern {}\non graph\n{}engine {found:?}\noracle {want:?}", pattern_text("p", p), write_native(g))
                })?;
                checks += 1;
            }
        }
        eprintln!(
            "  {} patterns x {} graphs ({exhaustive} from exhaustive classes) = {checks} comparisons",
            patterns.len(),
            graphs.len()
        );
        Ok(())
    })
}

// ---- sequence algebra ----

struct Run {
    graph: Graph,
    rules: RuleSet,
    vars: BTreeMap<String, graftool_core::expr::Value>,
}

impl Run {
    fn new() -> Run {
        let model = Arc::new(parse_model("node class A; node class Mark; node class Token; node class Ghost;").unwrap());
        let src = "
            rule none { g:Ghost; }
            rule one { a:A; }
            rule mark { modify { :Mark; } }
            rule take { t:Token; modify { delete(t); } }
            rule fail { n:A; negative { n; } }
        ";
        let rules = RuleSet::new(&parse_rule_text(src).unwrap(), &SourceMap::default(), model.clone()).unwrap();
        Run { graph: Graph::new(model), rules, vars: BTreeMap::new() }
    }

    fn with(mut self, ty: &str, n: usize) -> Run {
        for _ in 0..n {
            self.graph.add_node(ty).unwrap();
        }
        self
    }

    fn exec(&mut self, text: &str) -> Result<bool, String> {
        let seq = parse_sequence(text).map_err(|e| e.to_string())?;
        let mut sink = String::new();
        Exec {
            graph: &mut self.graph,
            rules: &self.rules,
            vars: &mut self.vars,
            sink: &mut sink,
            observer: None,
            max_iter: 100,
        }
        .run(&seq)
        .map_err(|e| e.to_string())
    }

    fn count(&self, ty: &str) -> usize {
        self.graph.count_elements(ty, graftool_core::CountMode::Exact).unwrap()
    }
}

fn sequence_algebra() -> Outcome {
    // star is always true, whether or not its body ever succeeds
    let mut r = Run::new();
    ensure(r.exec("none*")?, || "none* should be true".into())?;
    let mut r = Run::new().with("Token", 3);
    ensure(r.exec("take*")? && r.count("Token") == 0, || "take* should drain all tokens and succeed".into())?;

    // plus needs at least one success and then behaves like star
    let mut r = Run::new();
    ensure(!r.exec("none+")?, || "none+ should be false".into())?;
    let mut r = Run::new().with("Token", 2);
    ensure(r.exec("take+")? && r.count("Token") == 0, || "take+ should drain tokens".into())?;
    let mut r = Run::new().with("Token", 1);
    ensure(r.exec("take+")?, || "take+ with one token should succeed".into())?;

    // lazy operators skip the right side, strict ones run it; the effect is visible in the graph
    let mut r = Run::new();
    ensure(!r.exec("none && mark")? && r.count("Mark") == 0, || "&& must not run its right side".into())?;
    ensure(!r.exec("none & mark")? && r.count("Mark") == 1, || "& must run its right side".into())?;
    let mut r = Run::new().with("A", 1);
    ensure(r.exec("one || mark")? && r.count("Mark") == 0, || "|| must not run its right side".into())?;
    ensure(r.exec("one | mark")? && r.count("Mark") == 1, || "| must run its right side".into())?;

    // then-right runs both and yields the right result
    let mut r = Run::new();
    ensure(!r.exec("mark ;> none")?, || "mark ;> none should be false".into())?;
    ensure(r.count("Mark") == 1, || "left side of ;> must run".into())?;
    ensure(r.exec("none ;> one ;> mark")? && r.count("Mark") == 2, || "none ;> one ;> mark should be true".into())?;
    let mut r = Run::new().with("A", 1);
    ensure(r.exec("mark ;> one")?, || "mark ;> one should be true".into())?;

    // the cap turns a loop that never stops into an error
    let mut r = Run::new();
    let err = r.exec("mark*").unwrap_err();
    ensure(err.contains("iteration cap"), || format!("mark* should hit the cap, got {err}"))
}

// ---- debug transparency ----

fn debug_transparency() -> Outcome {
    let corpus = default_corpus();
    for case in CASES {
        let plain = run_case(&corpus, case, RunOptions::default())?;
        let server = DebugServer::start(0, None).map_err(|e| e.to_string())?;
        let client = ScriptedClient::connect(server.local_addr(), |_| Command::Continue).map_err(|e| e.to_string())?;
        let opts = RunOptions { debugger: Some(server), debug_all: true, ..RunOptions::default() };
        let debugged = run_case(&corpus, case, opts).map_err(|e| format!("{}: {e}", case.name))?;
        let (a, b) = (write_native(plain.graph()), write_native(debugged.graph()));
        drop(debugged);
        let log = client.finish().map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{}: debugged run differs", case.name))?;
        let sequences = log.iter().filter(|e| e["type"] == "SequenceStarted").count();
        ensure(sequences > 0, || format!("{}: the client saw no sequence", case.name))?;
        ensure(log.iter().filter(|e| e["type"] == "SequenceFinished").count() == sequences, || {
            format!("{}: unfinished sequences in the event log", case.name)
        })?;
    }
    Ok(())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("hello world create and model-to-text", hello_world),
        ("count suite against brute force", count),
        ("reverse twice is identity, once transposes", reverse),
        ("migration retypes in place and indexes links", migration),
        ("delete with consistency after every rewrite", delete),
        ("transitive step and closure against boolean oracles", transitive),
        ("matcher equals brute-force enumeration", matcher_equivalence),
        ("sequence algebra", sequence_algebra),
        ("debug transparency over the corpus", debug_transparency),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        match std::panic::catch_unwind(check) {
            Ok(Ok(())) => println!("PASS {name} ({:.2?})", start.elapsed()),
            Ok(Err(e)) => {
                failed += 1;
                println!("FAIL {name}: {e}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
