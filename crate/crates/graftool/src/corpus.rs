//! The task corpus: each case is a directory with a script, rules and
//! fixtures. A case passes when its oracle, computed from the fixture alone,
//! agrees with the outputs and final graph of the run.

use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::path::{Path, PathBuf};

use graftool_core::{AttributeValue, ElementId, Graph, Observer};
use tempfile::TempDir;

use crate::debug::DebugServer;
use crate::shell::{Shell, ShellOptions};

pub struct Case {
    pub name: &'static str,
    pub script: &'static str,
    /// Instance file a caller may replace with another fixture.
    pub fixture: Option<&'static str>,
    pub oracle: fn(&Outcome) -> Result<(), String>,
}

pub static CASES: &[Case] = &[
    Case { name: "hello-world", script: "HelloWorld.grs", fixture: None, oracle: oracle_hello_world },
    Case { name: "hello-world-ext", script: "HelloWorldExt.grs", fixture: None, oracle: oracle_hello_world_ext },
    Case { name: "hello-world-to-text", script: "HelloWorldToText.grs", fixture: Some("greeting.xmi"), oracle: oracle_to_text },
    Case { name: "count", script: "Count.grs", fixture: Some("graph.xmi"), oracle: oracle_count },
    Case { name: "reverse", script: "Reverse.grs", fixture: Some("graph.xmi"), oracle: oracle_reverse },
    Case { name: "migrate-evolved", script: "SimpleToEvolved.grs", fixture: Some("graph.xmi"), oracle: oracle_evolved },
    Case { name: "migrate-more-evolved", script: "SimpleToMoreEvolved.grs", fixture: Some("graph.xmi"), oracle: oracle_more_evolved },
    Case { name: "delete-trivial", script: "DeleteTrivial.grs", fixture: Some("graph.xmi"), oracle: oracle_delete_trivial },
    Case { name: "delete", script: "Delete.grs", fixture: Some("graph.xmi"), oracle: oracle_delete },
    Case { name: "transitive", script: "Transitive.grs", fixture: Some("relation.xmi"), oracle: oracle_transitive },
    Case { name: "closure", script: "Closure.grs", fixture: Some("relation.xmi"), oracle: oracle_closure },
];

pub fn case(name: &str) -> Option<&'static Case> {
    CASES.iter().find(|c| c.name == name)
}

/// The corpus shipped next to this crate in the source tree.
pub fn default_corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Everything a run produced.
pub struct Outcome {
    /// Private copy of the corpus the script ran in; outputs land here too.
    pub dir: TempDir,
    pub case: &'static Case,
    pub shell: Shell,
    pub output: String,
}

impl Outcome {
    pub fn case_dir(&self) -> PathBuf {
        self.dir.path().join(self.case.name)
    }

    pub fn graph(&self) -> &Graph {
        self.shell.graph().expect("every case builds a graph")
    }

    pub fn read(&self, name: &str) -> Result<String, String> {
        std::fs::read_to_string(self.case_dir().join(name)).map_err(|e| format!("{name}: {e}"))
    }

    fn fixture(&self) -> Result<String, String> {
        self.read(self.case.fixture.ok_or("case has no fixture")?)
    }
}

#[derive(Default)]
pub struct RunOptions {
    /// Replaces the case's instance file.
    pub fixture: Option<String>,
    pub debugger: Option<DebugServer>,
    pub debug_all: bool,
    pub observer: Option<Box<dyn Observer + Send>>,
    pub max_iter: Option<u64>,
}

fn copy_dir(from: &Path, to: &Path) -> io::Result<()> {
    std::fs::create_dir_all(to)?;
    for entry in std::fs::read_dir(from)? {
        let entry = entry?;
        let target = to.join(entry.file_name());
        if entry.file_type()?.is_dir() {
            copy_dir(&entry.path(), &target)?;
        } else {
            std::fs::copy(entry.path(), target)?;
        }
    }
    Ok(())
}

/// Copies the shared models and the case into a fresh directory, swapping
/// in `fixture` when given.
pub fn stage(corpus: &Path, case: &Case, fixture: Option<&str>) -> Result<TempDir, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let err = |e: io::Error| format!("staging {}: {e}", case.name);
    copy_dir(&corpus.join("models"), &dir.path().join("models")).map_err(err)?;
    copy_dir(&corpus.join(case.name), &dir.path().join(case.name)).map_err(err)?;
    if let Some(text) = fixture {
        let name = case.fixture.ok_or_else(|| format!("{} takes no fixture", case.name))?;
        std::fs::write(dir.path().join(case.name).join(name), text).map_err(err)?;
    }
    Ok(dir)
}

/// Runs a case script in a staged copy. Script failures are errors; the
/// oracle is not consulted.
pub fn run_case(corpus: &Path, case: &'static Case, opts: RunOptions) -> Result<Outcome, String> {
    let dir = stage(corpus, case, opts.fixture.as_deref())?;
    let options = ShellOptions {
        max_iter: opts.max_iter,
        debug_all: opts.debug_all,
        ..ShellOptions::default()
    };
    let (mut shell, out) = Shell::captured(options);
    if let Some(server) = opts.debugger {
        shell.attach_debugger(server);
    }
    if let Some(o) = opts.observer {
        shell.set_observer(o);
    }
    shell
        .run_file(&dir.path().join(case.name).join(case.script))
        .map_err(|e| e.to_string())?;
    Ok(Outcome { dir, case, shell, output: out.text() })
}

/// Runs a case and checks it against its oracle.
pub fn check_case(corpus: &Path, case: &'static Case, opts: RunOptions) -> Result<Outcome, String> {
    let outcome = run_case(corpus, case, opts)?;
    outcome.graph().check_consistency().map_err(|e| format!("inconsistent graph: {e}"))?;
    (case.oracle)(&outcome)?;
    Ok(outcome)
}

// ---- fixture readers, independent of the importer ----

/// Node objects and edge objects of a graph instance as positions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GraphFixture {
    pub names: Vec<String>,
    pub edges: Vec<(Option<usize>, Option<usize>)>,
}

fn node_path(path: &str) -> Result<usize, String> {
    path.strip_prefix("//@nodes.")
        .and_then(|i| i.parse().ok())
        .ok_or_else(|| format!("unexpected reference `{path}`"))
}

pub fn read_graph_fixture(text: &str) -> Result<GraphFixture, String> {
    let doc = roxmltree::Document::parse(text).map_err(|e| e.to_string())?;
    let mut f = GraphFixture::default();
    for child in doc.root_element().children().filter(|n| n.is_element()) {
        match child.tag_name().name() {
            "nodes" => f.names.push(child.attribute("name").unwrap_or_default().to_string()),
            "edges" => {
                let end = |a| child.attribute(a).map(node_path).transpose();
                f.edges.push((end("src")?, end("trg")?));
            }
            other => return Err(format!("unexpected element `{other}`")),
        }
    }
    Ok(f)
}

/// `linksTo` lists of a relation instance.
pub fn read_relation_fixture(text: &str) -> Result<Vec<Vec<usize>>, String> {
    let doc = roxmltree::Document::parse(text).map_err(|e| e.to_string())?;
    doc.root_element()
        .children()
        .filter(|n| n.has_tag_name("nodes"))
        .map(|n| n.attribute("linksTo").unwrap_or("").split_whitespace().map(node_path).collect())
        .collect()
}

// ---- views of the final graph ----

fn int_attr(g: &Graph, id: ElementId, name: &str) -> Result<i64, String> {
    match g.get_attr(id, name) {
        Ok(AttributeValue::Int(i)) => Ok(*i),
        other => Err(format!("element {id} attribute {name}: {other:?}")),
    }
}

fn str_attr(g: &Graph, id: ElementId, name: &str) -> Result<String, String> {
    match g.get_attr(id, name) {
        Ok(AttributeValue::String(s)) => Ok(s.clone()),
        other => Err(format!("element {id} attribute {name}: {other:?}")),
    }
}

fn of_type(g: &Graph, ty: &str) -> Vec<ElementId> {
    g.model().lookup(ty).map_or_else(Vec::new, |t| g.elements_of_type(t, true))
}

/// Targets of `link` edges keyed by their `index`, restricted to `target`.
fn contained(g: &Graph, link: &str, target: &str) -> Result<BTreeMap<i64, ElementId>, String> {
    let mut out = BTreeMap::new();
    for e in of_type(g, link) {
        let (_, t) = g.endpoints(e).ok_or("dead edge")?;
        if g.type_name(t) != Some(target) {
            continue;
        }
        if out.insert(int_attr(g, e, "index")?, t).is_some() {
            return Err(format!("duplicate containment index on {link}"));
        }
    }
    Ok(out)
}

/// The unique target of `node`'s outgoing `link` edge, if any.
fn single(g: &Graph, node: ElementId, link: &str) -> Result<Option<ElementId>, String> {
    let targets: Vec<ElementId> = g
        .outgoing(node)
        .filter(|&e| g.type_name(e) == Some(link))
        .map(|e| g.endpoints(e).expect("live").1)
        .collect();
    match targets.as_slice() {
        [] => Ok(None),
        [t] => Ok(Some(*t)),
        _ => Err(format!("node {node} has {} `{link}` links", targets.len())),
    }
}

/// Node and edge objects read back from a graph in the simple or evolved
/// shape. Nodes are keyed by their original containment index.
struct GraphView {
    nodes: BTreeMap<i64, ElementId>,
    edges: BTreeMap<i64, (Option<i64>, Option<i64>)>,
}

struct Shape<'a> {
    node_link: &'a str,
    edge_link: &'a str,
    node: &'a str,
    edge: &'a str,
    src: &'a str,
    trg: &'a str,
}

const SIMPLE: Shape = Shape {
    node_link: "graph_Graph_nodes",
    edge_link: "graph_Graph_edges",
    node: "graph_Node",
    edge: "graph_Edge",
    src: "graph_Edge_src",
    trg: "graph_Edge_trg",
};

fn view(g: &Graph, s: &Shape) -> Result<GraphView, String> {
    let nodes = contained(g, s.node_link, s.node)?;
    let pos: BTreeMap<ElementId, i64> = nodes.iter().map(|(&i, &n)| (n, i)).collect();
    let end = |e, link| -> Result<Option<i64>, String> {
        Ok(match single(g, e, link)? {
            Some(n) => Some(*pos.get(&n).ok_or_else(|| format!("{link} of {e} points outside the graph"))?),
            None => None,
        })
    };
    let mut edges = BTreeMap::new();
    for (i, e) in contained(g, s.edge_link, s.edge)? {
        edges.insert(i, (end(e, s.src)?, end(e, s.trg)?));
    }
    if g.nodes().count() != 1 + nodes.len() + edges.len() {
        return Err(format!(
            "{} nodes, expected the graph object plus {} nodes and {} edges",
            g.node_count(),
            nodes.len(),
            edges.len()
        ));
    }
    Ok(GraphView { nodes, edges })
}

fn expect<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, expected {want:?}"))
    }
}

fn fixture_edges(f: &GraphFixture) -> BTreeMap<i64, (Option<i64>, Option<i64>)> {
    let idx = |x: Option<usize>| x.map(|i| i as i64);
    f.edges.iter().enumerate().map(|(i, &(s, t))| (i as i64, (idx(s), idx(t)))).collect()
}

fn no_types_with_prefix(g: &Graph, prefix: &str) -> Result<(), String> {
    match g.nodes().chain(g.edges()).find(|&x| g.type_name(x).is_some_and(|t| t.starts_with(prefix))) {
        Some(x) => Err(format!("element {x} still has type {}", g.type_name(x).unwrap_or("?"))),
        None => Ok(()),
    }
}

// ---- oracles ----

fn oracle_hello_world(o: &Outcome) -> Result<(), String> {
    let g = o.graph();
    expect("element count", (g.node_count(), g.edge_count()), (1, 0))?;
    let n = g.nodes().next().expect("one node");
    expect("type", g.type_name(n), Some("helloworld_Greeting"))?;
    expect("text", str_attr(g, n, "_text")?, "Hello World".to_string())?;
    let dot = o.read("graph1.dot")?;
    expect("dot node statements", dot.lines().filter(|l| l.contains(" [label=")).count(), 1)
}

fn oracle_hello_world_ext(o: &Outcome) -> Result<(), String> {
    let g = o.graph();
    expect("element count", (g.node_count(), g.edge_count()), (3, 2))?;
    let greeting = of_type(g, "helloworldext_Greeting");
    let [greeting] = greeting.as_slice() else { return Err("expected one greeting".into()) };
    let msg = single(g, *greeting, "helloworldext_Greeting_greetingMessage")?.ok_or("no message")?;
    let person = single(g, *greeting, "helloworldext_Greeting_person")?.ok_or("no person")?;
    expect("message", str_attr(g, msg, "_text")?, "Hello".to_string())?;
    expect("person", str_attr(g, person, "_name")?, "TTC Participants".to_string())
}

fn result_attr(xmi: &str) -> Result<String, String> {
    let doc = roxmltree::Document::parse(xmi).map_err(|e| e.to_string())?;
    doc.root_element().attribute("result").map(str::to_string).ok_or_else(|| "no result attribute".into())
}

/// Message text followed by person name, read straight from the fixture.
pub fn greeting_text(fixture: &str) -> Result<String, String> {
    let doc = roxmltree::Document::parse(fixture).map_err(|e| e.to_string())?;
    let find = |tag: &str, attr: &str| {
        doc.descendants()
            .find(|n| n.has_tag_name(tag))
            .and_then(|n| n.attribute(attr))
            .map(str::to_string)
            .ok_or_else(|| format!("fixture lacks {tag}/@{attr}"))
    };
    Ok(find("greetingMessage", "text")? + &find("person", "name")?)
}

fn oracle_to_text(o: &Outcome) -> Result<(), String> {
    let want = greeting_text(&o.fixture()?)?;
    expect("emitted text", o.read("result.txt")?, want.clone())?;
    expect("result model", result_attr(&o.read("result.xmi")?)?, want)
}

/// Brute-force counts over a graph fixture, in the order nodes, loops,
/// dangling edges, isolated nodes, three-cycles.
pub fn count_oracle(f: &GraphFixture) -> [usize; 5] {
    let loops = f.edges.iter().filter(|(s, t)| s.is_some() && s == t).count();
    let dangling = f.edges.iter().filter(|(s, t)| s.is_none() || t.is_none()).count();
    let touched: BTreeSet<usize> = f.edges.iter().flat_map(|&(s, t)| [s, t]).flatten().collect();
    let isolated = (0..f.names.len()).filter(|n| !touched.contains(n)).count();
    let full: Vec<(usize, usize)> = f.edges.iter().filter_map(|&(s, t)| Some((s?, t?))).collect();
    let mut rotations = 0;
    for (i, &(a, b)) in full.iter().enumerate() {
        for (j, &(b2, c)) in full.iter().enumerate() {
            for (k, &(c2, a2)) in full.iter().enumerate() {
                let distinct_edges = i != j && j != k && i != k;
                let distinct_nodes = a != b && b != c && a != c;
                if distinct_edges && distinct_nodes && b2 == b && c2 == c && a2 == a {
                    rotations += 1;
                }
            }
        }
    }
    [f.names.len(), loops, dangling, isolated, rotations / 3]
}

pub const COUNT_FILES: [&str; 5] = ["numNodes.xmi", "numLoops.xmi", "numDangling.xmi", "numIsolated.xmi", "numCycles.xmi"];

fn oracle_count(o: &Outcome) -> Result<(), String> {
    let f = read_graph_fixture(&o.fixture()?)?;
    let want = count_oracle(&f);
    for (file, want) in COUNT_FILES.iter().zip(want) {
        expect(file, result_attr(&o.read(file)?)?, want.to_string())?;
    }
    expect("show num nodes", o.output.trim().to_string(), want[0].to_string())
}

fn oracle_reverse(o: &Outcome) -> Result<(), String> {
    let f = read_graph_fixture(&o.fixture()?)?;
    let v = view(o.graph(), &SIMPLE)?;
    let want: BTreeMap<_, _> = fixture_edges(&f).into_iter().map(|(i, (s, t))| (i, (t, s))).collect();
    expect("node count", v.nodes.len(), f.names.len())?;
    expect("reversed edges", v.edges, want)
}

fn oracle_evolved(o: &Outcome) -> Result<(), String> {
    let f = read_graph_fixture(&o.fixture()?)?;
    let g = o.graph();
    no_types_with_prefix(g, "graph_")?;
    let shape = Shape {
        node_link: "evolved_Graph_gcs",
        edge_link: "evolved_Graph_gcs",
        node: "evolved_Node",
        edge: "evolved_Edge",
        src: "evolved_Edge_src",
        trg: "evolved_Edge_trg",
    };
    let v = view(g, &shape)?;
    let names: Result<Vec<String>, String> = v.nodes.values().map(|&n| str_attr(g, n, "_name")).collect();
    expect("names", names?, f.names.clone())?;
    expect("edges", v.edges, fixture_edges(&f))
}

fn oracle_more_evolved(o: &Outcome) -> Result<(), String> {
    let f = read_graph_fixture(&o.fixture()?)?;
    let g = o.graph();
    no_types_with_prefix(g, "graph_")?;
    let nodes = contained(g, "moreevolved_Graph_nodes", "moreevolved_Node")?;
    expect("node count", nodes.len(), f.names.len())?;
    expect("element count", g.node_count(), 1 + f.names.len())?;
    let pos: BTreeMap<ElementId, usize> = nodes.values().enumerate().map(|(i, &n)| (n, i)).collect();
    for (i, &n) in nodes.values().enumerate() {
        let mut got = Vec::new();
        let mut indices = Vec::new();
        for e in g.outgoing(n).filter(|&e| g.type_name(e) == Some("moreevolved_Node_linksTo")) {
            got.push(pos[&g.endpoints(e).expect("live").1]);
            indices.push(int_attr(g, e, "index")?);
        }
        let mut want: Vec<usize> = f.edges.iter().filter(|e| e.0 == Some(i)).filter_map(|e| e.1).collect();
        got.sort_unstable();
        want.sort_unstable();
        indices.sort_unstable();
        expect(&format!("links of node {i}"), got, want)?;
        expect(&format!("link indices of node {i}"), indices.clone(), (0..indices.len() as i64).collect())?;
    }
    Ok(())
}

/// Position of the node named `n1`, the delete target.
fn target(f: &GraphFixture) -> Option<usize> {
    f.names.iter().position(|n| n == "n1")
}

fn oracle_delete_trivial(o: &Outcome) -> Result<(), String> {
    let f = read_graph_fixture(&o.fixture()?)?;
    let v = view(o.graph(), &SIMPLE)?;
    let gone = target(&f).map(|i| i as i64);
    let want_nodes: Vec<i64> = (0..f.names.len() as i64).filter(|&i| Some(i) != gone).collect();
    expect("surviving nodes", v.nodes.keys().copied().collect::<Vec<_>>(), want_nodes)?;
    let cut = |x: Option<i64>| x.filter(|&i| Some(i) != gone);
    let want: BTreeMap<_, _> = fixture_edges(&f).into_iter().map(|(i, (s, t))| (i, (cut(s), cut(t)))).collect();
    expect("edges", v.edges, want)
}

fn oracle_delete(o: &Outcome) -> Result<(), String> {
    let f = read_graph_fixture(&o.fixture()?)?;
    let v = view(o.graph(), &SIMPLE)?;
    let gone = target(&f).map(|i| i as i64);
    let want_nodes: Vec<i64> = (0..f.names.len() as i64).filter(|&i| Some(i) != gone).collect();
    expect("surviving nodes", v.nodes.keys().copied().collect::<Vec<_>>(), want_nodes)?;
    let want: BTreeMap<_, _> = fixture_edges(&f)
        .into_iter()
        .filter(|(_, (s, t))| gone.is_none() || (*s != gone && *t != gone))
        .collect();
    expect("edges", v.edges, want)
}

/// Multiplicity of every linked pair in the final relation.
fn relation_view(g: &Graph) -> Result<BTreeMap<(usize, usize), usize>, String> {
    let nodes = contained(g, "moreevolved_Graph_nodes", "moreevolved_Node")?;
    let pos: BTreeMap<ElementId, usize> = nodes.values().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut m = BTreeMap::new();
    for e in of_type(g, "moreevolved_Node_linksTo") {
        let (s, t) = g.endpoints(e).expect("live");
        *m.entry((pos[&s], pos[&t])).or_insert(0) += 1;
    }
    Ok(m)
}

fn multiplicities(links: &[Vec<usize>]) -> BTreeMap<(usize, usize), usize> {
    let mut m = BTreeMap::new();
    for (s, ts) in links.iter().enumerate() {
        for &t in ts {
            *m.entry((s, t)).or_insert(0) += 1;
        }
    }
    m
}

/// Boolean matrix of a relation.
pub fn matrix(links: &[Vec<usize>]) -> Vec<Vec<bool>> {
    let n = links.len();
    let mut m = vec![vec![false; n]; n];
    for (s, ts) in links.iter().enumerate() {
        for &t in ts {
            m[s][t] = true;
        }
    }
    m
}

pub fn bool_product(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).any(|k| a[i][k] && b[k][j])).collect()).collect()
}

pub fn bool_or(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| *p || *q).collect()).collect()
}

/// Least fixpoint of `R ∨ R·R`.
pub fn closure(r: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let mut c = r.to_vec();
    loop {
        let next = bool_or(&c, &bool_product(&c, &c));
        if next == c {
            return c;
        }
        c = next;
    }
}

/// Original links keep their multiplicity; every other pair of `want`
/// appears exactly once.
fn check_relation(o: &Outcome, want: impl Fn(&[Vec<bool>]) -> Vec<Vec<bool>>) -> Result<(), String> {
    let links = read_relation_fixture(&o.fixture()?)?;
    let before = multiplicities(&links);
    let m = want(&matrix(&links));
    let mut expected = BTreeMap::new();
    for (i, row) in m.iter().enumerate() {
        for (j, &on) in row.iter().enumerate() {
            if on {
                expected.insert((i, j), before.get(&(i, j)).copied().unwrap_or(1));
            }
        }
    }
    expect("relation", relation_view(o.graph())?, expected)
}

fn oracle_transitive(o: &Outcome) -> Result<(), String> {
    check_relation(o, |r| bool_or(r, &bool_product(r, r)))
}

fn oracle_closure(o: &Outcome) -> Result<(), String> {
    check_relation(o, closure)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_oracle_by_hand() {
        // a->b, b->c, c->a, a->b again, c->c, d->?, ?->e
        let f = GraphFixture {
            names: ["a", "b", "c", "d", "e", "f"].map(String::from).to_vec(),
            edges: vec![
                (Some(0), Some(1)),
                (Some(1), Some(2)),
                (Some(2), Some(0)),
                (Some(0), Some(1)),
                (Some(2), Some(2)),
                (Some(3), None),
                (None, Some(4)),
            ],
        };
        assert_eq!(count_oracle(&f), [6, 1, 2, 1, 2]);
    }

    #[test]
    fn closure_of_a_chain() {
        let r = matrix(&[vec![1], vec![2], vec![]]);
        let c = closure(&r);
        assert!(c[0][2] && !c[2][0] && !c[0][0]);
        assert!(!bool_or(&r, &bool_product(&r, &r))[0][0]);
    }

    #[test]
    fn fixture_reader_parses_paths() {
        let f = read_graph_fixture(
            r#"<g:Graph xmlns:g="x"><nodes name="a"/><edges src="//@nodes.0"/><edges/></g:Graph>"#,
        )
        .unwrap();
        assert_eq!(f.edges, vec![(Some(0), None), (None, None)]);
        assert!(read_graph_fixture(r#"<g:Graph xmlns:g="x"><edges src="/0"/></g:Graph>"#).is_err());
    }
}
