use std::path::{Path, PathBuf};
use std::sync::Arc;

use graftool::ecore::{import_ecore, merge_models, Metamodel};
use graftool::fixtures::GraphInstance;
use graftool::xmi::import_instance;
use graftool_core::{CountMode, Graph};
use proptest::prelude::*;

fn models_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/models")
}

fn metamodel(stem: &str) -> Metamodel {
    let text = std::fs::read_to_string(models_dir().join(format!("{stem}.ecore"))).unwrap();
    import_ecore(&text, &format!("{stem}__ecore")).unwrap()
}

fn load(stem: &str, xmi: &str) -> Graph {
    let mm = metamodel(stem);
    let tg = merge_models(std::slice::from_ref(&mm), &[]).unwrap();
    let mut g = Graph::new(Arc::new(tg));
    import_instance(xmi, &[mm], &mut g).unwrap();
    g
}

#[test]
fn greeting_with_person_is_two_nodes_and_one_edge() {
    let g = load(
        "helloworldext",
        r#"<helloworldext:Greeting xmlns:helloworldext="http://helloworldext"><person name="TTC"/></helloworldext:Greeting>"#,
    );
    assert_eq!((g.node_count(), g.edge_count()), (2, 1));
    assert_eq!(g.count_elements("helloworldext_Person", CountMode::Exact).unwrap(), 1);
    assert_eq!(g.count_elements("helloworldext_Greeting_person", CountMode::Exact).unwrap(), 1);
}

#[test]
fn empty_graph_object_is_one_node() {
    let g = load("graph", r#"<graph:Graph xmlns:graph="http://graph"/>"#);
    assert_eq!((g.node_count(), g.edge_count()), (1, 0));
}

#[test]
fn no_import_leaves_an_empty_graph() {
    let tg = merge_models(&[metamodel("graph")], &[]).unwrap();
    let g = Graph::new(Arc::new(tg));
    assert_eq!((g.node_count(), g.edge_count()), (0, 0));
}

/// Object and link counts straight from the XML: every element is an
/// object, every non-root element a containment link, every whitespace
/// separated path in a reference attribute one more link.
fn xml_counts(text: &str, refs: &[&str]) -> (usize, usize) {
    let doc = roxmltree::Document::parse(text).unwrap();
    let elems: Vec<_> = doc.descendants().filter(|n| n.is_element()).collect();
    let refs: usize = elems
        .iter()
        .flat_map(|e| refs.iter().filter_map(|r| e.attribute(*r)))
        .map(|v| v.split_whitespace().count())
        .sum();
    (elems.len(), elems.len() - 1 + refs)
}

#[test]
fn corpus_count_fixture_matches_the_xml() {
    let text = std::fs::read_to_string(models_dir().join("../count/graph.xmi")).unwrap();
    let g = load("graph", &text);
    assert_eq!((g.node_count(), g.edge_count()), xml_counts(&text, &["src", "trg"]));
    assert_eq!(g.check_consistency(), Ok(()));
}

#[test]
fn reference_edges_carry_list_indices() {
    let text = std::fs::read_to_string(models_dir().join("../transitive/relation.xmi")).unwrap();
    let g = load("moreevolved", &text);
    let links = graftool::corpus::read_relation_fixture(&text).unwrap();
    let t = g.model().resolve_kind("moreevolved_Node_linksTo", graftool_core::ElementKind::Edge).unwrap();
    let mut indices: Vec<i64> = g
        .elements_of_type(t, false)
        .into_iter()
        .map(|e| match g.get_attr(e, "index").unwrap() {
            graftool_core::AttributeValue::Int(i) => *i,
            v => panic!("{v:?}"),
        })
        .collect();
    indices.sort();
    let mut expected: Vec<i64> = links.iter().flat_map(|l| 0..l.len() as i64).collect();
    expected.sort();
    assert_eq!(indices, expected);
}

#[test]
fn unsupported_ecore_features_are_named() {
    let text = r#"<ecore:EPackage xmlns:ecore="http://www.eclipse.org/emf/2002/Ecore"
        xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" name="p" nsURI="http://p" nsPrefix="p">
      <eClassifiers xsi:type="ecore:EClass" name="A">
        <eOperations name="run"/>
      </eClassifiers>
    </ecore:EPackage>"#;
    let err = import_ecore(text, "p__ecore").unwrap_err();
    assert!(err.to_string().contains("eOperations"), "{err}");
}

#[test]
fn dangling_paths_are_reported() {
    let mm = metamodel("graph");
    let tg = merge_models(std::slice::from_ref(&mm), &[]).unwrap();
    let mut g = Graph::new(Arc::new(tg));
    let xmi = r#"<graph:Graph xmlns:graph="http://graph"><nodes name="a"/><edges src="//@nodes.4"/></graph:Graph>"#;
    let err = import_instance(xmi, &[mm], &mut g).unwrap_err();
    assert!(err.to_string().contains("//@nodes.4"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Import sizes follow from the instance shape alone.
    #[test]
    fn random_graph_instances_import_to_predictable_sizes(seed in any::<u64>()) {
        use rand::SeedableRng;
        let inst = GraphInstance::random(&mut rand::rngs::StdRng::seed_from_u64(seed), 40);
        let text = inst.to_xmi();
        let g = load("graph", &text);
        let ends: usize = inst.edges.iter().map(|(s, t)| s.is_some() as usize + t.is_some() as usize).sum();
        let objects = inst.nodes + inst.edges.len();
        prop_assert_eq!(g.node_count(), 1 + objects);
        prop_assert_eq!(g.edge_count(), objects + ends);
        prop_assert_eq!((g.node_count(), g.edge_count()), xml_counts(&text, &["src", "trg"]));
    }
}
