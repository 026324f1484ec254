//! Random XMI instances for the graph and relation metamodels of the task
//! corpus.

use std::fmt::Write;

use rand::Rng;

const HEADER: &str = r#"<?xml version="1.0" encoding="UTF-8"?>"#;
const NS: &str = r#"xmi:version="2.0" xmlns:xmi="http://www.omg.org/XMI" xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance""#;

/// A graph instance: node objects plus edge objects with optional ends.
/// Node `i` is named `n{i+1}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GraphInstance {
    pub nodes: usize,
    pub edges: Vec<(Option<usize>, Option<usize>)>,
}

impl GraphInstance {
    /// At most `max_objects` node and edge objects. Loops, parallel edges
    /// and missing ends all occur with useful frequency.
    pub fn random(rng: &mut impl Rng, max_objects: usize) -> GraphInstance {
        let total = rng.gen_range(0..=max_objects);
        let nodes = if total == 0 { 0 } else { rng.gen_range(1..=total.div_ceil(2).max(1)) };
        let mut edges = Vec::new();
        for _ in nodes..total {
            let src = random_end(rng, nodes);
            let trg = if rng.gen_bool(0.15) { src } else { random_end(rng, nodes) };
            edges.push((src, trg));
        }
        GraphInstance { nodes, edges }
    }

    pub fn to_xmi(&self) -> String {
        let mut out = format!("{HEADER}\n<graph:Graph {NS} xmlns:graph=\"http://graph\">\n");
        for i in 0..self.nodes {
            let _ = writeln!(out, "  <nodes name=\"n{}\"/>", i + 1);
        }
        for (s, t) in &self.edges {
            out.push_str("  <edges");
            if let Some(s) = s {
                let _ = write!(out, " src=\"//@nodes.{s}\"");
            }
            if let Some(t) = t {
                let _ = write!(out, " trg=\"//@nodes.{t}\"");
            }
            out.push_str("/>\n");
        }
        out.push_str("</graph:Graph>\n");
        out
    }
}

fn random_end(rng: &mut impl Rng, nodes: usize) -> Option<usize> {
    (nodes > 0 && !rng.gen_bool(0.15)).then(|| rng.gen_range(0..nodes))
}

/// A relation over nodes as `linksTo` lists, parallel links allowed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RelationInstance {
    pub links: Vec<Vec<usize>>,
}

impl RelationInstance {
    pub fn random(rng: &mut impl Rng, max_nodes: usize, density: f64) -> RelationInstance {
        let n = rng.gen_range(1..=max_nodes);
        let links = (0..n)
            .map(|_| {
                let mut out = Vec::new();
                for t in 0..n {
                    if rng.gen_bool(density) {
                        out.push(t);
                        if rng.gen_bool(0.1) {
                            out.push(t);
                        }
                    }
                }
                out
            })
            .collect();
        RelationInstance { links }
    }

    pub fn to_xmi(&self) -> String {
        let mut out = format!("{HEADER}\n<moreevolved:Graph {NS} xmlns:moreevolved=\"http://moreevolved\">\n");
        for (i, targets) in self.links.iter().enumerate() {
            let _ = write!(out, "  <nodes name=\"n{}\"", i + 1);
            if !targets.is_empty() {
                let paths: Vec<String> = targets.iter().map(|t| format!("//@nodes.{t}")).collect();
                let _ = write!(out, " linksTo=\"{}\"", paths.join(" "));
            }
            out.push_str("/>\n");
        }
        out.push_str("</moreevolved:Graph>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn random_graphs_respect_the_size_bound() {
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..200 {
            let g = GraphInstance::random(&mut rng, 30);
            assert!(g.nodes + g.edges.len() <= 30);
            assert!(g.edges.iter().flat_map(|(s, t)| [s, t]).flatten().all(|&i| i < g.nodes));
        }
    }

    #[test]
    fn xmi_is_well_formed() {
        let g = GraphInstance { nodes: 2, edges: vec![(Some(0), None), (Some(1), Some(1))] };
        let text = g.to_xmi();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(doc.root_element().children().filter(|n| n.is_element()).count(), 4);
        let r = RelationInstance { links: vec![vec![1, 1], vec![]] };
        assert!(r.to_xmi().contains(r#"linksTo="//@nodes.1 //@nodes.1""#));
    }
}
