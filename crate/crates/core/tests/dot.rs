use dot_parser::{ast, canonical};
use mtagd_core::designer::DesignOptions;
use mtagd_core::io::{to_dot, DotOptions};
use mtagd_core::*;

fn parse(dot: &str) -> canonical::Graph<(String, String)> {
    let graph = ast::Graph::try_from(dot).unwrap_or_else(|e| panic!("invalid DOT: {e}\n{dot}"));
    let graph = graph.filter_map(&|(k, v)| Some((k.into(), v.into())));
    canonical::Graph::from(graph)
}

fn attr<'a>(attrs: impl IntoIterator<Item = &'a (String, String)>, key: &str) -> Option<String> {
    attrs
        .into_iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.clone())
}

fn golden_design() -> Mtag {
    let g = fixtures::golden_mtkg();
    let plan = connect_exact(&g, &fixtures::golden_terminals(), None).unwrap();
    design(&g, &plan, &DesignOptions::default()).unwrap().0
}

#[test]
fn empty_graph_parses() {
    let dot = to_dot(&Mtkg::default(), &DotOptions::default());
    let g = parse(&dot);
    assert!(g.is_digraph);
    assert!(g.nodes.set.is_empty());
    assert!(g.edges.set.is_empty());
    assert_eq!(
        dot.split_whitespace().collect::<Vec<_>>(),
        ["digraph", "mtkg", "{", "}"]
    );
}

#[test]
fn golden_mtkg_matches_file_and_counts() {
    let dot = to_dot(&fixtures::golden_mtkg(), &DotOptions::default());
    assert_eq!(dot, include_str!("golden/golden_mtkg.dot"));
    let g = parse(&dot);
    assert_eq!(g.nodes.set.len(), 5);
    assert_eq!(g.edges.set.len(), 5);
    let both = g
        .edges
        .set
        .iter()
        .filter(|e| attr(&e.attr, "dir").as_deref() == Some("both"))
        .count();
    assert_eq!(both, 2);
    assert_eq!(g.edges.set.len() - both, 3);
}

#[test]
fn golden_mtag_matches_file_and_counts() {
    let dot = to_dot(&golden_design(), &DotOptions::default());
    assert_eq!(dot, include_str!("golden/golden_mtag.dot"));
    let g = parse(&dot);
    assert_eq!(g.nodes.set.len(), 10);
    let dashed = g
        .edges
        .set
        .iter()
        .filter(|e| attr(&e.attr, "style").as_deref() == Some("dashed"))
        .count();
    assert_eq!(dashed, 5);
    assert_eq!(g.edges.set.len() - dashed, 8);
    let boxes = g
        .nodes
        .set
        .values()
        .filter(|n| attr(&n.attr, "shape").as_deref() == Some("box"))
        .count();
    assert_eq!(boxes, 5);
}

#[test]
fn seed_dataset_renders_valid_dot() {
    let dot = to_dot(&build_seed_dataset(), &DotOptions::default());
    let g = parse(&dot);
    let s = stats(&build_seed_dataset());
    assert_eq!(g.nodes.set.len(), s.tasks);
    assert_eq!(g.edges.set.len(), s.undirected_pairs);
}

#[test]
fn rendering_is_deterministic() {
    let a = golden_design();
    assert_eq!(
        to_dot(&a, &DotOptions::default()),
        to_dot(&a.clone(), &DotOptions::default())
    );
}
