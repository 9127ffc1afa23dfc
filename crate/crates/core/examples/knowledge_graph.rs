//! Turns the phone story's rules into a knowledge graph, groups two of
//! them, exports GraphML and converts the graph back to rules.

use star_core::graph::{export, graph_to_star, group_rules, star_to_graph, validate, ExportFormat};
use star_core::parser::parse_domain;

fn main() {
    let domain = parse_domain(include_str!("../fixtures/phone_knowledge.star")).into_result().unwrap();
    let graph = star_to_graph(&domain);
    println!("{} nodes, {} edges", graph.nodes.len(), graph.edges.len());

    let graph = group_rules(&graph, &["c01", "c02"], "asking and agreeing").unwrap();
    assert!(validate(&graph).is_empty());

    let xml = String::from_utf8(export(&graph, ExportFormat::GraphMl)).unwrap();
    println!("GraphML: {} bytes", xml.len());

    print!("{}", graph_to_star(&graph).unwrap());

    // A rule with two heads is reported against the offending edges.
    let mut broken = graph.clone();
    let head = broken.edges.iter().find(|e| e.kind == star_core::graph::EdgeKind::Head).unwrap().clone();
    broken.edges.push(star_core::graph::GraphEdge { id: "extra".into(), ..head });
    for d in graph_to_star(&broken).unwrap_err() {
        println!("{d}");
    }
}
