use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use super::{EdgeKind, GraphError, KnowledgeGraph, NodeKind, Position};
use crate::syntax::Polarity;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    /// The JSON interchange form, re-importable with [`import_json`].
    Json,
    GraphMl,
    /// Drawable elements with shapes and positions, for the UI to rasterize.
    ImageManifest,
}

impl FromStr for ExportFormat {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" | "structured-graph-text" => Ok(ExportFormat::Json),
            "graphml" => Ok(ExportFormat::GraphMl),
            "image-manifest" | "image-placeholder-manifest" | "png" | "jpg" => Ok(ExportFormat::ImageManifest),
            _ => Err(GraphError::UnknownFormat(s.to_string())),
        }
    }
}

pub fn export(graph: &KnowledgeGraph, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Json => {
            let mut s = serde_json::to_string_pretty(graph).expect("graph serializes");
            s.push('\n');
            s.into_bytes()
        }
        ExportFormat::GraphMl => graphml(graph).into_bytes(),
        ExportFormat::ImageManifest => {
            let mut s = serde_json::to_string_pretty(&manifest(graph)).expect("manifest serializes");
            s.push('\n');
            s.into_bytes()
        }
    }
}

pub fn import_json(bytes: &[u8]) -> Result<KnowledgeGraph, GraphError> {
    serde_json::from_slice(bytes).map_err(|e| GraphError::Import(e.to_string()))
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn polarity_name(p: Polarity) -> &'static str {
    match p {
        Polarity::Positive => "positive",
        Polarity::Negative => "negative",
    }
}

const KEYS: &[(&str, &str, &str, &str)] = &[
    ("kind", "all", "kind", "string"),
    ("label", "node", "label", "string"),
    ("polarity", "node", "polarity", "string"),
    ("parent", "node", "parent", "string"),
    ("x", "node", "x", "double"),
    ("y", "node", "y", "double"),
    ("argumentLabel", "edge", "argumentLabel", "string"),
];

fn graphml(graph: &KnowledgeGraph) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" \
         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
         xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns \
         http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n",
    );
    for (id, domain, name, ty) in KEYS {
        let _ = writeln!(out, "  <key id=\"{id}\" for=\"{domain}\" attr.name=\"{name}\" attr.type=\"{ty}\"/>");
    }
    let fluents: Vec<String> = graph.fluents.iter().map(|f| f.signature().to_string()).collect();
    let _ = writeln!(out, "  <key id=\"fluents\" for=\"graph\" attr.name=\"fluents\" attr.type=\"string\"/>");
    out.push_str("  <graph id=\"knowledge\" edgedefault=\"directed\">\n");
    let _ = writeln!(out, "    <data key=\"fluents\">{}</data>", escape(&fluents.join(",")));
    for n in &graph.nodes {
        let _ = writeln!(out, "    <node id=\"{}\">", escape(&n.id));
        let _ = writeln!(out, "      <data key=\"kind\">{}</data>", n.kind.as_str());
        let _ = writeln!(out, "      <data key=\"label\">{}</data>", escape(&n.label));
        if let Some(p) = n.polarity {
            let _ = writeln!(out, "      <data key=\"polarity\">{}</data>", polarity_name(p));
        }
        if let Some(p) = &n.parent {
            let _ = writeln!(out, "      <data key=\"parent\">{}</data>", escape(p));
        }
        if let Some(Position { x, y }) = n.position {
            let _ = writeln!(out, "      <data key=\"x\">{x}</data>\n      <data key=\"y\">{y}</data>");
        }
        out.push_str("    </node>\n");
    }
    for e in &graph.edges {
        let _ = writeln!(
            out,
            "    <edge id=\"{}\" source=\"{}\" target=\"{}\">",
            escape(&e.id),
            escape(&e.source),
            escape(&e.target)
        );
        let _ = writeln!(out, "      <data key=\"kind\">{}</data>", e.kind.as_str());
        if let Some(args) = &e.argument_label {
            let text: Vec<String> = args.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "      <data key=\"argumentLabel\">{}</data>", escape(&text.join(",")));
        }
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

#[derive(Serialize)]
struct Manifest {
    width: f64,
    height: f64,
    nodes: Vec<ManifestNode>,
    edges: Vec<ManifestEdge>,
}

#[derive(Serialize)]
struct ManifestNode {
    id: String,
    shape: &'static str,
    color: &'static str,
    text: String,
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct ManifestEdge {
    id: String,
    source: String,
    target: String,
    dashed: bool,
    text: Option<String>,
}

const CELL: f64 = 160.0;

fn manifest(graph: &KnowledgeGraph) -> Manifest {
    let cols = (graph.nodes.len() as f64).sqrt().ceil().max(1.0) as usize;
    let nodes: Vec<ManifestNode> = graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let pos = n.position.unwrap_or(Position {
                x: (i % cols) as f64 * CELL + CELL / 2.0,
                y: (i / cols) as f64 * CELL + CELL / 2.0,
            });
            let (shape, color) = match n.kind {
                NodeKind::CausalRule => ("octagon", "#f4a261"),
                NodeKind::PropertyRule => ("round-rectangle", "#8ab17d"),
                NodeKind::Literal if n.polarity == Some(Polarity::Negative) => ("ellipse", "#e76f51"),
                NodeKind::Literal => ("ellipse", "#2a9d8f"),
                NodeKind::Group => ("rectangle", "#e9ecef"),
            };
            let text = match n.polarity {
                Some(Polarity::Negative) => format!("-{}", n.label),
                _ => n.label.clone(),
            };
            ManifestNode { id: n.id.clone(), shape, color, text, x: pos.x, y: pos.y }
        })
        .collect();
    let width = nodes.iter().map(|n| n.x).fold(0.0, f64::max) + CELL / 2.0;
    let height = nodes.iter().map(|n| n.y).fold(0.0, f64::max) + CELL / 2.0;
    let edges = graph
        .edges
        .iter()
        .map(|e| ManifestEdge {
            id: e.id.clone(),
            source: e.source.clone(),
            target: e.target.clone(),
            dashed: e.kind == EdgeKind::Priority,
            text: e.argument_label.as_ref().map(|a| a.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")),
        })
        .collect();
    Manifest { width, height, nodes, edges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::caption_graph;

    const NS: &str = "http://graphml.graphdrawing.org/xmlns";

    fn parse(xml: &str) -> roxmltree::Document<'_> {
        roxmltree::Document::parse(xml).expect("well-formed xml")
    }

    #[test]
    fn caption_graph_graphml_counts() {
        let xml = String::from_utf8(export(&caption_graph(), ExportFormat::GraphMl)).unwrap();
        let doc = parse(&xml);
        let count = |tag: &str| doc.descendants().filter(|n| n.has_tag_name((NS, tag))).count();
        assert_eq!(count("node"), 4);
        assert_eq!(count("edge"), 3);
        let graph = doc.descendants().find(|n| n.has_tag_name((NS, "graph"))).unwrap();
        assert_eq!(graph.attribute("edgedefault"), Some("directed"));
        let keys: Vec<&str> =
            doc.descendants().filter(|n| n.has_tag_name((NS, "key"))).filter_map(|n| n.attribute("id")).collect();
        for k in ["kind", "polarity", "label", "argumentLabel"] {
            assert!(keys.contains(&k), "missing key {k}");
        }
        let head_args = doc
            .descendants()
            .filter(|n| n.has_tag_name((NS, "data")) && n.attribute("key") == Some("argumentLabel"))
            .map(|n| n.text().unwrap_or(""))
            .collect::<Vec<_>>();
        assert!(head_args.contains(&"Argument1,Argument2"));
    }

    #[test]
    fn data_keys_are_declared() {
        let xml = String::from_utf8(export(&caption_graph(), ExportFormat::GraphMl)).unwrap();
        let doc = parse(&xml);
        let keys: Vec<&str> =
            doc.descendants().filter(|n| n.has_tag_name((NS, "key"))).filter_map(|n| n.attribute("id")).collect();
        for d in doc.descendants().filter(|n| n.has_tag_name((NS, "data"))) {
            assert!(keys.contains(&d.attribute("key").unwrap()));
        }
    }

    #[test]
    fn empty_graph_graphml() {
        let xml = String::from_utf8(export(&KnowledgeGraph::default(), ExportFormat::GraphMl)).unwrap();
        let doc = parse(&xml);
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name((NS, "node"))).count(), 0);
    }

    #[test]
    fn text_is_escaped() {
        let mut g = caption_graph();
        g.nodes[0].id = "a<&>\"b".into();
        let xml = String::from_utf8(export(&g, ExportFormat::GraphMl)).unwrap();
        let doc = parse(&xml);
        assert!(doc.descendants().any(|n| n.attribute("id") == Some("a<&>\"b")));
    }

    #[test]
    fn json_round_trip() {
        let g = crate::graph::group_rules(&caption_graph(), &["n3"], "g").unwrap();
        assert_eq!(import_json(&export(&g, ExportFormat::Json)).unwrap(), g);
    }

    #[test]
    fn manifest_lists_every_element() {
        let v: serde_json::Value = serde_json::from_slice(&export(&caption_graph(), ExportFormat::ImageManifest)).unwrap();
        assert_eq!(v["nodes"].as_array().unwrap().len(), 4);
        assert_eq!(v["edges"].as_array().unwrap().len(), 3);
        assert!(v["nodes"].as_array().unwrap().iter().any(|n| n["shape"] == "octagon"));
    }

    #[test]
    fn format_names() {
        assert_eq!("graphml".parse::<ExportFormat>().unwrap(), ExportFormat::GraphMl);
        assert_eq!("structured-graph-text".parse::<ExportFormat>().unwrap(), ExportFormat::Json);
        assert_eq!("svg".parse::<ExportFormat>(), Err(GraphError::UnknownFormat("svg".into())));
    }
}
