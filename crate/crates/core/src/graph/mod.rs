//! Background knowledge as a directed graph of rule and literal nodes, the
//! interchange form of the visual rule editor.
//!
//! Body literals point at their rule, a rule points at its single head
//! literal, and priority edges run from the stronger rule to the weaker one.
//! Argument lists live on the body and head edges. The JSON form of
//! [`KnowledgeGraph`] is described in `docs/graph-format.md`.

mod export;

pub use export::{export, import_json, ExportFormat};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parser::format_domain;
use crate::syntax::{
    Atom, Domain, DomainError, DomainParts, FluentDecl, Item, Literal, Polarity, Priority, Rule, RuleBody, RuleKind,
    RuleLabel, Term,
};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    CausalRule,
    PropertyRule,
    Literal,
    Group,
}

impl NodeKind {
    pub fn is_rule(self) -> bool {
        matches!(self, NodeKind::CausalRule | NodeKind::PropertyRule)
    }

    fn rule_kind(self) -> Option<RuleKind> {
        match self {
            NodeKind::CausalRule => Some(RuleKind::Causal),
            NodeKind::PropertyRule => Some(RuleKind::Property),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::CausalRule => "causal-rule",
            NodeKind::PropertyRule => "property-rule",
            NodeKind::Literal => "literal",
            NodeKind::Group => "group",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    pub kind: NodeKind,
    /// `c01` for rules, `name/arity` for literals, free text for groups.
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarity: Option<Polarity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Position>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    /// literal -> rule
    Body,
    /// rule -> literal
    Head,
    /// stronger rule -> weaker rule
    Priority,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Body => "body",
            EdgeKind::Head => "head",
            EdgeKind::Priority => "priority",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub id: String,
    pub kind: EdgeKind,
    pub source: String,
    pub target: String,
    #[serde(default, rename = "argumentLabel", skip_serializing_if = "Option::is_none")]
    pub argument_label: Option<Vec<Term>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
    #[serde(default)]
    pub fluents: Vec<FluentDecl>,
}

impl KnowledgeGraph {
    pub fn node(&self, id: &str) -> Option<&GraphNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Incoming edges of `id`, in edge order.
    pub fn incoming<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a GraphEdge> + 'a {
        self.edges.iter().filter(move |e| e.target == id)
    }

    pub fn outgoing<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a GraphEdge> + 'a {
        self.edges.iter().filter(move |e| e.source == id)
    }

    pub fn degree(&self, id: &str) -> usize {
        self.edges.iter().filter(|e| e.source == id || e.target == id).count()
    }
}

/// A problem in a graph, with the elements to highlight and how to fix it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuidanceDiagnostic {
    pub message: String,
    pub nodes: Vec<String>,
    pub edges: Vec<String>,
    pub hint: String,
}

impl fmt::Display for GuidanceDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)?;
        let ids: Vec<&str> = self.nodes.iter().chain(&self.edges).map(String::as_str).collect();
        if !ids.is_empty() {
            write!(f, " [{}]", ids.join(", "))?;
        }
        write!(f, "\n  hint: {}", self.hint)
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum GraphError {
    #[error("node `{0}` does not exist")]
    UnknownNode(String),
    #[error("node `{0}` already belongs to a group")]
    AlreadyGrouped(String),
    #[error("groups cannot contain groups (`{0}`)")]
    NestedGroup(String),
    #[error("unknown export format `{0}`")]
    UnknownFormat(String),
    #[error("invalid graph document: {0}")]
    Import(String),
}

/// Splits a literal label `name/arity`.
pub fn parse_literal_label(label: &str) -> Option<(&str, usize)> {
    let (name, arity) = label.rsplit_once('/')?;
    if !crate::syntax::is_constant_name(name) {
        return None;
    }
    Some((name, arity.parse().ok()?))
}

/// Parses a rule node label, in compact (`c01`) or clause (`c(01)`) form.
pub fn parse_rule_label(label: &str) -> Option<RuleLabel> {
    if let Some(l) = RuleLabel::parse_compact(label) {
        return Some(l);
    }
    let inner = label.get(1..)?.strip_prefix('(')?.strip_suffix(')')?;
    RuleLabel::parse_compact(&format!("{}{inner}", label.get(..1)?))
}

fn diag(message: impl Into<String>, nodes: &[&str], edges: &[&str], hint: impl Into<String>) -> GuidanceDiagnostic {
    GuidanceDiagnostic {
        message: message.into(),
        nodes: nodes.iter().map(|s| s.to_string()).collect(),
        edges: edges.iter().map(|s| s.to_string()).collect(),
        hint: hint.into(),
    }
}

/// Structural checks plus the rule-level checks of a STAR domain. The list
/// is empty exactly when [`graph_to_star`] succeeds.
pub fn validate(graph: &KnowledgeGraph) -> Vec<GuidanceDiagnostic> {
    match build_knowledge(graph) {
        Ok(_) => Vec::new(),
        Err(d) => d,
    }
}

fn structural(graph: &KnowledgeGraph) -> Vec<GuidanceDiagnostic> {
    let mut out = Vec::new();
    let mut by_id: HashMap<&str, &GraphNode> = HashMap::new();
    for n in &graph.nodes {
        if by_id.insert(&n.id, n).is_some() {
            out.push(diag(format!("two nodes share the id `{}`", n.id), &[&n.id], &[], "give every node its own id"));
        }
    }
    let mut edge_ids = BTreeSet::new();
    for e in &graph.edges {
        if !edge_ids.insert(e.id.as_str()) {
            out.push(diag(format!("two edges share the id `{}`", e.id), &[], &[&e.id], "give every edge its own id"));
        }
    }

    let mut rule_labels: BTreeMap<RuleLabel, &str> = BTreeMap::new();
    for n in &graph.nodes {
        match n.kind {
            NodeKind::CausalRule | NodeKind::PropertyRule => match parse_rule_label(&n.label) {
                Some(l) if Some(l.kind) == n.kind.rule_kind() => {
                    if let Some(other) = rule_labels.insert(l, &n.id) {
                        out.push(diag(
                            format!("rule label {} is used twice", l.compact()),
                            &[other, &n.id],
                            &[],
                            "rename one of the rules; new rules get the next free label",
                        ));
                    }
                }
                Some(_) => out.push(diag(
                    format!("rule `{}` has a label of the wrong kind", n.label),
                    &[&n.id],
                    &[],
                    "causal rules are labelled cNN and property rules pNN",
                )),
                None => out.push(diag(
                    format!("`{}` is not a rule label", n.label),
                    &[&n.id],
                    &[],
                    "use a label such as c01 or p01",
                )),
            },
            NodeKind::Literal => {
                if parse_literal_label(&n.label).is_none() {
                    out.push(diag(
                        format!("`{}` is not a literal label", n.label),
                        &[&n.id],
                        &[],
                        "literal labels are name/arity, such as have_ask/3",
                    ));
                }
                if n.polarity.is_none() {
                    out.push(diag(
                        format!("literal `{}` has no polarity", n.label),
                        &[&n.id],
                        &[],
                        "mark the literal positive or negative",
                    ));
                }
                if graph.degree(&n.id) == 0 {
                    out.push(diag(
                        format!("literal `{}` is not connected to any rule", n.label),
                        &[&n.id],
                        &[],
                        "connect it to a rule with a body or head edge, or delete it",
                    ));
                }
            }
            NodeKind::Group => {
                if n.parent.is_some() {
                    out.push(diag(
                        format!("group `{}` is inside another group", n.label),
                        &[&n.id],
                        &[],
                        "groups cannot be nested; ungroup it first",
                    ));
                }
            }
        }
        if let Some(p) = &n.parent {
            match by_id.get(p.as_str()) {
                None => out.push(diag(
                    format!("node `{}` belongs to missing group `{p}`", n.label),
                    &[&n.id],
                    &[],
                    "remove the group reference",
                )),
                Some(g) if g.kind != NodeKind::Group => out.push(diag(
                    format!("node `{}` has parent `{}`, which is not a group", n.label, g.label),
                    &[&n.id, &g.id],
                    &[],
                    "only group nodes can contain other nodes",
                )),
                _ => {}
            }
        }
    }

    for e in &graph.edges {
        let (Some(src), Some(dst)) = (by_id.get(e.source.as_str()), by_id.get(e.target.as_str())) else {
            out.push(diag(
                format!("edge `{}` points at a missing node", e.id),
                &[],
                &[&e.id],
                "delete the edge or reconnect both of its ends",
            ));
            continue;
        };
        let ends = [src.id.as_str(), dst.id.as_str()];
        if src.kind == NodeKind::Literal && dst.kind == NodeKind::Literal {
            out.push(diag("literals connect only to rules", &ends, &[&e.id], "draw the edge between a literal and a rule"));
            continue;
        }
        match e.kind {
            EdgeKind::Priority => {
                if !(src.kind.is_rule() && dst.kind.is_rule()) {
                    out.push(diag(
                        "priority edges connect rule nodes only",
                        &ends,
                        &[&e.id],
                        "draw the dashed edge from the stronger rule to the weaker rule",
                    ));
                }
            }
            EdgeKind::Body | EdgeKind::Head => {
                let (lit, rule) = if e.kind == EdgeKind::Body { (src, dst) } else { (dst, src) };
                if lit.kind != NodeKind::Literal || !rule.kind.is_rule() {
                    let shape = if e.kind == EdgeKind::Body { "literal to rule" } else { "rule to literal" };
                    out.push(diag(
                        format!("a {} edge must run from {shape}", e.kind.as_str()),
                        &ends,
                        &[&e.id],
                        "body edges point at the rule, the head edge points away from it",
                    ));
                    continue;
                }
                if let Some((_, arity)) = parse_literal_label(&lit.label) {
                    let given = e.argument_label.as_ref().map_or(0, Vec::len);
                    if given != arity {
                        out.push(diag(
                            format!("literal `{}` takes {arity} argument(s) but the edge gives {given}", lit.label),
                            &[&lit.id],
                            &[&e.id],
                            "edit the edge's arguments to match the literal's arity",
                        ));
                    }
                }
            }
        }
    }

    for n in graph.nodes.iter().filter(|n| n.kind.is_rule()) {
        let heads: Vec<&str> = graph.outgoing(&n.id).filter(|e| e.kind == EdgeKind::Head).map(|e| e.id.as_str()).collect();
        match heads.len() {
            1 => {}
            0 => out.push(diag(
                format!("rule {} has no head literal", n.label),
                &[&n.id],
                &[],
                "draw one edge from the rule to its head literal",
            )),
            _ => out.push(diag(
                "rule must have exactly one head literal",
                &[&n.id],
                &heads,
                "keep one of the highlighted head edges and delete the others",
            )),
        }
    }
    out
}

fn literal_of(lit: &GraphNode, edge: &GraphEdge) -> Literal {
    let (name, _) = parse_literal_label(&lit.label).expect("validated label");
    Literal {
        polarity: lit.polarity.expect("validated polarity"),
        atom: Atom::new(name, edge.argument_label.clone().unwrap_or_default()),
    }
}

fn build_knowledge(graph: &KnowledgeGraph) -> Result<Domain, Vec<GuidanceDiagnostic>> {
    let problems = structural(graph);
    if !problems.is_empty() {
        return Err(problems);
    }
    let mut rule_nodes: Vec<(RuleLabel, &GraphNode)> = graph
        .nodes
        .iter()
        .filter(|n| n.kind.is_rule())
        .map(|n| (parse_rule_label(&n.label).expect("validated label"), n))
        .collect();
    rule_nodes.sort_by_key(|(l, _)| *l);
    let node_of_label: HashMap<RuleLabel, &str> = rule_nodes.iter().map(|(l, n)| (*l, n.id.as_str())).collect();

    let mut parts = DomainParts { fluents: graph.fluents.clone(), ..Default::default() };
    for (label, n) in &rule_nodes {
        let head_edge = graph.outgoing(&n.id).find(|e| e.kind == EdgeKind::Head).expect("validated head");
        let head = literal_of(graph.node(&head_edge.target).expect("validated"), head_edge);
        let body = graph
            .incoming(&n.id)
            .filter(|e| e.kind == EdgeKind::Body)
            .map(|e| literal_of(graph.node(&e.source).expect("validated"), e))
            .collect();
        parts.rules.push(Rule { label: *label, body: RuleBody::from_literals(body), head });
    }
    for e in graph.edges.iter().filter(|e| e.kind == EdgeKind::Priority) {
        let label = |id: &str| parse_rule_label(&graph.node(id).expect("validated").label).expect("validated");
        parts.priorities.push(Priority { stronger: label(&e.source), weaker: label(&e.target) });
    }

    Domain::new(parts.clone()).map_err(|errors| {
        errors.iter().map(|err| domain_diagnostic(err, &parts, graph, &node_of_label)).collect()
    })
}

fn domain_diagnostic(
    err: &DomainError,
    parts: &DomainParts,
    graph: &KnowledgeGraph,
    node_of_label: &HashMap<RuleLabel, &str>,
) -> GuidanceDiagnostic {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    match err.item() {
        Item::Rule(i) => nodes.extend(node_of_label.get(&parts.rules[i].label).map(|s| s.to_string())),
        Item::Priority(i) => {
            let p = parts.priorities[i];
            let (s, w) = (node_of_label.get(&p.stronger), node_of_label.get(&p.weaker));
            edges.extend(
                graph
                    .edges
                    .iter()
                    .filter(|e| e.kind == EdgeKind::Priority && Some(&e.source.as_str()) == s && Some(&e.target.as_str()) == w)
                    .map(|e| e.id.clone()),
            );
        }
        _ => {}
    }
    GuidanceDiagnostic { message: err.to_string(), nodes, edges, hint: err.hint() }
}

/// Rules sorted by label, then priorities in edge order, as STAR text.
pub fn graph_to_star(graph: &KnowledgeGraph) -> Result<String, Vec<GuidanceDiagnostic>> {
    build_knowledge(graph).map(|d| format_domain(&d))
}

/// The knowledge part of a graph as a domain without story.
pub fn graph_to_domain(graph: &KnowledgeGraph) -> Result<Domain, Vec<GuidanceDiagnostic>> {
    build_knowledge(graph)
}

fn literal_node_id(lit: &Literal) -> String {
    let sign = if lit.is_positive() { "" } else { "-" };
    format!("{sign}{}", lit.signature())
}

/// One node per rule and per distinct literal shape (name, arity,
/// polarity); argument lists go on the edges.
pub fn star_to_graph(domain: &Domain) -> KnowledgeGraph {
    let mut g = KnowledgeGraph { fluents: domain.fluents().to_vec(), ..Default::default() };
    let mut literal_ids: BTreeSet<String> = BTreeSet::new();
    let mut next_edge = 1;
    let mut edge = |g: &mut KnowledgeGraph, kind, source: String, target: String, args: Option<Vec<Term>>| {
        g.edges.push(GraphEdge { id: format!("e{next_edge}"), kind, source, target, argument_label: args });
        next_edge += 1;
    };
    let mut literal = |g: &mut KnowledgeGraph, lit: &Literal| -> String {
        let id = literal_node_id(lit);
        if literal_ids.insert(id.clone()) {
            g.nodes.push(GraphNode {
                id: id.clone(),
                kind: NodeKind::Literal,
                label: lit.signature().to_string(),
                polarity: Some(lit.polarity),
                parent: None,
                position: None,
            });
        }
        id
    };
    let args = |lit: &Literal| if lit.atom.args.is_empty() { None } else { Some(lit.atom.args.clone()) };

    for rule in domain.rules() {
        let rid = rule.label.compact();
        g.nodes.push(GraphNode {
            id: rid.clone(),
            kind: match rule.label.kind {
                RuleKind::Causal => NodeKind::CausalRule,
                RuleKind::Property => NodeKind::PropertyRule,
            },
            label: rid.clone(),
            polarity: None,
            parent: None,
            position: None,
        });
        for lit in rule.body.literals() {
            let lid = literal(&mut g, lit);
            edge(&mut g, EdgeKind::Body, lid, rid.clone(), args(lit));
        }
        let hid = literal(&mut g, &rule.head);
        edge(&mut g, EdgeKind::Head, rid.clone(), hid, args(&rule.head));
    }
    for p in domain.priorities() {
        edge(&mut g, EdgeKind::Priority, p.stronger.compact(), p.weaker.compact(), None);
    }
    g
}

/// Puts the given nodes into a new group and returns the updated graph.
pub fn group_rules(graph: &KnowledgeGraph, ids: &[&str], label: &str) -> Result<KnowledgeGraph, GraphError> {
    let mut g = graph.clone();
    for id in ids {
        let n = g.node(id).ok_or_else(|| GraphError::UnknownNode(id.to_string()))?;
        if n.kind == NodeKind::Group {
            return Err(GraphError::NestedGroup(id.to_string()));
        }
        if n.parent.is_some() {
            return Err(GraphError::AlreadyGrouped(id.to_string()));
        }
    }
    let taken: BTreeSet<&str> = g.nodes.iter().map(|n| n.id.as_str()).collect();
    let gid = (1..).map(|i| format!("g{i}")).find(|c| !taken.contains(c.as_str())).expect("unbounded");
    for n in g.nodes.iter_mut().filter(|n| ids.contains(&n.id.as_str())) {
        n.parent = Some(gid.clone());
    }
    g.nodes.push(GraphNode {
        id: gid,
        kind: NodeKind::Group,
        label: label.to_string(),
        polarity: None,
        parent: None,
        position: None,
    });
    Ok(g)
}

/// Smallest unused label of the given kind, in compact form.
pub fn next_rule_label(graph: &KnowledgeGraph, kind: RuleKind) -> String {
    let used: BTreeSet<u32> = graph
        .nodes
        .iter()
        .filter_map(|n| parse_rule_label(&n.label))
        .filter(|l| l.kind == kind)
        .map(|l| l.index)
        .collect();
    let index = (1..).find(|i| !used.contains(i)).expect("unbounded");
    RuleLabel { kind, index }.compact()
}

/// Rule nodes with at most `max_degree` incident edges.
pub fn low_density_rules(graph: &KnowledgeGraph, max_degree: usize) -> Vec<String> {
    graph
        .nodes
        .iter()
        .filter(|n| n.kind.is_rule() && graph.degree(&n.id) <= max_degree)
        .map(|n| n.id.clone())
        .collect()
}

/// Rule nodes that share no literal and no priority with any other rule.
pub fn disconnected_rules(graph: &KnowledgeGraph) -> Vec<String> {
    let mut rules_of_literal: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    let mut linked: BTreeSet<&str> = BTreeSet::new();
    for e in &graph.edges {
        match e.kind {
            EdgeKind::Body => {
                rules_of_literal.entry(&e.source).or_default().insert(&e.target);
            }
            EdgeKind::Head => {
                rules_of_literal.entry(&e.target).or_default().insert(&e.source);
            }
            EdgeKind::Priority => {
                linked.insert(&e.source);
                linked.insert(&e.target);
            }
        }
    }
    for rules in rules_of_literal.values().filter(|r| r.len() > 1) {
        linked.extend(rules.iter().copied());
    }
    graph
        .nodes
        .iter()
        .filter(|n| n.kind.is_rule() && !linked.contains(n.id.as_str()))
        .map(|n| n.id.clone())
        .collect()
}
