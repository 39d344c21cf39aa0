//! Conceptual middle model: a directed labeled graph of class, attribute and
//! event nodes built from a classified relational schema.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::schema::{ForeignKeyDef, RelationalSchema, TableDef, TableKind, TriggerKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttributeTag {
    Key,
    Unique,
    NotNull,
}

impl AttributeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            AttributeTag::Key => "key",
            AttributeTag::Unique => "unique",
            AttributeTag::NotNull => "not_null",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Class,
    Attribute(Option<AttributeTag>),
    Event(TriggerKind),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphNode {
    pub name: String,
    pub kind: NodeKind,
    /// Display label; the bare column name for attribute nodes.
    pub label: String,
}

impl GraphNode {
    pub fn class(name: impl Into<String>) -> Self {
        let name = name.into();
        GraphNode { label: name.clone(), name, kind: NodeKind::Class }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            NodeKind::Class => "class",
            NodeKind::Attribute(_) => "attribute",
            NodeKind::Event(_) => "event",
        }
    }

    pub fn type_tag(&self) -> Option<&'static str> {
        match self.kind {
            NodeKind::Class => None,
            NodeKind::Attribute(tag) => tag.map(AttributeTag::as_str),
            NodeKind::Event(kind) => Some(kind.tag()),
        }
    }

    pub fn is_class(&self) -> bool {
        self.kind == NodeKind::Class
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeLabel {
    HasA,
    HasAtt,
    IsA,
    HasEvent,
    To,
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeLabel::HasA => "Has_A",
            EdgeLabel::HasAtt => "Has_Att",
            EdgeLabel::IsA => "IS_A",
            EdgeLabel::HasEvent => "Has_event",
            EdgeLabel::To => "To",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphEdge {
    pub name: String,
    pub source: String,
    pub label: EdgeLabel,
    pub target: String,
    pub unique: bool,
}

impl GraphEdge {
    pub fn new(name: impl Into<String>, source: impl Into<String>, label: EdgeLabel, target: impl Into<String>) -> Self {
        GraphEdge { name: name.into(), source: source.into(), label, target: target.into(), unique: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("IS_A hierarchy contains a cycle: {}", .0.join(" -> "))]
    HierarchyCycle(Vec<String>),
    #[error("name `{name}` is produced by both {first} and {second}")]
    NameCollision { name: String, first: String, second: String },
    #[error("table `{table}` references `{referenced}`, which is a pure join table and has no class")]
    ReferenceToJoinTable { table: String, referenced: String },
    #[error("trigger `{trigger}` connects `{table}`, which is a pure join table and has no class")]
    TriggerOnJoinTable { trigger: String, table: String },
    #[error("edge `{edge}` points at missing node `{node}`")]
    DanglingEdge { edge: String, node: String },
    #[error("edge `{edge}` with label {label} connects incompatible nodes")]
    IllTypedEdge { edge: String, label: EdgeLabel },
}

/// G = (N, E). Nodes and edges are keyed by their unique names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConceptualGraph {
    nodes: BTreeMap<String, GraphNode>,
    edges: BTreeMap<String, GraphEdge>,
    /// Edge-name pairs born of one relational table.
    inverse_pairs: BTreeSet<(String, String)>,
}

impl ConceptualGraph {
    pub fn nodes(&self) -> impl Iterator<Item = &GraphNode> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &GraphEdge> {
        self.edges.values()
    }

    pub fn node(&self, name: &str) -> Option<&GraphNode> {
        self.nodes.get(name)
    }

    pub fn edge(&self, name: &str) -> Option<&GraphEdge> {
        self.edges.get(name)
    }

    pub fn inverse_pairs(&self) -> &BTreeSet<(String, String)> {
        &self.inverse_pairs
    }

    pub fn inverse_of(&self, edge: &str) -> Option<&str> {
        self.inverse_pairs.iter().find_map(|(a, b)| {
            if a == edge {
                Some(b.as_str())
            } else if b == edge {
                Some(a.as_str())
            } else {
                None
            }
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }

    pub fn edges_labeled(&self, label: EdgeLabel) -> impl Iterator<Item = &GraphEdge> {
        self.edges.values().filter(move |e| e.label == label)
    }

    /// Class node owning an attribute node through its Has_Att edge.
    pub fn attribute_owner(&self, attribute: &str) -> Option<&str> {
        self.edges_labeled(EdgeLabel::HasAtt)
            .find(|e| e.target == attribute)
            .map(|e| e.source.as_str())
    }

    /// Checks edge typing and the acyclicity of the IS_A subgraph.
    pub fn validate(&self) -> Result<(), GraphError> {
        for e in self.edges.values() {
            let endpoint = |name: &str| {
                self.nodes.get(name).ok_or_else(|| GraphError::DanglingEdge {
                    edge: e.name.clone(),
                    node: name.to_string(),
                })
            };
            let (src, dst) = (endpoint(&e.source)?, endpoint(&e.target)?);
            let ok = match e.label {
                EdgeLabel::HasA | EdgeLabel::IsA => src.is_class() && dst.is_class(),
                EdgeLabel::HasAtt => src.is_class() && matches!(dst.kind, NodeKind::Attribute(_)),
                EdgeLabel::HasEvent => src.is_class() && matches!(dst.kind, NodeKind::Event(_)),
                EdgeLabel::To => matches!(src.kind, NodeKind::Event(_)) && dst.is_class(),
            };
            if !ok {
                return Err(GraphError::IllTypedEdge { edge: e.name.clone(), label: e.label });
            }
        }
        match find_cycle(self.edges_labeled(EdgeLabel::IsA).map(|e| (e.source.as_str(), e.target.as_str()))) {
            Some(cycle) => Err(GraphError::HierarchyCycle(cycle)),
            None => Ok(()),
        }
    }
}

/// Returns one cycle (first node repeated at the end) if the directed graph
/// has any.
pub(crate) fn find_cycle<'a>(edges: impl Iterator<Item = (&'a str, &'a str)>) -> Option<Vec<String>> {
    let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (s, t) in edges {
        adj.entry(s).or_default().push(t);
        adj.entry(t).or_default();
    }
    for targets in adj.values_mut() {
        targets.sort_unstable();
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: BTreeMap<&str, Mark> = BTreeMap::new();
    let roots: Vec<&str> = adj.keys().copied().collect();
    for root in roots {
        if marks.contains_key(root) {
            continue;
        }
        // Iterative DFS; `stack` holds (node, next child index).
        let mut stack: Vec<(&str, usize)> = vec![(root, 0)];
        marks.insert(root, Mark::Open);
        while let Some(&mut (node, ref mut i)) = stack.last_mut() {
            let children = &adj[node];
            if *i < children.len() {
                let child = children[*i];
                *i += 1;
                match marks.get(child) {
                    Some(Mark::Open) => {
                        let start = stack.iter().position(|(n, _)| *n == child).unwrap_or(0);
                        let mut cycle: Vec<String> = stack[start..].iter().map(|(n, _)| n.to_string()).collect();
                        cycle.push(child.to_string());
                        return Some(cycle);
                    }
                    Some(Mark::Done) => {}
                    None => {
                        marks.insert(child, Mark::Open);
                        stack.push((child, 0));
                    }
                }
            } else {
                marks.insert(node, Mark::Done);
                stack.pop();
            }
        }
    }
    None
}

/// Qualified attribute node name.
pub fn attribute_node_name(table: &str, column: &str) -> String {
    format!("{table}.{column}")
}

/// An entity table becomes a class node.
pub fn rule_entity_table(table: &TableDef) -> GraphNode {
    GraphNode::class(table.name.clone())
}

/// A relational table becomes two Has_A edges with swapped
/// endpoints. The returned names are base names; the builder disambiguates
/// collisions (self-joins) with an ordinal suffix.
pub fn rule_relational_table(table: &TableDef, schema: &RelationalSchema) -> Result<(GraphEdge, GraphEdge), GraphError> {
    let [fk1, fk2] = table.fkeys() else {
        unreachable!("relational tables have exactly two foreign keys")
    };
    let ref1 = referenced_name(table, fk1, schema)?;
    let ref2 = referenced_name(table, fk2, schema)?;
    let e1 = GraphEdge::new(format!("{}_{}_has_{}", table.name, ref1, ref2), &ref1, EdgeLabel::HasA, &ref2);
    let e2 = GraphEdge::new(format!("{}_{}_has_{}", table.name, ref2, ref1), &ref2, EdgeLabel::HasA, &ref1);
    Ok((e1, e2))
}

/// Every non-foreign-key column becomes an attribute node
/// hung off its table's class node. One type tag per node, with precedence
/// key > unique > not_null.
pub fn rule_columns(table: &TableDef) -> Vec<(GraphNode, GraphEdge)> {
    table
        .columns
        .iter()
        .filter(|c| !table.is_foreign_key_column(&c.name))
        .map(|c| {
            let tag = if table.is_primary_key_column(&c.name) {
                Some(AttributeTag::Key)
            } else if c.is_unique {
                Some(AttributeTag::Unique)
            } else if c.is_not_null {
                Some(AttributeTag::NotNull)
            } else {
                None
            };
            let node = GraphNode {
                name: attribute_node_name(&table.name, &c.name),
                kind: NodeKind::Attribute(tag),
                label: c.name.clone(),
            };
            let edge = GraphEdge::new(
                format!("{}_has_att_{}", table.name, c.name),
                &table.name,
                EdgeLabel::HasAtt,
                &node.name,
            );
            (node, edge)
        })
        .collect()
}

/// A foreign key equal to the primary key yields an IS_A edge;
/// any other foreign key yields a Has_A edge, typed unique when the key
/// columns are unique.
pub fn rule_foreign_keys(table: &TableDef, schema: &RelationalSchema) -> Result<Vec<GraphEdge>, GraphError> {
    table
        .fkeys()
        .iter()
        .map(|fk| {
            let target = referenced_name(table, fk, schema)?;
            if table.is_primary_key_fk(fk) {
                Ok(GraphEdge::new(format!("{}_is_a_{}", table.name, target), &table.name, EdgeLabel::IsA, target))
            } else {
                let mut e = GraphEdge::new(format!("{}_has_{}", table.name, target), &table.name, EdgeLabel::HasA, target);
                e.unique = fk.is_unique;
                Ok(e)
            }
        })
        .collect()
}

/// Each trigger becomes an event node, a Has_event edge from the
/// owner class and a To edge to the table its body inserts into.
pub fn rule_triggers(schema: &RelationalSchema) -> Result<Vec<(GraphNode, GraphEdge, GraphEdge)>, GraphError> {
    let mut triggers: Vec<_> = schema.triggers().iter().collect();
    triggers.sort_by_key(|t| (t.name.to_lowercase(), t.name.clone()));
    triggers
        .into_iter()
        .map(|tr| {
            for table in [&tr.owner_table, &tr.target_table] {
                if schema.table(table).is_none_or(|t| t.kind != TableKind::Entity) {
                    return Err(GraphError::TriggerOnJoinTable { trigger: tr.name.clone(), table: table.clone() });
                }
            }
            let node = GraphNode { name: tr.name.clone(), kind: NodeKind::Event(tr.kind), label: tr.name.clone() };
            let has_event = GraphEdge::new(
                format!("{}_has_event_{}", tr.owner_table, tr.name),
                &tr.owner_table,
                EdgeLabel::HasEvent,
                &tr.name,
            );
            let to = GraphEdge::new(format!("{}_to_{}", tr.name, tr.target_table), &tr.name, EdgeLabel::To, &tr.target_table);
            Ok((node, has_event, to))
        })
        .collect()
}

fn referenced_name(table: &TableDef, fk: &ForeignKeyDef, schema: &RelationalSchema) -> Result<String, GraphError> {
    let target = schema.ref_table(fk).map_err(|_| GraphError::ReferenceToJoinTable {
        table: table.name.clone(),
        referenced: fk.referenced_table.clone(),
    })?;
    if target.kind == TableKind::Relational && table.kind == TableKind::Entity {
        return Err(GraphError::ReferenceToJoinTable { table: table.name.clone(), referenced: target.name.clone() });
    }
    Ok(target.name.clone())
}

#[derive(Default)]
struct Builder {
    graph: ConceptualGraph,
    node_origin: BTreeMap<String, String>,
}

impl Builder {
    fn add_node(&mut self, node: GraphNode, origin: String) -> Result<(), GraphError> {
        if let Some(first) = self.node_origin.get(&node.name) {
            return Err(GraphError::NameCollision { name: node.name, first: first.clone(), second: origin });
        }
        self.node_origin.insert(node.name.clone(), origin);
        self.graph.nodes.insert(node.name.clone(), node);
        Ok(())
    }

    /// Inserts the edge, suffixing `_2`, `_3`, ... on a name clash. Returns
    /// the final edge name.
    fn add_edge(&mut self, mut edge: GraphEdge) -> String {
        if self.graph.edges.contains_key(&edge.name) {
            let base = edge.name.clone();
            let mut n = 2;
            while self.graph.edges.contains_key(&format!("{base}_{n}")) {
                n += 1;
            }
            edge.name = format!("{base}_{n}");
        }
        let name = edge.name.clone();
        self.graph.edges.insert(name.clone(), edge);
        name
    }
}

/// Builds G from a classified schema by applying, in order, the entity
/// table, relational table, column, foreign key and trigger rules. Tables
/// are visited in case-insensitive name order, so the result does not depend
/// on statement order in the source.
pub fn build_graph(schema: &RelationalSchema) -> Result<ConceptualGraph, GraphError> {
    let mut tables: Vec<&TableDef> = schema.tables().iter().collect();
    tables.sort_by_key(|t| (t.name.to_lowercase(), t.name.clone()));
    let entities: Vec<&TableDef> = tables.iter().copied().filter(|t| t.kind == TableKind::Entity).collect();

    let mut b = Builder::default();
    for t in &entities {
        b.add_node(rule_entity_table(t), format!("table `{}`", t.name))?;
    }
    for t in tables.iter().filter(|t| t.kind == TableKind::Relational) {
        let (e1, e2) = rule_relational_table(t, schema)?;
        let n1 = b.add_edge(e1);
        let n2 = b.add_edge(e2);
        b.graph.inverse_pairs.insert((n1, n2));
    }
    for t in &entities {
        for (node, edge) in rule_columns(t) {
            let origin = format!("column `{}.{}`", t.name, node.label);
            b.add_node(node, origin)?;
            b.add_edge(edge);
        }
    }
    for t in &entities {
        for edge in rule_foreign_keys(t, schema)? {
            b.add_edge(edge);
        }
    }
    for (node, has_event, to) in rule_triggers(schema)? {
        let origin = format!("trigger `{}`", node.name);
        b.add_node(node, origin)?;
        b.add_edge(has_event);
        b.add_edge(to);
    }

    let graph = b.graph;
    graph.validate()?;
    Ok(graph)
}

fn dot_id(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz rendering: classes as ellipses, attributes as boxes, events as
/// triangles. Nodes and edges appear in name order.
pub fn export_dot(graph: &ConceptualGraph) -> String {
    let mut out = String::from("digraph G {\n");
    for node in graph.nodes() {
        let shape = match node.kind {
            NodeKind::Class => "ellipse",
            NodeKind::Attribute(_) => "box",
            NodeKind::Event(_) => "triangle",
        };
        let label = match node.type_tag() {
            Some(tag) => format!("{} ({tag})", node.label),
            None => node.label.clone(),
        };
        let _ = writeln!(out, "  {} [shape={shape}, label={}];", dot_id(&node.name), dot_id(&label));
    }
    for e in graph.edges() {
        let tag = if e.unique { " (unique)" } else { "" };
        let label = format!("{}{tag}: {}", e.label, e.name);
        let _ = writeln!(out, "  {} -> {} [label={}];", dot_id(&e.source), dot_id(&e.target), dot_id(&label));
    }
    out.push_str("}\n");
    out
}

#[derive(Serialize)]
struct NodeDump<'a> {
    name: &'a str,
    kind: &'static str,
    type_tag: Option<&'static str>,
    label: &'a str,
}

#[derive(Serialize)]
struct EdgeDump<'a> {
    name: &'a str,
    source: &'a str,
    label: String,
    target: &'a str,
    type_tag: Option<&'static str>,
}

#[derive(Serialize)]
struct GraphDump<'a> {
    nodes: Vec<NodeDump<'a>>,
    edges: Vec<EdgeDump<'a>>,
    inverse_pairs: Vec<[&'a str; 2]>,
}

/// Stable JSON listing of nodes and edges for tooling.
pub fn export_json(graph: &ConceptualGraph) -> String {
    let dump = GraphDump {
        nodes: graph
            .nodes()
            .map(|n| NodeDump { name: &n.name, kind: n.kind_name(), type_tag: n.type_tag(), label: &n.label })
            .collect(),
        edges: graph
            .edges()
            .map(|e| EdgeDump {
                name: &e.name,
                source: &e.source,
                label: e.label.to_string(),
                target: &e.target,
                type_tag: e.unique.then_some("unique"),
            })
            .collect(),
        inverse_pairs: graph.inverse_pairs.iter().map(|(a, b)| [a.as_str(), b.as_str()]).collect(),
    };
    let mut s = serde_json::to_string_pretty(&dump).expect("graph dump serializes");
    s.push('\n');
    s
}
