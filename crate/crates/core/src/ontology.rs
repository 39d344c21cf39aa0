//! Ontology model lifted from the conceptual graph, together with the event
//! bindings compiled from triggers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::graph::{AttributeTag, ConceptualGraph, EdgeLabel, GraphNode, NodeKind};
use crate::owl::sanitize_iri_fragment;
use crate::schema::{RelationalSchema, TriggerKind};

pub const DEFAULT_IRI_BASE: &str = "http://example.org/rdb2owl#";
pub const EVENT_CLASS: &str = "Event";
pub const TIME_PROPERTY: &str = "Time";
pub const AGENT_PROPERTY: &str = "Agent";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Xsd {
    Integer,
    Decimal,
    Double,
    String,
    Date,
    Time,
    DateTime,
    Boolean,
}

impl Xsd {
    pub fn local_name(self) -> &'static str {
        match self {
            Xsd::Integer => "integer",
            Xsd::Decimal => "decimal",
            Xsd::Double => "double",
            Xsd::String => "string",
            Xsd::Date => "date",
            Xsd::Time => "time",
            Xsd::DateTime => "dateTime",
            Xsd::Boolean => "boolean",
        }
    }

    /// Maps a SQL column type to its XSD datatype; `None` for unknown types.
    pub fn from_sql_type(sql_type: &str) -> Option<Xsd> {
        let head: String = sql_type
            .trim()
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
            .collect::<String>()
            .to_ascii_uppercase();
        Some(match head.as_str() {
            "INT" | "INTEGER" | "SMALLINT" | "BIGINT" | "TINYINT" => Xsd::Integer,
            "DECIMAL" | "NUMERIC" => Xsd::Decimal,
            "FLOAT" | "REAL" | "DOUBLE" => Xsd::Double,
            "CHAR" | "VARCHAR" | "TEXT" | "CHARACTER" => Xsd::String,
            "DATE" => Xsd::Date,
            "TIME" => Xsd::Time,
            "TIMESTAMP" | "DATETIME" => Xsd::DateTime,
            "BOOLEAN" | "BOOL" => Xsd::Boolean,
            _ => return None,
        })
    }

    /// Lexical-form check for the datatypes that have a simple one.
    pub fn accepts(self, lexical: &str) -> bool {
        match self {
            Xsd::Integer => {
                let digits = lexical.strip_prefix(['-', '+']).unwrap_or(lexical);
                !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
            }
            Xsd::Decimal => {
                let body = lexical.strip_prefix(['-', '+']).unwrap_or(lexical);
                let mut parts = body.splitn(2, '.');
                let int = parts.next().unwrap_or("");
                let frac = parts.next().unwrap_or("");
                (!int.is_empty() || !frac.is_empty())
                    && int.bytes().all(|b| b.is_ascii_digit())
                    && frac.bytes().all(|b| b.is_ascii_digit())
            }
            Xsd::Double => lexical.parse::<f64>().is_ok() || matches!(lexical, "INF" | "-INF" | "NaN"),
            Xsd::Boolean => matches!(lexical, "true" | "false" | "1" | "0"),
            _ => true,
        }
    }
}

impl fmt::Display for Xsd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "xsd:{}", self.local_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OntClass {
    pub name: String,
    /// True for the Insert/Update/Delete subclasses of Event.
    pub is_event_subclass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ObjectProp {
    pub name: String,
    pub domain: String,
    pub range: String,
    pub inverse_of: Option<String>,
    pub inverse_functional: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DataProp {
    pub name: String,
    pub domain: String,
    pub range_datatype: Xsd,
    pub functional: bool,
    pub min_cardinality: u8,
    pub max_cardinality: Option<u8>,
    /// Unqualified name (column name); used to match values across classes.
    pub local_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Value {
    Literal(String),
    Individual(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Literal(s) => write!(f, "{s:?}"),
            Value::Individual(id) => f.write_str(id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Individual {
    pub id: String,
    pub class: String,
    pub values: BTreeMap<String, Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EventBinding {
    pub trigger_name: String,
    pub owner_class: String,
    pub kind: TriggerKind,
    pub target_class: String,
    /// Object property named after the trigger.
    pub property: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CardinalityKind {
    Exact,
    Min,
    Max,
}

/// A cardinality restriction attached to the domain class of a property.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Restriction {
    pub class: String,
    pub property: String,
    pub kind: CardinalityKind,
    pub value: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("name `{name}` is produced by both {first} and {second}")]
    NameCollision { name: String, first: String, second: String },
    #[error("attribute node `{0}` has no owning class")]
    OrphanAttribute(String),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyModel {
    iri_base: String,
    classes: BTreeMap<String, OntClass>,
    object_properties: BTreeMap<String, ObjectProp>,
    datatype_properties: BTreeMap<String, DataProp>,
    subclass_axioms: BTreeSet<(String, String)>,
    individuals: BTreeMap<String, Individual>,
    event_bindings: Vec<EventBinding>,
    /// Local name -> where it came from, for collision reports.
    origins: BTreeMap<String, String>,
}

impl OntologyModel {
    pub fn new(iri_base: impl Into<String>) -> Self {
        OntologyModel {
            iri_base: iri_base.into(),
            classes: BTreeMap::new(),
            object_properties: BTreeMap::new(),
            datatype_properties: BTreeMap::new(),
            subclass_axioms: BTreeSet::new(),
            individuals: BTreeMap::new(),
            event_bindings: Vec::new(),
            origins: BTreeMap::new(),
        }
    }

    pub fn iri_base(&self) -> &str {
        &self.iri_base
    }

    pub fn classes(&self) -> impl Iterator<Item = &OntClass> {
        self.classes.values()
    }

    pub fn class(&self, name: &str) -> Option<&OntClass> {
        self.classes.get(name)
    }

    pub fn object_properties(&self) -> impl Iterator<Item = &ObjectProp> {
        self.object_properties.values()
    }

    pub fn object_property(&self, name: &str) -> Option<&ObjectProp> {
        self.object_properties.get(name)
    }

    pub fn datatype_properties(&self) -> impl Iterator<Item = &DataProp> {
        self.datatype_properties.values()
    }

    pub fn datatype_property(&self, name: &str) -> Option<&DataProp> {
        self.datatype_properties.get(name)
    }

    /// (subclass, superclass) pairs.
    pub fn subclass_axioms(&self) -> &BTreeSet<(String, String)> {
        &self.subclass_axioms
    }

    pub fn individuals(&self) -> impl Iterator<Item = &Individual> {
        self.individuals.values()
    }

    pub fn individual(&self, id: &str) -> Option<&Individual> {
        self.individuals.get(id)
    }

    pub fn event_bindings(&self) -> &[EventBinding] {
        &self.event_bindings
    }

    pub fn has_events(&self) -> bool {
        self.classes.contains_key(EVENT_CLASS) && !self.event_bindings.is_empty()
    }

    /// True when `name` already names a declared entity or an individual.
    pub fn is_name_taken(&self, name: &str) -> bool {
        self.origins.contains_key(name) || self.individuals.contains_key(name)
    }

    /// The class itself followed by all its superclasses, breadth first.
    pub fn ancestors(&self, class: &str) -> Vec<String> {
        let mut out = vec![class.to_string()];
        let mut i = 0;
        while i < out.len() {
            let current = out[i].clone();
            for (sub, sup) in &self.subclass_axioms {
                if *sub == current && !out.contains(sup) {
                    out.push(sup.clone());
                }
            }
            i += 1;
        }
        out
    }

    /// Datatype properties applicable to members of `class`, inherited ones
    /// included.
    pub fn data_properties_for(&self, class: &str) -> Vec<&DataProp> {
        let ancestors = self.ancestors(class);
        self.datatype_properties.values().filter(|p| ancestors.contains(&p.domain)).collect()
    }

    pub fn object_properties_for(&self, class: &str) -> Vec<&ObjectProp> {
        let ancestors = self.ancestors(class);
        self.object_properties.values().filter(|p| ancestors.contains(&p.domain)).collect()
    }

    /// Cardinality restrictions derived from the datatype properties.
    pub fn restrictions(&self) -> Vec<Restriction> {
        let mut out: Vec<Restriction> = self
            .datatype_properties
            .values()
            .filter_map(|p| {
                let kind = match (p.min_cardinality, p.max_cardinality) {
                    (1, Some(1)) => CardinalityKind::Exact,
                    (_, Some(_)) => CardinalityKind::Max,
                    (1, None) => CardinalityKind::Min,
                    _ => return None,
                };
                let value = if kind == CardinalityKind::Min { p.min_cardinality } else { p.max_cardinality.unwrap_or(1) };
                Some(Restriction { class: p.domain.clone(), property: p.name.clone(), kind, value })
            })
            .collect();
        out.sort();
        out
    }

    fn claim(&mut self, name: &str, origin: String) -> Result<(), OntologyError> {
        if let Some(first) = self.origins.get(name) {
            return Err(OntologyError::NameCollision { name: name.to_string(), first: first.clone(), second: origin });
        }
        self.origins.insert(name.to_string(), origin);
        Ok(())
    }

    pub fn add_class(&mut self, class: OntClass, origin: impl Into<String>) -> Result<(), OntologyError> {
        self.claim(&class.name, origin.into())?;
        self.classes.insert(class.name.clone(), class);
        Ok(())
    }

    pub fn add_object_property(&mut self, prop: ObjectProp, origin: impl Into<String>) -> Result<(), OntologyError> {
        self.require_class(&prop.domain)?;
        self.require_class(&prop.range)?;
        self.claim(&prop.name, origin.into())?;
        self.object_properties.insert(prop.name.clone(), prop);
        Ok(())
    }

    pub fn add_datatype_property(&mut self, prop: DataProp, origin: impl Into<String>) -> Result<(), OntologyError> {
        self.require_class(&prop.domain)?;
        self.claim(&prop.name, origin.into())?;
        self.datatype_properties.insert(prop.name.clone(), prop);
        Ok(())
    }

    pub fn add_subclass_axiom(&mut self, sub: &str, sup: &str) -> Result<(), OntologyError> {
        self.require_class(sub)?;
        self.require_class(sup)?;
        self.subclass_axioms.insert((sub.to_string(), sup.to_string()));
        Ok(())
    }

    fn require_class(&self, name: &str) -> Result<(), OntologyError> {
        if self.classes.contains_key(name) {
            Ok(())
        } else {
            Err(OntologyError::UnknownClass(name.to_string()))
        }
    }

    pub(crate) fn insert_individual(&mut self, individual: Individual) {
        self.individuals.insert(individual.id.clone(), individual);
    }

    pub(crate) fn remove_individual(&mut self, id: &str) -> Option<Individual> {
        self.individuals.remove(id)
    }

    pub(crate) fn individual_mut(&mut self, id: &str) -> Option<&mut Individual> {
        self.individuals.get_mut(id)
    }
}

/// A class node becomes a class.
pub fn rule_class_node(node: &GraphNode) -> OntClass {
    OntClass { name: sanitize_iri_fragment(&node.name), is_event_subclass: false }
}

/// An attribute node becomes a datatype property of its
/// owning class. Key: functional, exactly one. Unique: functional, at most
/// one. Not null: at least one. Untyped: unconstrained.
pub fn rule_attribute_node(node: &GraphNode, owner: &str, sql_type: &str) -> DataProp {
    let tag = match node.kind {
        NodeKind::Attribute(tag) => tag,
        _ => None,
    };
    let (functional, min, max) = match tag {
        None => (false, 0, None),
        Some(AttributeTag::Key) => (true, 1, Some(1)),
        Some(AttributeTag::Unique) => (true, 0, Some(1)),
        Some(AttributeTag::NotNull) => (false, 1, None),
    };
    DataProp {
        name: sanitize_iri_fragment(&node.name),
        domain: sanitize_iri_fragment(owner),
        range_datatype: Xsd::from_sql_type(sql_type).unwrap_or(Xsd::String),
        functional,
        min_cardinality: min,
        max_cardinality: max,
        local_name: node.label.clone(),
    }
}

/// Has_A edges become object properties (inverse pairs for
/// join-table edges, inverse functional for unique edges); IS_A edges become
/// subclass axioms.
pub fn rule_edges(graph: &ConceptualGraph) -> (Vec<ObjectProp>, Vec<(String, String)>) {
    let props = graph
        .edges_labeled(EdgeLabel::HasA)
        .map(|e| ObjectProp {
            name: sanitize_iri_fragment(&e.name),
            domain: sanitize_iri_fragment(&e.source),
            range: sanitize_iri_fragment(&e.target),
            inverse_of: graph.inverse_of(&e.name).map(sanitize_iri_fragment),
            inverse_functional: e.unique,
        })
        .collect();
    let axioms = graph
        .edges_labeled(EdgeLabel::IsA)
        .map(|e| (sanitize_iri_fragment(&e.source), sanitize_iri_fragment(&e.target)))
        .collect();
    (props, axioms)
}

/// Output of the event rule.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventMachinery {
    pub classes: Vec<OntClass>,
    pub subclass_axioms: Vec<(String, String)>,
    pub data_properties: Vec<DataProp>,
    pub object_properties: Vec<ObjectProp>,
    pub bindings: Vec<EventBinding>,
}

/// With at least one event node, declare Event with Time and
/// Agent, one subclass per trigger kind present, and per trigger an object
/// property from the owner class to the class its body inserts into.
pub fn rule_event_nodes(graph: &ConceptualGraph) -> EventMachinery {
    let mut m = EventMachinery::default();
    let events: Vec<(&GraphNode, TriggerKind)> = graph
        .nodes()
        .filter_map(|n| match n.kind {
            NodeKind::Event(kind) => Some((n, kind)),
            _ => None,
        })
        .collect();
    if events.is_empty() {
        return m;
    }

    m.classes.push(OntClass { name: EVENT_CLASS.into(), is_event_subclass: false });
    for (name, range, local) in [(TIME_PROPERTY, Xsd::DateTime, "Time"), (AGENT_PROPERTY, Xsd::String, "Agent")] {
        m.data_properties.push(DataProp {
            name: name.into(),
            domain: EVENT_CLASS.into(),
            range_datatype: range,
            functional: false,
            min_cardinality: 0,
            max_cardinality: None,
            local_name: local.into(),
        });
    }
    let kinds: BTreeSet<TriggerKind> = events.iter().map(|(_, k)| *k).collect();
    for kind in kinds {
        m.classes.push(OntClass { name: kind.class_name().into(), is_event_subclass: true });
        m.subclass_axioms.push((kind.class_name().into(), EVENT_CLASS.into()));
    }

    for (node, kind) in events {
        let owner = graph.edges_labeled(EdgeLabel::HasEvent).find(|e| e.target == node.name).map(|e| &e.source);
        let target = graph.edges_labeled(EdgeLabel::To).find(|e| e.source == node.name).map(|e| &e.target);
        let (Some(owner), Some(target)) = (owner, target) else {
            continue;
        };
        let prop = ObjectProp {
            name: sanitize_iri_fragment(&node.name),
            domain: sanitize_iri_fragment(owner),
            range: sanitize_iri_fragment(target),
            inverse_of: None,
            inverse_functional: false,
        };
        m.bindings.push(EventBinding {
            trigger_name: node.name.clone(),
            owner_class: prop.domain.clone(),
            kind,
            target_class: prop.range.clone(),
            property: prop.name.clone(),
        });
        m.object_properties.push(prop);
    }
    m
}

/// Builds the ontology model from the conceptual graph. The schema supplies
/// column SQL types for datatype ranges.
pub fn build_ontology(
    graph: &ConceptualGraph,
    schema: &RelationalSchema,
    iri_base: &str,
) -> Result<OntologyModel, OntologyError> {
    let mut model = OntologyModel::new(iri_base);

    for node in graph.nodes().filter(|n| n.is_class()) {
        model.add_class(rule_class_node(node), format!("table `{}`", node.name))?;
    }

    for node in graph.nodes().filter(|n| matches!(n.kind, NodeKind::Attribute(_))) {
        let owner = graph
            .attribute_owner(&node.name)
            .ok_or_else(|| OntologyError::OrphanAttribute(node.name.clone()))?;
        let sql_type = schema
            .table(owner)
            .and_then(|t| t.find_column(&node.label))
            .map(|c| c.sql_type.as_str())
            .unwrap_or("");
        let prop = rule_attribute_node(node, owner, sql_type);
        model.add_datatype_property(prop, format!("column `{}`", node.name))?;
    }

    let (props, axioms) = rule_edges(graph);
    for prop in props {
        let origin = format!("edge `{}`", prop.name);
        model.add_object_property(prop, origin)?;
    }
    for (sub, sup) in axioms {
        model.add_subclass_axiom(&sub, &sup)?;
    }

    let events = rule_event_nodes(graph);
    for class in events.classes {
        let origin = format!("event class `{}`", class.name);
        model.add_class(class, origin)?;
    }
    for (sub, sup) in events.subclass_axioms {
        model.add_subclass_axiom(&sub, &sup)?;
    }
    for prop in events.data_properties {
        let origin = format!("event property `{}`", prop.name);
        model.add_datatype_property(prop, origin)?;
    }
    for prop in events.object_properties {
        let origin = format!("trigger `{}`", prop.name);
        model.add_object_property(prop, origin)?;
    }
    model.event_bindings = events.bindings;
    Ok(model)
}

/// Column types that fall back to xsd:string, as `(table, column, type)`.
pub fn unmapped_sql_types(schema: &RelationalSchema) -> Vec<(String, String, String)> {
    schema
        .entity_tables()
        .flat_map(|t| {
            t.columns
                .iter()
                .filter(|c| !t.is_foreign_key_column(&c.name) && Xsd::from_sql_type(&c.sql_type).is_none())
                .map(move |c| (t.name.clone(), c.name.clone(), c.sql_type.clone()))
        })
        .collect()
}
