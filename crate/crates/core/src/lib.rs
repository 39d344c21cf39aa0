//! Relational schema to OWL ontology compiler.
//!
//! [`pipeline::transform`] takes DDL text to an [`ontology::OntologyModel`]
//! by way of a [`graph::ConceptualGraph`]. [`owl::emit`] serializes the
//! model. [`runtime::InstanceStore`] replays row changes against it and
//! fires the compiled triggers.

pub mod cli;
pub mod ddl;
pub mod graph;
pub mod ontology;
pub mod owl;
pub mod pipeline;
pub mod runtime;
pub mod scenario;
pub mod schema;
