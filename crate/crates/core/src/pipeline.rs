//! DDL text to ontology model in one call.

use thiserror::Error;

use crate::ddl::{parse_ddl, ParseDiagnostic};
use crate::graph::{build_graph, ConceptualGraph, GraphError};
use crate::ontology::{build_ontology, unmapped_sql_types, OntologyError, OntologyModel};
use crate::schema::RelationalSchema;

#[derive(Debug, Clone)]
pub struct Transformed {
    pub schema: RelationalSchema,
    pub graph: ConceptualGraph,
    pub model: OntologyModel,
    /// Parser warnings, sorted by position.
    pub diagnostics: Vec<ParseDiagnostic>,
    /// Columns whose SQL type has no XSD mapping.
    pub type_warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("{} parse error(s)", .0.iter().filter(|d| d.is_error()).count())]
    Parse(Vec<ParseDiagnostic>),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
}

pub fn transform(source: &str, iri_base: &str) -> Result<Transformed, PipelineError> {
    let parsed = parse_ddl(source).map_err(PipelineError::Parse)?;
    let graph = build_graph(&parsed.schema)?;
    let model = build_ontology(&graph, &parsed.schema, iri_base)?;
    let type_warnings = unmapped_sql_types(&parsed.schema)
        .into_iter()
        .map(|(table, column, ty)| format!("{table}.{column}: SQL type `{ty}` has no XSD mapping, using xsd:string"))
        .collect();
    Ok(Transformed { schema: parsed.schema, graph, model, diagnostics: parsed.warnings, type_warnings })
}
