#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use oxrdf::{NamedOrBlankNode, Term, Triple};
use oxrdfxml::RdfXmlParser;
use oxttl::TurtleParser;

use rdb2owl::ontology::{OntologyModel, DEFAULT_IRI_BASE};
use rdb2owl::owl::{emit, EmitConfig, OwlFormat};
use rdb2owl::pipeline::{transform, Transformed};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn university() -> Transformed {
    transform(&fixture("university.sql"), DEFAULT_IRI_BASE).expect("university fixture transforms")
}

pub fn emit_as(model: &OntologyModel, format: OwlFormat) -> String {
    emit(model, &EmitConfig::new(format, DEFAULT_IRI_BASE)).expect("emits")
}

pub fn parse_turtle(text: &str) -> Vec<Triple> {
    TurtleParser::new().for_slice(text).collect::<Result<_, _>>().expect("valid Turtle")
}

pub fn parse_rdf_xml(text: &str) -> Vec<Triple> {
    RdfXmlParser::new().for_slice(text).collect::<Result<_, _>>().expect("valid RDF/XML")
}

/// Triple set with blank nodes replaced by a label derived from their
/// outgoing triples. Restriction nodes are flat and distinct per property,
/// so this labelling is stable across parsers.
pub fn canonical(triples: &[Triple]) -> BTreeSet<String> {
    let mut bnode_content: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for t in triples {
        if let NamedOrBlankNode::BlankNode(b) = &t.subject {
            bnode_content.entry(b.as_str().to_string()).or_default().push(format!("{} {}", t.predicate, t.object));
        }
    }
    let labels: BTreeMap<String, String> = bnode_content
        .into_iter()
        .map(|(id, mut lines)| {
            lines.sort();
            (id, format!("[{}]", lines.join(" ; ")))
        })
        .collect();
    let subject = |s: &NamedOrBlankNode| match s {
        NamedOrBlankNode::BlankNode(b) => labels[b.as_str()].clone(),
        other => other.to_string(),
    };
    let object = |o: &Term| match o {
        Term::BlankNode(b) => labels[b.as_str()].clone(),
        other => other.to_string(),
    };
    triples.iter().map(|t| format!("{} {} {}", subject(&t.subject), t.predicate, object(&t.object))).collect()
}

pub const RDF_TYPE: &str = "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>";
pub const OWL: &str = "http://www.w3.org/2002/07/owl#";

/// Subjects typed with `owl:<kind>`, as `<iri>` strings.
pub fn typed(triples: &BTreeSet<String>, kind: &str) -> Vec<String> {
    let suffix = format!(" {RDF_TYPE} <{OWL}{kind}>");
    triples.iter().filter_map(|t| t.strip_suffix(&suffix).map(str::to_string)).collect()
}

pub fn iri(local: &str) -> String {
    format!("<{DEFAULT_IRI_BASE}{local}>")
}
