//! OWL serialization in Turtle and RDF/XML.
//!
//! Output is grouped by entity kind and sorted by name within each group,
//! so the same model always yields the same bytes. Cardinality
//! restrictions are anonymous `owl:Restriction` superclasses of the
//! property's domain class.

use std::fmt::Write as _;
use std::str::FromStr;

use oxiri::Iri;
use thiserror::Error;

use crate::ontology::{CardinalityKind, DataProp, Individual, OntologyModel, Restriction, Value, Xsd};

const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
const OWL: &str = "http://www.w3.org/2002/07/owl#";
const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OwlFormat {
    RdfXml,
    #[default]
    Turtle,
}

impl OwlFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OwlFormat::RdfXml => "owl",
            OwlFormat::Turtle => "ttl",
        }
    }
}

impl FromStr for OwlFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "turtle" | "ttl" => Ok(OwlFormat::Turtle),
            "rdfxml" | "rdf-xml" | "xml" | "owl" => Ok(OwlFormat::RdfXml),
            other => Err(format!("unknown format `{other}` (expected turtle or rdfxml)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitConfig {
    pub format: OwlFormat,
    /// Namespace for every generated name; ends with `#` or `/`.
    pub iri_base: String,
    pub ontology_iri: String,
}

impl EmitConfig {
    /// Derives the ontology IRI by dropping the trailing `#` or `/`.
    pub fn new(format: OwlFormat, iri_base: impl Into<String>) -> Self {
        let iri_base = iri_base.into();
        let ontology_iri = iri_base.trim_end_matches(['#', '/']).to_string();
        EmitConfig { format, iri_base, ontology_iri }
    }

    pub fn validate(&self) -> Result<(), EmitError> {
        if Iri::parse(self.iri_base.as_str()).is_err() || !(self.iri_base.ends_with('#') || self.iri_base.ends_with('/')) {
            return Err(EmitError::InvalidIri(format!(
                "IRI base `{}` must be an absolute IRI ending in `#` or `/`",
                self.iri_base
            )));
        }
        if Iri::parse(self.ontology_iri.as_str()).is_err() {
            return Err(EmitError::InvalidIri(format!("ontology IRI `{}` is not an absolute IRI", self.ontology_iri)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("invalid IRI: {0}")]
    InvalidIri(String),
}

/// Turns an arbitrary name into a local name usable in both Turtle prefixed
/// names and XML element names: characters outside `[A-Za-z0-9_-]` become
/// `_`, and a leading digit or `-` gets a `_` prefix.
pub fn sanitize_iri_fragment(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect();
    if out.starts_with(|c: char| c.is_ascii_digit() || c == '-') {
        out.insert(0, '_');
    }
    out
}

fn is_valid_fragment(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

pub fn emit(model: &OntologyModel, config: &EmitConfig) -> Result<String, EmitError> {
    config.validate()?;
    check_names(model, config)?;
    Ok(match config.format {
        OwlFormat::Turtle => emit_turtle(model, config),
        OwlFormat::RdfXml => emit_rdf_xml(model, config),
    })
}

fn check_names(model: &OntologyModel, config: &EmitConfig) -> Result<(), EmitError> {
    let names = model
        .classes()
        .map(|c| &c.name)
        .chain(model.object_properties().map(|p| &p.name))
        .chain(model.datatype_properties().map(|p| &p.name))
        .chain(model.individuals().map(|i| &i.id));
    for name in names {
        let iri = format!("{}{name}", config.iri_base);
        if !is_valid_fragment(name) || Iri::parse(iri.as_str()).is_err() {
            return Err(EmitError::InvalidIri(format!("`{name}` is not a valid local name")));
        }
    }
    Ok(())
}

fn restrictions_by_class(model: &OntologyModel, class: &str) -> Vec<Restriction> {
    model.restrictions().into_iter().filter(|r| r.class == class).collect()
}

fn cardinality_predicate(kind: CardinalityKind) -> &'static str {
    match kind {
        CardinalityKind::Exact => "cardinality",
        CardinalityKind::Min => "minCardinality",
        CardinalityKind::Max => "maxCardinality",
    }
}

fn superclasses<'m>(model: &'m OntologyModel, class: &str) -> Vec<&'m str> {
    model
        .subclass_axioms()
        .iter()
        .filter(|(sub, _)| sub == class)
        .map(|(_, sup)| sup.as_str())
        .collect()
}

/// Datatype of a literal value asserted through `property`, if typed.
fn literal_datatype(model: &OntologyModel, property: &str) -> Option<Xsd> {
    model.datatype_property(property).map(|p: &DataProp| p.range_datatype).filter(|x| *x != Xsd::String)
}

fn turtle_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn emit_turtle(model: &OntologyModel, config: &EmitConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "@prefix : <{}> .", config.iri_base);
    let _ = writeln!(out, "@prefix owl: <{OWL}> .");
    let _ = writeln!(out, "@prefix rdf: <{RDF}> .");
    let _ = writeln!(out, "@prefix rdfs: <{RDFS}> .");
    let _ = writeln!(out, "@prefix xsd: <{XSD}> .");
    out.push('\n');
    let _ = writeln!(out, "<{}> a owl:Ontology .", config.ontology_iri);

    for class in model.classes() {
        let mut lines = vec!["a owl:Class".to_string()];
        for sup in superclasses(model, &class.name) {
            lines.push(format!("rdfs:subClassOf :{sup}"));
        }
        for r in restrictions_by_class(model, &class.name) {
            lines.push(format!(
                "rdfs:subClassOf [ a owl:Restriction ; owl:onProperty :{} ; owl:{} \"{}\"^^xsd:nonNegativeInteger ]",
                r.property,
                cardinality_predicate(r.kind),
                r.value
            ));
        }
        turtle_block(&mut out, &class.name, &lines);
    }

    for p in model.object_properties() {
        let mut types = vec!["owl:ObjectProperty"];
        if p.inverse_functional {
            types.push("owl:InverseFunctionalProperty");
        }
        let mut lines = vec![
            format!("a {}", types.join(" , ")),
            format!("rdfs:domain :{}", p.domain),
            format!("rdfs:range :{}", p.range),
        ];
        if let Some(inv) = &p.inverse_of {
            lines.push(format!("owl:inverseOf :{inv}"));
        }
        turtle_block(&mut out, &p.name, &lines);
    }

    for p in model.datatype_properties() {
        let mut types = vec!["owl:DatatypeProperty"];
        if p.functional {
            types.push("owl:FunctionalProperty");
        }
        let lines = vec![
            format!("a {}", types.join(" , ")),
            format!("rdfs:domain :{}", p.domain),
            format!("rdfs:range xsd:{}", p.range_datatype.local_name()),
        ];
        turtle_block(&mut out, &p.name, &lines);
    }

    for ind in model.individuals() {
        let mut lines = vec![format!("a owl:NamedIndividual , :{}", ind.class)];
        for (prop, value) in assertions(ind) {
            let object = match value {
                Value::Individual(id) => format!(":{id}"),
                Value::Literal(s) => match literal_datatype(model, prop) {
                    Some(dt) => format!("{}^^xsd:{}", turtle_string(s), dt.local_name()),
                    None => turtle_string(s),
                },
            };
            lines.push(format!(":{prop} {object}"));
        }
        turtle_block(&mut out, &ind.id, &lines);
    }
    out
}

fn turtle_block(out: &mut String, subject: &str, lines: &[String]) {
    out.push('\n');
    let _ = write!(out, ":{subject} {}", lines[0]);
    for line in &lines[1..] {
        let _ = write!(out, " ;\n    {line}");
    }
    out.push_str(" .\n");
}

fn assertions(ind: &Individual) -> impl Iterator<Item = (&str, &Value)> {
    ind.values.iter().flat_map(|(p, vs)| {
        let mut sorted: Vec<&Value> = vs.iter().collect();
        sorted.sort();
        sorted.dedup();
        sorted.into_iter().map(move |v| (p.as_str(), v))
    })
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
    out
}

fn emit_rdf_xml(model: &OntologyModel, config: &EmitConfig) -> String {
    let base = xml_escape(&config.iri_base);
    let iri = |name: &str| format!("{base}{name}");
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<rdf:RDF xmlns:rdf=\"{RDF}\"");
    let _ = writeln!(out, "         xmlns:rdfs=\"{RDFS}\"");
    let _ = writeln!(out, "         xmlns:owl=\"{OWL}\"");
    let _ = writeln!(out, "         xmlns:xsd=\"{XSD}\"");
    let _ = writeln!(out, "         xmlns:db=\"{base}\">");
    let _ = writeln!(out, "  <owl:Ontology rdf:about=\"{}\"/>", xml_escape(&config.ontology_iri));

    for class in model.classes() {
        let sups = superclasses(model, &class.name);
        let restrictions = restrictions_by_class(model, &class.name);
        if sups.is_empty() && restrictions.is_empty() {
            let _ = writeln!(out, "  <owl:Class rdf:about=\"{}\"/>", iri(&class.name));
            continue;
        }
        let _ = writeln!(out, "  <owl:Class rdf:about=\"{}\">", iri(&class.name));
        for sup in sups {
            let _ = writeln!(out, "    <rdfs:subClassOf rdf:resource=\"{}\"/>", iri(sup));
        }
        for r in restrictions {
            let pred = cardinality_predicate(r.kind);
            out.push_str("    <rdfs:subClassOf>\n      <owl:Restriction>\n");
            let _ = writeln!(out, "        <owl:onProperty rdf:resource=\"{}\"/>", iri(&r.property));
            let _ = writeln!(
                out,
                "        <owl:{pred} rdf:datatype=\"{XSD}nonNegativeInteger\">{}</owl:{pred}>",
                r.value
            );
            out.push_str("      </owl:Restriction>\n    </rdfs:subClassOf>\n");
        }
        out.push_str("  </owl:Class>\n");
    }

    for p in model.object_properties() {
        let _ = writeln!(out, "  <owl:ObjectProperty rdf:about=\"{}\">", iri(&p.name));
        if p.inverse_functional {
            let _ = writeln!(out, "    <rdf:type rdf:resource=\"{OWL}InverseFunctionalProperty\"/>");
        }
        let _ = writeln!(out, "    <rdfs:domain rdf:resource=\"{}\"/>", iri(&p.domain));
        let _ = writeln!(out, "    <rdfs:range rdf:resource=\"{}\"/>", iri(&p.range));
        if let Some(inv) = &p.inverse_of {
            let _ = writeln!(out, "    <owl:inverseOf rdf:resource=\"{}\"/>", iri(inv));
        }
        out.push_str("  </owl:ObjectProperty>\n");
    }

    for p in model.datatype_properties() {
        let _ = writeln!(out, "  <owl:DatatypeProperty rdf:about=\"{}\">", iri(&p.name));
        if p.functional {
            let _ = writeln!(out, "    <rdf:type rdf:resource=\"{OWL}FunctionalProperty\"/>");
        }
        let _ = writeln!(out, "    <rdfs:domain rdf:resource=\"{}\"/>", iri(&p.domain));
        let _ = writeln!(out, "    <rdfs:range rdf:resource=\"{XSD}{}\"/>", p.range_datatype.local_name());
        out.push_str("  </owl:DatatypeProperty>\n");
    }

    for ind in model.individuals() {
        let _ = writeln!(out, "  <owl:NamedIndividual rdf:about=\"{}\">", iri(&ind.id));
        let _ = writeln!(out, "    <rdf:type rdf:resource=\"{}\"/>", iri(&ind.class));
        for (prop, value) in assertions(ind) {
            match value {
                Value::Individual(id) => {
                    let _ = writeln!(out, "    <db:{prop} rdf:resource=\"{}\"/>", iri(id));
                }
                Value::Literal(s) => match literal_datatype(model, prop) {
                    Some(dt) => {
                        let _ = writeln!(
                            out,
                            "    <db:{prop} rdf:datatype=\"{XSD}{}\">{}</db:{prop}>",
                            dt.local_name(),
                            xml_escape(s)
                        );
                    }
                    None => {
                        let _ = writeln!(out, "    <db:{prop}>{}</db:{prop}>", xml_escape(s));
                    }
                },
            }
        }
        out.push_str("  </owl:NamedIndividual>\n");
    }
    out.push_str("</rdf:RDF>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{DataProp, OntClass, DEFAULT_IRI_BASE};

    fn cfg(format: OwlFormat) -> EmitConfig {
        EmitConfig::new(format, DEFAULT_IRI_BASE)
    }

    #[test]
    fn sanitize_examples() {
        assert_eq!(sanitize_iri_fragment("Person.name"), "Person_name");
        assert_eq!(sanitize_iri_fragment("order details"), "order_details");
        assert_eq!(sanitize_iri_fragment("2fa_codes"), "_2fa_codes");
        assert_eq!(sanitize_iri_fragment("-x"), "_-x");
        assert_eq!(sanitize_iri_fragment("Straße"), "Stra_e");
    }

    #[test]
    fn config_derives_ontology_iri() {
        assert_eq!(cfg(OwlFormat::Turtle).ontology_iri, "http://example.org/rdb2owl");
        assert_eq!(EmitConfig::new(OwlFormat::Turtle, "http://x.org/o/").ontology_iri, "http://x.org/o");
    }

    #[test]
    fn empty_model_is_header_only() {
        let m = OntologyModel::new(DEFAULT_IRI_BASE);
        let ttl = emit(&m, &cfg(OwlFormat::Turtle)).unwrap();
        assert_eq!(
            ttl,
            "@prefix : <http://example.org/rdb2owl#> .\n\
             @prefix owl: <http://www.w3.org/2002/07/owl#> .\n\
             @prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n\
             @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n\
             @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n\n\
             <http://example.org/rdb2owl> a owl:Ontology .\n"
        );
        let xml = emit(&m, &cfg(OwlFormat::RdfXml)).unwrap();
        assert!(xml.contains("<owl:Ontology rdf:about=\"http://example.org/rdb2owl\"/>"));
        assert!(!xml.contains("owl:Class"));
    }

    #[test]
    fn subclass_and_restriction_in_turtle() {
        let mut m = OntologyModel::new(DEFAULT_IRI_BASE);
        for name in ["Person", "Student"] {
            m.add_class(OntClass { name: name.into(), is_event_subclass: false }, name).unwrap();
        }
        m.add_subclass_axiom("Student", "Person").unwrap();
        m.add_datatype_property(
            DataProp {
                name: "Person_id".into(),
                domain: "Person".into(),
                range_datatype: Xsd::Integer,
                functional: true,
                min_cardinality: 1,
                max_cardinality: Some(1),
                local_name: "id".into(),
            },
            "id",
        )
        .unwrap();
        let ttl = emit(&m, &cfg(OwlFormat::Turtle)).unwrap();
        assert!(ttl.contains(":Student a owl:Class ;\n    rdfs:subClassOf :Person .\n"), "{ttl}");
        assert!(ttl.contains(
            ":Person a owl:Class ;\n    rdfs:subClassOf [ a owl:Restriction ; owl:onProperty :Person_id ; owl:cardinality \"1\"^^xsd:nonNegativeInteger ] .\n"
        ));
        assert!(ttl.contains(":Person_id a owl:DatatypeProperty , owl:FunctionalProperty ;"));
    }

    #[test]
    fn invalid_iri_base_is_rejected() {
        let m = OntologyModel::new(DEFAULT_IRI_BASE);
        for base in ["not an iri#", "http://example.org/no-terminator", "relative/path#"] {
            let err = emit(&m, &EmitConfig::new(OwlFormat::Turtle, base)).unwrap_err();
            assert!(matches!(err, EmitError::InvalidIri(_)), "{base}");
        }
    }

    #[test]
    fn invalid_local_name_is_rejected() {
        let mut m = OntologyModel::new(DEFAULT_IRI_BASE);
        m.add_class(OntClass { name: "bad name".into(), is_event_subclass: false }, "t").unwrap();
        assert!(matches!(emit(&m, &cfg(OwlFormat::Turtle)), Err(EmitError::InvalidIri(_))));
    }

    #[test]
    fn literal_escaping() {
        assert_eq!(turtle_string("a\"b\\c\nd"), "\"a\\\"b\\\\c\\nd\"");
        assert_eq!(xml_escape("<a & \"b\">"), "&lt;a &amp; &quot;b&quot;&gt;");
    }

    #[test]
    fn format_parsing() {
        assert_eq!("turtle".parse::<OwlFormat>(), Ok(OwlFormat::Turtle));
        assert_eq!("RDFXML".parse::<OwlFormat>(), Ok(OwlFormat::RdfXml));
        assert!("json".parse::<OwlFormat>().is_err());
    }
}
