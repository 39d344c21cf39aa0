//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use common::*;
use oxrdf::{NamedOrBlankNode, Term, Triple};
use rdb2owl::ddl::Severity;
use rdb2owl::graph::{AttributeTag, ConceptualGraph, EdgeLabel, GraphError, NodeKind};
use rdb2owl::ontology::{OntologyModel, Value, Xsd, DEFAULT_IRI_BASE};
use rdb2owl::owl::OwlFormat;
use rdb2owl::pipeline::{transform, PipelineError, Transformed};
use rdb2owl::runtime::{EventFilter, InstanceStore};
use rdb2owl::schema::{TableKind, TriggerKind};

type Outcome = Result<String, String>;
type RuleCheck = (&'static str, Box<dyn Fn() -> bool>);
type Criterion = (&'static str, fn() -> Outcome);
type Restrictions = BTreeSet<(String, String, String)>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const PEOPLE: &str = "
    CREATE TABLE Person (id INT PRIMARY KEY, name VARCHAR(100) NOT NULL,
                         email VARCHAR(80) UNIQUE NOT NULL, nick TEXT);
    CREATE TABLE Dept (id INT PRIMARY KEY);
    CREATE TABLE Emp (id INT PRIMARY KEY, dept_id INT REFERENCES Dept(id));
";

fn people() -> Transformed {
    transform(PEOPLE, DEFAULT_IRI_BASE).expect("people schema transforms")
}

fn node_kind(g: &ConceptualGraph, name: &str) -> Option<NodeKind> {
    g.node(name).map(|n| n.kind)
}

fn edge_is(g: &ConceptualGraph, name: &str, source: &str, label: EdgeLabel, target: &str) -> bool {
    g.edge(name).is_some_and(|e| e.source == source && e.label == label && e.target == target)
}

fn data_prop(m: &OntologyModel, name: &str) -> (Xsd, bool, u8, Option<u8>) {
    let p = m.datatype_property(name).unwrap_or_else(|| panic!("missing datatype property {name}"));
    (p.range_datatype, p.functional, p.min_cardinality, p.max_cardinality)
}

/// Hand-derived expectations, one per translation rule, in rule order.
fn rule_checks() -> Vec<RuleCheck> {
    vec![
        ("entity table -> class node", Box::new(|| node_kind(&people().graph, "Person") == Some(NodeKind::Class))),
        (
            "join table -> pair of Has_A edges",
            Box::new(|| {
                let g = university().graph;
                g.node("Enrollment").is_none()
                    && edge_is(&g, "Enrollment_Student_has_Course", "Student", EdgeLabel::HasA, "Course")
                    && edge_is(&g, "Enrollment_Course_has_Student", "Course", EdgeLabel::HasA, "Student")
            }),
        ),
        ("plain column -> untagged attribute", Box::new(|| node_kind(&people().graph, "Person.nick") == Some(NodeKind::Attribute(None)))),
        ("primary key column -> key attribute", Box::new(|| node_kind(&people().graph, "Person.id") == Some(NodeKind::Attribute(Some(AttributeTag::Key))))),
        ("unique column -> unique attribute", Box::new(|| node_kind(&people().graph, "Person.email") == Some(NodeKind::Attribute(Some(AttributeTag::Unique))))),
        ("not null column -> not_null attribute", Box::new(|| node_kind(&people().graph, "Person.name") == Some(NodeKind::Attribute(Some(AttributeTag::NotNull))))),
        (
            "foreign key -> Has_A edge",
            Box::new(|| {
                let g = people().graph;
                edge_is(&g, "Emp_has_Dept", "Emp", EdgeLabel::HasA, "Dept") && !g.edge("Emp_has_Dept").unwrap().unique && g.node("Emp.dept_id").is_none()
            }),
        ),
        ("unique foreign key -> unique Has_A edge", Box::new(|| university().graph.edge("Passport_has_Person").is_some_and(|e| e.unique))),
        (
            "foreign key = primary key -> IS_A edge",
            Box::new(|| {
                let g = university().graph;
                edge_is(&g, "Student_is_a_Person", "Student", EdgeLabel::IsA, "Person") && g.edge("Student_has_Person").is_none()
            }),
        ),
        (
            "trigger -> event node with Has_event and To edges",
            Box::new(|| {
                let g = university().graph;
                node_kind(&g, "trg_emp_del") == Some(NodeKind::Event(TriggerKind::Delete))
                    && edge_is(&g, "Employee_has_event_trg_emp_del", "Employee", EdgeLabel::HasEvent, "trg_emp_del")
                    && edge_is(&g, "trg_emp_del_to_Employee_Audit", "trg_emp_del", EdgeLabel::To, "Employee_Audit")
            }),
        ),
        ("class node -> owl:Class", Box::new(|| people().model.class("Person").is_some())),
        ("untagged attribute -> plain datatype property", Box::new(|| data_prop(&people().model, "Person_nick") == (Xsd::String, false, 0, None))),
        ("key attribute -> functional, exactly one", Box::new(|| data_prop(&people().model, "Person_id") == (Xsd::Integer, true, 1, Some(1)))),
        ("unique attribute -> functional, at most one", Box::new(|| data_prop(&people().model, "Person_email") == (Xsd::String, true, 0, Some(1)))),
        ("not_null attribute -> at least one", Box::new(|| data_prop(&people().model, "Person_name") == (Xsd::String, false, 1, None))),
        (
            "Has_A edge -> object property",
            Box::new(|| {
                let m = people().model;
                m.object_property("Emp_has_Dept")
                    .is_some_and(|p| p.domain == "Emp" && p.range == "Dept" && p.inverse_of.is_none() && !p.inverse_functional)
            }),
        ),
        ("IS_A edge -> subclass axiom", Box::new(|| university().model.subclass_axioms().contains(&("Student".into(), "Person".into())))),
        (
            "join table edges -> inverse object properties",
            Box::new(|| {
                let m = university().model;
                m.object_property("Enrollment_Student_has_Course").and_then(|p| p.inverse_of.clone()).as_deref() == Some("Enrollment_Course_has_Student")
                    && m.object_property("Enrollment_Course_has_Student").and_then(|p| p.inverse_of.clone()).as_deref() == Some("Enrollment_Student_has_Course")
            }),
        ),
        ("unique Has_A edge -> inverse functional property", Box::new(|| university().model.object_property("Passport_has_Person").is_some_and(|p| p.inverse_functional))),
        (
            "event node -> Event machinery and trigger property",
            Box::new(|| {
                let m = university().model;
                let trg = m.object_property("trg_emp_del");
                m.class("Event").is_some()
                    && m.subclass_axioms().contains(&("Delete".into(), "Event".into()))
                    && m.datatype_property("Time").is_some_and(|p| p.domain == "Event" && p.range_datatype == Xsd::DateTime)
                    && m.datatype_property("Agent").is_some_and(|p| p.domain == "Event" && p.range_datatype == Xsd::String)
                    && trg.is_some_and(|p| p.domain == "Employee" && p.range == "Employee_Audit")
                    && m.event_bindings().len() == 1
            }),
        ),
    ]
}

fn rule_coverage() -> Outcome {
    let checks = rule_checks();
    let failed: Vec<String> = checks
        .iter()
        .enumerate()
        .filter(|(_, (_, check))| !catch_unwind(AssertUnwindSafe(check)).unwrap_or(false))
        .map(|(i, (label, _))| format!("#{} {label}", i + 1))
        .collect();
    ensure!(failed.is_empty(), "failing rule fixtures: {}", failed.join(", "));
    Ok(format!("{}/{} rule fixtures hold", checks.len(), checks.len()))
}

fn university_fixture() -> Outcome {
    let m = university().model;
    let classes: Vec<&str> = m.classes().map(|c| c.name.as_str()).collect();
    let expected = ["Course", "Delete", "Employee", "Employee_Audit", "Event", "Passport", "Person", "Student"];
    ensure!(classes == expected, "classes {classes:?}");
    let axioms: BTreeSet<(String, String)> = m.subclass_axioms().clone();
    let expected_axioms: BTreeSet<(String, String)> =
        [("Student", "Person"), ("Delete", "Event")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    ensure!(axioms == expected_axioms, "subclass axioms {axioms:?}");

    let inverse_pairs: Vec<_> = m.object_properties().filter(|p| p.inverse_of.is_some()).collect();
    ensure!(inverse_pairs.len() == 2, "{} properties with an inverse", inverse_pairs.len());
    for p in &inverse_pairs {
        ensure!(p.name.starts_with("Enrollment_"), "unexpected inverse property {}", p.name);
        let back = m.object_property(p.inverse_of.as_deref().unwrap()).and_then(|q| q.inverse_of.clone());
        ensure!(back.as_deref() == Some(p.name.as_str()), "{} is not mutually inverse", p.name);
    }
    let ifp: Vec<&str> = m.object_properties().filter(|p| p.inverse_functional).map(|p| p.name.as_str()).collect();
    ensure!(ifp == ["Passport_has_Person"], "inverse-functional {ifp:?}");
    let trg = m.object_property("trg_emp_del").ok_or("no trg_emp_del property")?;
    ensure!(trg.domain == "Employee" && trg.range == "Employee_Audit", "trg_emp_del {} -> {}", trg.domain, trg.range);
    ensure!(m.object_properties().count() == 4, "{} object properties", m.object_properties().count());
    Ok("8 classes (6 domain + Event + Delete), Student⊑Person, Delete⊑Event, 2 inverse, 1 inverse-functional, trg_emp_del".into())
}

fn round_trip() -> Outcome {
    let mut details = Vec::new();
    for (label, model) in [("schema", university().model), ("after scenario", simulated_model()?)] {
        let ttl = emit_as(&model, OwlFormat::Turtle);
        let xml = emit_as(&model, OwlFormat::RdfXml);
        let from_ttl = canonical(&parse_turtle(&ttl));
        let from_xml = canonical(&parse_rdf_xml(&xml));
        ensure!(from_ttl == from_xml, "{label}: Turtle and RDF/XML triple sets differ");
        ensure!(ttl == emit_as(&model, OwlFormat::Turtle), "{label}: Turtle re-emission differs");
        ensure!(xml == emit_as(&model, OwlFormat::RdfXml), "{label}: RDF/XML re-emission differs");
        details.push(format!("{label}: {} triples", from_ttl.len()));
    }
    Ok(format!("{}; re-emission byte-identical", details.join(", ")))
}

fn simulated_model() -> Result<OntologyModel, String> {
    let mut store = InstanceStore::new(university().model);
    rdb2owl::scenario::run_scenario(&mut store, &fixture("employees.scenario")).map_err(|e| e.to_string())?;
    Ok(store.into_model())
}

/// Visits every permutation of `items` (Heap's algorithm).
fn permutations<T: Clone>(items: &mut [T], k: usize, visit: &mut dyn FnMut(&[T]) -> Result<(), String>) -> Result<(), String> {
    if k <= 1 {
        return visit(items);
    }
    for i in 0..k - 1 {
        permutations(items, k - 1, visit)?;
        if k.is_multiple_of(2) {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
    permutations(items, k - 1, visit)
}

fn statement_order() -> Outcome {
    let source = fixture("university.sql");
    let statements: Vec<String> =
        source.split(';').map(str::trim).filter(|s| !s.is_empty()).map(|s| format!("{s};")).collect();
    let (mut tables, rest): (Vec<String>, Vec<String>) = statements.into_iter().partition(|s| s.contains("CREATE TABLE"));
    let base = university();
    let nodes = |g: &ConceptualGraph| g.nodes().cloned().collect::<BTreeSet<_>>();
    let edges = |g: &ConceptualGraph| g.edges().cloned().collect::<BTreeSet<_>>();
    let (base_nodes, base_edges) = (nodes(&base.graph), edges(&base.graph));
    let base_ttl = emit_as(&base.model, OwlFormat::Turtle);
    let mut count = 0usize;
    let n = tables.len();
    permutations(&mut tables, n, &mut |order| {
        count += 1;
        let ddl = order.iter().chain(&rest).cloned().collect::<Vec<_>>().join("\n");
        let t = transform(&ddl, DEFAULT_IRI_BASE).map_err(|e| format!("permutation {count}: {e}"))?;
        ensure!(nodes(&t.graph) == base_nodes && edges(&t.graph) == base_edges, "permutation {count}: graph differs");
        // Emission is the slow part; sample it.
        if (count - 1).is_multiple_of(97) {
            ensure!(emit_as(&t.model, OwlFormat::Turtle) == base_ttl, "permutation {count}: emission differs");
        }
        ensure!(t.model == base.model, "permutation {count}: ontology model differs");
        Ok(())
    })?;
    Ok(format!("all {count} orders of {n} CREATE TABLE statements give identical graphs and ontologies"))
}

/// `(class, property, owl predicate local name)` for every emitted restriction.
fn emitted_restrictions(triples: &[Triple]) -> Restrictions {
    let local = |s: &str| s.rsplit(['#', '/']).next().unwrap_or(s).to_string();
    let mut restriction: BTreeMap<String, (Option<String>, Option<String>)> = BTreeMap::new();
    let mut owner: BTreeMap<String, String> = BTreeMap::new();
    for t in triples {
        match (&t.subject, &t.object) {
            (NamedOrBlankNode::BlankNode(b), Term::NamedNode(o)) if t.predicate.as_str().ends_with("onProperty") => {
                restriction.entry(b.as_str().into()).or_default().0 = Some(local(o.as_str()));
            }
            (NamedOrBlankNode::BlankNode(b), Term::Literal(l)) if l.value() == "1" && t.predicate.as_str().ends_with("ardinality") => {
                restriction.entry(b.as_str().into()).or_default().1 = Some(local(t.predicate.as_str()));
            }
            (NamedOrBlankNode::NamedNode(s), Term::BlankNode(b)) if t.predicate.as_str().ends_with("subClassOf") => {
                owner.insert(b.as_str().into(), local(s.as_str()));
            }
            _ => {}
        }
    }
    restriction
        .into_iter()
        .filter_map(|(b, (p, k))| Some((owner.get(&b)?.clone(), p?, k?)))
        .collect()
}

fn cardinality_encoding() -> Outcome {
    let t = university();
    let emitted = emitted_restrictions(&parse_turtle(&emit_as(&t.model, OwlFormat::Turtle)));
    // Derived straight from the schema: key beats unique beats not null.
    let mut expected = BTreeSet::new();
    let (mut keys, mut uniques, mut not_nulls) = (0, 0, 0);
    for table in t.schema.tables().iter().filter(|t| t.kind == TableKind::Entity) {
        for col in table.columns.iter().filter(|c| !table.is_foreign_key_column(&c.name)) {
            let prop = format!("{}_{}", table.name, col.name);
            let kind = if table.is_primary_key_column(&col.name) {
                keys += 1;
                "cardinality"
            } else if col.is_unique {
                uniques += 1;
                "maxCardinality"
            } else if col.is_not_null {
                not_nulls += 1;
                "minCardinality"
            } else {
                continue;
            };
            expected.insert((table.name.clone(), prop, kind.to_string()));
        }
    }
    let missing: Vec<_> = expected.difference(&emitted).collect();
    let extra: Vec<_> = emitted.difference(&expected).collect();
    ensure!(missing.is_empty() && extra.is_empty(), "missing {missing:?}, unexpected {extra:?}");
    ensure!(keys > 0 && uniques > 0 && not_nulls > 0, "fixture lacks a constraint kind");
    Ok(format!("{keys} exact, {uniques} max, {not_nulls} min restrictions, all value 1"))
}

fn event_firing() -> Outcome {
    let mut store = InstanceStore::new(university().model);
    let mut ids = Vec::new();
    for (i, name) in [(1, "Ada"), (2, "Charles"), (3, "Grace")] {
        let values = vec![("id".to_string(), i.to_string()), ("name".to_string(), name.to_string()), ("salary".to_string(), format!("{}.50", 1000 * i))];
        ids.push(store.create_instance("Employee", &values).map_err(|e| e.to_string())?);
    }
    let snapshots: Vec<BTreeMap<String, Vec<Value>>> = [&ids[0], &ids[2]]
        .iter()
        .map(|id| store.individual(id).unwrap().values.clone())
        .collect();
    store.delete_instance(&ids[0]).map_err(|e| e.to_string())?;
    store.delete_instance(&ids[2]).map_err(|e| e.to_string())?;

    ensure!(store.members("Employee").len() == 1, "{} employees left", store.members("Employee").len());
    let audits = store.members("Employee_Audit");
    ensure!(audits.len() == 2, "{} audit individuals", audits.len());
    for (audit, snapshot) in audits.iter().zip(&snapshots) {
        let renamed: BTreeMap<String, Vec<Value>> =
            snapshot.iter().map(|(k, v)| (k.replacen("Employee_", "Employee_Audit_", 1), v.clone())).collect();
        ensure!(audit.values == renamed, "{} does not match the deleted snapshot", audit.id);
    }

    let log = store.query_events(&EventFilter::default());
    ensure!(log.len() == 2, "{} event records", log.len());
    ensure!(log.iter().all(|r| r.event_class == TriggerKind::Delete && r.agent == "Employee"), "unexpected records {log:?}");
    let times: Vec<chrono::DateTime<chrono::Utc>> = log
        .iter()
        .map(|r| r.time.parse().map_err(|e| format!("bad timestamp {}: {e}", r.time)))
        .collect::<Result<_, _>>()?;
    ensure!(times.windows(2).all(|w| w[0] <= w[1]), "timestamps go backwards");

    let triples = parse_turtle(&emit_as(store.model(), OwlFormat::Turtle));
    let delete_class = iri("Delete");
    let delete_individuals: Vec<String> = triples
        .iter()
        .filter(|t| t.predicate.as_str().ends_with("#type") && t.object.to_string() == delete_class)
        .map(|t| t.subject.to_string())
        .collect();
    ensure!(delete_individuals.len() == 2, "{} Delete individuals emitted", delete_individuals.len());
    for ind in &delete_individuals {
        let has = |p: &str| triples.iter().any(|t| t.subject.to_string() == *ind && t.predicate.as_str().ends_with(p));
        ensure!(has("#Agent") && has("#Time"), "{ind} lacks Agent or Time");
    }
    Ok("1 Employee, 2 matching Employee_Audit copies, 2 Delete records (agent Employee, nondecreasing), 2 Delete individuals with Agent and Time".into())
}

fn negative_paths() -> Outcome {
    match transform(&fixture("cyclic.sql"), DEFAULT_IRI_BASE) {
        Err(PipelineError::Graph(GraphError::HierarchyCycle(_))) => {}
        other => return Err(format!("cyclic schema gave {other:?}")),
    }
    let bin = env!("CARGO_BIN_EXE_rdb2owl");
    let cyclic = Command::new(bin).arg("transform").arg(fixture_path("cyclic.sql")).output().map_err(|e| e.to_string())?;
    ensure!(cyclic.status.code() == Some(2), "cyclic exit {:?}", cyclic.status.code());

    let t = transform(&fixture("conditional_trigger.sql"), DEFAULT_IRI_BASE).map_err(|e| e.to_string())?;
    ensure!(t.schema.triggers().is_empty(), "conditional trigger was kept");
    ensure!(
        t.diagnostics.iter().any(|d| d.severity == Severity::Warning && d.message.contains("unsupported trigger body")),
        "no unsupported-trigger warning"
    );
    let cond = Command::new(bin).arg("transform").arg(fixture_path("conditional_trigger.sql")).output().map_err(|e| e.to_string())?;
    ensure!(cond.status.code() == Some(0), "conditional exit {:?}", cond.status.code());
    Ok("cyclic pk=fk -> HierarchyCycle, exit 2; conditional trigger -> warning, skipped, exit 0".into())
}

/// The editor load itself is a manual step; this runs the automatable part:
/// an independent RDF/XML parse plus OWL well-formedness, and owlready2 when
/// it is installed.
fn editor_loadability() -> Outcome {
    let model = simulated_model()?;
    let xml = emit_as(&model, OwlFormat::RdfXml);
    let triples = canonical(&parse_rdf_xml(&xml));
    let classes: BTreeSet<String> = typed(&triples, "Class").into_iter().collect();
    for kind in ["ObjectProperty", "DatatypeProperty"] {
        for p in typed(&triples, kind) {
            let domain = format!("{p} <http://www.w3.org/2000/01/rdf-schema#domain> ");
            let d = triples.iter().find_map(|t| t.strip_prefix(&domain)).ok_or(format!("{p} has no domain"))?;
            ensure!(classes.contains(d), "{p} domain {d} is not a declared class");
        }
    }
    for ind in typed(&triples, "NamedIndividual") {
        let prefix = format!("{ind} {RDF_TYPE} ");
        let declared = triples.iter().filter_map(|t| t.strip_prefix(&prefix)).filter(|c| classes.contains(*c)).count();
        ensure!(declared == 1, "{ind} is not typed with one declared class");
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("university.owl");
    std::fs::write(&path, &xml).map_err(|e| e.to_string())?;
    let script = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scripts/owl_smoke.py");
    let owlready = match Command::new("python3").args(["-c", "import owlready2"]).output() {
        Ok(o) if o.status.success() => {
            let run = Command::new("python3").arg(script).arg(&path).output().map_err(|e| e.to_string())?;
            ensure!(run.status.success(), "owlready2 failed: {}", String::from_utf8_lossy(&run.stdout));
            "owlready2 load OK"
        }
        _ => "owlready2 not installed, skipped",
    };
    Ok(format!("automated proxy: RDF/XML re-parses, OWL declarations consistent, {owlready}; Protégé load is a manual step (README)"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("rule coverage", rule_coverage),
        ("university end-to-end", university_fixture),
        ("round-trip and determinism", round_trip),
        ("statement-order invariance", statement_order),
        ("cardinality encoding", cardinality_encoding),
        ("event firing scenario", event_firing),
        ("negative paths", negative_paths),
        ("ontology editor loadability", editor_loadability),
    ];
    let started = Instant::now();
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let ms = t.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail} [{ms} ms]", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {} ({name}): {why} [{ms} ms]", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} passed in {} ms", criteria.len() - failures, criteria.len(), started.elapsed().as_millis());
    if failures > 0 {
        std::process::exit(1);
    }
}
