//! Individual store over a generated ontology. Each mutation fires the
//! matching event bindings. A firing copies the affected individual into the
//! binding's target class and records Agent and Time on a new event
//! individual. It also appends an [`EventRecord`] to the log.
//!
//! Firing is depth one. Copies made by a binding never fire bindings of
//! their own. Every operation either succeeds completely or leaves the store
//! untouched.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, SecondsFormat, Utc};
use serde::Serialize;
use thiserror::Error;

use crate::ontology::{
    DataProp, EventBinding, Individual, ObjectProp, OntologyModel, Value, AGENT_PROPERTY, TIME_PROPERTY,
};
use crate::owl::sanitize_iri_fragment;
use crate::schema::TriggerKind;

pub trait Clock {
    fn now(&mut self) -> DateTime<Utc>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&mut self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Starts at a fixed instant and advances by `step` on every reading.
#[derive(Debug, Clone)]
pub struct SteppingClock {
    next: DateTime<Utc>,
    step: Duration,
}

impl SteppingClock {
    pub fn new(start: DateTime<Utc>, step: Duration) -> Self {
        SteppingClock { next: start, step }
    }
}

impl Clock for SteppingClock {
    fn now(&mut self) -> DateTime<Utc> {
        let t = self.next;
        self.next += self.step;
        t
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventRecord {
    pub event_class: TriggerKind,
    /// Class whose individual fired the event.
    pub agent: String,
    /// ISO-8601 UTC, millisecond precision.
    pub time: String,
    pub subject_individual: String,
    pub trigger_name: String,
    pub event_individual: String,
    pub copy_individual: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventFilter {
    pub agent: Option<String>,
    pub kind: Option<TriggerKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown individual `{0}`")]
    UnknownIndividual(String),
    #[error("class `{class}` has no property `{property}`")]
    UnknownProperty { class: String, property: String },
    #[error("cardinality violation on `{property}` of {subject}: {reason}")]
    CardinalityViolation { subject: String, property: String, reason: String },
    #[error("value `{value}` is not a valid xsd:{datatype} for `{property}`")]
    InvalidValue { property: String, datatype: String, value: String },
    #[error("`{value}` is not an individual of class `{range}` required by `{property}`")]
    InvalidReference { property: String, range: String, value: String },
}

/// Property assignments as written by the caller: `(name, lexical value)`.
/// Names may be full property names or column names.
pub type Assignments = [(String, String)];

pub struct InstanceStore {
    model: OntologyModel,
    log: Vec<EventRecord>,
    warnings: Vec<String>,
    clock: Box<dyn Clock>,
    last_time: Option<DateTime<Utc>>,
    counters: BTreeMap<String, usize>,
}

impl std::fmt::Debug for InstanceStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InstanceStore")
            .field("individuals", &self.model.individuals().count())
            .field("log", &self.log)
            .finish_non_exhaustive()
    }
}

enum Resolved<'m> {
    Data(&'m DataProp),
    Object(&'m ObjectProp),
}

impl InstanceStore {
    pub fn new(model: OntologyModel) -> Self {
        Self::with_clock(model, Box::new(SystemClock))
    }

    pub fn with_clock(model: OntologyModel, clock: Box<dyn Clock>) -> Self {
        InstanceStore { model, log: Vec::new(), warnings: Vec::new(), clock, last_time: None, counters: BTreeMap::new() }
    }

    pub fn model(&self) -> &OntologyModel {
        &self.model
    }

    pub fn into_model(self) -> OntologyModel {
        self.model
    }

    pub fn individual(&self, id: &str) -> Option<&Individual> {
        self.model.individual(id)
    }

    /// Direct members of `class`, sorted by id.
    pub fn members(&self, class: &str) -> Vec<&Individual> {
        self.model.individuals().filter(|i| i.class == class).collect()
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.log
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn query_events(&self, filter: &EventFilter) -> Vec<&EventRecord> {
        self.log
            .iter()
            .filter(|r| filter.agent.as_ref().is_none_or(|a| *a == r.agent))
            .filter(|r| filter.kind.is_none_or(|k| k == r.event_class))
            .collect()
    }

    pub fn create_instance(&mut self, class: &str, values: &Assignments) -> Result<String, RuntimeError> {
        if self.model.class(class).is_none() {
            return Err(RuntimeError::UnknownClass(class.to_string()));
        }
        let resolved = self.resolve(class, values)?;
        let (id, n) = self.peek_id(class);
        let individual = Individual { id: id.clone(), class: class.to_string(), values: resolved };
        self.check_cardinality(&individual)?;
        self.counters.insert(class.to_string(), n);
        self.model.insert_individual(individual.clone());
        self.fire(TriggerKind::Insert, &individual);
        Ok(id)
    }

    /// Assigned properties replace their previous values; others are kept.
    pub fn update_instance(&mut self, id: &str, values: &Assignments) -> Result<(), RuntimeError> {
        let current = self.model.individual(id).ok_or_else(|| RuntimeError::UnknownIndividual(id.to_string()))?;
        let mut updated = current.clone();
        for (prop, vals) in self.resolve(&current.class, values)? {
            updated.values.insert(prop, vals);
        }
        self.check_cardinality(&updated)?;
        self.model.insert_individual(updated.clone());
        self.fire(TriggerKind::Update, &updated);
        Ok(())
    }

    pub fn delete_instance(&mut self, id: &str) -> Result<(), RuntimeError> {
        let removed = self.model.remove_individual(id).ok_or_else(|| RuntimeError::UnknownIndividual(id.to_string()))?;
        let referrers: Vec<String> = self
            .model
            .individuals()
            .filter(|i| i.values.values().flatten().any(|v| *v == Value::Individual(id.to_string())))
            .map(|i| i.id.clone())
            .collect();
        for other in referrers {
            if let Some(ind) = self.model.individual_mut(&other) {
                for vals in ind.values.values_mut() {
                    vals.retain(|v| *v != Value::Individual(id.to_string()));
                }
                ind.values.retain(|_, vals| !vals.is_empty());
            }
        }
        self.fire(TriggerKind::Delete, &removed);
        Ok(())
    }

    /// Next free `<Class>_<n>` id and its counter value, without claiming it.
    fn peek_id(&self, class: &str) -> (String, usize) {
        let mut n = self.counters.get(class).copied().unwrap_or(0);
        loop {
            n += 1;
            let id = format!("{class}_{n}");
            if !self.model.is_name_taken(&id) {
                return (id, n);
            }
        }
    }

    fn next_id(&mut self, class: &str) -> String {
        let (id, n) = self.peek_id(class);
        self.counters.insert(class.to_string(), n);
        id
    }

    fn lookup(&self, class: &str, key: &str) -> Option<Resolved<'_>> {
        let data = self.model.data_properties_for(class);
        if let Some(p) = data.iter().find(|p| p.name == key) {
            return Some(Resolved::Data(p));
        }
        if let Some(p) = self.model.object_properties_for(class).into_iter().find(|p| p.name == key) {
            return Some(Resolved::Object(p));
        }
        // Column names resolve against the class itself before its ancestors.
        let local = sanitize_iri_fragment(key);
        self.model
            .ancestors(class)
            .iter()
            .find_map(|c| data.iter().find(|p| p.domain == *c && (p.local_name == key || p.local_name == local)))
            .map(|p| Resolved::Data(p))
    }

    fn resolve(&self, class: &str, values: &Assignments) -> Result<BTreeMap<String, Vec<Value>>, RuntimeError> {
        let mut out: BTreeMap<String, Vec<Value>> = BTreeMap::new();
        for (key, raw) in values {
            match self.lookup(class, key) {
                Some(Resolved::Data(p)) => {
                    if !p.range_datatype.accepts(raw) {
                        return Err(RuntimeError::InvalidValue {
                            property: p.name.clone(),
                            datatype: p.range_datatype.local_name().to_string(),
                            value: raw.clone(),
                        });
                    }
                    out.entry(p.name.clone()).or_default().push(Value::Literal(raw.clone()));
                }
                Some(Resolved::Object(p)) => {
                    let target = self.model.individual(raw);
                    if !target.is_some_and(|t| self.model.ancestors(&t.class).contains(&p.range)) {
                        return Err(RuntimeError::InvalidReference {
                            property: p.name.clone(),
                            range: p.range.clone(),
                            value: raw.clone(),
                        });
                    }
                    out.entry(p.name.clone()).or_default().push(Value::Individual(raw.clone()));
                }
                None => {
                    return Err(RuntimeError::UnknownProperty { class: class.to_string(), property: key.clone() });
                }
            }
        }
        Ok(out)
    }

    fn check_cardinality(&self, individual: &Individual) -> Result<(), RuntimeError> {
        for p in self.model.data_properties_for(&individual.class) {
            let count = individual.values.get(&p.name).map_or(0, Vec::len);
            let violation = |reason: String| RuntimeError::CardinalityViolation {
                subject: individual.id.clone(),
                property: p.name.clone(),
                reason,
            };
            if count < usize::from(p.min_cardinality) {
                return Err(violation(format!("requires at least {} value(s), got {count}", p.min_cardinality)));
            }
            let max = p.max_cardinality.map(usize::from).or(p.functional.then_some(1));
            if let Some(max) = max.filter(|m| count > *m) {
                return Err(violation(format!("allows at most {max} value(s), got {count}")));
            }
        }
        Ok(())
    }

    fn tick(&mut self) -> DateTime<Utc> {
        let now = self.clock.now();
        let t = match self.last_time {
            Some(last) if last > now => last,
            _ => now,
        };
        self.last_time = Some(t);
        t
    }

    fn fire(&mut self, kind: TriggerKind, subject: &Individual) {
        let bindings: Vec<EventBinding> = self
            .model
            .event_bindings()
            .iter()
            .filter(|b| b.kind == kind && b.owner_class == subject.class)
            .cloned()
            .collect();
        for binding in bindings {
            let copy_id = self.copy_into(subject, &binding);
            let time = self.tick().to_rfc3339_opts(SecondsFormat::Millis, true);
            let event_class = kind.class_name();
            let event_id = self.next_id(event_class);
            let mut values = BTreeMap::new();
            values.insert(AGENT_PROPERTY.to_string(), vec![Value::Literal(binding.owner_class.clone())]);
            values.insert(TIME_PROPERTY.to_string(), vec![Value::Literal(time.clone())]);
            self.model.insert_individual(Individual { id: event_id.clone(), class: event_class.to_string(), values });
            self.log.push(EventRecord {
                event_class: kind,
                agent: binding.owner_class.clone(),
                time,
                subject_individual: subject.id.clone(),
                trigger_name: binding.trigger_name.clone(),
                event_individual: event_id,
                copy_individual: copy_id,
            });
        }
    }

    /// Copies data values into a new member of the binding's target class,
    /// matching properties by local name. The copy skips cardinality checks
    /// so that audit rows mirror whatever the source held.
    fn copy_into(&mut self, subject: &Individual, binding: &EventBinding) -> String {
        let target = binding.target_class.clone();
        let target_props: Vec<(String, String)> = self
            .model
            .data_properties_for(&target)
            .into_iter()
            .map(|p| (p.local_name.clone(), p.name.clone()))
            .collect();
        let mut values = BTreeMap::new();
        for (prop, vals) in &subject.values {
            let Some(source) = self.model.datatype_property(prop) else {
                self.warnings.push(format!(
                    "{}: object property `{prop}` of {} is not copied to `{target}`",
                    binding.trigger_name, subject.id
                ));
                continue;
            };
            match target_props.iter().find(|(local, _)| *local == source.local_name) {
                Some((_, name)) => {
                    values.insert(name.clone(), vals.clone());
                }
                None => self.warnings.push(format!(
                    "{}: `{prop}` of {} has no counterpart in `{target}` and is dropped",
                    binding.trigger_name, subject.id
                )),
            }
        }
        let id = self.next_id(&target);
        self.model.insert_individual(Individual { id: id.clone(), class: target, values });
        id
    }
}
