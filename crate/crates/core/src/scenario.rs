//! Line-oriented scripts driving an [`InstanceStore`].
//!
//! ```text
//! # comment
//! create Employee {id=1, name="Ada Lovelace", salary=10.5}
//! update Employee_1 {salary=12}
//! delete Employee_1
//! dump-events
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::runtime::{EventRecord, InstanceStore, RuntimeError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Create { class: String, values: Vec<(String, String)> },
    Update { id: String, values: Vec<(String, String)> },
    Delete { id: String },
    DumpEvents,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ScenarioError {
    pub line: usize,
    pub kind: ScenarioErrorKind,
}

impl ScenarioError {
    fn syntax(line: usize, message: impl Into<String>) -> Self {
        ScenarioError { line, kind: ScenarioErrorKind::Syntax(message.into()) }
    }
}

/// Parses a whole script into `(line number, command)` pairs.
pub fn parse_scenario(text: &str) -> Result<Vec<(usize, Command)>, ScenarioError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (word, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let cmd = match word {
            "create" => {
                let (class, values) = target_and_values(rest, line_no, "class")?;
                Command::Create { class, values }
            }
            "update" => {
                let (id, values) = target_and_values(rest, line_no, "individual id")?;
                Command::Update { id, values }
            }
            "delete" => {
                if rest.is_empty() || rest.contains(char::is_whitespace) {
                    return Err(ScenarioError::syntax(line_no, "expected `delete <id>`"));
                }
                Command::Delete { id: rest.to_string() }
            }
            "dump-events" if rest.is_empty() => Command::DumpEvents,
            "dump-events" => return Err(ScenarioError::syntax(line_no, "`dump-events` takes no arguments")),
            other => return Err(ScenarioError::syntax(line_no, format!("unknown command `{other}`"))),
        };
        out.push((line_no, cmd));
    }
    Ok(out)
}

fn target_and_values(rest: &str, line: usize, what: &str) -> Result<(String, Vec<(String, String)>), ScenarioError> {
    let (target, tail) = match rest.find('{') {
        Some(i) => (rest[..i].trim(), Some(&rest[i..])),
        None => (rest, None),
    };
    if target.is_empty() || target.contains(char::is_whitespace) {
        return Err(ScenarioError::syntax(line, format!("expected a single {what}")));
    }
    let values = match tail {
        None => Vec::new(),
        Some(t) => {
            let inner = t
                .strip_prefix('{')
                .and_then(|t| t.strip_suffix('}'))
                .ok_or_else(|| ScenarioError::syntax(line, "unterminated `{`"))?;
            parse_values(inner).map_err(|m| ScenarioError::syntax(line, m))?
        }
    };
    Ok((target.to_string(), values))
}

fn parse_values(inner: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    let mut chars = inner.chars().peekable();
    loop {
        while chars.next_if(|c| c.is_whitespace()).is_some() {}
        if chars.peek().is_none() {
            break;
        }
        let key: String = std::iter::from_fn(|| chars.next_if(|c| *c != '=' && *c != ',')).collect();
        let key = key.trim().to_string();
        if chars.next() != Some('=') || key.is_empty() {
            return Err(format!("expected `key=value`, found `{key}`"));
        }
        while chars.next_if(|c| c.is_whitespace()).is_some() {}
        let value = if chars.next_if_eq(&'"').is_some() {
            let mut v = String::new();
            loop {
                match chars.next() {
                    Some('"') => break,
                    Some('\\') => match chars.next() {
                        Some('n') => v.push('\n'),
                        Some('t') => v.push('\t'),
                        Some(c) => v.push(c),
                        None => return Err("dangling escape".into()),
                    },
                    Some(c) => v.push(c),
                    None => return Err(format!("unterminated string for `{key}`")),
                }
            }
            while chars.next_if(|c| c.is_whitespace()).is_some() {}
            v
        } else {
            let v: String = std::iter::from_fn(|| chars.next_if(|c| *c != ',')).collect();
            let v = v.trim().to_string();
            if v.is_empty() {
                return Err(format!("missing value for `{key}`"));
            }
            v
        };
        out.push((key, value));
        match chars.next() {
            None => break,
            Some(',') => {}
            Some(c) => return Err(format!("unexpected `{c}` after value")),
        }
    }
    Ok(out)
}

/// One line per record, in log order.
pub fn format_events(records: &[EventRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let _ = writeln!(
            out,
            "{} {} agent={} subject={} trigger={} event={} copy={}",
            r.time, r.event_class, r.agent, r.subject_individual, r.trigger_name, r.event_individual, r.copy_individual
        );
    }
    out
}

/// Runs every command in order and returns the text produced by
/// `dump-events`. Stops at the first failing line.
pub fn run_scenario(store: &mut InstanceStore, text: &str) -> Result<String, ScenarioError> {
    let mut dump = String::new();
    for (line, cmd) in parse_scenario(text)? {
        let at = |e: RuntimeError| ScenarioError { line, kind: e.into() };
        match cmd {
            Command::Create { class, values } => {
                store.create_instance(&class, &values).map_err(at)?;
            }
            Command::Update { id, values } => store.update_instance(&id, &values).map_err(at)?,
            Command::Delete { id } => store.delete_instance(&id).map_err(at)?,
            Command::DumpEvents => dump.push_str(&format_events(store.events())),
        }
    }
    Ok(dump)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn parses_all_commands() {
        let script = "# setup\n\ncreate Employee {id=1, name=\"Ada, L.\", salary = 10.5}\nupdate Employee_1 {salary=12}\ndelete Employee_1\ndump-events\ncreate Person\n";
        let cmds = parse_scenario(script).unwrap();
        assert_eq!(
            cmds,
            vec![
                (3, Command::Create { class: "Employee".into(), values: kv(&[("id", "1"), ("name", "Ada, L."), ("salary", "10.5")]) }),
                (4, Command::Update { id: "Employee_1".into(), values: kv(&[("salary", "12")]) }),
                (5, Command::Delete { id: "Employee_1".into() }),
                (6, Command::DumpEvents),
                (7, Command::Create { class: "Person".into(), values: vec![] }),
            ]
        );
    }

    #[test]
    fn empty_braces_and_escapes() {
        assert_eq!(parse_values("").unwrap(), vec![]);
        assert_eq!(parse_values(" a = \"x\\\"y\" ").unwrap(), kv(&[("a", "x\"y")]));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let cases = [
            ("\nfrobnicate X", 2),
            ("create", 1),
            ("create A {id=1", 1),
            ("create A {id}", 1),
            ("# c\n\ndelete", 3),
            ("update A_1 {a=\"open}", 1),
            ("dump-events now", 1),
        ];
        for (script, line) in cases {
            let err = parse_scenario(script).unwrap_err();
            assert_eq!(err.line, line, "{script:?}");
            assert!(matches!(err.kind, ScenarioErrorKind::Syntax(_)));
        }
    }
}
