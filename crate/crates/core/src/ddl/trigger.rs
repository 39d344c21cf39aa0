//! Trigger body recognition. Only a single unconditional
//! `INSERT INTO <table> ...` statement is accepted, optionally wrapped in one
//! `BEGIN ... END` block.

use thiserror::Error;

use super::lexer::{tokenize, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnsupportedTriggerBody {
    #[error("unsupported trigger body: body is empty")]
    Empty,
    #[error("unsupported trigger body: {0} statements, only a single INSERT is supported")]
    MultipleStatements(usize),
    #[error("unsupported trigger body: conditional `{0}` clause")]
    Conditional(String),
    #[error("unsupported trigger body: expected INSERT INTO, found {0}")]
    NotInsert(String),
    #[error("unsupported trigger body: {0}")]
    Malformed(String),
}

const CONDITIONAL_WORDS: &[&str] = &["IF", "WHEN", "CASE", "WHERE", "ELSIF", "ELSEIF", "ELSE", "WHILE", "LOOP"];

/// Returns the target table of an accepted trigger body.
pub fn parse_trigger_body(body: &str) -> Result<String, UnsupportedTriggerBody> {
    let tokens = tokenize(body).map_err(|e| UnsupportedTriggerBody::Malformed(e.message))?;
    let mut toks: &[Token] = &tokens;

    while toks.last().is_some_and(|t| t.is_punct(';')) {
        toks = &toks[..toks.len() - 1];
    }
    if toks.is_empty() {
        return Err(UnsupportedTriggerBody::Empty);
    }
    if toks[0].is_word("WHEN") {
        return Err(UnsupportedTriggerBody::Conditional("WHEN".into()));
    }
    if toks[0].is_word("BEGIN") {
        let mut inner = &toks[1..];
        if inner.first().is_some_and(|t| t.is_word("ATOMIC")) {
            inner = &inner[1..];
        }
        match inner.last() {
            Some(t) if t.is_word("END") => toks = &inner[..inner.len() - 1],
            _ => return Err(UnsupportedTriggerBody::Malformed("BEGIN without matching END".into())),
        }
    }

    let statements: Vec<&[Token]> = toks.split(|t| t.is_punct(';')).filter(|s| !s.is_empty()).collect();
    let stmt = match statements.as_slice() {
        [] => return Err(UnsupportedTriggerBody::Empty),
        [one] => *one,
        many => {
            if let Some(word) = find_conditional(toks) {
                return Err(UnsupportedTriggerBody::Conditional(word));
            }
            return Err(UnsupportedTriggerBody::MultipleStatements(many.len()));
        }
    };

    if let Some(word) = find_conditional(stmt) {
        return Err(UnsupportedTriggerBody::Conditional(word));
    }
    if !stmt[0].is_word("INSERT") {
        return Err(UnsupportedTriggerBody::NotInsert(stmt[0].describe()));
    }
    match stmt.get(1) {
        Some(t) if t.is_word("INTO") => {}
        Some(t) => return Err(UnsupportedTriggerBody::NotInsert(format!("INSERT {}", t.describe()))),
        None => return Err(UnsupportedTriggerBody::Malformed("INSERT without target table".into())),
    }

    // Accept schema-qualified targets; the last segment names the table.
    let mut i = 2;
    let mut target = None;
    while let Some(name) = stmt.get(i).and_then(Token::ident) {
        target = Some(name.to_string());
        if stmt.get(i + 1).is_some_and(|t| t.is_punct('.')) {
            i += 2;
        } else {
            break;
        }
    }
    let target = target.ok_or_else(|| UnsupportedTriggerBody::Malformed("INSERT INTO without target table".into()))?;
    if is_reserved(&target) && matches!(stmt.get(2).map(|t| &t.kind), Some(TokenKind::Word(_))) {
        return Err(UnsupportedTriggerBody::Malformed(format!("`{target}` is not a table name")));
    }
    Ok(target)
}

fn find_conditional(tokens: &[Token]) -> Option<String> {
    tokens.iter().find_map(|t| match &t.kind {
        TokenKind::Word(w) if CONDITIONAL_WORDS.iter().any(|k| w.eq_ignore_ascii_case(k)) => Some(w.to_uppercase()),
        _ => None,
    })
}

fn is_reserved(word: &str) -> bool {
    ["VALUES", "SELECT", "DEFAULT"].iter().any(|k| word.eq_ignore_ascii_case(k))
}
