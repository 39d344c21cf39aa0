//! SQL DDL front end.
//!
//! Accepted dialect:
//!
//! * `CREATE TABLE` with column definitions and inline or table-level
//!   `PRIMARY KEY`, `UNIQUE`, `NOT NULL`, `FOREIGN KEY ... REFERENCES`.
//! * `CREATE TRIGGER <name> AFTER {INSERT|UPDATE|DELETE} ON <table>
//!   FOR EACH ROW <single INSERT statement>`.
//! * `--` and `/* */` comments, double-quoted identifiers, statements
//!   terminated by `;`.
//!
//! Recognized statements outside the subset (indexes, views, `ALTER`, DML,
//! `BEFORE` triggers, triggers with complex bodies) are skipped with a
//! warning. Anything else is an error.

mod lexer;
mod trigger;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::schema::{
    classify_tables, fold, ColumnDef, ForeignKeyDef, RelationalSchema, TableDef, TableKind, TriggerDef, TriggerKind,
    TriggerTiming,
};

pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use trigger::{parse_trigger_body, UnsupportedTriggerBody};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    /// 1-based.
    pub line: usize,
    /// 1-based, in characters.
    pub column: usize,
    pub message: String,
    pub offending_statement: String,
}

impl ParseDiagnostic {
    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.column, self.severity, self.message)
    }
}

/// Successful parse: a validated, classified schema plus any warnings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSchema {
    pub schema: RelationalSchema,
    pub warnings: Vec<ParseDiagnostic>,
}

/// Parses a DDL script. On failure the returned list holds at least one
/// error, followed by whatever warnings were collected.
pub fn parse_ddl(source: &str) -> Result<ParsedSchema, Vec<ParseDiagnostic>> {
    let tokens = match tokenize(source) {
        Ok(t) => t,
        Err(e) => {
            return Err(vec![ParseDiagnostic {
                severity: Severity::Error,
                line: e.line,
                column: e.column,
                message: e.message,
                offending_statement: excerpt(line_text(source, e.line)),
            }])
        }
    };

    let mut ctx = Context { source, diags: Vec::new(), tables: Vec::new(), triggers: Vec::new() };
    for stmt in split_statements(&tokens) {
        ctx.statement(&stmt);
    }
    ctx.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

impl From<&Token> for Pos {
    fn from(t: &Token) -> Self {
        Pos { line: t.line, column: t.column }
    }
}

type Name = (String, Pos);

struct PendingFk {
    columns: Vec<Name>,
    table: Name,
}

struct PendingTable {
    name: Name,
    columns: Vec<(ColumnDef, Pos)>,
    primary_key: Vec<Name>,
    uniques: Vec<Vec<Name>>,
    foreign_keys: Vec<PendingFk>,
    excerpt: String,
}

struct PendingTrigger {
    name: Name,
    kind: TriggerKind,
    owner: Name,
    target: Name,
    excerpt: String,
}

struct Statement<'t> {
    tokens: &'t [Token],
    terminated: bool,
}

fn split_statements(tokens: &[Token]) -> Vec<Statement<'_>> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut depth: i32 = 0;
    let mut block_aware = false;
    for (i, tok) in tokens.iter().enumerate() {
        if i == start {
            block_aware = has_body_block(&tokens[start..]);
            depth = 0;
        }
        if block_aware {
            if tok.is_word("BEGIN") || tok.is_word("CASE") {
                depth += 1;
            } else if tok.is_word("END") {
                let closes_block = !tokens
                    .get(i + 1)
                    .is_some_and(|n| ["IF", "LOOP", "WHILE", "REPEAT"].iter().any(|k| n.is_word(k)));
                if closes_block {
                    depth -= 1;
                }
            }
        }
        if tok.is_punct(';') && depth <= 0 {
            if i > start {
                out.push(Statement { tokens: &tokens[start..i], terminated: true });
            }
            start = i + 1;
        }
    }
    if start < tokens.len() {
        out.push(Statement { tokens: &tokens[start..], terminated: false });
    }
    out
}

/// CREATE statements whose body may hold `;` inside BEGIN ... END.
fn has_body_block(tokens: &[Token]) -> bool {
    tokens.first().is_some_and(|t| t.is_word("CREATE"))
        && tokens
            .iter()
            .skip(1)
            .take(4)
            .any(|t| ["TRIGGER", "PROCEDURE", "FUNCTION"].iter().any(|k| t.is_word(k)))
}

const SKIPPABLE_STATEMENTS: &[&str] = &[
    "ALTER", "DROP", "INSERT", "UPDATE", "DELETE", "SELECT", "SET", "USE", "BEGIN", "COMMIT", "ROLLBACK", "START",
    "GRANT", "REVOKE", "COMMENT", "LOCK", "UNLOCK", "PRAGMA", "TRUNCATE", "ANALYZE", "VACUUM", "COPY", "END",
    "DELIMITER", "SHOW", "EXPLAIN", "WITH",
];

struct Context<'s> {
    source: &'s str,
    diags: Vec<ParseDiagnostic>,
    tables: Vec<PendingTable>,
    triggers: Vec<PendingTrigger>,
}

impl<'s> Context<'s> {
    fn statement(&mut self, stmt: &Statement<'_>) {
        let toks = stmt.tokens;
        let text = excerpt(&self.source[toks[0].start..toks[toks.len() - 1].end]);
        let first = &toks[0];

        if !stmt.terminated {
            let last = &toks[toks.len() - 1];
            self.push(Severity::Warning, last.into(), "statement is not terminated by `;`".into(), &text);
        }

        let mut p = StmtParser { toks, pos: 0, source: self.source };
        if first.is_word("CREATE") {
            p.pos = 1;
            if p.eat_word("OR") && !p.eat_word("REPLACE") {
                let d = p.error_here("expected REPLACE after CREATE OR");
                self.push_diag(d, &text);
                return;
            }
            let _ = p.eat_word("TEMP") || p.eat_word("TEMPORARY");
            if p.at_word("TABLE") {
                p.pos += 1;
                match p.create_table(text.clone()) {
                    Ok(Some((table, warnings))) => {
                        for (pos, msg) in warnings {
                            self.push(Severity::Warning, pos, msg, &text);
                        }
                        self.tables.push(table);
                    }
                    Ok(None) => {
                        self.push(Severity::Warning, first.into(), "CREATE TABLE ... AS is not supported; statement skipped".into(), &text)
                    }
                    Err(d) => self.push_diag(d, &text),
                }
                return;
            }
            if p.at_word("TRIGGER") {
                p.pos += 1;
                match p.create_trigger(text.clone()) {
                    Ok(TriggerOutcome::Accepted(tr)) => self.triggers.push(tr),
                    Ok(TriggerOutcome::Skipped(pos, msg)) => self.push(Severity::Warning, pos, msg, &text),
                    Err(d) => self.push_diag(d, &text),
                }
                return;
            }
            let what = p.peek().map(Token::describe).unwrap_or_else(|| "nothing".into());
            self.push(
                Severity::Warning,
                first.into(),
                format!("unsupported CREATE {what} statement skipped"),
                &text,
            );
            return;
        }

        if SKIPPABLE_STATEMENTS.iter().any(|k| first.is_word(k)) {
            let word = first.ident().unwrap_or_default().to_uppercase();
            self.push(Severity::Warning, first.into(), format!("unsupported {word} statement skipped"), &text);
        } else {
            self.push(Severity::Error, first.into(), format!("unrecognized statement starting with {}", first.describe()), &text);
        }
    }

    fn push(&mut self, severity: Severity, pos: Pos, message: String, stmt: &str) {
        self.diags.push(ParseDiagnostic {
            severity,
            line: pos.line,
            column: pos.column,
            message,
            offending_statement: stmt.to_string(),
        });
    }

    fn push_diag(&mut self, (pos, message): (Pos, String), stmt: &str) {
        self.push(Severity::Error, pos, message, stmt);
    }

    fn finish(mut self) -> Result<ParsedSchema, Vec<ParseDiagnostic>> {
        let tables = std::mem::take(&mut self.tables);
        let triggers = std::mem::take(&mut self.triggers);

        let mut index: HashMap<String, usize> = HashMap::new();
        let mut kept: Vec<PendingTable> = Vec::new();
        for t in tables {
            if index.contains_key(&fold(&t.name.0)) {
                let msg = format!("duplicate table name `{}`", t.name.0);
                self.push(Severity::Error, t.name.1, msg, &t.excerpt);
                continue;
            }
            index.insert(fold(&t.name.0), kept.len());
            kept.push(t);
        }

        let mut defs = Vec::new();
        for t in &kept {
            if let Some(def) = self.validate_table(t, &index) {
                defs.push(def);
            }
        }

        let mut trigger_defs = Vec::new();
        let mut trigger_names = BTreeSet::new();
        for tr in &triggers {
            let mut ok = true;
            if !trigger_names.insert(fold(&tr.name.0)) {
                self.push(Severity::Error, tr.name.1, format!("duplicate trigger name `{}`", tr.name.0), &tr.excerpt);
                ok = false;
            }
            for (role, (name, pos)) in [("on", &tr.owner), ("targets", &tr.target)] {
                if !index.contains_key(&fold(name)) {
                    let msg = format!("trigger `{}` {role} unknown table `{name}`", tr.name.0);
                    self.push(Severity::Error, *pos, msg, &tr.excerpt);
                    ok = false;
                }
            }
            if fold(&tr.owner.0) == fold(&tr.target.0) {
                let msg = format!(
                    "trigger `{}` inserts into its own table `{}` and would fire itself",
                    tr.name.0, tr.owner.0
                );
                self.push(Severity::Error, tr.target.1, msg, &tr.excerpt);
                ok = false;
            }
            if ok {
                trigger_defs.push(TriggerDef {
                    name: tr.name.0.clone(),
                    owner_table: tr.owner.0.clone(),
                    kind: tr.kind,
                    target_table: tr.target.0.clone(),
                    timing: TriggerTiming::After,
                });
            }
        }

        if self.diags.iter().any(ParseDiagnostic::is_error) {
            self.diags.sort_by_key(|d| (d.line, d.column));
            return Err(self.diags);
        }

        let schema = match RelationalSchema::new(defs, trigger_defs) {
            Ok(s) => classify_tables(s),
            Err(e) => {
                self.push(Severity::Error, Pos { line: 1, column: 1 }, e.to_string(), "");
                return Err(self.diags);
            }
        };
        let mut schema = schema;
        let dropped = schema.retain_triggers(|tr, s| {
            [&tr.owner_table, &tr.target_table]
                .iter()
                .all(|t| s.table(t).is_some_and(|t| t.kind == TableKind::Entity))
        });
        for tr in dropped {
            if let Some(p) = triggers.iter().find(|p| p.name.0 == tr.name) {
                let msg = format!(
                    "trigger `{}` involves a pure join table; only triggers between entity tables are converted, trigger skipped",
                    tr.name
                );
                self.push(Severity::Warning, p.name.1, msg, &p.excerpt);
            }
        }

        self.diags.sort_by_key(|d| (d.line, d.column));
        Ok(ParsedSchema { schema, warnings: self.diags })
    }

    fn validate_table(&mut self, t: &PendingTable, index: &HashMap<String, usize>) -> Option<TableDef> {
        let before = self.error_count();
        let mut seen = BTreeSet::new();
        for (c, pos) in &t.columns {
            if !seen.insert(fold(&c.name)) {
                let msg = format!("duplicate column `{}` in table `{}`", c.name, t.name.0);
                self.push(Severity::Error, *pos, msg, &t.excerpt);
            }
        }
        let check = |ctx: &mut Self, (name, pos): &Name| {
            if !seen.contains(&fold(name)) {
                let msg = format!("unknown column `{name}` in table `{}`", t.name.0);
                ctx.push(Severity::Error, *pos, msg, &t.excerpt);
            }
        };
        for n in &t.primary_key {
            check(self, n);
        }
        for set in &t.uniques {
            for n in set {
                check(self, n);
            }
        }
        for fk in &t.foreign_keys {
            for n in &fk.columns {
                check(self, n);
            }
            if !index.contains_key(&fold(&fk.table.0)) {
                let msg = format!("foreign key of `{}` references unknown table `{}`", t.name.0, fk.table.0);
                self.push(Severity::Error, fk.table.1, msg, &t.excerpt);
            }
        }
        if self.error_count() > before {
            return None;
        }

        let set_of = |names: &[Name]| names.iter().map(|(n, _)| fold(n)).collect::<BTreeSet<_>>();
        let mut columns: Vec<ColumnDef> = t.columns.iter().map(|(c, _)| c.clone()).collect();
        let unique_sets: Vec<BTreeSet<String>> = t.uniques.iter().map(|u| set_of(u)).collect();
        for c in &mut columns {
            let single: BTreeSet<String> = [fold(&c.name)].into();
            if unique_sets.contains(&single) {
                c.is_unique = true;
            }
        }
        let mut unique_col_sets: Vec<BTreeSet<String>> =
            columns.iter().filter(|c| c.is_unique).map(|c| [fold(&c.name)].into()).collect();
        unique_col_sets.extend(unique_sets.iter().cloned());

        let foreign_keys: Vec<ForeignKeyDef> = t
            .foreign_keys
            .iter()
            .map(|fk| ForeignKeyDef {
                local_columns: fk.columns.iter().map(|(n, _)| n.clone()).collect(),
                referenced_table: fk.table.0.clone(),
                is_unique: unique_col_sets.contains(&set_of(&fk.columns)),
            })
            .collect();

        for (set, names) in unique_sets.iter().zip(&t.uniques) {
            let used_by_fk = t.foreign_keys.iter().any(|fk| &set_of(&fk.columns) == set);
            if set.len() > 1 && !used_by_fk {
                let cols: Vec<_> = names.iter().map(|(n, _)| n.as_str()).collect();
                let msg = format!(
                    "composite UNIQUE ({}) in `{}` has no per-column meaning and is not converted",
                    cols.join(", "),
                    t.name.0
                );
                self.push(Severity::Warning, names[0].1, msg, &t.excerpt);
            }
        }

        Some(TableDef {
            name: t.name.0.clone(),
            columns,
            primary_key: t.primary_key.iter().map(|(n, _)| n.clone()).collect(),
            foreign_keys,
            kind: TableKind::Entity,
        })
    }

    fn error_count(&self) -> usize {
        self.diags.iter().filter(|d| d.is_error()).count()
    }
}

enum TriggerOutcome {
    Accepted(PendingTrigger),
    Skipped(Pos, String),
}

type PResult<T> = Result<T, (Pos, String)>;
type PendingRefs = Vec<(Pos, String)>;

const COLUMN_OPTION_WORDS: &[&str] = &[
    "PRIMARY", "NOT", "NULL", "UNIQUE", "REFERENCES", "DEFAULT", "CONSTRAINT", "CHECK", "AUTO_INCREMENT",
    "AUTOINCREMENT", "IDENTITY", "COLLATE", "COMMENT", "GENERATED", "ON", "KEY",
];

const TYPE_SUFFIX_WORDS: &[&str] = &["PRECISION", "VARYING", "UNSIGNED", "ZEROFILL", "WITH", "WITHOUT", "TIME", "ZONE", "LOCAL"];

struct StmtParser<'a> {
    toks: &'a [Token],
    pos: usize,
    source: &'a str,
}

impl<'a> StmtParser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn at_word(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| t.is_word(kw))
    }

    fn at_punct(&self, c: char) -> bool {
        self.peek().is_some_and(|t| t.is_punct(c))
    }

    fn eat_word(&mut self, kw: &str) -> bool {
        let hit = self.at_word(kw);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn eat_punct(&mut self, c: char) -> bool {
        let hit = self.at_punct(c);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn here(&self) -> Pos {
        match self.peek() {
            Some(t) => t.into(),
            None => {
                let last = &self.toks[self.toks.len() - 1];
                let width = self.source[last.start..last.end].chars().count();
                Pos { line: last.line, column: last.column + width }
            }
        }
    }

    fn found(&self) -> String {
        self.peek().map(Token::describe).unwrap_or_else(|| "end of statement".into())
    }

    fn error_here(&self, expected: &str) -> (Pos, String) {
        (self.here(), format!("{expected}, found {}", self.found()))
    }

    fn expect_word(&mut self, kw: &str) -> PResult<()> {
        if self.eat_word(kw) {
            Ok(())
        } else {
            Err(self.error_here(&format!("expected {kw}")))
        }
    }

    fn expect_punct(&mut self, c: char) -> PResult<()> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            Err(self.error_here(&format!("expected `{c}`")))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Name> {
        match self.peek() {
            Some(t) if t.ident().is_some() => {
                self.pos += 1;
                Ok((t.ident().unwrap_or_default().to_string(), t.into()))
            }
            _ => Err(self.error_here(&format!("expected {what}"))),
        }
    }

    /// Possibly schema-qualified name; the last segment is kept.
    fn qualified_ident(&mut self, what: &str) -> PResult<Name> {
        let mut name = self.ident(what)?;
        while self.at_punct('.') {
            self.pos += 1;
            name = self.ident(what)?;
        }
        Ok(name)
    }

    fn ident_list(&mut self) -> PResult<Vec<Name>> {
        self.expect_punct('(')?;
        let mut names = Vec::new();
        loop {
            names.push(self.ident("column name")?);
            // Index prefix lengths and sort order are irrelevant here.
            if self.at_punct('(') {
                self.skip_group()?;
            }
            let _ = self.eat_word("ASC") || self.eat_word("DESC");
            if self.eat_punct(',') {
                continue;
            }
            self.expect_punct(')')?;
            return Ok(names);
        }
    }

    /// Consumes a balanced parenthesized group starting at `(`.
    fn skip_group(&mut self) -> PResult<()> {
        let open = self.here();
        self.expect_punct('(')?;
        let mut depth = 1;
        while let Some(t) = self.peek() {
            self.pos += 1;
            if t.is_punct('(') {
                depth += 1;
            } else if t.is_punct(')') {
                depth -= 1;
                if depth == 0 {
                    return Ok(());
                }
            }
        }
        Err((open, "unbalanced parentheses".into()))
    }

    /// Skips to the `,` or `)` that ends the current table element.
    fn skip_element(&mut self) -> PResult<()> {
        while let Some(t) = self.peek() {
            if t.is_punct(',') || t.is_punct(')') {
                return Ok(());
            }
            if t.is_punct('(') {
                self.skip_group()?;
            } else {
                self.pos += 1;
            }
        }
        Ok(())
    }

    fn text_between(&self, from: usize, to: usize) -> String {
        let mut out = String::new();
        for (i, t) in self.toks[from..to].iter().enumerate() {
            let piece = &self.source[t.start..t.end];
            let glue = i > 0 && !(t.is_punct('(') || t.is_punct(')') || t.is_punct(',')) && !self.toks[from + i - 1].is_punct('(') && !self.toks[from + i - 1].is_punct(',');
            if glue {
                out.push(' ');
            }
            if let TokenKind::Word(w) = &t.kind {
                out.push_str(&w.to_uppercase());
            } else {
                out.push_str(piece);
            }
        }
        out
    }

    /// The table plus its foreign-key targets still to resolve, each with
    /// the position of the REFERENCES clause.
    fn create_table(&mut self, excerpt: String) -> PResult<Option<(PendingTable, PendingRefs)>> {
        if self.eat_word("IF") {
            self.expect_word("NOT")?;
            self.expect_word("EXISTS")?;
        }
        let name = self.qualified_ident("table name")?;
        if self.at_word("AS") {
            return Ok(None);
        }
        self.expect_punct('(')?;

        let mut table = PendingTable {
            name,
            columns: Vec::new(),
            primary_key: Vec::new(),
            uniques: Vec::new(),
            foreign_keys: Vec::new(),
            excerpt,
        };
        let mut warnings = Vec::new();
        let mut pk_pos: Option<Pos> = None;

        loop {
            if self.eat_punct(')') {
                if table.columns.is_empty() {
                    return Err(self.error_here("table has no columns; expected a column definition"));
                }
                break;
            }
            let element_start = self.here();
            let constraint_named = self.eat_word("CONSTRAINT");
            if constraint_named {
                self.ident("constraint name")?;
            }

            if self.eat_word("PRIMARY") {
                self.expect_word("KEY")?;
                let cols = self.ident_list()?;
                if pk_pos.is_some() {
                    return Err((element_start, format!("multiple primary keys for table `{}`", table.name.0)));
                }
                pk_pos = Some(element_start);
                table.primary_key = cols;
                self.skip_element()?;
            } else if self.eat_word("UNIQUE") {
                let _ = self.eat_word("KEY") || self.eat_word("INDEX");
                if !self.at_punct('(') {
                    self.ident("index name")?;
                }
                let cols = self.ident_list()?;
                table.uniques.push(cols);
                self.skip_element()?;
            } else if self.eat_word("FOREIGN") {
                self.expect_word("KEY")?;
                if !self.at_punct('(') {
                    self.ident("constraint name")?;
                }
                let cols = self.ident_list()?;
                let target = self.references()?;
                table.foreign_keys.push(PendingFk { columns: cols, table: target });
                self.skip_element()?;
            } else if self.at_word("CHECK") || self.at_word("EXCLUDE") {
                warnings.push((element_start, "CHECK/EXCLUDE constraints are not modeled; skipped".into()));
                self.pos += 1;
                self.skip_element()?;
            } else if constraint_named {
                return Err(self.error_here("expected PRIMARY KEY, UNIQUE, FOREIGN KEY or CHECK after constraint name"));
            } else if (self.at_word("KEY") || self.at_word("INDEX") || self.at_word("FULLTEXT") || self.at_word("SPATIAL"))
                && self.toks.get(self.pos + 1).is_some_and(|t| t.ident().is_some() || t.is_punct('('))
            {
                warnings.push((element_start, "index definitions are not modeled; skipped".into()));
                self.pos += 1;
                self.skip_element()?;
            } else {
                self.column_def(&mut table, &mut pk_pos, &mut warnings)?;
            }

            if self.eat_punct(',') {
                if self.at_punct(')') {
                    return Err(self.error_here("expected a column or constraint definition"));
                }
                continue;
            }
            if !self.at_punct(')') {
                return Err(self.error_here("expected `,` or `)`"));
            }
        }
        // Trailing table options (ENGINE=..., WITHOUT ROWID, ...) are ignored.
        Ok(Some((table, warnings)))
    }

    fn references(&mut self) -> PResult<Name> {
        self.expect_word("REFERENCES")?;
        let target = self.qualified_ident("referenced table name")?;
        if self.at_punct('(') {
            self.ident_list()?;
        }
        loop {
            if self.eat_word("ON") {
                if !(self.eat_word("DELETE") || self.eat_word("UPDATE")) {
                    return Err(self.error_here("expected DELETE or UPDATE"));
                }
                if self.eat_word("SET") {
                    if !(self.eat_word("NULL") || self.eat_word("DEFAULT")) {
                        return Err(self.error_here("expected NULL or DEFAULT"));
                    }
                } else if self.eat_word("NO") {
                    self.expect_word("ACTION")?;
                } else if !(self.eat_word("CASCADE") || self.eat_word("RESTRICT")) {
                    return Err(self.error_here("expected a referential action"));
                }
            } else if self.eat_word("MATCH") {
                self.ident("match type")?;
            } else if self.eat_word("DEFERRABLE") {
                if self.eat_word("INITIALLY") {
                    self.ident("DEFERRED or IMMEDIATE")?;
                }
            } else if self.at_word("NOT") && self.toks.get(self.pos + 1).is_some_and(|t| t.is_word("DEFERRABLE")) {
                self.pos += 2;
            } else {
                return Ok(target);
            }
        }
    }

    fn column_def(
        &mut self,
        table: &mut PendingTable,
        pk_pos: &mut Option<Pos>,
        warnings: &mut Vec<(Pos, String)>,
    ) -> PResult<()> {
        let (name, name_pos) = self.ident("column name")?;
        let sql_type = self.sql_type()?;
        let mut column = ColumnDef::new(name.clone(), sql_type);

        loop {
            let opt_pos = self.here();
            match self.peek() {
                None => break,
                Some(t) if t.is_punct(',') || t.is_punct(')') => break,
                _ => {}
            }
            if self.eat_word("CONSTRAINT") {
                self.ident("constraint name")?;
            } else if self.eat_word("PRIMARY") {
                self.expect_word("KEY")?;
                let _ = self.eat_word("ASC") || self.eat_word("DESC");
                if pk_pos.is_some() {
                    return Err((opt_pos, format!("multiple primary keys for table `{}`", table.name.0)));
                }
                *pk_pos = Some(opt_pos);
                table.primary_key = vec![(name.clone(), name_pos)];
            } else if self.eat_word("NOT") {
                self.expect_word("NULL")?;
                column.is_not_null = true;
            } else if self.eat_word("NULL") {
            } else if self.eat_word("UNIQUE") {
                let _ = self.eat_word("KEY");
                column.is_unique = true;
            } else if self.at_word("REFERENCES") {
                let target = self.references()?;
                table.foreign_keys.push(PendingFk { columns: vec![(name.clone(), name_pos)], table: target });
            } else if self.eat_word("DEFAULT") {
                self.default_value()?;
            } else if self.eat_word("AUTO_INCREMENT") || self.eat_word("AUTOINCREMENT") {
            } else if self.eat_word("IDENTITY") {
                if self.at_punct('(') {
                    self.skip_group()?;
                }
            } else if self.eat_word("COLLATE") {
                self.ident("collation name")?;
            } else if self.eat_word("COMMENT") {
                match self.peek() {
                    Some(t) if matches!(t.kind, TokenKind::Str(_)) => self.pos += 1,
                    _ => return Err(self.error_here("expected comment string")),
                }
            } else if self.at_word("CHECK") || self.at_word("GENERATED") || self.at_word("ON") {
                warnings.push((opt_pos, format!("column option {} is not modeled; skipped", self.found())));
                self.skip_element()?;
            } else {
                return Err(self.error_here(&format!("unexpected column option in `{name}`")));
            }
        }
        table.columns.push((column, name_pos));
        Ok(())
    }

    fn sql_type(&mut self) -> PResult<String> {
        let start = self.pos;
        match self.peek() {
            Some(t) if matches!(t.kind, TokenKind::Word(_)) && !COLUMN_OPTION_WORDS.iter().any(|k| t.is_word(k)) => {
                self.pos += 1
            }
            // Typeless column (allowed by some engines).
            Some(t) if t.is_punct(',') || t.is_punct(')') || COLUMN_OPTION_WORDS.iter().any(|k| t.is_word(k)) => {
                return Ok(String::new())
            }
            _ => return Err(self.error_here("expected column type")),
        }
        loop {
            if self.at_punct('(') {
                self.skip_group()?;
            } else if self.at_punct('[') {
                self.pos += 1;
                self.expect_punct(']')?;
            } else if TYPE_SUFFIX_WORDS.iter().any(|k| self.at_word(k)) {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(self.text_between(start, self.pos))
    }

    fn default_value(&mut self) -> PResult<()> {
        let _ = self.eat_punct('-') || self.eat_punct('+');
        match self.peek() {
            Some(t) if t.is_punct('(') => self.skip_group()?,
            Some(t) if matches!(t.kind, TokenKind::Word(_)) => {
                self.pos += 1;
                if self.at_punct('(') {
                    self.skip_group()?;
                }
            }
            Some(t) if matches!(t.kind, TokenKind::Number(_) | TokenKind::Str(_)) => self.pos += 1,
            _ => return Err(self.error_here("expected default value")),
        }
        // Postgres-style casts, e.g. 'x'::text
        while self.at_punct(':') && self.toks.get(self.pos + 1).is_some_and(|t| t.is_punct(':')) {
            self.pos += 2;
            self.sql_type()?;
        }
        Ok(())
    }

    fn create_trigger(&mut self, excerpt: String) -> PResult<TriggerOutcome> {
        if self.eat_word("IF") {
            self.expect_word("NOT")?;
            self.expect_word("EXISTS")?;
        }
        let name = self.qualified_ident("trigger name")?;
        let timing_pos = self.here();
        let timing = if self.eat_word("AFTER") {
            "AFTER"
        } else if self.eat_word("BEFORE") {
            "BEFORE"
        } else if self.eat_word("INSTEAD") {
            self.expect_word("OF")?;
            "INSTEAD OF"
        } else {
            return Err(self.error_here("expected AFTER, BEFORE or INSTEAD OF"));
        };

        let kind_pos = self.here();
        let mut kinds = vec![self.trigger_event()?];
        while self.eat_word("OR") || self.eat_punct(',') {
            kinds.push(self.trigger_event()?);
        }
        self.expect_word("ON")?;
        let owner = self.qualified_ident("table name")?;

        if self.eat_word("REFERENCING") {
            while self.eat_word("OLD") || self.eat_word("NEW") {
                let _ = self.eat_word("ROW") || self.eat_word("TABLE");
                let _ = self.eat_word("AS");
                self.ident("transition name")?;
            }
        }
        let mut per_statement = false;
        if self.eat_word("FOR") {
            let _ = self.eat_word("EACH");
            if self.eat_word("STATEMENT") {
                per_statement = true;
            } else {
                self.expect_word("ROW")?;
            }
        }

        if timing != "AFTER" {
            return Ok(TriggerOutcome::Skipped(
                timing_pos,
                format!("{timing} trigger `{}` is not supported (only AFTER); trigger skipped", name.0),
            ));
        }
        if kinds.len() > 1 {
            return Ok(TriggerOutcome::Skipped(
                kind_pos,
                format!("trigger `{}` fires on several events; only single-event triggers are converted, trigger skipped", name.0),
            ));
        }
        if per_statement {
            return Ok(TriggerOutcome::Skipped(
                kind_pos,
                format!("statement-level trigger `{}` is not supported; trigger skipped", name.0),
            ));
        }

        let body_tok = match self.peek() {
            Some(t) => t,
            None => return Err(self.error_here("expected trigger body")),
        };
        let last = &self.toks[self.toks.len() - 1];
        let body = &self.source[body_tok.start..last.end];
        match parse_trigger_body(body) {
            Ok(target_name) => {
                let target_pos = self.toks[self.pos..]
                    .iter()
                    .find(|t| t.ident() == Some(target_name.as_str()))
                    .map(Pos::from)
                    .unwrap_or_else(|| body_tok.into());
                Ok(TriggerOutcome::Accepted(PendingTrigger {
                    name,
                    kind: kinds[0],
                    owner,
                    target: (target_name, target_pos),
                    excerpt,
                }))
            }
            Err(e) => Ok(TriggerOutcome::Skipped(body_tok.into(), format!("{e}; trigger `{}` skipped", name.0))),
        }
    }

    fn trigger_event(&mut self) -> PResult<TriggerKind> {
        if self.eat_word("INSERT") {
            Ok(TriggerKind::Insert)
        } else if self.eat_word("DELETE") {
            Ok(TriggerKind::Delete)
        } else if self.eat_word("UPDATE") {
            if self.eat_word("OF") {
                self.ident("column name")?;
                while self.eat_punct(',') {
                    self.ident("column name")?;
                }
            }
            Ok(TriggerKind::Update)
        } else {
            Err(self.error_here("expected INSERT, UPDATE or DELETE"))
        }
    }
}

fn excerpt(text: &str) -> String {
    const MAX: usize = 80;
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ");
    if collapsed.chars().count() > MAX {
        let cut: String = collapsed.chars().take(MAX - 3).collect();
        format!("{cut}...")
    } else {
        collapsed
    }
}

fn line_text(source: &str, line: usize) -> &str {
    source.lines().nth(line.saturating_sub(1)).unwrap_or("")
}
