//! Relational schema model and the entity/relational table classification.
//! The accessors here are the projections the graph builder reads.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TableKind {
    /// Carries data; becomes a class.
    Entity,
    /// Pure many-to-many join table; becomes a pair of inverse properties.
    Relational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnDef {
    pub name: String,
    pub sql_type: String,
    pub is_not_null: bool,
    pub is_unique: bool,
}

impl ColumnDef {
    pub fn new(name: impl Into<String>, sql_type: impl Into<String>) -> Self {
        ColumnDef {
            name: name.into(),
            sql_type: sql_type.into(),
            is_not_null: false,
            is_unique: false,
        }
    }

    pub fn not_null(mut self) -> Self {
        self.is_not_null = true;
        self
    }

    pub fn unique(mut self) -> Self {
        self.is_unique = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ForeignKeyDef {
    pub local_columns: Vec<String>,
    pub referenced_table: String,
    pub is_unique: bool,
}

impl ForeignKeyDef {
    pub fn new<I, S>(local_columns: I, referenced_table: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ForeignKeyDef {
            local_columns: local_columns.into_iter().map(Into::into).collect(),
            referenced_table: referenced_table.into(),
            is_unique: false,
        }
    }

    pub fn unique(mut self) -> Self {
        self.is_unique = true;
        self
    }

    fn column_set(&self) -> BTreeSet<String> {
        self.local_columns.iter().map(|c| fold(c)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableDef {
    pub name: String,
    pub columns: Vec<ColumnDef>,
    /// Ordered, duplicate-free primary key column names.
    pub primary_key: Vec<String>,
    pub foreign_keys: Vec<ForeignKeyDef>,
    pub kind: TableKind,
}

impl TableDef {
    pub fn new(name: impl Into<String>) -> Self {
        TableDef {
            name: name.into(),
            columns: Vec::new(),
            primary_key: Vec::new(),
            foreign_keys: Vec::new(),
            kind: TableKind::Entity,
        }
    }

    pub fn column(mut self, column: ColumnDef) -> Self {
        self.columns.push(column);
        self
    }

    pub fn primary_key<I, S>(mut self, columns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.primary_key = columns.into_iter().map(Into::into).collect();
        self
    }

    pub fn foreign_key(mut self, fk: ForeignKeyDef) -> Self {
        self.foreign_keys.push(fk);
        self
    }

    pub fn find_column(&self, name: &str) -> Option<&ColumnDef> {
        let key = fold(name);
        self.columns.iter().find(|c| fold(&c.name) == key)
    }

    pub fn is_primary_key_column(&self, name: &str) -> bool {
        let key = fold(name);
        self.primary_key.iter().any(|c| fold(c) == key)
    }

    pub fn is_foreign_key_column(&self, name: &str) -> bool {
        let key = fold(name);
        self.foreign_keys
            .iter()
            .any(|fk| fk.local_columns.iter().any(|c| fold(c) == key))
    }

    /// Primary key columns, possibly empty.
    pub fn pkey(&self) -> &[String] {
        &self.primary_key
    }

    pub fn fkeys(&self) -> &[ForeignKeyDef] {
        &self.foreign_keys
    }

    /// Columns that belong neither to the primary key nor to any foreign key.
    pub fn data_columns(&self) -> Vec<&ColumnDef> {
        self.columns
            .iter()
            .filter(|c| !self.is_primary_key_column(&c.name) && !self.is_foreign_key_column(&c.name))
            .collect()
    }

    pub fn unique_columns(&self) -> Vec<&ColumnDef> {
        self.columns.iter().filter(|c| c.is_unique).collect()
    }

    pub fn notnull_columns(&self) -> Vec<&ColumnDef> {
        self.columns.iter().filter(|c| c.is_not_null).collect()
    }

    /// True when the foreign key's columns are exactly the primary key.
    pub fn is_primary_key_fk(&self, fk: &ForeignKeyDef) -> bool {
        !self.primary_key.is_empty() && fk.column_set() == self.pk_set()
    }

    fn pk_set(&self) -> BTreeSet<String> {
        self.primary_key.iter().map(|c| fold(c)).collect()
    }

    fn is_relational_shape(&self) -> bool {
        if self.foreign_keys.len() != 2 {
            return false;
        }
        let fk_union: BTreeSet<String> = self
            .foreign_keys
            .iter()
            .flat_map(ForeignKeyDef::column_set)
            .collect();
        let all_columns: BTreeSet<String> = self.columns.iter().map(|c| fold(&c.name)).collect();
        let pk = self.pk_set();
        !pk.is_empty() && pk == fk_union && all_columns == pk
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TriggerKind {
    Insert,
    Update,
    Delete,
}

impl TriggerKind {
    pub const ALL: [TriggerKind; 3] = [TriggerKind::Insert, TriggerKind::Update, TriggerKind::Delete];

    /// Lowercase tag used on graph event nodes.
    pub fn tag(self) -> &'static str {
        match self {
            TriggerKind::Insert => "insert",
            TriggerKind::Update => "update",
            TriggerKind::Delete => "delete",
        }
    }

    /// Capitalized name of the matching event subclass.
    pub fn class_name(self) -> &'static str {
        match self {
            TriggerKind::Insert => "Insert",
            TriggerKind::Update => "Update",
            TriggerKind::Delete => "Delete",
        }
    }
}

impl fmt::Display for TriggerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.class_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TriggerTiming {
    After,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TriggerDef {
    pub name: String,
    pub owner_table: String,
    pub kind: TriggerKind,
    pub target_table: String,
    pub timing: TriggerTiming,
}

impl TriggerDef {
    pub fn after(
        name: impl Into<String>,
        kind: TriggerKind,
        owner_table: impl Into<String>,
        target_table: impl Into<String>,
    ) -> Self {
        TriggerDef {
            name: name.into(),
            owner_table: owner_table.into(),
            kind,
            target_table: target_table.into(),
            timing: TriggerTiming::After,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("duplicate table name `{0}`")]
    DuplicateTable(String),
    #[error("duplicate column `{column}` in table `{table}`")]
    DuplicateColumn { table: String, column: String },
    #[error("table `{table}` references unknown column `{column}`")]
    UnknownColumn { table: String, column: String },
    #[error("table `{table}` has a foreign key to unknown table `{referenced}`")]
    UnresolvedReference { table: String, referenced: String },
    #[error("trigger `{trigger}` refers to unknown table `{table}`")]
    UnknownTriggerTable { trigger: String, table: String },
    #[error("duplicate trigger name `{0}`")]
    DuplicateTrigger(String),
}

/// A validated set of tables and triggers.
///
/// Identifiers resolve case-insensitively. Construction canonicalizes every
/// cross-reference (key columns, referenced tables, trigger tables) to the
/// spelling used where the object was declared.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct RelationalSchema {
    tables: Vec<TableDef>,
    triggers: Vec<TriggerDef>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl RelationalSchema {
    pub fn new(mut tables: Vec<TableDef>, mut triggers: Vec<TriggerDef>) -> Result<Self, SchemaError> {
        let mut index = HashMap::new();
        for (i, t) in tables.iter().enumerate() {
            if index.insert(fold(&t.name), i).is_some() {
                return Err(SchemaError::DuplicateTable(t.name.clone()));
            }
        }
        let names: Vec<String> = tables.iter().map(|t| t.name.clone()).collect();
        let canonical_table = |name: &str| index.get(&fold(name)).map(|&i| names[i].clone());

        for table in &mut tables {
            let mut seen = BTreeSet::new();
            for c in &table.columns {
                if !seen.insert(fold(&c.name)) {
                    return Err(SchemaError::DuplicateColumn {
                        table: table.name.clone(),
                        column: c.name.clone(),
                    });
                }
            }
            let mut pk = Vec::new();
            for col in &table.primary_key {
                let canon = canonical_column(table, col)?;
                if !pk.contains(&canon) {
                    pk.push(canon);
                }
            }
            table.primary_key = pk;
            // A primary key column can never hold NULL.
            for c in &mut table.columns {
                if table.primary_key.contains(&c.name) {
                    c.is_not_null = true;
                }
            }
            let mut fks = std::mem::take(&mut table.foreign_keys);
            for fk in &mut fks {
                fk.local_columns = fk
                    .local_columns
                    .iter()
                    .map(|c| canonical_column(table, c))
                    .collect::<Result<_, _>>()?;
                fk.referenced_table = canonical_table(&fk.referenced_table).ok_or_else(|| {
                    SchemaError::UnresolvedReference {
                        table: table.name.clone(),
                        referenced: fk.referenced_table.clone(),
                    }
                })?;
            }
            table.foreign_keys = fks;
        }

        let mut trigger_names = BTreeSet::new();
        for tr in &mut triggers {
            if !trigger_names.insert(fold(&tr.name)) {
                return Err(SchemaError::DuplicateTrigger(tr.name.clone()));
            }
            for slot in [&mut tr.owner_table, &mut tr.target_table] {
                *slot = canonical_table(slot).ok_or_else(|| SchemaError::UnknownTriggerTable {
                    trigger: tr.name.clone(),
                    table: slot.clone(),
                })?;
            }
        }

        Ok(RelationalSchema { tables, triggers, index })
    }

    pub fn tables(&self) -> &[TableDef] {
        &self.tables
    }

    pub fn triggers(&self) -> &[TriggerDef] {
        &self.triggers
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty() && self.triggers.is_empty()
    }

    /// Case-insensitive table lookup.
    pub fn table(&self, name: &str) -> Option<&TableDef> {
        self.index.get(&fold(name)).map(|&i| &self.tables[i])
    }

    /// Resolves the table a foreign key points at.
    pub fn ref_table(&self, fk: &ForeignKeyDef) -> Result<&TableDef, SchemaError> {
        self.table(&fk.referenced_table).ok_or_else(|| SchemaError::UnresolvedReference {
            table: String::new(),
            referenced: fk.referenced_table.clone(),
        })
    }

    pub fn triggers_of(&self, table: &TableDef) -> Vec<&TriggerDef> {
        let key = fold(&table.name);
        self.triggers.iter().filter(|t| fold(&t.owner_table) == key).collect()
    }

    pub fn entity_tables(&self) -> impl Iterator<Item = &TableDef> {
        self.tables.iter().filter(|t| t.kind == TableKind::Entity)
    }

    pub fn relational_tables(&self) -> impl Iterator<Item = &TableDef> {
        self.tables.iter().filter(|t| t.kind == TableKind::Relational)
    }

    /// Drops triggers rejected by `keep`, returning the removed ones.
    pub(crate) fn retain_triggers(&mut self, mut keep: impl FnMut(&TriggerDef, &Self) -> bool) -> Vec<TriggerDef> {
        let triggers = std::mem::take(&mut self.triggers);
        let (kept, dropped): (Vec<_>, Vec<_>) = triggers.into_iter().partition(|t| keep(t, self));
        self.triggers = kept;
        dropped
    }
}

/// Assigns every table its kind. A table is relational when it has exactly
/// two foreign keys, its primary key is exactly their column union, and it
/// has no other columns; everything else is an entity table.
pub fn classify_tables(mut schema: RelationalSchema) -> RelationalSchema {
    for table in &mut schema.tables {
        table.kind = if table.is_relational_shape() {
            TableKind::Relational
        } else {
            TableKind::Entity
        };
    }
    schema
}

fn canonical_column(table: &TableDef, name: &str) -> Result<String, SchemaError> {
    table
        .find_column(name)
        .map(|c| c.name.clone())
        .ok_or_else(|| SchemaError::UnknownColumn {
            table: table.name.clone(),
            column: name.to_string(),
        })
}

/// Case-folding key for identifier comparison.
pub(crate) fn fold(name: &str) -> String {
    name.to_lowercase()
}
