//! Storage engines behind one pattern-matching interface.
//!
//! Each engine owns a [`Dictionary`] and some set of physical tables. The
//! planner and executor only see the [`Store`] trait, which exposes the
//! tables a pattern probes and per-table scans, so join accounting can be
//! done the same way for every layout.

use std::collections::BTreeSet;
use std::fmt;

use crate::index::TriplePattern;
use crate::model::{Dictionary, EncodedTriple, TermId};

pub mod rmtt;
pub mod single;
pub mod vp;

pub use rmtt::{BuildStats, Placement, Restrict, TwinTables};
pub use single::SingleStore;
pub use vp::VpStore;

/// Identifier of a physical table inside one store. For the single-table
/// engine it is always 0, for the twin tables 0 or 1, and for vertical
/// partitioning it is the predicate's term id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TableId(pub u32);

pub type TableSet = BTreeSet<TableId>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EngineKind {
    Single,
    Vp,
    Rmtt,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Single => "single",
            EngineKind::Vp => "vp",
            EngineKind::Rmtt => "rmtt",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "single" => Some(EngineKind::Single),
            "vp" => Some(EngineKind::Vp),
            "rmtt" => Some(EngineKind::Rmtt),
            _ => None,
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which physical tables a match touched.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AccessTrace {
    /// Tables probed, in probe order, including ones that yielded nothing.
    pub probed: Vec<TableId>,
    /// Source table of each returned row, parallel to the row list.
    pub row_tables: Vec<TableId>,
}

impl AccessTrace {
    pub fn touched(&self) -> TableSet {
        self.row_tables.iter().copied().collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchResult {
    pub rows: Vec<EncodedTriple>,
    pub trace: AccessTrace,
}

pub trait Store: Sync {
    fn kind(&self) -> EngineKind;

    fn dictionary(&self) -> &Dictionary;

    /// Distinct triples held.
    fn triple_count(&self) -> usize;

    /// Every physical table, ascending.
    fn tables(&self) -> Vec<TableId>;

    fn table_label(&self, table: TableId) -> String;

    /// Tables a scan of `pattern` has to probe, ascending.
    fn probe_tables(&self, pattern: &TriplePattern) -> Vec<TableId>;

    /// Matches of `pattern` inside one table.
    fn scan_table(&self, table: TableId, pattern: &TriplePattern) -> Vec<EncodedTriple>;

    fn count_table(&self, table: TableId, pattern: &TriplePattern) -> usize;

    /// Short description of the access path, for explain output.
    fn access_path(&self, pattern: &TriplePattern) -> String;

    /// Twin-aware probe set for a subject-object join: given a key matched
    /// at one join position in `source`, the tables that may hold it at the
    /// other. `None` when the layout gives no such guarantee.
    fn so_join_targets(&self, _source: TableId, _key: TermId) -> Option<TableSet> {
        None
    }

    /// All rows of a table in SPO order.
    fn table_rows(&self, table: TableId) -> Vec<EncodedTriple> {
        self.scan_table(table, &TriplePattern::any())
    }

    /// Total match count across probed tables.
    fn count(&self, pattern: &TriplePattern) -> usize {
        self.probe_tables(pattern)
            .into_iter()
            .map(|t| self.count_table(t, pattern))
            .sum()
    }

    /// Tables with at least one match.
    fn tables_with_matches(&self, pattern: &TriplePattern) -> TableSet {
        self.probe_tables(pattern)
            .into_iter()
            .filter(|&t| self.count_table(t, pattern) > 0)
            .collect()
    }

    fn match_pattern(&self, pattern: &TriplePattern) -> MatchResult {
        let mut out = MatchResult::default();
        for table in self.probe_tables(pattern) {
            out.trace.probed.push(table);
            let rows = self.scan_table(table, pattern);
            out.trace
                .row_tables
                .extend(std::iter::repeat_n(table, rows.len()));
            out.rows.extend(rows);
        }
        out
    }
}

/// Any of the three engines, as loaded from disk or built by the CLI.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum AnyStore {
    Single(SingleStore),
    Vp(VpStore),
    Rmtt(TwinTables),
}

impl AnyStore {
    pub fn build(kind: EngineKind, triples: &[crate::model::Triple]) -> Self {
        match kind {
            EngineKind::Single => AnyStore::Single(SingleStore::build(triples)),
            EngineKind::Vp => AnyStore::Vp(VpStore::build(triples)),
            EngineKind::Rmtt => AnyStore::Rmtt(TwinTables::build(triples)),
        }
    }

    pub fn as_store(&self) -> &dyn Store {
        match self {
            AnyStore::Single(s) => s,
            AnyStore::Vp(s) => s,
            AnyStore::Rmtt(s) => s,
        }
    }

    pub fn kind(&self) -> EngineKind {
        self.as_store().kind()
    }
}

/// Last path segment of an IRI, for compact labels.
pub(crate) fn local_name(iri: &str) -> &str {
    let cut = iri.rfind(['#', '/', ':']).map_or(0, |i| i + 1);
    if cut >= iri.len() {
        iri
    } else {
        &iri[cut..]
    }
}
