//! Vertical partitioning: one (subject, object) table per predicate,
//! sorted by subject then object.

use std::collections::BTreeMap;

use crate::index::TriplePattern;
use crate::model::{encode_distinct, Dictionary, EncodedTriple, TermId, Triple};

use super::{local_name, EngineKind, Store, TableId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VpStore {
    dict: Dictionary,
    tables: BTreeMap<TermId, Vec<(TermId, TermId)>>,
}

impl VpStore {
    pub fn build(triples: &[Triple]) -> Self {
        let mut dict = Dictionary::new();
        let encoded = encode_distinct(&mut dict, triples);
        Self::from_parts(dict, &encoded)
    }

    pub fn from_parts(dict: Dictionary, triples: &[EncodedTriple]) -> Self {
        let mut tables: BTreeMap<TermId, Vec<(TermId, TermId)>> = BTreeMap::new();
        for t in triples {
            tables.entry(t.p).or_default().push((t.s, t.o));
        }
        for rows in tables.values_mut() {
            rows.sort_unstable();
            rows.dedup();
        }
        VpStore { dict, tables }
    }

    /// Number of predicate tables.
    pub fn predicate_count(&self) -> usize {
        self.tables.len()
    }

    pub fn table(&self, predicate: TermId) -> Option<&[(TermId, TermId)]> {
        self.tables.get(&predicate).map(Vec::as_slice)
    }

    fn scan_pairs(rows: &[(TermId, TermId)], s: Option<TermId>, o: Option<TermId>) -> &[(TermId, TermId)] {
        match s {
            Some(s) => {
                let lo = rows.partition_point(|r| r.0 < s);
                let hi = lo + rows[lo..].partition_point(|r| r.0 <= s);
                let run = &rows[lo..hi];
                match o {
                    Some(o) => {
                        let a = run.partition_point(|r| r.1 < o);
                        let b = a + run[a..].partition_point(|r| r.1 <= o);
                        &run[a..b]
                    }
                    None => run,
                }
            }
            None => rows,
        }
    }
}

impl Store for VpStore {
    fn kind(&self) -> EngineKind {
        EngineKind::Vp
    }

    fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    fn triple_count(&self) -> usize {
        self.tables.values().map(Vec::len).sum()
    }

    fn tables(&self) -> Vec<TableId> {
        self.tables.keys().map(|p| TableId(p.0)).collect()
    }

    fn table_label(&self, table: TableId) -> String {
        match self.dict.decode(TermId(table.0)) {
            Ok(term) => format!("vp:{}", local_name(term.lexical())),
            Err(_) => format!("vp:#{}", table.0),
        }
    }

    fn probe_tables(&self, pattern: &TriplePattern) -> Vec<TableId> {
        match pattern.p {
            Some(p) if self.tables.contains_key(&p) => vec![TableId(p.0)],
            Some(_) => Vec::new(),
            None => self.tables(),
        }
    }

    fn scan_table(&self, table: TableId, pattern: &TriplePattern) -> Vec<EncodedTriple> {
        let p = TermId(table.0);
        if pattern.p.is_some_and(|bound| bound != p) {
            return Vec::new();
        }
        let Some(rows) = self.tables.get(&p) else {
            return Vec::new();
        };
        Self::scan_pairs(rows, pattern.s, pattern.o)
            .iter()
            .filter(|(_, o)| pattern.o.is_none_or(|x| x == *o))
            .map(|&(s, o)| EncodedTriple::new(s, p, o))
            .collect()
    }

    fn count_table(&self, table: TableId, pattern: &TriplePattern) -> usize {
        let p = TermId(table.0);
        if pattern.p.is_some_and(|bound| bound != p) {
            return 0;
        }
        let Some(rows) = self.tables.get(&p) else {
            return 0;
        };
        let run = Self::scan_pairs(rows, pattern.s, pattern.o);
        match (pattern.s, pattern.o) {
            (None, Some(o)) => run.iter().filter(|r| r.1 == o).count(),
            _ => run.len(),
        }
    }

    fn access_path(&self, pattern: &TriplePattern) -> String {
        let cols = match (pattern.s.is_some(), pattern.o.is_some()) {
            (true, true) => "s+o",
            (true, false) => "s",
            (false, true) => "o-filter",
            (false, false) => "full",
        };
        match pattern.p {
            Some(_) => format!("VP[{cols}]"),
            None => format!("VP*[{cols}]"),
        }
    }
}
