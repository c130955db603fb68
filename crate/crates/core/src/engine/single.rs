//! One triples table with all six permutation indexes.

use crate::index::{HexaIndex, PermOrder, TriplePattern};
use crate::model::{encode_distinct, Dictionary, EncodedTriple, Triple};

use super::{EngineKind, Store, TableId};

const TABLE: TableId = TableId(0);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingleStore {
    dict: Dictionary,
    index: HexaIndex,
}

impl SingleStore {
    pub fn build(triples: &[Triple]) -> Self {
        let mut dict = Dictionary::new();
        let encoded = encode_distinct(&mut dict, triples);
        Self::from_parts(dict, &encoded)
    }

    pub fn from_parts(dict: Dictionary, triples: &[EncodedTriple]) -> Self {
        SingleStore {
            dict,
            index: HexaIndex::build(triples),
        }
    }

    pub fn index(&self) -> &HexaIndex {
        &self.index
    }
}

impl Store for SingleStore {
    fn kind(&self) -> EngineKind {
        EngineKind::Single
    }

    fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    fn triple_count(&self) -> usize {
        self.index.len()
    }

    fn tables(&self) -> Vec<TableId> {
        vec![TABLE]
    }

    fn table_label(&self, _table: TableId) -> String {
        "T".to_string()
    }

    fn probe_tables(&self, _pattern: &TriplePattern) -> Vec<TableId> {
        vec![TABLE]
    }

    fn scan_table(&self, table: TableId, pattern: &TriplePattern) -> Vec<EncodedTriple> {
        if table != TABLE {
            return Vec::new();
        }
        self.index.scan(pattern).collect()
    }

    fn count_table(&self, table: TableId, pattern: &TriplePattern) -> usize {
        if table != TABLE {
            return 0;
        }
        self.index.count(pattern)
    }

    fn access_path(&self, pattern: &TriplePattern) -> String {
        PermOrder::best_for(pattern).name().to_string()
    }
}
