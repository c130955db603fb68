//! Recursive mapping of twin tables.
//!
//! The triple stream is split into two tables with the same (s, p, o)
//! schema. A build-time cursor names the twin that receives the next
//! triple. An incoming triple *conflicts* with a twin when its subject is
//! already an object there, or its object is already a subject there. On a
//! conflict the cursor flips once and the triple goes to the other twin,
//! even when it conflicts there as well; that last case is a *fallback*.
//!
//! Each twin tracks its subject set, object set and their intersection, the
//! overlap. A term outside `overlap[i]` never occurs both as subject and as
//! object inside twin `i`, so a subject-object join whose key was matched in
//! twin `i` only has to probe the other twin. [`TwinTables::so_join_targets`]
//! exposes that probe set.

use std::collections::HashSet;

use crate::index::{HexaIndex, PermOrder, TriplePattern};
use crate::model::{encode_distinct, Dictionary, EncodedTriple, TermId, Triple};

use super::{EngineKind, MatchResult, Store, TableId, TableSet};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildStats {
    /// Cursor flips.
    pub switch_count: u64,
    /// Triples inserted although they conflicted in both twins.
    pub fallback_count: u64,
    /// Triples with subject == object.
    pub reflexive_count: u64,
    pub triples_per_twin: [u64; 2],
}

/// Where one triple went during the build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub twin: usize,
    pub switched: bool,
    pub fallback: bool,
}

/// Which twins a match may read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Restrict {
    #[default]
    Both,
    Twin(usize),
}

#[derive(Debug, Clone, Default)]
struct Membership {
    sub: HashSet<TermId>,
    obj: HashSet<TermId>,
    overlap: HashSet<TermId>,
}

impl Membership {
    fn conflicts(&self, t: &EncodedTriple) -> bool {
        self.obj.contains(&t.s) || self.sub.contains(&t.o)
    }

    fn add(&mut self, t: &EncodedTriple) {
        self.sub.insert(t.s);
        self.obj.insert(t.o);
        if self.obj.contains(&t.s) {
            self.overlap.insert(t.s);
        }
        if self.sub.contains(&t.o) {
            self.overlap.insert(t.o);
        }
    }

    fn from_rows(rows: &[EncodedTriple]) -> Self {
        let sub: HashSet<TermId> = rows.iter().map(|t| t.s).collect();
        let obj: HashSet<TermId> = rows.iter().map(|t| t.o).collect();
        let overlap = sub.intersection(&obj).copied().collect();
        Membership { sub, obj, overlap }
    }
}

/// Incremental partitioner. Feed distinct triples in stream order.
#[derive(Debug, Clone, Default)]
pub struct TwinBuilder {
    rows: [Vec<EncodedTriple>; 2],
    members: [Membership; 2],
    current: usize,
    stats: BuildStats,
}

impl TwinBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn current(&self) -> usize {
        self.current
    }

    /// True when `t`'s subject is a prior object of twin `i`, or its object
    /// a prior subject.
    pub fn conflict(&self, i: usize, t: &EncodedTriple) -> bool {
        self.members[i].conflicts(t)
    }

    /// Places one triple. The caller guarantees `t` is not already stored.
    pub fn partition_insert(&mut self, t: EncodedTriple) -> Placement {
        let mut c = self.current;
        let mut switched = false;
        if self.conflict(c, &t) {
            c = 1 - c;
            self.current = c;
            switched = true;
            self.stats.switch_count += 1;
        }
        let fallback = switched && self.conflict(c, &t);
        if fallback {
            self.stats.fallback_count += 1;
        }
        if t.s == t.o {
            self.stats.reflexive_count += 1;
        }
        self.members[c].add(&t);
        self.rows[c].push(t);
        self.stats.triples_per_twin[c] += 1;
        Placement {
            twin: c,
            switched,
            fallback,
        }
    }

    /// Rows of twin `i` in insertion order.
    pub fn rows(&self, i: usize) -> &[EncodedTriple] {
        &self.rows[i]
    }

    pub fn stats(&self) -> &BuildStats {
        &self.stats
    }

    pub fn finish(self, dict: Dictionary) -> TwinTables {
        let [r0, r1] = &self.rows;
        let (i0, i1) = crate::par::join(|| HexaIndex::build(r0), || HexaIndex::build(r1));
        TwinTables {
            dict,
            twins: [i0, i1],
            members: self.members,
            current: self.current,
            stats: self.stats,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TwinTables {
    dict: Dictionary,
    twins: [HexaIndex; 2],
    members: [Membership; 2],
    current: usize,
    stats: BuildStats,
}

impl TwinTables {
    pub fn build(triples: &[Triple]) -> Self {
        Self::build_traced(triples).0
    }

    /// Build plus the placement of every distinct triple, in stream order.
    pub fn build_traced(triples: &[Triple]) -> (Self, Vec<Placement>) {
        let mut dict = Dictionary::new();
        let encoded = encode_distinct(&mut dict, triples);
        let mut builder = TwinBuilder::new();
        let placements = encoded.iter().map(|&t| builder.partition_insert(t)).collect();
        (builder.finish(dict), placements)
    }

    /// Reassembles a store from persisted twin contents. Membership sets are
    /// recomputed from the rows.
    pub fn from_parts(
        dict: Dictionary,
        twin_rows: [Vec<EncodedTriple>; 2],
        current: usize,
        stats: BuildStats,
    ) -> Self {
        let members = [
            Membership::from_rows(&twin_rows[0]),
            Membership::from_rows(&twin_rows[1]),
        ];
        TwinTables {
            dict,
            twins: [HexaIndex::build(&twin_rows[0]), HexaIndex::build(&twin_rows[1])],
            members,
            current,
            stats,
        }
    }

    pub fn twin(&self, i: usize) -> &HexaIndex {
        &self.twins[i]
    }

    pub fn sub_set(&self, i: usize) -> &HashSet<TermId> {
        &self.members[i].sub
    }

    pub fn obj_set(&self, i: usize) -> &HashSet<TermId> {
        &self.members[i].obj
    }

    pub fn overlap(&self, i: usize) -> &HashSet<TermId> {
        &self.members[i].overlap
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn stats(&self) -> &BuildStats {
        &self.stats
    }

    /// `|sub_set[i] ∩ obj_set[1-i]| / |sub_set[i]|`, 0 for an empty twin.
    pub fn containment_ratio(&self, i: usize) -> f64 {
        let sub = &self.members[i].sub;
        if sub.is_empty() {
            return 0.0;
        }
        let other = &self.members[1 - i].obj;
        sub.iter().filter(|t| other.contains(t)).count() as f64 / sub.len() as f64
    }

    pub fn conflict(&self, i: usize, t: &EncodedTriple) -> bool {
        self.members[i].conflicts(t)
    }

    pub fn match_restricted(&self, pattern: &TriplePattern, restrict: Restrict) -> MatchResult {
        let twins: &[usize] = match restrict {
            Restrict::Both => &[0, 1],
            Restrict::Twin(0) => &[0],
            Restrict::Twin(_) => &[1],
        };
        let mut out = MatchResult::default();
        for &i in twins {
            out.trace.probed.push(TableId(i as u32));
            let before = out.rows.len();
            out.rows.extend(self.twins[i].scan(pattern));
            let n = out.rows.len() - before;
            out.trace
                .row_tables
                .extend(std::iter::repeat_n(TableId(i as u32), n));
        }
        out
    }

    /// Twins to probe for the other side of a subject-object join whose key
    /// was matched in `source_twin`: the other twin, plus `source_twin`
    /// itself only if the key is in its overlap set.
    pub fn so_join_targets(&self, source_twin: usize, key: TermId) -> TableSet {
        let mut out = TableSet::new();
        out.insert(TableId(1 - source_twin as u32));
        if self.members[source_twin].overlap.contains(&key) {
            out.insert(TableId(source_twin as u32));
        }
        out
    }
}

impl PartialEq for TwinTables {
    fn eq(&self, other: &Self) -> bool {
        self.dict == other.dict
            && self.twins == other.twins
            && self.current == other.current
            && self.stats == other.stats
            && (0..2).all(|i| {
                self.members[i].sub == other.members[i].sub
                    && self.members[i].obj == other.members[i].obj
                    && self.members[i].overlap == other.members[i].overlap
            })
    }
}

impl Store for TwinTables {
    fn kind(&self) -> EngineKind {
        EngineKind::Rmtt
    }

    fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    fn triple_count(&self) -> usize {
        self.twins[0].len() + self.twins[1].len()
    }

    fn tables(&self) -> Vec<TableId> {
        vec![TableId(0), TableId(1)]
    }

    fn table_label(&self, table: TableId) -> String {
        format!("twin{}", table.0)
    }

    fn probe_tables(&self, _pattern: &TriplePattern) -> Vec<TableId> {
        vec![TableId(0), TableId(1)]
    }

    fn scan_table(&self, table: TableId, pattern: &TriplePattern) -> Vec<EncodedTriple> {
        match self.twins.get(table.0 as usize) {
            Some(twin) => twin.scan(pattern).collect(),
            None => Vec::new(),
        }
    }

    fn count_table(&self, table: TableId, pattern: &TriplePattern) -> usize {
        self.twins.get(table.0 as usize).map_or(0, |t| t.count(pattern))
    }

    fn access_path(&self, pattern: &TriplePattern) -> String {
        PermOrder::best_for(pattern).name().to_string()
    }

    fn so_join_targets(&self, source: TableId, key: TermId) -> Option<TableSet> {
        Some(TwinTables::so_join_targets(self, source.0 as usize, key))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: u32, p: u32, o: u32) -> EncodedTriple {
        EncodedTriple::new(TermId(s), TermId(p), TermId(o))
    }

    #[test]
    fn empty_twin_never_conflicts() {
        let b = TwinBuilder::new();
        assert!(!b.conflict(0, &t(1, 2, 3)));
        assert!(!b.conflict(1, &t(1, 2, 3)));
    }

    #[test]
    fn object_then_subject_conflicts() {
        let mut b = TwinBuilder::new();
        // (x, p, y) then (z, q, x): object x is a prior subject
        b.partition_insert(t(0, 1, 2));
        assert!(b.conflict(0, &t(3, 4, 0)));
        // (y, q, w): subject y is a prior object
        assert!(b.conflict(0, &t(2, 4, 5)));
        assert!(!b.conflict(0, &t(0, 4, 5)));
    }

    #[test]
    fn reflexive_triple_enters_overlap() {
        let mut b = TwinBuilder::new();
        let p = b.partition_insert(t(7, 1, 7));
        assert_eq!(p, Placement { twin: 0, switched: false, fallback: false });
        let tables = b.finish(Dictionary::new());
        assert_eq!(tables.overlap(0).iter().copied().collect::<Vec<_>>(), vec![TermId(7)]);
        assert_eq!(tables.stats().reflexive_count, 1);
    }

    #[test]
    fn three_cycle_forces_fallback() {
        // x=0 y=1 z=2; p,q,r = 10,11,12
        let mut b = TwinBuilder::new();
        let a = b.partition_insert(t(0, 10, 1));
        let c = b.partition_insert(t(1, 11, 2));
        let d = b.partition_insert(t(2, 12, 0));
        assert_eq!(a, Placement { twin: 0, switched: false, fallback: false });
        assert_eq!(c, Placement { twin: 1, switched: true, fallback: false });
        assert_eq!(d, Placement { twin: 0, switched: true, fallback: true });
        let tables = b.finish(Dictionary::new());
        assert_eq!(tables.overlap(0).iter().copied().collect::<Vec<_>>(), vec![TermId(0)]);
        assert!(tables.overlap(1).is_empty());
        assert_eq!(tables.stats().fallback_count, 1);
        assert_eq!(tables.stats().switch_count, 2);
    }

    #[test]
    fn join_targets_follow_overlap() {
        let mut b = TwinBuilder::new();
        b.partition_insert(t(0, 10, 1));
        b.partition_insert(t(1, 11, 2));
        b.partition_insert(t(2, 12, 0));
        let tables = b.finish(Dictionary::new());
        let only_other: TableSet = [TableId(1)].into();
        let both: TableSet = [TableId(0), TableId(1)].into();
        assert_eq!(tables.so_join_targets(0, TermId(1)), only_other);
        assert_eq!(tables.so_join_targets(0, TermId(0)), both);
    }

    #[test]
    fn empty_build_has_zero_counters() {
        let tables = TwinTables::build(&[]);
        assert_eq!(tables.stats(), &BuildStats::default());
        assert!(tables.twin(0).is_empty() && tables.twin(1).is_empty());
        assert_eq!(tables.containment_ratio(0), 0.0);
    }
}
