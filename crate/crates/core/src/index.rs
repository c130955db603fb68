//! Sorted permutation indexes over encoded triples.
//!
//! An [`OrderedTripleIndex`] keeps the triple set as a dense array sorted
//! under one of the six component orders. A pattern whose bound positions
//! form a prefix of that order maps to one contiguous range, located with
//! two binary searches.

use std::fmt;

use thiserror::Error;

use crate::model::{EncodedTriple, TermId};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PermOrder {
    Spo,
    Sop,
    Pso,
    Pos,
    Osp,
    Ops,
}

impl PermOrder {
    pub const ALL: [PermOrder; 6] = [
        PermOrder::Spo,
        PermOrder::Sop,
        PermOrder::Pso,
        PermOrder::Pos,
        PermOrder::Osp,
        PermOrder::Ops,
    ];

    /// Triple positions (0 = s, 1 = p, 2 = o) in key order.
    pub const fn positions(self) -> [usize; 3] {
        match self {
            PermOrder::Spo => [0, 1, 2],
            PermOrder::Sop => [0, 2, 1],
            PermOrder::Pso => [1, 0, 2],
            PermOrder::Pos => [1, 2, 0],
            PermOrder::Osp => [2, 0, 1],
            PermOrder::Ops => [2, 1, 0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PermOrder::Spo => "SPO",
            PermOrder::Sop => "SOP",
            PermOrder::Pso => "PSO",
            PermOrder::Pos => "POS",
            PermOrder::Osp => "OSP",
            PermOrder::Ops => "OPS",
        }
    }

    fn key(self, t: &EncodedTriple) -> [TermId; 3] {
        let pos = self.positions();
        [t.get(pos[0]), t.get(pos[1]), t.get(pos[2])]
    }

    fn unkey(self, k: &[TermId; 3]) -> EncodedTriple {
        let pos = self.positions();
        let mut a = [TermId(0); 3];
        for (slot, &p) in pos.iter().enumerate() {
            a[p] = k[slot];
        }
        EncodedTriple::from_array(a)
    }

    /// Length of the bound prefix if the pattern's bound positions are a
    /// prefix of this order, `None` otherwise.
    pub fn bound_prefix(self, pattern: &TriplePattern) -> Option<usize> {
        let bound = pattern.bound_count();
        let pos = self.positions();
        pos[..bound]
            .iter()
            .all(|&p| pattern.get(p).is_some())
            .then_some(bound)
    }

    /// First order (in declaration order) compatible with the pattern.
    /// Every compatible order has the same bound prefix length, so this is
    /// the longest-prefix choice with enum-order tie breaking.
    pub fn best_for(pattern: &TriplePattern) -> PermOrder {
        PermOrder::ALL
            .into_iter()
            .find(|o| o.bound_prefix(pattern).is_some())
            .expect("some order is compatible with every pattern")
    }
}

impl fmt::Display for PermOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A triple pattern over ids; `None` is an unbound position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TriplePattern {
    pub s: Option<TermId>,
    pub p: Option<TermId>,
    pub o: Option<TermId>,
}

impl TriplePattern {
    pub fn new(s: Option<TermId>, p: Option<TermId>, o: Option<TermId>) -> Self {
        TriplePattern { s, p, o }
    }

    pub fn any() -> Self {
        Self::default()
    }

    pub fn get(&self, pos: usize) -> Option<TermId> {
        match pos {
            0 => self.s,
            1 => self.p,
            2 => self.o,
            _ => None,
        }
    }

    pub fn bound_count(&self) -> usize {
        [self.s, self.p, self.o].iter().filter(|x| x.is_some()).count()
    }

    pub fn matches(&self, t: &EncodedTriple) -> bool {
        self.s.is_none_or(|s| s == t.s)
            && self.p.is_none_or(|p| p == t.p)
            && self.o.is_none_or(|o| o == t.o)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("bound positions of the pattern are not a prefix of {order}")]
pub struct IncompatibleOrder {
    pub order: PermOrder,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedTripleIndex {
    order: PermOrder,
    rows: Vec<[TermId; 3]>,
}

impl OrderedTripleIndex {
    /// Sorted, deduplicated index; input order does not matter.
    pub fn build(triples: &[EncodedTriple], order: PermOrder) -> Self {
        let mut rows: Vec<[TermId; 3]> = triples.iter().map(|t| order.key(t)).collect();
        par::sort_unstable(&mut rows);
        rows.dedup();
        OrderedTripleIndex { order, rows }
    }

    pub fn order(&self) -> PermOrder {
        self.order
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// All rows in index order.
    pub fn iter(&self) -> impl Iterator<Item = EncodedTriple> + '_ {
        self.rows.iter().map(move |k| self.order.unkey(k))
    }

    fn bounds(&self, pattern: &TriplePattern) -> Result<(usize, usize), IncompatibleOrder> {
        let m = self
            .order
            .bound_prefix(pattern)
            .ok_or(IncompatibleOrder { order: self.order })?;
        let pos = self.order.positions();
        let prefix: Vec<TermId> = pos[..m].iter().map(|&p| pattern.get(p).unwrap()).collect();
        let lo = self.rows.partition_point(|r| r[..m] < prefix[..]);
        let hi = lo + self.rows[lo..].partition_point(|r| r[..m] <= prefix[..]);
        Ok((lo, hi))
    }

    pub fn range_scan(
        &self,
        pattern: &TriplePattern,
    ) -> Result<impl Iterator<Item = EncodedTriple> + '_, IncompatibleOrder> {
        let (lo, hi) = self.bounds(pattern)?;
        Ok(self.rows[lo..hi].iter().map(move |k| self.order.unkey(k)))
    }

    /// Exact number of matches, from the range bounds.
    pub fn estimate(&self, pattern: &TriplePattern) -> Result<usize, IncompatibleOrder> {
        let (lo, hi) = self.bounds(pattern)?;
        Ok(hi - lo)
    }
}

/// The six permutation indexes of one triple table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HexaIndex {
    indexes: Vec<OrderedTripleIndex>,
}

impl HexaIndex {
    pub fn build(triples: &[EncodedTriple]) -> Self {
        let indexes = par::map_collect(&PermOrder::ALL, |&o| OrderedTripleIndex::build(triples, o));
        HexaIndex { indexes }
    }

    pub fn get(&self, order: PermOrder) -> &OrderedTripleIndex {
        &self.indexes[order as usize]
    }

    pub fn len(&self) -> usize {
        self.indexes[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn best(&self, pattern: &TriplePattern) -> &OrderedTripleIndex {
        self.get(PermOrder::best_for(pattern))
    }

    pub fn scan(&self, pattern: &TriplePattern) -> impl Iterator<Item = EncodedTriple> + '_ {
        self.best(pattern)
            .range_scan(pattern)
            .expect("best order is compatible")
    }

    pub fn count(&self, pattern: &TriplePattern) -> usize {
        self.best(pattern)
            .estimate(pattern)
            .expect("best order is compatible")
    }

    /// Rows in SPO order.
    pub fn triples(&self) -> impl Iterator<Item = EncodedTriple> + '_ {
        self.get(PermOrder::Spo).iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: u32, p: u32, o: u32) -> EncodedTriple {
        EncodedTriple::new(TermId(s), TermId(p), TermId(o))
    }

    #[test]
    fn empty_build() {
        let idx = OrderedTripleIndex::build(&[], PermOrder::Spo);
        assert!(idx.is_empty());
        assert_eq!(idx.range_scan(&TriplePattern::any()).unwrap().count(), 0);
    }

    #[test]
    fn duplicates_dropped() {
        let idx = OrderedTripleIndex::build(&[t(1, 2, 3), t(1, 2, 3), t(0, 2, 3)], PermOrder::Pos);
        assert_eq!(idx.len(), 2);
    }

    #[test]
    fn incompatible_order_rejected() {
        let idx = OrderedTripleIndex::build(&[t(1, 2, 3)], PermOrder::Spo);
        let p = TriplePattern::new(None, Some(TermId(2)), None);
        assert_eq!(
            idx.estimate(&p),
            Err(IncompatibleOrder {
                order: PermOrder::Spo
            })
        );
        assert!(idx.range_scan(&p).is_err());
    }

    #[test]
    fn best_order_choice() {
        let b = Some(TermId(0));
        assert_eq!(PermOrder::best_for(&TriplePattern::any()), PermOrder::Spo);
        assert_eq!(PermOrder::best_for(&TriplePattern::new(None, b, None)), PermOrder::Pso);
        assert_eq!(PermOrder::best_for(&TriplePattern::new(None, b, b)), PermOrder::Pos);
        assert_eq!(PermOrder::best_for(&TriplePattern::new(b, None, b)), PermOrder::Sop);
        assert_eq!(PermOrder::best_for(&TriplePattern::new(None, None, b)), PermOrder::Osp);
        assert_eq!(PermOrder::best_for(&TriplePattern::new(b, b, b)), PermOrder::Spo);
    }

    #[test]
    fn unmatched_subject_estimates_zero() {
        let idx = HexaIndex::build(&[t(1, 2, 3), t(4, 2, 3)]);
        assert_eq!(idx.count(&TriplePattern::new(Some(TermId(9)), None, None)), 0);
        assert_eq!(idx.count(&TriplePattern::any()), 2);
    }

    #[test]
    fn key_roundtrip_every_order() {
        let x = t(5, 6, 7);
        for o in PermOrder::ALL {
            assert_eq!(o.unkey(&o.key(&x)), x);
        }
    }
}
