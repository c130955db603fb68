//! Built-in data and query texts: the 25-statement magazine example, its
//! four queries, and the fourteen LUBM-style suite queries.
//!
//! The magazine data lives under the base IRI
//! `http://example.org/magazine#` (written `:` in the queries); its
//! `rdf:Type` predicate is `http://www.w3.org/1999/02/22-rdf-syntax-ns#Type`
//! and is a different term from `:Type`.

use crate::model::Triple;
use crate::ntriples::{parse_str, ParseMode};

pub const MAGAZINE_BASE: &str = "http://example.org/magazine#";

pub const MAGAZINE_NT: &str = include_str!("../fixtures/magazine.nt");

pub const MAGAZINE_QUERIES: [(&str, &str); 4] = [
    ("q1_title", include_str!("../fixtures/magazine/q1_title.rq")),
    ("q2_magazine", include_str!("../fixtures/magazine/q2_magazine.rq")),
    ("q3_malta", include_str!("../fixtures/magazine/q3_malta.rq")),
    ("q4_cyprus", include_str!("../fixtures/magazine/q4_cyprus.rq")),
];

/// Suite queries as listed, including their line-wrapped prefixes, bare
/// IRIs and stray commas.
pub const SUITE_QUERIES: [(&str, &str); 14] = [
    ("q01", include_str!("../queries/q01.rq")),
    ("q02", include_str!("../queries/q02.rq")),
    ("q03", include_str!("../queries/q03.rq")),
    ("q04", include_str!("../queries/q04.rq")),
    ("q05", include_str!("../queries/q05.rq")),
    ("q06", include_str!("../queries/q06.rq")),
    ("q07", include_str!("../queries/q07.rq")),
    ("q08", include_str!("../queries/q08.rq")),
    ("q09", include_str!("../queries/q09.rq")),
    ("q10", include_str!("../queries/q10.rq")),
    ("q11", include_str!("../queries/q11.rq")),
    ("q12", include_str!("../queries/q12.rq")),
    ("q13", include_str!("../queries/q13.rq")),
    ("q14", include_str!("../queries/q14.rq")),
];

pub fn magazine_triples() -> Vec<Triple> {
    parse_str(MAGAZINE_NT, ParseMode::Strict)
        .expect("bundled fixture parses")
        .triples
}
