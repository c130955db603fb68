//! A triple-store workbench.
//!
//! Three storage layouts share one dictionary-encoded data model:
//!
//! * [`engine::SingleStore`]: one triples table with all six permutation
//!   indexes;
//! * [`engine::VpStore`]: vertical partitioning, one subject-sorted
//!   two-column table per predicate;
//! * [`engine::TwinTables`]: the stream split into two same-schema twin
//!   tables by the recursive twin-table insertion rule, with per-twin
//!   subject, object and overlap sets.
//!
//! [`sparql`] parses basic graph patterns, [`plan`] builds greedy left-deep
//! plans with per-step table provenance and self-join flags, and [`exec`]
//! runs them as hash joins while counting same-table probes. [`benchkit`]
//! generates a LUBM-flavoured dataset and runs the query suite across all
//! engines; [`persist`] stores any engine as a directory of TSV files.

pub mod benchkit;
pub mod engine;
pub mod exec;
pub mod index;
pub mod model;
pub mod ntriples;
pub mod par;
pub mod persist;
pub mod plan;
pub mod sparql;

pub mod fixtures;

pub use engine::{AnyStore, EngineKind, Store};
pub use exec::{execute, ExecStats, QueryResult};
pub use model::{Dictionary, EncodedTriple, Term, TermId, TermKind, Triple};
pub use plan::{explain, plan, EngineMode, Plan};
pub use sparql::{parse_query, BgpQuery};
