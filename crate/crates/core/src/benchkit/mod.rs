//! Dataset generation and the benchmark harness.

pub mod gen;
pub mod report;
pub mod suite;

pub use gen::{generate, write_dataset, GenConfig};
pub use report::{emit_report, render_csv, render_markdown, ReportFormat, CSV_HEADER};
pub use suite::{load_queries, run_suite, run_suite_on, BenchFailure, BenchMeta, BenchReport, BenchRow, SuiteOptions, SuiteQuery};
