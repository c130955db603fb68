use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::engine::{AnyStore, EngineKind};
use crate::exec::{execute_with, ExecOptions};
use crate::model::Triple;
use crate::ntriples::{parse_stream, ParseMode};
use crate::par::{self, Parallelism};
use crate::plan::{plan, EngineMode};
use crate::sparql::{parse_query, BgpQuery};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub query_id: String,
    pub engine: EngineMode,
    pub result_count: usize,
    pub wall_median: Duration,
    pub plan_self_joins: usize,
    pub runtime_same_table_probes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchFailure {
    pub query_id: String,
    pub engine: Option<EngineMode>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchMeta {
    pub dataset: PathBuf,
    pub triple_count: usize,
    pub seed: Option<u64>,
    pub repetitions: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub meta: BenchMeta,
    /// Sorted by query id, then engine order.
    pub rows: Vec<BenchRow>,
    pub failures: Vec<BenchFailure>,
}

impl BenchReport {
    pub fn row(&self, query_id: &str, engine: EngineMode) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.query_id == query_id && r.engine == engine)
    }

    pub fn query_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.rows.iter().map(|r| r.query_id.as_str()).collect();
        ids.dedup();
        ids
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("queries: {0}")]
    Queries(String),
}

/// A named query text; parse errors become report failures.
#[derive(Debug, Clone)]
pub struct SuiteQuery {
    pub id: String,
    pub text: String,
}

/// Reads every `*.rq` file in `dir`, ordered by file name.
pub fn load_queries(dir: &Path) -> Result<Vec<SuiteQuery>, SuiteError> {
    let entries = std::fs::read_dir(dir).map_err(|e| SuiteError::Queries(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "rq"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).map_err(|e| SuiteError::Queries(format!("{}: {e}", p.display())))?;
            let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(SuiteQuery { id, text })
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub repetitions: usize,
    /// Run (query, engine) cells concurrently. Timings are noisier.
    pub concurrent_queries: bool,
    pub exec_parallelism: Parallelism,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            repetitions: 3,
            concurrent_queries: false,
            exec_parallelism: Parallelism::default(),
        }
    }
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v.get(v.len() / 2).copied().unwrap_or_default()
}

fn run_cell(store: &AnyStore, query: &BgpQuery, id: &str, mode: EngineMode, opts: &SuiteOptions) -> Result<BenchRow, BenchFailure> {
    let p = plan(query, store.as_store(), mode).map_err(|e| BenchFailure {
        query_id: id.to_string(),
        engine: Some(mode),
        message: e.to_string(),
    })?;
    let exec_opts = ExecOptions {
        dedup: false,
        parallelism: opts.exec_parallelism,
    };
    let mut times = Vec::with_capacity(opts.repetitions);
    let mut first = None;
    for _ in 0..opts.repetitions.max(1) {
        let (result, stats) = execute_with(&p, store.as_store(), exec_opts);
        times.push(stats.wall_time);
        match &first {
            None => first = Some((result.rows.len(), stats)),
            Some((n, s)) => {
                if *n != result.rows.len() || s.runtime_same_table_probes != stats.runtime_same_table_probes {
                    return Err(BenchFailure {
                        query_id: id.to_string(),
                        engine: Some(mode),
                        message: "counts differ between repetitions".into(),
                    });
                }
            }
        }
    }
    let (result_count, stats) = first.expect("at least one repetition");
    Ok(BenchRow {
        query_id: id.to_string(),
        engine: mode,
        result_count,
        wall_median: median(times),
        plan_self_joins: stats.plan_self_joins,
        runtime_same_table_probes: stats.runtime_same_table_probes,
    })
}

/// Builds each needed engine once and runs every query on every mode.
pub fn run_suite_on(triples: &[Triple], queries: &[SuiteQuery], engines: &[EngineMode], opts: SuiteOptions) -> BenchReport {
    let kinds: Vec<EngineKind> = {
        let mut k: Vec<EngineKind> = engines.iter().map(|m| m.store_kind()).collect();
        k.sort_by_key(|k| k.name());
        k.dedup();
        k
    };
    let stores: BTreeMap<&'static str, AnyStore> = par::map_collect(&kinds, |&k| AnyStore::build(k, triples))
        .into_iter()
        .map(|s| (s.kind().name(), s))
        .collect();

    let mut failures = Vec::new();
    let mut parsed = Vec::new();
    for q in queries {
        match parse_query(&q.text) {
            Ok(bgp) => parsed.push((q.id.clone(), bgp)),
            Err(e) => failures.push(BenchFailure {
                query_id: q.id.clone(),
                engine: None,
                message: format!("parse error: {e}"),
            }),
        }
    }
    let cells: Vec<(usize, EngineMode)> = (0..parsed.len())
        .flat_map(|q| engines.iter().map(move |&m| (q, m)))
        .collect();
    let mode = if opts.concurrent_queries {
        Parallelism::Parallel
    } else {
        Parallelism::Sequential
    };
    let outcomes = par::map_collect_with(mode, &cells, |&(q, m)| {
        let (id, bgp) = &parsed[q];
        run_cell(&stores[m.store_kind().name()], bgp, id, m, &opts)
    });

    let mut rows = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => rows.push(r),
            Err(f) => failures.push(f),
        }
    }
    let engine_rank = |m: EngineMode| engines.iter().position(|&e| e == m);
    rows.sort_by(|a, b| (&a.query_id, engine_rank(a.engine)).cmp(&(&b.query_id, engine_rank(b.engine))));
    BenchReport {
        meta: BenchMeta {
            dataset: PathBuf::new(),
            triple_count: triples.len(),
            seed: None,
            repetitions: opts.repetitions,
        },
        rows,
        failures,
    }
}

/// Loads `dataset` (N-Triples) and the `.rq` files of `queries`, then runs
/// the suite. Wall times exclude parsing and build.
pub fn run_suite(dataset: &Path, queries: &Path, engines: &[EngineMode], opts: SuiteOptions) -> Result<BenchReport, SuiteError> {
    let file = std::fs::File::open(dataset).map_err(|e| SuiteError::Dataset(format!("{}: {e}", dataset.display())))?;
    let parsed = parse_stream(std::io::BufReader::new(file), ParseMode::Strict)
        .map_err(|e| SuiteError::Dataset(format!("{}: {e}", dataset.display())))?;
    let qs = load_queries(queries)?;
    let mut report = run_suite_on(&parsed.triples, &qs, engines, opts);
    report.meta.dataset = dataset.to_path_buf();
    Ok(report)
}
