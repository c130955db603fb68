//! Hash-join execution of a [`Plan`].
//!
//! Step 0 materializes its scan into binding rows. Each later step scans
//! its pattern per physical table, builds a hash map on the smaller side
//! (partitioned by source table) and probes it with the other side. Every
//! lookup into a partition is counted, and counted again as a same-table
//! probe when the partition's table equals the probing row's table.
//!
//! In pruned twin-table mode, a subject-object join consults only the
//! partitions returned by `so_join_targets` for the probing row's key.

use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use crate::engine::{Store, TableId};
use crate::model::{Dictionary, EncodedTriple, ModelError, Term, TermId};
use crate::par::{self, Parallelism};
use crate::plan::{Plan, PlanStep, Slot};

const UNBOUND: TermId = TermId(u32::MAX);
const PAR_PROBE_MIN: usize = 4096;
const PROBE_CHUNK: usize = 1024;

/// Variable bindings plus, per variable, the table that supplied its most
/// recent binding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindingRow {
    pub values: Vec<TermId>,
    pub provenance: Vec<TableId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExecStats {
    pub rows_out: usize,
    pub plan_self_joins: usize,
    pub lookups: u64,
    pub runtime_same_table_probes: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExecOptions {
    /// Drop duplicate projected rows.
    pub dedup: bool,
    pub parallelism: Parallelism,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryResult {
    pub vars: Vec<String>,
    pub rows: Vec<Vec<TermId>>,
}

impl QueryResult {
    pub fn decode(&self, dict: &Dictionary) -> Result<Vec<Vec<Term>>, ModelError> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&id| dict.decode(id).cloned()).collect())
            .collect()
    }

    /// Rows decoded and sorted, for order-insensitive comparison.
    pub fn sorted_terms(&self, dict: &Dictionary) -> Result<Vec<Vec<Term>>, ModelError> {
        let mut rows = self.decode(dict)?;
        rows.sort();
        Ok(rows)
    }
}

struct Scanned {
    table: TableId,
    triple: EncodedTriple,
}

fn scan_step(store: &dyn Store, step: &PlanStep) -> Vec<Scanned> {
    let Some(pattern) = step.pattern.constant_pattern() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for &table in &step.tables {
        for triple in store.scan_table(table, &pattern) {
            if step.pattern.consistent(&triple) {
                out.push(Scanned { table, triple });
            }
        }
    }
    out
}

fn bind(row: &mut BindingRow, step: &PlanStep, s: &Scanned) {
    for (pos, slot) in step.pattern.slots.iter().enumerate() {
        if let Slot::Var(v) = *slot {
            row.values[v] = s.triple.get(pos);
            row.provenance[v] = s.table;
        }
    }
}

type Key = [TermId; 3];

struct JoinShape {
    /// (variable, position in the right pattern)
    vars: Vec<(usize, usize)>,
    /// Index into `vars` used for provenance and pruning.
    primary: usize,
    prune: bool,
}

impl JoinShape {
    fn left_key(&self, row: &BindingRow) -> Key {
        let mut k = [UNBOUND; 3];
        for (i, (v, _)) in self.vars.iter().enumerate() {
            k[i] = row.values[*v];
        }
        k
    }

    fn right_key(&self, s: &Scanned) -> Key {
        let mut k = [UNBOUND; 3];
        for (i, (_, pos)) in self.vars.iter().enumerate() {
            k[i] = s.triple.get(*pos);
        }
        k
    }
}

#[derive(Default)]
struct ProbeOut {
    rows: Vec<BindingRow>,
    lookups: u64,
    same: u64,
}

impl ProbeOut {
    fn merge(parts: Vec<ProbeOut>) -> ProbeOut {
        let mut out = ProbeOut::default();
        for p in parts {
            out.rows.extend(p.rows);
            out.lookups += p.lookups;
            out.same += p.same;
        }
        out
    }
}

fn targets_for(
    store: &dyn Store,
    shape: &JoinShape,
    source: TableId,
    key: &Key,
    partitions: &[TableId],
) -> Vec<TableId> {
    if shape.prune {
        if let Some(t) = store.so_join_targets(source, key[shape.primary]) {
            return partitions.iter().copied().filter(|p| t.contains(p)).collect();
        }
    }
    partitions.to_vec()
}

fn chunked<T: Sync>(mode: Parallelism, items: &[T], f: impl Fn(&[T]) -> ProbeOut + Sync + Send) -> ProbeOut {
    if mode.is_parallel() && items.len() >= PAR_PROBE_MIN {
        let chunks: Vec<&[T]> = items.chunks(PROBE_CHUNK).collect();
        ProbeOut::merge(par::map_collect_with(mode, &chunks, |c| f(c)))
    } else {
        f(items)
    }
}

fn join_step(
    store: &dyn Store,
    step: &PlanStep,
    left: &[BindingRow],
    right: &[Scanned],
    shape: &JoinShape,
    mode: Parallelism,
) -> ProbeOut {
    let primary_var = shape.vars[shape.primary].0;
    if right.len() <= left.len() {
        // build on the scanned pattern, probe with bindings
        let mut maps: BTreeMap<TableId, HashMap<Key, Vec<usize>>> = BTreeMap::new();
        for (i, s) in right.iter().enumerate() {
            maps.entry(s.table).or_default().entry(shape.right_key(s)).or_default().push(i);
        }
        let partitions: Vec<TableId> = maps.keys().copied().collect();
        chunked(mode, left, |rows| {
            let mut out = ProbeOut::default();
            for row in rows {
                let key = shape.left_key(row);
                let source = row.provenance[primary_var];
                for table in targets_for(store, shape, source, &key, &partitions) {
                    out.lookups += 1;
                    if table == source {
                        out.same += 1;
                    }
                    if let Some(hits) = maps[&table].get(&key) {
                        for &h in hits {
                            let mut joined = row.clone();
                            bind(&mut joined, step, &right[h]);
                            out.rows.push(joined);
                        }
                    }
                }
            }
            out
        })
    } else {
        // build on the bindings, probe with the scanned pattern
        let mut maps: BTreeMap<TableId, HashMap<Key, Vec<usize>>> = BTreeMap::new();
        for (i, row) in left.iter().enumerate() {
            maps.entry(row.provenance[primary_var])
                .or_default()
                .entry(shape.left_key(row))
                .or_default()
                .push(i);
        }
        let partitions: Vec<TableId> = maps.keys().copied().collect();
        chunked(mode, right, |scanned| {
            let mut out = ProbeOut::default();
            for s in scanned {
                let key = shape.right_key(s);
                for table in targets_for(store, shape, s.table, &key, &partitions) {
                    out.lookups += 1;
                    if table == s.table {
                        out.same += 1;
                    }
                    if let Some(hits) = maps[&table].get(&key) {
                        for &h in hits {
                            let mut joined = left[h].clone();
                            bind(&mut joined, step, s);
                            out.rows.push(joined);
                        }
                    }
                }
            }
            out
        })
    }
}

fn cross_step(step: &PlanStep, left: &[BindingRow], right: &[Scanned]) -> Vec<BindingRow> {
    let mut out = Vec::with_capacity(left.len() * right.len());
    for row in left {
        for s in right {
            let mut joined = row.clone();
            bind(&mut joined, step, s);
            out.push(joined);
        }
    }
    out
}

/// Runs a plan, returning the projected bag of rows.
pub fn execute(plan: &Plan, store: &dyn Store) -> (QueryResult, ExecStats) {
    execute_with(plan, store, ExecOptions::default())
}

pub fn execute_with(plan: &Plan, store: &dyn Store, opts: ExecOptions) -> (QueryResult, ExecStats) {
    let start = Instant::now();
    let mut stats = ExecStats {
        plan_self_joins: plan.self_joins(),
        ..ExecStats::default()
    };
    let vars: Vec<String> = plan.select.iter().map(|&i| plan.vars[i].clone()).collect();
    let rows = run_steps(plan, store, opts, &mut stats);
    let mut projected: Vec<Vec<TermId>> = rows
        .iter()
        .map(|r| plan.select.iter().map(|&i| r.values[i]).collect())
        .collect();
    if opts.dedup {
        let mut seen = std::collections::HashSet::new();
        projected.retain(|r| seen.insert(r.clone()));
    }
    stats.rows_out = projected.len();
    stats.wall_time = start.elapsed();
    (QueryResult { vars, rows: projected }, stats)
}

fn run_steps(plan: &Plan, store: &dyn Store, opts: ExecOptions, stats: &mut ExecStats) -> Vec<BindingRow> {
    if plan.short_circuit || plan.steps.is_empty() {
        return Vec::new();
    }
    let width = plan.vars.len();
    let empty = BindingRow {
        values: vec![UNBOUND; width],
        provenance: vec![TableId(u32::MAX); width],
    };
    let first = &plan.steps[0];
    let mut rows: Vec<BindingRow> = scan_step(store, first)
        .iter()
        .map(|s| {
            let mut r = empty.clone();
            bind(&mut r, first, s);
            r
        })
        .collect();
    for step in &plan.steps[1..] {
        if rows.is_empty() {
            break;
        }
        let right = scan_step(store, step);
        if !step.is_join() {
            rows = cross_step(step, &rows, &right);
            continue;
        }
        let vars: Vec<(usize, usize)> = step.join_vars.iter().map(|j| (j.var, j.right_pos)).collect();
        // Partitioning follows the first subject-object variable in every
        // mode, so pruned probes are always a subset of sound ones.
        let so = step.join_vars.iter().position(|j| j.is_subject_object());
        let shape = JoinShape {
            vars,
            primary: so.unwrap_or(0),
            prune: plan.mode.is_pruned() && so.is_some(),
        };
        let out = join_step(store, step, &rows, &right, &shape, opts.parallelism);
        stats.lookups += out.lookups;
        stats.runtime_same_table_probes += out.same;
        rows = out.rows;
    }
    rows
}
