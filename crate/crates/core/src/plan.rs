//! Greedy left-deep planning and self-join accounting.
//!
//! The plan starts from the pattern with the smallest exact match count,
//! then keeps appending the cheapest pattern that shares a variable with
//! what is already bound. Variable-disjoint patterns are appended last.
//! Ties go to the pattern written first.
//!
//! Every pattern is tagged with the physical tables it reads. A join step
//! pairs the tables that supplied each join variable (left) with the tables
//! of the new pattern (right); the step is a self-join when some retained
//! pair reads the same table on both sides. In pruned twin-table mode,
//! same-twin pairs of a subject-object join are dropped unless a candidate
//! key lies in that twin's overlap set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::engine::{EngineKind, Store, TableId, TableSet};
use crate::index::TriplePattern;
use crate::model::{Term, TermId, TermKind};
use crate::sparql::{BgpQuery, PatternTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EngineMode {
    Single,
    Vp,
    RmttSound,
    RmttPruned,
}

impl EngineMode {
    pub const ALL: [EngineMode; 4] = [
        EngineMode::Single,
        EngineMode::Vp,
        EngineMode::RmttSound,
        EngineMode::RmttPruned,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EngineMode::Single => "single",
            EngineMode::Vp => "vp",
            EngineMode::RmttSound => "rmtt-sound",
            EngineMode::RmttPruned => "rmtt-pruned",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        EngineMode::ALL.into_iter().find(|m| m.name() == s)
    }

    pub fn store_kind(self) -> EngineKind {
        match self {
            EngineMode::Single => EngineKind::Single,
            EngineMode::Vp => EngineKind::Vp,
            EngineMode::RmttSound | EngineMode::RmttPruned => EngineKind::Rmtt,
        }
    }

    /// Mode for a store kind; `pruned` only matters for twin tables.
    pub fn for_store(kind: EngineKind, pruned: bool) -> Self {
        match kind {
            EngineKind::Single => EngineMode::Single,
            EngineKind::Vp => EngineMode::Vp,
            EngineKind::Rmtt if pruned => EngineMode::RmttPruned,
            EngineKind::Rmtt => EngineMode::RmttSound,
        }
    }

    pub fn is_pruned(self) -> bool {
        self == EngineMode::RmttPruned
    }
}

impl fmt::Display for EngineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("engine mode {mode} cannot run on a {store} store")]
    ModeMismatch { mode: EngineMode, store: EngineKind },
}

/// One position of a compiled pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Var(usize),
    Const(TermId),
    /// A constant the dictionary does not know.
    Missing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledPattern {
    /// Position of the pattern in the query text.
    pub index: usize,
    pub slots: [Slot; 3],
    pub text: String,
}

impl CompiledPattern {
    /// Pattern with only the constants bound; `None` if a constant is
    /// missing from the dictionary.
    pub fn constant_pattern(&self) -> Option<TriplePattern> {
        let mut ids = [None; 3];
        for (i, slot) in self.slots.iter().enumerate() {
            match slot {
                Slot::Const(id) => ids[i] = Some(*id),
                Slot::Missing => return None,
                Slot::Var(_) => {}
            }
        }
        Some(TriplePattern::new(ids[0], ids[1], ids[2]))
    }

    pub fn var_positions(&self, var: usize) -> impl Iterator<Item = usize> + '_ {
        (0..3).filter(move |&i| self.slots[i] == Slot::Var(var))
    }

    pub fn vars(&self) -> BTreeSet<usize> {
        self.slots
            .iter()
            .filter_map(|s| match s {
                Slot::Var(v) => Some(*v),
                _ => None,
            })
            .collect()
    }

    /// Positions that repeat a variable must agree.
    pub fn consistent(&self, t: &crate::model::EncodedTriple) -> bool {
        for a in 0..3 {
            for b in a + 1..3 {
                if let (Slot::Var(x), Slot::Var(y)) = (self.slots[a], self.slots[b]) {
                    if x == y && t.get(a) != t.get(b) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

const POS_NAMES: [char; 3] = ['s', 'p', 'o'];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinVar {
    pub var: usize,
    /// Most recent earlier step that binds the variable.
    pub provider_step: usize,
    pub left_pos: usize,
    pub right_pos: usize,
}

impl JoinVar {
    /// `s-s`, `s-o`, `o-s`, `o-o`, or `p-x` when a predicate is involved.
    pub fn kind(&self) -> String {
        if self.left_pos == 1 || self.right_pos == 1 {
            "p-x".to_string()
        } else {
            format!("{}-{}", POS_NAMES[self.left_pos], POS_NAMES[self.right_pos])
        }
    }

    pub fn is_subject_object(&self) -> bool {
        matches!((self.left_pos, self.right_pos), (0, 2) | (2, 0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanStep {
    pub pattern: CompiledPattern,
    pub access_path: String,
    pub estimate: usize,
    /// Physical tables this pattern reads.
    pub tables: TableSet,
    pub join_vars: Vec<JoinVar>,
    pub provenance_left: TableSet,
    pub provenance_right: TableSet,
    /// (left table, right table) combinations the join may touch.
    pub probe_pairs: BTreeSet<(TableId, TableId)>,
    pub self_join: bool,
}

impl PlanStep {
    pub fn is_join(&self) -> bool {
        !self.join_vars.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub mode: EngineMode,
    pub vars: Vec<String>,
    /// Indexes into `vars` of the projected variables.
    pub select: Vec<usize>,
    pub steps: Vec<PlanStep>,
    /// Some constant is absent from the store, so the result is empty.
    pub short_circuit: bool,
    /// Table labels for display, keyed by table id.
    pub table_labels: BTreeMap<TableId, String>,
}

impl Plan {
    pub fn self_joins(&self) -> usize {
        self.steps.iter().filter(|s| s.self_join).count()
    }

    pub fn join_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.is_join()).count()
    }

    pub fn cartesian_steps(&self) -> usize {
        self.steps.iter().skip(1).filter(|s| !s.is_join()).count()
    }
}

fn compact(term: &Term, prefixes: &BTreeMap<String, String>) -> String {
    match term.kind() {
        TermKind::Iri => {
            let lex = term.lexical();
            let best = prefixes
                .iter()
                .filter(|(_, base)| !base.is_empty() && lex.starts_with(base.as_str()))
                .max_by_key(|(_, base)| base.len());
            match best {
                Some((name, base)) => format!("{name}:{}", &lex[base.len()..]),
                None if lex == crate::sparql::RDF_TYPE => "a".to_string(),
                None => crate::ntriples::format_term(term),
            }
        }
        _ => crate::ntriples::format_term(term),
    }
}

fn compile(query: &BgpQuery, store: &dyn Store) -> (Vec<String>, Vec<CompiledPattern>) {
    let vars = query.variables();
    let dict = store.dictionary();
    let patterns = query
        .patterns
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let mut slots = [Slot::Missing; 3];
            let mut text = Vec::with_capacity(3);
            for (i, term) in p.terms().into_iter().enumerate() {
                slots[i] = match term {
                    PatternTerm::Var(v) => {
                        text.push(format!("?{v}"));
                        Slot::Var(vars.iter().position(|x| x == v).expect("collected"))
                    }
                    PatternTerm::Iri(t) | PatternTerm::Literal(t) => {
                        text.push(compact(t, &query.prefixes));
                        dict.lookup(t).map_or(Slot::Missing, Slot::Const)
                    }
                };
            }
            CompiledPattern {
                index,
                slots,
                text: text.join(" "),
            }
        })
        .collect();
    (vars, patterns)
}

fn pattern_tables(store: &dyn Store, mode: EngineMode, pattern: &Option<TriplePattern>) -> TableSet {
    let Some(p) = pattern else {
        return TableSet::new();
    };
    match mode {
        EngineMode::Single | EngineMode::Vp => store.probe_tables(p).into_iter().collect(),
        EngineMode::RmttSound | EngineMode::RmttPruned => store.tables_with_matches(p),
    }
}

/// Right-side tables reachable from left table `left` for a
/// subject-object join variable, given the keys the provider can produce.
fn reachable_targets(
    store: &dyn Store,
    left: TableId,
    provider: &CompiledPattern,
    left_pos: usize,
    right: &TableSet,
) -> TableSet {
    let mut out = TableSet::new();
    let Some(pattern) = provider.constant_pattern() else {
        return out;
    };
    for t in store.scan_table(left, &pattern) {
        if !provider.consistent(&t) {
            continue;
        }
        match store.so_join_targets(left, t.get(left_pos)) {
            Some(targets) => out.extend(targets.intersection(right).copied()),
            None => return right.clone(),
        }
        if out.len() == right.len() {
            break;
        }
    }
    out
}

/// Builds the left-deep plan for `query` over `store`.
pub fn plan(query: &BgpQuery, store: &dyn Store, mode: EngineMode) -> Result<Plan, PlanError> {
    if mode.store_kind() != store.kind() {
        return Err(PlanError::ModeMismatch {
            mode,
            store: store.kind(),
        });
    }
    let (vars, compiled) = compile(query, store);
    let constant: Vec<Option<TriplePattern>> = compiled.iter().map(|c| c.constant_pattern()).collect();
    let estimates: Vec<usize> = constant
        .iter()
        .map(|p| p.as_ref().map_or(0, |p| store.count(p)))
        .collect();
    let short_circuit = constant.iter().any(Option::is_none);

    // greedy order
    let mut remaining: Vec<usize> = (0..compiled.len()).collect();
    let mut order = Vec::with_capacity(compiled.len());
    let mut bound: BTreeSet<usize> = BTreeSet::new();
    while !remaining.is_empty() {
        let connected = |i: &usize| order.is_empty() || !compiled[*i].vars().is_disjoint(&bound);
        let pick = remaining
            .iter()
            .copied()
            .filter(connected)
            .min_by_key(|&i| (estimates[i], i))
            .or_else(|| remaining.iter().copied().min_by_key(|&i| (estimates[i], i)))
            .expect("remaining is non-empty");
        remaining.retain(|&i| i != pick);
        bound.extend(compiled[pick].vars());
        order.push(pick);
    }

    let mut steps: Vec<PlanStep> = Vec::with_capacity(order.len());
    for &pi in &order {
        let pattern = compiled[pi].clone();
        let tables = pattern_tables(store, mode, &constant[pi]);
        let mut join_vars = Vec::new();
        for v in pattern.vars() {
            let Some(provider_step) = steps.iter().rposition(|s| s.pattern.vars().contains(&v)) else {
                continue;
            };
            let provider = &steps[provider_step].pattern;
            let lefts: Vec<usize> = provider.var_positions(v).collect();
            let rights: Vec<usize> = pattern.var_positions(v).collect();
            let crossing = lefts
                .iter()
                .flat_map(|&l| rights.iter().map(move |&r| (l, r)))
                .find(|&(l, r)| matches!((l, r), (0, 2) | (2, 0)));
            let (left_pos, right_pos) = crossing.unwrap_or((lefts[0], rights[0]));
            join_vars.push(JoinVar {
                var: v,
                provider_step,
                left_pos,
                right_pos,
            });
        }

        let mut provenance_left = TableSet::new();
        let mut probe_pairs = BTreeSet::new();
        for jv in &join_vars {
            let provider = &steps[jv.provider_step];
            provenance_left.extend(provider.tables.iter().copied());
            for &l in &provider.tables {
                let reach = if mode.is_pruned() && jv.is_subject_object() {
                    reachable_targets(store, l, &provider.pattern, jv.left_pos, &tables)
                } else {
                    tables.clone()
                };
                probe_pairs.extend(reach.into_iter().map(|r| (l, r)));
            }
        }
        let provenance_right: TableSet = probe_pairs.iter().map(|&(_, r)| r).collect();
        let self_join = probe_pairs.iter().any(|(l, r)| l == r);
        steps.push(PlanStep {
            access_path: constant[pi]
                .as_ref()
                .map_or_else(|| "none".to_string(), |p| store.access_path(p)),
            estimate: estimates[pi],
            tables,
            join_vars,
            provenance_left,
            provenance_right,
            probe_pairs,
            self_join,
            pattern,
        });
    }

    let select = query
        .select_vars()
        .iter()
        .map(|v| vars.iter().position(|x| x == v).expect("validated by parser"))
        .collect();
    let table_labels = store
        .tables()
        .into_iter()
        .map(|t| (t, store.table_label(t)))
        .collect();
    Ok(Plan {
        mode,
        vars,
        select,
        steps,
        short_circuit,
        table_labels,
    })
}

fn fmt_tables(plan: &Plan, set: &TableSet) -> String {
    let names: Vec<String> = set
        .iter()
        .map(|t| plan.table_labels.get(t).cloned().unwrap_or_else(|| format!("#{}", t.0)))
        .collect();
    format!("{{{}}}", names.join(","))
}

/// Stable, line-oriented plan report.
///
/// ```text
/// plan mode=<mode> patterns=<n>
/// step <k> scan <pattern> | path=<order> | est=<n> | tables={..}
/// step <k> join <pattern> | path=<order> | est=<n> | on=?v[s-o],.. | left={..} | right={..} | self-join=yes|no
/// total: <n> self-joins
/// ```
pub fn explain(plan: &Plan) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "plan mode={} patterns={}", plan.mode, plan.steps.len());
    if plan.short_circuit {
        let _ = writeln!(out, "note: a constant is not in the store; result is empty");
    }
    for (k, step) in plan.steps.iter().enumerate() {
        let head = format!(
            "{} | path={} | est={}",
            step.pattern.text, step.access_path, step.estimate
        );
        if k == 0 {
            let _ = writeln!(out, "step {k} scan {head} | tables={}", fmt_tables(plan, &step.tables));
        } else if !step.is_join() {
            let _ = writeln!(out, "step {k} cross {head} | tables={}", fmt_tables(plan, &step.tables));
        } else {
            let on: Vec<String> = step
                .join_vars
                .iter()
                .map(|j| format!("?{}[{}]", plan.vars[j.var], j.kind()))
                .collect();
            let _ = writeln!(
                out,
                "step {k} join {head} | on={} | left={} | right={} | self-join={}",
                on.join(","),
                fmt_tables(plan, &step.provenance_left),
                fmt_tables(plan, &step.provenance_right),
                if step.self_join { "yes" } else { "no" }
            );
        }
    }
    let _ = writeln!(out, "total: {} self-joins", plan.self_joins());
    out
}
