//! Reference implementations used as oracles, plus random corpus builders.
//!
//! Nothing here touches dictionaries, indexes or engines: the evaluator
//! works on lexical terms with hash buckets and nested loops.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use twinstore::ntriples::escape_literal;
use twinstore::sparql::{BgpQuery, PatternTerm, Projection};
use twinstore::{Term, TermKind, Triple};

pub type Rows = Vec<Vec<Term>>;

/// Index-nested-loop BGP evaluation over the distinct input triples.
///
/// Patterns are taken in a static order: at each step prefer a remaining
/// pattern sharing a bound variable, then the most positions fixed
/// (constants or bound variables), then textual order. Candidates come from a plain subject, object or
/// predicate bucket and are filtered term by term. Returns the projected
/// bag, sorted, or `None` once more than `budget` partial solutions exist.
pub fn oracle_eval(triples: &[Triple], query: &BgpQuery, budget: usize) -> Option<Rows> {
    let data: Vec<&Triple> = {
        let mut seen = BTreeSet::new();
        triples.iter().filter(|t| seen.insert(*t)).collect()
    };
    let mut buckets: [HashMap<&Term, Vec<&Triple>>; 3] = Default::default();
    for t in &data {
        for (pos, term) in [&t.s, &t.p, &t.o].into_iter().enumerate() {
            buckets[pos].entry(term).or_default().push(t);
        }
    }

    let mut order = Vec::new();
    let mut bound: BTreeSet<&str> = BTreeSet::new();
    let mut remaining: Vec<usize> = (0..query.patterns.len()).collect();
    while !remaining.is_empty() {
        let fixed = |i: usize| {
            query.patterns[i]
                .terms()
                .into_iter()
                .filter(|t| t.var().is_none_or(|v| bound.contains(v)))
                .count()
        };
        let connected = |i: usize| query.patterns[i].vars().any(|v| bound.contains(v));
        let best = remaining
            .iter()
            .copied()
            .max_by_key(|&i| (connected(i), fixed(i), std::cmp::Reverse(i)))
            .unwrap();
        remaining.retain(|&i| i != best);
        bound.extend(query.patterns[best].vars());
        order.push(best);
    }

    let mut solutions: Vec<HashMap<String, Term>> = vec![HashMap::new()];
    for &pi in &order {
        let pattern = &query.patterns[pi];
        let terms = pattern.terms();
        let mut next = Vec::new();
        for sol in &solutions {
            let known = |pos: usize| match terms[pos] {
                PatternTerm::Var(v) => sol.get(v),
                PatternTerm::Iri(c) | PatternTerm::Literal(c) => Some(c),
            };
            let candidates: &[&Triple] = match [0, 2, 1].into_iter().find_map(|pos| known(pos).map(|k| (pos, k))) {
                Some((pos, key)) => buckets[pos].get(key).map_or(&[], Vec::as_slice),
                None => &data,
            };
            for t in candidates {
                let mut ext = sol.clone();
                let ok = terms.into_iter().zip([&t.s, &t.p, &t.o]).all(|(pt, value)| match pt {
                    PatternTerm::Var(v) => match ext.get(v) {
                        Some(b) => b == value,
                        None => {
                            ext.insert(v.clone(), value.clone());
                            true
                        }
                    },
                    PatternTerm::Iri(c) | PatternTerm::Literal(c) => c == value,
                });
                if ok {
                    next.push(ext);
                    if next.len() > budget {
                        return None;
                    }
                }
            }
        }
        solutions = next;
    }
    let select = query.select_vars();
    let mut rows: Rows = solutions
        .iter()
        .map(|s| select.iter().map(|v| s[v].clone()).collect())
        .collect();
    rows.sort();
    Some(rows)
}

pub fn brute_sets(rows: &[Triple]) -> (BTreeSet<Term>, BTreeSet<Term>) {
    let subs = rows.iter().map(|t| t.s.clone()).collect();
    let objs = rows.iter().map(|t| t.o.clone()).collect();
    (subs, objs)
}

const BASE: &str = "http://r.example/";

/// Random dataset of at most 2,000 triples over a small vocabulary so that
/// joins find partners. Some datasets contain reflexive triples and
/// duplicates; term order is random.
pub fn random_dataset(rng: &mut ChaCha8Rng) -> Vec<Triple> {
    let size = if rng.gen_bool(0.3) {
        rng.gen_range(1..=60)
    } else {
        rng.gen_range(60..=2000)
    };
    let nodes = rng.gen_range(2..=(size / 3).clamp(3, 120));
    let preds = rng.gen_range(1..=8);
    let literals = rng.gen_range(1..=20);
    let reflexive_rate = if rng.gen_bool(0.5) { 0.0 } else { 0.02 };
    let blank_rate = if rng.gen_bool(0.3) { 0.1 } else { 0.0 };
    // Layered datasets only link layer k to layer k+1, which often
    // partitions without any fallback.
    let layers = if rng.gen_bool(0.3) { rng.gen_range(2..=3) } else { 1 };
    let width = (nodes / layers).max(1);
    let node_in = |rng: &mut ChaCha8Rng, layer: usize| {
        let i = layer * width + rng.gen_range(0..width);
        if rng.gen_bool(blank_rate) {
            Term::blank(format!("b{i}"))
        } else {
            Term::iri(format!("{BASE}n{i}"))
        }
    };
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        let layer = rng.gen_range(0..layers.max(2) - 1);
        let s = node_in(rng, if layers == 1 { 0 } else { layer });
        let p = Term::iri(format!("{BASE}p{}", rng.gen_range(0..preds)));
        let o = if rng.gen_bool(reflexive_rate) {
            s.clone()
        } else if rng.gen_bool(0.25) {
            let i = rng.gen_range(0..literals);
            Term::literal(if i % 5 == 0 { format!("say \"{i}\"") } else { format!("lit {i}") })
        } else {
            node_in(rng, if layers == 1 { 0 } else { layer + 1 })
        };
        out.push(Triple::new(s, p, o).expect("valid by construction"));
    }
    out
}

fn term_text(t: &Term) -> String {
    match t.kind() {
        TermKind::Iri => format!("<{}>", t.lexical()),
        TermKind::Literal => {
            let mut s = String::from("\"");
            escape_literal(t.lexical(), &mut s);
            s.push('"');
            s
        }
        TermKind::BlankNode => unreachable!("blank nodes are never query constants"),
    }
}

/// A connected BGP of 1..=5 patterns seeded from triples of `data`, as
/// query text. Pattern terms are variables or constants drawn from the data
/// (occasionally a constant that does not occur at all).
pub fn random_query(rng: &mut ChaCha8Rng, data: &[Triple]) -> String {
    let n = rng.gen_range(1..=5);
    let mut vars: Vec<String> = Vec::new();
    let mut patterns: Vec<[String; 3]> = Vec::new();
    let fresh = |vars: &mut Vec<String>| {
        let v = format!("?v{}", vars.len());
        vars.push(v.clone());
        v
    };
    for k in 0..n {
        let t = data.choose(rng).expect("non-empty dataset");
        let mut slots: [Option<String>; 3] = [None, None, None];
        if k > 0 {
            // connect through an existing variable at s, p or o
            let v = vars.choose(rng).expect("earlier patterns bind a variable").clone();
            let pos = *[0, 0, 2, 2, 2, 1].choose(rng).unwrap();
            slots[pos] = Some(v);
        }
        for (pos, term) in [&t.s, &t.p, &t.o].into_iter().enumerate() {
            if slots[pos].is_some() {
                continue;
            }
            let want_var = match pos {
                1 => rng.gen_bool(0.15),
                _ => rng.gen_bool(0.65),
            };
            slots[pos] = Some(if want_var || term.kind() == TermKind::BlankNode {
                if !vars.is_empty() && rng.gen_bool(0.2) {
                    vars.choose(rng).unwrap().clone()
                } else {
                    fresh(&mut vars)
                }
            } else if rng.gen_bool(0.02) {
                format!("<{BASE}absent>")
            } else {
                term_text(term)
            });
        }
        if k == 0 && !slots.iter().flatten().any(|s| s.starts_with('?')) {
            slots[0] = Some(fresh(&mut vars));
        }
        patterns.push(slots.map(|s| s.expect("filled")));
    }
    let used: Vec<&String> = vars
        .iter()
        .filter(|v| patterns.iter().flatten().any(|s| s == *v))
        .collect();
    let select = if rng.gen_bool(0.5) || used.len() < 2 {
        "*".to_string()
    } else {
        let mut pick: Vec<&String> = used.clone();
        pick.shuffle(rng);
        pick.truncate(rng.gen_range(1..used.len()));
        pick.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" ")
    };
    let body: Vec<String> = patterns.iter().map(|p| p.join(" ")).collect();
    format!("SELECT {select} WHERE {{ {} }}", body.join(" . "))
}

/// True when every pattern after the first shares a variable with an
/// earlier one.
pub fn is_connected(q: &BgpQuery) -> bool {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for (i, p) in q.patterns.iter().enumerate() {
        let vars: BTreeSet<&str> = p.vars().collect();
        if i > 0 && seen.is_disjoint(&vars) {
            return false;
        }
        seen.extend(vars);
    }
    true
}

pub fn projection_is_star(q: &BgpQuery) -> bool {
    matches!(q.projection, Projection::All)
}

/// Random term for serializer round trips: IRIs with awkward characters,
/// literals with quotes, escapes, control and non-ASCII characters.
pub fn random_term(rng: &mut ChaCha8Rng, kind: TermKind) -> Term {
    const POOL: &[char] = &[
        'a', 'b', 'z', 'Q', '0', '9', ' ', '"', '\\', '\n', '\r', '\t', '\u{1}', '\u{7f}', 'é', '猫', '🦀', '<', '>',
        '{', '|', '^', '`', '#', '/', ':', '.', '_', '-', '\u{2028}',
    ];
    let len = rng.gen_range(0..12);
    let body: String = (0..len).map(|_| *POOL.choose(rng).unwrap()).collect();
    match kind {
        TermKind::Iri => Term::iri(format!("http://x.example/{body}")),
        TermKind::Literal => Term::literal(body),
        TermKind::BlankNode => {
            let label: String = (0..rng.gen_range(1..8))
                .map(|_| *b"abcXYZ019_".choose(rng).unwrap() as char)
                .collect();
            Term::blank(label)
        }
    }
}

pub fn random_triple(rng: &mut ChaCha8Rng) -> Triple {
    let kind = if rng.gen_bool(0.2) { TermKind::BlankNode } else { TermKind::Iri };
    let s = random_term(rng, kind);
    let p = random_term(rng, TermKind::Iri);
    let kind = *[TermKind::Iri, TermKind::Literal, TermKind::Literal, TermKind::BlankNode]
        .choose(rng)
        .unwrap();
    let o = random_term(rng, kind);
    Triple::new(s, p, o).expect("valid by construction")
}

/// One store per engine kind over the same triples.
pub fn build_all(triples: &[Triple]) -> Vec<twinstore::AnyStore> {
    [twinstore::EngineKind::Single, twinstore::EngineKind::Vp, twinstore::EngineKind::Rmtt]
        .into_iter()
        .map(|k| twinstore::AnyStore::build(k, triples))
        .collect()
}

pub fn store_for(stores: &[twinstore::AnyStore], mode: twinstore::EngineMode) -> &twinstore::AnyStore {
    stores
        .iter()
        .find(|s| s.kind() == mode.store_kind())
        .expect("a store per kind")
}

/// Plans and runs `query`, returning sorted decoded rows and the stats.
pub fn run_mode(store: &twinstore::AnyStore, query: &BgpQuery, mode: twinstore::EngineMode) -> (Rows, twinstore::ExecStats) {
    let plan = twinstore::plan(query, store.as_store(), mode).expect("mode matches store");
    let (result, stats) = twinstore::execute(&plan, store.as_store());
    let rows = result
        .sorted_terms(store.as_store().dictionary())
        .expect("result ids decode");
    (rows, stats)
}
