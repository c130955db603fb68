//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the lines are always shown.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use twinstore::benchkit::{generate, run_suite_on, GenConfig, SuiteOptions, SuiteQuery};
use twinstore::engine::TwinTables;
use twinstore::fixtures::{magazine_triples, MAGAZINE_BASE, MAGAZINE_QUERIES, SUITE_QUERIES};
use twinstore::ntriples::{parse_line, parse_str, serialize, write_triples, ParseMode};
use twinstore::persist::{load_store, manifest_for, save_store};
use twinstore::{explain, parse_query, plan, AnyStore, EngineKind, EngineMode, Term, Triple};

use common::{build_all, oracle_eval, random_dataset, random_query, run_mode, store_for};

type Outcome = Result<String, String>;

const CORE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core");

fn fixture(name: &str) -> PathBuf {
    Path::new(CORE).join(name)
}

fn nt_set(path: &Path) -> BTreeSet<Triple> {
    let text = std::fs::read_to_string(path).expect("fixture readable");
    parse_str(&text, ParseMode::Strict).expect("fixture parses").triples.into_iter().collect()
}

fn twin_set(tt: &TwinTables, i: usize) -> BTreeSet<Triple> {
    let dict = twinstore::engine::Store::dictionary(tt);
    tt.twin(i)
        .triples()
        .map(|t| dict.decode_triple(&t).expect("ids decode"))
        .collect()
}

fn criterion_1() -> Outcome {
    let (tt, placements) = TwinTables::build_traced(&magazine_triples());
    let first = nt_set(&fixture("fixtures/twin_first.nt"));
    let second = nt_set(&fixture("fixtures/twin_second.nt"));
    let expected_switches: Vec<usize> = std::fs::read_to_string(fixture("fixtures/magazine_switch_rows.txt"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.trim().parse().unwrap())
        .collect();
    let switches: Vec<usize> = placements
        .iter()
        .enumerate()
        .filter(|(_, p)| p.switched)
        .map(|(i, _)| i + 1)
        .collect();
    let mut errs = Vec::new();
    if twin_set(&tt, 0) != first {
        errs.push(format!("twin0 has {} rows, differs from golden", tt.twin(0).len()));
    }
    if twin_set(&tt, 1) != second {
        errs.push(format!("twin1 has {} rows, differs from golden", tt.twin(1).len()));
    }
    if tt.stats().fallback_count != 0 {
        errs.push(format!("fallback_count {}", tt.stats().fallback_count));
    }
    if switches != expected_switches {
        errs.push(format!("switch rows {switches:?}, expected {expected_switches:?}"));
    }
    if errs.is_empty() {
        Ok(format!("twins {}/{} rows, switches at {switches:?}, 0 fallbacks", first.len(), second.len()))
    } else {
        Err(errs.join("; "))
    }
}

fn criterion_2() -> Outcome {
    let m = |local: &str| Term::iri(format!("{MAGAZINE_BASE}{local}"));
    let expected: [Vec<Vec<Term>>; 4] = [
        vec![vec![Term::literal("Data Web")]],
        vec![vec![Term::literal("Bob Hacker")]],
        vec![vec![m("B1"), m("A1")]],
        vec![vec![m("A2"), m("B1")], vec![m("A2"), m("B2")]],
    ];
    let triples = magazine_triples();
    let stores = build_all(&triples);
    let mut errs = Vec::new();
    for ((name, text), want) in MAGAZINE_QUERIES.iter().zip(&expected) {
        let q = parse_query(text).map_err(|e| format!("{name}: {e}"))?;
        if oracle_eval(&triples, &q, usize::MAX).as_ref() != Some(want) {
            errs.push(format!("{name}: oracle disagrees with expected rows"));
        }
        for mode in EngineMode::ALL {
            let (rows, _) = run_mode(store_for(&stores, mode), &q, mode);
            if &rows != want {
                errs.push(format!("{name} on {mode}: {rows:?}"));
            }
        }
    }
    if errs.is_empty() {
        Ok("4 queries x 4 modes match (Data Web; Bob Hacker; (B1,A1); (A2,B1),(A2,B2))".into())
    } else {
        Err(errs.join("; "))
    }
}

fn suite_queries() -> Vec<SuiteQuery> {
    SUITE_QUERIES
        .iter()
        .map(|(id, text)| SuiteQuery {
            id: id.to_string(),
            text: text.to_string(),
        })
        .collect()
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let triples = generate(&GenConfig::default());
    let opts = SuiteOptions {
        repetitions: 1,
        ..SuiteOptions::default()
    };
    let report = run_suite_on(&triples, &suite_queries(), &EngineMode::ALL, opts);
    let elapsed = start.elapsed();
    let mut errs: Vec<String> = report.failures.iter().map(|f| format!("{}: {}", f.query_id, f.message)).collect();
    let strict = ["q02", "q04", "q08", "q09", "q12"];
    let mut summary = Vec::new();
    for (id, text) in SUITE_QUERIES {
        let q = parse_query(text).map_err(|e| format!("{id}: {e}"))?;
        let (Some(single), Some(pruned)) = (report.row(id, EngineMode::Single), report.row(id, EngineMode::RmttPruned)) else {
            errs.push(format!("{id}: missing report rows"));
            continue;
        };
        let (s, p) = (single.plan_self_joins, pruned.plan_self_joins);
        summary.push(format!("{id}:{p}/{s}"));
        if p > s {
            errs.push(format!("{id}: rmtt-pruned {p} > single {s}"));
        }
        if strict.contains(&id) && p >= s {
            errs.push(format!("{id}: rmtt-pruned {p} not below single {s}"));
        }
        if common::is_connected(&q) && s != q.patterns.len() - 1 {
            errs.push(format!("{id}: single {s} != patterns-1 = {}", q.patterns.len() - 1));
        }
    }
    if elapsed >= Duration::from_secs(60) {
        errs.push(format!("suite took {elapsed:?}"));
    }
    if errs.is_empty() {
        Ok(format!(
            "{} triples, pruned/single self-joins {}, {:.1}s",
            triples.len(),
            summary.join(" "),
            elapsed.as_secs_f64()
        ))
    } else {
        Err(errs.join("; "))
    }
}

const DATASETS: u64 = 100;
const QUERIES_PER_DATASET: usize = 50;
const ORACLE_BUDGET: usize = 50_000;

#[derive(Default)]
struct CorpusTally {
    queries: usize,
    redraws: usize,
    nonempty: usize,
    mismatches: Vec<String>,
    soundness: Vec<String>,
    zero_fallback_stores: usize,
    pruned_probes: u64,
    sound_probes: u64,
}

/// Criteria 4 and 5 share one randomized corpus.
fn run_corpus() -> CorpusTally {
    let mut tally = CorpusTally::default();
    for d in 0..DATASETS {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE + d);
        let triples = random_dataset(&mut rng);
        let stores = build_all(&triples);
        check_membership(d, &stores, &mut tally);
        let mut accepted = 0;
        while accepted < QUERIES_PER_DATASET {
            let text = random_query(&mut rng, &triples);
            let q = match parse_query(&text) {
                Ok(q) => q,
                Err(e) => {
                    tally.mismatches.push(format!("ds{d}: generated query failed to parse: {e}: {text}"));
                    accepted += 1;
                    continue;
                }
            };
            if !common::is_connected(&q) || !(1..=5).contains(&q.patterns.len()) {
                tally.mismatches.push(format!("ds{d}: generator produced an out-of-scope query: {text}"));
            }
            let Some(expected) = oracle_eval(&triples, &q, ORACLE_BUDGET) else {
                tally.redraws += 1;
                continue;
            };
            accepted += 1;
            tally.queries += 1;
            if !expected.is_empty() {
                tally.nonempty += 1;
            }
            let mut sound_probes = None;
            for mode in EngineMode::ALL {
                let (rows, stats) = run_mode(store_for(&stores, mode), &q, mode);
                if rows != expected {
                    tally.mismatches.push(format!(
                        "ds{d} {mode}: {} rows vs oracle {}: {text}",
                        rows.len(),
                        expected.len()
                    ));
                }
                match mode {
                    EngineMode::RmttSound => sound_probes = Some((stats.runtime_same_table_probes, rows)),
                    EngineMode::RmttPruned => {
                        let (sound, sound_rows) = sound_probes.take().expect("sound runs before pruned");
                        if sound_rows != rows {
                            tally.soundness.push(format!("ds{d}: pruned and sound results differ: {text}"));
                        }
                        tally.sound_probes += sound;
                        tally.pruned_probes += stats.runtime_same_table_probes;
                        if stats.runtime_same_table_probes > sound {
                            tally.soundness.push(format!(
                                "ds{d}: pruned probes {} > sound {sound}: {text}",
                                stats.runtime_same_table_probes
                            ));
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    tally
}

fn check_membership(d: u64, stores: &[AnyStore], tally: &mut CorpusTally) {
    let AnyStore::Rmtt(tt) = store_for(stores, EngineMode::RmttSound) else {
        unreachable!()
    };
    let dict = twinstore::engine::Store::dictionary(tt);
    let decode = |set: &std::collections::HashSet<twinstore::TermId>| -> BTreeSet<Term> {
        set.iter().map(|&id| dict.decode(id).unwrap().clone()).collect()
    };
    for i in 0..2 {
        let rows: Vec<Triple> = twin_set(tt, i).into_iter().collect();
        let (subs, objs) = common::brute_sets(&rows);
        let overlap: BTreeSet<Term> = subs.intersection(&objs).cloned().collect();
        if decode(tt.overlap(i)) != overlap {
            tally.soundness.push(format!("ds{d}: overlap[{i}] differs from sub∩obj"));
        }
        if decode(tt.sub_set(i)) != subs || decode(tt.obj_set(i)) != objs {
            tally.soundness.push(format!("ds{d}: sub/obj set of twin {i} differs"));
        }
    }
    let st = tt.stats();
    if st.fallback_count == 0 && st.reflexive_count == 0 {
        tally.zero_fallback_stores += 1;
        if !tt.overlap(0).is_empty() || !tt.overlap(1).is_empty() {
            tally.soundness.push(format!("ds{d}: no fallbacks or reflexive triples but overlap non-empty"));
        }
    }
}

fn criterion_4(t: &CorpusTally) -> Outcome {
    if t.mismatches.is_empty() {
        Ok(format!(
            "{DATASETS} datasets x {QUERIES_PER_DATASET} queries = {} queries ({} non-empty, {} over-budget redraws), 0 mismatches across 4 modes + oracle",
            t.queries, t.nonempty, t.redraws
        ))
    } else {
        Err(format!("{} mismatches, first: {}", t.mismatches.len(), t.mismatches[0]))
    }
}

fn criterion_5(t: &CorpusTally) -> Outcome {
    if t.soundness.is_empty() {
        Ok(format!(
            "overlap = sub∩obj on all {} stores, {} stores without fallback/reflexive have empty overlap, same-table probes pruned {} <= sound {}",
            DATASETS, t.zero_fallback_stores, t.pruned_probes, t.sound_probes
        ))
    } else {
        Err(format!("{} violations, first: {}", t.soundness.len(), t.soundness[0]))
    }
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn store_observables(store: &AnyStore, queries: &[String]) -> Vec<String> {
    let s = store.as_store();
    let mut out = vec![manifest_for(store).render()];
    for t in s.tables() {
        out.push(format!("{} {:?}", s.table_label(t), s.table_rows(t)));
    }
    let mode = EngineMode::for_store(store.kind(), true);
    for text in queries {
        let q = parse_query(text).expect("generated query parses");
        let p = plan(&q, s, mode).unwrap();
        let (rows, _) = run_mode(store, &q, mode);
        out.push(explain(&p));
        out.push(format!("{rows:?}"));
    }
    out
}

fn criterion_6() -> Outcome {
    let mut errs = Vec::new();

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let triples: Vec<Triple> = (0..10_000).map(|_| common::random_triple(&mut rng)).collect();
    let line_failures = triples
        .iter()
        .filter(|t| parse_line(&serialize(t)).ok().flatten().as_ref() != Some(*t))
        .count();
    if line_failures > 0 {
        errs.push(format!("{line_failures} of 10000 triples failed the line round trip"));
    }
    let mut doc = Vec::new();
    write_triples(&mut doc, &triples).unwrap();
    let reparsed = parse_str(std::str::from_utf8(&doc).unwrap(), ParseMode::Strict).map(|o| o.triples);
    if reparsed.as_ref().ok() != Some(&triples) {
        errs.push("document round trip differs".into());
    }

    let tmp = tempfile::tempdir().unwrap();
    let kinds = [EngineKind::Single, EngineKind::Vp, EngineKind::Rmtt];
    for k in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + k);
        let data = random_dataset(&mut rng);
        let mut queries = Vec::new();
        while queries.len() < 5 {
            let text = random_query(&mut rng, &data);
            let q = parse_query(&text).map_err(|e| e.to_string())?;
            if oracle_eval(&data, &q, ORACLE_BUDGET).is_some() {
                queries.push(text);
            }
        }
        let kind = kinds[k as usize % 3];
        let store = AnyStore::build(kind, &data);
        let dir = tmp.path().join(format!("s{k}"));
        save_store(&store, &dir).map_err(|e| e.to_string())?;
        let first = dir_bytes(&dir);
        let loaded = match load_store(&dir) {
            Ok(l) => l,
            Err(e) => {
                errs.push(format!("store {k} ({kind}): load failed: {e}"));
                continue;
            }
        };
        if store_observables(&store, &queries) != store_observables(&loaded, &queries) {
            errs.push(format!("store {k} ({kind}): observables differ after reload"));
        }
        save_store(&loaded, &dir).map_err(|e| e.to_string())?;
        if dir_bytes(&dir) != first {
            errs.push(format!("store {k} ({kind}): re-save not byte-identical"));
        }
    }

    let expected = [2, 6, 2, 5, 2, 1, 4, 5, 6, 2, 2, 4, 2, 1];
    let counts: Vec<usize> = SUITE_QUERIES
        .iter()
        .map(|(_, text)| parse_query(text).map_or(0, |q| q.patterns.len()))
        .collect();
    if counts != expected {
        errs.push(format!("appendix pattern counts {counts:?}"));
    }
    if errs.is_empty() {
        Ok(format!("10000 triples round-trip, 20 stores reload equal, pattern counts {counts:?}"))
    } else {
        Err(errs.join("; "))
    }
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_twinstore"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("twinstore {args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn criterion_7() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("default.nt");
    let csv = tmp.path().join("report.csv");
    let md = tmp.path().join("report.md");
    let queries = fixture("queries");
    let (d, q) = (data.to_str().unwrap(), queries.to_str().unwrap());
    run_cli(&["gen", "--seed", "42", "-o", d])?;
    run_cli(&["bench", "--data", d, "--queries", q, "--reps", "1", "--seed", "42", "-o", csv.to_str().unwrap()])?;
    run_cli(&["bench", "--data", d, "--queries", q, "--reps", "1", "--seed", "42", "-o", md.to_str().unwrap()])?;

    let mut errs = Vec::new();
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = csv_text.lines();
    if lines.next() != Some(twinstore::benchkit::CSV_HEADER) {
        errs.push("csv header".to_string());
    }
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    if rows.len() != 56 {
        errs.push(format!("{} csv rows", rows.len()));
    }
    let ids: BTreeSet<&str> = rows.iter().map(|r| r[0]).collect();
    for id in &ids {
        let engines: Vec<&str> = rows.iter().filter(|r| r[0] == *id).map(|r| r[1]).collect();
        let counts: BTreeSet<&str> = rows.iter().filter(|r| r[0] == *id).map(|r| r[2]).collect();
        if engines != ["single", "vp", "rmtt-sound", "rmtt-pruned"] {
            errs.push(format!("{id}: engines {engines:?}"));
        }
        if counts.len() != 1 {
            errs.push(format!("{id}: result counts differ {counts:?}"));
        }
    }
    let md_text = std::fs::read_to_string(&md).unwrap();
    let grid: Vec<&str> = md_text.lines().filter(|l| l.starts_with("| q")).collect();
    let header = md_text.lines().find(|l| l.starts_with("| Query")).unwrap_or("");
    let cols = |l: &str| l.trim_matches('|').split('|').count();
    if grid.len() != 14 || grid.iter().any(|l| cols(l) != cols(header)) || cols(header) != 10 {
        errs.push(format!("markdown grid {} rows, header {} columns", grid.len(), cols(header)));
    }
    if !header.contains("Time ms: single") || !header.contains("Self-joins: rmtt-pruned") {
        errs.push("markdown header lacks engine column groups".into());
    }
    if errs.is_empty() {
        Ok(format!("{} ids x 4 engines = {} csv rows, markdown 14 x ({} columns)", ids.len(), rows.len(), cols(header)))
    } else {
        Err(errs.join("; "))
    }
}

fn report(n: usize, name: &str, outcome: &Outcome, elapsed: Duration) -> bool {
    let (tag, detail) = match outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("[{tag}] criterion {n}: {name} ({:.2}s): {detail}", elapsed.as_secs_f64());
    outcome.is_ok()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut ok = true;
    let (r, t) = timed(criterion_1);
    ok &= report(1, "golden partition", &r, t);
    let (r, t) = timed(criterion_2);
    ok &= report(2, "magazine query outputs", &r, t);
    let (r, t) = timed(criterion_3);
    ok &= report(3, "self-join dominance", &r, t);
    let (tally, t) = timed(run_corpus);
    ok &= report(4, "engine equivalence oracle", &criterion_4(&tally), t);
    ok &= report(5, "overlap/pruning soundness", &criterion_5(&tally), Duration::ZERO);
    let (r, t) = timed(criterion_6);
    ok &= report(6, "parser and format round-trips", &r, t);
    let (r, t) = timed(criterion_7);
    ok &= report(7, "report shape", &r, t);
    if !ok {
        std::process::exit(1);
    }
}
