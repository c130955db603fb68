//! On-disk store directories.
//!
//! Layout:
//!
//! ```text
//! manifest        key=value lines, keys sorted
//! dict.tsv        id \t kind \t lexical   (N-Triples string escaping, ascending id)
//! table<K>.tsv    sid \t pid \t oid       (ascending SPO), K = 0..table_count
//! sub<i>.ids      rmtt only: sorted subject ids of twin i, one per line
//! obj<i>.ids      rmtt only: sorted object ids
//! overlap<i>.ids  rmtt only: sorted overlap ids
//! ```
//!
//! Indexes are rebuilt on load and every count in the manifest is checked
//! against the payload. A save writes into a sibling temporary directory
//! and renames it into place.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::engine::{AnyStore, BuildStats, EngineKind, SingleStore, TwinTables, VpStore};
use crate::model::{Dictionary, EncodedTriple, Term, TermId, TermKind};
use crate::ntriples::escape_literal;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest";

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("{}: missing manifest", .0.display())]
    MissingManifest(PathBuf),
    #[error("{file}: unsupported format_version {found} (expected {FORMAT_VERSION})")]
    Version { file: String, found: String },
    #[error("{file}: {what} mismatch (manifest says {expected}, found {found})")]
    CountMismatch {
        file: String,
        what: String,
        expected: String,
        found: String,
    },
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("{file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PersistError + '_ {
    move |source| PersistError::Io {
        file: path.display().to_string(),
        source,
    }
}

/// Parsed manifest: sorted key/value pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: BTreeMap<String, String>,
}

impl Manifest {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    fn require(&self, key: &str) -> Result<&str, PersistError> {
        self.get(key).ok_or_else(|| PersistError::Parse {
            file: MANIFEST.to_string(),
            line: 0,
            message: format!("missing key {key}"),
        })
    }

    fn require_num<T: std::str::FromStr>(&self, key: &str) -> Result<T, PersistError> {
        let raw = self.require(key)?;
        raw.parse().map_err(|_| PersistError::Parse {
            file: MANIFEST.to_string(),
            line: 0,
            message: format!("key {key}: not a number: {raw:?}"),
        })
    }

    fn require_pair(&self, key: &str) -> Result<[u64; 2], PersistError> {
        let raw = self.require(key)?;
        let bad = || PersistError::Parse {
            file: MANIFEST.to_string(),
            line: 0,
            message: format!("key {key}: expected two comma-separated counts, got {raw:?}"),
        };
        let (a, b) = raw.split_once(',').ok_or_else(bad)?;
        Ok([a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?])
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self, PersistError> {
        let mut m = Manifest::default();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| PersistError::Parse {
                file: MANIFEST.to_string(),
                line: i + 1,
                message: "expected key=value".into(),
            })?;
            m.entries.insert(k.to_string(), v.to_string());
        }
        Ok(m)
    }
}

pub fn manifest_for(store: &AnyStore) -> Manifest {
    let s = store.as_store();
    let mut m = Manifest::default();
    m.set("format_version", FORMAT_VERSION);
    m.set("engine", store.kind());
    m.set("triple_count", s.triple_count());
    m.set("dict_size", s.dictionary().len());
    let tables = s.tables();
    m.set("table_count", tables.len());
    for (k, t) in tables.iter().enumerate() {
        m.set(&format!("table{k}_rows"), s.table_rows(*t).len());
    }
    if let AnyStore::Rmtt(tt) = store {
        let st = tt.stats();
        m.set("current", tt.current());
        m.set("switch_count", st.switch_count);
        m.set("fallback_count", st.fallback_count);
        m.set("reflexive_count", st.reflexive_count);
        m.set(
            "triples_per_twin",
            format!("{},{}", st.triples_per_twin[0], st.triples_per_twin[1]),
        );
        m.set("overlap_sizes", format!("{},{}", tt.overlap(0).len(), tt.overlap(1).len()));
        m.set(
            "containment_ratios",
            format!("{:.6},{:.6}", tt.containment_ratio(0), tt.containment_ratio(1)),
        );
    }
    m
}

fn write_file(dir: &Path, name: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), PersistError> {
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(io_err(&path))
}

fn write_ids(dir: &Path, name: &str, set: &HashSet<TermId>) -> Result<(), PersistError> {
    let mut ids: Vec<u32> = set.iter().map(|t| t.0).collect();
    ids.sort_unstable();
    write_file(dir, name, |w| {
        for id in ids {
            writeln!(w, "{id}")?;
        }
        Ok(())
    })
}

fn write_payload(store: &AnyStore, dir: &Path) -> Result<(), PersistError> {
    let s = store.as_store();
    write_file(dir, "dict.tsv", |w| {
        let mut lex = String::new();
        for (i, t) in s.dictionary().terms().iter().enumerate() {
            lex.clear();
            escape_literal(t.lexical(), &mut lex);
            writeln!(w, "{i}\t{}\t{lex}", t.kind().as_str())?;
        }
        Ok(())
    })?;
    for (k, t) in s.tables().into_iter().enumerate() {
        let rows = s.table_rows(t);
        write_file(dir, &format!("table{k}.tsv"), |w| {
            for r in rows {
                writeln!(w, "{}\t{}\t{}", r.s, r.p, r.o)?;
            }
            Ok(())
        })?;
    }
    if let AnyStore::Rmtt(tt) = store {
        for i in 0..2 {
            write_ids(dir, &format!("sub{i}.ids"), tt.sub_set(i))?;
            write_ids(dir, &format!("obj{i}.ids"), tt.obj_set(i))?;
            write_ids(dir, &format!("overlap{i}.ids"), tt.overlap(i))?;
        }
    }
    write_file(dir, MANIFEST, |w| w.write_all(manifest_for(store).render().as_bytes()))
}

/// Writes `store` to `dir`, replacing any previous contents.
pub fn save_store(store: &AnyStore, dir: &Path) -> Result<(), PersistError> {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "store".to_string());
    let parent = match dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(io_err(&parent))?;
    let tmp = parent.join(format!(".{name}.tmp-{}", std::process::id()));
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(io_err(&tmp))?;
    }
    fs::create_dir(&tmp).map_err(io_err(&tmp))?;
    if let Err(e) = write_payload(store, &tmp) {
        let _ = fs::remove_dir_all(&tmp);
        return Err(e);
    }
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::rename(&tmp, dir).map_err(io_err(dir))
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, PersistError> {
    let path = dir.join(MANIFEST);
    if !path.is_file() {
        return Err(PersistError::MissingManifest(dir.to_path_buf()));
    }
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let m = Manifest::parse(&text)?;
    let version = m.require("format_version")?;
    if version != FORMAT_VERSION.to_string() {
        return Err(PersistError::Version {
            file: MANIFEST.to_string(),
            found: version.to_string(),
        });
    }
    Ok(m)
}

fn unescape(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        let c = match chars.next() {
            Some('t') => '\t',
            Some('n') => '\n',
            Some('r') => '\r',
            Some('b') => '\u{8}',
            Some('f') => '\u{c}',
            Some('"') => '"',
            Some('\'') => '\'',
            Some('\\') => '\\',
            Some(u @ ('u' | 'U')) => {
                let n = if u == 'u' { 4 } else { 8 };
                let hex: String = chars.by_ref().take(n).collect();
                let code = u32::from_str_radix(&hex, 16).map_err(|_| format!("bad escape \\{u}{hex}"))?;
                char::from_u32(code).ok_or_else(|| format!("bad code point {code:X}"))?
            }
            other => return Err(format!("bad escape {other:?}")),
        };
        out.push(c);
    }
    Ok(out)
}

fn lines_of(dir: &Path, name: &str) -> Result<Vec<String>, PersistError> {
    let path = dir.join(name);
    let file = fs::File::open(&path).map_err(io_err(&path))?;
    BufReader::new(file)
        .lines()
        .collect::<Result<_, _>>()
        .map_err(io_err(&path))
}

fn parse_err(file: &str, line: usize, message: impl Into<String>) -> PersistError {
    PersistError::Parse {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

fn read_dict(dir: &Path) -> Result<Dictionary, PersistError> {
    let file = "dict.tsv";
    let mut terms = Vec::new();
    for (i, line) in lines_of(dir, file)?.iter().enumerate() {
        let mut cols = line.splitn(3, '\t');
        let (Some(id), Some(kind), Some(lex)) = (cols.next(), cols.next(), cols.next()) else {
            return Err(parse_err(file, i + 1, "expected 3 tab-separated columns"));
        };
        if id != i.to_string() {
            return Err(parse_err(file, i + 1, format!("expected id {i}, found {id}")));
        }
        let kind = TermKind::parse(kind).ok_or_else(|| parse_err(file, i + 1, format!("unknown kind {kind:?}")))?;
        let lex = unescape(lex).map_err(|m| parse_err(file, i + 1, m))?;
        terms.push(Term::new(kind, lex).map_err(|e| parse_err(file, i + 1, e.to_string()))?);
    }
    Dictionary::from_terms(terms).ok_or_else(|| parse_err(file, 0, "duplicate term"))
}

fn read_table(dir: &Path, name: &str, dict_size: usize) -> Result<Vec<EncodedTriple>, PersistError> {
    let mut rows = Vec::new();
    for (i, line) in lines_of(dir, name)?.iter().enumerate() {
        let ids: Vec<u32> = line
            .split('\t')
            .map(|x| x.parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| parse_err(name, i + 1, "expected numeric ids"))?;
        let [s, p, o] = ids[..] else {
            return Err(parse_err(name, i + 1, "expected 3 columns"));
        };
        if [s, p, o].iter().any(|&x| x as usize >= dict_size) {
            return Err(parse_err(name, i + 1, "id outside the dictionary"));
        }
        let t = EncodedTriple::new(TermId(s), TermId(p), TermId(o));
        if rows.last().is_some_and(|prev: &EncodedTriple| *prev >= t) {
            return Err(parse_err(name, i + 1, "rows not in ascending SPO order"));
        }
        rows.push(t);
    }
    Ok(rows)
}

fn read_ids(dir: &Path, name: &str) -> Result<HashSet<TermId>, PersistError> {
    lines_of(dir, name)?
        .iter()
        .enumerate()
        .map(|(i, l)| l.parse().map(TermId).map_err(|_| parse_err(name, i + 1, "expected an id")))
        .collect()
}

fn check<T: PartialEq + ToString>(file: &str, what: &str, expected: T, found: T) -> Result<(), PersistError> {
    if expected == found {
        Ok(())
    } else {
        Err(PersistError::CountMismatch {
            file: file.to_string(),
            what: what.to_string(),
            expected: expected.to_string(),
            found: found.to_string(),
        })
    }
}

pub fn load_store(dir: &Path) -> Result<AnyStore, PersistError> {
    let m = read_manifest(dir)?;
    let engine = m.require("engine")?;
    let kind = EngineKind::parse(engine).ok_or_else(|| parse_err(MANIFEST, 0, format!("unknown engine {engine:?}")))?;
    let dict = read_dict(dir)?;
    check("dict.tsv", "dict_size", m.require_num::<usize>("dict_size")?, dict.len())?;
    let table_count: usize = m.require_num("table_count")?;
    let mut tables = Vec::with_capacity(table_count);
    for k in 0..table_count {
        let name = format!("table{k}.tsv");
        let rows = read_table(dir, &name, dict.len())?;
        check(&name, &format!("table{k}_rows"), m.require_num::<usize>(&format!("table{k}_rows"))?, rows.len())?;
        tables.push(rows);
    }
    let total: usize = tables.iter().map(Vec::len).sum();
    check(MANIFEST, "triple_count", m.require_num::<usize>("triple_count")?, total)?;

    let store = match kind {
        EngineKind::Single => {
            check(MANIFEST, "table_count", 1, table_count)?;
            AnyStore::Single(SingleStore::from_parts(dict, &tables[0]))
        }
        EngineKind::Vp => {
            let all: Vec<EncodedTriple> = tables.concat();
            let vp = VpStore::from_parts(dict, &all);
            check(MANIFEST, "table_count", table_count, vp.predicate_count())?;
            for (k, rows) in tables.iter().enumerate() {
                if rows.windows(2).any(|w| w[0].p != w[1].p) {
                    return Err(parse_err(&format!("table{k}.tsv"), 0, "mixed predicates in one table"));
                }
            }
            AnyStore::Vp(vp)
        }
        EngineKind::Rmtt => {
            check(MANIFEST, "table_count", 2, table_count)?;
            let stats = BuildStats {
                switch_count: m.require_num("switch_count")?,
                fallback_count: m.require_num("fallback_count")?,
                reflexive_count: m.require_num("reflexive_count")?,
                triples_per_twin: m.require_pair("triples_per_twin")?,
            };
            for (i, rows) in tables.iter().enumerate() {
                check(&format!("table{i}.tsv"), "triples_per_twin", stats.triples_per_twin[i], rows.len() as u64)?;
            }
            let current: usize = m.require_num("current")?;
            if current > 1 {
                return Err(parse_err(MANIFEST, 0, "current must be 0 or 1"));
            }
            let [r0, r1]: [Vec<EncodedTriple>; 2] = tables.try_into().expect("two tables");
            let tt = TwinTables::from_parts(dict, [r0, r1], current, stats);
            let overlap_sizes = m.require_pair("overlap_sizes")?;
            for (i, &overlap_size) in overlap_sizes.iter().enumerate() {
                for (name, actual) in [
                    (format!("sub{i}.ids"), tt.sub_set(i)),
                    (format!("obj{i}.ids"), tt.obj_set(i)),
                    (format!("overlap{i}.ids"), tt.overlap(i)),
                ] {
                    let stored = read_ids(dir, &name)?;
                    if &stored != actual {
                        return Err(PersistError::CountMismatch {
                            file: name,
                            what: "membership set".into(),
                            expected: format!("{} ids recomputed from table{i}.tsv", actual.len()),
                            found: format!("{} ids", stored.len()),
                        });
                    }
                }
                check(&format!("overlap{i}.ids"), "overlap_sizes", overlap_size, tt.overlap(i).len() as u64)?;
            }
            AnyStore::Rmtt(tt)
        }
    };
    Ok(store)
}
