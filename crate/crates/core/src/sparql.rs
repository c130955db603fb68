//! Basic-graph-pattern subset of SPARQL.
//!
//! Accepted: `PREFIX` declarations, `SELECT *` or a variable list (commas
//! between variables allowed), an optional `WHERE`, and one `{ ... }` block
//! of triple patterns separated by `.`. Terms are variables, `<iri>`,
//! prefixed names, `a`, and quoted literals.
//!
//! In the default tolerant mode three listing quirks are also accepted and
//! noted in [`BgpQuery::tolerances`]: bare `http://` IRIs without brackets,
//! whitespace inside a bracketed IRI (a line-wrapped IRI), and stray commas
//! between the terms of a pattern. Strict mode rejects all three.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::index::TriplePattern;
use crate::model::{Dictionary, Term, TermId};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternTerm {
    Var(String),
    Iri(Term),
    Literal(Term),
}

impl PatternTerm {
    pub fn var(&self) -> Option<&str> {
        match self {
            PatternTerm::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn constant(&self) -> Option<&Term> {
        match self {
            PatternTerm::Var(_) => None,
            PatternTerm::Iri(t) | PatternTerm::Literal(t) => Some(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatternTriple {
    pub s: PatternTerm,
    pub p: PatternTerm,
    pub o: PatternTerm,
}

impl PatternTriple {
    pub fn terms(&self) -> [&PatternTerm; 3] {
        [&self.s, &self.p, &self.o]
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.terms().into_iter().filter_map(PatternTerm::var)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    All,
    Vars(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BgpQuery {
    pub prefixes: BTreeMap<String, String>,
    pub projection: Projection,
    pub patterns: Vec<PatternTriple>,
    /// Non-standard syntax accepted in tolerant mode, with positions.
    pub tolerances: Vec<String>,
}

impl BgpQuery {
    /// Variables in order of first appearance in the patterns.
    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for p in &self.patterns {
            for v in p.vars() {
                if !out.iter().any(|x| x == v) {
                    out.push(v.to_string());
                }
            }
        }
        out
    }

    /// Projected variables; `SELECT *` expands to [`Self::variables`].
    pub fn select_vars(&self) -> Vec<String> {
        match &self.projection {
            Projection::All => self.variables(),
            Projection::Vars(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct QueryDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for QueryDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParseOptions {
    pub strict: bool,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    opts: ParseOptions,
    prefixes: BTreeMap<String, String>,
    tolerances: Vec<String>,
}

type PResult<T> = Result<T, QueryDiagnostic>;

fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_local_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '.'
}

impl<'a> Parser<'a> {
    fn line_col(&self, pos: usize) -> (usize, usize) {
        let before = &self.src[..pos.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.rfind('\n').map_or(before.chars().count(), |i| before[i + 1..].chars().count()) + 1;
        (line, col)
    }

    fn diag_at<T>(&self, pos: usize, msg: impl Into<String>) -> PResult<T> {
        let (line, column) = self.line_col(pos);
        Err(QueryDiagnostic {
            line,
            column,
            message: msg.into(),
        })
    }

    fn tolerate(&mut self, pos: usize, what: &str) -> PResult<()> {
        if self.opts.strict {
            return self.diag_at(pos, format!("{what} (rejected in strict mode)"));
        }
        let (line, col) = self.line_col(pos);
        self.tolerances.push(format!("{line}:{col}: {what}"));
        Ok(())
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => self.pos += c.len_utf8(),
                Some('#') => match self.rest().find('\n') {
                    Some(i) => self.pos += i + 1,
                    None => self.pos = self.src.len(),
                },
                _ => break,
            }
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        let r = self.rest();
        if r.len() >= kw.len()
            && r[..kw.len()].eq_ignore_ascii_case(kw)
            && !r[kw.len()..].chars().next().is_some_and(is_name_char)
        {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn bracket_iri(&mut self) -> PResult<String> {
        let start = self.pos;
        self.pos += 1;
        let Some(end) = self.rest().find('>') else {
            return self.diag_at(start, "unterminated IRI");
        };
        let raw = &self.rest()[..end];
        self.pos += end + 1;
        if raw.chars().any(char::is_whitespace) {
            self.tolerate(start, "whitespace inside IRI removed")?;
            Ok(raw.chars().filter(|c| !c.is_whitespace()).collect())
        } else if raw.is_empty() {
            self.diag_at(start, "empty IRI")
        } else {
            Ok(raw.to_string())
        }
    }

    fn prefix_decl(&mut self) -> PResult<()> {
        self.skip_ws();
        let start = self.pos;
        let name_len = self
            .rest()
            .find(|c: char| !(is_name_char(c) || c == '-' || c == '.'))
            .unwrap_or(self.rest().len());
        let name = self.rest()[..name_len].to_string();
        self.pos += name_len;
        if self.peek() != Some(':') {
            return self.diag_at(start, "expected prefix name followed by ':'");
        }
        self.pos += 1;
        self.skip_ws();
        if self.peek() != Some('<') {
            return self.diag_at(self.pos, "expected <iri> in PREFIX declaration");
        }
        let iri = self.bracket_iri()?;
        self.prefixes.insert(name, iri);
        Ok(())
    }

    fn variable(&mut self) -> PResult<String> {
        let start = self.pos;
        self.pos += 1;
        let r = self.rest();
        if !r.chars().next().is_some_and(is_name_start) {
            return self.diag_at(start, "invalid variable name");
        }
        let len = r.find(|c: char| !is_name_char(c)).unwrap_or(r.len());
        let name = r[..len].to_string();
        self.pos += len;
        Ok(name)
    }

    fn literal(&mut self) -> PResult<Term> {
        let start = self.pos;
        self.pos += 1;
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        loop {
            let Some((i, c)) = chars.next() else {
                return self.diag_at(start, "unterminated literal");
            };
            match c {
                '"' => {
                    self.pos += i + 1;
                    break;
                }
                '\\' => {
                    let esc = match chars.next() {
                        Some((_, 't')) => '\t',
                        Some((_, 'n')) => '\n',
                        Some((_, 'r')) => '\r',
                        Some((_, 'b')) => '\u{8}',
                        Some((_, 'f')) => '\u{c}',
                        Some((_, '"')) => '"',
                        Some((_, '\'')) => '\'',
                        Some((_, '\\')) => '\\',
                        Some((_, u @ ('u' | 'U'))) => {
                            let n = if u == 'u' { 4 } else { 8 };
                            let hex: String = chars.by_ref().take(n).map(|(_, c)| c).collect();
                            match u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32) {
                                Some(c) if hex.len() == n => c,
                                _ => return self.diag_at(start, "invalid \\u escape in literal"),
                            }
                        }
                        _ => return self.diag_at(start, "invalid escape in literal"),
                    };
                    out.push(esc);
                }
                c => out.push(c),
            }
        }
        Ok(Term::literal(out))
    }

    fn term(&mut self) -> PResult<PatternTerm> {
        let start = self.pos;
        let r = self.rest();
        match self.peek() {
            None => self.diag_at(start, "unterminated pattern block"),
            Some('?') | Some('$') => Ok(PatternTerm::Var(self.variable()?)),
            Some('<') => Ok(PatternTerm::Iri(Term::iri(self.bracket_iri()?))),
            Some('"') => Ok(PatternTerm::Literal(self.literal()?)),
            Some(_) if r.starts_with("http://") || r.starts_with("https://") => {
                let len = r
                    .find(|c: char| c.is_whitespace() || matches!(c, '}' | ',' | '<' | '>' | '"'))
                    .unwrap_or(r.len());
                let mut iri = &r[..len];
                while let Some(stripped) = iri.strip_suffix('.') {
                    iri = stripped;
                }
                self.pos += iri.len();
                self.tolerate(start, "bare IRI without angle brackets")?;
                Ok(PatternTerm::Iri(Term::iri(iri)))
            }
            Some('a') if !r[1..].chars().next().is_some_and(|c| is_local_char(c) || c == ':') => {
                self.pos += 1;
                Ok(PatternTerm::Iri(Term::iri(RDF_TYPE)))
            }
            Some(c) if c == ':' || is_name_start(c) => {
                let plen = r.find(|c: char| !(is_name_char(c) || c == '-' || c == '.')).unwrap_or(r.len());
                if !r[plen..].starts_with(':') {
                    return self.diag_at(start, format!("unexpected token {:?}", &r[..plen.max(1)]));
                }
                let prefix = &r[..plen];
                let after = &r[plen + 1..];
                let mut llen = after.find(|c: char| !is_local_char(c)).unwrap_or(after.len());
                while llen > 0 && after[..llen].ends_with('.') {
                    llen -= 1;
                }
                let local = &after[..llen];
                let Some(base) = self.prefixes.get(prefix) else {
                    return self.diag_at(start, format!("undeclared prefix '{prefix}:'"));
                };
                let iri = format!("{base}{local}");
                self.pos += plen + 1 + llen;
                if iri.is_empty() {
                    return self.diag_at(start, "empty IRI");
                }
                Ok(PatternTerm::Iri(Term::iri(iri)))
            }
            Some(c) => self.diag_at(start, format!("unexpected character {c:?}")),
        }
    }

    fn skip_stray_commas(&mut self) -> PResult<()> {
        loop {
            self.skip_ws();
            if self.peek() == Some(',') {
                let at = self.pos;
                self.pos += 1;
                self.tolerate(at, "stray comma between pattern terms")?;
            } else {
                return Ok(());
            }
        }
    }

    fn block(&mut self) -> PResult<Vec<PatternTriple>> {
        let open = self.pos;
        self.pos += 1;
        let mut patterns = Vec::new();
        loop {
            self.skip_stray_commas()?;
            match self.peek() {
                None => return self.diag_at(open, "unterminated pattern block"),
                Some('}') => {
                    self.pos += 1;
                    break;
                }
                _ => {}
            }
            let mut terms = Vec::with_capacity(3);
            for _ in 0..3 {
                self.skip_stray_commas()?;
                if matches!(self.peek(), Some('}') | Some('.')) {
                    return self.diag_at(self.pos, "incomplete triple pattern");
                }
                terms.push(self.term()?);
            }
            let o = terms.pop().unwrap();
            let p = terms.pop().unwrap();
            let s = terms.pop().unwrap();
            if matches!(p, PatternTerm::Literal(_)) {
                return self.diag_at(self.pos, "literal in predicate position");
            }
            patterns.push(PatternTriple { s, p, o });
            self.skip_stray_commas()?;
            match self.peek() {
                Some('.') => self.pos += 1,
                Some('}') => {}
                None => return self.diag_at(open, "unterminated pattern block"),
                Some(c) => return self.diag_at(self.pos, format!("expected '.' or '}}', found {c:?}")),
            }
        }
        if patterns.is_empty() {
            return self.diag_at(open, "empty pattern block");
        }
        Ok(patterns)
    }

    fn query(mut self) -> PResult<BgpQuery> {
        loop {
            self.skip_ws();
            if self.keyword("PREFIX") {
                self.prefix_decl()?;
            } else {
                break;
            }
        }
        if !self.keyword("SELECT") {
            return self.diag_at(self.pos, "expected SELECT");
        }
        self.skip_ws();
        if self.keyword("DISTINCT") || self.keyword("REDUCED") {
            return self.diag_at(self.pos, "DISTINCT/REDUCED are not supported");
        }
        let projection = if self.peek() == Some('*') {
            self.pos += 1;
            Projection::All
        } else {
            let mut vars = Vec::new();
            loop {
                self.skip_ws();
                match self.peek() {
                    Some('?') | Some('$') => vars.push(self.variable()?),
                    Some(',') if !vars.is_empty() => self.pos += 1,
                    _ => break,
                }
            }
            if vars.is_empty() {
                return self.diag_at(self.pos, "expected '*' or variables after SELECT");
            }
            Projection::Vars(vars)
        };
        self.skip_ws();
        self.keyword("WHERE");
        self.skip_ws();
        if self.peek() != Some('{') {
            return self.diag_at(self.pos, "expected '{'");
        }
        let patterns = self.block()?;
        self.skip_ws();
        if self.pos < self.src.len() {
            return self.diag_at(self.pos, "unexpected text after pattern block");
        }
        let query = BgpQuery {
            prefixes: self.prefixes,
            projection,
            patterns,
            tolerances: self.tolerances,
        };
        if let Projection::Vars(vars) = &query.projection {
            let known = query.variables();
            if let Some(v) = vars.iter().find(|v| !known.contains(v)) {
                return Err(QueryDiagnostic {
                    line: 1,
                    column: 1,
                    message: format!("selected variable ?{v} does not occur in any pattern"),
                });
            }
        }
        Ok(query)
    }
}

pub fn parse_query(text: &str) -> Result<BgpQuery, QueryDiagnostic> {
    parse_query_with(text, ParseOptions::default())
}

pub fn parse_query_with(text: &str, opts: ParseOptions) -> Result<BgpQuery, QueryDiagnostic> {
    Parser {
        src: text,
        pos: 0,
        opts,
        prefixes: BTreeMap::new(),
        tolerances: Vec::new(),
    }
    .query()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolvedPattern {
    Pattern(TriplePattern),
    /// A constant is absent from the dictionary; nothing can match.
    Empty,
}

/// Maps a query pattern onto dictionary ids. Bound variables become fixed
/// positions, unbound ones stay open.
pub fn pattern_to_triple_pattern(
    p: &PatternTriple,
    dict: &Dictionary,
    bindings: &HashMap<String, TermId>,
) -> ResolvedPattern {
    let mut ids = [None; 3];
    for (slot, term) in p.terms().into_iter().enumerate() {
        ids[slot] = match term {
            PatternTerm::Var(v) => bindings.get(v).copied(),
            PatternTerm::Iri(t) | PatternTerm::Literal(t) => match dict.lookup(t) {
                Some(id) => Some(id),
                None => return ResolvedPattern::Empty,
            },
        };
    }
    ResolvedPattern::Pattern(TriplePattern::new(ids[0], ids[1], ids[2]))
}
