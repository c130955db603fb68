//! Line-oriented N-Triples reader and writer.
//!
//! Input is UTF-8. `\uXXXX` and `\UXXXXXXXX` escapes are accepted in IRIs
//! and literals; on output they are only produced for control characters
//! (and for the handful of ASCII characters an IRI may not contain).
//! A datatype (`^^<...>`) or language tag (`@en`) after a literal is
//! accepted and discarded, since terms carry no literal annotations.

use std::fmt;
use std::io::BufRead;

use thiserror::Error;

use crate::model::{Term, TermKind, Triple};

/// Position and reason for a rejected line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    /// 1-based physical line.
    pub line_number: usize,
    /// Byte offset inside the line.
    pub byte_offset: usize,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, byte {}: {}",
            self.line_number, self.byte_offset, self.message
        )
    }
}

#[derive(Debug, Error)]
pub enum NtError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("syntax error at {0}")]
    Syntax(ParseDiagnostic),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Strict,
    /// Bad lines are skipped and reported.
    Lenient,
}

#[derive(Debug, Default)]
pub struct ParseOutput {
    pub triples: Vec<Triple>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

type PResult<T> = Result<T, (usize, String)>;

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ') | Some('\t')) {
            self.pos += 1;
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err((self.pos, msg.into()))
    }

    fn hex_escape(&mut self, digits: usize) -> PResult<char> {
        let start = self.pos;
        let end = start + digits;
        let hex = self
            .src
            .get(start..end)
            .ok_or((start, "truncated unicode escape".to_string()))?;
        let code = u32::from_str_radix(hex, 16)
            .map_err(|_| (start, format!("invalid hex digits {hex:?} in escape")))?;
        let c = char::from_u32(code).ok_or((start, format!("invalid code point U+{code:X}")))?;
        self.pos = end;
        Ok(c)
    }

    fn iri(&mut self) -> PResult<Term> {
        debug_assert_eq!(self.peek(), Some('<'));
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return self.err("unterminated IRI"),
                Some('>') => break,
                Some('\\') => match self.bump() {
                    Some('u') => out.push(self.hex_escape(4)?),
                    Some('U') => out.push(self.hex_escape(8)?),
                    _ => return self.err("invalid escape in IRI"),
                },
                Some(c) if c == ' ' || c == '<' || c == '"' => {
                    return Err((self.pos - 1, format!("character {c:?} not allowed in IRI")))
                }
                Some(c) => out.push(c),
            }
        }
        if out.is_empty() {
            return self.err("empty IRI");
        }
        Ok(Term::iri(out))
    }

    fn blank(&mut self) -> PResult<Term> {
        // caller saw "_"
        self.pos += 1;
        if self.bump() != Some(':') {
            return self.err("expected ':' after '_' in blank node");
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' || c == '.' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        // a trailing '.' terminates the statement, not the label
        while self.pos > start && self.src[..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        if self.pos == start {
            return self.err("empty blank node label");
        }
        Ok(Term::blank(&self.src[start..self.pos]))
    }

    fn literal(&mut self) -> PResult<Term> {
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return self.err("unterminated literal"),
                Some('"') => break,
                Some('\\') => {
                    let c = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex_escape(4)?,
                        Some('U') => self.hex_escape(8)?,
                        _ => return self.err("invalid escape in literal"),
                    };
                    out.push(c);
                }
                Some(c) => out.push(c),
            }
        }
        // discard datatype or language tag
        if self.src[self.pos..].starts_with("^^") {
            self.pos += 2;
            if self.peek() != Some('<') {
                return self.err("expected datatype IRI after '^^'");
            }
            self.iri()?;
        } else if self.peek() == Some('@') {
            self.pos += 1;
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                self.pos += 1;
            }
            if self.pos == start {
                return self.err("empty language tag");
            }
        }
        Ok(Term::literal(out))
    }

    fn term(&mut self, role: &str) -> PResult<Term> {
        match self.peek() {
            Some('<') => self.iri(),
            Some('_') => self.blank(),
            Some('"') => self.literal(),
            None | Some('.') => self.err(format!("missing {role}")),
            Some(c) => self.err(format!("unexpected character {c:?} where {role} expected")),
        }
    }
}

fn parse_statement(line: &str) -> PResult<Option<Triple>> {
    let mut cur = Cursor { src: line, pos: 0 };
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let s_pos = cur.pos;
    let s = cur.term("subject")?;
    if s.kind() == TermKind::Literal {
        return Err((s_pos, "subject must be an IRI or blank node".into()));
    }
    cur.skip_ws();
    let p_pos = cur.pos;
    let p = cur.term("predicate")?;
    if p.kind() != TermKind::Iri {
        return Err((p_pos, "predicate must be an IRI".into()));
    }
    cur.skip_ws();
    let o = cur.term("object")?;
    cur.skip_ws();
    if cur.bump() != Some('.') {
        return Err((cur.pos.saturating_sub(1), "expected '.' after object".into()));
    }
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return cur.err("trailing characters after '.'");
    }
    Ok(Some(Triple { s, p, o }))
}

/// Parses one physical line. Blank and comment lines yield `Ok(None)`.
/// The diagnostic's `line_number` is 1; stream readers overwrite it.
pub fn parse_line(line: &str) -> Result<Option<Triple>, ParseDiagnostic> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    parse_statement(line).map_err(|(byte_offset, message)| ParseDiagnostic {
        line_number: 1,
        byte_offset,
        message,
    })
}

/// Streaming iterator over the statements of an N-Triples source.
pub struct TripleReader<R> {
    input: R,
    line_number: usize,
    buf: String,
}

impl<R: BufRead> TripleReader<R> {
    pub fn new(input: R) -> Self {
        TripleReader {
            input,
            line_number: 0,
            buf: String::new(),
        }
    }
}

impl<R: BufRead> Iterator for TripleReader<R> {
    type Item = Result<Result<Triple, ParseDiagnostic>, std::io::Error>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.input.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e)),
            }
            self.line_number += 1;
            let line = self.buf.strip_suffix('\n').unwrap_or(&self.buf);
            match parse_line(line) {
                Ok(None) => continue,
                Ok(Some(t)) => return Some(Ok(Ok(t))),
                Err(mut d) => {
                    d.line_number = self.line_number;
                    return Some(Ok(Err(d)));
                }
            }
        }
    }
}

/// Reads a whole stream. In strict mode the first bad line aborts.
pub fn parse_stream<R: BufRead>(input: R, mode: ParseMode) -> Result<ParseOutput, NtError> {
    let mut out = ParseOutput::default();
    for item in TripleReader::new(input) {
        match item? {
            Ok(t) => out.triples.push(t),
            Err(d) if mode == ParseMode::Strict => return Err(NtError::Syntax(d)),
            Err(d) => out.diagnostics.push(d),
        }
    }
    Ok(out)
}

pub fn parse_str(text: &str, mode: ParseMode) -> Result<ParseOutput, NtError> {
    parse_stream(text.as_bytes(), mode)
}

fn push_uchar(out: &mut String, c: char) {
    let code = c as u32;
    if code <= 0xFFFF {
        out.push_str(&format!("\\u{code:04X}"));
    } else {
        out.push_str(&format!("\\U{code:08X}"));
    }
}

/// Escapes a literal value for the inside of a quoted N-Triples string.
pub fn escape_literal(value: &str, out: &mut String) {
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => push_uchar(out, c),
            c => out.push(c),
        }
    }
}

fn escape_iri(iri: &str, out: &mut String) {
    for c in iri.chars() {
        match c {
            '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => push_uchar(out, c),
            c if (c as u32) <= 0x20 || c.is_control() => push_uchar(out, c),
            c => out.push(c),
        }
    }
}

pub fn format_term(t: &Term) -> String {
    let mut out = String::with_capacity(t.lexical().len() + 4);
    write_term(t, &mut out);
    out
}

fn write_term(t: &Term, out: &mut String) {
    match t.kind() {
        TermKind::Iri => {
            out.push('<');
            escape_iri(t.lexical(), out);
            out.push('>');
        }
        TermKind::Literal => {
            out.push('"');
            escape_literal(t.lexical(), out);
            out.push('"');
        }
        TermKind::BlankNode => {
            out.push_str("_:");
            out.push_str(t.lexical());
        }
    }
}

/// One N-Triples statement, without the trailing newline.
pub fn serialize(t: &Triple) -> String {
    let mut out = String::new();
    write_term(&t.s, &mut out);
    out.push(' ');
    write_term(&t.p, &mut out);
    out.push(' ');
    write_term(&t.o, &mut out);
    out.push_str(" .");
    out
}

pub fn write_triples<W: std::io::Write>(mut w: W, triples: &[Triple]) -> std::io::Result<()> {
    for t in triples {
        writeln!(w, "{}", serialize(t))?;
    }
    Ok(())
}
