//! RDF terms, triples and the dictionary that maps terms to dense ids.
//!
//! Every engine in the crate works on [`EncodedTriple`]s; the [`Dictionary`]
//! is the only place lexical forms live.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    Iri,
    Literal,
    BlankNode,
}

impl TermKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TermKind::Iri => "iri",
            TermKind::Literal => "literal",
            TermKind::BlankNode => "bnode",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "iri" => Some(TermKind::Iri),
            "literal" => Some(TermKind::Literal),
            "bnode" => Some(TermKind::BlankNode),
            _ => None,
        }
    }
}

/// A lexical RDF term.
///
/// `lexical` holds the IRI without angle brackets, the literal value without
/// quotes, or the blank-node label without `_:`. Literals carry no datatype
/// or language tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    kind: TermKind,
    lexical: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("{0} terms must have a non-empty lexical form")]
    EmptyLexical(&'static str),
    #[error("predicate must be an IRI, found {0}")]
    BadPredicate(TermKind),
    #[error("subject must be an IRI or blank node, found {0}")]
    BadSubject(TermKind),
    #[error("unknown term id {0}")]
    UnknownId(u32),
}

impl fmt::Display for TermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Term {
    pub fn new(kind: TermKind, lexical: impl Into<String>) -> Result<Self, ModelError> {
        let lexical = lexical.into();
        if lexical.is_empty() && kind != TermKind::Literal {
            return Err(ModelError::EmptyLexical(kind.as_str()));
        }
        Ok(Term { kind, lexical })
    }

    /// Panics on an empty IRI; intended for literals known at compile time.
    pub fn iri(lexical: impl Into<String>) -> Self {
        Term::new(TermKind::Iri, lexical).expect("IRI must be non-empty")
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Term {
            kind: TermKind::Literal,
            lexical: lexical.into(),
        }
    }

    pub fn blank(label: impl Into<String>) -> Self {
        Term::new(TermKind::BlankNode, label).expect("blank node label must be non-empty")
    }

    pub fn kind(&self) -> TermKind {
        self.kind
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn is_iri(&self) -> bool {
        self.kind == TermKind::Iri
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::ntriples::format_term(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub s: Term,
    pub p: Term,
    pub o: Term,
}

impl Triple {
    /// Checks the positional constraints: IRI predicate, IRI or blank subject.
    pub fn new(s: Term, p: Term, o: Term) -> Result<Self, ModelError> {
        if p.kind != TermKind::Iri {
            return Err(ModelError::BadPredicate(p.kind));
        }
        if s.kind == TermKind::Literal {
            return Err(ModelError::BadSubject(s.kind));
        }
        Ok(Triple { s, p, o })
    }
}

/// Dense dictionary id. Ids are assigned from 0 in first-seen order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TermId(pub u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A triple of dictionary ids. The derived ordering is SPO.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EncodedTriple {
    pub s: TermId,
    pub p: TermId,
    pub o: TermId,
}

impl EncodedTriple {
    pub fn new(s: TermId, p: TermId, o: TermId) -> Self {
        EncodedTriple { s, p, o }
    }

    /// Component by position: 0 = subject, 1 = predicate, 2 = object.
    pub fn get(&self, pos: usize) -> TermId {
        match pos {
            0 => self.s,
            1 => self.p,
            2 => self.o,
            _ => panic!("triple position out of range: {pos}"),
        }
    }

    pub fn from_array(a: [TermId; 3]) -> Self {
        EncodedTriple::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [TermId; 3] {
        [self.s, self.p, self.o]
    }
}

/// Bidirectional term ↔ id mapping.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dictionary {
    term_to_id: HashMap<Term, TermId>,
    id_to_term: Vec<Term>,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn encode(&mut self, term: &Term) -> TermId {
        if let Some(&id) = self.term_to_id.get(term) {
            return id;
        }
        let id = TermId(u32::try_from(self.id_to_term.len()).expect("dictionary overflow"));
        self.id_to_term.push(term.clone());
        self.term_to_id.insert(term.clone(), id);
        id
    }

    pub fn encode_triple(&mut self, t: &Triple) -> EncodedTriple {
        EncodedTriple::new(self.encode(&t.s), self.encode(&t.p), self.encode(&t.o))
    }

    pub fn decode(&self, id: TermId) -> Result<&Term, ModelError> {
        self.id_to_term.get(id.index()).ok_or(ModelError::UnknownId(id.0))
    }

    pub fn decode_triple(&self, t: &EncodedTriple) -> Result<Triple, ModelError> {
        Ok(Triple {
            s: self.decode(t.s)?.clone(),
            p: self.decode(t.p)?.clone(),
            o: self.decode(t.o)?.clone(),
        })
    }

    /// Id of a term without inserting it.
    pub fn lookup(&self, term: &Term) -> Option<TermId> {
        self.term_to_id.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.id_to_term.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_term.is_empty()
    }

    /// Terms in id order.
    pub fn terms(&self) -> &[Term] {
        &self.id_to_term
    }

    /// Rebuilds a dictionary from terms listed in id order. Returns `None`
    /// if the list holds a duplicate.
    pub fn from_terms(terms: Vec<Term>) -> Option<Self> {
        let mut term_to_id = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if term_to_id.insert(t.clone(), TermId(i as u32)).is_some() {
                return None;
            }
        }
        Some(Dictionary {
            term_to_id,
            id_to_term: terms,
        })
    }
}

/// Encodes a triple stream, dropping exact duplicates while keeping the
/// first-seen order.
pub fn encode_distinct(dict: &mut Dictionary, triples: &[Triple]) -> Vec<EncodedTriple> {
    let mut seen = std::collections::HashSet::with_capacity(triples.len());
    let mut out = Vec::with_capacity(triples.len());
    for t in triples {
        let e = dict.encode_triple(t);
        if seen.insert(e) {
            out.push(e);
        }
    }
    out
}
