//! Hand-written lexer and recursive-descent parser for the input language.
//!
//! ```text
//! program   ::= statement*
//! statement ::= atom [":-" body] "." | ":-" [body] "." | [int] "{" [atom (";" atom)*] "}" "."
//! body      ::= literal ("," literal)*
//! literal   ::= ["not"] atom
//! atom      ::= ident ["(" term ("," term)* ")"]
//! term      ::= ident | Variable | int
//! ```
//!
//! `%` starts a comment that runs to the end of the line.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::program::{Atom, Constant, Literal, Program, Rule, Symbol, Term};

/// Location of a token in the source text. Lines and columns are 1-based,
/// `start..end` are byte offsets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub start: usize,
    pub end: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
}

impl ParseError {
    fn new(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError { span, message: message.into() }
    }

    /// `file:line:col: message`.
    pub fn with_file(&self, file: &str) -> String {
        format!("{file}:{self}")
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Dot,
    If,
    Colon,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Var(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::If => f.write_str("`:-`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut line_start) = (0usize, 1usize, 0usize);
    while i < bytes.len() {
        let c = bytes[i];
        let span_at = |start: usize, end: usize| SourceSpan { line, column: start - line_start + 1, start, end };
        match c {
            b'\n' => {
                i += 1;
                line += 1;
                line_start = i;
            }
            b' ' | b'\t' | b'\r' => i += 1,
            b'%' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' | b')' | b'{' | b'}' | b',' | b';' | b'.' => {
                let tok = match c {
                    b'(' => Tok::LParen,
                    b')' => Tok::RParen,
                    b'{' => Tok::LBrace,
                    b'}' => Tok::RBrace,
                    b',' => Tok::Comma,
                    b';' => Tok::Semi,
                    _ => Tok::Dot,
                };
                out.push((tok, span_at(i, i + 1)));
                i += 1;
            }
            b':' => {
                if bytes.get(i + 1) == Some(&b'-') {
                    out.push((Tok::If, span_at(i, i + 2)));
                    i += 2;
                } else {
                    out.push((Tok::Colon, span_at(i, i + 1)));
                    i += 1;
                }
            }
            b'0'..=b'9' | b'-' => {
                let start = i;
                if c == b'-' {
                    i += 1;
                    if !bytes.get(i).is_some_and(u8::is_ascii_digit) {
                        return Err(ParseError::new(span_at(start, i), "unexpected `-`"));
                    }
                }
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let value = text[start..i]
                    .parse::<i64>()
                    .map_err(|_| ParseError::new(span_at(start, i), "integer out of range"))?;
                out.push((Tok::Int(value), span_at(start, i)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = text[start..i].to_string();
                let tok = if c.is_ascii_lowercase() { Tok::Ident(word) } else { Tok::Var(word) };
                out.push((tok, span_at(start, i)));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError::new(span_at(i, i + ch.len_utf8()), format!("unexpected character `{ch}`")));
            }
        }
    }
    let end = SourceSpan { line, column: bytes.len() - line_start + 1, start: bytes.len(), end: bytes.len() };
    out.push((Tok::Eof, end));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    arities: BTreeMap<Symbol, usize>,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(text)?, pos: 0, arities: BTreeMap::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<SourceSpan, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(&format!("{tok}")))
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::new(self.span(), format!("expected {wanted}, found {}", self.peek()))
    }

    fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    fn statement(&mut self) -> Result<Rule, ParseError> {
        let start = self.span();
        let rule = match self.peek().clone() {
            Tok::If => {
                self.bump();
                let body = if *self.peek() == Tok::Dot { Vec::new() } else { self.body()? };
                Rule::constraint(body)
            }
            Tok::Int(_) | Tok::LBrace => {
                let bound = match self.peek().clone() {
                    Tok::Int(i) => {
                        let span = self.bump().1;
                        usize::try_from(i).map_err(|_| ParseError::new(span, "choice bound must be non-negative"))?
                    }
                    _ => 0,
                };
                self.expect(Tok::LBrace)?;
                let mut atoms = Vec::new();
                if *self.peek() != Tok::RBrace {
                    atoms.push(self.atom()?);
                    while *self.peek() == Tok::Semi {
                        self.bump();
                        atoms.push(self.atom()?);
                    }
                }
                self.expect(Tok::RBrace)?;
                if *self.peek() == Tok::If {
                    return Err(ParseError::new(self.span(), "choice rules cannot have a body"));
                }
                Rule::choice(bound, atoms).map_err(|e| ParseError::new(start, e.to_string()))?
            }
            Tok::Ident(_) => {
                let head = self.atom()?;
                let body = if *self.peek() == Tok::If {
                    self.bump();
                    self.body()?
                } else {
                    Vec::new()
                };
                Rule::normal(head, body)
            }
            _ => return Err(self.unexpected("a rule")),
        };
        self.expect(Tok::Dot)?;
        Ok(rule)
    }

    fn body(&mut self) -> Result<Vec<Literal>, ParseError> {
        let mut lits = vec![self.literal()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            lits.push(self.literal()?);
        }
        Ok(lits)
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        if let Tok::Ident(word) = self.peek() {
            // `not` followed by another identifier is negation; `not` alone is an atom.
            if word == "not" && matches!(self.toks.get(self.pos + 1), Some((Tok::Ident(_), _))) {
                self.bump();
                return Ok(Literal::neg(self.atom()?));
            }
        }
        Ok(Literal::pos(self.atom()?))
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let (name, span) = match self.bump() {
            (Tok::Ident(name), span) => (name, span),
            (tok, span) => return Err(ParseError::new(span, format!("expected a predicate name, found {tok}"))),
        };
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            args.push(self.term()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                args.push(self.term()?);
            }
            self.expect(Tok::RParen)?;
        }
        let atom = Atom::new(&name, args);
        match self.arities.get(&atom.predicate) {
            Some(&expected) if expected != atom.arity() => {
                return Err(ParseError::new(
                    span,
                    format!("predicate `{name}` used with arity {}, but earlier with arity {expected}", atom.arity()),
                ))
            }
            Some(_) => {}
            None => {
                self.arities.insert(atom.predicate.clone(), atom.arity());
            }
        }
        Ok(atom)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.bump() {
            (Tok::Ident(s), _) => Ok(Term::Const(Constant::sym(&s))),
            (Tok::Var(s), _) => Ok(Term::var(&s)),
            (Tok::Int(i), _) => Ok(Term::Const(Constant::Int(i))),
            (tok, span) => Err(ParseError::new(span, format!("expected a term, found {tok}"))),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }
}

/// Parses a whole program. Rules are numbered 1, 2, ... in source order.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut parser = Parser::new(text)?;
    let mut rules = Vec::new();
    while !parser.at_eof() {
        rules.push(parser.statement()?);
    }
    // Arity clashes were already reported with a location.
    Program::new(rules).map_err(|e| ParseError::new(SourceSpan::default(), e.to_string()))
}

/// Parses exactly one rule.
pub fn parse_rule(text: &str) -> Result<Rule, ParseError> {
    let mut parser = Parser::new(text)?;
    let rule = parser.statement()?;
    parser.finish()?;
    Ok(rule)
}

/// Parses one atom, without a trailing period.
pub fn parse_atom(text: &str) -> Result<Atom, ParseError> {
    let mut parser = Parser::new(text)?;
    let atom = parser.atom()?;
    parser.finish()?;
    Ok(atom)
}

/// Parses `p(A1):t(A2)` into its two atom patterns.
pub(crate) fn parse_pattern_pair(text: &str) -> Result<(Atom, Atom), ParseError> {
    let mut parser = Parser::new(text)?;
    // The head and domain predicates are unrelated; don't tie their arities.
    let head = parser.atom()?;
    parser.expect(Tok::Colon)?;
    parser.arities.clear();
    let domain = parser.atom()?;
    parser.finish()?;
    Ok((head, domain))
}

impl FromStr for Atom {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_atom(s)
    }
}

impl FromStr for Rule {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rule(s)
    }
}

impl FromStr for Program {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_program(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{render, Head, RuleKind};

    fn atom(s: &str) -> Atom {
        s.parse().unwrap()
    }

    #[test]
    fn normal_rule() {
        let p = parse_program("a :- b, not c.").unwrap();
        let r = &p.rules()[0];
        assert_eq!(r.kind(), RuleKind::Normal);
        assert_eq!(r.head_atom(), Some(&atom("a")));
        assert_eq!(r.pos().collect::<Vec<_>>(), [&atom("b")]);
        assert_eq!(r.neg().collect::<Vec<_>>(), [&atom("c")]);
    }

    #[test]
    fn constraint_with_negation() {
        let p = parse_program(":- not move(a).").unwrap();
        let r = &p.rules()[0];
        assert_eq!(r.kind(), RuleKind::Constraint);
        assert_eq!(r.neg().collect::<Vec<_>>(), [&atom("move(a)")]);
        assert_eq!(r.pos().count(), 0);
    }

    #[test]
    fn choice_rule_with_bound() {
        let p = parse_program("1 { p(1); p(2) }.").unwrap();
        match p.rules()[0].head() {
            Head::Choice { bound, atoms } => {
                assert_eq!(*bound, 1);
                assert_eq!(atoms, &[atom("p(1)"), atom("p(2)")]);
            }
            other => panic!("not a choice rule: {other:?}"),
        }
        // Bound defaults to zero.
        let p = parse_program("{ a }.").unwrap();
        assert!(matches!(p.rules()[0].head(), Head::Choice { bound: 0, .. }));
    }

    #[test]
    fn choice_bound_exceeding_atoms_is_rejected() {
        let err = parse_program("3 { a; b }.").unwrap_err();
        assert_eq!(err.span.line, 1);
        assert!(err.message.contains("exceeds"), "{err}");
    }

    #[test]
    fn arity_clash_reports_location() {
        let err = parse_program("p(1).\nq :- p(1,2).").unwrap_err();
        assert_eq!((err.span.line, err.span.column), (2, 6));
        assert_eq!(err.with_file("x.lp"), format!("x.lp:2:6: {}", err.message));
    }

    #[test]
    fn syntax_errors_carry_spans() {
        let err = parse_program("a :- b\nc.").unwrap_err();
        assert_eq!((err.span.line, err.span.column), (2, 1));
        let err = parse_program("a :- .").unwrap_err();
        assert_eq!((err.span.line, err.span.column), (1, 6));
        let err = parse_program("a # b.").unwrap_err();
        assert!(err.message.contains("unexpected character"));
    }

    #[test]
    fn comments_and_negative_integers() {
        let p = parse_program("% header\np(-3). % trailing\n").unwrap();
        assert_eq!(render(&p), "p(-3).\n");
    }

    #[test]
    fn stones_example_round_trips() {
        let text = ":- not move(a).\nmove(a) :- stone(b), not stone(c).\nstone(c).\n";
        let p = parse_program(text).unwrap();
        assert_eq!(render(&p), text);
        assert!(parse_program(&render(&p)).unwrap().structurally_eq(&p));
    }

    #[test]
    fn empty_program_and_empty_constraint() {
        assert!(parse_program("").unwrap().is_empty());
        assert_eq!(render(&parse_program("").unwrap()), "");
        let p = parse_program(":-.").unwrap();
        assert_eq!(p.rules()[0].body().len(), 0);
    }

    #[test]
    fn not_can_be_an_atom_name() {
        let p = parse_program("a :- not.").unwrap();
        assert_eq!(p.rules()[0].pos().next(), Some(&atom("not")));
    }

    #[test]
    fn pattern_pair() {
        let (h, d) = parse_pattern_pair("full(L):location(L)").unwrap();
        assert_eq!(h.to_string(), "full(L)");
        assert_eq!(d.to_string(), "location(L)");
        assert!(parse_pattern_pair("full(L)").is_err());
    }
}
