//! Modal formulas over the base connectives: atoms, falsum, implication,
//! and the provability box. Every derived connective (negation, conjunction,
//! disjunction, truth, diamond) is desugared into this base at construction
//! time, so structural equality is semantic-shape equality.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// A formula of propositional provability logic in base syntax.
///
/// Derived connectives normalize as:
/// `!a = a -> false`, `a & b = !(a -> !b)`, `a | b = !a -> b`,
/// `true = !false`, `<>a = ![]!a`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Formula {
    Atom(String),
    Falsum,
    Implies(Arc<Formula>, Arc<Formula>),
    Box_(Arc<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    pub fn falsum() -> Formula {
        Formula::Falsum
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Implies(Arc::new(lhs), Arc::new(rhs))
    }

    pub fn boxed(body: Formula) -> Formula {
        Formula::Box_(Arc::new(body))
    }

    pub fn truth() -> Formula {
        Formula::neg(Formula::Falsum)
    }

    pub fn neg(f: Formula) -> Formula {
        Formula::implies(f, Formula::Falsum)
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Formula {
        Formula::neg(Formula::implies(lhs, Formula::neg(rhs)))
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Formula {
        Formula::implies(Formula::neg(lhs), rhs)
    }

    pub fn diamond(body: Formula) -> Formula {
        Formula::neg(Formula::boxed(Formula::neg(body)))
    }

    /// Conjunction of a list; empty list is truth.
    pub fn conj(fs: &[Formula]) -> Formula {
        match fs.split_last() {
            None => Formula::truth(),
            Some((last, rest)) => rest
                .iter()
                .rev()
                .fold(last.clone(), |acc, f| Formula::and(f.clone(), acc)),
        }
    }

    /// Is this formula of the shape `x -> false`, i.e. a negation?
    pub fn as_negation(&self) -> Option<&Formula> {
        match self {
            Formula::Implies(a, b) if **b == Formula::Falsum => Some(a),
            _ => None,
        }
    }

    /// Is this formula a desugared conjunction `!(a -> !b)`?
    pub fn as_conjunction(&self) -> Option<(&Formula, &Formula)> {
        let inner = self.as_negation()?;
        if let Formula::Implies(a, b) = inner {
            let rhs = b.as_negation()?;
            // Exclude the degenerate case where the whole thing reads more
            // naturally as a negation of a negation-implication.
            Some((a, rhs))
        } else {
            None
        }
    }

    /// Nesting depth of the provability operator.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Falsum => 0,
            Formula::Implies(a, b) => a.modal_depth().max(b.modal_depth()),
            Formula::Box_(a) => 1 + a.modal_depth(),
        }
    }

    /// All atom names occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(name) => {
                out.insert(name.clone());
            }
            Formula::Falsum => {}
            Formula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Formula::Box_(a) => a.collect_atoms(out),
        }
    }

    /// The set of all subformulas, including the formula itself.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.collect_subformulas(&mut out);
        out
    }

    fn collect_subformulas(&self, out: &mut BTreeSet<Formula>) {
        if !out.insert(self.clone()) {
            return;
        }
        match self {
            Formula::Atom(_) | Formula::Falsum => {}
            Formula::Implies(a, b) => {
                a.collect_subformulas(out);
                b.collect_subformulas(out);
            }
            Formula::Box_(a) => a.collect_subformulas(out),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Falsum => 1,
            Formula::Implies(a, b) => 1 + a.node_count() + b.node_count(),
            Formula::Box_(a) => 1 + a.node_count(),
        }
    }
}

// ---------------------------------------------------------------------------
// Printing: minimal parentheses, re-sugaring derived connectives.
// ---------------------------------------------------------------------------

/// Binding strength, loosest first: `->` < `|` < `&` < prefix.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Implies,
    Or,
    And,
    Prefix,
    Atom,
}

/// The sugared view of a formula, used only by the printer.
enum Sugared<'a> {
    Atom(&'a str),
    Falsum,
    Truth,
    Not(&'a Formula),
    Diamond(&'a Formula),
    Box_(&'a Formula),
    And(&'a Formula, &'a Formula),
    Or(&'a Formula, &'a Formula),
    Implies(&'a Formula, &'a Formula),
}

fn sugar(f: &Formula) -> Sugared<'_> {
    if let Some((a, b)) = f.as_conjunction() {
        return Sugared::And(a, b);
    }
    if let Some(inner) = f.as_negation() {
        if *inner == Formula::Falsum {
            return Sugared::Truth;
        }
        if let Formula::Box_(body) = inner {
            if let Some(pos) = body.as_negation() {
                return Sugared::Diamond(pos);
            }
        }
        return Sugared::Not(inner);
    }
    match f {
        Formula::Atom(name) => Sugared::Atom(name),
        Formula::Falsum => Sugared::Falsum,
        Formula::Box_(a) => Sugared::Box_(a),
        Formula::Implies(a, b) => {
            if let Some(neg) = a.as_negation() {
                return Sugared::Or(neg, b);
            }
            Sugared::Implies(a, b)
        }
    }
}

fn write_prec(f: &Formula, ctx: Prec, out: &mut String) {
    let (prec, render): (Prec, Box<dyn FnOnce(&mut String)>) = match sugar(f) {
        Sugared::Atom(name) => {
            let name = name.to_owned();
            (Prec::Atom, Box::new(move |o: &mut String| o.push_str(&name)))
        }
        Sugared::Falsum => (Prec::Atom, Box::new(|o: &mut String| o.push_str("false"))),
        Sugared::Truth => (Prec::Atom, Box::new(|o: &mut String| o.push_str("true"))),
        Sugared::Not(a) => (
            Prec::Prefix,
            Box::new(move |o: &mut String| {
                o.push('!');
                write_prec(a, Prec::Prefix, o);
            }),
        ),
        Sugared::Box_(a) => (
            Prec::Prefix,
            Box::new(move |o: &mut String| {
                o.push_str("[]");
                write_prec(a, Prec::Prefix, o);
            }),
        ),
        Sugared::Diamond(a) => (
            Prec::Prefix,
            Box::new(move |o: &mut String| {
                o.push_str("<>");
                write_prec(a, Prec::Prefix, o);
            }),
        ),
        Sugared::And(a, b) => (
            Prec::And,
            Box::new(move |o: &mut String| {
                // Left-associative display; right operand needs the tighter level.
                write_prec(a, Prec::And, o);
                o.push_str(" & ");
                write_prec(b, Prec::Prefix, o);
            }),
        ),
        Sugared::Or(a, b) => (
            Prec::Or,
            Box::new(move |o: &mut String| {
                write_prec(a, Prec::Or, o);
                o.push_str(" | ");
                write_prec(b, Prec::And, o);
            }),
        ),
        Sugared::Implies(a, b) => (
            Prec::Implies,
            Box::new(move |o: &mut String| {
                // Right-associative: the left operand needs one level tighter.
                write_prec(a, Prec::Or, o);
                o.push_str(" -> ");
                write_prec(b, Prec::Implies, o);
            }),
        ),
    };
    if prec < ctx {
        out.push('(');
        render(out);
        out.push(')');
    } else {
        render(out);
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_prec(self, Prec::Implies, &mut s);
        f.write_str(&s)
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

// ---------------------------------------------------------------------------
// Parsing.
// ---------------------------------------------------------------------------

/// Syntax error with the byte offset where parsing failed and the set of
/// token descriptions that would have been accepted there.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at byte {offset}: found {found}, expected one of {expected:?}")]
pub struct ParseError {
    pub offset: usize,
    pub found: String,
    pub expected: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    False,
    True,
    Bang,
    BoxOp,
    DiamondOp,
    Amp,
    Pipe,
    Arrow,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::False => "`false`".into(),
            Tok::True => "`true`".into(),
            Tok::Bang => "`!`".into(),
            Tok::BoxOp => "`[]`".into(),
            Tok::DiamondOp => "`<>`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token plus its starting byte offset; `None` at end of input.
    fn next(&mut self) -> Result<Option<(usize, Tok)>, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if start >= self.src.len() {
            return Ok(None);
        }
        let b = self.src[start];
        let tok = match b {
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'!' => {
                self.pos += 1;
                Tok::Bang
            }
            b'&' => {
                self.pos += 1;
                Tok::Amp
            }
            b'|' => {
                self.pos += 1;
                Tok::Pipe
            }
            b'[' => {
                if self.src.get(start + 1) == Some(&b']') {
                    self.pos += 2;
                    Tok::BoxOp
                } else {
                    return Err(self.bad_char(start));
                }
            }
            b'<' => {
                if self.src.get(start + 1) == Some(&b'>') {
                    self.pos += 2;
                    Tok::DiamondOp
                } else {
                    return Err(self.bad_char(start));
                }
            }
            b'-' => {
                if self.src.get(start + 1) == Some(&b'>') {
                    self.pos += 2;
                    Tok::Arrow
                } else {
                    return Err(self.bad_char(start));
                }
            }
            b'a'..=b'z' => {
                let mut end = start + 1;
                while end < self.src.len()
                    && (self.src[end].is_ascii_lowercase()
                        || self.src[end].is_ascii_digit()
                        || self.src[end] == b'_')
                {
                    end += 1;
                }
                self.pos = end;
                let name = std::str::from_utf8(&self.src[start..end]).unwrap().to_owned();
                match name.as_str() {
                    "false" => Tok::False,
                    "true" => Tok::True,
                    _ => Tok::Ident(name),
                }
            }
            _ => return Err(self.bad_char(start)),
        };
        Ok(Some((start, tok)))
    }

    fn bad_char(&self, at: usize) -> ParseError {
        ParseError {
            offset: at,
            found: format!("`{}`", self.src[at] as char),
            expected: vec!["formula token"],
        }
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
}

const FORMULA_STARTERS: &[&str] = &["atom", "`false`", "`true`", "`!`", "`[]`", "`<>`", "`(`"];

impl Parser {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.idx)
    }

    fn err_here(&self, expected: Vec<&'static str>) -> ParseError {
        match self.peek() {
            Some((off, tok)) => ParseError {
                offset: *off,
                found: tok.describe(),
                expected,
            },
            None => ParseError {
                offset: self.end,
                found: "end of input".into(),
                expected,
            },
        }
    }

    // implication: right-associative, loosest.
    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if matches!(self.peek(), Some((_, Tok::Arrow))) {
            self.idx += 1;
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while matches!(self.peek(), Some((_, Tok::Pipe))) {
            self.idx += 1;
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.prefix()?;
        while matches!(self.peek(), Some((_, Tok::Amp))) {
            self.idx += 1;
            let rhs = self.prefix()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some((_, Tok::Bang)) => {
                self.idx += 1;
                Ok(Formula::neg(self.prefix()?))
            }
            Some((_, Tok::BoxOp)) => {
                self.idx += 1;
                Ok(Formula::boxed(self.prefix()?))
            }
            Some((_, Tok::DiamondOp)) => {
                self.idx += 1;
                Ok(Formula::diamond(self.prefix()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().cloned() {
            Some((_, Tok::Ident(name))) => {
                self.idx += 1;
                Ok(Formula::atom(name))
            }
            Some((_, Tok::False)) => {
                self.idx += 1;
                Ok(Formula::falsum())
            }
            Some((_, Tok::True)) => {
                self.idx += 1;
                Ok(Formula::truth())
            }
            Some((_, Tok::LParen)) => {
                self.idx += 1;
                let inner = self.implication()?;
                if matches!(self.peek(), Some((_, Tok::RParen))) {
                    self.idx += 1;
                    Ok(inner)
                } else {
                    Err(self.err_here(vec!["`)`", "`->`", "`&`", "`|`"]))
                }
            }
            _ => Err(self.err_here(FORMULA_STARTERS.to_vec())),
        }
    }
}

/// Parse a formula in the ASCII grammar; derived connectives desugar into
/// the base syntax.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut lexer = Lexer::new(text);
    let mut toks = Vec::new();
    while let Some(t) = lexer.next()? {
        toks.push(t);
    }
    let mut parser = Parser {
        toks,
        idx: 0,
        end: text.len(),
    };
    let f = parser.implication()?;
    if parser.peek().is_some() {
        return Err(parser.err_here(vec!["`->`", "`&`", "`|`", "end of input"]));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn lob_axiom_parses_to_expected_shape() {
        let f = p("[]([]p -> p) -> []p");
        let boxp = Formula::boxed(Formula::atom("p"));
        let expect = Formula::implies(
            Formula::boxed(Formula::implies(boxp.clone(), Formula::atom("p"))),
            boxp,
        );
        assert_eq!(f, expect);
    }

    #[test]
    fn identity_parses() {
        assert_eq!(
            p("p -> p"),
            Formula::implies(Formula::atom("p"), Formula::atom("p"))
        );
    }

    #[test]
    fn truncated_input_reports_offset() {
        let err = parse_formula("p ->").unwrap_err();
        assert_eq!(err.offset, 4);
        assert!(!err.expected.is_empty());
    }

    #[test]
    fn bad_character_reports_offset() {
        let err = parse_formula("p -> ?").unwrap_err();
        assert_eq!(err.offset, 5);
    }

    #[test]
    fn derived_connectives_desugar() {
        assert_eq!(p("!a"), Formula::implies(Formula::atom("a"), Formula::Falsum));
        assert_eq!(p("a | b"), p("!a -> b"));
        assert_eq!(p("a & b"), p("!(a -> !b)"));
        assert_eq!(p("<>a"), p("!([]!a)"));
        assert_eq!(p("true"), p("!false"));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(p("a -> b -> c"), p("a -> (b -> c)"));
        assert_eq!(p("a & b | c"), p("(a & b) | c"));
        assert_eq!(p("a | b -> c"), p("(a | b) -> c"));
        assert_eq!(p("!a & b"), p("(!a) & b"));
        assert_eq!(p("[]a -> b"), p("([]a) -> b"));
    }

    #[test]
    fn modal_depth_computed() {
        assert_eq!(p("p").modal_depth(), 0);
        assert_eq!(p("[]p -> [][]q").modal_depth(), 2);
    }

    #[test]
    fn printer_round_trips_samples() {
        for s in [
            "p",
            "false",
            "true",
            "!p",
            "[]([]p -> p) -> []p",
            "a & b & c",
            "a | b & c",
            "<>p -> []q",
            "!(a -> b)",
            "a -> b -> c",
            "[](a & b)",
            "!!a",
        ] {
            let f = p(s);
            let printed = f.to_string();
            assert_eq!(p(&printed), f, "round-trip failed for {s} -> {printed}");
        }
    }
}
