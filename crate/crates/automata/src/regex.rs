//! Regular expressions: syntax tree, text parser and position automaton.
//!
//! Text syntax: juxtaposition concatenates, `+` is union, `*` is Kleene
//! star, parentheses group. Symbols are single characters or double-quoted
//! names. There is no way to write the empty word; `()` is rejected.

use std::collections::BTreeSet;
use std::fmt;

use crate::alphabet::{tokenize, Alphabet, AlphabetError, Symbol, Token};
use crate::nfa::Nfa;
use crate::AutomataError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RegexAst {
    Symbol(Symbol),
    Concat(Box<RegexAst>, Box<RegexAst>),
    Union(Box<RegexAst>, Box<RegexAst>),
    Star(Box<RegexAst>),
    Epsilon,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegexError {
    #[error("empty expression")]
    Empty,
    #[error("empty group `()` at token {0}")]
    EmptyGroup(usize),
    #[error("unexpected `{found}` at token {pos}")]
    Unexpected { pos: usize, found: String },
    #[error("missing `)`")]
    Unclosed,
    #[error(transparent)]
    Symbol(#[from] AlphabetError),
}

impl RegexAst {
    pub fn symbol(a: Symbol) -> Self {
        RegexAst::Symbol(a)
    }

    pub fn concat(l: RegexAst, r: RegexAst) -> Self {
        RegexAst::Concat(Box::new(l), Box::new(r))
    }

    pub fn union(l: RegexAst, r: RegexAst) -> Self {
        RegexAst::Union(Box::new(l), Box::new(r))
    }

    pub fn star(e: RegexAst) -> Self {
        RegexAst::Star(Box::new(e))
    }

    /// Concatenation of the given symbols; `Epsilon` for an empty word.
    pub fn word(w: &[Symbol]) -> Self {
        let mut it = w.iter().map(|&a| RegexAst::Symbol(a));
        match it.next() {
            None => RegexAst::Epsilon,
            Some(first) => it.fold(first, RegexAst::concat),
        }
    }

    /// Union of the given expressions, left-nested. Panics on an empty list.
    pub fn union_all(items: impl IntoIterator<Item = RegexAst>) -> Self {
        let mut it = items.into_iter();
        let first = it.next().expect("union of no expressions");
        it.fold(first, RegexAst::union)
    }

    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self, RegexError> {
        let tokens = tokenize(text)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            alphabet,
        };
        if parser.tokens.is_empty() {
            return Err(RegexError::Empty);
        }
        let ast = parser.union()?;
        if let Some(tok) = parser.peek() {
            return Err(RegexError::Unexpected {
                pos: parser.pos,
                found: describe(tok),
            });
        }
        Ok(ast)
    }

    /// Whether the empty word is in the denoted language.
    pub fn nullable(&self) -> bool {
        match self {
            RegexAst::Symbol(_) => false,
            RegexAst::Epsilon | RegexAst::Star(_) => true,
            RegexAst::Concat(l, r) => l.nullable() && r.nullable(),
            RegexAst::Union(l, r) => l.nullable() || r.nullable(),
        }
    }

    /// Whether the expression contains a star (so may denote an infinite
    /// language).
    pub fn has_star(&self) -> bool {
        match self {
            RegexAst::Symbol(_) | RegexAst::Epsilon => false,
            RegexAst::Star(_) => true,
            RegexAst::Concat(l, r) | RegexAst::Union(l, r) => l.has_star() || r.has_star(),
        }
    }

    /// Symbols occurring in the expression.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            RegexAst::Symbol(a) => {
                out.insert(*a);
            }
            RegexAst::Epsilon => {}
            RegexAst::Star(e) => e.collect_symbols(out),
            RegexAst::Concat(l, r) | RegexAst::Union(l, r) => {
                l.collect_symbols(out);
                r.collect_symbols(out);
            }
        }
    }

    /// Text form that parses back to an equivalent expression.
    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> impl fmt::Display + 'a {
        Shown {
            ast: self,
            alphabet,
        }
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        self.display(alphabet).to_string()
    }

    fn precedence(&self) -> u8 {
        match self {
            RegexAst::Union(..) => 0,
            RegexAst::Concat(..) => 1,
            RegexAst::Star(_) => 2,
            RegexAst::Symbol(_) | RegexAst::Epsilon => 3,
        }
    }
}

struct Shown<'a> {
    ast: &'a RegexAst,
    alphabet: &'a Alphabet,
}

impl Shown<'_> {
    fn child(&self, f: &mut fmt::Formatter<'_>, c: &RegexAst, min: u8) -> fmt::Result {
        let inner = Shown {
            ast: c,
            alphabet: self.alphabet,
        };
        if c.precedence() < min {
            write!(f, "({inner})")
        } else {
            write!(f, "{inner}")
        }
    }
}

impl fmt::Display for Shown<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ast {
            RegexAst::Symbol(a) => write!(f, "{}", self.alphabet.token(*a)),
            RegexAst::Epsilon => write!(f, "ε"),
            RegexAst::Star(e) => {
                self.child(f, e, 3)?;
                write!(f, "*")
            }
            RegexAst::Concat(l, r) => {
                self.child(f, l, 1)?;
                self.child(f, r, 2)
            }
            RegexAst::Union(l, r) => {
                self.child(f, l, 0)?;
                write!(f, "+")?;
                self.child(f, r, 1)
            }
        }
    }
}

fn describe(tok: &Token) -> String {
    match tok {
        Token::Name(n) => n.clone(),
        Token::Punct(c) => c.to_string(),
    }
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    alphabet: &'a Alphabet,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn union(&mut self) -> Result<RegexAst, RegexError> {
        let mut ast = self.concat()?;
        while self.peek() == Some(&Token::Punct('+')) {
            self.pos += 1;
            let rhs = self.concat()?;
            ast = RegexAst::union(ast, rhs);
        }
        Ok(ast)
    }

    fn concat(&mut self) -> Result<RegexAst, RegexError> {
        let mut parts = Vec::new();
        while let Some(tok) = self.peek() {
            match tok {
                Token::Name(_) | Token::Punct('(') => parts.push(self.postfix()?),
                _ => break,
            }
        }
        let mut it = parts.into_iter();
        let first = match it.next() {
            Some(first) => first,
            None => {
                return Err(match self.peek() {
                    None => RegexError::Empty,
                    Some(tok) => RegexError::Unexpected {
                        pos: self.pos,
                        found: describe(tok),
                    },
                })
            }
        };
        Ok(it.fold(first, RegexAst::concat))
    }

    fn postfix(&mut self) -> Result<RegexAst, RegexError> {
        let mut ast = self.atom()?;
        while self.peek() == Some(&Token::Punct('*')) {
            self.pos += 1;
            ast = RegexAst::star(ast);
        }
        Ok(ast)
    }

    fn atom(&mut self) -> Result<RegexAst, RegexError> {
        match self.tokens.get(self.pos).cloned() {
            Some(Token::Name(name)) => {
                self.pos += 1;
                Ok(RegexAst::Symbol(self.alphabet.symbol(&name)?))
            }
            Some(Token::Punct('(')) => {
                let open = self.pos;
                self.pos += 1;
                if self.peek() == Some(&Token::Punct(')')) {
                    return Err(RegexError::EmptyGroup(open));
                }
                let inner = self.union()?;
                if self.peek() != Some(&Token::Punct(')')) {
                    return Err(RegexError::Unclosed);
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(tok) => Err(RegexError::Unexpected {
                pos: self.pos,
                found: describe(&tok),
            }),
            None => Err(RegexError::Empty),
        }
    }
}

struct Positions {
    symbols: Vec<Symbol>,
    follow: Vec<BTreeSet<usize>>,
}

struct Info {
    nullable: bool,
    first: BTreeSet<usize>,
    last: BTreeSet<usize>,
}

fn linearize(ast: &RegexAst, pos: &mut Positions) -> Info {
    match ast {
        RegexAst::Symbol(a) => {
            let p = pos.symbols.len();
            pos.symbols.push(*a);
            pos.follow.push(BTreeSet::new());
            Info {
                nullable: false,
                first: BTreeSet::from([p]),
                last: BTreeSet::from([p]),
            }
        }
        RegexAst::Epsilon => Info {
            nullable: true,
            first: BTreeSet::new(),
            last: BTreeSet::new(),
        },
        RegexAst::Concat(l, r) => {
            let li = linearize(l, pos);
            let ri = linearize(r, pos);
            for &p in &li.last {
                pos.follow[p].extend(ri.first.iter().copied());
            }
            let mut first = li.first.clone();
            if li.nullable {
                first.extend(ri.first.iter().copied());
            }
            let mut last = ri.last.clone();
            if ri.nullable {
                last.extend(li.last.iter().copied());
            }
            Info {
                nullable: li.nullable && ri.nullable,
                first,
                last,
            }
        }
        RegexAst::Union(l, r) => {
            let li = linearize(l, pos);
            let ri = linearize(r, pos);
            Info {
                nullable: li.nullable || ri.nullable,
                first: li.first.union(&ri.first).copied().collect(),
                last: li.last.union(&ri.last).copied().collect(),
            }
        }
        RegexAst::Star(e) => {
            let ei = linearize(e, pos);
            for &p in &ei.last {
                pos.follow[p].extend(ei.first.iter().copied());
            }
            Info {
                nullable: true,
                ..ei
            }
        }
    }
}

/// Position (Glushkov) automaton: one state per symbol occurrence plus an
/// initial state, no ε-transitions.
pub fn regex_to_nfa(ast: &RegexAst, alphabet: &Alphabet) -> Result<Nfa, AutomataError> {
    if let Some(&bad) = ast.symbols().iter().find(|&&a| a >= alphabet.len()) {
        return Err(AutomataError::SymbolOutOfRange(bad));
    }
    let mut pos = Positions {
        symbols: Vec::new(),
        follow: Vec::new(),
    };
    let info = linearize(ast, &mut pos);
    let n = pos.symbols.len() + 1;
    let mut transitions = Vec::new();
    for &p in &info.first {
        transitions.push((0, pos.symbols[p], p + 1));
    }
    for (p, follow) in pos.follow.iter().enumerate() {
        for &r in follow {
            transitions.push((p + 1, pos.symbols[r], r + 1));
        }
    }
    let mut accepting: Vec<usize> = info.last.iter().map(|p| p + 1).collect();
    if info.nullable {
        accepting.push(0);
    }
    Nfa::new(alphabet.clone(), n, [0], accepting, transitions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma() -> Alphabet {
        Alphabet::from_chars("abcd1").unwrap()
    }

    #[test]
    fn parses_precedence() {
        let s = sigma();
        let ast = RegexAst::parse("ab*+c", &s).unwrap();
        let expected = RegexAst::union(
            RegexAst::concat(RegexAst::Symbol(0), RegexAst::star(RegexAst::Symbol(1))),
            RegexAst::Symbol(2),
        );
        assert_eq!(ast, expected);
    }

    #[test]
    fn rejects_empty_group_and_unknown_symbols() {
        let s = sigma();
        assert_eq!(RegexAst::parse("()", &s), Err(RegexError::EmptyGroup(0)));
        assert!(matches!(RegexAst::parse("a+", &s), Err(RegexError::Empty)));
        assert!(matches!(RegexAst::parse("x", &s), Err(RegexError::Symbol(_))));
        assert_eq!(RegexAst::parse("(a", &s), Err(RegexError::Unclosed));
        assert!(matches!(
            RegexAst::parse("a)", &s),
            Err(RegexError::Unexpected { .. })
        ));
    }

    #[test]
    fn text_round_trip() {
        let s = Alphabet::new(["a", "b", "(0,s)"]).unwrap();
        for text in ["a(b+\"(0,s)\")*", "(a+b)(a+b)", "a**", "((a))b+b"] {
            let ast = RegexAst::parse(text, &s).unwrap();
            let back = RegexAst::parse(&ast.to_text(&s), &s).unwrap();
            assert_eq!(ast, back, "{text}");
        }
    }

    #[test]
    fn position_automaton_languages() {
        let s = sigma();
        let nfa = regex_to_nfa(&RegexAst::parse("d1d", &s).unwrap(), &s).unwrap();
        assert!(nfa.accepts(&[3, 4, 3]));
        assert!(!nfa.accepts(&[3, 4]));
        assert!(!nfa.accepts(&[3, 4, 3, 3]));
        let nfa = regex_to_nfa(&RegexAst::parse("b+c", &s).unwrap(), &s).unwrap();
        assert!(nfa.accepts(&[1]) && nfa.accepts(&[2]) && !nfa.accepts(&[0]));
        let nfa = regex_to_nfa(&RegexAst::star(RegexAst::Epsilon), &s).unwrap();
        assert!(nfa.accepts(&[]) && !nfa.accepts(&[0]));
    }
}
