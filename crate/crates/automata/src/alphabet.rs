//! Ordered symbol alphabets and words over them.
//!
//! Symbols are opaque names such as `a` or `(0,s)`. Inside the library a
//! symbol is its 0-based position in the alphabet, and that position is the
//! total order used by every shortlex comparison.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// Index of a symbol in its alphabet.
pub type Symbol = usize;

/// A word is a sequence of symbol indices.
pub type Word = Vec<Symbol>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlphabetError {
    #[error("alphabet must contain at least one symbol")]
    Empty,
    #[error("duplicate symbol `{0}`")]
    Duplicate(String),
    #[error("invalid symbol name `{0}`")]
    InvalidName(String),
    #[error("unknown symbol `{0}`")]
    Unknown(String),
    #[error("malformed word: {0}")]
    MalformedWord(String),
}

#[derive(Debug)]
struct Inner {
    names: Vec<String>,
    index: HashMap<String, Symbol>,
}

/// A non-empty, duplicate-free, ordered list of symbol names.
///
/// Cloning is cheap; clones share the underlying table.
#[derive(Clone)]
pub struct Alphabet {
    inner: Arc<Inner>,
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Self, AlphabetError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(AlphabetError::Empty);
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if !valid_name(name) {
                return Err(AlphabetError::InvalidName(name.clone()));
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(AlphabetError::Duplicate(name.clone()));
            }
        }
        Ok(Self {
            inner: Arc::new(Inner { names, index }),
        })
    }

    /// Alphabet whose symbols are the characters of `chars`, in order.
    pub fn from_chars(chars: &str) -> Result<Self, AlphabetError> {
        Self::new(chars.chars().map(|c| c.to_string()))
    }

    pub fn len(&self) -> usize {
        self.inner.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.inner.names
    }

    pub fn name(&self, symbol: Symbol) -> &str {
        &self.inner.names[symbol]
    }

    pub fn index(&self, name: &str) -> Option<Symbol> {
        self.inner.index.get(name).copied()
    }

    pub fn symbol(&self, name: &str) -> Result<Symbol, AlphabetError> {
        self.index(name)
            .ok_or_else(|| AlphabetError::Unknown(name.to_string()))
    }

    pub fn symbols(&self) -> std::ops::Range<Symbol> {
        0..self.len()
    }

    /// A new alphabet with `name` appended as the largest symbol.
    pub fn extended(&self, name: &str) -> Result<Self, AlphabetError> {
        let mut names = self.inner.names.clone();
        names.push(name.to_string());
        Self::new(names)
    }

    /// A new alphabet with a hatted copy `^a` of each listed symbol appended
    /// after the existing ones, in the listed order.
    pub fn with_hatted(&self, hatted: &[Symbol]) -> Self {
        let mut names = self.inner.names.clone();
        let mut index = self.inner.index.clone();
        for &a in hatted {
            let name = format!("^{}", self.name(a));
            index.insert(name.clone(), names.len());
            names.push(name);
        }
        Self {
            inner: Arc::new(Inner { names, index }),
        }
    }

    /// Renders a symbol as a token: bare when it is a single plain
    /// character, quoted otherwise.
    pub fn token(&self, symbol: Symbol) -> String {
        let name = self.name(symbol);
        if is_bare(name) {
            name.to_string()
        } else {
            format!("\"{name}\"")
        }
    }

    /// Renders a word; the empty word is shown as `ε`.
    pub fn format_word(&self, word: &[Symbol]) -> String {
        if word.is_empty() {
            return "ε".to_string();
        }
        word.iter().map(|&s| self.token(s)).collect()
    }

    /// Parses a word written as a sequence of tokens (bare characters or
    /// quoted names). Whitespace is ignored; `ε` or an empty string is the
    /// empty word unless `ε` is itself a symbol.
    pub fn parse_word(&self, text: &str) -> Result<Word, AlphabetError> {
        let trimmed = text.trim();
        if trimmed.is_empty() || (trimmed == "ε" && self.index("ε").is_none()) {
            return Ok(Vec::new());
        }
        let mut word = Vec::new();
        for token in tokenize(trimmed)? {
            match token {
                Token::Name(name) => word.push(self.symbol(&name)?),
                Token::Punct(c) => word.push(self.symbol(&c.to_string())?),
            }
        }
        Ok(word)
    }
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.names == other.inner.names
    }
}

impl Eq for Alphabet {}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.inner.names.iter()).finish()
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('^')
        && !name.chars().any(|c| c.is_whitespace() || c == '"')
}

fn is_bare(name: &str) -> bool {
    let mut chars = name.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => !matches!(c, '+' | '*' | '(' | ')' | '"' | 'ε') && !c.is_whitespace(),
        _ => false,
    }
}

/// Shortlex order on words: shorter first, then lexicographic by symbol
/// index.
pub fn shortlex_cmp(a: &[Symbol], b: &[Symbol]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// All words of length at most `max_len` over `k` symbols, in shortlex order.
pub fn words_upto(k: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    let mut level = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(level.len() * k);
        for w in &level {
            for a in 0..k {
                let mut v = w.clone();
                v.push(a);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Token {
    /// A symbol name, either a bare character or a quoted string.
    Name(String),
    /// One of `+ * ( )`.
    Punct(char),
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, AlphabetError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            c if c.is_whitespace() => {}
            '"' => {
                let mut name = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some(ch) => name.push(ch),
                        None => {
                            return Err(AlphabetError::MalformedWord(format!(
                                "unterminated quote in `{text}`"
                            )))
                        }
                    }
                }
                if name.is_empty() {
                    return Err(AlphabetError::MalformedWord(format!(
                        "empty quoted symbol in `{text}`"
                    )));
                }
                out.push(Token::Name(name));
            }
            '+' | '*' | '(' | ')' => out.push(Token::Punct(c)),
            c => out.push(Token::Name(c.to_string())),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_empty() {
        assert_eq!(Alphabet::new(Vec::<String>::new()), Err(AlphabetError::Empty));
        assert_eq!(
            Alphabet::new(["a", "b", "a"]),
            Err(AlphabetError::Duplicate("a".into()))
        );
        assert!(Alphabet::new(["^a"]).is_err());
    }

    #[test]
    fn word_round_trip_with_composite_symbols() {
        let sigma = Alphabet::new(["0", "1", "#", "(0,s)"]).unwrap();
        let w = vec![0, 3, 2, 1];
        let text = sigma.format_word(&w);
        assert_eq!(text, "0\"(0,s)\"#1");
        assert_eq!(sigma.parse_word(&text).unwrap(), w);
        assert_eq!(sigma.parse_word("ε").unwrap(), Vec::<Symbol>::new());
    }

    #[test]
    fn shortlex_orders_by_length_first() {
        assert_eq!(shortlex_cmp(&[2], &[0, 0]), Ordering::Less);
        assert_eq!(shortlex_cmp(&[0, 1], &[1, 0]), Ordering::Less);
        let all = words_upto(2, 2);
        assert_eq!(all.len(), 7);
        assert!(all.windows(2).all(|p| shortlex_cmp(&p[0], &p[1]) == Ordering::Less));
    }
}
