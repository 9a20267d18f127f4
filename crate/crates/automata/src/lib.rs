//! Finite automata over ordered alphabets.
//!
//! Regular expressions compile to ε-free position automata, NFAs determinize
//! to canonical minimal DFAs, and languages compare by inclusion or by the
//! shortlex order on their symmetric difference.

pub mod alphabet;
pub mod dfa;
pub mod dot;
pub mod json;
pub mod nfa;
pub mod ops;
pub mod regex;

pub use alphabet::{shortlex_cmp, words_upto, Alphabet, AlphabetError, Symbol, Word};
pub use dfa::{determinize, determinize_minimize, Dfa};
pub use json::AutomatonSpec;
pub use nfa::Nfa;
pub use ops::{
    compare_shortlex, compare_shortlex_upto, contains, enumerate_upto, is_prefix_free, product,
    product_by, shortlex_min_word, AcceptRule, OrderResult,
};
pub use regex::{regex_to_nfa, RegexAst, RegexError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AutomataError {
    #[error("symbol index {0} is outside the alphabet")]
    SymbolOutOfRange(usize),
    #[error("state {state} is out of range for {states} states")]
    StateOutOfRange { state: usize, states: usize },
    #[error("automata are over different alphabets")]
    AlphabetMismatch,
    #[error("state {state} has several successors on `{symbol}`")]
    Nondeterministic { state: usize, symbol: String },
    #[error("automaton has {0} initial states, expected exactly one")]
    InitialCount(usize),
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
}
