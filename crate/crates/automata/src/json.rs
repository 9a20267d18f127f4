//! Serializable automaton description shared by targets, strategies and
//! online instances.

use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::dfa::Dfa;
use crate::nfa::Nfa;
use crate::AutomataError;

/// Automaton in file form. Symbols are referenced by name; missing DFA
/// transitions go to a sink.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomatonSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<String>>,
    pub states: usize,
    pub initial: usize,
    pub accepting: Vec<usize>,
    pub transitions: Vec<(usize, String, usize)>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub nondeterministic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reroutes: Vec<(usize, String)>,
}

impl AutomatonSpec {
    pub fn from_dfa(d: &Dfa) -> Self {
        let a = d.alphabet();
        Self {
            alphabet: None,
            states: d.num_states(),
            initial: d.initial(),
            accepting: d.accepting_states().collect(),
            transitions: d
                .transitions()
                .map(|(p, s, q)| (p, a.name(s).to_string(), q))
                .collect(),
            nondeterministic: false,
            kind: None,
            reroutes: Vec::new(),
        }
    }

    pub fn from_nfa(n: &Nfa) -> Result<Self, AutomataError> {
        if n.initial().len() != 1 {
            return Err(AutomataError::InitialCount(n.initial().len()));
        }
        let a = n.alphabet();
        Ok(Self {
            alphabet: Some(a.names().to_vec()),
            states: n.num_states(),
            initial: n.initial()[0],
            accepting: n.accepting_states().collect(),
            transitions: n
                .transitions()
                .map(|(p, s, q)| (p, a.name(s).to_string(), q))
                .collect(),
            nondeterministic: true,
            kind: None,
            reroutes: Vec::new(),
        })
    }

    fn resolved(&self, alphabet: &Alphabet) -> Result<Vec<(usize, usize, usize)>, AutomataError> {
        self.transitions
            .iter()
            .map(|(p, s, q)| Ok((*p, alphabet.symbol(s)?, *q)))
            .collect()
    }

    /// The alphabet declared in the file, if any.
    pub fn declared_alphabet(&self) -> Result<Option<Alphabet>, AutomataError> {
        match &self.alphabet {
            None => Ok(None),
            Some(names) => Ok(Some(Alphabet::new(names.iter().cloned())?)),
        }
    }

    pub fn to_dfa(&self, alphabet: &Alphabet) -> Result<Dfa, AutomataError> {
        Dfa::new(
            alphabet.clone(),
            self.states,
            self.initial,
            self.accepting.iter().copied(),
            self.resolved(alphabet)?,
        )
    }

    pub fn to_nfa(&self, alphabet: &Alphabet) -> Result<Nfa, AutomataError> {
        Nfa::new(
            alphabet.clone(),
            self.states,
            [self.initial],
            self.accepting.iter().copied(),
            self.resolved(alphabet)?,
        )
    }
}
