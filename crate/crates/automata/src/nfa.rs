//! Nondeterministic automata without ε-moves.

use fixedbitset::FixedBitSet;

use crate::alphabet::{Alphabet, Symbol};
use crate::AutomataError;

/// An NFA with a set of initial states.
///
/// Successor lists are sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    alphabet: Alphabet,
    delta: Vec<Vec<Vec<usize>>>,
    initial: Vec<usize>,
    accepting: Vec<bool>,
}

impl Nfa {
    pub fn new(
        alphabet: Alphabet,
        states: usize,
        initial: impl IntoIterator<Item = usize>,
        accepting: impl IntoIterator<Item = usize>,
        transitions: impl IntoIterator<Item = (usize, Symbol, usize)>,
    ) -> Result<Self, AutomataError> {
        let k = alphabet.len();
        let check = |q: usize| {
            if q < states {
                Ok(q)
            } else {
                Err(AutomataError::StateOutOfRange { state: q, states })
            }
        };
        let mut delta = vec![vec![Vec::new(); k]; states];
        for (p, a, q) in transitions {
            check(p)?;
            check(q)?;
            if a >= k {
                return Err(AutomataError::SymbolOutOfRange(a));
            }
            delta[p][a].push(q);
        }
        for row in &mut delta {
            for succ in row {
                succ.sort_unstable();
                succ.dedup();
            }
        }
        let mut init = Vec::new();
        for q in initial {
            init.push(check(q)?);
        }
        init.sort_unstable();
        init.dedup();
        let mut acc = vec![false; states];
        for q in accepting {
            acc[check(q)?] = true;
        }
        Ok(Self {
            alphabet,
            delta,
            initial: init,
            accepting: acc,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_states()).filter(|&q| self.accepting[q])
    }

    pub fn successors(&self, q: usize, a: Symbol) -> &[usize] {
        &self.delta[q][a]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, Symbol, usize)> + '_ {
        self.delta.iter().enumerate().flat_map(|(p, row)| {
            row.iter()
                .enumerate()
                .flat_map(move |(a, succ)| succ.iter().map(move |&q| (p, a, q)))
        })
    }

    pub fn num_transitions(&self) -> usize {
        self.delta.iter().flatten().map(Vec::len).sum()
    }

    pub fn initial_set(&self) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.num_states());
        for &q in &self.initial {
            s.insert(q);
        }
        s
    }

    pub fn step_set(&self, set: &FixedBitSet, a: Symbol) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.num_states());
        for p in set.ones() {
            for &q in &self.delta[p][a] {
                out.insert(q);
            }
        }
        out
    }

    pub fn set_accepts(&self, set: &FixedBitSet) -> bool {
        set.ones().any(|q| self.accepting[q])
    }

    pub fn run_set(&self, word: &[Symbol]) -> FixedBitSet {
        word.iter()
            .fold(self.initial_set(), |s, &a| self.step_set(&s, a))
    }

    pub fn accepts(&self, word: &[Symbol]) -> bool {
        self.set_accepts(&self.run_set(word))
    }

    /// The same automaton started in `q` only.
    pub fn with_initial(&self, q: usize) -> Nfa {
        Nfa {
            initial: vec![q],
            ..self.clone()
        }
    }

    /// Same states and transitions with a different accepting set.
    pub fn with_accepting(&self, accepting: Vec<bool>) -> Nfa {
        assert_eq!(accepting.len(), self.num_states());
        Nfa {
            accepting,
            ..self.clone()
        }
    }

    /// Keeps only transitions satisfying `keep`.
    pub fn filter_transitions(&self, mut keep: impl FnMut(usize, Symbol, usize) -> bool) -> Nfa {
        let mut out = self.clone();
        for (p, row) in out.delta.iter_mut().enumerate() {
            for (a, succ) in row.iter_mut().enumerate() {
                succ.retain(|&q| keep(p, a, q));
            }
        }
        out
    }

    /// States from which some accepting state is reachable.
    pub fn coreachable(&self) -> FixedBitSet {
        let n = self.num_states();
        let mut rev = vec![Vec::new(); n];
        for (p, _, q) in self.transitions() {
            rev[q].push(p);
        }
        let mut seen = FixedBitSet::with_capacity(n);
        let mut stack: Vec<usize> = self.accepting_states().collect();
        for &q in &stack {
            seen.insert(q);
        }
        while let Some(q) = stack.pop() {
            for &p in &rev[q] {
                if !seen.put(p) {
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// States reachable from the initial states.
    pub fn reachable(&self) -> FixedBitSet {
        let mut seen = self.initial_set();
        let mut stack: Vec<usize> = self.initial.clone();
        while let Some(p) = stack.pop() {
            for succ in &self.delta[p] {
                for &q in succ {
                    if !seen.put(q) {
                        stack.push(q);
                    }
                }
            }
        }
        seen
    }

    /// Every state has at least one successor for every symbol.
    pub fn is_total(&self) -> bool {
        self.delta.iter().all(|row| row.iter().all(|s| !s.is_empty()))
    }

    pub fn is_deterministic(&self) -> bool {
        self.initial.len() == 1 && self.delta.iter().all(|row| row.iter().all(|s| s.len() <= 1))
    }
}
