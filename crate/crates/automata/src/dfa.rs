//! Total deterministic automata, subset construction and canonical
//! minimization.

use std::collections::{HashMap, VecDeque};

use fixedbitset::FixedBitSet;

use crate::alphabet::{Alphabet, Symbol, Word};
use crate::nfa::Nfa;
use crate::AutomataError;

/// A DFA with a total transition function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Alphabet,
    delta: Vec<usize>,
    initial: usize,
    accepting: Vec<bool>,
}

impl Dfa {
    /// Builds a DFA from a possibly partial transition list. Missing
    /// transitions go to a fresh non-accepting sink, added only when needed.
    pub fn new(
        alphabet: Alphabet,
        states: usize,
        initial: usize,
        accepting: impl IntoIterator<Item = usize>,
        transitions: impl IntoIterator<Item = (usize, Symbol, usize)>,
    ) -> Result<Self, AutomataError> {
        let k = alphabet.len();
        const UNSET: usize = usize::MAX;
        let check = |q: usize| {
            if q < states {
                Ok(q)
            } else {
                Err(AutomataError::StateOutOfRange { state: q, states })
            }
        };
        check(initial)?;
        let mut delta = vec![UNSET; states * k];
        for (p, a, q) in transitions {
            check(p)?;
            check(q)?;
            if a >= k {
                return Err(AutomataError::SymbolOutOfRange(a));
            }
            let slot = &mut delta[p * k + a];
            if *slot != UNSET && *slot != q {
                return Err(AutomataError::Nondeterministic {
                    state: p,
                    symbol: alphabet.name(a).to_string(),
                });
            }
            *slot = q;
        }
        let mut acc = vec![false; states];
        for q in accepting {
            acc[check(q)?] = true;
        }
        let mut n = states;
        if delta.contains(&UNSET) {
            let sink = n;
            n += 1;
            acc.push(false);
            delta.extend(std::iter::repeat(sink).take(k));
            for slot in &mut delta {
                if *slot == UNSET {
                    *slot = sink;
                }
            }
        }
        debug_assert_eq!(delta.len(), n * k);
        Ok(Self {
            alphabet,
            delta,
            initial,
            accepting: acc,
        })
    }

    /// Builds a DFA from a transition function over `states` states.
    pub fn from_fn(
        alphabet: Alphabet,
        states: usize,
        initial: usize,
        accepting: Vec<bool>,
        f: impl Fn(usize, Symbol) -> usize,
    ) -> Self {
        let k = alphabet.len();
        assert_eq!(accepting.len(), states);
        assert!(initial < states);
        let mut delta = Vec::with_capacity(states * k);
        for q in 0..states {
            for a in 0..k {
                let t = f(q, a);
                assert!(t < states, "transition target out of range");
                delta.push(t);
            }
        }
        Self {
            alphabet,
            delta,
            initial,
            accepting,
        }
    }

    /// One-state automaton accepting everything.
    pub fn universal(alphabet: Alphabet) -> Self {
        Self::from_fn(alphabet, 1, 0, vec![true], |_, _| 0)
    }

    /// One-state automaton accepting nothing.
    pub fn empty(alphabet: Alphabet) -> Self {
        Self::from_fn(alphabet, 1, 0, vec![false], |_, _| 0)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn accepting(&self) -> &[bool] {
        &self.accepting
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_states()).filter(|&q| self.accepting[q])
    }

    pub fn next(&self, q: usize, a: Symbol) -> usize {
        self.delta[q * self.alphabet.len() + a]
    }

    pub fn run_from(&self, q: usize, word: &[Symbol]) -> usize {
        word.iter().fold(q, |p, &a| self.next(p, a))
    }

    pub fn run(&self, word: &[Symbol]) -> usize {
        self.run_from(self.initial, word)
    }

    pub fn accepts(&self, word: &[Symbol]) -> bool {
        self.accepting[self.run(word)]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, Symbol, usize)> + '_ {
        let k = self.alphabet.len();
        (0..self.num_states()).flat_map(move |p| (0..k).map(move |a| (p, a, self.next(p, a))))
    }

    pub fn to_nfa(&self) -> Nfa {
        Nfa::new(
            self.alphabet.clone(),
            self.num_states(),
            [self.initial],
            self.accepting_states(),
            self.transitions(),
        )
        .expect("a valid DFA is a valid NFA")
    }

    pub fn with_initial(&self, q: usize) -> Dfa {
        assert!(q < self.num_states());
        Dfa {
            initial: q,
            ..self.clone()
        }
    }

    pub fn with_accepting(&self, accepting: Vec<bool>) -> Dfa {
        assert_eq!(accepting.len(), self.num_states());
        Dfa {
            accepting,
            ..self.clone()
        }
    }

    pub fn complement(&self) -> Dfa {
        self.with_accepting(self.accepting.iter().map(|b| !b).collect())
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> FixedBitSet {
        let mut seen = FixedBitSet::with_capacity(self.num_states());
        seen.insert(self.initial);
        let mut stack = vec![self.initial];
        while let Some(p) = stack.pop() {
            for a in self.alphabet.symbols() {
                let q = self.next(p, a);
                if !seen.put(q) {
                    stack.push(q);
                }
            }
        }
        seen
    }

    /// States from which an accepting state is reachable.
    pub fn coreachable(&self) -> FixedBitSet {
        self.to_nfa().coreachable()
    }

    /// Shortlex-minimal access word for every reachable state.
    pub fn access_words(&self) -> Vec<Option<Word>> {
        let mut words: Vec<Option<Word>> = vec![None; self.num_states()];
        words[self.initial] = Some(Vec::new());
        let mut queue = VecDeque::from([self.initial]);
        while let Some(p) = queue.pop_front() {
            for a in self.alphabet.symbols() {
                let q = self.next(p, a);
                if words[q].is_none() {
                    let mut w = words[p].clone().unwrap();
                    w.push(a);
                    words[q] = Some(w);
                    queue.push_back(q);
                }
            }
        }
        words
    }

    pub fn is_empty_language(&self) -> bool {
        !self.coreachable().contains(self.initial)
    }

    /// Whether the language is finite: no cycle through a state that is
    /// both reachable and co-reachable.
    pub fn is_finite_language(&self) -> bool {
        let reach = self.reachable();
        let co = self.coreachable();
        let live: Vec<bool> = (0..self.num_states())
            .map(|q| reach.contains(q) && co.contains(q))
            .collect();
        // Iterative three-colour DFS over live states.
        let n = self.num_states();
        let mut colour = vec![0u8; n];
        for start in 0..n {
            if !live[start] || colour[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            colour[start] = 1;
            while let Some((p, a)) = stack.last_mut() {
                let p = *p;
                if *a == self.alphabet.len() {
                    colour[p] = 2;
                    stack.pop();
                    continue;
                }
                let q = self.next(p, *a);
                *a += 1;
                if !live[q] {
                    continue;
                }
                match colour[q] {
                    0 => {
                        colour[q] = 1;
                        stack.push((q, 0));
                    }
                    1 => return false,
                    _ => {}
                }
            }
        }
        true
    }

    /// Canonical minimal DFA for the same language.
    ///
    /// Keeps reachable states, merges equivalent ones by partition
    /// refinement, and numbers states in breadth-first order with symbols
    /// taken in alphabet order, so equal languages give equal automata.
    pub fn minimize(&self) -> Dfa {
        let k = self.alphabet.len();
        let reach = self.reachable();
        let states: Vec<usize> = reach.ones().collect();
        let mut local = vec![usize::MAX; self.num_states()];
        for (i, &q) in states.iter().enumerate() {
            local[q] = i;
        }
        let mut class: Vec<usize> = states.iter().map(|&q| self.accepting[q] as usize).collect();
        let mut count = class.iter().copied().collect::<std::collections::BTreeSet<_>>().len();
        loop {
            let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
            let mut next_class = Vec::with_capacity(states.len());
            for (i, &q) in states.iter().enumerate() {
                let mut sig = Vec::with_capacity(k + 1);
                sig.push(class[i]);
                for a in 0..k {
                    sig.push(class[local[self.next(q, a)]]);
                }
                let fresh = ids.len();
                next_class.push(*ids.entry(sig).or_insert(fresh));
            }
            let new_count = ids.len();
            class = next_class;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        let init_class = class[local[self.initial]];
        let repr_of_class = {
            let mut r = vec![usize::MAX; count];
            for (i, &q) in states.iter().enumerate() {
                if r[class[i]] == usize::MAX {
                    r[class[i]] = q;
                }
            }
            r
        };
        let mut number = vec![usize::MAX; count];
        let mut order = Vec::with_capacity(count);
        number[init_class] = 0;
        order.push(init_class);
        let mut head = 0;
        while head < order.len() {
            let c = order[head];
            head += 1;
            let q = repr_of_class[c];
            for a in 0..k {
                let d = class[local[self.next(q, a)]];
                if number[d] == usize::MAX {
                    number[d] = order.len();
                    order.push(d);
                }
            }
        }
        let accepting = order
            .iter()
            .map(|&c| self.accepting[repr_of_class[c]])
            .collect();
        Dfa::from_fn(self.alphabet.clone(), count, 0, accepting, |i, a| {
            number[class[local[self.next(repr_of_class[order[i]], a)]]]
        })
    }

    /// Maps each reachable state of `self` to the state of `other` reached
    /// by the same access word. Meaningful when `other` is a minimization of
    /// `self`.
    pub fn correspondence(&self, other: &Dfa) -> Vec<Option<usize>> {
        let mut map = vec![None; self.num_states()];
        map[self.initial] = Some(other.initial);
        let mut queue = VecDeque::from([self.initial]);
        while let Some(p) = queue.pop_front() {
            let op = map[p].unwrap();
            for a in self.alphabet.symbols() {
                let q = self.next(p, a);
                if map[q].is_none() {
                    map[q] = Some(other.next(op, a));
                    queue.push_back(q);
                }
            }
        }
        map
    }
}

/// Reachable subset construction; the empty subset acts as sink.
pub fn determinize(nfa: &Nfa) -> Dfa {
    let k = nfa.alphabet().len();
    let mut ids: HashMap<FixedBitSet, usize> = HashMap::new();
    let mut sets = vec![nfa.initial_set()];
    ids.insert(sets[0].clone(), 0);
    let mut delta = Vec::new();
    let mut head = 0;
    while head < sets.len() {
        let cur = sets[head].clone();
        head += 1;
        for a in 0..k {
            let next = nfa.step_set(&cur, a);
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    let id = sets.len();
                    ids.insert(next.clone(), id);
                    sets.push(next);
                    id
                }
            };
            delta.push(id);
        }
    }
    let accepting = sets.iter().map(|s| nfa.set_accepts(s)).collect();
    Dfa::from_fn(nfa.alphabet().clone(), sets.len(), 0, accepting, |q, a| {
        delta[q * k + a]
    })
}

/// Canonical minimal total DFA recognising `L(nfa)`; state 0 is initial.
pub fn determinize_minimize(nfa: &Nfa) -> Dfa {
    determinize(nfa).minimize()
}
