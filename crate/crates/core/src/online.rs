//! The online word problem for NFAs and transition pruning towards a weakly
//! dominant deterministic strategy.
//!
//! Pruning follows the length-indexed scheme: in round `n`, every
//! nondeterministic choice keeps only the successors whose languages
//! truncated to `Σ^{≤n}` are shortlex-maximal. Rounds in which no truncated
//! comparison can differ are skipped, and the iteration stops once all
//! remaining co-successors have equal full languages.

use std::cmp::Ordering;
use std::collections::HashMap;

use cfgame_automata::{compare_shortlex, compare_shortlex_upto, words_upto, Dfa, Nfa, Symbol, Word};
use fixedbitset::FixedBitSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OnlineError {
    #[error("instance needs exactly one initial state, found {0}")]
    InitialCount(usize),
    #[error("state {state} has no transition on `{symbol}`")]
    NotTotal { state: usize, symbol: String },
    #[error("strategy leaves the instance at word {0}")]
    InvalidStrategy(String),
    #[error("strategy table has no entry for word {0}")]
    TableTooShort(String),
    #[error("frontier of {size} partial tables exceeds budget {budget}")]
    BudgetExceeded { size: usize, budget: usize },
}

/// A total NFA with a single initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineInstance {
    nfa: Nfa,
}

impl OnlineInstance {
    pub fn new(nfa: Nfa) -> Result<Self, OnlineError> {
        if nfa.initial().len() != 1 {
            return Err(OnlineError::InitialCount(nfa.initial().len()));
        }
        for q in 0..nfa.num_states() {
            for a in nfa.alphabet().symbols() {
                if nfa.successors(q, a).is_empty() {
                    return Err(OnlineError::NotTotal {
                        state: q,
                        symbol: nfa.alphabet().name(a).to_string(),
                    });
                }
            }
        }
        Ok(Self { nfa })
    }

    pub fn nfa(&self) -> &Nfa {
        &self.nfa
    }

    pub fn initial(&self) -> usize {
        self.nfa.initial()[0]
    }
}

/// A strategy `ρ : Σ* → Q`.
#[derive(Debug, Clone, Copy)]
pub enum OnlineStrategy<'a> {
    /// Deterministic sub-automaton numbered like the instance.
    Dfa(&'a Dfa),
    /// Explicit states for every word up to some length.
    Table(&'a HashMap<Word, usize>),
}

#[derive(Debug, Clone)]
pub struct PruneResult {
    /// The pruned NFA before tie-breaking.
    pub pruned: Nfa,
    /// Tie-broken deterministic strategy.
    pub dfa: Dfa,
    /// Truncation lengths of the rounds that removed transitions.
    pub rounds: Vec<usize>,
    /// Whether every reachable subset of the pruned NFA is either wholly
    /// accepting or wholly rejecting.
    pub unambiguous: bool,
}

fn multi_choices(n: &Nfa) -> Vec<(usize, Symbol)> {
    (0..n.num_states())
        .flat_map(|q| n.alphabet().symbols().map(move |a| (q, a)))
        .filter(|&(q, a)| n.successors(q, a).len() > 1)
        .collect()
}

/// Smallest witness length among co-successor pairs with different
/// languages, or `None` when every choice is between equal languages.
fn min_difference(n: &Nfa) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (q, a) in multi_choices(n) {
        let succ = n.successors(q, a);
        let first = n.with_initial(succ[0]);
        for &r in &succ[1..] {
            let o = compare_shortlex(&first, &n.with_initial(r)).expect("same alphabet");
            if let Some(w) = o.witness {
                best = Some(best.map_or(w.len(), |b| b.min(w.len())));
            }
        }
    }
    best
}

/// One pruning round: each choice keeps its maximal successors. All
/// comparisons use the automaton as it was before the round.
fn round(n: &Nfa, compare: impl Fn(&Nfa, &Nfa) -> Ordering) -> Nfa {
    let mut keep: HashMap<(usize, Symbol), Vec<usize>> = HashMap::new();
    for (q, a) in multi_choices(n) {
        let succ = n.successors(q, a);
        let langs: Vec<Nfa> = succ.iter().map(|&r| n.with_initial(r)).collect();
        let mut best = 0;
        for i in 1..succ.len() {
            if compare(&langs[i], &langs[best]) == Ordering::Greater {
                best = i;
            }
        }
        let kept = (0..succ.len())
            .filter(|&i| compare(&langs[i], &langs[best]) == Ordering::Equal)
            .map(|i| succ[i])
            .collect();
        keep.insert((q, a), kept);
    }
    n.filter_transitions(|q, a, r| keep.get(&(q, a)).map_or(true, |k| k.contains(&r)))
}

fn truncated(len: usize) -> impl Fn(&Nfa, &Nfa) -> Ordering {
    move |x, y| compare_shortlex_upto(x, y, len).expect("same alphabet").relation
}

fn full(x: &Nfa, y: &Nfa) -> Ordering {
    compare_shortlex(x, y).expect("same alphabet").relation
}

/// Resolves remaining choices by the smallest successor index.
pub fn tie_break(n: &Nfa) -> Dfa {
    let accepting = (0..n.num_states()).map(|q| n.is_accepting(q)).collect();
    Dfa::from_fn(n.alphabet().clone(), n.num_states(), n.initial()[0], accepting, |q, a| {
        *n.successors(q, a).iter().min().expect("total instance")
    })
}

/// Operational form of "nondeterministically accepted implies universally
/// accepted": no reachable subset mixes accepting and rejecting states.
pub fn is_unambiguous(n: &Nfa) -> bool {
    let mut seen = std::collections::HashSet::new();
    let mut stack = vec![n.initial_set()];
    seen.insert(n.initial_set());
    while let Some(s) = stack.pop() {
        let acc = s.ones().filter(|&q| n.is_accepting(q)).count();
        if acc > 0 && acc < s.count_ones(..) {
            return false;
        }
        for a in n.alphabet().symbols() {
            let t: FixedBitSet = n.step_set(&s, a);
            if seen.insert(t.clone()) {
                stack.push(t);
            }
        }
    }
    true
}

pub fn prune_detailed(inst: &OnlineInstance) -> PruneResult {
    let mut cur = inst.nfa.clone();
    let mut rounds = Vec::new();
    let mut len = 0;
    while let Some(d) = min_difference(&cur) {
        len = len.max(d);
        let next = round(&cur, truncated(len));
        debug_assert!(next.num_transitions() < cur.num_transitions());
        cur = next;
        rounds.push(len);
        len += 1;
    }
    PruneResult {
        dfa: tie_break(&cur),
        unambiguous: is_unambiguous(&cur),
        pruned: cur,
        rounds,
    }
}

pub fn prune_weakly_dominant(inst: &OnlineInstance) -> Dfa {
    prune_detailed(inst).dfa
}

/// Comparison of the pruning scheme with two alternatives.
#[derive(Debug, Clone)]
pub struct Diagnostic {
    /// Rounds `0..bound` of the length-indexed iteration, none skipped.
    pub literal: Nfa,
    /// Repeated pruning by full-language comparison until stable.
    pub full_language: Nfa,
    /// The result of [`prune_detailed`].
    pub scheme: Nfa,
    /// Winning sets up to `bound` of the tie-broken strategies, in the order
    /// literal, full-language, scheme.
    pub win_sets: [Vec<Word>; 3],
}

impl Diagnostic {
    pub fn literal_matches_scheme(&self) -> bool {
        same_transitions(&self.literal, &self.scheme)
    }

    pub fn full_language_matches_scheme(&self) -> bool {
        same_transitions(&self.full_language, &self.scheme)
    }
}

fn same_transitions(a: &Nfa, b: &Nfa) -> bool {
    let mut x: Vec<_> = a.transitions().collect();
    let mut y: Vec<_> = b.transitions().collect();
    x.sort_unstable();
    y.sort_unstable();
    x == y
}

pub fn diagnose_bounded(inst: &OnlineInstance, bound: usize) -> Diagnostic {
    let mut literal = inst.nfa.clone();
    for n in 0..bound {
        literal = round(&literal, truncated(n));
    }
    let mut full_language = inst.nfa.clone();
    loop {
        let next = round(&full_language, full);
        if next.num_transitions() == full_language.num_transitions() {
            break;
        }
        full_language = next;
    }
    let scheme = prune_detailed(inst).pruned;
    let win = |n: &Nfa| {
        let d = tie_break(n);
        online_win_set(inst, OnlineStrategy::Dfa(&d), bound).expect("sub-automaton strategy")
    };
    Diagnostic {
        win_sets: [win(&literal), win(&full_language), win(&scheme)],
        literal,
        full_language,
        scheme,
    }
}

/// Words up to `max_len` on which the strategy ends in an accepting state.
pub fn online_win_set(inst: &OnlineInstance, strat: OnlineStrategy<'_>, max_len: usize) -> Result<Vec<Word>, OnlineError> {
    let n = &inst.nfa;
    let fmt = |w: &Word| n.alphabet().format_word(w);
    let mut out = Vec::new();
    let mut state_of: HashMap<Word, usize> = HashMap::new();
    for w in words_upto(n.alphabet().len(), max_len) {
        let q = match strat {
            OnlineStrategy::Dfa(d) => {
                if w.is_empty() {
                    d.initial()
                } else {
                    d.next(state_of[&w[..w.len() - 1]], w[w.len() - 1])
                }
            }
            OnlineStrategy::Table(t) => *t.get(&w).ok_or_else(|| OnlineError::TableTooShort(fmt(&w)))?,
        };
        let valid = match w.split_last() {
            None => q == inst.initial(),
            Some((&a, prefix)) => n.successors(state_of[prefix], a).contains(&q),
        };
        if !valid {
            return Err(OnlineError::InvalidStrategy(fmt(&w)));
        }
        if n.is_accepting(q) {
            out.push(w.clone());
        }
        state_of.insert(w, q);
    }
    Ok(out)
}

/// The shortlex-greatest set `W_N(ρ) ∩ Σ^{≤max_len}` over all strategies.
///
/// Table entries are fixed in shortlex word order while keeping every
/// partial table that achieves the lexicographically greatest acceptance
/// bits so far. Tables agreeing on the states of words whose children are
/// still open have the same future and are merged; `budget` bounds the
/// number of retained tables.
pub fn brute_force_best_online(inst: &OnlineInstance, max_len: usize, budget: usize) -> Result<Vec<Word>, OnlineError> {
    let n = &inst.nfa;
    let k = n.alphabet().len();
    let words = words_upto(k, max_len);
    let index: HashMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let last_child: Vec<Option<usize>> = words
        .iter()
        .map(|w| {
            (w.len() < max_len).then(|| {
                let mut c = w.clone();
                c.push(k - 1);
                index[&c]
            })
        })
        .collect();
    let mut frontier: Vec<Vec<usize>> = vec![vec![inst.initial()]];
    let mut winning = Vec::new();
    if n.is_accepting(inst.initial()) {
        winning.push(Vec::new());
    }
    for i in 1..words.len() {
        let w = &words[i];
        let parent = index[&w[..w.len() - 1].to_vec()];
        let a = w[w.len() - 1];
        let mut next: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        let mut best_bit = false;
        for table in &frontier {
            for &r in n.successors(table[parent], a) {
                let bit = n.is_accepting(r);
                if bit && !best_bit {
                    best_bit = true;
                    next.clear();
                }
                if bit != best_bit {
                    continue;
                }
                let mut t = table.clone();
                t.push(r);
                let key: Vec<usize> = (0..=i)
                    .filter(|&j| last_child[j].is_some_and(|c| c > i))
                    .map(|j| t[j])
                    .collect();
                next.entry(key).or_insert(t);
            }
        }
        if next.len() > budget {
            return Err(OnlineError::BudgetExceeded { size: next.len(), budget });
        }
        if best_bit {
            winning.push(w.clone());
        }
        frontier = next.into_values().collect();
        frontier.sort();
    }
    Ok(winning)
}
