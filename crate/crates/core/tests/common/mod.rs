//! Reference implementations used to cross-check the library. Each one is
//! written directly from the definitions, without the library's algorithms.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};

use cfgame_automata::{enumerate_upto, shortlex_cmp, words_upto, Dfa, Nfa, Symbol, Word};
use cfgame_core::game::Game;

/// Shortlex order on finite sets of words: the set holding the least word
/// of the symmetric difference is larger.
pub fn set_cmp(x: &BTreeSet<Word>, y: &BTreeSet<Word>) -> Ordering {
    let first = x
        .symmetric_difference(y)
        .min_by(|a, b| shortlex_cmp(a, b));
    match first {
        None => Ordering::Equal,
        Some(w) if x.contains(w) => Ordering::Greater,
        Some(_) => Ordering::Less,
    }
}

/// Least word of the symmetric difference, if any.
pub fn first_difference(x: &BTreeSet<Word>, y: &BTreeSet<Word>) -> Option<Word> {
    x.symmetric_difference(y).min_by(|a, b| shortlex_cmp(a, b)).cloned()
}

/// Universality by exploring reachable state subsets.
pub fn subset_universal(n: &Nfa) -> bool {
    let k = n.num_states();
    let mut start = vec![false; k];
    for &q in n.initial() {
        start[q] = true;
    }
    let mut seen: HashSet<Vec<bool>> = HashSet::from([start.clone()]);
    let mut stack = vec![start];
    while let Some(set) = stack.pop() {
        if !(0..k).any(|q| set[q] && n.is_accepting(q)) {
            return false;
        }
        for a in n.alphabet().symbols() {
            let mut next = vec![false; k];
            for q in (0..k).filter(|&q| set[q]) {
                for &r in n.successors(q, a) {
                    next[r] = true;
                }
            }
            if seen.insert(next.clone()) {
                stack.push(next);
            }
        }
    }
    true
}

/// Best achievable online winning set up to length `n` from state `q`.
/// Choices below different first symbols are independent, so maximizing
/// each subtree separately maximizes the whole set.
pub fn best_online(nfa: &Nfa, q: usize, n: usize) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    if nfa.is_accepting(q) {
        out.insert(Vec::new());
    }
    if n == 0 {
        return out;
    }
    for a in nfa.alphabet().symbols() {
        let best = nfa
            .successors(q, a)
            .iter()
            .map(|&r| best_online(nfa, r, n - 1))
            .max_by(set_cmp)
            .unwrap_or_default();
        for w in best {
            let mut v = vec![a];
            v.extend(w);
            out.insert(v);
        }
    }
    out
}

/// Words up to `n` accepted by following a DFA sub-automaton.
pub fn dfa_win_set(d: &Dfa, n: usize) -> BTreeSet<Word> {
    words_upto(d.alphabet().len(), n).into_iter().filter(|w| d.accepts(w)).collect()
}

/// Whether every word accepted by some run from a state is accepted by all
/// runs from that state, for words up to `n`.
pub fn accepted_implies_universal(nfa: &Nfa, n: usize) -> bool {
    for q in 0..nfa.num_states() {
        for w in words_upto(nfa.alphabet().len(), n) {
            let mut ends = vec![q];
            for &a in &w {
                let mut next: Vec<usize> = ends.iter().flat_map(|&p| nfa.successors(p, a).iter().copied()).collect();
                next.sort_unstable();
                next.dedup();
                ends = next;
            }
            let acc = ends.iter().filter(|&&p| nfa.is_accepting(p)).count();
            if acc > 0 && acc < ends.len() {
                return false;
            }
        }
    }
    true
}

/// Satisfiability by trying every assignment.
pub fn brute_sat(variables: usize, clauses: &[[i32; 3]]) -> bool {
    (0u32..1 << variables).any(|m| {
        clauses
            .iter()
            .all(|c| c.iter().any(|&l| (m >> (l.unsigned_abs() - 1) & 1 == 1) == (l > 0)))
    })
}

/// Prefix-freeness of a finite language by pairwise comparison.
pub fn words_prefix_free(words: &[Word]) -> bool {
    words
        .iter()
        .all(|u| words.iter().all(|v| u == v || !v.starts_with(u)))
}

/// Checks that `t2` over `Σ ∪ {$}` accepts exactly the words whose `$`-free
/// projection `t1` accepts, by exploring reachable pairs of the product in
/// which `t1` ignores `$`.
pub fn deletion_product_agrees(t1: &Dfa, t2: &Dfa, dollar: Symbol) -> bool {
    let mut seen = HashSet::from([(t1.initial(), t2.initial())]);
    let mut stack = vec![(t1.initial(), t2.initial())];
    while let Some((p, q)) = stack.pop() {
        if t1.is_accepting(p) != t2.is_accepting(q) {
            return false;
        }
        for a in t2.alphabet().symbols() {
            let p2 = if a == dollar { p } else { t1.next(p, a) };
            let pair = (p2, t2.next(q, a));
            if seen.insert(pair) {
                stack.push(pair);
            }
        }
    }
    true
}

/// Decides whether one one-pass strategy wins on every word of a set at
/// once. Strategies decide freely on histories of length at most `horizon`
/// and read afterwards.
///
/// A node is a history; all configurations sharing that history must be
/// won. At a node the decision for each current symbol is independent of
/// the others, and the children of different decisions have different
/// histories, so the search is an AND over symbols of an OR over Read and
/// Call.
pub struct OnePassOracle<'a> {
    game: &'a Game,
    horizon: usize,
    replies: HashMap<Symbol, Vec<Word>>,
    memo: HashMap<(usize, usize, Vec<Word>), bool>,
}

impl<'a> OnePassOracle<'a> {
    pub fn new(game: &'a Game, horizon: usize) -> Self {
        let replies = game
            .rules()
            .iter()
            .map(|(&a, r)| (a, enumerate_upto(&r.nfa, 12)))
            .collect();
        Self { game, horizon, replies, memo: HashMap::new() }
    }

    pub fn wins_all(&mut self, words: &[Word]) -> bool {
        let mut rests: Vec<Word> = words.to_vec();
        rests.sort();
        rests.dedup();
        self.node(self.game.target().initial(), 0, rests)
    }

    fn node(&mut self, t: usize, depth: usize, rests: Vec<Word>) -> bool {
        let key = (t, depth.min(self.horizon + 1), rests);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let rests = &key.2;
        let target = self.game.target();
        let mut ok = true;
        if rests.iter().any(|r| r.is_empty()) && !target.is_accepting(t) {
            ok = false;
        }
        let firsts: BTreeSet<Symbol> = rests.iter().filter_map(|r| r.first().copied()).collect();
        for f in firsts {
            if !ok {
                break;
            }
            let tails: Vec<Word> = rests.iter().filter(|r| r.first() == Some(&f)).map(|r| r[1..].to_vec()).collect();
            let mut read: Vec<Word> = tails.clone();
            read.sort();
            read.dedup();
            let mut won = self.node(target.next(t, f), depth + 1, read);
            if !won && depth <= self.horizon {
                if let Some(us) = self.replies.get(&f).cloned() {
                    let mut called: Vec<Word> = Vec::new();
                    for u in &us {
                        for tail in &tails {
                            let mut v = u.clone();
                            v.extend(tail);
                            called.push(v);
                        }
                    }
                    called.sort();
                    called.dedup();
                    won = self.node(t, depth + 1, called);
                }
            }
            ok = won;
        }
        self.memo.insert(key, ok);
        ok
    }

    /// The shortlex-largest set of words up to `n` that a single strategy
    /// wins, built greedily in shortlex order.
    pub fn best_set(&mut self, n: usize) -> BTreeSet<Word> {
        let mut chosen: Vec<Word> = Vec::new();
        for w in words_upto(self.game.alphabet().len(), n) {
            chosen.push(w);
            if !self.wins_all(&chosen) {
                chosen.pop();
            }
        }
        chosen.into_iter().collect()
    }
}
