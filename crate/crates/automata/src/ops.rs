//! Products, inclusion, shortlex comparison, prefix-freeness and bounded
//! enumeration.

use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};

use fixedbitset::FixedBitSet;

use crate::alphabet::Word;
use crate::dfa::{determinize_minimize, Dfa};
use crate::nfa::Nfa;
use crate::AutomataError;

/// How a product state's acceptance combines its components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcceptRule {
    And,
    Or,
    /// Accepting in the first component but not in the second.
    Diff,
}

impl AcceptRule {
    pub fn apply(self, x: bool, y: bool) -> bool {
        match self {
            AcceptRule::And => x && y,
            AcceptRule::Or => x || y,
            AcceptRule::Diff => x && !y,
        }
    }
}

/// Reachable product of two DFAs with acceptance decided per state pair.
/// Returns the product and, for each of its states, the component pair.
pub fn product_by(
    a: &Dfa,
    b: &Dfa,
    accept: impl Fn(usize, usize) -> bool,
) -> Result<(Dfa, Vec<(usize, usize)>), AutomataError> {
    if a.alphabet() != b.alphabet() {
        return Err(AutomataError::AlphabetMismatch);
    }
    let k = a.alphabet().len();
    let start = (a.initial(), b.initial());
    let mut ids = HashMap::from([(start, 0usize)]);
    let mut pairs = vec![start];
    let mut delta = Vec::new();
    let mut head = 0;
    while head < pairs.len() {
        let (p, q) = pairs[head];
        head += 1;
        for s in 0..k {
            let next = (a.next(p, s), b.next(q, s));
            let id = *ids.entry(next).or_insert_with(|| {
                pairs.push(next);
                pairs.len() - 1
            });
            delta.push(id);
        }
    }
    let accepting = pairs.iter().map(|&(p, q)| accept(p, q)).collect();
    let dfa = Dfa::from_fn(a.alphabet().clone(), pairs.len(), 0, accepting, |q, s| {
        delta[q * k + s]
    });
    Ok((dfa, pairs))
}

pub fn product(a: &Dfa, b: &Dfa, rule: AcceptRule) -> Result<Dfa, AutomataError> {
    product_by(a, b, |p, q| rule.apply(a.is_accepting(p), b.is_accepting(q))).map(|(d, _)| d)
}

/// Outcome of a shortlex comparison of two languages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderResult {
    pub relation: Ordering,
    /// Shortlex-minimal word in exactly one of the languages.
    pub witness: Option<Word>,
}

/// Breadth-first search over pairs of subset states, symbols in alphabet
/// order. Returns the shortlex-minimal word whose pair of acceptance bits
/// satisfies `hit`, looking only at words up to `max_len` if given.
fn pair_search(
    a: &Nfa,
    b: &Nfa,
    hit: impl Fn(bool, bool) -> bool,
    max_len: Option<usize>,
) -> Result<Option<Word>, AutomataError> {
    if a.alphabet() != b.alphabet() {
        return Err(AutomataError::AlphabetMismatch);
    }
    let k = a.alphabet().len();
    let start = (a.initial_set(), b.initial_set());
    if hit(a.set_accepts(&start.0), b.set_accepts(&start.1)) {
        return Ok(Some(Vec::new()));
    }
    // Pairs where neither side can still accept are never interesting.
    let co_a = a.coreachable();
    let co_b = b.coreachable();
    let dead = |s: &FixedBitSet, co: &FixedBitSet| s.is_disjoint(co);
    let mut parent: Vec<(usize, usize)> = vec![(usize::MAX, 0)];
    let mut depth = vec![0usize];
    let mut ids = HashMap::from([(start.clone(), 0usize)]);
    let mut states = vec![start];
    let mut head = 0;
    while head < states.len() {
        let id = head;
        head += 1;
        if max_len.is_some_and(|m| depth[id] >= m) {
            continue;
        }
        for s in 0..k {
            let na = a.step_set(&states[id].0, s);
            let nb = b.step_set(&states[id].1, s);
            if dead(&na, &co_a) && dead(&nb, &co_b) && !hit(false, false) {
                continue;
            }
            let key = (na, nb);
            if ids.contains_key(&key) {
                continue;
            }
            let nid = states.len();
            let found = hit(a.set_accepts(&key.0), b.set_accepts(&key.1));
            ids.insert(key.clone(), nid);
            states.push(key);
            parent.push((id, s));
            depth.push(depth[id] + 1);
            if found {
                let mut word = Vec::new();
                let mut cur = nid;
                while cur != 0 {
                    let (p, sym) = parent[cur];
                    word.push(sym);
                    cur = p;
                }
                word.reverse();
                return Ok(Some(word));
            }
        }
    }
    Ok(None)
}

/// Whether `L(a) ⊆ L(b)`; on failure, the shortlex-minimal word of
/// `L(a) \ L(b)`.
pub fn contains(a: &Nfa, b: &Nfa) -> Result<(bool, Option<Word>), AutomataError> {
    let w = pair_search(a, b, |x, y| x && !y, None)?;
    Ok((w.is_none(), w))
}

fn order_from(a: &Nfa, w: Option<Word>) -> OrderResult {
    match w {
        None => OrderResult {
            relation: Ordering::Equal,
            witness: None,
        },
        Some(w) => OrderResult {
            relation: if a.accepts(&w) {
                Ordering::Greater
            } else {
                Ordering::Less
            },
            witness: Some(w),
        },
    }
}

/// Shortlex order on languages: the language containing the minimal word
/// of the symmetric difference is the greater one.
pub fn compare_shortlex(a: &Nfa, b: &Nfa) -> Result<OrderResult, AutomataError> {
    let w = pair_search(a, b, |x, y| x != y, None)?;
    Ok(order_from(a, w))
}

/// Shortlex comparison of `L(a) ∩ Σ^{≤n}` with `L(b) ∩ Σ^{≤n}`.
pub fn compare_shortlex_upto(a: &Nfa, b: &Nfa, n: usize) -> Result<OrderResult, AutomataError> {
    let w = pair_search(a, b, |x, y| x != y, Some(n))?;
    Ok(order_from(a, w))
}

pub fn equivalent(a: &Nfa, b: &Nfa) -> Result<bool, AutomataError> {
    Ok(pair_search(a, b, |x, y| x != y, None)?.is_none())
}

/// Shortlex-minimal accepted word.
pub fn shortlex_min_word(n: &Nfa) -> Option<Word> {
    let k = n.alphabet().len();
    let start = n.initial_set();
    if n.set_accepts(&start) {
        return Some(Vec::new());
    }
    let co = n.coreachable();
    let mut seen = HashMap::from([(start.clone(), (usize::MAX, 0usize))]);
    let mut order = vec![start];
    let mut head = 0;
    while head < order.len() {
        let id = head;
        head += 1;
        for s in 0..k {
            let next = n.step_set(&order[id], s);
            if next.is_disjoint(&co) || seen.contains_key(&next) {
                continue;
            }
            seen.insert(next.clone(), (id, s));
            let accepted = n.set_accepts(&next);
            order.push(next);
            if accepted {
                let mut word = vec![s];
                let mut cur = id;
                while cur != 0 {
                    let (p, sym) = seen[&order[cur]];
                    word.push(sym);
                    cur = p;
                }
                word.reverse();
                return Some(word);
            }
        }
    }
    None
}

/// All accepted words of length at most `max_len`, in shortlex order.
pub fn enumerate_upto(n: &Nfa, max_len: usize) -> Vec<Word> {
    let k = n.alphabet().len();
    let co = n.coreachable();
    let mut out = Vec::new();
    let start = n.initial_set();
    if start.is_disjoint(&co) {
        return out;
    }
    let mut level = vec![(Vec::new(), start)];
    for len in 0..=max_len {
        for (w, s) in &level {
            if n.set_accepts(s) {
                out.push(w.clone());
            }
        }
        if len == max_len {
            break;
        }
        let mut next = Vec::new();
        for (w, s) in &level {
            for a in 0..k {
                let t = n.step_set(s, a);
                if t.is_disjoint(&co) {
                    continue;
                }
                let mut v = w.clone();
                v.push(a);
                next.push((v, t));
            }
        }
        level = next;
    }
    out
}

/// Whether no accepted word is a proper prefix of another accepted word.
/// On failure returns a pair `(u, uv)` of accepted words with `v` non-empty.
pub fn is_prefix_free(n: &Nfa) -> (bool, Option<(Word, Word)>) {
    let d = determinize_minimize(n);
    match prefix_violation(&d) {
        None => (true, None),
        Some(pair) => (false, Some(pair)),
    }
}

/// Prefix-freeness witness on a DFA: the first accepting state in
/// breadth-first order that reaches an accepting state by a non-empty word.
pub fn prefix_violation(d: &Dfa) -> Option<(Word, Word)> {
    let access = d.access_words();
    let mut candidates: Vec<usize> = d
        .accepting_states()
        .filter(|&q| access[q].is_some())
        .collect();
    candidates.sort_by(|&x, &y| {
        let (u, v) = (access[x].as_ref().unwrap(), access[y].as_ref().unwrap());
        crate::alphabet::shortlex_cmp(u, v)
    });
    for u in candidates {
        if let Some(v) = nonempty_path_to_accepting(d, u) {
            let prefix = access[u].clone().unwrap();
            let mut long = prefix.clone();
            long.extend(v);
            return Some((prefix, long));
        }
    }
    None
}

fn nonempty_path_to_accepting(d: &Dfa, from: usize) -> Option<Word> {
    let k = d.alphabet().len();
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; d.num_states()];
    let mut visited = vec![false; d.num_states()];
    let mut queue = VecDeque::new();
    for s in 0..k {
        let q = d.next(from, s);
        if !visited[q] {
            visited[q] = true;
            prev[q] = Some((usize::MAX, s));
            queue.push_back(q);
        }
    }
    while let Some(p) = queue.pop_front() {
        if d.is_accepting(p) {
            let mut word = Vec::new();
            let mut cur = p;
            loop {
                let (pp, s) = prev[cur].unwrap();
                word.push(s);
                if pp == usize::MAX {
                    break;
                }
                cur = pp;
            }
            word.reverse();
            return Some(word);
        }
        for s in 0..k {
            let q = d.next(p, s);
            if !visited[q] {
                visited[q] = true;
                prev[q] = Some((p, s));
                queue.push_back(q);
            }
        }
    }
    None
}
