//! Effect triples and synthesis of weakly dominant strategies for
//! prefix-free games.
//!
//! An effect triple `(p, a, S)` says that some terminating strategy, started
//! at target state `p` on a called `a`, ends every sub-play inside `S`.
//! Triples are admitted stratum by stratum: `(p, a, S)` enters when the
//! triples of earlier strata let Juliet steer every word of `L_a` into `S`.
//! That question is an online problem on an arena whose states pair a state
//! of the minimal DFA for `L_a` with the set of target states Romeo can have
//! forced so far. The top-level strategy solves the same online problem
//! with the target's accepting states as goal.

use std::collections::{BTreeMap, HashMap, VecDeque};

use cfgame_automata::{Dfa, Nfa, Symbol};

use crate::analysis::is_winning;
use crate::game::{classify, Game};
use crate::online::{prune_weakly_dominant, OnlineInstance};
use crate::play::{PlayError, StrategyAutomaton};

/// A set of target states as a bitmask.
pub type StateSet = u64;

pub const DEFAULT_CAP: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum SynthesisError {
    #[error("game is not prefix-free; transform it with an end symbol first")]
    NotPrefixFree,
    #[error("target has {states} states, above the cap of {cap}")]
    TooManyStates { states: usize, cap: usize },
    #[error("no admitted triple ({p}, {symbol}, S) with S inside {set:#b}")]
    MissingTriple { p: usize, symbol: String, set: StateSet },
    #[error("inducing automaton for ({p}, {symbol}, {set:#b}) does not win")]
    InducingFailed { p: usize, symbol: String, set: StateSet },
    #[error(transparent)]
    Play(#[from] PlayError),
}

fn bits(s: StateSet) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| s >> i & 1 == 1)
}

fn subset(a: StateSet, b: StateSet) -> bool {
    a & !b == 0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EffectTriple {
    pub p: usize,
    pub a: Symbol,
    pub set: StateSet,
}

impl EffectTriple {
    pub fn is_trivial(&self, g: &Game) -> bool {
        self.set >> g.target().next(self.p, self.a) & 1 == 1
    }

    pub fn format(&self, g: &Game) -> String {
        let states: Vec<String> = bits(self.set).map(|q| q.to_string()).collect();
        format!("({}, {}, {{{}}})", self.p, g.alphabet().name(self.a), states.join(","))
    }
}

/// A strategy automaton for the sub-play on a replacement word, with the
/// states that mark the end of the sub-play labelled by the target state
/// reached.
#[derive(Debug, Clone)]
pub struct InducingAutomaton {
    pub triple: EffectTriple,
    pub automaton: StrategyAutomaton,
    pub partition: Vec<Option<usize>>,
}

impl InducingAutomaton {
    /// The automaton preceded by a Call on the triple's symbol.
    pub fn wrapped(&self, g: &Game) -> StrategyAutomaton {
        let d = self.automaton.dfa();
        let n = d.num_states();
        let (start, call, dead) = (n, n + 1, n + 2);
        let a = self.triple.a;
        let hat = g.hat(a).expect("function symbol");
        let mut accepting = d.accepting().to_vec();
        accepting.extend([false, true, false]);
        let dfa = Dfa::from_fn(g.history_alphabet().clone(), n + 3, start, accepting, |q, h| {
            if q < n {
                d.next(q, h)
            } else if q == start && h == a {
                call
            } else if q == start && h == hat {
                d.initial()
            } else {
                dead
            }
        });
        StrategyAutomaton::general(g, dfa).expect("history alphabet")
    }
}

/// Admitted triples. For each `(p, a)` only the minimal sets are stored;
/// the trivial set `{δ(p,a)}` is always present.
#[derive(Debug, Clone)]
pub struct EffectSet {
    sets: BTreeMap<(usize, Symbol), Vec<(StateSet, Option<usize>)>>,
    pub inducing: Vec<InducingAutomaton>,
    pub strata: usize,
}

impl EffectSet {
    pub fn trivial(g: &Game) -> Self {
        let t = g.target();
        let mut sets = BTreeMap::new();
        for p in 0..t.num_states() {
            for a in g.alphabet().symbols() {
                sets.insert((p, a), vec![(1u64 << t.next(p, a), None)]);
            }
        }
        Self { sets, inducing: Vec::new(), strata: 0 }
    }

    /// Minimal admitted sets for `(p, a)`.
    pub fn options(&self, p: usize, a: Symbol) -> impl Iterator<Item = StateSet> + '_ {
        self.sets[&(p, a)].iter().map(|&(s, _)| s)
    }

    pub fn contains(&self, t: EffectTriple) -> bool {
        self.options(t.p, t.a).any(|s| subset(s, t.set))
    }

    /// Minimal non-trivial triples in canonical order.
    pub fn nontrivial(&self) -> impl Iterator<Item = EffectTriple> + '_ {
        self.sets.iter().flat_map(|(&(p, a), v)| {
            v.iter().filter(|(_, i)| i.is_some()).map(move |&(set, _)| EffectTriple { p, a, set })
        })
    }

    fn admit(&mut self, ind: InducingAutomaton) {
        let t = ind.triple;
        let id = self.inducing.len();
        self.inducing.push(ind);
        self.sets.get_mut(&(t.p, t.a)).unwrap().push((t.set, Some(id)));
    }

    /// The non-trivial triple `(p, a, S'')` with `S'' ⊆ within` whose set
    /// has the smallest bitmask.
    fn choose(&self, p: usize, a: Symbol, within: StateSet) -> Option<usize> {
        self.sets[&(p, a)]
            .iter()
            .filter(|&&(s, i)| i.is_some() && subset(s, within))
            .min_by_key(|&&(s, _)| s)
            .and_then(|&(_, i)| i)
    }
}

/// Minimal successor sets of `set` on `b`: unions of one admitted set per
/// member.
fn successor_sets(e: &EffectSet, set: StateSet, b: Symbol) -> Vec<StateSet> {
    let mut acc = vec![0u64];
    for q in bits(set) {
        let mut next: Vec<StateSet> = Vec::new();
        for &x in &acc {
            for o in e.options(q, b) {
                next.push(x | o);
            }
        }
        acc = minimal(next);
    }
    acc
}

fn minimal(mut sets: Vec<StateSet>) -> Vec<StateSet> {
    sets.sort_by_key(|s| (s.count_ones(), *s));
    sets.dedup();
    let mut out: Vec<StateSet> = Vec::new();
    for s in sets {
        if !out.iter().any(|&m| subset(m, s)) {
            out.push(s);
        }
    }
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArenaState {
    /// Tracker state and set of possible target states.
    Node(usize, StateSet),
    /// The input left the tracked language.
    Dead,
}

/// Online instance whose accepted words are the inputs Juliet can win.
#[derive(Debug, Clone)]
pub struct Arena {
    pub states: Vec<ArenaState>,
    pub nfa: Nfa,
    tracker_accepting: Vec<bool>,
}

impl Arena {
    fn build(g: &Game, e: &EffectSet, tracker: &Dfa, goal: StateSet, p0: usize) -> Arena {
        let live = tracker.coreachable();
        let mut states = vec![ArenaState::Node(tracker.initial(), 1 << p0)];
        let mut index = HashMap::from([(states[0], 0usize)]);
        let mut transitions = Vec::new();
        let mut head = 0;
        while head < states.len() {
            let k = head;
            head += 1;
            for b in g.alphabet().symbols() {
                let targets: Vec<ArenaState> = match states[k] {
                    ArenaState::Dead => vec![ArenaState::Dead],
                    ArenaState::Node(x, set) => {
                        let x2 = tracker.next(x, b);
                        if !live.contains(x2) {
                            vec![ArenaState::Dead]
                        } else {
                            successor_sets(e, set, b).into_iter().map(|s| ArenaState::Node(x2, s)).collect()
                        }
                    }
                };
                for s in targets {
                    let id = *index.entry(s).or_insert_with(|| {
                        states.push(s);
                        states.len() - 1
                    });
                    transitions.push((k, b, id));
                }
            }
        }
        let accepting = states.iter().enumerate().filter_map(|(i, s)| match *s {
            ArenaState::Node(x, set) if tracker.is_accepting(x) && subset(set, goal) => Some(i),
            _ => None,
        });
        let nfa = Nfa::new(g.alphabet().clone(), states.len(), [0], accepting, transitions)
            .expect("well-formed arena");
        let tracker_accepting = states
            .iter()
            .map(|s| matches!(*s, ArenaState::Node(x, _) if tracker.is_accepting(x)))
            .collect();
        Arena { states, nfa, tracker_accepting }
    }

    /// Whether Juliet can keep every run that completes a tracked word in
    /// an accepting state.
    fn safe(&self) -> bool {
        let n = self.states.len();
        let mut losing: Vec<bool> = (0..n)
            .map(|k| self.tracker_accepting[k] && !self.nfa.is_accepting(k))
            .collect();
        loop {
            let mut changed = false;
            for k in 0..n {
                if losing[k] {
                    continue;
                }
                let forced = self
                    .nfa
                    .alphabet()
                    .symbols()
                    .any(|b| self.nfa.successors(k, b).iter().all(|&r| losing[r]));
                if forced {
                    losing[k] = true;
                    changed = true;
                }
            }
            if !changed {
                return !losing[0];
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum TopState {
    Pair(usize, usize),
    Sim(usize, usize, usize),
    Call,
    Dead,
}

/// Strategy automaton that follows the online strategy `d` on the arena and
/// realizes each step by a read or by simulating an inducing automaton.
/// Returns the automaton and, per state, the target state of a finished
/// sub-play when the tracker accepts.
fn build_top(
    g: &Game,
    e: &EffectSet,
    arena: &Arena,
    d: &Dfa,
    p0: usize,
) -> Result<(Dfa, Vec<Option<usize>>), SynthesisError> {
    let t = g.target();
    let h_len = g.history_alphabet().len();
    let mut states = vec![TopState::Pair(p0, 0)];
    let mut index = HashMap::from([(states[0], 0usize)]);
    let mut delta = Vec::new();
    let mut head = 0;
    while head < states.len() {
        let cur = states[head];
        head += 1;
        for h in 0..h_len {
            let (b, hatted) = g.unhat(h);
            let next = match cur {
                TopState::Call | TopState::Dead => TopState::Dead,
                TopState::Sim(d2, tid, r) => {
                    let ind = &e.inducing[tid];
                    let r2 = ind.automaton.dfa().next(r, h);
                    match ind.partition[r2] {
                        Some(q) => TopState::Pair(q, d2),
                        None => TopState::Sim(d2, tid, r2),
                    }
                }
                TopState::Pair(p, k) => match arena.states[k] {
                    ArenaState::Dead => TopState::Dead,
                    ArenaState::Node(..) => {
                        let k2 = d.next(k, b);
                        match arena.states[k2] {
                            ArenaState::Dead => TopState::Dead,
                            ArenaState::Node(_, set) => {
                                let r = t.next(p, b);
                                if set >> r & 1 == 1 {
                                    if hatted {
                                        TopState::Dead
                                    } else {
                                        TopState::Pair(r, k2)
                                    }
                                } else if !g.is_function(b) {
                                    TopState::Dead
                                } else if !hatted {
                                    TopState::Call
                                } else {
                                    let tid = e.choose(p, b, set).ok_or_else(|| SynthesisError::MissingTriple {
                                        p,
                                        symbol: g.alphabet().name(b).to_string(),
                                        set,
                                    })?;
                                    TopState::Sim(k2, tid, e.inducing[tid].automaton.initial())
                                }
                            }
                        }
                    }
                },
            };
            let id = *index.entry(next).or_insert_with(|| {
                states.push(next);
                states.len() - 1
            });
            delta.push(id);
        }
    }
    let accepting: Vec<bool> = states
        .iter()
        .map(|s| match *s {
            TopState::Call => true,
            TopState::Sim(_, tid, r) => e.inducing[tid].automaton.dfa().is_accepting(r),
            _ => false,
        })
        .collect();
    let partition: Vec<Option<usize>> = states
        .iter()
        .map(|s| match *s {
            TopState::Pair(q, k) if arena.tracker_accepting[k] => Some(q),
            _ => None,
        })
        .collect();
    let dfa = Dfa::from_fn(g.history_alphabet().clone(), states.len(), 0, accepting, |q, h| {
        delta[q * h_len + h]
    });
    Ok(minimize_labelled(&dfa, &partition))
}

/// Minimizes a DFA whose states also carry labels that must be preserved.
fn minimize_labelled(d: &Dfa, labels: &[Option<usize>]) -> (Dfa, Vec<Option<usize>>) {
    let n = d.num_states();
    let k = d.alphabet().len();
    let mut class: Vec<usize> = {
        let mut ids = HashMap::new();
        (0..n)
            .map(|q| {
                let fresh = ids.len();
                *ids.entry((d.is_accepting(q), labels[q])).or_insert(fresh)
            })
            .collect()
    };
    let mut count = class.iter().max().map_or(0, |m| m + 1);
    loop {
        let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
        let next: Vec<usize> = (0..n)
            .map(|q| {
                let mut sig = Vec::with_capacity(k + 1);
                sig.push(class[q]);
                sig.extend((0..k).map(|a| class[d.next(q, a)]));
                let fresh = ids.len();
                *ids.entry(sig).or_insert(fresh)
            })
            .collect();
        let c = ids.len();
        class = next;
        if c == count {
            break;
        }
        count = c;
    }
    let mut repr = vec![usize::MAX; count];
    for q in 0..n {
        if repr[class[q]] == usize::MAX {
            repr[class[q]] = q;
        }
    }
    let mut number = vec![usize::MAX; count];
    let mut order = vec![class[d.initial()]];
    number[class[d.initial()]] = 0;
    let mut queue = VecDeque::from([class[d.initial()]]);
    while let Some(c) = queue.pop_front() {
        for a in 0..k {
            let c2 = class[d.next(repr[c], a)];
            if number[c2] == usize::MAX {
                number[c2] = order.len();
                order.push(c2);
                queue.push_back(c2);
            }
        }
    }
    let accepting = order.iter().map(|&c| d.is_accepting(repr[c])).collect();
    let out = Dfa::from_fn(d.alphabet().clone(), order.len(), 0, accepting, |i, a| {
        number[class[d.next(repr[order[i]], a)]]
    });
    (out, order.iter().map(|&c| labels[repr[c]]).collect())
}

fn check_game(g: &Game, cap: usize) -> Result<(), SynthesisError> {
    if !classify(g).prefix_free {
        return Err(SynthesisError::NotPrefixFree);
    }
    let states = g.target().num_states();
    if states > cap.min(64) {
        return Err(SynthesisError::TooManyStates { states, cap });
    }
    Ok(())
}

/// Builds the inducing automaton of `t` from the triples in `e`, or `None`
/// when `e` does not suffice to achieve `t`.
pub fn build_inducing_automaton(
    g: &Game,
    t: EffectTriple,
    e: &EffectSet,
) -> Result<Option<InducingAutomaton>, SynthesisError> {
    let Some(rule) = g.rule(t.a) else {
        return Ok(None);
    };
    let arena = Arena::build(g, e, &rule.dfa, t.set, t.p);
    if !arena.safe() {
        return Ok(None);
    }
    let inst = OnlineInstance::new(arena.nfa.clone()).expect("arenas are total");
    let d = prune_weakly_dominant(&inst);
    let (dfa, partition) = build_top(g, e, &arena, &d, t.p)?;
    let ind = InducingAutomaton {
        triple: t,
        automaton: StrategyAutomaton::general(g, dfa)?,
        partition,
    };
    let goal = (0..g.target().num_states()).map(|q| t.set >> q & 1 == 1).collect();
    let local = g
        .with_target(g.target().with_initial(t.p).with_accepting(goal))
        .expect("same alphabet");
    if !is_winning(&local, &ind.wrapped(g), &[t.a]) {
        return Err(SynthesisError::InducingFailed {
            p: t.p,
            symbol: g.alphabet().name(t.a).to_string(),
            set: t.set,
        });
    }
    Ok(Some(ind))
}

/// Least fixpoint of triple admission.
pub fn effect_fixpoint(g: &Game) -> Result<EffectSet, SynthesisError> {
    effect_fixpoint_capped(g, DEFAULT_CAP)
}

pub fn effect_fixpoint_capped(g: &Game, cap: usize) -> Result<EffectSet, SynthesisError> {
    check_game(g, cap)?;
    let t = g.target();
    let n = t.num_states();
    let mut candidates: Vec<StateSet> = (1..(1u64 << n)).collect();
    candidates.sort_by_key(|s| (s.count_ones(), *s));
    let mut e = EffectSet::trivial(g);
    loop {
        let mut admitted = Vec::new();
        for p in 0..n {
            for &a in g.functions() {
                let direct = t.next(p, a);
                let mut taken: Vec<StateSet> = e.options(p, a).collect();
                for &set in &candidates {
                    if set >> direct & 1 == 1 || taken.iter().any(|&m| subset(m, set)) {
                        continue;
                    }
                    if let Some(ind) = build_inducing_automaton(g, EffectTriple { p, a, set }, &e)? {
                        taken.push(set);
                        admitted.push(ind);
                    }
                }
            }
        }
        if admitted.is_empty() {
            return Ok(e);
        }
        e.strata += 1;
        for ind in admitted {
            e.admit(ind);
        }
    }
}

/// `N_E` as an online instance over the reachable subsets of `Q`.
#[derive(Debug, Clone)]
pub struct NeAutomaton {
    pub sets: Vec<StateSet>,
    pub nfa: Nfa,
}

/// `N_E` with every transition `(S, a, S')` such that each `p ∈ S` has an
/// admitted `(p, a, S'')` with `S'' ⊆ S'`.
pub fn build_ne(g: &Game, e: &EffectSet) -> NeAutomaton {
    let t = g.target();
    let n = t.num_states();
    let all: StateSet = if n == 64 { u64::MAX } else { (1 << n) - 1 };
    let goal: StateSet = t.accepting_states().map(|q| 1u64 << q).sum();
    let mut sets = vec![1u64 << t.initial()];
    let mut index = HashMap::from([(sets[0], 0usize)]);
    let mut transitions = Vec::new();
    let mut head = 0;
    while head < sets.len() {
        let s = sets[head];
        let k = head;
        head += 1;
        for a in g.alphabet().symbols() {
            for s2 in 0..=all {
                let ok = bits(s).all(|p| e.options(p, a).any(|o| subset(o, s2)));
                if ok {
                    let id = *index.entry(s2).or_insert_with(|| {
                        sets.push(s2);
                        sets.len() - 1
                    });
                    transitions.push((k, a, id));
                }
            }
        }
    }
    let accepting: Vec<usize> = (0..sets.len()).filter(|&i| subset(sets[i], goal)).collect();
    let nfa = Nfa::new(g.alphabet().clone(), sets.len(), [0], accepting, transitions).expect("well-formed");
    NeAutomaton { sets, nfa }
}

/// Result of the synthesis pipeline.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub strategy: StrategyAutomaton,
    pub effects: EffectSet,
    /// The reduced `N_E` used for the top-level online problem.
    pub arena: Arena,
    /// Weakly dominant online strategy on `arena`.
    pub online: Dfa,
}

/// The top-level strategy for `e`.
pub fn build_top_automaton(g: &Game, e: &EffectSet) -> Result<StrategyAutomaton, SynthesisError> {
    Ok(top_level(g, e)?.0)
}

fn top_level(g: &Game, e: &EffectSet) -> Result<(StrategyAutomaton, Arena, Dfa), SynthesisError> {
    let t = g.target();
    let goal: StateSet = t.accepting_states().map(|q| 1u64 << q).sum();
    let tracker = Dfa::universal(g.alphabet().clone());
    let arena = Arena::build(g, e, &tracker, goal, t.initial());
    let inst = OnlineInstance::new(arena.nfa.clone()).expect("arenas are total");
    let d = prune_weakly_dominant(&inst);
    let (dfa, _) = build_top(g, e, &arena, &d, t.initial())?;
    Ok((StrategyAutomaton::general(g, dfa)?, arena, d))
}

pub fn synthesize(g: &Game, cap: usize) -> Result<Synthesis, SynthesisError> {
    let effects = effect_fixpoint_capped(g, cap)?;
    let (strategy, arena, online) = top_level(g, &effects)?;
    Ok(Synthesis { strategy, effects, arena, online })
}

pub fn synthesize_weakly_dominant(g: &Game) -> Result<StrategyAutomaton, SynthesisError> {
    Ok(synthesize(g, DEFAULT_CAP)?.strategy)
}
