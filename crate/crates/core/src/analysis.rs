//! Move/Next/Inf saturation, the losing-set NFA and the deciders built on it.

use std::collections::{BTreeSet, HashMap};

use cfgame_automata::{contains, Nfa, RegexAst, Symbol, Word};
use fixedbitset::FixedBitSet;

use crate::game::Game;
use crate::play::{strongly_regular_automaton, PlayError, StrategyAutomaton, StronglyRegularSpec};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("search needs {needed} candidates, budget is {budget}")]
    BudgetExceeded { needed: String, budget: u64 },
    #[error("guided search returned a reroute set that does not win")]
    GuidedMismatch,
    #[error(transparent)]
    Play(#[from] PlayError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Term {
    Symbol(Symbol),
    Epsilon,
    Concat(usize, usize),
    Union(usize, usize),
    Star(usize),
}

#[derive(Debug, Clone, Copy)]
enum Parent {
    ConcatLeft { parent: usize, right: usize },
    ConcatRight { parent: usize, left: usize },
    Union(usize),
    Star(usize),
}

/// Hash-consed subexpressions of all rules. Ids below `|Σ|` are the symbols.
#[derive(Debug, Clone)]
pub struct SubexprIndex {
    terms: Vec<Term>,
    parents: Vec<Vec<Parent>>,
    /// Rules whose regex is the given term.
    root_of: Vec<Vec<Symbol>>,
    roots: HashMap<Symbol, usize>,
}

impl SubexprIndex {
    pub fn new(g: &Game) -> Self {
        let mut ix = SubexprIndex {
            terms: Vec::new(),
            parents: Vec::new(),
            root_of: Vec::new(),
            roots: HashMap::new(),
        };
        let mut ids: HashMap<Term, usize> = HashMap::new();
        for a in g.alphabet().symbols() {
            ix.intern(&mut ids, Term::Symbol(a));
        }
        for (&a, rule) in g.rules() {
            let t = ix.add(&mut ids, &rule.regex);
            ix.roots.insert(a, t);
            ix.root_of[t].push(a);
        }
        ix
    }

    fn intern(&mut self, ids: &mut HashMap<Term, usize>, term: Term) -> usize {
        if let Some(&id) = ids.get(&term) {
            return id;
        }
        let id = self.terms.len();
        match term {
            Term::Concat(l, r) => {
                self.parents[l].push(Parent::ConcatLeft { parent: id, right: r });
                self.parents[r].push(Parent::ConcatRight { parent: id, left: l });
            }
            Term::Union(l, r) => {
                self.parents[l].push(Parent::Union(id));
                if r != l {
                    self.parents[r].push(Parent::Union(id));
                }
            }
            Term::Star(e) => self.parents[e].push(Parent::Star(id)),
            Term::Symbol(_) | Term::Epsilon => {}
        }
        ids.insert(term.clone(), id);
        self.terms.push(term);
        self.parents.push(Vec::new());
        self.root_of.push(Vec::new());
        id
    }

    fn add(&mut self, ids: &mut HashMap<Term, usize>, r: &RegexAst) -> usize {
        let term = match r {
            RegexAst::Symbol(a) => Term::Symbol(*a),
            RegexAst::Epsilon => Term::Epsilon,
            RegexAst::Concat(l, r) => Term::Concat(self.add(ids, l), self.add(ids, r)),
            RegexAst::Union(l, r) => Term::Union(self.add(ids, l), self.add(ids, r)),
            RegexAst::Star(e) => Term::Star(self.add(ids, e)),
        };
        self.intern(ids, term)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Term id of the regex of rule `a`.
    pub fn root(&self, a: Symbol) -> Option<usize> {
        self.roots.get(&a).copied()
    }
}

/// The product of a strategy automaton with the target, restricted to pairs
/// reachable by following the strategy's decisions.
#[derive(Debug, Clone)]
pub struct ProductSpace {
    pub states: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
    /// `read[k*|Σ|+a]`: successor on `a` when `a` is read at `k`.
    read: Vec<usize>,
    /// `call[k*|Σ|+a]`: successor after `â` when `a` is called at `k`.
    call: Vec<Option<usize>>,
    sigma: usize,
}

impl ProductSpace {
    fn new(g: &Game, a: &StrategyAutomaton) -> Self {
        let t = g.target();
        let sigma = g.alphabet().len();
        let mut space = ProductSpace {
            states: vec![(a.initial(), t.initial())],
            index: HashMap::from([((a.initial(), t.initial()), 0)]),
            read: Vec::new(),
            call: Vec::new(),
            sigma,
        };
        let mut head = 0;
        while head < space.states.len() {
            let (p, q) = space.states[head];
            head += 1;
            for s in 0..sigma {
                let r = space.intern((a.after_read(p, s), t.next(q, s)));
                space.read.push(r);
                let c = a.calls(p, s).then(|| space.intern((a.after_call(p, s), q)));
                space.call.push(c);
            }
        }
        space
    }

    fn intern(&mut self, pair: (usize, usize)) -> usize {
        if let Some(&k) = self.index.get(&pair) {
            return k;
        }
        let k = self.states.len();
        self.states.push(pair);
        self.index.insert(pair, k);
        k
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, p: usize, q: usize) -> Option<usize> {
        self.index.get(&(p, q)).copied()
    }

    pub fn read_successor(&self, k: usize, a: Symbol) -> usize {
        self.read[k * self.sigma + a]
    }

    /// Entry state of the sub-play when `a` is called at `k`.
    pub fn call_entry(&self, k: usize, a: Symbol) -> Option<usize> {
        self.call[k * self.sigma + a]
    }
}

/// Least fixpoints of the Move, Next and Inf definitions over a product
/// space.
#[derive(Debug, Clone)]
pub struct Relations {
    pub space: ProductSpace,
    pub terms: SubexprIndex,
    n: usize,
    move_fwd: Vec<FixedBitSet>,
    move_bwd: Vec<FixedBitSet>,
    /// Per call position `(k,a)`: bitset over `t*n + k'` of Next facts
    /// `(k', t, k, a)`.
    next: HashMap<(usize, Symbol), FixedBitSet>,
    inf: FixedBitSet,
    additions: usize,
}

pub fn compute_relations(g: &Game, a: &StrategyAutomaton) -> Relations {
    let space = ProductSpace::new(g, a);
    let terms = SubexprIndex::new(g);
    let n = space.len();
    let nt = terms.len();
    let mut rel = Relations {
        n,
        move_fwd: vec![FixedBitSet::with_capacity(n); nt * n],
        move_bwd: vec![FixedBitSet::with_capacity(n); nt * n],
        next: HashMap::new(),
        inf: FixedBitSet::with_capacity(nt * n),
        additions: 0,
        space,
        terms,
    };
    let callers = rel.callers(g);
    rel.saturate_move(g, &callers);
    let positions: Vec<(usize, Symbol)> = (0..n)
        .flat_map(|k| g.functions().iter().map(move |&f| (k, f)))
        .filter(|&(k, f)| rel.space.call_entry(k, f).is_some())
        .collect();
    for &(k, f) in &positions {
        let facts = rel.propagate(&callers, [(k, f)]);
        rel.next.insert((k, f), facts);
    }
    let seeds: Vec<(usize, usize)> = positions
        .iter()
        .filter(|&&(k, f)| {
            let entry = rel.space.call_entry(k, f).unwrap();
            let root = rel.terms.root(f).unwrap();
            rel.next[&(k, f)].contains(root * n + entry)
        })
        .copied()
        .collect();
    rel.inf = rel.propagate(&callers, seeds);
    rel
}

type Callers = HashMap<(Symbol, usize), Vec<usize>>;

impl Relations {
    /// `(a, entry) ↦ [k]` for every call of `a` at `k` entering `entry`.
    fn callers(&self, g: &Game) -> Callers {
        let mut out: Callers = HashMap::new();
        for k in 0..self.n {
            for &f in g.functions() {
                if let Some(e) = self.space.call_entry(k, f) {
                    out.entry((f, e)).or_default().push(k);
                }
            }
        }
        out
    }

    fn add_move(&mut self, k: usize, t: usize, k2: usize, work: &mut Vec<(usize, usize, usize)>) {
        let n = self.n;
        if !self.move_fwd[t * n + k].put(k2) {
            self.move_bwd[t * n + k2].insert(k);
            self.additions += 1;
            work.push((k, t, k2));
        }
    }

    fn saturate_move(&mut self, g: &Game, callers: &Callers) {
        let n = self.n;
        let mut work = Vec::new();
        for k in 0..n {
            for a in g.alphabet().symbols() {
                if self.space.call_entry(k, a).is_none() {
                    let k2 = self.space.read_successor(k, a);
                    self.add_move(k, a, k2, &mut work);
                }
            }
            for t in 0..self.terms.len() {
                if matches!(self.terms.terms[t], Term::Epsilon | Term::Star(_)) {
                    self.add_move(k, t, k, &mut work);
                }
            }
        }
        while let Some((k, t, k2)) = work.pop() {
            for i in 0..self.terms.parents[t].len() {
                match self.terms.parents[t][i] {
                    Parent::ConcatLeft { parent, right } => {
                        let ends: Vec<usize> = self.move_fwd[right * n + k2].ones().collect();
                        for k3 in ends {
                            self.add_move(k, parent, k3, &mut work);
                        }
                    }
                    Parent::ConcatRight { parent, left } => {
                        let starts: Vec<usize> = self.move_bwd[left * n + k].ones().collect();
                        for k0 in starts {
                            self.add_move(k0, parent, k2, &mut work);
                        }
                    }
                    Parent::Union(u) => self.add_move(k, u, k2, &mut work),
                    Parent::Star(s) => {
                        let ends: Vec<usize> = self.move_fwd[s * n + k2].ones().collect();
                        for k3 in ends {
                            self.add_move(k, s, k3, &mut work);
                        }
                    }
                }
            }
            if let Term::Star(inner) = self.terms.terms[t] {
                let starts: Vec<usize> = self.move_bwd[inner * n + k].ones().collect();
                for k0 in starts {
                    self.add_move(k0, t, k2, &mut work);
                }
            }
            for i in 0..self.terms.root_of[t].len() {
                let f = self.terms.root_of[t][i];
                if let Some(ks) = callers.get(&(f, k)) {
                    for k0 in ks.clone() {
                        self.add_move(k0, f, k2, &mut work);
                    }
                }
            }
        }
    }

    /// Closure of seed facts `(k, t)` under the rules shared by Next and
    /// Inf: concatenation prefixes, Move-then-fact concatenation, unions,
    /// stars and rule calls.
    fn propagate(&self, callers: &Callers, seeds: impl IntoIterator<Item = (usize, usize)>) -> FixedBitSet {
        let n = self.n;
        let mut facts = FixedBitSet::with_capacity(self.terms.len() * n);
        let mut work = Vec::new();
        let add = |k: usize, t: usize, facts: &mut FixedBitSet, work: &mut Vec<(usize, usize)>| {
            if !facts.put(t * n + k) {
                work.push((k, t));
            }
        };
        for (k, t) in seeds {
            add(k, t, &mut facts, &mut work);
        }
        while let Some((k, t)) = work.pop() {
            for &parent in &self.terms.parents[t] {
                match parent {
                    Parent::ConcatLeft { parent, .. } | Parent::Union(parent) => {
                        add(k, parent, &mut facts, &mut work)
                    }
                    Parent::ConcatRight { parent, left } => {
                        for k0 in self.move_bwd[left * n + k].ones() {
                            add(k0, parent, &mut facts, &mut work);
                        }
                    }
                    Parent::Star(s) => {
                        for k0 in self.move_bwd[s * n + k].ones() {
                            add(k0, s, &mut facts, &mut work);
                        }
                    }
                }
            }
            for &f in &self.terms.root_of[t] {
                if let Some(ks) = callers.get(&(f, k)) {
                    for &k0 in ks {
                        add(k0, f, &mut facts, &mut work);
                    }
                }
            }
        }
        facts
    }

    pub fn num_states(&self) -> usize {
        self.n
    }

    pub fn has_move(&self, k: usize, t: usize, k2: usize) -> bool {
        self.move_fwd[t * self.n + k].contains(k2)
    }

    /// States `k'` with `(k, a, k') ∈ Move` for a symbol `a`.
    pub fn move_targets(&self, k: usize, a: Symbol) -> impl Iterator<Item = usize> + '_ {
        self.move_fwd[a * self.n + k].ones()
    }

    /// Whether `(k, t, k_call, a) ∈ Next` for a call position `(k_call, a)`.
    pub fn has_next(&self, k: usize, t: usize, k_call: usize, a: Symbol) -> bool {
        self.next.get(&(k_call, a)).is_some_and(|s| s.contains(t * self.n + k))
    }

    pub fn has_inf(&self, k: usize, t: usize) -> bool {
        self.inf.contains(t * self.n + k)
    }

    /// Symbol-level Inf pairs.
    pub fn inf_pairs(&self, sigma: usize) -> Vec<(usize, Symbol)> {
        (0..self.n)
            .flat_map(|k| (0..sigma).map(move |a| (k, a)))
            .filter(|&(k, a)| self.has_inf(k, a))
            .collect()
    }

    pub fn move_size(&self) -> usize {
        self.move_fwd.iter().map(|s| s.count_ones(..)).sum()
    }

    /// Number of Move facts added during saturation.
    pub fn additions(&self) -> usize {
        self.additions
    }
}

/// NFA for the words on which Romeo wins or can force an infinite play.
#[derive(Debug, Clone)]
pub struct LosingNfa {
    pub nfa: Nfa,
    /// Product pair of each state except the last, which is `q∞`.
    pub states: Vec<(usize, usize)>,
    pub inf_pairs: Vec<(usize, Symbol)>,
}

impl LosingNfa {
    pub fn sink(&self) -> usize {
        self.states.len()
    }
}

pub fn losing_nfa(g: &Game, a: &StrategyAutomaton) -> LosingNfa {
    losing_nfa_from(g, &compute_relations(g, a))
}

pub fn losing_nfa_from(g: &Game, rel: &Relations) -> LosingNfa {
    let n = rel.num_states();
    let sigma = g.alphabet().len();
    let t = g.target();
    let inf_pairs = rel.inf_pairs(sigma);
    let mut transitions = Vec::new();
    for k in 0..n {
        for a in 0..sigma {
            transitions.extend(rel.move_targets(k, a).map(|k2| (k, a, k2)));
        }
    }
    transitions.extend(inf_pairs.iter().map(|&(k, a)| (k, a, n)));
    transitions.extend((0..sigma).map(|a| (n, a, n)));
    let accepting = (0..n)
        .filter(|&k| !t.is_accepting(rel.space.states[k].1))
        .chain([n]);
    let nfa = Nfa::new(g.alphabet().clone(), n + 1, [0], accepting, transitions)
        .expect("well-formed losing automaton");
    LosingNfa { nfa, states: rel.space.states.clone(), inf_pairs }
}

/// Decides `w ∈ W(σ_A)` with the losing automaton.
#[derive(Debug, Clone)]
pub struct WinningOracle {
    pub losing: LosingNfa,
}

impl WinningOracle {
    pub fn new(g: &Game, a: &StrategyAutomaton) -> Self {
        Self { losing: losing_nfa(g, a) }
    }

    pub fn wins(&self, w: &[Symbol]) -> bool {
        !self.losing.nfa.set_accepts(&self.losing.nfa.run_set(w))
    }

    /// Words of length at most `n` in the winning set, in shortlex order.
    pub fn winning_set_upto(&self, n: usize) -> Vec<Word> {
        let nfa = &self.losing.nfa;
        let mut level = vec![(Vec::new(), nfa.initial_set())];
        let mut out = Vec::new();
        for len in 0..=n {
            out.extend(level.iter().filter(|(_, s)| !nfa.set_accepts(s)).map(|(w, _)| w.clone()));
            if len == n {
                break;
            }
            let mut next = Vec::with_capacity(level.len() * nfa.alphabet().len());
            for (w, s) in &level {
                for a in nfa.alphabet().symbols() {
                    let mut v = w.clone();
                    v.push(a);
                    next.push((v, nfa.step_set(s, a)));
                }
            }
            level = next;
        }
        out
    }
}

pub fn is_winning(g: &Game, a: &StrategyAutomaton, w: &[Symbol]) -> bool {
    WinningOracle::new(g, a).wins(w)
}

pub fn winning_set_upto(g: &Game, a: &StrategyAutomaton, n: usize) -> Vec<Word> {
    WinningOracle::new(g, a).winning_set_upto(n)
}

/// Whether `W(σ_{A1}) ⊆ W(σ_{A2})`; otherwise the shortlex-least word of
/// `W(σ_{A1}) \ W(σ_{A2})`.
pub fn is_dominated(g: &Game, a1: &StrategyAutomaton, a2: &StrategyAutomaton) -> (bool, Option<Word>) {
    let b1 = losing_nfa(g, a1);
    let b2 = losing_nfa(g, a2);
    contains(&b2.nfa, &b1.nfa).expect("same alphabet")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// All `2^(|Q|·|Σ_f|)` reroute sets in bitmask order.
    Exhaustive,
    /// Reroute sets by increasing size.
    Incremental,
    /// Depth-first search that fixes a decision only when a play reaches it.
    Guided,
}

pub const DEFAULT_BUDGET: u64 = 1 << 20;

/// Searches for a strongly regular strategy winning on `w`.
pub fn exists_winning_sreg(
    g: &Game,
    w: &[Symbol],
    mode: SearchMode,
    budget: u64,
) -> Result<Option<StronglyRegularSpec>, AnalysisError> {
    let pairs: Vec<(usize, Symbol)> = (0..g.target().num_states())
        .flat_map(|q| g.functions().iter().map(move |&f| (q, f)))
        .collect();
    let m = pairs.len();
    let check = |spec: &StronglyRegularSpec| -> Result<bool, AnalysisError> {
        Ok(is_winning(g, &strongly_regular_automaton(g, spec)?, w))
    };
    match mode {
        SearchMode::Exhaustive => {
            if m >= 64 || (1u64 << m) > budget {
                return Err(AnalysisError::BudgetExceeded { needed: format!("2^{m}"), budget });
            }
            for mask in 0u64..(1 << m) {
                let spec = StronglyRegularSpec::new(
                    (0..m).filter(|i| mask >> i & 1 == 1).map(|i| pairs[i]),
                );
                if check(&spec)? {
                    return Ok(Some(spec));
                }
            }
            Ok(None)
        }
        SearchMode::Incremental => {
            let mut used = 0u64;
            for size in 0..=m {
                let mut combo: Vec<usize> = (0..size).collect();
                loop {
                    used += 1;
                    if used > budget {
                        return Err(AnalysisError::BudgetExceeded { needed: format!("more than {budget}"), budget });
                    }
                    let spec = StronglyRegularSpec::new(combo.iter().map(|&i| pairs[i]));
                    if check(&spec)? {
                        return Ok(Some(spec));
                    }
                    if !next_combination(&mut combo, m) {
                        break;
                    }
                }
            }
            Ok(None)
        }
        SearchMode::Guided => {
            if !g.finite_rules() {
                return exists_winning_sreg(g, w, SearchMode::Incremental, budget);
            }
            let mut search = Guided::new(g, w, budget);
            match search.run(&mut HashMap::new())? {
                None => Ok(None),
                Some(spec) => {
                    if check(&spec)? {
                        Ok(Some(spec))
                    } else {
                        Err(AnalysisError::GuidedMismatch)
                    }
                }
            }
        }
    }
}

fn next_combination(combo: &mut [usize], m: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < m - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

enum Sim {
    Done(BTreeSet<usize>),
    Fail,
    Need(usize, Symbol),
}

/// Lazy search over reroute decisions. Each simulation explores every Romeo
/// reply; it stops at the first undecided `(q, a)`, which is then branched
/// on. Plays that reach a target state from which `F` is unreachable, or
/// that repeat a `(q, a)` call on the nesting stack, prune the branch.
struct Guided<'a> {
    g: &'a Game,
    w: &'a [Symbol],
    budget: u64,
    used: u64,
    live: FixedBitSet,
    replies: HashMap<Symbol, Vec<Word>>,
}

impl<'a> Guided<'a> {
    fn new(g: &'a Game, w: &'a [Symbol], budget: u64) -> Self {
        let replies = g
            .rules()
            .iter()
            .map(|(&a, r)| (a, cfgame_automata::enumerate_upto(&r.nfa, r.dfa.num_states())))
            .collect();
        Self { g, w, budget, used: 0, live: g.target().coreachable(), replies }
    }

    fn run(&mut self, assign: &mut HashMap<(usize, Symbol), bool>) -> Result<Option<StronglyRegularSpec>, AnalysisError> {
        self.used += 1;
        if self.used > self.budget {
            return Err(AnalysisError::BudgetExceeded { needed: format!("more than {}", self.budget), budget: self.budget });
        }
        match self.simulate(assign) {
            Sim::Fail => Ok(None),
            Sim::Done(_) => Ok(Some(StronglyRegularSpec::new(
                assign.iter().filter(|(_, &c)| c).map(|(&k, _)| k),
            ))),
            Sim::Need(q, a) => {
                for choice in [false, true] {
                    assign.insert((q, a), choice);
                    if let Some(spec) = self.run(assign)? {
                        return Ok(Some(spec));
                    }
                }
                assign.remove(&(q, a));
                Ok(None)
            }
        }
    }

    fn simulate(&self, assign: &HashMap<(usize, Symbol), bool>) -> Sim {
        let t = self.g.target();
        let mut memo = HashMap::new();
        let mut stack = Vec::new();
        match self.word(BTreeSet::from([t.initial()]), self.w, assign, &mut memo, &mut stack) {
            Sim::Done(ends) if ends.iter().all(|&q| t.is_accepting(q)) => Sim::Done(ends),
            Sim::Done(_) => Sim::Fail,
            other => other,
        }
    }

    fn word(
        &self,
        mut cur: BTreeSet<usize>,
        w: &[Symbol],
        assign: &HashMap<(usize, Symbol), bool>,
        memo: &mut HashMap<(usize, Symbol), BTreeSet<usize>>,
        stack: &mut Vec<(usize, Symbol)>,
    ) -> Sim {
        for &a in w {
            let mut next = BTreeSet::new();
            for q in cur {
                match self.symbol(q, a, assign, memo, stack) {
                    Sim::Done(s) => next.extend(s),
                    other => return other,
                }
            }
            cur = next;
        }
        Sim::Done(cur)
    }

    fn symbol(
        &self,
        q: usize,
        a: Symbol,
        assign: &HashMap<(usize, Symbol), bool>,
        memo: &mut HashMap<(usize, Symbol), BTreeSet<usize>>,
        stack: &mut Vec<(usize, Symbol)>,
    ) -> Sim {
        let call = if self.g.is_function(a) {
            match assign.get(&(q, a)) {
                None => return Sim::Need(q, a),
                Some(&c) => c,
            }
        } else {
            false
        };
        if !call {
            let r = self.g.target().next(q, a);
            return if self.live.contains(r) { Sim::Done(BTreeSet::from([r])) } else { Sim::Fail };
        }
        if let Some(s) = memo.get(&(q, a)) {
            return Sim::Done(s.clone());
        }
        if stack.contains(&(q, a)) {
            return Sim::Fail;
        }
        stack.push((q, a));
        let mut out = BTreeSet::new();
        for x in &self.replies[&a] {
            match self.word(BTreeSet::from([q]), x, assign, memo, stack) {
                Sim::Done(s) => out.extend(s),
                other => return other,
            }
        }
        stack.pop();
        memo.insert((q, a), out.clone());
        Sim::Done(out)
    }
}
