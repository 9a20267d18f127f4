//! Plays, strategy automata and exhaustive play exploration.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use cfgame_automata::{enumerate_upto, shortlex_min_word, AutomatonSpec, Dfa, Symbol, Word};
use serde::{Deserialize, Serialize};

use crate::game::Game;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlayError {
    #[error("reply {reply} is not in the replacement language of `{symbol}`")]
    ReplyNotInLanguage { symbol: String, reply: String },
    #[error("call requested on non-function symbol `{0}`")]
    CallOnNonFunction(String),
    #[error("`{0}` is not a function symbol")]
    NotAFunction(String),
    #[error("replacement language of `{0}` is infinite")]
    InfiniteRule(String),
    #[error("strategy automaton is not over the history alphabet of the game")]
    AlphabetMismatch,
    #[error("reroute references target state {0}, which does not exist")]
    BadRerouteState(usize),
    #[error("unknown strategy kind `{0}`")]
    UnknownKind(String),
    #[error(transparent)]
    Automata(#[from] cfgame_automata::AutomataError),
}

impl From<cfgame_automata::AlphabetError> for PlayError {
    fn from(e: cfgame_automata::AlphabetError) -> Self {
        PlayError::Automata(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HistorySymbol {
    Plain(Symbol),
    Called(Symbol),
}

impl HistorySymbol {
    /// Index in the history alphabet of `g`.
    pub fn index(self, g: &Game) -> Symbol {
        match self {
            HistorySymbol::Plain(a) => a,
            HistorySymbol::Called(a) => g.hat(a).expect("called symbols are function symbols"),
        }
    }

    pub fn from_index(g: &Game, h: Symbol) -> Self {
        match g.unhat(h) {
            (a, false) => HistorySymbol::Plain(a),
            (a, true) => HistorySymbol::Called(a),
        }
    }
}

/// The final string ♮α: plain symbols of the history.
pub fn flatten(history: &[HistorySymbol]) -> Word {
    history
        .iter()
        .filter_map(|h| match h {
            HistorySymbol::Plain(a) => Some(*a),
            HistorySymbol::Called(_) => None,
        })
        .collect()
}

pub fn format_history(g: &Game, history: &[HistorySymbol]) -> String {
    let idx: Word = history.iter().map(|h| h.index(g)).collect();
    g.history_alphabet().format_word(&idx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Read,
    Call,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub history: Vec<HistorySymbol>,
    pub remaining: Word,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlayOutcome {
    WinJuliet,
    WinRomeo,
    Truncated(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Play {
    pub configurations: Vec<Configuration>,
    pub outcome: PlayOutcome,
    pub depth: usize,
}

impl Play {
    pub fn final_string(&self) -> Word {
        flatten(&self.configurations.last().expect("non-empty play").history)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    General,
    Forgetful,
    StronglyRegular,
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyKind::General => "general",
            StrategyKind::Forgetful => "forgetful",
            StrategyKind::StronglyRegular => "strongly-regular",
        })
    }
}

/// Target transitions redirected to the Call state.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StronglyRegularSpec {
    pub reroutes: BTreeSet<(usize, Symbol)>,
}

impl StronglyRegularSpec {
    pub fn new(reroutes: impl IntoIterator<Item = (usize, Symbol)>) -> Self {
        Self { reroutes: reroutes.into_iter().collect() }
    }
}

/// A DFA over the history alphabet whose accepting states mean Call.
///
/// At state `p` with current symbol `a`, Juliet calls iff `a` is a function
/// symbol and `δ(p,a)` is accepting. The automaton then continues with
/// `δ(p,â)` after a call and with `δ(p,a)` after a read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyAutomaton {
    dfa: Dfa,
    kind: StrategyKind,
    function: Vec<bool>,
    hat: Vec<Option<Symbol>>,
    spec: Option<StronglyRegularSpec>,
}

impl StrategyAutomaton {
    pub fn general(g: &Game, dfa: Dfa) -> Result<Self, PlayError> {
        if dfa.alphabet() != g.history_alphabet() {
            return Err(PlayError::AlphabetMismatch);
        }
        Ok(Self::wrap(g, dfa, StrategyKind::General, None))
    }

    /// Lifts a DFA over Σ by adding a self-loop on every `â`.
    pub fn forgetful(g: &Game, dfa: &Dfa) -> Result<Self, PlayError> {
        if dfa.alphabet() != g.alphabet() {
            return Err(PlayError::AlphabetMismatch);
        }
        let sigma = g.alphabet().len();
        let lifted = Dfa::from_fn(
            g.history_alphabet().clone(),
            dfa.num_states(),
            dfa.initial(),
            dfa.accepting().to_vec(),
            |q, h| if h < sigma { dfa.next(q, h) } else { q },
        );
        Ok(Self::wrap(g, lifted, StrategyKind::Forgetful, None))
    }

    pub fn read_all(g: &Game) -> Self {
        Self::wrap(g, Dfa::empty(g.history_alphabet().clone()), StrategyKind::Forgetful, None)
    }

    fn wrap(g: &Game, dfa: Dfa, kind: StrategyKind, spec: Option<StronglyRegularSpec>) -> Self {
        Self {
            dfa,
            kind,
            function: g.alphabet().symbols().map(|a| g.is_function(a)).collect(),
            hat: g.alphabet().symbols().map(|a| g.hat(a)).collect(),
            spec,
        }
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn spec(&self) -> Option<&StronglyRegularSpec> {
        self.spec.as_ref()
    }

    pub fn num_states(&self) -> usize {
        self.dfa.num_states()
    }

    pub fn initial(&self) -> usize {
        self.dfa.initial()
    }

    pub fn calls(&self, p: usize, a: Symbol) -> bool {
        self.function[a] && self.dfa.is_accepting(self.dfa.next(p, a))
    }

    pub fn decide(&self, p: usize, a: Symbol) -> Decision {
        if self.calls(p, a) {
            Decision::Call
        } else {
            Decision::Read
        }
    }

    pub fn after_read(&self, p: usize, a: Symbol) -> usize {
        self.dfa.next(p, a)
    }

    pub fn after_call(&self, p: usize, a: Symbol) -> usize {
        self.dfa.next(p, self.hat[a].expect("function symbol"))
    }

    pub fn step(&self, p: usize, h: HistorySymbol) -> usize {
        match h {
            HistorySymbol::Plain(a) => self.after_read(p, a),
            HistorySymbol::Called(a) => self.after_call(p, a),
        }
    }

    pub fn run(&self, history: &[HistorySymbol]) -> usize {
        history.iter().fold(self.initial(), |p, &h| self.step(p, h))
    }

    /// Loads a strategy file: the automaton schema plus `kind` and, for
    /// strongly regular strategies, `reroutes`.
    pub fn from_spec(g: &Game, spec: &AutomatonSpec) -> Result<Self, PlayError> {
        match spec.kind.as_deref().unwrap_or("general") {
            "general" => Self::general(g, spec.to_dfa(g.history_alphabet())?),
            "forgetful" => Self::forgetful(g, &spec.to_dfa(g.alphabet())?),
            "strongly-regular" => {
                let mut reroutes = BTreeSet::new();
                for (q, name) in &spec.reroutes {
                    let q = g.target_state_of(*q).ok_or(PlayError::BadRerouteState(*q))?;
                    reroutes.insert((q, g.alphabet().symbol(name)?));
                }
                strongly_regular_automaton(g, &StronglyRegularSpec { reroutes })
            }
            other => Err(PlayError::UnknownKind(other.to_string())),
        }
    }

    pub fn to_spec(&self, g: &Game) -> AutomatonSpec {
        let mut out = match self.kind {
            StrategyKind::Forgetful => {
                let sigma = g.alphabet().len();
                AutomatonSpec::from_dfa(&Dfa::from_fn(
                    g.alphabet().clone(),
                    self.dfa.num_states(),
                    self.dfa.initial(),
                    self.dfa.accepting().to_vec(),
                    |q, a| if a < sigma { self.dfa.next(q, a) } else { q },
                ))
            }
            _ => AutomatonSpec::from_dfa(&self.dfa),
        };
        out.kind = Some(self.kind.to_string());
        if let Some(spec) = &self.spec {
            out = AutomatonSpec {
                alphabet: None,
                states: g.target().num_states(),
                initial: g.target().initial(),
                accepting: vec![],
                transitions: vec![],
                nondeterministic: false,
                kind: out.kind,
                reroutes: spec
                    .reroutes
                    .iter()
                    .map(|&(q, a)| (q, g.alphabet().name(a).to_string()))
                    .collect(),
            };
        }
        out
    }
}

/// The strongly regular strategy of `spec`: states `Q ∪ {Call}`, with the
/// listed target transitions redirected to the absorbing Call state.
pub fn strongly_regular_automaton(
    g: &Game,
    spec: &StronglyRegularSpec,
) -> Result<StrategyAutomaton, PlayError> {
    let t = g.target();
    let n = t.num_states();
    for &(q, a) in &spec.reroutes {
        if q >= n {
            return Err(PlayError::BadRerouteState(q));
        }
        if !g.is_function(a) {
            return Err(PlayError::NotAFunction(g.alphabet().name(a).to_string()));
        }
    }
    let sigma = g.alphabet().len();
    let mut accepting = vec![false; n + 1];
    accepting[n] = true;
    let dfa = Dfa::from_fn(g.history_alphabet().clone(), n + 1, t.initial(), accepting, |q, h| {
        if q == n {
            n
        } else if h >= sigma {
            q
        } else if spec.reroutes.contains(&(q, h)) {
            n
        } else {
            t.next(q, h)
        }
    });
    Ok(StrategyAutomaton::wrap(g, dfa, StrategyKind::StronglyRegular, Some(spec.clone())))
}

/// Juliet's side of a play.
pub trait Juliet {
    fn decide(&mut self, history: &[HistorySymbol], a: Symbol) -> Decision;
}

impl<F: FnMut(&[HistorySymbol], Symbol) -> Decision> Juliet for F {
    fn decide(&mut self, history: &[HistorySymbol], a: Symbol) -> Decision {
        self(history, a)
    }
}

/// Runs a strategy automaton incrementally over a growing history.
pub struct AutomatonJuliet<'a> {
    automaton: &'a StrategyAutomaton,
    state: usize,
    seen: usize,
}

impl<'a> AutomatonJuliet<'a> {
    pub fn new(automaton: &'a StrategyAutomaton) -> Self {
        Self { automaton, state: automaton.initial(), seen: 0 }
    }

    pub fn state(&self) -> usize {
        self.state
    }
}

impl Juliet for AutomatonJuliet<'_> {
    fn decide(&mut self, history: &[HistorySymbol], a: Symbol) -> Decision {
        if history.len() < self.seen {
            self.state = self.automaton.initial();
            self.seen = 0;
        }
        for &h in &history[self.seen..] {
            self.state = self.automaton.step(self.state, h);
        }
        self.seen = history.len();
        self.automaton.decide(self.state, a)
    }
}

/// Romeo's side of a play: the replacement word for a call.
pub trait Romeo {
    fn reply(&mut self, history: &[HistorySymbol], a: Symbol) -> Word;
}

impl<F: FnMut(&[HistorySymbol], Symbol) -> Word> Romeo for F {
    fn reply(&mut self, history: &[HistorySymbol], a: Symbol) -> Word {
        self(history, a)
    }
}

/// Always answers with the shortlex-least word of `L_a`.
#[derive(Debug, Clone)]
pub struct ShortlexReplies {
    table: BTreeMap<Symbol, Word>,
}

impl ShortlexReplies {
    pub fn new(g: &Game) -> Self {
        let table = g
            .rules()
            .iter()
            .map(|(&a, r)| (a, shortlex_min_word(&r.nfa).expect("non-empty rule")))
            .collect();
        Self { table }
    }
}

impl Romeo for ShortlexReplies {
    fn reply(&mut self, _: &[HistorySymbol], a: Symbol) -> Word {
        self.table[&a].clone()
    }
}

/// Fixed reply per symbol.
#[derive(Debug, Clone)]
pub struct FixedReplies(pub BTreeMap<Symbol, Word>);

impl Romeo for FixedReplies {
    fn reply(&mut self, _: &[HistorySymbol], a: Symbol) -> Word {
        self.0[&a].clone()
    }
}

/// Replies taken in order from a script; shortlex-least replies afterwards.
#[derive(Debug, Clone)]
pub struct ScriptedReplies {
    script: std::collections::VecDeque<Word>,
    fallback: ShortlexReplies,
}

impl ScriptedReplies {
    pub fn new(g: &Game, script: impl IntoIterator<Item = Word>) -> Self {
        Self { script: script.into_iter().collect(), fallback: ShortlexReplies::new(g) }
    }
}

impl Romeo for ScriptedReplies {
    fn reply(&mut self, history: &[HistorySymbol], a: Symbol) -> Word {
        self.script.pop_front().unwrap_or_else(|| self.fallback.reply(history, a))
    }
}

pub const DEFAULT_STEP_LIMIT: usize = 10_000;

/// Replays the interaction of `sigma` and `tau` on `w`.
pub fn run_play(
    g: &Game,
    sigma: &mut dyn Juliet,
    tau: &mut dyn Romeo,
    w: &[Symbol],
    step_limit: usize,
) -> Result<Play, PlayError> {
    let alphabet = g.alphabet();
    let mut history = Vec::new();
    let mut remaining: Word = w.to_vec();
    let mut configurations = vec![Configuration { history: vec![], remaining: remaining.clone() }];
    let mut frames: Vec<usize> = Vec::new();
    let mut depth = 0;
    let mut steps = 0;
    while !remaining.is_empty() {
        if steps == step_limit {
            return Ok(Play { configurations, outcome: PlayOutcome::Truncated(step_limit), depth });
        }
        let a = remaining[0];
        match sigma.decide(&history, a) {
            Decision::Read => {
                history.push(HistorySymbol::Plain(a));
                remaining.remove(0);
            }
            Decision::Call => {
                let rule = g
                    .rule(a)
                    .ok_or_else(|| PlayError::CallOnNonFunction(alphabet.name(a).to_string()))?;
                let x = tau.reply(&history, a);
                if !rule.dfa.accepts(&x) {
                    return Err(PlayError::ReplyNotInLanguage {
                        symbol: alphabet.name(a).to_string(),
                        reply: alphabet.format_word(&x),
                    });
                }
                history.push(HistorySymbol::Called(a));
                let rest = remaining.len() - 1;
                remaining.splice(0..1, x);
                frames.push(rest);
                depth = depth.max(frames.len());
            }
        }
        while frames.last().is_some_and(|&end| remaining.len() <= end) {
            frames.pop();
        }
        steps += 1;
        configurations.push(Configuration { history: history.clone(), remaining: remaining.clone() });
    }
    let outcome = if g.target().accepts(&flatten(&history)) {
        PlayOutcome::WinJuliet
    } else {
        PlayOutcome::WinRomeo
    };
    Ok(Play { configurations, outcome, depth })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BruteOutcome {
    Win,
    Lose,
    RomeoCanForceInfinite,
}

/// Pairs of (strategy state, target state).
pub type PairSet = BTreeSet<(usize, usize)>;

#[derive(Debug)]
struct Diverged;

/// Exhaustive exploration of all Romeo replies for a strategy automaton on
/// a game with finite replacement languages.
///
/// A sub-play on a called symbol keeps a stack of (strategy state, symbol)
/// pairs; meeting a pair already on the stack means Romeo can repeat the
/// same replies forever.
pub struct BruteForce<'a> {
    g: &'a Game,
    a: &'a StrategyAutomaton,
    replies: BTreeMap<Symbol, Vec<Word>>,
    memo: HashMap<(usize, usize, Symbol), PairSet>,
    stack: Vec<(usize, Symbol)>,
}

impl<'a> BruteForce<'a> {
    pub fn new(g: &'a Game, a: &'a StrategyAutomaton) -> Result<Self, PlayError> {
        let mut replies = BTreeMap::new();
        for (&f, rule) in g.rules() {
            if !rule.dfa.is_finite_language() {
                return Err(PlayError::InfiniteRule(g.alphabet().name(f).to_string()));
            }
            let longest = rule.dfa.num_states();
            replies.insert(f, enumerate_upto(&rule.nfa, longest));
        }
        Ok(Self { g, a, replies, memo: HashMap::new(), stack: Vec::new() })
    }

    fn symbol(&mut self, p: usize, q: usize, a: Symbol) -> Result<PairSet, Diverged> {
        if !self.a.calls(p, a) {
            return Ok(BTreeSet::from([(self.a.after_read(p, a), self.g.target().next(q, a))]));
        }
        if let Some(hit) = self.memo.get(&(p, q, a)) {
            return Ok(hit.clone());
        }
        if self.stack.contains(&(p, a)) {
            return Err(Diverged);
        }
        self.stack.push((p, a));
        let start = self.a.after_call(p, a);
        let mut out = BTreeSet::new();
        for x in self.replies[&a].clone() {
            out.extend(self.word(BTreeSet::from([(start, q)]), &x)?);
        }
        self.stack.pop();
        self.memo.insert((p, q, a), out.clone());
        Ok(out)
    }

    fn word(&mut self, mut cur: PairSet, w: &[Symbol]) -> Result<PairSet, Diverged> {
        for &a in w {
            let mut next = BTreeSet::new();
            for (p, q) in cur {
                next.extend(self.symbol(p, q, a)?);
            }
            cur = next;
        }
        Ok(cur)
    }

    /// End pairs of all plays on the single symbol `a` from `(p, q)`, or
    /// `None` if Romeo can force an infinite play.
    pub fn end_states(&mut self, p: usize, q: usize, a: Symbol) -> Option<PairSet> {
        let r = self.symbol(p, q, a).ok();
        self.stack.clear();
        r
    }

    pub fn outcome(&mut self, w: &[Symbol]) -> BruteOutcome {
        let start = BTreeSet::from([(self.a.initial(), self.g.target().initial())]);
        let r = self.word(start, w);
        self.stack.clear();
        match r {
            Err(Diverged) => BruteOutcome::RomeoCanForceInfinite,
            Ok(ends) if ends.iter().all(|&(_, q)| self.g.target().is_accepting(q)) => BruteOutcome::Win,
            Ok(_) => BruteOutcome::Lose,
        }
    }
}

pub fn brute_force_outcome(
    g: &Game,
    a: &StrategyAutomaton,
    w: &[Symbol],
) -> Result<BruteOutcome, PlayError> {
    Ok(BruteForce::new(g, a)?.outcome(w))
}
