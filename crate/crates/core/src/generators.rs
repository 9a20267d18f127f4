//! Named example games, reduction instances and random instances.

use std::collections::{BTreeMap, BTreeSet};

use cfgame_automata::{Alphabet, AlphabetError, AutomataError, Dfa, Nfa, RegexAst, Symbol, Word};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::game::{classify, Game, GameError};
use crate::play::{strongly_regular_automaton, PlayError, StrategyAutomaton, StronglyRegularSpec};

#[derive(Debug, thiserror::Error)]
pub enum GeneratorError {
    #[error("unknown fixture {0:?}; expected one of {FIXTURES:?}")]
    UnknownFixture(String),
    #[error("invalid formula: {0}")]
    InvalidFormula(String),
    #[error("the automaton must be over the alphabet {{0, 1}}")]
    NotBinary,
    #[error("no game satisfying the constraints after {0} attempts")]
    Unsatisfiable(usize),
    #[error("parameters out of range: {0}")]
    Params(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Play(#[from] PlayError),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
}

pub const FIXTURES: [&str; 5] = [
    "sandbox",
    "g1-recursive",
    "g2-regular-not-sreg",
    "g1c-undominated",
    "g2c-undominated",
];

/// A documented property of a fixture together with the claim it restates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fact {
    pub claim: Claim,
    pub quote: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Claim {
    /// `W(σ) ∩ Σ^{≤upto}` is exactly `words`.
    WinningSet { strategy: String, upto: usize, words: Vec<String> },
    /// The strategy wins on every non-empty word of length at most `upto`.
    WinsNonEmpty { strategy: String, upto: usize },
    Wins { strategy: String, word: String },
    Loses { strategy: String, word: String },
    TargetLanguage { words: Vec<String> },
    Rule { symbol: String, word: String },
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub game: Game,
    pub strategies: BTreeMap<String, StrategyAutomaton>,
    pub expected: Vec<Fact>,
}

fn fact(claim: Claim, quote: &str) -> Fact {
    Fact { claim, quote: quote.to_string() }
}

fn words(list: &[&str]) -> Vec<String> {
    list.iter().map(|w| w.to_string()).collect()
}

fn finite_rule(alphabet: &Alphabet, replacements: &[&str]) -> Result<RegexAst, GeneratorError> {
    let mut items = Vec::new();
    for r in replacements {
        items.push(RegexAst::word(&alphabet.parse_word(r)?));
    }
    Ok(RegexAst::union_all(items))
}

fn build_game(
    symbols: &str,
    rules: &[(&str, &[&str])],
    states: usize,
    accepting: &[usize],
    transitions: &[(usize, &str, usize)],
) -> Result<Game, GeneratorError> {
    let alphabet = Alphabet::from_chars(symbols)?;
    let mut compiled = Vec::new();
    for (a, rs) in rules {
        compiled.push((alphabet.symbol(a)?, finite_rule(&alphabet, rs)?));
    }
    let mut delta = Vec::new();
    for &(p, names, q) in transitions {
        for c in names.chars() {
            delta.push((p, alphabet.symbol(&c.to_string())?, q));
        }
    }
    let target = Dfa::new(alphabet.clone(), states, 0, accepting.iter().copied(), delta)?;
    Ok(Game::new(alphabet, compiled, target)?)
}

fn forgetful(g: &Game, states: usize, accepting: &[usize], transitions: &[(usize, &str, usize)]) -> Result<StrategyAutomaton, GeneratorError> {
    let a = g.alphabet();
    let mut delta = Vec::new();
    for &(p, names, q) in transitions {
        for c in names.chars() {
            delta.push((p, a.symbol(&c.to_string())?, q));
        }
    }
    let dfa = Dfa::new(a.clone(), states, 0, accepting.iter().copied(), delta)?;
    Ok(StrategyAutomaton::forgetful(g, &dfa)?)
}

/// General strategy that calls on the listed `(history, symbol)` situations
/// and reads otherwise. Histories are words over the history alphabet.
fn calls_on(g: &Game, situations: &[(&[Symbol], Symbol)]) -> Result<StrategyAutomaton, GeneratorError> {
    let h = g.history_alphabet();
    let mut prefixes: Vec<Word> = vec![Vec::new()];
    for (alpha, _) in situations {
        for i in 1..=alpha.len() {
            let p = alpha[..i].to_vec();
            if !prefixes.contains(&p) {
                prefixes.push(p);
            }
        }
    }
    let other = prefixes.len();
    let call = other + 1;
    let mut accepting = vec![false; call + 1];
    accepting[call] = true;
    let dfa = Dfa::from_fn(h.clone(), call + 1, 0, accepting, |q, x| {
        if q >= other {
            return q;
        }
        let alpha = &prefixes[q];
        if situations.iter().any(|(s, f)| *s == alpha.as_slice() && *f == x) {
            return call;
        }
        let mut next = alpha.clone();
        next.push(x);
        prefixes.iter().position(|p| *p == next).unwrap_or(other)
    });
    Ok(StrategyAutomaton::general(g, dfa)?)
}

pub fn fixture(name: &str) -> Result<Fixture, GeneratorError> {
    match name {
        "sandbox" => sandbox(),
        "g1-recursive" => g1_recursive(),
        "g2-regular-not-sreg" => g2_regular_not_sreg(),
        "g1c-undominated" => g1c_undominated(),
        "g2c-undominated" => g2c_undominated(),
        other => Err(GeneratorError::UnknownFixture(other.to_string())),
    }
}

fn strategies(list: Vec<(&str, StrategyAutomaton)>) -> BTreeMap<String, StrategyAutomaton> {
    list.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn sandbox() -> Result<Fixture, GeneratorError> {
    let game = build_game("abc", &[("a", &["b"])], 4, &[3], &[(0, "a", 1), (0, "b", 2), (1, "b", 3), (2, "c", 3)])?;
    let call_first = forgetful(&game, 3, &[1], &[(0, "a", 1), (0, "bc", 2), (1, "abc", 2), (2, "abc", 2)])?;
    Ok(Fixture {
        name: "sandbox",
        strategies: strategies(vec![("read-all", StrategyAutomaton::read_all(&game)), ("call-first", call_first)]),
        expected: vec![
            fact(Claim::Rule { symbol: "a".into(), word: "b".into() }, "one replacement rule a→b"),
            fact(Claim::TargetLanguage { words: words(&["ab", "bc"]) }, "the target language {ab,bc}"),
            fact(Claim::Wins { strategy: "read-all".into(), word: "ab".into() }, "wins on the word ab (Read the initial a)"),
            fact(Claim::Wins { strategy: "call-first".into(), word: "ac".into() }, "one that wins on ac (Call the initial a)"),
            fact(Claim::Loses { strategy: "read-all".into(), word: "ac".into() }, "none that wins on both"),
            fact(Claim::Loses { strategy: "call-first".into(), word: "ab".into() }, "none that wins on both"),
        ],
        game,
    })
}

fn g1_recursive() -> Result<Fixture, GeneratorError> {
    let game = build_game("a", &[("a", &["aa"])], 3, &[2], &[(0, "a", 1), (1, "a", 2), (2, "a", 2)])?;
    let hat = game.hat(0).unwrap();
    // States: no called symbol seen, one seen, Call.
    let dfa = Dfa::from_fn(game.history_alphabet().clone(), 3, 0, vec![false, false, true], |q, x| match (q, x) {
        (0, x) if x == hat => 1,
        (0, _) => 2,
        (1, _) => 1,
        _ => 2,
    });
    let strategy = StrategyAutomaton::general(&game, dfa)?;
    Ok(Fixture {
        name: "g1-recursive",
        strategies: strategies(vec![("call-until-called", strategy)]),
        expected: vec![
            fact(Claim::Rule { symbol: "a".into(), word: "aa".into() }, "the only replacement rule being a→aa"),
            fact(
                Claim::WinsNonEmpty { strategy: "call-until-called".into(), upto: 6 },
                "The strategy plays Call exactly if it has not seen any symbol â. Since this strategy wins on every word, it is dominant.",
            ),
            fact(Claim::Loses { strategy: "call-until-called".into(), word: "ε".into() }, "L(T)={a^k | k≥2}"),
        ],
        game,
    })
}

fn g2_regular_not_sreg() -> Result<Fixture, GeneratorError> {
    let game = build_game(
        "abcd",
        &[("a", &["b"]), ("c", &["ac"]), ("d", &["bad"])],
        3,
        &[0, 1],
        &[(0, "ad", 0), (0, "b", 1), (0, "c", 2), (1, "bc", 0), (1, "ad", 2), (2, "abcd", 2)],
    )?;
    // States q0, q0', q1, q3 of the strategy automaton.
    let a = forgetful(
        &game,
        4,
        &[3],
        &[(0, "d", 0), (0, "a", 1), (0, "b", 2), (0, "c", 3), (1, "d", 0), (1, "b", 2), (1, "ac", 3), (2, "bc", 0), (2, "ad", 3)],
    )?;
    Ok(Fixture {
        name: "g2-regular-not-sreg",
        strategies: strategies(vec![("A", a)]),
        expected: vec![
            fact(Claim::Rule { symbol: "d".into(), word: "bad".into() }, "d→bad"),
            fact(Claim::Rule { symbol: "c".into(), word: "ac".into() }, "c→ac"),
            fact(Claim::Wins { strategy: "A".into(), word: "ε".into() }, "W(σ_A)=Σ*"),
            fact(Claim::WinsNonEmpty { strategy: "A".into(), upto: 4 }, "W(σ_A)=Σ*"),
        ],
        game,
    })
}

fn g1c_undominated() -> Result<Fixture, GeneratorError> {
    let game = build_game(
        "abcde",
        &[("a", &["b", "c"]), ("b", &["cd"]), ("c", &["e"])],
        3,
        &[2],
        &[(0, "e", 2), (0, "c", 1), (1, "d", 2)],
    )?;
    let hat_a = game.hat(0).unwrap();
    let strategy = calls_on(&game, &[(&[], 0), (&[], 1), (&[], 2), (&[hat_a], 1), (&[hat_a], 2)])?;
    Ok(Fixture {
        name: "g1c-undominated",
        strategies: strategies(vec![("sigma", strategy)]),
        expected: vec![
            fact(Claim::TargetLanguage { words: words(&["e", "cd"]) }, "target language L(T)={e,cd}"),
            fact(
                Claim::WinningSet { strategy: "sigma".into(), upto: 1, words: words(&["a", "b", "c", "e"]) },
                "wins on {a,b,c,e}",
            ),
        ],
        game,
    })
}

fn g2c_undominated() -> Result<Fixture, GeneratorError> {
    let game = build_game(
        "abc",
        &[("a", &["bb", "cbc"]), ("b", &["cc"])],
        5,
        &[3],
        &[(0, "bc", 1), (0, "a", 4), (1, "bc", 2), (1, "a", 4), (2, "c", 3), (2, "ab", 4), (3, "abc", 4), (4, "abc", 4)],
    )?;
    let a = forgetful(
        &game,
        6,
        &[5],
        &[
            (0, "b", 1),
            (0, "c", 2),
            (0, "a", 5),
            (1, "c", 3),
            (1, "ab", 5),
            (2, "bc", 3),
            (2, "a", 5),
            (3, "c", 4),
            (3, "ab", 5),
            (4, "c", 4),
            (4, "ab", 5),
        ],
    )?;
    Ok(Fixture {
        name: "g2c-undominated",
        strategies: strategies(vec![("A", a)]),
        expected: vec![
            fact(Claim::TargetLanguage { words: words(&["bbc", "bcc", "cbc", "ccc"]) }, "L(T)={bbc,bcc,cbc,ccc}"),
            fact(
                Claim::WinningSet { strategy: "A".into(), upto: 3, words: words(&["a", "bb", "bcc", "cbc", "ccc"]) },
                "W(σ_A)={a,bb,bcc,cbc,ccc}",
            ),
            fact(Claim::Loses { strategy: "A".into(), word: "cb".into() }, "bc, bbc and cb"),
        ],
        game,
    })
}

/// A formula in conjunctive normal form with three literals per clause.
/// Literal `i > 0` is `x_i`, literal `-i` is `¬x_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CnfFormula {
    pub variables: usize,
    pub clauses: Vec<[i32; 3]>,
}

impl CnfFormula {
    pub fn new(variables: usize, clauses: Vec<[i32; 3]>) -> Result<Self, GeneratorError> {
        if variables == 0 {
            return Err(GeneratorError::InvalidFormula("no variables".into()));
        }
        if clauses.is_empty() {
            return Err(GeneratorError::InvalidFormula("no clauses".into()));
        }
        for c in &clauses {
            for &l in c {
                if l == 0 || l.unsigned_abs() as usize > variables {
                    return Err(GeneratorError::InvalidFormula(format!("literal {l} outside 1..={variables}")));
                }
            }
        }
        Ok(Self { variables, clauses })
    }

    /// Parses `"1,2,-3;-1,-1,2"`. The variable count is the largest index.
    pub fn parse(text: &str) -> Result<Self, GeneratorError> {
        let mut clauses = Vec::new();
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let lits: Vec<i32> = part
                .split(',')
                .map(|l| l.trim().parse::<i32>().map_err(|e| GeneratorError::InvalidFormula(format!("{l:?}: {e}"))))
                .collect::<Result<_, _>>()?;
            let clause: [i32; 3] = lits
                .try_into()
                .map_err(|_| GeneratorError::InvalidFormula(format!("clause {part:?} needs exactly 3 literals")))?;
            clauses.push(clause);
        }
        let n = clauses.iter().flatten().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0);
        Self::new(n, clauses)
    }

    pub fn satisfied_by(&self, theta: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| theta[l.unsigned_abs() as usize - 1] == (l > 0))
        })
    }

    pub fn brute_force_sat(&self) -> Option<Vec<bool>> {
        (0u64..1 << self.variables)
            .map(|m| (0..self.variables).map(|i| m >> i & 1 == 1).collect::<Vec<_>>())
            .find(|t| self.satisfied_by(t))
    }
}

/// Roles of the states inside one variable component.
const S: usize = 0;
const B: usize = 1;
const C: usize = 2;
const F: usize = 3;
const D: usize = 4;
const T: usize = 5;

fn sat_alphabet(n: usize) -> Result<Alphabet, AlphabetError> {
    let mut names: Vec<String> = ["0", "1", "b", "c", "d", "C", "D", "E"].iter().map(|s| s.to_string()).collect();
    names.extend((1..=n).map(|i| format!("a{i}")));
    Alphabet::new(names)
}

/// The target of the satisfiability game as constructed, before any
/// normalization. State `6i + role` belongs to component `i`; the last
/// state is the error sink.
pub fn sat_target(n: usize) -> Result<Dfa, GeneratorError> {
    let alphabet = sat_alphabet(n)?;
    let sym = |s: &str| alphabet.index(s).unwrap();
    let ai = |i: usize| 8 + i;
    let err = 6 * n;
    let mut delta = Vec::new();
    for i in 0..n {
        let q = |r: usize| 6 * i + r;
        delta.push((q(S), sym("0"), q(B)));
        delta.push((q(S), sym("b"), q(F)));
        delta.push((q(S), sym("1"), q(D)));
        delta.push((q(B), sym("C"), q(C)));
        delta.push((q(C), sym("d"), q(S)));
        delta.push((q(D), sym("D"), q(T)));
        delta.push((q(F), sym("c"), q(S)));
        delta.push((q(F), sym("d"), q(T)));
        delta.push((q(F), sym("b"), q(F)));
        for j in 0..n {
            delta.push((q(F), ai(j), q(F)));
        }
        if i + 1 < n {
            delta.push((q(T), ai(i + 1), 6 * (i + 1) + S));
        }
        let mut sources = vec![q(S), q(B), q(C), q(D)];
        if i + 1 == n {
            sources.push(q(T));
        }
        for p in sources {
            for j in 0..n {
                delta.push((p, ai(j), 6 * j + S));
            }
        }
    }
    let accepting: Vec<usize> = (0..n).map(|i| 6 * i + F).collect();
    let delta: BTreeMap<(usize, Symbol), usize> = delta.into_iter().map(|(p, a, q)| ((p, a), q)).collect();
    let mut acc = vec![false; err + 1];
    for q in accepting {
        acc[q] = true;
    }
    Ok(Dfa::from_fn(alphabet, err + 1, S, acc, |p, a| *delta.get(&(p, a)).unwrap_or(&err)))
}

/// The satisfiability game for `phi` and the input word `w1·E`.
pub fn from_3sat(phi: &CnfFormula) -> Result<(Game, Word), GeneratorError> {
    let n = phi.variables;
    let target = sat_target(n)?;
    let alphabet = target.alphabet().clone();
    let sym = |s: &str| alphabet.index(s).unwrap();
    let lit = |l: i32| {
        let i = l.unsigned_abs() as usize;
        vec![8 + i - 1, if l > 0 { sym("1") } else { sym("0") }]
    };
    let clause_words = phi.clauses.iter().map(|c| RegexAst::word(&c.iter().flat_map(|&l| lit(l)).collect::<Vec<_>>()));
    let rules = vec![
        (sym("0"), RegexAst::word(&[sym("b")])),
        (sym("1"), RegexAst::word(&[sym("b")])),
        (sym("C"), RegexAst::word(&[sym("c"), sym("1")])),
        (sym("D"), RegexAst::word(&[sym("d"), sym("1"), sym("d")])),
        (sym("E"), RegexAst::union_all(clause_words)),
    ];
    let game = Game::new(alphabet.clone(), rules, target)?;
    let mut w = Vec::new();
    for i in 0..n {
        if i > 0 {
            w.push(8 + i);
        }
        w.extend([sym("0"), sym("C"), sym("D")]);
    }
    w.push(sym("E"));
    Ok((game, w))
}

/// The strongly regular strategy encoding the assignment `theta`: every
/// function-symbol transition of a component into the error sink is
/// rerouted to Call, as is the 0-transition of `s_i` when `x_i` is false
/// and the 1-transition otherwise.
pub fn assignment_strategy(game: &Game, phi: &CnfFormula, theta: &[bool]) -> Result<StrategyAutomaton, GeneratorError> {
    let n = phi.variables;
    let raw = sat_target(n)?;
    let err = 6 * n;
    let mut reroutes = BTreeSet::new();
    for p in 0..err {
        for &f in game.functions() {
            if raw.next(p, f) == err {
                reroutes.insert((p, f));
            }
        }
    }
    for (i, &value) in theta.iter().enumerate().take(n) {
        let f = if value { 1 } else { 0 };
        reroutes.insert((6 * i + S, f));
    }
    let mapped = reroutes
        .into_iter()
        .map(|(p, f)| game.target_state_of(p).map(|q| (q, f)).ok_or(PlayError::BadRerouteState(p)))
        .collect::<Result<BTreeSet<_>, _>>()?;
    Ok(strongly_regular_automaton(game, &StronglyRegularSpec { reroutes: mapped })?)
}

/// Game and strategy pair whose dominance question is the universality
/// question for an NFA over `{0, 1}`.
#[derive(Debug, Clone)]
pub struct UniversalityInstance {
    pub game: Game,
    pub a1: StrategyAutomaton,
    pub a2: StrategyAutomaton,
    /// Whether the fixed negative instance was used because `ε` is rejected.
    pub fixed_negative: bool,
}

/// Single initial state and only reachable states.
fn normalize_nfa(n: &Nfa) -> (usize, Vec<bool>, Vec<(usize, Symbol, usize)>) {
    let init = n.initial();
    let (s, extra) = if init.len() == 1 { (init[0], 0) } else { (n.num_states(), 1) };
    let total = n.num_states() + extra;
    let mut trans: Vec<(usize, Symbol, usize)> = n.transitions().collect();
    let mut accepting: Vec<bool> = (0..n.num_states()).map(|q| n.is_accepting(q)).collect();
    if extra == 1 {
        accepting.push(init.iter().any(|&q| n.is_accepting(q)));
        let from_init: Vec<_> = trans.iter().filter(|(p, _, _)| init.contains(p)).map(|&(_, a, q)| (s, a, q)).collect();
        trans.extend(from_init);
    }
    let mut reach = vec![false; total];
    reach[s] = true;
    let mut stack = vec![s];
    while let Some(p) = stack.pop() {
        for &(x, _, q) in &trans {
            if x == p && !reach[q] {
                reach[q] = true;
                stack.push(q);
            }
        }
    }
    let mut order = vec![s];
    order.extend((0..total).filter(|&q| reach[q] && q != s));
    let index: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let acc = order.iter().map(|&q| accepting[q]).collect();
    let trans = trans
        .into_iter()
        .filter(|(p, _, _)| reach[*p])
        .map(|(p, a, q)| (index[&p], a, index[&q]))
        .collect();
    (0, acc, trans)
}

pub fn from_nfa_universality(n: &Nfa) -> Result<UniversalityInstance, GeneratorError> {
    if n.alphabet().names() != ["0", "1"] {
        return Err(GeneratorError::NotBinary);
    }
    let (s, accepting, trans) = normalize_nfa(n);
    if !accepting[s] {
        let fx = fixture("sandbox")?;
        return Ok(UniversalityInstance {
            a1: fx.strategies["read-all"].clone(),
            a2: fx.strategies["call-first"].clone(),
            game: fx.game,
            fixed_negative: true,
        });
    }
    let k = accepting.len();
    let mut names = vec!["0".to_string(), "1".to_string(), "#".to_string()];
    for a in 0..2 {
        names.extend((0..k).map(|p| format!("({a},{p})")));
    }
    names.extend((1..k).map(|p| format!("($,{p})")));
    let alphabet = Alphabet::new(names)?;
    let pair = |a: usize, p: usize| 3 + a * k + p;
    let dollar = |p: usize| 3 + 2 * k + p - 1;
    let hash = 2;
    let f = k;
    let edges: BTreeSet<(usize, Symbol, usize)> = trans.into_iter().collect();
    let target_next = |p: usize, x: Symbol| -> usize {
        if p == f {
            return f;
        }
        if x < 2 {
            return p;
        }
        if x == hash {
            return f;
        }
        if x < 3 + 2 * k {
            let a = (x - 3) / k;
            let q = (x - 3) % k;
            return if edges.contains(&(p, a, q)) { q } else { f };
        }
        let q = x - (3 + 2 * k) + 1;
        if q == p {
            s
        } else {
            f
        }
    };
    let mut acc = vec![true; k + 1];
    for (q, &a) in accepting.iter().enumerate() {
        acc[q] = !a;
    }
    let target = Dfa::from_fn(alphabet.clone(), k + 1, s, acc, target_next);
    let mut rules = Vec::new();
    for a in 0..2 {
        rules.push((a, RegexAst::union_all((0..k).map(|p| RegexAst::symbol(pair(a, p))))));
        for p in 0..k {
            rules.push((pair(a, p), RegexAst::symbol(hash)));
        }
    }
    for p in 1..k {
        rules.push((dollar(p), RegexAst::symbol(hash)));
    }
    let game = Game::new(alphabet, rules, target)?;
    let is_pair = |x: Symbol| (3..3 + 2 * k).contains(&x);
    let mut r1 = BTreeSet::new();
    let mut r2 = BTreeSet::new();
    for q in 0..=k {
        for &x in game.functions() {
            if !is_pair(x) {
                r1.insert((q, x));
            }
            let kept = q == f || (q == s && x < 2);
            if !kept {
                r2.insert((q, x));
            }
        }
    }
    let map = |set: BTreeSet<(usize, Symbol)>| -> Result<StronglyRegularSpec, PlayError> {
        let reroutes = set
            .into_iter()
            .map(|(q, x)| game.target_state_of(q).map(|q| (q, x)).ok_or(PlayError::BadRerouteState(q)))
            .collect::<Result<_, _>>()?;
        Ok(StronglyRegularSpec { reroutes })
    };
    let a1 = strongly_regular_automaton(&game, &map(r1)?)?;
    let a2 = strongly_regular_automaton(&game, &map(r2)?)?;
    Ok(UniversalityInstance { game, a1, a2, fixed_negative: false })
}

/// Universality of an NFA by subset construction.
pub fn is_universal(n: &Nfa) -> bool {
    let mut seen = BTreeSet::new();
    let start = n.initial_set();
    let mut stack = vec![start.clone()];
    seen.insert(start.ones().collect::<Vec<_>>());
    while let Some(set) = stack.pop() {
        if !n.set_accepts(&set) {
            return false;
        }
        for a in n.alphabet().symbols() {
            let next = n.step_set(&set, a);
            if seen.insert(next.ones().collect::<Vec<_>>()) {
                stack.push(next);
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GameParams {
    pub alphabet_size: usize,
    pub target_states: usize,
    /// Longest replacement word.
    pub rule_length: usize,
    /// Most replacement words per rule.
    pub rule_words: usize,
    /// Probability that a symbol is a function symbol.
    pub function_probability: f64,
    pub prefix_free: bool,
    pub non_recursive: bool,
    pub attempts: usize,
}

impl Default for GameParams {
    fn default() -> Self {
        Self {
            alphabet_size: 3,
            target_states: 4,
            rule_length: 3,
            rule_words: 3,
            function_probability: 0.5,
            prefix_free: false,
            non_recursive: false,
            attempts: 1000,
        }
    }
}

/// A random game with finite replacement languages.
pub fn random_game(params: &GameParams, seed: u64) -> Result<Game, GeneratorError> {
    if !(1..=26).contains(&params.alphabet_size) || params.target_states == 0 || params.rule_length == 0 || params.rule_words == 0 {
        return Err(GeneratorError::Params(format!("{params:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letters: String = ('a'..='z').take(params.alphabet_size).collect();
    let alphabet = Alphabet::from_chars(&letters)?;
    for _ in 0..params.attempts {
        let target = random_dfa(&alphabet, params.target_states, &mut rng);
        let mut rules = Vec::new();
        for a in alphabet.symbols() {
            if !rng.gen_bool(params.function_probability) {
                continue;
            }
            let count = rng.gen_range(1..=params.rule_words);
            let mut ws: Vec<Word> = Vec::new();
            for _ in 0..count {
                let len = rng.gen_range(1..=params.rule_length);
                ws.push((0..len).map(|_| rng.gen_range(0..alphabet.len())).collect());
            }
            ws.sort();
            ws.dedup();
            if params.prefix_free {
                let copy = ws.clone();
                ws.retain(|w| !copy.iter().any(|v| v != w && w.starts_with(v)));
            }
            rules.push((a, RegexAst::union_all(ws.iter().map(|w| RegexAst::word(w)))));
        }
        let game = Game::new(alphabet.clone(), rules, target)?;
        let class = classify(&game);
        if (!params.prefix_free || class.prefix_free) && (!params.non_recursive || class.non_recursive) {
            return Ok(game);
        }
    }
    Err(GeneratorError::Unsatisfiable(params.attempts))
}

fn random_dfa(alphabet: &Alphabet, states: usize, rng: &mut impl Rng) -> Dfa {
    let delta: Vec<usize> = (0..states * alphabet.len()).map(|_| rng.gen_range(0..states)).collect();
    let mut accepting: Vec<bool> = (0..states).map(|_| rng.gen_bool(0.4)).collect();
    if !accepting.contains(&true) {
        let q = rng.gen_range(0..states);
        accepting[q] = true;
    }
    let k = alphabet.len();
    Dfa::from_fn(alphabet.clone(), states, 0, accepting, |q, a| delta[q * k + a])
}

/// A random general strategy automaton with `states` states.
pub fn random_strategy(g: &Game, states: usize, seed: u64) -> StrategyAutomaton {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = g.history_alphabet();
    let k = h.len();
    let delta: Vec<usize> = (0..states * k).map(|_| rng.gen_range(0..states)).collect();
    let accepting = (0..states).map(|_| rng.gen_bool(0.5)).collect();
    let dfa = Dfa::from_fn(h.clone(), states, 0, accepting, |q, a| delta[q * k + a]);
    StrategyAutomaton::general(g, dfa).expect("history alphabet")
}

/// A random strongly regular strategy.
pub fn random_sreg(g: &Game, seed: u64) -> StrategyAutomaton {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reroutes = (0..g.target().num_states())
        .flat_map(|q| g.functions().iter().map(move |&f| (q, f)))
        .filter(|_| rng.gen_bool(0.5))
        .collect::<Vec<_>>();
    strongly_regular_automaton(g, &StronglyRegularSpec::new(reroutes)).expect("valid reroutes")
}

/// A random NFA over `alphabet` with one initial state. With `total`, every
/// state has at least one successor on every symbol.
pub fn random_nfa(alphabet: &Alphabet, states: usize, density: f64, total: bool, seed: u64) -> Nfa {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trans = Vec::new();
    for p in 0..states {
        for a in alphabet.symbols() {
            let mut targets: Vec<usize> = (0..states).filter(|_| rng.gen_bool(density)).collect();
            if total && targets.is_empty() {
                targets.push(rng.gen_range(0..states));
            }
            trans.extend(targets.into_iter().map(|q| (p, a, q)));
        }
    }
    let accepting: Vec<usize> = (0..states).filter(|_| rng.gen_bool(0.5)).collect();
    Nfa::new(alphabet.clone(), states, [0], accepting, trans).expect("in range")
}

/// All 3CNF formulas over at most `max_vars` variables with at most
/// `max_clauses` clauses, up to literal order within a clause and clause
/// order.
pub fn all_small_formulas(max_vars: usize, max_clauses: usize) -> Vec<CnfFormula> {
    let mut out = BTreeSet::new();
    for n in 1..=max_vars as i32 {
        let lits: Vec<i32> = (1..=n).flat_map(|i| [i, -i]).collect();
        let mut clauses = BTreeSet::new();
        for &x in &lits {
            for &y in &lits {
                for &z in &lits {
                    let mut c = [x, y, z];
                    c.sort();
                    clauses.insert(c);
                }
            }
        }
        let clauses: Vec<[i32; 3]> = clauses.into_iter().collect();
        let mut sets: Vec<Vec<[i32; 3]>> = clauses.iter().map(|&c| vec![c]).collect();
        let mut frontier = sets.clone();
        for _ in 1..max_clauses {
            let mut next = Vec::new();
            for s in &frontier {
                for &c in &clauses {
                    if c >= *s.last().unwrap() {
                        let mut t = s.clone();
                        t.push(c);
                        next.push(t);
                    }
                }
            }
            sets.extend(next.iter().cloned());
            frontier = next;
        }
        for s in sets {
            out.insert((n as usize, s));
        }
    }
    out.into_iter().map(|(n, clauses)| CnfFormula { variables: n, clauses }).collect()
}

/// A shuffled sample of `count` items, reproducible from `seed`.
pub fn sample<T: Clone>(items: &[T], count: usize, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = items.to_vec();
    v.shuffle(&mut rng);
    v.truncate(count);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{exists_winning_sreg, is_dominated, is_winning, SearchMode, DEFAULT_BUDGET};

    #[test]
    fn every_fixture_builds() {
        for name in FIXTURES {
            let fx = fixture(name).unwrap();
            assert_eq!(fx.name, name);
            assert!(!fx.strategies.is_empty());
            assert!(fx.expected.iter().all(|f| !f.quote.is_empty()));
        }
        assert!(fixture("nope").is_err());
    }

    #[test]
    fn sat_target_is_minimal() {
        for n in 1..=3 {
            let t = sat_target(n).unwrap();
            assert_eq!(t.minimize().num_states(), t.num_states());
        }
    }

    #[test]
    fn sat_game_is_non_recursive_and_prefix_free() {
        let phi = CnfFormula::parse("1,-2,2;-1,-1,2").unwrap();
        let (g, w) = from_3sat(&phi).unwrap();
        let c = classify(&g);
        assert!(c.prefix_free && c.non_recursive && g.finite_rules());
        assert_eq!(g.alphabet().format_word(&w), "0CD\"a2\"0CDE");
    }

    #[test]
    fn satisfying_assignment_strategy_wins() {
        let phi = CnfFormula::parse("1,1,1;-2,-2,1").unwrap();
        let (g, w) = from_3sat(&phi).unwrap();
        let good = assignment_strategy(&g, &phi, &[true, false]).unwrap();
        assert!(is_winning(&g, &good, &w));
        let bad = assignment_strategy(&g, &phi, &[false, false]).unwrap();
        assert!(!is_winning(&g, &bad, &w));
    }

    #[test]
    fn one_variable_examples() {
        let sat = CnfFormula::parse("1,1,1").unwrap();
        let (g, w) = from_3sat(&sat).unwrap();
        assert!(exists_winning_sreg(&g, &w, SearchMode::Guided, DEFAULT_BUDGET).unwrap().is_some());
        let unsat = CnfFormula::parse("1,1,1;-1,-1,-1").unwrap();
        let (g, w) = from_3sat(&unsat).unwrap();
        assert!(exists_winning_sreg(&g, &w, SearchMode::Guided, DEFAULT_BUDGET).unwrap().is_none());
    }

    #[test]
    fn formula_validation() {
        assert!(CnfFormula::parse("1,2").is_err());
        assert!(CnfFormula::parse("1,0,1").is_err());
        assert!(CnfFormula::new(1, vec![[1, 2, 1]]).is_err());
        assert_eq!(all_small_formulas(1, 1).len(), 4);
    }

    fn binary() -> Alphabet {
        Alphabet::from_chars("01").unwrap()
    }

    #[test]
    fn universal_single_state() {
        let n = Nfa::new(binary(), 1, [0], [0], [(0, 0, 0), (0, 1, 0)]).unwrap();
        let inst = from_nfa_universality(&n).unwrap();
        assert!(is_universal(&n));
        assert!(is_dominated(&inst.game, &inst.a1, &inst.a2).0);
    }

    #[test]
    fn three_state_example_is_not_universal() {
        // States s, b, c.
        let n = Nfa::new(binary(), 3, [0], [0, 1], [(0, 0, 1), (0, 0, 2), (1, 0, 1), (1, 1, 2)]).unwrap();
        let inst = from_nfa_universality(&n).unwrap();
        assert!(!is_universal(&n));
        let (dominated, witness) = is_dominated(&inst.game, &inst.a1, &inst.a2);
        assert!(!dominated);
        assert_eq!(inst.game.alphabet().format_word(&witness.unwrap()), "1");
        let a = inst.game.alphabet();
        for w in cfgame_automata::words_upto(a.len(), 2) {
            let binary_word = w.iter().all(|&x| x < 2);
            assert_eq!(is_winning(&inst.game, &inst.a2, &w), !binary_word, "{}", a.format_word(&w));
        }
    }

    #[test]
    fn rejected_empty_word_maps_to_fixed_negative() {
        let n = Nfa::new(binary(), 1, [0], [], [(0, 0, 0), (0, 1, 0)]).unwrap();
        let inst = from_nfa_universality(&n).unwrap();
        assert!(inst.fixed_negative);
        assert!(!is_dominated(&inst.game, &inst.a1, &inst.a2).0);
    }

    #[test]
    fn random_games_are_reproducible_and_respect_constraints() {
        let p = GameParams { prefix_free: true, non_recursive: true, ..GameParams::default() };
        for seed in 0..20 {
            let g = random_game(&p, seed).unwrap();
            assert_eq!(g.to_json(), random_game(&p, seed).unwrap().to_json());
            let c = classify(&g);
            assert!(c.prefix_free && c.non_recursive && g.finite_rules());
        }
    }
}
