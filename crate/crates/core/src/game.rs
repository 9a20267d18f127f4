//! Games: alphabet, replacement rules and target automaton.

use std::collections::{BTreeMap, BTreeSet};

use cfgame_automata::{
    determinize_minimize, is_prefix_free, product, regex_to_nfa, AcceptRule, Alphabet,
    AutomataError, AutomatonSpec, Dfa, Nfa, RegexAst, RegexError, Symbol,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum GameError {
    #[error("malformed game file: {0}")]
    Format(String),
    #[error("rule for `{symbol}`: {source}")]
    Regex { symbol: String, source: RegexError },
    #[error("replacement language of `{0}` contains the empty word")]
    EpsilonRule(String),
    #[error("replacement language of `{0}` is empty")]
    EmptyRule(String),
    #[error("target alphabet differs from the game alphabet")]
    TargetAlphabet,
    #[error("end symbol `{0}` already belongs to the alphabet")]
    EndSymbolCollision(String),
    #[error(transparent)]
    Automata(#[from] AutomataError),
}

impl From<cfgame_automata::AlphabetError> for GameError {
    fn from(e: cfgame_automata::AlphabetError) -> Self {
        GameError::Automata(e.into())
    }
}

/// A replacement rule `a → R_a` in source and compiled form.
#[derive(Debug, Clone)]
pub struct Rule {
    pub regex: RegexAst,
    pub nfa: Nfa,
    /// Minimal DFA of `L_a`.
    pub dfa: Dfa,
}

/// An immutable context-free game.
#[derive(Debug, Clone)]
pub struct Game {
    alphabet: Alphabet,
    rules: BTreeMap<Symbol, Rule>,
    target: Dfa,
    history: Alphabet,
    hat: Vec<Option<Symbol>>,
    functions: Vec<Symbol>,
    target_map: Vec<Option<usize>>,
    notices: Vec<String>,
}

impl PartialEq for Game {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.target == other.target
            && self.rules.len() == other.rules.len()
            && self
                .rules
                .iter()
                .zip(&other.rules)
                .all(|((a, r), (b, s))| a == b && r.dfa == s.dfa)
    }
}

/// On-disk game description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameFile {
    pub alphabet: Vec<String>,
    pub rules: BTreeMap<String, String>,
    pub target: AutomatonSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GameClassReport {
    pub prefix_free: bool,
    pub non_recursive: bool,
    pub unary: bool,
    pub finite_target: bool,
    pub function_symbols: Vec<String>,
}

impl Game {
    /// Builds a game. The target is stored in canonical minimal form.
    pub fn new(
        alphabet: Alphabet,
        rules: impl IntoIterator<Item = (Symbol, RegexAst)>,
        target: Dfa,
    ) -> Result<Game, GameError> {
        if target.alphabet() != &alphabet {
            return Err(GameError::TargetAlphabet);
        }
        let mut compiled = BTreeMap::new();
        for (a, regex) in rules {
            if a >= alphabet.len() {
                return Err(AutomataError::SymbolOutOfRange(a).into());
            }
            let name = alphabet.name(a).to_string();
            let nfa = regex_to_nfa(&regex, &alphabet)?;
            let dfa = determinize_minimize(&nfa);
            if dfa.accepts(&[]) {
                return Err(GameError::EpsilonRule(name));
            }
            if dfa.is_empty_language() {
                return Err(GameError::EmptyRule(name));
            }
            compiled.insert(a, Rule { regex, nfa, dfa });
        }
        let minimal = target.minimize();
        let mut notices = Vec::new();
        if minimal != target {
            notices.push(format!(
                "target normalized: {} states supplied, {} in minimal form",
                target.num_states(),
                minimal.num_states()
            ));
        }
        let target_map = target.correspondence(&minimal);
        let functions: Vec<Symbol> = compiled.keys().copied().collect();
        let history = alphabet.with_hatted(&functions);
        let mut hat = vec![None; alphabet.len()];
        for (i, &a) in functions.iter().enumerate() {
            hat[a] = Some(alphabet.len() + i);
        }
        Ok(Game {
            alphabet,
            rules: compiled,
            target: minimal,
            history,
            hat,
            functions,
            target_map,
            notices,
        })
    }

    /// The same rules with another target over the same alphabet.
    pub fn with_target(&self, target: Dfa) -> Result<Game, GameError> {
        if target.alphabet() != &self.alphabet {
            return Err(GameError::TargetAlphabet);
        }
        let minimal = target.minimize();
        Ok(Game {
            target_map: target.correspondence(&minimal),
            target: minimal,
            notices: Vec::new(),
            ..self.clone()
        })
    }

    /// Parses a game from its JSON description.
    pub fn from_file(file: &GameFile) -> Result<Game, GameError> {
        let alphabet = Alphabet::new(file.alphabet.iter().cloned())?;
        if let Some(declared) = file.target.declared_alphabet()? {
            if declared != alphabet {
                return Err(GameError::TargetAlphabet);
            }
        }
        let mut rules = Vec::new();
        for (name, text) in &file.rules {
            let a = alphabet.symbol(name)?;
            let regex = RegexAst::parse(text, &alphabet).map_err(|source| GameError::Regex {
                symbol: name.clone(),
                source,
            })?;
            rules.push((a, regex));
        }
        let target = file.target.to_dfa(&alphabet)?;
        Game::new(alphabet, rules, target)
    }

    pub fn to_file(&self) -> GameFile {
        GameFile {
            alphabet: self.alphabet.names().to_vec(),
            rules: self
                .rules
                .iter()
                .map(|(&a, r)| (self.alphabet.name(a).to_string(), r.regex.to_text(&self.alphabet)))
                .collect(),
            target: AutomatonSpec::from_dfa(&self.target),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("game serializes")
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Σ followed by a hatted copy of each function symbol.
    pub fn history_alphabet(&self) -> &Alphabet {
        &self.history
    }

    pub fn target(&self) -> &Dfa {
        &self.target
    }

    pub fn rules(&self) -> &BTreeMap<Symbol, Rule> {
        &self.rules
    }

    pub fn rule(&self, a: Symbol) -> Option<&Rule> {
        self.rules.get(&a)
    }

    pub fn is_function(&self, a: Symbol) -> bool {
        self.rules.contains_key(&a)
    }

    /// Function symbols in alphabet order.
    pub fn functions(&self) -> &[Symbol] {
        &self.functions
    }

    /// History-alphabet index of `â`.
    pub fn hat(&self, a: Symbol) -> Option<Symbol> {
        self.hat.get(a).copied().flatten()
    }

    /// The plain symbol behind a history symbol, and whether it is hatted.
    pub fn unhat(&self, h: Symbol) -> (Symbol, bool) {
        if h < self.alphabet.len() {
            (h, false)
        } else {
            (self.functions[h - self.alphabet.len()], true)
        }
    }

    /// Minimal-target state corresponding to a state of the supplied target.
    pub fn target_state_of(&self, supplied: usize) -> Option<usize> {
        self.target_map.get(supplied).copied().flatten()
    }

    pub fn notices(&self) -> &[String] {
        &self.notices
    }

    /// True when every replacement language is finite.
    pub fn finite_rules(&self) -> bool {
        self.rules.values().all(|r| r.dfa.is_finite_language())
    }

    pub fn classify(&self) -> GameClassReport {
        classify(self)
    }
}

pub fn load_game(text: &str) -> Result<Game, GameError> {
    let file: GameFile = serde_json::from_str(text).map_err(|e| GameError::Format(e.to_string()))?;
    Game::from_file(&file)
}

pub fn classify(g: &Game) -> GameClassReport {
    let prefix_free = g.rules.values().all(|r| is_prefix_free(&r.nfa).0);
    GameClassReport {
        prefix_free,
        non_recursive: !has_derivation_cycle(g),
        unary: g.alphabet.len() == 1,
        finite_target: g.target.is_finite_language(),
        function_symbols: g.functions.iter().map(|&a| g.alphabet.name(a).to_string()).collect(),
    }
}

/// Minimal DFA of Σ*bΣ*.
fn containing(alphabet: &Alphabet, b: Symbol) -> Dfa {
    Dfa::from_fn(alphabet.clone(), 2, 0, vec![false, true], |q, a| {
        if q == 1 || a == b {
            1
        } else {
            0
        }
    })
}

/// Edges `a → b` whenever some word of `L_a` contains `b`.
pub fn derivation_graph(g: &Game) -> BTreeMap<Symbol, BTreeSet<Symbol>> {
    let mut graph = BTreeMap::new();
    for (&a, rule) in &g.rules {
        let mut succ = BTreeSet::new();
        for &b in &g.functions {
            let both = product(&rule.dfa, &containing(&g.alphabet, b), AcceptRule::And)
                .expect("same alphabet");
            if !both.is_empty_language() {
                succ.insert(b);
            }
        }
        graph.insert(a, succ);
    }
    graph
}

fn has_derivation_cycle(g: &Game) -> bool {
    let graph = derivation_graph(g);
    let mut colour: BTreeMap<Symbol, u8> = BTreeMap::new();
    fn visit(a: Symbol, graph: &BTreeMap<Symbol, BTreeSet<Symbol>>, colour: &mut BTreeMap<Symbol, u8>) -> bool {
        colour.insert(a, 1);
        for &b in &graph[&a] {
            match colour.get(&b).copied().unwrap_or(0) {
                1 => return true,
                0 if visit(b, graph, colour) => return true,
                _ => {}
            }
        }
        colour.insert(a, 2);
        false
    }
    for &a in graph.keys() {
        if colour.get(&a).copied().unwrap_or(0) == 0 && visit(a, &graph, &mut colour) {
            return true;
        }
    }
    false
}

/// Appends `end` to every replacement language and lets the target ignore it.
pub fn to_prefix_free(g: &Game, end: &str) -> Result<Game, GameError> {
    if g.alphabet.index(end).is_some() {
        return Err(GameError::EndSymbolCollision(end.to_string()));
    }
    let alphabet = g.alphabet.extended(end)?;
    let dollar = alphabet.len() - 1;
    let rules = g
        .rules
        .iter()
        .map(|(&a, r)| (a, RegexAst::concat(r.regex.clone(), RegexAst::symbol(dollar))));
    let t = &g.target;
    let target = Dfa::from_fn(
        alphabet.clone(),
        t.num_states(),
        t.initial(),
        t.accepting().to_vec(),
        |q, a| if a == dollar { q } else { t.next(q, a) },
    );
    Game::new(alphabet.clone(), rules.collect::<Vec<_>>(), target)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SANDBOX: &str = r#"{
        "alphabet": ["a", "b", "c"],
        "rules": {"a": "b"},
        "target": {"states": 4, "initial": 0, "accepting": [3],
                   "transitions": [[0, "a", 1], [0, "b", 2], [1, "b", 3], [2, "c", 3]]}
    }"#;

    #[test]
    fn sandbox_loads() {
        let g = load_game(SANDBOX).unwrap();
        assert_eq!(g.functions(), &[0]);
        let a = g.alphabet();
        assert!(g.target().accepts(&a.parse_word("ab").unwrap()));
        assert!(g.target().accepts(&a.parse_word("bc").unwrap()));
        assert!(!g.target().accepts(&a.parse_word("ac").unwrap()));
        assert_eq!(g.history_alphabet().len(), 4);
        assert_eq!(g.hat(0), Some(3));
        assert_eq!(g.unhat(3), (0, true));
    }

    #[test]
    fn epsilon_rule_rejected() {
        let text = SANDBOX.replace(r#""a": "b""#, r#""a": "b*""#);
        assert!(matches!(load_game(&text), Err(GameError::EpsilonRule(_))));
    }

    #[test]
    fn unknown_symbol_rejected() {
        let text = SANDBOX.replace(r#""a": "b""#, r#""a": "z""#);
        assert!(load_game(&text).is_err());
    }

    #[test]
    fn round_trip() {
        let g = load_game(SANDBOX).unwrap();
        let again = load_game(&g.to_json()).unwrap();
        assert_eq!(g, again);
        assert!(again.notices().is_empty());
    }

    #[test]
    fn non_minimal_target_is_normalized() {
        let text = SANDBOX.replace(r#""states": 4"#, r#""states": 6"#).replace(
            r#"[2, "c", 3]]"#,
            r#"[2, "c", 3], [3, "c", 4], [4, "c", 5]]"#,
        );
        let g = load_game(&text).unwrap();
        assert_eq!(g.notices().len(), 1);
        assert_eq!(g.target().num_states(), 5);
    }

    #[test]
    fn prefix_free_transform() {
        let g = load_game(SANDBOX).unwrap();
        let p = to_prefix_free(&g, "$").unwrap();
        let a = p.alphabet();
        assert!(classify(&p).prefix_free);
        assert!(p.rule(0).unwrap().dfa.accepts(&a.parse_word("b$").unwrap()));
        assert!(p.target().accepts(&a.parse_word("a$b").unwrap()));
        assert!(to_prefix_free(&g, "a").is_err());
    }

    #[test]
    fn recursion_detection() {
        let text = r#"{"alphabet": ["a"], "rules": {"a": "aa"},
            "target": {"states": 3, "initial": 0, "accepting": [2],
                       "transitions": [[0, "a", 1], [1, "a", 2], [2, "a", 2]]}}"#;
        let g = load_game(text).unwrap();
        let c = classify(&g);
        assert!(!c.non_recursive);
        assert!(c.unary);
        assert!(!c.finite_target);
    }
}
