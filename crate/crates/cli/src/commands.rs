use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use serde_json::{json, Value};

use cfgame_automata::dot::{dfa_to_dot, nfa_to_dot};
use cfgame_automata::{Alphabet, AutomatonSpec, Dfa, Symbol, Word};
use cfgame_core::analysis::{exists_winning_sreg, is_dominated, losing_nfa, SearchMode, WinningOracle, DEFAULT_BUDGET};
use cfgame_core::game::{load_game, to_prefix_free, Game};
use cfgame_core::generators::{
    assignment_strategy, fixture, from_3sat, from_nfa_universality, is_universal, random_game, random_strategy,
    CnfFormula, GameParams,
};
use cfgame_core::online::{diagnose_bounded, prune_detailed, OnlineInstance};
use cfgame_core::play::{
    flatten, format_history, run_play, AutomatonJuliet, Configuration, HistorySymbol, PlayOutcome, Romeo,
    ScriptedReplies, ShortlexReplies, StrategyAutomaton,
};
use cfgame_core::synthesis::synthesize;

use crate::{Command, ExportTargets, Generate, PlayArgs, Report, Status, Usage};

pub struct Context {
    pub seed: u64,
    pub budget: Option<u64>,
    pub quiet: bool,
}

pub fn run(ctx: &Context, command: Command) -> Result<Report> {
    match command {
        Command::Validate { file } => validate(&file),
        Command::Classify { file } => classify(ctx, &file),
        Command::Transform { file, prefix_free, end_symbol, out } => transform(ctx, &file, prefix_free, &end_symbol, out),
        Command::Play(args) => play(ctx, args),
        Command::IsWinning { game, strategy, word } => is_winning(ctx, &game, &strategy, &word),
        Command::ExistsWinning { game, word, mode, out } => exists_winning(ctx, &game, &word, mode.map(Into::into), out),
        Command::Compare { game, a, b } => compare(ctx, &game, &a, &b),
        Command::LosingNfa { game, strategy, export } => losing(ctx, &game, &strategy, &export),
        Command::Synthesize { game, out, dot, cap } => synth(ctx, &game, &out, dot, cap),
        Command::OnlinePrune { nfa, export, diagnose_bounded } => online_prune(&nfa, &export, diagnose_bounded),
        Command::Generate(g) => generate(ctx, g),
        Command::Export { game, strategy, export } => export_automaton(ctx, &game, strategy, &export),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn open_game(ctx: &Context, path: &Path) -> Result<Game> {
    let g = load_game(&read(path)?).with_context(|| format!("invalid game {}", path.display()))?;
    if !ctx.quiet {
        for notice in g.notices() {
            eprintln!("note: {notice}");
        }
    }
    Ok(g)
}

fn open_strategy(g: &Game, path: &Path) -> Result<StrategyAutomaton> {
    let spec: AutomatonSpec =
        serde_json::from_str(&read(path)?).with_context(|| format!("malformed strategy {}", path.display()))?;
    StrategyAutomaton::from_spec(g, &spec).with_context(|| format!("invalid strategy {}", path.display()))
}

fn label(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn parse_word(alphabet: &Alphabet, text: &str) -> Result<Word> {
    alphabet.parse_word(text).with_context(|| format!("invalid word {text:?}"))
}

fn spec_json(spec: &AutomatonSpec) -> Value {
    serde_json::to_value(spec).expect("automaton serializes")
}

fn pretty(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("value serializes") + "\n"
}

fn write_exports(export: &ExportTargets, dot: impl FnOnce() -> String, spec: impl FnOnce() -> Value) -> Result<Vec<String>> {
    let mut written = Vec::new();
    if let Some(path) = &export.dot {
        write(path, &dot())?;
        written.push(path.display().to_string());
    }
    if let Some(path) = &export.json_out {
        write(path, &pretty(&spec()))?;
        written.push(path.display().to_string());
    }
    Ok(written)
}

fn validate(file: &Path) -> Result<Report> {
    let text = read(file)?;
    Ok(match load_game(&text) {
        Ok(g) => {
            let functions: Vec<&str> = g.functions().iter().map(|&a| g.alphabet().name(a)).collect();
            Report::yes(
                "valid",
                json!({
                    "valid": true,
                    "alphabet": g.alphabet().names(),
                    "functions": functions,
                    "target_states": g.target().num_states(),
                    "notices": g.notices(),
                }),
            )
        }
        Err(e) => Report::decide(false, format!("invalid: {e}"), json!({ "valid": false, "error": e.to_string() })),
    })
}

fn classify(ctx: &Context, file: &Path) -> Result<Report> {
    let g = open_game(ctx, file)?;
    let c = g.classify();
    let mut classes = Vec::new();
    for (on, name) in [
        (c.prefix_free, "prefix-free"),
        (c.non_recursive, "non-recursive"),
        (c.unary, "unary"),
        (c.finite_target, "finite target"),
    ] {
        if on {
            classes.push(name);
        }
    }
    let verdict = if classes.is_empty() { "no special class".to_string() } else { classes.join(", ") };
    Ok(Report::yes(verdict, serde_json::to_value(&c)?))
}

fn transform(ctx: &Context, file: &Path, prefix_free: bool, end: &str, out: Option<PathBuf>) -> Result<Report> {
    if !prefix_free {
        bail!(Usage("transform needs --prefix-free".into()));
    }
    let g = to_prefix_free(&open_game(ctx, file)?, end)?;
    let game = serde_json::to_value(g.to_file())?;
    Ok(match out {
        Some(path) => {
            write(&path, &g.to_json())?;
            Report::yes(
                format!("prefix-free game written to {}", path.display()),
                json!({ "out": path.display().to_string(), "end_symbol": end, "alphabet": g.alphabet().names() }),
            )
        }
        None => Report::yes("prefix-free game", game),
    })
}

fn configuration_json(g: &Game, c: &Configuration) -> Value {
    json!({
        "history": format_history(g, &c.history),
        "remaining": g.alphabet().format_word(&c.remaining),
        "state": g.target().run(&flatten(&c.history)),
    })
}

/// Romeo played by a person on standard input.
struct Human<'a> {
    game: &'a Game,
    remaining: Word,
    seen: usize,
    fallback: ShortlexReplies,
}

impl Romeo for Human<'_> {
    fn reply(&mut self, history: &[HistorySymbol], a: Symbol) -> Word {
        for h in &history[self.seen..] {
            if let HistorySymbol::Plain(_) = h {
                self.remaining.remove(0);
            }
        }
        let g = self.game;
        let alphabet = g.alphabet();
        let name = alphabet.name(a);
        eprintln!(
            "history {}  remaining {}  state {}",
            format_history(g, history),
            alphabet.format_word(&self.remaining),
            g.target().run(&flatten(history)),
        );
        let rule = g.rule(a).expect("calls only on function symbols");
        let stdin = io::stdin();
        let x = loop {
            eprint!("reply for {name} ({}): ", rule.regex.to_text(alphabet));
            let _ = io::stderr().flush();
            let mut line = String::new();
            if stdin.lock().read_line(&mut line).unwrap_or(0) == 0 {
                let x = self.fallback.reply(history, a);
                eprintln!("\nend of input, replying {}", alphabet.format_word(&x));
                break x;
            }
            match alphabet.parse_word(&line) {
                Ok(x) if rule.dfa.accepts(&x) => break x,
                Ok(x) => eprintln!("{} is not a replacement of {name}", alphabet.format_word(&x)),
                Err(e) => eprintln!("{e}"),
            }
        };
        let mut next = x.clone();
        next.extend_from_slice(&self.remaining[1..]);
        self.remaining = next;
        self.seen = history.len() + 1;
        x
    }
}

fn play(ctx: &Context, args: PlayArgs) -> Result<Report> {
    let g = open_game(ctx, &args.game)?;
    let a = open_strategy(&g, &args.strategy)?;
    let alphabet = g.alphabet();
    let w = match (&args.word, args.interactive) {
        (Some(text), _) => parse_word(alphabet, text)?,
        (None, true) => {
            eprint!("word: ");
            io::stderr().flush()?;
            let mut line = String::new();
            io::stdin().lock().read_line(&mut line)?;
            parse_word(alphabet, &line)?
        }
        (None, false) => bail!(Usage("play needs --word or --interactive".into())),
    };
    let mut juliet = AutomatonJuliet::new(&a);
    let p = if args.interactive {
        let mut romeo = Human { game: &g, remaining: w.clone(), seen: 0, fallback: ShortlexReplies::new(&g) };
        run_play(&g, &mut juliet, &mut romeo, &w, args.step_limit)?
    } else {
        let script = match &args.replies {
            Some(text) => text.split(',').map(|r| parse_word(alphabet, r)).collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        run_play(&g, &mut juliet, &mut ScriptedReplies::new(&g, script), &w, args.step_limit)?
    };
    let configurations: Vec<Value> = p.configurations.iter().map(|c| configuration_json(&g, c)).collect();
    let last = p.configurations.last().expect("non-empty play");
    let final_string = alphabet.format_word(&p.final_string());
    let (status, verdict, outcome) = match p.outcome {
        PlayOutcome::WinJuliet => (Status::Yes, format!("Juliet wins with final string {final_string}"), "juliet"),
        PlayOutcome::WinRomeo => (Status::No, format!("Romeo wins with final string {final_string}"), "romeo"),
        PlayOutcome::Truncated(n) => (Status::Exceeded, format!("play truncated after {n} moves"), "truncated"),
    };
    Ok(Report::new(
        status,
        verdict,
        json!({
            "word": alphabet.format_word(&w),
            "outcome": outcome,
            "final_string": final_string,
            "history": format_history(&g, &last.history),
            "moves": p.configurations.len() - 1,
            "depth": p.depth,
            "configurations": configurations,
        }),
    ))
}

fn is_winning(ctx: &Context, game: &Path, strategy: &Path, word: &str) -> Result<Report> {
    let g = open_game(ctx, game)?;
    let a = open_strategy(&g, strategy)?;
    let w = parse_word(g.alphabet(), word)?;
    let o = WinningOracle::new(&g, &a);
    let win = o.wins(&w);
    let shown = g.alphabet().format_word(&w);
    let name = label(strategy);
    let verdict = if win { format!("win: {name} wins on {shown}") } else { format!("not win: {name} does not win on {shown}") };
    Ok(Report::decide(
        win,
        verdict,
        json!({
            "word": shown,
            "win": win,
            "strategy_states": a.num_states(),
            "losing_nfa_states": o.losing.nfa.num_states(),
        }),
    ))
}

fn exists_winning(
    ctx: &Context,
    game: &Path,
    word: &str,
    mode: Option<SearchMode>,
    out: Option<PathBuf>,
) -> Result<Report> {
    let g = open_game(ctx, game)?;
    let mode = mode.unwrap_or(if g.finite_rules() { SearchMode::Guided } else { SearchMode::Exhaustive });
    let w = parse_word(g.alphabet(), word)?;
    let shown = g.alphabet().format_word(&w);
    let budget = ctx.budget.unwrap_or(DEFAULT_BUDGET);
    Ok(match exists_winning_sreg(&g, &w, mode, budget)? {
        Some(spec) => {
            let a = cfgame_core::play::strongly_regular_automaton(&g, &spec)?;
            let file = a.to_spec(&g);
            if let Some(path) = &out {
                write(path, &pretty(&file))?;
            }
            let reroutes: Vec<Value> =
                spec.reroutes.iter().map(|&(q, f)| json!([q, g.alphabet().name(f)])).collect();
            Report::yes(
                format!("exists: a strongly regular strategy with {} reroutes wins on {shown}", reroutes.len()),
                json!({ "word": shown, "exists": true, "reroutes": reroutes, "strategy": spec_json(&file) }),
            )
        }
        None => Report::decide(
            false,
            format!("none: no strongly regular strategy wins on {shown}"),
            json!({ "word": shown, "exists": false }),
        ),
    })
}

fn compare(ctx: &Context, game: &Path, a: &Path, b: &Path) -> Result<Report> {
    let g = open_game(ctx, game)?;
    let sa = open_strategy(&g, a)?;
    let sb = open_strategy(&g, b)?;
    let (la, lb) = (label(a), label(b));
    let (ab, wab) = is_dominated(&g, &sa, &sb);
    let (ba, wba) = is_dominated(&g, &sb, &sa);
    let fmt = |w: Option<Word>| w.map(|w| g.alphabet().format_word(&w));
    let verdict = match (ab, ba) {
        (true, true) if la != lb => format!("{la} ⊆ {lb} and {lb} ⊆ {la}"),
        (true, _) => format!("{la} ⊆ {lb}"),
        (false, true) => format!("{la} ⊋ {lb}"),
        (false, false) => format!("{la} and {lb} are incomparable"),
    };
    Ok(Report::decide(
        ab,
        verdict,
        json!({
            "a": la,
            "b": lb,
            "a_subset_b": ab,
            "b_subset_a": ba,
            "witness_a_not_b": fmt(wab),
            "witness_b_not_a": fmt(wba),
        }),
    ))
}

fn losing(ctx: &Context, game: &Path, strategy: &Path, export: &ExportTargets) -> Result<Report> {
    let g = open_game(ctx, game)?;
    let a = open_strategy(&g, strategy)?;
    let l = losing_nfa(&g, &a);
    let written = write_exports(
        export,
        || nfa_to_dot(&l.nfa, "losing"),
        || spec_json(&AutomatonSpec::from_nfa(&l.nfa).expect("single initial state")),
    )?;
    let inf: Vec<Value> = l.inf_pairs.iter().map(|&(k, f)| json!([k, g.alphabet().name(f)])).collect();
    Ok(Report::yes(
        format!("losing automaton with {} states and {} transitions", l.nfa.num_states(), l.nfa.num_transitions()),
        json!({
            "states": l.nfa.num_states(),
            "transitions": l.nfa.num_transitions(),
            "sink": l.sink(),
            "pairs": l.states,
            "inf_pairs": inf,
            "written": written,
        }),
    ))
}

fn synth(ctx: &Context, game: &Path, out: &Path, dot: Option<PathBuf>, cap: usize) -> Result<Report> {
    let g = open_game(ctx, game)?;
    let s = synthesize(&g, cap)?;
    write(out, &pretty(&s.strategy.to_spec(&g)))?;
    if let Some(path) = &dot {
        write(path, &dfa_to_dot(s.strategy.dfa(), "strategy"))?;
    }
    Ok(Report::yes(
        format!("synthesized a strategy with {} states into {}", s.strategy.num_states(), out.display()),
        json!({
            "out": out.display().to_string(),
            "strategy_states": s.strategy.num_states(),
            "kind": s.strategy.kind().to_string(),
            "effect_triples": s.effects.inducing.len(),
            "strata": s.effects.strata,
            "arena_states": s.arena.states.len(),
        }),
    ))
}

fn online_prune(file: &Path, export: &ExportTargets, bound: Option<usize>) -> Result<Report> {
    let spec: AutomatonSpec =
        serde_json::from_str(&read(file)?).with_context(|| format!("malformed automaton {}", file.display()))?;
    let alphabet = spec
        .declared_alphabet()?
        .with_context(|| format!("{} must list its alphabet", file.display()))?;
    let inst = OnlineInstance::new(spec.to_nfa(&alphabet)?)?;
    let r = prune_detailed(&inst);
    let strategy = AutomatonSpec::from_dfa(&r.dfa);
    let written = write_exports(export, || dfa_to_dot(&r.dfa, "strategy"), || spec_json(&strategy))?;
    let mut details = json!({
        "states": inst.nfa().num_states(),
        "transitions_before": inst.nfa().num_transitions(),
        "transitions_after": r.pruned.num_transitions(),
        "rounds": r.rounds,
        "unambiguous": r.unambiguous,
        "strategy": spec_json(&strategy),
        "written": written,
    });
    if let Some(n) = bound {
        let d = diagnose_bounded(&inst, n);
        let words = |ws: &[Word]| ws.iter().map(|w| alphabet.format_word(w)).collect::<Vec<_>>();
        details["diagnostic"] = json!({
            "bound": n,
            "literal_matches": d.literal_matches_scheme(),
            "full_language_matches": d.full_language_matches_scheme(),
            "win_sets": {
                "literal": words(&d.win_sets[0]),
                "full_language": words(&d.win_sets[1]),
                "scheme": words(&d.win_sets[2]),
            },
        });
    }
    Ok(Report::yes(
        format!("pruned {} to {} transitions", inst.nfa().num_transitions(), r.dfa.transitions().count()),
        details,
    ))
}

fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn generate(ctx: &Context, g: Generate) -> Result<Report> {
    match g {
        Generate::Sat { clauses, out } => {
            let phi = CnfFormula::parse(&clauses)?;
            let (game, w) = from_3sat(&phi)?;
            out_dir(&out)?;
            write(&out.join("game.json"), &game.to_json())?;
            let word = game.alphabet().format_word(&w);
            write(&out.join("word.txt"), &format!("{word}\n"))?;
            let theta = phi.brute_force_sat();
            if let Some(theta) = &theta {
                let a = assignment_strategy(&game, &phi, theta)?;
                write(&out.join("strategy.json"), &pretty(&a.to_spec(&game)))?;
            }
            Ok(Report::yes(
                format!("3SAT instance written to {}", out.display()),
                json!({
                    "out": out.display().to_string(),
                    "variables": phi.variables,
                    "clauses": phi.clauses.len(),
                    "word": word,
                    "satisfiable": theta.is_some(),
                }),
            ))
        }
        Generate::Universality { nfa, out } => {
            let spec: AutomatonSpec =
                serde_json::from_str(&read(&nfa)?).with_context(|| format!("malformed automaton {}", nfa.display()))?;
            let alphabet = match spec.declared_alphabet()? {
                Some(a) => a,
                None => Alphabet::from_chars("01")?,
            };
            let n = spec.to_nfa(&alphabet)?;
            let u = from_nfa_universality(&n)?;
            out_dir(&out)?;
            write(&out.join("game.json"), &u.game.to_json())?;
            write(&out.join("a1.json"), &pretty(&u.a1.to_spec(&u.game)))?;
            write(&out.join("a2.json"), &pretty(&u.a2.to_spec(&u.game)))?;
            Ok(Report::yes(
                format!("universality instance written to {}", out.display()),
                json!({
                    "out": out.display().to_string(),
                    "fixed_negative": u.fixed_negative,
                    "universal": is_universal(&n),
                }),
            ))
        }
        Generate::Random { params, strategies, out } => {
            let p: GameParams = serde_json::from_str(&params).map_err(|e| Usage(format!("--params: {e}")))?;
            let game = random_game(&p, ctx.seed)?;
            let specs: Vec<AutomatonSpec> = (0..strategies as u64)
                .map(|i| random_strategy(&game, 3, ctx.seed.wrapping_add(i)).to_spec(&game))
                .collect();
            match out {
                Some(dir) => {
                    out_dir(&dir)?;
                    write(&dir.join("game.json"), &game.to_json())?;
                    for (i, s) in specs.iter().enumerate() {
                        write(&dir.join(format!("strategy{i}.json")), &pretty(s))?;
                    }
                    Ok(Report::yes(
                        format!("random game written to {}", dir.display()),
                        json!({ "out": dir.display().to_string(), "seed": ctx.seed, "strategies": specs.len() }),
                    ))
                }
                None => Ok(Report::yes(
                    format!("random game for seed {}", ctx.seed),
                    json!({ "seed": ctx.seed, "game": game.to_file(), "strategies": specs }),
                )),
            }
        }
        Generate::Fixture { name, out } => {
            let fx = fixture(&name)?;
            out_dir(&out)?;
            write(&out.join("game.json"), &fx.game.to_json())?;
            let mut files = vec!["game.json".to_string()];
            for (s, a) in &fx.strategies {
                let file = format!("{s}.json");
                write(&out.join(&file), &pretty(&a.to_spec(&fx.game)))?;
                files.push(file);
            }
            write(&out.join("facts.json"), &pretty(&fx.expected))?;
            files.push("facts.json".into());
            Ok(Report::yes(
                format!("fixture {name} written to {}", out.display()),
                json!({ "out": out.display().to_string(), "files": files }),
            ))
        }
    }
}

fn export_automaton(ctx: &Context, game: &Path, strategy: Option<PathBuf>, export: &ExportTargets) -> Result<Report> {
    let g = open_game(ctx, game)?;
    let (what, dfa, spec): (&str, Dfa, AutomatonSpec) = match &strategy {
        Some(path) => {
            let a = open_strategy(&g, path)?;
            ("strategy", a.dfa().clone(), a.to_spec(&g))
        }
        None => ("target", g.target().clone(), AutomatonSpec::from_dfa(g.target())),
    };
    if export.dot.is_none() && export.json_out.is_none() {
        return Ok(Report::yes(
            format!("{what} automaton with {} states", dfa.num_states()),
            json!({ "automaton": spec_json(&spec), "dot": dfa_to_dot(&dfa, what) }),
        ));
    }
    let written = write_exports(export, || dfa_to_dot(&dfa, what), || spec_json(&spec))?;
    Ok(Report::yes(
        format!("{what} automaton exported"),
        json!({ "states": dfa.num_states(), "written": written }),
    ))
}
