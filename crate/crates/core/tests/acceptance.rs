//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use cfgame_automata::{enumerate_upto, is_prefix_free, words_upto, Alphabet, Word};
use cfgame_core::analysis::{exists_winning_sreg, is_dominated, losing_nfa, winning_set_upto, SearchMode, WinningOracle, DEFAULT_BUDGET};
use cfgame_core::game::{to_prefix_free, Game};
use cfgame_core::generators::{all_small_formulas, fixture, from_3sat, from_nfa_universality, random_game, random_nfa, random_strategy, GameParams};
use cfgame_core::online::{prune_detailed, OnlineInstance};
use cfgame_core::play::{brute_force_outcome, strongly_regular_automaton, BruteOutcome, StronglyRegularSpec};
use cfgame_core::play::StrategyAutomaton;
use cfgame_core::synthesis::synthesize;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

const GOLDEN_LIMIT: Duration = Duration::from_secs(1);
const ORACLE_GAMES: u64 = 500;
const ORACLE_LIMIT: Duration = Duration::from_secs(300);
const SMOKE_LENGTHS: [usize; 4] = [10, 100, 1000, 10_000];
const SMOKE_LIMIT: Duration = Duration::from_secs(1);
/// Largest allowed growth exponent between consecutive word lengths.
const SMOKE_EXPONENT: f64 = 2.2;
/// Timings below this are treated as this value when fitting growth.
const SMOKE_FLOOR: Duration = Duration::from_micros(500);
const SAT_LIMIT: Duration = Duration::from_secs(120);
const UNIVERSALITY_NFAS: u64 = 300;
const ONLINE_INSTANCES: u64 = 200;
const SYNTHESIS_GAMES: u64 = 60;
const SYNTHESIS_LIMIT: Duration = Duration::from_secs(600);
const TRANSFORM_GAMES: u64 = 200;

type Outcome = Result<String, String>;

fn names(a: &Alphabet, words: &[Word]) -> Vec<String> {
    words.iter().map(|w| a.format_word(w)).collect()
}

fn oracle_params(seed: u64) -> GameParams {
    GameParams {
        alphabet_size: 1 + (seed % 3) as usize,
        target_states: 1 + (seed / 3 % 4) as usize,
        rule_length: 3,
        rule_words: 3,
        ..GameParams::default()
    }
}

fn oracle_corpus(seed: u64) -> (Game, cfgame_core::play::StrategyAutomaton) {
    let g = random_game(&oracle_params(seed), seed).expect("unconstrained parameters");
    let a = random_strategy(&g, 1 + (seed % 4) as usize, seed ^ 0x5eed);
    (g, a)
}

fn golden() -> Outcome {
    let mut notes = Vec::new();
    for (name, strategy, n, expected) in [
        ("g2c-undominated", "A", 3, vec!["a", "bb", "bcc", "cbc", "ccc"]),
        ("g1c-undominated", "sigma", 1, vec!["a", "b", "c", "e"]),
    ] {
        let start = Instant::now();
        let fx = fixture(name).map_err(|e| e.to_string())?;
        let got = names(fx.game.alphabet(), &winning_set_upto(&fx.game, &fx.strategies[strategy], n));
        let elapsed = start.elapsed();
        if got != expected {
            return Err(format!("{name}: got {got:?}, expected {expected:?}"));
        }
        if elapsed > GOLDEN_LIMIT {
            return Err(format!("{name}: took {elapsed:?}"));
        }
        notes.push(format!("{name} n={n} {{{}}} in {elapsed:.2?}", got.join(",")));
    }
    Ok(notes.join("; "))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut divergent = 0usize;
    for seed in 0..ORACLE_GAMES {
        let (g, a) = oracle_corpus(seed);
        let oracle = WinningOracle::new(&g, &a);
        for w in words_upto(g.alphabet().len(), 5) {
            let brute = brute_force_outcome(&g, &a, &w).map_err(|e| e.to_string())?;
            if brute == BruteOutcome::RomeoCanForceInfinite {
                divergent += 1;
            }
            if oracle.wins(&w) != (brute == BruteOutcome::Win) {
                return Err(format!("seed {seed}, word {}: is_winning disagrees with brute force ({brute:?})", g.alphabet().format_word(&w)));
            }
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    if elapsed > ORACLE_LIMIT {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{ORACLE_GAMES} games, {checked} words ({divergent} divergent), 0 mismatches in {elapsed:.1?}"))
}

fn losing_nfa_correctness() -> Outcome {
    let start = Instant::now();
    let mut losing_total = 0usize;
    for seed in 0..ORACLE_GAMES {
        let (g, a) = oracle_corpus(seed);
        let enumerated: BTreeSet<Word> = enumerate_upto(&losing_nfa(&g, &a).nfa, 5).into_iter().collect();
        let mut brute = BTreeSet::new();
        for w in words_upto(g.alphabet().len(), 5) {
            if brute_force_outcome(&g, &a, &w).map_err(|e| e.to_string())? != BruteOutcome::Win {
                brute.insert(w);
            }
        }
        if let Some(w) = first_difference(&enumerated, &brute) {
            return Err(format!("seed {seed}: sets differ first at {}", g.alphabet().format_word(&w)));
        }
        losing_total += brute.len();
    }
    Ok(format!("{ORACLE_GAMES} games, {losing_total} losing words, 0 mismatches in {:.1?}", start.elapsed()))
}

fn smoke() -> Outcome {
    let fx = fixture("g2c-undominated").map_err(|e| e.to_string())?;
    let (g, a) = (&fx.game, &fx.strategies["A"]);
    if g.target().num_states() != 5 {
        return Err(format!("expected a 5-state target, got {}", g.target().num_states()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut times = Vec::new();
    for &n in &SMOKE_LENGTHS {
        let w: Word = (0..n).map(|_| rng.gen_range(0..g.alphabet().len())).collect();
        let mut samples = Vec::new();
        for _ in 0..5 {
            let start = Instant::now();
            std::hint::black_box(cfgame_core::analysis::is_winning(g, a, &w));
            samples.push(start.elapsed());
        }
        samples.sort();
        let t = samples[2];
        if t > SMOKE_LIMIT {
            return Err(format!("length {n} took {t:?}"));
        }
        times.push(t);
    }
    let mut exps = Vec::new();
    for i in 1..times.len() {
        let ratio = times[i].max(SMOKE_FLOOR).as_secs_f64() / times[i - 1].max(SMOKE_FLOOR).as_secs_f64();
        let e = ratio.log10();
        if e > SMOKE_EXPONENT {
            return Err(format!("growth exponent {e:.2} between lengths {} and {}", SMOKE_LENGTHS[i - 1], SMOKE_LENGTHS[i]));
        }
        exps.push(format!("{e:.2}"));
    }
    let shown: Vec<String> = times.iter().map(|t| format!("{t:.2?}")).collect();
    Ok(format!("times {} ; growth exponents {} (limit {SMOKE_EXPONENT})", shown.join(", "), exps.join(", ")))
}

fn sat_reduction() -> Outcome {
    let start = Instant::now();
    let formulas = all_small_formulas(2, 2);
    let mut sat = 0;
    for phi in &formulas {
        let (g, w) = from_3sat(phi).map_err(|e| e.to_string())?;
        let found = exists_winning_sreg(&g, &w, SearchMode::Guided, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        let expected = brute_sat(phi.variables, &phi.clauses);
        if found.is_some() != expected {
            return Err(format!("{phi:?}: search says {}, brute force says {expected}", found.is_some()));
        }
        sat += expected as usize;
    }
    let elapsed = start.elapsed();
    if elapsed > SAT_LIMIT {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{} formulas ({sat} satisfiable), 0 mismatches in {elapsed:.1?}", formulas.len()))
}

fn universality() -> Outcome {
    let binary = Alphabet::from_chars("01").unwrap();
    let mut universal = 0;
    let mut fixed = 0;
    for seed in 0..UNIVERSALITY_NFAS {
        let states = 1 + (seed % 3) as usize;
        let density = [0.3, 0.5, 0.7][(seed / 3 % 3) as usize];
        let n = random_nfa(&binary, states, density, false, seed);
        let inst = from_nfa_universality(&n).map_err(|e| e.to_string())?;
        let expected = subset_universal(&n);
        let (dominated, _) = is_dominated(&inst.game, &inst.a1, &inst.a2);
        if dominated != expected {
            return Err(format!("seed {seed}: dominated={dominated}, universal={expected}"));
        }
        universal += expected as usize;
        fixed += inst.fixed_negative as usize;
    }
    Ok(format!("{UNIVERSALITY_NFAS} NFAs ({universal} universal, {fixed} rejecting ε), 0 mismatches"))
}

fn online() -> Outcome {
    let alphabet = Alphabet::from_chars("ab").unwrap();
    let mut pruned_any = 0;
    for seed in 0..ONLINE_INSTANCES {
        let states = 1 + (seed % 3) as usize;
        let n = random_nfa(&alphabet, states, 0.5, true, seed);
        let inst = OnlineInstance::new(n.clone()).map_err(|e| e.to_string())?;
        let r = prune_detailed(&inst);
        let ours = dfa_win_set(&r.dfa, 3);
        let library_best: BTreeSet<Word> = cfgame_core::online::brute_force_best_online(&inst, 3, 1 << 20)
            .map_err(|e| e.to_string())?
            .into_iter()
            .collect();
        let reference = best_online(&n, 0, 3);
        if set_cmp(&ours, &library_best) == std::cmp::Ordering::Less || ours != library_best {
            return Err(format!("seed {seed}: pruned set differs from brute_force_best_online"));
        }
        if ours != reference {
            return Err(format!("seed {seed}: pruned set differs from the subtree-maximum reference"));
        }
        if !accepted_implies_universal(&r.pruned, 4) {
            return Err(format!("seed {seed}: pruned automaton accepts a word nondeterministically but not universally"));
        }
        pruned_any += (r.pruned.num_transitions() < n.num_transitions()) as usize;
    }
    Ok(format!("{ONLINE_INSTANCES} instances ({pruned_any} pruned), 0 mismatches, all pass the universal-acceptance check"))
}

fn synthesis() -> Outcome {
    let start = Instant::now();
    let mut strictly_better = 0;
    let mut triples = 0;
    let mut beyond_read_all = 0;
    for seed in 0..SYNTHESIS_GAMES {
        let params = GameParams {
            alphabet_size: 2 + (seed % 2) as usize,
            target_states: 1 + (seed % 4) as usize,
            rule_length: 2 + (seed % 3 == 0) as usize,
            rule_words: 2,
            prefix_free: true,
            ..GameParams::default()
        };
        let g = random_game(&params, 1000 + seed).map_err(|e| e.to_string())?;
        let out = synthesize(&g, cfgame_core::synthesis::DEFAULT_CAP).map_err(|e| format!("seed {seed}: {e}"))?;
        triples += out.effects.nontrivial().count();
        let ours: BTreeSet<Word> = WinningOracle::new(&g, &out.strategy).winning_set_upto(4).into_iter().collect();
        let read: BTreeSet<Word> = winning_set_upto(&g, &StrategyAutomaton::read_all(&g), 4).into_iter().collect();
        beyond_read_all += ours.difference(&read).count();
        let best = OnePassOracle::new(&g, 6).best_set(4);
        if let Some(w) = first_difference(&ours, &best) {
            if best.contains(&w) {
                return Err(format!(
                    "seed {seed}: a one-pass strategy wins {} which the synthesized strategy loses\n{}",
                    g.alphabet().format_word(&w),
                    g.to_json()
                ));
            }
            let brute = brute_force_outcome(&g, &out.strategy, &w).map_err(|e| e.to_string())?;
            if brute != BruteOutcome::Win {
                return Err(format!("seed {seed}: claimed win on {} not confirmed by brute force", g.alphabet().format_word(&w)));
            }
            strictly_better += 1;
        }
    }
    let elapsed = start.elapsed();
    if elapsed > SYNTHESIS_LIMIT {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!(
        "{SYNTHESIS_GAMES} prefix-free games, {triples} non-trivial effect triples, {beyond_read_all} words won beyond read-all, \
         0 violations ({strictly_better} beat the horizon-6 enumeration) in {elapsed:.1?}"
    ))
}

fn impossibility() -> Outcome {
    let fx = fixture("g1c-undominated").map_err(|e| e.to_string())?;
    let g = &fx.game;
    let reference: BTreeSet<Word> = winning_set_upto(g, &fx.strategies["sigma"], 3).into_iter().collect();
    let pairs: Vec<(usize, usize)> = (0..g.target().num_states())
        .flat_map(|q| g.functions().iter().map(move |&f| (q, f)))
        .collect();
    let a_word = g.alphabet().parse_word("a").unwrap();
    let mut win_a = 0;
    for mask in 0u64..1 << pairs.len() {
        let spec = StronglyRegularSpec::new((0..pairs.len()).filter(|i| mask >> i & 1 == 1).map(|i| pairs[i]));
        let a = strongly_regular_automaton(g, &spec).map_err(|e| e.to_string())?;
        let w: BTreeSet<Word> = winning_set_upto(g, &a, 3).into_iter().collect();
        if reference.is_subset(&w) && reference != w {
            return Err(format!("reroutes {:?} strictly dominate the fixture strategy", spec.reroutes));
        }
        win_a += w.contains(&a_word) as usize;
    }
    Ok(format!("{} strongly regular strategies, none strictly dominates; {win_a} win on a", 1u64 << pairs.len()))
}

fn transform() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for seed in 0..TRANSFORM_GAMES {
        let params = GameParams {
            alphabet_size: 1 + (seed % 3) as usize,
            target_states: 1 + (seed % 4) as usize,
            ..GameParams::default()
        };
        let g = random_game(&params, 2000 + seed).map_err(|e| e.to_string())?;
        let pf = to_prefix_free(&g, "$").map_err(|e| e.to_string())?;
        let dollar = pf.alphabet().len() - 1;
        for (&a, rule) in pf.rules() {
            let words = enumerate_upto(&rule.nfa, 8);
            if !is_prefix_free(&rule.nfa).0 || !words_prefix_free(&words) {
                return Err(format!("seed {seed}: rule for {} is not prefix-free", pf.alphabet().name(a)));
            }
        }
        if !deletion_product_agrees(g.target(), pf.target(), dollar) {
            return Err(format!("seed {seed}: transformed target disagrees on the deletion product"));
        }
        for _ in 0..50 {
            let len = rng.gen_range(0..8);
            let w: Word = (0..len).map(|_| rng.gen_range(0..pf.alphabet().len())).collect();
            let deleted: Word = w.iter().copied().filter(|&x| x != dollar).collect();
            if pf.target().accepts(&w) != g.target().accepts(&deleted) {
                return Err(format!("seed {seed}: word {}", pf.alphabet().format_word(&w)));
            }
        }
    }
    Ok(format!("{TRANSFORM_GAMES} games, all rules prefix-free, targets agree modulo $"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("golden winning sets", golden),
        ("oracle equivalence", oracle_equivalence),
        ("losing automaton correctness", losing_nfa_correctness),
        ("polynomial membership smoke test", smoke),
        ("3SAT reduction soundness", sat_reduction),
        ("universality reduction soundness", universality),
        ("online weak dominance", online),
        ("synthesis weak dominance", synthesis),
        ("dominance impossibility", impossibility),
        ("prefix-free transform", transform),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let selected: Vec<(usize, &str, fn() -> Outcome)> = criteria
        .iter()
        .enumerate()
        .filter(|(i, (name, _))| {
            filter.is_empty() || filter.iter().any(|f| name.contains(f.as_str()) || (i + 1).to_string() == *f)
        })
        .map(|(i, &(name, f))| (i + 1, name, f))
        .collect();
    let run = |(i, name, f): (usize, &'static str, fn() -> Outcome)| {
        let start = Instant::now();
        let out = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".to_string()));
        (i, name, out, start.elapsed())
    };
    // The timing criterion runs alone so that other criteria do not skew it.
    let (timed, rest): (Vec<_>, Vec<_>) = selected.into_iter().partition(|&(i, _, _)| i == 4);
    let mut results: Vec<(usize, &str, Outcome, Duration)> = timed.into_iter().map(run).collect();
    results.extend(std::thread::scope(|scope| {
        let handles: Vec<_> = rest.into_iter().map(|c| scope.spawn(move || run(c))).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect::<Vec<_>>()
    }));
    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (i, name, out, elapsed) in &results {
        match out {
            Ok(detail) => println!("criterion {i:>2} PASS {name}: {detail} [{elapsed:.1?}]"),
            Err(reason) => {
                failed += 1;
                println!("criterion {i:>2} FAIL {name}: {reason} [{elapsed:.1?}]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
