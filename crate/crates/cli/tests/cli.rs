use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use cfgame_automata::{words_upto, AutomatonSpec};
use cfgame_core::analysis::{is_dominated, is_winning, losing_nfa};
use cfgame_core::game::{classify, load_game, Game};
use cfgame_core::online::{prune_detailed, OnlineInstance};
use cfgame_core::play::StrategyAutomaton;
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn verdict(&self) -> &str {
        self.stdout.lines().next().unwrap_or("")
    }

    /// JSON details printed after the verdict line.
    fn details(&self) -> Value {
        serde_json::from_str(self.stdout.lines().last().expect("details line")).expect("details are JSON")
    }
}

fn cfgame_with_input(args: &[&str], input: &str) -> Run {
    let mut child = Command::new(env!("CARGO_BIN_EXE_cfgame"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn cfgame(args: &[&str]) -> Run {
    cfgame_with_input(args, "")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn fixture_dir(name: &str) -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join(name);
    let r = cfgame(&["generate", "fixture", name, "--out", p(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    (dir, out)
}

fn load(dir: &Path) -> Game {
    load_game(&fs::read_to_string(dir.join("game.json")).unwrap()).unwrap()
}

fn strategy(g: &Game, path: &Path) -> StrategyAutomaton {
    let spec: AutomatonSpec = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    StrategyAutomaton::from_spec(g, &spec).unwrap()
}

fn error_object(r: &Run) -> Value {
    let line = r.stderr.lines().last().expect("error line");
    let v: Value = serde_json::from_str(line).expect("error is JSON");
    assert_eq!(v["error"]["exit"], r.code);
    v
}

#[test]
fn g2c_strategy_wins_on_cbc_and_not_on_cb() {
    let (_tmp, dir) = fixture_dir("g2c-undominated");
    let game = dir.join("game.json");
    let a = dir.join("A.json");
    let r = cfgame(&["is-winning", p(&game), p(&a), "cbc"]);
    assert_eq!(r.code, 0);
    assert!(r.verdict().starts_with("win"));
    assert_eq!(r.details()["win"], true);
    let r = cfgame(&["is-winning", p(&game), p(&a), "cb"]);
    assert_eq!(r.code, 1);
    assert!(r.verdict().starts_with("not win"));
}

#[test]
fn comparing_a_strategy_with_itself() {
    let (_tmp, dir) = fixture_dir("g2c-undominated");
    let a = dir.join("A.json");
    let r = cfgame(&["compare", p(&dir.join("game.json")), p(&a), p(&a)]);
    assert_eq!(r.code, 0);
    assert_eq!(r.verdict(), "A ⊆ A");
}

#[test]
fn is_winning_matches_library_on_short_words() {
    let (_tmp, dir) = fixture_dir("g2c-undominated");
    let g = load(&dir);
    let a = strategy(&g, &dir.join("A.json"));
    for w in words_upto(g.alphabet().len(), 3) {
        let text = g.alphabet().format_word(&w);
        let r = cfgame(&["--json", "is-winning", p(&dir.join("game.json")), p(&dir.join("A.json")), &text]);
        let win = is_winning(&g, &a, &w);
        assert_eq!(r.details()["win"], win, "{text}");
        assert_eq!(r.code, if win { 0 } else { 1 }, "{text}");
    }
}

#[test]
fn compare_witnesses_match_library() {
    let (_tmp, dir) = fixture_dir("sandbox");
    let g = load(&dir);
    let read = dir.join("read-all.json");
    let call = dir.join("call-first.json");
    let r = cfgame(&["compare", p(&dir.join("game.json")), p(&read), p(&call)]);
    let d = r.details();
    let (ab, wab) = is_dominated(&g, &strategy(&g, &read), &strategy(&g, &call));
    let (ba, wba) = is_dominated(&g, &strategy(&g, &call), &strategy(&g, &read));
    assert_eq!(d["a_subset_b"], ab);
    assert_eq!(d["b_subset_a"], ba);
    let fmt = |w: Option<Vec<usize>>| w.map_or(Value::Null, |w| Value::from(g.alphabet().format_word(&w)));
    assert_eq!(d["witness_a_not_b"], fmt(wab));
    assert_eq!(d["witness_b_not_a"], fmt(wba));
    assert_eq!(r.code, if ab { 0 } else { 1 });
    if !ab && !ba {
        assert_eq!(r.verdict(), "read-all and call-first are incomparable");
    }
}

#[test]
fn classify_and_losing_nfa_match_library() {
    let (_tmp, dir) = fixture_dir("g1c-undominated");
    let g = load(&dir);
    let r = cfgame(&["classify", p(&dir.join("game.json"))]);
    assert_eq!(r.details(), serde_json::to_value(classify(&g)).unwrap());
    let sigma = dir.join("sigma.json");
    let dot = dir.join("losing.dot");
    let r = cfgame(&["losing-nfa", p(&dir.join("game.json")), p(&sigma), "--dot", p(&dot)]);
    assert_eq!(r.code, 0);
    let l = losing_nfa(&g, &strategy(&g, &sigma));
    assert_eq!(r.details()["states"], l.nfa.num_states());
    assert_eq!(r.details()["transitions"], l.nfa.num_transitions());
    assert!(fs::read_to_string(dot).unwrap().starts_with("digraph"));
}

#[test]
fn online_prune_matches_library() {
    let tmp = TempDir::new().unwrap();
    let file = tmp.path().join("nfa.json");
    fs::write(
        &file,
        r#"{"alphabet":["a","b"],"states":3,"initial":0,"accepting":[1],
            "transitions":[[0,"a",1],[0,"a",2],[0,"b",0],[1,"a",1],[1,"b",1],[2,"a",0],[2,"b",2]],
            "nondeterministic":true}"#,
    )
    .unwrap();
    let r = cfgame(&["online-prune", p(&file), "--diagnose-bounded", "3"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let spec: AutomatonSpec = serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
    let alphabet = spec.declared_alphabet().unwrap().unwrap();
    let inst = OnlineInstance::new(spec.to_nfa(&alphabet).unwrap()).unwrap();
    let lib = prune_detailed(&inst);
    let d = r.details();
    assert_eq!(d["strategy"], serde_json::to_value(AutomatonSpec::from_dfa(&lib.dfa)).unwrap());
    assert_eq!(d["transitions_after"], lib.pruned.num_transitions());
    assert_eq!(d["diagnostic"]["bound"], 3);
}

#[test]
fn outputs_are_deterministic() {
    let (_tmp, dir) = fixture_dir("g2c-undominated");
    let (game, a) = (dir.join("game.json"), dir.join("A.json"));
    let args = ["compare", p(&game), p(&a), p(&a)];
    let first = cfgame(&args);
    let second = cfgame(&args);
    assert_eq!((first.code, &first.stdout), (second.code, &second.stdout));
    let tmp = TempDir::new().unwrap();
    let runs: Vec<String> = (0..2)
        .map(|i| {
            let out = tmp.path().join(format!("r{i}"));
            let r = cfgame(&["generate", "random", "--seed", "11", "--strategies", "2", "--out", p(&out)]);
            assert_eq!(r.code, 0);
            fs::read_to_string(out.join("game.json")).unwrap() + &fs::read_to_string(out.join("strategy1.json")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn synthesis_refuses_games_that_are_not_prefix_free() {
    let tmp = TempDir::new().unwrap();
    let game = tmp.path().join("g.json");
    fs::write(
        &game,
        r#"{"alphabet":["a","b"],"rules":{"a":"b+bb"},
            "target":{"states":3,"initial":0,"accepting":[2],
            "transitions":[[0,"a",1],[0,"b",1],[1,"a",2],[1,"b",2],[2,"a",2],[2,"b",2]]}}"#,
    )
    .unwrap();
    let out = tmp.path().join("s.json");
    let r = cfgame(&["synthesize", p(&game), "--out", p(&out)]);
    assert_eq!(r.code, 2);
    let e = error_object(&r);
    assert!(e["error"]["message"].as_str().unwrap().contains("transform --prefix-free"));

    let pf = tmp.path().join("pf.json");
    assert_eq!(cfgame(&["transform", "--prefix-free", "--end-symbol", "$", p(&game), "--out", p(&pf)]).code, 0);
    let r = cfgame(&["synthesize", p(&pf), "--out", p(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let g = load_game(&fs::read_to_string(&pf).unwrap()).unwrap();
    assert!(classify(&g).prefix_free);
    let s = strategy(&g, &out);
    assert_eq!(r.details()["strategy_states"], s.num_states());
}

#[test]
fn exceeded_budget_exits_with_three() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("sat");
    let r = cfgame(&["generate", "3sat", "--clauses", "1,2,2;-1,-2,-2", "--out", p(&out)]);
    assert_eq!(r.code, 0);
    assert_eq!(r.details()["satisfiable"], true);
    let word = fs::read_to_string(out.join("word.txt")).unwrap();
    let game = out.join("game.json");
    let r = cfgame(&["exists-winning", p(&game), word.trim(), "--mode", "exhaustive", "--budget", "10"]);
    assert_eq!(r.code, 3);
    assert_eq!(error_object(&r)["error"]["kind"], "budget");
    let r = cfgame(&["is-winning", p(&game), p(&out.join("strategy.json")), word.trim()]);
    assert_eq!(r.code, 0);
    let r = cfgame(&["exists-winning", p(&game), word.trim()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.details()["exists"], true);
}

#[test]
fn usage_and_input_errors_exit_with_two() {
    let r = cfgame(&["frobnicate"]);
    assert_eq!(r.code, 2);
    assert_eq!(error_object(&r)["error"]["kind"], "usage");
    let r = cfgame(&["classify", "/nonexistent/game.json"]);
    assert_eq!(r.code, 2);
    assert_eq!(error_object(&r)["error"]["kind"], "input");
    let (_tmp, dir) = fixture_dir("sandbox");
    let r = cfgame(&["is-winning", p(&dir.join("game.json")), p(&dir.join("read-all.json")), "xyz"]);
    assert_eq!(r.code, 2);
}

#[test]
fn plays_report_outcome_and_configurations() {
    let (_tmp, dir) = fixture_dir("sandbox");
    let game = dir.join("game.json");
    let call = dir.join("call-first.json");
    let r = cfgame(&["play", p(&game), "--strategy", p(&call), "--word", "ac"]);
    assert_eq!(r.code, 0);
    let d = r.details();
    assert_eq!(d["final_string"], "bc");
    let configs = d["configurations"].as_array().unwrap();
    assert_eq!(configs.first().unwrap()["remaining"], "ac");
    assert_eq!(configs.last().unwrap()["remaining"], "ε");
    let r = cfgame(&["play", p(&game), "--strategy", p(&call), "--word", "ab"]);
    assert_eq!(r.code, 1);
}

#[test]
fn interactive_play_reprompts_invalid_replies() {
    let (_tmp, dir) = fixture_dir("sandbox");
    let game = dir.join("game.json");
    let call = dir.join("call-first.json");
    let r = cfgame_with_input(&["--json", "play", p(&game), "--strategy", p(&call), "--interactive"], "ac\nbb\nb\n");
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stderr.contains("remaining ac"));
    assert!(r.stderr.contains("bb is not a replacement of a"));
    assert_eq!(r.details()["final_string"], "bc");
}

#[test]
fn export_writes_dot_and_json() {
    let (_tmp, dir) = fixture_dir("g2c-undominated");
    let g = load(&dir);
    let dot = dir.join("t.dot");
    let json = dir.join("t.json");
    let r = cfgame(&["export", p(&dir.join("game.json")), "--dot", p(&dot), "--json-out", p(&json)]);
    assert_eq!(r.code, 0);
    assert!(fs::read_to_string(dot).unwrap().starts_with("digraph"));
    let spec: AutomatonSpec = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(spec, AutomatonSpec::from_dfa(g.target()));
}

#[test]
fn universality_instances_load() {
    let tmp = TempDir::new().unwrap();
    let nfa = tmp.path().join("n.json");
    fs::write(
        &nfa,
        r#"{"alphabet":["0","1"],"states":2,"initial":0,"accepting":[0],
            "transitions":[[0,"0",0],[0,"1",1],[1,"0",0],[1,"1",1]],"nondeterministic":true}"#,
    )
    .unwrap();
    let out = tmp.path().join("u");
    let r = cfgame(&["generate", "universality", "--nfa", p(&nfa), "--out", p(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.details()["universal"], false);
    let g = load(&out);
    let (dominated, _) = is_dominated(&g, &strategy(&g, &out.join("a2.json")), &strategy(&g, &out.join("a1.json")));
    let r = cfgame(&["compare", p(&out.join("game.json")), p(&out.join("a2.json")), p(&out.join("a1.json"))]);
    assert_eq!(r.details()["a_subset_b"], dominated);
    assert!(!dominated);
}
