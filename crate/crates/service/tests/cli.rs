//! The `star` binary as a user runs it.

use std::io::Write;
use std::net::TcpListener;
use std::process::{Command, Output, Stdio};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures");

fn fixture(name: &str) -> String {
    format!("{FIXTURES}/{name}")
}

fn star(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_star")).args(args).env_remove("STAR_ANNOTATOR_URL").output().unwrap()
}

fn star_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_star"))
        .args(args)
        .env_remove("STAR_ANNOTATOR_URL")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn read_prints_the_model_and_answers() {
    let o = star(&["read", &fixture("phone.star"), "--acceptable"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("+ accepted choice: ,[is_embarrassed(mary)at 20]"));
    assert!(out.ends_with(">>> Finished reading the story!\n"));
}

#[test]
fn read_from_stdin_matches_read_from_file() {
    let from_file = star(&["read", &fixture("phone.star")]);
    let from_stdin = star_stdin(&["read", "-"], include_str!("../../core/fixtures/phone.star"));
    assert_eq!(stdout(&from_file), stdout(&from_stdin));
}

#[test]
fn filters_drop_rows() {
    let out = stdout(&star(&["read", &fixture("phone.star"), "--filter", "changing-only"]));
    assert!(!out.contains("is_person"), "{out}");
    assert!(out.contains("is_ringing(phone1)"));
}

#[test]
fn structured_output_is_json() {
    let o = star(&["read", &fixture("phone.star"), "--format", "structured"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
}

#[test]
fn exit_codes() {
    let o = star(&["read", "/no/such/file.star"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot read"));

    let o = star_stdin(&["read", "-"], "c(01) :: a causes.\n");
    assert_eq!(o.status.code(), Some(3));

    let contradictory = "session(s(0),[],all).\nsession(s(1),[],all).\ns(1) :: a at 1.\ns(1) :: -a at 1.\n";
    let o = star_stdin(&["read", "-"], contradictory);
    assert_eq!(o.status.code(), Some(4));

    let o = star(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    let o = star_stdin(&["nl2star", "-"], "Bob called Mary.");
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn nl2star_converts_stored_annotations() {
    let o = star(&["nl2star", &fixture("phone_annotations.json"), "--trace"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let squash = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
    assert_eq!(squash(&stdout(&o)), squash(include_str!("../../core/fixtures/phone_story.star")));
    let trace = stderr(&o);
    let sentence_lines = trace.lines().filter(|l| l.contains("statement") || l.contains("question")).count();
    assert_eq!(sentence_lines, 10, "{trace}");
}

#[test]
fn graph_commands() {
    let o = star(&["graph", "graph2star", &fixture("caption_rule_graph.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let squash = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
    assert_eq!(squash(&stdout(&o)), squash("c(01) :: pred1(Argument1,Argument2), pred2 causes pred3(Argument3)."));

    let o = star(&["graph", "star2graph", &fixture("phone_knowledge.star"), "--format", "graphml"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("<graphml"));

    let o = star(&["graph", "star2graph", &fixture("phone_knowledge.star")]);
    let graph = stdout(&o);
    let back = star_stdin(&["graph", "graph2star", "-"], &graph);
    assert_eq!(back.status.code(), Some(0));
    assert!(stdout(&back).contains("c(42) :: "), "{}", stdout(&back));
}

#[test]
fn invalid_graph_names_the_problem() {
    let mut graph: serde_json::Value = serde_json::from_str(include_str!("../../core/fixtures/caption_rule_graph.json")).unwrap();
    graph["edges"].as_array_mut().unwrap().push(serde_json::json!({
        "id": "e9", "kind": "head", "source": "n3", "target": "n4",
        "argumentLabel": [{ "kind": "variable", "name": "Other" }]
    }));
    let o = star_stdin(&["graph", "graph2star", "-"], &graph.to_string());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("exactly one head"), "{}", stderr(&o));
}

#[test]
fn serve_reports_a_taken_address() {
    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = taken.local_addr().unwrap().to_string();
    let o = star(&["serve", "--listen", &addr, "--db", ":memory:"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot listen"));
}
