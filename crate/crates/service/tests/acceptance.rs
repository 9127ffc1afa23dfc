//! Acceptance checks. Each criterion prints one PASS or FAIL line with its
//! running time; the run fails if any criterion does.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use star_core::graph::{graph_to_star, import_json, star_to_graph};
use star_core::nl2star::{convert, AnnotatedStory};
use star_core::parser::{format_domain, parse_domain};
use star_core::reasoner::{grounded_extension, read_story, render_story, ReaderOptions, ReasonerError, Truth, Verdict};
use star_core::syntax::{
    Atom, Choice, Domain, DomainParts, FluentDecl, Literal, Polarity, Priority, Question, Rule, RuleBody, RuleKind,
    RuleLabel, SessionDecl, StoryStatement, Term, TimePoint,
};
use star_service::{Service, ServiceConfig};

const PHONE: &str = include_str!("../../core/fixtures/phone.star");
const PHONE_STORY: &str = include_str!("../../core/fixtures/phone_story.star");
const PHONE_KNOWLEDGE: &str = include_str!("../../core/fixtures/phone_knowledge.star");
const ANNOTATIONS: &str = include_str!("../../core/fixtures/phone_annotations.json");
const CAPTION: &str = include_str!("../../core/fixtures/caption_rule_graph.json");

type Check = Result<(), String>;
type Criterion = fn() -> Check;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

fn read(src: &str) -> Result<Vec<star_core::reasoner::SessionReport>, String> {
    let d = parse_domain(src).into_result().map_err(|e| format!("{e}\n{src}"))?;
    read_story(&d, &ReaderOptions::default(), &mut |_| {}).map_err(|e| e.to_string())
}

// 1. The final model row and answer of the phone story.

fn output_figure() -> Check {
    let started = Instant::now();
    let reports = read(PHONE)?;
    let text = render_story(&reports, &ReaderOptions::default());
    let elapsed = started.elapsed();
    let row = text.lines().find(|l| l.starts_with("20: ")).ok_or("no row for time 20")?;
    let required = [
        "-carried_out(favor1)",
        "is_embarrassed(mary)",
        "-is_ringing(phone1)",
        "-do_want(mary,answer(phone1))",
        "has_agreed_to(mary,favor1)",
        "has_asked_for(bob,mary,favor1)",
        "< is_favor(favor1)>",
        "< is_person(bob)>",
        "< is_person(mary)>",
        "< is_phone(phone1)>",
    ];
    for lit in required {
        ensure(row.contains(&format!("{lit} ")) || row.ends_with(lit), || format!("`{lit}` missing from `{row}`"))?;
    }
    let q4 = reports
        .last()
        .and_then(|r| r.answers.iter().find(|a| a.question == 4))
        .ok_or("q(4) not answered in the last session")?;
    ensure(q4.choices[0].verdict == Verdict::Accepted, || "q(4) not accepted".into())?;
    ensure(text.contains("+ accepted choice: ,[is_embarrassed(mary)at 20]"), || "accepted line missing".into())?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))
}

// 2. The annotated phone story converts to its STAR encoding.

fn nl_fixture() -> Check {
    let started = Instant::now();
    let story: AnnotatedStory = serde_json::from_str(ANNOTATIONS).map_err(|e| e.to_string())?;
    let (domain, _) = convert(&story).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let text = format_domain(&domain);
    ensure(squash(&text) == squash(PHONE_STORY), || format!("encoding differs:\n{text}"))?;
    ensure(domain.sessions().len() == 4, || "expected sessions s(0)..s(3)".into())?;
    let typing = domain.statements().iter().filter(|s| s.when == TimePoint::Always).count();
    ensure(typing == 4, || format!("{typing} typing statements"))?;
    let timed: BTreeSet<u32> = domain
        .statements()
        .iter()
        .filter_map(|s| if let TimePoint::At(t) = s.when { Some(t) } else { None })
        .collect();
    ensure(timed == BTreeSet::from([2, 4, 6, 12, 16, 18]), || format!("statement times {timed:?}"))?;
    let asked: BTreeSet<u32> = domain.questions().iter().flat_map(|q| q.choices.iter().map(|c| c.time)).collect();
    ensure(asked == BTreeSet::from([8, 10, 14, 20]), || format!("question times {asked:?}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))
}

// 3. The grounded extension against enumeration of complete extensions.

fn least_complete(n: u32, attacks: &[(u32, u32)]) -> BTreeSet<u32> {
    let attacked_by_set = |set: u32, x: u32| attacks.iter().any(|&(a, b)| b == x && set & (1 << a) != 0);
    let mut least: Option<u32> = None;
    for set in 0u32..(1 << n) {
        if attacks.iter().any(|&(a, b)| set & (1 << a) != 0 && set & (1 << b) != 0) {
            continue;
        }
        let defended = |x: u32| attacks.iter().filter(|&&(_, b)| b == x).all(|&(a, _)| attacked_by_set(set, a));
        if (0..n).all(|x| (set & (1 << x) != 0) == defended(x)) && least.is_none_or(|l| set.count_ones() < l.count_ones())
        {
            least = Some(set);
        }
    }
    let least = least.expect("some complete extension");
    (0..n).filter(|x| least & (1 << x) != 0).collect()
}

fn grounded_oracle() -> Check {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(2024);
    for case in 0..100 {
        let n = rng.gen_range(0..=10u32);
        let density: f64 = rng.gen_range(0.0..0.4);
        let attacks: Vec<(u32, u32)> =
            (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|_| rng.gen_bool(density)).collect();
        let got = grounded_extension(n as usize, attacks.iter().copied());
        let want = least_complete(n, &attacks);
        ensure(got == want, || format!("case {case}: {got:?} != {want:?} for {attacks:?}"))?;
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))
}

// 4. Rules through the graph and back.

fn graph_round_trips() -> Check {
    let original = parse_domain(PHONE_KNOWLEDGE).into_result().map_err(|e| e.to_string())?;
    let back_text = graph_to_star(&star_to_graph(&original)).map_err(|d| format!("{d:?}"))?;
    let back = parse_domain(&back_text).into_result().map_err(|e| e.to_string())?;
    let rules = |d: &Domain| d.rules().iter().map(|r| r.to_string()).collect::<BTreeSet<_>>();
    let prios = |d: &Domain| d.priorities().iter().map(|p| p.to_string()).collect::<BTreeSet<_>>();
    let fluents = |d: &Domain| d.fluents().iter().map(|f| (f.name.clone(), f.arity)).collect::<BTreeSet<_>>();
    ensure(rules(&back) == rules(&original), || "rules changed".into())?;
    ensure(prios(&back) == prios(&original), || "priorities changed".into())?;
    ensure(fluents(&back) == fluents(&original), || "fluents changed".into())?;

    let caption = import_json(CAPTION.as_bytes()).map_err(|e| e.to_string())?;
    let text = graph_to_star(&caption).map_err(|d| format!("{d:?}"))?;
    let want = "c(01) :: pred1(Argument1,Argument2), pred2 causes pred3(Argument3).";
    ensure(squash(&text) == squash(want), || format!("caption graph gave `{text}`"))
}

// 5. Random domains survive format, parse, format.

const NAMES: &[&str] = &["a", "bob", "mary", "phone1", "is_ringing", "call", "x_2", "answer"];
const VARS: &[&str] = &["X", "Y", "P1", "_Z"];

fn random_term(rng: &mut StdRng, vars: bool, depth: u32) -> Term {
    let pick = rng.gen_range(0..10);
    if depth < 2 && pick < 2 {
        let args = (0..rng.gen_range(1..3)).map(|_| random_term(rng, vars, depth + 1)).collect();
        Term::compound(NAMES[rng.gen_range(0..NAMES.len())], args)
    } else if vars && pick < 5 {
        Term::variable(VARS[rng.gen_range(0..VARS.len())])
    } else {
        Term::constant(NAMES[rng.gen_range(0..NAMES.len())])
    }
}

fn random_literal(rng: &mut StdRng, vars: bool) -> Literal {
    let args = (0..rng.gen_range(0..4)).map(|_| random_term(rng, vars, 0)).collect();
    let polarity = if rng.gen_bool(0.5) { Polarity::Positive } else { Polarity::Negative };
    Literal { polarity, atom: Atom::new(NAMES[rng.gen_range(0..NAMES.len())], args) }
}

fn random_parts(rng: &mut StdRng) -> DomainParts {
    let last = rng.gen_range(0..4u32);
    let mut parts = DomainParts::default();
    let questions: Vec<Question> = (1..=rng.gen_range(0..4u32))
        .map(|id| Question {
            id,
            choices: (0..rng.gen_range(1..3))
                .map(|_| Choice { literal: random_literal(rng, false), time: rng.gen_range(0..30) })
                .collect(),
        })
        .collect();
    for s in 0..=last {
        parts.sessions.push(SessionDecl { id: s, questions: questions.iter().map(|q| q.id).filter(|id| id % (last + 1) == s).collect() });
    }
    parts.questions = questions;
    for _ in 0..rng.gen_range(0..8) {
        let session = rng.gen_range(0..=last);
        let when = if session == 0 { TimePoint::Always } else { TimePoint::At(rng.gen_range(0..30)) };
        parts.statements.push(StoryStatement { session, literal: random_literal(rng, false), when });
    }
    let fluents: BTreeSet<(&str, usize)> =
        (0..rng.gen_range(0..4)).map(|_| (NAMES[rng.gen_range(0..NAMES.len())], rng.gen_range(0..4))).collect();
    parts.fluents = fluents.into_iter().map(|(n, a)| FluentDecl { name: n.to_string(), arity: a }).collect();
    let labels: BTreeSet<(bool, u32)> = (0..rng.gen_range(0..6)).map(|_| (rng.gen_bool(0.5), rng.gen_range(1..40))).collect();
    for (causal, index) in labels {
        let kind = if causal { RuleKind::Causal } else { RuleKind::Property };
        let body = (0..rng.gen_range(0..4)).map(|_| random_literal(rng, true)).collect();
        parts.rules.push(Rule { label: RuleLabel { kind, index }, body: RuleBody::from_literals(body), head: random_literal(rng, true) });
    }
    let labels: Vec<RuleLabel> = parts.rules.iter().map(|r| r.label).collect();
    let mut seen = BTreeSet::new();
    if labels.len() >= 2 {
        for _ in 0..rng.gen_range(0..4) {
            let (s, w) = (labels[rng.gen_range(0..labels.len())], labels[rng.gen_range(0..labels.len())]);
            if s != w && !seen.contains(&(w, s)) && seen.insert((s, w)) {
                parts.priorities.push(Priority { stronger: s, weaker: w });
            }
        }
    }
    parts
}

fn parser_round_trip() -> Check {
    let mut rng = StdRng::seed_from_u64(7);
    for case in 0..200 {
        let d = Domain::new(random_parts(&mut rng)).map_err(|e| format!("case {case}: generator made {e:?}"))?;
        let first = format_domain(&d);
        let parsed = parse_domain(&first).into_result().map_err(|e| format!("case {case}: {e}\n{first}"))?;
        let second = format_domain(&parsed);
        ensure(first == second, || format!("case {case}:\n{first}\n---\n{second}"))?;
    }
    Ok(())
}

// 6. Temporal behaviour of the reader.

fn lit(text: &str) -> Literal {
    match text.strip_prefix('-') {
        Some(n) => Literal { polarity: Polarity::Negative, atom: Atom::new(n, vec![]) },
        None => Literal { polarity: Polarity::Positive, atom: Atom::new(text, vec![]) },
    }
}

fn header(horizon: u32) -> String {
    format!("session(s(0),[],all).\nsession(s(1),[q(1)],all).\nq(1) ?? z at {horizon}.\n")
}

fn random_propositional(rng: &mut StdRng) -> String {
    let props = ["a", "b", "c", "d"];
    let signed = |rng: &mut StdRng| format!("{}{}", if rng.gen_bool(0.5) { "" } else { "-" }, props[rng.gen_range(0..4)]);
    let mut s = header(8);
    let fluents: Vec<&str> = props.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    if !fluents.is_empty() {
        s += &format!("fluents([{}]).\n", fluents.join(", "));
    }
    let mut stated = BTreeSet::new();
    for _ in 0..rng.gen_range(0..5) {
        let (p, t) = (props[rng.gen_range(0..4)], rng.gen_range(1..7));
        if stated.insert((p, t)) {
            s += &format!("s(1) :: {}{p} at {t}.\n", if rng.gen_bool(0.5) { "" } else { "-" });
        }
    }
    let mut labels = Vec::new();
    for i in 1..=rng.gen_range(1..6) {
        let body: Vec<String> = (0..rng.gen_range(1..3)).map(|_| signed(rng)).collect();
        let (k, conn) = if rng.gen_bool(0.5) { ('c', "causes") } else { ('p', "implies") };
        s += &format!("{k}({i:02}) :: {} {conn} {}.\n", body.join(", "), signed(rng));
        labels.push(format!("{k}({i:02})"));
    }
    if labels.len() >= 2 && rng.gen_bool(0.5) {
        s += &format!("{} >> {}.\n", labels[0], labels[1]);
    }
    s
}

fn temporal_properties() -> Check {
    let truth = |src: &str, l: &str, t: u32| -> Result<Truth, String> {
        let r = read(src)?;
        Ok(r[0].model.holds(&lit(l), t))
    };
    for t in 1..10 {
        let causal = format!("{}s(1) :: e at {t}.\nc(01) :: e causes f.\n", header(t + 3));
        ensure(truth(&causal, "f", t + 1)? == Truth::True, || format!("causal effect missing at {}", t + 1))?;
        ensure(truth(&causal, "f", t)? == Truth::Unknown, || format!("causal effect early at {t}"))?;
        let property = format!("{}s(1) :: e at {t}.\np(01) :: e implies f.\n", header(t + 3));
        ensure(truth(&property, "f", t)? == Truth::True, || format!("property effect missing at {t}"))?;

        // Story facts win over rule conclusions, whatever the priorities.
        for prio in ["", "c(01) >> c(02).\n"] {
            let src = format!(
                "{}fluents([f]).\ns(1) :: e at {t}.\ns(1) :: -f at {}.\nc(01) :: e causes f.\nc(02) :: e causes g.\n{prio}",
                header(t + 3),
                t + 1
            );
            ensure(truth(&src, "-f", t + 1)? == Truth::True, || format!("premise overridden at {}", t + 1))?;
        }

        // Persistence carries f until the cause of -f takes effect.
        let t2 = t + 3;
        let src = format!("{}fluents([f]).\ns(1) :: f at {t}.\ns(1) :: e at {t2}.\nc(01) :: e causes -f.\n", header(t2 + 3));
        let reports = read(&src)?;
        let model = &reports[0].model;
        for k in t..=t2 {
            ensure(model.holds(&lit("f"), k) == Truth::True, || format!("f lost at {k}"))?;
        }
        for k in t2 + 1..=t2 + 3 {
            ensure(model.holds(&lit("f"), k) == Truth::False, || format!("f not flipped at {k}"))?;
        }
    }

    let mut rng = StdRng::seed_from_u64(11);
    for case in 0..60 {
        let src = random_propositional(&mut rng);
        let d = parse_domain(&src).into_result().map_err(|e| format!("{e}\n{src}"))?;
        match read_story(&d, &ReaderOptions::default(), &mut |_| {}) {
            Ok(reports) => {
                let model = &reports.last().unwrap().model;
                for s in d.statements() {
                    if let TimePoint::At(t) = s.when {
                        ensure(model.holds(&s.literal, t) == Truth::True, || {
                            format!("case {case}: {} at {t} not in the model\n{src}", s.literal)
                        })?;
                    }
                }
            }
            Err(ReasonerError::Inconsistent { literal, time }) => {
                return Err(format!("case {case}: inconsistent model for {literal} at {time}\n{src}"))
            }
            Err(e) => return Err(format!("case {case}: {e}\n{src}")),
        }
    }
    Ok(())
}

// 7. The queued service gives the command line's output and streams
// one `session` event per story session.

fn strip_timings(mut v: Value) -> Value {
    if let Some(items) = v.as_array_mut() {
        for r in items {
            if let Some(o) = r.as_object_mut() {
                o.remove("timings");
            }
        }
    }
    v
}

fn service_equivalence() -> Check {
    let dir = std::env::temp_dir().join(format!("star-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let file = dir.join("phone.star");
    std::fs::write(&file, PHONE).map_err(|e| e.to_string())?;
    let cli_text = Command::new(env!("CARGO_BIN_EXE_star")).arg("read").arg(&file).output().map_err(|e| e.to_string())?;
    let cli_json = Command::new(env!("CARGO_BIN_EXE_star"))
        .args(["read", "--format", "structured"])
        .arg(&file)
        .output()
        .map_err(|e| e.to_string())?;
    let _ = std::fs::remove_dir_all(&dir);
    let cli_text = String::from_utf8(cli_text.stdout).map_err(|e| e.to_string())?;
    let cli_reports: Value = serde_json::from_slice(&cli_json.stdout).map_err(|e| e.to_string())?;

    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let (raw, reports, events) = runtime.block_on(async {
        let config = ServiceConfig { store_path: None, ..Default::default() };
        let mut service = Service::open(&config).map_err(|e| e.to_string())?;
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.map_err(|e| e.to_string())?;
        let base = format!("http://{}", listener.local_addr().map_err(|e| e.to_string())?);
        let app = service.router();
        let server = tokio::spawn(async move { axum::serve(listener, app).await });
        let client = reqwest::Client::new();

        let submitted: Value = client
            .post(format!("{base}/api/story/queue"))
            .json(&json!({ "domain": PHONE }))
            .send()
            .await
            .map_err(|e| e.to_string())?
            .json()
            .await
            .map_err(|e| e.to_string())?;
        let id = submitted["id"].as_str().ok_or("no job id")?.to_string();
        // Subscribe while the job is still queued, then let a worker take it.
        let progress = client.get(format!("{base}/api/story/progress/{id}")).send().await.map_err(|e| e.to_string())?;
        service.start_workers(1);
        let events = tokio::time::timeout(Duration::from_secs(30), progress.text())
            .await
            .map_err(|_| "progress stream did not close".to_string())?
            .map_err(|e| e.to_string())?;
        let result: Value = client
            .get(format!("{base}/api/story/results/{id}"))
            .send()
            .await
            .map_err(|e| e.to_string())?
            .json()
            .await
            .map_err(|e| e.to_string())?;
        server.abort();
        service.drain().await;
        let raw = result["raw"].as_str().ok_or_else(|| format!("no output in {result}"))?.to_string();
        Ok::<_, String>((raw, result["reports"].clone(), events))
    })?;

    ensure(raw == cli_text, || "queued output differs from `star read`".into())?;
    ensure(strip_timings(reports) == strip_timings(cli_reports), || "queued reports differ from `star read --format structured`".into())?;
    let sessions = events.lines().filter(|l| *l == "event: session").count();
    ensure(sessions == 3, || format!("{sessions} session events in\n{events}"))?;
    ensure(events.contains("event: done"), || "stream ended without `done`".into())
}

fn main() {
    let criteria: [(&str, Criterion); 7] = [
        ("phone story output: model at 20 and q(4) accepted, under 5 s", output_figure),
        ("annotated story converts to its encoding, under 1 s", nl_fixture),
        ("grounded extension equals enumeration on 100 frameworks, under 10 s", grounded_oracle),
        ("rules and caption graph survive graph conversion", graph_round_trips),
        ("200 random domains survive format, parse, format", parser_round_trip),
        ("causal +1, property +0, story facts win, persistence yields, consistency", temporal_properties),
        ("queued output equals command-line output; 3 session events", service_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = check();
        let ms = started.elapsed().as_secs_f64() * 1000.0;
        match outcome {
            Ok(()) => println!("PASS {} {name} ({ms:.0} ms)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name} ({ms:.0} ms): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
