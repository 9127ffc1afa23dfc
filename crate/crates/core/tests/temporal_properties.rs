use proptest::prelude::*;

use star_core::parser::parse_domain;
use star_core::reasoner::{read_story, ReaderOptions, ReasonerError, SessionReport, Truth};
use star_core::syntax::{Atom, Literal, Polarity};

fn read(src: &str) -> Result<Vec<SessionReport>, ReasonerError> {
    let d = parse_domain(src).into_result().unwrap_or_else(|e| panic!("{e}\n{src}"));
    read_story(&d, &ReaderOptions::default(), &mut |_| {})
}

fn lit(text: &str) -> Literal {
    let (polarity, name) = match text.strip_prefix('-') {
        Some(n) => (Polarity::Negative, n),
        None => (Polarity::Positive, text),
    };
    Literal { polarity, atom: Atom::new(name, vec![]) }
}

fn truth(r: &SessionReport, l: &str, t: u32) -> Truth {
    r.model.holds(&lit(l), t)
}

fn header(horizon: u32) -> String {
    // A question at the horizon fixes the last time-point of the model.
    format!("session(s(0),[],all).\nsession(s(1),[q(1)],all).\nq(1) ?? z at {horizon}.\n")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn causal_effects_follow_by_one_step(t in 1u32..12, extra in 1u32..5) {
        let src = format!("{}s(1) :: e at {t}.\nc(01) :: e causes f.\n", header(t + extra));
        let r = &read(&src).unwrap()[0];
        prop_assert_eq!(truth(r, "f", t + 1), Truth::True);
        prop_assert_eq!(truth(r, "f", t), Truth::Unknown);
    }

    #[test]
    fn properties_hold_at_the_same_time(t in 1u32..12, extra in 1u32..5) {
        let src = format!("{}s(1) :: e at {t}.\np(01) :: e implies f.\n", header(t + extra));
        let r = &read(&src).unwrap()[0];
        prop_assert_eq!(truth(r, "f", t), Truth::True);
        // f is not a declared fluent, so nothing carries it forward
        prop_assert_eq!(truth(r, "f", t + 1), Truth::Unknown);
    }

    #[test]
    fn story_facts_beat_rules(t in 1u32..12, strong in any::<bool>()) {
        // The rule predicts f at t+1; the story says -f then.
        let prio = if strong { "c(01) >> c(02).\n" } else { "" };
        let src = format!(
            "{}fluents([f]).\ns(1) :: e at {t}.\ns(1) :: -f at {}.\nc(01) :: e causes f.\nc(02) :: e causes g.\n{prio}",
            header(t + 3),
            t + 1
        );
        let r = &read(&src).unwrap()[0];
        prop_assert_eq!(truth(r, "-f", t + 1), Truth::True);
        prop_assert!(r.model.is_observed(&lit("f").atom, t + 1));
    }

    #[test]
    fn persistence_yields_to_a_later_cause(t1 in 1u32..8, gap in 1u32..6, extra in 1u32..5) {
        let t2 = t1 + gap;
        let horizon = t2 + 1 + extra;
        let src = format!(
            "{}fluents([f]).\ns(1) :: f at {t1}.\ns(1) :: e at {t2}.\nc(01) :: e causes -f.\n",
            header(horizon)
        );
        let r = &read(&src).unwrap()[0];
        for t in t1..=t2 {
            prop_assert_eq!(truth(r, "f", t), Truth::True, "t={}", t);
        }
        for t in (t2 + 1)..=horizon {
            prop_assert_eq!(truth(r, "f", t), Truth::False, "t={}", t);
        }
    }

    #[test]
    fn accepted_model_is_consistent(domain in random_domain()) {
        match read(&domain) {
            Ok(reports) => {
                let r = reports.last().unwrap();
                for row in &r.model.rows {
                    for (t, v) in row.values.iter().enumerate() {
                        if row.observed[t] {
                            prop_assert_ne!(*v, Truth::Unknown);
                        }
                    }
                }
            }
            Err(ReasonerError::Inconsistent { literal, time }) => {
                return Err(TestCaseError::fail(format!("{literal} at {time} in\n{domain}")));
            }
            Err(e) => return Err(TestCaseError::fail(format!("{e} in\n{domain}"))),
        }
    }

    #[test]
    fn observations_are_always_in_the_model(domain in random_domain()) {
        let d = parse_domain(&domain).into_result().unwrap();
        let reports = read_story(&d, &ReaderOptions::default(), &mut |_| {}).unwrap();
        let r = reports.last().unwrap();
        for s in d.statements() {
            if let star_core::syntax::TimePoint::At(t) = s.when {
                prop_assert_eq!(r.model.holds(&s.literal, t), Truth::True, "{} at {}", s.literal, t);
            }
        }
    }
}

const PROPS: &[&str] = &["a", "b", "c", "d"];

fn signed() -> impl Strategy<Value = String> {
    (any::<bool>(), prop::sample::select(PROPS)).prop_map(|(pos, p)| if pos { p.to_string() } else { format!("-{p}") })
}

/// Propositional domains over a few fluents and actions, with a story that
/// never states both polarities of an atom at one time-point.
fn random_domain() -> impl Strategy<Value = String> {
    let rules = prop::collection::vec((any::<bool>(), prop::collection::vec(signed(), 1..3), signed()), 1..6);
    let obs = prop::collection::btree_map((prop::sample::select(PROPS), 1u32..7), any::<bool>(), 0..5);
    let fluents = prop::collection::btree_set(prop::sample::select(PROPS), 0..4);
    let prios = prop::collection::vec((0usize..6, 0usize..6), 0..3);
    (rules, obs, fluents, prios).prop_map(|(rules, obs, fluents, prios)| {
        let mut s = header(8);
        if !fluents.is_empty() {
            s.push_str(&format!("fluents([{}]).\n", fluents.into_iter().collect::<Vec<_>>().join(", ")));
        }
        for ((p, t), pos) in obs {
            s.push_str(&format!("s(1) :: {}{p} at {t}.\n", if pos { "" } else { "-" }));
        }
        let mut labels = Vec::new();
        for (i, (causal, body, head)) in rules.into_iter().enumerate() {
            let (k, conn) = if causal { ('c', "causes") } else { ('p', "implies") };
            let label = format!("{k}({:02})", i + 1);
            s.push_str(&format!("{label} :: {} {conn} {head}.\n", body.join(", ")));
            labels.push(label);
        }
        let mut seen = std::collections::BTreeSet::new();
        for (a, b) in prios {
            if a < labels.len() && b < labels.len() && a != b && !seen.contains(&(b, a)) && seen.insert((a, b)) {
                s.push_str(&format!("{} >> {}.\n", labels[a], labels[b]));
            }
        }
        s
    })
}
