//! Per-session reports, question answers and the raw text output.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::syntax::{Domain, Literal};

use super::argument::{Application, Direction, Top};
use super::ground::{Fact, Grounding, Origin};
use super::model::{ComprehensionModel, Truth};
use super::ReaderOptions;

/// One use of a rule, persistence step or story premise, detached from the
/// grounding it came from so it can be compared across sessions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AppliedRule {
    pub origin: Origin,
    /// Time of the rule body, or of the premise.
    pub time: u32,
    pub backward: bool,
    pub conclusion: Literal,
    pub conclusion_time: u32,
}

impl AppliedRule {
    pub(crate) fn from_application(g: &Grounding, app: Application) -> AppliedRule {
        let concl = app.conclusion(g);
        AppliedRule {
            origin: app.origin(g).clone(),
            time: g.body_time(app.instance),
            backward: matches!(app.direction, Direction::Backward(_)),
            conclusion: g.literal(concl),
            conclusion_time: concl.time,
        }
    }

    pub(crate) fn from_premise(g: &Grounding, fact: Fact, top: Top) -> AppliedRule {
        let statement = match top {
            Top::Premise { statement } => statement,
            Top::Apply(_) => unreachable!("premise attacks come from premise arguments"),
        };
        AppliedRule {
            origin: Origin::Premise { statement },
            time: fact.time,
            backward: false,
            conclusion: g.literal(fact),
            conclusion_time: fact.time,
        }
    }
}

impl fmt::Display for AppliedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = if self.backward { "<=" } else { "=>" };
        write!(f, "{}@{} {arrow} {} at {}", self.origin, self.time, self.conclusion, self.conclusion_time)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accepted,
    Rejected,
    Possible,
}

impl Verdict {
    pub fn symbol(self) -> char {
        match self {
            Verdict::Accepted => '+',
            Verdict::Rejected => '-',
            Verdict::Possible => '?',
        }
    }

    pub fn word(self) -> &'static str {
        match self {
            Verdict::Accepted => "accepted",
            Verdict::Rejected => "rejected",
            Verdict::Possible => "possible",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceVerdict {
    pub literal: Literal,
    pub time: u32,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionAnswer {
    pub question: u32,
    pub choices: Vec<ChoiceVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub session: u32,
    pub horizon: u32,
    /// Statements introduced by this session, in canonical text.
    pub story: Vec<String>,
    pub model: ComprehensionModel,
    pub answers: Vec<QuestionAnswer>,
    pub universal: Vec<AppliedRule>,
    pub acceptable: Vec<AppliedRule>,
    pub retracted: Vec<AppliedRule>,
    pub elaborated: Vec<AppliedRule>,
    /// (attacked, attacking) pairs where the attacker is accepted.
    pub qualified: Vec<(AppliedRule, AppliedRule)>,
    pub warnings: Vec<String>,
    /// Milliseconds per phase.
    pub timings: BTreeMap<String, f64>,
}

pub(crate) fn answer_questions(domain: &Domain, session: u32, model: &ComprehensionModel) -> Vec<QuestionAnswer> {
    let Some(decl) = domain.sessions().iter().find(|s| s.id == session) else {
        return Vec::new();
    };
    decl.questions
        .iter()
        .filter_map(|&id| domain.question(id))
        .map(|q| QuestionAnswer {
            question: q.id,
            choices: q
                .choices
                .iter()
                .map(|c| ChoiceVerdict {
                    literal: c.literal.clone(),
                    time: c.time,
                    verdict: match model.holds(&c.literal, c.time) {
                        Truth::True => Verdict::Accepted,
                        Truth::False => Verdict::Rejected,
                        Truth::Unknown => Verdict::Possible,
                    },
                })
                .collect(),
        })
        .collect()
}

const BAR: &str = "===================================";

fn section<T: fmt::Display>(out: &mut String, title: &str, items: &[T], show: bool) {
    let _ = writeln!(out, ">>> {title} argument...");
    if show {
        for item in items {
            let _ = writeln!(out, "    {item}");
        }
    }
}

/// Raw text output for one session.
pub fn render_report(report: &SessionReport, options: &ReaderOptions) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{BAR}\n>>> Reading story up to scene s({})\n{BAR}", report.session);
    if options.show_story {
        for line in &report.story {
            let _ = writeln!(out, "{line}");
        }
    }
    section(&mut out, "Universal", &report.universal, options.universal);
    section(&mut out, "Acceptable", &report.acceptable, options.acceptable);
    if options.retracted {
        section(&mut out, "Retracted", &report.retracted, true);
    }
    if options.elaborated {
        section(&mut out, "Elaborated", &report.elaborated, true);
    }
    if options.qualified {
        let pairs: Vec<String> = report.qualified.iter().map(|(a, b)| format!("{a} <- {b}")).collect();
        section(&mut out, "Qualified", &pairs, true);
    }
    for w in &report.warnings {
        let _ = writeln!(out, ">>> Warning: {w}");
    }

    out.push_str("\n>>> Comprehension model:\n\n");
    for t in 0..=report.model.horizon {
        let lits = report.model.literals_at(t);
        if lits.is_empty() {
            continue;
        }
        let _ = write!(out, "{t}:");
        for (lit, observed) in lits {
            if observed {
                let _ = write!(out, " < {lit}>");
            } else {
                let _ = write!(out, " {lit}");
            }
        }
        out.push_str("\n\n");
    }

    for answer in &report.answers {
        let _ = writeln!(out, ">>> Answering question q({}):", answer.question);
        for c in &answer.choices {
            let _ = writeln!(
                out,
                "{} {} choice: ,[{}at {}]",
                c.verdict.symbol(),
                c.verdict.word(),
                c.literal,
                c.time
            );
        }
        out.push('\n');
    }

    if options.timings {
        out.push_str(">>> Timings:\n");
        for (phase, ms) in &report.timings {
            let _ = writeln!(out, "{phase}: {ms:.3} ms");
        }
        out.push('\n');
    }
    out
}

/// Raw text output for a whole reading, one block per session.
pub fn render_story(reports: &[SessionReport], options: &ReaderOptions) -> String {
    let mut out: String = reports.iter().map(|r| render_report(r, options)).collect();
    out.push_str(">>> Finished reading the story!\n");
    out
}
