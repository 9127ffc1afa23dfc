//! Session-by-session story comprehension.
//!
//! Each session is read by grounding the background knowledge over the
//! constants seen so far, building every argument from the story premises,
//! lifting rule priorities to attacks and keeping the grounded extension.
//! The conclusions of accepted arguments form the comprehension model.

pub mod argument;
pub mod attack;
pub mod extension;
pub mod ground;
pub mod model;
pub mod report;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{Atom, Domain, RuleKind, Signature};

pub use argument::{build_arguments, Application, ArgId, Argument, ArgumentLimits, ArgumentSet, Direction, Top};
pub use attack::{attacks, AttackEdge, AttackKind, Preferences};
pub use extension::{defends_all, grounded_extension, grounded_structured, is_conflict_free};
pub use ground::{default_horizon, ground, Fact, Grounding, GroundingLimits, Origin, TimedRuleInstance};
pub use model::{filter_model, Classification, ComprehensionModel, ModelFilter, ModelRow, Truth};
pub use report::{render_report, render_story, AppliedRule, ChoiceVerdict, QuestionAnswer, SessionReport, Verdict};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReasonerError {
    #[error("session s({0}) is not declared")]
    UnknownSession(u32),
    #[error("horizon {horizon} is before time-point {needed} mentioned in the story")]
    HorizonTooSmall { horizon: u32, needed: u32 },
    #[error("grounding {rule} brings the program to {instances} timed instances, over the cap of {cap}")]
    GroundingTooLarge { rule: String, instances: u64, cap: u64 },
    #[error("the story states both {literal} and its negation at time {time}")]
    ContradictoryStory { literal: String, time: u32 },
    #[error("accepted arguments disagree on {literal} at time {time}")]
    Inconsistent { literal: String, time: u32 },
}

/// What to compute and print while reading a story.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReaderOptions {
    pub universal: bool,
    pub acceptable: bool,
    pub retracted: bool,
    pub elaborated: bool,
    pub qualified: bool,
    pub timings: bool,
    /// Print each session's story statements before its model.
    pub show_story: bool,
    /// Last time-point of the model; defaults to the latest one mentioned.
    pub horizon: Option<u32>,
    /// Proof-depth cap; defaults to the number of ground instances.
    pub max_depth: Option<u32>,
    pub max_instances: Option<u64>,
    pub max_arguments: Option<usize>,
}

impl ReaderOptions {
    pub fn grounding_limits(&self) -> GroundingLimits {
        let d = GroundingLimits::default();
        GroundingLimits { max_instances: self.max_instances.unwrap_or(d.max_instances), horizon: self.horizon }
    }

    pub fn argument_limits(&self) -> ArgumentLimits {
        let d = ArgumentLimits::default();
        ArgumentLimits {
            max_depth: self.max_depth,
            max_arguments: self.max_arguments.unwrap_or(d.max_arguments),
            ..d
        }
    }
}

/// Phase boundaries reported while a story is read.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ProgressEvent {
    SessionStarted { session: u32, index: usize, total: usize },
    Grounded { session: u32, instances: usize, horizon: u32 },
    ArgumentsBuilt { session: u32, arguments: usize, attacks: usize },
    ExtensionComputed { session: u32, accepted: usize },
    SessionFinished { session: u32, index: usize, total: usize },
}

/// Reads every non-zero session in order and reports on each.
pub fn read_story(
    domain: &Domain,
    options: &ReaderOptions,
    progress: &mut dyn FnMut(ProgressEvent),
) -> Result<Vec<SessionReport>, ReasonerError> {
    let sessions: Vec<u32> = domain.sessions().iter().map(|s| s.id).filter(|&id| id > 0).collect();
    let total = sessions.len();
    let prefs = Preferences::new(domain.priorities());
    let mut reports = Vec::with_capacity(total);
    let mut previous: BTreeSet<AppliedRule> = BTreeSet::new();
    for (i, &session) in sessions.iter().enumerate() {
        progress(ProgressEvent::SessionStarted { session, index: i + 1, total });
        let report = read_session(domain, session, options, &prefs, &previous, progress)?;
        previous = report.acceptable.iter().cloned().collect();
        reports.push(report);
        progress(ProgressEvent::SessionFinished { session, index: i + 1, total });
    }
    Ok(reports)
}

/// Reads the story up to and including `session`, with no previous session
/// to compare against.
pub fn read_up_to(domain: &Domain, session: u32, options: &ReaderOptions) -> Result<SessionReport, ReasonerError> {
    let prefs = Preferences::new(domain.priorities());
    read_session(domain, session, options, &prefs, &BTreeSet::new(), &mut |_| {})
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

fn read_session(
    domain: &Domain,
    session: u32,
    options: &ReaderOptions,
    prefs: &Preferences,
    previous: &BTreeSet<AppliedRule>,
    progress: &mut dyn FnMut(ProgressEvent),
) -> Result<SessionReport, ReasonerError> {
    let mut timings = BTreeMap::new();

    let start = Instant::now();
    let g = ground(domain, session, options.grounding_limits())?;
    timings.insert("grounding".to_string(), elapsed_ms(start));
    progress(ProgressEvent::Grounded { session, instances: g.instance_count(), horizon: g.horizon() });

    let premises: Vec<(Fact, usize)> = g.premises().collect();
    let mut stated: HashMap<(u32, u32), bool> = HashMap::new();
    for &(f, _) in &premises {
        if let Some(&p) = stated.get(&(f.atom, f.time)) {
            if p != f.positive {
                return Err(ReasonerError::ContradictoryStory {
                    literal: g.atom(f.atom).to_string(),
                    time: f.time,
                });
            }
        }
        stated.insert((f.atom, f.time), f.positive);
    }

    let start = Instant::now();
    let args = build_arguments(&g, &premises, options.argument_limits());
    timings.insert("arguments".to_string(), elapsed_ms(start));
    let start = Instant::now();
    let edges = attacks(&args, prefs);
    timings.insert("attacks".to_string(), elapsed_ms(start));
    progress(ProgressEvent::ArgumentsBuilt { session, arguments: args.len(), attacks: edges.len() });

    let start = Instant::now();
    let pairs: Vec<(u32, u32)> = edges.iter().map(|e| (e.attacker, e.target)).collect();
    let subs: Vec<&[u32]> = args.nodes.iter().map(|n| &*n.subs).collect();
    let accepted = grounded_structured(&subs, pairs.iter().copied());
    debug_assert!(is_conflict_free(&accepted, &pairs), "grounded extension is unsound");
    timings.insert("extension".to_string(), elapsed_ms(start));
    progress(ProgressEvent::ExtensionComputed { session, accepted: accepted.len() });

    let start = Instant::now();
    let mut assignment: BTreeMap<(Atom, u32), bool> = BTreeMap::new();
    let mut universal: BTreeSet<AppliedRule> = BTreeSet::new();
    let mut acceptable: BTreeSet<AppliedRule> = BTreeSet::new();
    let mut causal_atoms: BTreeSet<Atom> = BTreeSet::new();
    for arg in args.iter() {
        let is_in = accepted.contains(&arg.id());
        let apps = arg.applications();
        for &app in &apps {
            universal.insert(AppliedRule::from_application(&g, app));
        }
        if !is_in {
            continue;
        }
        let fact = arg.conclusion_fact();
        let key = (g.atom(fact.atom).clone(), fact.time);
        match assignment.get(&key) {
            Some(&p) if p != fact.positive => {
                return Err(ReasonerError::Inconsistent { literal: key.0.to_string(), time: fact.time });
            }
            _ => {
                assignment.insert(key, fact.positive);
            }
        }
        for app in apps {
            acceptable.insert(AppliedRule::from_application(&g, app));
            if app.origin(&g).rule_kind() == Some(RuleKind::Causal) {
                let inst = g.instance(app.instance);
                causal_atoms.extend(inst.body.into_iter().map(|(l, _)| l.atom));
                causal_atoms.insert(inst.head.0.atom);
            }
        }
    }

    let observed: BTreeSet<(Atom, u32)> =
        premises.iter().map(|&(f, _)| (g.atom(f.atom).clone(), f.time)).collect();
    let fluents: BTreeSet<Signature> = domain.fluents().iter().map(|f| f.signature()).collect();
    let constants = &g.constants;
    let classify = |sig: &Signature| {
        if fluents.contains(sig) {
            Classification::Fluent
        } else if constants.contains(sig) {
            Classification::Constant
        } else {
            Classification::Action
        }
    };
    let model = ComprehensionModel::build(g.horizon(), assignment, &observed, classify, &causal_atoms);

    let answers = report::answer_questions(domain, session, &model);

    let mut qualified: BTreeSet<(AppliedRule, AppliedRule)> = BTreeSet::new();
    for e in &edges {
        if !accepted.contains(&e.attacker) {
            continue;
        }
        let attacker = args.get(e.attacker);
        let attacking = match e.attacking {
            Some(app) => AppliedRule::from_application(&g, app),
            None => AppliedRule::from_premise(&g, attacker.conclusion_fact(), attacker.top()),
        };
        qualified.insert((AppliedRule::from_application(&g, e.attacked), attacking));
    }
    timings.insert("model".to_string(), elapsed_ms(start));

    let retracted = previous.difference(&acceptable).cloned().collect();
    let elaborated = acceptable.difference(previous).cloned().collect();
    let story = domain.statements().iter().filter(|s| s.session == session).map(|s| s.to_string()).collect();

    Ok(SessionReport {
        session,
        horizon: g.horizon(),
        story,
        model,
        answers,
        universal: universal.into_iter().collect(),
        acceptable: acceptable.into_iter().collect(),
        retracted,
        elaborated,
        qualified: qualified.into_iter().collect(),
        warnings: args.warnings.clone(),
        timings,
    })
}
