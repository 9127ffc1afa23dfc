//! Lifting rule priorities to an attack relation between arguments.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::syntax::{Priority, RuleKind, RuleLabel};

use super::argument::{Application, ArgId, ArgumentSet, Direction, Top};
use super::ground::{Fact, Grounding, Origin};

/// Relative strength of rule applications.
///
/// Explicit `>>` pairs are taken as declared, without transitive closure.
/// Persistence is weaker than any causal rule. Everything else is
/// incomparable, so conflicting unranked rules attack each other.
#[derive(Clone, Debug, Default)]
pub struct Preferences {
    stronger_than: HashSet<(RuleLabel, RuleLabel)>,
}

impl Preferences {
    pub fn new(priorities: &[Priority]) -> Preferences {
        Preferences { stronger_than: priorities.iter().map(|p| (p.stronger, p.weaker)).collect() }
    }

    /// True when `a` is strictly less preferred than `b`.
    pub fn less_preferred(&self, a: &Origin, b: &Origin) -> bool {
        match (a, b) {
            (Origin::Rule { label: la }, Origin::Rule { label: lb }) => self.stronger_than.contains(&(*lb, *la)),
            (Origin::Persistence { .. }, Origin::Rule { label }) => label.kind == RuleKind::Causal,
            _ => false,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    /// Conflicting conclusions.
    Rebuttal,
    /// A story premise contradicting a conclusion of the target.
    Premise,
    /// A causal conclusion at `t+1` that explains away a backward
    /// persistence step from `t+1` to `t`.
    CausalUndercut,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AttackEdge {
    pub attacker: ArgId,
    pub target: ArgId,
    /// Top application of the attacker; `None` for a premise.
    pub attacking: Option<Application>,
    /// The application inside the target that is attacked.
    pub attacked: Application,
    pub kind: AttackKind,
}

/// Computes the direct attacks between the arguments of `args`: those
/// hitting the target's own top application. An attack on a sub-argument
/// also defeats every argument built on it; [`grounded_structured`] takes
/// care of that, so those edges are never materialised.
///
/// [`grounded_structured`]: super::extension::grounded_structured
pub fn attacks(args: &ArgumentSet<'_>, prefs: &Preferences) -> Vec<AttackEdge> {
    let g: &Grounding = args.grounding;

    let mut concluding: HashMap<Fact, Vec<(ArgId, Application)>> = HashMap::new();
    let mut backward_persistence: HashMap<Fact, Vec<(ArgId, Application)>> = HashMap::new();
    for (id, node) in args.nodes.iter().enumerate() {
        let Top::Apply(app) = node.top else { continue };
        let fact = node.conclusion;
        concluding.entry(fact).or_default().push((id as ArgId, app));
        if let Direction::Backward(_) = app.direction {
            if app.origin(g).is_persistence() {
                // The persistence instance runs from `fact` to the step
                // after; backward use infers `fact` from that later value.
                let later = Fact { time: fact.time + 1, ..fact };
                backward_persistence.entry(later).or_default().push((id as ArgId, app));
            }
        }
    }

    let mut edges = Vec::new();
    for (id, node) in args.nodes.iter().enumerate() {
        let attacker = id as ArgId;
        let contrary = node.conclusion.negated();
        match node.top {
            Top::Premise { .. } => {
                for &(target, attacked) in concluding.get(&contrary).into_iter().flatten() {
                    edges.push(AttackEdge { attacker, target, attacking: None, attacked, kind: AttackKind::Premise });
                }
            }
            Top::Apply(app) => {
                let origin = app.origin(g);
                for &(target, attacked) in concluding.get(&contrary).into_iter().flatten() {
                    if !prefs.less_preferred(origin, attacked.origin(g)) {
                        edges.push(AttackEdge {
                            attacker,
                            target,
                            attacking: Some(app),
                            attacked,
                            kind: AttackKind::Rebuttal,
                        });
                    }
                }
                let causal_forward =
                    app.direction == Direction::Forward && origin.rule_kind() == Some(RuleKind::Causal);
                if causal_forward {
                    for &(target, attacked) in backward_persistence.get(&node.conclusion).into_iter().flatten() {
                        edges.push(AttackEdge {
                            attacker,
                            target,
                            attacking: Some(app),
                            attacked,
                            kind: AttackKind::CausalUndercut,
                        });
                    }
                }
            }
        }
    }
    edges
}
