//! Grounding of rule schemata and fluent persistence over the story's
//! constants and time-line.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::syntax::{Atom, Domain, Literal, Polarity, RuleKind, RuleLabel, Signature, Term, TimePoint};

use super::ReasonerError;

pub type AtomId = u32;
pub type InstanceId = u32;

/// A ground literal at an integer time-point, interned.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub atom: AtomId,
    pub positive: bool,
    pub time: u32,
}

impl Fact {
    pub fn negated(self) -> Fact {
        Fact { positive: !self.positive, ..self }
    }
}

/// Where a timed instance comes from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    Rule { label: RuleLabel },
    /// Implicit frame rule carrying a fluent's value to the next time-point.
    Persistence { fluent: Signature },
    /// A story statement, by index in the domain's statement list.
    Premise { statement: usize },
}

impl Origin {
    pub fn rule_kind(&self) -> Option<RuleKind> {
        match self {
            Origin::Rule { label } => Some(label.kind),
            _ => None,
        }
    }

    pub fn is_persistence(&self) -> bool {
        matches!(self, Origin::Persistence { .. })
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Rule { label } => write!(f, "{label}"),
            Origin::Persistence { fluent } => write!(f, "persist({fluent})"),
            Origin::Premise { statement } => write!(f, "story#{statement}"),
        }
    }
}

/// A ground rule before it is placed on the time-line.
#[derive(Clone, Debug)]
pub(crate) struct GroundRule {
    pub origin: Origin,
    pub body: Vec<(AtomId, bool)>,
    pub head: (AtomId, bool),
    pub causal_step: bool,
}

/// Public, self-contained form of a timed rule instance.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TimedRuleInstance {
    pub origin: Origin,
    pub body: Vec<(Literal, u32)>,
    pub head: (Literal, u32),
}

impl fmt::Display for TimedRuleInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.body.first().map(|b| b.1).unwrap_or(self.head.1);
        write!(f, "{}@{t}", self.origin)
    }
}

/// Limits applied while grounding.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct GroundingLimits {
    pub max_instances: u64,
    pub horizon: Option<u32>,
}

impl Default for GroundingLimits {
    fn default() -> Self {
        GroundingLimits { max_instances: 1_000_000, horizon: None }
    }
}

/// The ground program for one reading session.
#[derive(Clone, Debug)]
pub struct Grounding {
    pub(crate) atoms: Vec<Atom>,
    atom_ids: HashMap<Atom, AtomId>,
    pub(crate) rules: Vec<GroundRule>,
    /// (ground rule, body time)
    pub(crate) instances: Vec<(u32, u32)>,
    pub(crate) horizon: u32,
    pub(crate) session: u32,
    pub(crate) premises: Vec<(Fact, usize)>,
    pub(crate) fluents: BTreeSet<Signature>,
    pub(crate) constants: BTreeSet<Signature>,
    pub(crate) universe: BTreeSet<String>,
}

impl Grounding {
    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn session(&self) -> u32 {
        self.session
    }

    pub fn universe(&self) -> &BTreeSet<String> {
        &self.universe
    }

    pub fn instance_count(&self) -> usize {
        self.instances.len()
    }

    pub fn atom(&self, id: AtomId) -> &Atom {
        &self.atoms[id as usize]
    }

    pub fn atom_id(&self, atom: &Atom) -> Option<AtomId> {
        self.atom_ids.get(atom).copied()
    }

    pub fn literal(&self, fact: Fact) -> Literal {
        let polarity = if fact.positive { Polarity::Positive } else { Polarity::Negative };
        Literal { polarity, atom: self.atom(fact.atom).clone() }
    }

    pub fn fact(&self, literal: &Literal, time: u32) -> Option<Fact> {
        let atom = self.atom_id(&literal.atom)?;
        Some(Fact { atom, positive: literal.is_positive(), time })
    }

    /// Story premises of the sessions read, each with its statement index.
    pub fn premises(&self) -> impl Iterator<Item = (Fact, usize)> + '_ {
        self.premises.iter().copied()
    }

    pub(crate) fn rule_of(&self, instance: InstanceId) -> &GroundRule {
        &self.rules[self.instances[instance as usize].0 as usize]
    }

    pub(crate) fn body_time(&self, instance: InstanceId) -> u32 {
        self.instances[instance as usize].1
    }

    pub(crate) fn body_facts(&self, instance: InstanceId) -> impl Iterator<Item = Fact> + '_ {
        let t = self.body_time(instance);
        self.rule_of(instance).body.iter().map(move |&(atom, positive)| Fact { atom, positive, time: t })
    }

    pub(crate) fn head_fact(&self, instance: InstanceId) -> Fact {
        let rule = self.rule_of(instance);
        let t = self.body_time(instance) + u32::from(rule.causal_step);
        Fact { atom: rule.head.0, positive: rule.head.1, time: t }
    }

    pub fn instance(&self, id: InstanceId) -> TimedRuleInstance {
        TimedRuleInstance {
            origin: self.rule_of(id).origin.clone(),
            body: self.body_facts(id).map(|f| (self.literal(f), f.time)).collect(),
            head: {
                let h = self.head_fact(id);
                (self.literal(h), h.time)
            },
        }
    }

    pub fn instances(&self) -> impl Iterator<Item = TimedRuleInstance> + '_ {
        (0..self.instances.len() as InstanceId).map(|i| self.instance(i))
    }

    fn intern(&mut self, atom: Atom) -> AtomId {
        if let Some(&id) = self.atom_ids.get(&atom) {
            return id;
        }
        let id = self.atoms.len() as AtomId;
        self.atoms.push(atom.clone());
        self.atom_ids.insert(atom, id);
        id
    }
}

/// Largest time-point mentioned by statements and questions of sessions up
/// to and including `up_to`.
pub fn default_horizon(domain: &Domain, up_to: u32) -> u32 {
    let stmt_max = domain
        .statements()
        .iter()
        .filter(|s| s.session <= up_to)
        .filter_map(|s| match s.when {
            TimePoint::At(t) => Some(t),
            TimePoint::Always => None,
        })
        .max();
    let question_max = domain
        .sessions()
        .iter()
        .filter(|s| s.id <= up_to)
        .flat_map(|s| s.questions.iter())
        .filter_map(|q| domain.question(*q))
        .flat_map(|q| q.choices.iter().map(|c| c.time))
        .max();
    stmt_max.max(question_max).unwrap_or(0)
}

fn max_mentioned_time(domain: &Domain) -> u32 {
    let s = domain.statements().iter().filter_map(|s| match s.when {
        TimePoint::At(t) => Some(t),
        TimePoint::Always => None,
    });
    let q = domain.questions().iter().flat_map(|q| q.choices.iter().map(|c| c.time));
    s.chain(q).max().unwrap_or(0)
}

/// Instantiates every rule over the Herbrand universe of the statements read
/// so far, on every time-point of the horizon, and adds persistence instances
/// for each ground fluent atom.
pub fn ground(domain: &Domain, up_to: u32, limits: GroundingLimits) -> Result<Grounding, ReasonerError> {
    if !domain.sessions().iter().any(|s| s.id == up_to) {
        return Err(ReasonerError::UnknownSession(up_to));
    }
    let horizon = match limits.horizon {
        Some(h) => {
            let needed = max_mentioned_time(domain);
            if h < needed {
                return Err(ReasonerError::HorizonTooSmall { horizon: h, needed });
            }
            h
        }
        None => default_horizon(domain, up_to),
    };

    let mut g = Grounding {
        atoms: Vec::new(),
        atom_ids: HashMap::new(),
        rules: Vec::new(),
        instances: Vec::new(),
        horizon,
        session: up_to,
        premises: Vec::new(),
        fluents: domain.fluents().iter().map(|f| f.signature()).collect(),
        constants: BTreeSet::new(),
        universe: BTreeSet::new(),
    };

    let read: Vec<(usize, &crate::syntax::StoryStatement)> =
        domain.statements().iter().enumerate().filter(|(_, s)| s.session <= up_to).collect();
    for (_, st) in &read {
        st.literal.atom.args.iter().for_each(|a| a.collect_constants(&mut g.universe));
        if st.when == TimePoint::Always {
            g.constants.insert(st.literal.signature());
        }
    }

    for (idx, st) in &read {
        let atom = g.intern(st.literal.atom.clone());
        let positive = st.literal.is_positive();
        match st.when {
            TimePoint::Always => {
                for t in 0..=horizon {
                    g.premises.push((Fact { atom, positive, time: t }, *idx));
                }
            }
            TimePoint::At(t) => g.premises.push((Fact { atom, positive, time: t }, *idx)),
        }
    }

    let universe: Vec<Term> = g.universe.iter().map(|c| Term::Constant { name: c.clone() }).collect();
    let mut budget: u64 = 0;

    for rule in domain.rules() {
        let (body, head) = rename_anonymous(rule.body.literals(), &rule.head);
        let vars = {
            let mut out = Vec::new();
            for lit in body.iter().chain(std::iter::once(&head)) {
                lit.atom.args.iter().for_each(|a| a.collect_variables(&mut out));
            }
            out
        };
        let causal = rule.label.kind == RuleKind::Causal;
        let steps = if causal { u64::from(horizon) } else { u64::from(horizon) + 1 };
        let combos = (universe.len() as u64).checked_pow(vars.len() as u32).unwrap_or(u64::MAX);
        budget = budget.saturating_add(combos.saturating_mul(steps));
        if budget > limits.max_instances {
            return Err(ReasonerError::GroundingTooLarge {
                rule: rule.label.to_string(),
                instances: budget,
                cap: limits.max_instances,
            });
        }
        if steps == 0 || (combos == 0 && !vars.is_empty()) {
            continue;
        }

        let mut odometer = vec![0usize; vars.len()];
        loop {
            let binding: HashMap<String, Term> =
                vars.iter().cloned().zip(odometer.iter().map(|&i| universe[i].clone())).collect();
            let gbody: Vec<(AtomId, bool)> =
                body.iter().map(|l| (g.intern(l.atom.substitute(&binding)), l.is_positive())).collect();
            let ghead = (g.intern(head.atom.substitute(&binding)), head.is_positive());
            let rid = g.rules.len() as u32;
            g.rules.push(GroundRule {
                origin: Origin::Rule { label: rule.label },
                body: gbody,
                head: ghead,
                causal_step: causal,
            });
            for t in 0..steps as u32 {
                g.instances.push((rid, t));
            }
            if !advance(&mut odometer, universe.len()) {
                break;
            }
        }
    }

    // Persistence covers every ground fluent atom present in the program.
    let fluent_atoms: Vec<AtomId> = (0..g.atoms.len() as AtomId)
        .filter(|&id| g.fluents.contains(&g.atoms[id as usize].signature()))
        .collect();
    let persist = (fluent_atoms.len() as u64) * 2 * u64::from(horizon);
    budget = budget.saturating_add(persist);
    if budget > limits.max_instances {
        return Err(ReasonerError::GroundingTooLarge {
            rule: "persistence".into(),
            instances: budget,
            cap: limits.max_instances,
        });
    }
    for atom in fluent_atoms {
        let fluent = g.atoms[atom as usize].signature();
        for positive in [true, false] {
            let rid = g.rules.len() as u32;
            g.rules.push(GroundRule {
                origin: Origin::Persistence { fluent: fluent.clone() },
                body: vec![(atom, positive)],
                head: (atom, positive),
                causal_step: true,
            });
            for t in 0..horizon {
                g.instances.push((rid, t));
            }
        }
    }

    Ok(g)
}

fn advance(odometer: &mut [usize], base: usize) -> bool {
    for digit in odometer.iter_mut().rev() {
        *digit += 1;
        if *digit < base {
            return true;
        }
        *digit = 0;
    }
    false
}

/// Gives every `_` in a rule its own variable name.
fn rename_anonymous(body: &[Literal], head: &Literal) -> (Vec<Literal>, Literal) {
    let mut counter = 0;
    let mut rename = |lit: &Literal| -> Literal {
        fn walk(t: &Term, counter: &mut usize) -> Term {
            match t {
                Term::Variable { name } if name == "_" => {
                    *counter += 1;
                    Term::Variable { name: format!("_Anon{counter}") }
                }
                Term::Compound { functor, args } => Term::Compound {
                    functor: functor.clone(),
                    args: args.iter().map(|a| walk(a, counter)).collect(),
                },
                other => other.clone(),
            }
        }
        Literal {
            polarity: lit.polarity,
            atom: Atom { name: lit.atom.name.clone(), args: lit.atom.args.iter().map(|a| walk(a, &mut counter)).collect() },
        }
    };
    let body = body.iter().map(&mut rename).collect();
    let head = rename(head);
    (body, head)
}
