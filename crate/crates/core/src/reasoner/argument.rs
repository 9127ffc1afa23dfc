//! Argument construction: proof trees over timed rule instances, rooted in
//! story premises, built by forward (modus ponens) and backward (modus
//! tollens) application.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use serde::Serialize;

use super::ground::{Fact, Grounding, InstanceId, Origin};

pub type ArgId = u32;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    /// Contrapositive use: concludes the negation of the body literal at
    /// this position from the negated head and the remaining body literals.
    Backward(u8),
}

/// One use of a timed rule instance in a proof.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Application {
    pub instance: InstanceId,
    pub direction: Direction,
}

impl Application {
    pub(crate) fn antecedents(&self, g: &Grounding) -> Vec<Fact> {
        match self.direction {
            Direction::Forward => g.body_facts(self.instance).collect(),
            Direction::Backward(pos) => {
                let mut out = vec![g.head_fact(self.instance).negated()];
                out.extend(g.body_facts(self.instance).enumerate().filter(|(i, _)| *i != pos as usize).map(|(_, f)| f));
                out
            }
        }
    }

    pub(crate) fn conclusion(&self, g: &Grounding) -> Fact {
        match self.direction {
            Direction::Forward => g.head_fact(self.instance),
            Direction::Backward(pos) => {
                g.body_facts(self.instance).nth(pos as usize).expect("body position in range").negated()
            }
        }
    }

    pub fn origin<'g>(&self, g: &'g Grounding) -> &'g Origin {
        &g.rule_of(self.instance).origin
    }

    pub fn display<'g>(&self, g: &'g Grounding) -> ApplicationDisplay<'g> {
        ApplicationDisplay { app: *self, g }
    }
}

pub struct ApplicationDisplay<'g> {
    app: Application,
    g: &'g Grounding,
}

impl fmt::Display for ApplicationDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.g;
        let concl = self.app.conclusion(g);
        let arrow = match self.app.direction {
            Direction::Forward => "=>",
            Direction::Backward(_) => "<=",
        };
        write!(
            f,
            "{}@{} {arrow} {} at {}",
            self.app.origin(g),
            g.body_time(self.app.instance),
            g.literal(concl),
            concl.time
        )
    }
}

/// The last step of an argument.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Top {
    Premise { statement: usize },
    Apply(Application),
}

#[derive(Clone, Debug)]
pub(crate) struct ArgNode {
    pub conclusion: Fact,
    pub top: Top,
    pub subs: Box<[ArgId]>,
    pub depth: u32,
    /// Sorted conclusions occurring anywhere in the proof tree.
    facts: Rc<[Fact]>,
    /// Sorted rule instances occurring anywhere in the proof tree.
    instances: Rc<[InstanceId]>,
    /// Sorted applications and premise statements of the proof tree.
    apps: Rc<[Application]>,
    premises: Rc<[usize]>,
}

/// Limits applied during argument construction.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ArgumentLimits {
    /// Maximum proof depth; `None` means the number of ground instances.
    pub max_depth: Option<u32>,
    pub max_arguments: usize,
    /// Work allowed for construction, counted in sub-arguments inspected
    /// while forming and checking combinations.
    pub max_candidates: usize,
}

impl Default for ArgumentLimits {
    fn default() -> Self {
        ArgumentLimits { max_depth: None, max_arguments: 2_000_000, max_candidates: 100_000_000 }
    }
}

/// All arguments constructible from a grounding and a premise set.
pub struct ArgumentSet<'g> {
    pub(crate) grounding: &'g Grounding,
    pub(crate) nodes: Vec<ArgNode>,
    pub(crate) by_conclusion: HashMap<Fact, Vec<ArgId>>,
    pub warnings: Vec<String>,
}

/// Borrowed view of one argument.
#[derive(Copy, Clone)]
pub struct Argument<'a> {
    set: &'a ArgumentSet<'a>,
    id: ArgId,
}

impl<'a> Argument<'a> {
    pub fn id(&self) -> ArgId {
        self.id
    }

    fn node(&self) -> &'a ArgNode {
        &self.set.nodes[self.id as usize]
    }

    pub fn conclusion_fact(&self) -> Fact {
        self.node().conclusion
    }

    pub fn conclusion(&self) -> (crate::syntax::Literal, u32) {
        let f = self.node().conclusion;
        (self.set.grounding.literal(f), f.time)
    }

    pub fn top(&self) -> Top {
        self.node().top
    }

    pub fn is_premise(&self) -> bool {
        matches!(self.node().top, Top::Premise { .. })
    }

    pub fn depth(&self) -> u32 {
        self.node().depth
    }

    pub fn subarguments(&self) -> impl Iterator<Item = Argument<'a>> + 'a {
        let set = self.set;
        self.node().subs.iter().map(move |&id| Argument { set, id })
    }

    /// Every rule application in the proof tree, each listed once.
    pub fn applications(&self) -> Vec<Application> {
        let mut seen = HashSet::new();
        let mut stack = vec![self.id];
        let mut out = Vec::new();
        while let Some(id) = stack.pop() {
            let node = &self.set.nodes[id as usize];
            if let Top::Apply(app) = node.top {
                if seen.insert(app) {
                    out.push(app);
                }
            }
            stack.extend(node.subs.iter().copied());
        }
        out.sort();
        out
    }
}

impl<'g> ArgumentSet<'g> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn grounding(&self) -> &'g Grounding {
        self.grounding
    }

    pub fn get(&'g self, id: ArgId) -> Argument<'g> {
        Argument { set: self, id }
    }

    pub fn iter(&'g self) -> impl Iterator<Item = Argument<'g>> + 'g {
        (0..self.nodes.len() as ArgId).map(move |id| Argument { set: self, id })
    }

    pub fn supporting(&self, fact: Fact) -> &[ArgId] {
        self.by_conclusion.get(&fact).map(Vec::as_slice).unwrap_or(&[])
    }
}

fn is_subset<T: Ord>(small: &[T], big: &[T]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

/// Whether an argument with the same conclusion already uses a subset of
/// these applications and premises. Such a superset argument is attacked by
/// everything that attacks the smaller one and attacks nothing more, so it
/// never changes the grounded extension's conclusions.
fn subsumed(
    set: &ArgumentSet<'_>,
    conclusion: Fact,
    apps: &[Application],
    premises: &[usize],
    work: &mut usize,
) -> bool {
    set.by_conclusion.get(&conclusion).is_some_and(|ids| {
        *work += ids.len();
        ids.iter().any(|&id| {
            let n = &set.nodes[id as usize];
            n.apps.len() <= apps.len() && is_subset(&n.apps, apps) && is_subset(&n.premises, premises)
        })
    })
}

fn merge_sorted<T: Ord + Copy>(parts: &[&[T]], extra: Option<T>) -> Vec<T> {
    let mut out: Vec<T> = parts.iter().flat_map(|p| p.iter().copied()).chain(extra).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Builds every argument reachable from `premises` by forward and backward
/// application of the ground instances, closing under both directions until
/// no new argument appears.
///
/// An argument never repeats a conclusion or a rule instance along a path
/// from its root to a leaf.
pub fn build_arguments<'g>(
    grounding: &'g Grounding,
    premises: &[(Fact, usize)],
    limits: ArgumentLimits,
) -> ArgumentSet<'g> {
    let g = grounding;
    let max_depth = limits.max_depth.unwrap_or(g.instance_count() as u32);

    // Every application, indexed by the facts it consumes.
    let mut watchers: HashMap<Fact, Vec<(Application, u8)>> = HashMap::new();
    let mut axioms = Vec::new();
    for instance in 0..g.instance_count() as InstanceId {
        let body_len = g.rule_of(instance).body.len();
        let mut directions = vec![Direction::Forward];
        directions.extend((0..body_len).map(|p| Direction::Backward(p as u8)));
        for direction in directions {
            let app = Application { instance, direction };
            let ants = app.antecedents(g);
            if ants.is_empty() {
                axioms.push(app);
            }
            for (slot, f) in ants.into_iter().enumerate() {
                if f.time <= g.horizon {
                    watchers.entry(f).or_default().push((app, slot as u8));
                }
            }
        }
    }

    let mut set = ArgumentSet { grounding, nodes: Vec::new(), by_conclusion: HashMap::new(), warnings: Vec::new() };
    let mut seen: HashSet<(Top, Box<[ArgId]>)> = HashSet::new();
    let mut queue: std::collections::VecDeque<ArgId> = std::collections::VecDeque::new();
    let mut depth_hits = 0usize;
    let mut pruned = 0usize;
    let mut capped = false;
    let mut exhausted = false;
    let mut examined = 0usize;

    let push = |set: &mut ArgumentSet<'g>,
                    queue: &mut std::collections::VecDeque<ArgId>,
                    node: ArgNode|
     -> bool {
        if set.nodes.len() >= limits.max_arguments {
            return false;
        }
        let id = set.nodes.len() as ArgId;
        set.by_conclusion.entry(node.conclusion).or_default().push(id);
        set.nodes.push(node);
        queue.push_back(id);
        true
    };

    let mut seen_premises: HashSet<(Fact, usize)> = HashSet::new();
    for &(fact, statement) in premises {
        let top = Top::Premise { statement };
        if !seen_premises.insert((fact, statement)) {
            continue;
        }
        let node = ArgNode {
            conclusion: fact,
            top,
            subs: Box::new([]),
            depth: 0,
            facts: Rc::from(vec![fact]),
            instances: Rc::from(Vec::new()),
            apps: Rc::from(Vec::new()),
            premises: Rc::from(vec![statement]),
        };
        if !push(&mut set, &mut queue, node) {
            capped = true;
        }
    }

    for app in axioms {
        let conclusion = app.conclusion(g);
        if conclusion.time > g.horizon {
            continue;
        }
        let top = Top::Apply(app);
        if !seen.insert((top, Box::new([]))) {
            continue;
        }
        let node = ArgNode {
            conclusion,
            top,
            subs: Box::new([]),
            depth: 1,
            facts: Rc::from(vec![conclusion]),
            instances: Rc::from(vec![app.instance]),
            apps: Rc::from(vec![app]),
            premises: Rc::from(Vec::new()),
        };
        if !push(&mut set, &mut queue, node) {
            capped = true;
        }
    }

    'outer: while let Some(new_id) = queue.pop_front() {
        let new_fact = set.nodes[new_id as usize].conclusion;
        let Some(watch) = watchers.get(&new_fact) else { continue };
        for &(app, slot) in watch {
            let conclusion = app.conclusion(g);
            if conclusion.time > g.horizon {
                continue;
            }
            let ants = app.antecedents(g);
            // A sub-argument that already contains the conclusion or this
            // instance, or is too deep, can never take part.
            let usable = |id: &ArgId| {
                let n = &set.nodes[*id as usize];
                n.facts.binary_search(&conclusion).is_err()
                    && n.instances.binary_search(&app.instance).is_err()
                    && n.depth < max_depth
            };
            let mut pools: Vec<Vec<ArgId>> = Vec::with_capacity(ants.len());
            let mut too_deep = false;
            for (i, f) in ants.iter().enumerate() {
                let candidates: &[ArgId] = if i == slot as usize {
                    std::slice::from_ref(&new_id)
                } else {
                    set.by_conclusion.get(f).map(Vec::as_slice).unwrap_or(&[])
                };
                examined += candidates.len();
                let pool: Vec<ArgId> = candidates.iter().copied().filter(usable).collect();
                too_deep |= candidates.iter().any(|&c| set.nodes[c as usize].depth >= max_depth);
                if pool.is_empty() {
                    pools.clear();
                    break;
                }
                pools.push(pool);
            }
            if too_deep {
                depth_hits += 1;
            }
            if pools.len() != ants.len() {
                continue;
            }

            let mut odometer = vec![0usize; pools.len()];
            loop {
                examined += 1;
                if examined > limits.max_candidates {
                    exhausted = true;
                    break 'outer;
                }
                let subs: Box<[ArgId]> = odometer.iter().zip(&pools).map(|(&i, p)| p[i]).collect();
                let top = Top::Apply(app);
                let key = (top, subs.clone());
                if !seen.contains(&key) {
                    let sub_nodes: Vec<&ArgNode> = subs.iter().map(|&s| &set.nodes[s as usize]).collect();
                    let depth = 1 + sub_nodes.iter().map(|n| n.depth).max().unwrap_or(0);
                    {
                        {
                            let apps: Vec<&[Application]> = sub_nodes.iter().map(|n| &*n.apps).collect();
                            let apps = merge_sorted(&apps, Some(app));
                            let prem: Vec<&[usize]> = sub_nodes.iter().map(|n| &*n.premises).collect();
                            let premises = merge_sorted(&prem, None);
                            seen.insert(key);
                            if subsumed(&set, conclusion, &apps, &premises, &mut examined) {
                                pruned += 1;
                            } else {
                                let facts: Vec<&[Fact]> = sub_nodes.iter().map(|n| &*n.facts).collect();
                                let insts: Vec<&[InstanceId]> = sub_nodes.iter().map(|n| &*n.instances).collect();
                                let node = ArgNode {
                                    conclusion,
                                    top,
                                    subs: subs.clone(),
                                    depth,
                                    facts: Rc::from(merge_sorted(&facts, Some(conclusion))),
                                    instances: Rc::from(merge_sorted(&insts, Some(app.instance))),
                                    apps: Rc::from(apps),
                                    premises: Rc::from(premises),
                                };
                                if !push(&mut set, &mut queue, node) {
                                    capped = true;
                                    break 'outer;
                                }
                            }
                        }
                    }
                }
                if !advance(&mut odometer, &pools) {
                    break;
                }
            }
        }
    }

    log::debug!("{} arguments built, {pruned} subsumed candidates dropped", set.nodes.len());
    if depth_hits > 0 {
        set.warnings.push(format!(
            "proof-depth cap {max_depth} truncated {depth_hits} candidate argument(s)"
        ));
    }
    if capped {
        set.warnings.push(format!(
            "argument cap {} reached; the comprehension model may be incomplete",
            limits.max_arguments
        ));
    }
    if exhausted {
        set.warnings.push(format!(
            "argument construction stopped after {} candidate combinations; the comprehension model may be incomplete",
            limits.max_candidates
        ));
    }
    set
}

fn advance(odometer: &mut [usize], pools: &[Vec<ArgId>]) -> bool {
    for (digit, pool) in odometer.iter_mut().zip(pools).rev() {
        *digit += 1;
        if *digit < pool.len() {
            return true;
        }
        *digit = 0;
    }
    false
}
