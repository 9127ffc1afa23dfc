//! Abstract syntax of STAR domain files.
//!
//! Every type here renders to its canonical concrete syntax through
//! [`fmt::Display`]; the parser accepts that text back unchanged.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Returns true for names matching `[a-z][a-zA-Z0-9_]*`.
pub fn is_constant_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Returns true for names matching `[A-Z_][a-zA-Z0-9_]*`.
pub fn is_variable_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    Constant { name: String },
    Variable { name: String },
    Compound { functor: String, args: Vec<Term> },
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Term {
        let name = name.into();
        debug_assert!(is_constant_name(&name), "bad constant {name:?}");
        Term::Constant { name }
    }

    pub fn variable(name: impl Into<String>) -> Term {
        let name = name.into();
        debug_assert!(is_variable_name(&name), "bad variable {name:?}");
        Term::Variable { name }
    }

    pub fn compound(functor: impl Into<String>, args: Vec<Term>) -> Term {
        let functor = functor.into();
        debug_assert!(is_constant_name(&functor));
        debug_assert!(!args.is_empty(), "compound arity must be at least 1");
        Term::Compound { functor, args }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Constant { .. } => true,
            Term::Variable { .. } => false,
            Term::Compound { args, .. } => args.iter().all(Term::is_ground),
        }
    }

    /// True for the anonymous marker `_`.
    pub fn is_anonymous(&self) -> bool {
        matches!(self, Term::Variable { name } if name == "_")
    }

    /// Collects variable names in first-occurrence order.
    pub fn collect_variables(&self, out: &mut Vec<String>) {
        match self {
            Term::Constant { .. } => {}
            Term::Variable { name } => {
                if !out.contains(name) {
                    out.push(name.clone());
                }
            }
            Term::Compound { args, .. } => args.iter().for_each(|a| a.collect_variables(out)),
        }
    }

    /// Collects every atomic constant, including those nested in compounds.
    pub fn collect_constants(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Constant { name } => {
                out.insert(name.clone());
            }
            Term::Variable { .. } => {}
            Term::Compound { args, .. } => args.iter().for_each(|a| a.collect_constants(out)),
        }
    }

    pub fn substitute(&self, binding: &HashMap<String, Term>) -> Term {
        match self {
            Term::Variable { name } => binding.get(name).cloned().unwrap_or_else(|| self.clone()),
            Term::Constant { .. } => self.clone(),
            Term::Compound { functor, args } => Term::Compound {
                functor: functor.clone(),
                args: args.iter().map(|a| a.substitute(binding)).collect(),
            },
        }
    }

    fn well_formed(&self) -> bool {
        match self {
            Term::Constant { name } => is_constant_name(name),
            Term::Variable { name } => is_variable_name(name),
            Term::Compound { functor, args } => {
                is_constant_name(functor) && !args.is_empty() && args.iter().all(Term::well_formed)
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Constant { name } | Term::Variable { name } => f.write_str(name),
            Term::Compound { functor, args } => {
                write!(f, "{functor}(")?;
                write_comma_separated(f, args, ",")?;
                f.write_str(")")
            }
        }
    }
}

fn write_comma_separated<T: fmt::Display>(
    f: &mut fmt::Formatter<'_>,
    items: &[T],
    sep: &str,
) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

/// A predicate instance without a sign, e.g. `call(bob,mary,phone1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub name: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(name: impl Into<String>, args: Vec<Term>) -> Atom {
        Atom { name: name.into(), args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// `name/arity`, counting top-level arguments only.
    pub fn signature(&self) -> Signature {
        Signature { name: self.name.clone(), arity: self.args.len() }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn substitute(&self, binding: &HashMap<String, Term>) -> Atom {
        Atom { name: self.name.clone(), args: self.args.iter().map(|a| a.substitute(binding)).collect() }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            write_comma_separated(f, &self.args, ",")?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature {
    pub name: String,
    pub arity: usize,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// A signed atom. Negation is a single flag, so double negation cannot be
/// expressed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub polarity: Polarity,
    pub atom: Atom,
}

impl Literal {
    pub fn positive(atom: Atom) -> Literal {
        Literal { polarity: Polarity::Positive, atom }
    }

    pub fn negative(atom: Atom) -> Literal {
        Literal { polarity: Polarity::Negative, atom }
    }

    pub fn new(polarity: Polarity, name: impl Into<String>, args: Vec<Term>) -> Literal {
        Literal { polarity, atom: Atom::new(name, args) }
    }

    pub fn is_positive(&self) -> bool {
        self.polarity == Polarity::Positive
    }

    pub fn negated(&self) -> Literal {
        Literal { polarity: self.polarity.flip(), atom: self.atom.clone() }
    }

    pub fn signature(&self) -> Signature {
        self.atom.signature()
    }

    pub fn substitute(&self, binding: &HashMap<String, Term>) -> Literal {
        Literal { polarity: self.polarity, atom: self.atom.substitute(binding) }
    }

    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.atom.args.iter().for_each(|a| a.collect_variables(&mut out));
        out
    }

    fn well_formed(&self) -> bool {
        is_constant_name(&self.atom.name) && self.atom.args.iter().all(Term::well_formed)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.polarity == Polarity::Negative {
            f.write_str("-")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// `name/arity` of a literal's predicate.
pub fn predicate_signature(literal: &Literal) -> String {
    literal.signature().to_string()
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimePoint {
    At(u32),
    Always,
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimePoint::At(t) => write!(f, "{t}"),
            TimePoint::Always => f.write_str("always"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StoryStatement {
    pub session: u32,
    pub literal: Literal,
    pub when: TimePoint,
}

impl fmt::Display for StoryStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s({}) :: {} at {}.", self.session, self.literal, self.when)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Choice {
    pub literal: Literal,
    pub time: u32,
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.literal, self.time)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Question {
    pub id: u32,
    pub choices: Vec<Choice>,
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q({}) ?? ", self.id)?;
        write_comma_separated(f, &self.choices, "; ")?;
        f.write_str(".")
    }
}

/// `session(s(N),[q(..),..],all).` The visibility token is always `all`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SessionDecl {
    pub id: u32,
    pub questions: Vec<u32>,
}

impl fmt::Display for SessionDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "session(s({}),[", self.id)?;
        for (i, q) in self.questions.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "q({q})")?;
        }
        f.write_str("],all).")
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Causal,
    Property,
}

impl RuleKind {
    pub fn prefix(self) -> char {
        match self {
            RuleKind::Causal => 'c',
            RuleKind::Property => 'p',
        }
    }

    pub fn connective(self) -> &'static str {
        match self {
            RuleKind::Causal => "causes",
            RuleKind::Property => "implies",
        }
    }
}

/// `c(N)` or `p(N)`. Indices print with at least two digits, so `c(1)` and
/// `c(01)` denote the same label.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RuleLabel {
    pub kind: RuleKind,
    pub index: u32,
}

impl RuleLabel {
    pub fn causal(index: u32) -> RuleLabel {
        RuleLabel { kind: RuleKind::Causal, index }
    }

    pub fn property(index: u32) -> RuleLabel {
        RuleLabel { kind: RuleKind::Property, index }
    }

    /// Compact form used by graph nodes: `c01`.
    pub fn compact(&self) -> String {
        format!("{}{:02}", self.kind.prefix(), self.index)
    }

    /// Parses the compact form `c01` / `p7`.
    pub fn parse_compact(s: &str) -> Option<RuleLabel> {
        let mut chars = s.chars();
        let kind = match chars.next()? {
            'c' => RuleKind::Causal,
            'p' => RuleKind::Property,
            _ => return None,
        };
        let digits = chars.as_str();
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        Some(RuleLabel { kind, index: digits.parse().ok()? })
    }
}

impl fmt::Display for RuleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({:02})", self.kind.prefix(), self.index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleBody {
    /// The tautology `true`.
    True,
    Literals(Vec<Literal>),
}

impl RuleBody {
    pub fn literals(&self) -> &[Literal] {
        match self {
            RuleBody::True => &[],
            RuleBody::Literals(lits) => lits,
        }
    }

    /// Empty lists collapse to [`RuleBody::True`].
    pub fn from_literals(lits: Vec<Literal>) -> RuleBody {
        if lits.is_empty() {
            RuleBody::True
        } else {
            RuleBody::Literals(lits)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rule {
    pub label: RuleLabel,
    pub body: RuleBody,
    pub head: Literal,
}

impl Rule {
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        for lit in self.body.literals().iter().chain(std::iter::once(&self.head)) {
            lit.atom.args.iter().for_each(|a| a.collect_variables(&mut out));
        }
        out
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :: ", self.label)?;
        match &self.body {
            RuleBody::True => f.write_str("true")?,
            RuleBody::Literals(lits) => write_comma_separated(f, lits, ", ")?,
        }
        write!(f, " {} {}.", self.label.kind.connective(), self.head)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Priority {
    pub stronger: RuleLabel,
    pub weaker: RuleLabel,
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} >> {}.", self.stronger, self.weaker)
    }
}

/// A fluent shape such as `do_want(_,_)`. Only name and arity matter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FluentDecl {
    pub name: String,
    pub arity: usize,
}

impl FluentDecl {
    pub fn signature(&self) -> Signature {
        Signature { name: self.name.clone(), arity: self.arity }
    }
}

impl fmt::Display for FluentDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if self.arity > 0 {
            f.write_str("(")?;
            for i in 0..self.arity {
                if i > 0 {
                    f.write_str(",")?;
                }
                f.write_str("_")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Points at the offending element of a [`DomainParts`] list.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Item {
    Session(usize),
    Statement(usize),
    Question(usize),
    Fluent(usize),
    Rule(usize),
    Priority(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("statement refers to undeclared session s({session})")]
    UnknownSession { item: Item, session: u32 },
    #[error("session s({session}) lists undefined question q({question})")]
    UnknownQuestion { item: Item, session: u32, question: u32 },
    #[error("session s({session}) is declared more than once")]
    DuplicateSession { item: Item, session: u32 },
    #[error("session ids must be consecutive from s(0); expected s({expected}), found s({found})")]
    NonConsecutiveSession { item: Item, expected: u32, found: u32 },
    #[error("question q({question}) is defined more than once")]
    DuplicateQuestion { item: Item, question: u32 },
    #[error("question q({question}) must offer at least one choice")]
    EmptyQuestion { item: Item, question: u32 },
    #[error("session 0 holds typing statements only; they must use `at always`")]
    TimedTypingStatement { item: Item },
    #[error("statements of session s({session}) need a numeric time-point, not `always`")]
    UntimedStatement { item: Item, session: u32 },
    #[error("rule label {label} is used more than once")]
    DuplicateRuleLabel { item: Item, label: RuleLabel },
    #[error("fluent {signature} is declared more than once")]
    DuplicateFluent { item: Item, signature: Signature },
    #[error("priority mentions undeclared rule {label}")]
    UnknownPriorityRule { item: Item, label: RuleLabel },
    #[error("rule {label} cannot be stronger than itself")]
    SelfPriority { item: Item, label: RuleLabel },
    #[error("priorities {a} >> {b} and {b} >> {a} contradict each other")]
    ContradictoryPriority { item: Item, a: RuleLabel, b: RuleLabel },
    #[error("malformed identifier or term in {what}")]
    Malformed { item: Item, what: String },
}

impl DomainError {
    pub fn item(&self) -> Item {
        match self {
            DomainError::UnknownSession { item, .. }
            | DomainError::UnknownQuestion { item, .. }
            | DomainError::DuplicateSession { item, .. }
            | DomainError::NonConsecutiveSession { item, .. }
            | DomainError::DuplicateQuestion { item, .. }
            | DomainError::EmptyQuestion { item, .. }
            | DomainError::TimedTypingStatement { item }
            | DomainError::UntimedStatement { item, .. }
            | DomainError::DuplicateRuleLabel { item, .. }
            | DomainError::DuplicateFluent { item, .. }
            | DomainError::UnknownPriorityRule { item, .. }
            | DomainError::SelfPriority { item, .. }
            | DomainError::ContradictoryPriority { item, .. }
            | DomainError::Malformed { item, .. } => *item,
        }
    }

    /// Short advice on how to repair the clause.
    pub fn hint(&self) -> String {
        match self {
            DomainError::UnknownSession { session, .. } => {
                format!("add `session(s({session}),[],all).` or move the statement to a declared session")
            }
            DomainError::UnknownQuestion { question, .. } => {
                format!("define `q({question}) ?? Literal at T.` or drop it from the session list")
            }
            DomainError::DuplicateSession { .. } => "keep a single declaration per session".into(),
            DomainError::NonConsecutiveSession { expected, .. } => {
                format!("declare session s({expected}) before later ones")
            }
            DomainError::DuplicateQuestion { .. } => "give each question its own number".into(),
            DomainError::EmptyQuestion { .. } => "list choices as `Literal at T; Literal at T`".into(),
            DomainError::TimedTypingStatement { .. } => {
                "write `s(0) :: is_type(constant) at always.`".into()
            }
            DomainError::UntimedStatement { .. } => {
                "use an integer time-point such as `at 2`, or move typing facts to s(0)".into()
            }
            DomainError::DuplicateRuleLabel { label, .. } => {
                format!("rename one of the rules labelled {label}")
            }
            DomainError::DuplicateFluent { .. } => "remove the repeated fluent entry".into(),
            DomainError::UnknownPriorityRule { label, .. } => {
                format!("declare rule {label} or fix the label in the priority")
            }
            DomainError::SelfPriority { .. } => "a priority must relate two different rules".into(),
            DomainError::ContradictoryPriority { .. } => "remove one of the two priorities".into(),
            DomainError::Malformed { .. } => {
                "constants start lowercase, variables start uppercase or with `_`".into()
            }
        }
    }
}

/// Unvalidated domain contents, in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainParts {
    pub sessions: Vec<SessionDecl>,
    pub statements: Vec<StoryStatement>,
    pub questions: Vec<Question>,
    pub fluents: Vec<FluentDecl>,
    pub rules: Vec<Rule>,
    pub priorities: Vec<Priority>,
}

/// A validated STAR program: story part plus background knowledge.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Domain {
    parts: DomainParts,
}

impl Domain {
    pub fn new(parts: DomainParts) -> Result<Domain, Vec<DomainError>> {
        let errors = validate(&parts);
        if errors.is_empty() {
            Ok(Domain { parts })
        } else {
            Err(errors)
        }
    }

    pub fn empty() -> Domain {
        Domain::default()
    }

    pub fn sessions(&self) -> &[SessionDecl] {
        &self.parts.sessions
    }

    pub fn statements(&self) -> &[StoryStatement] {
        &self.parts.statements
    }

    pub fn questions(&self) -> &[Question] {
        &self.parts.questions
    }

    pub fn fluents(&self) -> &[FluentDecl] {
        &self.parts.fluents
    }

    pub fn rules(&self) -> &[Rule] {
        &self.parts.rules
    }

    pub fn priorities(&self) -> &[Priority] {
        &self.parts.priorities
    }

    pub fn parts(&self) -> &DomainParts {
        &self.parts
    }

    pub fn into_parts(self) -> DomainParts {
        self.parts
    }

    pub fn question(&self, id: u32) -> Option<&Question> {
        self.parts.questions.iter().find(|q| q.id == id)
    }

    pub fn rule(&self, label: RuleLabel) -> Option<&Rule> {
        self.parts.rules.iter().find(|r| r.label == label)
    }

    pub fn is_empty(&self) -> bool {
        self.parts == DomainParts::default()
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let parts = DomainParts::deserialize(d)?;
        Domain::new(parts).map_err(|errs| {
            let msgs: Vec<String> = errs.iter().map(ToString::to_string).collect();
            serde::de::Error::custom(msgs.join("; "))
        })
    }
}

fn validate(parts: &DomainParts) -> Vec<DomainError> {
    let mut errors = Vec::new();

    let mut session_ids = HashSet::new();
    for (i, s) in parts.sessions.iter().enumerate() {
        let item = Item::Session(i);
        if !session_ids.insert(s.id) {
            errors.push(DomainError::DuplicateSession { item, session: s.id });
        } else if s.id as usize != session_ids.len() - 1 {
            errors.push(DomainError::NonConsecutiveSession {
                item,
                expected: session_ids.len() as u32 - 1,
                found: s.id,
            });
        }
    }

    let mut question_ids = HashSet::new();
    for (i, q) in parts.questions.iter().enumerate() {
        let item = Item::Question(i);
        if !question_ids.insert(q.id) {
            errors.push(DomainError::DuplicateQuestion { item, question: q.id });
        }
        if q.choices.is_empty() {
            errors.push(DomainError::EmptyQuestion { item, question: q.id });
        }
        if q.choices.iter().any(|c| !c.literal.well_formed()) {
            errors.push(DomainError::Malformed { item, what: format!("question q({})", q.id) });
        }
    }

    for (i, s) in parts.sessions.iter().enumerate() {
        for &q in &s.questions {
            if !question_ids.contains(&q) {
                errors.push(DomainError::UnknownQuestion { item: Item::Session(i), session: s.id, question: q });
            }
        }
    }

    for (i, st) in parts.statements.iter().enumerate() {
        let item = Item::Statement(i);
        if !session_ids.contains(&st.session) {
            errors.push(DomainError::UnknownSession { item, session: st.session });
        }
        match (st.session, st.when) {
            (0, TimePoint::At(_)) => errors.push(DomainError::TimedTypingStatement { item }),
            (s, TimePoint::Always) if s > 0 => {
                errors.push(DomainError::UntimedStatement { item, session: s })
            }
            _ => {}
        }
        if !st.literal.well_formed() {
            errors.push(DomainError::Malformed { item, what: format!("statement `{}`", st.literal) });
        }
    }

    let mut fluents = HashSet::new();
    for (i, fl) in parts.fluents.iter().enumerate() {
        let item = Item::Fluent(i);
        if !is_constant_name(&fl.name) {
            errors.push(DomainError::Malformed { item, what: format!("fluent `{}`", fl.name) });
        }
        if !fluents.insert(fl.signature()) {
            errors.push(DomainError::DuplicateFluent { item, signature: fl.signature() });
        }
    }

    let mut labels = HashSet::new();
    for (i, r) in parts.rules.iter().enumerate() {
        let item = Item::Rule(i);
        if !labels.insert(r.label) {
            errors.push(DomainError::DuplicateRuleLabel { item, label: r.label });
        }
        if !r.head.well_formed() || !r.body.literals().iter().all(Literal::well_formed) {
            errors.push(DomainError::Malformed { item, what: format!("rule {}", r.label) });
        }
    }

    let mut declared = HashSet::new();
    for (i, p) in parts.priorities.iter().enumerate() {
        let item = Item::Priority(i);
        for label in [p.stronger, p.weaker] {
            if !labels.contains(&label) {
                errors.push(DomainError::UnknownPriorityRule { item, label });
            }
        }
        if p.stronger == p.weaker {
            errors.push(DomainError::SelfPriority { item, label: p.stronger });
        } else if declared.contains(&(p.weaker, p.stronger)) {
            errors.push(DomainError::ContradictoryPriority { item, a: p.stronger, b: p.weaker });
        }
        declared.insert((p.stronger, p.weaker));
    }

    errors
}
