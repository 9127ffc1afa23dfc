//! Conversion of an annotated natural-language story into STAR story clauses.
//!
//! The input is an [`AnnotatedStory`]: sentences with tokens, lemmas,
//! part-of-speech tags, entity labels, basic dependencies and coreference
//! mentions, grouped into statements and question blocks. Conversion is a
//! pure function of these annotations. See `docs/annotated-story.md` for the
//! file format.

pub mod corenlp;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{
    Atom, Choice, Domain, DomainError, DomainParts, Literal, Polarity, Question, SessionDecl, StoryStatement, Term,
    TimePoint,
};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityLabel {
    Location,
    Person,
    Organization,
    Money,
    Percent,
    Date,
    Time,
    #[serde(other)]
    None,
}

impl EntityLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityLabel::Location => "location",
            EntityLabel::Person => "person",
            EntityLabel::Organization => "organization",
            EntityLabel::Money => "money",
            EntityLabel::Percent => "percent",
            EntityLabel::Date => "date",
            EntityLabel::Time => "time",
            EntityLabel::None => "none",
        }
    }

    /// Maps a CoreNLP NER tag; anything outside the supported set is `None`.
    pub fn from_tag(tag: &str) -> EntityLabel {
        match tag.to_ascii_uppercase().as_str() {
            "LOCATION" | "CITY" | "COUNTRY" | "STATE_OR_PROVINCE" => EntityLabel::Location,
            "PERSON" => EntityLabel::Person,
            "ORGANIZATION" => EntityLabel::Organization,
            "MONEY" => EntityLabel::Money,
            "PERCENT" => EntityLabel::Percent,
            "DATE" => EntityLabel::Date,
            "TIME" => EntityLabel::Time,
            _ => EntityLabel::None,
        }
    }
}

fn is_none_label(l: &EntityLabel) -> bool {
    *l == EntityLabel::None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub word: String,
    pub lemma: String,
    pub pos: String,
    #[serde(default = "none_label", skip_serializing_if = "is_none_label")]
    pub ner: EntityLabel,
}

fn none_label() -> EntityLabel {
    EntityLabel::None
}

/// A basic dependency. Token indices are 1-based; governor 0 is ROOT.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dependency {
    pub rel: String,
    pub gov: usize,
    pub dep: usize,
}

/// A coreference mention: tokens `start..end` (1-based, end exclusive)
/// belonging to story-wide chain `chain`, with head token `head`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub chain: u32,
    pub start: usize,
    pub end: usize,
    pub head: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    #[serde(default)]
    pub text: String,
    pub tokens: Vec<Token>,
    pub deps: Vec<Dependency>,
    #[serde(default)]
    pub corefs: Vec<Mention>,
}

impl Sentence {
    fn token(&self, i: usize) -> &Token {
        &self.tokens[i - 1]
    }

    pub fn root(&self) -> Option<usize> {
        self.deps.iter().find(|d| d.gov == 0).map(|d| d.dep)
    }

    /// Dependents of token `gov`, in token order.
    fn dependents(&self, gov: usize) -> Vec<&Dependency> {
        let mut out: Vec<&Dependency> = self.deps.iter().filter(|d| d.gov == gov && d.dep != 0).collect();
        out.sort_by_key(|d| d.dep);
        out
    }

    fn check(&self, index: usize) -> Result<(), ConversionError> {
        let bad = |reason: String| ConversionError::InvalidSentence { sentence: index, reason };
        let n = self.tokens.len();
        if n == 0 {
            return Err(bad("sentence has no tokens".into()));
        }
        let roots = self.deps.iter().filter(|d| d.gov == 0).count();
        if roots != 1 {
            return Err(bad(format!("expected exactly one ROOT dependency, found {roots}")));
        }
        let mut heads = vec![0usize; n + 1];
        for d in &self.deps {
            if d.dep == 0 || d.dep > n || d.gov > n {
                return Err(bad(format!("dependency {}({}, {}) points outside the sentence", d.rel, d.gov, d.dep)));
            }
            if heads[d.dep] != 0 {
                return Err(bad(format!("token {} has two governors", d.dep)));
            }
            heads[d.dep] = d.gov + 1;
        }
        // Every governed token must reach ROOT without revisiting a token.
        for start in 1..=n {
            let mut cur = start;
            let mut steps = 0;
            while heads[cur] > 1 {
                cur = heads[cur] - 1;
                steps += 1;
                if steps > n {
                    return Err(bad("dependencies contain a cycle".into()));
                }
            }
        }
        for m in &self.corefs {
            if m.start == 0 || m.end > n + 1 || m.start >= m.end || m.head < m.start || m.head >= m.end {
                return Err(bad(format!("mention {}..{} of chain {} is out of range", m.start, m.end, m.chain)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Block {
    Statement { sentences: Vec<Sentence> },
    Questions { sentences: Vec<Sentence> },
}

impl Block {
    pub fn sentences(&self) -> &[Sentence] {
        match self {
            Block::Statement { sentences } | Block::Questions { sentences } => sentences,
        }
    }

    pub fn is_questions(&self) -> bool {
        matches!(self, Block::Questions { .. })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedStory {
    pub blocks: Vec<Block>,
}

impl AnnotatedStory {
    /// Sentences in document order, each with its question flag.
    pub fn sentences(&self) -> impl Iterator<Item = (&Sentence, bool)> {
        self.blocks.iter().flat_map(|b| b.sentences().iter().map(move |s| (s, b.is_questions())))
    }

    pub fn is_empty(&self) -> bool {
        self.sentences().next().is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ConversionError {
    #[error("the story is empty")]
    EmptyStory,
    #[error("no statements precede questions")]
    QuestionsFirst,
    #[error("sentence {sentence}: {reason}")]
    InvalidSentence { sentence: usize, reason: String },
    #[error("the converted story is not a valid domain: {0:?}")]
    InvalidDomain(Vec<DomainError>),
}

/// Story sessions: each lists sentence indices (document order, 0-based)
/// of its statements and of its questions. Session 0 is never listed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionPlan {
    pub id: u32,
    pub statements: Vec<usize>,
    pub questions: Vec<usize>,
}

pub fn segment_sessions(story: &AnnotatedStory) -> Result<Vec<SessionPlan>, ConversionError> {
    if story.is_empty() {
        return Err(ConversionError::EmptyStory);
    }
    let mut sessions = Vec::new();
    let mut statements = Vec::new();
    let mut questions = Vec::new();
    let mut saw_statement = false;
    for (i, (_, is_question)) in story.sentences().enumerate() {
        if is_question {
            if !saw_statement {
                return Err(ConversionError::QuestionsFirst);
            }
            questions.push(i);
        } else {
            if !questions.is_empty() {
                sessions.push(SessionPlan {
                    id: sessions.len() as u32 + 1,
                    statements: std::mem::take(&mut statements),
                    questions: std::mem::take(&mut questions),
                });
            }
            saw_statement = true;
            statements.push(i);
        }
    }
    if !statements.is_empty() || !questions.is_empty() {
        sessions.push(SessionPlan { id: sessions.len() as u32 + 1, statements, questions });
    }
    Ok(sessions)
}

/// Constants of the story and how each token maps onto them.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConstantTable {
    /// (type, constant) pairs, one per constant.
    pub typing: Vec<(String, String)>,
    /// (sentence, token) -> constant
    by_token: HashMap<(usize, usize), String>,
    /// Notes about pronouns that had to be given fresh constants.
    pub notes: Vec<String>,
}

impl ConstantTable {
    pub fn constant(&self, sentence: usize, token: usize) -> Option<&str> {
        self.by_token.get(&(sentence, token)).map(String::as_str)
    }

    /// The `s(0)` typing statements, sorted.
    pub fn statements(&self) -> Vec<StoryStatement> {
        let mut typing = self.typing.clone();
        typing.sort();
        typing
            .into_iter()
            .map(|(ty, c)| StoryStatement {
                session: 0,
                literal: Literal::positive(Atom::new(format!("is_{ty}"), vec![Term::constant(c)])),
                when: TimePoint::Always,
            })
            .collect()
    }
}

fn is_pronoun(t: &Token) -> bool {
    t.pos == "PRP" || t.pos == "PRP$"
}

fn is_noun(t: &Token) -> bool {
    t.pos.starts_with("NN")
}

fn is_nominal(t: &Token) -> bool {
    is_noun(t) || is_pronoun(t) || t.ner != EntityLabel::None
}

/// Lowercases and drops characters that cannot appear in a constant.
fn identifier(text: &str) -> String {
    let mut out: String = text
        .to_lowercase()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    if !out.starts_with(|c: char| c.is_ascii_lowercase()) {
        out.insert(0, 'x');
    }
    out
}

struct Allocator {
    counters: BTreeMap<String, u32>,
    table: ConstantTable,
    known: BTreeSet<String>,
}

impl Allocator {
    fn fresh(&mut self, base: &str) -> String {
        let n = self.counters.entry(base.to_string()).or_insert(0);
        *n += 1;
        format!("{base}{n}")
    }

    fn declare(&mut self, ty: &str, constant: &str) {
        if self.known.insert(constant.to_string()) {
            self.table.typing.push((ty.to_string(), constant.to_string()));
        }
    }

    /// Constant for a mention whose head token is `t`.
    fn allocate(&mut self, t: &Token) -> String {
        if t.ner != EntityLabel::None {
            let c = identifier(&t.word);
            self.declare(t.ner.as_str(), &c);
            c
        } else if is_pronoun(t) {
            let c = self.fresh("person");
            self.declare("person", &c);
            c
        } else {
            let lemma = identifier(&t.lemma);
            let c = self.fresh(&lemma);
            self.declare(&lemma, &c);
            c
        }
    }
}

/// Assigns a constant to every nominal token and types each constant.
///
/// Coreferent mentions share the constant of their chain's representative:
/// the first named-entity mention, or the first mention when the chain has
/// none. Common nouns are numbered per lemma over the whole story.
pub fn extract_entities(story: &AnnotatedStory) -> ConstantTable {
    let sentences: Vec<&Sentence> = story.sentences().map(|(s, _)| s).collect();

    let mut chains: BTreeMap<u32, Vec<(usize, &Mention)>> = BTreeMap::new();
    for (si, s) in sentences.iter().enumerate() {
        for m in &s.corefs {
            chains.entry(m.chain).or_default().push((si, m));
        }
    }
    let representative: BTreeMap<u32, (usize, usize)> = chains
        .iter()
        .map(|(&id, mentions)| {
            let named = mentions.iter().find(|(si, m)| sentences[*si].token(m.head).ner != EntityLabel::None);
            let (si, m) = named.unwrap_or(&mentions[0]);
            (id, (*si, m.head))
        })
        .collect();

    let mut alloc = Allocator { counters: BTreeMap::new(), table: ConstantTable::default(), known: BTreeSet::new() };
    let mut chain_constant: BTreeMap<u32, String> = BTreeMap::new();

    for (si, s) in sentences.iter().enumerate() {
        for ti in 1..=s.tokens.len() {
            let t = s.token(ti);
            if !is_nominal(t) {
                continue;
            }
            let chain = s.corefs.iter().find(|m| m.head == ti).map(|m| m.chain);
            let c = match chain {
                Some(id) => match chain_constant.get(&id) {
                    Some(c) => c.clone(),
                    None => {
                        let (rs, rt) = representative[&id];
                        let c = alloc.allocate(sentences[rs].token(rt));
                        chain_constant.insert(id, c.clone());
                        c
                    }
                },
                None => {
                    let c = alloc.allocate(t);
                    if is_pronoun(t) {
                        alloc.table.notes.push(format!(
                            "sentence {}: pronoun `{}` is not resolved by coreference, using {c}",
                            si + 1,
                            t.word
                        ));
                    }
                    c
                }
            };
            alloc.table.by_token.insert((si, ti), c);
        }
    }
    alloc.table
}

const ARGUMENT_RELATIONS: [&str; 8] = ["nsubj", "nsubjpass", "nsubj:pass", "dobj", "obj", "iobj", "nmod", "xcomp"];
const PREFIX_RELATIONS: [&str; 5] = ["aux", "aux:pass", "auxpass", "cop", "compound:prt"];
const SUFFIX_RELATIONS: [&str; 2] = ["amod", "case"];
const KNOWN_RELATIONS: [&str; 12] =
    ["neg", "det", "punct", "mark", "advmod", "cc", "conj", "compound", "nummod", "dep", "obl", "nmod:poss"];

fn base_relation(rel: &str) -> &str {
    rel.split(':').next().unwrap_or(rel)
}

fn is_argument_relation(rel: &str) -> bool {
    ARGUMENT_RELATIONS.contains(&rel) || base_relation(rel) == "nmod"
}

/// Per-sentence record of how a clause was produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceTrace {
    /// 1-based position in the story.
    pub sentence: usize,
    pub text: String,
    pub question: bool,
    pub predicate: String,
    /// Dependency relations consumed as arguments, in argument order.
    pub argument_sources: Vec<String>,
    pub time: u32,
    pub session: u32,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversionTrace {
    pub sentences: Vec<SentenceTrace>,
    pub notes: Vec<String>,
}

/// The literal for one sentence, with the relations it consumed and any
/// notes about skipped material.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuiltPredicate {
    pub literal: Literal,
    pub sources: Vec<String>,
    pub notes: Vec<String>,
}

fn word_lemma(t: &Token, rel: &str) -> String {
    let lemma = identifier(&t.lemma);
    if lemma == "be" && matches!(rel, "aux" | "aux:pass" | "auxpass" | "cop") {
        "is".into()
    } else {
        lemma
    }
}

/// Builds the name of the predicate headed by token `head`.
fn predicate_name(s: &Sentence, head: usize, notes: &mut Vec<String>) -> (String, bool) {
    let mut prefix = Vec::new();
    let mut suffix = Vec::new();
    let mut negated = false;
    for d in s.dependents(head) {
        let t = s.token(d.dep);
        if PREFIX_RELATIONS.contains(&d.rel.as_str()) {
            // The infinitival marker is not part of the name.
            if t.pos != "TO" {
                prefix.push(word_lemma(t, &d.rel));
            }
        } else if SUFFIX_RELATIONS.contains(&d.rel.as_str()) && head == s.root().unwrap_or(0) {
            suffix.push(word_lemma(t, &d.rel));
        } else if d.rel == "neg" {
            negated = true;
        } else if !is_argument_relation(&d.rel)
            && !KNOWN_RELATIONS.contains(&d.rel.as_str())
            && !SUFFIX_RELATIONS.contains(&d.rel.as_str())
        {
            notes.push(format!("ignored dependency `{}` on `{}`", d.rel, t.word));
        }
    }
    let mut parts = prefix;
    parts.push(identifier(&s.token(head).lemma));
    parts.extend(suffix);
    (parts.join("_"), negated)
}

fn arguments(
    s: &Sentence,
    si: usize,
    head: usize,
    constants: &ConstantTable,
    sources: &mut Vec<String>,
    notes: &mut Vec<String>,
    nested: bool,
) -> Vec<Term> {
    let mut args = Vec::new();
    for d in s.dependents(head) {
        if !is_argument_relation(&d.rel) {
            continue;
        }
        // A controlled clause takes its subject from the governing clause.
        if nested && base_relation(&d.rel) == "nsubj" {
            continue;
        }
        let t = s.token(d.dep);
        if d.rel == "xcomp" {
            let (name, _) = predicate_name(s, d.dep, notes);
            let mut inner_sources = Vec::new();
            let inner = arguments(s, si, d.dep, constants, &mut inner_sources, notes, true);
            sources.push(if inner_sources.is_empty() {
                "xcomp".to_string()
            } else {
                format!("xcomp({})", inner_sources.join(","))
            });
            args.push(if inner.is_empty() { Term::constant(name) } else { Term::compound(name, inner) });
            continue;
        }
        match constants.constant(si, d.dep) {
            Some(c) => {
                sources.push(d.rel.clone());
                args.push(Term::constant(c));
            }
            None => notes.push(format!("`{}` ({}) is not a nominal and is not used as an argument", t.word, d.rel)),
        }
    }
    args
}

/// Builds the literal for sentence `si` of the story.
pub fn build_predicate(
    sentence: &Sentence,
    si: usize,
    constants: &ConstantTable,
) -> Result<BuiltPredicate, ConversionError> {
    sentence.check(si + 1)?;
    let root = sentence.root().expect("checked sentence has a root");
    let mut notes = Vec::new();
    let mut sources = Vec::new();
    let (name, negated) = predicate_name(sentence, root, &mut notes);
    let args = arguments(sentence, si, root, constants, &mut sources, &mut notes, false);
    if args.is_empty() {
        notes.push(format!("`{name}` has no arguments"));
    }
    let polarity = if negated { Polarity::Negative } else { Polarity::Positive };
    Ok(BuiltPredicate { literal: Literal { polarity, atom: Atom::new(name, args) }, sources, notes })
}

/// Past perfect: the root has an `aux` dependent `have` in the past tense.
pub fn is_past_perfect(s: &Sentence) -> bool {
    let Some(root) = s.root() else { return false };
    s.dependents(root).iter().any(|d| {
        let t = s.token(d.dep);
        d.rel == "aux" && t.lemma.eq_ignore_ascii_case("have") && t.pos == "VBD"
    })
}

/// Time-points for every sentence, indexed in document order.
///
/// Past-perfect statements take 2, 4, ... in document order; every other
/// statement and every question then continues from the largest of those,
/// in steps of two.
pub fn assign_timepoints(story: &AnnotatedStory) -> Vec<u32> {
    let sentences: Vec<(&Sentence, bool)> = story.sentences().collect();
    let mut times = vec![0; sentences.len()];
    let mut next = 2;
    for (i, (s, q)) in sentences.iter().enumerate() {
        if !q && is_past_perfect(s) {
            times[i] = next;
            next += 2;
        }
    }
    for (i, (s, q)) in sentences.iter().enumerate() {
        if *q || !is_past_perfect(s) {
            times[i] = next;
            next += 2;
        }
    }
    times
}

/// Converts an annotated story into a domain with its sessions, typing
/// statements, timed statements and questions.
pub fn convert(story: &AnnotatedStory) -> Result<(Domain, ConversionTrace), ConversionError> {
    let plan = segment_sessions(story)?;
    let sentences: Vec<(&Sentence, bool)> = story.sentences().collect();
    for (i, (s, _)) in sentences.iter().enumerate() {
        s.check(i + 1)?;
    }
    let constants = extract_entities(story);
    let times = assign_timepoints(story);

    let mut session_of = vec![0u32; sentences.len()];
    for p in &plan {
        for &i in p.statements.iter().chain(&p.questions) {
            session_of[i] = p.id;
        }
    }

    let mut parts = DomainParts {
        sessions: vec![SessionDecl { id: 0, questions: vec![] }],
        statements: constants.statements(),
        ..Default::default()
    };
    let mut trace = ConversionTrace { sentences: Vec::new(), notes: constants.notes.clone() };
    let mut question_ids = vec![0u32; sentences.len()];
    let mut next_question = 1;
    for (i, (s, is_question)) in sentences.iter().enumerate() {
        let built = build_predicate(s, i, &constants)?;
        let time = times[i];
        if *is_question {
            question_ids[i] = next_question;
            parts.questions.push(Question {
                id: next_question,
                choices: vec![Choice { literal: built.literal.clone(), time }],
            });
            next_question += 1;
        } else {
            parts.statements.push(StoryStatement {
                session: session_of[i],
                literal: built.literal.clone(),
                when: TimePoint::At(time),
            });
        }
        trace.sentences.push(SentenceTrace {
            sentence: i + 1,
            text: s.text.clone(),
            question: *is_question,
            predicate: built.literal.to_string(),
            argument_sources: built.sources,
            time,
            session: session_of[i],
            notes: built.notes,
        });
    }
    for p in &plan {
        parts.sessions.push(SessionDecl { id: p.id, questions: p.questions.iter().map(|&i| question_ids[i]).collect() });
    }
    let domain = Domain::new(parts).map_err(ConversionError::InvalidDomain)?;
    Ok((domain, trace))
}

impl fmt::Display for ConversionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sentences {
            let kind = if s.question { "question" } else { "statement" };
            writeln!(
                f,
                "{:>3} {kind:<9} s({}) t={:<3} {} [{}]",
                s.sentence,
                s.session,
                s.time,
                s.predicate,
                s.argument_sources.join(", ")
            )?;
            for n in &s.notes {
                writeln!(f, "    note: {n}")?;
            }
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tok(word: &str, lemma: &str, pos: &str, ner: EntityLabel) -> Token {
        Token { word: word.into(), lemma: lemma.into(), pos: pos.into(), ner }
    }

    fn dep(rel: &str, gov: usize, dep: usize) -> Dependency {
        Dependency { rel: rel.into(), gov, dep }
    }

    fn statement(s: Sentence) -> Block {
        Block::Statement { sentences: vec![s] }
    }

    fn questions(s: Vec<Sentence>) -> Block {
        Block::Questions { sentences: s }
    }

    /// "Bob called Mary on the phone."
    fn bob_called() -> Sentence {
        use EntityLabel::*;
        Sentence {
            text: "Bob called Mary on the phone.".into(),
            tokens: vec![
                tok("Bob", "Bob", "NNP", Person),
                tok("called", "call", "VBD", None),
                tok("Mary", "Mary", "NNP", Person),
                tok("on", "on", "IN", None),
                tok("the", "the", "DT", None),
                tok("phone", "phone", "NN", None),
                tok(".", ".", ".", None),
            ],
            deps: vec![
                dep("ROOT", 0, 2),
                dep("nsubj", 2, 1),
                dep("dobj", 2, 3),
                dep("case", 6, 4),
                dep("det", 6, 5),
                dep("nmod:on", 2, 6),
                dep("punct", 2, 7),
            ],
            corefs: vec![],
        }
    }

    /// "She left."
    fn she_left() -> Sentence {
        use EntityLabel::*;
        Sentence {
            text: "She left.".into(),
            tokens: vec![tok("She", "she", "PRP", None), tok("left", "leave", "VBD", None), tok(".", ".", ".", None)],
            deps: vec![dep("ROOT", 0, 2), dep("nsubj", 2, 1), dep("punct", 2, 3)],
            corefs: vec![],
        }
    }

    fn had_left() -> Sentence {
        use EntityLabel::*;
        let mut s = she_left();
        s.tokens.insert(1, tok("had", "have", "VBD", None));
        s.deps = vec![dep("ROOT", 0, 3), dep("nsubj", 3, 1), dep("aux", 3, 2), dep("punct", 3, 4)];
        s
    }

    #[test]
    fn call_sentence_predicate() {
        let story = AnnotatedStory { blocks: vec![statement(bob_called())] };
        let table = extract_entities(&story);
        let built = build_predicate(&bob_called(), 0, &table).unwrap();
        assert_eq!(built.literal.to_string(), "call(bob,mary,phone1)");
        assert_eq!(built.sources, ["nsubj", "dobj", "nmod:on"]);
    }

    #[test]
    fn typing_from_entities_and_nouns() {
        let story = AnnotatedStory { blocks: vec![statement(bob_called())] };
        let text: Vec<String> = extract_entities(&story).statements().iter().map(|s| s.to_string()).collect();
        assert_eq!(
            text,
            [
                "s(0) :: is_person(bob) at always.",
                "s(0) :: is_person(mary) at always.",
                "s(0) :: is_phone(phone1) at always."
            ]
        );
    }

    #[test]
    fn unresolved_pronouns_get_numbered_persons() {
        let story = AnnotatedStory { blocks: vec![statement(she_left()), statement(she_left())] };
        let table = extract_entities(&story);
        assert_eq!(table.constant(0, 1), Some("person1"));
        assert_eq!(table.constant(1, 1), Some("person2"));
        assert_eq!(table.notes.len(), 2);
    }

    #[test]
    fn no_nominals_no_typing() {
        use EntityLabel::*;
        let s = Sentence {
            text: "Run.".into(),
            tokens: vec![tok("Run", "run", "VB", None), tok(".", ".", ".", None)],
            deps: vec![dep("ROOT", 0, 1), dep("punct", 1, 2)],
            corefs: vec![],
        };
        let story = AnnotatedStory { blocks: vec![statement(s.clone())] };
        let table = extract_entities(&story);
        assert!(table.statements().is_empty());
        let built = build_predicate(&s, 0, &table).unwrap();
        assert_eq!(built.literal.to_string(), "run");
        assert!(built.notes.iter().any(|n| n.contains("no arguments")));
    }

    #[test]
    fn segmentation_rules() {
        let one = AnnotatedStory { blocks: vec![statement(she_left())] };
        assert_eq!(segment_sessions(&one).unwrap(), [SessionPlan { id: 1, statements: vec![0], questions: vec![] }]);

        let two = AnnotatedStory {
            blocks: vec![
                statement(she_left()),
                questions(vec![she_left()]),
                statement(she_left()),
                questions(vec![she_left(), she_left()]),
            ],
        };
        assert_eq!(
            segment_sessions(&two).unwrap(),
            [
                SessionPlan { id: 1, statements: vec![0], questions: vec![1] },
                SessionPlan { id: 2, statements: vec![2], questions: vec![3, 4] },
            ]
        );

        let q_first = AnnotatedStory { blocks: vec![questions(vec![she_left()])] };
        assert_eq!(segment_sessions(&q_first), Err(ConversionError::QuestionsFirst));
        assert_eq!(segment_sessions(&AnnotatedStory::default()), Err(ConversionError::EmptyStory));
    }

    #[test]
    fn timepoint_lists() {
        let single = AnnotatedStory { blocks: vec![statement(she_left())] };
        assert_eq!(assign_timepoints(&single), [2]);
        let perfect = AnnotatedStory { blocks: vec![statement(had_left()), statement(had_left())] };
        assert_eq!(assign_timepoints(&perfect), [2, 4]);
        let mixed = AnnotatedStory {
            blocks: vec![statement(she_left()), statement(had_left()), questions(vec![she_left()])],
        };
        assert_eq!(assign_timepoints(&mixed), [4, 2, 6]);
    }

    #[test]
    fn statement_and_question_convert() {
        let story = AnnotatedStory { blocks: vec![statement(she_left()), questions(vec![she_left()])] };
        let (d, trace) = convert(&story).unwrap();
        assert_eq!(d.sessions().len(), 2);
        assert_eq!(d.statements().iter().filter(|s| s.session == 0).count(), 2);
        let timed: Vec<String> = d.statements().iter().filter(|s| s.session == 1).map(|s| s.to_string()).collect();
        assert_eq!(timed, ["s(1) :: leave(person1) at 2."]);
        assert_eq!(d.questions()[0].to_string(), "q(1) ?? leave(person2) at 4.");
        assert_eq!(trace.sentences.len(), 2);
    }

    #[test]
    fn malformed_dependencies_rejected() {
        let mut s = she_left();
        s.deps.push(dep("ROOT", 0, 1));
        let story = AnnotatedStory { blocks: vec![statement(s)] };
        assert!(matches!(convert(&story), Err(ConversionError::InvalidSentence { sentence: 1, .. })));
        let mut s = she_left();
        s.deps[1] = dep("nsubj", 2, 9);
        let story = AnnotatedStory { blocks: vec![statement(s)] };
        assert!(matches!(convert(&story), Err(ConversionError::InvalidSentence { .. })));
    }

    #[test]
    fn empty_story_is_an_error() {
        assert_eq!(convert(&AnnotatedStory::default()).unwrap_err(), ConversionError::EmptyStory);
    }
}
