//! Text layer for STAR domain files: a hand-written lexer and recursive
//! descent parser with position-accurate diagnostics, plus the pretty-printer.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::syntax::{
    Atom, Choice, Domain, DomainError, DomainParts, FluentDecl, Item, Literal, Polarity, Priority,
    Question, Rule, RuleBody, RuleKind, RuleLabel, SessionDecl, StoryStatement, Term, TimePoint,
};

const RESERVED: &[&str] = &["at", "always", "causes", "implies", "true"];

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub hint: Option<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)?;
        if let Some(hint) = &self.hint {
            write!(f, " (hint: {hint})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParseResult {
    pub domain: Option<Domain>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseResult {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn into_result(self) -> Result<Domain, ParseError> {
        match self.domain {
            Some(d) => Ok(d),
            None => Err(ParseError { diagnostics: self.diagnostics }),
        }
    }
}

/// A failed parse, carrying every diagnostic that was produced.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().filter(|d| d.severity == Severity::Error).enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Which clause families a pane accepts.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Pane {
    Full,
    Story,
    Knowledge,
}

pub fn parse_domain(source: &str) -> ParseResult {
    parse_with(source, Pane::Full)
}

/// Accepts only session, statement and question clauses.
pub fn parse_story_only(source: &str) -> ParseResult {
    parse_with(source, Pane::Story)
}

/// Accepts only fluent, rule and priority clauses.
pub fn parse_knowledge_only(source: &str) -> ParseResult {
    parse_with(source, Pane::Knowledge)
}

pub fn parse_with(source: &str, pane: Pane) -> ParseResult {
    let mut diagnostics = Vec::new();
    let tokens = match lex(source) {
        Ok(t) => t,
        Err(d) => {
            return ParseResult { domain: None, diagnostics: vec![d] };
        }
    };
    let mut parser = Parser { tokens, pos: 0, pane, parts: DomainParts::default(), spans: Spans::default() };
    parser.run(&mut diagnostics);

    let Parser { parts, spans, .. } = parser;

    for (i, q) in parts.questions.iter().enumerate() {
        if !parts.sessions.iter().any(|s| s.questions.contains(&q.id)) && pane != Pane::Knowledge {
            let (line, column) = spans.questions[i];
            diagnostics.push(Diagnostic {
                severity: Severity::Warning,
                line,
                column,
                message: format!("question q({}) is not attached to any session", q.id),
                hint: Some("list it in a `session(...)` clause to have it answered".into()),
            });
        }
    }

    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        return ParseResult { domain: None, diagnostics };
    }
    match Domain::new(parts) {
        Ok(domain) => ParseResult { domain: Some(domain), diagnostics },
        Err(errors) => {
            diagnostics.extend(errors.iter().map(|e| semantic_diagnostic(e, &spans)));
            diagnostics.sort_by_key(|d| (d.line, d.column));
            ParseResult { domain: None, diagnostics }
        }
    }
}

fn semantic_diagnostic(err: &DomainError, spans: &Spans) -> Diagnostic {
    let (line, column) = match err.item() {
        Item::Session(i) => spans.sessions[i],
        Item::Statement(i) => spans.statements[i],
        Item::Question(i) => spans.questions[i],
        Item::Fluent(i) => spans.fluents[i],
        Item::Rule(i) => spans.rules[i],
        Item::Priority(i) => spans.priorities[i],
    };
    Diagnostic { severity: Severity::Error, line, column, message: err.to_string(), hint: Some(err.hint()) }
}

/// Pretty-prints a domain, one clause per line, story before knowledge.
pub fn format_domain(domain: &Domain) -> String {
    let mut groups: Vec<Vec<String>> = Vec::new();
    groups.push(domain.sessions().iter().map(ToString::to_string).collect());

    let mut block = Vec::new();
    let mut prev_typing = None;
    for st in domain.statements() {
        let typing = st.session == 0;
        if prev_typing.is_some_and(|p| p != typing) {
            groups.push(std::mem::take(&mut block));
        }
        prev_typing = Some(typing);
        block.push(st.to_string());
    }
    groups.push(block);

    groups.push(domain.questions().iter().map(ToString::to_string).collect());
    if !domain.fluents().is_empty() {
        let list: Vec<String> = domain.fluents().iter().map(ToString::to_string).collect();
        groups.push(vec![format!("fluents([{}]).", list.join(", "))]);
    }
    groups.push(domain.rules().iter().map(ToString::to_string).collect());
    groups.push(domain.priorities().iter().map(ToString::to_string).collect());

    let mut out = String::new();
    for group in groups.into_iter().filter(|g| !g.is_empty()) {
        if !out.is_empty() {
            out.push('\n');
        }
        for line in group {
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}

#[derive(Default)]
struct Spans {
    sessions: Vec<(usize, usize)>,
    statements: Vec<(usize, usize)>,
    questions: Vec<(usize, usize)>,
    fluents: Vec<(usize, usize)>,
    rules: Vec<(usize, usize)>,
    priorities: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Lower(String),
    Upper(String),
    Int(u32),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Dot,
    Minus,
    ColonColon,
    QueryQuery,
    GtGt,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Lower(s) | Tok::Upper(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::ColonColon => f.write_str("`::`"),
            Tok::QueryQuery => f.write_str("`??`"),
            Tok::GtGt => f.write_str("`>>`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(source: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    let err = |line, column, message: String, hint: &str| Diagnostic {
        severity: Severity::Error,
        line,
        column,
        message,
        hint: Some(hint.to_string()),
    };

    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                advance(1, &mut i, &mut col);
                continue;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            _ => {}
        }

        let two = chars.get(i + 1).copied();
        let tok = match (c, two) {
            (':', Some(':')) => {
                advance(2, &mut i, &mut col);
                Tok::ColonColon
            }
            ('?', Some('?')) => {
                advance(2, &mut i, &mut col);
                Tok::QueryQuery
            }
            ('>', Some('>')) => {
                advance(2, &mut i, &mut col);
                Tok::GtGt
            }
            ('(', _) => {
                advance(1, &mut i, &mut col);
                Tok::LParen
            }
            (')', _) => {
                advance(1, &mut i, &mut col);
                Tok::RParen
            }
            ('[', _) => {
                advance(1, &mut i, &mut col);
                Tok::LBracket
            }
            (']', _) => {
                advance(1, &mut i, &mut col);
                Tok::RBracket
            }
            (',', _) => {
                advance(1, &mut i, &mut col);
                Tok::Comma
            }
            (';', _) => {
                advance(1, &mut i, &mut col);
                Tok::Semi
            }
            ('-', _) => {
                advance(1, &mut i, &mut col);
                Tok::Minus
            }
            ('.', next) => {
                if next.is_some_and(|n| !n.is_whitespace() && n != '%') {
                    return Err(err(
                        line,
                        col,
                        "clause terminator `.` must be followed by whitespace or end of input".into(),
                        "put each clause on its own line",
                    ));
                }
                advance(1, &mut i, &mut col);
                Tok::Dot
            }
            (c, _) if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance(1, &mut i, &mut col);
                }
                let text: String = chars[start..i].iter().collect();
                let n = text.parse::<u32>().map_err(|_| {
                    err(start_line, start_col, format!("number `{text}` is too large"), "use a smaller integer")
                })?;
                Tok::Int(n)
            }
            (c, _) if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    advance(1, &mut i, &mut col);
                }
                let text: String = chars[start..i].iter().collect();
                if c.is_ascii_lowercase() {
                    Tok::Lower(text)
                } else {
                    Tok::Upper(text)
                }
            }
            (c, _) => {
                return Err(err(
                    line,
                    col,
                    format!("unexpected character `{c}`"),
                    "STAR uses `::`, `??`, `>>`, `-`, `,`, `;` and `.` as punctuation",
                ));
            }
        };
        tokens.push(Token { tok, line: start_line, column: start_col });
    }
    tokens.push(Token { tok: Tok::Eof, line, column: col });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    pane: Pane,
    parts: DomainParts,
    spans: Spans,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.tokens[self.pos];
        (t.line, t.column)
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>, hint: impl Into<String>) -> Diagnostic {
        let (line, column) = self.here();
        Diagnostic { severity: Severity::Error, line, column, message: message.into(), hint: Some(hint.into()) }
    }

    fn expect(&mut self, want: Tok, hint: &str) -> PResult<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else if *self.peek() == Tok::Eof && want == Tok::Dot {
            Err(self.error_here("unterminated clause: expected `.`", hint))
        } else {
            Err(self.error_here(format!("expected {want}, found {}", self.peek()), hint))
        }
    }

    fn expect_keyword(&mut self, word: &str, hint: &str) -> PResult<()> {
        match self.peek() {
            Tok::Lower(w) if w == word => {
                self.bump();
                Ok(())
            }
            other => Err(self.error_here(format!("expected `{word}`, found {other}"), hint)),
        }
    }

    fn expect_int(&mut self, hint: &str) -> PResult<u32> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            other => Err(self.error_here(format!("expected a non-negative integer, found {other}"), hint)),
        }
    }

    /// `f(N)` for a fixed functor.
    fn numbered(&mut self, functor: &str) -> PResult<u32> {
        self.expect_keyword(functor, "")?;
        self.expect(Tok::LParen, "write the number in parentheses")?;
        let n = self.expect_int("identifiers like s(1), q(2), c(01) take a number")?;
        self.expect(Tok::RParen, "close the parenthesis")?;
        Ok(n)
    }

    fn run(&mut self, diagnostics: &mut Vec<Diagnostic>) {
        while *self.peek() != Tok::Eof {
            let start = self.pos;
            if let Err(d) = self.clause() {
                diagnostics.push(d);
                self.recover(start);
            }
        }
    }

    /// Skips past the next clause terminator.
    fn recover(&mut self, start: usize) {
        if self.pos == start {
            self.bump();
        }
        while !matches!(self.peek(), Tok::Dot | Tok::Eof) {
            self.bump();
        }
        if *self.peek() == Tok::Dot {
            self.bump();
        }
    }

    fn clause(&mut self) -> PResult<()> {
        let at = self.here();
        let head = self.peek().clone();
        let next_is_paren = *self.peek_at(1) == Tok::LParen;
        let after_label = self.peek_at(4).clone();
        match head {
            Tok::Lower(w) if w == "session" && next_is_paren => {
                self.require_pane(Pane::Story)?;
                let s = self.session_clause()?;
                self.parts.sessions.push(s);
                self.spans.sessions.push(at);
            }
            Tok::Lower(w) if w == "fluents" && next_is_paren => {
                self.require_pane(Pane::Knowledge)?;
                let decls = self.fluents_clause()?;
                for d in decls {
                    self.parts.fluents.push(d);
                    self.spans.fluents.push(at);
                }
            }
            Tok::Lower(w) if w == "s" && next_is_paren && after_label == Tok::ColonColon => {
                self.require_pane(Pane::Story)?;
                let st = self.statement_clause()?;
                self.parts.statements.push(st);
                self.spans.statements.push(at);
            }
            Tok::Lower(w) if w == "q" && next_is_paren && after_label == Tok::QueryQuery => {
                self.require_pane(Pane::Story)?;
                let q = self.question_clause()?;
                self.parts.questions.push(q);
                self.spans.questions.push(at);
            }
            Tok::Lower(w) if (w == "c" || w == "p") && next_is_paren && after_label == Tok::ColonColon => {
                self.require_pane(Pane::Knowledge)?;
                let r = self.rule_clause()?;
                self.parts.rules.push(r);
                self.spans.rules.push(at);
            }
            Tok::Lower(w) if (w == "c" || w == "p") && next_is_paren && after_label == Tok::GtGt => {
                self.require_pane(Pane::Knowledge)?;
                let p = self.priority_clause()?;
                self.parts.priorities.push(p);
                self.spans.priorities.push(at);
            }
            Tok::Dot => {
                return Err(self.error_here("empty clause", "remove the stray `.`"));
            }
            other => {
                return Err(self.error_here(
                    format!("unknown clause starting with {other}"),
                    "clauses are session(...), s(N) ::, q(N) ??, fluents([...]), c(N)/p(N) :: rules, or c(N) >> c(M)",
                ));
            }
        }
        Ok(())
    }

    fn require_pane(&self, family: Pane) -> PResult<()> {
        match (self.pane, family) {
            (Pane::Story, Pane::Knowledge) => Err(self.error_here(
                "background-knowledge clause in story pane",
                "move fluents, rules and priorities to the background-knowledge pane",
            )),
            (Pane::Knowledge, Pane::Story) => Err(self.error_here(
                "story clause in background-knowledge pane",
                "move sessions, statements and questions to the story pane",
            )),
            _ => Ok(()),
        }
    }

    fn session_clause(&mut self) -> PResult<SessionDecl> {
        self.expect_keyword("session", "")?;
        self.expect(Tok::LParen, "write session(s(N),[q(..)],all).")?;
        let id = self.numbered("s")?;
        self.expect(Tok::Comma, "separate the session id and its question list with `,`")?;
        self.expect(Tok::LBracket, "the question list is written in brackets, e.g. [q(1),q(2)]")?;
        let mut questions = Vec::new();
        if *self.peek() != Tok::RBracket {
            loop {
                questions.push(self.numbered("q")?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBracket, "close the question list with `]`")?;
        self.expect(Tok::Comma, "the visibility token `all` follows the question list")?;
        self.expect_keyword("all", "the only supported visibility is `all`")?;
        self.expect(Tok::RParen, "close the session clause with `)`")?;
        self.expect(Tok::Dot, "end the clause with `.`")?;
        Ok(SessionDecl { id, questions })
    }

    fn statement_clause(&mut self) -> PResult<StoryStatement> {
        let session = self.numbered("s")?;
        self.expect(Tok::ColonColon, "statements read `s(N) :: Literal at T.`")?;
        let literal = self.literal()?;
        let when = self.time_point(true)?;
        self.expect(Tok::Dot, "end the statement with `.`")?;
        Ok(StoryStatement { session, literal, when })
    }

    fn question_clause(&mut self) -> PResult<Question> {
        let id = self.numbered("q")?;
        self.expect(Tok::QueryQuery, "questions read `q(N) ?? Literal at T; Literal at T.`")?;
        let mut choices = Vec::new();
        loop {
            let literal = self.literal()?;
            let time = match self.time_point(false)? {
                TimePoint::At(t) => t,
                TimePoint::Always => unreachable!("always rejected for questions"),
            };
            choices.push(Choice { literal, time });
            if *self.peek() == Tok::Semi {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::Dot, "separate choices with `;` and end the question with `.`")?;
        Ok(Question { id, choices })
    }

    fn time_point(&mut self, allow_always: bool) -> PResult<TimePoint> {
        self.expect_keyword("at", "a literal is followed by `at T`")?;
        match self.peek().clone() {
            Tok::Int(t) => {
                self.bump();
                Ok(TimePoint::At(t))
            }
            Tok::Lower(w) if w == "always" && allow_always => {
                self.bump();
                Ok(TimePoint::Always)
            }
            Tok::Lower(w) if w == "always" => {
                Err(self.error_here("question choices need a numeric time-point", "write e.g. `at 8`"))
            }
            other => Err(self.error_here(
                format!("expected a time-point, found {other}"),
                "time-points are non-negative integers or `always`",
            )),
        }
    }

    fn fluents_clause(&mut self) -> PResult<Vec<FluentDecl>> {
        self.expect_keyword("fluents", "")?;
        self.expect(Tok::LParen, "write fluents([name(_,_), ...]).")?;
        self.expect(Tok::LBracket, "the fluent list is written in brackets")?;
        let mut decls = Vec::new();
        if *self.peek() != Tok::RBracket {
            loop {
                let name = self.predicate_name()?;
                let mut arity = 0;
                if *self.peek() == Tok::LParen {
                    self.bump();
                    loop {
                        match self.peek() {
                            Tok::Upper(_) => {
                                self.bump();
                                arity += 1;
                            }
                            other => {
                                return Err(self.error_here(
                                    format!("fluent arguments are placeholders like `_`, found {other}"),
                                    "declare the shape only, e.g. is_ringing(_)",
                                ))
                            }
                        }
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.expect(Tok::RParen, "close the argument list")?;
                }
                decls.push(FluentDecl { name, arity });
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBracket, "close the fluent list with `]`")?;
        self.expect(Tok::RParen, "close fluents( with `)`")?;
        self.expect(Tok::Dot, "end the clause with `.`")?;
        Ok(decls)
    }

    fn rule_label(&mut self) -> PResult<RuleLabel> {
        let kind = match self.peek() {
            Tok::Lower(w) if w == "c" => RuleKind::Causal,
            Tok::Lower(w) if w == "p" => RuleKind::Property,
            other => {
                return Err(self.error_here(
                    format!("expected a rule label, found {other}"),
                    "rule labels are c(N) for causal and p(N) for property rules",
                ))
            }
        };
        let functor = kind.prefix().to_string();
        let index = self.numbered(&functor)?;
        Ok(RuleLabel { kind, index })
    }

    fn rule_clause(&mut self) -> PResult<Rule> {
        let label = self.rule_label()?;
        self.expect(Tok::ColonColon, "rules read `c(N) :: Body causes Head.`")?;

        let body = if matches!(self.peek(), Tok::Lower(w) if w == "true")
            && matches!(self.peek_at(1), Tok::Lower(w) if w == "causes" || w == "implies")
        {
            self.bump();
            RuleBody::True
        } else {
            let mut lits = vec![self.literal()?];
            while *self.peek() == Tok::Comma {
                self.bump();
                lits.push(self.literal()?);
            }
            RuleBody::Literals(lits)
        };

        let kind = match self.peek().clone() {
            Tok::Lower(w) if w == "causes" => RuleKind::Causal,
            Tok::Lower(w) if w == "implies" => RuleKind::Property,
            other => {
                return Err(self.error_here(
                    format!("expected `causes` or `implies`, found {other}"),
                    "separate body literals with `,` and end the body with `causes` or `implies`",
                ))
            }
        };
        if kind != label.kind {
            return Err(self.error_here(
                format!("rule {label} must use `{}`", label.kind.connective()),
                "c(N) rules use `causes`; p(N) rules use `implies`",
            ));
        }
        self.bump();
        let head = self.literal()?;
        if *self.peek() == Tok::Comma {
            return Err(self.error_here(
                "rule must have exactly one head literal",
                "split the rule into one rule per head literal",
            ));
        }
        self.expect(Tok::Dot, "end the rule with `.`")?;
        Ok(Rule { label, body, head })
    }

    fn priority_clause(&mut self) -> PResult<Priority> {
        let stronger = self.rule_label()?;
        self.expect(Tok::GtGt, "priorities read `c(N) >> c(M).`")?;
        let weaker = self.rule_label()?;
        self.expect(Tok::Dot, "end the priority with `.`")?;
        Ok(Priority { stronger, weaker })
    }

    fn predicate_name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Lower(w) if RESERVED.contains(&w.as_str()) => Err(self.error_here(
                format!("`{w}` is a reserved word and cannot name a predicate"),
                "pick another predicate name",
            )),
            Tok::Lower(w) => {
                self.bump();
                Ok(w)
            }
            other => Err(self.error_here(
                format!("expected a predicate name, found {other}"),
                "predicate names start with a lowercase letter",
            )),
        }
    }

    fn literal(&mut self) -> PResult<Literal> {
        let polarity = if *self.peek() == Tok::Minus {
            self.bump();
            if *self.peek() == Tok::Minus {
                return Err(self.error_here("double negation is not allowed", "drop both `-` signs"));
            }
            Polarity::Negative
        } else {
            Polarity::Positive
        };
        let name = self.predicate_name()?;
        let args = if *self.peek() == Tok::LParen { self.arguments()? } else { Vec::new() };
        Ok(Literal { polarity, atom: Atom { name, args } })
    }

    fn arguments(&mut self) -> PResult<Vec<Term>> {
        self.expect(Tok::LParen, "")?;
        let mut args = vec![self.term()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.term()?);
        }
        self.expect(Tok::RParen, "close the argument list with `)`")?;
        Ok(args)
    }

    fn term(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Upper(name) => {
                self.bump();
                Ok(Term::Variable { name })
            }
            Tok::Lower(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    let args = self.arguments()?;
                    Ok(Term::Compound { functor: name, args })
                } else {
                    Ok(Term::Constant { name })
                }
            }
            Tok::Int(n) => Err(self.error_here(
                format!("number `{n}` is not a valid argument"),
                "constants are lowercase identifiers such as phone1",
            )),
            other => Err(self.error_here(
                format!("expected an argument, found {other}"),
                "arguments are constants, Variables, or compound terms like do(favor1)",
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const STORY: &str = include_str!("../fixtures/phone_story.star");
    const KNOWLEDGE: &str = include_str!("../fixtures/phone_knowledge.star");

    #[test]
    fn parses_the_phone_story() {
        let res = parse_domain(STORY);
        assert!(res.diagnostics.is_empty(), "{:?}", res.diagnostics);
        let d = res.domain.unwrap();
        assert_eq!(d.sessions().len(), 4);
        assert_eq!(d.statements().len(), 10);
        assert_eq!(d.questions().len(), 4);
        assert_eq!(d.statements()[5].to_string(), "s(2) :: -do_want(mary,answer(phone1)) at 12.");
    }

    #[test]
    fn parses_the_phone_knowledge() {
        let d = parse_domain(KNOWLEDGE).into_result().unwrap();
        assert_eq!(d.fluents().len(), 6);
        assert_eq!(d.rules().len(), 7);
        assert_eq!(d.priorities().len(), 1);
        assert_eq!(
            d.rules()[0].to_string(),
            "c(01) :: have_ask(P1,P2,S) causes has_asked_for(P1,P2,S)."
        );
    }

    #[test]
    fn empty_source_is_an_empty_domain() {
        let res = parse_domain("");
        assert!(res.diagnostics.is_empty());
        assert!(res.domain.unwrap().is_empty());
        assert!(parse_story_only("  \n\t \n").domain.unwrap().is_empty());
    }

    #[test]
    fn two_heads_rejected_with_hint() {
        let res = parse_domain("c(01) :: a causes b, c.");
        assert!(res.domain.is_none());
        let d = &res.diagnostics[0];
        assert_eq!(d.message, "rule must have exactly one head literal");
        assert_eq!((d.line, d.column), (1, 20));
        assert!(d.hint.as_deref().is_some_and(|h| !h.is_empty()));
    }

    #[test]
    fn story_pane_rejects_knowledge() {
        let res = parse_story_only("fluents([is_ringing(_)]).");
        assert_eq!(res.diagnostics[0].message, "background-knowledge clause in story pane");
        let story_lines: String = STORY.lines().take(22).collect::<Vec<_>>().join("\n");
        assert!(parse_story_only(&story_lines).domain.is_some());
    }

    #[test]
    fn unterminated_clause() {
        let res = parse_domain("session(s(0),[],all)");
        assert_eq!(res.diagnostics[0].message, "unterminated clause: expected `.`");
    }

    #[test]
    fn unknown_session_reported_at_statement() {
        let res = parse_domain("session(s(0),[],all).\n\ns(1) :: call(bob) at 3.\n");
        let d = &res.diagnostics[0];
        assert_eq!(d.line, 3);
        assert_eq!(d.column, 1);
        assert!(d.message.contains("undeclared session s(1)"));
    }

    #[test]
    fn duplicate_label_reported() {
        let res = parse_domain("c(1) :: a causes b.\nc(01) :: b causes c.\n");
        assert!(res.diagnostics[0].message.contains("used more than once"));
        assert_eq!(res.diagnostics[0].line, 2);
    }

    #[test]
    fn wrong_connective_rejected() {
        let res = parse_domain("c(1) :: a implies b.");
        assert!(res.diagnostics[0].message.contains("must use `causes`"));
    }

    #[test]
    fn unknown_clause_is_an_error() {
        let res = parse_domain("holds(x).");
        assert_eq!(res.diagnostics[0].severity, Severity::Error);
        assert!(res.diagnostics[0].message.starts_with("unknown clause"));
    }

    #[test]
    fn recovers_and_reports_several_errors() {
        let res = parse_domain("c(1) :: a causes b, c.\nfoo.\nc(2) :: x causes y.\n");
        assert_eq!(res.errors().count(), 2);
    }

    #[test]
    fn comments_are_discarded() {
        let d = parse_domain("% background\nc(1) :: a causes b. % trailing\n").into_result().unwrap();
        assert_eq!(d.rules().len(), 1);
    }

    #[test]
    fn multi_line_rule_bodies() {
        let src = "p(11) :: has_asked_for(P1,P2,S), has_agreed_to(P2,S), apologize(P2,P1)\n         implies -carried_out(S).\n";
        let d = parse_domain(src).into_result().unwrap();
        assert_eq!(d.rules()[0].body.literals().len(), 3);
    }

    #[test]
    fn format_of_single_priority() {
        let d = parse_domain("c(41) :: a causes b.\nc(42) :: c causes -b.\nc(42) >> c(41).")
            .into_result()
            .unwrap();
        let text = format_domain(&d);
        assert!(text.ends_with("\nc(42) >> c(41).\n"));
        let only = Domain::new(DomainParts {
            rules: d.rules().to_vec(),
            priorities: d.priorities().to_vec(),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(format_domain(&only).lines().last(), Some("c(42) >> c(41)."));
    }

    #[test]
    fn format_is_stable_and_round_trips() {
        let src = format!("{STORY}\n{KNOWLEDGE}");
        let d = parse_domain(&src).into_result().unwrap();
        let once = format_domain(&d);
        let reparsed = parse_domain(&once).into_result().unwrap();
        assert_eq!(reparsed, d);
        assert_eq!(format_domain(&reparsed), once);
        assert_eq!(format_domain(&Domain::empty()), "");
    }

    #[test]
    fn unattached_question_warns() {
        let res = parse_domain("session(s(0),[],all).\nq(1) ?? a at 2.\n");
        assert!(res.domain.is_some());
        assert_eq!(res.diagnostics[0].severity, Severity::Warning);
    }

    #[test]
    fn numbers_are_not_terms() {
        let res = parse_domain("c(1) :: a(3) causes b.");
        assert!(res.diagnostics[0].message.contains("not a valid argument"));
    }
}
