//! Reading CoreNLP server output, and a small blocking client for it.

use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use super::{AnnotatedStory, Block, Dependency, EntityLabel, Mention, Sentence, Token};

/// Annotators requested from the server.
pub const ANNOTATORS: &str = "tokenize,ssplit,pos,lemma,ner,depparse,coref";

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("no text to annotate")]
    EmptyText,
    #[error("annotation service unreachable: {0}")]
    Network(String),
    #[error("annotation service timed out")]
    Timeout,
    #[error("annotation service answered with status {0}")]
    Status(u16),
    #[error("malformed annotation response: {0}")]
    Malformed(String),
}

impl AnnotationError {
    /// Whether sending the same request again may succeed.
    pub fn is_retryable(&self) -> bool {
        match self {
            AnnotationError::Network(_) | AnnotationError::Timeout => true,
            AnnotationError::Status(code) => *code == 429 || *code >= 500,
            AnnotationError::EmptyText | AnnotationError::Malformed(_) => false,
        }
    }
}

#[derive(Deserialize)]
struct Response {
    sentences: Vec<RawSentence>,
    #[serde(default)]
    corefs: std::collections::BTreeMap<String, Vec<RawMention>>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawSentence {
    tokens: Vec<RawToken>,
    basic_dependencies: Vec<RawDependency>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawToken {
    word: String,
    #[serde(default)]
    original_text: Option<String>,
    lemma: String,
    pos: String,
    #[serde(default)]
    ner: Option<String>,
    #[serde(default)]
    after: Option<String>,
}

#[derive(Deserialize)]
struct RawDependency {
    dep: String,
    governor: usize,
    dependent: usize,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawMention {
    sent_num: usize,
    start_index: usize,
    end_index: usize,
    head_index: usize,
}

/// Builds an annotated story from a CoreNLP JSON response. Consecutive
/// sentences ending in `?` form one question block.
pub fn parse_response(json: &str) -> Result<AnnotatedStory, AnnotationError> {
    let response: Response = serde_json::from_str(json).map_err(|e| AnnotationError::Malformed(e.to_string()))?;
    let mut sentences: Vec<Sentence> = response
        .sentences
        .into_iter()
        .map(|s| {
            let text: String = s
                .tokens
                .iter()
                .map(|t| format!("{}{}", t.original_text.as_deref().unwrap_or(&t.word), t.after.as_deref().unwrap_or(" ")))
                .collect();
            Sentence {
                text: text.trim().to_string(),
                tokens: s
                    .tokens
                    .into_iter()
                    .map(|t| Token {
                        ner: EntityLabel::from_tag(t.ner.as_deref().unwrap_or("O")),
                        word: t.word,
                        lemma: t.lemma,
                        pos: t.pos,
                    })
                    .collect(),
                deps: s
                    .basic_dependencies
                    .into_iter()
                    .map(|d| Dependency { rel: d.dep, gov: d.governor, dep: d.dependent })
                    .collect(),
                corefs: Vec::new(),
            }
        })
        .collect();

    for (chain, mentions) in response.corefs {
        let chain: u32 = chain.parse().map_err(|_| AnnotationError::Malformed(format!("chain id `{chain}`")))?;
        for m in mentions {
            let s = m
                .sent_num
                .checked_sub(1)
                .and_then(|i| sentences.get_mut(i))
                .ok_or_else(|| AnnotationError::Malformed(format!("mention in missing sentence {}", m.sent_num)))?;
            s.corefs.push(Mention { chain, start: m.start_index, end: m.end_index, head: m.head_index });
        }
    }
    for s in &mut sentences {
        s.corefs.sort_by_key(|m| (m.start, m.chain));
    }

    let mut blocks: Vec<Block> = Vec::new();
    for s in sentences {
        let question = s.tokens.last().is_some_and(|t| t.word == "?");
        match (blocks.last_mut(), question) {
            (Some(Block::Questions { sentences }), true) | (Some(Block::Statement { sentences }), false) => {
                sentences.push(s)
            }
            (_, true) => blocks.push(Block::Questions { sentences: vec![s] }),
            (_, false) => blocks.push(Block::Statement { sentences: vec![s] }),
        }
    }
    Ok(AnnotatedStory { blocks })
}

/// Blocking client for a CoreNLP server.
pub struct CoreNlpClient {
    endpoint: String,
    http: reqwest::blocking::Client,
}

impl CoreNlpClient {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Result<CoreNlpClient, AnnotationError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| AnnotationError::Network(e.to_string()))?;
        Ok(CoreNlpClient { endpoint: endpoint.into(), http })
    }

    pub fn annotate(&self, text: &str) -> Result<AnnotatedStory, AnnotationError> {
        if text.trim().is_empty() {
            return Err(AnnotationError::EmptyText);
        }
        let properties = serde_json::json!({ "annotators": ANNOTATORS, "outputFormat": "json" }).to_string();
        let response = self
            .http
            .post(&self.endpoint)
            .query(&[("properties", properties)])
            .body(text.to_string())
            .send()
            .map_err(classify)?;
        let status = response.status();
        if !status.is_success() {
            return Err(AnnotationError::Status(status.as_u16()));
        }
        let body = response.text().map_err(classify)?;
        parse_response(&body)
    }
}

fn classify(e: reqwest::Error) -> AnnotationError {
    if e.is_timeout() {
        AnnotationError::Timeout
    } else if e.is_decode() || e.is_body() {
        AnnotationError::Malformed(e.to_string())
    } else {
        AnnotationError::Network(e.to_string())
    }
}

/// Annotates `text` with the server at `endpoint`, waiting up to 30 seconds.
pub fn fetch_annotations(text: &str, endpoint: &str) -> Result<AnnotatedStory, AnnotationError> {
    CoreNlpClient::new(endpoint, Duration::from_secs(30))?.annotate(text)
}
