//! The comprehension run shared by the command line and the job worker, so
//! both paths print the same bytes for the same input.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use star_core::parser::{parse_domain, ParseError};
use star_core::reasoner::{
    filter_model, read_story, render_story, ModelFilter, ProgressEvent, ReaderOptions, ReasonerError, SessionReport,
};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunOptions {
    #[serde(flatten)]
    pub reader: ReaderOptions,
    /// Model row filters by name, e.g. `changing-only` or `min-frequency=3`.
    #[serde(serialize_with = "filters_out", deserialize_with = "filters_in")]
    pub filters: Vec<ModelFilter>,
}

fn filters_out<S: Serializer>(filters: &[ModelFilter], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(filters.iter().map(ToString::to_string))
}

fn filters_in<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<ModelFilter>, D::Error> {
    let names: Vec<String> = Vec::deserialize(d)?;
    names.iter().map(|n| n.parse().map_err(serde::de::Error::custom)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    /// The plain-text report, as printed by `star read`.
    pub raw: String,
    pub reports: Vec<SessionReport>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Reason(#[from] ReasonerError),
}

/// Parses, reads every session and renders the result.
pub fn run_domain(
    text: &str,
    options: &RunOptions,
    progress: &mut dyn FnMut(ProgressEvent),
) -> Result<RunOutput, RunError> {
    let domain = parse_domain(text).into_result()?;
    let mut reports = read_story(&domain, &options.reader, progress)?;
    if !options.filters.is_empty() {
        for r in &mut reports {
            r.model = filter_model(&r.model, &options.filters);
        }
    }
    let raw = render_story(&reports, &options.reader);
    Ok(RunOutput { raw, reports })
}
