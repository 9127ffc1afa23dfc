//! The comprehension model: a partial truth assignment over ground concepts
//! on the story time-line, plus its display filters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::syntax::{Atom, Literal, Polarity, Signature};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    True,
    False,
    Unknown,
}

/// Timeline coloring class of a predicate.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Action,
    Fluent,
    Constant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelRow {
    pub atom: Atom,
    /// Rendered form of `atom`, for consumers that do not parse terms.
    pub text: String,
    pub signature: String,
    pub class: Classification,
    /// One entry per time-point `0..=horizon`.
    pub values: Vec<Truth>,
    /// Whether the value at each time-point was read from the story.
    pub observed: Vec<bool>,
    /// Whether the atom takes part in an accepted causal rule application.
    pub causal: bool,
}

impl ModelRow {
    fn known_values(&self) -> impl Iterator<Item = bool> + '_ {
        self.values.iter().filter_map(|v| match v {
            Truth::True => Some(true),
            Truth::False => Some(false),
            Truth::Unknown => None,
        })
    }

    /// True when the known values flip sign at least once.
    pub fn changes(&self) -> bool {
        let mut known = self.known_values();
        match known.next() {
            Some(first) => known.any(|v| v != first),
            None => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComprehensionModel {
    pub horizon: u32,
    /// Rows sorted by the atom's rendered text.
    pub rows: Vec<ModelRow>,
}

impl ComprehensionModel {
    pub(crate) fn build(
        horizon: u32,
        assignment: BTreeMap<(Atom, u32), bool>,
        observed: &BTreeSet<(Atom, u32)>,
        classify: impl Fn(&Signature) -> Classification,
        causal: &BTreeSet<Atom>,
    ) -> ComprehensionModel {
        let mut rows: BTreeMap<String, ModelRow> = BTreeMap::new();
        let width = horizon as usize + 1;
        for ((atom, t), positive) in assignment {
            if t > horizon {
                continue;
            }
            let text = atom.to_string();
            let row = rows.entry(text.clone()).or_insert_with(|| ModelRow {
                signature: atom.signature().to_string(),
                class: classify(&atom.signature()),
                causal: causal.contains(&atom),
                atom: atom.clone(),
                text,
                values: vec![Truth::Unknown; width],
                observed: vec![false; width],
            });
            row.values[t as usize] = if positive { Truth::True } else { Truth::False };
            row.observed[t as usize] = observed.contains(&(atom, t));
        }
        ComprehensionModel { horizon, rows: rows.into_values().collect() }
    }

    pub fn empty(horizon: u32) -> ComprehensionModel {
        ComprehensionModel { horizon, rows: Vec::new() }
    }

    pub fn row(&self, atom: &Atom) -> Option<&ModelRow> {
        self.rows.iter().find(|r| &r.atom == atom)
    }

    pub fn truth(&self, atom: &Atom, t: u32) -> Truth {
        self.row(atom).and_then(|r| r.values.get(t as usize).copied()).unwrap_or(Truth::Unknown)
    }

    /// Whether `literal` holds, fails or is unknown at `t`.
    pub fn holds(&self, literal: &Literal, t: u32) -> Truth {
        match (self.truth(&literal.atom, t), literal.polarity) {
            (Truth::Unknown, _) => Truth::Unknown,
            (Truth::True, Polarity::Positive) | (Truth::False, Polarity::Negative) => Truth::True,
            _ => Truth::False,
        }
    }

    pub fn is_observed(&self, atom: &Atom, t: u32) -> bool {
        self.row(atom).is_some_and(|r| r.observed.get(t as usize).copied().unwrap_or(false))
    }

    /// Literals true at `t`, each flagged when read directly from the story.
    pub fn literals_at(&self, t: u32) -> Vec<(Literal, bool)> {
        self.rows
            .iter()
            .filter_map(|r| {
                let polarity = match r.values.get(t as usize)? {
                    Truth::True => Polarity::Positive,
                    Truth::False => Polarity::Negative,
                    Truth::Unknown => return None,
                };
                Some((Literal { polarity, atom: r.atom.clone() }, r.observed[t as usize]))
            })
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Row filters offered by the timeline view.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "filter", content = "k")]
pub enum ModelFilter {
    ChangingOnly,
    NoFluents,
    NoActions,
    NoConstants,
    CausalParticipantsOnly,
    /// Keep concepts with a known value on at least `k` time-points.
    MinFrequency(u32),
}

impl ModelFilter {
    pub fn keeps(&self, row: &ModelRow) -> bool {
        match self {
            ModelFilter::ChangingOnly => row.changes(),
            ModelFilter::NoFluents => row.class != Classification::Fluent,
            ModelFilter::NoActions => row.class != Classification::Action,
            ModelFilter::NoConstants => row.class != Classification::Constant,
            ModelFilter::CausalParticipantsOnly => row.causal,
            ModelFilter::MinFrequency(k) => row.known_values().count() >= *k as usize,
        }
    }
}

impl fmt::Display for ModelFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelFilter::ChangingOnly => f.write_str("changing-only"),
            ModelFilter::NoFluents => f.write_str("no-fluents"),
            ModelFilter::NoActions => f.write_str("no-actions"),
            ModelFilter::NoConstants => f.write_str("no-constants"),
            ModelFilter::CausalParticipantsOnly => f.write_str("causal-participants-only"),
            ModelFilter::MinFrequency(k) => write!(f, "min-frequency={k}"),
        }
    }
}

impl std::str::FromStr for ModelFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "changing-only" => ModelFilter::ChangingOnly,
            "no-fluents" => ModelFilter::NoFluents,
            "no-actions" => ModelFilter::NoActions,
            "no-constants" => ModelFilter::NoConstants,
            "causal-participants-only" => ModelFilter::CausalParticipantsOnly,
            other => {
                let k = other
                    .strip_prefix("min-frequency=")
                    .and_then(|k| k.parse().ok())
                    .ok_or_else(|| format!("unknown filter `{other}`"))?;
                ModelFilter::MinFrequency(k)
            }
        })
    }
}

/// Restricts the model to rows passing every filter; the horizon is kept.
pub fn filter_model(model: &ComprehensionModel, filters: &[ModelFilter]) -> ComprehensionModel {
    ComprehensionModel {
        horizon: model.horizon,
        rows: model.rows.iter().filter(|r| filters.iter().all(|f| f.keeps(r))).cloned().collect(),
    }
}
