use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{format_sig, ConditionLabel, ExperienceLevel};

/// The five questionnaire constructs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PerceivedFeature {
    /// Perceived safety.
    PS,
    /// Anthropomorphism.
    AP,
    /// Animacy.
    AM,
    /// Likeability.
    LK,
    /// Perceived intelligence.
    PI,
}

impl PerceivedFeature {
    pub const ALL: [PerceivedFeature; 5] = [
        PerceivedFeature::PS,
        PerceivedFeature::AP,
        PerceivedFeature::AM,
        PerceivedFeature::LK,
        PerceivedFeature::PI,
    ];
}

impl fmt::Display for PerceivedFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&format!("{self:?}"))
    }
}

impl FromStr for PerceivedFeature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "PS" => Ok(PerceivedFeature::PS),
            "AP" => Ok(PerceivedFeature::AP),
            "AM" => Ok(PerceivedFeature::AM),
            "LK" => Ok(PerceivedFeature::LK),
            "PI" => Ok(PerceivedFeature::PI),
            other => Err(Error::InvalidValue(format!("unknown feature '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub participant: String,
    pub condition: ConditionLabel,
    pub experience: ExperienceLevel,
    pub feature: PerceivedFeature,
    pub score: f64,
}

/// Long-format questionnaire scores.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    rows: Vec<ScoreRow>,
}

pub const SCORE_HEADER: [&str; 5] = ["participant", "condition", "experience", "feature", "score"];

impl ScoreTable {
    pub fn new(rows: Vec<ScoreRow>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| !r.score.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "non-finite score for participant {} ({}, {})",
                r.participant, r.condition, r.feature
            )));
        }
        Ok(ScoreTable { rows })
    }

    pub fn rows(&self) -> &[ScoreRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Parse CSV with header `participant,condition,experience,feature,score`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        if headers.iter().ne(SCORE_HEADER.iter().copied()) {
            return Err(Error::Format {
                line: 1,
                message: format!("score table header must be '{}'", SCORE_HEADER.join(",")),
            });
        }
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let wrap = |e: Error| Error::Format {
                line,
                message: e.to_string(),
            };
            let field = |j: usize| rec.get(j).unwrap_or("");
            if field(0).is_empty() {
                return Err(wrap(Error::InvalidValue("empty participant id".into())));
            }
            let score: f64 = field(4).parse().map_err(|_| {
                wrap(Error::InvalidValue(format!(
                    "score '{}' is not a number",
                    field(4)
                )))
            })?;
            rows.push(ScoreRow {
                participant: field(0).to_string(),
                condition: field(1).parse().map_err(wrap)?,
                experience: field(2).parse().map_err(wrap)?,
                feature: field(3).parse().map_err(wrap)?,
                score,
            });
        }
        ScoreTable::new(rows)
    }

    pub fn to_csv(&self) -> String {
        let mut out = SCORE_HEADER.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.participant,
                r.condition,
                r.experience,
                r.feature,
                format_sig(r.score, 12)
            ));
        }
        out
    }
}
