use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AttributionScores, AttributionSource};
use crate::error::{Error, Result};
use crate::model::{Assignment, Classifier, VarId};

/// One row of a score table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub instance: String,
    pub observation: String,
    pub output: String,
    pub score: f64,
}

#[derive(Deserialize)]
struct RawRecord {
    instance: String,
    observation: String,
    output: String,
    score: String,
}

/// Reads `instance,observation,output,score` rows from CSV, or a JSON array of
/// the same objects when the path ends in `.json`.
pub fn load_scores(path: impl AsRef<Path>) -> Result<Vec<ScoreRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        let records: Vec<ScoreRecord> = serde_json::from_str(&text)
            .map_err(|e| Error::Schema(format!("score file does not parse: {e}")))?;
        return check_finite(records);
    }
    parse_scores_csv(&text)
}

pub fn parse_scores_csv(text: &str) -> Result<Vec<ScoreRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != ["instance", "observation", "output", "score"] {
        return Err(Error::Schema(format!(
            "expected header `instance,observation,output,score`, got `{}`",
            header.join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<RawRecord>().enumerate() {
        let row = row.map_err(|e| Error::Schema(format!("row {}: {e}", i + 1)))?;
        let score = row.score.parse::<f64>().map_err(|_| {
            Error::Schema(format!("row {}: score `{}` is not a number", i + 1, row.score))
        })?;
        out.push(ScoreRecord {
            instance: row.instance,
            observation: row.observation,
            output: row.output,
            score,
        });
    }
    check_finite(out)
}

fn check_finite(records: Vec<ScoreRecord>) -> Result<Vec<ScoreRecord>> {
    if let Some(r) = records.iter().find(|r| !r.score.is_finite()) {
        return Err(Error::Schema(format!(
            "score for ({}, {}, {}) is not finite",
            r.instance, r.observation, r.output
        )));
    }
    Ok(records)
}

/// Rows for one instance, ordered by output then observation.
pub fn records(c: &Classifier, instance: &str, scores: &AttributionScores) -> Vec<ScoreRecord> {
    let mut rows: Vec<((VarId, VarId), f64)> = scores.iter().collect();
    rows.sort_by_key(|&((x, y), _)| (y, x));
    rows.into_iter()
        .map(|((x, y), score)| ScoreRecord {
            instance: instance.to_string(),
            observation: c.name(x).to_string(),
            output: c.name(y).to_string(),
            score,
        })
        .collect()
}

pub fn write_scores_csv(out: impl Write, rows: &[ScoreRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scores_json(mut out: impl Write, rows: &[ScoreRecord]) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)?;
    Ok(())
}

/// Scores imported from an external tool.
#[derive(Clone, Debug)]
pub struct ScoreFile {
    records: Vec<ScoreRecord>,
}

impl ScoreFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(ScoreFile {
            records: load_scores(path)?,
        })
    }

    pub fn from_records(records: Vec<ScoreRecord>) -> Self {
        ScoreFile { records }
    }
}

impl AttributionSource for ScoreFile {
    fn name(&self) -> &str {
        "file"
    }

    fn scores(
        &self,
        c: &Classifier,
        _a: &Assignment,
        outputs: &BTreeSet<VarId>,
        instance: &str,
    ) -> Result<AttributionScores> {
        let mut scores = AttributionScores::new();
        for r in self.records.iter().filter(|r| r.instance == instance) {
            let lookup = |name: &str| {
                c.var(name)
                    .map_err(|_| Error::Schema(format!("score file names unknown variable `{name}`")))
            };
            let (x, y) = (lookup(&r.observation)?, lookup(&r.output)?);
            if c.is_classification(x) {
                return Err(Error::Schema(format!(
                    "`{}` is not an observation",
                    r.observation
                )));
            }
            if !outputs.contains(&y) {
                return Err(Error::Schema(format!(
                    "score file has output `{}`, which is not a declared output",
                    r.output
                )));
            }
            if scores.get(x, y).is_some() {
                return Err(Error::Schema(format!(
                    "duplicate score for instance `{instance}`, ({}, {})",
                    r.observation, r.output
                )));
            }
            scores.insert(x, y, r.score);
        }
        for &y in outputs {
            for x in c.observations() {
                if scores.get(x, y).is_none() {
                    return Err(Error::AttributionUnavailable(format!(
                        "score file has no row for instance `{instance}`, observation `{}`, output `{}`",
                        c.name(x),
                        c.name(y)
                    )));
                }
            }
        }
        Ok(scores)
    }
}
