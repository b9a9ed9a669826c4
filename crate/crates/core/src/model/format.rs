//! JSON document form of a classifier.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Classifier, VarId, Variable};
use crate::error::{Error, Result};

type Nested<T> = BTreeMap<String, T>;

/// Serialized classifier. Conditionals nest as
/// `variable -> value -> parent -> parent value -> probability`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierDocument {
    pub variables: Vec<Variable>,
    pub edges: Vec<(String, String)>,
    pub priors: Nested<Nested<f64>>,
    pub conditionals: Nested<Nested<Nested<Nested<f64>>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub cuts: BTreeMap<String, Vec<f64>>,
}

impl From<&Classifier> for ClassifierDocument {
    fn from(c: &Classifier) -> Self {
        let mut priors = BTreeMap::new();
        for id in c.ids() {
            let row = c
                .domain(id)
                .values()
                .iter()
                .zip(c.prior(id))
                .map(|(l, p)| (l.clone(), *p))
                .collect();
            priors.insert(c.name(id).to_string(), row);
        }
        let mut conditionals: Nested<Nested<Nested<Nested<f64>>>> = BTreeMap::new();
        for &(p, ch) in c.edges() {
            let table = c.conditional(p, ch).expect("validated edge");
            for (ci, clabel) in c.domain(ch).values().iter().enumerate() {
                let per_parent = conditionals
                    .entry(c.name(ch).to_string())
                    .or_default()
                    .entry(clabel.clone())
                    .or_default()
                    .entry(c.name(p).to_string())
                    .or_default();
                for (pi, plabel) in c.domain(p).values().iter().enumerate() {
                    per_parent.insert(plabel.clone(), table[pi][ci]);
                }
            }
        }
        ClassifierDocument {
            variables: c.variables().to_vec(),
            edges: c
                .edges()
                .iter()
                .map(|&(p, ch)| (c.name(p).to_string(), c.name(ch).to_string()))
                .collect(),
            priors,
            conditionals,
            warnings: c.warnings().to_vec(),
            cuts: c.cuts().clone(),
        }
    }
}

impl TryFrom<ClassifierDocument> for Classifier {
    type Error = Error;

    fn try_from(doc: ClassifierDocument) -> Result<Self> {
        let index: BTreeMap<&str, VarId> = doc
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), VarId(i)))
            .collect();
        let lookup = |n: &str| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| Error::UnknownVariable(n.to_string()))
        };
        let schema = |msg: String| Error::InvalidClassifier(msg);

        let mut priors = Vec::with_capacity(doc.variables.len());
        for v in &doc.variables {
            let row = doc
                .priors
                .get(&v.name)
                .ok_or_else(|| schema(format!("missing priors for `{}`", v.name)))?;
            if row.len() != v.domain.len() {
                return Err(schema(format!("priors of `{}` do not match its domain", v.name)));
            }
            let mut probs = Vec::with_capacity(v.domain.len());
            for label in v.domain.values() {
                probs.push(*row.get(label).ok_or_else(|| {
                    schema(format!("missing prior for `{}={label}`", v.name))
                })?);
            }
            priors.push(probs);
        }

        let mut edges = Vec::with_capacity(doc.edges.len());
        let mut conditionals = BTreeMap::new();
        for (p, ch) in &doc.edges {
            let (pid, cid) = (lookup(p)?, lookup(ch)?);
            edges.push((pid, cid));
            let pdom = &doc.variables[pid.0].domain;
            let cdom = &doc.variables[cid.0].domain;
            let by_value = doc
                .conditionals
                .get(ch)
                .ok_or_else(|| schema(format!("missing conditionals for `{ch}`")))?;
            let mut table = vec![vec![0.0; cdom.len()]; pdom.len()];
            for (ci, clabel) in cdom.values().iter().enumerate() {
                let column = by_value
                    .get(clabel)
                    .and_then(|m| m.get(p))
                    .ok_or_else(|| schema(format!("missing P({ch}={clabel} | {p})")))?;
                for (pi, plabel) in pdom.values().iter().enumerate() {
                    table[pi][ci] = *column.get(plabel).ok_or_else(|| {
                        schema(format!("missing P({ch}={clabel} | {p}={plabel})"))
                    })?;
                }
            }
            conditionals.insert((pid, cid), table);
        }
        Ok(Classifier::new(doc.variables, edges, priors, conditionals)?
            .with_warnings(doc.warnings)
            .with_cuts(doc.cuts))
    }
}

impl Classifier {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ClassifierDocument::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ClassifierDocument = serde_json::from_str(text)?;
        Classifier::try_from(doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ClassifierBuilder;

    #[test]
    fn round_trip_keeps_full_precision() {
        let third = 1.0 / 3.0;
        let c = ClassifierBuilder::new()
            .classification("c", &["a", "b", "z"])
            .unwrap()
            .observation("x", &["0", "1"])
            .unwrap()
            .prior("c", &[third, third, 1.0 - 2.0 * third])
            .conditional(
                "c",
                "x",
                &[&[0.1, 0.9], &[1.0 / 7.0, 6.0 / 7.0], &[0.123456789012345, 0.876543210987655]],
            )
            .build()
            .unwrap();
        let back = Classifier::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(ClassifierDocument::from(&back), ClassifierDocument::from(&c));
        assert_eq!(back.prior(VarId(0)), c.prior(VarId(0)));
        assert_eq!(
            back.conditional(VarId(0), VarId(1)),
            c.conditional(VarId(0), VarId(1))
        );
    }

    #[test]
    fn missing_table_entry_is_a_schema_error() {
        let c = ClassifierBuilder::new()
            .classification("c", &["a", "b"])
            .unwrap()
            .observation("x", &["0", "1"])
            .unwrap()
            .conditional("c", "x", &[&[0.5, 0.5], &[0.5, 0.5]])
            .build()
            .unwrap();
        let mut doc = ClassifierDocument::from(&c);
        doc.conditionals.get_mut("x").unwrap().remove("1");
        assert!(Classifier::try_from(doc).is_err());
    }
}
