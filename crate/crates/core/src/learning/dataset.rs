use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Categorical,
    Numeric,
}

/// Rectangular table of raw string cells with a header row.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    columns: Vec<String>,
    kinds: Vec<ColumnKind>,
    rows: Vec<Vec<String>>,
    /// Declared value orders; columns without one use first-appearance order.
    domains: BTreeMap<String, Vec<String>>,
}

impl Dataset {
    /// Builds a dataset, inferring a column as numeric when every cell parses as a
    /// finite number.
    pub fn new(columns: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidDataset("no columns".into()));
        }
        for (i, c) in columns.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::InvalidDataset(format!("column {i} has an empty name")));
            }
            if columns[..i].contains(c) {
                return Err(Error::InvalidDataset(format!("duplicate column `{c}`")));
            }
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::InvalidDataset(format!(
                    "row {} has {} cells, expected {}",
                    r + 1,
                    row.len(),
                    columns.len()
                )));
            }
            if let Some(j) = row.iter().position(|cell| cell.is_empty()) {
                return Err(Error::InvalidDataset(format!(
                    "missing value in row {}, column `{}`",
                    r + 1,
                    columns[j]
                )));
            }
        }
        let kinds = (0..columns.len())
            .map(|j| {
                let numeric = !rows.is_empty()
                    && rows
                        .iter()
                        .all(|r| r[j].parse::<f64>().is_ok_and(f64::is_finite));
                if numeric {
                    ColumnKind::Numeric
                } else {
                    ColumnKind::Categorical
                }
            })
            .collect();
        Ok(Dataset {
            columns,
            kinds,
            rows,
            domains: BTreeMap::new(),
        })
    }

    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let columns = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in rdr.records() {
            rows.push(record?.iter().map(str::to_string).collect());
        }
        Self::new(columns, rows)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        Self::from_reader(text.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn kind(&self, column: usize) -> ColumnKind {
        self.kinds[column]
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::InvalidDataset(format!("no column named `{name}`")))
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = &str> + '_ {
        self.rows.iter().map(move |r| r[j].as_str())
    }

    /// Declares the value order of a column; the column becomes categorical.
    pub fn declare_domain(&mut self, column: &str, values: Vec<String>) -> Result<()> {
        let j = self.column_index(column)?;
        if let Some(bad) = self.column(j).find(|v| !values.iter().any(|d| d == v)) {
            return Err(Error::InvalidDataset(format!(
                "value `{bad}` of column `{column}` is not in its declared domain"
            )));
        }
        self.kinds[j] = ColumnKind::Categorical;
        self.domains.insert(column.to_string(), values);
        Ok(())
    }

    /// Value labels of column `j`: the declared order, else first appearance.
    pub fn domain(&self, j: usize) -> Vec<String> {
        if let Some(d) = self.domains.get(&self.columns[j]) {
            return d.clone();
        }
        let mut seen: Vec<String> = Vec::new();
        for v in self.column(j) {
            if !seen.iter().any(|s| s == v) {
                seen.push(v.to_string());
            }
        }
        seen
    }

    /// Copy restricted to the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Dataset {
        Dataset {
            columns: self.columns.clone(),
            kinds: self.kinds.clone(),
            rows: rows.iter().map(|&i| self.rows[i].clone()).collect(),
            domains: self.domains.clone(),
        }
    }

    /// Copy restricted to the named columns, in the given order.
    pub fn project(&self, names: &[&str]) -> Result<Dataset> {
        let idx = names
            .iter()
            .map(|n| self.column_index(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            columns: idx.iter().map(|&j| self.columns[j].clone()).collect(),
            kinds: idx.iter().map(|&j| self.kinds[j]).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| idx.iter().map(|&j| r[j].clone()).collect())
                .collect(),
            domains: self
                .domains
                .iter()
                .filter(|(k, _)| names.contains(&k.as_str()))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        })
    }

    pub(crate) fn replace_column(&mut self, j: usize, values: Vec<String>, domain: Vec<String>) {
        for (row, v) in self.rows.iter_mut().zip(values) {
            row[j] = v;
        }
        self.kinds[j] = ColumnKind::Categorical;
        self.domains.insert(self.columns[j].clone(), domain);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infers_column_kinds() {
        let d = Dataset::from_csv_str("a,b\n1,x\n2.5,y\n").unwrap();
        assert_eq!(d.kind(0), ColumnKind::Numeric);
        assert_eq!(d.kind(1), ColumnKind::Categorical);
        assert_eq!(d.domain(1), ["x", "y"]);
    }

    #[test]
    fn rejects_missing_cells_and_ragged_rows() {
        assert!(Dataset::from_csv_str("a,b\n1,\n").is_err());
        assert!(Dataset::from_csv_str("a,b\n1\n").is_err());
        assert!(Dataset::from_csv_str("a,a\n1,2\n").is_err());
    }

    #[test]
    fn declared_domain_fixes_order() {
        let mut d = Dataset::from_csv_str("a\nz\ny\n").unwrap();
        d.declare_domain("a", vec!["y".into(), "z".into()]).unwrap();
        assert_eq!(d.domain(0), ["y", "z"]);
        assert!(d.declare_domain("a", vec!["y".into()]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let text = "a,b\n1,x\n2,\"y,z\"\n";
        let d = Dataset::from_csv_str(text).unwrap();
        assert_eq!(Dataset::from_csv_str(&d.to_csv().unwrap()).unwrap(), d);
    }
}
