use super::{
    AgreementReport, ComplexityReport, MonotonicityReport, PrevalenceReport, PropositionReport,
};
use crate::error::Result;

/// Rendering of evaluation results as CSV and as an aligned text table.
pub trait Report {
    fn headers(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<String>>;

    fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.headers())?;
        for row in self.rows() {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    fn to_table(&self) -> String {
        let headers = self.headers();
        let rows = self.rows();
        let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: Vec<&str>| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                .collect();
            format!("| {} |\n", padded.join(" | "))
        };
        let mut out = line(headers.clone());
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        out.push_str(&line(rule.iter().map(String::as_str).collect()));
        for row in &rows {
            out.push_str(&line(row.iter().map(String::as_str).collect()));
        }
        out
    }
}

fn pct(v: f64) -> String {
    format!("{v:.2}")
}

impl Report for PrevalenceReport {
    fn headers(&self) -> Vec<&'static str> {
        vec!["kit", "relation", "symbol", "percent", "classification_percent", "instances", "influences"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    self.kit.clone(),
                    r.relation.clone(),
                    r.symbol.clone(),
                    pct(r.percent),
                    pct(r.classification_percent),
                    self.instances.to_string(),
                    self.influences.to_string(),
                ]
            })
            .collect()
    }
}

impl Report for AgreementReport {
    fn headers(&self) -> Vec<&'static str> {
        vec!["kit_a", "kit_b", "agreement", "overlap", "instances", "influences"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.kit_a.clone(),
            self.kit_b.clone(),
            pct(self.agreement),
            pct(self.overlap),
            self.instances.to_string(),
            self.influences.to_string(),
        ]]
    }
}

impl Report for MonotonicityReport {
    fn headers(&self) -> Vec<&'static str> {
        vec!["kit", "rate", "violations", "sampled", "population", "instances"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.kit.clone(),
            pct(self.rate),
            self.violations.to_string(),
            self.sampled.to_string(),
            self.population.to_string(),
            self.instances.to_string(),
        ]]
    }
}

impl Report for ComplexityReport {
    fn headers(&self) -> Vec<&'static str> {
        vec![
            "kit",
            "instance",
            "explanandum",
            "reached",
            "posterior_evaluations",
            "linear_bound",
            "enumerated",
        ]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.probes
            .iter()
            .map(|p| {
                vec![
                    self.kit.clone(),
                    p.instance.to_string(),
                    p.explanandum.clone(),
                    p.reached.to_string(),
                    p.posterior_evaluations.to_string(),
                    p.linear_bound.to_string(),
                    p.enumerated.to_string(),
                ]
            })
            .collect()
    }
}

impl Report for PropositionReport {
    fn headers(&self) -> Vec<&'static str> {
        vec!["proposition", "kit", "informational", "checked", "counterexamples", "trials", "seed"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.results
            .iter()
            .map(|r| {
                vec![
                    r.name.clone(),
                    r.kit.clone(),
                    r.informational.to_string(),
                    r.checked.to_string(),
                    r.counterexamples.to_string(),
                    self.trials.to_string(),
                    self.seed.to_string(),
                ]
            })
            .collect()
    }
}
