use serde::Serialize;

use super::{MultinomialFit, RegressionFit};
use crate::tsv::{fmt_f64, fmt_opt, TsvWriter};

pub fn fit_json(name: &str, fit: &RegressionFit) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        name: &'a str,
        #[serde(flatten)]
        fit: &'a RegressionFit,
    }
    let mut s = serde_json::to_string_pretty(&Doc { name, fit }).expect("fit serializes");
    s.push('\n');
    s
}

pub fn multinomial_json(name: &str, fit: &MultinomialFit) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        name: &'a str,
        #[serde(flatten)]
        fit: &'a MultinomialFit,
    }
    let mut s = serde_json::to_string_pretty(&Doc { name, fit }).expect("fit serializes");
    s.push('\n');
    s
}

/// One column of the coefficient table: a labelled set of estimates plus
/// fit statistics.
pub struct TableColumn<'a> {
    pub label: String,
    pub coefficients: &'a [super::Coefficient],
    pub n_obs: usize,
    pub fit_stat: Option<f64>,
    pub test_stat: f64,
    pub test_p: f64,
}

impl<'a> TableColumn<'a> {
    pub fn from_fit(label: impl Into<String>, fit: &'a RegressionFit) -> Self {
        TableColumn {
            label: label.into(),
            coefficients: &fit.coefficients,
            n_obs: fit.n_obs,
            fit_stat: fit.pseudo_r2.or(fit.r2),
            test_stat: fit.model_test.statistic,
            test_p: fit.model_test.p_value,
        }
    }

    pub fn from_multinomial(fit: &'a MultinomialFit) -> Vec<Self> {
        fit.blocks
            .iter()
            .map(|b| TableColumn {
                label: format!("sign_{}", b.category),
                coefficients: &b.coefficients,
                n_obs: fit.n_obs,
                fit_stat: fit.pseudo_r2,
                test_stat: fit.model_test.statistic,
                test_p: fit.model_test.p_value,
            })
            .collect()
    }
}

/// Wide table: one row per term, estimate and standard error columns per
/// model, followed by fit-statistic rows.
pub fn regression_table_tsv(columns: &[TableColumn]) -> String {
    let mut terms: Vec<&str> = Vec::new();
    for c in columns {
        for coef in c.coefficients {
            if !terms.contains(&coef.name.as_str()) {
                terms.push(&coef.name);
            }
        }
    }
    let mut header = vec!["term".to_string()];
    for c in columns {
        header.push(c.label.clone());
        header.push(format!("{}_se", c.label));
        header.push(format!("{}_p", c.label));
    }
    let hdr: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut w = TsvWriter::new(&hdr);
    for t in &terms {
        let mut row = vec![t.to_string()];
        for c in columns {
            match c.coefficients.iter().find(|x| x.name == *t) {
                Some(x) => {
                    row.push(fmt_f64(x.estimate));
                    row.push(fmt_f64(x.std_error));
                    row.push(fmt_f64(x.p_value));
                }
                None => row.extend(["NA".to_string(), "NA".to_string(), "NA".to_string()]),
            }
        }
        w.row(row);
    }
    let stats: [(&str, fn(&TableColumn) -> String); 4] = [
        ("n_obs", |c| c.n_obs.to_string()),
        ("r2", |c| fmt_opt(c.fit_stat)),
        ("model_stat", |c| fmt_f64(c.test_stat)),
        ("model_p", |c| fmt_f64(c.test_p)),
    ];
    for (label, f) in stats {
        let mut row = vec![label.to_string()];
        for c in columns {
            row.push(f(c));
            row.push(String::new());
            row.push(String::new());
        }
        w.row(row);
    }
    w.finish()
}
