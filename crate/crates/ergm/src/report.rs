//! Tabular rendering of fits: one row per term plus information criteria.

use std::path::Path;

use serde::Serialize;

use crate::mle::ErgmFit;

/// `***` below 0.001, `**` below 0.01, `*` below 0.05.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// `3.2163*** (0.1081)`
pub fn format_estimate(theta: f64, se: f64, p: f64) -> String {
    format!("{theta:.4}{} ({se:.4})", stars(p))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub term: String,
    pub value: String,
}

pub const FOOTER: [&str; 3] = ["AIC", "BIC", "Log Likelihood"];

pub fn format_fit(fit: &ErgmFit) -> Vec<ReportRow> {
    let mut rows: Vec<ReportRow> = fit
        .labels
        .iter()
        .enumerate()
        .map(|(k, label)| ReportRow {
            term: label.clone(),
            value: format_estimate(fit.theta[k], fit.std_errors[k], fit.p_values[k]),
        })
        .collect();
    for (term, v) in FOOTER.iter().zip([fit.aic, fit.bic, fit.log_likelihood]) {
        rows.push(ReportRow {
            term: term.to_string(),
            value: format!("{v:.4}"),
        });
    }
    rows
}

/// Side-by-side table with one column per fit; terms missing from a fit are blank.
pub fn write_table(
    path: &Path,
    preamble: Option<&str>,
    columns: &[(String, Vec<ReportRow>)],
) -> Result<(), csv::Error> {
    let mut terms: Vec<String> = Vec::new();
    for (_, rows) in columns {
        for r in rows {
            if !terms.contains(&r.term) && !FOOTER.contains(&r.term.as_str()) {
                terms.push(r.term.clone());
            }
        }
    }
    terms.extend(FOOTER.iter().map(|s| s.to_string()));
    let mut header = vec!["term"];
    header.extend(columns.iter().map(|(name, _)| name.as_str()));
    let rows = terms.iter().map(|term| {
        let mut row = vec![term.clone()];
        for (_, rows) in columns {
            row.push(
                rows.iter()
                    .find(|r| &r.term == term)
                    .map(|r| r.value.clone())
                    .unwrap_or_default(),
            );
        }
        row
    });
    intrafirm_core::csvio::write(path, preamble, &header, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_cells() {
        assert_eq!(format_estimate(3.2163, 0.1081, 1e-6), "3.2163*** (0.1081)");
        assert_eq!(format_estimate(-0.0023, 0.0010, 0.03), "-0.0023* (0.0010)");
        assert_eq!(format_estimate(0.3124, 0.2019, 0.2), "0.3124 (0.2019)");
        assert_eq!(stars(0.005), "**");
        assert_eq!(stars(0.05), "");
    }
}
