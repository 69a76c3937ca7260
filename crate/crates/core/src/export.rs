//! Plot-ready CSV tables.

use std::collections::BTreeMap;

use crate::attributes::ValueAttributeRow;
use crate::consistency::{ConsistencyReport, RollupEntry};
use crate::error::{Error, Result};

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Builds a CSV document from a header and rows of already formatted cells.
pub fn csv_string<R, C>(header: &[&str], rows: R) -> Result<String>
where
    R: IntoIterator<Item = C>,
    C: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let err = |e: csv::Error| Error::Domain(format!("csv: {e}"));
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>()).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Domain(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// `value,n_arguments,mean_spec_path,mean_spec_attr,compression_ratio`
pub fn attribute_csv(rows: &[ValueAttributeRow]) -> Result<String> {
    csv_string(
        &["value", "n_arguments", "mean_spec_path", "mean_spec_attr", "compression_ratio"],
        rows.iter().map(|r| {
            vec![
                r.value.clone(),
                r.n_arguments.to_string(),
                opt(r.mean_specificity_path),
                opt(r.mean_specificity_attr),
                opt(r.compression_ratio),
            ]
        }),
    )
}

pub fn parse_attribute_csv(text: &str) -> Result<Vec<ValueAttributeRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let err = |e: String| Error::Domain(format!("attribute csv: {e}"));
    let num = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|e| err(format!("`{s}`: {e}")))
        }
    };
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        if rec.len() != 5 {
            return Err(err(format!("expected 5 columns, found {}", rec.len())));
        }
        out.push(ValueAttributeRow {
            value: rec[0].to_string(),
            n_arguments: rec[1].parse().map_err(|e| err(format!("n_arguments: {e}")))?,
            mean_specificity_path: num(&rec[2])?,
            mean_specificity_attr: num(&rec[3])?,
            compression_ratio: num(&rec[4])?,
            missing_path: 0,
            missing_attr: 0,
        });
    }
    Ok(out)
}

/// `pair,statistic,value,n_common`
pub fn report_csv(reports: &[ConsistencyReport]) -> Result<String> {
    csv_string(
        &["pair", "statistic", "value", "n_common"],
        reports.iter().map(|r| {
            vec![
                r.pair.clone(),
                r.statistic.to_string(),
                r.value.to_string(),
                r.n_common.to_string(),
            ]
        }),
    )
}

/// `framework,coarse_value,score,n_members_scored`
pub fn rollup_csv(framework: &str, rollup: &BTreeMap<String, RollupEntry>) -> Result<String> {
    csv_string(
        &["framework", "coarse_value", "score", "n_members_scored"],
        rollup.iter().map(|(k, e)| {
            vec![
                framework.to_string(),
                k.clone(),
                e.score.to_string(),
                e.n_members_scored.to_string(),
            ]
        }),
    )
}
