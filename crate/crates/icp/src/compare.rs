//! Comparison tables against externally computed baselines.
//!
//! No baseline method is run here. Predictions come from a CSV with columns
//! `scenario`, `rep`, `method` and `selected` (names joined by `;`) and are
//! matched to the rows written by `icp simulate --out-csv`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use icp_core::RawTable;

use crate::error::{Error, Result};
use crate::report::{RateSummary, SCHEMA_VERSION};

/// Label under which the ICP estimates from the runs table are listed.
pub const ICP_METHOD: &str = "icp";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub runs: usize,
    /// Runs of the sweep without a prediction from this method.
    pub missing: usize,
    pub success: RateSummary,
    pub fwer: RateSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub methods: Vec<MethodSummary>,
}

fn split_set(cell: &str) -> BTreeSet<String> {
    cell.split(';').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

fn column(t: &RawTable, name: &str) -> Result<usize> {
    Ok(t.column_index(name)?)
}

fn check_shape(t: &RawTable, what: &str) -> Result<()> {
    match t.rows.iter().position(|r| r.len() != t.headers.len()) {
        Some(i) => Err(Error::Usage(format!(
            "{what}: row {} has {} fields, expected {}",
            i + 1,
            t.rows[i].len(),
            t.headers.len()
        ))),
        None => Ok(()),
    }
}

fn key(row: &[String], scenario: usize, rep: usize) -> Result<(usize, usize)> {
    let parse = |i: usize| {
        row[i].trim().parse::<usize>().map_err(|_| Error::Usage(format!("bad scenario/rep value {:?}", row[i])))
    };
    Ok((parse(scenario)?, parse(rep)?))
}

#[derive(Default)]
struct Tally {
    runs: usize,
    success: usize,
    errors: usize,
}

impl Tally {
    fn add(&mut self, parents: &BTreeSet<String>, selected: &BTreeSet<String>) {
        self.runs += 1;
        self.success += usize::from(selected == parents);
        self.errors += usize::from(!selected.is_subset(parents));
    }
}

/// Scores every method (ICP included) on the runs that finished without an
/// engine error.
pub fn compare(runs: &RawTable, predictions: &RawTable) -> Result<ComparisonReport> {
    check_shape(runs, "runs")?;
    check_shape(predictions, "predictions")?;
    let (rs, rr) = (column(runs, "scenario")?, column(runs, "rep")?);
    let (rp, rh, re) = (column(runs, "parents")?, column(runs, "s_hat")?, column(runs, "engine_error")?);
    let mut truth: HashMap<(usize, usize), BTreeSet<String>> = HashMap::new();
    let mut tallies: BTreeMap<String, Tally> = BTreeMap::new();
    for row in &runs.rows {
        if !row[re].trim().is_empty() {
            continue;
        }
        let parents = split_set(&row[rp]);
        tallies.entry(ICP_METHOD.to_string()).or_default().add(&parents, &split_set(&row[rh]));
        truth.insert(key(row, rs, rr)?, parents);
    }
    let (ps, pr) = (column(predictions, "scenario")?, column(predictions, "rep")?);
    let (pm, psel) = (column(predictions, "method")?, column(predictions, "selected")?);
    let mut seen = BTreeSet::new();
    for row in &predictions.rows {
        let k = key(row, ps, pr)?;
        let method = row[pm].trim().to_string();
        if method == ICP_METHOD {
            return Err(Error::Usage(format!("method name {ICP_METHOD:?} is reserved")));
        }
        if !seen.insert((method.clone(), k)) {
            return Err(Error::Usage(format!("duplicate prediction for {method} at scenario {}, rep {}", k.0, k.1)));
        }
        // Predictions for runs that failed in the engine are ignored like the runs themselves.
        if let Some(parents) = truth.get(&k) {
            tallies.entry(method).or_default().add(parents, &split_set(&row[psel]));
        }
    }
    let methods = tallies
        .into_iter()
        .map(|(method, t)| MethodSummary {
            missing: truth.len() - t.runs,
            success: RateSummary::new(t.success, t.runs),
            fwer: RateSummary::new(t.errors, t.runs),
            runs: t.runs,
            method,
        })
        .collect();
    Ok(ComparisonReport { schema_version: SCHEMA_VERSION, methods })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(headers: &[&str], rows: &[&[&str]]) -> RawTable {
        RawTable::new(
            headers.iter().map(|s| s.to_string()).collect(),
            rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect(),
        )
    }

    #[test]
    fn scores_each_method_against_parents() {
        let runs = table(
            &["scenario", "rep", "parents", "s_hat", "engine_error"],
            &[&["0", "0", "X1;X2", "X1", ""], &["0", "1", "X1;X2", "X1;X2", ""], &["1", "0", "", "", "rank deficient"]],
        );
        let preds = table(
            &["scenario", "rep", "method", "selected"],
            &[&["0", "0", "ges", "X1;X3"], &["0", "1", "ges", "X2;X1"], &["1", "0", "ges", "X4"]],
        );
        let r = compare(&runs, &preds).unwrap();
        assert_eq!(r.methods.len(), 2);
        let ges = &r.methods[0];
        assert_eq!((ges.method.as_str(), ges.runs, ges.missing), ("ges", 2, 0));
        assert_eq!((ges.success.rate, ges.fwer.rate), (0.5, 0.5));
        let icp = &r.methods[1];
        assert_eq!((icp.runs, icp.success.rate, icp.fwer.rate), (2, 0.5, 0.0));
    }

    #[test]
    fn rejects_duplicates_and_reserved_names() {
        let runs = table(&["scenario", "rep", "parents", "s_hat", "engine_error"], &[&["0", "0", "X1", "X1", ""]]);
        let dup =
            table(&["scenario", "rep", "method", "selected"], &[&["0", "0", "lingam", ""], &["0", "0", "lingam", ""]]);
        assert!(compare(&runs, &dup).is_err());
        let reserved = table(&["scenario", "rep", "method", "selected"], &[&["0", "0", "icp", ""]]);
        assert!(compare(&runs, &reserved).is_err());
    }
}
