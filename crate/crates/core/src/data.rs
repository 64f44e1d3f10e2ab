//! Multi-environment datasets: ingestion from a string table, pooling of
//! environments, and environment construction by binning a variable.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{IcpError, Result};
use crate::linalg::Matrix;

/// A parsed but untyped table: header names and string cells.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn new(headers: Vec<String>, rows: Vec<Vec<String>>) -> Self {
        RawTable { headers, rows }
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| IcpError::MissingColumn(name.to_string()))
    }

    fn check_shape(&self) -> Result<()> {
        let mut seen = BTreeMap::new();
        for h in &self.headers {
            if seen.insert(h.as_str(), ()).is_some() {
                return Err(IcpError::DuplicateName(h.clone()));
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.len() != self.headers.len() {
                return Err(IcpError::RaggedRow { row: i, got: r.len(), expected: self.headers.len() });
            }
        }
        if self.rows.len() < 2 {
            return Err(IcpError::SingleRow);
        }
        Ok(())
    }

    fn numeric_column(&self, col: usize) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let cell = r[col].trim();
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(IcpError::NonNumericValue { column: self.headers[col].clone(), row: i }),
                }
            })
            .collect()
    }
}

/// Observations of a target and `p` predictors, each row tagged with the
/// environment it was collected in.
///
/// Environments are numbered `0..E` in order of first appearance; the
/// original labels are kept in [`Dataset::env_labels`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Matrix,
    y: Vec<f64>,
    env: Vec<usize>,
    names: Vec<String>,
    target_name: String,
    env_labels: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from column-major predictors. Environment indices are
    /// relabelled to `0..E` in order of first appearance.
    pub fn new(x: Matrix, y: Vec<f64>, env: Vec<usize>, names: Vec<String>, target_name: String) -> Result<Self> {
        let (env, order) = relabel(&env);
        let env_labels = order.iter().map(|e| e.to_string()).collect();
        let d = Dataset { x, y, env, names, target_name, env_labels };
        d.validate()?;
        Ok(d)
    }

    /// Stacks one predictor block and target vector per environment.
    pub fn from_environments(names: Vec<String>, target_name: String, blocks: Vec<(Matrix, Vec<f64>)>) -> Result<Self> {
        let p = names.len();
        let n: usize = blocks.iter().map(|(m, _)| m.rows()).sum();
        let mut cols = vec![Vec::with_capacity(n); p];
        let mut y = Vec::with_capacity(n);
        let mut env = Vec::with_capacity(n);
        for (e, (m, ye)) in blocks.into_iter().enumerate() {
            if m.cols() != p || ye.len() != m.rows() {
                return Err(IcpError::DimensionMismatch("environment block"));
            }
            for (j, c) in cols.iter_mut().enumerate() {
                c.extend_from_slice(m.col(j));
            }
            env.extend(core::iter::repeat_n(e, ye.len()));
            y.extend(ye);
        }
        let x = Matrix::from_columns(n, &cols)?;
        Dataset::new(x, y, env, names, target_name)
    }

    fn validate(&self) -> Result<()> {
        let n = self.y.len();
        if n < 2 {
            return Err(IcpError::SingleRow);
        }
        if self.x.rows() != n || self.env.len() != n || self.names.len() != self.x.cols() {
            return Err(IcpError::DimensionMismatch("dataset parts"));
        }
        if self.x.cols() == 0 {
            return Err(IcpError::NoPredictors);
        }
        for (i, v) in self.y.iter().enumerate() {
            if !v.is_finite() {
                return Err(IcpError::NonNumericValue { column: self.target_name.clone(), row: i });
            }
        }
        for j in 0..self.x.cols() {
            if let Some(i) = self.x.col(j).iter().position(|v| !v.is_finite()) {
                return Err(IcpError::NonNumericValue { column: self.names[j].clone(), row: i });
            }
        }
        let mut seen = BTreeMap::new();
        for nm in &self.names {
            if nm == &self.target_name || seen.insert(nm.as_str(), ()).is_some() {
                return Err(IcpError::DuplicateName(nm.clone()));
            }
        }
        Ok(())
    }

    /// Reads a table, using `target_col` as the target, `env_col` as the
    /// environment label and every other column as a predictor.
    pub fn from_table(table: &RawTable, target_col: &str, env_col: &str) -> Result<Self> {
        table.check_shape()?;
        let t = table.column_index(target_col)?;
        let e = table.column_index(env_col)?;
        if t == e {
            return Err(IcpError::DuplicateName(target_col.to_string()));
        }
        let mut labels: Vec<String> = Vec::new();
        let mut env = Vec::with_capacity(table.rows.len());
        for r in &table.rows {
            let lab = r[e].trim();
            let idx = match labels.iter().position(|l| l == lab) {
                Some(i) => i,
                None => {
                    labels.push(lab.to_string());
                    labels.len() - 1
                }
            };
            env.push(idx);
        }
        let mut d = Self::predictors_from_table(table, t, &[t, e], env)?;
        d.env_labels = labels;
        Ok(d)
    }

    /// Reads a table with all rows in a single environment.
    pub fn from_table_single_env(table: &RawTable, target_col: &str) -> Result<Self> {
        table.check_shape()?;
        let t = table.column_index(target_col)?;
        let env = vec![0; table.rows.len()];
        Self::predictors_from_table(table, t, &[t], env)
    }

    fn predictors_from_table(table: &RawTable, target: usize, skip: &[usize], env: Vec<usize>) -> Result<Self> {
        let y = table.numeric_column(target)?;
        let mut cols = Vec::new();
        let mut names = Vec::new();
        for j in 0..table.headers.len() {
            if skip.contains(&j) {
                continue;
            }
            cols.push(table.numeric_column(j)?);
            names.push(table.headers[j].clone());
        }
        let x = Matrix::from_columns(y.len(), &cols)?;
        Dataset::new(x, y, env, names, table.headers[target].clone())
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn num_envs(&self) -> usize {
        self.env_labels.len()
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn env(&self) -> &[usize] {
        &self.env
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn env_labels(&self) -> &[String] {
        &self.env_labels
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.names.iter().position(|n| n == name).ok_or_else(|| IcpError::UnknownColumn(name.to_string()))
    }

    /// Row indices of each environment.
    pub fn env_rows(&self) -> Vec<Vec<usize>> {
        let mut rows = vec![Vec::new(); self.num_envs()];
        for (i, &e) in self.env.iter().enumerate() {
            rows[e].push(i);
        }
        rows
    }

    pub fn env_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_envs()];
        for &e in &self.env {
            sizes[e] += 1;
        }
        sizes
    }

    /// Predictor columns that take a single value.
    pub fn constant_columns(&self) -> Vec<usize> {
        (0..self.p())
            .filter(|&j| {
                let c = self.x.col(j);
                c.iter().all(|v| *v == c[0])
            })
            .collect()
    }

    /// Merges environments block-wise; environment `i` of the result is
    /// block `i` of the grouping.
    pub fn pool(&self, grouping: &EnvironmentGrouping) -> Result<Dataset> {
        if grouping.num_envs != self.num_envs() {
            return Err(IcpError::InvalidPartition("grouping covers a different number of environments".into()));
        }
        let env = self.env.iter().map(|&e| grouping.block_of[e]).collect();
        let env_labels = grouping
            .blocks
            .iter()
            .map(|b| {
                let parts: Vec<&str> = b.iter().map(|&e| self.env_labels[e].as_str()).collect();
                parts.join("+")
            })
            .collect();
        Ok(Dataset { env, env_labels, ..self.clone() })
    }

    /// Keeps only the listed environments (relabelled in the given order).
    pub fn restrict_envs(&self, keep: &[usize]) -> Result<Dataset> {
        let mut map = vec![usize::MAX; self.num_envs()];
        for (new, &old) in keep.iter().enumerate() {
            if old >= self.num_envs() || map[old] != usize::MAX {
                return Err(IcpError::InvalidPartition("bad environment subset".into()));
            }
            map[old] = new;
        }
        let rows: Vec<usize> = (0..self.n()).filter(|&i| map[self.env[i]] != usize::MAX).collect();
        Ok(Dataset {
            x: self.x.select_rows(&rows),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            env: rows.iter().map(|&i| map[self.env[i]]).collect(),
            names: self.names.clone(),
            target_name: self.target_name.clone(),
            env_labels: keep.iter().map(|&e| self.env_labels[e].clone()).collect(),
        })
    }

    /// Keeps the listed predictor columns, in the given order.
    pub fn select_predictors(&self, cols: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_cols(cols),
            names: cols.iter().map(|&j| self.names[j].clone()).collect(),
            ..self.clone()
        }
    }

    /// Builds environments from bins of predictor `split_col`.
    ///
    /// Bin `i` holds values `v` with `c[i-1] ≤ v < c[i]`. Empty bins are
    /// dropped and reported. The split column leaves the predictor set unless
    /// `retain` is set.
    pub fn split_by_variable(&self, split_col: &str, cutpoints: &[f64], retain: bool) -> Result<SplitOutcome> {
        let j = self.column_index(split_col)?;
        if cutpoints.iter().any(|c| !c.is_finite()) || cutpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(IcpError::InvalidCutpoints);
        }
        let bins: Vec<usize> = self.x.col(j).iter().map(|v| cutpoints.partition_point(|c| c <= v)).collect();
        let mut counts = vec![0usize; cutpoints.len() + 1];
        for &b in &bins {
            counts[b] += 1;
        }
        let empty_bins: Vec<usize> = (0..counts.len()).filter(|&b| counts[b] == 0).collect();
        let mut map = vec![usize::MAX; counts.len()];
        let mut labels = Vec::new();
        for b in 0..counts.len() {
            if counts[b] > 0 {
                map[b] = labels.len();
                labels.push(alloc::format!("{split_col}#bin{b}"));
            }
        }
        let env: Vec<usize> = bins.iter().map(|&b| map[b]).collect();
        let mut out = Dataset { env, env_labels: labels, ..self.clone() };
        if !retain {
            if self.p() == 1 {
                return Err(IcpError::NoPredictors);
            }
            out.x = self.x.without_col(j);
            out.names.remove(j);
        }
        Ok(SplitOutcome { dataset: out, empty_bins })
    }
}

/// Result of [`Dataset::split_by_variable`].
#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub dataset: Dataset,
    /// Bins (by index into the cutpoint intervals) that received no rows.
    pub empty_bins: Vec<usize>,
}

fn relabel(env: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = Vec::new();
    let out = env
        .iter()
        .map(|e| match order.iter().position(|o| o == e) {
            Some(i) => i,
            None => {
                order.push(*e);
                order.len() - 1
            }
        })
        .collect();
    (out, order)
}

/// A partition of environments `0..E` into nonempty blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvironmentGrouping {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
    num_envs: usize,
}

impl EnvironmentGrouping {
    pub fn new(blocks: Vec<Vec<usize>>, num_envs: usize) -> Result<Self> {
        let mut block_of = vec![usize::MAX; num_envs];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(IcpError::InvalidPartition("empty block".into()));
            }
            for &e in block {
                if e >= num_envs {
                    return Err(IcpError::InvalidPartition(alloc::format!("unknown environment {e}")));
                }
                if block_of[e] != usize::MAX {
                    return Err(IcpError::InvalidPartition(alloc::format!("environment {e} appears twice")));
                }
                block_of[e] = b;
            }
        }
        if let Some(e) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(IcpError::InvalidPartition(alloc::format!("environment {e} is not covered")));
        }
        Ok(EnvironmentGrouping { blocks, block_of, num_envs })
    }

    pub fn identity(num_envs: usize) -> Self {
        EnvironmentGrouping {
            blocks: (0..num_envs).map(|e| vec![e]).collect(),
            block_of: (0..num_envs).collect(),
            num_envs,
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Grouping equal to pooling with `self` first and `outer` second.
    pub fn compose(&self, outer: &EnvironmentGrouping) -> Result<EnvironmentGrouping> {
        if outer.num_envs != self.blocks.len() {
            return Err(IcpError::InvalidPartition("outer grouping does not match".into()));
        }
        let blocks = outer
            .blocks
            .iter()
            .map(|ob| {
                let mut merged: Vec<usize> = ob.iter().flat_map(|&b| self.blocks[b].iter().copied()).collect();
                merged.sort_unstable();
                merged
            })
            .collect();
        EnvironmentGrouping::new(blocks, self.num_envs)
    }
}
