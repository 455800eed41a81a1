use serde::{Deserialize, Serialize};

use super::LpError;

/// Sense of a linear row `a·x (sense) rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowSense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl RowSense {
    pub fn symbol(self) -> &'static str {
        match self {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        }
    }
}

/// One sparse row of a [`LinearProgram`].
#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub terms: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl LpRow {
    pub fn new(terms: Vec<(usize, f64)>, sense: RowSense, rhs: f64) -> Self {
        Self { terms, sense, rhs }
    }
}

/// A linear program in minimization form with bounded columns:
///
/// ```text
/// min  c·x
/// s.t. a_i·x (<=|=|>=) b_i
///      l <= x <= u
/// ```
///
/// Rows are stored both row-wise and column-wise. Duplicate entries within a
/// row are merged and explicit zeros are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    col_lower: Vec<f64>,
    col_upper: Vec<f64>,
    rows: Vec<LpRow>,
    columns: Vec<Vec<(usize, f64)>>,
}

impl LinearProgram {
    pub fn new(
        objective: Vec<f64>,
        col_lower: Vec<f64>,
        col_upper: Vec<f64>,
        rows: Vec<LpRow>,
    ) -> Result<Self, LpError> {
        let n = objective.len();
        if col_lower.len() != n || col_upper.len() != n {
            return Err(LpError::Structural(format!(
                "bound vectors have lengths {}/{} but there are {n} columns",
                col_lower.len(),
                col_upper.len()
            )));
        }
        if let Some(j) = objective.iter().position(|c| !c.is_finite()) {
            return Err(LpError::Structural(format!(
                "objective coefficient of column {j} is not finite"
            )));
        }
        for j in 0..n {
            if col_lower[j].is_nan() || col_upper[j].is_nan() {
                return Err(LpError::Structural(format!("column {j} has a NaN bound")));
            }
            if col_lower[j] == f64::INFINITY || col_upper[j] == f64::NEG_INFINITY {
                return Err(LpError::Structural(format!(
                    "column {j} has bounds [{}, {}]",
                    col_lower[j], col_upper[j]
                )));
            }
        }

        let mut merged_rows = Vec::with_capacity(rows.len());
        let mut columns = vec![Vec::new(); n];
        let mut slot = vec![usize::MAX; n];
        for (i, row) in rows.into_iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::Structural(format!("row {i} has a non-finite rhs")));
            }
            let mut terms: Vec<(usize, f64)> = Vec::with_capacity(row.terms.len());
            for &(j, a) in &row.terms {
                if j >= n {
                    return Err(LpError::Structural(format!(
                        "row {i} references column {j}, but there are only {n} columns"
                    )));
                }
                if !a.is_finite() {
                    return Err(LpError::Structural(format!(
                        "row {i} has a non-finite coefficient on column {j}"
                    )));
                }
                if slot[j] == usize::MAX {
                    slot[j] = terms.len();
                    terms.push((j, a));
                } else {
                    terms[slot[j]].1 += a;
                }
            }
            for &(j, _) in &terms {
                slot[j] = usize::MAX;
            }
            terms.retain(|&(_, a)| a != 0.0);
            for &(j, a) in &terms {
                columns[j].push((i, a));
            }
            merged_rows.push(LpRow { terms, ..row });
        }

        Ok(Self {
            objective,
            col_lower,
            col_upper,
            rows: merged_rows,
            columns,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn col_lower(&self) -> &[f64] {
        &self.col_lower
    }

    pub fn col_upper(&self) -> &[f64] {
        &self.col_upper
    }

    pub fn rows(&self) -> &[LpRow] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &LpRow {
        &self.rows[i]
    }

    /// Column-wise view: `(row, coefficient)` pairs of column `j`.
    pub fn column(&self, j: usize) -> &[(usize, f64)] {
        &self.columns[j]
    }

    pub fn n_nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.terms.len()).sum()
    }

    /// Copy of this program with different column bounds.
    pub fn with_bounds(&self, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, LpError> {
        if lower.len() != self.n_vars() || upper.len() != self.n_vars() {
            return Err(LpError::Structural("bound vector length mismatch".into()));
        }
        Ok(Self {
            col_lower: lower,
            col_upper: upper,
            ..self.clone()
        })
    }

    /// Copy of this program with a different objective vector.
    pub fn with_objective(&self, objective: Vec<f64>) -> Result<Self, LpError> {
        if objective.len() != self.n_vars() {
            return Err(LpError::Structural("objective length mismatch".into()));
        }
        Ok(Self {
            objective,
            ..self.clone()
        })
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.terms.iter().map(|&(j, a)| a * x[j]).sum())
            .collect()
    }
}

/// Largest violation of any row or column bound by `primal`; `0` for a
/// feasible point.
pub fn lp_feasibility_residual(lp: &LinearProgram, primal: &[f64]) -> Result<f64, LpError> {
    feasibility_residual_with_bounds(lp, lp.col_lower(), lp.col_upper(), primal)
}

pub(crate) fn feasibility_residual_with_bounds(
    lp: &LinearProgram,
    lower: &[f64],
    upper: &[f64],
    primal: &[f64],
) -> Result<f64, LpError> {
    if primal.len() != lp.n_vars() {
        return Err(LpError::Structural(format!(
            "point has {} entries, program has {} columns",
            primal.len(),
            lp.n_vars()
        )));
    }
    let mut worst: f64 = 0.0;
    for j in 0..lp.n_vars() {
        worst = worst.max(lower[j] - primal[j]).max(primal[j] - upper[j]);
    }
    for (row, act) in lp.rows().iter().zip(lp.row_activity(primal)) {
        let v = match row.sense {
            RowSense::Le => act - row.rhs,
            RowSense::Ge => row.rhs - act,
            RowSense::Eq => (act - row.rhs).abs(),
        };
        worst = worst.max(v);
    }
    Ok(worst)
}
