/// Product-score floor.
pub const SCORE_EPS: f64 = 1e-6;

/// Per-variable averages of the objective gain per unit of fractional
/// distance, kept separately for the down and up directions.
#[derive(Debug, Clone, PartialEq)]
pub struct Pseudocosts {
    down_sum: Vec<f64>,
    down_n: Vec<u32>,
    up_sum: Vec<f64>,
    up_n: Vec<u32>,
}

impl Pseudocosts {
    pub fn new(n_vars: usize) -> Self {
        Self {
            down_sum: vec![0.0; n_vars],
            down_n: vec![0; n_vars],
            up_sum: vec![0.0; n_vars],
            up_n: vec![0; n_vars],
        }
    }

    pub fn record(&mut self, var: usize, up: bool, gain_per_unit: f64) {
        let g = gain_per_unit.max(0.0);
        if up {
            self.up_sum[var] += g;
            self.up_n[var] += 1;
        } else {
            self.down_sum[var] += g;
            self.down_n[var] += 1;
        }
    }

    pub fn down(&self, var: usize) -> Option<f64> {
        (self.down_n[var] > 0).then(|| self.down_sum[var] / self.down_n[var] as f64)
    }

    pub fn up(&self, var: usize) -> Option<f64> {
        (self.up_n[var] > 0).then(|| self.up_sum[var] / self.up_n[var] as f64)
    }

    /// Mean over initialized variables in one direction.
    pub fn average(&self, up: bool) -> Option<f64> {
        let mut total = 0.0;
        let mut count = 0usize;
        for j in 0..self.down_n.len() {
            if let Some(v) = if up { self.up(j) } else { self.down(j) } {
                total += v;
                count += 1;
            }
        }
        (count > 0).then(|| total / count as f64)
    }

    /// Product score of branching on `var` at LP value `x`. Directions
    /// without history borrow the average over initialized variables;
    /// `None` when no variable has history in that direction.
    pub fn score(&self, var: usize, x: f64) -> Option<f64> {
        let down = self.down(var).or_else(|| self.average(false))?;
        let up = self.up(var).or_else(|| self.average(true))?;
        let f_down = x - x.floor();
        let f_up = x.ceil() - x;
        Some((down * f_down).max(SCORE_EPS) * (up * f_up).max(SCORE_EPS))
    }

    /// Highest score among `(variable, value)` candidates, lowest index on
    /// ties, or `None` if no direction has history yet.
    pub fn select(&self, candidates: &[(usize, f64)]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &(j, x) in candidates {
            let s = self.score(j, x)?;
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((j, s));
            }
        }
        best.map(|(j, _)| j)
    }
}

/// Largest fractionality, lowest index on ties.
pub fn most_infeasible(candidates: &[(usize, f64)]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &(j, f) in candidates {
        if best.is_none_or(|(_, b)| f > b) {
            best = Some((j, f));
        }
    }
    best.map(|(j, _)| j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn averages_per_direction() {
        let mut pc = Pseudocosts::new(3);
        pc.record(1, true, 4.0);
        pc.record(1, true, 2.0);
        pc.record(1, false, 1.0);
        assert_eq!(pc.up(1), Some(3.0));
        assert_eq!(pc.down(1), Some(1.0));
        assert_eq!(pc.up(0), None);
        assert_eq!(pc.average(true), Some(3.0));
    }

    #[test]
    fn no_history_means_no_selection() {
        let pc = Pseudocosts::new(2);
        assert_eq!(pc.select(&[(0, 0.5), (1, 0.3)]), None);
    }

    #[test]
    fn uninitialized_variables_borrow_the_average() {
        let mut pc = Pseudocosts::new(2);
        pc.record(0, true, 1.0);
        pc.record(0, false, 1.0);
        // Same pseudocosts for both; the more central value wins.
        assert_eq!(pc.select(&[(0, 0.1), (1, 0.5)]), Some(1));
    }

    #[test]
    fn product_uses_epsilon_floor() {
        let mut pc = Pseudocosts::new(1);
        pc.record(0, true, 0.0);
        pc.record(0, false, 2.0);
        let s = pc.score(0, 0.25).unwrap();
        assert!((s - 0.5 * SCORE_EPS).abs() < 1e-15);
    }

    #[test]
    fn most_infeasible_breaks_ties_low() {
        assert_eq!(most_infeasible(&[(2, 0.5), (4, 0.5), (1, 0.2)]), Some(2));
        assert_eq!(most_infeasible(&[]), None);
    }
}
