//! Bounded-variable revised primal simplex.
//!
//! Every row `i` gets a logical column `r_i` with `a_i·x - r_i = 0`; the row
//! sense becomes bounds on `r_i`. The basis inverse is kept explicitly and
//! updated by elementary row operations, with a Gauss-Jordan refactorization
//! every `refactor_every` pivots. Phase 1 minimizes the sum of bound
//! violations of the basic variables (costs recomputed each iteration);
//! phase 2 uses the true objective. Pricing is Dantzig's rule until
//! `bland_after` consecutive degenerate pivots, after which Bland's rule is
//! used until the next non-degenerate pivot.

use serde::{Deserialize, Serialize};

use super::{LinearProgram, LpError, RowSense};

/// Numerical tolerances of the simplex solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpTolerances {
    /// Largest bound/row violation accepted in a solution.
    pub feas_tol: f64,
    /// Primal/dual objective agreement, blended as `opt_tol * (1 + |obj|)`.
    pub opt_tol: f64,
    /// Smallest pivot element accepted in the ratio test.
    pub pivot_tol: f64,
    /// Reduced-cost threshold for pricing.
    pub dual_tol: f64,
    /// Violation at which a basic variable counts as infeasible during pivoting.
    pub primal_tol: f64,
}

impl Default for LpTolerances {
    fn default() -> Self {
        Self {
            feas_tol: 1e-6,
            opt_tol: 1e-6,
            pivot_tol: 1e-9,
            dual_tol: 1e-9,
            primal_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexOptions {
    pub tolerances: LpTolerances,
    /// Maximum number of iterations (pivots and bound flips).
    pub iteration_limit: u64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: u32,
    pub refactor_every: u32,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            tolerances: LpTolerances::default(),
            iteration_limit: 100_000,
            bland_after: 200,
            refactor_every: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Position of a column or row logical in a simplex basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic with no finite bound, held at zero.
    Free,
}

/// Basis statuses for every column and every row logical.
///
/// A row's status describes its activity relative to the row range: a tight
/// `<=` row is `AtUpper`, a tight `>=` row is `AtLower`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Basis {
    pub columns: Vec<BasisStatus>,
    pub rows: Vec<BasisStatus>,
}

impl Basis {
    pub fn n_basic(&self) -> usize {
        self.columns
            .iter()
            .chain(&self.rows)
            .filter(|s| **s == BasisStatus::Basic)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    /// Row duals `y`, with `reduced_costs = c - Aᵀy`.
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub row_activity: Vec<f64>,
    pub basis: Basis,
    pub objective: f64,
    /// `y·b` plus the bound terms of the reduced costs; equals `objective`
    /// at optimality up to the tolerance.
    pub dual_objective: f64,
    pub iterations: u64,
}

/// Solves `lp`, optionally starting from `warm`. A warm basis that does not
/// match the program's shape or is singular is ignored.
pub fn solve_lp(
    lp: &LinearProgram,
    warm: Option<&Basis>,
    options: &SimplexOptions,
) -> Result<LpSolution, LpError> {
    SimplexSolver::new(*options).solve(lp, warm)
}

/// Solver workspace. Holds no state between solves; one per environment.
#[derive(Debug, Clone, Default)]
pub struct SimplexSolver {
    options: SimplexOptions,
}

impl SimplexSolver {
    pub fn new(options: SimplexOptions) -> Self {
        Self { options }
    }

    pub fn options(&self) -> &SimplexOptions {
        &self.options
    }

    pub fn solve(&self, lp: &LinearProgram, warm: Option<&Basis>) -> Result<LpSolution, LpError> {
        self.solve_with_bounds(lp, lp.col_lower(), lp.col_upper(), warm)
    }

    /// Solves `lp` with its column bounds replaced by `lower`/`upper`.
    pub fn solve_with_bounds(
        &self,
        lp: &LinearProgram,
        lower: &[f64],
        upper: &[f64],
        warm: Option<&Basis>,
    ) -> Result<LpSolution, LpError> {
        if lower.len() != lp.n_vars() || upper.len() != lp.n_vars() {
            return Err(LpError::Structural("bound vector length mismatch".into()));
        }
        let mut run = Run::new(lp, lower, upper, &self.options);
        if (0..lp.n_vars()).any(|j| lower[j] > upper[j]) {
            return Ok(run.finish(LpStatus::Infeasible));
        }
        run.install_basis(warm);
        let status = run.iterate();
        Ok(run.finish(status))
    }

    /// Inverts the basis of `basis` once, for several solves that start from
    /// it. `None` if the shapes do not match or the basis is singular.
    pub fn factor(&self, lp: &LinearProgram, basis: &Basis) -> Option<FactoredBasis> {
        let mut run = Run::new(lp, lp.col_lower(), lp.col_upper(), &self.options);
        if !run.set_states(basis) || !run.refactor() {
            return None;
        }
        Some(FactoredBasis { basis: basis.clone(), binv: run.binv })
    }

    /// Like [`solve_with_bounds`](Self::solve_with_bounds) warm-started from
    /// `start`, without inverting the basis again.
    pub fn solve_factored(
        &self,
        lp: &LinearProgram,
        lower: &[f64],
        upper: &[f64],
        start: &FactoredBasis,
    ) -> Result<LpSolution, LpError> {
        if lower.len() != lp.n_vars() || upper.len() != lp.n_vars() {
            return Err(LpError::Structural("bound vector length mismatch".into()));
        }
        let mut run = Run::new(lp, lower, upper, &self.options);
        if (0..lp.n_vars()).any(|j| lower[j] > upper[j]) {
            return Ok(run.finish(LpStatus::Infeasible));
        }
        if !run.set_states(&start.basis) || start.binv.len() != run.m * run.m {
            return Err(LpError::Structural("factored basis does not match the program".into()));
        }
        run.binv = start.binv.clone();
        run.place_nonbasics();
        let status = run.iterate();
        Ok(run.finish(status))
    }
}

/// A basis together with its explicit inverse.
#[derive(Debug, Clone)]
pub struct FactoredBasis {
    basis: Basis,
    binv: Vec<f64>,
}

impl FactoredBasis {
    pub fn basis(&self) -> &Basis {
        &self.basis
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    Free,
}

struct Run<'a> {
    lp: &'a LinearProgram,
    opts: &'a SimplexOptions,
    n: usize,
    m: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    state: Vec<VarState>,
    x: Vec<f64>,
    head: Vec<usize>,
    binv: Vec<f64>,
    iterations: u64,
}

#[derive(Clone, Copy)]
struct Pivot {
    row: usize,
    step: f64,
    to_upper: bool,
}

impl<'a> Run<'a> {
    fn new(lp: &'a LinearProgram, lower: &[f64], upper: &[f64], opts: &'a SimplexOptions) -> Self {
        let n = lp.n_vars();
        let m = lp.n_rows();
        let mut lo = lower.to_vec();
        let mut up = upper.to_vec();
        for row in lp.rows() {
            let (l, u) = match row.sense {
                RowSense::Le => (f64::NEG_INFINITY, row.rhs),
                RowSense::Ge => (row.rhs, f64::INFINITY),
                RowSense::Eq => (row.rhs, row.rhs),
            };
            lo.push(l);
            up.push(u);
        }
        let mut cost = lp.objective().to_vec();
        cost.resize(n + m, 0.0);
        Self {
            lp,
            opts,
            n,
            m,
            lower: lo,
            upper: up,
            cost,
            state: vec![VarState::AtLower; n + m],
            x: vec![0.0; n + m],
            head: Vec::new(),
            binv: Vec::new(),
            iterations: 0,
        }
    }

    /// Copies the statuses of `basis` and sets the basic head; `false` if the
    /// shape does not fit.
    fn set_states(&mut self, basis: &Basis) -> bool {
        let (n, m) = (self.n, self.m);
        if basis.columns.len() != n || basis.rows.len() != m || basis.n_basic() != m {
            return false;
        }
        for (k, s) in basis.columns.iter().chain(&basis.rows).enumerate() {
            self.state[k] = match s {
                BasisStatus::Basic => VarState::Basic,
                BasisStatus::AtLower => VarState::AtLower,
                BasisStatus::AtUpper => VarState::AtUpper,
                BasisStatus::Free => VarState::Free,
            };
        }
        self.head = (0..n + m).filter(|&k| self.state[k] == VarState::Basic).collect();
        true
    }

    fn install_basis(&mut self, warm: Option<&Basis>) {
        let installed = warm.is_some_and(|b| self.set_states(b) && self.refactor());
        if !installed {
            self.slack_basis();
        }
        self.place_nonbasics();
    }

    fn place_nonbasics(&mut self) {
        for k in 0..self.n + self.m {
            if self.state[k] != VarState::Basic {
                self.place_nonbasic(k);
            }
        }
        self.recompute_basics();
    }

    fn slack_basis(&mut self) {
        let (n, m) = (self.n, self.m);
        for s in self.state.iter_mut().take(n) {
            if *s == VarState::Basic {
                *s = VarState::AtLower;
            }
        }
        for k in n..n + m {
            self.state[k] = VarState::Basic;
        }
        self.head = (n..n + m).collect();
        self.binv = vec![0.0; m * m];
        for i in 0..m {
            self.binv[i * m + i] = -1.0;
        }
    }

    /// Snaps a nonbasic variable onto a finite bound consistent with its state.
    fn place_nonbasic(&mut self, k: usize) {
        let (l, u) = (self.lower[k], self.upper[k]);
        let prefer_upper = self.state[k] == VarState::AtUpper;
        let (state, value) = match (l.is_finite(), u.is_finite()) {
            (false, false) => (VarState::Free, 0.0),
            (true, false) => (VarState::AtLower, l),
            (false, true) => (VarState::AtUpper, u),
            (true, true) if prefer_upper => (VarState::AtUpper, u),
            (true, true) => (VarState::AtLower, l),
        };
        self.state[k] = state;
        self.x[k] = value;
    }

    fn column_dot(&self, k: usize, y: &[f64]) -> f64 {
        if k < self.n {
            self.lp.column(k).iter().map(|&(i, a)| a * y[i]).sum()
        } else {
            -y[k - self.n]
        }
    }

    /// `B⁻¹ a_k`.
    fn ftran(&self, k: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        if k < self.n {
            let col = self.lp.column(k);
            for (r, out) in alpha.iter_mut().enumerate() {
                let row = &self.binv[r * m..(r + 1) * m];
                *out = col.iter().map(|&(i, a)| row[i] * a).sum();
            }
        } else {
            let i = k - self.n;
            for (r, out) in alpha.iter_mut().enumerate() {
                *out = -self.binv[r * m + i];
            }
        }
        alpha
    }

    /// `c_Bᵀ B⁻¹`.
    fn btran(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (r, &c) in cb.iter().enumerate() {
            if c != 0.0 {
                let row = &self.binv[r * m..(r + 1) * m];
                for (yi, b) in y.iter_mut().zip(row) {
                    *yi += c * b;
                }
            }
        }
        y
    }

    /// Rebuilds `B⁻¹` from scratch; `false` if the basis is singular.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        if self.head.len() != m {
            return false;
        }
        let mut b = vec![0.0; m * m];
        for (r, &k) in self.head.iter().enumerate() {
            if k < self.n {
                for &(i, a) in self.lp.column(k) {
                    b[i * m + r] = a;
                }
            } else {
                b[(k - self.n) * m + r] = -1.0;
            }
        }
        match invert(&b, m) {
            Some(inv) => {
                self.binv = inv;
                true
            }
            None => false,
        }
    }

    fn recompute_basics(&mut self) {
        let (n, m) = (self.n, self.m);
        let mut rhs = vec![0.0; m];
        for k in 0..n + m {
            if self.state[k] == VarState::Basic || self.x[k] == 0.0 {
                continue;
            }
            if k < n {
                for &(i, a) in self.lp.column(k) {
                    rhs[i] -= a * self.x[k];
                }
            } else {
                rhs[k - n] += self.x[k];
            }
        }
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            let v: f64 = row.iter().zip(&rhs).map(|(b, v)| b * v).sum();
            self.x[self.head[r]] = v;
        }
    }

    fn refresh(&mut self) {
        if !self.refactor() {
            // Numerically singular after updates: restart from the slack basis.
            self.slack_basis();
            self.place_nonbasics();
            return;
        }
        self.recompute_basics();
    }

    fn infeasibility(&self, k: usize, tol: f64) -> f64 {
        let v = self.x[k];
        if v < self.lower[k] - tol {
            self.lower[k] - v
        } else if v > self.upper[k] + tol {
            v - self.upper[k]
        } else {
            0.0
        }
    }

    fn iterate(&mut self) -> LpStatus {
        let tol = self.opts.tolerances;
        let mut phase_tol = tol.primal_tol;
        let mut since_refactor: u32 = 0;
        let mut degenerate_run: u32 = 0;
        let mut stalls = 0;

        loop {
            if since_refactor >= self.opts.refactor_every {
                self.refresh();
                since_refactor = 0;
            }

            let max_infeasibility = self
                .head
                .iter()
                .map(|&k| self.infeasibility(k, phase_tol))
                .fold(0.0, f64::max);
            let phase_one = max_infeasibility > 0.0;
            let cb: Vec<f64> = self
                .head
                .iter()
                .map(|&k| {
                    if !phase_one {
                        self.cost[k]
                    } else if self.x[k] < self.lower[k] - phase_tol {
                        -1.0
                    } else if self.x[k] > self.upper[k] + phase_tol {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            let y = self.btran(&cb);
            let bland = degenerate_run >= self.opts.bland_after;

            let Some((entering, dir)) = self.price(&y, phase_one, bland) else {
                if since_refactor > 0 {
                    self.refresh();
                    since_refactor = 0;
                    continue;
                }
                if !phase_one {
                    return LpStatus::Optimal;
                }
                if max_infeasibility > tol.feas_tol {
                    return LpStatus::Infeasible;
                }
                // Residual violation is within the acceptance tolerance.
                phase_tol = tol.feas_tol;
                continue;
            };

            if self.iterations >= self.opts.iteration_limit {
                return LpStatus::IterationLimit;
            }

            let alpha = self.ftran(entering);
            let pivot = self.ratio_test(&alpha, dir, phase_one, phase_tol, bland);
            let flip = match self.state[entering] {
                VarState::Free => f64::INFINITY,
                _ => self.upper[entering] - self.lower[entering],
            };

            match pivot {
                Some(p) if p.step < flip => {
                    self.apply_step(&alpha, entering, dir, p.step);
                    self.pivot(&alpha, entering, p);
                    degenerate_run = if p.step <= 1e-12 { degenerate_run + 1 } else { 0 };
                    since_refactor += 1;
                }
                _ if flip.is_finite() => {
                    self.apply_step(&alpha, entering, dir, flip);
                    let (state, value) = if dir > 0.0 {
                        (VarState::AtUpper, self.upper[entering])
                    } else {
                        (VarState::AtLower, self.lower[entering])
                    };
                    self.state[entering] = state;
                    self.x[entering] = value;
                    degenerate_run = 0;
                }
                _ => {
                    if !phase_one {
                        return LpStatus::Unbounded;
                    }
                    // Phase 1 always has a blocking variable in exact
                    // arithmetic; a miss means the factorization drifted.
                    stalls += 1;
                    if stalls > 5 {
                        return LpStatus::IterationLimit;
                    }
                    self.refresh();
                    since_refactor = 0;
                    continue;
                }
            }
            self.iterations += 1;
        }
    }

    fn price(&self, y: &[f64], phase_one: bool, bland: bool) -> Option<(usize, f64)> {
        let dual_tol = self.opts.tolerances.dual_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for k in 0..self.n + self.m {
            let state = self.state[k];
            if state == VarState::Basic || self.lower[k] == self.upper[k] {
                continue;
            }
            let c = if phase_one { 0.0 } else { self.cost[k] };
            let d = c - self.column_dot(k, y);
            let dir = match state {
                VarState::AtLower if d < -dual_tol => 1.0,
                VarState::AtUpper if d > dual_tol => -1.0,
                VarState::Free if d.abs() > dual_tol => -d.signum(),
                _ => continue,
            };
            if bland {
                return Some((k, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((k, dir));
            }
        }
        best
    }

    fn ratio_test(
        &self,
        alpha: &[f64],
        dir: f64,
        phase_one: bool,
        phase_tol: f64,
        bland: bool,
    ) -> Option<Pivot> {
        let pivot_tol = self.opts.tolerances.pivot_tol;
        let mut best: Option<(Pivot, f64, usize)> = None;
        for (r, &a) in alpha.iter().enumerate() {
            if a.abs() <= pivot_tol {
                continue;
            }
            let k = self.head[r];
            let rate = -dir * a;
            let (v, l, u) = (self.x[k], self.lower[k], self.upper[k]);
            let (bound, to_upper) = if rate < 0.0 {
                if phase_one && v > u + phase_tol {
                    (u, true)
                } else if phase_one && v < l - phase_tol {
                    continue;
                } else if l.is_finite() {
                    (l, false)
                } else {
                    continue;
                }
            } else if phase_one && v < l - phase_tol {
                (l, false)
            } else if phase_one && v > u + phase_tol {
                continue;
            } else if u.is_finite() {
                (u, true)
            } else {
                continue;
            };
            let step = ((bound - v) / rate).max(0.0);
            let better = match &best {
                None => true,
                Some((p, size, idx)) => {
                    if step < p.step - 1e-12 {
                        true
                    } else if step <= p.step + 1e-12 {
                        if bland {
                            k < *idx
                        } else {
                            a.abs() > *size
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                best = Some((
                    Pivot {
                        row: r,
                        step,
                        to_upper,
                    },
                    a.abs(),
                    k,
                ));
            }
        }
        best.map(|(p, _, _)| p)
    }

    fn apply_step(&mut self, alpha: &[f64], entering: usize, dir: f64, step: f64) {
        if step == 0.0 {
            return;
        }
        for (r, &a) in alpha.iter().enumerate() {
            self.x[self.head[r]] -= dir * a * step;
        }
        self.x[entering] += dir * step;
    }

    fn pivot(&mut self, alpha: &[f64], entering: usize, p: Pivot) {
        let m = self.m;
        let leaving = self.head[p.row];
        if p.to_upper {
            self.state[leaving] = VarState::AtUpper;
            self.x[leaving] = self.upper[leaving];
        } else {
            self.state[leaving] = VarState::AtLower;
            self.x[leaving] = self.lower[leaving];
        }
        self.head[p.row] = entering;
        self.state[entering] = VarState::Basic;

        let pr = p.row;
        let inv_pivot = 1.0 / alpha[pr];
        for v in &mut self.binv[pr * m..(pr + 1) * m] {
            *v *= inv_pivot;
        }
        let pivot_row: Vec<f64> = self.binv[pr * m..(pr + 1) * m].to_vec();
        for (r, &a) in alpha.iter().enumerate() {
            if r == pr || a == 0.0 {
                continue;
            }
            let row = &mut self.binv[r * m..(r + 1) * m];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= a * pv;
            }
        }
    }

    fn finish(self, status: LpStatus) -> LpSolution {
        let (n, m) = (self.n, self.m);
        let to_public = |s: VarState| match s {
            VarState::Basic => BasisStatus::Basic,
            VarState::AtLower => BasisStatus::AtLower,
            VarState::AtUpper => BasisStatus::AtUpper,
            VarState::Free => BasisStatus::Free,
        };
        let basis = Basis {
            columns: self.state[..n].iter().copied().map(to_public).collect(),
            rows: self.state[n..].iter().copied().map(to_public).collect(),
        };
        let primal = self.x[..n].to_vec();
        let row_activity = if self.head.len() == m {
            self.x[n..].to_vec()
        } else {
            self.lp.row_activity(&primal)
        };
        let objective = self.lp.objective_value(&primal);

        let (duals, reduced_costs, dual_objective) = if status == LpStatus::Optimal {
            let cb: Vec<f64> = self.head.iter().map(|&k| self.cost[k]).collect();
            let y = self.btran(&cb);
            let dual_tol = self.opts.tolerances.dual_tol;
            let mut d = vec![0.0; n];
            let mut dual_obj: f64 = self.lp.rows().iter().zip(&y).map(|(r, yi)| r.rhs * yi).sum();
            for j in 0..n {
                if self.state[j] == VarState::Basic {
                    continue;
                }
                d[j] = self.cost[j] - self.column_dot(j, &y);
                let bound = if d[j] > 0.0 { self.lower[j] } else { self.upper[j] };
                if bound.is_finite() {
                    dual_obj += d[j] * bound;
                } else if d[j].abs() > dual_tol {
                    dual_obj = f64::NEG_INFINITY;
                }
            }
            (y, d, dual_obj)
        } else {
            (vec![0.0; m], vec![0.0; n], f64::NAN)
        };

        LpSolution {
            status,
            primal,
            duals,
            reduced_costs,
            row_activity,
            basis,
            objective,
            dual_objective,
            iterations: self.iterations,
        }
    }
}

/// Dense Gauss-Jordan inverse with partial pivoting.
fn invert(a: &[f64], m: usize) -> Option<Vec<f64>> {
    let mut a = a.to_vec();
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    for col in 0..m {
        let (piv, max) = (col..m)
            .map(|r| (r, a[r * m + col].abs()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if max < 1e-11 {
            return None;
        }
        if piv != col {
            for c in 0..m {
                a.swap(piv * m + c, col * m + c);
                inv.swap(piv * m + c, col * m + c);
            }
        }
        let p = 1.0 / a[col * m + col];
        for c in 0..m {
            a[col * m + c] *= p;
            inv[col * m + c] *= p;
        }
        // Basis matrices are sparse; only the pivot row's nonzeros matter.
        let a_nz: Vec<usize> = (col..m).filter(|&c| a[col * m + c] != 0.0).collect();
        let inv_nz: Vec<usize> = (0..m).filter(|&c| inv[col * m + c] != 0.0).collect();
        for r in 0..m {
            if r == col {
                continue;
            }
            let f = a[r * m + col];
            if f == 0.0 {
                continue;
            }
            for &c in &a_nz {
                a[r * m + c] -= f * a[col * m + c];
            }
            for &c in &inv_nz {
                inv[r * m + c] -= f * inv[col * m + c];
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{lp_feasibility_residual, LpRow};

    fn solve(lp: &LinearProgram) -> LpSolution {
        solve_lp(lp, None, &SimplexOptions::default()).unwrap()
    }

    #[test]
    fn single_variable_bound_row() {
        let lp = LinearProgram::new(
            vec![1.0],
            vec![0.0],
            vec![10.0],
            vec![LpRow::new(vec![(0, 1.0)], RowSense::Ge, 3.0)],
        )
        .unwrap();
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 3.0).abs() < 1e-9);
        assert!((sol.dual_objective - 3.0).abs() < 1e-9);
        assert!((sol.duals[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_row_and_bound() {
        let lp = LinearProgram::new(
            vec![0.0],
            vec![0.0],
            vec![f64::INFINITY],
            vec![LpRow::new(vec![(0, 1.0)], RowSense::Le, -1.0)],
        )
        .unwrap();
        assert_eq!(solve(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn crossed_bounds_are_infeasible_without_pivots() {
        let lp = LinearProgram::new(vec![1.0], vec![2.0], vec![1.0], vec![]).unwrap();
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Infeasible);
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn unbounded_direction() {
        let lp = LinearProgram::new(
            vec![-1.0, 0.0],
            vec![0.0, 0.0],
            vec![f64::INFINITY, 1.0],
            vec![LpRow::new(vec![(0, 1.0), (1, -1.0)], RowSense::Ge, 0.0)],
        )
        .unwrap();
        assert_eq!(solve(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variable_pinned_by_equality() {
        // min x + y, x free, y in [0, 4], x - y = -2
        let lp = LinearProgram::new(
            vec![1.0, 1.0],
            vec![f64::NEG_INFINITY, 0.0],
            vec![f64::INFINITY, 4.0],
            vec![LpRow::new(vec![(0, 1.0), (1, -1.0)], RowSense::Eq, -2.0)],
        )
        .unwrap();
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective + 2.0).abs() < 1e-9);
        assert!(lp_feasibility_residual(&lp, &sol.primal).unwrap() < 1e-9);
    }

    #[test]
    fn no_rows_moves_columns_to_best_bounds() {
        let lp = LinearProgram::new(
            vec![2.0, -3.0],
            vec![-1.0, 0.0],
            vec![5.0, 7.0],
            vec![],
        )
        .unwrap();
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.primal, vec![-1.0, 7.0]);
        assert_eq!(sol.objective, -23.0);
    }

    #[test]
    fn iteration_cap_reports_limit() {
        let lp = LinearProgram::new(
            vec![-1.0, -1.0],
            vec![0.0; 2],
            vec![10.0; 2],
            vec![
                LpRow::new(vec![(0, 1.0), (1, 2.0)], RowSense::Le, 8.0),
                LpRow::new(vec![(0, 3.0), (1, 1.0)], RowSense::Le, 9.0),
            ],
        )
        .unwrap();
        let opts = SimplexOptions {
            iteration_limit: 1,
            ..Default::default()
        };
        let sol = solve_lp(&lp, None, &opts).unwrap();
        assert_eq!(sol.status, LpStatus::IterationLimit);
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.basis.n_basic(), 2);
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // Beale (1955): cycles under textbook Dantzig pricing without safeguards.
        let lp = LinearProgram::new(
            vec![-0.75, 20.0, -0.5, 6.0],
            vec![0.0; 4],
            vec![f64::INFINITY; 4],
            vec![
                LpRow::new(vec![(0, 0.25), (1, -8.0), (2, -1.0), (3, 9.0)], RowSense::Le, 0.0),
                LpRow::new(vec![(0, 0.5), (1, -12.0), (2, -0.5), (3, 3.0)], RowSense::Le, 0.0),
                LpRow::new(vec![(2, 1.0)], RowSense::Le, 1.0),
            ],
        )
        .unwrap();
        for bland_after in [0, 1, 200] {
            let opts = SimplexOptions {
                bland_after,
                ..Default::default()
            };
            let sol = solve_lp(&lp, None, &opts).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal);
            assert!((sol.objective + 1.25).abs() < 1e-9, "{}", sol.objective);
        }
    }

    #[test]
    fn warm_start_from_optimal_basis_takes_no_pivots() {
        let lp = LinearProgram::new(
            vec![-1.0, -2.0],
            vec![0.0; 2],
            vec![4.0; 2],
            vec![LpRow::new(vec![(0, 1.0), (1, 1.0)], RowSense::Le, 5.0)],
        )
        .unwrap();
        let cold = solve(&lp);
        let warm = solve_lp(&lp, Some(&cold.basis), &SimplexOptions::default()).unwrap();
        assert_eq!(warm.status, LpStatus::Optimal);
        assert_eq!(warm.iterations, 0);
        assert!((warm.objective - cold.objective).abs() < 1e-12);
    }

    #[test]
    fn mismatched_warm_basis_is_ignored() {
        let lp = LinearProgram::new(vec![1.0], vec![1.0], vec![2.0], vec![]).unwrap();
        let bogus = Basis {
            columns: vec![BasisStatus::Basic, BasisStatus::Basic],
            rows: vec![],
        };
        let sol = solve_lp(&lp, Some(&bogus), &SimplexOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.objective, 1.0);
    }

    #[test]
    fn invert_detects_singular_matrix() {
        assert!(invert(&[1.0, 2.0, 2.0, 4.0], 2).is_none());
        let inv = invert(&[0.0, 1.0, 1.0, 0.0], 2).unwrap();
        assert_eq!(inv, vec![0.0, 1.0, 1.0, 0.0]);
    }
}
