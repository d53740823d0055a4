//! Dense two-phase simplex for small standard-form linear programs
//!
//! ```text
//! minimize c.x  subject to  A x = b,  x >= 0
//! ```
//!
//! Entering columns follow Dantzig's rule, ties broken by the lowest index;
//! after a run of degenerate pivots the solver falls back to Bland's rule,
//! which cannot cycle. The ratio test is Harris' two-pass rule, and the
//! tableau is rebuilt from an LU factorization of the basis at regular
//! intervals and before termination, so rounding does not accumulate over
//! long degenerate runs. Redundant equality rows are detected after phase
//! one and dropped. Dual values are read off the artificial columns of the
//! final tableau.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("problem is infeasible (phase one objective {0:e})")]
    Infeasible(f64),
    #[error("problem is unbounded")]
    Unbounded,
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("malformed problem: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One multiplier per equality row; `y.A_j <= c_j` for every column and
    /// `y.b` equals the objective at optimality.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

const PIVOT_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-11;
const DEGENERATE_RUN: usize = 64;
const HARRIS_SLACK: f64 = 1e-9;
const REFRESH_EVERY: usize = 100;

impl LinearProgram {
    /// `a` is row-major with `b.len()` rows and `c.len()` columns.
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self, LpError> {
        let (rows, cols) = (b.len(), c.len());
        if a.len() != rows * cols {
            return Err(LpError::Malformed(format!(
                "constraint matrix has {} entries, expected {rows}x{cols}",
                a.len()
            )));
        }
        if a.iter().chain(&b).chain(&c).any(|v| !v.is_finite()) {
            return Err(LpError::Malformed("non-finite data".into()));
        }
        Ok(LinearProgram { rows, cols, a, b, c })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        Tableau::new(self).run(self)
    }
}

struct Tableau {
    m: usize,
    n: usize,
    width: usize,
    data: Vec<f64>,
    original: Vec<f64>,
    costs: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    active: Vec<bool>,
    flipped: Vec<bool>,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let (m, n) = (lp.rows, lp.cols);
        let width = n + m + 1;
        let mut data = vec![0.0; m * width];
        let mut flipped = vec![false; m];
        for i in 0..m {
            let sign = if lp.b[i] < 0.0 {
                flipped[i] = true;
                -1.0
            } else {
                1.0
            };
            let row = &mut data[i * width..(i + 1) * width];
            for (r, a) in row[..n].iter_mut().zip(&lp.a[i * n..(i + 1) * n]) {
                *r = sign * a;
            }
            row[n + i] = 1.0;
            row[width - 1] = sign * lp.b[i];
        }
        Tableau {
            m,
            n,
            width,
            original: data.clone(),
            costs: vec![0.0; n + m],
            data,
            cost: vec![0.0; width],
            basis: (n..n + m).collect(),
            active: vec![true; m],
            flipped,
            iterations: 0,
            max_iterations: 50 * (n + m) + 1000,
        }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width - 1)
    }

    /// Rebuilds the reduced-cost row for column costs `costs` (length `n + m`).
    fn price(&mut self, costs: &[f64]) {
        let w = self.width;
        self.costs = costs.to_vec();
        self.cost.iter_mut().for_each(|v| *v = 0.0);
        self.cost[..w - 1].copy_from_slice(costs);
        for i in 0..self.m {
            if !self.active[i] {
                continue;
            }
            let cb = costs[self.basis[i]];
            if cb != 0.0 {
                let row = &self.data[i * w..(i + 1) * w];
                for (r, a) in self.cost.iter_mut().zip(row) {
                    *r -= cb * a;
                }
            }
        }
    }

    /// Recomputes `B^-1 [A | I | b]` and the reduced costs from the original
    /// data. Returns false when the basis matrix is numerically singular.
    fn refresh(&mut self) -> bool {
        let (m, w) = (self.m, self.width);
        let basis = nalgebra::DMatrix::from_fn(m, m, |i, k| self.original[i * w + self.basis[k]]);
        let Some(inv) = basis.try_inverse() else { return false };
        let full = nalgebra::DMatrix::from_row_slice(m, w, &self.original);
        let fresh = inv * full;
        for i in 0..m {
            for j in 0..w {
                self.data[i * w + j] = fresh[(i, j)];
            }
        }
        let costs = self.costs.clone();
        self.price(&costs);
        true
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let w = self.width;
        let piv = self.at(p, q);
        {
            let row = &mut self.data[p * w..(p + 1) * w];
            row.iter_mut().for_each(|v| *v /= piv);
            row[q] = 1.0;
        }
        let pivot_row: Vec<f64> = self.data[p * w..(p + 1) * w].to_vec();
        for i in 0..self.m {
            if i == p || !self.active[i] {
                continue;
            }
            let f = self.data[i * w + q];
            if f != 0.0 {
                let row = &mut self.data[i * w..(i + 1) * w];
                for (r, pr) in row.iter_mut().zip(&pivot_row) {
                    *r -= f * pr;
                }
                row[q] = 0.0;
            }
        }
        let f = self.cost[q];
        if f != 0.0 {
            for (r, pr) in self.cost.iter_mut().zip(&pivot_row) {
                *r -= f * pr;
            }
            self.cost[q] = 0.0;
        }
        self.basis[p] = q;
        self.iterations += 1;
    }

    /// Runs simplex iterations over the first `limit` columns.
    fn optimize(&mut self, limit: usize) -> Result<(), LpError> {
        let mut degenerate = 0usize;
        let mut since_refresh = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(LpError::IterationLimit(self.max_iterations));
            }
            if since_refresh >= REFRESH_EVERY && self.refresh() {
                since_refresh = 0;
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let mut entering = None;
            let mut best = -COST_EPS;
            for j in 0..limit {
                let r = self.cost[j];
                if r < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = r;
                }
            }
            let Some(q) = entering else {
                // confirm optimality on a freshly factorized tableau
                if since_refresh > 0 && self.refresh() {
                    since_refresh = 0;
                    continue;
                }
                return Ok(());
            };
            let Some((p, ratio)) = self.leaving_row(q, bland) else {
                if since_refresh > 0 && self.refresh() {
                    since_refresh = 0;
                    continue;
                }
                return Err(LpError::Unbounded);
            };
            if ratio <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(p, q);
            since_refresh += 1;
        }
    }

    /// Harris ratio test: among rows whose ratio is within the slack of the
    /// smallest relaxed ratio, take the largest pivot. Under Bland's rule
    /// ties go to the lowest basic index instead.
    fn leaving_row(&self, q: usize, bland: bool) -> Option<(usize, f64)> {
        let candidates = (0..self.m).filter(|&i| self.active[i] && self.at(i, q) > PIVOT_EPS);
        if bland {
            let mut leaving: Option<(usize, f64)> = None;
            for i in candidates {
                let ratio = self.rhs(i).max(0.0) / self.at(i, q);
                let better = match leaving {
                    None => true,
                    Some((k, r)) => ratio < r - 1e-14 || (ratio <= r + 1e-14 && self.basis[i] < self.basis[k]),
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            return leaving;
        }
        let bound = candidates
            .clone()
            .map(|i| (self.rhs(i).max(0.0) + HARRIS_SLACK) / self.at(i, q))
            .fold(f64::INFINITY, f64::min);
        if !bound.is_finite() {
            return None;
        }
        let mut leaving: Option<(usize, f64)> = None;
        for i in candidates {
            let a = self.at(i, q);
            let ratio = self.rhs(i).max(0.0) / a;
            if ratio <= bound && leaving.is_none_or(|(k, _)| a > self.at(k, q)) {
                leaving = Some((i, ratio));
            }
        }
        leaving
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        let (m, n) = (self.m, self.n);
        let scale = 1.0 + lp.b.iter().map(|v| v.abs()).fold(0.0, f64::max);

        // Phase one: minimize the sum of artificials.
        let mut phase1 = vec![0.0; n + m];
        phase1[n..].iter_mut().for_each(|v| *v = 1.0);
        self.price(&phase1);
        self.optimize(n)?;
        let infeasibility: f64 = (0..m).filter(|&i| self.basis[i] >= n).map(|i| self.rhs(i)).sum();
        if infeasibility > 1e-9 * scale {
            return Err(LpError::Infeasible(infeasibility));
        }

        // Drive remaining artificials out of the basis or drop their rows.
        for i in 0..m {
            if self.basis[i] < n {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                let a = self.at(i, j).abs();
                if a > 1e-9 && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            match best {
                Some((j, _)) => self.pivot(i, j),
                None => self.active[i] = false,
            }
        }

        // Phase two on the original costs; artificials may not re-enter.
        let mut costs = lp.c.clone();
        costs.extend(std::iter::repeat_n(0.0, m));
        self.price(&costs);
        self.optimize(n)?;

        let mut x = vec![0.0; n];
        for i in 0..m {
            if self.active[i] && self.basis[i] < n {
                x[self.basis[i]] = self.rhs(i).max(0.0);
            }
        }
        let objective = x.iter().zip(&lp.c).map(|(a, b)| a * b).sum();
        let duals = (0..m)
            .map(|i| {
                // A dropped row keeps its artificial basic at zero cost, so
                // the reduced cost still yields the matching multiplier.
                let y = -self.cost[n + i];
                if self.flipped[i] {
                    -y
                } else {
                    y
                }
            })
            .collect();
        Ok(LpSolution { x, objective, duals, iterations: self.iterations })
    }
}
