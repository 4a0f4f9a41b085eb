//! Dense two-phase primal simplex.
//!
//! Minimizes `c.x` subject to linear rows and `0 <= x <= u`. Pivoting uses
//! Dantzig's rule and switches to Bland's rule after a run of degenerate
//! pivots, which rules out cycling. All choices are deterministic.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const ITERATION_CAP: usize = 1_000_000;
const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const PHASE_ONE_TOL: f64 = 1e-7;
/// Degenerate pivots in a row before Bland's rule takes over.
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Bland's smallest-index rule throughout.
    Bland,
    /// Largest reduced cost, falling back to Bland on degenerate stalls.
    Dantzig,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub name: String,
}

/// `minimize objective . x` over the rows, with `0 <= x_i <= upper_i`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    n_vars: usize,
    objective: Vec<f64>,
    upper: Vec<Option<f64>>,
    rows: Vec<Row>,
    names: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(LpSolution),
    /// Phase 1 could not drive the artificials to zero.
    Infeasible { residual: f64 },
    Unbounded,
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        LinearProgram {
            n_vars,
            objective: vec![0.0; n_vars],
            upper: vec![None; n_vars],
            rows: Vec::new(),
            names: (0..n_vars).map(|i| format!("x{i}")).collect(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn set_name(&mut self, var: usize, name: impl Into<String>) {
        self.names[var] = name.into();
    }

    pub fn set_objective(&mut self, var: usize, c: f64) {
        self.objective[var] = c;
    }

    pub fn set_upper(&mut self, var: usize, u: f64) {
        self.upper[var] = Some(u);
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        let name = format!("c{}", self.rows.len());
        self.add_named_row(name, coeffs, sense, rhs)
    }

    pub fn add_named_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> usize {
        debug_assert!(coeffs.iter().all(|&(v, _)| v < self.n_vars));
        self.rows.push(Row {
            coeffs,
            sense,
            rhs,
            name: name.into(),
        });
        self.rows.len() - 1
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(v, a)| a * x[v]).sum();
            let viol = match row.sense {
                Sense::Le => lhs - row.rhs,
                Sense::Ge => row.rhs - lhs,
                Sense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        for (v, &xv) in x.iter().enumerate() {
            worst = worst.max(-xv);
            if let Some(u) = self.upper[v] {
                worst = worst.max(xv - u);
            }
        }
        worst
    }

    /// CPLEX-style LP text.
    pub fn to_lp_format(&self) -> String {
        fn terms(coeffs: &[(usize, f64)], names: &[String]) -> String {
            if coeffs.is_empty() {
                return "0".to_string();
            }
            let mut s = String::new();
            for (k, &(v, a)) in coeffs.iter().enumerate() {
                if k > 0 {
                    s.push_str(if a < 0.0 { " - " } else { " + " });
                } else if a < 0.0 {
                    s.push_str("- ");
                }
                let _ = write!(s, "{} {}", a.abs(), names[v]);
            }
            s
        }
        let mut out = String::from("\\ stoclot linear program\nMinimize\n obj: ");
        let obj: Vec<(usize, f64)> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(v, &c)| (v, c))
            .collect();
        out.push_str(&terms(&obj, &self.names));
        out.push_str("\nSubject To\n");
        for row in &self.rows {
            let op = match row.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(out, " {}: {} {} {}", row.name, terms(&row.coeffs, &self.names), op, row.rhs);
        }
        out.push_str("Bounds\n");
        for (v, name) in self.names.iter().enumerate() {
            match self.upper[v] {
                Some(u) => {
                    let _ = writeln!(out, " 0 <= {name} <= {u}");
                }
                None => {
                    let _ = writeln!(out, " {name} >= 0");
                }
            }
        }
        out.push_str("End\n");
        out
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        self.solve_with(PivotRule::Dantzig)
    }

    pub fn solve_with(&self, rule: PivotRule) -> Result<LpOutcome> {
        Tableau::build(self).run(self, rule)
    }
}

struct Tableau {
    m: usize,
    width: usize, // columns including rhs
    n_struct: usize,
    first_artificial: usize,
    a: Vec<f64>,
    basis: Vec<usize>,
    cost: Vec<f64>,
    iterations: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        // Expand bounds into rows.
        let mut rows: Vec<(Vec<(usize, f64)>, Sense, f64)> = lp
            .rows
            .iter()
            .map(|r| (r.coeffs.clone(), r.sense, r.rhs))
            .collect();
        for (v, u) in lp.upper.iter().enumerate() {
            if let Some(u) = *u {
                rows.push((vec![(v, 1.0)], Sense::Le, u));
            }
        }
        // Normalize to nonnegative right-hand sides.
        for (coeffs, sense, rhs) in rows.iter_mut() {
            if *rhs < 0.0 {
                for c in coeffs.iter_mut() {
                    c.1 = -c.1;
                }
                *rhs = -*rhs;
                *sense = match *sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
            }
        }
        let m = rows.len();
        let n = lp.n_vars;
        let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
        let first_artificial = n + n_slack;
        let total = first_artificial + n_art;
        let width = total + 1;
        let mut a = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let mut slack = n;
        let mut art = first_artificial;
        for (r, (coeffs, sense, rhs)) in rows.iter().enumerate() {
            let row = &mut a[r * width..(r + 1) * width];
            for &(v, c) in coeffs {
                row[v] += c;
            }
            row[total] = *rhs;
            match sense {
                Sense::Le => {
                    row[slack] = 1.0;
                    basis[r] = slack;
                    slack += 1;
                }
                Sense::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis[r] = art;
                    art += 1;
                }
                Sense::Eq => {
                    row[art] = 1.0;
                    basis[r] = art;
                    art += 1;
                }
            }
        }
        Tableau {
            m,
            width,
            n_struct: n,
            first_artificial,
            a,
            basis,
            cost: vec![0.0; width],
            iterations: 0,
        }
    }

    fn total_cols(&self) -> usize {
        self.width - 1
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.width + c]
    }

    /// Reduced costs for the objective `c` over the current basis.
    fn price(&mut self, c: &[f64]) {
        let w = self.width;
        let mut cost = vec![0.0; w];
        cost[..c.len()].copy_from_slice(c);
        for r in 0..self.m {
            let cb = c.get(self.basis[r]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                let row = &self.a[r * w..(r + 1) * w];
                for (k, v) in cost.iter_mut().enumerate() {
                    *v -= cb * row[k];
                }
            }
        }
        self.cost = cost;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.at(r, c);
        {
            let row = &mut self.a[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[c] = 1.0;
        }
        let pivot_row: Vec<f64> = self.a[r * w..(r + 1) * w].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * w + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * w..(i + 1) * w];
            for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[c] = 0.0;
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (v, &pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    /// Runs simplex iterations on the current cost row. Columns at or past
    /// `limit` never enter.
    fn iterate(&mut self, rule: PivotRule, limit: usize) -> Result<bool> {
        let rhs = self.total_cols();
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= ITERATION_CAP {
                return Err(Error::Solver(format!(
                    "simplex exceeded {ITERATION_CAP} iterations"
                )));
            }
            let bland = rule == PivotRule::Bland || degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            let mut best = -COST_TOL;
            for c in 0..limit {
                let rc = self.cost[c];
                if rc < -COST_TOL {
                    if bland {
                        enter = Some(c);
                        break;
                    }
                    if rc < best {
                        best = rc;
                        enter = Some(c);
                    }
                }
            }
            let Some(c) = enter else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64, f64)> = None;
            for r in 0..self.m {
                let arc = self.at(r, c);
                if arc > PIVOT_TOL {
                    let ratio = self.at(r, rhs).max(0.0) / arc;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio, larc)) => {
                            if ratio < lratio - 1e-12 {
                                true
                            } else if ratio <= lratio + 1e-12 {
                                if bland {
                                    self.basis[r] < self.basis[lr]
                                } else {
                                    arc > larc
                                }
                            } else {
                                false
                            }
                        }
                    };
                    if better {
                        leave = Some((r, ratio, arc));
                    }
                }
            }
            let Some((r, ratio, _)) = leave else {
                return Ok(false);
            };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
        }
    }

    fn run(mut self, lp: &LinearProgram, rule: PivotRule) -> Result<LpOutcome> {
        let total = self.total_cols();
        let rhs = total;
        // Phase 1: minimize the sum of artificials.
        if self.first_artificial < total {
            let mut c1 = vec![0.0; total];
            for v in c1.iter_mut().skip(self.first_artificial) {
                *v = 1.0;
            }
            self.price(&c1);
            self.iterate(rule, total)?;
            let residual: f64 = (0..self.m)
                .filter(|&r| self.basis[r] >= self.first_artificial)
                .map(|r| self.at(r, rhs))
                .sum();
            let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
            if residual > PHASE_ONE_TOL * scale {
                return Ok(LpOutcome::Infeasible { residual });
            }
            // Drive zero-valued artificials out of the basis.
            for r in 0..self.m {
                if self.basis[r] < self.first_artificial {
                    continue;
                }
                if let Some(c) = (0..self.first_artificial).find(|&c| self.at(r, c).abs() > PIVOT_TOL) {
                    self.pivot(r, c);
                }
            }
        }
        // Phase 2.
        let mut c2 = vec![0.0; total];
        c2[..self.n_struct].copy_from_slice(&lp.objective);
        self.price(&c2);
        let limit = self.first_artificial;
        if !self.iterate(rule, limit)? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut x = vec![0.0; self.n_struct];
        for r in 0..self.m {
            let b = self.basis[r];
            if b < self.n_struct {
                x[b] = self.at(r, rhs).max(0.0);
            }
        }
        for (v, xv) in x.iter_mut().enumerate() {
            if let Some(u) = lp.upper[v] {
                *xv = xv.min(u);
            }
        }
        let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpOutcome::Optimal(LpSolution {
            x,
            objective,
            iterations: self.iterations,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(out: LpOutcome) -> LpSolution {
        match out {
            LpOutcome::Optimal(s) => s,
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn textbook_max_problem() {
        // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18  -> (2, 6), 36
        for rule in [PivotRule::Bland, PivotRule::Dantzig] {
            let mut lp = LinearProgram::new(2);
            lp.set_objective(0, -3.0);
            lp.set_objective(1, -5.0);
            lp.add_row(vec![(0, 1.0)], Sense::Le, 4.0);
            lp.add_row(vec![(1, 2.0)], Sense::Le, 12.0);
            lp.add_row(vec![(0, 3.0), (1, 2.0)], Sense::Le, 18.0);
            let s = optimal(lp.solve_with(rule).unwrap());
            assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
            assert!((s.objective + 36.0).abs() < 1e-9);
        }
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y st x + y = 3, x >= 1, y >= 1, x <= 1.5
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, 1.0);
        lp.set_objective(1, 2.0);
        lp.set_upper(0, 1.5);
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 3.0);
        lp.add_row(vec![(0, 1.0)], Sense::Ge, 1.0);
        lp.add_row(vec![(1, 1.0)], Sense::Ge, 1.0);
        let s = optimal(lp.solve().unwrap());
        assert!((s.x[0] - 1.5).abs() < 1e-9);
        assert!((s.x[1] - 1.5).abs() < 1e-9);
        assert!(lp.max_residual(&s.x) < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.set_upper(0, 1.0);
        lp.add_row(vec![(0, 1.0)], Sense::Ge, 2.0);
        assert!(matches!(lp.solve().unwrap(), LpOutcome::Infeasible { residual } if residual > 0.5));

        let mut lp = LinearProgram::new(1);
        lp.set_objective(0, -1.0);
        lp.add_row(vec![(0, 1.0)], Sense::Ge, 1.0);
        assert!(matches!(lp.solve().unwrap(), LpOutcome::Unbounded));
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // -x <= -2  (x >= 2), min x
        let mut lp = LinearProgram::new(1);
        lp.set_objective(0, 1.0);
        lp.add_row(vec![(0, -1.0)], Sense::Le, -2.0);
        let s = optimal(lp.solve().unwrap());
        assert!((s.x[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 1.0);
        lp.add_row(vec![(0, 2.0), (1, 2.0)], Sense::Eq, 2.0);
        lp.set_objective(1, 1.0);
        let s = optimal(lp.solve().unwrap());
        assert!((s.x[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, cycles under naive Dantzig without anti-cycling.
        let mut lp = LinearProgram::new(4);
        for (v, c) in [(0, -0.75), (1, 150.0), (2, -0.02), (3, 6.0)] {
            lp.set_objective(v, c);
        }
        lp.add_row(vec![(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)], Sense::Le, 0.0);
        lp.add_row(vec![(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)], Sense::Le, 0.0);
        lp.add_row(vec![(2, 1.0)], Sense::Le, 1.0);
        for rule in [PivotRule::Bland, PivotRule::Dantzig] {
            let s = optimal(lp.solve_with(rule).unwrap());
            assert!((s.objective + 0.05).abs() < 1e-9);
        }
    }

    #[test]
    fn lp_text_dump() {
        let mut lp = LinearProgram::new(2);
        lp.set_name(0, "b0");
        lp.set_objective(0, -1.0);
        lp.set_upper(0, 1.0);
        lp.add_named_row("mass", vec![(0, 1.0), (1, -2.0)], Sense::Eq, 1.0);
        let text = lp.to_lp_format();
        assert!(text.contains("mass: 1 b0 - 2 x1 = 1"));
        assert!(text.contains("0 <= b0 <= 1"));
        assert!(text.trim_end().ends_with("End"));
    }
}
