//! Relaxations for chance and expected-distance demands, the simplex solver
//! behind them, and facility splitting.

pub mod simplex;
mod split;

pub use simplex::{LinearProgram, LpOutcome, LpSolution, PivotRule, Sense};
pub use split::{split_facilities, ClusterFamily, FacilityCopy, SplitMode};

use crate::error::{Error, Infeasibility, Result};
use crate::model::{DemandChance, DemandExpected, Instance};

/// Maximum tolerated violation of any LP row after cleanup.
pub const LP_RESIDUAL_TOL: f64 = 1e-8;
const SNAP_TOL: f64 = 1e-10;

/// A fractional opening `b` over facilities with budget `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalOpening {
    pub b: Vec<f64>,
    pub k: usize,
}

impl FractionalOpening {
    pub fn mass(&self) -> f64 {
        self.b.iter().sum()
    }

    pub fn mass_of(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.b[i]).sum()
    }
}

/// Fractional assignment `a[i][j]` of clients to facilities.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentFractional {
    n_facilities: usize,
    /// Client-major: `a[j * n_facilities + i]`.
    a: Vec<f64>,
}

impl AssignmentFractional {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[j * self.n_facilities + i]
    }

    pub fn client(&self, j: usize) -> &[f64] {
        &self.a[j * self.n_facilities..(j + 1) * self.n_facilities]
    }

    pub fn n_clients(&self) -> usize {
        self.a.len() / self.n_facilities.max(1)
    }
}

fn snap_unit(x: f64) -> f64 {
    if x < SNAP_TOL {
        0.0
    } else if x > 1.0 - SNAP_TOL {
        1.0
    } else {
        x
    }
}

fn finish(lp: &LinearProgram, outcome: LpOutcome) -> Result<Vec<f64>> {
    match outcome {
        LpOutcome::Optimal(sol) => {
            let residual = lp.max_residual(&sol.x);
            if residual > LP_RESIDUAL_TOL {
                return Err(Error::Solver(format!("LP solution residual {residual:.3e} too large")));
            }
            Ok(sol.x)
        }
        LpOutcome::Infeasible { residual } => {
            Err(Error::Infeasible(Infeasibility::LpPhaseOne { residual }))
        }
        LpOutcome::Unbounded => Err(Error::Solver("bounded LP reported unbounded".into())),
    }
}

/// The chance relaxation: `b(B(j, r_j)) >= p_j`, `b(F) = k`, `0 <= b <= 1`.
///
/// As a tie-breaker among feasible points the objective maximizes
/// `sum_j p_j b(B(j, r_j))`.
pub fn chance_lp(inst: &Instance, demand: &DemandChance) -> Result<LinearProgram> {
    demand.check_for(inst)?;
    let nf = inst.n_facilities();
    let mut lp = LinearProgram::new(nf);
    let mut weight = vec![0.0; nf];
    for i in 0..nf {
        lp.set_name(i, format!("b{i}"));
        lp.set_upper(i, 1.0);
    }
    for j in 0..inst.n_clients() {
        let ball = inst.ball(j, demand.r[j])?;
        for &i in &ball {
            weight[i] += demand.p[j];
        }
        if demand.p[j] > 0.0 {
            lp.add_named_row(
                format!("cover{j}"),
                ball.into_iter().map(|i| (i, 1.0)).collect(),
                Sense::Ge,
                demand.p[j],
            );
        }
    }
    lp.add_named_row("budget", (0..nf).map(|i| (i, 1.0)).collect(), Sense::Eq, inst.k() as f64);
    for (i, w) in weight.into_iter().enumerate() {
        lp.set_objective(i, -w);
    }
    Ok(lp)
}

/// Finds a point of the chance relaxation or reports it empty.
pub fn solve_chance_lp(inst: &Instance, demand: &DemandChance) -> Result<FractionalOpening> {
    demand.check_for(inst)?;
    for j in 0..inst.n_clients() {
        if demand.p[j] > 0.0 && inst.ball(j, demand.r[j])?.is_empty() {
            return Err(Error::Infeasible(Infeasibility::EmptyBall { client: j }));
        }
    }
    let lp = chance_lp(inst, demand)?;
    let x = finish(&lp, lp.solve()?)?;
    let b: Vec<f64> = x.into_iter().map(snap_unit).collect();
    Ok(FractionalOpening { b, k: inst.k() })
}

/// The expected-distance relaxation over `(b, a)`.
///
/// Variables are `b_i` followed by `a_{i,j}` in client-major order. The
/// objective minimizes total fractional service cost.
pub fn expectation_lp(inst: &Instance, demand: &DemandExpected) -> Result<LinearProgram> {
    let nf = inst.n_facilities();
    let nc = inst.n_clients();
    if demand.t.len() != nc {
        return Err(Error::input(format!("{} targets for {nc} clients", demand.t.len())));
    }
    let a = |i: usize, j: usize| nf + j * nf + i;
    let mut lp = LinearProgram::new(nf + nf * nc);
    for i in 0..nf {
        lp.set_name(i, format!("b{i}"));
        lp.set_upper(i, 1.0);
    }
    for j in 0..nc {
        let row = inst.client_row(j);
        for i in 0..nf {
            lp.set_name(a(i, j), format!("a{i}_{j}"));
            lp.set_objective(a(i, j), row[i]);
        }
        lp.add_named_row(
            format!("dist{j}"),
            (0..nf).filter(|&i| row[i] != 0.0).map(|i| (a(i, j), row[i])).collect(),
            Sense::Le,
            demand.t[j],
        );
        lp.add_named_row(format!("assign{j}"), (0..nf).map(|i| (a(i, j), 1.0)).collect(), Sense::Eq, 1.0);
        for i in 0..nf {
            lp.add_named_row(format!("open{i}_{j}"), vec![(a(i, j), 1.0), (i, -1.0)], Sense::Le, 0.0);
        }
    }
    lp.add_named_row("budget", (0..nf).map(|i| (i, 1.0)).collect(), Sense::Le, inst.k() as f64);
    Ok(lp)
}

/// Finds `(b, a)` in the expected-distance relaxation or reports it empty.
pub fn solve_expectation_lp(
    inst: &Instance,
    demand: &DemandExpected,
) -> Result<(FractionalOpening, AssignmentFractional)> {
    demand.check_for(inst)?;
    for j in 0..inst.n_clients() {
        if demand.t[j] == 0.0 && inst.theta(j) > 0.0 {
            return Err(Error::Infeasible(Infeasibility::ZeroTarget { client: j }));
        }
    }
    let lp = expectation_lp(inst, demand)?;
    let x = finish(&lp, lp.solve()?)?;
    let nf = inst.n_facilities();
    let b: Vec<f64> = x[..nf].iter().map(|&v| snap_unit(v)).collect();
    let mut a: Vec<f64> = x[nf..].iter().map(|&v| v.max(0.0)).collect();
    // Keep a <= b after snapping.
    for chunk in a.chunks_mut(nf) {
        for (v, &bi) in chunk.iter_mut().zip(&b) {
            *v = v.min(bi);
        }
    }
    Ok((
        FractionalOpening { b, k: inst.k() },
        AssignmentFractional { n_facilities: nf, a },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_scc(n: usize, k: usize) -> Instance {
        let mut d = vec![1.0; n * n];
        for i in 0..n {
            d[i * n + i] = 0.0;
        }
        Instance::scc_from_matrix(n, d, k).unwrap()
    }

    #[test]
    fn zero_probabilities_give_mass_k() {
        let inst = uniform_scc(4, 2);
        let dem = DemandChance::homogeneous(4, 0.0, 0.0).unwrap();
        let b = solve_chance_lp(&inst, &dem).unwrap();
        assert!((b.mass() - 2.0).abs() < 1e-9);
        assert!(b.b.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn uniform_gadget_is_feasible() {
        let k = 2;
        let inst = uniform_scc(k + 1, k);
        let p = k as f64 / (k + 1) as f64;
        let dem = DemandChance::homogeneous(k + 1, p, 0.0).unwrap();
        let b = solve_chance_lp(&inst, &dem).unwrap();
        for j in 0..=k {
            assert!((b.b[j] - p).abs() < 1e-8);
        }
    }

    #[test]
    fn empty_ball_is_infeasible() {
        let inst = Instance::from_matrix(2, vec![0.0, 2.0, 2.0, 0.0], vec![0], vec![1], 1, false).unwrap();
        let dem = DemandChance::new(vec![1.0], vec![1.0]).unwrap();
        assert!(matches!(
            solve_chance_lp(&inst, &dem),
            Err(Error::Infeasible(Infeasibility::EmptyBall { client: 0 }))
        ));
    }

    #[test]
    fn over_demanding_is_phase_one_infeasible() {
        let inst = uniform_scc(3, 1);
        let dem = DemandChance::homogeneous(3, 0.9, 0.0).unwrap();
        assert!(matches!(
            solve_chance_lp(&inst, &dem),
            Err(Error::Infeasible(Infeasibility::LpPhaseOne { .. }))
        ));
    }

    #[test]
    fn expectation_lp_at_theta_with_all_open() {
        let inst = Instance::euclidean(
            vec![vec![0.0], vec![5.0]],
            vec![vec![1.0], vec![4.0], vec![6.0]],
            2,
        )
        .unwrap();
        let t: Vec<f64> = (0..3).map(|j| inst.theta(j)).collect();
        let (b, a) = solve_expectation_lp(&inst, &DemandExpected::new(t).unwrap()).unwrap();
        assert!(b.b.iter().all(|&v| (v - 1.0).abs() < 1e-9));
        for j in 0..3 {
            let (v, _) = inst.nearest(j);
            assert!((a.get(v, j) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn expectation_gadget_and_zero_target() {
        let k = 2;
        let inst = uniform_scc(k + 1, k);
        let t = vec![1.0 / (k + 1) as f64; k + 1];
        assert!(solve_expectation_lp(&inst, &DemandExpected::new(t).unwrap()).is_ok());
        let tight = vec![0.3; k + 1];
        assert!(solve_expectation_lp(&inst, &DemandExpected::new(tight).unwrap()).is_err());

        let inst = Instance::from_matrix(2, vec![0.0, 1.0, 1.0, 0.0], vec![0], vec![1], 1, false).unwrap();
        assert!(matches!(
            solve_expectation_lp(&inst, &DemandExpected::new(vec![0.0]).unwrap()),
            Err(Error::Infeasible(Infeasibility::ZeroTarget { client: 0 }))
        ));
    }
}
