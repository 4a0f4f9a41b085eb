//! Single solution sets meeting expected-distance targets up to a factor
//! `beta`, with up to `alpha k` facilities.

use serde::Serialize;

use crate::error::{Error, Infeasibility, Result};
use crate::lp::{solve_expectation_lp, split_facilities, SplitMode};
use crate::model::{DemandExpected, Instance, SolutionSet};
use crate::rounding::{dep_round, greedy_cluster, RandomSource};

/// A deterministic set with its achieved and declared factors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Determinization {
    pub set: SolutionSet,
    /// `|S| / k`.
    pub alpha_achieved: f64,
    /// `max_j d(j,S) / t_j`.
    pub beta_achieved: f64,
    pub alpha_declared: f64,
    pub beta_declared: f64,
    /// Attempts used by randomized modes; 1 otherwise.
    pub attempts: usize,
}

impl Determinization {
    fn evaluate(inst: &Instance, t: &[f64], set: SolutionSet, alpha: f64, beta: f64, attempts: usize) -> Result<Self> {
        let beta_achieved = achieved_beta(inst, t, &set)?;
        Ok(Determinization {
            alpha_achieved: set.len() as f64 / inst.k() as f64,
            beta_achieved,
            alpha_declared: alpha,
            beta_declared: beta,
            attempts,
            set,
        })
    }

    pub fn meets_declared(&self) -> bool {
        self.alpha_achieved <= self.alpha_declared + 1e-12 && self.beta_achieved <= self.beta_declared + 1e-9
    }
}

/// `max_j d(j,S)/t_j`, with `0/0 = 0` and an empty set at infinite distance.
pub fn achieved_beta(inst: &Instance, t: &[f64], set: &SolutionSet) -> Result<f64> {
    if set.is_empty() {
        return Ok(f64::INFINITY);
    }
    Ok(inst
        .service_distances(set)?
        .iter()
        .zip(t)
        .map(|(&d, &tj)| {
            if d == 0.0 {
                0.0
            } else if tj == 0.0 {
                f64::INFINITY
            } else {
                d / tj
            }
        })
        .fold(0.0, f64::max))
}

/// Distance factor guaranteed by the greedy-cluster determinization.
pub fn scalefree_beta(alpha: f64, scc: bool) -> f64 {
    let b = 2.0 * alpha / (alpha - 1.0);
    if scc {
        b
    } else {
        b.max(3.0)
    }
}

/// Greedy-cluster determinization with at most `alpha k` facilities and
/// `d(j,S) <= beta t_j`, `beta = max(3, 2 alpha/(alpha-1))` (without the 3
/// in the SCC setting).
pub fn determinize_scalefree(inst: &Instance, t: &DemandExpected, alpha: f64) -> Result<Determinization> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::input(format!("alpha = {alpha} must exceed 1")));
    }
    let (opening, assign) = solve_expectation_lp(inst, t)?;
    let nc = inst.n_clients();
    let target = 1.0 / alpha;
    let mut radii = Vec::with_capacity(nc);
    for j in 0..nc {
        let row = inst.client_row(j);
        let a = assign.client(j);
        let mut order: Vec<usize> = (0..inst.n_facilities()).filter(|&i| a[i] > 0.0).collect();
        order.sort_by(|&x, &y| row[x].total_cmp(&row[y]).then(x.cmp(&y)));
        let mut acc = 0.0;
        let mut r = None;
        for (pos, &i) in order.iter().enumerate() {
            acc += a[i];
            // Include every facility tied at this distance.
            let last_at_distance = order.get(pos + 1).map_or(true, |&n| row[n] > row[i]);
            if acc >= target - 1e-12 && last_at_distance {
                r = Some(row[i]);
                break;
            }
        }
        let r = r.ok_or_else(|| Error::invariant(format!("client {j}: assignment mass below 1/alpha")))?;
        let bound = (alpha * t.t[j] - inst.theta(j)) / (alpha - 1.0);
        if r > bound + 1e-9 * (1.0 + bound.abs()) {
            return Err(Error::invariant(format!("client {j}: radius {r} exceeds its bound {bound}")));
        }
        radii.push(r);
    }
    let family = split_facilities(inst, &opening, &radii, &vec![target; nc], SplitMode::PerClient)?;
    let weights: Vec<f64> = (0..nc).map(|j| inst.theta(j) + radii[j]).collect();
    let centers = greedy_cluster(&family.clusters, &weights);
    if centers.len() as f64 > alpha * inst.k() as f64 + 1e-9 {
        return Err(Error::invariant(format!(
            "{} disjoint clusters of mass 1/alpha exceed alpha k",
            centers.len()
        )));
    }
    let set: SolutionSet = centers.iter().map(|&z| inst.nearest(z).0).collect();
    Determinization::evaluate(inst, &t.t, set, alpha, scalefree_beta(alpha, inst.is_scc()), 1)
}

/// Smallest `beta` any `(alpha, beta)`-determinization can achieve on the
/// uniform instance with `alpha k + 1` points and targets
/// `((alpha-1)k+1)/(alpha k+1)`.
pub fn gadget_beta_lower_bound(k: usize, alpha: usize) -> f64 {
    (alpha * k + 1) as f64 / ((alpha - 1) * k + 1) as f64
}

/// Feasible common target on that uniform instance: the uniform lottery
/// over `k`-subsets misses each point with this probability.
pub fn gadget_target(k: usize, alpha: usize) -> f64 {
    1.0 / gadget_beta_lower_bound(k, alpha)
}

/// Number of points used in the logarithmic factors.
fn log_n(inst: &Instance) -> f64 {
    let n = if inst.is_scc() {
        inst.n_clients()
    } else {
        inst.n_clients() + inst.n_facilities()
    };
    (n.max(2) as f64).ln()
}

/// Size bound `3 k ln n / eps` of the logarithmic-blowup determinization.
pub fn logblowup_size_bound(inst: &Instance, epsilon: f64) -> f64 {
    3.0 * inst.k() as f64 * log_n(inst) / epsilon
}

/// Dependent rounding of the scaled opening `min(1, 2 ln n b_i / eps)`,
/// retried until `d(j,S) <= (1+eps) t_j` for all `j` and
/// `|S| <= 3 k ln n / eps`.
pub fn determinize_logblowup(
    inst: &Instance,
    t: &DemandExpected,
    epsilon: f64,
    rng: &mut RandomSource,
) -> Result<Determinization> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::input(format!("epsilon = {epsilon} outside (0, 1/2)")));
    }
    let (opening, _) = solve_expectation_lp(inst, t)?;
    let scale = 2.0 * log_n(inst) / epsilon;
    let p: Vec<f64> = opening.b.iter().map(|&b| (scale * b).min(1.0)).collect();
    let size_bound = logblowup_size_bound(inst, epsilon);
    let alpha = size_bound / inst.k() as f64;
    for attempt in 1..=50 {
        let set: SolutionSet = dep_round(&p, &mut rng.child_index(attempt as u64))?.into();
        if set.len() as f64 > size_bound + 1e-9 {
            return Err(Error::invariant(format!("rounded set of size {} exceeds {size_bound}", set.len())));
        }
        let det = Determinization::evaluate(inst, &t.t, set, alpha, 1.0 + epsilon, attempt)?;
        if det.beta_achieved <= 1.0 + epsilon {
            return Ok(det);
        }
    }
    Err(Error::Resource("logarithmic determinization failed 50 attempts".into()))
}

/// Greedy `(1, k+2)`-determinization. If the demand is infeasible the loop
/// may need a `(k+1)`-th facility; the `k+1` selected clients are returned
/// as a witness instead.
pub fn determinize_exact_k(inst: &Instance, t: &DemandExpected) -> Result<Determinization> {
    t.check_for(inst)?;
    let k = inst.k();
    let factor = (k + 2) as f64;
    let nc = inst.n_clients();
    let nearest = inst.nearest_all();
    let mut dist = vec![f64::INFINITY; nc];
    let mut set = SolutionSet::new();
    let mut picked = Vec::new();
    loop {
        let next = (0..nc)
            .filter(|&j| dist[j] > factor * t.t[j])
            .min_by(|&a, &b| t.t[a].total_cmp(&t.t[b]).then(a.cmp(&b)));
        let Some(j) = next else {
            break;
        };
        picked.push(j);
        if picked.len() > k {
            return Err(Error::Infeasible(Infeasibility::Pigeonhole { clients: picked }));
        }
        let v = nearest[j].0;
        set.insert(v);
        for (c, d) in dist.iter_mut().enumerate() {
            *d = d.min(inst.dist(v, c));
        }
    }
    Determinization::evaluate(inst, &t.t, set, 1.0, factor, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gadget(n: usize, k: usize) -> Instance {
        let mut d = vec![1.0; n * n];
        for i in 0..n {
            d[i * n + i] = 0.0;
        }
        Instance::scc_from_matrix(n, d, k).unwrap()
    }

    #[test]
    fn beta_formula() {
        assert_eq!(scalefree_beta(2.0, true), 4.0);
        assert_eq!(scalefree_beta(100.0, false), 3.0);
        assert!((scalefree_beta(100.0, true) - 200.0 / 99.0).abs() < 1e-12);
        assert_eq!(scalefree_beta(1.5, false), 6.0);
    }

    #[test]
    fn exact_k_on_two_points() {
        let inst = gadget(2, 1);
        let det = determinize_exact_k(&inst, &DemandExpected::new(vec![0.5, 0.5]).unwrap()).unwrap();
        assert_eq!(det.set.len(), 1);
        assert!(det.beta_achieved <= 3.0);
    }

    #[test]
    fn exact_k_huge_targets_need_one_pick() {
        let inst = gadget(5, 2);
        let det = determinize_exact_k(&inst, &DemandExpected::new(vec![10.0; 5]).unwrap()).unwrap();
        assert_eq!(det.set.len(), 1);
    }

    #[test]
    fn exact_k_reports_witness() {
        let inst = gadget(4, 1);
        let err = determinize_exact_k(&inst, &DemandExpected::new(vec![0.1; 4]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Infeasible(Infeasibility::Pigeonhole { ref clients }) if clients.len() == 2));
    }

    #[test]
    fn scalefree_on_gadget() {
        let k = 2;
        let inst = gadget(k + 1, k);
        let t = DemandExpected::new(vec![1.0 / 3.0; 3]).unwrap();
        for alpha in [1.5, 2.0, 3.0, 100.0] {
            let det = determinize_scalefree(&inst, &t, alpha).unwrap();
            assert!(det.meets_declared(), "{det:?}");
        }
        assert!(determinize_scalefree(&inst, &t, 1.0).is_err());
    }

    #[test]
    fn logblowup_bounds() {
        let inst = gadget(4, 1);
        let t = DemandExpected::new(vec![0.75; 4]).unwrap();
        let det = determinize_logblowup(&inst, &t, 0.4, &mut RandomSource::new(2)).unwrap();
        assert!(det.set.len() as f64 <= (3.0 * 4f64.ln() / 0.4).ceil());
        assert!(det.beta_achieved <= 1.4);
        assert!(determinize_logblowup(&inst, &t, 0.5, &mut RandomSource::new(2)).is_err());
    }
}
