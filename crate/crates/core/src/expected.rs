//! Expected-distance demands: multiplicative weights over a weighted
//! k-median solver, explicit lotteries, support reduction and
//! sparsification of sampled lotteries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Infeasibility, Result};
use crate::linalg::{null_vector, Rref};
use crate::lp::solve_expectation_lp;
use crate::model::{DemandExpected, Id, Instance, SolutionSet};
use crate::rounding::{RandomSource, Sampler};

/// Largest number of subsets the exhaustive solver will enumerate.
pub const BRUTEFORCE_LIMIT: u64 = 1_000_000;
/// Default cap on multiplicative-weights rounds.
pub const DEFAULT_MAX_ROUNDS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub set: SolutionSet,
    pub prob: f64,
}

/// A lottery given by its support.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExplicitLottery {
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomJson {
    pub set: Vec<Id>,
    pub prob: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LotteryJson {
    pub atoms: Vec<AtomJson>,
}

impl ExplicitLottery {
    /// Uniform lottery over `sets`, with repeated sets merged.
    pub fn uniform(sets: impl IntoIterator<Item = SolutionSet>) -> Self {
        let sets: Vec<SolutionSet> = sets.into_iter().collect();
        let p = 1.0 / sets.len().max(1) as f64;
        let mut lot = ExplicitLottery {
            atoms: sets.into_iter().map(|set| Atom { set, prob: p }).collect(),
        };
        lot.merge_duplicates();
        lot
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Merges equal sets, drops zero atoms and sorts atoms by set.
    pub fn merge_duplicates(&mut self) {
        let mut atoms = std::mem::take(&mut self.atoms);
        atoms.sort_by(|a, b| a.set.as_slice().cmp(b.set.as_slice()));
        for a in atoms {
            match self.atoms.last_mut() {
                Some(last) if last.set == a.set => last.prob += a.prob,
                _ => self.atoms.push(a),
            }
        }
        self.atoms.retain(|a| a.prob > 0.0);
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::input("lottery has no atoms"));
        }
        if let Some(a) = self.atoms.iter().find(|a| a.prob < 0.0 || a.prob.is_nan()) {
            return Err(Error::input(format!("negative atom probability {}", a.prob)));
        }
        let total: f64 = self.atoms.iter().map(|a| a.prob).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::input(format!("atom probabilities sum to {total}")));
        }
        if let Some(a) = self.atoms.iter().find(|a| a.set.len() > k) {
            return Err(Error::input(format!("atom of size {} exceeds k = {k}", a.set.len())));
        }
        Ok(())
    }

    /// `E[d(j,S)]` for every client.
    pub fn expectations(&self, inst: &Instance) -> Result<Vec<f64>> {
        let mut e = vec![0.0; inst.n_clients()];
        for a in &self.atoms {
            for (j, d) in inst.service_distances(&a.set)?.into_iter().enumerate() {
                e[j] += a.prob * d;
            }
        }
        Ok(e)
    }

    /// `Pr[d(j,S) <= r_j]` for every client.
    pub fn coverage(&self, inst: &Instance, radii: &[f64]) -> Result<Vec<f64>> {
        let mut c = vec![0.0; inst.n_clients()];
        for a in &self.atoms {
            if a.set.is_empty() {
                continue;
            }
            for (j, d) in inst.service_distances(&a.set)?.into_iter().enumerate() {
                if d <= radii[j] {
                    c[j] += a.prob;
                }
            }
        }
        Ok(c)
    }

    /// Largest `E[d(j,S)] / t_j`; clients with `t_j = 0` count only when
    /// their expectation is positive.
    pub fn max_ratio(&self, inst: &Instance, t: &[f64]) -> Result<f64> {
        Ok(self
            .expectations(inst)?
            .iter()
            .zip(t)
            .map(|(&e, &tj)| ratio(e, tj))
            .fold(0.0, f64::max))
    }

    pub fn to_json(&self, inst: &Instance) -> LotteryJson {
        let ids = inst.facility_ids();
        LotteryJson {
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomJson {
                    set: a.set.iter().map(|i| ids[i].clone()).collect(),
                    prob: a.prob,
                })
                .collect(),
        }
    }

    pub fn from_json(json: &LotteryJson, inst: &Instance) -> Result<Self> {
        let index: std::collections::HashMap<&Id, usize> =
            inst.facility_ids().iter().enumerate().map(|(i, id)| (id, i)).collect();
        let atoms = json
            .atoms
            .iter()
            .map(|a| {
                let set = a
                    .set
                    .iter()
                    .map(|id| {
                        index
                            .get(id)
                            .copied()
                            .ok_or_else(|| Error::input(format!("unknown facility {id}")))
                    })
                    .collect::<Result<SolutionSet>>()?;
                Ok(Atom { set, prob: a.prob })
            })
            .collect::<Result<Vec<_>>>()?;
        let lot = ExplicitLottery { atoms };
        lot.validate(inst.k())?;
        Ok(lot)
    }
}

impl Sampler for ExplicitLottery {
    fn sample(&self, rng: &mut RandomSource) -> Result<SolutionSet> {
        let u = rng.uniform();
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.prob;
            if u < acc {
                return Ok(a.set.clone());
            }
        }
        self.atoms
            .last()
            .map(|a| a.set.clone())
            .ok_or_else(|| Error::input("lottery has no atoms"))
    }

    fn max_size(&self) -> usize {
        self.atoms.iter().map(|a| a.set.len()).max().unwrap_or(0)
    }
}

fn ratio(e: f64, t: f64) -> f64 {
    if t > 0.0 {
        e / t
    } else if e > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Weighted k-median solver plugged into the multiplicative-weights loop.
pub trait KMedianSolver: Sync {
    fn name(&self) -> &str;

    /// Declared approximation ratio.
    fn alpha(&self) -> f64;

    /// A set of at most `k` facilities with small `sum_j w_j d(j,S)`.
    fn solve(&self, inst: &Instance, w: &[f64], k: usize) -> Result<SolutionSet>;
}

pub fn weighted_cost(inst: &Instance, w: &[f64], s: &[usize]) -> f64 {
    (0..inst.n_clients())
        .map(|j| {
            let d = s.iter().map(|&i| inst.dist(i, j)).fold(f64::INFINITY, f64::min);
            if w[j] == 0.0 {
                0.0
            } else {
                w[j] * d
            }
        })
        .sum()
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u64::MAX,
        };
    }
    acc
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(p) = (0..k).rev().find(|&p| idx[p] < n - k + p) else {
            return;
        };
        idx[p] += 1;
        for q in p + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Exact weighted k-median by enumeration.
#[derive(Debug, Clone, Copy, Default)]
pub struct BruteForceKMedian;

impl KMedianSolver for BruteForceKMedian {
    fn name(&self) -> &str {
        "bruteforce"
    }

    fn alpha(&self) -> f64 {
        1.0
    }

    fn solve(&self, inst: &Instance, w: &[f64], k: usize) -> Result<SolutionSet> {
        kmedian_bruteforce(inst, w, k)
    }
}

/// Minimizes `sum_j w_j d(j,S)` over all `k`-subsets; the lexicographically
/// first optimum wins ties.
pub fn kmedian_bruteforce(inst: &Instance, w: &[f64], k: usize) -> Result<SolutionSet> {
    let nf = inst.n_facilities();
    if k == 0 || k > nf {
        return Err(Error::input(format!("k = {k} out of range")));
    }
    if binomial(nf as u64, k as u64) > BRUTEFORCE_LIMIT {
        return Err(Error::Resource(format!(
            "C({nf}, {k}) subsets exceed the exhaustive limit {BRUTEFORCE_LIMIT}"
        )));
    }
    let rows: Vec<Vec<f64>> = (0..inst.n_clients()).map(|j| inst.client_row(j)).collect();
    let mut best = (f64::INFINITY, Vec::new());
    for_each_subset(nf, k, |s| {
        let mut cost = 0.0;
        for (row, &wj) in rows.iter().zip(w) {
            if wj != 0.0 {
                cost += wj * s.iter().map(|&i| row[i]).fold(f64::INFINITY, f64::min);
            }
            if cost >= best.0 {
                return;
            }
        }
        best = (cost, s.to_vec());
    });
    Ok(best.1.into())
}

/// Single-swap local search, started from a random `k`-subset.
#[derive(Debug, Clone, Copy)]
pub struct LocalSearchKMedian {
    pub seed: u64,
}

impl KMedianSolver for LocalSearchKMedian {
    fn name(&self) -> &str {
        "localsearch"
    }

    fn alpha(&self) -> f64 {
        5.0
    }

    fn solve(&self, inst: &Instance, w: &[f64], k: usize) -> Result<SolutionSet> {
        kmedian_localsearch(inst, w, k, &mut RandomSource::new(self.seed))
    }
}

/// Swaps one open facility for a closed one while that strictly lowers
/// the weighted cost.
pub fn kmedian_localsearch(inst: &Instance, w: &[f64], k: usize, rng: &mut RandomSource) -> Result<SolutionSet> {
    let nf = inst.n_facilities();
    if k == 0 || k > nf {
        return Err(Error::input(format!("k = {k} out of range")));
    }
    // Partial Fisher-Yates for the starting set.
    let mut perm: Vec<usize> = (0..nf).collect();
    for a in 0..k {
        let b = a + (rng.uniform() * (nf - a) as f64) as usize;
        perm.swap(a, b.min(nf - 1));
    }
    let mut open: Vec<usize> = perm[..k].to_vec();
    open.sort_unstable();
    let mut cost = weighted_cost(inst, w, &open);
    let tol = 1e-12;
    loop {
        let mut improved = false;
        'search: for pos in 0..k {
            for cand in 0..nf {
                if open.contains(&cand) {
                    continue;
                }
                let old = open[pos];
                open[pos] = cand;
                let c = weighted_cost(inst, w, &open);
                if c < cost - tol * cost.abs().max(1.0) {
                    assert!(c <= cost, "local search cost increased");
                    cost = c;
                    improved = true;
                    break 'search;
                }
                open[pos] = old;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(open.into_iter().collect())
}

fn effective_targets(inst: &Instance, t: &[f64]) -> Result<Vec<f64>> {
    let floor = 1e-12 * inst.max_distance().max(1.0);
    t.iter()
        .enumerate()
        .map(|(j, &tj)| {
            if tj == 0.0 && inst.theta(j) > 0.0 {
                Err(Error::Infeasible(Infeasibility::ZeroTarget { client: j }))
            } else {
                Ok(tj.max(floor))
            }
        })
        .collect()
}

/// A set with `sum_j w_j d(j,S)/t_j <= (alpha + O(eps)) sum_j w_j` and
/// `d(j,S) <= n t_j / eps`, found by calling the solver with weights
/// `(eps/n + w_j / sum w) / t_j`.
pub fn bounded_ratio_kmedian(
    inst: &Instance,
    t: &DemandExpected,
    w: &[f64],
    epsilon: f64,
    solver: &dyn KMedianSolver,
) -> Result<SolutionSet> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::input(format!("epsilon {epsilon} outside (0, 1]")));
    }
    let teff = effective_targets(inst, &t.t)?;
    bounded_ratio_inner(inst, &teff, w, epsilon, solver)
}

fn bounded_ratio_inner(
    inst: &Instance,
    teff: &[f64],
    w: &[f64],
    epsilon: f64,
    solver: &dyn KMedianSolver,
) -> Result<SolutionSet> {
    let n = inst.n_clients() as f64;
    let total: f64 = w.iter().sum();
    let z: Vec<f64> = w
        .iter()
        .zip(teff)
        .map(|(&wj, &tj)| (epsilon / n + wj / total) / tj)
        .collect();
    let s = solver.solve(inst, &z, inst.k())?;
    if s.len() > inst.k() {
        return Err(Error::invariant(format!("{} returned {} > k facilities", solver.name(), s.len())));
    }
    Ok(s)
}

/// Per-round diagnostics of the multiplicative-weights loop.
#[derive(Debug, Clone, Serialize)]
pub struct MwuReport {
    pub rounds: usize,
    pub requested_rounds: usize,
    /// Largest observed `log(Phi_{l+1} / Phi_l)` divided by its bound.
    pub worst_potential_ratio: f64,
    pub max_ratio: f64,
}

/// Multiplicative weights over the bounded-ratio solver. Returns the
/// uniform lottery on the sets found (duplicates merged).
///
/// The default round count is `ceil(n ln n / eps^3)`, cut to `max_rounds`.
pub fn mwu_lottery(
    inst: &Instance,
    t: &DemandExpected,
    epsilon: f64,
    solver: &dyn KMedianSolver,
    max_rounds: Option<usize>,
) -> Result<(ExplicitLottery, MwuReport)> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::input(format!("epsilon {epsilon} outside (0, 1]")));
    }
    t.check_for(inst)?;
    solve_expectation_lp(inst, t)?;
    let teff = effective_targets(inst, &t.t)?;
    let nc = inst.n_clients();
    let n = nc as f64;
    let requested = ((n * n.ln() / epsilon.powi(3)).ceil() as usize).max(1);
    let rounds = max_rounds.map_or(requested, |m| requested.min(m.max(1)));
    if rounds < requested {
        log::warn!("running {rounds} of {requested} rounds; the epsilon guarantee degrades to the reported ratio");
    }
    let phi = epsilon * epsilon / n;
    let alpha = solver.alpha();
    let mut logw = vec![0.0f64; nc];
    let mut sets = Vec::with_capacity(rounds);
    let mut worst = 0.0f64;
    for round in 0..rounds {
        let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logw.iter().map(|&l| (l - top).exp()).collect();
        let s = bounded_ratio_inner(inst, &teff, &w, epsilon, solver)?;
        let d = inst.service_distances(&s)?;
        let u: Vec<f64> = d.iter().zip(&teff).map(|(&dj, &tj)| phi * dj / tj).collect();
        // Potential check: log(Phi') - log(Phi) against the bound implied
        // by the solver's declared ratio.
        let sum_w: f64 = w.iter().sum();
        let next: f64 = w.iter().zip(&u).map(|(&wj, &uj)| wj * uj.exp()).sum();
        let log_ratio = (next / sum_w).ln();
        let umax = u.iter().copied().fold(0.0, f64::max);
        let slope = if umax > 1e-12 { umax.exp_m1() / umax } else { 1.0 };
        let allowed = 1.01 * (slope * phi * alpha * (1.0 + epsilon)).ln_1p();
        if log_ratio > 0.0 {
            worst = worst.max(log_ratio / allowed);
        }
        if log_ratio > allowed {
            return Err(Error::Infeasible(Infeasibility::PotentialBound {
                round,
                log_ratio,
                allowed,
            }));
        }
        for (l, uj) in logw.iter_mut().zip(&u) {
            *l += uj;
        }
        sets.push(s);
    }
    let lottery = ExplicitLottery::uniform(sets);
    let max_ratio = lottery.max_ratio(inst, &t.t)?;
    Ok((
        lottery,
        MwuReport {
            rounds,
            requested_rounds: requested,
            worst_potential_ratio: worst,
            max_ratio,
        },
    ))
}

/// Shrinks the support to at most `|C| + 1` atoms while keeping every
/// client's expected distance (and total probability) unchanged.
pub fn reduce_support(inst: &Instance, lottery: &ExplicitLottery) -> Result<ExplicitLottery> {
    let mut lot = lottery.clone();
    lot.merge_duplicates();
    let nc = inst.n_clients();
    let limit = nc + 1;
    if lot.len() <= limit {
        return Ok(lot);
    }
    let dist: Vec<Vec<f64>> = lot
        .atoms
        .iter()
        .map(|a| inst.service_distances(&a.set))
        .collect::<Result<_>>()?;
    let target = lot.expectations(inst)?;
    let mut alive: Vec<usize> = (0..lot.len()).collect();
    let mut q: Vec<f64> = lot.atoms.iter().map(|a| a.prob).collect();
    let matrix = |alive: &[usize]| -> Vec<Vec<f64>> {
        let mut rows: Vec<Vec<f64>> = (0..nc).map(|j| alive.iter().map(|&s| dist[s][j]).collect()).collect();
        rows.push(vec![1.0; alive.len()]);
        rows
    };
    while alive.len() > limit {
        let v = null_vector(matrix(&alive), alive.len())
            .ok_or_else(|| Error::invariant("no nullspace direction with more atoms than constraints"))?;
        // Step along -v (or v) until some probability hits zero.
        let v: Vec<f64> = if v.iter().any(|&x| x < 0.0) { v } else { v.iter().map(|x| -x).collect() };
        let (pos, step) = alive
            .iter()
            .enumerate()
            .filter(|(x, _)| v[*x] < 0.0)
            .map(|(x, &s)| (x, q[s] / -v[x]))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .ok_or_else(|| Error::invariant("nullspace direction without a negative entry"))?;
        for (x, &s) in alive.iter().enumerate() {
            q[s] = (q[s] + step * v[x]).max(0.0);
        }
        q[alive[pos]] = 0.0;
        alive.retain(|&s| q[s] > 0.0);
    }
    // Re-solve on the surviving support to remove accumulated drift.
    let mut rows = matrix(&alive);
    for (j, row) in rows.iter_mut().enumerate() {
        row.push(if j < nc { target[j] } else { 1.0 });
    }
    let m = alive.len();
    let rref = Rref::new(rows, m + 1, 1e-12);
    if rref.rank() == m && !rref.pivots.contains(&m) {
        let mut exact = vec![0.0; m];
        for (row, &p) in rref.rows.iter().zip(&rref.pivots) {
            exact[p] = row[m];
        }
        if exact.iter().all(|&x| x >= -1e-12) {
            for (x, &s) in alive.iter().enumerate() {
                q[s] = exact[x].max(0.0);
            }
        }
    }
    let mut out = ExplicitLottery {
        atoms: alive
            .iter()
            .map(|&s| Atom {
                set: lot.atoms[s].set.clone(),
                prob: q[s],
            })
            .collect(),
    };
    out.merge_duplicates();
    Ok(out)
}

/// Replaces a sampled lottery by the uniform lottery on
/// `ceil(6 ln n / (c eps^2))` independent draws, redrawing until every
/// client's empirical mean is at most `c (1 + eps) r_j`.
pub fn sparsify_sampling(
    inst: &Instance,
    sampler: &dyn Sampler,
    radii: &[f64],
    c: f64,
    epsilon: f64,
    rng: &mut RandomSource,
) -> Result<(ExplicitLottery, usize)> {
    if !(epsilon > 0.0) || !(c > 0.0) {
        return Err(Error::input("sparsify needs positive c and epsilon"));
    }
    let n = (inst.n_clients() as f64).max(2.0);
    let draws = ((6.0 * n.ln() / (c * epsilon * epsilon)).ceil() as usize).max(1);
    for attempt in 1..=50 {
        let mut stream = rng.child_index(attempt as u64);
        let sets = (0..draws)
            .map(|_| sampler.sample(&mut stream))
            .collect::<Result<Vec<_>>>()?;
        let lot = ExplicitLottery::uniform(sets);
        let means = lot.expectations(inst)?;
        if means.iter().zip(radii).all(|(&m, &r)| m <= c * (1.0 + epsilon) * r + 1e-12) {
            return Ok((lot, attempt));
        }
    }
    Err(Error::Resource("sparsification failed its mean check 50 times".into()))
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

    fn small_instance() -> Instance {
        let pts: Vec<Vec<f64>> = (0..7).map(|i| vec![(i * 5 % 7) as f64, (i * 3 % 4) as f64]).collect();
        Instance::euclidean_scc(pts, 2).unwrap()
    }

    #[test]
    fn subsets_in_lexicographic_order() {
        let mut all = Vec::new();
        for_each_subset(4, 2, |s| all.push(s.to_vec()));
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(binomial(30, 15), 155_117_520);
    }

    #[test]
    fn bruteforce_trivial_cases() {
        let inst = small_instance();
        let all = inst.with_k(7).unwrap();
        assert_eq!(kmedian_bruteforce(&all, &[1.0; 7], 7).unwrap().len(), 7);
        let w = [0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.0];
        let s = kmedian_bruteforce(&inst, &w, 1).unwrap();
        assert_eq!(weighted_cost(&inst, &w, s.as_slice()), 0.0);
    }

    #[test]
    fn local_search_within_five() {
        let inst = small_instance();
        let w = [1.0, 2.0, 0.5, 1.0, 3.0, 1.0, 0.2];
        let opt = weighted_cost(&inst, &w, kmedian_bruteforce(&inst, &w, 2).unwrap().as_slice());
        for seed in 0..20 {
            let s = kmedian_localsearch(&inst, &w, 2, &mut RandomSource::new(seed)).unwrap();
            assert!(weighted_cost(&inst, &w, s.as_slice()) <= 5.0 * opt + 1e-12);
        }
    }

    #[test]
    fn mwu_on_gadget_reaches_target() {
        let k = 2;
        let inst = gadget(k + 1, k);
        let t = DemandExpected::new(vec![1.0 / (k + 1) as f64; k + 1]).unwrap();
        let (lot, report) = mwu_lottery(&inst, &t, 0.25, &BruteForceKMedian, None).unwrap();
        lot.validate(k).unwrap();
        assert!(report.max_ratio <= 1.25 + 1e-9, "ratio {}", report.max_ratio);
    }

    #[test]
    fn single_round_is_one_set() {
        let inst = small_instance();
        let t = DemandExpected::new(vec![2.0; 7]).unwrap();
        let (lot, _) = mwu_lottery(&inst, &t, 0.5, &BruteForceKMedian, Some(1)).unwrap();
        assert_eq!(lot.len(), 1);
        assert_eq!(lot.atoms[0].prob, 1.0);
    }

    #[test]
    fn reduce_support_preserves_expectations() {
        let inst = small_instance().with_k(2).unwrap();
        let mut sets = Vec::new();
        for_each_subset(7, 2, |s| sets.push(SolutionSet::from(s.to_vec())));
        let mut rng = RandomSource::new(8);
        let mut atoms: Vec<Atom> = sets
            .into_iter()
            .take(12)
            .map(|set| Atom { set, prob: rng.uniform() + 0.1 })
            .collect();
        let total: f64 = atoms.iter().map(|a| a.prob).sum();
        for a in atoms.iter_mut() {
            a.prob /= total;
        }
        let lot = ExplicitLottery { atoms };
        let reduced = reduce_support(&inst, &lot).unwrap();
        assert!(reduced.len() <= 8);
        reduced.validate(2).unwrap();
        let (a, b) = (lot.expectations(&inst).unwrap(), reduced.expectations(&inst).unwrap());
        for j in 0..7 {
            assert!((a[j] - b[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn duplicates_merge() {
        let s: SolutionSet = vec![0, 1].into();
        let lot = ExplicitLottery::uniform(vec![s.clone(), s.clone()]);
        assert_eq!(lot.atoms, vec![Atom { set: s, prob: 1.0 }]);
    }

    #[test]
    fn zero_target_rejected() {
        let inst = Instance::from_matrix(2, vec![0.0, 1.0, 1.0, 0.0], vec![0], vec![1], 1, false).unwrap();
        let t = DemandExpected::new(vec![0.0]).unwrap();
        assert!(matches!(
            bounded_ratio_kmedian(&inst, &t, &[1.0], 0.5, &BruteForceKMedian),
            Err(Error::Infeasible(Infeasibility::ZeroTarget { client: 0 }))
        ));
    }
}
