//! Monte Carlo verification of sampled guarantees, exact lottery oracles
//! for small instances, and instance generators.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expected::{for_each_subset, Atom, ExplicitLottery};
use crate::lp::{LinearProgram, LpOutcome, Sense};
use crate::model::{DemandChance, DemandExpected, Instance, SolutionSet};
use crate::rounding::{RandomSource, Sampler};

/// Default failure probability of each two-sided Hoeffding interval.
pub const DEFAULT_DELTA: f64 = 0.01;
/// Default additive slack on statistical checks.
pub const DEFAULT_SLACK: f64 = 0.02;
/// Largest number of `k`-subsets the exact oracle will enumerate.
pub const ORACLE_SUBSET_LIMIT: u64 = 2000;
/// Samples processed per deterministic reduction chunk.
const CHUNK: usize = 4096;

/// Half-width of a two-sided Hoeffding interval with failure probability
/// `delta` for the mean of `n` samples with the given range.
pub fn hoeffding_radius(n: usize, delta: f64, range: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt() * range
}

/// Guarantees a sampler claims; any subset may be set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Guarantees {
    /// Hard bound on `|S|`, checked on every sample.
    pub max_size: Option<usize>,
    /// Hard bound on `d(j,S)`, checked on every sample.
    pub hard_radius: Option<Vec<f64>>,
    /// Radii at which coverage is measured.
    pub coverage_radius: Option<Vec<f64>>,
    /// Claimed lower bounds on `Pr[d(j,S) <= coverage_radius_j]`.
    pub coverage_prob: Option<Vec<f64>>,
    /// Claimed upper bounds on `E[d(j,S)]`.
    pub mean: Option<Vec<f64>>,
    pub slack: f64,
    pub delta: f64,
}

impl Default for Guarantees {
    fn default() -> Self {
        Guarantees {
            max_size: None,
            hard_radius: None,
            coverage_radius: None,
            coverage_prob: None,
            mean: None,
            slack: DEFAULT_SLACK,
            delta: DEFAULT_DELTA,
        }
    }
}

impl Guarantees {
    fn check(&self, n: usize) -> Result<()> {
        let lens = [
            self.hard_radius.as_ref().map(Vec::len),
            self.coverage_radius.as_ref().map(Vec::len),
            self.coverage_prob.as_ref().map(Vec::len),
            self.mean.as_ref().map(Vec::len),
        ];
        if lens.iter().flatten().any(|&l| l != n) {
            return Err(Error::input(format!("guarantee vectors must have one entry per client ({n})")));
        }
        if self.coverage_prob.is_some() && self.coverage_radius.is_none() {
            return Err(Error::input("coverage probabilities need coverage radii"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::input(format!("delta = {} outside (0,1)", self.delta)));
        }
        Ok(())
    }
}

/// Per-client empirical statistics.
#[derive(Debug, Clone, Serialize)]
pub struct ClientStats {
    /// Empirical `Pr[d <= coverage_radius]`, if radii were given.
    pub coverage: Option<f64>,
    pub coverage_ci: Option<f64>,
    pub mean: f64,
    pub mean_ci: f64,
    pub max: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub samples: usize,
    pub seed: u64,
    pub max_set_size: usize,
    pub mean_set_size: f64,
    pub clients: Vec<ClientStats>,
    pub pass: bool,
    /// Largest `mean_j / coverage_radius_j` when radii were given.
    pub worst_mean_ratio: Option<f64>,
    /// Smallest `coverage_j / coverage_prob_j` when both were given.
    pub worst_coverage_ratio: Option<f64>,
}

struct SampleOutcome {
    size: usize,
    dist: Vec<f64>,
}

fn draw(inst: &Instance, sampler: &dyn Sampler, root: &RandomSource, i: usize) -> Result<SampleOutcome> {
    let set = sampler.sample(&mut root.child_index(i as u64))?;
    let dist = if set.is_empty() {
        vec![f64::INFINITY; inst.n_clients()]
    } else {
        inst.service_distances(&set)?
    };
    Ok(SampleOutcome { size: set.len(), dist })
}

/// Draws `n` samples with child streams of `seed` and checks `g`.
///
/// Hard guarantees fail with `Error::Invariant` naming the first offending
/// sample. Statistical ones are reported with Hoeffding radii; a client
/// passes when its empirical value is within radius plus slack of the
/// claim. The result does not depend on `jobs`.
pub fn mc_verify(
    inst: &Instance,
    sampler: &dyn Sampler,
    g: &Guarantees,
    n: usize,
    seed: u64,
    jobs: usize,
) -> Result<VerificationReport> {
    let nc = inst.n_clients();
    g.check(nc)?;
    if n == 0 {
        return Err(Error::input("need at least one sample"));
    }
    let pool = if jobs > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::Resource(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };
    let root = RandomSource::new(seed);
    let mut covered = vec![0usize; nc];
    let mut sum = vec![0.0; nc];
    let mut max = vec![0.0f64; nc];
    let mut max_size = 0;
    let mut size_sum = 0usize;
    for start in (0..n).step_by(CHUNK) {
        let end = (start + CHUNK).min(n);
        let batch: Vec<Result<SampleOutcome>> = match &pool {
            Some(p) => p.install(|| (start..end).into_par_iter().map(|i| draw(inst, sampler, &root, i)).collect()),
            None => (start..end).map(|i| draw(inst, sampler, &root, i)).collect(),
        };
        for (off, out) in batch.into_iter().enumerate() {
            let i = start + off;
            let out = out?;
            if let Some(cap) = g.max_size {
                if out.size > cap {
                    return Err(Error::invariant(format!("sample {i}: |S| = {} exceeds {cap}", out.size)));
                }
            }
            if let Some(h) = &g.hard_radius {
                if let Some(j) = (0..nc).find(|&j| out.dist[j] > h[j] * (1.0 + 1e-12) + 1e-12) {
                    return Err(Error::invariant(format!(
                        "sample {i}: client {j} at distance {} beyond hard bound {}",
                        out.dist[j], h[j]
                    )));
                }
            }
            max_size = max_size.max(out.size);
            size_sum += out.size;
            for j in 0..nc {
                let d = out.dist[j];
                sum[j] += d;
                max[j] = max[j].max(d);
                if let Some(r) = &g.coverage_radius {
                    if d <= r[j] {
                        covered[j] += 1;
                    }
                }
            }
        }
    }
    let nf = n as f64;
    let ci_cov = hoeffding_radius(n, g.delta, 1.0);
    let fallback_range = inst.max_distance();
    let mut clients = Vec::with_capacity(nc);
    let mut worst_mean_ratio: Option<f64> = None;
    let mut worst_cov_ratio: Option<f64> = None;
    for j in 0..nc {
        let mean = sum[j] / nf;
        let range = g.hard_radius.as_ref().map_or(fallback_range, |h| h[j]);
        let mean_ci = hoeffding_radius(n, g.delta, range);
        let coverage = g.coverage_radius.as_ref().map(|_| covered[j] as f64 / nf);
        let mut pass = true;
        if let (Some(c), Some(p)) = (coverage, &g.coverage_prob) {
            pass &= c >= p[j] - ci_cov - g.slack;
            if p[j] > 0.0 {
                let r = c / p[j];
                worst_cov_ratio = Some(worst_cov_ratio.map_or(r, |w: f64| w.min(r)));
            }
        }
        if let Some(m) = &g.mean {
            pass &= mean <= m[j] + mean_ci + g.slack;
        }
        if let Some(r) = &g.coverage_radius {
            if r[j] > 0.0 {
                let q = mean / r[j];
                worst_mean_ratio = Some(worst_mean_ratio.map_or(q, |w: f64| w.max(q)));
            }
        }
        clients.push(ClientStats {
            coverage,
            coverage_ci: coverage.map(|_| ci_cov),
            mean,
            mean_ci,
            max: max[j],
            pass,
        });
    }
    Ok(VerificationReport {
        samples: n,
        seed,
        max_set_size: max_size,
        mean_set_size: size_sum as f64 / nf,
        pass: clients.iter().all(|c| c.pass),
        clients,
        worst_mean_ratio,
        worst_coverage_ratio: worst_cov_ratio,
    })
}

/// Objective of the exact lottery oracle.
#[derive(Debug, Clone)]
pub enum OracleObjective {
    /// Maximize `min_j Pr[d(j,S) <= r_j] / p_j` over clients with `p_j > 0`.
    Chance(DemandChance),
    /// Minimize `max_j E[d(j,S)] / t_j`.
    Expected(DemandExpected),
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Optimal ratio (`>= 1` means the chance demand is met; `<= 1` means
    /// the expected demand is met).
    pub value: f64,
    pub lottery: ExplicitLottery,
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u64) {
            Some(v) => v / (i as u64 + 1),
            None => return u64::MAX,
        };
    }
    acc
}

/// Best k-lottery for the objective, by an exact LP over all `k`-subsets.
pub fn oracle_best_lottery(inst: &Instance, objective: &OracleObjective) -> Result<OracleResult> {
    let nf = inst.n_facilities();
    let k = inst.k();
    let count = binomial(nf, k);
    if count > ORACLE_SUBSET_LIMIT {
        return Err(Error::input(format!("C({nf}, {k}) = {count} subsets exceed {ORACLE_SUBSET_LIMIT}")));
    }
    let mut sets = Vec::new();
    let mut dists = Vec::new();
    let mut err = None;
    for_each_subset(nf, k, |s| {
        let set: SolutionSet = s.iter().copied().collect();
        match inst.service_distances(&set) {
            Ok(d) => dists.push(d),
            Err(e) => err = Some(e),
        }
        sets.push(set);
    });
    if let Some(e) = err {
        return Err(e);
    }
    let m = sets.len();
    let nc = inst.n_clients();
    let z = m; // ratio variable
    let mut lp = LinearProgram::new(m + 1);
    lp.add_row((0..m).map(|s| (s, 1.0)).collect(), Sense::Eq, 1.0);
    match objective {
        OracleObjective::Chance(dem) => {
            dem.check_for(inst)?;
            lp.set_objective(z, -1.0);
            let mut any = false;
            for j in 0..nc {
                if dem.p[j] <= 0.0 {
                    continue;
                }
                any = true;
                let mut row: Vec<(usize, f64)> =
                    (0..m).filter(|&s| dists[s][j] <= dem.r[j]).map(|s| (s, 1.0)).collect();
                row.push((z, -dem.p[j]));
                lp.add_row(row, Sense::Ge, 0.0);
            }
            if !any {
                return Ok(OracleResult {
                    value: f64::INFINITY,
                    lottery: ExplicitLottery {
                        atoms: vec![Atom { set: sets[0].clone(), prob: 1.0 }],
                    },
                });
            }
        }
        OracleObjective::Expected(dem) => {
            if dem.t.len() != nc {
                return Err(Error::input("one target per client required"));
            }
            lp.set_objective(z, 1.0);
            for j in 0..nc {
                let mut row: Vec<(usize, f64)> = (0..m).map(|s| (s, dists[s][j])).collect();
                row.push((z, -dem.t[j]));
                lp.add_row(row, Sense::Le, 0.0);
            }
        }
    }
    let sol = match lp.solve()? {
        LpOutcome::Optimal(sol) => sol,
        other => return Err(Error::Solver(format!("oracle LP ended with {other:?}"))),
    };
    let value = sol.x[z];
    let mut lottery = ExplicitLottery {
        atoms: sets
            .into_iter()
            .zip(&sol.x)
            .filter(|(_, &q)| q > 1e-12)
            .map(|(set, &prob)| Atom { set, prob })
            .collect(),
    };
    let total: f64 = lottery.atoms.iter().map(|a| a.prob).sum();
    for a in &mut lottery.atoms {
        a.prob /= total;
    }
    Ok(OracleResult { value, lottery })
}

/// Smallest `max_j d(j,S)/t_j` over all sets of at most `max_size`
/// facilities, by enumeration.
pub fn best_determinization_beta(inst: &Instance, t: &[f64], max_size: usize) -> Result<f64> {
    let nf = inst.n_facilities();
    let size = max_size.min(nf);
    if binomial(nf, size) > 10_000_000 {
        return Err(Error::input("too many subsets to enumerate"));
    }
    let mut best = f64::INFINITY;
    let mut err = None;
    // Adding facilities never hurts, so sets of exactly `size` suffice.
    for_each_subset(nf, size, |s| {
        let set: SolutionSet = s.iter().copied().collect();
        match crate::determinize::achieved_beta(inst, t, &set) {
            Ok(b) => best = best.min(b),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(best),
    }
}

/// Instance families produced by [`gen_instance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    /// Uniform points in the unit cube.
    Euclidean,
    /// Shortest-path closure of a random weighted graph.
    RandomMetric,
    /// `n` points at pairwise distance 1.
    UniformGadget,
    /// A center and `n - 1` leaves with random edge lengths.
    Star,
}

impl std::str::FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(GenKind::Euclidean),
            "random_metric" => Ok(GenKind::RandomMetric),
            "uniform_gadget" => Ok(GenKind::UniformGadget),
            "star" => Ok(GenKind::Star),
            _ => Err(Error::input(format!("unknown instance kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenParams {
    /// Number of points (SCC) or clients.
    pub n: usize,
    pub k: usize,
    /// Separate facility count; `None` gives an SCC instance.
    pub n_facilities: Option<usize>,
    /// Euclidean dimension.
    pub dim: usize,
}

impl GenParams {
    pub fn scc(n: usize, k: usize) -> Self {
        GenParams {
            n,
            k,
            n_facilities: None,
            dim: 2,
        }
    }

    pub fn supplier(n_clients: usize, n_facilities: usize, k: usize) -> Self {
        GenParams {
            n: n_clients,
            k,
            n_facilities: Some(n_facilities),
            dim: 2,
        }
    }
}

fn from_points_matrix(n: usize, d: Vec<f64>, p: &GenParams) -> Result<Instance> {
    match p.n_facilities {
        None => Instance::scc_from_matrix(n, d, p.k),
        Some(nf) => Instance::from_matrix(n, d, (0..nf).collect(), (nf..n).collect(), p.k, false),
    }
}

/// Deterministic instance generator.
pub fn gen_instance(kind: GenKind, p: &GenParams, seed: u64) -> Result<Instance> {
    if p.n == 0 {
        return Err(Error::input("n must be positive"));
    }
    let mut rng = RandomSource::new(seed);
    let total = p.n + p.n_facilities.unwrap_or(0);
    match kind {
        GenKind::Euclidean => {
            if p.dim == 0 {
                return Err(Error::input("dimension must be positive"));
            }
            let mut pts = |m: usize| -> Vec<Vec<f64>> {
                (0..m).map(|_| (0..p.dim).map(|_| rng.uniform()).collect()).collect()
            };
            match p.n_facilities {
                None => Instance::euclidean_scc(pts(p.n), p.k),
                Some(nf) => {
                    let f = pts(nf);
                    let c = pts(p.n);
                    Instance::euclidean(f, c, p.k)
                }
            }
        }
        GenKind::RandomMetric => {
            let n = total;
            let mut d = vec![f64::INFINITY; n * n];
            for i in 0..n {
                d[i * n + i] = 0.0;
            }
            let mut set = |a: usize, b: usize, w: f64| {
                d[a * n + b] = d[a * n + b].min(w);
                d[b * n + a] = d[b * n + a].min(w);
            };
            // A random spanning path keeps the graph connected.
            let mut order: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.gen_range(0..=i);
                order.swap(i, j);
            }
            for w in order.windows(2) {
                let len = rng.gen_range(0.1..1.0);
                set(w[0], w[1], len);
            }
            for a in 0..n {
                for b in a + 1..n {
                    if rng.bernoulli(0.4) {
                        let len = rng.gen_range(0.1..1.0);
                        set(a, b, len);
                    }
                }
            }
            for m in 0..n {
                for a in 0..n {
                    let dam = d[a * n + m];
                    for b in 0..n {
                        let via = dam + d[m * n + b];
                        if via < d[a * n + b] {
                            d[a * n + b] = via;
                        }
                    }
                }
            }
            from_points_matrix(n, d, p)
        }
        GenKind::UniformGadget => {
            let n = total;
            let d = (0..n * n).map(|x| if x / n == x % n { 0.0 } else { 1.0 }).collect();
            from_points_matrix(n, d, p)
        }
        GenKind::Star => {
            let n = total;
            let leg: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { rng.gen_range(0.5..1.5) }).collect();
            let d = (0..n * n)
                .map(|x| {
                    let (a, b) = (x / n, x % n);
                    if a == b {
                        0.0
                    } else {
                        leg[a] + leg[b]
                    }
                })
                .collect();
            from_points_matrix(n, d, p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rounding::dep_round;

    struct Fixed(SolutionSet);

    impl Sampler for Fixed {
        fn sample(&self, _: &mut RandomSource) -> Result<SolutionSet> {
            Ok(self.0.clone())
        }
        fn max_size(&self) -> usize {
            self.0.len()
        }
    }

    /// Opens `k + 1` facilities on sample 17 only.
    struct Broken {
        k: usize,
    }

    impl Sampler for Broken {
        fn sample(&self, rng: &mut RandomSource) -> Result<SolutionSet> {
            let root = RandomSource::new(5);
            let n = if rng.seed() == root.child_index(17).seed() { self.k + 1 } else { self.k };
            Ok((0..n).collect())
        }
        fn max_size(&self) -> usize {
            self.k
        }
    }

    struct Halves;

    impl Sampler for Halves {
        fn sample(&self, rng: &mut RandomSource) -> Result<SolutionSet> {
            Ok(dep_round(&[0.5, 0.5], rng)?.into())
        }
        fn max_size(&self) -> usize {
            1
        }
    }

    #[test]
    fn deterministic_sampler_gives_exact_values() {
        let inst = gen_instance(GenKind::Euclidean, &GenParams::scc(6, 2), 1).unwrap();
        let set: SolutionSet = vec![0, 3].into();
        let exact = inst.service_distances(&set).unwrap();
        let g = Guarantees {
            max_size: Some(2),
            hard_radius: Some(exact.clone()),
            mean: Some(exact.clone()),
            coverage_radius: Some(exact.clone()),
            coverage_prob: Some(vec![1.0; 6]),
            ..Guarantees::default()
        };
        let rep = mc_verify(&inst, &Fixed(set), &g, 1000, 3, 1).unwrap();
        assert!(rep.pass);
        for (c, e) in rep.clients.iter().zip(&exact) {
            assert!((c.mean - e).abs() <= 1e-12 * (1.0 + e));
            assert_eq!(c.max, *e);
            assert_eq!(c.coverage, Some(1.0));
        }
    }

    #[test]
    fn broken_sampler_reported_at_first_offence() {
        let inst = gen_instance(GenKind::UniformGadget, &GenParams::scc(5, 2), 0).unwrap();
        let g = Guarantees {
            max_size: Some(2),
            ..Guarantees::default()
        };
        let err = mc_verify(&inst, &Broken { k: 2 }, &g, 1000, 5, 2).unwrap_err();
        assert!(err.to_string().contains("sample 17"), "{err}");
    }

    #[test]
    fn statistics_independent_of_jobs() {
        let inst = gen_instance(GenKind::Euclidean, &GenParams::scc(2, 1), 4).unwrap();
        let g = Guarantees {
            coverage_radius: Some(vec![0.0, 0.0]),
            coverage_prob: Some(vec![0.5, 0.5]),
            ..Guarantees::default()
        };
        let a = mc_verify(&inst, &Halves, &g, 10_000, 9, 1).unwrap();
        let b = mc_verify(&inst, &Halves, &g, 10_000, 9, 3).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.pass);
        assert!((a.clients[0].coverage.unwrap() - 0.5).abs() < 0.03);
    }

    #[test]
    fn hoeffding_value() {
        let r = hoeffding_radius(100_000, 0.01, 1.0);
        assert!((r - (200f64.ln() / 200_000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn oracle_on_gadget() {
        for k in 1..=3 {
            let inst = gen_instance(GenKind::UniformGadget, &GenParams::scc(k + 1, k), 0).unwrap();
            let res = oracle_best_lottery(&inst, &OracleObjective::Expected(DemandExpected::new(vec![1.0; k + 1]).unwrap()))
                .unwrap();
            assert!((res.value - 1.0 / (k + 1) as f64).abs() < 1e-9);
            let e = res.lottery.expectations(&inst).unwrap();
            assert!(e.iter().all(|&x| (x - 1.0 / (k + 1) as f64).abs() < 1e-9));
        }
    }

    #[test]
    fn oracle_with_all_facilities() {
        let inst = gen_instance(GenKind::Euclidean, &GenParams::supplier(5, 3, 3), 2).unwrap();
        let dem = DemandChance::new(vec![1.0; 5], (0..5).map(|j| inst.theta(j)).collect()).unwrap();
        let res = oracle_best_lottery(&inst, &OracleObjective::Chance(dem)).unwrap();
        assert!((res.value - 1.0).abs() < 1e-9);
        assert_eq!(res.lottery.atoms.len(), 1);
    }

    #[test]
    fn oracle_matches_enumeration_for_deterministic_optimum() {
        // The best single set bounds the oracle from one side; the oracle
        // value must never be worse.
        let inst = gen_instance(GenKind::RandomMetric, &GenParams::scc(7, 2), 11).unwrap();
        let t = vec![0.3; 7];
        let res = oracle_best_lottery(&inst, &OracleObjective::Expected(DemandExpected::new(t.clone()).unwrap())).unwrap();
        let mut best_det = f64::INFINITY;
        for_each_subset(7, 2, |s| {
            let set: SolutionSet = s.iter().copied().collect();
            let d = inst.service_distances(&set).unwrap();
            best_det = best_det.min(d.iter().map(|x| x / 0.3).fold(0.0, f64::max));
        });
        assert!(res.value <= best_det + 1e-9);
        let achieved = res.lottery.max_ratio(&inst, &t).unwrap();
        assert!((achieved - res.value).abs() < 1e-7);
    }

    #[test]
    fn generators_are_metrics_and_deterministic() {
        for kind in [GenKind::Euclidean, GenKind::RandomMetric, GenKind::UniformGadget, GenKind::Star] {
            for params in [GenParams::scc(10, 3), GenParams::supplier(6, 4, 2)] {
                let a = gen_instance(kind, &params, 42).unwrap();
                let b = gen_instance(kind, &params, 42).unwrap();
                a.validate(true).unwrap();
                for j in 0..a.n_clients() {
                    assert_eq!(a.client_row(j), b.client_row(j));
                }
            }
        }
        let one = gen_instance(GenKind::Euclidean, &GenParams::scc(1, 1), 0).unwrap();
        assert_eq!(one.dist(0, 0), 0.0);
    }

    #[test]
    fn gadget_determinization_exhaustive() {
        let inst = gen_instance(GenKind::UniformGadget, &GenParams::scc(5, 2), 0).unwrap();
        // alpha = 2, k = 2: targets ((alpha-1)k+1)/(alpha k+1) = 3/5
        let t = vec![0.6; 5];
        let b = best_determinization_beta(&inst, &t, 4).unwrap();
        assert!((b - 5.0 / 3.0).abs() < 1e-12);
    }
}
