//! Lotteries for deterministic demands (`p_j = 1`): every client is served
//! within `3 r_j` on every draw and much closer on average.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Infeasibility, Result};
use crate::lp::{solve_chance_lp, split_facilities, ClusterFamily, FractionalOpening, SplitMode};
use crate::model::{DemandChance, Instance, SolutionSet};
use crate::rounding::{dep_round, greedy_cluster, RandomSource, Sampler};

/// Center-shift probability minimizing the SCC bound.
pub const SCC_SHIFT_Q: f64 = 0.464587;
/// Residual masses within this distance of 1 count as full clusters.
const FULL_TOL: f64 = 1e-9;

/// Inverse-CDF draw over copies in index order, scaled by `total`.
fn draw_copy(copies: &[usize], masses: &[f64], total: f64, rng: &mut RandomSource) -> usize {
    let target = rng.uniform() * total;
    let mut acc = 0.0;
    for &c in copies {
        acc += masses[c];
        if target < acc {
            return c;
        }
    }
    // Rounding left `target` just past the last positive copy.
    *copies
        .iter()
        .rev()
        .find(|&&c| masses[c] > 0.0)
        .unwrap_or(&copies[copies.len() - 1])
}

fn certain_opening(inst: &Instance, radii: &[f64]) -> Result<(FractionalOpening, ClusterFamily)> {
    let demand = DemandChance::certain(radii.to_vec())?;
    demand.check_for(inst)?;
    let opening = solve_chance_lp(inst, &demand)?;
    let family = split_facilities(inst, &opening, radii, &vec![1.0; radii.len()], SplitMode::PerClient)?;
    Ok((opening, family))
}

/// Cluster rounding: one facility per greedy cluster, optionally shifted to
/// the cluster center with probability `q`, plus dependent rounding of the
/// unclustered mass.
#[derive(Debug, Clone)]
pub struct ClusterLottery {
    family: ClusterFamily,
    masses: Vec<f64>,
    /// Greedy cluster centers.
    pub centers: Vec<usize>,
    /// Copies outside every selected cluster.
    pub unclustered: Vec<usize>,
    /// Center shift probability; zero outside the SCC setting.
    pub q: f64,
    k: usize,
}

impl ClusterLottery {
    /// Plain cluster rounding for arbitrary instances.
    pub fn general(inst: &Instance, radii: &[f64]) -> Result<Self> {
        Self::build(inst, radii, 0.0)
    }

    /// Center-shift rounding; needs an SCC instance.
    pub fn scc(inst: &Instance, radii: &[f64], q: f64) -> Result<Self> {
        if !inst.is_scc() {
            return Err(Error::input("center-shift lottery needs an SCC instance"));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::input(format!("shift probability {q} outside [0,1]")));
        }
        Self::build(inst, radii, q)
    }

    fn build(inst: &Instance, radii: &[f64], q: f64) -> Result<Self> {
        let (_, family) = certain_opening(inst, radii)?;
        let centers = greedy_cluster(&family.clusters, radii);
        let mut clustered = vec![false; family.n_copies()];
        for &z in &centers {
            for &c in &family.clusters[z] {
                clustered[c] = true;
            }
        }
        let unclustered = (0..family.n_copies()).filter(|&c| !clustered[c]).collect();
        Ok(ClusterLottery {
            masses: family.copy_masses(),
            family,
            centers,
            unclustered,
            q,
            k: inst.k(),
        })
    }

    pub fn family(&self) -> &ClusterFamily {
        &self.family
    }
}

impl Sampler for ClusterLottery {
    fn sample(&self, rng: &mut RandomSource) -> Result<SolutionSet> {
        let mut s = SolutionSet::new();
        for &z in &self.centers {
            let cl = &self.family.clusters[z];
            if self.q > 0.0 && rng.bernoulli(self.q) {
                s.insert(z);
            } else {
                let total = self.family.mass_under(z, &self.masses);
                s.insert(self.family.original(draw_copy(cl, &self.masses, total, rng)));
            }
        }
        let y: Vec<f64> = self.unclustered.iter().map(|&c| self.masses[c]).collect();
        for x in dep_round(&y, rng)? {
            s.insert(self.family.original(self.unclustered[x]));
        }
        if s.len() > self.k {
            return Err(Error::invariant(format!("cluster lottery opened {} > k", s.len())));
        }
        Ok(s)
    }

    fn max_size(&self) -> usize {
        self.k
    }
}

pub fn lottery_general(inst: &Instance, radii: &[f64], rng: &mut RandomSource) -> Result<SolutionSet> {
    ClusterLottery::general(inst, radii)?.sample(&mut rng.child("lottery-general"))
}

pub fn lottery_scc(inst: &Instance, radii: &[f64], q: f64, rng: &mut RandomSource) -> Result<SolutionSet> {
    ClusterLottery::scc(inst, radii, q)?.sample(&mut rng.child("lottery-scc"))
}

/// One support point of the joint shift distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QAtom {
    pub q_f: f64,
    pub q_p: f64,
    pub prob: f64,
}

/// Joint distribution of the full- and partial-cluster shift probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QDistribution {
    pub atoms: Vec<QAtom>,
}

impl QDistribution {
    pub fn new(atoms: Vec<QAtom>) -> Result<Self> {
        let d = QDistribution { atoms };
        d.validate()?;
        Ok(d)
    }

    /// The two-point distribution tuned for homogeneous SCC instances.
    pub fn tuned() -> Self {
        QDistribution {
            atoms: vec![
                QAtom {
                    q_f: 0.4525,
                    q_p: 0.0,
                    prob: 0.773436,
                },
                QAtom {
                    q_f: 0.0480,
                    q_p: 0.3950,
                    prob: 1.0 - 0.773436,
                },
            ],
        }
    }

    pub fn point(q_f: f64, q_p: f64) -> Self {
        QDistribution {
            atoms: vec![QAtom { q_f, q_p, prob: 1.0 }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::input("empty Q distribution"));
        }
        for a in &self.atoms {
            for v in [a.q_f, a.q_p, a.prob] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::input(format!("Q distribution value {v} outside [0,1]")));
                }
            }
        }
        let total: f64 = self.atoms.iter().map(|a| a.prob).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::input(format!("Q distribution probabilities sum to {total}")));
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut RandomSource) -> (f64, f64) {
        let u = rng.uniform();
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.prob;
            if u < acc {
                return (a.q_f, a.q_p);
            }
        }
        let last = self.atoms[self.atoms.len() - 1];
        (last.q_f, last.q_p)
    }
}

/// Greedy residual clusters: `groups[r]` is the cluster of `order[r]` minus
/// every earlier cluster, and `z[r]` is its mass.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialClusterDecomposition {
    pub order: Vec<usize>,
    pub groups: Vec<Vec<usize>>,
    pub z: Vec<f64>,
}

impl PartialClusterDecomposition {
    pub fn is_full(&self, rank: usize) -> bool {
        self.z[rank] == 1.0
    }
}

/// Orders clients by largest residual cluster mass (ties by index).
pub fn build_partial_decomposition(family: &ClusterFamily, masses: &[f64]) -> PartialClusterDecomposition {
    let n = family.clusters.len();
    let mut used = vec![false; family.n_copies()];
    let mut chosen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    for _ in 0..n {
        let residual = |j: usize| -> f64 {
            family.clusters[j]
                .iter()
                .filter(|&&c| !used[c])
                .map(|&c| masses[c])
                .sum()
        };
        let mut best: Option<(usize, f64)> = None;
        for j in (0..n).filter(|&j| !chosen[j]) {
            let r = residual(j);
            if best.map_or(true, |(_, m)| r > m) {
                best = Some((j, r));
            }
        }
        let (j, mass) = best.expect("a client remains");
        chosen[j] = true;
        let group: Vec<usize> = family.clusters[j].iter().copied().filter(|&c| !used[c]).collect();
        for &c in &group {
            used[c] = true;
        }
        order.push(j);
        groups.push(group);
        z.push(if mass >= 1.0 - FULL_TOL { 1.0 } else { mass.max(0.0) });
    }
    PartialClusterDecomposition { order, groups, z }
}

/// Partial-cluster rounding for homogeneous SCC instances.
#[derive(Debug, Clone)]
pub struct PartialLottery {
    pub decomposition: PartialClusterDecomposition,
    pub qdist: QDistribution,
    pub radius: f64,
    family: ClusterFamily,
    masses: Vec<f64>,
    k: usize,
}

impl PartialLottery {
    pub fn prepare(inst: &Instance, radius: f64, qdist: QDistribution) -> Result<Self> {
        if !inst.is_scc() {
            return Err(Error::input("partial-cluster lottery needs an SCC instance"));
        }
        qdist.validate()?;
        let radii = vec![radius; inst.n_clients()];
        let (_, family) = certain_opening(inst, &radii)?;
        let masses = family.copy_masses();
        let decomposition = build_partial_decomposition(&family, &masses);
        let total: f64 = decomposition.z.iter().sum();
        if total > inst.k() as f64 + 1e-9 {
            return Err(Error::invariant(format!("residual masses sum to {total} > k")));
        }
        Ok(PartialLottery {
            decomposition,
            qdist,
            radius,
            family,
            masses,
            k: inst.k(),
        })
    }

    /// Prepares with the smallest LP-feasible common radius.
    pub fn with_guessed_radius(inst: &Instance, qdist: QDistribution) -> Result<Self> {
        let r = guess_radius(inst)?;
        Self::prepare(inst, r, qdist)
    }
}

impl Sampler for PartialLottery {
    fn sample(&self, rng: &mut RandomSource) -> Result<SolutionSet> {
        let (q_f, q_p) = self.qdist.sample(rng);
        let dec = &self.decomposition;
        let mut s = SolutionSet::new();
        for rank in dep_round(&dec.z, rng)? {
            let q = if dec.is_full(rank) { q_f } else { q_p };
            if q > 0.0 && rng.bernoulli(q) {
                s.insert(dec.order[rank]);
            } else {
                let group = &dec.groups[rank];
                let total: f64 = group.iter().map(|&c| self.masses[c]).sum();
                s.insert(self.family.original(draw_copy(group, &self.masses, total, rng)));
            }
        }
        if s.len() > self.k {
            return Err(Error::invariant(format!("partial lottery opened {} > k", s.len())));
        }
        Ok(s)
    }

    fn max_size(&self) -> usize {
        self.k
    }
}

/// Checks that the instance is SCC and that all radii agree.
pub fn lottery_partial(
    inst: &Instance,
    radii: &[f64],
    qdist: &QDistribution,
    rng: &mut RandomSource,
) -> Result<SolutionSet> {
    let r = *radii.first().ok_or_else(|| Error::input("no radii"))?;
    if radii.iter().any(|&x| x != r) {
        return Err(Error::input("partial-cluster lottery needs a common radius"));
    }
    PartialLottery::prepare(inst, r, qdist.clone())?.sample(&mut rng.child("lottery-partial"))
}

/// Smallest facility-client distance `T` for which the chance relaxation
/// with `p = 1`, `r = T` is feasible.
pub fn guess_radius(inst: &Instance) -> Result<f64> {
    let mut cand: Vec<f64> = (0..inst.n_clients()).flat_map(|j| inst.client_row(j)).collect();
    cand.sort_by(f64::total_cmp);
    cand.dedup();
    let n = inst.n_clients();
    let feasible = |r: f64| -> Result<bool> {
        match solve_chance_lp(inst, &DemandChance::homogeneous(n, 1.0, r)?) {
            Ok(_) => Ok(true),
            Err(Error::Infeasible(Infeasibility::LpPhaseOne { .. } | Infeasibility::EmptyBall { .. })) => {
                Ok(false)
            }
            Err(e) => Err(e),
        }
    };
    let (mut lo, mut hi) = (0usize, cand.len() - 1);
    if !feasible(cand[hi])? {
        return Err(Error::Solver("relaxation infeasible at the largest distance".into()));
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(cand[mid])? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(cand[lo])
}

/// Draws `n` sets with per-sample child streams of `seed`, using `jobs`
/// worker threads. The result does not depend on `jobs`.
pub fn sample_batch<S: Sampler + ?Sized>(sampler: &S, n: usize, seed: u64, jobs: usize) -> Result<Vec<SolutionSet>> {
    let root = RandomSource::new(seed);
    let draw = |i: usize| sampler.sample(&mut root.child_index(i as u64));
    if jobs <= 1 {
        return (0..n).map(draw).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(draw).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::FacilityCopy;

    fn two_clusters() -> Instance {
        // points 0,1 near each other, 2,3 near each other, far apart
        Instance::euclidean_scc(vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]], 2).unwrap()
    }

    #[test]
    fn tuned_distribution_is_valid() {
        QDistribution::tuned().validate().unwrap();
        assert!(QDistribution::new(vec![QAtom { q_f: 0.1, q_p: 0.1, prob: 0.5 }]).is_err());
    }

    #[test]
    fn general_lottery_covers_within_three_radii() {
        let inst = two_clusters();
        let radii = vec![1.0; 4];
        let lot = ClusterLottery::general(&inst, &radii).unwrap();
        let sets = sample_batch(&lot, 2000, 9, 1).unwrap();
        for s in &sets {
            assert!(s.len() <= 2);
            for j in 0..4 {
                assert!(inst.service_distance(j, s).unwrap() <= 3.0);
            }
        }
    }

    #[test]
    fn batch_is_job_independent() {
        let inst = two_clusters();
        let lot = ClusterLottery::scc(&inst, &[1.0; 4], SCC_SHIFT_Q).unwrap();
        assert_eq!(sample_batch(&lot, 300, 4, 1).unwrap(), sample_batch(&lot, 300, 4, 3).unwrap());
    }

    #[test]
    fn scc_shift_requires_scc() {
        let inst = Instance::euclidean(vec![vec![0.0]], vec![vec![1.0]], 1).unwrap();
        assert!(ClusterLottery::scc(&inst, &[1.0], 0.5).is_err());
    }

    #[test]
    fn full_shift_opens_centers() {
        let inst = two_clusters();
        let lot = ClusterLottery::scc(&inst, &[1.0; 4], 1.0).unwrap();
        let s = lot.sample(&mut RandomSource::new(1)).unwrap();
        let expect: SolutionSet = lot.centers.iter().copied().collect();
        assert_eq!(s, expect);
    }

    fn family(clusters: Vec<Vec<usize>>, masses: &[f64]) -> ClusterFamily {
        ClusterFamily {
            copies: masses.iter().enumerate().map(|(i, &m)| FacilityCopy { original: i, mass: m }).collect(),
            clusters,
            n_facilities: masses.len(),
        }
    }

    #[test]
    fn decomposition_examples() {
        let disjoint = family(vec![vec![0], vec![1]], &[1.0, 1.0]);
        let d = build_partial_decomposition(&disjoint, &[1.0, 1.0]);
        assert_eq!(d.order, vec![0, 1]);
        assert_eq!(d.z, vec![1.0, 1.0]);

        let same = family(vec![vec![0, 1], vec![0, 1]], &[0.5, 0.5]);
        let d = build_partial_decomposition(&same, &[0.5, 0.5]);
        assert_eq!(d.z, vec![1.0, 0.0]);

        // chain over copies of mass .5 each: {0,1}, {1,2}, {2,3}
        let m = [0.5; 4];
        let chain = family(vec![vec![0, 1], vec![1, 2], vec![2, 3]], &m);
        let d = build_partial_decomposition(&chain, &m);
        assert_eq!(d.order, vec![0, 2, 1]);
        assert_eq!(d.z, vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn guessed_radius_small_cases() {
        let inst = two_clusters().with_k(4).unwrap();
        assert_eq!(guess_radius(&inst).unwrap(), 0.0);
        let star = Instance::euclidean(vec![vec![0.0], vec![5.0]], vec![vec![1.0], vec![-2.0], vec![0.5]], 1).unwrap();
        assert_eq!(guess_radius(&star).unwrap(), 2.0);
    }

    #[test]
    fn partial_lottery_respects_budget_and_radius() {
        let pts: Vec<Vec<f64>> = (0..8).map(|i| vec![(i * 7 % 11) as f64, (i * 3 % 5) as f64]).collect();
        let inst = Instance::euclidean_scc(pts, 3).unwrap();
        let lot = PartialLottery::with_guessed_radius(&inst, QDistribution::tuned()).unwrap();
        let r = lot.radius;
        for s in sample_batch(&lot, 2000, 3, 1).unwrap() {
            assert!(s.len() <= 3);
            for j in 0..8 {
                assert!(inst.service_distance(j, &s).unwrap() <= 3.0 * r + 1e-12);
            }
        }
    }
}
