//! Chance k-coverage: roundings of the chance relaxation that guarantee
//! `Pr[d(j,S) <= c r_j] >= p_j` (or a constant fraction of `p_j`).

use crate::error::{Error, Result};
use crate::linalg::null_vector;
use crate::lp::{solve_chance_lp, split_facilities, ClusterFamily, FractionalOpening, SplitMode};
use crate::model::{DemandChance, Instance, SolutionSet};
use crate::rounding::{dep_round, greedy_cluster, RandomSource, Sampler};

/// Cluster sums within this distance of 0 or 1 count as integral.
pub const CLUSTER_TOL: f64 = 1e-9;
const COORD_TOL: f64 = 1e-12;

fn check_size(s: &SolutionSet, k: usize) -> Result<()> {
    if s.len() > k {
        return Err(Error::invariant(format!("opened {} facilities with budget {k}", s.len())));
    }
    Ok(())
}

/// Dependent rounding of the LP opening itself. Meets
/// `Pr[d(j,S) <= r_j] >= (1 - 1/e) p_j`.
#[derive(Debug, Clone)]
pub struct FaithfulRounding {
    pub opening: FractionalOpening,
}

impl FaithfulRounding {
    pub fn prepare(inst: &Instance, demand: &DemandChance) -> Result<Self> {
        Ok(FaithfulRounding {
            opening: solve_chance_lp(inst, demand)?,
        })
    }
}

impl Sampler for FaithfulRounding {
    fn sample(&self, rng: &mut RandomSource) -> Result<SolutionSet> {
        let s: SolutionSet = dep_round(&self.opening.b, rng)?.into();
        check_size(&s, self.opening.k)?;
        Ok(s)
    }

    fn max_size(&self) -> usize {
        self.opening.k
    }
}

pub fn round_probability_faithful(inst: &Instance, demand: &DemandChance, rng: &mut RandomSource) -> Result<SolutionSet> {
    FaithfulRounding::prepare(inst, demand)?.sample(&mut rng.child("faithful"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfMode {
    /// All `p_j` equal; clusters are ranked by radius.
    EqualP,
    /// All `r_j` equal; clusters are ranked by `1 - p_j`.
    EqualR,
}

/// Greedy clusters, then dependent rounding over cluster probabilities,
/// opening the nearest facility of each surviving center.
#[derive(Debug, Clone)]
pub struct HalfHomogeneousRounding {
    /// Selected cluster centers.
    pub centers: Vec<usize>,
    /// Facility opened for each center.
    pub opens: Vec<usize>,
    /// Rounding probability of each center.
    pub probs: Vec<f64>,
    k: usize,
}

impl HalfHomogeneousRounding {
    pub fn prepare(inst: &Instance, demand: &DemandChance, mode: HalfMode) -> Result<Self> {
        demand.check_for(inst)?;
        let uniform = |v: &[f64]| v.windows(2).all(|w| w[0] == w[1]);
        match mode {
            HalfMode::EqualP if !uniform(&demand.p) => {
                return Err(Error::input("equal-p rounding needs identical probabilities"))
            }
            HalfMode::EqualR if !uniform(&demand.r) => {
                return Err(Error::input("equal-r rounding needs identical radii"))
            }
            _ => {}
        }
        let opening = solve_chance_lp(inst, demand)?;
        let family = split_facilities(inst, &opening, &demand.r, &demand.p, SplitMode::PerClient)?;
        let weights: Vec<f64> = match mode {
            HalfMode::EqualP => demand.r.clone(),
            HalfMode::EqualR => demand.p.iter().map(|p| 1.0 - p).collect(),
        };
        let centers = greedy_cluster(&family.clusters, &weights);
        let opens = centers.iter().map(|&z| inst.nearest(z).0).collect();
        let probs = centers.iter().map(|&z| family.mass(z).min(1.0)).collect();
        Ok(HalfHomogeneousRounding {
            centers,
            opens,
            probs,
            k: inst.k(),
        })
    }
}

impl Sampler for HalfHomogeneousRounding {
    fn sample(&self, rng: &mut RandomSource) -> Result<SolutionSet> {
        let y = dep_round(&self.probs, rng)?;
        let s: SolutionSet = y.into_iter().map(|c| self.opens[c]).collect();
        check_size(&s, self.k)?;
        Ok(s)
    }

    fn max_size(&self) -> usize {
        self.k
    }
}

pub fn round_half_homogeneous(
    inst: &Instance,
    demand: &DemandChance,
    mode: HalfMode,
    rng: &mut RandomSource,
) -> Result<SolutionSet> {
    HalfHomogeneousRounding::prepare(inst, demand, mode)?.sample(&mut rng.child("half-homogeneous"))
}

/// One pass of the outer loop of the iterative rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// The slack client whose cluster became integral.
    pub selected: usize,
    /// Whether its cluster reached mass 1 (and it joined the tight set).
    pub tight: bool,
    /// Clients dropped because the selected one covers them.
    pub removed: Vec<usize>,
    /// Number of walk moves taken before the cluster became integral.
    pub moves: usize,
}

/// Opening over facility copies with the tight and slack client sets.
#[derive(Debug, Clone, PartialEq)]
pub struct IterativeState {
    pub b: Vec<f64>,
    pub tight: Vec<usize>,
    pub slack: Vec<usize>,
    pub history: Vec<IterationRecord>,
}

impl IterativeState {
    pub fn initial(family: &ClusterFamily) -> Self {
        IterativeState {
            b: family.copy_masses(),
            tight: Vec::new(),
            slack: (0..family.clusters.len()).collect(),
            history: Vec::new(),
        }
    }

    fn active_union(&self, family: &ClusterFamily) -> Vec<bool> {
        let mut inside = vec![false; self.b.len()];
        for &j in self.tight.iter().chain(&self.slack) {
            for &c in &family.clusters[j] {
                inside[c] = true;
            }
        }
        inside
    }

    fn covered_mass(&self, family: &ClusterFamily) -> f64 {
        self.active_union(family)
            .iter()
            .zip(&self.b)
            .filter(|(&inside, _)| inside)
            .map(|(_, &v)| v)
            .sum()
    }

    /// Least-index slack client whose cluster mass is 0 or 1.
    pub fn integral_slack(&self, family: &ClusterFamily) -> Option<usize> {
        self.slack.iter().copied().filter(|&j| {
            let m = family.mass_under(j, &self.b);
            m <= CLUSTER_TOL || m >= 1.0 - CLUSTER_TOL
        }).min()
    }

    /// Checks the five state invariants: disjoint tight and slack sets,
    /// pairwise disjoint tight clusters, tight clusters of mass 1, slack
    /// clusters of mass at most 1, and covered mass at most `k`.
    pub fn check_invariants(&self, family: &ClusterFamily, k: usize) -> Result<()> {
        if let Some(j) = self.tight.iter().find(|j| self.slack.contains(j)) {
            return Err(Error::invariant(format!("client {j} is both tight and slack")));
        }
        for (a, &x) in self.tight.iter().enumerate() {
            for &y in &self.tight[a + 1..] {
                if family.intersects(x, y) {
                    return Err(Error::invariant(format!("tight clusters {x} and {y} intersect")));
                }
            }
        }
        for &j in &self.tight {
            let m = family.mass_under(j, &self.b);
            if (m - 1.0).abs() > CLUSTER_TOL {
                return Err(Error::invariant(format!("tight client {j} has cluster mass {m}")));
            }
        }
        for &j in &self.slack {
            let m = family.mass_under(j, &self.b);
            if m > 1.0 + CLUSTER_TOL {
                return Err(Error::invariant(format!("slack client {j} has cluster mass {m}")));
            }
        }
        let covered = self.covered_mass(family);
        if covered > k as f64 + CLUSTER_TOL {
            return Err(Error::invariant(format!("covered mass {covered} exceeds k = {k}")));
        }
        if self.b.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::invariant("opening left [0,1]"));
        }
        Ok(())
    }
}

/// Moves `state.b` along unbiased steps in the nullspace of the active
/// constraints until some slack cluster has mass 0 or 1.
///
/// Each step picks a direction `d` that keeps every tight cluster sum and,
/// when it is tight, the covered mass fixed. With `delta_plus` and
/// `delta_minus` the distances to the nearest newly tight constraint, the
/// step is `+delta_plus` with probability
/// `delta_minus / (delta_plus + delta_minus)` and `-delta_minus` otherwise,
/// so `E[b'] = b`. Returns the number of steps taken.
pub fn basic_walk_step(
    state: &IterativeState,
    family: &ClusterFamily,
    k: usize,
    rng: &mut RandomSource,
) -> Result<(IterativeState, usize)> {
    let mut next = state.clone();
    if next.slack.is_empty() {
        return Err(Error::invariant("walk requested with no slack clients"));
    }
    let n = next.b.len();
    let inside = next.active_union(family);
    let kf = k as f64;
    let cap = 4 * (n + family.clusters.len()) + 64;
    let mut moves = 0;
    loop {
        if next.integral_slack(family).is_some() {
            return Ok((next, moves));
        }
        if moves >= cap {
            return Err(Error::invariant("walk failed to make a slack cluster integral"));
        }
        let cols: Vec<usize> = (0..n)
            .filter(|&c| inside[c] && next.b[c] > 0.0 && next.b[c] < 1.0)
            .collect();
        let mut col_of = vec![usize::MAX; n];
        for (x, &c) in cols.iter().enumerate() {
            col_of[c] = x;
        }
        let mut rows = Vec::new();
        for &j in &next.tight {
            let mut row = vec![0.0; cols.len()];
            let mut any = false;
            for &c in &family.clusters[j] {
                if col_of[c] != usize::MAX {
                    row[col_of[c]] = 1.0;
                    any = true;
                }
            }
            if any {
                rows.push(row);
            }
        }
        let covered: f64 = (0..n).filter(|&c| inside[c]).map(|c| next.b[c]).sum();
        let budget_tight = covered >= kf - CLUSTER_TOL;
        if budget_tight {
            rows.push(vec![1.0; cols.len()]);
        }
        let Some(d) = null_vector(rows, cols.len()) else {
            return Err(Error::invariant(
                "no walk direction although no slack cluster is integral",
            ));
        };
        // Largest steps in each direction, and which constraint blocks them.
        let mut plus = f64::INFINITY;
        let mut minus = f64::INFINITY;
        let mut plus_block = None;
        let mut minus_block = None;
        for (x, &c) in cols.iter().enumerate() {
            let (dv, bv) = (d[x], next.b[c]);
            if dv > 0.0 {
                if (1.0 - bv) / dv < plus {
                    plus = (1.0 - bv) / dv;
                    plus_block = Some((c, 1.0));
                }
                if bv / dv < minus {
                    minus = bv / dv;
                    minus_block = Some((c, 0.0));
                }
            } else if dv < 0.0 {
                if bv / -dv < plus {
                    plus = bv / -dv;
                    plus_block = Some((c, 0.0));
                }
                if (1.0 - bv) / -dv < minus {
                    minus = (1.0 - bv) / -dv;
                    minus_block = Some((c, 1.0));
                }
            }
        }
        let mut bound = |s: f64, room_up: f64, room_down: f64| {
            if s > 1e-12 {
                if room_up / s < plus {
                    plus = room_up / s;
                    plus_block = None;
                }
                if room_down / s < minus {
                    minus = room_down / s;
                    minus_block = None;
                }
            } else if s < -1e-12 {
                if room_down / -s < plus {
                    plus = room_down / -s;
                    plus_block = None;
                }
                if room_up / -s < minus {
                    minus = room_up / -s;
                    minus_block = None;
                }
            }
        };
        for &j in &next.slack {
            let s: f64 = family.clusters[j]
                .iter()
                .filter(|&&c| col_of[c] != usize::MAX)
                .map(|&c| d[col_of[c]])
                .sum();
            let m = family.mass_under(j, &next.b);
            bound(s, (1.0 - m).max(0.0), m.max(0.0));
        }
        if !budget_tight {
            let s: f64 = d.iter().sum();
            // Only the upper side of the budget can bind.
            bound(s, (kf - covered).max(0.0), f64::INFINITY);
        }
        if !plus.is_finite() || !minus.is_finite() || plus + minus <= 0.0 {
            return Err(Error::invariant("degenerate walk step"));
        }
        let go_plus = rng.uniform() * (plus + minus) < minus;
        let (step, block) = if go_plus { (plus, plus_block) } else { (-minus, minus_block) };
        for (x, &c) in cols.iter().enumerate() {
            let v = next.b[c] + step * d[x];
            next.b[c] = if v <= COORD_TOL {
                0.0
            } else if v >= 1.0 - COORD_TOL {
                1.0
            } else {
                v
            };
        }
        if let Some((c, val)) = block {
            next.b[c] = val;
        }
        moves += 1;
    }
}

/// Iterative rounding meeting `Pr[d(j,S) <= 9 r_j] >= p_j`.
#[derive(Debug, Clone)]
pub struct IterativeRounding {
    pub family: ClusterFamily,
    pub radii: Vec<f64>,
    k: usize,
}

/// Output of one run of the iterative rounding.
#[derive(Debug, Clone)]
pub struct IterativeOutcome {
    pub set: SolutionSet,
    pub state: IterativeState,
    /// Every client that was tight at some point.
    pub ever_tight: Vec<usize>,
}

impl IterativeRounding {
    pub fn prepare(inst: &Instance, demand: &DemandChance) -> Result<Self> {
        let opening = solve_chance_lp(inst, demand)?;
        let family = split_facilities(inst, &opening, &demand.r, &demand.p, SplitMode::PerClient)?;
        Ok(IterativeRounding {
            family,
            radii: demand.r.clone(),
            k: inst.k(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn run(&self, rng: &mut RandomSource) -> Result<IterativeOutcome> {
        let family = &self.family;
        let mut state = IterativeState::initial(family);
        state.check_invariants(family, self.k)?;
        let mut ever_tight = Vec::new();
        while !state.slack.is_empty() {
            let (mut next, moves) = basic_walk_step(&state, family, self.k, rng)?;
            let v = next
                .integral_slack(family)
                .ok_or_else(|| Error::invariant("walk ended without an integral slack cluster"))?;
            next.slack.retain(|&j| j != v);
            let tight = family.mass_under(v, &next.b) >= 1.0 - CLUSTER_TOL;
            let mut removed = Vec::new();
            if tight {
                next.tight.push(v);
                ever_tight.push(v);
                let rv = self.radii[v];
                let covers = |z: usize| z != v && self.radii[z] >= rv / 2.0 && family.intersects(z, v);
                removed.extend(next.tight.iter().copied().filter(|&z| covers(z)));
                removed.extend(next.slack.iter().copied().filter(|&z| covers(z)));
                next.tight.retain(|z| !removed.contains(z));
                next.slack.retain(|z| !removed.contains(z));
                removed.sort_unstable();
            }
            next.history.push(IterationRecord {
                selected: v,
                tight,
                removed,
                moves,
            });
            next.check_invariants(family, self.k)?;
            state = next;
        }
        let mut set = SolutionSet::new();
        for &j in &state.tight {
            let best = family.clusters[j]
                .iter()
                .copied()
                .fold(None::<usize>, |acc, c| match acc {
                    Some(a) if state.b[a] >= state.b[c] => Some(a),
                    _ => Some(c),
                })
                .ok_or_else(|| Error::invariant(format!("tight client {j} has an empty cluster")))?;
            set.insert(family.original(best));
        }
        check_size(&set, self.k)?;
        ever_tight.sort_unstable();
        ever_tight.dedup();
        Ok(IterativeOutcome {
            set,
            state,
            ever_tight,
        })
    }
}

impl Sampler for IterativeRounding {
    fn sample(&self, rng: &mut RandomSource) -> Result<SolutionSet> {
        self.run(rng).map(|o| o.set)
    }

    fn max_size(&self) -> usize {
        self.k
    }
}

pub fn round_iterative_general(inst: &Instance, demand: &DemandChance, rng: &mut RandomSource) -> Result<SolutionSet> {
    IterativeRounding::prepare(inst, demand)?.sample(&mut rng.child("iterative"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::FacilityCopy;

    fn uniform_scc(n: usize, k: usize) -> Instance {
        let mut d = vec![1.0; n * n];
        for i in 0..n {
            d[i * n + i] = 0.0;
        }
        Instance::scc_from_matrix(n, d, k).unwrap()
    }

    #[test]
    fn faithful_respects_budget() {
        let inst = uniform_scc(4, 3);
        let dem = DemandChance::homogeneous(4, 0.75, 0.0).unwrap();
        let r = FaithfulRounding::prepare(&inst, &dem).unwrap();
        let mut rng = RandomSource::new(1);
        for _ in 0..1000 {
            assert!(r.sample(&mut rng).unwrap().len() <= 3);
        }
    }

    #[test]
    fn half_homogeneous_mode_checks() {
        let inst = uniform_scc(3, 1);
        let dem = DemandChance::new(vec![0.2, 0.3, 0.3], vec![1.0; 3]).unwrap();
        assert!(HalfHomogeneousRounding::prepare(&inst, &dem, HalfMode::EqualP).is_err());
        assert!(HalfHomogeneousRounding::prepare(&inst, &dem, HalfMode::EqualR).is_ok());
    }

    #[test]
    fn certain_demand_is_deterministic() {
        let inst = Instance::euclidean_scc((0..6).map(|i| vec![(i / 2) as f64 * 10.0 + (i % 2) as f64]).collect(), 3)
            .unwrap();
        let dem = DemandChance::homogeneous(6, 1.0, 1.0).unwrap();
        let it = IterativeRounding::prepare(&inst, &dem).unwrap();
        let hh = HalfHomogeneousRounding::prepare(&inst, &dem, HalfMode::EqualP).unwrap();
        let mut rng = RandomSource::new(5);
        for _ in 0..50 {
            for s in [it.sample(&mut rng).unwrap(), hh.sample(&mut rng).unwrap()] {
                for j in 0..6 {
                    assert!(inst.service_distance(j, &s).unwrap() <= 3.0);
                }
            }
        }
    }

    fn two_client_family() -> ClusterFamily {
        // copies 0,1,2 with masses .4 .4 .2; clusters {0,1} and {1,2}
        ClusterFamily {
            copies: vec![
                FacilityCopy { original: 0, mass: 0.4 },
                FacilityCopy { original: 1, mass: 0.4 },
                FacilityCopy { original: 2, mass: 0.2 },
            ],
            clusters: vec![vec![0, 1], vec![1, 2]],
            n_facilities: 3,
        }
    }

    #[test]
    fn walk_is_unbiased_on_cluster_sums() {
        let fam = two_client_family();
        let state = IterativeState::initial(&fam);
        let mut rng = RandomSource::new(11);
        let n = 100_000;
        let mut sums = [0.0; 2];
        for _ in 0..n {
            let (next, _) = basic_walk_step(&state, &fam, 1, &mut rng).unwrap();
            next.check_invariants(&fam, 1).unwrap();
            assert!(next.integral_slack(&fam).is_some());
            for (j, s) in sums.iter_mut().enumerate() {
                *s += fam.mass_under(j, &next.b);
            }
        }
        assert!((sums[0] / n as f64 - 0.8).abs() < 0.01);
        assert!((sums[1] / n as f64 - 0.6).abs() < 0.01);
    }

    #[test]
    fn walk_leaves_integral_state_alone() {
        let mut fam = two_client_family();
        fam.copies[0].mass = 0.6;
        let state = IterativeState::initial(&fam);
        let (next, moves) = basic_walk_step(&state, &fam, 1, &mut RandomSource::new(0)).unwrap();
        assert_eq!(moves, 0);
        assert_eq!(next, state);
    }

    #[test]
    fn single_client_opens_with_its_probability() {
        let inst = Instance::euclidean(vec![vec![0.0], vec![1.0], vec![9.0]], vec![vec![0.5]], 1).unwrap();
        let dem = DemandChance::new(vec![0.3], vec![1.0]).unwrap();
        let it = IterativeRounding::prepare(&inst, &dem).unwrap();
        let mut rng = RandomSource::new(3);
        let n = 20_000;
        let mut hit = 0;
        for _ in 0..n {
            let s = it.sample(&mut rng).unwrap();
            if !s.is_empty() && inst.service_distance(0, &s).unwrap() <= 1.0 {
                hit += 1;
            }
        }
        assert!((hit as f64 / n as f64 - 0.3).abs() < 0.015);
    }
}
