//! Problem instances, demands and metric queries.
//!
//! Facilities and clients are addressed by dense indices (`0..n_facilities`,
//! `0..n_clients`). External ids are kept only for I/O. In the SCC setting
//! the two lists coincide, so client `j` and facility `j` are the same point.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this many points the euclidean metric is evaluated on demand
/// instead of being cached as a dense facility-client matrix.
pub const DENSE_POINT_LIMIT: usize = 4096;

/// Tolerance used when validating metric axioms. Algorithms compare stored
/// distances exactly.
pub const METRIC_TOLERANCE: f64 = 1e-9;

/// External identifier of a facility or client.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Id {
    Num(u64),
    Name(String),
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Id::Num(n) => write!(f, "{n}"),
            Id::Name(s) => f.write_str(s),
        }
    }
}

impl From<usize> for Id {
    fn from(v: usize) -> Self {
        Id::Num(v as u64)
    }
}

/// Distances between the underlying points.
#[derive(Debug, Clone)]
pub enum Metric {
    /// Row-major `n x n` matrix.
    Matrix { n: usize, d: Vec<f64> },
    Euclidean { points: Vec<Vec<f64>> },
}

impl Metric {
    pub fn num_points(&self) -> usize {
        match self {
            Metric::Matrix { n, .. } => *n,
            Metric::Euclidean { points } => points.len(),
        }
    }

    pub fn dist(&self, a: usize, b: usize) -> f64 {
        match self {
            Metric::Matrix { n, d } => d[a * n + b],
            Metric::Euclidean { points } => euclid(&points[a], &points[b]),
        }
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A clustering instance: facilities, clients, a metric and the budget `k`.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct Instance {
    facility_ids: Vec<Id>,
    client_ids: Vec<Id>,
    facility_points: Vec<usize>,
    client_points: Vec<usize>,
    metric: Metric,
    k: usize,
    scc: bool,
    /// Client-major cache: `fc[j * n_facilities + i] = d(i, j)`.
    fc: Option<Vec<f64>>,
}

impl Instance {
    /// Builds an instance over an explicit point matrix. `facilities` and
    /// `clients` index into the matrix rows.
    pub fn from_matrix(
        n: usize,
        d: Vec<f64>,
        facilities: Vec<usize>,
        clients: Vec<usize>,
        k: usize,
        scc: bool,
    ) -> Result<Self> {
        if d.len() != n * n {
            return Err(Error::input(format!(
                "distance matrix has {} entries, expected {}",
                d.len(),
                n * n
            )));
        }
        let facility_ids = facilities.iter().map(|&p| Id::from(p)).collect();
        let client_ids = clients.iter().map(|&p| Id::from(p)).collect();
        Self::assemble(
            Metric::Matrix { n, d },
            facilities,
            clients,
            facility_ids,
            client_ids,
            k,
            scc,
        )
    }

    /// SCC instance on a square matrix: every point is both client and facility.
    pub fn scc_from_matrix(n: usize, d: Vec<f64>, k: usize) -> Result<Self> {
        let all: Vec<usize> = (0..n).collect();
        Self::from_matrix(n, d, all.clone(), all, k, true)
    }

    /// Euclidean instance with separate facility and client locations.
    pub fn euclidean(facilities: Vec<Vec<f64>>, clients: Vec<Vec<f64>>, k: usize) -> Result<Self> {
        let nf = facilities.len();
        let nc = clients.len();
        let mut points = facilities;
        points.extend(clients);
        let fp: Vec<usize> = (0..nf).collect();
        let cp: Vec<usize> = (nf..nf + nc).collect();
        let fids = (0..nf).map(Id::from).collect();
        let cids = (0..nc).map(Id::from).collect();
        Self::assemble(Metric::Euclidean { points }, fp, cp, fids, cids, k, false)
    }

    /// Euclidean SCC instance.
    pub fn euclidean_scc(points: Vec<Vec<f64>>, k: usize) -> Result<Self> {
        let n = points.len();
        let all: Vec<usize> = (0..n).collect();
        let ids: Vec<Id> = (0..n).map(Id::from).collect();
        Self::assemble(
            Metric::Euclidean { points },
            all.clone(),
            all,
            ids.clone(),
            ids,
            k,
            true,
        )
    }

    pub(crate) fn assemble(
        metric: Metric,
        facility_points: Vec<usize>,
        client_points: Vec<usize>,
        facility_ids: Vec<Id>,
        client_ids: Vec<Id>,
        k: usize,
        scc: bool,
    ) -> Result<Self> {
        let np = metric.num_points();
        if facility_points.is_empty() {
            return Err(Error::input("instance has no facilities"));
        }
        if client_points.is_empty() {
            return Err(Error::input("instance has no clients"));
        }
        if let Some(&p) = facility_points.iter().chain(&client_points).find(|&&p| p >= np) {
            return Err(Error::input(format!("point index {p} out of range ({np} points)")));
        }
        if k == 0 || k > facility_points.len() {
            return Err(Error::input(format!(
                "k = {k} must satisfy 1 <= k <= |F| = {}",
                facility_points.len()
            )));
        }
        if scc && facility_points != client_points {
            return Err(Error::input(
                "scc instance requires identical, identically ordered client and facility lists",
            ));
        }
        if let Metric::Euclidean { points } = &metric {
            let dim = points.first().map_or(0, Vec::len);
            if points.iter().any(|p| p.len() != dim) {
                return Err(Error::input("euclidean points have inconsistent dimensions"));
            }
            if points.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::input("euclidean coordinates must be finite"));
            }
        }
        let mut inst = Instance {
            facility_ids,
            client_ids,
            facility_points,
            client_points,
            metric,
            k,
            scc,
            fc: None,
        };
        let dense = matches!(inst.metric, Metric::Matrix { .. }) || np <= DENSE_POINT_LIMIT;
        if dense {
            let nf = inst.n_facilities();
            let mut fc = Vec::with_capacity(nf * inst.n_clients());
            for &cp in &inst.client_points {
                for &fp in &inst.facility_points {
                    fc.push(inst.metric.dist(fp, cp));
                }
            }
            inst.fc = Some(fc);
        }
        Ok(inst)
    }

    pub fn with_ids(mut self, facility_ids: Vec<Id>, client_ids: Vec<Id>) -> Result<Self> {
        if facility_ids.len() != self.n_facilities() || client_ids.len() != self.n_clients() {
            return Err(Error::input("id list lengths do not match instance"));
        }
        self.facility_ids = facility_ids;
        self.client_ids = client_ids;
        Ok(self)
    }

    /// Same points and metric with a different budget.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.n_facilities() {
            return Err(Error::input(format!("k = {k} out of range")));
        }
        let mut out = self.clone();
        out.k = k;
        Ok(out)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_scc(&self) -> bool {
        self.scc
    }

    pub fn n_facilities(&self) -> usize {
        self.facility_points.len()
    }

    pub fn n_clients(&self) -> usize {
        self.client_points.len()
    }

    pub fn facility_ids(&self) -> &[Id] {
        &self.facility_ids
    }

    pub fn client_ids(&self) -> &[Id] {
        &self.client_ids
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn facility_points(&self) -> &[usize] {
        &self.facility_points
    }

    pub fn client_points(&self) -> &[usize] {
        &self.client_points
    }

    /// Distance between facility `i` and client `j`.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.fc {
            Some(fc) => fc[j * self.facility_points.len() + i],
            None => self
                .metric
                .dist(self.facility_points[i], self.client_points[j]),
        }
    }

    /// Distances from client `j` to every facility, in facility order.
    pub fn client_row(&self, j: usize) -> Vec<f64> {
        match &self.fc {
            Some(fc) => {
                let nf = self.n_facilities();
                fc[j * nf..(j + 1) * nf].to_vec()
            }
            None => (0..self.n_facilities()).map(|i| self.dist(i, j)).collect(),
        }
    }

    pub fn facility_facility(&self, a: usize, b: usize) -> f64 {
        self.metric
            .dist(self.facility_points[a], self.facility_points[b])
    }

    pub fn client_client(&self, a: usize, b: usize) -> f64 {
        self.metric.dist(self.client_points[a], self.client_points[b])
    }

    /// Facility index of client `j` in the SCC setting.
    pub fn scc_facility(&self, j: usize) -> Option<usize> {
        self.scc.then_some(j)
    }

    fn check_client(&self, j: usize) -> Result<()> {
        if j >= self.n_clients() {
            return Err(Error::input(format!(
                "unknown client {j} (instance has {})",
                self.n_clients()
            )));
        }
        Ok(())
    }

    /// Facilities `i` with `d(i, j) <= r`, in index order.
    pub fn ball(&self, j: usize, r: f64) -> Result<Vec<usize>> {
        self.check_client(j)?;
        if r.is_nan() || r < 0.0 {
            return Err(Error::input(format!("negative radius {r}")));
        }
        Ok((0..self.n_facilities())
            .filter(|&i| self.dist(i, j) <= r)
            .collect())
    }

    /// Closest facility `V_j` and its distance `theta(j)`; least index on ties.
    pub fn nearest(&self, j: usize) -> (usize, f64) {
        if self.scc {
            return (j, 0.0);
        }
        let mut best = (0, self.dist(0, j));
        for i in 1..self.n_facilities() {
            let d = self.dist(i, j);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    pub fn theta(&self, j: usize) -> f64 {
        self.nearest(j).1
    }

    /// `(V_j, theta(j))` for every client.
    pub fn nearest_all(&self) -> Vec<(usize, f64)> {
        (0..self.n_clients()).map(|j| self.nearest(j)).collect()
    }

    /// The facility of `s` that client `j` is matched to, with its distance.
    pub fn matched(&self, j: usize, s: &SolutionSet) -> Result<(usize, f64)> {
        self.check_client(j)?;
        let mut it = s.iter();
        let first = it.next().ok_or_else(|| Error::input("empty solution set"))?;
        let mut best = (first, self.dist(first, j));
        for i in it {
            let d = self.dist(i, j);
            if d < best.1 {
                best = (i, d);
            }
        }
        Ok(best)
    }

    /// `d(j, S)`.
    pub fn service_distance(&self, j: usize, s: &SolutionSet) -> Result<f64> {
        self.matched(j, s).map(|(_, d)| d)
    }

    /// `d(j, S)` for every client; `S` must be nonempty.
    pub fn service_distances(&self, s: &SolutionSet) -> Result<Vec<f64>> {
        if s.is_empty() {
            return Err(Error::input("empty solution set"));
        }
        Ok((0..self.n_clients())
            .map(|j| {
                s.iter()
                    .map(|i| self.dist(i, j))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect())
    }

    /// Checks nonnegativity, zero self-distance and symmetry; with
    /// `triangle`, also every triangle inequality over the points in use.
    pub fn validate(&self, triangle: bool) -> Result<()> {
        let Metric::Matrix { n, d } = &self.metric else {
            return Ok(());
        };
        let n = *n;
        for a in 0..n {
            if d[a * n + a].abs() > METRIC_TOLERANCE {
                return Err(Error::input(format!("d({a},{a}) = {} != 0", d[a * n + a])));
            }
            for b in 0..n {
                let x = d[a * n + b];
                if !x.is_finite() || x < 0.0 {
                    return Err(Error::input(format!("d({a},{b}) = {x} is not a finite nonnegative value")));
                }
                if (x - d[b * n + a]).abs() > METRIC_TOLERANCE {
                    return Err(Error::input(format!("asymmetric distance between {a} and {b}")));
                }
            }
        }
        if triangle {
            for a in 0..n {
                for b in 0..n {
                    let ab = d[a * n + b];
                    for c in 0..n {
                        if d[a * n + c] > ab + d[b * n + c] + METRIC_TOLERANCE {
                            return Err(Error::input(format!(
                                "triangle inequality fails for points ({a}, {b}, {c})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn max_distance(&self) -> f64 {
        (0..self.n_clients())
            .flat_map(|j| (0..self.n_facilities()).map(move |i| (i, j)))
            .map(|(i, j)| self.dist(i, j))
            .fold(0.0, f64::max)
    }
}

/// Chance demand: client `j` wants `Pr[d(j,S) <= r_j] >= p_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandChance {
    pub p: Vec<f64>,
    pub r: Vec<f64>,
}

impl DemandChance {
    pub fn new(p: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        if p.len() != r.len() {
            return Err(Error::input("p and r have different lengths"));
        }
        if let Some((j, x)) = p.iter().enumerate().find(|(_, &x)| !(0.0..=1.0).contains(&x)) {
            return Err(Error::input(format!("p[{j}] = {x} outside [0,1]")));
        }
        if let Some((j, x)) = r.iter().enumerate().find(|(_, &x)| x.is_nan() || x < 0.0 || x.is_infinite()) {
            return Err(Error::input(format!("r[{j}] = {x} is not a finite nonnegative radius")));
        }
        Ok(DemandChance { p, r })
    }

    /// `p_j = 1` for every client, radii `r`.
    pub fn certain(r: Vec<f64>) -> Result<Self> {
        Self::new(vec![1.0; r.len()], r)
    }

    pub fn homogeneous(n: usize, p: f64, r: f64) -> Result<Self> {
        Self::new(vec![p; n], vec![r; n])
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn check_for(&self, inst: &Instance) -> Result<()> {
        if self.len() != inst.n_clients() {
            return Err(Error::input(format!(
                "demand has {} entries for {} clients",
                self.len(),
                inst.n_clients()
            )));
        }
        Ok(())
    }
}

/// Expected-distance demand: client `j` wants `E[d(j,S)] <= t_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandExpected {
    pub t: Vec<f64>,
}

impl DemandExpected {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if let Some((j, x)) = t.iter().enumerate().find(|(_, &x)| x.is_nan() || x < 0.0 || x.is_infinite()) {
            return Err(Error::input(format!("t[{j}] = {x} is not a finite nonnegative target")));
        }
        Ok(DemandExpected { t })
    }

    pub fn check_for(&self, inst: &Instance) -> Result<()> {
        if self.t.len() != inst.n_clients() {
            return Err(Error::input(format!(
                "demand has {} entries for {} clients",
                self.t.len(),
                inst.n_clients()
            )));
        }
        for (j, &t) in self.t.iter().enumerate() {
            let theta = inst.theta(j);
            if t < theta {
                log::warn!("client {j}: target {t} below nearest-facility distance {theta}; demand infeasible");
            }
        }
        Ok(())
    }
}

/// A set of open facilities, kept sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
#[serde(transparent)]
pub struct SolutionSet(Vec<usize>);

impl SolutionSet {
    pub fn new() -> Self {
        SolutionSet(Vec::new())
    }

    pub fn insert(&mut self, i: usize) -> bool {
        match self.0.binary_search(&i) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, i);
                true
            }
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_subset(&self, other: &SolutionSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }
}

impl FromIterator<usize> for SolutionSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        SolutionSet(v)
    }
}

impl From<Vec<usize>> for SolutionSet {
    fn from(v: Vec<usize>) -> Self {
        v.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(dists: &[f64]) -> Instance {
        // one client at the origin, facilities at the given positions on a line
        let fac: Vec<Vec<f64>> = dists.iter().map(|&x| vec![x]).collect();
        Instance::euclidean(fac, vec![vec![0.0]], 1).unwrap()
    }

    fn uniform_scc(n: usize, k: usize) -> Instance {
        let d = (0..n * n)
            .map(|x| if x / n == x % n { 0.0 } else { 1.0 })
            .collect();
        Instance::scc_from_matrix(n, d, k).unwrap()
    }

    #[test]
    fn ball_uniform_metric() {
        let scc = uniform_scc(4, 2);
        assert_eq!(scc.ball(2, 0.5).unwrap(), vec![2]);
        assert_eq!(scc.ball(2, 1.0).unwrap(), vec![0, 1, 2, 3]);

        let mut d = vec![0.0; 16];
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    d[a * 4 + b] = 1.0;
                }
            }
        }
        let split = Instance::from_matrix(4, d, vec![0, 1], vec![2, 3], 1, false).unwrap();
        assert!(split.ball(0, 0.5).unwrap().is_empty());
    }

    #[test]
    fn ball_direct_comparison() {
        let inst = line(&[1.0, 2.0, 3.0]);
        assert_eq!(inst.ball(0, 2.0).unwrap(), vec![0, 1]);
        assert_eq!(inst.ball(0, inst.max_distance()).unwrap(), vec![0, 1, 2]);
        assert!(inst.ball(1, 1.0).is_err());
        assert!(inst.ball(0, -1.0).is_err());
    }

    #[test]
    fn nearest_tie_breaks_by_index() {
        let inst = line(&[2.0, 1.0, -1.0]);
        assert_eq!(inst.nearest(0), (1, 1.0));
        assert_eq!(line(&[5.0]).nearest(0), (0, 5.0));
        let scc = uniform_scc(3, 1);
        assert_eq!(scc.nearest(2), (2, 0.0));
    }

    #[test]
    fn service_distance_basics() {
        let inst = line(&[4.0, 3.0, 7.0]);
        let all: SolutionSet = (0..3).collect();
        assert_eq!(inst.service_distance(0, &all).unwrap(), inst.theta(0));
        assert_eq!(inst.service_distance(0, &SolutionSet::from(vec![2])).unwrap(), 7.0);
        assert_eq!(inst.service_distance(0, &SolutionSet::from(vec![0, 1])).unwrap(), 3.0);
        assert!(inst.service_distance(0, &SolutionSet::new()).is_err());
        let (i, _) = line(&[3.0, -3.0]).matched(0, &SolutionSet::from(vec![0, 1])).unwrap();
        assert_eq!(i, 0);
    }

    #[test]
    fn validation_rejects_bad_metrics() {
        // asymmetric
        let bad = Instance::scc_from_matrix(2, vec![0.0, 1.0, 2.0, 0.0], 1).unwrap();
        assert!(bad.validate(false).is_err());
        // triangle violation: d(0,2) = 5 > d(0,1) + d(1,2) = 2
        let d = vec![0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0];
        let tri = Instance::scc_from_matrix(3, d, 1).unwrap();
        assert!(tri.validate(false).is_ok());
        assert!(tri.validate(true).is_err());
        assert!(uniform_scc(5, 2).validate(true).is_ok());
        assert!(Instance::scc_from_matrix(2, vec![0.0; 4], 3).is_err());
    }

    #[test]
    fn demand_validation() {
        assert!(DemandChance::new(vec![1.2], vec![1.0]).is_err());
        assert!(DemandChance::new(vec![0.5], vec![-1.0]).is_err());
        assert!(DemandExpected::new(vec![f64::NAN]).is_err());
        assert!(DemandChance::homogeneous(3, 0.5, 1.0).is_ok());
    }

    #[test]
    fn solution_set_is_sorted_and_deduped() {
        let s: SolutionSet = vec![3, 1, 3, 2].into();
        assert_eq!(s.as_slice(), &[1, 2, 3]);
        let mut t = SolutionSet::new();
        assert!(t.insert(5));
        assert!(!t.insert(5));
        assert!(t.is_subset(&vec![5, 6].into()));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_euclid() -> impl Strategy<Value = Instance> {
            (
                prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 2), 1..8),
                prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 2), 1..6),
            )
                .prop_map(|(f, c)| Instance::euclidean(f, c, 1).unwrap())
        }

        proptest! {
            #[test]
            fn superset_never_farther(inst in small_euclid(), mask in any::<u32>(), extra in any::<u32>()) {
                let nf = inst.n_facilities();
                let s: SolutionSet = (0..nf).filter(|i| mask >> i & 1 == 1).collect();
                prop_assume!(!s.is_empty());
                let bigger: SolutionSet = s.iter().chain((0..nf).filter(|i| extra >> i & 1 == 1)).collect();
                for j in 0..inst.n_clients() {
                    prop_assert!(inst.service_distance(j, &bigger).unwrap() <= inst.service_distance(j, &s).unwrap());
                }
            }

            #[test]
            fn ball_is_monotone(inst in small_euclid(), r in 0.0..10.0f64, dr in 0.0..5.0f64) {
                for j in 0..inst.n_clients() {
                    let small = inst.ball(j, r).unwrap();
                    let big = inst.ball(j, r + dr).unwrap();
                    prop_assert!(small.iter().all(|i| big.contains(i)));
                }
            }

            #[test]
            fn full_set_gives_theta(inst in small_euclid()) {
                let all: SolutionSet = (0..inst.n_facilities()).collect();
                for j in 0..inst.n_clients() {
                    prop_assert_eq!(inst.service_distance(j, &all).unwrap(), inst.theta(j));
                }
            }
        }
    }
}
