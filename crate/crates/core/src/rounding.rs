//! Dependent rounding, greedy clustering and the seeded random source they
//! share.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::SolutionSet;

/// Coordinates within this distance of 0 or 1 are snapped.
pub const INTEGRALITY_EPS: f64 = 1e-12;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Seeded, splittable random stream.
///
/// Child streams depend only on the parent seed and the label, never on how
/// much of the parent stream has been consumed.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn child(&self, label: &str) -> RandomSource {
        RandomSource::new(splitmix64(self.seed ^ splitmix64(fnv1a(label))))
    }

    pub fn child_index(&self, index: u64) -> RandomSource {
        RandomSource::new(splitmix64(splitmix64(self.seed).wrapping_add(index)))
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

#[inline]
fn snap(x: f64) -> f64 {
    if x <= INTEGRALITY_EPS {
        0.0
    } else if x >= 1.0 - INTEGRALITY_EPS {
        1.0
    } else {
        x
    }
}

#[inline]
fn is_fractional(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

fn check_unit_vector(y: &[f64]) -> Result<()> {
    match y
        .iter()
        .enumerate()
        .find(|(_, &v)| v.is_nan() || v < -INTEGRALITY_EPS || v > 1.0 + INTEGRALITY_EPS)
    {
        Some((i, v)) => Err(Error::input(format!("dep_round: y[{i}] = {v} outside [0,1]"))),
        None => Ok(()),
    }
}

/// Dependent rounding of `y` in `[0,1]^n`.
///
/// Returns the selected indices in increasing order. Each index is kept
/// with probability `y_i`, the size is `floor(sum y)` or `ceil(sum y)`,
/// and every set is missed with probability at most `prod (1 - y_i)`.
pub fn dep_round(y: &[f64], rng: &mut RandomSource) -> Result<Vec<usize>> {
    check_unit_vector(y)?;
    let mut v: Vec<f64> = y.iter().map(|&x| snap(x)).collect();
    dep_round_in_place(&mut v, rng);
    Ok(v
        .iter()
        .enumerate()
        .filter(|(_, &x)| x == 1.0)
        .map(|(i, _)| i)
        .collect())
}

/// Pairwise rounding on a snapped vector; leaves every entry in `{0, 1}`.
pub(crate) fn dep_round_in_place(v: &mut [f64], rng: &mut RandomSource) {
    let mut pending: Option<usize> = None;
    for j in 0..v.len() {
        if !is_fractional(v[j]) {
            continue;
        }
        let Some(i) = pending else {
            pending = Some(j);
            continue;
        };
        let (yi, yj) = (v[i], v[j]);
        let up = (1.0 - yi).min(yj);
        let down = yi.min(1.0 - yj);
        if rng.uniform() * (up + down) < down {
            v[i] = snap(yi + up);
            v[j] = snap(yj - up);
        } else {
            v[i] = snap(yi - down);
            v[j] = snap(yj + down);
        }
        pending = if is_fractional(v[i]) {
            Some(i)
        } else if is_fractional(v[j]) {
            Some(j)
        } else {
            None
        };
    }
    if let Some(i) = pending {
        v[i] = if rng.bernoulli(v[i]) { 1.0 } else { 0.0 };
    }
}

/// `dep_round` applied to `y` zeroed outside `subset`; the result lies in
/// `subset`.
pub fn dep_round_restricted(y: &[f64], subset: &[usize], rng: &mut RandomSource) -> Result<Vec<usize>> {
    let mut x = vec![0.0; y.len()];
    for &i in subset {
        if i >= y.len() {
            return Err(Error::input(format!("dep_round_restricted: index {i} out of range")));
        }
        x[i] = y[i];
    }
    dep_round(&x, rng)
}

/// A randomized procedure producing one solution set per call.
pub trait Sampler: Sync {
    /// Draws one set using only `rng` for randomness.
    fn sample(&self, rng: &mut RandomSource) -> Result<SolutionSet>;

    /// Largest set size the procedure may return.
    fn max_size(&self) -> usize;
}

/// Greedy cluster selection.
///
/// Clients are scanned by increasing weight (ties by index) and kept when
/// their set is disjoint from every set kept so far. Sets hold small
/// integer ids (facility copies). Clients with empty sets are skipped.
pub fn greedy_cluster(sets: &[Vec<usize>], weights: &[f64]) -> Vec<usize> {
    assert_eq!(sets.len(), weights.len(), "greedy_cluster: one weight per set");
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b)));
    let universe = sets.iter().flatten().copied().max().map_or(0, |m| m + 1);
    let mut used = vec![false; universe];
    let mut chosen = Vec::new();
    for j in order {
        let set = &sets[j];
        if set.is_empty() || set.iter().any(|&c| used[c]) {
            continue;
        }
        for &c in set {
            used[c] = true;
        }
        chosen.push(j);
    }
    chosen
}
