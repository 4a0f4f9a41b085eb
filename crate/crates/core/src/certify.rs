//! Numerical upper bounds on the worst-case expected distance of the
//! shifted cluster lotteries.
//!
//! The partial-cluster bound maximizes `E_Q R̂(m, u_1, ..., u_L)` over
//! `m <= M` and nonincreasing `u in [0,1]^L`. The cube is cut into cells of
//! width `eps`; on each cell every factor of `R̂` is monotone in each
//! coordinate, so evaluating it at the worst cell endpoint gives an upper
//! bound valid on the whole cell. A dynamic program over `u_L, u_{L-1}, ...`
//! keeps, per last cell, only the Pareto-maximal vectors of accumulated
//! products.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lottery::QDistribution;

/// Added to every certified value to absorb floating-point rounding.
pub const FLOAT_SLACK: f64 = 1e-10;
/// Largest frontier (summed over cells) the dynamic program may hold.
pub const FRONTIER_CAP: usize = 100_000_000;
/// Largest integer `t` evaluated exactly in the SCC bound.
pub const SCC_T_MAX: usize = 64;

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::input(format!("{name} = {v} outside [0,1]")))
    }
}

/// Upper bound on `(1 - u_L + (1-q_p) u_{L+1}) e^{-u_{L+1}}` over
/// `u_{L+1} in [0, u_L]`.
fn tail_beta(u_last: f64, q_p: f64) -> f64 {
    if u_last <= q_p {
        1.0 - u_last
    } else {
        (-(u_last - q_p) / (1.0 - q_p)).exp() * (1.0 - q_p)
    }
}

/// The two `m`-dependent coefficients multiplying the alpha and beta
/// products.
fn coefficients(m: usize, big_m: usize, u1: f64, q_f: f64) -> (f64, f64) {
    let qb = 1.0 - q_f;
    let ub = 1.0 - u1;
    if m < big_m {
        let mf = m as f64;
        let e = m as i32;
        ((1.0 - qb * ub / mf).powi(e), (qb * (1.0 - ub / mf)).powi(e))
    } else {
        ((-qb * ub).exp(), qb.powi(big_m as i32) * (-ub).exp())
    }
}

/// `R̂(m, u)` for one shift pair `(q_f, q_p)`, with `M = big_m`.
pub fn rhat(m: usize, big_m: usize, u: &[f64], q_f: f64, q_p: f64) -> Result<f64> {
    if m == 0 || m > big_m {
        return Err(Error::input(format!("m = {m} outside 1..={big_m}")));
    }
    if u.is_empty() {
        return Err(Error::input("u must be nonempty"));
    }
    check_unit("q_f", q_f)?;
    check_unit("q_p", q_p)?;
    for (l, &x) in u.iter().enumerate() {
        check_unit(&format!("u[{l}]"), x)?;
        if l > 0 && x > u[l - 1] {
            return Err(Error::input(format!("u is not nonincreasing at position {l}")));
        }
    }
    let qb = 1.0 - q_p;
    let last = u[u.len() - 1];
    let mut alpha = (-qb * last).exp();
    let mut beta = tail_beta(last, q_p);
    for w in u.windows(2) {
        alpha *= 1.0 - qb * (w[0] - w[1]);
        beta *= 1.0 - w[0] + qb * w[1];
    }
    let (a, b) = coefficients(m, big_m, u[0], q_f);
    Ok(a * alpha + b * beta)
}

/// `E_Q R̂(m, u)`.
pub fn expected_rhat(m: usize, big_m: usize, u: &[f64], qdist: &QDistribution) -> Result<f64> {
    qdist.validate()?;
    qdist
        .atoms
        .iter()
        .map(|a| Ok(a.prob * rhat(m, big_m, u, a.q_f, a.q_p)?))
        .sum()
}

/// Parameters of the partial-cluster certification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialParams {
    /// Number of tracked coordinates `L`.
    pub levels: usize,
    /// Truncation `M` of the cluster multiplicity.
    pub m_max: usize,
    /// The grid width is `2^-eps_log2`.
    pub eps_log2: u32,
    pub qdist: QDistribution,
    /// Optimize the probability of the first of two atoms.
    pub sweep_p: bool,
    /// Disable Pareto pruning (for cross-checking only).
    #[serde(default = "default_true")]
    pub prune: bool,
}

fn default_true() -> bool {
    true
}

impl PartialParams {
    pub fn new(levels: usize, m_max: usize, eps_log2: u32, qdist: QDistribution) -> Self {
        PartialParams {
            levels,
            m_max,
            eps_log2,
            qdist,
            sweep_p: false,
            prune: true,
        }
    }

    pub fn eps(&self) -> f64 {
        (-(self.eps_log2 as f64)).exp2()
    }
}

/// Result of a certification run.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCertificate {
    pub mode: String,
    pub params: PartialParams,
    pub eps_grid: f64,
    /// Probability given to the first atom (differs from the input only
    /// under `sweep_p`).
    pub p_first_atom: f64,
    /// Upper bound on `max E_Q R̂`, before adding 1 and the slack.
    pub max_expected_rhat: f64,
    pub slack: f64,
    /// Certified bound on `E[d(j,S)] / r_j`.
    pub bound: f64,
    pub argmax_m: usize,
    /// Cell index of `u_1` at the maximizer.
    pub argmax_u1_cell: usize,
    pub peak_tuples: usize,
    pub final_tuples: usize,
    pub wall_seconds: f64,
}

/// Which accumulated product a channel holds for a given `q_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Channel {
    Alpha(f64),
    Beta(f64),
}

/// Channel layout: for `q_p = 0` the alpha and beta products coincide, so
/// one channel serves both.
struct Layout {
    channels: Vec<Channel>,
    /// `(alpha channel, beta channel)` per atom.
    atoms: Vec<(usize, usize)>,
}

impl Layout {
    fn new(qdist: &QDistribution) -> Result<Layout> {
        let mut channels = Vec::new();
        let mut atoms = Vec::new();
        let find = |c: Channel, channels: &mut Vec<Channel>| {
            channels.iter().position(|&x| x == c).unwrap_or_else(|| {
                channels.push(c);
                channels.len() - 1
            })
        };
        for a in &qdist.atoms {
            if a.q_p == 0.0 {
                let c = find(Channel::Alpha(0.0), &mut channels);
                atoms.push((c, c));
            } else {
                let ca = find(Channel::Alpha(a.q_p), &mut channels);
                let cb = find(Channel::Beta(a.q_p), &mut channels);
                atoms.push((ca, cb));
            }
        }
        if channels.len() > 3 {
            return Err(Error::input(format!(
                "Q distribution needs {} product channels; at most 3 are supported",
                channels.len()
            )));
        }
        Ok(Layout { channels, atoms })
    }
}

type Tuple = [f64; 3];

/// Upper bound of the last-coordinate factor of a channel over cell `c`.
fn start_factor(ch: Channel, c: usize, eps: f64) -> f64 {
    let lo = c as f64 * eps;
    match ch {
        Channel::Alpha(qp) => (-(1.0 - qp) * lo).exp(),
        Channel::Beta(qp) => tail_beta(lo, qp),
    }
}

/// Upper bound of the factor linking `u_l` in cell `hi` to `u_{l+1}` in
/// cell `lo <= hi`, over all nonincreasing pairs in those cells.
fn step_factor(ch: Channel, hi: usize, lo: usize, eps: f64) -> f64 {
    match ch {
        Channel::Alpha(qp) => {
            let gap = hi.saturating_sub(lo + 1) as f64 * eps;
            1.0 - (1.0 - qp) * gap
        }
        Channel::Beta(qp) => {
            let u = hi as f64 * eps;
            let next = ((lo + 1) as f64 * eps).min(u);
            1.0 - u + (1.0 - qp) * next
        }
    }
}

#[inline]
fn key(x: f64) -> u64 {
    // Bit patterns of nonnegative floats sort like the floats.
    x.to_bits()
}

/// Pareto-maximal subset in three coordinates; exact duplicates keep one copy.
fn pareto3(mut v: Vec<Tuple>) -> Vec<Tuple> {
    v.sort_unstable_by(|a, b| {
        b[0].total_cmp(&a[0])
            .then_with(|| b[1].total_cmp(&a[1]))
            .then_with(|| b[2].total_cmp(&a[2]))
    });
    let mut stairs: BTreeMap<u64, f64> = BTreeMap::new();
    let mut out = Vec::new();
    for t in v {
        let k = key(t[1]);
        if let Some((_, &z)) = stairs.range(k..).next() {
            if z >= t[2] {
                continue;
            }
        }
        let stale: Vec<u64> = stairs
            .range(..=k)
            .rev()
            .take_while(|(_, &z)| z <= t[2])
            .map(|(&kk, _)| kk)
            .collect();
        for kk in stale {
            stairs.remove(&kk);
        }
        stairs.insert(k, t[2]);
        out.push(t);
    }
    out
}

/// Certify an upper bound on `1 + max_{m,u} E_Q R̂(m,u)`.
pub fn certify_partial_bound(params: &PartialParams) -> Result<BoundCertificate> {
    let start = Instant::now();
    if params.levels == 0 || params.m_max == 0 {
        return Err(Error::input("L and M must be positive"));
    }
    if params.eps_log2 > 20 {
        return Err(Error::input(format!("grid 2^-{} is too fine", params.eps_log2)));
    }
    params.qdist.validate()?;
    if params.sweep_p && params.qdist.atoms.len() != 2 {
        return Err(Error::input("sweeping p needs a two-atom Q distribution"));
    }
    let layout = Layout::new(&params.qdist)?;
    let eps = params.eps();
    let cells = 1usize << params.eps_log2;

    let mut frontier: Vec<Vec<Tuple>> = (0..cells)
        .map(|c| {
            let mut t = [0.0; 3];
            for (i, &ch) in layout.channels.iter().enumerate() {
                t[i] = start_factor(ch, c, eps);
            }
            vec![t]
        })
        .collect();
    let mut peak = cells;

    for _ in 1..params.levels {
        let next: Vec<Vec<Tuple>> = (0..cells)
            .into_par_iter()
            .map(|hi| {
                let mut cand = Vec::new();
                for (lo, bucket) in frontier.iter().enumerate().take(hi + 1) {
                    let mut f = [0.0; 3];
                    for (i, &ch) in layout.channels.iter().enumerate() {
                        f[i] = step_factor(ch, hi, lo, eps);
                    }
                    cand.extend(bucket.iter().map(|t| [t[0] * f[0], t[1] * f[1], t[2] * f[2]]));
                }
                if params.prune {
                    pareto3(cand)
                } else {
                    cand
                }
            })
            .collect();
        let total: usize = next.iter().map(Vec::len).sum();
        peak = peak.max(total);
        if total > FRONTIER_CAP {
            return Err(Error::Resource(format!(
                "frontier grew to {total} tuples; use a coarser grid"
            )));
        }
        frontier = next;
        log::debug!("certifier level done: {total} tuples");
    }

    // Per (cell, m, tuple): the per-atom values, each an upper bound on
    // R̂ for that atom over the cell.
    let n_atoms = params.qdist.atoms.len();
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    let mut points: Vec<(f64, f64, usize, usize)> = Vec::new();
    let base_p: Vec<f64> = params.qdist.atoms.iter().map(|a| a.prob).collect();
    for (c, bucket) in frontier.iter().enumerate() {
        let u1 = ((c + 1) as f64 * eps).min(1.0);
        for m in 1..=params.m_max {
            let coef: Vec<(f64, f64)> = params
                .qdist
                .atoms
                .iter()
                .map(|a| coefficients(m, params.m_max, u1, a.q_f))
                .collect();
            for t in bucket {
                let mut x = [0.0; 2];
                let mut total = 0.0;
                for i in 0..n_atoms {
                    let (ca, cb) = layout.atoms[i];
                    let v = coef[i].0 * t[ca] + coef[i].1 * t[cb];
                    total += base_p[i] * v;
                    if i < 2 {
                        x[i] = v;
                    }
                }
                if params.sweep_p {
                    points.push((x[0], x[1], m, c));
                } else if total > best.0 {
                    best = (total, m, c);
                }
            }
        }
    }

    let mut p_first = base_p[0];
    if params.sweep_p {
        let (p, value, m, c) = sweep_first_probability(points);
        p_first = p;
        best = (value, m, c);
    }
    let final_tuples = frontier.iter().map(Vec::len).sum();
    Ok(BoundCertificate {
        mode: "partial".into(),
        params: params.clone(),
        eps_grid: eps,
        p_first_atom: p_first,
        max_expected_rhat: best.0,
        slack: FLOAT_SLACK,
        bound: 1.0 + best.0 + FLOAT_SLACK,
        argmax_m: best.1,
        argmax_u1_cell: best.2,
        peak_tuples: peak,
        final_tuples,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Minimize over `p in [0,1]` the maximum of `p x0 + (1-p) x1` over the
/// given points. Returns `(p, value, m, cell)` of the active maximizer.
fn sweep_first_probability(mut points: Vec<(f64, f64, usize, usize)>) -> (f64, f64, usize, usize) {
    // Only the upper-right Pareto points matter for a max with nonnegative
    // weights.
    points.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| b.1.total_cmp(&a.1)));
    let mut hull: Vec<(f64, f64, usize, usize)> = Vec::new();
    for p in points {
        if hull.last().map_or(true, |h| p.1 > h.1) {
            hull.push(p);
        }
    }
    let eval = |p: f64| {
        hull.iter()
            .map(|h| (p * h.0 + (1.0 - p) * h.1, h.2, h.3))
            .fold((f64::NEG_INFINITY, 0, 0), |acc, v| if v.0 > acc.0 { v } else { acc })
    };
    // The maximum of affine functions is convex in p.
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if eval(x1).0 <= eval(x2).0 {
            b = x2;
        } else {
            a = x1;
        }
    }
    let mut p = 0.5 * (a + b);
    for cand in [0.0, 1.0] {
        if eval(cand).0 < eval(p).0 {
            p = cand;
        }
    }
    let (v, m, c) = eval(p);
    (p, v, m, c)
}

/// Result of the SCC bound maximization.
#[derive(Debug, Clone, Serialize)]
pub struct SccCertificate {
    pub mode: String,
    pub q: f64,
    pub cells: usize,
    pub t_max: usize,
    /// Certified bound on `E[d(j,S)] / r_j`.
    pub bound: f64,
    /// Maximizing `t`, or `None` for the tail `t > t_max`.
    pub argmax_t: Option<usize>,
    pub argmax_s_cell: usize,
    pub slack: f64,
}

/// `1 + e^{s-1} (1 - (1-q) s/t)^t + e^{s-1} (1-q)^t (1 - s/t)^t`.
pub fn scc_expression(q: f64, s: f64, t: usize) -> f64 {
    let qb = 1.0 - q;
    let tf = t as f64;
    let e = t as i32;
    let w = (s - 1.0).exp();
    1.0 + w * (1.0 - qb * s / tf).powi(e) + w * qb.powi(e) * (1.0 - s / tf).powi(e)
}

/// Upper bound on `max_{s in [0,1], t >= 1} scc_expression(q, s, t)` from a
/// grid of `cells` cells in `s`.
pub fn certify_scc_bound(q: f64, cells: usize) -> Result<SccCertificate> {
    check_unit("q", q)?;
    if cells == 0 {
        return Err(Error::input("grid needs at least one cell"));
    }
    let qb = 1.0 - q;
    let h = 1.0 / cells as f64;
    let cell_bound = |c: usize| -> (f64, Option<usize>) {
        let s0 = c as f64 * h;
        let s1 = ((c + 1) as f64 * h).min(1.0);
        let w = (s1 - 1.0).exp();
        let mut best = (f64::NEG_INFINITY, None);
        for t in 1..=SCC_T_MAX {
            let tf = t as f64;
            let e = t as i32;
            let v = 1.0 + w * (1.0 - qb * s0 / tf).powi(e) + w * qb.powi(e) * (1.0 - s0 / tf).powi(e);
            if v > best.0 {
                best = (v, Some(t));
            }
        }
        let tail = 1.0 + w * ((-qb * s0).exp() + qb.powi(SCC_T_MAX as i32 + 1));
        if tail > best.0 {
            best = (tail, None);
        }
        best
    };
    let (bound, t, c) = (0..cells)
        .into_par_iter()
        .map(|c| {
            let (v, t) = cell_bound(c);
            (v, t, c)
        })
        .reduce(
            || (f64::NEG_INFINITY, None, 0),
            |a, b| match a.0.partial_cmp(&b.0) {
                Some(Ordering::Less) => b,
                Some(Ordering::Equal) if b.2 < a.2 => b,
                _ => a,
            },
        );
    Ok(SccCertificate {
        mode: "scc".into(),
        q,
        cells,
        t_max: SCC_T_MAX,
        bound: bound + FLOAT_SLACK,
        argmax_t: t,
        argmax_s_cell: c,
        slack: FLOAT_SLACK,
    })
}
