use crate::error::{Error, Result};
use crate::lp::FractionalOpening;
use crate::model::Instance;

/// Pieces of mass smaller than this are not materialized as copies.
const PIECE_TOL: f64 = 1e-12;
/// Allowed shortfall of ball mass against a requested cluster mass.
const SHORTFALL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Each client carves its cluster out of the full opening; clusters of
    /// different clients may share copies.
    PerClient,
    /// Clients in index order consume mass; no copy is shared.
    SequentialExclusive,
}

/// A piece of a facility's fractional opening.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacilityCopy {
    pub original: usize,
    pub mass: f64,
}

/// Facility copies plus one cluster (a set of copy indices) per client.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterFamily {
    pub copies: Vec<FacilityCopy>,
    /// Per client, copy indices in increasing order.
    pub clusters: Vec<Vec<usize>>,
    pub n_facilities: usize,
}

impl ClusterFamily {
    pub fn n_copies(&self) -> usize {
        self.copies.len()
    }

    pub fn copy_masses(&self) -> Vec<f64> {
        self.copies.iter().map(|c| c.mass).collect()
    }

    pub fn original(&self, copy: usize) -> usize {
        self.copies[copy].original
    }

    /// Mass of client `j`'s cluster under the copy masses.
    pub fn mass(&self, j: usize) -> f64 {
        self.clusters[j].iter().map(|&c| self.copies[c].mass).sum()
    }

    /// Mass of a cluster under an arbitrary copy vector.
    pub fn mass_under(&self, j: usize, y: &[f64]) -> f64 {
        self.clusters[j].iter().map(|&c| y[c]).sum()
    }

    /// Sums copy masses back onto the original facilities.
    pub fn unsplit(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.n_facilities];
        for c in &self.copies {
            b[c.original] += c.mass;
        }
        b
    }

    /// Per copy, the clients whose cluster contains it.
    pub fn owners(&self) -> Vec<Vec<usize>> {
        let mut owners = vec![Vec::new(); self.copies.len()];
        for (j, cl) in self.clusters.iter().enumerate() {
            for &c in cl {
                owners[c].push(j);
            }
        }
        owners
    }

    pub fn intersects(&self, a: usize, b: usize) -> bool {
        let (x, y) = (&self.clusters[a], &self.clusters[b]);
        let (mut p, mut q) = (0, 0);
        while p < x.len() && q < y.len() {
            match x[p].cmp(&y[q]) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }
}

/// Facilities of client `j`'s ball with positive mass, in scan order:
/// ascending distance, ties by index, with the client's own facility first
/// in the SCC setting.
fn scan_order(inst: &Instance, b: &[f64], j: usize, r: f64) -> Result<Vec<usize>> {
    let mut ball: Vec<usize> = inst.ball(j, r)?.into_iter().filter(|&i| b[i] > 0.0).collect();
    let row = inst.client_row(j);
    let own = inst.scc_facility(j);
    ball.sort_by(|&x, &y| {
        let kx = own != Some(x);
        let ky = own != Some(y);
        kx.cmp(&ky).then(row[x].total_cmp(&row[y])).then(x.cmp(&y))
    });
    Ok(ball)
}

/// Amounts taken from each facility to reach `mass`, from `available`.
fn takes(order: &[usize], available: impl Fn(usize) -> f64, mass: f64, client: usize) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    let mut remaining = mass;
    for &i in order {
        if remaining <= PIECE_TOL {
            break;
        }
        let avail = available(i);
        if avail <= PIECE_TOL {
            continue;
        }
        if avail <= remaining + PIECE_TOL {
            out.push((i, avail));
            remaining -= avail;
        } else {
            out.push((i, remaining));
            remaining = 0.0;
        }
    }
    if remaining > SHORTFALL_TOL {
        return Err(Error::input(format!(
            "client {client}: ball mass falls short of cluster target {mass} by {remaining:.3e}"
        )));
    }
    Ok(out)
}

/// Splits the opening `b` into copies so that client `j` gets a cluster of
/// mass `masses[j]` inside `B(j, radii[j])`.
///
/// Clients scan their ball in ascending distance and split the last
/// facility they need. Copies of one facility partition its mass.
pub fn split_facilities(
    inst: &Instance,
    b: &FractionalOpening,
    radii: &[f64],
    masses: &[f64],
    mode: SplitMode,
) -> Result<ClusterFamily> {
    let nc = inst.n_clients();
    let nf = inst.n_facilities();
    if radii.len() != nc || masses.len() != nc || b.b.len() != nf {
        return Err(Error::input("split_facilities: dimension mismatch"));
    }
    if let Some(j) = masses.iter().position(|&m| !(0.0..=1.0 + PIECE_TOL).contains(&m)) {
        return Err(Error::input(format!("client {j}: cluster mass {} outside [0,1]", masses[j])));
    }
    match mode {
        SplitMode::PerClient => split_per_client(inst, &b.b, radii, masses),
        SplitMode::SequentialExclusive => split_exclusive(inst, &b.b, radii, masses),
    }
}

fn split_per_client(inst: &Instance, b: &[f64], radii: &[f64], masses: &[f64]) -> Result<ClusterFamily> {
    let nf = b.len();
    let nc = radii.len();
    let mut client_takes = Vec::with_capacity(nc);
    let mut cuts: Vec<Vec<f64>> = vec![Vec::new(); nf];
    for j in 0..nc {
        let order = scan_order(inst, b, j, radii[j])?;
        let t = takes(&order, |i| b[i], masses[j], j)?;
        for &(i, x) in &t {
            if x < b[i] - PIECE_TOL {
                cuts[i].push(x);
            }
        }
        client_takes.push(t);
    }
    // Interval boundaries per facility, with near-equal cuts merged.
    let mut copies = Vec::new();
    let mut bounds: Vec<Vec<f64>> = Vec::with_capacity(nf);
    let mut first_copy = Vec::with_capacity(nf);
    for i in 0..nf {
        let mut c = std::mem::take(&mut cuts[i]);
        c.sort_by(f64::total_cmp);
        let mut ends: Vec<f64> = Vec::new();
        for x in c {
            if x <= PIECE_TOL || x >= b[i] - PIECE_TOL {
                continue;
            }
            if ends.last().map_or(true, |&l| x - l > PIECE_TOL) {
                ends.push(x);
            }
        }
        first_copy.push(copies.len());
        if b[i] > 0.0 {
            ends.push(b[i]);
            let mut start = 0.0;
            for &e in &ends {
                copies.push(FacilityCopy {
                    original: i,
                    mass: e - start,
                });
                start = e;
            }
        }
        bounds.push(ends);
    }
    let clusters = client_takes
        .into_iter()
        .map(|t| {
            let mut cl = Vec::new();
            for (i, x) in t {
                let ends = &bounds[i];
                // Number of intervals whose end is at most x (up to merging).
                let n = ends.iter().take_while(|&&e| e <= x + PIECE_TOL).count().max(1);
                cl.extend(first_copy[i]..first_copy[i] + n);
            }
            cl.sort_unstable();
            cl
        })
        .collect();
    Ok(ClusterFamily {
        copies,
        clusters,
        n_facilities: nf,
    })
}

fn split_exclusive(inst: &Instance, b: &[f64], radii: &[f64], masses: &[f64]) -> Result<ClusterFamily> {
    let nf = b.len();
    let nc = radii.len();
    let mut used = vec![0.0; nf];
    // (facility, start, end, owner)
    let mut pieces: Vec<(usize, f64, f64, Option<usize>)> = Vec::new();
    for j in 0..nc {
        let order = scan_order(inst, b, j, radii[j])?;
        let t = takes(&order, |i| b[i] - used[i], masses[j], j)?;
        for (i, x) in t {
            let start = used[i];
            let end = if b[i] - (start + x) <= PIECE_TOL { b[i] } else { start + x };
            pieces.push((i, start, end, Some(j)));
            used[i] = end;
        }
    }
    for i in 0..nf {
        if b[i] - used[i] > PIECE_TOL {
            pieces.push((i, used[i], b[i], None));
        }
    }
    pieces.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut clusters = vec![Vec::new(); nc];
    let copies = pieces
        .iter()
        .enumerate()
        .map(|(c, &(i, s, e, owner))| {
            if let Some(j) = owner {
                clusters[j].push(c);
            }
            FacilityCopy {
                original: i,
                mass: e - s,
            }
        })
        .collect();
    for cl in clusters.iter_mut() {
        cl.sort_unstable();
    }
    Ok(ClusterFamily {
        copies,
        clusters,
        n_facilities: nf,
    })
}
