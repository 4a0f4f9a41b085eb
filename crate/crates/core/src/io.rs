//! JSON file formats for instances, demands and lotteries.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DemandChance, DemandExpected, Id, Instance, Metric};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MetricJson {
    Matrix {
        labels: Vec<Id>,
        d: Vec<Vec<f64>>,
    },
    Euclidean {
        facilities: Vec<Vec<f64>>,
        #[serde(default)]
        clients: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceJson {
    pub k: usize,
    #[serde(default)]
    pub scc: bool,
    pub metric: MetricJson,
    pub facilities: Vec<Id>,
    pub clients: Vec<Id>,
}

impl InstanceJson {
    pub fn into_instance(self, validate_triangle: bool) -> Result<Instance> {
        let inst = match self.metric {
            MetricJson::Matrix { labels, d } => {
                let n = labels.len();
                if d.len() != n || d.iter().any(|row| row.len() != n) {
                    return Err(Error::input(format!("matrix must be {n} x {n}")));
                }
                let index: HashMap<&Id, usize> =
                    labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
                if index.len() != n {
                    return Err(Error::input("duplicate matrix labels"));
                }
                let lookup = |ids: &[Id]| -> Result<Vec<usize>> {
                    ids.iter()
                        .map(|id| {
                            index
                                .get(id)
                                .copied()
                                .ok_or_else(|| Error::input(format!("unknown label {id}")))
                        })
                        .collect()
                };
                let fp = lookup(&self.facilities)?;
                let cp = lookup(&self.clients)?;
                let flat: Vec<f64> = d.into_iter().flatten().collect();
                Instance::assemble(
                    Metric::Matrix { n, d: flat },
                    fp,
                    cp,
                    self.facilities,
                    self.clients,
                    self.k,
                    self.scc,
                )?
            }
            MetricJson::Euclidean { facilities, clients } => {
                if facilities.len() != self.facilities.len() {
                    return Err(Error::input("facility ids and coordinates differ in length"));
                }
                if self.scc {
                    if !clients.is_empty() && clients != facilities {
                        return Err(Error::input("scc euclidean instance with distinct client coordinates"));
                    }
                    let n = facilities.len();
                    let all: Vec<usize> = (0..n).collect();
                    Instance::assemble(
                        Metric::Euclidean { points: facilities },
                        all.clone(),
                        all,
                        self.facilities,
                        self.clients,
                        self.k,
                        true,
                    )?
                } else {
                    if clients.len() != self.clients.len() {
                        return Err(Error::input("client ids and coordinates differ in length"));
                    }
                    let nf = facilities.len();
                    let nc = clients.len();
                    let mut points = facilities;
                    points.extend(clients);
                    Instance::assemble(
                        Metric::Euclidean { points },
                        (0..nf).collect(),
                        (nf..nf + nc).collect(),
                        self.facilities,
                        self.clients,
                        self.k,
                        false,
                    )?
                }
            }
        };
        inst.validate(validate_triangle)?;
        Ok(inst)
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let metric = match inst.metric() {
            Metric::Matrix { n, d } => {
                let mut labels: Vec<Option<Id>> = vec![None; *n];
                for (p, id) in inst.facility_points().iter().zip(inst.facility_ids()) {
                    labels[*p].get_or_insert_with(|| id.clone());
                }
                for (p, id) in inst.client_points().iter().zip(inst.client_ids()) {
                    labels[*p].get_or_insert_with(|| id.clone());
                }
                let labels = labels
                    .into_iter()
                    .enumerate()
                    .map(|(p, l)| l.unwrap_or(Id::Num(p as u64)))
                    .collect();
                MetricJson::Matrix {
                    labels,
                    d: d.chunks(*n).map(<[f64]>::to_vec).collect(),
                }
            }
            Metric::Euclidean { points } => MetricJson::Euclidean {
                facilities: inst
                    .facility_points()
                    .iter()
                    .map(|&p| points[p].clone())
                    .collect(),
                clients: if inst.is_scc() {
                    Vec::new()
                } else {
                    inst.client_points().iter().map(|&p| points[p].clone()).collect()
                },
            },
        };
        // Matrix instances reference points through labels, so ids must be
        // the labels of the points they sit on.
        let (facilities, clients) = match &metric {
            MetricJson::Matrix { labels, .. } => (
                inst.facility_points().iter().map(|&p| labels[p].clone()).collect(),
                inst.client_points().iter().map(|&p| labels[p].clone()).collect(),
            ),
            MetricJson::Euclidean { .. } => (inst.facility_ids().to_vec(), inst.client_ids().to_vec()),
        };
        InstanceJson {
            k: inst.k(),
            scc: inst.is_scc(),
            metric,
            facilities,
            clients,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChanceEntry {
    pub client: Id,
    pub p: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpectedEntry {
    pub client: Id,
    pub t: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DemandsJson {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub chance: Vec<ChanceEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expected: Vec<ExpectedEntry>,
}

fn client_index(inst: &Instance) -> HashMap<&Id, usize> {
    inst.client_ids().iter().enumerate().map(|(j, id)| (id, j)).collect()
}

impl DemandsJson {
    pub fn chance_for(&self, inst: &Instance) -> Result<Option<DemandChance>> {
        if self.chance.is_empty() {
            return Ok(None);
        }
        let index = client_index(inst);
        let n = inst.n_clients();
        let mut p = vec![f64::NAN; n];
        let mut r = vec![f64::NAN; n];
        for e in &self.chance {
            let j = *index
                .get(&e.client)
                .ok_or_else(|| Error::input(format!("chance demand for unknown client {}", e.client)))?;
            p[j] = e.p;
            r[j] = e.r;
        }
        if let Some(j) = p.iter().position(|x| x.is_nan()) {
            return Err(Error::input(format!("no chance demand for client {}", inst.client_ids()[j])));
        }
        DemandChance::new(p, r).map(Some)
    }

    pub fn expected_for(&self, inst: &Instance) -> Result<Option<DemandExpected>> {
        if self.expected.is_empty() {
            return Ok(None);
        }
        let index = client_index(inst);
        let mut t = vec![f64::NAN; inst.n_clients()];
        for e in &self.expected {
            let j = *index
                .get(&e.client)
                .ok_or_else(|| Error::input(format!("expected demand for unknown client {}", e.client)))?;
            t[j] = e.t;
        }
        if let Some(j) = t.iter().position(|x| x.is_nan()) {
            return Err(Error::input(format!("no expected demand for client {}", inst.client_ids()[j])));
        }
        DemandExpected::new(t).map(Some)
    }

    pub fn from_demands(inst: &Instance, chance: Option<&DemandChance>, expected: Option<&DemandExpected>) -> Self {
        let ids = inst.client_ids();
        DemandsJson {
            chance: chance
                .map(|d| {
                    ids.iter()
                        .zip(d.p.iter().zip(&d.r))
                        .map(|(id, (&p, &r))| ChanceEntry { client: id.clone(), p, r })
                        .collect()
                })
                .unwrap_or_default(),
            expected: expected
                .map(|d| {
                    ids.iter()
                        .zip(&d.t)
                        .map(|(id, &t)| ExpectedEntry { client: id.clone(), t })
                        .collect()
                })
                .unwrap_or_default(),
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

pub fn read_instance(path: &Path, validate_triangle: bool) -> Result<Instance> {
    read_json::<InstanceJson>(path)?.into_instance(validate_triangle)
}

pub fn parse_instance(text: &str, validate_triangle: bool) -> Result<Instance> {
    serde_json::from_str::<InstanceJson>(text)
        .map_err(|e| Error::input(format!("instance json: {e}")))?
        .into_instance(validate_triangle)
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_instance_with_string_labels() {
        let text = r#"{
            "k": 1, "scc": false,
            "metric": {"type": "matrix", "labels": ["a", "b", "c"],
                       "d": [[0, 1, 2], [1, 0, 1], [2, 1, 0]]},
            "facilities": ["a", "c"], "clients": ["b"]
        }"#;
        let inst = parse_instance(text, true).unwrap();
        assert_eq!(inst.n_facilities(), 2);
        assert_eq!(inst.dist(1, 0), 1.0);
        let back = InstanceJson::from_instance(&inst);
        let again = back.into_instance(true).unwrap();
        assert_eq!(again.dist(0, 0), inst.dist(0, 0));
        assert_eq!(again.client_ids(), inst.client_ids());
    }

    #[test]
    fn euclidean_scc_round_trip() {
        let text = r#"{"k": 2, "scc": true,
            "metric": {"type": "euclidean", "facilities": [[0,0],[3,4],[1,0]]},
            "facilities": [0,1,2], "clients": [0,1,2]}"#;
        let inst = parse_instance(text, true).unwrap();
        assert!(inst.is_scc());
        assert_eq!(inst.dist(1, 0), 5.0);
        let json = serde_json::to_string(&InstanceJson::from_instance(&inst)).unwrap();
        let again = parse_instance(&json, true).unwrap();
        assert_eq!(again.dist(2, 1), inst.dist(2, 1));
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let unknown = r#"{"k": 1, "metric": {"type":"matrix","labels":[0,1],"d":[[0,1],[1,0]]},
            "facilities":[0], "clients":[7]}"#;
        assert!(matches!(parse_instance(unknown, true), Err(Error::Input(_))));
        let k0 = r#"{"k": 0, "metric": {"type":"matrix","labels":[0],"d":[[0]]},
            "facilities":[0], "clients":[0]}"#;
        assert!(parse_instance(k0, true).is_err());
    }

    #[test]
    fn demands_map_client_ids() {
        let text = r#"{"k": 1, "metric": {"type":"matrix","labels":["x","y"],"d":[[0,2],[2,0]]},
            "facilities":["x"], "clients":["y","x"]}"#;
        let inst = parse_instance(text, true).unwrap();
        let dj: DemandsJson = serde_json::from_str(
            r#"{"chance":[{"client":"x","p":1.0,"r":0.0},{"client":"y","p":0.5,"r":2.0}],
                "expected":[{"client":"y","t":2.0},{"client":"x","t":0.0}]}"#,
        )
        .unwrap();
        let ch = dj.chance_for(&inst).unwrap().unwrap();
        assert_eq!(ch.p, vec![0.5, 1.0]);
        assert_eq!(ch.r, vec![2.0, 0.0]);
        let ex = dj.expected_for(&inst).unwrap().unwrap();
        assert_eq!(ex.t, vec![2.0, 0.0]);
        let missing: DemandsJson =
            serde_json::from_str(r#"{"chance":[{"client":"x","p":1.0,"r":0.0}]}"#).unwrap();
        assert!(missing.chance_for(&inst).is_err());
    }
}
