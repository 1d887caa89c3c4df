//! JSON instance documents.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{DemandType, Edge, Group, Instance, SupplyAgent};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupplyRecord {
    pub id: String,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandRecord {
    pub id: String,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupRecord {
    pub id: String,
    pub members: Vec<String>,
    pub target: f64,
}

/// On-disk form of an [`Instance`]; every reference is by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub supply: Vec<SupplyRecord>,
    pub demand: Vec<DemandRecord>,
    pub edges: Vec<(String, String)>,
    pub groups: Vec<GroupRecord>,
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        Self {
            supply: inst
                .supply
                .iter()
                .map(|s| SupplyRecord {
                    id: s.id.clone(),
                    capacity: s.capacity,
                })
                .collect(),
            demand: inst
                .demand
                .iter()
                .map(|d| DemandRecord {
                    id: d.id.clone(),
                    rate: d.rate,
                })
                .collect(),
            edges: inst
                .edges
                .iter()
                .map(|e| {
                    (
                        inst.supply[e.supply].id.clone(),
                        inst.demand[e.demand].id.clone(),
                    )
                })
                .collect(),
            groups: inst
                .groups
                .iter()
                .map(|g| GroupRecord {
                    id: g.id.clone(),
                    members: g
                        .members
                        .iter()
                        .map(|&j| inst.demand[j].id.clone())
                        .collect(),
                    target: g.target,
                })
                .collect(),
        }
    }
}

impl InstanceFile {
    /// Resolves ids into positions. Unknown ids are reported with the offending field.
    pub fn into_instance(self) -> std::result::Result<Instance, String> {
        let supply_idx: HashMap<&str, usize> = self
            .supply
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), i))
            .collect();
        let demand_idx: HashMap<&str, usize> = self
            .demand
            .iter()
            .enumerate()
            .map(|(j, d)| (d.id.as_str(), j))
            .collect();

        let mut edges = Vec::with_capacity(self.edges.len());
        for (k, (s, d)) in self.edges.iter().enumerate() {
            let supply = *supply_idx
                .get(s.as_str())
                .ok_or_else(|| format!("edges[{k}][0]: unknown supply id {s:?}"))?;
            let demand = *demand_idx
                .get(d.as_str())
                .ok_or_else(|| format!("edges[{k}][1]: unknown demand id {d:?}"))?;
            edges.push(Edge { supply, demand });
        }

        let mut groups = Vec::with_capacity(self.groups.len());
        for (k, g) in self.groups.iter().enumerate() {
            let members = g
                .members
                .iter()
                .map(|m| {
                    demand_idx
                        .get(m.as_str())
                        .copied()
                        .ok_or_else(|| format!("groups[{k}].members: unknown demand id {m:?}"))
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            groups.push(Group {
                id: g.id.clone(),
                members,
                target: g.target,
            });
        }

        Ok(Instance {
            supply: self
                .supply
                .into_iter()
                .map(|s| SupplyAgent {
                    id: s.id,
                    capacity: s.capacity,
                })
                .collect(),
            demand: self
                .demand
                .into_iter()
                .map(|d| DemandType {
                    id: d.id,
                    rate: d.rate,
                })
                .collect(),
            edges,
            groups,
        })
    }
}

impl Instance {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from(self)).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Instance, String> {
        let file: InstanceFile = serde_json::from_str(text)
            .map_err(|e| format!("line {} column {}: {e}", e.line(), e.column()))?;
        file.into_instance()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Instance> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    /// SHA-256 of the compact JSON encoding, hex encoded.
    pub fn content_hash(&self) -> String {
        let bytes = serde_json::to_vec(&InstanceFile::from(self)).expect("instance serializes");
        hex::encode(Sha256::digest(bytes))
    }
}
