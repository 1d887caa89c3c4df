//! Compiles county-level CSV sources into an [`Instance`].
//!
//! A demand type is connected to every supply agent located in the same
//! county or in an adjacent one. One group is created per race.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::generators::TABLE1_TARGETS;
use super::{DemandType, Edge, Group, Instance, SupplyAgent};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CsvSources {
    pub supply: PathBuf,
    pub demand: PathBuf,
    pub adjacency: PathBuf,
}

#[derive(Debug, Deserialize)]
struct SupplyRow {
    id: String,
    county: String,
    #[allow(dead_code)]
    product: String,
    capacity: u32,
}

#[derive(Debug, Deserialize)]
struct DemandRow {
    id: String,
    county: String,
    race: String,
    rate: f64,
}

#[derive(Debug, Deserialize)]
struct AdjacencyRow {
    county_a: String,
    county_b: String,
}

/// Group targets used by the baseline instance, keyed by race label.
pub fn table1_targets() -> BTreeMap<String, f64> {
    TABLE1_TARGETS
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect()
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_error(path, e))?;
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| parse_error(path, e))
}

fn parse_error(path: &Path, e: csv::Error) -> Error {
    let message = match e.position() {
        Some(pos) => format!("line {}: {e}", pos.line()),
        None => e.to_string(),
    };
    Error::Parse {
        path: path.to_path_buf(),
        message,
    }
}

/// Reads the three CSV files and builds the instance. Every race that occurs
/// in `demand.csv` must have an entry in `targets`.
pub fn ingest_csv(sources: &CsvSources, targets: &BTreeMap<String, f64>) -> Result<Instance> {
    let supply_rows: Vec<SupplyRow> = read_rows(&sources.supply)?;
    let demand_rows: Vec<DemandRow> = read_rows(&sources.demand)?;
    let adjacency_rows: Vec<AdjacencyRow> = read_rows(&sources.adjacency)?;

    let mut adjacent: HashSet<(&str, &str)> = HashSet::new();
    for row in &adjacency_rows {
        adjacent.insert((row.county_a.as_str(), row.county_b.as_str()));
        adjacent.insert((row.county_b.as_str(), row.county_a.as_str()));
    }
    let near = |a: &str, b: &str| a == b || adjacent.contains(&(a, b));

    let mut edges = Vec::new();
    for (j, d) in demand_rows.iter().enumerate() {
        for (i, s) in supply_rows.iter().enumerate() {
            if near(&d.county, &s.county) {
                edges.push(Edge {
                    supply: i,
                    demand: j,
                });
            }
        }
    }

    let races: BTreeSet<&str> = demand_rows.iter().map(|d| d.race.as_str()).collect();
    let mut groups = Vec::with_capacity(races.len());
    for race in races {
        let target = *targets.get(race).ok_or_else(|| Error::Parse {
            path: sources.demand.clone(),
            message: format!("race: no target given for {race:?}"),
        })?;
        groups.push(Group {
            id: race.to_string(),
            members: demand_rows
                .iter()
                .enumerate()
                .filter(|(_, d)| d.race == race)
                .map(|(j, _)| j)
                .collect(),
            target,
        });
    }

    Ok(Instance {
        supply: supply_rows
            .into_iter()
            .map(|s| SupplyAgent {
                id: s.id,
                capacity: s.capacity,
            })
            .collect(),
        demand: demand_rows
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
