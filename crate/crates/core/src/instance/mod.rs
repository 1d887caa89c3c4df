//! Allocation instances: a bipartite supply/demand graph with capacities,
//! Poisson arrival rates and protected groups with target serving ratios.

mod csv_ingest;
mod generators;
mod io;

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};

pub use csv_ingest::{ingest_csv, table1_targets, CsvSources};
pub use generators::{
    generate_homogeneous_synthetic, generate_lower_bound_instance, generate_table1_shaped,
    ExampleOneLayout, HomogeneousParams, TABLE1_KAPPAS, TABLE1_TARGETS,
};
pub use io::InstanceFile;

/// Tolerance on `sum_j mu_j >= 1` for homogeneous instances.
pub const MU_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SupplyAgent {
    pub id: String,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandType {
    pub id: String,
    pub rate: f64,
}

/// An edge by position: `supply` indexes [`Instance::supply`], `demand` indexes [`Instance::demand`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub supply: usize,
    pub demand: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub id: String,
    /// Indices into [`Instance::demand`].
    pub members: Vec<usize>,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub supply: Vec<SupplyAgent>,
    pub demand: Vec<DemandType>,
    pub edges: Vec<Edge>,
    pub groups: Vec<Group>,
}

/// A single validation failure with a stable machine-readable code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: &'static str,
    pub detail: String,
}

impl Violation {
    fn new(code: &'static str, detail: impl Into<String>) -> Self {
        Self {
            code,
            detail: detail.into(),
        }
    }
}

/// Per-type view of an instance whose groups are singletons covering each type once.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousView {
    /// Target ratio of each demand type.
    pub mu: Vec<f64>,
    /// `lambda_j / (lambda * mu_j)`.
    pub kappa: Vec<f64>,
    pub kappa_bar: f64,
    pub b_bar: u32,
    pub mu_sum: f64,
}

impl Instance {
    pub fn total_rate(&self) -> f64 {
        self.demand.iter().map(|d| d.rate).sum()
    }

    pub fn total_capacity(&self) -> u64 {
        self.supply.iter().map(|s| u64::from(s.capacity)).sum()
    }

    /// Smallest serving capacity `b_bar`, or 0 with no supply.
    pub fn min_capacity(&self) -> u32 {
        self.supply.iter().map(|s| s.capacity).min().unwrap_or(0)
    }

    /// Supply neighbors of each demand type, in edge order.
    pub fn demand_neighbors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.demand.len()];
        for e in &self.edges {
            out[e.demand].push(e.supply);
        }
        out
    }

    /// Total rate of a group's member types.
    pub fn group_rate(&self, group: &Group) -> f64 {
        group.members.iter().map(|&j| self.demand[j].rate).sum()
    }

    /// Group disproportionality `(lambda_g / lambda) / mu_g`.
    pub fn group_kappa(&self, group: &Group) -> f64 {
        self.group_rate(group) / (self.total_rate() * group.target)
    }

    /// Minimum group disproportionality; coincides with `kappa_bar` of the
    /// homogeneous view when groups are singletons.
    pub fn kappa_bar(&self) -> f64 {
        self.groups
            .iter()
            .map(|g| self.group_kappa(g))
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether groups are singletons covering every demand type exactly once.
    pub fn is_homogeneous(&self) -> bool {
        if self.groups.len() != self.demand.len() {
            return false;
        }
        let mut seen = vec![false; self.demand.len()];
        for g in &self.groups {
            match g.members.as_slice() {
                [j] if *j < seen.len() && !seen[*j] => seen[*j] = true,
                _ => return false,
            }
        }
        true
    }

    /// The per-type view, when the groups are homogeneous.
    pub fn homogeneous_view(&self) -> Option<HomogeneousView> {
        if !self.is_homogeneous() {
            return None;
        }
        let lambda = self.total_rate();
        let mut mu = vec![0.0; self.demand.len()];
        for g in &self.groups {
            mu[g.members[0]] = g.target;
        }
        let kappa: Vec<f64> = self
            .demand
            .iter()
            .zip(&mu)
            .map(|(d, &m)| d.rate / (lambda * m))
            .collect();
        Some(HomogeneousView {
            kappa_bar: kappa.iter().copied().fold(f64::INFINITY, f64::min),
            b_bar: self.min_capacity(),
            mu_sum: mu.iter().sum(),
            mu,
            kappa,
        })
    }

    /// Checks every structural invariant; an empty list means the instance is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.supply.is_empty() {
            out.push(Violation::new("no_supply", "instance has no supply agents"));
        }
        if self.demand.is_empty() {
            out.push(Violation::new("no_demand", "instance has no demand types"));
        }
        check_unique_ids(
            self.supply.iter().map(|s| &s.id),
            "duplicate_supply_id",
            &mut out,
        );
        check_unique_ids(
            self.demand.iter().map(|d| &d.id),
            "duplicate_demand_id",
            &mut out,
        );
        check_unique_ids(
            self.groups.iter().map(|g| &g.id),
            "duplicate_group_id",
            &mut out,
        );

        for s in &self.supply {
            if s.capacity == 0 {
                out.push(Violation::new("zero_capacity", format!("supply {}", s.id)));
            }
        }
        for d in &self.demand {
            if !(d.rate.is_finite() && d.rate > 0.0) {
                out.push(Violation::new(
                    "nonpositive_rate",
                    format!("demand {} has rate {}", d.id, d.rate),
                ));
            }
        }

        let mut seen = HashSet::new();
        for e in &self.edges {
            if e.supply >= self.supply.len() {
                out.push(Violation::new(
                    "unknown_supply_endpoint",
                    format!("edge supply index {}", e.supply),
                ));
                continue;
            }
            if e.demand >= self.demand.len() {
                out.push(Violation::new(
                    "unknown_demand_endpoint",
                    format!("edge demand index {}", e.demand),
                ));
                continue;
            }
            if !seen.insert(*e) {
                out.push(Violation::new(
                    "duplicate_edge",
                    format!(
                        "({}, {})",
                        self.supply[e.supply].id, self.demand[e.demand].id
                    ),
                ));
            }
        }

        for g in &self.groups {
            if g.members.is_empty() {
                out.push(Violation::new("empty_group", format!("group {}", g.id)));
            }
            if let Some(&bad) = g.members.iter().find(|&&j| j >= self.demand.len()) {
                out.push(Violation::new(
                    "unknown_group_member",
                    format!("group {} member index {bad}", g.id),
                ));
            }
            if !(g.target > 0.0 && g.target < 1.0) {
                out.push(Violation::new(
                    "target_out_of_range",
                    format!("group {} target {}", g.id, g.target),
                ));
            }
        }
        if self.groups.is_empty() {
            out.push(Violation::new("no_groups", "instance has no groups"));
        }

        if out.is_empty() {
            if let Some(view) = self.homogeneous_view() {
                if view.mu_sum < 1.0 - MU_SUM_TOL {
                    out.push(Violation::new(
                        "mu_sum_below_one",
                        format!("sum of per-type targets is {}", view.mu_sum),
                    ));
                }
            }
        }
        out
    }

    /// [`validate`](Self::validate) as a `Result`.
    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(v))
        }
    }

    /// Rescales every rate by a common factor so that `lambda = B * rho`.
    pub fn apply_scarcity(&self, rho: f64) -> Result<Instance> {
        if !(rho.is_finite() && rho >= 1.0) {
            return Err(Error::Domain(format!(
                "supply scarcity must be >= 1, got {rho}"
            )));
        }
        let lambda = self.total_rate();
        if lambda <= 0.0 {
            return Err(Error::Domain("total arrival rate must be positive".into()));
        }
        let factor = self.total_capacity() as f64 * rho / lambda;
        let mut out = self.clone();
        for d in &mut out.demand {
            d.rate *= factor;
        }
        Ok(out)
    }

    /// Drops supply agents with capacity below `b_floor` and their edges.
    pub fn filter_min_capacity(&self, b_floor: u32) -> Result<Instance> {
        let mut remap = vec![None; self.supply.len()];
        let mut supply = Vec::new();
        for (i, s) in self.supply.iter().enumerate() {
            if s.capacity >= b_floor {
                remap[i] = Some(supply.len());
                supply.push(s.clone());
            }
        }
        if supply.is_empty() {
            return Err(Error::NoSupplyRemaining(b_floor));
        }
        let edges = self
            .edges
            .iter()
            .filter_map(|e| {
                remap[e.supply].map(|i| Edge {
                    supply: i,
                    demand: e.demand,
                })
            })
            .collect();
        Ok(Instance {
            supply,
            demand: self.demand.clone(),
            edges,
            groups: self.groups.clone(),
        })
    }
}

fn check_unique_ids<'a>(
    ids: impl Iterator<Item = &'a String>,
    code: &'static str,
    out: &mut Vec<Violation>,
) {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            out.push(Violation::new(code, id.clone()));
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Two supplies, two demand types, full bipartite graph, two singleton groups.
    pub(crate) fn two_by_two() -> Instance {
        Instance {
            supply: vec![
                SupplyAgent {
                    id: "s0".into(),
                    capacity: 2,
                },
                SupplyAgent {
                    id: "s1".into(),
                    capacity: 3,
                },
            ],
            demand: vec![
                DemandType {
                    id: "d0".into(),
                    rate: 1.0,
                },
                DemandType {
                    id: "d1".into(),
                    rate: 3.0,
                },
            ],
            edges: vec![
                Edge {
                    supply: 0,
                    demand: 0,
                },
                Edge {
                    supply: 0,
                    demand: 1,
                },
                Edge {
                    supply: 1,
                    demand: 0,
                },
                Edge {
                    supply: 1,
                    demand: 1,
                },
            ],
            groups: vec![
                Group {
                    id: "g0".into(),
                    members: vec![0],
                    target: 0.5,
                },
                Group {
                    id: "g1".into(),
                    members: vec![1],
                    target: 0.5,
                },
            ],
        }
    }

    fn codes(inst: &Instance) -> Vec<&'static str> {
        inst.validate().into_iter().map(|v| v.code).collect()
    }

    #[test]
    fn well_formed_instance_is_ok() {
        assert!(two_by_two().validate().is_empty());
    }

    #[test]
    fn target_out_of_range_is_reported() {
        let mut inst = two_by_two();
        inst.groups[0].target = 1.3;
        assert!(codes(&inst).contains(&"target_out_of_range"));
    }

    #[test]
    fn mu_sum_below_one_is_reported() {
        let mut inst = two_by_two();
        inst.groups[0].target = 0.4;
        inst.groups[1].target = 0.4;
        assert_eq!(codes(&inst), vec!["mu_sum_below_one"]);
    }

    #[test]
    fn structural_violations() {
        let mut inst = two_by_two();
        inst.edges.push(Edge {
            supply: 0,
            demand: 0,
        });
        inst.edges.push(Edge {
            supply: 5,
            demand: 0,
        });
        inst.demand[1].rate = 0.0;
        inst.supply[1].capacity = 0;
        inst.groups.push(Group {
            id: "g2".into(),
            members: vec![],
            target: 0.2,
        });
        let c = codes(&inst);
        for code in [
            "duplicate_edge",
            "unknown_supply_endpoint",
            "nonpositive_rate",
            "zero_capacity",
            "empty_group",
        ] {
            assert!(c.contains(&code), "missing {code} in {c:?}");
        }
    }

    #[test]
    fn homogeneous_view_values() {
        let view = two_by_two().homogeneous_view().unwrap();
        assert_eq!(view.mu, vec![0.5, 0.5]);
        assert!((view.kappa[0] - 0.5).abs() < 1e-15);
        assert!((view.kappa[1] - 1.5).abs() < 1e-15);
        assert_eq!(view.kappa_bar, view.kappa[0]);
        assert_eq!(view.b_bar, 2);
        assert!((two_by_two().kappa_bar() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn overlapping_groups_have_no_homogeneous_view() {
        let mut inst = two_by_two();
        inst.groups[1].members = vec![0, 1];
        assert!(inst.homogeneous_view().is_none());
        assert!(inst.validate().is_empty());
    }

    #[test]
    fn scarcity_rescales_linearly() {
        let mut inst = two_by_two();
        // B = 5, lambda = 4.
        let out = inst.apply_scarcity(2.0).unwrap();
        assert!((out.total_rate() - 10.0).abs() < 1e-12);
        assert!((out.demand[0].rate - 2.5).abs() < 1e-12);
        let one = inst.apply_scarcity(1.0).unwrap();
        assert!((one.total_rate() - 5.0).abs() < 1e-12);
        assert!(inst.apply_scarcity(0.9).is_err());

        // B = 100 and lambda = 50 at rho = 2 multiplies each rate by 4.
        inst.supply[0].capacity = 40;
        inst.supply[1].capacity = 60;
        inst.demand[0].rate = 20.0;
        inst.demand[1].rate = 30.0;
        let out = inst.apply_scarcity(2.0).unwrap();
        assert!((out.total_rate() - 200.0).abs() < 1e-9);
        assert!((out.demand[0].rate - 80.0).abs() < 1e-9);
    }

    #[test]
    fn filter_drops_small_supply() {
        let inst = two_by_two();
        assert_eq!(inst.filter_min_capacity(1).unwrap(), inst);
        let f = inst.filter_min_capacity(3).unwrap();
        assert_eq!(f.supply.len(), 1);
        assert_eq!(f.supply[0].id, "s1");
        assert_eq!(f.edges.len(), 2);
        assert!(f.edges.iter().all(|e| e.supply == 0));
        assert_eq!(f.filter_min_capacity(3).unwrap(), f);
        assert!(matches!(
            inst.filter_min_capacity(4),
            Err(Error::NoSupplyRemaining(4))
        ));
    }
}
