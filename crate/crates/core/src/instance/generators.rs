//! Instance generators: the lower-bound family, homogeneous synthetic graphs
//! and a synthetic stand-in shaped like the county-level baseline instance.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use super::{DemandType, Edge, Group, Instance, SupplyAgent};
use crate::error::{Error, Result};

/// Race labels and their population shares used as group targets.
pub const TABLE1_TARGETS: [(&str, f64); 5] = [
    ("AI", 0.0102),
    ("API", 0.0498),
    ("BAA", 0.06),
    ("H", 0.0478),
    ("W", 0.8321),
];

/// Disproportionality `(lambda_g / lambda) / mu_g` built into the baseline
/// arrival population. `W` absorbs the remainder so the totals add up.
pub const TABLE1_KAPPAS: [(&str, f64); 4] =
    [("AI", 0.7), ("API", 0.9), ("BAA", 0.62), ("H", 0.586)];

const TABLE1_COUNTIES: usize = 87;
const TABLE1_GRID_COLS: usize = 10;
const TABLE1_EXTRA_DIAGONALS: usize = 15;
const TABLE1_TOTAL_CAPACITY: u32 = 10_000;
const TABLE1_MAX_CAPACITY: f64 = 1822.0;
const TABLE1_MAX_RATE: f64 = 2580.0;
const TABLE1_MIN_RATE: f64 = 0.01;
const PRODUCTS: [(&str, f64); 3] = [("pfizer", 0.55), ("moderna", 0.38), ("jj", 0.07)];
/// Log-normal spread of each race's county distribution.
const RACE_SPREAD: [f64; 5] = [1.2, 0.5, 0.6, 0.5, 0.15];

/// Rates, targets and edges of the lower-bound family, recovered from an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleOneLayout {
    pub n: usize,
    /// Index of the common demand type.
    pub common: usize,
    /// For each demand type, its dedicated supply agent (`None` for the common type).
    pub dedicated_supply: Vec<Option<usize>>,
    /// For each supply agent, the rare type it is dedicated to.
    pub rare_of_supply: Vec<usize>,
}

impl ExampleOneLayout {
    /// Recognizes the structure: `n` unit-capacity supplies, one type adjacent
    /// to all of them, and `n` types each adjacent to a distinct single supply.
    pub fn detect(inst: &Instance) -> Result<Self> {
        let n = inst.supply.len();
        let wrong = |why: &str| Error::Domain(format!("not a lower-bound instance: {why}"));
        if n < 2 || inst.demand.len() != n + 1 {
            return Err(wrong("needs n >= 2 supplies and n + 1 demand types"));
        }
        if inst.supply.iter().any(|s| s.capacity != 1) {
            return Err(wrong("every capacity must be 1"));
        }
        let neighbors = inst.demand_neighbors();
        let common: Vec<usize> = (0..=n).filter(|&j| neighbors[j].len() == n).collect();
        let [common] = common.as_slice() else {
            return Err(wrong("exactly one type must be adjacent to every supply"));
        };
        let mut dedicated_supply = vec![None; n + 1];
        let mut rare_of_supply = vec![usize::MAX; n];
        for (j, nb) in neighbors.iter().enumerate() {
            if j == *common {
                continue;
            }
            let [i] = nb.as_slice() else {
                return Err(wrong("rare types must have exactly one neighbor"));
            };
            if rare_of_supply[*i] != usize::MAX {
                return Err(wrong("two rare types share a supply agent"));
            }
            rare_of_supply[*i] = j;
            dedicated_supply[j] = Some(*i);
        }
        Ok(Self {
            n,
            common: *common,
            dedicated_supply,
            rare_of_supply,
        })
    }
}

/// The lower-bound family: `n` unit-capacity supplies, `n` rare types of
/// rate `1/n` each tied to one supply, and a common type of rate `n - 1`
/// adjacent to every supply. Groups are singletons with `mu_j = lambda_j / n`.
///
/// The common type is demand index 0; rare type `j` (index `j`) is served by supply `j - 1`.
pub fn generate_lower_bound_instance(n: usize) -> Result<Instance> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "lower-bound instance needs n >= 2, got {n}"
        )));
    }
    let n_f = n as f64;
    let supply = (1..=n)
        .map(|i| SupplyAgent {
            id: format!("s{i}"),
            capacity: 1,
        })
        .collect();
    let mut demand = vec![DemandType {
        id: "c0".into(),
        rate: n_f - 1.0,
    }];
    demand.extend((1..=n).map(|j| DemandType {
        id: format!("r{j}"),
        rate: 1.0 / n_f,
    }));
    let mut edges: Vec<Edge> = (1..=n)
        .map(|j| Edge {
            supply: j - 1,
            demand: j,
        })
        .collect();
    edges.extend((0..n).map(|i| Edge {
        supply: i,
        demand: 0,
    }));
    let groups = demand
        .iter()
        .enumerate()
        .map(|(j, d)| Group {
            id: format!("g-{}", d.id),
            members: vec![j],
            target: d.rate / n_f,
        })
        .collect();
    Ok(Instance {
        supply,
        demand,
        edges,
        groups,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousParams {
    pub n_supply: usize,
    pub n_demand: usize,
    pub avg_degree: usize,
    pub capacity: u32,
    pub kappa_floor: f64,
}

impl HomogeneousParams {
    /// 500 x 500, degree 10, capacity 5.
    pub fn reference_scale(kappa_floor: f64) -> Self {
        Self {
            n_supply: 500,
            n_demand: 500,
            avg_degree: 10,
            capacity: 5,
            kappa_floor,
        }
    }
}

const MAX_KAPPA_DRAWS: usize = 10_000;

/// Random bipartite graph with uniform capacities and singleton groups.
///
/// Each demand type gets `avg_degree` distinct uniform supply neighbors.
/// Rates are drawn uniformly from `[0.5, 1.5]` and scaled so that
/// `lambda = B`. Each `kappa_j` is drawn from the grid
/// `{kappa_floor, kappa_floor + 0.1, ..., 2 - kappa_floor}`, one random type
/// is pinned to `kappa_floor`, and `mu_j = lambda_j / (lambda kappa_j)`.
/// Draws of `kappa` are repeated until every `mu_j < 1` and `sum mu_j >= 1`.
pub fn generate_homogeneous_synthetic(params: HomogeneousParams, seed: u64) -> Result<Instance> {
    let HomogeneousParams {
        n_supply,
        n_demand,
        avg_degree,
        capacity,
        kappa_floor,
    } = params;
    if !(kappa_floor > 0.0 && kappa_floor <= 1.0) {
        return Err(Error::Domain(format!(
            "kappa_floor must lie in (0, 1], got {kappa_floor}"
        )));
    }
    if n_supply == 0 || n_demand < 2 || avg_degree == 0 || capacity == 0 {
        return Err(Error::Domain(
            "homogeneous generator needs positive counts and at least two demand types".into(),
        ));
    }
    if avg_degree > n_supply {
        return Err(Error::Domain(format!(
            "avg_degree {avg_degree} exceeds the number of supply agents {n_supply}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let supply = (0..n_supply)
        .map(|i| SupplyAgent {
            id: format!("s{i:04}"),
            capacity,
        })
        .collect::<Vec<_>>();

    let all_supply: Vec<usize> = (0..n_supply).collect();
    let mut edges = Vec::with_capacity(n_demand * avg_degree);
    for j in 0..n_demand {
        let mut nb: Vec<usize> = all_supply
            .choose_multiple(&mut rng, avg_degree)
            .copied()
            .collect();
        nb.sort_unstable();
        edges.extend(nb.into_iter().map(|i| Edge {
            supply: i,
            demand: j,
        }));
    }

    let raw: Vec<f64> = (0..n_demand).map(|_| rng.random_range(0.5..1.5)).collect();
    let raw_total: f64 = raw.iter().sum();
    let lambda = f64::from(capacity) * n_supply as f64;
    let rates: Vec<f64> = raw.iter().map(|r| r / raw_total * lambda).collect();
    let lambda: f64 = rates.iter().sum();

    let steps = ((2.0 - 2.0 * kappa_floor) / 0.1).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| kappa_floor + 0.1 * k as f64).collect();

    let mut mu = None;
    for _ in 0..MAX_KAPPA_DRAWS {
        let pinned = rng.random_range(0..n_demand);
        let kappa: Vec<f64> = (0..n_demand)
            .map(|j| {
                if j == pinned {
                    kappa_floor
                } else {
                    *grid.choose(&mut rng).expect("grid is nonempty")
                }
            })
            .collect();
        let candidate: Vec<f64> = rates
            .iter()
            .zip(&kappa)
            .map(|(r, k)| r / (lambda * k))
            .collect();
        let sum: f64 = candidate.iter().sum();
        if sum >= 1.0 - 1e-12 && candidate.iter().all(|&m| m > 0.0 && m < 1.0) {
            mu = Some(candidate);
            break;
        }
    }
    let mu = mu.ok_or_else(|| {
        Error::Domain("could not draw targets with sum >= 1 and each below 1".into())
    })?;

    let demand = rates
        .iter()
        .enumerate()
        .map(|(j, &rate)| DemandType {
            id: format!("d{j:04}"),
            rate,
        })
        .collect::<Vec<_>>();
    let groups = mu
        .iter()
        .enumerate()
        .map(|(j, &target)| Group {
            id: format!("g{j:04}"),
            members: vec![j],
            target,
        })
        .collect();
    Ok(Instance {
        supply,
        demand,
        edges,
        groups,
    })
}

/// County adjacency on a triangulated grid with a few crossing diagonals.
fn county_adjacency(rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let cols = TABLE1_GRID_COLS;
    let exists = |r: usize, c: usize| c < cols && r * cols + c < TABLE1_COUNTIES;
    let id = |r: usize, c: usize| r * cols + c;
    let rows = TABLE1_COUNTIES.div_ceil(cols);
    let mut adj = Vec::new();
    let mut cells = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if !exists(r, c) {
                continue;
            }
            if exists(r, c + 1) {
                adj.push((id(r, c), id(r, c + 1)));
            }
            if exists(r + 1, c) {
                adj.push((id(r, c), id(r + 1, c)));
            }
            if exists(r + 1, c + 1) && exists(r, c + 1) && exists(r + 1, c) {
                cells.push((r, c));
                if rng.random_bool(0.5) {
                    adj.push((id(r, c), id(r + 1, c + 1)));
                } else {
                    adj.push((id(r, c + 1), id(r + 1, c)));
                }
            }
        }
    }
    // The second diagonal of a few random cells.
    for &(r, c) in cells.choose_multiple(rng, TABLE1_EXTRA_DIAGONALS) {
        let a = (id(r, c), id(r + 1, c + 1));
        let b = (id(r, c + 1), id(r + 1, c));
        if adj.contains(&a) {
            adj.push(b);
        } else {
            adj.push(a);
        }
    }
    adj
}

/// Proportional rescale of positive weights to an integer total with every
/// entry at least 1. The largest entry absorbs the rounding remainder.
fn integer_capacities(weights: &[f64], total: u32) -> Vec<u32> {
    let sum: f64 = weights.iter().sum();
    let top = weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("weights are nonempty");
    let mut caps: Vec<u32> = weights
        .iter()
        .map(|w| ((w / sum * f64::from(total)).round() as u32).max(1))
        .collect();
    let others: u32 = caps
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != top)
        .map(|(_, c)| c)
        .sum();
    caps[top] = total - others;
    caps
}

/// Synthetic instance with the shape of the county-level baseline: 87 counties
/// x 3 products of supply, 87 counties x 5 races of demand, same-or-adjacent
/// county edges, `B = 10^4`, `lambda = B` and Table-1 group targets.
pub fn generate_table1_shaped(seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let adjacency = county_adjacency(&mut rng);

    let mut ranks: Vec<usize> = (0..TABLE1_COUNTIES).collect();
    ranks.shuffle(&mut rng);
    let county_weight: Vec<f64> = ranks.iter().map(|&r| ((r + 1) as f64).powf(-1.3)).collect();

    // Supply: county weight x product share x noise, with the largest agent
    // pinned to its baseline share of the total.
    let noise = LogNormal::new(0.0, 0.25).expect("valid log-normal");
    let mut supply_weight = Vec::with_capacity(TABLE1_COUNTIES * PRODUCTS.len());
    for &w in &county_weight {
        for &(_, share) in &PRODUCTS {
            supply_weight.push(w * share * noise.sample(&mut rng));
        }
    }
    pin_top_share(
        &mut supply_weight,
        TABLE1_MAX_CAPACITY / f64::from(TABLE1_TOTAL_CAPACITY),
    );
    let capacities = integer_capacities(&supply_weight, TABLE1_TOTAL_CAPACITY);

    let mut supply = Vec::with_capacity(capacities.len());
    for c in 0..TABLE1_COUNTIES {
        for (p, &(product, _)) in PRODUCTS.iter().enumerate() {
            supply.push(SupplyAgent {
                id: format!("c{c:02}-{product}"),
                capacity: capacities[c * PRODUCTS.len() + p],
            });
        }
    }

    // Demand: per race, a county distribution normalized to the race's
    // share `kappa_g * mu_g` of lambda.
    let lambda = f64::from(TABLE1_TOTAL_CAPACITY);
    let mut race_share: Vec<f64> = TABLE1_TARGETS
        .iter()
        .map(|(race, mu)| {
            TABLE1_KAPPAS
                .iter()
                .find(|(r, _)| r == race)
                .map_or(0.0, |(_, k)| k * mu)
        })
        .collect();
    let w_share = 1.0 - race_share.iter().sum::<f64>();
    race_share[4] = w_share;

    let n_races = TABLE1_TARGETS.len();
    let mut rates = vec![0.0; TABLE1_COUNTIES * n_races];
    for (r, &spread) in RACE_SPREAD.iter().enumerate() {
        let county_noise = LogNormal::new(0.0, spread).expect("valid log-normal");
        let mut weights: Vec<f64> = county_weight
            .iter()
            .map(|w| w * county_noise.sample(&mut rng))
            .collect();
        let race_total = lambda * race_share[r];
        if r == n_races - 1 {
            pin_top_share(&mut weights, TABLE1_MAX_RATE / race_total);
        }
        let sum: f64 = weights.iter().sum();
        let mut cell: Vec<f64> = weights.iter().map(|w| w / sum * race_total).collect();
        clamp_min_preserving_total(&mut cell, TABLE1_MIN_RATE);
        for (c, v) in cell.into_iter().enumerate() {
            rates[c * n_races + r] = v;
        }
    }

    let mut demand = Vec::with_capacity(rates.len());
    for c in 0..TABLE1_COUNTIES {
        for (r, (race, _)) in TABLE1_TARGETS.iter().enumerate() {
            demand.push(DemandType {
                id: format!("c{c:02}-{race}"),
                rate: rates[c * n_races + r],
            });
        }
    }

    let mut near = vec![vec![false; TABLE1_COUNTIES]; TABLE1_COUNTIES];
    for (c, row) in near.iter_mut().enumerate() {
        row[c] = true;
    }
    for &(a, b) in &adjacency {
        near[a][b] = true;
        near[b][a] = true;
    }
    let mut edges = Vec::new();
    for (j, _) in demand.iter().enumerate() {
        let dc = j / n_races;
        for (i, _) in supply.iter().enumerate() {
            if near[dc][i / PRODUCTS.len()] {
                edges.push(Edge {
                    supply: i,
                    demand: j,
                });
            }
        }
    }

    let groups = TABLE1_TARGETS
        .iter()
        .enumerate()
        .map(|(r, (race, target))| Group {
            id: race.to_string(),
            members: (0..TABLE1_COUNTIES).map(|c| c * n_races + r).collect(),
            target: *target,
        })
        .collect();

    Ok(Instance {
        supply,
        demand,
        edges,
        groups,
    })
}

/// Rescales the largest weight so that it holds `share` of the total.
fn pin_top_share(weights: &mut [f64], share: f64) {
    let top = weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("weights are nonempty");
    let others: f64 = weights.iter().sum::<f64>() - weights[top];
    weights[top] = share / (1.0 - share) * others;
}

/// Raises entries below `floor` to it and scales the rest down to keep the sum.
fn clamp_min_preserving_total(values: &mut [f64], floor: f64) {
    let total: f64 = values.iter().sum();
    let clamped = values.iter().filter(|&&v| v < floor).count();
    if clamped == 0 {
        return;
    }
    let free_total: f64 = values.iter().filter(|&&v| v >= floor).sum();
    let scale = (total - floor * clamped as f64) / free_total;
    for v in values.iter_mut() {
        *v = if *v < floor { floor } else { *v * scale };
    }
}
