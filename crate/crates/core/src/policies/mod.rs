//! Online assignment policies.
//!
//! A [`Policy`] holds everything that is shared across runs (neighborhoods,
//! sampling tables, the lower-bound layout). Each run owns a [`PolicyState`].

pub(crate) mod offline;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{ExampleOneLayout, Instance};
use crate::lp::{LpKind, LpSolution};
use crate::poisson_math::S_DEGENERATE;

pub use offline::offline_rare_first;

/// Negative reject mass down to this value is treated as LP round-off.
pub const REJECT_CLAMP: f64 = -1e-9;
/// A sampling row summing above `1 + ROW_SUM_TOL` is rejected.
pub const ROW_SUM_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    Samp,
    SampS,
    Greedy,
    Uniform,
    Ranking,
    AlgTau(f64),
}

impl PolicyKind {
    /// The LP solution a policy consumes, if any. SAMP-S expects the
    /// normalized homogeneous solution.
    pub fn lp_input(&self) -> Option<LpKind> {
        match self {
            PolicyKind::Samp => Some(LpKind::General),
            PolicyKind::SampS => Some(LpKind::Homogeneous),
            _ => None,
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::Samp => f.write_str("samp"),
            PolicyKind::SampS => f.write_str("samp-s"),
            PolicyKind::Greedy => f.write_str("greedy"),
            PolicyKind::Uniform => f.write_str("uniform"),
            PolicyKind::Ranking => f.write_str("ranking"),
            PolicyKind::AlgTau(t) => write!(f, "alg-tau:{t}"),
        }
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "samp" => PolicyKind::Samp,
            "samp-s" => PolicyKind::SampS,
            "greedy" => PolicyKind::Greedy,
            "uniform" => PolicyKind::Uniform,
            "ranking" => PolicyKind::Ranking,
            _ => {
                let tau = s
                    .strip_prefix("alg-tau:")
                    .ok_or_else(|| Error::Policy(format!("unknown policy {s:?}")))?;
                let tau: f64 = tau
                    .parse()
                    .map_err(|_| Error::Policy(format!("bad threshold in {s:?}")))?;
                if !(0.0..=1.0).contains(&tau) {
                    return Err(Error::Policy(format!("threshold {tau} outside [0, 1]")));
                }
                PolicyKind::AlgTau(tau)
            }
        })
    }
}

impl Serialize for PolicyKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for PolicyKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    SampledReject,
    SampledFull,
    NoAvailableNeighbor,
    BelowThresholdTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Assigned(usize),
    Rejected(RejectReason),
}

/// Categorical distribution over a type's neighbors plus a trailing reject outcome.
#[derive(Debug, Clone)]
pub struct SamplingRow {
    /// Supply index per outcome; the reject outcome is not listed.
    pub supply: Vec<usize>,
    /// Probabilities aligned with `supply`, followed by the reject mass.
    pub probs: Vec<f64>,
    alias: WeightedAliasIndex<f64>,
}

impl SamplingRow {
    fn new(supply: Vec<usize>, mut probs: Vec<f64>, type_id: &str) -> Result<Self> {
        let total: f64 = probs.iter().sum();
        if total > 1.0 + ROW_SUM_TOL {
            return Err(Error::Policy(format!(
                "sampling row for {type_id} sums to {total} > 1"
            )));
        }
        let reject = 1.0 - total;
        if reject < REJECT_CLAMP {
            return Err(Error::Policy(format!(
                "negative reject mass {reject} for {type_id}"
            )));
        }
        probs.push(reject.max(0.0));
        let alias = WeightedAliasIndex::new(probs.clone())
            .map_err(|e| Error::Policy(format!("sampling row for {type_id}: {e}")))?;
        Ok(Self {
            supply,
            probs,
            alias,
        })
    }

    pub fn reject_mass(&self) -> f64 {
        *self.probs.last().expect("reject entry")
    }

    /// Sampling probability of supply `i`, 0 when absent.
    pub fn prob_of(&self, i: usize) -> f64 {
        self.supply
            .iter()
            .zip(&self.probs)
            .filter(|(&s, _)| s == i)
            .map(|(_, &p)| p)
            .sum()
    }

    /// Draws a supply index, or `None` for the reject outcome.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        self.supply.get(self.alias.sample(rng)).copied()
    }
}

#[derive(Debug, Clone)]
enum Rule {
    Sampling(Vec<SamplingRow>),
    Greedy,
    Uniform,
    Ranking,
    AlgTau { tau: f64, layout: ExampleOneLayout },
}

/// A policy prepared for one instance, shared read-only across runs.
#[derive(Debug, Clone)]
pub struct Policy {
    kind: PolicyKind,
    capacity: Vec<u32>,
    neighbors: Vec<Vec<usize>>,
    rule: Rule,
}

/// Per-run mutable state.
#[derive(Debug, Clone)]
pub struct PolicyState {
    pub remaining: Vec<u32>,
    /// Position of each supply agent in the run's random order (RANKING).
    rank: Vec<u32>,
    /// The run's random order of supply agents (ALG(tau)).
    order: Vec<usize>,
    /// Every agent before this position in `order` is full.
    cursor: usize,
    scratch: Vec<usize>,
}

impl PolicyState {
    pub fn assigned(&self, capacity: &[u32]) -> u64 {
        capacity
            .iter()
            .zip(&self.remaining)
            .map(|(&b, &r)| u64::from(b - r))
            .sum()
    }
}

fn check_alignment(inst: &Instance, sol: &LpSolution) -> Result<()> {
    if sol.x.len() != inst.edges.len() {
        return Err(Error::Policy(format!(
            "LP solution has {} edge values, instance has {} edges",
            sol.x.len(),
            inst.edges.len()
        )));
    }
    Ok(())
}

fn sampling_rows(
    inst: &Instance,
    sol: &LpSolution,
    scale: impl Fn(usize) -> f64,
) -> Result<Vec<SamplingRow>> {
    let mut supply = vec![Vec::new(); inst.demand.len()];
    let mut probs = vec![Vec::new(); inst.demand.len()];
    for (e, &x) in inst.edges.iter().zip(&sol.x) {
        supply[e.demand].push(e.supply);
        probs[e.demand].push(x.max(0.0) / scale(e.demand));
    }
    supply
        .into_iter()
        .zip(probs)
        .zip(&inst.demand)
        .map(|((s, p), d)| SamplingRow::new(s, p, &d.id))
        .collect()
}

impl Policy {
    fn with_rule(kind: PolicyKind, inst: &Instance, rule: Rule) -> Self {
        Self {
            kind,
            capacity: inst.supply.iter().map(|s| s.capacity).collect(),
            neighbors: inst.demand_neighbors(),
            rule,
        }
    }

    /// SAMP: sample neighbor `i` with probability `x_ij / lambda_j`.
    pub fn samp(inst: &Instance, sol: &LpSolution) -> Result<Self> {
        check_alignment(inst, sol)?;
        let rows = sampling_rows(inst, sol, |j| inst.demand[j].rate)?;
        Ok(Self::with_rule(
            PolicyKind::Samp,
            inst,
            Rule::Sampling(rows),
        ))
    }

    /// SAMP-S on a normalized homogeneous solution: over-represented types
    /// sample with `x_ij / (lambda_j s*)`, the others with `x_ij / (lambda mu_j s*)`.
    pub fn samp_s(inst: &Instance, sol: &LpSolution) -> Result<Self> {
        check_alignment(inst, sol)?;
        let view = inst
            .homogeneous_view()
            .ok_or_else(|| Error::Policy("samp-s requires homogeneous groups".into()))?;
        let s = sol.s_star;
        if s <= S_DEGENERATE {
            return Err(Error::Policy(format!("samp-s undefined for s* = {s}")));
        }
        let lambda = inst.total_rate();
        let rows = sampling_rows(inst, sol, |j| {
            if view.kappa[j] > 1.0 {
                inst.demand[j].rate * s
            } else {
                lambda * view.mu[j] * s
            }
        })?;
        Ok(Self::with_rule(
            PolicyKind::SampS,
            inst,
            Rule::Sampling(rows),
        ))
    }

    /// Policies that need no LP solution.
    pub fn heuristic(kind: PolicyKind, inst: &Instance) -> Result<Self> {
        let rule = match kind {
            PolicyKind::Greedy => Rule::Greedy,
            PolicyKind::Uniform => Rule::Uniform,
            PolicyKind::Ranking => Rule::Ranking,
            PolicyKind::AlgTau(tau) => Rule::AlgTau {
                tau,
                layout: ExampleOneLayout::detect(inst)?,
            },
            PolicyKind::Samp | PolicyKind::SampS => {
                return Err(Error::Policy(format!("{kind} needs an LP solution")))
            }
        };
        Ok(Self::with_rule(kind, inst, rule))
    }

    /// Builds any policy; `sol` must be the solution named by [`PolicyKind::lp_input`].
    pub fn build(kind: PolicyKind, inst: &Instance, sol: Option<&LpSolution>) -> Result<Self> {
        match (kind, sol) {
            (PolicyKind::Samp, Some(sol)) => Self::samp(inst, sol),
            (PolicyKind::SampS, Some(sol)) => Self::samp_s(inst, sol),
            _ => Self::heuristic(kind, inst),
        }
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn capacity(&self) -> &[u32] {
        &self.capacity
    }

    pub fn sampling_table(&self) -> Option<&[SamplingRow]> {
        match &self.rule {
            Rule::Sampling(rows) => Some(rows),
            _ => None,
        }
    }

    /// Fresh state for one run. Draws the run's random order when the policy uses one.
    pub fn new_state<R: Rng + ?Sized>(&self, rng: &mut R) -> PolicyState {
        let n = self.capacity.len();
        let mut state = PolicyState {
            remaining: self.capacity.clone(),
            rank: Vec::new(),
            order: Vec::new(),
            cursor: 0,
            scratch: Vec::new(),
        };
        match self.rule {
            Rule::Ranking => {
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(rng);
                state.rank = vec![0; n];
                for (pos, &i) in order.iter().enumerate() {
                    state.rank[i] = pos as u32;
                }
            }
            Rule::AlgTau { .. } => {
                state.order = (0..n).collect();
                state.order.shuffle(rng);
            }
            _ => {}
        }
        state
    }

    /// Handles one arrival of type `j` at time `t`.
    pub fn decide<R: Rng + ?Sized>(
        &self,
        state: &mut PolicyState,
        j: usize,
        t: f64,
        rng: &mut R,
    ) -> Result<Decision> {
        let neighbors = self
            .neighbors
            .get(j)
            .ok_or_else(|| Error::Policy(format!("unknown demand type index {j}")))?;
        let rem = &state.remaining;
        let pick = match &self.rule {
            Rule::Sampling(rows) => match rows[j].sample(rng) {
                None => return Ok(Decision::Rejected(RejectReason::SampledReject)),
                Some(i) if rem[i] == 0 => return Ok(Decision::Rejected(RejectReason::SampledFull)),
                Some(i) => Some(i),
            },
            Rule::Greedy => neighbors.iter().copied().filter(|&i| rem[i] > 0).fold(
                None,
                |best: Option<usize>, i| match best {
                    Some(b) if rem[b] > rem[i] || (rem[b] == rem[i] && b < i) => Some(b),
                    _ => Some(i),
                },
            ),
            Rule::Uniform => {
                state.scratch.clear();
                state
                    .scratch
                    .extend(neighbors.iter().copied().filter(|&i| rem[i] > 0));
                if state.scratch.is_empty() {
                    None
                } else {
                    Some(state.scratch[rng.random_range(0..state.scratch.len())])
                }
            }
            Rule::Ranking => neighbors
                .iter()
                .copied()
                .filter(|&i| rem[i] > 0)
                .max_by_key(|&i| state.rank[i]),
            Rule::AlgTau { tau, layout } => {
                if let Some(i) = layout.dedicated_supply[j] {
                    (rem[i] > 0).then_some(i)
                } else if t < *tau {
                    return Ok(Decision::Rejected(RejectReason::BelowThresholdTime));
                } else {
                    while state.cursor < state.order.len() && rem[state.order[state.cursor]] == 0 {
                        state.cursor += 1;
                    }
                    state.order.get(state.cursor).copied()
                }
            }
        };
        match pick {
            Some(i) => {
                assert!(state.remaining[i] > 0, "assignment to a full supply agent");
                state.remaining[i] -= 1;
                Ok(Decision::Assigned(i))
            }
            None => Ok(Decision::Rejected(RejectReason::NoAvailableNeighbor)),
        }
    }
}

/// Convenience wrapper for [`Policy::samp`].
pub fn samp_build(inst: &Instance, sol: &LpSolution) -> Result<Policy> {
    Policy::samp(inst, sol)
}

/// Convenience wrapper for [`Policy::samp_s`].
pub fn samp_s_build(inst: &Instance, sol: &LpSolution) -> Result<Policy> {
    Policy::samp_s(inst, sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::two_by_two;
    use crate::instance::{
        generate_homogeneous_synthetic, generate_lower_bound_instance, DemandType, Edge, Group,
        HomogeneousParams, SupplyAgent,
    };
    use crate::lp::{
        build_general_lp, build_homogeneous_lp, normalize_homogeneous, solve, FEASIBILITY_TOL,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn general(inst: &Instance) -> LpSolution {
        solve(inst, &build_general_lp(inst), FEASIBILITY_TOL).unwrap()
    }

    fn normalized(inst: &Instance) -> LpSolution {
        let sol = solve(inst, &build_homogeneous_lp(inst).unwrap(), FEASIBILITY_TOL).unwrap();
        normalize_homogeneous(&sol, inst).unwrap()
    }

    fn with_x(inst: &Instance, x: Vec<f64>) -> LpSolution {
        let mut sol = general(inst);
        sol.x = x;
        sol
    }

    fn row_sums_ok(p: &Policy) {
        for row in p.sampling_table().unwrap() {
            assert!((row.probs.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            assert!(row.probs.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for name in [
            "samp",
            "samp-s",
            "greedy",
            "uniform",
            "ranking",
            "alg-tau:0.25",
        ] {
            let k: PolicyKind = name.parse().unwrap();
            assert_eq!(k.to_string(), name);
        }
        assert!("alg-tau:1.5".parse::<PolicyKind>().is_err());
        assert!("alg-tau:x".parse::<PolicyKind>().is_err());
        assert!("best".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn full_edge_mass_is_deterministic() {
        let inst = Instance {
            supply: vec![SupplyAgent {
                id: "s".into(),
                capacity: 5,
            }],
            demand: vec![DemandType {
                id: "d".into(),
                rate: 2.0,
            }],
            edges: vec![Edge {
                supply: 0,
                demand: 0,
            }],
            groups: vec![Group {
                id: "g".into(),
                members: vec![0],
                target: 0.5,
            }],
        };
        let p = samp_build(&inst, &with_x(&inst, vec![2.0])).unwrap();
        let row = &p.sampling_table().unwrap()[0];
        assert_eq!(row.reject_mass(), 0.0);
        let mut r = rng(1);
        let mut st = p.new_state(&mut r);
        for _ in 0..5 {
            assert_eq!(
                p.decide(&mut st, 0, 0.1, &mut r).unwrap(),
                Decision::Assigned(0)
            );
        }
        assert_eq!(
            p.decide(&mut st, 0, 0.2, &mut r).unwrap(),
            Decision::Rejected(RejectReason::SampledFull)
        );
    }

    #[test]
    fn zero_solution_always_rejects() {
        let inst = two_by_two();
        let p = samp_build(&inst, &with_x(&inst, vec![0.0; inst.edges.len()])).unwrap();
        let mut r = rng(2);
        let mut st = p.new_state(&mut r);
        for j in 0..2 {
            assert_eq!(
                p.decide(&mut st, j, 0.5, &mut r).unwrap(),
                Decision::Rejected(RejectReason::SampledReject)
            );
        }
    }

    #[test]
    fn oversized_row_is_rejected() {
        let inst = two_by_two();
        let x = vec![0.6, 0.0, 0.6, 0.0];
        assert!(samp_build(&inst, &with_x(&inst, x)).is_err());
        // Round-off below the clamp is tolerated.
        let x = vec![0.5, 0.0, 0.5 + 5e-10, 0.0];
        let p = samp_build(&inst, &with_x(&inst, x)).unwrap();
        assert_eq!(p.sampling_table().unwrap()[0].reject_mass(), 0.0);
    }

    #[test]
    fn lower_bound_tables() {
        let n = 5;
        let inst = generate_lower_bound_instance(n).unwrap();
        let samp = samp_build(&inst, &general(&inst)).unwrap();
        let samp_s = samp_s_build(&inst, &normalized(&inst)).unwrap();
        row_sums_ok(&samp);
        for p in [&samp, &samp_s] {
            let rows = p.sampling_table().unwrap();
            for (j, row) in rows.iter().enumerate().skip(1) {
                assert!((row.prob_of(j - 1) - 1.0).abs() < 1e-7);
            }
            for i in 0..n {
                assert!((rows[0].prob_of(i) - 1.0 / n as f64).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn boost_dominance_and_row_sums() {
        let params = HomogeneousParams {
            n_supply: 12,
            n_demand: 15,
            avg_degree: 3,
            capacity: 2,
            kappa_floor: 0.6,
        };
        for seed in 0..8 {
            let inst = generate_homogeneous_synthetic(params, seed)
                .unwrap()
                .apply_scarcity(2.0)
                .unwrap();
            let view = inst.homogeneous_view().unwrap();
            let sol = normalized(&inst);
            let samp = samp_build(&inst, &sol).unwrap();
            let boosted = samp_s_build(&inst, &sol).unwrap();
            let (a, b) = (
                samp.sampling_table().unwrap(),
                boosted.sampling_table().unwrap(),
            );
            for j in 0..inst.demand.len() {
                for (pa, pb) in a[j].probs.iter().zip(&b[j].probs).take(a[j].supply.len()) {
                    assert!(pb + 1e-12 >= *pa);
                }
                let sum: f64 = b[j].probs[..b[j].supply.len()].iter().sum();
                if view.kappa[j] > 1.0 {
                    assert!((sum - 1.0 / view.kappa[j]).abs() < 1e-6, "{sum}");
                } else {
                    assert!((sum - 1.0).abs() < 1e-6, "{sum}");
                }
            }
        }
    }

    #[test]
    fn samp_s_rejects_degenerate_value() {
        let inst = generate_lower_bound_instance(3).unwrap();
        let mut sol = normalized(&inst);
        sol.s_star = 0.0;
        assert!(samp_s_build(&inst, &sol).is_err());
    }

    #[test]
    fn sampled_full_leaves_capacity() {
        let inst = generate_lower_bound_instance(2).unwrap();
        let p = samp_build(&inst, &general(&inst)).unwrap();
        let mut r = rng(3);
        let mut st = p.new_state(&mut r);
        assert_eq!(
            p.decide(&mut st, 1, 0.1, &mut r).unwrap(),
            Decision::Assigned(0)
        );
        assert_eq!(
            p.decide(&mut st, 1, 0.2, &mut r).unwrap(),
            Decision::Rejected(RejectReason::SampledFull)
        );
        assert_eq!(st.remaining, vec![0, 1]);
    }

    #[test]
    fn samp_draws_ignore_capacity() {
        let inst = two_by_two();
        let p = samp_build(&inst, &general(&inst)).unwrap();
        let arrivals = [0, 1, 1, 0, 1, 1, 1, 0, 1, 1, 0, 1];
        let run = |capacity: u32| {
            let mut r = rng(9);
            let mut st = p.new_state(&mut r);
            st.remaining.iter_mut().for_each(|c| *c = capacity);
            let mut draws = Vec::new();
            for &j in &arrivals {
                // Record the draw independently of the outcome.
                let mut peek = r.clone();
                draws.push(p.sampling_table().unwrap()[j].sample(&mut peek));
                p.decide(&mut st, j, 0.0, &mut r).unwrap();
            }
            draws
        };
        assert_eq!(run(0), run(100));
    }

    #[test]
    fn greedy_breaks_ties_by_index() {
        let mut inst = two_by_two();
        inst.supply[1].capacity = 2;
        let p = Policy::heuristic(PolicyKind::Greedy, &inst).unwrap();
        let mut r = rng(4);
        let mut st = p.new_state(&mut r);
        st.remaining = vec![3, 3];
        assert_eq!(
            p.decide(&mut st, 0, 0.0, &mut r).unwrap(),
            Decision::Assigned(0)
        );
        assert_eq!(
            p.decide(&mut st, 0, 0.0, &mut r).unwrap(),
            Decision::Assigned(1)
        );
        st.remaining = vec![1, 4];
        assert_eq!(
            p.decide(&mut st, 1, 0.0, &mut r).unwrap(),
            Decision::Assigned(1)
        );
    }

    #[test]
    fn heuristics_reject_only_when_neighborhood_is_empty() {
        let inst = two_by_two();
        for kind in [PolicyKind::Greedy, PolicyKind::Uniform, PolicyKind::Ranking] {
            let p = Policy::heuristic(kind, &inst).unwrap();
            let mut r = rng(5);
            let mut st = p.new_state(&mut r);
            let total = inst.total_capacity();
            for k in 0..total {
                assert!(matches!(
                    p.decide(&mut st, (k % 2) as usize, 0.0, &mut r).unwrap(),
                    Decision::Assigned(_)
                ));
            }
            assert_eq!(st.assigned(p.capacity()), total);
            assert_eq!(
                p.decide(&mut st, 0, 0.0, &mut r).unwrap(),
                Decision::Rejected(RejectReason::NoAvailableNeighbor)
            );
        }
    }

    #[test]
    fn ranking_prefers_largest_position() {
        let inst = two_by_two();
        let p = Policy::heuristic(PolicyKind::Ranking, &inst).unwrap();
        let mut r = rng(6);
        let mut st = p.new_state(&mut r);
        let top = if st.rank[0] > st.rank[1] { 0 } else { 1 };
        assert_eq!(
            p.decide(&mut st, 0, 0.0, &mut r).unwrap(),
            Decision::Assigned(top)
        );
    }

    #[test]
    fn uniform_spreads_over_neighbors() {
        let inst = two_by_two();
        let p = Policy::heuristic(PolicyKind::Uniform, &inst).unwrap();
        let mut r = rng(7);
        let mut hits = [0u32; 2];
        for _ in 0..4000 {
            let mut st = p.new_state(&mut r);
            if let Decision::Assigned(i) = p.decide(&mut st, 0, 0.0, &mut r).unwrap() {
                hits[i] += 1;
            }
        }
        assert!((hits[0] as f64 - 2000.0).abs() < 150.0, "{hits:?}");
    }

    #[test]
    fn alg_tau_threshold() {
        let inst = generate_lower_bound_instance(4).unwrap();
        let p = Policy::heuristic(PolicyKind::AlgTau(1.0), &inst).unwrap();
        let mut r = rng(8);
        let mut st = p.new_state(&mut r);
        assert_eq!(
            p.decide(&mut st, 0, 0.99, &mut r).unwrap(),
            Decision::Rejected(RejectReason::BelowThresholdTime)
        );
        assert_eq!(
            p.decide(&mut st, 2, 0.5, &mut r).unwrap(),
            Decision::Assigned(1)
        );

        let p = Policy::heuristic(PolicyKind::AlgTau(0.0), &inst).unwrap();
        let mut st = p.new_state(&mut r);
        let order = st.order.clone();
        for &i in &order {
            assert_eq!(
                p.decide(&mut st, 0, 0.1, &mut r).unwrap(),
                Decision::Assigned(i)
            );
        }
        assert_eq!(
            p.decide(&mut st, 3, 0.5, &mut r).unwrap(),
            Decision::Rejected(RejectReason::NoAvailableNeighbor)
        );
        assert!(Policy::heuristic(PolicyKind::AlgTau(0.5), &two_by_two()).is_err());
    }

    #[test]
    fn unknown_type_is_an_error() {
        let inst = two_by_two();
        let p = Policy::heuristic(PolicyKind::Greedy, &inst).unwrap();
        let mut r = rng(0);
        let mut st = p.new_state(&mut r);
        assert!(p.decide(&mut st, 7, 0.0, &mut r).is_err());
    }
}
