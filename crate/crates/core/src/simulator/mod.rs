//! Poisson arrivals over the unit horizon, replicated policy runs and
//! equity metrics.

mod metrics;
mod rng;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{generate_lower_bound_instance, ExampleOneLayout, Instance};
use crate::policies::{Decision, Policy, PolicyKind};

pub(crate) use metrics::Accumulator;
pub use metrics::{fmt_f64, GroupMetrics, MeanSe, MetricsReport, CSV_COLUMNS};
pub use rng::{stream, Purpose};

/// Replications per parallel work unit. Fixed so that results do not depend
/// on the thread count.
const BLOCK: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub demand: usize,
    pub time: f64,
}

/// Merged-process sampler: exponential gaps at rate `lambda`, types drawn
/// with probability `lambda_j / lambda`.
#[derive(Debug, Clone)]
pub struct ArrivalSampler {
    gap: Exp<f64>,
    types: WeightedAliasIndex<f64>,
}

impl ArrivalSampler {
    pub fn new(inst: &Instance) -> Result<Self> {
        let lambda = inst.total_rate();
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!(
                "total arrival rate must be positive, got {lambda}"
            )));
        }
        let gap = Exp::new(lambda).map_err(|e| Error::Domain(e.to_string()))?;
        let types = WeightedAliasIndex::new(inst.demand.iter().map(|d| d.rate).collect())
            .map_err(|e| Error::Domain(format!("arrival rates: {e}")))?;
        Ok(Self { gap, types })
    }

    /// Fills `out` with one time-ordered arrival sequence on `[0, 1]`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<Arrival>) {
        out.clear();
        let mut t = 0.0;
        loop {
            t += self.gap.sample(rng);
            if t > 1.0 {
                break;
            }
            out.push(Arrival {
                demand: self.types.sample(rng),
                time: t,
            });
        }
    }
}

pub fn generate_arrivals<R: Rng + ?Sized>(inst: &Instance, rng: &mut R) -> Result<Vec<Arrival>> {
    let mut out = Vec::new();
    ArrivalSampler::new(inst)?.sample_into(rng, &mut out);
    Ok(out)
}

/// Arrival and served counts per demand type for one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunOutcome {
    pub arrivals: Vec<u64>,
    pub served: Vec<u64>,
}

impl RunOutcome {
    fn empty(n: usize) -> Self {
        Self {
            arrivals: vec![0; n],
            served: vec![0; n],
        }
    }

    pub fn total_arrivals(&self) -> u64 {
        self.arrivals.iter().sum()
    }

    pub fn total_served(&self) -> u64 {
        self.served.iter().sum()
    }

    pub fn group_arrivals(&self, inst: &Instance) -> Vec<u64> {
        group_sums(inst, &self.arrivals)
    }

    pub fn group_served(&self, inst: &Instance) -> Vec<u64> {
        group_sums(inst, &self.served)
    }
}

fn group_sums(inst: &Instance, per_type: &[u64]) -> Vec<u64> {
    inst.groups
        .iter()
        .map(|g| g.members.iter().map(|&j| per_type[j]).sum())
        .collect()
}

fn online_run(
    policy: &Policy,
    arrivals: &[Arrival],
    n_types: usize,
    rng: &mut impl Rng,
) -> Result<RunOutcome> {
    let mut out = RunOutcome::empty(n_types);
    let mut state = policy.new_state(rng);
    for a in arrivals {
        out.arrivals[a.demand] += 1;
        if let Decision::Assigned(_) = policy.decide(&mut state, a.demand, a.time, rng)? {
            out.served[a.demand] += 1;
        }
    }
    Ok(out)
}

/// One replication of `policy`; replication `r` of `run_many` with the same
/// seed gives the same outcome.
pub fn run_once(
    inst: &Instance,
    policy: &Policy,
    master_seed: u64,
    replication: u64,
) -> Result<RunOutcome> {
    let sampler = ArrivalSampler::new(inst)?;
    let mut arrivals = Vec::new();
    sampler.sample_into(
        &mut stream(master_seed, replication, Purpose::Arrivals),
        &mut arrivals,
    );
    let mut rng = stream(master_seed, replication, Purpose::Policy);
    online_run(policy, &arrivals, inst.demand.len(), &mut rng)
}

/// Runs `one(arrivals, policy_rng)` for every replication and aggregates.
fn replicate<F>(inst: &Instance, replications: u64, master_seed: u64, one: F) -> Result<Accumulator>
where
    F: Fn(&[Arrival], &mut rand_chacha::ChaCha8Rng) -> Result<RunOutcome> + Sync,
{
    if replications == 0 {
        return Err(Error::Config("replications must be >= 1".into()));
    }
    let sampler = ArrivalSampler::new(inst)?;
    let blocks = replications.div_ceil(BLOCK);
    let parts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = Accumulator::default();
            let mut arrivals = Vec::new();
            for r in b * BLOCK..((b + 1) * BLOCK).min(replications) {
                sampler.sample_into(
                    &mut stream(master_seed, r, Purpose::Arrivals),
                    &mut arrivals,
                );
                let mut rng = stream(master_seed, r, Purpose::Policy);
                acc.push(inst, &one(&arrivals, &mut rng)?);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<Accumulator>>>()?;
    let mut total = Accumulator::default();
    for p in parts {
        total.merge(p);
    }
    Ok(total)
}

/// Replicates an online policy. `s_star` enables the competitive ratio.
pub fn run_many(
    inst: &Instance,
    policy: &Policy,
    replications: u64,
    master_seed: u64,
    s_star: Option<f64>,
) -> Result<MetricsReport> {
    let n = inst.demand.len();
    let acc = replicate(inst, replications, master_seed, |arrivals, rng| {
        online_run(policy, arrivals, n, rng)
    })?;
    Ok(acc.finish(inst, policy.kind().to_string(), s_star))
}

/// Replicates the clairvoyant rare-first allocation on a lower-bound instance.
pub fn run_many_offline_rare_first(
    inst: &Instance,
    replications: u64,
    master_seed: u64,
    s_star: Option<f64>,
) -> Result<MetricsReport> {
    let layout = ExampleOneLayout::detect(inst)?;
    let n = inst.demand.len();
    let acc = replicate(inst, replications, master_seed, |arrivals, _| {
        let served = crate::policies::offline::offline_rare_first_with(&layout, arrivals)?;
        let mut out = RunOutcome::empty(n);
        for a in arrivals {
            out.arrivals[a.demand] += 1;
        }
        out.served = served;
        Ok(out)
    })?;
    Ok(acc.finish(inst, "offline-rare-first".into(), s_star))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauEstimate {
    pub tau: f64,
    pub asr: f64,
    pub asr_se: f64,
    /// `min(tau + 1/2 - tau^2/2, 1 - tau)`.
    pub envelope: f64,
    pub report: MetricsReport,
}

pub fn tau_envelope(tau: f64) -> f64 {
    (tau + 0.5 - tau * tau / 2.0).min(1.0 - tau)
}

/// ALG(tau) on the lower-bound instance of size `n`, one estimate per threshold.
pub fn alg_tau_sweep(
    n: usize,
    taus: &[f64],
    replications: u64,
    seed: u64,
) -> Result<Vec<TauEstimate>> {
    let inst = generate_lower_bound_instance(n)?;
    taus.iter()
        .map(|&tau| {
            let policy = Policy::heuristic(PolicyKind::AlgTau(tau), &inst)?;
            let report = run_many(&inst, &policy, replications, seed, Some(1.0))?;
            Ok(TauEstimate {
                tau,
                asr: report.asr,
                asr_se: report.asr_se,
                envelope: tau_envelope(tau),
                report,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::two_by_two;
    use crate::instance::{DemandType, Edge, Group, SupplyAgent};
    use crate::lp::{build_general_lp, solve, FEASIBILITY_TOL};
    use crate::poisson_math::poisson_pmf;
    use crate::policies::samp_build;

    #[test]
    fn total_count_moments() {
        let inst = two_by_two();
        let sampler = ArrivalSampler::new(&inst).unwrap();
        let reps = 100_000u64;
        let mut buf = Vec::new();
        let (mut sum, mut per_type) = (0u64, [0u64; 2]);
        for r in 0..reps {
            sampler.sample_into(&mut stream(11, r, Purpose::Arrivals), &mut buf);
            sum += buf.len() as u64;
            for a in &buf {
                per_type[a.demand] += 1;
                assert!(a.time > 0.0 && a.time <= 1.0);
            }
            assert!(buf.windows(2).all(|w| w[0].time <= w[1].time));
        }
        let lambda = inst.total_rate();
        let mean = sum as f64 / reps as f64;
        assert!(
            (mean - lambda).abs() <= 3.0 * (lambda / reps as f64).sqrt(),
            "{mean}"
        );
        let m1 = per_type[1] as f64 / reps as f64;
        assert!((m1 - 3.0).abs() <= 3.0 * (3.0 / reps as f64).sqrt(), "{m1}");
    }

    #[test]
    fn per_type_counts_are_poisson() {
        // Chi-square goodness of fit of the type-1 count against Pois(3).
        let inst = two_by_two();
        let sampler = ArrivalSampler::new(&inst).unwrap();
        let reps = 20_000u64;
        let bins = 9; // 0..=7 and a tail bin
        let mut observed = vec![0u64; bins];
        let mut buf = Vec::new();
        for r in 0..reps {
            sampler.sample_into(&mut stream(12, r, Purpose::Arrivals), &mut buf);
            let k = buf.iter().filter(|a| a.demand == 1).count();
            observed[k.min(bins - 1)] += 1;
        }
        let mut expected: Vec<f64> = (0..bins as u64 - 1).map(|k| poisson_pmf(3.0, k)).collect();
        expected.push(1.0 - expected.iter().sum::<f64>());
        let chi2: f64 = observed
            .iter()
            .zip(&expected)
            .map(|(&o, &p)| {
                let e = p * reps as f64;
                (o as f64 - e).powi(2) / e
            })
            .sum();
        // Upper 1% point of chi-square with 8 degrees of freedom.
        assert!(chi2 < 20.09, "chi2 = {chi2}");
    }

    #[test]
    fn tiny_rate_gives_empty_runs() {
        let inst = Instance {
            supply: vec![SupplyAgent {
                id: "s".into(),
                capacity: 1,
            }],
            demand: vec![DemandType {
                id: "d".into(),
                rate: 1e-4,
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
        let p = Policy::heuristic(PolicyKind::Greedy, &inst).unwrap();
        let report = run_many(&inst, &p, 1000, 3, None).unwrap();
        assert!(report.mean_arrivals < 0.01);
        assert!(report.competitive_ratio.is_none());
    }

    #[test]
    fn greedy_with_ample_supply_serves_everything() {
        let mut inst = two_by_two();
        inst.supply.iter_mut().for_each(|s| s.capacity = 1000);
        let p = Policy::heuristic(PolicyKind::Greedy, &inst).unwrap();
        for r in 0..50 {
            let out = run_once(&inst, &p, 5, r).unwrap();
            assert_eq!(out.served, out.arrivals);
        }
    }

    #[test]
    fn conservation_and_determinism() {
        let inst = two_by_two();
        let sol = solve(&inst, &build_general_lp(&inst), FEASIBILITY_TOL).unwrap();
        let p = samp_build(&inst, &sol).unwrap();
        for r in 0..200 {
            let out = run_once(&inst, &p, 8, r).unwrap();
            assert_eq!(out, run_once(&inst, &p, 8, r).unwrap());
            assert!(out.served.iter().zip(&out.arrivals).all(|(x, a)| x <= a));
            assert!(out.total_served() <= inst.total_capacity().min(out.total_arrivals()));
        }
        let a = run_many(&inst, &p, 500, 8, Some(sol.s_star)).unwrap();
        let b = run_many(&inst, &p, 500, 8, Some(sol.s_star)).unwrap();
        assert_eq!(a, b);
        let sum: f64 = a.served.iter().map(|m| m.mean).sum();
        assert!((sum - a.mean_served).abs() <= 1e-12);
    }

    #[test]
    fn single_replication_matches_run_once() {
        let inst = two_by_two();
        let p = Policy::heuristic(PolicyKind::Uniform, &inst).unwrap();
        let out = run_once(&inst, &p, 21, 0).unwrap();
        let report = run_many(&inst, &p, 1, 21, None).unwrap();
        for (m, &x) in report.served.iter().zip(&out.served) {
            assert_eq!(m.mean, x as f64);
            assert_eq!(m.se, 0.0);
        }
        assert_eq!(report.mean_arrivals, out.total_arrivals() as f64);
    }

    #[test]
    fn zero_replications_is_an_error() {
        let inst = two_by_two();
        let p = Policy::heuristic(PolicyKind::Greedy, &inst).unwrap();
        assert!(run_many(&inst, &p, 0, 1, None).is_err());
    }

    #[test]
    fn tau_one_starves_the_common_type() {
        let est = alg_tau_sweep(5, &[1.0], 200, 4).unwrap();
        assert_eq!(est[0].asr, 0.0);
        assert_eq!(est[0].envelope, 0.0);
    }

    #[test]
    fn envelope_peak() {
        let t = 2.0 - 3f64.sqrt();
        assert!((tau_envelope(t) - (3f64.sqrt() - 1.0)).abs() < 1e-12);
        assert_eq!(tau_envelope(0.0), 0.5);
    }
}
