use serde::Serialize;

use super::RunOutcome;
use crate::instance::Instance;

/// Column names of [`MetricsReport::csv_record`].
pub const CSV_COLUMNS: [&str; 12] = [
    "policy",
    "replications",
    "s_star",
    "competitive_ratio",
    "competitive_ratio_se",
    "asr",
    "asr_se",
    "rsr",
    "rsr_se",
    "mean_served",
    "mean_arrivals",
    "asr_denominator",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupMetrics {
    pub id: String,
    pub target: f64,
    pub arrivals_mean: f64,
    pub served: MeanSe,
    /// `mean X_g / (lambda mu_g)`.
    pub asr: MeanSe,
    /// `mean X_g / (mean X mu_g)`.
    pub rsr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub policy: String,
    pub replications: u64,
    pub s_star: Option<f64>,
    pub asr: f64,
    pub asr_se: f64,
    pub rsr: f64,
    pub rsr_se: f64,
    pub competitive_ratio: Option<f64>,
    pub competitive_ratio_se: Option<f64>,
    pub mean_arrivals: f64,
    pub mean_served: f64,
    pub arrivals_mean: Vec<f64>,
    pub served: Vec<MeanSe>,
    pub groups: Vec<GroupMetrics>,
    /// What replaces `E[A]` in the ASR denominator.
    pub asr_denominator: &'static str,
}

/// Integer running sums plus the per-replication min-ratio statistics, in
/// replication order.
#[derive(Debug, Clone, Default)]
pub(crate) struct Accumulator {
    reps: u64,
    arrivals: Vec<u64>,
    served: Vec<u64>,
    served_sq: Vec<u64>,
    group_served: Vec<u64>,
    group_served_sq: Vec<u64>,
    asr_stats: Vec<f64>,
    rsr_stats: Vec<f64>,
}

fn add_into(a: &mut Vec<u64>, b: &[u64]) {
    if a.is_empty() {
        a.resize(b.len(), 0);
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

fn mean_se(sum: u64, sum_sq: u64, n: u64) -> MeanSe {
    let nf = n as f64;
    let mean = sum as f64 / nf;
    if n < 2 {
        return MeanSe { mean, se: 0.0 };
    }
    // Exact integer centring avoids cancellation for large counts.
    let ss = sum_sq as f64 - (sum as f64) * mean;
    let var = (ss / (nf - 1.0)).max(0.0);
    MeanSe {
        mean,
        se: (var / nf).sqrt(),
    }
}

fn stats_mean_se(xs: &[f64]) -> MeanSe {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return MeanSe { mean, se: 0.0 };
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    MeanSe {
        mean,
        se: (var / n).sqrt(),
    }
}

impl Accumulator {
    pub(crate) fn push(&mut self, inst: &Instance, run: &RunOutcome) {
        let lambda = inst.total_rate();
        let xg = run.group_served(inst);
        let total = run.total_served();
        self.reps += 1;
        add_into(&mut self.arrivals, &run.arrivals);
        add_into(&mut self.served, &run.served);
        add_into(
            &mut self.served_sq,
            &run.served.iter().map(|x| x * x).collect::<Vec<_>>(),
        );
        add_into(
            &mut self.group_served_sq,
            &xg.iter().map(|x| x * x).collect::<Vec<_>>(),
        );
        add_into(&mut self.group_served, &xg);
        let asr = inst
            .groups
            .iter()
            .zip(&xg)
            .map(|(g, &x)| x as f64 / (lambda * g.target))
            .fold(f64::INFINITY, f64::min);
        let rsr = if total == 0 {
            0.0
        } else {
            inst.groups
                .iter()
                .zip(&xg)
                .map(|(g, &x)| x as f64 / (total as f64 * g.target))
                .fold(f64::INFINITY, f64::min)
        };
        self.asr_stats.push(asr);
        self.rsr_stats.push(rsr);
    }

    pub(crate) fn merge(&mut self, other: Accumulator) {
        self.reps += other.reps;
        add_into(&mut self.arrivals, &other.arrivals);
        add_into(&mut self.served, &other.served);
        add_into(&mut self.served_sq, &other.served_sq);
        add_into(&mut self.group_served, &other.group_served);
        add_into(&mut self.group_served_sq, &other.group_served_sq);
        self.asr_stats.extend(other.asr_stats);
        self.rsr_stats.extend(other.rsr_stats);
    }

    pub(crate) fn finish(
        self,
        inst: &Instance,
        policy: String,
        s_star: Option<f64>,
    ) -> MetricsReport {
        let n = self.reps;
        let nf = n as f64;
        let lambda = inst.total_rate();
        let served: Vec<MeanSe> = self
            .served
            .iter()
            .zip(&self.served_sq)
            .map(|(&s, &q)| mean_se(s, q, n))
            .collect();
        let arrivals_mean: Vec<f64> = self.arrivals.iter().map(|&a| a as f64 / nf).collect();
        let mean_served = self.served.iter().sum::<u64>() as f64 / nf;
        let mean_arrivals = self.arrivals.iter().sum::<u64>() as f64 / nf;

        let groups: Vec<GroupMetrics> = inst
            .groups
            .iter()
            .enumerate()
            .map(|(k, g)| {
                let x = mean_se(self.group_served[k], self.group_served_sq[k], n);
                let denom = lambda * g.target;
                GroupMetrics {
                    id: g.id.clone(),
                    target: g.target,
                    arrivals_mean: g.members.iter().map(|&j| arrivals_mean[j]).sum(),
                    asr: MeanSe {
                        mean: x.mean / denom,
                        se: x.se / denom,
                    },
                    rsr: if mean_served > 0.0 {
                        x.mean / (mean_served * g.target)
                    } else {
                        0.0
                    },
                    served: x,
                }
            })
            .collect();

        let asr = groups
            .iter()
            .map(|g| g.asr.mean)
            .fold(f64::INFINITY, f64::min);
        let rsr = groups.iter().map(|g| g.rsr).fold(f64::INFINITY, f64::min);
        let asr_se = stats_mean_se(&self.asr_stats).se;
        let rsr_se = stats_mean_se(&self.rsr_stats).se;
        let valid = s_star.filter(|&s| s > crate::poisson_math::S_DEGENERATE);
        MetricsReport {
            policy,
            replications: n,
            s_star,
            asr,
            asr_se,
            rsr,
            rsr_se,
            competitive_ratio: valid.map(|s| asr / s),
            competitive_ratio_se: valid.map(|s| asr_se / s),
            mean_arrivals,
            mean_served,
            arrivals_mean,
            served,
            groups,
            asr_denominator: "lambda",
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Shortest round-trip representation, so that CSV output is stable.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }

    /// One flat CSV row aligned with [`CSV_COLUMNS`].
    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.policy.clone(),
            self.replications.to_string(),
            opt(self.s_star),
            opt(self.competitive_ratio),
            opt(self.competitive_ratio_se),
            fmt_f64(self.asr),
            fmt_f64(self.asr_se),
            fmt_f64(self.rsr),
            fmt_f64(self.rsr_se),
            fmt_f64(self.mean_served),
            fmt_f64(self.mean_arrivals),
            self.asr_denominator.to_string(),
        ]
    }

    /// The smallest per-group ASR among groups whose ids satisfy `keep`.
    pub fn min_group_asr(&self, keep: impl Fn(&str) -> bool) -> Option<f64> {
        self.groups
            .iter()
            .filter(|g| keep(&g.id))
            .map(|g| g.asr.mean)
            .reduce(f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_moments() {
        let m = mean_se(6, 14, 3); // 1, 2, 3
        assert!((m.mean - 2.0).abs() < 1e-15);
        assert!((m.se - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_se(5, 25, 1).se, 0.0);
    }
}
