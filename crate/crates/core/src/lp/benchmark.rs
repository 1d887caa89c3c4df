//! The two benchmark LPs over an allocation instance.
//!
//! Variables are one `x_ij` per edge (in instance edge order) followed by `s`.
//! General model:
//!   max s
//!   sum_i x_ij <= lambda_j                      for every demand type j
//!   sum_{j in g} sum_i x_ij >= s lambda mu_g    for every group g
//!   sum_j x_ij <= b_i                           for every supply agent i
//! The homogeneous model replaces the group rows by per-type floors
//! `x_j >= s lambda mu_j`.

use serde::{Deserialize, Serialize};

use super::{DenseSimplex, LinearProgram, LpError, LpSolver, Sense, FEASIBILITY_TOL};
use crate::error::{Error, Result};
use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpKind {
    General,
    Homogeneous,
}

impl LpKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LpKind::General => "general",
            LpKind::Homogeneous => "homogeneous",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkLp {
    pub kind: LpKind,
    pub program: LinearProgram,
    pub n_edges: usize,
}

impl BenchmarkLp {
    /// Index of the `s` variable.
    pub fn s_var(&self) -> usize {
        self.n_edges
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub kind: LpKind,
    /// Expected assignments `x_ij`, aligned with the instance's edges.
    pub x: Vec<f64>,
    pub s_star: f64,
    pub x_demand: Vec<f64>,
    pub x_supply: Vec<f64>,
    pub x_group: Vec<f64>,
    pub status: SolveStatus,
    pub residual: f64,
    pub iterations: usize,
    pub instance_hash: String,
}

fn demand_rows(inst: &Instance) -> Vec<Vec<(usize, f64)>> {
    let mut rows = vec![Vec::new(); inst.demand.len()];
    for (k, e) in inst.edges.iter().enumerate() {
        rows[e.demand].push((k, 1.0));
    }
    rows
}

fn push_common_rows(lp: &mut LinearProgram, inst: &Instance, by_demand: &[Vec<(usize, f64)>]) {
    for (j, d) in inst.demand.iter().enumerate() {
        lp.push(by_demand[j].clone(), Sense::Le, d.rate);
    }
}

fn push_supply_rows(lp: &mut LinearProgram, inst: &Instance) {
    let mut rows = vec![Vec::new(); inst.supply.len()];
    for (k, e) in inst.edges.iter().enumerate() {
        rows[e.supply].push((k, 1.0));
    }
    for (row, s) in rows.into_iter().zip(&inst.supply) {
        lp.push(row, Sense::Le, f64::from(s.capacity));
    }
}

pub fn build_general_lp(inst: &Instance) -> BenchmarkLp {
    let n_edges = inst.edges.len();
    let s = n_edges;
    let lambda = inst.total_rate();
    let mut lp = LinearProgram::new(n_edges + 1);
    lp.objective[s] = 1.0;
    let by_demand = demand_rows(inst);
    push_common_rows(&mut lp, inst, &by_demand);
    for g in &inst.groups {
        let mut terms: Vec<(usize, f64)> = g
            .members
            .iter()
            .flat_map(|&j| by_demand[j].iter().copied())
            .collect();
        terms.push((s, -lambda * g.target));
        lp.push(terms, Sense::Ge, 0.0);
    }
    push_supply_rows(&mut lp, inst);
    BenchmarkLp {
        kind: LpKind::General,
        program: lp,
        n_edges,
    }
}

pub fn build_homogeneous_lp(inst: &Instance) -> Result<BenchmarkLp> {
    let view = inst.homogeneous_view().ok_or_else(|| {
        Error::Domain("homogeneous LP requires singleton groups covering every type once".into())
    })?;
    let n_edges = inst.edges.len();
    let s = n_edges;
    let lambda = inst.total_rate();
    let mut lp = LinearProgram::new(n_edges + 1);
    lp.objective[s] = 1.0;
    let by_demand = demand_rows(inst);
    push_common_rows(&mut lp, inst, &by_demand);
    for (j, row) in by_demand.iter().enumerate() {
        let mut terms = row.clone();
        terms.push((s, -lambda * view.mu[j]));
        lp.push(terms, Sense::Ge, 0.0);
    }
    push_supply_rows(&mut lp, inst);
    Ok(BenchmarkLp {
        kind: LpKind::Homogeneous,
        program: lp,
        n_edges,
    })
}

fn totals(inst: &Instance, x: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut xd = vec![0.0; inst.demand.len()];
    let mut xs = vec![0.0; inst.supply.len()];
    for (e, v) in inst.edges.iter().zip(x) {
        xd[e.demand] += v;
        xs[e.supply] += v;
    }
    let xg = inst
        .groups
        .iter()
        .map(|g| g.members.iter().map(|&j| xd[j]).sum())
        .collect();
    (xd, xs, xg)
}

/// Solves with the default [`DenseSimplex`].
pub fn solve(inst: &Instance, model: &BenchmarkLp, tolerance: f64) -> Result<LpSolution> {
    solve_with(&DenseSimplex::default(), inst, model, tolerance)
}

/// Solves `model` (built from `inst`) and checks feasibility to `tolerance`.
pub fn solve_with(
    solver: &dyn LpSolver,
    inst: &Instance,
    model: &BenchmarkLp,
    tolerance: f64,
) -> Result<LpSolution> {
    let primal = solver.solve(&model.program)?;
    let residual = model.program.residual(&primal.x);
    if residual > tolerance {
        return Err(LpError::Numerical(format!(
            "solution violates constraints by {residual:e} (tolerance {tolerance:e})"
        ))
        .into());
    }
    let mut x = primal.x;
    let s_star = x.pop().expect("s variable is present").max(0.0);
    for v in &mut x {
        *v = v.max(0.0);
    }
    let (x_demand, x_supply, x_group) = totals(inst, &x);
    Ok(LpSolution {
        kind: model.kind,
        x,
        s_star,
        x_demand,
        x_supply,
        x_group,
        status: SolveStatus::Optimal,
        residual,
        iterations: primal.iterations,
        instance_hash: inst.content_hash(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpBoundsReport {
    pub s_star: f64,
    pub kappa_bar: f64,
    pub b_over_lambda: f64,
    /// `kappa_bar - s_star`.
    pub kappa_margin: f64,
    /// `1 - kappa_bar`.
    pub unit_margin: f64,
    /// `B / lambda - s_star`.
    pub scarcity_margin: f64,
    pub holds: bool,
}

/// Checks `s* <= kappa_bar <= 1` and `s* <= B / lambda`.
pub fn check_lp_bounds(solution: &LpSolution, inst: &Instance) -> Result<LpBoundsReport> {
    let view = inst
        .homogeneous_view()
        .ok_or_else(|| Error::Domain("the bounds check requires homogeneous groups".into()))?;
    let s = solution.s_star;
    let b_over_lambda = inst.total_capacity() as f64 / inst.total_rate();
    let kappa_margin = view.kappa_bar - s;
    let unit_margin = 1.0 - view.kappa_bar;
    let scarcity_margin = b_over_lambda - s;
    Ok(LpBoundsReport {
        s_star: s,
        kappa_bar: view.kappa_bar,
        b_over_lambda,
        kappa_margin,
        unit_margin,
        scarcity_margin,
        holds: kappa_margin >= -FEASIBILITY_TOL
            && unit_margin >= -1e-12
            && scarcity_margin >= -FEASIBILITY_TOL,
    })
}

/// Scales down each type's assignments so that `x_j = s* lambda mu_j`.
pub fn normalize_homogeneous(solution: &LpSolution, inst: &Instance) -> Result<LpSolution> {
    let view = inst
        .homogeneous_view()
        .ok_or_else(|| Error::Domain("normalization requires homogeneous groups".into()))?;
    let lambda = inst.total_rate();
    let factors = solution
        .x_demand
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            let target = solution.s_star * lambda * view.mu[j];
            if xj < target - 1e-6 {
                Err(Error::Lp(LpError::Numerical(format!(
                    "demand {} is below its floor: {xj} < {target}",
                    inst.demand[j].id
                ))))
            } else if xj > target {
                Ok(target / xj)
            } else {
                Ok(1.0)
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let x: Vec<f64> = inst
        .edges
        .iter()
        .zip(&solution.x)
        .map(|(e, &v)| v * factors[e.demand])
        .collect();
    let (x_demand, x_supply, x_group) = totals(inst, &x);
    let model = build_homogeneous_lp(inst)?;
    let mut full = x.clone();
    full.push(solution.s_star);
    Ok(LpSolution {
        kind: solution.kind,
        residual: model.program.residual(&full),
        x,
        x_demand,
        x_supply,
        x_group,
        ..solution.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{
        generate_homogeneous_synthetic, generate_lower_bound_instance, DemandType, Edge, Group,
        HomogeneousParams, SupplyAgent,
    };

    fn single(rate: f64, cap: u32, target: f64) -> Instance {
        Instance {
            supply: vec![SupplyAgent {
                id: "s".into(),
                capacity: cap,
            }],
            demand: vec![DemandType {
                id: "d".into(),
                rate,
            }],
            edges: vec![Edge {
                supply: 0,
                demand: 0,
            }],
            groups: vec![Group {
                id: "g".into(),
                members: vec![0],
                target,
            }],
        }
    }

    #[test]
    fn general_model_structure() {
        let m = build_general_lp(&single(1.0, 2, 0.5));
        assert_eq!(m.program.n_vars, 2);
        assert_eq!(m.program.constraints.len(), 3);
        let m = build_general_lp(&generate_lower_bound_instance(3).unwrap());
        assert_eq!(m.n_edges, 6);
        assert_eq!(m.program.n_vars, 7);
    }

    #[test]
    fn empty_edge_set_forces_zero() {
        let mut inst = single(1.0, 2, 0.5);
        inst.edges.clear();
        let sol = solve(&inst, &build_general_lp(&inst), FEASIBILITY_TOL).unwrap();
        assert_eq!(sol.s_star, 0.0);
    }

    #[test]
    fn hand_solved_single_edge() {
        // x <= min(4, 1) and s = x / (lambda mu) = 1 / 2.
        let inst = single(4.0, 1, 0.5);
        let sol = solve(
            &inst,
            &build_homogeneous_lp(&inst).unwrap(),
            FEASIBILITY_TOL,
        )
        .unwrap();
        assert!((sol.s_star - 0.5).abs() < 1e-7);
        assert!((sol.x[0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn lower_bound_family_has_unit_value() {
        for n in [2, 3, 10] {
            let inst = generate_lower_bound_instance(n).unwrap();
            for model in [
                build_general_lp(&inst),
                build_homogeneous_lp(&inst).unwrap(),
            ] {
                let sol = solve(&inst, &model, FEASIBILITY_TOL).unwrap();
                assert!((sol.s_star - 1.0).abs() < 1e-7, "n={n}: {}", sol.s_star);
                let report = check_lp_bounds(&sol, &inst).unwrap();
                assert!(report.holds);
                assert!(report.kappa_margin.abs() < 1e-7);
                assert!(report.scarcity_margin.abs() < 1e-7);
            }
        }
    }

    #[test]
    fn homogeneous_rejects_grouped_instance() {
        let mut inst = generate_lower_bound_instance(3).unwrap();
        inst.groups[1].members.push(2);
        assert!(build_homogeneous_lp(&inst).is_err());
    }

    #[test]
    fn general_and_homogeneous_agree() {
        let params = HomogeneousParams {
            n_supply: 15,
            n_demand: 20,
            avg_degree: 3,
            capacity: 2,
            kappa_floor: 0.7,
        };
        for seed in 0..10 {
            let inst = generate_homogeneous_synthetic(params, seed)
                .unwrap()
                .apply_scarcity(1.5)
                .unwrap();
            let a = solve(&inst, &build_general_lp(&inst), FEASIBILITY_TOL).unwrap();
            let b = solve(
                &inst,
                &build_homogeneous_lp(&inst).unwrap(),
                FEASIBILITY_TOL,
            )
            .unwrap();
            assert!((a.s_star - b.s_star).abs() <= 1e-7);
        }
    }

    #[test]
    fn normalization_scales_to_floor() {
        let inst = generate_lower_bound_instance(4).unwrap();
        let model = build_homogeneous_lp(&inst).unwrap();
        let sol = solve(&inst, &model, FEASIBILITY_TOL).unwrap();
        let tight = normalize_homogeneous(&sol, &inst).unwrap();
        for (a, b) in tight.x.iter().zip(&sol.x) {
            assert!((a - b).abs() < 1e-9);
        }

        // Halve s*: every type is now at twice its floor.
        let mut loose = sol.clone();
        loose.s_star = sol.s_star / 2.0;
        let out = normalize_homogeneous(&loose, &inst).unwrap();
        for (a, b) in out.x.iter().zip(&sol.x) {
            assert!((a - b / 2.0).abs() < 1e-9);
        }
        assert_eq!(out.s_star, loose.s_star);
        assert!(out.residual <= FEASIBILITY_TOL);
    }

    #[test]
    fn normalization_rejects_violated_floor() {
        let inst = generate_lower_bound_instance(4).unwrap();
        let model = build_homogeneous_lp(&inst).unwrap();
        let mut sol = solve(&inst, &model, FEASIBILITY_TOL).unwrap();
        sol.s_star = 2.0;
        assert!(normalize_homogeneous(&sol, &inst).is_err());
    }

    #[test]
    fn solution_json_round_trip() {
        let inst = generate_lower_bound_instance(3).unwrap();
        let sol = solve(&inst, &build_general_lp(&inst), FEASIBILITY_TOL).unwrap();
        let text = serde_json::to_string(&sol).unwrap();
        let back: LpSolution = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sol);
    }
}
