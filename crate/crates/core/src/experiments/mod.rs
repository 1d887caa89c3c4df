//! Experiment grids: sweep cells, LP diagnostics and result tables.

mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::lp::{
    build_general_lp, build_homogeneous_lp, normalize_homogeneous, solve, LpCache, LpKind,
    LpSolution, FEASIBILITY_TOL,
};
use crate::poisson_math::{g, g_closed_form_s1, GArgs};
use crate::policies::{Policy, PolicyKind};
use crate::simulator::{fmt_f64, run_many, MetricsReport, CSV_COLUMNS};

pub use config::{
    CellSettings, ExperimentConfig, InstanceSource, PolicySpec, Sweep, DEFAULT_B_FLOOR, DEFAULT_RHO,
};

/// Distance within which `s*` is said to sit on a bound.
pub const BOTTLENECK_TOL: f64 = 1e-4;
/// Scarcities of the per-group tables.
pub const BREAKDOWN_RHOS: [f64; 3] = [1.0, 2.0, 3.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bottleneck {
    Disproportionality,
    Scarcity,
    /// `s*` sits on both bounds.
    Both,
    /// Neither bound is attained; the graph structure binds.
    Network,
}

impl Bottleneck {
    pub fn label(&self) -> &'static str {
        match self {
            Bottleneck::Disproportionality => "disproportionality",
            Bottleneck::Scarcity => "scarcity",
            Bottleneck::Both => "both",
            Bottleneck::Network => "network",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpDiagnostics {
    pub s_star: f64,
    pub kappa_bar: f64,
    pub b_over_lambda: f64,
    pub b_bar: u32,
    pub bottleneck: Bottleneck,
    pub instance_hash: String,
    pub lp_iterations: usize,
}

pub fn classify_bottleneck(s_star: f64, kappa_bar: f64, b_over_lambda: f64) -> Bottleneck {
    let on_kappa = (s_star - kappa_bar).abs() <= BOTTLENECK_TOL;
    let on_scarcity = (s_star - b_over_lambda).abs() <= BOTTLENECK_TOL;
    match (on_kappa, on_scarcity) {
        (true, true) => Bottleneck::Both,
        (true, false) => Bottleneck::Disproportionality,
        (false, true) => Bottleneck::Scarcity,
        (false, false) => Bottleneck::Network,
    }
}

fn diagnostics_from(inst: &Instance, sol: &LpSolution) -> LpDiagnostics {
    let kappa_bar = inst.kappa_bar();
    let b_over_lambda = inst.total_capacity() as f64 / inst.total_rate();
    LpDiagnostics {
        s_star: sol.s_star,
        kappa_bar,
        b_over_lambda,
        b_bar: inst.min_capacity(),
        bottleneck: classify_bottleneck(sol.s_star, kappa_bar, b_over_lambda),
        instance_hash: sol.instance_hash.clone(),
        lp_iterations: sol.iterations,
    }
}

fn solve_kind(inst: &Instance, kind: LpKind, cache: Option<&LpCache>) -> Result<LpSolution> {
    let compute = || match kind {
        LpKind::General => solve(inst, &build_general_lp(inst), FEASIBILITY_TOL),
        LpKind::Homogeneous => solve(inst, &build_homogeneous_lp(inst)?, FEASIBILITY_TOL),
    };
    match cache {
        Some(c) => c.get_or_solve(&inst.content_hash(), kind, compute),
        None => compute(),
    }
}

/// Solves the general LP and reports `s*`, `kappa_bar`, `B / lambda`, `b_bar`
/// and which bound is binding.
pub fn report_lp_diagnostics(inst: &Instance) -> Result<LpDiagnostics> {
    inst.ensure_valid()?;
    Ok(diagnostics_from(
        inst,
        &solve_kind(inst, LpKind::General, None)?,
    ))
}

/// Instance of one cell: generate, filter capacities, then rescale rates.
pub fn cell_instance(source: &InstanceSource, cell: &CellSettings) -> Result<Instance> {
    let mut inst = source.build(cell.kappa_floor)?;
    if cell.b_floor > 1 {
        inst = inst.filter_min_capacity(cell.b_floor)?;
    }
    if let Some(rho) = cell.rho {
        inst = inst.apply_scarcity(rho)?;
    }
    inst.ensure_valid()?;
    Ok(inst)
}

/// LP solutions and prepared policies for one instance.
pub struct PreparedCell {
    pub instance: Instance,
    pub general: LpSolution,
    pub diagnostics: LpDiagnostics,
    pub policies: Vec<Policy>,
}

pub fn prepare_cell(
    inst: Instance,
    kinds: &[PolicyKind],
    cache: Option<&LpCache>,
) -> Result<PreparedCell> {
    let general = solve_kind(&inst, LpKind::General, cache)?;
    let mut normalized = None;
    let mut policies = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let sol = match kind.lp_input() {
            Some(LpKind::General) => Some(&general),
            Some(LpKind::Homogeneous) => {
                if normalized.is_none() {
                    let raw = solve_kind(&inst, LpKind::Homogeneous, cache)?;
                    normalized = Some(normalize_homogeneous(&raw, &inst)?);
                }
                normalized.as_ref()
            }
            None => None,
        };
        policies.push(Policy::build(kind, &inst, sol)?);
    }
    Ok(PreparedCell {
        diagnostics: diagnostics_from(&inst, &general),
        instance: inst,
        general,
        policies,
    })
}

/// Floors the theory guarantees for SAMP and, on homogeneous instances, SAMP-S.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Floors {
    pub samp: f64,
    pub samp_s: Option<f64>,
}

pub fn floors(inst: &Instance, s_star: f64) -> Floors {
    let b = inst.min_capacity();
    let samp_s = inst.homogeneous_view().and_then(|v| {
        GArgs::from_lp_value(s_star, b)
            .ok()
            .map(|args| v.kappa_bar * g(args))
    });
    Floors {
        samp: g_closed_form_s1(b),
        samp_s,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub sweep: &'static str,
    pub value: f64,
    pub diagnostics: LpDiagnostics,
    pub floors: Floors,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupTable {
    pub metric: &'static str,
    pub rho: f64,
    pub policies: Vec<String>,
    /// `(group id, one value per policy)`.
    pub rows: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResults {
    pub rows: Vec<ResultRow>,
    pub group_tables: Vec<GroupTable>,
}

fn cell_label(sweep: &str, value: f64) -> String {
    format!("{sweep}={}", fmt_f64(value))
}

fn result_header() -> Vec<&'static str> {
    let mut h = vec![
        "sweep",
        "value",
        "instance_hash",
        "b_bar",
        "kappa_bar",
        "b_over_lambda",
        "bottleneck",
    ];
    h.extend(CSV_COLUMNS);
    h.extend(["floor_samp", "floor_samp_s"]);
    h
}

fn result_record(row: &ResultRow) -> Vec<String> {
    let d = &row.diagnostics;
    let mut r = vec![
        row.sweep.to_string(),
        fmt_f64(row.value),
        d.instance_hash.clone(),
        d.b_bar.to_string(),
        fmt_f64(d.kappa_bar),
        fmt_f64(d.b_over_lambda),
        d.bottleneck.label().to_string(),
    ];
    r.extend(row.report.csv_record());
    r.push(fmt_f64(row.floors.samp));
    r.push(row.floors.samp_s.map(fmt_f64).unwrap_or_default());
    r
}

/// Results as CSV text, one row per sweep value and policy.
pub fn results_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(result_header())?;
    for row in rows {
        w.write_record(result_record(row))?;
    }
    finish_csv(w)
}

/// Per-group results in long format.
pub fn groups_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "sweep",
        "value",
        "policy",
        "group",
        "target",
        "arrivals_mean",
        "served_mean",
        "served_se",
        "asr",
        "asr_se",
        "rsr",
    ])?;
    for row in rows {
        for g in &row.report.groups {
            w.write_record([
                row.sweep.to_string(),
                fmt_f64(row.value),
                row.report.policy.clone(),
                g.id.clone(),
                fmt_f64(g.target),
                fmt_f64(g.arrivals_mean),
                fmt_f64(g.served.mean),
                fmt_f64(g.served.se),
                fmt_f64(g.asr.mean),
                fmt_f64(g.asr.se),
                fmt_f64(g.rsr),
            ])?;
        }
    }
    finish_csv(w)
}

fn group_table_csv(t: &GroupTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["group".to_string()];
    header.extend(t.policies.iter().cloned());
    w.write_record(&header)?;
    for (id, values) in &t.rows {
        let mut r = vec![id.clone()];
        r.extend(values.iter().map(|&v| fmt_f64(v)));
        w.write_record(&r)?;
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Config(format!("csv buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    // Write to a sibling temp file and rename, so readers never see partial output.
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn lp_cache_for(config: &ExperimentConfig, out: &Path) -> Option<LpCache> {
    config
        .lp_cache
        .then(|| LpCache::from_env_or(out.join("lp-cache")))
}

/// Runs every sweep cell in order and returns the rows. Nothing is written.
pub fn run_cells(config: &ExperimentConfig, cache: Option<&LpCache>) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let sweep = config.sweep.name();
    let mut rows = Vec::new();
    for cell in config.cells() {
        let label = cell_label(sweep, cell.value);
        let wrap = |e: Error| Error::Cell {
            cell: label.clone(),
            source: Box::new(e),
        };
        let kinds = config
            .policies
            .iter()
            .map(|p| p.resolve(cell.tau))
            .collect::<Result<Vec<_>>>()
            .map_err(wrap)?;
        let inst = cell_instance(&config.instance, &cell).map_err(wrap)?;
        let prepared = prepare_cell(inst, &kinds, cache).map_err(wrap)?;
        let fl = floors(&prepared.instance, prepared.general.s_star);
        for policy in &prepared.policies {
            let report = run_many(
                &prepared.instance,
                policy,
                config.replications,
                config.seed,
                Some(prepared.general.s_star),
            )
            .map_err(wrap)?;
            rows.push(ResultRow {
                sweep,
                value: cell.value,
                diagnostics: prepared.diagnostics.clone(),
                floors: fl,
                report,
            });
        }
    }
    Ok(rows)
}

/// Per-group ASR and RSR tables at each scarcity in `rhos`, with the
/// remaining settings taken from the config's base values.
pub fn emit_group_breakdown(
    config: &ExperimentConfig,
    rhos: &[f64],
    cache: Option<&LpCache>,
) -> Result<Vec<GroupTable>> {
    let mut tables = Vec::new();
    for &rho in rhos {
        let mut cfg = config.clone();
        cfg.sweep = Sweep::Rho(vec![rho]);
        cfg.rho = None;
        if let Sweep::BFloor(_) = config.sweep {
            cfg.b_floor = None;
        }
        let rows = run_cells(&cfg, cache)?;
        let policies: Vec<String> = rows.iter().map(|r| r.report.policy.clone()).collect();
        let mut asr: BTreeMap<usize, (String, Vec<f64>)> = BTreeMap::new();
        let mut rsr: BTreeMap<usize, (String, Vec<f64>)> = BTreeMap::new();
        for row in &rows {
            for (k, g) in row.report.groups.iter().enumerate() {
                asr.entry(k)
                    .or_insert_with(|| (g.id.clone(), Vec::new()))
                    .1
                    .push(g.asr.mean);
                rsr.entry(k)
                    .or_insert_with(|| (g.id.clone(), Vec::new()))
                    .1
                    .push(g.rsr);
            }
        }
        tables.push(GroupTable {
            metric: "asr",
            rho,
            policies: policies.clone(),
            rows: asr.into_values().collect(),
        });
        tables.push(GroupTable {
            metric: "rsr",
            rho,
            policies,
            rows: rsr.into_values().collect(),
        });
    }
    Ok(tables)
}

/// Runs the experiment and writes `<out>/<name>/{results.csv, groups.csv,
/// config.json, lp_diagnostics.json}` plus the group tables when requested.
pub fn run_experiment(config: &ExperimentConfig, out: Option<&Path>) -> Result<ExperimentResults> {
    config.validate()?;
    let base: PathBuf = match (out, &config.output_dir) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) => o.clone(),
        (None, None) => return Err(Error::Config("no output directory given".into())),
    };
    let dir = base.join(&config.name);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let cache = lp_cache_for(config, &base);

    let rows = run_cells(config, cache.as_ref())?;
    let group_tables = if config.group_breakdown {
        emit_group_breakdown(config, &BREAKDOWN_RHOS, cache.as_ref())?
    } else {
        Vec::new()
    };

    write_file(&dir.join("results.csv"), &results_csv(&rows)?)?;
    write_file(&dir.join("groups.csv"), &groups_csv(&rows)?)?;
    write_file(&dir.join("config.json"), &(config.to_json() + "\n"))?;
    let mut diagnostics = Vec::new();
    let mut seen = Vec::new();
    for row in &rows {
        if !seen.contains(&row.value.to_bits()) {
            seen.push(row.value.to_bits());
            diagnostics.push(serde_json::json!({
                "sweep": row.sweep,
                "value": row.value,
                "diagnostics": row.diagnostics,
            }));
        }
    }
    write_file(
        &dir.join("lp_diagnostics.json"),
        &(serde_json::to_string_pretty(&diagnostics)? + "\n"),
    )?;
    for t in &group_tables {
        let name = format!("group_{}_rho{}.csv", t.metric, fmt_f64(t.rho));
        write_file(&dir.join(name), &group_table_csv(t)?)?;
    }
    Ok(ExperimentResults { rows, group_tables })
}

/// One policy on one instance file, as a CSV header plus one row.
pub fn simulate_csv(
    inst: &Instance,
    kind: PolicyKind,
    replications: u64,
    seed: u64,
    rho: Option<f64>,
    b_floor: Option<u32>,
) -> Result<String> {
    let mut inst = inst.clone();
    if let Some(b) = b_floor {
        inst = inst.filter_min_capacity(b)?;
    }
    if let Some(r) = rho {
        inst = inst.apply_scarcity(r)?;
    }
    inst.ensure_valid()?;
    let prepared = prepare_cell(inst, &[kind], None)?;
    let report = run_many(
        &prepared.instance,
        &prepared.policies[0],
        replications,
        seed,
        Some(prepared.general.s_star),
    )?;
    let row = ResultRow {
        sweep: "none",
        value: 0.0,
        diagnostics: prepared.diagnostics,
        floors: floors(&prepared.instance, prepared.general.s_star),
        report,
    };
    results_csv(std::slice::from_ref(&row))
}
