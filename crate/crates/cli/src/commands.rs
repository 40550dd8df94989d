//! Command implementations. Each writes CSV files into an output directory
//! and returns their paths.

use std::path::{Path, PathBuf};

use agewise_core::opt::{self, SearchSpec};
use agewise_core::sim::{self, SimConfig, SimResult};
use agewise_core::{analyze, AoiSolution, Objective, Policy, ServerSpec};

use crate::config::{parse_config_str, ExperimentConfig};
use crate::error::CliError;
use crate::shipped;
use crate::table::{write_csv, Cell, Table};

/// Tail mass left out of written pmf tables.
pub const PMF_TAIL: f64 = 1e-12;
/// Tail mass left out of figure pmf tables.
pub const FIGURE_TAIL: f64 = 1e-6;
/// Spacing of simulated points along each cost curve in `reproduce fig4`.
pub const FIG4_MARKER_STEP: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
}

/// Which thresholds the dual-server pmf figure uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fig3Variant {
    /// `(10, 20)`, as in the running text.
    #[default]
    Text,
    /// `(20, 50)`, as in the caption.
    Caption,
}

fn prepare(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))
}

fn emit(table: &Table, out: &Path, name: &str, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let path = out.join(name);
    write_csv(table, &path)?;
    written.push(path);
    Ok(())
}

pub fn thresholds_label(t: &[u32]) -> String {
    let parts: Vec<String> = t.iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

fn servers_label(servers: &[ServerSpec]) -> String {
    let names: Vec<&str> = servers.iter().map(|s| s.name.as_str()).collect();
    format!("[{}]", names.join(","))
}

fn frequency_columns(j: usize) -> Vec<String> {
    (1..=j).map(|k| format!("f_{k}")).collect()
}

/// `n, probability` for `n = 1 ..= n_max`.
pub fn pmf_table(solution: &AoiSolution, n_max: u64) -> Table {
    let mut t = Table::new(["n", "probability"]);
    for (n, p) in solution.pmf_iter().take(n_max as usize) {
        t.push(vec![n.into(), p.into()]);
    }
    t
}

/// `analyze`: `pmf.csv` and `costs.csv` for the configured policy.
pub fn run_analyze(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let policy = cfg.require_policy("analyze")?;
    let solution = analyze(policy)?;
    let c_a = cfg.objective.evaluate(&solution)?;
    prepare(out)?;
    let mut written = Vec::new();
    let n_max = solution.coverage_point(PMF_TAIL);
    emit(&pmf_table(&solution, n_max), out, "pmf.csv", &mut written)?;

    let j = policy.server_count();
    let mut header: Vec<String> = ["policy", "objective", "C_A", "mean_aoi", "p_wait"]
        .map(String::from)
        .to_vec();
    header.extend(frequency_columns(j));
    header.push("C_T".into());
    let mut costs = Table::new(header);
    let mut row: Vec<Cell> = vec![
        policy.label().into(),
        cfg.objective.label().into(),
        c_a.into(),
        solution.mean_aoi().into(),
        solution.p_wait().into(),
    ];
    row.extend(solution.frequencies().iter().map(|&f| Cell::from(f)));
    row.push(solution.transmission_cost().into());
    costs.push(row);
    emit(&costs, out, "costs.csv", &mut written)?;
    Ok(written)
}

fn sim_config(
    cfg: &ExperimentConfig,
    policy: &Policy,
    slots: Option<u64>,
    seed: Option<u64>,
) -> Result<SimConfig, CliError> {
    let slots = slots.or(cfg.sim.slots).ok_or_else(|| {
        CliError::usage("simulation length missing: pass --slots or set sim.slots")
    })?;
    let seed = seed
        .or(cfg.sim.seed)
        .ok_or_else(|| CliError::usage("seed missing: pass --seed or set sim.seed"))?;
    let mut sc = SimConfig::new(policy.clone(), slots, seed).with_stream(cfg.sim.stream);
    if let Some(w) = cfg.sim.warmup {
        sc = sc.with_warmup(w);
    }
    if let Some(script) = &cfg.sim.script {
        sc = sc.with_script(script.clone());
    }
    Ok(sc)
}

pub fn histogram_table(result: &SimResult) -> Table {
    let mut t = Table::new(["n", "count", "probability"]);
    for (&n, &count) in &result.histogram {
        t.push(vec![n.into(), count.into(), result.probability(n).into()]);
    }
    t
}

pub fn sim_summary_table(result: &SimResult) -> Table {
    let mut header = vec!["mean_aoi".to_owned(), "p_wait".to_owned()];
    header.extend(frequency_columns(result.empirical_f.len()));
    header.push("C_T".into());
    let mut t = Table::new(header);
    let mut row: Vec<Cell> = vec![result.mean_aoi.into(), result.empirical_p_wait.into()];
    row.extend(result.empirical_f.iter().map(|&f| Cell::from(f)));
    row.push(result.empirical_c_t.into());
    t.push(row);
    t
}

/// `simulate`: `sim.csv` histogram and `sim_summary.csv`.
pub fn run_simulate(
    cfg: &ExperimentConfig,
    slots: Option<u64>,
    seed: Option<u64>,
    out: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let policy = cfg.require_policy("simulate")?;
    let result = sim::simulate(&sim_config(cfg, policy, slots, seed)?)?;
    prepare(out)?;
    let mut written = Vec::new();
    emit(&histogram_table(&result), out, "sim.csv", &mut written)?;
    emit(
        &sim_summary_table(&result),
        out,
        "sim_summary.csv",
        &mut written,
    )?;
    Ok(written)
}

/// `optimize`: `optimize.csv` per budget, `frontier.csv`, and `sweep.csv`
/// when the search section lists policy families.
pub fn run_optimize(
    cfg: &ExperimentConfig,
    tau_max: Option<u32>,
    out: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let search = cfg.require_search("optimize")?;
    let objective = cfg
        .objective
        .standard()
        .ok_or_else(|| {
            CliError::usage("optimize supports the mean, polynomial and violation objectives")
        })?
        .clone();
    let tau_max = tau_max.or(search.tau_max).ok_or_else(|| {
        CliError::usage("threshold cap missing: pass --tau-max or set search.tau_max")
    })?;
    if tau_max == 0 {
        return Err(CliError::usage("--tau-max must be at least 1"));
    }
    let spec = SearchSpec {
        pool: search.pool.clone(),
        max_servers: search.max_servers,
        tau_max,
        budgets: search.budgets.clone(),
        objective: objective.clone(),
        order: search.order,
    };
    let result = opt::optimize(&spec)?;
    log::info!(
        "evaluated {} threshold tuples ({} skipped as reducible)",
        result.evaluated,
        result.skipped
    );
    prepare(out)?;
    let mut written = Vec::new();

    let mut table = Table::new(["budget", "policy", "thresholds", "C_A", "C_T", "feasible"]);
    for o in &result.outcomes {
        let row = match &o.best {
            Some(c) => {
                let names: Vec<ServerSpec> =
                    c.servers.iter().map(|&i| spec.pool[i].clone()).collect();
                vec![
                    o.budget.into(),
                    servers_label(&names).into(),
                    thresholds_label(&c.thresholds).into(),
                    c.c_a.into(),
                    c.c_t.into(),
                    true.into(),
                ]
            }
            None => vec![
                o.budget.into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                false.into(),
            ],
        };
        table.push(row);
    }
    emit(&table, out, "optimize.csv", &mut written)?;

    let mut frontier = Table::new(["max_servers", "policy", "thresholds", "C_A", "C_T"]);
    for size in 1..=spec.max_servers {
        for c in result.frontier_up_to(size) {
            let names: Vec<ServerSpec> = c.servers.iter().map(|&i| spec.pool[i].clone()).collect();
            frontier.push(vec![
                (size as u64).into(),
                servers_label(&names).into(),
                thresholds_label(&c.thresholds).into(),
                c.c_a.into(),
                c.c_t.into(),
            ]);
        }
    }
    emit(&frontier, out, "frontier.csv", &mut written)?;

    if !search.sweep.is_empty() {
        let mut table = Table::new(["policy", "thresholds", "C_A", "C_T", "p_wait", "error"]);
        for family in &search.sweep {
            let label = servers_label(&family.servers);
            for row in opt::sweep(family, tau_max, &objective) {
                let cells = match row.outcome {
                    Ok(v) => vec![v.c_a.into(), v.c_t.into(), v.p_wait.into(), Cell::Empty],
                    Err(e) => vec![Cell::Empty, Cell::Empty, Cell::Empty, e.to_string().into()],
                };
                let mut full = vec![
                    label.clone().into(),
                    thresholds_label(&row.thresholds).into(),
                ];
                full.extend(cells);
                table.push(full);
            }
        }
        emit(&table, out, "sweep.csv", &mut written)?;
    }
    Ok(written)
}

/// Slot-by-slot replay of the scripted sample path.
pub fn fig2_table() -> Result<Table, CliError> {
    let cfg = parse_config_str(shipped::FIG2)?;
    let policy = cfg.require_policy("reproduce fig2")?;
    let sc = sim_config(&cfg, policy, None, None)?;
    let name = |s: Option<usize>| s.map(|i| policy.servers()[i].name.clone());
    let mut t = Table::new(["k", "age", "decision", "started", "received"]);
    for r in sim::trace(&sc)? {
        let decision = match (r.waiting, r.started) {
            (true, _) => "wait",
            (false, Some(_)) => "transmit",
            (false, None) => "busy",
        };
        t.push(vec![
            r.k.into(),
            r.age.into(),
            decision.into(),
            name(r.started).into(),
            name(r.received).into(),
        ]);
    }
    Ok(t)
}

fn fig3(
    variant: Fig3Variant,
    slots: Option<u64>,
    out: &Path,
    written: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    let text = match variant {
        Fig3Variant::Text => shipped::FIG3_TEXT,
        Fig3Variant::Caption => shipped::FIG3_CAPTION,
    };
    let cfg = parse_config_str(text)?;
    let mut pmf = Table::new(["policy", "n", "analytic", "simulated"]);
    let mut summary = Table::new([
        "policy",
        "mean_aoi",
        "sim_mean_aoi",
        "p_wait",
        "sim_p_wait",
        "C_T",
        "sim_C_T",
        "tv_distance",
    ]);
    for (i, policy) in cfg.policies.iter().enumerate() {
        let solution = analyze(policy)?;
        let sc = sim_config(&cfg, policy, slots, None)?.with_stream(cfg.sim.stream + i as u64);
        let result = sim::simulate(&sc)?;
        let n_max = solution.coverage_point(FIGURE_TAIL);
        for (n, p) in solution.pmf_iter().take(n_max as usize) {
            pmf.push(vec![
                policy.label().into(),
                n.into(),
                p.into(),
                result.probability(n).into(),
            ]);
        }
        let tv_max = solution
            .coverage_point(1e-7)
            .max(result.histogram.keys().next_back().copied().unwrap_or(1));
        let tv = sim::tv_distance(&result, &solution, tv_max)?;
        summary.push(vec![
            policy.label().into(),
            solution.mean_aoi().into(),
            result.mean_aoi.into(),
            solution.p_wait().into(),
            result.empirical_p_wait.into(),
            solution.transmission_cost().into(),
            result.empirical_c_t.into(),
            tv.into(),
        ]);
    }
    emit(&pmf, out, "fig3.csv", written)?;
    emit(&summary, out, "fig3_summary.csv", written)
}

/// Points along each fig4 curve that also get a simulated value.
pub fn fig4_markers(tau_1: u32, tau_max: u32) -> Vec<u32> {
    let mut m = vec![tau_1];
    m.extend(
        (1..)
            .map(|k| k * FIG4_MARKER_STEP)
            .take_while(|&t| t <= tau_max)
            .filter(|&t| t > tau_1),
    );
    m
}

fn fig4(slots: Option<u64>, out: &Path, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let cfg = parse_config_str(shipped::FIG4)?;
    let search = cfg.require_search("reproduce fig4")?;
    let tau_max = search
        .tau_max
        .ok_or_else(|| CliError::usage("fig4 config needs search.tau_max"))?;
    let objective = cfg.objective.standard().cloned().unwrap_or(Objective::Mean);
    let mut analytic = Table::new(["tau_1", "tau_2", "C_A", "C_T"]);
    let mut simulated = Table::new(["tau_1", "tau_2", "C_A", "C_T", "sim_C_A", "sim_C_T"]);
    for (k, family) in search.sweep.iter().enumerate() {
        let tau_1 = family.fixed[0].ok_or_else(|| CliError::usage("fig4 families fix tau_1"))?;
        let rows = opt::sweep(family, tau_max, &objective);
        for row in &rows {
            let v = row
                .outcome
                .as_ref()
                .map_err(|e| CliError::Model(e.clone()))?;
            analytic.push(vec![
                row.thresholds[0].into(),
                row.thresholds[1].into(),
                v.c_a.into(),
                v.c_t.into(),
            ]);
        }
        for (m, tau_2) in fig4_markers(tau_1, tau_max).into_iter().enumerate() {
            let policy = Policy::new(family.servers.clone(), vec![tau_1, tau_2])?;
            let stream = cfg.sim.stream + (k * 1000 + m) as u64;
            let result =
                sim::simulate(&sim_config(&cfg, &policy, slots, None)?.with_stream(stream))?;
            let v = rows
                .iter()
                .find(|r| r.thresholds[1] == tau_2)
                .and_then(|r| r.outcome.as_ref().ok())
                .expect("marker lies on the sweep grid");
            let sim_c_a = match &objective {
                Objective::Mean => result.mean_aoi,
                _ => return Err(CliError::usage("fig4 simulation compares mean AoI only")),
            };
            simulated.push(vec![
                tau_1.into(),
                tau_2.into(),
                v.c_a.into(),
                v.c_t.into(),
                sim_c_a.into(),
                result.empirical_c_t.into(),
            ]);
        }
    }
    emit(&analytic, out, "fig4.csv", written)?;
    emit(&simulated, out, "fig4_sim.csv", written)
}

/// `reproduce`: figure tables from the shipped example configs.
pub fn run_reproduce(
    figure: Figure,
    variant: Fig3Variant,
    slots: Option<u64>,
    out: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    prepare(out)?;
    let mut written = Vec::new();
    match figure {
        Figure::Fig2 => emit(&fig2_table()?, out, "fig2.csv", &mut written)?,
        Figure::Fig3 => fig3(variant, slots, out, &mut written)?,
        Figure::Fig4 => fig4(slots, out, &mut written)?,
    }
    Ok(written)
}
