//! Experiment configuration files (JSON).
//!
//! Parsing happens in two passes. Serde checks the shape of the document and
//! reports the field path plus line and column; validation then checks model
//! invariants and names the violated one.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use agewise_core::aoi::check_thresholds;
use agewise_core::dph::{MAX_MOMENT_ORDER, PMF_NORMALIZATION_TOL, SUM_TOL};
use agewise_core::linalg::Matrix;
use agewise_core::opt::{PolicyFamily, SubsetOrder};
use agewise_core::sim::MAX_HORIZON;
use agewise_core::{AoiSolution, Dph, Objective, Policy, ServerSpec};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, ConfigError};

/// Default truncation tolerance for tabulated cost functions.
pub const TABLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    servers: Vec<RawServer>,
    #[serde(default)]
    policy: Option<RawPolicy>,
    #[serde(default)]
    policies: Vec<RawPolicy>,
    #[serde(default)]
    objective: Option<RawObjective>,
    #[serde(default)]
    sim: Option<RawSim>,
    #[serde(default)]
    search: Option<RawSearch>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawServer {
    name: String,
    #[serde(rename = "type")]
    kind: ServerType,
    parameters: serde_json::Value,
    cost: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ServerType {
    Geometric,
    MixedGeometric,
    BoundedPmf,
    Dph,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometricParams {
    p: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixedGeometricParams {
    p1: f64,
    p2: f64,
    w1: f64,
    w2: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundedPmfParams {
    masses: BTreeMap<u32, f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DphParams {
    beta: Vec<f64>,
    transient: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    order: Vec<String>,
    thresholds: Vec<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawObjective {
    Mean,
    Polynomial {
        coefficients: Vec<f64>,
    },
    Violation {
        threshold: u64,
    },
    #[serde(alias = "custom-table")]
    CustomTable {
        values: Vec<f64>,
        #[serde(default)]
        tolerance: Option<f64>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    slots: Option<u64>,
    seed: Option<u64>,
    warmup: Option<u64>,
    #[serde(default)]
    stream: u64,
    script: Option<Vec<u64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSearch {
    pool: Option<Vec<String>>,
    max_servers: usize,
    tau_max: Option<u32>,
    #[serde(default)]
    budgets: Vec<f64>,
    #[serde(default)]
    order: OrderName,
    #[serde(default)]
    sweep: Vec<RawFamily>,
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum OrderName {
    #[default]
    MeanDescending,
    Given,
    Permute,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    order: Vec<String>,
    fixed: Vec<Option<u32>>,
}

/// Cost functional selected by a config.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    Standard(Objective),
    /// `f(n) = values[n - 1]`, held at the last value beyond the table.
    Table {
        values: Vec<f64>,
        tolerance: f64,
    },
}

impl Default for ObjectiveSpec {
    fn default() -> Self {
        ObjectiveSpec::Standard(Objective::Mean)
    }
}

impl ObjectiveSpec {
    pub fn label(&self) -> String {
        match self {
            ObjectiveSpec::Standard(o) => o.label(),
            ObjectiveSpec::Table { values, .. } => format!("table({} values)", values.len()),
        }
    }

    /// The objective when it is supported by the optimizer.
    pub fn standard(&self) -> Option<&Objective> {
        match self {
            ObjectiveSpec::Standard(o) => Some(o),
            ObjectiveSpec::Table { .. } => None,
        }
    }

    /// `C_A` for an analyzed policy.
    pub fn evaluate(&self, solution: &AoiSolution) -> agewise_core::Result<f64> {
        match self {
            ObjectiveSpec::Standard(o) => solution.cost(o),
            ObjectiveSpec::Table { values, tolerance } => {
                let last = *values.last().expect("validated nonempty");
                let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let f = |n: u64| values.get(n as usize - 1).copied().unwrap_or(last);
                let envelope = agewise_core::aoi::Envelope { scale, degree: 0 };
                Ok(solution.general_cost(f, Some(envelope), *tolerance)?.value)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimSettings {
    pub slots: Option<u64>,
    pub seed: Option<u64>,
    pub warmup: Option<u64>,
    pub stream: u64,
    /// Fixed service durations that replace sampling.
    pub script: Option<Vec<u64>>,
}

#[derive(Debug, Clone)]
pub struct SearchSettings {
    pub pool: Vec<ServerSpec>,
    pub max_servers: usize,
    pub tau_max: Option<u32>,
    pub budgets: Vec<f64>,
    pub order: SubsetOrder,
    pub sweep: Vec<PolicyFamily>,
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub servers: Vec<ServerSpec>,
    pub policy: Option<Policy>,
    /// Extra policies for multi-policy figures.
    pub policies: Vec<Policy>,
    pub objective: ObjectiveSpec,
    pub sim: SimSettings,
    pub search: Option<SearchSettings>,
}

impl ExperimentConfig {
    pub fn server(&self, name: &str) -> Option<&ServerSpec> {
        self.servers.iter().find(|s| s.name == name)
    }

    pub fn require_policy(&self, command: &str) -> Result<&Policy, CliError> {
        self.policy
            .as_ref()
            .ok_or_else(|| CliError::usage(format!("`{command}` needs a `policy` section")))
    }

    pub fn require_search(&self, command: &str) -> Result<&SearchSettings, CliError> {
        self.search
            .as_ref()
            .ok_or_else(|| CliError::usage(format!("`{command}` needs a `search` section")))
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(parse_config_str(&text)?)
}

/// Parses and validates config text.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let invariant = if inner.is_syntax() || inner.is_eof() {
            "json_syntax"
        } else {
            "schema"
        };
        ConfigError {
            path,
            invariant: invariant.into(),
            message: inner.to_string(),
            line: Some(inner.line()),
            column: Some(inner.column()),
        }
    })?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<ExperimentConfig, ConfigError> {
    if raw.servers.is_empty() {
        return Err(ConfigError::new(
            "servers",
            "servers_nonempty",
            "at least one server is required",
        ));
    }
    let mut servers = Vec::with_capacity(raw.servers.len());
    let mut seen = HashMap::new();
    for (i, s) in raw.servers.iter().enumerate() {
        let at = format!("servers[{i}]");
        if s.name.is_empty() {
            return Err(ConfigError::new(
                format!("{at}.name"),
                "unique_server_names",
                "server name is empty",
            ));
        }
        if let Some(j) = seen.insert(s.name.as_str(), i) {
            return Err(ConfigError::new(
                format!("{at}.name"),
                "unique_server_names",
                format!("name `{}` already used by servers[{j}]", s.name),
            ));
        }
        if !(s.cost >= 0.0 && s.cost.is_finite()) {
            return Err(ConfigError::new(
                format!("{at}.cost"),
                "nonnegative_cost",
                format!("cost {} must be finite and nonnegative", s.cost),
            ));
        }
        let service = build_service(s, &format!("{at}.parameters"))?;
        let spec = ServerSpec::new(s.name.clone(), service, s.cost).map_err(|e| {
            ConfigError::new(format!("{at}.cost"), "nonnegative_cost", e.to_string())
        })?;
        servers.push(spec);
    }

    let policy = raw
        .policy
        .as_ref()
        .map(|p| build_policy(&servers, p, "policy"))
        .transpose()?;
    let policies = raw
        .policies
        .iter()
        .enumerate()
        .map(|(i, p)| build_policy(&servers, p, &format!("policies[{i}]")))
        .collect::<Result<_, _>>()?;
    let objective = raw
        .objective
        .map(build_objective)
        .transpose()?
        .unwrap_or_default();
    let sim = raw.sim.map(build_sim).transpose()?.unwrap_or_default();
    let search = raw.search.map(|s| build_search(&servers, s)).transpose()?;

    Ok(ExperimentConfig {
        servers,
        policy,
        policies,
        objective,
        sim,
        search,
    })
}

fn typed<T: DeserializeOwned>(value: &serde_json::Value, at: &str) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = match e.path().to_string().as_str() {
            "." => at.to_owned(),
            p => format!("{at}.{p}"),
        };
        ConfigError::new(path, "schema", e.into_inner().to_string())
    })
}

fn build_service(server: &RawServer, at: &str) -> Result<Dph, ConfigError> {
    let model_err = |field: &str, invariant: &str| {
        let path = if field.is_empty() {
            at.to_owned()
        } else {
            format!("{at}.{field}")
        };
        let invariant = invariant.to_owned();
        move |e: agewise_core::Error| ConfigError::new(path, &invariant, e.to_string())
    };
    match server.kind {
        ServerType::Geometric => {
            let p: GeometricParams = typed(&server.parameters, at)?;
            Dph::geometric(p.p).map_err(model_err("p", "probability_range"))
        }
        ServerType::MixedGeometric => {
            let p: MixedGeometricParams = typed(&server.parameters, at)?;
            for (name, v) in [("p1", p.p1), ("p2", p.p2)] {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(ConfigError::new(
                        format!("{at}.{name}"),
                        "probability_range",
                        format!("geometric parameter {v} outside (0, 1]"),
                    ));
                }
            }
            if p.w1 < 0.0 || p.w2 < 0.0 || ((p.w1 + p.w2) - 1.0).abs() > SUM_TOL {
                return Err(ConfigError::new(
                    format!("{at}.w1"),
                    "mixing_weights",
                    format!(
                        "weights ({}, {}) must be nonnegative and sum to 1",
                        p.w1, p.w2
                    ),
                ));
            }
            Dph::mixed_geometric(p.p1, p.p2, p.w1, p.w2).map_err(model_err("", "mixing_weights"))
        }
        ServerType::BoundedPmf => {
            let p: BoundedPmfParams = typed(&server.parameters, at)?;
            let path = format!("{at}.masses");
            if p.masses.is_empty() {
                return Err(ConfigError::new(
                    path,
                    "pmf_normalization",
                    "pmf has empty support",
                ));
            }
            if let Some((n, m)) = p
                .masses
                .iter()
                .find(|(_, m)| !(**m >= 0.0 && m.is_finite()))
            {
                return Err(ConfigError::new(
                    format!("{path}.{n}"),
                    "nonnegative_mass",
                    format!("mass {m} is not a finite nonnegative number"),
                ));
            }
            if p.masses.get(&0).is_some_and(|m| *m > 0.0) {
                return Err(ConfigError::new(
                    format!("{path}.0"),
                    "support_starts_at_one",
                    "service times are at least one slot",
                ));
            }
            let total: f64 = p.masses.values().sum();
            if (total - 1.0).abs() > PMF_NORMALIZATION_TOL {
                return Err(ConfigError::new(
                    path,
                    "pmf_normalization",
                    format!("masses sum to {total}, not 1 (tolerance {PMF_NORMALIZATION_TOL:e})"),
                ));
            }
            Dph::from_bounded_pmf(&p.masses).map_err(model_err("masses", "pmf_normalization"))
        }
        ServerType::Dph => {
            let p: DphParams = typed(&server.parameters, at)?;
            let order = p.beta.len();
            if p.transient.len() != order || p.transient.iter().any(|r| r.len() != order) {
                return Err(ConfigError::new(
                    format!("{at}.transient"),
                    "square_matrix",
                    format!("transient matrix must be {order}x{order} to match beta"),
                ));
            }
            let flat: Vec<f64> = p.transient.concat();
            let a = Matrix::from_row_slice(order, order, &flat);
            Dph::new(p.beta, a).map_err(model_err("", "dph_representation"))
        }
    }
}

fn lookup<'a>(
    servers: &'a [ServerSpec],
    name: &str,
    at: String,
) -> Result<&'a ServerSpec, ConfigError> {
    servers.iter().find(|s| s.name == name).ok_or_else(|| {
        ConfigError::new(at, "server_reference", format!("no server named `{name}`"))
    })
}

fn build_policy(servers: &[ServerSpec], raw: &RawPolicy, at: &str) -> Result<Policy, ConfigError> {
    if raw.order.is_empty() {
        return Err(ConfigError::new(
            format!("{at}.order"),
            "policy_nonempty",
            "a policy needs at least one server",
        ));
    }
    let chosen = raw
        .order
        .iter()
        .enumerate()
        .map(|(i, name)| lookup(servers, name, format!("{at}.order[{i}]")).cloned())
        .collect::<Result<Vec<_>, _>>()?;
    if raw.thresholds.len() != chosen.len() {
        return Err(ConfigError::new(
            format!("{at}.thresholds"),
            "threshold_count",
            format!(
                "{} servers need {} thresholds, got {}",
                chosen.len(),
                chosen.len(),
                raw.thresholds.len()
            ),
        ));
    }
    check_thresholds(&raw.thresholds).map_err(|e| {
        ConfigError::new(format!("{at}.thresholds"), "threshold_order", e.to_string())
    })?;
    Policy::new(chosen, raw.thresholds.clone())
        .map_err(|e| ConfigError::new(at, "threshold_order", e.to_string()))
}

fn build_objective(raw: RawObjective) -> Result<ObjectiveSpec, ConfigError> {
    Ok(match raw {
        RawObjective::Mean => ObjectiveSpec::Standard(Objective::Mean),
        RawObjective::Violation { threshold } => {
            ObjectiveSpec::Standard(Objective::Violation(threshold))
        }
        RawObjective::Polynomial { coefficients } => {
            let at = "objective.coefficients";
            if coefficients.is_empty() || coefficients.len() as u32 > MAX_MOMENT_ORDER {
                return Err(ConfigError::new(
                    at,
                    "polynomial_degree",
                    format!(
                        "need 1 to {MAX_MOMENT_ORDER} coefficients (degree at most {})",
                        MAX_MOMENT_ORDER - 1
                    ),
                ));
            }
            if coefficients.iter().any(|c| !c.is_finite()) {
                return Err(ConfigError::new(
                    at,
                    "finite_values",
                    "coefficients must be finite",
                ));
            }
            ObjectiveSpec::Standard(Objective::Polynomial(coefficients))
        }
        RawObjective::CustomTable { values, tolerance } => {
            if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                return Err(ConfigError::new(
                    "objective.values",
                    "finite_values",
                    "table must be nonempty with finite values",
                ));
            }
            let tolerance = tolerance.unwrap_or(TABLE_TOLERANCE);
            if tolerance.is_nan() || tolerance <= 0.0 {
                return Err(ConfigError::new(
                    "objective.tolerance",
                    "positive_tolerance",
                    "tolerance must be positive",
                ));
            }
            ObjectiveSpec::Table { values, tolerance }
        }
    })
}

fn build_sim(raw: RawSim) -> Result<SimSettings, ConfigError> {
    if let Some(slots) = raw.slots {
        if slots == 0 || slots > MAX_HORIZON {
            return Err(ConfigError::new(
                "sim.slots",
                "horizon_range",
                format!("slots must lie in 1..={MAX_HORIZON}, got {slots}"),
            ));
        }
        if raw.warmup.is_some_and(|w| w >= slots) {
            return Err(ConfigError::new(
                "sim.warmup",
                "warmup_below_horizon",
                "warmup must be shorter than slots",
            ));
        }
    }
    if let Some(i) = raw
        .script
        .as_ref()
        .and_then(|s| s.iter().position(|&d| d == 0))
    {
        return Err(ConfigError::new(
            format!("sim.script[{i}]"),
            "positive_service",
            "scripted service times are at least one slot",
        ));
    }
    Ok(SimSettings {
        slots: raw.slots,
        seed: raw.seed,
        warmup: raw.warmup,
        stream: raw.stream,
        script: raw.script,
    })
}

fn build_search(servers: &[ServerSpec], raw: RawSearch) -> Result<SearchSettings, ConfigError> {
    let pool = match &raw.pool {
        None => servers.to_vec(),
        Some(names) => names
            .iter()
            .enumerate()
            .map(|(i, n)| lookup(servers, n, format!("search.pool[{i}]")).cloned())
            .collect::<Result<_, _>>()?,
    };
    if pool.is_empty() {
        return Err(ConfigError::new(
            "search.pool",
            "servers_nonempty",
            "search pool is empty",
        ));
    }
    if raw.max_servers == 0 || raw.max_servers > pool.len() || raw.max_servers > 63 {
        return Err(ConfigError::new(
            "search.max_servers",
            "max_servers_range",
            format!(
                "max_servers must lie in 1..={}, got {}",
                pool.len().min(63),
                raw.max_servers
            ),
        ));
    }
    if raw.tau_max == Some(0) {
        return Err(ConfigError::new(
            "search.tau_max",
            "tau_max_positive",
            "tau_max must be at least 1",
        ));
    }
    if let Some(i) = raw.budgets.iter().position(|b| b.is_nan() || *b < 0.0) {
        return Err(ConfigError::new(
            format!("search.budgets[{i}]"),
            "nonnegative_budget",
            format!("budget {} must be nonnegative", raw.budgets[i]),
        ));
    }
    let mut sweep = Vec::with_capacity(raw.sweep.len());
    for (k, fam) in raw.sweep.iter().enumerate() {
        let at = format!("search.sweep[{k}]");
        let chosen = fam
            .order
            .iter()
            .enumerate()
            .map(|(i, n)| lookup(servers, n, format!("{at}.order[{i}]")).cloned())
            .collect::<Result<Vec<_>, _>>()?;
        if chosen.is_empty() || fam.fixed.len() != chosen.len() {
            return Err(ConfigError::new(
                format!("{at}.fixed"),
                "threshold_count",
                format!(
                    "need one entry (number or null) per server, got {} for {}",
                    fam.fixed.len(),
                    chosen.len()
                ),
            ));
        }
        let family = PolicyFamily::new(chosen, fam.fixed.clone()).map_err(|e| {
            ConfigError::new(format!("{at}.fixed"), "threshold_order", e.to_string())
        })?;
        sweep.push(family);
    }
    Ok(SearchSettings {
        pool,
        max_servers: raw.max_servers,
        tau_max: raw.tau_max,
        budgets: raw.budgets,
        order: match raw.order {
            OrderName::MeanDescending => SubsetOrder::MeanDescending,
            OrderName::Given => SubsetOrder::Given,
            OrderName::Permute => SubsetOrder::Permute,
        },
        sweep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "servers": [
            {"name": "A", "type": "geometric", "parameters": {"p": 0.5}, "cost": 1},
            {"name": "B", "type": "bounded_pmf", "parameters": {"masses": {"2": 0.5, "3": 0.5}}, "cost": 4}
        ],
        "policy": {"order": ["A", "B"], "thresholds": [2, 5]}
    }"#;

    fn invariant_of(text: &str) -> (String, String) {
        let e = parse_config_str(text).unwrap_err();
        (e.invariant, e.path)
    }

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config_str(BASE).unwrap();
        assert_eq!(cfg.servers.len(), 2);
        assert_eq!(cfg.policy.unwrap().label(), "[A,B](2,5)");
        assert_eq!(cfg.objective, ObjectiveSpec::Standard(Objective::Mean));
        assert!(cfg.search.is_none());
    }

    #[test]
    fn violations_name_invariant_and_field() {
        let cases = [
            (
                BASE.replace("[2, 5]", "[6, 3]"),
                "threshold_order",
                "policy.thresholds",
            ),
            (
                BASE.replace("[2, 5]", "[0, 3]"),
                "threshold_order",
                "policy.thresholds",
            ),
            (
                BASE.replace("[2, 5]", "[2]"),
                "threshold_count",
                "policy.thresholds",
            ),
            (
                BASE.replace("\"B\"]", "\"C\"]"),
                "server_reference",
                "policy.order[1]",
            ),
            (
                BASE.replace("0.5}, \"cost\": 1", "1.5}, \"cost\": 1"),
                "probability_range",
                "servers[0].parameters.p",
            ),
            (
                BASE.replace("\"3\": 0.5", "\"3\": 0.4"),
                "pmf_normalization",
                "servers[1].parameters.masses",
            ),
            (
                BASE.replace("\"cost\": 4", "\"cost\": -4"),
                "nonnegative_cost",
                "servers[1].cost",
            ),
            (
                BASE.replace("\"name\": \"B\"", "\"name\": \"A\""),
                "unique_server_names",
                "servers[1].name",
            ),
            (
                BASE.replace("\"p\": 0.5", "\"q\": 0.5"),
                "schema",
                "servers[0].parameters.q",
            ),
        ];
        for (text, invariant, path) in cases {
            assert_eq!(
                invariant_of(&text),
                (invariant.to_owned(), path.to_owned()),
                "{text}"
            );
        }
    }

    #[test]
    fn type_errors_carry_line_and_path() {
        let text = BASE.replace("\"cost\": 4", "\"cost\": \"four\"");
        let e = parse_config_str(&text).unwrap_err();
        assert_eq!(e.invariant, "schema");
        assert_eq!(e.path, "servers[1].cost");
        assert_eq!(e.line, Some(4));
        let e = parse_config_str("{\"servers\": [").unwrap_err();
        assert_eq!(e.invariant, "json_syntax");
        let e = parse_config_str(&BASE.replace("\"policy\"", "\"polcy\"")).unwrap_err();
        assert_eq!(e.invariant, "schema");
    }

    #[test]
    fn sections_are_validated() {
        let with =
            |section: &str| BASE.replacen("\"policy\"", &format!("{section}, \"policy\""), 1);
        assert_eq!(
            invariant_of(&with(r#""sim": {"slots": 10, "warmup": 10}"#)).0,
            "warmup_below_horizon"
        );
        assert_eq!(
            invariant_of(&with(r#""sim": {"slots": 0}"#)).0,
            "horizon_range"
        );
        assert_eq!(
            invariant_of(&with(r#""sim": {"script": [3, 0]}"#)).1,
            "sim.script[1]"
        );
        assert_eq!(
            invariant_of(&with(r#""search": {"max_servers": 3}"#)).0,
            "max_servers_range"
        );
        assert_eq!(
            invariant_of(&with(r#""search": {"max_servers": 1, "budgets": [1, -1]}"#)).1,
            "search.budgets[1]"
        );
        assert_eq!(
            invariant_of(&with(
                r#""search": {"max_servers": 1, "sweep": [{"order": ["A", "B"], "fixed": [5, 2]}]}"#
            ))
            .0,
            "threshold_order"
        );
        assert_eq!(
            invariant_of(&with(
                r#""objective": {"kind": "polynomial", "coefficients": []}"#
            ))
            .0,
            "polynomial_degree"
        );
        let cfg = parse_config_str(&with(
            r#""objective": {"kind": "custom-table", "values": [0, 1]}, "search": {"pool": ["B"], "max_servers": 1, "order": "permute"}"#,
        ))
        .unwrap();
        assert!(cfg.objective.standard().is_none());
        assert_eq!(cfg.search.unwrap().pool[0].name, "B");
    }

    #[test]
    fn dph_servers_need_square_blocks() {
        let text = BASE.replace(
            r#""type": "geometric", "parameters": {"p": 0.5}"#,
            r#""type": "dph", "parameters": {"beta": [1, 0], "transient": [[0.5, 0.5]]}"#,
        );
        assert_eq!(
            invariant_of(&text),
            (
                "square_matrix".into(),
                "servers[0].parameters.transient".into()
            )
        );
        let ok = BASE.replace(
            r#""type": "geometric", "parameters": {"p": 0.5}"#,
            r#""type": "dph", "parameters": {"beta": [1, 0], "transient": [[0.5, 0.5], [0, 0.5]]}"#,
        );
        assert!((parse_config_str(&ok).unwrap().servers[0].service.mean() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn table_objective_matches_violation_indicator() {
        let cfg = parse_config_str(BASE).unwrap();
        let sol = agewise_core::analyze(cfg.policy.as_ref().unwrap()).unwrap();
        let mut values = vec![0.0; 8];
        values.push(1.0);
        let table = ObjectiveSpec::Table {
            values,
            tolerance: 1e-13,
        };
        let direct = sol.violation_probability(8);
        assert!((table.evaluate(&sol).unwrap() - direct).abs() < 1e-12);
    }
}
