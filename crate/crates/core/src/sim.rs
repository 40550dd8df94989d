//! Slot-level simulation of the status-update link.
//!
//! Each slot `k` runs three steps: the in-flight packet completes if its
//! service ends at `k`; the age drops to `k - g` on a reception (`g` is the
//! generation slot) and otherwise grows by one; an idle source then asks
//! [`Policy::decision`] whether to wait or which server to use. The run
//! starts at `Delta_0 = 1` with an idle link, and slot 0 already applies the
//! decision step.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::aoi::{AoiSolution, Decision, Policy};
use crate::error::{domain, Error, Result};

/// Slots discarded before statistics unless configured otherwise.
pub const DEFAULT_WARMUP: u64 = 10_000;
/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 50;
/// Longest supported run; slot counts stay exact in `f64` below this.
pub const MAX_HORIZON: u64 = 1 << 52;
/// Mass both laws must place at or below `n_max` in [`tv_distance`].
pub const TV_COVERAGE: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub policy: Policy,
    /// Last simulated slot `K`; slots `0..=K` are run.
    pub horizon: u64,
    pub seed: u64,
    /// ChaCha stream, so replications sharing a seed stay independent.
    pub stream: u64,
    /// Forced service durations, consumed in order instead of sampling.
    pub scripted_services: Option<Vec<u64>>,
    /// Statistics cover slots `warmup + 1..=horizon`.
    pub warmup: u64,
}

impl SimConfig {
    pub fn new(policy: Policy, horizon: u64, seed: u64) -> Self {
        Self {
            policy,
            horizon,
            seed,
            stream: 0,
            scripted_services: None,
            warmup: DEFAULT_WARMUP.min(horizon.saturating_sub(1)),
        }
    }

    pub fn with_warmup(mut self, warmup: u64) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn with_script(mut self, services: Vec<u64>) -> Self {
        self.scripted_services = Some(services);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(domain("horizon must be at least 1"));
        }
        if self.horizon > MAX_HORIZON {
            return Err(Error::HorizonOverflow(self.horizon));
        }
        if self.warmup >= self.horizon {
            return Err(domain(format!(
                "warmup {} must be below the horizon {}",
                self.warmup, self.horizon
            )));
        }
        if let Some(script) = &self.scripted_services {
            if script.contains(&0) {
                return Err(domain("scripted service durations must be at least 1"));
            }
        }
        Ok(())
    }
}

/// State of one slot after all three steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotRecord {
    pub k: u64,
    pub age: u64,
    /// Server whose packet was received in this slot.
    pub received: Option<usize>,
    /// Server on which a transmission started in this slot.
    pub started: Option<usize>,
    /// True when the link is idle because the age is below `t_1`.
    pub waiting: bool,
}

#[derive(Debug, Clone, Copy)]
struct InFlight {
    server: usize,
    generated: u64,
    done_at: u64,
}

struct Link<'a> {
    policy: &'a Policy,
    rng: ChaCha8Rng,
    script: Option<std::slice::Iter<'a, u64>>,
    started: usize,
    k: u64,
    age: u64,
    in_flight: Option<InFlight>,
}

impl<'a> Link<'a> {
    fn new(cfg: &'a SimConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(cfg.stream);
        Self {
            policy: &cfg.policy,
            rng,
            script: cfg.scripted_services.as_ref().map(|s| s.iter()),
            started: 0,
            k: 0,
            age: 1,
            in_flight: None,
        }
    }

    fn service(&mut self, server: usize) -> Result<u64> {
        let duration = match &mut self.script {
            Some(it) => *it
                .next()
                .ok_or(Error::ScriptExhausted { used: self.started })?,
            None => self.policy.servers()[server].service.sample(&mut self.rng),
        };
        self.started += 1;
        Ok(duration)
    }

    // Step 3 for the current slot.
    fn decide(&mut self, record: &mut SlotRecord) -> Result<()> {
        if self.in_flight.is_some() {
            return Ok(());
        }
        match self.policy.decision(self.age) {
            Decision::Wait => record.waiting = true,
            Decision::Transmit(server) => {
                let duration = self.service(server)?;
                self.in_flight = Some(InFlight {
                    server,
                    generated: self.k,
                    done_at: self.k + duration,
                });
                record.started = Some(server);
            }
        }
        Ok(())
    }

    fn first(&mut self) -> Result<SlotRecord> {
        let mut record = SlotRecord {
            k: 0,
            age: self.age,
            received: None,
            started: None,
            waiting: false,
        };
        self.decide(&mut record)?;
        Ok(record)
    }

    fn step(&mut self) -> Result<SlotRecord> {
        self.k += 1;
        let mut record = SlotRecord {
            k: self.k,
            age: 0,
            received: None,
            started: None,
            waiting: false,
        };
        match self.in_flight {
            Some(p) if p.done_at == self.k => {
                self.age = self.k - p.generated;
                self.in_flight = None;
                record.received = Some(p.server);
            }
            _ => self.age += 1,
        }
        record.age = self.age;
        self.decide(&mut record)?;
        Ok(record)
    }
}

/// Per-slot records for slots `0..=horizon`, ignoring the warmup setting.
pub fn trace(cfg: &SimConfig) -> Result<Vec<SlotRecord>> {
    if cfg.horizon > MAX_HORIZON {
        return Err(Error::HorizonOverflow(cfg.horizon));
    }
    let mut link = Link::new(cfg);
    let mut out = Vec::with_capacity(cfg.horizon as usize + 1);
    out.push(link.first()?);
    for _ in 0..cfg.horizon {
        out.push(link.step()?);
    }
    Ok(out)
}

/// Batch-means standard errors of the headline estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct StdErrors {
    pub mean_aoi: f64,
    pub p_wait: f64,
    pub frequencies: Vec<f64>,
    pub transmission_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// AoI value to number of recorded slots with that age.
    pub histogram: BTreeMap<u64, u64>,
    /// Number of recorded slots, `horizon - warmup`.
    pub slots: u64,
    pub mean_aoi: f64,
    /// Transmission starts per recorded slot, by server.
    pub empirical_f: Vec<f64>,
    pub empirical_p_wait: f64,
    pub empirical_c_t: f64,
    /// Receptions during the recorded slots.
    pub cycles: u64,
    pub std_errors: StdErrors,
}

impl SimResult {
    /// Empirical `Pr(Delta = n)`.
    pub fn probability(&self, n: u64) -> f64 {
        self.histogram
            .get(&n)
            .map_or(0.0, |&c| c as f64 / self.slots as f64)
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    slots: u64,
    age_sum: u128,
    waits: u64,
    starts: Vec<u64>,
}

impl Tally {
    fn new(servers: usize) -> Self {
        Self {
            starts: vec![0; servers],
            ..Self::default()
        }
    }

    fn add(&mut self, r: &SlotRecord) {
        self.slots += 1;
        self.age_sum += u128::from(r.age);
        self.waits += u64::from(r.waiting);
        if let Some(j) = r.started {
            self.starts[j] += 1;
        }
    }

    fn mean_aoi(&self) -> f64 {
        self.age_sum as f64 / self.slots as f64
    }

    fn p_wait(&self) -> f64 {
        self.waits as f64 / self.slots as f64
    }

    fn frequencies(&self) -> Vec<f64> {
        self.starts
            .iter()
            .map(|&s| s as f64 / self.slots as f64)
            .collect()
    }

    fn transmission_cost(&self, costs: &[f64]) -> f64 {
        self.frequencies()
            .iter()
            .zip(costs)
            .map(|(f, c)| f * c)
            .sum()
    }
}

fn std_error(samples: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = samples.collect();
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

/// Runs one replication and summarizes the slots after warmup.
pub fn simulate(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let servers = cfg.policy.server_count();
    let costs: Vec<f64> = cfg.policy.servers().iter().map(|s| s.cost).collect();
    let recorded = cfg.horizon - cfg.warmup;
    let batches = BATCHES.min(recorded as usize);

    let mut link = Link::new(cfg);
    link.first()?;
    for _ in 0..cfg.warmup {
        link.step()?;
    }

    let mut counts: Vec<u64> = Vec::new();
    let mut cycles = 0;
    let mut total = Tally::new(servers);
    let mut batch = Tally::new(servers);
    let mut finished: Vec<Tally> = Vec::with_capacity(batches);
    for i in 0..recorded {
        let r = link.step()?;
        let age = r.age as usize;
        if age >= counts.len() {
            counts.resize(age + 1, 0);
        }
        counts[age] += 1;
        cycles += u64::from(r.received.is_some());
        total.add(&r);
        batch.add(&r);
        // Batch b holds recorded slots i with floor(i * B / N) = b.
        let next_batch = ((i + 1) as u128 * batches as u128 / recorded as u128) as usize;
        if next_batch > finished.len() {
            finished.push(std::mem::replace(&mut batch, Tally::new(servers)));
        }
    }

    let std_errors = StdErrors {
        mean_aoi: std_error(finished.iter().map(Tally::mean_aoi)),
        p_wait: std_error(finished.iter().map(Tally::p_wait)),
        frequencies: (0..servers)
            .map(|j| std_error(finished.iter().map(|t| t.frequencies()[j])))
            .collect(),
        transmission_cost: std_error(finished.iter().map(|t| t.transmission_cost(&costs))),
    };
    let histogram = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(n, &c)| (n as u64, c))
        .collect();
    Ok(SimResult {
        histogram,
        slots: recorded,
        mean_aoi: total.mean_aoi(),
        empirical_f: total.frequencies(),
        empirical_p_wait: total.p_wait(),
        empirical_c_t: total.transmission_cost(&costs),
        cycles,
        std_errors,
    })
}

/// Independent replications on streams `cfg.stream + r`, run in parallel.
pub fn simulate_replications(cfg: &SimConfig, count: u64) -> Result<Vec<SimResult>> {
    (0..count)
        .into_par_iter()
        .map(|r| simulate(&cfg.clone().with_stream(cfg.stream + r)))
        .collect()
}

/// Total-variation distance between the empirical and analytic AoI laws
/// over `1..=n_max`, plus half the mass either law puts above `n_max`,
/// which bounds the omitted part of the distance.
pub fn tv_distance(sim: &SimResult, solution: &AoiSolution, n_max: u64) -> Result<f64> {
    let mut sum = 0.0;
    let mut analytic_mass = 0.0;
    for (n, p) in solution.pmf_iter().take(n_max as usize) {
        analytic_mass += p;
        sum += (sim.probability(n) - p).abs();
    }
    let sim_mass: f64 = sim
        .histogram
        .range(..=n_max)
        .map(|(_, &c)| c as f64)
        .sum::<f64>()
        / sim.slots as f64;
    if analytic_mass < TV_COVERAGE || sim_mass < TV_COVERAGE {
        return Err(Error::Coverage(format!(
            "n_max = {n_max} covers {analytic_mass:.9} of the analytic and {sim_mass:.9} of the simulated mass"
        )));
    }
    let residual = (1.0 - analytic_mass).max(0.0) + (1.0 - sim_mass).max(0.0);
    Ok((0.5 * (sum + residual)).min(1.0))
}

/// Time-averaged `f(Delta_k)` and `sum_j c_j f_j` from a simulation.
pub fn empirical_costs<F: Fn(u64) -> f64>(sim: &SimResult, costs: &[f64], f: F) -> (f64, f64) {
    let c_a = sim
        .histogram
        .iter()
        .map(|(&n, &c)| f(n) * c as f64)
        .sum::<f64>()
        / sim.slots as f64;
    let c_t = sim.empirical_f.iter().zip(costs).map(|(f, c)| f * c).sum();
    (c_a, c_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aoi::{analyze, ServerSpec};
    use crate::dph::Dph;

    fn server(name: &str, d: Dph, cost: f64) -> ServerSpec {
        ServerSpec::new(name, d, cost).unwrap()
    }

    fn fig2_policy() -> Policy {
        Policy::new(
            vec![
                server("S1", Dph::geometric(0.2).unwrap(), 1.0),
                server("S2", Dph::geometric(0.5).unwrap(), 2.0),
            ],
            vec![3, 6],
        )
        .unwrap()
    }

    #[test]
    fn figure_two_replay() {
        let cfg = SimConfig::new(fig2_policy(), 20, 0).with_script(vec![7, 5, 2, 10]);
        let ages: Vec<u64> = trace(&cfg).unwrap().iter().map(|r| r.age).collect();
        assert_eq!(
            ages,
            [1, 2, 3, 4, 5, 6, 7, 8, 9, 7, 8, 9, 10, 11, 5, 6, 2, 3, 4, 5, 6]
        );
        let starts: Vec<(u64, usize)> = trace(&cfg)
            .unwrap()
            .iter()
            .filter_map(|r| r.started.map(|j| (r.k, j)))
            .collect();
        assert_eq!(starts, [(2, 0), (9, 1), (14, 0), (17, 0)]);
    }

    #[test]
    fn exhausted_script_is_an_error() {
        let cfg = SimConfig::new(fig2_policy(), 20, 0).with_script(vec![7, 5, 2]);
        assert_eq!(trace(&cfg), Err(Error::ScriptExhausted { used: 3 }));
    }

    #[test]
    fn unit_service_concentrates_at_one() {
        let p = Policy::new(
            vec![server("D", Dph::deterministic(1).unwrap(), 1.0)],
            vec![1],
        )
        .unwrap();
        let r = simulate(&SimConfig::new(p, 1000, 3).with_warmup(10)).unwrap();
        assert_eq!(r.histogram.len(), 1);
        assert_eq!(r.histogram[&1], 990);
        assert_eq!(r.mean_aoi, 1.0);
    }

    #[test]
    fn deterministic_two_slot_costs() {
        let p = Policy::new(
            vec![server("D", Dph::deterministic(2).unwrap(), 10.0)],
            vec![1],
        )
        .unwrap();
        let r = simulate(&SimConfig::new(p, 10_000, 1).with_warmup(100)).unwrap();
        let (c_a, c_t) = empirical_costs(&r, &[10.0], |n| n as f64);
        assert_eq!(c_a, 2.5);
        assert_eq!(c_t, 5.0);
        assert_eq!(r.cycles, 4950);
    }

    #[test]
    fn same_seed_same_result() {
        let p = fig2_policy();
        let a = simulate(&SimConfig::new(p.clone(), 50_000, 11)).unwrap();
        let b = simulate(&SimConfig::new(p.clone(), 50_000, 11)).unwrap();
        assert_eq!(a, b);
        let c = simulate(&SimConfig::new(p, 50_000, 11).with_stream(1)).unwrap();
        assert_ne!(a.histogram, c.histogram);
    }

    #[test]
    fn histogram_counts_recorded_slots() {
        let r = simulate(&SimConfig::new(fig2_policy(), 30_000, 5)).unwrap();
        assert_eq!(r.histogram.values().sum::<u64>(), r.slots);
        assert_eq!(r.slots, 20_000);
        assert!(r.empirical_f.iter().all(|f| (0.0..=1.0).contains(f)));
    }

    #[test]
    fn config_errors() {
        let p = fig2_policy();
        assert!(matches!(
            simulate(&SimConfig::new(p.clone(), 0, 0)),
            Err(Error::Domain(_))
        ));
        assert_eq!(
            simulate(&SimConfig::new(p.clone(), MAX_HORIZON + 1, 0)),
            Err(Error::HorizonOverflow(MAX_HORIZON + 1))
        );
        assert!(simulate(&SimConfig::new(p.clone(), 10, 0).with_warmup(10)).is_err());
        assert!(simulate(&SimConfig::new(p, 10, 0).with_warmup(0).with_script(vec![0])).is_err());
    }

    #[test]
    fn tv_distance_extremes() {
        let p = Policy::new(
            vec![server("D", Dph::deterministic(1).unwrap(), 1.0)],
            vec![1],
        )
        .unwrap();
        let sol = analyze(&p).unwrap();
        let r = simulate(&SimConfig::new(p, 100, 0).with_warmup(0)).unwrap();
        assert!(tv_distance(&r, &sol, 5).unwrap() < 1e-12);

        // Analytic law sits on {3, 4}; simulated mass sits on 1.
        let q = Policy::new(
            vec![server("D", Dph::deterministic(3).unwrap(), 1.0)],
            vec![1],
        )
        .unwrap();
        let sol3 = analyze(&q).unwrap();
        assert!((tv_distance(&r, &sol3, 10).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(tv_distance(&r, &sol3, 3), Err(Error::Coverage(_))));
    }

    #[test]
    fn geometric_zero_wait_mean_within_three_sigma() {
        let p = Policy::new(
            vec![server("G", Dph::geometric(1.0 / 30.0).unwrap(), 100.0)],
            vec![1],
        )
        .unwrap();
        let sol = analyze(&p).unwrap();
        let r = simulate(&SimConfig::new(p, 10_000_000, 2024)).unwrap();
        let gap = (r.mean_aoi - sol.mean_aoi()).abs();
        assert!(
            gap < 3.0 * r.std_errors.mean_aoi,
            "gap {gap}, se {}",
            r.std_errors.mean_aoi
        );
    }
}
