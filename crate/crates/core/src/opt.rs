//! Budget-constrained threshold search.
//!
//! [`sweep`] runs the full chain analysis per threshold tuple. [`optimize`]
//! scans far more tuples, so it evaluates them with [`Engine`], which works
//! on AoI cycles instead: a cycle starts when a packet with system time `s`
//! is delivered, waits until age `max(s, t_1)`, and ends when the next
//! packet, sent on the server the policy picks at that age, is delivered.
//! Per-cycle expectations only need prefix sums over `s` of each server's
//! service pmf, so one tuple costs `O(J^2)` table lookups.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::aoi::{analyze, check_thresholds, stationary_vector, Objective, Policy, ServerSpec};
use crate::dph::{stirling2, Dph, MAX_MOMENT_ORDER};
use crate::error::{domain, Error, Result};
use crate::linalg::Matrix;

/// All tuples `1 <= t_1 <= t_2 < t_3 < ... < t_J <= tau_max` in
/// lexicographic order.
pub fn enumerate_thresholds(servers: usize, tau_max: u32) -> Thresholds {
    Thresholds::new(servers, tau_max, 1, u32::MAX)
}

/// The tuples of [`enumerate_thresholds`] whose first entry is `t_1`.
pub fn thresholds_with_first(servers: usize, tau_max: u32, t_1: u32) -> Thresholds {
    Thresholds::new(servers, tau_max, t_1.max(1), t_1)
}

/// Number of tuples yielded by [`enumerate_thresholds`].
pub fn threshold_count(servers: usize, tau_max: u32) -> u128 {
    // Strictly increasing J-tuples plus those with t_1 = t_2.
    let t = u128::from(tau_max);
    match servers {
        0 => 0,
        1 => t,
        j => choose(t, j as u128) + choose(t, j as u128 - 1),
    }
}

fn choose(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Debug, Clone)]
pub struct Thresholds {
    servers: usize,
    tau_max: u32,
    first_lo: u32,
    first_hi: u32,
    current: Option<Vec<u32>>,
    done: bool,
}

impl Thresholds {
    fn new(servers: usize, tau_max: u32, first_lo: u32, first_hi: u32) -> Self {
        let mut t = Self {
            servers,
            tau_max,
            first_lo,
            first_hi,
            current: None,
            done: false,
        };
        t.done = servers == 0
            || tau_max < (servers as u32).saturating_sub(1).max(1)
            || first_lo > t.max_at(0);
        t
    }

    fn max_at(&self, pos: usize) -> u32 {
        let j = self.servers;
        if pos == 0 {
            // t_1 shares the bound of t_2.
            let bound = if j > 1 { self.max_at(1) } else { self.tau_max };
            return bound.min(self.first_hi);
        }
        self.tau_max - (j - 1 - pos) as u32
    }

    fn min_at(&self, prefix: &[u32], pos: usize) -> u32 {
        match pos {
            0 => self.first_lo,
            1 => prefix[0],
            p => prefix[p - 1] + 1,
        }
    }
}

impl Iterator for Thresholds {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        let next = match self.current.take() {
            None => {
                let mut t = Vec::with_capacity(self.servers);
                for pos in 0..self.servers {
                    t.push(self.min_at(&t, pos));
                }
                t
            }
            Some(mut t) => {
                let Some(pos) = (0..self.servers).rev().find(|&p| t[p] < self.max_at(p)) else {
                    self.done = true;
                    return None;
                };
                t[pos] += 1;
                for p in pos + 1..self.servers {
                    t[p] = self.min_at(&t, p);
                }
                t
            }
        };
        self.current = Some(next.clone());
        Some(next)
    }
}

/// Servers in policy order with some thresholds pinned; free entries are
/// swept over the grid.
#[derive(Debug, Clone)]
pub struct PolicyFamily {
    pub servers: Vec<ServerSpec>,
    pub fixed: Vec<Option<u32>>,
}

impl PolicyFamily {
    pub fn new(servers: Vec<ServerSpec>, fixed: Vec<Option<u32>>) -> Result<Self> {
        if servers.is_empty() || fixed.len() != servers.len() {
            return Err(domain("a family needs one threshold slot per server"));
        }
        // Smallest admissible t_j is max(1, j) (0-based), and t_j - t_i is at
        // least j - i, less one when i = 0.
        let pinned: Vec<(usize, u32)> = fixed
            .iter()
            .enumerate()
            .filter_map(|(j, f)| f.map(|v| (j, v)))
            .collect();
        for &(j, v) in &pinned {
            if v < (j as u32).max(1) {
                return Err(domain(format!(
                    "pinned t_{} = {v} is below its minimum {}",
                    j + 1,
                    j.max(1)
                )));
            }
        }
        for w in pinned.windows(2) {
            let ((i, a), (j, b)) = (w[0], w[1]);
            let gap = (j - i) as u32 - u32::from(i == 0);
            if b < a + gap {
                return Err(domain(format!(
                    "pinned thresholds t_{} = {a} and t_{} = {b} admit no ordered tuple",
                    i + 1,
                    j + 1
                )));
            }
        }
        Ok(Self { servers, fixed })
    }

    fn admits(&self, t: &[u32]) -> bool {
        self.fixed
            .iter()
            .zip(t)
            .all(|(f, v)| f.is_none_or(|f| f == *v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepValues {
    pub c_a: f64,
    pub c_t: f64,
    pub p_wait: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub thresholds: Vec<u32>,
    pub outcome: Result<SweepValues>,
}

/// Analyzes every admissible tuple of `family` up to `tau_max`. Failures
/// are kept in the row rather than aborting the sweep.
pub fn sweep(family: &PolicyFamily, tau_max: u32, objective: &Objective) -> Vec<SweepRow> {
    let tuples: Vec<Vec<u32>> = enumerate_thresholds(family.servers.len(), tau_max)
        .filter(|t| family.admits(t))
        .collect();
    tuples
        .into_par_iter()
        .map(|thresholds| {
            let outcome = Policy::new(family.servers.clone(), thresholds.clone())
                .and_then(|p| analyze(&p))
                .and_then(|sol| {
                    Ok(SweepValues {
                        c_a: sol.cost(objective)?,
                        c_t: sol.transmission_cost(),
                        p_wait: sol.p_wait(),
                    })
                });
            SweepRow {
                thresholds,
                outcome,
            }
        })
        .collect()
}

/// Evaluation of one policy by the cycle engine.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub c_a: f64,
    pub c_t: f64,
    pub p_wait: f64,
    pub kappa: Vec<f64>,
    pub frequencies: Vec<f64>,
}

/// Per-cycle expectations of one additive functional `sum f(Delta_k)`.
#[derive(Debug, Clone)]
struct Functional {
    // fc[x] = sum_{a=1}^{x-1} f(a)
    fc: Vec<f64>,
    // wait_prefix[i][x] = sum_{s<=x} p_i(s) fc[s]
    wait_prefix: Vec<Vec<f64>>,
    // svc[k][a] = E[sum_{m=a}^{a+L_k-1} f(m)]
    svc: Vec<Vec<f64>>,
    // svc_prefix[i][k][x] = sum_{s<=x} p_i(s) svc[k][s]
    svc_prefix: Vec<Vec<Vec<f64>>>,
    // svc_total[i][k] = sum_{s>=1} p_i(s) svc[k][s]
    svc_total: Vec<Vec<f64>>,
}

impl Functional {
    fn new(
        pmf: &[Vec<f64>],
        f: impl Fn(u64) -> f64,
        svc: Vec<Vec<f64>>,
        svc_total: impl Fn(usize, usize, f64) -> f64,
    ) -> Self {
        let x_max = pmf[0].len() - 1;
        let mut fc = vec![0.0; x_max + 2];
        for x in 2..fc.len() {
            fc[x] = fc[x - 1] + f(x as u64 - 1);
        }
        let prefix = |g: &dyn Fn(usize) -> f64, p: &[f64]| {
            let mut out = vec![0.0; x_max + 1];
            for s in 1..=x_max {
                out[s] = out[s - 1] + p[s] * g(s);
            }
            out
        };
        let wait_prefix = pmf.iter().map(|p| prefix(&|s| fc[s], p)).collect();
        let svc_prefix: Vec<Vec<Vec<f64>>> = pmf
            .iter()
            .map(|p| svc.iter().map(|sk| prefix(&|s| sk[s], p)).collect())
            .collect();
        let svc_total = (0..pmf.len())
            .map(|i| {
                (0..svc.len())
                    .map(|k| svc_total(i, k, svc_prefix[i][k][x_max]))
                    .collect()
            })
            .collect();
        Self {
            fc,
            wait_prefix,
            svc,
            svc_prefix,
            svc_total,
        }
    }

    /// Expected functional over a cycle opened by a server-`i` delivery.
    #[inline]
    fn cycle(&self, cdf: &[f64], i: usize, servers: &[usize], t: &[u32]) -> f64 {
        let t0 = t[0] as usize;
        let k0 = servers[0];
        let below = cdf[t0 - 1];
        // s < t_1: wait until age t_1, then serve on the first server.
        let mut total =
            self.fc[t0] * below - self.wait_prefix[i][t0 - 1] + below * self.svc[k0][t0];
        let prefix = &self.svc_prefix[i];
        for (band, &k) in servers.iter().enumerate() {
            let lo = if band == 0 { t0 - 1 } else { t[band] as usize };
            let upper = match t.get(band + 1) {
                Some(&hi) => prefix[k][hi as usize],
                None => self.svc_total[i][k],
            };
            total += upper - prefix[k][lo];
        }
        total
    }
}

/// Closed-form cycle evaluator for every subset of a server pool.
#[derive(Debug, Clone)]
pub struct Engine {
    pool: Vec<ServerSpec>,
    objective: Objective,
    tau_max: u32,
    // cdf[i][x] = Pr(L_i <= x) for x <= x_max
    cdf: Vec<Vec<f64>>,
    objective_sums: Functional,
    length: Functional,
    waiting: Functional,
}

impl Engine {
    pub fn new(pool: &[ServerSpec], objective: &Objective, tau_max: u32) -> Result<Self> {
        if pool.is_empty() {
            return Err(domain("server pool is empty"));
        }
        if tau_max == 0 {
            return Err(domain("tau_max must be at least 1"));
        }
        let x_max = match objective {
            Objective::Violation(a) => u64::from(tau_max).max(a + 1),
            _ => u64::from(tau_max),
        } as usize;
        let pmf: Vec<Vec<f64>> = pool
            .iter()
            .map(|s| {
                let mut p = vec![0.0];
                p.extend(s.service.pmf_iter().take(x_max).map(|(_, v)| v));
                p
            })
            .collect();
        let cdf: Vec<Vec<f64>> = pool
            .iter()
            .map(|s| (0..=x_max as u64).map(|x| s.service.cdf(x)).collect())
            .collect();
        let means: Vec<f64> = pool.iter().map(|s| s.service.mean()).collect();
        let constant = |value: &[f64]| -> Vec<Vec<f64>> {
            value.iter().map(|&v| vec![v; x_max + 1]).collect()
        };

        let length = Functional::new(&pmf, |_| 1.0, constant(&means), |_, k, _| means[k]);
        let waiting = Functional::new(
            &pmf,
            |_| 1.0,
            constant(&vec![0.0; pool.len()]),
            |_, _, _| 0.0,
        );
        let objective_sums = match objective {
            Objective::Mean => polynomial_functional(pool, &pmf, &[0.0, 1.0])?,
            Objective::Polynomial(c) => polynomial_functional(pool, &pmf, c)?,
            Objective::Violation(a) => {
                let a = *a;
                let svc: Vec<Vec<f64>> = pool
                    .iter()
                    .zip(&cdf)
                    .zip(&means)
                    .map(|((_, c), &mu)| {
                        // E[(L - c)^+] = mu - sum_{x=1}^{c} Pr(L >= x)
                        let mut excess = vec![mu; a as usize + 2];
                        for x in 1..excess.len() {
                            excess[x] = excess[x - 1] - (1.0 - c[x - 1]);
                        }
                        (0..=x_max as u64)
                            .map(|start| {
                                if start > a {
                                    mu
                                } else {
                                    excess[(a + 1 - start) as usize].max(0.0)
                                }
                            })
                            .collect()
                    })
                    .collect();
                Functional::new(
                    &pmf,
                    |n| if n > a { 1.0 } else { 0.0 },
                    svc,
                    |i, k, head| head + means[k] * (1.0 - cdf[i][x_max]),
                )
            }
        };
        Ok(Self {
            pool: pool.to_vec(),
            objective: objective.clone(),
            tau_max,
            cdf,
            objective_sums,
            length,
            waiting,
        })
    }

    pub fn pool(&self) -> &[ServerSpec] {
        &self.pool
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    /// Evaluates the policy using pool servers `servers` (in policy order)
    /// with thresholds `t`, all at most `tau_max`.
    pub fn evaluate(&self, servers: &[usize], t: &[u32]) -> Result<Evaluation> {
        if servers.len() != t.len() || servers.iter().any(|&s| s >= self.pool.len()) {
            return Err(domain(
                "server indices and thresholds do not match the pool",
            ));
        }
        check_thresholds(t)?;
        if t.iter().any(|&x| x > self.tau_max) {
            return Err(domain(format!(
                "thresholds exceed tau_max = {}",
                self.tau_max
            )));
        }
        self.evaluate_unchecked(servers, t)
    }

    fn evaluate_unchecked(&self, servers: &[usize], t: &[u32]) -> Result<Evaluation> {
        let j = servers.len();
        // Server-to-server transition law of consecutive packets.
        let mut p = Matrix::zeros(j, j);
        for (r, &i) in servers.iter().enumerate() {
            let cdf = &self.cdf[i];
            let mut prev = 0.0;
            for band in 0..j {
                let upto = match t.get(band + 1) {
                    Some(&hi) => cdf[hi as usize],
                    None => 1.0,
                };
                p[(r, band)] = upto - prev;
                prev = upto;
            }
        }
        let kappa = stationary_vector(&p)?;
        let mut length = 0.0;
        let mut reward = 0.0;
        let mut wait = 0.0;
        for (r, &i) in servers.iter().enumerate() {
            let cdf = &self.cdf[i];
            length += kappa[r] * self.length.cycle(cdf, i, servers, t);
            reward += kappa[r] * self.objective_sums.cycle(cdf, i, servers, t);
            wait += kappa[r] * self.waiting.cycle(cdf, i, servers, t);
        }
        let frequencies: Vec<f64> = kappa.iter().map(|k| k / length).collect();
        let c_t = servers
            .iter()
            .zip(&frequencies)
            .map(|(&s, f)| self.pool[s].cost * f)
            .sum();
        Ok(Evaluation {
            c_a: reward / length,
            c_t,
            p_wait: wait / length,
            kappa,
            frequencies,
        })
    }
}

// f(n) = sum_d c_d n^d. The service part E[sum_{m<L} f(a + m)] is a
// polynomial in the start age a whose coefficients use
// E[sum_{m<L} m^q] = sum_r S(q, r) nu_{r+1} / (r + 1).
fn polynomial_functional(
    pool: &[ServerSpec],
    pmf: &[Vec<f64>],
    coeffs: &[f64],
) -> Result<Functional> {
    let degree = coeffs.len().saturating_sub(1);
    if degree + 1 > MAX_MOMENT_ORDER as usize {
        return Err(domain(format!(
            "polynomial degree {degree} exceeds {}",
            MAX_MOMENT_ORDER - 1
        )));
    }
    let x_max = pmf[0].len() - 1;
    let mut start_coeffs = Vec::with_capacity(pool.len());
    for server in pool {
        let power_sums = (0..=degree as u32)
            .map(|q| {
                (0..=q).try_fold(0.0, |acc, r| {
                    Ok::<f64, Error>(
                        acc + stirling2(q, r)? as f64 * server.service.factorial_moment(r + 1)?
                            / f64::from(r + 1),
                    )
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let w: Vec<f64> = (0..=degree)
            .map(|r| {
                (r..=degree)
                    .map(|d| coeffs[d] * binomial(d, d - r) * power_sums[d - r])
                    .sum()
            })
            .collect();
        start_coeffs.push(w);
    }
    let moments: Vec<Vec<f64>> = pool
        .iter()
        .map(|s| raw_moments(&s.service, degree))
        .collect::<Result<_>>()?;
    let svc: Vec<Vec<f64>> = start_coeffs
        .iter()
        .map(|w| (0..=x_max).map(|a| eval_poly(w, a as f64)).collect())
        .collect();
    Ok(Functional::new(
        pmf,
        |n| eval_poly(coeffs, n as f64),
        svc,
        |i, k, _| {
            start_coeffs[k]
                .iter()
                .zip(&moments[i])
                .map(|(w, m)| w * m)
                .sum()
        },
    ))
}

fn raw_moments(d: &Dph, degree: usize) -> Result<Vec<f64>> {
    let mut out = vec![1.0];
    for r in 1..=degree as u32 {
        out.push(d.moment(r)?);
    }
    Ok(out)
}

fn eval_poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// How servers inside a subset are ordered into a policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubsetOrder {
    /// Decreasing mean service time, ties by pool position.
    #[default]
    MeanDescending,
    /// Pool order.
    Given,
    /// Every ordering.
    Permute,
}

#[derive(Debug, Clone)]
pub struct SearchSpec {
    pub pool: Vec<ServerSpec>,
    pub max_servers: usize,
    pub tau_max: u32,
    pub budgets: Vec<f64>,
    pub objective: Objective,
    pub order: SubsetOrder,
}

impl SearchSpec {
    fn validate(&self) -> Result<()> {
        if self.pool.is_empty() {
            return Err(domain("server pool is empty"));
        }
        if self.max_servers == 0 || self.max_servers > self.pool.len() {
            return Err(domain(format!(
                "max_servers must lie in 1..={}, got {}",
                self.pool.len(),
                self.max_servers
            )));
        }
        if self.tau_max == 0 {
            return Err(domain("tau_max must be at least 1"));
        }
        if let Some(b) = self.budgets.iter().find(|b| b.is_nan() || **b < 0.0) {
            return Err(domain(format!("budget {b} must be nonnegative")));
        }
        Ok(())
    }

    /// Ordered server subsets searched, grouped by size.
    pub fn subsets(&self) -> Vec<Vec<usize>> {
        let n = self.pool.len();
        let mut out = Vec::new();
        for size in 1..=self.max_servers {
            for mask in 0u64..(1 << n) {
                if mask.count_ones() as usize != size {
                    continue;
                }
                let mut members: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                match self.order {
                    SubsetOrder::Given => out.push(members),
                    SubsetOrder::MeanDescending => {
                        members.sort_by(|&a, &b| {
                            self.pool[b]
                                .mean_service()
                                .total_cmp(&self.pool[a].mean_service())
                                .then(a.cmp(&b))
                        });
                        out.push(members);
                    }
                    SubsetOrder::Permute => out.extend(permutations(&members)),
                }
            }
        }
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// A policy found by the search, with pool indices in policy order.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub servers: Vec<usize>,
    pub thresholds: Vec<u32>,
    pub c_a: f64,
    pub c_t: f64,
}

impl Candidate {
    pub fn policy(&self, pool: &[ServerSpec]) -> Result<Policy> {
        Policy::new(
            self.servers.iter().map(|&i| pool[i].clone()).collect(),
            self.thresholds.clone(),
        )
    }

    pub fn label(&self, pool: &[ServerSpec]) -> String {
        let names: Vec<&str> = self
            .servers
            .iter()
            .map(|&i| pool[i].name.as_str())
            .collect();
        let taus: Vec<String> = self.thresholds.iter().map(u32::to_string).collect();
        format!("[{}]({})", names.join(","), taus.join(","))
    }

    // Ties after (C_A, C_T): smaller thresholds, fewer servers, subset.
    fn tie_break(&self, other: &Self) -> Ordering {
        self.thresholds
            .cmp(&other.thresholds)
            .then(self.servers.len().cmp(&other.servers.len()))
            .then_with(|| self.servers.cmp(&other.servers))
    }

    /// Total preference order: lower C_A, then lower C_T, then tie-break.
    pub fn preference(&self, other: &Self) -> Ordering {
        self.c_a
            .total_cmp(&other.c_a)
            .then(self.c_t.total_cmp(&other.c_t))
            .then_with(|| self.tie_break(other))
    }
}

/// Lower-left Pareto frontier sorted by increasing C_T (and strictly
/// decreasing C_A). For any budget, the last point with `C_T <= b` is the
/// preferred feasible candidate.
pub fn pareto_frontier(mut candidates: Vec<Candidate>) -> Vec<Candidate> {
    candidates.sort_by(|a, b| {
        a.c_t
            .total_cmp(&b.c_t)
            .then(a.c_a.total_cmp(&b.c_a))
            .then_with(|| a.tie_break(b))
    });
    let mut out: Vec<Candidate> = Vec::new();
    for c in candidates {
        if out.last().is_none_or(|last| c.c_a < last.c_a) {
            out.push(c);
        }
    }
    out
}

/// Preferred frontier point with `C_T <= budget`.
pub fn best_under(frontier: &[Candidate], budget: f64) -> Option<&Candidate> {
    let feasible = frontier.partition_point(|c| c.c_t <= budget);
    feasible.checked_sub(1).map(|i| &frontier[i])
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetOutcome {
    pub budget: f64,
    /// `None` when no candidate meets the budget.
    pub best: Option<Candidate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub outcomes: Vec<BudgetOutcome>,
    /// Frontier of subsets with exactly `s + 1` servers at index `s`.
    pub frontiers_by_size: Vec<Vec<Candidate>>,
    pub evaluated: u64,
    /// Tuples whose server chain had no unique stationary law.
    pub skipped: u64,
}

impl SearchResult {
    /// Frontier over all subsets with at most `size` servers.
    pub fn frontier_up_to(&self, size: usize) -> Vec<Candidate> {
        pareto_frontier(
            self.frontiers_by_size
                .iter()
                .take(size)
                .flatten()
                .cloned()
                .collect(),
        )
    }
}

/// Exhaustive search over server subsets and threshold tuples.
pub fn optimize(spec: &SearchSpec) -> Result<SearchResult> {
    spec.validate()?;
    let engine = Engine::new(&spec.pool, &spec.objective, spec.tau_max)?;
    let mut frontiers_by_size = vec![Vec::new(); spec.max_servers];
    let mut evaluated = 0;
    let mut skipped = 0;
    for subset in spec.subsets() {
        let (frontier, n, bad) = search_subset(&engine, &subset, spec.tau_max)?;
        evaluated += n;
        skipped += bad;
        frontiers_by_size[subset.len() - 1].extend(frontier);
    }
    let frontiers_by_size: Vec<Vec<Candidate>> =
        frontiers_by_size.into_iter().map(pareto_frontier).collect();
    let all = pareto_frontier(frontiers_by_size.iter().flatten().cloned().collect());
    let outcomes = spec
        .budgets
        .iter()
        .map(|&budget| BudgetOutcome {
            budget,
            best: best_under(&all, budget).cloned(),
        })
        .collect();
    Ok(SearchResult {
        outcomes,
        frontiers_by_size,
        evaluated,
        skipped,
    })
}

// Frontier of one subset; work is split by t_1 and merged in t_1 order.
fn search_subset(
    engine: &Engine,
    subset: &[usize],
    tau_max: u32,
) -> Result<(Vec<Candidate>, u64, u64)> {
    let j = subset.len();
    let parts: Vec<Result<(Vec<Candidate>, u64, u64)>> = (1..=tau_max)
        .into_par_iter()
        .map(|t0| {
            let mut local = Vec::new();
            let (mut n, mut bad) = (0, 0);
            let mut consider = |t: Vec<u32>| -> Result<()> {
                n += 1;
                match engine.evaluate_unchecked(subset, &t) {
                    Ok(e) => local.push(Candidate {
                        servers: subset.to_vec(),
                        thresholds: t,
                        c_a: e.c_a,
                        c_t: e.c_t,
                    }),
                    Err(Error::Reducible { .. }) => bad += 1,
                    Err(e) => return Err(e),
                }
                Ok(())
            };
            for t in thresholds_with_first(j, tau_max, t0) {
                consider(t)?;
            }
            Ok((pareto_frontier(local), n, bad))
        })
        .collect();
    let mut all = Vec::new();
    let (mut n, mut bad) = (0, 0);
    for part in parts {
        let (f, a, b) = part?;
        all.extend(f);
        n += a;
        bad += b;
    }
    Ok((pareto_frontier(all), n, bad))
}
