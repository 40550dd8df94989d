//! AoI distribution and costs under an age-dependent server selection policy.
//!
//! One multi-regime chain covers the life of two consecutive packets: it
//! starts when packet 1 enters service and is absorbed when packet 2 is
//! delivered, into the absorbing state of the server that carried packet 2.
//! Transient states are ordered as the packet-1 phase blocks of servers
//! `1..J` followed by the packet-2 blocks of servers `1..J`, for
//! `M = 2 sum_j M_j` states in total. Regime 1 is `[0, t_1)` (waiting) and
//! regime `i + 1` is `[t_i, t_{i+1})`, in which a completion of packet 1
//! hands packet 2 to server `i`.
//!
//! Because the handoff decision is taken on the step out of elapsed time
//! `n` and the AoI at delivery is `n + 1`, the selection bands seen by the
//! AoI process are right-closed: wait while `age < t_1`, use server 1 for
//! `t_1 <= age <= t_2`, and server `j` for `t_j < age <= t_{j+1}`. The
//! simulator applies the same rule through [`Policy::decision`].

use crate::dph::{stirling2, Dph, MAX_MOMENT_ORDER};
use crate::error::{domain, model, Error, Result};
use crate::linalg::{self, Fundamental, Matrix};
use crate::mramc::{MrAmc, RegimeVectors};

/// A server: DPH service time plus a per-transmission cost.
#[derive(Debug, Clone, PartialEq)]
pub struct ServerSpec {
    pub name: String,
    pub service: Dph,
    pub cost: f64,
}

impl ServerSpec {
    pub fn new(name: impl Into<String>, service: Dph, cost: f64) -> Result<Self> {
        if !(cost >= 0.0 && cost.is_finite()) {
            return Err(domain(format!(
                "server cost {cost} must be finite and nonnegative"
            )));
        }
        Ok(Self {
            name: name.into(),
            service,
            cost,
        })
    }

    pub fn mean_service(&self) -> f64 {
        self.service.mean()
    }
}

/// What the source does when the link is idle at a given age.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Wait,
    /// Transmit a fresh sample on the server with this 0-based index.
    Transmit(usize),
}

/// Ordered servers with thresholds `1 <= t_1 <= t_2 < t_3 < ... < t_J`.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    servers: Vec<ServerSpec>,
    thresholds: Vec<u32>,
}

impl Policy {
    pub fn new(servers: Vec<ServerSpec>, thresholds: Vec<u32>) -> Result<Self> {
        if servers.is_empty() {
            return Err(domain("a policy needs at least one server"));
        }
        if thresholds.len() != servers.len() {
            return Err(domain(format!(
                "{} servers need {} thresholds, got {}",
                servers.len(),
                servers.len(),
                thresholds.len()
            )));
        }
        check_thresholds(&thresholds)?;
        Ok(Self {
            servers,
            thresholds,
        })
    }

    pub fn servers(&self) -> &[ServerSpec] {
        &self.servers
    }

    pub fn thresholds(&self) -> &[u32] {
        &self.thresholds
    }

    pub fn server_count(&self) -> usize {
        self.servers.len()
    }

    /// Compact label such as `[M1,G](10,20)`.
    pub fn label(&self) -> String {
        let names: Vec<&str> = self.servers.iter().map(|s| s.name.as_str()).collect();
        let taus: Vec<String> = self.thresholds.iter().map(u32::to_string).collect();
        format!("[{}]({})", names.join(","), taus.join(","))
    }

    /// Idle-link action at instantaneous age `age`.
    pub fn decision(&self, age: u64) -> Decision {
        if age < u64::from(self.thresholds[0]) {
            return Decision::Wait;
        }
        let server = self.thresholds[1..]
            .iter()
            .take_while(|&&t| u64::from(t) < age)
            .count();
        Decision::Transmit(server)
    }
}

/// Validates `1 <= t_1 <= t_2 < t_3 < ... < t_J`.
pub fn check_thresholds(thresholds: &[u32]) -> Result<()> {
    match thresholds.first() {
        None => return Err(domain("at least one threshold is required")),
        Some(0) => return Err(domain("t_1 must be at least 1 (AoI is never below 1)")),
        Some(_) => {}
    }
    if thresholds.len() >= 2 && thresholds[1] < thresholds[0] {
        return Err(domain(format!(
            "thresholds must satisfy t_1 <= t_2, got ({}, {})",
            thresholds[0], thresholds[1]
        )));
    }
    for (k, w) in thresholds.windows(2).enumerate().skip(1) {
        if w[1] <= w[0] {
            return Err(domain(format!(
                "thresholds must satisfy t_{} < t_{}, got ({}, {})",
                k + 1,
                k + 2,
                w[0],
                w[1]
            )));
        }
    }
    Ok(())
}

/// Offsets of the packet-1 and packet-2 phase blocks of each server.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateLayout {
    orders: Vec<usize>,
    offsets: Vec<usize>,
    half: usize,
}

impl StateLayout {
    pub fn new(servers: &[ServerSpec]) -> Self {
        let orders: Vec<usize> = servers.iter().map(|s| s.service.order()).collect();
        let mut offsets = Vec::with_capacity(orders.len());
        let mut acc = 0;
        for &m in &orders {
            offsets.push(acc);
            acc += m;
        }
        Self {
            orders,
            offsets,
            half: acc,
        }
    }

    /// Total transient states `M = 2 sum_j M_j`.
    pub fn size(&self) -> usize {
        2 * self.half
    }

    pub fn order(&self, server: usize) -> usize {
        self.orders[server]
    }

    /// Index of state `(1, server, phase)`.
    pub fn first(&self, server: usize, phase: usize) -> usize {
        self.offsets[server] + phase
    }

    /// Index of state `(2, server, phase)`.
    pub fn second(&self, server: usize, phase: usize) -> usize {
        self.half + self.offsets[server] + phase
    }

    /// Indicator of the packet-2 states.
    pub fn selector(&self) -> Vec<f64> {
        let mut h = vec![0.0; self.size()];
        h[self.half..].iter_mut().for_each(|x| *x = 1.0);
        h
    }
}

/// Transient and absorption matrices of all `J + 1` regimes.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeMatrices {
    pub layout: StateLayout,
    pub transients: Vec<Matrix>,
    pub absorbers: Vec<Matrix>,
}

/// Assembles `A_1..A_{J+1}` and `B_1..B_{J+1}` for the policy's server list.
pub fn build_matrices(policy: &Policy) -> RegimeMatrices {
    build_matrices_for(policy.servers())
}

pub(crate) fn build_matrices_for(servers: &[ServerSpec]) -> RegimeMatrices {
    let layout = StateLayout::new(servers);
    let m = layout.size();
    let j_count = servers.len();
    let mut transients = Vec::with_capacity(j_count + 1);
    let mut absorbers = Vec::with_capacity(j_count + 1);

    for regime in 0..=j_count {
        let mut a = Matrix::zeros(m, m);
        let mut b = Matrix::zeros(m, j_count);
        // Server receiving packet 2 when packet 1 completes in this regime.
        let target = regime.saturating_sub(1);
        let alpha_t = servers[target].service.beta();
        for (j, server) in servers.iter().enumerate() {
            let d = server.service.transient();
            let exit = server.service.exit();
            for r in 0..layout.order(j) {
                let row = layout.first(j, r);
                for c in 0..layout.order(j) {
                    a[(row, layout.first(j, c))] = d[(r, c)];
                }
                for (c, &alpha) in alpha_t.iter().enumerate() {
                    a[(row, layout.second(target, c))] += exit[r] * alpha;
                }
            }
        }
        for (j, server) in servers.iter().enumerate() {
            let in_service = regime >= 1 && j < regime;
            for r in 0..layout.order(j) {
                let row = layout.second(j, r);
                if in_service {
                    let d = server.service.transient();
                    for c in 0..layout.order(j) {
                        a[(row, layout.second(j, c))] = d[(r, c)];
                    }
                    b[(row, j)] = server.service.exit()[r];
                } else {
                    a[(row, row)] = 1.0;
                }
            }
        }
        transients.push(a);
        absorbers.push(b);
    }
    RegimeMatrices {
        layout,
        transients,
        absorbers,
    }
}

/// `J x M` matrix whose row `j` places `alpha_j` on the packet-1 block of
/// server `j`; `beta = kappa * selector`.
pub fn selector_matrix(servers: &[ServerSpec]) -> Matrix {
    let layout = StateLayout::new(servers);
    let mut s = Matrix::zeros(servers.len(), layout.size());
    for (j, server) in servers.iter().enumerate() {
        for (c, &alpha) in server.service.beta().iter().enumerate() {
            s[(j, layout.first(j, c))] = alpha;
        }
    }
    s
}

/// `Psi = sum_i (prod_{l<i} A_l^{delta_l}) (sum_{k<delta_i} A_i^k) B_i`, with
/// the final regime closed by `(I - A_I)^{-1} B_I`. Row `s` is the absorption
/// split of the chain started in transient state `s`.
pub fn compute_psi(matrices: &RegimeMatrices, thresholds: &[u32]) -> Result<Matrix> {
    let regimes = matrices.transients.len();
    if thresholds.len() + 1 != regimes {
        return Err(model(format!(
            "{regimes} regimes need {} thresholds, got {}",
            regimes - 1,
            thresholds.len()
        )));
    }
    let m = matrices.layout.size();
    let mut prefix = Matrix::identity(m, m);
    let mut psi = Matrix::zeros(m, matrices.absorbers[0].ncols());
    let mut start = 0u32;
    for (i, &end) in thresholds.iter().enumerate() {
        if end < start {
            return Err(model("thresholds must be nondecreasing"));
        }
        for _ in start..end {
            psi += &prefix * &matrices.absorbers[i];
            prefix = &prefix * &matrices.transients[i];
        }
        start = end;
    }
    let last = regimes - 1;
    let fundamental = Fundamental::new(&matrices.transients[last])?;
    psi += &prefix * fundamental.solve_mat(&matrices.absorbers[last]);
    Ok(psi)
}

/// Row-stochastic tolerance for the server transition matrix.
pub const STOCHASTIC_TOL: f64 = 1e-10;

/// Stationary vector of `B = S Psi`, where `S` is [`selector_matrix`].
pub fn solve_kappa(policy: &Policy, psi: &Matrix) -> Result<Vec<f64>> {
    let selector = selector_matrix(policy.servers());
    let transition = &selector * psi;
    stationary_vector(&transition)
}

/// Unique stationary distribution of a small row-stochastic matrix.
/// Transient states get zero mass; two or more closed classes are an error.
pub fn stationary_vector(p: &Matrix) -> Result<Vec<f64>> {
    let n = p.nrows();
    if p.ncols() != n || n == 0 {
        return Err(model("transition matrix must be square and nonempty"));
    }
    for (r, s) in linalg::row_sums(p).iter().enumerate() {
        if (s - 1.0).abs() > STOCHASTIC_TOL {
            return Err(model(format!("server transition row {r} sums to {s}")));
        }
    }
    let classes = closed_class_count(p);
    if classes != 1 {
        return Err(Error::Reducible { classes });
    }
    // Solve kappa (P - I) = 0 with the last equation swapped for kappa 1 = 1.
    let mut system = (p - Matrix::identity(n, n)).transpose();
    for c in 0..n {
        system[(n - 1, c)] = 1.0;
    }
    let mut rhs = nalgebra::DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let kappa = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("stationary system is singular".into()))?;
    // Transient servers come out as roundoff-sized values of either sign.
    let mut kappa = kappa.as_slice().to_vec();
    if let Some(x) = kappa.iter().find(|x| **x < -STOCHASTIC_TOL) {
        return Err(Error::Singular(format!("stationary solve produced {x}")));
    }
    kappa.iter_mut().for_each(|x| *x = x.max(0.0));
    let total: f64 = kappa.iter().sum();
    kappa.iter_mut().for_each(|x| *x /= total);
    Ok(kappa)
}

#[allow(clippy::needless_range_loop)]
fn closed_class_count(p: &Matrix) -> usize {
    let n = p.nrows();
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        reach[i][i] = true;
        for j in 0..n {
            if p[(i, j)] > 0.0 {
                reach[i][j] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let closed: Vec<usize> = (0..n)
        .filter(|&i| (0..n).all(|j| !reach[i][j] || reach[j][i]))
        .collect();
    // Closed states sharing a class reach each other; count representatives.
    let mut seen = vec![false; n];
    let mut count = 0;
    for &i in &closed {
        if !seen[i] {
            count += 1;
            for &j in &closed {
                if reach[i][j] {
                    seen[j] = true;
                }
            }
        }
    }
    count
}

/// Waiting probability, per-server transmission frequencies and the
/// transmission cost rate.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingStats {
    pub p_wait: f64,
    pub frequencies: Vec<f64>,
    pub transmission_cost: f64,
}

/// `|f(n)| <= scale * (1 + n)^degree`, used to bound truncated sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub scale: f64,
    pub degree: u32,
}

/// A numerically summed cost with a rigorous bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    pub value: f64,
    pub error_bound: f64,
    /// Largest AoI value included in the sum.
    pub last_term: u64,
}

/// AoI cost functional `E[f(Delta)]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    Mean,
    /// `f(n) = sum_k coeffs[k] n^k`.
    Polynomial(Vec<f64>),
    /// `Pr(Delta > a)`.
    Violation(u64),
}

impl Objective {
    pub fn label(&self) -> String {
        match self {
            Objective::Mean => "mean".into(),
            Objective::Polynomial(c) => format!("polynomial(degree {})", c.len().saturating_sub(1)),
            Objective::Violation(a) => format!("violation(>{a})"),
        }
    }
}

/// Full analysis of one policy.
#[derive(Debug, Clone)]
pub struct AoiSolution {
    policy: Policy,
    chain: MrAmc,
    psi: Matrix,
    kappa: Vec<f64>,
    selector_h: Vec<f64>,
    eta: f64,
    regime_vectors: RegimeVectors,
    // p_Delta(n) for n = 1..tail_start-1.
    head: Vec<f64>,
    tail_start: u64,
    // (I - A_I)^{-1} h
    tail_base: Vec<f64>,
    stats: OperatingStats,
}

/// Builds the chain for `policy`, solves for the server split and returns
/// the AoI law with its operating statistics.
pub fn analyze(policy: &Policy) -> Result<AoiSolution> {
    let matrices = build_matrices(policy);
    let psi = compute_psi(&matrices, policy.thresholds())?;
    let kappa = solve_kappa(policy, &psi)?;

    let layout = &matrices.layout;
    let mut beta = vec![0.0; layout.size()];
    for (j, server) in policy.servers().iter().enumerate() {
        for (c, &alpha) in server.service.beta().iter().enumerate() {
            beta[layout.first(j, c)] = kappa[j] * alpha;
        }
    }
    let h = layout.selector();
    let chain = MrAmc::new(
        beta,
        policy.thresholds().to_vec(),
        matrices.transients,
        matrices.absorbers,
    )?;
    let regime_vectors = chain.regime_vectors();

    let tail_start = u64::from(*policy.thresholds().last().expect("nonempty"));
    let mut head: Vec<f64> = chain
        .transient_iter()
        .skip(1)
        .take((tail_start - 1) as usize)
        .map(|(_, x)| linalg::dot(&x, &h))
        .collect();
    let tail_base = chain.final_fundamental().solve_col(&h);
    let tail_mass = linalg::dot(chain.final_entry(), &tail_base);
    let cycle = head.iter().sum::<f64>() + tail_mass;
    if !(cycle > 0.0 && cycle.is_finite()) {
        return Err(model(format!(
            "mean AoI cycle length {cycle} is not positive"
        )));
    }
    let eta = 1.0 / cycle;
    head.iter_mut().for_each(|p| *p *= eta);

    let tau1 = u64::from(policy.thresholds()[0]);
    let p_wait: f64 = head.iter().take((tau1 - 1) as usize).sum();
    let mean_service: f64 = policy
        .servers()
        .iter()
        .zip(&kappa)
        .map(|(s, k)| k * s.mean_service())
        .sum();
    let frequencies: Vec<f64> = kappa
        .iter()
        .map(|k| (1.0 - p_wait) * k / mean_service)
        .collect();
    let transmission_cost = policy
        .servers()
        .iter()
        .zip(&frequencies)
        .map(|(s, f)| s.cost * f)
        .sum();

    Ok(AoiSolution {
        policy: policy.clone(),
        chain,
        psi,
        kappa,
        selector_h: h,
        eta,
        regime_vectors,
        head,
        tail_start,
        tail_base,
        stats: OperatingStats {
            p_wait,
            frequencies,
            transmission_cost,
        },
    })
}

impl AoiSolution {
    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    pub fn chain(&self) -> &MrAmc {
        &self.chain
    }

    pub fn psi(&self) -> &Matrix {
        &self.psi
    }

    /// Long-run fraction of packets sent on each server.
    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn selector_h(&self) -> &[f64] {
        &self.selector_h
    }

    /// Inverse of the mean AoI cycle length.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn regime_vectors(&self) -> &RegimeVectors {
        &self.regime_vectors
    }

    /// First AoI value handled by the matrix-geometric tail.
    pub fn tail_start(&self) -> u64 {
        self.tail_start
    }

    pub fn operating_stats(&self) -> &OperatingStats {
        &self.stats
    }

    pub fn p_wait(&self) -> f64 {
        self.stats.p_wait
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.stats.frequencies
    }

    pub fn transmission_cost(&self) -> f64 {
        self.stats.transmission_cost
    }

    fn final_transient(&self) -> &Matrix {
        self.chain.transients().last().expect("final regime")
    }

    /// `p_Delta(n)`; zero at `n = 0`.
    pub fn aoi_pmf(&self, n: u64) -> f64 {
        match n {
            0 => 0.0,
            n if n < self.tail_start => self.head[(n - 1) as usize],
            n => {
                let x = linalg::vec_mat_pow(
                    self.chain.final_entry(),
                    self.final_transient(),
                    n - self.tail_start,
                );
                self.eta * linalg::dot(&x, &self.selector_h)
            }
        }
    }

    /// Iterator over `(n, p_Delta(n))` for `n = 1, 2, ...`.
    pub fn pmf_iter(&self) -> AoiPmfIter<'_> {
        AoiPmfIter {
            solution: self,
            n: 0,
            x: self.chain.final_entry().to_vec(),
            next: vec![0.0; self.selector_h.len()],
        }
    }

    /// Smallest `n` with `Pr(Delta > n) <= eps`.
    pub fn coverage_point(&self, eps: f64) -> u64 {
        let mut remaining = 1.0;
        for (n, p) in self.pmf_iter() {
            remaining -= p;
            if remaining <= eps && self.violation_probability(n) <= eps {
                return n;
            }
        }
        unreachable!("pmf iterator is infinite")
    }

    /// `E[Delta]`: finite head sum plus the closed-form tail
    /// `eta beta_I (t (I-A)^{-1} + (I-A)^{-2} A) h`.
    pub fn mean_aoi(&self) -> f64 {
        let head: f64 = self
            .head
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum();
        let fundamental = self.chain.final_fundamental();
        let ah = linalg::mat_vec(self.final_transient(), &self.selector_h);
        let second = fundamental.solve_col(&fundamental.solve_col(&ah));
        let entry = self.chain.final_entry();
        let tail = self.tail_start as f64 * linalg::dot(entry, &self.tail_base)
            + linalg::dot(entry, &second);
        head + self.eta * tail
    }

    /// `E[f(Delta)]` for a polynomial `f(n) = sum_k coeffs[k] n^k` of degree
    /// at most 20, with the tail summed in closed form through factorial
    /// moments of the final regime.
    pub fn polynomial_cost(&self, coeffs: &[f64]) -> Result<f64> {
        if coeffs.len() > MAX_MOMENT_ORDER as usize + 1 {
            return Err(domain(format!(
                "polynomial degree {} exceeds {MAX_MOMENT_ORDER}",
                coeffs.len() - 1
            )));
        }
        let head: f64 = self
            .head
            .iter()
            .enumerate()
            .map(|(i, p)| eval_poly(coeffs, (i + 1) as f64) * p)
            .sum();
        let tail = self.tail_polynomial(self.chain.final_entry(), self.tail_start, coeffs)?;
        Ok(head + self.eta * tail)
    }

    /// `sum_{m >= 0} f(start + m) entry A_I^m h` in closed form.
    fn tail_polynomial(&self, entry: &[f64], start: u64, coeffs: &[f64]) -> Result<f64> {
        if coeffs.is_empty() {
            return Ok(0.0);
        }
        let degree = coeffs.len() - 1;
        let shifted = shift_poly(coeffs, start as f64);
        // v_k = k! A^k (I-A)^{-k-1} h gives sum_m m^(k falling) A^m h.
        let fundamental = self.chain.final_fundamental();
        let mut falling = Vec::with_capacity(degree + 1);
        falling.push(self.tail_base.clone());
        for k in 1..=degree {
            let prev: &Vec<f64> = &falling[k - 1];
            let av = linalg::mat_vec(self.final_transient(), prev);
            let mut v = fundamental.solve_col(&av);
            v.iter_mut().for_each(|x| *x *= k as f64);
            falling.push(v);
        }
        let falling_dots: Vec<f64> = falling.iter().map(|v| linalg::dot(entry, v)).collect();
        let mut total = 0.0;
        for (k, g) in shifted.iter().enumerate() {
            if *g == 0.0 {
                continue;
            }
            // sum_m m^k A^m h = sum_j S(k, j) v_j
            let mut power_sum = 0.0;
            for (j, fd) in falling_dots.iter().enumerate().take(k + 1) {
                power_sum += stirling2(k as u32, j as u32)? as f64 * fd;
            }
            total += g * power_sum;
        }
        Ok(total)
    }

    /// `E[f(Delta)]` for an arbitrary `f` by direct summation, stopping once
    /// the envelope's exact tail mass drops below `tol`.
    pub fn general_cost<F>(
        &self,
        f: F,
        envelope: Option<Envelope>,
        tol: f64,
    ) -> Result<CostEstimate>
    where
        F: Fn(u64) -> f64,
    {
        let envelope = envelope.ok_or(Error::MissingEnvelope)?;
        if envelope.degree > MAX_MOMENT_ORDER {
            return Err(domain(format!(
                "envelope degree {} exceeds {MAX_MOMENT_ORDER}",
                envelope.degree
            )));
        }
        if tol.is_nan() || tol <= 0.0 || envelope.scale.is_nan() || envelope.scale < 0.0 {
            return Err(domain(
                "tolerance must be positive and envelope scale nonnegative",
            ));
        }
        // Envelope polynomial scale * (1 + n)^d, expanded in n.
        let envelope_coeffs: Vec<f64> = (0..=envelope.degree)
            .map(|k| envelope.scale * binomial(envelope.degree, k))
            .collect();

        let mut value: f64 = self
            .head
            .iter()
            .enumerate()
            .map(|(i, p)| f((i + 1) as u64) * p)
            .sum();
        let h = &self.selector_h;
        let a = self.final_transient();
        let mut x = self.chain.final_entry().to_vec();
        let mut next = vec![0.0; x.len()];
        let mut n = self.tail_start;
        loop {
            // x holds x_n for the next unsummed n; bound everything from n on.
            if (n - self.tail_start).is_multiple_of(32) {
                let bound = self.eta * self.tail_polynomial(&x, n, &envelope_coeffs)?;
                if bound <= tol {
                    return Ok(CostEstimate {
                        value,
                        error_bound: bound,
                        last_term: n - 1,
                    });
                }
            }
            value += f(n) * self.eta * linalg::dot(&x, h);
            linalg::vec_mat_into(&x, a, &mut next);
            std::mem::swap(&mut x, &mut next);
            n += 1;
        }
    }

    /// `Pr(Delta > a)`.
    pub fn violation_probability(&self, a: u64) -> f64 {
        let entry = self.chain.final_entry();
        if a + 1 >= self.tail_start {
            let x = linalg::vec_mat_pow(entry, self.final_transient(), a + 1 - self.tail_start);
            self.eta * linalg::dot(&x, &self.tail_base)
        } else {
            let head: f64 = self.head[a as usize..].iter().sum();
            head + self.eta * linalg::dot(entry, &self.tail_base)
        }
    }

    pub fn cost(&self, objective: &Objective) -> Result<f64> {
        match objective {
            Objective::Mean => Ok(self.mean_aoi()),
            Objective::Polynomial(c) => self.polynomial_cost(c),
            Objective::Violation(a) => Ok(self.violation_probability(*a)),
        }
    }
}

/// See [`AoiSolution::pmf_iter`].
#[derive(Debug)]
pub struct AoiPmfIter<'a> {
    solution: &'a AoiSolution,
    n: u64,
    x: Vec<f64>,
    next: Vec<f64>,
}

impl Iterator for AoiPmfIter<'_> {
    type Item = (u64, f64);

    fn next(&mut self) -> Option<Self::Item> {
        self.n += 1;
        let s = self.solution;
        if self.n < s.tail_start {
            return Some((self.n, s.head[(self.n - 1) as usize]));
        }
        if self.n > s.tail_start {
            linalg::vec_mat_into(&self.x, s.final_transient(), &mut self.next);
            std::mem::swap(&mut self.x, &mut self.next);
        }
        Some((self.n, s.eta * linalg::dot(&self.x, &s.selector_h)))
    }
}

fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Coefficients of `m -> f(shift + m)`.
fn shift_poly(coeffs: &[f64], shift: f64) -> Vec<f64> {
    let degree = coeffs.len() - 1;
    let mut out = vec![0.0; degree + 1];
    for (r, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for (k, o) in out.iter_mut().enumerate().take(r + 1) {
            *o += c * binomial(r as u32, k as u32) * shift.powi((r - k) as i32);
        }
    }
    out
}
