//! Discrete phase-type (DPH) distributions.
//!
//! A `Dph` is the absorption time of a finite discrete-time Markov chain
//! started from `beta` and moving among transient phases with the
//! sub-stochastic matrix `A`; the missing row mass `a = 1 - A 1` is the
//! per-slot absorption probability. Support starts at one slot.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{domain, model, Result};
use crate::linalg::{self, Fundamental, Matrix};

/// Probability vectors must sum to one within this tolerance.
pub const SUM_TOL: f64 = 1e-12;
/// Tolerance for user-supplied bounded pmfs before renormalization.
pub const PMF_NORMALIZATION_TOL: f64 = 1e-9;
/// Largest moment order supported (exact Stirling numbers up to here).
pub const MAX_MOMENT_ORDER: u32 = 20;

/// A discrete phase-type distribution `DPH(beta, A)`.
#[derive(Debug, Clone)]
pub struct Dph {
    beta: Vec<f64>,
    transient: Matrix,
    exit: Vec<f64>,
    // Row-wise cumulative transition tables for the sampling walk: entry
    // `k` of row `m` is `sum_{l <= k} A[m, l]`.
    cumulative: Vec<Vec<f64>>,
    beta_cumulative: Vec<f64>,
    fundamental: Fundamental,
}

impl PartialEq for Dph {
    fn eq(&self, other: &Self) -> bool {
        self.beta == other.beta && self.transient == other.transient
    }
}

impl Dph {
    /// Builds and validates `DPH(beta, A)`.
    pub fn new(beta: Vec<f64>, transient: Matrix) -> Result<Self> {
        let order = beta.len();
        if order == 0 {
            return Err(model("DPH order must be positive"));
        }
        if transient.nrows() != order || transient.ncols() != order {
            return Err(model(format!(
                "transient matrix is {}x{}, expected {order}x{order}",
                transient.nrows(),
                transient.ncols()
            )));
        }
        if beta.iter().any(|&b| !(0.0..=1.0).contains(&b)) {
            return Err(model("initial vector entries must lie in [0, 1]"));
        }
        let total: f64 = beta.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(model(format!("initial vector sums to {total}, not 1")));
        }
        if transient.iter().any(|&a| !(0.0..=1.0).contains(&a)) {
            return Err(model("transient matrix entries must lie in [0, 1]"));
        }
        let sums = linalg::row_sums(&transient);
        if let Some((row, s)) = sums.iter().enumerate().find(|(_, &s)| s > 1.0 + SUM_TOL) {
            return Err(model(format!(
                "row {row} of the transient matrix sums to {s} > 1"
            )));
        }
        let rho = linalg::spectral_radius(&transient);
        if rho >= 1.0 - 1e-10 {
            return Err(model(format!(
                "spectral radius {rho} is not below 1; absorption is not certain"
            )));
        }
        let exit: Vec<f64> = sums.iter().map(|s| (1.0 - s).max(0.0)).collect();
        let cumulative = (0..order)
            .map(|m| {
                let mut acc = 0.0;
                transient
                    .row(m)
                    .iter()
                    .map(|&a| {
                        acc += a;
                        acc
                    })
                    .collect()
            })
            .collect();
        let mut acc = 0.0;
        let beta_cumulative = beta
            .iter()
            .map(|&b| {
                acc += b;
                acc
            })
            .collect();
        let fundamental = Fundamental::new(&transient)?;
        Ok(Self {
            beta,
            transient,
            exit,
            cumulative,
            beta_cumulative,
            fundamental,
        })
    }

    /// `Geo(p)`: order one, `beta = (1)`, `A = (1 - p)`.
    pub fn geometric(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(domain(format!("geometric parameter {p} outside (0, 1]")));
        }
        Self::new(vec![1.0], Matrix::from_element(1, 1, 1.0 - p))
    }

    /// Two-component mixture of geometrics, `MG(p1, p2, w1, w2)`.
    pub fn mixed_geometric(p1: f64, p2: f64, w1: f64, w2: f64) -> Result<Self> {
        for p in [p1, p2] {
            if !(p > 0.0 && p <= 1.0) {
                return Err(domain(format!("geometric parameter {p} outside (0, 1]")));
            }
        }
        if w1 < 0.0 || w2 < 0.0 || ((w1 + w2) - 1.0).abs() > SUM_TOL {
            return Err(domain(format!(
                "mixing weights ({w1}, {w2}) must be nonnegative and sum to 1"
            )));
        }
        Self::new(
            vec![w1, w2],
            Matrix::from_row_slice(2, 2, &[1.0 - p1, 0.0, 0.0, 1.0 - p2]),
        )
    }

    /// Exact DPH representation of a pmf with bounded support in `{1..M}`.
    ///
    /// The chain walks phases `1 -> 2 -> ... -> M` and leaves phase `m` with
    /// the hazard `p(m) / sum_{l >= m} p(l)`.
    pub fn from_bounded_pmf(masses: &BTreeMap<u32, f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(domain("bounded pmf has empty support"));
        }
        if let Some(&p0) = masses.get(&0) {
            if p0 != 0.0 {
                return Err(domain("bounded pmf places mass at 0; support starts at 1"));
            }
        }
        if let Some((n, p)) = masses.iter().find(|(_, &p)| !(p >= 0.0 && p.is_finite())) {
            return Err(domain(format!(
                "mass {p} at {n} is not a finite nonnegative number"
            )));
        }
        let total: f64 = masses.values().sum();
        if (total - 1.0).abs() > PMF_NORMALIZATION_TOL {
            return Err(domain(format!("bounded pmf masses sum to {total}, not 1")));
        }
        let order = masses
            .iter()
            .rev()
            .find(|(_, &p)| p > 0.0)
            .map(|(&n, _)| n as usize)
            .ok_or_else(|| domain("bounded pmf has no positive mass"))?;

        let mut mass = vec![0.0; order];
        for (&n, &p) in masses.range(1..=order as u32) {
            mass[n as usize - 1] = p / total;
        }
        let mut tail = vec![0.0; order + 1];
        for m in (0..order).rev() {
            tail[m] = tail[m + 1] + mass[m];
        }
        let mut a = Matrix::zeros(order, order);
        for m in 0..order.saturating_sub(1) {
            a[(m, m + 1)] = if tail[m] > 0.0 {
                (tail[m + 1] / tail[m]).clamp(0.0, 1.0)
            } else {
                1.0
            };
        }
        let mut beta = vec![0.0; order];
        beta[0] = 1.0;
        Self::new(beta, a)
    }

    /// Uniform distribution on `{lo, ..., hi}` via [`Dph::from_bounded_pmf`].
    pub fn uniform(lo: u32, hi: u32) -> Result<Self> {
        if lo == 0 || hi < lo {
            return Err(domain(format!("uniform support [{lo}, {hi}] is invalid")));
        }
        let w = 1.0 / f64::from(hi - lo + 1);
        let masses = (lo..=hi).map(|n| (n, w)).collect();
        Self::from_bounded_pmf(&masses)
    }

    /// Point mass at `n >= 1`.
    pub fn deterministic(n: u32) -> Result<Self> {
        Self::from_bounded_pmf(&BTreeMap::from([(n, 1.0)]))
    }

    pub fn order(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn transient(&self) -> &Matrix {
        &self.transient
    }

    /// Absorption vector `a = 1 - A 1`.
    pub fn exit(&self) -> &[f64] {
        &self.exit
    }

    /// `p_T(n) = beta A^(n-1) a` for `n >= 1`.
    pub fn pmf(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(domain("pmf is defined for n >= 1"));
        }
        let x = linalg::vec_mat_pow(&self.beta, &self.transient, n - 1);
        Ok(linalg::dot(&x, &self.exit))
    }

    /// `F_T(n) = 1 - beta A^n 1`.
    pub fn cdf(&self, n: u64) -> f64 {
        let x = linalg::vec_mat_pow(&self.beta, &self.transient, n);
        1.0 - x.iter().sum::<f64>()
    }

    /// Iterator over `(n, p_T(n))` for `n = 1, 2, ...`.
    pub fn pmf_iter(&self) -> PmfIter<'_> {
        PmfIter {
            dph: self,
            x: self.beta.clone(),
            next: vec![0.0; self.order()],
            n: 0,
        }
    }

    /// Factorial moment `E[T (T-1) ... (T-i+1)] = i! beta (I-A)^{-i-1} A^{i-1} a`.
    pub fn factorial_moment(&self, i: u32) -> Result<f64> {
        if i == 0 || i > MAX_MOMENT_ORDER {
            return Err(domain(format!(
                "factorial moment order {i} outside 1..={MAX_MOMENT_ORDER}"
            )));
        }
        let mut v = self.beta.clone();
        for _ in 0..=i {
            v = self.fundamental.solve_row(&v);
        }
        let v = linalg::vec_mat_pow(&v, &self.transient, u64::from(i - 1));
        let factorial: f64 = (1..=i).map(f64::from).product();
        Ok(factorial * linalg::dot(&v, &self.exit))
    }

    /// Ordinary moment `E[T^i] = sum_j S(i, j) nu_j`.
    pub fn moment(&self, i: u32) -> Result<f64> {
        if i == 0 || i > MAX_MOMENT_ORDER {
            return Err(domain(format!(
                "moment order {i} outside 1..={MAX_MOMENT_ORDER}"
            )));
        }
        let mut total = 0.0;
        for j in 1..=i {
            total += stirling2(i, j)? as f64 * self.factorial_moment(j)?;
        }
        Ok(total)
    }

    pub fn mean(&self) -> f64 {
        self.factorial_moment(1).expect("order 1 is always valid")
    }

    /// Squared coefficient of variation, variance over squared mean.
    pub fn scov(&self) -> f64 {
        let m1 = self.mean();
        let m2 = self.moment(2).expect("order 2 is always valid");
        (m2 - m1 * m1) / (m1 * m1)
    }

    /// Draws one absorption time by walking the phase chain.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let mut phase =
            pick(&self.beta_cumulative, rng.random::<f64>()).unwrap_or(self.order() - 1);
        let mut steps = 1;
        loop {
            match pick(&self.cumulative[phase], rng.random::<f64>()) {
                Some(next) => phase = next,
                None => return steps,
            }
            steps += 1;
        }
    }
}

// First index whose cumulative weight exceeds `u`, or `None` when `u` falls
// in the leftover (absorbing) mass.
#[inline]
fn pick(cumulative: &[f64], u: f64) -> Option<usize> {
    cumulative.iter().position(|&c| u < c)
}

/// See [`Dph::pmf_iter`].
#[derive(Debug)]
pub struct PmfIter<'a> {
    dph: &'a Dph,
    x: Vec<f64>,
    next: Vec<f64>,
    n: u64,
}

impl Iterator for PmfIter<'_> {
    type Item = (u64, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.n > 0 {
            linalg::vec_mat_into(&self.x, &self.dph.transient, &mut self.next);
            std::mem::swap(&mut self.x, &mut self.next);
        }
        self.n += 1;
        Some((self.n, linalg::dot(&self.x, &self.dph.exit)))
    }
}

/// Stirling number of the second kind `S(i, j)`, exact for `i <= 20`.
pub fn stirling2(i: u32, j: u32) -> Result<u64> {
    if j > i {
        return Err(domain(format!("S({i}, {j}) requires j <= i")));
    }
    if i > MAX_MOMENT_ORDER {
        return Err(domain(format!(
            "S({i}, {j}) exceeds the supported order {MAX_MOMENT_ORDER}"
        )));
    }
    let (i, j) = (i as usize, j as usize);
    let mut row = vec![0u64; i + 1];
    row[0] = 1;
    for n in 1..=i {
        for k in (1..=n).rev() {
            row[k] = k as u64 * row[k] + row[k - 1];
        }
        row[0] = 0;
    }
    Ok(row[j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn geometric_examples() {
        let one = Dph::geometric(1.0).unwrap();
        assert_eq!(one.transient()[(0, 0)], 0.0);
        assert_eq!(one.pmf(1).unwrap(), 1.0);

        let half = Dph::geometric(0.5).unwrap();
        assert!(close(half.mean(), 2.0, 1e-12));
        assert!(close(half.pmf(1).unwrap(), 0.5, 1e-15));
        assert!(close(half.pmf(2).unwrap(), 0.25, 1e-15));
        assert!(close(half.pmf(3).unwrap(), 0.125, 1e-15));
        assert!(close(half.cdf(2), 0.75, 1e-15));
        assert!(close(half.factorial_moment(2).unwrap(), 4.0, 1e-12));
        assert!(close(half.moment(2).unwrap(), 6.0, 1e-12));
        assert!(close(half.scov(), 0.5, 1e-12));

        let g = Dph::geometric(1.0 / 30.0).unwrap();
        assert!(close(g.moment(1).unwrap(), 30.0, 1e-9));
        assert!(close(g.scov(), 0.9667, 1e-4));
    }

    #[test]
    fn geometric_rejects_bad_parameter() {
        for p in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(Dph::geometric(p), Err(crate::Error::Domain(_))));
        }
    }

    #[test]
    fn mixed_geometric_examples() {
        let m1 = Dph::mixed_geometric(0.01, 0.05, 0.5, 0.5).unwrap();
        assert!(close(m1.mean(), 60.0, 1e-9));
        assert!(close(m1.scov(), 1.8722, 1e-4));
        assert!(close(m1.pmf(1).unwrap(), 0.03, 1e-15));

        let m2 = Dph::mixed_geometric(1.0 / 70.0, 0.05, 0.5, 0.5).unwrap();
        assert!(close(m2.mean(), 45.0, 1e-9));
        assert!(close(m2.scov(), 1.5951, 1e-4));

        let mix = Dph::mixed_geometric(0.3, 0.3, 0.5, 0.5).unwrap();
        let geo = Dph::geometric(0.3).unwrap();
        for ((_, a), (_, b)) in mix.pmf_iter().zip(geo.pmf_iter()).take(60) {
            assert!(close(a, b, 1e-15));
        }

        assert!(Dph::mixed_geometric(0.1, 0.2, 0.5, 0.6).is_err());
        assert!(Dph::mixed_geometric(0.1, 0.2, -0.5, 1.5).is_err());
    }

    #[test]
    fn bounded_pmf_examples() {
        let u = Dph::uniform(12, 18).unwrap();
        assert_eq!(u.order(), 18);
        assert!(close(u.mean(), 15.0, 1e-9));
        assert!(close(u.scov(), 0.0178, 1e-4));
        assert!(close(u.moment(2).unwrap(), 229.0, 1e-8));
        assert!(close(u.cdf(18), 1.0, 1e-12));

        let point = Dph::deterministic(1).unwrap();
        assert_eq!(point.pmf(1).unwrap(), 1.0);
        assert_eq!(point.mean(), 1.0);
        assert_eq!(point.factorial_moment(2).unwrap(), 0.0);

        let two_point = Dph::from_bounded_pmf(&BTreeMap::from([(1, 0.3), (3, 0.7)])).unwrap();
        let p: Vec<f64> = (1..=3).map(|n| two_point.pmf(n).unwrap()).collect();
        assert!(close(p[0], 0.3, 1e-12) && close(p[1], 0.0, 1e-12) && close(p[2], 0.7, 1e-12));
    }

    #[test]
    fn bounded_pmf_errors() {
        assert!(Dph::from_bounded_pmf(&BTreeMap::new()).is_err());
        assert!(Dph::from_bounded_pmf(&BTreeMap::from([(0, 0.5), (1, 0.5)])).is_err());
        assert!(Dph::from_bounded_pmf(&BTreeMap::from([(1, 0.5), (2, 0.4)])).is_err());
        assert!(Dph::from_bounded_pmf(&BTreeMap::from([(1, 1.2), (2, -0.2)])).is_err());
    }

    #[test]
    fn bounded_pmf_renormalizes_within_tolerance() {
        let d = Dph::from_bounded_pmf(&BTreeMap::from([(2, 0.5 + 4e-10), (5, 0.5)])).unwrap();
        let total: f64 = (1..=5).map(|n| d.pmf(n).unwrap()).sum();
        assert!(close(total, 1.0, 1e-14));
    }

    #[test]
    fn cdf_and_pmf_edges() {
        let d = Dph::mixed_geometric(0.2, 0.6, 0.3, 0.7).unwrap();
        assert_eq!(d.cdf(0), 0.0);
        assert!(d.pmf(0).is_err());
        let mut prev = 0.0;
        for n in 1..200 {
            let c = d.cdf(n);
            assert!(c >= prev);
            assert!(close(c - prev, d.pmf(n).unwrap(), 1e-12));
            prev = c;
        }
    }

    #[test]
    fn invalid_representations_are_rejected() {
        // Non-absorbing identity block.
        assert!(Dph::new(vec![1.0, 0.0], Matrix::identity(2, 2)).is_err());
        // Row sum above one.
        let a = Matrix::from_row_slice(2, 2, &[0.7, 0.4, 0.0, 0.5]);
        assert!(Dph::new(vec![1.0, 0.0], a).is_err());
        // Initial vector not normalized.
        assert!(Dph::new(vec![0.5], Matrix::from_element(1, 1, 0.5)).is_err());
    }

    #[test]
    fn stirling_numbers() {
        for i in 0..=20 {
            assert_eq!(stirling2(i, i).unwrap(), 1);
        }
        assert_eq!(stirling2(3, 2).unwrap(), 3);
        assert_eq!(stirling2(4, 2).unwrap(), 7);
        assert_eq!(stirling2(5, 0).unwrap(), 0);
        assert_eq!(stirling2(0, 0).unwrap(), 1);
        assert_eq!(stirling2(20, 10).unwrap(), 5_917_584_964_655);
        assert!(stirling2(2, 3).is_err());
        assert!(stirling2(21, 3).is_err());
    }

    #[test]
    fn moment_order_bounds() {
        let d = Dph::geometric(0.5).unwrap();
        assert!(d.moment(0).is_err());
        assert!(d.factorial_moment(21).is_err());
        assert!(d.moment(20).unwrap().is_finite());
    }

    #[test]
    fn sampling_point_mass_and_geometric_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let three = Dph::deterministic(3).unwrap();
        assert!((0..1000).all(|_| three.sample(&mut rng) == 3));

        let half = Dph::geometric(0.5).unwrap();
        let n = 1_000_000;
        let mean = (0..n).map(|_| half.sample(&mut rng) as f64).sum::<f64>() / n as f64;
        assert!(close(mean, 2.0, 0.01), "mean {mean}");
    }

    #[test]
    fn sampling_uniform_masses() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = Dph::uniform(12, 18).unwrap();
        let n = 1_000_000;
        let mut counts = [0u64; 19];
        for _ in 0..n {
            counts[u.sample(&mut rng) as usize] += 1;
        }
        for c in &counts[12..=18] {
            assert!(close(*c as f64 / n as f64, 1.0 / 7.0, 0.002));
        }
        assert_eq!(counts[..12].iter().sum::<u64>(), 0);
    }

    #[test]
    fn sampling_is_deterministic_given_seed() {
        let d = Dph::mixed_geometric(0.01, 0.05, 0.5, 0.5).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..100).map(|_| d.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
        assert_ne!(draw(3), draw(4));
    }
}
