//! Multi-regime absorbing Markov chains in discrete time.
//!
//! The chain has `M` transient and `J` absorbing states. Elapsed time is cut
//! into regimes `[t_{i-1}, t_i)` by finite thresholds `0 < t_1 < ... <
//! t_{I-1}`; in regime `i` the transient block moves by `A_i` and absorbs
//! through `B_i`. The step from time `n` to `n + 1` uses the matrices of the
//! regime containing `n`.

use crate::error::{model, Error, Result};
use crate::linalg::{self, Fundamental, Matrix};

const STOCHASTIC_TOL: f64 = 1e-12;

/// A multi-regime absorbing chain `(beta, thresholds, {A_i}, {B_i})`.
#[derive(Debug, Clone)]
pub struct MrAmc {
    beta: Vec<f64>,
    thresholds: Vec<u32>,
    transients: Vec<Matrix>,
    absorbers: Vec<Matrix>,
    // Regime-entry transient vectors, `entry[i] = x_{t_i}` with `t_0 = 0`.
    entry: Vec<Vec<f64>>,
    fundamental: Fundamental,
}

/// Regime-entry transient vectors and per-regime absorption vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeVectors {
    pub betas: Vec<Vec<f64>>,
    pub sigmas: Vec<Vec<f64>>,
}

impl MrAmc {
    /// Builds the chain. `thresholds` must be nondecreasing; a regime of
    /// zero length (equal consecutive thresholds, or a first threshold of 0)
    /// is dropped together with its matrices.
    pub fn new(
        beta: Vec<f64>,
        thresholds: Vec<u32>,
        transients: Vec<Matrix>,
        absorbers: Vec<Matrix>,
    ) -> Result<Self> {
        let regimes = thresholds.len() + 1;
        if transients.len() != regimes || absorbers.len() != regimes {
            return Err(model(format!(
                "{} thresholds need {regimes} transient and absorption matrices, got {} and {}",
                thresholds.len(),
                transients.len(),
                absorbers.len()
            )));
        }
        let m = beta.len();
        if m == 0 {
            return Err(model("chain needs at least one transient state"));
        }
        let j = absorbers[0].ncols();
        if j == 0 {
            return Err(model("chain needs at least one absorbing state"));
        }
        if beta.iter().any(|&b| b < 0.0) || (beta.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
            return Err(model("initial vector must be nonnegative and sum to 1"));
        }

        let mut kept_thresholds = Vec::with_capacity(thresholds.len());
        let mut kept_a = Vec::with_capacity(regimes);
        let mut kept_b = Vec::with_capacity(regimes);
        let mut start = 0u32;
        for (i, (a, b)) in transients.into_iter().zip(absorbers).enumerate() {
            if a.nrows() != m || a.ncols() != m {
                return Err(model(format!("A_{} is not {m}x{m}", i + 1)));
            }
            if b.nrows() != m || b.ncols() != j {
                return Err(model(format!("B_{} is not {m}x{j}", i + 1)));
            }
            if a.iter().chain(b.iter()).any(|&x| x < 0.0) {
                return Err(model(format!(
                    "regime {} has negative probabilities",
                    i + 1
                )));
            }
            let ra = linalg::row_sums(&a);
            let rb = linalg::row_sums(&b);
            if let Some(row) = (0..m).find(|&r| (ra[r] + rb[r] - 1.0).abs() > STOCHASTIC_TOL) {
                return Err(model(format!(
                    "regime {}: row {row} has B 1 != 1 - A 1 ({} + {})",
                    i + 1,
                    ra[row],
                    rb[row]
                )));
            }
            match thresholds.get(i) {
                Some(&end) if end < start => {
                    return Err(model(format!(
                        "thresholds must be nondecreasing, got {end} after {start}"
                    )));
                }
                Some(&end) if end == start => continue,
                Some(&end) => {
                    kept_thresholds.push(end);
                    start = end;
                }
                None => {}
            }
            kept_a.push(a);
            kept_b.push(b);
        }

        let last = kept_a.last().expect("final regime is never dropped");
        let rho = linalg::spectral_radius(last);
        if rho >= 1.0 - 1e-10 {
            return Err(Error::Singular(format!(
                "final-regime transient matrix has spectral radius {rho}"
            )));
        }
        let fundamental = Fundamental::new(last)?;

        let mut entry = vec![beta.clone()];
        let mut prev = 0u32;
        for (i, &t) in kept_thresholds.iter().enumerate() {
            let x = linalg::vec_mat_pow(&entry[i], &kept_a[i], u64::from(t - prev));
            entry.push(x);
            prev = t;
        }

        Ok(Self {
            beta,
            thresholds: kept_thresholds,
            transients: kept_a,
            absorbers: kept_b,
            entry,
            fundamental,
        })
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Finite thresholds after dropping zero-length regimes.
    pub fn thresholds(&self) -> &[u32] {
        &self.thresholds
    }

    pub fn transients(&self) -> &[Matrix] {
        &self.transients
    }

    pub fn absorbers(&self) -> &[Matrix] {
        &self.absorbers
    }

    pub fn regime_count(&self) -> usize {
        self.transients.len()
    }

    pub fn transient_states(&self) -> usize {
        self.beta.len()
    }

    pub fn absorbing_states(&self) -> usize {
        self.absorbers[0].ncols()
    }

    /// Factorization of `I - A_I` for the unbounded final regime.
    pub fn final_fundamental(&self) -> &Fundamental {
        &self.fundamental
    }

    /// Start of regime `i` (0-based), `t_{i}` with `t_0 = 0`.
    pub fn regime_start(&self, i: usize) -> u32 {
        if i == 0 {
            0
        } else {
            self.thresholds[i - 1]
        }
    }

    /// 0-based index of the regime whose interval `[t_{i-1}, t_i)` holds `n`.
    pub fn regime_of(&self, n: u64) -> usize {
        self.thresholds.partition_point(|&t| u64::from(t) <= n)
    }

    /// Transient vector at the start of the final regime.
    pub fn final_entry(&self) -> &[f64] {
        self.entry.last().expect("at least one regime")
    }

    /// Computes `beta_i` for every regime and the absorption vectors
    /// `sigma_i = beta_i (sum_{l < delta_i} A_i^l) B_i`, closing the final
    /// regime with `beta_I (I - A_I)^{-1} B_I`.
    pub fn regime_vectors(&self) -> RegimeVectors {
        let regimes = self.regime_count();
        let j = self.absorbing_states();
        let mut sigmas = Vec::with_capacity(regimes);
        for i in 0..regimes - 1 {
            let delta = self.thresholds[i] - self.regime_start(i);
            let mut x = self.entry[i].clone();
            let mut next = vec![0.0; x.len()];
            let mut sigma = vec![0.0; j];
            let mut absorbed = vec![0.0; j];
            for _ in 0..delta {
                linalg::vec_mat_into(&x, &self.absorbers[i], &mut absorbed);
                sigma.iter_mut().zip(&absorbed).for_each(|(s, a)| *s += a);
                linalg::vec_mat_into(&x, &self.transients[i], &mut next);
                std::mem::swap(&mut x, &mut next);
            }
            sigmas.push(sigma);
        }
        let fx = self.fundamental.solve_row(self.final_entry());
        sigmas.push(linalg::vec_mat(&fx, &self.absorbers[regimes - 1]));
        RegimeVectors {
            betas: self.entry.clone(),
            sigmas,
        }
    }

    /// `x_n = beta_i A_i^{n - t_{i-1}}` for the regime `i` holding `n`.
    pub fn transient_vector(&self, n: u64) -> Vec<f64> {
        let i = self.regime_of(n);
        let offset = n - u64::from(self.regime_start(i));
        linalg::vec_mat_pow(&self.entry[i], &self.transients[i], offset)
    }

    /// Iterator over `(n, x_n)` for `n = 0, 1, 2, ...`.
    pub fn transient_iter(&self) -> TransientIter<'_> {
        TransientIter {
            chain: self,
            x: self.beta.clone(),
            next: vec![0.0; self.beta.len()],
            n: 0,
            started: false,
        }
    }

    /// `F_T(n) = 1 - x_n 1`.
    pub fn absorption_cdf(&self, n: u64) -> f64 {
        1.0 - self.transient_vector(n).iter().sum::<f64>()
    }

    /// `F_T(n) - F_T(n - 1)` for `n >= 1`.
    pub fn absorption_pmf(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("absorption pmf is defined for n >= 1".into()));
        }
        let prev = self.transient_vector(n - 1);
        let i = self.regime_of(n - 1);
        let absorbed = linalg::vec_mat(&prev, &self.absorbers[i]);
        Ok(absorbed.iter().sum())
    }
}

/// See [`MrAmc::transient_iter`].
#[derive(Debug)]
pub struct TransientIter<'a> {
    chain: &'a MrAmc,
    x: Vec<f64>,
    next: Vec<f64>,
    n: u64,
    started: bool,
}

impl Iterator for TransientIter<'_> {
    type Item = (u64, Vec<f64>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.started {
            let i = self.chain.regime_of(self.n);
            linalg::vec_mat_into(&self.x, &self.chain.transients[i], &mut self.next);
            std::mem::swap(&mut self.x, &mut self.next);
            self.n += 1;
        }
        self.started = true;
        Some((self.n, self.x.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dph::Dph;

    fn plain(d: &Dph) -> MrAmc {
        let m = d.order();
        let b = Matrix::from_column_slice(m, 1, d.exit());
        MrAmc::new(
            d.beta().to_vec(),
            vec![],
            vec![d.transient().clone()],
            vec![b],
        )
        .unwrap()
    }

    fn two_regime() -> MrAmc {
        // Two transient, two absorbing states; regime switch at 2.
        let a1 = Matrix::from_row_slice(2, 2, &[0.5, 0.3, 0.2, 0.6]);
        let b1 = Matrix::from_row_slice(2, 2, &[0.2, 0.0, 0.0, 0.2]);
        let a2 = Matrix::from_row_slice(2, 2, &[0.1, 0.4, 0.3, 0.3]);
        let b2 = Matrix::from_row_slice(2, 2, &[0.1, 0.4, 0.25, 0.15]);
        MrAmc::new(vec![0.6, 0.4], vec![2], vec![a1, a2], vec![b1, b2]).unwrap()
    }

    #[test]
    fn regime_lookup_is_left_closed() {
        let a = Matrix::from_element(1, 1, 0.5);
        let b = Matrix::from_element(1, 1, 0.5);
        let c = MrAmc::new(
            vec![1.0],
            vec![3, 6],
            vec![a.clone(), a.clone(), a],
            vec![b.clone(), b.clone(), b],
        )
        .unwrap();
        assert_eq!(c.regime_of(0), 0);
        assert_eq!(c.regime_of(2), 0);
        assert_eq!(c.regime_of(3), 1);
        assert_eq!(c.regime_of(6), 2);
        assert_eq!(c.regime_of(100), 2);
    }

    #[test]
    fn single_regime_matches_dph() {
        let d = Dph::mixed_geometric(0.1, 0.4, 0.3, 0.7).unwrap();
        let c = plain(&d);
        let rv = c.regime_vectors();
        assert!((rv.sigmas[0][0] - 1.0).abs() < 1e-12);
        assert_eq!(c.transient_vector(0), d.beta());
        for n in 0..=50 {
            assert!((c.absorption_cdf(n) - d.cdf(n)).abs() < 1e-12);
            if n > 0 {
                assert!((c.absorption_pmf(n).unwrap() - d.pmf(n).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_length_regimes_are_dropped() {
        let a = Matrix::from_element(1, 1, 0.5);
        let b = Matrix::from_element(1, 1, 0.5);
        let c = MrAmc::new(
            vec![1.0],
            vec![0, 4, 4],
            vec![a.clone(), a.clone(), a.clone(), a],
            vec![b.clone(), b.clone(), b.clone(), b],
        )
        .unwrap();
        assert_eq!(c.thresholds(), &[4]);
        assert_eq!(c.regime_count(), 2);
    }

    #[test]
    fn decreasing_thresholds_are_rejected() {
        let a = Matrix::from_element(1, 1, 0.5);
        let b = Matrix::from_element(1, 1, 0.5);
        let r = MrAmc::new(
            vec![1.0],
            vec![5, 3],
            vec![a.clone(), a.clone(), a],
            vec![b.clone(), b.clone(), b],
        );
        assert!(r.is_err());
    }

    #[test]
    fn inconsistent_absorption_rows_are_rejected() {
        let a = Matrix::from_element(1, 1, 0.5);
        let b = Matrix::from_element(1, 1, 0.4);
        assert!(MrAmc::new(vec![1.0], vec![], vec![a], vec![b]).is_err());
    }

    #[test]
    fn non_absorbing_final_regime_is_rejected() {
        let a = Matrix::identity(1, 1);
        let b = Matrix::zeros(1, 1);
        assert!(MrAmc::new(vec![1.0], vec![], vec![a], vec![b]).is_err());
    }

    #[test]
    fn two_regime_vectors_follow_direct_iteration() {
        let c = two_regime();
        // Direct slot-by-slot iteration of the full chain (x, x~).
        let mut x = c.beta().to_vec();
        let mut absorbed = [0.0; 2];
        for n in 0..=5u64 {
            let tx = c.transient_vector(n);
            for (u, v) in tx.iter().zip(&x) {
                assert!((u - v).abs() < 1e-14);
            }
            assert!((x.iter().sum::<f64>() + absorbed.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let i = if n < 2 { 0 } else { 1 };
            let ab = linalg::vec_mat(&x, &c.absorbers()[i]);
            absorbed.iter_mut().zip(&ab).for_each(|(a, b)| *a += b);
            x = linalg::vec_mat(&x, &c.transients()[i]);
        }
        let rv = c.regime_vectors();
        let total: f64 = rv.sigmas.iter().flatten().sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert_eq!(rv.betas[0], c.beta());
    }

    #[test]
    fn transient_iter_matches_transient_vector() {
        let c = two_regime();
        for (n, x) in c.transient_iter().take(20) {
            let direct = c.transient_vector(n);
            for (u, v) in x.iter().zip(&direct) {
                assert!((u - v).abs() < 1e-14);
            }
        }
    }
}
