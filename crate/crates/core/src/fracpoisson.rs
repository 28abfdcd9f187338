//! The fractional Poisson counting law
//! `P{N = k} = (λt^α)^k / (Γ(αk+1) E_{α,1}(λt^α))`.

use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::specfun::{ln_gamma_signed, mittag_leffler};

/// Cumulative probabilities are tabulated until they exceed `1 - TAIL`.
pub const TAIL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct FracPoissonLaw {
    alpha: f64,
    lambda: f64,
    t: f64,
    #[serde(skip)]
    ln_z: f64,
    #[serde(skip)]
    ln_norm: f64,
    #[serde(skip)]
    cdf: Vec<f64>,
}

impl FracPoissonLaw {
    pub fn new(alpha: f64, lambda: f64, t: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid(format!("α must lie in (0, 1], got {alpha}")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(invalid(format!("λ must be positive, got {lambda}")));
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(invalid(format!("t must be non-negative, got {t}")));
        }
        let z = lambda * t.powf(alpha);
        let norm = mittag_leffler(alpha, 1.0, z)?;
        let mut law = Self { alpha, lambda, t, ln_z: z.ln(), ln_norm: norm.ln(), cdf: Vec::new() };
        law.cdf = law.build_cdf();
        Ok(law)
    }

    fn build_cdf(&self) -> Vec<f64> {
        let mut cdf = Vec::new();
        let mut cum = 0.0;
        for k in 0..crate::specfun::MAX_TERMS as u64 {
            let p = self.pmf(k);
            cum += p;
            cdf.push(cum);
            if cum > 1.0 - TAIL {
                break;
            }
            // rounding can leave the sum a hair short of 1 - TAIL
            if k as f64 > self.mean_bound() && p < 1e-300 {
                break;
            }
        }
        cdf
    }

    fn mean_bound(&self) -> f64 {
        (self.ln_z.exp() / self.alpha).powf(1.0 / self.alpha) + 10.0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `λ t^α`.
    pub fn z(&self) -> f64 {
        self.ln_z.exp()
    }

    /// `E_{α,1}(λ t^α)`.
    pub fn normalizer(&self) -> f64 {
        self.ln_norm.exp()
    }

    pub fn ln_pmf(&self, k: u64) -> f64 {
        let kf = k as f64;
        let lz = if k == 0 { 0.0 } else { kf * self.ln_z };
        lz - ln_gamma_signed(self.alpha * kf + 1.0).0 - self.ln_norm
    }

    pub fn pmf(&self, k: u64) -> f64 {
        self.ln_pmf(k).exp()
    }

    /// Probability generating function `E_{α,1}(uλt^α) / E_{α,1}(λt^α)`.
    pub fn pgf(&self, u: f64) -> Result<f64> {
        if !(u.abs() <= 1.0) {
            return Err(invalid(format!("pgf argument must satisfy |u| <= 1, got {u}")));
        }
        Ok(mittag_leffler(self.alpha, 1.0, u * self.z())? / self.normalizer())
    }

    /// `(P{N even}, P{N odd})` from the closed forms
    /// `E_{2α,1}(λ²t^{2α})/E` and `λt^α E_{2α,α+1}(λ²t^{2α})/E`.
    pub fn even_odd_mass(&self) -> Result<(f64, f64)> {
        let z = self.z();
        let e = self.normalizer();
        let even = mittag_leffler(2.0 * self.alpha, 1.0, z * z)? / e;
        let odd = z * mittag_leffler(2.0 * self.alpha, self.alpha + 1.0, z * z)? / e;
        Ok((even, odd))
    }

    /// Tabulated cumulative probabilities `P{N <= k}`.
    pub fn cdf_table(&self) -> &[f64] {
        &self.cdf
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let k = self.cdf.partition_point(|&c| c < u);
        k.min(self.cdf.len() - 1) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::stream_rng;
    use crate::specfun::gamma;

    #[test]
    fn classical_reduction() {
        let law = FracPoissonLaw::new(1.0, 1.0, 1.0).unwrap();
        assert!((law.pmf(0) - (-1f64).exp()).abs() < 1e-15);
        let law = FracPoissonLaw::new(1.0, 2.0, 1.5).unwrap();
        let mu: f64 = 3.0;
        let expect = (-mu).exp() * mu.powi(3) / 6.0;
        assert!((law.pmf(3) - expect).abs() < 1e-14);
        let law = FracPoissonLaw::new(1.0, 1.0, 2.0).unwrap();
        assert!((law.pgf(0.3).unwrap() - (2.0 * (0.3 - 1.0f64)).exp()).abs() < 1e-14);
    }

    #[test]
    fn pgf_edges() {
        let law = FracPoissonLaw::new(0.6, 1.3, 0.8).unwrap();
        assert!((law.pgf(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((law.pgf(0.0).unwrap() - law.pmf(0)).abs() < 1e-15);
        assert!(law.pgf(1.5).is_err());
    }

    #[test]
    fn pgf_matches_pmf_series() {
        let law = FracPoissonLaw::new(0.45, 2.0, 1.7).unwrap();
        for u in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            let direct: f64 = (0..400).map(|k| law.pmf(k) * f64::powi(u, k as i32)).sum();
            assert!((law.pgf(u).unwrap() - direct).abs() < 1e-10, "u={u}");
        }
    }

    #[test]
    fn even_odd_split() {
        let law = FracPoissonLaw::new(1.0, 1.0, 1.0).unwrap();
        let (e, o) = law.even_odd_mass().unwrap();
        let em1 = (-1f64).exp();
        assert!((e - em1 * 1f64.cosh()).abs() < 1e-14);
        assert!((o - em1 * 1f64.sinh()).abs() < 1e-14);
        let law = FracPoissonLaw::new(0.5, 1.0, 1.0).unwrap();
        let (e, o) = law.even_odd_mass().unwrap();
        let de: f64 = (0..200).map(|k| law.pmf(2 * k)).sum();
        let dodd: f64 = (0..200).map(|k| law.pmf(2 * k + 1)).sum();
        assert!((e - de).abs() < 1e-10 && (o - dodd).abs() < 1e-10);
        assert!((e + o - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalization_and_table() {
        for &(a, l, t) in &[(0.3, 1.0, 1.0), (0.7, 5.0, 3.0), (1.0, 20.0, 1.0)] {
            let law = FracPoissonLaw::new(a, l, t).unwrap();
            let last = *law.cdf_table().last().unwrap();
            assert!((last - 1.0).abs() < 1e-10, "{a} {l} {t}: {last}");
        }
    }

    #[test]
    fn zero_time_is_degenerate() {
        let law = FracPoissonLaw::new(0.5, 1.0, 0.0).unwrap();
        assert_eq!(law.pmf(0), 1.0);
        assert_eq!(law.pmf(3), 0.0);
        let mut rng = stream_rng(1, 0);
        assert_eq!(law.sample(&mut rng), 0);
    }

    #[test]
    fn zero_probability_ages() {
        let mut prev = 1.0;
        for i in 0..30 {
            let law = FracPoissonLaw::new(0.35, 1.2, 0.2 * i as f64).unwrap();
            assert!(law.pmf(0) <= prev);
            prev = law.pmf(0);
        }
    }

    #[test]
    fn weighted_poisson_identity() {
        // p_k ∝ w_k · Poisson(λt)_k with w_k = k! (λt^α)^k / (Γ(αk+1) (λt)^k)
        let (a, l, t) = (0.6_f64, 1.4_f64, 2.0_f64);
        let law = FracPoissonLaw::new(a, l, t).unwrap();
        let mu = l * t;
        let weight = |k: i32| gamma(k as f64 + 1.0).unwrap() * (l * t.powf(a)).powi(k) / (gamma(a * k as f64 + 1.0).unwrap() * mu.powi(k));
        let pois = |k: i32| (-mu).exp() * mu.powi(k) / gamma(k as f64 + 1.0).unwrap();
        let ew: f64 = (0..60).map(|k| weight(k) * pois(k)).sum();
        for k in 0..8 {
            assert!((law.pmf(k as u64) - weight(k) * pois(k) / ew).abs() < 1e-13);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_poisson_at_one() {
        let law = FracPoissonLaw::new(1.0, 3.0, 1.0).unwrap();
        let mut a = stream_rng(42, 0);
        let mut b = stream_rng(42, 0);
        let xs: Vec<u64> = (0..1000).map(|_| law.sample(&mut a)).collect();
        let ys: Vec<u64> = (0..1000).map(|_| law.sample(&mut b)).collect();
        assert_eq!(xs, ys);
        let n = 1_000_000;
        let mean = (0..n).map(|_| law.sample(&mut a) as f64).sum::<f64>() / n as f64;
        assert!((mean - 3.0).abs() < 3.0 * (3.0 / n as f64).sqrt());
    }

    #[test]
    fn invalid_parameters() {
        assert!(FracPoissonLaw::new(0.0, 1.0, 1.0).is_err());
        assert!(FracPoissonLaw::new(1.2, 1.0, 1.0).is_err());
        assert!(FracPoissonLaw::new(0.5, -1.0, 1.0).is_err());
        assert!(FracPoissonLaw::new(0.5, 1.0, -1.0).is_err());
    }
}
