//! Fractional telegraph-type motion on `[-ct, ct]`.
//!
//! Given `n` direction changes the position is `ct(2W - 1)` with `W` a
//! symmetric Beta variable: `Beta(αk, αk)` for `n = 2k` and
//! `Beta(αk + (1+α)/2, αk + (1+α)/2)` for `n = 2k+1`. The number of changes
//! follows the fractional Poisson law, so the position law is a Beta mixture
//! plus atoms of weight `1/(2E_{α,1}(λt^α))` at `±ct`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::fracpoisson::FracPoissonLaw;
use crate::quad::tanh_sinh;
use crate::sampling::{beta_variate, random_sign};
use crate::specfun::{ln_gamma_signed, PowerSeries};
use crate::stats::CumulativeTable;

/// Relative clamp applied to `|x|` before evaluating densities.
pub const EDGE_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeClass {
    Arcsine,
    Uniform,
    Bell,
}

impl std::fmt::Display for ShapeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ShapeClass::Arcsine => "arcsine",
            ShapeClass::Uniform => "uniform",
            ShapeClass::Bell => "bell",
        })
    }
}

/// Exponent of `c²t² - x²` in the conditional density with `2k` (even) or
/// `2k+1` (odd) direction changes.
pub fn conditional_exponent(alpha: f64, k: u64, parity: Parity) -> f64 {
    let kf = k as f64;
    match parity {
        Parity::Even => alpha * kf - 1.0,
        Parity::Odd => alpha * kf + 0.5 * (alpha - 1.0),
    }
}

/// Shape of the conditional density: uniform when the exponent is zero
/// (within `tol`), arcsine-like when negative, bell-shaped otherwise.
pub fn classify_shape_with_tolerance(alpha: f64, k: u64, parity: Parity, tol: f64) -> Result<ShapeClass> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("α must lie in (0, 1], got {alpha}")));
    }
    if parity == Parity::Even && k == 0 {
        return Err(domain("the even case needs k >= 1"));
    }
    let e = conditional_exponent(alpha, k, parity);
    Ok(if e.abs() <= tol {
        ShapeClass::Uniform
    } else if e < 0.0 {
        ShapeClass::Arcsine
    } else {
        ShapeClass::Bell
    })
}

/// [`classify_shape_with_tolerance`] with a tolerance of `1e-12`.
pub fn classify_shape(alpha: f64, k: u64, parity: Parity) -> Result<ShapeClass> {
    classify_shape_with_tolerance(alpha, k, parity, 1e-12)
}

/// Shape parameter `a` of the symmetric `Beta(a, a)` law after `n >= 1` changes.
pub fn beta_shape(alpha: f64, n: u64) -> f64 {
    let k = (n / 2) as f64;
    if n.is_multiple_of(2) {
        alpha * k
    } else {
        alpha * k + 0.5 * (1.0 + alpha)
    }
}

#[derive(Debug, Clone)]
pub struct TelegraphLaw {
    alpha: f64,
    lambda: f64,
    c: f64,
    t: f64,
    counts: FracPoissonLaw,
    even: PowerSeries,
    odd: PowerSeries,
}

impl TelegraphLaw {
    pub fn new(alpha: f64, lambda: f64, c: f64, t: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(invalid(format!("c must be positive, got {c}")));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(invalid(format!("t must be positive, got {t}")));
        }
        let counts = FracPoissonLaw::new(alpha, lambda, t)?;
        let ln_q = lambda.ln() - alpha * (2.0 * c).ln();
        let ct = c * t;
        let even = PowerSeries::build(1, 2.0 * alpha, -2.0, ct, |k| {
            let a = alpha * k as f64;
            ct.ln() + 2.0 * k as f64 * ln_q - ln_gamma_signed(a).0 - ln_gamma_signed(a + 1.0).0
        })?;
        let odd = PowerSeries::build(0, 2.0 * alpha, alpha - 1.0, ct, |k| {
            let p = alpha * k as f64 + 0.5 * (1.0 + alpha);
            (2 * k + 1) as f64 * ln_q - 2.0 * ln_gamma_signed(p).0
        })?;
        Ok(Self { alpha, lambda, c, t, counts, even, odd })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn counts(&self) -> &FracPoissonLaw {
        &self.counts
    }

    /// Half-width `ct` of the support.
    pub fn reach(&self) -> f64 {
        self.c * self.t
    }

    /// Probability of each endpoint atom, `1/(2E_{α,1}(λt^α))`.
    pub fn singular_weight(&self) -> f64 {
        0.5 * self.counts.pmf(0)
    }

    fn clamped_w(&self, x: f64) -> Result<f64> {
        let ct = self.reach();
        if !(x.abs() <= ct) {
            return Err(domain(format!("|x| = {} exceeds ct = {ct}", x.abs())));
        }
        let x = x.clamp(-ct * (1.0 - EDGE_CLAMP), ct * (1.0 - EDGE_CLAMP));
        Ok(((ct - x) * (ct + x)).sqrt())
    }

    /// Conditional density given `n >= 1` direction changes, for `|x| < ct`.
    pub fn conditional_density(&self, n: u64, x: f64) -> Result<f64> {
        let ct = self.reach();
        if n == 0 {
            return Err(domain("the conditional law needs at least one direction change"));
        }
        if !(x.abs() < ct) {
            return Err(domain(format!("|x| = {} is not inside (-ct, ct)", x.abs())));
        }
        let a = beta_shape(self.alpha, n);
        let w2 = (ct - x) * (ct + x);
        // ((c²t²-x²))^{a-1} / (2ct)^{2a-1} · Γ(2a)/Γ(a)²
        let ln = (a - 1.0) * w2.ln() - (2.0 * a - 1.0) * (2.0 * ct).ln() + ln_gamma_signed(2.0 * a).0
            - 2.0 * ln_gamma_signed(a).0;
        Ok(ln.exp())
    }

    /// Absolutely continuous density as a function of `w = √(c²t² - x²)`.
    pub fn ac_density_w(&self, w: f64) -> f64 {
        (self.even.eval(w) + self.odd.eval(w)) * self.counts.pmf(0)
    }

    /// Even-change part `ct Σ_{k>=1} q^{2k} w^{2αk-2} / (Γ(αk)Γ(αk+1))`,
    /// not divided by the normalizer.
    pub fn even_series(&self) -> &PowerSeries {
        &self.even
    }

    /// Odd-change part `Σ_{k>=0} q^{2k+1} w^{2αk+α-1} / Γ(αk+(1+α)/2)²`.
    pub fn odd_series(&self) -> &PowerSeries {
        &self.odd
    }

    /// `(ac density at x, weight of each endpoint atom)`, for `|x| <= ct`.
    pub fn density(&self, x: f64) -> Result<(f64, f64)> {
        let w = self.clamped_w(x)?;
        Ok((self.ac_density_w(w), self.singular_weight()))
    }

    /// Mass of the absolutely continuous part, integrating over
    /// `x = ct cos φ` so that `w = ct sin φ` is exact near the endpoints.
    pub fn ac_mass(&self) -> Result<f64> {
        let ct = self.reach();
        let q = tanh_sinh(
            |phi, _, _| {
                let w = ct * phi.sin();
                self.ac_density_w(w) * w
            },
            0.0,
            std::f64::consts::FRAC_PI_2,
            1e-14,
        )?;
        Ok(2.0 * q.value)
    }

    /// Absolutely continuous mass plus both atoms.
    pub fn total_mass(&self) -> Result<f64> {
        Ok(self.ac_mass()? + 2.0 * self.singular_weight())
    }

    /// Analytic CDF built by quadrature of the density.
    pub fn cdf(&self, cells: usize) -> Result<TelegraphCdf> {
        let ct = self.reach();
        let table = CumulativeTable::build(
            |phi| {
                let w = ct * phi.sin();
                self.ac_density_w(w) * w
            },
            std::f64::consts::FRAC_PI_2,
            cells,
        )?;
        Ok(TelegraphCdf { ct, atom: self.singular_weight(), table })
    }

    /// Exact draw of the position at time `t`.
    pub fn sample_position<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let n = self.counts.sample(rng);
        self.sample_given(n, rng)
    }

    /// Position given `n` direction changes.
    pub fn sample_given<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> f64 {
        let ct = self.reach();
        if n == 0 {
            return random_sign(rng) * ct;
        }
        let a = beta_shape(self.alpha, n);
        let w = beta_variate(rng, a, a);
        ct * (2.0 * w - 1.0)
    }
}

/// CDF of the telegraph position law, atoms included.
#[derive(Debug, Clone)]
pub struct TelegraphCdf {
    ct: f64,
    atom: f64,
    table: CumulativeTable,
}

impl TelegraphCdf {
    /// `(F(x-), F(x))`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let ct = self.ct;
        if x < -ct {
            return (0.0, 0.0);
        }
        if x >= ct {
            return if x == ct { (1.0 - self.atom, 1.0) } else { (1.0, 1.0) };
        }
        if x == -ct {
            return (0.0, self.atom);
        }
        let tail = self.table.eval((x.abs() / ct).min(1.0).acos());
        let f = if x < 0.0 { self.atom + tail } else { 1.0 - self.atom - tail };
        (f, f)
    }
}

/// Position at time `t` of the classical telegraph motion simulated event by
/// event: Poisson(λ) switching times, speed `c`, random initial direction.
pub fn simulate_classical_path<R: Rng + ?Sized>(lambda: f64, c: f64, t: f64, rng: &mut R) -> f64 {
    let mut v = random_sign(rng) * c;
    let mut now = 0.0;
    let mut x = 0.0;
    loop {
        let u: f64 = rng.random();
        let step = -(1.0 - u).ln() / lambda;
        if now + step >= t {
            return x + v * (t - now);
        }
        now += step;
        x += v * step;
        v = -v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::stream_rng;
    use crate::specfun::{bessel_i0, bessel_i1, gamma};

    #[test]
    fn classical_density() {
        let law = TelegraphLaw::new(1.0, 1.0, 1.0, 1.0).unwrap();
        for x in [0.0f64, 0.3, -0.7, 0.95] {
            let w = (1.0 - x * x).sqrt();
            let expect = (-1f64).exp() / 2.0 * (bessel_i0(w).unwrap() + bessel_i1(w).unwrap() / w);
            let (ac, s) = law.density(x).unwrap();
            assert!((ac - expect).abs() < 1e-13, "x={x}");
            assert!((s - 0.5 * (-1f64).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn classical_conditional() {
        // ct (2k)!/(k!(k-1)!) (c²t²-x²)^{k-1}/(2ct)^{2k}
        let law = TelegraphLaw::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let x: f64 = 0.3;
        let k = 2;
        let expect = gamma(5.0).unwrap() / (gamma(3.0).unwrap() * gamma(2.0).unwrap()) * (1.0 - x * x).powi(k - 1)
            / 2f64.powi(2 * k);
        assert!((law.conditional_density(4, x).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn conditional_uniform_and_symmetric() {
        let law = TelegraphLaw::new(1.0 / 3.0, 1.0, 1.0, 1.0).unwrap();
        for x in [-0.9, 0.0, 0.4] {
            assert!((law.conditional_density(6, x).unwrap() - 0.5).abs() < 1e-13);
        }
        let law = TelegraphLaw::new(0.4, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(law.conditional_density(5, 0.2).unwrap(), law.conditional_density(5, -0.2).unwrap());
        assert!(law.conditional_density(0, 0.1).is_err());
        assert!(law.conditional_density(2, 1.0).is_err());
    }

    #[test]
    fn conditional_normalized() {
        for n in 1..6 {
            let a = beta_shape(0.6, n);
            let norm = (1.0 - 2.0 * a) * 2f64.ln() + ln_gamma_signed(2.0 * a).0 - 2.0 * ln_gamma_signed(a).0;
            // (1 - x²) = dl·dr stays accurate next to ±1
            let q = tanh_sinh(|_, dl, dr| ((a - 1.0) * (dl * dr).ln() + norm).exp(), -1.0, 1.0, 1e-13).unwrap();
            assert!((q.value - 1.0).abs() < 1e-10, "n={n}: {}", q.value);
        }
    }

    #[test]
    fn mixture_identity() {
        let law = TelegraphLaw::new(0.55, 1.3, 1.0, 1.5).unwrap();
        for i in 0..41 {
            let x = -1.5 + 3.0 * (i as f64 + 0.5) / 41.0;
            let mix: f64 = (1..200).map(|n| law.conditional_density(n, x).unwrap() * law.counts().pmf(n)).sum();
            let (ac, _) = law.density(x).unwrap();
            assert!((mix - ac).abs() < 1e-9 * ac.max(1.0), "x={x}");
        }
    }

    #[test]
    fn total_mass_and_initial_condition() {
        for &(a, l, c, t) in &[(0.3, 1.0, 1.0, 1.0), (0.7, 2.0, 1.5, 2.0)] {
            let law = TelegraphLaw::new(a, l, c, t).unwrap();
            assert!((law.total_mass().unwrap() - 1.0).abs() < 1e-8);
        }
        let law = TelegraphLaw::new(0.5, 1.0, 1.0, 1e-6).unwrap();
        assert!(law.ac_mass().unwrap() < 2e-3);
        assert!((law.singular_weight() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn shapes() {
        assert_eq!(classify_shape(1.0 / 3.0, 3, Parity::Even).unwrap(), ShapeClass::Uniform);
        assert_eq!(classify_shape(0.2, 1, Parity::Odd).unwrap(), ShapeClass::Arcsine);
        assert_eq!(classify_shape(1.0, 4, Parity::Even).unwrap(), ShapeClass::Bell);
        assert_eq!(classify_shape(0.2, 2, Parity::Odd).unwrap(), ShapeClass::Uniform);
        assert!(classify_shape(0.5, 0, Parity::Even).is_err());
        assert_eq!(
            classify_shape_with_tolerance(0.3333, 3, Parity::Even, 1e-3).unwrap(),
            ShapeClass::Uniform
        );
    }

    #[test]
    fn atoms_when_no_change() {
        let law = TelegraphLaw::new(0.5, 1.0, 2.0, 1.5).unwrap();
        let mut rng = stream_rng(9, 0);
        for _ in 0..100 {
            assert_eq!(law.sample_given(0, &mut rng).abs(), 3.0);
        }
    }

    #[test]
    fn cdf_is_consistent() {
        let law = TelegraphLaw::new(0.6, 1.0, 1.0, 1.0).unwrap();
        let cdf = law.cdf(400).unwrap();
        assert_eq!(cdf.eval(-1.0), (0.0, law.singular_weight()));
        assert!((cdf.eval(0.0).0 - 0.5).abs() < 1e-9);
        assert_eq!(cdf.eval(1.0).1, 1.0);
    }

    #[test]
    fn classical_path_simulator_stays_in_support() {
        let mut rng = stream_rng(4, 0);
        for _ in 0..1000 {
            assert!(simulate_classical_path(2.0, 1.0, 1.0, &mut rng).abs() <= 1.0 + 1e-12);
        }
    }
}
