//! Fractional planar random motion in the disc of radius `ct`.
//!
//! After `n >= 1` direction changes the position has density
//! `αn / (2π(ct)^{αn}) · (c²t² - r²)^{nα/2 - 1}`; with no change the particle
//! sits on the circle `r = ct`. Mixing over the fractional Poisson law gives
//! the Mittag-Leffler form of the unconditional density.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::fracpoisson::FracPoissonLaw;
use crate::quad::tanh_sinh;
use crate::sampling::uniform_angle;
use crate::specfun::{ln_gamma_signed, mittag_leffler, PowerSeries};
use crate::stats::CumulativeTable;

use std::f64::consts::{PI, TAU};

fn check_motion(c: f64, t: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid(format!("c must be positive, got {c}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    Ok(())
}

/// `√(c²t² - r²)` for a point strictly inside the disc.
fn open_disc_w(ct: f64, x: f64, y: f64) -> Result<f64> {
    let r = x.hypot(y);
    if !(r < ct) {
        return Err(domain(format!("r = {r} is not inside the open disc of radius {ct}")));
    }
    Ok(((ct - r) * (ct + r)).sqrt())
}

#[derive(Debug, Clone)]
pub struct PlanarLaw {
    alpha: f64,
    lambda: f64,
    c: f64,
    t: f64,
    counts: FracPoissonLaw,
    interior: PowerSeries,
    projection: PowerSeries,
}

impl PlanarLaw {
    pub fn new(alpha: f64, lambda: f64, c: f64, t: f64) -> Result<Self> {
        check_motion(c, t)?;
        let counts = FracPoissonLaw::new(alpha, lambda, t)?;
        let ct = c * t;
        let ln_r = lambda.ln() - alpha * c.ln();
        let lead = ln_r - TAU.ln();
        // λ/(2πc^α) Σ (λ/c^α)^k w^{αk+α-2} / Γ(αk+α)
        let interior = PowerSeries::build(0, alpha, alpha - 2.0, ct, |k| {
            lead + k as f64 * ln_r - ln_gamma_signed(alpha * k as f64 + alpha).0
        })?;
        let ln_q = lambda.ln() - alpha * (2.0 * c).ln();
        let projection = PowerSeries::build(0, alpha, -1.0, ct, |k| {
            k as f64 * ln_q - 2.0 * ln_gamma_signed(0.5 * (alpha * k as f64 + 1.0)).0
        })?;
        Ok(Self { alpha, lambda, c, t, counts, interior, projection })
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

    pub fn reach(&self) -> f64 {
        self.c * self.t
    }

    /// Total probability on the circle `r = ct`, `1/E_{α,1}(λt^α)`.
    pub fn boundary_mass(&self) -> f64 {
        self.counts.pmf(0)
    }

    /// Conditional density after `n >= 1` direction changes.
    pub fn conditional_density_2d(&self, n: u64, x: f64, y: f64) -> Result<f64> {
        if n == 0 {
            return Err(domain("the conditional law needs at least one direction change"));
        }
        let ct = self.reach();
        let w = open_disc_w(ct, x, y)?;
        let an = self.alpha * n as f64;
        Ok(an / (TAU * ct.powf(an)) * w.powf(an - 2.0))
    }

    /// Absolutely continuous density as a function of `w = √(c²t² - r²)`.
    pub fn ac_density_w(&self, w: f64) -> f64 {
        self.interior.eval(w) * self.counts.pmf(0)
    }

    /// `(ac density, total boundary mass)` at a point of the closed disc.
    pub fn density_2d(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let ct = self.reach();
        let r = x.hypot(y);
        if !(r <= ct) {
            return Err(domain(format!("r = {r} is outside the disc of radius {ct}")));
        }
        let r = r.min(ct * (1.0 - crate::telegraph::EDGE_CLAMP));
        let w = ((ct - r) * (ct + r)).sqrt();
        Ok((self.ac_density_w(w), self.boundary_mass()))
    }

    /// `∫ ac density` over the disc, as `2π ∫_0^{ct} f(w) w dw`.
    pub fn interior_mass(&self) -> Result<f64> {
        let q = tanh_sinh(|w, _, _| TAU * self.ac_density_w(w) * w, 0.0, self.reach(), 1e-14)?;
        Ok(q.value)
    }

    /// CDF of the distance from the origin.
    pub fn radial_cdf(&self, cells: usize) -> Result<RadialCdf> {
        let table = CumulativeTable::build(|w| TAU * self.ac_density_w(w) * w, self.reach(), cells)?;
        Ok(RadialCdf { ct: self.reach(), table })
    }

    /// Density of the projection on the x-axis (no atoms).
    pub fn projection_density(&self, x: f64) -> Result<f64> {
        let ct = self.reach();
        if !(x.abs() < ct) {
            return Err(domain(format!("|x| = {} is not inside (-ct, ct)", x.abs())));
        }
        let w = ((ct - x) * (ct + x)).sqrt();
        Ok(self.projection_density_w(w))
    }

    fn projection_density_w(&self, w: f64) -> f64 {
        self.projection.eval(w) * self.counts.pmf(0)
    }

    /// `∫ projection density` over `(-ct, ct)`, with `x = ct cos φ`.
    pub fn projection_mass(&self) -> Result<f64> {
        let ct = self.reach();
        let q = tanh_sinh(
            |phi, _, _| {
                let w = ct * phi.sin();
                self.projection_density_w(w) * w
            },
            0.0,
            std::f64::consts::FRAC_PI_2,
            1e-14,
        )?;
        Ok(2.0 * q.value)
    }

    /// Exact position draw.
    pub fn sample_2d<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let n = self.counts.sample(rng);
        self.sample_given(n, rng)
    }

    pub fn sample_given<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> (f64, f64) {
        let ct = self.reach();
        let theta = uniform_angle(rng);
        let rho = if n == 0 {
            ct
        } else {
            let v: f64 = rng.random();
            // 1 - ρ²/(ct)² ~ Beta(nα/2, 1)
            ct * (-(v.ln() * 2.0 / (n as f64 * self.alpha)).exp_m1()).sqrt()
        };
        (rho * theta.cos(), rho * theta.sin())
    }
}

/// CDF of the radius `R = √(X² + Y²)`, including the atom at `R = ct`.
#[derive(Debug, Clone)]
pub struct RadialCdf {
    ct: f64,
    table: CumulativeTable,
}

impl RadialCdf {
    pub(crate) fn from_table(ct: f64, table: CumulativeTable) -> Self {
        Self { ct, table }
    }

    /// Tabulated interior mass.
    pub fn interior_mass(&self) -> f64 {
        self.table.total()
    }

    /// `(F(r-), F(r))`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let ct = self.ct;
        if r < 0.0 {
            return (0.0, 0.0);
        }
        if r >= ct {
            return if r == ct { (self.interior_mass(), 1.0) } else { (1.0, 1.0) };
        }
        let w = ((ct - r) * (ct + r)).sqrt();
        let f = self.interior_mass() - self.table.eval(w);
        (f, f)
    }
}

/// Law of the number of direction-change events before thinning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mixing {
    /// Weights `(λt)^n / (Γ(αn+1) E_{α,1}(λt))`.
    Fractional,
    /// Poisson with mean `λt`.
    Homogeneous,
}

/// Planar motion in which each of `n` direction changes is kept
/// independently with probability `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThinnedMotionSpec {
    pub n: u64,
    pub alpha: f64,
    pub c: f64,
    pub t: f64,
    pub mixing: Mixing,
}

impl ThinnedMotionSpec {
    pub fn new(n: u64, alpha: f64, c: f64, t: f64, mixing: Mixing) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid(format!("thinning probability must lie in (0, 1], got {alpha}")));
        }
        check_motion(c, t)?;
        Ok(Self { n, alpha, c, t, mixing })
    }

    pub fn reach(&self) -> f64 {
        self.c * self.t
    }

    /// Mean over the binomial thinning of the classical conditional density
    /// with `n` changes: `nα/(2πw) (ct)^{-n} (ct + α(w - ct))^{n-1}`.
    pub fn conditional_mean_density(&self, x: f64, y: f64) -> Result<f64> {
        if self.n == 0 {
            return Err(domain("the conditional law needs n >= 1"));
        }
        let ct = self.reach();
        let w = open_disc_w(ct, x, y)?;
        let n = self.n as f64;
        Ok(n * self.alpha / (TAU * w) * ((ct + self.alpha * (w - ct)) / ct).powi(self.n as i32 - 1) / ct)
    }

    /// The counting law used to randomize `n`.
    pub fn mixing_law(&self, lambda: f64) -> Result<FracPoissonLaw> {
        match self.mixing {
            // weights (λt)^n / Γ(αn+1), i.e. rate λ t^{1-α} in the λt^α parametrization
            Mixing::Fractional => FracPoissonLaw::new(self.alpha, lambda * self.t.powf(1.0 - self.alpha), self.t),
            Mixing::Homogeneous => FracPoissonLaw::new(1.0, lambda, self.t),
        }
    }

    /// Absolutely continuous density after randomizing `n`, as a function
    /// of `w = √(c²t² - r²)`.
    pub fn unconditional_density_w(&self, lambda: f64, w: f64) -> Result<f64> {
        let ct = self.reach();
        let (a, c) = (self.alpha, self.c);
        Ok(match self.mixing {
            Mixing::Homogeneous => lambda * a / (TAU * c) * (-(lambda * a / c) * (ct - w)).exp() / w,
            Mixing::Fractional => {
                let num = mittag_leffler(a, a, (lambda / c) * (ct + a * (w - ct)))?;
                let den = mittag_leffler(a, 1.0, lambda * self.t)?;
                lambda / (TAU * c) * num / (w * den)
            }
        })
    }

    pub fn unconditional_density(&self, lambda: f64, x: f64, y: f64) -> Result<f64> {
        check_rate(lambda)?;
        let w = open_disc_w(self.reach(), x, y)?;
        self.unconditional_density_w(lambda, w)
    }

    /// Probability that every change is thinned away (particle on the circle).
    pub fn boundary_mass(&self, lambda: f64) -> Result<f64> {
        check_rate(lambda)?;
        let a = self.alpha;
        Ok(match self.mixing {
            Mixing::Homogeneous => (-lambda * a * self.t).exp(),
            Mixing::Fractional => {
                mittag_leffler(a, 1.0, lambda * self.t * (1.0 - a))? / mittag_leffler(a, 1.0, lambda * self.t)?
            }
        })
    }

    /// Radial CDF of the randomized thinned motion.
    pub fn radial_cdf(&self, lambda: f64, cells: usize) -> Result<RadialCdf> {
        check_rate(lambda)?;
        // validate once so the closure below cannot fail
        self.unconditional_density_w(lambda, 0.5 * self.reach())?;
        let table = CumulativeTable::build(
            |w| TAU * w * self.unconditional_density_w(lambda, w).unwrap_or(f64::NAN),
            self.reach(),
            cells,
        )?;
        Ok(RadialCdf { ct: self.reach(), table })
    }

    /// Simulates one path to time `t` and returns its end point.
    pub fn simulate_path<R: Rng + ?Sized>(&self, counts: &FracPoissonLaw, rng: &mut R) -> (f64, f64) {
        let n = counts.sample(rng);
        let k = if n == 0 { 0 } else { Binomial::new(n, self.alpha).expect("valid binomial").sample(rng) };
        let mut times: Vec<f64> = (0..k).map(|_| self.t * rng.random::<f64>()).collect();
        times.sort_by(f64::total_cmp);
        times.push(self.t);
        let (mut x, mut y, mut prev) = (0.0, 0.0, 0.0);
        for tj in times {
            let th = uniform_angle(rng);
            let len = self.c * (tj - prev);
            x += len * th.cos();
            y += len * th.sin();
            prev = tj;
        }
        (x, y)
    }
}

fn check_rate(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("λ must be positive, got {lambda}")));
    }
    Ok(())
}

/// Classical planar density after `n` changes,
/// `n/(2π(ct)^n) (c²t² - r²)^{n/2 - 1}`.
pub fn classical_conditional_2d(n: u64, c: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    let ct = c * t;
    let w = open_disc_w(ct, x, y)?;
    let nf = n as f64;
    Ok(nf / (TAU * ct.powf(nf)) * w.powf(nf - 2.0))
}

/// Classical unconditional density `λ/(2πc) e^{-λt + (λ/c)w} / w`.
pub fn classical_density_2d(lambda: f64, c: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    let w = open_disc_w(c * t, x, y)?;
    Ok(lambda / (TAU * c) * (-lambda * t + lambda * w / c).exp() / w)
}

/// Arcsine density `1/(π√(c²t² - x²))` of the projected circle.
pub fn arcsine_density(ct: f64, x: f64) -> f64 {
    1.0 / (PI * ((ct - x) * (ct + x)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::tanh_sinh;
    use crate::sampling::stream_rng;
    use crate::specfun::gamma;

    #[test]
    fn classical_reductions() {
        let law = PlanarLaw::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let (x, y) = (0.3, 0.4);
        let (ac, b) = law.density_2d(x, y).unwrap();
        assert!((ac - classical_density_2d(1.0, 1.0, 1.0, x, y).unwrap()).abs() < 1e-13);
        assert!((b - (-1f64).exp()).abs() < 1e-15);
        let v = law.conditional_density_2d(3, 0.2, 0.1).unwrap();
        assert!((v - classical_conditional_2d(3, 1.0, 1.0, 0.2, 0.1).unwrap()).abs() < 1e-14);
        let v = law.conditional_density_2d(2, 0.2, 0.1).unwrap();
        assert!((v - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn fractional_count_acts_like_fewer_changes() {
        let law = PlanarLaw::new(0.5, 1.0, 1.0, 1.0).unwrap();
        let v = law.conditional_density_2d(4, 0.3, -0.2).unwrap();
        assert!((v - classical_conditional_2d(2, 1.0, 1.0, 0.3, -0.2).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn conditional_normalized() {
        // polar coordinates with u = ρ²/(ct)²: density · π(ct)² du
        let law = PlanarLaw::new(0.7, 1.0, 1.0, 1.0).unwrap();
        let q = tanh_sinh(
            |u, _, du| {
                let rho = u.sqrt();
                let _ = du;
                law.conditional_density_2d(3, rho, 0.0).unwrap_or(0.0) * PI
            },
            0.0,
            1.0,
            1e-12,
        )
        .unwrap();
        assert!((q.value - 1.0).abs() < 1e-9, "{}", q.value);
    }

    #[test]
    fn masses() {
        for &(a, l, t) in &[(0.5, 1.0, 1.0), (0.3, 2.0, 0.5), (0.9, 0.5, 3.0)] {
            let law = PlanarLaw::new(a, l, 1.0, t).unwrap();
            let inner = law.interior_mass().unwrap();
            assert!((inner - (1.0 - law.boundary_mass())).abs() < 1e-8, "{a} {l} {t}");
            assert!((law.projection_mass().unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn mixture_matches_closed_form() {
        let law = PlanarLaw::new(0.6, 1.0, 1.0, 1.0).unwrap();
        for &(x, y) in &[(0.0, 0.1), (0.5, 0.5), (-0.3, 0.2), (0.9, 0.0), (0.1, -0.7)] {
            let mix: f64 = (1..300).map(|n| law.conditional_density_2d(n, x, y).unwrap() * law.counts().pmf(n)).sum();
            let (ac, _) = law.density_2d(x, y).unwrap();
            assert!((mix - ac).abs() < 1e-9 * ac.max(1.0));
        }
    }

    #[test]
    fn isotropy() {
        let law = PlanarLaw::new(0.45, 1.5, 2.0, 1.0).unwrap();
        let r: f64 = 1.3;
        let base = law.density_2d(r, 0.0).unwrap().0;
        for k in 1..4 {
            let th = k as f64 * 0.7;
            let v = law.density_2d(r * th.cos(), r * th.sin()).unwrap().0;
            assert!((v - base).abs() < 1e-12 * base);
        }
    }

    #[test]
    fn projection_leading_term_is_arcsine() {
        let law = PlanarLaw::new(0.7, 1e-9, 1.0, 1.0).unwrap();
        let x = 0.4;
        let v = law.projection_density(x).unwrap();
        assert!((v - arcsine_density(1.0, x)).abs() < 1e-8);
        assert!((1.0 / gamma(0.5).unwrap().powi(2) - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn projection_is_marginal() {
        let law = PlanarLaw::new(0.7, 1.0, 1.0, 1.0).unwrap();
        let x: f64 = 0.3;
        let h = (1.0 - x * x).sqrt();
        // y = h cos φ keeps √(c²t² - x² - y²) = h sin φ exact near the rim
        let q = tanh_sinh(
            |phi, _, _| {
                let w = h * phi.sin();
                law.ac_density_w(w) * w
            },
            0.0,
            std::f64::consts::FRAC_PI_2,
            1e-13,
        )
        .unwrap();
        let marginal = 2.0 * q.value + law.boundary_mass() * arcsine_density(1.0, x);
        assert!((marginal - law.projection_density(x).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn thinned_mean_density() {
        let spec = ThinnedMotionSpec::new(4, 1.0, 1.0, 1.0, Mixing::Homogeneous).unwrap();
        let v = spec.conditional_mean_density(0.3, 0.0).unwrap();
        assert!((v - classical_conditional_2d(4, 1.0, 1.0, 0.3, 0.0).unwrap()).abs() < 1e-14);
        let spec = ThinnedMotionSpec::new(5, 0.4, 1.0, 1.0, Mixing::Homogeneous).unwrap();
        let (x, y) = (0.2, 0.5);
        let direct: f64 = (1..=5)
            .map(|k| {
                let binom = gamma(6.0).unwrap() / (gamma(k as f64 + 1.0).unwrap() * gamma(6.0 - k as f64).unwrap());
                classical_conditional_2d(k, 1.0, 1.0, x, y).unwrap() * binom * 0.4f64.powi(k as i32) * 0.6f64.powi(5 - k as i32)
            })
            .sum();
        assert!((spec.conditional_mean_density(x, y).unwrap() - direct).abs() < 1e-12);
        let spec = ThinnedMotionSpec::new(3, 0.5, 1.0, 1.0, Mixing::Homogeneous).unwrap();
        let v = spec.conditional_mean_density(0.2, 0.2).unwrap();
        assert!(v >= 0.125 * classical_conditional_2d(3, 1.0, 1.0, 0.2, 0.2).unwrap());
    }

    #[test]
    fn thinned_unconditional_forms() {
        let (x, y) = (0.3, 0.1);
        let spec = ThinnedMotionSpec::new(0, 1.0, 1.0, 1.0, Mixing::Homogeneous).unwrap();
        let pt = classical_density_2d(1.0, 1.0, 1.0, x, y).unwrap();
        assert!((spec.unconditional_density(1.0, x, y).unwrap() - pt).abs() < 1e-14);
        let spec = ThinnedMotionSpec::new(0, 1.0, 1.0, 1.0, Mixing::Fractional).unwrap();
        assert!((spec.unconditional_density(1.0, x, y).unwrap() - pt).abs() < 1e-13);

        for mixing in [Mixing::Homogeneous, Mixing::Fractional] {
            let spec = ThinnedMotionSpec::new(0, 0.5, 1.0, 1.3, mixing).unwrap();
            let counts = spec.mixing_law(1.0).unwrap();
            let mix: f64 = (1..300)
                .map(|n| {
                    let s = ThinnedMotionSpec { n, ..spec };
                    s.conditional_mean_density(x, y).unwrap() * counts.pmf(n)
                })
                .sum();
            assert!((mix - spec.unconditional_density(1.0, x, y).unwrap()).abs() < 1e-9, "{mixing:?}");
            let cdf = spec.radial_cdf(1.0, 200).unwrap();
            assert!((cdf.interior_mass() + spec.boundary_mass(1.0).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn samples_on_circle_without_changes() {
        let law = PlanarLaw::new(0.8, 1.0, 1.0, 2.0).unwrap();
        let mut rng = stream_rng(1, 0);
        for _ in 0..100 {
            let (x, y) = law.sample_given(0, &mut rng);
            assert!((x.hypot(y) - 2.0).abs() < 1e-14);
        }
        let spec = ThinnedMotionSpec::new(0, 0.5, 1.0, 1.0, Mixing::Homogeneous).unwrap();
        let none = FracPoissonLaw::new(1.0, 1e-300, 1.0).unwrap();
        let (x, y) = spec.simulate_path(&none, &mut rng);
        assert!((x.hypot(y) - 1.0).abs() < 1e-14);
    }
}
