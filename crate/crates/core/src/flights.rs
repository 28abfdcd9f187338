//! N-dimensional fractional Klein-Gordon solutions and random flights.
//!
//! After `k` events the position in `R^N` has density
//! `Γ((kα+N)/2) w^{αk-2} / ((ct)^{αk+N-2} Γ(αk/2) π^{N/2})` with
//! `w = √(c²t² - ‖x‖²)`, so `‖x‖²/(ct)² ~ Beta(N/2, αk/2)`.
//! In four dimensions with `α ∈ (1, 2]` the event count follows the
//! fractional Poisson law of index `α/2`.

use rand::Rng;

use crate::error::{domain, invalid, Result};
use crate::fracpoisson::FracPoissonLaw;
use crate::mcbride::{SeriesSolution, Term, VariableMap};
use crate::quad::tanh_sinh;
use crate::sampling::{beta_variate, unit_vector};
use crate::specfun::{ln_gamma_signed, mittag_leffler, PowerSeries};
use crate::stats::CumulativeTable;

use std::f64::consts::PI;

fn ndim_coefficient(dim: u32, alpha: f64, ln_q2: f64, k: usize) -> f64 {
    let kf = k as f64;
    let half = 0.5 * (dim as f64 - 1.0);
    let (l1, s1) = ln_gamma_signed(alpha * kf + alpha + half);
    let (l2, s2) = ln_gamma_signed(alpha * kf + alpha);
    s1 * s2 * (kf * ln_q2 - l1 - l2).exp()
}

/// `Σ_k (λ/(2^α c^α))^{2k} w^{2αk+2α-2} / (Γ(αk+α+(N-1)/2) Γ(αk+α))`.
pub fn ndim_solution(dim: u32, alpha: f64, lambda: f64, c: f64, w: f64) -> Result<f64> {
    check_pde(dim, alpha, lambda, c)?;
    if !(w >= 0.0) || !w.is_finite() {
        return Err(domain(format!("w must be non-negative, got {w}")));
    }
    let ln_q2 = 2.0 * (lambda.ln() - alpha * (2.0 * c).ln());
    let half = 0.5 * (dim as f64 - 1.0);
    let s = crate::specfun::sum_series("ndim solution", |k| {
        let kf = k as f64;
        let e = 2.0 * alpha * kf + 2.0 * alpha - 2.0;
        let lw = if e == 0.0 { 0.0 } else { e * w.ln() };
        let (l1, s1) = ln_gamma_signed(alpha * kf + alpha + half);
        let (l2, s2) = ln_gamma_signed(alpha * kf + alpha);
        crate::specfun::SeriesTerm {
            value: crate::specfun::term_from_log(kf * ln_q2 + lw - l1 - l2, s1 * s2),
            armed: true,
        }
    })?;
    Ok(s.value)
}

/// The first `terms` terms of [`ndim_solution`] as a formal series in `w`.
pub fn ndim_series(dim: u32, alpha: f64, lambda: f64, c: f64, terms: usize) -> Result<SeriesSolution> {
    check_pde(dim, alpha, lambda, c)?;
    let ln_q2 = 2.0 * (lambda.ln() - alpha * (2.0 * c).ln());
    let ts = (0..terms)
        .map(|k| Term::new(ndim_coefficient(dim, alpha, ln_q2, k), 2.0 * alpha * k as f64 + 2.0 * alpha - 2.0))
        .collect();
    SeriesSolution::new(ts, VariableMap::BallND { c, dim })
}

fn check_pde(dim: u32, alpha: f64, lambda: f64, c: f64) -> Result<()> {
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("α must lie in (0, 1], got {alpha}")));
    }
    if !(lambda > 0.0) || !(c > 0.0) {
        return Err(invalid("λ and c must be positive"));
    }
    Ok(())
}

/// Which regime a [`FlightLaw`] was built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlightKind {
    /// Conditional laws in `R^N` with `α ∈ (0, 1]`.
    Conditional,
    /// The four-dimensional flight with `α ∈ (1, 2]`.
    FourD,
}

#[derive(Debug, Clone)]
pub struct FlightLaw {
    dim: u32,
    alpha: f64,
    lambda: f64,
    c: f64,
    t: f64,
    kind: FlightKind,
    counts: Option<FracPoissonLaw>,
    series: Option<PowerSeries>,
}

impl FlightLaw {
    /// Law in `R^dim` for `α ∈ (0, 1]`; only the conditional densities are
    /// available.
    pub fn ndim(dim: u32, alpha: f64, lambda: f64, c: f64, t: f64) -> Result<Self> {
        check_pde(dim, alpha, lambda, c)?;
        check_time(t)?;
        Ok(Self { dim, alpha, lambda, c, t, kind: FlightKind::Conditional, counts: None, series: None })
    }

    /// Four-dimensional flight, `α ∈ (1, 2]`.
    pub fn four_d(alpha: f64, lambda: f64, c: f64, t: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(invalid(format!("the 4D flight needs α in (1, 2], got {alpha}")));
        }
        if !(lambda > 0.0) || !(c > 0.0) {
            return Err(invalid("λ and c must be positive"));
        }
        check_time(t)?;
        let counts = FracPoissonLaw::new(0.5 * alpha, lambda, t)?;
        let ct = c * t;
        // Σ_{k≥1} ζ₀^k (kα/2 + 1)/Γ(kα/2) w^{kα-2} / (π² (ct)²), ζ₀ = λ/(c^α t^{α/2})
        let ln_z0 = lambda.ln() - alpha * c.ln() - 0.5 * alpha * t.ln();
        let lead = -(PI * PI * ct * ct).ln();
        let series = PowerSeries::build(1, alpha, -2.0, ct, |k| {
            let s = 0.5 * alpha * k as f64;
            lead + k as f64 * ln_z0 + (s + 1.0).ln() - ln_gamma_signed(s).0
        })?;
        Ok(Self {
            dim: 4,
            alpha,
            lambda,
            c,
            t,
            kind: FlightKind::FourD,
            counts: Some(counts),
            series: Some(series),
        })
    }

    pub fn dim(&self) -> u32 {
        self.dim
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

    pub fn kind(&self) -> FlightKind {
        self.kind
    }

    pub fn reach(&self) -> f64 {
        self.c * self.t
    }

    /// Counting law of the 4D flight.
    pub fn counts(&self) -> Result<&FracPoissonLaw> {
        self.counts.as_ref().ok_or_else(|| invalid("only the 4D flight has an event-count law"))
    }

    fn four_d_parts(&self) -> Result<(&FracPoissonLaw, &PowerSeries)> {
        match (&self.counts, &self.series) {
            (Some(n), Some(s)) => Ok((n, s)),
            _ => Err(invalid("operation needs the 4D flight (FlightLaw::four_d)")),
        }
    }

    fn open_ball_w(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim as usize {
            return Err(invalid(format!("expected a {}-vector, got length {}", self.dim, x.len())));
        }
        let ct = self.reach();
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(r < ct) {
            return Err(domain(format!("‖x‖ = {r} is not inside the open ball of radius {ct}")));
        }
        Ok(((ct - r) * (ct + r)).sqrt())
    }

    /// Density after `k >= 1` events.
    pub fn conditional_density(&self, k: u64, x: &[f64]) -> Result<f64> {
        if k == 0 {
            return Err(domain("the conditional law needs at least one event"));
        }
        let w = self.open_ball_w(x)?;
        Ok(self.conditional_density_w(k, w))
    }

    fn conditional_density_w(&self, k: u64, w: f64) -> f64 {
        let ak = self.alpha * k as f64;
        let n = self.dim as f64;
        let ct = self.reach();
        let ln = ln_gamma_signed(0.5 * (ak + n)).0 - ln_gamma_signed(0.5 * ak).0 - 0.5 * n * PI.ln()
            + (ak - 2.0) * w.ln()
            - (ak + n - 2.0) * ct.ln();
        ln.exp()
    }

    /// Mass of the conditional law over the ball, by radial quadrature.
    pub fn conditional_mass(&self, k: u64) -> Result<f64> {
        if k == 0 {
            return Err(domain("the conditional law needs at least one event"));
        }
        let n = self.dim as f64;
        let ct = self.reach();
        let sphere = 2.0 * PI.powf(0.5 * n) / ln_gamma_signed(0.5 * n).0.exp();
        // ρ = ct cos φ, w = ct sin φ: ρ^{N-1} dρ → ρ^{N-1} w dφ
        let q = tanh_sinh(
            |phi, _, _| {
                let (w, rho) = (ct * phi.sin(), ct * phi.cos());
                rho.powf(n - 1.0) * w * self.conditional_density_w(k, w)
            },
            0.0,
            std::f64::consts::FRAC_PI_2,
            1e-14,
        )?;
        Ok(sphere * q.value)
    }

    /// Absolutely continuous density of the 4D flight by the Mittag-Leffler
    /// closed form
    /// `λ/(π²c^{2+α}t^{2+α/2}E w^{2-α}) [E_{α/2,α/2-1}(ζ) + 2E_{α/2,α/2}(ζ)]`.
    pub fn flight4d_density(&self, x: &[f64]) -> Result<f64> {
        let (counts, _) = self.four_d_parts()?;
        let w = self.open_ball_w(x)?;
        let (a, c, t) = (self.alpha, self.c, self.t);
        let zeta = self.lambda / (c.powf(a) * t.powf(0.5 * a)) * w.powf(a);
        let bracket = mittag_leffler(0.5 * a, 0.5 * a - 1.0, zeta)? + 2.0 * mittag_leffler(0.5 * a, 0.5 * a, zeta)?;
        Ok(self.lambda * counts.pmf(0) / (PI * PI * c.powf(2.0 + a) * t.powf(2.0 + 0.5 * a) * w.powf(2.0 - a)) * bracket)
    }

    /// Same density from the tabulated event mixture, as a function of `w`.
    pub fn ac_density_w(&self, w: f64) -> Result<f64> {
        let (counts, series) = self.four_d_parts()?;
        Ok(series.eval(w) * counts.pmf(0))
    }

    /// Probability on the sphere `‖x‖ = ct`.
    pub fn boundary_mass(&self) -> Result<f64> {
        Ok(self.four_d_parts()?.0.pmf(0))
    }

    /// `2π² ∫_0^{ct} (c²t² - w²) w p(w) dw`.
    pub fn interior_mass(&self) -> Result<f64> {
        let (counts, series) = self.four_d_parts()?;
        let ct = self.reach();
        let p0 = counts.pmf(0);
        let q = tanh_sinh(|w, _, dr| 2.0 * PI * PI * dr * (ct + w) * w * series.eval(w) * p0, 0.0, ct, 1e-14)?;
        Ok(q.value)
    }

    /// Radial CDF of the 4D flight including the boundary atom.
    pub fn radial_cdf(&self, cells: usize) -> Result<crate::planar::RadialCdf> {
        let (counts, series) = self.four_d_parts()?;
        let ct = self.reach();
        let p0 = counts.pmf(0);
        let table = CumulativeTable::build(|w| 2.0 * PI * PI * (ct - w) * (ct + w) * w * series.eval(w) * p0, ct, cells)?;
        Ok(crate::planar::RadialCdf::from_table(ct, table))
    }

    /// Exact 4D draw.
    pub fn sample_4d<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<[f64; 4]> {
        let (counts, _) = self.four_d_parts()?;
        let k = counts.sample(rng);
        let v = self.sample_given(k, rng);
        Ok([v[0], v[1], v[2], v[3]])
    }

    /// Position after exactly `k` events; `k = 0` lands on the boundary.
    pub fn sample_given<R: Rng + ?Sized>(&self, k: u64, rng: &mut R) -> Vec<f64> {
        let ct = self.reach();
        let dir = unit_vector(rng, self.dim as usize);
        let rho = if k == 0 {
            ct
        } else {
            ct * beta_variate(rng, 0.5 * self.dim as f64, 0.5 * self.alpha * k as f64).sqrt()
        };
        dir.into_iter().map(|d| rho * d).collect()
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    Ok(())
}

/// Classical 4D flight density
/// `λ e^{-λt} / (π² c^4 t^3) (ζ + 2) e^ζ`, `ζ = λ(c²t² - ‖x‖²)/(c²t)`.
pub fn classical_flight4d_density(lambda: f64, c: f64, t: f64, r: f64) -> f64 {
    let w2 = (c * t - r) * (c * t + r);
    let zeta = lambda * w2 / (c * c * t);
    lambda * (-lambda * t).exp() / (PI * PI * c.powi(4) * t.powi(3)) * (zeta + 2.0) * zeta.exp()
}
