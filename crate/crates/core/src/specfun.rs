//! Real-line Gamma function and the Mittag-Leffler family.
//!
//! Every series in this crate is summed by [`sum_series`]: terms are produced
//! in log-magnitude/sign form where needed, accumulated with Neumaier
//! compensation, and truncated once three consecutive terms fall below
//! `1e-16 * (1 + |partial sum|)`. A hard cap of [`MAX_TERMS`] terms applies.
//!
//! Gamma values at non-positive integers are poles; the reciprocal
//! convention `1/Γ(-n) = 0` is used throughout so that poled series terms
//! vanish exactly.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Hard cap on the number of terms any series evaluator will sum.
pub const MAX_TERMS: usize = 10_000;

/// Truncation threshold relative to `1 + |partial sum|`.
pub const TRUNCATION_EPS: f64 = 1e-16;

/// A series is reported as ill-conditioned once `Σ|term| / |Σ term|` exceeds this.
pub const PRECISION_LOSS_CONDITION: f64 = 1e8;

/// Arguments within this relative distance of a non-positive integer are
/// treated as sitting exactly on a Gamma pole. Gamma arguments are usually
/// assembled from several floating-point operations (`1 - α + β/2`, ...),
/// so an exact comparison would miss poles that the algebra says are there.
pub const POLE_SNAP: f64 = 1e-11;

// Lanczos approximation, g = 7, 9 coefficients.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Selects whether [`gamma_real`] returns `Γ(x)` or `1/Γ(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaMode {
    Direct,
    Reciprocal,
}

/// `true` when `x` is (within [`POLE_SNAP`]) a non-positive integer.
pub fn is_gamma_pole(x: f64) -> bool {
    let r = x.round();
    r <= 0.0 && (x - r).abs() <= POLE_SNAP * x.abs().max(1.0)
}

/// `sin(πx)` with argument reduction done before the multiplication by π.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

fn lanczos_sum(x: f64) -> f64 {
    let mut a = LANCZOS[0];
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        a += p / (x + i as f64);
    }
    a
}

fn gamma_upper(x: f64) -> f64 {
    // x >= 0.5
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    let half = t.powf(0.5 * (xm + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * lanczos_sum(xm)
}

fn ln_gamma_upper(x: f64) -> f64 {
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (xm + 0.5) * t.ln() - t + lanczos_sum(xm).ln()
}

/// `Γ(x)` on the real line, or `1/Γ(x)` in reciprocal mode.
///
/// Direct mode fails with [`Error::Pole`] at non-positive integers; reciprocal
/// mode returns exactly `0.0` there.
pub fn gamma_real(x: f64, mode: GammaMode) -> Result<f64> {
    if x.is_nan() {
        return Err(invalid("gamma of NaN"));
    }
    match mode {
        GammaMode::Direct => gamma(x),
        GammaMode::Reciprocal => Ok(rgamma(x)),
    }
}

/// `Γ(x)`; errors at poles.
pub fn gamma(x: f64) -> Result<f64> {
    if is_gamma_pole(x) {
        return Err(Error::Pole(x));
    }
    if x >= 0.5 {
        Ok(gamma_upper(x))
    } else {
        Ok(PI / (sin_pi(x) * gamma_upper(1.0 - x)))
    }
}

/// `1/Γ(x)`, exactly zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if is_gamma_pole(x) {
        return 0.0;
    }
    if x >= 0.5 {
        if x > 170.0 {
            let (l, _) = ln_gamma_signed(x);
            (-l).exp()
        } else {
            1.0 / gamma_upper(x)
        }
    } else {
        sin_pi(x) * gamma_upper(1.0 - x) / PI
    }
}

/// `(ln|Γ(x)|, sign Γ(x))`. At a pole this is `(+∞, 0.0)`.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if is_gamma_pole(x) {
        return (f64::INFINITY, 0.0);
    }
    if x >= 0.5 {
        (ln_gamma_upper(x), 1.0)
    } else {
        let s = sin_pi(x);
        (PI.ln() - s.abs().ln() - ln_gamma_upper(1.0 - x), s.signum())
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Result of a truncated series summation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub terms: usize,
    /// `Σ |term|`, used for the cancellation diagnostic.
    pub abs_sum: f64,
}

impl SeriesValue {
    /// Cancellation condition number `Σ|term| / |Σ term|`.
    pub fn condition(&self) -> f64 {
        if self.abs_sum == 0.0 {
            1.0
        } else {
            self.abs_sum / self.value.abs()
        }
    }

    pub fn precision_loss(&self) -> bool {
        self.condition() > PRECISION_LOSS_CONDITION
    }
}

/// One series term; `armed` is false while the term index is still inside
/// a region where the stopping rule must not fire (poled leading terms).
#[derive(Debug, Clone, Copy)]
pub struct SeriesTerm {
    pub value: f64,
    pub armed: bool,
}

/// Builds a term from its log-magnitude and sign.
pub fn term_from_log(ln_abs: f64, sign: f64) -> f64 {
    if sign == 0.0 || ln_abs == f64::NEG_INFINITY {
        0.0
    } else {
        sign * ln_abs.exp()
    }
}

/// Sums `term(0) + term(1) + ...` under the crate-wide truncation policy.
pub fn sum_series<F>(what: &'static str, mut term: F) -> Result<SeriesValue>
where
    F: FnMut(usize) -> SeriesTerm,
{
    let mut acc = CompensatedSum::new();
    let mut abs_sum = 0.0;
    let mut small_run = 0usize;
    for k in 0..MAX_TERMS {
        let t = term(k);
        if !t.value.is_finite() {
            return Err(Error::Overflow(what));
        }
        acc.add(t.value);
        abs_sum += t.value.abs();
        if t.armed && t.value.abs() <= TRUNCATION_EPS * (1.0 + acc.value().abs()) {
            small_run += 1;
            if small_run == 3 {
                let value = acc.value();
                if !value.is_finite() {
                    return Err(Error::Overflow(what));
                }
                return Ok(SeriesValue { value, terms: k + 1, abs_sum });
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NonConvergence { what, terms: MAX_TERMS })
}

/// `z^k` split into `(k ln|z|, sign)`; `z^0 = 1` including `z = 0`.
fn power_log(z: f64, k: f64) -> (f64, f64) {
    if k == 0.0 {
        return (0.0, 1.0);
    }
    if z == 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    let sign = if z < 0.0 && (k as i64) % 2 != 0 { -1.0 } else { 1.0 };
    (k * z.abs().ln(), sign)
}

/// Two-parameter Mittag-Leffler function `E_{α,β}(z) = Σ z^k / Γ(αk + β)`.
pub fn mittag_leffler(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    Ok(mittag_leffler_series(alpha, beta, z)?.value)
}

/// As [`mittag_leffler`] but also returns the summation diagnostics.
pub fn mittag_leffler_series(alpha: f64, beta: f64, z: f64) -> Result<SeriesValue> {
    if !(alpha > 0.0) || !beta.is_finite() || !z.is_finite() {
        return Err(invalid(format!("mittag_leffler(α={alpha}, β={beta}, z={z})")));
    }
    sum_series("mittag-leffler", |k| {
        let kf = k as f64;
        let arg = alpha * kf + beta;
        let (lz, sz) = power_log(z, kf);
        let (lg, sg) = ln_gamma_signed(arg);
        SeriesTerm {
            value: term_from_log(lz - lg, sz * sg),
            armed: arg > 0.0,
        }
    })
}

/// Parameters of the generalized β-Mittag-Leffler function
/// `E_{β;ν,γ}(z) = Σ z^k / Γ(νk + γ)^β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLParams {
    pub beta_power: f64,
    pub nu: f64,
    pub gamma_shift: f64,
}

impl MLParams {
    pub fn new(beta_power: f64, nu: f64, gamma_shift: f64) -> Result<Self> {
        if !(beta_power > 0.0) || !(nu > 0.0) || !gamma_shift.is_finite() {
            return Err(invalid(format!(
                "MLParams requires β > 0, ν > 0 (got β={beta_power}, ν={nu}, γ={gamma_shift})"
            )));
        }
        Ok(Self { beta_power, nu, gamma_shift })
    }
}

/// Generalized β-Mittag-Leffler function.
///
/// A negative `Γ(νk+γ)` raised to a non-integer power has no real value;
/// that case is reported as a domain error.
pub fn gen_beta_ml(p: &MLParams, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(invalid("gen_beta_ml argument must be finite"));
    }
    let integer_power = p.beta_power.fract() == 0.0;
    let mut bad_sign = None;
    let v = sum_series("generalized beta mittag-leffler", |k| {
        let kf = k as f64;
        let arg = p.nu * kf + p.gamma_shift;
        let (lz, sz) = power_log(z, kf);
        let (lg, sg) = ln_gamma_signed(arg);
        let sign = if sg < 0.0 {
            if integer_power {
                if (p.beta_power as i64) % 2 == 0 { 1.0 } else { -1.0 }
            } else {
                bad_sign.get_or_insert(arg);
                f64::NAN
            }
        } else {
            sg
        };
        let value = if sg == 0.0 { 0.0 } else { term_from_log(lz - p.beta_power * lg, sz * sign) };
        SeriesTerm { value: if value.is_nan() { 0.0 } else { value }, armed: arg > 0.0 }
    })?;
    if let Some(arg) = bad_sign {
        return Err(Error::Domain(format!(
            "Γ({arg}) < 0 raised to non-integer power {}",
            p.beta_power
        )));
    }
    Ok(v.value)
}

/// Parameters of the multi-index Mittag-Leffler function
/// `E^{(m)}_{(ρ),(μ)}(z) = Σ z^k / Π_j Γ(kρ_j + μ_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiIndexML {
    rhos: Vec<f64>,
    mus: Vec<f64>,
}

impl MultiIndexML {
    pub fn new(rhos: Vec<f64>, mus: Vec<f64>) -> Result<Self> {
        if rhos.is_empty() || rhos.len() != mus.len() {
            return Err(invalid("multi-index ML needs equal, non-empty ρ and μ sequences"));
        }
        if rhos.iter().any(|&r| !(r > 0.0)) || mus.iter().any(|m| !m.is_finite()) {
            return Err(invalid("multi-index ML needs every ρ_j > 0 and finite μ_j"));
        }
        Ok(Self { rhos, mus })
    }

    pub fn rhos(&self) -> &[f64] {
        &self.rhos
    }

    pub fn mus(&self) -> &[f64] {
        &self.mus
    }
}

pub fn multi_index_ml(p: &MultiIndexML, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(invalid("multi_index_ml argument must be finite"));
    }
    let v = sum_series("multi-index mittag-leffler", |k| {
        let kf = k as f64;
        let (lz, sz) = power_log(z, kf);
        let mut lg = 0.0;
        let mut sg = 1.0;
        let mut armed = true;
        for (&rho, &mu) in p.rhos.iter().zip(&p.mus) {
            let arg = kf * rho + mu;
            armed &= arg > 0.0;
            let (l, s) = ln_gamma_signed(arg);
            lg += l;
            sg *= s;
        }
        SeriesTerm { value: term_from_log(lz - lg, sz * sg), armed }
    })?;
    Ok(v.value)
}

/// Hyper-Bessel function `I_{0,n}(x) = Σ (x/n)^{nk} / (k!)^n`.
pub fn hyper_bessel(n: u32, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("hyper_bessel order must be >= 1"));
    }
    if !x.is_finite() {
        return Err(invalid("hyper_bessel argument must be finite"));
    }
    let nf = n as f64;
    let y = x / nf;
    let v = sum_series("hyper-bessel", |k| {
        let kf = k as f64;
        let (ly, sy) = power_log(y, nf * kf);
        let lf = nf * ln_gamma_signed(kf + 1.0).0;
        SeriesTerm { value: term_from_log(ly - lf, sy), armed: true }
    })?;
    Ok(v.value)
}

/// Modified Bessel `I_0(x)`.
pub fn bessel_i0(x: f64) -> Result<f64> {
    hyper_bessel(2, x)
}

/// Modified Bessel `I_1(x) = Σ (x/2)^{2k+1} / (k!(k+1)!)`.
pub fn bessel_i1(x: f64) -> Result<f64> {
    let y = 0.5 * x;
    let v = sum_series("bessel I1", |k| {
        let kf = k as f64;
        let (ly, sy) = power_log(y, 2.0 * kf + 1.0);
        let lg = ln_gamma_signed(kf + 1.0).0 + ln_gamma_signed(kf + 2.0).0;
        SeriesTerm { value: term_from_log(ly - lg, sy), armed: true }
    })?;
    Ok(v.value)
}

/// Bessel `J_0(x) = Σ (-1)^k (x/2)^{2k} / (k!)^2`, with diagnostics.
pub fn bessel_j0_series(x: f64) -> Result<SeriesValue> {
    let y = 0.5 * x;
    sum_series("bessel J0", |k| {
        let kf = k as f64;
        let (ly, _) = power_log(y, 2.0 * kf);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let lg = 2.0 * ln_gamma_signed(kf + 1.0).0;
        SeriesTerm { value: term_from_log(ly - lg, if y == 0.0 && k > 0 { 0.0 } else { sign }), armed: true }
    })
}

pub fn bessel_j0(x: f64) -> Result<f64> {
    Ok(bessel_j0_series(x)?.value)
}

/// Positive power series `Σ_{k>=k0} exp(ln_coef(k)) · w^{slope·k + offset}`
/// with coefficients tabulated once for all `0 < w <= w_max`.
///
/// Tabulation stops once three consecutive terms past the peak fall below
/// `1e-18` of the largest term at `w_max`; smaller `w` only shrinks the tail
/// when `slope > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    first: usize,
    ln_coef: Vec<f64>,
    slope: f64,
    offset: f64,
}

impl PowerSeries {
    pub fn build<F: Fn(usize) -> f64>(first: usize, slope: f64, offset: f64, w_max: f64, ln_coef: F) -> Result<Self> {
        if !(slope > 0.0) || !(w_max > 0.0) {
            return Err(invalid("power series needs slope > 0 and w_max > 0"));
        }
        let lw = w_max.ln();
        let mut coefs = Vec::new();
        let mut peak = f64::NEG_INFINITY;
        let mut prev = f64::NEG_INFINITY;
        let mut small_run = 0;
        for k in first..first + MAX_TERMS {
            let c = ln_coef(k);
            if c.is_nan() {
                return Err(Error::Overflow("power series coefficient"));
            }
            coefs.push(c);
            let l = c + (slope * k as f64 + offset) * lw;
            peak = peak.max(l);
            if l < prev && l < peak - 41.5 {
                small_run += 1;
                if small_run == 3 {
                    return Ok(Self { first, ln_coef: coefs, slope, offset });
                }
            } else {
                small_run = 0;
            }
            prev = l;
        }
        Err(Error::NonConvergence { what: "power series tabulation", terms: MAX_TERMS })
    }

    /// `(coefficient, exponent)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ln_coef
            .iter()
            .enumerate()
            .map(|(i, &c)| (c.exp(), self.slope * (self.first + i) as f64 + self.offset))
    }

    pub fn len(&self) -> usize {
        self.ln_coef.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_coef.is_empty()
    }

    pub fn eval(&self, w: f64) -> f64 {
        if w <= 0.0 {
            let (c, e) = self.terms().next().unwrap_or((0.0, 1.0));
            return match e.partial_cmp(&0.0) {
                Some(std::cmp::Ordering::Greater) => 0.0,
                Some(std::cmp::Ordering::Equal) => c,
                _ => f64::INFINITY,
            };
        }
        let lw = w.ln();
        let mut acc = CompensatedSum::new();
        for (i, &c) in self.ln_coef.iter().enumerate() {
            acc.add((c + (self.slope * (self.first + i) as f64 + self.offset) * lw).exp());
        }
        acc.value()
    }
}
