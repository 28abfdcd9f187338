//! Hyper-Bessel operators `x^{a_1} D x^{a_2} D ... D x^{a_{n+1}}` and their
//! real powers in McBride's Erdélyi–Kober form
//!
//! ```text
//! L^α f = m^{nα} x^{-mα} Π_k I_m^{b_k,-α} f,
//! ```
//!
//! applied exactly to monomials and formal power series, together with a
//! quadrature evaluation of the Erdélyi–Kober integrals that serves as an
//! independent check of the closed forms.

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::quad;
use crate::specfun::{gamma, is_gamma_pole, ln_gamma_signed, CompensatedSum};

/// A hyper-Bessel operator described by its weight exponents `a_1..a_{n+1}`.
///
/// `m = |Σa - n|` and `b_k = (Σ_{i>k} a_i + k - n) / m` are derived once at
/// construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperBesselOp {
    n: usize,
    a: Vec<f64>,
    m: f64,
    b: Vec<f64>,
}

impl HyperBesselOp {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.len() < 2 {
            return Err(invalid("a hyper-Bessel operator needs at least two weight exponents"));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(invalid("weight exponents must be finite"));
        }
        let n = a.len() - 1;
        let total: f64 = a.iter().sum();
        let m = (total - n as f64).abs();
        if !(m > 0.0) {
            return Err(invalid(format!("degenerate operator: Σa = {total} equals n = {n}")));
        }
        let b = (1..=n)
            .map(|k| (a[k..].iter().sum::<f64>() + k as f64 - n as f64) / m)
            .collect();
        Ok(Self { n, a, m, b })
    }

    /// `d²/dw² + (1/w) d/dw`.
    pub fn bessel_1d() -> Self {
        Self::new(vec![-1.0, 1.0, 0.0]).expect("valid operator")
    }

    /// `d²/dw² + (2/w) d/dw`, the radial operator arising in the planar problem.
    pub fn bessel_2d() -> Self {
        Self::ndim(2)
    }

    /// `d²/dw² + (N/w) d/dw`.
    pub fn ndim(dim: u32) -> Self {
        let nf = dim as f64;
        Self::new(vec![-nf, nf, 0.0]).expect("valid operator")
    }

    /// `w^{-n} (w d/dw)^n`; for `n = 3` this is `w^{-2} d/dw (w d/dw)^2`.
    pub fn hyper(order: u32) -> Result<Self> {
        if order < 1 {
            return Err(invalid("hyper-Bessel order must be >= 1"));
        }
        let mut a = vec![1.0; order as usize + 1];
        a[0] = 1.0 - order as f64;
        a[order as usize] = 0.0;
        Self::new(a)
    }

    /// `w^{-2} d/dw + (3/w) d²/dw² + d³/dw³`.
    pub fn third_order() -> Self {
        Self::new(vec![-2.0, 1.0, 1.0, 0.0]).expect("valid operator")
    }

    /// Euler–Poisson–Darboux time operator `t^{-χ} d/dt t^χ d/dt`.
    pub fn epd(chi: f64) -> Result<Self> {
        Self::new(vec![-chi, chi, 0.0])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Applies the integer-order operator to `w^β` by the power rule,
    /// returning `(coefficient, exponent)`.
    pub fn apply_classical(&self, beta: f64) -> (f64, f64) {
        let mut coef = 1.0;
        let mut e = beta;
        for (i, &ai) in self.a.iter().enumerate().rev() {
            e += ai;
            if i > 0 {
                coef *= e;
                e -= 1.0;
            }
        }
        (coef, e)
    }
}

/// Result of applying `L^α` to a single monomial `w^β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonomialAction {
    /// Exactly `0.0` when a denominator Gamma sits at a pole.
    pub coefficient: f64,
    /// `-mα`.
    pub exponent_shift: f64,
    /// `β - mα`.
    pub exponent: f64,
}

fn check_ek_precondition(m: f64, eta: f64, beta: f64) -> Result<f64> {
    let arg = eta + beta / m + 1.0;
    if !(arg > 0.0) {
        return Err(Error::Precondition {
            exponent: beta,
            reason: format!("η + β/m + 1 = {arg} must be positive (m={m}, η={eta})"),
        });
    }
    Ok(arg)
}

/// Erdélyi–Kober coefficient: `I_m^{η,α} x^β = Γ(η+β/m+1)/Γ(α+η+1+β/m) · x^β`.
pub fn ek_monomial(m: f64, eta: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(invalid("m must be positive"));
    }
    let num = check_ek_precondition(m, eta, beta)?;
    let den = num + alpha;
    if is_gamma_pole(den) {
        return Ok(0.0);
    }
    let (ln, _) = ln_gamma_signed(num);
    let (ld, sd) = ln_gamma_signed(den);
    Ok(sd * (ln - ld).exp())
}

/// Kober operator `I_m^α f = x^{mα} I_m^{0,α} f` on `x^β`: returns the
/// coefficient and the new exponent `β + mα`.
pub fn kober_monomial(m: f64, alpha: f64, beta: f64) -> Result<(f64, f64)> {
    Ok((ek_monomial(m, 0.0, alpha, beta)?, beta + m * alpha))
}

/// `L^α w^β` for a hyper-Bessel operator.
pub fn op_monomial(op: &HyperBesselOp, alpha: f64, beta: f64) -> Result<MonomialAction> {
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(invalid("α and β must be finite"));
    }
    let m = op.m;
    let mut ln = op.n as f64 * alpha * m.ln();
    let mut sign = 1.0;
    let mut zero = false;
    for &bk in &op.b {
        let num = check_ek_precondition(m, bk, beta)?;
        let den = num - alpha;
        if is_gamma_pole(den) {
            zero = true;
            continue;
        }
        let (lnum, _) = ln_gamma_signed(num);
        let (lden, sden) = ln_gamma_signed(den);
        ln += lnum - lden;
        sign *= sden;
    }
    let coefficient = if zero { 0.0 } else { sign * ln.exp() };
    if !coefficient.is_finite() {
        return Err(Error::Overflow("monomial coefficient"));
    }
    Ok(MonomialAction { coefficient, exponent_shift: -m * alpha, exponent: beta - m * alpha })
}

/// `(1/Γ(α)) x^{-mη-mα} ∫_0^x (x^m - u^m)^{α-1} u^{mη} f(u) d(u^m)` by quadrature.
///
/// After `u^m = x^m s` and `s = 1 - (1-v)^{1/α}` the kernel singularity at
/// `u = x` disappears and the integral becomes
/// `1/Γ(α+1) ∫_0^1 s^η f(x s^{1/m}) dv`.
pub fn ek_integral<F: Fn(f64) -> f64>(m: f64, eta: f64, alpha: f64, f: F, x: f64) -> Result<f64> {
    if !(m > 0.0) || !(alpha > 0.0) || !(x > 0.0) || !eta.is_finite() {
        return Err(invalid(format!("ek_integral needs m > 0, α > 0, x > 0 (m={m}, α={alpha}, x={x})")));
    }
    let inv_alpha = 1.0 / alpha;
    let inv_m = 1.0 / m;
    let integrand = |v: f64| {
        // 1 - (1-v)^{1/α}, written to keep accuracy near v = 0
        let s = -(inv_alpha * (-v).ln_1p()).exp_m1();
        if s <= 0.0 {
            return 0.0;
        }
        s.powf(eta) * f(x * s.powf(inv_m))
    };
    let q = quad::gauss_kronrod(integrand, 0.0, 1.0, 1e-11, 1e-12, 4000, 1e-9)?;
    Ok(q.value / gamma(alpha + 1.0)?)
}

/// `I_m^{η,α}` for `-1 < α <= 0` via one step of
/// `I^{η,α} f = (η+α+1) I^{η,α+1} f + (1/m) I^{η,α+1}(x f')`.
pub fn ek_negative_order<F, G>(m: f64, eta: f64, alpha: f64, f: F, df: G, x: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if !(alpha > -1.0 && alpha <= 0.0) {
        return Err(domain(format!("ek_negative_order needs -1 < α <= 0, got {alpha}")));
    }
    let first = ek_integral(m, eta, alpha + 1.0, &f, x)?;
    let second = ek_integral(m, eta, alpha + 1.0, |u| u * df(u), x)?;
    Ok((eta + alpha + 1.0) * first + second / m)
}

/// One monomial `coeff · w^exponent` of a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub exponent: f64,
}

impl Term {
    pub fn new(coeff: f64, exponent: f64) -> Self {
        Self { coeff, exponent }
    }
}

/// How the series variable `w` is obtained from physical coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VariableMap {
    /// `w` itself.
    Identity,
    /// `(x, t) ↦ √(c²t² - x²)`.
    LightCone1D { c: f64 },
    /// `(x, y, t) ↦ √(c²t² - x² - y²)`.
    Disc2D { c: f64 },
    /// `(x_1..x_N, t) ↦ √(c²t² - ‖x‖²)`.
    BallND { c: f64, dim: u32 },
    /// `(x, y, t) ↦ ∛((ct + 2x)((ct - x)² - 3y²))`, the cube root of
    /// `6 z_1 z_2 z_3` for the characteristic coordinates
    /// `z_1 = ct/2 + x`, `z_{2,3} = (ct - x)/√3 ± y` of the three-direction
    /// cyclic motion.
    CyclicPlanar { c: f64 },
    /// `(t) ↦ t`.
    Time,
}

impl VariableMap {
    /// Number of coordinates expected by [`VariableMap::to_w`].
    pub fn arity(&self) -> usize {
        match self {
            VariableMap::Identity | VariableMap::Time => 1,
            VariableMap::LightCone1D { .. } => 2,
            VariableMap::Disc2D { .. } | VariableMap::CyclicPlanar { .. } => 3,
            VariableMap::BallND { dim, .. } => *dim as usize + 1,
        }
    }

    /// Maps a point (time last) to `w`; fails outside the open support.
    pub fn to_w(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.arity() {
            return Err(invalid(format!("expected {} coordinates, got {}", self.arity(), point.len())));
        }
        let t = point[point.len() - 1];
        let w = match *self {
            VariableMap::Identity | VariableMap::Time => t,
            VariableMap::LightCone1D { c } | VariableMap::Disc2D { c } | VariableMap::BallND { c, .. } => {
                let r2: f64 = point[..point.len() - 1].iter().map(|v| v * v).sum();
                let s = (c * t) * (c * t) - r2;
                if !(s > 0.0) || t <= 0.0 {
                    return Err(domain(format!("point {point:?} is outside the open light cone")));
                }
                s.sqrt()
            }
            VariableMap::CyclicPlanar { c } => {
                let (x, y) = (point[0], point[1]);
                let z1 = c * t + 2.0 * x;
                let z23 = (c * t - x).powi(2) - 3.0 * y * y;
                if !(z1 > 0.0) || !(z23 > 0.0) || c * t - x <= 0.0 {
                    return Err(domain(format!("point {point:?} is outside the cyclic-motion triangle")));
                }
                (z1 * z23).cbrt()
            }
        };
        if !(w > 0.0) {
            return Err(domain(format!("w = {w} must be positive")));
        }
        Ok(w)
    }
}

/// A finite formal series `Σ c_k w^{e_k}` with strictly increasing exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSolution {
    terms: Vec<Term>,
    map: VariableMap,
}

/// Exponents closer than this are considered equal.
pub const EXPONENT_TOL: f64 = 1e-9;

impl SeriesSolution {
    /// Sorts the terms and merges coincident exponents. Non-finite
    /// coefficients are rejected.
    pub fn new(mut terms: Vec<Term>, map: VariableMap) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| !t.coeff.is_finite() || !t.exponent.is_finite()) {
            return Err(invalid(format!("non-finite term {t:?}")));
        }
        terms.sort_by(|a, b| a.exponent.total_cmp(&b.exponent));
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if (t.exponent - last.exponent).abs() <= EXPONENT_TOL => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        Ok(Self { terms: merged, map })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn map(&self) -> VariableMap {
        self.map
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let terms = self.terms.iter().map(|t| Term::new(t.coeff * factor, t.exponent)).collect();
        Self { terms, map: self.map }
    }

    /// Coefficient of the term with exponent `e`, or `0.0` if absent.
    pub fn coefficient_at(&self, e: f64) -> f64 {
        self.terms
            .iter()
            .find(|t| (t.exponent - e).abs() <= EXPONENT_TOL)
            .map_or(0.0, |t| t.coeff)
    }

    /// Value at `w > 0`.
    pub fn eval_w(&self, w: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for t in &self.terms {
            if t.coeff != 0.0 {
                acc.add(t.coeff * w.powf(t.exponent));
            }
        }
        acc.value()
    }

    /// Value at a physical point, mapped through the variable map.
    pub fn eval_at(&self, point: &[f64]) -> Result<f64> {
        Ok(self.eval_w(self.map.to_w(point)?))
    }
}

/// Applies `L^α` termwise. Terms annihilated by a Gamma pole are dropped.
pub fn apply_to_series(op: &HyperBesselOp, alpha: f64, s: &SeriesSolution) -> Result<SeriesSolution> {
    let mut out = Vec::with_capacity(s.len());
    for t in s.terms() {
        let action = op_monomial(op, alpha, t.exponent)?;
        let coeff = t.coeff * action.coefficient;
        if coeff != 0.0 {
            out.push(Term::new(coeff, action.exponent));
        }
    }
    SeriesSolution::new(out, s.map())
}
