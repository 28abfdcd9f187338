//! Termwise certification of series solutions of fractional Bessel-type
//! equations.
//!
//! A series `s = Σ c_k w^{e_k}` solves `L^α s = μ s + f` exactly when the
//! image of every monomial lands on a monomial of `μ s + f` with the same
//! coefficient. The comparison is done in coefficient space, where Gamma
//! poles cancel exactly, and repeated on a grid of `w` values.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::mcbride::{op_monomial, HyperBesselOp, SeriesSolution, Term, VariableMap, EXPONENT_TOL};
use crate::specfun::{gamma, ln_gamma_signed, rgamma};

/// Default residual tolerance of the registry.
pub const VERIFY_TOL: f64 = 1e-11;

/// Default number of series terms.
pub const DEFAULT_TERMS: usize = 40;

/// Default `w` grid for pointwise checks.
pub const DEFAULT_GRID: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// `L^α u = eigenvalue · u + forcing`, with `L^α` applied `iterations` times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquationSpec {
    pub operator: HyperBesselOp,
    pub alpha: f64,
    pub eigenvalue: f64,
    pub forcing: Vec<Term>,
    pub iterations: u32,
}

impl EquationSpec {
    pub fn new(operator: HyperBesselOp, alpha: f64, eigenvalue: f64, forcing: Vec<Term>) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(invalid(format!("α must be positive, got {alpha}")));
        }
        if !eigenvalue.is_finite() {
            return Err(invalid("eigenvalue must be finite"));
        }
        if let Some(t) = forcing.iter().find(|t| !t.coeff.is_finite() || !t.exponent.is_finite()) {
            return Err(invalid(format!("non-finite forcing term {t:?}")));
        }
        Ok(Self { operator, alpha, eigenvalue, forcing, iterations: 1 })
    }

    /// `(L^α)^n u = eigenvalue^n · u`; any forcing is dropped.
    pub fn iterated(mut self, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(invalid("iteration count must be positive"));
        }
        self.eigenvalue = self.eigenvalue.powi(n as i32);
        self.iterations = n;
        self.forcing.clear();
        Ok(self)
    }
}

/// One row of the coefficient comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    /// Exponent(s) of the input monomial, when the row comes from the image.
    pub input_exponents: Option<Vec<f64>>,
    pub exponents: Vec<f64>,
    /// Coefficient of the operator image.
    pub output: f64,
    /// Coefficient of `eigenvalue · u + forcing`.
    pub matched: f64,
    /// `|output - matched| / max(|output|, |matched|)`, `0` when both vanish.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreconditionFailure {
    pub exponents: Vec<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResidual {
    pub point: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / Σ|terms|`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    /// Largest relative coefficient residual.
    pub max_abs_residual: f64,
    /// Largest scaled pointwise residual.
    pub max_pointwise_residual: f64,
    pub ledger: Vec<LedgerEntry>,
    /// Top terms of `eigenvalue · u` with no image below the truncation.
    pub truncated: Vec<LedgerEntry>,
    pub precondition_failures: Vec<PreconditionFailure>,
    pub grid: Vec<PointResidual>,
}

impl ResidualReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.precondition_failures.is_empty() && self.max_abs_residual <= tol && self.max_pointwise_residual <= tol
    }

    /// Ledger row whose exponent matches `e` in the first variable.
    pub fn entry_at(&self, e: f64) -> Option<&LedgerEntry> {
        self.ledger.iter().find(|r| (r.exponents[0] - e).abs() <= EXPONENT_TOL)
    }
}

#[derive(Debug, Clone)]
struct Mono {
    exps: Vec<f64>,
    coeff: f64,
    input: Option<Vec<f64>>,
}

fn same(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= EXPONENT_TOL)
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 { 0.0 } else { (a - b).abs() / s }
}

fn merge(mut ms: Vec<Mono>) -> Vec<Mono> {
    let mut out: Vec<Mono> = Vec::with_capacity(ms.len());
    for m in ms.drain(..) {
        match out.iter_mut().find(|o| same(&o.exps, &m.exps)) {
            Some(o) => o.coeff += m.coeff,
            None => out.push(m),
        }
    }
    out
}

fn eval_mono(m: &Mono, point: &[f64]) -> f64 {
    m.coeff * m.exps.iter().zip(point).map(|(e, z)| z.powf(*e)).product::<f64>()
}

/// Compares `image` with `expected`, dropping expected monomials whose total
/// degree exceeds every image monomial.
fn compare(image: Vec<Mono>, expected: Vec<Mono>, failures: Vec<PreconditionFailure>, grid: &[Vec<f64>]) -> ResidualReport {
    let image = merge(image);
    let expected = merge(expected);
    let degree = |m: &Mono| m.exps.iter().sum::<f64>();
    let top = image.iter().map(degree).fold(f64::NEG_INFINITY, f64::max);
    let (kept, dropped): (Vec<Mono>, Vec<Mono>) = expected.into_iter().partition(|m| degree(m) <= top + EXPONENT_TOL);

    let mut ledger = Vec::new();
    let mut used = vec![false; kept.len()];
    for im in &image {
        let hit = kept.iter().position(|e| same(&e.exps, &im.exps));
        let matched = hit.map_or(0.0, |i| {
            used[i] = true;
            kept[i].coeff
        });
        ledger.push(LedgerEntry {
            input_exponents: im.input.clone(),
            exponents: im.exps.clone(),
            output: im.coeff,
            matched,
            residual: rel(im.coeff, matched),
        });
    }
    for (e, _) in kept.iter().zip(&used).filter(|(_, u)| !**u) {
        ledger.push(LedgerEntry {
            input_exponents: None,
            exponents: e.exps.clone(),
            output: 0.0,
            matched: e.coeff,
            residual: rel(0.0, e.coeff),
        });
    }
    ledger.sort_by(|a, b| a.exponents[0].total_cmp(&b.exponents[0]));
    let truncated = dropped
        .iter()
        .map(|e| LedgerEntry {
            input_exponents: None,
            exponents: e.exps.clone(),
            output: f64::NAN,
            matched: e.coeff,
            residual: 0.0,
        })
        .collect();

    let points = grid
        .iter()
        .map(|p| {
            let lhs: f64 = image.iter().map(|m| eval_mono(m, p)).sum();
            let rhs: f64 = kept.iter().map(|m| eval_mono(m, p)).sum();
            let scale: f64 = image.iter().chain(&kept).map(|m| eval_mono(m, p).abs()).sum();
            let residual = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
            PointResidual { point: p.clone(), lhs, rhs, residual }
        })
        .collect::<Vec<_>>();

    ResidualReport {
        max_abs_residual: ledger.iter().map(|r| r.residual).fold(0.0, f64::max),
        max_pointwise_residual: points.iter().map(|p| p.residual).fold(0.0, f64::max),
        ledger,
        truncated,
        precondition_failures: failures,
        grid: points,
    }
}

/// Checks `s` against `eq` on [`DEFAULT_GRID`].
pub fn verify(eq: &EquationSpec, s: &SeriesSolution) -> Result<ResidualReport> {
    verify_on_grid(eq, s, &DEFAULT_GRID)
}

pub fn verify_on_grid(eq: &EquationSpec, s: &SeriesSolution, grid: &[f64]) -> Result<ResidualReport> {
    let mut current: Vec<Mono> = s
        .terms()
        .iter()
        .filter(|t| t.coeff != 0.0)
        .map(|t| Mono { exps: vec![t.exponent], coeff: t.coeff, input: Some(vec![t.exponent]) })
        .collect();
    let mut failures = Vec::new();
    for _ in 0..eq.iterations {
        let mut next = Vec::with_capacity(current.len());
        for m in &current {
            match op_monomial(&eq.operator, eq.alpha, m.exps[0]) {
                Ok(a) if a.coefficient != 0.0 => {
                    next.push(Mono { exps: vec![a.exponent], coeff: m.coeff * a.coefficient, input: m.input.clone() })
                }
                Ok(_) => {}
                Err(Error::Precondition { exponent, reason }) => {
                    failures.push(PreconditionFailure { exponents: vec![exponent], reason })
                }
                Err(e) => return Err(e),
            }
        }
        current = next;
    }
    let expected = s
        .terms()
        .iter()
        .map(|t| Mono { exps: vec![t.exponent], coeff: eq.eigenvalue * t.coeff, input: None })
        .chain(eq.forcing.iter().map(|t| Mono { exps: vec![t.exponent], coeff: t.coeff, input: None }))
        .collect();
    let grid: Vec<Vec<f64>> = grid.iter().map(|&w| vec![w]).collect();
    Ok(compare(current, expected, failures, &grid))
}

fn check_kg(alpha: f64, lambda: f64, c: f64, terms: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("α must lie in (0, 1], got {alpha}")));
    }
    if !(lambda > 0.0) || !(c > 0.0) || !lambda.is_finite() || !c.is_finite() {
        return Err(invalid("λ and c must be positive and finite"));
    }
    if terms == 0 {
        return Err(invalid("at least one series term is needed"));
    }
    Ok(())
}

/// Builds `Σ_{k in range} sign_k exp(ln_k) w^{e_k}` from `(ln|c_k|, sign_k, e_k)`.
fn log_series<F>(range: std::ops::Range<usize>, map: VariableMap, f: F) -> Result<SeriesSolution>
where
    F: Fn(f64) -> (f64, f64, f64),
{
    let terms = range
        .map(|k| {
            let (ln, sign, e) = f(k as f64);
            Term::new(if sign == 0.0 { 0.0 } else { sign * ln.exp() }, e)
        })
        .collect();
    SeriesSolution::new(terms, map)
}

fn lg(x: f64) -> (f64, f64) {
    ln_gamma_signed(x)
}

/// `ln(λ/(2^α c^α))`.
fn ln_q(alpha: f64, lambda: f64, c: f64) -> f64 {
    lambda.ln() - alpha * (2.0 * c).ln()
}

/// `Σ_k q^{2k} w^{2αk+2α-2} / Γ(αk+α)²`, `q = λ/(2^α c^α)`; eigenvalue
/// `λ²/c^{2α}` of the 1D Bessel operator.
pub fn kg_plus_series(alpha: f64, lambda: f64, c: f64, terms: usize) -> Result<SeriesSolution> {
    check_kg(alpha, lambda, c, terms)?;
    let lq = ln_q(alpha, lambda, c);
    log_series(0..terms, VariableMap::LightCone1D { c }, |k| {
        let (l, s) = lg(alpha * k + alpha);
        (2.0 * k * lq - 2.0 * l, s * s, 2.0 * alpha * k + 2.0 * alpha - 2.0)
    })
}

/// As [`kg_plus_series`] with alternating signs; eigenvalue `-λ²/c^{2α}`.
pub fn kg_minus_series(alpha: f64, lambda: f64, c: f64, terms: usize) -> Result<SeriesSolution> {
    check_kg(alpha, lambda, c, terms)?;
    let lq = ln_q(alpha, lambda, c);
    log_series(0..terms, VariableMap::LightCone1D { c }, |k| {
        let (l, s) = lg(alpha * k + alpha);
        let sign = if (k as u64).is_multiple_of(2) { 1.0 } else { -1.0 };
        (2.0 * k * lq - 2.0 * l, sign * s * s, 2.0 * alpha * k + 2.0 * alpha - 2.0)
    })
}

/// `G(w) = Σ_{k≥1} q^{2k} w^{2αk} / Γ(αk+1)²`, which satisfies
/// `L^α G = (λ/c^α)² (G + 1)`.
pub fn shifted_series(alpha: f64, lambda: f64, c: f64, terms: usize) -> Result<SeriesSolution> {
    check_kg(alpha, lambda, c, terms)?;
    let lq = ln_q(alpha, lambda, c);
    log_series(1..terms + 1, VariableMap::LightCone1D { c }, |k| {
        let (l, s) = lg(alpha * k + 1.0);
        (2.0 * k * lq - 2.0 * l, s * s, 2.0 * alpha * k)
    })
}

/// `H(w) = Σ_k q^{2k+1} w^{2αk+α-1} / Γ(αk+(1+α)/2)²`.
pub fn odd_series(alpha: f64, lambda: f64, c: f64, terms: usize) -> Result<SeriesSolution> {
    check_kg(alpha, lambda, c, terms)?;
    let lq = ln_q(alpha, lambda, c);
    log_series(0..terms, VariableMap::LightCone1D { c }, |k| {
        let (l, s) = lg(alpha * k + 0.5 * (1.0 + alpha));
        ((2.0 * k + 1.0) * lq - 2.0 * l, s * s, 2.0 * alpha * k + alpha - 1.0)
    })
}

/// `Σ_k (λ/c^α)^{2k+2} w^{2αk+2α-2} / Γ(2αk+2α)`, radial operator in the plane.
pub fn planar_even_series(alpha: f64, lambda: f64, c: f64, terms: usize) -> Result<SeriesSolution> {
    check_kg(alpha, lambda, c, terms)?;
    let lr = lambda.ln() - alpha * c.ln();
    log_series(0..terms, VariableMap::Disc2D { c }, |k| {
        let (l, s) = lg(2.0 * alpha * k + 2.0 * alpha);
        ((2.0 * k + 2.0) * lr - l, s, 2.0 * alpha * k + 2.0 * alpha - 2.0)
    })
}

/// `Σ_k (λ/c^α)^{2k+1} w^{2αk+α-2} / Γ(2αk+α)`, forced by `(λ/c^α) w^{-α-2}/Γ(-α)`.
pub fn planar_odd_series(alpha: f64, lambda: f64, c: f64, terms: usize) -> Result<SeriesSolution> {
    check_kg(alpha, lambda, c, terms)?;
    let lr = lambda.ln() - alpha * c.ln();
    log_series(0..terms, VariableMap::Disc2D { c }, |k| {
        let (l, s) = lg(2.0 * alpha * k + alpha);
        ((2.0 * k + 1.0) * lr - l, s, 2.0 * alpha * k + alpha - 2.0)
    })
}

/// `Σ_{k≥1} (λ/c^α)^k w^{kα-2} / Γ(kα)`, the unnormalized planar density.
pub fn planar_full_series(alpha: f64, lambda: f64, c: f64, terms: usize) -> Result<SeriesSolution> {
    check_kg(alpha, lambda, c, terms)?;
    let lr = lambda.ln() - alpha * c.ln();
    log_series(1..terms + 1, VariableMap::Disc2D { c }, |k| {
        let (l, s) = lg(alpha * k);
        (k * lr - l, s, alpha * k - 2.0)
    })
}

/// `Σ_k q^k w^{kα-1} / Γ((αk+1)/2)²`, the unnormalized projection density.
pub fn projection_series(alpha: f64, lambda: f64, c: f64, terms: usize) -> Result<SeriesSolution> {
    check_kg(alpha, lambda, c, terms)?;
    let lq = ln_q(alpha, lambda, c);
    log_series(0..terms, VariableMap::LightCone1D { c }, |k| {
        let (l, s) = lg(0.5 * (alpha * k + 1.0));
        (k * lq - 2.0 * l, s * s, alpha * k - 1.0)
    })
}

/// `w^{nα-n} Σ_k (w/n)^{nαk} / Γ(αk+α)^n`, eigenfunction of
/// `(w^{-n}(w d/dw)^n)^α` with eigenvalue 1.
pub fn hyper_series(order: u32, alpha: f64, terms: usize) -> Result<SeriesSolution> {
    check_kg(alpha, 1.0, 1.0, terms)?;
    if order == 0 {
        return Err(invalid("order must be positive"));
    }
    let n = order as f64;
    log_series(0..terms, VariableMap::Identity, |k| {
        let (l, s) = lg(alpha * k + alpha);
        (-n * alpha * k * n.ln() - n * l, s.powi(order as i32), n * alpha * k + n * alpha - n)
    })
}

/// `Σ_k ((λ/3c) W)^{3αk+3α-3} / Γ(αk+α)³` in the cyclic variable
/// `W = ∛((ct+2x)((ct-x)² - 3y²))`; eigenvalue `(λ/c)^{3α}` of the
/// third-order operator in `W`.
pub fn cyclic_series(alpha: f64, lambda: f64, c: f64, terms: usize) -> Result<SeriesSolution> {
    check_kg(alpha, lambda, c, terms)?;
    let lr = (lambda / (3.0 * c)).ln();
    log_series(0..terms, VariableMap::CyclicPlanar { c }, |k| {
        let e = 3.0 * alpha * k + 3.0 * alpha - 3.0;
        let (l, s) = lg(alpha * k + alpha);
        (e * lr - 3.0 * l, s.powi(3), e)
    })
}

/// `t^{2α-2} Σ_j ((t/2)^α |k|)^{2j} / Γ(αj+α)²` with `multiplier = |k|²`.
pub fn epd_series(alpha: f64, multiplier: f64, terms: usize) -> Result<SeriesSolution> {
    check_kg(alpha, 1.0, 1.0, terms)?;
    if !(multiplier >= 0.0) || !multiplier.is_finite() {
        return Err(invalid(format!("multiplier must be non-negative, got {multiplier}")));
    }
    let terms = if multiplier == 0.0 { 1 } else { terms };
    let lm = multiplier.ln();
    log_series(0..terms, VariableMap::Time, |j| {
        let (l, s) = lg(alpha * j + alpha);
        let lk = if j == 0.0 { 0.0 } else { j * (lm - 2.0 * alpha * 2f64.ln()) };
        (lk - 2.0 * l, s * s, 2.0 * alpha * j + 2.0 * alpha - 2.0)
    })
}

/// Value of the operational solution of the fractional Euler-Poisson-Darboux
/// equation for the Fourier multiplier `|k|²`.
pub fn epd_operational(alpha: f64, multiplier: f64, t: f64, terms: usize) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    let s = epd_series(alpha, multiplier, terms)?;
    let v = s.eval_w(t);
    // a zero multiplier leaves a single exact term
    let last = match s.terms() {
        [_] => 0.0,
        ts => ts.last().map_or(0.0, |tm| (tm.coeff * t.powf(tm.exponent)).abs()),
    };
    if last > 1e-15 * v.abs() {
        return Err(Error::NonConvergence { what: "EPD operational series", terms });
    }
    Ok(v)
}

/// Termwise action of `(4c²)^α ∂^α_{z1} ∂^α_{z2}` (Riemann-Liouville) on a
/// bivariate series `Σ c (z1^{p1} z2^{p2})`, compared with `eigenvalue · u`.
pub fn verify_bivariate(
    alpha: f64,
    scale: f64,
    eigenvalue: f64,
    terms: &[(f64, f64, f64)],
    grid: &[(f64, f64)],
) -> Result<ResidualReport> {
    let mut image = Vec::new();
    let mut failures = Vec::new();
    for &(coef, p1, p2) in terms {
        if coef == 0.0 {
            continue;
        }
        if !(p1 > -1.0) || !(p2 > -1.0) {
            failures.push(PreconditionFailure {
                exponents: vec![p1, p2],
                reason: "Riemann-Liouville power rule needs exponents > -1".into(),
            });
            continue;
        }
        let f1 = rl_coefficient(alpha, p1)?;
        let f2 = rl_coefficient(alpha, p2)?;
        let v = scale * coef * f1 * f2;
        if v != 0.0 {
            image.push(Mono { exps: vec![p1 - alpha, p2 - alpha], coeff: v, input: Some(vec![p1, p2]) });
        }
    }
    let expected = terms
        .iter()
        .map(|&(coef, p1, p2)| Mono { exps: vec![p1, p2], coeff: eigenvalue * coef, input: None })
        .collect();
    let grid: Vec<Vec<f64>> = grid.iter().map(|&(a, b)| vec![a, b]).collect();
    Ok(compare(image, expected, failures, &grid))
}

/// `∂^α z^p = Γ(p+1)/Γ(p+1-α) z^{p-α}` (zero at a pole of the denominator).
pub fn rl_coefficient(alpha: f64, p: f64) -> Result<f64> {
    let (ln, _) = ln_gamma_signed(p + 1.0);
    let r = rgamma(p + 1.0 - alpha);
    if r == 0.0 {
        return Ok(0.0);
    }
    let v = r * ln.exp();
    if !v.is_finite() {
        return Err(Error::Overflow("Riemann-Liouville coefficient"));
    }
    Ok(v)
}

/// `F(x,t) = ct Σ_{k≥1} q^{2k} (c²t²-x²)^{αk-1} / (Γ(αk+1)Γ(αk))` written in
/// `z1 = ct+x`, `z2 = ct-x` as `Σ (q^{2k}/2)/(Γ(αk+1)Γ(αk)) (z1^{αk} z2^{αk-1} + z1^{αk-1} z2^{αk})`.
pub fn time_derivative_bivariate(alpha: f64, lambda: f64, c: f64, terms: usize) -> Result<Vec<(f64, f64, f64)>> {
    check_kg(alpha, lambda, c, terms)?;
    let lq = ln_q(alpha, lambda, c);
    let mut out = Vec::with_capacity(2 * terms);
    for k in 1..=terms {
        let kf = k as f64;
        let (l1, s1) = lg(alpha * kf + 1.0);
        let (l2, s2) = lg(alpha * kf);
        let coef = 0.5 * s1 * s2 * (2.0 * kf * lq - l1 - l2).exp();
        out.push((coef, alpha * kf, alpha * kf - 1.0));
        out.push((coef, alpha * kf - 1.0, alpha * kf));
    }
    Ok(out)
}

/// `F(x,t)` evaluated directly.
pub fn time_derivative_value(alpha: f64, lambda: f64, c: f64, x: f64, t: f64, terms: usize) -> Result<f64> {
    let w = VariableMap::LightCone1D { c }.to_w(&[x, t])?;
    let lq = ln_q(alpha, lambda, c);
    let mut acc = crate::specfun::CompensatedSum::new();
    for k in 1..=terms {
        let kf = k as f64;
        let (l1, s1) = lg(alpha * kf + 1.0);
        let (l2, s2) = lg(alpha * kf);
        acc.add(s1 * s2 * (2.0 * kf * lq - l1 - l2 + (2.0 * alpha * kf - 2.0) * w.ln()).exp());
    }
    Ok(c * t * acc.value())
}

/// Boundary terms showing that `d/dz` and `d^α/dz^α` do not commute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoncommutationWitness {
    /// `f(0) z^{-α}/Γ(1-α)`.
    pub boundary_term: f64,
    /// `(D D^α - D^α D) f` evaluated termwise, `f(0) z^{-1-α}/Γ(-α)`.
    pub commutator: f64,
}

/// Witness for a series in `z` (exponents `>= 0`) at the point `z`.
pub fn noncommutation_witness(alpha: f64, s: &SeriesSolution, z: f64) -> Result<NoncommutationWitness> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("α must lie in (0, 1), got {alpha}")));
    }
    if !(z > 0.0) {
        return Err(invalid(format!("z must be positive, got {z}")));
    }
    if let Some(t) = s.terms().iter().find(|t| t.exponent < -EXPONENT_TOL) {
        return Err(invalid(format!("witness needs non-negative exponents, found {}", t.exponent)));
    }
    let f0 = s.coefficient_at(0.0);
    let boundary_term = f0 * z.powf(-alpha) * rgamma(1.0 - alpha);
    let mut commutator = 0.0;
    for t in s.terms() {
        let p = t.exponent;
        // D D^α z^p = Γ(p+1)/Γ(p-α) z^{p-α-1}
        let outer = gamma(p + 1.0)? * rgamma(p - alpha);
        // D^α D z^p = p Γ(p)/Γ(p-α) z^{p-1-α}, absent for p = 0
        let inner = if p.abs() <= EXPONENT_TOL { 0.0 } else { p * gamma(p)? * rgamma(p - alpha) };
        commutator += t.coeff * (outer - inner) * z.powf(p - alpha - 1.0);
    }
    Ok(NoncommutationWitness { boundary_term, commutator })
}

/// Residual of `D1 D2 D3 u = λ³ u` at `α = 1` for
/// `u = I_{0,3}((λ/c) ∛((ct+κx)((ct-x)² - 3y²)))`, with
/// `D1 = ∂t + c∂x`, `D{2,3} = ∂t - (c/2)∂x ± (c√3/2)∂y`. Returns
/// `|D1D2D3 u - λ³u| / |λ³u|`; it vanishes for `κ = 2`.
pub fn cyclic_chain_rule_residual(kappa: f64, lambda: f64, c: f64, point: [f64; 3]) -> Result<f64> {
    check_kg(1.0, lambda, c, 1)?;
    let [x, y, t] = point;
    let ct = c * t;
    // P = A·B with A = ct + κx, B = (ct - x)² - 3y²; derivatives along (∂t, ∂x, ∂y)
    let a = ct + kappa * x;
    let b = (ct - x).powi(2) - 3.0 * y * y;
    let grad_a = [c, kappa, 0.0];
    let grad_b = [2.0 * c * (ct - x), -2.0 * (ct - x), -6.0 * y];
    let hess_b = [
        [2.0 * c * c, -2.0 * c, 0.0],
        [-2.0 * c, 2.0, 0.0],
        [0.0, 0.0, -6.0],
    ];
    let s3 = 3f64.sqrt();
    let dirs = [[1.0, c, 0.0], [1.0, -0.5 * c, 0.5 * c * s3], [1.0, -0.5 * c, -0.5 * c * s3]];
    let dot = |u: &[f64; 3], v: &[f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let quad = |h: &[[f64; 3]; 3], u: &[f64; 3], v: &[f64; 3]| {
        (0..3).map(|i| (0..3).map(|j| u[i] * h[i][j] * v[j]).sum::<f64>()).sum::<f64>()
    };
    // first, second and third directional derivatives of P = A B (A linear, B quadratic)
    let p1 = |i: usize| dot(&dirs[i], &grad_a) * b + a * dot(&dirs[i], &grad_b);
    let p2 = |i: usize, j: usize| {
        dot(&dirs[i], &grad_a) * dot(&dirs[j], &grad_b)
            + dot(&dirs[j], &grad_a) * dot(&dirs[i], &grad_b)
            + a * quad(&hess_b, &dirs[i], &dirs[j])
    };
    let p123 = dot(&dirs[0], &grad_a) * quad(&hess_b, &dirs[1], &dirs[2])
        + dot(&dirs[1], &grad_a) * quad(&hess_b, &dirs[0], &dirs[2])
        + dot(&dirs[2], &grad_a) * quad(&hess_b, &dirs[0], &dirs[1]);
    let p = a * b;
    let r3 = (lambda / (3.0 * c)).powi(3);
    // g(s) = Σ r³ᵏ s^k/(k!)³ and its derivatives
    let g = |d: usize| -> f64 {
        let mut acc = 0.0;
        for k in d..80 {
            let kf = k as f64;
            let ln = kf * r3.ln() - 3.0 * ln_gamma_signed(kf + 1.0).0 + ln_gamma_signed(kf + 1.0).0
                - ln_gamma_signed((k - d) as f64 + 1.0).0;
            let pw = if k == d { 1.0 } else { p.powi((k - d) as i32) };
            acc += ln.exp() * pw;
        }
        acc
    };
    let lhs = g(3) * p1(0) * p1(1) * p1(2)
        + g(2) * (p2(0, 1) * p1(2) + p2(0, 2) * p1(1) + p2(1, 2) * p1(0))
        + g(1) * p123;
    let u = g(0);
    let rhs = lambda.powi(3) * u;
    Ok((lhs - rhs).abs() / rhs.abs())
}

/// Solutions available to [`verify_kg_cartesian`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SolutionKind {
    /// `(c²t²-x²)^{α-1} E_{2;α,α}(q²(c²t²-x²)^α)`.
    HomogPlus,
    /// Alternating version, eigenvalue `-λ²`.
    HomogMinus,
    /// Time derivative of the shifted series; checked in `(z1, z2)`.
    F,
    /// Odd-count part of the telegraph density.
    H,
    /// Unnormalized planar density.
    Planar,
    /// N-dimensional solution.
    Ndim(u32),
    /// Cyclic three-direction motion.
    ThirdOrder,
}

/// Per-point output of [`verify_kg_cartesian`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointValue {
    pub point: Vec<f64>,
    pub w: Option<f64>,
    pub value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CartesianReport {
    pub report: ResidualReport,
    pub points: Vec<PointValue>,
}

/// Equation and series for a Klein-Gordon-type solution, in the `w` variable.
pub fn kg_problem(kind: SolutionKind, alpha: f64, lambda: f64, c: f64, terms: usize) -> Result<(EquationSpec, SeriesSolution)> {
    let mu = (lambda / c.powf(alpha)).powi(2);
    let lr = lambda / c.powf(alpha);
    Ok(match kind {
        SolutionKind::HomogPlus => {
            (EquationSpec::new(HyperBesselOp::bessel_1d(), alpha, mu, vec![])?, kg_plus_series(alpha, lambda, c, terms)?)
        }
        SolutionKind::HomogMinus => {
            (EquationSpec::new(HyperBesselOp::bessel_1d(), alpha, -mu, vec![])?, kg_minus_series(alpha, lambda, c, terms)?)
        }
        SolutionKind::F => (
            EquationSpec::new(HyperBesselOp::bessel_1d(), alpha, mu, vec![Term::new(mu, 0.0)])?,
            shifted_series(alpha, lambda, c, terms)?,
        ),
        SolutionKind::H => {
            let forcing = Term::new(lr * 2f64.powf(alpha) * rgamma(0.5 * (1.0 - alpha)).powi(2), -alpha - 1.0);
            (EquationSpec::new(HyperBesselOp::bessel_1d(), alpha, mu, vec![forcing])?, odd_series(alpha, lambda, c, terms)?)
        }
        SolutionKind::Planar => {
            let forcing = Term::new(lr * rgamma(-alpha), -alpha - 2.0);
            (EquationSpec::new(HyperBesselOp::bessel_2d(), alpha, mu, vec![forcing])?, planar_full_series(alpha, lambda, c, terms)?)
        }
        SolutionKind::Ndim(dim) => (
            EquationSpec::new(HyperBesselOp::ndim(dim), alpha, mu, vec![])?,
            crate::flights::ndim_series(dim, alpha, lambda, c, terms)?,
        ),
        SolutionKind::ThirdOrder => (
            EquationSpec::new(HyperBesselOp::third_order(), alpha, (lambda / c).powf(3.0 * alpha), vec![])?,
            cyclic_series(alpha, lambda, c, terms)?,
        ),
    })
}

/// Maps each point (time last) to `w`, evaluates the solution there and
/// certifies the equation on those `w` values.
pub fn verify_kg_cartesian(
    alpha: f64,
    lambda: f64,
    c: f64,
    kind: SolutionKind,
    points: &[Vec<f64>],
    terms: usize,
) -> Result<CartesianReport> {
    let (eq, s) = kg_problem(kind, alpha, lambda, c, terms)?;
    let map = s.map();
    let mut ws = Vec::new();
    let mut values = Vec::with_capacity(points.len());
    for p in points {
        match map.to_w(p) {
            Ok(w) => {
                let value = if kind == SolutionKind::F {
                    time_derivative_value(alpha, lambda, c, p[0], p[1], terms)?
                } else {
                    s.eval_w(w)
                };
                ws.push(w);
                values.push(PointValue { point: p.clone(), w: Some(w), value: Some(value), error: None });
            }
            Err(e) => values.push(PointValue { point: p.clone(), w: None, value: None, error: Some(e.to_string()) }),
        }
    }
    let report = if kind == SolutionKind::F {
        let bt = time_derivative_bivariate(alpha, lambda, c, terms)?;
        let grid: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| map.to_w(p).is_ok())
            .map(|p| (c * p[1] + p[0], c * p[1] - p[0]))
            .collect();
        verify_bivariate(alpha, (4.0 * c * c).powf(alpha), lambda * lambda, &bt, &grid)?
    } else {
        verify_on_grid(&eq, &s, &ws)?
    };
    Ok(CartesianReport { report, points: values })
}

/// Names accepted by [`run_case`].
pub const CASES: &[&str] = &[
    "kg1d",
    "kg1d-iterate",
    "kg1d-minus",
    "shifted-g",
    "time-derivative-f",
    "odd-h",
    "planar-even",
    "planar-odd",
    "planar-full",
    "projection",
    "ndim-1",
    "ndim-2",
    "ndim-3",
    "ndim-5",
    "hyper-2",
    "hyper-3",
    "hyper-4",
    "third-order",
    "cyclic",
    "epd",
    "factorized-rl",
];

/// Orders of the fractional power used by the registry sweep.
pub const SWEEP_ALPHAS: [f64; 4] = [0.3, 0.5, 0.7, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub case: String,
    pub alpha: f64,
    pub passed: bool,
    pub max_residual: f64,
    pub max_pointwise_residual: f64,
    pub report: ResidualReport,
}

/// Runs a named check with `λ = c = 1`.
pub fn run_case(name: &str, alpha: f64, terms: usize) -> Result<CaseReport> {
    let (lambda, c) = (1.0, 1.0);
    let mu = 1.0;
    let bessel = HyperBesselOp::bessel_1d;
    let report = match name {
        "kg1d" => {
            let (eq, s) = kg_problem(SolutionKind::HomogPlus, alpha, lambda, c, terms)?;
            verify(&eq, &s)?
        }
        "kg1d-iterate" => {
            let s = kg_plus_series(alpha, lambda, c, terms)?;
            verify(&EquationSpec::new(bessel(), alpha, mu, vec![])?.iterated(3)?, &s)?
        }
        "kg1d-minus" => {
            let (eq, s) = kg_problem(SolutionKind::HomogMinus, alpha, lambda, c, terms)?;
            verify(&eq, &s)?
        }
        "shifted-g" => {
            let (eq, s) = kg_problem(SolutionKind::F, alpha, lambda, c, terms)?;
            verify(&eq, &s)?
        }
        "time-derivative-f" => {
            let bt = time_derivative_bivariate(alpha, lambda, c, terms)?;
            verify_bivariate(alpha, 4f64.powf(alpha), 1.0, &bt, &[(0.3, 0.5), (0.6, 0.4), (0.8, 0.9)])?
        }
        "odd-h" => {
            let (eq, s) = kg_problem(SolutionKind::H, alpha, lambda, c, terms)?;
            verify(&eq, &s)?
        }
        "planar-even" => {
            let s = planar_even_series(alpha, lambda, c, terms)?;
            verify(&EquationSpec::new(HyperBesselOp::bessel_2d(), alpha, mu, vec![])?, &s)?
        }
        "planar-odd" => {
            let s = planar_odd_series(alpha, lambda, c, terms)?;
            let forcing = Term::new(rgamma(-alpha), -alpha - 2.0);
            verify(&EquationSpec::new(HyperBesselOp::bessel_2d(), alpha, mu, vec![forcing])?, &s)?
        }
        "planar-full" => {
            let (eq, s) = kg_problem(SolutionKind::Planar, alpha, lambda, c, terms)?;
            verify(&eq, &s)?
        }
        "projection" => {
            let s = projection_series(alpha, lambda, c, terms)?;
            verify(&EquationSpec::new(bessel(), alpha, mu, projection_forcing(alpha, lambda, c))?, &s)?
        }
        "ndim-1" | "ndim-2" | "ndim-3" | "ndim-5" => {
            let dim: u32 = name[5..].parse().expect("registry name");
            let (eq, s) = kg_problem(SolutionKind::Ndim(dim), alpha, lambda, c, terms)?;
            verify(&eq, &s)?
        }
        "hyper-2" | "hyper-3" | "hyper-4" => {
            let order: u32 = name[6..].parse().expect("registry name");
            let s = hyper_series(order, alpha, terms)?;
            verify(&EquationSpec::new(HyperBesselOp::hyper(order)?, alpha, 1.0, vec![])?, &s)?
        }
        "third-order" => {
            let s = hyper_series(3, alpha, terms)?;
            verify(&EquationSpec::new(HyperBesselOp::third_order(), alpha, 1.0, vec![])?, &s)?
        }
        "cyclic" => {
            let (eq, s) = kg_problem(SolutionKind::ThirdOrder, alpha, lambda, c, terms)?;
            verify(&eq, &s)?
        }
        "epd" => {
            let s = epd_series(alpha, 4.0, terms)?;
            verify(&EquationSpec::new(HyperBesselOp::epd(1.0)?, alpha, 4.0, vec![])?, &s)?
        }
        "factorized-rl" => factorized_rl_report(alpha, lambda, c, terms)?,
        _ => return Err(invalid(format!("unknown case '{name}'; known: {}", CASES.join(", ")))),
    };
    Ok(CaseReport {
        case: name.to_string(),
        alpha,
        passed: report.passed(VERIFY_TOL),
        max_residual: report.max_abs_residual,
        max_pointwise_residual: report.max_pointwise_residual,
        report,
    })
}

/// Forcing of the projection series: the images of its `k = 0` and `k = 1`
/// terms, `4^α w^{-1-2α}/Γ((1-2α)/2)²` and `2^α (λ/c^α) w^{-1-α}/Γ((1-α)/2)²`.
pub fn projection_forcing(alpha: f64, lambda: f64, c: f64) -> Vec<Term> {
    vec![
        Term::new(4f64.powf(alpha) * rgamma(0.5 - alpha).powi(2), -1.0 - 2.0 * alpha),
        Term::new(2f64.powf(alpha) * lambda / c.powf(alpha) * rgamma(0.5 * (1.0 - alpha)).powi(2), -1.0 - alpha),
    ]
}

/// Compares the `w`-space coefficients of the 1D operator with the
/// factorized `4^α ∂^α_{z1} ∂^α_{z2}` on `(z1 z2)^p = w^{2p}`.
fn factorized_rl_report(alpha: f64, lambda: f64, c: f64, terms: usize) -> Result<ResidualReport> {
    let s = kg_plus_series(alpha, lambda, c, terms)?;
    let op = HyperBesselOp::bessel_1d();
    let mut image = Vec::new();
    let mut expected = Vec::new();
    for t in s.terms() {
        let p = 0.5 * t.exponent;
        let a = op_monomial(&op, alpha, t.exponent)?;
        let rl = 4f64.powf(alpha) * rl_coefficient(alpha, p)?.powi(2);
        if a.coefficient != 0.0 {
            image.push(Mono { exps: vec![a.exponent], coeff: t.coeff * a.coefficient, input: Some(vec![t.exponent]) });
        }
        expected.push(Mono { exps: vec![t.exponent - 2.0 * alpha], coeff: t.coeff * rl, input: None });
    }
    let grid: Vec<Vec<f64>> = DEFAULT_GRID.iter().map(|&w| vec![w]).collect();
    Ok(compare(image, expected, Vec::new(), &grid))
}

/// Runs every case at every order of [`SWEEP_ALPHAS`].
pub fn run_all(terms: usize) -> Result<Vec<CaseReport>> {
    let mut out = Vec::new();
    for name in CASES {
        for &a in &SWEEP_ALPHAS {
            out.push(run_case(name, a, terms)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{bessel_i0, bessel_j0, hyper_bessel};

    #[test]
    fn registry_passes() {
        for r in run_all(DEFAULT_TERMS).unwrap() {
            assert!(r.passed, "{} α={}: {} / {}", r.case, r.alpha, r.max_residual, r.max_pointwise_residual);
        }
    }

    #[test]
    fn kg_reductions_at_one() {
        let (x, t): (f64, f64) = (0.3, 1.0);
        let w = (t * t - x * x).sqrt();
        let plus = kg_plus_series(1.0, 1.0, 1.0, 40).unwrap();
        assert!((plus.eval_at(&[x, t]).unwrap() - bessel_i0(w).unwrap()).abs() < 1e-14);
        let minus = kg_minus_series(1.0, 1.0, 1.0, 40).unwrap();
        assert!((minus.eval_at(&[x, t]).unwrap() - bessel_j0(w).unwrap()).abs() < 1e-14);
        // third-order Bessel function of (λ/c) W
        let s = cyclic_series(1.0, 1.0, 1.0, 40).unwrap();
        let (x, y): (f64, f64) = (0.1, 0.05);
        let big_w = ((1.0 + 2.0 * x) * ((1.0 - x) * (1.0 - x) - 3.0 * y * y)).cbrt();
        let v = s.eval_at(&[x, y, 1.0]).unwrap();
        assert!((v - hyper_bessel(3, big_w).unwrap()).abs() < 1e-14, "{v}");
    }

    #[test]
    fn forcing_ledgers() {
        let a = 0.3;
        let r = run_case("planar-odd", a, 40).unwrap().report;
        let row = r.entry_at(-a - 2.0).unwrap();
        assert!((row.matched - rgamma(-a)).abs() < 1e-15);
        assert_eq!(row.input_exponents.as_deref(), Some(&[a - 2.0][..]));

        let r = run_case("projection", 0.5, 40).unwrap();
        assert!(r.passed);
        let row = r.report.entry_at(-2.0);
        // the w^{-1-2α} forcing vanishes at α = 1/2, and so does the image of w^{-1}
        assert!(row.is_none_or(|e| e.output == 0.0 && e.matched == 0.0));

        let r = run_case("shifted-g", 0.7, 40).unwrap().report;
        let row = r.entry_at(0.0).unwrap();
        assert!((row.output - 1.0).abs() < 1e-14);
    }

    #[test]
    fn wrong_forcing_is_detected() {
        let s = projection_series(0.6, 1.0, 1.0, 40).unwrap();
        let printed = vec![
            Term::new(rgamma(0.5 - 0.6).powi(2), -1.0 - 1.2),
            Term::new(rgamma(0.2).powi(2), -1.6),
        ];
        let eq = EquationSpec::new(HyperBesselOp::bessel_1d(), 0.6, 1.0, printed).unwrap();
        assert!(!verify(&eq, &s).unwrap().passed(VERIFY_TOL));
    }

    #[test]
    fn truncation_is_recorded() {
        let r = run_case("kg1d", 0.5, 40).unwrap().report;
        assert_eq!(r.truncated.len(), 1);
        assert!((r.truncated[0].exponents[0] - (2.0 * 0.5 * 39.0 + 2.0 * 0.5 - 2.0)).abs() < 1e-12);
        let r = run_case("kg1d-iterate", 0.5, 40).unwrap().report;
        assert_eq!(r.truncated.len(), 3);
    }

    #[test]
    fn epd_values() {
        assert!((epd_operational(1.0, 1.0, 2.0, 40).unwrap() - 2.279585302336067).abs() < 1e-13);
        let v = epd_operational(0.6, 0.0, 1.5, 40).unwrap();
        assert!((v - 1.5f64.powf(2.0 * 0.6 - 2.0) / gamma(0.6).unwrap().powi(2)).abs() < 1e-14);
        assert!((epd_operational(1.0, 0.0, 3.0, 40).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn noncommutation() {
        let one = SeriesSolution::new(vec![Term::new(1.0, 0.0)], VariableMap::Identity).unwrap();
        let w = noncommutation_witness(0.5, &one, 1.0).unwrap();
        assert!((w.boundary_term - 0.5641895835477563).abs() < 1e-15);
        assert!((w.commutator - rgamma(-0.5)).abs() < 1e-15);
        let lin = SeriesSolution::new(vec![Term::new(1.0, 1.0)], VariableMap::Identity).unwrap();
        let w = noncommutation_witness(0.5, &lin, 0.7).unwrap();
        assert_eq!(w.boundary_term, 0.0);
        assert!(w.commutator.abs() < 1e-14);
        // G as a function of z1 with z2 = 0.8: exponents αk, k >= 1
        let a = 0.7;
        let z2: f64 = 0.8;
        let g = SeriesSolution::new(
            (1..30)
                .map(|k| {
                    let kf = k as f64;
                    Term::new(
                        (0.5f64.powf(2.0 * a * kf)) * z2.powf(a * kf) * rgamma(a * kf + 1.0).powi(2),
                        a * kf,
                    )
                })
                .collect(),
            VariableMap::Identity,
        )
        .unwrap();
        let w = noncommutation_witness(a, &g, 0.6).unwrap();
        assert_eq!(w.boundary_term, 0.0);
        assert!(w.commutator.abs() < 1e-13);
    }

    #[test]
    fn cyclic_map_needs_two_x() {
        for p in [[0.1, 0.05, 1.0], [-0.2, 0.1, 0.8], [0.05, -0.3, 1.2]] {
            assert!(cyclic_chain_rule_residual(2.0, 1.0, 1.0, p).unwrap() < 1e-12);
            assert!(cyclic_chain_rule_residual(3.0, 1.0, 1.0, p).unwrap() > 1e-3);
        }
    }

    #[test]
    fn cartesian_reports() {
        let pts = vec![vec![0.3, 1.0], vec![-0.5, 0.9], vec![2.0, 1.0]];
        let r = verify_kg_cartesian(0.5, 1.0, 1.0, SolutionKind::HomogPlus, &pts, 40).unwrap();
        assert!(r.report.passed(VERIFY_TOL));
        assert!(r.points[2].error.is_some());
        let r = verify_kg_cartesian(1.0, 1.0, 1.0, SolutionKind::F, &pts[..2], 40).unwrap();
        assert!(r.report.passed(VERIFY_TOL));
        // F = (1/2c) ∂_t I_0((λ/c)√(c²t² - x²)) = t I_1(w)/(2w) at λ = c = 1
        let (x, t): (f64, f64) = (0.3, 1.0);
        let w = (t * t - x * x).sqrt();
        let expect = t * crate::specfun::bessel_i1(w).unwrap() / (2.0 * w);
        assert!((r.points[0].value.unwrap() - expect).abs() < 1e-14);
        let r = verify_kg_cartesian(0.7, 1.0, 1.0, SolutionKind::ThirdOrder, &[vec![0.1, 0.05, 1.0]], 40).unwrap();
        assert!(r.report.passed(VERIFY_TOL));
    }

    #[test]
    fn factorized_matches_random() {
        let r = factorized_rl_report(0.43, 1.0, 1.0, 10).unwrap();
        assert!(r.max_abs_residual < 1e-13);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(10))]
        #[test]
        fn factorized_rl_identity(alpha in 0.05f64..1.0, k in 0u32..30) {
            // (z1 z2)^{αk+α-1} = w^{2αk+2α-2}
            let p = alpha * k as f64 + alpha - 1.0;
            let w_side = op_monomial(&HyperBesselOp::bessel_1d(), alpha, 2.0 * p).unwrap().coefficient;
            let z_side = 4f64.powf(alpha) * rl_coefficient(alpha, p).unwrap().powi(2);
            proptest::prop_assert!(rel(w_side, z_side) < 1e-12, "{} vs {}", w_side, z_side);
        }
    }
}
