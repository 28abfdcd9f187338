//! Goodness-of-fit statistics and tabulated analytic CDFs.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Result};
use crate::quad::tanh_sinh;

/// One-sample Kolmogorov–Smirnov distance.
///
/// `cdf(v)` returns `(F(v-), F(v))` so that laws with atoms are handled
/// exactly. `samples` need not be sorted.
pub fn ks_statistic<F: Fn(f64) -> (f64, f64)>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let v = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == v {
            j += 1;
        }
        let (below, at) = cdf(v);
        d = d.max((below - i as f64 / n).abs()).max((at - j as f64 / n).abs());
        i = j;
    }
    d
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Pearson chi-square test outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Chi-square goodness of fit of integer draws against `probs` on the
/// categories `0..probs.len()-1`; the last category pools everything at or
/// above `probs.len() - 1` with the remaining probability mass.
pub fn chi_square_counts(draws: &[u64], probs: &[f64]) -> Result<ChiSquareTest> {
    if probs.len() < 2 {
        return Err(invalid("chi-square needs at least two categories"));
    }
    let k = probs.len();
    let mut observed = vec![0usize; k];
    for &d in draws {
        observed[(d as usize).min(k - 1)] += 1;
    }
    let mut expected: Vec<f64> = probs.to_vec();
    let head: f64 = expected[..k - 1].iter().sum();
    expected[k - 1] = (1.0 - head).max(0.0);
    let n = draws.len() as f64;
    let statistic = observed
        .iter()
        .zip(&expected)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&o, &p)| {
            let e = n * p;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dof = expected.iter().filter(|&&p| p > 0.0).count() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| invalid(e.to_string()))?;
    Ok(ChiSquareTest { statistic, dof, p_value: 1.0 - dist.cdf(statistic) })
}

/// Rayleigh test of uniformity for angles; returns `(Z, p-value)` using
/// Zar's approximation to the null distribution.
pub fn rayleigh_test(angles: &[f64]) -> (f64, f64) {
    let n = angles.len() as f64;
    let (s, c) = angles.iter().fold((0.0, 0.0), |(s, c), a| (s + a.sin(), c + a.cos()));
    let r = (s * s + c * c).sqrt();
    let z = r * r / n;
    let p = ((1.0 + 4.0 * n + 4.0 * (n * n - r * r)).sqrt() - (1.0 + 2.0 * n)).exp();
    (z, p.min(1.0))
}

/// Cumulative integral `G(s) = ∫_0^s g` tabulated on a grid clustered at
/// `s = 0`, where `g` may have an integrable singularity.
///
/// `g` receives the exact distance from 0, which is where the laws in this
/// crate are singular (the boundary of the support).
#[derive(Debug, Clone)]
pub struct CumulativeTable {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl CumulativeTable {
    pub fn build<G: Fn(f64) -> f64>(g: G, length: f64, cells: usize) -> Result<Self> {
        if !(length > 0.0) || cells == 0 {
            return Err(invalid("cumulative table needs a positive length and cell count"));
        }
        let grid: Vec<f64> = (0..=cells).map(|i| length * (i as f64 / cells as f64).powi(4)).collect();
        let mut values = Vec::with_capacity(cells + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            let q = tanh_sinh(|s, _, _| g(s), a, b, 1e-13)?;
            acc += q.value;
            values.push(acc);
        }
        Ok(Self { grid, values })
    }

    /// `G(s)` by linear interpolation, clamped to the table range.
    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let last = self.grid.len() - 1;
        if s >= self.grid[last] {
            return self.values[last];
        }
        let i = self.grid.partition_point(|&g| g <= s) - 1;
        let (a, b) = (self.grid[i], self.grid[i + 1]);
        let f = (s - a) / (b - a);
        self.values[i] + f * (self.values[i + 1] - self.values[i])
    }

    pub fn total(&self) -> f64 {
        *self.values.last().expect("non-empty")
    }
}
