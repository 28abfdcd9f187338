//! Random-stream plumbing and the elementary variates used by the samplers.
//!
//! Parallel draws are split into fixed-size blocks; block `i` always uses
//! ChaCha stream `i` of the master seed, so output is identical for any
//! worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::error::{invalid, Result};

/// Draws per block in [`sample_parallel`].
pub const BLOCK_SIZE: usize = 8192;

/// Random stream number `stream` of the master `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `count` values with `workers` threads; the result depends only on
/// `(seed, count, draw)`.
pub fn sample_parallel<T, F>(count: usize, seed: u64, workers: usize, draw: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    if workers == 0 {
        return Err(invalid("worker count must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    let blocks = count.div_ceil(BLOCK_SIZE);
    let chunks: Vec<Vec<T>> = pool.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = stream_rng(seed, b as u64);
                let len = BLOCK_SIZE.min(count - b * BLOCK_SIZE);
                (0..len).map(|_| draw(&mut rng)).collect()
            })
            .collect()
    });
    Ok(chunks.into_iter().flatten().collect())
}

/// Gamma(shape, 1) variate.
pub fn gamma_variate<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    Gamma::new(shape, 1.0).expect("positive shape").sample(rng)
}

/// Beta(a, b) variate as `X / (X + Y)` with independent Gamma variates.
pub fn beta_variate<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    let ga = Gamma::new(a, 1.0).expect("positive shape");
    let gb = Gamma::new(b, 1.0).expect("positive shape");
    loop {
        let x = ga.sample(rng);
        let y = gb.sample(rng);
        let s = x + y;
        if s > 0.0 && s.is_finite() {
            return x / s;
        }
    }
}

/// A pair of independent standard normals by the Marsaglia polar method.
pub fn normal_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    loop {
        let u = 2.0 * rng.random::<f64>() - 1.0;
        let v = 2.0 * rng.random::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            let f = (-2.0 * s.ln() / s).sqrt();
            return (u * f, v * f);
        }
    }
}

/// Uniform direction on the unit sphere `S^{dim-1}` from normalized normals.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let mut v = Vec::with_capacity(dim + 1);
        while v.len() < dim {
            let (a, b) = normal_pair(rng);
            v.push(a);
            v.push(b);
        }
        v.truncate(dim);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
            return v;
        }
    }
}

/// Uniform angle on `[0, 2π)`.
pub fn uniform_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    std::f64::consts::TAU * rng.random::<f64>()
}

/// `±1` with equal probability.
pub fn random_sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random::<bool>() { 1.0 } else { -1.0 }
}
