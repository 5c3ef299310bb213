//! Discrete Hölder quotients and `C^τ` norms.

use super::GridFunction;
use crate::error::{Error, Result};
use crate::multi;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Which node pairs enter a Hölder quotient.
#[derive(Clone, Debug)]
pub enum PairSample {
    /// Every pair with separation at most `max_sep`.
    All { max_sep: f64 },
    /// `count` random pairs (seeded), separation at most `max_sep`.
    Random { count: usize, seed: u64, max_sep: f64 },
    Explicit(Vec<(usize, usize)>),
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// `max |u(x) - u(y)| / |x - y|^σ` over sampled pairs of `points`.
pub fn hoelder_quotient_points(points: &[Vec<f64>], values: &[Complex64], sigma: f64, sample: &PairSample) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Argument(format!("Hölder order must lie in (0,1), got {sigma}")));
    }
    let n = points.len();
    let quotient = |i: usize, j: usize| -> f64 {
        let d = dist(&points[i], &points[j]);
        if d == 0.0 {
            0.0
        } else {
            (values[i] - values[j]).norm() / d.powf(sigma)
        }
    };
    let mut best: f64 = 0.0;
    let mut seen = false;
    match sample {
        PairSample::All { max_sep } => {
            for i in 0..n {
                for j in i + 1..n {
                    if dist(&points[i], &points[j]) <= *max_sep {
                        seen = true;
                        best = best.max(quotient(i, j));
                    }
                }
            }
        }
        PairSample::Random { count, seed, max_sep } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            if n >= 2 {
                for _ in 0..*count {
                    let i = rng.gen_range(0..n);
                    let j = rng.gen_range(0..n);
                    if i != j && dist(&points[i], &points[j]) <= *max_sep {
                        seen = true;
                        best = best.max(quotient(i, j));
                    }
                }
            }
        }
        PairSample::Explicit(pairs) => {
            for &(i, j) in pairs {
                if i >= n || j >= n {
                    return Err(Error::Argument("pair index out of range".into()));
                }
                seen = true;
                best = best.max(quotient(i, j));
            }
        }
    }
    if !seen {
        return Err(Error::Argument("empty pair sample".into()));
    }
    Ok(best)
}

/// Hölder quotient of a grid function over node pairs (plain, unwrapped
/// distances). Only nodes where `keep` is true take part.
pub fn hoelder_quotient(u: &GridFunction, sigma: f64, sample: &PairSample, keep: Option<&[bool]>) -> Result<f64> {
    let idx: Vec<usize> = (0..u.grid.len()).filter(|&i| keep.map_or(true, |k| k[i])).collect();
    let points: Vec<Vec<f64>> = idx.iter().map(|&i| u.grid.node(i)).collect();
    let values: Vec<Complex64> = idx.iter().map(|&i| u.values[i]).collect();
    hoelder_quotient_points(&points, &values, sigma, sample)
}

/// Discrete `C^τ` norm on a point set: the largest sup norm of `∂^β f` over
/// `|β| <= ⌊τ⌋`, plus the largest Hölder quotient of order `τ - ⌊τ⌋` of the
/// top derivatives over pairs at distance at most `max_sep`. The callback
/// returns `∂^β f` at point `i`.
pub fn ctau_norm_points<F>(points: &[Vec<f64>], tau: f64, max_sep: f64, deriv: F) -> f64
where
    F: Fn(usize, &[usize]) -> Complex64,
{
    let dim = points.first().map_or(1, |p| p.len());
    let k = if tau.is_finite() { tau.floor() as usize } else { 2 };
    let sigma = if tau.is_finite() { tau - tau.floor() } else { 0.0 };
    let mut sup: f64 = 0.0;
    let mut top: Vec<Vec<Complex64>> = Vec::new();
    for beta in multi::up_to(dim, k) {
        let vals: Vec<Complex64> = (0..points.len()).map(|i| deriv(i, &beta)).collect();
        sup = sup.max(vals.iter().map(|v| v.norm()).fold(0.0, f64::max));
        if multi::order(&beta) == k {
            top.push(vals);
        }
    }
    if sigma <= 0.0 || points.len() < 2 {
        return sup;
    }
    let sample = PairSample::All { max_sep };
    let hq = top
        .iter()
        .map(|vals| hoelder_quotient_points(points, vals, sigma, &sample).unwrap_or(0.0))
        .fold(0.0, f64::max);
    sup + hq
}
