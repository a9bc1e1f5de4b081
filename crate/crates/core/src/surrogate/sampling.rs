//! Latin-hypercube sampling on the unit cube.

use rand::seq::SliceRandom;
use rand::Rng;

/// `n` points in `[0, 1)^D`, one per stratum `[k/n, (k+1)/n)` along every axis.
pub fn latin_hypercube<const D: usize, R: Rng>(n: usize, rng: &mut R) -> Vec<[f64; D]> {
    let mut points = vec![[0.0; D]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for axis in 0..D {
        strata.shuffle(rng);
        for (point, &k) in points.iter_mut().zip(&strata) {
            point[axis] = (k as f64 + rng.random::<f64>()) / n as f64;
        }
    }
    points
}

/// One-sample Kolmogorov–Smirnov statistic against the uniform law on `[0, 1]`.
pub fn ks_uniform(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            (x - i as f64 / n).max((i + 1) as f64 / n - x)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_point_per_stratum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = latin_hypercube::<4, _>(50, &mut rng);
        for axis in 0..4 {
            let mut seen = [false; 50];
            for p in &pts {
                seen[(p[axis] * 50.0) as usize] = true;
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn ks_of_exact_quantiles() {
        let q: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
        assert!((ks_uniform(&q) - 0.05).abs() < 1e-15);
    }
}
