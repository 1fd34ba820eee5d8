//! Poisson variates with a pinned algorithm so that seeds are portable:
//! sequential inversion below mean 30, Hörmann's PTRS transformed rejection
//! at and above it.

use rand::Rng;

const INVERSION_LIMIT: f64 = 30.0;

/// ln k! (exact table below 10, Stirling series above).
pub fn log_factorial(k: u64) -> f64 {
    const TABLE: [f64; 10] = [
        0.0,
        0.0,
        std::f64::consts::LN_2,
        1.791_759_469_228_055,
        3.178_053_830_347_945_6,
        4.787_491_742_782_046,
        6.579_251_212_010_101,
        8.525_161_361_065_415,
        10.604_602_902_745_25,
        12.801_827_480_081_469,
    ];
    if k < 10 {
        return TABLE[k as usize];
    }
    let n = k as f64 + 1.0;
    let inv = 1.0 / n;
    let inv2 = inv * inv;
    (n - 0.5) * n.ln() - n
        + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// Draws one Poisson(`mean`) variate.
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    assert!(mean >= 0.0 && mean.is_finite(), "Poisson mean must be finite and nonnegative");
    if mean == 0.0 {
        0
    } else if mean < INVERSION_LIMIT {
        inversion(rng, mean)
    } else {
        ptrs(rng, mean)
    }
}

fn inversion<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
        if p < 1e-300 && cdf < u {
            // Tail exhausted by rounding; u lies beyond the representable cdf.
            break;
        }
    }
    k
}

fn ptrs<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        if lhs <= -mean + k * loglam - log_factorial(k as u64) {
            return k as u64;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn log_factorial_matches_direct_sum() {
        let mut acc = 0.0;
        for k in 1..200u64 {
            acc += (k as f64).ln();
            assert!((log_factorial(k) - acc).abs() < 1e-10 * acc.max(1.0), "k={k}");
        }
    }

    fn moments(mean: f64, draws: usize) -> (f64, f64) {
        let mut r = rng::stream(11, 0);
        let xs: Vec<f64> = (0..draws).map(|_| poisson(&mut r, mean) as f64).collect();
        let m = xs.iter().sum::<f64>() / draws as f64;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (draws - 1) as f64;
        (m, v)
    }

    #[test]
    fn both_regimes_have_poisson_moments() {
        for mean in [0.5, 4.0, 29.5, 30.0, 100.0, 10_000.0] {
            let draws = 40_000;
            let (m, v) = moments(mean, draws);
            let se = (mean / draws as f64).sqrt();
            assert!((m - mean).abs() < 4.0 * se, "mean {mean}: got {m}");
            assert!((v / mean - 1.0).abs() < 0.05, "mean {mean}: variance {v}");
        }
    }

    #[test]
    fn small_mean_pmf() {
        // Frequencies of 0..4 at mean 2 against the exact pmf.
        let mut r = rng::stream(5, 0);
        let draws = 100_000;
        let mut counts = [0usize; 5];
        for _ in 0..draws {
            let k = poisson(&mut r, 2.0) as usize;
            if k < 5 {
                counts[k] += 1;
            }
        }
        for (k, c) in counts.iter().enumerate() {
            let p = (-2.0f64).exp() * 2f64.powi(k as i32) / (1..=k).product::<usize>().max(1) as f64;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((*c as f64 / draws as f64 - p).abs() < 4.0 * se, "k={k}");
        }
    }

    #[test]
    fn zero_mean_is_zero() {
        let mut r = rng::stream(1, 0);
        assert_eq!(poisson(&mut r, 0.0), 0);
    }
}
