//! One-sample Kolmogorov-Smirnov statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Terms summed in the Kolmogorov series.
const SERIES_TERMS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    /// `sup |F_emp - F|`.
    pub ks_statistic: f64,
    pub sample_count: usize,
    /// `P(K > sqrt(n) D)` for the limiting Kolmogorov distribution `K`.
    pub p_value_asymptotic: f64,
}

impl GofReport {
    fn new(ks_statistic: f64, sample_count: usize) -> Self {
        let lambda = (sample_count as f64).sqrt() * ks_statistic;
        GofReport {
            ks_statistic,
            sample_count,
            p_value_asymptotic: kolmogorov_sf(lambda),
        }
    }

    /// `sqrt(n) D`, the quantity compared against Kolmogorov critical values.
    pub fn scaled_statistic(&self) -> f64 {
        (self.sample_count as f64).sqrt() * self.ks_statistic
    }

    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value_asymptotic > alpha
    }
}

/// Survival function of the Kolmogorov distribution.
///
/// Uses `2 sum (-1)^(k-1) exp(-2 k^2 x^2)` for `x >= 1` and the equivalent
/// theta-function form `1 - sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / (8 x^2))`
/// below, each truncated at 100 terms.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let p = if x >= 1.0 {
        let mut sum = 0.0;
        for k in 1..=SERIES_TERMS {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * x * x).exp();
            sum += if k % 2 == 1 { term } else { -term };
        }
        2.0 * sum
    } else {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let mut sum = 0.0;
        for k in 1..=SERIES_TERMS {
            let odd = (2 * k - 1) as f64;
            sum += (-odd * odd * pi2 / (8.0 * x * x)).exp();
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * sum
    };
    p.clamp(0.0, 1.0)
}

/// KS test of `samples` against a continuous reference CDF.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<GofReport> {
    if samples.is_empty() {
        return Err(Error::invalid("KS test needs at least one sample"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("KS samples contain NaN"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    // Walk distinct values so ties are handled as jumps of the empirical CDF.
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max(j as f64 / n - f);
        i = j;
    }
    Ok(GofReport::new(d.clamp(0.0, 1.0), sorted.len()))
}

/// Reference distribution of a grid-rounded time: `P(K <= k)` is taken as
/// `F((k + 1/2) / steps)` for `k < steps`, and 1 at `k = steps`.
pub fn grid_reference<F: Fn(f64) -> f64>(steps: usize, cdf: F) -> Vec<f64> {
    let mut g: Vec<f64> = (0..steps)
        .map(|k| cdf((k as f64 + 0.5) / steps as f64))
        .collect();
    g.push(1.0);
    g
}

/// KS test for samples restricted to the grid `k / steps`, against the
/// discrete reference `reference[k] = P(K <= k)` (length `steps + 1`).
///
/// Both CDFs are step functions with jumps on the grid, so the supremum is a
/// maximum over grid indices.
pub fn ks_test_grid(samples: &[f64], steps: usize, reference: &[f64]) -> Result<GofReport> {
    if samples.is_empty() {
        return Err(Error::invalid("KS test needs at least one sample"));
    }
    if reference.len() != steps + 1 {
        return Err(Error::invalid(format!(
            "grid reference has {} entries, expected {}",
            reference.len(),
            steps + 1
        )));
    }
    let mut counts = vec![0u64; steps + 1];
    for &t in samples {
        let scaled = t * steps as f64;
        let k = scaled.round();
        if !(0.0..=steps as f64).contains(&k) || (scaled - k).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "sample {t} is not on the grid of {steps} steps"
            )));
        }
        counts[k as usize] += 1;
    }
    let n = samples.len() as f64;
    let mut cumulative = 0u64;
    let mut d = 0.0f64;
    for (c, g) in counts.iter().zip(reference) {
        cumulative += c;
        d = d.max((cumulative as f64 / n - g).abs());
    }
    Ok(GofReport::new(d.clamp(0.0, 1.0), samples.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Substream;
    use rand_core::RngCore;

    fn uniforms(seed: u64, n: usize) -> Vec<f64> {
        let mut s = Substream::new(seed, 0);
        (0..n)
            .map(|_| (s.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
            .collect()
    }

    #[test]
    fn kolmogorov_critical_values() {
        // Tabulated: P(K > 1.6276) = 0.01, P(K > 1.3581) = 0.05.
        assert!((kolmogorov_sf(1.627_6) - 0.01).abs() < 1e-4);
        assert!((kolmogorov_sf(1.358_1) - 0.05).abs() < 1e-4);
        // Both series forms agree where they meet.
        let pi2 = std::f64::consts::PI.powi(2);
        let theta: f64 = 1.0
            - (2.0 * std::f64::consts::PI).sqrt()
                * (1..=100)
                    .map(|k| (-((2 * k - 1) as f64).powi(2) * pi2 / 8.0).exp())
                    .sum::<f64>();
        assert!((kolmogorov_sf(1.0) - theta).abs() < 1e-12);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
        assert!(kolmogorov_sf(0.2) > 0.999_999);
    }

    #[test]
    fn uniform_samples_pass_in_most_seeds() {
        let mut passes = 0;
        for seed in 0..200 {
            let r = ks_test(&uniforms(seed, 10_000), |x| x.clamp(0.0, 1.0)).unwrap();
            if r.scaled_statistic() < 1.63 {
                passes += 1;
            }
        }
        assert!(passes >= 198, "{passes}/200");
    }

    #[test]
    fn constant_samples_fail() {
        let r = ks_test(&[0.3; 50], |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(r.ks_statistic >= 0.5);
        assert!(!r.passes(0.01));
    }

    #[test]
    fn statistic_invariant_under_monotone_map() {
        let u = uniforms(3, 500);
        let a = ks_test(&u, |x| x.clamp(0.0, 1.0)).unwrap();
        let v: Vec<f64> = u.iter().map(|x| x.powi(3) + 2.0).collect();
        let b = ks_test(&v, |y| (y - 2.0).clamp(0.0, 1.0).cbrt()).unwrap();
        assert!((a.ks_statistic - b.ks_statistic).abs() < 1e-12);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(ks_test(&[], |x| x).is_err());
        assert!(ks_test_grid(&[], 4, &[0.2, 0.4, 0.6, 0.8, 1.0]).is_err());
    }

    #[test]
    fn grid_test_exact_reference_gives_zero() {
        // Four samples on each of k = 0..3, reference P(K <= k) = (k+1)/4.
        let samples: Vec<f64> = (0..16).map(|i| (i % 4) as f64 / 4.0).collect();
        let reference = [0.25, 0.5, 0.75, 1.0, 1.0];
        let r = ks_test_grid(&samples, 4, &reference).unwrap();
        assert!(r.ks_statistic < 1e-15);
        assert!(ks_test_grid(&[0.3], 4, &reference).is_err());
        assert!(ks_test_grid(&[0.25], 4, &reference[..4]).is_err());
    }

    #[test]
    fn grid_reference_uses_cell_midpoints() {
        let g = grid_reference(4, |t| t);
        assert_eq!(g, vec![0.125, 0.375, 0.625, 0.875, 1.0]);
    }
}
