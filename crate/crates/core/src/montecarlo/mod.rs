//! Replicated simulation experiments over ensembles of motions and bridges.
//!
//! Replicate `r` of an [`EnsembleSpec`] draws its paths from substreams
//! derived from `(master_seed, r)`, so every replicate is a pure function of
//! the spec and its index. Replicates are spread over a rayon pool in
//! contiguous index ranges and reduced in index order; the worker count never
//! changes a result.

mod ks;
mod stats;

pub use ks::{grid_reference, kolmogorov_sf, ks_test, ks_test_grid, GofReport};
pub use stats::{normal_cdf, normal_quantile, two_sided_z, Welford};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, ConvexPolygon};
use crate::process_sim::{combined_argmax, EnsembleSpec, Winner};

pub const DEFAULT_CI_LEVEL: f64 = 0.99;
pub const DEFAULT_REPS: u64 = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    Perimeter,
    Area,
}

impl Functional {
    pub fn of(self, hull: &ConvexPolygon) -> f64 {
        match self {
            Functional::Perimeter => hull.perimeter(),
            Functional::Area => hull.area(),
        }
    }
}

/// Monte Carlo mean with a normal confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub reps: u64,
    pub ci_level: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub spec: EnsembleSpec,
}

impl Estimate {
    /// Streams `values` in order through Welford's update.
    pub fn from_values(values: &[f64], ci_level: f64, spec: EnsembleSpec) -> Self {
        let mut w = Welford::new();
        w.extend(values.iter().copied());
        let z = two_sided_z(ci_level);
        let (mean, se) = (w.mean(), w.std_error());
        Estimate {
            mean,
            std_error: se,
            reps: w.count(),
            ci_level,
            ci_low: mean - z * se,
            ci_high: mean + z * se,
            spec,
        }
    }

    /// True when `target` lies within `max(k * SE, rel * |target|)` of the mean.
    pub fn within(&self, target: f64, k_se: f64, rel: f64) -> bool {
        (self.mean - target).abs() <= self.band(target, k_se, rel)
    }

    pub fn band(&self, target: f64, k_se: f64, rel: f64) -> f64 {
        (k_se * self.std_error).max(rel * target.abs())
    }
}

/// Two-point extrapolation in the grid size assuming a bias proportional to
/// `sqrt(1/steps)`: with `r = fine.steps / coarse.steps`,
/// `L = (sqrt(r) fine - coarse) / (sqrt(r) - 1)`.
///
/// The two estimates are treated as independent for the standard error.
pub fn richardson_sqrt_step(coarse: &Estimate, fine: &Estimate) -> Result<Estimate> {
    if fine.spec.steps <= coarse.spec.steps {
        return Err(Error::invalid(
            "fine estimate must use more steps than the coarse one",
        ));
    }
    let q = (fine.spec.steps as f64 / coarse.spec.steps as f64).sqrt();
    let mean = (q * fine.mean - coarse.mean) / (q - 1.0);
    let se = ((q * fine.std_error).powi(2) + coarse.std_error.powi(2)).sqrt() / (q - 1.0);
    let z = two_sided_z(fine.ci_level);
    Ok(Estimate {
        mean,
        std_error: se,
        reps: fine.reps.min(coarse.reps),
        ci_level: fine.ci_level,
        ci_low: mean - z * se,
        ci_high: mean + z * se,
        spec: fine.spec,
    })
}

/// Perimeter and area of the pooled hull of each replicate, in replicate order.
#[derive(Debug, Clone, PartialEq)]
pub struct HullSamples {
    pub spec: EnsembleSpec,
    pub perimeter: Vec<f64>,
    pub area: Vec<f64>,
}

impl HullSamples {
    pub fn values(&self, functional: Functional) -> &[f64] {
        match functional {
            Functional::Perimeter => &self.perimeter,
            Functional::Area => &self.area,
        }
    }
}

/// Argmax times of the combined first-coordinate maximum, one per replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgmaxSamples {
    pub spec: EnsembleSpec,
    pub times: Vec<f64>,
    pub bm_wins: u64,
    pub bb_wins: u64,
}

impl ArgmaxSamples {
    pub fn bm_fraction(&self) -> f64 {
        self.bm_wins as f64 / self.times.len() as f64
    }

    pub fn bb_fraction(&self) -> f64 {
        self.bb_wins as f64 / self.times.len() as f64
    }

    /// Binomial standard error of [`Self::bm_fraction`].
    pub fn bm_fraction_std_error(&self) -> f64 {
        let p = self.bm_fraction();
        (p * (1.0 - p) / self.times.len() as f64).sqrt()
    }
}

/// Per-replicate observations of the combined maximum `M` and of `M'`, the
/// second coordinate of the winning path at the argmax grid index.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSamples {
    pub spec: EnsembleSpec,
    pub max_value: Vec<f64>,
    pub derivative: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimates {
    pub m1: Estimate,
    pub m2: Estimate,
    pub mprime2: Estimate,
}

/// Runs replicated experiments on a fixed-size worker pool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harness {
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
    pub ci_level: f64,
}

impl Default for Harness {
    fn default() -> Self {
        Harness {
            workers: None,
            ci_level: DEFAULT_CI_LEVEL,
        }
    }
}

impl Harness {
    pub fn with_workers(workers: usize) -> Self {
        Harness {
            workers: Some(workers),
            ..Self::default()
        }
    }

    /// Evaluates `f` for every replicate index and returns the results in
    /// index order.
    pub fn map_replicates<T, F>(&self, reps: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64) -> Result<T> + Sync + Send,
    {
        if self.workers == Some(0) {
            return Err(Error::invalid("worker count must be positive"));
        }
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(w) = self.workers {
            builder = builder.num_threads(w);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
        pool.install(|| {
            (0..reps as usize)
                .into_par_iter()
                .with_min_len(64)
                .map(|r| f(r as u64))
                .collect()
        })
    }

    pub fn hull_samples(&self, spec: &EnsembleSpec, reps: u64) -> Result<HullSamples> {
        spec.validate()?;
        if reps < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 replicates, got {reps}"
            )));
        }
        let pairs = self.map_replicates(reps, |r| {
            let ensemble = spec.sample_replicate(r)?;
            let hull = convex_hull(&ensemble.all_points())?;
            Ok((hull.perimeter(), hull.area()))
        })?;
        let (perimeter, area) = pairs.into_iter().unzip();
        Ok(HullSamples {
            spec: *spec,
            perimeter,
            area,
        })
    }

    /// Mean of a hull functional over `reps` replicates.
    pub fn estimate_hull_functional(
        &self,
        spec: &EnsembleSpec,
        reps: u64,
        functional: Functional,
    ) -> Result<Estimate> {
        let samples = self.hull_samples(spec, reps)?;
        Ok(self.estimate(samples.values(functional), spec))
    }

    pub fn estimate(&self, values: &[f64], spec: &EnsembleSpec) -> Estimate {
        Estimate::from_values(values, self.ci_level, *spec)
    }

    pub fn sample_argmax_times(&self, spec: &EnsembleSpec, reps: u64) -> Result<ArgmaxSamples> {
        spec.validate()?;
        if reps < 1 {
            return Err(Error::invalid("need at least 1 replicate"));
        }
        let records = self.map_replicates(reps, |r| {
            let e = spec.sample_replicate(r)?;
            combined_argmax(&e.bm, &e.bb)
        })?;
        let bm_wins = records
            .iter()
            .filter(|r| matches!(r.winner, Winner::Bm(_)))
            .count() as u64;
        Ok(ArgmaxSamples {
            spec: *spec,
            times: records.iter().map(|r| r.time).collect(),
            bm_wins,
            bb_wins: reps - bm_wins,
        })
    }

    pub fn moment_samples(&self, spec: &EnsembleSpec, reps: u64) -> Result<MomentSamples> {
        spec.validate()?;
        if spec.counts.bm() != 1 || spec.counts.bb() != 1 {
            return Err(Error::invalid(
                "moment estimates are defined for one motion and one bridge (m = n = 1)",
            ));
        }
        if reps < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 replicates, got {reps}"
            )));
        }
        let pairs = self.map_replicates(reps, |r| {
            let e = spec.sample_replicate(r)?;
            let rec = combined_argmax(&e.bm, &e.bb)?;
            let path = match rec.winner {
                Winner::Bm(i) => &e.bm[i],
                Winner::Bb(j) => &e.bb[j],
            };
            Ok((rec.max_value, path.points()[rec.grid_index].y))
        })?;
        let (max_value, derivative) = pairs.into_iter().unzip();
        Ok(MomentSamples {
            spec: *spec,
            max_value,
            derivative,
        })
    }

    /// Estimates `E[M]`, `E[M^2]` and `E[(M')^2]` for one motion and one bridge.
    pub fn estimate_m_moments(&self, spec: &EnsembleSpec, reps: u64) -> Result<MomentEstimates> {
        let s = self.moment_samples(spec, reps)?;
        let squares: Vec<f64> = s.max_value.iter().map(|m| m * m).collect();
        let dsquares: Vec<f64> = s.derivative.iter().map(|d| d * d).collect();
        Ok(MomentEstimates {
            m1: self.estimate(&s.max_value, spec),
            m2: self.estimate(&squares, spec),
            mprime2: self.estimate(&dsquares, spec),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process_sim::{sample_bb, sample_bm};

    #[test]
    fn estimate_from_values() {
        let spec = EnsembleSpec::new(1, 0, 2, 0).unwrap();
        let e = Estimate::from_values(&[1.0, 2.0, 3.0, 4.0], 0.99, spec);
        assert_eq!(e.mean, 2.5);
        let se = (5.0f64 / 3.0 / 4.0).sqrt();
        assert!((e.std_error - se).abs() < 1e-15);
        assert!((e.ci_high - e.mean - 2.575_829_303_548_9 * se).abs() < 1e-9);
        assert!(e.within(2.5 + 2.0 * se, 3.0, 0.0));
        assert!(!e.within(2.5 + 4.0 * se, 3.0, 0.0));
        assert!(e.within(2.6, 0.0, 0.05));
    }

    #[test]
    fn richardson_removes_exact_sqrt_bias() {
        let coarse_spec = EnsembleSpec::new(1, 0, 100, 0).unwrap();
        let fine_spec = EnsembleSpec::new(1, 0, 400, 0).unwrap();
        let mk = |mean, spec| Estimate {
            mean,
            std_error: 0.01,
            reps: 10,
            ci_level: 0.99,
            ci_low: mean,
            ci_high: mean,
            spec,
        };
        // L = 5, bias 3 sqrt(1/steps).
        let coarse = mk(5.0 - 3.0 / 10.0, coarse_spec);
        let fine = mk(5.0 - 3.0 / 20.0, fine_spec);
        let r = richardson_sqrt_step(&coarse, &fine).unwrap();
        assert!((r.mean - 5.0).abs() < 1e-12);
        assert!((r.std_error - (0.0004f64 + 0.0001).sqrt()).abs() < 1e-12);
        assert!(richardson_sqrt_step(&fine, &coarse).is_err());
    }

    #[test]
    fn parameter_validation() {
        let h = Harness::default();
        let spec = EnsembleSpec::new(1, 0, 16, 0).unwrap();
        assert!(h.hull_samples(&spec, 1).is_err());
        assert!(h.sample_argmax_times(&spec, 0).is_err());
        assert!(h.estimate_m_moments(&spec, 10).is_err());
        assert!(Harness::with_workers(0).hull_samples(&spec, 4).is_err());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let spec = EnsembleSpec::new(1, 2, 64, 1234).unwrap();
        let a = Harness::with_workers(1).hull_samples(&spec, 300).unwrap();
        let b = Harness::with_workers(3).hull_samples(&spec, 300).unwrap();
        assert_eq!(a, b);
        let ea = Harness::with_workers(1)
            .estimate_hull_functional(&spec, 300, Functional::Area)
            .unwrap();
        let eb = Harness::with_workers(4)
            .estimate_hull_functional(&spec, 300, Functional::Area)
            .unwrap();
        assert_eq!(ea.mean.to_bits(), eb.mean.to_bits());
        assert_eq!(ea.std_error.to_bits(), eb.std_error.to_bits());
    }

    #[test]
    fn combined_hull_contains_motion_hull() {
        let spec = EnsembleSpec::new(1, 1, 256, 8).unwrap();
        for r in 0..50 {
            let e = spec.sample_replicate(r).unwrap();
            let both = convex_hull(&e.all_points()).unwrap();
            let alone = convex_hull(e.bm[0].points()).unwrap();
            assert!(both.perimeter() >= alone.perimeter());
            assert!(both.area() >= alone.area());
        }
    }

    #[test]
    fn replicate_paths_match_direct_sampling() {
        let spec = EnsembleSpec::new(1, 1, 32, 5).unwrap();
        let e = spec.sample_replicate(3).unwrap();
        assert_eq!(e.bm[0], sample_bm(32, &mut spec.substream(3, 0)).unwrap());
        assert_eq!(e.bb[0], sample_bb(32, &mut spec.substream(3, 1)).unwrap());
    }

    #[test]
    fn moment_samples_read_winner_second_coordinate() {
        let spec = EnsembleSpec::new(1, 1, 64, 21).unwrap();
        let s = Harness::default().moment_samples(&spec, 20).unwrap();
        for r in 0..20u64 {
            let e = spec.sample_replicate(r).unwrap();
            let rec = combined_argmax(&e.bm, &e.bb).unwrap();
            assert_eq!(s.max_value[r as usize], rec.max_value);
            let path = match rec.winner {
                Winner::Bm(_) => &e.bm[0],
                Winner::Bb(_) => &e.bb[0],
            };
            assert_eq!(s.derivative[r as usize], path.points()[rec.grid_index].y);
        }
    }
}
