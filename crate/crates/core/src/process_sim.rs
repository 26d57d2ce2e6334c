//! Sampling of planar Brownian motions and bridges on a uniform grid of
//! `[0, 1]`, and extraction of the combined maximum of their first
//! coordinates.
//!
//! A path with `steps` intervals stores `steps + 1` points; point `k` sits at
//! time `k / steps`. Increments are `N(0, 1/steps)` per coordinate, drawn
//! with the ziggurat sampler from `rand_distr` (`StandardNormal`) as
//! interleaved `(dx, dy)` pairs. A bridge is built from a freshly sampled
//! motion as `B(k/steps) = W(k/steps) - (k/steps) W(1)`, which is exact in law
//! at the grid points and pins the endpoint to the origin.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::rng::Substream;

/// Default number of grid intervals.
pub const DEFAULT_STEPS: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProcessKind {
    #[serde(rename = "BM")]
    Bm,
    #[serde(rename = "BB")]
    Bb,
}

/// A sampled trajectory on the uniform grid `k / steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarPath {
    kind: ProcessKind,
    points: Vec<Point>,
}

impl PlanarPath {
    pub fn kind(&self) -> ProcessKind {
        self.kind
    }

    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.steps() as f64
    }

    /// Earliest grid index at which the first coordinate is maximal.
    pub fn first_coordinate_argmax(&self) -> usize {
        let mut best = 0;
        for (k, p) in self.points.iter().enumerate().skip(1) {
            if p.x > self.points[best].x {
                best = k;
            }
        }
        best
    }
}

/// Number of Brownian motions and Brownian bridges in an ensemble. At least
/// one process is required.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProcessCounts {
    bm: u32,
    bb: u32,
}

impl ProcessCounts {
    pub fn new(bm: u32, bb: u32) -> Result<Self> {
        if bm == 0 && bb == 0 {
            return Err(Error::invalid(
                "an ensemble needs at least one process (m + n >= 1)",
            ));
        }
        Ok(ProcessCounts { bm, bb })
    }

    pub fn bm(&self) -> u32 {
        self.bm
    }

    pub fn bb(&self) -> u32 {
        self.bb
    }

    pub fn total(&self) -> u32 {
        self.bm + self.bb
    }
}

/// Full deterministic identity of a simulation experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub counts: ProcessCounts,
    pub steps: usize,
    pub master_seed: u64,
}

/// The motions and bridges of one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub bm: Vec<PlanarPath>,
    pub bb: Vec<PlanarPath>,
}

impl Ensemble {
    pub fn all_points(&self) -> Vec<Point> {
        self.bm
            .iter()
            .chain(&self.bb)
            .flat_map(|p| p.points().iter().copied())
            .collect()
    }
}

impl EnsembleSpec {
    pub fn new(m: u32, n: u32, steps: usize, master_seed: u64) -> Result<Self> {
        let counts = ProcessCounts::new(m, n)?;
        check_steps(steps)?;
        Ok(EnsembleSpec {
            counts,
            steps,
            master_seed,
        })
    }

    pub fn validate(&self) -> Result<()> {
        ProcessCounts::new(self.counts.bm, self.counts.bb)?;
        check_steps(self.steps)
    }

    /// Substream of path `path` (motions first, then bridges) in replicate
    /// `replicate`. Every path of every replicate gets its own index.
    pub fn substream(&self, replicate: u64, path: u32) -> Substream {
        let per_replicate = self.counts.total() as u64;
        Substream::new(self.master_seed, replicate * per_replicate + path as u64)
    }

    pub fn sample_replicate(&self, replicate: u64) -> Result<Ensemble> {
        let m = self.counts.bm;
        let bm = (0..m)
            .map(|i| sample_bm(self.steps, &mut self.substream(replicate, i)))
            .collect::<Result<Vec<_>>>()?;
        let bb = (0..self.counts.bb)
            .map(|j| sample_bb(self.steps, &mut self.substream(replicate, m + j)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Ensemble { bm, bb })
    }
}

fn check_steps(steps: usize) -> Result<()> {
    if steps < 2 {
        return Err(Error::invalid(format!(
            "steps must be at least 2, got {steps}"
        )));
    }
    Ok(())
}

fn random_walk(steps: usize, stream: &mut Substream) -> Vec<Point> {
    let sigma = (1.0 / steps as f64).sqrt();
    let mut points = Vec::with_capacity(steps + 1);
    let mut current = Point::ORIGIN;
    points.push(current);
    for _ in 0..steps {
        let dx: f64 = StandardNormal.sample(stream);
        let dy: f64 = StandardNormal.sample(stream);
        current = Point::new(current.x + sigma * dx, current.y + sigma * dy);
        points.push(current);
    }
    points
}

/// Samples a standard planar Brownian motion on `steps` grid intervals.
pub fn sample_bm(steps: usize, stream: &mut Substream) -> Result<PlanarPath> {
    check_steps(steps)?;
    Ok(PlanarPath {
        kind: ProcessKind::Bm,
        points: random_walk(steps, stream),
    })
}

/// Samples a standard planar Brownian bridge on `steps` grid intervals.
pub fn sample_bb(steps: usize, stream: &mut Substream) -> Result<PlanarPath> {
    check_steps(steps)?;
    let mut points = random_walk(steps, stream);
    let end = points[steps];
    let n = steps as f64;
    for (k, p) in points.iter_mut().enumerate() {
        let t = k as f64 / n;
        *p = Point::new(p.x - t * end.x, p.y - t * end.y);
    }
    points[steps] = Point::ORIGIN;
    Ok(PlanarPath {
        kind: ProcessKind::Bb,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Winner {
    Bm(usize),
    Bb(usize),
}

/// The combined maximum of the first coordinates of an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArgmaxRecord {
    pub max_value: f64,
    pub time: f64,
    pub grid_index: usize,
    pub winner: Winner,
}

/// Finds the largest first coordinate over every grid point of every path.
///
/// Ties go to the earliest grid index, then to motions over bridges, then to
/// the lowest path index.
pub fn combined_argmax(bm_paths: &[PlanarPath], bb_paths: &[PlanarPath]) -> Result<ArgmaxRecord> {
    let steps = bm_paths
        .first()
        .or(bb_paths.first())
        .ok_or_else(|| Error::invalid("combined_argmax needs at least one path"))?
        .steps();
    if bm_paths.iter().chain(bb_paths).any(|p| p.steps() != steps) {
        return Err(Error::invalid("all paths must share the same grid"));
    }
    if bm_paths.iter().any(|p| p.kind != ProcessKind::Bm)
        || bb_paths.iter().any(|p| p.kind != ProcessKind::Bb)
    {
        return Err(Error::invalid("path kind does not match its list"));
    }

    let candidates = bm_paths
        .iter()
        .enumerate()
        .map(|(i, p)| (p, Winner::Bm(i)))
        .chain(bb_paths.iter().enumerate().map(|(j, p)| (p, Winner::Bb(j))));

    let mut best: Option<(f64, usize, Winner)> = None;
    for (path, tag) in candidates {
        let k = path.first_coordinate_argmax();
        let value = path.points[k].x;
        // Candidates arrive in (BM before BB, lowest index) order, so only a
        // strictly larger value or an equal value at an earlier index wins.
        let better = match best {
            None => true,
            Some((v, bk, _)) => value > v || (value == v && k < bk),
        };
        if better {
            best = Some((value, k, tag));
        }
    }
    let (max_value, grid_index, winner) = best.expect("at least one path");
    Ok(ArgmaxRecord {
        max_value,
        time: grid_index as f64 / steps as f64,
        grid_index,
        winner,
    })
}

#[cfg(test)]
pub(crate) fn path_from_x(kind: ProcessKind, xs: &[f64]) -> PlanarPath {
    PlanarPath {
        kind,
        points: xs.iter().map(|&x| Point::new(x, 0.0)).collect(),
    }
}
