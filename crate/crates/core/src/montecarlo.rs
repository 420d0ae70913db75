//! Seeded, parallel Monte Carlo estimation of `E U_{K,N}^p` and `E V_{K,N}^p`.
//!
//! Replication `i` always draws from stream `i` of the seed, and per-batch
//! accumulators are merged in batch order, so every estimate is a pure
//! function of `(seed, samples, batch)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::bodies::{hull_volume_flat, Body};
use crate::error::{domain, Error, Result};
use crate::exact::MomentSpec;
use crate::rng::{StreamFactory, StreamRng};

/// Slack allowed above 1 for a normalized volume before it is treated as a bug.
pub const VOLUME_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MCConfig {
    pub samples: u64,
    pub seed: u64,
    pub batch: u64,
    pub workers: usize,
}

impl MCConfig {
    /// Batches of up to 10⁴ replications on all available threads.
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            batch: samples.clamp(1, 10_000),
            workers: default_workers(),
        }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        Self { workers, ..self }
    }

    pub fn with_batch(self, batch: u64) -> Self {
        Self { batch, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch < 1 || self.samples < self.batch {
            return domain(format!(
                "need samples >= batch >= 1, got samples={} batch={}",
                self.samples, self.batch
            ));
        }
        if self.workers < 1 {
            return domain("need at least one worker");
        }
        Ok(())
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Accumulators that can absorb another accumulator of the same kind.
pub trait Merge {
    fn merge(&mut self, other: Self);
}

/// Running mean and sum of squared deviations.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Welford {
    pub n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

impl Merge for Welford {
    fn merge(&mut self, o: Self) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * (self.n as f64 * o.n as f64 / n as f64);
        self.n = n;
    }
}

/// Mean vector and co-moment matrix of paired observations, for contrasts
/// between values computed from common random numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct CovAccumulator {
    pub n: u64,
    mean: Vec<f64>,
    comoment: Vec<f64>,
}

impl CovAccumulator {
    pub fn new(k: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; k],
            comoment: vec![0.0; k * k],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn push(&mut self, x: &[f64]) {
        let k = self.dim();
        self.n += 1;
        let inv = 1.0 / self.n as f64;
        let before: Vec<f64> = x.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        for (m, d) in self.mean.iter_mut().zip(&before) {
            *m += d * inv;
        }
        for (row, (xi, mi)) in self.comoment.chunks_exact_mut(k).zip(x.iter().zip(&self.mean)) {
            let after = xi - mi;
            for (c, b) in row.iter_mut().zip(&before) {
                *c += after * b;
            }
        }
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.comoment[i * self.dim() + j] / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self, i: usize) -> f64 {
        self.contrast_se(&unit(self.dim(), i))
    }

    /// Standard error of `Σ c_i mean_i`.
    pub fn contrast_se(&self, c: &[f64]) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let k = self.dim();
        let mut var = 0.0;
        for i in 0..k {
            for j in 0..k {
                var += c[i] * c[j] * self.covariance(i, j);
            }
        }
        (var.max(0.0) / self.n as f64).sqrt()
    }
}

fn unit(k: usize, i: usize) -> Vec<f64> {
    let mut c = vec![0.0; k];
    c[i] = 1.0;
    c
}

impl Merge for CovAccumulator {
    fn merge(&mut self, o: Self) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = o;
            return;
        }
        let k = self.dim();
        let n = self.n + o.n;
        let w = self.n as f64 * o.n as f64 / n as f64;
        let d: Vec<f64> = o.mean.iter().zip(&self.mean).map(|(b, a)| b - a).collect();
        for i in 0..k {
            for j in 0..k {
                self.comoment[i * k + j] += o.comoment[i * k + j] + d[i] * d[j] * w;
            }
        }
        for (m, di) in self.mean.iter_mut().zip(&d) {
            *m += di * o.n as f64 / n as f64;
        }
        self.n = n;
    }
}

/// Runs `cfg.samples` replications in batches on `cfg.workers` threads.
/// `step` sees the replication index and that replication's own stream; a
/// fresh accumulator and scratch value are made per batch, and batch results
/// are merged in index order.
pub fn run_batches<A, W, I, S, F>(cfg: &MCConfig, init: I, scratch: S, step: F) -> Result<A>
where
    A: Merge + Send,
    I: Fn() -> A + Sync,
    S: Fn() -> W + Sync,
    F: Fn(&mut A, &mut W, u64, &mut StreamRng) -> Result<()> + Sync,
{
    cfg.validate()?;
    let factory = StreamFactory::new(cfg.seed);
    let batches = cfg.samples.div_ceil(cfg.batch);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
    let parts: Vec<Result<A>> = pool.install(|| {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut acc = init();
                let mut work = scratch();
                let lo = b * cfg.batch;
                let hi = (lo + cfg.batch).min(cfg.samples);
                for i in lo..hi {
                    let mut rng = factory.stream(i);
                    step(&mut acc, &mut work, i, &mut rng)?;
                }
                Ok(acc)
            })
            .collect()
    });
    let mut total = init();
    for part in parts {
        total.merge(part?);
    }
    Ok(total)
}

/// Fills `points` (N·n coordinates) with the replication's random points.
pub trait PointDraw: Sync {
    fn draw(&self, body: &Body, rng: &mut StreamRng, points: &mut [f64]);
}

/// Independent uniform points, drawn one after another from the stream, so
/// the first N points of a replication do not depend on N.
pub struct UniformDraw;

impl PointDraw for UniformDraw {
    #[inline]
    fn draw(&self, body: &Body, rng: &mut StreamRng, points: &mut [f64]) {
        let n = body.dimension();
        for p in points.chunks_exact_mut(n) {
            body.sample_into(rng, p);
        }
    }
}

impl<F: Fn(&Body, &mut StreamRng, &mut [f64]) + Sync> PointDraw for F {
    fn draw(&self, body: &Body, rng: &mut StreamRng, points: &mut [f64]) {
        self(body, rng, points)
    }
}

/// Normalized (symmetric) hull volume of one replication's points.
fn normalized_volume(body: &Body, spec: &MomentSpec, points: &[f64], index: u64) -> Result<f64> {
    let v = hull_volume_flat(points, body.dimension(), spec.symmetric) / body.volume();
    if !(0.0..=1.0 + VOLUME_SLACK).contains(&v) {
        return Err(Error::VolumeOutOfRange {
            value: v,
            replication: index,
        });
    }
    Ok(v)
}

/// Normalized volume of replication `index` under `seed`, as used by
/// [`estimate_moment`]. Meant for pathwise comparisons.
pub fn replication_volume(body: &Body, spec: &MomentSpec, seed: u64, index: u64) -> Result<f64> {
    spec.validate(body.dimension())?;
    let mut rng = StreamFactory::new(seed).stream(index);
    let mut points = vec![0.0; spec.n_points * body.dimension()];
    UniformDraw.draw(body, &mut rng, &mut points);
    normalized_volume(body, spec, &points, index)
}

#[inline]
fn power(v: f64, p: f64) -> f64 {
    if p == 1.0 {
        v
    } else {
        v.powf(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    #[serde(flatten)]
    pub spec: MomentSpec,
    pub seed: u64,
    /// Replications whose hull had zero volume.
    pub degenerate: u64,
}

#[derive(Default)]
struct MomentAcc {
    stats: Welford,
    degenerate: u64,
}

impl Merge for MomentAcc {
    fn merge(&mut self, o: Self) {
        self.stats.merge(o.stats);
        self.degenerate += o.degenerate;
    }
}

/// Estimates `E V_{B,N}^p` (or `E U_{B,N}^p`) from `cfg.samples` replications.
pub fn estimate_moment(body: &Body, spec: &MomentSpec, cfg: &MCConfig) -> Result<MomentEstimate> {
    estimate_moment_with(body, spec, cfg, &UniformDraw)
}

/// [`estimate_moment`] with a custom point generator.
pub fn estimate_moment_with<D: PointDraw>(
    body: &Body,
    spec: &MomentSpec,
    cfg: &MCConfig,
    draw: &D,
) -> Result<MomentEstimate> {
    spec.validate(body.dimension())?;
    let len = spec.n_points * body.dimension();
    let acc = run_batches(
        cfg,
        MomentAcc::default,
        || vec![0.0; len],
        |acc, points, i, rng| {
            draw.draw(body, rng, points);
            let v = normalized_volume(body, spec, points, i)?;
            if v == 0.0 {
                acc.degenerate += 1;
            }
            acc.stats.push(power(v, spec.p));
            Ok(())
        },
    )?;
    Ok(MomentEstimate {
        mean: acc.stats.mean(),
        std_error: acc.stats.std_error(),
        samples: acc.stats.n,
        spec: *spec,
        seed: cfg.seed,
        degenerate: acc.degenerate,
    })
}

struct Counts(Vec<u64>);

impl Merge for Counts {
    fn merge(&mut self, o: Self) {
        for (a, b) in self.0.iter_mut().zip(o.0) {
            *a += b;
        }
    }
}

/// Empirical distribution function of the normalized volume (not raised to
/// `p`) at each grid point: `F̂(t) = #{V ≤ t} / samples`.
pub fn empirical_cdf(
    body: &Body,
    spec: &MomentSpec,
    cfg: &MCConfig,
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    spec.validate(body.dimension())?;
    if grid.iter().any(|g| !g.is_finite()) || grid.windows(2).any(|w| w[0] > w[1]) {
        return domain("CDF grid must be finite and sorted ascending");
    }
    let len = spec.n_points * body.dimension();
    let counts = run_batches(
        cfg,
        || Counts(vec![0; grid.len() + 1]),
        || vec![0.0; len],
        |acc, points, i, rng| {
            UniformDraw.draw(body, rng, points);
            let v = normalized_volume(body, spec, points, i)?;
            acc.0[grid.partition_point(|&g| g < v)] += 1;
            Ok(())
        },
    )?;
    let n = cfg.samples as f64;
    let mut cum = 0;
    Ok(grid
        .iter()
        .zip(&counts.0)
        .map(|(&t, &c)| {
            cum += c;
            (t, cum as f64 / n)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub name: String,
    #[serde(flatten)]
    pub estimate: MomentEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairwiseZ {
    pub lower: String,
    pub higher: String,
    pub z: f64,
}

/// Bodies ranked by increasing estimate, with z-scores for every pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub z_scores: Vec<PairwiseZ>,
}

impl Comparison {
    pub fn z(&self, lower: &str, higher: &str) -> Option<f64> {
        self.z_scores.iter().find_map(|p| match (p.lower == lower, p.higher == higher) {
            (true, true) => Some(p.z),
            _ if p.lower == higher && p.higher == lower => Some(-p.z),
            _ => None,
        })
    }
}

/// Estimates the same moment for each body with the same seed, so all bodies
/// share replication streams. Pairwise `z = (m_j − m_i) / √(se_i² + se_j²)`
/// ignores the positive correlation this induces, which makes it conservative.
pub fn compare_bodies(bodies: &[(String, Body)], spec: &MomentSpec, cfg: &MCConfig) -> Result<Comparison> {
    let Some((_, first)) = bodies.first() else {
        return domain("nothing to compare");
    };
    let dim = first.dimension();
    if let Some((name, _)) = bodies.iter().find(|(_, b)| b.dimension() != dim) {
        return domain(format!("body {name:?} does not have dimension {dim}"));
    }
    let mut rows = bodies
        .iter()
        .map(|(name, body)| {
            Ok(ComparisonRow {
                name: name.clone(),
                estimate: estimate_moment(body, spec, cfg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.estimate.mean.total_cmp(&b.estimate.mean));
    let mut z_scores = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let (a, b) = (&rows[i].estimate, &rows[j].estimate);
            let se = a.std_error.hypot(b.std_error);
            let z = if se > 0.0 { (b.mean - a.mean) / se } else { 0.0 };
            z_scores.push(PairwiseZ {
                lower: rows[i].name.clone(),
                higher: rows[j].name.clone(),
                z,
            });
        }
    }
    Ok(Comparison { rows, z_scores })
}
