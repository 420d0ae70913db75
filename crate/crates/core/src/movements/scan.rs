//! Convexity scans along movements and the squeeze towards a parallelogram.

use std::fmt::Write as _;

use serde::Serialize;

use super::{vertex_movement, Family};
use crate::bodies::{hull_volume_flat, Body, SymmetricPolygon};
use crate::error::{domain, Error, Result};
use crate::exact::MomentSpec;
use crate::montecarlo::{estimate_moment, run_batches, CovAccumulator, MCConfig, MomentEstimate};

/// Quantity tracked along `t ↦ K_t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Functional {
    /// `vol(K_t)`, exact.
    Area,
    /// Monte Carlo `E V_{K_t,N}^p` (or `E U`), with common random numbers
    /// across the grid.
    Moment(MomentSpec, MCConfig),
}

impl Functional {
    pub fn name(&self) -> &'static str {
        match self {
            Functional::Area => "area",
            Functional::Moment(..) => "moment",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub t: f64,
    pub value: f64,
    pub std_error: f64,
    /// `v_{i−1} − 2v_i + v_{i+1}`; absent at the two ends of the grid.
    pub second_difference: Option<f64>,
    /// Standard error of the second difference (zero for exact values).
    pub second_difference_se: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanReport {
    pub functional: &'static str,
    pub rows: Vec<ScanRow>,
    /// Grid indices whose second difference signals non-convexity.
    pub violations: Vec<usize>,
    /// Scale used for the exact-area threshold.
    pub scale: f64,
    cov: Option<CovAccumulator>,
}

impl ScanReport {
    /// Standard error of `Σ c_i value_i` under common random numbers; zero
    /// for exact functionals.
    pub fn contrast_se(&self, c: &[f64]) -> f64 {
        self.cov.as_ref().map_or(0.0, |cov| cov.contrast_se(c))
    }

    /// Larger endpoint value minus the value at the middle grid point, with
    /// its standard error.
    pub fn endpoint_excess(&self) -> (f64, f64) {
        let k = self.rows.len();
        let mid = k / 2;
        let end = if self.rows[0].value >= self.rows[k - 1].value { 0 } else { k - 1 };
        let mut c = vec![0.0; k];
        c[end] += 1.0;
        c[mid] -= 1.0;
        (self.rows[end].value - self.rows[mid].value, self.contrast_se(&c))
    }

    /// CSV with columns `t`, the functional's name, `std_error` and
    /// `second_difference` (empty at the ends).
    pub fn to_csv(&self) -> String {
        let mut out = format!("t,{},std_error,second_difference\n", self.functional);
        for r in &self.rows {
            let d2 = r.second_difference.map(|d| format!("{d:e}")).unwrap_or_default();
            writeln!(out, "{},{},{:e},{}", r.t, r.value, r.std_error, d2).unwrap();
        }
        out
    }
}

fn second_difference_contrast(k: usize, i: usize) -> Vec<f64> {
    let mut c = vec![0.0; k];
    c[i - 1] = 1.0;
    c[i] = -2.0;
    c[i + 1] = 1.0;
    c
}

/// Evaluates the functional along the grid and flags second differences
/// below `−1e-9·scale` (exact area) or below `−4σ` (Monte Carlo), where
/// `scale` is the largest absolute value along the grid.
pub fn convexity_scan<F: Family>(family: &F, grid: &[f64], functional: &Functional) -> Result<ScanReport> {
    if grid.len() < 3 {
        return domain("a convexity scan needs at least 3 grid points");
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return domain("scan grid must be finite and strictly increasing");
    }
    let (lo, hi) = family.validity();
    if grid[0] < lo || grid[grid.len() - 1] > hi {
        return domain(format!("scan grid leaves the validity interval [{lo}, {hi}]"));
    }
    let k = grid.len();
    let (values, errors, cov) = match functional {
        Functional::Area => {
            let values = grid.iter().map(|&t| family.area(t)).collect::<Result<Vec<_>>>()?;
            (values, vec![0.0; k], None)
        }
        Functional::Moment(spec, cfg) => {
            spec.validate(2)?;
            let bodies = grid
                .iter()
                .map(|&t| Ok(Body::Polygon(family.polygon(t)?)))
                .collect::<Result<Vec<_>>>()?;
            let len = 2 * spec.n_points;
            let cov = run_batches(
                cfg,
                || CovAccumulator::new(k),
                || (vec![0.0; len], vec![0.0; k]),
                |acc, (points, row), i, rng| {
                    for (j, body) in bodies.iter().enumerate() {
                        // Same stream for every grid point.
                        let mut r = rng.clone();
                        for p in points.chunks_exact_mut(2) {
                            body.sample_into(&mut r, p);
                        }
                        let v = hull_volume_flat(points, 2, spec.symmetric) / body.volume();
                        if !(0.0..=1.0 + crate::montecarlo::VOLUME_SLACK).contains(&v) {
                            return Err(Error::VolumeOutOfRange { value: v, replication: i });
                        }
                        row[j] = if spec.p == 1.0 { v } else { v.powf(spec.p) };
                    }
                    acc.push(row);
                    Ok(())
                },
            )?;
            let errors = (0..k).map(|j| cov.std_error(j)).collect();
            (cov.mean().to_vec(), errors, Some(cov))
        }
    };
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut report = ScanReport {
        functional: functional.name(),
        rows: Vec::with_capacity(k),
        violations: Vec::new(),
        scale,
        cov,
    };
    for i in 0..k {
        let (d2, se) = if i == 0 || i == k - 1 {
            (None, 0.0)
        } else {
            let d = values[i - 1] - 2.0 * values[i] + values[i + 1];
            (Some(d), report.contrast_se(&second_difference_contrast(k, i)))
        };
        if let Some(d) = d2 {
            let threshold = match functional {
                Functional::Area => 1e-9 * scale,
                // Rounding floor for pathwise-identical values.
                Functional::Moment(..) => 4.0 * se + 1e-12 * scale,
            };
            if d < -threshold {
                report.violations.push(i);
            }
        }
        report.rows.push(ScanRow {
            t: grid[i],
            value: values[i],
            std_error: errors[i],
            second_difference: d2,
            second_difference_se: se,
        });
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SqueezeStep {
    /// Vertex count of the chosen endpoint polygon.
    pub vertices: usize,
    /// Which endpoint was taken: `"eps1"` or `"eps2"`.
    pub endpoint: &'static str,
    pub estimate: f64,
    pub std_error: f64,
    /// z-score of the chosen endpoint against the other one.
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SqueezeTrace {
    pub steps: Vec<SqueezeStep>,
    pub result: SymmetricPolygon,
}

/// Repeatedly replaces the polygon by whichever endpoint of the movement of
/// its first half-vertex has the larger estimated moment, until a
/// parallelogram remains. Ties (`|z| < 1`) go to `eps1`.
pub fn squeeze_to_parallelogram(p: &SymmetricPolygon, spec: &MomentSpec, cfg: &MCConfig) -> Result<SqueezeTrace> {
    spec.validate(2)?;
    let mut current = p.clone();
    let mut steps = Vec::new();
    while current.pairs() > 2 {
        let mv = vertex_movement(&current, 0)?;
        let (k1, k2) = mv.endpoints()?;
        let e1 = estimate_moment(&Body::Polygon(k1.clone()), spec, cfg)?;
        let e2 = estimate_moment(&Body::Polygon(k2.clone()), spec, cfg)?;
        let se = e1.std_error.hypot(e2.std_error);
        let z = if se > 0.0 { (e1.mean - e2.mean) / se } else { 0.0 };
        let (poly, est, name, z): (SymmetricPolygon, MomentEstimate, _, _) = if z > -1.0 {
            (k1, e1, "eps1", z)
        } else {
            (k2, e2, "eps2", -z)
        };
        if poly.pairs() >= current.pairs() {
            return Err(Error::InvalidMovement("movement endpoint did not lose a vertex".into()));
        }
        steps.push(SqueezeStep {
            vertices: 2 * poly.pairs(),
            endpoint: name,
            estimate: est.mean,
            std_error: est.std_error,
            z,
        });
        current = poly;
    }
    Ok(SqueezeTrace { steps, result: current })
}
