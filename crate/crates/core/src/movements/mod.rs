//! Shape movements of symmetric polygons.
//!
//! A movement in direction `v` shifts each point `x` of a polygon `K` to
//! `x + t β(π_v(x)) v`, where `π_v(x) = <x, w>` is the coordinate along
//! `w = v` rotated by −90°. In the frame `(w, v)` the polygon is the region
//! `f_v(x) ≤ r ≤ g_v(x)` between its lower and upper envelopes, and the moved
//! body stays convex exactly while `f_v + tβ` is convex and `g_v + tβ` concave.

mod scan;

use nalgebra::Vector2;

use crate::bodies::{hull_volume_2d, SymmetricPolygon};
use crate::error::{domain, Error, Result};

pub use scan::{convexity_scan, squeeze_to_parallelogram, Functional, ScanReport, ScanRow, SqueezeStep, SqueezeTrace};

/// Relative tolerance for slope and collinearity decisions.
pub const SHAPE_TOLERANCE: f64 = 1e-9;

/// Continuous piecewise-affine function given by breakpoints and values,
/// held constant beyond the outermost breakpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseAffine {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseAffine {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return domain("piecewise-affine function needs matching, non-empty breakpoints and values");
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return domain("piecewise-affine function has a non-finite breakpoint or value");
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return domain("breakpoints must be strictly increasing");
        }
        Ok(Self { xs, ys })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    /// Evaluates with `(y0 (x1 − x) + y1 (x − x0)) / (x1 − x0)`, which is
    /// exactly antisymmetric under `(x, y) ↦ (−x, −y)` of the data.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.xs.partition_point(|&b| b < x);
        if k == self.xs.len() {
            return self.ys[k - 1];
        }
        if k == 0 || self.xs[k] == x {
            return self.ys[k];
        }
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let (y0, y1) = (self.ys[k - 1], self.ys[k]);
        (y0 * (x1 - x) + y1 * (x - x0)) / (x1 - x0)
    }
}

/// Sorts and merges points closer than `tol`.
fn merge_close(mut xs: Vec<f64>, tol: f64) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|b, a| *b - *a <= tol);
    xs
}

/// Orthonormal frame `(w, v)` with `w = (v_y, −v_x)`; it has the same
/// orientation as the standard basis.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Frame {
    w: Vector2<f64>,
    v: Vector2<f64>,
}

impl Frame {
    fn new(v: Vector2<f64>) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return domain("movement direction must be a finite nonzero vector");
        }
        let v = v / n;
        Ok(Self {
            w: Vector2::new(v.y, -v.x),
            v,
        })
    }

    fn coords(&self, p: &Vector2<f64>) -> (f64, f64) {
        (p.dot(&self.w), p.dot(&self.v))
    }

    fn point(&self, x: f64, r: f64) -> Vector2<f64> {
        self.w * x + self.v * r
    }
}

/// Lower (`f_v`, convex) and upper (`g_v`, concave) envelopes over `π_v(P)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Envelopes {
    pub lower: PiecewiseAffine,
    pub upper: PiecewiseAffine,
}

fn chain(points: &[(f64, f64)], start: usize, stop: usize) -> Vec<(f64, f64)> {
    let n = points.len();
    let mut out = vec![points[start]];
    let mut k = start;
    while k != stop {
        k = (k + 1) % n;
        out.push(points[k]);
    }
    out
}

pub fn envelopes(p: &SymmetricPolygon, v: Vector2<f64>) -> Result<Envelopes> {
    let frame = Frame::new(v)?;
    type Pt = (f64, f64);
    let pts: Vec<Pt> = p.full_cycle().iter().map(|q| frame.coords(q)).collect();
    let pick = |better: &dyn Fn(&Pt, &Pt) -> bool| {
        (0..pts.len()).fold(0, |best, k| if better(&pts[k], &pts[best]) { k } else { best })
    };
    // Vertical edges at the ends of the projection: lower chain runs between
    // the bottom end points, upper chain between the top ones.
    let left_low = pick(&|a, b| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1));
    let right_low = pick(&|a, b| a.0 > b.0 || (a.0 == b.0 && a.1 < b.1));
    let right_high = pick(&|a, b| a.0 > b.0 || (a.0 == b.0 && a.1 > b.1));
    let left_high = pick(&|a, b| a.0 < b.0 || (a.0 == b.0 && a.1 > b.1));
    let lower = chain(&pts, left_low, right_low);
    let mut upper = chain(&pts, right_high, left_high);
    upper.reverse();
    let to_fn = |c: Vec<(f64, f64)>| {
        let (xs, ys) = c.into_iter().unzip();
        PiecewiseAffine::new(xs, ys)
    };
    Ok(Envelopes {
        lower: to_fn(lower)?,
        upper: to_fn(upper)?,
    })
}

/// Whether the piecewise-affine function through `(x_k, y_k)` is convex
/// (`sign = 1`) or concave (`sign = −1`), up to a slope tolerance.
fn slopes_monotone(xs: &[f64], ys: &[f64], sign: f64, tol: f64) -> bool {
    let slopes: Vec<f64> = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    slopes.windows(2).all(|s| sign * (s[1] - s[0]) >= -tol)
}

/// Speed `β` of a movement of `base` in direction `v`, valid for
/// `t ∈ [t_min, t_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeedFunction {
    base: SymmetricPolygon,
    frame: Frame,
    beta: PiecewiseAffine,
    t_min: f64,
    t_max: f64,
    odd: bool,
}

impl SpeedFunction {
    /// Checks that `β` covers `π_v(base)` and that the moved body is convex
    /// at both ends of `[t_min, t_max]` (the condition is affine in `t`).
    /// `β` is treated as odd, and then evaluated antisymmetrically, when
    /// `β(−x) = −β(x)` holds at all breakpoints within tolerance.
    pub fn new(
        base: SymmetricPolygon,
        v: Vector2<f64>,
        beta: PiecewiseAffine,
        t_min: f64,
        t_max: f64,
    ) -> Result<Self> {
        if !(t_min <= 0.0 && 0.0 <= t_max) {
            return domain(format!("validity interval [{t_min}, {t_max}] must contain 0"));
        }
        let frame = Frame::new(v)?;
        let env = envelopes(&base, frame.v)?;
        let (lo, hi) = (env.lower.xs[0], *env.lower.xs.last().unwrap());
        let scale = base.diameter();
        let tol = SHAPE_TOLERANCE * scale;
        if beta.xs[0] > lo + tol || *beta.xs.last().unwrap() < hi - tol {
            return domain("speed function must be defined on the whole projection of the polygon");
        }
        let beta_scale = beta.ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        let odd = beta
            .xs
            .iter()
            .zip(&beta.ys)
            .all(|(&x, &y)| (beta.eval(-x) + y).abs() <= SHAPE_TOLERANCE * beta_scale.max(scale));
        let speed = Self {
            base,
            frame,
            beta,
            t_min,
            t_max,
            odd,
        };
        for t in [t_min, t_max] {
            if t.is_finite() {
                speed.check_convex(&env, t)?;
            } else if !speed.is_affine() {
                return domain("an unbounded validity interval needs an affine speed");
            }
        }
        Ok(speed)
    }

    /// Shear `β(x) = c x`; every `K_t` is a linear image of the base.
    pub fn linear(base: SymmetricPolygon, v: Vector2<f64>, c: f64) -> Result<Self> {
        let frame = Frame::new(v)?;
        let h = base.support_radius(frame.w);
        let beta = PiecewiseAffine::new(vec![-h, h], vec![-c * h, c * h])?;
        Self::new(base, v, beta, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// `β = −(f_v + g_v)` on `t ∈ [0, 1]`: `t = 1/2` is the Steiner
    /// symmetral about `v^⊥` and `t = 1` the reflection in `v^⊥`.
    pub fn steiner(base: SymmetricPolygon, v: Vector2<f64>) -> Result<Self> {
        let env = envelopes(&base, v)?;
        let mut xs: Vec<f64> = env.lower.xs.iter().chain(&env.upper.xs).copied().collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let ys = xs.iter().map(|&x| -(env.lower.eval(x) + env.upper.eval(x))).collect();
        Self::new(base, v, PiecewiseAffine::new(xs, ys)?, 0.0, 1.0)
    }

    pub fn base(&self) -> &SymmetricPolygon {
        &self.base
    }

    pub fn direction(&self) -> Vector2<f64> {
        self.frame.v
    }

    pub fn beta(&self) -> &PiecewiseAffine {
        &self.beta
    }

    pub fn validity(&self) -> (f64, f64) {
        (self.t_min, self.t_max)
    }

    /// True for symmetric-preserving (odd) speeds.
    pub fn is_odd(&self) -> bool {
        self.odd
    }

    fn is_affine(&self) -> bool {
        let tol = SHAPE_TOLERANCE * self.base.diameter().max(1.0);
        slopes_monotone(&self.beta.xs, &self.beta.ys, 1.0, tol)
            && slopes_monotone(&self.beta.xs, &self.beta.ys, -1.0, tol)
    }

    /// `β(x)`; odd speeds are evaluated as `−β(−x)` for `x < 0`, so that
    /// moved bodies are exactly centrally symmetric.
    pub fn eval(&self, x: f64) -> f64 {
        if self.odd && x < 0.0 {
            -self.beta.eval(-x)
        } else {
            self.beta.eval(x)
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut xs = self.beta.xs.clone();
        if self.odd {
            xs.extend(self.beta.xs.iter().map(|x| -x));
            xs.sort_by(f64::total_cmp);
            xs.dedup();
        }
        xs
    }

    fn check_convex(&self, env: &Envelopes, t: f64) -> Result<()> {
        let tol = SHAPE_TOLERANCE * self.base.diameter().max(1.0);
        let bps = self.breakpoints();
        for (g, sign, name) in [(&env.lower, 1.0, "f + tβ convex"), (&env.upper, -1.0, "g + tβ concave")] {
            let (lo, hi) = (g.xs[0], *g.xs.last().unwrap());
            // Breakpoints that agree up to rounding would create sliver
            // segments with meaningless slopes.
            let xs = merge_close(
                g.xs.iter().chain(bps.iter().filter(|&&b| b > lo && b < hi)).copied().collect(),
                1e-12 * self.base.diameter(),
            );
            let ys: Vec<f64> = xs.iter().map(|&x| g.eval(x) + t * self.eval(x)).collect();
            if !slopes_monotone(&xs, &ys, sign, tol) {
                return Err(Error::InvalidMovement(format!("{name} fails at t = {t}")));
            }
        }
        Ok(())
    }
}

/// Drops repeated and collinear vertices from a closed cycle; fails if the
/// cycle turns clockwise anywhere.
fn simplify_convex_cycle(mut cycle: Vec<Vector2<f64>>, scale: f64) -> Result<Vec<Vector2<f64>>> {
    // Antipodal vertices make identical keep/drop decisions, so symmetric
    // cycles stay symmetric.
    let n = cycle.len();
    let keep: Vec<bool> = (0..n)
        .map(|i| (cycle[i] - cycle[(i + n - 1) % n]).norm() > 1e-12 * scale)
        .collect();
    cycle = cycle.into_iter().zip(keep).filter_map(|(p, k)| k.then_some(p)).collect();
    loop {
        let n = cycle.len();
        if n < 3 {
            return Err(Error::InvalidMovement("moved polygon collapsed".into()));
        }
        let mut keep = vec![true; n];
        let mut changed = false;
        for i in 0..n {
            let a = cycle[(i + n - 1) % n];
            let b = cycle[i];
            let c = cycle[(i + 1) % n];
            let (e1, e2) = (b - a, c - b);
            let turn = e1.perp(&e2);
            if turn.abs() <= SHAPE_TOLERANCE * e1.norm() * e2.norm() && e1.dot(&e2) > 0.0 {
                keep[i] = false;
                changed = true;
            } else if turn < 0.0 {
                return Err(Error::InvalidMovement(format!(
                    "moved polygon is not convex at vertex {i}"
                )));
            }
        }
        if !changed {
            return Ok(cycle);
        }
        cycle = cycle.into_iter().zip(keep).filter_map(|(p, k)| k.then_some(p)).collect();
    }
}

/// The moved polygon `K_t = {x + tβ(π_v(x)) v : x ∈ K}`.
pub fn apply_movement(s: &SpeedFunction, t: f64) -> Result<SymmetricPolygon> {
    if !(s.t_min <= t && t <= s.t_max) {
        return domain(format!(
            "t = {t} lies outside the validity interval [{}, {}]",
            s.t_min, s.t_max
        ));
    }
    if t == 0.0 {
        return Ok(s.base.clone());
    }
    let cycle = s.base.full_cycle();
    let n = cycle.len();
    let bps = s.breakpoints();
    let margin = 1e-12 * s.base.diameter();
    let mut moved = Vec::with_capacity(n + 2 * bps.len());
    for i in 0..n {
        let (a, b) = (s.frame.coords(&cycle[i]), s.frame.coords(&cycle[(i + 1) % n]));
        let mut pts = vec![a];
        // Breakpoints strictly inside the edge, in order of travel; those
        // within rounding of an end vertex are already represented by it.
        let mut inner: Vec<f64> = bps
            .iter()
            .copied()
            .filter(|&x| x > a.0.min(b.0) + margin && x < a.0.max(b.0) - margin)
            .collect();
        if b.0 < a.0 {
            inner.reverse();
        }
        pts.extend(inner.into_iter().map(|x| (x, a.1 + (x - a.0) * (b.1 - a.1) / (b.0 - a.0))));
        moved.extend(pts.into_iter().map(|(x, r)| s.frame.point(x, r + t * s.eval(x))));
    }
    let cycle = simplify_convex_cycle(moved, s.base.diameter())?;
    SymmetricPolygon::from_cycle(&cycle, 1e-12 * s.base.diameter()).map_err(|e| {
        Error::InvalidMovement(format!("moved polygon is not a valid symmetric polygon: {e}"))
    })
}

/// The movement sliding half-vertex `P_i` (and `−P_i`) parallel to the chord
/// through its two neighbours, which keeps the area fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexMovement {
    pub index: usize,
    pub speed: SpeedFunction,
    /// `K_{eps1}` loses the neighbour ahead of `P_i`.
    pub eps1: f64,
    /// `K_{−eps2}` loses the neighbour behind `P_i`.
    pub eps2: f64,
}

impl VertexMovement {
    pub fn endpoints(&self) -> Result<(SymmetricPolygon, SymmetricPolygon)> {
        Ok((
            apply_movement(&self.speed, self.eps1)?,
            apply_movement(&self.speed, -self.eps2)?,
        ))
    }
}

pub fn vertex_movement(p: &SymmetricPolygon, i: usize) -> Result<VertexMovement> {
    let m = p.pairs();
    if m < 3 {
        return domain(format!(
            "vertex movements need at least 6 vertices, polygon has {}",
            2 * m
        ));
    }
    if i >= m {
        return domain(format!("vertex index {i} out of range for {m} antipodal pairs"));
    }
    let c = |k: isize| p.vertex(i as isize + k);
    let d = c(1) - c(-1);
    let cross = |a: Vector2<f64>, b: Vector2<f64>| a.perp(&b);
    let e_ahead = c(2) - c(1);
    let e_behind = c(-2) - c(-1);
    let eps1 = -cross(e_ahead, c(0) - c(1)) / cross(e_ahead, d);
    let eps2 = cross(e_behind, c(0) - c(-1)) / cross(e_behind, d);
    if !(eps1 > 0.0 && eps2 > 0.0) || !eps1.is_finite() || !eps2.is_finite() {
        return Err(Error::InvalidMovement(format!(
            "degenerate vertex movement: eps1 = {eps1}, eps2 = {eps2}"
        )));
    }
    let frame = Frame::new(d)?;
    let (xi, _) = frame.coords(&c(0));
    let (x0, _) = frame.coords(&c(1));
    let (big, small) = (xi.abs(), x0.abs());
    if !(big > small && x0 * xi > 0.0) {
        return Err(Error::InvalidMovement(
            "neighbour chord does not separate the vertex from the centre".into(),
        ));
    }
    let b = xi.signum() * d.norm();
    let beta = PiecewiseAffine::new(vec![-big, -small, small, big], vec![-b, 0.0, 0.0, b])?;
    let speed = SpeedFunction::new(p.clone(), d, beta, -eps2, eps1)?;
    Ok(VertexMovement {
        index: i,
        speed,
        eps1,
        eps2,
    })
}

/// Points `x_k + t α_k v` of a polygon's vertex cycle moving at individual
/// speeds; `K_t` is their convex hull.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearParameterSystem {
    pub base: SymmetricPolygon,
    pub direction: Vector2<f64>,
    /// One speed per vertex of the full 2m-cycle.
    pub speeds: Vec<f64>,
}

impl LinearParameterSystem {
    pub fn new(base: SymmetricPolygon, direction: Vector2<f64>, speeds: Vec<f64>) -> Result<Self> {
        let frame = Frame::new(direction)?;
        if speeds.len() != 2 * base.pairs() {
            return domain(format!(
                "need one speed per vertex ({}), got {}",
                2 * base.pairs(),
                speeds.len()
            ));
        }
        if speeds.iter().any(|a| !a.is_finite()) {
            return domain("speeds must be finite");
        }
        Ok(Self {
            base,
            direction: frame.v,
            speeds,
        })
    }

    pub fn points(&self, t: f64) -> Vec<[f64; 2]> {
        self.base
            .full_cycle()
            .iter()
            .zip(&self.speeds)
            .map(|(x, a)| {
                let p = x + self.direction * (t * a);
                [p.x, p.y]
            })
            .collect()
    }

    pub fn area(&self, t: f64) -> f64 {
        hull_volume_2d(&self.points(t))
    }

    /// Whether antipodal vertices move at opposite speeds, so every `K_t` is
    /// centrally symmetric.
    pub fn is_symmetric(&self) -> bool {
        let m = self.base.pairs();
        (0..m).all(|k| self.speeds[k] == -self.speeds[k + m])
    }

    pub fn polygon(&self, t: f64) -> Result<SymmetricPolygon> {
        if !self.is_symmetric() {
            return Err(Error::Unsupported(
                "K_t of an asymmetric parameter system is not a symmetric polygon".into(),
            ));
        }
        let hull: Vec<Vector2<f64>> = crate::bodies::convex_hull_2d(&self.points(t))
            .into_iter()
            .map(|p| Vector2::new(p[0], p[1]))
            .collect();
        let hull = simplify_convex_cycle(hull, self.base.diameter())?;
        SymmetricPolygon::from_cycle(&hull, 1e-12 * self.base.diameter())
    }
}

/// A one-parameter family of bodies `t ↦ K_t`.
pub trait Family: Sync {
    /// Parameter range on which `K_t` is defined.
    fn validity(&self) -> (f64, f64);
    fn area(&self, t: f64) -> Result<f64>;
    fn polygon(&self, t: f64) -> Result<SymmetricPolygon>;
}

impl Family for SpeedFunction {
    fn validity(&self) -> (f64, f64) {
        SpeedFunction::validity(self)
    }

    fn area(&self, t: f64) -> Result<f64> {
        Ok(apply_movement(self, t)?.area())
    }

    fn polygon(&self, t: f64) -> Result<SymmetricPolygon> {
        apply_movement(self, t)
    }
}

impl Family for LinearParameterSystem {
    fn validity(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn area(&self, t: f64) -> Result<f64> {
        Ok(LinearParameterSystem::area(self, t))
    }

    fn polygon(&self, t: f64) -> Result<SymmetricPolygon> {
        LinearParameterSystem::polygon(self, t)
    }
}
