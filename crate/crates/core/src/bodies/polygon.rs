//! Origin-symmetric convex polygons stored as antipodal vertex pairs.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use rand::Rng;

use super::hull::{orientation_2d, shoelace};
use crate::error::{Error, Result};

/// Relative width (in units of the diameter) of the band around a cutting
/// line inside which a vertex counts as lying on the line.
pub const CLIP_TOLERANCE: f64 = 1e-12;

/// A convex polygon with vertex cycle `P_1, …, P_m, -P_1, …, -P_m`
/// (counterclockwise). Only the first half of the cycle is stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricPolygon {
    half: Vec<Vector2<f64>>,
    area: f64,
    diameter: f64,
    /// Cumulative areas of the fan triangles `(0, v_j, v_{j+1})` over the
    /// full cycle, used for uniform sampling.
    fan_cdf: Vec<f64>,
}

impl SymmetricPolygon {
    /// Validates strict convexity and counterclockwise orientation of the
    /// full 2m-cycle.
    pub fn new(half_vertices: Vec<Vector2<f64>>) -> Result<Self> {
        let m = half_vertices.len();
        if m < 2 {
            return Err(Error::InvalidBody(format!(
                "a symmetric polygon needs at least 2 half vertices, got {m}"
            )));
        }
        if half_vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidBody("non-finite vertex coordinate".into()));
        }
        let full: Vec<Vector2<f64>> = half_vertices
            .iter()
            .copied()
            .chain(half_vertices.iter().map(|p| -p))
            .collect();
        let diameter = 2.0 * half_vertices.iter().map(|p| p.norm()).fold(0.0, f64::max);
        let n = full.len();
        for i in 0..n {
            let a = full[(i + n - 1) % n];
            let b = full[i];
            let c = full[(i + 1) % n];
            let turn = (b - a).perp(&(c - b));
            if !(turn > CLIP_TOLERANCE * diameter * diameter) {
                return Err(Error::InvalidBody(format!(
                    "vertex cycle is not strictly convex and counterclockwise at vertex {i}"
                )));
            }
        }
        let pts: Vec<[f64; 2]> = full.iter().map(|p| [p.x, p.y]).collect();
        let area = shoelace(&pts);
        if !(area > 0.0) {
            return Err(Error::InvalidBody(format!("polygon area {area} is not positive")));
        }
        // Winding more than once around the origin still passes the local turn test.
        let winding: f64 = (0..n)
            .map(|i| {
                let a = full[i];
                let b = full[(i + 1) % n];
                a.perp(&b).atan2(a.dot(&b))
            })
            .sum();
        if (winding - 2.0 * PI).abs() > 1e-6 {
            return Err(Error::InvalidBody("vertex cycle winds more than once".into()));
        }
        let mut fan_cdf = Vec::with_capacity(n);
        let mut acc = 0.0;
        for i in 0..n {
            acc += 0.5 * full[i].perp(&full[(i + 1) % n]);
            fan_cdf.push(acc);
        }
        Ok(Self {
            half: half_vertices,
            area,
            diameter,
            fan_cdf,
        })
    }

    /// Builds a polygon from a full counterclockwise cycle of 2m vertices
    /// whose second half is (approximately) the negation of the first.
    pub fn from_cycle(cycle: &[Vector2<f64>], tol: f64) -> Result<Self> {
        let n = cycle.len();
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidBody(format!(
                "a symmetric vertex cycle has even length, got {n}"
            )));
        }
        let m = n / 2;
        for i in 0..m {
            if (cycle[i] + cycle[i + m]).norm() > tol {
                return Err(Error::InvalidBody(format!(
                    "vertex {} is not the antipode of vertex {i}",
                    i + m
                )));
            }
        }
        Self::new(cycle[..m].to_vec())
    }

    /// Square `[-a, a]²`.
    pub fn square(half_side: f64) -> Self {
        Self::new(vec![
            Vector2::new(half_side, half_side),
            Vector2::new(-half_side, half_side),
        ])
        .expect("square is a valid symmetric polygon")
    }

    /// Regular 2m-gon with the given circumradius, first vertex on the positive x-axis.
    pub fn regular(m: usize, circumradius: f64) -> Result<Self> {
        let n = 2 * m;
        let half = (0..m)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / n as f64;
                Vector2::new(circumradius * phi.cos(), circumradius * phi.sin())
            })
            .collect();
        Self::new(half)
    }

    pub fn half_vertices(&self) -> &[Vector2<f64>] {
        &self.half
    }

    /// Number m of antipodal vertex pairs.
    pub fn pairs(&self) -> usize {
        self.half.len()
    }

    /// Vertex `i` of the full 2m-cycle (indices taken modulo 2m).
    pub fn vertex(&self, i: isize) -> Vector2<f64> {
        let m = self.half.len() as isize;
        let k = i.rem_euclid(2 * m);
        if k < m {
            self.half[k as usize]
        } else {
            -self.half[(k - m) as usize]
        }
    }

    pub fn full_cycle(&self) -> Vec<Vector2<f64>> {
        (0..2 * self.half.len() as isize).map(|i| self.vertex(i)).collect()
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// `max_i |<P_i, u>|`.
    pub fn support_radius(&self, u: Vector2<f64>) -> f64 {
        self.half.iter().map(|p| p.dot(&u).abs()).fold(0.0, f64::max)
    }

    /// Image under an invertible linear map; the vertex order is reversed
    /// when the map flips orientation so the cycle stays counterclockwise.
    pub fn linear_image(&self, t: &Matrix2<f64>) -> Result<Self> {
        let det = t.determinant();
        if !(det.abs() > 0.0) || !det.is_finite() {
            return Err(Error::InvalidBody("linear map is singular".into()));
        }
        let mapped: Vec<Vector2<f64>> = self.half.iter().map(|p| t * p).collect();
        if det > 0.0 {
            Self::new(mapped)
        } else {
            Self::new(mapped.iter().rev().map(|p| -p).collect())
        }
    }

    /// Copy rescaled about the origin to unit area.
    pub fn normalized(&self) -> Self {
        let s = 1.0 / self.area.sqrt();
        Self::new(self.half.iter().map(|p| p * s).collect())
            .expect("scaling preserves validity")
    }

    /// Uniform point: pick a fan triangle `(0, v_j, v_{j+1})` in proportion
    /// to its area, then map two uniforms into it.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector2<f64> {
        let total = *self.fan_cdf.last().expect("non-empty fan");
        let target = rng.random::<f64>() * total;
        let j = self
            .fan_cdf
            .partition_point(|&c| c <= target)
            .min(self.fan_cdf.len() - 1);
        let a = self.vertex(j as isize);
        let b = self.vertex(j as isize + 1);
        let mut s: f64 = rng.random();
        let mut t: f64 = rng.random();
        if s + t > 1.0 {
            s = 1.0 - s;
            t = 1.0 - t;
        }
        a * s + b * t
    }

    /// Chord length `ℓ(r, θ)` of the line `<x, u_θ> = r` and area `A(r, θ)`
    /// of the slab `|<x, u_θ>| ≤ r`, both by clipping.
    pub fn chord_and_slab(&self, r: f64, theta: f64) -> (f64, f64) {
        let u = Vector2::new(theta.cos(), theta.sin());
        (self.chord(r, u), self.slab_area(r, u))
    }

    /// Length of `{<x, u> = r} ∩ P` for a unit vector `u`.
    pub fn chord(&self, r: f64, u: Vector2<f64>) -> f64 {
        let tol = CLIP_TOLERANCE * self.diameter;
        let w = Vector2::new(-u.y, u.x);
        let n = 2 * self.half.len() as isize;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let a = self.vertex(i);
            let b = self.vertex(i + 1);
            let da = a.dot(&u) - r;
            let db = b.dot(&u) - r;
            if da.abs() <= tol {
                let s = a.dot(&w);
                lo = lo.min(s);
                hi = hi.max(s);
            }
            if (da < -tol && db > tol) || (da > tol && db < -tol) {
                let p = a + (b - a) * (da / (da - db));
                let s = p.dot(&w);
                lo = lo.min(s);
                hi = hi.max(s);
            }
        }
        if hi > lo {
            hi - lo
        } else {
            0.0
        }
    }

    /// Area of `{|<x, u>| ≤ r} ∩ P` for a unit vector `u`.
    pub fn slab_area(&self, r: f64, u: Vector2<f64>) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if r >= self.support_radius(u) {
            return self.area;
        }
        let tol = CLIP_TOLERANCE * self.diameter;
        let cycle = self.full_cycle();
        let upper = clip_half_plane(&cycle, u, r, tol);
        let both = clip_half_plane(&upper, -u, r, tol);
        let pts: Vec<[f64; 2]> = both.iter().map(|p| [p.x, p.y]).collect();
        shoelace(&pts).max(0.0)
    }

    /// Area of the intersection with an axis-aligned box.
    pub fn box_area(&self, lo: [f64; 2], hi: [f64; 2]) -> f64 {
        let tol = CLIP_TOLERANCE * self.diameter;
        let mut poly = self.full_cycle();
        for (u, c) in [
            (Vector2::new(1.0, 0.0), hi[0]),
            (Vector2::new(-1.0, 0.0), -lo[0]),
            (Vector2::new(0.0, 1.0), hi[1]),
            (Vector2::new(0.0, -1.0), -lo[1]),
        ] {
            poly = clip_half_plane(&poly, u, c, tol);
        }
        let pts: Vec<[f64; 2]> = poly.iter().map(|p| [p.x, p.y]).collect();
        shoelace(&pts).max(0.0)
    }

    /// Whether the point lies in the closed polygon (exact predicate).
    pub fn contains(&self, x: Vector2<f64>) -> bool {
        let n = 2 * self.half.len() as isize;
        (0..n).all(|i| {
            let a = self.vertex(i);
            let b = self.vertex(i + 1);
            orientation_2d([a.x, a.y], [b.x, b.y], [x.x, x.y]) >= 0.0
        })
    }
}

/// Sutherland–Hodgman clip of a convex polygon against `<x, u> ≤ c`.
/// Vertices within `tol` of the line count as inside.
pub fn clip_half_plane(
    poly: &[Vector2<f64>],
    u: Vector2<f64>,
    c: f64,
    tol: f64,
) -> Vec<Vector2<f64>> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let da = a.dot(&u) - c;
        let db = b.dot(&u) - c;
        let a_in = da <= tol;
        let b_in = db <= tol;
        if a_in {
            out.push(a);
        }
        if (a_in && !b_in && da < -tol) || (!a_in && b_in && db < -tol) {
            out.push(a + (b - a) * (da / (da - db)));
        }
    }
    out
}

/// Polygon area as a free function.
pub fn polygon_area(p: &SymmetricPolygon) -> f64 {
    p.area()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: f64, y: f64) -> Vector2<f64> {
        Vector2::new(x, y)
    }

    #[test]
    fn area_examples() {
        assert_eq!(polygon_area(&SymmetricPolygon::square(1.0)), 4.0);
        let diamond = SymmetricPolygon::new(vec![v(1.0, 0.0), v(0.0, 1.0)]).unwrap();
        assert_eq!(polygon_area(&diamond), 2.0);
        let hex = SymmetricPolygon::regular(3, 1.0).unwrap();
        assert_relative_eq!(hex.area(), 3.0 * 3f64.sqrt() / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn rejects_degenerate_and_clockwise() {
        assert!(SymmetricPolygon::new(vec![v(1.0, 0.0)]).is_err());
        assert!(SymmetricPolygon::new(vec![v(1.0, 0.0), v(2.0, 0.0)]).is_err());
        assert!(SymmetricPolygon::new(vec![v(0.0, 1.0), v(1.0, 0.0)]).is_err());
        // (1,1), (0,1), (-1,1) has a straight angle at (0,1).
        assert!(SymmetricPolygon::new(vec![v(1.0, 1.0), v(0.0, 1.0), v(-1.0, 1.0)]).is_err());
        assert!(SymmetricPolygon::new(vec![v(f64::NAN, 0.0), v(0.0, 1.0)]).is_err());
    }

    #[test]
    fn chord_slab_examples() {
        let sq = SymmetricPolygon::square(1.0);
        let (l, a) = sq.chord_and_slab(0.5, 0.0);
        assert_relative_eq!(l, 2.0, max_relative = 1e-14);
        assert_relative_eq!(a, 2.0, max_relative = 1e-14);

        let (l, a) = sq.chord_and_slab(0.0, PI / 4.0);
        assert_relative_eq!(l, 2.0 * 2f64.sqrt(), max_relative = 1e-14);
        assert_eq!(a, 0.0);

        let (l, a) = sq.chord_and_slab(2f64.sqrt() / 2.0, PI / 4.0);
        assert_relative_eq!(l, 2f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(a, 3.0, max_relative = 1e-12);

        let (l, a) = sq.chord_and_slab(5.0, 1.0);
        assert_eq!((l, a), (0.0, 4.0));
    }

    #[test]
    fn linear_image_keeps_orientation() {
        let hex = SymmetricPolygon::regular(3, 1.0).unwrap();
        let flip = Matrix2::new(1.0, 0.0, 0.0, -1.0);
        let img = hex.linear_image(&flip).unwrap();
        assert_relative_eq!(img.area(), hex.area(), max_relative = 1e-14);
        let shear = Matrix2::new(2.0, 1.0, 0.0, 0.5);
        assert_relative_eq!(
            hex.linear_image(&shear).unwrap().area(),
            hex.area(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn slab_derivative_is_twice_chord() {
        let hex = SymmetricPolygon::new(vec![v(1.0, 0.2), v(0.3, 0.9), v(-0.6, 0.7)]).unwrap();
        let h = 1e-6;
        for k in 0..40 {
            let theta = 0.137 + k as f64 * PI / 40.0;
            let u = Vector2::new(theta.cos(), theta.sin());
            let rmax = hex.support_radius(u);
            let kinks: Vec<f64> = hex.half_vertices().iter().map(|p| p.dot(&u).abs()).collect();
            for j in 1..10 {
                let r = rmax * j as f64 / 10.0;
                if kinks.iter().any(|&k| (k - r).abs() < 1e-3) {
                    continue;
                }
                let d = (hex.slab_area(r + h, u) - hex.slab_area(r - h, u)) / (2.0 * h);
                assert!((d - 2.0 * hex.chord(r, u)).abs() < 1e-4, "theta {theta} r {r}");
            }
        }
    }

    #[test]
    fn slab_is_monotone_and_saturates() {
        let hex = SymmetricPolygon::regular(3, 1.3).unwrap();
        let u = Vector2::new(0.3f64.cos(), 0.3f64.sin());
        let h = hex.support_radius(u);
        let mut prev = 0.0;
        for k in 0..=50 {
            let a = hex.slab_area(h * k as f64 / 50.0, u);
            assert!(a >= prev - 1e-15);
            prev = a;
        }
        assert_relative_eq!(prev, hex.area(), max_relative = 1e-14);
        assert_eq!(hex.chord(h * 1.0001, u), 0.0);
    }
}
