//! Expected symmetric hull volume by integral-geometric reduction.
//!
//! For a planar symmetric body of unit area
//!
//! ```text
//! E V_{K,N} = 1 - (N/3) ∫_0^{2π} ∫_0^∞ A(r,θ)^{N-1} ℓ(r,θ)^3 dr dθ
//! ```
//!
//! and for the unit-volume ball in R³ the angular integrals collapse to the
//! solid angle 4π, leaving a radial integral of `V^{N-2} A^3 a`, where `a` is
//! the expected triangle area of three uniform points in a disc section.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;

use super::{integrate_1d, integrate_pieces, QuadConfig};
use crate::bodies::{section_and_slab_3d, Ellipsoid, SymmetricPolygon};
use crate::error::{domain, Result};

/// Expected area of a random triangle in a disc, as a fraction of the disc.
const DISC_TRIANGLE_FRACTION: f64 = 35.0 / (48.0 * PI * PI);

/// Symmetry group of a polygon acting on directions, as detected from the
/// vertex set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolygonSymmetry {
    /// Order k of the rotation subgroup (at least 2 for a symmetric body).
    pub rotation_order: usize,
    /// Direction angle of a mirror axis, if any.
    pub mirror_axis: Option<f64>,
}

fn same_vertex_set(a: &[Vector2<f64>], b: &[Vector2<f64>], tol: f64) -> bool {
    a.iter().all(|p| b.iter().any(|q| (p - q).norm() <= tol))
}

/// Detects rotations by 2π/k and mirror axes that map the vertex set onto
/// itself within `1e-12 · diameter`.
pub fn polygon_symmetry(p: &SymmetricPolygon) -> PolygonSymmetry {
    let cycle = p.full_cycle();
    let n = cycle.len();
    let tol = 1e-12 * p.diameter();
    let rotation_order = (2..=n)
        .rev()
        .filter(|k| n.is_multiple_of(*k))
        .find(|&k| {
            let phi = 2.0 * PI / k as f64;
            let rot = Matrix2::new(phi.cos(), -phi.sin(), phi.sin(), phi.cos());
            let image: Vec<Vector2<f64>> = cycle.iter().map(|v| rot * v).collect();
            same_vertex_set(&image, &cycle, tol)
        })
        .unwrap_or(2);
    let candidates = (0..n).flat_map(|j| [cycle[j], cycle[j] + cycle[(j + 1) % n]]);
    let mut mirror_axis = None;
    for c in candidates {
        let axis = c.normalize();
        let image: Vec<Vector2<f64>> = cycle
            .iter()
            .map(|v| axis * (2.0 * v.dot(&axis)) - v)
            .collect();
        if same_vertex_set(&image, &cycle, tol) {
            mirror_axis = Some(axis.y.atan2(axis.x));
            break;
        }
    }
    PolygonSymmetry {
        rotation_order,
        mirror_axis,
    }
}

/// Directions in `[lo, hi]` at which the ordering of the breakpoints
/// `|<v_i, u_θ>|` changes; between them the θ-integrand is analytic.
fn critical_angles(cycle: &[Vector2<f64>], lo: f64, hi: f64) -> Vec<f64> {
    let mut normals: Vec<Vector2<f64>> = cycle.to_vec();
    for i in 0..cycle.len() {
        for j in i + 1..cycle.len() {
            normals.push(cycle[i] - cycle[j]);
        }
    }
    let mut angles = vec![lo, hi];
    for q in normals {
        if q.norm() == 0.0 {
            continue;
        }
        // u_θ ⟂ q  ⇔  θ ≡ arg(q) + π/2 (mod π)
        let base = (q.y.atan2(q.x) + 0.5 * PI).rem_euclid(PI);
        let mut theta = base + ((lo - base) / PI).floor() * PI;
        while theta < hi {
            if theta > lo {
                angles.push(theta);
            }
            theta += PI;
        }
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
    angles
}

/// `∫_0^{h(θ)} A(r,θ)^{N-1} ℓ(r,θ)^3 dr`, split at the vertex-crossing radii.
fn radial_integral(p: &SymmetricPolygon, n_points: usize, theta: f64, cfg: &QuadConfig) -> Result<f64> {
    let u = Vector2::new(theta.cos(), theta.sin());
    let mut cuts: Vec<f64> = p.half_vertices().iter().map(|v| v.dot(&u).abs()).collect();
    cuts.push(0.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    let power = (n_points - 1) as i32;
    let integrand = |r: f64| {
        let l = p.chord(r, u);
        let a = p.slab_area(r, u);
        a.powi(power) * l * l * l
    };
    Ok(integrate_pieces(integrand, &cuts, cfg)?.value)
}

/// Expected normalized area of the symmetric hull of `n_points` uniform
/// points in the polygon, by numerical evaluation of the planar reduction
/// formula. The polygon is first rescaled to unit area.
pub fn ev_symmetric_2d(p: &SymmetricPolygon, n_points: usize, cfg: &QuadConfig) -> Result<f64> {
    if n_points < 2 {
        return domain(format!("need N >= 2, got {n_points}"));
    }
    cfg.validate()?;
    let unit = p.normalized();
    let sym = polygon_symmetry(&unit);
    let k = sym.rotation_order as f64;
    // Fundamental domain of the direction circle and its multiplicity.
    let (lo, hi, multiplicity) = match sym.mirror_axis {
        Some(phi) => (phi, phi + PI / k, 2.0 * k),
        None => (0.0, 2.0 * PI / k, k),
    };
    let angles = critical_angles(&unit.full_cycle(), lo, hi);
    let pieces = (angles.len() - 1) as f64;
    let outer_cfg = QuadConfig {
        abs_tol: cfg.abs_tol / (pieces * multiplicity),
        ..*cfg
    };
    let inner_cfg = QuadConfig {
        abs_tol: outer_cfg.abs_tol * 1e-3,
        rel_tol: cfg.rel_tol * 1e-3,
        ..*cfg
    };
    let parts: Vec<Result<f64>> = angles
        .par_windows(2)
        .map(|w| {
            // Inner failures surface as NaN and are reported below.
            let radial = |theta| radial_integral(&unit, n_points, theta, &inner_cfg).unwrap_or(f64::NAN);
            integrate_1d(radial, w[0], w[1], &outer_cfg).map(|q| q.value)
        })
        .collect();
    let mut total = 0.0;
    for part in parts {
        total += part?;
    }
    if !total.is_finite() {
        return domain("radial quadrature failed inside the angular integral");
    }
    Ok(1.0 - n_points as f64 / 3.0 * multiplicity * total)
}

/// Expected normalized volume of the symmetric hull of `n_points` uniform
/// points in a 3-D ellipsoid, from the spatial reduction formula applied to
/// the unit-volume ball.
pub fn ev_symmetric_ball_3d(n_points: usize, cfg: &QuadConfig) -> Result<f64> {
    if n_points < 3 {
        return domain(format!("need N >= 3, got {n_points}"));
    }
    let radius = (3.0 / (4.0 * PI)).cbrt();
    let ball = Ellipsoid::ball(3, radius)?;
    let axis = [0.0, 0.0, 1.0];
    let power = (n_points - 2) as i32;
    let integrand = |r: f64| {
        let (a, v) = section_and_slab_3d(&ball, r, &axis).expect("r is nonnegative");
        let triangle = DISC_TRIANGLE_FRACTION * a;
        v.powi(power) * a * a * a * triangle
    };
    let radial = integrate_1d(integrand, 0.0, radius, cfg)?.value;
    let n = n_points as f64;
    let solid_angle = 4.0 * PI;
    Ok(1.0 - 1.0 / (n + 1.0) - 2.0 * n * (n - 1.0) / 3.0 * solid_angle * radial)
}

#[cfg(test)]
mod tests {
    use super::*;


    fn hexagon() -> SymmetricPolygon {
        SymmetricPolygon::regular(3, 1.0).unwrap()
    }

    #[test]
    fn detects_symmetry() {
        let sq = polygon_symmetry(&SymmetricPolygon::square(1.0));
        assert_eq!(sq.rotation_order, 4);
        assert!(sq.mirror_axis.is_some());
        assert_eq!(polygon_symmetry(&hexagon()).rotation_order, 6);
        assert_eq!(
            polygon_symmetry(&SymmetricPolygon::regular(4, 1.0).unwrap()).rotation_order,
            8
        );
        let skew = SymmetricPolygon::new(vec![
            Vector2::new(1.0, 0.0),
            Vector2::new(0.3, 0.9),
            Vector2::new(-0.6, 0.7),
        ])
        .unwrap();
        let s = polygon_symmetry(&skew);
        assert_eq!(s.rotation_order, 2);
        assert_eq!(s.mirror_axis, None);
    }

    #[test]
    fn square_matches_harmonic_formula() {
        let cfg = QuadConfig::with_tol(1e-9);
        let sq = SymmetricPolygon::square(1.0);
        let v2 = ev_symmetric_2d(&sq, 2, &cfg).unwrap();
        assert!((v2 - 5.0 / 27.0).abs() < 1e-6, "{v2}");
        let v5 = ev_symmetric_2d(&sq, 5, &cfg).unwrap();
        assert!((v5 - 41.0 / 90.0).abs() < 1e-6, "{v5}");
    }

    #[test]
    fn hexagon_lies_between_extremes() {
        let cfg = QuadConfig::with_tol(1e-9);
        let v = ev_symmetric_2d(&hexagon(), 2, &cfg).unwrap();
        assert!(v > 16.0 / (9.0 * PI * PI) && v < 5.0 / 27.0, "{v}");
    }

    #[test]
    fn linear_invariance_and_monotonicity() {
        let cfg = QuadConfig::with_tol(1e-10);
        let p = SymmetricPolygon::new(vec![
            Vector2::new(1.0, 0.0),
            Vector2::new(0.3, 0.9),
            Vector2::new(-0.6, 0.7),
        ])
        .unwrap();
        let t = Matrix2::new(2.0, 0.7, -0.3, 0.5);
        let a = ev_symmetric_2d(&p, 3, &cfg).unwrap();
        let b = ev_symmetric_2d(&p.linear_image(&t).unwrap(), 3, &cfg).unwrap();
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        let mut prev = 0.0;
        for n in 2..=6 {
            let v = ev_symmetric_2d(&p, n, &cfg).unwrap();
            assert!(v > prev, "N={n}: {v} <= {prev}");
            prev = v;
        }
    }

    #[test]
    fn ball_matches_rationals() {
        let cfg = QuadConfig::with_tol(1e-13);
        for (n, want) in [(3, 27.0 / 512.0), (4, 72.0 / 715.0), (6, 58104.0 / 323323.0)] {
            let v = ev_symmetric_ball_3d(n, &cfg).unwrap();
            assert!((v - want).abs() < 1e-9, "N={n}: {v} vs {want}");
        }
    }

    #[test]
    fn rejects_small_n() {
        let cfg = QuadConfig::default();
        assert!(ev_symmetric_2d(&hexagon(), 1, &cfg).is_err());
        assert!(ev_symmetric_ball_3d(2, &cfg).is_err());
    }
}
