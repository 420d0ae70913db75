//! Symmetric convex bodies: canonical shapes, uniform sampling, exact hull
//! volumes, and the chord/slab/section functions used by the reduction
//! formulas.
//!
//! Bodies are stored unnormalized; callers divide by [`Body::volume`] where a
//! normalized quantity is wanted.

pub mod hull;
pub mod polygon;
pub mod solids;

use nalgebra::{DMatrix, Vector2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use hull::{
    convex_hull_2d, hull_volume_2d, hull_volume_3d, hull_volume_flat, symmetric_hull_volume_2d,
    symmetric_hull_volume_3d,
};
pub use polygon::{polygon_area, SymmetricPolygon};
pub use solids::{section_and_slab_3d, Crosspolytope, Ellipsoid, Parallelotope};

/// The closed family of bodies the library works with.
#[derive(Clone, Debug, PartialEq)]
pub enum Body {
    Polygon(SymmetricPolygon),
    Ellipsoid(Ellipsoid),
    Parallelotope(Parallelotope),
    Crosspolytope(Crosspolytope),
}

impl Body {
    pub fn dimension(&self) -> usize {
        match self {
            Body::Polygon(_) => 2,
            Body::Ellipsoid(e) => e.dimension(),
            Body::Parallelotope(p) => p.dimension(),
            Body::Crosspolytope(c) => c.dimension(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Body::Polygon(p) => p.area(),
            Body::Ellipsoid(e) => e.volume(),
            Body::Parallelotope(p) => p.volume(),
            Body::Crosspolytope(c) => c.volume(),
        }
    }

    /// Writes one uniform point of the body into `out[..dimension]`.
    #[inline]
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Body::Polygon(p) => {
                let x = p.sample(rng);
                out[0] = x.x;
                out[1] = x.y;
            }
            Body::Ellipsoid(e) => e.sample_into(rng, out),
            Body::Parallelotope(p) => p.sample_into(rng, out),
            Body::Crosspolytope(c) => c.sample_into(rng, out),
        }
    }

    pub fn support_radius(&self, u: &[f64]) -> f64 {
        match self {
            Body::Polygon(p) => p.support_radius(Vector2::new(u[0], u[1])),
            Body::Ellipsoid(e) => e.support_radius(u),
            Body::Parallelotope(p) => p.support_radius(u),
            Body::Crosspolytope(c) => c.support_radius(u),
        }
    }

    /// Planar view of a 2-D polytope.
    pub fn as_polygon(&self) -> Result<SymmetricPolygon> {
        match self {
            Body::Polygon(p) => Ok(p.clone()),
            Body::Parallelotope(p) => p.to_polygon(),
            Body::Crosspolytope(c) => c.to_polygon(),
            Body::Ellipsoid(_) => Err(Error::Unsupported("an ellipsoid is not a polygon".into())),
        }
    }

    /// Chord length `ℓ(r, u)` (n = 2).
    pub fn chord(&self, r: f64, u: &[f64]) -> Result<f64> {
        check_offset(r)?;
        match self {
            Body::Ellipsoid(e) => e.chord(r, u),
            _ if self.dimension() == 2 => Ok(self.as_polygon()?.chord(r, Vector2::new(u[0], u[1]))),
            _ => Err(Error::Unsupported("chord is defined for planar bodies".into())),
        }
    }

    /// Measure of the slab `{|<x, u>| ≤ r} ∩ K`.
    pub fn slab_measure(&self, r: f64, u: &[f64]) -> Result<f64> {
        check_offset(r)?;
        match self {
            Body::Ellipsoid(e) => e.slab_measure(r, u),
            _ if self.dimension() == 2 => {
                Ok(self.as_polygon()?.slab_area(r, Vector2::new(u[0], u[1])))
            }
            _ => Err(Error::Unsupported(
                "slab measure of 3-D polytopes is not implemented".into(),
            )),
        }
    }

    /// Area of the planar section `{<x, u> = r} ∩ K` (n = 3).
    pub fn section_area(&self, r: f64, u: &[f64]) -> Result<f64> {
        check_offset(r)?;
        match self {
            Body::Ellipsoid(e) => e.section_area(r, u),
            _ => Err(Error::Unsupported(
                "section area is implemented for 3-D ellipsoids only".into(),
            )),
        }
    }

    pub fn from_description(desc: &BodyDescription) -> Result<Self> {
        let matrix = |desc: &BodyDescription| -> Result<DMatrix<f64>> {
            let rows = desc
                .matrix
                .as_ref()
                .ok_or_else(|| Error::InvalidBody(format!("kind {:?} needs \"matrix\"", desc.kind)))?;
            let n = desc.dimension;
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidBody(format!("matrix must be {n}x{n}")));
            }
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            Ok(DMatrix::from_row_slice(n, n, &flat))
        };
        let body = match desc.kind {
            BodyKind::Polygon => {
                if desc.dimension != 2 {
                    return Err(Error::InvalidBody("polygons have dimension 2".into()));
                }
                let hv = desc.half_vertices.as_ref().ok_or_else(|| {
                    Error::InvalidBody("kind \"polygon\" needs \"half_vertices\"".into())
                })?;
                Body::Polygon(SymmetricPolygon::new(
                    hv.iter().map(|p| Vector2::new(p[0], p[1])).collect(),
                )?)
            }
            BodyKind::Ellipsoid => Body::Ellipsoid(Ellipsoid::new(matrix(desc)?)?),
            BodyKind::Parallelotope => Body::Parallelotope(Parallelotope::new(matrix(desc)?)?),
            BodyKind::Crosspolytope => Body::Crosspolytope(Crosspolytope::new(matrix(desc)?)?),
        };
        if body.dimension() != desc.dimension {
            return Err(Error::InvalidBody(format!(
                "declared dimension {} does not match data",
                desc.dimension
            )));
        }
        Ok(body)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let desc: BodyDescription = serde_json::from_str(text)?;
        Self::from_description(&desc)
    }

    pub fn description(&self) -> BodyDescription {
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            m.row_iter().map(|r| r.iter().copied().collect()).collect()
        };
        match self {
            Body::Polygon(p) => BodyDescription {
                kind: BodyKind::Polygon,
                dimension: 2,
                half_vertices: Some(p.half_vertices().iter().map(|v| [v.x, v.y]).collect()),
                matrix: None,
            },
            Body::Ellipsoid(e) => BodyDescription {
                kind: BodyKind::Ellipsoid,
                dimension: e.dimension(),
                half_vertices: None,
                matrix: Some(rows(e.shape())),
            },
            Body::Parallelotope(p) => BodyDescription {
                kind: BodyKind::Parallelotope,
                dimension: p.dimension(),
                half_vertices: None,
                matrix: Some(rows(p.generators())),
            },
            Body::Crosspolytope(c) => BodyDescription {
                kind: BodyKind::Crosspolytope,
                dimension: c.dimension(),
                half_vertices: None,
                matrix: Some(rows(c.generators())),
            },
        }
    }
}

fn check_offset(r: f64) -> Result<()> {
    if r >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("offset must be nonnegative, got {r}")))
    }
}

/// Draws one uniform point of `body`.
pub fn sample_uniform<R: Rng + ?Sized>(body: &Body, rng: &mut R) -> Vec<f64> {
    let mut out = vec![0.0; body.dimension()];
    body.sample_into(rng, &mut out);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyKind {
    Polygon,
    Ellipsoid,
    Parallelotope,
    Crosspolytope,
}

/// JSON body document. Matrices are row-major; for parallelotopes and
/// crosspolytopes the generators are the matrix columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyDescription {
    pub kind: BodyKind,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_vertices: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}


#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn json_round_trip_and_errors() {
        let body = Body::from_json(r#"{"kind":"polygon","dimension":2,"half_vertices":[[1,0],[0.5,0.8],[-0.5,0.8]]}"#)
            .unwrap();
        let text = serde_json::to_string(&body.description()).unwrap();
        assert_eq!(Body::from_json(&text).unwrap(), body);

        let e = Body::from_json(r#"{"kind":"ellipsoid","dimension":3,"matrix":[[1,0,0],[0,1,0],[0,0,1]]}"#)
            .unwrap();
        assert!((e.volume() - 4.0 * PI / 3.0).abs() < 1e-15);

        assert!(Body::from_json(r#"{"kind":"polygon","dimension":2}"#).is_err());
        assert!(Body::from_json(r#"{"kind":"cube","dimension":2}"#).is_err());
        assert!(Body::from_json(r#"{"kind":"ellipsoid","dimension":3,"matrix":[[1,0],[0,1]]}"#).is_err());
        assert!(Body::from_json(r#"{"kind":"parallelotope","dimension":2,"matrix":[[1,0],[0,1]],"extra":1}"#).is_err());
    }

    #[test]
    fn planar_chord_and_slab_agree_across_representations() {
        let sq = Body::Parallelotope(Parallelotope::cube(2, 1.0).unwrap());
        let u = [0.0, 1.0];
        assert_eq!(sq.chord(0.5, &u).unwrap(), 2.0);
        assert_eq!(sq.slab_measure(0.5, &u).unwrap(), 2.0);
        assert_eq!(sq.chord(1.5, &u).unwrap(), 0.0);
        assert!(sq.chord(-1.0, &u).is_err());
        let disc = Body::Ellipsoid(Ellipsoid::ball(2, 1.0).unwrap());
        let want = 2.0 * (0.5 * (0.75f64).sqrt() + 0.5f64.asin());
        assert!((disc.slab_measure(0.5, &[1.0, 0.0]).unwrap() - want).abs() < 1e-15);
        let cube = Body::Parallelotope(Parallelotope::cube(3, 1.0).unwrap());
        assert!(matches!(cube.section_area(0.1, &[0.0, 0.0, 1.0]), Err(Error::Unsupported(_))));
    }
}
