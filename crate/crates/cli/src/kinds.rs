//! Built-in bodies selectable with `--kind`.

use nalgebra::Vector2;
use symvol::bodies::{Body, Crosspolytope, Ellipsoid, Parallelotope, SymmetricPolygon};

use crate::Failure;

pub const KINDS: [&str; 8] = ["square", "cube", "disc", "ball", "hexagon", "octagon", "diamond", "octahedron"];

/// Unit-scale representative of each kind. Moments are affine invariant, so
/// scale does not matter.
pub fn builtin(name: &str) -> Result<Body, Failure> {
    let body = match name {
        "square" => Body::Polygon(SymmetricPolygon::square(1.0)),
        "cube" => Body::Parallelotope(Parallelotope::cube(3, 1.0)?),
        "disc" => Body::Ellipsoid(Ellipsoid::ball(2, 1.0)?),
        "ball" => Body::Ellipsoid(Ellipsoid::ball(3, 1.0)?),
        "hexagon" => Body::Polygon(SymmetricPolygon::regular(3, 1.0)?),
        "octagon" => Body::Polygon(SymmetricPolygon::regular(4, 1.0)?),
        "diamond" => Body::Polygon(SymmetricPolygon::new(vec![Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)])?),
        "octahedron" => Body::Crosspolytope(Crosspolytope::standard(3)?),
        _ => {
            return Err(Failure::usage(format!(
                "unknown body kind {name:?}; expected one of {}",
                KINDS.join(", ")
            )))
        }
    };
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_builds() {
        for k in KINDS {
            let b = builtin(k).unwrap();
            assert!(b.volume() > 0.0, "{k}");
        }
        assert_eq!(builtin("heptagon").unwrap_err().code, 2);
    }
}
