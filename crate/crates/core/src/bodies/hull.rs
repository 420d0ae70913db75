//! Convex hull areas and volumes of finite point sets.
//!
//! Every combinatorial decision (which side of a line or plane a point lies
//! on) goes through Shewchuk's adaptive-precision predicates, so hulls of
//! antipodal point sets never produce inconsistent facets. Only the final
//! area/volume accumulation is done in plain double precision.

use robust::{orient2d, orient3d, Coord, Coord3D};

#[inline]
fn c2(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

#[inline]
fn c3(p: [f64; 3]) -> Coord3D<f64> {
    Coord3D {
        x: p[0],
        y: p[1],
        z: p[2],
    }
}

/// Exact sign of the turn a → b → c: positive for a left (counterclockwise) turn.
#[inline]
pub fn orientation_2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    orient2d(c2(a), c2(b), c2(c))
}

/// Exact sign of `(a - d) · ((b - d) × (c - d))`.
#[inline]
pub fn orientation_3d(a: [f64; 3], b: [f64; 3], c: [f64; 3], d: [f64; 3]) -> f64 {
    orient3d(c3(a), c3(b), c3(c), c3(d))
}

/// Vertices of the convex hull in counterclockwise order (Andrew's monotone
/// chain). Collinear boundary points are dropped. Fewer than three returned
/// vertices means the hull is degenerate.
pub fn convex_hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_unstable_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && orientation_2d(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && orientation_2d(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Shoelace area of a simple polygon given in counterclockwise order.
pub fn shoelace(vertices: &[[f64; 2]]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        twice += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * twice
}

/// Area of the convex hull of a planar point set; 0 for collinear input.
pub fn hull_volume_2d(points: &[[f64; 2]]) -> f64 {
    let hull = convex_hull_2d(points);
    if hull.len() < 3 {
        0.0
    } else {
        shoelace(&hull)
    }
}

/// Triangular facet with outward orientation: `orientation_3d(a, b, c, p) > 0`
/// for points strictly inside the hull.
#[derive(Clone, Copy, Debug)]
struct Facet {
    v: [usize; 3],
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Picks four affinely independent points, or `None` if the set is flat.
fn initial_simplex(points: &[[f64; 3]]) -> Option<[usize; 4]> {
    let p0 = 0;
    let p1 = (1..points.len()).find(|&i| points[i] != points[p0])?;
    let e = sub3(points[p1], points[p0]);
    let mut best = (0.0, usize::MAX);
    for (i, &p) in points.iter().enumerate() {
        let c = cross3(e, sub3(p, points[p0]));
        let m = dot3(c, c);
        if m > best.0 {
            best = (m, i);
        }
    }
    if best.1 == usize::MAX {
        return None;
    }
    let p2 = best.1;
    let mut best = (0.0, usize::MAX);
    for (i, &p) in points.iter().enumerate() {
        let o = orientation_3d(points[p0], points[p1], points[p2], p).abs();
        if o > best.0 {
            best = (o, i);
        }
    }
    if best.1 == usize::MAX {
        return None;
    }
    Some([p0, p1, p2, best.1])
}

/// Boundary facets of the 3-D convex hull (incremental construction).
/// Empty when the points are affinely dependent.
fn hull_facets_3d(points: &[[f64; 3]]) -> Vec<Facet> {
    let Some([a, b, c, d]) = initial_simplex(points) else {
        return Vec::new();
    };
    let oriented = |x: usize, y: usize, z: usize, inside: usize| {
        if orientation_3d(points[x], points[y], points[z], points[inside]) > 0.0 {
            Facet { v: [x, y, z] }
        } else {
            Facet { v: [x, z, y] }
        }
    };
    let mut facets = vec![
        oriented(a, b, c, d),
        oriented(a, b, d, c),
        oriented(a, c, d, b),
        oriented(b, c, d, a),
    ];

    let mut visible = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (i, &p) in points.iter().enumerate() {
        if i == a || i == b || i == c || i == d {
            continue;
        }
        visible.clear();
        visible.extend(facets.iter().map(|f| {
            orientation_3d(points[f.v[0]], points[f.v[1]], points[f.v[2]], p) < 0.0
        }));
        if !visible.iter().any(|&v| v) {
            continue;
        }
        edges.clear();
        for (f, _) in facets.iter().zip(&visible).filter(|(_, &v)| v) {
            edges.push((f.v[0], f.v[1]));
            edges.push((f.v[1], f.v[2]));
            edges.push((f.v[2], f.v[0]));
        }
        let mut kept: Vec<Facet> = facets
            .iter()
            .zip(&visible)
            .filter(|(_, &v)| !v)
            .map(|(f, _)| *f)
            .collect();
        for &(u, w) in &edges {
            if !edges.contains(&(w, u)) {
                kept.push(Facet { v: [u, w, i] });
            }
        }
        facets = kept;
    }
    facets
}

/// Volume of the convex hull of a spatial point set; 0 if affinely dependent.
pub fn hull_volume_3d(points: &[[f64; 3]]) -> f64 {
    let facets = hull_facets_3d(points);
    if facets.is_empty() {
        return 0.0;
    }
    // Signed tetrahedra against an interior reference point keep the terms small.
    let mut centre = [0.0; 3];
    for f in &facets {
        for &k in &f.v {
            for j in 0..3 {
                centre[j] += points[k][j];
            }
        }
    }
    let inv = 1.0 / (3 * facets.len()) as f64;
    centre.iter_mut().for_each(|x| *x *= inv);
    let mut six_vol = 0.0;
    for f in &facets {
        let pa = sub3(points[f.v[0]], centre);
        let pb = sub3(points[f.v[1]], centre);
        let pc = sub3(points[f.v[2]], centre);
        six_vol += dot3(pa, cross3(pb, pc));
    }
    (six_vol / 6.0).abs()
}

/// Area (n = 2) of `conv{±x_1, …, ±x_N}`.
pub fn symmetric_hull_volume_2d(points: &[[f64; 2]]) -> f64 {
    let mut all = Vec::with_capacity(2 * points.len());
    all.extend_from_slice(points);
    all.extend(points.iter().map(|p| [-p[0], -p[1]]));
    hull_volume_2d(&all)
}

/// Volume (n = 3) of `conv{±x_1, …, ±x_N}`.
pub fn symmetric_hull_volume_3d(points: &[[f64; 3]]) -> f64 {
    let mut all = Vec::with_capacity(2 * points.len());
    all.extend_from_slice(points);
    all.extend(points.iter().map(|p| [-p[0], -p[1], -p[2]]));
    hull_volume_3d(&all)
}

/// Hull volume of points stored flat (`n` coordinates per point), optionally
/// symmetrized through the origin. Only n ∈ {2, 3} is supported.
pub fn hull_volume_flat(coords: &[f64], n: usize, symmetric: bool) -> f64 {
    match n {
        2 => {
            let pts: Vec<[f64; 2]> = coords.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
            if symmetric {
                symmetric_hull_volume_2d(&pts)
            } else {
                hull_volume_2d(&pts)
            }
        }
        3 => {
            let pts: Vec<[f64; 3]> = coords
                .chunks_exact(3)
                .map(|c| [c[0], c[1], c[2]])
                .collect();
            if symmetric {
                symmetric_hull_volume_3d(&pts)
            } else {
                hull_volume_3d(&pts)
            }
        }
        _ => panic!("hull volume supports dimensions 2 and 3, got {n}"),
    }
}
