//! Ellipsoids, parallelotopes and crosspolytopes in dimension 2 or 3, each
//! given as the image of a standard body under a linear map.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector2};
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::polygon::SymmetricPolygon;
use crate::error::{domain, Error, Result};

fn check_matrix(m: &DMatrix<f64>) -> Result<f64> {
    let n = m.nrows();
    if m.ncols() != n || !(n == 2 || n == 3) {
        return Err(Error::InvalidBody(format!(
            "expected a 2x2 or 3x3 matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidBody("non-finite matrix entry".into()));
    }
    let det = m.determinant();
    if det == 0.0 {
        return Err(Error::InvalidBody("matrix is singular".into()));
    }
    Ok(det)
}

fn unit_ball_volume(n: usize) -> f64 {
    match n {
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => unreachable!(),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).product::<usize>() as f64
}

#[inline]
fn apply(m: &DMatrix<f64>, y: &[f64], out: &mut [f64]) {
    let n = y.len();
    for (i, o) in out.iter_mut().enumerate().take(n) {
        let mut s = 0.0;
        for (j, yj) in y.iter().enumerate() {
            s += m[(i, j)] * yj;
        }
        *o = s;
    }
}

/// `M·B` where `B` is the closed Euclidean unit ball and `M` symmetric
/// positive definite.
#[derive(Clone, Debug, PartialEq)]
pub struct Ellipsoid {
    shape: DMatrix<f64>,
    det: f64,
}

impl Ellipsoid {
    pub fn new(shape: DMatrix<f64>) -> Result<Self> {
        let det = check_matrix(&shape)?;
        let n = shape.nrows();
        let scale = shape.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for i in 0..n {
            for j in 0..i {
                if (shape[(i, j)] - shape[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidBody("ellipsoid matrix is not symmetric".into()));
                }
            }
        }
        if shape.clone().cholesky().is_none() {
            return Err(Error::InvalidBody(
                "ellipsoid matrix is not positive definite".into(),
            ));
        }
        Ok(Self { shape, det })
    }

    /// Euclidean ball of the given radius.
    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        if !(n == 2 || n == 3) {
            return domain(format!("ellipsoids are supported in dimension 2 or 3, got {n}"));
        }
        Self::new(DMatrix::identity(n, n) * radius)
    }

    pub fn dimension(&self) -> usize {
        self.shape.nrows()
    }

    pub fn shape(&self) -> &DMatrix<f64> {
        &self.shape
    }

    pub fn volume(&self) -> f64 {
        self.det.abs() * unit_ball_volume(self.dimension())
    }

    /// `|Mᵀu|`.
    pub fn support_radius(&self, u: &[f64]) -> f64 {
        let u = DVector::from_column_slice(u);
        (self.shape.transpose() * u).norm()
    }

    /// Polar method: Gaussian direction times `U^{1/n}` radius, then `M`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let n = self.dimension();
        let mut y = [0.0f64; 3];
        let mut norm2 = 0.0;
        while norm2 == 0.0 {
            norm2 = 0.0;
            for yi in y.iter_mut().take(n) {
                *yi = rng.sample(StandardNormal);
                norm2 += *yi * *yi;
            }
        }
        let u: f64 = rng.random();
        let radius = u.powf(1.0 / n as f64) / norm2.sqrt();
        for yi in y.iter_mut().take(n) {
            *yi *= radius;
        }
        apply(&self.shape, &y[..n], out);
    }

    /// Reduces a cut of the ellipsoid in direction `u` at offset `r` to a cut
    /// of the unit ball at offset `r / h`, `h` the support radius.
    fn reduced_offset(&self, r: f64, u: &[f64]) -> Result<(f64, f64)> {
        if !(r >= 0.0) {
            return domain(format!("offset must be nonnegative, got {r}"));
        }
        let h = self.support_radius(u);
        Ok(((r / h).min(1.0), h))
    }

    /// Chord length of the line `<x, u> = r` (n = 2).
    pub fn chord(&self, r: f64, u: &[f64]) -> Result<f64> {
        self.require_dim(2)?;
        let (s, h) = self.reduced_offset(r, u)?;
        Ok(self.det.abs() / h * 2.0 * (1.0 - s * s).max(0.0).sqrt())
    }

    /// Section area of the plane `<x, u> = r` (n = 3).
    pub fn section_area(&self, r: f64, u: &[f64]) -> Result<f64> {
        self.require_dim(3)?;
        let (s, h) = self.reduced_offset(r, u)?;
        Ok(self.det.abs() / h * PI * (1.0 - s * s).max(0.0))
    }

    /// Measure of `{|<x, u>| ≤ r} ∩ E`.
    pub fn slab_measure(&self, r: f64, u: &[f64]) -> Result<f64> {
        let (s, _) = self.reduced_offset(r, u)?;
        let unit = match self.dimension() {
            2 => 2.0 * (s * (1.0 - s * s).max(0.0).sqrt() + s.asin()),
            _ => 2.0 * PI * (s - s * s * s / 3.0),
        };
        Ok(self.det.abs() * unit)
    }

    fn require_dim(&self, n: usize) -> Result<()> {
        if self.dimension() == n {
            Ok(())
        } else {
            Err(Error::Unsupported(format!(
                "operation needs dimension {n}, body has dimension {}",
                self.dimension()
            )))
        }
    }
}

/// Section area `A` and slab volume `V` of a 3-D ellipsoid cut at offset `r`
/// in direction `u` (unit vector).
pub fn section_and_slab_3d(e: &Ellipsoid, r: f64, u: &[f64]) -> Result<(f64, f64)> {
    Ok((e.section_area(r, u)?, e.slab_measure(r, u)?))
}

/// `G·[-1, 1]ⁿ`, generators are the columns of `G`.
#[derive(Clone, Debug, PartialEq)]
pub struct Parallelotope {
    generators: DMatrix<f64>,
    det: f64,
}

impl Parallelotope {
    pub fn new(generators: DMatrix<f64>) -> Result<Self> {
        let det = check_matrix(&generators)?;
        Ok(Self { generators, det })
    }

    /// `[-a, a]ⁿ`.
    pub fn cube(n: usize, half_side: f64) -> Result<Self> {
        Self::new(DMatrix::identity(n, n) * half_side)
    }

    pub fn dimension(&self) -> usize {
        self.generators.nrows()
    }

    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    pub fn volume(&self) -> f64 {
        self.det.abs() * 2f64.powi(self.dimension() as i32)
    }

    pub fn support_radius(&self, u: &[f64]) -> f64 {
        let u = DVector::from_column_slice(u);
        self.generators
            .column_iter()
            .map(|g| g.dot(&u).abs())
            .sum()
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let n = self.dimension();
        let mut y = [0.0f64; 3];
        for yi in y.iter_mut().take(n) {
            *yi = 2.0 * rng.random::<f64>() - 1.0;
        }
        apply(&self.generators, &y[..n], out);
    }

    /// The same body as a symmetric polygon (n = 2 only).
    pub fn to_polygon(&self) -> Result<SymmetricPolygon> {
        if self.dimension() != 2 {
            return Err(Error::Unsupported("polygon view needs dimension 2".into()));
        }
        let g1 = Vector2::new(self.generators[(0, 0)], self.generators[(1, 0)]);
        let mut g2 = Vector2::new(self.generators[(0, 1)], self.generators[(1, 1)]);
        if self.det < 0.0 {
            g2 = -g2;
        }
        SymmetricPolygon::new(vec![g1 + g2, g2 - g1])
    }
}

/// `conv{±g_1, …, ±g_n}`, generators are the columns of `G`.
#[derive(Clone, Debug, PartialEq)]
pub struct Crosspolytope {
    generators: DMatrix<f64>,
    det: f64,
}

impl Crosspolytope {
    pub fn new(generators: DMatrix<f64>) -> Result<Self> {
        let det = check_matrix(&generators)?;
        Ok(Self { generators, det })
    }

    /// Unit ℓ₁-ball.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn dimension(&self) -> usize {
        self.generators.nrows()
    }

    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    pub fn volume(&self) -> f64 {
        let n = self.dimension();
        self.det.abs() * 2f64.powi(n as i32) / factorial(n)
    }

    pub fn support_radius(&self, u: &[f64]) -> f64 {
        let u = DVector::from_column_slice(u);
        self.generators
            .column_iter()
            .map(|g| g.dot(&u).abs())
            .fold(0.0, f64::max)
    }

    /// Normalized exponentials give a uniform point of the simplex
    /// `{y ≥ 0, Σy ≤ 1}`; independent random signs spread it over the ℓ₁-ball.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let n = self.dimension();
        let mut e = [0.0f64; 4];
        let mut total = 0.0;
        for ei in e.iter_mut().take(n + 1) {
            *ei = rng.sample(Exp1);
            total += *ei;
        }
        let signs: u32 = rng.random();
        let mut y = [0.0f64; 3];
        for (i, yi) in y.iter_mut().enumerate().take(n) {
            let s = if signs >> i & 1 == 1 { -1.0 } else { 1.0 };
            *yi = s * e[i] / total;
        }
        apply(&self.generators, &y[..n], out);
    }

    pub fn to_polygon(&self) -> Result<SymmetricPolygon> {
        if self.dimension() != 2 {
            return Err(Error::Unsupported("polygon view needs dimension 2".into()));
        }
        let g1 = Vector2::new(self.generators[(0, 0)], self.generators[(1, 0)]);
        let mut g2 = Vector2::new(self.generators[(0, 1)], self.generators[(1, 1)]);
        if self.det < 0.0 {
            g2 = -g2;
        }
        SymmetricPolygon::new(vec![g1, g2])
    }
}
