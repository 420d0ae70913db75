//! Closed-form expectations and densities.
//!
//! The parallelogram and 3-D ellipsoid values are exact rationals; the ellipse
//! value is a 1-D integral evaluated numerically.

use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_1d, integrate_tanh_sinh, QuadConfig};

/// Arbitrary-precision rational in lowest terms with a positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(pub BigRational);

impl ExactRational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        Self(BigRational::new(numer.into(), denom.into()))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Nearest double (correctly rounded by `num-rational`).
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

/// Which moment to take: `E V_{K,N}^p` if `symmetric`, else `E U_{K,N}^p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSpec {
    #[serde(rename = "N")]
    pub n_points: usize,
    pub p: f64,
    pub symmetric: bool,
}

impl MomentSpec {
    pub fn new(n_points: usize, p: f64, symmetric: bool) -> Self {
        Self { n_points, p, symmetric }
    }

    /// Checks `p >= 1` and that `N` points can span a body of dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return domain(format!("moment order p must be a finite real >= 1, got {}", self.p));
        }
        let min = if self.symmetric { dim } else { dim + 1 };
        if self.n_points < min {
            let what = if self.symmetric { "symmetric" } else { "nonsymmetric" };
            return domain(format!(
                "{what} hulls in dimension {dim} need N >= {min}, got {}",
                self.n_points
            ));
        }
        Ok(())
    }
}

/// Serializable result of a closed-form evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactValue {
    pub value_decimal: f64,
    pub value_rational: Option<String>,
    pub formula: String,
    #[serde(rename = "N")]
    pub n_points: usize,
}

impl ExactValue {
    pub fn rational(formula: &str, n_points: usize, q: &ExactRational) -> Self {
        Self {
            value_decimal: q.to_f64(),
            value_rational: Some(q.to_string()),
            formula: formula.into(),
            n_points,
        }
    }

    pub fn decimal(formula: &str, n_points: usize, value: f64) -> Self {
        Self {
            value_decimal: value,
            value_rational: None,
            formula: formula.into(),
            n_points,
        }
    }
}

fn harmonic(n: u64) -> BigRational {
    (1..=n).fold(BigRational::zero(), |acc, k| {
        acc + BigRational::new(BigInt::one(), BigInt::from(k))
    })
}

/// `E V_{P,N}` for a parallelogram: `1 - 4 H_{N+1} / (3(N+1))`.
pub fn ev_parallelogram(n_points: usize) -> Result<ExactRational> {
    if n_points < 2 {
        return domain(format!("parallelogram formula needs N >= 2, got {n_points}"));
    }
    let m = n_points as u64 + 1;
    let factor = BigRational::new(BigInt::from(4), BigInt::from(3 * m));
    Ok(ExactRational(BigRational::one() - factor * harmonic(m)))
}

/// `E V_{E,N}` for an ellipse:
/// `1 - 2N/(3π^N) ∫_0^π (t + sin t)^{N-1} (1 + cos t)^2 dt`.
pub fn ev_ellipse(n_points: usize, cfg: &QuadConfig) -> Result<f64> {
    if n_points < 2 {
        return domain(format!("ellipse formula needs N >= 2, got {n_points}"));
    }
    let power = (n_points - 1) as i32;
    // Divide by π inside the integrand so large N does not overflow.
    let integrand = |t: f64| {
        let c = 1.0 + t.cos();
        ((t + t.sin()) / PI).powi(power) * c * c
    };
    let cfg = QuadConfig { abs_tol: cfg.abs_tol.min(1e-10), ..*cfg };
    let integral = integrate_1d(integrand, 0.0, PI, &cfg)?.value;
    Ok(1.0 - 2.0 * n_points as f64 / (3.0 * PI) * integral)
}

/// Integer polynomial, coefficients in increasing degree.
fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow(base: &[BigInt], e: usize) -> Vec<BigInt> {
    (0..e).fold(vec![BigInt::one()], |acc, _| poly_mul(&acc, base))
}

/// `E V_{E,N}` for a 3-D ellipsoid:
/// `1 - 1/(N+1) - 105 N(N-1)/2^{N+5} ∫_0^1 (1-t²)^4 (3t-t³)^{N-2} dt`,
/// with the integrand expanded and integrated term by term.
pub fn ev_ellipsoid(n_points: usize) -> Result<ExactRational> {
    if n_points < 3 {
        return domain(format!("ellipsoid formula needs N >= 3, got {n_points}"));
    }
    let big = |v: i64| BigInt::from(v);
    let one_minus_t2 = [big(1), big(0), big(-1)];
    let cubic = [big(0), big(3), big(0), big(-1)];
    let poly = poly_mul(&poly_pow(&one_minus_t2, 4), &poly_pow(&cubic, n_points - 2));
    let integral = poly
        .iter()
        .enumerate()
        .fold(BigRational::zero(), |acc, (k, c)| {
            acc + BigRational::new(c.clone(), BigInt::from(k + 1))
        });
    let n = BigInt::from(n_points);
    let coef = BigRational::new(
        big(105) * &n * (&n - 1),
        BigInt::one() << (n_points + 5),
    );
    let value = BigRational::one() - BigRational::new(BigInt::one(), n + 1) - coef * integral;
    Ok(ExactRational(value))
}

fn check_finite(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("density argument must be finite, got {t}")))
    }
}

/// Density of `V_{P,2}` for a parallelogram:
/// `∫_{2t-1}^{1} log|s| log|2t - s| ds` on `[0, 1]`, zero elsewhere.
pub fn density_vp2(t: f64) -> Result<f64> {
    check_finite(t)?;
    if !(0.0..=1.0).contains(&t) {
        return Ok(0.0);
    }
    let (lo, hi) = (2.0 * t - 1.0, 1.0);
    let mut cuts = vec![lo];
    cuts.extend([0.0, 2.0 * t].into_iter().filter(|&c| c > lo && c < hi));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.push(hi);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        // Distance to a singular point, exact when it is an endpoint.
        let dist = |c: f64, x: f64, da: f64, db: f64| {
            if c == a {
                da
            } else if c == b {
                db
            } else {
                (x - c).abs()
            }
        };
        let f = |x: f64, da: f64, db: f64| dist(0.0, x, da, db).ln() * dist(2.0 * t, x, da, db).ln();
        total += match integrate_tanh_sinh(f, a, b, 1e-14) {
            Ok(r) => r.value,
            // Refinement stalls only once the estimate is at rounding level.
            Err(Error::NonConvergence { value, .. }) if value.is_finite() => value,
            Err(e) => return Err(e),
        };
    }
    Ok(total.max(0.0))
}

/// Density of `V_{E,2}` for an ellipse: `2πt ∫_{πt/2}^1 s^{-2} √(1-s²) ds`
/// on `[0, 2/π]`, zero elsewhere. The factor 2 comes from `|y|` of a uniform
/// point in the unit disc having density `(4/π)√(1-y²)` on `[0, 1]`. Uses the
/// antiderivative `-√(1-s²)/s - arcsin s`.
pub fn density_ve2(t: f64) -> Result<f64> {
    check_finite(t)?;
    if !(0.0..=2.0 / PI).contains(&t) {
        return Ok(0.0);
    }
    let a = (0.5 * PI * t).min(1.0);
    let value = 4.0 * (1.0 - a * a).sqrt() + 2.0 * PI * t * (a.asin() - 0.5 * PI);
    Ok(value.max(0.0))
}

/// The two planar `N = 2` distributions with known densities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Density {
    /// Parallelogram.
    Vp2,
    /// Ellipse.
    Ve2,
}

impl Density {
    pub fn support(self) -> (f64, f64) {
        match self {
            Density::Vp2 => (0.0, 1.0),
            Density::Ve2 => (0.0, 2.0 / PI),
        }
    }

    pub fn pdf(self, t: f64) -> Result<f64> {
        match self {
            Density::Vp2 => density_vp2(t),
            Density::Ve2 => density_ve2(t),
        }
    }

    /// `∫ t^k f(t) dt` over the support.
    pub fn moment(self, k: i32, cfg: &QuadConfig) -> Result<f64> {
        self.integral_to(self.support().1, k, cfg)
    }

    /// Distribution function `P(V <= t)`.
    pub fn cdf(self, t: f64, cfg: &QuadConfig) -> Result<f64> {
        check_finite(t)?;
        let (lo, hi) = self.support();
        if t <= lo {
            return Ok(0.0);
        }
        Ok(self.integral_to(t.min(hi), 0, cfg)?.min(1.0))
    }

    fn integral_to(self, upper: f64, k: i32, cfg: &QuadConfig) -> Result<f64> {
        let (lo, _) = self.support();
        // density_vp2 has a kink at t = 1/2 where the singular points leave the interval.
        let mut pts = vec![lo];
        if self == Density::Vp2 && upper > 0.5 {
            pts.push(0.5);
        }
        pts.push(upper);
        let mut total = 0.0;
        for w in pts.windows(2) {
            let f = |t: f64| t.powi(k) * self.pdf(t).unwrap_or(f64::NAN);
            total += integrate_1d(f, w[0], w[1], cfg)?.value;
        }
        Ok(total)
    }
}

/// Isotropic constant `L_K` from a second moment: `L² = (n! m / 4^n)^{1/n}`
/// for `m = E V_{K,n}²`, or `L² = (n! m / (n+1))^{1/n}` for
/// `m = E U_{K,n+1}²` with the centroid at the origin.
pub fn isotropic_constant(moment2: f64, n: usize, symmetric: bool) -> Result<f64> {
    if !(moment2 > 0.0) || !moment2.is_finite() {
        return domain(format!("second moment must be positive, got {moment2}"));
    }
    if n == 0 {
        return domain("dimension must be positive");
    }
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let nf = n as f64;
    let l2 = if symmetric {
        0.25 * (fact * moment2).powf(1.0 / nf)
    } else {
        (fact * moment2 / (nf + 1.0)).powf(1.0 / nf)
    };
    Ok(l2.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> ExactRational {
        ExactRational::new(n, d)
    }

    #[test]
    fn parallelogram_examples() {
        assert_eq!(ev_parallelogram(2).unwrap(), q(5, 27));
        assert_eq!(ev_parallelogram(3).unwrap(), q(11, 36));
        assert_eq!(ev_parallelogram(5).unwrap(), q(41, 90));
        assert_eq!(ev_parallelogram(2).unwrap().to_string(), "5/27");
        assert!(ev_parallelogram(1).is_err());
        let mut prev = ev_parallelogram(2).unwrap();
        for n in 3..60 {
            let v = ev_parallelogram(n).unwrap();
            assert!(v > prev && v < q(1, 1));
            prev = v;
        }
    }

    #[test]
    fn ellipsoid_table() {
        assert_eq!(ev_ellipsoid(3).unwrap(), q(27, 512));
        assert_eq!(ev_ellipsoid(4).unwrap(), q(72, 715));
        assert_eq!(ev_ellipsoid(5).unwrap(), q(585, 4096));
        assert_eq!(ev_ellipsoid(6).unwrap(), q(58104, 323323));
        assert!(ev_ellipsoid(2).is_err());
        let mut prev = ev_ellipsoid(3).unwrap();
        for n in 4..=30 {
            let v = ev_ellipsoid(n).unwrap();
            assert!(v > prev, "N={n}");
            prev = v;
        }
    }

    /// Independent route: substitute u = t², so the integral becomes
    /// `½ ∫_0^1 (1-u)^4 u^{(N-3)/2} (3-u)^{N-2} du`, expanded with binomials
    /// in i128 (valid for the small N used here).
    fn ellipsoid_oracle(n: usize) -> BigRational {
        fn binom(n: i128, k: i128) -> i128 {
            (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
        }
        let m = (n - 2) as i128;
        let half_shift = BigRational::new(BigInt::from(n as i64 - 3), BigInt::from(2));
        let mut integral = BigRational::zero();
        for i in 0..=4i128 {
            for j in 0..=m {
                // (1-u)^4 (3-u)^m = Σ C(4,i)(-u)^i Σ C(m,j) 3^{m-j} (-u)^j
                let c = binom(4, i) * binom(m, j) * 3i128.pow((m - j) as u32) * if (i + j) % 2 == 0 { 1 } else { -1 };
                let exponent = &half_shift + BigRational::from_integer(BigInt::from(i + j));
                let term = BigRational::from_integer(BigInt::from(c)) / (exponent + BigRational::one());
                integral += term;
            }
        }
        integral /= BigRational::from_integer(BigInt::from(2));
        let nn = BigInt::from(n);
        BigRational::one()
            - BigRational::new(BigInt::one(), &nn + 1)
            - BigRational::new(BigInt::from(105) * &nn * (&nn - 1), BigInt::one() << (n + 5)) * integral
    }

    #[test]
    fn ellipsoid_matches_substitution_oracle() {
        for n in 3..=20 {
            assert_eq!(ev_ellipsoid(n).unwrap().0, ellipsoid_oracle(n), "N={n}");
        }
    }

    #[test]
    fn ellipse_values() {
        let cfg = QuadConfig::default();
        let pi2 = PI * PI;
        let want = [
            (2, 16.0 / (9.0 * pi2)),
            (3, 35.0 / (12.0 * pi2)),
            (4, (-5632.0 + 1575.0 * pi2) / (270.0 * pi2 * pi2)),
            (5, 7.0 * (-3289.0 + 600.0 * pi2) / (432.0 * pi2 * pi2)),
            (
                6,
                (141623296.0 - 36261225.0 * pi2 + 3307500.0 * pi2 * pi2) / (226800.0 * pi2 * pi2 * pi2),
            ),
        ];
        for (n, w) in want {
            let v = ev_ellipse(n, &cfg).unwrap();
            assert!((v - w).abs() < 1e-10, "N={n}: {v} vs {w}");
        }
        assert!(ev_ellipse(1, &cfg).is_err());
    }

    #[test]
    fn ellipse_below_parallelogram() {
        let cfg = QuadConfig::default();
        for n in 2..=50 {
            assert!(ev_ellipse(n, &cfg).unwrap() < ev_parallelogram(n).unwrap().to_f64(), "N={n}");
        }
    }

    #[test]
    fn density_supports_and_errors() {
        assert_eq!(density_vp2(-0.1).unwrap(), 0.0);
        assert_eq!(density_vp2(1.5).unwrap(), 0.0);
        assert_eq!(density_ve2(0.7).unwrap(), 0.0);
        assert!(density_vp2(f64::NAN).is_err());
        assert!(density_ve2(f64::INFINITY).is_err());
        assert!((density_vp2(0.0).unwrap() - 4.0).abs() < 1e-12);
        assert!((density_ve2(0.0).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn ve2_antiderivative_matches_quadrature() {
        let cfg = QuadConfig::with_tol(1e-13);
        for i in 1..20 {
            let t = i as f64 / 20.0 * 2.0 / PI;
            let a = 0.5 * PI * t;
            let inner = integrate_1d(|s: f64| (1.0 - s * s).sqrt() / (s * s), a, 1.0, &cfg).unwrap();
            let want = 2.0 * PI * t * inner.value;
            assert!((density_ve2(t).unwrap() - want).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn vp2_matches_midpoint_oracle() {
        // Plain midpoint sums on a fine grid, with cells aligned to the two
        // logarithmic singularities.
        let cells = 400_000;
        for i in 1..=100 {
            let t = i as f64 / 101.0;
            let mut knots = vec![2.0 * t - 1.0, 1.0];
            knots.extend([0.0, 2.0 * t].into_iter().filter(|&c| c > 2.0 * t - 1.0 && c < 1.0));
            knots.sort_by(f64::total_cmp);
            let mut oracle = 0.0;
            for w in knots.windows(2) {
                let h = (w[1] - w[0]) / cells as f64;
                let sum: f64 = (0..cells)
                    .map(|j| {
                        let s = w[0] + (j as f64 + 0.5) * h;
                        s.abs().ln() * (2.0 * t - s).abs().ln()
                    })
                    .sum();
                oracle += sum * h;
            }
            let v = density_vp2(t).unwrap();
            assert!((v - oracle).abs() < 1e-5, "t={t}: {v} vs {oracle}");
        }
    }

    #[test]
    fn density_moments() {
        let cfg = QuadConfig::with_tol(1e-12);
        let vp = Density::Vp2;
        assert!((vp.moment(0, &cfg).unwrap() - 1.0).abs() < 1e-8);
        assert!((vp.moment(1, &cfg).unwrap() - 5.0 / 27.0).abs() < 1e-6);
        assert!((vp.moment(2, &cfg).unwrap() - 1.0 / 18.0).abs() < 1e-6);
        let ve = Density::Ve2;
        assert!((ve.moment(0, &cfg).unwrap() - 1.0).abs() < 1e-10);
        assert!((ve.moment(1, &cfg).unwrap() - 16.0 / (9.0 * PI * PI)).abs() < 1e-8);
        assert_eq!(vp.cdf(-1.0, &cfg).unwrap(), 0.0);
        assert!((ve.cdf(1.0, &cfg).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn isotropic_examples() {
        let l = isotropic_constant(1.0 / 18.0, 2, true).unwrap();
        assert!((l - 12f64.powf(-0.5)).abs() < 1e-15);
        let l3 = isotropic_constant(1.0 / 162.0, 3, true).unwrap();
        assert!((l3 - 12f64.powf(-0.5)).abs() < 1e-15);
        assert!(isotropic_constant(0.0, 2, true).is_err());
        assert!(isotropic_constant(-1.0, 2, false).is_err());
        // L⁴ = 2·(1/12)/3
        let l = isotropic_constant(1.0 / 12.0, 2, false).unwrap();
        assert!((l.powi(4) - 2.0 / 36.0).abs() < 1e-15);
    }

    #[test]
    fn moment_spec_validation() {
        assert!(MomentSpec::new(2, 1.0, true).validate(2).is_ok());
        assert!(MomentSpec::new(2, 1.0, false).validate(2).is_err());
        assert!(MomentSpec::new(3, 1.0, false).validate(2).is_ok());
        assert!(MomentSpec::new(2, 1.0, true).validate(3).is_err());
        assert!(MomentSpec::new(3, 0.5, true).validate(2).is_err());
        assert!(MomentSpec::new(3, f64::NAN, true).validate(2).is_err());
        let json = serde_json::to_string(&MomentSpec::new(3, 1.5, true)).unwrap();
        assert_eq!(json, r#"{"N":3,"p":1.5,"symmetric":true}"#);
    }

    proptest! {
        #[test]
        fn isotropic_is_monotone(a in 1e-6f64..1.0, b in 1e-6f64..1.0, n in 1usize..5, sym: bool) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(lo < hi);
            prop_assert!(isotropic_constant(lo, n, sym).unwrap() < isotropic_constant(hi, n, sym).unwrap());
        }

        #[test]
        fn densities_are_nonnegative(t in -0.5f64..1.5) {
            prop_assert!(density_vp2(t).unwrap() >= 0.0);
            prop_assert!(density_ve2(t).unwrap() >= 0.0);
        }
    }
}
