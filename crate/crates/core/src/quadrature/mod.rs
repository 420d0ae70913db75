//! One-dimensional numerical integration and the planar/spatial reduction
//! formulas for the expected symmetric hull volume.

mod reduction;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

pub use reduction::{ev_symmetric_2d, ev_symmetric_ball_3d, polygon_symmetry, PolygonSymmetry};

/// Tolerances and budget for adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) || self.max_subdivisions < 1 {
            return Err(Error::Domain(format!("invalid quadrature config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

// 15-point Kronrod extension of the 7-point Gauss rule; nodes in [0, 1),
// Gauss nodes sit at the even positions. Digits are kept as tabulated.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
];

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[0] * fc;
    let mut gauss = WG[0] * fc;
    for k in 1..8 {
        let dx = half * XGK[k];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[k] * pair;
        if k % 2 == 0 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature. The interval with the
/// largest error estimate is bisected until the summed estimate drops below
/// `max(abs_tol, rel_tol·|value|)`. Integrable endpoint singularities are
/// fine because no node sits on an endpoint.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    cfg.validate()?;
    if !(a <= b) {
        return Err(Error::Domain(format!("integration bounds out of order: [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0 });
    }
    let (value, error) = gauss_kronrod_15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut splits = 0;
    loop {
        let target = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        if splits >= cfg.max_subdivisions {
            return Err(Error::NonConvergence {
                value: total,
                error: total_err,
                requested: target,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval can no longer be split in floating point.
            return Err(Error::NonConvergence {
                value: total,
                error: total_err,
                requested: target,
            });
        }
        let (v1, e1) = gauss_kronrod_15(&f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        splits += 1;
    }
    // Re-sum to shed the drift of the running updates.
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    Ok(QuadResult { value, error })
}

/// Integrates over consecutive pieces `[pts[i], pts[i+1]]` and sums in order.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, pts: &[f64], cfg: &QuadConfig) -> Result<QuadResult> {
    let pieces = pts.len().saturating_sub(1).max(1) as f64;
    let piece_cfg = QuadConfig {
        abs_tol: cfg.abs_tol / pieces,
        ..*cfg
    };
    let mut out = QuadResult { value: 0.0, error: 0.0 };
    for w in pts.windows(2) {
        let r = integrate_1d(&f, w[0], w[1], &piece_cfg)?;
        out.value += r.value;
        out.error += r.error;
    }
    Ok(out)
}

/// Double-exponential (tanh-sinh) quadrature for integrands with endpoint
/// singularities. The integrand receives `(x, x - a, b - x)` with both
/// distances computed without cancellation, so singular factors can be
/// evaluated at their true offset from the endpoint.
pub fn integrate_tanh_sinh<F: Fn(f64, f64, f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<QuadResult> {
    use std::f64::consts::FRAC_PI_2;
    if !(a <= b) {
        return Err(Error::Domain(format!("integration bounds out of order: [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0 });
    }
    let half = 0.5 * (b - a);
    // Contribution of the node pair at abscissa parameter t (t > 0) or the centre (t = 0).
    let term = |t: f64| -> f64 {
        let s = FRAC_PI_2 * t.sinh();
        let cosh_s = s.cosh();
        // 1 - tanh(s) = 2 / (e^{2s} + 1), kept accurate for large s.
        let comp = 2.0 / ((2.0 * s).exp() + 1.0);
        let weight = FRAC_PI_2 * t.cosh() / (cosh_s * cosh_s);
        let d = half * comp; // distance from the nearer endpoint
        if t == 0.0 {
            return weight * f(a + half, half, half);
        }
        if d == 0.0 || weight == 0.0 {
            return 0.0;
        }
        let right = f(b - d, 2.0 * half - d, d);
        let left = f(a + d, d, 2.0 * half - d);
        weight * (left + right)
    };
    let t_max = 6.0;
    let mut h = 0.5;
    let mut sum = term(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        sum += term(k as f64 * h);
        k += 1;
    }
    let mut estimate = half * h * sum;
    for level in 0..12 {
        h *= 0.5;
        let mut k = 1;
        let mut added = 0.0;
        while k as f64 * h <= t_max {
            added += term(k as f64 * h);
            k += 2;
        }
        sum += added;
        let next = half * h * sum;
        let err = (next - estimate).abs();
        estimate = next;
        if err <= tol.max(tol * estimate.abs()) && level >= 2 {
            return Ok(QuadResult { value: estimate, error: err });
        }
    }
    Err(Error::NonConvergence {
        value: estimate,
        error: f64::NAN,
        requested: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn smooth_integrals() {
        let cfg = QuadConfig::with_tol(1e-13);
        let r = integrate_1d(|x| x * x, 0.0, 1.0, &cfg).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-12);
        let r = integrate_1d(f64::sin, 0.0, PI, &cfg).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn logarithmic_endpoint() {
        let cfg = QuadConfig::with_tol(1e-10);
        let r = integrate_1d(f64::ln, 0.0, 1.0, &cfg).unwrap();
        assert!((r.value + 1.0).abs() < 1e-8, "{r:?}");
        assert!(r.error <= 1e-10);
        let r = integrate_tanh_sinh(|_, da, _| da.ln(), 0.0, 1.0, 1e-14).unwrap();
        assert!((r.value + 1.0).abs() < 1e-13, "{r:?}");
    }

    #[test]
    fn tanh_sinh_handles_singularity_at_upper_end() {
        // ∫_0^1 ln(1 - x) ln(x) dx = 2 - π²/6
        let r = integrate_tanh_sinh(|_, da, db| da.ln() * db.ln(), 0.0, 1.0, 1e-14).unwrap();
        assert!((r.value - (2.0 - PI * PI / 6.0)).abs() < 1e-13, "{r:?}");
        // ∫_0^1 x^{-1/2} dx = 2
        let r = integrate_tanh_sinh(|_, da, _| da.powf(-0.5), 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn errors() {
        let cfg = QuadConfig::default();
        assert!(matches!(integrate_1d(|x| x, 1.0, 0.0, &cfg), Err(Error::Domain(_))));
        let tiny = QuadConfig {
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            max_subdivisions: 3,
        };
        match integrate_1d(|x: f64| x.sqrt().recip(), 0.0, 1.0, &tiny) {
            Err(Error::NonConvergence { value, .. }) => assert!(value.is_finite()),
            other => panic!("expected non-convergence, got {other:?}"),
        }
        let bad = QuadConfig { abs_tol: 0.0, ..cfg };
        assert!(integrate_1d(|x| x, 0.0, 1.0, &bad).is_err());
    }

    #[test]
    fn kronrod_rule_is_exact_to_degree_22() {
        for d in 0..=22 {
            let (v, _) = gauss_kronrod_15(&|x: f64| x.powi(d), -1.0, 1.0);
            let want = if d % 2 == 0 { 2.0 / (d as f64 + 1.0) } else { 0.0 };
            assert!((v - want).abs() < 1e-14, "degree {d}");
        }
    }
}
