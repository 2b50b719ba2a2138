//! Cubic calibration `y = a·x + b·x² + c·x³ + d` between displacement (mm)
//! and the measured transmission ratio, with an analytic monotonicity
//! certificate and a bracketed inverse.

#[allow(unused_imports)] // std, when linked, shadows these with inherent methods
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;


use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationPoint {
    /// mm
    pub displacement: f64,
    pub transmission: f64,
    pub weight: f64,
}

impl CalibrationPoint {
    pub fn new(displacement: f64, transmission: f64) -> Self {
        Self {
            displacement,
            transmission,
            weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Direction {
    Increasing,
    Decreasing,
    NonMonotone,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonotoneCertificate {
    pub direction: Direction,
    /// Smallest `|dy/dx|` over the valid range (per mm).
    pub min_abs_slope: f64,
    /// Where that minimum occurs (mm).
    pub at: f64,
}

impl MonotoneCertificate {
    pub fn is_monotone(&self) -> bool {
        self.direction != Direction::NonMonotone
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationCurve {
    pub a: f64,
    pub b: f64,
    pub c3: f64,
    pub d: f64,
    /// `[x_lo, x_hi]` in mm.
    pub valid_range: (f64, f64),
    pub certificate: MonotoneCertificate,
}

impl CalibrationCurve {
    /// Builds a curve and certifies it on `valid_range`.
    pub fn new(a: f64, b: f64, c3: f64, d: f64, valid_range: (f64, f64)) -> Result<Self> {
        let (lo, hi) = valid_range;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid("valid_range", "need finite x_lo < x_hi"));
        }
        if [a, b, c3, d].iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("coefficients", "must be finite"));
        }
        let mut curve = Self {
            a,
            b,
            c3,
            d,
            valid_range,
            certificate: MonotoneCertificate {
                direction: Direction::NonMonotone,
                min_abs_slope: 0.0,
                at: lo,
            },
        };
        curve.certificate = certify_monotone(&curve);
        Ok(curve)
    }

    /// Horner evaluation without range checks.
    pub fn polynomial(&self, x: f64) -> f64 {
        self.d + x * (self.a + x * (self.b + x * self.c3))
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.a + x * (2.0 * self.b + 3.0 * self.c3 * x)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.valid_range.0 && x <= self.valid_range.1
    }

    /// Transmission interval covered by the valid range, ordered low to high.
    pub fn transmission_range(&self) -> (f64, f64) {
        let y0 = self.polynomial(self.valid_range.0);
        let y1 = self.polynomial(self.valid_range.1);
        (y0.min(y1), y0.max(y1))
    }
}

/// Weighted least-squares cubic through `points` (displacements in mm).
///
/// Solved by Householder QR on the column-equilibrated Vandermonde system.
pub fn fit_cubic(points: &[CalibrationPoint]) -> Result<CalibrationCurve> {
    let active: Vec<&CalibrationPoint> = points.iter().filter(|p| p.weight > 0.0).collect();
    if points.iter().any(|p| !(p.weight >= 0.0) || !p.displacement.is_finite() || !p.transmission.is_finite()) {
        return Err(Error::Fit("weights must be non-negative and values finite".into()));
    }
    let mut xs: Vec<f64> = active.iter().map(|p| p.displacement).collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();
    if xs.len() < 4 {
        return Err(Error::Fit(format!(
            "{} distinct displacements with positive weight; a cubic needs 4",
            xs.len()
        )));
    }
    let x_lo = xs[0];
    let x_hi = xs[xs.len() - 1];

    let m = active.len();
    // columns: x, x², x³, 1
    let mut a: Vec<[f64; 4]> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    for p in &active {
        let s = p.weight.sqrt();
        let x = p.displacement;
        a.push([s * x, s * x * x, s * x * x * x, s]);
        rhs.push(s * p.transmission);
    }
    let mut norms = [0.0f64; 4];
    for (j, n) in norms.iter_mut().enumerate() {
        *n = a.iter().map(|r| r[j] * r[j]).sum::<f64>().sqrt();
        if *n == 0.0 {
            return Err(Error::Fit("degenerate design column".into()));
        }
    }
    for row in a.iter_mut() {
        for j in 0..4 {
            row[j] /= norms[j];
        }
    }

    // Householder QR, applied to rhs on the fly
    for k in 0..4 {
        let alpha = a[k..].iter().map(|r| r[k] * r[k]).sum::<f64>().sqrt();
        if alpha < 1e-14 {
            return Err(Error::Fit("rank-deficient design matrix".into()));
        }
        let sign = if a[k][k] >= 0.0 { 1.0 } else { -1.0 };
        let mut v: Vec<f64> = a[k..].iter().map(|r| r[k]).collect();
        v[0] += sign * alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        for j in k..4 {
            let dot: f64 = v.iter().zip(&a[k..]).map(|(vi, r)| vi * r[j]).sum();
            let f = 2.0 * dot / vnorm2;
            for (vi, r) in v.iter().zip(a[k..].iter_mut()) {
                r[j] -= f * vi;
            }
        }
        let dot: f64 = v.iter().zip(&rhs[k..]).map(|(vi, r)| vi * r).sum();
        let f = 2.0 * dot / vnorm2;
        for (vi, r) in v.iter().zip(rhs[k..].iter_mut()) {
            *r -= f * vi;
        }
    }
    let mut coef = [0.0f64; 4];
    for k in (0..4).rev() {
        let s: f64 = (k + 1..4).map(|j| a[k][j] * coef[j]).sum();
        coef[k] = (rhs[k] - s) / a[k][k];
    }
    for j in 0..4 {
        coef[j] /= norms[j];
    }
    CalibrationCurve::new(coef[0], coef[1], coef[2], coef[3], (x_lo, x_hi))
}

/// Residuals `y − fit(x)` of each point.
pub fn residuals(curve: &CalibrationCurve, points: &[CalibrationPoint]) -> Vec<f64> {
    points
        .iter()
        .map(|p| p.transmission - curve.polynomial(p.displacement))
        .collect()
}

/// Range-checked evaluation; extrapolation is an error.
pub fn evaluate(curve: &CalibrationCurve, x: f64) -> Result<f64> {
    if !curve.contains(x) {
        return Err(Error::OutOfRange {
            quantity: "displacement (mm)",
            value: x,
            lo: curve.valid_range.0,
            hi: curve.valid_range.1,
        });
    }
    Ok(curve.polynomial(x))
}

/// Certifies the sign of `dy/dx = a + 2bx + 3c₃x²` on the valid range from
/// the roots of the derivative.
pub fn certify_monotone(curve: &CalibrationCurve) -> MonotoneCertificate {
    let (lo, hi) = curve.valid_range;
    // candidates for the extremum of |dy/dx|: endpoints and the vertex
    let mut candidates = alloc::vec![lo, hi];
    if curve.c3 != 0.0 {
        let vertex = -curve.b / (3.0 * curve.c3);
        if vertex > lo && vertex < hi {
            candidates.push(vertex);
        }
    }
    // a sign change inside the range shows up as a root of the derivative
    let qa = 3.0 * curve.c3;
    let qb = 2.0 * curve.b;
    let qc = curve.a;
    let mut interior_root = false;
    if qa != 0.0 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let q = -0.5 * (qb + qb.signum() * sq);
            let r1 = if q != 0.0 { q / qa } else { -qb / (2.0 * qa) };
            let r2 = if q != 0.0 { qc / q } else { r1 };
            interior_root = [r1, r2].iter().any(|&r| r >= lo && r <= hi);
        }
    } else if qb != 0.0 {
        let r = -qc / qb;
        interior_root = r >= lo && r <= hi;
    } else {
        interior_root = qc == 0.0;
    }

    let (at, min_abs_slope) = candidates
        .iter()
        .map(|&x| (x, curve.slope(x).abs()))
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap_or((lo, 0.0));
    let s_lo = curve.slope(lo);
    let s_hi = curve.slope(hi);
    let direction = if interior_root || min_abs_slope == 0.0 || s_lo.signum() != s_hi.signum() {
        Direction::NonMonotone
    } else if s_lo > 0.0 {
        Direction::Increasing
    } else {
        Direction::Decreasing
    };
    MonotoneCertificate {
        direction,
        min_abs_slope: if direction == Direction::NonMonotone { 0.0 } else { min_abs_slope },
        at,
    }
}

/// Displacement (mm) whose calibrated transmission is `y`.
///
/// Newton steps safeguarded by bisection inside the valid range, run to
/// machine precision (the bracket tolerance is 10⁻⁹ mm at worst).
pub fn invert(curve: &CalibrationCurve, y: f64) -> Result<f64> {
    if !curve.certificate.is_monotone() {
        return Err(Error::NotMonotone);
    }
    let (lo, hi) = curve.valid_range;
    let (y_min, y_max) = curve.transmission_range();
    if !(y >= y_min && y <= y_max) {
        let increasing = curve.certificate.direction == Direction::Increasing;
        let nearest = if (y < y_min) == increasing { lo } else { hi };
        return Err(Error::CalibrationRange {
            value: y,
            nearest_endpoint_mm: nearest,
        });
    }
    let sign = if curve.certificate.direction == Direction::Increasing {
        1.0
    } else {
        -1.0
    };
    let g = |x: f64| sign * (curve.polynomial(x) - y);
    let (mut a, mut b) = (lo, hi);
    if g(a) == 0.0 {
        return Ok(a);
    }
    if g(b) == 0.0 {
        return Ok(b);
    }
    // linear interpolation start
    let y_lo = curve.polynomial(lo);
    let y_hi = curve.polynomial(hi);
    let mut x = lo + (y - y_lo) * (hi - lo) / (y_hi - y_lo);
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            return Ok(x);
        }
        if gx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let slope = sign * curve.slope(x);
        let mut next = x - gx / slope;
        if !(next > a && next < b) || !next.is_finite() {
            next = 0.5 * (a + b);
        }
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x.abs().max(1.0) || b - a <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_15mm() -> CalibrationCurve {
        CalibrationCurve::new(0.05291, 0.00690, -2.3166e-4, 0.70997, (0.0, 15.0)).unwrap()
    }

    fn table_45mm() -> CalibrationCurve {
        CalibrationCurve::new(0.01594, 0.00211, -2.6388e-5, 0.30690, (0.0, 45.0)).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let c15 = table_15mm();
        assert_eq!(evaluate(&c15, 0.0).unwrap(), 0.70997);
        // 0.05291·15 + 0.0069·225 − 2.3166e-4·3375 + 0.70997
        let y15 = 0.05291 * 15.0 + 0.0069 * 225.0 - 2.3166e-4 * 3375.0 + 0.70997;
        assert!((evaluate(&c15, 15.0).unwrap() - y15).abs() < 1e-14);
        assert!((y15 - 2.27427).abs() < 1e-5);
        assert_eq!(evaluate(&table_45mm(), 0.0).unwrap(), 0.30690);
        assert!(evaluate(&c15, 15.0001).is_err());
        assert!(evaluate(&c15, -1e-9).is_err());
    }

    #[test]
    fn certificates() {
        let c = certify_monotone(&table_15mm());
        assert_eq!(c.direction, Direction::Increasing);
        assert!((c.min_abs_slope - 0.05291).abs() < 1e-15);
        assert_eq!(c.at, 0.0);
        let c45 = certify_monotone(&table_45mm());
        assert_eq!(c45.direction, Direction::Increasing);
        assert!((table_45mm().slope(45.0) - 0.04553).abs() < 1e-4);
        let dec = CalibrationCurve::new(-1.0, 0.0, 0.0, 0.0, (0.0, 1.0)).unwrap();
        assert_eq!(dec.certificate.direction, Direction::Decreasing);
        let flat = CalibrationCurve::new(0.0, 0.0, 0.0, 1.0, (0.0, 1.0)).unwrap();
        assert_eq!(flat.certificate.direction, Direction::NonMonotone);
        // parabola with its vertex inside the range
        let bowl = CalibrationCurve::new(-1.0, 1.0, 0.0, 0.0, (0.0, 1.0)).unwrap();
        assert_eq!(bowl.certificate.direction, Direction::NonMonotone);
        // cubic with two interior stationary points but equal endpoint slope signs
        let wiggle = CalibrationCurve::new(1.0, -3.0, 1.0, 0.0, (0.0, 3.0)).unwrap();
        assert_eq!(wiggle.certificate.direction, Direction::NonMonotone);
    }

    #[test]
    fn inversion_examples() {
        let c = table_15mm();
        assert!(invert(&c, 0.70997).unwrap().abs() < 1e-9);
        let y15 = c.polynomial(15.0);
        assert!((invert(&c, y15).unwrap() - 15.0).abs() < 1e-9);
        match invert(&c, 0.5) {
            Err(Error::CalibrationRange { nearest_endpoint_mm, .. }) => assert_eq!(nearest_endpoint_mm, 0.0),
            other => panic!("{other:?}"),
        }
        match invert(&c, 3.0) {
            Err(Error::CalibrationRange { nearest_endpoint_mm, .. }) => assert_eq!(nearest_endpoint_mm, 15.0),
            other => panic!("{other:?}"),
        }
        let dec = CalibrationCurve::new(-1.0, 0.0, 0.0, 0.0, (0.0, 1.0)).unwrap();
        assert!((invert(&dec, -0.25).unwrap() - 0.25).abs() < 1e-15);
        let bowl = CalibrationCurve::new(-1.0, 1.0, 0.0, 0.0, (0.0, 1.0)).unwrap();
        assert_eq!(invert(&bowl, -0.1), Err(Error::NotMonotone));
    }

    #[test]
    fn inversion_residual_on_grid() {
        for c in [table_15mm(), table_45mm()] {
            let (y0, y1) = c.transmission_range();
            for i in 0..1000 {
                let y = y0 + (y1 - y0) * i as f64 / 999.0;
                let x = invert(&c, y).unwrap();
                assert!((c.polynomial(x) - y).abs() <= 1e-12, "y={y}");
            }
        }
    }

    #[test]
    fn fit_recovers_table_curve() {
        let truth = table_15mm();
        let pts: Vec<CalibrationPoint> = (0..16)
            .map(|i| {
                let x = 15.0 * i as f64 / 15.0;
                CalibrationPoint::new(x, truth.polynomial(x))
            })
            .collect();
        let fit = fit_cubic(&pts).unwrap();
        for (u, v) in [(fit.a, truth.a), (fit.b, truth.b), (fit.c3, truth.c3), (fit.d, truth.d)] {
            assert!((u - v).abs() <= 1e-9);
        }
        assert_eq!(fit.valid_range, (0.0, 15.0));
        assert_eq!(fit.certificate.direction, Direction::Increasing);
    }

    #[test]
    fn constant_data_and_rank_errors() {
        let pts: Vec<_> = (0..6).map(|i| CalibrationPoint::new(i as f64, 0.42)).collect();
        let f = fit_cubic(&pts).unwrap();
        assert!(f.a.abs() < 1e-12 && f.b.abs() < 1e-12 && f.c3.abs() < 1e-12);
        assert!((f.d - 0.42).abs() < 1e-12);
        let three: Vec<_> = (0..3).map(|i| CalibrationPoint::new(i as f64, i as f64)).collect();
        assert!(matches!(fit_cubic(&three), Err(Error::Fit(_))));
        let dup: Vec<_> = [0.0, 1.0, 1.0, 2.0, 2.0]
            .iter()
            .map(|&x| CalibrationPoint::new(x, x))
            .collect();
        assert!(fit_cubic(&dup).is_err());
    }

    #[test]
    fn zero_weight_points_are_ignored() {
        let truth = table_45mm();
        let mut pts: Vec<_> = (0..8)
            .map(|i| {
                let x = 45.0 * i as f64 / 7.0;
                CalibrationPoint::new(x, truth.polynomial(x))
            })
            .collect();
        pts.push(CalibrationPoint {
            displacement: 20.0,
            transmission: 99.0,
            weight: 0.0,
        });
        let fit = fit_cubic(&pts).unwrap();
        assert!((fit.c3 - truth.c3).abs() < 1e-12);
    }
}
