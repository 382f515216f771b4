//! Polynomial fitting of boundary polylines.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::Point;

pub const DEFAULT_RESIDUAL_THRESHOLD: f64 = 0.002;
pub const DEFAULT_ENDPOINT_WEIGHT: f64 = 1000.0;
const MAX_DEGREE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitParams {
    /// A straight line is kept when no point deviates from it by this much.
    pub residual_threshold: f64,
    pub endpoint_weight: f64,
}

impl Default for FitParams {
    fn default() -> Self {
        Self {
            residual_threshold: DEFAULT_RESIDUAL_THRESHOLD,
            endpoint_weight: DEFAULT_ENDPOINT_WEIGHT,
        }
    }
}

/// Per-coordinate polynomial in the normalized arc-length parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveFit {
    pub degree: usize,
    /// Power-basis coefficients, constant term first, for x, y and z.
    pub coefficients: [Vec<f64>; 3],
    pub params: Vec<f64>,
    /// Largest distance between an input point and its fitted position.
    pub max_residual: f64,
}

impl CurveFit {
    pub fn eval(&self, u: f64) -> Point {
        let c = |k: usize| self.coefficients[k].iter().rev().fold(0.0, |acc, a| acc * u + a);
        Point::new(c(0), c(1), c(2))
    }

    pub fn points(&self) -> Vec<Point> {
        self.params.iter().map(|&u| self.eval(u)).collect()
    }
}

/// Cumulative chord length scaled to `[0, 1]`; uniform when the polyline
/// has zero length.
pub fn arc_length_params(points: &[Point]) -> Vec<f64> {
    let mut s = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    s.push(0.0);
    for w in points.windows(2) {
        acc += (w[1] - w[0]).norm();
        s.push(acc);
    }
    let n = points.len();
    if acc > 0.0 {
        s.iter_mut().for_each(|x| *x /= acc);
    } else if n > 1 {
        s.iter_mut().enumerate().for_each(|(i, x)| *x = i as f64 / (n - 1) as f64);
    }
    s
}

/// Weighted least-squares polynomial of `degree` through `points` at `params`,
/// with the first and last point weighted by `endpoint_weight`.
pub fn fit_polynomial(
    points: &[Point],
    params: &[f64],
    degree: usize,
    endpoint_weight: f64,
) -> Result<CurveFit> {
    let n = points.len();
    if n < 2 || params.len() != n {
        return Err(Error::InvalidArgument(format!(
            "fit needs at least 2 points with one parameter each, got {n} and {}",
            params.len()
        )));
    }
    if degree == 0 || degree >= n {
        return Err(Error::InvalidArgument(format!("degree {degree} for {n} points")));
    }
    let weight = |i: usize| if i == 0 || i == n - 1 { endpoint_weight.sqrt() } else { 1.0 };
    let a = DMatrix::from_fn(n, degree + 1, |i, k| weight(i) * params[i].powi(k as i32));
    let svd = a.svd(true, true);
    let mut coefficients: [Vec<f64>; 3] = Default::default();
    for (axis, out) in coefficients.iter_mut().enumerate() {
        let b = DVector::from_fn(n, |i, _| weight(i) * points[i][axis]);
        let x = svd
            .solve(&b, 1e-14)
            .map_err(|e| Error::Degenerate(format!("polyline fit: {e}")))?;
        *out = x.iter().copied().collect();
    }
    let mut fit = CurveFit {
        degree,
        coefficients,
        params: params.to_vec(),
        max_residual: 0.0,
    };
    fit.max_residual = points
        .iter()
        .zip(params)
        .map(|(p, &u)| (fit.eval(u) - p).norm())
        .fold(0.0, f64::max);
    Ok(fit)
}

/// Line if it is within the residual threshold, otherwise a cubic (or the
/// highest degree the point count allows).
pub fn fit_curve(points: &[Point], params: &FitParams) -> Result<CurveFit> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "boundary polyline with {} points",
            points.len()
        )));
    }
    let u = arc_length_params(points);
    let line = fit_polynomial(points, &u, 1, params.endpoint_weight)?;
    let degree = MAX_DEGREE.min(points.len() - 1);
    if line.max_residual < params.residual_threshold || degree == 1 {
        return Ok(line);
    }
    fit_polynomial(points, &u, degree, params.endpoint_weight)
}

/// Fitted polyline with the same point count. Endpoints are returned
/// exactly so curves meeting at a junction stay joined.
pub fn fit_boundary(points: &[Point], params: &FitParams) -> Result<Vec<Point>> {
    let mut out = fit_curve(points, params)?.points();
    let n = out.len();
    out[0] = points[0];
    out[n - 1] = points[n - 1];
    Ok(out)
}
