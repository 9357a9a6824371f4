//! Zero-noise extrapolation of `(lambda, y)` series.
//!
//! * Linear: closed-form ordinary least squares,
//!   `E(0) = y_mean - (S_ly / S_ll) * lambda_mean`.
//! * Polynomial of degree `d`: unweighted least squares on the Vandermonde
//!   system, solved by SVD.
//! * Richardson: the interpolating polynomial through every point,
//!   evaluated at zero, `E(0) = sum_j y_j prod_{k != j} l_k / (l_k - l_j)`.
//!
//! Fits are unweighted; per-point standard errors ride along for reporting.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Result, ZneError};

/// Condition-number ceiling for polynomial fits.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub lambda: f64,
    pub y: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtrapolationInput {
    points: Vec<Point>,
}

impl ExtrapolationInput {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(ZneError::DegenerateFit(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        for p in &points {
            if !(p.lambda.is_finite() && p.lambda >= 1.0) {
                return Err(ZneError::InvalidArgument(format!(
                    "scale factor must be finite and >= 1, got {}",
                    p.lambda
                )));
            }
            if !p.y.is_finite() || p.std_err.is_nan() || p.std_err < 0.0 {
                return Err(ZneError::InvalidArgument(format!(
                    "invalid measurement ({}, {})",
                    p.y, p.std_err
                )));
            }
        }
        if points.iter().all(|p| p.lambda == points[0].lambda) {
            return Err(ZneError::DegenerateFit("all scale factors are equal".into()));
        }
        Ok(Self { points })
    }

    /// Points without standard errors.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(lambda, y)| Point {
                    lambda,
                    y,
                    std_err: 0.0,
                })
                .collect(),
        )
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn lambdas(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.lambda)
    }

    fn ys(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "degree")]
pub enum FitMethod {
    Linear,
    Polynomial(usize),
    Richardson,
}

impl fmt::Display for FitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitMethod::Linear => f.write_str("linear"),
            FitMethod::Polynomial(d) => write!(f, "poly{d}"),
            FitMethod::Richardson => f.write_str("richardson"),
        }
    }
}

impl std::str::FromStr for FitMethod {
    type Err = ZneError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "linear" => Ok(FitMethod::Linear),
            "richardson" => Ok(FitMethod::Richardson),
            _ => s
                .strip_prefix("poly")
                .and_then(|d| d.parse().ok())
                .filter(|&d| d >= 1)
                .map(FitMethod::Polynomial)
                .ok_or_else(|| {
                    ZneError::InvalidArgument(format!(
                        "unknown extrapolation `{s}` (expected linear, richardson or polyN)"
                    ))
                }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub residual_sum_squares: f64,
    pub lambda_mean: f64,
    pub y_mean: f64,
    pub s_lambda_y: f64,
    pub s_lambda_lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtrapolationFit {
    pub method: FitMethod,
    /// Estimate at zero noise, `c_0`.
    pub intercept: f64,
    /// `c_0 ... c_d`, lowest order first.
    pub coefficients: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl ExtrapolationFit {
    pub fn evaluate(&self, lambda: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * lambda + c)
    }
}

fn diagnostics(input: &ExtrapolationInput, coefficients: &[f64]) -> Diagnostics {
    let m = input.len() as f64;
    let lambda_mean = input.lambdas().sum::<f64>() / m;
    let y_mean = input.ys().sum::<f64>() / m;
    let s_lambda_y = input
        .points()
        .iter()
        .map(|p| (p.lambda - lambda_mean) * (p.y - y_mean))
        .sum();
    let s_lambda_lambda = input.lambdas().map(|l| (l - lambda_mean).powi(2)).sum();
    let residual_sum_squares = input
        .points()
        .iter()
        .map(|p| {
            let fit = coefficients.iter().rev().fold(0.0, |acc, c| acc * p.lambda + c);
            (p.y - fit).powi(2)
        })
        .sum();
    Diagnostics {
        residual_sum_squares,
        lambda_mean,
        y_mean,
        s_lambda_y,
        s_lambda_lambda,
    }
}

pub fn linear_fit(input: &ExtrapolationInput) -> Result<ExtrapolationFit> {
    let d = diagnostics(input, &[]);
    if d.s_lambda_lambda <= 0.0 {
        return Err(ZneError::DegenerateFit("zero spread in scale factors".into()));
    }
    let slope = d.s_lambda_y / d.s_lambda_lambda;
    let intercept = d.y_mean - slope * d.lambda_mean;
    let coefficients = vec![intercept, slope];
    Ok(ExtrapolationFit {
        method: FitMethod::Linear,
        intercept,
        diagnostics: diagnostics(input, &coefficients),
        coefficients,
    })
}

pub fn polynomial_fit(input: &ExtrapolationInput, degree: usize) -> Result<ExtrapolationFit> {
    if degree == 0 {
        return Err(ZneError::InvalidArgument("degree must be at least 1".into()));
    }
    let m = input.len();
    if m <= degree {
        return Err(ZneError::DegenerateFit(format!(
            "degree {degree} needs at least {} points, got {m}",
            degree + 1
        )));
    }
    let vander = DMatrix::from_fn(m, degree + 1, |r, c| input.points[r].lambda.powi(c as i32));
    let rhs = DVector::from_iterator(m, input.ys());
    let svd = vander.svd(true, true);
    let max_sv = svd.singular_values.max();
    let min_sv = svd.singular_values.min();
    let condition = if min_sv > 0.0 { max_sv / min_sv } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(ZneError::IllConditioned(condition));
    }
    let solution = svd
        .solve(&rhs, 0.0)
        .map_err(|e| ZneError::DegenerateFit(e.to_string()))?;
    let coefficients: Vec<f64> = solution.iter().copied().collect();
    Ok(ExtrapolationFit {
        method: FitMethod::Polynomial(degree),
        intercept: coefficients[0],
        diagnostics: diagnostics(input, &coefficients),
        coefficients,
    })
}

pub fn richardson(input: &ExtrapolationInput) -> Result<ExtrapolationFit> {
    let lambdas: Vec<f64> = input.lambdas().collect();
    for (j, a) in lambdas.iter().enumerate() {
        if lambdas[j + 1..].contains(a) {
            return Err(ZneError::DegenerateFit(format!(
                "duplicate scale factor {a}"
            )));
        }
    }
    let m = lambdas.len();
    let mut intercept = 0.0;
    let mut coefficients = vec![0.0; m];
    for (j, p) in input.points().iter().enumerate() {
        let mut weight = 1.0;
        // Lagrange basis polynomial l_j, built up in monomial form.
        let mut basis = vec![1.0];
        for (k, &lk) in lambdas.iter().enumerate() {
            if k == j {
                continue;
            }
            weight *= lk / (lk - p.lambda);
            let denom = p.lambda - lk;
            let mut next = vec![0.0; basis.len() + 1];
            for (i, b) in basis.iter().enumerate() {
                next[i + 1] += b / denom;
                next[i] -= b * lk / denom;
            }
            basis = next;
        }
        intercept += p.y * weight;
        for (c, b) in coefficients.iter_mut().zip(&basis) {
            *c += p.y * b;
        }
    }
    Ok(ExtrapolationFit {
        method: FitMethod::Richardson,
        intercept,
        diagnostics: diagnostics(input, &coefficients),
        coefficients,
    })
}

pub fn extrapolate(input: &ExtrapolationInput, method: FitMethod) -> Result<ExtrapolationFit> {
    match method {
        FitMethod::Linear => linear_fit(input),
        FitMethod::Polynomial(d) => polynomial_fit(input, d),
        FitMethod::Richardson => richardson(input),
    }
}
