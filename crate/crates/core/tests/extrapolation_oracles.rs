mod common;

use common::rng;
use rand::Rng;
use zne_core::extrapolation::{linear_fit, polynomial_fit, richardson, extrapolate, Point};
use zne_core::{ExtrapolationInput, FitMethod, ZneError};

/// Least squares through the normal equations `(A^T A) c = A^T y`, solved by
/// Gaussian elimination with partial pivoting.
fn normal_equations(points: &[(f64, f64)], degree: usize) -> Vec<f64> {
    let k = degree + 1;
    let mut a = vec![vec![0.0; k + 1]; k];
    for &(x, y) in points {
        for r in 0..k {
            for c in 0..k {
                a[r][c] += x.powi((r + c) as i32);
            }
            a[r][k] += y * x.powi(r as i32);
        }
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        for r in 0..k {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=k {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    (0..k).map(|r| a[r][k] / a[r][r]).collect()
}

fn random_points(r: &mut rand_chacha::ChaCha8Rng, m: usize) -> Vec<(f64, f64)> {
    let mut lambdas: Vec<f64> = Vec::with_capacity(m);
    while lambdas.len() < m {
        let l = 1.0 + r.gen_range(0.0..4.0_f64);
        if lambdas.iter().all(|&x| (x - l).abs() > 0.25) {
            lambdas.push(l);
        }
    }
    lambdas.sort_by(f64::total_cmp);
    lambdas.into_iter().map(|l| (l, r.gen_range(0.0..1.0))).collect()
}

#[test]
fn linear_matches_normal_equations() {
    let mut r = rng(1);
    for _ in 0..1000 {
        let m = r.gen_range(2..9);
        let pts = random_points(&mut r, m);
        let fit = linear_fit(&ExtrapolationInput::from_pairs(&pts).unwrap()).unwrap();
        let oracle = normal_equations(&pts, 1);
        assert!((fit.intercept - oracle[0]).abs() < 1e-10);
        assert!((fit.coefficients[1] - oracle[1]).abs() < 1e-10);
    }
}

#[test]
fn quadratic_matches_normal_equations() {
    let mut r = rng(2);
    for _ in 0..200 {
        let m = r.gen_range(3..9);
        let pts = random_points(&mut r, m);
        let fit = polynomial_fit(&ExtrapolationInput::from_pairs(&pts).unwrap(), 2).unwrap();
        for (a, b) in fit.coefficients.iter().zip(normal_equations(&pts, 2)) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }
}

#[test]
fn residuals_are_orthogonal() {
    let mut r = rng(3);
    for _ in 0..200 {
        let pts = random_points(&mut r, 6);
        let fit = linear_fit(&ExtrapolationInput::from_pairs(&pts).unwrap()).unwrap();
        let res: Vec<f64> = pts.iter().map(|&(x, y)| y - fit.evaluate(x)).collect();
        assert!(res.iter().sum::<f64>().abs() < 1e-10);
        assert!(pts.iter().zip(&res).map(|((x, _), e)| x * e).sum::<f64>().abs() < 1e-10);
        let d = fit.diagnostics;
        assert!((fit.intercept - (d.y_mean - d.s_lambda_y / d.s_lambda_lambda * d.lambda_mean)).abs() < 1e-12);
    }
}

#[test]
fn richardson_interpolates() {
    let mut r = rng(4);
    for m in 2..7 {
        for _ in 0..50 {
            let coef: Vec<f64> = (0..m).map(|_| r.gen_range(-1.0..1.0)).collect();
            let poly = |x: f64| coef.iter().rev().fold(0.0, |acc, c| acc * x + c);
            let pts: Vec<(f64, f64)> = random_points(&mut r, m).into_iter().map(|(x, _)| (x, poly(x))).collect();
            let input = ExtrapolationInput::from_pairs(&pts).unwrap();
            let fit = richardson(&input).unwrap();
            assert!((fit.intercept - coef[0]).abs() < 1e-8);
            for &(x, y) in &pts {
                assert!((fit.evaluate(x) - y).abs() < 1e-8 * y.abs().max(1.0), "m={m} {} vs {y}", fit.evaluate(x));
            }
        }
    }
}

#[test]
fn richardson_equals_full_degree_least_squares() {
    let mut r = rng(5);
    for _ in 0..100 {
        let input = ExtrapolationInput::from_pairs(&random_points(&mut r, 4)).unwrap();
        let a = richardson(&input).unwrap().intercept;
        let b = polynomial_fit(&input, 3).unwrap().intercept;
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn affine_equivariance() {
    let mut r = rng(6);
    let methods = [FitMethod::Linear, FitMethod::Polynomial(2), FitMethod::Richardson];
    for _ in 0..100 {
        let pts = random_points(&mut r, 5);
        let (a, b) = (r.gen_range(-3.0..3.0), r.gen_range(-2.0..2.0));
        let moved: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, a * y + b)).collect();
        for m in methods {
            let base = extrapolate(&ExtrapolationInput::from_pairs(&pts).unwrap(), m).unwrap();
            let shifted = extrapolate(&ExtrapolationInput::from_pairs(&moved).unwrap(), m).unwrap();
            assert!((shifted.intercept - (a * base.intercept + b)).abs() < 1e-8, "{m}");
        }
    }
}

#[test]
fn input_validation() {
    let p = |lambda, y| Point { lambda, y, std_err: 0.01 };
    assert!(ExtrapolationInput::new(vec![p(1.0, 0.5), p(2.0, 0.4)]).is_ok());
    assert!(matches!(ExtrapolationInput::new(vec![p(1.0, 0.5)]), Err(ZneError::DegenerateFit(_))));
    assert!(ExtrapolationInput::new(vec![p(1.0, f64::NAN), p(2.0, 0.4)]).is_err());
    assert!(ExtrapolationInput::new(vec![p(1.0, 0.5), p(f64::INFINITY, 0.4)]).is_err());
    let under = ExtrapolationInput::new(vec![p(1.0, 0.5), p(2.0, 0.4)]).unwrap();
    assert!(matches!(polynomial_fit(&under, 2), Err(ZneError::DegenerateFit(_))));
}
