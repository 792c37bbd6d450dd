use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares estimate of `A·p^m + B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub residual_rms: f64,
    /// Standard errors of `(A, B, p)` when the data supports them.
    pub std_err: Option<[f64; 3]>,
    pub iterations: usize,
}

const MAX_ITER: usize = 500;
const P_FLOOR: f64 = 1e-12;

fn model(theta: &Vector3<f64>, m: f64) -> f64 {
    theta[0] * theta[2].powf(m) + theta[1]
}

fn sum_squares(theta: &Vector3<f64>, ms: &[f64], ys: &[f64]) -> f64 {
    ms.iter().zip(ys).map(|(&m, &y)| (model(theta, m) - y).powi(2)).sum()
}

fn normal_equations(theta: &Vector3<f64>, ms: &[f64], ys: &[f64]) -> (Matrix3<f64>, Vector3<f64>) {
    let mut jtj = Matrix3::zeros();
    let mut jtr = Vector3::zeros();
    for (&m, &y) in ms.iter().zip(ys) {
        let pm = theta[2].powf(m);
        let dp = if m == 0.0 { 0.0 } else { theta[0] * m * theta[2].powf(m - 1.0) };
        let j = Vector3::new(pm, 1.0, dp);
        let r = model(theta, m) - y;
        jtj += j * j.transpose();
        jtr += j * r;
    }
    (jtj, jtr)
}

fn clamp_p(theta: &mut Vector3<f64>) {
    theta[2] = theta[2].clamp(P_FLOOR, 1.0);
}

/// Fit `A·p^m + B` by damped Gauss–Newton (Levenberg–Marquardt) from
/// `A = B = 0.5`, `p = 0.99` and from a profile-scan start, keeping the
/// better of the two with `p ∈ (0, 1]`.
///
/// Data that is flat to rounding is returned as `p = 1`, `B = 0.5` with
/// `A` absorbing the level; there is no decay to resolve.
pub fn fit_decay(lengths: &[f64], values: &[f64]) -> Result<DecayFit> {
    if lengths.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: lengths.len(), actual: values.len() });
    }
    if lengths.len() < 3 {
        return Err(Error::FitDiverged(format!("{} points cannot determine three parameters", lengths.len())));
    }
    if lengths.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("RB data contains non-finite values".into()));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let spread = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if spread < 1e-12 {
        return Ok(DecayFit { a: mean - 0.5, b: 0.5, p: 1.0, residual_rms: spread, std_err: None, iterations: 0 });
    }

    // Damped Gauss–Newton from the conventional start, then again from the
    // best point of a profile scan over p (A and B are linear at fixed p).
    // The conventional start alone can settle in the spurious p → 0 basin.
    let runs = [Vector3::new(0.5, 0.5, 0.99), profile_start(lengths, values)]
        .map(|start| levenberg(start, lengths, values));
    let (theta, cost, iterations, converged) = runs
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("two runs");
    let fit = finish(theta, cost, lengths, values, iterations)?;
    if !converged && fit.residual_rms > 1e-2 {
        return Err(Error::FitDiverged(format!("no convergence after {MAX_ITER} iterations (rms {:.3e})", fit.residual_rms)));
    }
    Ok(fit)
}

/// Linear least squares for `(A, B)` at fixed `p`, with the residual cost.
fn linear_ab(p: f64, ms: &[f64], ys: &[f64]) -> Option<(Vector3<f64>, f64)> {
    let (mut sxx, mut sx, mut sxy, mut sy) = (0.0, 0.0, 0.0, 0.0);
    let n = ms.len() as f64;
    for (&m, &y) in ms.iter().zip(ys) {
        let x = p.powf(m);
        sxx += x * x;
        sx += x;
        sxy += x * y;
        sy += y;
    }
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-14 * n * sxx.max(1e-300) {
        return None;
    }
    let a = (n * sxy - sx * sy) / det;
    let b = (sy - a * sx) / n;
    let theta = Vector3::new(a, b, p);
    Some((theta, sum_squares(&theta, ms, ys)))
}

fn profile_start(ms: &[f64], ys: &[f64]) -> Vector3<f64> {
    // 1 − p spaced logarithmically from 1e-5 to 0.9.
    (0..=200)
        .filter_map(|k| linear_ab(1.0 - 10f64.powf(-5.0 + 4.954 * k as f64 / 200.0), ms, ys))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map_or(Vector3::new(0.5, 0.5, 0.99), |(theta, _)| theta)
}

/// Returns the final parameters, cost, iteration count and whether the
/// iteration stopped on its own tolerance.
fn levenberg(start: Vector3<f64>, lengths: &[f64], values: &[f64]) -> (Vector3<f64>, f64, usize, bool) {
    let mut theta = start;
    clamp_p(&mut theta);
    let mut cost = sum_squares(&theta, lengths, values);
    let mut lambda = 1e-3;
    for it in 0..MAX_ITER {
        let (jtj, jtr) = normal_equations(&theta, lengths, values);
        let mut improved = false;
        while lambda < 1e16 {
            let mut damped = jtj;
            for k in 0..3 {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(delta) = damped.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = theta + delta;
            clamp_p(&mut trial);
            let trial_cost = sum_squares(&trial, lengths, values);
            if trial_cost.is_finite() && trial_cost <= cost {
                let step = (trial - theta).norm();
                let gain = cost - trial_cost;
                theta = trial;
                cost = trial_cost;
                lambda = (lambda * 0.1).max(1e-15);
                improved = true;
                if step < 1e-15 * (1.0 + theta.norm()) || gain <= 1e-30 + 1e-15 * cost {
                    return (theta, cost, it + 1, true);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            return (theta, cost, it + 1, true);
        }
    }
    (theta, cost, MAX_ITER, false)
}

fn finish(theta: Vector3<f64>, cost: f64, ms: &[f64], ys: &[f64], iterations: usize) -> Result<DecayFit> {
    if !theta.iter().all(|v| v.is_finite()) {
        return Err(Error::FitDiverged("parameters left the finite range".into()));
    }
    let n = ms.len();
    let (jtj, _) = normal_equations(&theta, ms, ys);
    let dof = n.saturating_sub(3);
    let std_err = match (dof, jtj.try_inverse()) {
        (d, Some(inv)) if d > 0 => {
            let s2 = cost / d as f64;
            let se = [(s2 * inv[(0, 0)]).sqrt(), (s2 * inv[(1, 1)]).sqrt(), (s2 * inv[(2, 2)]).sqrt()];
            se.iter().all(|v| v.is_finite()).then_some(se)
        }
        _ => None,
    };
    Ok(DecayFit { a: theta[0], b: theta[1], p: theta[2], residual_rms: (cost / n as f64).sqrt(), std_err, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(a: f64, b: f64, p: f64, ms: &[f64]) -> Vec<f64> {
        ms.iter().map(|&m| a * p.powf(m) + b).collect()
    }

    const LENGTHS: [f64; 8] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0];

    #[test]
    fn recovers_planted_parameters() {
        for (a, b, p) in [(0.5, 0.5, 0.99), (0.45, 0.52, 0.97), (0.3, 0.6, 0.999), (0.5, 0.5, 0.9)] {
            let fit = fit_decay(&LENGTHS, &synth(a, b, p, &LENGTHS)).unwrap();
            assert!((fit.p - p).abs() < 1e-6, "{p}: {fit:?}");
            assert!((fit.a - a).abs() < 1e-6 && (fit.b - b).abs() < 1e-6, "{fit:?}");
        }
    }

    #[test]
    fn flat_data_is_perfect_decay() {
        let fit = fit_decay(&LENGTHS, &[1.0; 8]).unwrap();
        assert_eq!(fit.p, 1.0);
        assert!((fit.a + fit.b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(fit_decay(&[1.0, 2.0], &[1.0, 0.9]).is_err());
        assert!(fit_decay(&[1.0, 2.0, 3.0], &[1.0, f64::NAN, 0.8]).is_err());
        assert!(fit_decay(&[1.0, 2.0, 3.0], &[1.0, 0.9]).is_err());
    }
}
