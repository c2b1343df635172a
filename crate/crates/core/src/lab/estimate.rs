use serde::Serialize;

use super::LabError;

const P_MIN: f64 = 0.5;
const P_MAX: f64 = 3.0;
/// Relative fit residual below which the extrapolation counts as reliable.
const FIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub lambda_inf: f64,
    pub lambda_sup: f64,
    /// `lambda_inf` of the model `lambda(s) = lambda_inf + A / s^p` fitted to
    /// the last three points.
    pub extrapolated: f64,
    pub exponent: f64,
    pub amplitude: f64,
    pub reliable: bool,
    pub converged: bool,
    pub tolerance: f64,
}

fn tail(points: &[(f64, f64)]) -> &[(f64, f64)] {
    let k = points.len().div_ceil(2).max(2);
    &points[points.len() - k..]
}

/// Least-squares `(L, A)` and residual norm for fixed `p`.
fn fit_fixed(points: &[(f64, f64)], p: f64) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let (mut su, mut sy, mut suu, mut suy) = (0.0, 0.0, 0.0, 0.0);
    for &(s, y) in points {
        let u = s.powf(-p);
        su += u;
        sy += y;
        suu += u * u;
        suy += u * y;
    }
    let det = n * suu - su * su;
    let (l, a) = if det.abs() <= f64::MIN_POSITIVE {
        (sy / n, 0.0)
    } else {
        ((suu * sy - su * suy) / det, (n * suy - su * sy) / det)
    };
    let r: f64 = points.iter().map(|&(s, y)| (l + a * s.powf(-p) - y).powi(2)).sum();
    (l, a, r.sqrt())
}

fn fit_model(points: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let eval = |p: f64| {
        let (l, a, r) = fit_fixed(points, p);
        (p, l, a, r)
    };
    let steps = 250;
    let mut best = eval(P_MIN);
    for i in 1..=steps {
        let cand = eval(P_MIN + (P_MAX - P_MIN) * i as f64 / steps as f64);
        if cand.3 < best.3 {
            best = cand;
        }
    }
    // Golden-section refinement around the best grid point.
    let h = (P_MAX - P_MIN) / steps as f64;
    let (mut lo, mut hi) = ((best.0 - h).max(P_MIN), (best.0 + h).min(P_MAX));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if eval(x1).3 <= eval(x2).3 {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let refined = eval(0.5 * (lo + hi));
    if refined.3 < best.3 {
        best = refined;
    }
    best
}

/// Tail statistics and a three-point extrapolation of `(s, lambda)` data.
/// Points must be ordered by `s`.
pub fn estimate_limit(points: &[(f64, f64)], tolerance: f64) -> Result<LimitEstimate, LabError> {
    if points.len() < 3 {
        return Err(LabError::InsufficientData { need: 3, got: points.len() });
    }
    let t = tail(points);
    let lambda_inf = t.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let lambda_sup = t.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let last3 = &points[points.len() - 3..];
    let (p, l, a, r) = fit_model(last3);
    let scale = last3.iter().map(|q| q.1.abs()).fold(1.0f64, f64::max);
    let spread = lambda_sup - lambda_inf;
    // A flat tail is its own limit, whatever exponent the degenerate fit picks.
    let flat = spread <= f64::EPSILON * 8.0 * scale;
    let reliable = flat || (r <= FIT_TOL * scale && l.is_finite());
    Ok(LimitEstimate {
        lambda_inf,
        lambda_sup,
        extrapolated: if flat { last3[2].1 } else { l },
        exponent: p,
        amplitude: if flat { 0.0 } else { a },
        reliable,
        converged: spread <= tolerance,
        tolerance,
    })
}

/// Least-squares slope of `log lambda` against `log s` over the tail half.
pub fn growth_exponent(points: &[(f64, f64)]) -> Result<f64, LabError> {
    if points.len() < 3 {
        return Err(LabError::InsufficientData { need: 3, got: points.len() });
    }
    if let Some(&(s, l)) = points.iter().find(|p| !(p.1 > 0.0) || !(p.0 > 0.0)) {
        return Err(LabError::NonPositiveLambda(l, s));
    }
    let t = tail(points);
    let n = t.len() as f64;
    let xs: Vec<f64> = t.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = t.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
