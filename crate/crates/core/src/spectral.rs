//! Smallest eigenpair of a symmetric tridiagonal matrix, optionally with a
//! cyclic corner coupling the first and last entries.
//!
//! The eigenvalue is bracketed by bisection on the inertia of `T - lambda I`.
//! For the plain tridiagonal case this is the classical Sturm count from the
//! `LDL^T` pivots. For the cyclic case index 0 is treated as a border: with
//! `B` the trailing block and `u` its coupling to index 0, the inertia of
//! `T - lambda I` is the inertia of `B - lambda I` plus the sign of the Schur
//! complement `t_00 - lambda - u^T (B - lambda I)^{-1} u`.
//!
//! The vector comes from inverse iteration with the shift fixed at the lower
//! end of the bracket, where `T - sigma I` is positive definite. For matrices
//! with nonpositive off-diagonals every iterate stays entrywise positive.

use thiserror::Error;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const RESIDUAL_TOL: f64 = 1e-8;
const MAX_ITERATIONS: usize = 200;
const EXTRA_REFINEMENTS: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("inverse iteration did not converge in {max_iterations} iterations (residual {residual:e})")]
    NoConvergence { max_iterations: usize, residual: f64 },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("bad matrix shape: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    diag: Vec<f64>,
    off: Vec<f64>,
    corner: Option<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self, SpectralError> {
        Self::build(diag, off, None)
    }

    /// Cyclic matrix with `T[0][n-1] = T[n-1][0] = corner`.
    pub fn cyclic(diag: Vec<f64>, off: Vec<f64>, corner: f64) -> Result<Self, SpectralError> {
        Self::build(diag, off, Some(corner))
    }

    fn build(diag: Vec<f64>, off: Vec<f64>, corner: Option<f64>) -> Result<Self, SpectralError> {
        if diag.is_empty() {
            return Err(SpectralError::Shape("empty matrix".into()));
        }
        if off.len() + 1 != diag.len() {
            return Err(SpectralError::Shape(format!(
                "{} diagonal entries need {} off-diagonal entries, got {}",
                diag.len(),
                diag.len() - 1,
                off.len()
            )));
        }
        if diag.iter().chain(&off).chain(corner.iter()).any(|v| !v.is_finite()) {
            return Err(SpectralError::NonFinite);
        }
        Ok(Self { diag, off, corner })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn corner(&self) -> Option<f64> {
        self.corner
    }

    pub fn shifted(&self, sigma: f64) -> Self {
        Self { diag: self.diag.iter().map(|d| d + sigma).collect(), off: self.off.clone(), corner: self.corner }
    }

    /// Equivalent form used by the solver: small cyclic matrices have their
    /// corner folded into the ordinary off-diagonal.
    fn normalized(&self) -> Self {
        match (self.corner, self.n()) {
            (Some(_), 1) => Self { corner: None, ..self.clone() },
            (Some(c), 2) => Self { diag: self.diag.clone(), off: vec![self.off[0] + c], corner: None },
            _ => self.clone(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        let m = self.normalized();
        let mut out: Vec<f64> = m.diag.iter().zip(v).map(|(d, x)| d * x).collect();
        for i in 0..n - 1 {
            out[i] += m.off[i] * v[i + 1];
            out[i + 1] += m.off[i] * v[i];
        }
        if let Some(c) = m.corner {
            out[0] += c * v[n - 1];
            out[n - 1] += c * v[0];
        }
        out
    }

    /// Induced infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let m = self.normalized();
        let n = m.n();
        (0..n)
            .map(|i| {
                let mut s = m.diag[i].abs();
                if i > 0 {
                    s += m.off[i - 1].abs();
                }
                if i + 1 < n {
                    s += m.off[i].abs();
                }
                if let Some(c) = m.corner {
                    if i == 0 || i == n - 1 {
                        s += c.abs();
                    }
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let m = self.normalized();
        let n = m.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += m.off[i - 1].abs();
            }
            if i + 1 < n {
                r += m.off[i].abs();
            }
            if let Some(c) = m.corner {
                if i == 0 || i == n - 1 {
                    r += c.abs();
                }
            }
            lo = lo.min(m.diag[i] - r);
            hi = hi.max(m.diag[i] + r);
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    /// Unit Euclidean norm, positive sum.
    pub vector: Vec<f64>,
    /// `||T v - lambda v||_2 / ||T||_inf`.
    pub residual: f64,
}

fn pivmin(off: &[f64]) -> f64 {
    let b2 = off.iter().fold(1.0f64, |a, b| a.max(b * b));
    f64::MIN_POSITIVE * b2
}

/// Pivots of `LDL^T = A - lambda I` for a plain tridiagonal `A`, with tiny
/// pivots replaced by a safe positive value.
fn pivots(diag: &[f64], off: &[f64], lambda: f64, guard: f64) -> Vec<f64> {
    let mut d = Vec::with_capacity(diag.len());
    let mut prev = 0.0;
    for i in 0..diag.len() {
        let mut p = diag[i] - lambda;
        if i > 0 {
            p -= off[i - 1] * off[i - 1] / prev;
        }
        if p.abs() < guard {
            p = guard;
        }
        d.push(p);
        prev = p;
    }
    d
}

/// `u^T (A - lambda I)^{-1} u` from the pivots of `A - lambda I`.
fn quadratic_form(off: &[f64], piv: &[f64], u: &[f64]) -> f64 {
    let mut y_prev = 0.0;
    let mut acc = 0.0;
    for i in 0..piv.len() {
        let y = if i == 0 { u[0] } else { u[i] - off[i - 1] / piv[i - 1] * y_prev };
        acc += y * y / piv[i];
        y_prev = y;
    }
    acc
}

/// Border vector coupling index 0 to the trailing block of a cyclic matrix.
fn border(t: &SymTridiag, corner: f64) -> Vec<f64> {
    let m = t.n() - 1;
    let mut u = vec![0.0; m];
    u[0] += t.off[0];
    u[m - 1] += corner;
    u
}

/// Number of eigenvalues strictly below `lambda`.
pub fn sturm_count(t: &SymTridiag, lambda: f64) -> usize {
    let m = t.normalized();
    let guard = pivmin(&m.off);
    match m.corner {
        None => pivots(&m.diag, &m.off, lambda, guard).iter().filter(|&&p| p < 0.0).count(),
        Some(c) => {
            let (bd, bo) = (&m.diag[1..], &m.off[1..]);
            let piv = pivots(bd, bo, lambda, guard);
            let neg = piv.iter().filter(|&&p| p < 0.0).count();
            let schur = m.diag[0] - lambda - quadratic_form(bo, &piv, &border(&m, c));
            neg + usize::from(schur < 0.0)
        }
    }
}

/// Solves `(T - sigma I) x = v` given the pivots of the plain tridiagonal
/// matrix `diag, off` shifted by `sigma`.
fn solve_plain(off: &[f64], piv: &[f64], v: &[f64]) -> Vec<f64> {
    let n = piv.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = if i == 0 { v[0] } else { v[i] - off[i - 1] / piv[i - 1] * y[i - 1] };
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = y[i] / piv[i];
        if i + 1 < n {
            x[i] -= off[i] / piv[i] * x[i + 1];
        }
    }
    x
}

struct ShiftedSolver {
    sigma: f64,
    plain_off: Vec<f64>,
    piv: Vec<f64>,
    /// cyclic data: border vector, `(B - sigma)^{-1} u`, Schur complement
    bordered: Option<(Vec<f64>, Vec<f64>, f64)>,
}

impl ShiftedSolver {
    fn new(m: &SymTridiag, sigma: f64) -> Self {
        let guard = pivmin(&m.off);
        match m.corner {
            None => {
                Self { sigma, plain_off: m.off.clone(), piv: pivots(&m.diag, &m.off, sigma, guard), bordered: None }
            }
            Some(c) => {
                let bo = m.off[1..].to_vec();
                let piv = pivots(&m.diag[1..], &bo, sigma, guard);
                let u = border(m, c);
                let z = solve_plain(&bo, &piv, &u);
                let uz: f64 = u.iter().zip(&z).map(|(a, b)| a * b).sum();
                let mut schur = m.diag[0] - sigma - uz;
                if schur.abs() < guard {
                    schur = guard;
                }
                Self { sigma, plain_off: bo, piv, bordered: Some((u, z, schur)) }
            }
        }
    }

    fn solve(&self, v: &[f64]) -> Vec<f64> {
        match &self.bordered {
            None => solve_plain(&self.plain_off, &self.piv, v),
            Some((u, z, schur)) => {
                let y = solve_plain(&self.plain_off, &self.piv, &v[1..]);
                let uy: f64 = u.iter().zip(&y).map(|(a, b)| a * b).sum();
                let x0 = (v[0] - uy) / schur;
                let mut x = Vec::with_capacity(v.len());
                x.push(x0);
                x.extend(y.iter().zip(z).map(|(yi, zi)| yi - zi * x0));
                x
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual(t: &SymTridiag, v: &[f64], lambda: f64, norm: f64) -> f64 {
    let tv = t.mul_vec(v);
    let r: f64 = tv.iter().zip(v).map(|(a, b)| (a - lambda * b).powi(2)).sum();
    r.sqrt() / norm
}

/// Smallest eigenpair with the bisection window taken from Gershgorin bounds.
pub fn smallest_eig(t: &SymTridiag, tol_lambda: f64) -> Result<EigenPair, SpectralError> {
    smallest_eig_with_upper(t, tol_lambda, None)
}

/// Inverse iteration at a fixed shift; `None` if the solve overflows.
fn inverse_iteration(m: &SymTridiag, sigma: f64, guess: f64, norm: f64) -> Option<(Vec<f64>, f64, f64)> {
    let n = m.n();
    let solver = ShiftedSolver::new(m, sigma);
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = guess;
    let mut res = f64::INFINITY;
    let mut extra = 0;
    for _ in 0..MAX_ITERATIONS {
        let x = solver.solve(&v);
        let xx = dot(&x, &x);
        if !xx.is_finite() || xx == 0.0 {
            return None;
        }
        // Rayleigh quotient of x, free of cancellation since (T - sigma) x = v.
        lambda = solver.sigma + dot(&x, &v) / xx;
        let s = xx.sqrt();
        v = x.into_iter().map(|xi| xi / s).collect();
        res = residual(m, &v, lambda, norm);
        if res <= RESIDUAL_TOL {
            extra += 1;
            if extra > EXTRA_REFINEMENTS {
                break;
            }
        }
    }
    Some((v, lambda, res))
}

/// Like [`smallest_eig`], with an optional known upper bound on the smallest
/// eigenvalue. A hint that turns out not to bound it is ignored.
pub fn smallest_eig_with_upper(
    t: &SymTridiag,
    tol_lambda: f64,
    upper: Option<f64>,
) -> Result<EigenPair, SpectralError> {
    assert!(tol_lambda > 0.0, "tolerance must be positive");
    let m = t.normalized();
    let n = m.n();
    let (mut lo, g_hi) = m.gershgorin();
    let mut hi = match upper {
        Some(u) if u.is_finite() && u >= lo && sturm_count(&m, u) >= 1 => u,
        _ => g_hi,
    };
    if n == 1 {
        return Ok(EigenPair { lambda: m.diag[0], vector: vec![1.0], residual: 0.0 });
    }
    // Make the upper end strictly above the eigenvalue.
    let pad = tol_lambda.max(f64::EPSILON * hi.abs().max(1.0));
    hi += pad;
    lo -= pad;
    while hi - lo > tol_lambda.max(4.0 * f64::EPSILON * lo.abs().max(hi.abs())) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(&m, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let norm = m.norm_inf().max(f64::MIN_POSITIVE);
    // The bracket end can coincide with the eigenvalue to working precision,
    // leaving the shifted matrix numerically singular; back off and retry.
    let width = (hi - lo).max(f64::EPSILON * norm);
    let mut attempt = None;
    for back_off in [0.0, 1.0, 16.0, 256.0] {
        if let Some(found) = inverse_iteration(&m, lo - back_off * width, 0.5 * (lo + hi), norm) {
            attempt = Some(found);
            break;
        }
    }
    let (mut v, lambda, res) = attempt.ok_or(SpectralError::NonFinite)?;
    if !(res <= RESIDUAL_TOL) {
        return Err(SpectralError::NoConvergence { max_iterations: MAX_ITERATIONS, residual: res });
    }
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    if !lambda.is_finite() {
        return Err(SpectralError::NonFinite);
    }
    Ok(EigenPair { lambda, vector: v, residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize, h: f64) -> SymTridiag {
        SymTridiag::new(vec![2.0 / (h * h); n], vec![-1.0 / (h * h); n - 1]).unwrap()
    }

    #[test]
    fn counts() {
        let t = SymTridiag::new(vec![1.0, 2.0, 3.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(sturm_count(&t, 2.5), 2);
        assert_eq!(sturm_count(&t, 2.0), 1);
        let l = laplacian(3, 0.25);
        assert_eq!(sturm_count(&l, 20.0), 1);
        assert_eq!(sturm_count(&l, l.gershgorin().0 - 1.0), 0);
        assert_eq!(sturm_count(&l, 1e3), 3);
    }

    #[test]
    fn small_cases() {
        let one = SymTridiag::new(vec![2.0], vec![]).unwrap();
        let p = smallest_eig(&one, DEFAULT_TOL).unwrap();
        assert_eq!((p.lambda, p.vector), (2.0, vec![1.0]));

        let l = laplacian(3, 0.25);
        let p = smallest_eig(&l, DEFAULT_TOL).unwrap();
        let want = (2.0 - 2f64.sqrt()) / 0.0625;
        assert!((p.lambda - want).abs() < 1e-10, "{}", p.lambda);
        assert!(p.vector.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn cyclic_laplacian_kernel() {
        let n = 40;
        let h = 1.0 / n as f64;
        let t = SymTridiag::cyclic(vec![2.0 / (h * h); n], vec![-1.0 / (h * h); n - 1], -1.0 / (h * h)).unwrap();
        let p = smallest_eig(&t, DEFAULT_TOL).unwrap();
        assert!(p.lambda.abs() < 1e-8, "{}", p.lambda);
        let c = 1.0 / (n as f64).sqrt();
        assert!(p.vector.iter().all(|&x| (x - c).abs() < 1e-10));
        assert_eq!(sturm_count(&t, 1.0), 1);
    }

    #[test]
    fn singular_at_the_bracket() {
        // Symmetrized Neumann Laplacian: exact kernel for every size.
        for n in [5usize, 17, 150, 300, 301, 1000] {
            let h = 1.0 / (n - 1) as f64;
            let mut off = vec![-1.0 / (h * h); n - 1];
            off[0] = -(2f64).sqrt() / (h * h);
            off[n - 2] = off[0];
            let t = SymTridiag::new(vec![2.0 / (h * h); n], off).unwrap();
            let p = smallest_eig(&t, DEFAULT_TOL).unwrap();
            assert!(p.lambda.abs() < 1e-6, "n={n} {}", p.lambda);
        }
    }

    #[test]
    fn upper_hint_ignored_when_wrong() {
        let l = laplacian(5, 0.2);
        let a = smallest_eig_with_upper(&l, DEFAULT_TOL, Some(-100.0)).unwrap();
        let b = smallest_eig(&l, DEFAULT_TOL).unwrap();
        assert!((a.lambda - b.lambda).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(SymTridiag::new(vec![f64::NAN], vec![]), Err(SpectralError::NonFinite));
        assert!(matches!(SymTridiag::new(vec![1.0, 2.0], vec![]), Err(SpectralError::Shape(_))));
    }
}
