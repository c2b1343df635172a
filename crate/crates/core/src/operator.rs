//! Finite-difference assembly of the transformed operator `-w'' + q w`.
//!
//! Grids are vertex-centered and uniform. With drift, each cell couples its
//! nodes through the increment `d = s (m(x_{j+1}) - m(x_j))` only:
//!
//! ```text
//! off  = -(d / sinh d) / h^2
//! diag = (B(2 d_left) + B(-2 d_right)) / h^2 + c,   B(x) = x / (e^x - 1)
//! ```
//!
//! This is the exponentially fitted flux discretization written in the
//! symmetric `w` variable. It is consistent with `-w'' + q w`, reduces to
//! central differences when `s = 0`, keeps constants exact for `c = 0` under
//! Neumann or periodic data, and never forms `e^{2 s m}` itself.
//!
//! A Robin end `w' = sigma w` (left) or `w' = -sigma w` (right) is closed
//! with a half cell. Without drift the boundary row is
//! `((2 + 2 h sigma)/h^2 + q) w_0 - (2/h^2) w_1`. A diagonal similarity with
//! the trapezoid weights (1/2 at such an end) symmetrizes the matrix, and the
//! same weights give the normalization quadrature. A Dirichlet end removes
//! the boundary node from the unknowns.

use serde::Serialize;
use thiserror::Error;

use crate::profile::{AdvectionProfile, Potential, ProfileError, Robin};
use crate::spectral::{smallest_eig_with_upper, SpectralError, SymTridiag, DEFAULT_TOL};

/// Smallest accepted number of unknowns.
pub const MIN_UNKNOWNS: usize = 16;
/// Largest accepted value of `h * sqrt(max q)`.
pub const RESOLUTION_LIMIT: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("grid too coarse: h * sqrt(max q) = {ratio:.3} exceeds {RESOLUTION_LIMIT} (n = {n})")]
    GridTooCoarse { n: usize, ratio: f64 },
    #[error("grid too small: {n} unknowns, at least {min} required")]
    GridTooSmall { n: usize, min: usize },
    #[error("invalid closure: {0}")]
    InvalidClosure(String),
    #[error("eigenvalue {lambda} falls below min c - 1 = {bound}")]
    BoundViolated { lambda: f64, bound: f64 },
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Boundary condition for a sub-interval problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SubBC {
    N,
    D,
    /// Robin data `(hbar, ell)` inherited from the global problem.
    R {
        hbar: f64,
        ell: f64,
    },
}

impl SubBC {
    pub fn label(self) -> char {
        match self {
            SubBC::N => 'N',
            SubBC::D => 'D',
            SubBC::R { .. } => 'R',
        }
    }
}

/// How one end of the grid is closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EndClosure {
    Dirichlet,
    /// Outward-dissipative Robin coefficient `sigma` (`0` is Neumann).
    Robin {
        sigma: f64,
    },
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Closure {
    pub left: EndClosure,
    pub right: EndClosure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub a: f64,
    pub b: f64,
    /// Number of unknowns.
    pub n: usize,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Transformed { s: f64, neumann: bool },
    Subinterval,
    Periodic { s: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    pub matrix: SymTridiag,
    pub grid: Grid,
    pub closure: Closure,
    pub kind: OperatorKind,
    /// `[min q, max q]` over the unknowns.
    pub q_range: (f64, f64),
    pub c_range: (f64, f64),
    /// Coordinates of all grid nodes, including eliminated Dirichlet ends.
    nodes: Vec<f64>,
    /// Index into `nodes` of the first unknown.
    first: usize,
    /// Trapezoid weight factor (1 or 1/2) per unknown.
    weights: Vec<f64>,
}

impl DiscreteOperator {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
}

/// Grid size rule `n(s) = max(min_n, ceil(factor * s * max|m'| * length))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPolicy {
    pub min_n: usize,
    pub factor: f64,
    pub fixed: Option<usize>,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self { min_n: 2000, factor: 16.0, fixed: None }
    }
}

impl GridPolicy {
    pub fn fixed(n: usize) -> Self {
        Self { fixed: Some(n), ..Self::default() }
    }

    pub fn n_for(&self, s: f64, max_slope: f64, length: f64) -> usize {
        if let Some(n) = self.fixed {
            return n;
        }
        let want = (self.factor * s.abs() * max_slope * length).ceil();
        if want.is_finite() && want > self.min_n as f64 {
            want as usize
        } else {
            self.min_n
        }
    }
}

/// Sampled eigenfunction on the full node set of an interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl GridFunction {
    pub fn h(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    /// Trapezoid rule for `int f(w(x)) dx` over the whole grid.
    pub fn trapezoid(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.w.len();
        let h = self.h();
        let inner: f64 = self.w[1..n - 1].iter().map(|&v| f(v)).sum();
        h * (inner + 0.5 * (f(self.w[0]) + f(self.w[n - 1])))
    }

    /// Piecewise-linear interpolant; `None` outside the grid.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let (a, b) = (self.x[0], *self.x.last().unwrap());
        if x < a - 1e-12 || x > b + 1e-12 {
            return None;
        }
        let h = self.h();
        let last = self.x.len() - 1;
        let pos = ((x - a) / h).clamp(0.0, last as f64);
        let i = (pos.floor() as usize).min(last - 1);
        let t = pos - i as f64;
        Some(self.w[i] * (1.0 - t) + self.w[i + 1] * t)
    }

    /// Restriction to the nodes inside `[lo, hi]`.
    pub fn restrict(&self, lo: f64, hi: f64) -> GridFunction {
        let tol = 1e-9 * self.h();
        let (x, w): (Vec<f64>, Vec<f64>) =
            self.x.iter().zip(&self.w).filter(|(&x, _)| x >= lo - tol && x <= hi + tol).map(|(&x, &w)| (x, w)).unzip();
        GridFunction { x, w }
    }

    /// Copy scaled so that the trapezoid value of `int w^2` is one.
    pub fn normalized(&self) -> GridFunction {
        let norm = self.trapezoid(|v| v * v).sqrt();
        GridFunction { x: self.x.clone(), w: self.w.iter().map(|v| v / norm).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalPair {
    pub lambda: f64,
    pub residual: f64,
    pub eigenfunction: GridFunction,
}

fn end_closure(hbar: f64, ell: f64, drift: f64) -> EndClosure {
    if hbar == 0.0 {
        EndClosure::Dirichlet
    } else {
        EndClosure::Robin { sigma: drift + ell / hbar }
    }
}

/// `x / (e^x - 1)`.
fn bernoulli(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 - 0.5 * x + x * x / 12.0
    } else {
        x / x.exp_m1()
    }
}

/// `x / sinh x`.
fn x_over_sinh(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 - x * x / 6.0
    } else {
        x / x.sinh()
    }
}

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// `m(x1) - m(x0)` by integrating the slope, exact for the accepted degrees
/// and independent of the additive constant in `m`.
fn increment(profile: &AdvectionProfile, x0: f64, x1: f64) -> f64 {
    let mut total = 0.0;
    let mut lo = x0;
    let inner = profile.knots().iter().copied().filter(|&k| k > x0 && k < x1);
    for hi in inner.chain(std::iter::once(x1)) {
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        total += half * GAUSS4.iter().map(|&(t, w)| w * profile.slope(mid + half * t)).sum::<f64>();
        lo = hi;
    }
    total
}

/// Cell increments `s * (m(x_{j+1}) - m(x_j))` over consecutive nodes.
fn drift_increments(profile: &AdvectionProfile, s: f64, nodes: &[f64]) -> Vec<f64> {
    nodes.windows(2).map(|w| s * increment(profile, w[0], w[1])).collect()
}

struct Assembled {
    matrix: SymTridiag,
    grid: Grid,
    nodes: Vec<f64>,
    first: usize,
    weights: Vec<f64>,
    q_range: (f64, f64),
}

fn interval_nodes(a: f64, b: f64, intervals: usize) -> Vec<f64> {
    let h = (b - a) / intervals as f64;
    (0..=intervals).map(|j| if j == intervals { b } else { a + j as f64 * h }).collect()
}

/// Core builder for an interval with Dirichlet or Robin ends. `q` is the
/// full potential used by the resolution guard; `pot` is the part placed on
/// the diagonal, which equals `q` without drift. `drift` holds the cell
/// increments, and a Robin `sigma` then carries only the `ell / hbar` part.
fn assemble_interval(
    a: f64,
    b: f64,
    n: usize,
    closure: Closure,
    q: impl Fn(f64) -> f64,
    pot: impl Fn(f64) -> f64,
    drift: Option<&dyn Fn(&[f64]) -> Vec<f64>>,
) -> Result<Assembled, OperatorError> {
    if !(a < b) {
        return Err(OperatorError::InvalidClosure(format!("empty interval [{a}, {b}]")));
    }
    if n < MIN_UNKNOWNS {
        return Err(OperatorError::GridTooSmall { n, min: MIN_UNKNOWNS });
    }
    let ld = matches!(closure.left, EndClosure::Dirichlet);
    let rd = matches!(closure.right, EndClosure::Dirichlet);
    if matches!(closure.left, EndClosure::Periodic) || matches!(closure.right, EndClosure::Periodic) {
        return Err(OperatorError::InvalidClosure("periodic end on an interval operator".into()));
    }
    let intervals = n - 1 + usize::from(ld) + usize::from(rd);
    let h = (b - a) / intervals as f64;
    let nodes = interval_nodes(a, b, intervals);
    let first = usize::from(ld);
    let inv_h2 = 1.0 / (h * h);
    let d = drift.map(|f| f(&nodes)).unwrap_or_else(|| vec![0.0; intervals]);

    let mut diag = Vec::with_capacity(n);
    let mut weights = vec![1.0; n];
    let mut q_lo = f64::INFINITY;
    let mut q_hi = f64::NEG_INFINITY;
    for i in 0..n {
        let j = first + i;
        let x = nodes[j];
        let qi = q(x);
        let pi = pot(x);
        if !qi.is_finite() || !pi.is_finite() {
            return Err(SpectralError::NonFinite.into());
        }
        q_lo = q_lo.min(qi);
        q_hi = q_hi.max(qi);
        let from_left = if j > 0 { bernoulli(2.0 * d[j - 1]) } else { 0.0 };
        let to_right = if j < intervals { bernoulli(-2.0 * d[j]) } else { 0.0 };
        diag.push((from_left + to_right) * inv_h2 + pi);
    }
    let mut off: Vec<f64> = (0..n - 1).map(|i| -x_over_sinh(d[first + i]) * inv_h2).collect();
    if let EndClosure::Robin { sigma } = closure.left {
        // Half cell: the single flux counts twice against the half weight.
        diag[0] += bernoulli(-2.0 * d[0]) * inv_h2 + 2.0 * sigma / h;
        weights[0] = 0.5;
        off[0] *= std::f64::consts::SQRT_2;
    }
    if let EndClosure::Robin { sigma } = closure.right {
        diag[n - 1] += bernoulli(2.0 * d[intervals - 1]) * inv_h2 + 2.0 * sigma / h;
        weights[n - 1] = 0.5;
        off[n - 2] *= std::f64::consts::SQRT_2;
    }

    let ratio = h * q_hi.max(0.0).sqrt();
    if ratio > RESOLUTION_LIMIT {
        return Err(OperatorError::GridTooCoarse { n, ratio });
    }
    let matrix = SymTridiag::new(diag, off)?;
    Ok(Assembled { matrix, grid: Grid { a, b, n, h }, nodes, first, weights, q_range: (q_lo, q_hi) })
}

/// Transformed full problem at advection strength `s` with `n` unknowns.
pub fn assemble_transformed(
    profile: &AdvectionProfile,
    c: &Potential,
    bc: &Robin,
    s: f64,
    n: usize,
) -> Result<DiscreteOperator, OperatorError> {
    bc.validate()?;
    if !(s.is_finite() && s >= 0.0) {
        return Err(OperatorError::InvalidClosure(format!(
            "advection strength must be finite and nonnegative, got {s}"
        )));
    }
    let closure = Closure {
        left: end_closure(bc.hbar1, bc.ell1, s * profile.slope(0.0)),
        right: end_closure(bc.hbar2, bc.ell2, -s * profile.slope(1.0)),
    };
    // The fitted stencil supplies the drift part of each Robin coefficient.
    let flux_closure =
        Closure { left: end_closure(bc.hbar1, bc.ell1, 0.0), right: end_closure(bc.hbar2, bc.ell2, 0.0) };
    let q = |x: f64| {
        let d1 = profile.slope(x);
        s * s * d1 * d1 + s * profile.curvature(x) + c.at(x)
    };
    let drift = |nodes: &[f64]| drift_increments(profile, s, nodes);
    let asm = assemble_interval(0.0, 1.0, n, flux_closure, q, |x| c.at(x), Some(&drift))?;
    let neumann = bc.ell1 == 0.0 && bc.ell2 == 0.0;
    Ok(DiscreteOperator {
        matrix: asm.matrix,
        grid: asm.grid,
        closure,
        kind: OperatorKind::Transformed { s, neumann },
        q_range: asm.q_range,
        c_range: c.range(),
        nodes: asm.nodes,
        first: asm.first,
        weights: asm.weights,
    })
}

/// `-phi'' + c phi` on `[a, b]` with the requested end conditions.
pub fn assemble_subinterval(
    c: &Potential,
    a: f64,
    b: f64,
    left: SubBC,
    right: SubBC,
    n: usize,
) -> Result<DiscreteOperator, OperatorError> {
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(OperatorError::InvalidClosure(format!("need 0 <= a < b <= 1, got [{a}, {b}]")));
    }
    let end = |bc: SubBC, at_boundary: bool, which: &str| -> Result<EndClosure, OperatorError> {
        Ok(match bc {
            SubBC::N => EndClosure::Robin { sigma: 0.0 },
            SubBC::D => EndClosure::Dirichlet,
            SubBC::R { hbar, ell } => {
                if !at_boundary {
                    return Err(OperatorError::InvalidClosure(format!(
                        "Robin closure at the {which} end of [{a}, {b}], which is not a boundary point"
                    )));
                }
                if !(hbar >= 0.0 && ell >= 0.0 && hbar + ell > 0.0) {
                    return Err(OperatorError::InvalidClosure(format!("bad Robin data ({hbar}, {ell})")));
                }
                end_closure(hbar, ell, 0.0)
            }
        })
    };
    let closure = Closure { left: end(left, a == 0.0, "left")?, right: end(right, b == 1.0, "right")? };
    let asm = assemble_interval(a, b, n, closure, |x| c.at(x), |x| c.at(x), None)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in &asm.nodes {
        lo = lo.min(c.at(x));
        hi = hi.max(c.at(x));
    }
    Ok(DiscreteOperator {
        matrix: asm.matrix,
        grid: asm.grid,
        closure,
        kind: OperatorKind::Subinterval,
        q_range: asm.q_range,
        c_range: (lo, hi),
        nodes: asm.nodes,
        first: asm.first,
        weights: asm.weights,
    })
}

/// `-w'' + q w` on an arbitrary interval `[a, b]`, used for model problems
/// such as rescaled limit equations.
pub fn assemble_schrodinger(
    a: f64,
    b: f64,
    n: usize,
    closure: Closure,
    q: impl Fn(f64) -> f64,
) -> Result<DiscreteOperator, OperatorError> {
    let asm = assemble_interval(a, b, n, closure, &q, &q, None)?;
    Ok(DiscreteOperator {
        matrix: asm.matrix,
        grid: asm.grid,
        closure,
        kind: OperatorKind::Subinterval,
        q_range: asm.q_range,
        c_range: asm.q_range,
        nodes: asm.nodes,
        first: asm.first,
        weights: asm.weights,
    })
}

/// Cyclic operator for the periodic problem on `n` equispaced nodes.
pub fn assemble_periodic(
    profile: &AdvectionProfile,
    c: &Potential,
    s: f64,
    n: usize,
) -> Result<DiscreteOperator, OperatorError> {
    profile.check_periodic()?;
    c.check_periodic()?;
    if n < MIN_UNKNOWNS {
        return Err(OperatorError::GridTooSmall { n, min: MIN_UNKNOWNS });
    }
    let h = 1.0 / n as f64;
    let inv_h2 = 1.0 / (h * h);
    let nodes: Vec<f64> = (0..=n).map(|j| if j == n { 1.0 } else { j as f64 * h }).collect();
    // d[j] couples node j to node j + 1; the last cell wraps to node 0.
    let d = drift_increments(profile, s, &nodes);
    let mut diag = Vec::with_capacity(n);
    let (mut q_lo, mut q_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (j, &x) in nodes[..n].iter().enumerate() {
        let d1 = profile.slope(x);
        let qi = s * s * d1 * d1 + s * profile.curvature(x) + c.at(x);
        q_lo = q_lo.min(qi);
        q_hi = q_hi.max(qi);
        let from_left = bernoulli(2.0 * d[(j + n - 1) % n]);
        diag.push((from_left + bernoulli(-2.0 * d[j])) * inv_h2 + c.at(x));
    }
    let ratio = h * q_hi.max(0.0).sqrt();
    if ratio > RESOLUTION_LIMIT {
        return Err(OperatorError::GridTooCoarse { n, ratio });
    }
    let off = d[..n - 1].iter().map(|&v| -x_over_sinh(v) * inv_h2).collect();
    let matrix = SymTridiag::cyclic(diag, off, -x_over_sinh(d[n - 1]) * inv_h2)?;
    Ok(DiscreteOperator {
        matrix,
        grid: Grid { a: 0.0, b: 1.0, n, h },
        closure: Closure { left: EndClosure::Periodic, right: EndClosure::Periodic },
        kind: OperatorKind::Periodic { s },
        q_range: (q_lo, q_hi),
        c_range: c.range(),
        nodes,
        first: 0,
        weights: vec![1.0; n],
    })
}

/// Smallest eigenvalue and positive eigenfunction, normalized so that the
/// trapezoid value of `int w^2` is one.
pub fn principal_eigen(op: &DiscreteOperator) -> Result<PrincipalPair, OperatorError> {
    let neumann_like = matches!(op.kind, OperatorKind::Transformed { neumann: true, .. })
        || matches!(op.closure, Closure { left: EndClosure::Robin { sigma: l }, right: EndClosure::Robin { sigma: r } }
            if l == 0.0 && r == 0.0);
    let hint = neumann_like.then_some(op.c_range.1 + 1.0);
    let pair = smallest_eig_with_upper(&op.matrix, DEFAULT_TOL, hint)?;

    if let OperatorKind::Transformed { neumann: true, .. } = op.kind {
        let bound = op.c_range.0 - 1.0;
        if pair.lambda < bound {
            return Err(OperatorError::BoundViolated { lambda: pair.lambda, bound });
        }
    }

    let mut w = vec![0.0; op.nodes.len()];
    let h = op.grid.h;
    for (i, (&v, &d)) in pair.vector.iter().zip(&op.weights).enumerate() {
        w[op.first + i] = v / (h * d).sqrt();
    }
    if let EndClosure::Periodic = op.closure.left {
        let n = op.grid.n;
        w[n] = w[0];
    }
    let eigenfunction = GridFunction { x: op.nodes.clone(), w }.normalized();
    Ok(PrincipalPair { lambda: pair.lambda, residual: pair.residual, eigenfunction })
}

/// Convenience: principal eigenvalue of a sub-interval problem.
pub fn subinterval_eigenvalue(
    c: &Potential,
    a: f64,
    b: f64,
    left: SubBC,
    right: SubBC,
    n: usize,
) -> Result<f64, OperatorError> {
    Ok(principal_eigen(&assemble_subinterval(c, a, b, left, right, n)?)?.lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::build_profile;
    use crate::templates::builtin;
    use std::f64::consts::PI;

    fn template(name: &str, p: &[f64]) -> AdvectionProfile {
        build_profile(builtin(name, p).unwrap()).unwrap()
    }

    #[test]
    fn dirichlet_unit_interval() {
        let c = Potential::zero();
        let op = assemble_subinterval(&c, 0.0, 1.0, SubBC::D, SubBC::D, 2000).unwrap();
        assert_eq!(op.grid.h, 1.0 / 2001.0);
        let p = principal_eigen(&op).unwrap();
        assert!((p.lambda / (PI * PI) - 1.0).abs() < 1e-5);
        let f = &p.eigenfunction;
        assert_eq!(f.w[0], 0.0);
        let sup = f.x.iter().zip(&f.w).map(|(x, w)| (w - 2f64.sqrt() * (PI * x).sin()).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-3, "{sup}");
    }

    #[test]
    fn mixed_and_neumann_intervals() {
        let c = Potential::zero();
        let nd = subinterval_eigenvalue(&c, 0.4, 0.6, SubBC::N, SubBC::D, 2000).unwrap();
        assert!((nd / (PI / 0.4).powi(2) - 1.0).abs() < 1e-5);
        let op = assemble_subinterval(&c, 0.4, 0.6, SubBC::N, SubBC::D, 2000).unwrap();
        assert!((op.grid.h - 0.2 / 2000.0).abs() < 1e-18);
        let nn = subinterval_eigenvalue(&c, 0.3, 0.8, SubBC::N, SubBC::N, 2000).unwrap();
        assert!(nn.abs() < 1e-8);
        let cx = Potential::polynomial(vec![0.5, 3.0, -1.0]).unwrap();
        let rn = subinterval_eigenvalue(&cx, 0.0, 0.5, SubBC::R { hbar: 2.0, ell: 0.0 }, SubBC::N, 500).unwrap();
        let nn = subinterval_eigenvalue(&cx, 0.0, 0.5, SubBC::N, SubBC::N, 500).unwrap();
        assert!((rn - nn).abs() < 1e-10);
    }

    #[test]
    fn robin_interior_end_rejected() {
        let c = Potential::zero();
        let r = assemble_subinterval(&c, 0.2, 0.5, SubBC::R { hbar: 1.0, ell: 1.0 }, SubBC::N, 100);
        assert!(matches!(r, Err(OperatorError::InvalidClosure(_))));
    }

    #[test]
    fn neumann_constant_state() {
        let m = template("t1", &[]);
        let c = Potential::zero();
        let op = assemble_transformed(&m, &c, &Robin::neumann(), 0.0, 1000).unwrap();
        let p = principal_eigen(&op).unwrap();
        assert!(p.lambda.abs() < 1e-9);
        assert!(p.eigenfunction.w.iter().all(|w| (w - 1.0).abs() < 1e-8));
    }

    #[test]
    fn linear_profile_dirichlet() {
        let m = template("monotone_increasing", &[]);
        let op = assemble_transformed(&m, &Potential::zero(), &Robin::dirichlet(), 10.0, 4000).unwrap();
        let p = principal_eigen(&op).unwrap();
        let want = 100.0 + PI * PI;
        assert!((p.lambda / want - 1.0).abs() < 1e-3);
    }

    #[test]
    fn potential_shift_moves_diagonal() {
        let m = template("example1", &[]);
        let bc = Robin::new(1.0, 0.5, 1.0, 2.0).unwrap();
        let a = assemble_transformed(&m, &Potential::polynomial(vec![0.0, 1.0]).unwrap(), &bc, 7.0, 300).unwrap();
        let b = assemble_transformed(&m, &Potential::polynomial(vec![5.0, 1.0]).unwrap(), &bc, 7.0, 300).unwrap();
        for (x, y) in a.matrix.diag().iter().zip(b.matrix.diag()) {
            assert!((y - x - 5.0).abs() < 1e-9 * x.abs().max(1.0));
        }
        assert_eq!(a.matrix.off(), b.matrix.off());
    }

    #[test]
    fn coarse_grid_is_reported() {
        let m = template("monotone_increasing", &[]);
        let r = assemble_transformed(&m, &Potential::zero(), &Robin::neumann(), 1000.0, 100);
        assert!(matches!(r, Err(OperatorError::GridTooCoarse { .. })));
        let r = assemble_transformed(&m, &Potential::zero(), &Robin::neumann(), 1.0, 8);
        assert!(matches!(r, Err(OperatorError::GridTooSmall { .. })));
    }

    #[test]
    fn periodic_constant_states() {
        let m = template("periodic_bump", &[]);
        for s in [1.0, 30.0, 200.0] {
            let n = GridPolicy::default().n_for(s, m.max_abs_slope(), 1.0);
            let p = principal_eigen(&assemble_periodic(&m, &Potential::zero(), s, n).unwrap()).unwrap();
            assert!(p.lambda.abs() < 1e-6, "s={s}: {}", p.lambda);
        }
        let p = principal_eigen(&assemble_periodic(&m, &Potential::constant(3.0), 0.0, 256).unwrap()).unwrap();
        assert!((p.lambda - 3.0).abs() < 1e-9);
        assert!(matches!(
            assemble_periodic(&template("vee", &[0.5]), &Potential::zero(), 1.0, 64),
            Err(OperatorError::Profile(ProfileError::NotPeriodic(_)))
        ));
    }

    #[test]
    fn neumann_constants_are_exact() {
        for name in ["vee", "example1", "t1", "power_max"] {
            let m = template(name, &[]);
            for s in [1.0, 50.0, 400.0] {
                let n = GridPolicy::default().n_for(s, m.max_abs_slope(), 1.0);
                let op = assemble_transformed(&m, &Potential::zero(), &Robin::neumann(), s, n).unwrap();
                let p = principal_eigen(&op).unwrap();
                assert!(p.lambda.abs() < 1e-6, "{name} s={s}: {}", p.lambda);
            }
        }
    }

    #[test]
    fn fitted_stencil_limits() {
        assert_eq!(bernoulli(0.0), 1.0);
        assert!((bernoulli(1.0) - 1.0 / (1f64.exp() - 1.0)).abs() < 1e-15);
        assert!((bernoulli(-1e-6) - bernoulli(1e-6) - 1e-6).abs() < 1e-15);
        assert_eq!(bernoulli(1000.0), 0.0);
        assert_eq!(bernoulli(-1000.0), 1000.0);
        assert_eq!(x_over_sinh(0.0), 1.0);
        assert_eq!(x_over_sinh(800.0), 0.0);
        let m = template("power_max", &[0.5, 2.0]);
        let shifted = m.affine(1.0, 7.5).unwrap();
        assert_eq!(increment(&m, 0.1, 0.9), increment(&shifted, 0.1, 0.9));
        assert!((increment(&m, 0.2, 0.45) - (m.eval(0.45, 0).unwrap() - m.eval(0.2, 0).unwrap())).abs() < 1e-14);
    }

    #[test]
    fn grid_policy() {
        let p = GridPolicy::default();
        assert_eq!(p.n_for(1.0, 1.0, 1.0), 2000);
        assert_eq!(p.n_for(400.0, 1.0, 1.0), 6400);
        assert_eq!(GridPolicy::fixed(77).n_for(400.0, 1.0, 1.0), 77);
    }
}
