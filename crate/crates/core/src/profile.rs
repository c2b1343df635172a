//! Piecewise-polynomial advection profiles `m`, potentials `c` and boundary
//! data.
//!
//! Every piece is stored in its local variable `t = x - knot_left`. A profile
//! is only constructed through [`build_profile`], which checks C² gluing at
//! every interior knot and verifies the declared monotonicity of each piece
//! exactly (see [`crate::poly::verify_sign`]).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{derivative_scale, exact_derivative_gap, verify_sign, Poly, VerifiedSign};

/// Highest polynomial degree accepted for a single piece.
pub const MAX_DEGREE: usize = 8;
/// Tolerance for value, slope and curvature mismatch at a knot, relative to
/// the magnitude of the terms being compared (absolute below magnitude 1).
pub const C2_TOL: f64 = 1e-12;

fn gap_tolerance(p: &Poly, tp: f64, q: &Poly, tq: f64, order: usize) -> f64 {
    C2_TOL * derivative_scale(p, tp, order).max(derivative_scale(q, tq, order)).max(1.0)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("malformed spec: {0}")]
    MalformedSpec(String),
    #[error("derivative of order {order} jumps by {jump:e} at knot {knot}")]
    NotC2 { knot: f64, order: usize, jump: f64 },
    #[error("segment {segment} declared {declared:?} but verified {verified:?}")]
    SignMismatch { segment: usize, declared: Monotonicity, verified: VerifiedSign },
    #[error("profile is constant on [0,1]")]
    GloballyConstant,
    #[error("point {0} outside [0,1]")]
    OutOfDomain(f64),
    #[error("potential is discontinuous at knot {knot} (jump {jump:e})")]
    Discontinuous { knot: f64, jump: f64 },
    #[error("not periodic: {0}")]
    NotPeriodic(String),
    #[error("invalid boundary data: {0}")]
    InvalidBoundary(String),
}

/// Declared monotonicity of one piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Constant,
}

impl Monotonicity {
    pub fn symbol(self) -> char {
        match self {
            Monotonicity::Increasing => '+',
            Monotonicity::Decreasing => '-',
            Monotonicity::Constant => '0',
        }
    }

    fn matches(self, verified: VerifiedSign) -> bool {
        matches!(
            (self, verified),
            (Monotonicity::Increasing, VerifiedSign::Positive)
                | (Monotonicity::Decreasing, VerifiedSign::Negative)
                | (Monotonicity::Constant, VerifiedSign::Zero)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub coeffs: Vec<f64>,
    pub sign: Monotonicity,
}

/// Unvalidated description of `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub knots: Vec<f64>,
    pub segments: Vec<SegmentSpec>,
}

/// Knots plus one local-variable polynomial per interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePoly {
    knots: Vec<f64>,
    pieces: Vec<Poly>,
}

impl PiecewisePoly {
    pub fn new(knots: Vec<f64>, pieces: Vec<Poly>) -> Result<Self, ProfileError> {
        check_knots(&knots)?;
        if pieces.len() + 1 != knots.len() {
            return Err(ProfileError::MalformedSpec(format!(
                "{} knots need {} segments, got {}",
                knots.len(),
                knots.len() - 1,
                pieces.len()
            )));
        }
        for (i, p) in pieces.iter().enumerate() {
            if p.coeffs().is_empty() {
                return Err(ProfileError::MalformedSpec(format!("segment {i} has no coefficients")));
            }
            if p.coeffs().len() > MAX_DEGREE + 1 {
                return Err(ProfileError::MalformedSpec(format!("segment {i} exceeds degree {MAX_DEGREE}")));
            }
            if p.coeffs().iter().any(|c| !c.is_finite()) {
                return Err(ProfileError::MalformedSpec(format!("segment {i} has a non-finite coefficient")));
            }
        }
        Ok(Self { knots, pieces })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn pieces(&self) -> &[Poly] {
        &self.pieces
    }

    pub fn width(&self, i: usize) -> f64 {
        self.knots[i + 1] - self.knots[i]
    }

    /// Index of the piece used at `x`: the right-sided piece at interior
    /// knots, the last piece at `x = 1`.
    pub fn locate(&self, x: f64) -> Result<usize, ProfileError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(ProfileError::OutOfDomain(x));
        }
        let n = self.pieces.len();
        let idx = self.knots[1..n].partition_point(|&k| k <= x);
        Ok(idx)
    }

    pub fn eval(&self, x: f64, order: usize) -> Result<f64, ProfileError> {
        let i = self.locate(x)?;
        Ok(self.pieces[i].eval_derivative(x - self.knots[i], order))
    }

    /// Evaluate without the domain check; `x` is clamped to [0,1].
    pub fn value(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let i = self.locate(x).unwrap_or(0);
        self.pieces[i].eval(x - self.knots[i])
    }

    pub fn derivative_at(&self, x: f64, order: usize) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let i = self.locate(x).unwrap_or(0);
        self.pieces[i].eval_derivative(x - self.knots[i], order)
    }

    /// Left-sided derivative at an interior knot `k` (index into knots).
    pub fn left_derivative_at_knot(&self, k: usize, order: usize) -> f64 {
        self.pieces[k - 1].eval_derivative(self.width(k - 1), order)
    }

    /// Dense-sample extrema of the `order`-th derivative over [0,1].
    pub fn sampled_range(&self, order: usize, per_piece: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, p) in self.pieces.iter().enumerate() {
            let w = self.width(i);
            for j in 0..=per_piece {
                let v = p.eval_derivative(w * j as f64 / per_piece as f64, order);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }

    fn affine(&self, alpha: f64, beta: f64) -> Self {
        Self { knots: self.knots.clone(), pieces: self.pieces.iter().map(|p| p.affine(alpha, beta)).collect() }
    }
}

fn check_knots(knots: &[f64]) -> Result<(), ProfileError> {
    if knots.len() < 2 {
        return Err(ProfileError::MalformedSpec("need at least two knots".into()));
    }
    if knots[0] != 0.0 || *knots.last().unwrap() != 1.0 {
        return Err(ProfileError::MalformedSpec("knots must start at 0 and end at 1".into()));
    }
    if knots.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ProfileError::MalformedSpec("knots must be strictly ascending".into()));
    }
    Ok(())
}

/// Validated advection profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdvectionProfile {
    spec: ProfileSpec,
    poly: PiecewisePoly,
    sign_signature: Vec<Monotonicity>,
    global_range: (f64, f64),
    max_abs_slope: f64,
}

pub fn build_profile(spec: ProfileSpec) -> Result<AdvectionProfile, ProfileError> {
    let pieces: Vec<Poly> = spec.segments.iter().map(|s| Poly::new(s.coeffs.clone())).collect();
    let poly = PiecewisePoly::new(spec.knots.clone(), pieces)?;

    for k in 1..poly.knots.len() - 1 {
        let left = &poly.pieces[k - 1];
        let right = &poly.pieces[k];
        for order in 0..=2 {
            let jump = exact_derivative_gap(left, poly.width(k - 1), right, 0.0, order);
            if jump.abs() > gap_tolerance(left, poly.width(k - 1), right, 0.0, order) {
                return Err(ProfileError::NotC2 { knot: poly.knots[k], order, jump });
            }
        }
    }

    if poly.pieces.iter().all(|p| p.derivative().is_zero()) {
        return Err(ProfileError::GloballyConstant);
    }

    let mut sign_signature = Vec::with_capacity(poly.pieces.len());
    for (i, (p, seg)) in poly.pieces.iter().zip(&spec.segments).enumerate() {
        let verified = verify_sign(&p.derivative(), poly.width(i));
        if !seg.sign.matches(verified) {
            return Err(ProfileError::SignMismatch { segment: i, declared: seg.sign, verified });
        }
        sign_signature.push(seg.sign);
    }

    // Extrema of a piecewise-monotone function sit at the knots.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, p) in poly.pieces.iter().enumerate() {
        for v in [p.eval(0.0), p.eval(poly.width(i))] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let (dlo, dhi) = poly.sampled_range(1, 256);
    Ok(AdvectionProfile { spec, poly, sign_signature, global_range: (lo, hi), max_abs_slope: dlo.abs().max(dhi.abs()) })
}

impl AdvectionProfile {
    pub fn spec(&self) -> &ProfileSpec {
        &self.spec
    }

    pub fn poly(&self) -> &PiecewisePoly {
        &self.poly
    }

    pub fn knots(&self) -> &[f64] {
        &self.poly.knots
    }

    pub fn sign_signature(&self) -> &[Monotonicity] {
        &self.sign_signature
    }

    pub fn global_range(&self) -> (f64, f64) {
        self.global_range
    }

    /// Sampled estimate of `max |m'|`, used by grid policies.
    pub fn max_abs_slope(&self) -> f64 {
        self.max_abs_slope
    }

    /// `m^{(order)}(x)`; right-sided at interior knots.
    pub fn eval(&self, x: f64, order: usize) -> Result<f64, ProfileError> {
        self.poly.eval(x, order)
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.poly.derivative_at(x, 1)
    }

    pub fn curvature(&self, x: f64) -> f64 {
        self.poly.derivative_at(x, 2)
    }

    /// `alpha * m + beta`, `alpha > 0`; signs and structure are preserved.
    pub fn affine(&self, alpha: f64, beta: f64) -> Result<AdvectionProfile, ProfileError> {
        assert!(alpha > 0.0);
        let p = self.poly.affine(alpha, beta);
        let spec = ProfileSpec {
            knots: self.spec.knots.clone(),
            segments: p
                .pieces
                .iter()
                .zip(&self.spec.segments)
                .map(|(q, s)| SegmentSpec { coeffs: q.coeffs().to_vec(), sign: s.sign })
                .collect(),
        };
        build_profile(spec)
    }

    /// Checks the periodic gluing conditions `m^{(k)}(0) = m^{(k)}(1)`, k ≤ 2.
    pub fn check_periodic(&self) -> Result<(), ProfileError> {
        let last = self.poly.pieces.len() - 1;
        let (p, w, q) = (&self.poly.pieces[last], self.poly.width(last), &self.poly.pieces[0]);
        for order in 0..=2 {
            let jump = exact_derivative_gap(p, w, q, 0.0, order);
            if jump.abs() > gap_tolerance(p, w, q, 0.0, order) {
                return Err(ProfileError::NotPeriodic(format!(
                    "m derivative of order {order} differs by {jump:e} between 0 and 1"
                )));
            }
        }
        Ok(())
    }
}

/// Continuous piecewise-polynomial potential `c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Potential {
    poly: PiecewisePoly,
}

impl Potential {
    pub fn new(knots: Vec<f64>, pieces: Vec<Vec<f64>>) -> Result<Self, ProfileError> {
        let poly = PiecewisePoly::new(knots, pieces.into_iter().map(Poly::new).collect())?;
        for k in 1..poly.knots.len() - 1 {
            let (left, right) = (&poly.pieces[k - 1], &poly.pieces[k]);
            let jump = exact_derivative_gap(left, poly.width(k - 1), right, 0.0, 0);
            if jump.abs() > gap_tolerance(left, poly.width(k - 1), right, 0.0, 0) {
                return Err(ProfileError::Discontinuous { knot: poly.knots[k], jump });
            }
        }
        Ok(Self { poly })
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(v: f64) -> Self {
        Self { poly: PiecewisePoly { knots: vec![0.0, 1.0], pieces: vec![Poly::constant(v)] } }
    }

    /// `c(x) = sum_k coeffs[k] x^k` on all of [0,1].
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self, ProfileError> {
        Self::new(vec![0.0, 1.0], vec![coeffs])
    }

    pub fn poly(&self) -> &PiecewisePoly {
        &self.poly
    }

    pub fn eval(&self, x: f64, order: usize) -> Result<f64, ProfileError> {
        self.poly.eval(x, order)
    }

    /// `c(x)` with `x` clamped into [0,1].
    pub fn at(&self, x: f64) -> f64 {
        self.poly.value(x)
    }

    pub fn shifted(&self, sigma: f64) -> Self {
        Self { poly: self.poly.affine(1.0, sigma) }
    }

    /// Dense-sampled `(min c, max c)` over [0,1].
    pub fn range(&self) -> (f64, f64) {
        self.poly.sampled_range(0, 512)
    }

    pub fn check_periodic(&self) -> Result<(), ProfileError> {
        let last = self.poly.pieces.len() - 1;
        let (p, w, q) = (&self.poly.pieces[last], self.poly.width(last), &self.poly.pieces[0]);
        let jump = exact_derivative_gap(p, w, q, 0.0, 0);
        if jump.abs() > gap_tolerance(p, w, q, 0.0, 0) {
            return Err(ProfileError::NotPeriodic(format!("c(1) - c(0) = {jump:e}")));
        }
        Ok(())
    }
}

/// Robin data `-hbar1 phi'(0) + ell1 phi(0) = hbar2 phi'(1) + ell2 phi(1) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Robin {
    pub hbar1: f64,
    pub ell1: f64,
    pub hbar2: f64,
    pub ell2: f64,
}

impl Robin {
    pub fn new(hbar1: f64, ell1: f64, hbar2: f64, ell2: f64) -> Result<Self, ProfileError> {
        let r = Self { hbar1, ell1, hbar2, ell2 };
        r.validate()?;
        Ok(r)
    }

    pub fn neumann() -> Self {
        Self { hbar1: 1.0, ell1: 0.0, hbar2: 1.0, ell2: 0.0 }
    }

    pub fn dirichlet() -> Self {
        Self { hbar1: 0.0, ell1: 1.0, hbar2: 0.0, ell2: 1.0 }
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let all = [self.hbar1, self.ell1, self.hbar2, self.ell2];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ProfileError::InvalidBoundary("coefficients must be finite and nonnegative".into()));
        }
        if self.hbar1 + self.ell1 <= 0.0 || self.hbar2 + self.ell2 <= 0.0 {
            return Err(ProfileError::InvalidBoundary("need hbar + ell > 0 at each end".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundarySpec {
    Robin(Robin),
    Periodic,
}

impl BoundarySpec {
    /// Checks the boundary data and, for periodic problems, the gluing of `m`
    /// and `c` across `x = 0 ~ 1`.
    pub fn validate_for(&self, m: &AdvectionProfile, c: &Potential) -> Result<(), ProfileError> {
        match self {
            BoundarySpec::Robin(r) => r.validate(),
            BoundarySpec::Periodic => {
                m.check_periodic()?;
                c.check_periodic()
            }
        }
    }
}
