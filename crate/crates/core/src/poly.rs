//! Dense univariate polynomials in a local variable, plus exact sign
//! verification on an interval.
//!
//! Evaluation works in `f64`. Sign verification converts the (binary, hence
//! rational) coefficients to exact rationals and isolates the distinct real
//! roots with a Sturm sequence, so the only tolerance involved is the one used
//! to decide whether a sampled value is numerically indistinguishable from
//! zero.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Polynomial `c[0] + c[1] t + ... + c[d] t^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(v: f64) -> Self {
        Self { coeffs: vec![v] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Index of the highest nonzero coefficient, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::constant(0.0);
        }
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect())
    }

    pub fn nth_derivative(&self, order: usize) -> Poly {
        (0..order).fold(self.clone(), |p, _| p.derivative())
    }

    /// Value of the `order`-th derivative at `t`.
    pub fn eval_derivative(&self, t: f64, order: usize) -> f64 {
        // Horner on the falling-factorial weighted coefficients.
        let mut acc = 0.0;
        for k in (order..self.coeffs.len()).rev() {
            let weight: f64 = ((k - order + 1)..=k).map(|j| j as f64).product();
            acc = acc * t + weight * self.coeffs[k];
        }
        acc
    }

    /// Re-expand around `t0`: returns `q` with `q(u) = self(u + t0)`.
    pub fn shifted(&self, t0: f64) -> Poly {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                c[j] += t0 * c[j + 1];
            }
        }
        Poly::new(c)
    }

    /// Multiply every coefficient by `alpha` and add `beta` to the constant.
    pub fn affine(&self, alpha: f64, beta: f64) -> Poly {
        let mut c: Vec<f64> = self.coeffs.iter().map(|&v| alpha * v).collect();
        if c.is_empty() {
            c.push(0.0);
        }
        c[0] += beta;
        Poly::new(c)
    }
}

/// Sign of a polynomial on an open interval, determined exactly up to the
/// negligibility threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifiedSign {
    /// Identically zero polynomial.
    Zero,
    /// Nonnegative on the interval and positive somewhere.
    Positive,
    /// Nonpositive on the interval and negative somewhere.
    Negative,
    /// Takes both signs on the interval.
    Mixed,
    /// Nonzero polynomial whose values never rise above the threshold.
    Negligible,
}

/// Relative threshold below which a sampled value counts as zero.
const NEGLIGIBLE_REL: f64 = 1e-10;

fn exact(c: f64) -> BigRational {
    BigRational::from_float(c).expect("finite coefficient")
}

type QPoly = Vec<BigRational>;

fn q_trim(p: &mut QPoly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn q_eval(p: &[BigRational], t: &BigRational) -> BigRational {
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * t + c)
}

fn q_derivative(p: &[BigRational]) -> QPoly {
    let mut d: QPoly =
        p.iter().enumerate().skip(1).map(|(k, c)| c * BigRational::from_integer(BigInt::from(k))).collect();
    q_trim(&mut d);
    d
}

/// Quotient and remainder of `a / b`, `b` nonzero.
fn q_divmod(a: &[BigRational], b: &[BigRational]) -> (QPoly, QPoly) {
    let mut rem: QPoly = a.to_vec();
    q_trim(&mut rem);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if rem.len() < b.len() {
        return (vec![], rem);
    }
    let mut quot = vec![BigRational::zero(); rem.len() - db];
    while rem.len() >= b.len() {
        let shift = rem.len() - b.len();
        let factor = rem.last().unwrap() / &lead;
        for (k, bc) in b.iter().enumerate() {
            rem[shift + k] = &rem[shift + k] - &factor * bc;
        }
        quot[shift] = factor;
        rem.pop();
        q_trim(&mut rem);
    }
    q_trim(&mut quot);
    (quot, rem)
}

fn q_monic(p: &mut QPoly) {
    if let Some(lead) = p.last().cloned() {
        for c in p.iter_mut() {
            *c = &*c / &lead;
        }
    }
}

fn q_gcd(a: &[BigRational], b: &[BigRational]) -> QPoly {
    let mut x: QPoly = a.to_vec();
    let mut y: QPoly = b.to_vec();
    q_trim(&mut x);
    q_trim(&mut y);
    while !y.is_empty() {
        let (_, r) = q_divmod(&x, &y);
        x = y;
        y = r;
    }
    q_monic(&mut x);
    x
}

struct Sturm {
    chain: Vec<QPoly>,
}

impl Sturm {
    fn new(squarefree: QPoly) -> Self {
        let mut chain = vec![squarefree.clone(), q_derivative(&squarefree)];
        loop {
            let k = chain.len();
            if chain[k - 1].is_empty() {
                chain.pop();
                break;
            }
            let (_, r) = q_divmod(&chain[k - 2], &chain[k - 1]);
            if r.is_empty() {
                break;
            }
            chain.push(r.into_iter().map(|c| -c).collect());
        }
        Self { chain }
    }

    fn variations(&self, t: &BigRational) -> usize {
        let mut count = 0;
        let mut last = 0i8;
        for p in &self.chain {
            let v = q_eval(p, t);
            let s = if v.is_positive() {
                1
            } else if v.is_negative() {
                -1
            } else {
                0
            };
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    fn is_root(&self, t: &BigRational) -> bool {
        q_eval(&self.chain[0], t).is_zero()
    }
}

/// Isolate every distinct root in `(lo, hi)` into an interval of width at most
/// `width`; `lo` and `hi` must not be roots.
fn isolate(
    sturm: &Sturm,
    lo: BigRational,
    hi: BigRational,
    width: &BigRational,
    out: &mut Vec<(BigRational, BigRational)>,
) {
    let count = sturm.variations(&lo) - sturm.variations(&hi);
    if count == 0 {
        return;
    }
    if count == 1 && (&hi - &lo) <= *width {
        out.push((lo, hi));
        return;
    }
    let two = BigRational::from_integer(BigInt::from(2));
    let mut mid = (&lo + &hi) / &two;
    // Nudge off an exact root so both halves have non-root endpoints.
    let mut nudge = (&hi - &lo) / BigRational::from_integer(BigInt::from(1024));
    while sturm.is_root(&mid) {
        mid = &mid + &nudge;
        nudge = nudge / &two;
    }
    isolate(sturm, lo, mid.clone(), width, out);
    isolate(sturm, mid, hi, width, out);
}

/// Exact sign of `p` on the open interval `(0, width)`.
///
/// All distinct real roots inside the interval are isolated with a Sturm
/// sequence of the square-free part; the polynomial is then sampled in each
/// root-free gap. Gaps whose samples are negligible (relative to the size of
/// the polynomial on the interval) do not vote, so clusters produced by
/// rounding a multiple root into nearby simple roots are ignored.
pub fn verify_sign(p: &Poly, width: f64) -> VerifiedSign {
    assert!(width > 0.0 && width.is_finite());
    if p.is_zero() {
        return VerifiedSign::Zero;
    }
    let deg = p.degree().unwrap();
    let coeffs: QPoly = p.coeffs()[..=deg].iter().map(|&c| exact(c)).collect();
    let scale: f64 = p.coeffs()[..=deg].iter().enumerate().map(|(k, c)| c.abs() * width.powi(k as i32)).sum();
    let tol = NEGLIGIBLE_REL * scale;

    let zero = BigRational::zero();
    let w = exact(width);
    let mut roots: Vec<(BigRational, BigRational)> = Vec::new();
    if deg >= 1 {
        let g = q_gcd(&coeffs, &q_derivative(&coeffs));
        let squarefree = if g.len() > 1 { q_divmod(&coeffs, &g).0 } else { coeffs.clone() };
        let sturm = Sturm::new(squarefree);
        // Shrink the ends inward until they are not roots themselves.
        let mut lo = zero.clone();
        let mut hi = w.clone();
        let mut eps = &w / BigRational::from_integer(BigInt::from(1u64 << 52));
        while sturm.is_root(&lo) || sturm.is_root(&hi) {
            if sturm.is_root(&lo) {
                lo = &zero + &eps;
            }
            if sturm.is_root(&hi) {
                hi = &w - &eps;
            }
            eps = eps * BigRational::from_integer(BigInt::from(2));
        }
        let resolution = &w / BigRational::from_integer(BigInt::from(1u64 << 40));
        isolate(&sturm, lo, hi, &resolution, &mut roots);
    }

    // Gap boundaries: 0, root intervals, width.
    let mut edges: Vec<(BigRational, BigRational)> = Vec::with_capacity(roots.len() + 1);
    let mut left = zero;
    for (a, b) in roots {
        edges.push((left, a));
        left = b;
    }
    edges.push((left, w));

    let mut seen_pos = false;
    let mut seen_neg = false;
    for (a, b) in edges {
        let span = &b - &a;
        let mut best = 0.0f64;
        for frac in [1u32, 2, 3] {
            let t = &a + &span * BigRational::new(BigInt::from(frac), BigInt::from(4));
            let v = q_eval(&coeffs, &t).to_f64().unwrap_or(0.0);
            if v.abs() > best.abs() {
                best = v;
            }
        }
        if best.abs() > tol {
            if best > 0.0 {
                seen_pos = true;
            } else {
                seen_neg = true;
            }
        }
    }
    match (seen_pos, seen_neg) {
        (true, true) => VerifiedSign::Mixed,
        (true, false) => VerifiedSign::Positive,
        (false, true) => VerifiedSign::Negative,
        (false, false) => VerifiedSign::Negligible,
    }
}

/// Exact value of `p^{(order)}(t)` computed in rational arithmetic and rounded
/// once at the end.
pub fn exact_derivative_at(p: &Poly, t: f64, order: usize) -> f64 {
    let coeffs: QPoly = p.coeffs().iter().map(|&c| exact(c)).collect();
    let mut d = coeffs;
    for _ in 0..order {
        d = q_derivative(&d);
    }
    q_eval(&d, &exact(t)).to_f64().unwrap_or(f64::NAN)
}

/// Sum of the absolute terms of `p^{(order)}(t)`: the magnitude against
/// which rounding in the coefficients should be judged.
pub fn derivative_scale(p: &Poly, t: f64, order: usize) -> f64 {
    p.coeffs()
        .iter()
        .enumerate()
        .skip(order)
        .map(|(j, c)| {
            let falling = ((j - order + 1)..=j).fold(1.0, |acc, i| acc * i as f64);
            (c * falling * t.abs().powi((j - order) as i32)).abs()
        })
        .sum()
}

/// Exact difference `p^{(order)}(tp) - q^{(order)}(tq)`, rounded once.
pub fn exact_derivative_gap(p: &Poly, tp: f64, q: &Poly, tq: f64, order: usize) -> f64 {
    let mut dp: QPoly = p.coeffs().iter().map(|&c| exact(c)).collect();
    let mut dq: QPoly = q.coeffs().iter().map(|&c| exact(c)).collect();
    for _ in 0..order {
        dp = q_derivative(&dp);
        dq = q_derivative(&dq);
    }
    (q_eval(&dp, &exact(tp)) - q_eval(&dq, &exact(tq))).to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_and_derivatives() {
        let p = Poly::new(vec![1.0, -2.0, 0.0, 3.0]);
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 24.0);
        assert_eq!(p.eval_derivative(2.0, 1), -2.0 + 36.0);
        assert_eq!(p.eval_derivative(2.0, 2), 36.0);
        assert_eq!(p.eval_derivative(2.0, 3), 18.0);
        assert_eq!(p.eval_derivative(2.0, 4), 0.0);
        assert_eq!(p.derivative().eval(2.0), p.eval_derivative(2.0, 1));
    }

    #[test]
    fn shift_reexpands() {
        let p = Poly::new(vec![0.0, 0.0, 1.0]);
        let q = p.shifted(-0.5);
        assert_eq!(q.coeffs(), &[0.25, -1.0, 1.0]);
    }

    #[test]
    fn signs_of_simple_polynomials() {
        assert_eq!(verify_sign(&Poly::new(vec![0.0, 0.0]), 1.0), VerifiedSign::Zero);
        assert_eq!(verify_sign(&Poly::new(vec![1.0, 1.0]), 1.0), VerifiedSign::Positive);
        assert_eq!(verify_sign(&Poly::new(vec![-0.5, 1.0]), 1.0), VerifiedSign::Mixed);
        // Double interior root: no sign change.
        let p = Poly::new(vec![0.09, -0.6, 1.0]);
        assert_eq!(verify_sign(&p, 1.0), VerifiedSign::Positive);
        // Ends that are roots of high multiplicity.
        let q = Poly::new(vec![0.0, 0.0, -1.0, 2.0, -1.0]); // -t^2 (1-t)^2
        assert_eq!(verify_sign(&q, 1.0), VerifiedSign::Negative);
    }

    #[test]
    fn rounded_multiple_root_at_the_end_is_tolerated() {
        // -(t - r)^7 expanded with an awkward r: the root at r splits under
        // rounding but the sign on (0, r) is unambiguous.
        let r = 0.37_f64;
        let mut c = vec![0.0; 8];
        let binom = [1.0, 7.0, 21.0, 35.0, 35.0, 21.0, 7.0, 1.0];
        for k in 0..8 {
            c[k] = -binom[k] * (-r).powi(7 - k as i32);
        }
        assert_eq!(verify_sign(&Poly::new(c), r), VerifiedSign::Positive);
    }

    #[test]
    fn exact_gap_is_exact() {
        let p = Poly::new(vec![0.25, 0.5]);
        let q = Poly::new(vec![0.75]);
        assert_eq!(exact_derivative_gap(&p, 1.0, &q, 0.0, 0), 0.0);
        let r = Poly::new(vec![0.1, 0.2]);
        let s = Poly::new(vec![0.1 + 0.2]);
        let gap = exact_derivative_gap(&r, 1.0, &s, 0.0, 0);
        assert!(gap != 0.0 && gap.abs() < 1e-16);
    }
}
