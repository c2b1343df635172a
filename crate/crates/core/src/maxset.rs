//! Decomposition of the local-maximum set of `m` into isolated points and
//! plateau classes.
//!
//! Classification reads only the verified per-segment signs of `m'`, so it
//! is exact and never depends on a grid. Plateau classes are named by the
//! behaviour of `m` on the flanks:
//!
//! | class | flanks                   | plateau     |
//! |-------|--------------------------|-------------|
//! | M2    | increasing / increasing  | `[a, b]`    |
//! | M3    | increasing / decreasing  | `[a, b]`    |
//! | M4    | decreasing / increasing  | `[a, b]`    |
//! | M5    | decreasing / decreasing  | `[a, b]`    |
//! | M6    | increasing after         | `[0, a]`    |
//! | M7    | decreasing after         | `[0, a]`    |
//! | M8    | increasing before        | `[a, 1]`    |
//! | M9    | decreasing before        | `[a, 1]`    |

use serde::Serialize;
use thiserror::Error;

use crate::profile::{AdvectionProfile, Monotonicity, Robin, MAX_DEGREE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaxsetError {
    #[error("{0} is not an isolated local maximum of m")]
    NotAMaximum(f64),
    #[error("maximum at {0} sits on a junction where higher one-sided derivatives differ")]
    AtSegmentJunction(f64),
    #[error("maximum at {0} is not a critical point, degeneracy order undefined")]
    NotCritical(f64),
    #[error("periodic analysis requires m'(0) > 0, got {0}")]
    PreconditionViolated(f64),
    #[error("boundary plateau class {0:?} present in a periodic profile")]
    BoundaryClassPresent(SegmentClass),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Position {
    Interior,
    LeftBoundary,
    RightBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsolatedMax {
    pub x: f64,
    pub position: Position,
    pub k_star: Option<u32>,
    pub m_kstar: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SegmentClass {
    M2,
    M3,
    M4,
    M5,
    M6,
    M7,
    M8,
    M9,
}

impl SegmentClass {
    /// Class of the same plateau for the reflected profile `m(1 - x)`.
    pub fn reflected(self) -> Self {
        use SegmentClass::*;
        match self {
            M2 => M5,
            M5 => M2,
            M3 => M3,
            M4 => M4,
            M6 => M9,
            M9 => M6,
            M7 => M8,
            M8 => M7,
        }
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, SegmentClass::M6 | SegmentClass::M7 | SegmentClass::M8 | SegmentClass::M9)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentMax {
    pub a: f64,
    pub b: f64,
    pub class: SegmentClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxSetDecomposition {
    pub isolated: Vec<IsolatedMax>,
    pub segments: Vec<SegmentMax>,
}

impl MaxSetDecomposition {
    /// Closed components of the max set as `[lo, hi]` intervals, points
    /// included with `lo == hi`, sorted left to right.
    pub fn components(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> =
            self.isolated.iter().map(|p| (p.x, p.x)).chain(self.segments.iter().map(|s| (s.a, s.b))).collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }
}

/// Maximal run of equal signs, spanning knots `start..=end`.
#[derive(Debug, Clone, Copy)]
struct Run {
    sign: Monotonicity,
    start: usize,
    end: usize,
}

fn runs(signs: &[Monotonicity]) -> Vec<Run> {
    let mut out: Vec<Run> = Vec::new();
    for (i, &s) in signs.iter().enumerate() {
        match out.last_mut() {
            Some(r) if r.sign == s => r.end = i + 1,
            _ => out.push(Run { sign: s, start: i, end: i + 1 }),
        }
    }
    out
}

pub fn decompose(profile: &AdvectionProfile) -> MaxSetDecomposition {
    use Monotonicity::*;
    let knots = profile.knots();
    let runs = runs(profile.sign_signature());
    let last = runs.len() - 1;
    let mut isolated = Vec::new();
    let mut segments = Vec::new();

    if runs[0].sign == Decreasing {
        isolated.push(isolated_at(profile, 0, Position::LeftBoundary));
    }
    for (i, r) in runs.iter().enumerate() {
        if r.sign == Constant {
            let before = (i > 0).then(|| runs[i - 1].sign);
            let after = (i < last).then(|| runs[i + 1].sign);
            let class = match (before, after) {
                (Some(Increasing), Some(Increasing)) => SegmentClass::M2,
                (Some(Increasing), Some(Decreasing)) => SegmentClass::M3,
                (Some(Decreasing), Some(Increasing)) => SegmentClass::M4,
                (Some(Decreasing), Some(Decreasing)) => SegmentClass::M5,
                (None, Some(Increasing)) => SegmentClass::M6,
                (None, Some(Decreasing)) => SegmentClass::M7,
                (Some(Increasing), None) => SegmentClass::M8,
                (Some(Decreasing), None) => SegmentClass::M9,
                // Merged runs never put two constant runs side by side, and a
                // single constant run is rejected at build time.
                _ => unreachable!("constant run without monotone neighbour"),
            };
            segments.push(SegmentMax { a: knots[r.start], b: knots[r.end], class });
        } else if i < last && r.sign == Increasing && runs[i + 1].sign == Decreasing {
            isolated.push(isolated_at(profile, r.end, Position::Interior));
        }
    }
    if runs[last].sign == Increasing {
        isolated.push(isolated_at(profile, knots.len() - 1, Position::RightBoundary));
    }
    isolated.sort_by(|a, b| a.x.total_cmp(&b.x));
    MaxSetDecomposition { isolated, segments }
}

/// Decomposition for the periodic problem. Requires `m'(0) > 0`, drops the
/// endpoint, and rejects boundary plateau classes.
pub fn decompose_periodic(profile: &AdvectionProfile) -> Result<MaxSetDecomposition, MaxsetError> {
    let slope = profile.slope(0.0);
    if !(slope > 0.0) {
        return Err(MaxsetError::PreconditionViolated(slope));
    }
    let mut d = decompose(profile);
    if let Some(s) = d.segments.iter().find(|s| s.class.is_boundary()) {
        return Err(MaxsetError::BoundaryClassPresent(s.class));
    }
    d.isolated.retain(|p| p.position == Position::Interior);
    Ok(d)
}

fn zero_tol(values: &[f64]) -> f64 {
    1e-9 * values.iter().fold(1.0f64, |a, v| a.max(v.abs()))
}

fn isolated_at(profile: &AdvectionProfile, knot: usize, position: Position) -> IsolatedMax {
    let x = profile.knots()[knot];
    let (k_star, m_kstar) = match knot_degeneracy(profile, knot, position) {
        Ok((k, v)) => (Some(k), Some(v)),
        Err(_) => (None, None),
    };
    IsolatedMax { x, position, k_star, m_kstar }
}

/// Derivatives of orders `0..=MAX_DEGREE` of one piece at its local `t`.
fn derivatives(profile: &AdvectionProfile, piece: usize, t: f64) -> Vec<f64> {
    let p = &profile.poly().pieces()[piece];
    (0..=MAX_DEGREE).map(|k| p.eval_derivative(t, k)).collect()
}

fn knot_degeneracy(profile: &AdvectionProfile, knot: usize, position: Position) -> Result<(u32, f64), MaxsetError> {
    let x = profile.knots()[knot];
    let poly = profile.poly();
    let d = match position {
        Position::LeftBoundary => derivatives(profile, 0, 0.0),
        Position::RightBoundary => {
            let last = poly.pieces().len() - 1;
            derivatives(profile, last, poly.width(last))
        }
        Position::Interior => {
            let left = derivatives(profile, knot - 1, poly.width(knot - 1));
            let right = derivatives(profile, knot, 0.0);
            let scale: Vec<f64> = left.iter().chain(&right).copied().collect();
            let tol = zero_tol(&scale);
            if left.iter().zip(&right).skip(1).any(|(l, r)| (l - r).abs() > tol) {
                return Err(MaxsetError::AtSegmentJunction(x));
            }
            right
        }
    };
    let tol = zero_tol(&d);
    let first = (1..d.len()).find(|&k| d[k].abs() > tol);
    match first {
        // The profile is not locally constant at an isolated maximum, so some
        // derivative is nonzero.
        None => Err(MaxsetError::NotCritical(x)),
        Some(1) => Err(MaxsetError::NotCritical(x)),
        Some(k) => Ok((k as u32, d[k])),
    }
}

/// Degeneracy order `k*` and `m^{(k*)}(x0)` at an isolated maximum `x0`.
pub fn degeneracy_order(profile: &AdvectionProfile, x0: f64) -> Result<(u32, f64), MaxsetError> {
    let d = decompose(profile);
    let p = d.isolated.iter().find(|p| (p.x - x0).abs() <= 1e-12).ok_or(MaxsetError::NotAMaximum(x0))?;
    let knot = profile.knots().iter().position(|&k| k == p.x).expect("isolated maxima sit on knots");
    knot_degeneracy(profile, knot, p.position)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UnboundedCase {
    #[serde(rename = "i-1")]
    BothEnds,
    #[serde(rename = "i-2")]
    LeftEnd,
    #[serde(rename = "i-3")]
    RightEnd,
}

impl UnboundedCase {
    pub fn tag(self) -> &'static str {
        match self {
            UnboundedCase::BothEnds => "i-1",
            UnboundedCase::LeftEnd => "i-2",
            UnboundedCase::RightEnd => "i-3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Boundedness {
    Bounded,
    Unbounded(UnboundedCase),
}

/// Decides whether the principal eigenvalue stays bounded as `s` grows.
pub fn boundedness(decomp: &MaxSetDecomposition, bc: &Robin) -> Boundedness {
    if !decomp.segments.is_empty() {
        return Boundedness::Bounded;
    }
    let at = |pos: Position| decomp.isolated.iter().any(|p| p.position == pos);
    let only_boundary = decomp.isolated.iter().all(|p| p.position != Position::Interior);
    let only = |pos: Position| decomp.isolated.len() == 1 && decomp.isolated[0].position == pos;
    let (l1, l2) = (bc.ell1 > 0.0, bc.ell2 > 0.0);
    if l1 && l2 && only_boundary && (at(Position::LeftBoundary) || at(Position::RightBoundary)) {
        Boundedness::Unbounded(UnboundedCase::BothEnds)
    } else if l1 && !l2 && only(Position::LeftBoundary) {
        Boundedness::Unbounded(UnboundedCase::LeftEnd)
    } else if !l1 && l2 && only(Position::RightBoundary) {
        Boundedness::Unbounded(UnboundedCase::RightEnd)
    } else {
        Boundedness::Bounded
    }
}
