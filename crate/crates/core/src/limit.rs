//! Predicted large-advection limit of the principal eigenvalue.
//!
//! Each component of the max set contributes one candidate value: `c(x)` for
//! an isolated point and a sub-interval principal eigenvalue for a plateau.
//! The prediction is the smallest candidate, or an unbounded verdict when
//! the boundary data push every maximum to a dissipative end.

use serde::Serialize;
use thiserror::Error;

use crate::maxset::{
    boundedness, decompose_periodic, Boundedness, MaxSetDecomposition, MaxsetError, Position, SegmentClass,
    UnboundedCase,
};
use crate::operator::{subinterval_eigenvalue, OperatorError, SubBC, MIN_UNKNOWNS};
use crate::profile::{AdvectionProfile, Potential, Robin};

/// Default sub-interval resolution, in unknowns per unit length.
pub const DEFAULT_GRID_N: usize = 4000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitError {
    #[error(transparent)]
    Maxset(#[from] MaxsetError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TermSource {
    Isolated { x: f64, position: Position },
    Segment { a: f64, b: f64, class: SegmentClass },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TermKind {
    #[serde(rename = "c_at_point")]
    CAtPoint,
    ND,
    NN,
    DD,
    DN,
    RD,
    RN,
    NR,
    DR,
}

impl TermKind {
    pub fn for_class(class: SegmentClass) -> Self {
        match class {
            SegmentClass::M2 => TermKind::ND,
            SegmentClass::M3 => TermKind::NN,
            SegmentClass::M4 => TermKind::DD,
            SegmentClass::M5 => TermKind::DN,
            SegmentClass::M6 => TermKind::RD,
            SegmentClass::M7 => TermKind::RN,
            SegmentClass::M8 => TermKind::NR,
            SegmentClass::M9 => TermKind::DR,
        }
    }

    /// Kinds entering the plateau minimum used by both limit formulas.
    pub fn is_interior_plateau(self) -> bool {
        matches!(self, TermKind::ND | TermKind::NN | TermKind::DD | TermKind::DN)
    }

    fn closures(self, bc: Option<&Robin>) -> (SubBC, SubBC) {
        let left_r = bc.map(|b| SubBC::R { hbar: b.hbar1, ell: b.ell1 }).unwrap_or(SubBC::N);
        let right_r = bc.map(|b| SubBC::R { hbar: b.hbar2, ell: b.ell2 }).unwrap_or(SubBC::N);
        match self {
            TermKind::ND => (SubBC::N, SubBC::D),
            TermKind::NN => (SubBC::N, SubBC::N),
            TermKind::DD => (SubBC::D, SubBC::D),
            TermKind::DN => (SubBC::D, SubBC::N),
            TermKind::RD => (left_r, SubBC::D),
            TermKind::RN => (left_r, SubBC::N),
            TermKind::NR => (SubBC::N, right_r),
            TermKind::DR => (SubBC::D, right_r),
            TermKind::CAtPoint => unreachable!("point terms have no closures"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitTerm {
    pub source: TermSource,
    pub kind: TermKind,
    pub value: f64,
    /// Estimated discretization error of `value` (zero for point terms).
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum LimitPrediction {
    Finite { value: f64, error: f64, terms: Vec<LimitTerm>, argmin: Vec<usize> },
    Unbounded { case: UnboundedCase },
}

impl LimitPrediction {
    pub fn value(&self) -> Option<f64> {
        match self {
            LimitPrediction::Finite { value, .. } => Some(*value),
            LimitPrediction::Unbounded { .. } => None,
        }
    }

    /// Terms attaining the minimum.
    pub fn attaining(&self) -> Vec<&LimitTerm> {
        match self {
            LimitPrediction::Finite { terms, argmin, .. } => argmin.iter().map(|&i| &terms[i]).collect(),
            LimitPrediction::Unbounded { .. } => Vec::new(),
        }
    }
}

/// Principal eigenvalue of a plateau problem with a Richardson-style error
/// estimate from the half-resolution solve.
fn plateau_term(
    c: &Potential,
    a: f64,
    b: f64,
    class: SegmentClass,
    bc: Option<&Robin>,
    grid_n: usize,
) -> Result<LimitTerm, LimitError> {
    let kind = TermKind::for_class(class);
    let (left, right) = kind.closures(bc);
    let n = ((grid_n as f64 * (b - a)).ceil() as usize).max(2 * MIN_UNKNOWNS);
    let fine = subinterval_eigenvalue(c, a, b, left, right, n)?;
    let coarse = subinterval_eigenvalue(c, a, b, left, right, n / 2)?;
    Ok(LimitTerm { source: TermSource::Segment { a, b, class }, kind, value: fine, error: (fine - coarse).abs() / 3.0 })
}

fn point_term(c: &Potential, x: f64, position: Position) -> LimitTerm {
    LimitTerm { source: TermSource::Isolated { x, position }, kind: TermKind::CAtPoint, value: c.at(x), error: 0.0 }
}

/// Minimum of the interior plateau eigenvalues, `+inf` when there are none.
pub fn frak_l(decomp: &MaxSetDecomposition, c: &Potential, grid_n: usize) -> Result<f64, LimitError> {
    let mut best = f64::INFINITY;
    for s in &decomp.segments {
        if TermKind::for_class(s.class).is_interior_plateau() {
            best = best.min(plateau_term(c, s.a, s.b, s.class, None, grid_n)?.value);
        }
    }
    Ok(best)
}

fn finish(terms: Vec<LimitTerm>) -> LimitPrediction {
    let value = terms.iter().map(|t| t.value).fold(f64::INFINITY, f64::min);
    let best_err = terms.iter().filter(|t| t.value == value).map(|t| t.error).fold(0.0, f64::max);
    let argmin: Vec<usize> = terms
        .iter()
        .enumerate()
        .filter(|(_, t)| t.value - value <= 1e-9 * (1.0 + value.abs()) + t.error.max(best_err))
        .map(|(i, _)| i)
        .collect();
    let error = argmin.iter().map(|&i| terms[i].error).fold(0.0, f64::max);
    LimitPrediction::Finite { value, error, terms, argmin }
}

/// Prediction for Robin boundary data.
pub fn predict_limit(
    decomp: &MaxSetDecomposition,
    c: &Potential,
    bc: &Robin,
    grid_n: usize,
) -> Result<LimitPrediction, LimitError> {
    if let Boundedness::Unbounded(case) = boundedness(decomp, bc) {
        return Ok(LimitPrediction::Unbounded { case });
    }
    let mut terms = Vec::new();
    for p in &decomp.isolated {
        let admissible = match p.position {
            Position::Interior => true,
            Position::LeftBoundary => bc.ell1 == 0.0,
            Position::RightBoundary => bc.ell2 == 0.0,
        };
        if admissible {
            terms.push(point_term(c, p.x, p.position));
        }
    }
    for s in &decomp.segments {
        terms.push(plateau_term(c, s.a, s.b, s.class, Some(bc), grid_n)?);
    }
    // Bounded verdicts always keep at least one term: an interior point, a
    // plateau, or a boundary point whose end is Neumann.
    debug_assert!(!terms.is_empty());
    Ok(finish(terms))
}

/// Prediction for the periodic problem. Requires `m'(0) > 0`.
pub fn predict_limit_periodic(
    profile: &AdvectionProfile,
    c: &Potential,
    grid_n: usize,
) -> Result<LimitPrediction, LimitError> {
    let decomp = decompose_periodic(profile)?;
    let mut terms: Vec<LimitTerm> = decomp.isolated.iter().map(|p| point_term(c, p.x, p.position)).collect();
    for s in &decomp.segments {
        terms.push(plateau_term(c, s.a, s.b, s.class, None, grid_n)?);
    }
    Ok(finish(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxset::decompose;
    use crate::profile::build_profile;
    use crate::templates::builtin;
    use std::f64::consts::PI;

    fn decomp(name: &str, p: &[f64]) -> MaxSetDecomposition {
        decompose(&build_profile(builtin(name, p).unwrap()).unwrap())
    }

    #[test]
    fn t2_plateau_minimum() {
        let d = decomp("t2", &[0.1, 0.2, 0.4, 0.5, 0.7, 0.85]);
        let v = frak_l(&d, &Potential::zero(), DEFAULT_GRID_N).unwrap();
        let want = (PI / 0.4).powi(2);
        assert!((v / want - 1.0).abs() < 1e-5, "{v}");
        let shifted = frak_l(&d, &Potential::constant(1.5), DEFAULT_GRID_N).unwrap();
        assert!((shifted - v - 1.5).abs() < 1e-8);
        assert_eq!(frak_l(&decomp("vee", &[0.5]), &Potential::zero(), 100).unwrap(), f64::INFINITY);
    }

    #[test]
    fn example1_neumann() {
        let d = decomp("example1", &[0.2, 0.4, 0.6, 0.8]);
        let c = Potential::polynomial(vec![0.0, 1.0]).unwrap();
        let p = predict_limit(&d, &c, &Robin::neumann(), DEFAULT_GRID_N).unwrap();
        let LimitPrediction::Finite { value, terms, argmin, .. } = &p else { panic!("{p:?}") };
        assert_eq!(*value, 0.0);
        assert_eq!(terms.len(), 3);
        assert_eq!(argmin.len(), 1);
        assert_eq!(terms[argmin[0]].source, TermSource::Isolated { x: 0.0, position: Position::LeftBoundary });
    }

    #[test]
    fn example3_robin_right() {
        let d = decomp("example3", &[0.3, 0.7]);
        let bc = Robin::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let p = predict_limit(&d, &Potential::zero(), &bc, DEFAULT_GRID_N).unwrap();
        let LimitPrediction::Finite { value, terms, .. } = &p else { panic!("{p:?}") };
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].kind, TermKind::ND);
        assert!((value / (PI / 0.8).powi(2) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn unbounded_vee() {
        let d = decomp("vee", &[0.5]);
        let bc = Robin::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(
            predict_limit(&d, &Potential::zero(), &bc, 100).unwrap(),
            LimitPrediction::Unbounded { case: UnboundedCase::BothEnds }
        );
    }

    #[test]
    fn periodic_bump_prediction() {
        let m = build_profile(builtin("periodic_bump", &[]).unwrap()).unwrap();
        let c = Potential::polynomial(vec![0.55, -1.0, 1.0]).unwrap();
        let p = predict_limit_periodic(&m, &c, DEFAULT_GRID_N).unwrap();
        assert!((p.value().unwrap() - 0.3).abs() < 1e-12);
    }
}
