//! Crate-wide error type with stable machine-readable codes.

use thiserror::Error;

use crate::lab::LabError;
use crate::limit::LimitError;
use crate::maxset::MaxsetError;
use crate::operator::OperatorError;
use crate::profile::ProfileError;
use crate::spectral::SpectralError;
use crate::templates::TemplateError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Maxset(#[from] MaxsetError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Lab(#[from] LabError),
}

impl From<LimitError> for Error {
    fn from(e: LimitError) -> Self {
        match e {
            LimitError::Maxset(e) => Error::Maxset(e),
            LimitError::Operator(e) => Error::Operator(e),
        }
    }
}

fn profile_code(e: &ProfileError) -> &'static str {
    match e {
        ProfileError::MalformedSpec(_) => "MalformedSpec",
        ProfileError::NotC2 { .. } => "NotC2",
        ProfileError::SignMismatch { .. } => "SignMismatch",
        ProfileError::GloballyConstant => "GloballyConstant",
        ProfileError::OutOfDomain(_) => "OutOfDomain",
        ProfileError::Discontinuous { .. } => "Discontinuous",
        ProfileError::NotPeriodic(_) => "NotPeriodic",
        ProfileError::InvalidBoundary(_) => "InvalidBoundary",
    }
}

fn spectral_code(e: &SpectralError) -> &'static str {
    match e {
        SpectralError::NoConvergence { .. } => "NoConvergence",
        SpectralError::NonFinite => "NonFinite",
        SpectralError::Shape(_) => "Shape",
    }
}

fn operator_code(e: &OperatorError) -> &'static str {
    match e {
        OperatorError::GridTooCoarse { .. } => "GridTooCoarse",
        OperatorError::GridTooSmall { .. } => "GridTooSmall",
        OperatorError::InvalidClosure(_) => "InvalidClosure",
        OperatorError::BoundViolated { .. } => "BoundViolated",
        OperatorError::Profile(p) => profile_code(p),
        OperatorError::Spectral(s) => spectral_code(s),
    }
}

impl Error {
    /// Stable identifier suitable for scripts, e.g. `MalformedSpec`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Profile(e) => profile_code(e),
            Error::Template(TemplateError::UnknownTemplate(_)) => "UnknownTemplate",
            Error::Template(TemplateError::BadParams { .. }) => "BadParams",
            Error::Maxset(e) => match e {
                MaxsetError::NotAMaximum(_) => "NotAMaximum",
                MaxsetError::AtSegmentJunction(_) => "AtSegmentJunction",
                MaxsetError::NotCritical(_) => "NotCritical",
                MaxsetError::PreconditionViolated(_) => "PreconditionViolated",
                MaxsetError::BoundaryClassPresent(_) => "BoundaryClassPresent",
            },
            Error::Spectral(e) => spectral_code(e),
            Error::Operator(e) => operator_code(e),
            Error::Lab(e) => match e {
                LabError::InsufficientData { .. } => "InsufficientData",
                LabError::NonPositiveLambda(..) => "NonPositiveLambda",
                LabError::IntervalOutOfDomain(..) => "IntervalOutOfDomain",
                LabError::MassTooSmall(_) => "MassTooSmall",
                LabError::KStarUndefined(_) => "KStarUndefined",
                LabError::NoDecay(_) => "NoDecay",
                LabError::NoOverlap => "NoOverlap",
                LabError::BadLadder(_) => "BadLadder",
                LabError::BadLimitEquation(_) => "BadLimitEquation",
                LabError::Operator(o) => operator_code(o),
                LabError::Profile(p) => profile_code(p),
            },
        }
    }

    /// True for errors caused by invalid input rather than by a numerical
    /// failure.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self.code(),
            "NoConvergence" | "NonFinite" | "GridTooCoarse" | "BoundViolated" | "NoDecay" | "MassTooSmall"
        )
    }
}
