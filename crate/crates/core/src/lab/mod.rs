//! Numerical experiments on top of the solver: advection ladders, limit
//! estimation, eigenfunction concentration and rescaled local profiles.

mod concentration;
mod estimate;
mod sweep;

use thiserror::Error;

use crate::operator::OperatorError;
use crate::profile::ProfileError;

pub use concentration::{
    limit_ode_ground_state, limit_ode_ground_state_on, limit_potential, mass_distribution, mass_radius,
    plateau_comparison, profile_distance, rescaled_profile, HalfLine, LimitProfile, RescaledProfile,
};
pub use estimate::{estimate_limit, growth_exponent, LimitEstimate};
pub use sweep::{ladder_points, sweep, sweep_point, SweepFailure, SweepRecord};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("need at least {need} records, got {got}")]
    InsufficientData { need: usize, got: usize },
    #[error("growth exponent needs positive eigenvalues, got {0} at s = {1}")]
    NonPositiveLambda(f64, f64),
    #[error("interval [{0}, {1}] is not contained in the grid")]
    IntervalOutOfDomain(f64, f64),
    #[error("local mass {0:e} near the maximum is too small to rescale")]
    MassTooSmall(f64),
    #[error("degeneracy order undefined at {0}")]
    KStarUndefined(f64),
    #[error("ground state does not decay within the truncation (tail ratio {0:e}); increase the window")]
    NoDecay(f64),
    #[error("sample ranges do not overlap")]
    NoOverlap,
    #[error("bad ladder: {0}")]
    BadLadder(String),
    #[error("invalid limit equation: {0}")]
    BadLimitEquation(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}
