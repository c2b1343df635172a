use std::time::Instant;

use serde::Serialize;

use super::concentration::mass_distribution;
use super::LabError;
use crate::operator::{assemble_periodic, assemble_transformed, principal_eigen, GridFunction, GridPolicy};
use crate::profile::{AdvectionProfile, BoundarySpec, Potential};

/// One solve along an advection ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub s: f64,
    pub n: usize,
    pub lambda: f64,
    pub residual: f64,
    /// Mass of `w^2` on each requested interval.
    pub mass: Vec<f64>,
    /// Mass over the whole grid; one up to rounding.
    pub total_mass: f64,
    /// Location of the largest grid value of `w`.
    pub peak_x: f64,
    pub wall_time: f64,
    #[serde(skip)]
    pub eigenfunction: GridFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub s: f64,
    pub error: LabError,
}

/// Ladder of `count` points from `start` to `stop`, geometric or linear.
pub fn ladder_points(start: f64, stop: f64, count: usize, geometric: bool) -> Result<Vec<f64>, LabError> {
    if count == 0 {
        return Err(LabError::BadLadder("count must be positive".into()));
    }
    if !(start.is_finite() && stop.is_finite() && start >= 0.0) {
        return Err(LabError::BadLadder("endpoints must be finite and nonnegative".into()));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    if !(stop > start) {
        return Err(LabError::BadLadder("stop must exceed start".into()));
    }
    if geometric && start == 0.0 {
        return Err(LabError::BadLadder("geometric ladder needs a positive start".into()));
    }
    let last = (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            let t = i as f64 / last;
            if i + 1 == count {
                stop
            } else if geometric {
                round12(start * (stop / start).powf(t))
            } else {
                round12(start + (stop - start) * t)
            }
        })
        .collect())
}

/// Rounds to 12 significant digits so ladders like 25, 50, 100 come out
/// exact.
fn round12(v: f64) -> f64 {
    format!("{v:.11e}").parse().unwrap_or(v)
}

/// Solves the full problem at a single advection strength.
pub fn sweep_point(
    profile: &AdvectionProfile,
    c: &Potential,
    bc: &BoundarySpec,
    s: f64,
    policy: &GridPolicy,
    intervals: &[(f64, f64)],
) -> Result<SweepRecord, LabError> {
    let start = Instant::now();
    let n = policy.n_for(s, profile.max_abs_slope(), 1.0);
    let op = match bc {
        BoundarySpec::Robin(r) => assemble_transformed(profile, c, r, s, n)?,
        BoundarySpec::Periodic => assemble_periodic(profile, c, s, n)?,
    };
    let pair = principal_eigen(&op)?;
    let f = pair.eigenfunction;
    let mass = mass_distribution(&f, intervals)?;
    let total_mass = f.trapezoid(|v| v * v);
    let peak =
        f.w.iter().enumerate().fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    Ok(SweepRecord {
        s,
        n,
        lambda: pair.lambda,
        residual: pair.residual,
        mass,
        total_mass,
        peak_x: f.x[peak.0],
        wall_time: start.elapsed().as_secs_f64(),
        eigenfunction: f,
    })
}

/// Sequential ladder run; one entry per ladder point, in ladder order.
pub fn sweep(
    profile: &AdvectionProfile,
    c: &Potential,
    bc: &BoundarySpec,
    ladder: &[f64],
    policy: &GridPolicy,
    intervals: &[(f64, f64)],
) -> Result<Vec<Result<SweepRecord, SweepFailure>>, LabError> {
    check_ladder(ladder)?;
    Ok(ladder
        .iter()
        .map(|&s| sweep_point(profile, c, bc, s, policy, intervals).map_err(|error| SweepFailure { s, error }))
        .collect())
}

pub(crate) fn check_ladder(ladder: &[f64]) -> Result<(), LabError> {
    if ladder.is_empty() {
        return Err(LabError::BadLadder("empty ladder".into()));
    }
    if ladder.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(LabError::BadLadder("entries must be finite and nonnegative".into()));
    }
    if ladder.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(LabError::BadLadder("entries must be strictly ascending".into()));
    }
    Ok(())
}
