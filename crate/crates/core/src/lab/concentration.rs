use serde::Serialize;

use super::LabError;
use crate::maxset::MaxSetDecomposition;
use crate::operator::{
    assemble_schrodinger, assemble_subinterval, principal_eigen, Closure, EndClosure, GridFunction, SubBC,
};
use crate::profile::Potential;

/// Smallest local mass accepted by [`rescaled_profile`].
pub const MIN_LOCAL_MASS: f64 = 1e-6;
/// Default point count for limit-equation solves.
const ODE_MIN_N: usize = 20_000;
/// Tail-to-peak ratio above which a truncated ground state counts as not
/// decayed.
const DECAY_RATIO: f64 = 1e-3;

/// Running integral of the piecewise-linear interpolant of `w^2`.
struct Cumulative<'a> {
    f: &'a GridFunction,
    cum: Vec<f64>,
}

impl<'a> Cumulative<'a> {
    fn new(f: &'a GridFunction) -> Self {
        let h = f.h();
        let mut cum = Vec::with_capacity(f.w.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for pair in f.w.windows(2) {
            acc += 0.5 * h * (pair[0] * pair[0] + pair[1] * pair[1]);
            cum.push(acc);
        }
        Self { f, cum }
    }

    fn at(&self, x: f64) -> f64 {
        let f = self.f;
        let h = f.h();
        let last = f.x.len() - 1;
        let pos = ((x - f.x[0]) / h).clamp(0.0, last as f64);
        let i = (pos.floor() as usize).min(last - 1);
        let t = pos - i as f64;
        let (g0, g1) = (f.w[i] * f.w[i], f.w[i + 1] * f.w[i + 1]);
        self.cum[i] + h * (g0 * t + 0.5 * (g1 - g0) * t * t)
    }
}

/// Mass of `w^2` on each interval, integrating the piecewise-linear
/// interpolant of the grid values of `w^2`. Over the full grid this is the
/// trapezoid rule.
pub fn mass_distribution(f: &GridFunction, intervals: &[(f64, f64)]) -> Result<Vec<f64>, LabError> {
    let (a, b) = (f.x[0], *f.x.last().unwrap());
    let cum = Cumulative::new(f);
    intervals
        .iter()
        .map(|&(lo, hi)| {
            if !(lo <= hi) || lo < a - 1e-12 || hi > b + 1e-12 {
                return Err(LabError::IntervalOutOfDomain(lo, hi));
            }
            Ok((cum.at(hi) - cum.at(lo)).max(0.0))
        })
        .collect()
}

/// Half the distance from `x0` to the nearest other component of the max
/// set; one when `x0` is the only component.
pub fn mass_radius(decomp: &MaxSetDecomposition, x0: f64) -> f64 {
    let d = decomp
        .components()
        .into_iter()
        .filter(|&(lo, hi)| !(lo <= x0 && x0 <= hi))
        .map(|(lo, hi)| if hi < x0 { x0 - hi } else { lo - x0 })
        .fold(f64::INFINITY, f64::min);
    if d.is_finite() {
        0.5 * d
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HalfLine {
    None,
    /// The problem lives on `y <= 0` (maximum at the right end).
    Left,
    /// The problem lives on `y >= 0` (maximum at the left end).
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RescaledProfile {
    pub x0: f64,
    pub k_star: u32,
    pub s: f64,
    pub local_mass: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Samples `s^{-1/(2k)} w(x0 + s^{-1/k} y) / sqrt(local mass)` for `|y| <= y_max`
/// (one-sided at an end of the grid). The local mass is taken on
/// `|x - x0| <= radius`.
pub fn rescaled_profile(
    f: &GridFunction,
    x0: f64,
    k_star: Option<u32>,
    s: f64,
    radius: f64,
    y_max: f64,
    count: usize,
) -> Result<RescaledProfile, LabError> {
    let k = k_star.ok_or(LabError::KStarUndefined(x0))?;
    let (a, b) = (f.x[0], *f.x.last().unwrap());
    let local_mass = mass_distribution(f, &[((x0 - radius).max(a), (x0 + radius).min(b))])?[0];
    if local_mass < MIN_LOCAL_MASS {
        return Err(LabError::MassTooSmall(local_mass));
    }
    let kf = k as f64;
    let stretch = s.powf(-1.0 / kf);
    let amp = s.powf(-1.0 / (2.0 * kf)) / local_mass.sqrt();
    let (lo, hi) = if x0 <= a {
        (0.0, y_max)
    } else if x0 >= b {
        (-y_max, 0.0)
    } else {
        (-y_max, y_max)
    };
    let count = count.max(2);
    let samples = (0..count)
        .filter_map(|i| {
            let y = lo + (hi - lo) * i as f64 / (count - 1) as f64;
            f.interpolate(x0 + stretch * y).map(|w| (y, (amp * w).max(0.0)))
        })
        .collect();
    Ok(RescaledProfile { x0, k_star: k, s, local_mass, samples })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitProfile {
    pub k_star: u32,
    pub m_kstar: f64,
    pub half_line: HalfLine,
    pub e0: f64,
    pub samples: Vec<(f64, f64)>,
}

impl LimitProfile {
    /// Tabulates a known profile `f` on `[lo, hi]` with zero defect.
    pub fn analytic(
        k_star: u32,
        m_kstar: f64,
        half_line: HalfLine,
        lo: f64,
        hi: f64,
        count: usize,
        f: impl Fn(f64) -> f64,
    ) -> Self {
        let count = count.max(2);
        let samples = (0..count)
            .map(|i| {
                let y = lo + (hi - lo) * i as f64 / (count - 1) as f64;
                (y, f(y))
            })
            .collect();
        Self { k_star, m_kstar, half_line, e0: 0.0, samples }
    }

    /// Piecewise-linear interpolant of the samples.
    pub fn interpolate(&self, y: f64) -> Option<f64> {
        let s = &self.samples;
        let (lo, hi) = (s[0].0, s[s.len() - 1].0);
        if y < lo - 1e-12 || y > hi + 1e-12 {
            return None;
        }
        let i = s.partition_point(|p| p.0 <= y).clamp(1, s.len() - 1);
        let (y0, w0) = s[i - 1];
        let (y1, w1) = s[i];
        let t = if y1 > y0 { ((y - y0) / (y1 - y0)).clamp(0.0, 1.0) } else { 0.0 };
        Some(w0 * (1.0 - t) + w1 * t)
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Potential of the rescaled limit equation at a maximum with degeneracy
/// order `k` and `m^{(k)}(x0) = m_k`:
/// `V(y) = (m_k/(k-1)!)^2 y^{2(k-1)} + (m_k/(k-2)!) y^{k-2}`.
/// Its zero-energy state is `exp(m_k y^k / k!)`.
pub fn limit_potential(m_k: f64, k: u32) -> impl Fn(f64) -> f64 {
    let a = m_k / factorial(k - 1);
    let b = m_k / factorial(k - 2);
    let (p1, p2) = (2 * (k as i32 - 1), k as i32 - 2);
    move |y: f64| a * a * y.powi(p1) + b * y.powi(p2)
}

fn check_equation(m_k: f64, k: u32, half_line: HalfLine) -> Result<(), LabError> {
    if k < 2 {
        return Err(LabError::BadLimitEquation(format!("degeneracy order {k} < 2")));
    }
    if !(m_k != 0.0 && m_k.is_finite()) {
        return Err(LabError::BadLimitEquation("leading derivative must be finite and nonzero".into()));
    }
    // exp(m_k y^k / k!) must decay on the relevant side.
    let ok = match half_line {
        HalfLine::None => k % 2 == 0 && m_k < 0.0,
        HalfLine::Right => m_k < 0.0,
        HalfLine::Left => (if k % 2 == 0 { m_k } else { -m_k }) < 0.0,
    };
    if !ok {
        return Err(LabError::BadLimitEquation(format!(
            "k* = {k}, m = {m_k} has no decaying ground state on this domain"
        )));
    }
    Ok(())
}

/// Ground state of `-W'' + V W` on `[-y_max, y_max]`, or on the half-line
/// window with a Neumann closure at 0.
pub fn limit_ode_ground_state(m_k: f64, k: u32, half_line: HalfLine, y_max: f64) -> Result<LimitProfile, LabError> {
    limit_ode_ground_state_on(m_k, k, half_line, -y_max, y_max, None)
}

/// As [`limit_ode_ground_state`] on an explicit window `[lo, hi]`. For half
/// lines only the far end of the window is used. `n` defaults to a size that
/// resolves the potential at the window ends.
pub fn limit_ode_ground_state_on(
    m_k: f64,
    k: u32,
    half_line: HalfLine,
    lo: f64,
    hi: f64,
    n: Option<usize>,
) -> Result<LimitProfile, LabError> {
    check_equation(m_k, k, half_line)?;
    let (a, b, closure) = match half_line {
        HalfLine::None => (lo, hi, Closure { left: EndClosure::Dirichlet, right: EndClosure::Dirichlet }),
        HalfLine::Left => (lo, 0.0, Closure { left: EndClosure::Dirichlet, right: EndClosure::Robin { sigma: 0.0 } }),
        HalfLine::Right => (0.0, hi, Closure { left: EndClosure::Robin { sigma: 0.0 }, right: EndClosure::Dirichlet }),
    };
    if !(a < b) {
        return Err(LabError::BadLimitEquation(format!("empty window [{a}, {b}]")));
    }
    let v = limit_potential(m_k, k);
    let vmax = v(a).max(v(b)).max(0.0);
    let n = n.unwrap_or_else(|| ODE_MIN_N.max((4.0 * (b - a) * vmax.sqrt()).ceil() as usize));
    let op = assemble_schrodinger(a, b, n, closure, &v)?;
    let pair = principal_eigen(&op)?;
    let f = pair.eigenfunction;

    let peak = f.w.iter().copied().fold(0.0, f64::max);
    let band = 0.1 * (b - a);
    let tail =
        f.x.iter()
            .zip(&f.w)
            .filter(|(&x, _)| {
                (matches!(closure.left, EndClosure::Dirichlet) && x <= a + band)
                    || (matches!(closure.right, EndClosure::Dirichlet) && x >= b - band)
            })
            .map(|(_, &w)| w.abs())
            .fold(0.0, f64::max);
    let ratio = tail / peak;
    if ratio > DECAY_RATIO {
        return Err(LabError::NoDecay(ratio));
    }
    Ok(LimitProfile {
        k_star: k,
        m_kstar: m_k,
        half_line,
        e0: pair.lambda,
        samples: f.x.iter().copied().zip(f.w.iter().copied()).collect(),
    })
}

/// Sup-norm distance between a rescaled profile and a limit profile on their
/// common range.
pub fn profile_distance(a: &RescaledProfile, b: &LimitProfile) -> Result<f64, LabError> {
    let mut best: Option<f64> = None;
    for &(y, w) in &a.samples {
        if let Some(v) = b.interpolate(y) {
            let d = (w - v).abs();
            best = Some(best.map_or(d, |m: f64| m.max(d)));
        }
    }
    best.ok_or(LabError::NoOverlap)
}

/// Sup-norm distance on `[a, b]` between the eigenfunction `f`, renormalized
/// to unit mass on the plateau, and the principal eigenfunction of the
/// plateau problem with the given closures.
pub fn plateau_comparison(
    f: &GridFunction,
    c: &Potential,
    a: f64,
    b: f64,
    left: SubBC,
    right: SubBC,
    n: usize,
) -> Result<f64, LabError> {
    let mass = mass_distribution(f, &[(a, b)])?[0];
    if mass < MIN_LOCAL_MASS {
        return Err(LabError::MassTooSmall(mass));
    }
    let scale = 1.0 / mass.sqrt();
    let phi = principal_eigen(&assemble_subinterval(c, a, b, left, right, n)?)?.eigenfunction;
    let mut sup: f64 = 0.0;
    for (&x, &p) in phi.x.iter().zip(&phi.w) {
        let w = f.interpolate(x).ok_or(LabError::IntervalOutOfDomain(a, b))?;
        sup = sup.max((scale * w - p).abs());
    }
    Ok(sup)
}
