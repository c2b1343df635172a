//! Builtin profile templates.
//!
//! Monotone pieces that meet a constant piece (or another monotone piece) use
//! the quintic ramp `10t^3 - 15t^4 + 6t^5`, whose first and second
//! derivatives vanish at both ends, so gluing is C² by construction.

use thiserror::Error;

use crate::poly::Poly;
use crate::profile::{Monotonicity, ProfileSpec, SegmentSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TemplateError {
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("bad parameters for `{name}`: {reason}")]
    BadParams { name: String, reason: String },
}

pub struct TemplateInfo {
    pub name: &'static str,
    pub params: &'static str,
    pub defaults: &'static [f64],
    pub summary: &'static str,
}

pub const TEMPLATES: &[TemplateInfo] = &[
    TemplateInfo {
        name: "example1",
        params: "x1,x2,x3,x4",
        defaults: &[0.2, 0.4, 0.6, 0.8],
        summary: "down, up, plateau, down, up",
    },
    TemplateInfo { name: "example2", params: "x1,x2", defaults: &[0.3, 0.7], summary: "down, plateau, up" },
    TemplateInfo { name: "example3", params: "x1,x2", defaults: &[0.3, 0.7], summary: "up, plateau, up" },
    TemplateInfo {
        name: "t1",
        params: "a1,a2,a3,a4,a5",
        defaults: &[0.15, 0.3, 0.45, 0.6, 0.8],
        summary: "up, down, up, plateau, down, up",
    },
    TemplateInfo {
        name: "t2",
        params: "a1,a2,a3,a4,a5,a6",
        defaults: &[0.1, 0.2, 0.4, 0.5, 0.7, 0.85],
        summary: "up, down, plateau, up, plateau, up, plateau",
    },
    TemplateInfo { name: "monotone_increasing", params: "", defaults: &[], summary: "m(x) = x" },
    TemplateInfo { name: "vee", params: "x0", defaults: &[0.5], summary: "m(x) = (x - x0)^2" },
    TemplateInfo {
        name: "power_max",
        params: "x0,k[,r]",
        defaults: &[0.5, 2.0],
        summary: "m = -|x - x0|^k near x0 with quadratic monotone tails",
    },
    TemplateInfo {
        name: "power_well",
        params: "x0,nu[,scale]",
        defaults: &[0.5, 2.0],
        summary: "m = scale |x - x0|^(nu+2) / (nu+2), so |m'| = scale |x - x0|^(nu+1)",
    },
    TemplateInfo {
        name: "periodic_bump",
        params: "",
        defaults: &[],
        summary: "periodic profile, m'(0) > 0, single interior maximum at 0.5",
    },
];

/// Spec for template `name`; empty `params` selects the defaults.
pub fn builtin(name: &str, params: &[f64]) -> Result<ProfileSpec, TemplateError> {
    let info =
        TEMPLATES.iter().find(|t| t.name == name).ok_or_else(|| TemplateError::UnknownTemplate(name.to_string()))?;
    let p: &[f64] = if params.is_empty() { info.defaults } else { params };
    let bad = |reason: &str| TemplateError::BadParams { name: name.to_string(), reason: reason.to_string() };
    if p.iter().any(|v| !v.is_finite()) {
        return Err(bad("parameters must be finite"));
    }
    match name {
        "example1" => {
            let x = interior_points(p, 4).map_err(bad)?;
            Ok(ramps(&x, &[-0.5, 0.4, 0.0, -0.4, 0.5]))
        }
        "example2" => {
            let x = interior_points(p, 2).map_err(bad)?;
            Ok(ramps(&x, &[-0.5, 0.0, 0.5]))
        }
        "example3" => {
            let x = interior_points(p, 2).map_err(bad)?;
            Ok(ramps(&x, &[0.4, 0.0, 0.4]))
        }
        "t1" => {
            let a = interior_points(p, 5).map_err(bad)?;
            Ok(ramps(&a, &[0.5, -0.4, 0.3, 0.0, -0.3, 0.5]))
        }
        "t2" => {
            let a = interior_points(p, 6).map_err(bad)?;
            Ok(ramps(&a, &[0.5, -0.4, 0.0, 0.3, 0.0, 0.3, 0.0]))
        }
        "monotone_increasing" => {
            expect_len(p, 0, 0).map_err(bad)?;
            Ok(ProfileSpec {
                knots: vec![0.0, 1.0],
                segments: vec![SegmentSpec { coeffs: vec![0.0, 1.0], sign: Monotonicity::Increasing }],
            })
        }
        "vee" => {
            expect_len(p, 1, 1).map_err(bad)?;
            let x0 = p[0];
            if !(x0 > 0.0 && x0 < 1.0) {
                return Err(bad("x0 must lie in (0,1)"));
            }
            Ok(ProfileSpec {
                knots: vec![0.0, x0, 1.0],
                segments: vec![
                    SegmentSpec { coeffs: vec![x0 * x0, -2.0 * x0, 1.0], sign: Monotonicity::Decreasing },
                    SegmentSpec { coeffs: vec![0.0, 0.0, 1.0], sign: Monotonicity::Increasing },
                ],
            })
        }
        "power_max" => power_max(p).map_err(bad),
        "power_well" => power_well(p).map_err(bad),
        "periodic_bump" => {
            expect_len(p, 0, 0).map_err(bad)?;
            Ok(periodic_bump())
        }
        _ => unreachable!("template table and dispatch disagree"),
    }
}

fn expect_len(p: &[f64], lo: usize, hi: usize) -> Result<(), &'static str> {
    if p.len() < lo || p.len() > hi {
        Err("wrong number of parameters")
    } else {
        Ok(())
    }
}

fn interior_points(p: &[f64], count: usize) -> Result<Vec<f64>, &'static str> {
    expect_len(p, count, count)?;
    let mut knots = Vec::with_capacity(count + 2);
    knots.push(0.0);
    knots.extend_from_slice(p);
    knots.push(1.0);
    if knots.windows(2).any(|w| !(w[1] - w[0] >= 1e-3)) {
        return Err("breakpoints must be strictly ascending inside (0,1) and at least 1e-3 apart");
    }
    Ok(knots)
}

/// Quintic ramp on a piece of width `w`, from `start` to `start + delta`.
pub fn quintic_ramp(start: f64, delta: f64, w: f64) -> Vec<f64> {
    vec![start, 0.0, 0.0, 10.0 * delta / w.powi(3), -15.0 * delta / w.powi(4), 6.0 * delta / w.powi(5)]
}

/// Profile through `knots` whose i-th piece changes `m` by `deltas[i]`.
fn ramps(knots: &[f64], deltas: &[f64]) -> ProfileSpec {
    let mut level = 0.0;
    let mut segments = Vec::with_capacity(deltas.len());
    for (i, &d) in deltas.iter().enumerate() {
        let w = knots[i + 1] - knots[i];
        let seg = if d == 0.0 {
            SegmentSpec { coeffs: vec![level], sign: Monotonicity::Constant }
        } else {
            let sign = if d > 0.0 { Monotonicity::Increasing } else { Monotonicity::Decreasing };
            SegmentSpec { coeffs: quintic_ramp(level, d, w), sign }
        };
        // Re-evaluate rather than add so the next piece starts exactly where
        // this one ends in floating point.
        level = Poly::new(seg.coeffs.clone()).eval(w);
        segments.push(seg);
    }
    ProfileSpec { knots: knots.to_vec(), segments }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients of `scale * (t - shift)^k` in `t`.
fn shifted_power(k: usize, shift: f64, scale: f64) -> Vec<f64> {
    (0..=k).map(|j| scale * binomial(k, j) * (-shift).powi((k - j) as i32)).collect()
}

/// Quadratic Taylor polynomial of `f` at the right end (`at_right`) or left end
/// of a tail piece of width `w`, given `(f, f', f'')` at that end.
fn quadratic_tail(w: f64, at_right: bool, f: [f64; 3]) -> Vec<f64> {
    let t0 = if at_right { w } else { 0.0 };
    // f + f' (t - t0) + f''/2 (t - t0)^2
    vec![f[0] - f[1] * t0 + 0.5 * f[2] * t0 * t0, f[1] - f[2] * t0, 0.5 * f[2]]
}

fn power_max(p: &[f64]) -> Result<ProfileSpec, &'static str> {
    expect_len(p, 2, 3)?;
    let x0 = p[0];
    if !(0.0..=1.0).contains(&x0) {
        return Err("x0 must lie in [0,1]");
    }
    if p[1].fract() != 0.0 || p[1] < 2.0 || p[1] > 8.0 {
        return Err("k must be an integer in [2,8]");
    }
    let k = p[1] as usize;
    let interior = x0 > 0.0 && x0 < 1.0;
    if interior && k % 2 == 1 {
        return Err("an interior maximum inside one polynomial piece needs even k");
    }
    let room = if interior { x0.min(1.0 - x0) } else { 1.0 };
    let r = match p.get(2) {
        Some(&r) => r,
        None => 0.2f64.min(0.5 * room),
    };
    if !(r > 0.0 && r < room) {
        return Err("r must lie in (0, distance from x0 to the nearest other boundary)");
    }
    // Central function f(x) = -|x - x0|^k. On the right of x0 it is -(x-x0)^k;
    // on the left it is -(x0-x)^k = -(-1)^k (x-x0)^k.
    let kf = k as f64;
    let at = |d: f64| -> [f64; 3] {
        // derivatives of -|d|^k with respect to x where d = x - x0
        let a = d.abs();
        let sgn = d.signum();
        [-a.powi(k as i32), -kf * sgn * a.powi(k as i32 - 1), -kf * (kf - 1.0) * a.powi(k as i32 - 2)]
    };
    let left_sign = if k % 2 == 0 { -1.0 } else { 1.0 };
    let mut knots = vec![0.0];
    let mut segments = Vec::new();
    if x0 > 0.0 {
        let xl = x0 - r;
        if xl > 0.0 {
            knots.push(xl);
            segments.push(SegmentSpec { coeffs: quadratic_tail(xl, true, at(-r)), sign: Monotonicity::Increasing });
        }
        knots.push(x0);
        // left central piece in t = x - xl: f = left_sign (t - r)^k
        segments.push(SegmentSpec { coeffs: shifted_power(k, r.min(x0), left_sign), sign: Monotonicity::Increasing });
    }
    if x0 < 1.0 {
        let xr = x0 + r;
        let right_end = xr.min(1.0);
        knots.push(right_end);
        let mut c = vec![0.0; k + 1];
        c[k] = -1.0;
        segments.push(SegmentSpec { coeffs: c, sign: Monotonicity::Decreasing });
        if xr < 1.0 {
            knots.push(1.0);
            segments
                .push(SegmentSpec { coeffs: quadratic_tail(1.0 - xr, false, at(r)), sign: Monotonicity::Decreasing });
        }
    }
    Ok(ProfileSpec { knots, segments })
}

fn power_well(p: &[f64]) -> Result<ProfileSpec, &'static str> {
    expect_len(p, 2, 3)?;
    let x0 = p[0];
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err("x0 must lie in (0,1)");
    }
    if p[1].fract() != 0.0 || p[1] < 0.0 || p[1] > 6.0 {
        return Err("nu must be an integer in [0,6]");
    }
    let scale = p.get(2).copied().unwrap_or(1.0);
    if !(scale > 0.0) {
        return Err("scale must be positive");
    }
    let e = p[1] as usize + 2;
    let a = scale / e as f64;
    // left piece in t = x: a (x0 - t)^e = a (-1)^e (t - x0)^e
    let left_scale = if e % 2 == 0 { a } else { -a };
    let mut right = vec![0.0; e + 1];
    right[e] = a;
    Ok(ProfileSpec {
        knots: vec![0.0, x0, 1.0],
        segments: vec![
            SegmentSpec { coeffs: shifted_power(e, x0, left_scale), sign: Monotonicity::Decreasing },
            SegmentSpec { coeffs: right, sign: Monotonicity::Increasing },
        ],
    })
}

/// Quintic with prescribed value, slope and curvature at both ends of [0,w].
pub fn hermite5(w: f64, left: [f64; 3], right: [f64; 3]) -> Vec<f64> {
    let (c0, c1, c2) = (left[0], left[1], 0.5 * left[2]);
    // Remaining c3 t^3 + c4 t^4 + c5 t^5 matches the residual at t = w.
    let r0 = right[0] - (c0 + c1 * w + c2 * w * w);
    let r1 = right[1] - (c1 + 2.0 * c2 * w);
    let r2 = right[2] - 2.0 * c2;
    let (w2, w3) = (w * w, w * w * w);
    let c3 = (20.0 * r0 - 8.0 * r1 * w + r2 * w2) / (2.0 * w3);
    let c4 = (-30.0 * r0 + 14.0 * r1 * w - 2.0 * r2 * w2) / (2.0 * w3 * w);
    let c5 = (12.0 * r0 - 6.0 * r1 * w + r2 * w2) / (2.0 * w3 * w2);
    vec![c0, c1, c2, c3, c4, c5]
}

fn periodic_bump() -> ProfileSpec {
    let start = [0.0, 1.0, 0.0];
    let peak = [0.4, 0.0, -8.0];
    let trough = [-0.2, 0.0, 10.0];
    ProfileSpec {
        knots: vec![0.0, 0.5, 0.85, 1.0],
        segments: vec![
            SegmentSpec { coeffs: hermite5(0.5, start, peak), sign: Monotonicity::Increasing },
            SegmentSpec { coeffs: hermite5(0.35, peak, trough), sign: Monotonicity::Decreasing },
            SegmentSpec { coeffs: hermite5(0.15, trough, start), sign: Monotonicity::Increasing },
        ],
    }
}
