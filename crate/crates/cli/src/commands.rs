//! Subcommand bodies.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use driftlab_core::lab::{
    estimate_limit, growth_exponent, mass_radius, rescaled_profile, sweep_point, LimitEstimate, SweepRecord,
};
use driftlab_core::limit::{predict_limit, predict_limit_periodic, LimitPrediction, TermSource};
use driftlab_core::maxset::{decompose, decompose_periodic, MaxSetDecomposition};
use driftlab_core::operator::GridPolicy;
use driftlab_core::profile::{AdvectionProfile, BoundarySpec, Potential};
use driftlab_core::templates::TEMPLATES;
use driftlab_core::Error;

use crate::config::{load_potential, load_profile, out_dir, parse_bc, parse_interval, parse_ladder};
use crate::output::{json, num};
use crate::{CliError, GridArgs, LadderArgs, ProblemArgs};

struct Problem {
    profile: AdvectionProfile,
    c: Potential,
    bc: BoundarySpec,
}

fn problem(args: &ProblemArgs) -> Result<Problem, CliError> {
    let loaded = load_profile(args.template.as_deref(), args.profile.as_deref())?;
    let c = load_potential(args.c.as_deref(), loaded.embedded_c)?;
    let bc = parse_bc(&args.bc)?;
    bc.validate_for(&loaded.profile, &c)?;
    Ok(Problem { profile: loaded.profile, c, bc })
}

impl Problem {
    fn decomposition(&self) -> Result<MaxSetDecomposition, CliError> {
        match self.bc {
            BoundarySpec::Periodic => Ok(decompose_periodic(&self.profile)?),
            BoundarySpec::Robin(_) => Ok(decompose(&self.profile)),
        }
    }

    fn prediction(&self, grid_n: usize) -> Result<LimitPrediction, CliError> {
        match &self.bc {
            BoundarySpec::Periodic => Ok(predict_limit_periodic(&self.profile, &self.c, grid_n)?),
            BoundarySpec::Robin(r) => Ok(predict_limit(&decompose(&self.profile), &self.c, r, grid_n)?),
        }
    }
}

fn policy(g: &GridArgs) -> Result<GridPolicy, CliError> {
    if !(g.grid_factor.is_finite() && g.grid_factor > 0.0) {
        return Err(CliError::Usage("--grid-factor must be positive".into()));
    }
    Ok(GridPolicy { min_n: g.min_n, factor: g.grid_factor, fixed: g.n })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })
}

pub fn classify(args: &ProblemArgs) -> Result<(), CliError> {
    let p = problem(args)?;
    print!("{}", json(&p.decomposition()?));
    Ok(())
}

pub fn predict(args: &ProblemArgs, grid_n: usize) -> Result<(), CliError> {
    let p = problem(args)?;
    print!("{}", json(&p.prediction(grid_n)?));
    Ok(())
}

pub fn solve(args: &ProblemArgs, grid: &GridArgs, s: f64, dump: Option<&Path>) -> Result<(), CliError> {
    let p = problem(args)?;
    let rec = sweep_point(&p.profile, &p.c, &p.bc, s, &policy(grid)?, &[])?;
    if let Some(path) = dump {
        let mut text = String::from("x,w\n");
        for (x, w) in rec.eigenfunction.x.iter().zip(&rec.eigenfunction.w) {
            let _ = writeln!(text, "{},{}", num(*x), num(*w));
        }
        write_file(path, &text)?;
    }
    println!("{}", num(rec.lambda));
    Ok(())
}

type Entry = Result<SweepRecord, (f64, Error)>;

/// Runs the ladder concurrently; results come back in ladder order.
fn run_ladder(p: &Problem, ladder: &[f64], policy: &GridPolicy, intervals: &[(f64, f64)], timing: bool) -> Vec<Entry> {
    ladder
        .par_iter()
        .map(|&s| {
            sweep_point(&p.profile, &p.c, &p.bc, s, policy, intervals)
                .map(|mut r| {
                    if !timing {
                        r.wall_time = 0.0;
                    }
                    r
                })
                .map_err(|e| (s, Error::from(e)))
        })
        .collect()
}

fn sweep_csv(entries: &[Entry], intervals: usize) -> String {
    let mut text = String::from("s,n,lambda");
    for i in 0..intervals {
        let _ = write!(text, ",mass_{i}");
    }
    text.push_str(",wall_time\n");
    for e in entries {
        match e {
            Ok(r) => {
                let _ = write!(text, "{},{},{}", num(r.s), r.n, num(r.lambda));
                for m in &r.mass {
                    let _ = write!(text, ",{}", num(*m));
                }
                let _ = writeln!(text, ",{}", num(r.wall_time));
            }
            Err((s, err)) => {
                let _ = writeln!(text, "{},,error:{}{},", num(*s), err.code(), ",".repeat(intervals));
            }
        }
    }
    text
}

struct Ladder {
    points: Vec<f64>,
    intervals: Vec<(f64, f64)>,
}

fn ladder(args: &LadderArgs) -> Result<Ladder, CliError> {
    Ok(Ladder {
        points: parse_ladder(&args.ladder, args.linear)?,
        intervals: args.mass.iter().map(|m| parse_interval(m)).collect::<Result<_, _>>()?,
    })
}

fn first_failure(entries: Vec<Entry>) -> Result<(), CliError> {
    match entries.into_iter().find_map(Result::err) {
        Some((_, e)) => Err(e.into()),
        None => Ok(()),
    }
}

pub fn sweep(args: &ProblemArgs, grid: &GridArgs, ladder_args: &LadderArgs) -> Result<(), CliError> {
    let p = problem(args)?;
    let l = ladder(ladder_args)?;
    let entries = run_ladder(&p, &l.points, &policy(grid)?, &l.intervals, ladder_args.timing);
    let csv = sweep_csv(&entries, l.intervals.len());
    match out_dir(ladder_args.out.as_deref()) {
        Some(dir) => {
            ensure_dir(&dir)?;
            write_file(&dir.join("sweep.csv"), &csv)?;
        }
        None => print!("{csv}"),
    }
    first_failure(entries)
}

#[derive(Serialize)]
struct LadderPoint {
    s: f64,
    n: usize,
    lambda: f64,
}

#[derive(Serialize)]
struct Failure {
    s: f64,
    code: &'static str,
    message: String,
}

#[derive(Serialize)]
struct Report {
    prediction: LimitPrediction,
    estimate: Option<LimitEstimate>,
    growth_exponent: Option<f64>,
    converged: bool,
    /// Largest `|lambda - prediction|` over the tail half of the ladder.
    max_abs_gap: Option<f64>,
    ladder: Vec<LadderPoint>,
    failures: Vec<Failure>,
    files: Vec<String>,
}

/// Rescaled eigenfunction around the first attaining point that has a
/// degeneracy order, at the largest solved `s`.
fn profile_data(p: &Problem, pred: &LimitPrediction, last: &SweepRecord) -> Result<Option<String>, CliError> {
    let decomp = p.decomposition()?;
    for term in pred.attaining() {
        let TermSource::Isolated { x, .. } = term.source else { continue };
        let Some(point) = decomp.isolated.iter().find(|q| q.x == x && q.k_star.is_some()) else { continue };
        let radius = mass_radius(&decomp, x);
        let Ok(rp) = rescaled_profile(&last.eigenfunction, x, point.k_star, last.s, radius, 4.0, 161) else {
            continue;
        };
        let mut text = String::from("# y W\n");
        for (y, w) in rp.samples {
            let _ = writeln!(text, "{} {}", num(y), num(w));
        }
        return Ok(Some(text));
    }
    Ok(None)
}

pub fn report(
    args: &ProblemArgs,
    grid: &GridArgs,
    ladder_args: &LadderArgs,
    grid_n: usize,
    tol: f64,
) -> Result<(), CliError> {
    let p = problem(args)?;
    let l = ladder(ladder_args)?;
    let prediction = p.prediction(grid_n)?;
    let entries = run_ladder(&p, &l.points, &policy(grid)?, &l.intervals, ladder_args.timing);
    let ok: Vec<&SweepRecord> = entries.iter().filter_map(|e| e.as_ref().ok()).collect();
    let points: Vec<(f64, f64)> = ok.iter().map(|r| (r.s, r.lambda)).collect();
    let estimate = estimate_limit(&points, tol).ok();
    let tail = &points[points.len() - points.len().div_ceil(2)..];
    let max_abs_gap = prediction
        .value()
        .filter(|_| !tail.is_empty())
        .map(|v| tail.iter().map(|q| (q.1 - v).abs()).fold(0.0, f64::max));

    let dir = out_dir(ladder_args.out.as_deref()).unwrap_or_else(|| PathBuf::from("."));
    ensure_dir(&dir)?;
    let mut files = Vec::new();
    let mut lambda_dat = String::from("# s lambda\n");
    for (s, lam) in &points {
        let _ = writeln!(lambda_dat, "{} {}", num(*s), num(*lam));
    }
    write_file(&dir.join("lambda.dat"), &lambda_dat)?;
    files.push("lambda.dat".to_string());
    if let Some(last) = ok.last() {
        if let Some(text) = profile_data(&p, &prediction, last)? {
            write_file(&dir.join("profile.dat"), &text)?;
            files.push("profile.dat".to_string());
        }
    }

    let report = Report {
        converged: estimate.is_some_and(|e| e.converged),
        growth_exponent: growth_exponent(&points).ok(),
        estimate,
        max_abs_gap,
        prediction,
        ladder: ok.iter().map(|r| LadderPoint { s: r.s, n: r.n, lambda: r.lambda }).collect(),
        failures: entries
            .iter()
            .filter_map(|e| e.as_ref().err())
            .map(|(s, e)| Failure { s: *s, code: e.code(), message: e.to_string() })
            .collect(),
        files,
    };
    let text = json(&report);
    write_file(&dir.join("report.json"), &text)?;
    print!("{text}");
    Ok(())
}

pub fn templates() -> Result<(), CliError> {
    for t in TEMPLATES {
        let defaults: Vec<String> = t.defaults.iter().map(|v| num(*v)).collect();
        println!("{:<20} {:<28} defaults [{}]  {}", t.name, t.params, defaults.join(","), t.summary);
    }
    Ok(())
}
