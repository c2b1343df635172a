//! Acceptance checks with pinned tolerances. Prints one line per criterion
//! and exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

use driftlab_core::lab::{
    growth_exponent, limit_ode_ground_state, mass_distribution, mass_radius, plateau_comparison, profile_distance,
    rescaled_profile, sweep_point, HalfLine, LimitProfile,
};
use driftlab_core::limit::{
    predict_limit, predict_limit_periodic, LimitPrediction, TermKind, TermSource, DEFAULT_GRID_N,
};
use driftlab_core::maxset::{decompose, decompose_periodic};
use driftlab_core::operator::{assemble_transformed, subinterval_eigenvalue, GridPolicy, SubBC};
use driftlab_core::profile::{build_profile, AdvectionProfile, BoundarySpec, Potential, Robin};
use driftlab_core::spectral::{smallest_eig, SymTridiag, DEFAULT_TOL};
use driftlab_core::templates::builtin;
use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn profile(name: &str, p: &[f64]) -> AdvectionProfile {
    build_profile(builtin(name, p).expect("template")).expect("profile")
}

fn poly(c: &[f64]) -> Potential {
    Potential::polynomial(c.to_vec()).expect("potential")
}

fn neumann() -> BoundarySpec {
    BoundarySpec::Robin(Robin::neumann())
}

fn lambda_at(m: &AdvectionProfile, c: &Potential, bc: &BoundarySpec, s: f64) -> f64 {
    sweep_point(m, c, bc, s, &GridPolicy::default(), &[]).expect("solve").lambda
}

fn flag(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn analytic_oracles() -> Outcome {
    let n = 2000;
    let zero = Potential::zero();
    let dd = subinterval_eigenvalue(&zero, 0.0, 1.0, SubBC::D, SubBC::D, n).unwrap();
    let nd = subinterval_eigenvalue(&zero, 0.4, 0.6, SubBC::N, SubBC::D, n).unwrap();
    let nn = subinterval_eigenvalue(&zero, 0.3, 0.8, SubBC::N, SubBC::N, n).unwrap();
    let e_dd = (dd - PI * PI).abs() / (PI * PI);
    let want_nd = (PI / 0.4).powi(2);
    let e_nd = (nd - want_nd).abs() / want_nd;
    // Relative error against zero is read as an absolute error.
    let e_nn = nn.abs();
    let ok = e_dd <= 1e-5 && e_nd <= 1e-5 && e_nn <= 1e-5;
    outcome(ok, format!("DD rel {e_dd:.2e}, ND rel {e_nd:.2e}, NN abs {e_nn:.2e} (tol 1e-5)"))
}

/// Shared protocol for the t1 and t2 limit checks: prediction terms
/// separated by at least 0.2, the s = 400 gap within 0.02 and at most half
/// the s = 100 gap.
fn reproduction(name: &str, c: &Potential) -> (bool, String, LimitPrediction, AdvectionProfile, f64) {
    let m = profile(name, &[]);
    let pred = predict_limit(&decompose(&m), c, &Robin::neumann(), DEFAULT_GRID_N).unwrap();
    let LimitPrediction::Finite { value, ref terms, ref argmin, .. } = pred else {
        return (false, "prediction unbounded".into(), pred, m, 0.0);
    };
    let mut vals: Vec<f64> = terms.iter().map(|t| t.value).collect();
    vals.sort_by(f64::total_cmp);
    let sep = vals.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let g100 = (lambda_at(&m, c, &neumann(), 100.0) - value).abs();
    let g400 = (lambda_at(&m, c, &neumann(), 400.0) - value).abs();
    let ok = sep >= 0.2 && argmin.len() == 1 && g400 <= 0.02 && g400 <= 0.5 * g100;
    let kinds: Vec<String> = terms.iter().map(|t| format!("{:?}={:.4}", t.kind, t.value)).collect();
    let detail = format!(
        "terms [{}], min separation {sep:.3} (need >= 0.2), prediction {value:.6}, gap(100) {g100:.2e}, gap(400) {g400:.2e} (need <= 0.02 and <= half)",
        kinds.join(", ")
    );
    (ok, detail, pred, m, value)
}

fn boundary_type_terms() -> Outcome {
    // c = 2 + 50 (x - 0.15)^2 makes c(a1) the unique minimum.
    let c = poly(&[2.0 + 50.0 * 0.0225, -15.0, 50.0]);
    let (ok, detail, pred, _, _) = reproduction("t1", &c);
    let kinds: Vec<TermKind> = match &pred {
        LimitPrediction::Finite { terms, .. } => terms.iter().map(|t| t.kind).collect(),
        _ => Vec::new(),
    };
    let shape = kinds == [TermKind::CAtPoint, TermKind::CAtPoint, TermKind::NN];
    outcome(ok && shape, format!("{detail}; term kinds {}", flag(shape)))
}

fn interior_plateau_terms() -> Outcome {
    // c = 2 + 50 (x - 0.1)^2 puts the minimum at the isolated max a1 = 0.1.
    let c = poly(&[2.5, -10.0, 50.0]);
    let (ok, detail, pred, m, _) = reproduction("t2", &c);
    let d = decompose(&m);
    let pieces: Vec<(f64, f64)> =
        d.components().iter().map(|&(lo, hi)| ((lo - 0.05).max(0.0), (hi + 0.05).min(1.0))).collect();
    let r = sweep_point(&m, &c, &neumann(), 400.0, &GridPolicy::default(), &pieces).unwrap();
    let (best, mass) = r.mass.iter().enumerate().fold((0, 0.0), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    let att = pred.attaining();
    let att_range = match att.first().map(|t| t.source) {
        Some(TermSource::Isolated { x, .. }) => Some((x, x)),
        Some(TermSource::Segment { a, b, .. }) => Some((a, b)),
        None => None,
    };
    let identified = att_range == Some(d.components()[best]);
    let ok = ok && identified && mass >= 0.9;
    outcome(
        ok,
        format!(
            "{detail}; heaviest component {:?} mass {mass:.4} (need >= 0.9), matches argmin {}",
            d.components()[best],
            flag(identified)
        ),
    )
}

fn unboundedness() -> Outcome {
    let vee = profile("vee", &[0.5]);
    let robin = BoundarySpec::Robin(Robin::new(1.0, 1.0, 1.0, 1.0).unwrap());
    let l50 = lambda_at(&vee, &Potential::zero(), &robin, 50.0);
    let l400 = lambda_at(&vee, &Potential::zero(), &robin, 400.0);
    let ratio = l400 / l50;
    let a = ratio >= 10.0;

    let dirichlet = BoundarySpec::Robin(Robin::dirichlet());
    let exponent = |m: &AdvectionProfile, ladder: &[f64]| {
        let pts: Vec<(f64, f64)> =
            ladder.iter().map(|&s| (s, lambda_at(m, &Potential::zero(), &dirichlet, s))).collect();
        growth_exponent(&pts).unwrap()
    };
    let g_lin = exponent(&profile("monotone_increasing", &[]), &[50.0, 100.0, 200.0, 400.0]);
    let b = (1.85..=2.0).contains(&g_lin);
    let g_well = exponent(&profile("power_well", &[0.5, 2.0]), &[50.0, 100.0, 200.0, 400.0, 800.0]);
    let c = (g_well - 2.0 / 3.0).abs() <= 0.15;
    outcome(
        a && b && c,
        format!(
            "vee Robin lambda(400)/lambda(50) = {l400:.4}/{l50:.4} = {ratio:.3} (need >= 10) {}; linear drift exponent {g_lin:.4} (need [1.85, 2]) {}; power_well exponent {g_well:.4} (need 2/3 +- 0.15) {}",
            flag(a),
            flag(b),
            flag(c)
        ),
    )
}

fn periodic_limit() -> Outcome {
    let m = profile("periodic_bump", &[]);
    let d = decompose_periodic(&m).unwrap();
    let shape = m.slope(0.0) > 0.0 && d.segments.is_empty() && d.isolated.len() == 1;
    let x0 = d.isolated[0].x;
    let c = poly(&[x0 * x0 + 0.3, -2.0 * x0, 1.0]);
    let pred = predict_limit_periodic(&m, &c, DEFAULT_GRID_N).unwrap().value().unwrap();
    let l = lambda_at(&m, &c, &BoundarySpec::Periodic, 400.0);
    let gap = (l - 0.3).abs();
    outcome(
        shape && gap <= 0.02,
        format!("single interior max at {x0}, m'(0) > 0 {}; lambda(400) = {l:.6}, prediction {pred:.6}, |lambda - 0.3| = {gap:.2e} (need <= 0.02)", flag(shape)),
    )
}

fn concentration() -> Outcome {
    let (x1, x2) = (0.3, 0.7);
    let m = profile("example2", &[x1, x2]);
    let iv = [(x1 + 0.05, x2 - 0.05), (0.0, 0.05), (0.95, 1.0), (0.05, x1), (x2, 0.95)];
    let r = sweep_point(&m, &Potential::zero(), &neumann(), 200.0, &GridPolicy::default(), &iv).unwrap();
    let support = r.mass[0] + r.mass[1] + r.mass[2];
    let monotone = r.mass[3] + r.mass[4];
    outcome(
        support >= 0.98 && monotone <= 0.02,
        format!("plateau+ends mass {support:.6} (need >= 0.98), monotone flanks {monotone:.2e} (need <= 0.02)"),
    )
}

fn rescaled_limit() -> Outcome {
    let m = profile("power_max", &[0.5, 2.0]);
    let d = decompose(&m);
    let p = &d.isolated[0];
    let r = sweep_point(&m, &Potential::zero(), &neumann(), 400.0, &GridPolicy::default(), &[]).unwrap();
    let rp = rescaled_profile(&r.eigenfunction, p.x, p.k_star, 400.0, mass_radius(&d, p.x), 3.0, 121).unwrap();
    let amp = (2.0 / PI).powf(0.25);
    let target = LimitProfile::analytic(2, -2.0, HalfLine::None, -3.0, 3.0, 601, |y| amp * (-y * y).exp());
    let dist = profile_distance(&rp, &target).unwrap();
    let e2 = limit_ode_ground_state(-2.0, 2, HalfLine::None, 6.0).unwrap().e0;
    let e4 = limit_ode_ground_state(-24.0, 4, HalfLine::None, 3.0).unwrap().e0;
    let ok = dist <= 0.05 && e2.abs() <= 1e-3 && e4.abs() <= 1e-3;
    outcome(ok, format!("profile sup distance {dist:.2e} (need <= 0.05), E0(2,-2) = {e2:.2e}, E0(4,-24) = {e4:.2e} (need |E0| <= 1e-3)"))
}

fn plateau_eigenfunction() -> Outcome {
    // c = 1 + 50 (x - 0.5)^2: the endpoint values 13.5 sit far above the plateau term.
    let c = poly(&[13.5, -50.0, 50.0]);
    let m = profile("example1", &[]);
    let pred = predict_limit(&decompose(&m), &c, &Robin::neumann(), DEFAULT_GRID_N).unwrap();
    let att = pred.attaining();
    let Some(&&driftlab_core::limit::LimitTerm {
        source: TermSource::Segment { a, b, .. }, kind: TermKind::NN, ..
    }) = att.first()
    else {
        return outcome(false, format!("argmin is not an NN plateau: {pred:?}"));
    };
    let unique = att.len() == 1;
    let r = sweep_point(&m, &c, &neumann(), 400.0, &GridPolicy::default(), &[]).unwrap();
    let dist = plateau_comparison(&r.eigenfunction, &c, a, b, SubBC::N, SubBC::N, 2000).unwrap();
    outcome(
        unique && dist <= 0.05,
        format!("unique NN argmin on [{a}, {b}] {}; sup distance {dist:.2e} (need <= 0.05)", flag(unique)),
    )
}

fn dense_min(t: &SymTridiag) -> f64 {
    let n = t.n();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = t.diag()[i];
    }
    for (i, &o) in t.off().iter().enumerate() {
        a[(i, i + 1)] += o;
        a[(i + 1, i)] += o;
    }
    if let Some(c) = t.corner() {
        a[(0, n - 1)] += c;
        a[(n - 1, 0)] += c;
    }
    a.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn matrices() -> impl Strategy<Value = SymTridiag> {
    (2usize..=12, any::<bool>()).prop_flat_map(|(n, cyc)| {
        let n = if cyc { n.max(3) } else { n };
        (prop::collection::vec(-10.0..10.0f64, n), prop::collection::vec(-5.0..5.0f64, n - 1), -5.0..5.0f64).prop_map(
            move |(d, o, c)| {
                if cyc {
                    SymTridiag::cyclic(d, o, c).unwrap()
                } else {
                    SymTridiag::new(d, o).unwrap()
                }
            },
        )
    })
}

fn check(name: &str, result: Result<(), impl std::fmt::Display>) -> String {
    match result {
        Ok(()) => format!("{name} ok"),
        Err(e) => format!("{name} FAIL ({e})"),
    }
}

fn run_cli(dir: &std::path::Path, cmd: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_driftlab"))
        .args([cmd, "--template", "t1", "--c", "poly:3.125,-15,50", "--ladder", "25,200,4", "--mass", "0.1,0.2"])
        .arg("--out")
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(out.stdout)
}

fn cli_determinism() -> Result<(), String> {
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    for d in &dirs {
        run_cli(d.path(), "sweep")?;
        run_cli(d.path(), "report")?;
    }
    for f in ["sweep.csv", "report.json", "lambda.dat"] {
        let a = std::fs::read(dirs[0].path().join(f)).map_err(|e| format!("{f}: {e}"))?;
        let b = std::fs::read(dirs[1].path().join(f)).map_err(|e| format!("{f}: {e}"))?;
        if a != b {
            return Err(format!("{f} differs between runs"));
        }
    }
    Ok(())
}

fn property_suites() -> Outcome {
    let mut parts = Vec::new();

    let oracle = runner(500).run(&matrices(), |t| {
        let got = smallest_eig(&t, DEFAULT_TOL).unwrap().lambda;
        let want = dense_min(&t);
        prop_assert!((got - want).abs() <= 1e-9 * t.norm_inf().max(1.0), "{got} vs {want}");
        Ok(())
    });
    parts.push(check("oracle n<=12", oracle));

    let shift = runner(200).run(&(matrices(), -20.0..20.0f64), |(t, alpha)| {
        let a = smallest_eig(&t, DEFAULT_TOL).unwrap();
        let b = smallest_eig(&t.shifted(alpha), DEFAULT_TOL).unwrap();
        let scale = t.norm_inf() + alpha.abs();
        prop_assert!(
            (b.lambda - a.lambda - alpha).abs() <= 1e-12 * scale.max(1.0),
            "{} {} {alpha}",
            a.lambda,
            b.lambda
        );
        Ok(())
    });
    let templates = ["vee", "example1", "t1", "power_max", "example3"];
    let predict_shift = runner(40).run(&(0usize..templates.len(), -3.0..3.0f64), |(i, sigma)| {
        let d = decompose(&profile(templates[i], &[]));
        let c = poly(&[1.0, -2.0, 3.0]);
        let cs = poly(&[1.0 + sigma, -2.0, 3.0]);
        let bc = Robin::neumann();
        let (a, b) = (predict_limit(&d, &c, &bc, 1000).unwrap(), predict_limit(&d, &cs, &bc, 1000).unwrap());
        if let (Some(x), Some(y)) = (a.value(), b.value()) {
            prop_assert!((y - x - sigma).abs() <= 1e-9 * (1.0 + x.abs()), "{x} {y} {sigma}");
        }
        Ok(())
    });
    parts.push(check("shift", shift.map_err(|e| e.to_string()).and(predict_shift.map_err(|e| e.to_string()))));

    let gauge = runner(30).run(&(0usize..templates.len(), -50.0..50.0f64, 1.0..100.0f64), |(i, beta, s)| {
        let m = profile(templates[i], &[]);
        let mb = m.affine(1.0, beta).unwrap();
        let c = poly(&[0.5, 1.0]);
        let bc = Robin::new(1.0, 0.3, 1.0, 0.7).unwrap();
        let a = assemble_transformed(&m, &c, &bc, s, 2000).unwrap();
        let b = assemble_transformed(&mb, &c, &bc, s, 2000).unwrap();
        prop_assert_eq!(a.matrix, b.matrix);
        Ok(())
    });
    parts.push(check("gauge", gauge));

    let chain =
        runner(100).run(&(prop::collection::vec(-3.0..3.0f64, 1..=4), 0.0..0.5f64, 0.05..0.5f64), |(cs, a, w)| {
            let c = poly(&cs);
            let b = a + w;
            let nn = subinterval_eigenvalue(&c, a, b, SubBC::N, SubBC::N, 1000).unwrap();
            let nd = subinterval_eigenvalue(&c, a, b, SubBC::N, SubBC::D, 1000).unwrap();
            let dd = subinterval_eigenvalue(&c, a, b, SubBC::D, SubBC::D, 1000).unwrap();
            let slack = 1e-9 * (1.0 + dd.abs());
            prop_assert!(nn <= nd + slack && nd <= dd + slack, "{nn} {nd} {dd}");
            Ok(())
        });
    parts.push(check("NN<=ND<=DD", chain));

    let mass = runner(20).run(&(0usize..templates.len(), 1.0..400.0f64), |(i, s)| {
        let m = profile(templates[i], &[]);
        let bc = BoundarySpec::Robin(Robin::new(1.0, 0.5, 1.0, 0.0).unwrap());
        let r = sweep_point(&m, &Potential::zero(), &bc, s, &GridPolicy::default(), &[]).unwrap();
        let total = mass_distribution(&r.eigenfunction, &[(0.0, 1.0)]).unwrap()[0];
        prop_assert!((total - 1.0).abs() <= 1e-9 && (r.total_mass - 1.0).abs() <= 1e-9, "{total}");
        Ok(())
    });
    parts.push(check("mass", mass));

    parts.push(check("CLI determinism", cli_determinism()));
    let ok = parts.iter().all(|p| p.ends_with(" ok"));
    outcome(ok, parts.join(", "))
}

fn main() -> ExitCode {
    type Criterion = (u32, &'static str, Option<f64>, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        (1, "analytic sub-interval oracles", Some(1.0), analytic_oracles),
        (2, "boundary and plateau terms (t1)", Some(30.0), boundary_type_terms),
        (3, "interior plateau terms and mass (t2)", None, interior_plateau_terms),
        (4, "unbounded growth", Some(60.0), unboundedness),
        (5, "periodic limit", None, periodic_limit),
        (6, "concentration (example2)", None, concentration),
        (7, "rescaled profile (power_max)", Some(60.0), rescaled_limit),
        (8, "plateau eigenfunction (example1)", None, plateau_eigenfunction),
        (9, "property suites", None, property_suites),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let t = Instant::now();
        let o = run();
        let secs = t.elapsed().as_secs_f64();
        let in_time = budget.is_none_or(|b| secs < b);
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        let timing = match budget {
            Some(b) => format!("{secs:.2}s (budget {b}s) {}", flag(in_time)),
            None => format!("{secs:.2}s"),
        };
        println!("[{}] {id}. {name}: {}; {timing}", if pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let total = start.elapsed().as_secs_f64();
    println!("acceptance: {} of 9 criteria pass, {total:.1}s", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
