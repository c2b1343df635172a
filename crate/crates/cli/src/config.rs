//! Parsing of profile, potential, boundary and ladder arguments.

use std::path::{Path, PathBuf};

use driftlab_core::lab::ladder_points;
use driftlab_core::profile::build_profile;
use driftlab_core::profile::{AdvectionProfile, BoundarySpec, Potential, ProfileError, Robin};
use driftlab_core::schema::{parse_numbers, parse_potential_json, parse_profile_json, parse_template_ref};
use driftlab_core::Error;

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "DRIFTLAB_OUT";

fn malformed(msg: impl Into<String>) -> CliError {
    CliError::Core(Error::Profile(ProfileError::MalformedSpec(msg.into())))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })
}

/// Profile plus the potential block embedded in its file, if any.
pub struct LoadedProfile {
    pub profile: AdvectionProfile,
    pub embedded_c: Option<Potential>,
}

pub fn load_profile(template: Option<&str>, file: Option<&Path>) -> Result<LoadedProfile, CliError> {
    match (template, file) {
        (Some(t), None) => Ok(LoadedProfile { profile: build_profile(parse_template_ref(t)?)?, embedded_c: None }),
        (None, Some(path)) => {
            let doc = parse_profile_json(&read(path)?)?;
            Ok(LoadedProfile { profile: doc.build()?, embedded_c: doc.potential })
        }
        (Some(_), Some(_)) => Err(CliError::Usage("give --template or --profile, not both".into())),
        (None, None) => Err(CliError::Usage("one of --template or --profile is required".into())),
    }
}

/// `zero`, `const:v`, `poly:c0,c1,...` or a potential JSON file. Without the
/// flag the profile's embedded potential is used, then zero.
pub fn load_potential(arg: Option<&str>, embedded: Option<Potential>) -> Result<Potential, CliError> {
    let Some(arg) = arg else {
        return Ok(embedded.unwrap_or_else(Potential::zero));
    };
    if arg == "zero" {
        return Ok(Potential::zero());
    }
    if let Some(v) = arg.strip_prefix("const:") {
        let v = parse_numbers(v)?;
        if v.len() != 1 {
            return Err(malformed("const: takes exactly one value"));
        }
        return Ok(Potential::constant(v[0]));
    }
    if let Some(cs) = arg.strip_prefix("poly:") {
        return Ok(Potential::polynomial(parse_numbers(cs)?)?);
    }
    Ok(parse_potential_json(&read(Path::new(arg))?)?)
}

/// `robin:hbar1,ell1,hbar2,ell2`, `neumann`, `dirichlet` or `periodic`.
pub fn parse_bc(arg: &str) -> Result<BoundarySpec, CliError> {
    match arg {
        "periodic" => return Ok(BoundarySpec::Periodic),
        "neumann" => return Ok(BoundarySpec::Robin(Robin::neumann())),
        "dirichlet" => return Ok(BoundarySpec::Robin(Robin::dirichlet())),
        _ => {}
    }
    let Some(vals) = arg.strip_prefix("robin:") else {
        return Err(CliError::Usage(format!("unknown boundary spec `{arg}`")));
    };
    let v = parse_numbers(vals)?;
    if v.len() != 4 {
        return Err(CliError::Usage("robin: takes four values hbar1,ell1,hbar2,ell2".into()));
    }
    Ok(BoundarySpec::Robin(Robin::new(v[0], v[1], v[2], v[3])?))
}

/// `start,stop,count` ladder, geometric unless `linear`.
pub fn parse_ladder(arg: &str, linear: bool) -> Result<Vec<f64>, CliError> {
    let v = parse_numbers(arg)?;
    if v.len() != 3 || v[2] < 1.0 || v[2].fract() != 0.0 {
        return Err(CliError::Usage("--ladder takes start,stop,count with an integer count".into()));
    }
    Ok(ladder_points(v[0], v[1], v[2] as usize, !linear).map_err(Error::from)?)
}

/// `a,b` mass interval.
pub fn parse_interval(arg: &str) -> Result<(f64, f64), CliError> {
    match parse_numbers(arg)?.as_slice() {
        [a, b] if a < b => Ok((*a, *b)),
        _ => Err(CliError::Usage(format!("bad mass interval `{arg}`, expected a,b with a < b"))),
    }
}

pub fn out_dir(flag: Option<&Path>) -> Option<PathBuf> {
    flag.map(Path::to_path_buf).or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_specs() {
        assert_eq!(parse_bc("periodic").unwrap(), BoundarySpec::Periodic);
        assert_eq!(parse_bc("robin:1,0,1,0").unwrap(), BoundarySpec::Robin(Robin::neumann()));
        assert!(parse_bc("robin:1,0,1").is_err());
        assert!(parse_bc("robin:0,0,1,0").is_err());
        assert!(parse_bc("mixed").is_err());
    }

    #[test]
    fn potentials() {
        assert_eq!(load_potential(Some("const:2.5"), None).unwrap().at(0.3), 2.5);
        assert_eq!(load_potential(Some("poly:1,2"), None).unwrap().at(0.5), 2.0);
        assert_eq!(load_potential(None, Some(Potential::constant(4.0))).unwrap().at(0.1), 4.0);
        assert_eq!(load_potential(None, None).unwrap().at(0.1), 0.0);
    }

    #[test]
    fn ladders_and_intervals() {
        assert_eq!(parse_ladder("50,400,4", false).unwrap(), vec![50.0, 100.0, 200.0, 400.0]);
        assert_eq!(parse_ladder("0,3,4", true).unwrap(), vec![0.0, 1.0, 2.0, 3.0]);
        assert!(parse_ladder("1,2", false).is_err());
        assert_eq!(parse_interval("0,0.5").unwrap(), (0.0, 0.5));
        assert!(parse_interval("0.5,0").is_err());
    }
}
