//! JSON documents for profiles and potentials, and the compact
//! `name:p1,p2,...` template syntax.

use serde::Deserialize;

use crate::profile::{build_profile, AdvectionProfile, Potential, ProfileError, ProfileSpec, SegmentSpec};
use crate::templates::builtin;
use crate::Error;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateRef {
    name: String,
    #[serde(default)]
    params: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialDoc {
    pub knots: Vec<f64>,
    pub segments: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    #[serde(default)]
    knots: Option<Vec<f64>>,
    #[serde(default)]
    segments: Option<Vec<SegmentSpec>>,
    #[serde(default)]
    template: Option<TemplateRef>,
    #[serde(default)]
    potential: Option<PotentialDoc>,
}

/// A profile read from JSON together with its optional potential block.
#[derive(Debug, Clone)]
pub struct ProfileDocument {
    pub spec: ProfileSpec,
    pub potential: Option<Potential>,
}

impl ProfileDocument {
    pub fn build(&self) -> Result<AdvectionProfile, Error> {
        Ok(build_profile(self.spec.clone())?)
    }
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Profile(ProfileError::MalformedSpec(msg.into()))
}

pub fn potential_from_doc(doc: PotentialDoc) -> Result<Potential, Error> {
    Ok(Potential::new(doc.knots, doc.segments)?)
}

/// Parses a profile document: either explicit `knots`/`segments` or a
/// `template` reference, plus an optional `potential`.
pub fn parse_profile_json(text: &str) -> Result<ProfileDocument, Error> {
    let doc: ProfileDoc = serde_json::from_str(text).map_err(|e| malformed(format!("invalid profile JSON: {e}")))?;
    let spec = match (doc.template, doc.knots, doc.segments) {
        (Some(t), None, None) => builtin(&t.name, &t.params)?,
        (None, Some(knots), Some(segments)) => ProfileSpec { knots, segments },
        (Some(_), _, _) => return Err(malformed("give either a template or knots/segments, not both")),
        _ => return Err(malformed("profile needs both knots and segments, or a template")),
    };
    let potential = doc.potential.map(potential_from_doc).transpose()?;
    Ok(ProfileDocument { spec, potential })
}

/// Parses a potential document `{"knots": [...], "segments": [[...], ...]}`.
pub fn parse_potential_json(text: &str) -> Result<Potential, Error> {
    let doc: PotentialDoc =
        serde_json::from_str(text).map_err(|e| malformed(format!("invalid potential JSON: {e}")))?;
    potential_from_doc(doc)
}

/// Parses `name` or `name:p1,p2,...` into a template spec.
pub fn parse_template_ref(text: &str) -> Result<ProfileSpec, Error> {
    let (name, params) = match text.split_once(':') {
        Some((n, p)) => (n, parse_numbers(p)?),
        None => (text, Vec::new()),
    };
    Ok(builtin(name.trim(), &params)?)
}

/// Comma-separated list of reals.
pub fn parse_numbers(text: &str) -> Result<Vec<f64>, Error> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| malformed(format!("`{t}` is not a number")))).collect()
}
