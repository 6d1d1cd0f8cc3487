use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::Value;
use wzd_core::{Boundary, Model, RationalDivisor, SurfaceModel, ToricVariety};

/// A failure with a stable machine-readable code.
#[derive(Debug)]
pub struct CliError {
    pub code: String,
    pub message: String,
}

impl CliError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        CliError {
            code: code.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl From<wzd_core::Error> for CliError {
    fn from(e: wzd_core::Error) -> Self {
        CliError::new(e.code(), e.to_string())
    }
}

fn read_value(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::new("json", format!("{}: {e}", path.display())))
}

fn decode<T: DeserializeOwned>(path: &Path, value: Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let at = e.path().to_string();
        CliError::new(
            "schema",
            format!("{}: at `{at}`: {}", path.display(), e.into_inner()),
        )
    })
}

/// A model file: a tagged model, a bare fan, or a bare surface lattice.
pub fn load_model(path: &Path) -> Result<Model, CliError> {
    let value = read_value(path)?;
    let obj = value
        .as_object()
        .ok_or_else(|| CliError::new("schema", format!("{}: expected an object", path.display())))?;
    if obj.contains_key("type") {
        decode(path, value)
    } else if obj.contains_key("rays") {
        decode::<ToricVariety>(path, value).map(Model::Toric)
    } else if obj.contains_key("classes") {
        decode::<SurfaceModel>(path, value).map(Model::Surface)
    } else {
        Err(CliError::new(
            "schema",
            format!("{}: not a fan, surface lattice or tagged model", path.display()),
        ))
    }
}

pub fn load_raw_divisor(path: &Path) -> Result<RationalDivisor, CliError> {
    decode(path, read_value(path)?)
}

/// A divisor on `model`; toric files may key components by ray index.
pub fn load_divisor(path: &Path, model: &Model) -> Result<RationalDivisor, CliError> {
    let raw = load_raw_divisor(path)?;
    let d = match model {
        Model::Toric(x) => x.rekey_divisor(&raw)?,
        Model::Surface(_) => raw,
    };
    model.check_divisor(&d)?;
    Ok(d)
}

pub fn load_boundary(path: Option<&Path>, model: &Model) -> Result<Boundary, CliError> {
    match path {
        Some(p) => Ok(Boundary::new(load_divisor(p, model)?)?),
        None => Ok(Boundary::zero()),
    }
}

/// A toric model, or an input error naming the operation.
pub fn toric<'a>(model: &'a Model, what: &str) -> Result<&'a ToricVariety, CliError> {
    model
        .as_toric()
        .ok_or_else(|| CliError::new("precondition", format!("{what} needs a toric model")))
}

pub fn parse_vector(s: &str) -> Result<Vec<i64>, CliError> {
    s.trim_matches(|c| c == '(' || c == ')' || c == '[' || c == ']')
        .split(',')
        .map(|t| t.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::new("parse", format!("`{s}` is not an integer vector")))
}
