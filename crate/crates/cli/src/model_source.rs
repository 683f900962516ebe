//! Resolution of the `--model` argument: either a builtin spec string like
//! `spin-direction:B=1` or a path to a JSON model file.

use std::collections::BTreeMap;
use std::path::Path;

use qfi_workbench::model::{parse_model, BuiltinModel, CoefficientExpr, ModelSpec};

use crate::CliError;

/// A resolved model plus the builtin handle when one was requested (used
/// for pointwise direction-norm checks).
#[derive(Debug)]
pub struct ModelSource {
    pub spec: ModelSpec,
    pub builtin: Option<BuiltinModel>,
}

impl ModelSource {
    /// Validates model constraints at an evaluation point.
    pub fn validate_at(&self, g: f64) -> Result<(), CliError> {
        if let Some(builtin) = &self.builtin {
            builtin.validate_at(g).map_err(CliError::config)?;
        }
        Ok(())
    }
}

fn parse_params(params: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for piece in params.split(',') {
        if piece.is_empty() {
            continue;
        }
        let (key, value) = piece.split_once('=').ok_or_else(|| {
            CliError::Config(format!(
                "expected key=value in model parameters, got '{piece}'"
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn take_f64(
    params: &mut BTreeMap<String, String>,
    key: &str,
    default: f64,
) -> Result<f64, CliError> {
    match params.remove(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<f64>()
            .map_err(|_| CliError::Config(format!("parameter {key} must be a number, got '{v}'"))),
    }
}

fn take_expr(
    params: &mut BTreeMap<String, String>,
    key: &str,
) -> Result<Option<CoefficientExpr>, CliError> {
    match params.remove(key) {
        None => Ok(None),
        Some(v) => CoefficientExpr::parse(&v)
            .map(Some)
            .map_err(|e| CliError::Config(format!("parameter {key}: {e}"))),
    }
}

fn reject_leftovers(params: BTreeMap<String, String>, name: &str) -> Result<(), CliError> {
    if let Some(key) = params.into_keys().next() {
        return Err(CliError::Config(format!(
            "unknown parameter '{key}' for builtin model {name}"
        )));
    }
    Ok(())
}

fn parse_builtin(name: &str, params: &str) -> Result<BuiltinModel, CliError> {
    let mut params = parse_params(params)?;
    let builtin = match name {
        "spin-direction" => {
            let field = take_f64(&mut params, "B", 1.0)?;
            reject_leftovers(params, name)?;
            BuiltinModel::spin_direction(field)
        }
        "spin-direction-general" => {
            let field = take_f64(&mut params, "B", 1.0)?;
            let direction = ["nx", "ny", "nz"].map(|k| take_expr(&mut params, k));
            let mut exprs = Vec::with_capacity(3);
            for (axis, entry) in ["nx", "ny", "nz"].iter().zip(direction) {
                exprs.push(entry?.ok_or_else(|| {
                    CliError::Config(format!(
                        "spin-direction-general requires {axis}=<expr> (use 0 for unused axes)"
                    ))
                })?);
            }
            reject_leftovers(params, name)?;
            BuiltinModel::spin_direction_general(
                field,
                [exprs.remove(0), exprs.remove(0), exprs.remove(0)],
            )
        }
        "spin-amplitude" => {
            let amplitude = take_expr(&mut params, "B")?.unwrap_or_else(CoefficientExpr::parameter);
            let direction = if ["nx", "ny", "nz"].iter().any(|k| params.contains_key(*k)) {
                [
                    take_f64(&mut params, "nx", 0.0)?,
                    take_f64(&mut params, "ny", 0.0)?,
                    take_f64(&mut params, "nz", 0.0)?,
                ]
            } else {
                [0.0, 0.0, 1.0]
            };
            reject_leftovers(params, name)?;
            BuiltinModel::spin_amplitude(amplitude, direction).map_err(CliError::config)?
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown builtin model '{other}'; available: spin-direction, \
                 spin-direction-general, spin-amplitude (or pass a model file path)"
            )))
        }
    };
    Ok(builtin)
}

/// Resolves the `--model` argument: builtin names (with optional `:k=v,...`
/// parameters) are tried first, anything else is treated as a file path.
pub fn resolve_model(arg: &str) -> Result<ModelSource, CliError> {
    let (name, params) = match arg.split_once(':') {
        Some((n, p)) => (n, p),
        None => (arg, ""),
    };
    if matches!(
        name,
        "spin-direction" | "spin-direction-general" | "spin-amplitude"
    ) {
        let builtin = parse_builtin(name, params)?;
        let spec = builtin.spec().map_err(CliError::config)?;
        return Ok(ModelSource {
            spec,
            builtin: Some(builtin),
        });
    }
    let path = Path::new(arg);
    let source = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read model file {}: {e}", path.display())))?;
    let spec = parse_model(&source).map_err(CliError::config)?;
    Ok(ModelSource {
        spec,
        builtin: None,
    })
}
