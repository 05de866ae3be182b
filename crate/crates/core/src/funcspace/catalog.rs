//! Named closed-form functions and the `name{key=value,...}` address syntax.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde_json::Value;

use super::domain::Domain;
use super::function::{Boundary, Class, ConvexFunction, Kind};
use crate::error::{Error, Result};

/// Catalog parameters keyed by name; values are JSON numbers or arrays.
pub type Params = BTreeMap<String, Value>;

pub const CATALOG_NAMES: &[&str] = &[
    "affine",
    "exp",
    "power-norm",
    "exp-abs",
    "quadratic-form",
    "quadratic",
    "indicator-point",
    "rockafellar-2d",
    "neg-log",
    "entropy",
    "exp-abs-conjugate",
    "ball-indicator",
    "neg-log-conjugate",
];

fn scalar(params: &Params, key: &str) -> Result<Option<f64>> {
    match params.get(key) {
        None => Ok(None),
        Some(v) => v.as_f64().map(Some).ok_or_else(|| Error::InvalidParams(format!("`{key}` must be a number"))),
    }
}

fn vector(params: &Params, key: &str) -> Result<Option<Vec<f64>>> {
    match params.get(key) {
        None => Ok(None),
        Some(Value::Number(n)) => Ok(Some(vec![n.as_f64().unwrap_or(f64::NAN)])),
        Some(v) => serde_json::from_value::<Vec<f64>>(v.clone())
            .map(Some)
            .map_err(|_| Error::InvalidParams(format!("`{key}` must be a numeric array"))),
    }
}

fn matrix(params: &Params, key: &str) -> Result<Option<DMatrix<f64>>> {
    let Some(v) = params.get(key) else { return Ok(None) };
    let rows: Vec<Vec<f64>> =
        serde_json::from_value(v.clone()).map_err(|_| Error::InvalidParams(format!("`{key}` must be a nested numeric array")))?;
    let m = rows.len();
    if m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidParams(format!("`{key}` must be a non-empty square matrix")));
    }
    Ok(Some(DMatrix::from_row_slice(m, m, &rows.concat())))
}

fn dim(params: &Params) -> Result<usize> {
    match scalar(params, "dim")? {
        None => Ok(1),
        Some(d) if d >= 1.0 && d.fract() == 0.0 => Ok(d as usize),
        Some(d) => Err(Error::InvalidParams(format!("dim must be a positive integer, got {d}"))),
    }
}

fn flag(params: &Params, key: &str) -> Result<bool> {
    match params.get(key) {
        None => Ok(false),
        Some(Value::Bool(b)) => Ok(*b),
        Some(v) => Ok(v.as_f64().map(|x| x != 0.0).unwrap_or(false)),
    }
}

fn reject_unknown(name: &str, params: &Params, allowed: &[&str]) -> Result<()> {
    match params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::InvalidParams(format!("`{name}` takes no parameter `{k}`"))),
        None => Ok(()),
    }
}

/// Checks symmetry and positive definiteness via Cholesky.
pub fn check_spd(q: &DMatrix<f64>) -> Result<()> {
    let scale = q.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    if (q - q.transpose()).iter().any(|x| x.abs() > 1e-12 * scale) {
        return Err(Error::InvalidParams("Q must be symmetric".into()));
    }
    if q.clone().cholesky().is_none() {
        return Err(Error::InvalidParams("Q must be positive definite".into()));
    }
    Ok(())
}

/// Builds a catalog entry.
///
/// | name | parameters | formula |
/// |------|------------|---------|
/// | `affine` | `a` (vector), `b` | ⟨a,θ⟩ + b |
/// | `exp` | | exp θ |
/// | `power-norm` | `p ≥ 1`, `dim` | (1/p)‖θ‖ᵖ |
/// | `exp-abs` | `positive` | exp\|θ\| − \|θ\| − 1 |
/// | `quadratic-form` | `Q` (SPD), `l`, `k` | ½θᵀQθ + ⟨l,θ⟩ + k |
/// | `quadratic` | `dim` | ½‖θ‖² |
/// | `indicator-point` | `a`, `b` | 1_{a} + b |
/// | `rockafellar-2d` | | ¼(θ₁²/θ₂ + θ₁² + θ₂²) |
/// | `neg-log` | | −log θ |
///
/// plus the conjugate-side entries `entropy`, `exp-abs-conjugate`,
/// `ball-indicator` (`radius`, `dim`) and `neg-log-conjugate`.
pub fn catalog_lookup(name: &str, params: &Params) -> Result<ConvexFunction> {
    let label = if params.is_empty() {
        name.to_string()
    } else {
        let body: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{name}{{{}}}", body.join(","))
    };
    let f = match name {
        "affine" => {
            reject_unknown(name, params, &["a", "b"])?;
            let a = vector(params, "a")?.ok_or_else(|| Error::InvalidParams("affine needs `a`".into()))?;
            let b = scalar(params, "b")?.unwrap_or(0.0);
            finite_all(&a)?;
            ConvexFunction::affine_unchecked(a, b, label)
        }
        "exp" => {
            reject_unknown(name, params, &[])?;
            ConvexFunction::from_kind(Kind::Exp, Domain::whole(1), None, label, Class::LEGENDRE)
        }
        "power-norm" => {
            reject_unknown(name, params, &["p", "dim"])?;
            let p = scalar(params, "p")?.unwrap_or(2.0);
            if !(p >= 1.0) || !p.is_finite() {
                return Err(Error::InvalidParams(format!("power-norm needs p in [1, inf), got {p}")));
            }
            let class = if p > 1.0 { Class::LEGENDRE } else { Class::CONVEX };
            ConvexFunction::from_kind(Kind::PowerNorm { p }, Domain::whole(dim(params)?), None, label, class)
        }
        "exp-abs" => {
            reject_unknown(name, params, &["positive"])?;
            let positive = flag(params, "positive")?;
            if positive {
                let boundary = Boundary::Point { at: vec![0.0], value: 0.0 };
                ConvexFunction::from_kind(
                    Kind::ExpAbs { positive },
                    Domain::positive_half_line(),
                    Some(boundary),
                    label,
                    Class::LEGENDRE,
                )
            } else {
                ConvexFunction::from_kind(Kind::ExpAbs { positive }, Domain::whole(1), None, label, Class::STRICT_SMOOTH)
            }
        }
        "quadratic-form" => {
            reject_unknown(name, params, &["Q", "l", "k"])?;
            let q = matrix(params, "Q")?.ok_or_else(|| Error::InvalidParams("quadratic-form needs `Q`".into()))?;
            check_spd(&q)?;
            let m = q.nrows();
            let l = vector(params, "l")?.unwrap_or_else(|| vec![0.0; m]);
            if l.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: l.len() });
            }
            finite_all(&l)?;
            let k = scalar(params, "k")?.unwrap_or(0.0);
            ConvexFunction::quadratic_unchecked(q, DVector::zeros(m), DVector::from_vec(l), k, label)
        }
        "quadratic" => {
            reject_unknown(name, params, &["dim"])?;
            let m = dim(params)?;
            ConvexFunction::quadratic_unchecked(DMatrix::identity(m, m), DVector::zeros(m), DVector::zeros(m), 0.0, label)
        }
        "indicator-point" => {
            reject_unknown(name, params, &["a", "b"])?;
            let a = vector(params, "a")?.ok_or_else(|| Error::InvalidParams("indicator-point needs `a`".into()))?;
            finite_all(&a)?;
            ConvexFunction::indicator_unchecked(a, scalar(params, "b")?.unwrap_or(0.0), label)
        }
        "rockafellar-2d" => {
            reject_unknown(name, params, &[])?;
            let domain = Domain::open_box(vec![f64::NEG_INFINITY, 0.0], vec![f64::INFINITY; 2])?;
            ConvexFunction::from_kind(Kind::Rockafellar, domain, None, label, Class::STRICT_SMOOTH)
        }
        "neg-log" => {
            reject_unknown(name, params, &[])?;
            ConvexFunction::from_kind(Kind::NegLog, Domain::positive_half_line(), None, label, Class::LEGENDRE)
        }
        "neg-log-conjugate" => {
            reject_unknown(name, params, &[])?;
            ConvexFunction::from_kind(Kind::NegLogConjugate, Domain::negative_half_line(), None, label, Class::LEGENDRE)
        }
        "entropy" => {
            reject_unknown(name, params, &[])?;
            let boundary = Boundary::Point { at: vec![0.0], value: 0.0 };
            ConvexFunction::from_kind(Kind::Entropy, Domain::positive_half_line(), Some(boundary), label, Class::LEGENDRE)
        }
        "exp-abs-conjugate" => {
            reject_unknown(name, params, &["positive"])?;
            let positive = flag(params, "positive")?;
            if positive {
                let boundary = Boundary::Point { at: vec![0.0], value: 0.0 };
                ConvexFunction::from_kind(
                    Kind::ExpAbsConjugate { positive },
                    Domain::positive_half_line(),
                    Some(boundary),
                    label,
                    Class::LEGENDRE,
                )
            } else {
                ConvexFunction::from_kind(Kind::ExpAbsConjugate { positive }, Domain::whole(1), None, label, Class::STRICT_SMOOTH)
            }
        }
        "ball-indicator" => {
            reject_unknown(name, params, &["radius", "dim"])?;
            let radius = scalar(params, "radius")?.unwrap_or(1.0);
            if !(radius > 0.0) || !radius.is_finite() {
                return Err(Error::InvalidParams(format!("radius must be > 0, got {radius}")));
            }
            let m = dim(params)?;
            ConvexFunction::from_kind(
                Kind::BallIndicator { radius },
                Domain::OpenBall { radius, dim: m },
                Some(Boundary::Sphere { radius, value: 0.0 }),
                label,
                Class::CONVEX,
            )
        }
        other => return Err(Error::UnknownFunction(other.to_string())),
    };
    Ok(f)
}

fn finite_all(v: &[f64]) -> Result<()> {
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        Err(Error::InvalidParams("vector parameters must be non-empty and finite".into()))
    } else {
        Ok(())
    }
}

/// Splits `name{key=value,...}` into the name and its parameters. Values are
/// JSON, so commas nested in brackets are part of the value.
pub fn parse_function_spec(spec: &str) -> Result<(String, Params)> {
    let spec = spec.trim();
    let Some(open) = spec.find('{') else {
        return Ok((spec.to_string(), Params::new()));
    };
    if !spec.ends_with('}') {
        return Err(Error::Parse(format!("unterminated parameter list in `{spec}`")));
    }
    let name = spec[..open].trim().to_string();
    let body = &spec[open + 1..spec.len() - 1];
    let mut params = Params::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut pieces = Vec::new();
    for (i, ch) in body.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                pieces.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    pieces.push(&body[start..]);
    for piece in pieces.into_iter().map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = piece.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got `{piece}`")))?;
        let value: Value =
            serde_json::from_str(v.trim()).map_err(|e| Error::Parse(format!("bad value for `{}`: {e}", k.trim())))?;
        params.insert(k.trim().to_string(), value);
    }
    Ok((name, params))
}

/// Parses and looks up `name{key=value,...}`.
pub fn lookup_spec(spec: &str) -> Result<ConvexFunction> {
    let (name, params) = parse_function_spec(spec)?;
    catalog_lookup(&name, &params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::ext::ExtendedReal;

    fn value(f: &ConvexFunction, t: &[f64]) -> ExtendedReal {
        f.eval(t).unwrap()
    }

    #[test]
    fn lookup_examples() {
        let e = lookup_spec("exp").unwrap();
        assert_eq!(value(&e, &[0.0]), ExtendedReal::Finite(1.0));
        assert!((value(&e, &[1.0]).to_f64() - std::f64::consts::E).abs() < 1e-15);

        let r = lookup_spec("rockafellar-2d").unwrap();
        assert!((value(&r, &[2.0, 1.0]).to_f64() - 2.25).abs() < 1e-15);
        assert!(value(&r, &[0.0, -1.0]).is_pos_inf());

        let a = lookup_spec("affine{a=[3],b=2}").unwrap();
        assert_eq!(value(&a, &[1.0]), ExtendedReal::Finite(5.0));

        let ea = lookup_spec("exp-abs").unwrap();
        assert_eq!(value(&ea, &[0.0]), ExtendedReal::Finite(0.0));

        let ind = lookup_spec("indicator-point{a=[2]}").unwrap();
        assert_eq!(value(&ind, &[2.0]), ExtendedReal::Finite(0.0));
        assert!(value(&ind, &[3.0]).is_pos_inf());
    }

    #[test]
    fn boundary_overrides() {
        let h = lookup_spec("entropy").unwrap();
        assert_eq!(value(&h, &[0.0]), ExtendedReal::Finite(0.0));
        assert!(value(&h, &[-1e-9]).is_pos_inf());
        let ball = lookup_spec("ball-indicator{dim=2}").unwrap();
        assert_eq!(value(&ball, &[0.6, 0.8]), ExtendedReal::Finite(0.0));
        assert!(value(&ball, &[0.6, 0.81]).is_pos_inf());
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(lookup_spec("power-norm{p=0.5}"), Err(Error::InvalidParams(_))));
        assert!(matches!(lookup_spec("quadratic-form{Q=[[1,2],[2,1]]}"), Err(Error::InvalidParams(_))));
        assert!(matches!(lookup_spec("quadratic-form{Q=[[1,2],[0,1]]}"), Err(Error::InvalidParams(_))));
        assert!(matches!(lookup_spec("nope"), Err(Error::UnknownFunction(_))));
        assert!(matches!(lookup_spec("exp{p=2}"), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let e = lookup_spec("exp").unwrap();
        assert!(matches!(e.eval(&[1.0, 2.0]), Err(Error::DimensionMismatch { expected: 1, got: 2 })));
    }

    #[test]
    fn spec_string_with_nested_brackets() {
        let (name, params) = parse_function_spec("quadratic-form{Q=[[2,0.5],[0.5,1]], l=[1,-1],k=3}").unwrap();
        assert_eq!(name, "quadratic-form");
        assert_eq!(params.len(), 3);
        let f = catalog_lookup(&name, &params).unwrap();
        // ½(2·1 + 2·0.5·1·1 + 1) + (1 - 1) + 3 at θ = (1, 1)
        assert!((f.eval_finite(&[1.0, 1.0]).unwrap() - 5.0).abs() < 1e-14);
        assert!(parse_function_spec("exp{p=").is_err());
    }
}
