use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::closed::conjugate_closed;
use super::newton::NewtonOptions;
use crate::error::{Error, Result};
use crate::funcspace::{AxisSpec, Class, ConvexFunction, Domain, GridFunction, GridSpec, Kind};

/// Nodes per axis when a grid engine has to pick its own window.
pub const DEFAULT_GRID_NODES: usize = 2001;

/// How F* is computed.
#[derive(Clone, Debug, PartialEq)]
pub enum Engine {
    /// Catalog rules only.
    Closed,
    /// Gradient inversion of a differentiable, strictly convex F.
    Newton(NewtonOptions),
    /// Max over samples of F. `window` defaults to the domain window of F
    /// with [`DEFAULT_GRID_NODES`] per axis. `fast` selects the linear-time
    /// transform for whole-grid outputs; pointwise evaluation is the same.
    Grid { window: Option<GridSpec>, fast: bool },
}

impl Engine {
    pub fn newton() -> Self {
        Engine::Newton(NewtonOptions::default())
    }

    pub fn grid(window: Option<GridSpec>) -> Self {
        Engine::Grid { window, fast: true }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Engine::Closed => "closed",
            Engine::Newton(_) => "newton",
            Engine::Grid { fast: false, .. } => "grid-brute",
            Engine::Grid { fast: true, .. } => "grid-fast",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Engine {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// F together with F* as produced by one engine.
#[derive(Clone, Debug)]
pub struct ConjugatePair {
    pub primal: ConvexFunction,
    pub dual: ConvexFunction,
    pub engine: Engine,
}

impl ConjugatePair {
    pub fn new(primal: ConvexFunction, engine: Engine) -> Result<Self> {
        let dual = conjugate_with(&primal, &engine)?;
        Ok(ConjugatePair { primal, dual, engine })
    }

    /// The same pair with the roles of F and F* exchanged.
    pub fn swapped(&self) -> ConjugatePair {
        ConjugatePair { primal: self.dual.clone(), dual: self.primal.clone(), engine: self.engine.clone() }
    }
}

/// Default sampling window for a grid engine.
pub fn default_window(f: &ConvexFunction, nodes: usize) -> Result<GridSpec> {
    let window = f
        .domain()
        .window()
        .ok_or_else(|| Error::InvalidGrid(format!("no default sampling window for {}; pass one explicitly", f.label())))?;
    Ok(GridSpec(window.into_iter().map(|(lo, hi)| AxisSpec::new(lo, hi, nodes)).collect::<Result<_>>()?))
}

/// F* as a function object evaluated by the chosen engine.
pub fn conjugate_with(f: &ConvexFunction, engine: &Engine) -> Result<ConvexFunction> {
    let label = format!("conj({})", f.label());
    match engine {
        Engine::Closed => conjugate_closed(f),
        Engine::Newton(options) => {
            if !f.has_gradient() {
                return Err(Error::NotDifferentiable(f.label().to_string(), "a gradient"));
            }
            let class = if f.class().legendre_type { Class::LEGENDRE } else { Class::CONVEX };
            let kind = Kind::NumericConjugate { base: Arc::new(f.clone()), options: *options };
            Ok(ConvexFunction::from_kind(kind, Domain::whole(f.dim()), None, label, class))
        }
        Engine::Grid { window, .. } => {
            let spec = match window {
                Some(w) => w.clone(),
                None => default_window(f, DEFAULT_GRID_NODES)?,
            };
            let samples = GridFunction::sample(f, &spec)?;
            let kind = Kind::DiscreteConjugate { primal: Arc::new(samples) };
            Ok(ConvexFunction::from_kind(kind, Domain::whole(f.dim()), None, label, Class::CONVEX))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::lookup_spec;

    #[test]
    fn engines_agree_on_exp() {
        let f = lookup_spec("exp").unwrap();
        let closed = conjugate_with(&f, &Engine::Closed).unwrap();
        let newton = conjugate_with(&f, &Engine::newton()).unwrap();
        let grid = conjugate_with(&f, &Engine::grid(Some("-3:3:2001".parse().unwrap()))).unwrap();
        for eta in [0.2, 1.0, 5.0, 15.0] {
            let want = closed.eval(&[eta]).unwrap().to_f64();
            assert!((newton.eval(&[eta]).unwrap().to_f64() - want).abs() < 1e-9);
            assert!((grid.eval(&[eta]).unwrap().to_f64() - want).abs() < 1e-4, "{eta}");
        }
    }

    #[test]
    fn numeric_conjugate_gradient_inverts() {
        let pair = ConjugatePair::new(lookup_spec("exp").unwrap(), Engine::newton()).unwrap();
        let g = pair.dual.gradient(&[2.0]).unwrap();
        assert!((g[0] - 2f64.ln()).abs() < 1e-10);
        assert_eq!(pair.swapped().primal.label(), "conj(exp)");
    }

    #[test]
    fn names() {
        assert_eq!(Engine::grid(None).to_string(), "grid-fast");
        assert_eq!(Engine::Grid { window: None, fast: false }.name(), "grid-brute");
        assert!(conjugate_with(&lookup_spec("indicator-point{a=[1]}").unwrap(), &Engine::grid(None)).is_err());
    }
}
