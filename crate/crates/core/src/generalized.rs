//! The generalized transform (T F)(η) = λ (L F)(Eη + f) + ⟨η, g⟩ + h and a
//! pointwise harness for the identity
//!
//! ```text
//! (F*)_P = L(F_{P⋄})
//! ```
//!
//! whose left side is the generalized transform with the tuple P read as
//! dual-side parameters and whose right side is the ordinary conjugate of the
//! deformation of F by P⋄.

use nalgebra::DVector;
use serde::Serialize;

use crate::affine::{deform, DeformParams, GenParams};
use crate::error::{Error, Result};
use crate::funcspace::{AxisSpec, ConvexFunction, ExtendedReal, GridSpec, Kind};
use crate::legendre::{conjugate_with, default_window, Engine, DEFAULT_GRID_NODES};
use crate::report::{CheckReport, Status};

/// Default number of probe points for [`theorem_check`].
pub const DEFAULT_PROBES: usize = 41;

/// λ (L F)(Eη + f) + ⟨η, g⟩ + h with L F evaluated by one engine.
#[derive(Clone, Debug)]
pub struct GeneralizedTransform {
    conjugate: ConvexFunction,
    params: GenParams,
    engine: Engine,
}

impl GeneralizedTransform {
    pub fn new(f: &ConvexFunction, params: GenParams, engine: Engine) -> Result<Self> {
        crate::affine::check_dim(f.dim(), params.dim())?;
        let conjugate = conjugate_with(f, &engine)?;
        Ok(GeneralizedTransform { conjugate, params, engine })
    }

    pub fn params(&self) -> &GenParams {
        &self.params
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    /// L F as evaluated by the engine.
    pub fn conjugate(&self) -> &ConvexFunction {
        &self.conjugate
    }

    pub fn eval(&self, eta: &[f64]) -> Result<ExtendedReal> {
        let p = self.params.as_deform();
        crate::affine::check_dim(p.dim(), eta.len())?;
        let arg = p.inner_map(eta);
        let shift = DVector::from_column_slice(eta).dot(p.c()) + p.d();
        Ok(self.conjugate.eval(arg.as_slice())?.scale(p.lambda())?.add_real(shift))
    }
}

/// One-shot evaluation of the generalized transform at η.
pub fn generalized_conjugate(f: &ConvexFunction, params: &GenParams, eta: &[f64], engine: &Engine) -> Result<ExtendedReal> {
    GeneralizedTransform::new(f, params.clone(), engine.clone())?.eval(eta)
}

/// Both sides of the identity at one probe.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeResult {
    pub eta: Vec<f64>,
    pub left: Option<ExtendedReal>,
    pub right: Option<ExtendedReal>,
    /// |left − right|; 0 when both are +∞, +∞ when exactly one is.
    pub diff: Option<f64>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremReport {
    #[serde(flatten)]
    pub summary: CheckReport,
    pub engine: Engine,
    pub tolerance: f64,
    pub probes: Vec<ProbeResult>,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.summary.passed()
    }

    pub fn max_diff(&self) -> f64 {
        self.summary.worst_violation
    }
}

fn diff(left: ExtendedReal, right: ExtendedReal) -> f64 {
    match (left, right) {
        (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => (a - b).abs(),
        (a, b) if a == b => 0.0,
        _ => f64::INFINITY,
    }
}

fn lerp(lo: f64, hi: f64, t: f64) -> f64 {
    lo + (hi - lo) * t
}

/// Probe points at which both sides of the identity are finite.
///
/// Points u spread over the inner 80% of F's sampling window are pushed
/// through the gradient, η = A⁻¹(∇F(u) − b), so that Aη + b lands in the
/// gradient range of F where F* is finite. Affine F has a single such point;
/// the other probes then check the +∞ pattern around it.
pub fn default_probes(f: &ConvexFunction, p: &DeformParams, count: usize) -> Result<Vec<Vec<f64>>> {
    let count = count.max(1);
    let m = f.dim();
    let ts: Vec<f64> = (0..count).map(|i| if count == 1 { 0.5 } else { 0.1 + 0.8 * i as f64 / (count - 1) as f64 }).collect();
    let window = f.domain().window();
    let diagonal = |t: f64| -> Vec<f64> {
        match &window {
            Some(w) => w.iter().map(|(lo, hi)| lerp(*lo, *hi, t)).collect(),
            None => vec![lerp(-3.0, 3.0, t); m],
        }
    };
    let through_gradient = |u: &[f64]| -> Result<Vec<f64>> { Ok(p.inner_map_inverse(&f.gradient(u)?).as_slice().to_vec()) };

    match f.kind() {
        Kind::Affine { slope, .. } => {
            let center = p.inner_map_inverse(slope);
            let mut probes = vec![center.as_slice().to_vec()];
            probes.extend((1..count).map(|i| {
                let off = lerp(-1.0, 1.0, (i - 1) as f64 / (count - 1).max(2) as f64) + 0.013;
                center.iter().map(|c| c + off).collect()
            }));
            Ok(probes)
        }
        Kind::IndicatorPoint { .. } => Ok(ts.iter().map(|&t| vec![lerp(-3.0, 3.0, t); m]).collect()),
        _ if f.has_gradient() && window.is_some() => {
            let mut probes = Vec::with_capacity(count);
            for &t in &ts {
                probes.push(through_gradient(&diagonal(t))?);
            }
            Ok(probes)
        }
        _ => Ok(ts.iter().map(|&t| p.inner_map_inverse(&diagonal(t)).as_slice().to_vec()).collect()),
    }
}

/// The grid engine on the right side samples F_{P⋄} on the preimage of the
/// left-side window under θ ↦ A⋄θ + b⋄, so both sides see the same nodes of F.
fn right_engine(f: &ConvexFunction, diamond: &DeformParams, engine: &Engine) -> Result<(Engine, Engine)> {
    let Engine::Grid { window, fast } = engine else {
        return Ok((engine.clone(), engine.clone()));
    };
    if f.dim() != 1 {
        return Err(Error::Unsupported("grid theorem check is one-dimensional".into()));
    }
    let left = match window {
        Some(w) => w.clone(),
        None => default_window(f, DEFAULT_GRID_NODES)?,
    };
    let axis = &left.0[0];
    let (x0, x1) = (diamond.inner_map_inverse(&[axis.lo])[0], diamond.inner_map_inverse(&[axis.hi])[0]);
    let right = GridSpec(vec![AxisSpec::new(x0.min(x1), x0.max(x1), axis.n)?]);
    Ok((Engine::Grid { window: Some(left), fast: *fast }, Engine::Grid { window: Some(right), fast: *fast }))
}

/// Compares λ F*(Aη + b) + ⟨η, c⟩ + d against (F_{P⋄})*(η) at each probe.
///
/// An engine error at a probe marks that probe inconclusive; +∞ on exactly
/// one side is a failure regardless of tolerance.
pub fn theorem_check(
    f: &ConvexFunction,
    p: &DeformParams,
    probes: &[Vec<f64>],
    engine: &Engine,
    tolerance: f64,
) -> Result<TheoremReport> {
    crate::affine::check_dim(f.dim(), p.dim())?;
    let diamond = p.diamond();
    let (left_engine, right_engine) = right_engine(f, &diamond, engine)?;
    let left_side = GeneralizedTransform::new(f, GenParams::from(p.clone()), left_engine)?;
    let deformed = deform(f, &diamond)?;
    let right_side = conjugate_with(&deformed, &right_engine)?;

    let mut summary = CheckReport::new("theorem");
    let mut results = Vec::with_capacity(probes.len());
    let mut inconclusive = 0;
    for eta in probes {
        crate::affine::check_dim(f.dim(), eta.len())?;
        let left = left_side.eval(eta);
        let right = right_side.eval(eta);
        let result = match (&left, &right) {
            (Ok(l), Ok(r)) => {
                let d = diff(*l, *r);
                summary.record(d, tolerance, || eta.clone());
                let status = if d <= tolerance { Status::Pass } else { Status::Fail };
                ProbeResult { eta: eta.clone(), left: Some(*l), right: Some(*r), diff: Some(d), status, error: None }
            }
            _ => {
                inconclusive += 1;
                let error = [left.as_ref().err(), right.as_ref().err()]
                    .into_iter()
                    .flatten()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("; ");
                ProbeResult {
                    eta: eta.clone(),
                    left: left.ok(),
                    right: right.ok(),
                    diff: None,
                    status: Status::Inconclusive,
                    error: Some(error),
                }
            }
        };
        results.push(result);
    }
    if inconclusive > 0 {
        if summary.passed() {
            summary.status = Status::Inconclusive;
        }
        summary = summary.with_note(format!("{inconclusive} of {} probes could not be evaluated", probes.len()));
    }
    Ok(TheoremReport { summary, engine: engine.clone(), tolerance, probes: results })
}

/// [`theorem_check`] at the default probe set.
pub fn theorem_check_default(f: &ConvexFunction, p: &DeformParams, engine: &Engine, tolerance: f64) -> Result<TheoremReport> {
    let probes = default_probes(f, p, DEFAULT_PROBES)?;
    theorem_check(f, p, &probes, engine, tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::ext::PosInf;
    use crate::funcspace::lookup_spec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gen(lambda: f64, e: f64, f: f64, g: f64, h: f64) -> GenParams {
        DeformParams::from_slices(lambda, &[e], &[f], &[g], h).unwrap().into()
    }

    #[test]
    fn identity_reduces_to_ordinary_conjugate() {
        let q = lookup_spec("quadratic").unwrap();
        let v = generalized_conjugate(&q, &gen(1.0, 1.0, 0.0, 0.0, 0.0), &[2.0], &Engine::Closed).unwrap();
        assert_eq!(v, ExtendedReal::Finite(2.0));
    }

    #[test]
    fn scaled_argument() {
        let q = lookup_spec("quadratic").unwrap();
        let v = generalized_conjugate(&q, &gen(1.0, 2.0, 0.0, 0.0, 0.0), &[1.0], &Engine::Closed).unwrap();
        assert_eq!(v, ExtendedReal::Finite(2.0));
    }

    #[test]
    fn affine_gives_shifted_indicator() {
        let a = lookup_spec("affine{a=[1],b=0}").unwrap();
        let t = GeneralizedTransform::new(&a, gen(1.0, 1.0, 0.0, 0.0, 3.0), Engine::Closed).unwrap();
        assert_eq!(t.eval(&[1.0]).unwrap(), ExtendedReal::Finite(3.0));
        assert_eq!(t.eval(&[2.0]).unwrap(), PosInf);
    }

    #[test]
    fn theorem_identity_and_quadratic() {
        for spec in ["quadratic", "exp", "affine{a=[2],b=1}", "indicator-point{a=[0.5]}", "power-norm{p=3}"] {
            let f = lookup_spec(spec).unwrap();
            let r = theorem_check_default(&f, &DeformParams::identity(1), &Engine::Closed, 1e-12).unwrap();
            assert!(r.passed(), "{spec}: {}", r.summary.to_json());
        }
        let q = lookup_spec("quadratic").unwrap();
        let p = DeformParams::from_slices(2.0, &[2.0], &[1.0], &[3.0], 5.0).unwrap();
        let probes: Vec<Vec<f64>> = (-3..=3).map(|i| vec![i as f64]).collect();
        let r = theorem_check(&q, &p, &probes, &Engine::Closed, 1e-9).unwrap();
        assert!(r.passed(), "{}", r.summary.to_json());
        assert_eq!(r.probes.len(), 7);
    }

    #[test]
    fn theorem_exp_newton_and_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let exp = lookup_spec("exp").unwrap();
        for _ in 0..5 {
            let p = DeformParams::random(&mut rng, 1, 1e3);
            let r = theorem_check_default(&exp, &p, &Engine::newton(), 1e-6).unwrap();
            assert!(r.passed(), "{}", r.summary.to_json());
            let r = theorem_check_default(&exp, &p, &Engine::grid(None), 1e-3).unwrap();
            assert!(r.passed(), "{}", r.summary.to_json());
        }
    }

    #[test]
    fn wrong_diamond_is_detected() {
        // deforming by P instead of P⋄ breaks the identity
        let q = lookup_spec("quadratic").unwrap();
        let p = DeformParams::from_slices(2.0, &[2.0], &[1.0], &[3.0], 5.0).unwrap();
        let probes = default_probes(&q, &p, 9).unwrap();
        let left = GeneralizedTransform::new(&q, p.clone().into(), Engine::Closed).unwrap();
        let wrong = conjugate_with(&deform(&q, &p).unwrap(), &Engine::Closed).unwrap();
        let worst = probes.iter().map(|e| diff(left.eval(e).unwrap(), wrong.eval(e).unwrap())).fold(0.0, f64::max);
        assert!(worst > 1.0);
    }

    #[test]
    fn domain_mismatch_is_a_hard_failure() {
        assert_eq!(diff(PosInf, ExtendedReal::Finite(1.0)), f64::INFINITY);
        assert_eq!(diff(PosInf, PosInf), 0.0);
    }

    #[test]
    fn engine_errors_are_inconclusive() {
        let exp = lookup_spec("exp").unwrap();
        let p = DeformParams::from_slices(1.5, &[2.0], &[0.5], &[1.0], 0.0).unwrap();
        // η = −10 puts Aη + b outside the gradient range of exp
        let r = theorem_check(&exp, &p, &[vec![-10.0], vec![0.3]], &Engine::newton(), 1e-6).unwrap();
        assert_eq!(r.probes[0].status, Status::Inconclusive);
        assert_eq!(r.probes[1].status, Status::Pass);
        assert_eq!(r.summary.status, Status::Inconclusive);
    }
}
