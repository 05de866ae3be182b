//! Bregman and Fenchel-Young divergences of a conjugate pair, the canonical
//! divergence in mixed coordinates, and the Hessian metric.
//!
//! For a Legendre-type pair and linked points θ′ = ∇F*(η′), η = ∇F(θ):
//!
//! ```text
//! Y(θ : η′) = F(θ) + F*(η′) − ⟨θ, η′⟩ = B_F(θ : θ′) = B_{F*}(η′ : η)
//! ```

use nalgebra::DMatrix;
use serde::Serialize;

use crate::affine::{deform, DeformParams};
use crate::error::{Error, Result};
use crate::funcspace::function::dot;
use crate::funcspace::{grad_fd, hessian_fd, ConvexFunction};
use crate::legendre::ConjugatePair;
use crate::report::CheckReport;

/// Tolerance for η = ∇F(θ) in a [`DualPoint`], relative to max(1, ‖η‖∞).
pub const CONSISTENCY_TOL: f64 = 1e-6;

/// Where a gradient came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientPath {
    Analytic,
    FiniteDifference,
}

/// ∇F(θ), analytic when available, central differences otherwise.
pub fn gradient(f: &ConvexFunction, theta: &[f64]) -> Result<(Vec<f64>, GradientPath)> {
    if f.has_gradient() {
        if let Ok(g) = f.gradient(theta) {
            return Ok((g, GradientPath::Analytic));
        }
    }
    Ok((grad_fd(f, theta, crate::funcspace::fd::DEFAULT_STEP)?, GradientPath::FiniteDifference))
}

fn combine(a: GradientPath, b: GradientPath) -> GradientPath {
    if a == GradientPath::Analytic && b == GradientPath::Analytic {
        GradientPath::Analytic
    } else {
        GradientPath::FiniteDifference
    }
}

fn interior(f: &ConvexFunction, x: &[f64]) -> Result<()> {
    crate::affine::check_dim(f.dim(), x.len())?;
    if f.domain().contains(x) || matches!(f.kind(), crate::funcspace::Kind::NumericConjugate { .. }) {
        Ok(())
    } else {
        Err(Error::OutsideDomain(format!("{} needs an interior point, got {x:?}", f.label())))
    }
}

/// B_F(θ : θ′) = F(θ) − F(θ′) − ⟨θ − θ′, ∇F(θ′)⟩.
pub fn bregman(f: &ConvexFunction, theta: &[f64], theta_prime: &[f64]) -> Result<f64> {
    bregman_with_path(f, theta, theta_prime).map(|(v, _)| v)
}

fn bregman_with_path(f: &ConvexFunction, theta: &[f64], theta_prime: &[f64]) -> Result<(f64, GradientPath)> {
    interior(f, theta)?;
    interior(f, theta_prime)?;
    let (g, path) = gradient(f, theta_prime)?;
    let diff: Vec<f64> = theta.iter().zip(theta_prime).map(|(a, b)| a - b).collect();
    Ok((f.eval_finite(theta)? - f.eval_finite(theta_prime)? - dot(&diff, &g), path))
}

/// Y_{F,F*}(θ : η′) = F(θ) + F*(η′) − ⟨θ, η′⟩.
pub fn fenchel_young(f: &ConvexFunction, f_star: &ConvexFunction, theta: &[f64], eta_prime: &[f64]) -> Result<f64> {
    crate::affine::check_dim(f.dim(), theta.len())?;
    crate::affine::check_dim(f_star.dim(), eta_prime.len())?;
    Ok(f.eval_finite(theta)? + f_star.eval_finite(eta_prime)? - dot(theta, eta_prime))
}

/// A point given in both the primal (θ) and dual (η) coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualPoint {
    pub theta: Vec<f64>,
    pub eta: Vec<f64>,
    /// η = ∇F(θ) within [`CONSISTENCY_TOL`].
    pub consistent: bool,
}

impl DualPoint {
    /// Pairs θ with η = ∇F(θ).
    pub fn from_theta(f: &ConvexFunction, theta: &[f64]) -> Result<Self> {
        let (eta, _) = gradient(f, theta)?;
        Ok(DualPoint { theta: theta.to_vec(), eta, consistent: true })
    }

    /// Pairs η with θ = ∇F*(η).
    pub fn from_eta(pair: &ConjugatePair, eta: &[f64]) -> Result<Self> {
        let (theta, _) = gradient(&pair.dual, eta)?;
        let mut p = DualPoint { theta, eta: eta.to_vec(), consistent: false };
        p.consistent = p.check(&pair.primal)?;
        Ok(p)
    }

    /// Takes both coordinates as given and records whether they are linked.
    pub fn new(f: &ConvexFunction, theta: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        crate::affine::check_dim(theta.len(), eta.len())?;
        let mut p = DualPoint { theta, eta, consistent: false };
        p.consistent = p.check(f)?;
        Ok(p)
    }

    fn check(&self, f: &ConvexFunction) -> Result<bool> {
        let (g, _) = gradient(f, &self.theta)?;
        let scale = self.eta.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        Ok(g.iter().zip(&self.eta).all(|(a, b)| (a - b).abs() <= CONSISTENCY_TOL * scale))
    }

    /// The same point seen from the dual side, where θ and η swap roles.
    pub fn swapped(&self) -> DualPoint {
        DualPoint { theta: self.eta.clone(), eta: self.theta.clone(), consistent: self.consistent }
    }
}

/// D(p : q) = F(θ(p)) + F*(η(q)) − ⟨θ(p), η(q)⟩.
pub fn flat_divergence(pair: &ConjugatePair, p: &DualPoint, q: &DualPoint) -> Result<f64> {
    for point in [p, q] {
        if !point.consistent {
            return Err(Error::InconsistentPoint(format!("theta {:?} and eta {:?} are not linked", point.theta, point.eta)));
        }
    }
    fenchel_young(&pair.primal, &pair.dual, &p.theta, &q.eta)
}

/// θ, θ′ = ∇F*(η′), η = ∇F(θ), η′.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceInputs {
    pub theta: Vec<f64>,
    pub theta_prime: Vec<f64>,
    pub eta: Vec<f64>,
    pub eta_prime: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub bregman_primal: f64,
    pub bregman_dual: f64,
    pub fenchel_young: f64,
    pub inputs: DivergenceInputs,
    pub gradient_path: GradientPath,
}

impl DivergenceReport {
    /// Largest pairwise gap between the three values.
    pub fn spread(&self) -> f64 {
        let v = [self.bregman_primal, self.bregman_dual, self.fenchel_young];
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }
}

/// Y(θ : η′), B_F(θ : θ′) and B_{F*}(η′ : η) with θ′ and η linked through the
/// gradient maps.
pub fn divergence_report(pair: &ConjugatePair, theta: &[f64], eta_prime: &[f64]) -> Result<DivergenceReport> {
    let (eta, path_f) = gradient(&pair.primal, theta)?;
    let (theta_prime, path_g) = gradient(&pair.dual, eta_prime)?;
    let (bregman_primal, p1) = bregman_with_path(&pair.primal, theta, &theta_prime)?;
    let (bregman_dual, p2) = bregman_with_path(&pair.dual, eta_prime, &eta)?;
    let fenchel_young = fenchel_young(&pair.primal, &pair.dual, theta, eta_prime)?;
    Ok(DivergenceReport {
        bregman_primal,
        bregman_dual,
        fenchel_young,
        inputs: DivergenceInputs { theta: theta.to_vec(), theta_prime, eta, eta_prime: eta_prime.to_vec() },
        gradient_path: combine(combine(path_f, path_g), combine(p1, p2)),
    })
}

/// The two sides of the 1/λ affine-invariance identity.
#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    #[serde(flatten)]
    pub summary: CheckReport,
    /// D(p : q) for the undeformed pair.
    pub original: f64,
    /// (1/λ) Y_{F_P, F*_{P⋄}}(θ̄(p) : η̄(q)).
    pub deformed: f64,
    pub theta_bar: Vec<f64>,
    pub eta_bar: Vec<f64>,
}

/// Checks D(p : q) = (1/λ) Y_{F_P, F*_{P⋄}}(θ̄(p) : η̄(q)) with
/// θ̄ = A⁻¹(θ − b) and η̄(q) = ∇F_P(θ̄(q)).
///
/// F*_{P⋄} is the deformation of the engine's F* by P⋄, so the right side
/// never conjugates F_P directly.
pub fn invariance_check(
    pair: &ConjugatePair,
    params: &DeformParams,
    p: &DualPoint,
    q: &DualPoint,
    tolerance: f64,
) -> Result<InvarianceReport> {
    let original = flat_divergence(pair, p, q)?;
    let f_p = deform(&pair.primal, params)?;
    let f_star_p = deform(&pair.dual, &params.diamond())?;
    let theta_bar = params.inner_map_inverse(&p.theta).as_slice().to_vec();
    let theta_bar_q = params.inner_map_inverse(&q.theta).as_slice().to_vec();
    let (eta_bar, _) = gradient(&f_p, &theta_bar_q)?;
    let deformed = fenchel_young(&f_p, &f_star_p, &theta_bar, &eta_bar)? / params.lambda();
    let mut summary = CheckReport::new("invariance");
    let gap = (original - deformed).abs();
    summary.record(gap, tolerance, || [p.theta.clone(), q.theta.clone()].concat());
    Ok(InvarianceReport { summary, original, deformed, theta_bar, eta_bar })
}

/// g(θ) = ∇²F(θ) by central second differences, with an SPD flag.
#[derive(Clone, Debug, PartialEq)]
pub struct HessianMetric {
    pub matrix: DMatrix<f64>,
    pub spd: bool,
}

pub fn hessian_metric(f: &ConvexFunction, theta: &[f64], h: f64) -> Result<HessianMetric> {
    let matrix = hessian_fd(f, theta, h)?;
    let spd = matrix.clone().cholesky().is_some();
    Ok(HessianMetric { matrix, spd })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::fd::DEFAULT_HESSIAN_STEP;
    use crate::funcspace::lookup_spec;
    use crate::legendre::Engine;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pair(spec: &str, engine: Engine) -> ConjugatePair {
        ConjugatePair::new(lookup_spec(spec).unwrap(), engine).unwrap()
    }

    #[test]
    fn bregman_examples() {
        let q = lookup_spec("quadratic").unwrap();
        assert_eq!(bregman(&q, &[3.0], &[3.0]).unwrap(), 0.0);
        assert!((bregman(&q, &[3.0], &[1.0]).unwrap() - 2.0).abs() < 1e-15);
        let e = lookup_spec("exp").unwrap();
        assert!((bregman(&e, &[1.0], &[0.0]).unwrap() - (1f64.exp() - 2.0)).abs() < 1e-15);
        let nl = lookup_spec("neg-log").unwrap();
        assert!(bregman(&nl, &[-1.0], &[1.0]).is_err());
    }

    #[test]
    fn fenchel_young_examples() {
        let q = pair("quadratic", Engine::Closed);
        assert_eq!(fenchel_young(&q.primal, &q.dual, &[2.0], &[2.0]).unwrap(), 0.0);
        assert!((fenchel_young(&q.primal, &q.dual, &[3.0], &[1.0]).unwrap() - 2.0).abs() < 1e-15);
        let p3 = pair("power-norm{p=3}", Engine::Closed);
        assert!(fenchel_young(&p3.primal, &p3.dual, &[1.0], &[1.0]).unwrap().abs() < 1e-15);
        let e = pair("exp", Engine::Closed);
        assert!(fenchel_young(&e.primal, &e.dual, &[0.0], &[-1.0]).is_err());
    }

    #[test]
    fn flat_divergence_examples() {
        let q = pair("quadratic", Engine::Closed);
        let p = DualPoint::from_theta(&q.primal, &[3.0]).unwrap();
        let r = DualPoint::from_theta(&q.primal, &[1.0]).unwrap();
        assert_eq!(flat_divergence(&q, &p, &p).unwrap(), 0.0);
        assert!((flat_divergence(&q, &p, &r).unwrap() - 2.0).abs() < 1e-15);
        let bad = DualPoint::new(&q.primal, vec![3.0], vec![1.0]).unwrap();
        assert!(!bad.consistent);
        assert!(matches!(flat_divergence(&q, &bad, &r), Err(Error::InconsistentPoint(_))));
    }

    #[test]
    fn duality_flip() {
        let e = pair("exp", Engine::Closed);
        let p = DualPoint::from_theta(&e.primal, &[0.4]).unwrap();
        let q = DualPoint::from_theta(&e.primal, &[-1.3]).unwrap();
        let forward = flat_divergence(&e, &q, &p).unwrap();
        let flipped = flat_divergence(&e.swapped(), &p.swapped(), &q.swapped()).unwrap();
        assert!((forward - flipped).abs() < 1e-12);
    }

    #[test]
    fn triple_equivalence_for_linked_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for spec in ["exp", "quadratic-form{Q=[[2,0.3],[0.3,1]],l=[1,-1]}", "neg-log", "power-norm{p=3}"] {
            let pr = pair(spec, Engine::Closed);
            for _ in 0..20 {
                let theta: Vec<f64> = (0..pr.primal.dim()).map(|_| rng.gen_range(0.2..2.0)).collect();
                let other: Vec<f64> = (0..pr.primal.dim()).map(|_| rng.gen_range(0.2..2.0)).collect();
                let eta_prime = pr.primal.gradient(&other).unwrap();
                let rep = divergence_report(&pr, &theta, &eta_prime).unwrap();
                assert!(rep.spread() < 1e-9, "{spec}: {rep:?}");
                assert_eq!(rep.gradient_path, GradientPath::Analytic);
            }
        }
    }

    #[test]
    fn invariance_examples() {
        let q = pair("quadratic", Engine::Closed);
        let p = DualPoint::from_theta(&q.primal, &[3.0]).unwrap();
        let r = DualPoint::from_theta(&q.primal, &[1.0]).unwrap();
        let id = invariance_check(&q, &DeformParams::identity(1), &p, &r, 1e-12).unwrap();
        assert!(id.summary.passed());
        let scaled = DeformParams::from_slices(2.0, &[1.0], &[0.0], &[0.0], 0.0).unwrap();
        let rep = invariance_check(&q, &scaled, &p, &r, 1e-9).unwrap();
        assert!(rep.summary.passed() && (rep.deformed - 2.0).abs() < 1e-9, "{rep:?}");

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let e = pair("exp", Engine::newton());
        for _ in 0..10 {
            let params = DeformParams::random(&mut rng, 1, 1e3);
            let a = DualPoint::from_theta(&e.primal, &[rng.gen_range(-2.0..2.0)]).unwrap();
            let b = DualPoint::from_theta(&e.primal, &[rng.gen_range(-2.0..2.0)]).unwrap();
            let rep = invariance_check(&e, &params, &a, &b, 1e-5).unwrap();
            assert!(rep.summary.passed(), "{rep:?}");
        }
    }

    #[test]
    fn hessian_metric_examples() {
        let q = lookup_spec("quadratic{dim=2}").unwrap();
        let g = hessian_metric(&q, &[0.5, -1.0], DEFAULT_HESSIAN_STEP).unwrap();
        assert!((g.matrix - DMatrix::identity(2, 2)).amax() < 1e-6 && g.spd);
        let e = pair("exp", Engine::Closed);
        let g = hessian_metric(&e.primal, &[0.0], DEFAULT_HESSIAN_STEP).unwrap();
        assert!((g.matrix[(0, 0)] - 1.0).abs() < 1e-5);
        // g(θ) = g*(∇F(θ))⁻¹
        let theta = 0.7f64;
        let g_star = hessian_metric(&e.dual, &[theta.exp()], DEFAULT_HESSIAN_STEP).unwrap();
        let g = hessian_metric(&e.primal, &[theta], DEFAULT_HESSIAN_STEP).unwrap();
        assert!((g.matrix[(0, 0)] * g_star.matrix[(0, 0)] - 1.0).abs() < 1e-4);
        let a = lookup_spec("affine{a=[1,1]}").unwrap();
        assert!(!hessian_metric(&a, &[0.0, 0.0], DEFAULT_HESSIAN_STEP).unwrap().spd);
    }
}
