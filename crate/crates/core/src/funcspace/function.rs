use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::domain::{near, Domain};
use super::ext::{ExtendedReal, PosInf};
use super::grid::GridFunction;
use crate::affine::DeformParams;
use crate::error::{Error, Result};
use crate::legendre::newton::{conjugate_newton, NewtonOptions};

/// Which smoothness classes a function is known to belong to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Class {
    /// Proper, lsc, convex.
    pub convex: bool,
    pub strictly_convex: bool,
    /// Differentiable on its open domain and steep at the boundary.
    pub legendre_type: bool,
    /// Twice continuously differentiable on the domain.
    pub smooth: bool,
}

impl Class {
    pub(crate) const CONVEX: Class = Class { convex: true, strictly_convex: false, legendre_type: false, smooth: false };
    pub(crate) const LEGENDRE: Class = Class { convex: true, strictly_convex: true, legendre_type: true, smooth: true };
    pub(crate) const STRICT_SMOOTH: Class = Class { convex: true, strictly_convex: true, legendre_type: false, smooth: true };
}

/// Value assigned on part of the domain boundary (the lsc closure).
#[derive(Clone, Debug, PartialEq)]
pub enum Boundary {
    Point { at: Vec<f64>, value: f64 },
    Sphere { radius: f64, value: f64 },
}

impl Boundary {
    fn value_at(&self, theta: &[f64]) -> Option<f64> {
        match self {
            Boundary::Point { at, value } => near(theta, at).then_some(*value),
            Boundary::Sphere { radius, value } => {
                let r = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
                ((r - radius).abs() <= 1e-12 * radius.max(1.0)).then_some(*value)
            }
        }
    }
}

/// The formula behind a [`ConvexFunction`].
#[derive(Clone, Debug)]
pub enum Kind {
    /// ⟨a, θ⟩ + b.
    Affine { slope: Vec<f64>, offset: f64 },
    /// 1_{a}(θ) + offset.
    IndicatorPoint { at: Vec<f64>, offset: f64 },
    /// exp θ.
    Exp,
    /// η log η − η on η > 0, closed by 0 at η = 0.
    Entropy,
    /// exp|θ| − |θ| − 1, optionally restricted to θ > 0.
    ExpAbs { positive: bool },
    /// (1 + |η|) log(1 + |η|) − |η|, optionally restricted to η > 0.
    ExpAbsConjugate { positive: bool },
    /// (1/p)‖θ‖₂ᵖ.
    PowerNorm { p: f64 },
    /// Indicator of the closed ball of the given radius.
    BallIndicator { radius: f64 },
    /// ½(θ−m)ᵀQ(θ−m) + ⟨l, θ⟩ + k with Q symmetric positive definite.
    ///
    /// Keeping the center m separate lets deformation and conjugation stay in
    /// this form without expanding the square, which would lose precision to
    /// cancellation when Q is ill-conditioned.
    ///
    /// When `inv_factor` holds a lower-triangular L with Q = (LLᵀ)⁻¹, the
    /// quadratic term is evaluated as ½‖L⁻¹(θ−m)‖² by forward substitution
    /// instead of through the explicit inverse.
    Quadratic { q: DMatrix<f64>, center: DVector<f64>, l: DVector<f64>, k: f64, inv_factor: Option<DMatrix<f64>> },
    /// ¼(θ₁²/θ₂ + θ₁² + θ₂²) on ℝ × ℝ₊.
    Rockafellar,
    /// −log θ on θ > 0.
    NegLog,
    /// −1 − log(−η) on η < 0.
    NegLogConjugate,
    /// λ F(Aθ + b) + ⟨θ, c⟩ + d.
    Deformed { base: Arc<ConvexFunction>, params: DeformParams },
    /// The conjugate of `base` evaluated by gradient inversion.
    NumericConjugate { base: Arc<ConvexFunction>, options: NewtonOptions },
    /// The discrete conjugate of a sampled primal: max over nodes.
    DiscreteConjugate { primal: Arc<GridFunction> },
}

/// An extended-real-valued convex function with a declared domain.
#[derive(Clone, Debug)]
pub struct ConvexFunction {
    kind: Kind,
    domain: Domain,
    boundary: Option<Boundary>,
    label: String,
    class: Class,
}

impl ConvexFunction {
    pub(crate) fn from_kind(
        kind: Kind,
        domain: Domain,
        boundary: Option<Boundary>,
        label: impl Into<String>,
        class: Class,
    ) -> Self {
        ConvexFunction { kind, domain, boundary, label: label.into(), class }
    }

    pub(crate) fn quadratic_unchecked(q: DMatrix<f64>, center: DVector<f64>, l: DVector<f64>, k: f64, label: String) -> Self {
        let dim = l.len();
        Self::from_kind(Kind::Quadratic { q, center, l, k, inv_factor: None }, Domain::whole(dim), None, label, Class::LEGENDRE)
    }

    /// Quadratic whose matrix is (LLᵀ)⁻¹ for the given lower-triangular `factor`.
    pub(crate) fn quadratic_from_inverse_factor(
        q: DMatrix<f64>,
        factor: DMatrix<f64>,
        center: DVector<f64>,
        l: DVector<f64>,
        k: f64,
        label: String,
    ) -> Self {
        let dim = l.len();
        let kind = Kind::Quadratic { q, center, l, k, inv_factor: Some(factor) };
        Self::from_kind(kind, Domain::whole(dim), None, label, Class::LEGENDRE)
    }

    pub(crate) fn affine_unchecked(slope: Vec<f64>, offset: f64, label: String) -> Self {
        let dim = slope.len();
        Self::from_kind(Kind::Affine { slope, offset }, Domain::whole(dim), None, label, Class { smooth: true, ..Class::CONVEX })
    }

    pub(crate) fn indicator_unchecked(at: Vec<f64>, offset: f64, label: String) -> Self {
        let domain = Domain::Singleton { point: at.clone() };
        Self::from_kind(Kind::IndicatorPoint { at, offset }, domain, None, label, Class::CONVEX)
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }
    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn boundary(&self) -> Option<&Boundary> {
        self.boundary.as_ref()
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn class(&self) -> Class {
        self.class
    }
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    fn check_dim(&self, theta: &[f64]) -> Result<()> {
        crate::affine::check_dim(self.dim(), theta.len())
    }

    /// F(θ); +∞ outside the domain except where a boundary override applies.
    pub fn eval(&self, theta: &[f64]) -> Result<ExtendedReal> {
        self.check_dim(theta)?;
        match &self.kind {
            Kind::Deformed { base, params } => {
                let inner = params.inner_map(theta);
                let shift = DVector::from_column_slice(theta).dot(params.c()) + params.d();
                Ok(base.eval(inner.as_slice())?.scale(params.lambda())?.add_real(shift))
            }
            Kind::NumericConjugate { base, options } => {
                let start = base.domain().interior_point();
                let sol = conjugate_newton(base, theta, &start, options)?;
                Ok(ExtendedReal::real(sol.value))
            }
            Kind::DiscreteConjugate { primal } => Ok(primal.conjugate_at(theta)?.0),
            _ => {
                if self.domain.contains(theta) {
                    Ok(ExtendedReal::real(self.formula(theta)))
                } else if let Some(v) = self.boundary.as_ref().and_then(|b| b.value_at(theta)) {
                    Ok(ExtendedReal::real(v))
                } else {
                    Ok(PosInf)
                }
            }
        }
    }

    /// Finite value, or an error naming the point when F(θ) is infinite.
    pub fn eval_finite(&self, theta: &[f64]) -> Result<f64> {
        self.eval(theta)?.finite().ok_or_else(|| Error::OutsideDomain(format!("{} at {theta:?}", self.label)))
    }

    /// The closed-form expression, valid on the open domain.
    fn formula(&self, t: &[f64]) -> f64 {
        match &self.kind {
            Kind::Affine { slope, offset } => dot(slope, t) + offset,
            Kind::IndicatorPoint { offset, .. } => *offset,
            Kind::Exp => t[0].exp(),
            Kind::Entropy => t[0] * t[0].ln() - t[0],
            Kind::ExpAbs { .. } => {
                let a = t[0].abs();
                a.exp_m1() - a
            }
            Kind::ExpAbsConjugate { .. } => {
                let a = t[0].abs();
                (1.0 + a) * a.ln_1p() - a
            }
            Kind::PowerNorm { p } => norm(t).powf(*p) / p,
            Kind::BallIndicator { .. } => 0.0,
            Kind::Quadratic { q, center, l, k, inv_factor } => {
                let x = DVector::from_column_slice(t);
                let y = &x - center;
                let quad = match inv_factor.as_ref().and_then(|f| f.solve_lower_triangular(&y)) {
                    Some(z) => z.norm_squared(),
                    None => y.dot(&(q * &y)),
                };
                0.5 * quad + l.dot(&x) + k
            }
            Kind::Rockafellar => 0.25 * (t[0] * t[0] / t[1] + t[0] * t[0] + t[1] * t[1]),
            Kind::NegLog => -t[0].ln(),
            Kind::NegLogConjugate => -1.0 - (-t[0]).ln(),
            Kind::Deformed { .. } | Kind::NumericConjugate { .. } | Kind::DiscreteConjugate { .. } => {
                unreachable!("composite kinds are evaluated in eval")
            }
        }
    }

    pub fn has_gradient(&self) -> bool {
        match &self.kind {
            Kind::IndicatorPoint { .. } | Kind::DiscreteConjugate { .. } => false,
            Kind::Deformed { base, .. } => base.has_gradient(),
            _ => true,
        }
    }

    /// ∇F(θ) at an interior point.
    pub fn gradient(&self, t: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(t)?;
        let no_grad = || Error::NotDifferentiable(self.label.clone(), "a gradient");
        match &self.kind {
            Kind::Deformed { base, params } => {
                let inner = params.inner_map(t);
                let g = DVector::from_vec(base.gradient(inner.as_slice())?);
                let out = params.a().transpose() * g * params.lambda() + params.c();
                return Ok(out.as_slice().to_vec());
            }
            Kind::NumericConjugate { base, options } => {
                let start = base.domain().interior_point();
                return Ok(conjugate_newton(base, t, &start, options)?.argmax);
            }
            Kind::IndicatorPoint { .. } | Kind::DiscreteConjugate { .. } => return Err(no_grad()),
            _ => {}
        }
        if !self.domain.contains(t) {
            return Err(Error::OutsideDomain(format!("{} gradient at {t:?}", self.label)));
        }
        Ok(match &self.kind {
            Kind::Affine { slope, .. } => slope.clone(),
            Kind::Exp => vec![t[0].exp()],
            Kind::Entropy => vec![t[0].ln()],
            Kind::ExpAbs { .. } => vec![t[0].signum() * t[0].abs().exp_m1()],
            Kind::ExpAbsConjugate { .. } => vec![t[0].signum() * t[0].abs().ln_1p()],
            Kind::PowerNorm { p } => {
                let r = norm(t);
                if r == 0.0 {
                    if *p > 1.0 {
                        vec![0.0; t.len()]
                    } else {
                        return Err(no_grad());
                    }
                } else {
                    let s = r.powf(p - 2.0);
                    t.iter().map(|x| s * x).collect()
                }
            }
            Kind::BallIndicator { .. } => vec![0.0; t.len()],
            Kind::Quadratic { q, center, l, .. } => (q * (DVector::from_column_slice(t) - center) + l).as_slice().to_vec(),
            Kind::Rockafellar => {
                let (x, y) = (t[0], t[1]);
                vec![0.25 * (2.0 * x / y + 2.0 * x), 0.25 * (-x * x / (y * y) + 2.0 * y)]
            }
            Kind::NegLog => vec![-1.0 / t[0]],
            Kind::NegLogConjugate => vec![-1.0 / t[0]],
            _ => unreachable!(),
        })
    }

    pub fn has_hessian(&self) -> bool {
        match &self.kind {
            Kind::IndicatorPoint { .. } | Kind::DiscreteConjugate { .. } => false,
            Kind::Deformed { base, .. } | Kind::NumericConjugate { base, .. } => base.has_hessian(),
            _ => true,
        }
    }

    /// ∇²F(θ) at an interior point.
    pub fn hessian(&self, t: &[f64]) -> Result<DMatrix<f64>> {
        self.check_dim(t)?;
        let m = t.len();
        let no_hess = || Error::NotDifferentiable(self.label.clone(), "a hessian");
        match &self.kind {
            Kind::Deformed { base, params } => {
                let inner = params.inner_map(t);
                let h = base.hessian(inner.as_slice())?;
                return Ok(params.a().transpose() * h * params.a() * params.lambda());
            }
            Kind::NumericConjugate { base, options } => {
                let start = base.domain().interior_point();
                let sol = conjugate_newton(base, t, &start, options)?;
                let h = base.hessian(&sol.argmax)?;
                return h.try_inverse().ok_or(Error::HessianNotSpd(sol.argmax));
            }
            Kind::IndicatorPoint { .. } | Kind::DiscreteConjugate { .. } => return Err(no_hess()),
            _ => {}
        }
        if !self.domain.contains(t) {
            return Err(Error::OutsideDomain(format!("{} hessian at {t:?}", self.label)));
        }
        let scalar = |v: f64| DMatrix::from_element(1, 1, v);
        Ok(match &self.kind {
            Kind::Affine { .. } | Kind::BallIndicator { .. } => DMatrix::zeros(m, m),
            Kind::Exp => scalar(t[0].exp()),
            Kind::Entropy => scalar(1.0 / t[0]),
            Kind::ExpAbs { .. } => scalar(t[0].abs().exp()),
            Kind::ExpAbsConjugate { .. } => scalar(1.0 / (1.0 + t[0].abs())),
            Kind::PowerNorm { p } => {
                let r = norm(t);
                if r == 0.0 {
                    if *p == 2.0 {
                        DMatrix::identity(m, m)
                    } else if *p > 2.0 {
                        DMatrix::zeros(m, m)
                    } else {
                        return Err(no_hess());
                    }
                } else {
                    let x = DVector::from_column_slice(t);
                    let outer = &x * x.transpose() / (r * r);
                    (DMatrix::identity(m, m) + outer * (p - 2.0)) * r.powf(p - 2.0)
                }
            }
            Kind::Quadratic { q, .. } => q.clone(),
            Kind::Rockafellar => {
                let (x, y) = (t[0], t[1]);
                let off = -0.5 * x / (y * y);
                DMatrix::from_row_slice(2, 2, &[0.25 * (2.0 / y + 2.0), off, off, 0.25 * (2.0 * x * x / (y * y * y) + 2.0)])
            }
            Kind::NegLog | Kind::NegLogConjugate => scalar(1.0 / (t[0] * t[0])),
            _ => unreachable!(),
        })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
