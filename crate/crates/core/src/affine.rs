//! The parameter space ℙ = ℝ₊ × GL(ℝᵐ) × ℝᵐ × ℝᵐ × ℝ, the deformation
//! F ↦ F_P with F_P(θ) = λ F(Aθ + b) + ⟨θ, c⟩ + d, and the diamond involution
//! P ↦ P⋄ under which conjugation commutes with deformation:
//! L(F_P) = (L F)_{P⋄}.
//!
//! The diamond map is
//!
//! ```text
//! P⋄ = (λ, (1/λ) A⁻ᵀ, −(1/λ) A⁻ᵀ c, −A⁻¹ b, ⟨A⁻¹ b, c⟩ − d)
//! ```
//!
//! which reduces to the familiar `A⁻¹` form whenever `A` is symmetric (in
//! particular in one dimension).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{ConvexFunction, Kind};

/// Relative determinant cliff below which a matrix is treated as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

/// Deformation parameters P = (λ, A, b, c, d).
#[derive(Clone, Debug, PartialEq)]
pub struct DeformParams {
    lambda: f64,
    a: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    d: f64,
}

/// Parameters (λ, E, f, g, h) of the generalized transform
/// λ (L F)(Eη + f) + ⟨η, g⟩ + h.
///
/// Structurally identical to [`DeformParams`]; the two types mark which side
/// of the duality the tuple acts on. Conversion between them is the identity on
/// fields.
#[derive(Clone, Debug, PartialEq)]
pub struct GenParams(DeformParams);

/// Checks |det A| > threshold · ‖A‖∞ᵐ using an LU factorization with partial
/// pivoting, and returns the inverse.
pub fn checked_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(Error::InvalidParams(format!("A must be square, got {}x{}", a.nrows(), a.ncols())));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParams("A has non-finite entries".into()));
    }
    let m = a.nrows();
    let norm_inf = a.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let lu = a.clone().lu();
    let det = lu.determinant();
    if !(det.abs() > SINGULAR_THRESHOLD * norm_inf.powi(m as i32)) {
        return Err(Error::Singular(format!("|det A| = {:e} below threshold", det.abs())));
    }
    lu.try_inverse().ok_or_else(|| Error::Singular("LU inverse failed".into()))
}

impl DeformParams {
    pub fn new(lambda: f64, a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>, d: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParams(format!("lambda must be > 0, got {lambda}")));
        }
        let a_inv = checked_inverse(&a)?;
        let m = a.nrows();
        if b.len() != m || c.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: if b.len() != m { b.len() } else { c.len() } });
        }
        if !d.is_finite() || b.iter().chain(c.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("b, c, d must be finite".into()));
        }
        Ok(DeformParams { lambda, a, a_inv, b, c, d })
    }

    /// Convenience constructor from plain slices; `a` is row-major.
    pub fn from_slices(lambda: f64, a: &[f64], b: &[f64], c: &[f64], d: f64) -> Result<Self> {
        let m = b.len();
        if a.len() != m * m {
            return Err(Error::DimensionMismatch { expected: m * m, got: a.len() });
        }
        Self::new(lambda, DMatrix::from_row_slice(m, m, a), DVector::from_column_slice(b), DVector::from_column_slice(c), d)
    }

    /// (1, I, 0, 0, 0).
    pub fn identity(dim: usize) -> Self {
        DeformParams {
            lambda: 1.0,
            a: DMatrix::identity(dim, dim),
            a_inv: DMatrix::identity(dim, dim),
            b: DVector::zeros(dim),
            c: DVector::zeros(dim),
            d: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn a_inv(&self) -> &DMatrix<f64> {
        &self.a_inv
    }
    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }
    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn is_identity(&self) -> bool {
        self.lambda == 1.0
            && self.a == DMatrix::identity(self.dim(), self.dim())
            && self.b.iter().all(|x| *x == 0.0)
            && self.c.iter().all(|x| *x == 0.0)
            && self.d == 0.0
    }

    /// Aθ + b.
    pub fn inner_map(&self, theta: &[f64]) -> DVector<f64> {
        &self.a * DVector::from_column_slice(theta) + &self.b
    }

    /// A⁻¹(u − b): the point whose image under the inner map is `u`.
    pub fn inner_map_inverse(&self, u: &[f64]) -> DVector<f64> {
        &self.a_inv * (DVector::from_column_slice(u) - &self.b)
    }

    /// The diamond involution P ↦ P⋄.
    pub fn diamond(&self) -> DeformParams {
        let lambda = self.lambda;
        let a_inv_t = self.a_inv.transpose();
        let a_inv_b = &self.a_inv * &self.b;
        DeformParams {
            lambda,
            a: &a_inv_t / lambda,
            a_inv: self.a.transpose() * lambda,
            b: -(&a_inv_t * &self.c) / lambda,
            c: -a_inv_b.clone(),
            d: a_inv_b.dot(&self.c) - self.d,
        }
    }

    /// Largest componentwise relative deviation from `other`, one number per
    /// component (λ, A, b, c, d) measured in the ∞-norm with a unit floor on the
    /// denominator.
    pub fn relative_deviation(&self, other: &DeformParams) -> [f64; 5] {
        fn rel(diff: f64, scale: f64) -> f64 {
            diff / scale.max(1.0)
        }
        let inf = |v: &DMatrix<f64>| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let vinf = |v: &DVector<f64>| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        [
            rel((self.lambda - other.lambda).abs(), self.lambda.abs()),
            rel(inf(&(&self.a - &other.a)), inf(&self.a)),
            rel(vinf(&(&self.b - &other.b)), vinf(&self.b)),
            rel(vinf(&(&self.c - &other.c)), vinf(&self.c)),
            rel((self.d - other.d).abs(), self.d.abs()),
        ]
    }

    /// Seeded random parameters: λ ∈ (0.1, 10], entries of A, b, c and d in
    /// [−10, 10], A resampled until its 2-norm condition number is at most
    /// `max_condition`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_condition: f64) -> DeformParams {
        loop {
            let lambda = 10.0 - rng.gen::<f64>() * 9.9;
            let a = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-10.0..=10.0));
            let b = DVector::from_fn(dim, |_, _| rng.gen_range(-10.0..=10.0));
            let c = DVector::from_fn(dim, |_, _| rng.gen_range(-10.0..=10.0));
            let d = rng.gen_range(-10.0..=10.0);
            let sv = a.clone().singular_values();
            let (smax, smin) = (sv.max(), sv.min());
            if smin <= 0.0 || smax / smin > max_condition {
                continue;
            }
            if let Ok(p) = DeformParams::new(lambda, a, b, c, d) {
                return p;
            }
        }
    }

    /// Gradient of the conjugate of F_P at η given the gradient of F* = L F:
    /// ∇(F_P)*(η) = A⁻¹(∇F*((1/λ) A⁻ᵀ(η − c)) − b).
    pub fn grad_deformed_conjugate(
        &self,
        conjugate_gradient: impl Fn(&[f64]) -> Result<Vec<f64>>,
        eta: &[f64],
    ) -> Result<Vec<f64>> {
        check_dim(self.dim(), eta.len())?;
        let shifted = DVector::from_column_slice(eta) - &self.c;
        let arg = self.a_inv.transpose() * shifted / self.lambda;
        let g = conjugate_gradient(arg.as_slice())?;
        check_dim(self.dim(), g.len())?;
        Ok(self.inner_map_inverse(&g).as_slice().to_vec())
    }
}

impl GenParams {
    pub fn new(lambda: f64, e: DMatrix<f64>, f: DVector<f64>, g: DVector<f64>, h: f64) -> Result<Self> {
        DeformParams::new(lambda, e, f, g, h).map(GenParams)
    }
    pub fn lambda(&self) -> f64 {
        self.0.lambda
    }
    pub fn e(&self) -> &DMatrix<f64> {
        &self.0.a
    }
    pub fn f(&self) -> &DVector<f64> {
        &self.0.b
    }
    pub fn g(&self) -> &DVector<f64> {
        &self.0.c
    }
    pub fn h(&self) -> f64 {
        self.0.d
    }
    pub fn dim(&self) -> usize {
        self.0.dim()
    }
    pub fn as_deform(&self) -> &DeformParams {
        &self.0
    }
}

impl From<DeformParams> for GenParams {
    fn from(p: DeformParams) -> Self {
        GenParams(p)
    }
}

impl From<GenParams> for DeformParams {
    fn from(p: GenParams) -> Self {
        p.0
    }
}

/// JSON literal `{lambda, A (row-major), b, c, d}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ParamsLiteral {
    pub lambda: f64,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: f64,
}

impl TryFrom<ParamsLiteral> for DeformParams {
    type Error = Error;

    fn try_from(lit: ParamsLiteral) -> Result<Self> {
        let m = lit.a.len();
        if lit.a.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidParams("A must be a square row-major matrix".into()));
        }
        let flat: Vec<f64> = lit.a.concat();
        DeformParams::from_slices(lit.lambda, &flat, &lit.b, &lit.c, lit.d)
    }
}

impl From<&DeformParams> for ParamsLiteral {
    fn from(p: &DeformParams) -> Self {
        ParamsLiteral {
            lambda: p.lambda,
            a: p.a.row_iter().map(|r| r.iter().copied().collect()).collect(),
            b: p.b.as_slice().to_vec(),
            c: p.c.as_slice().to_vec(),
            d: p.d,
        }
    }
}

impl DeformParams {
    pub fn from_json(text: &str) -> Result<Self> {
        let lit: ParamsLiteral = serde_json::from_str(text)?;
        lit.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ParamsLiteral::from(self)).expect("params serialize")
    }
}

/// F_P(θ) = λ F(Aθ + b) + ⟨θ, c⟩ + d.
///
/// Quadratic, affine and point-indicator inputs stay inside their families and
/// come back in closed form; every other function is wrapped. The identity
/// parameter returns `f` unchanged.
pub fn deform(f: &ConvexFunction, p: &DeformParams) -> Result<ConvexFunction> {
    check_dim(f.dim(), p.dim())?;
    if p.is_identity() {
        return Ok(f.clone());
    }
    let label = format!("deform({})", f.label());
    let (lambda, a, b, c, d) = (p.lambda, &p.a, &p.b, &p.c, p.d);
    match f.kind() {
        Kind::Quadratic { q, center, l, k, .. } => {
            // Aθ + b − m = A(θ − A⁻¹(m − b))
            let q_new = (a.transpose() * q * a) * lambda;
            let q_new = (&q_new + q_new.transpose()) * 0.5;
            let center_new = p.inner_map_inverse(center.as_slice());
            let l_new = a.transpose() * l * lambda + c;
            let k_new = lambda * (l.dot(b) + k) + d;
            Ok(ConvexFunction::quadratic_unchecked(q_new, center_new, l_new, k_new, label))
        }
        Kind::Affine { slope, offset } => {
            let s = DVector::from_column_slice(slope);
            let slope_new = a.transpose() * &s * lambda + c;
            let offset_new = lambda * (s.dot(b) + offset) + d;
            Ok(ConvexFunction::affine_unchecked(slope_new.as_slice().to_vec(), offset_new, label))
        }
        Kind::IndicatorPoint { at, offset } => {
            let at_new = p.inner_map_inverse(at);
            let offset_new = lambda * offset + at_new.dot(c) + d;
            Ok(ConvexFunction::indicator_unchecked(at_new.as_slice().to_vec(), offset_new, label))
        }
        _ => {
            let domain = f.domain().preimage(a, b)?;
            Ok(ConvexFunction::from_kind(
                Kind::Deformed { base: Arc::new(f.clone()), params: p.clone() },
                domain,
                None,
                label,
                f.class(),
            ))
        }
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
