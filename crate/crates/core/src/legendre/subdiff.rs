//! One-sided difference quotients as a numeric subdifferential in 1D.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcspace::ext::{ExtendedReal, NegInf, PosInf};
use crate::funcspace::ConvexFunction;

/// ∂F(θ) ⊂ ℝ as the interval [F′₋(θ), F′₊(θ)].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Subdifferential1D {
    pub at: f64,
    pub lower: ExtendedReal,
    pub upper: ExtendedReal,
    /// θ lies outside the effective domain.
    pub empty: bool,
}

impl Subdifferential1D {
    pub fn width(&self) -> f64 {
        if self.empty {
            return 0.0;
        }
        match (self.lower, self.upper) {
            (ExtendedReal::Finite(l), ExtendedReal::Finite(u)) => u - l,
            _ => f64::INFINITY,
        }
    }

    /// True when the interval collapses to a point within `tol`.
    pub fn is_singleton(&self, tol: f64) -> bool {
        !self.empty && self.width() <= tol
    }

    pub fn contains(&self, eta: f64, tol: f64) -> bool {
        !self.empty && self.lower.to_f64() - tol <= eta && eta <= self.upper.to_f64() + tol
    }

    /// Midpoint of a finite interval.
    pub fn midpoint(&self) -> Option<f64> {
        match (self.empty, self.lower, self.upper) {
            (false, ExtendedReal::Finite(l), ExtendedReal::Finite(u)) => Some(0.5 * (l + u)),
            _ => None,
        }
    }
}

/// [(F(θ) − F(θ−h))/h, (F(θ+h) − F(θ))/h].
///
/// A neighbour outside the effective domain makes that side unbounded, which
/// is the exact answer for a closed convex function at the edge of its domain.
pub fn subdiff_1d(f: &ConvexFunction, theta: f64, h: f64) -> Result<Subdifferential1D> {
    crate::affine::check_dim(f.dim(), 1)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParams(format!("step must be positive, got {h}")));
    }
    let center = f.eval(&[theta])?;
    let Some(c) = center.finite() else {
        return Ok(Subdifferential1D { at: theta, lower: PosInf, upper: NegInf, empty: true });
    };
    let quotient = |x: f64, sign: f64| -> Result<ExtendedReal> {
        Ok(match f.eval(&[x])? {
            ExtendedReal::Finite(v) => ExtendedReal::real(sign * (v - c) / h),
            PosInf if sign > 0.0 => PosInf,
            PosInf => NegInf,
            NegInf => return Err(Error::NonFiniteStencil(vec![x])),
        })
    };
    let lower = quotient(theta - h, -1.0)?;
    let upper = quotient(theta + h, 1.0)?;
    Ok(Subdifferential1D { at: theta, lower, upper, empty: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::lookup_spec;

    const H: f64 = 1e-6;

    #[test]
    fn smooth_points_are_singletons() {
        let f = lookup_spec("exp-abs").unwrap();
        let s = subdiff_1d(&f, 1.0, H).unwrap();
        assert!(s.is_singleton(1e-5));
        assert!((s.midpoint().unwrap() - (1f64.exp() - 1.0)).abs() < 1e-5);

        let g = lookup_spec("exp-abs-conjugate").unwrap();
        let s = subdiff_1d(&g, -2.0, H).unwrap();
        assert!(s.is_singleton(1e-5));
        assert!((s.midpoint().unwrap() + 3f64.ln()).abs() < 1e-5);
    }

    #[test]
    fn exp_abs_is_differentiable_at_zero() {
        // e^|θ| − |θ| − 1 = θ²/2 + O(|θ|³), so both one-sided slopes vanish
        let f = lookup_spec("exp-abs").unwrap();
        let s = subdiff_1d(&f, 0.0, H).unwrap();
        assert!(s.lower.to_f64().abs() < 1e-5 && s.upper.to_f64().abs() < 1e-5, "{s:?}");
    }

    #[test]
    fn kink_of_the_norm() {
        let f = lookup_spec("power-norm{p=1}").unwrap();
        let s = subdiff_1d(&f, 0.0, H).unwrap();
        assert!((s.lower.to_f64() + 1.0).abs() < 1e-9 && (s.upper.to_f64() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn domain_edges() {
        let e = lookup_spec("entropy").unwrap();
        let s = subdiff_1d(&e, 0.0, H).unwrap();
        assert_eq!(s.lower, NegInf);
        assert!(s.upper.is_finite());
        let s = subdiff_1d(&e, -1.0, H).unwrap();
        assert!(s.empty && !s.contains(0.0, 1.0));

        let ind = lookup_spec("indicator-point{a=[2]}").unwrap();
        let s = subdiff_1d(&ind, 2.0, H).unwrap();
        assert_eq!((s.lower, s.upper), (NegInf, PosInf));
    }
}
