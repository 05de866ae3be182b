//! Conjugation by gradient inversion: solve ∇F(θ) = η, then
//! F*(η) = ⟨θ, η⟩ − F(θ).
//!
//! One-dimensional problems bracket the root of the monotone map θ ↦ F′(θ) − η
//! and run Newton safeguarded by bisection. Higher dimensions use damped
//! Newton with backtracking on the residual norm.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::funcspace::fd::{gradient_jacobian_fd, DEFAULT_HESSIAN_STEP};
use crate::funcspace::function::dot;
use crate::funcspace::ConvexFunction;

/// Iterates farther than this from the origin count as divergence.
const ESCAPE_RADIUS: f64 = 1e12;
const MAX_HALVINGS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    /// Residual tolerance ‖∇F(θ) − η‖∞ ≤ tol · (1 + ‖η‖∞).
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-10, max_iter: 200 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonSolution {
    /// ⟨θ, η⟩ − F(θ) at the solution.
    pub value: f64,
    /// θ with ∇F(θ) = η, i.e. ∇F*(η).
    pub argmax: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Evaluates F*(η) for a strictly convex, differentiable `f`.
pub fn conjugate_newton(f: &ConvexFunction, eta: &[f64], start: &[f64], opts: &NewtonOptions) -> Result<NewtonSolution> {
    crate::affine::check_dim(f.dim(), eta.len())?;
    crate::affine::check_dim(f.dim(), start.len())?;
    if !f.has_gradient() {
        return Err(Error::NotDifferentiable(f.label().to_string(), "a gradient"));
    }
    let start = if f.domain().contains(start) { start.to_vec() } else { f.domain().interior_point() };
    let eta_scale = 1.0 + eta.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = opts.tol * eta_scale;
    let (theta, iterations, residual) = if eta.len() == 1 {
        solve_scalar(f, eta[0], start[0], tol, opts.max_iter)?
    } else {
        solve_damped(f, eta, start, tol, opts.max_iter)?
    };
    let value = dot(&theta, eta) - f.eval_finite(&theta)?;
    Ok(NewtonSolution { value, argmax: theta, iterations, residual })
}

fn hessian_or_fd(f: &ConvexFunction, x: &[f64]) -> Result<DMatrix<f64>> {
    match f.has_hessian().then(|| f.hessian(x)) {
        Some(Ok(h)) => Ok(h),
        _ => gradient_jacobian_fd(f, x, DEFAULT_HESSIAN_STEP * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs())))),
    }
}

fn solve_scalar(f: &ConvexFunction, eta: f64, x0: f64, tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize, f64)> {
    let resid = |x: f64| -> Result<f64> { Ok(f.gradient(&[x])?[0] - eta) };
    let out_of_range = || Error::OutsideGradientRange(vec![eta]);

    let r0 = resid(x0)?;
    if r0.abs() <= tol {
        return Ok((vec![x0], 0, r0.abs()));
    }
    // Walk toward the side where F′ − η changes sign.
    let dir = if r0 < 0.0 { 1.0 } else { -1.0 };
    let (mut inside, mut r_inside) = (x0, r0);
    let mut step = 1.0f64.max(x0.abs() * 1e-3);
    let mut grow = true;
    let mut other = None;
    for _ in 0..4000 {
        let cand = inside + dir * step;
        if !f.domain().contains(&[cand]) {
            grow = false;
            step *= 0.5;
            if step <= f64::EPSILON * inside.abs().max(f64::MIN_POSITIVE) {
                return Err(out_of_range());
            }
            continue;
        }
        let rc = resid(cand)?;
        // an exact zero where F is flat is underflow, not a root
        if rc == 0.0 && hessian_or_fd(f, &[cand]).map_or(true, |h| h[(0, 0)] > 0.0) {
            return Ok((vec![cand], 0, 0.0));
        }
        if rc.signum() != r_inside.signum() {
            other = Some((cand, rc));
            break;
        }
        if cand == inside {
            return Err(out_of_range());
        }
        inside = cand;
        r_inside = rc;
        if grow {
            step *= 2.0;
        }
        if inside.abs() > ESCAPE_RADIUS {
            return Err(out_of_range());
        }
    }
    let (cand, rc) = other.ok_or_else(out_of_range)?;

    // r(lo) < 0 < r(hi)
    let (mut lo, mut hi) = if r_inside < 0.0 { (inside, cand) } else { (cand, inside) };
    let (mut x, mut rx) = if r_inside.abs() < rc.abs() { (inside, r_inside) } else { (cand, rc) };
    let mut last_newton_rx = f64::INFINITY;
    for it in 1..=max_iter.max(200) {
        if rx.abs() <= tol {
            return Ok((vec![x], it, rx.abs()));
        }
        if rx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
            return Ok((vec![x], it, rx.abs()));
        }
        let slope = hessian_or_fd(f, &[x]).ok().map(|h| h[(0, 0)]).filter(|s| *s > 0.0 && s.is_finite());
        let newton = slope.map(|s| x - rx / s).filter(|n| *n > lo && *n < hi);
        let next = match newton {
            Some(n) if rx.abs() <= 0.5 * last_newton_rx || last_newton_rx.is_infinite() => {
                last_newton_rx = rx.abs();
                n
            }
            _ => {
                last_newton_rx = f64::INFINITY;
                0.5 * (lo + hi)
            }
        };
        if next == x {
            return Ok((vec![x], it, rx.abs()));
        }
        x = next;
        rx = resid(x)?;
    }
    Err(Error::NotConverged { iterations: max_iter, residual: rx.abs() })
}

fn solve_damped(f: &ConvexFunction, eta: &[f64], mut x: Vec<f64>, tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize, f64)> {
    let target = DVector::from_column_slice(eta);
    let resid = |x: &[f64]| -> Result<DVector<f64>> { Ok(DVector::from_vec(f.gradient(x)?) - &target) };
    let mut r = resid(&x)?;
    for it in 0..max_iter {
        if r.amax() <= tol {
            return Ok((x, it, r.amax()));
        }
        let h = hessian_or_fd(f, &x)?;
        let chol = h.cholesky().ok_or_else(|| Error::HessianNotSpd(x.clone()))?;
        let step = -chol.solve(&r);
        let norm = r.norm();
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, si)| xi + t * si).collect();
            if f.domain().contains(&cand) {
                if let Ok(rc) = resid(&cand) {
                    if rc.norm() < norm {
                        accepted = Some((cand, rc));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        let Some((cand, rc)) = accepted else {
            return Err(Error::NotConverged { iterations: it, residual: r.amax() });
        };
        if cand.iter().any(|v| v.abs() > ESCAPE_RADIUS) {
            return Err(Error::OutsideGradientRange(eta.to_vec()));
        }
        x = cand;
        r = rc;
    }
    if r.amax() <= tol {
        Ok((x, max_iter, r.amax()))
    } else {
        Err(Error::NotConverged { iterations: max_iter, residual: r.amax() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{grad_fd, lookup_spec};

    fn solve(spec: &str, eta: &[f64]) -> Result<NewtonSolution> {
        let f = lookup_spec(spec).unwrap();
        let start = f.domain().interior_point();
        conjugate_newton(&f, eta, &start, &NewtonOptions::default())
    }

    #[test]
    fn exp_at_one() {
        let s = solve("exp", &[1.0]).unwrap();
        assert!((s.value + 1.0).abs() < 1e-12);
        assert!(s.argmax[0].abs() < 1e-10);
    }

    #[test]
    fn self_dual_quadratic() {
        let s = solve("quadratic", &[7.0]).unwrap();
        assert!((s.value - 24.5).abs() < 1e-10);
        assert!((s.argmax[0] - 7.0).abs() < 1e-10);
    }

    #[test]
    fn rockafellar_round_trip() {
        let f = lookup_spec("rockafellar-2d").unwrap();
        let eta = grad_fd(&f, &[2.0, 1.0], 1e-6).unwrap();
        let s = conjugate_newton(&f, &eta, &[0.0, 1.0], &NewtonOptions::default()).unwrap();
        let want = 2.0 * eta[0] + eta[1] - 2.25;
        assert!((s.value - want).abs() < 1e-8, "{} vs {want}", s.value);
        assert!((s.argmax[0] - 2.0).abs() < 1e-5 && (s.argmax[1] - 1.0).abs() < 1e-5, "{:?}", s.argmax);
    }

    #[test]
    fn outside_gradient_range_is_reported() {
        assert!(matches!(solve("exp", &[-1.0]), Err(Error::OutsideGradientRange(_))));
        assert!(matches!(solve("exp", &[0.0]), Err(Error::OutsideGradientRange(_))));
        // gradient of exp-abs on θ > 0 is e^θ − 1 > 0
        assert!(matches!(solve("exp-abs{positive=1}", &[-0.5]), Err(Error::OutsideGradientRange(_))));
        // power-norm p=1.5 in 2D has full gradient range; the ball indicator's
        // conjugate direction is bounded
        assert!(solve("power-norm{p=1.5,dim=2}", &[0.3, -2.0]).is_ok());
    }

    #[test]
    fn bounded_domain_brackets_toward_boundary() {
        // −log θ: F′(θ) = −1/θ = η  =>  θ = −1/η; conjugate −1 − log(−η)
        for eta in [-1e3, -2.0, -1e-3] {
            let s = solve("neg-log", &[eta]).unwrap();
            assert!((s.value - (-1.0 - (-eta).ln())).abs() < 1e-9, "{eta}: {}", s.value);
        }
        assert!(matches!(solve("neg-log", &[0.5]), Err(Error::OutsideGradientRange(_))));
    }

    #[test]
    fn power_norm_near_degenerate_hessians() {
        for (p, eta) in [(1.5, 0.01), (3.0, 1e-6), (3.0, -4.0), (1.5, -7.0)] {
            let q = p / (p - 1.0);
            let s = solve(&format!("power-norm{{p={p}}}"), &[eta]).unwrap();
            let want = f64::abs(eta).powf(q) / q;
            assert!((s.value - want).abs() < 1e-9 * (1.0 + want), "p={p} eta={eta}: {} vs {want}", s.value);
        }
    }

    #[test]
    fn non_spd_hessian_is_reported() {
        let f = lookup_spec("affine{a=[1,2]}").unwrap();
        let err = conjugate_newton(&f, &[0.0, 0.0], &[0.0, 0.0], &NewtonOptions::default()).unwrap_err();
        assert!(matches!(err, Error::HessianNotSpd(_)), "{err:?}");
    }
}
