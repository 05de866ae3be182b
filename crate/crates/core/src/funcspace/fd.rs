//! Central finite differences on evaluators.

use nalgebra::DMatrix;

use super::function::ConvexFunction;
use crate::error::{Error, Result};

/// Default step for first differences.
pub const DEFAULT_STEP: f64 = 1e-6;
/// Default step for second differences; 1e-6 would leave ~1e-4 of rounding noise.
pub const DEFAULT_HESSIAN_STEP: f64 = 1e-4;

fn stencil_value(f: &ConvexFunction, x: &[f64]) -> Result<f64> {
    if !f.domain().contains(x) {
        return Err(Error::OutsideDomain(format!("finite-difference stencil of {} leaves the domain at {x:?}", f.label())));
    }
    f.eval(x)?.finite().ok_or_else(|| Error::NonFiniteStencil(x.to_vec()))
}

/// Component i = (F(θ + h eᵢ) − F(θ − h eᵢ)) / 2h.
pub fn grad_fd(f: &ConvexFunction, theta: &[f64], h: f64) -> Result<Vec<f64>> {
    crate::affine::check_dim(f.dim(), theta.len())?;
    let mut x = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            x[i] = theta[i] + h;
            let up = stencil_value(f, &x)?;
            x[i] = theta[i] - h;
            let down = stencil_value(f, &x)?;
            x[i] = theta[i];
            Ok((up - down) / (2.0 * h))
        })
        .collect()
}

/// Central second differences, symmetrized.
pub fn hessian_fd(f: &ConvexFunction, theta: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let m = theta.len();
    crate::affine::check_dim(f.dim(), m)?;
    let center = stencil_value(f, theta)?;
    let at = |shifts: &[(usize, f64)]| {
        let mut x = theta.to_vec();
        for &(i, s) in shifts {
            x[i] += s;
        }
        stencil_value(f, &x)
    };
    let mut hess = DMatrix::zeros(m, m);
    for i in 0..m {
        hess[(i, i)] = (at(&[(i, h)])? - 2.0 * center + at(&[(i, -h)])?) / (h * h);
        for j in 0..i {
            let v = (at(&[(i, h), (j, h)])? - at(&[(i, h), (j, -h)])? - at(&[(i, -h), (j, h)])? + at(&[(i, -h), (j, -h)])?)
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

/// Jacobian of the analytic gradient by central differences, symmetrized.
/// Used where a function has a gradient but no hessian.
pub fn gradient_jacobian_fd(f: &ConvexFunction, theta: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let m = theta.len();
    let mut jac = DMatrix::zeros(m, m);
    let mut x = theta.to_vec();
    for j in 0..m {
        x[j] = theta[j] + h;
        let up = f.gradient(&x)?;
        x[j] = theta[j] - h;
        let down = f.gradient(&x)?;
        x[j] = theta[j];
        for i in 0..m {
            jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    Ok((&jac + jac.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::catalog::lookup_spec;

    #[test]
    fn gradient_examples() {
        let e = lookup_spec("exp").unwrap();
        assert!((grad_fd(&e, &[0.0], 1e-6).unwrap()[0] - 1.0).abs() < 1e-9);
        let q = lookup_spec("quadratic").unwrap();
        assert!((grad_fd(&q, &[3.0], 1e-6).unwrap()[0] - 3.0).abs() < 1e-8);
        let r = lookup_spec("rockafellar-2d").unwrap();
        let g = grad_fd(&r, &[2.0, 1.0], 1e-6).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-8 && (g[1] + 0.5).abs() < 1e-8, "{g:?}");
    }

    #[test]
    fn stencil_errors() {
        let nl = lookup_spec("neg-log").unwrap();
        assert!(matches!(grad_fd(&nl, &[1e-7], 1e-6), Err(Error::OutsideDomain(_))));
        let e = lookup_spec("exp").unwrap();
        assert!(matches!(grad_fd(&e, &[800.0], 1e-6), Err(Error::NonFiniteStencil(_))));
        assert!(matches!(grad_fd(&e, &[0.0, 1.0], 1e-6), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn hessian_examples() {
        let q = lookup_spec("quadratic{dim=2}").unwrap();
        let h = hessian_fd(&q, &[0.3, -1.2], DEFAULT_HESSIAN_STEP).unwrap();
        assert!((h - DMatrix::identity(2, 2)).amax() < 1e-6);
        let e = lookup_spec("exp").unwrap();
        assert!((hessian_fd(&e, &[0.0], DEFAULT_HESSIAN_STEP).unwrap()[(0, 0)] - 1.0).abs() < 1e-5);
        let r = lookup_spec("rockafellar-2d").unwrap();
        let fd = hessian_fd(&r, &[2.0, 1.0], DEFAULT_HESSIAN_STEP).unwrap();
        assert!((fd - r.hessian(&[2.0, 1.0]).unwrap()).amax() < 1e-5);
    }
}
