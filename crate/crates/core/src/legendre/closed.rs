//! Analytic conjugates for catalog entries.

use crate::error::{Error, Result};
use crate::funcspace::{catalog_lookup, ConvexFunction, Kind, Params};

fn named(name: &str, params: Params, label: String) -> Result<ConvexFunction> {
    Ok(catalog_lookup(name, &params)?.with_label(label))
}

/// F* for entries with a known rule.
///
/// | F | F* |
/// |---|----|
/// | ⟨a,θ⟩ + b | 1_{a} − b |
/// | 1_{a} + b | ⟨a,η⟩ − b |
/// | exp θ | η log η − η (0 at η = 0, +∞ for η < 0) |
/// | (1/p)‖θ‖ᵖ | (1/q)‖η‖^q, 1/p + 1/q = 1; the unit-ball indicator for p = 1 |
/// | ½(θ−m)ᵀQ(θ−m) + ⟨l,θ⟩ + k | ½(η−l)ᵀQ⁻¹(η−l) + ⟨m,η−l⟩ − k |
/// | exp\|θ\| − \|θ\| − 1 | (1+\|η\|) log(1+\|η\|) − \|η\| |
/// | −log θ | −1 − log(−η) |
///
/// and each rule in reverse. The positive-domain restriction of `exp-abs` maps
/// to the conjugate restricted to its gradient range (0, ∞), the Legendre-type
/// pairing (Θ, F) ↦ (H, F*).
///
/// Functions without a rule (including general deformations and the
/// Rockafellar example) return [`Error::NoRule`] so the caller can fall back to
/// another engine.
pub fn conjugate_closed(f: &ConvexFunction) -> Result<ConvexFunction> {
    let label = format!("conj({})", f.label());
    let mut params = Params::new();
    match f.kind() {
        Kind::Affine { slope, offset } => Ok(ConvexFunction::indicator_unchecked(slope.clone(), -offset, label)),
        Kind::IndicatorPoint { at, offset } => Ok(ConvexFunction::affine_unchecked(at.clone(), -offset, label)),
        Kind::Exp => named("entropy", params, label),
        Kind::Entropy => named("exp", params, label),
        Kind::ExpAbs { positive } => {
            params.insert("positive".into(), (*positive).into());
            named("exp-abs-conjugate", params, label)
        }
        Kind::ExpAbsConjugate { positive } => {
            params.insert("positive".into(), (*positive).into());
            named("exp-abs", params, label)
        }
        Kind::NegLog => named("neg-log-conjugate", params, label),
        Kind::NegLogConjugate => named("neg-log", params, label),
        Kind::PowerNorm { p } => {
            params.insert("dim".into(), f.dim().into());
            if *p == 1.0 {
                named("ball-indicator", params, label)
            } else {
                params.insert("p".into(), (p / (p - 1.0)).into());
                named("power-norm", params, label)
            }
        }
        Kind::BallIndicator { radius } if *radius == 1.0 => {
            params.insert("dim".into(), f.dim().into());
            params.insert("p".into(), 1.0.into());
            named("power-norm", params, label)
        }
        Kind::Quadratic { q, center, l, k, inv_factor } => {
            let k_new = -center.dot(l) - k;
            if let Some(factor) = inv_factor {
                let q_inv = factor * factor.transpose();
                return Ok(ConvexFunction::quadratic_unchecked(q_inv, l.clone(), center.clone(), k_new, label));
            }
            let chol =
                q.clone().cholesky().ok_or_else(|| Error::InvalidParams(format!("{} is not positive definite", f.label())))?;
            let q_inv = chol.inverse();
            let q_inv = (&q_inv + q_inv.transpose()) * 0.5;
            Ok(ConvexFunction::quadratic_from_inverse_factor(q_inv, chol.l(), l.clone(), center.clone(), k_new, label))
        }
        Kind::Deformed { base, params } if params.is_identity() => conjugate_closed(base),
        _ => Err(Error::NoRule(f.label().to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{lookup_spec, ExtendedReal};

    fn conj(spec: &str) -> ConvexFunction {
        conjugate_closed(&lookup_spec(spec).unwrap()).unwrap()
    }

    fn close(a: ExtendedReal, b: f64) -> bool {
        (a.to_f64() - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn exp_gives_entropy() {
        let h = conj("exp");
        assert!(close(h.eval(&[2.0]).unwrap(), 2.0 * 2f64.ln() - 2.0));
        assert_eq!(h.eval(&[0.0]).unwrap(), ExtendedReal::Finite(0.0));
        assert!(h.eval(&[-0.1]).unwrap().is_pos_inf());
    }

    #[test]
    fn affine_gives_shifted_indicator() {
        let h = conj("affine{a=[3],b=2}");
        assert_eq!(h.eval(&[3.0]).unwrap(), ExtendedReal::Finite(-2.0));
        assert!(h.eval(&[3.1]).unwrap().is_pos_inf());
        let back = conjugate_closed(&h).unwrap();
        assert!(close(back.eval(&[1.0]).unwrap(), 5.0));
    }

    #[test]
    fn power_norm_exponents() {
        let h = conj("power-norm{p=3}");
        // q = 3/2
        assert!(close(h.eval(&[4.0]).unwrap(), 8.0 / 1.5));
        let h = conj("power-norm{p=1,dim=2}");
        assert_eq!(h.eval(&[0.6, 0.8]).unwrap(), ExtendedReal::Finite(0.0));
        assert!(h.eval(&[0.6, 0.9]).unwrap().is_pos_inf());
    }

    #[test]
    fn quadratic_self_duality_and_completion_of_square() {
        let h = conj("quadratic{dim=2}");
        assert!(close(h.eval(&[1.0, -2.0]).unwrap(), 2.5));
        let h = conj("quadratic-form{Q=[[2]],l=[1],k=3}");
        // ½(η−1)²/2 − 3
        assert!(close(h.eval(&[5.0]).unwrap(), 4.0 - 3.0));
    }

    #[test]
    fn exp_abs_pair() {
        let h = conj("exp-abs");
        for eta in [-2.0f64, 0.0, 0.7] {
            let a = eta.abs();
            assert!(close(h.eval(&[eta]).unwrap(), (1.0 + a) * (1.0 + a).ln() - a));
        }
    }

    #[test]
    fn no_rule() {
        assert!(matches!(conjugate_closed(&lookup_spec("rockafellar-2d").unwrap()), Err(Error::NoRule(_))));
    }
}
