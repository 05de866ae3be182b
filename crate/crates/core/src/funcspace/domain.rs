//! Effective domains.
//!
//! Domains are stored open. Closure values on the boundary (for example the
//! entropy at 0) live on the function as explicit boundary overrides, never here.
//! Products of open half-lines such as ℝ × ℝ₊ are open boxes with infinite
//! bounds on some axes.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance used to decide membership in a singleton domain.
pub const SINGLETON_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    /// All of ℝᵐ.
    Whole { dim: usize },
    /// Π (lowerᵢ, upperᵢ); bounds may be infinite.
    OpenBox { lower: Vec<f64>, upper: Vec<f64> },
    /// Open Euclidean ball of the given radius around the origin.
    OpenBall { radius: f64, dim: usize },
    /// A single point. Not open; only indicator functions live here.
    Singleton { point: Vec<f64> },
    /// {θ : Aθ + b ∈ inner}.
    Preimage { matrix: DMatrix<f64>, offset: DVector<f64>, inner: Box<Domain> },
}

impl Domain {
    pub fn whole(dim: usize) -> Self {
        Domain::Whole { dim }
    }

    pub fn open_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidParams("box bounds must have equal, positive length".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::InvalidParams("empty box: every lower bound must be < upper".into()));
        }
        Ok(Domain::OpenBox { lower, upper })
    }

    /// ℝ₊ = (0, ∞) in one dimension.
    pub fn positive_half_line() -> Self {
        Domain::OpenBox { lower: vec![0.0], upper: vec![f64::INFINITY] }
    }

    pub fn negative_half_line() -> Self {
        Domain::OpenBox { lower: vec![f64::NEG_INFINITY], upper: vec![0.0] }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Whole { dim } | Domain::OpenBall { dim, .. } => *dim,
            Domain::OpenBox { lower, .. } => lower.len(),
            Domain::Singleton { point } => point.len(),
            Domain::Preimage { matrix, .. } => matrix.ncols(),
        }
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        if theta.len() != self.dim() || theta.iter().any(|x| !x.is_finite()) {
            return false;
        }
        match self {
            Domain::Whole { .. } => true,
            Domain::OpenBox { lower, upper } => theta.iter().zip(lower.iter().zip(upper)).all(|(x, (l, u))| l < x && x < u),
            Domain::OpenBall { radius, .. } => norm2(theta) < *radius,
            Domain::Singleton { point } => near(theta, point),
            Domain::Preimage { matrix, offset, inner } => {
                let image = matrix * DVector::from_column_slice(theta) + offset;
                inner.contains(image.as_slice())
            }
        }
    }

    /// Whether the domain has no boundary at all.
    pub fn is_whole(&self) -> bool {
        match self {
            Domain::Whole { .. } => true,
            Domain::OpenBox { lower, upper } => {
                lower.iter().all(|l| *l == f64::NEG_INFINITY) && upper.iter().all(|u| *u == f64::INFINITY)
            }
            Domain::Preimage { inner, .. } => inner.is_whole(),
            _ => false,
        }
    }

    /// A point strictly inside the domain.
    pub fn interior_point(&self) -> Vec<f64> {
        match self {
            Domain::Whole { dim } | Domain::OpenBall { dim, .. } => vec![0.0; *dim],
            Domain::OpenBox { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(&l, &u)| match (l.is_finite(), u.is_finite()) {
                    (true, true) => 0.5 * (l + u),
                    (true, false) => l + 1.0,
                    (false, true) => u - 1.0,
                    (false, false) => 0.0,
                })
                .collect(),
            Domain::Singleton { point } => point.clone(),
            Domain::Preimage { matrix, offset, inner } => {
                let target = DVector::from_vec(inner.interior_point()) - offset;
                match matrix.clone().lu().solve(&target) {
                    Some(x) => x.as_slice().to_vec(),
                    None => vec![0.0; matrix.ncols()],
                }
            }
        }
    }

    /// A bounded box inside the domain, used as a default sampling window.
    ///
    /// Infinite directions are cut at ±3 around the interior point; finite
    /// bounds are pulled in by 1% of the window width. Returns `None` for
    /// singletons and general affine preimages.
    pub fn window(&self) -> Option<Vec<(f64, f64)>> {
        const HALF_WIDTH: f64 = 3.0;
        match self {
            Domain::Whole { dim } => Some(vec![(-HALF_WIDTH, HALF_WIDTH); *dim]),
            Domain::OpenBall { radius, dim } => {
                let r = 0.99 * radius / (*dim as f64).sqrt();
                Some(vec![(-r, r); *dim])
            }
            Domain::OpenBox { lower, upper } => Some(
                lower
                    .iter()
                    .zip(upper)
                    .map(|(&l, &u)| {
                        let (lo, hi) = match (l.is_finite(), u.is_finite()) {
                            (true, true) => (l, u),
                            (true, false) => (l, l + 2.0 * HALF_WIDTH),
                            (false, true) => (u - 2.0 * HALF_WIDTH, u),
                            (false, false) => (-HALF_WIDTH, HALF_WIDTH),
                        };
                        let pad = 0.01 * (hi - lo);
                        (if l.is_finite() { lo + pad } else { lo }, if u.is_finite() { hi - pad } else { hi })
                    })
                    .collect(),
            ),
            Domain::Preimage { inner, .. } if inner.is_whole() => Some(vec![(-HALF_WIDTH, HALF_WIDTH); self.dim()]),
            _ => None,
        }
    }

    /// {θ : Aθ + b ∈ self}, simplified when the structure allows it.
    pub fn preimage(&self, matrix: &DMatrix<f64>, offset: &DVector<f64>) -> Result<Domain> {
        let m = self.dim();
        if matrix.nrows() != m || offset.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: matrix.nrows() });
        }
        match self {
            Domain::Whole { .. } => Ok(Domain::Whole { dim: matrix.ncols() }),
            Domain::Singleton { point } => {
                let target = DVector::from_column_slice(point) - offset;
                let x = matrix
                    .clone()
                    .lu()
                    .solve(&target)
                    .ok_or_else(|| Error::Singular("affine map of a singleton domain".into()))?;
                Ok(Domain::Singleton { point: x.as_slice().to_vec() })
            }
            Domain::OpenBox { lower, upper } if m == 1 && matrix.ncols() == 1 => {
                // 1D preimage of an interval is an interval.
                let (a, b) = (matrix[(0, 0)], offset[0]);
                let ends = [(lower[0] - b) / a, (upper[0] - b) / a];
                let (lo, hi) = if a > 0.0 { (ends[0], ends[1]) } else { (ends[1], ends[0]) };
                Domain::open_box(vec![lo], vec![hi])
            }
            _ => Ok(Domain::Preimage { matrix: matrix.clone(), offset: offset.clone(), inner: Box::new(self.clone()) }),
        }
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn near(x: &[f64], y: &[f64]) -> bool {
    x.len() == y.len() && x.iter().zip(y).all(|(a, b)| (a - b).abs() <= SINGLETON_TOL * (1.0 + a.abs().max(b.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_space_product() {
        let d = Domain::open_box(vec![f64::NEG_INFINITY, 0.0], vec![f64::INFINITY, f64::INFINITY]).unwrap();
        assert!(d.contains(&[-5.0, 1e-9]));
        assert!(!d.contains(&[0.0, 0.0]));
        assert!(!d.contains(&[0.0, -1.0]));
        assert!(!d.is_whole());
        assert!(d.contains(&d.interior_point()));
    }

    #[test]
    fn empty_boxes_are_rejected() {
        assert!(Domain::open_box(vec![1.0], vec![1.0]).is_err());
        assert!(Domain::open_box(vec![], vec![]).is_err());
    }

    #[test]
    fn interval_preimage_flips_with_negative_slope() {
        let d = Domain::positive_half_line();
        let p = d.preimage(&DMatrix::from_element(1, 1, -2.0), &DVector::from_element(1, 1.0)).unwrap();
        // -2θ + 1 > 0  <=>  θ < 0.5
        assert_eq!(p, Domain::OpenBox { lower: vec![f64::NEG_INFINITY], upper: vec![0.5] });
    }

    #[test]
    fn general_preimage_membership() {
        let d = Domain::open_box(vec![f64::NEG_INFINITY, 0.0], vec![f64::INFINITY; 2]).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![0.0, -1.0]);
        let p = d.preimage(&a, &b).unwrap();
        assert!(p.contains(&[0.0, 1.5]));
        assert!(!p.contains(&[0.0, 0.5]));
        assert!(p.contains(&p.interior_point()));
    }

    #[test]
    fn singleton_preimage() {
        let d = Domain::Singleton { point: vec![2.0] };
        let p = d.preimage(&DMatrix::from_element(1, 1, 4.0), &DVector::from_element(1, 1.0)).unwrap();
        assert!(p.contains(&[0.25]));
        assert!(!p.contains(&[0.2500001]));
    }

    #[test]
    fn windows_stay_inside() {
        for d in [
            Domain::whole(2),
            Domain::positive_half_line(),
            Domain::OpenBall { radius: 1.0, dim: 2 },
            Domain::open_box(vec![-1.0], vec![4.0]).unwrap(),
        ] {
            let w = d.window().unwrap();
            let lo: Vec<f64> = w.iter().map(|x| x.0).collect();
            let hi: Vec<f64> = w.iter().map(|x| x.1).collect();
            assert!(d.contains(&lo) && d.contains(&hi), "{d:?}");
        }
    }
}
