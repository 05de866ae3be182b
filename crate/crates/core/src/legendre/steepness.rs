//! Numeric evidence for the Legendre-type conditions: strict convexity on the
//! interior and unbounded steepness at every finite boundary point.
//!
//! Steepness at a boundary point θ′ is probed along the segment toward an
//! interior point θ: the slope of λ ↦ F(λθ + (1−λ)θ′) at λ = 10⁻¹, …, 10⁻ᵏ
//! must keep decreasing and end below [`STEEP_THRESHOLD`]. The threshold is a
//! convention; no finite sample can prove the limit is −∞.

use crate::error::Result;
use crate::funcspace::function::dot;
use crate::funcspace::{ConvexFunction, Domain};
use crate::report::{CheckReport, Status};

/// Slope a ray must reach at its smallest λ to count as diverging.
pub const STEEP_THRESHOLD: f64 = -10.0;
/// Minimum convexity gap (relative) for the strict-convexity spot check.
const STRICT_GAP: f64 = 1e-12;

/// Boundary points paired with an interior point to approach them from.
fn boundary_rays(domain: &Domain, samples: usize) -> Option<Vec<(Vec<f64>, Vec<f64>)>> {
    let samples = samples.max(1);
    match domain {
        Domain::OpenBox { lower, upper } => {
            let center = domain.interior_point();
            let window = domain.window()?;
            let mut rays = Vec::new();
            for (axis, bounds) in lower.iter().zip(upper).enumerate() {
                for bound in [*bounds.0, *bounds.1] {
                    if !bound.is_finite() {
                        continue;
                    }
                    for s in 0..samples {
                        let mut edge = center.clone();
                        for (j, (lo, hi)) in window.iter().enumerate() {
                            if j != axis {
                                // offset samples so none sits on a symmetry axis
                                edge[j] = lo + (hi - lo) * (s as f64 + 0.5) / samples as f64;
                            }
                        }
                        let mut inner = edge.clone();
                        inner[axis] = center[axis];
                        edge[axis] = bound;
                        rays.push((edge, inner));
                    }
                }
            }
            Some(rays)
        }
        Domain::OpenBall { radius, dim } => Some(
            (0..samples)
                .map(|s| {
                    let angle = std::f64::consts::TAU * s as f64 / samples as f64;
                    let mut edge = vec![0.0; *dim];
                    edge[0] = radius * angle.cos();
                    if *dim > 1 {
                        edge[1] = radius * angle.sin();
                    } else if s % 2 == 1 {
                        edge[0] = -radius;
                    } else {
                        edge[0] = *radius;
                    }
                    (edge, vec![0.0; *dim])
                })
                .collect(),
        ),
        _ => None,
    }
}

fn ray_slope(f: &ConvexFunction, edge: &[f64], inner: &[f64], lambda: f64) -> Result<f64> {
    let dir: Vec<f64> = inner.iter().zip(edge).map(|(a, b)| a - b).collect();
    let at = |l: f64| -> Vec<f64> { edge.iter().zip(&dir).map(|(e, d)| e + l * d).collect() };
    if f.has_gradient() {
        if let Ok(g) = f.gradient(&at(lambda)) {
            return Ok(dot(&g, &dir));
        }
    }
    let h = 1e-3 * lambda;
    Ok((f.eval_finite(&at(lambda + h))? - f.eval_finite(&at(lambda - h))?) / (2.0 * h))
}

/// Graded Legendre-type evidence for a 1D or 2D function.
///
/// `worst_violation` is the largest final ray slope minus the threshold
/// (positive means a ray stayed bounded). Domains without a finite boundary
/// only get the strict-convexity check.
pub fn check_legendre_type(f: &ConvexFunction, boundary_samples: usize, ray_steps: usize) -> Result<CheckReport> {
    let mut report = CheckReport::new("legendre-type");
    let mut notes = vec![format!("steepness threshold {STEEP_THRESHOLD} at lambda = 1e-{ray_steps} is a convention")];

    strict_convexity(f, &mut report)?;

    let rays = if f.domain().is_whole() {
        notes.push("no finite boundary; steepness holds trivially".into());
        Vec::new()
    } else {
        match boundary_rays(f.domain(), boundary_samples) {
            Some(r) => r,
            None => {
                if report.passed() {
                    report.status = Status::Inconclusive;
                }
                notes.push("domain shape not supported by the steepness probe".into());
                Vec::new()
            }
        }
    };

    let mut undecided = false;
    for (edge, inner) in &rays {
        let slopes: Vec<f64> =
            (1..=ray_steps.max(2)).map(|k| ray_slope(f, edge, inner, 10f64.powi(-(k as i32)))).collect::<Result<_>>()?;
        let last = *slopes.last().unwrap();
        let decreasing = slopes.windows(2).all(|w| w[1] < w[0]);
        if last <= STEEP_THRESHOLD && !decreasing {
            undecided = true;
        }
        let violation = if decreasing { last - STEEP_THRESHOLD } else { last.max(0.0) - STEEP_THRESHOLD };
        report.record(violation, 0.0, || edge.clone());
    }
    if undecided && report.status == Status::Pass {
        report.status = Status::Inconclusive;
        notes.push("slopes are very negative but not monotone along some ray".into());
    }
    Ok(report.with_note(notes.join("; ")))
}

/// Midpoint test F((x+y)/2) < (F(x)+F(y))/2 on pairs spread over the window.
fn strict_convexity(f: &ConvexFunction, report: &mut CheckReport) -> Result<()> {
    let Some(window) = f.domain().window() else {
        report.record(f64::INFINITY, 0.0, || f.domain().interior_point());
        return Ok(());
    };
    const N: usize = 7;
    let point = |t: f64, shift: f64| -> Vec<f64> {
        window.iter().enumerate().map(|(j, (lo, hi))| lo + (hi - lo) * ((t + shift * j as f64) % 1.0)).collect()
    };
    for i in 0..N {
        for j in i + 1..N {
            let x = point((i as f64 + 0.5) / N as f64, 0.37);
            let y = point((j as f64 + 0.5) / N as f64, 0.61);
            let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
            let (fx, fy, fm) = (f.eval_finite(&x)?, f.eval_finite(&y)?, f.eval_finite(&mid)?);
            let avg = 0.5 * (fx + fy);
            // violation ≤ 0 iff the strict gap is present
            let violation = fm - avg + STRICT_GAP * (1.0 + avg.abs());
            report.record(violation, 0.0, || mid.clone());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::lookup_spec;

    fn check(spec: &str) -> CheckReport {
        check_legendre_type(&lookup_spec(spec).unwrap(), 4, 8).unwrap()
    }

    #[test]
    fn whole_line_is_trivially_steep() {
        let r = check("exp");
        assert!(r.passed(), "{r:?}");
        assert!(r.note.unwrap().contains("trivially"));
    }

    #[test]
    fn log_barrier_is_steep() {
        assert!(check("neg-log").passed());
        assert!(check("entropy").passed());
        assert!(check("neg-log-conjugate").passed());
    }

    #[test]
    fn restricted_exp_abs_has_flat_boundary_slope() {
        // the slope at 0⁺ is e⁰ − 1 = 0, so the positive restriction is not steep
        let r = check("exp-abs{positive=1}");
        assert_eq!(r.status, Status::Fail);
    }

    #[test]
    fn affine_and_indicators_fail() {
        assert_eq!(check("affine{a=[2]}").status, Status::Fail);
        assert_eq!(check("ball-indicator{dim=2}").status, Status::Fail);
        assert_eq!(check("indicator-point{a=[1]}").status, Status::Fail);
    }

    #[test]
    fn two_dimensional_inputs() {
        assert!(check("quadratic-form{Q=[[2,1],[1,2]]}").passed());
        // on the ray toward (t, 0) the slope is −t²/(4λ²)·… and diverges
        assert!(check("rockafellar-2d").passed());
    }
}
