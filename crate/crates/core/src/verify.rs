//! Seeded property suites over the whole library.
//!
//! Each suite returns a [`SuiteReport`] made of [`CheckReport`]s. Everything is
//! driven by a `ChaCha8Rng`, so a seed reproduces a run exactly; wall-clock
//! measurements only appear in the optional large oracle run.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::affine::{deform, DeformParams};
use crate::divergence::{divergence_report, fenchel_young, invariance_check, DualPoint};
use crate::error::{Error, Result};
use crate::funcspace::ext::{ExtendedReal, PosInf};
use crate::funcspace::{lookup_spec, ConvexFunction, GridFunction, GridSpec};
use crate::generalized::{default_probes, theorem_check};
use crate::legendre::{
    biconjugate_grid, check_legendre_type, check_reverse_order, conjugate_closed, conjugate_grid_brute, conjugate_grid_fast,
    conjugate_points_brute, subdiff_1d, ConjugatePair, Engine,
};
use crate::report::{CheckReport, Status};

/// Tolerances used by the suites. Missing keys in a config file keep their
/// defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub theorem_closed: f64,
    pub theorem_newton: f64,
    pub theorem_grid: f64,
    pub involution: f64,
    pub convexity: f64,
    pub closed_forms: f64,
    pub biconjugate: f64,
    pub biconjugate_below: f64,
    pub gradients: f64,
    pub triple: f64,
    pub invariance: f64,
    pub fenchel_young_floor: f64,
    pub fenchel_young_equality: f64,
    pub subdifferential: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            theorem_closed: 1e-9,
            theorem_newton: 1e-6,
            theorem_grid: 1e-3,
            involution: 1e-10,
            convexity: 1e-10,
            closed_forms: 1e-9,
            biconjugate: 1e-4,
            biconjugate_below: 1e-12,
            gradients: 1e-6,
            triple: 1e-6,
            invariance: 1e-5,
            fenchel_young_floor: 1e-9,
            fenchel_young_equality: 1e-6,
            subdifferential: 1e-5,
        }
    }
}

impl Tolerances {
    /// Checks that every tolerance is positive and finite.
    pub fn validate(&self) -> Result<()> {
        let v = serde_json::to_value(self)?;
        for (k, x) in v.as_object().into_iter().flatten() {
            let x = x.as_f64().unwrap_or(f64::NAN);
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidParams(format!("tolerance `{k}` must be positive, got {x}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub status: Status,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, checks: Vec<CheckReport>) -> Self {
        let status = if checks.iter().any(|c| c.status == Status::Fail) {
            Status::Fail
        } else if checks.is_empty() || checks.iter().any(|c| c.status == Status::Inconclusive) {
            Status::Inconclusive
        } else {
            Status::Pass
        };
        SuiteReport { suite: suite.into(), status, checks }
    }

    pub fn passed(&self) -> bool {
        self.status.is_pass()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random symmetric positive definite matrix BᵀB + ½I with entries of B in [−2, 2].
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-2.0..2.0));
    let q = b.transpose() * &b + DMatrix::identity(dim, dim) * 0.5;
    (&q + q.transpose()) * 0.5
}

/// Random quadratic ½θᵀQθ + ⟨l,θ⟩ + k.
pub fn random_quadratic<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ConvexFunction {
    let q = random_spd(rng, dim);
    let l = DVector::from_fn(dim, |_, _| rng.gen_range(-2.0..2.0));
    let k = rng.gen_range(-2.0..2.0);
    ConvexFunction::quadratic_unchecked(q, DVector::zeros(dim), l, k, format!("quadratic-form(dim={dim})"))
}

pub fn random_params(seed: u64, dim: usize, count: usize) -> Vec<DeformParams> {
    let mut r = rng(seed);
    (0..count).map(|_| DeformParams::random(&mut r, dim, 1e3)).collect()
}

fn merge(name: &str, reports: impl IntoIterator<Item = CheckReport>) -> CheckReport {
    let mut out = CheckReport::new(name);
    let mut notes = Vec::new();
    for r in reports {
        out.samples += r.samples;
        if r.worst_violation > out.worst_violation || (r.worst_violation.is_nan() && !out.worst_violation.is_nan()) {
            out.worst_violation = r.worst_violation;
            out.witness = r.witness.clone();
        }
        match (out.status, r.status) {
            (_, Status::Fail) => out.status = Status::Fail,
            (Status::Pass, Status::Inconclusive) => out.status = Status::Inconclusive,
            _ => {}
        }
        if let Some(n) = r.note {
            if !notes.contains(&n) {
                notes.push(n);
            }
        }
    }
    if notes.is_empty() {
        out
    } else {
        out.with_note(notes.join("; "))
    }
}

/// (L F)_P against L(F_{P⋄}) for each case. With `both_readings`, the same
/// harness also runs at P⋄, where the identity reads (L F)_{P⋄} = L(F_P).
pub fn theorem_suite(
    name: &str,
    cases: &[(ConvexFunction, DeformParams)],
    engine: &Engine,
    tolerance: f64,
    probes: usize,
    both_readings: bool,
) -> Result<CheckReport> {
    let mut reports = Vec::new();
    for (f, p) in cases {
        let mut run = |p: &DeformParams| -> Result<()> {
            let points = default_probes(f, p, probes)?;
            reports.push(theorem_check(f, p, &points, engine, tolerance)?.summary);
            Ok(())
        };
        run(p)?;
        if both_readings {
            run(&p.diamond())?;
        }
    }
    Ok(merge(name, reports))
}

/// Theorem checks at the acceptance scale.
pub fn theorem_full(seed: u64, quadratic_count: usize, smooth_count: usize, tol: &Tolerances) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for dim in [1, 2] {
        let mut r = rng(seed.wrapping_add(dim as u64));
        let cases: Vec<_> =
            (0..quadratic_count).map(|_| (random_quadratic(&mut r, dim), DeformParams::random(&mut r, dim, 1e3))).collect();
        checks.push(theorem_suite(
            &format!("theorem quadratic {dim}d closed"),
            &cases,
            &Engine::Closed,
            tol.theorem_closed,
            41,
            false,
        )?);
    }
    for spec in ["exp", "exp-abs{positive=1}", "power-norm{p=1.5}", "power-norm{p=2}", "power-norm{p=3}"] {
        let f = lookup_spec(spec)?;
        let cases: Vec<_> = random_params(seed, 1, smooth_count).into_iter().map(|p| (f.clone(), p)).collect();
        checks.push(theorem_suite(&format!("theorem {spec} newton"), &cases, &Engine::newton(), tol.theorem_newton, 41, false)?);
        checks.push(theorem_suite(&format!("theorem {spec} grid"), &cases, &Engine::grid(None), tol.theorem_grid, 41, false)?);
    }
    Ok(SuiteReport::new("theorem", checks))
}

/// (P⋄)⋄ = P componentwise for random P in 1–3 dimensions.
pub fn involution_suite(seed: u64, count: usize, tol: &Tolerances) -> SuiteReport {
    let mut r = rng(seed);
    let mut check = CheckReport::new("involution");
    for i in 0..count {
        let p = DeformParams::random(&mut r, 1 + i % 3, 1e3);
        let back = p.diamond().diamond();
        let worst = p.relative_deviation(&back).into_iter().fold(0.0, f64::max);
        check.record(worst, tol.involution, || vec![i as f64]);
    }
    SuiteReport::new("involution", vec![check])
}

/// Catalog entries exercised by the convexity suite.
pub const CONVEXITY_CATALOG: &[&str] = &[
    "affine{a=[1.5],b=0.5}",
    "exp",
    "power-norm{p=1}",
    "power-norm{p=1.5}",
    "power-norm{p=3,dim=2}",
    "exp-abs",
    "exp-abs{positive=1}",
    "quadratic",
    "quadratic-form{Q=[[2,0.5],[0.5,1]],l=[1,-1],k=2}",
    "indicator-point{a=[0.5,-1]}",
    "rockafellar-2d",
    "neg-log",
    "entropy",
    "exp-abs-conjugate",
    "ball-indicator{dim=2}",
    "neg-log-conjugate",
];

fn sample_window<R: Rng + ?Sized>(r: &mut R, f: &ConvexFunction) -> Vec<f64> {
    match f.domain().window() {
        Some(w) => w.iter().map(|(lo, hi)| r.gen_range(*lo..*hi)).collect(),
        None => f.domain().interior_point(),
    }
}

/// Midpoint convexity of F_P at point pairs pulled back from F's window.
pub fn convexity_suite(seed: u64, params_per_fn: usize, pairs: usize, tol: &Tolerances) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for (k, spec) in CONVEXITY_CATALOG.iter().enumerate() {
        let f = lookup_spec(spec)?;
        let mut r = rng(seed.wrapping_add(k as u64));
        let mut check = CheckReport::new(format!("convexity {spec}"));
        for _ in 0..params_per_fn {
            let p = DeformParams::random(&mut r, f.dim(), 1e3);
            let fp = deform(&f, &p)?;
            for _ in 0..pairs {
                let x = p.inner_map_inverse(&sample_window(&mut r, &f));
                let y = p.inner_map_inverse(&sample_window(&mut r, &f));
                let mid = (&x + &y) * 0.5;
                let (fx, fy, fm) = (fp.eval(x.as_slice())?, fp.eval(y.as_slice())?, fp.eval(mid.as_slice())?);
                let violation = match (fx.finite(), fy.finite(), fm.finite()) {
                    (Some(a), Some(b), Some(m)) => m - 0.5 * (a + b),
                    (Some(_), Some(_), None) => f64::INFINITY,
                    _ => 0.0,
                };
                check.record(violation, tol.convexity, || [x.as_slice(), y.as_slice()].concat());
            }
        }
        checks.push(check);
    }
    Ok(SuiteReport::new("convexity", checks))
}

/// Oracle closed forms, written out independently of the catalog.
fn entropy_oracle(eta: f64) -> ExtendedReal {
    if eta < 0.0 {
        PosInf
    } else if eta == 0.0 {
        ExtendedReal::real(0.0)
    } else {
        ExtendedReal::real(eta * eta.ln() - eta)
    }
}

fn close(got: ExtendedReal, want: ExtendedReal) -> f64 {
    match (got, want) {
        (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => (a - b).abs(),
        (a, b) if a == b => 0.0,
        _ => f64::INFINITY,
    }
}

/// The analytic conjugates against hand-written formulas.
pub fn closed_forms_suite(seed: u64, points: usize, tol: &Tolerances) -> Result<SuiteReport> {
    let mut r = rng(seed);
    let mut checks = Vec::new();
    let mut run = |name: &str,
                   spec: &str,
                   sample: &mut dyn FnMut(&mut ChaCha8Rng, usize) -> Vec<f64>,
                   oracle: &dyn Fn(&[f64]) -> ExtendedReal|
     -> Result<()> {
        let conj = conjugate_closed(&lookup_spec(spec)?)?;
        let mut check = CheckReport::new(format!("closed-form {name}"));
        for i in 0..points {
            let eta = sample(&mut r, i);
            let d = close(conj.eval(&eta)?, oracle(&eta));
            check.record(d, tol.closed_forms, || eta.clone());
        }
        checks.push(check);
        Ok(())
    };
    run("exp", "exp", &mut |r, i| vec![if i % 50 == 0 { 0.0 } else { r.gen_range(-2.0..10.0) }], &|e| entropy_oracle(e[0]))?;
    run("affine", "affine{a=[1.5],b=0.7}", &mut |r, i| vec![if i % 3 == 0 { 1.5 } else { r.gen_range(-5.0..5.0) }], &|e| {
        if e[0] == 1.5 {
            ExtendedReal::real(-0.7)
        } else {
            PosInf
        }
    })?;
    run(
        "indicator",
        "indicator-point{a=[1.5,-2],b=0.7}",
        &mut |r, _| vec![r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0)],
        &|e| ExtendedReal::real(1.5 * e[0] - 2.0 * e[1] - 0.7),
    )?;
    for p in [1.5f64, 3.0] {
        let q = p / (p - 1.0);
        run(
            &format!("power-norm p={p}"),
            &format!("power-norm{{p={p},dim=2}}"),
            &mut |r, _| vec![r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0)],
            &move |e| ExtendedReal::real((e[0] * e[0] + e[1] * e[1]).sqrt().powf(q) / q),
        )?;
    }
    run("quadratic", "quadratic{dim=2}", &mut |r, _| vec![r.gen_range(-10.0..10.0), r.gen_range(-10.0..10.0)], &|e| {
        ExtendedReal::real(0.5 * (e[0] * e[0] + e[1] * e[1]))
    })?;
    run("exp-abs", "exp-abs", &mut |r, _| vec![r.gen_range(-10.0..10.0)], &|e| {
        let a = e[0].abs();
        ExtendedReal::real((1.0 + a) * (1.0 + a).ln() - a)
    })?;
    Ok(SuiteReport::new("closed-forms", checks))
}

fn random_grid<R: Rng + ?Sized>(r: &mut R, n: usize, convex: bool, inf_rate: f64, integer: bool) -> GridFunction {
    let mut theta = Vec::with_capacity(n);
    let mut x: f64 = if integer { r.gen_range(-20..0) as f64 } else { r.gen_range(-5.0..0.0) };
    for _ in 0..n {
        theta.push(x);
        x += if integer { r.gen_range(1..3) as f64 } else { r.gen_range(0.001..0.1) };
    }
    let a: f64 = r.gen_range(0.1..3.0);
    let mut values: Vec<ExtendedReal> = theta
        .iter()
        .map(|t| {
            let v = if integer {
                if convex {
                    (t * t).round()
                } else {
                    r.gen_range(-5..5) as f64
                }
            } else if convex {
                a * t * t + r.gen_range(-1e-3..1e-3)
            } else {
                r.gen_range(-3.0..3.0)
            };
            if r.gen::<f64>() < inf_rate {
                PosInf
            } else {
                ExtendedReal::real(v)
            }
        })
        .collect();
    if !values.iter().any(|v| v.is_finite()) {
        values[0] = ExtendedReal::real(0.0);
    }
    GridFunction::new(vec![theta], values).expect("valid random grid")
}

fn random_dual<R: Rng + ?Sized>(r: &mut R, k: usize, integer: bool) -> Vec<f64> {
    let mut eta: Vec<f64> =
        (0..k).map(|_| if integer { r.gen_range(-40..40) as f64 } else { r.gen_range(-15.0..15.0) }).collect();
    eta.sort_by(f64::total_cmp);
    eta.dedup();
    let mut next = eta.last().copied().unwrap_or(0.0);
    while eta.len() < 2 {
        next += 1.0;
        eta.push(next);
    }
    eta
}

/// Fast and brute-force discrete transforms on random instances, compared
/// bit for bit.
pub fn oracle_suite(seed: u64, instances: usize, max_n: usize) -> Result<CheckReport> {
    let mut r = rng(seed);
    let mut check = CheckReport::new("oracle fast = brute");
    for i in 0..instances {
        let n = r.gen_range(2..=max_n.max(2));
        let k = r.gen_range(2..=max_n.max(2));
        let integer = i % 4 == 3;
        let convex = i % 2 == 0;
        let inf_rate = if i % 3 == 0 { 0.2 } else { 0.0 };
        let g = random_grid(&mut r, n, convex, inf_rate, integer);
        let dual = vec![random_dual(&mut r, k, integer)];
        let fast = conjugate_grid_fast(&g, &dual)?;
        let brute = conjugate_grid_brute(&g, &dual)?;
        let mismatches = fast
            .values
            .iter()
            .zip(&brute.values)
            .zip(fast.argmax.iter().zip(&brute.argmax))
            .filter(|((a, b), (x, y))| a.to_f64().to_bits() != b.to_f64().to_bits() || x != y)
            .count();
        check.record(mismatches as f64, 0.0, || vec![i as f64, n as f64, k as f64]);
    }
    Ok(check)
}

/// Timings and spot checks for one large instance.
#[derive(Clone, Debug, Serialize)]
pub struct LargeOracle {
    pub check: CheckReport,
    pub fast_seconds: f64,
    /// Brute force on the spot-checked nodes, scaled to the full dual grid.
    pub brute_seconds_estimate: f64,
    pub speedup: f64,
}

pub fn oracle_large(seed: u64, size: usize, spot_checks: usize) -> Result<LargeOracle> {
    let mut r = rng(seed);
    let spec: GridSpec = format!("-5:5:{size}").parse()?;
    let axes = spec.axes();
    let values = axes[0].iter().map(|t| ExtendedReal::real(t.exp() + r.gen_range(-1e-6..1e-6))).collect();
    let g = GridFunction::new(axes, values)?;
    let dual = vec![(0..size).map(|i| 0.001 + 150.0 * i as f64 / (size - 1) as f64).collect::<Vec<_>>()];

    let t0 = Instant::now();
    let fast = conjugate_grid_fast(&g, &dual)?;
    let fast_seconds = t0.elapsed().as_secs_f64();

    let picks: Vec<usize> = (0..spot_checks).map(|i| i * (size - 1) / (spot_checks - 1).max(1)).collect();
    let points: Vec<Vec<f64>> = picks.iter().map(|&i| vec![dual[0][i]]).collect();
    let t0 = Instant::now();
    let brute = conjugate_points_brute(&g, &points)?;
    let brute_spot = t0.elapsed().as_secs_f64();
    let brute_seconds_estimate = brute_spot * size as f64 / spot_checks as f64;

    let mut check = CheckReport::new(format!("oracle spot checks n=k={size}"));
    for (&i, (v, a)) in picks.iter().zip(&brute) {
        let same = fast.values[i].to_f64().to_bits() == v.to_f64().to_bits() && fast.argmax[i] == *a;
        check.record(if same { 0.0 } else { 1.0 }, 0.0, || vec![dual[0][i]]);
    }
    let speedup = brute_seconds_estimate / fast_seconds.max(1e-9);
    Ok(LargeOracle { check, fast_seconds, brute_seconds_estimate, speedup })
}

/// Biconjugates of convex and non-convex samples.
pub fn biconjugate_suite(seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let spec: GridSpec = "-5:5:1001".parse()?;
    let g = GridFunction::sample(&lookup_spec("quadratic")?, &spec)?;
    let bi = biconjugate_grid(&g)?;
    let n = g.len();
    let mut c = CheckReport::new("biconjugate quadratic central 80%");
    for i in n / 10..=n - 1 - n / 10 {
        c.record((bi.values()[i].to_f64() - g.values()[i].to_f64()).abs(), tol.biconjugate, || g.node(i));
    }
    checks.push(c);

    let mut r = rng(seed);
    let mut below = CheckReport::new("biconjugate below samples");
    let mut inputs: Vec<GridFunction> = vec![
        GridFunction::sample(&lookup_spec("exp")?, &"-3:3:601".parse()?)?,
        GridFunction::sample(&lookup_spec("quadratic-form{Q=[[2,0.5],[0.5,1]]}")?, &"-2:2:31,-2:2:31".parse()?)?,
        GridFunction::sample(&lookup_spec("rockafellar-2d")?, &"-1:1:21,-1:1:21".parse()?)?,
    ];
    let axis: Vec<f64> = "-1:1:201".parse::<GridSpec>()?.axes().remove(0);
    inputs.push(GridFunction::new(vec![axis.clone()], axis.iter().map(|t| ExtendedReal::real(-t * t)).collect())?);
    for _ in 0..20 {
        let n = r.gen_range(2..300);
        inputs.push(random_grid(&mut r, n, false, 0.1, false));
    }
    for _ in 0..5 {
        let axes = vec![random_dual(&mut r, 12, false), random_dual(&mut r, 9, false)];
        let len = axes[0].len() * axes[1].len();
        let values = (0..len).map(|_| ExtendedReal::real(r.gen_range(-2.0..2.0))).collect();
        inputs.push(GridFunction::new(axes, values)?);
    }
    for g in &inputs {
        let bi = biconjugate_grid(g)?;
        for (i, (a, b)) in g.values().iter().zip(bi.values()).enumerate() {
            let violation = match (a, b) {
                (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => y - x,
                _ if b <= a => 0.0,
                _ => f64::INFINITY,
            };
            below.record(violation, tol.biconjugate_below, || g.node(i));
        }
    }
    checks.push(below);
    Ok(SuiteReport::new("biconjugate", checks))
}

/// Order reversal on random pairs f2 ≤ f1.
pub fn reverse_order_suite(seed: u64, pairs: usize) -> Result<SuiteReport> {
    let mut r = rng(seed);
    let mut reports = Vec::new();
    for i in 0..pairs {
        let f1 = if i % 5 == 4 {
            let axes = vec![random_dual(&mut r, 10, false), random_dual(&mut r, 10, false)];
            let len = axes[0].len() * axes[1].len();
            let values = (0..len).map(|_| ExtendedReal::real(r.gen_range(-2.0..2.0))).collect();
            GridFunction::new(axes, values)?
        } else {
            let n = r.gen_range(2..200);
            random_grid(&mut r, n, i % 2 == 0, 0.1, false)
        };
        let lowered = f1.values().iter().map(|v| v.add_real(-r.gen_range(0.0..1.0))).collect();
        let f2 = GridFunction::new(f1.axes().to_vec(), lowered)?;
        let dual: Vec<Vec<f64>> = (0..f1.dim()).map(|_| random_dual(&mut r, 40, false)).collect();
        reports.push(check_reverse_order(&f1, &f2, &dual)?);
    }
    Ok(SuiteReport::new("reverse-order", vec![merge("reverse-order", reports)]))
}

/// Legendre-type pairs with analytic conjugates.
pub const LEGENDRE_PAIRS: &[&str] = &[
    "exp",
    "quadratic{dim=2}",
    "quadratic-form{Q=[[2,0.5],[0.5,1]],l=[1,-1],k=2}",
    "power-norm{p=1.5}",
    "power-norm{p=3,dim=2}",
    "neg-log",
    "exp-abs{positive=1}",
];

/// Deterministic interior points over the inner 80% of F's window.
fn interior_points(f: &ConvexFunction, count: usize) -> Vec<Vec<f64>> {
    let window = f.domain().window().expect("legendre pairs have windows");
    let golden = 0.618_033_988_749_895;
    (0..count)
        .map(|i| {
            let t = (i as f64 + 0.5) / count as f64;
            window
                .iter()
                .enumerate()
                .map(|(j, (lo, hi))| {
                    let s = if j == 0 { t } else { (t + golden * (i as f64 + 1.0)) % 1.0 };
                    lo + (hi - lo) * (0.1 + 0.8 * s)
                })
                .collect()
        })
        .collect()
}

/// ∇F*(∇F(θ)) = θ at interior points.
pub fn gradients_suite(points: usize, tol: &Tolerances) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for spec in LEGENDRE_PAIRS {
        let pair = ConjugatePair::new(lookup_spec(spec)?, Engine::Closed)?;
        let mut c = CheckReport::new(format!("reciprocal gradients {spec}"));
        for theta in interior_points(&pair.primal, points) {
            let back = pair.dual.gradient(&pair.primal.gradient(&theta)?)?;
            let err = back.iter().zip(&theta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            c.record(err, tol.gradients, || theta.clone());
        }
        checks.push(c);
    }
    Ok(SuiteReport::new("gradients", checks))
}

/// Triple equivalence, 1/λ invariance and the Fenchel-Young inequality.
pub fn divergence_suite(seed: u64, linked: usize, params_per_fn: usize, tol: &Tolerances) -> Result<SuiteReport> {
    let mut r = rng(seed);
    let mut triple = Vec::new();
    let mut invariance = Vec::new();
    let mut fy_floor = CheckReport::new("fenchel-young nonnegative");
    let mut fy_equal = CheckReport::new("fenchel-young equality at linked pairs");
    for spec in LEGENDRE_PAIRS {
        let pair = ConjugatePair::new(lookup_spec(spec)?, Engine::Closed)?;
        let sample = |r: &mut ChaCha8Rng| sample_window(r, &pair.primal);

        let mut c = CheckReport::new(format!("triple equivalence {spec}"));
        for _ in 0..linked {
            let theta = sample(&mut r);
            let eta_prime = pair.primal.gradient(&sample(&mut r))?;
            let rep = divergence_report(&pair, &theta, &eta_prime)?;
            c.record(rep.spread(), tol.triple, || theta.clone());
        }
        triple.push(c);

        let mut c = CheckReport::new(format!("invariance {spec}"));
        for _ in 0..params_per_fn {
            let p = DeformParams::random(&mut r, pair.primal.dim(), 1e3);
            let a = DualPoint::from_theta(&pair.primal, &sample(&mut r))?;
            let b = DualPoint::from_theta(&pair.primal, &sample(&mut r))?;
            let rep = invariance_check(&pair, &p, &a, &b, tol.invariance)?;
            c.record(rep.summary.worst_violation, tol.invariance, || [a.theta.clone(), b.theta.clone()].concat());
        }
        invariance.push(c);

        for _ in 0..linked {
            let theta = sample(&mut r);
            let eta = sample_window(&mut r, &pair.dual);
            let y = fenchel_young(&pair.primal, &pair.dual, &theta, &eta)?;
            fy_floor.record(-y, tol.fenchel_young_floor, || [theta.clone(), eta.clone()].concat());
            let linked_eta = pair.primal.gradient(&theta)?;
            let y = fenchel_young(&pair.primal, &pair.dual, &theta, &linked_eta)?;
            fy_floor.record(-y, tol.fenchel_young_floor, || [theta.clone(), linked_eta.clone()].concat());
            fy_equal.record(y.abs(), tol.fenchel_young_equality, || theta.clone());
        }
    }
    let mut checks = vec![merge("triple equivalence", triple), merge("invariance", invariance)];
    checks.push(fy_floor);
    checks.push(fy_equal);
    Ok(SuiteReport::new("divergence", checks))
}

/// The subdifferential of exp|θ| − |θ| − 1 at 0 against [−1, 1], plus the
/// smooth points θ = 1 of F and η = −2 of F*.
pub fn subdifferential_suite(tol: &Tolerances) -> Result<SuiteReport> {
    let h = 1e-6;
    let f = lookup_spec("exp-abs")?;
    let g = lookup_spec("exp-abs-conjugate")?;
    let mut kink = CheckReport::new("subdifferential exp-abs at 0 = [-1, 1]");
    let s = subdiff_1d(&f, 0.0, h)?;
    kink.record((s.lower.to_f64() + 1.0).abs(), tol.subdifferential, || vec![s.lower.to_f64()]);
    kink.record((s.upper.to_f64() - 1.0).abs(), tol.subdifferential, || vec![s.upper.to_f64()]);
    let kink = kink.with_note(format!("one-sided slopes [{}, {}]", s.lower, s.upper));

    let mut smooth = CheckReport::new("subdifferential smooth points");
    for (func, at, want) in [(&f, 1.0, 1f64.exp() - 1.0), (&g, -2.0, -(3f64.ln()))] {
        let s = subdiff_1d(func, at, h)?;
        smooth.record((s.lower.to_f64() - want).abs(), tol.subdifferential, || vec![at]);
        smooth.record((s.upper.to_f64() - want).abs(), tol.subdifferential, || vec![at]);
    }
    Ok(SuiteReport::new("subdifferential", vec![kink, smooth]))
}

/// The Legendre-type checker on one function.
pub fn legendre_type_suite(f: &ConvexFunction) -> Result<SuiteReport> {
    Ok(SuiteReport::new("legendre-type", vec![check_legendre_type(f, 8, 8)?]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs() {
        let tol = Tolerances::default();
        assert!(involution_suite(1, 50, &tol).passed());
        assert!(convexity_suite(1, 3, 20, &tol).unwrap().passed());
        assert!(closed_forms_suite(1, 100, &tol).unwrap().passed());
        assert!(oracle_suite(1, 30, 64).unwrap().passed());
        assert!(reverse_order_suite(1, 10).unwrap().passed());
        assert!(gradients_suite(10, &tol).unwrap().passed());
        assert!(divergence_suite(1, 10, 3, &tol).unwrap().passed());
    }

    #[test]
    fn suite_status_aggregation() {
        let mut bad = CheckReport::new("x");
        bad.record(1.0, 0.5, Vec::new);
        assert_eq!(SuiteReport::new("s", vec![CheckReport::new("ok"), bad]).status, Status::Fail);
        assert_eq!(SuiteReport::new("s", vec![]).status, Status::Inconclusive);
    }

    #[test]
    fn tolerances_from_partial_json() {
        let t: Tolerances = serde_json::from_str(r#"{"involution": 1e-8}"#).unwrap();
        assert_eq!(t.involution, 1e-8);
        assert_eq!(t.theorem_closed, 1e-9);
        assert!(serde_json::from_str::<Tolerances>(r#"{"nope": 1}"#).is_err());
        let neg = Tolerances { gradients: -1.0, ..Tolerances::default() };
        assert!(neg.validate().is_err());
    }
}
