//! Verb implementations. Each verb returns the artifact text and whether the
//! run counts as a success for the exit code.

use std::io::Write;

use lft::divergence::{divergence_report, DivergenceReport};
use lft::funcspace::lookup_spec;
use lft::generalized::{default_probes, theorem_check};
use lft::legendre::{
    auto_dual_axes, conjugate_closed, conjugate_grid_brute, conjugate_grid_fast, conjugate_with, default_window, subdiff_1d,
    DEFAULT_GRID_NODES,
};
use lft::verify::{
    biconjugate_suite, closed_forms_suite, convexity_suite, divergence_suite, gradients_suite, involution_suite,
    legendre_type_suite, oracle_suite, random_params, reverse_order_suite, subdifferential_suite, theorem_suite, SuiteReport,
    Tolerances,
};
use lft::{
    deform, CheckReport, ConjugatePair, ConvexFunction, DeformParams, Engine, ExtendedReal, GridFunction, GridSpec, Status,
};
use serde::Serialize;

use crate::args::{
    Common, ConjugateArgs, DeformArgs, DiamondArgs, DivergenceArgs, EngineName, Format, ParamsArgs, PlotdataArgs, Suite,
    VerifyArgs,
};
use crate::config::Config;
use crate::error::CliError;

pub type CliResult<T> = std::result::Result<T, CliError>;

/// A finished run: the text to emit and whether it succeeded.
pub struct Artifact {
    pub text: String,
    pub ok: bool,
}

impl Artifact {
    fn ok(text: String) -> Self {
        Artifact { text, ok: true }
    }
}

pub fn emit(common: &Common, artifact: &Artifact) -> CliResult<()> {
    match &common.out {
        Some(path) => {
            std::fs::write(path, &artifact.text).map_err(|e| CliError::from(lft::Error::Io(format!("{}: {e}", path.display()))))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(artifact.text.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::from(lft::Error::from(e)))
        }
    }
}

fn load(common: &Common) -> CliResult<Config> {
    Ok(Config::load(common.config.as_deref())?)
}

fn function(config: &Config, spec: &str) -> CliResult<ConvexFunction> {
    Ok(lookup_spec(config.resolve(spec))?)
}

fn grid_spec(text: Option<&str>) -> CliResult<Option<GridSpec>> {
    Ok(text.map(str::parse).transpose()?)
}

fn primal_grid(f: &ConvexFunction, text: Option<&str>) -> CliResult<GridSpec> {
    match grid_spec(text)? {
        Some(g) => {
            if g.dim() != f.dim() {
                return Err(lft::Error::DimensionMismatch { expected: f.dim(), got: g.dim() }.into());
            }
            Ok(g)
        }
        None => Ok(default_window(f, DEFAULT_GRID_NODES)?),
    }
}

/// The engine named on the command line. Without a name, catalog rules are
/// preferred and `fallback` is used when none applies.
fn engine(name: Option<EngineName>, window: Option<GridSpec>, f: &ConvexFunction, fallback: EngineName) -> Engine {
    let name = name.unwrap_or_else(|| if conjugate_closed(f).is_ok() { EngineName::Closed } else { fallback });
    match name {
        EngineName::Closed => Engine::Closed,
        EngineName::Newton => Engine::newton(),
        EngineName::GridBrute => Engine::Grid { window, fast: false },
        EngineName::GridFast => Engine::Grid { window, fast: true },
    }
}

/// Parameter tuples from `--P` or `--P-random`.
fn params(args: &ParamsArgs, seed: u64, dim: usize, default_count: Option<usize>) -> CliResult<Vec<DeformParams>> {
    if let Some(text) = &args.p {
        let p = DeformParams::from_json(text)?;
        if p.dim() != dim {
            return Err(lft::Error::DimensionMismatch { expected: dim, got: p.dim() }.into());
        }
        return Ok(vec![p]);
    }
    match args.p_random.or(default_count) {
        Some(0) => Err(CliError::usage("--P-random needs at least one tuple")),
        Some(n) => Ok(random_params(seed, dim, n)),
        None => Err(CliError::usage("pass --P or --P-random")),
    }
}

fn nodes(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    match axes {
        [x] => x.iter().map(|&a| vec![a]).collect(),
        [x, y] => x.iter().flat_map(|&a| y.iter().map(move |&b| vec![a, b])).collect(),
        _ => Vec::new(),
    }
}

fn grid_text(g: &GridFunction, format: Format) -> CliResult<String> {
    match format {
        Format::Json => Ok(g.to_json() + "\n"),
        Format::Csv => {
            let mut buf = Vec::new();
            g.write_csv(&mut buf)?;
            Ok(String::from_utf8(buf).expect("csv is utf-8"))
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

/// F* tabulated on `dual_axes` by the given engine.
fn conjugate_table(
    f: &ConvexFunction,
    samples: &GridFunction,
    dual_axes: &[Vec<f64>],
    engine: &Engine,
) -> CliResult<GridFunction> {
    match engine {
        Engine::Grid { fast: true, .. } => Ok(conjugate_grid_fast(samples, dual_axes)?.to_grid()?),
        Engine::Grid { fast: false, .. } => Ok(conjugate_grid_brute(samples, dual_axes)?.to_grid()?),
        _ => {
            let h = conjugate_with(f, engine)?;
            let values = nodes(dual_axes).iter().map(|eta| h.eval(eta)).collect::<lft::Result<Vec<_>>>()?;
            Ok(GridFunction::new(dual_axes.to_vec(), values)?)
        }
    }
}

fn dual_axes(samples: &GridFunction, text: Option<&str>) -> CliResult<Vec<Vec<f64>>> {
    match grid_spec(text)? {
        Some(g) if g.dim() != samples.dim() => {
            Err(lft::Error::DimensionMismatch { expected: samples.dim(), got: g.dim() }.into())
        }
        Some(g) => Ok(g.axes()),
        None => Ok(auto_dual_axes(samples)),
    }
}

pub fn conjugate(args: &ConjugateArgs) -> CliResult<Artifact> {
    let config = load(&args.common)?;
    let f = function(&config, &args.function)?;
    let spec = primal_grid(&f, args.grid.as_deref())?;
    let samples = GridFunction::sample(&f, &spec)?;
    let dual = dual_axes(&samples, args.dual_grid.as_deref())?;
    let engine = engine(args.engine, Some(spec), &f, EngineName::GridFast);
    let table = conjugate_table(&f, &samples, &dual, &engine)?;
    Ok(Artifact::ok(grid_text(&table, args.common.format.unwrap_or(Format::Csv))?))
}

pub fn deform_verb(args: &DeformArgs) -> CliResult<Artifact> {
    let config = load(&args.common)?;
    let f = function(&config, &args.function)?;
    let ps = params(&args.params, args.common.seed, f.dim(), None)?;
    let [p] = ps.as_slice() else {
        return Err(CliError::usage("deform takes exactly one parameter tuple"));
    };
    let fp = deform(&f, p)?;
    let spec = primal_grid(&fp, args.grid.as_deref())?;
    let table = GridFunction::sample(&fp, &spec)?;
    Ok(Artifact::ok(grid_text(&table, args.common.format.unwrap_or(Format::Csv))?))
}

#[derive(Serialize)]
struct DiamondOut {
    #[serde(rename = "P")]
    p: serde_json::Value,
    diamond: serde_json::Value,
}

pub fn diamond(args: &DiamondArgs) -> CliResult<Artifact> {
    if args.common.format == Some(Format::Csv) {
        return Err(CliError::usage("diamond writes JSON only"));
    }
    let dim = match &args.params.p {
        Some(text) => DeformParams::from_json(text)?.dim(),
        None => args.dim,
    };
    let ps = params(&args.params, args.common.seed, dim, None)?;
    let literal = |p: &DeformParams| -> serde_json::Value { serde_json::from_str(&p.to_json()).expect("params are json") };
    let text = match (args.params.p.is_some(), ps.as_slice()) {
        (true, [p]) => json(&literal(&p.diamond())),
        _ => json(&ps.iter().map(|p| DiamondOut { p: literal(p), diamond: literal(&p.diamond()) }).collect::<Vec<_>>()),
    };
    Ok(Artifact::ok(text))
}

/// Applies `--tol` to the tolerances a suite reads.
fn override_tolerance(tol: &mut Tolerances, suite: Suite, engine: &Engine, value: f64) {
    let fields: Vec<&mut f64> = match suite {
        Suite::Theorem => vec![match engine {
            Engine::Closed => &mut tol.theorem_closed,
            Engine::Newton(_) => &mut tol.theorem_newton,
            Engine::Grid { .. } => &mut tol.theorem_grid,
        }],
        Suite::Involution => vec![&mut tol.involution],
        Suite::Convexity => vec![&mut tol.convexity],
        Suite::ClosedForms => vec![&mut tol.closed_forms],
        Suite::Biconjugate => vec![&mut tol.biconjugate],
        Suite::Gradients => vec![&mut tol.gradients],
        Suite::Divergence => vec![&mut tol.triple, &mut tol.invariance, &mut tol.fenchel_young_equality],
        Suite::Subdifferential => vec![&mut tol.subdifferential],
        Suite::Oracle | Suite::ReverseOrder | Suite::LegendreType => Vec::new(),
    };
    for f in fields {
        *f = value;
    }
}

fn status_name(s: Status) -> String {
    serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn checks_csv(suite: &str, checks: &[CheckReport]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["suite", "check", "status", "samples", "worst_violation"]).map_err(lft::Error::from)?;
    for c in checks {
        let row =
            [suite.to_string(), c.check.clone(), status_name(c.status), c.samples.to_string(), c.worst_violation.to_string()];
        w.write_record(&row).map_err(lft::Error::from)?;
    }
    let buf = w.into_inner().map_err(|e| lft::Error::Io(e.to_string()))?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

fn suite_artifact(report: &SuiteReport, format: Format) -> CliResult<Artifact> {
    let text = match format {
        Format::Json => json(report),
        Format::Csv => checks_csv(&report.suite, &report.checks)?,
    };
    Ok(Artifact { text, ok: report.passed() })
}

pub fn verify(args: &VerifyArgs) -> CliResult<Artifact> {
    let config = load(&args.common)?;
    let seed = args.common.seed;
    let format = args.common.format.unwrap_or(Format::Json);
    let window = grid_spec(args.grid.as_deref())?;
    let f = match (&args.function, args.suite) {
        (Some(spec), _) => Some(function(&config, spec)?),
        (None, Suite::Theorem) => Some(lookup_spec("quadratic")?),
        (None, Suite::LegendreType) => return Err(CliError::usage("legendre-type needs --fn")),
        (None, _) => None,
    };
    let engine = match &f {
        Some(f) => engine(args.engine, window, f, EngineName::Newton),
        None => Engine::Closed,
    };
    let mut tol = config.tolerances.clone();
    if let Some(value) = args.tol {
        if !(value > 0.0 && value.is_finite()) {
            return Err(CliError::usage("--tol must be positive"));
        }
        override_tolerance(&mut tol, args.suite, &engine, value);
    }
    let count = args.params.p_random;

    let report = match args.suite {
        Suite::Theorem => {
            let f = f.expect("theorem has a function");
            let tolerance = match engine {
                Engine::Closed => tol.theorem_closed,
                Engine::Newton(_) => tol.theorem_newton,
                Engine::Grid { .. } => tol.theorem_grid,
            };
            let ps = params(&args.params, seed, f.dim(), Some(100))?;
            if args.params.p.is_some() && !args.both_readings {
                let p = &ps[0];
                let probes = default_probes(&f, p, args.probes)?;
                let report = theorem_check(&f, p, &probes, &engine, tolerance)?;
                let text = match format {
                    Format::Json => json(&report),
                    Format::Csv => checks_csv("theorem", std::slice::from_ref(&report.summary))?,
                };
                return Ok(Artifact { text, ok: report.passed() });
            }
            let cases: Vec<_> = ps.into_iter().map(|p| (f.clone(), p)).collect();
            let name = format!("theorem {} {}", f.label(), engine);
            let check = theorem_suite(&name, &cases, &engine, tolerance, args.probes, args.both_readings)?;
            SuiteReport::new("theorem", vec![check])
        }
        Suite::Involution => involution_suite(seed, count.unwrap_or(1000), &tol),
        Suite::Convexity => convexity_suite(seed, count.unwrap_or(100), 500, &tol)?,
        Suite::ClosedForms => closed_forms_suite(seed, 1000, &tol)?,
        Suite::Oracle => SuiteReport::new("oracle", vec![oracle_suite(seed, count.unwrap_or(200), 512)?]),
        Suite::Biconjugate => biconjugate_suite(seed, &tol)?,
        Suite::ReverseOrder => reverse_order_suite(seed, count.unwrap_or(100))?,
        Suite::Gradients => gradients_suite(100, &tol)?,
        Suite::Divergence => divergence_suite(seed, 500, count.unwrap_or(100), &tol)?,
        Suite::Subdifferential => subdifferential_suite(&tol)?,
        Suite::LegendreType => legendre_type_suite(f.as_ref().expect("legendre-type has a function"))?,
    };
    suite_artifact(&report, format)
}

fn divergence_row(r: &DivergenceReport) -> Vec<String> {
    let mut row: Vec<String> = r.inputs.theta.iter().chain(&r.inputs.eta_prime).map(f64::to_string).collect();
    row.extend([r.bregman_primal, r.bregman_dual, r.fenchel_young].iter().map(f64::to_string));
    row
}

fn divergence_header(dim: usize) -> Vec<String> {
    let mut h: Vec<String> = (0..dim).map(|i| format!("theta{i}")).collect();
    h.extend((0..dim).map(|i| format!("eta{i}")));
    h.extend(["bregman_primal", "bregman_dual", "fenchel_young"].map(String::from));
    h
}

fn read_batch(path: &std::path::Path, dim: usize) -> CliResult<Vec<(Vec<f64>, Vec<f64>)>> {
    let file = std::fs::File::open(path).map_err(|e| lft::Error::Io(format!("{}: {e}", path.display())))?;
    let mut r = csv::Reader::from_reader(file);
    let header: Vec<String> = r.headers().map_err(lft::Error::from)?.iter().map(|s| s.trim().to_string()).collect();
    let want: Vec<String> = divergence_header(dim).into_iter().take(2 * dim).collect();
    if header != want {
        return Err(lft::Error::Parse(format!("expected header {}, got {}", want.join(","), header.join(","))).into());
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(lft::Error::from)?;
        let values = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|_| lft::Error::Parse(format!("bad number `{s}`"))))
            .collect::<lft::Result<Vec<f64>>>()?;
        rows.push((values[..dim].to_vec(), values[dim..].to_vec()));
    }
    Ok(rows)
}

pub fn divergence(args: &DivergenceArgs) -> CliResult<Artifact> {
    let config = load(&args.common)?;
    let f = function(&config, &args.function)?;
    let window = grid_spec(args.grid.as_deref())?;
    let engine = engine(args.engine, window, &f, EngineName::Newton);
    let pair = ConjugatePair::new(f, engine)?;
    let dim = pair.primal.dim();
    let (inputs, batch) = match &args.batch {
        Some(path) => (read_batch(path, dim)?, true),
        None => (vec![(args.theta.clone(), args.eta.clone())], false),
    };
    let reports = inputs.iter().map(|(theta, eta)| divergence_report(&pair, theta, eta)).collect::<lft::Result<Vec<_>>>()?;
    let format = args.common.format.unwrap_or(if batch { Format::Csv } else { Format::Json });
    let text = match format {
        Format::Json if batch => json(&reports),
        Format::Json => json(&reports[0]),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(divergence_header(dim)).map_err(lft::Error::from)?;
            for r in &reports {
                w.write_record(divergence_row(r)).map_err(lft::Error::from)?;
            }
            let buf = w.into_inner().map_err(|e| lft::Error::Io(e.to_string()))?;
            String::from_utf8(buf).expect("csv is utf-8")
        }
    };
    Ok(Artifact::ok(text))
}

#[derive(Serialize)]
struct CurvePoint {
    curve: &'static str,
    x: f64,
    value: ExtendedReal,
}

pub fn plotdata(args: &PlotdataArgs) -> CliResult<Artifact> {
    let config = load(&args.common)?;
    let f = function(&config, &args.function)?;
    if f.dim() != 1 {
        return Err(CliError::usage("plotdata is one-dimensional"));
    }
    let spec = primal_grid(&f, args.grid.as_deref())?;
    let samples = GridFunction::sample(&f, &spec)?;
    let mut points: Vec<CurvePoint> =
        samples.nodes().zip(samples.values()).map(|(t, v)| CurvePoint { curve: "primal", x: t[0], value: *v }).collect();
    if args.with_conjugate {
        let dual = dual_axes(&samples, args.dual_grid.as_deref())?;
        let engine = engine(args.engine, Some(spec.clone()), &f, EngineName::GridFast);
        let table = conjugate_table(&f, &samples, &dual, &engine)?;
        points.extend(table.nodes().zip(table.values()).map(|(e, v)| CurvePoint { curve: "conjugate", x: e[0], value: *v }));
    }
    if args.with_subgradients {
        if !(args.step > 0.0 && args.step.is_finite()) {
            return Err(CliError::usage("--step must be positive"));
        }
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for t in samples.nodes() {
            let s = subdiff_1d(&f, t[0], args.step)?;
            if !s.empty {
                lower.push(CurvePoint { curve: "subgradient-lower", x: t[0], value: s.lower });
                upper.push(CurvePoint { curve: "subgradient-upper", x: t[0], value: s.upper });
            }
        }
        points.extend(lower);
        points.extend(upper);
    }
    let text = match args.common.format.unwrap_or(Format::Csv) {
        Format::Json => json(&points),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["curve", "x", "value"]).map_err(lft::Error::from)?;
            for p in &points {
                w.write_record([p.curve.to_string(), p.x.to_string(), p.value.to_string()]).map_err(lft::Error::from)?;
            }
            let buf = w.into_inner().map_err(|e| lft::Error::Io(e.to_string()))?;
            String::from_utf8(buf).expect("csv is utf-8")
        }
    };
    Ok(Artifact::ok(text))
}
