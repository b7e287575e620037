//! Command line front end: normalization weights, cardinality tables,
//! basis tabulation, circle curves, knot insertion, and convergence
//! studies, emitted as CSV/JSON/SVG.
//!
//! Exit codes: 0 ok, 1 domain error, 2 usage error. `THSPLINES_THREADS`
//! caps internal parallelism. Existing output files are only overwritten
//! with `--force`.

mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use thsplines::basis::tabulate;
use thsplines::curve::{make_circle, make_circle_segment, CircleSpec, CurveModel};
use thsplines::fit::{
    builtin_target, least_squares_fit, make_fit_knots, FitProblem, StudyRow, ERROR_FLOOR,
};
use thsplines::knots::{parse_value, BasisSpec, Family, KnotVector};
use thsplines::weights::{
    cardinalities, weight_by_quadrature, weight_canonical_pairings, weight_full_permutations,
    weight_uniform, Strategy, WeightSet, MAX_HALF_DEGREE_FULL, MAX_HALF_DEGREE_PAIRINGS,
};

#[derive(Parser)]
#[command(
    name = "thsplines",
    version,
    about = "Normalized trigonometric and hyperbolic B-splines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the primary output to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Normalization weights for every basis function.
    Weights {
        /// Spline family: trig | hyp.
        #[arg(long)]
        family: String,
        /// Odd spline order m.
        #[arg(long)]
        order: usize,
        /// Knot list, generator expression, or path to a knot file.
        #[arg(long)]
        knots: String,
        /// Strategy: auto | q | qhat | s | uniform.
        #[arg(long, default_value = "auto")]
        strategy: String,
        /// Cross-check all applicable strategies and report the deviation.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sizes of the index sets behind the weight formulas.
    Cardinalities {
        #[arg(long = "n-max", default_value_t = 10)]
        n_max: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tabulate the normalized basis over the evaluation domain.
    Basis {
        #[arg(long)]
        family: String,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        knots: String,
        /// Number of equispaced samples, endpoints included.
        #[arg(long, default_value_t = 401)]
        samples: usize,
        /// Write an SVG plot of the basis functions.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Circle (or circle segment) as a normalized B-spline curve.
    Circle {
        /// Odd order m >= 3.
        #[arg(long)]
        order: usize,
        /// Polygon side count p >= m.
        #[arg(long)]
        sides: usize,
        /// Phase of the control polygon; defaults to pi/p.
        #[arg(long)]
        theta: Option<String>,
        /// Restrict to the segment [2a pi/p, 2b pi/p): two integers a b.
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        segment: Option<Vec<usize>>,
        /// Number of curve samples for --samples-out and --svg.
        #[arg(long, default_value_t = 512)]
        samples: usize,
        /// Write the sampled curve as CSV to this path.
        #[arg(long = "samples-out")]
        samples_out: Option<PathBuf>,
        /// Write an SVG of polygon, control points, and curve.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Insert a knot into a curve model without changing its shape.
    Insert {
        /// Curve model JSON (as emitted by `circle --json`), or '-' for stdin.
        #[arg(long)]
        model: String,
        /// Parameter of the new knot (accepts pi expressions).
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Least-squares convergence study against a target function.
    Approx {
        #[arg(long)]
        family: String,
        /// Comma separated odd orders, e.g. 3,5,7.
        #[arg(long, default_value = "3,5")]
        orders: String,
        /// Refinement levels l = 1..levels with p = 2^(l+1).
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// builtin, or a path to a two-column CSV of x,f(x) samples.
        #[arg(long, default_value = "builtin")]
        target: String,
        /// Sample count for the builtin target.
        #[arg(long, default_value_t = 10001)]
        samples: usize,
        /// Lift the desk-scale caps (order <= 11, levels <= 5).
        #[arg(long)]
        full: bool,
        /// Write an SVG log-log error plot.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// 17 significant digits: the round-trip-exact CSV format.
fn full(v: f64) -> String {
    format!("{v:.16e}")
}

/// 6 significant digits for human-readable summaries.
fn human(v: f64) -> String {
    format!("{v:.5e}")
}

fn write_output(path: Option<&Path>, force: bool, content: &str) -> Result<(), String> {
    match path {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(p) => {
            if p.exists() && !force {
                return Err(format!(
                    "refusing to overwrite {} (pass --force)",
                    p.display()
                ));
            }
            fs::write(p, content).map_err(|e| format!("cannot write {}: {e}", p.display()))
        }
    }
}

/// Inline knot text or a path to a file holding one.
fn load_knots(text: &str) -> Result<KnotVector, String> {
    let candidate = Path::new(text);
    let body = if candidate.is_file() {
        fs::read_to_string(candidate).map_err(|e| format!("cannot read {text}: {e}"))?
    } else {
        text.to_string()
    };
    KnotVector::parse(&body).map_err(|e| e.to_string())
}

fn parse_strategy(text: &str) -> Result<Strategy, String> {
    match text {
        "auto" => Ok(Strategy::Auto),
        "q" => Ok(Strategy::FullPermutations),
        "qhat" => Ok(Strategy::CanonicalPairings),
        "s" => Ok(Strategy::SignVectors),
        "uniform" => Ok(Strategy::UniformClosedForm),
        other => Err(format!(
            "unknown strategy {other:?} (expected auto|q|qhat|s|uniform)"
        )),
    }
}

#[derive(Serialize, Deserialize)]
struct CurveModelJson {
    family: String,
    order: usize,
    knots: Vec<f64>,
    control_points: Vec<Vec<f64>>,
}

impl CurveModelJson {
    fn from_model(model: &CurveModel) -> Self {
        CurveModelJson {
            family: model.spec().family().name().to_string(),
            order: model.spec().order(),
            knots: model.spec().knots().values().to_vec(),
            control_points: model.control_points().to_vec(),
        }
    }

    fn into_model(self) -> Result<CurveModel, String> {
        let family = Family::parse(&self.family).map_err(|e| e.to_string())?;
        let knots = KnotVector::new(self.knots).map_err(|e| e.to_string())?;
        let spec = BasisSpec::new(family, self.order, knots).map_err(|e| e.to_string())?;
        CurveModel::new(spec, self.control_points).map_err(|e| e.to_string())
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("THSPLINES_THREADS") {
        if let Ok(k) = threads.trim().parse::<usize>() {
            if k >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(), // usage errors exit 2, --help/--version exit 0
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<(), String> {
    match command {
        Command::Weights {
            family,
            order,
            knots,
            strategy,
            check,
            output,
        } => cmd_weights(&family, order, &knots, &strategy, check, &output),
        Command::Cardinalities { n_max, output } => cmd_cardinalities(n_max, &output),
        Command::Basis {
            family,
            order,
            knots,
            samples,
            svg,
            output,
        } => cmd_basis(&family, order, &knots, samples, svg.as_deref(), &output),
        Command::Circle {
            order,
            sides,
            theta,
            segment,
            samples,
            samples_out,
            svg,
            output,
        } => cmd_circle(
            order,
            sides,
            theta.as_deref(),
            segment.as_deref(),
            samples,
            samples_out.as_deref(),
            svg.as_deref(),
            &output,
        ),
        Command::Insert { model, at, output } => cmd_insert(&model, &at, &output),
        Command::Approx {
            family,
            orders,
            levels,
            target,
            samples,
            full,
            svg,
            output,
        } => cmd_approx(
            &family,
            &orders,
            levels,
            &target,
            samples,
            full,
            svg.as_deref(),
            &output,
        ),
    }
}

fn cmd_weights(
    family: &str,
    order: usize,
    knots: &str,
    strategy: &str,
    check: bool,
    output: &OutputArgs,
) -> Result<(), String> {
    let family = Family::parse(family).map_err(|e| e.to_string())?;
    let knots = load_knots(knots)?;
    let spec = BasisSpec::new(family, order, knots).map_err(|e| e.to_string())?;
    let report = spec.validate();
    if !report.strict_ok {
        eprintln!(
            "warning: {} window(s) exceed the strict spacing bound (first at j = {})",
            report.strict_violations.len(),
            report.strict_violations[0]
        );
    }
    if !report.relaxed_ok {
        eprintln!(
            "warning: {} window(s) exceed the relaxed spacing bound; weights may lose positivity",
            report.relaxed_violations.len()
        );
    }
    let strategy = parse_strategy(strategy)?;
    let set = WeightSet::compute(&spec, strategy).map_err(|e| e.to_string())?;

    let check_result = if check { Some(run_weight_checks(&spec, &set)?) } else { None };

    if output.json {
        let body = serde_json::json!({
            "family": family.name(),
            "order": order,
            "strategy": strategy.name(),
            "knots": spec.knots().values(),
            "weights": set.weights(),
            "max_check_deviation": check_result,
        });
        write_output(
            output.out.as_deref(),
            output.force,
            &format!("{}\n", serde_json::to_string_pretty(&body).unwrap()),
        )?;
    } else {
        let mut csv = String::from("j,w\n");
        for (j, w) in set.weights().iter().enumerate() {
            csv.push_str(&format!("{j},{}\n", full(*w)));
        }
        write_output(output.out.as_deref(), output.force, &csv)?;
        if let Some(dev) = check_result {
            eprintln!("max cross-strategy deviation: {}", human(dev));
        }
    }
    Ok(())
}

/// Recomputes every applicable strategy per index and returns the largest
/// relative deviation from the computed set.
fn run_weight_checks(spec: &BasisSpec, set: &WeightSet) -> Result<f64, String> {
    let n = spec.half_degree();
    let mut max_dev = 0.0f64;
    for j in 0..set.len() {
        let reference = set.get(j);
        let scale = reference.abs().max(1.0);
        let mut others: Vec<f64> = Vec::new();
        others.push(
            thsplines::weights::weight_sign_vectors(spec, j).map_err(|e| e.to_string())?,
        );
        if n <= MAX_HALF_DEGREE_FULL {
            others.push(weight_full_permutations(spec, j).map_err(|e| e.to_string())?);
        }
        if n <= MAX_HALF_DEGREE_PAIRINGS {
            others.push(weight_canonical_pairings(spec, j).map_err(|e| e.to_string())?);
        }
        if let Some(h) = spec.knots().uniform_spacing(j, spec.order()) {
            others.push(weight_uniform(spec, j, h).map_err(|e| e.to_string())?);
        }
        if spec.family() == Family::Trigonometric {
            others.push(weight_by_quadrature(spec, j).map_err(|e| e.to_string())?);
        }
        for w in others {
            max_dev = max_dev.max((w - reference).abs() / scale);
        }
    }
    Ok(max_dev)
}

fn cmd_cardinalities(n_max: usize, output: &OutputArgs) -> Result<(), String> {
    if n_max == 0 {
        return Err("--n-max must be at least 1".into());
    }
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let c = cardinalities(n).map_err(|e| e.to_string())?;
        rows.push((n, c));
    }
    if output.json {
        let body: Vec<_> = rows
            .iter()
            .map(|(n, c)| {
                serde_json::json!({
                    "n": n,
                    "permutations": c.permutations.to_string(),
                    "pairings": c.pairings.to_string(),
                    "sign_vectors": c.sign_vectors.to_string(),
                })
            })
            .collect();
        write_output(
            output.out.as_deref(),
            output.force,
            &format!("{}\n", serde_json::to_string_pretty(&body).unwrap()),
        )
    } else {
        let mut csv = String::from("n,permutations,pairings,sign_vectors\n");
        for (n, c) in rows {
            csv.push_str(&format!(
                "{n},{},{},{}\n",
                c.permutations, c.pairings, c.sign_vectors
            ));
        }
        write_output(output.out.as_deref(), output.force, &csv)
    }
}

fn cmd_basis(
    family: &str,
    order: usize,
    knots: &str,
    samples: usize,
    svg: Option<&Path>,
    output: &OutputArgs,
) -> Result<(), String> {
    if samples < 2 {
        return Err("--samples must be at least 2".into());
    }
    let family = Family::parse(family).map_err(|e| e.to_string())?;
    let knots = load_knots(knots)?;
    let spec = BasisSpec::new(family, order, knots).map_err(|e| e.to_string())?;
    let weights = WeightSet::compute(&spec, Strategy::Auto).map_err(|e| e.to_string())?;
    let (lo, hi) = spec.domain();
    if hi <= lo {
        return Err("the knot vector has an empty evaluation domain".into());
    }
    let xs: Vec<f64> = (0..samples)
        .map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64)
        .collect();
    let table = tabulate(&weights, &xs).map_err(|e| e.to_string())?;

    if output.json {
        let body = serde_json::json!({
            "family": family.name(),
            "order": order,
            "knots": spec.knots().values(),
            "x": xs,
            "values": table,
        });
        write_output(
            output.out.as_deref(),
            output.force,
            &format!("{}\n", serde_json::to_string_pretty(&body).unwrap()),
        )?;
    } else {
        let mut csv = String::from("x");
        for j in 0..spec.basis_count() {
            csv.push_str(&format!(",N_{j}"));
        }
        csv.push('\n');
        for (x, row) in xs.iter().zip(&table) {
            csv.push_str(&full(*x));
            for v in row {
                csv.push(',');
                csv.push_str(&full(*v));
            }
            csv.push('\n');
        }
        write_output(output.out.as_deref(), output.force, &csv)?;
    }

    if let Some(svg_path) = svg {
        let series: Vec<svg::Series> = (0..spec.basis_count())
            .map(|j| svg::Series {
                label: format!("N_{j}"),
                points: xs.iter().zip(&table).map(|(x, row)| (*x, row[j])).collect(),
            })
            .collect();
        let plot = svg::Plot {
            title: format!("{family} basis, order {order}"),
            series,
            markers: Vec::new(),
            log_x: false,
            log_y: false,
        };
        write_output(Some(svg_path), output.force, &plot.render())?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_circle(
    order: usize,
    sides: usize,
    theta: Option<&str>,
    segment: Option<&[usize]>,
    samples: usize,
    samples_out: Option<&Path>,
    svg: Option<&Path>,
    output: &OutputArgs,
) -> Result<(), String> {
    let mut circle = CircleSpec::new(order, sides).map_err(|e| e.to_string())?;
    if let Some(t) = theta {
        circle = circle.with_theta(parse_value(t).map_err(|e| e.to_string())?);
    }
    let model = match segment {
        Some(ab) => {
            circle = circle.with_segment(ab[0], ab[1]).map_err(|e| e.to_string())?;
            make_circle_segment(&circle).map_err(|e| e.to_string())?
        }
        None => make_circle(&circle).map_err(|e| e.to_string())?,
    };

    if output.json {
        let body = serde_json::to_string_pretty(&CurveModelJson::from_model(&model)).unwrap();
        write_output(output.out.as_deref(), output.force, &format!("{body}\n"))?;
    } else {
        let mut csv = String::from("j,x,y\n");
        for (j, p) in model.control_points().iter().enumerate() {
            csv.push_str(&format!("{j},{},{}\n", full(p[0]), full(p[1])));
        }
        write_output(output.out.as_deref(), output.force, &csv)?;
    }

    let (lo, hi) = model.domain();
    let curve_points: Vec<(f64, f64)> = (0..samples)
        .map(|i| {
            // stay inside the half-open domain
            let x = lo + (hi - lo) * i as f64 / samples as f64;
            let p = model.eval(x).expect("sample inside domain");
            (p[0], p[1])
        })
        .collect();

    if let Some(path) = samples_out {
        let mut csv = String::from("t,x,y\n");
        for (i, (x, y)) in curve_points.iter().enumerate() {
            let t = lo + (hi - lo) * i as f64 / samples as f64;
            csv.push_str(&format!("{},{},{}\n", full(t), full(*x), full(*y)));
        }
        write_output(Some(path), output.force, &csv)?;
    }

    if let Some(svg_path) = svg {
        let polygon: Vec<(f64, f64)> = model
            .control_points()
            .iter()
            .map(|p| (p[0], p[1]))
            .collect();
        let plot = svg::Plot {
            title: match segment {
                Some(ab) => format!(
                    "circle segment, order {order}, p = {sides}, a = {}, b = {}",
                    ab[0], ab[1]
                ),
                None => format!("circle, order {order}, p = {sides}"),
            },
            series: vec![
                svg::Series {
                    label: "curve".into(),
                    points: curve_points,
                },
                svg::Series {
                    label: "control polygon".into(),
                    points: polygon.clone(),
                },
            ],
            markers: polygon,
            log_x: false,
            log_y: false,
        };
        write_output(Some(svg_path), output.force, &plot.render())?;
    }
    Ok(())
}

fn cmd_insert(model: &str, at: &str, output: &OutputArgs) -> Result<(), String> {
    let body = if model == "-" {
        use std::io::Read;
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| format!("cannot read stdin: {e}"))?;
        text
    } else {
        fs::read_to_string(model).map_err(|e| format!("cannot read {model}: {e}"))?
    };
    let parsed: CurveModelJson =
        serde_json::from_str(&body).map_err(|e| format!("invalid model JSON: {e}"))?;
    let curve = parsed.into_model()?;
    let x_new = parse_value(at).map_err(|e| e.to_string())?;
    let refined = curve.insert_knot(x_new).map_err(|e| e.to_string())?;
    let json = serde_json::to_string_pretty(&CurveModelJson::from_model(&refined)).unwrap();
    write_output(output.out.as_deref(), output.force, &format!("{json}\n"))
}

#[allow(clippy::too_many_arguments)]
fn cmd_approx(
    family: &str,
    orders: &str,
    levels: usize,
    target: &str,
    samples: usize,
    full_scale: bool,
    svg: Option<&Path>,
    output: &OutputArgs,
) -> Result<(), String> {
    let family = Family::parse(family).map_err(|e| e.to_string())?;
    let orders: Vec<usize> = orders
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad order {t:?}")))
        .collect::<Result<_, _>>()?;
    if orders.is_empty() {
        return Err("need at least one order".into());
    }
    let (max_order, max_levels) = if full_scale { (15, 6) } else { (11, 5) };
    for &m in &orders {
        if m % 2 == 0 || m < 3 {
            return Err(format!("orders must be odd and >= 3, got {m}"));
        }
        if m > max_order {
            return Err(format!(
                "order {m} exceeds the desk-scale cap {max_order} (use --full)"
            ));
        }
    }
    if levels == 0 || levels > max_levels {
        return Err(format!(
            "levels must be in 1..={max_levels}{}",
            if full_scale { "" } else { " (use --full for more)" }
        ));
    }

    let file_samples: Option<Vec<(f64, f64)>> = if target == "builtin" {
        None
    } else {
        Some(load_target_file(target)?)
    };

    let mut rows: Vec<StudyRow> = Vec::new();
    for &m in &orders {
        let mut prev: Option<f64> = None;
        for level in 1..=levels {
            let p = 1usize << (level + 1);
            let spec = BasisSpec::new(family, m, make_fit_knots(m, p).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let problem = match &file_samples {
                None => FitProblem::sampled(spec, builtin_target, samples),
                Some(points) => FitProblem {
                    spec,
                    samples: points.clone(),
                },
            };
            let report = least_squares_fit(&problem).map_err(|e| e.to_string())?;
            let at_floor = report.linf_error < ERROR_FLOOR;
            let rate = match prev {
                Some(e_prev) if !at_floor && e_prev >= ERROR_FLOOR => {
                    Some((e_prev / report.linf_error).log2())
                }
                _ => None,
            };
            rows.push(StudyRow {
                family,
                order: m,
                level,
                subdivisions: p,
                ndof: report.ndof,
                linf_error: report.linf_error,
                rate,
                at_floor,
            });
            prev = Some(report.linf_error);
        }
    }

    if output.json {
        let body: Vec<_> = rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "family": r.family.name(),
                    "order": r.order,
                    "level": r.level,
                    "p": r.subdivisions,
                    "ndof": r.ndof,
                    "linf_error": r.linf_error,
                    "rate": r.rate,
                    "at_floor": r.at_floor,
                })
            })
            .collect();
        write_output(
            output.out.as_deref(),
            output.force,
            &format!("{}\n", serde_json::to_string_pretty(&body).unwrap()),
        )?;
    } else {
        let mut csv = String::from("family,order,level,p,ndof,linf_error,rate,at_floor\n");
        for r in &rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.family.name(),
                r.order,
                r.level,
                r.subdivisions,
                r.ndof,
                full(r.linf_error),
                r.rate.map(|v| format!("{v:.3}")).unwrap_or_default(),
                r.at_floor
            ));
        }
        write_output(output.out.as_deref(), output.force, &csv)?;
    }

    if let Some(svg_path) = svg {
        let series: Vec<svg::Series> = orders
            .iter()
            .map(|&m| svg::Series {
                label: format!("order {m}"),
                points: rows
                    .iter()
                    .filter(|r| r.order == m)
                    .map(|r| (r.ndof as f64, r.linf_error.max(1e-17)))
                    .collect(),
            })
            .collect();
        let plot = svg::Plot {
            title: format!("{family} least-squares error vs NDOF"),
            series,
            markers: Vec::new(),
            log_x: true,
            log_y: true,
        };
        write_output(Some(svg_path), output.force, &plot.render())?;
    }
    Ok(())
}

fn load_target_file(path: &str) -> Result<Vec<(f64, f64)>, String> {
    let body = fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
    let mut points = Vec::new();
    for (i, line) in body.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
            return Err(format!("{path}:{}: expected two columns", i + 1));
        };
        if i == 0 && a.parse::<f64>().is_err() {
            continue; // header row
        }
        let x: f64 = a.parse().map_err(|_| format!("{path}:{}: bad x {a:?}", i + 1))?;
        let y: f64 = b.parse().map_err(|_| format!("{path}:{}: bad value {b:?}", i + 1))?;
        points.push((x, y));
    }
    if points.is_empty() {
        return Err(format!("{path}: no samples"));
    }
    Ok(points)
}
